//! One function per subcommand, each returning the rendered output bytes.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use soph_pricing::commitment::sweep_commitment_with;
use soph_pricing::equilibrium::{self, regime_boundary, sweep_with, TwoRoundEquilibrium};
use soph_pricing::infinite_horizon::{
    check_properties_ab, commitment_benchmark, discounted_values, epsilon_threshold, naive_mdp_value,
    revenue_lower_bound, verify_one_shot_deviation, BenchmarkReport, Certificate, DiscreteModel, EpsilonSearch,
    Example3pt, NoLearning, PropertiesReport, StrategyProfile, ValueTable,
};
use soph_pricing::simulator::{simulate_with, SimConfig};
use soph_pricing::{linear_oracle, Continuation, Distribution, Exec};

use crate::output::{render_json, render_table, Format, SCHEMA_VERSION};
use crate::parse::{DistArg, MuGrid};

/// Bisection steps for `--epsilon-search`.
const EPSILON_ITERATIONS: usize = 40;

#[derive(Serialize)]
struct DistHeader {
    dist: String,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SweepRow {
    schema_version: u32,
    mu: f64,
    p1: f64,
    t: f64,
    p2A: f64,
    p2R_lo: f64,
    p2R_hi: f64,
    alpha_lo: f64,
    regime: &'static str,
    rev: f64,
    rev_naive: f64,
    rev_soph: f64,
    welfare: f64,
}

impl SweepRow {
    fn new(mu: f64, c: &Continuation, rev: f64, rev_naive: f64, rev_soph: f64, welfare: f64) -> Self {
        SweepRow {
            schema_version: SCHEMA_VERSION,
            mu,
            p1: c.p1,
            t: c.t,
            p2A: c.p2a,
            p2R_lo: c.p2r.lo(),
            p2R_hi: c.p2r.hi(),
            alpha_lo: c.p2r.alpha_lo(),
            regime: c.focus.as_str(),
            rev,
            rev_naive,
            rev_soph,
            welfare,
        }
    }

    fn from_eq(eq: &TwoRoundEquilibrium) -> Self {
        Self::new(eq.mu, &eq.cont, eq.rev_total, eq.rev_naive_percap, eq.rev_soph_percap, eq.welfare)
    }
}

pub fn sweep(dist: &DistArg, mu: &MuGrid, tol: f64, format: Option<Format>, exec: Exec) -> Result<Vec<u8>> {
    if !(tol.is_finite() && tol > 0.0) {
        bail!("--tol must be positive");
    }
    let d = dist.load()?;
    let eqs = sweep_with(&d, &mu.0, exec)?;
    let rows: Vec<SweepRow> = eqs.iter().map(SweepRow::from_eq).collect();
    let format = format.unwrap_or(Format::Csv);
    if format == Format::Csv {
        return render_table("sweep", (), &rows, format);
    }
    #[derive(Serialize)]
    struct Header {
        dist: String,
        /// Naive-to-sophisticated flip past the last naive-focused row, if any.
        regime_boundary: Option<f64>,
    }
    let header = Header { dist: dist.to_string(), regime_boundary: regime_boundary(&d, &eqs, tol)? };
    render_table("sweep", header, &rows, format)
}

pub fn solve(dist: &DistArg, mu: &MuGrid, format: Option<Format>, exec: Exec) -> Result<Vec<u8>> {
    let d = dist.load()?;
    let eq = equilibrium::solve_equilibrium_with(&d, mu.single()?, exec)?;
    match format.unwrap_or(Format::Json) {
        Format::Csv => render_table("solve", (), &[SweepRow::from_eq(&eq)], Format::Csv),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                command: &'a str,
                dist: String,
                equilibrium: &'a TwoRoundEquilibrium,
            }
            render_json(&Out {
                schema_version: SCHEMA_VERSION,
                command: "solve",
                dist: dist.to_string(),
                equilibrium: &eq,
            })
        }
    }
}

#[derive(Serialize)]
struct SimRow {
    schema_version: u32,
    mu: f64,
    trials: u64,
    seed: u64,
    rev_mean: f64,
    rev_stderr: f64,
    rev_analytic: f64,
    welfare_mean: f64,
    welfare_stderr: f64,
    welfare_analytic: f64,
    surplus_mean: f64,
    surplus_stderr: f64,
    rev_naive: f64,
    rev_naive_stderr: f64,
    rev_soph: f64,
    rev_soph_stderr: f64,
    accept_round1: f64,
    buy_round2_after_accept: f64,
    buy_round2_after_reject: f64,
}

pub fn simulate(
    dist: &DistArg,
    mu: &MuGrid,
    trials: u64,
    seed: u64,
    format: Option<Format>,
    exec: Exec,
) -> Result<Vec<u8>> {
    if trials == 0 {
        bail!("--trials must be positive");
    }
    let d = dist.load()?;
    let mut rows = Vec::with_capacity(mu.0.len());
    for &m in &mu.0 {
        let eq = equilibrium::solve_equilibrium_with(&d, m, exec)?;
        let cfg = SimConfig { trials, seed, mu: m, dist: &d, profile: eq.cont.clone() };
        let r = simulate_with(&cfg, exec)?;
        rows.push(SimRow {
            schema_version: SCHEMA_VERSION,
            mu: m,
            trials,
            seed,
            rev_mean: r.rev_mean,
            rev_stderr: r.rev_stderr,
            rev_analytic: eq.rev_total,
            welfare_mean: r.welfare_mean,
            welfare_stderr: r.welfare_stderr,
            welfare_analytic: eq.welfare,
            surplus_mean: r.surplus_mean,
            surplus_stderr: r.surplus_stderr,
            rev_naive: r.rev_naive.mean,
            rev_naive_stderr: r.rev_naive.stderr,
            rev_soph: r.rev_soph.mean,
            rev_soph_stderr: r.rev_soph.stderr,
            accept_round1: r.accept_round1,
            buy_round2_after_accept: r.buy_round2_after_accept,
            buy_round2_after_reject: r.buy_round2_after_reject,
        });
    }
    render_table("simulate", DistHeader { dist: dist.to_string() }, &rows, format.unwrap_or(Format::Csv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Example3pt,
    NoLearning,
}

fn load_model(path: &Path) -> Result<DiscreteModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let m: DiscreteModel = match ext {
        "toml" => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        "json" => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        _ => bail!("model file must end in .toml or .json: {}", path.display()),
    };
    m.validate().with_context(|| format!("model {}", path.display()))?;
    Ok(m)
}

#[derive(Serialize)]
struct Bounds {
    revenue_lower_bound: f64,
    /// `max(lowest value / (1 - delta), naive mass * naive MDP value)`.
    revenue_floor: f64,
    naive_mdp_value: f64,
    naive_mdp_root_price: f64,
    benchmark: BenchmarkReport,
}

#[derive(Serialize)]
struct InfiniteReport {
    schema_version: u32,
    command: &'static str,
    profile: &'static str,
    model: DiscreteModel,
    revenue: f64,
    revenue_naive: f64,
    revenue_sophisticated: f64,
    clean: bool,
    certificate: Certificate,
    properties: PropertiesReport,
    bounds: Bounds,
    values: ValueTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_search: Option<EpsilonSearch>,
}

pub fn verify_infinite(
    path: &Path,
    profile: ProfileArg,
    tol: f64,
    epsilon_search: bool,
    format: Option<Format>,
) -> Result<Vec<u8>> {
    if format == Some(Format::Csv) {
        bail!("verify-infinite writes a JSON certificate; use --format json");
    }
    if !(tol.is_finite() && tol >= 0.0) {
        bail!("--tol must be non-negative");
    }
    let m = load_model(path)?;
    let (name, prof): (&'static str, &dyn StrategyProfile) = match profile {
        ProfileArg::Example3pt => ("example3pt", &Example3pt),
        ProfileArg::NoLearning => ("no-learning", &NoLearning),
    };
    let values = discounted_values(&m, prof)?;
    let certificate = verify_one_shot_deviation(&m, prof, tol)?;
    let properties = check_properties_ab(&m, prof)?;
    let mdp = naive_mdp_value(&m)?;
    let bounds = Bounds {
        revenue_lower_bound: revenue_lower_bound(&m),
        revenue_floor: (m.lowest() / (1.0 - m.delta)).max(m.naive_mass() * mdp.value),
        naive_mdp_value: mdp.value,
        naive_mdp_root_price: mdp.root_price,
        benchmark: commitment_benchmark(&m)?,
    };
    let epsilon_search = if epsilon_search {
        let build = |e: f64| {
            let mut mm = m.clone();
            mm.mu = 1.0 - e;
            mm.validate()?;
            Ok(mm)
        };
        Some(epsilon_threshold(build, prof, tol, EPSILON_ITERATIONS)?)
    } else {
        None
    };
    render_json(&InfiniteReport {
        schema_version: SCHEMA_VERSION,
        command: "verify-infinite",
        profile: name,
        revenue: values.root_value,
        revenue_naive: values.root_naive_revenue,
        revenue_sophisticated: values.root_soph_revenue,
        clean: certificate.clean,
        model: m,
        certificate,
        properties,
        bounds,
        values,
        epsilon_search,
    })
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct CommitmentRow {
    schema_version: u32,
    mu: f64,
    p1: f64,
    p2R: f64,
    p2A: f64,
    t: f64,
    rev: f64,
}

pub fn commitment(dist: &DistArg, mu: &MuGrid, format: Option<Format>, exec: Exec) -> Result<Vec<u8>> {
    let d = dist.load()?;
    let rows: Vec<CommitmentRow> = sweep_commitment_with(&d, &mu.0, exec)?
        .into_iter()
        .map(|s| CommitmentRow {
            schema_version: SCHEMA_VERSION,
            mu: s.mu,
            p1: s.schedule.p1,
            p2R: s.schedule.p2r,
            p2A: s.schedule.p2a,
            t: s.t,
            rev: s.rev,
        })
        .collect();
    render_table("commitment", DistHeader { dist: dist.to_string() }, &rows, format.unwrap_or(Format::Csv))
}

pub fn linear_oracle(mu: &MuGrid, format: Option<Format>) -> Result<Vec<u8>> {
    let u = Distribution::uniform();
    let mut rows = Vec::with_capacity(mu.0.len());
    for &m in &mu.0 {
        let p1 = linear_oracle::seller_round1(m)?;
        let c = linear_oracle::profile_continuation(m, p1)?;
        let (rn, rs) = equilibrium::per_capita_revenues(&u, &c);
        rows.push(SweepRow::new(m, &c, linear_oracle::rev_closed(m)?, rn, rs, equilibrium::welfare(&u, m, &c)));
    }
    #[derive(Serialize)]
    struct Header {
        dist: &'static str,
        mu_hat: f64,
        mu_bar: f64,
    }
    let k = linear_oracle::constants();
    let header = Header { dist: "uniform", mu_hat: k.mu_hat, mu_bar: k.mu_bar };
    render_table("linear-oracle", header, &rows, format.unwrap_or(Format::Csv))
}
