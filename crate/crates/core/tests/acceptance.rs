//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints a PASS or FAIL line; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soph_pricing::commitment::sweep_commitment;
use soph_pricing::continuation::{implement_for_price, implement_sophisticated};
use soph_pricing::equilibrium::{regime_boundary, solve_equilibrium, sweep, TwoRoundEquilibrium};
use soph_pricing::infinite_horizon::{
    check_properties_ab, discounted_values, exact_choice_utilities, exact_conditional_revenue, naive_mdp_value,
    revenue_lower_bound, verify_one_shot_deviation, BeliefState, BuyerKind, DiscreteModel, Exact, Example3pt,
    NoLearning,
};
use soph_pricing::linear_oracle::{constants, rev_closed, seller_round1, welfare_closed};
use soph_pricing::simulator::{simulate_with, SimConfig};
use soph_pricing::{Distribution, Exec, Focus};

type Check = std::result::Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)*));
        }
    };
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn family() -> Vec<(String, Distribution)> {
    let mut out = vec![("uniform".to_string(), Distribution::uniform())];
    for c in [0.5, 2.0, 3.0] {
        out.push((format!("power:{c}"), Distribution::power(c).unwrap()));
    }
    out
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn revenue_endpoints() -> Check {
    let u = Distribution::uniform();
    let r0 = solve_equilibrium(&u, 0.0).map_err(err)?.rev_total;
    let r1 = solve_equilibrium(&u, 1.0).map_err(err)?.rev_total;
    ensure!((r0 - 4.0 / 7.0).abs() <= 1e-5, "Rev(0) = {r0}");
    ensure!((r1 - 0.45).abs() <= 1e-5, "Rev(1) = {r1}");
    Ok(())
}

fn oracle_agreement() -> Check {
    let u = Distribution::uniform();
    let mus = grid(0.0, 1.0, 100);
    for eq in sweep(&u, &mus).map_err(err)? {
        let mu = eq.mu;
        let rev = rev_closed(mu).map_err(err)?;
        let p1 = seller_round1(mu).map_err(err)?;
        ensure!((eq.rev_total - rev).abs() <= 1e-5, "mu={mu}: rev {} vs closed form {rev}", eq.rev_total);
        ensure!((eq.cont.p1 - p1).abs() <= 1e-5, "mu={mu}: p1 {} vs closed form {p1}", eq.cont.p1);
        let res = eq.cont.indifference_residual();
        if eq.cont.all_reject {
            ensure!(res >= -1e-8, "mu={mu}: all-reject residual {res}");
        } else {
            ensure!(res.abs() <= 1e-8, "mu={mu}: indifference residual {res}");
        }
    }
    Ok(())
}

fn phase_transition() -> Check {
    let u = Distribution::uniform();
    let rows = sweep(&u, &grid(0.0, 1.0, 50)).map_err(err)?;
    let b = regime_boundary(&u, &rows, 1e-7).map_err(err)?.ok_or("no regime flip on the grid")?;
    ensure!((b - 0.630209).abs() <= 1e-3, "boundary at {b}");
    let mu_bar = constants().mu_bar;
    ensure!((b - mu_bar).abs() <= 1e-6, "boundary {b} vs closed form {mu_bar}");
    let lo = solve_equilibrium(&u, b - 1e-6).map_err(err)?;
    let hi = solve_equilibrium(&u, b + 1e-6).map_err(err)?;
    ensure!(lo.regime == Focus::Naive && hi.regime == Focus::Sophisticated, "regimes do not flip around {b}");
    let jump = (lo.cont.p1 - hi.cont.p1).abs().max((lo.cont.p2a - hi.cont.p2a).abs());
    ensure!(jump > 1e-2, "prices move by only {jump}");
    let gap = (lo.rev_total - hi.rev_total).abs();
    ensure!(gap <= 1e-5, "revenue jumps by {gap}");
    Ok(())
}

fn sophisticated_suffix_increasing() -> Check {
    let mus = grid(0.0, 1.0, 50);
    for (name, d) in family() {
        let rows = sweep(&d, &mus).map_err(err)?;
        let start = rows.iter().rposition(|r| r.regime == Focus::Naive).map_or(0, |k| k + 1);
        let suffix = &rows[start..];
        ensure!(!suffix.is_empty(), "{name}: no sophisticated-focused rows");
        for w in suffix.windows(2) {
            ensure!(
                w[1].rev_total > w[0].rev_total,
                "{name}: revenue not increasing between mu={} and mu={}",
                w[0].mu,
                w[1].mu
            );
        }
    }
    Ok(())
}

fn ordering_invariants() -> Check {
    let dists = family();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for k in 0..10_000 {
        let (name, d) = &dists[rng.random_range(0..dists.len())];
        let mu: f64 = rng.random_range(0.0..=1.0);
        let p1: f64 = rng.random_range(0.0..=1.0);
        let c = implement_for_price(d, mu, p1).map_err(|e| format!("case {k} ({name}, mu={mu}, p1={p1}): {e}"))?;
        let bad = c.ordering_violations(d, 1e-9);
        ensure!(bad.is_empty(), "case {k} ({name}, mu={mu}, p1={p1}): {bad:?}");
    }
    Ok(())
}

#[allow(clippy::approx_constant)]
fn mixed_prices() -> Check {
    let u = Distribution::uniform();
    let mu: f64 = 0.81;
    let r = mu.sqrt();
    let p1 = (2.0 * r + 4.0 * mu) / (4.0 + 8.0 * r + 7.0 * mu + 2.0 * mu.powf(1.5) - mu * mu);
    let t = p1 * (1.0 + r) / r;
    let c = implement_sophisticated(&u, mu, t).map_err(err)?;
    let checks = [
        ("pL", c.p2r.lo(), p1 * (1.0 + r) / 2.0, 0.27093),
        ("pH", c.p2r.hi(), t / 2.0, 0.30103),
        ("alpha", c.p2r.alpha_lo(), 1.0 / (1.0 + r), 0.5263),
        ("p1", c.p1, p1, 0.28519),
    ];
    for (name, got, closed, printed) in checks {
        ensure!((got - closed).abs() <= 1e-4, "{name} = {got}, closed form {closed}");
        ensure!((got - printed).abs() <= 1e-4, "{name} = {got}, published {printed}");
    }
    let eq = solve_equilibrium(&u, mu).map_err(err)?;
    ensure!((eq.cont.t - t).abs() <= 1e-5, "equilibrium threshold {} vs {t}", eq.cont.t);
    let one = solve_equilibrium(&u, 1.0).map_err(err)?.cont;
    ensure!(one.p2r.is_deterministic(), "mu=1 reject price is still a lottery: {:?}", one.p2r);
    ensure!(one.p2r.lo() == one.p2r.hi(), "mu=1 lottery endpoints differ");
    Ok(())
}

fn dominance_and_welfare() -> Check {
    for (name, d) in family() {
        for eq in sweep(&d, &grid(0.0, 1.0, 50)).map_err(err)? {
            ensure!(
                eq.rev_naive_percap >= eq.rev_soph_percap - 1e-12,
                "{name} mu={}: R_n {} < R_s {}",
                eq.mu,
                eq.rev_naive_percap,
                eq.rev_soph_percap
            );
        }
    }
    let u = Distribution::uniform();
    let rows = sweep(&u, &grid(0.64, 1.0, 36)).map_err(err)?;
    for w in rows.windows(2) {
        ensure!(w[1].welfare < w[0].welfare, "welfare rises between mu={} and mu={}", w[0].mu, w[1].mu);
    }
    let w1 = rows.last().unwrap().welfare;
    ensure!((w1 - 0.55).abs() <= 1e-6, "Welf(1) = {w1}");
    let closed = welfare_closed(1.0).map_err(err)?;
    ensure!((w1 - closed).abs() <= 1e-6, "Welf(1) = {w1}, closed form {closed}");
    Ok(())
}

fn sim_json(
    eq: &TwoRoundEquilibrium,
    d: &Distribution,
    exec: Exec,
) -> std::result::Result<(String, f64, f64, f64, f64), String> {
    let cfg = SimConfig { trials: 1_000_000, seed: 0x5eed, mu: eq.mu, dist: d, profile: eq.cont.clone() };
    let r = simulate_with(&cfg, exec).map_err(err)?;
    let json = serde_json::to_string(&r).map_err(err)?;
    Ok((json, r.rev_mean, r.rev_stderr, r.welfare_mean, r.welfare_stderr))
}

fn monte_carlo() -> Check {
    let u = Distribution::uniform();
    for mu in [0.0, 0.5, 0.81, 1.0] {
        let eq = solve_equilibrium(&u, mu).map_err(err)?;
        let (a, rev, rev_se, welf, welf_se) = sim_json(&eq, &u, Exec::default())?;
        ensure!((rev - eq.rev_total).abs() <= 4.0 * rev_se, "mu={mu}: revenue {rev} ± {rev_se} vs {}", eq.rev_total);
        ensure!((welf - eq.welfare).abs() <= 4.0 * welf_se, "mu={mu}: welfare {welf} ± {welf_se} vs {}", eq.welfare);
        let (b, ..) = sim_json(&eq, &u, Exec::default())?;
        ensure!(a == b, "mu={mu}: repeated run differs");
        let (c, ..) = sim_json(&eq, &u, Exec::Sequential)?;
        ensure!(a == c, "mu={mu}: sequential run differs");
    }
    Ok(())
}

fn infinite_horizon_example() -> Check {
    for eps in [0.0, 0.01, 0.05] {
        let m = DiscreteModel::example(eps).map_err(err)?;
        let t = discounted_values(&m, &Example3pt).map_err(err)?;
        ensure!(
            (t.root_soph_revenue - 26.0 / 3.0).abs() <= 1e-12,
            "eps={eps}: on-path revenue {}",
            t.root_soph_revenue
        );
        let exact = exact_conditional_revenue(&m, &Example3pt, BuyerKind::Sophisticated).map_err(err)?;
        ensure!(exact == Exact::new(26, 3), "eps={eps}: exact on-path revenue {exact}");

        let (acc, rej) = exact_choice_utilities(&m, &Example3pt, &BeliefState::full(&m), 2.0, 20.0).map_err(err)?;
        ensure!(
            acc == Exact::from_integer(38) && rej == Exact::from_integer(38),
            "eps={eps}: v=20 utilities {acc} vs {rej}"
        );

        let cert = verify_one_shot_deviation(&m, &Example3pt, 1e-9).map_err(err)?;
        ensure!(
            cert.clean,
            "eps={eps}: certificate {:?} {:?}",
            cert.seller_violations.first(),
            cert.buyer_violations.first()
        );
        let props = check_properties_ab(&m, &Example3pt).map_err(err)?;
        ensure!(props.naive_justified && props.above_baseline, "eps={eps}: {props:?}");

        let lb = revenue_lower_bound(&m);
        ensure!((lb - 4.0 / 3.0).abs() <= 1e-12, "eps={eps}: lower bound {lb}");
        let rev_n = naive_mdp_value(&m).map_err(err)?.value;
        ensure!((rev_n - 244.0 / 9.0).abs() <= 1e-9, "eps={eps}: naive MDP value {rev_n}");
        let floor = (m.lowest() / (1.0 - m.delta)).max((1.0 - m.mu) * rev_n);
        ensure!(t.root_value >= lb, "eps={eps}: revenue {} below {lb}", t.root_value);
        ensure!(t.root_value >= floor, "eps={eps}: revenue {} below {floor}", t.root_value);
    }
    Ok(())
}

fn no_learning_fragility() -> Check {
    for eps in [1e-6, 0.01, 0.05, 0.5, 1.0] {
        let m = DiscreteModel::example(eps).map_err(err)?;
        let cert = verify_one_shot_deviation(&m, &NoLearning, 1e-9).map_err(err)?;
        ensure!(!cert.seller_violations.is_empty(), "eps={eps}: no seller deviation found");
    }
    let u = vec![1.0 / 3.0; 3];
    let m = DiscreteModel::new(vec![0.0, 10.0, 20.0], u.clone(), u, 1.0, 2.0 / 3.0).map_err(err)?;
    let cert = verify_one_shot_deviation(&m, &NoLearning, 1e-9).map_err(err)?;
    ensure!(cert.clean, "full sophistication with 0 in support: {cert:?}");
    Ok(())
}

fn commitment_sweep() -> Check {
    let u = Distribution::uniform();
    let rows = sweep_commitment(&u, &grid(0.0, 1.0, 20)).map_err(err)?;
    for w in rows.windows(2) {
        ensure!(w[1].rev <= w[0].rev, "revenue rises between mu={} and mu={}", w[0].mu, w[1].mu);
    }
    let (first, last) = (rows[0].rev, rows[rows.len() - 1].rev);
    ensure!((first - 4.0 / 7.0).abs() <= 1e-4, "Rev(0) = {first}");
    ensure!((last - 0.5).abs() <= 1e-4, "Rev(1) = {last}");
    for r in &rows {
        ensure!(r.schedule.is_ordered(), "mu={}: unordered optimum {:?}", r.mu, r.schedule);
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 linear revenue endpoints", revenue_endpoints),
        ("2 closed-form agreement", oracle_agreement),
        ("3 regime flip", phase_transition),
        ("4 sophisticated-focused revenue increasing", sophisticated_suffix_increasing),
        ("5 price ordering", ordering_invariants),
        ("6 mixed reject price", mixed_prices),
        ("7 per-capita dominance and welfare", dominance_and_welfare),
        ("8 Monte-Carlo consistency", monte_carlo),
        ("9 infinite-horizon example", infinite_horizon_example),
        ("10 no-learning fragility", no_learning_fragility),
        ("11 commitment benchmark", commitment_sweep),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
