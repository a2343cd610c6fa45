//! Monte-Carlo play of the two-round game and best-response checks.
//!
//! Trials are cut into fixed chunks of [`CHUNK_TRIALS`]. Chunk `i` draws from a
//! ChaCha8 generator seeded with the run seed on stream `i`, so the report does
//! not depend on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuation::{implement_for_price, Continuation};
use crate::dist::Distribution;
use crate::equilibrium::revenue_of_continuation;
use crate::error::{Error, Result};
use crate::optim::KahanSum;
use crate::parallel::{map_range, map_slice, Exec};

pub const CHUNK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct SimConfig<'a> {
    pub trials: u64,
    pub seed: u64,
    pub mu: f64,
    pub dist: &'a Distribution,
    pub profile: Continuation,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub seed: u64,
    pub mu: f64,
    pub rev_mean: f64,
    pub rev_stderr: f64,
    pub welfare_mean: f64,
    pub welfare_stderr: f64,
    pub surplus_mean: f64,
    pub surplus_stderr: f64,
    pub rev_naive: Estimate,
    pub rev_soph: Estimate,
    pub accept_round1: f64,
    pub buy_round2_after_accept: f64,
    pub buy_round2_after_reject: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    sum: KahanSum,
    sq: KahanSum,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sq.add(x * x);
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum.merge(&o.sum);
        self.sq.merge(&o.sq);
    }

    fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate { mean: 0.0, stderr: 0.0, count: 0 };
        }
        let n = self.n as f64;
        let mean = self.sum.value() / n;
        let var = if self.n > 1 { ((self.sq.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, stderr: (var / n).sqrt(), count: self.n }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    rev: Moments,
    welfare: Moments,
    surplus: Moments,
    naive: Moments,
    soph: Moments,
    accepts: u64,
    accept_buys: u64,
    reject_buys: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.rev.merge(&o.rev);
        self.welfare.merge(&o.welfare);
        self.surplus.merge(&o.surplus);
        self.naive.merge(&o.naive);
        self.soph.merge(&o.soph);
        self.accepts += o.accepts;
        self.accept_buys += o.accept_buys;
        self.reject_buys += o.reject_buys;
    }
}

fn run_chunk(cfg: &SimConfig, chunk: u64, mean_value: f64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk);
    let start = chunk * CHUNK_TRIALS;
    let n = CHUNK_TRIALS.min(cfg.trials - start);
    let c = &cfg.profile;
    let mut tally = Tally::default();
    for _ in 0..n {
        let soph = rng.random::<f64>() < cfg.mu;
        let v = cfg.dist.quantile(rng.random::<f64>());
        let draw = rng.random::<f64>();
        let threshold = if soph { c.t } else { c.p1 };
        let accept = v >= threshold;
        let p2 = if accept { c.p2a } else { lottery_draw(c, draw) };
        let buy2 = v >= p2;
        let units = accept as u8 + buy2 as u8;
        let rev = if accept { c.p1 } else { 0.0 } + if buy2 { p2 } else { 0.0 };
        tally.rev.push(rev);
        tally.welfare.push(units as f64 * mean_value);
        tally.surplus.push(units as f64 * v);
        if soph {
            tally.soph.push(rev);
        } else {
            tally.naive.push(rev);
        }
        if accept {
            tally.accepts += 1;
            tally.accept_buys += buy2 as u64;
        } else {
            tally.reject_buys += buy2 as u64;
        }
    }
    tally
}

fn lottery_draw(c: &Continuation, u: f64) -> f64 {
    let mut acc = 0.0;
    for &(p, w) in c.p2r.points() {
        acc += w;
        if u < acc {
            return p;
        }
    }
    c.p2r.hi()
}

pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    simulate_with(cfg, Exec::default())
}

pub fn simulate_with(cfg: &SimConfig, exec: Exec) -> Result<SimReport> {
    if cfg.trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.mu) {
        return Err(Error::Domain(format!("mu={} outside [0,1]", cfg.mu)));
    }
    let chunks = cfg.trials.div_ceil(CHUNK_TRIALS) as usize;
    let mean_value = cfg.dist.mean();
    let parts = map_range(exec, chunks, |i| run_chunk(cfg, i as u64, mean_value));
    let mut t = Tally::default();
    for p in &parts {
        t.merge(p);
    }
    let n = cfg.trials as f64;
    let (rev, welfare, surplus) = (t.rev.estimate(), t.welfare.estimate(), t.surplus.estimate());
    let rejects = cfg.trials - t.accepts;
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(SimReport {
        trials: cfg.trials,
        seed: cfg.seed,
        mu: cfg.mu,
        rev_mean: rev.mean,
        rev_stderr: rev.stderr,
        welfare_mean: welfare.mean,
        welfare_stderr: welfare.stderr,
        surplus_mean: surplus.mean,
        surplus_stderr: surplus.stderr,
        rev_naive: t.naive.estimate(),
        rev_soph: t.soph.estimate(),
        accept_round1: t.accepts as f64 / n,
        buy_round2_after_accept: ratio(t.accept_buys, t.accepts),
        buy_round2_after_reject: ratio(t.reject_buys, rejects),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub v: f64,
    pub accept_utility: f64,
    pub reject_utility: f64,
    /// How far the preferred action is from the one the threshold prescribes.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub t: f64,
    pub points: Vec<ThresholdPoint>,
    pub max_violation: f64,
    pub single_crossing: bool,
}

pub const THRESHOLD_TOL: f64 = 1e-9;

/// Round-one utilities of a sophisticated buyer of value `v` who price-takes in
/// round two: `(accept, reject)`.
pub fn buyer_utilities(cont: &Continuation, v: f64) -> (f64, f64) {
    let accept = (v - cont.p1) + (v - cont.p2a).max(0.0);
    let reject = cont.p2r.expect(|p| (v - p).max(0.0));
    (accept, reject)
}

/// Checks that accepting is optimal exactly for values at or above the threshold.
pub fn verify_buyer_threshold(_d: &Distribution, _mu: f64, cont: &Continuation, v_grid: &[f64]) -> ThresholdReport {
    let points: Vec<_> = v_grid
        .iter()
        .map(|&v| {
            let (a, r) = buyer_utilities(cont, v);
            let violation = if v >= cont.t { (r - a).max(0.0) } else { (a - r).max(0.0) };
            ThresholdPoint { v, accept_utility: a, reject_utility: r, violation }
        })
        .collect();
    let max_violation = points.iter().map(|p| p.violation).fold(0.0, f64::max);
    ThresholdReport { t: cont.t, points, max_violation, single_crossing: max_violation <= THRESHOLD_TOL }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationReport {
    pub reference_revenue: f64,
    pub best_p1: f64,
    pub best_revenue: f64,
    /// `max(0, best_revenue - reference_revenue)`.
    pub regret: f64,
}

/// Largest revenue gain from moving the first-round price to a point of `p1_grid`
/// (each deviation followed by its own continuation).
pub fn verify_seller_deviation(
    d: &Distribution,
    mu: f64,
    reference: &Continuation,
    p1_grid: &[f64],
) -> Result<DeviationReport> {
    verify_seller_deviation_with(d, mu, reference, p1_grid, Exec::default())
}

pub fn verify_seller_deviation_with(
    d: &Distribution,
    mu: f64,
    reference: &Continuation,
    p1_grid: &[f64],
    exec: Exec,
) -> Result<DeviationReport> {
    let reference_revenue = revenue_of_continuation(d, mu, reference).rev_total;
    let revs = map_slice(exec, p1_grid, |&p| {
        implement_for_price(d, mu, p).map(|c| revenue_of_continuation(d, mu, &c).rev_total)
    });
    let mut best = (reference.p1, reference_revenue);
    for (&p, r) in p1_grid.iter().zip(revs) {
        let r = r?;
        if r > best.1 {
            best = (p, r);
        }
    }
    Ok(DeviationReport {
        reference_revenue,
        best_p1: best.0,
        best_revenue: best.1,
        regret: (best.1 - reference_revenue).max(0.0),
    })
}

/// `n` evenly spaced points on [0,1].
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}
