//! Two-round pricing when the seller commits to the whole schedule up front.

use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::parallel::{map_range, map_slice, Exec};

/// Points per axis of the coarse search grid.
pub const COARSE_GRID: usize = 64;
/// Points per axis of each refinement grid.
pub const REFINE_GRID: usize = 8;
/// Refinement rounds; each shrinks the spacing by a factor 2/7.
pub const REFINE_ROUNDS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommitmentSchedule {
    pub p1: f64,
    pub p2r: f64,
    pub p2a: f64,
}

impl CommitmentSchedule {
    pub fn new(p1: f64, p2r: f64, p2a: f64) -> Self {
        CommitmentSchedule { p1, p2r, p2a }
    }

    /// Value at which a sophisticated buyer switches from one unit at the reject
    /// price to two units.
    pub fn threshold(&self) -> f64 {
        self.p1 + self.p2a - self.p2r
    }

    pub fn is_ordered(&self) -> bool {
        self.p2r <= self.p1 && self.p1 <= self.p2a
    }

    fn key(&self) -> [f64; 3] {
        [self.p1, self.p2r, self.p2a]
    }
}

/// Expected revenue of a committed schedule. Naive buyers price-take in each
/// round. A sophisticated buyer picks the best of buying nothing, one unit in
/// round two after rejecting, one unit in round one only, or both units; ties go
/// to the option that pays the seller more.
pub fn commitment_revenue(d: &Distribution, mu: f64, s: &CommitmentSchedule) -> f64 {
    let CommitmentSchedule { p1, p2r, p2a } = *s;
    let f1 = d.cdf(p1);
    let naive = p1 * (1.0 - f1) + p2a * (1.0 - d.cdf(p1.max(p2a))) + p2r * (f1 - d.cdf(p2r)).max(0.0);
    (1.0 - mu) * naive + mu * soph_revenue(d, s)
}

fn soph_revenue(d: &Distribution, s: &CommitmentSchedule) -> f64 {
    let CommitmentSchedule { p1, p2r, p2a } = *s;
    // (utility slope, intercept, payment) of each option.
    let options = [(0.0, 0.0, 0.0), (1.0, -p2r, p2r), (1.0, -p1, p1), (2.0, -p1 - p2a, p1 + p2a)];
    let mut cuts = vec![0.0, 1.0];
    for (i, a) in options.iter().enumerate() {
        for b in &options[i + 1..] {
            if a.0 != b.0 {
                let x = (b.1 - a.1) / (a.0 - b.0);
                if x > 0.0 && x < 1.0 {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut rev = 0.0;
    for w in cuts.windows(2) {
        let v = 0.5 * (w[0] + w[1]);
        let best = options
            .iter()
            .map(|o| (o.0 * v + o.1, o.2))
            .max_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .unwrap();
        rev += best.1 * (d.cdf(w[1]) - d.cdf(w[0]));
    }
    rev
}

/// Rewrites a schedule into the ordered form `p2R <= p1 <= p2A`: first-round
/// and accept prices are swapped or pulled toward their average, then the
/// reject price is capped at the first-round price. Revenue never drops unless
/// the swap for `p2A < p1 <= p2R` is needed, which can cut a sophisticated
/// buyer's one-unit cost.
pub fn normalize(s: &CommitmentSchedule) -> CommitmentSchedule {
    normalize_traced(s).0
}

/// [`normalize`], also reporting whether the swap for `p2A < p1 <= p2R` ran.
/// That step can lower revenue, so the guarantee above excludes it.
fn normalize_traced(s: &CommitmentSchedule) -> (CommitmentSchedule, bool) {
    let mut s = *s;
    let mut swapped_under_reject = false;
    for _ in 0..8 {
        if s.p1 <= s.p2a {
            break;
        }
        if s.p2r <= s.p2a || s.p2r >= s.p1 {
            swapped_under_reject |= s.p2r >= s.p1;
            std::mem::swap(&mut s.p1, &mut s.p2a);
        } else {
            let sum = s.p1 + s.p2a;
            let p1 = s.p2r.max(0.5 * sum);
            s = CommitmentSchedule { p1, p2r: s.p2r, p2a: sum - p1 };
        }
    }
    if s.p2r > s.p1 {
        s.p2r = s.p1;
    }
    (s, swapped_under_reject)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommitmentSolution {
    pub mu: f64,
    pub schedule: CommitmentSchedule,
    pub t: f64,
    pub rev: f64,
    /// Other grid optima within the tie tolerance of the winner.
    pub ties: usize,
}

const TIE: f64 = 1e-12;

fn better(a: &(CommitmentSchedule, f64), b: &(CommitmentSchedule, f64)) -> bool {
    if a.1 > b.1 + TIE {
        return true;
    }
    a.1 >= b.1 - TIE && a.0.key() < b.0.key()
}

fn best_of(cands: Vec<(CommitmentSchedule, f64)>) -> ((CommitmentSchedule, f64), usize) {
    let mut best = cands[0];
    for c in &cands[1..] {
        if better(c, &best) {
            best = *c;
        }
    }
    let ties = cands.iter().filter(|c| (c.1 - best.1).abs() <= TIE).count() - 1;
    (best, ties)
}

fn axis(center: f64, half: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = ((center - half).max(0.0), (center + half).min(1.0));
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn solve_commitment(d: &Distribution, mu: f64) -> Result<CommitmentSolution> {
    solve_commitment_with(d, mu, Exec::default())
}

/// Grid search over ordered schedules in [0,1]^3 followed by shrinking local
/// grids around the incumbent. Ties are broken toward the lexicographically
/// smallest `(p1, p2R, p2A)`.
pub fn solve_commitment_with(d: &Distribution, mu: f64, exec: Exec) -> Result<CommitmentSolution> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("mu={mu} outside [0,1]")));
    }
    d.ensure_regular()?;
    let n = COARSE_GRID;
    let g = |i: usize| i as f64 / (n - 1) as f64;
    let rows = map_range(exec, n, |i| {
        let p1 = g(i);
        let mut out = Vec::new();
        for j in 0..=i {
            for k in i..n {
                let s = CommitmentSchedule::new(p1, g(j), g(k));
                out.push((s, commitment_revenue(d, mu, &s)));
            }
        }
        best_of(out).0
    });
    let (mut best, mut ties) = best_of(rows);
    let mut half = 1.0 / (n - 1) as f64;
    for _ in 0..REFINE_ROUNDS {
        let (a1, ar, aa) = (
            axis(best.0.p1, half, REFINE_GRID),
            axis(best.0.p2r, half, REFINE_GRID),
            axis(best.0.p2a, half, REFINE_GRID),
        );
        let rows = map_slice(exec, &a1, |&p1| {
            let mut out = vec![best];
            for &p2r in ar.iter().filter(|&&x| x <= p1) {
                for &p2a in aa.iter().filter(|&&x| x >= p1) {
                    let s = CommitmentSchedule::new(p1, p2r, p2a);
                    out.push((s, commitment_revenue(d, mu, &s)));
                }
            }
            best_of(out).0
        });
        let (b, t) = best_of(rows);
        best = b;
        ties = ties.max(t);
        half *= 2.0 / (REFINE_GRID - 1) as f64;
    }
    Ok(CommitmentSolution { mu, schedule: best.0, t: best.0.threshold(), rev: best.1, ties })
}

pub fn sweep_commitment(d: &Distribution, mu_grid: &[f64]) -> Result<Vec<CommitmentSolution>> {
    sweep_commitment_with(d, mu_grid, Exec::default())
}

pub fn sweep_commitment_with(d: &Distribution, mu_grid: &[f64], exec: Exec) -> Result<Vec<CommitmentSolution>> {
    if mu_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("mu grid must be sorted".into()));
    }
    // Each solve already fans out over the grid; the outer loop stays sequential.
    mu_grid.iter().map(|&mu| solve_commitment_with(d, mu, exec)).collect()
}
