//! The seller's first-round problem: revenue of a continuation, the optimal
//! first-round price, and sweeps over the sophistication level.

use serde::Serialize;

use crate::continuation::{implement_for_price, Continuation, Focus};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::parallel::{map_range, map_slice, Exec};
use crate::posterior::{accept_mass_revenue, reject_mass_revenue};

/// Points of the first-round price grid.
pub const P1_GRID_POINTS: usize = 512;
/// Local maxima of the grid that are refined by golden-section search.
pub const P1_STARTS: usize = 3;
/// Revenues closer than this are treated as tied (lower price wins).
pub const REVENUE_TIE: f64 = 1e-13;

/// Revenue and welfare accounting of one continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevenueBreakdown {
    pub rev_total: f64,
    pub rev_round1: f64,
    pub rev_accept: f64,
    pub rev_reject: f64,
    /// Expected revenue from a buyer known to be naive.
    pub rev_naive_percap: f64,
    /// Expected revenue from a buyer known to be sophisticated.
    pub rev_soph_percap: f64,
    /// Expected units traded, each credited with the mean value `E[v]`.
    pub welfare: f64,
    /// Expected total value of the units actually consumed.
    pub surplus: f64,
    /// For sophisticated-focused continuations: the second-round revenue from the
    /// reamortized form minus the direct expectation.
    pub reamortization_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoRoundEquilibrium {
    pub mu: f64,
    pub cont: Continuation,
    pub rev_total: f64,
    pub rev_round1: f64,
    pub rev_accept: f64,
    pub rev_reject: f64,
    pub rev_naive_percap: f64,
    pub rev_soph_percap: f64,
    pub welfare: f64,
    pub surplus: f64,
    pub regime: Focus,
}

impl TwoRoundEquilibrium {
    fn new(mu: f64, cont: Continuation, b: RevenueBreakdown) -> Self {
        TwoRoundEquilibrium {
            mu,
            regime: cont.focus,
            cont,
            rev_total: b.rev_total,
            rev_round1: b.rev_round1,
            rev_accept: b.rev_accept,
            rev_reject: b.rev_reject,
            rev_naive_percap: b.rev_naive_percap,
            rev_soph_percap: b.rev_soph_percap,
            welfare: b.welfare,
            surplus: b.surplus,
        }
    }
}

/// Per-type expected revenues `(R_n, R_s)`.
pub fn per_capita_revenues(d: &Distribution, cont: &Continuation) -> (f64, f64) {
    let (p1, t, pa) = (cont.p1, cont.t, cont.p2a);
    let (fp1, ft) = (d.cdf(p1), d.cdf(t));
    let naive = p1 * (1.0 - fp1) + pa * (1.0 - d.cdf(pa.max(p1))) + cont.p2r.expect(|p| p * (fp1 - d.cdf(p)).max(0.0));
    let soph = p1 * (1.0 - ft) + pa * (1.0 - d.cdf(pa.max(t))) + cont.p2r.expect(|p| p * (ft - d.cdf(p)).max(0.0));
    (naive, soph)
}

/// Expected number of units a naive and a sophisticated buyer purchase.
fn units_traded(d: &Distribution, cont: &Continuation) -> (f64, f64) {
    let (p1, t, pa) = (cont.p1, cont.t, cont.p2a);
    let (fp1, ft) = (d.cdf(p1), d.cdf(t));
    let naive = (1.0 - fp1) + (1.0 - d.cdf(pa.max(p1))) + cont.p2r.expect(|p| (fp1 - d.cdf(p)).max(0.0));
    let soph = (1.0 - ft) + (1.0 - d.cdf(pa.max(t))) + cont.p2r.expect(|p| (ft - d.cdf(p)).max(0.0));
    (naive, soph)
}

/// Welfare with every traded unit credited at the population mean value. On
/// uniform values this is the closed form `Welf(mu)` of [`crate::linear_oracle`].
pub fn welfare(d: &Distribution, mu: f64, cont: &Continuation) -> f64 {
    let (n, s) = units_traded(d, cont);
    d.mean() * ((1.0 - mu) * n + mu * s)
}

/// Expected value of the units consumed, integrating `v dF` over each trading set.
pub fn total_surplus(d: &Distribution, mu: f64, cont: &Continuation) -> f64 {
    let (p1, t, pa) = (cont.p1, cont.t, cont.p2a);
    let naive = d.partial_mean(p1, 1.0) + d.partial_mean(pa.max(p1), 1.0) + cont.p2r.expect(|p| d.partial_mean(p, p1));
    let soph = d.partial_mean(t, 1.0) + d.partial_mean(pa.max(t), 1.0) + cont.p2r.expect(|p| d.partial_mean(p, t));
    (1.0 - mu) * naive + mu * soph
}

pub fn revenue_of_continuation(d: &Distribution, mu: f64, cont: &Continuation) -> RevenueBreakdown {
    let (p1, t) = (cont.p1, cont.t);
    let rev_round1 = (1.0 - mu) * d.rev(p1) + mu * p1 * (1.0 - d.cdf(t));
    let rev_accept = accept_mass_revenue(d, mu, p1, t, cont.p2a);
    let rev_reject = cont.p2r.expect(|p| reject_mass_revenue(d, mu, p1, t, p));
    let (rn, rs) = per_capita_revenues(d, cont);
    let reamortization_gap = (cont.focus == Focus::Sophisticated && !cont.all_reject).then(|| {
        let ph = d.monopoly_below(t);
        let reject = mu * (d.cdf(t) - d.cdf(ph)) * ph;
        let accept = d.rev(cont.p2a);
        (reject + accept) - (rev_reject + rev_accept)
    });
    RevenueBreakdown {
        rev_total: rev_round1 + rev_accept + rev_reject,
        rev_round1,
        rev_accept,
        rev_reject,
        rev_naive_percap: rn,
        rev_soph_percap: rs,
        welfare: welfare(d, mu, cont),
        surplus: total_surplus(d, mu, cont),
        reamortization_gap,
    }
}

/// Seller revenue from posting `p1` and playing the induced continuation.
pub fn revenue_for_price(d: &Distribution, mu: f64, p1: f64) -> Result<f64> {
    let c = implement_for_price(d, mu, p1)?;
    Ok(revenue_of_continuation(d, mu, &c).rev_total)
}

pub fn solve_equilibrium(d: &Distribution, mu: f64) -> Result<TwoRoundEquilibrium> {
    solve_equilibrium_with(d, mu, Exec::default())
}

/// Grid search over `p1` followed by golden-section refinement around the best
/// local maxima of the grid.
pub fn solve_equilibrium_with(d: &Distribution, mu: f64, exec: Exec) -> Result<TwoRoundEquilibrium> {
    d.ensure_regular()?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("mu={mu} outside [0,1]")));
    }
    let n = P1_GRID_POINTS;
    let h = 1.0 / (n - 1) as f64;
    let revs =
        map_range(exec, n, |i| revenue_for_price(d, mu, i as f64 * h)).into_iter().collect::<Result<Vec<f64>>>()?;

    let mut peaks: Vec<usize> =
        (0..n).filter(|&i| (i == 0 || revs[i] >= revs[i - 1]) && (i + 1 == n || revs[i] >= revs[i + 1])).collect();
    peaks.sort_by(|&a, &b| revs[b].total_cmp(&revs[a]).then(a.cmp(&b)));
    peaks.truncate(P1_STARTS);

    let rev_at = |p: f64| revenue_for_price(d, mu, p).unwrap_or(f64::NEG_INFINITY);
    let mut candidates: Vec<(f64, f64)> = peaks.iter().map(|&i| (i as f64 * h, revs[i])).collect();
    let refined = map_slice(exec, &peaks, |&i| {
        let lo = i.saturating_sub(1) as f64 * h;
        let hi = ((i + 1).min(n - 1)) as f64 * h;
        golden_max(rev_at, lo, hi, 1e-13)
    });
    candidates.extend(refined);

    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if c.1 > best.1 + REVENUE_TIE || ((c.1 - best.1).abs() <= REVENUE_TIE && c.0 < best.0) {
            best = c;
        }
    }
    let cont = implement_for_price(d, mu, best.0)?;
    let b = revenue_of_continuation(d, mu, &cont);
    Ok(TwoRoundEquilibrium::new(mu, cont, b))
}

pub fn classify_regime(eq: &TwoRoundEquilibrium) -> Focus {
    eq.regime
}

pub fn sweep(d: &Distribution, mu_grid: &[f64]) -> Result<Vec<TwoRoundEquilibrium>> {
    sweep_with(d, mu_grid, Exec::default())
}

/// Equilibria for every grid point, in grid order.
pub fn sweep_with(d: &Distribution, mu_grid: &[f64], exec: Exec) -> Result<Vec<TwoRoundEquilibrium>> {
    if mu_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("mu grid must be sorted".into()));
    }
    map_slice(exec, mu_grid, |&mu| solve_equilibrium_with(d, mu, exec)).into_iter().collect()
}

/// Largest grid `mu` whose equilibrium is naive-focused.
pub fn naive_frontier(rows: &[TwoRoundEquilibrium]) -> Option<f64> {
    rows.iter().rev().find(|r| r.regime == Focus::Naive).map(|r| r.mu)
}

/// Locate the naive-to-sophisticated flip after the last naive-focused grid row
/// by bisection on `mu`, to width `tol`.
pub fn regime_boundary(d: &Distribution, rows: &[TwoRoundEquilibrium], tol: f64) -> Result<Option<f64>> {
    let Some(k) = rows.iter().rposition(|r| r.regime == Focus::Naive) else {
        return Ok(None);
    };
    if k + 1 >= rows.len() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (rows[k].mu, rows[k + 1].mu);
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if solve_equilibrium(d, m)?.regime == Focus::Naive {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::PriceLottery;
    use approx::assert_abs_diff_eq;

    fn cont(p1: f64, p2r: f64, p2a: f64, t: f64) -> Continuation {
        let focus = if p2a >= t { Focus::Sophisticated } else { Focus::Naive };
        Continuation { p1, p2a, p2r: PriceLottery::deterministic(p2r), t, all_reject: false, focus }
    }

    #[test]
    fn revenue_examples() {
        let u = Distribution::uniform();
        let b = revenue_of_continuation(&u, 1.0, &cont(0.3, 0.3, 0.6, 0.6));
        assert_abs_diff_eq!(b.rev_total, 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(b.reamortization_gap.unwrap(), 0.0, epsilon = 1e-15);
        let b = revenue_of_continuation(&u, 0.0, &cont(4.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0, 6.0 / 7.0));
        assert_abs_diff_eq!(b.rev_total, 4.0 / 7.0, epsilon = 1e-15);
        let b = revenue_of_continuation(&u, 0.6, &cont(0.0, 0.0, 0.5, 0.0));
        assert_abs_diff_eq!(b.rev_total, u.r_star(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.rev_total, b.rev_accept, epsilon = 1e-15);
    }

    #[test]
    fn per_capita_examples() {
        let u = Distribution::uniform();
        let (n, s) = per_capita_revenues(&u, &cont(0.3, 0.3, 0.6, 0.6));
        assert_abs_diff_eq!(n, 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.45, epsilon = 1e-15);
        let (n, s) = per_capita_revenues(&u, &cont(4.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0, 6.0 / 7.0));
        assert_abs_diff_eq!(n, 4.0 / 7.0, epsilon = 1e-15);
        // 4/7*1/7 + 4/7*(1-6/7) + 2/7*(6/7-2/7)
        assert_abs_diff_eq!(s, 16.0 / 49.0, epsilon = 1e-15);
        assert!(n >= s);
    }

    #[test]
    fn welfare_examples() {
        let u = Distribution::uniform();
        assert_abs_diff_eq!(welfare(&u, 1.0, &cont(0.3, 0.3, 0.6, 0.6)), 0.55, epsilon = 1e-15);
        // Everything free for two rounds: two units per buyer.
        assert_abs_diff_eq!(welfare(&u, 0.3, &cont(0.0, 0.0, 0.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(total_surplus(&u, 0.3, &cont(0.0, 0.0, 0.0, 0.0)), 1.0, epsilon = 1e-15);
        // Free first round: E[v] plus the value of second-round sales at p*.
        let c = cont(0.0, 0.0, 0.5, 0.0);
        assert_abs_diff_eq!(total_surplus(&u, 0.5, &c), 0.5 + 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(welfare(&u, 0.5, &c), 0.5 + 0.5 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn solve_endpoints() {
        let u = Distribution::uniform();
        let e = solve_equilibrium(&u, 0.0).unwrap();
        assert_abs_diff_eq!(e.rev_total, 4.0 / 7.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.cont.p1, 4.0 / 7.0, epsilon = 1e-6);
        assert_eq!(e.regime, Focus::Naive);
        let e = solve_equilibrium(&u, 1.0).unwrap();
        assert_abs_diff_eq!(e.rev_total, 0.45, epsilon = 1e-9);
        assert_abs_diff_eq!(e.cont.p1, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(e.cont.t, 0.6, epsilon = 1e-6);
    }

    #[test]
    fn solve_interior_matches_closed_form() {
        let u = Distribution::uniform();
        let e = solve_equilibrium(&u, 0.7).unwrap();
        assert_abs_diff_eq!(e.cont.p1, 0.27486, epsilon = 1e-5);
        assert_abs_diff_eq!(e.rev_total, 0.43913, epsilon = 1e-5);
        assert_eq!(e.regime, Focus::Sophisticated);
        assert_eq!(classify_regime(&solve_equilibrium(&u, 0.3).unwrap()), Focus::Naive);
    }

    #[test]
    fn decomposition_adds_up() {
        for d in [Distribution::uniform(), Distribution::power(2.0).unwrap()] {
            for mu in [0.2, 0.6, 0.9] {
                let e = solve_equilibrium(&d, mu).unwrap();
                let b = revenue_of_continuation(&d, mu, &e.cont);
                assert_abs_diff_eq!(b.rev_total, b.rev_round1 + b.rev_accept + b.rev_reject, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    b.rev_total,
                    mu * b.rev_soph_percap + (1.0 - mu) * b.rev_naive_percap,
                    epsilon = 1e-12
                );
                if let Some(g) = b.reamortization_gap {
                    assert!(g.abs() < 1e-9, "gap {g}");
                }
            }
        }
    }

    #[test]
    fn unsorted_grid_rejected() {
        assert!(sweep(&Distribution::uniform(), &[0.5, 0.2]).is_err());
    }
}
