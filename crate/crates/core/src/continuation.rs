//! Second-round continuations `(p1, p2R lottery, p2A, t)` of the two-round game.
//!
//! [`implement_for_price`] finds the threshold induced by an arbitrary first-round
//! price by scanning the buyer's accept/reject utilities over `t`.
//! [`implement_sophisticated`] goes the other way: it takes a threshold and
//! returns the unique first-round price and reject lottery that implement it
//! with a sophisticated-focused accept price.

use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::optim::bisect_flip;
use crate::posterior::{accept_price, low_reject_price, reject_mass_revenue, soph_focus_margin};

/// Points of the threshold scan over `[0, T_SWEEP_MAX]`.
pub const T_SWEEP_POINTS: usize = 2048;
/// Upper end of the scan; thresholds above 1 mean every sophisticated type rejects.
pub const T_SWEEP_MAX: f64 = 1.25;
/// Minimal utility gap across a crossing that is treated as a jump.
pub const JUMP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Focus {
    /// Accept price below the threshold.
    Naive,
    /// Accept price at or above the threshold.
    Sophisticated,
}

impl Focus {
    pub fn as_str(self) -> &'static str {
        match self {
            Focus::Naive => "naive",
            Focus::Sophisticated => "sophisticated",
        }
    }
}

/// Reject-branch price: a point mass or a two-point lottery, sorted by price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceLottery {
    points: Vec<(f64, f64)>,
}

impl PriceLottery {
    pub fn deterministic(p: f64) -> Self {
        PriceLottery { points: vec![(p, 1.0)] }
    }

    /// `lo` with probability `alpha_lo`, `hi` otherwise. Collapses to a point mass
    /// when the weights or prices make the second point irrelevant.
    pub fn two_point(lo: f64, hi: f64, alpha_lo: f64) -> Self {
        let a = alpha_lo.clamp(0.0, 1.0);
        if a >= 1.0 || hi == lo {
            Self::deterministic(lo)
        } else if a <= 0.0 {
            Self::deterministic(hi)
        } else {
            PriceLottery { points: vec![(lo, a), (hi, 1.0 - a)] }
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_deterministic(&self) -> bool {
        self.points.len() == 1
    }

    pub fn lo(&self) -> f64 {
        self.points[0].0
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Probability on the lower price.
    pub fn alpha_lo(&self) -> f64 {
        self.points[0].1
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|&(p, w)| w * f(p)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|p| p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Continuation {
    pub p1: f64,
    pub p2a: f64,
    pub p2r: PriceLottery,
    /// Threshold; equals 1 when `all_reject` is set.
    pub t: f64,
    /// No sophisticated type accepts in round one.
    pub all_reject: bool,
    pub focus: Focus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderingRule {
    RejectBelowThreshold,
    AcceptAboveFirstPrice,
    RejectBelowMonopoly,
    AcceptAboveMonopoly,
    FirstPriceBelowThreshold,
}

impl Continuation {
    fn new(p1: f64, p2a: f64, p2r: PriceLottery, t: f64, all_reject: bool) -> Self {
        let focus = if p2a >= t { Focus::Sophisticated } else { Focus::Naive };
        Continuation { p1, p2a, p2r, t, all_reject, focus }
    }

    /// Utility of the threshold type from rejecting, `t - E[p2R]`.
    pub fn reject_utility(&self) -> f64 {
        self.t - self.p2r.mean()
    }

    /// Utility of the threshold type from accepting, `t - p1 + (t - p2A)^+`.
    pub fn accept_utility(&self) -> f64 {
        self.t - self.p1 + (self.t - self.p2a).max(0.0)
    }

    /// `U^R(t) - U^A(t)`; zero for an interior threshold, non-negative when all
    /// sophisticated types reject.
    pub fn indifference_residual(&self) -> f64 {
        self.reject_utility() - self.accept_utility()
    }

    /// The five price-ordering inequalities, checked on every lottery point.
    pub fn ordering_violations(&self, d: &Distribution, tol: f64) -> Vec<OrderingRule> {
        let ps = d.p_star();
        let mut out = Vec::new();
        for &(p, _) in self.p2r.points() {
            if p > self.t + tol {
                out.push(OrderingRule::RejectBelowThreshold);
            }
            if p > ps + tol {
                out.push(OrderingRule::RejectBelowMonopoly);
            }
        }
        if self.p2a < self.p1 - tol {
            out.push(OrderingRule::AcceptAboveFirstPrice);
        }
        if self.p2a < ps - tol {
            out.push(OrderingRule::AcceptAboveMonopoly);
        }
        if self.p1 > self.t + tol {
            out.push(OrderingRule::FirstPriceBelowThreshold);
        }
        out
    }
}

/// `(1-mu) R'(t) + (1-F(t)) mu` and whether it is non-negative.
pub fn soph_focus_condition(d: &Distribution, mu: f64, t: f64) -> (bool, f64) {
    let m = soph_focus_margin(d, mu, t);
    (m >= 0.0, m)
}

/// Prices the seller would post at threshold `t`.
#[derive(Debug, Clone, Copy)]
struct Probe {
    low: f64,
    low_rev: f64,
    high: f64,
    high_rev: f64,
    accept: f64,
}

impl Probe {
    fn at(d: &Distribution, mu: f64, p1: f64, t: f64) -> Self {
        let low = low_reject_price(d, mu, p1, t);
        let high = d.monopoly_below(t).max(p1).min(t);
        Probe {
            low,
            low_rev: reject_mass_revenue(d, mu, p1, t, low),
            high,
            high_rev: reject_mass_revenue(d, mu, p1, t, high),
            accept: accept_price(d, mu, p1, t),
        }
    }

    /// Reject price chosen when the seller breaks ties toward the lower price.
    fn reject(&self) -> f64 {
        if self.low_rev >= self.high_rev {
            self.low
        } else {
            self.high
        }
    }

    /// `U^R(t) - U^A(t)` for the threshold type.
    fn gap(&self, p1: f64, t: f64) -> f64 {
        p1 - self.reject() - (t - self.accept).max(0.0)
    }
}

fn t_grid_step() -> f64 {
    T_SWEEP_MAX / (T_SWEEP_POINTS - 1) as f64
}

/// Grid thresholds in `(p1, 1]`, always ending at exactly 1.
fn t_grid_above(p1: f64) -> impl Iterator<Item = f64> {
    let h = t_grid_step();
    (0..T_SWEEP_POINTS)
        .map(move |k| k as f64 * h)
        .filter(move |&t| t > p1 && t < 1.0)
        .chain(std::iter::once(1.0).filter(move |_| p1 < 1.0))
}

/// Valid continuation for first-round price `p1`, choosing the smallest
/// threshold at which the buyer's reject utility drops to the accept utility.
pub fn implement_for_price(d: &Distribution, mu: f64, p1: f64) -> Result<Continuation> {
    d.ensure_regular()?;
    if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&p1) {
        return Err(Error::Domain(format!("need mu, p1 in [0,1], got mu={mu}, p1={p1}")));
    }
    if p1 == 0.0 {
        return Ok(Continuation::new(0.0, d.p_star(), PriceLottery::deterministic(0.0), 0.0, false));
    }
    if mu == 0.0 {
        return Ok(implement_all_naive(d, p1));
    }
    if mu == 1.0 {
        return Ok(implement_all_sophisticated(d, p1));
    }
    let mut prev = p1;
    for t in t_grid_above(p1) {
        if Probe::at(d, mu, p1, t).gap(p1, t) <= 0.0 {
            return resolve_crossing(d, mu, p1, prev, t);
        }
        prev = t;
    }
    let pr = Probe::at(d, mu, p1, 1.0);
    Ok(Continuation::new(p1, pr.accept, PriceLottery::deterministic(pr.reject()), 1.0, true))
}

/// Bisect a bracket `gap(lo) > 0 >= gap(hi)` and bridge a reject-price jump by mixing.
fn resolve_crossing(d: &Distribution, mu: f64, p1: f64, lo: f64, hi: f64) -> Result<Continuation> {
    let (lo, t) = bisect_flip(|t| Probe::at(d, mu, p1, t).gap(p1, t) <= 0.0, lo, hi, 0.0);
    let left = Probe::at(d, mu, p1, lo);
    let right = Probe::at(d, mu, p1, t);
    if (right.accept - left.accept).abs() > JUMP_TOL {
        return Err(Error::Internal(format!("accept-side mixing required at mu={mu}, p1={p1}, t={t}; not supported")));
    }
    let u_a = t - p1 + (t - right.accept).max(0.0);
    let (r_left, r_right) = (left.reject(), right.reject());
    if (r_right - r_left).abs() > JUMP_TOL {
        // U^R jumps from t - p_lo down to t - p_hi; mix so that E[p2R] = t - u_a.
        let (p_lo, p_hi) = (right.low, right.high);
        let u_high = t - p_lo;
        let u_low = t - p_hi;
        let alpha = (u_a - u_low) / (u_high - u_low);
        return Ok(Continuation::new(p1, right.accept, PriceLottery::two_point(p_lo, p_hi, alpha), t, false));
    }
    Ok(Continuation::new(p1, right.accept, PriceLottery::deterministic(r_right), t, false))
}

fn implement_all_naive(d: &Distribution, p1: f64) -> Continuation {
    let p2r = d.monopoly_below(p1);
    let p2a = p1.max(d.p_star());
    let t = p1 + p2a - p2r;
    if t > 1.0 {
        Continuation::new(p1, p2a, PriceLottery::deterministic(p2r), 1.0, true)
    } else {
        Continuation::new(p1, p2a, PriceLottery::deterministic(p2r), t, false)
    }
}

fn implement_all_sophisticated(d: &Distribution, p1: f64) -> Continuation {
    // p*_{<=t} = p1 iff F(t) = F(p1) + p1 f(p1).
    let level = d.marginal(p1);
    if level <= 1.0 {
        let t = d.quantile(level).max(p1);
        Continuation::new(p1, t.max(d.p_star()), PriceLottery::deterministic(p1), t, false)
    } else {
        let p2a = p1.max(d.p_star());
        Continuation::new(p1, p2a, PriceLottery::deterministic(d.p_star()), 1.0, true)
    }
}

/// The unique sophisticated-focused continuation with threshold `t`.
pub fn implement_sophisticated(d: &Distribution, mu: f64, t: f64) -> Result<Continuation> {
    d.ensure_regular()?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("mu={mu} must lie in (0,1]")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("threshold t={t} must lie in (0,1)")));
    }
    let (ok, margin) = soph_focus_condition(d, mu, t);
    if !ok {
        return Err(Error::NotImplementable { mu, t, margin });
    }
    let p2a = t.max(d.p_star());
    let ph = d.monopoly_below(t);
    if mu == 1.0 {
        return Ok(Continuation::new(ph, p2a, PriceLottery::deterministic(ph), t, false));
    }
    let high_rev = reject_mass_revenue(d, mu, ph, t, ph);
    let balance = |p1: f64| {
        let pl = low_reject_price(d, mu, p1, t);
        reject_mass_revenue(d, mu, p1, t, pl) - high_rev
    };
    if balance(ph) < 0.0 || balance(0.0) > 0.0 {
        return Err(Error::Internal(format!("reject-peak balance not bracketed at mu={mu}, t={t}")));
    }
    let (_, p1) = bisect_flip(|p1| balance(p1) >= 0.0, 0.0, ph, 0.0);
    let pl = low_reject_price(d, mu, p1, t);
    let alpha = if ph - pl > 0.0 { (ph - p1) / (ph - pl) } else { 1.0 };
    Ok(Continuation::new(p1, p2a, PriceLottery::two_point(pl, ph, alpha), t, false))
}

/// `F^{-1}( mu/(1-mu) * F(t) * (R_{<=t}(p*_{<=t}) - R_{<=t}(pL)) / pL + F(pL) )`.
pub fn p1_closed_form(d: &Distribution, mu: f64, t: f64, pl: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("mu={mu} must lie in (0,1)")));
    }
    if !(pl > 0.0 && pl < t) {
        return Err(Error::Domain(format!("pL={pl} must lie in (0, t={t})")));
    }
    let ph = d.monopoly_below(t);
    let arg = mu / (1.0 - mu) * d.cdf(t) * (d.rev_below(t, ph) - d.rev_below(t, pl)) / pl + d.cdf(pl);
    if !(0.0..=1.0).contains(&arg) {
        return Err(Error::Inconsistent(format!("quantile argument {arg} outside [0,1]")));
    }
    Ok(d.quantile(arg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExclusivityReport {
    /// `p1` has no sophisticated-focused implementation.
    NotApplicable,
    NoneFound,
    /// Thresholds of competing naive-focused implementations.
    Violations {
        thresholds: Vec<f64>,
    },
}

/// Scan every threshold for a naive-focused implementation competing with the
/// sophisticated-focused one.
pub fn check_exclusivity(d: &Distribution, mu: f64, p1: f64) -> Result<ExclusivityReport> {
    let cont = implement_for_price(d, mu, p1)?;
    if cont.focus != Focus::Sophisticated || cont.all_reject {
        return Ok(ExclusivityReport::NotApplicable);
    }
    let mut found = Vec::new();
    let mut prev_t = p1;
    let mut prev_pos = Probe::at(d, mu, p1, p1).gap(p1, p1) > 0.0;
    for t in t_grid_above(p1) {
        let pos = Probe::at(d, mu, p1, t).gap(p1, t) > 0.0;
        if pos != prev_pos {
            let pred = |x: f64| (Probe::at(d, mu, p1, x).gap(p1, x) > 0.0) == pos;
            let (_, root) = bisect_flip(pred, prev_t, t, 0.0);
            if Probe::at(d, mu, p1, root).accept < root {
                found.push(root);
            }
        }
        prev_t = t;
        prev_pos = pos;
    }
    Ok(if found.is_empty() {
        ExclusivityReport::NoneFound
    } else {
        ExclusivityReport::Violations { thresholds: found }
    })
}
