//! Second-round beliefs after a first-round accept or reject.
//!
//! A sophisticated buyer rejects iff `v < t` and a naive buyer iff `v < p1`, so the
//! reject posterior mixes `F_{<=t}` and `F_{<=p1}` and the accept posterior mixes
//! `F_{>=t}` and `F_{>=p1}`.
//!
//! The solvers work with *mass-weighted* revenues (posterior revenue times the
//! probability of the branch). These have the same maximizers, but stay
//! well-defined when a branch has probability zero.

use crate::dist::Distribution;
use crate::error::{Branch, Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PosteriorView<'a> {
    pub dist: &'a Distribution,
    pub mu: f64,
    pub p1: f64,
    pub t: f64,
    /// Probability the buyer is sophisticated given a reject.
    pub mu_r: f64,
    /// Probability the buyer is sophisticated given an accept.
    pub mu_a: f64,
}

/// Optimal reject prices on the two concave pieces of the reject curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectOptima {
    /// Maximizer on `[0, p1]` and its revenue.
    pub low: (f64, f64),
    /// `p*_{<=t}` and its revenue.
    pub high: (f64, f64),
}

pub fn posterior_params(d: &Distribution, mu: f64, p1: f64, t: f64) -> Result<PosteriorView<'_>> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("mu={mu} outside [0,1]")));
    }
    if !(0.0 <= p1 && p1 <= t && t <= 1.0) {
        return Err(Error::Domain(format!("need 0 <= p1 <= t <= 1, got p1={p1}, t={t}")));
    }
    let (ft, fp) = (d.cdf(t), d.cdf(p1));
    let den_r = mu * ft + (1.0 - mu) * fp;
    let den_a = mu * (1.0 - ft) + (1.0 - mu) * (1.0 - fp);
    if den_r <= 0.0 {
        return Err(Error::DegeneratePosterior(Branch::Reject));
    }
    if den_a <= 0.0 {
        return Err(Error::DegeneratePosterior(Branch::Accept));
    }
    Ok(PosteriorView { dist: d, mu, p1, t, mu_r: mu * ft / den_r, mu_a: mu * (1.0 - ft) / den_a })
}

pub fn reject_revenue(view: &PosteriorView, p: f64) -> f64 {
    let d = view.dist;
    view.mu_r * d.rev_below(view.t, p) + (1.0 - view.mu_r) * d.rev_below(view.p1, p)
}

pub fn accept_revenue(view: &PosteriorView, p: f64) -> f64 {
    let d = view.dist;
    view.mu_a * d.rev_above(view.t, p) + (1.0 - view.mu_a) * d.rev_above(view.p1, p)
}

pub fn reject_optima(view: &PosteriorView) -> Result<RejectOptima> {
    view.dist.ensure_regular()?;
    if view.p1 <= 0.0 {
        return Err(Error::Domain("reject optima need p1 > 0".into()));
    }
    let pl = low_reject_price(view.dist, view.mu, view.p1, view.t);
    let ph = view.dist.monopoly_below(view.t);
    Ok(RejectOptima { low: (pl, reject_revenue(view, pl)), high: (ph, reject_revenue(view, ph)) })
}

pub fn accept_optimum(view: &PosteriorView) -> Result<(f64, f64)> {
    view.dist.ensure_regular()?;
    let p = accept_price(view.dist, view.mu, view.p1, view.t);
    Ok((p, accept_revenue(view, p)))
}

/// `P(reject) * R^R(p) = mu p (F(t)-F(p))^+ + (1-mu) p (F(p1)-F(p))^+`.
pub fn reject_mass_revenue(d: &Distribution, mu: f64, p1: f64, t: f64, p: f64) -> f64 {
    let fp = d.cdf(p);
    mu * p * (d.cdf(t) - fp).max(0.0) + (1.0 - mu) * p * (d.cdf(p1) - fp).max(0.0)
}

/// `P(accept) * R^A(p)`.
pub fn accept_mass_revenue(d: &Distribution, mu: f64, p1: f64, t: f64, p: f64) -> f64 {
    mu * p * (1.0 - d.cdf(t.max(p))) + (1.0 - mu) * p * (1.0 - d.cdf(p1.max(p)))
}

/// Maximizer of the reject curve on `[0, p1]`. On that piece the curve is
/// `p (K - F(p)) / K` with `K = mu F(t) + (1-mu) F(p1)`.
pub fn low_reject_price(d: &Distribution, mu: f64, p1: f64, t: f64) -> f64 {
    let k = mu * d.cdf(t) + (1.0 - mu) * d.cdf(p1);
    d.foc_price(k).min(p1)
}

/// `(1-mu) R'(t) + (1-F(t)) mu`: left slope of the mass-weighted accept curve at `t`.
pub fn soph_focus_margin(d: &Distribution, mu: f64, t: f64) -> f64 {
    (1.0 - mu) * d.rev_deriv(t) + (1.0 - d.cdf(t)) * mu
}

/// Unique maximizer of the accept curve. The curve is linear below `p1` and
/// concave above, so the optimum is `p*` when `t <= p*`, `t` when the left slope
/// at `t` is non-negative (ties go to the larger price), and otherwise the
/// interior root on `[p1, t)`.
pub fn accept_price(d: &Distribution, mu: f64, p1: f64, t: f64) -> f64 {
    let ps = d.p_star();
    if t <= ps {
        return ps.max(p1);
    }
    if soph_focus_margin(d, mu, t) >= 0.0 {
        return t;
    }
    // (1-mu)(1 - F(p) - p f(p)) + mu (1 - F(t)) = 0 on [p1, t)
    let k = 1.0 + mu * (1.0 - d.cdf(t)) / (1.0 - mu);
    d.foc_price(k).clamp(p1, t)
}
