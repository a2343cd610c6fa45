//! Closed forms for uniform values on [0,1].
//!
//! Two printed formulas are corrected here, both confirmed against the numerical
//! solver in this crate:
//! * the reject price for `sqrt(mu)/(2+sqrt(mu)-mu^2) <= p1 < (2+mu)/(4+mu-mu^2)`
//!   is `(p1(1-mu) + t mu)/2`, i.e. `(mu + p1(2-mu-mu^2)) / (2(2-mu^2))`;
//! * the matching branch of `Rev(p1, mu)` has linear coefficient
//!   `8 - 4mu - 10mu^2 + 3mu^3 + 3mu^4`.

use serde::Serialize;

use crate::continuation::{Continuation, Focus, PriceLottery};
use crate::error::{Error, Result};
use crate::optim::bisect_flip;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearConstants {
    /// Below this level the seller's first price is the interior optimum of the
    /// high-price branch.
    pub mu_hat: f64,
    /// Level at which the naive- and sophisticated-focused optima tie.
    pub mu_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
}

/// `mu^3 + 4 mu^2 + 4 mu - 1`, whose unique root in [0,1] is `mu_hat`.
pub fn mu_hat_cubic(mu: f64) -> f64 {
    ((mu + 4.0) * mu + 4.0) * mu - 1.0
}

/// Difference between the two candidate revenues whose root is `mu_bar`.
pub fn mu_bar_equation(mu: f64) -> f64 {
    naive_focused_rev(mu) - soph_focused_rev(mu)
}

fn naive_focused_rev(mu: f64) -> f64 {
    let (m2, m3) = (mu * mu, mu * mu * mu);
    (-7.0 - 2.0 * mu + 5.0 * m2 + 2.0 * m3) / (-12.0 - 8.0 * mu + 6.0 * m2 + 5.0 * m3 + m2 * m2)
}

fn soph_focused_rev(mu: f64) -> f64 {
    let r = mu.sqrt();
    (1.0 + 2.0 * r).powi(2) / soph_den(mu)
}

fn soph_den(mu: f64) -> f64 {
    let r = mu.sqrt();
    4.0 + 8.0 * r + 7.0 * mu + 2.0 * mu * r - mu * mu
}

pub fn constants() -> LinearConstants {
    let s = 177f64.sqrt();
    // Cardano root of the depressed cubic, shifted back by -4/3.
    let mu_hat = (((43.0 - 3.0 * s) / 2.0).cbrt() + ((43.0 + 3.0 * s) / 2.0).cbrt()) / 3.0 - 4.0 / 3.0;
    let (lo, hi) = bisect_flip(|m| mu_bar_equation(m) <= 0.0, 0.5, 0.75, 0.0);
    let mu_bar = if mu_bar_equation(hi).abs() < mu_bar_equation(lo).abs() { hi } else { lo };
    LinearConstants { mu_hat, mu_bar }
}

/// At `mu = 1` the cuts `b` and `c` coincide, so the branches dividing by
/// `1 - mu` are never reached.
fn check_mu(mu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::Domain(format!("mu={mu} outside the formula's range")))
    }
}

fn check_p1(p1: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p1) {
        Ok(())
    } else {
        Err(Error::Domain(format!("p1={p1} outside [0,1]")))
    }
}

/// Equilibrium first-round price. At `mu = 1` the last branch evaluates to 0.3.
pub fn seller_round1(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let c = constants();
    let (m2, m3) = (mu * mu, mu * mu * mu);
    Ok(if mu < c.mu_hat {
        (2.0 + mu).powi(2) / (7.0 + 10.0 * mu + 3.0 * m2)
    } else if mu < 0.5 {
        (2.0 + mu) / (4.0 + mu - m2)
    } else if mu < c.mu_bar {
        (-8.0 - 4.0 * mu + 6.0 * m2 + 3.0 * m3) / (-12.0 - 8.0 * mu + 6.0 * m2 + 5.0 * m3 + m2 * m2)
    } else {
        (2.0 * mu.sqrt() + 4.0 * mu) / soph_den(mu)
    })
}

/// Boundaries in `p1` between the branches of the round-two strategies.
struct Cuts {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
}

fn cuts(mu: f64) -> Cuts {
    let r = mu.sqrt();
    Cuts {
        a: r / (2.0 * (1.0 + r)),
        b: r / ((2.0 - mu) * (1.0 + r)),
        c: r / (2.0 + r - mu * mu),
        d: (2.0 + mu) / (4.0 + mu - mu * mu),
        e: (2.0 + mu) / (3.0 + mu),
    }
}

/// Second-round price after an accept or a reject. At `mu = 0` the branches
/// involving `1/sqrt(mu)` are empty.
pub fn seller_round2(mu: f64, p1: f64, decision: Decision) -> Result<PriceLottery> {
    check_mu(mu)?;
    check_p1(p1)?;
    let r = mu.sqrt();
    let k = cuts(mu);
    let m2 = mu * mu;
    Ok(match decision {
        Decision::Accept => PriceLottery::deterministic(if p1 < k.a {
            0.5
        } else if p1 < k.b {
            p1 * (1.0 + r) / r
        } else if p1 < k.c {
            (r - p1 * mu * (1.0 + r)) / (2.0 * (1.0 - mu) * r)
        } else if p1 < k.d {
            (2.0 + mu - p1 * mu * (1.0 + mu)) / (2.0 * (2.0 - m2))
        } else {
            p1
        }),
        Decision::Reject => {
            let lo = 0.5 * p1 * (1.0 + r);
            if p1 < k.b {
                PriceLottery::two_point(lo, p1 * (1.0 + r) / (2.0 * r), 1.0 / (1.0 + r))
            } else if p1 < k.c {
                let w = (3.0 * p1 - r + p1 * r - 2.0 * p1 * mu) / (p1 * (1.0 - mu).powi(2));
                PriceLottery::two_point(lo, p1 * (1.0 + r) / (2.0 * r), w)
            } else if p1 < k.d {
                PriceLottery::deterministic((mu + p1 * (2.0 - mu - m2)) / (2.0 * (2.0 - m2)))
            } else if p1 < k.e {
                PriceLottery::deterministic(p1 * (1.0 + mu) / (2.0 + mu))
            } else {
                PriceLottery::deterministic((mu + p1 * (1.0 - mu)) / 2.0)
            }
        }
    })
}

/// Sophisticated buyer's first-round threshold; 1 means every type below the top
/// rejects.
pub fn buyer_threshold(mu: f64, p1: f64) -> Result<f64> {
    check_mu(mu)?;
    check_p1(p1)?;
    let k = cuts(mu);
    Ok(if p1 < k.c {
        p1 * (1.0 + mu.sqrt()) / mu.sqrt()
    } else if p1 < k.d {
        (1.0 + p1 * (1.0 - mu * mu)) / (2.0 - mu * mu)
    } else if p1 < k.e {
        p1 * (3.0 + mu) / (2.0 + mu)
    } else {
        1.0
    })
}

/// Continuation assembled from the closed-form strategies.
pub fn profile_continuation(mu: f64, p1: f64) -> Result<Continuation> {
    if p1 == 0.0 {
        return Ok(Continuation {
            p1,
            p2a: 0.5,
            p2r: PriceLottery::deterministic(0.0),
            t: 0.0,
            all_reject: false,
            focus: Focus::Sophisticated,
        });
    }
    let t = buyer_threshold(mu, p1)?;
    let p2a = seller_round2(mu, p1, Decision::Accept)?.lo();
    let p2r = seller_round2(mu, p1, Decision::Reject)?;
    let focus = if p2a >= t { Focus::Sophisticated } else { Focus::Naive };
    Ok(Continuation { p1, p2a, p2r, t, all_reject: t >= 1.0, focus })
}

/// Seller revenue as a function of the first-round price (six branches).
pub fn rev_of_p1(mu: f64, p1: f64) -> Result<f64> {
    check_mu(mu)?;
    check_p1(p1)?;
    let r = mu.sqrt();
    let (m2, m3, m4, m32) = (mu * mu, mu * mu * mu, mu * mu * mu * mu, mu * r);
    let k = cuts(mu);
    let q = p1 * p1;
    Ok(if p1 <= k.a {
        0.25 + p1 + 0.25 * q * (-3.0 - 2.0 * r + mu)
    } else if p1 <= k.b {
        p1 * (4.0 * (r + 2.0 * mu) + p1 * (-4.0 - 8.0 * r - 7.0 * mu - 2.0 * m32 + m2)) / (4.0 * mu)
    } else if p1 <= k.c {
        (-1.0 + 2.0 * p1 * (-2.0 + r + 3.0 * mu) + q * (3.0 + 2.0 * r - 5.0 * mu - 4.0 * m32)) / (4.0 * (mu - 1.0))
    } else if p1 <= k.d {
        -(-4.0 + 2.0 * m2 + m3 - 2.0 * p1 * (8.0 - 4.0 * mu - 10.0 * m2 + 3.0 * m3 + 3.0 * m4)
            + q * (12.0 - 4.0 * mu - 14.0 * m2 + m3 + 4.0 * m4 + m4 * mu))
            / (4.0 * (m2 - 2.0).powi(2))
    } else if p1 <= k.e {
        p1 * (2.0 - p1 * (7.0 + 10.0 * mu + 3.0 * m2) / (2.0 + mu).powi(2))
    } else {
        2.0 * (p1 - 1.0) * p1 * (mu - 1.0) + 0.25 * (p1 + mu - p1 * mu).powi(2)
    })
}

/// Equilibrium revenue.
pub fn rev_closed(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let c = constants();
    let (m2, m3) = (mu * mu, mu * mu * mu);
    Ok(if mu < c.mu_hat {
        (2.0 + mu).powi(2) / (7.0 + 10.0 * mu + 3.0 * m2)
    } else if mu < 0.5 {
        (9.0 + 2.0 * mu - 5.0 * m2 - 2.0 * m3) / (4.0 + mu - m2).powi(2)
    } else if mu < c.mu_bar {
        naive_focused_rev(mu)
    } else {
        soph_focused_rev(mu)
    })
}

/// Closed-form welfare on the sophisticated-focused branch `mu >= mu_bar`.
pub fn welfare_closed(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let c = constants();
    if mu < c.mu_bar {
        return Err(Error::OutOfBranch(format!("welfare closed form needs mu >= {}, got {mu}", c.mu_bar)));
    }
    let r = mu.sqrt();
    let m32 = mu * r;
    Ok((6.0 + 9.0 * r + 6.0 * mu + m32) / (8.0 + 16.0 * r + 14.0 * mu + 4.0 * m32 - 2.0 * mu * mu))
}
