//! Infinite-horizon game on a finite value grid.
//!
//! The seller's beliefs are a pair of index intervals into the value grid: the
//! naive types still consistent with the history and the sophisticated types
//! still consistent with it. A [`StrategyProfile`] maps beliefs to prices and
//! sophisticated decisions; everything else (values, certificates, bounds) is
//! computed by walking the finite belief graph.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};

/// Default verification tolerance.
pub const CERT_TOL: f64 = 1e-9;
/// Offset used to probe prices just either side of a breakpoint.
pub const PRICE_OFFSET: f64 = 1e-6;
const MAX_PATH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteModel {
    pub values: Vec<f64>,
    pub probs_naive: Vec<f64>,
    pub probs_soph: Vec<f64>,
    pub mu: f64,
    pub delta: f64,
}

impl DiscreteModel {
    pub fn new(values: Vec<f64>, probs_naive: Vec<f64>, probs_soph: Vec<f64>, mu: f64, delta: f64) -> Result<Self> {
        let m = DiscreteModel { values, probs_naive, probs_soph, mu, delta };
        m.validate()?;
        Ok(m)
    }

    /// Values {1, 10, 20}, uniform for both buyer kinds, naive mass `epsilon`,
    /// discount 2/3.
    pub fn example(epsilon: f64) -> Result<Self> {
        let u = vec![1.0 / 3.0; 3];
        Self::new(vec![1.0, 10.0, 20.0], u.clone(), u, 1.0 - epsilon, 2.0 / 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.values.len();
        if n == 0 {
            return Err(Error::Domain("empty value grid".into()));
        }
        if self.probs_naive.len() != n || self.probs_soph.len() != n {
            return Err(Error::Domain("probability vectors must match the value grid".into()));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) || self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("values must be finite, non-negative and strictly increasing".into()));
        }
        for (name, ps) in [("probs_naive", &self.probs_naive), ("probs_soph", &self.probs_soph)] {
            if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || (ps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("{name} must be a probability vector")));
            }
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Domain(format!("mu={} outside [0,1]", self.mu)));
        }
        if !(0.5..1.0).contains(&self.delta) {
            return Err(Error::Domain(format!("delta={} outside [1/2,1)", self.delta)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lowest(&self) -> f64 {
        self.values[0]
    }

    pub fn highest(&self) -> f64 {
        self.values[self.len() - 1]
    }

    pub fn naive_mass(&self) -> f64 {
        1.0 - self.mu
    }

    /// Largest gap between adjacent values; infinite for a single point.
    pub fn grid_size(&self) -> f64 {
        if self.len() == 1 {
            return f64::INFINITY;
        }
        self.values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Population CDF `P(v <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= x)
            .map(|(i, _)| self.mu * self.probs_soph[i] + (1.0 - self.mu) * self.probs_naive[i])
            .sum()
    }

    /// Sophisticated `P(v < x)`.
    pub fn soph_cdf_strict(&self, x: f64) -> f64 {
        self.values.iter().zip(&self.probs_soph).filter(|(v, _)| **v < x).map(|(_, p)| p).sum()
    }

    fn weight(&self, kind: BuyerKind, i: usize) -> f64 {
        match kind {
            BuyerKind::Naive => (1.0 - self.mu) * self.probs_naive[i],
            BuyerKind::Sophisticated => self.mu * self.probs_soph[i],
        }
    }
}

pub type Support = Option<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BeliefState {
    pub naive: Support,
    pub soph: Support,
}

impl BeliefState {
    pub fn full(m: &DiscreteModel) -> Self {
        let all = Some((0, m.len() - 1));
        BeliefState { naive: all, soph: all }
    }

    pub fn from_values(m: &DiscreteModel, naive: &[f64], soph: &[f64]) -> Result<Self> {
        Ok(BeliefState { naive: support_of(m, naive)?, soph: support_of(m, soph)? })
    }

    pub fn label(&self, m: &DiscreteModel) -> StateLabel {
        StateLabel { naive: values_of(m, self.naive).to_vec(), soph: values_of(m, self.soph).to_vec() }
    }
}

/// Beliefs written out as value lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateLabel {
    pub naive: Vec<f64>,
    pub soph: Vec<f64>,
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(N={:?}, S={:?})", self.naive, self.soph)
    }
}

fn support_of(m: &DiscreteModel, vals: &[f64]) -> Result<Support> {
    if vals.is_empty() {
        return Ok(None);
    }
    let idx = |v: &f64| {
        m.values.iter().position(|x| x == v).ok_or_else(|| Error::Domain(format!("{v} is not a support value")))
    };
    let lo = idx(&vals[0])?;
    let hi = idx(&vals[vals.len() - 1])?;
    if hi < lo || hi - lo + 1 != vals.len() {
        return Err(Error::Domain(format!("{vals:?} is not a contiguous run of support values")));
    }
    Ok(Some((lo, hi)))
}

pub fn values_of(m: &DiscreteModel, s: Support) -> &[f64] {
    match s {
        Some((lo, hi)) => &m.values[lo..=hi],
        None => &[],
    }
}

fn indices(s: Support) -> std::ops::Range<usize> {
    match s {
        Some((lo, hi)) => lo..hi + 1,
        None => 0..0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BuyerKind {
    Naive,
    Sophisticated,
}

/// Seller pricing rule, sophisticated response rule and belief updater.
pub trait StrategyProfile {
    fn name(&self) -> &str;

    /// Rejects models the profile is not defined on.
    fn validate(&self, _m: &DiscreteModel) -> Result<()> {
        Ok(())
    }

    fn root(&self, m: &DiscreteModel) -> BeliefState {
        BeliefState::full(m)
    }

    fn price(&self, m: &DiscreteModel, b: &BeliefState) -> Result<f64>;

    fn soph_accepts(&self, m: &DiscreteModel, b: &BeliefState, p: f64, v: f64) -> Result<bool>;

    fn update(&self, m: &DiscreteModel, b: &BeliefState, p: f64, accept: bool) -> Result<BeliefState> {
        bayes_update(self, m, b, p, accept)
    }

    /// Prices at which some buyer's response can change.
    fn breakpoints(&self, m: &DiscreteModel) -> Vec<f64>;
}

fn restrict(m: &DiscreteModel, s: Support, keep: impl Fn(usize) -> Result<bool>) -> Result<Support> {
    let mut kept = Vec::new();
    for i in indices(s) {
        if keep(i)? {
            kept.push(i);
        }
    }
    match (kept.first(), kept.last()) {
        (Some(&lo), Some(&hi)) if hi - lo + 1 == kept.len() => Ok(Some((lo, hi))),
        (None, _) => Ok(None),
        _ => Err(Error::Inconsistent(format!(
            "responses split the support {:?} into non-contiguous pieces",
            values_of(m, s)
        ))),
    }
}

/// Bayes restriction of both supports, with the off-path rules: when every
/// supported type should have acted the other way, beliefs move to a single
/// sophisticated type (the top of the support after an accept, the bottom after
/// a reject, the top value of the grid when no sophisticated type was left).
///
/// With no naive mass, a history that eliminates every sophisticated type is
/// itself off-path and moves beliefs to the top value.
pub fn bayes_update<P: StrategyProfile + ?Sized>(
    profile: &P,
    m: &DiscreteModel,
    b: &BeliefState,
    p: f64,
    accept: bool,
) -> Result<BeliefState> {
    let naive = restrict(m, b.naive, |i| Ok((m.values[i] >= p) == accept))?;
    let soph = restrict(m, b.soph, |i| Ok(profile.soph_accepts(m, b, p, m.values[i])? == accept))?;
    let top = m.len() - 1;
    if naive.is_none() && soph.is_none() {
        let point = match b.soph {
            Some((lo, hi)) => {
                if accept {
                    hi
                } else {
                    lo
                }
            }
            None => top,
        };
        return Ok(BeliefState { naive: None, soph: Some((point, point)) });
    }
    if m.naive_mass() == 0.0 && soph.is_none() {
        return Ok(BeliefState { naive: None, soph: Some((top, top)) });
    }
    Ok(BeliefState { naive, soph })
}

/// The equilibrium of the {1, 10, 20} example.
///
/// Two response cutoffs differ from the published table: prices above 10 at the
/// root need `v >= p + 76/3`, and prices above 10 once only {1, 10} remain naive
/// need `v >= p + 38`. Both follow from the utilities the incentive analysis
/// itself computes; the table's 26/3 would make a value-20 buyer accept prices
/// in (10, 34/3], which is not a best response.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example3pt;

impl Example3pt {
    fn unreachable(m: &DiscreteModel, b: &BeliefState) -> Error {
        Error::UnreachableState(format!("example profile has no action at {}", b.label(m)))
    }
}

impl StrategyProfile for Example3pt {
    fn name(&self) -> &str {
        "example3pt"
    }

    fn validate(&self, m: &DiscreteModel) -> Result<()> {
        if m.values != [1.0, 10.0, 20.0] || (m.delta - 2.0 / 3.0).abs() > 1e-12 {
            return Err(Error::UnsupportedProfile(
                "example3pt is defined only for values {1,10,20} and delta = 2/3".into(),
            ));
        }
        Ok(())
    }

    fn price(&self, m: &DiscreteModel, b: &BeliefState) -> Result<f64> {
        let (n, s) = (values_of(m, b.naive), values_of(m, b.soph));
        Ok(match (n, s) {
            ([], []) => return Err(Self::unreachable(m, b)),
            ([], s) => s[0],
            ([x], _) => *x,
            ([10.0, 20.0], []) => 20.0,
            ([10.0, 20.0], [20.0]) => 10.0,
            ([1.0, 10.0] | [1.0, 10.0, 20.0], [1.0, 10.0, 20.0]) => 2.0,
            _ => return Err(Self::unreachable(m, b)),
        })
    }

    fn soph_accepts(&self, m: &DiscreteModel, b: &BeliefState, p: f64, v: f64) -> Result<bool> {
        let (n, s) = (values_of(m, b.naive), values_of(m, b.soph));
        if n.is_empty() || p <= n[0] || n == [20.0] {
            return Ok(v >= p);
        }
        let cutoff = match n {
            [10.0] | [10.0, 20.0] => 20.0,
            [1.0, 10.0, 20.0] if p > 10.0 => 76.0 / 3.0,
            [1.0, 10.0, 20.0] if p > 2.0 => 38.0,
            [1.0, 10.0, 20.0] => 18.0,
            [1.0, 10.0] if p > 10.0 => 38.0,
            [1.0, 10.0] => 18.0,
            [1.0] if s == [1.0, 10.0, 20.0] => 38.0,
            [1.0] if s == [1.0, 10.0] => 18.0,
            _ => return Err(Self::unreachable(m, b)),
        };
        Ok(v >= p + cutoff)
    }

    fn breakpoints(&self, m: &DiscreteModel) -> Vec<f64> {
        let mut out = vec![1.0, 2.0, 10.0, 20.0];
        for v in &m.values {
            for c in [18.0, 20.0, 38.0, 76.0 / 3.0] {
                out.push(v - c);
            }
        }
        out
    }
}

/// The zero-price profile: post 0 while the buyer has neither accepted a positive
/// price nor rejected a zero price; afterwards believe the buyer has the top
/// value and post it forever. In the punishment phase buyers price-take.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoLearning;

impl NoLearning {
    fn punished(m: &DiscreteModel) -> BeliefState {
        let top = m.len() - 1;
        BeliefState { naive: None, soph: Some((top, top)) }
    }

    fn is_punished(b: &BeliefState) -> bool {
        b.naive.is_none()
    }
}

impl StrategyProfile for NoLearning {
    fn name(&self) -> &str {
        "no_learning"
    }

    fn price(&self, m: &DiscreteModel, b: &BeliefState) -> Result<f64> {
        Ok(if Self::is_punished(b) { m.highest() } else { 0.0 })
    }

    fn soph_accepts(&self, _m: &DiscreteModel, b: &BeliefState, p: f64, v: f64) -> Result<bool> {
        Ok(if Self::is_punished(b) || p <= 0.0 { v >= p } else { false })
    }

    fn update(&self, m: &DiscreteModel, b: &BeliefState, p: f64, accept: bool) -> Result<BeliefState> {
        if Self::is_punished(b) || (accept && p > 0.0) || (!accept && p <= 0.0) {
            Ok(Self::punished(m))
        } else {
            Ok(*b)
        }
    }

    fn breakpoints(&self, m: &DiscreteModel) -> Vec<f64> {
        vec![0.0, m.highest()]
    }
}

/// Discounted payments and utility of one buyer type from a state onwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathValue {
    pub revenue: f64,
    pub utility: f64,
}

struct Walker<'a> {
    m: &'a DiscreteModel,
    profile: &'a dyn StrategyProfile,
}

impl Walker<'_> {
    fn decide(&self, b: &BeliefState, p: f64, kind: BuyerKind, v: f64) -> Result<bool> {
        match kind {
            BuyerKind::Naive => Ok(v >= p),
            BuyerKind::Sophisticated => self.profile.soph_accepts(self.m, b, p, v),
        }
    }

    fn follow(&self, start: BeliefState, kind: BuyerKind, v: f64) -> Result<PathValue> {
        let (revenue, utility) = self.walk(start, kind, v, &|x| Ok(x))?;
        Ok(PathValue { revenue, utility })
    }

    /// Path value in the number type produced by `conv`, which is applied to
    /// the discount factor, the value and every price on the path.
    fn walk<T>(&self, start: BeliefState, kind: BuyerKind, v: f64, conv: &dyn Fn(f64) -> Result<T>) -> Result<(T, T)>
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
    {
        let d = conv(self.m.delta)?;
        let one = conv(1.0)?;
        let vt = conv(v)?;
        let mut seen: Vec<BeliefState> = Vec::new();
        let mut steps: Vec<(f64, bool)> = Vec::new();
        let mut b = start;
        loop {
            if let Some(j) = seen.iter().position(|s| *s == b) {
                let (p, a) = steps[j];
                if steps[j..].iter().any(|&(q, c)| q != p || c != a) {
                    return Err(Error::UnsupportedProfile(format!(
                        "{} cycles through {} with varying prices",
                        self.profile.name(),
                        b.label(self.m)
                    )));
                }
                let zero = conv(0.0)?;
                let (mut rev, mut util) = (zero, zero);
                let mut w = one;
                for &(q, c) in &steps[..j] {
                    if c {
                        let q = conv(q)?;
                        rev = rev + w * q;
                        util = util + w * (vt - q);
                    }
                    w = w * d;
                }
                if a {
                    let p = conv(p)?;
                    rev = rev + w * p / (one - d);
                    util = util + w * (vt - p) / (one - d);
                }
                return Ok((rev, util));
            }
            if seen.len() >= MAX_PATH {
                return Err(Error::UnsupportedProfile("belief path does not settle".into()));
            }
            let p = self.profile.price(self.m, &b)?;
            let a = self.decide(&b, p, kind, v)?;
            seen.push(b);
            steps.push((p, a));
            b = self.profile.update(self.m, &b, p, a)?;
        }
    }

    /// One-period price `p` at `b`, then the profile: `(payoff given beliefs,
    /// belief mass)`; `None` when the beliefs carry no mass.
    fn seller_payoff(&self, b: &BeliefState, p: f64) -> Result<Option<f64>> {
        let mut total = 0.0;
        let mut mass = 0.0;
        for (kind, s) in [(BuyerKind::Naive, b.naive), (BuyerKind::Sophisticated, b.soph)] {
            for i in indices(s) {
                let w = self.m.weight(kind, i);
                if w == 0.0 {
                    continue;
                }
                let v = self.m.values[i];
                let a = self.decide(b, p, kind, v)?;
                let next = self.profile.update(self.m, b, p, a)?;
                let cont = self.follow(next, kind, v)?.revenue;
                total += w * (if a { p } else { 0.0 } + self.m.delta * cont);
                mass += w;
            }
        }
        Ok((mass > 0.0).then(|| total / mass))
    }

    fn candidates(&self, prescribed: f64) -> Vec<f64> {
        let mut base: Vec<f64> = self.m.values.clone();
        base.extend(self.m.values.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        base.extend(self.profile.breakpoints(self.m));
        base.push(0.0);
        base.push(self.m.highest() + 1.0);
        base.push(prescribed);
        let mut set = BTreeSet::new();
        for x in base {
            for y in [x - PRICE_OFFSET, x, x + PRICE_OFFSET] {
                if y >= 0.0 && y.is_finite() {
                    set.insert(y.to_bits());
                }
            }
        }
        set.into_iter().map(f64::from_bits).collect()
    }

    /// Every belief state reachable from the root under arbitrary candidate
    /// prices and either decision.
    fn closure(&self) -> Result<Vec<BeliefState>> {
        let root = self.profile.root(self.m);
        let mut seen = HashSet::from([root]);
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(b) = queue.pop_front() {
            let p0 = self.profile.price(self.m, &b)?;
            for p in self.candidates(p0) {
                for a in [true, false] {
                    let n = self.profile.update(self.m, &b, p, a)?;
                    if seen.insert(n) {
                        order.push(n);
                        queue.push_back(n);
                    }
                }
            }
        }
        Ok(order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeValue {
    pub kind: BuyerKind,
    pub v: f64,
    pub revenue: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateValues {
    pub state: StateLabel,
    pub price: f64,
    /// Belief-weighted revenue; `None` when the beliefs carry no mass.
    pub seller_value: Option<f64>,
    pub types: Vec<TypeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTable {
    pub profile: String,
    /// Seller revenue at the root.
    pub root_value: f64,
    /// Root revenue conditional on the buyer being naive / sophisticated.
    pub root_naive_revenue: f64,
    pub root_soph_revenue: f64,
    pub states: Vec<StateValues>,
}

fn conditional_revenue(m: &DiscreteModel, w: &Walker, b: BeliefState, kind: BuyerKind) -> Result<f64> {
    let probs = match kind {
        BuyerKind::Naive => &m.probs_naive,
        BuyerKind::Sophisticated => &m.probs_soph,
    };
    let mut acc = 0.0;
    for (i, &q) in probs.iter().enumerate() {
        if q > 0.0 {
            acc += q * w.follow(b, kind, m.values[i])?.revenue;
        }
    }
    Ok(acc)
}

/// Revenue and utility of every type at every state the profile can reach.
pub fn discounted_values(m: &DiscreteModel, profile: &dyn StrategyProfile) -> Result<ValueTable> {
    m.validate()?;
    profile.validate(m)?;
    let w = Walker { m, profile };
    let root = profile.root(m);
    let mut states = Vec::new();
    for b in w.closure()? {
        let price = profile.price(m, &b)?;
        let mut types = Vec::new();
        for kind in [BuyerKind::Naive, BuyerKind::Sophisticated] {
            for &v in &m.values {
                let pv = w.follow(b, kind, v)?;
                types.push(TypeValue { kind, v, revenue: pv.revenue, utility: pv.utility });
            }
        }
        states.push(StateValues { state: b.label(m), price, seller_value: w.seller_payoff(&b, price)?, types });
    }
    Ok(ValueTable {
        profile: profile.name().to_string(),
        root_value: w.seller_payoff(&root, profile.price(m, &root)?)?.unwrap_or(0.0),
        root_naive_revenue: conditional_revenue(m, &w, root, BuyerKind::Naive)?,
        root_soph_revenue: conditional_revenue(m, &w, root, BuyerKind::Sophisticated)?,
        states,
    })
}

/// Utilities of a sophisticated buyer of value `v` who accepts or rejects `p` at
/// `b` and follows the profile afterwards: `(accept, reject)`.
pub fn buyer_choice_utilities(
    m: &DiscreteModel,
    profile: &dyn StrategyProfile,
    b: &BeliefState,
    p: f64,
    v: f64,
) -> Result<(f64, f64)> {
    let w = Walker { m, profile };
    let acc = w.follow(profile.update(m, b, p, true)?, BuyerKind::Sophisticated, v)?.utility;
    let rej = w.follow(profile.update(m, b, p, false)?, BuyerKind::Sophisticated, v)?.utility;
    Ok(((v - p) + m.delta * acc, m.delta * rej))
}

/// Exact rational number used to confirm ties that f64 arithmetic blurs.
pub type Exact = Ratio<i128>;

/// Smallest-denominator fraction whose nearest f64 is exactly `x`, found by
/// walking the continued-fraction convergents.
pub fn rationalize(x: f64) -> Result<Exact> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot rationalize {x}")));
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h, k) = (ai * h1 + h0, ai * k1 + k0);
        if k > 1_000_000_000_000 {
            break;
        }
        if h as f64 / k as f64 == x {
            return Ok(Ratio::new(h, k));
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    Err(Error::Domain(format!("{x} has no short rational form")))
}

/// [`buyer_choice_utilities`] in exact rational arithmetic.
pub fn exact_choice_utilities(
    m: &DiscreteModel,
    profile: &dyn StrategyProfile,
    b: &BeliefState,
    p: f64,
    v: f64,
) -> Result<(Exact, Exact)> {
    let w = Walker { m, profile };
    let conv = |x: f64| rationalize(x);
    let acc = w.walk(profile.update(m, b, p, true)?, BuyerKind::Sophisticated, v, &conv)?.1;
    let rej = w.walk(profile.update(m, b, p, false)?, BuyerKind::Sophisticated, v, &conv)?.1;
    let d = rationalize(m.delta)?;
    Ok((rationalize(v)? - rationalize(p)? + d * acc, d * rej))
}

/// Root revenue conditional on the buyer's kind, in exact rational arithmetic.
pub fn exact_conditional_revenue(m: &DiscreteModel, profile: &dyn StrategyProfile, kind: BuyerKind) -> Result<Exact> {
    m.validate()?;
    let w = Walker { m, profile };
    let root = profile.root(m);
    let probs = match kind {
        BuyerKind::Naive => &m.probs_naive,
        BuyerKind::Sophisticated => &m.probs_soph,
    };
    let conv = |x: f64| rationalize(x);
    let mut acc = Exact::from_integer(0);
    for (i, &q) in probs.iter().enumerate() {
        if q > 0.0 {
            acc += rationalize(q)? * w.walk(root, kind, m.values[i], &conv)?.0;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SellerViolation {
    pub state: StateLabel,
    pub prescribed_price: f64,
    pub prescribed_value: f64,
    pub deviation_price: f64,
    pub deviation_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuyerViolation {
    pub state: StateLabel,
    pub price: f64,
    pub v: f64,
    pub prescribed_accept: bool,
    pub prescribed_utility: f64,
    pub alternative_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub profile: String,
    pub states_checked: usize,
    pub seller_violations: Vec<SellerViolation>,
    pub buyer_violations: Vec<BuyerViolation>,
    pub clean: bool,
}

/// One-shot deviation check at every reachable state. Candidate seller prices
/// are the support values, midpoints between them, the profile's breakpoints and
/// the prescribed price, each also shifted by `PRICE_OFFSET` either way.
pub fn verify_one_shot_deviation(m: &DiscreteModel, profile: &dyn StrategyProfile, tol: f64) -> Result<Certificate> {
    m.validate()?;
    profile.validate(m)?;
    let w = Walker { m, profile };
    let states = w.closure()?;
    let mut seller_violations = Vec::new();
    let mut buyer_violations = Vec::new();
    for b in &states {
        let p0 = profile.price(m, b)?;
        let cands = w.candidates(p0);
        if let Some(v0) = w.seller_payoff(b, p0)? {
            let mut best = (p0, v0);
            for &p in &cands {
                if let Some(v) = w.seller_payoff(b, p)? {
                    if v > best.1 {
                        best = (p, v);
                    }
                }
            }
            if best.1 > v0 + tol {
                seller_violations.push(SellerViolation {
                    state: b.label(m),
                    prescribed_price: p0,
                    prescribed_value: v0,
                    deviation_price: best.0,
                    deviation_value: best.1,
                });
            }
        }
        for &p in &cands {
            for &v in &m.values {
                let a = profile.soph_accepts(m, b, p, v)?;
                let (ua, ur) = buyer_choice_utilities(m, profile, b, p, v)?;
                let (mine, other) = if a { (ua, ur) } else { (ur, ua) };
                if other > mine + tol {
                    buyer_violations.push(BuyerViolation {
                        state: b.label(m),
                        price: p,
                        v,
                        prescribed_accept: a,
                        prescribed_utility: mine,
                        alternative_utility: other,
                    });
                }
            }
        }
    }
    let clean = seller_violations.is_empty() && buyer_violations.is_empty();
    Ok(Certificate {
        profile: profile.name().to_string(),
        states_checked: states.len(),
        seller_violations,
        buyer_violations,
        clean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyFailure {
    pub state: StateLabel,
    pub price: f64,
    pub value: Option<f64>,
    pub naive_low: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertiesReport {
    /// Prices stay within the naive support.
    pub naive_justified: bool,
    /// Revenue from every state is at least the naive floor forever.
    pub above_baseline: bool,
    pub states_checked: usize,
    pub failures_a: Vec<PropertyFailure>,
    pub failures_b: Vec<PropertyFailure>,
}

pub fn check_properties_ab(m: &DiscreteModel, profile: &dyn StrategyProfile) -> Result<PropertiesReport> {
    m.validate()?;
    profile.validate(m)?;
    let w = Walker { m, profile };
    let mut checked = 0;
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    for b in w.closure()? {
        let n = values_of(m, b.naive);
        if n.is_empty() {
            continue;
        }
        checked += 1;
        let (lo, hi) = (n[0], n[n.len() - 1]);
        let p = profile.price(m, &b)?;
        let value = w.seller_payoff(&b, p)?;
        let fail = PropertyFailure { state: b.label(m), price: p, value, naive_low: lo };
        if p < lo || p > hi {
            fa.push(fail.clone());
        }
        if let Some(v) = value {
            if v < lo / (1.0 - m.delta) - CERT_TOL {
                fb.push(fail);
            }
        }
    }
    Ok(PropertiesReport {
        naive_justified: fa.is_empty(),
        above_baseline: fb.is_empty(),
        states_checked: checked,
        failures_a: fa,
        failures_b: fb,
    })
}

/// `max over p in V of delta/(1-delta) * p * (1 - F(p/(1-delta)))`.
pub fn revenue_lower_bound(m: &DiscreteModel) -> f64 {
    let k = 1.0 - m.delta;
    m.values.iter().map(|&p| m.delta / k * p * (1.0 - m.cdf(p / k))).fold(0.0, f64::max)
}

/// The same bound for a continuous distribution on [0,1]; the maximizer is the
/// monopoly price scaled by `1 - delta`.
pub fn continuous_revenue_lower_bound(d: &Distribution, delta: f64) -> f64 {
    delta * d.r_star()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveMdp {
    pub value: f64,
    pub root_price: f64,
    pub iterations: usize,
}

/// Optimal discounted revenue against a naive buyer, by value iteration over
/// interval beliefs with prices on the support.
pub fn naive_mdp_value(m: &DiscreteModel) -> Result<NaiveMdp> {
    m.validate()?;
    let n = m.len();
    let w = &m.probs_naive;
    let id = |lo: usize, hi: usize| lo * n + hi;
    let mass = |lo: usize, hi: usize| -> f64 { w[lo..=hi].iter().sum() };
    let mut val = vec![0.0; n * n];
    let mut iterations = 0;
    let bellman = |val: &[f64], lo: usize, hi: usize| -> (f64, f64) {
        let tot = mass(lo, hi);
        let mut best = (f64::NEG_INFINITY, m.values[lo]);
        for k in lo..=hi {
            let p = m.values[k];
            let up = mass(k, hi);
            let down = tot - up;
            let mut q = up * (p + m.delta * val[id(k, hi)]);
            if k > lo {
                q += down * m.delta * val[id(lo, k - 1)];
            }
            let q = if tot > 0.0 { q / tot } else { 0.0 };
            if q > best.0 {
                best = (q, p);
            }
        }
        best
    };
    loop {
        iterations += 1;
        let mut next = val.clone();
        let mut change: f64 = 0.0;
        for lo in 0..n {
            for hi in lo..n {
                let (q, _) = bellman(&val, lo, hi);
                change = change.max((q - val[id(lo, hi)]).abs());
                next[id(lo, hi)] = q;
            }
        }
        val = next;
        if change <= 1e-14 * val[id(0, n - 1)].abs().max(1.0) || iterations >= 100_000 {
            break;
        }
    }
    let (value, root_price) = bellman(&val, 0, n - 1);
    Ok(NaiveMdp { value, root_price, iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    /// `mu * max_p p(1 - F+^S(p)) / (1 - delta) + (1 - mu) * Rev^N`.
    pub benchmark: f64,
    pub soph_static_revenue: f64,
    pub naive_mdp: f64,
    pub lower_bound: f64,
    pub grid_size: f64,
    /// `max_p p(1 - F(p/(1-delta)))`.
    pub discrete_lhs: f64,
    /// `(1-delta) * mu * max_p p(1 - F+^S(p)) - grid_size`.
    pub discrete_rhs: f64,
    pub discrete_slack: f64,
}

pub fn commitment_benchmark(m: &DiscreteModel) -> Result<BenchmarkReport> {
    let mdp = naive_mdp_value(m)?;
    let soph = m.values.iter().map(|&p| p * (1.0 - m.soph_cdf_strict(p))).fold(0.0, f64::max);
    let k = 1.0 - m.delta;
    let lhs = m.values.iter().map(|&p| p * (1.0 - m.cdf(p / k))).fold(0.0, f64::max);
    let rhs = k * m.mu * soph - m.grid_size();
    Ok(BenchmarkReport {
        benchmark: m.mu * soph / k + (1.0 - m.mu) * mdp.value,
        soph_static_revenue: soph,
        naive_mdp: mdp.value,
        lower_bound: revenue_lower_bound(m),
        grid_size: m.grid_size(),
        discrete_lhs: lhs,
        discrete_rhs: rhs,
        discrete_slack: lhs - rhs,
    })
}

/// Continuous comparison `max_p p(1-F(p/(1-delta))) >= (1-delta) mu R*` with the
/// same value distribution for both kinds: `(lhs, rhs)`.
pub fn continuous_benchmark_comparison(d: &Distribution, mu: f64, delta: f64) -> (f64, f64) {
    ((1.0 - delta) * d.r_star(), (1.0 - delta) * mu * d.r_star())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSearch {
    pub largest_certified: f64,
    pub smallest_failed: Option<f64>,
    pub iterations: usize,
}

/// Largest naive mass in [0, 1) for which the certificate is clean, by bisection.
/// Assumes the certified set is an interval starting at 0.
pub fn epsilon_threshold(
    build: impl Fn(f64) -> Result<DiscreteModel>,
    profile: &dyn StrategyProfile,
    tol: f64,
    iterations: usize,
) -> Result<EpsilonSearch> {
    let clean = |e: f64| -> Result<bool> { Ok(verify_one_shot_deviation(&build(e)?, profile, tol)?.clean) };
    if !clean(0.0)? {
        return Err(Error::Inconsistent("profile is not certified at zero naive mass".into()));
    }
    let hi = 1.0 - 1e-9;
    if clean(hi)? {
        return Ok(EpsilonSearch { largest_certified: hi, smallest_failed: None, iterations: 0 });
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if clean(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonSearch { largest_certified: lo, smallest_failed: Some(hi), iterations })
}
