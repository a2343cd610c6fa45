//! Value distributions on [0,1]: CDF, density, truncations, revenue curves and
//! monopoly prices.
//!
//! Every optimizer in the crate reduces to the first-order condition of a
//! (possibly truncated) revenue curve. For `R(p) = p(1 - F(p))` we have
//! `R'(p) = 1 - F(p) - p f(p)`, so all maximizers are level sets of the
//! increasing map `p -> F(p) + p f(p)` (increasing exactly when the distribution is
//! regular). [`Distribution::foc_price`] inverts that map.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optim::solve_increasing;

/// Grid size used for the regularity check performed at construction.
pub const REGULARITY_GRID: usize = 1024;
/// Points of the trapezoid rule used for integrals against `F`.
pub const INTEGRATION_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    Uniform,
    /// `F(v) = v^c`.
    Power {
        c: f64,
    },
    Table(MonotoneCubic),
}

/// Truncation of the value distribution used for posterior revenue curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationSide {
    /// Condition on `v <= x`.
    Below(f64),
    /// Condition on `v >= x`.
    Above(f64),
}

/// Outcome of the numerical concavity check of the revenue curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub passed: bool,
    /// Largest (most positive) interior second difference of `R`.
    pub worst_second_diff: f64,
    /// Price at which the worst second difference occurs.
    pub at: f64,
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    kind: DistKind,
    p_star: f64,
    r_star: f64,
    regularity: RegularityReport,
}

impl Distribution {
    pub fn uniform() -> Self {
        Self::build(DistKind::Uniform)
    }

    pub fn power(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("power exponent must be positive, got {c}")));
        }
        Ok(Self::build(DistKind::Power { c }))
    }

    /// Table distribution from `(value, cdf)` knots.
    pub fn table(values: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        Ok(Self::build(DistKind::Table(MonotoneCubic::new(values, cdf)?)))
    }

    /// Read a `value,cdf` CSV table.
    pub fn table_from_reader(r: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::InvalidTable(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "cdf" {
            return Err(Error::InvalidTable(format!(
                "expected header `value,cdf`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidTable(e.to_string()))?;
            let parse = |j: usize| -> Result<f64> {
                rec.get(j)
                    .ok_or_else(|| Error::InvalidTable(format!("row {}: missing column", i + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidTable(format!("row {}: {e}", i + 1)))
            };
            xs.push(parse(0)?);
            ys.push(parse(1)?);
        }
        Self::table(xs, ys)
    }

    pub fn table_from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::InvalidTable(format!("{}: {e}", path.display())))?;
        Self::table_from_reader(f)
    }

    fn build(kind: DistKind) -> Self {
        let mut d = Distribution {
            kind,
            p_star: 0.0,
            r_star: 0.0,
            regularity: RegularityReport { passed: true, worst_second_diff: 0.0, at: 0.0, grid_n: 0 },
        };
        d.p_star = d.foc_price(1.0);
        d.r_star = d.rev(d.p_star);
        d.regularity = d.validate_regularity(REGULARITY_GRID);
        d
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    /// Short spec string, e.g. `uniform` or `power:2`.
    pub fn label(&self) -> String {
        match &self.kind {
            DistKind::Uniform => "uniform".to_string(),
            DistKind::Power { c } => format!("power:{c}"),
            DistKind::Table(t) => format!("table[{} knots]", t.xs.len()),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        match &self.kind {
            DistKind::Uniform => v,
            DistKind::Power { c } => v.powf(*c),
            DistKind::Table(t) => t.eval(v).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if !(0.0..=1.0).contains(&v) {
            return 0.0;
        }
        match &self.kind {
            DistKind::Uniform => 1.0,
            DistKind::Power { c } => {
                if v == 0.0 {
                    if *c < 1.0 {
                        f64::INFINITY
                    } else if *c == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    c * v.powf(c - 1.0)
                }
            }
            DistKind::Table(t) => t.deriv(v).max(0.0),
        }
    }

    /// Smallest `v` with `F(v) >= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        match &self.kind {
            DistKind::Uniform => q,
            DistKind::Power { c } => q.powf(1.0 / c),
            DistKind::Table(_) => solve_increasing(|v| self.cdf(v), q, 0.0, 1.0),
        }
    }

    /// Untruncated revenue curve `R(p) = p(1 - F(p))`.
    pub fn rev(&self, p: f64) -> f64 {
        p * (1.0 - self.cdf(p))
    }

    /// `R'(p) = 1 - F(p) - p f(p)`.
    pub fn rev_deriv(&self, p: f64) -> f64 {
        1.0 - self.marginal(p)
    }

    /// `F(p) + p f(p)`; non-decreasing for regular distributions.
    pub fn marginal(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        self.cdf(p) + p * self.pdf(p)
    }

    /// Price solving `F(p) + p f(p) = k` on [0,1], clamped to the endpoints.
    pub fn foc_price(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            DistKind::Uniform => (0.5 * k).min(1.0),
            DistKind::Power { c } => (k / (1.0 + c)).powf(1.0 / c).min(1.0),
            DistKind::Table(_) => solve_increasing(|p| self.marginal(p), k, 0.0, 1.0),
        }
    }

    /// `R_{<=x}(p) = p(1 - F(p)/F(x))` for `p < x`, zero above.
    pub fn rev_below(&self, x: f64, p: f64) -> f64 {
        if p >= x {
            return 0.0;
        }
        let fx = self.cdf(x);
        if fx <= 0.0 {
            return 0.0;
        }
        p * (1.0 - self.cdf(p) / fx)
    }

    /// `R_{>=x}(p)`: `p` below `x`, `p(1-F(p))/(1-F(x))` from `x` on.
    pub fn rev_above(&self, x: f64, p: f64) -> f64 {
        if p < x {
            return p;
        }
        let sx = 1.0 - self.cdf(x);
        if sx <= 0.0 {
            return if p <= x { p } else { 0.0 };
        }
        p * (1.0 - self.cdf(p)) / sx
    }

    /// Revenue at price `p` under an optional truncation.
    pub fn revenue(&self, p: f64, trunc: Option<TruncationSide>) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("price {p} outside [0,1]")));
        }
        match trunc {
            None => Ok(self.rev(p)),
            Some(TruncationSide::Below(x)) => {
                check_below(x)?;
                Ok(self.rev_below(x, p))
            }
            Some(TruncationSide::Above(x)) => {
                check_above(x)?;
                Ok(self.rev_above(x, p))
            }
        }
    }

    /// Maximizer of the (truncated) revenue curve and its value.
    pub fn monopoly_price(&self, trunc: Option<TruncationSide>) -> Result<(f64, f64)> {
        self.ensure_regular()?;
        match trunc {
            None => Ok((self.p_star, self.r_star)),
            Some(TruncationSide::Below(x)) => {
                check_below(x)?;
                let p = self.monopoly_below(x);
                Ok((p, self.rev_below(x, p)))
            }
            Some(TruncationSide::Above(x)) => {
                check_above(x)?;
                let p = self.p_star.max(x);
                Ok((p, self.rev_above(x, p)))
            }
        }
    }

    /// `p*_{<=x}`: maximizer of `p(F(x) - F(p))`.
    pub fn monopoly_below(&self, x: f64) -> f64 {
        self.foc_price(self.cdf(x)).min(x)
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn regularity(&self) -> RegularityReport {
        self.regularity
    }

    pub fn ensure_regular(&self) -> Result<()> {
        if self.regularity.passed {
            Ok(())
        } else {
            Err(Error::NotRegular { worst: self.regularity.worst_second_diff, at: self.regularity.at })
        }
    }

    /// Check that `R` has strictly negative second differences on the interior
    /// of an `grid_n`-interval grid.
    pub fn validate_regularity(&self, grid_n: usize) -> RegularityReport {
        let n = grid_n.max(16);
        let h = 1.0 / n as f64;
        let eps = 1e-9 * h * h;
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0.0;
        for i in 1..n {
            let p = i as f64 * h;
            let d2 = self.rev(p - h) - 2.0 * self.rev(p) + self.rev(p + h);
            if d2 > worst {
                worst = d2;
                at = p;
            }
        }
        RegularityReport { passed: worst <= -eps, worst_second_diff: worst, at, grid_n: n }
    }

    /// `E[v]`.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            DistKind::Uniform => 0.5,
            DistKind::Power { c } => c / (c + 1.0),
            DistKind::Table(_) => self.partial_mean(0.0, 1.0),
        }
    }

    /// `E[v; a <= v <= b] = b F(b) - a F(a) - integral of F over [a, b]`.
    pub fn partial_mean(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        if b <= a {
            return 0.0;
        }
        let int_f = match &self.kind {
            DistKind::Uniform => 0.5 * (b * b - a * a),
            DistKind::Power { c } => (b.powf(c + 1.0) - a.powf(c + 1.0)) / (c + 1.0),
            DistKind::Table(_) => trapezoid(|v| self.cdf(v), a, b, INTEGRATION_POINTS),
        };
        b * self.cdf(b) - a * self.cdf(a) - int_f
    }
}

fn check_below(x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("below-truncation point {x} outside (0,1]")))
    }
}

fn check_above(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("above-truncation point {x} outside [0,1]")))
    }
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2);
    let h = (b - a) / (n - 1) as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n - 1 {
        s += f(a + h * i as f64);
    }
    s * h
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidTable("value and cdf columns differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidTable("need at least the rows 0,0 and 1,1".into()));
        }
        let n = xs.len();
        if xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(Error::InvalidTable("first row must be 0,0".into()));
        }
        if xs[n - 1] != 1.0 || ys[n - 1] != 1.0 {
            return Err(Error::InvalidTable("last row must be 1,1".into()));
        }
        for i in 1..n {
            if xs[i].partial_cmp(&xs[i - 1]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidTable(format!("values not strictly increasing at row {}", i + 1)));
            }
            if ys[i].partial_cmp(&ys[i - 1]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidTable(format!("cdf not strictly increasing at row {}", i + 1)));
            }
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    m[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic { xs, ys, slopes: m })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * self.ys[k]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[k]
            + (-6.0 * t2 + 6.0 * t) / h * self.ys[k + 1]
            + (3.0 * t2 - 2.0 * t) * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::bracketed_max;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn kinked_table() -> Distribution {
        // Density drops from 2 to 1/3 at v=0.4; the revenue curve bends upward there.
        Distribution::table(vec![0.0, 0.4, 1.0], vec![0.0, 0.8, 1.0]).unwrap()
    }

    fn sampled_power(c: f64, n: usize) -> Distribution {
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let ys = xs.iter().map(|x| x.powf(c)).collect();
        Distribution::table(xs, ys).unwrap()
    }

    #[test]
    fn revenue_examples() {
        let u = Distribution::uniform();
        assert_abs_diff_eq!(u.revenue(0.5, None).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(u.revenue(0.3, Some(TruncationSide::Below(0.6))).unwrap(), 0.15, epsilon = 1e-15);
        assert_eq!(u.revenue(0.7, Some(TruncationSide::Below(0.6))).unwrap(), 0.0);
        assert!(matches!(u.revenue(0.3, Some(TruncationSide::Below(0.0))), Err(Error::Domain(_))));
        assert!(matches!(u.revenue(0.3, Some(TruncationSide::Below(1.2))), Err(Error::Domain(_))));
    }

    #[test]
    fn monopoly_examples() {
        let u = Distribution::uniform();
        let (p, r) = u.monopoly_price(None).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.25, epsilon = 1e-15);
        let (p, r) = u.monopoly_price(Some(TruncationSide::Below(0.6))).unwrap();
        assert_abs_diff_eq!(p, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.15, epsilon = 1e-12);
        let (p, r) = u.monopoly_price(Some(TruncationSide::Above(0.7))).unwrap();
        assert_abs_diff_eq!(p, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn monopoly_rejects_irregular() {
        assert!(matches!(kinked_table().monopoly_price(None), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn foc_agrees_with_golden_section() {
        for d in [
            Distribution::uniform(),
            Distribution::power(0.5).unwrap(),
            Distribution::power(2.0).unwrap(),
            Distribution::power(3.0).unwrap(),
            sampled_power(2.0, 40),
        ] {
            for x in [0.1, 0.35, 0.6, 0.9, 1.0] {
                let (pg, rg) = bracketed_max(|p| d.rev_below(x, p), 0.0, x, 1024, 1e-12);
                let pf = d.monopoly_below(x);
                assert_abs_diff_eq!(pf, pg, epsilon = 1e-6);
                assert!(d.rev_below(x, pf) >= rg - 1e-14, "{} x={x}", d.label());
            }
        }
    }

    #[test]
    fn power_monopoly_closed_form() {
        // p(1-p^c) peaks at (1/(1+c))^(1/c).
        for c in [0.5, 2.0, 3.0] {
            let d = Distribution::power(c).unwrap();
            assert_abs_diff_eq!(d.p_star(), (1.0 / (1.0 + c)).powf(1.0 / c), epsilon = 1e-14);
        }
    }

    #[test]
    fn regularity_examples() {
        let u = Distribution::uniform().validate_regularity(1024);
        assert!(u.passed);
        let h = 1.0 / 1024.0;
        assert_abs_diff_eq!(u.worst_second_diff, -2.0 * h * h, epsilon = 1e-15);
        for c in [0.5, 2.0, 3.0] {
            assert!(Distribution::power(c).unwrap().validate_regularity(1024).passed);
        }
        let bad = kinked_table().validate_regularity(1024);
        assert!(!bad.passed);
        assert!(bad.worst_second_diff > 0.0);
        assert!((bad.at - 0.4).abs() < 0.05, "bump located at {}", bad.at);
        assert!(sampled_power(2.0, 40).regularity().passed);
    }

    #[test]
    fn quantile_examples() {
        let u = Distribution::uniform();
        assert_eq!(u.quantile(0.25), 0.25);
        assert_eq!(u.quantile(1.0), 1.0);
        assert_abs_diff_eq!(Distribution::power(2.0).unwrap().quantile(0.25), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn table_interpolates_smooth_cdf_closely() {
        let t = sampled_power(2.0, 40);
        for i in 0..=100 {
            let v = i as f64 / 100.0;
            assert_abs_diff_eq!(t.cdf(v), v * v, epsilon = 1e-4);
        }
        let u = Distribution::table(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(u.cdf(0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(u.pdf(0.3), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn table_validation_errors() {
        assert!(Distribution::table(vec![0.0, 1.0], vec![0.0, 0.9]).is_err());
        assert!(Distribution::table(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Distribution::table(vec![0.0, 0.5, 0.5, 1.0], vec![0.0, 0.3, 0.4, 1.0]).is_err());
        assert!(Distribution::table(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn csv_loading() {
        let ok = "value,cdf\n0,0\n0.5,0.25\n1,1\n";
        let d = Distribution::table_from_reader(ok.as_bytes()).unwrap();
        assert_abs_diff_eq!(d.cdf(0.5), 0.25, epsilon = 1e-15);
        let bad_header = "v,F\n0,0\n1,1\n";
        assert!(matches!(Distribution::table_from_reader(bad_header.as_bytes()), Err(Error::InvalidTable(_))));
        let bad_num = "value,cdf\n0,0\n0.5,abc\n1,1\n";
        assert!(Distribution::table_from_reader(bad_num.as_bytes()).is_err());
    }

    #[test]
    fn partial_mean_matches_closed_forms() {
        let u = Distribution::uniform();
        assert_abs_diff_eq!(u.partial_mean(0.2, 0.6), (0.36 - 0.04) / 2.0, epsilon = 1e-15);
        let t = Distribution::table(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(t.partial_mean(0.2, 0.6), 0.16, epsilon = 1e-9);
        assert_abs_diff_eq!(t.mean(), 0.5, epsilon = 1e-9);
        let p = Distribution::power(2.0).unwrap();
        // integral of v * 2v over [0,1] is 2/3
        assert_abs_diff_eq!(p.partial_mean(0.0, 1.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    fn dists() -> Vec<Distribution> {
        vec![
            Distribution::uniform(),
            Distribution::power(0.5).unwrap(),
            Distribution::power(2.0).unwrap(),
            Distribution::power(3.0).unwrap(),
            sampled_power(2.0, 40),
        ]
    }

    proptest! {
        #[test]
        fn revenue_bounds(i in 0usize..5, p in 0.0f64..=1.0) {
            let d = &dists()[i];
            let r = d.rev(p);
            prop_assert!(r >= 0.0 && r <= p + 1e-15);
            prop_assert_eq!(d.rev(0.0), 0.0);
            prop_assert!(d.rev(1.0).abs() < 1e-15);
        }

        #[test]
        fn truncated_monopoly_sides(i in 0usize..5, x in 0.01f64..0.99) {
            let d = &dists()[i];
            let (pb, _) = d.monopoly_price(Some(TruncationSide::Below(x))).unwrap();
            let (pa, _) = d.monopoly_price(Some(TruncationSide::Above(x))).unwrap();
            prop_assert!(pb < x);
            prop_assert!(pa >= x);
        }

        #[test]
        fn quantile_inverts_cdf(i in 0usize..5, v in 0.001f64..0.999) {
            let d = &dists()[i];
            prop_assert!((d.quantile(d.cdf(v)) - v).abs() < 1e-9);
        }

        #[test]
        fn uniform_below_monopoly_is_half(t in 0.001f64..=1.0) {
            let u = Distribution::uniform();
            let (p, _) = u.monopoly_price(Some(TruncationSide::Below(t))).unwrap();
            prop_assert!((p - t / 2.0).abs() <= 1e-9);
        }
    }
}
