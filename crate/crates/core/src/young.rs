//! Young functions: evaluation, density, inverse, numeric Legendre conjugate
//! and the Δ₂ growth indices.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gl8, integrate_with};

/// Lower and upper edge of the log grid used for conjugate tables and index scans.
pub const SCAN_MIN: f64 = 1e-8;
pub const SCAN_MAX: f64 = 1e8;
/// Number of abscissae in a conjugate table.
pub const CONJUGATE_POINTS: usize = 4096;
/// Number of points in the growth-index scan.
pub const INDEX_SCAN_POINTS: usize = 10_000;

/// A convex increasing growth law `A` with `A(0) = 0`.
///
/// Values are immutable; cloning a tabulated function only bumps a refcount.
#[derive(Clone, Debug, PartialEq)]
pub enum YoungFunction {
    /// `t^p`
    Power { p: f64 },
    /// `t^p + t^q`
    PowerSum { p: f64, q: f64 },
    /// `t^p log^q(1 + t^r)`
    Zygmund { p: f64, q: f64, r: f64 },
    /// `t^p log^a(1+t) log^b(1+log(1+t))`
    IterLog { p: f64, a: f64, b: f64 },
    /// `∫₀ᵗ s^{p-1} log^a(1+s) ds`
    PowerLogIntegral { p: f64, a: f64 },
    /// Monotone cubic interpolation of a log-spaced table.
    Tabulated(Arc<Table>),
}

/// Samples `(t_j, A(t_j))` stored in log–log form with PCHIP slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    log_t: Vec<f64>,
    log_a: Vec<f64>,
    slope: Vec<f64>,
}

impl Table {
    fn new(ts: &[f64], values: &[f64]) -> Result<Self> {
        if ts.len() != values.len() || ts.len() < 3 {
            return Err(Error::Domain("table needs at least three matching samples".into()));
        }
        for w in ts.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::Domain("table abscissae must be positive and increasing".into()));
            }
        }
        for w in values.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
                return Err(Error::Domain("table values must be positive, finite and increasing".into()));
            }
        }
        let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let log_a: Vec<f64> = values.iter().map(|a| a.ln()).collect();
        let slope = pchip_slopes(&log_t, &log_a);
        Ok(Table { log_t, log_a, slope })
    }

    pub fn t_min(&self) -> f64 {
        self.log_t[0].exp()
    }

    pub fn t_max(&self) -> f64 {
        self.log_t[self.log_t.len() - 1].exp()
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.log_t.iter().map(|x| x.exp()).collect()
    }

    /// Returns (log A, d log A / d log t) at `t > 0`.
    fn log_eval(&self, t: f64) -> Result<(f64, f64)> {
        let x = t.ln();
        let n = self.log_t.len();
        if x < self.log_t[0] {
            let d = self.slope[0];
            return Ok((self.log_a[0] + d * (x - self.log_t[0]), d));
        }
        if x > self.log_t[n - 1] + 1e-12 {
            return Err(Error::Extrapolation { t, max: self.t_max() });
        }
        let x = x.min(self.log_t[n - 1]);
        let j = match self.log_t.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.log_t[j], self.log_t[j + 1]);
        let (y0, y1) = (self.log_a[j], self.log_a[j + 1]);
        let (d0, d1) = (self.slope[j], self.slope[j + 1]);
        let hx = x1 - x0;
        let u = (x - x0) / hx;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let y = h00 * y0 + h10 * hx * d0 + h01 * y1 + h11 * hx * d1;
        let dy = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * hx * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * hx * d1)
            / hx;
        Ok((y, dy))
    }
}

/// Fritsch–Carlson monotone slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Δ₂ growth indices `p⁻ ≤ t a(t)/A(t) ≤ p⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthIndices {
    pub p_minus: f64,
    pub p_plus: f64,
    /// `A` is doubling (finite upper index).
    pub a_delta2: bool,
    /// The conjugate is doubling (lower index above one).
    pub conjugate_delta2: bool,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        Self::Power { p }.validated()
    }

    pub fn zygmund(p: f64, q: f64, r: f64) -> Result<Self> {
        Self::Zygmund { p, q, r }.validated()
    }

    /// Build a tabulated Young function from positive increasing samples.
    pub fn tabulated(ts: &[f64], values: &[f64]) -> Result<Self> {
        Ok(Self::Tabulated(Arc::new(Table::new(ts, values)?)))
    }

    fn validated(self) -> Result<Self> {
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { Err(Error::Domain(msg.into())) };
        match self {
            Self::Power { p } => ok(p.is_finite() && p > 1.0, "power needs p > 1")?,
            Self::PowerSum { p, q } => {
                ok(p.is_finite() && q.is_finite() && p > 1.0 && q > 1.0, "powersum needs p, q > 1")?
            }
            Self::Zygmund { p, q, r } => ok(
                [p, q, r].iter().all(|v| v.is_finite()) && p >= 1.0 && q >= 0.0 && r > 0.0 && p + q * r > 1.0,
                "zygmund needs p >= 1, q >= 0, r > 0 and p + qr > 1",
            )?,
            Self::IterLog { p, a, b } => ok(
                [p, a, b].iter().all(|v| v.is_finite()) && p >= 1.0 && a >= 0.0 && b >= 0.0 && p + a + b > 1.0,
                "iterlog needs p >= 1, a, b >= 0 and p + a + b > 1",
            )?,
            Self::PowerLogIntegral { p, a } => ok(
                p.is_finite() && a.is_finite() && p >= 1.0 && a >= 0.0 && p + a > 1.0,
                "plogint needs p >= 1, a >= 0 and p + a > 1",
            )?,
            Self::Tabulated(_) => {}
        }
        Ok(self)
    }

    /// Largest argument accepted by `eval`, if bounded.
    pub fn domain_max(&self) -> Option<f64> {
        match self {
            Self::Tabulated(t) => Some(t.t_max()),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            Self::Power { p } => t.powf(p),
            Self::PowerSum { p, q } => t.powf(p) + t.powf(q),
            Self::Zygmund { p, q, r } => t.powf(p) * t.powf(r).ln_1p().powf(q),
            Self::IterLog { p, a, b } => {
                let l1 = t.ln_1p();
                t.powf(p) * l1.powf(a) * l1.ln_1p().powf(b)
            }
            Self::PowerLogIntegral { p, a } => power_log_integral(p, a, t),
            Self::Tabulated(ref table) => table.log_eval(t)?.0.exp(),
        })
    }

    /// The density `a = A'`.
    pub fn density(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        if t == 0.0 {
            return Ok(match *self {
                Self::Power { p } if p == 1.0 => 1.0,
                _ => 0.0,
            });
        }
        Ok(match *self {
            Self::Power { p } => p * t.powf(p - 1.0),
            Self::PowerSum { p, q } => p * t.powf(p - 1.0) + q * t.powf(q - 1.0),
            Self::Zygmund { p, q, r } => {
                let tr = t.powf(r);
                let l = tr.ln_1p();
                let mut d = p * t.powf(p - 1.0) * l.powf(q);
                if q != 0.0 {
                    d += q * t.powf(p) * l.powf(q - 1.0) * r * tr / (t * (1.0 + tr));
                }
                d
            }
            Self::IterLog { p, a, b } => {
                let l1 = t.ln_1p();
                let l2 = l1.ln_1p();
                let value = t.powf(p) * l1.powf(a) * l2.powf(b);
                let mut log_deriv = p / t;
                if a != 0.0 {
                    log_deriv += a / (l1 * (1.0 + t));
                }
                if b != 0.0 {
                    log_deriv += b / (l2 * (1.0 + l1) * (1.0 + t));
                }
                value * log_deriv
            }
            Self::PowerLogIntegral { p, a } => t.powf(p - 1.0) * t.ln_1p().powf(a),
            Self::Tabulated(ref table) => {
                let (la, slope) = table.log_eval(t)?;
                la.exp() * slope / t
            }
        })
    }

    /// `A⁻¹(y)` by bracketing bisection.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("inverse needs a finite y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.5, 1.0);
        if self.eval(hi)? < y {
            loop {
                lo = hi;
                hi *= 2.0;
                if let Some(max) = self.domain_max() {
                    if hi >= max {
                        hi = max;
                        if self.eval(hi)? < y {
                            return Err(Error::Extrapolation { t: hi, max });
                        }
                        break;
                    }
                }
                let v = self.eval(hi)?;
                if !v.is_finite() || v >= y {
                    break;
                }
                if hi > 1e300 {
                    return Err(Error::Numeric(format!("cannot bracket A^-1({y})")));
                }
            }
        } else {
            while lo > 0.0 && self.eval(lo)? > y {
                hi = lo;
                lo *= 0.5;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval(mid)?;
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (vl, vh) = (self.eval(lo)?, self.eval(hi)?);
        Ok(if (vl - y).abs() <= (vh - y).abs() { lo } else { hi })
    }

    /// Numeric conjugate `Â(t) = sup_w (tw − A(w))`, tabulated on a log grid.
    ///
    /// A sweep over a log-spaced `w` grid brackets the maximiser (the argmax
    /// is nondecreasing in `t`), then a golden-section search refines it.
    pub fn conjugate(&self) -> Result<YoungFunction> {
        let (w_lo, w_hi) = self.search_range()?;
        const W_POINTS: usize = 8192;
        let (lw_lo, lw_hi) = (w_lo.ln(), w_hi.ln());
        let dw = (lw_hi - lw_lo) / (W_POINTS - 1) as f64;
        let ws: Vec<f64> = (0..W_POINTS).map(|j| (lw_lo + dw * j as f64).exp()).collect();
        let aw: Vec<f64> = ws.iter().map(|&w| self.eval(w)).collect::<Result<_>>()?;

        // Tabulated sources only define a(w) on their table: trim the t range
        // to the image of the density there.
        let (mut t_lo, mut t_hi) = (SCAN_MIN, SCAN_MAX);
        if matches!(self, Self::Tabulated(_)) {
            t_lo = t_lo.max(self.density(w_lo)? * 1.001);
            t_hi = t_hi.min(self.density(w_hi)? * 0.999);
            if !(t_hi > t_lo) {
                return Err(Error::Range { t: t_lo });
            }
        }
        let (lt_lo, lt_hi) = (t_lo.ln(), t_hi.ln());
        let dt = (lt_hi - lt_lo) / (CONJUGATE_POINTS - 1) as f64;
        let ts: Vec<f64> = (0..CONJUGATE_POINTS).map(|j| (lt_lo + dt * j as f64).exp()).collect();

        let mut values = Vec::with_capacity(ts.len());
        let mut j = 0usize;
        for &t in &ts {
            let phi = |k: usize| t * ws[k] - aw[k];
            while j + 1 < W_POINTS && phi(j + 1) >= phi(j) {
                j += 1;
            }
            if j == 0 || j + 1 == W_POINTS {
                return Err(Error::Range { t });
            }
            let (a, b) = (ws[j - 1].ln(), ws[j + 1].ln());
            let value = golden_max(a, b, |lw| {
                let w = lw.exp();
                self.eval(w).map(|v| t * w - v).unwrap_or(f64::NEG_INFINITY)
            });
            values.push(value.max(phi(j)));
        }
        // Enforce strict monotonicity against roundoff at the bottom of the table.
        for k in 1..values.len() {
            if values[k] <= values[k - 1] {
                values[k] = values[k - 1] * (1.0 + 1e-15);
            }
        }
        YoungFunction::tabulated(&ts, &values)
    }

    /// Range of `w` that covers the maximisers for every `t` in the conjugate grid.
    fn search_range(&self) -> Result<(f64, f64)> {
        if let Self::Tabulated(table) = self {
            return Ok((table.t_min(), table.t_max()));
        }
        let mut lo = 1.0;
        while self.density(lo)? > SCAN_MIN / 10.0 {
            lo *= 0.1;
            if lo < 1e-300 {
                return Err(Error::Range { t: SCAN_MIN });
            }
        }
        let mut hi = 1.0;
        loop {
            let a = self.density(hi)?;
            let v = self.eval(hi)?;
            if !a.is_finite() || !v.is_finite() {
                return Err(Error::Range { t: SCAN_MAX });
            }
            if a > SCAN_MAX * 10.0 {
                break;
            }
            hi *= 10.0;
        }
        Ok((lo, hi))
    }

    /// Scan `t a(t) / A(t)` on a log grid over [1e-8, 1e8].
    pub fn delta2_indices(&self) -> Result<GrowthIndices> {
        let hi = self.domain_max().map_or(SCAN_MAX, |m| m.min(SCAN_MAX));
        let (l0, l1) = (SCAN_MIN.ln(), hi.ln());
        let mut p_minus = f64::INFINITY;
        let mut p_plus = 0.0f64;
        for j in 0..INDEX_SCAN_POINTS {
            let t = (l0 + (l1 - l0) * j as f64 / (INDEX_SCAN_POINTS - 1) as f64).exp();
            let ratio = t * self.density(t)? / self.eval(t)?;
            if !ratio.is_finite() {
                return Err(Error::Numeric(format!("index ratio not finite at t = {t}")));
            }
            p_minus = p_minus.min(ratio);
            p_plus = p_plus.max(ratio);
        }
        Ok(GrowthIndices {
            p_minus,
            p_plus,
            a_delta2: p_plus.is_finite(),
            conjugate_delta2: p_minus > 1.0,
        })
    }
}

fn check_arg(t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Young functions take t >= 0, got {t}")))
    }
}

/// Maximise a unimodal function on [a, b] by golden-section search.
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    fc.max(fd)
}

/// `∫₀ᵗ s^{p-1} log^a(1+s) ds` on geometric panels toward the origin.
fn power_log_integral(p: f64, a: f64, t: f64) -> f64 {
    let rule = gl8();
    let f = |s: f64| s.powf(p - 1.0) * s.ln_1p().powf(a);
    let mut total = 0.0;
    let mut right = t;
    for _ in 0..200 {
        let left = 0.5 * right;
        let piece = integrate_with(rule, left, right, f);
        total += piece;
        right = left;
        if piece <= total * 1e-18 {
            break;
        }
    }
    // Remainder on [0, right] from the leading term s^{p+a-1}.
    total + right.powf(p + a) / (p + a)
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { p } => write!(f, "power:p={p}"),
            Self::PowerSum { p, q } => write!(f, "powersum:p={p},q={q}"),
            Self::Zygmund { p, q, r } => write!(f, "zygmund:p={p},q={q},r={r}"),
            Self::IterLog { p, a, b } => write!(f, "iterlog:p={p},a={a},b={b}"),
            Self::PowerLogIntegral { p, a } => write!(f, "plogint:p={p},a={a}"),
            Self::Tabulated(t) => write!(f, "tabulated:points={},t_max={:e}", t.log_t.len(), t.t_max()),
        }
    }
}

impl FromStr for YoungFunction {
    type Err = Error;

    /// Parses names such as `power:p=2` or `zygmund:p=2,q=1,r=1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed parameter '{item}' in '{s}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("parameter '{k}' is not a number in '{s}'")))?;
            params.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, default: Option<f64>| {
            params
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| Error::Config(format!("missing parameter '{k}' in '{s}'")))
        };
        let known: &[&str] = match kind.trim() {
            "power" => &["p"],
            "powersum" => &["p", "q"],
            "zygmund" => &["p", "q", "r"],
            "iterlog" => &["p", "a", "b"],
            "plogint" => &["p", "a"],
            other => return Err(Error::Config(format!("unknown Young function kind '{other}'"))),
        };
        if let Some(extra) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("unexpected parameter '{extra}' in '{s}'")));
        }
        let f = match kind.trim() {
            "power" => Self::Power { p: get("p", None)? },
            "powersum" => Self::PowerSum { p: get("p", None)?, q: get("q", None)? },
            "zygmund" => Self::Zygmund { p: get("p", None)?, q: get("q", Some(1.0))?, r: get("r", Some(1.0))? },
            "iterlog" => Self::IterLog { p: get("p", None)?, a: get("a", Some(1.0))?, b: get("b", Some(1.0))? },
            _ => Self::PowerLogIntegral { p: get("p", None)?, a: get("a", Some(1.0))? },
        };
        f.validated().map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn closed_form_values() {
        let p2 = YoungFunction::power(2.0).unwrap();
        assert_eq!(p2.eval(3.0).unwrap(), 9.0);
        assert_eq!(p2.density(3.0).unwrap(), 6.0);
        assert!(close(p2.inverse(9.0).unwrap(), 3.0, 1e-14));
        let z = YoungFunction::zygmund(2.0, 1.0, 1.0).unwrap();
        assert!(close(z.eval(1.0).unwrap(), 2f64.ln(), 1e-15));
        assert!(close(z.density(1.0).unwrap(), 2.0 * 2f64.ln() + 0.5, 1e-14));
        assert!(close(z.inverse(2f64.ln()).unwrap(), 1.0, 1e-13));
        assert_eq!(YoungFunction::power(3.0).unwrap().density(0.0).unwrap(), 0.0);
    }

    #[test]
    fn every_kind_vanishes_at_zero_and_rejects_negative_arguments() {
        for name in ["power:p=2", "powersum:p=2,q=4", "zygmund:p=2,q=1,r=1", "iterlog:p=2,a=1,b=1", "plogint:p=2,a=1"] {
            let a: YoungFunction = name.parse().unwrap();
            assert_eq!(a.eval(0.0).unwrap(), 0.0, "{name}");
            assert_eq!(a.inverse(0.0).unwrap(), 0.0, "{name}");
            assert!(matches!(a.eval(-1.0), Err(Error::Domain(_))));
            assert!(matches!(a.inverse(-1.0), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn analytic_densities_match_finite_differences() {
        for name in ["powersum:p=2,q=4", "zygmund:p=2,q=1,r=1", "zygmund:p=1.5,q=2,r=0.5", "iterlog:p=2,a=1,b=1", "plogint:p=2,a=1", "plogint:p=1.5,a=0.5"] {
            let a: YoungFunction = name.parse().unwrap();
            for &t in &[1e-3, 0.1, 0.7, 1.0, 3.0, 40.0, 1e4] {
                let h = t * 1e-5;
                let fd = (a.eval(t + h).unwrap() - a.eval(t - h).unwrap()) / (2.0 * h);
                let d = a.density(t).unwrap();
                assert!((d - fd).abs() <= 1e-7 * d, "{name} at {t}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn power_log_integral_matches_closed_form_for_a_equal_one() {
        // ∫₀ᵗ s log(1+s) ds = ((t²-1) log(1+t))/2 - t²/4 + t/2
        let a: YoungFunction = "plogint:p=2,a=1".parse().unwrap();
        for &t in &[1e-4f64, 0.01, 0.5, 2.0, 100.0, 1e5] {
            let want = 0.5 * (t * t - 1.0) * t.ln_1p() - 0.25 * t * t + 0.5 * t;
            let want = if t < 1e-2 { t.powi(3) / 3.0 - t.powi(4) / 8.0 + t.powi(5) / 15.0 } else { want };
            assert!((a.eval(t).unwrap() - want).abs() <= 1e-10 * want, "t={t}");
        }
    }

    #[test]
    fn conjugate_of_powers() {
        let c2 = YoungFunction::power(2.0).unwrap().conjugate().unwrap();
        assert!(close(c2.eval(2.0).unwrap(), 1.0, 1e-9));
        let c3 = YoungFunction::power(3.0).unwrap().conjugate().unwrap();
        assert!(close(c3.eval(3.0).unwrap(), 2.0, 1e-9));
        assert_eq!(c3.eval(0.0).unwrap(), 0.0);
        assert!(matches!(c3.eval(1e9), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn conjugate_matches_brute_force_supremum() {
        let a: YoungFunction = "zygmund:p=2,q=1,r=1".parse().unwrap();
        let c = a.conjugate().unwrap();
        for &t in &[0.01, 0.3, 1.0, 5.0, 70.0] {
            // Dense brute-force sup over a log w grid.
            let mut best: f64 = 0.0;
            for j in 0..200_000 {
                let w = (-12.0 + 24.0 * j as f64 / 199_999.0f64).exp();
                best = best.max(t * w - a.eval(w).unwrap());
            }
            assert!(close(c.eval(t).unwrap(), best, 1e-6), "t={t}: {} vs {best}", c.eval(t).unwrap());
        }
    }

    #[test]
    fn index_scans() {
        let g = YoungFunction::power(2.5).unwrap().delta2_indices().unwrap();
        assert!(close(g.p_minus, 2.5, 1e-12) && close(g.p_plus, 2.5, 1e-12));
        let g = "powersum:p=2,q=4".parse::<YoungFunction>().unwrap().delta2_indices().unwrap();
        assert!(close(g.p_minus, 2.0, 1e-6) && close(g.p_plus, 4.0, 1e-6));
        assert!(g.a_delta2 && g.conjugate_delta2);
    }

    #[test]
    fn names_round_trip_and_bad_names_are_config_errors() {
        for name in ["power:p=2", "powersum:p=2,q=4", "zygmund:p=2,q=1,r=1", "iterlog:p=2,a=1,b=1", "plogint:p=2,a=1"] {
            let a: YoungFunction = name.parse().unwrap();
            assert_eq!(a.to_string(), name);
        }
        for bad in ["power", "power:p=1", "cosh:p=2", "power:p=x", "power:p=2,z=1"] {
            assert!(matches!(bad.parse::<YoungFunction>(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn tabulated_rejects_non_monotone_tables() {
        assert!(YoungFunction::tabulated(&[1.0, 2.0, 3.0], &[1.0, 0.5, 2.0]).is_err());
        let t = YoungFunction::tabulated(&[1.0, 2.0, 4.0, 8.0], &[1.0, 4.0, 16.0, 64.0]).unwrap();
        assert!(close(t.eval(3.0).unwrap(), 9.0, 1e-12));
        assert!(close(t.eval(0.5).unwrap(), 0.25, 1e-12));
    }
}
