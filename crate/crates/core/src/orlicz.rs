//! Orlicz modulars, Luxemburg norms and the Hölder pairing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::young::YoungFunction;

/// Relative bracket width at which the norm bisection stops.
pub const NORM_RTOL: f64 = 1e-8;
pub const NORM_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Modular of `u / value`; at most one.
    pub modular_at_value: f64,
    pub iterations: usize,
}

impl NormResult {
    pub fn zero() -> Self {
        NormResult { value: 0.0, modular_at_value: 0.0, iterations: 0 }
    }
}

/// `Φ_A(u) = ∫ A(|u|) dx`.
pub fn modular(a: &YoungFunction, u: &Field) -> Result<f64> {
    let mut sum = 0.0;
    for &v in u.samples() {
        sum += a.eval(v.abs())?;
    }
    let value = sum * u.grid().cell_volume();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numeric("modular overflowed".into()))
    }
}

/// Modular of `u / λ` where values past the table or the float range count as `+∞`.
pub(crate) fn scaled_modular(a: &YoungFunction, samples: &[f64], weight: f64, lambda: f64) -> Result<f64> {
    let inv = 1.0 / lambda;
    let mut sum = 0.0;
    for &v in samples {
        match a.eval(v.abs() * inv) {
            Ok(x) => sum += x,
            Err(Error::Extrapolation { .. }) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    let value = sum * weight;
    Ok(if value.is_nan() { f64::INFINITY } else { value })
}

/// Smallest `λ` with `modular(λ) ≤ 1`, for a nonincreasing `modular`.
///
/// `hint` seeds the upper end of the bracket; the lower end starts sixteen
/// decades below and both ends expand geometrically when needed.
pub fn luxemburg_from_modular(hint: f64, mut modular: impl FnMut(f64) -> Result<f64>) -> Result<NormResult> {
    if !(hint > 0.0 && hint.is_finite()) {
        return Err(Error::Bracket(format!("invalid starting scale {hint}")));
    }
    let mut hi = hint;
    let mut m_hi = modular(hi)?;
    let mut guard = 0;
    while m_hi > 1.0 {
        hi *= 2.0;
        m_hi = modular(hi)?;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::Bracket("modular stays above one".into()));
        }
    }
    let mut lo = hi * 1e-16;
    guard = 0;
    while modular(lo)? <= 1.0 {
        hi = lo;
        m_hi = modular(hi)?;
        lo *= 1e-16;
        guard += 1;
        if guard > 20 || lo == 0.0 {
            return Err(Error::Bracket("modular stays below one".into()));
        }
    }
    let mut iterations = 0;
    while hi / lo - 1.0 > NORM_RTOL && iterations < NORM_MAX_ITER {
        let mid = (lo * hi).sqrt();
        let m = modular(mid)?;
        if m <= 1.0 {
            hi = mid;
            m_hi = m;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(NormResult { value: hi, modular_at_value: m_hi, iterations })
}

/// Luxemburg norm `inf{λ > 0 : Φ_A(u/λ) ≤ 1}`.
pub fn luxemburg_norm(a: &YoungFunction, u: &Field) -> Result<NormResult> {
    luxemburg_of_samples(a, u.samples(), u.grid().cell_volume(), u.grid().box_volume())
}

/// Luxemburg norm of raw samples carrying a uniform quadrature weight.
pub(crate) fn luxemburg_of_samples(a: &YoungFunction, samples: &[f64], weight: f64, volume: f64) -> Result<NormResult> {
    let sup = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(NormResult::zero());
    }
    luxemburg_from_modular(sup * volume.max(1.0), |lambda| scaled_modular(a, samples, weight, lambda))
}

/// Luxemburg norm of samples carrying per-sample quadrature weights.
pub fn luxemburg_weighted(a: &YoungFunction, samples: &[f64], weights: &[f64]) -> Result<NormResult> {
    if samples.len() != weights.len() {
        return Err(Error::GridMismatch("one weight per sample is required".into()));
    }
    let sup = samples.iter().zip(weights).filter(|(_, w)| **w > 0.0).fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(NormResult::zero());
    }
    let total: f64 = weights.iter().sum();
    luxemburg_from_modular(sup * total.max(1.0), |lambda| {
        let mut sum = 0.0;
        for (v, w) in samples.iter().zip(weights) {
            if *w == 0.0 {
                continue;
            }
            match a.eval(v.abs() / lambda) {
                Ok(x) => sum += w * x,
                Err(Error::Extrapolation { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            }
        }
        Ok(if sum.is_nan() { f64::INFINITY } else { sum })
    })
}

/// `∫ |u w| dx`.
pub fn holder_pairing(u: &Field, w: &Field) -> Result<f64> {
    Ok(u.zip_with(w, |a, b| (a * b).abs())?.integrate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use std::f64::consts::PI;

    #[test]
    fn modular_examples() {
        let g = Grid::new(1, 4096, 16.0).unwrap();
        let p2 = YoungFunction::power(2.0).unwrap();
        assert_eq!(modular(&p2, &Field::zeros(g)).unwrap(), 0.0);
        let gauss = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        assert!((modular(&p2, &gauss).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-8);
        let c = Field::constant(g, -1.5);
        assert!((modular(&p2, &c).unwrap() - 2.25 * 32.0).abs() < 1e-10);
    }

    #[test]
    fn luxemburg_matches_lp_norm() {
        let g = Grid::new(1, 4096, 16.0).unwrap();
        let gauss = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        for p in [1.5, 2.0, 3.0] {
            let a = YoungFunction::power(p).unwrap();
            let want = (PI / p).sqrt().powf(1.0 / p);
            let got = luxemburg_norm(&a, &gauss).unwrap();
            assert!((got.value - want).abs() < 1e-7, "p={p}");
            assert!(got.modular_at_value <= 1.0 && got.modular_at_value >= 1.0 - 1e-6);
        }
        let z = luxemburg_norm(&YoungFunction::power(2.0).unwrap(), &Field::zeros(g)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn pairing_examples() {
        let g = Grid::new(1, 256, 4.0).unwrap();
        let u = Field::from_fn(g, |x| if x[0] < -1.0 { 1.0 } else { 0.0 });
        let w = Field::from_fn(g, |x| if x[0] > 1.0 { 1.0 } else { 0.0 });
        assert_eq!(holder_pairing(&u, &w).unwrap(), 0.0);
        assert_eq!(holder_pairing(&u, &Field::zeros(g)).unwrap(), 0.0);
        let other = Grid::new(1, 128, 4.0).unwrap();
        assert!(matches!(holder_pairing(&u, &Field::zeros(other)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn weighted_norm_matches_uniform_weights() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let gauss = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let a = YoungFunction::zygmund(2.0, 1.0, 1.0).unwrap();
        let plain = luxemburg_norm(&a, &gauss).unwrap().value;
        let weights = vec![g.cell_volume(); g.len()];
        let weighted = luxemburg_weighted(&a, gauss.samples(), &weights).unwrap().value;
        assert!((plain - weighted).abs() < 1e-12 * plain);
        assert!(luxemburg_weighted(&a, gauss.samples(), &weights[1..]).is_err());
    }
}
