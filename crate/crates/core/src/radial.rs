//! Radial profiles, convolution with balls and the decay ratio of radial
//! Bessel potentials.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_inverse;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::orlicz::luxemburg_norm;
use crate::quad::{gl16, integrate_with, unit_ball_volume};
use crate::young::YoungFunction;

/// `u₀` sampled on a uniform radial grid over `[0, r_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    n: usize,
    r_max: f64,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, r_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) || values.len() < 2 {
            return Err(Error::Config("profile needs r_max > 0 and at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("profile has non-finite samples".into()));
        }
        Ok(RadialProfile { n, r_max, values })
    }

    pub fn from_fn(n: usize, r_max: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let step = r_max / (count.max(2) - 1) as f64;
        Self::new(n, r_max, (0..count.max(2)).map(|j| f(j as f64 * step)).collect())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn step(&self) -> f64 {
        self.r_max / (self.values.len() - 1) as f64
    }

    /// Linear interpolation; zero beyond `r_max`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.r_max {
            return 0.0;
        }
        let pos = r / self.step();
        let j = (pos.floor() as usize).min(self.values.len() - 2);
        let w = pos - j as f64;
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }
}

/// Sample `u₀(|x|)` on the grid.
pub fn lift(p: &RadialProfile, grid: Grid) -> Result<Field> {
    if grid.n != p.n {
        return Err(Error::GridMismatch(format!("profile is {}-dimensional, grid is {}", p.n, grid.n)));
    }
    let reach = (grid.n as f64).sqrt() * grid.half_extent;
    if reach > p.r_max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("grid reaches radius {reach}, profile stops at {}", p.r_max)));
    }
    Field::new(grid, Field::from_fn(grid, |x| p.eval(x.iter().map(|v| v * v).sum::<f64>().sqrt())).into_samples())
}

/// Area of `{y ∈ S^{n−1} : x′·y ≥ t₀}`.
fn cap_area(n: usize, t0: f64) -> f64 {
    if t0 <= -1.0 {
        return n as f64 * unit_ball_volume(n);
    }
    if t0 >= 1.0 {
        return 0.0;
    }
    match n {
        2 => 2.0 * t0.acos(),
        3 => 2.0 * PI * (1.0 - t0),
        _ => {
            let sphere = (n - 1) as f64 * unit_ball_volume(n - 1);
            sphere * integrate_with(gl16(), 0.0, t0.acos(), |phi| phi.sin().powi(n as i32 - 2))
        }
    }
}

const PANELS: usize = 32;

fn panel_integral(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let width = (b - a) / PANELS as f64;
    (0..PANELS).map(|k| integrate_with(gl16(), a + k as f64 * width, a + (k + 1) as f64 * width, &f)).sum()
}

/// `(f ∗ χ_{B(0,R)})(x)` for radial `f`, reduced to a radial integral
/// weighted by the area of the spherical cap cut out by the ball.
pub fn ball_convolution(f: &RadialProfile, radius: f64, x: &[f64]) -> f64 {
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = f.n;
    if n == 1 {
        let (lo, hi) = (rho - radius, rho + radius);
        if lo < 0.0 {
            return panel_integral(0.0, -lo, |r| f.eval(r)) + panel_integral(0.0, hi, |r| f.eval(r));
        }
        return panel_integral(lo, hi, |r| f.eval(r));
    }
    let sphere = n as f64 * unit_ball_volume(n);
    let shell = |r: f64| f.eval(r) * r.powi(n as i32 - 1);
    if rho == 0.0 {
        return sphere * panel_integral(0.0, radius, shell);
    }
    let mut total = 0.0;
    if radius > rho {
        total += sphere * panel_integral(0.0, radius - rho, shell);
    }
    // r = a + (b − a)(1 − cos θ)/2 smooths the square-root behaviour of the cap at both ends
    let (a, b) = ((rho - radius).abs(), rho + radius);
    total += panel_integral(0.0, PI, |th| {
        let r = a + 0.5 * (b - a) * (1.0 - th.cos());
        if r == 0.0 {
            return 0.0;
        }
        let t0 = (r * r + rho * rho - radius * radius) / (2.0 * r * rho);
        shell(r) * cap_area(n, t0) * 0.5 * (b - a) * th.sin()
    });
    total
}

/// Right side of the ball-convolution decay bound without its constant:
/// `(R/ρ)^{n−1} / Â⁻¹(ρ^{1−n}/R) · ‖f‖_{L^A}`.
pub fn ball_bound(conjugate: &YoungFunction, n: usize, radius: f64, rho: f64, f_norm: f64) -> Result<f64> {
    let k = (n - 1) as f64;
    Ok((radius / rho).powf(k) / conjugate.inverse(rho.powf(-k) / radius)? * f_norm)
}

/// Decay envelope `ρ^{1−n} / Â⁻¹(ρ^{1−n})`.
pub fn decay_bound(conjugate: &YoungFunction, n: usize, rho: f64) -> Result<f64> {
    let y = rho.powf(1.0 - n as f64);
    Ok(y / conjugate.inverse(y)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraussRow {
    pub rho: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraussProfile {
    pub rows: Vec<StraussRow>,
    pub sup: f64,
    pub potential_norm: f64,
    /// Whether `s·p⁻ > 1` holds; the profile is computed either way.
    pub hypothesis_holds: bool,
}

impl StraussProfile {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "rho,abs_u,bound,ratio")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.rho, r.value, r.bound, r.ratio)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Ratio `|u(ρe₁)| / (ρ^{1−n}/Â⁻¹(ρ^{1−n}) · ‖u‖_{H^{s,A}})` at grid radii in `[2h, L/2]`.
pub fn strauss_ratio(a: &YoungFunction, s: f64, u: &Field) -> Result<StraussProfile> {
    let g = *u.grid();
    if g.n < 2 {
        return Err(Error::Domain("decay ratios need dimension at least 2".into()));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("order must be positive, got {s}")));
    }
    let p_minus = a.delta2_indices()?.p_minus;
    let conjugate = a.conjugate()?;
    let potential_norm = luxemburg_norm(a, &bessel_inverse(s, u)?)?.value;
    let h = g.spacing();
    let origin = g.size / 2;
    let steps: Vec<usize> = (2..=g.size / 4).filter(|&j| j as f64 * h <= 0.5 * g.half_extent + 1e-12).collect();
    let rows: Vec<StraussRow> = steps
        .par_iter()
        .map(|&j| {
            let rho = j as f64 * h;
            let mut idx = [origin; 3];
            idx[0] = origin + j;
            let value = u.samples()[g.flat(&idx[..g.n])].abs();
            let bound = decay_bound(&conjugate, g.n, rho)? * potential_norm;
            let ratio = if value == 0.0 { 0.0 } else { value / bound };
            Ok(StraussRow { rho, value, bound, ratio })
        })
        .collect::<Result<_>>()?;
    let sup = rows.iter().fold(0.0f64, |m, r| m.max(r.ratio));
    Ok(StraussProfile { rows, sup, potential_norm, hypothesis_holds: s * p_minus > 1.0 })
}

/// Least-squares slope of `log(envelope(ρ)·ρ^{(n−1)/p})` against `log ρ`;
/// zero when the envelope follows the `|x|^{−(n−1)/p}` law.
pub fn decay_envelope_slope(conjugate: &YoungFunction, n: usize, p: f64, rhos: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rhos
        .iter()
        .map(|&r| Ok((r.ln(), (decay_bound(conjugate, n, r)? * r.powf((n - 1) as f64 / p)).ln())))
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if den == 0.0 {
        return Err(Error::Config("slope needs at least two distinct radii".into()));
    }
    Ok(num / den)
}
