//! Fractional and first-order Orlicz–Sobolev modulars and norms.
//!
//! The Gagliardo modular `∬ A(|u(x+h) − u(x)|/|h|^s) dx dh/|h|^n` is
//! discretised by sampling the increment `h` on logarithmic rings between
//! `inner_cut` and `h_max`. Increments are exact spectral shifts, so `h`
//! need not be grid-aligned. The far region `|h| > h_max` is bounded, not
//! computed: by convexity it contributes at most `nω_n/s · Φ_A(2u/h_max^s)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::orlicz::{luxemburg_from_modular, luxemburg_norm, modular, scaled_modular, NormResult};
use crate::quad::gauss_legendre;
use crate::young::YoungFunction;

/// Cap on cached increment samples (ring samples × grid points).
pub const INCREMENT_CACHE_LIMIT: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GagliardoQuadrature {
    pub h_max: f64,
    pub ring_count: usize,
    pub inner_cut: f64,
}

impl GagliardoQuadrature {
    /// Inner cut at one grid spacing, outer radius `L/2`.
    pub fn for_grid(grid: &crate::field::Grid, ring_count: usize) -> Self {
        GagliardoQuadrature { h_max: 0.5 * grid.half_extent, ring_count, inner_cut: grid.spacing() }
    }

    fn validate(&self, grid: &crate::field::Grid) -> Result<()> {
        let h = grid.spacing();
        if self.ring_count == 0 || !(self.inner_cut >= h * (1.0 - 1e-12)) || !(self.h_max > self.inner_cut) || self.h_max > grid.half_extent {
            return Err(Error::Config(format!(
                "quadrature needs ring_count > 0 and h <= inner_cut < h_max <= L, got {self:?} with h = {h}"
            )));
        }
        Ok(())
    }

    /// Increment vectors and their weights: each sample stands for a share of
    /// `∫ dh/|h|^n` over its ring. Opposite increments give equal integrals,
    /// so only half of each sphere is sampled in one and two dimensions.
    pub fn samples(&self, n: usize) -> Vec<([f64; 3], f64)> {
        let ratio = (self.h_max / self.inner_cut).powf(1.0 / self.ring_count as f64);
        let log_ratio = ratio.ln();
        let directions = directions(n);
        let mut out = Vec::with_capacity(self.ring_count * directions.len());
        for j in 0..self.ring_count {
            let r = self.inner_cut * ratio.powf(j as f64 + 0.5);
            for (dir, w) in &directions {
                let mut h = [0.0; 3];
                for a in 0..n {
                    h[a] = r * dir[a];
                }
                out.push((h, w * log_ratio));
            }
        }
        out
    }

    /// Quadrature applied to a single Fourier mode `e^{ix·ξ}` with `A = t²`:
    /// `Σ w |e^{iξ·h} − 1|² / |h|^{2s}`.
    pub fn mode_response(&self, s: f64, xi: &[f64]) -> f64 {
        self.samples(xi.len())
            .iter()
            .map(|(h, w)| {
                let dot: f64 = xi.iter().zip(h).map(|(a, b)| a * b).sum();
                let r2: f64 = h[..xi.len()].iter().map(|v| v * v).sum();
                w * (2.0 - 2.0 * dot.cos()) / r2.powf(s)
            })
            .sum()
    }
}

/// Unit directions with solid-angle weights summing to `nω_n` (the surface
/// area of the unit sphere).
fn directions(n: usize) -> Vec<([f64; 3], f64)> {
    use std::f64::consts::PI;
    match n {
        1 => vec![([1.0, 0.0, 0.0], 2.0)],
        2 => {
            let d = 8;
            (0..d)
                .map(|k| {
                    let th = PI * (k as f64 + 0.5) / d as f64;
                    ([th.cos(), th.sin(), 0.0], 2.0 * PI / d as f64)
                })
                .collect()
        }
        _ => {
            let (z, wz) = gauss_legendre(4);
            let az = 8;
            let mut out = Vec::new();
            for (zi, wi) in z.iter().zip(&wz) {
                let rho = (1.0 - zi * zi).sqrt();
                for k in 0..az {
                    let ph = 2.0 * PI * (k as f64 + 0.5) / az as f64;
                    out.push(([rho * ph.cos(), rho * ph.sin(), *zi], wi * 2.0 * PI / az as f64));
                }
            }
            out
        }
    }
}

/// Gagliardo modular with the truncated far region reported separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularInterval {
    /// Quadrature over `inner_cut ≤ |h| ≤ h_max`.
    pub value: f64,
    /// Upper bound for the contribution of `|h| > h_max`.
    pub tail: f64,
}

impl ModularInterval {
    pub fn upper(&self) -> f64 {
        self.value + self.tail
    }
}

/// Scaled increments `|u(x+h) − u(x)| / |h|^s` for every quadrature sample.
struct Increments {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    cell: f64,
}

fn increments(s: f64, u: &Field, q: &GagliardoQuadrature) -> Result<Increments> {
    let g = *u.grid();
    q.validate(&g)?;
    let samples = q.samples(g.n);
    if samples.len().saturating_mul(g.len()) > INCREMENT_CACHE_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "{} increment samples on {} points exceed the cache limit",
            samples.len(),
            g.len()
        )));
    }
    let spectrum = u.dft();
    let values = samples
        .par_iter()
        .map(|(h, _)| {
            let r = h[..g.n].iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = r.powf(-s);
            let shifted = Field::multiply_dft(&g, &spectrum, |xi| {
                let dot: f64 = xi.iter().zip(h).map(|(a, b)| a * b).sum();
                Complex64::new(dot.cos() - 1.0, dot.sin())
            });
            Field::from_dft(g, shifted).into_samples().into_iter().map(|v| v.abs() * scale).collect()
        })
        .collect();
    Ok(Increments { weights: samples.iter().map(|s| s.1).collect(), values, cell: g.cell_volume() })
}

impl Increments {
    fn modular(&self, a: &YoungFunction, lambda: f64) -> Result<f64> {
        let mut total = 0.0;
        for (w, v) in self.weights.iter().zip(&self.values) {
            total += scaled_modular(a, v, self.cell * w, lambda)?;
            if total.is_infinite() {
                break;
            }
        }
        Ok(total)
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fractional order must lie in (0, 1), got {s}")))
    }
}

/// `Φ_{s,A}(u)` by log-ring quadrature plus the analytic far-region bound.
pub fn gagliardo_modular(a: &YoungFunction, s: f64, u: &Field, q: &GagliardoQuadrature) -> Result<ModularInterval> {
    check_order(s)?;
    let inc = increments(s, u, q)?;
    let value = inc.modular(a, 1.0)?;
    if !value.is_finite() {
        return Err(Error::Numeric("Gagliardo modular overflowed".into()));
    }
    let g = u.grid();
    let tail = g.n as f64 * g.omega() / s * modular(a, &u.scale(2.0 / q.h_max.powf(s)))?;
    Ok(ModularInterval { value, tail })
}

/// Luxemburg-type seminorm `inf{λ : Φ_{s,A}(u/λ) ≤ 1}` of the quadrature modular.
pub fn gagliardo_seminorm(a: &YoungFunction, s: f64, u: &Field, q: &GagliardoQuadrature) -> Result<NormResult> {
    check_order(s)?;
    let inc = increments(s, u, q)?;
    let sup = inc.values.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    if sup == 0.0 {
        return Ok(NormResult::zero());
    }
    let hint = sup * inc.weights.iter().sum::<f64>().max(1.0) * u.grid().box_volume().max(1.0);
    luxemburg_from_modular(hint, |lambda| inc.modular(a, lambda))
}

/// `‖ |∇u| ‖_{L^A}` with the spectral gradient.
pub fn w1_seminorm(a: &YoungFunction, u: &Field) -> Result<NormResult> {
    luxemburg_norm(a, &u.gradient_magnitude()?)
}

/// `‖u‖_{L^A} + [u]`, with the gradient seminorm at `s = 1`.
pub fn sobolev_norm(a: &YoungFunction, s: f64, u: &Field, q: &GagliardoQuadrature) -> Result<f64> {
    let base = luxemburg_norm(a, u)?.value;
    let semi = if s == 1.0 { w1_seminorm(a, u)? } else { gagliardo_seminorm(a, s, u, q)? };
    Ok(base + semi.value)
}
