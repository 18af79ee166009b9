//! Bessel kernels `G_s = ℱ⁻¹(1+|ξ|²)^{-s/2}`, potentials and their inverse,
//! the truncated gradient operators `T_i`, the first-order inversion formula,
//! the L¹ modulus of continuity and the increment-kernel operator.
//!
//! Point values of `G_s` come from the heat-kernel mixture
//!
//! ```text
//! G_s(x) = 1/((4π)^{n/2} Γ(s/2)) ∫ exp(((s-n)/2)τ - e^τ - |x|² e^{-τ}/4) dτ
//! ```
//!
//! (the substitution `δ = e^τ` in the subordination integral), which the
//! trapezoid rule resolves to machine precision because the integrand decays
//! doubly exponentially on both sides.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::{Field, Grid, ProductField, PRODUCT_SIZE_LIMIT};
use crate::orlicz::{luxemburg_norm, NormResult};
use crate::young::YoungFunction;

/// `(1 + |ξ|²)^{-s/2}`.
pub fn bessel_symbol(s: f64, xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).powf(-0.5 * s)
}

const TAU_STEP: f64 = 0.1;
const TAU_DROP: f64 = 46.0;
/// Periodic images farther than this contribute below e^{-60}.
const IMAGE_CUTOFF: f64 = 60.0;

/// `∫ exp(c τ − e^τ − r² e^{−τ}/4) dτ` for `r > 0` by the trapezoid rule.
fn mixture_integral(c: f64, r: f64) -> f64 {
    let q = 0.25 * r * r;
    let root = (c * c + r * r).sqrt();
    let y = if c >= 0.0 { 0.5 * (c + root) } else { 0.5 * r * r / (root - c) };
    let t0 = y.ln();
    let exponent = |t: f64| c * t - t.exp() - q * (-t).exp();
    let peak = exponent(t0);
    let mut sum = 1.0;
    for dir in [-1.0, 1.0] {
        let mut k = 1.0;
        loop {
            let e = exponent(t0 + dir * k * TAU_STEP) - peak;
            sum += e.exp();
            if e < -TAU_DROP {
                break;
            }
            k += 1.0;
        }
    }
    sum * TAU_STEP * peak.exp()
}

/// Pointwise `G_s(x)` at `|x| = r > 0` in dimension `n`, for `s > 0`.
pub fn kernel_value(s: f64, n: usize, r: f64) -> f64 {
    let nf = n as f64;
    mixture_integral(0.5 * (s - nf), r) / ((4.0 * std::f64::consts::PI).powf(0.5 * nf) * gamma(0.5 * s))
}

/// Radial derivative `dG_s/dr` at `r > 0`.
pub fn kernel_radial_derivative(s: f64, n: usize, r: f64) -> f64 {
    let nf = n as f64;
    -0.5 * r * mixture_integral(0.5 * (s - nf) - 1.0, r) / ((4.0 * std::f64::consts::PI).powf(0.5 * nf) * gamma(0.5 * s))
}

/// Evaluate a periodised radial quantity at every grid point, sharing work
/// between points related by axis reflections and permutations.
fn periodised(grid: &Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    let half = grid.size / 2;
    let key_of = |i: usize| {
        let idx = grid.multi(i);
        let mut k = [0usize; 3];
        for a in 0..grid.n {
            k[a] = idx[a].abs_diff(half);
        }
        k[..grid.n].sort_unstable();
        k
    };
    let mut keys = BTreeMap::new();
    for i in 0..grid.len() {
        keys.entry(key_of(i)).or_insert(0.0);
    }
    let h = grid.spacing();
    let period = 2.0 * grid.half_extent;
    let list: Vec<[usize; 3]> = keys.keys().copied().collect();
    let values: Vec<f64> = list
        .par_iter()
        .map(|k| {
            let x: Vec<f64> = k[..grid.n].iter().map(|&j| j as f64 * h).collect();
            let mut total = 0.0;
            let images = 3usize.pow(grid.n as u32);
            let mut y = [0.0; 3];
            for m in 0..images {
                let mut code = m;
                for a in 0..grid.n {
                    let shift = (code % 3) as f64 - 1.0;
                    code /= 3;
                    y[a] = x[a] + shift * period;
                }
                if y[..grid.n].iter().map(|v| v * v).sum::<f64>().sqrt() < IMAGE_CUTOFF || m == images / 2 {
                    total += f(&y[..grid.n]);
                }
            }
            total
        })
        .collect();
    for (k, v) in list.iter().zip(values) {
        keys.insert(*k, v);
    }
    (0..grid.len()).map(|i| keys[&key_of(i)]).collect()
}

/// Point samples of the periodised `G_s` with the origin cell chosen so the
/// discrete mass is exactly one.
fn point_samples(s: f64, grid: &Grid) -> Field {
    let n = grid.n;
    let mut samples = periodised(grid, |y| {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            0.0
        } else {
            kernel_value(s, n, r)
        }
    });
    let o = grid.origin();
    samples[o] = 0.0;
    let hn = grid.cell_volume();
    let rest: f64 = samples.iter().sum::<f64>() * hn;
    samples[o] = (1.0 - rest) / hn;
    Field::from_raw(*grid, samples)
}

/// Sampled Bessel kernel with two views.
///
/// `samples` are point values of `G_s` (periodised, mass-consistent origin
/// cell). `spectral_samples` are the band-limited grid kernel whose discrete
/// transform is exactly the symbol; it is what [`potential`] applies.
#[derive(Clone, Debug)]
pub struct BesselKernel {
    order: f64,
    grid: Grid,
    samples: Field,
    spectral: Field,
}

impl BesselKernel {
    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &Field {
        &self.samples
    }

    pub fn spectral_samples(&self) -> &Field {
        &self.spectral
    }

    pub fn symbol(&self, xi: &[f64]) -> f64 {
        bessel_symbol(self.order, xi)
    }
}

/// Synthesize `G_s` on `grid`. Negative orders give a symbol-only kernel whose
/// samples are the band-limited ones.
pub fn synthesize_kernel(s: f64, grid: Grid) -> Result<BesselKernel> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Domain(format!("kernel order must be finite and nonzero, got {s}")));
    }
    let spectral = bessel_potential(s, &Field::delta(grid))?;
    let samples = if s > 0.0 { point_samples(s, &grid) } else { spectral.clone() };
    Ok(BesselKernel { order: s, grid, samples, spectral })
}

/// `G_s ∗ f` by spectral multiplication.
pub fn bessel_potential(s: f64, f: &Field) -> Result<Field> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    f.spectral_multiply(|xi| bessel_symbol(s, xi))
}

pub fn potential(kernel: &BesselKernel, f: &Field) -> Result<Field> {
    if kernel.order <= 0.0 {
        return Err(Error::Domain("potentials need a positive order".into()));
    }
    if f.grid() != &kernel.grid {
        return Err(Error::GridMismatch("kernel and density live on different grids".into()));
    }
    bessel_potential(kernel.order, f)
}

/// `G_{-s} u`: multiply the spectrum by `(1+|ξ|²)^{s/2}`.
pub fn bessel_inverse(s: f64, u: &Field) -> Result<Field> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    let f = u
        .spectral_multiply(|xi| bessel_symbol(-s, xi))
        .map_err(|_| Error::Conditioning("inverse potential is not finite".into()))?;
    if f.samples().iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning("inverse potential is not finite".into()));
    }
    Ok(f)
}

/// `‖u‖_{H^{s,A}} = ‖G_{-s}u‖_{L^A}`.
pub fn hs_norm(a: &YoungFunction, s: f64, u: &Field) -> Result<NormResult> {
    luxemburg_norm(a, &bessel_inverse(s, u)?)
}

/// `∫ |G_s(x+h) − G_s(x)| dx` for a grid-aligned shift `h`.
pub fn l1_modulus(kernel: &BesselKernel, shift: &[f64]) -> Result<f64> {
    let g = kernel.grid;
    if shift.len() != g.n {
        return Err(Error::Domain("shift dimension does not match the grid".into()));
    }
    let h = g.spacing();
    let mut cells = Vec::with_capacity(g.n);
    for &v in shift {
        let c = (v / h).round();
        if (v / h - c).abs() > 1e-9 {
            return Err(Error::Domain(format!("shift {v} is not a multiple of the spacing {h}")));
        }
        cells.push(c as isize);
    }
    modulus_cells(kernel, &cells)
}

fn modulus_cells(kernel: &BesselKernel, cells: &[isize]) -> Result<f64> {
    let moved = kernel.samples.shifted(cells);
    Ok(moved.zip_with(&kernel.samples, |a, b| (a - b).abs())?.integrate())
}

/// Least-squares slope of `log w(|h|)` against `log |h|` for shifts of
/// `j_lo ..= j_hi` cells along the first axis, sampled at half-octave steps.
pub fn modulus_slope(kernel: &BesselKernel, j_lo: usize, j_hi: usize) -> Result<f64> {
    let h = kernel.grid.spacing();
    let mut pts = Vec::new();
    let mut k = 0;
    loop {
        let j = ((j_lo as f64) * 2f64.powf(0.5 * k as f64)).round() as usize;
        if j > j_hi {
            break;
        }
        let mut cells = vec![0isize; kernel.grid.n];
        cells[0] = j as isize;
        pts.push(((j as f64 * h).ln(), modulus_cells(kernel, &cells)?.ln()));
        k += 1;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    Ok(num / den)
}

/// `sup w(h)(1−s)/|h|^s` over shifts `|h| ≤ 1` along the first axis: the
/// empirical modulus constant.
pub fn modulus_constant(kernel: &BesselKernel) -> Result<f64> {
    let s = kernel.order;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain("the modulus constant needs 0 < s < 1".into()));
    }
    let h = kernel.grid.spacing();
    let jmax = ((1.0 / h).floor() as usize).min(kernel.grid.size / 2).max(1);
    let mut best: f64 = 0.0;
    let mut j = 1usize;
    while j <= jmax {
        let mut cells = vec![0isize; kernel.grid.n];
        cells[0] = j as isize;
        let r = j as f64 * h;
        best = best.max(modulus_cells(kernel, &cells)? * (1.0 - s) / r.powf(s));
        j = (j + 1).max((j as f64 * 1.05) as usize);
    }
    Ok(best)
}

/// Samples of `D_i G_1` set to zero on `|x| ≤ eps`.
fn truncated_gradient_kernel(axis: usize, eps: f64, grid: &Grid) -> Field {
    let n = grid.n;
    let period = 2.0 * grid.half_extent;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            let r0 = p[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            if r0 <= eps {
                return 0.0;
            }
            let idx = grid.multi(i);
            if idx[axis] == 0 {
                // The x_i = -L plane is its own mirror image: the odd kernel vanishes there.
                return 0.0;
            }
            let mut total = 0.0;
            let images = 3usize.pow(n as u32);
            for m in 0..images {
                let mut code = m;
                let mut y = [0.0; 3];
                for a in 0..n {
                    y[a] = p[a] + ((code % 3) as f64 - 1.0) * period;
                    code /= 3;
                }
                let r = y[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
                if m == images / 2 || r < IMAGE_CUTOFF {
                    total += kernel_radial_derivative(1.0, n, r) * y[axis] / r;
                }
            }
            total
        })
        .collect();
    Field::from_raw(*grid, values)
}

/// Truncated singular operator `T_i^ε u = ∫_{|y|>ε} D_iG_1(y) u(x−y) dy`.
pub fn singular_gradient_apply(axis: usize, eps: f64, u: &Field) -> Result<Field> {
    let g = u.grid();
    if axis >= g.n {
        return Err(Error::Domain(format!("axis {axis} out of range")));
    }
    if !(eps >= 2.0 * g.spacing() * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!("truncation radius {eps} is below two grid spacings")));
    }
    truncated_gradient_kernel(axis, eps, g).convolve(u)
}

/// Truncation radius actually realised by excluding `|x_j| ≤ eps`: on a
/// one-dimensional grid the excluded cells end half a cell past the last
/// excluded point.
fn effective_radius(eps: f64, grid: &Grid) -> f64 {
    if grid.n == 1 {
        let h = grid.spacing();
        ((eps / h + 1e-9).floor() + 0.5) * h
    } else {
        eps
    }
}

/// Principal value `T_i u` from the truncations at `eps` and `eps/2`,
/// extrapolated linearly in the truncation radius.
pub fn singular_gradient_extrapolated(axis: usize, eps: f64, u: &Field) -> Result<Field> {
    let g = *u.grid();
    let (e1, e2) = (effective_radius(eps, &g), effective_radius(0.5 * eps, &g));
    let t1 = singular_gradient_apply(axis, eps, u)?;
    let t2 = singular_gradient_apply(axis, 0.5 * eps, u)?;
    t2.zip_with(&t1, |b, a| (e1 * b - e2 * a) / (e1 - e2))
}

/// Default outer truncation radius for [`calderon_inversion`].
pub fn default_truncation(grid: &Grid) -> f64 {
    4.5 * grid.spacing()
}

/// First-order inversion `G_{-1}u = G_1∗u − Σ_i T_i(D_i u)`.
///
/// Under `ℱu = ∫u e^{-ixξ}` the operator `T_i` has symbol
/// `iξ_i(1+|ξ|²)^{-1/2}`, so `Σ T_i D_i` contributes `−|ξ|²(1+|ξ|²)^{-1/2}`
/// and must be subtracted to produce `(1+|ξ|²)^{1/2}`.
pub fn calderon_inversion(u: &Field) -> Result<Field> {
    calderon_inversion_with(u, default_truncation(u.grid()))
}

pub fn calderon_inversion_with(u: &Field, eps: f64) -> Result<Field> {
    let mut out = bessel_potential(1.0, u)?;
    for axis in 0..u.grid().n {
        let mut orders = vec![0; u.grid().n];
        orders[axis] = 1;
        let du = u.derivative(&orders)?;
        out = out.sub(&singular_gradient_extrapolated(axis, eps, &du)?)?;
    }
    Ok(out)
}

/// Parameters of the increment-kernel operator
/// `(Tv)(z) = ∬ (G_α(z−x) − G_α(z−x+t)) |t|^{-γ} v(x,t) |t|^{-n} dx dt`.
#[derive(Clone, Copy, Debug)]
pub struct IncrementKernelConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Grid for `z` and `x`.
    pub grid: Grid,
    /// Grid for the increment `t`; must share the spacing of `grid`.
    pub t_grid: Grid,
}

impl IncrementKernelConfig {
    pub fn new(alpha: f64, gamma: f64, grid: Grid, t_grid: Grid) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0 && alpha > gamma) {
            return Err(Error::Hypothesis(format!("need alpha > gamma > 0 and gamma < 1, got ({alpha}, {gamma})")));
        }
        if grid.n != 1 || t_grid.n != 1 || grid.size > PRODUCT_SIZE_LIMIT || t_grid.size > PRODUCT_SIZE_LIMIT {
            return Err(Error::ResourceGuard(format!(
                "increment kernel runs with n = 1 and at most {PRODUCT_SIZE_LIMIT} points per axis"
            )));
        }
        if (grid.spacing() - t_grid.spacing()).abs() > 1e-12 * grid.spacing() {
            return Err(Error::Config("t grid must share the spacing of the x grid".into()));
        }
        Ok(IncrementKernelConfig { alpha, gamma, grid, t_grid })
    }
}

/// Apply the increment-kernel operator to `v(x, t)`.
pub fn increment_kernel_apply(cfg: &IncrementKernelConfig, v: &ProductField) -> Result<Field> {
    let cfg = IncrementKernelConfig::new(cfg.alpha, cfg.gamma, cfg.grid, cfg.t_grid)?;
    if v.grid_x() != &cfg.grid || v.grid_t() != &cfg.t_grid {
        return Err(Error::GridMismatch("product field does not match the operator grids".into()));
    }
    let kernel = synthesize_kernel(cfg.alpha, cfg.grid)?;
    let g = kernel.samples().samples();
    let nx = cfg.grid.size as isize;
    let origin = (cfg.grid.size / 2) as isize;
    let t_origin = (cfg.t_grid.size / 2) as isize;
    let weights: Vec<f64> = (0..cfg.t_grid.size)
        .map(|it| {
            let w = v.measure_weight(it);
            if w == 0.0 {
                0.0
            } else {
                w * cfg.t_grid.coordinate(it).abs().powf(-cfg.gamma)
            }
        })
        .collect();
    let at = |d: isize| g[(origin + d).rem_euclid(nx) as usize];
    let out: Vec<f64> = (0..cfg.grid.size)
        .into_par_iter()
        .map(|iz| {
            let mut acc = 0.0;
            for ix in 0..cfg.grid.size {
                let d = iz as isize - ix as isize;
                let base = at(d);
                for (it, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let vt = v.get(ix, it);
                    if vt == 0.0 {
                        continue;
                    }
                    acc += (base - at(d + it as isize - t_origin)) * w * vt;
                }
            }
            acc
        })
        .collect();
    Field::new(cfg.grid, out)
}

/// Complex symbol helper for `T_i`, useful for spectral cross-checks.
pub fn singular_gradient_symbol(axis: usize, xi: &[f64]) -> Complex64 {
    Complex64::new(0.0, xi[axis]) * bessel_symbol(1.0, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_reproduces_closed_forms() {
        // n = 1, s = 2: e^{-|x|}/2; n = 3, s = 2: e^{-r}/(4πr).
        for &r in &[1e-4f64, 0.01, 0.3, 1.0, 5.0, 20.0] {
            let want = 0.5 * (-r).exp();
            assert!((kernel_value(2.0, 1, r) - want).abs() < 1e-13 * want.max(1e-3), "r={r}");
            let want = (-r).exp() / (4.0 * std::f64::consts::PI * r);
            assert!((kernel_value(2.0, 3, r) / want - 1.0).abs() < 1e-12, "r={r}");
            let d = kernel_radial_derivative(2.0, 1, r);
            assert!((d + 0.5 * (-r).exp()).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn s2_kernel_off_origin() {
        let g = Grid::new(1, 4096, 32.0).unwrap();
        let k = synthesize_kernel(2.0, g).unwrap();
        let mut worst: f64 = 0.0;
        for (j, &v) in k.samples().samples().iter().enumerate() {
            if j != 2048 {
                let x = g.coordinate(j);
                worst = worst.max((v - 0.5 * (-x.abs()).exp()).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn kernel_invariants() {
        for (n, size, l) in [(1usize, 1024usize, 16.0), (2, 128, 8.0)] {
            let g = Grid::new(n, size, l).unwrap();
            for s in [0.3, 0.5, 1.0, 2.0] {
                let k = synthesize_kernel(s, g).unwrap();
                let smp = k.samples();
                assert!((smp.integrate() - 1.0).abs() < 5e-6, "mass n={n} s={s}");
                let o = g.origin();
                let mut prev = f64::INFINITY;
                for j in 0..size / 2 {
                    let mut cells = [0isize; 3];
                    cells[0] = j as isize;
                    let v = smp.samples()[g.offset(o, &cells[..n])];
                    let mirror = {
                        cells[0] = -(j as isize);
                        smp.samples()[g.offset(o, &cells[..n])]
                    };
                    assert!((v - mirror).abs() <= 1e-12 * v.abs().max(1.0));
                    assert!(v <= prev + 1e-10, "monotone n={n} s={s} j={j}");
                    prev = v;
                }
                let mut cells = [0isize; 3];
                cells[0] = (size / 4) as isize;
                assert!(smp.samples()[g.offset(o, &cells[..n])] < (-l / 4.0f64).exp());
            }
        }
    }

    #[test]
    fn potential_and_inverse() {
        let g = Grid::new(1, 1024, 16.0).unwrap();
        let k = synthesize_kernel(0.7, g).unwrap();
        let delta = Field::delta(g);
        assert!(potential(&k, &delta).unwrap().sub(k.spectral_samples()).unwrap().max_abs() < 1e-12);
        let back = bessel_inverse(0.7, k.spectral_samples()).unwrap();
        assert!(back.sub(&delta).unwrap().max_abs() < 1e-8 * delta.max_abs());
        let f = Field::from_fn(g, |x| (-(x[0] - 0.4).powi(2)).exp());
        let u = bessel_potential(0.5, &bessel_potential(0.3, &f).unwrap()).unwrap();
        assert!(u.sub(&bessel_potential(0.8, &f).unwrap()).unwrap().max_abs() < 1e-10);
        assert!(bessel_inverse(0.8, &u).unwrap().sub(&f).unwrap().max_abs() < 1e-10);
        assert!(matches!(synthesize_kernel(0.0, g), Err(Error::Domain(_))));
        let neg = synthesize_kernel(-1.0, g).unwrap();
        assert_eq!(neg.samples(), neg.spectral_samples());
    }

    #[test]
    fn spatial_and_spectral_paths_agree() {
        let g = Grid::new(1, 2048, 16.0).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let spectral = bessel_potential(2.0, &f).unwrap();
        let k = synthesize_kernel(2.0, g).unwrap();
        assert!(k.samples().convolve(&f).unwrap().sub(&spectral).unwrap().max_abs() < 1e-8);
        for s in [0.3, 1.0] {
            let k = synthesize_kernel(s, g).unwrap();
            let direct = k.spectral_samples().convolve(&f).unwrap();
            assert!(direct.sub(&bessel_potential(s, &f).unwrap()).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn modulus_properties() {
        let g = Grid::new(1, 4096, 8.0).unwrap();
        let k = synthesize_kernel(0.5, g).unwrap();
        assert_eq!(l1_modulus(&k, &[0.0]).unwrap(), 0.0);
        for j in [1, 7, 100, 2000] {
            assert!(l1_modulus(&k, &[j as f64 * g.spacing()]).unwrap() <= 2.0 + 1e-5);
        }
        assert!(l1_modulus(&k, &[0.3 * g.spacing()]).is_err());
        let c = modulus_constant(&k).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn truncated_gradient_symmetries() {
        let g = Grid::new(1, 4096, 32.0).unwrap();
        let eps = 4.5 * g.spacing();
        let even = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let t = singular_gradient_apply(0, eps, &even).unwrap();
        for j in 1..2048 {
            assert!((t.samples()[2048 + j] + t.samples()[2048 - j]).abs() < 1e-8);
        }
        let c = singular_gradient_apply(0, eps, &Field::constant(g, 1.0)).unwrap();
        assert!(c.max_abs() < 1e-8);
        assert!(singular_gradient_apply(0, g.spacing(), &even).is_err());
        // The extrapolated pair against the exact multiplier iξ(1+ξ²)^{-1/2}.
        let pv = singular_gradient_extrapolated(0, eps, &even).unwrap();
        let exact = even.spectral_multiply_complex(|xi| singular_gradient_symbol(0, xi)).unwrap();
        assert!(pv.sub(&exact).unwrap().l2_norm() < 5e-3);
    }

    #[test]
    fn first_order_inversion_recovers_density() {
        let g = Grid::new(1, 4096, 32.0).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] - 0.3).powi(2) / 0.5).exp());
        let u = bessel_potential(1.0, &f).unwrap();
        let rec = calderon_inversion(&u).unwrap();
        assert!(rec.sub(&f).unwrap().l2_norm() / f.l2_norm() < 1e-2);
        assert!(calderon_inversion(&Field::zeros(g)).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn increment_operator_factorises_for_separable_inputs() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        let cfg = IncrementKernelConfig::new(0.9, 0.5, g, g).unwrap();
        let phi = |x: f64| (-(x * x) * 2.0).exp();
        let chi = |t: f64| if t.abs() >= 1.0 && t.abs() <= 2.0 { 1.0 } else { 0.0 };
        let v = ProductField::from_fn(g, g, |x, t| phi(x[0]) * chi(t[0])).unwrap();
        let tv = increment_kernel_apply(&cfg, &v).unwrap();
        let k = synthesize_kernel(0.9, g).unwrap();
        let conv = k.samples().convolve(&Field::from_fn(g, |x| phi(x[0]))).unwrap();
        let h = g.spacing();
        let mut want = vec![0.0; 64];
        for (iz, w) in want.iter_mut().enumerate() {
            for it in 0..64 {
                let t = g.coordinate(it);
                if it == 32 || chi(t) == 0.0 {
                    continue;
                }
                let shifted = conv.samples()[(iz as isize + it as isize - 32).rem_euclid(64) as usize];
                *w += (conv.samples()[iz] - shifted) * t.abs().powf(-1.5) * h;
            }
        }
        for iz in 0..64 {
            assert!((tv.samples()[iz] - want[iz]).abs() < 1e-6, "{iz}");
        }
        assert!(IncrementKernelConfig::new(0.5, 0.5, g, g).is_err());
        let big = Grid::new(1, 256, 4.0).unwrap();
        assert!(matches!(IncrementKernelConfig::new(0.9, 0.5, big, big), Err(Error::ResourceGuard(_))));
    }
}
