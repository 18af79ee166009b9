//! Sampled functions on uniform periodic grids over `[-L, L)^n`.
//!
//! Fourier convention: `ℱu(ξ) = ∫ u(x) e^{-ix·ξ} dx`, inverse with `(2π)^{-n}`.
//! On the grid the frequencies are `πk/L`, `k = -N/2 .. N/2-1`, and the
//! origin sits at index `N/2` of every axis.

use std::cell::RefCell;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::unit_ball_volume;

/// Uniform periodic grid: `n` axes with `N` points each over `[-L, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(rename = "L")]
    pub half_extent: f64,
}

impl Grid {
    pub fn new(n: usize, size: usize, half_extent: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::Config(format!("points per axis must be a power of two >= 8, got {size}")));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::Config(format!("half-extent must be positive, got {half_extent}")));
        }
        Ok(Grid { n, size, half_extent })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_extent).powi(self.n as i32)
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of the unit ball in `R^n`.
    pub fn omega(&self) -> f64 {
        unit_ball_volume(self.n)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_extent + self.spacing() * j as f64
    }

    /// Signed frequency of DFT index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let kk = if k < self.size / 2 { k as f64 } else { k as f64 - self.size as f64 };
        std::f64::consts::PI * kk / self.half_extent
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.size).map(|k| self.frequency(k)).collect()
    }

    pub fn origin(&self) -> usize {
        self.flat(&[self.size / 2; 3][..self.n])
    }

    pub fn multi(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.size;
            flat /= self.size;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.n).fold(0, |acc, &i| acc * self.size + i)
    }

    /// Physical coordinates of a sample (unused axes are zero).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi(flat);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Index reached from `flat` after moving `cells[a]` steps along each axis, wrapping.
    pub fn offset(&self, flat: usize, cells: &[isize]) -> usize {
        let idx = self.multi(flat);
        let nn = self.size as isize;
        let mut out = [0usize; 3];
        for a in 0..self.n {
            out[a] = (idx[a] as isize + cells[a]).rem_euclid(nn) as usize;
        }
        self.flat(&out[..self.n])
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalised n-dimensional DFT over a row-major buffer.
pub(crate) fn fft_nd(buf: &mut [Complex64], grid: &Grid, direction: FftDirection) {
    let size = grid.size;
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(size, direction));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    let total = buf.len();
    let mut lines = Vec::new();
    for axis in 0..grid.n - 1 {
        let stride = size.pow((grid.n - 1 - axis) as u32);
        let block = size * stride;
        lines.resize(block, Complex64::new(0.0, 0.0));
        for start in (0..total).step_by(block) {
            let chunk = &mut buf[start..start + block];
            for inner in 0..stride {
                for k in 0..size {
                    lines[inner * size + k] = chunk[k * stride + inner];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for inner in 0..stride {
                for k in 0..size {
                    chunk[k * stride + inner] = lines[inner * size + k];
                }
            }
        }
    }
}

/// Real field sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} samples, got {}", grid.len(), samples.len())));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("sample {i} is not finite")));
        }
        Ok(Field { grid, samples })
    }

    pub(crate) fn from_raw(grid: Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Field { grid, samples }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field { grid, samples: vec![c; grid.len()] }
    }

    /// Discrete delta: `1/h^n` at the origin.
    pub fn delta(grid: Grid) -> Self {
        let mut f = Self::zeros(grid);
        f.samples[grid.origin()] = 1.0 / grid.cell_volume();
        f
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let samples = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)[..grid.n]))
            .collect();
        Field { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, samples: self.samples.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid, samples })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Midpoint rule `h^n Σ u`.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * self.samples.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Largest magnitude on the box faces (first and last index of any axis).
    pub fn boundary_max(&self) -> f64 {
        let last = self.grid.size - 1;
        (0..self.samples.len())
            .filter(|&i| self.grid.multi(i)[..self.grid.n].iter().any(|&j| j == 0 || j == last))
            .fold(0.0, |m, i| m.max(self.samples[i].abs()))
    }

    /// Sample at `x + cells·h`, periodically.
    pub fn shifted(&self, cells: &[isize]) -> Field {
        let samples = (0..self.samples.len()).map(|i| self.samples[self.grid.offset(i, cells)]).collect();
        Field { grid: self.grid, samples }
    }

    /// Raw DFT coefficients of the samples (no `h^n` factor).
    pub fn dft(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, &self.grid, FftDirection::Forward);
        buf
    }

    /// Inverse of [`Field::dft`], keeping the real part.
    pub fn from_dft(grid: Grid, mut coeffs: Vec<Complex64>) -> Field {
        fft_nd(&mut coeffs, &grid, FftDirection::Inverse);
        let norm = 1.0 / grid.len() as f64;
        Field { grid, samples: coeffs.iter().map(|c| c.re * norm).collect() }
    }

    /// Apply a complex multiplier to precomputed DFT coefficients.
    pub fn multiply_dft(grid: &Grid, coeffs: &[Complex64], symbol: impl Fn(&[f64]) -> Complex64 + Sync) -> Vec<Complex64> {
        let freqs = grid.frequencies();
        (0..coeffs.len())
            .into_par_iter()
            .map(|i| {
                let idx = grid.multi(i);
                let mut xi = [0.0; 3];
                for a in 0..grid.n {
                    xi[a] = freqs[idx[a]];
                }
                coeffs[i] * symbol(&xi[..grid.n])
            })
            .collect()
    }

    /// `ℱ⁻¹(m · ℱu)` for a complex multiplier `m`.
    pub fn spectral_multiply_complex(&self, symbol: impl Fn(&[f64]) -> Complex64 + Sync) -> Result<Field> {
        let out = Self::multiply_dft(&self.grid, &self.dft(), symbol);
        if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numeric("multiplier produced a non-finite value".into()));
        }
        Ok(Self::from_dft(self.grid, out))
    }

    /// `ℱ⁻¹(m · ℱu)` for a real multiplier `m`.
    pub fn spectral_multiply(&self, symbol: impl Fn(&[f64]) -> f64 + Sync) -> Result<Field> {
        self.spectral_multiply_complex(|xi| Complex64::new(symbol(xi), 0.0))
    }

    /// Spectral partial derivative `D^γ u`. The Nyquist mode is dropped for
    /// odd orders so the result stays real.
    pub fn derivative(&self, orders: &[u32]) -> Result<Field> {
        let nyquist = -std::f64::consts::PI * (self.grid.size / 2) as f64 / self.grid.half_extent;
        let orders: Vec<u32> = orders.to_vec();
        self.spectral_multiply_complex(move |xi| {
            let mut m = Complex64::new(1.0, 0.0);
            for (a, &k) in orders.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if k % 2 == 1 && xi[a] == nyquist {
                    return Complex64::new(0.0, 0.0);
                }
                m *= Complex64::new(0.0, xi[a]).powu(k);
            }
            m
        })
    }

    pub fn gradient(&self) -> Result<Vec<Field>> {
        (0..self.grid.n)
            .map(|a| {
                let mut orders = vec![0; self.grid.n];
                orders[a] = 1;
                self.derivative(&orders)
            })
            .collect()
    }

    /// Pointwise Euclidean magnitude of the gradient.
    pub fn gradient_magnitude(&self) -> Result<Field> {
        let grads = self.gradient()?;
        let samples = (0..self.samples.len())
            .map(|i| grads.iter().map(|g| g.samples[i] * g.samples[i]).sum::<f64>().sqrt())
            .collect();
        Ok(Field { grid: self.grid, samples })
    }

    /// Periodic convolution `h^n Σ_j u(x - y_j) v(y_j)`.
    pub fn convolve(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let a = self.dft();
        let b = other.dft();
        let g = self.grid;
        let hn = g.cell_volume();
        let prod: Vec<Complex64> = (0..a.len())
            .map(|i| {
                let parity: usize = g.multi(i)[..g.n].iter().sum();
                let sign = if parity % 2 == 0 { hn } else { -hn };
                a[i] * b[i] * sign
            })
            .collect();
        Ok(Self::from_dft(g, prod))
    }

    /// Centered discrete maximal function over the point itself and balls of
    /// radius `h·2^j`, `j = 0..log₂(N/2)`.
    pub fn maximal_function(&self) -> Field {
        let g = self.grid;
        let abs = self.map(f64::abs);
        let spectrum = abs.dft();
        let mut best = abs.samples.clone();
        let half = (g.size / 2) as isize;
        let mut radius = 1isize;
        while radius <= half {
            let reach = radius.min(half - 1);
            let mut ball = vec![Complex64::new(0.0, 0.0); g.len()];
            let mut count = 0usize;
            let r2 = radius * radius;
            let span = -reach..=reach;
            let mut visit = |m: [isize; 3]| {
                if m[..g.n].iter().map(|v| v * v).sum::<isize>() <= r2 {
                    let idx: Vec<usize> = m[..g.n].iter().map(|&v| v.rem_euclid(g.size as isize) as usize).collect();
                    ball[g.flat(&idx)] = Complex64::new(1.0, 0.0);
                    count += 1;
                }
            };
            match g.n {
                1 => span.clone().for_each(|a| visit([a, 0, 0])),
                2 => {
                    for a in span.clone() {
                        for b in span.clone() {
                            visit([a, b, 0]);
                        }
                    }
                }
                _ => {
                    for a in span.clone() {
                        for b in span.clone() {
                            for c in span.clone() {
                                visit([a, b, c]);
                            }
                        }
                    }
                }
            }
            fft_nd(&mut ball, &g, FftDirection::Forward);
            let inv = 1.0 / count as f64;
            let prod: Vec<Complex64> = spectrum.iter().zip(&ball).map(|(a, b)| a * b * inv).collect();
            let avg = Self::from_dft(g, prod);
            for (m, v) in best.iter_mut().zip(avg.samples) {
                *m = m.max(v);
            }
            radius *= 2;
        }
        Field { grid: g, samples: best }
    }

    /// Write the samples as little-endian f64 to `path` and a JSON header
    /// `{n, N, L}` next to it with extension `.json`.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        let mut bytes = Vec::with_capacity(8 * self.samples.len());
        for v in &self.samples {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, bytes)?;
        let header = path.with_extension("json");
        fs::write(&header, serde_json::to_vec_pretty(&self.grid)?)?;
        Ok(header)
    }

    pub fn read(path: &Path) -> Result<Field> {
        let grid: Grid = serde_json::from_slice(&fs::read(path.with_extension("json"))?)?;
        let grid = Grid::new(grid.n, grid.size, grid.half_extent)?;
        let bytes = fs::read(path)?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::GridMismatch(format!("{} bytes for {} samples", bytes.len(), grid.len())));
        }
        let samples = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Field::new(grid, samples)
    }

    /// Two-column CSV `x,value`; one-dimensional fields only.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if self.grid.n != 1 {
            return Err(Error::Config("CSV export is only defined for n = 1".into()));
        }
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "x,value")?;
        for (j, v) in self.samples.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.coordinate(j), v)?;
        }
        Ok(())
    }
}

/// Samples of `v(x, t)` on the product of two grids of equal dimension.
#[derive(Clone, Debug)]
pub struct ProductField {
    grid_x: Grid,
    grid_t: Grid,
    samples: Vec<f64>,
}

/// Largest per-axis size accepted by the triple sums over product fields.
pub const PRODUCT_SIZE_LIMIT: usize = 128;

impl ProductField {
    pub fn new(grid_x: Grid, grid_t: Grid, samples: Vec<f64>) -> Result<Self> {
        if grid_x.n != grid_t.n {
            return Err(Error::GridMismatch("product grids must share the dimension".into()));
        }
        if samples.len() != grid_x.len() * grid_t.len() {
            return Err(Error::GridMismatch("product sample count".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("product field has non-finite samples".into()));
        }
        Ok(ProductField { grid_x, grid_t, samples })
    }

    pub fn from_fn(grid_x: Grid, grid_t: Grid, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(grid_x.len() * grid_t.len());
        for i in 0..grid_x.len() {
            let x = grid_x.point(i);
            for j in 0..grid_t.len() {
                samples.push(f(&x[..grid_x.n], &grid_t.point(j)[..grid_t.n]));
            }
        }
        Self::new(grid_x, grid_t, samples)
    }

    pub fn grid_x(&self) -> &Grid {
        &self.grid_x
    }

    pub fn grid_t(&self) -> &Grid {
        &self.grid_t
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, t: usize) -> f64 {
        self.samples[x * self.grid_t.len() + t]
    }

    /// Weight `h_x^n h_t^n |t|^{-n}` of the cell `(x, t)`; zero on the `t = 0` cell.
    pub fn measure_weight(&self, t: usize) -> f64 {
        if t == self.grid_t.origin() {
            return 0.0;
        }
        let p = self.grid_t.point(t);
        let r = p[..self.grid_t.n].iter().map(|v| v * v).sum::<f64>().sqrt();
        self.grid_x.cell_volume() * self.grid_t.cell_volume() / r.powi(self.grid_t.n as i32)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ProductField {
        ProductField { grid_x: self.grid_x, grid_t: self.grid_t, samples: self.samples.iter().map(|&v| f(v)).collect() }
    }
}

/// `∫∫∫ |K(z,x,t) v(x,t) w(z)| |t|^{-n} dx dt dz` by the midpoint rule,
/// skipping the `t = 0` cell. Restricted to `n = 1` and small grids.
pub fn product_weighted_pair(
    v: &ProductField,
    kernel: impl Fn(f64, f64, f64) -> f64 + Sync,
    w: &Field,
) -> Result<f64> {
    let (gx, gt) = (v.grid_x, v.grid_t);
    if gx.n != 1 || gx.size > PRODUCT_SIZE_LIMIT || gt.size > PRODUCT_SIZE_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "triple sums need n = 1 and at most {PRODUCT_SIZE_LIMIT} points per axis"
        )));
    }
    gx.check_same(w.grid())?;
    let hz = gx.spacing();
    let per_z: Vec<f64> = (0..gx.size)
        .into_par_iter()
        .map(|iz| {
            let wz = w.samples[iz];
            if wz == 0.0 {
                return 0.0;
            }
            let z = gx.coordinate(iz);
            let mut acc = 0.0;
            for ix in 0..gx.size {
                let x = gx.coordinate(ix);
                for it in 0..gt.size {
                    let weight = v.measure_weight(it);
                    if weight == 0.0 {
                        continue;
                    }
                    acc += (kernel(z, x, gt.coordinate(it)) * v.get(ix, it)).abs() * weight;
                }
            }
            acc * wz.abs() * hz
        })
        .collect();
    Ok(per_z.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g1(size: usize, l: f64) -> Grid {
        Grid::new(1, size, l).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(4, 64, 1.0).is_err());
        assert!(Grid::new(1, 48, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 64, 0.0).is_err());
        let g = Grid::new(2, 16, 2.0).unwrap();
        assert_eq!(g.origin(), 8 * 16 + 8);
        assert_eq!(g.point(g.origin()), [0.0, 0.0, 0.0]);
        assert_eq!(g.frequency(8), -PI * 8.0 / 2.0);
    }

    #[test]
    fn integrals() {
        let g = g1(2048, 16.0);
        assert_eq!(Field::zeros(g).integrate(), 0.0);
        assert!((Field::constant(g, 3.0).integrate() - 96.0).abs() < 1e-12);
        let gauss = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        assert!((gauss.integrate() - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn convolution_identities() {
        let g = g1(1024, 16.0);
        let v = Field::from_fn(g, |x| (-(x[0] - 1.0).powi(2)).exp() * (1.0 + x[0]));
        let d = Field::delta(g).convolve(&v).unwrap();
        assert!(d.sub(&v).unwrap().max_abs() < 1e-12);
        let gauss = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let c = gauss.convolve(&gauss).unwrap();
        let want = Field::from_fn(g, |x| (PI / 2.0).sqrt() * (-x[0] * x[0] / 2.0).exp());
        assert!(c.sub(&want).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn convolution_matches_direct_sum_in_two_dimensions() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() + 0.1 * x[0]);
        let v = Field::from_fn(g, |x| (-(x[0] - 0.5).powi(2) - x[1] * x[1]).exp());
        let c = u.convolve(&v).unwrap();
        let hn = g.cell_volume();
        for i in [0usize, 17, 100, 255] {
            let xi = g.multi(i);
            let mut direct = 0.0;
            for j in 0..g.len() {
                let yj = g.multi(j);
                // x - y relative to the origin index
                let d0 = (xi[0] as isize - yj[0] as isize + 8).rem_euclid(16) as usize;
                let d1 = (xi[1] as isize - yj[1] as isize + 8).rem_euclid(16) as usize;
                direct += u.samples()[g.flat(&[d0, d1])] * v.samples()[j] * hn;
            }
            assert!((c.samples()[i] - direct).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn spectral_derivatives() {
        let g = g1(128, PI);
        let u = Field::from_fn(g, |x| (3.0 * x[0]).sin());
        let du = u.spectral_multiply_complex(|xi| Complex64::new(0.0, xi[0])).unwrap();
        let want = Field::from_fn(g, |x| 3.0 * (3.0 * x[0]).cos());
        assert!(du.sub(&want).unwrap().max_abs() < 1e-10);
        let g = g1(2048, 16.0);
        let u = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let want = Field::from_fn(g, |x| -2.0 * x[0] * (-x[0] * x[0]).exp());
        assert!(u.gradient().unwrap()[0].sub(&want).unwrap().max_abs() < 1e-8);
        assert!(Field::constant(g, 2.0).gradient().unwrap()[0].max_abs() < 1e-12);
    }

    #[test]
    fn multiplier_composition() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + x[1]));
        let m = |xi: &[f64]| 1.0 / (1.0 + xi.iter().map(|v| v * v).sum::<f64>());
        let twice = u.spectral_multiply(m).unwrap().spectral_multiply(m).unwrap();
        let once = u.spectral_multiply(|xi| m(xi).powi(2)).unwrap();
        assert!(twice.sub(&once).unwrap().max_abs() < 1e-12);
        assert!(u.spectral_multiply(|_| 1.0).unwrap().sub(&u).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn parseval() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() * (2.0 + x[0]));
        let spatial = g.cell_volume() * u.samples().iter().map(|v| v * v).sum::<f64>();
        // ℱu = h^n (-1)^k DFT(u); energy (2L)^{-n} Σ |ℱu|².
        let spectral: f64 = u.dft().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_volume().powi(2) / g.box_volume();
        assert!((spatial - spectral).abs() < 1e-10 * spatial);
    }

    #[test]
    fn maximal_function_examples() {
        let g = g1(256, 8.0);
        let m = Field::constant(g, -2.0).maximal_function();
        assert!(m.samples().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let ind = Field::from_fn(g, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 });
        let m = ind.maximal_function();
        let at3 = m.samples()[11 * 16];
        assert!(at3 >= 1.0 / 6.0 && at3 <= 2.0 / 3.0, "{at3}");
        // Brute force over the same radii.
        let j3 = 11 * 16isize;
        let mut brute: f64 = ind.samples()[j3 as usize];
        let mut r = 1isize;
        while r <= 128 {
            let reach = r.min(127);
            let s: f64 = (-reach..=reach).map(|o| ind.samples()[(j3 + o).rem_euclid(256) as usize]).sum();
            brute = brute.max(s / (2 * reach + 1) as f64);
            r *= 2;
        }
        assert!((at3 - brute).abs() < 1e-12);
    }

    #[test]
    fn product_pair_separable_case() {
        let g = g1(128, 4.0);
        let h = g.spacing();
        let v = ProductField::from_fn(g, g, |_, _| 1.0).unwrap();
        let kernel = |_: f64, _: f64, t: f64| {
            let a = t.abs();
            if (a - 1.0).abs() < 1e-9 || (a - 2.0).abs() < 1e-9 {
                0.5
            } else if a > 1.0 && a < 2.0 {
                1.0
            } else {
                0.0
            }
        };
        let w = Field::from_fn(g, |x| if x[0] >= -1.0 && x[0] < 1.0 { 1.0 } else { 0.0 });
        let got = product_weighted_pair(&v, kernel, &w).unwrap();
        let want = 2.0 * 2f64.ln() * 8.0 * 2.0;
        assert!((got - want).abs() < h * h * want, "{got} vs {want}");
        let doubled = product_weighted_pair(&v, kernel, &w.scale(2.0)).unwrap();
        assert!((doubled - 2.0 * got).abs() < 1e-12 * got);
        assert_eq!(product_weighted_pair(&v.map(|_| 0.0), kernel, &w).unwrap(), 0.0);
    }

    #[test]
    fn serialization_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(2, 8, 1.5).unwrap();
        let u = Field::from_fn(g, |x| x[0] - 2.0 * x[1]);
        let path = dir.path().join("u.bin");
        u.write(&path).unwrap();
        assert_eq!(Field::read(&path).unwrap(), u);
        assert!(u.write_csv(&dir.path().join("u.csv")).is_err());
    }
}
