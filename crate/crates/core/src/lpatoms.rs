//! Littlewood–Paley filter bank, Triebel–Lizorkin–Orlicz norms and the
//! constructive atomic decomposition.
//!
//! Dyadic cubes are `Q_ik = 2^{-i}(k + [0,1)^n)` realised as index ranges of
//! `c_i = 2^{-i}/h` cells; the triple cube `Q̃_ik` starts one cube earlier and
//! spans three. Cubes wrap around the periodic box.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::orlicz::{luxemburg_norm, NormResult};
use crate::young::YoungFunction;

/// Atoms whose coefficient falls below this fraction of the scale maximum are dropped.
pub const DROP_RATIO: f64 = 1e-14;
/// Upper bound on atoms × grid points worked through by one decomposition.
pub const DECOMPOSITION_WORK_LIMIT: usize = 1 << 30;
/// Atom files are only written for decompositions up to this many atoms.
pub const EXPORT_ATOM_LIMIT: usize = 4096;

fn glue(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Radial low-pass profile: one below 1/2, zero above 1, `C^∞` in between.
pub fn low_pass_profile(r: f64) -> f64 {
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let t = (r - 0.5) / 0.5;
    let (a, b) = (glue(1.0 - t), glue(t));
    a / (a + b)
}

fn radius(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    levels: usize,
    grid: Grid,
}

impl FilterBank {
    /// Number of band-pass levels `K`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Φ̂(ξ)`.
    pub fn low_pass(&self, xi: &[f64]) -> f64 {
        low_pass_profile(radius(xi))
    }

    /// `φ̂_k(ξ) = Φ̂(2^{-k}ξ) − Φ̂(2^{-k+1}ξ)` for `k ≥ 1`; `k = 0` gives `Φ̂`.
    pub fn band(&self, k: usize, xi: &[f64]) -> f64 {
        let r = radius(xi);
        if k == 0 {
            return low_pass_profile(r);
        }
        let scale = 0.5f64.powi(k as i32);
        low_pass_profile(scale * r) - low_pass_profile(2.0 * scale * r)
    }
}

pub fn build_filter_bank(levels: usize, grid: Grid) -> Result<FilterBank> {
    let finest = 2f64.powi(levels as i32);
    if finest > std::f64::consts::PI / grid.spacing() {
        return Err(Error::Config(format!(
            "{levels} levels need frequencies up to {finest}, grid resolves {}",
            std::f64::consts::PI / grid.spacing()
        )));
    }
    Ok(FilterBank { levels, grid })
}

/// `[Φ∗u, φ_1∗u, …, φ_K∗u]`.
pub fn lp_pieces(bank: &FilterBank, u: &Field) -> Result<Vec<Field>> {
    if u.grid() != bank.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.grid(), bank.grid())));
    }
    let spectrum = u.dft();
    Ok((0..=bank.levels)
        .map(|k| {
            let coeffs = Field::multiply_dft(&bank.grid, &spectrum, |xi| Complex64::new(bank.band(k, xi), 0.0));
            Field::from_dft(bank.grid, coeffs)
        })
        .collect())
}

/// Pointwise `(Σ_j |f_j(x)|^q)^{1/q}`.
fn lq_aggregate(grid: Grid, fields: &[Field], q: f64) -> Field {
    let samples = (0..grid.len())
        .map(|x| fields.iter().map(|f| f.samples()[x].abs().powf(q)).sum::<f64>().powf(1.0 / q))
        .collect();
    Field::new(grid, samples).unwrap_or_else(|_| Field::zeros(grid))
}

/// `‖Φ∗u‖_{L^A} + ‖(Σ_k |2^{sk} φ_k∗u|^q)^{1/q}‖_{L^A}`.
pub fn triebel_norm(a: &YoungFunction, s: f64, q: f64, u: &Field, bank: &FilterBank) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("sequence exponent must be at least 1, got {q}")));
    }
    let pieces = lp_pieces(bank, u)?;
    let low = luxemburg_norm(a, &pieces[0])?.value;
    let bands: Vec<Field> =
        pieces[1..].iter().enumerate().map(|(j, f)| f.scale(2f64.powf(s * (j + 1) as f64))).collect();
    if bands.is_empty() {
        return Ok(low);
    }
    Ok(low + luxemburg_norm(a, &lq_aggregate(*u.grid(), &bands, q))?.value)
}

/// One atom stored on the window of its triple cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Cube index `k`.
    pub cube: Vec<i64>,
    pub coefficient: f64,
    /// Samples of `a_ik` over the `(3c)^n` window, row-major.
    #[serde(skip)]
    pub window: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleAtoms {
    pub scale: usize,
    pub atoms: Vec<Atom>,
    pub dropped: usize,
    /// Largest sup-norm of a dropped `b_ik`.
    pub dropped_sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub s: f64,
    pub m: u32,
    pub i_max: usize,
    pub grid: Grid,
    pub scales: Vec<ScaleAtoms>,
    /// `u_i = 2^{is}·(i-th piece)`.
    #[serde(skip)]
    pub pieces: Vec<Field>,
}

fn cells_per_cube(grid: &Grid, i: usize) -> Result<usize> {
    let c = 2f64.powi(-(i as i32)) / grid.spacing();
    let cr = c.round();
    if cr < 1.0 || (c - cr).abs() > 1e-9 || (grid.size / 2) % cr as usize != 0 {
        return Err(Error::Config(format!("scale {i} cubes do not align with the grid (spacing {})", grid.spacing())));
    }
    Ok(cr as usize)
}

/// Row-major enumeration of `[0, w)^n`.
fn window_offsets(n: usize, w: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(w.pow(n as u32));
    for flat in 0..w.pow(n as u32) {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for a in (0..n).rev() {
            idx[a] = rest % w;
            rest /= w;
        }
        out.push(idx);
    }
    out
}

/// Flat grid indices of the triple-cube window of `k` at `c` cells per cube.
fn window_indices(grid: &Grid, c: usize, cube: &[i64]) -> Vec<usize> {
    let size = grid.size as i64;
    window_offsets(grid.n, 3 * c)
        .iter()
        .map(|t| {
            let mut idx = [0usize; 3];
            for a in 0..grid.n {
                let j = size / 2 + (cube[a] - 1) * c as i64 + t[a] as i64;
                idx[a] = j.rem_euclid(size) as usize;
            }
            grid.flat(&idx[..grid.n])
        })
        .collect()
}

/// One-dimensional factor of `η_ik` over the `3c` window: the discrete
/// convolution of the scaled bump with the cube indicator.
fn partition_profile(c: usize) -> Vec<f64> {
    let bump: Vec<f64> = (0..c)
        .map(|d| {
            let t = (d as f64 + 0.5) / c as f64;
            (-1.0 / (t * (1.0 - t))).exp()
        })
        .collect();
    let total: f64 = bump.iter().sum();
    let mut out = vec![0.0; 3 * c];
    for (r, slot) in out.iter_mut().enumerate().skip(c) {
        let r = r - c;
        *slot = (0..c).filter(|&d| r >= d && r - d < c).map(|d| bump[d]).sum::<f64>() / total;
    }
    out
}

fn multi_indices(n: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().sum();
            for k in 0..=(m - used) {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `max_{|γ| ≤ m} max_{x ∈ window} 2^{-i|γ|} |D^γ f(x)|` with spectral derivatives of `f` on the full grid.
fn size_on_window(f: &Field, i: usize, m: u32, window: &[usize]) -> Result<f64> {
    let g = *f.grid();
    let mut best = window.iter().fold(0.0f64, |acc, &x| acc.max(f.samples()[x].abs()));
    if m == 0 {
        return Ok(best);
    }
    let spectrum = f.dft();
    let nyquist = -std::f64::consts::PI * (g.size / 2) as f64 / g.half_extent;
    for gamma in multi_indices(g.n, m) {
        let order: u32 = gamma.iter().sum();
        if order == 0 {
            continue;
        }
        let coeffs = Field::multiply_dft(&g, &spectrum, |xi| {
            let mut z = Complex64::new(1.0, 0.0);
            for (a, &k) in gamma.iter().enumerate() {
                if k % 2 == 1 && xi[a] == nyquist {
                    return Complex64::new(0.0, 0.0);
                }
                z *= Complex64::new(0.0, xi[a]).powu(k);
            }
            z
        });
        let d = Field::from_dft(g, coeffs);
        let weight = 2f64.powi(-((i as u32 * order) as i32));
        for &x in window {
            best = best.max(weight * d.samples()[x].abs());
        }
    }
    Ok(best)
}

fn all_cubes(grid: &Grid, c: usize) -> Vec<Vec<i64>> {
    let per_axis = (grid.size / c) as i64;
    let lo = -per_axis / 2;
    window_offsets(grid.n, per_axis as usize)
        .iter()
        .map(|t| t[..grid.n].iter().map(|&v| lo + v as i64).collect())
        .collect()
}

/// Split `u = Σ_i 2^{-is} Σ_k s_ik a_ik` using the filter bank's pieces,
/// the smooth partition `η_ik` and spectral size maxima.
pub fn atomic_decompose(u: &Field, s: f64, m: u32, bank: &FilterBank, i_max: usize) -> Result<AtomicDecomposition> {
    if !(s > 0.0) || (m as f64) <= s {
        return Err(Error::Domain(format!("need 0 < s < m, got s = {s}, m = {m}")));
    }
    if i_max > bank.levels {
        return Err(Error::Config(format!("finest scale {i_max} exceeds the bank's {} levels", bank.levels)));
    }
    let g = *u.grid();
    let raw = lp_pieces(bank, u)?;
    let pieces: Vec<Field> = raw[..=i_max].iter().enumerate().map(|(i, f)| f.scale(2f64.powf(i as f64 * s))).collect();
    let mut work = 0usize;
    for i in 0..=i_max {
        let c = cells_per_cube(&g, i)?;
        work = work.saturating_add((g.size / c).pow(g.n as u32).saturating_mul(g.len()));
    }
    if work > DECOMPOSITION_WORK_LIMIT {
        return Err(Error::ResourceGuard(format!("decomposition needs {work} point evaluations")));
    }
    let mut scales = Vec::with_capacity(i_max + 1);
    for (i, piece) in pieces.iter().enumerate() {
        let c = cells_per_cube(&g, i)?;
        let profile = partition_profile(c);
        let offsets = window_offsets(g.n, 3 * c);
        let eta: Vec<f64> = offsets.iter().map(|t| t[..g.n].iter().map(|&v| profile[v]).product()).collect();
        let candidates: Vec<(Vec<i64>, Vec<f64>, f64)> = all_cubes(&g, c)
            .into_par_iter()
            .map(|cube| {
                let window = window_indices(&g, c, &cube);
                let b: Vec<f64> = window.iter().zip(&eta).map(|(&x, e)| e * piece.samples()[x]).collect();
                if b.iter().all(|v| *v == 0.0) {
                    return Ok((cube, b, 0.0));
                }
                let mut full = vec![0.0; g.len()];
                for (&x, v) in window.iter().zip(&b) {
                    full[x] += v;
                }
                let size = size_on_window(&Field::new(g, full)?, i, m, &window)?;
                Ok((cube, b, size))
            })
            .collect::<Result<_>>()?;
        let top = candidates.iter().fold(0.0f64, |acc, c| acc.max(c.2));
        let mut level = ScaleAtoms { scale: i, atoms: Vec::new(), dropped: 0, dropped_sup: 0.0 };
        for (cube, b, size) in candidates {
            if size <= DROP_RATIO * top || size == 0.0 {
                if b.iter().any(|v| *v != 0.0) {
                    level.dropped += 1;
                    level.dropped_sup = level.dropped_sup.max(b.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
                }
                continue;
            }
            let window = b.iter().map(|v| v / size).collect();
            level.atoms.push(Atom { cube, coefficient: size, window });
        }
        scales.push(level);
    }
    Ok(AtomicDecomposition { s, m, i_max, grid: g, scales, pieces })
}

impl AtomicDecomposition {
    pub fn atom_count(&self) -> usize {
        self.scales.iter().map(|l| l.atoms.len()).sum()
    }

    /// `a_ik` as a field on the full grid.
    pub fn atom_field(&self, scale: usize, atom: &Atom) -> Result<Field> {
        let c = cells_per_cube(&self.grid, scale)?;
        let mut full = vec![0.0; self.grid.len()];
        for (&x, v) in window_indices(&self.grid, c, &atom.cube).iter().zip(&atom.window) {
            full[x] += v;
        }
        Field::new(self.grid, full)
    }

    /// `u_i = Σ_k s_ik a_ik`.
    pub fn scale_sum(&self, scale: usize) -> Result<Field> {
        let c = cells_per_cube(&self.grid, scale)?;
        let mut full = vec![0.0; self.grid.len()];
        for atom in &self.scales[scale].atoms {
            for (&x, v) in window_indices(&self.grid, c, &atom.cube).iter().zip(&atom.window) {
                full[x] += atom.coefficient * v;
            }
        }
        Field::new(self.grid, full)
    }

    /// `Σ_i 2^{-is} Σ_k s_ik a_ik`.
    pub fn reconstruct(&self) -> Result<Field> {
        let mut out = Field::zeros(self.grid);
        for level in &self.scales {
            out = out.add(&self.scale_sum(level.scale)?.scale(2f64.powf(-(level.scale as f64) * self.s)))?;
        }
        Ok(out)
    }

    /// Step fields `s_i(x) = Σ_k s_ik χ_ik(x)`.
    pub fn step_fields(&self) -> Result<Vec<Field>> {
        let g = self.grid;
        self.scales
            .iter()
            .map(|level| {
                let c = cells_per_cube(&g, level.scale)?;
                let mut full = vec![0.0; g.len()];
                for atom in &level.atoms {
                    for t in window_offsets(g.n, c) {
                        let mut idx = [0usize; 3];
                        for a in 0..g.n {
                            let j = g.size as i64 / 2 + atom.cube[a] * c as i64 + t[a] as i64;
                            idx[a] = j.rem_euclid(g.size as i64) as usize;
                        }
                        full[g.flat(&idx[..g.n])] = atom.coefficient;
                    }
                }
                Field::new(g, full)
            })
            .collect()
    }

    /// Smallest `C` with `s_i(x) ≤ C·M u_i(x)` wherever `s_i(x)` exceeds
    /// `rel_floor` times its scale maximum.
    pub fn maximal_domination(&self, rel_floor: f64) -> Result<f64> {
        let steps = self.step_fields()?;
        let mut worst = 0.0f64;
        for (step, piece) in steps.iter().zip(&self.pieces) {
            let floor = rel_floor * step.max_abs();
            let maximal = piece.maximal_function();
            for (sv, mv) in step.samples().iter().zip(maximal.samples()) {
                if *sv > floor && *sv > 0.0 {
                    worst = worst.max(sv / mv);
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomCheck {
    pub valid: bool,
    pub support_ok: bool,
    /// Largest `2^{-i|γ|}|D^γ a|` over the triple cube.
    pub ratio: f64,
}

/// Check support in `Q̃_ik` (one cell of slack) and the size condition.
pub fn atom_validate(a: &Field, scale: usize, cube: &[i64], m: u32) -> Result<AtomCheck> {
    let g = *a.grid();
    if cube.len() != g.n {
        return Err(Error::Config(format!("cube index has {} entries on a {}-dimensional grid", cube.len(), g.n)));
    }
    let c = cells_per_cube(&g, scale)?;
    let window = window_indices(&g, c, cube);
    let sup = a.max_abs();
    let mut slack = vec![false; g.len()];
    for t in window_offsets(g.n, 3 * c + 2) {
        let mut idx = [0usize; 3];
        for ax in 0..g.n {
            let j = g.size as i64 / 2 + (cube[ax] - 1) * c as i64 + t[ax] as i64 - 1;
            idx[ax] = j.rem_euclid(g.size as i64) as usize;
        }
        slack[g.flat(&idx[..g.n])] = true;
    }
    let support_ok = a.samples().iter().zip(&slack).all(|(v, inside)| *inside || v.abs() <= 1e-14 * sup);
    let ratio = if sup == 0.0 { 0.0 } else { size_on_window(a, scale, m, &window)? };
    Ok(AtomCheck { valid: support_ok && ratio <= 1.0 + 1e-6, support_ok, ratio })
}

/// `‖(Σ_i |s_i(x)|^q)^{1/q}‖_{L^A}` of the coefficient step fields.
pub fn coefficient_norm(d: &AtomicDecomposition, a: &YoungFunction, q: f64) -> Result<NormResult> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("sequence exponent must be at least 1, got {q}")));
    }
    let steps = d.step_fields()?;
    if steps.is_empty() {
        return Ok(NormResult::zero());
    }
    luxemburg_norm(a, &lq_aggregate(d.grid, &steps, q))
}

/// Write `index.json` into `dir`, plus one field file per atom when
/// `with_atoms` is set and the count is within [`EXPORT_ATOM_LIMIT`].
pub fn export_decomposition(d: &AtomicDecomposition, dir: &Path, with_atoms: bool) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let index = dir.join("index.json");
    std::fs::write(&index, serde_json::to_string_pretty(d)?)?;
    if with_atoms {
        if d.atom_count() > EXPORT_ATOM_LIMIT {
            return Err(Error::ResourceGuard(format!("{} atoms exceed the export limit", d.atom_count())));
        }
        let atoms = dir.join("atoms");
        std::fs::create_dir_all(&atoms)?;
        for level in &d.scales {
            for atom in &level.atoms {
                let tag: Vec<String> = atom.cube.iter().map(|k| k.to_string()).collect();
                let path = atoms.join(format!("atom_{}_{}.bin", level.scale, tag.join("_")));
                d.atom_field(level.scale, atom)?.write(&path)?;
            }
        }
    }
    Ok(index)
}
