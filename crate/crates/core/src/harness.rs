//! Test families, verification suites and report output.
//!
//! Each suite measures the two sides of an inequality over a seeded family
//! of fields, reports the worst ratio as an empirical constant, and repeats
//! the measurement on a grid with half the points to judge stability.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{
    bessel_inverse, bessel_potential, calderon_inversion, hs_norm, increment_kernel_apply, modulus_constant,
    modulus_slope, synthesize_kernel, IncrementKernelConfig,
};
use crate::error::{Error, Result};
use crate::field::{Field, Grid, ProductField};
use crate::lpatoms::{
    atom_validate, atomic_decompose, build_filter_bank, coefficient_norm, low_pass_profile, lp_pieces, triebel_norm,
};
use crate::orlicz::{holder_pairing, luxemburg_norm, luxemburg_weighted, modular};
use crate::radial::{ball_bound, ball_convolution, decay_envelope_slope, lift, strauss_ratio, RadialProfile};
use crate::sobolev::{gagliardo_modular, gagliardo_seminorm, w1_seminorm, GagliardoQuadrature};
use crate::young::{YoungFunction, SCAN_MAX};

/// Members whose boundary values exceed this are redrawn.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;
/// Draws allowed per requested member before giving up.
pub const REJECTION_BUDGET: usize = 50;
/// Allowed relative change of an empirical constant between the two resolutions.
pub const DRIFT_LIMIT: f64 = 0.25;

pub const SUITES: [&str; 10] = [
    "young-axioms",
    "orlicz-norms",
    "bessel-kernel",
    "calderon-s1",
    "embedding-s1",
    "embedding-s2",
    "increment-kernel",
    "lp-equivalence",
    "atoms",
    "strauss",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Gaussians,
    Bumps,
    Bandlimited,
    RadialGaussians,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Gaussians => "gaussians",
            FamilyKind::Bumps => "bumps",
            FamilyKind::Bandlimited => "bandlimited",
            FamilyKind::RadialGaussians => "radial-gaussians",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussians" => Ok(FamilyKind::Gaussians),
            "bumps" => Ok(FamilyKind::Bumps),
            "bandlimited" | "bandlimited-random" => Ok(FamilyKind::Bandlimited),
            "radial-gaussians" => Ok(FamilyKind::RadialGaussians),
            other => Err(Error::Config(format!("unknown family kind '{other}'"))),
        }
    }
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp() * std::f64::consts::E
    }
}

/// Random parameters of one member; sampling them on any grid of the same
/// box gives the same underlying function.
#[derive(Clone, Debug)]
struct Member {
    terms: Vec<(f64, [f64; 3], f64, f64)>,
}

fn draw_member(rng: &mut ChaCha8Rng, kind: FamilyKind, n: usize, half_extent: f64, cutoff: f64) -> Member {
    let count = rng.gen_range(1..=3usize);
    let terms = (0..count)
        .map(|_| {
            let amp = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let mut c = [0.0; 3];
            if kind != FamilyKind::RadialGaussians {
                for v in c.iter_mut().take(n) {
                    *v = rng.gen_range(-0.25..0.25) * half_extent;
                }
            }
            let (width, freq) = match kind {
                FamilyKind::Gaussians => (rng.gen_range(0.05..0.1) * half_extent, 0.0),
                FamilyKind::Bumps => (rng.gen_range(0.15..0.25) * half_extent, 0.0),
                FamilyKind::RadialGaussians => (rng.gen_range(0.1..0.2) * half_extent, 0.0),
                FamilyKind::Bandlimited => {
                    let w = rng.gen_range(0.1..0.2) * half_extent;
                    let top = (0.5 * cutoff - 12.0 / w).max(0.0);
                    (w, rng.gen_range(0.0..=top))
                }
            };
            (amp, c, width, freq)
        })
        .collect();
    Member { terms }
}

fn sample_member(member: &Member, kind: FamilyKind, grid: Grid, cutoff: f64) -> Result<Field> {
    let n = grid.n;
    let raw = Field::from_fn(grid, |x| {
        member
            .terms
            .iter()
            .map(|(amp, c, w, freq)| {
                let r2: f64 = (0..n).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() / (w * w);
                match kind {
                    FamilyKind::Bumps => amp * bump(r2),
                    FamilyKind::Bandlimited => amp * (-r2).exp() * (freq * (x[0] - c[0])).cos(),
                    _ => amp * (-r2).exp(),
                }
            })
            .sum()
    });
    if kind == FamilyKind::Bandlimited {
        let norm: Vec<f64> = vec![cutoff];
        return raw.spectral_multiply(move |xi| low_pass_profile(xi.iter().map(|v| v * v).sum::<f64>().sqrt() / norm[0]));
    }
    Ok(raw)
}

/// A seeded family of test fields. Band-limited members have spectrum inside
/// `|ξ| ≤ 2^{levels−1}`.
pub fn make_family(kind: FamilyKind, size: usize, seed: u64, grid: Grid, levels: usize) -> Result<Vec<Field>> {
    let cutoff = 2f64.powi(levels as i32 - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size);
    let mut draws = 0;
    while out.len() < size {
        draws += 1;
        if draws > REJECTION_BUDGET * size {
            return Err(Error::ResourceGuard(format!("{kind} family rejected too many members")));
        }
        let member = draw_member(&mut rng, kind, grid.n, grid.half_extent, cutoff);
        let field = sample_member(&member, kind, grid, cutoff)?;
        if field.boundary_max() <= BOUNDARY_TOLERANCE && field.max_abs() > 0.0 {
            out.push(field);
        }
    }
    Ok(out)
}

/// Seeded radial Gaussian profiles reaching the corners of `[−L, L)^n`.
pub fn make_radial_profiles(size: usize, seed: u64, n: usize, half_extent: f64) -> Result<Vec<RadialProfile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = (n as f64).sqrt() * half_extent * 1.01;
    (0..size)
        .map(|_| {
            let member = draw_member(&mut rng, FamilyKind::RadialGaussians, n, half_extent, 0.0);
            RadialProfile::from_fn(n, r_max, 16385, |r| {
                member.terms.iter().map(|(amp, _, w, _)| amp * (-(r * r) / (w * w)).exp()).sum()
            })
        })
        .collect()
}

/// Seeded `v(x, t)`: sums of tensor bumps with increments supported in `0.1L ≤ |t| ≤ 0.6L`.
pub fn make_product_family(size: usize, seed: u64, grid_x: Grid, grid_t: Grid) -> Result<Vec<ProductField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid_x.half_extent;
    (0..size)
        .map(|_| {
            let terms: Vec<(f64, f64, f64, f64, f64)> = (0..rng.gen_range(1..=3usize))
                .map(|_| {
                    let amp = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let cx = rng.gen_range(-0.3..0.3) * l;
                    let rx = rng.gen_range(0.15..0.3) * l;
                    let ct = rng.gen_range(0.25..0.45) * l * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let rt = rng.gen_range(0.08..0.15) * l;
                    (amp, cx, rx, ct, rt)
                })
                .collect();
            ProductField::from_fn(grid_x, grid_t, |x, t| {
                terms
                    .iter()
                    .map(|(amp, cx, rx, ct, rt)| {
                        amp * bump(((x[0] - cx) / rx).powi(2)) * bump(((t[0] - ct) / rt).powi(2))
                    })
                    .sum()
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: String,
    pub young: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub grid: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    pub s: f64,
    pub s2: Option<f64>,
    pub q: f64,
    pub levels: usize,
    pub i_max: usize,
    pub m: u32,
    pub family: FamilyKind,
    pub family_size: usize,
    pub seed: u64,
    pub rings: usize,
    pub out: Option<PathBuf>,
}

impl SuiteConfig {
    /// Settings each suite is calibrated for.
    pub fn defaults(suite: &str) -> Result<Self> {
        let mut c = SuiteConfig {
            suite: suite.to_string(),
            young: "power:p=2".into(),
            n: 1,
            grid: 1024,
            extent: 16.0,
            s: 0.5,
            s2: None,
            q: 2.0,
            levels: 6,
            i_max: 6,
            m: 2,
            family: FamilyKind::Gaussians,
            family_size: 10,
            seed: 7,
            rings: 32,
            out: None,
        };
        match suite {
            "young-axioms" => {}
            "orlicz-norms" => {
                c.grid = 4096;
                c.family_size = 100;
            }
            "bessel-kernel" => {
                c.grid = 65536;
                c.extent = 8.0;
            }
            "calderon-s1" => {
                c.grid = 4096;
                c.extent = 32.0;
                c.s = 1.0;
            }
            "embedding-s1" | "embedding-s2" => {
                c.grid = 2048;
                c.s = 0.3;
                c.s2 = Some(0.6);
            }
            "increment-kernel" => {
                c.grid = 128;
                c.extent = 4.0;
                c.s2 = Some(0.9);
                c.family_size = 20;
            }
            "lp-equivalence" => {
                c.extent = 8.0;
                c.family = FamilyKind::Bandlimited;
                c.family_size = 20;
            }
            "atoms" => {
                c.grid = 4096;
                c.extent = 8.0;
                c.family_size = 5;
            }
            "strauss" => {
                c.n = 3;
                c.grid = 64;
                c.extent = 8.0;
                c.s = 0.8;
                c.family = FamilyKind::RadialGaussians;
            }
            other => return Err(Error::Config(format!("unknown suite '{other}'"))),
        }
        Ok(c)
    }

    fn young_function(&self) -> Result<YoungFunction> {
        self.young.parse()
    }

    /// The configured grid and the one with half as many points per axis.
    fn grids(&self) -> Result<(Grid, Grid)> {
        if self.grid < 8 || self.grid % 4 != 0 {
            return Err(Error::Config(format!("grid size must be a multiple of 4 and at least 8, got {}", self.grid)));
        }
        Ok((Grid::new(self.n, self.grid / 2, self.extent)?, Grid::new(self.n, self.grid, self.extent)?))
    }

    fn fractional_pair(&self) -> Result<(f64, f64)> {
        let s2 = self.s2.ok_or_else(|| Error::Config("this suite needs --s2".into()))?;
        if !(0.0 < self.s && self.s < s2 && s2 < 1.0) {
            return Err(Error::Config(format!("need 0 < s < s2 < 1, got s = {}, s2 = {s2}", self.s)));
        }
        Ok((self.s, s2))
    }

    fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::Config(format!("unknown suite '{}'", self.suite)));
        }
        if !(1..=3).contains(&self.n) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {}", self.n)));
        }
        if !(self.extent > 0.0) || !(self.q >= 1.0) || !self.s.is_finite() {
            return Err(Error::Config("extent must be positive, q at least 1 and s finite".into()));
        }
        self.young_function()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    pub resolution: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_ratio: f64,
    pub constants: BTreeMap<String, f64>,
    /// Fine-grid constant over coarse-grid constant.
    pub stability: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub grid: String,
    pub drift_limit: f64,
    pub version: String,
    pub threads: usize,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
    pub pass: bool,
    pub environment: Environment,
    /// Extra CSV tables written next to the report, as (file name, contents).
    #[serde(skip)]
    pub tables: Vec<(String, String)>,
}

impl VerificationReport {
    /// Equality ignoring the timestamp.
    pub fn same_outcome(&self, other: &VerificationReport) -> bool {
        let strip = |r: &VerificationReport| {
            let mut r = r.clone();
            r.environment.timestamp = 0;
            serde_json::to_string(&r).unwrap_or_default()
        };
        strip(self) == strip(other)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.summary.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.summary.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Accumulates rows, constants and checks while a suite runs.
struct Builder {
    rows: Vec<ReportRow>,
    summary: Summary,
    tables: Vec<(String, String)>,
}

impl Builder {
    fn new() -> Self {
        Builder { rows: Vec::new(), summary: Summary::default(), tables: Vec::new() }
    }

    fn row(&mut self, case: impl Into<String>, resolution: usize, lhs: f64, rhs: f64) {
        let ratio = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { lhs / rhs };
        self.rows.push(ReportRow { case: case.into(), resolution, lhs, rhs, ratio });
    }

    /// Pass when `value ≤ limit` and `value` is finite.
    fn check(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let pass = value.is_finite() && value <= limit;
        self.summary.checks.push(Check { name: name.into(), value, limit, pass });
    }

    fn constant(&mut self, name: &str, value: f64) {
        self.summary.constants.insert(name.to_string(), value);
    }

    /// Record a constant at both resolutions and check its drift.
    fn stable_constant(&mut self, name: &str, coarse: f64, fine: f64) {
        self.constant(&format!("{name}_coarse"), coarse);
        self.constant(name, fine);
        let ratio = fine / coarse;
        self.summary.stability.insert(name.to_string(), ratio);
        self.check(format!("{name} drift"), (ratio - 1.0).abs(), DRIFT_LIMIT);
        self.check(format!("{name} finite and positive"), if fine > 0.0 && coarse > 0.0 { 0.0 } else { 1.0 }, 0.0);
    }

    fn finish(mut self, cfg: &SuiteConfig) -> VerificationReport {
        self.summary.max_ratio = self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let finite_rows = self.rows.iter().all(|r| r.ratio.is_finite());
        if !finite_rows {
            self.check("row ratios finite", 1.0, 0.0);
        }
        let pass = self.summary.checks.iter().all(|c| c.pass);
        let timestamp =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        VerificationReport {
            suite: cfg.suite.clone(),
            config: cfg.clone(),
            rows: self.rows,
            summary: self.summary,
            pass,
            environment: Environment {
                grid: format!("n={} N={} L={}", cfg.n, cfg.grid, cfg.extent),
                drift_limit: DRIFT_LIMIT,
                version: env!("CARGO_PKG_VERSION").to_string(),
                threads: rayon::current_num_threads(),
                timestamp,
            },
            tables: self.tables,
        }
    }
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64)).collect()
}

/// `sup_w (tw − A(w))` by a dense log scan refined with a ternary search
/// (the objective is concave in `w`).
fn brute_conjugate(a: &YoungFunction, t: f64) -> Result<f64> {
    let ws = log_space(1e-10, 1e10, 4001);
    let f = |w: f64| -> Result<f64> { Ok(t * w - a.eval(w)?) };
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (k, &w) in ws.iter().enumerate() {
        let v = f(w)?;
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    let (mut lo, mut hi) = (ws[best.saturating_sub(1)], ws[(best + 1).min(ws.len() - 1)]);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1)? < f(m2)? {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(best_val.max(f(0.5 * (lo + hi))?).max(0.0))
}

fn young_axioms(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    let conj = a.conjugate()?;
    let mut b = Builder::new();
    let ts = log_space(1e-3, 1e3, 201);
    let rows: Vec<(f64, f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let oracle = match a {
                YoungFunction::Power { p } => {
                    let pc = p / (p - 1.0);
                    (p - 1.0) * p.powf(-pc) * t.powf(pc)
                }
                _ => brute_conjugate(&a, t)?,
            };
            Ok((t, conj.eval(t)?, oracle))
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (t, got, want) in rows {
        b.row(format!("conjugate t={t:.6e}"), 0, got, want);
        worst = worst.max((got / want - 1.0).abs());
    }
    b.check("conjugate relative error", worst, 1e-4);

    let grid = log_space(1e-3, 1e3, 200);
    let a_vals: Vec<f64> = grid.iter().map(|&t| a.eval(t)).collect::<Result<_>>()?;
    let c_vals: Vec<f64> = grid.iter().map(|&w| conj.eval(w)).collect::<Result<_>>()?;
    let mut violation = 0.0f64;
    for (t, at) in grid.iter().zip(&a_vals) {
        for (w, cw) in grid.iter().zip(&c_vals) {
            violation = violation.max((t * w - at - cw) / (t * w));
        }
    }
    b.check("Young inequality violation", violation, 1e-9);

    let idx = a.delta2_indices()?;
    b.constant("p_minus", idx.p_minus);
    b.constant("p_plus", idx.p_plus);
    match a {
        YoungFunction::Power { p } => {
            b.check("index scan p_minus", (idx.p_minus - p).abs(), 1e-9);
            b.check("index scan p_plus", (idx.p_plus - p).abs(), 1e-9);
        }
        YoungFunction::Zygmund { p, q, r } if q == 1.0 && r == 1.0 => {
            // t a(t)/A(t) = p + t/((1+t)log(1+t)) tends to p only logarithmically,
            // so the scan window leaves a gap of about 1/log(SCAN_MAX).
            let gap = 1.0 / (1.0 + SCAN_MAX).ln() + 1e-6;
            b.check("index scan p_minus", (idx.p_minus - p).abs(), gap);
            b.check("index scan p_plus", (idx.p_plus - (p + 1.0)).abs(), 1e-6);
        }
        _ => b.check("index ordering", if idx.p_minus <= idx.p_plus { 0.0 } else { 1.0 }, 0.0),
    }
    let a1 = a.eval(1.0)?;
    let mut envelope = 0.0f64;
    for (t, at) in grid.iter().zip(&a_vals) {
        let (x, y) = (t.powf(idx.p_minus), t.powf(idx.p_plus));
        let v = at / a1;
        envelope = envelope.max((x.min(y) - v) / v).max((v - x.max(y)) / v);
    }
    b.check("power envelope violation", envelope, 1e-9);
    Ok(b.finish(cfg))
}

fn orlicz_norms(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    let g = Grid::new(cfg.n, cfg.grid, cfg.extent)?;
    let mut b = Builder::new();
    if let YoungFunction::Power { p } = a {
        let gauss = Field::from_fn(g, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let got = luxemburg_norm(&a, &gauss)?.value;
        let want = (std::f64::consts::PI / p).powf(g.n as f64 / (2.0 * p));
        b.row("gaussian", g.size, got, want);
        b.check("closed-form Lp norm error", (got - want).abs(), 1e-7);
    }
    let family = make_family(cfg.family, cfg.family_size, cfg.seed, g, cfg.levels)?;
    let conj = a.conjugate()?;
    let results: Vec<(f64, f64, f64, f64)> = (0..family.len())
        .into_par_iter()
        .map(|i| {
            let u = &family[i];
            let v = &family[(i + 1) % family.len()];
            let nu = luxemburg_norm(&a, u)?.value;
            let nv = luxemburg_norm(&a, v)?.value;
            let c = -2.5 + 0.37 * i as f64;
            let hom = (luxemburg_norm(&a, &u.scale(c))?.value - c.abs() * nu).abs() / (c.abs() * nu);
            let tri = (luxemburg_norm(&a, &u.add(v)?)?.value - nu - nv) / (nu + nv);
            let pairing = holder_pairing(u, v)?;
            let holder = pairing / (2.0 * nu * luxemburg_norm(&conj, v)?.value);
            Ok((hom, tri, pairing, holder))
        })
        .collect::<Result<_>>()?;
    let (mut hom, mut tri, mut holder) = (0.0f64, 0.0f64, 0.0f64);
    for (i, (h, t, p, r)) in results.into_iter().enumerate() {
        b.row(format!("member {i} pairing"), g.size, p, p / r);
        hom = hom.max(h);
        tri = tri.max(t);
        holder = holder.max(r);
    }
    b.check("homogeneity violation", hom, 1e-7);
    b.check("triangle inequality violation", tri.max(0.0), 1e-7);
    b.check("Hölder pairing ratio", holder, 1.0 + 1e-7);
    Ok(b.finish(cfg))
}

fn bessel_kernel(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let s = cfg.s;
    let (coarse, fine) = cfg.grids()?;
    let kernel = synthesize_kernel(s, fine)?;
    let mut b = Builder::new();
    let samples = kernel.samples();
    let mass = samples.integrate();
    b.row("mass", fine.size, mass, 1.0);
    if s > 0.0 {
        b.check("mass error", (mass - 1.0).abs(), 5e-6);
    }
    let h = fine.spacing();
    let axis: Vec<f64> = (0..fine.size / 2)
        .map(|j| {
            let mut idx = [fine.size / 2; 3];
            idx[0] += j;
            samples.samples()[fine.flat(&idx[..fine.n])]
        })
        .collect();
    if s > 0.0 {
        let rise = axis.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        b.check("monotone decrease along the axis", rise, 1e-10);
        let mut asym = 0.0f64;
        for i in 0..fine.len() {
            let idx = fine.multi(i);
            let mut mirror = [0usize; 3];
            for a in 0..fine.n {
                mirror[a] = (fine.size - idx[a]) % fine.size;
            }
            asym = asym.max((samples.samples()[i] - samples.samples()[fine.flat(&mirror[..fine.n])]).abs());
        }
        b.check("symmetry", asym, 1e-12);
        if s <= 2.0 {
            let tail = axis[fine.size / 4];
            b.check("tail at L/2 below exp(-L/4)", tail, (-fine.half_extent / 4.0).exp());
        }
    }
    if fine.n == 1 && s == 2.0 {
        let err = (1..fine.size)
            .filter(|&j| j != fine.size / 2)
            .map(|j| (samples.samples()[j] - 0.5 * (-fine.coordinate(j).abs()).exp()).abs())
            .fold(0.0f64, f64::max);
        b.check("closed-form kernel error off the origin", err, 1e-6);
    }
    if s > 0.0 && s < 1.0 {
        if fine.n == 1 {
            let slope = modulus_slope(&kernel, 4, 64)?;
            b.row("modulus slope", fine.size, slope, s);
            b.check("modulus slope error", (slope - s).abs(), 0.05);
        }
        let c_fine = modulus_constant(&kernel)?;
        let c_coarse = modulus_constant(&synthesize_kernel(s, coarse)?)?;
        b.stable_constant("modulus_constant", c_coarse, c_fine);
    }
    let _ = h;
    Ok(b.finish(cfg))
}

fn l2_relative(a: &Field, b: &Field) -> Result<f64> {
    Ok(a.sub(b)?.l2_norm() / b.l2_norm())
}

fn calderon_s1(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    let (coarse, fine) = cfg.grids()?;
    let mut b = Builder::new();
    let family = make_family(cfg.family, cfg.family_size, cfg.seed, fine, cfg.levels)?;
    let errors: Vec<f64> = family
        .iter()
        .map(|u| l2_relative(&calderon_inversion(u)?, &bessel_inverse(1.0, u)?))
        .collect::<Result<_>>()?;
    for (i, e) in errors.iter().enumerate() {
        b.row(format!("member {i} inversion error"), fine.size, *e, 1e-2);
    }
    b.check("inversion relative L2 error", errors.iter().cloned().fold(0.0, f64::max), 1e-2);

    let ratios = |grid: Grid| -> Result<(f64, f64, Vec<(f64, f64)>)> {
        let fam = make_family(cfg.family, cfg.family_size, cfg.seed, grid, cfg.levels)?;
        let pairs: Vec<(f64, f64)> = fam
            .par_iter()
            .map(|u| {
                let h = hs_norm(&a, 1.0, u)?.value;
                let w = luxemburg_norm(&a, u)?.value + w1_seminorm(&a, u)?.value;
                Ok((h, w))
            })
            .collect::<Result<_>>()?;
        let up = pairs.iter().map(|(h, w)| h / w).fold(0.0, f64::max);
        let down = pairs.iter().map(|(h, w)| w / h).fold(0.0, f64::max);
        Ok((up, down, pairs))
    };
    let (up_c, down_c, _) = ratios(coarse)?;
    let (up_f, down_f, pairs) = ratios(fine)?;
    for (i, (h, w)) in pairs.iter().enumerate() {
        b.row(format!("member {i} H/W"), fine.size, *h, *w);
    }
    b.stable_constant("H_over_W", up_c, up_f);
    b.stable_constant("W_over_H", down_c, down_f);
    Ok(b.finish(cfg))
}

fn embedding_s1(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let (s, s2) = cfg.fractional_pair()?;
    let a = cfg.young_function()?;
    let (coarse, fine) = cfg.grids()?;
    let mut b = Builder::new();
    let kernel = synthesize_kernel(s2, fine)?;
    let g_norm = kernel.samples().map(f64::abs).integrate();
    let c_hat = modulus_constant(&kernel)?;
    let c1 = 2.0 * fine.n as f64 * fine.omega() / s;
    let c2 = 2.0 * g_norm + c_hat / (1.0 - s2);
    b.constant("C1", c1);
    b.constant("C2", c2);
    b.constant("modulus_constant", c_hat);
    let q = GagliardoQuadrature::for_grid(&fine, cfg.rings);
    let family = make_family(cfg.family, cfg.family_size, cfg.seed, fine, cfg.levels)?;
    let sides: Vec<(f64, f64)> = family
        .iter()
        .map(|u| {
            let f = bessel_inverse(s2, u)?.map(f64::abs);
            let lhs = modular(&a, u)? + gagliardo_modular(&a, s, u, &q)?.upper();
            let rhs = c1 / (s2 - s) * modular(&a, &f.scale(c2))? + modular(&a, &f.scale(g_norm))?;
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let mut violations = 0.0;
    for (i, (l, r)) in sides.iter().enumerate() {
        b.row(format!("member {i} modular"), fine.size, *l, *r);
        if l > r {
            violations += 1.0;
        }
    }
    b.check("modular inequality violations", violations, 0.0);

    let norm_ratio = |grid: Grid| -> Result<f64> {
        let quad = GagliardoQuadrature::for_grid(&grid, cfg.rings);
        let fam = make_family(cfg.family, cfg.family_size, cfg.seed, grid, cfg.levels)?;
        let worst = fam
            .iter()
            .map(|u| {
                let w = luxemburg_norm(&a, u)?.value + gagliardo_seminorm(&a, s, u, &quad)?.value;
                Ok((s2 - s) * w / hs_norm(&a, s2, u)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(worst.into_iter().fold(0.0, f64::max))
    };
    b.stable_constant("norm_constant", norm_ratio(coarse)?, norm_ratio(fine)?);
    Ok(b.finish(cfg))
}

fn embedding_s2(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let (s, s2) = cfg.fractional_pair()?;
    let a = cfg.young_function()?;
    let (coarse, fine) = cfg.grids()?;
    let mut b = Builder::new();
    let mut measure = |grid: Grid, record: bool| -> Result<f64> {
        let quad = GagliardoQuadrature::for_grid(&grid, cfg.rings);
        let fam = make_family(cfg.family, cfg.family_size, cfg.seed, grid, cfg.levels)?;
        let mut worst = 0.0f64;
        for (i, u) in fam.iter().enumerate() {
            let h = hs_norm(&a, s, u)?.value;
            let w = luxemburg_norm(&a, u)?.value + gagliardo_seminorm(&a, s2, u, &quad)?.value;
            if record {
                b.row(format!("member {i} H/W"), grid.size, h, w);
            }
            worst = worst.max(h / w);
        }
        Ok(worst)
    };
    let c = measure(coarse, false)?;
    let f = measure(fine, true)?;
    b.stable_constant("reverse_ratio", c, f);
    Ok(b.finish(cfg))
}

fn increment_kernel(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let gamma = cfg.s;
    let alpha = cfg.s2.ok_or_else(|| Error::Config("increment-kernel needs --s2 (alpha)".into()))?;
    if cfg.n != 1 || cfg.grid > crate::field::PRODUCT_SIZE_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "increment-kernel runs with n = 1 and N <= {}",
            crate::field::PRODUCT_SIZE_LIMIT
        )));
    }
    if cfg.grid < 32 || cfg.grid % 4 != 0 {
        return Err(Error::Config("increment-kernel needs N >= 32, a multiple of 4".into()));
    }
    let a = cfg.young_function()?;
    let mut b = Builder::new();
    let mut estimates = Vec::new();
    for size in [cfg.grid / 4, cfg.grid / 2, cfg.grid] {
        let g = Grid::new(1, size, cfg.extent)?;
        let op = IncrementKernelConfig::new(alpha, gamma, g, g)?;
        let family = make_product_family(cfg.family_size, cfg.seed, g, g)?;
        let mut worst = 0.0f64;
        for (i, v) in family.iter().enumerate() {
            let tv = increment_kernel_apply(&op, v)?;
            let weights: Vec<f64> =
                (0..g.len()).flat_map(|_| (0..g.len()).map(|t| v.measure_weight(t))).collect();
            let lhs = luxemburg_norm(&a, &tv)?.value;
            let rhs = luxemburg_weighted(&a, v.samples(), &weights)?.value;
            b.row(format!("member {i}"), size, lhs, rhs);
            worst = worst.max(lhs / rhs);
        }
        b.constant(&format!("operator_norm_N{size}"), worst);
        estimates.push(worst);
    }
    let growth = estimates.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
    b.summary.stability.insert("operator_norm".into(), estimates[2] / estimates[0]);
    b.constant("operator_norm", estimates[2]);
    b.check("operator norm growth under refinement", growth - 1.0, DRIFT_LIMIT);
    Ok(b.finish(cfg))
}

fn lp_equivalence(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    let (coarse, fine) = cfg.grids()?;
    let mut b = Builder::new();
    let bank = build_filter_bank(cfg.levels, fine)?;
    let top = 2f64.powi(cfg.levels as i32 - 1);
    let mut defect = 0.0f64;
    for j in 0..=20000 {
        let r = top * j as f64 / 20000.0;
        let total: f64 = (0..=cfg.levels).map(|k| bank.band(k, &[r])).sum();
        defect = defect.max((total - 1.0).abs());
    }
    b.check("partition of unity defect", defect, 1e-12);

    let bandlimited = make_family(FamilyKind::Bandlimited, cfg.family_size.min(5), cfg.seed, fine, cfg.levels)?;
    let mut rep = 0.0f64;
    for u in &bandlimited {
        let mut sum = Field::zeros(fine);
        for p in lp_pieces(&bank, u)? {
            sum = sum.add(&p)?;
        }
        rep = rep.max(sum.sub(u)?.max_abs());
    }
    b.check("representation error", rep, 1e-10);

    let mut spread = |grid: Grid, record: bool| -> Result<f64> {
        let bank = build_filter_bank(cfg.levels, grid)?;
        let fam = make_family(cfg.family, cfg.family_size, cfg.seed, grid, cfg.levels)?;
        let pairs: Vec<(f64, f64)> = fam
            .par_iter()
            .map(|u| Ok((triebel_norm(&a, cfg.s, cfg.q, u, &bank)?, hs_norm(&a, cfg.s, u)?.value)))
            .collect::<Result<_>>()?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (i, (t, h)) in pairs.iter().enumerate() {
            if record {
                b.row(format!("member {i} F/H"), grid.size, *t, *h);
            }
            lo = lo.min(t / h);
            hi = hi.max(t / h);
        }
        if record {
            b.constant("r_min", lo);
            b.constant("r_max", hi);
        }
        Ok(hi / lo)
    };
    let c = spread(coarse, false)?;
    let f = spread(fine, true)?;
    b.stable_constant("ratio_spread", c, f);
    Ok(b.finish(cfg))
}

struct AtomStats {
    worst_atom: f64,
    support_ok: bool,
    reconstruction: f64,
    coefficient_constant: f64,
    domination: f64,
    synthesis: f64,
    atoms: usize,
    dropped: usize,
}

fn atom_stats(cfg: &SuiteConfig, a: &YoungFunction, grid: Grid, validate: bool) -> Result<(AtomStats, Vec<ReportRow>)> {
    let bank = build_filter_bank(cfg.levels, grid)?;
    let family = make_family(cfg.family, cfg.family_size, cfg.seed, grid, cfg.levels)?;
    let mut st = AtomStats {
        worst_atom: 0.0,
        support_ok: true,
        reconstruction: 0.0,
        coefficient_constant: 0.0,
        domination: 0.0,
        synthesis: 0.0,
        atoms: 0,
        dropped: 0,
    };
    let mut rows = Vec::new();
    for (i, u) in family.iter().enumerate() {
        let d = atomic_decompose(u, cfg.s, cfg.m, &bank, cfg.i_max)?;
        st.atoms += d.atom_count();
        st.dropped += d.scales.iter().map(|l| l.dropped).sum::<usize>();
        if validate {
            let checks: Vec<(f64, bool)> = d
                .scales
                .par_iter()
                .flat_map(|level| {
                    level.atoms.par_iter().map(move |atom| (level.scale, atom))
                })
                .map(|(scale, atom)| {
                    let c = atom_validate(&d.atom_field(scale, atom)?, scale, &atom.cube, cfg.m)?;
                    Ok((c.ratio, c.support_ok))
                })
                .collect::<Result<_>>()?;
            for (r, ok) in checks {
                st.worst_atom = st.worst_atom.max(r);
                st.support_ok &= ok;
            }
        }
        let u_norm = luxemburg_norm(a, u)?.value;
        let recon = d.reconstruct()?;
        st.reconstruction = st.reconstruction.max(luxemburg_norm(a, &recon.sub(u)?)?.value / u_norm);
        let coef = coefficient_norm(&d, a, cfg.q)?.value;
        st.coefficient_constant = st.coefficient_constant.max(coef / u_norm);
        st.domination = st.domination.max(d.maximal_domination(1e-10)?);
        st.synthesis = st.synthesis.max(triebel_norm(a, cfg.s, cfg.q, &recon, &bank)? / coef);
        rows.push(ReportRow { case: format!("member {i} coefficients"), resolution: grid.size, lhs: coef, rhs: u_norm, ratio: coef / u_norm });
    }
    Ok((st, rows))
}

fn atoms(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    let (coarse, fine) = cfg.grids()?;
    if cfg.i_max > cfg.levels {
        return Err(Error::Config(format!("i_max {} exceeds the {} bank levels", cfg.i_max, cfg.levels)));
    }
    let mut b = Builder::new();
    let (c, _) = atom_stats(cfg, &a, coarse, false)?;
    let (f, rows) = atom_stats(cfg, &a, fine, true)?;
    b.rows = rows;
    b.check("atom size ratio", f.worst_atom, 1.0 + 1e-6);
    b.check("atom support violations", if f.support_ok { 0.0 } else { 1.0 }, 0.0);
    b.check("reconstruction relative error", f.reconstruction, 1e-3);
    b.constant("atoms", f.atoms as f64);
    b.constant("dropped_atoms", f.dropped as f64);
    b.stable_constant("coefficient_constant", c.coefficient_constant, f.coefficient_constant);
    b.stable_constant("maximal_domination", c.domination, f.domination);
    b.stable_constant("synthesis_constant", c.synthesis, f.synthesis);
    Ok(b.finish(cfg))
}

fn strauss(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let a = cfg.young_function()?;
    if cfg.n < 2 {
        return Err(Error::Config("strauss needs n = 2 or 3".into()));
    }
    let (coarse, fine) = cfg.grids()?;
    let mut b = Builder::new();
    let conj = a.conjugate()?;
    let p_minus = a.delta2_indices()?.p_minus;
    b.constant("s_times_p_minus", cfg.s * p_minus);
    b.check("hypothesis s p_minus > 1 (margin)", 1.0 - cfg.s * p_minus, 0.0);
    let profiles = make_radial_profiles(cfg.family_size, cfg.seed, cfg.n, cfg.extent)?;
    let mut sup_at = |grid: Grid, record: bool| -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, p) in profiles.iter().enumerate() {
            let u = bessel_potential(cfg.s, &lift(p, grid)?)?;
            let prof = strauss_ratio(&a, cfg.s, &u)?;
            if record {
                let peak = prof.rows.iter().max_by(|x, y| x.ratio.total_cmp(&y.ratio)).copied();
                if let Some(r) = peak {
                    b.row(format!("member {i} peak rho={:.4}", r.rho), grid.size, r.value, r.bound);
                }
                if i == 0 {
                    let mut csv = String::from("rho,abs_u,bound,ratio\n");
                    for r in &prof.rows {
                        csv.push_str(&format!("{},{},{},{}\n", r.rho, r.value, r.bound, r.ratio));
                    }
                    b.tables.push(("ratio_profile.csv".into(), csv));
                }
            }
            worst = worst.max(prof.sup);
        }
        Ok(worst)
    };
    let c = sup_at(coarse, false)?;
    let f = sup_at(fine, true)?;
    b.stable_constant("decay_constant", c, f);

    if let YoungFunction::Power { p } = a {
        let h = fine.spacing();
        let rhos: Vec<f64> = log_space(2.0 * h, 0.5 * fine.half_extent, 40);
        let slope = decay_envelope_slope(&conj, cfg.n, p, &rhos)?;
        b.constant("envelope_slope", slope);
        b.check("power-law envelope slope", slope.abs(), 0.1);
    }

    let mut ball = 0.0f64;
    for (p, field) in profiles.iter().map(|p| (p, lift(p, fine))) {
        let f_norm = luxemburg_norm(&a, &field?)?.value;
        for radius in [0.5, 1.0] {
            for mult in [2.0, 3.0, 4.0] {
                let rho = mult * radius;
                if rho > 0.5 * fine.half_extent {
                    continue;
                }
                let mut x = vec![0.0; cfg.n];
                x[0] = rho;
                let value = ball_convolution(p, radius, &x).abs();
                ball = ball.max(value / ball_bound(&conj, cfg.n, radius, rho, f_norm)?);
            }
        }
    }
    b.constant("ball_convolution_constant", ball);
    b.check("ball convolution constant finite", if ball.is_finite() { 0.0 } else { 1.0 }, 0.0);
    Ok(b.finish(cfg))
}

/// Run the named suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    match cfg.suite.as_str() {
        "young-axioms" => young_axioms(cfg),
        "orlicz-norms" => orlicz_norms(cfg),
        "bessel-kernel" => bessel_kernel(cfg),
        "calderon-s1" => calderon_s1(cfg),
        "embedding-s1" => embedding_s1(cfg),
        "embedding-s2" => embedding_s2(cfg),
        "increment-kernel" => increment_kernel(cfg),
        "lp-equivalence" => lp_equivalence(cfg),
        "atoms" => atoms(cfg),
        "strauss" => strauss(cfg),
        other => Err(Error::Config(format!("unknown suite '{other}'"))),
    }
}

/// Write `report.json`, `rows.csv` (columns `case,resolution,lhs,rhs,ratio`)
/// and any extra tables into `dir`.
pub fn write_report(report: &VerificationReport, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    std::fs::write(&json, serde_json::to_string_pretty(report)?)?;
    let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.join("rows.csv"))?);
    writeln!(csv, "case,resolution,lhs,rhs,ratio")?;
    for r in &report.rows {
        writeln!(csv, "\"{}\",{},{},{},{}", r.case.replace('"', "'"), r.resolution, r.lhs, r.rhs, r.ratio)?;
    }
    csv.flush()?;
    for (name, contents) in &report.tables {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_deterministic_and_decay() {
        let g = Grid::new(1, 512, 8.0).unwrap();
        assert!(make_family(FamilyKind::Gaussians, 0, 1, g, 4).unwrap().is_empty());
        for kind in [FamilyKind::Gaussians, FamilyKind::Bumps, FamilyKind::Bandlimited, FamilyKind::RadialGaussians] {
            let a = make_family(kind, 4, 11, g, 4).unwrap();
            let b = make_family(kind, 4, 11, g, 4).unwrap();
            assert_eq!(a.len(), 4);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.samples(), y.samples());
                assert!(x.boundary_max() <= BOUNDARY_TOLERANCE);
            }
            let c = make_family(kind, 4, 12, g, 4).unwrap();
            assert_ne!(a[0].samples(), c[0].samples());
        }
    }

    #[test]
    fn bandlimited_members_have_compact_spectrum() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let cutoff = 2f64.powi(5);
        for u in make_family(FamilyKind::Bandlimited, 5, 3, g, 6).unwrap() {
            let spectrum = u.dft();
            for (k, z) in spectrum.iter().enumerate() {
                if g.frequency(k).abs() > cutoff {
                    assert!(z.norm() * g.spacing() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn family_kinds_parse() {
        for k in ["gaussians", "bumps", "bandlimited", "radial-gaussians"] {
            assert_eq!(k.parse::<FamilyKind>().unwrap().to_string(), k);
        }
        assert!(matches!("waves".parse::<FamilyKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(SuiteConfig::defaults("nope"), Err(Error::Config(_))));
        let mut cfg = SuiteConfig::defaults("embedding-s1").unwrap();
        cfg.s2 = Some(0.2);
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
        let mut cfg = SuiteConfig::defaults("young-axioms").unwrap();
        cfg.young = "power:p=0.5".into();
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
        let mut cfg = SuiteConfig::defaults("increment-kernel").unwrap();
        cfg.grid = 256;
        assert!(matches!(run_suite(&cfg), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn young_axioms_for_the_square() {
        let cfg = SuiteConfig::defaults("young-axioms").unwrap();
        let report = run_suite(&cfg).unwrap();
        assert!(report.pass, "{:?}", report.failed_checks());
        assert!(report.check("Young inequality violation").unwrap().value <= 1e-9);
        let dir = tempfile::tempdir().unwrap();
        let json = write_report(&report, dir.path()).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        for key in ["suite", "config", "rows", "summary", "pass"] {
            assert!(parsed.get(key).is_some(), "{key}");
        }
        let again = run_suite(&cfg).unwrap();
        assert!(report.same_outcome(&again));
    }
}
