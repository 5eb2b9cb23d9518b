//! The holomorphic strip functions
//!
//! ```text
//! McIntosh: F(z) = <A^{1-z} X B^z v, A^{1-z} X B^z v>
//! Cordes:   F(z) = <A^z B^z v, A^z B^z v>
//! ```
//!
//! on `0 <= Re z <= 1`, with the bilinear pairing `<v, w> = sum v_i w_i`.
//! The conjugated pairing would give `|.|^2`, which is not holomorphic.
//!
//! Evaluation works in the eigenbases: with `M = Q_A^T X Q_B` and `c = Q_B^T v`,
//! the coordinates of the McIntosh vector in the eigenbasis of `A` are
//! `lambda_k^{1-z} sum_l M_kl mu_l^z c_l`, and orthogonal changes of basis
//! preserve the bilinear pairing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{CordesInstance, McIntoshInstance};
use crate::linalg::Matrix;
use crate::quad::{adaptive_simpson, QuadOptions};
use crate::refinement::{kernel, ExponentialSum};
use crate::spectral::SpectralDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripMode {
    McIntosh,
    Cordes,
}

#[derive(Debug, Clone)]
enum Source {
    McIntosh(McIntoshInstance),
    Cordes(CordesInstance),
}

#[derive(Debug, Clone)]
pub struct StripFunction {
    source: Source,
    v: Vec<f64>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    /// `Q_A^T X Q_B` (McIntosh) or `Q_A^T Q_B` (Cordes).
    core: Matrix,
    /// `Q_B^T v`.
    vb: Vec<f64>,
}

impl StripFunction {
    pub fn mcintosh(inst: &McIntoshInstance, v: &[f64]) -> Result<Self> {
        if !inst.is_normalized() {
            return Err(Error::NotNormalized("the strip function needs ||AX|| = 1 = ||XB||"));
        }
        let (da, db) = (SpectralDecomposition::of(&inst.a)?, SpectralDecomposition::of(&inst.b)?);
        let core = Matrix::chain(&[&da.eigenvectors().transpose(), &inst.x, db.eigenvectors()])?;
        Self::build(Source::McIntosh(inst.clone()), v, &da, &db, core)
    }

    pub fn cordes(inst: &CordesInstance, v: &[f64]) -> Result<Self> {
        if !inst.is_normalized() {
            return Err(Error::NotNormalized("the strip function needs ||AB|| = 1"));
        }
        let (da, db) = (SpectralDecomposition::of(&inst.a)?, SpectralDecomposition::of(&inst.b)?);
        let core = da.eigenvectors().transpose().matmul(db.eigenvectors())?;
        Self::build(Source::Cordes(inst.clone()), v, &da, &db, core)
    }

    fn build(source: Source, v: &[f64], da: &SpectralDecomposition, db: &SpectralDecomposition, core: Matrix) -> Result<Self> {
        if v.len() != da.n() {
            return Err(Error::DimensionMismatch { expected: da.n(), found: v.len() });
        }
        Ok(Self {
            source,
            v: v.to_vec(),
            log_a: da.log_eigenvalues("strip function")?,
            log_b: db.log_eigenvalues("strip function")?,
            core,
            vb: db.coefficients(v),
        })
    }

    pub fn mode(&self) -> StripMode {
        match self.source {
            Source::McIntosh(_) => StripMode::McIntosh,
            Source::Cordes(_) => StripMode::Cordes,
        }
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// The interpolation exponent whose squared norm `F` reproduces on the
    /// real axis: `F(1 - r)` for McIntosh, `F(s)` for Cordes.
    pub fn evaluation_point(&self) -> f64 {
        match &self.source {
            Source::McIntosh(inst) => 1.0 - inst.r,
            Source::Cordes(inst) => inst.s,
        }
    }

    /// Coordinates of the vector being paired, in the eigenbasis of `A`.
    pub fn coordinates(&self, z: Complex64) -> Vec<Complex64> {
        let n = self.log_a.len();
        let bz: Vec<Complex64> = self.log_b.iter().zip(&self.vb).map(|(&l, &c)| (z * l).exp() * c).collect();
        let az = match self.source {
            Source::McIntosh(_) => Complex64::new(1.0, 0.0) - z,
            Source::Cordes(_) => z,
        };
        (0..n)
            .map(|k| {
                let inner: Complex64 = (0..n).map(|l| bz[l] * self.core[(k, l)]).sum();
                (az * self.log_a[k]).exp() * inner
            })
            .collect()
    }

    /// `F(z)` without the domain check.
    pub fn value(&self, z: Complex64) -> Complex64 {
        self.coordinates(z).iter().map(|w| w * w).sum()
    }

    /// Exponential sum representing `F(it)`.
    pub fn expansion(&self) -> Result<ExponentialSum> {
        match &self.source {
            Source::McIntosh(inst) => ExponentialSum::from_mcintosh(inst, &self.v),
            Source::Cordes(inst) => ExponentialSum::from_cordes(inst, &self.v),
        }
    }
}

/// Slack on `0 <= Re z <= 1`.
const DOMAIN_SLACK: f64 = 1e-12;

pub fn eval_strip(f: &StripFunction, z: Complex64) -> Result<Complex64> {
    if !(z.re >= -DOMAIN_SLACK && z.re <= 1.0 + DOMAIN_SLACK) || !z.im.is_finite() {
        return Err(Error::OutOfRange { name: "Re z", value: z.re, range: "closed interval [0, 1]" });
    }
    Ok(f.value(z))
}

pub fn expansion(f: &StripFunction) -> Result<ExponentialSum> {
    f.expansion()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// `values[i * ts.len() + j] = F(xs[i] + i ts[j])`.
    #[serde(skip)]
    pub values: Vec<Complex64>,
    /// `max_j |F(xs[i] + i ts[j])|`.
    pub column_max: Vec<f64>,
}

impl StripGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ts.len() + j]
    }

    pub fn max_modulus(&self) -> f64 {
        self.column_max.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with header `re_z,im_z,re_F,im_F,abs_F`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,re_F,im_F,abs_F\n");
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &t) in self.ts.iter().enumerate() {
                let w = self.at(i, j);
                out.push_str(&format!("{x},{t},{},{},{}\n", w.re, w.im, w.norm()));
            }
        }
        out
    }
}

/// `count` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn default_xs() -> Vec<f64> {
    linspace(0.0, 1.0, 21)
}

pub fn default_ts() -> Vec<f64> {
    linspace(-40.0, 40.0, 801)
}

pub fn eval_grid(f: &StripFunction, xs: &[f64], ts: &[f64]) -> Result<StripGrid> {
    if let Some(&x) = xs.iter().find(|&&x| !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x)) {
        return Err(Error::OutOfRange { name: "Re z", value: x, range: "closed interval [0, 1]" });
    }
    let rows: Vec<Vec<Complex64>> = xs.par_iter().map(|&x| ts.iter().map(|&t| f.value(Complex64::new(x, t))).collect()).collect();
    let column_max = rows.iter().map(|row| row.iter().fold(0.0, |m, w| f64::max(m, w.norm()))).collect();
    Ok(StripGrid { xs: xs.to_vec(), ts: ts.to_vec(), values: rows.into_iter().flatten().collect(), column_max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub value: Complex64,
    /// Harmonic measure of each line: `1 - x` and `x`.
    pub left_weight: f64,
    pub right_weight: f64,
    /// Bound on the boundary mass outside the truncation window.
    pub tail_bound: f64,
    pub evaluations: usize,
}

/// `int_{|s| > T} (1/2) P(pi x, pi s) ds <= (2/pi) sin(pi x) e^{-pi T} / (1 - e^{-pi T})^2`.
fn tail_mass(x: f64, t_window: f64) -> f64 {
    let e = (-PI * t_window).exp();
    2.0 / PI * (PI * x).sin() * e / (1.0 - e).powi(2)
}

/// Poisson representation of `F(z0)` from the two boundary lines:
///
/// ```text
/// F(x + i y) = int (1/2) P(pi x, pi (t - y)) F(it) dt
///            + int (1/2) P(pi (1 - x), pi (t - y)) F(1 + it) dt
/// ```
///
/// with both integrals truncated to `|t - y| <= t_window`.
pub fn poisson_reconstruct(f: &StripFunction, z0: Complex64, t_window: f64, quad_tol: f64) -> Result<Reconstruction> {
    let x = z0.re;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfRange { name: "Re z0", value: x, range: "open interval (0, 1)" });
    }
    if !(t_window > 0.0) {
        return Err(Error::Precondition(format!("t_window must be positive, got {t_window}")));
    }
    let y = z0.im;
    let max_freq = f.expansion().map(|s| s.max_abs_freq()).unwrap_or(1.0).max(1.0);
    let panels = ((2.0 * t_window * max_freq / PI).ceil() as usize).clamp(64, 1 << 16);
    let opts = QuadOptions::absolute(0.25 * quad_tol).with_panels(panels);
    let mut evaluations = 0;
    let mut line = |re: f64, abscissa: f64| {
        let r = adaptive_simpson(
            |s: f64| f.value(Complex64::new(re, y + s)) * (0.5 * kernel(abscissa, PI * s)),
            -t_window,
            t_window,
            opts,
        );
        evaluations += r.evaluations;
        r.value
    };
    let value = line(0.0, PI * x) + line(1.0, PI * (1.0 - x));
    Ok(Reconstruction {
        value,
        left_weight: 1.0 - x,
        right_weight: x,
        tail_bound: tail_mass(x, t_window) + tail_mass(1.0 - x, t_window),
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary3Report {
    /// `||A^r X B^{1-r} v||`.
    pub mid: f64,
    /// `sup_t ||A^{1+it} X B^{-it} v||` on the grid, refined.
    pub sup_left: f64,
    /// `sup_t ||A^{it} X B^{1-it} v||` on the grid, refined.
    pub sup_right: f64,
    /// `sup_left^r sup_right^{1-r}`.
    pub middle: f64,
    /// `||AX||^r ||XB||^{1-r}`.
    pub rhs: f64,
    pub chain_holds: bool,
    /// Local refinement moved a supremum by more than `1e-6`.
    pub refinement_changed: bool,
}

pub fn default_corollary_grid() -> Vec<f64> {
    linspace(-40.0, 40.0, 400)
}

fn refined_sup(g: impl Fn(f64) -> f64, ts: &[f64]) -> (f64, bool) {
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let grid_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut best = grid_max;
    for &i in order.iter().take(5) {
        let lo = if i > 0 { ts[i - 1] } else { ts[i] };
        let hi = if i + 1 < ts.len() { ts[i + 1] } else { ts[i] };
        for k in 0..=64 {
            let t = lo + (hi - lo) * k as f64 / 64.0;
            best = best.max(g(t));
        }
    }
    (best, best - grid_max > 1e-6)
}

/// Three-lines chain for the McIntosh strip at exponent `r`.
pub fn corollary3_bounds(inst: &McIntoshInstance, v: &[f64], r: f64, t_grid: &[f64]) -> Result<Corollary3Report> {
    crate::error::check_range("r", r, 0.0, 1.0, true)?;
    let inst = inst.with_r(r)?;
    let f = StripFunction::mcintosh(&inst, v)?;
    let cnorm = |z: Complex64| crate::linalg::cnorm(&f.coordinates(z));
    let mid = cnorm(Complex64::new(1.0 - r, 0.0));
    // Re z = 0 gives A^{1 - it} X B^{it}; Re z = 1 gives A^{-it} X B^{1 + it}.
    let (sup_left, moved_left) = refined_sup(|t| cnorm(Complex64::new(0.0, t)), t_grid);
    let (sup_right, moved_right) = refined_sup(|t| cnorm(Complex64::new(1.0, t)), t_grid);
    let middle = sup_left.powf(r) * sup_right.powf(1.0 - r);
    let (ax, xb) = inst.scales()?;
    let rhs = ax.powf(r) * xb.powf(1.0 - r);
    Ok(Corollary3Report {
        mid,
        sup_left,
        sup_right,
        middle,
        rhs,
        chain_holds: mid <= middle + 1e-9 && middle <= rhs + 1e-9,
        refinement_changed: moved_left || moved_right,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub interior_max: f64,
    pub interior_argmax: (f64, f64),
    /// Max over the rectangle boundary: both lines and the top and bottom rows.
    pub boundary_max: f64,
    pub interior_le_boundary: bool,
    /// `max |F - 1|` over the whole grid.
    pub max_deviation_from_one: f64,
    /// Decided only when the interior reaches `1 - 1e-9`: then `F` must be
    /// identically 1 on the grid within `1e-7`.
    pub constant_one: Option<bool>,
}

/// Requires `xs` to start at 0 and end at 1 and at least three rows and columns.
pub fn max_principle_probe(f: &StripFunction, xs: &[f64], ts: &[f64]) -> Result<MaxPrincipleReport> {
    if xs.len() < 3 || ts.len() < 3 || xs[0] != 0.0 || xs[xs.len() - 1] != 1.0 {
        return Err(Error::Precondition("grid must span Re z = 0 to 1 with at least 3 x 3 points".into()));
    }
    let grid = eval_grid(f, xs, ts)?;
    let (nx, nt) = (xs.len(), ts.len());
    let mut interior = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut boundary = f64::NEG_INFINITY;
    let mut deviation = 0.0f64;
    for i in 0..nx {
        for j in 0..nt {
            let w = grid.at(i, j);
            deviation = deviation.max((w - 1.0).norm());
            let m = w.norm();
            if i == 0 || i == nx - 1 || j == 0 || j == nt - 1 {
                boundary = boundary.max(m);
            } else if m > interior.0 {
                interior = (m, (xs[i], ts[j]));
            }
        }
    }
    Ok(MaxPrincipleReport {
        interior_max: interior.0,
        interior_argmax: interior.1,
        boundary_max: boundary,
        interior_le_boundary: interior.0 <= boundary + 1e-8,
        max_deviation_from_one: deviation,
        constant_one: (interior.0 >= 1.0 - 1e-9).then_some(deviation <= 1e-7),
    })
}

/// `|F_x + i F_y|` by central differences; zero for holomorphic `F` up to
/// `h^2 |F'''| / 3`.
pub fn cauchy_riemann_residual(f: &StripFunction, z: Complex64, h: f64) -> f64 {
    let dx = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
    let dy = (f.value(z + Complex64::new(0.0, h)) - f.value(z - Complex64::new(0.0, h))) / (2.0 * h);
    (dx + Complex64::i() * dy).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolomorphyReport {
    pub residual_h: f64,
    pub residual_half: f64,
    /// Close to 4 for second-order convergence.
    pub ratio: f64,
}

/// Largest Cauchy-Riemann residual over `points` at steps `h` and `h / 2`.
pub fn holomorphy_probe(f: &StripFunction, points: &[Complex64], h: f64) -> HolomorphyReport {
    let worst = |h: f64| points.iter().map(|&z| cauchy_riemann_residual(f, z, h)).fold(0.0, f64::max);
    let (residual_h, residual_half) = (worst(h), worst(0.5 * h));
    HolomorphyReport { residual_h, residual_half, ratio: residual_h / residual_half }
}
