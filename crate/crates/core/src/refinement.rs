//! Spectral separation and the certified improvement constant.
//!
//! For a normalized McIntosh instance the function
//! `F(z) = <A^{1-z} X B^z v, A^{1-z} X B^z v>` (bilinear, no conjugation) is
//! bounded by 1 on the strip `0 <= Re z <= 1` and `F(1 - r) = ||A^r X B^{1-r} v||^2`.
//! On `Re z = 0` it is an exponential sum whose frequencies are
//! `log mu_l + log mu_l' - 2 log lambda_k`. When those stay away from zero the
//! sum cannot sit near 1 on a long window, and the Poisson representation of
//! `F(1 - r)` loses a definite amount of kernel mass.
//!
//! The constant returned by [`certified_improvement`] is computed as follows,
//! with the strip rescaled to width `pi` so that `P(x, y) = sin x / (cosh y - cos x)`
//! is the Poisson kernel:
//!
//! * `delta = d / 2`, `ell = 2 sqrt(n) / delta`, `L = pi * ell`;
//! * `m(L) = int_{3L/4}^{L} P(x0, y) dy`, maximized over windows `L' >= L`
//!   (the averaging bound holds on every longer window, and `m` is unimodal);
//! * deficit in `F`: `(2 / pi) * m`, since the boundary density is `P / (2 pi)`
//!   and the symmetric rearrangement bound removes `4 int_{3L/4}^{L}` of it;
//! * ratio deficit `c = 1 - sqrt(1 - deficit)`, because `F` is the squared norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::approx::{default_samples, sum_sup, SUP_WINDOW};
use crate::error::{check_range, Error, Result};
use crate::inequalities::{evaluate_cordes, evaluate_mcintosh, CordesInstance, InequalityReport, McIntoshInstance};
use crate::linalg::dot;
use crate::quad::{adaptive_simpson, QuadOptions};
use crate::spectral::{assert_spd, Definiteness, SpectralDecomposition};

/// Slack allowed when comparing an observed ratio against `1 - c_cert`.
pub const SOUNDNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    /// `|log l_i + log l_j - 2 log m_k|` and `|2 log l_i - log m_j - log m_k|`.
    McIntosh,
    /// `|log l_i + log l_j + 2 log m_k|` and `|2 log l_i + log m_j + log m_k|`.
    Cordes,
}

/// Which boundary line of the strip carries the separated frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripSide {
    /// `Re z = 0`.
    Left,
    /// `Re z = 1`.
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralGap {
    /// Minimum over pairs from `A` and one eigenvalue of `B`.
    pub term1: f64,
    /// Minimum over one eigenvalue of `A` and pairs from `B`.
    pub term2: f64,
    pub d: f64,
    /// `(i, j, k)` attaining `term1`: `lambda_i, lambda_j, mu_k`.
    pub term1_witness: [usize; 3],
    /// `(i, j, k)` attaining `term2`: `lambda_i, mu_j, mu_k`.
    pub term2_witness: [usize; 3],
    pub sign_mode: SignMode,
}

impl SpectralGap {
    /// `Left` when `term2 >= term1` (ties included): the line `Re z = 0`
    /// carries the `term2` family directly, the other family is reached
    /// through the adjoint instance.
    pub fn preferred_side(&self) -> StripSide {
        if self.term2 >= self.term1 {
            StripSide::Left
        } else {
            StripSide::Right
        }
    }

    pub fn for_mcintosh(inst: &McIntoshInstance) -> Result<Self> {
        if !inst.is_normalized() {
            return Err(Error::NotNormalized("the spectral distance needs ||AX|| = 1 = ||XB||"));
        }
        let a = SpectralDecomposition::of(&inst.a)?;
        let b = SpectralDecomposition::of(&inst.b)?;
        compute_d(a.eigenvalues(), b.eigenvalues(), SignMode::McIntosh)
    }

    pub fn for_cordes(inst: &CordesInstance) -> Result<Self> {
        if !inst.is_normalized() {
            return Err(Error::NotNormalized("the spectral distance needs ||AB|| = 1"));
        }
        let a = SpectralDecomposition::of(&inst.a)?;
        let b = SpectralDecomposition::of(&inst.b)?;
        compute_d(a.eigenvalues(), b.eigenvalues(), SignMode::Cordes)
    }
}

fn logs(spectrum: &[f64], operation: &'static str) -> Result<Vec<f64>> {
    if let Some(&bad) = spectrum.iter().find(|&&x| !(x > 0.0)) {
        if !bad.is_finite() && !bad.is_nan() {
            return Err(Error::NonFinite);
        }
        return Err(Error::PsdOnly { min_eigenvalue: bad, operation });
    }
    Ok(spectrum.iter().map(|x| x.ln()).collect())
}

/// Brute force over all index triples; exact minima with witnesses.
fn min_triple(pair_side: &[f64], single_side: &[f64], sign: f64) -> (f64, [usize; 3]) {
    let mut best = (f64::INFINITY, [0, 0, 0]);
    for (i, &p) in pair_side.iter().enumerate() {
        for (j, &q) in pair_side.iter().enumerate().skip(i) {
            for (k, &s) in single_side.iter().enumerate() {
                let v = (p + q + sign * 2.0 * s).abs();
                if v < best.0 {
                    best = (v, [i, j, k]);
                }
            }
        }
    }
    best
}

pub fn compute_d(spectrum_a: &[f64], spectrum_b: &[f64], sign_mode: SignMode) -> Result<SpectralGap> {
    if spectrum_a.is_empty() || spectrum_b.is_empty() {
        return Err(Error::Degenerate("empty spectrum"));
    }
    let la = logs(spectrum_a, "spectral distance")?;
    let lb = logs(spectrum_b, "spectral distance")?;
    let sign = match sign_mode {
        SignMode::McIntosh => -1.0,
        SignMode::Cordes => 1.0,
    };
    let (term1, w1) = min_triple(&la, &lb, sign);
    // |2 a_i + s (b_j + b_k)| = |(b_j + b_k) + s 2 a_i| for s = +-1
    let (term2, [j, k, i]) = min_triple(&lb, &la, sign);
    Ok(SpectralGap { term1, term2, d: term1 + term2, term1_witness: w1, term2_witness: [i, j, k], sign_mode })
}

/// Finite sum `sum_j c_j e^{i d_j t}` with real coefficients and distinct
/// frequencies, sorted by frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialSum {
    terms: Vec<(f64, f64)>,
}

impl ExponentialSum {
    /// Merges exactly equal frequencies and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = terms.into_iter().collect();
        raw.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (c, d) in raw {
            match merged.last_mut() {
                Some(last) if last.1 == d => last.0 += c,
                _ => merged.push((c, d)),
            }
        }
        merged.retain(|&(c, _)| c != 0.0);
        Self { terms: merged }
    }

    /// `F(it)` for a McIntosh instance and vector `v`:
    /// `sum_k e^{-2 i alpha_k t} (sum_l c_kl e^{i beta_l t})^2` with
    /// `c_kl = lambda_k <v, b_l> <X b_l, a_k>`.
    pub fn from_mcintosh(inst: &McIntoshInstance, v: &[f64]) -> Result<Self> {
        let da = SpectralDecomposition::of(&inst.a)?;
        let db = SpectralDecomposition::of(&inst.b)?;
        let alpha = da.log_eigenvalues("boundary expansion")?;
        let beta = db.log_eigenvalues("boundary expansion")?;
        let n = inst.n();
        let vb = db.coefficients(v);
        let c = |k: usize, l: usize| {
            let xb = inst.x.mul_vec(&db.eigenvector(l));
            da.eigenvalues()[k] * vb[l] * dot(&xb, &da.eigenvector(k))
        };
        Ok(Self::square_structure(n, &alpha, &beta, -2.0, c))
    }

    /// `G(it) = ||A^{it} B^{it} v||^2` (bilinear) for a Cordes instance:
    /// frequencies `2 alpha_k + beta_l + beta_l'`, `c_kl = <v, b_l> <b_l, a_k>`.
    pub fn from_cordes(inst: &CordesInstance, v: &[f64]) -> Result<Self> {
        let da = SpectralDecomposition::of(&inst.a)?;
        let db = SpectralDecomposition::of(&inst.b)?;
        let alpha = da.log_eigenvalues("boundary expansion")?;
        let beta = db.log_eigenvalues("boundary expansion")?;
        let vb = db.coefficients(v);
        let c = |k: usize, l: usize| vb[l] * dot(&db.eigenvector(l), &da.eigenvector(k));
        Ok(Self::square_structure(inst.n(), &alpha, &beta, 2.0, c))
    }

    fn square_structure(n: usize, alpha: &[f64], beta: &[f64], alpha_sign: f64, c: impl Fn(usize, usize) -> f64) -> Self {
        let mut terms = Vec::with_capacity(n * n * n);
        for k in 0..n {
            let ck: Vec<f64> = (0..n).map(|l| c(k, l)).collect();
            for l in 0..n {
                for m in 0..n {
                    terms.push((ck[l] * ck[m], beta[l] + beta[m] + alpha_sign * alpha[k]));
                }
            }
        }
        Self::new(terms)
    }

    /// `(c_j, d_j)` pairs.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest `|d_j|` among terms with `d_j != 0`.
    pub fn min_abs_freq(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.1.abs()).filter(|&d| d > 0.0).min_by(f64::total_cmp)
    }

    pub fn sigma_lo(&self) -> Option<f64> {
        self.terms.first().map(|t| t.1)
    }

    pub fn sigma_hi(&self) -> Option<f64> {
        self.terms.last().map(|t| t.1)
    }

    pub fn max_abs_freq(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.1.abs()))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|&(c, d)| Complex64::from_polar(c, d * t)).sum()
    }

    /// `int_a^b` in closed form.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, d)| {
                if d == 0.0 {
                    Complex64::new(c * (b - a), 0.0)
                } else {
                    (Complex64::new(0.0, d * b).exp() - Complex64::new(0.0, d * a).exp()) * Complex64::new(0.0, -c / d)
                }
            })
            .sum()
    }

    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.0.abs()).sum()
    }

    pub fn coefficient_l2(&self) -> f64 {
        self.terms.iter().map(|t| t.0 * t.0).sum::<f64>().sqrt()
    }

    /// Dense-sampling estimate of `sup_t |sum|` (a lower bound).
    pub fn sup_estimate(&self) -> f64 {
        sum_sup(self, SUP_WINDOW, default_samples(self.max_abs_freq(), SUP_WINDOW)).value
    }
}

/// `P(x, y) = sin x / (cosh y - cos x)` for `0 < x < pi`, evaluated as
/// `sin x / (2 sinh^2(y/2) + 2 sin^2(x/2))` to avoid cancellation near the origin.
pub fn poisson_kernel(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x < PI) || !y.is_finite() {
        return Err(Error::OutOfRange { name: "x", value: x, range: "open interval (0, pi)" });
    }
    Ok(kernel(x, y))
}

#[inline]
pub(crate) fn kernel(x: f64, y: f64) -> f64 {
    let sh = (0.5 * y).sinh();
    let s = (0.5 * x).sin();
    x.sin() / (2.0 * (sh * sh + s * s))
}

/// Relative tolerance for kernel window integrals.
pub const WINDOW_REL_TOL: f64 = 1e-10;

/// `int_a^b P(x, y) dy` by adaptive quadrature, `0 <= a <= b`.
pub fn kernel_window(x: f64, a: f64, b: f64) -> Result<f64> {
    poisson_kernel(x, a)?;
    let r = adaptive_simpson(|y| kernel(x, y), a, b, QuadOptions::relative(WINDOW_REL_TOL).with_panels(32));
    Ok(r.value)
}

/// `int_R P(x, y) dy`, truncated at `|y| = 50` (tail below `4 e^{-50}`).
pub fn kernel_mass(x: f64) -> Result<f64> {
    poisson_kernel(x, 0.0)?;
    // the peak has width ~x near the origin; split there
    let knee = (4.0 * x).min(1.0);
    let opts = QuadOptions::absolute(1e-12).with_panels(64);
    let near = adaptive_simpson(|y| kernel(x, y), 0.0, knee, opts).value;
    let far = adaptive_simpson(|y| kernel(x, y), knee, 50.0, opts).value;
    Ok(2.0 * (near + far))
}

/// Window length maximizing `m(L) = int_{3L/4}^{L} P(x, y) dy`, the root of
/// `P(x, L) = (3/4) P(x, 3L/4)`.
pub fn peak_window(x: f64) -> Result<f64> {
    poisson_kernel(x, 0.0)?;
    let h = |l: f64| kernel(x, l) - 0.75 * kernel(x, 0.75 * l);
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedBound {
    pub n: usize,
    pub r: f64,
    pub d: f64,
    pub delta: f64,
    /// Half-length of the averaging window on the boundary line, in strip units.
    pub ell: f64,
    pub strip_side: StripSide,
    /// Kernel abscissa in the width-`pi` strip.
    pub abscissa: f64,
    /// Window end actually used (`>= pi * ell`), width-`pi` units.
    pub window: f64,
    /// `2 int_{3L/4}^{L} P(abscissa, y) dy`.
    pub poisson_gain: f64,
    /// `2 (pi - abscissa)`.
    pub kernel_mass: f64,
    /// Certified drop of the boundary-function value below 1.
    pub deficit: f64,
    /// `||A^r X B^{1-r}|| <= (1 - c_cert) ||AX||^r ||XB||^{1-r}`.
    pub c_cert: f64,
    /// `ln c_cert`, finite even when `c_cert` underflows to 0 (far windows).
    pub log_c_cert: f64,
}

impl CertifiedBound {
    pub fn ratio_bound(&self) -> f64 {
        1.0 - self.c_cert
    }
}

/// Window start beyond which the kernel is replaced by its exponential
/// asymptotics when computing `log_c_cert` (relative error below `1e-12`).
const FAR_WINDOW: f64 = 30.0;

pub fn certified_improvement(n: usize, r: f64, d: f64, side: StripSide) -> Result<CertifiedBound> {
    if n == 0 {
        return Err(Error::Degenerate("n = 0"));
    }
    check_range("r", r, 0.0, 1.0, true)?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NoRefinement { d });
    }
    let delta = d / 2.0;
    let ell = 2.0 * (n as f64).sqrt() / delta;
    let abscissa = match side {
        StripSide::Left => PI * (1.0 - r),
        StripSide::Right => PI * r,
    };
    let window = (PI * ell).max(peak_window(abscissa)?);
    let (lo, hi) = (0.75 * window, window);
    let m = kernel_window(abscissa, lo, hi)?;
    let deficit = (2.0 / PI) * m;
    // 1 - sqrt(1 - e) without cancellation
    let c_cert = deficit / (1.0 + (1.0 - deficit).sqrt());
    let log_m = if lo >= FAR_WINDOW {
        // P(x, y) = 2 sin x e^{-y} (1 + O(e^{-y})) here
        (2.0 * abscissa.sin()).ln() - lo + (-(-(hi - lo)).exp_m1()).ln()
    } else {
        m.ln()
    };
    let log_c_cert = (2.0 / PI).ln() + log_m - (1.0 + (1.0 - deficit).sqrt()).ln();
    Ok(CertifiedBound {
        n,
        r,
        d,
        delta,
        ell,
        strip_side: side,
        abscissa,
        window,
        poisson_gain: 2.0 * m,
        kernel_mass: 2.0 * (PI - abscissa),
        deficit,
        c_cert,
        log_c_cert,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapePoint {
    pub n: usize,
    pub d: f64,
    /// `sqrt(n) / d`.
    pub x: f64,
    pub log_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub points: Vec<ShapePoint>,
    /// Least-squares fit `log c = a - b x`; absent for a degenerate grid.
    pub fit: Option<(f64, f64)>,
    /// `a' = min (log c + b x)`, so `log c >= a' - b x` on every grid point.
    pub envelope_intercept: Option<f64>,
    pub degenerate: bool,
    /// `log c` nonincreasing in `x` along the sorted grid.
    pub monotone: bool,
    pub consistent: bool,
}

pub fn asymptotic_shape_check(n_grid: &[usize], d_grid: &[f64], r: f64) -> Result<ShapeReport> {
    let mut points = Vec::new();
    for &n in n_grid {
        for &d in d_grid {
            let b = certified_improvement(n, r, d, StripSide::Left)?;
            points.push(ShapePoint { n, d, x: (n as f64).sqrt() / d, log_c: b.c_cert.ln() });
        }
    }
    points.sort_by(|p, q| p.x.total_cmp(&q.x));
    let monotone = points.windows(2).all(|w| w[1].log_c <= w[0].log_c + 1e-12 * w[0].log_c.abs().max(1.0));
    let mean_x = points.iter().map(|p| p.x).sum::<f64>() / points.len().max(1) as f64;
    let sxx: f64 = points.iter().map(|p| (p.x - mean_x).powi(2)).sum();
    let degenerate = points.len() < 2 || sxx <= 1e-12 * mean_x.abs().max(1.0);
    if degenerate {
        return Ok(ShapeReport { points, fit: None, envelope_intercept: None, degenerate, monotone, consistent: false });
    }
    let mean_y = points.iter().map(|p| p.log_c).sum::<f64>() / points.len() as f64;
    let sxy: f64 = points.iter().map(|p| (p.x - mean_x) * (p.log_c - mean_y)).sum();
    let b = -sxy / sxx;
    let a = mean_y + b * mean_x;
    let envelope = points.iter().map(|p| p.log_c + b * p.x).fold(f64::INFINITY, f64::min);
    Ok(ShapeReport { points, fit: Some((a, b)), envelope_intercept: Some(envelope), degenerate, monotone, consistent: b > 0.0 && monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub eta: f64,
    pub terms: usize,
    /// `2 sqrt(n) / eta`.
    pub half_window: f64,
    /// `|int_{-h}^{h} sum|`, by quadrature.
    pub lhs: f64,
    /// `h * sup |sum|`.
    pub rhs: f64,
    pub sup_estimate: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Relative slack for the lemma checks (quadrature and sampling error).
pub const LEMMA_TOL: f64 = 1e-8;

pub fn lemma1_check(sum: &ExponentialSum, eta: f64) -> Result<Lemma1Report> {
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!("eta must be positive, got {eta}")));
    }
    if let Some(&(_, d)) = sum.terms().iter().find(|t| t.1.abs() < eta) {
        return Err(Error::Precondition(format!("frequency {d} is below eta = {eta}")));
    }
    let n = sum.len().max(1);
    let h = 2.0 * (n as f64).sqrt() / eta;
    let periods = (h * sum.max_abs_freq() / PI).ceil() as usize;
    let opts = QuadOptions::absolute(1e-12 * sum.coefficient_l1().max(1e-300) * h).with_panels((4 * periods).clamp(16, 1 << 16));
    let lhs = adaptive_simpson(|t| sum.eval(t), -h, h, opts).value.norm();
    let sup_estimate = sum.sup_estimate();
    let rhs = h * sup_estimate;
    let margin = rhs - lhs;
    let holds = lhs <= rhs + LEMMA_TOL * rhs.max(1e-300);
    Ok(Lemma1Report { eta, terms: sum.len(), half_window: h, lhs, rhs, sup_estimate, margin, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Report {
    pub x: f64,
    pub g_sup: f64,
    pub f_monotone: bool,
    pub half_mass: bool,
    /// `int_0^x f g`.
    pub lhs: f64,
    /// `sup|g| (int_0^{3x/4} f - int_{3x/4}^x f)`.
    pub rhs: f64,
    pub margin: f64,
    /// Absent when a precondition failed.
    pub holds: Option<bool>,
}

/// Grid used for the monotonicity check and the `sup |g|` estimate.
pub const LEMMA2_GRID: usize = 4001;

/// Checks the rearrangement bound on `[0, x]`. `g_sup` overrides the sampled
/// estimate of `sup |g|` when the caller knows it exactly.
pub fn lemma2_check(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, x: f64, g_sup: Option<f64>) -> Result<Lemma2Report> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Precondition(format!("x must be positive, got {x}")));
    }
    let grid: Vec<f64> = (0..LEMMA2_GRID).map(|i| x * i as f64 / (LEMMA2_GRID - 1) as f64).collect();
    let fs: Vec<f64> = grid.iter().map(|&z| f(z)).collect();
    let f_scale = fs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let f_monotone = fs.iter().all(|&v| v >= 0.0) && fs.windows(2).all(|w| w[1] <= w[0] + 1e-12 * f_scale);
    let g_sup = g_sup.unwrap_or_else(|| grid.iter().fold(0.0, |m, &z| m.max(g(z).abs())));

    let opts = QuadOptions::absolute(1e-12 * (f_scale.max(1.0) * g_sup.max(1.0)) * x).with_panels(64);
    let g_int = adaptive_simpson(&g, 0.0, x, opts).value;
    let half_mass = g_int <= 0.5 * x * g_sup * (1.0 + LEMMA_TOL) + 1e-12;
    let lhs = adaptive_simpson(|z| f(z) * g(z), 0.0, x, opts).value;
    let head = adaptive_simpson(&f, 0.0, 0.75 * x, opts).value;
    let tail = adaptive_simpson(&f, 0.75 * x, x, opts).value;
    let rhs = g_sup * (head - tail);
    let margin = rhs - lhs;
    let holds = (f_monotone && half_mass).then(|| lhs <= rhs + LEMMA_TOL * rhs.abs().max(1e-12));
    Ok(Lemma2Report { x, g_sup, f_monotone, half_mass, lhs, rhs, margin, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedReport {
    pub plain: InequalityReport,
    pub gap: Option<SpectralGap>,
    pub bound: Option<CertifiedBound>,
    /// `ratio <= 1 - c_cert + SOUNDNESS_TOL`; absent without a certificate.
    pub sound: Option<bool>,
    pub note: Option<String>,
}

impl RefinedReport {
    fn unrefined(plain: InequalityReport, gap: Option<SpectralGap>, note: &str) -> Self {
        Self { plain, gap, bound: None, sound: None, note: Some(note.to_string()) }
    }

    fn certified(plain: InequalityReport, gap: SpectralGap, bound: CertifiedBound) -> Self {
        let sound = plain.ratio.map(|q| q <= bound.ratio_bound() + SOUNDNESS_TOL);
        Self { plain, gap: Some(gap), bound: Some(bound), sound, note: None }
    }
}

fn is_spd(m: &crate::spectral::SymMatrix) -> Result<bool> {
    Ok(assert_spd(&SpectralDecomposition::of(m)?, None)? == Definiteness::Spd)
}

/// Plain evaluation plus the certified constant, with `side` overriding the
/// gap-based choice of boundary line.
pub fn refined_mcintosh_with(inst: &McIntoshInstance, side: Option<StripSide>) -> Result<RefinedReport> {
    check_range("r", inst.r, 0.0, 1.0, true)?;
    let inst = inst.normalize()?;
    let plain = evaluate_mcintosh(&inst)?;
    if !is_spd(&inst.a)? || !is_spd(&inst.b)? {
        return Ok(RefinedReport::unrefined(plain, None, "A or B is only positive semidefinite; d is undefined"));
    }
    let gap = SpectralGap::for_mcintosh(&inst)?;
    if gap.d <= 0.0 {
        return Ok(RefinedReport::unrefined(plain, Some(gap), "d = 0; no refinement certified"));
    }
    let side = side.unwrap_or_else(|| gap.preferred_side());
    let bound = certified_improvement(inst.n(), inst.r, gap.d, side)?;
    Ok(RefinedReport::certified(plain, gap, bound))
}

pub fn refined_mcintosh(inst: &McIntoshInstance) -> Result<RefinedReport> {
    refined_mcintosh_with(inst, None)
}

/// Both boundary lines evaluate the Poisson kernel at `pi s`; the left line
/// carries `2 alpha + beta + beta'`, the right one the adjoint family.
pub fn refined_cordes_with(inst: &CordesInstance, side: Option<StripSide>) -> Result<RefinedReport> {
    check_range("s", inst.s, 0.0, 1.0, true)?;
    let inst = inst.normalize()?;
    let plain = evaluate_cordes(&inst)?;
    if !is_spd(&inst.a)? || !is_spd(&inst.b)? {
        return Ok(RefinedReport::unrefined(plain, None, "A or B is only positive semidefinite; d* is undefined"));
    }
    let gap = SpectralGap::for_cordes(&inst)?;
    if gap.d <= 0.0 {
        return Ok(RefinedReport::unrefined(plain, Some(gap), "d* = 0; no refinement certified"));
    }
    let side = side.unwrap_or_else(|| gap.preferred_side());
    let r = match side {
        StripSide::Left => 1.0 - inst.s,
        StripSide::Right => inst.s,
    };
    let bound = certified_improvement(inst.n(), r, gap.d, side)?;
    Ok(RefinedReport::certified(plain, gap, bound))
}

pub fn refined_cordes(inst: &CordesInstance) -> Result<RefinedReport> {
    refined_cordes_with(inst, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::rng::CounterRng;
    use crate::spectral::SymMatrix;
    use proptest::prelude::*;

    /// Antiderivative of the kernel, `2 atan(tanh(y/2) cot(x/2))`, differenced
    /// through the atan subtraction formula so far windows keep full precision.
    fn window_closed_form(x: f64, a: f64, b: f64) -> f64 {
        let k = 1.0 / (0.5 * x).tan();
        let (ua, ub) = ((0.5 * a).tanh() * k, (0.5 * b).tanh() * k);
        let diff = k * (0.5 * (b - a)).sinh() / ((0.5 * a).cosh() * (0.5 * b).cosh());
        2.0 * (diff / (1.0 + ua * ub)).atan()
    }

    fn brute_d(a: &[f64], b: &[f64], sign: f64) -> (f64, f64) {
        let mut t1 = f64::INFINITY;
        let mut t2 = f64::INFINITY;
        for &x in a {
            for &y in a {
                for &z in b {
                    t1 = t1.min((x.ln() + y.ln() + sign * 2.0 * z.ln()).abs());
                }
            }
        }
        for &x in a {
            for &y in b {
                for &z in b {
                    t2 = t2.min((2.0 * x.ln() + sign * (y.ln() + z.ln())).abs());
                }
            }
        }
        (t1, t2)
    }

    #[test]
    fn compute_d_examples() {
        let g = compute_d(&[1.0], &[1.0], SignMode::McIntosh).unwrap();
        assert_eq!(g.d, 0.0);

        let g = compute_d(&[1.0, 2.0], &[8.0], SignMode::McIntosh).unwrap();
        let l2 = 2f64.ln();
        assert!((g.term1 - 4.0 * l2).abs() < 1e-14);
        assert!((g.term2 - 4.0 * l2).abs() < 1e-14);
        assert!((g.d - 8.0 * l2).abs() < 1e-14);
        assert_eq!(g.term1_witness, [1, 1, 0]);

        let g = compute_d(&[2.0, 0.5], &[0.5, 2.0], SignMode::Cordes).unwrap();
        assert_eq!(g.d, 0.0);

        assert!(compute_d(&[0.0, 1.0], &[1.0], SignMode::McIntosh).is_err());
    }

    #[test]
    fn compute_d_matches_exhaustive_enumeration() {
        let mut rng = CounterRng::new(5);
        for _ in 0..50 {
            let n = rng.int_in(1, 6);
            let a: Vec<f64> = (0..n).map(|_| rng.log_uniform(0.05, 20.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.log_uniform(0.05, 20.0)).collect();
            for (mode, sign) in [(SignMode::McIntosh, -1.0), (SignMode::Cordes, 1.0)] {
                let g = compute_d(&a, &b, mode).unwrap();
                let (t1, t2) = brute_d(&a, &b, sign);
                assert!((g.term1 - t1).abs() < 1e-14 && (g.term2 - t2).abs() < 1e-14);
                let [i, j, k] = g.term1_witness;
                assert_eq!((a[i].ln() + a[j].ln() + sign * 2.0 * b[k].ln()).abs(), g.term1);
                let [i, j, k] = g.term2_witness;
                assert_eq!((2.0 * a[i].ln() + sign * (b[j].ln() + b[k].ln())).abs(), g.term2);
            }
        }
    }

    proptest! {
        #[test]
        fn compute_d_symmetries(
            a in prop::collection::vec(0.05f64..20.0, 1..5),
            b in prop::collection::vec(0.05f64..20.0, 1..5),
        ) {
            let g = compute_d(&a, &b, SignMode::McIntosh).unwrap();
            let mut ar = a.clone();
            ar.reverse();
            let gr = compute_d(&ar, &b, SignMode::McIntosh).unwrap();
            prop_assert!((g.d - gr.d).abs() < 1e-14);
            let swapped = compute_d(&b, &a, SignMode::McIntosh).unwrap();
            prop_assert!((g.term1 - swapped.term2).abs() < 1e-14);
            prop_assert!((g.term2 - swapped.term1).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_examples() {
        assert!((poisson_kernel(PI / 2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        for x in [0.3, 1.0, 2.5] {
            let p = poisson_kernel(x, 10.0).unwrap();
            assert!(p <= 2.0 * x.sin() * (-10f64).exp() * (1.0 + 1e-3));
            assert!(p > 0.0);
            assert_eq!(poisson_kernel(x, -3.0).unwrap(), poisson_kernel(x, 3.0).unwrap());
            assert!(poisson_kernel(x, 1.0).unwrap() < poisson_kernel(x, 0.5).unwrap());
        }
        assert!(poisson_kernel(0.0, 1.0).is_err());
        assert!(poisson_kernel(PI, 1.0).is_err());
    }

    #[test]
    fn kernel_mass_identity() {
        for i in 1..=30 {
            let x = 0.1 * i as f64;
            let m = kernel_mass(x).unwrap();
            assert!((m - 2.0 * (PI - x)).abs() < 1e-6, "x={x}: {m}");
        }
        assert!((kernel_mass(PI / 2.0).unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn kernel_window_matches_antiderivative() {
        for x in [0.05, 0.7, PI / 2.0, 2.9] {
            for (a, b) in [(0.0, 1.0), (3.0, 4.0), (30.0, 40.0), (300.0, 400.0)] {
                let q = kernel_window(x, a, b).unwrap();
                let c = window_closed_form(x, a, b);
                assert!(((q - c) / c).abs() < 1e-8, "x={x} [{a},{b}]: {q} vs {c}");
            }
        }
    }

    #[test]
    fn peak_window_is_stationary() {
        for x in [0.2, 1.0, 2.0, 3.0] {
            let l = peak_window(x).unwrap();
            let m = |l: f64| window_closed_form(x, 0.75 * l, l);
            assert!(m(l) >= m(0.99 * l) && m(l) >= m(1.01 * l));
        }
    }

    #[test]
    fn certificate_examples() {
        let b = certified_improvement(2, 0.5, 8.0 * 2f64.ln(), StripSide::Left).unwrap();
        assert!(b.c_cert > 0.0 && b.c_cert < 1.0);
        // Oracle: closed-form window mass through the same conversion.
        let m = window_closed_form(b.abscissa, 0.75 * b.window, b.window);
        let e = 2.0 * m / PI;
        let c = 1.0 - (1.0 - e).sqrt();
        assert!(((b.c_cert - c) / c).abs() < 1e-8);
        assert!((b.kernel_mass - PI).abs() < 1e-15);

        let c1 = certified_improvement(4, 0.5, 0.1, StripSide::Left).unwrap().c_cert;
        let c2 = certified_improvement(4, 0.5, 1.0, StripSide::Left).unwrap().c_cert;
        let c3 = certified_improvement(4, 0.5, 10.0, StripSide::Left).unwrap().c_cert;
        assert!(0.0 < c1 && c1 <= c2 && c2 <= c3);

        // Large d: the window is capped at the kernel peak.
        let far = certified_improvement(4, 0.5, 1e6, StripSide::Left).unwrap();
        let cap = certified_improvement(4, 0.5, 1e9, StripSide::Left).unwrap();
        assert_eq!(far.c_cert, cap.c_cert);
        assert!(far.c_cert < 1.0);

        assert!(matches!(certified_improvement(2, 0.5, 0.0, StripSide::Left), Err(Error::NoRefinement { .. })));
        assert!(certified_improvement(2, 1.0, 1.0, StripSide::Left).is_err());
    }

    #[test]
    fn certificate_sides_mirror() {
        let l = certified_improvement(3, 0.3, 2.0, StripSide::Left).unwrap();
        let r = certified_improvement(3, 0.7, 2.0, StripSide::Right).unwrap();
        assert_eq!(l.abscissa, r.abscissa);
        assert_eq!(l.c_cert, r.c_cert);
    }

    #[test]
    fn certificate_monotone_in_n() {
        for d in [0.3, 1.0, 4.0] {
            let cs: Vec<f64> = [1, 2, 4, 8, 16].iter().map(|&n| certified_improvement(n, 0.4, d, StripSide::Left).unwrap().c_cert).collect();
            assert!(cs.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn shape_check() {
        let rep = asymptotic_shape_check(&[2, 4, 8, 16], &[0.5, 1.0, 2.0], 0.5).unwrap();
        assert!(!rep.degenerate && rep.monotone && rep.consistent);
        let (_, b) = rep.fit.unwrap();
        assert!(b > 0.0);
        let a = rep.envelope_intercept.unwrap();
        assert!(rep.points.iter().all(|p| p.log_c >= a - b * p.x - 1e-12));

        let single = asymptotic_shape_check(&[4], &[1.0], 0.5).unwrap();
        assert!(single.degenerate && single.fit.is_none());
    }

    #[test]
    fn exponential_sum_merges_and_integrates() {
        let s = ExponentialSum::new([(1.0, 2.0), (0.5, -1.0), (0.25, 2.0), (0.0, 7.0)]);
        assert_eq!(s.terms(), &[(0.5, -1.0), (1.25, 2.0)]);
        assert_eq!(s.min_abs_freq(), Some(1.0));
        assert_eq!((s.sigma_lo(), s.sigma_hi()), (Some(-1.0), Some(2.0)));
        let q = adaptive_simpson(|t| s.eval(t), -3.0, 2.0, QuadOptions::absolute(1e-12).with_panels(64)).value;
        assert!((q - s.integral(-3.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn mcintosh_expansion_reproduces_boundary_values() {
        // Oracle: direct matrix evaluation of <A^{1-it} X B^{it} v, same>.
        let mut rng = CounterRng::new(9);
        let a = crate::fuzz::random_spd_from(&[0.5, 1.5, 3.0], &mut rng);
        let b = crate::fuzz::random_spd_from(&[0.7, 2.0, 0.2], &mut rng);
        let x = Matrix::from_fn(3, 3, |_, _| rng.normal());
        let inst = McIntoshInstance::new(a.clone(), x.clone(), b.clone(), 0.5).unwrap();
        let v = rng.unit_vec(3);
        let sum = ExponentialSum::from_mcintosh(&inst, &v).unwrap();
        let da = SpectralDecomposition::of(&a).unwrap();
        let db = SpectralDecomposition::of(&b).unwrap();
        for t in [-2.0, 0.0, 0.7, 5.0] {
            let bv = crate::spectral::complex_power_apply(&db, Complex64::new(0.0, t), &crate::linalg::to_complex(&v)).unwrap();
            let xbv = x.mul_cvec(&bv);
            let w = crate::spectral::complex_power_apply(&da, Complex64::new(1.0, -t), &xbv).unwrap();
            let direct = crate::linalg::bilinear(&w, &w);
            assert!((direct - sum.eval(t)).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn cordes_expansion_reproduces_boundary_values() {
        let mut rng = CounterRng::new(10);
        let a = crate::fuzz::random_spd_from(&[0.5, 1.5, 3.0], &mut rng);
        let b = crate::fuzz::random_spd_from(&[0.7, 2.0, 0.2], &mut rng);
        let inst = CordesInstance::new(a.clone(), b.clone(), 0.5).unwrap();
        let v = rng.unit_vec(3);
        let sum = ExponentialSum::from_cordes(&inst, &v).unwrap();
        let da = SpectralDecomposition::of(&a).unwrap();
        let db = SpectralDecomposition::of(&b).unwrap();
        for t in [-1.0, 0.3, 4.0] {
            let z = Complex64::new(0.0, t);
            let bv = crate::spectral::complex_power_apply(&db, z, &crate::linalg::to_complex(&v)).unwrap();
            let w = crate::spectral::complex_power_apply(&da, z, &bv).unwrap();
            assert!((crate::linalg::bilinear(&w, &w) - sum.eval(t)).norm() < 1e-10);
        }
    }

    #[test]
    fn log_certificate_tracks_underflow() {
        // windows starting on both sides of the asymptotic switch, all representable
        for d in [0.3, 0.5, 1.0, 4.0] {
            let b = certified_improvement(2, 0.5, d, StripSide::Left).unwrap();
            assert!(b.c_cert > 0.0);
            assert!((b.log_c_cert - b.c_cert.ln()).abs() < 1e-9, "d={d}: {} vs {}", b.log_c_cert, b.c_cert.ln());
        }
        let far = certified_improvement(8, 0.5, 0.0176, StripSide::Left).unwrap();
        assert_eq!(far.c_cert, 0.0);
        assert!(far.log_c_cert.is_finite() && far.log_c_cert < -700.0);
        // oracle: 2 sin x e^{-3L/4} (1 - e^{-L/4}) * (2 / pi) / 2
        let x = far.abscissa;
        let expected = (2.0 * x.sin()).ln() - 0.75 * far.window + (1.0 - (-0.25 * far.window).exp()).ln() + (2.0 / PI).ln() - 2f64.ln();
        assert!((far.log_c_cert - expected).abs() < 1e-9);
    }

    #[test]
    fn lemma1_closed_forms() {
        let eta = 0.8;
        let one = ExponentialSum::new([(1.5, eta)]);
        let rep = lemma1_check(&one, eta).unwrap();
        assert!((rep.lhs - 2.0 * (1.5 * 2f64.sin()).abs() / eta).abs() < 1e-9);
        assert!((rep.sup_estimate - 1.5).abs() < 1e-9);
        assert!(rep.holds);

        let cos = ExponentialSum::new([(1.0, eta), (1.0, -eta)]);
        let rep = lemma1_check(&cos, eta).unwrap();
        let h = 2.0 * 2f64.sqrt() / eta;
        assert!((rep.lhs - 4.0 * (eta * h).sin().abs() / eta).abs() < 1e-9);
        assert!(rep.holds);

        assert!(lemma1_check(&ExponentialSum::new([(1.0, 0.1)]), 0.5).is_err());
    }

    #[test]
    fn lemma1_random_sums() {
        let mut rng = CounterRng::new(77);
        for _ in 0..60 {
            let eta = rng.uniform_in(0.2, 2.0);
            let terms: Vec<(f64, f64)> = (0..10)
                .map(|_| {
                    let d = rng.uniform_in(eta, 4.0 * eta) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                    (rng.normal(), d)
                })
                .collect();
            let sum = ExponentialSum::new(terms);
            let rep = lemma1_check(&sum, eta).unwrap();
            assert!((rep.lhs - sum.integral(-rep.half_window, rep.half_window).norm()).abs() < 1e-8);
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn lemma2_closed_forms() {
        let x = 3.0;
        let step = |z: f64| if z < x / 2.0 { 1.0 } else { -1.0 };
        let f = |z: f64| (-z).exp();
        let rep = lemma2_check(f, step, x, Some(1.0)).unwrap();
        let lhs = (1.0 - (-x / 2.0).exp()) - ((-x / 2.0).exp() - (-x).exp());
        let rhs = (1.0 - (-0.75 * x).exp()) - ((-0.75 * x).exp() - (-x).exp());
        assert!((rep.lhs - lhs).abs() < 1e-6, "{} vs {lhs}", rep.lhs);
        assert!((rep.rhs - rhs).abs() < 1e-10);
        assert_eq!(rep.holds, Some(true));

        let rep = lemma2_check(f, |_| 0.0, x, Some(1.0)).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.rhs > 0.0);
        assert_eq!(rep.holds, Some(true));

        let rep = lemma2_check(|z: f64| z, |_| 1.0, x, None).unwrap();
        assert_eq!(rep.holds, None);
    }

    #[test]
    fn refined_mcintosh_examples() {
        // commuting diagonal data normalize to a shared top eigenvalue 1, so d = 0;
        // a rotated B and a non-normal X separate the spectra
        let mut rng = CounterRng::new(3);
        let b = crate::fuzz::random_spd_from(&[0.5, 3.0], &mut rng);
        let x = Matrix::from_rows(&[&[1.0, 0.3], &[-0.2, 0.8]]);
        let inst = McIntoshInstance::new(SymMatrix::from_diag(&[1.0, 0.2]), x, b, 0.5).unwrap();
        let rep = refined_mcintosh(&inst).unwrap();
        assert!(rep.gap.as_ref().unwrap().d > 0.0);
        assert_eq!(rep.sound, Some(true));
        let c = rep.bound.as_ref().unwrap().c_cert;
        assert!(rep.plain.ratio.unwrap() <= 1.0 - c + SOUNDNESS_TOL);

        let same = SymMatrix::from_diag(&[1.0, 3.0]);
        let rep = refined_mcintosh(&McIntoshInstance::new(same.clone(), Matrix::identity(2), same, 0.5).unwrap()).unwrap();
        assert_eq!(rep.gap.unwrap().d, 0.0);
        assert!(rep.bound.is_none());

        let endpoint = McIntoshInstance::new(SymMatrix::identity(2), Matrix::identity(2), SymMatrix::identity(2), 1.0).unwrap();
        assert!(refined_mcintosh(&endpoint).is_err());

        let psd = McIntoshInstance::new(SymMatrix::from_diag(&[1.0, 0.0]), Matrix::identity(2), SymMatrix::from_diag(&[1.0, 2.0]), 0.5).unwrap();
        let rep = refined_mcintosh(&psd).unwrap();
        assert!(rep.gap.is_none() && rep.note.is_some());
    }

    #[test]
    fn refined_cordes_examples() {
        let rep = refined_cordes(&CordesInstance::new(SymMatrix::from_diag(&[2.0, 0.5]), SymMatrix::from_diag(&[0.5, 2.0]), 0.5).unwrap()).unwrap();
        assert_eq!(rep.gap.unwrap().d, 0.0);

        let d = SymMatrix::from_diag(&[4.0, 2.0]);
        let rotated = crate::fuzz::random_spd_from(&[4.0, 2.0], &mut CounterRng::new(5));
        let rep = refined_cordes(&CordesInstance::new(d.clone(), rotated, 0.5).unwrap()).unwrap();
        assert!(rep.gap.as_ref().unwrap().d > 0.0);
        assert_eq!(rep.sound, Some(true));

        assert!(refined_cordes(&CordesInstance::new(d.clone(), d, 0.0).unwrap()).is_err());
    }

    #[test]
    fn soundness_sweep() {
        let mut rng = CounterRng::new(2024);
        let mut certified = 0;
        for _ in 0..150 {
            let n = rng.int_in(2, 4);
            let r = rng.uniform_in(0.1, 0.9);
            let spec = |rng: &mut CounterRng| (0..n).map(|_| rng.log_uniform(0.1, 10.0)).collect::<Vec<_>>();
            let (sa, sb) = (spec(&mut rng), spec(&mut rng));
            let a = crate::fuzz::random_spd_from(&sa, &mut rng);
            let b = crate::fuzz::random_spd_from(&sb, &mut rng);
            let x = Matrix::from_fn(n, n, |_, _| rng.normal());
            let rep = refined_mcintosh(&McIntoshInstance::new(a, x, b, r).unwrap()).unwrap();
            if let Some(sound) = rep.sound {
                certified += 1;
                assert!(sound, "{rep:?}");
            }
        }
        assert!(certified > 100);
    }
}
