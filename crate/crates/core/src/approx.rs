//! Explorer for the Poisson-weighted approximation problem on the class
//!
//! ```text
//! F = { f(t) = sum_k e^{-2 i a_k t} (sum_l c_kl e^{i b_l t})^2 : a, b, C real }
//! ```
//!
//! paired against `g(y) = P(pi r, y) / (2 pi (1 - r))`, a probability density.
//! The subclasses `H` (gap `|b_i + b_j - 2 a_k| >= delta`) and `G`
//! (gap `|a_i - b_j| >= delta`) are enforced by moving the `a_k`.
//!
//! Since `g` is even, `int e^{i w y} g(y) dy = sinh(pi (1 - r) w) / ((1 - r) sinh(pi w))`
//! is real, and so is the pairing of any member of `F`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::linalg::Matrix;
use crate::quad::{adaptive_simpson, QuadOptions};
use crate::refinement::{certified_improvement, kernel, ExponentialSum, StripSide};
use crate::rng::CounterRng;

/// Default half-width of the sampling window for sup-norm estimates.
pub const SUP_WINDOW: f64 = 200.0;
/// Truncation of the pairing integral.
pub const PAIRING_CUTOFF: f64 = 50.0;
/// Applied to `C` after rescaling to unit sup-norm, so that sampling error in
/// the sup estimate cannot push a reported value above the true supremum.
pub const DEFLATION: f64 = 0.999;

const SAMPLES_PER_PERIOD: f64 = 8.0;
const REFINED_MAXIMA: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxInstance {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `c[(k, l)]`.
    pub c: Matrix,
    pub r: f64,
}

impl ApproxInstance {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Matrix, r: f64) -> Result<Self> {
        let n = a.len();
        for found in [b.len(), c.rows(), c.cols()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        if a.iter().chain(&b).chain(c.as_slice()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_range("r", r, 0.0, 1.0, true)?;
        Ok(Self { a, b, c, r })
    }

    /// The constant function 1.
    pub fn constant(r: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![0.0], Matrix::identity(1), r)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Terms `c_kl c_kl'` at frequencies `b_l + b_l' - 2 a_k`.
    pub fn expansion(&self) -> ExponentialSum {
        let n = self.n();
        let mut terms = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    terms.push((self.c[(k, l)] * self.c[(k, m)], self.b[l] + self.b[m] - 2.0 * self.a[k]));
                }
            }
        }
        ExponentialSum::new(terms)
    }

    fn scaled(&self, s: f64) -> Self {
        Self { c: self.c.scale(s), ..self.clone() }
    }
}

pub fn eval_f(inst: &ApproxInstance, t: f64) -> Complex64 {
    (0..inst.n())
        .map(|k| {
            let inner: Complex64 = (0..inst.n()).map(|l| Complex64::from_polar(inst.c[(k, l)], inst.b[l] * t)).sum();
            Complex64::from_polar(1.0, -2.0 * inst.a[k] * t) * inner * inner
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEstimate {
    /// Lower estimate of `sup |f|` on `[-window, window]`.
    pub value: f64,
    pub argmax: f64,
    pub window: f64,
    pub samples: usize,
    pub spacing: f64,
}

/// Roughly eight samples per period of the fastest frequency, at least 1000.
pub fn default_samples(max_freq: f64, window: f64) -> usize {
    let n = (SAMPLES_PER_PERIOD * window * max_freq / PI).ceil();
    if n.is_finite() {
        (n as usize).clamp(1000, 4_000_000)
    } else {
        4_000_000
    }
}

/// Uniform grid, evaluated by rotating phasors (resynchronized every 1024
/// steps), then golden-section refinement around the largest local maxima.
pub fn sum_sup(sum: &ExponentialSum, window: f64, samples: usize) -> SupEstimate {
    let samples = samples.max(2);
    let h = 2.0 * window / (samples - 1) as f64;
    let start = |t: f64| -> Vec<Complex64> { sum.terms().iter().map(|&(c, d)| Complex64::from_polar(c, d * t)).collect() };
    let rot: Vec<Complex64> = sum.terms().iter().map(|&(_, d)| Complex64::from_polar(1.0, d * h)).collect();
    let mut z = start(-window);
    let mut grid = Vec::with_capacity(samples);
    for i in 0..samples {
        if i % 1024 == 0 && i > 0 {
            z = start(-window + h * i as f64);
        }
        grid.push(z.iter().sum::<Complex64>().norm());
        for (zj, rj) in z.iter_mut().zip(&rot) {
            *zj *= rj;
        }
    }
    refine_maxima(&grid, -window, h, |t| sum.eval(t).norm(), window, samples)
}

fn refine_maxima(grid: &[f64], t0: f64, h: f64, f: impl Fn(f64) -> f64, window: f64, samples: usize) -> SupEstimate {
    let mut peaks: Vec<usize> = (0..grid.len())
        .filter(|&i| (i == 0 || grid[i] >= grid[i - 1]) && (i + 1 == grid.len() || grid[i] >= grid[i + 1]))
        .collect();
    peaks.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]).then(i.cmp(&j)));
    peaks.truncate(REFINED_MAXIMA);
    let mut best = (f64::NEG_INFINITY, t0);
    for &i in &peaks {
        let t = t0 + h * i as f64;
        if grid[i] > best.0 {
            best = (grid[i], t);
        }
        let lo = (t - h).max(-window);
        let hi = (t + h).min(window);
        let (tm, fm) = golden_max(&f, lo, hi);
        if fm > best.0 {
            best = (fm, tm);
        }
    }
    SupEstimate { value: best.0, argmax: best.1, window, samples, spacing: h }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub fn sup_norm(inst: &ApproxInstance, window: f64, samples: usize) -> Result<SupEstimate> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::Precondition(format!("window must be positive, got {window}")));
    }
    if samples < 1000 {
        return Err(Error::Precondition(format!("at least 1000 samples required, got {samples}")));
    }
    Ok(sum_sup(&inst.expansion(), window, samples))
}

/// `sup_norm` with the default window and frequency-adapted sample count.
pub fn sup_norm_default(inst: &ApproxInstance) -> SupEstimate {
    let sum = inst.expansion();
    sum_sup(&sum, SUP_WINDOW, default_samples(sum.max_abs_freq(), SUP_WINDOW))
}

/// Pairing density `g(y) = P(pi r, y) / (2 pi (1 - r))`.
pub fn density(r: f64, y: f64) -> f64 {
    kernel(PI * r, y) / (2.0 * PI * (1.0 - r))
}

/// `int e^{i w y} g(y) dy`, evaluated with exponentials that cannot overflow.
pub fn density_transform(r: f64, w: f64) -> f64 {
    let w = w.abs();
    if w == 0.0 {
        return 1.0;
    }
    let a = PI * (1.0 - r);
    let num = -(-2.0 * a * w).exp_m1();
    let den = -(-2.0 * PI * w).exp_m1();
    ((a - PI) * w).exp() * num / den / (1.0 - r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    /// Real part of `int_{-50}^{50} f g`.
    pub value: f64,
    pub imag: f64,
    /// Bound on the truncated tails, `sup|f| * int_{|y| > 50} g`.
    pub tail_bound: f64,
    pub closed_form: f64,
}

pub fn pairing_closed_form(inst: &ApproxInstance) -> f64 {
    closed_form_sum(&inst.expansion(), inst.r)
}

fn closed_form_sum(sum: &ExponentialSum, r: f64) -> f64 {
    sum.terms().iter().map(|&(c, d)| c * density_transform(r, d)).sum()
}

pub fn pairing(inst: &ApproxInstance) -> PairingReport {
    let sum = inst.expansion();
    let y = PAIRING_CUTOFF;
    let periods = (2.0 * y * sum.max_abs_freq() / (2.0 * PI)).ceil() as usize;
    let opts = QuadOptions::absolute(1e-9).with_panels((4 * periods).clamp(64, 1 << 16));
    let q = adaptive_simpson(|t| sum.eval(t) * density(inst.r, t), -y, y, opts).value;
    let x = PI * inst.r;
    let e = (-y).exp();
    let tail_mass = 2.0 * 2.0 * x.sin() * e / (1.0 - e).powi(2) / (2.0 * PI * (1.0 - inst.r));
    PairingReport { value: q.re, imag: q.im, tail_bound: sum.coefficient_l1() * tail_mass, closed_form: closed_form_sum(&sum, inst.r) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    /// `min |b_i + b_j - 2 a_k| >= delta`.
    H,
    /// `min |a_i - b_j| >= delta`.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassConstraint {
    pub kind: ClassKind,
    pub delta: f64,
}

impl ClassConstraint {
    pub fn new(kind: ClassKind, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Infeasible(format!("delta must be positive and finite, got {delta}")));
        }
        Ok(Self { kind, delta })
    }

    /// Forbidden open intervals for each `a_k`: `(center, half_width)`.
    fn forbidden(&self, b: &[f64]) -> Vec<(f64, f64)> {
        match self.kind {
            ClassKind::H => {
                let mut out = Vec::with_capacity(b.len() * b.len());
                for (i, &bi) in b.iter().enumerate() {
                    for &bj in &b[i..] {
                        out.push((0.5 * (bi + bj), 0.5 * self.delta));
                    }
                }
                out
            }
            ClassKind::G => b.iter().map(|&bj| (bj, self.delta)).collect(),
        }
    }

    /// Moves every `a_k` to the nearest admissible point.
    pub fn repair(&self, a: &mut [f64], b: &[f64]) {
        let mut intervals: Vec<(f64, f64)> = self.forbidden(b).into_iter().map(|(c, w)| (c - w, c + w)).collect();
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        for ak in a.iter_mut() {
            if let Some(&(lo, hi)) = merged.iter().find(|(lo, hi)| *ak > *lo && *ak < *hi) {
                // nudge outward so rounding cannot leave the point inside
                let lo = lo - 1e-12 * lo.abs().max(1.0);
                let hi = hi + 1e-12 * hi.abs().max(1.0);
                *ak = if *ak - lo < hi - *ak { lo } else { hi };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub min_gap: f64,
    /// `(i, j, k)` for `H`, `(i, j)` for `G`; zero-based.
    pub witness: Vec<usize>,
}

pub fn membership(inst: &ApproxInstance, constraint: &ClassConstraint) -> Membership {
    let (a, b) = (&inst.a, &inst.b);
    let mut best = (f64::INFINITY, Vec::new());
    match constraint.kind {
        ClassKind::H => {
            for i in 0..b.len() {
                for j in i..b.len() {
                    for (k, &ak) in a.iter().enumerate() {
                        let v = (b[i] + b[j] - 2.0 * ak).abs();
                        if v < best.0 {
                            best = (v, vec![i, j, k]);
                        }
                    }
                }
            }
        }
        ClassKind::G => {
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    let v = (ai - bj).abs();
                    if v < best.0 {
                        best = (v, vec![i, j]);
                    }
                }
            }
        }
    }
    Membership { member: best.0 >= constraint.delta, min_gap: best.0, witness: best.1 }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub restart: usize,
    pub iteration: usize,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    /// Pairing of `best_instance`, by quadrature.
    pub best_value: f64,
    /// Rescaled to sampled sup-norm `DEFLATION^2`.
    pub best_instance: ApproxInstance,
    pub best_sup: SupEstimate,
    pub history: Vec<HistoryEntry>,
    pub evaluations: usize,
    pub restarts: usize,
    /// `1 - c_cert(n, r, 2 delta)`.
    pub certificate_bound: f64,
    /// `best_value <= certificate_bound + 1e-6`.
    pub consistent: bool,
}

/// Search box for restarts; also bounds which gaps are attainable.
pub const SEARCH_BOX: f64 = 5.0;
const STALL_LIMIT: usize = 20;

struct Candidate {
    value: f64,
    scale: f64,
}

fn evaluate(a: &[f64], b: &[f64], c: &[f64], r: f64) -> Candidate {
    let n = a.len();
    let mut terms = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                terms.push((c[k * n + l] * c[k * n + m], b[l] + b[m] - 2.0 * a[k]));
            }
        }
    }
    let sum = ExponentialSum::new(terms);
    let sup = sum_sup(&sum, SUP_WINDOW, default_samples(sum.max_abs_freq(), SUP_WINDOW)).value;
    if !(sup > 0.0) {
        return Candidate { value: f64::NEG_INFINITY, scale: 0.0 };
    }
    let d2 = DEFLATION * DEFLATION;
    Candidate { value: d2 * closed_form_sum(&sum, r) / sup, scale: DEFLATION / sup.sqrt() }
}

/// Random restarts plus coordinate search over `(a, b, C)`; the `a_k` are
/// repaired onto the constraint after every move and `C` is rescaled to unit
/// sampled sup-norm before scoring.
pub fn search_sup(n: usize, constraint: ClassConstraint, r: f64, budget: usize, seed: u64) -> Result<SearchReport> {
    if n == 0 {
        return Err(Error::Degenerate("n = 0"));
    }
    if budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    check_range("r", r, 0.0, 1.0, true)?;
    let reach = match constraint.kind {
        ClassKind::H => 4.0 * SEARCH_BOX,
        ClassKind::G => 2.0 * SEARCH_BOX,
    };
    if constraint.delta > reach {
        return Err(Error::Infeasible(format!(
            "delta = {} exceeds the largest gap {reach} reachable from the search box [-{SEARCH_BOX}, {SEARCH_BOX}]",
            constraint.delta
        )));
    }

    let root = CounterRng::new(seed);
    let dim = 2 * n + n * n;
    let mut evals = 0usize;
    let mut restarts = 0usize;
    let mut history = Vec::new();
    let mut best: Option<(f64, Vec<f64>, f64)> = None;

    let split = |p: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) { (p[..n].to_vec(), p[n..2 * n].to_vec(), p[2 * n..].to_vec()) };
    let score = |p: &mut Vec<f64>, evals: &mut usize| -> Candidate {
        let (mut a, b, c) = split(p);
        constraint.repair(&mut a, &b);
        p[..n].copy_from_slice(&a);
        *evals += 1;
        evaluate(&a, &b, &c, r)
    };

    while evals < budget {
        let mut rng = root.substream(restarts as u64);
        let mut p: Vec<f64> = (0..2 * n).map(|_| rng.uniform_in(-SEARCH_BOX, SEARCH_BOX)).collect();
        p.extend((0..n * n).map(|_| rng.uniform_in(-1.0, 1.0)));
        let mut current = score(&mut p, &mut evals);
        let mut iteration = 0usize;
        let mut record = |value: f64, p: &[f64], scale: f64, iteration: usize, best: &mut Option<(f64, Vec<f64>, f64)>| {
            if best.as_ref().is_none_or(|b| value > b.0) {
                *best = Some((value, p.to_vec(), scale));
                history.push(HistoryEntry { restart: restarts, iteration, best_value: value });
            }
        };
        record(current.value, &p, current.scale, iteration, &mut best);

        let mut steps: Vec<f64> = (0..dim).map(|i| if i < 2 * n { 0.5 } else { 0.25 }).collect();
        let mut stalls = 0;
        while evals < budget && stalls < STALL_LIMIT && steps.iter().any(|&s| s > 1e-9) {
            let i = iteration % dim;
            iteration += 1;
            let mut improved = false;
            for sign in [1.0, -1.0] {
                if evals >= budget {
                    break;
                }
                let mut trial = p.clone();
                trial[i] += sign * steps[i];
                let cand = score(&mut trial, &mut evals);
                if cand.value > current.value {
                    p = trial;
                    current = cand;
                    improved = true;
                    record(current.value, &p, current.scale, iteration, &mut best);
                    break;
                }
            }
            if improved {
                stalls = 0;
            } else {
                steps[i] *= 0.5;
                stalls += 1;
            }
        }
        restarts += 1;
    }

    let (_, p, scale) = best.expect("budget >= 1 guarantees one evaluation");
    let (a, b, c) = split(&p);
    let raw = ApproxInstance::new(a, b, Matrix::from_row_major(n, n, c)?, r)?;
    let best_instance = raw.scaled(scale);
    let best_value = pairing(&best_instance).value;
    let best_sup = sup_norm_default(&best_instance);
    let certificate_bound = certified_improvement(n, r, 2.0 * constraint.delta, StripSide::Right)?.ratio_bound();
    Ok(SearchReport {
        best_value,
        best_instance,
        best_sup,
        history,
        evaluations: evals,
        restarts,
        certificate_bound,
        consistent: best_value <= certificate_bound + 1e-6,
    })
}
