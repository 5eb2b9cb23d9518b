//! Adaptive Simpson quadrature for real and complex integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    /// Relative to a coarse estimate of the whole integral.
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Uniform panels refined independently; oscillatory integrands need
    /// enough of them to resolve every period at the coarse level.
    pub initial_panels: usize,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_depth: 40, initial_panels: 16, max_evals: 5_000_000 }
    }
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        Self { abs_tol: tol, ..Self::default() }
    }

    pub fn relative(tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol: tol, ..Self::default() }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    /// Sum of the local Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the depth or evaluation cap cut refinement short.
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

fn simpson<T: QuadValue>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

pub fn adaptive_simpson<T: QuadValue>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error_estimate: 0.0, evaluations: 0, converged: true };
    }
    let panels = opts.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut stack: Vec<(Panel<T>, f64, u32)> = Vec::with_capacity(panels);
    let mut coarse = T::zero();
    let mut f_left = eval(a, &mut evals);
    for p in 0..panels {
        let pa = a + h * p as f64;
        let pb = if p + 1 == panels { b } else { a + h * (p + 1) as f64 };
        let fm = eval(0.5 * (pa + pb), &mut evals);
        let fb = eval(pb, &mut evals);
        let whole = simpson(pa, pb, f_left, fm, fb);
        coarse = coarse + whole;
        stack.push((Panel { a: pa, b: pb, fa: f_left, fm, fb, whole }, 0.0, 0));
        f_left = fb;
    }
    let tol = opts.abs_tol.max(opts.rel_tol * coarse.magnitude());
    let width = (b - a).abs();
    for entry in stack.iter_mut() {
        entry.1 = tol * (entry.0.b - entry.0.a).abs() / width;
    }
    stack.reverse();

    let mut total = T::zero();
    let mut err = 0.0;
    let mut converged = true;
    while let Some((p, ptol, depth)) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = eval(0.5 * (p.a + m), &mut evals);
        let rm = eval(0.5 * (m + p.b), &mut evals);
        let left = simpson(p.a, m, p.fa, lm, p.fm);
        let right = simpson(m, p.b, p.fm, rm, p.fb);
        let delta = left + right - p.whole;
        let local = delta.magnitude() / 15.0;
        let capped = depth >= opts.max_depth || evals >= opts.max_evals;
        if local <= ptol || capped {
            if capped && local > ptol {
                converged = false;
            }
            total = total + left + right + delta * (1.0 / 15.0);
            err += local;
        } else {
            // right pushed first so the left half is refined first
            stack.push((Panel { a: m, b: p.b, fa: p.fm, fm: rm, fb: p.fb, whole: right }, 0.5 * ptol, depth + 1));
            stack.push((Panel { a: p.a, b: m, fa: p.fa, fm: lm, fb: p.fm, whole: left }, 0.5 * ptol, depth + 1));
        }
    }
    QuadResult { value: total, error_estimate: err, evaluations: evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let r = adaptive_simpson(|x: f64| 4.0 * x.powi(3) - x + 2.0, -1.0, 2.0, QuadOptions::absolute(1e-12));
        assert!((r.value - (16.0 - 1.0 - 2.0 + 0.5 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn smooth_integrals() {
        let r = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, QuadOptions::absolute(1e-12));
        assert!((r.value - 2.0).abs() < 1e-11, "{}", r.value);
        assert!(r.converged);
        let r = adaptive_simpson(|x: f64| (-x).exp(), 300.0, 400.0, QuadOptions::relative(1e-10));
        let exact = (-300f64).exp() - (-400f64).exp();
        assert!(((r.value - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn complex_oscillatory() {
        let w = 7.5;
        let r = adaptive_simpson(
            |t: f64| Complex64::new(0.0, w * t).exp(),
            -3.0,
            3.0,
            QuadOptions::absolute(1e-11).with_panels(64),
        );
        let exact = 2.0 * (3.0 * w).sin() / w;
        assert!((r.value.re - exact).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        let r = adaptive_simpson(|x: f64| x, 1.0, 1.0, QuadOptions::default());
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evaluations, 0);
    }
}
