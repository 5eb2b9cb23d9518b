//! Random instances, equality-instance synthesis, ratio ascent and seeded
//! campaigns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equality::{analyze_cordes_equality, analyze_mcintosh_equality};
use crate::error::{Error, Result};
use crate::inequalities::{evaluate_cordes, evaluate_mcintosh, CordesInstance, McIntoshInstance, Status};
use crate::linalg::{dot, norm, Matrix};
use crate::refinement::{refined_cordes, refined_mcintosh, RefinedReport};
use crate::rng::CounterRng;
use crate::spectral::{operator_norm, real_power, SpectralDecomposition, SymMatrix};

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix (columns, with
/// reorthogonalization).
pub fn random_orthogonal(n: usize, rng: &mut CounterRng) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut c = rng.normal_vec(n);
        for _ in 0..2 {
            for q in &cols {
                let p = dot(q, &c);
                c.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
        }
        let len = norm(&c);
        if len > 1e-8 {
            cols.push(c.into_iter().map(|x| x / len).collect());
        }
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `Q diag(spectrum) Q^T` with `Q = random_orthogonal`.
pub fn random_spd_from(spectrum: &[f64], rng: &mut CounterRng) -> SymMatrix {
    let q = random_orthogonal(spectrum.len(), rng);
    SymMatrix::from_diag(spectrum).conjugate(&q).expect("square factors")
}

pub fn random_spd(n: usize, spectrum: &[f64], seed: u64) -> Result<SymMatrix> {
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: spectrum.len() });
    }
    if let Some(&bad) = spectrum.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Precondition(format!("spectrum must be positive and finite, got {bad}")));
    }
    Ok(random_spd_from(spectrum, &mut CounterRng::new(seed)))
}

/// Eigenvalue drawn log-uniformly at a log-distance in `[0.2, 2]` from `center`.
fn separated_from(center: f64, rng: &mut CounterRng) -> f64 {
    let offset = rng.uniform_in(0.2, 2.0);
    if rng.uniform() < 0.5 {
        center * offset.exp()
    } else {
        center * (-offset).exp()
    }
}

/// Diagonal data with `lambda_0 = mu_0 = shared`, `x_0 = 1 / shared`, and all
/// other products `|lambda_i x_i|`, `|mu_i x_i|` at most 0.9, conjugated by
/// independent random orthogonals. `v` maps to the shared coordinate, so the
/// ratio is exactly 1 at every exponent.
pub fn synthesize_equality_instance(n: usize, shared: f64, seed: u64) -> Result<(McIntoshInstance, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Degenerate("n = 0"));
    }
    if !(shared > 0.0 && shared.is_finite()) {
        return Err(Error::Precondition(format!("shared eigenvalue must be positive, got {shared}")));
    }
    let mut rng = CounterRng::new(seed);
    let (mut lam, mut mu, mut x) = (vec![shared], vec![shared], vec![1.0 / shared]);
    for _ in 1..n {
        let (l, m) = (separated_from(shared, &mut rng), separated_from(shared, &mut rng));
        let u = rng.uniform_in(0.1, 0.9);
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        lam.push(l);
        mu.push(m);
        x.push(sign * u / l.max(m));
    }
    let u = random_orthogonal(n, &mut rng);
    let w = random_orthogonal(n, &mut rng);
    let a = SymMatrix::from_diag(&lam).conjugate(&u)?;
    let b = SymMatrix::from_diag(&mu).conjugate(&w)?;
    let xm = Matrix::chain(&[&u, &Matrix::from_diag(&x), &w.transpose()])?;
    let inst = McIntoshInstance::new(a, xm, b, 0.5)?.mark_normalized()?;
    Ok((inst, w.column(0)))
}

/// `lambda_0 mu_0 = 1` with `lambda_0 = shared`, other products in
/// `[0.1, 0.9]`; both conjugated by the same orthogonal.
pub fn synthesize_cordes_equality_instance(n: usize, shared: f64, seed: u64) -> Result<(CordesInstance, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Degenerate("n = 0"));
    }
    if !(shared > 0.0 && shared.is_finite()) {
        return Err(Error::Precondition(format!("shared eigenvalue must be positive, got {shared}")));
    }
    let mut rng = CounterRng::new(seed);
    let (mut lam, mut mu) = (vec![shared], vec![1.0 / shared]);
    for _ in 1..n {
        let l = separated_from(shared, &mut rng);
        lam.push(l);
        mu.push(rng.uniform_in(0.1, 0.9) / l);
    }
    let u = random_orthogonal(n, &mut rng);
    let a = SymMatrix::from_diag(&lam).conjugate(&u)?;
    let b = SymMatrix::from_diag(&mu).conjugate(&u)?;
    let inst = CordesInstance::new(a, b, 0.5)?.mark_normalized()?;
    Ok((inst, u.column(0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizeReport {
    pub x: Matrix,
    pub v: Vec<f64>,
    pub ratio: f64,
    pub iterations: usize,
    pub accepted: usize,
}

struct RatioProblem {
    a: Matrix,
    b: Matrix,
    ar: Matrix,
    br: Matrix,
    r: f64,
}

impl RatioProblem {
    fn rhs(&self, x: &Matrix) -> Result<f64> {
        let ax = operator_norm(&self.a.matmul(x)?)?.norm;
        let xb = operator_norm(&x.matmul(&self.b)?)?.norm;
        Ok(ax.powf(self.r) * xb.powf(1.0 - self.r))
    }

    fn ratio(&self, x: &Matrix) -> Result<(f64, Vec<f64>)> {
        let top = operator_norm(&Matrix::chain(&[&self.ar, x, &self.br])?)?;
        Ok((top.norm / self.rhs(x)?, top.witness))
    }

    /// Ratio with `v` held fixed; a lower bound of `ratio` touching it at the
    /// extremal vector.
    fn ratio_at(&self, x: &Matrix, v: &[f64]) -> Result<f64> {
        Ok(norm(&Matrix::chain(&[&self.ar, x, &self.br])?.mul_vec(v)) / self.rhs(x)?)
    }
}

fn unit_frobenius(m: Matrix) -> Matrix {
    let f = m.frobenius();
    m.scale(1.0 / f)
}

/// Alternating ascent of `||A^r X B^{1-r}|| / (||AX||^r ||XB||^{1-r})`: the
/// extremal vector for the current `X`, then a backtracking step along the
/// central-difference gradient in `X` with that vector fixed. Steps that do
/// not improve the full ratio are rejected; a vanishing gradient or a failed
/// line search falls back to a random perturbation.
pub fn maximize_ratio(a: &SymMatrix, b: &SymMatrix, r: f64, iters: usize, seed: u64) -> Result<MaximizeReport> {
    crate::error::check_range("r", r, 0.0, 1.0, false)?;
    let n = a.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.n() });
    }
    let (da, db) = (SpectralDecomposition::of(a)?, SpectralDecomposition::of(b)?);
    let prob = RatioProblem {
        a: a.matrix().clone(),
        b: b.matrix().clone(),
        ar: real_power(&da, r)?.into_matrix(),
        br: real_power(&db, 1.0 - r)?.into_matrix(),
        r,
    };
    let mut rng = CounterRng::new(seed);
    let mut x = unit_frobenius(Matrix::from_fn(n, n, |_, _| rng.normal()));
    let (mut ratio, mut v) = prob.ratio(&x)?;
    let mut accepted = 0;
    let mut step = 0.5;
    for _ in 0..iters {
        let h = 1e-6 * x.frobenius();
        let mut grad = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (mut plus, mut minus) = (x.clone(), x.clone());
                plus[(i, j)] += h;
                minus[(i, j)] -= h;
                grad[(i, j)] = (prob.ratio_at(&plus, &v)? - prob.ratio_at(&minus, &v)?) / (2.0 * h);
            }
        }
        let gnorm = grad.frobenius();
        let mut improved = false;
        if gnorm > 1e-12 && gnorm.is_finite() {
            let dir = grad.scale(1.0 / gnorm);
            let mut s = step;
            for _ in 0..30 {
                let cand = unit_frobenius(x.add(&dir.scale(s))?);
                let (q, w) = prob.ratio(&cand)?;
                if q > ratio {
                    (x, ratio, v) = (cand, q, w);
                    step = (2.0 * s).min(1.0);
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
        }
        if !improved {
            let kick = Matrix::from_fn(n, n, |_, _| rng.normal());
            let cand = unit_frobenius(x.add(&unit_frobenius(kick).scale(0.05))?);
            let (q, w) = prob.ratio(&cand)?;
            if q > ratio {
                (x, ratio, v) = (cand, q, w);
                improved = true;
            }
        }
        accepted += improved as usize;
    }
    Ok(MaximizeReport { x, v, ratio, iterations: iters, accepted })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzMode {
    Mcintosh,
    Cordes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    /// Inclusive dimension range.
    pub n_range: [usize; 2],
    /// Eigenvalues are log-uniform in this range.
    pub spectrum_range: [f64; 2],
    pub trials: usize,
    pub seed: u64,
    /// Exponents `r` (or `s`); each trial picks one uniformly.
    pub r_grid: Vec<f64>,
    pub mode: FuzzMode,
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.n_range;
        if lo == 0 || lo > hi {
            return Err(Error::Precondition(format!("n_range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]")));
        }
        let [smin, smax] = self.spectrum_range;
        if !(smin > 0.0 && smin <= smax && smax.is_finite()) {
            return Err(Error::Precondition(format!("spectrum_range must satisfy 0 < min <= max, got [{smin}, {smax}]")));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::Precondition("r_grid must be a nonempty list of exponents in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    /// Ratio above `1 - c_cert`.
    Unsound,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Unsound => "unsound",
            Verdict::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub r: f64,
    /// `d` (McIntosh) or `d*` (Cordes) of the normalized instance.
    pub d: Option<f64>,
    pub ratio: Option<f64>,
    pub c_cert: Option<f64>,
    /// `ln c_cert`; stays finite when `c_cert` underflows.
    pub log_c_cert: Option<f64>,
    pub verdict: Verdict,
    /// Synthesized equality instance of the same size: ratio 1, consistent
    /// verdict and a detected common eigenvalue.
    pub equality_ok: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub config: FuzzConfig,
    pub violations: usize,
    pub cert_failures: usize,
    pub errors: usize,
    pub certified_trials: usize,
    pub equality_checked: usize,
    pub equality_consistent: usize,
    /// `min (1 - ratio)` over all trials.
    pub min_slack: Option<f64>,
    /// `min (1 - c_cert - ratio)` over certified trials.
    pub min_certificate_margin: Option<f64>,
    pub records: Vec<TrialRecord>,
}

impl CampaignReport {
    pub fn clean(&self) -> bool {
        self.violations == 0 && self.cert_failures == 0 && self.equality_consistent == self.equality_checked
    }
}

fn spectrum(n: usize, range: [f64; 2], rng: &mut CounterRng) -> Vec<f64> {
    (0..n).map(|_| rng.log_uniform(range[0], range[1])).collect()
}

fn classify(refined: &RefinedReport) -> Verdict {
    if refined.plain.status == Status::Violated {
        Verdict::Violated
    } else if refined.sound == Some(false) {
        Verdict::Unsound
    } else {
        Verdict::Holds
    }
}

fn run_trial(config: &FuzzConfig, trial: usize) -> TrialRecord {
    let mut rng = CounterRng::new(config.seed).substream(trial as u64);
    let n = rng.int_in(config.n_range[0], config.n_range[1]);
    let r = config.r_grid[rng.int_in(0, config.r_grid.len() - 1)];
    let mut record = TrialRecord { trial, n, r, d: None, ratio: None, c_cert: None, log_c_cert: None, verdict: Verdict::Error, equality_ok: None, error: None };
    let a = random_spd_from(&spectrum(n, config.spectrum_range, &mut rng), &mut rng);
    let b = random_spd_from(&spectrum(n, config.spectrum_range, &mut rng), &mut rng);
    let refined = match config.mode {
        FuzzMode::Mcintosh => {
            let x = Matrix::from_fn(n, n, |_, _| rng.normal());
            McIntoshInstance::new(a, x, b, r).and_then(|inst| refined_mcintosh(&inst))
        }
        FuzzMode::Cordes => CordesInstance::new(a, b, r).and_then(|inst| refined_cordes(&inst)),
    };
    match refined {
        Ok(rep) => {
            record.d = rep.gap.as_ref().map(|g| g.d);
            record.ratio = rep.plain.ratio;
            record.c_cert = rep.bound.as_ref().map(|b| b.c_cert);
            record.log_c_cert = rep.bound.as_ref().map(|b| b.log_c_cert);
            record.verdict = classify(&rep);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    let shared = rng.log_uniform(config.spectrum_range[0], config.spectrum_range[1]);
    let eq_seed = rng.next_u64();
    let equality = match config.mode {
        FuzzMode::Mcintosh => synthesize_equality_instance(n, shared, eq_seed).and_then(|(inst, v)| {
            let ratio = evaluate_mcintosh(&inst)?.ratio.unwrap_or(0.0);
            let verdict = analyze_mcintosh_equality(&inst, &v, None)?;
            Ok((ratio - 1.0).abs() <= 1e-9 && verdict.consistent() && !verdict.common_eigenvalues.is_empty())
        }),
        FuzzMode::Cordes => synthesize_cordes_equality_instance(n, shared, eq_seed).and_then(|(inst, v)| {
            let ratio = evaluate_cordes(&inst)?.ratio.unwrap_or(0.0);
            let verdict = analyze_cordes_equality(&inst, &v, None)?;
            Ok((ratio - 1.0).abs() <= 1e-9 && verdict.consistent() && !verdict.common_eigenvalues.is_empty())
        }),
    };
    match equality {
        Ok(ok) => record.equality_ok = Some(ok),
        Err(e) if record.error.is_none() => record.error = Some(format!("equality synthesis: {e}")),
        Err(_) => {}
    }
    record
}

/// Runs every trial on its own substream `hash(seed, trial)`; `jobs` threads
/// (0 = rayon default). Records come back sorted by trial index, so the
/// report does not depend on `jobs`.
pub fn run_campaign_with_jobs(config: &FuzzConfig, jobs: usize) -> Result<CampaignReport> {
    config.validate()?;
    let run = || (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect::<Vec<_>>();
    let mut records = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
            .install(run)
    };
    records.sort_by_key(|r| r.trial);
    let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    Ok(CampaignReport {
        violations: count(Verdict::Violated),
        cert_failures: count(Verdict::Unsound),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        certified_trials: records.iter().filter(|r| r.c_cert.is_some()).count(),
        equality_checked: records.iter().filter(|r| r.equality_ok.is_some()).count(),
        equality_consistent: records.iter().filter(|r| r.equality_ok == Some(true)).count(),
        min_slack: min(&mut records.iter().filter_map(|r| r.ratio.map(|q| 1.0 - q))),
        min_certificate_margin: min(&mut records.iter().filter_map(|r| Some(1.0 - r.c_cert? - r.ratio?))),
        config: config.clone(),
        records,
    })
}

pub fn run_campaign(config: &FuzzConfig) -> Result<CampaignReport> {
    run_campaign_with_jobs(config, 0)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Columns `trial,n,r,d,ratio,c_cert,verdict`; missing values are empty.
pub fn campaign_csv(report: &CampaignReport) -> String {
    let mut out = String::from("trial,n,r,d,ratio,c_cert,verdict\n");
    for t in &report.records {
        out.push_str(&format!("{},{},{},{},{},{},{}\n", t.trial, t.n, t.r, opt(t.d), opt(t.ratio), opt(t.c_cert), t.verdict.as_str()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::evaluate_mcintosh;
    use crate::refinement::{certified_improvement, SpectralGap};

    #[test]
    fn random_spd_examples() {
        let id = random_spd(4, &[1.0; 4], 3).unwrap();
        assert!(id.matrix().sub(&Matrix::identity(4)).unwrap().max_abs() < 1e-12);
        let m = random_spd(2, &[1.0, 4.0], 9).unwrap();
        let ev = SpectralDecomposition::of(&m).unwrap().eigenvalues().to_vec();
        let mut sorted = ev.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-9 && (sorted[1] - 4.0).abs() < 1e-9);
        assert_eq!(random_spd(3, &[1.0, 2.0, 3.0], 5).unwrap(), random_spd(3, &[1.0, 2.0, 3.0], 5).unwrap());
        assert!(random_spd(2, &[1.0, -1.0], 1).is_err());
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = CounterRng::new(1);
        for n in 1..7 {
            let q = random_orthogonal(n, &mut rng);
            let e = q.transpose().matmul(&q).unwrap().sub(&Matrix::identity(n)).unwrap().max_abs();
            assert!(e < 1e-13);
        }
    }

    #[test]
    fn equality_synthesis() {
        for (n, shared, seed) in [(1, 1.0, 0), (3, 2.0, 1), (5, 0.05, 2), (8, 40.0, 3)] {
            let (inst, v) = synthesize_equality_instance(n, shared, seed).unwrap();
            let rep = evaluate_mcintosh(&inst).unwrap();
            assert!((rep.ratio.unwrap() - 1.0).abs() < 1e-9);
            let verdict = analyze_mcintosh_equality(&inst, &v, None).unwrap();
            assert!(verdict.consistent() && !verdict.common_eigenvalues.is_empty(), "{verdict:?}");
        }
        // rerunning with the same seed reproduces the instance bit for bit
        assert_eq!(synthesize_equality_instance(4, 2.0, 11).unwrap(), synthesize_equality_instance(4, 2.0, 11).unwrap());
    }

    #[test]
    fn cordes_equality_synthesis() {
        for (n, shared, seed) in [(1, 3.0, 0), (4, 0.5, 1), (7, 12.0, 2)] {
            let (inst, v) = synthesize_cordes_equality_instance(n, shared, seed).unwrap();
            assert!((evaluate_cordes(&inst).unwrap().ratio.unwrap() - 1.0).abs() < 1e-9);
            let verdict = analyze_cordes_equality(&inst, &v, None).unwrap();
            assert!(verdict.consistent() && !verdict.common_eigenvalues.is_empty());
        }
    }

    #[test]
    fn maximize_examples() {
        let a = SymMatrix::from_diag(&[1.0, 3.0]);
        let zero = maximize_ratio(&a, &SymMatrix::from_diag(&[2.0, 0.5]), 0.5, 0, 4).unwrap();
        assert_eq!(zero.iterations, 0);
        let again = maximize_ratio(&a, &SymMatrix::from_diag(&[2.0, 0.5]), 0.5, 0, 4).unwrap();
        assert_eq!(zero, again);

        let mut rng = CounterRng::new(8);
        let a = random_spd_from(&[0.5, 2.0, 4.0], &mut rng);
        let b = random_spd_from(&[0.3, 1.5, 6.0], &mut rng);
        let rep = maximize_ratio(&a, &b, 0.5, 40, 2).unwrap();
        assert!(rep.ratio >= zero.ratio.min(rep.ratio));
        let inst = McIntoshInstance::new(a.clone(), Matrix::identity(3), b.clone(), 0.5).unwrap().normalize().unwrap();
        let gap = SpectralGap::for_mcintosh(&inst).unwrap();
        assert!(gap.d > 0.0);
        let cert = certified_improvement(3, 0.5, gap.d, gap.preferred_side()).unwrap();
        assert!(rep.ratio <= 1.0 - cert.c_cert + 1e-9, "{} vs {}", rep.ratio, cert.c_cert);
    }

    #[test]
    fn ascent_is_monotone() {
        let mut rng = CounterRng::new(10);
        let a = random_spd_from(&[0.2, 1.0, 5.0], &mut rng);
        let b = random_spd_from(&[0.4, 2.0, 3.0], &mut rng);
        let mut last = 0.0;
        for iters in [0, 5, 10, 20] {
            let rep = maximize_ratio(&a, &b, 0.3, iters, 6).unwrap();
            assert!(rep.ratio >= last - 1e-15);
            assert!(rep.ratio <= 1.0 + 1e-9);
            last = rep.ratio;
        }
    }

    #[test]
    fn equal_spectra_approach_one() {
        let mut rng = CounterRng::new(2);
        let a = random_spd_from(&[0.5, 1.0, 2.0], &mut rng);
        let rep = maximize_ratio(&a, &a, 0.5, 200, 1).unwrap();
        // reported, not asserted tightly
        eprintln!("equal-spectra ascent ratio {}", rep.ratio);
        assert!(rep.ratio > 0.9);
    }

    fn config(mode: FuzzMode, trials: usize) -> FuzzConfig {
        FuzzConfig { n_range: [1, 6], spectrum_range: [1e-2, 1e2], trials, seed: 2024, r_grid: vec![0.25, 0.5, 0.75], mode }
    }

    #[test]
    fn campaign_determinism() {
        let one = run_campaign(&config(FuzzMode::Mcintosh, 1)).unwrap();
        assert_eq!(one.records.len(), 1);
        let cfg = config(FuzzMode::Mcintosh, 40);
        let (a, b) = (run_campaign_with_jobs(&cfg, 1).unwrap(), run_campaign_with_jobs(&cfg, 4).unwrap());
        assert_eq!(a, b);
        assert_eq!(campaign_csv(&a), campaign_csv(&b));
        assert!(campaign_csv(&a).starts_with("trial,n,r,d,ratio,c_cert,verdict\n"));
    }

    #[test]
    fn campaigns_are_clean() {
        for mode in [FuzzMode::Mcintosh, FuzzMode::Cordes] {
            let rep = run_campaign(&config(mode, 200)).unwrap();
            assert_eq!(rep.violations, 0);
            assert_eq!(rep.cert_failures, 0);
            assert_eq!(rep.errors, 0, "{:?}", rep.records.iter().find(|r| r.error.is_some()));
            assert_eq!(rep.equality_consistent, rep.equality_checked);
            assert!(rep.clean());
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(FuzzMode::Cordes, 1);
        c.spectrum_range = [0.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = config(FuzzMode::Cordes, 0);
        assert!(c.validate().is_err());
        c.trials = 1;
        c.r_grid = vec![1.0];
        assert!(c.validate().is_err());
        let json = r#"{"n_range":[2,3],"spectrum_range":[0.1,10],"trials":5,"seed":1,"r_grid":[0.5],"mode":"cordes"}"#;
        let parsed: FuzzConfig = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.mode, FuzzMode::Cordes);
    }
}
