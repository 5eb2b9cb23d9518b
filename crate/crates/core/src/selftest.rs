//! The embedded acceptance suite: twelve criteria, each returning a pass/fail
//! outcome with a one-line detail. Shared by `opnorm selftest` and the
//! `acceptance` integration test.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{pairing, search_sup, ApproxInstance, ClassConstraint, ClassKind};
use crate::equality::{analyze_mcintosh_equality, default_exponent_grid, equality_transfer_check, TransferStatus};
use crate::error::Result;
use crate::fuzz::{random_spd_from, run_campaign, synthesize_cordes_equality_instance, synthesize_equality_instance, CampaignReport, FuzzConfig, FuzzMode, Verdict};
use crate::inequalities::{evaluate_fujii_furuta, evaluate_mcintosh, McIntoshInstance};
use crate::linalg::{cnorm, norm, to_complex, Matrix};
use crate::refinement::{certified_improvement, kernel_mass, lemma1_check, lemma2_check, poisson_kernel, refined_mcintosh, ExponentialSum, StripSide};
use crate::rng::CounterRng;
use crate::spectral::{complex_power_apply, SpectralDecomposition, SymMatrix};
use crate::strip::{corollary3_bounds, default_corollary_grid, default_ts, default_xs, eval_grid, eval_strip, linspace, poisson_reconstruct, StripFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.2} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "closed-form worked example",
    "inequality fuzzing",
    "unitarity of imaginary powers",
    "expansion identity",
    "boundary and max modulus",
    "Poisson machinery",
    "equality and disjoint spectra",
    "certificate soundness",
    "lemma checks",
    "equality transfer and three-lines chain",
    "sup-norm explorer",
    "campaign reproducibility",
];

pub const COUNT: usize = TITLES.len();

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, fail: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(fail())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs criterion `id` (1-based).
pub fn run(id: usize) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => worked_example(),
        2 => inequality_fuzzing(),
        3 => unitarity(),
        4 => expansion_identity(),
        5 => boundary_max_modulus(),
        6 => poisson_machinery(),
        7 => equality_and_disjoint(),
        8 => certificate_soundness(),
        9 => lemmata(),
        10 => transfer_and_chain(),
        11 => explorer(),
        12 => reproducibility(),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Outcome { id, title: TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"), passed, detail, seconds }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=COUNT).map(run).collect()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

fn worked_example() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for a in [1.0, 2.0, 5.0] {
        for b in [0.5, 1.0, 2.0] {
            for r in [0.3, 0.5, 0.7] {
                let inst = lift(McIntoshInstance::new(SymMatrix::from_diag(&[a, 0.0]), Matrix::identity(2), SymMatrix::from_diag(&[1.0, b]), r))?;
                let rep = lift(evaluate_mcintosh(&inst))?;
                let (lhs, rhs) = (f64::powf(a, r), f64::powf(a, r) * f64::max(1.0, f64::powf(b, 1.0 - r)));
                let e = rel_err(rep.lhs, lhs).max(rel_err(rep.rhs, rhs));
                ensure(e <= 1e-10, || format!("a={a} b={b} r={r}: lhs {} vs {lhs}, rhs {} vs {rhs}", rep.lhs, rep.rhs))?;
                worst = worst.max(e);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!("27 cases, worst relative error {worst:.1e}"))
}

fn campaign_config(mode: FuzzMode, seed: u64) -> FuzzConfig {
    FuzzConfig { n_range: [1, 8], spectrum_range: [1e-2, 1e2], trials: 1000, seed, r_grid: default_exponent_grid(), mode }
}

/// The McIntosh and Cordes campaigns, shared by criteria 2 and 8.
fn campaigns() -> &'static std::result::Result<(CampaignReport, CampaignReport, f64), String> {
    static CELL: OnceLock<std::result::Result<(CampaignReport, CampaignReport, f64), String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let m = lift(run_campaign(&campaign_config(FuzzMode::Mcintosh, 0x4D43)))?;
        let c = lift(run_campaign(&campaign_config(FuzzMode::Cordes, 0x434F)))?;
        Ok((m, c, start.elapsed().as_secs_f64()))
    })
}

fn inequality_fuzzing() -> Check {
    let (m, c, campaign_secs) = campaigns().as_ref().map_err(Clone::clone)?;
    let start = Instant::now();
    let ff: Vec<Result<bool>> = (0..500u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = CounterRng::new(0x4646).substream(trial);
            let n = rng.int_in(1, 8);
            let sa: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
            let sb: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
            let a = random_spd_from(&sa, &mut rng);
            let b = random_spd_from(&sb, &mut rng);
            let x = Matrix::from_fn(n, n, |_, _| rng.normal());
            Ok(evaluate_fujii_furuta(&a, &x, &b)?.violated())
        })
        .collect();
    let ff_violations = ff.iter().filter(|r| !matches!(r, Ok(false))).count();
    let errors = m.errors + c.errors;
    let secs = campaign_secs + start.elapsed().as_secs_f64();
    ensure(m.violations == 0 && c.violations == 0 && ff_violations == 0 && errors == 0, || {
        format!("violations: mcintosh {}, cordes {}, fujii-furuta {ff_violations}; errors {errors}", m.violations, c.violations)
    })?;
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("1000 + 1000 + 500 trials, zero violations; min slack {:.2e} / {:.2e}", m.min_slack.unwrap_or(f64::NAN), c.min_slack.unwrap_or(f64::NAN)))
}

fn unitarity() -> Check {
    let mut rng = CounterRng::new(0x5541);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.int_in(1, 8);
        let s: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
        let a = random_spd_from(&s, &mut rng);
        let t = rng.uniform_in(-50.0, 50.0);
        let v = rng.normal_vec(n);
        let w = lift(complex_power_apply(&lift(SpectralDecomposition::of(&a))?, Complex64::new(0.0, t), &to_complex(&v)))?;
        let e = (cnorm(&w) - norm(&v)).abs() / norm(&v).max(1e-300);
        worst = worst.max(e);
    }
    ensure(worst <= 1e-9, || format!("norm drift {worst:.2e}"))?;
    Ok(format!("1000 trials, worst relative drift {worst:.1e}"))
}

/// 200 random normalized McIntosh instances with unit vectors, shared by
/// criteria 4 and 5.
fn strip_instances() -> Vec<StripFunction> {
    let mut rng = CounterRng::new(0x5354);
    (0..200)
        .map(|_| {
            let n = rng.int_in(1, 6);
            let sa: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
            let sb: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
            let a = random_spd_from(&sa, &mut rng);
            let b = random_spd_from(&sb, &mut rng);
            let x = Matrix::from_fn(n, n, |_, _| rng.normal());
            let r = rng.uniform_in(0.05, 0.95);
            let inst = McIntoshInstance::new(a, x, b, r).and_then(|i| i.normalize()).expect("random instance normalizes");
            StripFunction::mcintosh(&inst, &rng.unit_vec(n)).expect("normalized SPD instance")
        })
        .collect()
}

fn expansion_identity() -> Check {
    let ts = linspace(-30.0, 30.0, 200);
    let worst = strip_instances()
        .par_iter()
        .map(|f| -> std::result::Result<f64, String> {
            let sum = lift(f.expansion())?;
            let mut w = 0.0f64;
            for &t in &ts {
                w = w.max((lift(eval_strip(f, Complex64::new(0.0, t)))? - sum.eval(t)).norm());
            }
            Ok(w)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    ensure(worst <= 1e-8, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("200 instances x 200 points, max deviation {worst:.1e}"))
}

fn boundary_max_modulus() -> Check {
    let interior_ts = linspace(-40.0, 40.0, 161);
    let (bound, inner) = strip_instances()
        .par_iter()
        .map(|f| -> std::result::Result<(f64, f64), String> {
            let boundary = lift(eval_grid(f, &[0.0, 1.0], &default_ts()))?.max_modulus();
            let interior = lift(eval_grid(f, &default_xs(), &interior_ts))?.max_modulus();
            Ok((boundary, interior))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?
        .into_iter()
        .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(x), b.max(y)));
    ensure(bound <= 1.0 + 1e-8 && inner <= 1.0 + 1e-8, || format!("boundary max {bound}, interior max {inner}"))?;
    Ok(format!("max |F|: boundary {bound:.12}, 21x161 grid {inner:.12}"))
}

fn poisson_machinery() -> Check {
    let mut worst_mass = 0.0f64;
    for k in 1..=30 {
        let x = PI * k as f64 / 31.0;
        let e = (lift(kernel_mass(x))? - 2.0 * (PI - x)).abs();
        worst_mass = worst_mass.max(e);
    }
    ensure(worst_mass <= 1e-6, || format!("kernel mass error {worst_mass:.2e}"))?;
    let fs: Vec<StripFunction> = strip_instances().into_iter().take(50).collect();
    let z0 = Complex64::new(0.5, 0.0);
    let worst = fs
        .par_iter()
        .map(|f| -> std::result::Result<f64, String> {
            let rec = lift(poisson_reconstruct(f, z0, 40.0, 1e-8))?;
            Ok((rec.value - lift(eval_strip(f, z0))?).norm())
        })
        .collect::<std::result::Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("reconstruction error {worst:.2e}"))?;
    Ok(format!("mass error {worst_mass:.1e} over 30 abscissae; reconstruction error {worst:.1e} over 50 instances"))
}

/// Synthesized equality instances, shared by criteria 7 and 10.
fn equality_instances() -> Vec<(McIntoshInstance, Vec<f64>)> {
    let mut rng = CounterRng::new(0x4551);
    (0..100)
        .map(|_| {
            let n = rng.int_in(1, 6);
            let shared = rng.log_uniform(0.1, 10.0);
            synthesize_equality_instance(n, shared, rng.next_u64()).expect("synthesis")
        })
        .collect()
}

fn min_log_gap(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let (da, db) = (SpectralDecomposition::of(a)?, SpectralDecomposition::of(b)?);
    let mut gap = f64::INFINITY;
    for &l in da.eigenvalues() {
        for &m in db.eigenvalues() {
            gap = gap.min((l.ln() - m.ln()).abs());
        }
    }
    Ok(gap)
}

fn equality_and_disjoint() -> Check {
    for (i, (inst, v)) in equality_instances().iter().enumerate() {
        let verdict = lift(analyze_mcintosh_equality(inst, v, None))?;
        ensure(verdict.consistent() && !verdict.common_eigenvalues.is_empty(), || format!("equality instance {i}: {:?}", verdict.overall))?;
    }
    let mut rng = CounterRng::new(0x444A);
    let (mut accepted, mut drawn, mut worst) = (0, 0, f64::NEG_INFINITY);
    while accepted < 100 {
        drawn += 1;
        ensure(drawn <= 10_000, || format!("only {accepted} disjoint instances in 10000 draws"))?;
        let n = rng.int_in(1, 6);
        let sa: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
        let sb: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
        let a = random_spd_from(&sa, &mut rng);
        let b = random_spd_from(&sb, &mut rng);
        let x = Matrix::from_fn(n, n, |_, _| rng.normal());
        let inst = lift(McIntoshInstance::new(a, x, b, rng.uniform_in(0.05, 0.95)).and_then(|i| i.normalize()))?;
        if lift(min_log_gap(&inst.a, &inst.b))? < 1e-2 {
            continue;
        }
        let rep = lift(refined_mcintosh(&inst))?;
        let Some(bound) = rep.bound else { continue };
        let ratio = rep.plain.ratio.unwrap_or(0.0);
        ensure(ratio <= 1.0 - bound.c_cert + 1e-9, || format!("ratio {ratio} above 1 - c_cert = {}", 1.0 - bound.c_cert))?;
        worst = worst.max(ratio - (1.0 - bound.c_cert));
        accepted += 1;
    }
    Ok(format!("100 equality verdicts consistent; 100 disjoint instances ({drawn} drawn), max ratio - (1 - c_cert) = {worst:.2e}"))
}

fn certificate_soundness() -> Check {
    let (m, c, _) = campaigns().as_ref().map_err(Clone::clone)?;
    let (mut certified, mut underflowed) = (0, 0);
    for (label, rep) in [("mcintosh", m), ("cordes", c)] {
        for t in &rep.records {
            let Some(d) = t.d.filter(|&d| d > 0.0) else { continue };
            let cert = t.c_cert.ok_or_else(|| format!("{label} trial {}: d = {d} without a certificate", t.trial))?;
            // below f64::MIN_POSITIVE the certificate is only representable as a logarithm
            let log_cert = t.log_c_cert.unwrap_or(f64::NEG_INFINITY);
            ensure(cert > 0.0 || log_cert.is_finite(), || format!("{label} trial {}: c_cert = {cert} (ln {log_cert}) with d = {d}", t.trial))?;
            underflowed += (cert == 0.0) as usize;
            let ratio = t.ratio.ok_or_else(|| format!("{label} trial {}: no ratio", t.trial))?;
            ensure(ratio <= 1.0 - cert + 1e-9 && t.verdict != Verdict::Unsound, || {
                format!("{label} trial {}: ratio {ratio} above 1 - c_cert = {}", t.trial, 1.0 - cert)
            })?;
            certified += 1;
        }
    }
    let ds: Vec<f64> = (1..=50).map(|k| k as f64 / 10.0).collect();
    for n in [2, 4, 8] {
        let mut last = 0.0;
        for &d in &ds {
            let cert = lift(certified_improvement(n, 0.5, d, StripSide::Left))?.c_cert;
            ensure(cert >= last, || format!("c_cert decreases at n={n}, d={d}: {cert} < {last}"))?;
            last = cert;
        }
    }
    Ok(format!("{certified} certified campaign trials sound ({underflowed} with c_cert below f64 range, positive in log form); c_cert monotone on the d grid for n = 2, 4, 8"))
}

/// Random 1 to 10 term sum with every `|d_j| >= eta`.
pub fn random_lemma1_sum(rng: &mut CounterRng) -> (ExponentialSum, f64) {
    let eta = rng.log_uniform(0.1, 3.0);
    let terms = rng.int_in(1, 10);
    let sum = ExponentialSum::new((0..terms).map(|_| {
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        (rng.normal(), sign * eta * rng.log_uniform(1.0, 8.0))
    }));
    (sum, eta)
}

/// A random trigonometric sum `g` on `[0, x]` whose sign is chosen so that
/// `int_0^x g <= (x / 2) sup |g|`, paired with the kernel slice `f = P(a, .)`.
pub struct Lemma2Pair {
    pub abscissa: f64,
    pub x: f64,
    pub waves: Vec<(f64, f64, f64)>,
}

impl Lemma2Pair {
    pub fn random(rng: &mut CounterRng) -> Self {
        let abscissa = rng.uniform_in(0.1, PI - 0.1);
        let x = rng.log_uniform(0.5, 20.0);
        let waves = (0..rng.int_in(1, 6)).map(|_| (rng.normal(), rng.uniform_in(0.0, 5.0), rng.uniform_in(0.0, 2.0 * PI))).collect();
        let mut pair = Self { abscissa, x, waves };
        // g -> -g turns a large positive mean into a negative one
        let mean: f64 = (0..2001).map(|i| pair.g(x * i as f64 / 2000.0)).sum::<f64>() / 2001.0;
        if mean > 0.0 {
            pair.waves.iter_mut().for_each(|w| w.0 = -w.0);
        }
        pair
    }

    pub fn f(&self, y: f64) -> f64 {
        poisson_kernel(self.abscissa, y).expect("abscissa in (0, pi)")
    }

    pub fn g(&self, y: f64) -> f64 {
        self.waves.iter().map(|&(c, w, p)| c * (w * y + p).cos()).sum()
    }
}

fn lemmata() -> Check {
    let start = Instant::now();
    let mut rng = CounterRng::new(0x4C31);
    for i in 0..500 {
        let (sum, eta) = random_lemma1_sum(&mut rng);
        let rep = lift(lemma1_check(&sum, eta))?;
        ensure(rep.holds, || format!("lemma 1 sum {i}: lhs {} > rhs {}", rep.lhs, rep.rhs))?;
    }
    let mut rng = CounterRng::new(0x4C32);
    for i in 0..500 {
        let pair = Lemma2Pair::random(&mut rng);
        let rep = lift(lemma2_check(|y| pair.f(y), |y| pair.g(y), pair.x, None))?;
        match rep.holds {
            Some(true) => {}
            Some(false) => return Err(format!("lemma 2 pair {i}: lhs {} > rhs {}", rep.lhs, rep.rhs)),
            None => return Err(format!("lemma 2 pair {i}: generator produced an inadmissible pair")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("500 + 500 admissible inputs hold ({secs:.2} s)"))
}

fn transfer_and_chain() -> Check {
    let grid = default_exponent_grid();
    let mut worst = 0.0f64;
    for (i, (inst, v)) in equality_instances().iter().enumerate() {
        let rep = lift(equality_transfer_check(inst, v, &grid, 1e-8))?;
        ensure(rep.status == TransferStatus::Transfers && rep.max_deviation <= 1e-8, || {
            format!("mcintosh equality instance {i}: {:?}, deviation {:.2e}", rep.status, rep.max_deviation)
        })?;
        worst = worst.max(rep.max_deviation);
    }
    let mut rng = CounterRng::new(0x4332);
    for i in 0..100 {
        let n = rng.int_in(1, 6);
        let (inst, v) = lift(synthesize_cordes_equality_instance(n, rng.log_uniform(0.1, 10.0), rng.next_u64()))?;
        let rep = lift(equality_transfer_check(&inst, &v, &grid, 1e-8))?;
        ensure(rep.status == TransferStatus::Transfers && rep.max_deviation <= 1e-8, || {
            format!("cordes equality instance {i}: {:?}, deviation {:.2e}", rep.status, rep.max_deviation)
        })?;
        worst = worst.max(rep.max_deviation);
    }
    let t_grid = default_corollary_grid();
    let mut rng = CounterRng::new(0x4333);
    let mut refined = 0;
    for i in 0..200 {
        let n = rng.int_in(1, 6);
        let sa: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
        let sb: Vec<f64> = (0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect();
        let a = random_spd_from(&sa, &mut rng);
        let b = random_spd_from(&sb, &mut rng);
        let x = Matrix::from_fn(n, n, |_, _| rng.normal());
        let r = rng.uniform_in(0.05, 0.95);
        let inst = lift(McIntoshInstance::new(a, x, b, r).and_then(|i| i.normalize()))?;
        let rep = lift(corollary3_bounds(&inst, &rng.unit_vec(n), r, &t_grid))?;
        ensure(rep.chain_holds, || format!("chain instance {i}: {rep:?}"))?;
        refined += rep.refinement_changed as usize;
    }
    Ok(format!("200 equality transfers, max deviation {worst:.1e}; chain holds on 200 instances ({refined} suprema moved under refinement)"))
}

fn explorer() -> Check {
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let r = k as f64 / 10.0;
        let rep = pairing(&lift(ApproxInstance::constant(r))?);
        worst = worst.max((rep.value - 1.0).abs());
    }
    ensure(worst <= 1e-6, || format!("pairing of the constant 1 off by {worst:.2e}"))?;
    let delta = 1.0;
    let constraint = lift(ClassConstraint::new(ClassKind::H, delta))?;
    let first = lift(search_sup(2, constraint, 0.5, 20_000, 0x5335))?;
    let second = lift(search_sup(2, constraint, 0.5, 20_000, 0x5335))?;
    let bound = 1.0 - lift(certified_improvement(2, 0.5, 2.0 * delta, StripSide::Right))?.c_cert;
    ensure(first.best_value > 0.0 && first.best_value <= bound + 1e-6, || format!("best value {} outside (0, {bound}]", first.best_value))?;
    ensure(first == second, || "two runs with the same seed differ".into())?;
    Ok(format!("constant pairing error {worst:.1e}; best value {:.6} <= {bound:.6}, deterministic", first.best_value))
}

fn reproducibility() -> Check {
    static RUNS: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("opnorm-selftest-{}-{}", std::process::id(), RUNS.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"n_range":[1,5],"spectrum_range":[0.01,100],"trials":60,"seed":12,"r_grid":[0.2,0.5,0.8],"mode":"mcintosh"}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let csv = dir.join(format!("campaign-{run}.csv"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["opnorm", "fuzz", "--config", config.to_str().unwrap_or_default(), "--out", csv.to_str().unwrap_or_default()];
        let code = crate::cli::run(args, &mut out, &mut err);
        ensure(code == 0, || format!("fuzz exited {code}: {}", String::from_utf8_lossy(&err)))?;
        outputs.push((std::fs::read(&csv).map_err(|e| e.to_string())?, out));
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0].0 == outputs[1].0, || "campaign CSV differs between runs".into())?;
    ensure(outputs[0].1 == outputs[1].1, || "report JSON differs between runs".into())?;
    Ok(format!("CSV ({} bytes) and JSON ({} bytes) byte-identical across two runs", outputs[0].0.len(), outputs[0].1.len()))
}
