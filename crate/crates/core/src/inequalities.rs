//! Two-sided evaluation of the McIntosh, Fujii-Furuta, Cordes, Heinz-Kato
//! and Loewner-Heinz inequalities.

use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::linalg::{dot, norm, normalized, Matrix};
use crate::rng::CounterRng;
use crate::spectral::{operator_norm, psd_margin, real_power, SpectralDecomposition, SymMatrix};

/// Relative tolerance above which `lhs > rhs` counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;
/// How close `||AX||`, `||XB||` (or `||AB||`) must be to 1 for an instance to
/// count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// `||A^r X B^{1-r}|| <= ||AX||^r ||XB||^{1-r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct McIntoshInstance {
    pub a: SymMatrix,
    pub x: Matrix,
    pub b: SymMatrix,
    pub r: f64,
    normalized: bool,
}

impl McIntoshInstance {
    pub fn new(a: SymMatrix, x: Matrix, b: SymMatrix, r: f64) -> Result<Self> {
        let n = a.n();
        for found in [x.rows(), x.cols(), b.n()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        check_range("r", r, 0.0, 1.0, false)?;
        Ok(Self { a, x, b, r, normalized: false })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `(||AX||, ||XB||)`.
    pub fn scales(&self) -> Result<(f64, f64)> {
        let ax = operator_norm(&self.a.matrix().matmul(&self.x)?)?.norm;
        let xb = operator_norm(&self.x.matmul(self.b.matrix())?)?.norm;
        Ok((ax, xb))
    }

    /// Sets the normalized flag after checking `||AX|| = 1 = ||XB||`.
    pub fn mark_normalized(mut self) -> Result<Self> {
        let (ax, xb) = self.scales()?;
        if (ax - 1.0).abs() > NORMALIZATION_TOL || (xb - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized("||AX|| and ||XB|| must both equal 1"));
        }
        self.normalized = true;
        Ok(self)
    }

    /// `A -> A / ||AX||`, `B -> B / ||XB||`.
    pub fn normalize(&self) -> Result<Self> {
        let (ax, xb) = self.scales()?;
        if ax == 0.0 || xb == 0.0 {
            return Err(Error::Degenerate("||AX|| = 0 or ||XB|| = 0; the inequality reads 0 <= 0"));
        }
        Ok(Self { a: self.a.scale(1.0 / ax), x: self.x.clone(), b: self.b.scale(1.0 / xb), r: self.r, normalized: true })
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        check_range("r", r, 0.0, 1.0, false)?;
        Ok(Self { r, ..self.clone() })
    }

    /// `(B, X^T, A, 1 - r)`: same operator norm on both sides, with the roles
    /// of the two spectra exchanged.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.b.clone(),
            x: self.x.transpose(),
            b: self.a.clone(),
            r: 1.0 - self.r,
            normalized: self.normalized,
        }
    }

    /// `A^r X B^{1-r}` for the given exponent.
    pub fn interpolated_operator(&self, r: f64) -> Result<Matrix> {
        let ar = real_power(&SpectralDecomposition::of(&self.a)?, r)?;
        let br = real_power(&SpectralDecomposition::of(&self.b)?, 1.0 - r)?;
        Matrix::chain(&[ar.matrix(), &self.x, br.matrix()])
    }
}

/// `||A^s B^s|| <= ||AB||^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CordesInstance {
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub s: f64,
    normalized: bool,
}

impl CordesInstance {
    pub fn new(a: SymMatrix, b: SymMatrix, s: f64) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
        }
        check_range("s", s, 0.0, 1.0, false)?;
        Ok(Self { a, b, s, normalized: false })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn product_norm(&self) -> Result<f64> {
        Ok(operator_norm(&self.a.matrix().matmul(self.b.matrix())?)?.norm)
    }

    pub fn mark_normalized(mut self) -> Result<Self> {
        if (self.product_norm()? - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized("||AB|| must equal 1"));
        }
        self.normalized = true;
        Ok(self)
    }

    /// Splits the scale evenly: `A, B -> A / sqrt(||AB||), B / sqrt(||AB||)`.
    pub fn normalize(&self) -> Result<Self> {
        let p = self.product_norm()?;
        if p == 0.0 {
            return Err(Error::Degenerate("||AB|| = 0"));
        }
        let c = 1.0 / p.sqrt();
        Ok(Self { a: self.a.scale(c), b: self.b.scale(c), s: self.s, normalized: true })
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        check_range("s", s, 0.0, 1.0, false)?;
        Ok(Self { s, ..self.clone() })
    }

    /// `(B, A, s)`; `||A^s B^s|| = ||B^s A^s||`.
    pub fn adjoint(&self) -> Self {
        Self { a: self.b.clone(), b: self.a.clone(), s: self.s, normalized: self.normalized }
    }

    pub fn interpolated_operator(&self, s: f64) -> Result<Matrix> {
        let as_ = real_power(&SpectralDecomposition::of(&self.a)?, s)?;
        let bs = real_power(&SpectralDecomposition::of(&self.b)?, s)?;
        as_.matrix().matmul(bs.matrix())
    }
}

/// An instance whose left-hand operator interpolates in one exponent:
/// `A^s X B^{1-s}` or `A^s B^s`.
pub trait Interpolation {
    fn exponent(&self) -> f64;
    fn normalized(&self) -> bool;
    fn operator_at(&self, s: f64) -> Result<Matrix>;
}

impl Interpolation for McIntoshInstance {
    fn exponent(&self) -> f64 {
        self.r
    }
    fn normalized(&self) -> bool {
        self.normalized
    }
    fn operator_at(&self, s: f64) -> Result<Matrix> {
        self.interpolated_operator(s)
    }
}

impl Interpolation for CordesInstance {
    fn exponent(&self) -> f64 {
        self.s
    }
    fn normalized(&self) -> bool {
        self.normalized
    }
    fn operator_at(&self, s: f64) -> Result<Matrix> {
        self.interpolated_operator(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Violated,
    /// `rhs = 0`; holds vacuously.
    Trivial,
    HypothesesUnmet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub slack: f64,
    /// Unit vector attaining the left-hand norm.
    pub witness: Vec<f64>,
    pub status: Status,
}

impl InequalityReport {
    fn new(name: &'static str, lhs: f64, rhs: f64, witness: Vec<f64>) -> Self {
        let ratio = (rhs > 0.0).then(|| lhs / rhs);
        let status = match ratio {
            None => Status::Trivial,
            Some(q) if q > 1.0 + VIOLATION_TOL => Status::Violated,
            Some(_) => Status::Holds,
        };
        Self { name, lhs, rhs, ratio, slack: rhs - lhs, witness, status }
    }

    pub fn violated(&self) -> bool {
        self.status == Status::Violated
    }
}

pub fn normalize_mcintosh(inst: &McIntoshInstance) -> Result<McIntoshInstance> {
    inst.normalize()
}

pub fn evaluate_mcintosh(inst: &McIntoshInstance) -> Result<InequalityReport> {
    let op = inst.interpolated_operator(inst.r)?;
    let lhs = operator_norm(&op)?;
    let (ax, xb) = inst.scales()?;
    let rhs = ax.powf(inst.r) * xb.powf(1.0 - inst.r);
    Ok(InequalityReport::new("mcintosh", lhs.norm, rhs, lhs.witness))
}

/// `||AXB|| <= ||A^2 X||^{1/2} ||X B^2||^{1/2}`, evaluated directly (no
/// square roots of matrices), so it cross-checks the McIntosh path.
pub fn evaluate_fujii_furuta(a: &SymMatrix, x: &Matrix, b: &SymMatrix) -> Result<InequalityReport> {
    let (am, bm) = (a.matrix(), b.matrix());
    let lhs = operator_norm(&Matrix::chain(&[am, x, bm])?)?;
    let a2x = operator_norm(&Matrix::chain(&[am, am, x])?)?.norm;
    let xb2 = operator_norm(&Matrix::chain(&[x, bm, bm])?)?.norm;
    Ok(InequalityReport::new("fujii-furuta", lhs.norm, (a2x * xb2).sqrt(), lhs.witness))
}

pub fn evaluate_cordes(inst: &CordesInstance) -> Result<InequalityReport> {
    let lhs = operator_norm(&inst.interpolated_operator(inst.s)?)?;
    let rhs = inst.product_norm()?.powf(inst.s);
    Ok(InequalityReport::new("cordes", lhs.norm, rhs, lhs.witness))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeinzKatoInput {
    pub t: Matrix,
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const HEINZ_KATO_PROBES: usize = 100;
const HEINZ_KATO_PROBE_SEED: u64 = 0x4845_494E_5A4B_4154;

/// `|<Tx, y>| <= ||A^alpha x|| ||B^{1-alpha} y||` under `||Tv|| <= ||Av||`,
/// `||T^T w|| <= ||Bw||`.
///
/// The hypotheses are decided exactly as `T^T T <= A^2` and `T T^T <= B^2`;
/// a random probe pass runs first and short-circuits on a cheap counterexample.
pub fn evaluate_heinz_kato(input: &HeinzKatoInput) -> Result<InequalityReport> {
    let HeinzKatoInput { t, a, b, alpha, x, y } = input;
    let n = a.n();
    for found in [t.rows(), t.cols(), b.n(), x.len(), y.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    check_range("alpha", *alpha, 0.0, 1.0, false)?;
    let (am, bm) = (a.matrix(), b.matrix());
    let tt = t.transpose();

    let probe_ok = |v: &[f64]| {
        let slack = 1e-12 * norm(v).max(1.0) * t.max_abs().max(am.max_abs()).max(bm.max_abs()).max(1.0);
        norm(&t.mul_vec(v)) <= norm(&am.mul_vec(v)) + slack && norm(&tt.mul_vec(v)) <= norm(&bm.mul_vec(v)) + slack
    };
    let mut rng = CounterRng::new(HEINZ_KATO_PROBE_SEED);
    let mut hypotheses = probe_ok(x) && probe_ok(y) && (0..HEINZ_KATO_PROBES).all(|_| probe_ok(&rng.unit_vec(n)));
    if hypotheses {
        let a2 = SymMatrix::from_computed(am.matmul(am)?);
        let b2 = SymMatrix::from_computed(bm.matmul(bm)?);
        let ttt = SymMatrix::from_computed(tt.matmul(t)?);
        let ttt_adj = SymMatrix::from_computed(t.matmul(&tt)?);
        let tol_a = 1e-10 * a2.matrix().max_abs().max(1.0);
        let tol_b = 1e-10 * b2.matrix().max_abs().max(1.0);
        hypotheses = psd_margin(&a2, &ttt)? >= -tol_a && psd_margin(&b2, &ttt_adj)? >= -tol_b;
    }

    let lhs = dot(&t.mul_vec(x), y).abs();
    let ax = real_power(&SpectralDecomposition::of(a)?, *alpha)?;
    let by = real_power(&SpectralDecomposition::of(b)?, 1.0 - alpha)?;
    let rhs = norm(&ax.matrix().mul_vec(x)) * norm(&by.matrix().mul_vec(y));
    let witness = normalized(x).unwrap_or_else(|| vec![0.0; n]);
    let mut report = InequalityReport::new("heinz-kato", lhs, rhs, witness);
    if !hypotheses {
        report.status = Status::HypothesesUnmet;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoewnerHeinzReport {
    pub alpha: f64,
    /// `A >= B >= 0`.
    pub hypothesis_met: bool,
    /// `lambda_min(A^alpha - B^alpha)`; absent when the hypothesis fails.
    pub min_eigenvalue: Option<f64>,
    pub holds: Option<bool>,
}

pub const LOEWNER_TOL: f64 = 1e-8;

/// `A >= B >= 0` implies `A^alpha >= B^alpha` for `alpha` in `[0, 1]`.
pub fn evaluate_loewner_heinz(a: &SymMatrix, b: &SymMatrix, alpha: f64) -> Result<LoewnerHeinzReport> {
    check_range("alpha", alpha, 0.0, 1.0, false)?;
    let db = SpectralDecomposition::of(b)?;
    let scale = a.matrix().max_abs().max(b.matrix().max_abs()).max(1.0);
    let b_psd = db.min_eigenvalue() >= -db.default_floor();
    let hypothesis_met = b_psd && psd_margin(a, b)? >= -1e-12 * scale;
    if !hypothesis_met {
        return Ok(LoewnerHeinzReport { alpha, hypothesis_met, min_eigenvalue: None, holds: None });
    }
    let aa = real_power(&SpectralDecomposition::of(a)?, alpha)?;
    let ba = real_power(&db, alpha)?;
    let margin = psd_margin(&aa, &ba)?;
    Ok(LoewnerHeinzReport { alpha, hypothesis_met, min_eigenvalue: Some(margin), holds: Some(margin >= -LOEWNER_TOL) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    fn diag(v: &[f64]) -> SymMatrix {
        SymMatrix::from_diag(v)
    }

    fn rotation(theta: f64) -> Matrix {
        let (s, c) = theta.sin_cos();
        Matrix::from_rows(&[&[c, -s], &[s, c]])
    }

    fn random_instance(n: usize, r: f64, rng: &mut CounterRng) -> McIntoshInstance {
        let a = crate::fuzz::random_spd_from(&(0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect::<Vec<_>>(), rng);
        let b = crate::fuzz::random_spd_from(&(0..n).map(|_| rng.log_uniform(1e-2, 1e2)).collect::<Vec<_>>(), rng);
        let x = Matrix::from_fn(n, n, |_, _| rng.normal());
        McIntoshInstance::new(a, x, b, r).unwrap()
    }

    #[test]
    fn normalize_scalar_example() {
        let inst = McIntoshInstance::new(SymMatrix::identity(2).scale(2.0), Matrix::identity(2), SymMatrix::identity(2).scale(4.0), 0.3).unwrap();
        let n = normalize_mcintosh(&inst).unwrap();
        assert!(n.is_normalized());
        assert!(n.a.matrix().sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-15);
        assert!(n.b.matrix().sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-15);
        let again = normalize_mcintosh(&n).unwrap();
        assert!(again.a.matrix().sub(n.a.matrix()).unwrap().max_abs() <= 1e-12);
        assert!(again.b.matrix().sub(n.b.matrix()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn normalize_degenerate() {
        let inst = McIntoshInstance::new(SymMatrix::identity(2), Matrix::zeros(2, 2), SymMatrix::identity(2), 0.5).unwrap();
        assert!(matches!(normalize_mcintosh(&inst), Err(Error::Degenerate(_))));
        let rep = evaluate_mcintosh(&inst).unwrap();
        assert_eq!(rep.status, Status::Trivial);
        assert_eq!(rep.ratio, None);
    }

    #[test]
    fn normalization_preserves_ratio() {
        let mut rng = CounterRng::new(17);
        for _ in 0..20 {
            let inst = random_instance(4, 0.35, &mut rng);
            let before = evaluate_mcintosh(&inst).unwrap().ratio.unwrap();
            let after = evaluate_mcintosh(&inst.normalize().unwrap()).unwrap().ratio.unwrap();
            assert!((before - after).abs() <= 1e-10, "{before} vs {after}");
        }
    }

    #[test]
    fn mark_normalized_checks_scales() {
        let inst = McIntoshInstance::new(diag(&[2.0, 3.0]), Matrix::from_diag(&[0.5, 0.05]), diag(&[2.0, 5.0]), 0.5).unwrap();
        assert!(inst.clone().mark_normalized().unwrap().is_normalized());
        let off = McIntoshInstance::new(diag(&[4.0, 3.0]), Matrix::identity(2), diag(&[1.0, 1.0]), 0.5).unwrap();
        assert!(matches!(off.mark_normalized(), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn psd_example_from_two_by_two() {
        for r in [0.3, 0.5, 0.7] {
            let inst = McIntoshInstance::new(diag(&[1.0, 0.0]), Matrix::identity(2), diag(&[1.0, 2.0]), r).unwrap();
            let rep = evaluate_mcintosh(&inst).unwrap();
            assert!((rep.lhs - 1.0).abs() < 1e-14);
            assert!((rep.rhs - 2f64.powf(1.0 - r)).abs() < 1e-14);
            assert!(rep.slack > 0.0);
            assert_eq!(rep.status, Status::Holds);
        }
    }

    #[test]
    fn identity_and_diagonal_equality() {
        let id = McIntoshInstance::new(SymMatrix::identity(3), Matrix::identity(3), SymMatrix::identity(3), 0.4).unwrap();
        let rep = evaluate_mcintosh(&id).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-14 && (rep.rhs - 1.0).abs() < 1e-14);

        let eq = McIntoshInstance::new(diag(&[2.0, 3.0]), Matrix::from_diag(&[0.5, 0.05]), diag(&[2.0, 5.0]), 0.5).unwrap();
        let rep = evaluate_mcintosh(&eq).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-14, "{}", rep.lhs);
        assert!((rep.rhs - 1.0).abs() < 1e-14);
        assert_eq!(rep.witness, unit(2, 0));
    }

    #[test]
    fn fujii_furuta_examples() {
        let i = SymMatrix::identity(2);
        let rep = evaluate_fujii_furuta(&i, &Matrix::identity(2), &i).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-15 && (rep.rhs - 1.0).abs() < 1e-15);

        // P Q P with P = Q = diag(1, 2).
        let p = diag(&[1.0, 2.0]);
        let rep = evaluate_fujii_furuta(&p, p.matrix(), &p).unwrap();
        assert!((rep.lhs - 8.0).abs() < 1e-13);
        assert!((rep.rhs - 8.0).abs() < 1e-13);
    }

    #[test]
    fn fujii_furuta_matches_relabeled_mcintosh() {
        let mut rng = CounterRng::new(23);
        for _ in 0..20 {
            let inst = random_instance(4, 0.5, &mut rng);
            let ff = evaluate_fujii_furuta(&inst.a, &inst.x, &inst.b).unwrap();
            let a2 = SymMatrix::from_computed(inst.a.matrix().matmul(inst.a.matrix()).unwrap());
            let b2 = SymMatrix::from_computed(inst.b.matrix().matmul(inst.b.matrix()).unwrap());
            let mc = evaluate_mcintosh(&McIntoshInstance::new(a2, inst.x.clone(), b2, 0.5).unwrap()).unwrap();
            assert!(ff.ratio.unwrap() <= 1.0 + VIOLATION_TOL);
            assert!((ff.ratio.unwrap() - mc.ratio.unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn cordes_examples() {
        let a = diag(&[2.0, 0.5]);
        let b = diag(&[0.5, 2.0]);
        for s in [0.0, 0.2, 0.5, 1.0] {
            let rep = evaluate_cordes(&CordesInstance::new(a.clone(), b.clone(), s).unwrap()).unwrap();
            assert!((rep.lhs - 1.0).abs() < 1e-14 && (rep.rhs - 1.0).abs() < 1e-14);
        }
        let mut rng = CounterRng::new(2);
        let a = crate::fuzz::random_spd_from(&[0.3, 2.0, 5.0], &mut rng);
        let b = crate::fuzz::random_spd_from(&[1.5, 0.2, 4.0], &mut rng);
        let rep = evaluate_cordes(&CordesInstance::new(a, b, 1.0).unwrap()).unwrap();
        assert!((rep.lhs - rep.rhs).abs() <= 1e-12 * rep.rhs);
    }

    #[test]
    fn cordes_rotated_strict() {
        // Oracle: closed-form 2x2 products with the known rotation.
        let r = rotation(std::f64::consts::FRAC_PI_4);
        let a = diag(&[4.0, 1.0]);
        let b = diag(&[1.0, 0.25]).conjugate(&r).unwrap();
        let rep = evaluate_cordes(&CordesInstance::new(a, b, 0.5).unwrap()).unwrap();
        let a_half = Matrix::from_diag(&[2.0, 1.0]);
        let b_half = diag(&[1.0, 0.5]).conjugate(&r).unwrap().into_matrix();
        let oracle_lhs = crate::spectral::operator_norm(&a_half.matmul(&b_half).unwrap()).unwrap().norm;
        let ab = Matrix::from_diag(&[4.0, 1.0]).matmul(&diag(&[1.0, 0.25]).conjugate(&r).unwrap().into_matrix()).unwrap();
        // 2x2 singular value closed form: sqrt of the largest root of the Gram characteristic polynomial.
        let g = ab.transpose().matmul(&ab).unwrap();
        let (tr, det) = (g[(0, 0)] + g[(1, 1)], g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]);
        let oracle_rhs = ((tr + (tr * tr - 4.0 * det).sqrt()) / 2.0).sqrt().sqrt();
        assert!((rep.lhs - oracle_lhs).abs() < 1e-12);
        assert!((rep.rhs - oracle_rhs).abs() < 1e-12);
        assert!(rep.ratio.unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn heinz_kato_examples() {
        let i = SymMatrix::identity(2);
        let e1 = unit(2, 0);
        let rep = evaluate_heinz_kato(&HeinzKatoInput {
            t: Matrix::identity(2),
            a: i.clone(),
            b: i.clone(),
            alpha: 0.5,
            x: e1.clone(),
            y: e1.clone(),
        })
        .unwrap();
        assert_eq!(rep.status, Status::Holds);
        assert!((rep.lhs - 1.0).abs() < 1e-15 && (rep.rhs - 1.0).abs() < 1e-15);

        let rep = evaluate_heinz_kato(&HeinzKatoInput {
            t: Matrix::zeros(2, 2),
            a: i.clone(),
            b: i.clone(),
            alpha: 0.5,
            x: e1.clone(),
            y: vec![0.3, 0.4],
        })
        .unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.rhs > 0.0);

        // T = A = B = diag(1, 2): direct evaluation.
        let d = diag(&[1.0, 2.0]);
        let (x, y) = (vec![0.6, -1.3], vec![2.0, 0.7]);
        let rep = evaluate_heinz_kato(&HeinzKatoInput { t: d.matrix().clone(), a: d.clone(), b: d.clone(), alpha: 0.3, x: x.clone(), y: y.clone() }).unwrap();
        let lhs = (0.6 * 2.0 + 2.0 * -1.3 * 0.7f64).abs();
        let rhs = (0.36f64 + 2f64.powf(0.6) * 1.69).sqrt() * (4.0 + 2f64.powf(1.4) * 0.49f64).sqrt();
        assert_eq!(rep.status, Status::Holds);
        assert!((rep.lhs - lhs).abs() < 1e-14);
        assert!((rep.rhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn heinz_kato_unmet_hypothesis() {
        let rep = evaluate_heinz_kato(&HeinzKatoInput {
            t: Matrix::identity(2).scale(2.0),
            a: SymMatrix::identity(2),
            b: SymMatrix::identity(2),
            alpha: 0.5,
            x: unit(2, 0),
            y: unit(2, 0),
        })
        .unwrap();
        assert_eq!(rep.status, Status::HypothesesUnmet);
    }

    #[test]
    fn loewner_heinz_examples() {
        let rep = evaluate_loewner_heinz(&SymMatrix::identity(2).scale(4.0), &SymMatrix::identity(2), 0.5).unwrap();
        assert_eq!(rep.holds, Some(true));
        assert!((rep.min_eigenvalue.unwrap() - 1.0).abs() < 1e-14);

        let a = diag(&[3.0, 2.0]);
        let b = diag(&[1.0, 2.0]);
        let rep = evaluate_loewner_heinz(&a, &b, 1.0).unwrap();
        assert_eq!(rep.holds, Some(true));
        assert!((rep.min_eigenvalue.unwrap() - psd_margin(&a, &b).unwrap()).abs() < 1e-14);

        // Oracle: 2x2 closed-form eigenvalues of A^0.5 - B^0.5.
        let r = rotation(0.4);
        let b = diag(&[1.5, 0.2]).conjugate(&r).unwrap();
        let rep = evaluate_loewner_heinz(&diag(&[2.0, 2.0]), &b, 0.5).unwrap();
        let bh = diag(&[1.5f64.sqrt(), 0.2f64.sqrt()]).conjugate(&r).unwrap();
        let diff = Matrix::from_diag(&[2f64.sqrt(), 2f64.sqrt()]).sub(bh.matrix()).unwrap();
        let (tr, det) = (diff[(0, 0)] + diff[(1, 1)], diff[(0, 0)] * diff[(1, 1)] - diff[(0, 1)] * diff[(1, 0)]);
        let oracle = (tr - (tr * tr - 4.0 * det).sqrt()) / 2.0;
        assert_eq!(rep.holds, Some(true));
        assert!((rep.min_eigenvalue.unwrap() - oracle).abs() < 1e-12);

        let rep = evaluate_loewner_heinz(&SymMatrix::identity(2), &SymMatrix::identity(2).scale(2.0), 0.5).unwrap();
        assert!(!rep.hypothesis_met);
        assert_eq!(rep.holds, None);
    }

    #[test]
    fn parameter_ranges() {
        let i = SymMatrix::identity(2);
        assert!(McIntoshInstance::new(i.clone(), Matrix::identity(2), i.clone(), 1.5).is_err());
        assert!(McIntoshInstance::new(i.clone(), Matrix::identity(3), i.clone(), 0.5).is_err());
        assert!(CordesInstance::new(i.clone(), i, -0.1).is_err());
    }

    #[test]
    fn scaling_covariance_and_witness() {
        let mut rng = CounterRng::new(41);
        for _ in 0..30 {
            let n = rng.int_in(2, 6);
            let r = rng.uniform_in(0.05, 0.95);
            let inst = random_instance(n, r, &mut rng);
            let base = evaluate_mcintosh(&inst).unwrap();
            let (c1, c2, c3) = (rng.log_uniform(1e-2, 1e2), rng.log_uniform(1e-2, 1e2), rng.log_uniform(1e-2, 1e2));
            let scaled = McIntoshInstance::new(inst.a.scale(c1), inst.x.scale(c2), inst.b.scale(c3), r).unwrap();
            let rep = evaluate_mcintosh(&scaled).unwrap();
            assert!((rep.ratio.unwrap() - base.ratio.unwrap()).abs() <= 1e-9);
            let op = inst.interpolated_operator(r).unwrap();
            assert!(norm(&op.mul_vec(&base.witness)) >= (1.0 - 1e-8) * base.lhs);
        }
    }
}
