//! Equality cases: common eigenvalues, the projector mapping conditions and
//! transfer of equality across exponents.
//!
//! If `||A^r X B^{1-r} v|| = 1` for a normalized instance, then for every
//! eigenvalue `mu` of `B` the vector `X pi_mu v` is either zero or an
//! eigenvector of `A` with eigenvalue `mu`. For `||A^s B^s v|| = 1` with
//! `||AB|| = 1`, `pi_mu v` is zero or an eigenvector of `A` with eigenvalue `1 / mu`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{CordesInstance, Interpolation, McIntoshInstance};
use crate::linalg::{norm, Matrix};
use crate::spectral::{operator_norm, spectral_projector, SpectralDecomposition};

/// Relative tolerance for matching eigenvalues across spectra.
pub const COMMON_EIGENVALUE_TOL: f64 = 1e-8;
/// A cluster with `||w|| <= VISIBILITY * ||X||` imposes no condition.
pub const VISIBILITY: f64 = 1e-9;
/// Verdicts are asserted only when the achieved norm reaches `1 - ACHIEVED_TOL`.
pub const ACHIEVED_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonEigenvalue {
    pub lambda: f64,
    pub mu: f64,
    /// `|lambda - mu|`, or `|lambda - 1/mu|` in the Cordes setting.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRecord {
    /// Eigenvalue (cluster mean) of `B`.
    pub mu: f64,
    pub multiplicity: usize,
    /// Eigenvalue `w` must carry: `mu`, or `1 / mu` for Cordes.
    pub target: f64,
    /// `||X pi_mu v||` or `||pi_mu v||`.
    pub proj_norm: f64,
    pub visible: bool,
    /// `<w, Aw> / <w, w>`, for visible clusters.
    pub achieved_eigenvalue: Option<f64>,
    /// `||Aw - target w|| / ||w||`, for visible clusters.
    pub residual: Option<f64>,
    pub is_eigvec: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    ConsistentWithEquality,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityVerdict {
    pub clusters: Vec<ClusterRecord>,
    pub common_eigenvalues: Vec<CommonEigenvalue>,
    /// `||A^r X B^{1-r} v||` or `||A^s B^s v||`.
    pub achieved: f64,
    /// The equality theorem constrains `v` only when `achieved >= 1 - 1e-8`.
    pub theorem_applies: bool,
    pub residual_tol: f64,
    pub overall: Overall,
}

impl EqualityVerdict {
    pub fn consistent(&self) -> bool {
        self.overall == Overall::ConsistentWithEquality
    }
}

fn match_clusters(da: &SpectralDecomposition, db: &SpectralDecomposition, tol: f64, invert_b: bool) -> Vec<CommonEigenvalue> {
    let mut out = Vec::new();
    for ca in da.clusters() {
        for cb in db.clusters() {
            let (lambda, mu) = (ca.value, cb.value);
            let partner = if invert_b { 1.0 / mu } else { mu };
            let gap = (lambda - partner).abs();
            if gap <= tol * 1f64.max(lambda.abs()).max(partner.abs()) {
                out.push(CommonEigenvalue { lambda, mu, gap });
            }
        }
    }
    out
}

/// Pairs `(lambda, mu)` with `|lambda - mu| <= tol * max(1, |lambda|, |mu|)`,
/// one per pair of clusters.
pub fn find_common_eigenvalues(da: &SpectralDecomposition, db: &SpectralDecomposition, tol: Option<f64>) -> Vec<CommonEigenvalue> {
    match_clusters(da, db, tol.unwrap_or(COMMON_EIGENVALUE_TOL), false)
}

/// Default eigenvector residual tolerance, `1e-7 * max(1, ||A||)`.
pub fn default_residual_tol(da: &SpectralDecomposition) -> f64 {
    1e-7 * da.source_norm().max(1.0)
}

fn check_unit(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    if (norm(v) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("v must be a unit vector, |v| = {}", norm(v))));
    }
    Ok(())
}

fn analyze(
    da: &SpectralDecomposition,
    db: &SpectralDecomposition,
    map: Option<&Matrix>,
    v: &[f64],
    threshold: f64,
    tol: f64,
    invert: bool,
) -> Result<Vec<ClusterRecord>> {
    let a = da.reconstruct();
    let mut records = Vec::with_capacity(db.clusters().len());
    for (idx, cl) in db.clusters().iter().enumerate() {
        let pv = spectral_projector(db, idx)?.matrix().mul_vec(v);
        let w = match map {
            Some(x) => x.mul_vec(&pv),
            None => pv,
        };
        let target = if invert { 1.0 / cl.value } else { cl.value };
        let wn = norm(&w);
        let visible = wn > threshold;
        let (achieved_eigenvalue, residual, is_eigvec) = if visible {
            let aw = a.matrix().mul_vec(&w);
            let rayleigh = crate::linalg::dot(&w, &aw) / (wn * wn);
            let res: Vec<f64> = aw.iter().zip(&w).map(|(p, q)| p - target * q).collect();
            let residual = norm(&res) / wn;
            (Some(rayleigh), Some(residual), Some(residual <= tol))
        } else {
            (None, None, None)
        };
        records.push(ClusterRecord {
            mu: cl.value,
            multiplicity: cl.multiplicity(),
            target,
            proj_norm: wn,
            visible,
            achieved_eigenvalue,
            residual,
            is_eigvec,
        });
    }
    Ok(records)
}

fn overall(records: &[ClusterRecord]) -> Overall {
    let any_visible = records.iter().any(|r| r.visible);
    let all_pass = records.iter().all(|r| r.is_eigvec != Some(false));
    if any_visible && all_pass {
        Overall::ConsistentWithEquality
    } else {
        Overall::Inconsistent
    }
}

/// Tests `X pi_mu v` against eigenvalue `mu` of `A` for every cluster of `B`.
/// `tol` defaults to [`default_residual_tol`].
pub fn analyze_mcintosh_equality(inst: &McIntoshInstance, v: &[f64], tol: Option<f64>) -> Result<EqualityVerdict> {
    if !inst.is_normalized() {
        return Err(Error::NotNormalized("equality analysis needs ||AX|| = 1 = ||XB||"));
    }
    check_unit(v, inst.n())?;
    let da = SpectralDecomposition::of(&inst.a)?;
    let db = SpectralDecomposition::of(&inst.b)?;
    let tol = tol.unwrap_or_else(|| default_residual_tol(&da));
    let x_norm = operator_norm(&inst.x)?.norm;
    let clusters = analyze(&da, &db, Some(&inst.x), v, VISIBILITY * x_norm, tol, false)?;
    let achieved = norm(&inst.interpolated_operator(inst.r)?.mul_vec(v));
    Ok(EqualityVerdict {
        overall: overall(&clusters),
        clusters,
        common_eigenvalues: find_common_eigenvalues(&da, &db, None),
        achieved,
        theorem_applies: achieved >= 1.0 - ACHIEVED_TOL,
        residual_tol: tol,
    })
}

/// Tests `pi_mu v` against eigenvalue `1 / mu` of `A`.
pub fn analyze_cordes_equality(inst: &CordesInstance, v: &[f64], tol: Option<f64>) -> Result<EqualityVerdict> {
    if !inst.is_normalized() {
        return Err(Error::NotNormalized("equality analysis needs ||AB|| = 1"));
    }
    check_unit(v, inst.n())?;
    let da = SpectralDecomposition::of(&inst.a)?;
    let db = SpectralDecomposition::of(&inst.b)?;
    let tol = tol.unwrap_or_else(|| default_residual_tol(&da));
    let clusters = analyze(&da, &db, None, v, VISIBILITY, tol, true)?;
    let achieved = norm(&inst.interpolated_operator(inst.s)?.mul_vec(v));
    Ok(EqualityVerdict {
        overall: overall(&clusters),
        clusters,
        common_eigenvalues: match_clusters(&da, &db, COMMON_EIGENVALUE_TOL, true),
        achieved,
        theorem_applies: achieved >= 1.0 - ACHIEVED_TOL,
        residual_tol: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferStatus {
    Transfers,
    Fails,
    NotAnEqualityInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    /// Value at the instance's own exponent.
    pub base_value: f64,
    /// `(s, ||A^s X B^{1-s} v||)` or `(s, ||A^s B^s v||)`.
    pub values: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub tol: f64,
    pub status: TransferStatus,
}

pub fn default_exponent_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// If the norm equals 1 at the instance's exponent, it equals 1 at every `s`
/// in `(0, 1)`; checked on `grid` within `10 * tol`.
pub fn equality_transfer_check<I: Interpolation>(inst: &I, v: &[f64], grid: &[f64], tol: f64) -> Result<TransferReport> {
    if !inst.normalized() {
        return Err(Error::NotNormalized("equality transfer needs a normalized instance"));
    }
    let base_value = norm(&inst.operator_at(inst.exponent())?.mul_vec(v));
    if (base_value - 1.0).abs() > tol {
        return Ok(TransferReport { base_value, values: Vec::new(), max_deviation: f64::NAN, tol, status: TransferStatus::NotAnEqualityInstance });
    }
    let values = grid
        .iter()
        .map(|&s| Ok((s, norm(&inst.operator_at(s)?.mul_vec(v)))))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = values.iter().fold(0.0f64, |m, &(_, val)| m.max((val - 1.0).abs()));
    let status = if max_deviation <= 10.0 * tol { TransferStatus::Transfers } else { TransferStatus::Fails };
    Ok(TransferReport { base_value, values, max_deviation, tol, status })
}

/// Top right-singular vector of the interpolated operator at `exponent`;
/// among tied singular values the earliest eigenvector column wins, so the
/// identity yields `e_1`.
pub fn extremal_vector<I: Interpolation>(inst: &I, exponent: f64) -> Result<Vec<f64>> {
    Ok(operator_norm(&inst.operator_at(exponent)?)?.witness)
}
