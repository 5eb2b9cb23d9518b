//! Symmetric eigendecomposition and the spectral calculus built on it.
//!
//! Everything downstream (real and complex matrix powers, operator norms,
//! spectral projectors, the Loewner order) goes through a single cyclic
//! Jacobi solver, so there is one accuracy story for the whole crate.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Matrix};

/// Maximum tolerated `|a_ij - a_ji|` when symmetrizing loaded data.
pub const DEFAULT_ASYMMETRY_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_REL_TOL: f64 = 1e-14;

/// A real symmetric matrix. Stored entries satisfy `a_ij == a_ji` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl serde::Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl SymMatrix {
    /// Symmetrizes `m` as `(m + m^T) / 2`, rejecting asymmetry above `tol`.
    pub fn symmetrize(m: Matrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        if m.rows() == 0 {
            return Err(Error::Degenerate("empty matrix"));
        }
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asymmetry = m.asymmetry();
        if asymmetry > tol {
            return Err(Error::NotSymmetric { asymmetry, tolerance: tol });
        }
        let n = m.rows();
        let mut s = m;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Self(s))
    }

    pub fn new(m: Matrix) -> Result<Self> {
        Self::symmetrize(m, DEFAULT_ASYMMETRY_TOL)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    /// Forces exact symmetry on an internally computed matrix.
    pub(crate) fn from_computed(m: Matrix) -> Self {
        Self::symmetrize(m, f64::INFINITY).expect("computed matrix is square and finite")
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        Self(self.0.scale(s))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.0.sub(&other.0).map(Self)
    }

    /// `Q M Q^T` for an orthogonal `Q`.
    pub fn conjugate(&self, q: &Matrix) -> Result<SymMatrix> {
        Matrix::chain(&[q, &self.0, &q.transpose()]).map(Self::from_computed)
    }
}

/// A maximal run of eigenvalues that agree up to the cluster tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Positions in the ascending eigenvalue list.
    pub indices: Range<usize>,
    /// Mean of the member eigenvalues.
    pub value: f64,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }
}

/// Whether a decomposition admits logarithms (`Spd`) or only real powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Spd,
    PsdOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in eigenvalue order.
    eigenvectors: Matrix,
    clusters: Vec<Cluster>,
    source_norm: f64,
    cluster_tol: f64,
}

pub fn default_cluster_tol(source_norm: f64) -> f64 {
    1e-8 * source_norm.max(1.0)
}

/// Cyclic Jacobi diagonalization with row-wise sweep order.
///
/// Eigenvalues come back ascending; each eigenvector is sign-normalized so its
/// largest-magnitude entry (first one on ties) is positive. `cluster_tol`
/// defaults to `1e-8 * max(1, max |lambda|)`.
pub fn eigendecompose(m: &SymMatrix, cluster_tol: Option<f64>) -> Result<SpectralDecomposition> {
    let n = m.n();
    let mut a = m.matrix().clone();
    let mut q = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_REL_TOL * a.frobenius();

    let off_norm = |a: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                a[(p, r)] = 0.0;
                a[(r, p)] = 0.0;
                for k in 0..n {
                    let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    if !converged {
        let residual = off_norm(&a);
        if residual > threshold {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, residual });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut lead = 0;
        for k in 1..n {
            if q[(k, src)].abs() > q[(lead, src)].abs() {
                lead = k;
            }
        }
        let sign = if q[(lead, src)] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            eigenvectors[(k, col)] = sign * q[(k, src)];
        }
    }

    let source_norm = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cluster_tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(source_norm));
    let clusters = cluster(&eigenvalues, cluster_tol);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, clusters, source_norm, cluster_tol })
}

/// Splits ascending values wherever adjacent gaps exceed `tol`.
fn cluster(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            let members = &values[start..i];
            out.push(Cluster { indices: start..i, value: members.iter().sum::<f64>() / members.len() as f64 });
            start = i;
        }
    }
    out
}

impl SpectralDecomposition {
    pub fn of(m: &SymMatrix) -> Result<Self> {
        eigendecompose(m, None)
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    pub fn default_floor(&self) -> f64 {
        1e-12 * self.source_norm.max(1.0)
    }

    /// `Q f(Lambda) Q^T`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let q = &self.eigenvectors;
        let m = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * fl[k] * q[(j, k)]).sum());
        SymMatrix::from_computed(m)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// Natural logarithms of the eigenvalues; requires strict positivity.
    pub fn log_eigenvalues(&self, operation: &'static str) -> Result<Vec<f64>> {
        match assert_spd(self, None)? {
            Definiteness::Spd => Ok(self.eigenvalues.iter().map(|l| l.ln()).collect()),
            Definiteness::PsdOnly => Err(Error::PsdOnly { min_eigenvalue: self.min_eigenvalue(), operation }),
        }
    }

    /// Coefficients `<v, q_k>` in the eigenbasis.
    pub fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|k| (0..n).map(|i| v[i] * self.eigenvectors[(i, k)]).sum()).collect()
    }

    pub fn ccoefficients(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n).map(|k| (0..n).map(|i| v[i] * self.eigenvectors[(i, k)]).sum()).collect()
    }

    /// `sum_k w_k q_k` for complex weights.
    pub fn csynthesize(&self, weights: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|k| weights[k] * self.eigenvectors[(i, k)]).sum()).collect()
    }
}

/// Classifies `d` as SPD or PSD-only; errors when it is indefinite.
///
/// `floor` defaults to `1e-12 * max(1, source_norm)`. Eigenvalues in
/// `[-floor, floor)` are treated as zero.
pub fn assert_spd(d: &SpectralDecomposition, floor: Option<f64>) -> Result<Definiteness> {
    let floor = floor.unwrap_or_else(|| d.default_floor());
    let offending: Vec<f64> = d.eigenvalues.iter().copied().filter(|&l| l < -floor).collect();
    if !offending.is_empty() {
        return Err(Error::NotPsd { offending });
    }
    Ok(if d.min_eigenvalue() >= floor { Definiteness::Spd } else { Definiteness::PsdOnly })
}

/// `A^p` through the spectral calculus, with `0^p = 0` for `p > 0`.
pub fn real_power(d: &SpectralDecomposition, p: f64) -> Result<SymMatrix> {
    let definiteness = assert_spd(d, None)?;
    if definiteness == Definiteness::PsdOnly && p <= 0.0 {
        return Err(Error::ZeroToNonPositivePower { power: p });
    }
    if p == 0.0 {
        return Ok(SymMatrix::identity(d.n()));
    }
    let floor = d.default_floor();
    Ok(d.map_eigenvalues(|l| if l < floor { 0.0 } else { l.powf(p) }))
}

/// `A^z v = sum_k lambda_k^z <v, a_k> a_k` with `lambda^z = exp(z ln lambda)`.
pub fn complex_power_apply(d: &SpectralDecomposition, z: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), found: v.len() });
    }
    let logs = d.log_eigenvalues("complex power")?;
    let coeffs = d.ccoefficients(v);
    let weights: Vec<Complex64> = coeffs.iter().zip(&logs).map(|(c, l)| c * (z * l).exp()).collect();
    Ok(d.csynthesize(&weights))
}

/// Operator norm together with a unit vector attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormWitness<T> {
    pub norm: f64,
    pub witness: Vec<T>,
}

/// Index of the top eigenvector, preferring the earliest column among ties.
fn top_index(d: &SpectralDecomposition) -> usize {
    let top = d.max_eigenvalue();
    let slack = 1e-12 * top.abs().max(f64::MIN_POSITIVE);
    d.eigenvalues.iter().position(|&l| l >= top - slack).unwrap_or(d.n() - 1)
}

/// Largest singular value via the eigendecomposition of `M^T M`.
pub fn operator_norm(m: &Matrix) -> Result<NormWitness<f64>> {
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.cols() == 0 || m.rows() == 0 {
        return Ok(NormWitness { norm: 0.0, witness: vec![0.0; m.cols()] });
    }
    let gram = SymMatrix::from_computed(m.transpose().matmul(m)?);
    let d = eigendecompose(&gram, None)?;
    let k = top_index(&d);
    Ok(NormWitness { norm: d.eigenvalues[k].max(0.0).sqrt(), witness: d.eigenvector(k) })
}

/// Complex operator norm through the real `2n x 2n` embedding.
pub fn operator_norm_complex(m: &CMatrix) -> Result<NormWitness<Complex64>> {
    let e = m.real_embedding();
    let w = operator_norm(&e)?;
    let c = m.cols();
    let witness = (0..c).map(|j| Complex64::new(w.witness[j], w.witness[j + c])).collect();
    Ok(NormWitness { norm: w.norm, witness })
}

/// Orthogonal projector onto the eigenspace of one cluster.
pub fn spectral_projector(d: &SpectralDecomposition, cluster_index: usize) -> Result<SymMatrix> {
    let cl = d
        .clusters
        .get(cluster_index)
        .ok_or(Error::IndexOutOfRange { index: cluster_index, len: d.clusters.len() })?;
    let n = d.n();
    let q = &d.eigenvectors;
    let m = Matrix::from_fn(n, n, |i, j| cl.indices.clone().map(|k| q[(i, k)] * q[(j, k)]).sum());
    Ok(SymMatrix::from_computed(m))
}

/// Smallest eigenvalue of `A - B`.
pub fn psd_margin(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    Ok(SpectralDecomposition::of(&a.sub(b)?)?.min_eigenvalue())
}

/// Loewner order `A >= B` up to `tol`.
pub fn psd_order(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(psd_margin(a, b)? >= -tol)
}
