//! Density matrices, subsystem bookkeeping and von Neumann entropy.
//!
//! All entropies are in bits. Eigenvalues below [`EIGEN_FLOOR`] contribute nothing, and
//! slightly negative eigenvalues (down to `-TOLERANCE`) are treated as roundoff and clipped.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity, trace and positivity tolerance for validated states.
pub const TOLERANCE: f64 = 1e-10;

/// Eigenvalues below this contribute 0 to the entropy.
pub const EIGEN_FLOOR: f64 = 1e-15;

/// A validated quantum state: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates `entries` and clips roundoff-level negative eigenvalues to zero.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let herm_dev = hermitian_deviation(&entries);
        if herm_dev > TOLERANCE {
            return Err(Error::NotHermitian(herm_dev));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TOLERANCE || tr.im.abs() > TOLERANCE {
            return Err(Error::InvalidTrace(tr.re));
        }
        let mat = hermitize(&entries);
        let (values, vectors) = eigh(&mat);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -TOLERANCE {
            return Err(Error::NotPositive(min));
        }
        if min < 0.0 {
            let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
            return Ok(Self { mat: reconstruct(&clipped, &vectors) });
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving computation.
    pub(crate) fn from_trusted(mat: CMatrix) -> Self {
        Self { mat: hermitize(&mat) }
    }

    /// The projector onto `vector` after normalization.
    pub fn pure(vector: &CVector) -> Self {
        let v = vector.normalize();
        Self { mat: &v * v.adjoint() }
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(k, k)] = C64::new(1.0, 0.0);
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    /// Diagonal state; `probs` must be a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        let mut mat = CMatrix::zeros(d, d);
        for (k, &p) in probs.iter().enumerate() {
            mat[(k, k)] = C64::new(p, 0.0);
        }
        Self::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Eigenvalues in descending order, negatives clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().map(|&v| v.max(0.0)).collect();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        values
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        Self { mat: self.mat.kronecker(&other.mat) }
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn conjugate(&self, unitary: &CMatrix) -> DensityMatrix {
        Self::from_trusted(unitary * &self.mat * unitary.adjoint())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.mat, &other.mat)
    }

    /// Purity `tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Ordered tensor-factor dimensions labelling a composite system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidShape(format!("{dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_matrix(&rho.mat)
}

/// Entropy of a Hermitian PSD matrix without validation.
pub(crate) fn entropy_of_matrix(mat: &CMatrix) -> f64 {
    let values = mat.clone().symmetric_eigenvalues();
    entropy_of_spectrum(values.iter().cloned())
}

/// Eigenvalue floor inside the logarithm of entropy gradients.
pub(crate) const GRADIENT_FLOOR: f64 = 1e-13;

/// `S(ρ)` together with its derivative operator `G = −log₂ρ − I/ln 2`, so that
/// `dS = tr(G dρ)` to first order.
pub(crate) fn entropy_and_gradient(mat: &CMatrix) -> (f64, CMatrix) {
    let (values, vectors) = eigh(mat);
    let s = entropy_of_spectrum(values.iter().cloned());
    let shift = 1.0 / std::f64::consts::LN_2;
    let diag: Vec<f64> = values.iter().map(|&v| -v.max(GRADIENT_FLOOR).log2() - shift).collect();
    let d = mat.nrows();
    let mut g = CMatrix::zeros(d, d);
    for (k, &w) in diag.iter().enumerate() {
        let col = vectors.column(k);
        g += (col * col.adjoint()) * C64::new(w, 0.0);
    }
    (s, g)
}

pub(crate) fn entropy_of_spectrum(values: impl Iterator<Item = f64>) -> f64 {
    let s: f64 = values.filter(|&v| v >= EIGEN_FLOOR).map(|v| -v * v.log2()).sum();
    s.max(0.0)
}

/// Binary entropy `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("binary entropy argument {p}")));
    }
    Ok(h2(p))
}

pub(crate) fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Output entropy of the classical symmetric channel on a basis input:
/// `H(η) = H₂((|B|−1)η/|B|) + ((|B|−1)/|B|)·η·log₂(|B|−1)`.
pub fn symmetric_noise_entropy(eta: f64, dim_b: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("noise parameter {eta}")));
    }
    if dim_b < 2 {
        return Err(Error::OutOfRange(format!("output dimension {dim_b} < 2")));
    }
    let b = dim_b as f64;
    let flip = (b - 1.0) / b * eta;
    Ok(h2(flip) + flip * (b - 1.0).log2())
}

/// Pure state on `system ⊗ reference` (reference dimension = system dimension) whose
/// reduced state on the system is `rho`. The reference basis is ordered by decreasing
/// eigenvalue, so a pure `rho` purifies to `rho ⊗ |0⟩⟨0|`.
pub fn purify(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::pure(&purification_vector(rho))
}

pub(crate) fn purification_vector(rho: &DensityMatrix) -> CVector {
    let d = rho.dim();
    let (values, vectors) = eigh(&rho.mat);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let mut psi = CVector::zeros(d * d);
    for (slot, &k) in order.iter().enumerate() {
        let weight = values[k].max(0.0).sqrt();
        if weight == 0.0 {
            continue;
        }
        for a in 0..d {
            psi[a * d + slot] += vectors[(a, k)] * weight;
        }
    }
    psi
}

/// Traces out every factor of `shape` not listed in `keep`; kept factors stay in order.
pub fn partial_trace(state: &DensityMatrix, shape: &SubsystemShape, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(partial_trace_matrix(&state.mat, shape.dims(), keep)?))
}

pub(crate) fn partial_trace_matrix(mat: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if mat.nrows() != total || mat.ncols() != total {
        return Err(Error::InvalidShape(format!("shape {dims:?} does not match state dimension {}", mat.nrows())));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidShape(format!("keep set {keep:?} for {} factors", dims.len())));
    }
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let traced_dim = total / kept_dim;

    // For every full index: its kept-factor and traced-factor multi-indices.
    let mut groups: Vec<Vec<usize>> = vec![vec![usize::MAX; kept_dim]; traced_dim];
    let mut digits = vec![0usize; dims.len()];
    for full in 0..total {
        let mut rem = full;
        for f in (0..dims.len()).rev() {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        let (mut kept, mut traced) = (0usize, 0usize);
        for f in 0..dims.len() {
            if keep_sorted.binary_search(&f).is_ok() {
                kept = kept * dims[f] + digits[f];
            } else {
                traced = traced * dims[f] + digits[f];
            }
        }
        groups[traced][kept] = full;
    }
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for (a, &ia) in group.iter().enumerate() {
            for (b, &ib) in group.iter().enumerate() {
                out[(a, b)] += mat[(ia, ib)];
            }
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition `(values, vectors)` with eigenvectors as columns.
pub(crate) fn eigh(mat: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = mat.clone().symmetric_eigen();
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

pub(crate) fn reconstruct(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let d = vectors.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (k, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let col = vectors.column(k);
        out += (col * col.adjoint()) * C64::new(v, 0.0);
    }
    out
}

pub(crate) fn hermitize(mat: &CMatrix) -> CMatrix {
    (mat + mat.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn hermitian_deviation(mat: &CMatrix) -> f64 {
    max_abs_diff(mat, &mat.adjoint())
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn accepts_valid_states() {
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(2).into_matrix()).is_ok());
        assert!(DensityMatrix::new(DensityMatrix::basis(2, 0).into_matrix()).is_ok());
    }

    #[test]
    fn rejects_negative_eigenvalue() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        match DensityMatrix::new(m) {
            Err(Error::NotPositive(v)) => assert!((v + 0.5).abs() < 1e-12),
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = DensityMatrix::maximally_mixed(2).into_matrix();
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn clips_roundoff_negatives() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0 + 5e-11), c(-5e-11)]));
        let rho = DensityMatrix::new(m).unwrap();
        assert!(rho.eigenvalues().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(DensityMatrix::basis(3, 1).entropy(), 0.0);
        for d in 2..6 {
            let s = DensityMatrix::maximally_mixed(d).entropy();
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
        // -0.25 log2 0.25 - 0.75 log2 0.75 = 0.5 + 0.311278...
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        assert!((rho.entropy() - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn binary_and_symmetric_entropy() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
        for b in 2..6 {
            let h = symmetric_noise_entropy(1.0, b).unwrap();
            assert!((h - (b as f64).log2()).abs() < 1e-12);
            assert_eq!(symmetric_noise_entropy(0.0, b).unwrap(), 0.0);
        }
        for &eta in &[0.1, 0.37, 0.8] {
            let h = symmetric_noise_entropy(eta, 2).unwrap();
            assert!((h - h2(eta / 2.0)).abs() < 1e-15);
        }
        assert!(symmetric_noise_entropy(0.5, 1).is_err());
        assert!(symmetric_noise_entropy(-0.1, 2).is_err());
    }

    #[test]
    fn purification_of_pure_state_is_product() {
        let rho = DensityMatrix::basis(2, 1);
        let phi = purify(&rho);
        let expected = rho.kron(&DensityMatrix::basis(2, 0));
        assert!(phi.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn purification_of_maximally_mixed_is_maximally_entangled() {
        let phi = purify(&DensityMatrix::maximally_mixed(2));
        assert!((phi.purity() - 1.0).abs() < 1e-12);
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let reduced = partial_trace(&phi, &shape, &[0]).unwrap();
        assert!((reduced.entropy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_round_trip_rank_two_qutrit() {
        let mut rng = random::rng(11);
        let rho = random::random_density_with_rank(3, 2, &mut rng);
        let phi = purify(&rho);
        assert!((phi.purity() - 1.0).abs() < 1e-10);
        let shape = SubsystemShape::new(vec![3, 3]).unwrap();
        let back = partial_trace(&phi, &shape, &[0]).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn partial_trace_examples() {
        let bell = {
            let mut v = CVector::zeros(4);
            v[0] = c(1.0);
            v[3] = c(1.0);
            DensityMatrix::pure(&v)
        };
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let first = partial_trace(&bell, &shape, &[0]).unwrap();
        assert!(first.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-12);

        let mut rng = random::rng(3);
        let rho = random::random_density(2, &mut rng);
        let sigma = random::random_density(3, &mut rng);
        let joint = rho.kron(&sigma);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        assert!(partial_trace(&joint, &shape, &[0]).unwrap().max_abs_diff(&rho) < 1e-12);
        assert!(partial_trace(&joint, &shape, &[1]).unwrap().max_abs_diff(&sigma) < 1e-12);
    }

    #[test]
    fn partial_trace_is_associative() {
        let mut rng = random::rng(5);
        let state = random::random_density(2 * 3 * 2, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3, 2]).unwrap();
        let joint = partial_trace(&state, &shape, &[0]).unwrap();
        let step = partial_trace(&state, &shape, &[0, 1]).unwrap();
        let step = partial_trace(&step, &SubsystemShape::new(vec![2, 3]).unwrap(), &[0]).unwrap();
        assert!(joint.max_abs_diff(&step) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_shapes() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &SubsystemShape::new(vec![2, 3]).unwrap(), &[0]).is_err());
        assert!(partial_trace(&rho, &SubsystemShape::new(vec![2, 2]).unwrap(), &[2]).is_err());
        assert!(partial_trace(&rho, &SubsystemShape::new(vec![2, 2]).unwrap(), &[0, 0]).is_err());
        assert!(SubsystemShape::new(vec![2, 0]).is_err());
    }
}
