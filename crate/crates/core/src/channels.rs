//! CPTP maps in Kraus form and the channel constructors used by the capacity routines.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qstate::{max_abs_diff, CMatrix, DensityMatrix, SubsystemShape, C64, TOLERANCE};
use crate::random;

/// A completely positive trace-preserving map `Φ(ρ) = Σ K ρ K†`.
#[derive(Clone, Debug)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    label: String,
}

impl Channel {
    /// Validates shapes and completeness `Σ K†K = I` within `1e-10`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::OutOfRange("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::OutOfRange("at least one Kraus operator is required".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::DimensionMismatch { expected: dim_out * dim_in, got: k.nrows() * k.ncols() });
            }
        }
        let channel = Self { dim_in, dim_out, kraus, label: label.into() };
        let dev = channel.completeness_deviation();
        if dev > TOLERANCE {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, kraus: vec![CMatrix::identity(dim, dim)], label: format!("id{dim}") }
    }

    /// Classical channel from a row-stochastic matrix `transition[a][b] = p(b|a)`, realized
    /// with Kraus operators `√p(b|a) |b⟩⟨a|`.
    pub fn from_transition(transition: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let dim_in = transition.len();
        let dim_out = transition.first().map_or(0, Vec::len);
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::OutOfRange("empty transition matrix".into()));
        }
        let mut kraus = Vec::new();
        for (a, row) in transition.iter().enumerate() {
            if row.len() != dim_out {
                return Err(Error::DimensionMismatch { expected: dim_out, got: row.len() });
            }
            if row.iter().any(|&p| !(0.0..=1.0 + TOLERANCE).contains(&p)) {
                return Err(Error::OutOfRange(format!("transition row {a} has entries outside [0, 1]")));
            }
            for (b, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    let mut k = CMatrix::zeros(dim_out, dim_in);
                    k[(b, a)] = C64::new(p.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Self::new(dim_in, dim_out, kraus, label)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Largest entry of `|Σ K†K − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &CMatrix::identity(self.dim_in, self.dim_in))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: rho.dim() });
        }
        Ok(DensityMatrix::from_trusted(self.apply_matrix(rho.matrix())))
    }

    /// `Σ K m K†` on an arbitrary `dim_in × dim_in` matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Adjoint map `Σ K† m K` (Heisenberg picture).
    pub fn adjoint_apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * m * k;
        }
        out
    }

    /// Applies `Φ` to factor `acting` of a composite state and the identity elsewhere.
    pub fn apply_extended(
        &self,
        state: &DensityMatrix,
        shape: &SubsystemShape,
        acting: usize,
    ) -> Result<DensityMatrix> {
        if shape.total() != state.dim() {
            return Err(Error::InvalidShape(format!("{:?} vs state dimension {}", shape.dims(), state.dim())));
        }
        if acting >= shape.len() {
            return Err(Error::InvalidShape(format!("factor {acting} of {}", shape.len())));
        }
        let dims = shape.dims();
        if dims[acting] != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: dims[acting] });
        }
        let left: usize = dims[..acting].iter().product();
        let right: usize = dims[acting + 1..].iter().product();
        let (il, ir) = (CMatrix::identity(left, left), CMatrix::identity(right, right));
        let out_dim = left * self.dim_out * right;
        let mut out = CMatrix::zeros(out_dim, out_dim);
        for k in &self.kraus {
            let full = il.kronecker(k).kronecker(&ir);
            out += &full * state.matrix() * full.adjoint();
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    /// Transition matrix `p(b|a)` if the channel is classical: every basis input maps to a
    /// diagonal output and every coherence `|a⟩⟨a'|` maps to zero.
    #[allow(clippy::needless_range_loop)]
    pub fn transition_matrix(&self) -> Option<Vec<Vec<f64>>> {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut transition = vec![vec![0.0; dout]; din];
        for a in 0..din {
            for a2 in 0..din {
                let mut out = CMatrix::zeros(dout, dout);
                for k in &self.kraus {
                    out += k.column(a) * k.column(a2).adjoint();
                }
                for b in 0..dout {
                    for b2 in 0..dout {
                        let v = out[(b, b2)];
                        if (a != a2 || b != b2) && v.norm() > TOLERANCE {
                            return None;
                        }
                    }
                }
                if a == a2 {
                    for b in 0..dout {
                        transition[a][b] = out[(b, b)].re.max(0.0);
                    }
                }
            }
        }
        Some(transition)
    }

    pub fn is_classical(&self) -> bool {
        self.transition_matrix().is_some()
    }

    /// Largest coherence between distinct values `j ≠ j'` of a leading classical register of
    /// dimension `register_dim` that survives the channel. Zero iff `Φ = Φ∘(Π⊗I)`.
    pub fn register_coherence_leak(&self, register_dim: usize) -> Result<f64> {
        if register_dim == 0 || !self.dim_in.is_multiple_of(register_dim) {
            return Err(Error::InvalidShape(format!("register {register_dim} does not divide {}", self.dim_in)));
        }
        let rest = self.dim_in / register_dim;
        let mut worst = 0.0f64;
        for j in 0..register_dim {
            for j2 in 0..register_dim {
                if j == j2 {
                    continue;
                }
                let mut acc = CMatrix::zeros(self.dim_out * self.dim_out, rest * rest);
                for k in &self.kraus {
                    let kj = k.columns(j * rest, rest).into_owned();
                    let kj2 = k.columns(j2 * rest, rest).map(|z| z.conj());
                    acc += kj.kronecker(&kj2);
                }
                worst = worst.max(acc.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }

    /// If this channel has the covariant form `F(|j⟩⟨j|⊗ρ) = X_j E(ρ) X_j†` on input
    /// `R ⊗ C` with `|R| = |C|²`, returns the inner channel `E`.
    pub fn covariant_inner(&self) -> Result<Channel> {
        let d = self.dim_out;
        if d < 2 || self.dim_in != d * d * d {
            return Err(Error::NotCovariant(format!("input {} is not |C|³ for |C| = {d}", self.dim_in)));
        }
        let leak = self.register_coherence_leak(d * d)?;
        if leak > TOLERANCE {
            return Err(Error::NotCovariant(format!("register coherences survive ({leak:.3e})")));
        }
        let inner_kraus: Vec<CMatrix> = self.kraus.iter().map(|k| k.columns(0, d).into_owned()).collect();
        let inner = Channel::new(d, d, inner_kraus, format!("inner({})", self.label))?;
        let hw = heisenberg_weyl(d);
        for (j, x) in hw.iter().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    let mut unit = CMatrix::zeros(d, d);
                    unit[(a, b)] = C64::new(1.0, 0.0);
                    let expected = x * inner.apply_matrix(&unit) * x.adjoint();
                    let mut full = CMatrix::zeros(self.dim_in, self.dim_in);
                    full[(j * d + a, j * d + b)] = C64::new(1.0, 0.0);
                    let got = self.apply_matrix(&full);
                    let dev = max_abs_diff(&got, &expected);
                    if dev > TOLERANCE {
                        return Err(Error::NotCovariant(format!("branch {j} deviates by {dev:.3e}")));
                    }
                }
            }
        }
        Ok(inner)
    }
}

/// Classical symmetric channel `G(|k⟩⟨k|) = (1−η)|k⟩⟨k| + η I/|B|`; coherences are destroyed.
pub fn classical_symmetric(dim_b: usize, eta: f64) -> Result<Channel> {
    if dim_b < 2 {
        return Err(Error::OutOfRange(format!("|B| = {dim_b} < 2")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("eta = {eta} not in [0, 1]")));
    }
    let transition: Vec<Vec<f64>> = (0..dim_b).map(|k| symmetric_row(dim_b, k, eta)).collect();
    Channel::from_transition(&transition, format!("G(|B|={dim_b}, eta={eta})"))
}

fn symmetric_row(dim_b: usize, k: usize, eta: f64) -> Vec<f64> {
    let uniform = eta / dim_b as f64;
    (0..dim_b).map(|b| if b == k { 1.0 - eta + uniform } else { uniform }).collect()
}

/// Embedding channel `A → B` (`|A| > |B|`): acts as the classical symmetric channel on the
/// first `|B|` basis states and sends the remaining ones to `I/|B|`.
pub fn n0_embedding(dim_a: usize, dim_b: usize, eta: f64) -> Result<Channel> {
    if dim_a <= dim_b {
        return Err(Error::OutOfRange(format!("|A| = {dim_a} must exceed |B| = {dim_b}")));
    }
    if dim_b < 2 {
        return Err(Error::OutOfRange(format!("|B| = {dim_b} < 2")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("eta = {eta} not in [0, 1]")));
    }
    let transition: Vec<Vec<f64>> = (0..dim_a)
        .map(|k| if k < dim_b { symmetric_row(dim_b, k, eta) } else { vec![1.0 / dim_b as f64; dim_b] })
        .collect();
    Channel::from_transition(&transition, format!("N0(|A|={dim_a}, |B|={dim_b}, eta={eta})"))
}

/// Qubit dephasing `(1−λ)ρ + λ ZρZ` with Kraus set `{√(1−λ) I, √λ Z}`.
pub fn dephasing(lambda: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} not in [0, 1]")));
    }
    let identity = CMatrix::identity(2, 2) * C64::new((1.0 - lambda).sqrt(), 0.0);
    let mut z = CMatrix::identity(2, 2) * C64::new(lambda.sqrt(), 0.0);
    z[(1, 1)] = -z[(1, 1)];
    Channel::new(2, 2, vec![identity, z], format!("Dephasing(lambda={lambda})"))
}

/// The `d²` Heisenberg-Weyl unitaries `X^a Z^b`, indexed `j = a·d + b`, where
/// `X|k⟩ = |k+1 mod d⟩` and `Z|k⟩ = e^{2πik/d}|k⟩`.
pub fn heisenberg_weyl(d: usize) -> Vec<CMatrix> {
    let mut shift = CMatrix::zeros(d, d);
    let mut clock = CMatrix::zeros(d, d);
    for k in 0..d {
        shift[((k + 1) % d, k)] = C64::new(1.0, 0.0);
        clock[(k, k)] = C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64);
    }
    let mut ops = Vec::with_capacity(d * d);
    let mut xa = CMatrix::identity(d, d);
    for _ in 0..d {
        let mut zb = CMatrix::identity(d, d);
        for _ in 0..d {
            ops.push(&xa * &zb);
            zb = &zb * &clock;
        }
        xa = &xa * &shift;
    }
    ops
}

/// `max |(1/d²) Σ_j X_j ρ X_j† − I/d|` entrywise.
pub fn twirl_deviation(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut acc = CMatrix::zeros(d, d);
    for x in heisenberg_weyl(d) {
        acc += &x * rho.matrix() * x.adjoint();
    }
    acc /= C64::new((d * d) as f64, 0.0);
    max_abs_diff(&acc, DensityMatrix::maximally_mixed(d).matrix())
}

/// Covariant extension `F: R ⊗ C → C`, `|R| = |C|²`,
/// `F(ρ^{RC}) = Σ_j X_j E(⟨j|ρ|j⟩^R) X_j†`.
pub fn covariant_extend(inner: &Channel) -> Result<Channel> {
    let d = inner.dim_in();
    if inner.dim_out() != d {
        return Err(Error::DimensionMismatch { expected: d, got: inner.dim_out() });
    }
    let hw = heisenberg_weyl(d);
    let reg = d * d;
    let mut kraus = Vec::with_capacity(reg * inner.kraus().len());
    for (j, x) in hw.iter().enumerate() {
        for k in inner.kraus() {
            let mut full = CMatrix::zeros(d, reg * d);
            full.columns_mut(j * d, d).copy_from(&(x * k));
            kraus.push(full);
        }
    }
    Channel::new(reg * d, d, kraus, format!("F[{}]", inner.label()))
}

/// Branch channels of a flagged channel `M ⊗ A → B` with a qubit flag register.
#[derive(Clone, Debug)]
pub struct FlaggedSpec {
    n0: Channel,
    n1: Channel,
}

impl FlaggedSpec {
    pub fn new(n0: Channel, n1: Channel) -> Result<Self> {
        if n0.dim_in() != n1.dim_in() {
            return Err(Error::DimensionMismatch { expected: n0.dim_in(), got: n1.dim_in() });
        }
        if n0.dim_out() != n1.dim_out() {
            return Err(Error::DimensionMismatch { expected: n0.dim_out(), got: n1.dim_out() });
        }
        Ok(Self { n0, n1 })
    }

    pub fn n0(&self) -> &Channel {
        &self.n0
    }

    pub fn n1(&self) -> &Channel {
        &self.n1
    }

    pub const FLAG_DIM: usize = 2;
}

/// `N(ρ^{MA}) = N₀(⟨0|ρ|0⟩) + N₁(⟨1|ρ|1⟩)` with Kraus set `{K⊗⟨0|} ∪ {K'⊗⟨1|}`.
pub fn flagged(spec: &FlaggedSpec) -> Channel {
    let (din, dout) = (spec.n0.dim_in(), spec.n0.dim_out());
    let mut kraus = Vec::new();
    for (branch, ch) in [&spec.n0, &spec.n1].into_iter().enumerate() {
        for k in ch.kraus() {
            let mut full = CMatrix::zeros(dout, 2 * din);
            full.columns_mut(branch * din, din).copy_from(k);
            kraus.push(full);
        }
    }
    Channel { dim_in: 2 * din, dim_out: dout, kraus, label: format!("Flagged[{}, {}]", spec.n0.label, spec.n1.label) }
}

/// `Φ₁ ⊗ Φ₂` with pairwise Kronecker products of the Kraus operators.
pub fn tensor(first: &Channel, second: &Channel) -> Channel {
    let mut kraus = Vec::with_capacity(first.kraus.len() * second.kraus.len());
    for a in &first.kraus {
        for b in &second.kraus {
            kraus.push(a.kronecker(b));
        }
    }
    Channel {
        dim_in: first.dim_in * second.dim_in,
        dim_out: first.dim_out * second.dim_out,
        kraus,
        label: format!("{}⊗{}", first.label, second.label),
    }
}

/// `Φ^{⊗n}`.
pub fn tensor_power(channel: &Channel, n: usize) -> Channel {
    let mut out = channel.clone();
    for _ in 1..n {
        out = tensor(&out, channel);
    }
    out
}

/// Random channel from a seeded Stinespring isometry `C^{dim_in} → C^{dim_out} ⊗ C^{env_dim}`;
/// Kraus operators are `(I ⊗ ⟨e|) V`.
pub fn random_channel(dim_in: usize, dim_out: usize, env_dim: usize, seed: u64) -> Result<Channel> {
    if dim_in < 2 || dim_out < 2 || env_dim < 1 {
        return Err(Error::OutOfRange(format!("random channel dims ({dim_in}, {dim_out}, {env_dim})")));
    }
    if dim_out * env_dim < dim_in {
        return Err(Error::OutOfRange(format!("no isometry from {dim_in} into {dim_out}x{env_dim}; raise env_dim")));
    }
    let mut rng = random::rng(seed);
    let v = random::isometry(dim_out * env_dim, dim_in, &mut rng);
    let kraus = (0..env_dim).map(|e| CMatrix::from_fn(dim_out, dim_in, |b, a| v[(b * env_dim + e, a)])).collect();
    Channel::new(dim_in, dim_out, kraus, format!("Random({dim_in}->{dim_out}, env={env_dim}, seed={seed})"))
}

/// Random unital qubit channel `ρ ↦ Σ q_k U σ_k V ρ V† σ_k† U†` with Dirichlet Pauli weights and
/// Haar `U`, `V`. Such channels are covariant, so their one-shot capacity is `1 − S_min`.
pub fn random_unital_qubit(seed: u64) -> Result<Channel> {
    let mut rng = random::rng(seed);
    let q = random::dirichlet(4, &mut rng);
    let u = random::haar_unitary(2, &mut rng);
    let v = random::haar_unitary(2, &mut rng);
    let kraus = heisenberg_weyl(2).into_iter().zip(q).map(|(p, w)| (&u * p * &v) * C64::new(w.sqrt(), 0.0)).collect();
    Channel::new(2, 2, kraus, format!("RandomUnital(seed={seed})"))
}

/// Random classical channel with Dirichlet transition rows.
pub fn random_classical(dim_in: usize, dim_out: usize, seed: u64) -> Result<Channel> {
    let transition = random::stochastic_matrix(dim_in, dim_out, &mut random::rng(seed));
    Channel::from_transition(&transition, format!("RandomClassical({dim_in}->{dim_out}, seed={seed})"))
}

/// Basis dephasing `Π` of a leading register of dimension `register_dim`, identity elsewhere.
pub fn dephase_register(state: &DensityMatrix, register_dim: usize) -> Result<DensityMatrix> {
    let d = state.dim();
    if register_dim == 0 || !d.is_multiple_of(register_dim) {
        return Err(Error::InvalidShape(format!("register {register_dim} does not divide {d}")));
    }
    let rest = d / register_dim;
    let mut m = state.matrix().clone();
    for i in 0..d {
        for j in 0..d {
            if i / rest != j / rest {
                m[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(DensityMatrix::from_trusted(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{partial_trace, purify, CVector};

    fn plus() -> DensityMatrix {
        DensityMatrix::pure(&CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]))
    }

    #[test]
    fn identity_channel_is_identity() {
        let rho = random::random_density(3, &mut random::rng(1));
        let out = Channel::identity(3).apply(&rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(dephasing(0.2).unwrap().apply(&rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn symmetric_channel_examples() {
        for b in 2..5 {
            let g = classical_symmetric(b, 1.0).unwrap();
            for k in 0..b {
                let out = g.apply(&DensityMatrix::basis(b, k)).unwrap();
                assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(b)) < 1e-12);
            }
            assert!(g.completeness_deviation() < 1e-12);
        }
        let g = classical_symmetric(2, 0.0).unwrap();
        let rho = random::random_density(2, &mut random::rng(4));
        let out = g.apply(&rho).unwrap();
        assert!((out.matrix()[(0, 0)] - rho.matrix()[(0, 0)]).norm() < 1e-12);
        assert!(out.matrix()[(0, 1)].norm() < 1e-14);
        assert!(classical_symmetric(1, 0.5).is_err());
        assert!(classical_symmetric(2, 1.5).is_err());
    }

    #[test]
    fn embedding_channel_matches_definition() {
        let (a, b, eta) = (5, 3, 0.3);
        let n0 = n0_embedding(a, b, eta).unwrap();
        let g = classical_symmetric(b, eta).unwrap();
        for k in 0..a {
            let out = n0.apply(&DensityMatrix::basis(a, k)).unwrap();
            let expected =
                if k < b { g.apply(&DensityMatrix::basis(b, k)).unwrap() } else { DensityMatrix::maximally_mixed(b) };
            assert!(out.max_abs_diff(&expected) < 1e-12);
        }
        assert!(n0.is_classical());
        assert!(n0_embedding(2, 2, 0.1).is_err());
    }

    #[test]
    fn dephasing_examples() {
        let rho = random::random_density(2, &mut random::rng(8));
        assert!(dephasing(0.0).unwrap().apply(&rho).unwrap().max_abs_diff(&rho) < 1e-14);
        let half = dephasing(0.5).unwrap().apply(&plus()).unwrap();
        assert!(half.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-14);
        let mut z = CMatrix::identity(2, 2);
        z[(1, 1)] = C64::new(-1.0, 0.0);
        let full = dephasing(1.0).unwrap().apply(&rho).unwrap();
        assert!(full.max_abs_diff(&rho.conjugate(&z)) < 1e-14);
        assert!(dephasing(-0.1).is_err());
    }

    #[test]
    fn heisenberg_weyl_qubit_is_pauli_group() {
        let ops = heisenberg_weyl(2);
        assert_eq!(ops.len(), 4);
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let x = CMatrix::from_row_slice(2, 2, &[o, l, l, o]);
        let z = CMatrix::from_row_slice(2, 2, &[l, o, o, -l]);
        let expected = [CMatrix::identity(2, 2), z.clone(), x.clone(), &x * &z];
        for (got, want) in ops.iter().zip(expected.iter()) {
            assert!(max_abs_diff(got, want) < 1e-12);
        }
    }

    #[test]
    fn heisenberg_weyl_unitary_and_twirl() {
        let mut rng = random::rng(17);
        for d in 2..=4 {
            for x in heisenberg_weyl(d) {
                assert!(max_abs_diff(&(&x * x.adjoint()), &CMatrix::identity(d, d)) < 1e-12);
            }
            for _ in 0..5 {
                assert!(twirl_deviation(&random::random_density(d, &mut rng)) <= 1e-12);
            }
        }
    }

    #[test]
    fn covariant_extension_examples() {
        let mut rng = random::rng(21);
        let e = random_channel(2, 2, 2, 5).unwrap();
        let f = covariant_extend(&e).unwrap();
        assert_eq!((f.dim_in(), f.dim_out()), (8, 2));
        let rho = random::random_density(2, &mut rng);
        let branch0 = f.apply(&DensityMatrix::basis(4, 0).kron(&rho)).unwrap();
        assert!(branch0.max_abs_diff(&e.apply(&rho).unwrap()) < 1e-12);

        let fid = covariant_extend(&Channel::identity(2)).unwrap();
        let mut mix = CMatrix::zeros(2, 2);
        for (j, x) in heisenberg_weyl(2).iter().enumerate() {
            let out = fid.apply(&DensityMatrix::basis(4, j).kron(&rho)).unwrap();
            assert!(out.max_abs_diff(&rho.conjugate(x)) < 1e-12);
            mix += out.matrix() / C64::new(4.0, 0.0);
        }
        assert!(max_abs_diff(&mix, DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);

        let inner = f.covariant_inner().unwrap();
        for (a, b) in inner.kraus().iter().zip(e.kraus()) {
            assert!(max_abs_diff(a, b) < 1e-14);
        }
        assert!(e.covariant_inner().is_err());
        assert!(covariant_extend(&n0_embedding(3, 2, 0.1).unwrap()).is_err());
    }

    #[test]
    fn flagged_channel_branches() {
        let n0 = classical_symmetric(2, 0.3).unwrap();
        let n1 = random_channel(2, 2, 2, 3).unwrap();
        let n = flagged(&FlaggedSpec::new(n0.clone(), n1.clone()).unwrap());
        let rho = random::random_density(2, &mut random::rng(2));
        let out0 = n.apply(&DensityMatrix::basis(2, 0).kron(&rho)).unwrap();
        let out1 = n.apply(&DensityMatrix::basis(2, 1).kron(&rho)).unwrap();
        assert!(out0.max_abs_diff(&n0.apply(&rho).unwrap()) < 1e-12);
        assert!(out1.max_abs_diff(&n1.apply(&rho).unwrap()) < 1e-12);

        let coherent = random::random_density(4, &mut random::rng(7));
        let dephased = dephase_register(&coherent, 2).unwrap();
        let direct = n.apply(&coherent).unwrap();
        assert!(direct.max_abs_diff(&n.apply(&dephased).unwrap()) < 1e-12);
        assert!(n.register_coherence_leak(2).unwrap() < 1e-12);
        assert!(FlaggedSpec::new(n0, dephasing(0.1).unwrap().clone()).is_ok());
        assert!(FlaggedSpec::new(n0_embedding(3, 2, 0.1).unwrap(), n1).is_err());
    }

    #[test]
    fn tensor_and_extended_application() {
        let phi = random_channel(2, 3, 2, 9).unwrap();
        let mut rng = random::rng(12);
        let rho = random::random_density(2, &mut rng);
        let sigma = random::random_density(2, &mut rng);
        let t = tensor(&Channel::identity(2), &phi);
        let out = t.apply(&rho.kron(&sigma)).unwrap();
        assert!(out.max_abs_diff(&rho.kron(&phi.apply(&sigma).unwrap())) < 1e-12);

        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let ext = phi.apply_extended(&rho.kron(&sigma), &shape, 0).unwrap();
        assert!(ext.max_abs_diff(&phi.apply(&rho).unwrap().kron(&sigma)) < 1e-12);

        let purified = purify(&rho);
        let ext = phi.apply_extended(&purified, &shape, 0).unwrap();
        let reduced = partial_trace(&ext, &SubsystemShape::new(vec![3, 2]).unwrap(), &[0]).unwrap();
        assert!(reduced.max_abs_diff(&phi.apply(&rho).unwrap()) < 1e-10);

        let d = dephasing(0.3).unwrap();
        let dd = tensor(&d, &d);
        let prod = dd.apply(&rho.kron(&sigma)).unwrap();
        let expected = d.apply(&rho).unwrap().kron(&d.apply(&sigma).unwrap());
        assert!(prod.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn random_channel_is_deterministic() {
        let a = random_channel(2, 2, 2, 7).unwrap();
        let b = random_channel(2, 2, 2, 7).unwrap();
        assert_eq!(a.kraus(), b.kraus());
        assert!(a.completeness_deviation() < 1e-12);
        assert!(random_channel(4, 2, 1, 1).is_err());
    }

    #[test]
    fn classical_detection() {
        assert!(classical_symmetric(3, 0.2).unwrap().is_classical());
        assert!(!dephasing(0.2).unwrap().is_classical());
        assert!(!Channel::identity(2).is_classical());
        let t = classical_symmetric(2, 0.5).unwrap().transition_matrix().unwrap();
        assert!((t[0][0] - 0.75).abs() < 1e-12 && (t[0][1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let k = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(matches!(Channel::new(2, 2, vec![k], "bad"), Err(Error::NotTracePreserving(_))));
        assert!(Channel::new(2, 2, vec![], "empty").is_err());
    }
}
