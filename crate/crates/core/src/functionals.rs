//! Information quantities evaluated on ensembles of signal states.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::optim::{self, Objective};
use crate::par;
use crate::qstate::{
    entropy_and_gradient, entropy_of_matrix, partial_trace_matrix, purification_vector, CMatrix, CVector,
    DensityMatrix, SubsystemShape, C64, TOLERANCE,
};
use crate::random;

/// Weight tolerance for ensemble normalization.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// One signal of an ensemble, optionally with a purification on `signal ⊗ reference`.
#[derive(Clone, Debug)]
pub struct Signal {
    pub weight: f64,
    pub state: DensityMatrix,
    pub purification: Option<DensityMatrix>,
}

/// Weighted signal states `{p_i, ρ_i}`, optionally carrying purifications `φ_i`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    signals: Vec<Signal>,
    ref_dim: Option<usize>,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let signals = items.into_iter().map(|(weight, state)| Signal { weight, state, purification: None }).collect();
        let ens = Self { signals, ref_dim: None };
        ens.validate()?;
        Ok(ens)
    }

    /// Ensemble whose signals carry purifications on `signal ⊗ reference` with the given
    /// reference dimension. Each purification must be pure and reduce to its signal.
    pub fn with_purifications(items: Vec<(f64, DensityMatrix, DensityMatrix)>, ref_dim: usize) -> Result<Self> {
        let signals =
            items.into_iter().map(|(weight, state, phi)| Signal { weight, state, purification: Some(phi) }).collect();
        let ens = Self { signals, ref_dim: Some(ref_dim) };
        ens.validate()?;
        for (i, s) in ens.signals.iter().enumerate() {
            let phi = s.purification.as_ref().unwrap();
            let d = s.state.dim();
            if phi.dim() != d * ref_dim {
                return Err(Error::InvalidEnsemble(format!("purification {i} has dimension {}", phi.dim())));
            }
            if (phi.purity() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidEnsemble(format!("purification {i} is not pure")));
            }
            let reduced = partial_trace_matrix(phi.matrix(), &[d, ref_dim], &[0])?;
            let dev = crate::qstate::max_abs_diff(&reduced, s.state.matrix());
            if dev > TOLERANCE {
                return Err(Error::InvalidEnsemble(format!("purification {i} reduces off by {dev:.3e}")));
            }
        }
        Ok(ens)
    }

    /// Attaches the canonical (eigenbasis) purification to every signal.
    pub fn purified(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let d = items.first().map(|(_, s)| s.dim()).unwrap_or(1);
        let items = items
            .into_iter()
            .map(|(w, s)| {
                let phi = DensityMatrix::pure(&purification_vector(&s));
                (w, s, phi)
            })
            .collect();
        Self::with_purifications(items, d)
    }

    /// Builds signals from unnormalized purification vectors on `C^{sys_dim} ⊗ C^{ref_dim}`.
    pub fn from_purification_vectors(
        weights: &[f64],
        vectors: &[CVector],
        sys_dim: usize,
        ref_dim: usize,
    ) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(Error::InvalidEnsemble("weights and vectors differ in length".into()));
        }
        let mut items = Vec::with_capacity(weights.len());
        for (&w, v) in weights.iter().zip(vectors) {
            if v.len() != sys_dim * ref_dim {
                return Err(Error::DimensionMismatch { expected: sys_dim * ref_dim, got: v.len() });
            }
            let phi = DensityMatrix::pure(v);
            let state = DensityMatrix::from_trusted(partial_trace_matrix(phi.matrix(), &[sys_dim, ref_dim], &[0])?);
            items.push((w, state, phi));
        }
        Self::with_purifications(items, ref_dim)
    }

    fn validate(&self) -> Result<()> {
        let first = self.signals.first().ok_or_else(|| Error::InvalidEnsemble("empty ensemble".into()))?;
        let d = first.state.dim();
        let mut total = 0.0;
        for (i, s) in self.signals.iter().enumerate() {
            if !(s.weight > 0.0) {
                return Err(Error::InvalidEnsemble(format!("weight {i} = {} is not positive", s.weight)));
            }
            if s.state.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.state.dim() });
            }
            total += s.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(())
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.signals[0].state.dim()
    }

    pub fn ref_dim(&self) -> Option<usize> {
        self.ref_dim
    }

    pub fn has_purifications(&self) -> bool {
        self.ref_dim.is_some()
    }

    /// `Σ p_i ρ_i`.
    pub fn average_state(&self) -> DensityMatrix {
        let d = self.dim();
        let mut avg = CMatrix::zeros(d, d);
        for s in &self.signals {
            avg += s.state.matrix() * C64::new(s.weight, 0.0);
        }
        DensityMatrix::from_trusted(avg)
    }
}

impl Serialize for Ensemble {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let weights: Vec<f64> = self.signals.iter().map(|s| s.weight).collect();
        let entropies: Vec<f64> = self.signals.iter().map(|s| s.state.entropy()).collect();
        let states: Vec<Vec<Vec<[f64; 2]>>> = self
            .signals
            .iter()
            .map(|s| {
                let m = s.state.matrix();
                (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
            })
            .collect();
        let mut st = serializer.serialize_struct("Ensemble", 5)?;
        st.serialize_field("size", &self.signals.len())?;
        st.serialize_field("reference_dim", &self.ref_dim)?;
        st.serialize_field("weights", &weights)?;
        st.serialize_field("signal_entropies", &entropies)?;
        st.serialize_field("states", &states)?;
        st.end()
    }
}

fn check_input(channel: &Channel, ens: &Ensemble) -> Result<()> {
    if ens.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch { expected: channel.dim_in(), got: ens.dim() });
    }
    Ok(())
}

/// Holevo quantity `S(Σ p_i Φ(ρ_i)) − Σ p_i S(Φ(ρ_i))`.
pub fn holevo_chi(channel: &Channel, ens: &Ensemble) -> Result<f64> {
    check_input(channel, ens)?;
    let mut avg = CMatrix::zeros(channel.dim_out(), channel.dim_out());
    let mut conditional = 0.0;
    for s in ens.signals() {
        let out = channel.apply_matrix(s.state.matrix());
        conditional += s.weight * entropy_of_matrix(&out);
        avg += out * C64::new(s.weight, 0.0);
    }
    Ok(entropy_of_matrix(&avg) - conditional)
}

/// Entanglement-assisted Holevo quantity
/// `Σ p_i S(ρ_i) + S(Φ(Σ p_i ρ_i)) − Σ p_i S((Φ⊗I)(φ_i))`.
pub fn chi_assist(channel: &Channel, ens: &Ensemble) -> Result<f64> {
    check_input(channel, ens)?;
    let ref_dim = ens.ref_dim().ok_or(Error::MissingPurifications)?;
    let shape = SubsystemShape::new(vec![channel.dim_in(), ref_dim])?;
    let output = channel.apply(&ens.average_state())?;
    let mut value = output.entropy();
    for s in ens.signals() {
        let phi = s.purification.as_ref().ok_or(Error::MissingPurifications)?;
        let joint = channel.apply_extended(phi, &shape, 0)?;
        value += s.weight * (s.state.entropy() - joint.entropy());
    }
    Ok(value)
}

/// Average signal entropy `Σ p_i S(ρ_i)`: the entanglement an ensemble consumes, in ebits.
pub fn avg_input_entropy(ens: &Ensemble) -> f64 {
    ens.signals().iter().map(|s| s.weight * s.state.entropy()).sum()
}

/// `S((Φ⊗I)(φ_ρ)) − S(ρ)` using the canonical purification of `ρ`.
pub fn entropy_gain(channel: &Channel, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch { expected: channel.dim_in(), got: rho.dim() });
    }
    let phi = DensityMatrix::pure(&purification_vector(rho));
    let shape = SubsystemShape::new(vec![rho.dim(), rho.dim()])?;
    Ok(channel.apply_extended(&phi, &shape, 0)?.entropy() - rho.entropy())
}

/// Result of a minimum-output-entropy search: an upper bound on `S_min` and its input.
#[derive(Clone, Debug)]
pub struct MinOutputEntropy {
    pub value: f64,
    pub input: CVector,
    pub evaluations: usize,
}

pub(crate) fn vector_to_params(v: &CVector) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub(crate) fn params_to_vector(x: &[f64]) -> CVector {
    CVector::from_iterator(x.len() / 2, x.chunks(2).map(|c| C64::new(c[0], c[1])))
}

struct OutputEntropy<'a> {
    channel: &'a Channel,
}

impl Objective for OutputEntropy<'_> {
    fn dim(&self) -> usize {
        2 * self.channel.dim_in()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = params_to_vector(x);
        let norm = v.norm();
        let u = &v / C64::new(norm, 0.0);
        let out = self.channel.apply_matrix(&(&u * u.adjoint()));
        let (s, g) = entropy_and_gradient(&out);
        // Maximizing −S: operator derivative is −Φ†(G).
        let h = -self.channel.adjoint_apply(&g);
        let hu = &h * &u;
        let mean = u.dotc(&hu).re;
        let w = hu - &u * C64::new(mean, 0.0);
        let scale = 2.0 / norm;
        for (i, z) in w.iter().enumerate() {
            grad[2 * i] = scale * z.re;
            grad[2 * i + 1] = scale * z.im;
        }
        -s
    }
}

/// Multi-start local search for `min_ψ S(Φ(ψ))` over pure inputs. The reported value is an
/// upper bound on the true minimum and is deterministic for a given seed.
pub fn min_output_entropy(channel: &Channel, restarts: usize, seed: u64) -> Result<MinOutputEntropy> {
    min_output_entropy_with(channel, restarts, seed, &[])
}

/// As [`min_output_entropy`], additionally polishing each of `candidates` (e.g. product
/// inputs for a tensor-product channel). Computational basis states are always candidates.
pub fn min_output_entropy_with(
    channel: &Channel,
    restarts: usize,
    seed: u64,
    candidates: &[CVector],
) -> Result<MinOutputEntropy> {
    if restarts == 0 {
        return Err(Error::OutOfRange("restarts must be at least 1".into()));
    }
    let d = channel.dim_in();
    for c in candidates {
        if c.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: c.len() });
        }
    }
    let mut starts: Vec<CVector> = (0..d)
        .map(|k| {
            let mut e = CVector::zeros(d);
            e[k] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    starts.extend(candidates.iter().cloned());
    let structured = starts.len();
    let objective = OutputEntropy { channel };
    let settings = optim::Settings::default();
    let runs = par::map_indexed(structured + restarts, |i| {
        let start = if i < structured {
            starts[i].clone()
        } else {
            random::haar_vector(d, &mut random::rng(random::derive_seed(seed, i as u64)))
        };
        let polished = optim::maximize(&objective, vector_to_params(&start), &settings);
        let out_start =
            entropy_of_matrix(&channel.apply_matrix(&(&start * start.adjoint()).map(|z| z / start.norm_squared())));
        let v = params_to_vector(&polished.x).normalize();
        let out_polished = entropy_of_matrix(&channel.apply_matrix(&(&v * v.adjoint())));
        if out_start <= out_polished {
            (out_start, start.normalize(), polished.evaluations)
        } else {
            (out_polished, v, polished.evaluations)
        }
    });
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (value, input, _) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.partial_cmp(&b.0).unwrap().then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .unwrap();
    Ok(MinOutputEntropy { value, input, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{classical_symmetric, dephasing, random_channel, tensor};
    use crate::qstate::{h2, purify};

    fn bell_ensemble() -> Ensemble {
        let mut v = CVector::zeros(4);
        v[0] = C64::new(1.0, 0.0);
        v[3] = C64::new(1.0, 0.0);
        Ensemble::from_purification_vectors(&[1.0], &[v], 2, 2).unwrap()
    }

    #[test]
    fn ensemble_validation() {
        let rho = DensityMatrix::basis(2, 0);
        assert!(Ensemble::new(vec![(0.5, rho.clone()), (0.4, rho.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.0, rho.clone()), (0.0, rho.clone())]).is_err());
        assert!(Ensemble::new(vec![(0.5, rho.clone()), (0.5, DensityMatrix::basis(3, 0))]).is_err());
        let wrong = DensityMatrix::basis(4, 2);
        assert!(Ensemble::with_purifications(vec![(1.0, rho, wrong)], 2).is_err());
    }

    #[test]
    fn holevo_examples() {
        let id = Channel::identity(2);
        let single = Ensemble::new(vec![(1.0, DensityMatrix::basis(2, 0))]).unwrap();
        assert!(holevo_chi(&id, &single).unwrap().abs() < 1e-12);
        let basis = Ensemble::new(vec![(0.5, DensityMatrix::basis(2, 0)), (0.5, DensityMatrix::basis(2, 1))]).unwrap();
        assert!((holevo_chi(&id, &basis).unwrap() - 1.0).abs() < 1e-12);
        for &eta in &[0.0, 0.3, 0.5, 1.0] {
            let g = classical_symmetric(2, eta).unwrap();
            // Output eigenvalues 1 − η/2 and η/2, average I/2.
            let expected = 1.0 - h2(eta / 2.0);
            assert!((holevo_chi(&g, &basis).unwrap() - expected).abs() < 1e-12);
        }
        assert!(holevo_chi(&dephasing(0.1).unwrap(), &Ensemble::new(vec![(1.0, DensityMatrix::basis(3, 0))]).unwrap())
            .is_err());
    }

    #[test]
    fn assisted_examples() {
        let bell = bell_ensemble();
        assert!((chi_assist(&Channel::identity(2), &bell).unwrap() - 2.0).abs() < 1e-12);
        assert!((chi_assist(&dephasing(0.5).unwrap(), &bell).unwrap() - 1.0).abs() < 1e-12);
        let plain = Ensemble::new(vec![(1.0, DensityMatrix::maximally_mixed(2))]).unwrap();
        assert!(matches!(chi_assist(&Channel::identity(2), &plain), Err(Error::MissingPurifications)));
    }

    #[test]
    fn assisted_reduces_to_holevo_for_pure_signals() {
        let mut rng = random::rng(31);
        let channel = random_channel(3, 2, 3, 4).unwrap();
        let items: Vec<(f64, DensityMatrix)> =
            random::dirichlet(4, &mut rng).into_iter().map(|w| (w, random::haar_pure_state(3, &mut rng))).collect();
        let plain = Ensemble::new(items.clone()).unwrap();
        let purified = Ensemble::purified(items).unwrap();
        let a = holevo_chi(&channel, &plain).unwrap();
        let b = chi_assist(&channel, &purified).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn average_input_entropy_examples() {
        let pure = Ensemble::new(vec![(1.0, DensityMatrix::basis(2, 1))]).unwrap();
        assert_eq!(avg_input_entropy(&pure), 0.0);
        let mixed = Ensemble::new(vec![(1.0, DensityMatrix::maximally_mixed(2))]).unwrap();
        assert!((avg_input_entropy(&mixed) - 1.0).abs() < 1e-12);
        let half =
            Ensemble::new(vec![(0.5, DensityMatrix::maximally_mixed(2)), (0.5, DensityMatrix::basis(2, 0))]).unwrap();
        assert!((avg_input_entropy(&half) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_gain_examples() {
        let mut rng = random::rng(8);
        let rho = random::random_density(2, &mut rng);
        let g = entropy_gain(&Channel::identity(2), &rho).unwrap();
        assert!((g + rho.entropy()).abs() < 1e-10);
        let psi = random::haar_pure_state(2, &mut rng);
        let channel = random_channel(2, 2, 2, 1).unwrap();
        let g = entropy_gain(&channel, &psi).unwrap();
        assert!((g - channel.apply(&psi).unwrap().entropy()).abs() < 1e-10);
    }

    #[test]
    fn entropy_gain_is_purification_invariant() {
        let mut rng = random::rng(12);
        let channel = random_channel(2, 3, 2, 6).unwrap();
        for _ in 0..10 {
            let rho = random::random_density(2, &mut rng);
            let base = entropy_gain(&channel, &rho).unwrap();
            let u = random::haar_unitary(2, &mut rng);
            let other = purify(&rho).conjugate(&CMatrix::identity(2, 2).kronecker(&u));
            let shape = SubsystemShape::new(vec![2, 2]).unwrap();
            let alt = channel.apply_extended(&other, &shape, 0).unwrap().entropy() - rho.entropy();
            assert!((base - alt).abs() < 1e-9);
        }
    }

    #[test]
    fn min_output_entropy_examples() {
        assert!(min_output_entropy(&Channel::identity(3), 4, 1).unwrap().value < 1e-9);
        let g = classical_symmetric(3, 1.0).unwrap();
        assert!((min_output_entropy(&g, 4, 1).unwrap().value - 3f64.log2()).abs() < 1e-9);
        assert!(min_output_entropy(&dephasing(0.3).unwrap(), 4, 1).unwrap().value < 1e-12);
        assert!(min_output_entropy(&dephasing(0.3).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn min_output_entropy_is_deterministic_and_subadditive_bound_holds() {
        let channel = random_channel(2, 2, 2, 42).unwrap();
        let a = min_output_entropy(&channel, 8, 3).unwrap();
        let b = min_output_entropy(&channel, 8, 3).unwrap();
        assert_eq!(a.value, b.value);
        let product = a.input.kronecker(&a.input);
        let pair = min_output_entropy_with(&tensor(&channel, &channel), 8, 3, &[product]).unwrap();
        assert!(pair.value <= 2.0 * a.value + 1e-9);
    }
}
