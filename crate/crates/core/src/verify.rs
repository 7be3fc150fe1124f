//! Randomized verification of the structural results behind the trade-off construction.
//!
//! Each check produces a [`VerificationReport`]. Inequalities report `slack = lhs − rhs`
//! (nonnegative when they hold), equalities report `slack = −|lhs − rhs|`; a trial is a
//! violation when some slack falls below `−tolerance`. Trials are seeded by
//! `derive_seed(seed, trial)` so every failure can be replayed.

use serde::Serialize;

use crate::channels::{
    classical_symmetric, covariant_extend, flagged, random_channel, random_classical, random_unital_qubit,
    twirl_deviation, Channel, FlaggedSpec,
};
use crate::error::{Error, Result};
use crate::functionals::{avg_input_entropy, chi_assist, min_output_entropy, Ensemble};
use crate::optimizers::{assisted_tensor_curves, c1, c1_assisted_curve, classical_capacity, OptimizerConfig};
use crate::par;
use crate::qstate::{
    eigh, entropy_of_matrix, entropy_of_spectrum, partial_trace_matrix, CMatrix, CVector, DensityMatrix,
    SubsystemShape, C64,
};
use crate::random;
use crate::tradeoff::{linear_grid, sample_curve, timeshare_flagged};

/// Tolerance of the entanglement and information comparisons in the partial-cq check.
pub const CQ_TOLERANCE: f64 = 1e-8;
/// Tolerance of exact entropy identities and strong subadditivity.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Optimizer-vs-optimizer tolerance for one-shot capacities.
pub const C1_TOLERANCE: f64 = 5e-3;
/// Optimizer-vs-optimizer tolerance along a budget grid.
pub const CURVE_TOLERANCE: f64 = 1e-2;
pub const TWIRL_TOLERANCE: f64 = 1e-12;

/// Worst slack of one inequality or identity across all trials.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentSlack {
    pub name: String,
    pub tolerance: f64,
    pub worst_slack: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub lemma_id: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest slack observed, normalized so that a violation means `< −tolerance`.
    pub worst_slack: f64,
    pub tolerance: f64,
    /// Seeds of the failing trials.
    pub instances: Vec<u64>,
    pub components: Vec<ComponentSlack>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Report from per-trial `(seed, [(component, slack)])` records.
    fn from_trials(lemma_id: &str, components: &[(&str, f64)], trials: &[(u64, Vec<f64>)]) -> Self {
        let mut summaries: Vec<ComponentSlack> = components
            .iter()
            .map(|&(name, tolerance)| ComponentSlack {
                name: name.to_string(),
                tolerance,
                worst_slack: f64::INFINITY,
                violations: 0,
            })
            .collect();
        let mut instances = Vec::new();
        for (seed, slacks) in trials {
            let mut failed = false;
            for (summary, &slack) in summaries.iter_mut().zip(slacks) {
                summary.worst_slack = summary.worst_slack.min(slack);
                if !(slack >= -summary.tolerance) {
                    summary.violations += 1;
                    failed = true;
                }
            }
            if failed {
                instances.push(*seed);
            }
        }
        // Normalize by each component's tolerance so a single number carries the verdict.
        let tolerance = components.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let worst_slack =
            summaries.iter().map(|s| s.worst_slack * tolerance / s.tolerance).fold(f64::INFINITY, f64::min);
        Self {
            lemma_id: lemma_id.to_string(),
            trials: trials.len(),
            violations: instances.len(),
            worst_slack,
            tolerance,
            instances,
            components: summaries,
        }
    }

    /// Concatenates reports of the same check (e.g. over several random instances).
    pub fn merge(lemma_id: &str, reports: &[VerificationReport]) -> Self {
        let mut components: Vec<ComponentSlack> = Vec::new();
        for r in reports {
            for c in &r.components {
                match components.iter_mut().find(|x| x.name == c.name) {
                    Some(x) => {
                        x.worst_slack = x.worst_slack.min(c.worst_slack);
                        x.violations += c.violations;
                    }
                    None => components.push(c.clone()),
                }
            }
        }
        Self {
            lemma_id: lemma_id.to_string(),
            trials: reports.iter().map(|r| r.trials).sum(),
            violations: reports.iter().map(|r| r.violations).sum(),
            worst_slack: reports.iter().map(|r| r.worst_slack).fold(f64::INFINITY, f64::min),
            tolerance: reports.iter().map(|r| r.tolerance).fold(f64::INFINITY, f64::min),
            instances: reports.iter().flat_map(|r| r.instances.iter().cloned()).collect(),
            components,
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Partial classical-quantum channels

/// Slacks of one ensemble under the register-dephasing construction.
#[derive(Clone, Debug, Serialize)]
pub struct CqSlacks {
    /// Original minus alternative average entanglement (≥ 0).
    pub entanglement: f64,
    /// Alternative minus original assisted Holevo quantity (≥ 0).
    pub chi_assist: f64,
    /// Strong subadditivity on the `QC'E` state, worst signal (≥ 0).
    pub ssa: f64,
    /// Entropy bookkeeping identities on the `QC'E` state (each `−|diff|`).
    pub identities: [f64; 4],
    pub original_chi: f64,
    pub alternative_chi: f64,
    pub alternative_size: usize,
}

const CQ_COMPONENTS: [(&str, f64); 7] = [
    ("entanglement_decrease", CQ_TOLERANCE),
    ("chi_assist_increase", CQ_TOLERANCE),
    ("strong_subadditivity", IDENTITY_TOLERANCE),
    ("identity_S(E)", IDENTITY_TOLERANCE),
    ("identity_S(C'E)", IDENTITY_TOLERANCE),
    ("identity_S(QE)-S(Q)", IDENTITY_TOLERANCE),
    ("identity_S(QC'E)-S(Q)", IDENTITY_TOLERANCE),
];

/// Applies the construction to one assisted ensemble of `channel`, whose input is
/// `R ⊗ C` with a classical register `R` of dimension `register_dim`: dephase `R`,
/// spectrally decompose each conditional state on `CE`, and compare the resulting
/// `{p_ijk, |j⟩⟨j| ⊗ ρ^C_ijk}` ensemble with the original.
pub fn cq_instance(channel: &Channel, register_dim: usize, ens: &Ensemble) -> Result<CqSlacks> {
    let leak = channel.register_coherence_leak(register_dim)?;
    if leak > 1e-10 {
        return Err(Error::Precondition(format!(
            "channel is not partial cq on a {register_dim}-dim register ({leak:.2e})"
        )));
    }
    let d = channel.dim_in();
    let c = d / register_dim;
    let e = ens.ref_dim().ok_or(Error::MissingPurifications)?;
    let ce = c * e;
    let joint_shape = SubsystemShape::new(vec![d, e])?;
    let dout = channel.dim_out();

    let mut alt_weights = Vec::new();
    let mut alt_vectors = Vec::new();
    let mut ssa = f64::INFINITY;
    let mut identities = [0.0f64; 4];
    for s in ens.signals() {
        let phi = s.purification.as_ref().ok_or(Error::MissingPurifications)?;
        // Conditional states ρ_ij on CE after dephasing R.
        let mut branches: Vec<(f64, usize, CVector)> = Vec::new();
        for j in 0..register_dim {
            let block = phi.matrix().view((j * ce, j * ce), (ce, ce)).into_owned();
            let pj = block.trace().re;
            if pj <= 1e-14 {
                continue;
            }
            let (values, vectors) = eigh(&(block / C64::new(pj, 0.0)));
            for (k, &pk) in values.iter().enumerate() {
                if pk * pj > 1e-14 {
                    branches.push((pj * pk, j, vectors.column(k).into_owned()));
                }
            }
        }
        let total: f64 = branches.iter().map(|b| b.0).sum();

        // Block-diagonal QC'E state Σ p(jk|i) |jk⟩⟨jk| ⊗ (Ψ⊗I)(|j⟩⟨j| ⊗ φ_ijk).
        let block_dim = dout * e;
        let q = branches.len();
        let mut qce = CMatrix::zeros(q * block_dim, q * block_dim);
        let mut cond_env = 0.0;
        let mut cond_joint = 0.0;
        let mut dephased = CMatrix::zeros(d * e, d * e);
        for (idx, (w, j, v)) in branches.iter().enumerate() {
            let w = w / total;
            let mut reg = CVector::zeros(register_dim);
            reg[*j] = C64::new(1.0, 0.0);
            let full = reg.kronecker(v);
            let pure = DensityMatrix::pure(&full);
            dephased += pure.matrix() * C64::new(w, 0.0);
            let out = channel.apply_extended(&pure, &joint_shape, 0)?;
            qce.view_mut((idx * block_dim, idx * block_dim), (block_dim, block_dim))
                .copy_from(&(out.matrix() * C64::new(w, 0.0)));
            let env = partial_trace_matrix(&(v * v.adjoint()), &[c, e], &[1])?;
            cond_env += w * entropy_of_matrix(&env);
            cond_joint += w * out.entropy();
            alt_weights.push(s.weight * w);
            alt_vectors.push(full);
        }
        let dims = [q, dout, e];
        let s_q = entropy_of_spectrum(branches.iter().map(|b| b.0 / total));
        let s_qce = entropy_of_matrix(&qce);
        let s_qe = entropy_of_matrix(&partial_trace_matrix(&qce, &dims, &[0, 2])?);
        let s_e = entropy_of_matrix(&partial_trace_matrix(&qce, &dims, &[2])?);
        let s_ce = entropy_of_matrix(&partial_trace_matrix(&qce, &dims, &[1, 2])?);
        let dephased_out = channel.apply_extended(&DensityMatrix::from_trusted(dephased), &joint_shape, 0)?.entropy();

        ssa = ssa.min((s_qe - s_q) - (s_qce - s_q) - (s_e - s_ce));
        let checks = [
            -(s_e - s.state.entropy()).abs(),
            -(s_ce - dephased_out).abs(),
            -((s_qe - s_q) - cond_env).abs(),
            -((s_qce - s_q) - cond_joint).abs(),
        ];
        for (slot, v) in identities.iter_mut().zip(checks) {
            *slot = slot.min(v);
        }
    }
    let alternative = Ensemble::from_purification_vectors(&alt_weights, &alt_vectors, d, e)?;
    let original_chi = chi_assist(channel, ens)?;
    let alternative_chi = chi_assist(channel, &alternative)?;
    Ok(CqSlacks {
        entanglement: avg_input_entropy(ens) - avg_input_entropy(&alternative),
        chi_assist: alternative_chi - original_chi,
        ssa,
        identities,
        original_chi,
        alternative_chi,
        alternative_size: alternative.len(),
    })
}

/// Random assisted ensemble: 2–4 signals, Dirichlet weights, Haar purification vectors on
/// `input ⊗ reference` with reference dimension equal to the input dimension.
pub fn random_assisted_ensemble(dim: usize, seed: u64) -> Result<Ensemble> {
    use rand::Rng;
    let mut rng = random::rng(seed);
    let size = rng.random_range(2..=4);
    let weights = random::dirichlet(size, &mut rng);
    let vectors: Vec<CVector> = (0..size).map(|_| random::haar_vector(dim * dim, &mut rng)).collect();
    Ensemble::from_purification_vectors(&weights, &vectors, dim, dim)
}

/// Checks the partial-cq construction on `trials` random assisted ensembles.
pub fn check_lemma_cq(channel: &Channel, register_dim: usize, trials: usize, seed: u64) -> Result<VerificationReport> {
    let leak = channel.register_coherence_leak(register_dim)?;
    if leak > 1e-10 {
        return Err(Error::Precondition(format!(
            "channel is not partial cq on a {register_dim}-dim register ({leak:.2e})"
        )));
    }
    let records = par::map_indexed(trials, |t| -> Result<(u64, Vec<f64>)> {
        let s = random::derive_seed(seed, t as u64);
        let ens = random_assisted_ensemble(channel.dim_in(), s)?;
        let r = cq_instance(channel, register_dim, &ens)?;
        let mut slacks = vec![r.entanglement, r.chi_assist, r.ssa];
        slacks.extend(r.identities);
        Ok((s, slacks))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_trials("lemma1_partial_cq", &CQ_COMPONENTS, &records))
}

// ---------------------------------------------------------------------------------------------
// Flagged channels

/// `C⁽¹⁾(N) = max{C(N₀), C⁽¹⁾(N₁)}` for the flagged channel, within 5e-3.
pub fn check_lemma_flagged_c1(n0: &Channel, n1: &Channel, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    let spec = FlaggedSpec::new(n0.clone(), n1.clone())?;
    let direct = c1(&flagged(&spec), cfg)?.value;
    let branches = classical_capacity(n0, 1e-10)?.value.max(c1(n1, cfg)?.value);
    Ok(VerificationReport::from_trials(
        "lemma2_flagged_c1",
        &[("flagged_c1_equals_branch_max", C1_TOLERANCE)],
        &[(cfg.seed, vec![-(direct - branches).abs()])],
    ))
}

/// Budget grid of the quantum branch: `points` values on `[0, log₂ d_in]`.
fn branch_grid(channel: &Channel, points: usize) -> Vec<f64> {
    linear_grid(0.0, (channel.dim_in() as f64).log2(), points.max(2))
}

/// Flagged assisted capacity against time sharing between the branches, per budget.
pub fn check_lemma_flagged_cp(
    n0: &Channel,
    n1: &Channel,
    grid: &[f64],
    cfg: &OptimizerConfig,
) -> Result<VerificationReport> {
    let spec = FlaggedSpec::new(n0.clone(), n1.clone())?;
    let n = flagged(&spec);
    let cn0 = classical_capacity(n0, 1e-10)?.value;
    let curve = sample_curve(n1, &branch_grid(n1, 17), cfg)?;
    let direct = c1_assisted_curve(&n, grid, cfg)?;
    let records = grid
        .iter()
        .zip(&direct)
        .enumerate()
        .map(|(i, (&p, direct))| -> Result<(u64, Vec<f64>)> {
            let shared = timeshare_flagged(cn0, &curve, p.min(curve.p_max()))?;
            Ok((random::derive_seed(cfg.seed, i as u64), vec![-(direct.value - shared).abs()]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_trials(
        "lemma3_flagged_cp",
        &[("flagged_cp_equals_timeshare", CURVE_TOLERANCE)],
        &records,
    ))
}

/// Additivity for a classical channel tensored with a quantum one, per budget.
pub fn check_tensor_additivity(
    classical: &Channel,
    quantum: &Channel,
    grid: &[f64],
    cfg: &OptimizerConfig,
) -> Result<VerificationReport> {
    if !classical.is_classical() {
        return Err(Error::NotClassical(classical.label().to_string()));
    }
    let curves = assisted_tensor_curves(classical, quantum, grid, cfg)?;
    let records = curves
        .joint
        .iter()
        .zip(&curves.quantum)
        .enumerate()
        .map(|(i, (direct, single))| {
            (random::derive_seed(cfg.seed, i as u64), vec![-(direct.value - curves.classical - single.value).abs()])
        })
        .collect::<Vec<_>>();
    Ok(VerificationReport::from_trials("tensor_additivity", &[("joint_equals_sum", CURVE_TOLERANCE)], &records))
}

/// `C⁽¹⁾(F) = log d − S_min(E)` for the covariant extension of `E`, plus the twirl identity
/// on random states of dimension `d`.
pub fn check_covariant_capacity(inner: &Channel, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    let d = inner.dim_in();
    if inner.dim_out() != d {
        return Err(Error::DimensionMismatch { expected: d, got: inner.dim_out() });
    }
    let f = covariant_extend(inner)?;
    let direct = c1(&f, cfg)?.value;
    let formula = (d as f64).log2() - min_output_entropy(inner, 32, cfg.seed)?.value;
    let mut rng = random::rng(cfg.seed);
    let twirl = (0..8).map(|_| twirl_deviation(&random::random_density(d, &mut rng))).fold(0.0, f64::max);
    Ok(VerificationReport::from_trials(
        "covariant_capacity",
        &[("c1_equals_formula", C1_TOLERANCE), ("twirl_identity", TWIRL_TOLERANCE)],
        &[(cfg.seed, vec![-(direct - formula).abs(), -twirl])],
    ))
}

/// Twirl identity on `trials` random states for each dimension in `dims`.
pub fn check_twirl(dims: &[usize], trials: usize, seed: u64) -> VerificationReport {
    let mut records = Vec::new();
    for &d in dims {
        for t in 0..trials {
            let s = random::derive_seed(seed, (d * 1_000_000 + t) as u64);
            let rho = random::random_density(d, &mut random::rng(s));
            records.push((s, vec![-twirl_deviation(&rho)]));
        }
    }
    VerificationReport::from_trials("twirl", &[("twirl_identity", TWIRL_TOLERANCE)], &records)
}

// ---------------------------------------------------------------------------------------------
// Suites over random instances

/// Random generic pair: classical 2→2 branch and a qubit channel with a 3-dim environment.
pub fn random_flagged_pair(seed: u64) -> Result<(Channel, Channel)> {
    Ok((random_classical(2, 2, random::derive_seed(seed, 0))?, random_channel(2, 2, 3, random::derive_seed(seed, 1))?))
}

/// Random pair within the class where the flagged capacity formulas hold: a binary symmetric
/// classical branch (capacity `log|B| − min output entropy`) and a unital qubit branch
/// (one-shot capacity `log|B| − S_min`). Generic pairs can violate both formulas.
pub fn random_symmetric_flagged_pair(seed: u64) -> Result<(Channel, Channel)> {
    let eta = random::dirichlet(2, &mut random::rng(random::derive_seed(seed, 0)))[0];
    Ok((classical_symmetric(2, eta)?, random_unital_qubit(random::derive_seed(seed, 1))?))
}

fn instance_cfg(cfg: &OptimizerConfig, seed: u64) -> OptimizerConfig {
    cfg.clone().with_seed(seed)
}

pub const SUITES: [&str; 6] = ["lemma1", "lemma2", "lemma3", "tensor", "covariant", "twirl"];

/// Default trial count of a suite.
pub fn default_trials(suite: &str) -> usize {
    match suite {
        "lemma1" => 200,
        "covariant" => 10,
        _ => 20,
    }
}

/// Runs one named suite over seeded random instances; `trials` overrides the default count
/// (instances for the optimizer checks, ensembles for `lemma1`, states per dimension for
/// `twirl`).
pub fn run_suite(suite: &str, trials: Option<usize>, seed: u64, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    let n = trials.unwrap_or_else(|| default_trials(suite));
    let grid = linear_grid(0.0, 1.0, 9);
    let instances = |check: &dyn Fn(u64) -> Result<VerificationReport>| -> Result<Vec<VerificationReport>> {
        (0..n).map(|t| check(random::derive_seed(seed, t as u64))).collect()
    };
    match suite {
        "lemma1" => {
            let (n0, n1) = random_flagged_pair(seed)?;
            check_lemma_cq(&flagged(&FlaggedSpec::new(n0, n1)?), FlaggedSpec::FLAG_DIM, n, seed)
        }
        "lemma2" => {
            let reports = instances(&|s| {
                let (n0, n1) = random_symmetric_flagged_pair(s)?;
                check_lemma_flagged_c1(&n0, &n1, &instance_cfg(cfg, s))
            })?;
            Ok(VerificationReport::merge("lemma2_flagged_c1", &reports))
        }
        "lemma3" => {
            let reports = instances(&|s| {
                let (n0, n1) = random_symmetric_flagged_pair(s)?;
                check_lemma_flagged_cp(&n0, &n1, &grid, &instance_cfg(cfg, s))
            })?;
            Ok(VerificationReport::merge("lemma3_flagged_cp", &reports))
        }
        "tensor" => {
            let reports = instances(&|s| {
                let (c, q) = random_flagged_pair(s)?;
                check_tensor_additivity(&c, &q, &grid, &instance_cfg(cfg, s))
            })?;
            Ok(VerificationReport::merge("tensor_additivity", &reports))
        }
        "covariant" => {
            let reports = instances(&|s| {
                // Environment ≥ 3: with two Kraus operators a qubit channel always has a pure output.
                check_covariant_capacity(&random_channel(2, 2, 3 + (s % 2) as usize, s)?, &instance_cfg(cfg, s))
            })?;
            Ok(VerificationReport::merge("covariant_capacity", &reports))
        }
        "twirl" => Ok(check_twirl(&[2, 3, 4], n, seed)),
        other => Err(Error::OutOfRange(format!("unknown suite {other:?}; expected one of {SUITES:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{classical_symmetric, dephasing};

    fn flagged_qubits() -> Channel {
        let (n0, n1) = random_flagged_pair(3).unwrap();
        flagged(&FlaggedSpec::new(n0, n1).unwrap())
    }

    #[test]
    fn cq_form_ensemble_is_a_fixed_point() {
        let channel = flagged_qubits();
        let mut rng = random::rng(5);
        // Signals |j⟩ ⊗ ψ with ψ entangled between C and a 4-dim reference (padded).
        let mut vectors = Vec::new();
        for j in 0..2 {
            let mut reg = CVector::zeros(2);
            reg[j] = C64::new(1.0, 0.0);
            let inner = random::haar_vector(8, &mut rng);
            vectors.push(reg.kronecker(&inner));
        }
        let ens = Ensemble::from_purification_vectors(&[0.3, 0.7], &vectors, 4, 4).unwrap();
        let r = cq_instance(&channel, 2, &ens).unwrap();
        assert!(r.entanglement.abs() < 1e-10);
        assert!(r.chi_assist.abs() < 1e-10);
    }

    #[test]
    fn coherent_register_signals_are_improved() {
        let channel = flagged_qubits();
        let mut best: f64 = 0.0;
        for t in 0..10 {
            let ens = random_assisted_ensemble(4, t).unwrap();
            let r = cq_instance(&channel, 2, &ens).unwrap();
            assert!(r.chi_assist > -CQ_TOLERANCE && r.entanglement > -CQ_TOLERANCE);
            best = best.max(r.chi_assist.min(1.0) + r.entanglement.min(1.0));
        }
        assert!(best > 1e-3);
    }

    #[test]
    fn lemma_cq_random_trials() {
        let report = check_lemma_cq(&flagged_qubits(), 2, 40, 1).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.components.len(), 7);
        assert!(matches!(check_lemma_cq(&dephasing(0.1).unwrap(), 2, 3, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn lemma_flagged_c1_examples() {
        let cfg = OptimizerConfig { restarts: 2, ..Default::default() };
        let r = check_lemma_flagged_c1(&classical_symmetric(2, 0.0).unwrap(), &dephasing(0.9).unwrap(), &cfg).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_lemma_flagged_c1(&classical_symmetric(2, 1.0).unwrap(), &Channel::identity(2), &cfg).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn report_merging_and_replay_seeds() {
        let records = vec![(11, vec![0.0, -1.0]), (12, vec![0.1, 0.0])];
        let r = VerificationReport::from_trials("x", &[("a", 1e-3), ("b", 1e-3)], &records);
        assert_eq!(r.violations, 1);
        assert_eq!(r.instances, vec![11]);
        let m = VerificationReport::merge("x", &[r.clone(), r]);
        assert_eq!(m.trials, 4);
        assert_eq!(m.violations, 2);
        assert_eq!(m.components[1].violations, 2);
    }

    #[test]
    fn twirl_suite() {
        let r = check_twirl(&[2, 3, 4], 5, 9);
        assert!(r.passed());
        assert!(run_suite("nope", None, 0, &OptimizerConfig::default()).is_err());
    }
}
