//! Closed-form values the optimizers must reproduce.

use cetradeoff::channels::{self, classical_symmetric, dephasing, flagged, n0_embedding, Channel, FlaggedSpec};
use cetradeoff::functionals::min_output_entropy;
use cetradeoff::optimizers::{c1, c1_assisted, c1_assisted_covariant, classical_capacity, n_shot, OptimizerConfig};
use cetradeoff::qstate::binary_entropy;
use cetradeoff::tradeoff::{linear_grid, sample_curve};

fn h(p: f64) -> f64 {
    binary_entropy(p).unwrap()
}

/// Dephasing with budget `P`: `1 + h(p) − h((1 + √(1 − 16 p(1−p) λ(1−λ)))/2)` with `h(p) = P`.
fn dephasing_oracle(lambda: f64, budget: f64) -> f64 {
    let p = if budget >= 1.0 {
        0.5
    } else {
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < budget {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    };
    let disc = (1.0 - 16.0 * p * (1.0 - p) * lambda * (1.0 - lambda)).max(0.0).sqrt();
    1.0 + h(p) - h(0.5 * (1.0 + disc))
}

#[test]
fn symmetric_classical_channel() {
    for (dim, eta, expected) in [(2, 0.5, 1.0 - h(0.25)), (2, 0.0, 1.0), (2, 1.0, 0.0), (3, 0.0, 3f64.log2())] {
        let v = classical_capacity(&classical_symmetric(dim, eta).unwrap(), 1e-10).unwrap().value;
        assert!((v - expected).abs() < 1e-6, "dim {dim} eta {eta}: {v} vs {expected}");
    }
    // 0.1887 to four decimals.
    let v = classical_capacity(&classical_symmetric(2, 0.5).unwrap(), 1e-10).unwrap().value;
    assert!((v - 0.1887).abs() < 5e-5);
}

#[test]
fn embedded_classical_channel_has_the_same_capacity() {
    let a = classical_capacity(&n0_embedding(3, 2, 0.4).unwrap(), 1e-10).unwrap().value;
    let b = classical_capacity(&classical_symmetric(2, 0.4).unwrap(), 1e-10).unwrap().value;
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn identity_curve_has_unit_slope() {
    let cfg = OptimizerConfig::default();
    let curve = sample_curve(&Channel::identity(2), &[0.0, 0.5, 1.0], &cfg).unwrap();
    for (r, e) in curve.rates().iter().zip([1.0, 1.5, 2.0]) {
        assert!((r - e).abs() < 1e-3, "{r} vs {e}");
    }
}

#[test]
fn dephasing_curve_matches_closed_form() {
    let cfg = OptimizerConfig::default();
    let grid = linear_grid(0.0, 1.0, 5);
    let curve = sample_curve(&dephasing(0.25).unwrap(), &grid, &cfg).unwrap();
    for (&p, r) in grid.iter().zip(curve.rates()) {
        assert!((r - dephasing_oracle(0.25, p)).abs() < 1e-4, "P {p}: {r} vs {}", dephasing_oracle(0.25, p));
    }
}

#[test]
fn flagged_noiseless_branches() {
    let spec = FlaggedSpec::new(classical_symmetric(2, 0.0).unwrap(), Channel::identity(2)).unwrap();
    let v = c1(&flagged(&spec), &OptimizerConfig::default()).unwrap().value;
    assert!((v - 1.0).abs() < 1e-3);
}

#[test]
fn covariant_extension_formula() {
    let cfg = OptimizerConfig::default();
    let inner = channels::random_channel(2, 2, 3, 11).unwrap();
    let smin = min_output_entropy(&inner, 8, 11).unwrap().value;
    let f = channels::covariant_extend(&inner).unwrap();
    let direct = c1(&f, &cfg).unwrap().value;
    let fast = c1_assisted_covariant(&f, 0.0, &cfg).unwrap().value;
    assert!((direct - (1.0 - smin)).abs() < 5e-3, "{direct} vs {}", 1.0 - smin);
    assert!((fast - (1.0 - smin)).abs() < 1e-6);
}

#[test]
fn superdense_coding_endpoint() {
    let v = c1_assisted(&Channel::identity(2), 1.0, &OptimizerConfig::default()).unwrap().value;
    assert!((v - 2.0).abs() < 1e-3);
}

#[test]
fn two_uses_of_the_identity() {
    let v = n_shot(&Channel::identity(2), 2, None, &OptimizerConfig::default()).unwrap().value;
    assert!((v - 1.0).abs() < 1e-3);
}
