//! Capacity/entanglement trade-off curves.
//!
//! A [`TradeoffCurve`] samples `P ↦ rate` on an increasing grid. On top of it sit the
//! time-sharing envelope of a flagged channel, slope analysis (the slope-one regime and strict
//! concavity), the superadditivity witness comparing a one-shot curve with a model of the
//! regularized curve, and the surrogate used by the end-to-end demonstration.

use serde::Serialize;

use crate::channels::{covariant_extend, dephasing, n0_embedding, random_channel, Channel};
use crate::error::{Error, Result};
use crate::optimizers::{c1_assisted_covariant, c1_assisted_curve, classical_capacity, OptimizerConfig};
use crate::par;

/// Rates may dip this far below a left neighbor before the point counts as non-monotone.
pub const MONOTONE_TOLERANCE: f64 = 1e-6;
/// Slope tolerance of the slope-one regime.
pub const UNIT_SLOPE_TOLERANCE: f64 = 1e-3;
/// Slope drop that marks a point as strictly concave.
pub const CONCAVITY_THRESHOLD: f64 = 2e-3;
/// Gap that makes a budget a superadditivity witness.
pub const WITNESS_THRESHOLD: f64 = 1e-3;
/// Default resolution of the time-sharing grid over `q`.
pub const TIMESHARE_RESOLUTION: usize = 1024;

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub rate: f64,
    pub provenance_id: String,
    /// Raised to its left neighbor by the monotone repair.
    pub repaired: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TradeoffCurve {
    label: String,
    points: Vec<CurvePoint>,
}

impl TradeoffCurve {
    /// Curve from `(P, rate)` pairs; `P` must be strictly increasing and nonnegative.
    pub fn new(label: impl Into<String>, samples: &[(f64, f64)]) -> Result<Self> {
        let label = label.into();
        let points = samples
            .iter()
            .enumerate()
            .map(|(i, &(p, rate))| CurvePoint { p, rate, provenance_id: format!("{label}#{i}"), repaired: false })
            .collect();
        Self::from_points(label, points)
    }

    pub fn from_points(label: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::OutOfRange("a curve needs at least one point".into()));
        }
        for (i, pt) in points.iter().enumerate() {
            if !(pt.p >= 0.0) || !pt.p.is_finite() || !pt.rate.is_finite() {
                return Err(Error::OutOfRange(format!("point {i} = ({}, {})", pt.p, pt.rate)));
            }
            if i > 0 && !(pt.p > points[i - 1].p) {
                return Err(Error::OutOfRange(format!("P grid not strictly increasing at index {i}")));
            }
        }
        Ok(Self { label: label.into(), points })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate).collect()
    }

    pub fn p_min(&self) -> f64 {
        self.points[0].p
    }

    pub fn p_max(&self) -> f64 {
        self.points[self.points.len() - 1].p
    }

    /// Linear interpolation; errors outside the sampled domain.
    pub fn rate_at(&self, p: f64) -> Result<f64> {
        let slack = 1e-12;
        if p < self.p_min() - slack || p > self.p_max() + slack {
            return Err(Error::OutOfRange(format!("P = {p} outside [{}, {}]", self.p_min(), self.p_max())));
        }
        let p = p.clamp(self.p_min(), self.p_max());
        let i = self.points.partition_point(|pt| pt.p < p);
        if i == 0 {
            return Ok(self.points[0].rate);
        }
        if i == self.points.len() {
            return Ok(self.points[i - 1].rate);
        }
        let (a, b) = (&self.points[i - 1], &self.points[i]);
        let t = (p - a.p) / (b.p - a.p);
        Ok(a.rate + t * (b.rate - a.rate))
    }

    /// Same grid, rates transformed pointwise.
    pub fn map_rates(&self, label: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> TradeoffCurve {
        let label = label.into();
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, pt)| CurvePoint {
                p: pt.p,
                rate: f(pt.p, pt.rate),
                provenance_id: format!("{label}#{i}"),
                repaired: false,
            })
            .collect();
        TradeoffCurve { label, points }
    }

    /// `min_i (rate_{i+1} − rate_i)`; negative means a decrease.
    pub fn monotone_slack(&self) -> f64 {
        self.points.windows(2).map(|w| w[1].rate - w[0].rate).fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from a sample up to the upper concave hull of all samples.
    pub fn concavity_deviation(&self) -> f64 {
        let hull = upper_hull(&self.points);
        self.points
            .iter()
            .map(|pt| {
                let j = hull.partition_point(|&(hp, _)| hp < pt.p).min(hull.len() - 1);
                let h = if hull[j].0 == pt.p || j == 0 {
                    hull[j].1
                } else {
                    let (a, b) = (hull[j - 1], hull[j]);
                    a.1 + (pt.p - a.0) / (b.0 - a.0) * (b.1 - a.1)
                };
                h - pt.rate
            })
            .fold(0.0, f64::max)
    }

    /// `min_P (rate(0) + P − rate(P))`: slack of the bound that entanglement adds at most one
    /// bit per ebit.
    pub fn budget_slack(&self) -> f64 {
        let base = self.points[0].rate - self.points[0].p;
        self.points.iter().map(|pt| base + pt.p - pt.rate).fold(f64::INFINITY, f64::min)
    }
}

fn upper_hull(points: &[CurvePoint]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pt in points {
        let c = (pt.p, pt.rate);
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b if it lies on or below the chord a–c.
            if (b.1 - a.1) * (c.0 - a.0) <= (c.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    hull
}

/// One assisted-capacity solve per grid point, then a monotone repair that lifts any point
/// below its left neighbor to the neighbor's rate and flags it.
pub fn sample_curve(channel: &Channel, grid: &[f64], cfg: &OptimizerConfig) -> Result<TradeoffCurve> {
    validate_grid(grid, (channel.dim_in() as f64).log2())?;
    let rates: Vec<f64> = c1_assisted_curve(channel, grid, cfg)?.into_iter().map(|r| r.value).collect();
    Ok(repaired_curve(channel.label(), grid, &rates, cfg.seed))
}

fn validate_grid(grid: &[f64], p_cap: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("empty P grid".into()));
    }
    for (i, &p) in grid.iter().enumerate() {
        if !(p >= 0.0) || p > p_cap + 1e-12 {
            return Err(Error::OutOfRange(format!("P = {p} outside [0, {p_cap}]")));
        }
        if i > 0 && !(p > grid[i - 1]) {
            return Err(Error::OutOfRange("P grid must be strictly increasing".into()));
        }
    }
    Ok(())
}

fn repaired_curve(label: &str, grid: &[f64], rates: &[f64], seed: u64) -> TradeoffCurve {
    let mut points: Vec<CurvePoint> = Vec::with_capacity(grid.len());
    for (i, (&p, &rate)) in grid.iter().zip(rates).enumerate() {
        let mut pt =
            CurvePoint { p, rate, provenance_id: format!("{label}|P={p:.6}|seed={seed}|{i}"), repaired: false };
        if let Some(prev) = points.last() {
            if rate < prev.rate {
                pt.rate = prev.rate;
                pt.repaired = true;
                pt.provenance_id.push_str("|repaired");
            }
        }
        points.push(pt);
    }
    TradeoffCurve { label: label.to_string(), points }
}

/// Evenly spaced grid of `points` values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Maximizer of the time-sharing envelope.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Timeshare {
    pub value: f64,
    /// Fraction of uses spent on the classical branch.
    pub q: f64,
    /// Budget per use of the quantum branch.
    pub p_prime: f64,
}

/// Time sharing between a classical branch of capacity `cn0` and a quantum branch described
/// by `curve`: `max_q q·cn0 + (1−q)·rate(P′)` with `P′ = P/(1−q)` capped at the curve domain.
pub fn timeshare_flagged(cn0: f64, curve: &TradeoffCurve, p: f64) -> Result<f64> {
    Ok(timeshare_detail(cn0, curve, p, TIMESHARE_RESOLUTION)?.value)
}

/// As [`timeshare_flagged`] with an explicit `q` grid `k/resolution`. `q = 1` is only used at
/// `P = 0`; ties keep the smallest `q`.
pub fn timeshare_detail(cn0: f64, curve: &TradeoffCurve, p: f64, resolution: usize) -> Result<Timeshare> {
    if resolution == 0 {
        return Err(Error::OutOfRange("time-sharing resolution must be positive".into()));
    }
    if p < curve.p_min() - 1e-12 || p > curve.p_max() + 1e-12 {
        return Err(Error::OutOfRange(format!("P = {p} outside [{}, {}]", curve.p_min(), curve.p_max())));
    }
    let p = p.max(0.0);
    let last = if p == 0.0 { resolution } else { resolution - 1 };
    let mut best = Timeshare { value: f64::NEG_INFINITY, q: 0.0, p_prime: p };
    for k in 0..=last {
        let q = k as f64 / resolution as f64;
        let p_prime = if q < 1.0 { (p / (1.0 - q)).min(curve.p_max()) } else { curve.p_min() };
        let value = q * cn0 + (1.0 - q) * curve.rate_at(p_prime.max(curve.p_min()))?;
        if value > best.value {
            best = Timeshare { value, q, p_prime };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveAnalysis {
    /// Finite-difference slope on each interval.
    pub slopes: Vec<f64>,
    /// Last sampled `P` whose left intervals all have slope ≥ 1 − 1e-3.
    pub p_bar: f64,
    /// Sampling can only bracket the end of the slope-one regime.
    pub p_bar_interval: (f64, f64),
    /// Per point; interior points whose slope drops by more than 2e-3.
    pub strict_concavity_flags: Vec<bool>,
    /// Largest slope increase between adjacent intervals (≤ 2e-3 for a concave curve).
    pub worst_slope_increase: f64,
    pub slopes_nonincreasing: bool,
    /// Gap between regularized and one-shot capacity used with this curve.
    pub epsilon: f64,
}

pub fn analyze(curve: &TradeoffCurve, epsilon: f64) -> Result<CurveAnalysis> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(Error::OutOfRange(format!("analysis needs at least 3 points, got {}", pts.len())));
    }
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].rate - w[0].rate) / (w[1].p - w[0].p)).collect();
    let run = slopes.iter().take_while(|&&s| s >= 1.0 - UNIT_SLOPE_TOLERANCE).count();
    let p_bar = pts[run].p;
    let p_bar_interval = (p_bar, pts.get(run + 1).map_or(p_bar, |pt| pt.p));
    let mut flags = vec![false; pts.len()];
    for i in 1..pts.len() - 1 {
        flags[i] = slopes[i - 1] - slopes[i] > CONCAVITY_THRESHOLD;
    }
    let worst_slope_increase = slopes.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(CurveAnalysis {
        slopes,
        p_bar,
        p_bar_interval,
        strict_concavity_flags: flags,
        worst_slope_increase,
        slopes_nonincreasing: worst_slope_increase <= CONCAVITY_THRESHOLD,
        epsilon,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessPoint {
    pub p: f64,
    /// Time-sharing envelope over the one-shot curve.
    pub one_shot: f64,
    /// Time-sharing envelope over the model curve.
    pub model: f64,
    pub gap: f64,
    pub q_tilde: f64,
    pub p_tilde: f64,
    /// `"P̃=P"` when the model optimum uses the quantum branch only, `"P̃>P"` otherwise.
    pub case: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperadditivityReport {
    pub model_label: String,
    pub classical_branch: f64,
    pub epsilon: f64,
    pub points: Vec<WitnessPoint>,
    /// Budgets where the model envelope beats the one-shot envelope by more than 1e-3.
    pub witness: Vec<f64>,
    pub witness_interval: Option<(f64, f64)>,
}

impl SuperadditivityReport {
    pub fn is_witnessed(&self) -> bool {
        !self.witness.is_empty()
    }
}

/// Compares the flagged-channel envelopes built from a one-shot curve and from a model of the
/// regularized curve of the quantum branch. Requires `cn0` to equal the model at `P = 0`.
pub fn witness_superadditivity(
    cn0: f64,
    c1_curve: &TradeoffCurve,
    cp_model: &TradeoffCurve,
    epsilon: f64,
) -> Result<SuperadditivityReport> {
    let model0 = cp_model.rate_at(cp_model.p_min())?;
    if cp_model.p_min() != 0.0 || (cn0 - model0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "classical branch {cn0} must match the model at P = 0 ({model0}) within 1e-6"
        )));
    }
    let hi = c1_curve.p_max().min(cp_model.p_max());
    let mut points = Vec::new();
    for p in c1_curve.grid().into_iter().filter(|&p| p <= hi + 1e-12) {
        let a = timeshare_detail(cn0, c1_curve, p, TIMESHARE_RESOLUTION)?;
        let b = timeshare_detail(cn0, cp_model, p, TIMESHARE_RESOLUTION)?;
        points.push(WitnessPoint {
            p,
            one_shot: a.value,
            model: b.value,
            gap: b.value - a.value,
            q_tilde: b.q,
            p_tilde: b.p_prime,
            case: if b.q == 0.0 { "P̃=P" } else { "P̃>P" },
        });
    }
    let witness: Vec<f64> = points.iter().filter(|w| w.gap > WITNESS_THRESHOLD).map(|w| w.p).collect();
    let witness_interval = match (witness.first(), witness.last()) {
        (Some(&a), Some(&b)) => Some((a, b)),
        _ => None,
    };
    Ok(SuperadditivityReport {
        model_label: cp_model.label().to_string(),
        classical_branch: cn0,
        epsilon,
        points,
        witness,
        witness_interval,
    })
}

/// Rate region of using two channels side by side: `max_{P₁+P₂=P} a(P₁) + b(P₂)` evaluated
/// on `grid` by a 1024-step search over the split.
pub fn product_envelope(
    label: impl Into<String>,
    a: &TradeoffCurve,
    b: &TradeoffCurve,
    grid: &[f64],
) -> Result<TradeoffCurve> {
    let lo = a.p_min() + b.p_min();
    let hi = a.p_max() + b.p_max();
    let mut samples = Vec::with_capacity(grid.len());
    for &p in grid {
        if p < lo - 1e-12 || p > hi + 1e-12 {
            return Err(Error::OutOfRange(format!("P = {p} outside [{lo}, {hi}]")));
        }
        let from = (p - b.p_max()).max(a.p_min());
        let to = (p - b.p_min()).min(a.p_max());
        let steps = 1024;
        let mut best = f64::NEG_INFINITY;
        for k in 0..=steps {
            let p1 = if to > from { from + (to - from) * k as f64 / steps as f64 } else { from };
            let p2 = (p - p1).clamp(b.p_min(), b.p_max());
            best = best.max(a.rate_at(p1)? + b.rate_at(p2)?);
            if to <= from {
                break;
            }
        }
        // Grid points of `a` are exact kinks of the piecewise-linear maximand.
        for p1 in a.grid().into_iter().filter(|&x| x >= from && x <= to) {
            let p2 = (p - p1).clamp(b.p_min(), b.p_max());
            best = best.max(a.rate_at(p1)? + b.rate_at(p2)?);
        }
        samples.push((p, best));
    }
    TradeoffCurve::new(label, &samples)
}

/// Everything the end-to-end demonstration produces.
#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub epsilon: f64,
    pub lambda: f64,
    pub eta: f64,
    pub classical_branch: f64,
    /// One-shot curve of the covariant factor.
    pub covariant_curve: TradeoffCurve,
    /// One-shot curve of the dephasing factor.
    pub dephasing_curve: TradeoffCurve,
    /// One-shot curve of the quantum branch (covariant ⊗ dephasing).
    pub one_shot_branch: TradeoffCurve,
    /// Model of the regularized curve of the quantum branch.
    pub model_branch: TradeoffCurve,
    /// Flagged-channel envelopes: one-shot and model.
    pub one_shot_flagged: TradeoffCurve,
    pub model_flagged: TradeoffCurve,
    pub endpoint_gaps: (f64, f64),
    pub report: SuperadditivityReport,
}

/// Surrogate demonstration of superadditivity with limited assistance.
///
/// The quantum branch is `F ⊗ Δ(λ)` with `F` the covariant extension of a seeded random qubit
/// channel. Its one-shot curve is the product envelope of the two factor curves; the model of
/// its regularized curve lifts the covariant factor by `ε` (saturating at the factor's value at
/// full assistance). The classical branch `N₀` is tuned by bisection on `η` so its capacity
/// equals the model at `P = 0`.
pub fn main_theorem_demo(epsilon: f64, lambda: f64, points: usize, cfg: &OptimizerConfig) -> Result<DemoReport> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} must lie in (0, 1/2)")));
    }
    if points < 3 {
        return Err(Error::OutOfRange(format!("need at least 3 points, got {points}")));
    }
    let inner = random_channel(2, 2, 3, cfg.seed)?;
    let f = covariant_extend(&inner)?;
    let delta = dephasing(lambda)?;

    let factor_grid = linear_grid(0.0, 1.0, points);
    let cov_rates = par::map_indexed(factor_grid.len(), |i| c1_assisted_covariant(&f, factor_grid[i], cfg))
        .into_iter()
        .map(|r| r.map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;
    let covariant_curve = repaired_curve("covariant", &factor_grid, &cov_rates, cfg.seed);
    let dephasing_curve = sample_curve(&delta, &factor_grid, cfg)?.relabel("dephasing");

    let branch_grid = linear_grid(0.0, 2.0, 2 * points - 1);
    let one_shot_branch = product_envelope("one-shot branch", &covariant_curve, &dephasing_curve, &branch_grid)?;
    let saturation = covariant_curve.rate_at(covariant_curve.p_max())?;
    let lifted = covariant_curve.map_rates("covariant model", |_, r| (r + epsilon).min(saturation));
    let model_branch = product_envelope(
        format!("model: one-shot covariant factor + {epsilon} (capped at full assistance)"),
        &lifted,
        &dephasing_curve,
        &branch_grid,
    )?;

    let target = model_branch.rate_at(0.0)?;
    let (eta, classical_branch) = tune_classical_branch(16, 4, target)?;
    let report = witness_superadditivity(classical_branch, &one_shot_branch, &model_branch, epsilon)?;
    let one_shot_flagged =
        TradeoffCurve::new("one-shot flagged", &report.points.iter().map(|w| (w.p, w.one_shot)).collect::<Vec<_>>())?;
    let model_flagged =
        TradeoffCurve::new("model flagged", &report.points.iter().map(|w| (w.p, w.model)).collect::<Vec<_>>())?;
    let first = &report.points[0];
    let last = &report.points[report.points.len() - 1];
    let endpoint_gaps = ((first.model - first.one_shot).abs(), (last.model - last.one_shot).abs());
    Ok(DemoReport {
        epsilon,
        lambda,
        eta,
        classical_branch,
        covariant_curve,
        dephasing_curve,
        one_shot_branch,
        model_branch,
        one_shot_flagged,
        model_flagged,
        endpoint_gaps,
        report,
    })
}

/// Bisection on `η` so that the embedding channel `N₀(|A|, |B|, η)` has capacity `target`.
pub fn tune_classical_branch(dim_a: usize, dim_b: usize, target: f64) -> Result<(f64, f64)> {
    let top = (dim_b as f64).log2();
    if !(0.0..=top).contains(&target) {
        return Err(Error::OutOfRange(format!("target capacity {target} outside [0, {top}]")));
    }
    let capacity =
        |eta: f64| -> Result<f64> { Ok(classical_capacity(&n0_embedding(dim_a, dim_b, eta)?, 1e-11)?.value) };
    // Capacity decreases from log|B| at η = 0 to 0 at η = 1.
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut value = capacity(0.5)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        value = capacity(mid)?;
        if (value - target).abs() < 1e-9 {
            return Ok((mid, value));
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (value - target).abs() > 1e-6 {
        return Err(Error::OutOfRange(format!("bisection on eta stalled at capacity {value} for target {target}")));
    }
    Ok((0.5 * (lo + hi), value))
}

impl TradeoffCurve {
    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knee() -> TradeoffCurve {
        // Slope 1 up to P = 0.5, then 0.2.
        let pts: Vec<(f64, f64)> = linear_grid(0.0, 1.0, 5)
            .into_iter()
            .map(|p| (p, if p <= 0.5 { 1.0 + p } else { 1.5 + 0.2 * (p - 0.5) }))
            .collect();
        TradeoffCurve::new("knee", &pts).unwrap()
    }

    #[test]
    fn curve_validation_and_interpolation() {
        assert!(TradeoffCurve::new("bad", &[(0.0, 1.0), (0.0, 1.1)]).is_err());
        assert!(TradeoffCurve::new("bad", &[]).is_err());
        let c = knee();
        assert!((c.rate_at(0.125).unwrap() - 1.125).abs() < 1e-12);
        assert!(c.rate_at(1.5).is_err());
        assert!(c.monotone_slack() > 0.0);
        assert!(c.concavity_deviation() < 1e-12);
        assert!(c.budget_slack().abs() < 1e-12);
    }

    #[test]
    fn hull_detects_dips() {
        let c = TradeoffCurve::new("dip", &[(0.0, 1.0), (0.5, 1.0), (1.0, 2.0)]).unwrap();
        assert!((c.concavity_deviation() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn knee_analysis() {
        let a = analyze(&knee(), 0.0).unwrap();
        assert_eq!(a.p_bar, 0.5);
        assert_eq!(a.p_bar_interval, (0.5, 0.75));
        assert_eq!(a.strict_concavity_flags, vec![false, false, true, false, false]);
        assert!(a.slopes_nonincreasing);
        let line = TradeoffCurve::new("line", &[(0.0, 1.0), (0.5, 1.5), (1.0, 2.0)]).unwrap();
        let a = analyze(&line, 0.0).unwrap();
        assert_eq!(a.p_bar, 1.0);
        assert!(a.strict_concavity_flags.iter().all(|f| !f));
        assert!(analyze(&TradeoffCurve::new("short", &[(0.0, 1.0), (1.0, 2.0)]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn timeshare_basics() {
        let c = knee();
        // q = 0 is always available.
        for &p in &[0.0, 0.3, 0.7, 1.0] {
            assert!(timeshare_flagged(0.0, &c, p).unwrap() >= c.rate_at(p).unwrap() - 1e-12);
        }
        // At P = 0 the envelope is the better of the two branches.
        assert!((timeshare_flagged(1.7, &c, 0.0).unwrap() - 1.7).abs() < 1e-12);
        assert!((timeshare_flagged(0.4, &c, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(timeshare_flagged(1.0, &c, 1.2).is_err());
    }

    #[test]
    fn timeshare_prefers_quantum_branch_for_strictly_concave_curve() {
        // Strictly concave curve starting at the classical value.
        let pts: Vec<(f64, f64)> =
            linear_grid(0.0, 1.0, 41).into_iter().map(|p| (p, 1.0 + (2.0 * p).sqrt() / 2.0)).collect();
        let c = TradeoffCurve::new("sqrt", &pts).unwrap();
        for &p in &[0.25, 0.5, 0.75] {
            let t = timeshare_detail(1.0, &c, p, 1024).unwrap();
            assert_eq!(t.q, 0.0, "P = {p}");
        }
    }

    #[test]
    fn witness_examples() {
        let base = TradeoffCurve::new(
            "base",
            &linear_grid(0.0, 1.0, 11)
                .into_iter()
                .map(|p| (p, 1.0 + 0.5 * (1.0 - (1.0 - p).powi(2))))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let same = witness_superadditivity(1.0, &base, &base, 0.0).unwrap();
        assert!(!same.is_witnessed());
        let lifted = base.map_rates("lifted", |_, r| r + 0.1);
        assert!(matches!(witness_superadditivity(1.0, &base, &lifted, 0.1), Err(Error::Precondition(_))));
        let report = witness_superadditivity(1.1, &base, &lifted, 0.1).unwrap();
        assert!(report.witness.iter().any(|&p| (p - 0.3).abs() < 1e-12), "{:?}", report.witness);
    }

    #[test]
    fn product_envelope_of_lines() {
        let a = TradeoffCurve::new("a", &[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let b = TradeoffCurve::new("b", &[(0.0, 0.5), (1.0, 0.75)]).unwrap();
        let c = product_envelope("ab", &a, &b, &[0.0, 0.5, 1.0, 1.5, 2.0]).unwrap();
        // Spend on the steeper curve first.
        assert_eq!(c.rates(), vec![1.5, 2.0, 2.5, 2.625, 2.75]);
        assert!(product_envelope("ab", &a, &b, &[2.5]).is_err());
    }

    #[test]
    fn eta_bisection() {
        let (eta, c) = tune_classical_branch(16, 4, 1.3).unwrap();
        assert!((c - 1.3).abs() < 1e-6);
        assert!(eta > 0.0 && eta < 1.0);
        assert!(tune_classical_branch(16, 4, 2.5).is_err());
    }
}
