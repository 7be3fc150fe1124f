//! Capacity computation: Blahut-Arimoto for classical channels and multi-start ensemble
//! search for the one-shot capacities with and without an entanglement budget.

use rand::Rng;
use serde::Serialize;

use crate::channels::{tensor_power, Channel};
use crate::error::{Error, Result};
use crate::functionals::{chi_assist, holevo_chi, min_output_entropy, Ensemble};
use crate::optim::{self, Objective};
use crate::par;
use crate::qstate::{entropy_and_gradient, entropy_of_matrix, CMatrix, CVector, DensityMatrix, C64};
use crate::random;

/// Largest input dimension accepted by the ensemble searches.
pub const DIMENSION_CAP: usize = 16;

/// Smoothing width of the budget penalty.
const HUBER_WIDTH: f64 = 1e-4;

/// Budgets below this are treated as zero.
const ZERO_BUDGET: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerConfig {
    /// Number of signals; `None` means `d_in²`.
    pub ensemble_size_cap: Option<usize>,
    /// Random restarts on top of the structured starting points.
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Penalty weights `μ` for the budget constraint.
    pub lagrange_grid: Vec<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { ensemble_size_cap: None, restarts: 6, max_iters: 500, tol: 1e-6, seed: 0, lagrange_grid: vec![2.0] }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size_cap == Some(0) {
            return Err(Error::OutOfRange("ensemble_size_cap must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange(format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::OutOfRange("max_iters must be at least 1".into()));
        }
        if self.lagrange_grid.is_empty() || self.lagrange_grid.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::OutOfRange("lagrange_grid needs nonnegative finite entries".into()));
        }
        Ok(())
    }

    fn cap(&self, dim_in: usize) -> usize {
        self.ensemble_size_cap.unwrap_or(dim_in * dim_in)
    }

    fn settings(&self) -> optim::Settings {
        optim::Settings { max_iters: self.max_iters, tol: self.tol, ..Default::default() }
    }
}

/// A capacity value together with the ensemble achieving it.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub witness: Ensemble,
    pub converged: bool,
    pub evaluations: usize,
}

// ---------------------------------------------------------------------------------------------
// Classical channels

/// Capacity of a classical channel by Blahut-Arimoto on its transition matrix. Iterates until
/// the gap between the standard lower and upper bounds drops below `tol`.
pub fn classical_capacity(channel: &Channel, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tol = {tol} must be positive")));
    }
    let w = channel.transition_matrix().ok_or_else(|| Error::NotClassical(channel.label().to_string()))?;
    let (na, nb) = (w.len(), w[0].len());
    let mut p = vec![1.0 / na as f64; na];
    let mut divergences = vec![0.0; na];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..200_000 {
        iterations += 1;
        let q: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| p[a] * w[a][b]).sum()).collect();
        for a in 0..na {
            divergences[a] = (0..nb).filter(|&b| w[a][b] > 0.0).map(|b| w[a][b] * (w[a][b] / q[b]).log2()).sum();
        }
        let lower: f64 = p.iter().zip(&divergences).map(|(pa, d)| pa * d).sum();
        let upper = divergences.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol {
            converged = true;
            break;
        }
        let mut total = 0.0;
        for a in 0..na {
            p[a] *= divergences[a].exp2();
            total += p[a];
        }
        p.iter_mut().for_each(|x| *x /= total);
    }
    let items = prune(&p).into_iter().map(|(a, pa)| (pa, DensityMatrix::basis(na, a))).collect();
    let witness = Ensemble::new(items)?;
    let value = holevo_chi(channel, &witness)?;
    Ok(CapacityResult { value, witness, converged, evaluations: iterations })
}

/// Indices and renormalized weights of the non-negligible entries.
fn prune(p: &[f64]) -> Vec<(usize, f64)> {
    let kept: Vec<(usize, f64)> = p.iter().cloned().enumerate().filter(|&(_, x)| x > 1e-14).collect();
    let total: f64 = kept.iter().map(|x| x.1).sum();
    kept.into_iter().map(|(i, x)| (i, x / total)).collect()
}

// ---------------------------------------------------------------------------------------------
// Ensemble objective

/// Smoothed hinge `max(0, x)` and its derivative.
fn huber_hinge(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x <= HUBER_WIDTH {
        (x * x / (2.0 * HUBER_WIDTH), x / HUBER_WIDTH)
    } else {
        (x - HUBER_WIDTH / 2.0, 1.0)
    }
}

/// `Σ p_i S(ρ_i) + S(Σ p_i Φ(ρ_i)) − Σ p_i S((Φ⊗I)(φ_i)) − μ·hinge(Σ p_i S(ρ_i) − P)`.
///
/// Signal `i` is a purification matrix `U_i` (`d_in × rank`, unit Frobenius norm) and
/// weights are `p_i = w_i² / Σ w²`. With `rank = 1` this is the Holevo quantity. Dropping the
/// average-output term leaves `−(entropy gain)` for a single signal.
struct EnsembleObjective<'a> {
    channel: &'a Channel,
    signals: usize,
    rank: usize,
    budget: f64,
    mu: f64,
    include_average: bool,
}

/// Per-signal quantities at a point.
struct SignalEval {
    u: CMatrix,
    norm: f64,
    output: CMatrix,
    input_entropy: f64,
    input_gradient: Option<CMatrix>,
    joint_entropy: f64,
    /// `∂S(τ)/∂U*`.
    joint_term: CMatrix,
}

impl<'a> EnsembleObjective<'a> {
    fn new(channel: &'a Channel, signals: usize, rank: usize) -> Self {
        Self { channel, signals, rank, budget: 0.0, mu: 0.0, include_average: true }
    }

    fn block(&self) -> usize {
        2 * self.channel.dim_in() * self.rank
    }

    fn decode_matrix(&self, x: &[f64], i: usize) -> CMatrix {
        let (d, r) = (self.channel.dim_in(), self.rank);
        let off = self.signals + i * self.block();
        CMatrix::from_fn(d, r, |a, k| {
            let j = off + 2 * (a * r + k);
            C64::new(x[j], x[j + 1])
        })
    }

    fn weights(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let total: f64 = x[..self.signals].iter().map(|w| w * w).sum();
        (x[..self.signals].iter().map(|w| w * w / total).collect(), total)
    }

    fn evaluate_signal(&self, x: &[f64], i: usize) -> SignalEval {
        let raw = self.decode_matrix(x, i);
        let norm = raw.norm();
        let u = raw / C64::new(norm, 0.0);
        let kraus = self.channel.kraus();
        let images: Vec<CMatrix> = kraus.iter().map(|k| k * &u).collect();
        let dout = self.channel.dim_out();
        let mut output = CMatrix::zeros(dout, dout);
        for a in &images {
            output += a * a.adjoint();
        }
        let (input_entropy, input_gradient) = if self.rank == 1 {
            (0.0, None)
        } else {
            let (s, g) = entropy_and_gradient(&(&u * u.adjoint()));
            (s, Some(g))
        };
        let (joint_entropy, joint_term) = if self.rank == 1 {
            let (s, g) = entropy_and_gradient(&output);
            (s, self.channel.adjoint_apply(&g) * &u)
        } else if kraus.len() < dout * self.rank {
            // Nonzero spectrum of τ = A A† equals that of the Gram matrix A†A.
            let n = kraus.len();
            let gram = CMatrix::from_fn(n, n, |l, k| images[l].dotc(&images[k]));
            let (s, g) = entropy_and_gradient(&gram);
            let mut term = CMatrix::zeros(u.nrows(), u.ncols());
            for (k, kop) in kraus.iter().enumerate() {
                let mut mixed = CMatrix::zeros(dout, self.rank);
                for (l, img) in images.iter().enumerate() {
                    mixed += img * g[(l, k)];
                }
                term += kop.adjoint() * mixed;
            }
            (s, term)
        } else {
            let n = dout * self.rank;
            let mut tau = CMatrix::zeros(n, n);
            let vecs: Vec<CVector> =
                images.iter().map(|a| CVector::from_iterator(n, a.transpose().iter().cloned())).collect();
            for v in &vecs {
                tau += v * v.adjoint();
            }
            let (s, g) = entropy_and_gradient(&tau);
            let mut term = CMatrix::zeros(u.nrows(), u.ncols());
            for (kop, v) in kraus.iter().zip(&vecs) {
                let gv = &g * v;
                let mixed = CMatrix::from_fn(dout, self.rank, |b, k| gv[b * self.rank + k]);
                term += kop.adjoint() * mixed;
            }
            (s, term)
        };
        SignalEval { u, norm, output, input_entropy, input_gradient, joint_entropy, joint_term }
    }
}

impl Objective for EnsembleObjective<'_> {
    fn dim(&self) -> usize {
        self.signals * (1 + self.block())
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (p, wsum) = self.weights(x);
        let evals: Vec<SignalEval> = (0..self.signals).map(|i| self.evaluate_signal(x, i)).collect();
        let dout = self.channel.dim_out();

        let avg_entropy: f64 = p.iter().zip(&evals).map(|(pi, e)| pi * e.input_entropy).sum();
        let (penalty, slope) = huber_hinge(avg_entropy - self.budget);
        let input_factor = 1.0 - self.mu * slope;

        let (avg_output_entropy, avg_gradient) = if self.include_average {
            let mut avg = CMatrix::zeros(dout, dout);
            for (pi, e) in p.iter().zip(&evals) {
                avg += &e.output * C64::new(*pi, 0.0);
            }
            let (s, g) = entropy_and_gradient(&avg);
            (s, Some(g))
        } else {
            (0.0, None)
        };
        let pulled = avg_gradient.as_ref().map(|g| self.channel.adjoint_apply(g));

        let mut value = avg_output_entropy - self.mu * penalty;
        let mut partials = vec![0.0; self.signals];
        for (i, e) in evals.iter().enumerate() {
            value += p[i] * (e.input_entropy - e.joint_entropy);
            let mut g = e.input_entropy * input_factor - e.joint_entropy;
            if let Some(ag) = &avg_gradient {
                g += (ag * &e.output).trace().re;
            }
            partials[i] = g;
        }
        let mean: f64 = p.iter().zip(&partials).map(|(a, b)| a * b).sum();
        for k in 0..self.signals {
            grad[k] = 2.0 * x[k] / wsum * (partials[k] - mean);
        }

        let block = self.block();
        for (i, e) in evals.iter().enumerate() {
            let mut m = -&e.joint_term;
            if let Some(gr) = &e.input_gradient {
                m += gr * &e.u * C64::new(input_factor, 0.0);
            }
            if let Some(pg) = &pulled {
                m += pg * &e.u;
            }
            m *= C64::new(p[i], 0.0);
            let radial = e.u.dotc(&m).re;
            let w = m - &e.u * C64::new(radial, 0.0);
            let scale = 2.0 / e.norm;
            let off = self.signals + i * block;
            for a in 0..w.nrows() {
                for k in 0..w.ncols() {
                    let j = off + 2 * (a * self.rank + k);
                    grad[j] = scale * w[(a, k)].re;
                    grad[j + 1] = scale * w[(a, k)].im;
                }
            }
        }
        value
    }
}

/// Decoded search point: weights and unit-norm purification matrices.
#[derive(Clone, Debug)]
struct Point {
    weights: Vec<f64>,
    states: Vec<CMatrix>,
}

impl Point {
    fn encode(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.weights.iter().map(|p| p.max(0.0).sqrt()).collect();
        for u in &self.states {
            for a in 0..u.nrows() {
                for k in 0..u.ncols() {
                    x.push(u[(a, k)].re);
                    x.push(u[(a, k)].im);
                }
            }
        }
        x
    }

    fn decode(obj: &EnsembleObjective, x: &[f64]) -> Self {
        let (weights, _) = obj.weights(x);
        let states = (0..obj.signals)
            .map(|i| {
                let m = obj.decode_matrix(x, i);
                let n = m.norm();
                m / C64::new(n, 0.0)
            })
            .collect();
        Self { weights, states }
    }

    fn average_input_entropy(&self) -> f64 {
        self.weights.iter().zip(&self.states).map(|(p, u)| p * entropy_of_matrix(&(u * u.adjoint()))).sum()
    }

    /// Pads or truncates (keeping the heaviest signals) to exactly `m` signals of rank `r`.
    fn fit(&self, m: usize, r: usize, rng: &mut random::SeededRng) -> Self {
        let mut order: Vec<usize> = (0..self.weights.len()).collect();
        order.sort_by(|&a, &b| self.weights[b].partial_cmp(&self.weights[a]).unwrap().then(a.cmp(&b)));
        order.truncate(m);
        let d = self.states[0].nrows();
        let mut weights = Vec::with_capacity(m);
        let mut states = Vec::with_capacity(m);
        for &i in &order {
            weights.push(self.weights[i]);
            let mut u = CMatrix::zeros(d, r);
            let src = &self.states[i];
            let cols = src.ncols().min(r);
            u.columns_mut(0, cols).copy_from(&src.columns(0, cols));
            states.push(u);
        }
        while weights.len() < m {
            weights.push(1e-4);
            let mut u = CMatrix::zeros(d, r);
            u.set_column(0, &random::haar_vector(d, rng));
            states.push(u);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { weights, states }
    }

    /// Scales all non-leading Schmidt coefficients by `1 − t` and renormalizes.
    fn shrink(&self, t: f64) -> Self {
        let states = self
            .states
            .iter()
            .map(|u| {
                if u.ncols() == 1 {
                    return u.clone();
                }
                let svd = u.clone().svd(true, true);
                let (left, right) = (svd.u.unwrap(), svd.v_t.unwrap());
                let mut s = svd.singular_values.clone();
                let lead = s.imax();
                for (k, v) in s.iter_mut().enumerate() {
                    if k != lead {
                        *v *= 1.0 - t;
                    }
                }
                let n = s.norm();
                let diag = CMatrix::from_diagonal(&s.map(|v| C64::new(v / n, 0.0)));
                left * diag * right
            })
            .collect();
        Self { weights: self.weights.clone(), states }
    }

    /// Smallest common shrink meeting `Σ p_i S(ρ_i) ≤ budget`; monotone in `t` by majorization.
    fn repair(self, budget: f64) -> (Self, bool) {
        if self.average_input_entropy() <= budget {
            return (self, false);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.shrink(mid).average_input_entropy() <= budget {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (self.shrink(hi), true)
    }

    fn into_ensemble(self, dim: usize) -> Result<Ensemble> {
        let kept = prune(&self.weights);
        let r = self.states[0].ncols();
        let weights: Vec<f64> = kept.iter().map(|x| x.1).collect();
        let vectors: Vec<CVector> = kept
            .iter()
            .map(|&(i, _)| CVector::from_iterator(dim * r, self.states[i].transpose().iter().cloned()))
            .collect();
        if r == 1 {
            let items = weights.iter().zip(&vectors).map(|(&w, v)| (w, DensityMatrix::pure(v))).collect();
            Ensemble::new(items)
        } else {
            Ensemble::from_purification_vectors(&weights, &vectors, dim, r)
        }
    }
}

/// Random point; each signal's entanglement scale is drawn uniformly from `scales`.
fn random_point(d: usize, m: usize, r: usize, scales: &[f64], rng: &mut random::SeededRng) -> Point {
    let weights = random::dirichlet(m, rng);
    let states = (0..m)
        .map(|_| {
            let scale = scales[rng.random_range(0..scales.len())];
            let mut u = random::gaussian_matrix(d, r, rng) * C64::new(scale, 0.0);
            let lead = random::haar_vector(d, rng);
            for a in 0..d {
                u[(a, 0)] += lead[a];
            }
            let n = u.norm();
            u / C64::new(n, 0.0)
        })
        .collect();
    Point { weights, states }
}

struct SearchOutcome {
    point: Point,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Polishes every start (structured starts first, then `restarts` random ones) and keeps the
/// best; ties go to the lowest start index.
fn search(
    obj: &EnsembleObjective,
    starts: &[Point],
    restarts: usize,
    seed: u64,
    entangled: f64,
    settings: &optim::Settings,
) -> SearchOutcome {
    let d = obj.channel.dim_in();
    let runs = par::map_indexed(starts.len() + restarts, |i| {
        let start = if i < starts.len() {
            starts[i].clone()
        } else {
            let mut rng = random::rng(random::derive_seed(seed, i as u64));
            // Cycle the entanglement scale of random starts; with a budget, every fourth start
            // mixes unentangled and strongly entangled signals, the shape of time-sharing optima.
            let k = i - starts.len();
            let scales = if entangled > 0.0 && k % 4 == 3 {
                vec![0.0, 3.0]
            } else {
                vec![entangled * [0.1, 0.4, 1.0][k % 4 % 3]]
            };
            random_point(d, obj.signals, obj.rank, &scales, &mut rng)
        };
        optim::maximize(obj, start.encode(), settings)
    });
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let (best_index, _) =
        runs.iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, r)| if r.value > bv { (i, r.value) } else { (bi, bv) });
    let best = &runs[best_index];
    SearchOutcome { point: Point::decode(obj, &best.x), value: best.value, evaluations, converged: best.converged }
}

/// Blahut-Arimoto on the weights of fixed pure signals (classical-quantum channel).
fn polish_weights(channel: &Channel, point: &mut Point) {
    let outputs: Vec<CMatrix> = point.states.iter().map(|u| channel.apply_matrix(&(u * u.adjoint()))).collect();
    let entropies: Vec<f64> = outputs.iter().map(entropy_of_matrix).collect();
    let dout = channel.dim_out();
    let mut p = point.weights.clone();
    for _ in 0..300 {
        let mut avg = CMatrix::zeros(dout, dout);
        for (pi, o) in p.iter().zip(&outputs) {
            avg += o * C64::new(*pi, 0.0);
        }
        let (_, g) = entropy_and_gradient(&avg);
        let shift = 1.0 / std::f64::consts::LN_2;
        // Relative entropy D(σ_i ‖ σ̄) = −S(σ_i) + tr(σ_i (G + I/ln2)).
        let div: Vec<f64> = outputs.iter().zip(&entropies).map(|(o, s)| (&g * o).trace().re + shift - s).collect();
        let lower: f64 = p.iter().zip(&div).map(|(a, b)| a * b).sum();
        let upper = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < 1e-12 {
            break;
        }
        let mut total = 0.0;
        for (pi, di) in p.iter_mut().zip(&div) {
            *pi *= di.exp2();
            total += *pi;
        }
        p.iter_mut().for_each(|x| *x /= total);
    }
    let before = holevo_of_point(channel, point);
    let old = std::mem::replace(&mut point.weights, p);
    if holevo_of_point(channel, point) < before {
        point.weights = old;
    }
}

fn holevo_of_point(channel: &Channel, point: &Point) -> f64 {
    let dout = channel.dim_out();
    let mut avg = CMatrix::zeros(dout, dout);
    let mut cond = 0.0;
    for (p, u) in point.weights.iter().zip(&point.states) {
        let o = channel.apply_matrix(&(u * u.adjoint()));
        cond += p * entropy_of_matrix(&o);
        avg += o * C64::new(*p, 0.0);
    }
    entropy_of_matrix(&avg) - cond
}

fn check_dimension(channel: &Channel) -> Result<()> {
    if channel.dim_in() > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim: channel.dim_in(), cap: DIMENSION_CAP });
    }
    Ok(())
}

fn basis_start(d: usize, m: usize, rng: &mut random::SeededRng) -> Point {
    let states: Vec<CMatrix> = (0..d.min(m))
        .map(|k| {
            let mut u = CMatrix::zeros(d, 1);
            u[(k, 0)] = C64::new(1.0, 0.0);
            u
        })
        .collect();
    let weights = vec![1.0 / states.len() as f64; states.len()];
    Point { weights, states }.fit(m, 1, rng)
}

fn c1_with_starts(channel: &Channel, cfg: &OptimizerConfig, extra: Vec<Point>) -> Result<(Point, usize, bool)> {
    cfg.validate()?;
    check_dimension(channel)?;
    let d = channel.dim_in();
    let m = cfg.cap(d);
    let mut rng = random::rng(random::derive_seed(cfg.seed, u64::MAX));
    let mut starts = vec![basis_start(d, m, &mut rng)];
    starts.extend(extra.into_iter().map(|p| p.fit(m, 1, &mut rng)));
    let obj = EnsembleObjective::new(channel, m, 1);
    let out = search(&obj, &starts, cfg.restarts, cfg.seed, 0.0, &cfg.settings());
    let mut point = out.point;
    polish_weights(channel, &mut point);
    Ok((point, out.evaluations, out.converged))
}

/// One-shot classical capacity (Holevo capacity): maximizes the Holevo quantity over ensembles
/// of at most `ensemble_size_cap` pure states. The value is a certified lower bound.
pub fn c1(channel: &Channel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    let (point, evaluations, converged) = c1_with_starts(channel, cfg, Vec::new())?;
    finish_plain(channel, point, evaluations, converged)
}

fn finish_plain(channel: &Channel, point: Point, evaluations: usize, converged: bool) -> Result<CapacityResult> {
    let witness = point.into_ensemble(channel.dim_in())?;
    let value = holevo_chi(channel, &witness)?;
    Ok(CapacityResult { value, witness, converged, evaluations })
}

fn lift(point: &Point, rank: usize) -> Point {
    let states = point
        .states
        .iter()
        .map(|u| {
            let mut m = CMatrix::zeros(u.nrows(), rank);
            let cols = u.ncols().min(rank);
            m.columns_mut(0, cols).copy_from(&u.columns(0, cols));
            m
        })
        .collect();
    Point { weights: point.weights.clone(), states }
}

fn assisted_value(channel: &Channel, point: &Point) -> Result<(f64, Ensemble)> {
    let witness = lift(point, channel.dim_in()).into_ensemble(channel.dim_in())?;
    Ok((chi_assist(channel, &witness)?, witness))
}

fn c1_assisted_with_starts(
    channel: &Channel,
    budget: f64,
    cfg: &OptimizerConfig,
    extra_plain: Vec<Point>,
    extra_assisted: Vec<Point>,
) -> Result<CapacityResult> {
    check_budget(budget)?;
    let plain = c1_with_starts(channel, cfg, extra_plain)?;
    Ok(assisted_stage(channel, budget, cfg, &plain, extra_assisted, cfg.restarts)?.0)
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::OutOfRange(format!("entanglement budget {budget} must be nonnegative")));
    }
    Ok(())
}

/// Penalized search at one budget seeded by the plain optimum; also returns the best
/// unrepaired point as a continuation start for larger budgets.
fn assisted_stage(
    channel: &Channel,
    budget: f64,
    cfg: &OptimizerConfig,
    plain: &(Point, usize, bool),
    extra_assisted: Vec<Point>,
    restarts: usize,
) -> Result<(CapacityResult, Option<Point>)> {
    let (plain, mut evaluations, mut converged) = (&plain.0, plain.1, plain.2);
    let (mut best_value, mut best_witness) = assisted_value(channel, plain)?;
    if budget <= ZERO_BUDGET {
        return Ok((CapacityResult { value: best_value, witness: best_witness, converged, evaluations }, None));
    }
    let d = channel.dim_in();
    let m = cfg.cap(d);
    let mut rng = random::rng(random::derive_seed(cfg.seed, u64::MAX - 1));
    let mut starts = vec![lift(plain, d).fit(m, d, &mut rng)];
    starts.extend(extra_assisted.into_iter().map(|p| p.fit(m, d, &mut rng)));
    let settings = cfg.settings();
    let mut continuation = None;
    let mut best_raw = f64::NEG_INFINITY;
    for (j, &mu) in cfg.lagrange_grid.iter().enumerate() {
        let mut obj = EnsembleObjective::new(channel, m, d);
        obj.budget = budget;
        obj.mu = mu;
        let scale = (budget / (d as f64).log2()).clamp(0.05, 1.0);
        let out = search(&obj, &starts, restarts, random::derive_seed(cfg.seed, j as u64 + 1), scale, &settings);
        evaluations += out.evaluations;
        if out.value > best_raw {
            best_raw = out.value;
            continuation = Some(out.point.clone());
        }
        let (point, _) = out.point.repair(budget);
        let witness = point.into_ensemble(d)?;
        let value = chi_assist(channel, &witness)?;
        if value > best_value {
            best_value = value;
            best_witness = witness;
            converged = out.converged;
        }
    }
    Ok((CapacityResult { value: best_value, witness: best_witness, converged, evaluations }, continuation))
}

/// [`c1_assisted`] over an increasing budget grid. The plain optimum is computed once and each
/// budget is additionally started from the previous budget's optimum.
pub fn c1_assisted_curve(channel: &Channel, grid: &[f64], cfg: &OptimizerConfig) -> Result<Vec<CapacityResult>> {
    c1_assisted_curve_with_starts(channel, grid, cfg, |_| Vec::new())
}

fn c1_assisted_curve_with_starts(
    channel: &Channel,
    grid: &[f64],
    cfg: &OptimizerConfig,
    extra: impl Fn(usize) -> Vec<Point>,
) -> Result<Vec<CapacityResult>> {
    for (i, &p) in grid.iter().enumerate() {
        check_budget(p)?;
        if i > 0 && !(p > grid[i - 1]) {
            return Err(Error::OutOfRange("budget grid must be strictly increasing".into()));
        }
    }
    let plain = c1_with_starts(channel, cfg, Vec::new())?;
    let mut previous: Option<Point> = None;
    let mut out = Vec::with_capacity(grid.len());
    for (i, &p) in grid.iter().enumerate() {
        let mut starts = extra(i);
        starts.extend(previous.take());
        let (result, cont) = assisted_stage(channel, p, cfg, &plain, starts, cfg.restarts)?;
        previous = cont;
        out.push(result);
    }
    Ok(out)
}

/// One-shot capacity with entanglement budget `P`: maximizes the assisted Holevo quantity
/// over ensembles of mixed signals (with purifications on a reference of dimension `d_in`)
/// whose average entropy is at most `P`. The penalty sweep over `lagrange_grid` is followed
/// by a feasibility repair, so the witness always satisfies the budget exactly.
pub fn c1_assisted(channel: &Channel, budget: f64, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    c1_assisted_with_starts(channel, budget, cfg, Vec::new(), Vec::new())
}

/// Fast path for covariant channels `F` built by [`crate::channels::covariant_extend`]:
/// the capacity is `log d + S(ρ) − S((E⊗I)(φ_ρ))` maximized over `S(ρ) ≤ P`, a search over a
/// single state instead of an ensemble.
pub fn c1_assisted_covariant(channel: &Channel, budget: f64, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::OutOfRange(format!("entanglement budget {budget} must be nonnegative")));
    }
    let inner = channel.covariant_inner()?;
    let d = inner.dim_in();
    let budget = budget.min((d as f64).log2());
    let mose = min_output_entropy(&inner, cfg.restarts.max(1), cfg.seed)?;
    let mut seed_state = CMatrix::zeros(d, d);
    seed_state.set_column(0, &mose.input);
    let pure_start = Point { weights: vec![1.0], states: vec![seed_state.clone()] };
    let mut evaluations = mose.evaluations;
    let mut best = pure_start.clone();
    let mut converged = true;
    if budget > ZERO_BUDGET {
        let maximally = CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0);
        let mut obj = EnsembleObjective::new(&inner, 1, d);
        obj.include_average = false;
        obj.budget = budget;
        let starts = vec![pure_start.clone(), Point { weights: vec![1.0], states: vec![maximally] }];
        let score = |p: &Point| negated_gain(&inner, &p.states[0]);
        let mut best_score = score(&best);
        for (j, &mu) in cfg.lagrange_grid.iter().enumerate() {
            obj.mu = mu;
            let scale = (budget / (d as f64).log2()).clamp(0.05, 1.0);
            let out = search(
                &obj,
                &starts,
                cfg.restarts,
                random::derive_seed(cfg.seed, j as u64 + 1),
                scale,
                &cfg.settings(),
            );
            evaluations += out.evaluations;
            let (point, _) = out.point.repair(budget);
            let g = score(&point);
            if g > best_score {
                best_score = g;
                best = point;
                converged = out.converged;
            }
        }
    }
    // Witness {1/d², |j⟩⟨j| ⊗ ρ} purified by |j⟩ ⊗ φ_ρ.
    let u = &best.states[0];
    let phi = CVector::from_iterator(d * d, u.transpose().iter().cloned());
    let reg = d * d;
    let weights = vec![1.0 / reg as f64; reg];
    let vectors: Vec<CVector> = (0..reg)
        .map(|j| {
            let mut e = CVector::zeros(reg);
            e[j] = C64::new(1.0, 0.0);
            e.kronecker(&phi)
        })
        .collect();
    let witness = Ensemble::from_purification_vectors(&weights, &vectors, reg * d, d)?;
    let value = chi_assist(channel, &witness)?;
    Ok(CapacityResult { value, witness, converged, evaluations })
}

/// `S(ρ) − S((E⊗I)(φ))` for a unit-norm purification matrix `U` (the negated entropy gain).
fn negated_gain(inner: &Channel, u: &CMatrix) -> f64 {
    let mut obj = EnsembleObjective::new(inner, 1, u.ncols());
    obj.include_average = false;
    let x = Point { weights: vec![1.0], states: vec![u.clone()] }.encode();
    let mut g = vec![0.0; obj.dim()];
    obj.eval(&x, &mut g)
}

/// Regularization step `n ∈ {1, 2}`: evaluates `Φ^{⊗n}` with budget `nP` (or without
/// assistance when `budget` is `None`) and divides by `n`. The witness lives on `Φ^{⊗n}`.
pub fn n_shot(channel: &Channel, n: usize, budget: Option<f64>, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    if !(1..=2).contains(&n) {
        return Err(Error::OutOfRange(format!("n = {n}; only 1 and 2 are supported")));
    }
    let dim = channel.dim_in().pow(n as u32);
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
    }
    if n == 1 {
        return match budget {
            None => c1(channel, cfg),
            Some(p) => c1_assisted(channel, p, cfg),
        };
    }
    let power = tensor_power(channel, n);
    let mut result = match budget {
        None => {
            let (single, ..) = c1_with_starts(channel, cfg, Vec::new())?;
            let (point, evaluations, converged) = c1_with_starts(&power, cfg, vec![product(&single, &single)])?;
            finish_plain(&power, point, evaluations, converged)?
        }
        Some(p) => {
            let one = c1_assisted(channel, p, cfg)?;
            let single = point_from_ensemble(&one.witness)?;
            let (plain, ..) = c1_with_starts(channel, cfg, Vec::new())?;
            c1_assisted_with_starts(
                &power,
                n as f64 * p,
                cfg,
                vec![product(&plain, &plain)],
                vec![product(&single, &single)],
            )?
        }
    };
    result.value /= n as f64;
    Ok(result)
}

/// Product of two decoded ensembles: weights multiply, purification matrices Kronecker
/// (rows `sys₁ sys₂`, columns `ref₁ ref₂`).
fn product(a: &Point, b: &Point) -> Point {
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (pa, ua) in a.weights.iter().zip(&a.states) {
        for (pb, ub) in b.weights.iter().zip(&b.states) {
            weights.push(pa * pb);
            states.push(ua.kronecker(ub));
        }
    }
    Point { weights, states }
}

fn point_from_ensemble(ens: &Ensemble) -> Result<Point> {
    let d = ens.dim();
    let r = ens.ref_dim().ok_or(Error::MissingPurifications)?;
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for s in ens.signals() {
        let phi = s.purification.as_ref().ok_or(Error::MissingPurifications)?;
        // Rank-one purification: recover the vector from its largest column.
        let m = phi.matrix();
        let (col, _) =
            (0..m.ncols())
                .map(|c| (c, m.column(c).norm()))
                .fold((0, -1.0), |acc, (c, n)| if n > acc.1 { (c, n) } else { acc });
        let v = m.column(col).into_owned().normalize();
        weights.push(s.weight);
        states.push(CMatrix::from_fn(d, r, |a, k| v[a * r + k]));
    }
    Ok(Point { weights, states })
}

/// Classical-quantum tensor product: `C(Ψ₀) + C⁽¹⁾_P(Ψ₁)`. The witness is the product of the
/// two component witnesses and its assisted Holevo quantity is the reported value.
pub fn assisted_tensor_classical_quantum(
    classical: &Channel,
    quantum: &Channel,
    budget: f64,
    cfg: &OptimizerConfig,
) -> Result<CapacityResult> {
    if !classical.is_classical() {
        return Err(Error::NotClassical(classical.label().to_string()));
    }
    let a = classical_capacity(classical, 1e-10)?;
    let b = c1_assisted(quantum, budget, cfg)?;
    let witness = product_witness(&a.witness, classical.dim_in(), &b.witness, quantum.dim_in())?;
    let joint = crate::channels::tensor(classical, quantum);
    let value = chi_assist(&joint, &witness)?;
    Ok(CapacityResult {
        value,
        witness,
        converged: a.converged && b.converged,
        evaluations: a.evaluations + b.evaluations,
    })
}

/// `{p_i q_j, |i⟩⟨i| ⊗ σ_j}` from a classical basis-state ensemble and an assisted ensemble.
fn product_witness(classical: &Ensemble, da: usize, quantum: &Ensemble, dq: usize) -> Result<Ensemble> {
    let r = quantum.ref_dim().ok_or(Error::MissingPurifications)?;
    let single = point_from_ensemble(quantum)?;
    let mut weights = Vec::new();
    let mut vectors = Vec::new();
    for s in classical.signals() {
        let k =
            (0..da).max_by(|&x, &y| s.state.matrix()[(x, x)].re.total_cmp(&s.state.matrix()[(y, y)].re)).unwrap_or(0);
        let mut e = CVector::zeros(da);
        e[k] = C64::new(1.0, 0.0);
        for (p, u) in single.weights.iter().zip(&single.states) {
            weights.push(s.weight * p);
            let phi = CVector::from_iterator(dq * r, u.transpose().iter().cloned());
            vectors.push(e.kronecker(&phi));
        }
    }
    Ensemble::from_purification_vectors(&weights, &vectors, da * dq, r)
}

/// Assisted curves of a classical-quantum tensor product over a budget grid.
#[derive(Clone, Debug)]
pub struct TensorCurves {
    /// `C(Ψ₀)`.
    pub classical: f64,
    /// `C⁽¹⁾_P(Ψ₁)` per budget.
    pub quantum: Vec<CapacityResult>,
    /// Direct search on `Ψ₀ ⊗ Ψ₁`, started (among others) from the product witness.
    pub joint: Vec<CapacityResult>,
}

pub fn assisted_tensor_curves(
    classical: &Channel,
    quantum: &Channel,
    grid: &[f64],
    cfg: &OptimizerConfig,
) -> Result<TensorCurves> {
    if !classical.is_classical() {
        return Err(Error::NotClassical(classical.label().to_string()));
    }
    let a = classical_capacity(classical, 1e-10)?;
    let quantum_curve = c1_assisted_curve(quantum, grid, cfg)?;
    let joint = crate::channels::tensor(classical, quantum);
    let products = quantum_curve
        .iter()
        .map(|b| point_from_ensemble(&product_witness(&a.witness, classical.dim_in(), &b.witness, quantum.dim_in())?))
        .collect::<Result<Vec<_>>>()?;
    let joint_curve = c1_assisted_curve_with_starts(&joint, grid, cfg, |i| vec![products[i].clone()])?;
    Ok(TensorCurves { classical: a.value, quantum: quantum_curve, joint: joint_curve })
}
