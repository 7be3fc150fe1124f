//! Limited-memory BFGS ascent with backtracking line search.

use std::collections::VecDeque;

/// A smooth objective to maximize.
pub(crate) trait Objective {
    fn dim(&self) -> usize;
    /// Returns the value at `x` and writes its gradient into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Settings {
    pub max_iters: usize,
    /// Stop once the objective improved by less than `tol` over `stall_window` iterations.
    pub tol: f64,
    pub stall_window: usize,
    pub memory: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-6, stall_window: 50, memory: 8 }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn maximize<O: Objective + ?Sized>(obj: &O, x0: Vec<f64>, settings: &Settings) -> Outcome {
    let n = obj.dim();
    debug_assert_eq!(x0.len(), n);
    let mut evaluations = 0usize;
    // Internally minimize f = -value.
    let mut eval = |x: &[f64], g: &mut [f64]| -> f64 {
        evaluations += 1;
        let v = obj.eval(x, g);
        for gi in g.iter_mut() {
            *gi = -*gi;
        }
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };

    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = eval(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.memory);
    let mut f_trace = vec![f];
    let mut converged = false;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for _ in 0..settings.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if !gnorm.is_finite() {
            break;
        }
        if gnorm < 1e-11 {
            converged = true;
            break;
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if history.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = eval(&x_new, &mut g_new);
            if f_new <= f + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if history.is_empty() {
                converged = true;
                break;
            }
            history.clear();
            continue;
        }
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        let improvement = f - f_new;
        f = f_new;
        f_trace.push(f);
        if improvement.abs() < 1e-15 * (1.0 + f.abs()) && history.is_empty() {
            converged = true;
            break;
        }
        if f_trace.len() > settings.stall_window {
            let past = f_trace[f_trace.len() - 1 - settings.stall_window];
            if past - f < settings.tol {
                converged = true;
                break;
            }
        }
    }
    Outcome { x, value: -f, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            grad[0] = -(-2.0 * (1.0 - a) - 400.0 * a * (b - a * a));
            grad[1] = -(200.0 * (b - a * a));
            -f
        }
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let settings = Settings { max_iters: 2000, tol: 1e-14, stall_window: 20, memory: 8 };
        let out = maximize(&Rosenbrock, vec![-1.2, 1.0], &settings);
        assert!((out.x[0] - 1.0).abs() < 1e-5, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-5);
        assert!(out.value > -1e-9);
    }
}
