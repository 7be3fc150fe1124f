//! WebAssembly bindings for the browser demo. Every export returns a JSON string; errors come
//! back as `{"error": "..."}` so the page can show them inline.

use cetradeoff::channels::{classical_symmetric, dephasing};
use cetradeoff::optimizers::classical_capacity;
use cetradeoff::tradeoff::{linear_grid, main_theorem_demo, sample_curve};
use cetradeoff::{OptimizerConfig, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Fewer restarts than the native default keep the page responsive.
fn browser_config(seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts: 2, ..OptimizerConfig::default() }.with_seed(seed)
}

fn respond(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({"error": e.to_string()}).to_string(),
    }
}

fn points_of(grid: &[f64], rates: &[f64]) -> Value {
    json!(grid.iter().zip(rates).map(|(p, r)| [*p, *r]).collect::<Vec<_>>())
}

/// Capacity of qubit dephasing against the entanglement budget on `[0, 1]`.
#[wasm_bindgen]
pub fn dephasing_curve(lambda: f64, points: usize, seed: u64) -> String {
    respond((|| {
        let grid = linear_grid(0.0, 1.0, points.clamp(2, 33));
        let curve = sample_curve(&dephasing(lambda)?, &grid, &browser_config(seed))?;
        Ok(json!({
            "title": format!("Dephasing, lambda = {lambda}"),
            "x_label": "P (ebits)",
            "series": [{"label": "one-shot capacity", "points": points_of(&grid, &curve.rates())}],
        }))
    })())
}

/// Capacity of the symmetric classical channel on `dim` letters as the noise `η` varies.
#[wasm_bindgen]
pub fn classical_sweep(dim: usize, points: usize) -> String {
    respond((|| {
        let grid = linear_grid(0.0, 1.0, points.clamp(2, 201));
        let rates = grid
            .iter()
            .map(|&eta| Ok(classical_capacity(&classical_symmetric(dim, eta)?, 1e-10)?.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "title": format!("Symmetric classical channel, |B| = {dim}"),
            "x_label": "eta",
            "series": [{"label": "capacity", "points": points_of(&grid, &rates)}],
        }))
    })())
}

/// Flagged-channel envelopes with the superadditivity witness interval.
#[wasm_bindgen]
pub fn main_theorem(epsilon: f64, lambda: f64, points: usize, seed: u64) -> String {
    respond((|| {
        let demo = main_theorem_demo(epsilon, lambda, points.clamp(3, 17), &browser_config(seed))?;
        let series = |c: &cetradeoff::TradeoffCurve, label: &str| json!({"label": label, "points": points_of(&c.grid(), &c.rates())});
        Ok(json!({
            "title": format!("Flagged channel, epsilon = {epsilon}, lambda = {lambda}"),
            "x_label": "P (ebits)",
            "series": [series(&demo.one_shot_flagged, "one-shot"), series(&demo.model_flagged, "regularized model")],
            "shade": demo.report.witness_interval,
            "eta": demo.eta,
            "endpoint_gaps": demo.endpoint_gaps,
        }))
    })())
}
