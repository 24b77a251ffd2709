//! WebAssembly bindings for the browser demo.
//!
//! Each export takes and returns JSON text. The `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively.

use forktopo_core::report::{verify, SpaceCheck};
use forktopo_core::scenario::parse_seed;
use forktopo_core::sim::{first_fork_step, run};
use forktopo_core::spaces::{growing_label, growing_space_from_counts, ProxyBinding};
use forktopo_core::{parse_scenario, GrowingFork, Scenario};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn load(scenario: &str, seed: &str) -> Result<(Scenario, Vec<GrowingFork>), String> {
    let mut parsed = parse_scenario(scenario).map_err(|e| e.to_string())?;
    if !seed.trim().is_empty() {
        parsed.config.seed = parse_seed(seed).map_err(|e| e.to_string())?;
    }
    let (_, growing) = run(&parsed.config, &parsed.transactions).map_err(|e| e.to_string())?;
    Ok((parsed, growing))
}

/// Runs a scenario and returns per-cluster fork counts and first-fork steps.
/// A non-empty `seed` replaces the scenario's seed.
pub fn simulate_json(scenario: &str, seed: &str) -> Result<String, String> {
    let (parsed, growing) = load(scenario, seed)?;
    let counts: Vec<Vec<usize>> = growing.iter().map(GrowingFork::counts).collect();
    let first_fork: Vec<Option<usize>> = counts.iter().map(|c| first_fork_step(c)).collect();
    Ok(json!({
        "seed": parsed.config.seed,
        "horizon": parsed.config.horizon,
        "counts": counts,
        "first_fork": first_fork,
    })
    .to_string())
}

/// Growing-fork space over hand-edited count sequences: distances, ε, basis.
pub fn growing_json(counts: &str) -> Result<String, String> {
    let counts: Vec<Vec<usize>> = serde_json::from_str(counts).map_err(|e| format!("counts: {e}"))?;
    let Some(len) = counts.first().map(Vec::len) else {
        return Err("counts: need at least one sequence".into());
    };
    if counts.iter().any(|c| c.len() != len || c.is_empty()) {
        return Err("counts: sequences must be non-empty and of equal length".into());
    }
    if counts.iter().flatten().any(|&c| c == 0) {
        return Err("counts: every fork count must be at least 1".into());
    }
    let labels = (0..counts.len()).map(growing_label).collect();
    let space = growing_space_from_counts("growing", labels, &counts).map_err(|e| e.to_string())?;
    let mut out: Value = serde_json::to_value(&space).map_err(|e| e.to_string())?;
    out["check"] = serde_json::to_value(SpaceCheck::of(&space)).map_err(|e| e.to_string())?;
    Ok(out.to_string())
}

/// Full verification report for a scenario, proxies bound to genesis.
pub fn verify_json(scenario: &str, seed: &str) -> Result<String, String> {
    let (_, growing) = load(scenario, seed)?;
    let report = verify(&growing, ProxyBinding::Genesis).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn simulate(scenario: &str, seed: &str) -> Result<String, JsValue> {
    simulate_json(scenario, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn growing_space(counts: &str) -> Result<String, JsValue> {
    growing_json(counts).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = verify)]
pub fn verify_scenario(scenario: &str, seed: &str) -> Result<String, JsValue> {
    verify_json(scenario, seed).map_err(|e| JsValue::from_str(&e))
}
