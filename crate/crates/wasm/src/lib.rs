//! WebAssembly bindings for the browser demo. Every export takes and returns
//! JSON text; failures come back as `{"error": "..."}`.

use nalgebra::Vector3;
use serde_json::{json, Value};
use specker_core::inequalities::{check_ks, check_nc, evaluate, Inequality, Predictability};
use specker_core::marginal::specker_p000_interval;
use specker_core::ontmodel::noncontextual_max_r;
use specker_core::quantum::{lsw_scan, trine, ScanConfig, StateChoice};
use specker_core::rational::{self, Q};
use specker_core::scenario::{correlation_from_json, to_six_params};
use specker_core::Result;
use wasm_bindgen::prelude::wasm_bindgen;

fn respond(result: Result<Value>) -> String {
    match result {
        Ok(value) => value.to_string(),
        Err(e) => json!({"error": e.to_string()}).to_string(),
    }
}

fn names(list: &[Inequality]) -> Value {
    json!(list.iter().map(|i| format!("{i:?}")).collect::<Vec<_>>())
}

/// Evaluates a `{"six": ...}` or `{"pairs": ...}` document against the KS
/// inequalities and the noncontextual bounds at predictability `eta0`.
#[wasm_bindgen]
pub fn check_point(doc: &str, eta0: &str) -> String {
    respond((|| {
        let doc: Value = serde_json::from_str(doc).map_err(|e| specker_core::Error::Parse(e.to_string()))?;
        let cv = correlation_from_json(&doc)?;
        let six = to_six_params(&cv);
        let eta0 = Predictability::new(rational::parse(eta0)?)?;
        let r = evaluate(&six);
        let interval = specker_p000_interval(&six).map(|i| json!([rational::to_text(&i.lo), rational::to_text(&i.hi)]));
        Ok(json!({
            "r_values": r,
            "r_f64": Inequality::ALL.iter().map(|&i| rational::to_f64(r.get(i))).collect::<Vec<_>>(),
            "ks_violations": names(&check_ks(&r)),
            "nc_violations": names(&check_nc(&r, &eta0)),
            "nc_bounds": Inequality::ALL.iter().map(|i| rational::to_f64(&i.nc_bound(&eta0))).collect::<Vec<_>>(),
            "p000_interval": interval,
        }))
    })())
}

/// Noncontextual maxima of `R0..R3` for response functions of sharpness `eta`.
#[wasm_bindgen]
pub fn ontmax(eta: &str) -> String {
    respond((|| {
        let eta: Q = rational::parse(eta)?;
        Predictability::new(eta.clone())?;
        let rows: Vec<Value> = Inequality::ALL
            .iter()
            .map(|&i| {
                let m = noncontextual_max_r(i, &eta);
                json!({"inequality": m.inequality, "value": rational::to_text(&m.value),
                       "value_f64": rational::to_f64(&m.value), "maximizers": m.maximizers})
            })
            .collect();
        Ok(json!(rows))
    })())
}

/// Trine scan over `steps + 1` evenly spaced sharpnesses in `[0, 1]`. With
/// `mixed` the state is fixed to the maximally mixed one; otherwise pure
/// states are searched from a Fibonacci grid of `grid` points.
#[wasm_bindgen]
pub fn lsw_curve(steps: usize, grid: usize, mixed: bool) -> String {
    let steps = steps.clamp(1, 200);
    let state = if mixed {
        StateChoice::Fixed(Vector3::zeros())
    } else {
        StateChoice::Optimize { grid: grid.clamp(4, 256) }
    };
    let config = ScanConfig {
        directions: trine(),
        etas: (0..=steps).map(|k| k as f64 / steps as f64).collect(),
        state,
    };
    let rows: Vec<Value> = lsw_scan(&config)
        .into_iter()
        .map(|r| json!({"eta": r.eta, "feasible": r.feasible, "r3": r.r3, "bound": r.bound, "violated": r.violated}))
        .collect();
    json!(rows).to_string()
}
