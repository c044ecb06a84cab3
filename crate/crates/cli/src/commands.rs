use std::io::Read;
use std::path::Path;

use nalgebra::Vector3;
use serde_json::{json, Value};
use specker_core::inequalities::{check_ks, check_nc, evaluate, relabel as relabel_cv, Inequality, Predictability};
use specker_core::marginal::{
    deterministic_model_from_joint, find_joint, specker_find_joint, specker_p000_interval, JointSearch,
    MarginalScenario, ScenarioStats,
};
use specker_core::ontmodel::{
    max_anticorrelation_bounds, min_anticorrelation_bounds, model_from_json, model_to_json, noncontextual_max_r,
    noncontextual_max_r_mixed, scenario_from_json, stats_from_json,
};
use specker_core::polytope::{decompose as decompose_cv, in_ks_polytope, is_extremal, vertices as all_vertices};
use specker_core::quantum::{lsw_scan, trine, ScanConfig, ScanRow, StateChoice};
use specker_core::rational::{self, Q};
use specker_core::scenario::{correlation_from_json, to_six_params, CorrelationVector, Measurement};

use crate::report::{Failure, Report, Status};

/// Largest number of sharpness values accepted by `quantum-scan`.
const MAX_SCAN_POINTS: usize = 10_000;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::invalid(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
    };
    log::debug!("read {} bytes from {}", text.len(), path.display());
    serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        kind: "parse",
        message: format!("{}: {e}", path.display()),
    })
}

fn read_correlation(path: &Path) -> Result<CorrelationVector, Failure> {
    Ok(correlation_from_json(&read_json(path)?)?)
}

fn parse_q(text: &str) -> Result<Q, Failure> {
    Ok(rational::parse(text.trim())?)
}

fn texts(values: &[Q]) -> Vec<String> {
    values.iter().map(rational::to_text).collect()
}

fn point_summary(cv: &CorrelationVector) -> Value {
    let six = to_six_params(cv);
    let membership = in_ks_polytope(&six);
    json!({
        "correlation": cv,
        "six": six,
        "r_values": evaluate(&six),
        "ks_violations": check_ks(&evaluate(&six)),
        "ks_member": membership.member,
        "violated_facets": membership.violated,
    })
}

pub fn check(input: &Path, eta0: &[String]) -> Result<Report, Failure> {
    let cv = read_correlation(input)?;
    let etas = eta0
        .iter()
        .map(|t| Ok(Predictability::new(parse_q(t)?)?))
        .collect::<Result<Vec<_>, Failure>>()?;
    let r = evaluate(&to_six_params(&cv));
    let nc: Vec<Value> = etas
        .iter()
        .map(|eta| {
            json!({
                "eta0": rational::to_text(eta.value()),
                "bounds": Inequality::ALL.map(|i| rational::to_text(&i.nc_bound(eta))),
                "violations": check_nc(&r, eta),
            })
        })
        .collect();
    let mut results = point_summary(&cv);
    results["nc"] = json!(nc);
    let inputs = json!({
        "correlation": cv,
        "eta0": etas.iter().map(|e| rational::to_text(e.value())).collect::<Vec<_>>(),
    });
    Ok(Report::ok("check", inputs, results))
}

pub fn vertices() -> Result<Report, Failure> {
    let list: Vec<Value> = all_vertices()
        .iter()
        .map(|v| {
            let six = to_six_params(&v.cv);
            json!({
                "id": v.id,
                "kind": v.kind,
                "assignment": v.assignment(),
                "correlation": v.cv,
                "six": six,
                "ks_violations": check_ks(&evaluate(&six)),
            })
        })
        .collect();
    Ok(Report::ok("vertices", json!({}), json!({ "vertices": list })))
}

pub fn decompose(input: &Path) -> Result<Report, Failure> {
    let cv = read_correlation(input)?;
    let d = decompose_cv(&cv)?;
    let support: Vec<Value> = d
        .support()
        .into_iter()
        .map(|(id, w)| json!({"vertex": id, "weight": rational::to_text(w)}))
        .collect();
    let results = json!({
        "weights": texts(&d.weights),
        "support": support,
        "extremal": is_extremal(&cv),
        "ks_member": in_ks_polytope(&to_six_params(&cv)).member,
    });
    Ok(Report::ok("decompose", json!({ "correlation": cv }), results))
}

pub fn fine(input: &Path) -> Result<Report, Failure> {
    let doc = read_json(input)?;
    let (scenario, stats, specker) = if doc.get("measurements").is_some() {
        let scenario = scenario_from_json(&doc)?;
        let stats = stats_from_json(&scenario, &doc)?;
        let specker = if scenario.is_specker() { Some(stats.to_correlation()?) } else { None };
        (scenario, stats, specker)
    } else {
        let cv = correlation_from_json(&doc)?;
        (MarginalScenario::specker(), ScenarioStats::from_correlation(&cv), Some(cv))
    };
    log::info!("joint outcome space of size {}", scenario.joint_size());
    let search = find_joint(&scenario, &stats)?;
    let mut results = json!({ "search": search });
    if let JointSearch::Feasible { joint } = &search {
        results["model"] = model_to_json(&deterministic_model_from_joint(&scenario, joint)?);
    }
    if let Some(cv) = &specker {
        let six = to_six_params(cv);
        results["p000_interval"] = json!(specker_p000_interval(&six));
        results["closed_form_joint"] = json!(specker_find_joint(&six));
    }
    let inputs = json!({
        "measurements": scenario.measurements(),
        "contexts": scenario.contexts(),
        "stats": stats,
    });
    let status = if search.is_feasible() { Status::Ok } else { Status::Infeasible };
    Ok(Report { command: "fine", inputs, results, status, csv: None })
}

fn inequalities(which: &str) -> Result<Vec<Inequality>, Failure> {
    if which.eq_ignore_ascii_case("all") {
        Ok(Inequality::ALL.to_vec())
    } else {
        Ok(vec![Inequality::parse(which)?])
    }
}

pub fn ontmax(
    eta: Option<&str>,
    which: &str,
    mixed: Option<&[String]>,
    model: Option<&Path>,
) -> Result<Report, Failure> {
    if eta.is_none() && mixed.is_none() && model.is_none() {
        return Err(Failure::invalid("ontmax needs --eta, --mixed or --model"));
    }
    let ineqs = inequalities(which)?;
    let mut inputs = json!({ "inequalities": ineqs });
    let mut results = json!({});
    if let Some(text) = eta {
        let eta = Predictability::new(parse_q(text)?)?.value().clone();
        let (max_lo, max_hi) = max_anticorrelation_bounds(&eta);
        let (min_lo, min_hi) = min_anticorrelation_bounds(&eta);
        inputs["eta"] = json!(rational::to_text(&eta));
        results["maxima"] = json!(ineqs.iter().map(|&i| noncontextual_max_r(i, &eta)).collect::<Vec<_>>());
        results["anticorrelation_bounds"] = json!({
            "maximizing": texts(&[max_lo, max_hi]),
            "minimizing": texts(&[min_lo, min_hi]),
        });
    }
    if let Some(list) = mixed {
        if list.len() != 3 {
            return Err(Failure::invalid(format!("--mixed needs 3 sharpnesses, got {}", list.len())));
        }
        let etas = [0, 1, 2].map(|k| parse_q(&list[k]).and_then(|q| Ok(Predictability::new(q)?.value().clone())));
        let [a, b, c] = etas;
        let etas = [a?, b?, c?];
        inputs["mixed"] = json!(texts(&etas));
        results["mixed_maxima"] =
            json!(ineqs.iter().map(|&i| noncontextual_max_r_mixed(i, &etas)).collect::<Vec<_>>());
    }
    if let Some(path) = model {
        let model = model_from_json(&read_json(path)?)?;
        let mut summary = json!({
            "deterministic": model.is_deterministic(),
            "factorizable": model.is_factorizable(),
            "stats": model.stats(),
        });
        if model.scenario().is_specker() {
            let cv = model.correlation()?;
            summary["r_values"] = json!(evaluate(&to_six_params(&cv)));
            summary["correlation"] = json!(cv);
        }
        inputs["model"] = model_to_json(&model);
        results["model"] = summary;
    }
    Ok(Report::ok("ontmax", inputs, results))
}

pub fn relabel(input: &Path, measurement: &str) -> Result<Report, Failure> {
    let cv = read_correlation(input)?;
    let m = Measurement::parse(measurement)?;
    let flipped = relabel_cv(&cv, m);
    let results = json!({
        "correlation": flipped,
        "r_before": evaluate(&to_six_params(&cv)),
        "r_after": evaluate(&to_six_params(&flipped)),
    });
    Ok(Report::ok("relabel", json!({"correlation": cv, "measurement": m.to_string()}), results))
}

fn parse_directions(arg: &str) -> Result<[Vector3<f64>; 3], Failure> {
    if arg == "trine" {
        return Ok(trine());
    }
    let doc = read_json(Path::new(arg))?;
    let raw: Vec<[f64; 3]> = serde_json::from_value(doc)
        .map_err(|e| Failure::invalid(format!("{arg}: expected three [x, y, z] directions: {e}")))?;
    if raw.len() != 3 {
        return Err(Failure::invalid(format!("{arg}: expected 3 directions, got {}", raw.len())));
    }
    let mut out = [Vector3::zeros(); 3];
    for (slot, v) in out.iter_mut().zip(raw) {
        let v = Vector3::from(v);
        if v.norm() <= 1e-12 {
            return Err(Failure::invalid(format!("{arg}: zero-length direction")));
        }
        *slot = v.normalize();
    }
    Ok(out)
}

fn parse_grid(arg: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = arg.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| Failure::invalid(format!("eta grid {arg:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let [start, stop, step] = nums[..] else {
        return Err(Failure::invalid(format!("eta grid {arg:?} must be start:stop:step")));
    };
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
        return Err(Failure::invalid(format!("eta grid {arg:?} must satisfy 0 <= start <= stop <= 1")));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Failure::invalid(format!("eta grid {arg:?} needs a positive step")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SCAN_POINTS {
        return Err(Failure::invalid(format!("eta grid has {count} points, limit is {MAX_SCAN_POINTS}")));
    }
    Ok((0..count).map(|k| (start + k as f64 * step).min(stop)).collect())
}

fn parse_state(arg: &str, grid: usize) -> Result<StateChoice, Failure> {
    match arg {
        "optimize" => return Ok(StateChoice::Optimize { grid: grid.max(1) }),
        "mixed" => return Ok(StateChoice::Fixed(Vector3::zeros())),
        _ => {}
    }
    let coords = arg
        .strip_prefix("bloch:")
        .ok_or_else(|| Failure::invalid(format!("state {arg:?} must be `mixed`, `optimize` or `bloch:x,y,z`")))?;
    let v = coords
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| Failure::invalid(format!("state {arg:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let [x, y, z] = v[..] else {
        return Err(Failure::invalid(format!("state {arg:?} needs three coordinates")));
    };
    let r = Vector3::new(x, y, z);
    if r.norm() > 1.0 + 1e-12 {
        return Err(Failure::invalid(format!("Bloch vector {arg:?} has norm > 1")));
    }
    Ok(StateChoice::Fixed(r))
}

fn csv_rows(rows: &[ScanRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| Failure { code: 1, kind: "internal", message: e.to_string() };
    w.write_record([
        "eta", "feasible", "r3", "bound", "violated", "r0_m3", "r1_m1", "r2_m2", "state_x", "state_y", "state_z",
    ])
    .map_err(internal)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        let rel = row.relabelled.map(|r| r.map(Some)).unwrap_or([None; 3]);
        let st = row.state.map(|r| r.map(Some)).unwrap_or([None; 3]);
        w.write_record([
            row.eta.to_string(),
            row.feasible.to_string(),
            opt(row.r3),
            row.bound.to_string(),
            row.violated.to_string(),
            opt(rel[0]),
            opt(rel[1]),
            opt(rel[2]),
            opt(st[0]),
            opt(st[1]),
            opt(st[2]),
        ])
        .map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure { code: 1, kind: "internal", message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn quantum_scan(directions: &str, eta_grid: &str, state: &str, grid: usize, csv: bool) -> Result<Report, Failure> {
    let dirs = parse_directions(directions)?;
    let etas = parse_grid(eta_grid)?;
    let choice = parse_state(state, grid)?;
    log::info!("scanning {} sharpness values", etas.len());
    let rows = lsw_scan(&ScanConfig { directions: dirs, etas: etas.clone(), state: choice.clone() });
    if let Some(row) = rows.iter().find(|r| r.error.is_some()) {
        log::warn!("scan error at eta {}: {}", row.eta, row.error.as_deref().unwrap_or(""));
    }
    let violating: Vec<f64> = rows.iter().filter(|r| r.violated).map(|r| r.eta).collect();
    let inputs = json!({
        "directions": dirs.iter().map(|d| [d.x, d.y, d.z]).collect::<Vec<_>>(),
        "etas": etas,
        "state": match &choice {
            StateChoice::Fixed(r) => json!({"bloch": [r.x, r.y, r.z]}),
            StateChoice::Optimize { grid } => json!({"optimize": {"grid": grid}}),
        },
    });
    let csv_text = if csv { Some(csv_rows(&rows)?) } else { None };
    let results = json!({ "rows": rows, "violating_etas": violating });
    Ok(Report { command: "quantum-scan", inputs, results, status: Status::Ok, csv: csv_text })
}

pub fn sample(seed: u64, count: usize) -> Result<Report, Failure> {
    const MAX_SAMPLES: usize = 100_000;
    if count > MAX_SAMPLES {
        return Err(Failure::invalid(format!("count {count} exceeds {MAX_SAMPLES}")));
    }
    let points = specker_core::sample::random_points(seed, count)?;
    let points: Vec<Value> = points.iter().map(point_summary).collect();
    let inputs = json!({"generator": "chacha8", "seed": seed, "count": count});
    Ok(Report::ok("sample", inputs, json!({ "points": points })))
}
