//! Sharpness scan for three qubit measurements: for each `η`, find joint
//! measurements of the three pairs that maximize total anticorrelation and
//! compare `R3` with its noncontextual bound `3 - η`.

use nalgebra::Vector3;
use serde::Serialize;

use super::{
    correlation_vector, optimize_joint_povm, to_bloch, JointPovm, Objective, QubitState, UnsharpMeasurement,
};
use crate::error::{Error, Result};
use crate::scenario::{Measurement, Pair};

/// Slack added to the noncontextual bound before a row counts as violating.
pub const VIOLATION_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum StateChoice {
    /// Fixed Bloch vector.
    Fixed(Vector3<f64>),
    /// Search pure states: a Fibonacci grid of this many points followed by
    /// compass refinement of the best one.
    Optimize { grid: usize },
}

impl Default for StateChoice {
    /// The maximally mixed state.
    fn default() -> Self {
        StateChoice::Fixed(Vector3::zeros())
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub directions: [Vector3<f64>; 3],
    pub etas: Vec<f64>,
    pub state: StateChoice,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub eta: f64,
    /// Joint measurability of (12), (23), (13).
    pub pair_feasible: [bool; 3],
    pub feasible: bool,
    pub r3: Option<f64>,
    pub bound: f64,
    pub violated: bool,
    /// `R0, R1, R2` of the statistics after relabelling M3, M1, M2.
    pub relabelled: Option<[f64; 3]>,
    pub relabelled_bound: f64,
    pub state: Option<[f64; 3]>,
    /// Bloch coordinates `(a, m)` of `G_00..G_11` for each pair.
    pub joints: Option<Vec<[[f64; 4]; 4]>>,
    pub correlation: Option<[[f64; 4]; 3]>,
    pub error: Option<String>,
}

struct Evaluation {
    r3: f64,
    joints: [JointPovm; 3],
}

fn evaluate(ms: &[UnsharpMeasurement; 3], state: &QubitState) -> Result<Evaluation> {
    let mut joints = Vec::with_capacity(3);
    for pair in Pair::ALL {
        let (i, j) = pair.measurements();
        let sol = optimize_joint_povm(&ms[i.index()], &ms[j.index()], state, Objective::MaxAnticorrelation)?;
        joints.push(sol.povm);
    }
    let joints: [JointPovm; 3] = joints.try_into().expect("three pairs");
    let r3 = joints.iter().map(|g| g.anticorrelation(state)).sum();
    Ok(Evaluation { r3, joints })
}

fn spherical(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

fn search_state(ms: &[UnsharpMeasurement; 3], grid: usize) -> Result<(Vector3<f64>, Evaluation)> {
    let score = |r: Vector3<f64>| -> Result<Evaluation> { evaluate(ms, &QubitState::from_bloch(r.normalize())?) };
    let mut best: Option<(Vector3<f64>, Evaluation)> = None;
    for r in fibonacci_sphere(grid.max(1)) {
        let e = score(r)?;
        if best.as_ref().is_none_or(|(_, b)| e.r3 > b.r3) {
            best = Some((r, e));
        }
    }
    let (mut r, mut current) = best.expect("non-empty grid");
    let (mut theta, mut phi) = (r.z.clamp(-1.0, 1.0).acos(), r.y.atan2(r.x));
    let mut step = 0.5;
    while step > 1e-4 {
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let candidate = spherical(theta + dt, phi + dp);
            let e = score(candidate)?;
            if e.r3 > current.r3 + 1e-13 {
                theta += dt;
                phi += dp;
                r = candidate;
                current = e;
                improved = true;
                break;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok((r, current))
}

fn scan_row(directions: &[Vector3<f64>; 3], eta: f64, choice: &StateChoice) -> ScanRow {
    let mut row = ScanRow {
        eta,
        pair_feasible: [false; 3],
        feasible: false,
        r3: None,
        bound: 3.0 - eta,
        violated: false,
        relabelled: None,
        relabelled_bound: 1.0 - eta,
        state: None,
        joints: None,
        correlation: None,
        error: None,
    };
    if let Err(e) = fill_row(&mut row, directions, choice) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(row: &mut ScanRow, directions: &[Vector3<f64>; 3], choice: &StateChoice) -> Result<()> {
    let ms = [0, 1, 2].map(|k| UnsharpMeasurement::new(directions[k], row.eta));
    let ms: [UnsharpMeasurement; 3] = match ms {
        [Ok(a), Ok(b), Ok(c)] => [a, b, c],
        [a, b, c] => {
            return Err([a, b, c].into_iter().find_map(|r| r.err()).expect("one error"));
        }
    };
    let mixed = QubitState::maximally_mixed();
    for pair in Pair::ALL {
        let (i, j) = pair.measurements();
        row.pair_feasible[pair.index()] =
            match optimize_joint_povm(&ms[i.index()], &ms[j.index()], &mixed, Objective::Feasibility) {
                Ok(_) => true,
                Err(Error::NotJointlyMeasurable { .. }) => false,
                Err(e) => return Err(e),
            };
    }
    row.feasible = row.pair_feasible.iter().all(|&f| f);
    if !row.feasible {
        return Ok(());
    }
    let (r, eval) = match choice {
        StateChoice::Fixed(r) => (*r, evaluate(&ms, &QubitState::from_bloch(*r)?)?),
        StateChoice::Optimize { grid } => search_state(&ms, *grid)?,
    };
    let state = QubitState::from_bloch(r)?;
    let corr = correlation_vector(&eval.joints, &state)?;
    let [.., r3] = corr.r_values();
    row.r3 = Some(r3);
    row.violated = r3 > row.bound + VIOLATION_SLACK;
    let flips = [Measurement::M3, Measurement::M1, Measurement::M2];
    row.relabelled = Some([0, 1, 2].map(|k| corr.relabel(flips[k]).r_values()[k]));
    row.state = Some([r.x, r.y, r.z]);
    row.joints = Some(
        eval.joints
            .iter()
            .map(|g| {
                g.effects.map(|e| {
                    let (a, m) = to_bloch(&e);
                    [a, m.x, m.y, m.z]
                })
            })
            .collect(),
    );
    row.correlation = Some(corr.table);
    Ok(())
}

/// One row per sharpness value, in input order.
pub fn lsw_scan(config: &ScanConfig) -> Vec<ScanRow> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        config
            .etas
            .par_iter()
            .map(|&eta| scan_row(&config.directions, eta, &config.state))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        config
            .etas
            .iter()
            .map(|&eta| scan_row(&config.directions, eta, &config.state))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::trine;

    #[test]
    fn maximally_mixed_state_does_not_violate() {
        let config = ScanConfig {
            directions: trine(),
            etas: vec![0.3, 0.6],
            state: StateChoice::Fixed(Vector3::zeros()),
        };
        for row in lsw_scan(&config) {
            assert!(row.feasible && row.error.is_none());
            assert!(!row.violated);
            let r3 = row.r3.unwrap();
            assert!(r3 <= row.bound, "{r3}");
        }
    }

    #[test]
    fn optimized_state_violates_below_threshold() {
        let config = ScanConfig {
            directions: trine(),
            etas: vec![0.6, 0.9],
            state: StateChoice::Optimize { grid: 24 },
        };
        let rows = lsw_scan(&config);
        assert!(rows[0].feasible && rows[0].violated, "{:?}", rows[0]);
        let rel = rows[0].relabelled.unwrap();
        for v in rel {
            assert!((v - (rows[0].r3.unwrap() - 2.0)).abs() < 1e-9);
            assert!(v > rows[0].relabelled_bound);
        }
        assert!(!rows[1].feasible);
        assert_eq!(rows[1].pair_feasible, [false; 3]);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(10) {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }
}
