//! Unsharp qubit measurements and their pairwise joint measurements.
//!
//! A measurement along unit vector `n` with sharpness `η` has effects
//! `E_x = I/2 + (-1)^x (η/2) n·σ`, i.e. `η Π_x + (1 - η) I/2`. Its
//! predictability (best achievable `2 max_x p(x) - 1`) equals `η`.
//!
//! Joint POVMs for a pair are found by a small conic program over the
//! Bloch coordinates of `G_00`; the other three effects are fixed by the
//! marginal constraints. This layer is floating point. Statistics crossing
//! into the exact modules are snapped to rationals and re-validated.

mod conic;
pub mod scan;

use nalgebra::{DVector, Matrix2, Vector3};
type Complex64 = nalgebra::Complex<f64>;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational;
use crate::scenario::{from_six_params, CorrelationVector, Measurement, Pair, SixParams};

pub use scan::{lsw_scan, ScanConfig, ScanRow, StateChoice};

pub type Matrix = Matrix2<Complex64>;

/// Tolerance for Hermiticity, PSD and unit-trace checks.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Tolerance for agreement of shared marginals between joint POVMs.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(a I + m·σ) / 2`.
pub fn from_bloch(a: f64, m: &Vector3<f64>) -> Matrix {
    Matrix::new(
        c((a + m.z) / 2.0),
        Complex64::new(m.x / 2.0, -m.y / 2.0),
        Complex64::new(m.x / 2.0, m.y / 2.0),
        c((a - m.z) / 2.0),
    )
}

/// Inverse of [`from_bloch`] for a Hermitian matrix: `(Tr M, Tr(M σ))`.
pub fn to_bloch(mat: &Matrix) -> (f64, Vector3<f64>) {
    let a = (mat[(0, 0)] + mat[(1, 1)]).re;
    let mx = (mat[(0, 1)] + mat[(1, 0)]).re;
    let my = (mat[(1, 0)] - mat[(0, 1)]).im;
    let mz = (mat[(0, 0)] - mat[(1, 1)]).re;
    (a, Vector3::new(mx, my, mz))
}

fn hermitian_defect(mat: &Matrix) -> f64 {
    (mat - mat.adjoint()).norm()
}

/// Eigenvalues (ascending) of a Hermitian 2x2 matrix.
pub fn eigenvalues(mat: &Matrix) -> [f64; 2] {
    let eig = mat.symmetric_eigen();
    let (a, b) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    rho: Matrix,
}

impl QubitState {
    pub fn new(rho: Matrix) -> Result<Self> {
        if hermitian_defect(&rho) > PSD_TOLERANCE {
            return Err(Error::InvalidQuantum("density matrix is not Hermitian".into()));
        }
        if ((rho[(0, 0)] + rho[(1, 1)]).re - 1.0).abs() > PSD_TOLERANCE {
            return Err(Error::InvalidQuantum("density matrix trace is not 1".into()));
        }
        if eigenvalues(&rho)[0] < -1e-12 {
            return Err(Error::InvalidQuantum("density matrix is not PSD".into()));
        }
        Ok(QubitState { rho })
    }

    pub fn from_bloch(r: Vector3<f64>) -> Result<Self> {
        if r.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidQuantum(format!("Bloch vector has norm {} > 1", r.norm())));
        }
        QubitState::new(from_bloch(1.0, &r))
    }

    pub fn maximally_mixed() -> Self {
        QubitState { rho: Matrix::identity() * c(0.5) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn bloch(&self) -> Vector3<f64> {
        to_bloch(&self.rho).1
    }

    /// `Tr(ρ M)` (real part; `M` Hermitian).
    pub fn expectation(&self, m: &Matrix) -> f64 {
        (self.rho * m).trace().re
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnsharpMeasurement {
    direction: [f64; 3],
    eta: f64,
}

impl UnsharpMeasurement {
    pub fn new(direction: Vector3<f64>, eta: f64) -> Result<Self> {
        if (direction.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidQuantum(format!(
                "direction has norm {}, expected 1",
                direction.norm()
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidQuantum(format!("sharpness {eta} outside [0, 1]")));
        }
        Ok(UnsharpMeasurement { direction: [direction.x, direction.y, direction.z], eta })
    }

    pub fn direction(&self) -> Vector3<f64> {
        Vector3::from(self.direction)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Bloch form `(1, η (-1)^x n)` of effect `x`.
    fn effect_bloch(&self, outcome: u8) -> (f64, Vector3<f64>) {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        (1.0, self.direction() * (sign * self.eta))
    }

    /// Same axis with outcomes swapped.
    pub fn flipped(&self) -> Self {
        UnsharpMeasurement {
            direction: self.direction.map(|v| -v),
            eta: self.eta,
        }
    }
}

/// `E_x = η Π_x + (1 - η) I/2`.
pub fn effect(m: &UnsharpMeasurement, outcome: u8) -> Matrix {
    let (a, v) = m.effect_bloch(outcome);
    from_bloch(a, &v)
}

/// `2 λ_max(E_0) - 1`, from an eigendecomposition.
pub fn predictability(m: &UnsharpMeasurement) -> f64 {
    let e0 = effect(m, 0);
    let e1 = effect(m, 1);
    let best = eigenvalues(&e0)[1].max(eigenvalues(&e1)[1]);
    2.0 * best - 1.0
}

/// Eigenstate of `E_0` with the largest eigenvalue: the pure state along `n`.
pub fn maximizing_preparation(m: &UnsharpMeasurement) -> QubitState {
    QubitState::from_bloch(m.direction()).expect("unit direction")
}

/// Four effects `G_xy` (indexed `2x + y`) of a joint measurement of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPovm {
    pub effects: [Matrix; 4],
}

impl JointPovm {
    pub fn effect(&self, x: u8, y: u8) -> &Matrix {
        &self.effects[2 * x as usize + y as usize]
    }

    /// `G_00 + G_01`, the first measurement's outcome-0 effect.
    pub fn first_marginal(&self) -> Matrix {
        self.effects[0] + self.effects[1]
    }

    /// `G_00 + G_10`.
    pub fn second_marginal(&self) -> Matrix {
        self.effects[0] + self.effects[2]
    }

    /// Smallest eigenvalue over the four effects.
    pub fn min_eigenvalue(&self) -> f64 {
        self.effects
            .iter()
            .map(|g| eigenvalues(g)[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// PSD effects summing to the identity with marginals `E^i_0`, `E^j_0`.
    pub fn check(&self, mi: &UnsharpMeasurement, mj: &UnsharpMeasurement) -> Result<()> {
        if self.effects.iter().any(|g| hermitian_defect(g) > PSD_TOLERANCE) {
            return Err(Error::InvalidQuantum("joint effect is not Hermitian".into()));
        }
        let low = self.min_eigenvalue();
        if low < -PSD_TOLERANCE {
            return Err(Error::InvalidQuantum(format!("joint effect has eigenvalue {low:e}")));
        }
        let total: Matrix = self.effects.iter().sum();
        if (total - Matrix::identity()).norm() > PSD_TOLERANCE {
            return Err(Error::InvalidQuantum("joint effects do not sum to the identity".into()));
        }
        if (self.first_marginal() - effect(mi, 0)).norm() > MARGINAL_TOLERANCE
            || (self.second_marginal() - effect(mj, 0)).norm() > MARGINAL_TOLERANCE
        {
            return Err(Error::InvalidQuantum("joint POVM has the wrong marginals".into()));
        }
        Ok(())
    }

    /// Swaps the outcomes of the first (`first = true`) or second measurement.
    pub fn relabel(&self, first: bool) -> JointPovm {
        let [g00, g01, g10, g11] = self.effects;
        JointPovm {
            effects: if first { [g10, g11, g00, g01] } else { [g01, g00, g11, g10] },
        }
    }

    /// `Tr[ρ (G_01 + G_10)]`.
    pub fn anticorrelation(&self, state: &QubitState) -> f64 {
        state.expectation(&(self.effects[1] + self.effects[2]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxAnticorrelation,
    MaxCorrelation,
    Feasibility,
}

#[derive(Clone, Debug)]
pub struct JointSolution {
    pub povm: JointPovm,
    /// `Tr[ρ(G_01+G_10)]` for anticorrelation, `Tr[ρ(G_00+G_11)]` for
    /// correlation, the PSD margin for feasibility.
    pub value: f64,
    /// Largest `s` with every `G_xy - s I` PSD (negative: incompatible).
    pub margin: f64,
    pub iterations: usize,
}

/// Margin below which a pair is declared not jointly measurable.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

fn cones_for(mi: &UnsharpMeasurement, mj: &UnsharpMeasurement) -> Vec<conic::Cone> {
    use nalgebra::DMatrix;
    let (ci, bi) = mi.effect_bloch(0);
    let (cj, bj) = mj.effect_bloch(0);
    let plus = DMatrix::<f64>::identity(4, 4);
    let minus = -DMatrix::<f64>::identity(4, 4);
    let vec4 = |a: f64, m: Vector3<f64>| DVector::from_row_slice(&[a, m.x, m.y, m.z]);
    vec![
        conic::Cone { a: plus.clone(), o: vec4(0.0, Vector3::zeros()) },
        conic::Cone { a: minus.clone(), o: vec4(ci, bi) },
        conic::Cone { a: minus, o: vec4(cj, bj) },
        conic::Cone { a: plus, o: vec4(2.0 - ci - cj, -bi - bj) },
    ]
}

fn povm_from_g00(mi: &UnsharpMeasurement, mj: &UnsharpMeasurement, x: &DVector<f64>) -> JointPovm {
    let g00 = from_bloch(x[0], &Vector3::new(x[1], x[2], x[3]));
    let ei = effect(mi, 0);
    let ej = effect(mj, 0);
    JointPovm {
        effects: [g00, ei - g00, ej - g00, Matrix::identity() - ei - ej + g00],
    }
}

/// Finds a joint POVM for `(mi, mj)`, optimizing the chosen objective for
/// state `rho`.
pub fn optimize_joint_povm(
    mi: &UnsharpMeasurement,
    mj: &UnsharpMeasurement,
    rho: &QubitState,
    objective: Objective,
) -> Result<JointSolution> {
    let cones = cones_for(mi, mj);
    let stop_at = if objective == Objective::Feasibility { f64::INFINITY } else { 1e-7 };
    let (x1, margin, it1) = conic::phase_one(&cones, 4, stop_at)?;
    if margin < -FEASIBILITY_TOLERANCE {
        return Err(Error::NotJointlyMeasurable { margin });
    }
    let r = rho.bloch();
    let direction = DVector::from_row_slice(&[1.0, r.x, r.y, r.z]);
    let (x, iterations) = match objective {
        Objective::Feasibility => (x1, it1),
        _ if margin <= 0.0 => (x1, it1),
        _ => {
            // Tr ρ(G01+G10) = const - (a + m·r)/2, Tr ρ(G00+G11) = const + (a + m·r)/2.
            let c = if objective == Objective::MaxAnticorrelation { -direction } else { direction };
            let problem = conic::Problem { cones: cones.clone(), c };
            let sol = conic::maximize(&problem, x1, 1e-9, |_| false)?;
            (sol.x, it1 + sol.iterations)
        }
    };
    let povm = povm_from_g00(mi, mj, &x);
    let value = match objective {
        Objective::MaxAnticorrelation => povm.anticorrelation(rho),
        Objective::MaxCorrelation => rho.expectation(&(povm.effects[0] + povm.effects[3])),
        Objective::Feasibility => margin,
    };
    let final_margin = cones.iter().map(|c| c.margin(&x) / 2.0).fold(f64::INFINITY, f64::min);
    Ok(JointSolution {
        povm,
        value,
        margin: if objective == Objective::Feasibility { margin } else { final_margin },
        iterations,
    })
}

/// Pairwise statistics from three joint POVMs in pair order (12), (23), (13).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumCorrelation {
    pub table: [[f64; 4]; 3],
}

impl QuantumCorrelation {
    fn marginal(&self, pair: Pair, m: Measurement) -> f64 {
        let t = &self.table[pair.index()];
        if pair.measurements().0 == m {
            t[0] + t[1]
        } else {
            t[0] + t[2]
        }
    }

    /// Largest disagreement of a measurement's marginal across its two pairs.
    pub fn no_disturbance_residual(&self) -> f64 {
        Measurement::ALL
            .iter()
            .map(|&m| {
                let pairs: Vec<Pair> = Pair::ALL.into_iter().filter(|p| p.contains(m)).collect();
                (self.marginal(pairs[0], m) - self.marginal(pairs[1], m)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn anticorrelation(&self, pair: Pair) -> f64 {
        let t = &self.table[pair.index()];
        t[1] + t[2]
    }

    /// `(R0, R1, R2, R3)`.
    pub fn r_values(&self) -> [f64; 4] {
        let (w12, w23, w13) = (
            self.anticorrelation(Pair::P12),
            self.anticorrelation(Pair::P23),
            self.anticorrelation(Pair::P13),
        );
        [w12 - w23 - w13, w23 - w13 - w12, w13 - w12 - w23, w12 + w23 + w13]
    }

    /// Outcome swap of measurement `m` in every pair containing it.
    pub fn relabel(&self, m: Measurement) -> QuantumCorrelation {
        let mut table = self.table;
        for pair in Pair::ALL {
            if !pair.contains(m) {
                continue;
            }
            let t = self.table[pair.index()];
            table[pair.index()] = if pair.measurements().0 == m {
                [t[2], t[3], t[0], t[1]]
            } else {
                [t[1], t[0], t[3], t[2]]
            };
        }
        QuantumCorrelation { table }
    }

    /// Snaps the six parameters to fractions with denominator <= 10^6 and
    /// rebuilds an exactly valid table.
    pub fn to_exact(&self) -> Result<CorrelationVector> {
        let snap = |x: f64| {
            rational::best_approximation(x, rational::SNAP_MAX_DENOMINATOR)
                .ok_or_else(|| Error::InvalidQuantum(format!("cannot snap {x}")))
        };
        let six = SixParams::new(
            [
                snap(self.anticorrelation(Pair::P12))?,
                snap(self.anticorrelation(Pair::P23))?,
                snap(self.anticorrelation(Pair::P13))?,
            ],
            [
                snap(self.marginal(Pair::P12, Measurement::M1))?,
                snap(self.marginal(Pair::P12, Measurement::M2))?,
                snap(self.marginal(Pair::P23, Measurement::M3))?,
            ],
        );
        from_six_params(&six)
    }
}

/// `v[ij][xy] = Tr(ρ G^{ij}_{xy})` for joints in pair order (12), (23), (13).
pub fn correlation_vector(joints: &[JointPovm; 3], rho: &QubitState) -> Result<QuantumCorrelation> {
    // Each measurement's outcome-0 effect as seen from both pairs containing it.
    for m in Measurement::ALL {
        let seen: Vec<Matrix> = Pair::ALL
            .into_iter()
            .filter(|p| p.contains(m))
            .map(|p| {
                let j = &joints[p.index()];
                if p.measurements().0 == m {
                    j.first_marginal()
                } else {
                    j.second_marginal()
                }
            })
            .collect();
        let deviation = (seen[0] - seen[1]).norm();
        if deviation > MARGINAL_TOLERANCE {
            return Err(Error::MarginalMismatch { measurement: m.index() + 1, deviation });
        }
    }
    let table = [0, 1, 2].map(|p| [0, 1, 2, 3].map(|k| rho.expectation(&joints[p].effects[k])));
    Ok(QuantumCorrelation { table })
}

/// Three coplanar unit vectors 120° apart in the x-z plane.
pub fn trine() -> [Vector3<f64>; 3] {
    [0.0f64, 1.0, 2.0].map(|k| {
        let angle = k * 2.0 * std::f64::consts::PI / 3.0;
        Vector3::new(angle.sin(), 0.0, angle.cos())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Vector3<f64> {
        Vector3::new(0.0, 0.0, 1.0)
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn effect_examples() {
        let sharp = UnsharpMeasurement::new(z(), 1.0).unwrap();
        assert!(close(&effect(&sharp, 0), &Matrix::new(c(1.0), c(0.0), c(0.0), c(0.0)), 1e-15));
        let blind = UnsharpMeasurement::new(z(), 0.0).unwrap();
        for o in 0..2 {
            assert!(close(&effect(&blind, o), &(Matrix::identity() * c(0.5)), 1e-15));
        }
        let half = UnsharpMeasurement::new(z(), 0.5).unwrap();
        assert!(close(&effect(&half, 0), &Matrix::new(c(0.75), c(0.0), c(0.0), c(0.25)), 1e-15));
    }

    #[test]
    fn predictability_examples() {
        for eta in [1.0, 0.3, 0.0] {
            let m = UnsharpMeasurement::new(Vector3::new(0.6, 0.0, 0.8), eta).unwrap();
            assert!((predictability(&m) - eta).abs() < 1e-12);
            let best = maximizing_preparation(&m);
            let p0 = best.expectation(&effect(&m, 0));
            assert!((2.0 * p0 - 1.0 - eta).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_objects() {
        assert!(UnsharpMeasurement::new(Vector3::new(1.0, 1.0, 0.0), 0.5).is_err());
        assert!(UnsharpMeasurement::new(z(), 1.5).is_err());
        assert!(QubitState::from_bloch(Vector3::new(0.0, 0.0, 1.5)).is_err());
    }

    #[test]
    fn bloch_roundtrip() {
        let m = Vector3::new(0.1, -0.2, 0.3);
        let (a, v) = to_bloch(&from_bloch(0.7, &m));
        assert!((a - 0.7).abs() < 1e-15 && (v - m).norm() < 1e-15);
    }

    #[test]
    fn trivial_marginals_reach_full_anticorrelation() {
        let d = trine();
        let mi = UnsharpMeasurement::new(d[0], 0.0).unwrap();
        let mj = UnsharpMeasurement::new(d[1], 0.0).unwrap();
        let sol = optimize_joint_povm(&mi, &mj, &QubitState::maximally_mixed(), Objective::MaxAnticorrelation).unwrap();
        sol.povm.check(&mi, &mj).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-7, "value {}", sol.value);
        let half = Matrix::identity() * c(0.5);
        assert!(close(&sol.povm.effects[1], &half, 1e-6));
        assert!(close(&sol.povm.effects[2], &half, 1e-6));
    }

    #[test]
    fn sharp_trine_pair_is_incompatible() {
        let d = trine();
        let mi = UnsharpMeasurement::new(d[0], 1.0).unwrap();
        let mj = UnsharpMeasurement::new(d[1], 1.0).unwrap();
        let res = optimize_joint_povm(&mi, &mj, &QubitState::maximally_mixed(), Objective::Feasibility);
        assert!(matches!(res, Err(Error::NotJointlyMeasurable { .. })));
    }

    #[test]
    fn same_axis_twice() {
        let rho = QubitState::maximally_mixed();
        for eta in [0.2, 0.5, 0.9, 1.0] {
            let m = UnsharpMeasurement::new(z(), eta).unwrap();
            let corr = optimize_joint_povm(&m, &m, &rho, Objective::MaxCorrelation).unwrap();
            assert!((corr.value - 1.0).abs() < 1e-7);
            assert!(corr.povm.effects[1].norm() < 1e-6 && corr.povm.effects[2].norm() < 1e-6);
            let anti = optimize_joint_povm(&m, &m, &rho, Objective::MaxAnticorrelation).unwrap();
            // Brute force over diagonal G00 = diag(x, y): PSD of all four
            // effects, maximize Tr[(G01 + G10)]/2.
            let e0 = (0.5 + eta / 2.0, 0.5 - eta / 2.0);
            let mut best = f64::NEG_INFINITY;
            let steps = 400;
            for i in 0..=steps {
                for j in 0..=steps {
                    let (x, y) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    let g01 = (e0.0 - x, e0.1 - y);
                    let g11 = (1.0 - 2.0 * e0.0 + x, 1.0 - 2.0 * e0.1 + y);
                    if g01.0 < -1e-12 || g01.1 < -1e-12 || g11.0 < -1e-12 || g11.1 < -1e-12 {
                        continue;
                    }
                    best = best.max(g01.0 + g01.1);
                }
            }
            assert!((best - (1.0 - eta)).abs() < 1e-2);
            assert!((anti.value - (1.0 - eta)).abs() < 1e-7, "eta {eta}: {}", anti.value);
        }
    }

    #[test]
    fn correlation_of_trivial_joints_is_uniform() {
        let d = trine();
        let ms: Vec<UnsharpMeasurement> = d.iter().map(|&n| UnsharpMeasurement::new(n, 0.0).unwrap()).collect();
        let rho = QubitState::maximally_mixed();
        let quarter = Matrix::identity() * c(0.25);
        let trivial = JointPovm { effects: [quarter; 4] };
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            trivial.check(&ms[i], &ms[j]).unwrap();
        }
        let cv = correlation_vector(&[trivial.clone(), trivial.clone(), trivial], &rho).unwrap();
        assert!(cv.table.iter().flatten().all(|&p| (p - 0.25).abs() < 1e-15));
        let exact = cv.to_exact().unwrap();
        assert!(exact.entries().iter().flatten().all(|p| *p == rational::q(1, 4)));
    }

    #[test]
    fn commuting_projective_case_gives_deterministic_vertex() {
        let m = UnsharpMeasurement::new(z(), 1.0).unwrap();
        let rho = QubitState::from_bloch(z()).unwrap();
        let sol = optimize_joint_povm(&m, &m, &rho, Objective::MaxCorrelation).unwrap();
        let joints = [sol.povm.clone(), sol.povm.clone(), sol.povm];
        let exact = correlation_vector(&joints, &rho).unwrap().to_exact().unwrap();
        assert_eq!(exact, crate::polytope::vertices()[0].cv);
        let down = QubitState::from_bloch(-z()).unwrap();
        let exact = correlation_vector(&joints, &down).unwrap().to_exact().unwrap();
        assert_eq!(exact, crate::polytope::vertices()[7].cv);
    }

    #[test]
    fn mismatched_marginals_are_rejected() {
        let d = trine();
        let a = UnsharpMeasurement::new(d[0], 0.3).unwrap();
        let b = UnsharpMeasurement::new(d[1], 0.3).unwrap();
        let rho = QubitState::maximally_mixed();
        let g = optimize_joint_povm(&a, &b, &rho, Objective::Feasibility).unwrap().povm;
        // Pair (23) built from the wrong measurements.
        let res = correlation_vector(&[g.clone(), g.clone(), g], &rho);
        assert!(matches!(res, Err(Error::MarginalMismatch { .. })));
    }
}
