//! Log-barrier interior-point method for tiny second-order cone programs.
//!
//! A 2x2 Hermitian matrix `(a I + m·σ)/2` is PSD iff `a >= |m|`, so every
//! qubit PSD constraint is a Lorentz cone on its Bloch coordinates. The
//! problems solved here have a handful of variables and four cones; dense
//! Newton steps are cheap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `A x + o` must lie in `{(a, m) : a >= |m|}`.
#[derive(Clone, Debug)]
pub(crate) struct Cone {
    pub a: DMatrix<f64>,
    pub o: DVector<f64>,
}

impl Cone {
    fn point(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.o
    }

    /// `a - |m|`, the smallest eigenvalue scale of the encoded matrix.
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        let v = self.point(x);
        v[0] - v.rows(1, v.len() - 1).norm()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub cones: Vec<Cone>,
    /// Maximize `c·x`.
    pub c: DVector<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub x: DVector<f64>,
    pub iterations: usize,
}

pub(crate) const MAX_NEWTON_ITERATIONS: usize = 2000;
const MAX_CENTERING_STEPS: usize = 20;

/// Barrier value, gradient and Hessian of `-t c·x - Σ log(a² - |m|²)`;
/// `None` outside the cone interiors.
fn barrier(p: &Problem, t: f64, x: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
    let n = x.len();
    let mut f = -t * p.c.dot(x);
    let mut g = -t * &p.c;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for cone in &p.cones {
        let v = cone.point(x);
        let m2 = v.rows(1, v.len() - 1).norm_squared();
        let u = v[0] * v[0] - m2;
        if v[0] <= 0.0 || u <= 0.0 || !u.is_finite() {
            return None;
        }
        f -= u.ln();
        // J v with J = diag(1, -1, -1, -1).
        let mut jv = -v.clone();
        jv[0] = v[0];
        let gv = &jv * (2.0 / u);
        g -= cone.a.transpose() * &gv;
        let mut hv = &jv * jv.transpose() * (4.0 / (u * u));
        for i in 0..v.len() {
            let jii = if i == 0 { 1.0 } else { -1.0 };
            hv[(i, i)] -= 2.0 * jii / u;
        }
        h += cone.a.transpose() * hv * &cone.a;
    }
    Some((f, g, h))
}

fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(&(-g)));
    }
    h.clone().lu().solve(&(-g))
}

/// Path-following from a strictly feasible `x0` until the duality-gap bound
/// `ν / t` drops below `gap`. `stop` may end the run early.
pub(crate) fn maximize(
    p: &Problem,
    x0: DVector<f64>,
    gap: f64,
    stop: impl Fn(&DVector<f64>) -> bool,
) -> Result<Solution> {
    let nu = 2.0 * p.cones.len() as f64;
    let mut x = x0;
    let mut t = 1.0;
    let mut iterations = 0;
    loop {
        // Centering. Near the boundary roundoff can keep the decrement from
        // vanishing; a bounded number of steps is then treated as centered.
        for _ in 0..MAX_CENTERING_STEPS {
            let Some((f, g, h)) = barrier(p, t, &x) else {
                return Err(Error::Internal("iterate left the cone interior".into()));
            };
            let Some(dx) = newton_direction(&g, &h) else {
                return Err(Error::SolverStall { iterations });
            };
            let decrement = -g.dot(&dx);
            if !decrement.is_finite() {
                return Err(Error::SolverStall { iterations });
            }
            if decrement / 2.0 <= 1e-10 {
                break;
            }
            iterations += 1;
            if iterations > MAX_NEWTON_ITERATIONS {
                return Err(Error::SolverStall { iterations });
            }
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-14 {
                let trial = &x + &dx * step;
                if let Some((ft, _, _)) = barrier(p, t, &trial) {
                    if ft <= f - 0.25 * step * decrement {
                        x = trial;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                // Numerically centered.
                break;
            }
        }
        if stop(&x) || nu / t < gap {
            return Ok(Solution { x, iterations });
        }
        t *= 30.0;
    }
}

/// Phase I: maximize `s` with every cone shifted by `s` on its scalar part
/// (i.e. each encoded matrix minus `s·I`). Returns the best `(x, s)` found;
/// stops as soon as `s` exceeds `target`.
pub(crate) fn phase_one(cones: &[Cone], n: usize, target: f64) -> Result<(DVector<f64>, f64, usize)> {
    let x0 = DVector::<f64>::zeros(n);
    let start_margin = cones
        .iter()
        .map(|c| c.margin(&x0))
        .fold(f64::INFINITY, f64::min);
    // Matrix (a I + m·σ)/2 - s I has Bloch scalar a - 2s.
    let s0 = start_margin / 2.0 - 1.0;
    let lifted: Vec<Cone> = cones
        .iter()
        .map(|c| {
            let mut a = DMatrix::<f64>::zeros(c.a.nrows(), n + 1);
            a.view_mut((0, 0), (c.a.nrows(), n)).copy_from(&c.a);
            a[(0, n)] = -2.0;
            Cone { a, o: c.o.clone() }
        })
        .collect();
    let mut c = DVector::<f64>::zeros(n + 1);
    c[n] = 1.0;
    let problem = Problem { cones: lifted, c };
    let mut start = DVector::<f64>::zeros(n + 1);
    start[n] = s0;
    let sol = maximize(&problem, start, 1e-9, |x| x[n] > target)?;
    let s = sol.x[n];
    Ok((sol.x.rows(0, n).into_owned(), s, sol.iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cone_linear_objective() {
        // maximize m_x subject to (1 - 0·x, x, 0, 0) in the cone, i.e. |x| <= 1.
        let a = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 0.0, 0.0]);
        let o = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]);
        let p = Problem {
            cones: vec![Cone { a, o }],
            c: DVector::from_row_slice(&[1.0]),
        };
        let sol = maximize(&p, DVector::from_row_slice(&[0.0]), 1e-10, |_| false).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phase_one_finds_margin() {
        // x in [-1, 1] encoded as cone (1, x): max margin is 1 at x = 0.
        let a = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 0.0, 0.0]);
        let o = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]);
        let (x, s, _) = phase_one(&[Cone { a, o }], 1, f64::INFINITY).unwrap();
        assert!(x[0].abs() < 1e-6);
        assert!((s - 0.5).abs() < 1e-8, "s = {s}");
    }
}
