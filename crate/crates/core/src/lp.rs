//! Dense two-phase simplex over exact rationals.
//!
//! Problems are in standard equality form `A x = b, x >= 0`. Pivoting uses
//! Bland's smallest-index rule, so runs are deterministic and terminate.
//! Infeasible systems come back with a Farkas certificate `y` satisfying
//! `y·A_j <= 0` for every column and `y·b > 0`, which anyone can re-check
//! with [`FarkasCertificate::verify`].

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::rational::{self, Q};

/// Proof that `A x = b, x >= 0` has no solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarkasCertificate {
    #[serde(with = "rational::serde_q_vec")]
    pub y: Vec<Q>,
}

impl FarkasCertificate {
    /// Exact re-check of the certificate against the original system.
    pub fn verify(&self, a: &[Vec<Q>], b: &[Q]) -> bool {
        if self.y.len() != a.len() || b.len() != a.len() {
            return false;
        }
        let columns = a.first().map_or(0, Vec::len);
        let columns_ok = (0..columns).all(|j| {
            let dot: Q = a.iter().zip(&self.y).map(|(row, y)| &row[j] * y).sum();
            !dot.is_positive()
        });
        let rhs: Q = b.iter().zip(&self.y).map(|(bi, y)| bi * y).sum();
        columns_ok && rhs.is_positive()
    }

    /// `y·b`, the amount by which the data overshoots the bound 0.
    pub fn violation(&self, b: &[Q]) -> Q {
        b.iter().zip(&self.y).map(|(bi, y)| bi * y).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible(FarkasCertificate),
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    reduced: Vec<Q>,
    value: Q,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let piv = self.rows[r][col].clone();
        if piv != rational::one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
            self.rhs[r] /= &piv;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.reduced[col].clone();
        if !factor.is_zero() {
            for (d, p) in self.reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *d -= &factor * p;
                }
            }
            self.value += &factor * &pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Runs Bland-rule iterations over columns `< allowed`. Returns false
    /// on an unbounded direction.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.reduced[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b, x >= 0`.
pub fn minimize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert_eq!(b.len(), m);
    debug_assert!(a.iter().all(|row| row.len() == n));

    // Phase I: artificial basis, rows sign-adjusted so that b >= 0.
    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Q> = Vec::with_capacity(n + m);
        for v in &a[i] {
            row.push(if signs[i] { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { rational::one() } else { rational::zero() });
        }
        rows.push(row);
        rhs.push(if signs[i] { -b[i].clone() } else { b[i].clone() });
    }
    let mut reduced = vec![rational::zero(); n + m];
    for j in 0..n {
        reduced[j] = -rows.iter().map(|row| row[j].clone()).sum::<Q>();
    }
    let value: Q = rhs.iter().cloned().sum();
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
        reduced,
        value,
    };
    let bounded = t.optimize(n);
    debug_assert!(bounded, "phase I objective is bounded below by zero");

    if t.value.is_positive() {
        let y = (0..m)
            .map(|i| {
                let yi = rational::one() - &t.reduced[n + i];
                if signs[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        return LpOutcome::Infeasible(FarkasCertificate { y });
    }

    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and stay inert.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, col);
            }
        }
    }

    // Phase II.
    let cost = |j: usize| if j < n { c[j].clone() } else { rational::zero() };
    t.reduced = (0..n + m)
        .map(|j| {
            let cb: Q = (0..m).map(|i| cost(t.basis[i]) * &t.rows[i][j]).sum();
            cost(j) - cb
        })
        .collect();
    t.value = (0..m).map(|i| cost(t.basis[i]) * &t.rhs[i]).sum();
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![rational::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs[i].clone();
        }
    }
    LpOutcome::Optimal { x, value: t.value }
}

/// Finds a point of `A x = b, x >= 0` or a Farkas certificate.
pub fn feasible_point(a: &[Vec<Q>], b: &[Q]) -> Result<Vec<Q>, FarkasCertificate> {
    let n = a.first().map_or(0, Vec::len);
    match minimize(a, b, &vec![rational::zero(); n]) {
        LpOutcome::Optimal { x, .. } => Ok(x),
        LpOutcome::Infeasible(cert) => Err(cert),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}
