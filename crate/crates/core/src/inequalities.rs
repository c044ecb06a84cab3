//! The four KS inequalities, the four noncontextuality (NC) inequalities
//! that trade anticorrelation against predictability, and outcome
//! relabellings.
//!
//! With `w_ij` the anticorrelation of pair (ij):
//!
//! | form | KS bound | NC bound  |
//! |------|----------|-----------|
//! | `R3 = w12 + w23 + w13` | 2 | `3 - η0` |
//! | `R0 = w12 - w23 - w13` | 0 | `1 - η0` |
//! | `R1 = w23 - w13 - w12` | 0 | `1 - η0` |
//! | `R2 = w13 - w12 - w23` | 0 | `1 - η0` |
//!
//! Violations are strict: a point on a bound violates nothing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};
use crate::scenario::{outcome_index, validate, CorrelationVector, Measurement, Pair, RawTable, SixParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Inequality {
    R0,
    R1,
    R2,
    R3,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [Inequality::R0, Inequality::R1, Inequality::R2, Inequality::R3];

    /// Signs of `(w12, w23, w13)` in the linear form.
    pub fn coefficients(self) -> [i64; 3] {
        match self {
            Inequality::R0 => [1, -1, -1],
            Inequality::R1 => [-1, 1, -1],
            Inequality::R2 => [-1, -1, 1],
            Inequality::R3 => [1, 1, 1],
        }
    }

    pub fn ks_bound(self) -> Q {
        match self {
            Inequality::R3 => rational::qi(2),
            _ => rational::zero(),
        }
    }

    pub fn nc_bound(self, eta0: &Predictability) -> Q {
        let base = match self {
            Inequality::R3 => rational::qi(3),
            _ => rational::one(),
        };
        base - eta0.value()
    }

    /// The measurement whose relabelling maps this inequality onto `R3`
    /// (`None` for `R3` itself).
    pub fn relabelling(self) -> Option<Measurement> {
        match self {
            Inequality::R0 => Some(Measurement::M3),
            Inequality::R1 => Some(Measurement::M1),
            Inequality::R2 => Some(Measurement::M2),
            Inequality::R3 => None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "R0" | "r0" | "0" => Ok(Inequality::R0),
            "R1" | "r1" | "1" => Ok(Inequality::R1),
            "R2" | "r2" | "2" => Ok(Inequality::R2),
            "R3" | "r3" | "3" => Ok(Inequality::R3),
            other => Err(Error::Parse(format!("unknown inequality {other:?}"))),
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[allow(non_snake_case)]
pub struct RValues {
    #[serde(with = "rational::serde_q")]
    pub R0: Q,
    #[serde(with = "rational::serde_q")]
    pub R1: Q,
    #[serde(with = "rational::serde_q")]
    pub R2: Q,
    #[serde(with = "rational::serde_q")]
    pub R3: Q,
}

impl RValues {
    pub fn get(&self, which: Inequality) -> &Q {
        match which {
            Inequality::R0 => &self.R0,
            Inequality::R1 => &self.R1,
            Inequality::R2 => &self.R2,
            Inequality::R3 => &self.R3,
        }
    }
}

/// Sharpness-style predictability `η0 ∈ [0, 1]` shared by all three measurements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Predictability(#[serde(with = "rational::serde_q")] Q);

impl Predictability {
    pub fn new(eta0: Q) -> Result<Self> {
        if eta0 < rational::zero() || eta0 > rational::one() {
            return Err(Error::Parse(format!(
                "predictability {} outside [0, 1]",
                rational::to_text(&eta0)
            )));
        }
        Ok(Predictability(eta0))
    }

    pub fn value(&self) -> &Q {
        &self.0
    }
}

fn linear_form(which: Inequality, w: [&Q; 3]) -> Q {
    which
        .coefficients()
        .iter()
        .zip(w)
        .map(|(&c, wi)| rational::qi(c) * wi)
        .sum()
}

pub fn evaluate(six: &SixParams) -> RValues {
    let w = [&six.w12, &six.w23, &six.w13];
    RValues {
        R0: linear_form(Inequality::R0, w),
        R1: linear_form(Inequality::R1, w),
        R2: linear_form(Inequality::R2, w),
        R3: linear_form(Inequality::R3, w),
    }
}

/// KS inequalities violated strictly.
pub fn check_ks(r: &RValues) -> Vec<Inequality> {
    Inequality::ALL
        .into_iter()
        .filter(|&i| *r.get(i) > i.ks_bound())
        .collect()
}

/// NC inequalities violated strictly for predictability `eta0`.
pub fn check_nc(r: &RValues, eta0: &Predictability) -> Vec<Inequality> {
    Inequality::ALL
        .into_iter()
        .filter(|&i| *r.get(i) > i.nc_bound(eta0))
        .collect()
}

/// Swaps the outcomes 0 and 1 of measurement `m` in every pair containing it.
pub fn relabel(cv: &CorrelationVector, m: Measurement) -> CorrelationVector {
    let mut raw: RawTable = cv.entries().clone();
    for pair in Pair::ALL {
        if !pair.contains(m) {
            continue;
        }
        let (first, _) = pair.measurements();
        let old = cv.pair(pair);
        for xi in 0..2u8 {
            for xj in 0..2u8 {
                let (yi, yj) = if first == m { (1 - xi, xj) } else { (xi, 1 - xj) };
                raw[pair.index()][outcome_index(yi, yj)] = old[outcome_index(xi, xj)].clone();
            }
        }
    }
    validate(raw).expect("relabelling preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::vertices;
    use crate::rational::{q, qi};
    use crate::scenario::to_six_params;

    fn r_of(id: usize) -> RValues {
        evaluate(&to_six_params(&vertices()[id].cv))
    }

    #[test]
    fn r_values_of_vertices() {
        let r11 = r_of(11);
        assert_eq!((r11.R3.clone(), r11.R0.clone(), r11.R1.clone(), r11.R2.clone()), (qi(3), qi(-1), qi(-1), qi(-1)));
        let r8 = r_of(8);
        assert_eq!((r8.R0.clone(), r8.R3.clone(), r8.R1.clone(), r8.R2.clone()), (qi(1), qi(1), qi(-1), qi(-1)));
        let r0 = r_of(0);
        assert!(Inequality::ALL.iter().all(|&i| *r0.get(i) == qi(0)));
    }

    #[test]
    fn ks_checks() {
        assert_eq!(check_ks(&r_of(10)), vec![Inequality::R2]);
        assert_eq!(check_ks(&r_of(11)), vec![Inequality::R3]);
        let h = q(1, 2);
        let uniform = SixParams::new([h.clone(), h.clone(), h.clone()], [h.clone(), h.clone(), h]);
        assert!(check_ks(&evaluate(&uniform)).is_empty());
    }

    #[test]
    fn nc_checks() {
        let zero = Predictability::new(qi(0)).unwrap();
        assert!(check_nc(&r_of(11), &zero).is_empty());
        let half = Predictability::new(q(1, 2)).unwrap();
        assert_eq!(check_nc(&r_of(11), &half), vec![Inequality::R3]);
        let one = Predictability::new(qi(1)).unwrap();
        for id in 0..12 {
            assert_eq!(check_nc(&r_of(id), &one), check_ks(&r_of(id)));
        }
        assert!(Predictability::new(q(3, 2)).is_err());
    }

    #[test]
    fn relabel_maps_indeterministic_vertices() {
        let v = vertices();
        assert_eq!(relabel(&v[8].cv, Measurement::M3), v[11].cv);
        assert_eq!(relabel(&v[9].cv, Measurement::M1), v[11].cv);
        assert_eq!(relabel(&v[10].cv, Measurement::M2), v[11].cv);
        for vertex in v {
            for m in Measurement::ALL {
                assert_eq!(relabel(&relabel(&vertex.cv, m), m), vertex.cv);
            }
        }
    }

    #[test]
    fn relabel_shifts_r_values() {
        for vertex in vertices() {
            let r = evaluate(&to_six_params(&vertex.cv));
            for which in [Inequality::R0, Inequality::R1, Inequality::R2] {
                let m = which.relabelling().unwrap();
                let r_flipped = evaluate(&to_six_params(&relabel(&vertex.cv, m)));
                assert_eq!(r_flipped.R3, r.get(which) + qi(2));
            }
        }
    }
}
