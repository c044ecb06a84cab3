//! Specker-scenario statistics: three binary measurements, measured in the
//! pairs (12), (23) and (13).
//!
//! A [`CorrelationVector`] holds the twelve pairwise probabilities and can
//! only be obtained through [`validate`] or [`from_six_params`], so every
//! value of the type satisfies positivity, normalization and no-disturbance.
//! [`SixParams`] is the equivalent description by the three anticorrelation
//! probabilities and the three outcome-0 marginals.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

/// One of the three binary measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measurement {
    M1,
    M2,
    M3,
}

impl Measurement {
    pub const ALL: [Measurement; 3] = [Measurement::M1, Measurement::M2, Measurement::M3];

    /// Zero-based position.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Parses `1`, `2`, `3` or `M1`..`M3`.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().trim_start_matches(['M', 'm']) {
            "1" => Ok(Measurement::M1),
            "2" => Ok(Measurement::M2),
            "3" => Ok(Measurement::M3),
            _ => Err(Error::Parse(format!("unknown measurement {text:?}"))),
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index() + 1)
    }
}

/// A jointly measured pair. Serialization order is always (12), (23), (13).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pair {
    #[serde(rename = "12")]
    P12,
    #[serde(rename = "23")]
    P23,
    #[serde(rename = "13")]
    P13,
}

/// Positivity chain of one pair: `|p_i - p_j| <= w_ij <= p_i + p_j <= 2 - w_ij`.
pub type Chain = Pair;

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P23, Pair::P13];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn measurements(self) -> (Measurement, Measurement) {
        match self {
            Pair::P12 => (Measurement::M1, Measurement::M2),
            Pair::P23 => (Measurement::M2, Measurement::M3),
            Pair::P13 => (Measurement::M1, Measurement::M3),
        }
    }

    pub fn contains(self, m: Measurement) -> bool {
        let (a, b) = self.measurements();
        a == m || b == m
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::P12 => "12",
            Pair::P23 => "23",
            Pair::P13 => "13",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Index of outcome pair `(x_i, x_j)` inside a pair's four entries.
pub fn outcome_index(xi: u8, xj: u8) -> usize {
    2 * xi as usize + xj as usize
}

/// Unvalidated 12-entry table, `[pair][2*x_i + x_j]`.
pub type RawTable = [[Q; 4]; 3];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NegativeEntry {
        pair: Pair,
        outcome: [u8; 2],
        #[serde(with = "rational::serde_q")]
        value: Q,
    },
    NormalizationFailure {
        pair: Pair,
        #[serde(with = "rational::serde_q")]
        sum: Q,
    },
    NoDisturbanceFailure {
        measurement: Measurement,
        first_pair: Pair,
        #[serde(with = "rational::serde_q")]
        first_marginal: Q,
        second_pair: Pair,
        #[serde(with = "rational::serde_q")]
        second_marginal: Q,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeEntry { pair, outcome, value } => write!(
                f,
                "negative entry v{pair}_{}{} = {}",
                outcome[0],
                outcome[1],
                rational::to_text(value)
            ),
            Violation::NormalizationFailure { pair, sum } => {
                write!(f, "pair {pair} sums to {}", rational::to_text(sum))
            }
            Violation::NoDisturbanceFailure {
                measurement,
                first_pair,
                first_marginal,
                second_pair,
                second_marginal,
            } => write!(
                f,
                "p({measurement}=0) is {} from pair {first_pair} but {} from pair {second_pair}",
                rational::to_text(first_marginal),
                rational::to_text(second_marginal)
            ),
        }
    }
}

/// Every constraint a raw table violates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Validated statistics of Specker's scenario for one preparation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CorrelationVector {
    entries: RawTable,
}

/// Marginal `p(X_m = 0)` as read off one pair's table.
fn marginal_from_pair(table: &[Q; 4], pair: Pair, m: Measurement) -> Q {
    let (first, _) = pair.measurements();
    if m == first {
        &table[0] + &table[1]
    } else {
        &table[0] + &table[2]
    }
}

/// Checks positivity, normalization and no-disturbance, reporting every
/// violated constraint.
pub fn validate(raw: RawTable) -> Result<CorrelationVector> {
    let mut violations = Vec::new();
    for pair in Pair::ALL {
        let table = &raw[pair.index()];
        for xi in 0..2u8 {
            for xj in 0..2u8 {
                let v = &table[outcome_index(xi, xj)];
                if v.is_negative() {
                    violations.push(Violation::NegativeEntry {
                        pair,
                        outcome: [xi, xj],
                        value: v.clone(),
                    });
                }
            }
        }
        let sum: Q = table.iter().sum();
        if sum != rational::one() {
            violations.push(Violation::NormalizationFailure { pair, sum });
        }
    }
    for m in Measurement::ALL {
        let pairs: Vec<Pair> = Pair::ALL.into_iter().filter(|p| p.contains(m)).collect();
        let a = marginal_from_pair(&raw[pairs[0].index()], pairs[0], m);
        let b = marginal_from_pair(&raw[pairs[1].index()], pairs[1], m);
        if a != b {
            violations.push(Violation::NoDisturbanceFailure {
                measurement: m,
                first_pair: pairs[0],
                first_marginal: a,
                second_pair: pairs[1],
                second_marginal: b,
            });
        }
    }
    if violations.is_empty() {
        Ok(CorrelationVector { entries: raw })
    } else {
        Err(Error::Validation(ValidationReport { violations }))
    }
}

impl CorrelationVector {
    pub fn entries(&self) -> &RawTable {
        &self.entries
    }

    pub fn into_entries(self) -> RawTable {
        self.entries
    }

    pub fn pair(&self, pair: Pair) -> &[Q; 4] {
        &self.entries[pair.index()]
    }

    /// `p(x_i x_j | M_ij)`.
    pub fn get(&self, pair: Pair, xi: u8, xj: u8) -> &Q {
        &self.entries[pair.index()][outcome_index(xi, xj)]
    }

    /// Probability of different outcomes in the pair.
    pub fn anticorrelation(&self, pair: Pair) -> Q {
        let t = self.pair(pair);
        &t[1] + &t[2]
    }

    /// `p(X_m = 0)`.
    pub fn marginal(&self, m: Measurement) -> Q {
        let pair = Pair::ALL.into_iter().find(|p| p.contains(m)).unwrap();
        marginal_from_pair(self.pair(pair), pair, m)
    }

    /// Convex combination `Σ weights[k] · points[k]`; the result is valid
    /// when the weights are a probability vector.
    pub fn mixture(points: &[&CorrelationVector], weights: &[Q]) -> Result<CorrelationVector> {
        let mut raw: RawTable = Default::default();
        for (cv, w) in points.iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            for (row, src) in raw.iter_mut().zip(&cv.entries) {
                for (entry, x) in row.iter_mut().zip(src) {
                    *entry += w * x;
                }
            }
        }
        validate(raw)
    }

    pub fn to_f64(&self) -> [[f64; 4]; 3] {
        self.entries.each_ref().map(|row| row.each_ref().map(rational::to_f64))
    }
}

/// Anticorrelation probabilities and outcome-0 marginals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SixParams {
    #[serde(with = "rational::serde_q")]
    pub w12: Q,
    #[serde(with = "rational::serde_q")]
    pub w23: Q,
    #[serde(with = "rational::serde_q")]
    pub w13: Q,
    #[serde(with = "rational::serde_q")]
    pub p1: Q,
    #[serde(with = "rational::serde_q")]
    pub p2: Q,
    #[serde(with = "rational::serde_q")]
    pub p3: Q,
}

impl SixParams {
    pub fn new(w: [Q; 3], p: [Q; 3]) -> Self {
        let [w12, w23, w13] = w;
        let [p1, p2, p3] = p;
        SixParams { w12, w23, w13, p1, p2, p3 }
    }

    pub fn w(&self, pair: Pair) -> &Q {
        match pair {
            Pair::P12 => &self.w12,
            Pair::P23 => &self.w23,
            Pair::P13 => &self.w13,
        }
    }

    pub fn p(&self, m: Measurement) -> &Q {
        match m {
            Measurement::M1 => &self.p1,
            Measurement::M2 => &self.p2,
            Measurement::M3 => &self.p3,
        }
    }

    /// The pair's four reconstructed probabilities `(00, 01, 10, 11)`.
    pub fn pair_table(&self, pair: Pair) -> [Q; 4] {
        let (mi, mj) = pair.measurements();
        let (w, pi, pj) = (self.w(pair), self.p(mi), self.p(mj));
        let two = rational::qi(2);
        [
            (pi + pj - w) / &two,
            (w + pi - pj) / &two,
            (w - pi + pj) / &two,
            rational::one() - (w + pi + pj) / &two,
        ]
    }

    /// Chains whose reconstructed entries leave `[0, 1]`.
    pub fn violated_chains(&self) -> Vec<Chain> {
        Pair::ALL
            .into_iter()
            .filter(|&pair| self.pair_table(pair).iter().any(|v| v.is_negative()))
            .collect()
    }

    pub fn to_f64(&self) -> [f64; 6] {
        [&self.w12, &self.w23, &self.w13, &self.p1, &self.p2, &self.p3].map(rational::to_f64)
    }
}

pub fn to_six_params(cv: &CorrelationVector) -> SixParams {
    SixParams::new(
        Pair::ALL.map(|p| cv.anticorrelation(p)),
        Measurement::ALL.map(|m| cv.marginal(m)),
    )
}

/// Rebuilds the unique table with the given anticorrelations and marginals.
pub fn from_six_params(six: &SixParams) -> Result<CorrelationVector> {
    let bad = six.violated_chains();
    if !bad.is_empty() {
        return Err(Error::ChainViolation(bad));
    }
    let raw: RawTable = Pair::ALL.map(|p| six.pair_table(p));
    validate(raw).map_err(|e| Error::Internal(format!("reconstruction failed validation: {e}")))
}

/// Table layout used on the wire: pairs in the fixed order (12), (23), (13).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairsDoc {
    #[serde(rename = "12", with = "rational::serde_q_vec")]
    pub p12: Vec<Q>,
    #[serde(rename = "23", with = "rational::serde_q_vec")]
    pub p23: Vec<Q>,
    #[serde(rename = "13", with = "rational::serde_q_vec")]
    pub p13: Vec<Q>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationDoc {
    pub pairs: PairsDoc,
}

impl From<&CorrelationVector> for CorrelationDoc {
    fn from(cv: &CorrelationVector) -> Self {
        let e = cv.entries();
        CorrelationDoc {
            pairs: PairsDoc {
                p12: e[0].to_vec(),
                p23: e[1].to_vec(),
                p13: e[2].to_vec(),
            },
        }
    }
}

impl Serialize for CorrelationVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CorrelationDoc::from(self).serialize(s)
    }
}

fn four_entries(value: &serde_json::Value, pair: &str) -> Result<[Q; 4]> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("pair {pair:?} must be an array of 4 rationals")))?;
    if arr.len() != 4 {
        return Err(Error::Parse(format!(
            "pair {pair:?} has {} entries, expected 4",
            arr.len()
        )));
    }
    let mut out: [Q; 4] = Default::default();
    for (slot, v) in out.iter_mut().zip(arr) {
        *slot = rational::from_json(v)?;
    }
    Ok(out)
}

/// Reads the raw table of a `{"pairs": ...}` document without validating it.
pub fn raw_table_from_json(doc: &serde_json::Value) -> Result<RawTable> {
    let pairs = doc
        .get("pairs")
        .and_then(|p| p.as_object())
        .ok_or_else(|| Error::Parse("expected an object field \"pairs\"".into()))?;
    let mut raw: RawTable = Default::default();
    for pair in Pair::ALL {
        let v = pairs
            .get(pair.label())
            .ok_or_else(|| Error::Parse(format!("missing pair {:?}", pair.label())))?;
        raw[pair.index()] = four_entries(v, pair.label())?;
    }
    if let Some(extra) = pairs.keys().find(|k| !["12", "23", "13"].contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown pair {extra:?}")));
    }
    Ok(raw)
}

pub fn six_params_from_json(six: &serde_json::Value) -> Result<SixParams> {
    let field = |name: &str| -> Result<Q> {
        six.get(name)
            .ok_or_else(|| Error::Parse(format!("missing six-parameter field {name:?}")))
            .and_then(rational::from_json)
    };
    Ok(SixParams::new(
        [field("w12")?, field("w23")?, field("w13")?],
        [field("p1")?, field("p2")?, field("p3")?],
    ))
}

/// Parses either `{"pairs": {...}}` or `{"six": {...}}` into validated statistics.
pub fn correlation_from_json(doc: &serde_json::Value) -> Result<CorrelationVector> {
    if let Some(six) = doc.get("six") {
        from_six_params(&six_params_from_json(six)?)
    } else {
        validate(raw_table_from_json(doc)?)
    }
}
