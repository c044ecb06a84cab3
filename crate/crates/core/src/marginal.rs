//! Marginal problems: does a family of context distributions extend to one
//! joint distribution over all measurements?
//!
//! For a finite scenario the following are equivalent for a fixed
//! preparation, and this module converts between them:
//!
//! 1. a joint distribution reproducing every context's statistics exists;
//! 2. a measurement-noncontextual, outcome-deterministic model exists;
//! 3. a measurement-noncontextual, factorizable model exists.
//!
//! [`find_joint`] decides (1) by exact LP and returns a Farkas-style
//! certificate when it fails. For Specker's scenario the closed form
//! [`specker_p000_interval`] parameterizes every candidate joint by `p(000)`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::ontmodel::{FiniteOntologicalModel, OnticState};
use crate::rational::{self, Q};
use crate::scenario::{CorrelationVector, Pair, SixParams};

/// Largest joint outcome space accepted by [`find_joint`].
pub const MAX_JOINT_SIZE: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub name: String,
    pub outcomes: usize,
}

/// Measurements with finite outcome sets and their jointly measurable subsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarginalScenario {
    measurements: Vec<MeasurementSpec>,
    contexts: Vec<Vec<usize>>,
}

impl MarginalScenario {
    pub fn new(measurements: Vec<MeasurementSpec>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::InvalidScenario("no measurements".into()));
        }
        if let Some(m) = measurements.iter().find(|m| m.outcomes == 0) {
            return Err(Error::InvalidScenario(format!("measurement {:?} has no outcomes", m.name)));
        }
        for (ci, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(Error::InvalidScenario(format!("context {ci} is empty")));
            }
            if let Some(&bad) = ctx.iter().find(|&&m| m >= measurements.len()) {
                return Err(Error::InvalidScenario(format!(
                    "context {ci} refers to measurement {bad}, only {} exist",
                    measurements.len()
                )));
            }
            let mut seen = ctx.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != ctx.len() {
                return Err(Error::InvalidScenario(format!("context {ci} repeats a measurement")));
            }
        }
        Ok(MarginalScenario { measurements, contexts })
    }

    /// Three binary measurements with contexts (12), (23), (13).
    pub fn specker() -> Self {
        let measurements = (1..=3)
            .map(|i| MeasurementSpec { name: format!("M{i}"), outcomes: 2 })
            .collect();
        MarginalScenario::new(measurements, vec![vec![0, 1], vec![1, 2], vec![0, 2]])
            .expect("Specker scenario is well formed")
    }

    pub fn measurements(&self) -> &[MeasurementSpec] {
        &self.measurements
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.measurements.iter().map(|m| m.outcomes).collect()
    }

    pub fn is_specker(&self) -> bool {
        self.outcome_counts() == [2, 2, 2] && self.contexts == [vec![0, 1], vec![1, 2], vec![0, 2]]
    }

    pub fn measurement_index(&self, name: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.name == name)
    }

    pub fn context_size(&self, ctx: usize) -> usize {
        self.contexts[ctx].iter().map(|&m| self.measurements[m].outcomes).product()
    }

    pub fn joint_size(&self) -> u128 {
        self.measurements
            .iter()
            .try_fold(1u128, |acc, m| acc.checked_mul(m.outcomes as u128))
            .unwrap_or(u128::MAX)
    }

    /// Stable textual key for a context, e.g. `"M1,M2"`.
    pub fn context_key(&self, ctx: usize) -> String {
        self.contexts[ctx]
            .iter()
            .map(|&m| self.measurements[m].name.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn context_by_key(&self, key: &str) -> Option<usize> {
        (0..self.contexts.len()).find(|&c| {
            self.context_key(c) == key
                || self.contexts[c]
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
                    == key
        })
    }
}

/// Mixed-radix index of an outcome tuple, first entry most significant.
pub fn tuple_index(outcomes: &[usize], radices: &[usize]) -> usize {
    outcomes
        .iter()
        .zip(radices)
        .fold(0, |acc, (&k, &r)| acc * r + k)
}

/// Inverse of [`tuple_index`].
pub fn tuple_from_index(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

/// One distribution per context, over the context's outcome tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioStats {
    #[serde(serialize_with = "serialize_nested")]
    pub distributions: Vec<Vec<Q>>,
}

fn serialize_nested<S: serde::Serializer>(v: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let text: Vec<Vec<String>> = v.iter().map(|d| d.iter().map(rational::to_text).collect()).collect();
    text.serialize(s)
}

/// Marginal of `dist` (over `from` measurements) onto the measurements `onto`,
/// which must be a subset of `from`.
fn marginalize(dist: &[Q], from: &[usize], onto: &[usize], counts: &[usize]) -> Vec<Q> {
    let from_radix: Vec<usize> = from.iter().map(|&m| counts[m]).collect();
    let onto_radix: Vec<usize> = onto.iter().map(|&m| counts[m]).collect();
    let positions: Vec<usize> = onto
        .iter()
        .map(|m| from.iter().position(|f| f == m).expect("subset"))
        .collect();
    let mut out = vec![rational::zero(); onto_radix.iter().product()];
    for (i, p) in dist.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let tuple = tuple_from_index(i, &from_radix);
        let sub: Vec<usize> = positions.iter().map(|&k| tuple[k]).collect();
        out[tuple_index(&sub, &onto_radix)] += p;
    }
    out
}

impl ScenarioStats {
    /// Checks shape, positivity, normalization and agreement of overlapping
    /// contexts on their shared measurements.
    pub fn new(scenario: &MarginalScenario, distributions: Vec<Vec<Q>>) -> Result<Self> {
        if distributions.len() != scenario.contexts().len() {
            return Err(Error::InvalidStats(format!(
                "{} distributions for {} contexts",
                distributions.len(),
                scenario.contexts().len()
            )));
        }
        let mut problems = Vec::new();
        for (c, d) in distributions.iter().enumerate() {
            let key = scenario.context_key(c);
            if d.len() != scenario.context_size(c) {
                return Err(Error::InvalidStats(format!(
                    "context {key} has {} entries, expected {}",
                    d.len(),
                    scenario.context_size(c)
                )));
            }
            if d.iter().any(|p| p.is_negative()) {
                problems.push(format!("context {key} has a negative entry"));
            }
            let sum: Q = d.iter().sum();
            if sum != rational::one() {
                problems.push(format!("context {key} sums to {}", rational::to_text(&sum)));
            }
        }
        let counts = scenario.outcome_counts();
        let ctxs = scenario.contexts();
        for a in 0..ctxs.len() {
            for b in a + 1..ctxs.len() {
                let mut shared: Vec<usize> = ctxs[a].iter().copied().filter(|m| ctxs[b].contains(m)).collect();
                if shared.is_empty() {
                    continue;
                }
                shared.sort_unstable();
                let ma = marginalize(&distributions[a], &ctxs[a], &shared, &counts);
                let mb = marginalize(&distributions[b], &ctxs[b], &shared, &counts);
                if ma != mb {
                    problems.push(format!(
                        "contexts {} and {} disagree on their shared marginal",
                        scenario.context_key(a),
                        scenario.context_key(b)
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(ScenarioStats { distributions })
        } else {
            Err(Error::InvalidStats(problems.join("; ")))
        }
    }

    pub fn from_correlation(cv: &CorrelationVector) -> Self {
        ScenarioStats {
            distributions: Pair::ALL.iter().map(|&p| cv.pair(p).to_vec()).collect(),
        }
    }

    /// Back to a Specker table (contexts must be (12), (23), (13)).
    pub fn to_correlation(&self) -> Result<CorrelationVector> {
        if self.distributions.len() != 3 || self.distributions.iter().any(|d| d.len() != 4) {
            return Err(Error::InvalidStats("not Specker-shaped statistics".into()));
        }
        let raw = [0, 1, 2].map(|c| {
            let d = &self.distributions[c];
            [d[0].clone(), d[1].clone(), d[2].clone(), d[3].clone()]
        });
        crate::scenario::validate(raw)
    }
}

/// Probability over the full product of outcome sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JointDistribution {
    pub outcomes: Vec<usize>,
    #[serde(with = "rational::serde_q_vec")]
    pub probs: Vec<Q>,
}

impl JointDistribution {
    pub fn new(outcomes: Vec<usize>, probs: Vec<Q>) -> Result<Self> {
        let size: usize = outcomes.iter().product();
        if probs.len() != size {
            return Err(Error::InvalidStats(format!("joint has {} entries, expected {size}", probs.len())));
        }
        if probs.iter().any(|p| p.is_negative()) || probs.iter().sum::<Q>() != rational::one() {
            return Err(Error::InvalidStats("joint is not a probability distribution".into()));
        }
        Ok(JointDistribution { outcomes, probs })
    }

    pub fn point_mass(outcomes: Vec<usize>, at: &[usize]) -> Self {
        let mut probs = vec![rational::zero(); outcomes.iter().product()];
        probs[tuple_index(at, &outcomes)] = rational::one();
        JointDistribution { outcomes, probs }
    }

    pub fn get(&self, tuple: &[usize]) -> &Q {
        &self.probs[tuple_index(tuple, &self.outcomes)]
    }

    /// Nonzero entries with their outcome tuples.
    pub fn support(&self) -> Vec<(Vec<usize>, &Q)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (tuple_from_index(i, &self.outcomes), p))
            .collect()
    }

    pub fn marginal(&self, measurements: &[usize]) -> Vec<Q> {
        let all: Vec<usize> = (0..self.outcomes.len()).collect();
        marginalize(&self.probs, &all, measurements, &self.outcomes)
    }

    pub fn stats(&self, scenario: &MarginalScenario) -> ScenarioStats {
        ScenarioStats {
            distributions: scenario.contexts().iter().map(|ctx| self.marginal(ctx)).collect(),
        }
    }
}

/// Linear functional separating the data from every joint's marginals:
/// `Σ c·stats > bound`, while `Σ c·marginals(J) <= bound` for all joints `J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalCertificate {
    #[serde(serialize_with = "serialize_nested")]
    pub coefficients: Vec<Vec<Q>>,
    #[serde(with = "rational::serde_q")]
    pub bound: Q,
    #[serde(with = "rational::serde_q")]
    pub value: Q,
}

impl MarginalCertificate {
    pub fn evaluate(&self, stats: &ScenarioStats) -> Q {
        self.coefficients
            .iter()
            .zip(&stats.distributions)
            .flat_map(|(c, d)| c.iter().zip(d).map(|(a, b)| a * b))
            .sum()
    }

    /// Independent check: enumerate every deterministic joint (the extreme
    /// points of the joint simplex) and confirm the bound, then confirm
    /// the data exceeds it.
    pub fn verify(&self, scenario: &MarginalScenario, stats: &ScenarioStats) -> bool {
        let counts = scenario.outcome_counts();
        let size = scenario.joint_size() as usize;
        // Column k of the row block; each column has a single 1.
        #[allow(clippy::needless_range_loop)]
        for k in 0..size {
            let tuple = tuple_from_index(k, &counts);
            let mut value = rational::zero();
            for (c, ctx) in scenario.contexts().iter().enumerate() {
                let sub: Vec<usize> = ctx.iter().map(|&m| tuple[m]).collect();
                let radix: Vec<usize> = ctx.iter().map(|&m| counts[m]).collect();
                value += &self.coefficients[c][tuple_index(&sub, &radix)];
            }
            if value > self.bound {
                return false;
            }
        }
        self.evaluate(stats) > self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum JointSearch {
    Feasible { joint: JointDistribution },
    Infeasible { certificate: MarginalCertificate },
}

impl JointSearch {
    pub fn joint(&self) -> Option<&JointDistribution> {
        match self {
            JointSearch::Feasible { joint } => Some(joint),
            JointSearch::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, JointSearch::Feasible { .. })
    }
}

/// Decides whether `stats` are the marginals of a joint distribution.
pub fn find_joint(scenario: &MarginalScenario, stats: &ScenarioStats) -> Result<JointSearch> {
    let size = scenario.joint_size();
    if size > MAX_JOINT_SIZE {
        return Err(Error::TooLarge { size, limit: MAX_JOINT_SIZE });
    }
    let size = size as usize;
    let counts = scenario.outcome_counts();
    let mut a: Vec<Vec<Q>> = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    let mut row_of: Vec<(usize, usize)> = Vec::new();
    for (c, ctx) in scenario.contexts().iter().enumerate() {
        let radix: Vec<usize> = ctx.iter().map(|&m| counts[m]).collect();
        let offset = a.len();
        for t in 0..scenario.context_size(c) {
            a.push(vec![rational::zero(); size]);
            b.push(stats.distributions[c][t].clone());
            row_of.push((c, t));
        }
        // Column k of the row block; each column has a single 1.
        #[allow(clippy::needless_range_loop)]
        for k in 0..size {
            let tuple = tuple_from_index(k, &counts);
            let sub: Vec<usize> = ctx.iter().map(|&m| tuple[m]).collect();
            a[offset + tuple_index(&sub, &radix)][k] = rational::one();
        }
    }
    a.push(vec![rational::one(); size]);
    b.push(rational::one());

    match lp::feasible_point(&a, &b) {
        Ok(x) => Ok(JointSearch::Feasible {
            joint: JointDistribution { outcomes: counts, probs: x },
        }),
        Err(cert) => {
            let mut coefficients: Vec<Vec<Q>> = (0..scenario.contexts().len())
                .map(|c| vec![rational::zero(); scenario.context_size(c)])
                .collect();
            for (row, &(c, t)) in row_of.iter().enumerate() {
                coefficients[c][t] = cert.y[row].clone();
            }
            let bound = -cert.y[row_of.len()].clone();
            let mut certificate = MarginalCertificate {
                coefficients,
                bound,
                value: rational::zero(),
            };
            certificate.value = certificate.evaluate(stats);
            Ok(JointSearch::Infeasible { certificate })
        }
    }
}

/// Closed interval of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(with = "rational::serde_q")]
    pub lo: Q,
    #[serde(with = "rational::serde_q")]
    pub hi: Q,
}

impl Interval {
    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint(&self) -> Q {
        (&self.lo + &self.hi) / rational::qi(2)
    }
}

/// The eight entries `p(X1 X2 X3)` as affine functions `a + s·t` of `t = p(000)`,
/// indexed by `4·X1 + 2·X2 + X3`.
fn specker_joint_affine(six: &SixParams) -> [(Q, i64); 8] {
    let t12 = six.pair_table(Pair::P12);
    let t23 = six.pair_table(Pair::P23);
    let t13 = six.pair_table(Pair::P13);
    let z = rational::zero;
    [
        (z(), 1),                                    // 000
        (t12[0].clone(), -1),                        // 001 = p(00|12) - t
        (t13[0].clone(), -1),                        // 010 = p(00|13) - t
        (&t12[1] - &t13[0], 1),                      // 011 = p(01|12) - p(00|13) + t
        (t23[0].clone(), -1),                        // 100 = p(00|23) - t
        (&t12[2] - &t23[0], 1),                      // 101 = p(10|12) - p(00|23) + t
        (&t13[2] - &t23[0], 1),                      // 110 = p(10|13) - p(00|23) + t
        (rational::one() - &t12[0] - &t12[1] - &t12[2] - &t13[2] + &t23[0], -1), // 111
    ]
}

/// Values of `p(000)` for which all eight reconstructed joint entries lie
/// in `[0, 1]`, intersected with `[0, min(p1, p2, p3)]`. `None` when empty.
pub fn specker_p000_interval(six: &SixParams) -> Option<Interval> {
    let mut lo = rational::zero();
    let mut hi = rational::min(rational::min(&six.p1, &six.p2), &six.p3).clone();
    for (a, s) in specker_joint_affine(six) {
        // 0 <= a + s t <= 1
        let (l, h) = if s > 0 {
            (-a.clone(), rational::one() - a)
        } else {
            (a.clone() - rational::one(), a)
        };
        if l > lo {
            lo = l;
        }
        if h < hi {
            hi = h;
        }
    }
    (lo <= hi).then_some(Interval { lo, hi })
}

/// The joint distribution with the given `p(000)`; the caller picks `t`
/// inside [`specker_p000_interval`].
pub fn specker_joint_from_p000(six: &SixParams, t: &Q) -> Result<JointDistribution> {
    let probs: Vec<Q> = specker_joint_affine(six)
        .into_iter()
        .map(|(a, s)| a + rational::qi(s) * t)
        .collect();
    JointDistribution::new(vec![2, 2, 2], probs)
}

/// Closed-form joint for Specker statistics (smallest admissible `p(000)`).
pub fn specker_find_joint(six: &SixParams) -> Option<JointDistribution> {
    let interval = specker_p000_interval(six)?;
    specker_joint_from_p000(six, &interval.lo).ok()
}

/// One ontic state per joint outcome in the support, with point-mass responses.
pub fn deterministic_model_from_joint(
    scenario: &MarginalScenario,
    joint: &JointDistribution,
) -> Result<FiniteOntologicalModel> {
    if joint.outcomes != scenario.outcome_counts() {
        return Err(Error::InvalidModel("joint does not match the scenario's outcome sets".into()));
    }
    let states = joint
        .support()
        .into_iter()
        .map(|(tuple, weight)| OnticState {
            weight: weight.clone(),
            responses: tuple
                .iter()
                .zip(&joint.outcomes)
                .map(|(&k, &n)| (0..n).map(|o| if o == k { rational::one() } else { rational::zero() }).collect())
                .collect(),
            joint_responses: BTreeMap::new(),
        })
        .collect();
    FiniteOntologicalModel::new(scenario.clone(), states)
}

/// `p(k_1..k_N) = Σ_λ μ(λ) Π_i ξ(k_i | M_i, λ)` for a factorizable model.
pub fn joint_from_factorizable(model: &FiniteOntologicalModel) -> Result<JointDistribution> {
    if let Some((state, context)) = model.first_nonfactorizable() {
        return Err(Error::NotFactorizable { state, context });
    }
    let counts = model.scenario().outcome_counts();
    let size = model.scenario().joint_size();
    if size > MAX_JOINT_SIZE {
        return Err(Error::TooLarge { size, limit: MAX_JOINT_SIZE });
    }
    let mut probs = vec![rational::zero(); size as usize];
    for state in model.states() {
        if state.weight.is_zero() {
            continue;
        }
        for (k, p) in probs.iter_mut().enumerate() {
            let tuple = tuple_from_index(k, &counts);
            let mut prod = state.weight.clone();
            for (m, &o) in tuple.iter().enumerate() {
                let r = &state.responses[m][o];
                if r.is_zero() {
                    prod = rational::zero();
                    break;
                }
                prod *= r;
            }
            *p += prod;
        }
    }
    JointDistribution::new(counts, probs)
}

/// True iff every joint response equals the product of the single responses.
pub fn factorizability_check(model: &FiniteOntologicalModel) -> bool {
    model.first_nonfactorizable().is_none()
}
