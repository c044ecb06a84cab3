//! Finite ontological models and the noncontextual bounds on `R0..R3`.
//!
//! A model is a finite list of ontic states, each with a weight, a response
//! function per measurement and, optionally, an explicit joint response per
//! context. Joint responses need not be products of the singles: such
//! models are noncontextual but not factorizable. Their marginals must
//! still equal the single responses.
//!
//! The second half of the module reproduces the optimization behind the
//! NC bounds. A measurement with sharpness `η` responds as
//! `η δ_{X, X(λ)} + (1 - η)/2`, and a pairwise response is a convex mixture
//! of five terms weighted `α` (both deterministic), `β`, `γ` (one
//! deterministic, one fair coin), `δ` (correlated coin) and `ε`
//! (anticorrelated coin).

use std::borrow::Cow;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::Inequality;
use crate::marginal::{tuple_from_index, MarginalScenario, MeasurementSpec, ScenarioStats};
use crate::rational::{self, Q};
use crate::scenario::{CorrelationVector, Pair};

#[derive(Clone, Debug, PartialEq)]
pub struct OnticState {
    pub weight: Q,
    /// `responses[m][k] = ξ(k | M_m, λ)`.
    pub responses: Vec<Vec<Q>>,
    /// Explicit joint responses keyed by context index; missing contexts use
    /// the product of the single responses.
    pub joint_responses: BTreeMap<usize, Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteOntologicalModel {
    scenario: MarginalScenario,
    states: Vec<OnticState>,
}

fn is_zero_one(v: &Q) -> bool {
    v.is_zero() || *v == rational::one()
}

fn check_distribution(d: &[Q], what: &str) -> Result<()> {
    if d.iter().any(|p| p.is_negative()) {
        return Err(Error::InvalidModel(format!("{what} has a negative entry")));
    }
    let s: Q = d.iter().sum();
    if s != rational::one() {
        return Err(Error::InvalidModel(format!("{what} sums to {}", rational::to_text(&s))));
    }
    Ok(())
}

impl FiniteOntologicalModel {
    pub fn new(scenario: MarginalScenario, states: Vec<OnticState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidModel("no ontic states".into()));
        }
        let weights: Vec<Q> = states.iter().map(|s| s.weight.clone()).collect();
        check_distribution(&weights, "weight vector")?;
        let counts = scenario.outcome_counts();
        for (i, st) in states.iter().enumerate() {
            if st.responses.len() != counts.len() {
                return Err(Error::InvalidModel(format!(
                    "state {i} has {} response functions, expected {}",
                    st.responses.len(),
                    counts.len()
                )));
            }
            for (m, r) in st.responses.iter().enumerate() {
                if r.len() != counts[m] {
                    return Err(Error::InvalidModel(format!(
                        "state {i}: response of {} has {} outcomes, expected {}",
                        scenario.measurements()[m].name,
                        r.len(),
                        counts[m]
                    )));
                }
                check_distribution(r, &format!("state {i}, response of {}", scenario.measurements()[m].name))?;
            }
            for (&c, joint) in &st.joint_responses {
                if c >= scenario.contexts().len() {
                    return Err(Error::InvalidModel(format!("state {i}: unknown context {c}")));
                }
                let key = scenario.context_key(c);
                if joint.len() != scenario.context_size(c) {
                    return Err(Error::InvalidModel(format!(
                        "state {i}: joint response on {key} has {} entries, expected {}",
                        joint.len(),
                        scenario.context_size(c)
                    )));
                }
                check_distribution(joint, &format!("state {i}, joint response on {key}"))?;
                // Measurement noncontextuality: each marginal is the single response.
                let ctx = &scenario.contexts()[c];
                let radix: Vec<usize> = ctx.iter().map(|&m| counts[m]).collect();
                for (pos, &m) in ctx.iter().enumerate() {
                    let mut marg = vec![rational::zero(); counts[m]];
                    for (t, p) in joint.iter().enumerate() {
                        marg[tuple_from_index(t, &radix)[pos]] += p;
                    }
                    if marg != st.responses[m] {
                        return Err(Error::InvalidModel(format!(
                            "state {i}: joint response on {key} has a marginal on {} different from its single response",
                            scenario.measurements()[m].name
                        )));
                    }
                }
            }
        }
        Ok(FiniteOntologicalModel { scenario, states })
    }

    pub fn scenario(&self) -> &MarginalScenario {
        &self.scenario
    }

    pub fn states(&self) -> &[OnticState] {
        &self.states
    }

    /// Response of state `s` on context `c`, explicit or product.
    pub fn joint_response(&self, s: usize, c: usize) -> Cow<'_, [Q]> {
        let st = &self.states[s];
        if let Some(j) = st.joint_responses.get(&c) {
            return Cow::Borrowed(j);
        }
        Cow::Owned(self.product_response(s, c))
    }

    fn product_response(&self, s: usize, c: usize) -> Vec<Q> {
        let st = &self.states[s];
        let ctx = &self.scenario.contexts()[c];
        let counts = self.scenario.outcome_counts();
        let radix: Vec<usize> = ctx.iter().map(|&m| counts[m]).collect();
        (0..self.scenario.context_size(c))
            .map(|t| {
                tuple_from_index(t, &radix)
                    .iter()
                    .zip(ctx)
                    .map(|(&k, &m)| st.responses[m][k].clone())
                    .product()
            })
            .collect()
    }

    /// Every single and explicit joint response is 0/1-valued.
    pub fn is_deterministic(&self) -> bool {
        self.states.iter().all(|st| {
            st.responses.iter().flatten().all(is_zero_one)
                && st.joint_responses.values().flatten().all(is_zero_one)
        })
    }

    /// `(state, context)` of the first explicit joint response that is not
    /// the product of the singles.
    pub fn first_nonfactorizable(&self) -> Option<(usize, usize)> {
        for (s, st) in self.states.iter().enumerate() {
            for (&c, joint) in &st.joint_responses {
                if *joint != self.product_response(s, c) {
                    return Some((s, c));
                }
            }
        }
        None
    }

    pub fn is_factorizable(&self) -> bool {
        self.first_nonfactorizable().is_none()
    }

    /// `p(k_S | M_S) = Σ_λ μ(λ) ξ(k_S | M_S, λ)` for every context.
    pub fn stats(&self) -> ScenarioStats {
        let distributions = (0..self.scenario.contexts().len())
            .map(|c| {
                let mut d = vec![rational::zero(); self.scenario.context_size(c)];
                for (s, st) in self.states.iter().enumerate() {
                    if st.weight.is_zero() {
                        continue;
                    }
                    for (slot, r) in d.iter_mut().zip(self.joint_response(s, c).iter()) {
                        *slot += &st.weight * r;
                    }
                }
                d
            })
            .collect();
        ScenarioStats { distributions }
    }

    /// Specker statistics of the model (scenario must be Specker's).
    pub fn correlation(&self) -> Result<CorrelationVector> {
        if !self.scenario.is_specker() {
            return Err(Error::InvalidModel("model is not over Specker's scenario".into()));
        }
        self.stats().to_correlation()
    }

    /// The fair-coin model: outcomes ignore the system and each jointly
    /// measured pair is perfectly anticorrelated.
    pub fn fair_coin() -> Self {
        let h = rational::half();
        let z = rational::zero();
        let coin = vec![h.clone(), h.clone()];
        let anti = vec![z.clone(), h.clone(), h, z];
        let state = OnticState {
            weight: rational::one(),
            responses: vec![coin.clone(), coin.clone(), coin],
            joint_responses: (0..3).map(|c| (c, anti.clone())).collect(),
        };
        FiniteOntologicalModel::new(MarginalScenario::specker(), vec![state]).expect("fair-coin model is valid")
    }

    /// Mixture of deterministic Specker states `(X1, X2, X3)` with weights.
    pub fn deterministic_specker(parts: &[([u8; 3], Q)]) -> Result<Self> {
        let states = parts
            .iter()
            .map(|(x, w)| OnticState {
                weight: w.clone(),
                responses: x.iter().map(|&b| single_response(&rational::one(), b).to_vec()).collect(),
                joint_responses: BTreeMap::new(),
            })
            .collect();
        FiniteOntologicalModel::new(MarginalScenario::specker(), states)
    }
}

/// `η δ_{X, bit} + (1 - η)(δ_{X,0} + δ_{X,1}) / 2`.
pub fn single_response(eta: &Q, bit: u8) -> [Q; 2] {
    let noise = (rational::one() - eta) / rational::qi(2);
    let mut out = [noise.clone(), noise];
    out[bit as usize] += eta;
    out
}

/// Five-term convex decomposition of a pairwise response function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairwiseResponseDecomposition {
    #[serde(with = "rational::serde_q")]
    pub alpha: Q,
    #[serde(with = "rational::serde_q")]
    pub beta: Q,
    #[serde(with = "rational::serde_q")]
    pub gamma: Q,
    #[serde(with = "rational::serde_q")]
    pub delta: Q,
    #[serde(with = "rational::serde_q")]
    pub epsilon: Q,
    #[serde(with = "rational::serde_q")]
    pub eta: Q,
    /// `(X_i(λ), X_j(λ))`.
    pub assignment: (u8, u8),
}

impl PairwiseResponseDecomposition {
    /// The anticorrelation-maximizing choice `α = η, ε = 1 - η`.
    pub fn maximizing(eta: &Q, assignment: (u8, u8)) -> Self {
        PairwiseResponseDecomposition {
            alpha: eta.clone(),
            beta: rational::zero(),
            gamma: rational::zero(),
            delta: rational::zero(),
            epsilon: rational::one() - eta,
            eta: eta.clone(),
            assignment,
        }
    }

    /// The anticorrelation-minimizing choice `α = η, δ = 1 - η`.
    pub fn minimizing(eta: &Q, assignment: (u8, u8)) -> Self {
        PairwiseResponseDecomposition {
            alpha: eta.clone(),
            beta: rational::zero(),
            gamma: rational::zero(),
            delta: rational::one() - eta,
            epsilon: rational::zero(),
            eta: eta.clone(),
            assignment,
        }
    }

    /// Nonnegativity plus `α+β = α+γ = η` and `γ+δ+ε = β+δ+ε = 1-η`.
    pub fn check(&self) -> Result<()> {
        let parts = [&self.alpha, &self.beta, &self.gamma, &self.delta, &self.epsilon];
        if parts.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDecomposition("negative coefficient".into()));
        }
        if self.eta.is_negative() || self.eta > rational::one() {
            return Err(Error::InvalidDecomposition("sharpness outside [0, 1]".into()));
        }
        let rest = rational::one() - &self.eta;
        if &self.alpha + &self.beta != self.eta || &self.alpha + &self.gamma != self.eta {
            return Err(Error::InvalidDecomposition("alpha+beta and alpha+gamma must equal eta".into()));
        }
        let noise = &self.delta + &self.epsilon;
        if &self.gamma + &noise != rest || &self.beta + &noise != rest {
            return Err(Error::InvalidDecomposition(
                "gamma+delta+epsilon and beta+delta+epsilon must equal 1-eta".into(),
            ));
        }
        Ok(())
    }

    fn table(&self) -> [Q; 4] {
        let (a, b) = (self.assignment.0 as usize, self.assignment.1 as usize);
        let h = rational::half();
        let mut t: [Q; 4] = Default::default();
        t[2 * a + b] += &self.alpha;
        for y in 0..2 {
            t[2 * a + y] += &self.beta * &h;
            t[2 * y + b] += &self.gamma * &h;
        }
        t[0] += &self.delta * &h;
        t[3] += &self.delta * &h;
        t[1] += &self.epsilon * &h;
        t[2] += &self.epsilon * &h;
        t
    }

    /// Probability that the two outcomes differ.
    pub fn anticorrelation(&self) -> Q {
        let t = self.table();
        &t[1] + &t[2]
    }
}

/// Distribution over `(X_i, X_j)`, indexed `2·X_i + X_j`.
pub fn pairwise_response(d: &PairwiseResponseDecomposition) -> Result<[Q; 4]> {
    d.check()?;
    Ok(d.table())
}

/// `(min, max)` of `w_ij(λ)` under the maximizing decomposition as the
/// assignment varies: `(1 - η, 1)`.
pub fn max_anticorrelation_bounds(eta: &Q) -> (Q, Q) {
    anticorrelation_range(eta, PairwiseResponseDecomposition::maximizing)
}

/// `(min, max)` of `w_ij(λ)` under the minimizing decomposition: `(0, η)`.
pub fn min_anticorrelation_bounds(eta: &Q) -> (Q, Q) {
    anticorrelation_range(eta, PairwiseResponseDecomposition::minimizing)
}

fn anticorrelation_range(eta: &Q, make: fn(&Q, (u8, u8)) -> PairwiseResponseDecomposition) -> (Q, Q) {
    let values: Vec<Q> = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .map(|a| make(eta, a).anticorrelation())
        .collect();
    let lo = values.iter().min().unwrap().clone();
    let hi = values.iter().max().unwrap().clone();
    (lo, hi)
}

/// Maximum of `R_i(λ)` over ontic states and the assignments reaching it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoncontextualMax {
    pub inequality: Inequality,
    #[serde(with = "rational::serde_q")]
    pub value: Q,
    /// Assignments `(X1, X2, X3)` attaining the maximum.
    pub maximizers: Vec<[u8; 3]>,
}

fn assignments() -> impl Iterator<Item = [u8; 3]> {
    (0..8u8).map(|k| [(k >> 2) & 1, (k >> 1) & 1, k & 1])
}

fn pair_bits(x: [u8; 3], pair: Pair) -> (u8, u8) {
    let (a, b) = pair.measurements();
    (x[a.index()], x[b.index()])
}

/// Enumerates the 8 assignments and, per pair, the maximizing or minimizing
/// decomposition according to the sign of the pair's coefficient in `R_i`.
pub fn noncontextual_max_r(which: Inequality, eta: &Q) -> NoncontextualMax {
    let coeffs = which.coefficients();
    let mut best: Option<Q> = None;
    let mut maximizers = Vec::new();
    for x in assignments() {
        let value: Q = Pair::ALL
            .iter()
            .zip(coeffs)
            .map(|(&pair, c)| {
                let bits = pair_bits(x, pair);
                let d = if c > 0 {
                    PairwiseResponseDecomposition::maximizing(eta, bits)
                } else {
                    PairwiseResponseDecomposition::minimizing(eta, bits)
                };
                rational::qi(c) * d.anticorrelation()
            })
            .sum();
        match &best {
            Some(b) if value < *b => {}
            Some(b) if value == *b => maximizers.push(x),
            _ => {
                best = Some(value);
                maximizers = vec![x];
            }
        }
    }
    NoncontextualMax {
        inequality: which,
        value: best.expect("eight assignments"),
        maximizers,
    }
}

/// Vertices of the decomposition polytope for sharpnesses `(η_i, η_j)`:
/// `α ∈ {max(0, η_i+η_j-1), min(η_i, η_j)}`, with the coin weight placed
/// wholly on `δ` or on `ε`.
pub fn decomposition_vertices(eta_i: &Q, eta_j: &Q) -> Vec<[Q; 5]> {
    let lo = rational::max(&rational::zero(), &(eta_i + eta_j - rational::one())).clone();
    let hi = rational::min(eta_i, eta_j).clone();
    let mut out = Vec::new();
    for alpha in [lo, hi] {
        let beta = eta_i - &alpha;
        let gamma = eta_j - &alpha;
        let coin = rational::one() - eta_i - &gamma;
        for (delta, epsilon) in [(coin.clone(), rational::zero()), (rational::zero(), coin.clone())] {
            out.push([alpha.clone(), beta.clone(), gamma.clone(), delta, epsilon]);
        }
    }
    out
}

/// Anticorrelation of a general (possibly mixed-sharpness) decomposition.
fn mixed_anticorrelation(coeffs: &[Q; 5], assignment: (u8, u8)) -> Q {
    let [alpha, beta, gamma, _delta, epsilon] = coeffs;
    let h = rational::half();
    let det = if assignment.0 != assignment.1 { alpha.clone() } else { rational::zero() };
    det + (beta + gamma) * h + epsilon
}

/// Research mode: maximum of `R_i(λ)` when the three measurements have
/// different sharpnesses, by enumerating assignments and the vertices of
/// every pair's decomposition polytope. No closed form is claimed.
pub fn noncontextual_max_r_mixed(which: Inequality, etas: &[Q; 3]) -> NoncontextualMax {
    let coeffs = which.coefficients();
    let mut best: Option<Q> = None;
    let mut maximizers = Vec::new();
    for x in assignments() {
        let value: Q = Pair::ALL
            .iter()
            .zip(coeffs)
            .map(|(&pair, c)| {
                let (mi, mj) = pair.measurements();
                let bits = pair_bits(x, pair);
                let ws = decomposition_vertices(&etas[mi.index()], &etas[mj.index()])
                    .iter()
                    .map(|v| rational::qi(c) * mixed_anticorrelation(v, bits))
                    .collect::<Vec<_>>();
                ws.into_iter().max().unwrap()
            })
            .sum();
        match &best {
            Some(b) if value < *b => {}
            Some(b) if value == *b => maximizers.push(x),
            _ => {
                best = Some(value);
                maximizers = vec![x];
            }
        }
    }
    NoncontextualMax {
        inequality: which,
        value: best.expect("eight assignments"),
        maximizers,
    }
}

/// Model statistics as a [`ScenarioStats`].
pub fn stats_from_model(model: &FiniteOntologicalModel) -> ScenarioStats {
    model.stats()
}

// ---------------------------------------------------------------------------
// JSON model files

fn parse_dist(v: &serde_json::Value, what: &str) -> Result<Vec<Q>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))?
        .iter()
        .map(rational::from_json)
        .collect()
}

/// Reads `{"measurements", "contexts", "states": [...]}` or a bare array of
/// state records (Specker scenario assumed). A state record is
/// `{"weight": "p/q", "responses": {"M1": [...]}, "joint_responses": {"M1,M2": [...]}}`.
pub fn model_from_json(doc: &serde_json::Value) -> Result<FiniteOntologicalModel> {
    let (scenario, states_json) = match doc {
        serde_json::Value::Array(states) => (MarginalScenario::specker(), states),
        serde_json::Value::Object(obj) => {
            let scenario = if obj.contains_key("measurements") {
                scenario_from_json(doc)?
            } else {
                MarginalScenario::specker()
            };
            let states = obj
                .get("states")
                .and_then(|s| s.as_array())
                .ok_or_else(|| Error::Parse("model needs a \"states\" array".into()))?;
            (scenario, states)
        }
        _ => return Err(Error::Parse("model must be an object or an array".into())),
    };
    let mut states = Vec::new();
    for (i, rec) in states_json.iter().enumerate() {
        let weight = rational::from_json(
            rec.get("weight")
                .ok_or_else(|| Error::Parse(format!("state {i} has no weight")))?,
        )?;
        let resp = rec
            .get("responses")
            .and_then(|r| r.as_object())
            .ok_or_else(|| Error::Parse(format!("state {i} has no responses object")))?;
        let mut responses = vec![Vec::new(); scenario.measurements().len()];
        for (name, dist) in resp {
            let m = scenario
                .measurement_index(name)
                .ok_or_else(|| Error::Parse(format!("state {i}: unknown measurement {name:?}")))?;
            responses[m] = parse_dist(dist, &format!("state {i} response {name}"))?;
        }
        let mut joint_responses = BTreeMap::new();
        if let Some(joint) = rec.get("joint_responses").and_then(|j| j.as_object()) {
            for (key, dist) in joint {
                let c = scenario
                    .context_by_key(key)
                    .ok_or_else(|| Error::Parse(format!("state {i}: unknown context {key:?}")))?;
                joint_responses.insert(c, parse_dist(dist, &format!("state {i} joint response {key}"))?);
            }
        }
        states.push(OnticState { weight, responses, joint_responses });
    }
    FiniteOntologicalModel::new(scenario, states)
}

/// Reads the `measurements` and `contexts` fields of a scenario document.
pub fn scenario_from_json(doc: &serde_json::Value) -> Result<MarginalScenario> {
    let measurements: Vec<MeasurementSpec> = serde_json::from_value(
        doc.get("measurements")
            .cloned()
            .ok_or_else(|| Error::Parse("missing \"measurements\"".into()))?,
    )
    .map_err(|e| Error::Parse(format!("measurements: {e}")))?;
    let contexts: Vec<Vec<usize>> = serde_json::from_value(
        doc.get("contexts")
            .cloned()
            .ok_or_else(|| Error::Parse("missing \"contexts\"".into()))?,
    )
    .map_err(|e| Error::Parse(format!("contexts: {e}")))?;
    MarginalScenario::new(measurements, contexts)
}

/// Reads the `stats` object of a scenario document, keyed by context
/// (`"M1,M2"` or `"0,1"`).
pub fn stats_from_json(scenario: &MarginalScenario, doc: &serde_json::Value) -> Result<ScenarioStats> {
    let stats = doc
        .get("stats")
        .and_then(|s| s.as_object())
        .ok_or_else(|| Error::Parse("missing \"stats\" object".into()))?;
    let mut distributions: Vec<Option<Vec<Q>>> = vec![None; scenario.contexts().len()];
    for (key, dist) in stats {
        let c = scenario
            .context_by_key(key)
            .ok_or_else(|| Error::Parse(format!("stats for unknown context {key:?}")))?;
        distributions[c] = Some(parse_dist(dist, &format!("stats {key}"))?);
    }
    let distributions = distributions
        .into_iter()
        .enumerate()
        .map(|(c, d)| d.ok_or_else(|| Error::Parse(format!("no stats for context {}", scenario.context_key(c)))))
        .collect::<Result<Vec<_>>>()?;
    ScenarioStats::new(scenario, distributions)
}

/// JSON rendering of a model in the same layout [`model_from_json`] reads.
pub fn model_to_json(model: &FiniteOntologicalModel) -> serde_json::Value {
    let sc = model.scenario();
    let states: Vec<serde_json::Value> = model
        .states()
        .iter()
        .map(|st| {
            let responses: serde_json::Map<String, serde_json::Value> = st
                .responses
                .iter()
                .enumerate()
                .map(|(m, r)| {
                    (
                        sc.measurements()[m].name.clone(),
                        r.iter().map(rational::to_text).collect::<Vec<_>>().into(),
                    )
                })
                .collect();
            let joint: serde_json::Map<String, serde_json::Value> = st
                .joint_responses
                .iter()
                .map(|(&c, r)| (sc.context_key(c), r.iter().map(rational::to_text).collect::<Vec<_>>().into()))
                .collect();
            serde_json::json!({
                "weight": rational::to_text(&st.weight),
                "responses": responses,
                "joint_responses": joint,
            })
        })
        .collect();
    serde_json::json!({
        "measurements": sc.measurements(),
        "contexts": sc.contexts(),
        "states": states,
        "deterministic": model.is_deterministic(),
        "factorizable": model.is_factorizable(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::vertices;
    use crate::rational::{q, qi};

    #[test]
    fn single_response_examples() {
        assert_eq!(single_response(&qi(1), 0), [qi(1), qi(0)]);
        assert_eq!(single_response(&qi(0), 1), [q(1, 2), q(1, 2)]);
        assert_eq!(single_response(&qi(0), 0), [q(1, 2), q(1, 2)]);
        assert_eq!(single_response(&q(1, 2), 1), [q(1, 4), q(3, 4)]);
    }

    #[test]
    fn pairwise_response_examples() {
        let eta = q(2, 5);
        let t = pairwise_response(&PairwiseResponseDecomposition::maximizing(&eta, (0, 0))).unwrap();
        assert_eq!(t, [eta.clone(), q(3, 10), q(3, 10), qi(0)]);
        let d = PairwiseResponseDecomposition::minimizing(&eta, (0, 1));
        assert_eq!(d.anticorrelation(), eta);
        let sharp = PairwiseResponseDecomposition::maximizing(&qi(1), (1, 0));
        assert_eq!(pairwise_response(&sharp).unwrap(), [qi(0), qi(0), qi(1), qi(0)]);
        let mut bad = PairwiseResponseDecomposition::maximizing(&eta, (0, 0));
        bad.beta = q(1, 10);
        assert!(matches!(pairwise_response(&bad), Err(Error::InvalidDecomposition(_))));
    }

    #[test]
    fn anticorrelation_bounds() {
        assert_eq!(max_anticorrelation_bounds(&qi(1)), (qi(0), qi(1)));
        assert_eq!(min_anticorrelation_bounds(&qi(1)), (qi(0), qi(1)));
        assert_eq!(max_anticorrelation_bounds(&q(1, 2)), (q(1, 2), qi(1)));
        assert_eq!(min_anticorrelation_bounds(&q(1, 2)), (qi(0), q(1, 2)));
        assert_eq!(max_anticorrelation_bounds(&qi(0)), (qi(1), qi(1)));
        assert_eq!(min_anticorrelation_bounds(&qi(0)), (qi(0), qi(0)));
    }

    #[test]
    fn noncontextual_maxima() {
        assert_eq!(noncontextual_max_r(Inequality::R3, &qi(1)).value, qi(2));
        assert_eq!(noncontextual_max_r(Inequality::R3, &q(1, 2)).value, q(5, 2));
        assert_eq!(noncontextual_max_r(Inequality::R0, &q(1, 4)).value, q(3, 4));
        let r3 = noncontextual_max_r(Inequality::R3, &q(1, 3));
        assert_eq!(
            r3.maximizers,
            vec![[0, 0, 1], [0, 1, 0], [0, 1, 1], [1, 0, 0], [1, 0, 1], [1, 1, 0]]
        );
    }

    #[test]
    fn mixed_mode_agrees_with_equal_sharpness() {
        for k in 0..=10 {
            let eta = q(k, 10);
            for which in Inequality::ALL {
                let a = noncontextual_max_r(which, &eta);
                let b = noncontextual_max_r_mixed(which, &[eta.clone(), eta.clone(), eta.clone()]);
                assert_eq!(a.value, b.value, "{which} at eta={k}/10");
            }
        }
    }

    #[test]
    fn model_statistics() {
        let fair = FiniteOntologicalModel::fair_coin();
        assert_eq!(fair.correlation().unwrap(), vertices()[11].cv);
        assert!(!fair.is_factorizable());
        assert!(!fair.is_deterministic());
        let det = FiniteOntologicalModel::deterministic_specker(&[([1, 1, 1], qi(1))]).unwrap();
        assert_eq!(det.correlation().unwrap(), vertices()[7].cv);
        assert!(det.is_deterministic() && det.is_factorizable());
        let mix = FiniteOntologicalModel::deterministic_specker(&[([0, 0, 0], q(1, 3)), ([1, 0, 1], q(2, 3))]).unwrap();
        let expected = CorrelationVector::mixture(&[&vertices()[0].cv, &vertices()[5].cv], &[q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(mix.correlation().unwrap(), expected);
    }

    #[test]
    fn rejects_signalling_joint_response() {
        let h = q(1, 2);
        let st = OnticState {
            weight: qi(1),
            responses: vec![vec![h.clone(), h.clone()]; 3],
            joint_responses: [(0usize, vec![qi(1), qi(0), qi(0), qi(0)])].into_iter().collect(),
        };
        assert!(FiniteOntologicalModel::new(MarginalScenario::specker(), vec![st]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let fair = FiniteOntologicalModel::fair_coin();
        let doc = model_to_json(&fair);
        assert_eq!(model_from_json(&doc).unwrap(), fair);
        let bare = serde_json::json!([{"weight": 1, "responses": {"M1": [1, 0], "M2": [0, 1], "M3": ["1/1", "0/1"]}}]);
        let m = model_from_json(&bare).unwrap();
        assert_eq!(m.correlation().unwrap(), vertices()[2].cv);
    }
}
