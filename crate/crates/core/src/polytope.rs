//! The no-disturbance (Specker) polytope and its KS-noncontextual subpolytope.
//!
//! The polytope has twelve vertices: eight deterministic ones, labelled by the
//! decimal value of the bit string `X1 X2 X3`, and four indeterministic ones
//! (8..=11) with perfectly (anti)correlated fair-coin pairs. Vertex 11 is the
//! "overprotective seer" box.
//!
//! Facets are given in half-space form over `(w12, w23, w13, p1, p2, p3)`:
//! the twelve chain inequalities bound the full polytope and the four KS
//! inequalities cut out the noncontextual part.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::Inequality;
use crate::lp::{self, LpOutcome};
use crate::rational::{self, Q};
use crate::scenario::{outcome_index, validate, CorrelationVector, Measurement, Pair, RawTable, SixParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Deterministic,
    Indeterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vertex {
    pub id: usize,
    pub kind: VertexKind,
    pub cv: CorrelationVector,
}

impl Vertex {
    /// Outcome assignment `(X1, X2, X3)` of a deterministic vertex.
    pub fn assignment(&self) -> Option<[u8; 3]> {
        (self.kind == VertexKind::Deterministic).then(|| assignment_bits(self.id))
    }
}

/// Bits of `id` read as `X1 X2 X3`.
pub fn assignment_bits(id: usize) -> [u8; 3] {
    [((id >> 2) & 1) as u8, ((id >> 1) & 1) as u8, (id & 1) as u8]
}

fn deterministic_vertex(id: usize) -> Vertex {
    let x = assignment_bits(id);
    let mut raw: RawTable = Default::default();
    for pair in Pair::ALL {
        let (a, b) = pair.measurements();
        for o in raw[pair.index()].iter_mut() {
            *o = rational::zero();
        }
        raw[pair.index()][outcome_index(x[a.index()], x[b.index()])] = rational::one();
    }
    Vertex {
        id,
        kind: VertexKind::Deterministic,
        cv: validate(raw).expect("deterministic vertex is valid"),
    }
}

fn indeterministic_vertex(id: usize) -> Vertex {
    // The pair carrying anticorrelation; vertex 11 anticorrelates all three.
    let anti = |pair: Pair| match id {
        8 => pair == Pair::P12,
        9 => pair == Pair::P23,
        10 => pair == Pair::P13,
        _ => true,
    };
    let h = rational::half();
    let z = rational::zero();
    let raw: RawTable = Pair::ALL.map(|pair| {
        if anti(pair) {
            [z.clone(), h.clone(), h.clone(), z.clone()]
        } else {
            [h.clone(), z.clone(), z.clone(), h.clone()]
        }
    });
    Vertex {
        id,
        kind: VertexKind::Indeterministic,
        cv: validate(raw).expect("indeterministic vertex is valid"),
    }
}

/// The twelve vertices in id order.
pub fn vertices() -> &'static [Vertex] {
    static VERTICES: OnceLock<Vec<Vertex>> = OnceLock::new();
    VERTICES.get_or_init(|| {
        (0..8)
            .map(deterministic_vertex)
            .chain((8..12).map(indeterministic_vertex))
            .collect()
    })
}

/// Which side of a positivity chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainSide {
    /// `w_ij >= p_i - p_j`
    DiffLow,
    /// `w_ij >= p_j - p_i`
    DiffHigh,
    /// `w_ij <= p_i + p_j`
    SumLow,
    /// `p_i + p_j <= 2 - w_ij`
    SumHigh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "facet")]
pub enum Facet {
    Chain { pair: Pair, side: ChainSide },
    Ks { inequality: Inequality },
}

impl Facet {
    /// All sixteen facets: chains pair by pair, then `R3, R0, R1, R2`.
    pub fn all() -> Vec<Facet> {
        let mut out = Vec::with_capacity(16);
        for pair in Pair::ALL {
            for side in [ChainSide::DiffLow, ChainSide::DiffHigh, ChainSide::SumLow, ChainSide::SumHigh] {
                out.push(Facet::Chain { pair, side });
            }
        }
        for inequality in [Inequality::R3, Inequality::R0, Inequality::R1, Inequality::R2] {
            out.push(Facet::Ks { inequality });
        }
        out
    }

    /// `(a, b)` with the facet reading `a · (w12, w23, w13, p1, p2, p3) <= b`.
    pub fn halfspace(self) -> ([i64; 6], i64) {
        match self {
            Facet::Chain { pair, side } => {
                let mut a = [0i64; 6];
                let (mi, mj) = pair.measurements();
                let (wi, pi, pj) = (pair.index(), 3 + mi.index(), 3 + mj.index());
                let (sw, si, sj, b) = match side {
                    ChainSide::DiffLow => (-1, 1, -1, 0),
                    ChainSide::DiffHigh => (-1, -1, 1, 0),
                    ChainSide::SumLow => (1, -1, -1, 0),
                    ChainSide::SumHigh => (1, 1, 1, 2),
                };
                a[wi] = sw;
                a[pi] = si;
                a[pj] = sj;
                (a, b)
            }
            Facet::Ks { inequality } => {
                let c = inequality.coefficients();
                ([c[0], c[1], c[2], 0, 0, 0], if inequality == Inequality::R3 { 2 } else { 0 })
            }
        }
    }

    /// `a·x - b`; positive means violated.
    pub fn slack(self, six: &SixParams) -> Q {
        let (a, b) = self.halfspace();
        let x = [&six.w12, &six.w23, &six.w13, &six.p1, &six.p2, &six.p3];
        let lhs: Q = a.iter().zip(x).map(|(&ai, xi)| rational::qi(ai) * xi).sum();
        lhs - rational::qi(b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub violated: Vec<Facet>,
}

/// Exact facet test for the KS-noncontextual polytope.
pub fn in_ks_polytope(six: &SixParams) -> Membership {
    let violated: Vec<Facet> = Facet::all()
        .into_iter()
        .filter(|f| f.slack(six).is_positive())
        .collect();
    Membership {
        member: violated.is_empty(),
        violated,
    }
}

/// Weights over the twelve vertices, in id order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexDecomposition {
    #[serde(with = "rational::serde_q_vec")]
    pub weights: Vec<Q>,
}

impl ConvexDecomposition {
    /// Recombines the vertices; `None` if the weights are not a probability vector.
    pub fn recombine(&self) -> Option<CorrelationVector> {
        if self.weights.len() != 12
            || self.weights.iter().any(|w| w.is_negative())
            || self.weights.iter().sum::<Q>() != rational::one()
        {
            return None;
        }
        let points: Vec<&CorrelationVector> = vertices().iter().map(|v| &v.cv).collect();
        CorrelationVector::mixture(&points, &self.weights).ok()
    }

    pub fn support(&self) -> Vec<(usize, &Q)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .collect()
    }
}

/// Rows `Σ_k w_k v_k = target` plus `Σ_k w_k = 1`.
fn mixture_system(target: &CorrelationVector) -> (Vec<Vec<Q>>, Vec<Q>) {
    let verts = vertices();
    let mut a = Vec::with_capacity(13);
    let mut b = Vec::with_capacity(13);
    for p in 0..3 {
        for o in 0..4 {
            a.push(verts.iter().map(|v| v.cv.entries()[p][o].clone()).collect());
            b.push(target.entries()[p][o].clone());
        }
    }
    a.push(vec![rational::one(); 12]);
    b.push(rational::one());
    (a, b)
}

/// Lexicographically smallest weight vector (in vertex id order) that
/// reproduces `cv`.
pub fn decompose(cv: &CorrelationVector) -> Result<ConvexDecomposition> {
    let (mut a, mut b) = mixture_system(cv);
    let mut weights = Vec::with_capacity(12);
    for k in 0..12 {
        let mut c = vec![rational::zero(); 12];
        c[k] = rational::one();
        match lp::minimize(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => {
                let mut row = vec![rational::zero(); 12];
                row[k] = rational::one();
                a.push(row);
                b.push(value.clone());
                weights.push(value);
            }
            other => {
                return Err(Error::Internal(format!(
                    "validated vector has no decomposition over the 12 vertices ({other:?})"
                )))
            }
        }
    }
    let dec = ConvexDecomposition { weights };
    debug_assert_eq!(dec.recombine().as_ref(), Some(cv));
    Ok(dec)
}

/// True iff `cv` is not a convex combination of the vertices different from it.
pub fn is_extremal(cv: &CorrelationVector) -> bool {
    let (mut a, mut b) = mixture_system(cv);
    for (k, v) in vertices().iter().enumerate() {
        if &v.cv == cv {
            let mut row = vec![rational::zero(); 12];
            row[k] = rational::one();
            a.push(row);
            b.push(rational::zero());
        }
    }
    lp::feasible_point(&a, &b).is_err()
}

/// Deterministic vertex id of an assignment `(X1, X2, X3)`.
pub fn deterministic_id(x: [u8; 3]) -> usize {
    ((x[0] as usize) << 2) | ((x[1] as usize) << 1) | x[2] as usize
}

/// Outcome of measurement `m` at deterministic vertex `id`.
pub fn deterministic_outcome(id: usize, m: Measurement) -> u8 {
    assignment_bits(id)[m.index()]
}
