//! Independent oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specker_core::polytope::vertices;
use specker_core::scenario::CorrelationVector;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector of length `n` with denominators dividing the
/// sum of `n` integers drawn from `0..=res`.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, res: i64) -> Vec<Q> {
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=res)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.iter().map(|&w| q(w, total)).collect();
        }
    }
}

/// Mixture of the vertices with the given ids.
pub fn mixture(ids: &[usize], weights: &[Q]) -> CorrelationVector {
    let vs = vertices();
    let points: Vec<&CorrelationVector> = ids.iter().map(|&i| &vs[i].cv).collect();
    CorrelationVector::mixture(&points, weights).unwrap()
}

/// Random mixture of all twelve vertices. Sparse weights (most set to zero)
/// reach the faces more often than dense ones.
pub fn random_point(rng: &mut ChaCha8Rng) -> CorrelationVector {
    let mut w = random_weights(rng, 12, 20);
    if rng.gen_bool(0.5) {
        let keep = rng.gen_range(1..=3);
        let mut ids: Vec<usize> = (0..12).collect();
        for k in 0..12 {
            let j = rng.gen_range(k..12);
            ids.swap(k, j);
        }
        let mut sparse = vec![Q::zero(); 12];
        let total: Q = ids[..keep].iter().map(|&i| w[i].clone()).sum();
        if total.is_zero() {
            sparse[ids[0]] = Q::one();
        } else {
            for &i in &ids[..keep] {
                sparse[i] = &w[i] / &total;
            }
        }
        w = sparse;
    }
    mixture(&(0..12).collect::<Vec<_>>(), &w)
}

/// Point with `R3 = 2` exactly: a deterministic mixture pushed towards the
/// all-anticorrelated vertex until it meets that facet.
pub fn r3_boundary_point(rng: &mut ChaCha8Rng) -> CorrelationVector {
    let base_w = random_weights(rng, 8, 10);
    let base = mixture(&(0..8).collect::<Vec<_>>(), &base_w);
    let r = anti(&base, 0) + anti(&base, 1) + anti(&base, 2);
    let two = Q::from_integer(2.into());
    let three = Q::from_integer(3.into());
    let lambda = (&two - &r) / (&three - &r);
    let points = [&vertices()[11].cv, &base];
    CorrelationVector::mixture(&points, &[lambda.clone(), Q::one() - lambda]).unwrap()
}

/// Anticorrelation `v[pair][01] + v[pair][10]` read straight from the table.
pub fn anti(cv: &CorrelationVector, pair: usize) -> Q {
    let t = &cv.entries()[pair];
    &t[1] + &t[2]
}

/// `|p_i - p_j| <= w <= p_i + p_j <= 2 - w` for all three pairs, with six
/// parameters ordered `(w12, w23, w13, p1, p2, p3)`.
pub fn chains_hold(six: &[Q; 6]) -> bool {
    let two = Q::from_integer(2.into());
    [(0, 3, 4), (1, 4, 5), (2, 3, 5)].iter().all(|&(w, i, j)| {
        let (w, pi, pj) = (&six[w], &six[i], &six[j]);
        (pi - pj).abs() <= *w && *w <= pi + pj && pi + pj <= &two - w
    })
}

/// KS values `(R0, R1, R2, R3)` computed from the raw table.
pub fn r_values(cv: &CorrelationVector) -> [Q; 4] {
    let (a, b, c) = (anti(cv, 0), anti(cv, 1), anti(cv, 2));
    [&a - &b - &c, &b - &c - &a, &c - &a - &b, &a + &b + &c]
}

/// Closed-form joint measurability of two unbiased unsharp qubit
/// measurements with Bloch vectors `b_i = η n_i`:
/// `|b_i + b_j| + |b_i - b_j| <= 2`.
pub fn compatible(eta: f64, angle: f64) -> bool {
    compatibility_slack(eta, angle) <= 0.0
}

pub fn compatibility_slack(eta: f64, angle: f64) -> f64 {
    let sum = 2.0 * eta * (angle / 2.0).cos();
    let diff = 2.0 * eta * (angle / 2.0).sin();
    sum.abs() + diff.abs() - 2.0
}

/// `η` at which two sharp-axis measurements at `angle` stop being jointly
/// measurable.
pub fn compatibility_threshold(angle: f64) -> f64 {
    1.0 / ((angle / 2.0).cos().abs() + (angle / 2.0).sin().abs())
}
