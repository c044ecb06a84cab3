//! Seeded random points of the no-disturbance polytope, for demos and
//! fuzzing. Points are rational mixtures of the twelve vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::polytope::vertices;
use crate::rational::{q, Q};
use crate::scenario::CorrelationVector;

/// Granularity of the random mixture weights.
pub const WEIGHT_RESOLUTION: i64 = 1000;

/// `count` random points; identical seeds give identical output.
pub fn random_points(seed: u64, count: usize) -> Result<Vec<CorrelationVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs = vertices();
    (0..count)
        .map(|_| {
            let raw: Vec<i64> = (0..vs.len()).map(|_| rng.gen_range(0..=WEIGHT_RESOLUTION)).collect();
            let total: i64 = raw.iter().sum::<i64>().max(1);
            let mut weights: Vec<Q> = raw.iter().map(|&w| q(w, total)).collect();
            if raw.iter().all(|&w| w == 0) {
                weights[0] = q(1, 1);
            }
            let points: Vec<&CorrelationVector> = vs.iter().map(|v| &v.cv).collect();
            CorrelationVector::mixture(&points, &weights)
        })
        .collect()
}
