use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::space::ParamSpace;

/// `n` points in `[0,1)^dim`; along every axis each of the `n` equal-width
/// strata holds exactly one point.
pub fn latin_hypercube<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(rng);
        for (p, &s) in points.iter_mut().zip(&strata) {
            // open interval so a single point never sits on the cube boundary
            let jitter = loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    break u;
                }
            };
            p[j] = (s as f64 + jitter) / n as f64;
        }
    }
    points
}

/// Latin hypercube warm start for the tuning loop.
pub fn initial_design(space: &ParamSpace, n_init: usize, seed: u64) -> Vec<Vec<f64>> {
    latin_hypercube(n_init, space.dim(), &mut ChaCha8Rng::seed_from_u64(seed))
}
