//! Generalized simulated annealing over the threshold simplex.
//!
//! Moves are drawn from the Tsallis visiting distribution with shape `q_v`,
//! whose tails shrink with the visiting temperature
//!
//! ```text
//! T_v(i) = T_0 · (2^(q_v−1) − 1) / ((1 + i)^(q_v−1) − 1),    i = 1, 2, …
//! ```
//!
//! Each temperature step runs a short chain of `2K` proposals: `K` that move
//! every coordinate, then one move per coordinate. Worse states are accepted
//! with probability `exp(−Δ / T_a)`, `T_a = T_v / (i + 1)`.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use super::{apply_ratio, label_measure, ThresholdVector};
use crate::error::{Error, Result};
use crate::metrics::{Measure, ProbMatrix};

const LOWER: f64 = 1e-6;
const UPPER: f64 = 1.0;
const TAIL_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GsaOptions {
    pub iters: usize,
    /// Visiting distribution shape.
    pub q_v: f64,
    /// Initial visiting temperature.
    pub temp0: f64,
    pub seed: u64,
}

impl Default for GsaOptions {
    fn default() -> Self {
        GsaOptions {
            iters: 500,
            q_v: 2.62,
            temp0: 1.0,
            seed: 1,
        }
    }
}

/// Visiting temperature at 1-based iteration `i` (`T_v(1) = temp0`).
pub fn visiting_temperature(temp0: f64, q_v: f64, i: usize) -> f64 {
    let num = 2f64.powf(q_v - 1.0) - 1.0;
    let den = (1.0 + i as f64).powf(q_v - 1.0) - 1.0;
    temp0 * num / den
}

/// One draw from the Tsallis visiting distribution at temperature `t`
/// (`1 < q_v < 3`).
pub fn tsallis_visit<R: Rng>(rng: &mut R, q_v: f64, t: f64) -> f64 {
    let f1 = (t.ln() / (q_v - 1.0)).exp();
    let f2 = ((4.0 - q_v) * (q_v - 1.0).ln()).exp();
    let f3 = ((2.0 - q_v) * 2f64.ln() / (q_v - 1.0)).exp();
    let f4 = PI.sqrt() * f1 * f2 / (f3 * (3.0 - q_v));
    let f5 = 1.0 / (q_v - 1.0) - 0.5;
    let d1 = 2.0 - f5;
    let f6 = PI * (1.0 - f5) / (PI * (1.0 - f5)).sin() / ln_gamma(d1).exp();
    let sigma = (-(q_v - 1.0) * (f6 / f4).ln() / (3.0 - q_v)).exp();
    let x: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let den = ((q_v - 1.0) * y.abs().ln() / (3.0 - q_v)).exp();
    let v = x / den;
    if v.is_finite() && v.abs() <= TAIL_LIMIT {
        v
    } else {
        TAIL_LIMIT * rng.gen::<f64>() * v.signum()
    }
}

fn wrap(x: f64) -> f64 {
    let range = UPPER - LOWER;
    let w = LOWER + (x - LOWER).rem_euclid(range);
    w.clamp(LOWER, UPPER)
}

fn normalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
}

/// Anneals multiclass thresholds starting from uniform weights and returns
/// the best state visited (normalized) with its measure value.
pub fn optimize_multiclass_gsa(
    prob: &ProbMatrix,
    truth: &[usize],
    measure: Measure,
    opts: &GsaOptions,
) -> Result<(ThresholdVector, f64)> {
    let k = prob.n_classes();
    if k < 3 {
        return Err(Error::invalid(format!("annealing needs at least 3 classes, got {k}")));
    }
    if opts.iters < 1 {
        return Err(Error::invalid("iters must be >= 1"));
    }
    if !(opts.q_v > 1.0 && opts.q_v < 3.0) || !(opts.temp0 > 0.0) {
        return Err(Error::invalid("q_v must lie in (1,3) and temp0 must be positive"));
    }
    if prob.n_rows() != truth.len() {
        return Err(Error::invalid("probabilities and labels differ in length"));
    }
    let eval = |w: &[f64]| -> Result<f64> { label_measure(measure, &apply_ratio(prob, w)?, truth) };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut current = vec![1.0 / k as f64; k];
    let mut current_value = eval(&current)?;
    let mut best = current.clone();
    let mut best_value = current_value;
    let mut candidate = vec![0.0; k];

    for i in 1..=opts.iters {
        let t_visit = visiting_temperature(opts.temp0, opts.q_v, i);
        let t_accept = t_visit / (i as f64 + 1.0);
        // Markov chain at this temperature: k moves of every coordinate, then
        // one move per coordinate
        for step in 0..2 * k {
            candidate.copy_from_slice(&current);
            if step < k {
                for c in candidate.iter_mut() {
                    *c = wrap(*c + tsallis_visit(&mut rng, opts.q_v, t_visit));
                }
            } else {
                let j = step - k;
                candidate[j] = wrap(candidate[j] + tsallis_visit(&mut rng, opts.q_v, t_visit));
            }
            normalize(&mut candidate);
            let value = eval(&candidate)?;
            let delta = value - current_value;
            let accept = delta < 0.0 || rng.gen::<f64>() < (-delta / t_accept).exp();
            if accept {
                current.copy_from_slice(&candidate);
                current_value = value;
                if value < best_value {
                    best.copy_from_slice(&candidate);
                    best_value = value;
                }
            }
        }
    }
    Ok((ThresholdVector::multiclass(&best)?, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_schedule() {
        assert!((visiting_temperature(1.0, 2.62, 1) - 1.0).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for i in 1..100 {
            let t = visiting_temperature(1.0, 2.62, i);
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn visits_are_finite_and_shrink_with_temperature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spread = |t: f64, rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..2001).map(|_| tsallis_visit(rng, 2.62, t).abs()).collect();
            v.sort_by(f64::total_cmp);
            v[1000]
        };
        let hot = spread(1.0, &mut rng);
        let cold = spread(1e-4, &mut rng);
        assert!(hot.is_finite() && cold.is_finite());
        assert!(cold < hot);
    }

    #[test]
    fn rejects_small_k() {
        let p = ProbMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(optimize_multiclass_gsa(&p, &[0], Measure::Mmce, &GsaOptions::default()).is_err());
        let p = ProbMatrix::from_rows(&[vec![0.5, 0.3, 0.2]]).unwrap();
        let zero = GsaOptions { iters: 0, ..Default::default() };
        assert!(optimize_multiclass_gsa(&p, &[0], Measure::Mmce, &zero).is_err());
    }

    #[test]
    fn optimal_start_is_kept() {
        let p = ProbMatrix::from_rows(&[vec![0.6, 0.3, 0.1], vec![0.1, 0.7, 0.2], vec![0.2, 0.2, 0.6]]).unwrap();
        let (_, v) = optimize_multiclass_gsa(&p, &[0, 1, 2], Measure::Mmce, &GsaOptions::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn same_seed_same_result() {
        let p = ProbMatrix::from_rows(&[vec![0.5, 0.3, 0.2], vec![0.45, 0.35, 0.2], vec![0.4, 0.25, 0.35]]).unwrap();
        let opts = GsaOptions { seed: 9, ..Default::default() };
        let a = optimize_multiclass_gsa(&p, &[1, 1, 2], Measure::Mmce, &opts).unwrap();
        let b = optimize_multiclass_gsa(&p, &[1, 1, 2], Measure::Mmce, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finds_under_scored_class() {
        // class 2 never wins the argmax but has the largest share of its own rows
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..30 {
            let lift = 0.01 * (i % 5) as f64;
            rows.push(vec![0.45 - lift, 0.35, 0.2 + lift]);
            truth.push(2);
            rows.push(vec![0.7, 0.2, 0.1]);
            truth.push(0);
            rows.push(vec![0.2, 0.7, 0.1]);
            truth.push(1);
        }
        let p = ProbMatrix::from_rows(&rows).unwrap();
        let argmax = label_measure(Measure::Mmce, &apply_ratio(&p, &[1.0; 3]).unwrap(), &truth).unwrap();
        let (t, v) = optimize_multiclass_gsa(&p, &truth, Measure::Mmce, &GsaOptions::default()).unwrap();
        assert!((argmax - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(v, 0.0);
        assert!(t.as_vec()[2] < t.as_vec()[0]);
    }
}
