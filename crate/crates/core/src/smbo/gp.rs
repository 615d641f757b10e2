//! Gaussian-process surrogate with an anisotropic Matérn-5/2 kernel.
//!
//! Targets are standardized before fitting. Kernel hyperparameters (one
//! length-scale per input, signal variance, noise variance) maximize the log
//! marginal likelihood via multi-start compass search in log space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;
const LOG_LENGTHSCALE: (f64, f64) = (-4.605_170_185_988_091, 2.995_732_273_553_991); // [0.01, 20]
const LOG_SIGNAL: (f64, f64) = (-4.605_170_185_988_091, 4.605_170_185_988_091); // [0.01, 100]
const MAX_NUGGET: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Noise variance held at this value.
    Fixed(f64),
    /// Noise variance estimated, never below the floor.
    Estimated { floor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpOptions {
    pub noise: NoiseModel,
    /// Random starts added to the default (and warm) start.
    pub restarts: usize,
    /// Likelihood evaluations allowed per start.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for GpOptions {
    fn default() -> Self {
        GpOptions {
            noise: NoiseModel::Estimated { floor: 1e-8 },
            restarts: 2,
            max_evals: 150,
            seed: 0,
        }
    }
}

/// Kernel hyperparameters, all stored as natural logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub log_lengthscales: Vec<f64>,
    pub log_signal_var: f64,
    pub log_noise_var: f64,
}

impl GpHyper {
    fn default_for(dim: usize, noise: f64) -> Self {
        GpHyper {
            log_lengthscales: vec![0.3f64.ln(); dim],
            log_signal_var: 0.0,
            log_noise_var: noise.ln(),
        }
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut v = self.log_lengthscales.clone();
        v.push(self.log_signal_var);
        v.push(self.log_noise_var);
        v
    }

    fn from_vec(v: &[f64]) -> Self {
        let d = v.len() - 2;
        GpHyper {
            log_lengthscales: v[..d].to_vec(),
            log_signal_var: v[d],
            log_noise_var: v[d + 1],
        }
    }
}

pub fn matern52(r: f64) -> f64 {
    let s = SQRT5 * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn kernel(a: &[f64], b: &[f64], inv_ls: &[f64], signal: f64) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(inv_ls)
        .map(|((x, y), il)| {
            let d = (x - y) * il;
            d * d
        })
        .sum();
    signal * matern52(r2.sqrt())
}

fn gram(x: &[Vec<f64>], hyper: &GpHyper, nugget: f64) -> DMatrix<f64> {
    let n = x.len();
    let inv_ls: Vec<f64> = hyper.log_lengthscales.iter().map(|l| (-l).exp()).collect();
    let signal = hyper.log_signal_var.exp();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = kernel(&x[i], &x[j], &inv_ls, signal);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] = signal + nugget;
    }
    k
}

fn log_marginal_likelihood(x: &[Vec<f64>], y: &DVector<f64>, hyper: &GpHyper) -> f64 {
    let k = gram(x, hyper, hyper.log_noise_var.exp());
    let Some(chol) = Cholesky::new(k) else {
        return f64::NEG_INFINITY;
    };
    let alpha = chol.solve(y);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    -0.5 * y.dot(&alpha) - log_det - 0.5 * y.len() as f64 * (2.0 * std::f64::consts::PI).ln()
}

/// Maximizes `f` over a box by coordinate steps of shrinking size.
fn compass_search(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, bounds: &[(f64, f64)], max_evals: usize) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = 1.0;
    while step > 0.02 && evals < max_evals {
        let mut improved = false;
        'dims: for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (x[i] + dir * step).clamp(bounds[i].0, bounds[i].1);
                if y[i] == x[i] {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break 'dims;
                }
                if evals >= max_evals {
                    break 'dims;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (x, fx)
}

/// Fitted posterior. Degenerate (constant) data yields a constant mean and
/// zero standard deviation.
#[derive(Clone, Debug)]
pub struct Surrogate {
    x: Vec<Vec<f64>>,
    y_mean: f64,
    y_sd: f64,
    hyper: Option<GpHyper>,
    inv_ls: Vec<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    nugget: f64,
}

impl Surrogate {
    pub fn is_degenerate(&self) -> bool {
        self.hyper.is_none()
    }

    pub fn hyper(&self) -> Option<&GpHyper> {
        self.hyper.as_ref()
    }

    /// Noise variance actually used in the factorization (after any increase).
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Posterior mean and standard deviation of the latent function, in the
    /// units of the training values.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let (Some(hyper), Some(chol)) = (&self.hyper, &self.chol) else {
            return (self.y_mean, 0.0);
        };
        let signal = hyper.log_signal_var.exp();
        let k_star = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| kernel(xi, point, &self.inv_ls, signal)),
        );
        let mean = k_star.dot(&self.alpha);
        let v = chol.l_dirty().solve_lower_triangular(&k_star).expect("triangular factor");
        let var = (signal - v.dot(&v)).max(0.0);
        (self.y_mean + self.y_sd * mean, self.y_sd * var.sqrt())
    }

    pub fn expected_improvement(&self, point: &[f64], best: f64) -> f64 {
        let (mu, sd) = self.predict(point);
        expected_improvement(mu, sd, best)
    }
}

/// `(best − μ)Φ(z) + σφ(z)` with `z = (best − μ)/σ`; `max(best − μ, 0)` when
/// σ is numerically zero.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64) -> f64 {
    let diff = best - mu;
    if sigma < 1e-12 {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (diff * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

/// Fits the surrogate, optionally warm-starting the hyperparameter search.
pub fn gp_fit(points: &[Vec<f64>], values: &[f64], opts: &GpOptions, warm: Option<&GpHyper>) -> Result<Surrogate> {
    if points.len() < 2 || points.len() != values.len() {
        return Err(Error::invalid("surrogate needs at least 2 points with one value each"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("surrogate values must be finite"));
    }
    let dim = points[0].len();
    let n = values.len() as f64;
    let y_mean = values.iter().sum::<f64>() / n;
    let y_sd = (values.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(y_sd > 0.0) {
        return Ok(Surrogate {
            x: points.to_vec(),
            y_mean,
            y_sd: 0.0,
            hyper: None,
            inv_ls: Vec::new(),
            chol: None,
            alpha: DVector::zeros(0),
            nugget: 0.0,
        });
    }
    let y = DVector::from_iterator(values.len(), values.iter().map(|v| (v - y_mean) / y_sd));

    let (noise_bounds, noise0) = match opts.noise {
        NoiseModel::Fixed(v) => ((v.ln(), v.ln()), v),
        NoiseModel::Estimated { floor } => ((floor.ln(), 0.0), floor.max(1e-6)),
    };
    let mut bounds = vec![LOG_LENGTHSCALE; dim];
    bounds.push(LOG_SIGNAL);
    bounds.push(noise_bounds);
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(&bounds).map(|(x, b)| x.clamp(b.0, b.1)).collect() };

    let mut starts = vec![clamp(GpHyper::default_for(dim, noise0).to_vec())];
    if let Some(w) = warm.filter(|w| w.log_lengthscales.len() == dim) {
        starts.push(clamp(w.to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        starts.push(bounds.iter().map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..=hi) } else { lo }).collect());
    }
    let objective = |v: &[f64]| log_marginal_likelihood(points, &y, &GpHyper::from_vec(v));
    let (best, _) = starts
        .into_iter()
        .map(|s| compass_search(objective, s, &bounds, opts.max_evals))
        .fold((Vec::new(), f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc });
    if best.is_empty() {
        return Err(Error::Numerical("no hyperparameters with a positive-definite kernel".into()));
    }
    let hyper = GpHyper::from_vec(&best);

    let mut nugget = hyper.log_noise_var.exp();
    let chol = loop {
        if let Some(c) = Cholesky::new(gram(points, &hyper, nugget)) {
            break c;
        }
        if nugget >= MAX_NUGGET {
            return Err(Error::Numerical("kernel matrix is singular even with nugget 1e-2".into()));
        }
        nugget = (nugget * 10.0).min(MAX_NUGGET);
    };
    let alpha = chol.solve(&y);
    Ok(Surrogate {
        x: points.to_vec(),
        y_mean,
        y_sd,
        inv_ls: hyper.log_lengthscales.iter().map(|l| (-l).exp()).collect(),
        hyper: Some(hyper),
        chol: Some(chol),
        alpha,
        nugget,
    })
}
