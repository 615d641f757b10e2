//! Sequential model-based optimization over the unit cube.
//!
//! A Latin hypercube warm start is followed by one proposal per iteration:
//! fit the GP surrogate to every evaluation so far, maximize expected
//! improvement, evaluate the objective. Evaluations are strictly sequential.

mod design;
mod gp;
mod space;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use design::{initial_design, latin_hypercube};
pub use gp::{expected_improvement, gp_fit, matern52, GpHyper, GpOptions, NoiseModel, Surrogate};
pub use space::{decode_config, encode_config, ParamDef, ParamKind, ParamSpace};

use crate::error::{Error, Result};

const N_CANDIDATES: usize = 1000;
const N_REFINE: usize = 10;
const DUPLICATE_TOL: f64 = 1e-9;
const JITTER: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: Vec<f64>,
    /// Raw-scale parameter values (exponents for log-scaled parameters).
    pub raw: Vec<f64>,
    pub value: f64,
    /// The objective returned a non-finite value; `value` is a penalty.
    pub penalized: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneOptions {
    pub budget: usize,
    pub deadline: Duration,
    pub n_init: usize,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            budget: 160,
            deadline: Duration::from_secs(3600),
            n_init: 16,
            seed: 1,
            noise: NoiseModel::Estimated { floor: 1e-8 },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuneState {
    pub space: ParamSpace,
    pub evaluated: Vec<Evaluation>,
    /// Index of the best evaluation (earliest on ties).
    pub incumbent: Option<usize>,
    /// Hyperparameters of the most recent surrogate fit.
    pub gp: Option<GpHyper>,
    pub budget: usize,
    pub deadline_secs: f64,
    pub n_init: usize,
    pub seed: u64,
    #[serde(skip)]
    surrogate: Option<Surrogate>,
    #[serde(skip)]
    noise: Option<NoiseModel>,
}

impl PartialEq for TuneState {
    // the cached surrogate is derived state and takes no part in equality
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self.evaluated == other.evaluated
            && self.incumbent == other.incumbent
            && self.gp == other.gp
            && self.budget == other.budget
            && self.deadline_secs == other.deadline_secs
            && self.n_init == other.n_init
            && self.seed == other.seed
    }
}

impl TuneState {
    pub fn new(space: ParamSpace, opts: &TuneOptions) -> Self {
        TuneState {
            space,
            evaluated: Vec::new(),
            incumbent: None,
            gp: None,
            budget: opts.budget,
            deadline_secs: opts.deadline.as_secs_f64(),
            n_init: opts.n_init,
            seed: opts.seed,
            surrogate: None,
            noise: Some(opts.noise),
        }
    }

    pub fn incumbent(&self) -> Option<&Evaluation> {
        self.incumbent.map(|i| &self.evaluated[i])
    }

    pub fn surrogate(&self) -> Option<&Surrogate> {
        self.surrogate.as_ref()
    }

    pub fn values(&self) -> Vec<f64> {
        self.evaluated.iter().map(|e| e.value).collect()
    }

    /// Incumbent value after each evaluation.
    pub fn incumbent_trace(&self) -> Vec<f64> {
        self.evaluated
            .iter()
            .scan(f64::INFINITY, |best, e| {
                *best = best.min(e.value);
                Some(*best)
            })
            .collect()
    }

    /// Appends an evaluation and updates the incumbent.
    pub fn record(&mut self, point: Vec<f64>, value: f64, penalized: bool, seconds: f64) -> Result<()> {
        let raw = self.space.raw(&point)?;
        self.evaluated.push(Evaluation {
            point,
            raw,
            value,
            penalized,
            seconds,
        });
        let i = self.evaluated.len() - 1;
        if self.incumbent().is_none_or(|b| value < b.value) {
            self.incumbent = Some(i);
        }
        Ok(())
    }

    /// Refits the surrogate on all evaluations.
    pub fn refit(&mut self) -> Result<()> {
        let points: Vec<Vec<f64>> = self.evaluated.iter().map(|e| e.point.clone()).collect();
        let opts = GpOptions {
            noise: self.noise.unwrap_or(NoiseModel::Estimated { floor: 1e-8 }),
            seed: mix(self.seed, 0x6770 + self.evaluated.len() as u64),
            ..Default::default()
        };
        let gp = gp_fit(&points, &self.values(), &opts, self.gp.as_ref())?;
        if let Some(h) = gp.hyper() {
            self.gp = Some(h.clone());
        }
        self.surrogate = Some(gp);
        Ok(())
    }

    /// Tuning history as CSV: iteration, raw parameter values, objective,
    /// cumulative seconds.
    pub fn history_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["iteration".to_string()];
        header.extend(self.space.names().into_iter().map(str::to_string));
        header.extend(["objective".to_string(), "cumulative_seconds".to_string()]);
        w.write_record(&header)?;
        let mut elapsed = 0.0;
        for (i, e) in self.evaluated.iter().enumerate() {
            elapsed += e.seconds;
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(e.raw.iter().map(f64::to_string));
            rec.push(e.value.to_string());
            rec.push(elapsed.to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D4_9BB1_3311_13EB);
    z ^ (z >> 31)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Coordinate-wise hill climb on expected improvement.
fn refine(gp: &Surrogate, start: Vec<f64>, start_ei: f64, best: f64) -> (Vec<f64>, f64) {
    let (mut x, mut fx) = (start, start_ei);
    let mut step = 0.1;
    for _ in 0..4 {
        for j in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] = (x[j] + dir * step).clamp(0.0, 1.0);
                let fy = gp.expected_improvement(&y, best);
                if fy > fx {
                    x = y;
                    fx = fy;
                }
            }
        }
        step /= 2.0;
    }
    (x, fx)
}

/// Next point to evaluate. Uses the current surrogate when it is informative,
/// a seeded uniform draw otherwise.
pub fn propose_point(state: &TuneState) -> Result<Vec<f64>> {
    if state.evaluated.len() >= state.budget {
        return Err(Error::BudgetExhausted(state.budget));
    }
    let dim = state.space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(state.seed, state.evaluated.len() as u64));
    let mut point = match (state.surrogate.as_ref(), state.incumbent()) {
        (Some(gp), Some(inc)) if !gp.is_degenerate() => {
            let best = inc.value;
            let mut cands: Vec<(Vec<f64>, f64)> = (0..N_CANDIDATES)
                .map(|_| {
                    let p: Vec<f64> = (0..dim).map(|_| rng.gen()).collect();
                    let ei = gp.expected_improvement(&p, best);
                    (p, ei)
                })
                .collect();
            let mut order: Vec<usize> = (0..cands.len()).collect();
            order.sort_by(|&a, &b| cands[b].1.total_cmp(&cands[a].1).then(a.cmp(&b)));
            let refined: Vec<(Vec<f64>, f64)> = order[..N_REFINE]
                .iter()
                .map(|&i| refine(gp, cands[i].0.clone(), cands[i].1, best))
                .collect();
            cands.extend(refined);
            cands
                .into_iter()
                .fold((Vec::new(), f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc })
                .0
        }
        _ => (0..dim).map(|_| rng.gen()).collect(),
    };
    while state.evaluated.iter().any(|e| linf(&e.point, &point) <= DUPLICATE_TOL) {
        for u in point.iter_mut() {
            let moved = *u + rng.gen_range(-JITTER..=JITTER);
            // reflect back into the cube
            *u = if moved < 0.0 { -moved } else if moved > 1.0 { 2.0 - moved } else { moved };
        }
    }
    Ok(point)
}

/// Minimizes `objective` over `space`. Non-finite objective values are
/// recorded as the worst finite value plus the observed range.
pub fn tune<F>(mut objective: F, space: &ParamSpace, opts: &TuneOptions) -> Result<TuneState>
where
    F: FnMut(&[f64]) -> f64,
{
    if opts.n_init < 2 || opts.budget < opts.n_init {
        return Err(Error::invalid(format!(
            "need budget >= n_init >= 2 (budget {}, n_init {})",
            opts.budget, opts.n_init
        )));
    }
    let started = Instant::now();
    let mut state = TuneState::new(space.clone(), opts);

    let mut init = Vec::with_capacity(opts.n_init);
    for p in initial_design(space, opts.n_init, opts.seed) {
        let t = Instant::now();
        let v = objective(&p);
        init.push((p, v, t.elapsed().as_secs_f64()));
    }
    if init.iter().all(|(_, v, _)| !v.is_finite()) {
        return Err(Error::Numerical("objective was non-finite at every initial point".into()));
    }
    let finite: Vec<f64> = init.iter().map(|r| r.1).filter(|v| v.is_finite()).collect();
    let penalty = penalty_for(&finite);
    for (p, v, secs) in init {
        let ok = v.is_finite();
        state.record(p, if ok { v } else { penalty }, !ok, secs)?;
    }

    while state.evaluated.len() < opts.budget && started.elapsed() < opts.deadline {
        state.refit()?;
        let p = propose_point(&state)?;
        let t = Instant::now();
        let v = objective(&p);
        let secs = t.elapsed().as_secs_f64();
        if v.is_finite() {
            state.record(p, v, false, secs)?;
        } else {
            let finite: Vec<f64> =
                state.evaluated.iter().filter(|e| !e.penalized).map(|e| e.value).collect();
            state.record(p, penalty_for(&finite), true, secs)?;
        }
    }
    Ok(state)
}

fn penalty_for(finite: &[f64]) -> f64 {
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    max + if range > 0.0 { range } else { 1.0 }
}
