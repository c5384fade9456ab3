//! Distortion evaluation and a restarted gradient search for low-distortion
//! embeddings of a finite metric into `l_p^d`.
//!
//! The search minimizes a smoothed log-distortion. With
//! `r(x, y) = ln ||f(x) - f(y)||_p - ln d(x, y)` and
//! `lse_b(v) = (1/b) ln sum exp(b v)`, the objective is
//! `lse_b(r) + lse_b(-r)`, which is invariant under scaling of `f`, bounds
//! `max r - min r` (the exact log-distortion) from above, and exceeds it by at
//! most `2 ln(#pairs) / b`. The temperature `b` doubles on a fixed schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::lp::{abs_pow, lp_dist_unchecked, PExponent};
use crate::metric::MetricMatrix;

/// Largest point count accepted by [`optimize_embedding`].
pub const MAX_POINTS: usize = 3000;

/// Exponent used for descent when the requested norm is `l_1`.
pub const L1_SURROGATE_P: f64 = 1.001;

const STEP_FLOOR: f64 = 1e-7;

/// Expansion, contraction and their witnesses for one embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub expansion: f64,
    pub contraction: f64,
    pub distortion: f64,
    pub witness_expansion: (usize, usize),
    pub witness_contraction: (usize, usize),
}

/// Exact distortion of `f` over all unordered pairs of `m`. Ties resolve to the
/// lexicographically smallest pair.
pub fn evaluate_distortion(m: &MetricMatrix, f: &Embedding) -> Result<DistortionReport> {
    let n = m.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "distortion needs at least 2 points, got {n}"
        )));
    }
    if f.len() != n {
        return Err(Error::MissingCoordinates {
            expected: n,
            found: f.len(),
        });
    }
    let mut expansion = (f64::NEG_INFINITY, (0, 0));
    let mut contraction = (f64::NEG_INFINITY, (0, 0));
    for (i, j) in m.pairs() {
        let target = m.get(i, j);
        if !(target > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "metric distance d({i},{j}) = {target} is not positive"
            )));
        }
        let image = f.dist(i, j);
        if image == 0.0 {
            return Err(Error::CoincidentImages(i, j));
        }
        let up = image / target;
        let down = target / image;
        if up > expansion.0 {
            expansion = (up, (i, j));
        }
        if down > contraction.0 {
            contraction = (down, (i, j));
        }
    }
    Ok(DistortionReport {
        expansion: expansion.0,
        contraction: contraction.0,
        distortion: expansion.0 * contraction.0,
        witness_expansion: expansion.1,
        witness_contraction: contraction.1,
    })
}

/// Knobs of [`optimize_embedding`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub step_size: f64,
    /// Step multiplier after an accepted step; rejected steps halve it.
    pub step_growth: f64,
    pub beta_initial: f64,
    /// The temperature doubles after every this many iterations.
    pub beta_doubling_interval: usize,
    pub beta_max: f64,
    pub seed: u64,
    /// Pair differences with smaller norm contribute no gradient.
    pub epsilon_norm: f64,
    /// Run restarts on the rayon pool. The result does not depend on it.
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            iterations: 2000,
            step_size: 0.05,
            step_growth: 1.1,
            beta_initial: 10.0,
            beta_doubling_interval: 400,
            beta_max: 10240.0,
            seed: 0,
            epsilon_norm: 1e-12,
            parallel: true,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("optimizer {what} must be positive")));
        if self.restarts == 0 {
            return bad("restarts");
        }
        if self.iterations == 0 {
            return bad("iterations");
        }
        if !(self.step_size > 0.0) {
            return bad("step size");
        }
        if !(self.beta_initial > 0.0) || !(self.beta_max >= self.beta_initial) {
            return Err(Error::InvalidArgument(
                "temperature schedule must be positive and nondecreasing".into(),
            ));
        }
        if !(self.step_growth >= 1.0) {
            return Err(Error::InvalidArgument("step growth must be at least 1".into()));
        }
        if self.beta_doubling_interval == 0 {
            return bad("doubling interval");
        }
        if !(self.epsilon_norm > 0.0) {
            return bad("epsilon_norm");
        }
        Ok(())
    }

    /// Temperature in effect at iteration `it`.
    pub fn beta_at(&self, it: usize) -> f64 {
        let doublings = (it / self.beta_doubling_interval).min(64) as i32;
        (self.beta_initial * 2f64.powi(doublings)).min(self.beta_max)
    }
}

/// The smoothed log-distortion of point sets of a fixed metric.
pub struct SmoothedObjective<'a> {
    metric: &'a MetricMatrix,
    log_targets: Vec<f64>,
    dim: usize,
    p: f64,
    epsilon_norm: f64,
}

/// Objective value and the exact log-distortion at the same point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub smoothed: f64,
    pub exact_log_distortion: f64,
}

impl<'a> SmoothedObjective<'a> {
    pub fn new(metric: &'a MetricMatrix, dim: usize, p: f64, epsilon_norm: f64) -> Self {
        let log_targets = metric.pairs().map(|(i, j)| metric.get(i, j).ln()).collect();
        SmoothedObjective {
            metric,
            log_targets,
            dim,
            p,
            epsilon_norm,
        }
    }

    fn log_ratios(&self, coords: &[f64]) -> Vec<f64> {
        let d = self.dim;
        self.metric
            .pairs()
            .zip(&self.log_targets)
            .map(|((i, j), lt)| {
                let norm = lp_dist_unchecked(&coords[i * d..(i + 1) * d], &coords[j * d..(j + 1) * d], self.p);
                norm.max(self.epsilon_norm).ln() - lt
            })
            .collect()
    }

    /// Value at `coords` (row-major, `n x dim`) and temperature `beta`.
    pub fn value(&self, coords: &[f64], beta: f64) -> ObjectiveValue {
        let r = self.log_ratios(coords);
        let (up, _) = lse(&r, beta, 1.0);
        let (down, _) = lse(&r, beta, -1.0);
        ObjectiveValue {
            smoothed: up + down,
            exact_log_distortion: exact_spread(&r),
        }
    }

    /// Value and gradient with respect to `coords`.
    pub fn value_and_gradient(&self, coords: &[f64], beta: f64) -> (ObjectiveValue, Vec<f64>) {
        let d = self.dim;
        let p = self.p;
        let r = self.log_ratios(coords);
        let (up, w_up) = lse(&r, beta, 1.0);
        let (down, w_down) = lse(&r, beta, -1.0);
        let mut grad = vec![0.0; coords.len()];
        let mut diff = vec![0.0; d];
        for (idx, (i, j)) in self.metric.pairs().enumerate() {
            let weight = w_up[idx] - w_down[idx];
            if weight == 0.0 {
                continue;
            }
            let (xi, xj) = (&coords[i * d..(i + 1) * d], &coords[j * d..(j + 1) * d]);
            for ((slot, a), b) in diff.iter_mut().zip(xi).zip(xj) {
                *slot = a - b;
            }
            let norm = lp_dist_unchecked(xi, xj, p);
            if norm < self.epsilon_norm {
                continue;
            }
            // d ln||v||_p / dv_c = sign(v_c) |v_c|^{p-1} / ||v||_p^p
            let denom = abs_pow(norm, p);
            for (c, v) in diff.iter().enumerate() {
                let g = weight * v.signum() * abs_pow(*v, p - 1.0) / denom;
                grad[i * d + c] += g;
                grad[j * d + c] -= g;
            }
        }
        (
            ObjectiveValue {
                smoothed: up + down,
                exact_log_distortion: exact_spread(&r),
            },
            grad,
        )
    }
}

fn exact_spread(r: &[f64]) -> f64 {
    let (lo, hi) = r
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// `(1/beta) ln sum exp(beta * sign * r)` and its softmax weights.
fn lse(r: &[f64], beta: f64, sign: f64) -> (f64, Vec<f64>) {
    let top = r.iter().map(|x| sign * x).fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = r.iter().map(|x| (beta * (sign * x - top)).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    (top + total.ln() / beta, w)
}

/// Best embedding found and how it was found.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub embedding: Embedding,
    pub report: DistortionReport,
    /// Restart that produced the returned embedding.
    pub best_restart: usize,
    /// Best exact distortion reached in each restart.
    pub restart_distortions: Vec<f64>,
}

/// Searches for an embedding of `m` into `l_p^dim` with small distortion.
///
/// Every restart starts from an independent Gaussian configuration scaled by
/// the mean distance of `m` and runs gradient descent on the smoothed
/// objective; a step that increases the objective is rejected and halves the
/// step size (down to 1e-7), an accepted one multiplies it by `step_growth`. The best iterate of each restart is scored by exact distortion
/// at the requested `p`, and the minimum over restarts wins, ties going to the
/// lower restart index. For `p = 1` descent runs at [`L1_SURROGATE_P`].
pub fn optimize_embedding(
    m: &MetricMatrix,
    p: PExponent,
    dim: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    let n = m.len();
    if n > MAX_POINTS {
        return Err(Error::Capacity {
            what: "optimizer point count",
            value: n as u64,
            max: MAX_POINTS as u64,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {n}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if let Some((i, j)) = m.pairs().find(|&(i, j)| !(m.get(i, j) > 0.0 && m.get(i, j).is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "metric distance d({i},{j}) = {} is not positive and finite",
            m.get(i, j)
        )));
    }

    let run = |restart: usize| run_restart(m, p, dim, cfg, restart);
    let results: Vec<Result<(Vec<f64>, f64)>> = if cfg.parallel {
        (0..cfg.restarts).into_par_iter().map(run).collect()
    } else {
        (0..cfg.restarts).map(run).collect()
    };

    let mut restart_distortions = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for (idx, res) in results.into_iter().enumerate() {
        let (coords, distortion) = res?;
        restart_distortions.push(distortion);
        if best.as_ref().is_none_or(|b| distortion < b.2) {
            best = Some((idx, coords, distortion));
        }
    }
    let (best_restart, coords, _) = best.expect("at least one restart");
    let embedding = Embedding::new(n, dim, p, coords)?;
    let report = evaluate_distortion(m, &embedding)?;
    Ok(OptimizeOutcome {
        embedding,
        report,
        best_restart,
        restart_distortions,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Exact distortion at the reporting exponent, infinite on collapse.
fn exact_distortion(m: &MetricMatrix, coords: &[f64], dim: usize, p: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, j) in m.pairs() {
        let image = lp_dist_unchecked(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim], p);
        if image == 0.0 {
            return f64::INFINITY;
        }
        let r = image / m.get(i, j);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi / lo
}

fn run_restart(
    m: &MetricMatrix,
    p: PExponent,
    dim: usize,
    cfg: &OptimizerConfig,
    restart: usize,
) -> Result<(Vec<f64>, f64)> {
    let report_p = p.get();
    let descent_p = if report_p == 1.0 { L1_SURROGATE_P } else { report_p };
    let objective = SmoothedObjective::new(m, dim, descent_p, cfg.epsilon_norm);

    let mut rng = restart_rng(cfg.seed, restart);
    let scale = m.mean_distance();
    let mut x: Vec<f64> = (0..m.len() * dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let mut best_x = x.clone();
    let mut best_distortion = exact_distortion(m, &x, dim, report_p);

    let mut beta = cfg.beta_at(0);
    let mut eta = cfg.step_size;
    let (mut value, mut grad) = objective.value_and_gradient(&x, beta);
    let mut trial = vec![0.0; x.len()];
    for it in 1..=cfg.iterations {
        let next_beta = cfg.beta_at(it);
        if next_beta != beta {
            beta = next_beta;
            (value, grad) = objective.value_and_gradient(&x, beta);
        }
        for ((t, xi), g) in trial.iter_mut().zip(&x).zip(&grad) {
            *t = xi - eta * g;
        }
        let (trial_value, trial_grad) = objective.value_and_gradient(&trial, beta);
        if trial_value.smoothed.is_finite() && trial_value.smoothed <= value.smoothed {
            std::mem::swap(&mut x, &mut trial);
            value = trial_value;
            eta *= cfg.step_growth;
            grad = trial_grad;
            let distortion = exact_distortion(m, &x, dim, report_p);
            if distortion < best_distortion {
                best_distortion = distortion;
                best_x.copy_from_slice(&x);
            }
        } else {
            eta = (eta * 0.5).max(STEP_FLOOR);
        }
    }
    if !best_distortion.is_finite() {
        return Err(Error::Internal(format!(
            "restart {restart} never left a collapsed configuration"
        )));
    }
    Ok((best_x, best_distortion))
}
