use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Point, Recorder};

/// Random-perturbation descent with an adaptive step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyConfig {
    pub initial_step: f64,
    /// Trials between step-size reviews.
    pub interval: usize,
    /// Shrink when fewer acceptances than this in an interval.
    pub low: usize,
    /// Grow when more acceptances than this in an interval.
    pub high: usize,
    pub shrink: f64,
    pub grow: f64,
    pub budget: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            interval: 30,
            low: 6,
            high: 12,
            shrink: 0.6,
            grow: 1.5,
            budget: 150,
        }
    }
}

/// Perturbs every parameter by `step * N(0, 1)` and keeps strict
/// improvements. Returns the final point and step size.
pub fn greedy_noisy(
    rec: &mut Recorder,
    start: Point,
    cfg: &GreedyConfig,
    step: Option<f64>,
    rng: &mut impl Rng,
) -> (Point, f64) {
    rec.set_phase("greedy");
    let mut step = step.unwrap_or(cfg.initial_step);
    let mut cur = start;
    let mut accepts = 0;
    for trial in 1..=cfg.budget {
        let cand: Vec<f64> = cur
            .params
            .iter()
            .map(|x| x + step * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let e = rec.eval(&cand);
        if e < cur.energy {
            rec.accept_last();
            cur = Point {
                params: cand,
                energy: e,
            };
            accepts += 1;
        }
        if trial % cfg.interval == 0 {
            if accepts > cfg.high {
                step *= cfg.grow;
            } else if accepts < cfg.low {
                step *= cfg.shrink;
            }
            accepts = 0;
        }
    }
    (cur, step)
}
