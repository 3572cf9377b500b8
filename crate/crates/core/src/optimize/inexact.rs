use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Objective, OptRecord, Point, TraceEntry};
use crate::ansatz::Circuit;
use crate::error::Result;
use crate::measure::{
    compare_running, CompareConfig, Comparison, MeasurementPlan, RunningEstimate, Verdict,
};
use crate::state::StateVector;

/// Decides which of two parameter points has the lower energy.
pub trait Comparator {
    type Point;

    fn n_params(&self) -> usize;

    fn point(&self, params: &[f64]) -> Result<Self::Point>;

    fn compare(
        &self,
        a: &mut Self::Point,
        b: &mut Self::Point,
        rng: &mut ChaCha8Rng,
    ) -> Result<Comparison>;
}

/// Circuit states compared by simulated measurement.
pub struct SampledCircuit<'a> {
    pub circuit: &'a Circuit,
    pub initial: &'a StateVector,
    pub plan: &'a MeasurementPlan,
    pub compare: CompareConfig,
}

impl Comparator for SampledCircuit<'_> {
    type Point = RunningEstimate;

    fn n_params(&self) -> usize {
        self.circuit.n_params
    }

    fn point(&self, params: &[f64]) -> Result<RunningEstimate> {
        RunningEstimate::new(self.circuit.prepare(self.initial, params)?, self.plan)
    }

    fn compare(
        &self,
        a: &mut RunningEstimate,
        b: &mut RunningEstimate,
        rng: &mut ChaCha8Rng,
    ) -> Result<Comparison> {
        compare_running(a, b, self.plan, rng, &self.compare)
    }
}

/// Noiseless comparisons through an exact objective.
pub struct ExactComparator<'a>(pub &'a dyn Objective);

impl Comparator for ExactComparator<'_> {
    type Point = f64;

    fn n_params(&self) -> usize {
        self.0.n_params()
    }

    fn point(&self, params: &[f64]) -> Result<f64> {
        Ok(self.0.evaluate(params).energy)
    }

    fn compare(&self, a: &mut f64, b: &mut f64, _: &mut ChaCha8Rng) -> Result<Comparison> {
        let verdict = if b < a {
            Verdict::BBetter
        } else if a < b {
            Verdict::ABetter
        } else {
            Verdict::Undecided
        };
        Ok(Comparison {
            verdict,
            mean_a: *a,
            mean_b: *b,
            std_error: 0.0,
            leader: if b < a {
                Verdict::BBetter
            } else {
                Verdict::ABetter
            },
            samples_a: 0,
            samples_b: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InexactConfig {
    /// Step tried on each parameter in the first pass.
    pub initial_constant: f64,
    /// Between passes the constant is scaled by a factor uniform in
    /// `[1 - perturbation, 1 + perturbation]`.
    pub perturbation: f64,
    /// Scale applied to the constant after a pass without accepted moves.
    /// With `None` such a pass ends the search.
    pub stall_factor: Option<f64>,
    /// A pass without accepted moves at a constant below this ends the search.
    pub min_constant: f64,
    pub max_passes: usize,
    /// Accept a move whose comparison ran out of samples while its sampled
    /// mean was lower.
    pub follow_leader: bool,
}

impl Default for InexactConfig {
    fn default() -> Self {
        Self {
            initial_constant: 0.3,
            perturbation: 0.3,
            stall_factor: Some(0.7),
            min_constant: 0.02,
            max_passes: 200,
            follow_leader: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InexactOutcome {
    pub params: Vec<f64>,
    /// Distinct parameter points sampled, including the start.
    pub points: u64,
    /// Shots of every set, summed over all points.
    pub samples: u64,
    pub passes: usize,
    pub comparisons: u64,
    pub record: OptRecord,
}

impl InexactOutcome {
    pub fn samples_per_point(&self) -> f64 {
        self.samples as f64 / self.points.max(1) as f64
    }
}

/// Coordinate search from the origin: each pass visits the parameters in a
/// fresh random order and tries `±c` on each, keeping moves that win a
/// significant comparison.
pub fn inexact_optimize<C: Comparator>(
    cmp: &C,
    cfg: &InexactConfig,
    seed: u64,
) -> Result<InexactOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cmp.n_params();
    let mut record = OptRecord::new(seed);
    record.phases.push("inexact".into());
    let mut x = vec![0.0; n];
    let mut cur = cmp.point(&x)?;
    let mut c = cfg.initial_constant;
    let mut points = 1u64;
    let mut samples = 0u64;
    let mut comparisons = 0u64;
    let mut passes = 0;
    let mut order: Vec<usize> = (0..n).collect();
    while passes < cfg.max_passes {
        passes += 1;
        order.shuffle(&mut rng);
        let mut accepted = false;
        for &k in &order {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sign * c;
                let mut cand = cmp.point(&y)?;
                let r = cmp.compare(&mut cur, &mut cand, &mut rng)?;
                points += 1;
                comparisons += 1;
                samples += r.samples_a + r.samples_b;
                record.evaluations += 1;
                record.samples += r.samples_a + r.samples_b;
                let take = r.verdict == Verdict::BBetter
                    || (cfg.follow_leader
                        && r.verdict == Verdict::Undecided
                        && r.leader == Verdict::BBetter);
                record.trace.push(TraceEntry {
                    eval: record.evaluations,
                    phase: "inexact".into(),
                    params: y.clone(),
                    energy: r.mean_b,
                    std_error: r.std_error,
                    samples: r.samples_b,
                    accepted: take,
                });
                if take {
                    x = y;
                    cur = cand;
                    accepted = true;
                    record.best = Some(Point {
                        params: x.clone(),
                        energy: r.mean_b,
                    });
                    break;
                }
            }
        }
        if accepted {
            c *= rng.random_range(1.0 - cfg.perturbation..=1.0 + cfg.perturbation);
        } else {
            match cfg.stall_factor {
                Some(f) if c >= cfg.min_constant => c *= f,
                _ => break,
            }
        }
    }
    record.notes.push(format!("final constant {c}"));
    Ok(InexactOutcome {
        params: x,
        points,
        samples,
        passes,
        comparisons,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::FnObjective;

    #[test]
    fn noiseless_reduces_to_coordinate_descent() {
        let obj = FnObjective::new(2, |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] + 0.3).powi(2));
        let out = inexact_optimize(&ExactComparator(&obj), &InexactConfig::default(), 4).unwrap();
        let accepted: Vec<f64> = out
            .record
            .trace
            .iter()
            .filter(|e| e.accepted)
            .map(|e| e.energy)
            .collect();
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
        assert!((out.params[0] - 0.5).abs() < 0.03);
        assert!((out.params[1] + 0.3).abs() < 0.03);
        assert_eq!(out.samples, 0);
    }
}
