//! Optimization drivers over ansatz parameters.
//!
//! All drivers evaluate through a [`Recorder`], which keeps the full
//! trajectory and the best point seen.

mod anneal;
mod global;
mod greedy;
mod inexact;
mod log;
mod powell;

pub use anneal::{
    annealed_variational, annealed_variational_logged, AnnealConfig, AnnealMode, AnnealOutcome,
    HubbardProblem,
};
pub use global::{alternate, global_variational, run_global, run_global_around, GlobalConfig};
pub use greedy::{greedy_noisy, GreedyConfig};
pub use inexact::{
    inexact_optimize, Comparator, ExactComparator, InexactConfig, InexactOutcome, SampledCircuit,
};
pub use log::{EvalLog, Logged, LoggedEval};
pub use powell::{powell, PowellConfig, PowellOutcome};

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::ansatz::Circuit;
use crate::error::{Error, Result};
use crate::operator::SparseOperator;
use crate::state::StateVector;

/// One energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub energy: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// A function of the ansatz parameters to minimize.
pub trait Objective: Sync {
    fn n_params(&self) -> usize;

    fn evaluate(&self, params: &[f64]) -> Evaluation;

    fn is_exact(&self) -> bool {
        true
    }

    /// Evaluations performed so far.
    fn evaluations(&self) -> u64;
}

/// Exact energy `<psi(θ)|H|psi(θ)>` of a circuit applied to a fixed state.
#[derive(Debug)]
pub struct CircuitObjective<'a> {
    pub circuit: &'a Circuit,
    pub initial: &'a StateVector,
    pub op: &'a SparseOperator,
    count: AtomicU64,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(
        circuit: &'a Circuit,
        initial: &'a StateVector,
        op: &'a SparseOperator,
    ) -> Result<Self> {
        if op.dim() != initial.dim() {
            return Err(Error::Contract(format!(
                "operator dimension {} differs from state dimension {}",
                op.dim(),
                initial.dim()
            )));
        }
        Ok(Self {
            circuit,
            initial,
            op,
            count: AtomicU64::new(0),
        })
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.circuit.prepare(self.initial, params)
    }
}

impl Objective for CircuitObjective<'_> {
    fn n_params(&self) -> usize {
        self.circuit.n_params
    }

    fn evaluate(&self, params: &[f64]) -> Evaluation {
        self.count.fetch_add(1, Ordering::Relaxed);
        let psi = self
            .circuit
            .prepare(self.initial, params)
            .expect("parameter count checked by the driver");
        Evaluation {
            energy: psi.expectation(self.op),
            std_error: 0.0,
            samples: 0,
        }
    }

    fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// A closure objective, mainly for tests.
pub struct FnObjective<F> {
    n: usize,
    f: F,
    count: AtomicU64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self {
            n,
            f,
            count: AtomicU64::new(0),
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn n_params(&self) -> usize {
        self.n
    }

    fn evaluate(&self, params: &[f64]) -> Evaluation {
        self.count.fetch_add(1, Ordering::Relaxed);
        Evaluation {
            energy: (self.f)(params),
            std_error: 0.0,
            samples: 0,
        }
    }

    fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Parameters with their energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub params: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval: u64,
    pub phase: String,
    pub params: Vec<f64>,
    pub energy: f64,
    pub std_error: f64,
    pub samples: u64,
    pub accepted: bool,
}

/// Trajectory and result of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRecord {
    pub seed: u64,
    pub trace: Vec<TraceEntry>,
    pub best: Option<Point>,
    pub evaluations: u64,
    pub samples: u64,
    pub phases: Vec<String>,
    /// Set when a line search failed and a result was returned early.
    pub degraded: bool,
    pub notes: Vec<String>,
}

impl OptRecord {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            trace: Vec::new(),
            best: None,
            evaluations: 0,
            samples: 0,
            phases: Vec::new(),
            degraded: false,
            notes: Vec::new(),
        }
    }

    pub fn best_energy(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.energy)
    }

    /// One JSON object per evaluation.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.trace {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Appends another record's trajectory, renumbering its evaluations.
    pub fn extend(&mut self, other: OptRecord) {
        let offset = self.evaluations;
        for mut e in other.trace {
            e.eval += offset;
            self.trace.push(e);
        }
        self.evaluations += other.evaluations;
        self.samples += other.samples;
        for p in other.phases {
            if !self.phases.contains(&p) {
                self.phases.push(p);
            }
        }
        self.degraded |= other.degraded;
        self.notes.extend(other.notes);
        if let Some(b) = other.best {
            if b.energy < self.best_energy() {
                self.best = Some(b);
            }
        }
    }
}

type Checkpoint<'a> = Box<dyn FnMut(&OptRecord) + 'a>;

/// Evaluates an objective and records every call.
pub struct Recorder<'a> {
    obj: &'a dyn Objective,
    pub record: OptRecord,
    phase: String,
    keep_params: bool,
    checkpoint: Option<(u64, Checkpoint<'a>)>,
}

impl<'a> Recorder<'a> {
    pub fn new(obj: &'a dyn Objective, seed: u64) -> Self {
        Self {
            obj,
            record: OptRecord::new(seed),
            phase: String::new(),
            keep_params: true,
            checkpoint: None,
        }
    }

    /// Calls `f` with the record after every `every` evaluations.
    pub fn with_checkpoint(mut self, every: u64, f: impl FnMut(&OptRecord) + 'a) -> Self {
        self.checkpoint = Some((every.max(1), Box::new(f)));
        self
    }

    /// Drops parameter vectors from the trace to save memory.
    pub fn without_params(mut self) -> Self {
        self.keep_params = false;
        self
    }

    pub fn n_params(&self) -> usize {
        self.obj.n_params()
    }

    pub fn set_phase(&mut self, phase: &str) {
        self.phase = phase.to_string();
        if !self.record.phases.iter().any(|p| p == phase) {
            self.record.phases.push(phase.to_string());
        }
    }

    pub fn eval(&mut self, params: &[f64]) -> f64 {
        let e = self.obj.evaluate(params);
        let r = &mut self.record;
        r.evaluations += 1;
        r.samples += e.samples;
        r.trace.push(TraceEntry {
            eval: r.evaluations,
            phase: self.phase.clone(),
            params: if self.keep_params {
                params.to_vec()
            } else {
                Vec::new()
            },
            energy: e.energy,
            std_error: e.std_error,
            samples: e.samples,
            accepted: false,
        });
        if e.energy < r.best_energy() {
            r.best = Some(Point {
                params: params.to_vec(),
                energy: e.energy,
            });
        }
        if let Some((every, f)) = &mut self.checkpoint {
            if r.evaluations % *every == 0 {
                f(r);
            }
        }
        e.energy
    }

    pub fn point(&mut self, params: Vec<f64>) -> Point {
        let energy = self.eval(&params);
        Point { params, energy }
    }

    /// Marks the latest evaluation as an accepted move.
    pub fn accept_last(&mut self) {
        if let Some(e) = self.record.trace.last_mut() {
            e.accepted = true;
        }
    }

    pub fn into_record(self) -> OptRecord {
        self.record
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorder_tracks_best() {
        let obj = FnObjective::new(1, |x: &[f64]| (x[0] - 1.0).powi(2));
        let mut rec = Recorder::new(&obj, 7);
        for x in [0.0, 2.5, 0.9, 3.0] {
            rec.eval(&[x]);
        }
        let r = rec.into_record();
        assert_eq!(r.evaluations, 4);
        assert_eq!(obj.evaluations(), 4);
        assert_eq!(r.best.unwrap().params, vec![0.9]);
    }

    #[test]
    fn jsonl_has_one_line_per_evaluation() {
        let obj = FnObjective::new(2, |x: &[f64]| x[0] + x[1]);
        let mut rec = Recorder::new(&obj, 0);
        rec.set_phase("greedy");
        rec.eval(&[0.0, 1.0]);
        rec.eval(&[1.0, 1.0]);
        let mut buf = Vec::new();
        rec.record.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let first: TraceEntry = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.phase, "greedy");
    }

    #[test]
    fn checkpoint_fires_periodically() {
        let obj = FnObjective::new(1, |x: &[f64]| x[0]);
        let mut hits = 0;
        {
            let mut rec = Recorder::new(&obj, 0).with_checkpoint(3, |_| hits += 1);
            for i in 0..10 {
                rec.eval(&[i as f64]);
            }
        }
        assert_eq!(hits, 3);
    }
}
