use std::sync::Arc;

use anyhow::{Context, Result};
use hvqe::ansatz::{build_rxx, chem_hv, rxx_circuit, Circuit, Family};
use hvqe::exact::{
    energy_and_overlap, ground_space_op, hf_initial_state, EnergyReport, GroundInfo, LanczosOptions,
};
use hvqe::hamiltonian::{commuting_sets, group_chemistry, read_fcidump, ChemHamiltonian};
use hvqe::measure::MeasurementPlan;
use hvqe::optimize::{
    annealed_variational_logged, global_variational, inexact_optimize, CircuitObjective, EvalLog,
    ExactComparator, HubbardProblem, Logged, Objective, OptRecord, Recorder, SampledCircuit,
};
use hvqe::{SparseOperator, StateVector};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, Noise, ProblemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Hubbard,
    Chemistry,
}

/// Summary of one run, shaped like a row of the result tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub kind: ProblemKind,
    pub problem: String,
    /// Sites of the ladder or spatial orbitals of the molecule.
    pub sites: usize,
    pub ansatz: String,
    pub steps: usize,
    pub method: Method,
    pub noise: Noise,
    pub seed: u64,
    pub exact_energy: f64,
    pub energy: f64,
    pub error: f64,
    pub overlap: f64,
    pub error_seq: Option<f64>,
    pub overlap_seq: Option<f64>,
    /// Energy error in milli-Hartree, for molecules.
    pub error_mha: Option<f64>,
    pub evaluations: u64,
    pub samples: u64,
    pub runtime_s: f64,
}

pub struct Outcome {
    pub row: ResultRow,
    pub params: Vec<f64>,
    pub sequential_params: Option<Vec<f64>>,
    pub record: OptRecord,
}

enum Built {
    Hubbard(Box<HubbardProblem>),
    Chemistry {
        initial: StateVector,
        op: SparseOperator,
        ground: GroundInfo,
        orbitals: usize,
        core_energy: f64,
    },
}

struct Setup {
    built: Built,
    circuit: Circuit,
}

impl Setup {
    fn initial(&self) -> &StateVector {
        match &self.built {
            Built::Hubbard(p) => &p.initial,
            Built::Chemistry { initial, .. } => initial,
        }
    }

    fn op(&self) -> &SparseOperator {
        match &self.built {
            Built::Hubbard(p) => &p.op,
            Built::Chemistry { op, .. } => op,
        }
    }

    fn ground(&self) -> &GroundInfo {
        match &self.built {
            Built::Hubbard(p) => &p.ground,
            Built::Chemistry { ground, .. } => ground,
        }
    }

    fn report(&self, params: &[f64]) -> Result<EnergyReport> {
        let psi = self.circuit.prepare(self.initial(), params)?;
        Ok(energy_and_overlap(&psi, self.op(), self.ground()))
    }
}

fn build(cfg: &ExperimentConfig) -> Result<Setup> {
    let d = cfg.ansatz;
    match &cfg.problem {
        ProblemConfig::Hubbard { sector, .. } => {
            let spec = cfg.problem.hubbard_spec().expect("hubbard problem");
            let p = HubbardProblem::new(spec, *sector)?;
            let mut circuit = Circuit::new(3 * d.steps);
            p.parts.push_steps(&mut circuit, d.steps, 0, d.merge_u);
            Ok(Setup {
                built: Built::Hubbard(Box::new(p)),
                circuit,
            })
        }
        ProblemConfig::Chemistry { fcidump, sector } => {
            let ints = read_fcidump(fcidump)?;
            let mut chem = ChemHamiltonian::from_integrals(&ints)?;
            if let Some((up, down)) = *sector {
                chem.n_up = up;
                chem.n_down = down;
            }
            let basis = Arc::new(chem.basis()?);
            let (initial, hf) = hf_initial_state(&chem, basis.clone())?;
            let op = SparseOperator::from_terms(chem.terms(), &basis)?;
            let ground = ground_space_op(&op, &basis, 1, LanczosOptions::default())?;
            let ansatz = match d.family {
                Family::Rxx => {
                    let variant = d.rxx_variant.context("rxx ansatz without a variant")?;
                    rxx_circuit(
                        &build_rxx(&chem, variant, hf.config),
                        &basis,
                        d.trotter_reps,
                    )?
                }
                _ => chem_hv(&group_chemistry(&chem, hf.config)?, &basis, d)?,
            };
            Ok(Setup {
                built: Built::Chemistry {
                    initial,
                    op,
                    ground,
                    orbitals: chem.n_orbitals(),
                    core_energy: chem.core_energy,
                },
                circuit: ansatz.circuit,
            })
        }
    }
}

fn ansatz_label(cfg: &ExperimentConfig) -> String {
    let d = &cfg.ansatz;
    match (d.family, d.rxx_variant) {
        (Family::Rxx, Some(v)) => format!("rxx/{}", v.as_str()),
        (Family::Rxx, None) => "rxx".into(),
        (Family::HubbardHv, _) => "hubbard_hv".into(),
        (Family::ChemHv3, _) => "chem_hv3".into(),
        (Family::ChemHv4, _) => "chem_hv4".into(),
    }
}

/// Builds the problem, optimizes and reports. Exact evaluations go
/// through `log` when one is given.
pub fn run(cfg: &ExperimentConfig, log: Option<&EvalLog>) -> Result<Outcome> {
    let setup = build(cfg).context("building the problem")?;
    let exact = CircuitObjective::new(&setup.circuit, setup.initial(), setup.op())?;
    let logged = log.map(|l| Logged::new(&exact, l));
    let obj: &dyn Objective = logged.as_ref().map_or(&exact, |l| l);
    let seed = cfg.seed;
    let opt = &cfg.optimizer;

    let mut sequential = None;
    let (params, record) = if obj.n_params() == 0 {
        let mut rec = Recorder::new(obj, seed);
        rec.set_phase("initial");
        rec.eval(&[]);
        if opt.method == Method::Annealed {
            sequential = Some((Vec::new(), setup.report(&[])?));
        }
        (Vec::new(), rec.into_record())
    } else {
        match opt.method {
            Method::Global => {
                let record = global_variational(obj, &opt.global, seed);
                let best = record.best.clone().context("optimizer returned no point")?;
                (best.params, record)
            }
            Method::Annealed => {
                let Built::Hubbard(p) = &setup.built else {
                    unreachable!("validated: annealing needs a Hubbard problem")
                };
                let out = annealed_variational_logged(
                    p,
                    cfg.ansatz.steps,
                    opt.anneal_mode,
                    &opt.anneal,
                    seed,
                    log,
                )
                .context("annealed optimization")?;
                sequential = Some((out.sequential_params, out.sequential));
                (out.full_params, out.record)
            }
            Method::Inexact => {
                let out = match cfg.measurement.noise {
                    Noise::Exact => inexact_optimize(&ExactComparator(obj), &opt.inexact, seed),
                    Noise::Sampled => {
                        let Built::Hubbard(p) = &setup.built else {
                            unreachable!("validated: sampling needs a Hubbard problem")
                        };
                        let plan = MeasurementPlan::uniform(
                            commuting_sets(&p.spec)?,
                            &p.basis,
                            1,
                            cfg.measurement.model,
                        )?;
                        let cmp = SampledCircuit {
                            circuit: &setup.circuit,
                            initial: &p.initial,
                            plan: &plan,
                            compare: cfg.measurement.compare,
                        };
                        inexact_optimize(&cmp, &opt.inexact, seed)
                    }
                }
                .context("inexact optimization")?;
                (out.params, out.record)
            }
        }
    };

    let report = setup.report(&params)?;
    let (kind, sites, offset) = match &setup.built {
        Built::Hubbard(p) => (ProblemKind::Hubbard, p.spec.n_sites, 0.0),
        Built::Chemistry {
            orbitals,
            core_energy,
            ..
        } => (ProblemKind::Chemistry, *orbitals, *core_energy),
    };
    let row = ResultRow {
        name: cfg.name().to_string(),
        kind,
        problem: cfg.problem.label(),
        sites,
        ansatz: ansatz_label(cfg),
        steps: cfg.ansatz.steps,
        method: opt.method,
        noise: cfg.measurement.noise,
        seed,
        exact_energy: setup.ground().energy + offset,
        energy: report.energy + offset,
        error: report.error,
        overlap: report.overlap,
        error_seq: sequential.as_ref().map(|s| s.1.error),
        overlap_seq: sequential.as_ref().map(|s| s.1.overlap),
        error_mha: (kind == ProblemKind::Chemistry).then_some(report.error * 1e3),
        evaluations: record.evaluations,
        samples: record.samples,
        runtime_s: 0.0,
    };
    Ok(Outcome {
        row,
        params,
        sequential_params: sequential.map(|s| s.0),
        record,
    })
}
