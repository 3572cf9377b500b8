use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    run_global, run_global_around, CircuitObjective, EvalLog, GlobalConfig, Logged, Objective,
    OptRecord, Recorder,
};
use crate::ansatz::{Circuit, HubbardCircuits};
use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::exact::LanczosOptions;
use crate::exact::{
    energy_and_overlap, ground_space_op, slater_state_on, EnergyReport, GroundInfo,
};
use crate::hamiltonian::{build_hubbard, GroupLabel, HubbardHamiltonian, HubbardSpec};
use crate::operator::SparseOperator;
use crate::state::StateVector;

/// A Hubbard ladder with everything the variational drivers need.
#[derive(Debug, Clone)]
pub struct HubbardProblem {
    pub spec: HubbardSpec,
    pub ham: HubbardHamiltonian,
    pub basis: Arc<SectorBasis>,
    pub parts: HubbardCircuits,
    /// `t h_h + t h_v`.
    pub hop_op: SparseOperator,
    /// `h_U` per unit of `U`.
    pub u_op: SparseOperator,
    pub op: SparseOperator,
    pub initial: StateVector,
    pub ground: GroundInfo,
}

impl HubbardProblem {
    /// Builds the problem in `sector` (default: the ladder's default sector).
    pub fn new(spec: HubbardSpec, sector: Option<(usize, usize)>) -> Result<Self> {
        let ham = build_hubbard(&spec)?;
        let (nu, nd) = sector.unwrap_or_else(|| spec.default_sector());
        let basis = Arc::new(SectorBasis::new(spec.n_sites, nu, nd)?);
        let parts = HubbardCircuits::new(&ham, &basis)?;
        let hop_op = SparseOperator::from_terms(&ham.hopping_terms(), &basis)?;
        let mut unit_u = ham.group(GroupLabel::U).terms.clone();
        unit_u.iter_mut().for_each(|t| t.coefficient = 1.0);
        let u_op = SparseOperator::from_terms(&unit_u, &basis)?;
        let op = hop_op.add_scaled(&u_op, spec.u);
        let initial = slater_state_on(&spec, basis.clone(), spec.epsilon)?;
        let ground = ground_space_op(&op, &basis, 1, LanczosOptions::default())?;
        Ok(Self {
            spec,
            ham,
            basis,
            parts,
            hop_op,
            u_op,
            op,
            initial,
            ground,
        })
    }

    /// `H_s = t h_h + t h_v + s U h_U`.
    pub fn op_at(&self, s: f64) -> SparseOperator {
        self.hop_op.add_scaled(&self.u_op, s * self.spec.u)
    }

    pub fn circuit(&self, steps: usize) -> Circuit {
        let mut c = Circuit::new(3 * steps);
        self.parts.push_steps(&mut c, steps, 0, false);
        c
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() % 3 != 0 {
            return Err(Error::Contract(format!(
                "{} parameters do not form whole steps",
                params.len()
            )));
        }
        self.circuit(params.len() / 3)
            .prepare(&self.initial, params)
    }

    pub fn report(&self, params: &[f64]) -> Result<EnergyReport> {
        Ok(energy_and_overlap(
            &self.state(params)?,
            &self.op,
            &self.ground,
        ))
    }
}

/// Which Hamiltonian each sequential step targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnealMode {
    /// Step `b` of `S` targets `H_{b/S}`.
    StepwiseTarget,
    /// Every step targets `H_1`.
    FinalTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub sequential: GlobalConfig,
    pub full: GlobalConfig,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            sequential: GlobalConfig {
                starts: 2,
                ..Default::default()
            },
            full: GlobalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub sequential_params: Vec<f64>,
    pub sequential: EnergyReport,
    pub full_params: Vec<f64>,
    pub full: EnergyReport,
    pub record: OptRecord,
}

/// Sequential one-step-at-a-time optimization along `H_s`, followed by a
/// multi-start search over all `3S` angles around the sequential point.
pub fn annealed_variational(
    problem: &HubbardProblem,
    steps: usize,
    mode: AnnealMode,
    cfg: &AnnealConfig,
    seed: u64,
) -> Result<AnnealOutcome> {
    annealed_variational_logged(problem, steps, mode, cfg, seed, None)
}

/// [`annealed_variational`] with every evaluation passed through `log`.
pub fn annealed_variational_logged(
    problem: &HubbardProblem,
    steps: usize,
    mode: AnnealMode,
    cfg: &AnnealConfig,
    seed: u64,
    log: Option<&EvalLog>,
) -> Result<AnnealOutcome> {
    if steps == 0 {
        return Err(Error::Domain("annealing needs at least one step".into()));
    }
    let mut record = OptRecord::new(seed);
    let one_step = problem.circuit(1);
    let mut psi = problem.initial.clone();
    let mut params = Vec::with_capacity(3 * steps);
    for b in 1..=steps {
        let s = match mode {
            AnnealMode::StepwiseTarget => b as f64 / steps as f64,
            AnnealMode::FinalTarget => 1.0,
        };
        let target = problem.op_at(s);
        let exact = CircuitObjective::new(&one_step, &psi, &target)?;
        let logged = log.map(|l| Logged::new(&exact, l));
        let obj: &dyn Objective = logged.as_ref().map_or(&exact, |l| l);
        let mut rec = Recorder::new(obj, seed);
        let point = run_global(&mut rec, &cfg.sequential, seed.wrapping_add(b as u64));
        let mut r = rec.into_record();
        for e in &mut r.trace {
            e.phase = format!("sequential-{b}/{}", e.phase);
        }
        r.phases = vec![format!("sequential-{b}")];
        record.extend(r);
        psi = one_step.prepare(&psi, &point.params)?;
        params.extend(point.params);
    }
    let sequential = problem.report(&params)?;
    record.best = None;

    let circuit = problem.circuit(steps);
    let exact = CircuitObjective::new(&circuit, &problem.initial, &problem.op)?;
    let logged = log.map(|l| Logged::new(&exact, l));
    let obj: &dyn Objective = logged.as_ref().map_or(&exact, |l| l);
    let mut rec = Recorder::new(obj, seed);
    let end = run_global_around(
        &mut rec,
        Some(&params),
        &cfg.full,
        seed.wrapping_add(steps as u64 + 1),
    );
    let mut r = rec.into_record();
    for e in &mut r.trace {
        e.phase = format!("full/{}", e.phase);
    }
    r.phases = vec!["full".into()];
    record.extend(r);
    let full = problem.report(&end.params)?;
    Ok(AnnealOutcome {
        sequential_params: params,
        sequential,
        full_params: end.params,
        full,
        record,
    })
}
