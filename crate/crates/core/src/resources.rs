//! Sample and gate budgets, and the Trotterized anneal used as a depth
//! baseline for the variational circuits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ground_overlap;
use crate::optimize::HubbardProblem;

pub const DEFAULT_GATE_TIME: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// Samples per term or set, by label.
    pub per_term: Vec<(String, f64)>,
    /// Samples per energy evaluation.
    pub total_samples: f64,
    pub gates_per_run: Option<f64>,
    pub gate_time: f64,
    /// Seconds for one energy evaluation, when a gate count is known.
    pub wall_clock: Option<f64>,
    pub assumptions: Vec<String>,
}

impl BudgetReport {
    /// Adds a runtime estimate: every sample is one run of `gates` gates.
    pub fn with_runtime(mut self, gates: f64, gate_time: f64) -> Self {
        self.gates_per_run = Some(gates);
        self.gate_time = gate_time;
        self.wall_clock = Some(self.total_samples * gates * gate_time);
        self
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {x}")))
    }
}

/// Samples per term for an energy error `epsilon` per site on an `n`-site
/// Hubbard model, from `epsilon^2 = (U t + 4 t^2) / (M n)`.
pub fn hubbard_budget(
    t: f64,
    u: f64,
    n: usize,
    epsilon: f64,
    parallel: bool,
) -> Result<BudgetReport> {
    positive("t", t)?;
    positive("epsilon", epsilon)?;
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("U must be nonnegative, got {u}")));
    }
    if n == 0 {
        return Err(Error::Domain("the lattice needs at least one site".into()));
    }
    let nf = n as f64;
    let mut m = (u * t + 4.0 * t * t) / (epsilon * epsilon * nf);
    if !parallel {
        m *= nf;
    }
    let labels = ["double occupancy", "h up", "h down", "v up", "v down"];
    Ok(BudgetReport {
        per_term: labels.iter().map(|l| (l.to_string(), m)).collect(),
        total_samples: 5.0 * m,
        gates_per_run: None,
        gate_time: DEFAULT_GATE_TIME,
        wall_clock: None,
        assumptions: vec![
            "five terms measured separately with equal samples".into(),
            "variance of U h_U per site bounded by U t".into(),
            "variance of each hopping term per site bounded by t^2".into(),
            if parallel {
                format!("{n} sites measured in parallel per run")
            } else {
                "one site measured per run".into()
            },
        ],
    })
}

/// Total samples `(sum |h_i|)^2 / epsilon^2`, split as `M_i ∝ |h_i|`.
pub fn chem_budget(coefficients: &[f64], epsilon: f64) -> Result<BudgetReport> {
    if coefficients.is_empty() {
        return Err(Error::Domain("no coefficients".into()));
    }
    positive("epsilon", epsilon)?;
    let norm: f64 = coefficients.iter().map(|h| h.abs()).sum();
    let total = norm * norm / (epsilon * epsilon);
    Ok(BudgetReport {
        per_term: coefficients
            .iter()
            .enumerate()
            .map(|(i, h)| (format!("term {i}"), total * h.abs() / norm))
            .collect(),
        total_samples: total,
        gates_per_run: None,
        gate_time: DEFAULT_GATE_TIME,
        wall_clock: None,
        assumptions: vec![
            "unit variance bound per term".into(),
            "diagonal terms excluded".into(),
        ],
    })
}

/// Gate cost in rotation units, scaled to gates by a calibrated factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateModel {
    /// Units per on-site interaction rotation.
    pub c_u: f64,
    /// Units per hopping rotation (one bond, one spin).
    pub c_hop: f64,
    /// Measurement cost as a fraction of one step.
    pub measure_fraction: f64,
    pub gates_per_unit: f64,
}

impl Default for GateModel {
    fn default() -> Self {
        Self::calibrated(8, 2, 1000.0)
    }
}

impl GateModel {
    /// Unit weights with the scale fixed so `(n, steps)` costs `gates`.
    pub fn calibrated(n: usize, steps: usize, gates: f64) -> Self {
        let mut m = Self {
            c_u: 1.0,
            c_hop: 1.0,
            measure_fraction: 0.25,
            gates_per_unit: 1.0,
        };
        m.gates_per_unit = gates / m.units(n, steps);
        m
    }

    /// Units of one ladder step: `n` interactions plus both spins of the
    /// `n` horizontal and `n/2` rung bonds.
    pub fn step_units(&self, n: usize) -> f64 {
        let bonds = n as f64 * 1.5;
        self.c_u * n as f64 + self.c_hop * 2.0 * bonds
    }

    /// Slater determinant preparation, about `n log2 n` Givens rotations.
    pub fn preparation_units(&self, n: usize) -> f64 {
        let nf = n as f64;
        if n < 2 {
            0.0
        } else {
            nf * nf.log2()
        }
    }

    pub fn units(&self, n: usize, steps: usize) -> f64 {
        let step = self.step_units(n);
        steps as f64 * step + self.preparation_units(n) + self.measure_fraction * step
    }

    pub fn gates(&self, n: usize, steps: usize) -> f64 {
        self.gates_per_unit * self.units(n, steps)
    }

    pub fn assumptions(&self) -> Vec<String> {
        vec![
            format!("{} units per interaction rotation", self.c_u),
            format!("{} units per hopping rotation", self.c_hop),
            "preparation n log2 n units".into(),
            format!("measurement {} of a step", self.measure_fraction),
            format!("{:.4} gates per unit", self.gates_per_unit),
        ]
    }
}

/// Gates for one run of an `steps`-step ladder circuit.
pub fn gate_count(n: usize, steps: usize) -> f64 {
    GateModel::default().gates(n, steps)
}

/// Seconds to draw `samples` samples, each needing one run per set.
pub fn sampling_time(samples: f64, sets: usize, gates: f64, gate_time: f64) -> f64 {
    samples * sets as f64 * gates * gate_time
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub total_time: f64,
    pub dt: f64,
    pub steps: usize,
    pub overlap: f64,
}

/// Anneals `Psi_I` along `H_s = t h_h + t h_v + s U h_U`, `s` linear from 0
/// to 1 over `steps` second-order steps of length `total_time / steps`.
/// `s` is taken at the step midpoints.
pub fn trotter_anneal_steps(
    problem: &HubbardProblem,
    total_time: f64,
    steps: usize,
) -> Result<AnnealResult> {
    positive("T", total_time)?;
    if steps == 0 {
        return Err(Error::Domain("an anneal needs at least one step".into()));
    }
    let dt = total_time / steps as f64;
    let params: Vec<f64> = (0..steps)
        .flat_map(|k| {
            let s = (k as f64 + 0.5) / steps as f64;
            [-dt, -dt, -s * dt]
        })
        .collect();
    let psi = problem.state(&params)?;
    Ok(AnnealResult {
        total_time,
        dt,
        steps,
        overlap: ground_overlap(&psi, &problem.ground),
    })
}

/// [`trotter_anneal_steps`] with `round(T / dt)` steps.
pub fn trotter_anneal(problem: &HubbardProblem, total_time: f64, dt: f64) -> Result<AnnealResult> {
    positive("T", total_time)?;
    positive("dt", dt)?;
    if dt > total_time {
        return Err(Error::Domain(format!("dt {dt} exceeds T {total_time}")));
    }
    let steps = ((total_time / dt).round() as usize).max(1);
    trotter_anneal_steps(problem, total_time, steps)
}

/// Grid of total anneal times; each is tried with `dt = T / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSearchConfig {
    pub t_min: f64,
    /// Ratio between neighbouring anneal times.
    pub t_factor: f64,
    pub t_count: usize,
    /// Rounds of halving the log spacing of the grid around the best time.
    pub refinements: usize,
    pub max_steps: usize,
}

impl Default for AnnealSearchConfig {
    fn default() -> Self {
        Self {
            t_min: 0.25,
            t_factor: 2.0,
            t_count: 12,
            refinements: 0,
            max_steps: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSearch {
    pub best: AnnealResult,
    /// Smallest `T/dt` meeting the target, if any was found.
    pub ratio: Option<usize>,
    pub target: f64,
    /// Every anneal evaluated, ordered by time then steps.
    pub tried: Vec<AnnealResult>,
}

/// Smallest step count below `limit` reaching `target` at total time `t`,
/// by doubling and then bisection.
fn min_steps_at(
    problem: &HubbardProblem,
    t: f64,
    target: f64,
    limit: usize,
    tried: &mut Vec<AnnealResult>,
) -> Result<Option<AnnealResult>> {
    let mut run = |k: usize| -> Result<AnnealResult> {
        let r = trotter_anneal_steps(problem, t, k)?;
        tried.push(r);
        Ok(r)
    };
    let mut lo = 0;
    let mut k = 1;
    let mut hit = None;
    while k < limit {
        let r = run(k)?;
        if r.overlap >= target {
            hit = Some(r);
            break;
        }
        lo = k;
        k *= 2;
    }
    let Some(mut hit) = hit.or(if lo + 1 < limit && k >= limit {
        // the doubling overshot the limit; probe just below it
        let r = run(limit - 1)?;
        (r.overlap >= target).then_some(r)
    } else {
        None
    }) else {
        return Ok(None);
    };
    while hit.steps - lo > 1 {
        let mid = (lo + hit.steps) / 2;
        let r = run(mid)?;
        if r.overlap >= target {
            hit = r;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hit))
}

/// Smallest `T/dt` whose anneal reaches overlap `target`. For every time
/// on the grid the step count is minimized separately.
pub fn min_anneal_ratio(
    problem: &HubbardProblem,
    target: f64,
    cfg: &AnnealSearchConfig,
) -> Result<AnnealSearch> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::Domain(format!(
            "target overlap {target} outside [0, 1)"
        )));
    }
    positive("t_min", cfg.t_min)?;
    if cfg.t_factor <= 1.0 || cfg.t_count == 0 {
        return Err(Error::Config(
            "anneal time grid must grow and be nonempty".into(),
        ));
    }
    let mut times: Vec<f64> = (0..cfg.t_count)
        .map(|i| cfg.t_min * cfg.t_factor.powi(i as i32))
        .collect();
    let mut tried = Vec::new();
    let mut best: Option<AnnealResult> = None;
    let mut done: Vec<f64> = Vec::new();
    let mut spacing = cfg.t_factor;
    for round in 0..=cfg.refinements {
        for &t in &times {
            if done.iter().any(|d| (d / t - 1.0).abs() < 1e-12) {
                continue;
            }
            done.push(t);
            let limit = best.map_or(cfg.max_steps + 1, |b| b.steps);
            if let Some(r) = min_steps_at(problem, t, target, limit, &mut tried)? {
                if best.is_none_or(|b| r.steps < b.steps) {
                    best = Some(r);
                }
            }
        }
        if round == cfg.refinements {
            break;
        }
        let Some(b) = best else { break };
        spacing = spacing.sqrt();
        times = vec![b.total_time / spacing, b.total_time * spacing];
    }
    tried.sort_by(|a, b| {
        a.total_time
            .total_cmp(&b.total_time)
            .then(a.steps.cmp(&b.steps))
    });
    Ok(match best {
        Some(b) => AnnealSearch {
            best: b,
            ratio: Some(b.steps),
            target,
            tried,
        },
        None => AnnealSearch {
            best: *tried
                .iter()
                .max_by(|a, b| a.overlap.total_cmp(&b.overlap))
                .expect("at least one anneal evaluated"),
            ratio: None,
            target,
            tried,
        },
    })
}
