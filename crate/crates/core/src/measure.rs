//! Shot-noise simulation of energy measurements by commuting term sets.
//!
//! Each set is measured in its own runs. With the default Gaussian model a
//! set measured `M` times yields a sample mean drawn from
//! `Normal(<h_set>, Var(h_set) / M)`, using exact moments of the state.
//! Diagonal sets can instead be sampled shot by shot from `|amplitude|^2`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::hamiltonian::{group_commutes, TermGroup};
use crate::operator::SparseOperator;
use crate::state::StateVector;

/// How single-set measurement outcomes are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Gaussian,
    /// Diagonal sets sampled exactly from the configuration distribution;
    /// other sets fall back to the Gaussian model.
    ExactDiagonalSampling,
}

/// Commuting measurement sets with a shot allocation.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub sets: Vec<TermGroup>,
    pub shots: Vec<u64>,
    pub noise: NoiseModel,
    /// Sites measured simultaneously in one run, for budget arithmetic.
    pub parallel_width: usize,
    ops: Vec<SparseOperator>,
    diagonals: Vec<Option<Vec<f64>>>,
}

impl MeasurementPlan {
    pub fn new(
        sets: Vec<TermGroup>,
        basis: &SectorBasis,
        shots: Vec<u64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        if shots.len() != sets.len() {
            return Err(Error::Config(format!(
                "{} shot counts for {} sets",
                shots.len(),
                sets.len()
            )));
        }
        for (set, &m) in sets.iter().zip(&shots) {
            if !group_commutes(set) {
                return Err(Error::Contract(format!(
                    "measurement set {} is not commuting",
                    set.label
                )));
            }
            if m == 0 && !set.is_empty() {
                return Err(Error::Config(format!(
                    "set {} has terms but no shots",
                    set.label
                )));
            }
        }
        let ops = sets
            .iter()
            .map(|s| SparseOperator::from_terms(&s.terms, basis))
            .collect::<Result<Vec<_>>>()?;
        let diagonals = ops.iter().map(|o| o.as_diagonal()).collect();
        Ok(Self {
            sets,
            shots,
            noise,
            parallel_width: 1,
            ops,
            diagonals,
        })
    }

    /// The same number of shots for every set.
    pub fn uniform(
        sets: Vec<TermGroup>,
        basis: &SectorBasis,
        shots: u64,
        noise: NoiseModel,
    ) -> Result<Self> {
        let n = sets.len();
        Self::new(sets, basis, vec![shots; n], noise)
    }

    /// About `total` shots split in proportion to each set's coefficient
    /// l1 norm.
    pub fn proportional(
        sets: Vec<TermGroup>,
        basis: &SectorBasis,
        total: u64,
        noise: NoiseModel,
    ) -> Result<Self> {
        let norms: Vec<f64> = sets.iter().map(|s| s.l1_norm()).collect();
        let sum: f64 = norms.iter().sum();
        if sum == 0.0 {
            return Err(Error::Config("all measurement sets are empty".into()));
        }
        let shots = norms
            .iter()
            .map(|n| {
                if *n == 0.0 {
                    0
                } else {
                    ((total as f64 * n / sum).round() as u64).max(1)
                }
            })
            .collect();
        Self::new(sets, basis, shots, noise)
    }

    pub fn ops(&self) -> &[SparseOperator] {
        &self.ops
    }

    /// Exact per-set `(mean, variance)` for `psi`.
    pub fn moments(&self, psi: &StateVector) -> Vec<(f64, f64)> {
        self.ops
            .iter()
            .map(|op| exact_moments_op(psi, op))
            .collect()
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        match self.ops.first() {
            Some(op) if op.dim() != psi.dim() => Err(Error::Contract(format!(
                "state of dimension {} measured with a plan for dimension {}",
                psi.dim(),
                op.dim()
            ))),
            _ => Ok(()),
        }
    }
}

/// `(<h>, <h^2> - <h>^2)` with `<h^2>` computed as `|h psi|^2`.
pub fn exact_moments_op(psi: &StateVector, op: &SparseOperator) -> (f64, f64) {
    let (mean, second) = op.first_two_moments(psi.amps());
    (mean, (second - mean * mean).max(0.0))
}

/// Mean and variance of a commuting term set.
pub fn exact_moments(psi: &StateVector, set: &TermGroup) -> Result<(f64, f64)> {
    if !group_commutes(set) {
        return Err(Error::Contract(format!(
            "set {} is not internally commuting",
            set.label
        )));
    }
    let op = SparseOperator::from_terms(&set.terms, psi.basis())?;
    Ok(exact_moments_op(psi, &op))
}

/// A sampled energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: Vec<u64>,
    pub exact_mean: f64,
}

/// Cumulative distribution of configurations for exact shot sampling.
struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(psi: &StateVector) -> Self {
        let mut acc = 0.0;
        let cumulative = psi
            .amps()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

fn gaussian_mean(mean: f64, variance: f64, shots: u64, rng: &mut impl Rng) -> f64 {
    if variance == 0.0 {
        return mean;
    }
    Normal::new(mean, (variance / shots as f64).sqrt())
        .expect("finite standard deviation")
        .sample(rng)
}

/// Per-set sample means for one round of `shots[i]` shots of set `i`.
fn sample_sets(
    psi: &StateVector,
    plan: &MeasurementPlan,
    moments: &[(f64, f64)],
    shots: &[u64],
    sampler: &mut Option<Sampler>,
    rng: &mut impl Rng,
) -> Vec<f64> {
    (0..plan.sets.len())
        .map(|i| {
            let (mean, var) = moments[i];
            if shots[i] == 0 {
                return 0.0;
            }
            match (&plan.noise, &plan.diagonals[i]) {
                (NoiseModel::ExactDiagonalSampling, Some(diag)) => {
                    let s = sampler.get_or_insert_with(|| Sampler::new(psi));
                    let sum: f64 = (0..shots[i]).map(|_| diag[s.draw(rng)]).sum();
                    sum / shots[i] as f64
                }
                _ => gaussian_mean(mean, var, shots[i], rng),
            }
        })
        .collect()
}

/// Samples the energy of `psi` with the plan's shot allocation.
pub fn sample_energy(
    psi: &StateVector,
    plan: &MeasurementPlan,
    rng: &mut impl Rng,
) -> Result<EnergyEstimate> {
    plan.check(psi)?;
    let moments = plan.moments(psi);
    let mut sampler = None;
    let means = sample_sets(psi, plan, &moments, &plan.shots, &mut sampler, rng);
    let variance: f64 = moments
        .iter()
        .zip(&plan.shots)
        .filter(|(_, &m)| m > 0)
        .map(|((_, v), &m)| v / m as f64)
        .sum();
    Ok(EnergyEstimate {
        mean: means.iter().sum(),
        std_error: variance.sqrt(),
        samples: plan.shots.clone(),
        exact_mean: moments.iter().map(|m| m.0).sum(),
    })
}

/// Outcome of comparing two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ABetter,
    BBetter,
    Undecided,
}

/// Settings of the two-sigma comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Shots of every set per point per batch.
    pub batch: u64,
    /// Largest number of samples per point; one sample is one shot of
    /// every set.
    pub max_samples: u64,
    pub sigmas: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            batch: 10_000,
            max_samples: 200_000,
            sigmas: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Standard error of `mean_a - mean_b`.
    pub std_error: f64,
    /// Lower sampled mean, whether or not the difference is significant.
    pub leader: Verdict,
    pub samples_a: u64,
    pub samples_b: u64,
}

/// Accumulated samples of one point, kept across comparisons.
pub struct RunningEstimate {
    psi: StateVector,
    moments: Vec<(f64, f64)>,
    sampler: Option<Sampler>,
    /// Sum over batches of the sampled energy.
    sum: f64,
    batches: u64,
    /// Shots of every set taken so far.
    pub shots: u64,
}

impl RunningEstimate {
    pub fn new(psi: StateVector, plan: &MeasurementPlan) -> Result<Self> {
        plan.check(&psi)?;
        let moments = plan.moments(&psi);
        Ok(Self {
            psi,
            moments,
            sampler: None,
            sum: 0.0,
            batches: 0,
            shots: 0,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.psi
    }

    pub fn exact_mean(&self) -> f64 {
        self.moments.iter().map(|m| m.0).sum()
    }

    /// Sampled mean, `NaN` before the first batch.
    pub fn mean(&self) -> f64 {
        self.sum / self.batches as f64
    }

    /// Variance of the sampled mean.
    pub fn variance(&self) -> f64 {
        self.moments.iter().map(|m| m.1).sum::<f64>() / self.shots as f64
    }

    fn add_batch(&mut self, plan: &MeasurementPlan, batch: u64, rng: &mut impl Rng) {
        let shots = vec![batch; plan.sets.len()];
        let means = sample_sets(
            &self.psi,
            plan,
            &self.moments,
            &shots,
            &mut self.sampler,
            rng,
        );
        self.sum += means.iter().sum::<f64>();
        self.batches += 1;
        self.shots += batch;
    }
}

/// Samples both points in batches until their energies differ by
/// `sigmas` standard errors or the budget runs out.
pub fn adaptive_compare(
    a: &StateVector,
    b: &StateVector,
    plan: &MeasurementPlan,
    rng: &mut impl Rng,
    cfg: &CompareConfig,
) -> Result<Comparison> {
    let mut ea = RunningEstimate::new(a.clone(), plan)?;
    let mut eb = RunningEstimate::new(b.clone(), plan)?;
    compare_running(&mut ea, &mut eb, plan, rng, cfg)
}

/// As [`adaptive_compare`], continuing from samples already taken. Each
/// round samples whichever point has fewer shots, so a point is never
/// sampled beyond `max_samples`.
pub fn compare_running(
    a: &mut RunningEstimate,
    b: &mut RunningEstimate,
    plan: &MeasurementPlan,
    rng: &mut impl Rng,
    cfg: &CompareConfig,
) -> Result<Comparison> {
    if cfg.batch == 0 {
        return Err(Error::Config(
            "comparison batch size must be positive".into(),
        ));
    }
    let (start_a, start_b) = (a.shots, b.shots);
    loop {
        let (na, nb) = (a.shots, b.shots);
        let room = |n: u64| n + cfg.batch <= cfg.max_samples.max(cfg.batch);
        let mut sampled = false;
        if na <= nb && room(na) {
            a.add_batch(plan, cfg.batch, rng);
            sampled = true;
        }
        if nb <= na && room(nb) {
            b.add_batch(plan, cfg.batch, rng);
            sampled = true;
        }
        if !sampled && a.shots != b.shots {
            // one side is at the cap; fill the other
            let low = if a.shots < b.shots { &mut *a } else { &mut *b };
            if room(low.shots) {
                low.add_batch(plan, cfg.batch, rng);
                sampled = true;
            }
        }
        let diff = a.mean() - b.mean();
        let std_error = (a.variance() + b.variance()).sqrt();
        let decided = diff != 0.0 && diff.abs() >= cfg.sigmas * std_error;
        if decided || !sampled {
            let leader = if diff > 0.0 {
                Verdict::BBetter
            } else {
                Verdict::ABetter
            };
            return Ok(Comparison {
                verdict: if decided { leader } else { Verdict::Undecided },
                mean_a: a.mean(),
                mean_b: b.mean(),
                std_error,
                leader,
                samples_a: a.shots - start_a,
                samples_b: b.shots - start_b,
            });
        }
    }
}
