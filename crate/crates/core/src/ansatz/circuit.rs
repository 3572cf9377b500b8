//! Exponentials of structured generators and parameterized products of them.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{apply_ladder, Config, FermionTerm, Operator, SectorBasis};
use crate::error::{Error, Result};
use crate::operator::SparseOperator;
use crate::state::StateVector;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How a pair generator couples its two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `G|from> = w|to>`, `G|to> = w|from>`; the factor is `exp(i phi G)`.
    Hermitian,
    /// `A|from> = w|to>`, `A|to> = -w|from>`; the factor is `exp(phi A)`.
    AntiHermitian,
}

/// A generator whose exponential is applied exactly.
///
/// Weights are stored as indices into a table of distinct values so that the
/// trigonometric functions are evaluated once per value, not per amplitude.
#[derive(Debug, Clone)]
pub enum Generator {
    /// Diagonal generator, `exp(i phi D)`.
    Phase { levels: Vec<f64>, level: Vec<u32> },
    /// Direct sum of independent two-level blocks.
    Pairs {
        kind: PairKind,
        from: Vec<u32>,
        to: Vec<u32>,
        levels: Vec<f64>,
        level: Vec<u32>,
    },
}

fn level_table(values: impl IntoIterator<Item = f64>) -> (Vec<f64>, Vec<u32>) {
    let mut map: HashMap<u64, u32> = HashMap::new();
    let mut levels = Vec::new();
    let level = values
        .into_iter()
        .map(|v| {
            *map.entry(v.to_bits()).or_insert_with(|| {
                levels.push(v);
                (levels.len() - 1) as u32
            })
        })
        .collect();
    (levels, level)
}

/// Image of `config` under the non-conjugated half of an off-diagonal
/// operator, with its sign.
pub fn forward_image(op: &Operator, config: Config) -> Option<(Config, f64)> {
    match *op {
        Operator::CorrelatedHop { r, .. } if config >> r & 1 == 0 => None,
        _ => apply_ladder(config, &op.forward_ladder()?),
    }
}

impl Generator {
    /// Diagonal generator with one value per basis state.
    pub fn diagonal(values: &[f64]) -> Self {
        let (levels, level) = level_table(values.iter().copied());
        Generator::Phase { levels, level }
    }

    /// Diagonal generator of a list of diagonal terms.
    pub fn diagonal_terms(terms: &[FermionTerm], basis: &SectorBasis) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| !t.op.is_diagonal()) {
            return Err(Error::Contract(format!("{:?} is not diagonal", t.op)));
        }
        let values: Vec<f64> = basis
            .configs()
            .map(|c| {
                terms
                    .iter()
                    .map(|t| t.coefficient * t.op.diagonal_value(c))
                    .sum()
            })
            .collect();
        Ok(Self::diagonal(&values))
    }

    /// Pair generator from `(from, to, weight)` triples on disjoint blocks.
    pub fn pairs(kind: PairKind, blocks: Vec<(u32, u32, f64)>) -> Self {
        let from = blocks.iter().map(|b| b.0).collect();
        let to = blocks.iter().map(|b| b.1).collect();
        let (levels, level) = level_table(blocks.iter().map(|b| b.2));
        Generator::Pairs {
            kind,
            from,
            to,
            levels,
            level,
        }
    }

    /// `coefficient * (X + X†)` for one off-diagonal term.
    pub fn hermitian_term(term: &FermionTerm, basis: &SectorBasis) -> Result<Self> {
        Self::hermitian_bundle(&term.op, basis, |_| term.coefficient, |_| true)
    }

    /// Hermitian generator `X + X†` where the matrix element of the block
    /// starting at configuration `c` is `sign * weight(c)`; blocks with
    /// `keep(c)` false are dropped.
    pub fn hermitian_bundle(
        op: &Operator,
        basis: &SectorBasis,
        weight: impl Fn(Config) -> f64,
        keep: impl Fn(Config) -> bool,
    ) -> Result<Self> {
        op.validate(basis.n_sites())?;
        if op.is_diagonal() {
            return Err(Error::Contract(format!("{op:?} is diagonal")));
        }
        let mut blocks = Vec::new();
        for (i, c) in basis.configs().enumerate() {
            if !keep(c) {
                continue;
            }
            if let Some((img, sign)) = forward_image(op, c) {
                let j = basis.index(img).expect("number-conserving operator");
                blocks.push((i as u32, j as u32, sign * weight(c)));
            }
        }
        Ok(Self::pairs(PairKind::Hermitian, blocks))
    }

    /// Anti-Hermitian generator `X - X†` of an off-diagonal operator.
    pub fn anti_hermitian(op: &Operator, basis: &SectorBasis) -> Result<Self> {
        op.validate(basis.n_sites())?;
        let mut blocks = Vec::new();
        for (i, c) in basis.configs().enumerate() {
            if let Some((img, sign)) = forward_image(op, c) {
                let j = basis.index(img).expect("number-conserving operator");
                blocks.push((i as u32, j as u32, sign));
            }
        }
        Ok(Self::pairs(PairKind::AntiHermitian, blocks))
    }

    /// Number of coupled blocks (or basis states for a phase).
    pub fn len(&self) -> usize {
        match self {
            Generator::Phase { level, .. } => level.len(),
            Generator::Pairs { from, .. } => from.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Applies the exponential at angle `phi` in place.
    pub fn apply(&self, phi: f64, amps: &mut [Complex64]) {
        match self {
            Generator::Phase { levels, level } => {
                let phases: Vec<Complex64> =
                    levels.iter().map(|d| Complex64::cis(phi * d)).collect();
                for (a, &l) in amps.iter_mut().zip(level) {
                    *a *= phases[l as usize];
                }
            }
            Generator::Pairs {
                kind,
                from,
                to,
                levels,
                level,
            } => {
                let cs: Vec<(f64, f64)> = levels
                    .iter()
                    .map(|w| {
                        let (s, c) = (phi * w).sin_cos();
                        (c, s)
                    })
                    .collect();
                for k in 0..from.len() {
                    let (f, t) = (from[k] as usize, to[k] as usize);
                    let (c, s) = cs[level[k] as usize];
                    let (af, at) = (amps[f], amps[t]);
                    match kind {
                        PairKind::Hermitian => {
                            amps[f] = af * c + I * at * s;
                            amps[t] = at * c + I * af * s;
                        }
                        PairKind::AntiHermitian => {
                            amps[f] = af * c - at * s;
                            amps[t] = at * c + af * s;
                        }
                    }
                }
            }
        }
    }

    /// `out = X psi`, where the factor is `exp(phi X)`.
    pub fn apply_derivative(&self, amps: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        match self {
            Generator::Phase { levels, level } => {
                for ((o, a), &l) in out.iter_mut().zip(amps).zip(level) {
                    *o = I * a * levels[l as usize];
                }
            }
            Generator::Pairs {
                kind,
                from,
                to,
                levels,
                level,
            } => {
                for k in 0..from.len() {
                    let (f, t) = (from[k] as usize, to[k] as usize);
                    let w = levels[level[k] as usize];
                    match kind {
                        PairKind::Hermitian => {
                            out[f] += I * amps[t] * w;
                            out[t] += I * amps[f] * w;
                        }
                        PairKind::AntiHermitian => {
                            out[t] += amps[f] * w;
                            out[f] -= amps[t] * w;
                        }
                    }
                }
            }
        }
    }
}

/// One exponential in a circuit. Its angle is `sum scale * params[index]`.
#[derive(Debug, Clone)]
pub struct Factor {
    pub coeffs: Vec<(usize, f64)>,
    pub generator: Arc<Generator>,
}

impl Factor {
    pub fn new(param: usize, scale: f64, generator: Arc<Generator>) -> Self {
        Self {
            coeffs: vec![(param, scale)],
            generator,
        }
    }

    pub fn angle(&self, params: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, s)| s * params[i]).sum()
    }
}

/// An ordered product of factors; `factors[0]` acts first.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub factors: Vec<Factor>,
    pub n_params: usize,
}

impl Circuit {
    pub fn new(n_params: usize) -> Self {
        Self {
            factors: Vec::new(),
            n_params,
        }
    }

    pub fn push(&mut self, factor: Factor) {
        debug_assert!(factor.coeffs.iter().all(|&(i, _)| i < self.n_params));
        self.factors.push(factor);
    }

    fn check(&self, psi: &StateVector, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::Contract(format!(
                "{} parameters given, circuit takes {}",
                params.len(),
                self.n_params
            )));
        }
        let dim = psi.dim();
        for f in &self.factors {
            let bad = match f.generator.as_ref() {
                Generator::Phase { level, .. } => level.len() != dim,
                Generator::Pairs { from, to, .. } => {
                    from.iter().chain(to).any(|&i| i as usize >= dim)
                }
            };
            if bad {
                return Err(Error::Contract(
                    "circuit was compiled for a different basis".into(),
                ));
            }
        }
        Ok(())
    }

    /// Applies the circuit to `psi` in place.
    pub fn apply(&self, psi: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check(psi, params)?;
        let amps = psi.amps_mut();
        for f in &self.factors {
            f.generator.apply(f.angle(params), amps);
        }
        Ok(())
    }

    pub fn prepare(&self, initial: &StateVector, params: &[f64]) -> Result<StateVector> {
        let mut psi = initial.clone();
        self.apply(&mut psi, params)?;
        Ok(psi)
    }

    /// Energy `<psi(params)|H|psi(params)>` and its gradient by the adjoint
    /// method.
    pub fn energy_gradient(
        &self,
        initial: &StateVector,
        params: &[f64],
        op: &SparseOperator,
    ) -> Result<(f64, Vec<f64>)> {
        let mut psi = self.prepare(initial, params)?;
        let mut lambda: Vec<Complex64> = op.apply_new(psi.amps());
        let energy = psi
            .amps()
            .iter()
            .zip(&lambda)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        let mut grad = vec![0.0; self.n_params];
        let mut scratch = vec![Complex64::new(0.0, 0.0); psi.dim()];
        for f in self.factors.iter().rev() {
            f.generator.apply_derivative(psi.amps(), &mut scratch);
            let d: f64 = 2.0
                * lambda
                    .iter()
                    .zip(&scratch)
                    .map(|(l, x)| (l.conj() * x).re)
                    .sum::<f64>();
            for &(i, s) in &f.coeffs {
                grad[i] += s * d;
            }
            let phi = f.angle(params);
            f.generator.apply(-phi, psi.amps_mut());
            f.generator.apply(-phi, &mut lambda);
        }
        Ok((energy, grad))
    }
}
