//! Real coupled-cluster style ansatz `exp(T) psi` with anti-Hermitian
//! `T = sum_k θ_k (X_k - X_k†)`, realized by second-order product formulas.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::circuit::{forward_image, Circuit, Factor, Generator};
use super::{Ansatz, AnsatzDescriptor, Family};
use crate::basis::{Config, Operator, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::ChemHamiltonian;
use crate::state::StateVector;

/// Which generators are kept, from most to fewest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RxxVariant {
    /// All quadratic and quartic generators.
    #[serde(rename = "RAA")]
    Raa,
    /// All quadratics, quartics acting on the reference.
    #[serde(rename = "RAO")]
    Rao,
    /// Quadratics and quartics acting on the reference.
    #[serde(rename = "ROO")]
    Roo,
    /// Only quartics acting on the reference.
    #[serde(rename = "RNO")]
    Rno,
}

impl RxxVariant {
    pub const ALL: [RxxVariant; 4] = [Self::Raa, Self::Rao, Self::Roo, Self::Rno];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Raa => "RAA",
            Self::Rao => "RAO",
            Self::Roo => "ROO",
            Self::Rno => "RNO",
        }
    }
}

impl std::str::FromStr for RxxVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown Rxx variant {s:?}")))
    }
}

/// Generators of an Rxx ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub variant: RxxVariant,
    pub reference: Config,
    /// `c†_p c_q - h.c.` with `p < q`.
    pub quadratic: Vec<(usize, usize)>,
    /// Two-body generators in canonical operator form: exchange terms on
    /// four distinct modes and number-weighted hops `n_r c†_p c_q`.
    pub quartic: Vec<Operator>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.quadratic.len() + self.quartic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Generators in circuit order: quadratics, then quartics.
    pub fn operators(&self) -> Vec<Operator> {
        self.quadratic
            .iter()
            .map(|&(p, q)| Operator::Hop { p, q })
            .chain(self.quartic.iter().copied())
            .collect()
    }
}

/// Whether `X - X†` has a nonzero action on `reference`.
fn acts_on(op: &Operator, reference: Config) -> bool {
    let conj = match *op {
        Operator::Exchange { p, q, r, s } => Operator::Exchange {
            p: s,
            q: r,
            r: q,
            s: p,
        },
        Operator::Hop { p, q } => Operator::Hop { p: q, q: p },
        Operator::CorrelatedHop { p, q, r } => Operator::CorrelatedHop { p: q, q: p, r },
        _ => return false,
    };
    forward_image(op, reference).is_some() || forward_image(&conj, reference).is_some()
}

/// Selects generators from the Hamiltonian's nonzero off-diagonal terms.
pub fn build_rxx(chem: &ChemHamiltonian, variant: RxxVariant, reference: Config) -> GeneratorSet {
    let mut quadratic = BTreeSet::new();
    let mut quartic = BTreeSet::new();
    for t in chem.terms() {
        match t.op {
            Operator::Hop { p, q } | Operator::CorrelatedHop { p, q, .. } => {
                quadratic.insert((p.min(q), p.max(q)));
                if matches!(t.op, Operator::CorrelatedHop { .. }) {
                    quartic.insert(t.op);
                }
            }
            Operator::Exchange { .. } => {
                quartic.insert(t.op);
            }
            _ => {}
        }
    }
    let keep_quad = |&(p, q): &(usize, usize)| match variant {
        RxxVariant::Raa | RxxVariant::Rao => true,
        RxxVariant::Roo => acts_on(&Operator::Hop { p, q }, reference),
        RxxVariant::Rno => false,
    };
    let keep_quart = |op: &Operator| match variant {
        RxxVariant::Raa => true,
        _ => acts_on(op, reference),
    };
    GeneratorSet {
        variant,
        reference,
        quadratic: quadratic.into_iter().filter(keep_quad).collect(),
        quartic: quartic.into_iter().filter(keep_quart).collect(),
    }
}

/// Compiles `reps` symmetric product steps, each applying every generator
/// at `θ/(2 reps)` forward and then in reverse.
pub fn rxx_circuit(gen: &GeneratorSet, basis: &SectorBasis, reps: usize) -> Result<Ansatz> {
    if reps == 0 {
        return Err(Error::Domain("Trotter number must be at least 1".into()));
    }
    let gens: Vec<Arc<Generator>> = gen
        .operators()
        .iter()
        .map(|op| Generator::anti_hermitian(op, basis).map(Arc::new))
        .collect::<Result<_>>()?;
    let scale = 0.5 / reps as f64;
    let mut c = Circuit::new(gens.len());
    for _ in 0..reps {
        for (k, g) in gens.iter().enumerate() {
            c.push(Factor::new(k, scale, g.clone()));
        }
        for (k, g) in gens.iter().enumerate().rev() {
            c.push(Factor::new(k, scale, g.clone()));
        }
    }
    Ok(Ansatz {
        descriptor: AnsatzDescriptor {
            family: Family::Rxx,
            steps: 0,
            rxx_variant: Some(gen.variant),
            trotter_reps: reps,
            term_order: Default::default(),
            merge_u: false,
        },
        circuit: c,
    })
}

/// `exp(T) psi` approximated with `reps` second-order steps.
pub fn prepare_rxx(
    initial: &StateVector,
    gen: &GeneratorSet,
    coeffs: &[f64],
    reps: usize,
) -> Result<StateVector> {
    if coeffs.len() != gen.len() {
        return Err(Error::Contract(format!(
            "{} coefficients for {} generators",
            coeffs.len(),
            gen.len()
        )));
    }
    rxx_circuit(gen, initial.basis(), reps)?
        .circuit
        .prepare(initial, coeffs)
}
