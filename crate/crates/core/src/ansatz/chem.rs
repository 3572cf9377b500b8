//! The molecular Hamiltonian-variational ansatz with three (diag, hop, ex)
//! or four (diag, hop, o, rest) angles per step.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::circuit::{Circuit, Factor, Generator};
use super::{Ansatz, AnsatzDescriptor, Family, TermOrder};
use crate::basis::{Config, Operator, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::{ChemGroups, TermGroup};

/// All hopping terms acting on one orbital pair: `h_pq` and the correlated
/// hops `h_prrq`, which commute with each other.
#[derive(Debug, Clone, PartialEq)]
pub struct HopBundle {
    pub p: usize,
    pub q: usize,
    pub hop: f64,
    /// `(r, coefficient)` of `n_r (c†_p c_q + h.c.)`.
    pub correlated: Vec<(usize, f64)>,
}

impl HopBundle {
    /// Matrix-element weight on configuration `c` before the fermionic sign.
    pub fn weight(&self, c: Config) -> f64 {
        self.hop
            + self
                .correlated
                .iter()
                .filter(|(r, _)| c >> r & 1 == 1)
                .map(|(_, g)| g)
                .sum::<f64>()
    }

    pub fn generator(&self, basis: &SectorBasis) -> Result<Generator> {
        Generator::hermitian_bundle(
            &Operator::Hop {
                p: self.p,
                q: self.q,
            },
            basis,
            |c| self.weight(c),
            |_| true,
        )
    }
}

/// Groups the hop group by orbital pair, in the requested order.
pub fn hop_bundles(hop: &TermGroup, n_sites: usize, order: TermOrder) -> Result<Vec<HopBundle>> {
    let mut map: BTreeMap<(usize, usize), HopBundle> = BTreeMap::new();
    for t in &hop.terms {
        let (p, q, r) = match t.op {
            Operator::Hop { p, q } => (p, q, None),
            Operator::CorrelatedHop { p, q, r } => (p, q, Some(r)),
            other => return Err(Error::Contract(format!("{other:?} is not a hopping term"))),
        };
        let key = (p.min(q), p.max(q));
        let b = map.entry(key).or_insert_with(|| HopBundle {
            p: key.0,
            q: key.1,
            hop: 0.0,
            correlated: Vec::new(),
        });
        match r {
            None => b.hop += t.coefficient,
            Some(r) => b.correlated.push((r, t.coefficient)),
        }
    }
    let mut bundles: Vec<HopBundle> = map.into_values().collect();
    if order == TermOrder::Interleaved {
        let key = |b: &HopBundle| {
            let (sp, sq) = (b.p % n_sites, b.q % n_sites);
            (sq - sp, sp % 2, sp, b.p / n_sites)
        };
        bundles.sort_by_key(key);
    }
    Ok(bundles)
}

fn exchange_generators(group: &TermGroup, basis: &SectorBasis) -> Result<Vec<Arc<Generator>>> {
    let mut terms = group.terms.clone();
    terms.sort_by(|a, b| a.op.cmp(&b.op));
    terms
        .iter()
        .map(|t| Generator::hermitian_term(t, basis).map(Arc::new))
        .collect()
}

fn push_all(c: &mut Circuit, gens: &[Arc<Generator>], param: usize, scale: f64, reversed: bool) {
    let mut push = |g: &Arc<Generator>| c.push(Factor::new(param, scale, g.clone()));
    if reversed {
        gens.iter().rev().for_each(&mut push);
    } else {
        gens.iter().for_each(&mut push);
    }
}

/// Compiles the molecular Hamiltonian-variational ansatz.
///
/// Each step is `U_ex(θex/2) U_hop(θhop/2) U_diag(θdiag) U_hop(θhop/2)
/// U_ex(θex/2)`, with the factor order of the second application of each
/// product reversed. The four-angle form splits `U_ex` into `U_o U_rest`.
pub fn chem_hv(
    groups: &ChemGroups,
    basis: &SectorBasis,
    descriptor: AnsatzDescriptor,
) -> Result<Ansatz> {
    let per_step = match descriptor.family {
        Family::ChemHv3 => 3,
        Family::ChemHv4 => 4,
        other => {
            return Err(Error::Contract(format!(
                "{other:?} is not a molecular Hamiltonian-variational ansatz"
            )))
        }
    };
    let diag = Arc::new(Generator::diagonal_terms(&groups.diag.terms, basis)?);
    let hop: Vec<Arc<Generator>> =
        hop_bundles(&groups.hop, basis.n_sites(), descriptor.term_order)?
            .iter()
            .map(|b| b.generator(basis).map(Arc::new))
            .collect::<Result<_>>()?;
    // outermost first
    let outer: Vec<Vec<Arc<Generator>>> = if per_step == 3 {
        vec![exchange_generators(&groups.ex, basis)?]
    } else {
        vec![
            exchange_generators(&groups.o, basis)?,
            exchange_generators(&groups.rest, basis)?,
        ]
    };
    let mut c = Circuit::new(per_step * descriptor.steps);
    for b in 0..descriptor.steps {
        let base = per_step * b;
        // parameter layout: diag, hop, then the exchange parts
        for (k, gens) in outer.iter().enumerate() {
            push_all(&mut c, gens, base + 2 + k, 0.5, false);
        }
        push_all(&mut c, &hop, base + 1, 0.5, false);
        c.push(Factor::new(base, 1.0, diag.clone()));
        push_all(&mut c, &hop, base + 1, 0.5, true);
        for (k, gens) in outer.iter().enumerate().rev() {
            push_all(&mut c, gens, base + 2 + k, 0.5, true);
        }
    }
    Ok(Ansatz {
        descriptor,
        circuit: c,
    })
}
