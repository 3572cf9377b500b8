//! The Hubbard step ansatz `U_U(θU/2) U_h(θh) U_v(θv) U_U(θU/2)`.

use std::sync::Arc;

use super::circuit::{Circuit, Factor, Generator};
use super::{Ansatz, AnsatzDescriptor, Family};
use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::hamiltonian::{group_commutes, GroupLabel, HubbardHamiltonian, TermGroup};
use crate::state::StateVector;

/// Compiled exponentials of the Hubbard groups on one sector.
#[derive(Debug, Clone)]
pub struct HubbardCircuits {
    pub u: Arc<Generator>,
    pub v: Vec<Arc<Generator>>,
    /// Horizontal hops per row, left to right, both spins of a bond adjacent.
    pub h_rows: Vec<Vec<Arc<Generator>>>,
}

impl HubbardCircuits {
    pub fn new(ham: &HubbardHamiltonian, basis: &SectorBasis) -> Result<Self> {
        if basis.n_sites() != ham.spec.n_sites {
            return Err(Error::Contract(format!(
                "basis has {} sites, ladder has {}",
                basis.n_sites(),
                ham.spec.n_sites
            )));
        }
        let u = Arc::new(Generator::diagonal_terms(
            &ham.group(GroupLabel::U).terms,
            basis,
        )?);
        let v = ham
            .group(GroupLabel::V)
            .terms
            .iter()
            .map(|t| Generator::hermitian_term(t, basis).map(Arc::new))
            .collect::<Result<_>>()?;
        let h_terms = &ham.group(GroupLabel::H).terms;
        let mut h_rows = vec![Vec::new(), Vec::new()];
        // the h group lists both spins of each bond consecutively, in bond order
        for (bond, pair) in ham.ladder.horizontal.iter().zip(h_terms.chunks(2)) {
            for t in pair {
                h_rows[bond.row].push(Arc::new(Generator::hermitian_term(t, basis)?));
            }
        }
        Ok(Self { u, v, h_rows })
    }

    /// Pushes `U_h(θ)` as a symmetric sweep: each row left to right then
    /// right to left, at half angle.
    pub fn push_h(&self, circuit: &mut Circuit, param: usize, scale: f64) {
        for row in &self.h_rows {
            for g in row {
                circuit.push(Factor::new(param, 0.5 * scale, g.clone()));
            }
            for g in row.iter().rev() {
                circuit.push(Factor::new(param, 0.5 * scale, g.clone()));
            }
        }
    }

    pub fn push_v(&self, circuit: &mut Circuit, param: usize, scale: f64) {
        for g in &self.v {
            circuit.push(Factor::new(param, scale, g.clone()));
        }
    }

    /// Pushes `steps` ansatz steps with parameter layout `[h, v, U]` per step.
    pub fn push_steps(&self, circuit: &mut Circuit, steps: usize, offset: usize, merge_u: bool) {
        for b in 0..steps {
            let base = offset + 3 * b;
            let (h, v, u) = (base, base + 1, base + 2);
            if !merge_u || b == 0 {
                circuit.push(Factor::new(u, 0.5, self.u.clone()));
            }
            self.push_v(circuit, v, 1.0);
            self.push_h(circuit, h, 1.0);
            if merge_u && b + 1 < steps {
                circuit.push(Factor {
                    coeffs: vec![(u, 0.5), (u + 3, 0.5)],
                    generator: self.u.clone(),
                });
            } else {
                circuit.push(Factor::new(u, 0.5, self.u.clone()));
            }
        }
    }
}

/// Compiles the Hubbard step ansatz for `descriptor.steps` steps.
pub fn hubbard_hv(
    ham: &HubbardHamiltonian,
    basis: &SectorBasis,
    descriptor: AnsatzDescriptor,
) -> Result<Ansatz> {
    if descriptor.family != Family::HubbardHv {
        return Err(Error::Contract(format!(
            "{:?} is not a Hubbard ansatz",
            descriptor.family
        )));
    }
    let parts = HubbardCircuits::new(ham, basis)?;
    let mut circuit = Circuit::new(3 * descriptor.steps);
    parts.push_steps(&mut circuit, descriptor.steps, 0, descriptor.merge_u);
    Ok(Ansatz {
        descriptor,
        circuit,
    })
}

/// `exp(i θ h_group) psi` for an internally commuting group.
pub fn apply_exact_group_rotation(
    psi: &StateVector,
    group: &TermGroup,
    theta: f64,
) -> Result<StateVector> {
    if !group_commutes(group) {
        return Err(Error::Contract(format!(
            "group {} is not internally commuting",
            group.label
        )));
    }
    let basis = psi.basis();
    let diag: Vec<_> = group
        .terms
        .iter()
        .filter(|t| t.op.is_diagonal())
        .copied()
        .collect();
    let mut out = psi.clone();
    if !diag.is_empty() {
        Generator::diagonal_terms(&diag, basis)?.apply(theta, out.amps_mut());
    }
    for t in group.terms.iter().filter(|t| !t.op.is_diagonal()) {
        Generator::hermitian_term(t, basis)?.apply(theta, out.amps_mut());
    }
    Ok(out)
}

/// Second-order product approximation of `exp(i θ h_h) psi`.
pub fn apply_trotter_h(
    psi: &StateVector,
    ham: &HubbardHamiltonian,
    theta: f64,
) -> Result<StateVector> {
    let parts = HubbardCircuits::new(ham, psi.basis())?;
    let mut circuit = Circuit::new(1);
    parts.push_h(&mut circuit, 0, 1.0);
    circuit.prepare(psi, &[theta])
}
