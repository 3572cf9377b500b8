//! Normalized complex state vectors over a sector basis.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::operator::SparseOperator;

/// Complex amplitudes over a [`SectorBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<SectorBasis>,
    amps: Vec<Complex64>,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.basis.sector() == other.basis.sector()
            && self.basis.n_sites() == other.basis.n_sites()
            && self.amps == other.amps
    }
}

impl StateVector {
    pub fn new(basis: Arc<SectorBasis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Contract(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amps })
    }

    pub fn from_real(basis: Arc<SectorBasis>, amps: &[f64]) -> Result<Self> {
        Self::new(
            basis,
            amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    /// The basis state with index `index`.
    pub fn basis_state(basis: Arc<SectorBasis>, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::Contract(format!(
                "basis index {index} out of range {}",
                basis.dim()
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Contract("cannot normalize a zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<self|op|self>`.
    pub fn expectation(&self, op: &SparseOperator) -> f64 {
        op.expectation(&self.amps)
    }

    /// `|<v|self>|^2` for a real vector `v`.
    pub fn overlap_sq_real(&self, v: &[f64]) -> f64 {
        self.amps
            .iter()
            .zip(v)
            .map(|(a, &b)| a * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}
