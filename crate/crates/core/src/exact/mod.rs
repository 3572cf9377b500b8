//! Reference ground states, free-fermion spectra and initial states.

mod lanczos;

pub use lanczos::{lowest_eigenpairs, Lanczos, LanczosOptions};

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{binomial, Config, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hubbard, ChemHamiltonian, HubbardSpec};
use crate::operator::SparseOperator;
use crate::state::StateVector;
use crate::FermionTerm;

/// The ground space of a Hamiltonian in one sector.
#[derive(Debug, Clone)]
pub struct GroundInfo {
    pub energy: f64,
    pub degeneracy: usize,
    /// Orthonormal basis of the ground space.
    pub vectors: Vec<Vec<f64>>,
    /// All converged low-lying eigenvalues, ascending.
    pub spectrum: Vec<f64>,
    pub spin_sector: (usize, usize),
}

/// Ground space of `op` on `basis`, with at least `k` eigenpairs resolved.
///
/// The number of computed eigenpairs grows until one lies above the ground
/// cluster, so the degeneracy is always complete.
pub fn ground_space_op(
    op: &SparseOperator,
    basis: &SectorBasis,
    k: usize,
    opts: LanczosOptions,
) -> Result<GroundInfo> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let dim = op.dim();
    let mut solver = Lanczos::new(op, opts);
    let mut want = k.max(2).min(dim);
    loop {
        solver.ensure(want)?;
        let values = solver.values();
        let e0 = values[0];
        let thr = opts.degeneracy_tol * e0.abs().max(1.0);
        let d = values.iter().take_while(|&&v| v - e0 <= thr).count();
        if d < values.len().min(want) || values.len() == dim {
            return Ok(GroundInfo {
                energy: e0,
                degeneracy: d,
                vectors: solver.vectors()[..d].to_vec(),
                spectrum: values.to_vec(),
                spin_sector: basis.sector(),
            });
        }
        want = (want * 2).min(dim);
    }
}

/// Ground space of the term list `terms` on `basis`.
pub fn ground_space(terms: &[FermionTerm], basis: &SectorBasis, k: usize) -> Result<GroundInfo> {
    let op = SparseOperator::from_terms(terms, basis)?;
    ground_space_op(&op, basis, k, LanczosOptions::default())
}

/// Occupation structure of a free-fermion spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiInfo {
    pub eigenvalues: Vec<f64>,
    pub n_particles: usize,
    /// Levels strictly below the Fermi energy.
    pub below: usize,
    /// Levels at the Fermi energy; zero for a closed shell.
    pub at_fermi: usize,
    /// Particles placed at the Fermi energy.
    pub occupied_at_fermi: usize,
}

impl FermiInfo {
    pub fn new(mut eigenvalues: Vec<f64>, n_particles: usize) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let n = eigenvalues.len();
        let scale = eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        let tol = 1e-9 * scale;
        if n_particles == 0 || n_particles == n {
            return Self {
                eigenvalues,
                n_particles,
                below: n_particles,
                at_fermi: 0,
                occupied_at_fermi: 0,
            };
        }
        let ef = eigenvalues[n_particles - 1];
        if eigenvalues[n_particles] - ef > tol {
            return Self {
                eigenvalues,
                n_particles,
                below: n_particles,
                at_fermi: 0,
                occupied_at_fermi: 0,
            };
        }
        let below = eigenvalues.iter().filter(|&&e| e < ef - tol).count();
        let at_fermi = eigenvalues
            .iter()
            .filter(|&&e| (e - ef).abs() <= tol)
            .count();
        Self {
            eigenvalues,
            n_particles,
            below,
            at_fermi,
            occupied_at_fermi: n_particles - below,
        }
    }

    /// Ways to fill the Fermi level.
    pub fn degeneracy(&self) -> usize {
        if self.at_fermi == 0 {
            1
        } else {
            binomial(self.at_fermi, self.occupied_at_fermi)
        }
    }
}

fn sorted_eigen(m: Vec<Vec<f64>>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Single-particle spectrum of the ladder's hopping at half filling of one
/// species (`n_sites / 2` particles).
pub fn single_particle_spectrum(spec: &HubbardSpec) -> Result<FermiInfo> {
    let ham = build_hubbard(spec)?;
    let (values, _) = sorted_eigen(ham.one_body_matrix(1.0));
    Ok(FermiInfo::new(values, spec.n_sites / 2))
}

/// Ground degeneracy of the non-interacting ladder in a sector.
pub fn free_fermion_degeneracy(spec: &HubbardSpec, sector: (usize, usize)) -> Result<usize> {
    let ham = build_hubbard(spec)?;
    let (values, _) = sorted_eigen(ham.one_body_matrix(1.0));
    Ok(FermiInfo::new(values.clone(), sector.0).degeneracy()
        * FermiInfo::new(values, sector.1).degeneracy())
}

fn minor_determinants(orbitals: &DMatrix<f64>, masks: &[u32], n: usize) -> Vec<f64> {
    masks
        .iter()
        .map(|&mask| {
            let rows: Vec<usize> = (0..32).filter(|b| mask >> b & 1 == 1).collect();
            let sub = DMatrix::from_fn(n, n, |r, c| orbitals[(rows[r], c)]);
            if n == 0 {
                1.0
            } else {
                sub.lu().determinant()
            }
        })
        .collect()
}

/// Slater determinant of the lowest orbitals of `t h_h + (1 - epsilon) t h_v`.
pub fn slater_initial_state(
    spec: &HubbardSpec,
    sector: (usize, usize),
    epsilon: f64,
) -> Result<StateVector> {
    let basis = Arc::new(SectorBasis::new(spec.n_sites, sector.0, sector.1)?);
    slater_state_on(spec, basis, epsilon)
}

/// As [`slater_initial_state`] on an existing basis.
pub fn slater_state_on(
    spec: &HubbardSpec,
    basis: Arc<SectorBasis>,
    epsilon: f64,
) -> Result<StateVector> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let ham = build_hubbard(spec)?;
    let (values, vectors) = sorted_eigen(ham.one_body_matrix(1.0 - epsilon));
    let scale = values.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    for n in [basis.n_up(), basis.n_down()] {
        if n > 0 && n < values.len() && values[n] - values[n - 1] <= 1e-8 * scale {
            return Err(Error::DegenerateFermiLevel(format!(
                "levels {} and {} coincide at {} for {n} particles",
                n - 1,
                n,
                values[n - 1]
            )));
        }
    }
    let up = minor_determinants(&vectors, basis.up_states(), basis.n_up());
    let down = minor_determinants(&vectors, basis.down_states(), basis.n_down());
    let nd = down.len();
    let amps: Vec<Complex64> = (0..basis.dim())
        .map(|i| Complex64::new(up[i / nd] * down[i % nd], 0.0))
        .collect();
    let mut psi = StateVector::new(basis, amps)?;
    psi.normalize()?;
    Ok(psi)
}

/// The lowest-energy single configuration of the diagonal part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfReference {
    pub index: usize,
    pub config: Config,
    pub energy: f64,
    /// Number of other configurations tied with the chosen one.
    pub ties: usize,
}

/// Diagonal energy of every configuration in `basis`.
pub fn diagonal_energies(terms: &[FermionTerm], basis: &SectorBasis) -> Vec<f64> {
    let diag: Vec<&FermionTerm> = terms.iter().filter(|t| t.op.is_diagonal()).collect();
    basis
        .configs()
        .map(|c| {
            diag.iter()
                .map(|t| t.coefficient * t.op.diagonal_value(c))
                .sum()
        })
        .collect()
}

/// Basis state minimizing the diagonal energy; ties go to the lowest index.
pub fn hf_initial_state(
    chem: &ChemHamiltonian,
    basis: Arc<SectorBasis>,
) -> Result<(StateVector, HfReference)> {
    if basis.sector() != (chem.n_up, chem.n_down) || basis.n_sites() != chem.n_orbitals() {
        return Err(Error::Contract(format!(
            "basis sector {:?} does not match the Hamiltonian's ({}, {})",
            basis.sector(),
            chem.n_up,
            chem.n_down
        )));
    }
    let energies = diagonal_energies(chem.terms(), &basis);
    let mut best = 0;
    for (i, &e) in energies.iter().enumerate() {
        if e < energies[best] {
            best = i;
        }
    }
    let e = energies[best];
    let ties = energies
        .iter()
        .filter(|&&x| (x - e).abs() <= 1e-12 * e.abs().max(1.0))
        .count()
        - 1;
    let reference = HfReference {
        index: best,
        config: basis.config(best),
        energy: e,
        ties,
    };
    Ok((StateVector::basis_state(basis, best)?, reference))
}

/// Energy, error and ground-space weight of a trial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub error: f64,
    pub overlap: f64,
}

/// `E = <psi|H|psi>`, `E - E0`, and `P = sum_i |<v_i|psi>|^2`.
pub fn energy_and_overlap(
    psi: &StateVector,
    op: &SparseOperator,
    ground: &GroundInfo,
) -> EnergyReport {
    let energy = psi.expectation(op);
    EnergyReport {
        energy,
        error: energy - ground.energy,
        overlap: ground_overlap(psi, ground),
    }
}

/// Squared norm of the projection of `psi` onto the ground space.
pub fn ground_overlap(psi: &StateVector, ground: &GroundInfo) -> f64 {
    ground.vectors.iter().map(|v| psi.overlap_sq_real(v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Operator;

    #[test]
    fn single_site_double_occupancy() {
        let basis = SectorBasis::new(1, 1, 1).unwrap();
        let terms = vec![FermionTerm::new(Operator::PairDensity { p: 0, q: 1 }, 2.5)];
        let g = ground_space(&terms, &basis, 1).unwrap();
        assert!((g.energy - 2.5).abs() < 1e-12);
        assert_eq!(g.degeneracy, 1);
    }

    #[test]
    fn fermi_levels() {
        for (n, at) in [(4, 2), (6, 2), (10, 2), (12, 4)] {
            let info = single_particle_spectrum(&HubbardSpec::new(n, 1.0, 0.0)).unwrap();
            assert_eq!(info.at_fermi, at, "N={n}");
        }
        let eight = single_particle_spectrum(&HubbardSpec::new(8, 1.0, 0.0)).unwrap();
        assert_eq!(eight.at_fermi, 0);
        let flux =
            single_particle_spectrum(&HubbardSpec::new(8, 1.0, 0.0).with_flux(true)).unwrap();
        assert_eq!(flux.at_fermi, 4);
    }

    #[test]
    fn free_degeneracies() {
        for (n, d) in [(4, 4), (6, 4), (8, 1), (10, 4), (12, 36)] {
            let spec = HubbardSpec::new(n, 1.0, 0.0);
            assert_eq!(
                free_fermion_degeneracy(&spec, (n / 2, n / 2)).unwrap(),
                d,
                "N={n}"
            );
        }
    }

    #[test]
    fn degenerate_fermi_level_is_reported() {
        let spec = HubbardSpec::new(4, 1.0, 0.0);
        assert!(matches!(
            slater_initial_state(&spec, (2, 2), 0.0),
            Err(Error::DegenerateFermiLevel(_))
        ));
        assert!(slater_initial_state(&spec, (2, 2), 1e-3).is_ok());
    }

    #[test]
    fn aufbau_reference() {
        use crate::hamiltonian::SpatialIntegrals;
        let mut ints = SpatialIntegrals::zeros(4, 4, 0);
        for i in 0..4 {
            ints.set_h(i, i, i as f64 - 2.0);
        }
        let chem = ChemHamiltonian::from_integrals(&ints).unwrap();
        let basis = Arc::new(chem.basis().unwrap());
        let (_, hf) = hf_initial_state(&chem, basis).unwrap();
        assert_eq!(hf.config, 0b0011_0011);
        assert_eq!(hf.ties, 0);
    }
}
