//! Trial-state circuits: the Hamiltonian-variational ansatz for Hubbard
//! ladders and molecules, and the real coupled-cluster style Rxx family.

mod chem;
mod circuit;
mod hubbard;
mod rxx;

pub use chem::{chem_hv, hop_bundles, HopBundle};
pub use circuit::{forward_image, Circuit, Factor, Generator, PairKind};
pub use hubbard::{apply_exact_group_rotation, apply_trotter_h, hubbard_hv, HubbardCircuits};
pub use rxx::{build_rxx, prepare_rxx, rxx_circuit, GeneratorSet, RxxVariant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Ansatz family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    HubbardHv,
    ChemHv3,
    ChemHv4,
    Rxx,
}

/// Order of the `U_pq` factors within `U_hop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrder {
    /// Pairs by increasing orbital distance, even then odd lower index.
    #[default]
    Interleaved,
    Lexicographic,
}

/// Everything needed to rebuild an ansatz circuit for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzDescriptor {
    pub family: Family,
    pub steps: usize,
    #[serde(default)]
    pub rxx_variant: Option<RxxVariant>,
    #[serde(default = "default_reps")]
    pub trotter_reps: usize,
    #[serde(default)]
    pub term_order: TermOrder,
    /// Merge adjacent `U_U` half rotations of consecutive steps.
    #[serde(default)]
    pub merge_u: bool,
}

fn default_reps() -> usize {
    2
}

impl AnsatzDescriptor {
    pub fn hubbard(steps: usize) -> Self {
        Self {
            family: Family::HubbardHv,
            steps,
            rxx_variant: None,
            trotter_reps: default_reps(),
            term_order: TermOrder::default(),
            merge_u: false,
        }
    }

    pub fn chem(family: Family, steps: usize) -> Self {
        Self {
            family,
            ..Self::hubbard(steps)
        }
    }

    pub fn rxx(variant: RxxVariant, reps: usize) -> Self {
        Self {
            family: Family::Rxx,
            steps: 0,
            rxx_variant: Some(variant),
            trotter_reps: reps,
            term_order: TermOrder::default(),
            merge_u: false,
        }
    }

    /// Angles per step for the step-structured families.
    pub fn params_per_step(&self) -> Option<usize> {
        match self.family {
            Family::HubbardHv | Family::ChemHv3 => Some(3),
            Family::ChemHv4 => Some(4),
            Family::Rxx => None,
        }
    }
}

/// Parameters together with the ansatz they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub descriptor: AnsatzDescriptor,
}

/// A compiled ansatz.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub descriptor: AnsatzDescriptor,
    pub circuit: Circuit,
}

impl Ansatz {
    pub fn n_params(&self) -> usize {
        self.circuit.n_params
    }

    pub fn prepare(&self, initial: &StateVector, params: &ParamVector) -> Result<StateVector> {
        if params.descriptor != self.descriptor {
            return Err(Error::Contract(
                "parameters belong to a different ansatz".into(),
            ));
        }
        self.circuit.prepare(initial, &params.values)
    }
}
