//! Exact state-vector simulation of Hamiltonian-variational and
//! coupled-cluster style variational algorithms.
//!
//! The crate covers fermionic sector bases ([`basis`]), Hubbard-ladder and
//! molecular Hamiltonians ([`hamiltonian`]), reference ground states
//! ([`exact`]), trial-state circuits ([`ansatz`]), the optimization drivers
//! ([`optimize`]), shot-noise simulation ([`measure`]) and resource
//! estimates ([`resources`]).

pub mod ansatz;
pub mod basis;
pub mod error;
pub mod exact;
pub mod hamiltonian;
pub mod measure;
pub mod operator;
pub mod optimize;
pub mod resources;
pub mod state;

pub use basis::{Config, FermionTerm, Operator, SectorBasis, TermKind, TermList};
pub use error::{Error, Result};
pub use operator::SparseOperator;
pub use state::StateVector;

/// Version string embedded in serialized results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
