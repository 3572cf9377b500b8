//! Model Hamiltonians and their labeled term groups.

mod chemistry;
mod fcidump;
mod hubbard;

pub use chemistry::{
    exchange_touches, group_chemistry, load_integrals, parse_integrals, ChemGroups, ChemHamiltonian,
};
pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump, SpatialIntegrals};
pub use hubbard::{build_hubbard, commuting_sets, Bond, HubbardHamiltonian, HubbardSpec, Ladder};

use serde::{Deserialize, Serialize};

use crate::basis::TermList;

/// Label of a term group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    /// On-site repulsion.
    U,
    /// Vertical (rung) hopping.
    V,
    /// Horizontal (leg) hopping.
    H,
    HEven,
    HOdd,
    /// Third horizontal set needed for odd-length legs.
    HWrap,
    Diag,
    Hop,
    Ex,
    O,
    Rest,
}

impl GroupLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupLabel::U => "U",
            GroupLabel::V => "v",
            GroupLabel::H => "h",
            GroupLabel::HEven => "h_even",
            GroupLabel::HOdd => "h_odd",
            GroupLabel::HWrap => "h_wrap",
            GroupLabel::Diag => "diag",
            GroupLabel::Hop => "hop",
            GroupLabel::Ex => "ex",
            GroupLabel::O => "o",
            GroupLabel::Rest => "rest",
        }
    }
}

impl std::fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A labeled subset of Hamiltonian terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermGroup {
    pub label: GroupLabel,
    pub terms: TermList,
}

impl TermGroup {
    pub fn new(label: GroupLabel, terms: TermList) -> Self {
        Self { label, terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of absolute term coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.op.is_diagonal())
    }
}

/// Whether two terms commute as operators.
///
/// Products of an even number of fermion operators on disjoint modes always
/// commute; diagonal terms commute with each other. Other overlapping pairs
/// are reported as non-commuting, which is conservative.
pub fn terms_commute(a: &crate::basis::FermionTerm, b: &crate::basis::FermionTerm) -> bool {
    if a.op.is_diagonal() && b.op.is_diagonal() {
        return true;
    }
    if a.op == b.op {
        return true;
    }
    let ma = a.op.modes();
    let mb = b.op.modes();
    !ma.iter().any(|m| mb.contains(m))
}

/// Whether every pair of terms in a group commutes (structurally).
pub fn group_commutes(group: &TermGroup) -> bool {
    let t = &group.terms;
    (0..t.len()).all(|i| (i + 1..t.len()).all(|j| terms_commute(&t[i], &t[j])))
}
