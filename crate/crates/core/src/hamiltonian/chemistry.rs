//! Electronic-structure Hamiltonians over spin-orbitals.
//!
//! Spatial orbital `i` yields spin-orbitals `i` (up) and `i + norb` (down),
//! matching the mode order of [`SectorBasis`](crate::basis::SectorBasis).
//! With chemist-notation integrals,
//!
//! `H = E_core + sum h_ij c†_iσ c_jσ + 1/2 sum (ij|kl) c†_iσ c†_kτ c_lτ c_jσ`.
//!
//! The two-body part is brought to canonical normal-ordered terms: pair
//! densities `n_p n_q`, correlated hops `n_r (c†_p c_q + h.c.)` and exchange
//! terms `c†_p c†_q c_r c_s + h.c.` on four distinct modes.

use std::collections::BTreeMap;
use std::path::Path;

use super::fcidump::{
    parse_fcidump, read_fcidump, SpatialIntegrals, COEFFICIENT_THRESHOLD, SYMMETRY_TOLERANCE,
};
use super::{GroupLabel, TermGroup};
use crate::basis::{Config, FermionTerm, Operator, SectorBasis, TermList, MAX_SITES};
use crate::error::{Error, Result};

/// A second-quantized molecular Hamiltonian.
#[derive(Debug, Clone)]
pub struct ChemHamiltonian {
    pub n_so: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// `h_pq` over spin-orbitals, row-major.
    pub one_body: Vec<f64>,
    /// Coefficient of `c†_p c†_q c_r c_s` at `((p * n + q) * n + r) * n + s`.
    pub two_body: Vec<f64>,
    pub core_energy: f64,
    terms: TermList,
}

impl ChemHamiltonian {
    pub fn from_integrals(ints: &SpatialIntegrals) -> Result<Self> {
        let norb = ints.norb;
        if norb > MAX_SITES {
            return Err(Error::Domain(format!(
                "{norb} spatial orbitals exceed the supported {MAX_SITES}"
            )));
        }
        let (n_up, n_down) = ints.spin_counts()?;
        if n_up > norb || n_down > norb {
            return Err(Error::Validation(format!(
                "{} electrons do not fit in {norb} orbitals",
                ints.nelec
            )));
        }
        let n = 2 * norb;
        let mut one_body = vec![0.0; n * n];
        let mut two_body = vec![0.0; n.pow(4)];
        for s in 0..2 {
            for i in 0..norb {
                for j in 0..norb {
                    one_body[(i + s * norb) * n + j + s * norb] = ints.h(i, j);
                }
            }
        }
        for i in 0..norb {
            for j in 0..norb {
                for k in 0..norb {
                    for l in 0..norb {
                        let v = ints.eri(i, j, k, l);
                        if v == 0.0 {
                            continue;
                        }
                        for s in 0..2 {
                            for t in 0..2 {
                                let p = i + s * norb;
                                let q = k + t * norb;
                                let r = l + t * norb;
                                let ss = j + s * norb;
                                if p == q || r == ss {
                                    continue;
                                }
                                two_body[((p * n + q) * n + r) * n + ss] += 0.5 * v;
                            }
                        }
                    }
                }
            }
        }
        let mut ham = Self {
            n_so: n,
            n_up,
            n_down,
            one_body,
            two_body,
            core_energy: ints.core_energy,
            terms: Vec::new(),
        };
        ham.terms = ham.canonical_terms()?;
        Ok(ham)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_so / 2
    }

    pub fn n_electrons(&self) -> usize {
        self.n_up + self.n_down
    }

    /// The sector fixed by the electron count and spin.
    pub fn basis(&self) -> Result<SectorBasis> {
        SectorBasis::new(self.n_orbitals(), self.n_up, self.n_down)
    }

    /// Canonical terms, excluding the constant core energy.
    pub fn terms(&self) -> &TermList {
        &self.terms
    }

    fn canonical_terms(&self) -> Result<TermList> {
        let n = self.n_so;
        let mut diagonal: BTreeMap<Operator, f64> = BTreeMap::new();
        // (forward, backward) accumulations of each off-diagonal operator
        let mut paired: BTreeMap<Operator, (f64, f64)> = BTreeMap::new();

        for p in 0..n {
            for q in 0..n {
                let v = self.one_body[p * n + q];
                if v == 0.0 {
                    continue;
                }
                if p == q {
                    *diagonal.entry(Operator::Number { p }).or_default() += v;
                } else {
                    let e = paired
                        .entry(Operator::Hop {
                            p: p.min(q),
                            q: p.max(q),
                        })
                        .or_default();
                    if p < q {
                        e.0 += v;
                    } else {
                        e.1 += v;
                    }
                }
            }
        }

        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two_body[((p * n + q) * n + r) * n + s];
                        if v == 0.0 {
                            continue;
                        }
                        let (a, b, mut sign) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
                        let (c, d) = if r < s {
                            (r, s)
                        } else {
                            sign = -sign;
                            (s, r)
                        };
                        let v = sign * v;
                        if (a, b) == (c, d) {
                            // c†_a c†_b c_a c_b = -n_a n_b
                            *diagonal
                                .entry(Operator::PairDensity { p: a, q: b })
                                .or_default() -= v;
                            continue;
                        }
                        let shared = [a, b].into_iter().find(|m| *m == c || *m == d);
                        match shared {
                            Some(m) => {
                                let x = if a == m { b } else { a };
                                let y = if c == m { d } else { c };
                                let sign = if a == m { 1.0 } else { -1.0 }
                                    * if d == m { 1.0 } else { -1.0 };
                                let e = paired
                                    .entry(Operator::CorrelatedHop {
                                        p: x.min(y),
                                        q: x.max(y),
                                        r: m,
                                    })
                                    .or_default();
                                if x < y {
                                    e.0 += sign * v;
                                } else {
                                    e.1 += sign * v;
                                }
                            }
                            None => {
                                let (op, forward) = if (a, b) < (c, d) {
                                    (
                                        Operator::Exchange {
                                            p: a,
                                            q: b,
                                            r: c,
                                            s: d,
                                        },
                                        true,
                                    )
                                } else {
                                    (
                                        Operator::Exchange {
                                            p: c,
                                            q: d,
                                            r: a,
                                            s: b,
                                        },
                                        false,
                                    )
                                };
                                let e = paired.entry(op).or_default();
                                if forward {
                                    e.0 += v;
                                } else {
                                    e.1 += v;
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut terms = Vec::new();
        for (op, v) in diagonal {
            if v.abs() >= COEFFICIENT_THRESHOLD {
                terms.push(FermionTerm::new(op, v));
            }
        }
        for (op, (f, b)) in paired {
            if (f - b).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Validation(format!(
                    "{op:?} has coefficient {f} but its conjugate has {b}"
                )));
            }
            let v = 0.5 * (f + b);
            if v.abs() >= COEFFICIENT_THRESHOLD {
                terms.push(FermionTerm::new(op, v));
            }
        }
        let n_sites = self.n_orbitals();
        for t in &terms {
            t.op.validate(n_sites)?;
        }
        Ok(terms)
    }
}

/// Reads an FCIDUMP file into a spin-orbital Hamiltonian.
pub fn load_integrals(path: impl AsRef<Path>) -> Result<ChemHamiltonian> {
    ChemHamiltonian::from_integrals(&read_fcidump(path)?)
}

/// Parses FCIDUMP text into a spin-orbital Hamiltonian.
pub fn parse_integrals(text: &str) -> Result<ChemHamiltonian> {
    ChemHamiltonian::from_integrals(&parse_fcidump(text)?)
}

/// The term groups of a molecular Hamiltonian relative to a reference
/// occupation.
#[derive(Debug, Clone)]
pub struct ChemGroups {
    pub reference: Config,
    pub diag: TermGroup,
    pub hop: TermGroup,
    pub ex: TermGroup,
    /// Exchange terms that do not annihilate the reference.
    pub o: TermGroup,
    pub rest: TermGroup,
}

impl ChemGroups {
    pub fn get(&self, label: GroupLabel) -> Option<&TermGroup> {
        match label {
            GroupLabel::Diag => Some(&self.diag),
            GroupLabel::Hop => Some(&self.hop),
            GroupLabel::Ex => Some(&self.ex),
            GroupLabel::O => Some(&self.o),
            GroupLabel::Rest => Some(&self.rest),
            _ => None,
        }
    }
}

/// Whether an exchange operator `c†_p c†_q c_r c_s + h.c.` has a nonzero
/// action on the occupation `reference`.
pub fn exchange_touches(op: &Operator, reference: Config) -> bool {
    let occ = |m: usize| reference >> m & 1 == 1;
    match *op {
        Operator::Exchange { p, q, r, s } => {
            (!occ(p) && !occ(q) && occ(r) && occ(s)) || (occ(p) && occ(q) && !occ(r) && !occ(s))
        }
        _ => false,
    }
}

/// Splits the Hamiltonian into diagonal, hopping and exchange groups, and
/// the exchange group further by its action on `hf_occupation`.
pub fn group_chemistry(chem: &ChemHamiltonian, hf_occupation: Config) -> Result<ChemGroups> {
    let norb = chem.n_orbitals();
    let up = (hf_occupation & ((1u64 << norb) - 1)).count_ones() as usize;
    let down = (hf_occupation >> norb).count_ones() as usize;
    if (up, down) != (chem.n_up, chem.n_down) || hf_occupation >> chem.n_so != 0 {
        return Err(Error::Contract(format!(
            "reference {hf_occupation:#b} does not hold ({}, {}) electrons",
            chem.n_up, chem.n_down
        )));
    }
    let mut diag = Vec::new();
    let mut hop = Vec::new();
    let mut ex = Vec::new();
    let mut o = Vec::new();
    let mut rest = Vec::new();
    for t in chem.terms() {
        match t.op {
            Operator::Number { .. } | Operator::PairDensity { .. } => diag.push(*t),
            Operator::Hop { .. } | Operator::CorrelatedHop { .. } => hop.push(*t),
            Operator::Exchange { .. } => {
                ex.push(*t);
                if exchange_touches(&t.op, hf_occupation) {
                    o.push(*t);
                } else {
                    rest.push(*t);
                }
            }
        }
    }
    Ok(ChemGroups {
        reference: hf_occupation,
        diag: TermGroup::new(GroupLabel::Diag, diag),
        hop: TermGroup::new(GroupLabel::Hop, hop),
        ex: TermGroup::new(GroupLabel::Ex, ex),
        o: TermGroup::new(GroupLabel::O, o),
        rest: TermGroup::new(GroupLabel::Rest, rest),
    })
}
