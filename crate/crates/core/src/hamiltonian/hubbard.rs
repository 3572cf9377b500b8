//! Hubbard model on a two-leg ladder.
//!
//! Sites `0..L` form the top leg and `L..2L` the bottom leg, with site `x`
//! directly above site `L + x`. Legs are periodic, rungs open.

use serde::{Deserialize, Serialize};

use super::{GroupLabel, TermGroup};
use crate::basis::{FermionTerm, Operator, TermList};
use crate::error::{Error, Result};

/// Parameters of a Hubbard ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub n_sites: usize,
    pub t: f64,
    pub u: f64,
    /// Horizontal hopping scaled by `1/sqrt(2)` with the wrap-around bonds
    /// sign-flipped (a pi flux through each leg loop).
    #[serde(default)]
    pub flux: bool,
    /// Rung weakening used only to prepare the initial Slater determinant.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-3
}

impl HubbardSpec {
    pub fn new(n_sites: usize, t: f64, u: f64) -> Self {
        Self {
            n_sites,
            t,
            u,
            flux: false,
            epsilon: default_epsilon(),
        }
    }

    pub fn with_flux(mut self, flux: bool) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 || self.n_sites % 2 != 0 {
            return Err(Error::Domain(format!(
                "ladder needs an even number of sites >= 4, got {}",
                self.n_sites
            )));
        }
        if self.flux && self.n_sites < 6 {
            return Err(Error::Domain(
                "flux variant needs legs of length >= 3".into(),
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Ladder {
        Ladder::new(self.n_sites)
    }

    /// Spin sector used for the ground state: `(N/2+1, N/2-1)` for
    /// `N = 4n+2`, otherwise half filling with equal spins.
    pub fn default_sector(&self) -> (usize, usize) {
        let half = self.n_sites / 2;
        if self.n_sites % 4 == 2 {
            (half + 1, half - 1)
        } else {
            (half, half)
        }
    }

    /// Signed coefficient of a horizontal bond's hopping term.
    pub fn horizontal_coefficient(&self, bond: &Bond) -> f64 {
        if self.flux {
            let c = -self.t / std::f64::consts::SQRT_2;
            if bond.wrap {
                -c
            } else {
                c
            }
        } else {
            -self.t
        }
    }
}

/// A nearest-neighbour bond `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    /// Periodic wrap-around bond of a leg.
    pub wrap: bool,
    /// Column of the bond's left site.
    pub column: usize,
    pub row: usize,
}

/// Bond structure of an `(N/2) x 2` ladder.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub n_sites: usize,
    pub length: usize,
    /// Horizontal bonds, row by row, left to right.
    pub horizontal: Vec<Bond>,
    pub vertical: Vec<Bond>,
}

impl Ladder {
    pub fn new(n_sites: usize) -> Self {
        let length = n_sites / 2;
        let mut horizontal = Vec::new();
        for row in 0..2 {
            for x in 0..length {
                let nx = (x + 1) % length;
                // a two-site leg has a single bond; the wrap would duplicate it
                if length == 2 && x == 1 {
                    continue;
                }
                horizontal.push(Bond {
                    a: row * length + x,
                    b: row * length + nx,
                    wrap: nx == 0,
                    column: x,
                    row,
                });
            }
        }
        let vertical = (0..length)
            .map(|x| Bond {
                a: x,
                b: length + x,
                wrap: false,
                column: x,
                row: 0,
            })
            .collect();
        Self {
            n_sites,
            length,
            horizontal,
            vertical,
        }
    }

    pub fn row_bonds(&self, row: usize) -> impl Iterator<Item = &Bond> {
        self.horizontal.iter().filter(move |b| b.row == row)
    }

    /// Edge colouring of each leg's bonds so that bonds of one colour share no
    /// site. Even legs need two colours, odd legs three.
    pub fn horizontal_colours(&self) -> Vec<usize> {
        let mut colours = vec![usize::MAX; self.horizontal.len()];
        for (i, bond) in self.horizontal.iter().enumerate() {
            let used: Vec<usize> = self
                .horizontal
                .iter()
                .zip(&colours)
                .filter(|(o, &c)| {
                    c != usize::MAX
                        && (o.a == bond.a || o.a == bond.b || o.b == bond.a || o.b == bond.b)
                })
                .map(|(_, &c)| c)
                .collect();
            colours[i] = (0..).find(|c| !used.contains(c)).unwrap();
        }
        colours
    }
}

fn hop(n_sites: usize, a: usize, b: usize, spin: usize, coefficient: f64) -> FermionTerm {
    FermionTerm::new(
        Operator::Hop {
            p: a + spin * n_sites,
            q: b + spin * n_sites,
        },
        coefficient,
    )
}

/// A Hubbard Hamiltonian with its `U`, `v`, `h` groups.
#[derive(Debug, Clone)]
pub struct HubbardHamiltonian {
    pub spec: HubbardSpec,
    pub ladder: Ladder,
    pub full: TermList,
    pub groups: Vec<TermGroup>,
}

impl HubbardHamiltonian {
    pub fn group(&self, label: GroupLabel) -> &TermGroup {
        self.groups
            .iter()
            .find(|g| g.label == label)
            .expect("hubbard groups are U, v and h")
    }

    /// One-body hopping matrix of a single spin species, with rung bonds
    /// scaled by `vertical_scale`.
    pub fn one_body_matrix(&self, vertical_scale: f64) -> Vec<Vec<f64>> {
        let n = self.spec.n_sites;
        let mut m = vec![vec![0.0; n]; n];
        for b in &self.ladder.horizontal {
            let c = self.spec.horizontal_coefficient(b);
            m[b.a][b.b] += c;
            m[b.b][b.a] += c;
        }
        for b in &self.ladder.vertical {
            let c = -self.spec.t * vertical_scale;
            m[b.a][b.b] += c;
            m[b.b][b.a] += c;
        }
        m
    }

    /// Hopping terms only (`h + v`).
    pub fn hopping_terms(&self) -> TermList {
        let mut t = self.group(GroupLabel::H).terms.clone();
        t.extend(self.group(GroupLabel::V).terms.iter().copied());
        t
    }
}

/// Builds `H = h_h + h_v + h_U` on the ladder.
pub fn build_hubbard(spec: &HubbardSpec) -> Result<HubbardHamiltonian> {
    spec.validate()?;
    let n = spec.n_sites;
    let ladder = spec.ladder();
    let mut h = Vec::new();
    for bond in &ladder.horizontal {
        let c = spec.horizontal_coefficient(bond);
        for spin in 0..2 {
            h.push(hop(n, bond.a, bond.b, spin, c));
        }
    }
    let mut v = Vec::new();
    for bond in &ladder.vertical {
        for spin in 0..2 {
            v.push(hop(n, bond.a, bond.b, spin, -spec.t));
        }
    }
    let u: TermList = (0..n)
        .map(|i| FermionTerm::new(Operator::PairDensity { p: i, q: i + n }, spec.u))
        .collect();
    let mut full = h.clone();
    full.extend(v.iter().copied());
    full.extend(u.iter().copied());
    Ok(HubbardHamiltonian {
        spec: *spec,
        ladder,
        full,
        groups: vec![
            TermGroup::new(GroupLabel::U, u),
            TermGroup::new(GroupLabel::V, v),
            TermGroup::new(GroupLabel::H, h),
        ],
    })
}

/// Partitions the Hamiltonian into internally commuting measurement sets:
/// `U`, `v`, and the colour classes of the horizontal bonds.
pub fn commuting_sets(spec: &HubbardSpec) -> Result<Vec<TermGroup>> {
    let ham = build_hubbard(spec)?;
    let colours = ham.ladder.horizontal_colours();
    let labels = [GroupLabel::HEven, GroupLabel::HOdd, GroupLabel::HWrap];
    let mut sets = vec![
        ham.group(GroupLabel::U).clone(),
        ham.group(GroupLabel::V).clone(),
    ];
    for (colour, label) in labels.iter().enumerate() {
        let mut terms = Vec::new();
        for (bond, &c) in ham.ladder.horizontal.iter().zip(&colours) {
            if c == colour {
                let coef = spec.horizontal_coefficient(bond);
                for spin in 0..2 {
                    terms.push(hop(spec.n_sites, bond.a, bond.b, spin, coef));
                }
            }
        }
        if !terms.is_empty() {
            sets.push(TermGroup::new(*label, terms));
        }
    }
    debug_assert!(colours.iter().all(|&c| c < labels.len()));
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::group_commutes;

    #[test]
    fn eight_site_bond_counts() {
        let ham = build_hubbard(&HubbardSpec::new(8, 1.0, 2.0)).unwrap();
        assert_eq!(ham.ladder.horizontal.len(), 8);
        assert_eq!(ham.ladder.vertical.len(), 4);
        assert_eq!(ham.group(GroupLabel::H).terms.len(), 16);
        assert_eq!(ham.group(GroupLabel::V).terms.len(), 8);
        assert_eq!(ham.group(GroupLabel::U).terms.len(), 8);
        assert_eq!(ham.full.len(), 32);
    }

    #[test]
    fn flux_variant_coefficients() {
        let spec = HubbardSpec::new(8, 1.0, 2.0).with_flux(true);
        let ham = build_hubbard(&spec).unwrap();
        let plain = build_hubbard(&HubbardSpec::new(8, 1.0, 2.0)).unwrap();
        for (bond, term) in ham
            .ladder
            .horizontal
            .iter()
            .flat_map(|b| [b, b])
            .zip(&ham.group(GroupLabel::H).terms)
        {
            assert!((term.coefficient.abs() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
            assert_eq!(term.coefficient > 0.0, bond.wrap);
        }
        assert_eq!(ham.group(GroupLabel::U), plain.group(GroupLabel::U));
        assert_eq!(ham.group(GroupLabel::V), plain.group(GroupLabel::V));
    }

    #[test]
    fn odd_sizes_rejected() {
        assert!(build_hubbard(&HubbardSpec::new(7, 1.0, 2.0)).is_err());
        assert!(build_hubbard(&HubbardSpec::new(2, 1.0, 2.0)).is_err());
    }

    #[test]
    fn measurement_set_counts() {
        let eight = commuting_sets(&HubbardSpec::new(8, 1.0, 2.0)).unwrap();
        assert_eq!(eight.len(), 4);
        let six = commuting_sets(&HubbardSpec::new(6, 1.0, 2.0)).unwrap();
        assert_eq!(six.len(), 5);
        for set in eight.iter().chain(&six) {
            assert!(group_commutes(set), "{} does not commute", set.label);
        }
    }

    #[test]
    fn default_sectors() {
        assert_eq!(HubbardSpec::new(6, 1.0, 2.0).default_sector(), (4, 2));
        assert_eq!(HubbardSpec::new(10, 1.0, 2.0).default_sector(), (6, 4));
        assert_eq!(HubbardSpec::new(8, 1.0, 2.0).default_sector(), (4, 4));
        assert_eq!(HubbardSpec::new(12, 1.0, 2.0).default_sector(), (6, 6));
    }
}
