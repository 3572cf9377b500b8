//! Fixed particle-number occupation bases and second-quantized terms.
//!
//! Modes are ordered with all spin-up orbitals first (`0..n_sites`) followed
//! by all spin-down orbitals (`n_sites..2*n_sites`). A configuration is a
//! single `u64` bitmask over these modes. Fermionic signs follow the
//! Jordan-Wigner convention for this ordering: moving a particle from mode
//! `q` to mode `p` picks up the parity of the occupied modes strictly between
//! them.
//!
//! Basis states are listed in ascending bitmask order per species, with the
//! down species running fastest, so `index = rank_up * dim_down + rank_down`.

use std::ops::{AddAssign, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation bitmask over all `2 * n_sites` modes.
pub type Config = u64;

/// Largest number of orbitals per spin species supported by the rank tables.
pub const MAX_SITES: usize = 16;

/// Binomial coefficient as `usize`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All `n`-bit masks with exactly `k` bits set, in ascending order.
fn masks_with_popcount(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1u32 << n))
        .filter(|m| m.count_ones() as usize == k)
        .collect()
}

/// Enumeration of occupation configurations with fixed `(n_up, n_down)`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_sites: usize,
    n_up: usize,
    n_down: usize,
    up_states: Vec<u32>,
    down_states: Vec<u32>,
    up_rank: Vec<u32>,
    down_rank: Vec<u32>,
}

impl SectorBasis {
    /// Enumerates the sector with `n_up` spin-up and `n_down` spin-down
    /// electrons on `n_sites` orbitals per species.
    pub fn new(n_sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::Domain(format!(
                "n_sites must be in 1..={MAX_SITES}, got {n_sites}"
            )));
        }
        if n_up > n_sites || n_down > n_sites {
            return Err(Error::Domain(format!(
                "electron counts ({n_up}, {n_down}) exceed {n_sites} orbitals per spin"
            )));
        }
        let up_states = masks_with_popcount(n_sites, n_up);
        let down_states = masks_with_popcount(n_sites, n_down);
        let rank_table = |states: &[u32]| {
            let mut rank = vec![u32::MAX; 1 << n_sites];
            for (i, &m) in states.iter().enumerate() {
                rank[m as usize] = i as u32;
            }
            rank
        };
        let up_rank = rank_table(&up_states);
        let down_rank = rank_table(&down_states);
        Ok(Self {
            n_sites,
            n_up,
            n_down,
            up_states,
            down_states,
            up_rank,
            down_rank,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn sector(&self) -> (usize, usize) {
        (self.n_up, self.n_down)
    }

    pub fn dim(&self) -> usize {
        self.up_states.len() * self.down_states.len()
    }

    pub fn up_states(&self) -> &[u32] {
        &self.up_states
    }

    pub fn down_states(&self) -> &[u32] {
        &self.down_states
    }

    #[inline]
    pub fn config(&self, index: usize) -> Config {
        let nd = self.down_states.len();
        let up = self.up_states[index / nd] as u64;
        let down = self.down_states[index % nd] as u64;
        up | (down << self.n_sites)
    }

    #[inline]
    pub fn index(&self, config: Config) -> Option<usize> {
        let mask = (1u64 << self.n_sites) - 1;
        let up = (config & mask) as usize;
        let down = ((config >> self.n_sites) & mask) as usize;
        if config >> (2 * self.n_sites) != 0 {
            return None;
        }
        let ru = self.up_rank[up];
        let rd = self.down_rank[down];
        if ru == u32::MAX || rd == u32::MAX {
            return None;
        }
        Some(ru as usize * self.down_states.len() + rd as usize)
    }

    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        (0..self.dim()).map(move |i| self.config(i))
    }

    /// Species of a mode: `0` for up, `1` for down.
    #[inline]
    pub fn species(&self, mode: usize) -> usize {
        mode / self.n_sites
    }
}

/// Amplitude types that terms can act on.
pub trait Amplitude:
    Copy + Default + Send + Sync + AddAssign + Mul<f64, Output = Self> + 'static
{
}

impl Amplitude for f64 {}
impl Amplitude for Complex64 {}

/// Structural kind of a second-quantized term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Number,
    PairDensity,
    Hop,
    CorrelatedHop,
    Exchange,
}

/// Operator part of a Hamiltonian term. Off-diagonal kinds carry their
/// Hermitian conjugate implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    /// `n_p`
    Number { p: usize },
    /// `n_p n_q`
    PairDensity { p: usize, q: usize },
    /// `c†_p c_q + h.c.`
    Hop { p: usize, q: usize },
    /// `n_r (c†_p c_q + h.c.)`
    CorrelatedHop { p: usize, q: usize, r: usize },
    /// `c†_p c†_q c_r c_s + h.c.`
    Exchange {
        p: usize,
        q: usize,
        r: usize,
        s: usize,
    },
}

/// A real coefficient times an [`Operator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub op: Operator,
    pub coefficient: f64,
}

pub type TermList = Vec<FermionTerm>;

#[inline]
fn occupied(config: Config, mode: usize) -> bool {
    config >> mode & 1 == 1
}

/// Jordan-Wigner sign of the modes below `mode`.
#[inline]
fn jw_sign(config: Config, mode: usize) -> f64 {
    if (config & ((1u64 << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies a product of ladder operators, rightmost first. Each entry is
/// `(mode, is_creation)`. Returns the image configuration and its sign, or
/// `None` if the product annihilates `config`.
pub fn apply_ladder(config: Config, ops: &[(usize, bool)]) -> Option<(Config, f64)> {
    let mut c = config;
    let mut sign = 1.0;
    for &(mode, create) in ops.iter().rev() {
        if occupied(c, mode) == create {
            return None;
        }
        sign *= jw_sign(c, mode);
        c ^= 1u64 << mode;
    }
    Some((c, sign))
}

impl Operator {
    pub fn kind(&self) -> TermKind {
        match self {
            Operator::Number { .. } => TermKind::Number,
            Operator::PairDensity { .. } => TermKind::PairDensity,
            Operator::Hop { .. } => TermKind::Hop,
            Operator::CorrelatedHop { .. } => TermKind::CorrelatedHop,
            Operator::Exchange { .. } => TermKind::Exchange,
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Operator::Number { p } => vec![p],
            Operator::PairDensity { p, q } | Operator::Hop { p, q } => vec![p, q],
            Operator::CorrelatedHop { p, q, r } => vec![p, q, r],
            Operator::Exchange { p, q, r, s } => vec![p, q, r, s],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Operator::Number { .. } | Operator::PairDensity { .. })
    }

    /// Ladder sequence of the non-conjugated half `X` of an off-diagonal
    /// operator (`X + X†`). Diagonal operators return `None`.
    pub fn forward_ladder(&self) -> Option<Vec<(usize, bool)>> {
        match *self {
            Operator::Hop { p, q } | Operator::CorrelatedHop { p, q, .. } => {
                Some(vec![(p, true), (q, false)])
            }
            Operator::Exchange { p, q, r, s } => {
                Some(vec![(p, true), (q, true), (r, false), (s, false)])
            }
            _ => None,
        }
    }

    /// Checks mode ranges, distinctness, and per-species number conservation.
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let modes = self.modes();
        let n_modes = 2 * n_sites;
        if let Some(&m) = modes.iter().find(|&&m| m >= n_modes) {
            return Err(Error::Contract(format!(
                "mode {m} out of range for {n_modes} modes in {self:?}"
            )));
        }
        for (i, a) in modes.iter().enumerate() {
            if modes[i + 1..].contains(a) {
                return Err(Error::Contract(format!("repeated mode {a} in {self:?}")));
            }
        }
        let species = |m: usize| m / n_sites;
        let conserving = match *self {
            Operator::Number { .. } | Operator::PairDensity { .. } => true,
            Operator::Hop { p, q } | Operator::CorrelatedHop { p, q, .. } => {
                species(p) == species(q)
            }
            Operator::Exchange { p, q, r, s } => {
                let mut created = [species(p), species(q)];
                let mut destroyed = [species(r), species(s)];
                created.sort_unstable();
                destroyed.sort_unstable();
                created == destroyed
            }
        };
        if !conserving {
            return Err(Error::Contract(format!(
                "{self:?} changes the particle number of a spin species"
            )));
        }
        Ok(())
    }

    /// Value of a diagonal operator on `config`.
    #[inline]
    pub fn diagonal_value(&self, config: Config) -> f64 {
        match *self {
            Operator::Number { p } => occupied(config, p) as u8 as f64,
            Operator::PairDensity { p, q } => {
                (occupied(config, p) && occupied(config, q)) as u8 as f64
            }
            _ => 0.0,
        }
    }

    /// Image of `config` under the off-diagonal operator `X + X†`, with its
    /// fermionic sign. At most one of `X`, `X†` acts on any configuration.
    #[inline]
    pub fn off_diagonal(&self, config: Config) -> Option<(Config, f64)> {
        match *self {
            Operator::Hop { p, q } => hop_image(config, p, q),
            Operator::CorrelatedHop { p, q, r } => {
                if occupied(config, r) {
                    hop_image(config, p, q)
                } else {
                    None
                }
            }
            Operator::Exchange { p, q, r, s } => {
                apply_ladder(config, &[(p, true), (q, true), (r, false), (s, false)]).or_else(
                    || apply_ladder(config, &[(s, true), (r, true), (q, false), (p, false)]),
                )
            }
            _ => None,
        }
    }
}

/// `c†_p c_q + c†_q c_p` acting on `config`.
#[inline]
fn hop_image(config: Config, p: usize, q: usize) -> Option<(Config, f64)> {
    if occupied(config, p) == occupied(config, q) {
        return None;
    }
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let between = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
    let sign = if (config & between).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((config ^ (1u64 << p) ^ (1u64 << q), sign))
}

impl FermionTerm {
    pub fn new(op: Operator, coefficient: f64) -> Self {
        Self { op, coefficient }
    }

    pub fn kind(&self) -> TermKind {
        self.op.kind()
    }

    pub fn modes(&self) -> Vec<usize> {
        self.op.modes()
    }
}

/// Accumulates `coefficient * (term + h.c.) * input` into `out`.
///
/// `input` and `out` are amplitude vectors over `basis` and must not alias.
pub fn apply_term<T: Amplitude>(
    term: &FermionTerm,
    basis: &SectorBasis,
    input: &[T],
    out: &mut [T],
) -> Result<()> {
    if input.len() != basis.dim() || out.len() != basis.dim() {
        return Err(Error::Contract(format!(
            "vector length {} / {} does not match basis dimension {}",
            input.len(),
            out.len(),
            basis.dim()
        )));
    }
    term.op.validate(basis.n_sites())?;
    let c = term.coefficient;
    if term.op.is_diagonal() {
        for (i, (&a, o)) in input.iter().zip(out.iter_mut()).enumerate() {
            let v = term.op.diagonal_value(basis.config(i));
            if v != 0.0 {
                *o += a * (c * v);
            }
        }
    } else {
        for (i, &a) in input.iter().enumerate() {
            if let Some((image, sign)) = term.op.off_diagonal(basis.config(i)) {
                let j = basis
                    .index(image)
                    .expect("number-conserving term leaves the sector");
                out[j] += a * (c * sign);
            }
        }
    }
    Ok(())
}

/// Accumulates the action of every term in `terms`.
pub fn apply_terms<T: Amplitude>(
    terms: &[FermionTerm],
    basis: &SectorBasis,
    input: &[T],
    out: &mut [T],
) -> Result<()> {
    for term in terms {
        apply_term(term, basis, input, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions() {
        assert_eq!(SectorBasis::new(4, 2, 2).unwrap().dim(), 36);
        assert_eq!(SectorBasis::new(10, 5, 5).unwrap().dim(), 63504);
        assert_eq!(binomial(12, 6).pow(2), 853776);
    }

    #[test]
    fn counts_out_of_range() {
        assert!(matches!(SectorBasis::new(4, 5, 1), Err(Error::Domain(_))));
        assert!(matches!(SectorBasis::new(0, 0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn index_round_trip_and_order() {
        let b = SectorBasis::new(5, 2, 3).unwrap();
        let mut prev = None;
        for i in 0..b.dim() {
            let c = b.config(i);
            assert_eq!(b.index(c), Some(i));
            assert_eq!((c & 0b11111).count_ones(), 2);
            assert_eq!((c >> 5).count_ones(), 3);
            // up rank major, down minor: the (up, down) pair increases lexicographically
            let key = (c & 0b11111, c >> 5);
            if let Some(p) = prev {
                assert!(key > p);
            }
            prev = Some(key);
        }
        assert_eq!(b.index(0b1), None);
    }

    #[test]
    fn number_term_is_diagonal() {
        let b = SectorBasis::new(2, 1, 0).unwrap();
        // states: up in site 0 -> index 0, up in site 1 -> index 1
        let psi = vec![0.6, 0.8];
        let mut out = vec![0.0; 2];
        apply_term(
            &FermionTerm::new(Operator::Number { p: 1 }, 2.0),
            &b,
            &psi,
            &mut out,
        )
        .unwrap();
        assert_eq!(out, vec![0.0, 1.6]);
    }

    #[test]
    fn hop_without_intervening_modes() {
        let b = SectorBasis::new(2, 1, 0).unwrap();
        let psi = vec![0.0, 1.0]; // particle at q = 1
        let mut out = vec![0.0; 2];
        apply_term(
            &FermionTerm::new(Operator::Hop { p: 0, q: 1 }, 1.0),
            &b,
            &psi,
            &mut out,
        )
        .unwrap();
        assert_eq!(out, vec![1.0, 0.0]);
    }

    #[test]
    fn hop_across_occupied_mode_flips_sign() {
        // c†_0 c_2 on {1, 2} gives -{0, 1}
        let (img, sign) = apply_ladder(0b110, &[(0, true), (2, false)]).unwrap();
        assert_eq!(img, 0b011);
        assert_eq!(sign, -1.0);
        let (img, sign) = Operator::Hop { p: 0, q: 2 }.off_diagonal(0b110).unwrap();
        assert_eq!((img, sign), (0b011, -1.0));
    }

    #[test]
    fn spin_changing_term_rejected() {
        let b = SectorBasis::new(2, 1, 1).unwrap();
        let psi = vec![0.5; b.dim()];
        let mut out = vec![0.0; b.dim()];
        let err = apply_term(
            &FermionTerm::new(Operator::Hop { p: 0, q: 2 }, 1.0),
            &b,
            &psi,
            &mut out,
        );
        assert!(matches!(err, Err(Error::Contract(_))));
    }
}
