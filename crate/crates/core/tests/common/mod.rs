#![allow(dead_code)]

use std::sync::Arc;

use hvqe::basis::apply_term;
use hvqe::{FermionTerm, Operator, SectorBasis, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Occupied modes of a configuration, ascending.
pub fn occupied_modes(config: u64) -> Vec<usize> {
    (0..64).filter(|m| config >> m & 1 == 1).collect()
}

/// Sorts a tuple of distinct modes, returning the configuration and the
/// parity of the sorting permutation. Repeated modes give `None`.
fn canonical(tuple: &[usize]) -> Option<(u64, f64)> {
    let mut t = tuple.to_vec();
    let mut sign = 1.0;
    for i in 0..t.len() {
        for j in 0..t.len() - 1 - i {
            if t[j] == t[j + 1] {
                return None;
            }
            if t[j] > t[j + 1] {
                t.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if t.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((t.iter().fold(0, |c, &m| c | 1u64 << m), sign))
}

/// `sum_i |p><q|_i` on the antisymmetrized ordered tuple of `config`.
fn one_body(config: u64, p: usize, q: usize) -> Vec<(u64, f64)> {
    let a = occupied_modes(config);
    let mut out = Vec::new();
    for i in 0..a.len() {
        if a[i] == q {
            let mut t = a.clone();
            t[i] = p;
            if let Some(r) = canonical(&t) {
                out.push(r);
            }
        }
    }
    out
}

/// `sum_{i != j} |p><s|_i |q><r|_j`, the first-quantized form of
/// `c†_p c†_q c_r c_s`.
fn two_body(config: u64, p: usize, q: usize, r: usize, s: usize) -> Vec<(u64, f64)> {
    let a = occupied_modes(config);
    let mut out = Vec::new();
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j && a[i] == s && a[j] == r {
                let mut t = a.clone();
                t[i] = p;
                t[j] = q;
                if let Some(x) = canonical(&t) {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn dense_of(basis: &SectorBasis, f: impl Fn(u64) -> Vec<(u64, f64)>) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    for (col, cfg) in basis.configs().enumerate() {
        for (img, v) in f(cfg) {
            let row = basis.index(img).expect("image stays in the sector");
            m[(row, col)] += v;
        }
    }
    m
}

/// Matrix of `coefficient * operator` built from antisymmetrized
/// first-quantized states, with the Hermitian conjugate added for
/// off-diagonal kinds.
pub fn oracle_matrix(term: &FermionTerm, basis: &SectorBasis) -> DMatrix<f64> {
    let m = match term.op {
        Operator::Number { p } => dense_of(basis, |c| one_body(c, p, p)),
        Operator::PairDensity { p, q } => {
            let np = dense_of(basis, |c| one_body(c, p, p));
            let nq = dense_of(basis, |c| one_body(c, q, q));
            np * nq
        }
        Operator::Hop { p, q } => {
            let x = dense_of(basis, |c| one_body(c, p, q));
            x.transpose() + x
        }
        Operator::CorrelatedHop { p, q, r } => {
            let nr = dense_of(basis, |c| one_body(c, r, r));
            let x = &nr * dense_of(basis, |c| one_body(c, p, q));
            x.transpose() + x
        }
        Operator::Exchange { p, q, r, s } => {
            let x = dense_of(basis, |c| two_body(c, p, q, r, s));
            x.transpose() + x
        }
    };
    m * term.coefficient
}

pub fn oracle_sum(terms: &[FermionTerm], basis: &SectorBasis) -> DMatrix<f64> {
    let n = basis.dim();
    terms
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, t| acc + oracle_matrix(t, basis))
}

/// Matrix of the library's term action, one basis vector at a time.
pub fn library_matrix(terms: &[FermionTerm], basis: &SectorBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let mut out = vec![0.0; n];
        for t in terms {
            apply_term(t, basis, &e, &mut out).unwrap();
        }
        for row in 0..n {
            m[(row, col)] = out[row];
        }
    }
    m
}

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let b = a.unscale(2f64.powi(squarings));
    let mut result = CMatrix::identity(n, n);
    let mut power = CMatrix::identity(n, n);
    for k in 1..=24 {
        power = &power * &b / c(k as f64);
        result += &power;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn apply_dense(m: &CMatrix, psi: &StateVector) -> Vec<Complex64> {
    let v = nalgebra::DVector::from_column_slice(psi.amps());
    (m * v).iter().copied().collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn dense_max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn dense_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn random_state(basis: Arc<SectorBasis>, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..basis.dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut psi = StateVector::new(basis, amps).unwrap();
    psi.normalize().unwrap();
    psi
}

/// Every sector of a system with `n_sites` sites.
pub fn sectors(n_sites: usize) -> Vec<(usize, usize)> {
    (0..=n_sites)
        .flat_map(|u| (0..=n_sites).map(move |d| (u, d)))
        .collect()
}

/// Hydrogen molecule in a minimal basis at the equilibrium bond length.
pub const H2_FCIDUMP: &str = "\
 &FCI NORB=  2,NELEC=  2,MS2= 0,
  ORBSYM=1,1,
  ISYM=1,
 &END
  0.6744887663    1    1    1    1
  0.1812875358    2    1    2    1
  0.6634581290    2    2    1    1
  0.6973979495    2    2    2    2
 -1.2524635735    1    1    0    0
 -0.4759487152    2    2    0    0
  0.7137539936    0    0    0    0
";

pub const H2_FCI_ENERGY: f64 = -1.13727;

/// Matrix of the non-conjugated half `X` of an off-diagonal operator.
pub fn oracle_forward(op: &Operator, basis: &SectorBasis) -> DMatrix<f64> {
    match *op {
        Operator::Hop { p, q } => dense_of(basis, |c| one_body(c, p, q)),
        Operator::CorrelatedHop { p, q, r } => {
            dense_of(basis, |c| one_body(c, r, r)) * dense_of(basis, |c| one_body(c, p, q))
        }
        Operator::Exchange { p, q, r, s } => dense_of(basis, |c| two_body(c, p, q, r, s)),
        _ => panic!("{op:?} has no forward half"),
    }
}

/// Largest deviation of `generator.apply(phi)` from `expm(exponent * phi)`
/// on a random state.
pub fn factor_error(
    generator: &hvqe::ansatz::Generator,
    exponent: &CMatrix,
    phi: f64,
    basis: Arc<SectorBasis>,
    seed: u64,
) -> f64 {
    let psi = random_state(basis, seed);
    let want = apply_dense(&expm(&(exponent * c(phi))), &psi);
    let mut got = psi.clone();
    generator.apply(phi, got.amps_mut());
    max_diff(got.amps(), &want)
}

/// Hermitian `i G` exponent of a dense real generator.
pub fn hermitian_exponent(g: &DMatrix<f64>) -> CMatrix {
    g.map(|x| Complex64::new(0.0, x))
}

/// Deviation of the eigensolver's ground energy from an independent dense
/// computation on one sector. Small sectors are diagonalized outright;
/// larger ones are bounded by a Cholesky inertia check together with the
/// residual of the returned vector.
pub fn ground_energy_error(terms: &[FermionTerm], basis: &SectorBasis) -> f64 {
    let op = hvqe::SparseOperator::from_terms(terms, basis).unwrap();
    let g = hvqe::exact::ground_space_op(&op, basis, 1, Default::default()).unwrap();
    let dense = library_dense(&op);
    if basis.dim() <= 1200 {
        return (dense_spectrum(&dense)[0] - g.energy).abs();
    }
    let v = nalgebra::DVector::from_column_slice(&g.vectors[0]);
    let residual = (&dense * &v - &v * g.energy).norm();
    let delta = 1e-10 * g.energy.abs().max(1.0);
    let shifted = &dense - DMatrix::identity(basis.dim(), basis.dim()) * (g.energy - delta);
    if shifted.cholesky().is_none() {
        return f64::INFINITY;
    }
    residual.max(delta)
}

pub fn library_dense(op: &hvqe::SparseOperator) -> DMatrix<f64> {
    let rows = op.to_dense();
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Electronic Hamiltonian without the core energy, assembled directly from
/// spatial integrals in chemists' notation.
pub fn chem_oracle(
    ints: &hvqe::hamiltonian::SpatialIntegrals,
    basis: &SectorBasis,
) -> DMatrix<f64> {
    let n = ints.norb;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for p in 0..n {
        for q in 0..n {
            for spin in 0..2 {
                let (a, b) = (p + spin * n, q + spin * n);
                m += dense_of(basis, |c| one_body(c, a, b)) * ints.h(p, q);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (a, b, cc, d) =
                                (p + sigma * n, r + tau * n, s + tau * n, q + sigma * n);
                            m += dense_of(basis, |x| two_body(x, a, b, cc, d)) * (0.5 * v);
                        }
                    }
                }
            }
        }
    }
    m
}

/// Random real integrals with the full eightfold symmetry.
pub fn random_integrals(
    norb: usize,
    nelec: usize,
    seed: u64,
) -> hvqe::hamiltonian::SpatialIntegrals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ints = hvqe::hamiltonian::SpatialIntegrals::zeros(norb, nelec, (nelec % 2) as i64);
    for i in 0..norb {
        for j in 0..=i {
            ints.set_h(i, j, rng.random_range(-1.0..1.0));
        }
    }
    for i in 0..norb {
        for j in 0..norb {
            for k in 0..norb {
                for l in 0..norb {
                    if (i * norb + j) <= (k * norb + l) && i >= j && k >= l {
                        ints.set_eri(i, j, k, l, rng.random_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    ints
}

/// `(row, col, value)` entries of [`oracle_matrix`] without forming the
/// dense matrix.
pub fn oracle_entries(term: &FermionTerm, basis: &SectorBasis) -> Vec<(usize, usize, f64)> {
    let occ = |c: u64, m: usize| (c >> m & 1) as f64;
    let mut out = Vec::new();
    for (col, cfg) in basis.configs().enumerate() {
        let images = match term.op {
            Operator::Number { p } => one_body(cfg, p, p),
            Operator::PairDensity { p, q } => vec![(cfg, occ(cfg, p) * occ(cfg, q))],
            Operator::Hop { p, q } => one_body(cfg, p, q),
            Operator::CorrelatedHop { p, q, r } => one_body(cfg, p, q)
                .into_iter()
                .map(|(c, v)| (c, v * occ(c, r)))
                .collect(),
            Operator::Exchange { p, q, r, s } => two_body(cfg, p, q, r, s),
        };
        for (img, v) in images {
            if v == 0.0 {
                continue;
            }
            let row = basis.index(img).expect("image stays in the sector");
            out.push((row, col, v * term.coefficient));
            if !matches!(
                term.op,
                Operator::Number { .. } | Operator::PairDensity { .. }
            ) {
                out.push((col, row, v * term.coefficient));
            }
        }
    }
    out
}

pub fn entries_apply(entries: &[(usize, usize, f64)], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for &(r, c, x) in entries {
        out[r] += v[c] * x;
    }
    out
}

/// `exp(i theta G) v` by a Taylor series on substeps of norm at most 1/2.
pub fn expi_apply(entries: &[(usize, usize, f64)], theta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let mut row_sums = vec![0.0; v.len()];
    for &(r, _, x) in entries {
        row_sums[r] += x.abs();
    }
    let bound = row_sums.iter().fold(0.0, |a: f64, &b| a.max(b)) * theta.abs();
    let steps = (2.0 * bound).ceil().max(1.0) as usize;
    let h = Complex64::new(0.0, theta / steps as f64);
    let mut w = v.to_vec();
    for _ in 0..steps {
        let mut term = w.clone();
        let mut sum = w.clone();
        for k in 1..40 {
            term = entries_apply(entries, &term)
                .into_iter()
                .map(|x| x * h / k as f64)
                .collect();
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            if term.iter().map(|t| t.norm()).fold(0.0, f64::max) < 1e-18 {
                break;
            }
        }
        w = sum;
    }
    w
}

/// Random integrals whose occupied-virtual Fock elements vanish for the
/// closed-shell configuration of the lowest `nelec / 2` orbitals.
pub fn brillouin_integrals(
    norb: usize,
    nelec: usize,
    seed: u64,
) -> hvqe::hamiltonian::SpatialIntegrals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ints = hvqe::hamiltonian::SpatialIntegrals::zeros(norb, nelec, 0);
    for i in 0..norb {
        for j in 0..=i {
            let v = if i == j {
                3.0 * i as f64 - 6.0
            } else {
                rng.random_range(-0.3..0.3)
            };
            ints.set_h(i, j, v);
        }
    }
    for i in 0..norb {
        for j in 0..=i {
            for k in 0..norb {
                for l in 0..=k {
                    if i * norb + j <= k * norb + l {
                        ints.set_eri(i, j, k, l, rng.random_range(0.0..0.2));
                    }
                }
            }
        }
    }
    let nocc = nelec / 2;
    for i in 0..nocc {
        for a in nocc..norb {
            let g: f64 = (0..nocc)
                .map(|j| 2.0 * ints.eri(i, a, j, j) - ints.eri(i, j, j, a))
                .sum();
            ints.set_h(i, a, -g);
        }
    }
    ints
}

pub fn closed_shell(norb: usize, nocc: usize) -> u64 {
    let occ = (1u64 << nocc) - 1;
    occ | occ << norb
}
