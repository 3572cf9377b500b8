mod common;

use common::{dense_max_diff, library_matrix, oracle_matrix, sectors};
use hvqe::basis::apply_ladder;
use hvqe::operator::SparseOperator;
use hvqe::{FermionTerm, Operator, SectorBasis};

fn all_operators(n_sites: usize) -> Vec<Operator> {
    let n = 2 * n_sites;
    let mut ops = Vec::new();
    for p in 0..n {
        ops.push(Operator::Number { p });
        for q in 0..n {
            if q == p {
                continue;
            }
            ops.push(Operator::PairDensity { p, q });
            ops.push(Operator::Hop { p, q });
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                ops.push(Operator::CorrelatedHop { p, q, r });
                for s in 0..n {
                    if s != p && s != q && s != r {
                        ops.push(Operator::Exchange { p, q, r, s });
                    }
                }
            }
        }
    }
    ops.into_iter()
        .filter(|o| o.validate(n_sites).is_ok())
        .collect()
}

#[test]
fn ladder_sign_example() {
    assert_eq!(
        apply_ladder(0b110, &[(0, true), (2, false)]),
        Some((0b011, -1.0))
    );
    assert_eq!(apply_ladder(0b110, &[(1, true), (2, false)]), None);
}

#[test]
fn every_term_matches_first_quantization() {
    for n_sites in 1..=4 {
        let ops = all_operators(n_sites);
        for (u, d) in sectors(n_sites) {
            let basis = SectorBasis::new(n_sites, u, d).unwrap();
            for (k, op) in ops.iter().enumerate() {
                let term = FermionTerm::new(*op, 0.5 + 0.01 * k as f64);
                let got = library_matrix(&[term], &basis);
                let want = oracle_matrix(&term, &basis);
                assert!(
                    dense_max_diff(&got, &want) < 1e-12,
                    "{op:?} on ({u}, {d}) of {n_sites} sites"
                );
            }
        }
    }
}

#[test]
fn sparse_assembly_matches_term_action() {
    let n_sites = 3;
    let ops = all_operators(n_sites);
    let terms: Vec<FermionTerm> = ops
        .iter()
        .enumerate()
        .map(|(k, op)| FermionTerm::new(*op, ((k * 7919) % 13) as f64 / 13.0 - 0.5))
        .collect();
    for (u, d) in sectors(n_sites) {
        let basis = SectorBasis::new(n_sites, u, d).unwrap();
        let sparse = SparseOperator::from_terms(&terms, &basis).unwrap();
        let dense = sparse.to_dense();
        let want = common::oracle_sum(&terms, &basis);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                assert!(
                    (dense[i][j] - want[(i, j)]).abs() < 1e-12,
                    "({u}, {d}) [{i}, {j}]"
                );
            }
        }
    }
}

#[test]
fn species_changing_terms_are_rejected() {
    let basis = SectorBasis::new(2, 1, 1).unwrap();
    let bad = FermionTerm::new(Operator::Hop { p: 0, q: 2 }, 1.0);
    let mut out = vec![0.0; basis.dim()];
    assert!(hvqe::basis::apply_term(&bad, &basis, &vec![0.0; basis.dim()], &mut out).is_err());
}
