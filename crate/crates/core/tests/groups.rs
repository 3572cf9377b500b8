mod common;

use std::sync::Arc;

use common::*;
use hvqe::exact::{ground_space, hf_initial_state};
use hvqe::hamiltonian::{
    build_hubbard, commuting_sets, group_chemistry, ChemHamiltonian, GroupLabel, HubbardSpec,
};
use hvqe::{FermionTerm, SectorBasis};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sorted_terms(mut terms: Vec<FermionTerm>) -> Vec<String> {
    terms.sort_by(|a, b| {
        a.op.cmp(&b.op)
            .then(a.coefficient.total_cmp(&b.coefficient))
    });
    terms
        .iter()
        .map(|t| format!("{:?} {:.15}", t.op, t.coefficient))
        .collect()
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn hubbard_groups_partition_the_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, flux) in [(4, false), (6, false), (8, false), (8, true), (10, false)] {
        let spec = HubbardSpec::new(n, 1.0, 2.0).with_flux(flux);
        let ham = build_hubbard(&spec).unwrap();
        let basis = SectorBasis::new(n, 2, 1).unwrap();
        let full = oracle_sum(&ham.full, &basis);
        let parts = [GroupLabel::U, GroupLabel::V, GroupLabel::H]
            .iter()
            .fold(DMatrix::zeros(basis.dim(), basis.dim()), |acc, &l| {
                acc + library_matrix(&ham.group(l).terms, &basis)
            });
        for _ in 0..3 {
            let v = random_vector(basis.dim(), &mut rng);
            assert!((&full * &v - &parts * &v).amax() < 1e-12, "N={n}");
        }
    }
}

#[test]
fn free_ladder_fills_lowest_orbitals() {
    let spec = HubbardSpec::new(4, 1.0, 0.0);
    let ham = build_hubbard(&spec).unwrap();
    let t = ham.one_body_matrix(1.0);
    let m = DMatrix::from_fn(4, 4, |i, j| t[i][j]);
    let levels = dense_spectrum(&m);
    let expected = 2.0 * (levels[0] + levels[1]);
    let g = ground_space(&ham.full, &SectorBasis::new(4, 2, 2).unwrap(), 1).unwrap();
    assert!((g.energy - expected).abs() < 1e-10);
}

#[test]
fn measurement_set_counts_and_union() {
    for (n, count) in [(4, 3), (6, 5), (8, 4), (10, 5), (12, 4)] {
        let spec = HubbardSpec::new(n, 1.0, 2.0);
        let sets = commuting_sets(&spec).unwrap();
        assert_eq!(sets.len(), count, "N={n}");
        let union: Vec<FermionTerm> = sets.iter().flat_map(|s| s.terms.iter().copied()).collect();
        let ham = build_hubbard(&spec).unwrap();
        assert_eq!(sorted_terms(union), sorted_terms(ham.full.clone()), "N={n}");
    }
}

#[test]
fn measurement_sets_commute_on_a_sector() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [6, 8] {
        let spec = HubbardSpec::new(n, 1.0, 2.0);
        let basis = SectorBasis::new(n, 2, 2).unwrap();
        for set in commuting_sets(&spec).unwrap() {
            let mats: Vec<DMatrix<f64>> =
                set.terms.iter().map(|t| oracle_matrix(t, &basis)).collect();
            let v = random_vector(basis.dim(), &mut rng);
            for a in &mats {
                for b in &mats {
                    let d = a * (b * &v) - b * (a * &v);
                    assert!(d.amax() < 1e-12, "N={n} set {}", set.label);
                }
            }
        }
    }
}

#[test]
fn horizontal_hops_do_not_commute_as_one_set() {
    let spec = HubbardSpec::new(8, 1.0, 2.0);
    let ham = build_hubbard(&spec).unwrap();
    let basis = SectorBasis::new(8, 2, 2).unwrap();
    let mats: Vec<DMatrix<f64>> = ham
        .group(GroupLabel::H)
        .terms
        .iter()
        .map(|t| oracle_matrix(t, &basis))
        .collect();
    let worst = mats
        .iter()
        .flat_map(|a| mats.iter().map(move |b| (a * b - b * a).amax()))
        .fold(0.0, f64::max);
    assert!(worst > 0.1);
}

#[test]
fn flux_ladder_shares_interaction_and_rungs() {
    let plain = commuting_sets(&HubbardSpec::new(8, 1.0, 2.0)).unwrap();
    let flux = commuting_sets(&HubbardSpec::new(8, 1.0, 2.0).with_flux(true)).unwrap();
    assert_eq!(plain.len(), flux.len());
    for label in [GroupLabel::U, GroupLabel::V] {
        let a = plain.iter().find(|s| s.label == label).unwrap();
        let b = flux.iter().find(|s| s.label == label).unwrap();
        assert_eq!(a, b);
    }
    let hp: f64 = plain
        .iter()
        .filter(|s| s.terms[0].op.kind() == hvqe::TermKind::Hop)
        .map(|s| s.l1_norm())
        .sum();
    let hf: f64 = flux
        .iter()
        .filter(|s| s.terms[0].op.kind() == hvqe::TermKind::Hop)
        .map(|s| s.l1_norm())
        .sum();
    assert!(hf < hp);
}

#[test]
fn chemistry_groups_partition_and_split_by_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..3 {
        let ints = random_integrals(4, 4, seed);
        let chem = ChemHamiltonian::from_integrals(&ints).unwrap();
        let basis = Arc::new(chem.basis().unwrap());
        let (_, hf) = hf_initial_state(&chem, basis.clone()).unwrap();
        let g = group_chemistry(&chem, hf.config).unwrap();
        let mut all = g.diag.terms.clone();
        all.extend(&g.hop.terms);
        all.extend(&g.ex.terms);
        assert_eq!(sorted_terms(all), sorted_terms(chem.terms().clone()));
        let mut split = g.o.terms.clone();
        split.extend(&g.rest.terms);
        assert_eq!(sorted_terms(split), sorted_terms(g.ex.terms.clone()));

        let full = chem_oracle(&ints, &basis);
        let v = random_vector(basis.dim(), &mut rng);
        let sum = [&g.diag, &g.hop, &g.ex]
            .iter()
            .fold(DMatrix::zeros(basis.dim(), basis.dim()), |acc, grp| {
                acc + library_matrix(&grp.terms, &basis)
            });
        assert!((&full * &v - &sum * &v).amax() < 1e-12);

        let reference = basis.index(hf.config).unwrap();
        for t in &g.ex.terms {
            let col = oracle_matrix(t, &basis).column(reference).amax();
            assert_eq!(col > 0.0, g.o.terms.contains(t), "{:?}", t.op);
        }
    }
}

#[test]
fn empty_two_body_leaves_only_one_body_groups() {
    let mut ints = hvqe::hamiltonian::SpatialIntegrals::zeros(3, 2, 0);
    for i in 0..3 {
        ints.set_h(i, i, i as f64 + 1.0);
    }
    ints.set_h(0, 1, 0.2);
    let chem = ChemHamiltonian::from_integrals(&ints).unwrap();
    let g = group_chemistry(&chem, 0b001_001).unwrap();
    assert!(g.ex.is_empty() && g.o.is_empty());
    assert_eq!(g.diag.terms.len(), 6);
}
