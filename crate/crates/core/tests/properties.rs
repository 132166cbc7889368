use std::sync::Arc;

use observables::classical::FiniteTopSpace;
use observables::context::{self, glue_section, is_global_section, section_from_operator};
use observables::presheaf::LatticePresheaf;
use observables::stone::StoneSpectrum;
use observables::vn::{HermitianOperator, Projection, Tolerances};
use observables::{corpus, Elem, Lattice};
use proptest::prelude::*;

fn topologies_up_to_three() -> Vec<FiniteTopSpace> {
    (1..=3).flat_map(corpus::all_topologies).collect()
}

fn opens_of(space: &FiniteTopSpace) -> Vec<u64> {
    space.opens(1 << 12).unwrap()
}

/// Points that every open set around `x` contains.
fn hull(opens: &[u64], full: u64, x: usize) -> u64 {
    opens
        .iter()
        .filter(|&&u| u & (1 << x) != 0)
        .fold(full, |acc, &u| acc & u)
}

/// Chains `e_1 <= .. <= e_k` of length `k` ending at or below `a`.
fn count_chains(l: &Lattice, a: Elem, k: usize) -> usize {
    if k == 0 {
        return 1;
    }
    l.elements()
        .filter(|&e| l.leq(e, a))
        .map(|e| count_chains(l, e, k - 1))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boolean_meet_and_join_are_bitwise(n in 1usize..=4, a in 0usize..16, b in 0usize..16) {
        let l = corpus::boolean(n);
        let (a, b) = (a % l.len(), b % l.len());
        prop_assert_eq!(l.meet2(a, b), a & b);
        prop_assert_eq!(l.join2(a, b), a | b);
    }

    #[test]
    fn boolean_quasipoints_are_the_atoms(n in 1usize..=4) {
        let s = StoneSpectrum::new(Arc::new(corpus::boolean(n))).unwrap();
        let mut least: Vec<Elem> = s.quasipoints().iter().map(|&q| s.ideal(q).least()).collect();
        least.sort_unstable();
        prop_assert_eq!(least, (0..n).map(|i| 1usize << i).collect::<Vec<_>>());
        prop_assert_eq!(s.dual_ideals().len(), (1 << n) - 1);
    }

    #[test]
    fn interior_is_the_largest_open_inside(which in 0usize..34, set in 0u64..8) {
        let spaces = topologies_up_to_three();
        let space = &spaces[which % spaces.len()];
        let set = set & space.full();
        let opens = opens_of(space);
        let oracle = opens.iter().filter(|&&u| u & !set == 0).fold(0, |acc, &u| acc | u);
        prop_assert_eq!(space.interior(set), oracle);
        let closed_oracle = space.full() & !opens.iter().filter(|&&u| u & set == 0).fold(0, |acc, &u| acc | u);
        prop_assert_eq!(space.closure(set), closed_oracle);
    }

    #[test]
    fn continuity_means_constant_on_hulls(which in 0usize..34, values in proptest::collection::vec(0u8..3, 3)) {
        let spaces = topologies_up_to_three();
        let space = &spaces[which % spaces.len()];
        let f: Vec<f64> = values[..space.len()].iter().map(|&v| f64::from(v)).collect();
        let opens = opens_of(space);
        let oracle = (0..space.len()).all(|x| {
            let h = hull(&opens, space.full(), x);
            (0..space.len()).filter(|y| h & (1 << y) != 0).all(|y| f[y] == f[x])
        });
        prop_assert_eq!(space.is_continuous(&f).holds(), oracle);
    }

    #[test]
    fn spectral_presheaf_sections_are_chains(which in 0usize..16, k in 1usize..=3) {
        let lattices = corpus::lattices();
        let (_, l) = &lattices[which % lattices.len()];
        prop_assume!(l.len() <= 9);
        let l = Arc::new(l.clone());
        let lambdas: Vec<f64> = (1..=k).map(|i| i as f64).collect();
        let p = LatticePresheaf::spectral(l.clone(), &lambdas).unwrap();
        for a in l.elements() {
            prop_assert_eq!(p.sections(a).len(), count_chains(&l, a, k - 1));
        }
        prop_assert!(p.check_presheaf().holds());
    }

    #[test]
    fn diagonal_operator_sections_follow_eigenvalues(lo in -5.0f64..5.0, gap in 0.01f64..5.0) {
        let tol = Tolerances::default();
        let diagram = context::qubit_diagram(&tol).unwrap();
        let a = HermitianOperator::diagonal(&[lo, lo + gap]).unwrap();
        let section = section_from_operator(&a, &diagram).unwrap();
        prop_assert!(is_global_section(&section, &diagram).unwrap().holds());
        let az = diagram.context_index("Az").unwrap();
        let ax = diagram.context_index("Ax").unwrap();
        let ctx = &diagram.contexts()[az];
        let pz = Projection::new(context::qubit::pz(), &tol).unwrap();
        let mz = ctx.mask_of(&pz).unwrap();
        let table = &section.tables[az];
        prop_assert!((table[mz as usize] - lo).abs() < 1e-9);
        prop_assert!((table[(ctx.full_mask() ^ mz) as usize] - (lo + gap)).abs() < 1e-9);
        for m in diagram.contexts()[ax].masks() {
            prop_assert!((section.tables[ax][m as usize] - (lo + gap)).abs() < 1e-9);
        }
        let report = glue_section(&section, &diagram).unwrap();
        prop_assert!(report.extendability.verdict.holds());
        prop_assert!(report.complete_increasing.holds());
    }
}

#[test]
fn function_presheaf_counts_locally_constant_maps() {
    for space in topologies_up_to_three() {
        let (p, opens) = LatticePresheaf::functions_on(&space, 2).unwrap();
        for (i, &u) in opens.iter().enumerate() {
            let oracle = (0..1u32 << space.len())
                .filter(|&bits| {
                    let f = |x: usize| bits >> x & 1;
                    (0..space.len()).filter(|x| u & (1 << x) == 0).all(|x| f(x) == 0)
                        && (0..space.len())
                            .filter(|x| u & (1 << x) != 0)
                            .all(|x| (0..space.len()).all(|y| space.neighbourhood(x) & (1 << y) == 0 || f(y) == f(x)))
                })
                .count();
            assert_eq!(p.sections(i).len(), oracle, "open {u:b}");
        }
    }
}
