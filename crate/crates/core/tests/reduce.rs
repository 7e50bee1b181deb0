mod common;

use std::collections::BTreeMap;

use annealc::frontends::{encode_maxsat, encode_mmc_tree};
use annealc::reduce::{
    aux_count, complete_aux, freedman_reduce, ishikawa_reduce, parse_sidecar, reduce_to_quadratic, GadgetKind,
};
use annealc::{parse_pbf, Monomial, PseudoBooleanFunction};
use common::*;
use proptest::prelude::*;

/// Aux count predicted from the monomial list alone.
fn predicted_aux(f: &PseudoBooleanFunction) -> usize {
    f.terms()
        .iter()
        .filter(|t| t.degree() >= 3)
        .map(|t| if t.coefficient < 0.0 { 1 } else { (t.degree() - 1) / 2 })
        .sum()
}

fn small_pbf() -> impl Strategy<Value = PseudoBooleanFunction> {
    (3usize..=8).prop_flat_map(|n| {
        let term = (prop::collection::btree_set(1..=n, 0..=5), -4i32..=4);
        prop::collection::vec(term, 0..8).prop_map(move |terms| {
            PseudoBooleanFunction::from_terms(n, terms.into_iter().map(|(vars, c)| (f64::from(c), vars))).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn reduction_preserves_minimum(f in small_pbf()) {
        let record = reduce_to_quadratic(&f);
        prop_assume!(record.total_vars() <= 20);
        prop_assert!(record.result.degree() <= 2);
        let n = f.num_vars();
        let original = all_bits(n).map(|x| eval_terms(&f, &x)).fold(f64::INFINITY, f64::min);
        let reduced = all_bits(record.total_vars()).map(|y| eval_terms(&record.result, &y)).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(original, reduced);
    }

    #[test]
    fn aux_count_law(f in small_pbf()) {
        let record = reduce_to_quadratic(&f);
        prop_assert_eq!(record.aux.len(), predicted_aux(&f));
        prop_assert_eq!(record.total_vars(), f.num_vars() + predicted_aux(&f));
        prop_assert!(record.aux.iter().all(|a| a.index > f.num_vars()));
    }

    #[test]
    fn pointwise_aux_optimum(f in small_pbf()) {
        let record = reduce_to_quadratic(&f);
        let n = f.num_vars();
        for x in all_bits(n) {
            let expected = eval_terms(&f, &x);
            prop_assert_eq!(min_over_aux(&record.result, n, &x), expected);
            let full = complete_aux(&record, &x).unwrap();
            prop_assert_eq!(eval_terms(&record.result, &full), expected);
        }
    }

    #[test]
    fn low_degree_terms_pass_through(f in small_pbf()) {
        // result = (terms of degree <= 2) + one gadget per higher term
        let record = reduce_to_quadratic(&f);
        let mut expected = PseudoBooleanFunction::from_monomials(
            record.total_vars(),
            f.terms().iter().filter(|t| t.degree() <= 2).cloned(),
        );
        for t in f.terms().iter().filter(|t| t.degree() >= 3) {
            let first = record.aux.iter().find(|a| a.source == t.vars()).unwrap().index;
            let gadget = if t.coefficient < 0.0 { freedman_reduce(t, first) } else { ishikawa_reduce(t, first) }.unwrap();
            expected = expected.add(&gadget.terms);
        }
        prop_assert_eq!(&record.result, &expected);
        if f.degree() <= 2 {
            prop_assert_eq!(&record.result, &f);
        }
    }
}

#[test]
fn conditional_optimum_per_degree() {
    // every gadget reproduces its monomial once its aux vars are minimized
    for d in 3..=5 {
        for c in [-3.0, -1.0, 1.0, 2.5] {
            let term = Monomial::new(c, 1..=d).unwrap();
            let f = PseudoBooleanFunction::from_monomials(d, [term]);
            let record = reduce_to_quadratic(&f);
            for x in all_bits(d) {
                assert_eq!(min_over_aux(&record.result, d, &x), eval_terms(&f, &x), "d={d} c={c} x={x:?}");
            }
        }
    }
}

#[test]
fn textbook_examples() {
    // f = x1x2 - x1x2x3 becomes x1x2 + w(2 - x1 - x2 - x3)
    let f = parse_pbf(&data("example_cubic.pbf")).unwrap();
    let r = reduce_to_quadratic(&f);
    let expected =
        parse_pbf("1 1 2\n2 4\n-1 1 4\n-1 2 4\n-1 3 4\n").unwrap();
    assert_eq!(r.result, expected);
    // x1x2 + x1x2x3 becomes 2x1x2 + x1x3 + x2x3 + w(1 - x1 - x2 - x3)
    let g = parse_pbf("1 1 2\n1 1 2 3\n").unwrap();
    assert_eq!((g.degree(), g.size()), (3, 5));
    let r = reduce_to_quadratic(&g);
    let expected = parse_pbf("2 1 2\n1 1 3\n1 2 3\n1 4\n-1 1 4\n-1 2 4\n-1 3 4\n").unwrap();
    assert_eq!(r.result, expected);
}

#[test]
fn maxsat_objective_reduces_to_forty_variables() {
    let h = encode_maxsat(&maxsat_instance());
    let r = reduce_to_quadratic(&h);
    assert_eq!(r.aux.len(), 31);
    assert_eq!(r.total_vars(), 40);
    assert_eq!(aux_count(&h.terms()[0]), 0);
}

#[test]
fn multicut_objective_reduction_matches_reference_up_to_aux_labels() {
    let (h, _) = encode_mmc_tree(&multicut_instance(), None).unwrap();
    let r = reduce_to_quadratic(&h);
    let reference = fixture("multicut_tree20_quadratic.pbf");
    assert_eq!(r.aux.len(), 8);
    assert!(r.aux.iter().all(|a| a.kind == GadgetKind::Ishikawa));
    // The reference numbers aux vars in the order its monomials are listed.
    let reference_order: [&[usize]; 7] =
        [&[1, 2, 3, 4], &[6, 8, 9], &[2, 3, 4, 5, 10, 11], &[3, 4, 8], &[2, 3, 12], &[2, 6, 7, 8], &[2, 12, 13]];
    let mut next = 15;
    let mut relabel = BTreeMap::new();
    for src in reference_order {
        for a in r.aux.iter().filter(|a| a.source == src) {
            relabel.insert(a.index, next);
            next += 1;
        }
    }
    assert_eq!(relabel.len(), 8);
    let renamed = PseudoBooleanFunction::from_monomials(
        r.total_vars(),
        r.result.terms().iter().map(|t| {
            Monomial::new(t.coefficient, t.vars().iter().map(|v| *relabel.get(v).unwrap_or(v))).unwrap()
        }),
    );
    assert_eq!(renamed, reference);
}

#[test]
fn sidecar_roundtrip() {
    let h = encode_maxsat(&maxsat_instance());
    let r = reduce_to_quadratic(&h);
    let parsed = parse_sidecar(&r.render_sidecar()).unwrap();
    assert_eq!(parsed, r.aux);
}
