mod common;

use annealc::frontends::{encode_maxsat, encode_mmc_tree};
use annealc::qubo_ising::{
    bits_from_spins, ising_energy, ising_to_qubo, parse_model, qubo_from_pbf, qubo_to_ising, spins_from_bits,
    ModelFile,
};
use annealc::reduce::{complete_aux, reduce_to_quadratic};
use annealc::rng;
use annealc::{GaugeVector, IsingModel, Qubo};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn random_qubo<R: Rng>(rng: &mut R, n: usize) -> Qubo {
    let mut q = Qubo::new(n);
    q.constant = rng.gen_range(-5.0..5.0);
    for i in 0..n {
        q.add_linear(i, rng.gen_range(-5.0..5.0));
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                q.add_quadratic(i, j, rng.gen_range(-5.0..5.0));
            }
        }
    }
    q
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn sixteen_variable_roundtrip_exhaustive() {
    let q = random_qubo(&mut rng::stream(5, 0), 16);
    let m = qubo_to_ising(&q);
    let back = ising_to_qubo(&m);
    for x in all_bits(16) {
        let v = q.value(&x).unwrap();
        let s = spins_from_bits(&x);
        assert!(close(v, ising_energy_naive(&m, &s) + m.offset));
        assert!(close(v, back.value(&x).unwrap()));
    }
}

#[test]
fn multicut_quadratic_roundtrip() {
    let g = fixture("multicut_tree20_quadratic.pbf");
    let q = qubo_from_pbf(&g).unwrap();
    assert_eq!(q.constant, 14.0);
    let back = ising_to_qubo(&qubo_to_ising(&q));
    assert_eq!(back.constant, q.constant);
    for (k, v) in q.linear() {
        assert!(close(back.linear()[k], *v));
    }
    for (k, v) in q.quadratic() {
        assert!(close(back.quadratic()[k], *v));
    }
    assert_eq!(back.linear().len(), q.linear().len());
    assert_eq!(back.quadratic().len(), q.quadratic().len());
}

#[test]
fn maxsat_ising_offset_and_ground_energy() {
    let h = encode_maxsat(&maxsat_instance());
    let r = reduce_to_quadratic(&h);
    let m = qubo_to_ising(&qubo_from_pbf(&r.result).unwrap());
    // constant 5 + Σu/2 + Σe/4 over the reduced objective
    let q = qubo_from_pbf(&r.result).unwrap();
    let expected_offset =
        q.constant + q.linear().values().sum::<f64>() / 2.0 + q.quadratic().values().sum::<f64>() / 4.0;
    assert_eq!(m.offset, expected_offset);
    assert_eq!(m.offset, 17.25);
    let full = complete_aux(&r, &[0, 0, 1, 1, 1, 1, 1, 1, 1]).unwrap();
    let e = ising_energy(&m, &spins_from_bits(&full)).unwrap();
    assert_eq!(e, -17.25);
    assert_eq!(e + m.offset, 0.0);
}

#[test]
fn multicut_ising_value_at_optimum() {
    let (h, _) = encode_mmc_tree(&multicut_instance(), None).unwrap();
    let r = reduce_to_quadratic(&h);
    let m = qubo_to_ising(&qubo_from_pbf(&r.result).unwrap());
    let full = complete_aux(&r, &[1, 0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0]).unwrap();
    assert_eq!(ising_energy(&m, &spins_from_bits(&full)).unwrap() + m.offset, 5.0);
}

#[test]
fn gauge_argmin_covariance() {
    for seed in 0..10 {
        let mut r = rng::stream(seed, 1);
        let m = random_ising(&mut r, 8, 0.5);
        let a = GaugeVector::random(8, &mut r);
        let g = m.gauge(&a).unwrap();
        let (e0, mut states) = ising_ground_states(&m);
        let (e1, gauged_states) = ising_ground_states(&g);
        assert_eq!(e0, e1);
        let mut mapped: Vec<Vec<i8>> = gauged_states.iter().map(|s| a.apply(s)).collect();
        states.sort();
        mapped.sort();
        assert_eq!(states, mapped);
    }
}

#[test]
fn gauge_spectrum_exhaustive_twelve() {
    let mut r = rng::stream(77, 0);
    let m = random_ising(&mut r, 12, 0.3);
    let a = GaugeVector::random(12, &mut r);
    let g = m.gauge(&a).unwrap();
    let spectrum = |m: &IsingModel| {
        let mut v: Vec<f64> = all_spins(12).map(|s| ising_energy_naive(m, &s)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    assert_eq!(spectrum(&m), spectrum(&g));
    assert_eq!(g.offset, m.offset);
    assert!(m.gauge(&GaugeVector(vec![1; 11])).is_err());
}

#[test]
fn model_files_roundtrip() {
    let q = random_qubo(&mut rng::stream(3, 3), 6);
    match parse_model(&q.render()).unwrap() {
        ModelFile::Qubo(back) => {
            for x in all_bits(6) {
                assert!(close(back.value(&x).unwrap(), q.value(&x).unwrap()));
            }
        }
        other => panic!("expected a qubo, got {other:?}"),
    }
    let m = q.to_ising();
    assert_eq!(parse_model(&m.render()).unwrap(), ModelFile::Ising(m));
    assert!(parse_model("ising 2\nquad 1 3 1\n").is_err());
    assert!(parse_model("lin 1 1\n").is_err());
}

proptest! {
    #[test]
    fn substitution_consistency(seed in any::<u64>(), n in 1usize..=10) {
        let q = random_qubo(&mut rng::stream(seed, 0), n);
        let m = q.to_ising();
        for x in all_bits(n) {
            let s = spins_from_bits(&x);
            prop_assert_eq!(bits_from_spins(&s), x.clone());
            prop_assert!(close(q.value(&x).unwrap(), m.energy(&s).unwrap() + m.offset));
        }
    }

    #[test]
    fn gauge_identity_random(seed in any::<u64>(), n in 1usize..=16) {
        let mut r = rng::stream(seed, 0);
        let m = random_ising(&mut r, n, 0.5);
        let a = GaugeVector::random(n, &mut r);
        let s: Vec<i8> = (0..n).map(|_| if r.gen() { 1 } else { -1 }).collect();
        let g = m.gauge(&a).unwrap();
        prop_assert_eq!(g.energy(&a.apply(&s)).unwrap(), m.energy(&s).unwrap());
    }
}
