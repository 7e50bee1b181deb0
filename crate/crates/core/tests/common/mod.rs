//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use annealc::frontends::{parse_dimacs, parse_tree, CnfFormula, TreeMulticutInstance};
use annealc::{parse_pbf, IsingModel, PseudoBooleanFunction};
use rand::Rng;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn data(name: &str) -> String {
    std::fs::read_to_string(repo_root().join("data").join(name)).expect("data file")
}

pub fn fixture(name: &str) -> PseudoBooleanFunction {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    parse_pbf(&std::fs::read_to_string(path).expect("fixture")).expect("fixture parses")
}

pub fn maxsat_instance() -> CnfFormula {
    parse_dimacs(&data("maxsat_39.cnf")).unwrap()
}

pub fn multicut_instance() -> TreeMulticutInstance {
    parse_tree(&data("multicut_tree20.tree")).unwrap()
}

/// All assignments of `n` bits, bit `i` of the counter is `x_{i+1}`.
pub fn all_bits(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u64..1 << n).map(move |m| (0..n).map(|i| (m >> i & 1) as u8).collect())
}

pub fn all_spins(n: usize) -> impl Iterator<Item = Vec<i8>> {
    all_bits(n).map(|x| x.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect())
}

/// Term-by-term evaluation straight from the monomial list.
pub fn eval_terms(f: &PseudoBooleanFunction, x: &[u8]) -> f64 {
    f.terms().iter().filter(|t| t.vars().iter().all(|&v| x[v - 1] == 1)).map(|t| t.coefficient).sum()
}

/// `min over aux of g(x, aux)` for a quadratic `g` whose variables above
/// `n` never share a term: each aux contributes `min(0, slope)` where the
/// slope collects every term it appears in with the `x` part satisfied.
pub fn min_over_aux(g: &PseudoBooleanFunction, n: usize, x: &[u8]) -> f64 {
    let mut base = 0.0;
    let mut slope = vec![0.0; g.num_vars() + 1];
    for t in g.terms() {
        let aux: Vec<usize> = t.vars().iter().copied().filter(|&v| v > n).collect();
        assert!(aux.len() <= 1, "aux variables must not interact");
        if !t.vars().iter().filter(|&&v| v <= n).all(|&v| x[v - 1] == 1) {
            continue;
        }
        match aux.first() {
            Some(&a) => slope[a] += t.coefficient,
            None => base += t.coefficient,
        }
    }
    base + slope.iter().map(|&s| s.min(0.0)).sum::<f64>()
}

/// Energy straight from the definition, without the library's evaluator.
pub fn ising_energy_naive(m: &IsingModel, s: &[i8]) -> f64 {
    let h: f64 = m.fields().iter().map(|(&i, &h)| h * f64::from(s[i])).sum();
    let j: f64 = m.couplers().iter().map(|(&(a, b), &j)| j * f64::from(s[a] * s[b])).sum();
    h + j
}

/// Exhaustive minimum and minimizers of an Ising model.
pub fn ising_ground_states(m: &IsingModel) -> (f64, Vec<Vec<i8>>) {
    let mut best = f64::INFINITY;
    let mut states = Vec::new();
    for s in all_spins(m.num_vars()) {
        let e = ising_energy_naive(m, &s);
        if e < best - 1e-9 {
            best = e;
            states.clear();
        }
        if (e - best).abs() <= 1e-9 {
            states.push(s);
        }
    }
    (best, states)
}

/// Random model with integer weights in `-3..=3` and the given coupler density.
pub fn random_ising<R: Rng>(rng: &mut R, n: usize, density: f64) -> IsingModel {
    let mut m = IsingModel::new(n);
    for i in 0..n {
        m.add_field(i, f64::from(rng.gen_range(-3i32..=3)));
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let v = rng.gen_range(1i32..=3) * if rng.gen() { 1 } else { -1 };
                m.add_coupler(i, j, f64::from(v));
            }
        }
    }
    m
}
