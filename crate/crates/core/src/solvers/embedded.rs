use std::collections::BTreeMap;

use super::{Sample, SampleSet, Solver, SolverError};
use crate::chimera::{unembed, EmbeddedIsing};
use crate::qubo_ising::IsingModel;

/// Logical samples recovered from a run on the embedded model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSolve {
    /// Logical configurations after majority vote, with logical energies.
    pub logical: SampleSet,
    /// Fraction of readouts in which at least one chain disagreed.
    pub chain_break_rate: f64,
    /// Raw samples over the chain qubits, in chain order.
    pub physical: SampleSet,
}

/// Runs `solver` on the part of the hardware covered by chains, then maps
/// every readout back through majority vote.
///
/// Qubits are compacted in chain order, so an identity embedding produces
/// exactly the logical model and hence exactly the same samples.
pub fn solve_embedded(
    em: &EmbeddedIsing,
    solver: &Solver,
    readouts: u64,
    seed: u64,
) -> Result<EmbeddedSolve, SolverError> {
    let chains = &em.embedding.chains;
    let order: Vec<usize> = chains.iter().flatten().copied().collect();
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &q)| (q, k)).collect();

    let mut compact = IsingModel::new(order.len());
    compact.offset = em.physical.offset;
    for (&q, &h) in em.physical.fields() {
        if let Some(&k) = index.get(&q) {
            compact.add_field(k, h);
        }
    }
    for (&(a, b), &j) in em.physical.couplers() {
        if let (Some(&ka), Some(&kb)) = (index.get(&a), index.get(&b)) {
            compact.add_coupler(ka, kb, j);
        }
    }

    let physical = solver.sample(&compact, readouts, seed)?;
    let mut full = vec![1i8; em.physical.num_vars()];
    let mut broken_reads = 0u64;
    let mut logical = Vec::with_capacity(physical.entries().len());
    for entry in physical.entries() {
        for (&q, &s) in order.iter().zip(&entry.spins) {
            full[q] = s;
        }
        let (spins, broken) = unembed(&full, &em.embedding);
        if broken.iter().any(|&b| b) {
            broken_reads += entry.frequency;
        }
        let energy = em.logical.energy(&spins)?;
        logical.push(Sample { spins, energy, frequency: entry.frequency });
    }
    let total = physical.readouts();
    Ok(EmbeddedSolve {
        logical: SampleSet::from_samples(logical, em.logical.offset),
        chain_break_rate: if total == 0 { 0.0 } else { broken_reads as f64 / total as f64 },
        physical,
    })
}
