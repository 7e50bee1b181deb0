//! Samplers over Ising models.
//!
//! All solvers return a [`SampleSet`]: distinct spin configurations with raw
//! Ising energies (offset excluded, attached as metadata) and frequencies,
//! sorted ascending by energy.

mod anneal;
mod embedded;
mod exact;
mod sqa;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::qubo_ising::{IsingModel, ModelError};

pub use anneal::{metropolis_accept, simulated_annealing, SaSchedule};
pub use embedded::{solve_embedded, EmbeddedSolve};
pub use exact::{brute_force, minimize_pbf, PbfMinimum, MAX_BRUTE_FORCE_VARS, MAX_FULL_SPECTRUM_VARS};
pub use sqa::{replica_coupling, simulated_quantum_annealing, SqaSchedule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("exact enumeration supports at most {max} variables, model has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("at least one readout is required")]
    NoReadouts,
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub spins: Vec<i8>,
    pub energy: f64,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    entries: Vec<Sample>,
    offset: f64,
    readouts: u64,
}

impl SampleSet {
    /// Aggregates identical configurations and sorts by energy (ties by
    /// configuration, so the order is deterministic).
    pub fn from_samples(samples: impl IntoIterator<Item = Sample>, offset: f64) -> Self {
        let mut merged: BTreeMap<Vec<i8>, (f64, u64)> = BTreeMap::new();
        for s in samples {
            merged
                .entry(s.spins)
                .and_modify(|(_, f)| *f += s.frequency)
                .or_insert((s.energy, s.frequency));
        }
        let mut entries: Vec<Sample> = merged
            .into_iter()
            .map(|(spins, (energy, frequency))| Sample { spins, energy, frequency })
            .collect();
        entries.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.spins.cmp(&b.spins)));
        let readouts = entries.iter().map(|e| e.frequency).sum();
        Self { entries, offset, readouts }
    }

    /// One readout per `(spins, energy)` pair.
    pub fn from_readouts(reads: impl IntoIterator<Item = (Vec<i8>, f64)>, offset: f64) -> Self {
        Self::from_samples(reads.into_iter().map(|(spins, energy)| Sample { spins, energy, frequency: 1 }), offset)
    }

    pub fn entries(&self) -> &[Sample] {
        &self.entries
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn readouts(&self) -> u64 {
        self.readouts
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lowest(&self) -> Option<&Sample> {
        self.entries.first()
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.lowest().map(|s| s.energy)
    }

    /// Total frequency of configurations within `tol` of `energy`.
    pub fn frequency_at(&self, energy: f64, tol: f64) -> u64 {
        self.entries.iter().filter(|s| (s.energy - energy).abs() <= tol).map(|s| s.frequency).sum()
    }

    pub fn contains(&self, spins: &[i8]) -> bool {
        self.entries.iter().any(|s| s.spins == spins)
    }

    /// Keeps only entries accepted by `keep`; returns the new set and the
    /// number of readouts removed.
    pub fn filter(&self, keep: impl Fn(&Sample) -> bool) -> (SampleSet, u64) {
        let kept: Vec<Sample> = self.entries.iter().filter(|s| keep(s)).cloned().collect();
        let out = SampleSet::from_samples(kept, self.offset);
        let removed = self.readouts - out.readouts;
        (out, removed)
    }
}

/// Sampler choice with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Solver {
    /// Exact enumeration keeping every configuration in the `levels`
    /// lowest energy levels.
    BruteForce { levels: usize },
    Sa(SaSchedule),
    Sqa(SqaSchedule),
}

impl Solver {
    pub fn sample(&self, m: &IsingModel, readouts: u64, seed: u64) -> Result<SampleSet, SolverError> {
        match self {
            Solver::BruteForce { levels } => brute_force(m, *levels),
            Solver::Sa(s) => simulated_annealing(m, s, readouts, seed),
            Solver::Sqa(s) => simulated_quantum_annealing(m, s, readouts, seed),
        }
    }
}

/// Sparse adjacency form used by the Monte-Carlo kernels.
pub(crate) struct Compiled {
    pub h: Vec<f64>,
    start: Vec<usize>,
    nbrs: Vec<(usize, f64)>,
}

impl Compiled {
    pub fn new(m: &IsingModel) -> Self {
        let n = m.num_vars();
        let mut h = vec![0.0; n];
        for (&i, &v) in m.fields() {
            h[i] = v;
        }
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &v) in m.couplers() {
            lists[i].push((j, v));
            lists[j].push((i, v));
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        for list in lists {
            start.push(nbrs.len());
            nbrs.extend(list);
        }
        start.push(nbrs.len());
        Self { h, start, nbrs }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.nbrs[self.start[i]..self.start[i + 1]]
    }

    /// `h_i + Σ_j J_ij s_j`.
    pub fn local_field(&self, s: &[i8], i: usize) -> f64 {
        self.h[i] + self.neighbors(i).iter().map(|&(j, v)| v * f64::from(s[j])).sum::<f64>()
    }
}
