//! Time-to-solution, energy histograms and gauge averaging.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use crate::qubo_ising::{GaugeVector, IsingModel, ModelError};
use crate::rng;
use crate::solvers::{Sample, SampleSet, Solver, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no ground-state readouts: time to solution is infinite")]
    NoSuccess,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtsReport {
    /// Per-readout success probability `n_gs / N_r`.
    pub success_probability: f64,
    pub target: f64,
    /// Smallest `R` with `1 - (1 - p_s)^R >= target`.
    pub repetitions: u64,
    /// `R * t_a`, in the units of `anneal_time`.
    pub total_time: f64,
}

/// Repetitions and anneal time needed to see the ground state at least
/// once with probability `target`. `ground_hits` may be fractional (an
/// average over gauges).
pub fn time_to_solution(
    ground_hits: f64,
    readouts: f64,
    anneal_time: f64,
    target: f64,
) -> Result<TtsReport, AnalysisError> {
    if !(readouts > 0.0 && readouts.is_finite()) {
        return Err(AnalysisError::Invalid(format!("readout count must be positive, got {readouts}")));
    }
    if !(0.0..=readouts).contains(&ground_hits) {
        return Err(AnalysisError::Invalid(format!("ground-state count {ground_hits} outside 0..={readouts}")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(AnalysisError::Invalid(format!("target probability must lie in (0, 1), got {target}")));
    }
    if !(anneal_time >= 0.0 && anneal_time.is_finite()) {
        return Err(AnalysisError::Invalid(format!("anneal time must be non-negative, got {anneal_time}")));
    }
    if ground_hits == 0.0 {
        return Err(AnalysisError::NoSuccess);
    }
    let p = ground_hits / readouts;
    let repetitions = if p >= 1.0 { 1 } else { repetitions_for(p, target) };
    Ok(TtsReport { success_probability: p, target, repetitions, total_time: repetitions as f64 * anneal_time })
}

fn repetitions_for(p: f64, target: f64) -> u64 {
    let log_miss = (-p).ln_1p();
    let reached = |r: u64| -(r as f64 * log_miss).exp_m1() >= target;
    let mut r = ((-target).ln_1p() / log_miss).ceil().max(1.0) as u64;
    // The closed form can land one off when the ratio is an integer.
    while !reached(r) {
        r += 1;
    }
    while r > 1 && reached(r - 1) {
        r -= 1;
    }
    r
}

/// Wall-clock model for a batch of readouts: programming once, then
/// anneal plus readout per repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeModel {
    pub programming: Duration,
    pub anneal: Duration,
    pub readout: Duration,
}

impl TimeModel {
    pub fn machine_time(&self, repetitions: u32) -> Duration {
        self.programming + (self.anneal + self.readout) * repetitions
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    /// Raw Ising energy (level value, or bin centre when binned).
    pub energy: f64,
    /// `energy + offset`, i.e. the value of the original objective.
    pub adjusted_energy: f64,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub rows: Vec<HistogramRow>,
    pub offset: f64,
    /// Readouts dropped by a filter before binning.
    pub filtered: u64,
}

const LEVEL_TOL: f64 = 1e-9;

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= LEVEL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Groups samples by energy. Exact levels are kept when there are at most
/// `bins` of them (or `bins` is `None`); otherwise equal-width bins are used.
pub fn histogram(samples: &SampleSet, bins: Option<usize>) -> Histogram {
    histogram_filtered(samples, bins, |_| true)
}

/// Like [`histogram`] but drops samples rejected by `keep` first (for
/// example readouts with broken chains) and records how many were dropped.
pub fn histogram_filtered(samples: &SampleSet, bins: Option<usize>, keep: impl Fn(&Sample) -> bool) -> Histogram {
    let (kept, filtered) = samples.filter(keep);
    let offset = samples.offset();
    let mut levels: Vec<(f64, u64)> = Vec::new();
    for s in kept.entries() {
        match levels.last_mut() {
            Some((e, f)) if same_level(*e, s.energy) => *f += s.frequency,
            _ => levels.push((s.energy, s.frequency)),
        }
    }
    let binned = match bins {
        Some(b) if b > 0 && levels.len() > b => {
            let lo = levels[0].0;
            let hi = levels[levels.len() - 1].0;
            let width = (hi - lo) / b as f64;
            let mut counts = vec![0u64; b];
            for &(e, f) in &levels {
                let k = (((e - lo) / width) as usize).min(b - 1);
                counts[k] += f;
            }
            counts
                .into_iter()
                .enumerate()
                .filter(|&(_, f)| f > 0)
                .map(|(k, f)| (lo + (k as f64 + 0.5) * width, f))
                .collect()
        }
        _ => levels,
    };
    let rows = binned
        .into_iter()
        .map(|(energy, frequency)| HistogramRow { energy, adjusted_energy: energy + offset, frequency })
        .collect();
    Histogram { rows, offset, filtered }
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.frequency).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("energy,adjusted_energy,frequency\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.energy, r.adjusted_energy, r.frequency);
        }
        out
    }

    pub fn to_table(&self) -> String {
        if self.rows.is_empty() {
            return format!("no samples ({} filtered)\n", self.filtered);
        }
        let mut out = format!("{:>14} {:>14} {:>10}\n", "energy", "adjusted", "frequency");
        for r in &self.rows {
            let _ = writeln!(out, "{:>14.6} {:>14.6} {:>10}", r.energy, r.adjusted_energy, r.frequency);
        }
        if self.filtered > 0 {
            let _ = writeln!(out, "({} readouts filtered)", self.filtered);
        }
        out
    }
}

/// Result of sampling under several gauges.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeAverage {
    /// All readouts mapped back to the original model, pooled.
    pub combined: SampleSet,
    /// Per energy level, the frequency averaged over gauges.
    pub mean_frequency: Vec<(f64, f64)>,
    pub num_gauges: usize,
}

impl GaugeAverage {
    /// Mean number of readouts per gauge at `energy`.
    pub fn mean_at(&self, energy: f64) -> f64 {
        self.mean_frequency.iter().find(|(e, _)| same_level(*e, energy)).map_or(0.0, |&(_, f)| f)
    }
}

/// Solver seed used for gauge number `g`.
pub fn gauge_seed(seed: u64, g: usize) -> u64 {
    rng::derive_seed(seed, g as u64)
}

/// Samples `m` once per gauge, undoing each gauge on the returned spins.
pub fn gauge_average_with(
    m: &IsingModel,
    solver: &Solver,
    readouts: u64,
    gauges: &[GaugeVector],
    seed: u64,
) -> Result<GaugeAverage, AnalysisError> {
    if gauges.is_empty() {
        return Err(AnalysisError::Invalid("need at least one gauge".into()));
    }
    let mut pooled = Vec::new();
    for (g, a) in gauges.iter().enumerate() {
        let gauged = m.gauge(a)?;
        let set = solver.sample(&gauged, readouts, gauge_seed(seed, g))?;
        for s in set.entries() {
            let spins = a.apply(&s.spins);
            let energy = m.energy(&spins)?;
            pooled.push(Sample { spins, energy, frequency: s.frequency });
        }
    }
    let combined = SampleSet::from_samples(pooled, m.offset);
    let mut totals: BTreeMap<usize, (f64, u64)> = BTreeMap::new();
    let mut level = 0usize;
    let mut prev: Option<f64> = None;
    for s in combined.entries() {
        if let Some(p) = prev {
            if !same_level(p, s.energy) {
                level += 1;
            }
        }
        prev = Some(s.energy);
        totals.entry(level).or_insert((s.energy, 0)).1 += s.frequency;
    }
    let k = gauges.len() as f64;
    let mean_frequency = totals.into_values().map(|(e, f)| (e, f as f64 / k)).collect();
    Ok(GaugeAverage { combined, mean_frequency, num_gauges: gauges.len() })
}

/// [`gauge_average_with`] over `num_gauges` random gauges drawn from `seed`.
pub fn gauge_average(
    m: &IsingModel,
    solver: &Solver,
    readouts: u64,
    num_gauges: usize,
    seed: u64,
) -> Result<GaugeAverage, AnalysisError> {
    let mut g_rng = rng::stream(rng::derive_seed(seed, 0x6761_7567_65), 0);
    let gauges: Vec<GaugeVector> = (0..num_gauges).map(|_| GaugeVector::random(m.num_vars(), &mut g_rng)).collect();
    gauge_average_with(m, solver, readouts, &gauges, seed)
}
