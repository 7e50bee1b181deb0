use std::collections::BTreeMap;

use super::{Compiled, Sample, SampleSet, SolverError};
use crate::pbf::PseudoBooleanFunction;
use crate::qubo_ising::IsingModel;

pub const MAX_BRUTE_FORCE_VARS: usize = 25;
/// Beyond this, keeping every level would not fit in memory.
pub const MAX_FULL_SPECTRUM_VARS: usize = 20;

/// f64 with a total order, for use as a map key.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Level(f64);

impl Eq for Level {}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Enumerates all `2^n` configurations in Gray-code order and keeps every
/// configuration lying in the `levels` lowest energy levels, each as a
/// separate entry with frequency 1 (so level frequencies are degeneracies).
/// `levels = usize::MAX` keeps the whole spectrum.
pub fn brute_force(m: &IsingModel, levels: usize) -> Result<SampleSet, SolverError> {
    let n = m.num_vars();
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(SolverError::TooLarge { n, max: MAX_BRUTE_FORCE_VARS });
    }
    if levels == usize::MAX && n > MAX_FULL_SPECTRUM_VARS {
        return Err(SolverError::TooLarge { n, max: MAX_FULL_SPECTRUM_VARS });
    }
    let levels = levels.max(1);
    let c = Compiled::new(m);
    let mut s = vec![-1i8; n];
    let mut field: Vec<f64> = (0..n).map(|i| c.local_field(&s, i)).collect();
    let mut energy = m.energy_unchecked(&s);
    let mut mask: u32 = 0;
    let mut kept: BTreeMap<Level, Vec<u32>> = BTreeMap::new();

    let record = |kept: &mut BTreeMap<Level, Vec<u32>>, energy: f64, mask: u32| {
        // -0.0 and 0.0 must share a level
        let energy = energy + 0.0;
        if kept.len() == levels {
            let worst = *kept.keys().next_back().expect("non-empty");
            if Level(energy) > worst {
                return;
            }
            kept.entry(Level(energy)).or_default().push(mask);
            if kept.len() > levels {
                kept.pop_last();
            }
        } else {
            kept.entry(Level(energy)).or_default().push(mask);
        }
    };

    record(&mut kept, energy, mask);
    for step in 1u64..1u64 << n {
        let b = step.trailing_zeros() as usize;
        let old = s[b];
        energy -= 2.0 * f64::from(old) * field[b];
        s[b] = -old;
        mask ^= 1 << b;
        let delta = 2.0 * f64::from(s[b]);
        for &(j, v) in c.neighbors(b) {
            field[j] += v * delta;
        }
        record(&mut kept, energy, mask);
    }

    let samples = kept.into_values().flatten().map(|mask| {
        let spins: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
        let energy = m.energy_unchecked(&spins);
        Sample { spins, energy, frequency: 1 }
    });
    Ok(SampleSet::from_samples(samples, m.offset))
}

/// Exact minimum of a pseudo-Boolean function of any degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PbfMinimum {
    pub value: f64,
    /// Every minimizing assignment, in increasing binary order.
    pub argmins: Vec<Vec<u8>>,
}

/// Minimizes `f` by evaluating all `2^n` assignments. Values within `1e-9`
/// of the minimum count as ties.
pub fn minimize_pbf(f: &PseudoBooleanFunction) -> Result<PbfMinimum, SolverError> {
    let n = f.num_vars();
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(SolverError::TooLarge { n, max: MAX_BRUTE_FORCE_VARS });
    }
    // Terms as bit masks for fast evaluation.
    let terms: Vec<(u32, f64)> = f
        .terms()
        .iter()
        .map(|t| (t.vars().iter().fold(0u32, |m, &v| m | 1 << (v - 1)), t.coefficient))
        .collect();
    let mut best = f64::INFINITY;
    let mut argmins = Vec::new();
    for mask in 0u32..(1u64 << n) as u32 {
        let value: f64 = terms.iter().filter(|&&(m, _)| mask & m == m).map(|&(_, c)| c).sum();
        if value < best - 1e-9 {
            best = value;
            argmins.clear();
        }
        if (value - best).abs() <= 1e-9 {
            argmins.push(mask);
        }
    }
    let argmins = argmins.into_iter().map(|m| (0..n).map(|i| (m >> i & 1) as u8).collect()).collect();
    Ok(PbfMinimum { value: best, argmins })
}
