use rand::Rng;

use super::{Compiled, SampleSet, SolverError};
use crate::qubo_ising::IsingModel;
use crate::rng;

/// Geometric cooling: `t_k = t0 * cooling^k` for `k in 0..steps`, with
/// `sweeps_per_temp` full single-flip sweeps at each temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SaSchedule {
    pub t0: f64,
    pub cooling: f64,
    pub sweeps_per_temp: usize,
    pub steps: usize,
}

impl Default for SaSchedule {
    fn default() -> Self {
        Self { t0: 10.0, cooling: 0.9, sweeps_per_temp: 2, steps: 60 }
    }
}

impl SaSchedule {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(SolverError::Schedule(format!("initial temperature must be positive, got {}", self.t0)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(SolverError::Schedule(format!("cooling factor must lie in (0, 1), got {}", self.cooling)));
        }
        if self.sweeps_per_temp == 0 || self.steps == 0 {
            return Err(SolverError::Schedule("sweeps and steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn temperature(&self, step: usize) -> f64 {
        self.t0 * self.cooling.powi(step as i32)
    }
}

/// Metropolis rule: downhill and flat moves always pass, uphill moves pass
/// with probability `exp(-delta / t)`.
pub fn metropolis_accept<R: Rng + ?Sized>(delta: f64, t: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp()
}

/// Independent annealing runs, one per readout, each on its own random
/// stream derived from `seed`.
pub fn simulated_annealing(
    m: &IsingModel,
    schedule: &SaSchedule,
    readouts: u64,
    seed: u64,
) -> Result<SampleSet, SolverError> {
    schedule.validate()?;
    if readouts == 0 {
        return Err(SolverError::NoReadouts);
    }
    let c = Compiled::new(m);
    let temps: Vec<f64> = (0..schedule.steps).map(|k| schedule.temperature(k)).collect();
    let reads = (0..readouts).map(|r| {
        let mut rng = rng::stream(seed, r);
        let mut s: Vec<i8> = (0..c.len()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        for &t in &temps {
            for _ in 0..schedule.sweeps_per_temp {
                for i in 0..c.len() {
                    let delta = -2.0 * f64::from(s[i]) * c.local_field(&s, i);
                    if metropolis_accept(delta, t, &mut rng) {
                        s[i] = -s[i];
                    }
                }
            }
        }
        let e = m.energy_unchecked(&s);
        (s, e)
    });
    Ok(SampleSet::from_readouts(reads, m.offset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(SaSchedule::default().validate().is_ok());
        for bad in [
            SaSchedule { t0: 0.0, ..Default::default() },
            SaSchedule { cooling: 1.0, ..Default::default() },
            SaSchedule { cooling: 0.0, ..Default::default() },
            SaSchedule { steps: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn ferromagnet_chain_reaches_ground_state() {
        let mut m = IsingModel::new(6);
        for i in 0..5 {
            m.add_coupler(i, i + 1, -1.0);
        }
        m.add_field(0, -0.5);
        let s = simulated_annealing(&m, &SaSchedule::default(), 20, 3).unwrap();
        assert_eq!(s.readouts(), 20);
        assert_eq!(s.lowest().unwrap().spins, vec![1; 6]);
        assert_eq!(s.min_energy(), Some(-5.5));
    }

    #[test]
    fn same_seed_same_result() {
        let mut m = IsingModel::new(4);
        m.add_coupler(0, 1, 1.0);
        m.add_coupler(1, 2, 1.0);
        m.add_coupler(0, 2, 1.0);
        m.add_field(3, 0.3);
        let a = simulated_annealing(&m, &SaSchedule::default(), 50, 9).unwrap();
        let b = simulated_annealing(&m, &SaSchedule::default(), 50, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_readouts_rejected() {
        assert_eq!(
            simulated_annealing(&IsingModel::new(1), &SaSchedule::default(), 0, 0),
            Err(SolverError::NoReadouts)
        );
    }
}
