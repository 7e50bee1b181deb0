//! Path-integral Monte Carlo emulation of a transverse-field anneal.
//!
//! The model is replicated over `P` Trotter slices. Slice `p` carries
//! `B(τ) E(s_p)`, neighbouring slices of the same spin are coupled by
//! `J_r Σ s_{i,p} s_{i,p+1}` (periodic), and Metropolis updates run at
//! temperature `P T`. `Γ` ramps linearly from `gamma0` down to
//! `gamma_final` while `B(τ) = τ` ramps up, so `A(τ) = 1 - τ`.

use rand::Rng;

use super::{metropolis_accept, Compiled, SampleSet, SolverError};
use crate::qubo_ising::IsingModel;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SqaSchedule {
    pub trotter_slices: usize,
    pub gamma0: f64,
    pub gamma_final: f64,
    pub temperature: f64,
    pub sweeps: usize,
}

impl Default for SqaSchedule {
    fn default() -> Self {
        Self { trotter_slices: 16, gamma0: 3.0, gamma_final: 0.01, temperature: 0.05, sweeps: 100 }
    }
}

/// Ferromagnetic replica coupling `(P T / 2) ln tanh(Γ / (P T))`, always
/// `<= 0` in the `+J s s` convention. It tends to 0 for large `Γ` (free
/// slices) and to `-∞` as `Γ → 0` (slices locked together).
pub fn replica_coupling(gamma: f64, slices: usize, temperature: f64) -> f64 {
    let pt = slices as f64 * temperature;
    0.5 * pt * (gamma / pt).tanh().ln()
}

impl SqaSchedule {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.trotter_slices < 2 {
            return Err(SolverError::Schedule(format!("need at least 2 Trotter slices, got {}", self.trotter_slices)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(SolverError::Schedule(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(self.gamma_final > 0.0 && self.gamma0 > self.gamma_final && self.gamma0.is_finite()) {
            return Err(SolverError::Schedule(format!(
                "need gamma0 > gamma_final > 0, got {} and {}",
                self.gamma0, self.gamma_final
            )));
        }
        if self.sweeps == 0 {
            return Err(SolverError::Schedule("sweeps must be at least 1".into()));
        }
        let jr = replica_coupling(self.gamma_final, self.trotter_slices, self.temperature);
        if !jr.is_finite() {
            return Err(SolverError::Schedule(format!(
                "replica coupling diverges at gamma_final = {}",
                self.gamma_final
            )));
        }
        Ok(())
    }

    /// `(Γ, B)` for sweep `k`; the grid starts one step after `τ = 0` and
    /// ends at `τ = 1`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let tau = (k + 1) as f64 / self.sweeps as f64;
        let gamma = self.gamma_final + (self.gamma0 - self.gamma_final) * (1.0 - tau);
        (gamma, tau)
    }
}

pub fn simulated_quantum_annealing(
    m: &IsingModel,
    schedule: &SqaSchedule,
    readouts: u64,
    seed: u64,
) -> Result<SampleSet, SolverError> {
    schedule.validate()?;
    if readouts == 0 {
        return Err(SolverError::NoReadouts);
    }
    let c = Compiled::new(m);
    let n = c.len();
    let p = schedule.trotter_slices;
    let pt = p as f64 * schedule.temperature;
    let points: Vec<(f64, f64)> = (0..schedule.sweeps)
        .map(|k| {
            let (gamma, b) = schedule.point(k);
            (replica_coupling(gamma, p, schedule.temperature), b)
        })
        .collect();

    let reads = (0..readouts).map(|r| {
        let mut rng = rng::stream(seed, r);
        let mut slices: Vec<Vec<i8>> =
            (0..p).map(|_| (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).collect();
        for &(jr, b) in &points {
            for k in 0..p {
                let (up, down) = ((k + 1) % p, (k + p - 1) % p);
                for i in 0..n {
                    let si = f64::from(slices[k][i]);
                    let problem = -2.0 * si * c.local_field(&slices[k], i);
                    let ring = f64::from(slices[up][i] + slices[down][i]);
                    let delta = b * problem - 2.0 * jr * si * ring;
                    if metropolis_accept(delta, pt, &mut rng) {
                        slices[k][i] = -slices[k][i];
                    }
                }
            }
        }
        slices
            .into_iter()
            .map(|s| {
                let e = m.energy_unchecked(&s);
                (s, e)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least two slices")
    });
    Ok(SampleSet::from_readouts(reads, m.offset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replica_coupling_limits() {
        assert!(replica_coupling(50.0, 8, 0.1).abs() < 1e-12);
        let strong = replica_coupling(1e-6, 8, 0.1);
        assert!(strong < -5.0);
        // monotone in gamma
        assert!(replica_coupling(0.1, 8, 0.1) < replica_coupling(1.0, 8, 0.1));
        assert!(replica_coupling(1.0, 8, 0.1) <= 0.0);
    }

    #[test]
    fn rejects_bad_schedules() {
        let ok = SqaSchedule::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SqaSchedule { trotter_slices: 1, ..ok.clone() },
            SqaSchedule { gamma_final: 0.0, ..ok.clone() },
            SqaSchedule { gamma0: 0.001, ..ok.clone() },
            SqaSchedule { temperature: -1.0, ..ok.clone() },
            SqaSchedule { gamma_final: 5e-324, temperature: 10.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn schedule_endpoints() {
        let s = SqaSchedule { sweeps: 4, ..Default::default() };
        let (g_last, b_last) = s.point(3);
        assert_eq!((g_last, b_last), (s.gamma_final, 1.0));
        assert!(s.point(0).0 < s.gamma0 && s.point(0).1 > 0.0);
    }

    #[test]
    fn finds_ferromagnet_ground_state() {
        let mut m = IsingModel::new(5);
        for i in 0..4 {
            m.add_coupler(i, i + 1, -1.0);
        }
        m.add_field(2, 0.5);
        let s = simulated_quantum_annealing(&m, &SqaSchedule::default(), 10, 1).unwrap();
        assert_eq!(s.lowest().unwrap().spins, vec![-1; 5]);
    }
}
