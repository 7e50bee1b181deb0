//! `annealc` compiles discrete optimization problems into Ising models for
//! annealing hardware and solves them with classical emulators.
//!
//! The pipeline is staged:
//!
//! 1. front-ends ([`frontends`]) turn max-SAT formulas and multicut-on-trees
//!    instances into [`pbf::PseudoBooleanFunction`]s;
//! 2. [`reduce`] lowers any degree to a quadratic function with auxiliary
//!    variables;
//! 3. [`qubo_ising`] converts to a QUBO and then to an Ising model with an
//!    explicit offset;
//! 4. [`chimera`] minor-embeds the logical model into a Chimera topology;
//! 5. [`solvers`] samples the model (exact enumeration, simulated annealing,
//!    path-integral simulated quantum annealing);
//! 6. [`analysis`] builds energy histograms and time-to-solution estimates.

pub mod analysis;
pub mod chimera;
pub mod frontends;
pub mod pbf;
pub mod qubo_ising;
pub mod reduce;
pub mod rng;
pub mod solvers;

pub use pbf::{parse_pbf, Monomial, PseudoBooleanFunction};
pub use qubo_ising::{GaugeVector, IsingModel, Qubo};
pub use solvers::{Sample, SampleSet, Solver};
