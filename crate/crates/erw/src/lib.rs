//! Simulation and verification toolkit for the elephant random walk: a
//! nearest-neighbour walk that recalls a uniformly chosen step from its own
//! past and repeats it with probability p (reverses it otherwise).
//!
//! The crate is organized around checking theory against simulation:
//!
//! - [`walk`]: parameters, one-step laws, bit-packed step records, and
//!   trajectory samplers in two equivalent forms (full-history and the
//!   position-time chain).
//! - [`oracle`]: exact small-horizon distributions by path enumeration,
//!   deliberately computed from the recall rule rather than the closed-form
//!   kernel, so the two can be compared.
//! - [`analysis`]: the discrete generator, moment recursion, martingale
//!   scaling sequence a_n, the gamma function it converges to, and Dynkin
//!   residual checks.
//! - [`stats`]: hitting-time experiments, occupation/sign diagnostics,
//!   iterated-logarithm statistics, survival curves, and the scaled
//!   martingale mass that separates the diffusive and superdiffusive
//!   regimes.
//! - [`rmf`]: a finite system of replicas that recall each other's steps
//!   instead of their own, with an exact two-replica oracle.
//!
//! Randomness comes from [`rng::Streams`]: per-trial generators derived
//! purely from `(master_seed, trial_index)`, so experiment results do not
//! depend on how trials are scheduled.

pub mod analysis;
pub mod error;
pub mod oracle;
pub mod rmf;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
