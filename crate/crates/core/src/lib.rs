//! Design-stage simulation engine for Bayesian adaptive two-arm trials that
//! borrow strength from a completed historical study through commensurate
//! priors.
//!
//! The engine answers a design question: when a small current trial (e.g. a
//! pediatric study run after an adult trial of the same compound) is allowed
//! one interim analysis with early-win and early-futility stopping, *where*
//! should that interim look be placed?  Everything needed to answer it lives
//! here:
//!
//! * [`gibbs`] — the conjugate Gibbs sampler for the commensurate-prior
//!   normal model and its current-data-only reference variant;
//! * [`rules`] — posterior-probability stopping rules and the effective
//!   historical sample size (EHSS) borrowing diagnostic;
//! * [`sim`] — per-replication trial simulation and batch drivers;
//! * [`calib`] — frequentist calibration of the early-win threshold so the
//!   design holds a target type I error;
//! * [`payoff`] — payoff functions that trade power against expected sample
//!   size, and the grid search for the optimal interim time;
//! * [`model`] — shared configuration and domain types;
//! * [`rng`] — deterministic stream derivation so every replication, data
//!   set, and chain has its own reproducible random stream;
//! * [`exec`] — a minimal executor abstraction so batch loops can run
//!   sequentially here and in parallel in a std front end.
//!
//! The crate is `no_std` (with `alloc`): it does no IO and keeps all math on
//! `f64` scalars and vectors, so it can be embedded in CLI tools, services,
//! or FFI shims alike.  All randomness flows through explicitly seeded
//! [`rand_chacha::ChaCha8Rng`] streams; given the same configuration and
//! master seed, every result is bit-identical regardless of executor.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod calib;
pub mod exec;
pub mod gibbs;
pub mod model;
pub mod payoff;
pub mod rng;
pub mod rules;
pub mod sim;

pub use model::{DesignConfig, DesignPrior, TrialData, TruthScenario};
