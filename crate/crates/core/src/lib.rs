//! Numerical toolkit for seasonally switched ODE systems.
//!
//! A seasonal system alternates a growth field `f_g` on `(n, n + tau]` with a
//! decline field `f_d` on `(n + tau, n + 1]`, optionally with transitions
//! smoothed by a compactly supported kernel of width `epsilon`. The crate
//! integrates such systems, computes their 1-periodic equilibria and the
//! monodromy (fundamental) matrices along them, and locates the primary and
//! secondary critical values of the season length `tau`.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quadrature;
pub mod mollifier;
pub mod models;
pub mod integrator;
pub mod equilibrium;
pub mod oracles;
pub mod linearization;
pub mod bifurcation;
pub mod validation;
pub mod plot;
pub mod config;
pub mod cli;

pub use error::{Error, Result};
pub use mollifier::{KernelSpec, SeasonSchedule};
pub use models::{LVMalthusParams, LogisticMalthus, LogisticMalthusParams, LotkaVolterraMalthus, SeasonalModel};
pub use equilibrium::{PeriodicOrbit, SolverConfig};
pub use integrator::{FundamentalMatrixPath, PeriodMesh, Trajectory};
