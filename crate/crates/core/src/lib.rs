//! Numerical laboratory for modular momentum, deterministic operators and
//! pre/post-selected weak measurements on a periodic 1D grid.
//!
//! * [`qcore`]: grids, wavepackets, operators, split-operator evolution and
//!   dense brute-force oracles.
//! * [`modular`]: `e^{inpL/ħ}` harmonics, folded momentum distributions,
//!   the nonlocal equation of motion and a classical leapfrog contrast.
//! * [`detops`]: deterministic-operator sets and the two-slit σ trio.
//! * [`tsvf`]: two-state vectors, weak values, two-time densities and the
//!   Monte Carlo weak-measurement ensemble.
//! * [`cli`]: the `modqm` experiment runner.

pub mod cli;
pub mod detops;
pub mod error;
pub mod io;
pub mod modular;
pub mod qcore;
pub mod tsvf;

pub use error::{Error, Result};
