//! Leader-follower flocking for networked Euler-Lagrange agents with
//! unknown parameters, under a distance-based proximity graph.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`]: proximity graphs, Laplacian/incidence/leader matrices, spectra.
//! * [`plant`]: Euler-Lagrange plants and the LVLH spacecraft model.
//! * [`potential`]: connectivity-preserving, collision-avoiding pair potentials.
//! * [`control`]: the three distributed follower laws.
//! * [`engine`]: RK4 closed-loop simulation, logs and Lyapunov diagnostics.
//! * [`scenario`], [`report`], [`verify`]: scenario files, CSV/SVG output and
//!   property suites used by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod engine;
pub mod error;
pub mod plant;
pub mod potential;
pub mod report;
pub mod scenario;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
