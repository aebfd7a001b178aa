//! Simulation and design analysis for a single-translational-DOF Sarrus jumping linkage.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: kinematic maps of one leg plane (height, effective leg, band anchor distance, stretch).
//! - [`elastic`]: drive-force laws for the elastic band, stored energy and least-squares fitting.
//! - [`thrust`]: virtual-work thrust of the linkage and closed-form special cases.
//! - [`dynamics`]: the decompression equation of motion, take-off detection, ballistic flight and efficiency.
//! - [`analysis`]: equilibria, phase portraits, efficiency sensitivity and friction identification.
//! - [`screws`]: Plücker screws and the mobility analysis of n-sided Sarrus mechanisms.
//! - [`config`] and [`io`]: run configuration and the CSV/JSON layouts used by the command-line tool.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod elastic;
mod error;
pub mod geometry;
pub mod io;
pub mod screws;
pub mod thrust;

pub use error::{Error, Result};
