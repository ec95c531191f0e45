//! Simulation, stealth metric and design optimisation for direct-drive
//! tandem flapping-wing micro air vehicles.

pub mod aero;
pub mod analysis;
pub mod bio;
pub mod config;
pub mod design;
pub mod drivetrain;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod optimizers;
pub mod performance;
pub mod pipeline;
pub mod studies;
pub mod tandem;

pub use design::DesignPoint;
pub use error::{Error, Result};
