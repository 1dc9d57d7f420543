//! Finite-group lattice gauge models: Kitaev quantum double, Levin-Wen
//! string nets, and Turaev-Viro / Dijkgraaf-Witten state sums.

pub mod cli;
pub mod complex3;
pub mod error;
pub mod fsym;
pub mod group;
pub mod kitaev;
pub mod lattice;
pub mod linalg;
pub mod rep;
pub mod report;
pub mod ribbon;
pub mod state;
pub mod stringnet;
pub mod tv;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
