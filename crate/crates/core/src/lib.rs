//! Numerical toolkit for auditing quantum key distribution security claims.
//!
//! Modules follow the analysis pipeline: [`qstate`] builds density operators
//! and classical-quantum states, [`metrics`] measures them, [`coupling`] and
//! [`bounds`] hold the classical and scalar calculators, [`qkdsim`] produces
//! exact joint distributions from a desk-scale BB84 run, and [`coherent`]
//! covers coherent-state discrimination for masked channels.

pub mod bounds;
pub mod coherent;
pub mod coupling;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod qkdsim;
pub mod qstate;
pub mod sample;

pub use error::{Error, Result};
