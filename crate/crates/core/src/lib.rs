//! Third-order quantum-KdV opers for the quantum Boussinesq model: the
//! trivial-monodromy system for excited states, Frobenius and Sibuya
//! solutions, Q-functions and their functional relations.

pub mod bethe;
pub mod cli;
pub mod connection;
pub mod covercx;
pub mod error;
pub mod oper;
pub mod params;
pub mod trivmon;

pub use error::{Error, Result};
