pub mod analytic;
pub mod cli;
pub mod error;
pub mod noneven;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
