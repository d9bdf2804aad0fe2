pub mod chaos;
pub mod error;
pub mod fou;
pub mod frac_calculus;
pub mod kernel;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod spde;
pub mod volterra;

pub use error::{Error, Result};
