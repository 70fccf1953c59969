pub mod asymptotics;
pub mod bf;
pub mod error;
pub mod ingest;
pub mod laplace;
pub mod noncentral_t;
pub mod quadrature;
pub mod sim;
pub mod special;
pub mod types;

pub use error::{Error, Result};
