//! Higher-order Laplace approximation of marginal likelihoods.

pub mod expansion;
pub mod finite_diff;
pub mod isserlis;
pub mod models;
pub mod taylor;
pub mod tensor;

pub use expansion::{
    coefficients_from_oracles, laplace_c1, laplace_c2, laplace_marginal, DerivativeOracle,
    LaplaceMarginal,
};
pub use finite_diff::{finite_difference_derivatives, FdDerivatives, FiniteDifferenceOracle};
pub use isserlis::{isserlis_moment, pair_partition_count, MomentTable};
pub use tensor::{SymTensor, TensorCoeffs};
