pub mod asymptotics;
pub mod bf;
pub mod laplace;
pub mod simulate;
