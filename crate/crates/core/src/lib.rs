pub mod error;
pub mod montecarlo;
pub mod netmodel;
pub mod reliability;
pub mod specfun;
pub mod solvers;
pub mod strategy;
