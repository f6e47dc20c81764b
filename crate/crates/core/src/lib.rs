pub mod error;
pub mod loss;
pub mod model;
pub mod penalty;
pub mod solvers;
pub mod decorrelate;
pub mod inference;
pub mod bootstrap;
pub mod seed;
pub mod sim;
