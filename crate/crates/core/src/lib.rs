pub mod asymptotics;
pub mod classical;
pub mod cli;
pub mod data;
pub mod distances;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod rank_tests;
pub mod rng;
pub mod sampling;
pub mod scores;
