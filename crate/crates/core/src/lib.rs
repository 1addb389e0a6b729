//! Stratified sampling on partitions of the unit cube and the discrepancy of
//! the resulting point sets.

pub mod cli;
pub mod discrepancy;
pub mod expectation;
pub mod geometry;
pub mod io;
pub mod optimize;
pub mod rng;
pub mod sampling;
pub mod tables;
pub mod uniformity;
pub mod verify;
