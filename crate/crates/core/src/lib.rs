//! Moldable job scheduling: lower bounds, compression, dual approximation.

pub mod allotment;
pub mod compression;
pub mod driver;
pub mod fptas;
pub mod harness;
pub mod io;
pub mod knapsack;
pub mod model;
pub mod two_shelf;
