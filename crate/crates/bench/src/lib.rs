//! Command-line front end, experiment runner and performance profiles for
//! [`regenloc`].

pub mod cli;
pub mod config;
pub mod experiment;
pub mod profile;
pub mod report;
