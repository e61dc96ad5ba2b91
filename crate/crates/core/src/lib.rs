//! Robust regenerator placement.
//!
//! Nodes of an optical network may host signal regenerators. A signal can
//! travel at most `d_max` before it must be regenerated, so every pair of
//! nodes must be joined by a route whose regenerator-free segments are short
//! enough. Placing a regenerator costs money, node costs are uncertain (static
//! budgeted set) and edge lengths fluctuate per time period (dynamic budgeted
//! set).
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`] and [`io`]: the problem data, the seeded generator and the
//!   instance file format.
//! * [`paths`]: nominal and budget-robust shortest paths and the transformed
//!   communication graph.
//! * [`adversary`]: closed-form worst cases for node costs and scenario
//!   extraction.
//! * [`cds`]: the exact minimum-cost connected dominating set solver on the
//!   transformed graph, placement verification and a brute-force oracle.
//! * [`methods`]: the end-to-end pipelines (DWC, RSB, RDB, CCG, Benders, IRO).
//! * [`hsl`]: the learning-based hide-and-seek game.

pub mod adversary;
pub mod cds;
mod error;
pub mod hsl;
pub mod instance;
pub mod io;
pub mod methods;
pub mod nodeset;
pub mod paths;
pub mod rational;

pub use error::{Error, Result};
pub use instance::{EdgeData, NetworkInstance, NodeData, Scenario};
pub use nodeset::NodeSet;
pub use rational::Rational;
