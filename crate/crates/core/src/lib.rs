//! Demonstration-driven automatic design of robot swarm control software.
//!
//! A designer supplies a few desired final configurations of the swarm.
//! The apprenticeship loop infers a linear reward over landmark-distance
//! features that separates the demonstrations from the behaviors found so
//! far, and a local search over probabilistic finite-state machines then
//! designs control software for that reward in a built-in 2D simulator.

pub mod apprentice;
pub mod arena;
pub mod controller;
pub mod designer;
pub mod error;
pub mod features;
pub mod geometry;
pub mod harness;
pub mod mission;
pub mod sim;

pub use error::{Error, Result};
