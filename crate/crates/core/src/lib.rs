//! Evolving population of neural-network agents driven by energy and
//! mating motivations in a one-dimensional ring of cells.
//!
//! * [`model`]: world, agents, parameters, motivations, sensing
//! * [`controller`]: single-layer logistic network with argmax choice
//! * [`evolution`]: recombination, mutation, founder instincts
//! * [`engine`]: one iteration of the world and whole runs
//! * [`analysis`]: weight statistics and behavioral probing
//! * [`config`], [`snapshot`], [`harness`]: experiments and their files

pub mod analysis;
pub mod config;
pub mod controller;
pub mod engine;
pub mod evolution;
pub mod harness;
pub mod model;
pub mod rng;
pub mod snapshot;

pub use config::RunConfig;
pub use engine::{run, Simulation, StepRecord};
pub use model::{Action, Agent, Genome, MotivationMode, World};
