//! Solvers for collaborative task sequencing with multi-agent path finding
//! (CTS-MAPF) on 4-connected grids.
//!
//! The pipeline ranks joint task sequences, rolls each one out with a
//! task-aware PIBT stepper, recovers from deadlocks and livelocks by solving a
//! local MAPF instance with a complete configuration search, and refines
//! feasible plans with large neighborhood search.

pub mod bench;
pub mod dist;
pub mod fixtures;
pub mod grid;
pub mod instance;
pub mod lacam;
pub mod lock;
pub mod lns;
pub mod maps;
pub mod pibt;
pub mod plan;
pub mod rng;
pub mod sequencing;
pub mod solver;
pub mod validate;
pub mod xpibt;

pub use dist::DistCache;
pub use grid::{GridGraph, GridMap, Vertex};
pub use instance::{generate_instance, Agent, Scenario, Task};
pub use plan::{JointPlan, Path};
pub use validate::{completion_times, find_conflicts, validate, Conflict, ConflictKind, Violation};
