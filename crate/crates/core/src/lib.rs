//! Multi-agent maze traversal with a leader-switching head.
//!
//! Tree mazes, the local communication model, single-agent solvers, the
//! per-agent protocol, comparison strategies, a lockstep trial engine and
//! batch tooling.

pub mod baselines;
pub mod engine;
pub mod maze;
pub mod metrics;
pub mod protocol;
pub mod render;
pub mod seeds;
pub mod solvers;
pub mod sweep;
pub mod trace;
pub mod world;

pub use baselines::StrategyKind;
pub use engine::{check_invariants, run_trial, Trial, TrialConfig, TrialResult, TrialStatus, Violation};
pub use maze::{generate_geometric_maze, generate_grid_maze, parse_maze, serialize_maze, MazeError, MazeGraph, NodeId};
pub use metrics::{aggregate, compute_metrics, BatchSummary, TrialRow};
pub use solvers::{run_solo, SolverKind, SolverState};
pub use sweep::{run_sweep, GridSize, SweepSpec};
pub use world::{AgentId, WorldState};
