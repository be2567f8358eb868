//! Batch sweeps over maze sizes, agent counts, strategies and solvers.
//!
//! Every maze and trial seed derives from the base seed:
//!
//! * maze seed: `derive_seed([base, "maze", "WxH", trial])`, so each trial
//!   index gets its own maze and all cells of one size share that maze list;
//! * trial seed: `derive_seed([base, "WxH/trial", strategy, solver, n, trial])`.
//!
//! Rows come out in cell order (size, n, strategy, solver, trial) whatever
//! the thread count.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::StrategyKind;
use crate::engine::{run_trial, TrialConfig, DEFAULT_STEP_CAP};
use crate::maze::{generate_grid_maze, MazeGraph};
use crate::metrics::{compute_metrics, TrialRow};
use crate::seeds::derive_seed;
use crate::solvers::SolverKind;

/// Environment variable capping batch parallelism.
pub const THREADS_ENV: &str = "MAMT_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub sizes: Vec<GridSize>,
    pub agents: Vec<usize>,
    pub strategies: Vec<StrategyKind>,
    pub solvers: Vec<SolverKind>,
    pub trials: usize,
    pub base_seed: u64,
    pub step_cap: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridSize {
    pub width: usize,
    pub height: usize,
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid grid size '{s}' (expected WxH, e.g. 10x10)");
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(GridSize {
            width: w.trim().parse().map_err(|_| bad())?,
            height: h.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("sweep needs at least one {0}")]
    EmptyList(&'static str),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("agent counts must be at least 1")]
    ZeroAgents,
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("grid {0} has fewer than two cells")]
    TinyGrid(GridSize),
}

impl SweepSpec {
    pub fn new(
        sizes: Vec<GridSize>,
        agents: Vec<usize>,
        strategies: Vec<StrategyKind>,
        solvers: Vec<SolverKind>,
    ) -> Self {
        SweepSpec {
            sizes,
            agents,
            strategies,
            solvers,
            trials: 20,
            base_seed: 0,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sizes.is_empty() {
            return Err(SweepError::EmptyList("maze size"));
        }
        if self.agents.is_empty() {
            return Err(SweepError::EmptyList("agent count"));
        }
        if self.strategies.is_empty() {
            return Err(SweepError::EmptyList("strategy"));
        }
        if self.solvers.is_empty() {
            return Err(SweepError::EmptyList("solver"));
        }
        if self.trials == 0 {
            return Err(SweepError::NoTrials);
        }
        if self.agents.contains(&0) {
            return Err(SweepError::ZeroAgents);
        }
        if self.step_cap == 0 {
            return Err(SweepError::ZeroStepCap);
        }
        if let Some(&g) = self.sizes.iter().find(|g| g.width * g.height < 2) {
            return Err(SweepError::TinyGrid(g));
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.sizes.len() * self.agents.len() * self.strategies.len() * self.solvers.len() * self.trials
    }

    pub fn maze_seed(&self, size: GridSize, trial: usize) -> u64 {
        derive_seed(&[
            &self.base_seed.to_string(),
            "maze",
            &size.to_string(),
            &trial.to_string(),
        ])
    }

    pub fn trial_seed(
        &self,
        size: GridSize,
        trial: usize,
        strategy: StrategyKind,
        solver: SolverKind,
        n: usize,
    ) -> u64 {
        derive_seed(&[
            &self.base_seed.to_string(),
            &format!("{size}/{trial}"),
            strategy.name(),
            solver.name(),
            &n.to_string(),
            &trial.to_string(),
        ])
    }

    /// All trials in row order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.row_count());
        for &size in &self.sizes {
            for &n in &self.agents {
                for &strategy in &self.strategies {
                    for &solver in &self.solvers {
                        for trial in 0..self.trials {
                            out.push(SweepCell {
                                size,
                                n,
                                strategy,
                                solver,
                                trial,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepCell {
    pub size: GridSize,
    pub n: usize,
    pub strategy: StrategyKind,
    pub solver: SolverKind,
    pub trial: usize,
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Runs every trial of the sweep, in parallel on up to `threads` threads
/// (all cores when `None`).
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<TrialRow>, SweepError> {
    spec.validate()?;
    let mut mazes: Vec<(GridSize, usize, u64, Arc<MazeGraph>)> = Vec::new();
    for &size in &spec.sizes {
        for trial in 0..spec.trials {
            let seed = spec.maze_seed(size, trial);
            let maze = generate_grid_maze(size.width, size.height, seed).map_err(|_| SweepError::TinyGrid(size))?;
            mazes.push((size, trial, seed, Arc::new(maze)));
        }
    }
    let maze_for = |size: GridSize, trial: usize| {
        let (_, _, seed, maze) = mazes
            .iter()
            .find(|(s, t, _, _)| *s == size && *t == trial)
            .expect("maze generated");
        (*seed, maze.clone())
    };
    let cells = spec.cells();
    let run_cell = |cell: &SweepCell| {
        let (maze_seed, maze) = maze_for(cell.size, cell.trial);
        run_cell(spec, cell, maze_seed, maze)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    Ok(pool.install(|| cells.par_iter().map(run_cell).collect()))
}

fn run_cell(spec: &SweepSpec, cell: &SweepCell, maze_seed: u64, maze: Arc<MazeGraph>) -> TrialRow {
    let trial_seed = spec.trial_seed(cell.size, cell.trial, cell.strategy, cell.solver, cell.n);
    let optimal_d = maze.optimal_distance();
    let mut config = TrialConfig::new(maze, cell.n, cell.strategy, cell.solver, trial_seed);
    config.step_cap = spec.step_cap;
    let result = run_trial(config).expect("sweep validated the trial config");
    let metrics = compute_metrics(&result);
    TrialRow {
        maze_w: cell.size.width,
        maze_h: cell.size.height,
        maze_seed,
        n: cell.n,
        strategy: cell.strategy.name().to_string(),
        solver: cell.solver.name().to_string(),
        trial_seed,
        status: result.status.name().to_string(),
        makespan: metrics.map(|m| m.makespan),
        avg_fuel: metrics.map(|m| m.avg_fuel),
        head_arrival: result.head_arrival_step,
        optimal_d,
    }
}
