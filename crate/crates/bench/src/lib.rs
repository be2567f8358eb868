//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use mamt_core::{generate_grid_maze, MazeGraph};

/// Grid maze used by the benches; fixed seed so runs are comparable.
pub fn bench_maze(side: usize) -> Arc<MazeGraph> {
    Arc::new(generate_grid_maze(side, side, 7).expect("valid size"))
}
