//! Single-agent maze solvers with serializable continuation state.
//!
//! A solver sees only its current node, the ordered adjacent nodes and its
//! own state. Its state can be encoded, shipped to another agent and resumed
//! there, which is what lets the head role change hands mid-traversal.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maze::{MazeGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    Dfs,
    Bfs,
    RandomWalk,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Dfs, SolverKind::Bfs, SolverKind::RandomWalk];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dfs => "dfs",
            SolverKind::Bfs => "bfs",
            SolverKind::RandomWalk => "random",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfs" => Ok(SolverKind::Dfs),
            "bfs" => Ok(SolverKind::Bfs),
            "random" | "random_walk" => Ok(SolverKind::RandomWalk),
            other => Err(format!("unknown solver '{other}' (expected dfs, bfs or random)")),
        }
    }
}

#[derive(Debug, Error)]
#[error("malformed solver payload: {0}")]
pub struct PayloadError(#[from] bincode::Error);

/// Breadth-first bookkeeping for a physically moving agent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BfsState {
    root: Option<NodeId>,
    /// Discovered but not yet visited, in discovery order. The front is the
    /// node currently being walked to.
    queue: VecDeque<NodeId>,
    /// Discovery parent of every discovered node except the root.
    parent: BTreeMap<NodeId, NodeId>,
}

impl BfsState {
    fn is_discovered(&self, u: NodeId) -> bool {
        self.root == Some(u) || self.parent.contains_key(&u)
    }

    fn expand(&mut self, u: NodeId, neighbors: &[NodeId]) {
        for &v in neighbors {
            if !self.is_discovered(v) {
                self.parent.insert(v, u);
                self.queue.push_back(v);
            }
        }
    }

    /// Handles arrival at `current` and returns the next hop towards the
    /// front of the queue.
    fn advance(&mut self, current: NodeId, neighbors: &[NodeId]) -> NodeId {
        if self.root.is_none() {
            self.root = Some(current);
            self.expand(current, neighbors);
        } else if self.queue.front() == Some(&current) {
            self.queue.pop_front();
            self.expand(current, neighbors);
        }
        let Some(&target) = self.queue.front() else {
            // Everything reachable has been visited; keep pacing.
            return neighbors[0];
        };
        let mut chain = vec![target];
        while let Some(&p) = self.parent.get(chain.last().unwrap()) {
            chain.push(p);
        }
        match chain.iter().position(|&u| u == current) {
            Some(k) => chain[k - 1],
            None => self.parent[&current],
        }
    }

    pub fn discovered(&self) -> usize {
        self.parent.len() + usize::from(self.root.is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SolverState {
    /// Wall-following depth-first traversal: leave through the successor of
    /// the arrival edge in the cyclic neighbour order.
    Dfs {
        came_from: Option<NodeId>,
    },
    Bfs(BfsState),
    /// Uniform random walk. Draw `k` comes from ChaCha stream `k` keyed by
    /// `key`, so the walk replays exactly wherever it is resumed.
    RandomWalk {
        key: u64,
        draws: u64,
    },
}

impl SolverState {
    /// Fresh state for an agent about to leave the start node.
    pub fn new(kind: SolverKind, seed: u64) -> Self {
        match kind {
            SolverKind::Dfs => SolverState::Dfs { came_from: None },
            SolverKind::Bfs => SolverState::Bfs(BfsState::default()),
            SolverKind::RandomWalk => SolverState::RandomWalk { key: seed, draws: 0 },
        }
    }

    pub fn kind(&self) -> SolverKind {
        match self {
            SolverState::Dfs { .. } => SolverKind::Dfs,
            SolverState::Bfs(_) => SolverKind::Bfs,
            SolverState::RandomWalk { .. } => SolverKind::RandomWalk,
        }
    }

    /// Next node after `current` and the continuation after that move.
    pub fn next(&self, current: NodeId, neighbors: &[NodeId]) -> (NodeId, SolverState) {
        self.next_avoiding(current, neighbors, |_| false)
            .expect("solver always proposes a move when nothing is blocked")
    }

    /// Like [`next`](Self::next), but treats nodes for which `blocked`
    /// holds as walls for this step. `None` when no move is possible.
    pub fn next_avoiding(
        &self,
        current: NodeId,
        neighbors: &[NodeId],
        blocked: impl Fn(NodeId) -> bool,
    ) -> Option<(NodeId, SolverState)> {
        assert!(!neighbors.is_empty(), "node {current} has no neighbours");
        match self {
            SolverState::Dfs { came_from } => {
                let len = neighbors.len();
                let base = came_from.and_then(|c| neighbors.iter().position(|&v| v == c));
                let mut candidates = (0..len).map(|k| match base {
                    Some(b) => neighbors[(b + 1 + k) % len],
                    None => neighbors[k],
                });
                let next = candidates.find(|&v| !blocked(v))?;
                Some((
                    next,
                    SolverState::Dfs {
                        came_from: Some(current),
                    },
                ))
            }
            SolverState::Bfs(state) => {
                let mut state = state.clone();
                let next = state.advance(current, neighbors);
                (!blocked(next)).then_some((next, SolverState::Bfs(state)))
            }
            SolverState::RandomWalk { key, draws } => {
                let open: Vec<NodeId> = neighbors.iter().copied().filter(|&v| !blocked(v)).collect();
                if open.is_empty() {
                    return None;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*key);
                rng.set_stream(*draws);
                let next = open[rng.gen_range(0..open.len())];
                Some((
                    next,
                    SolverState::RandomWalk {
                        key: *key,
                        draws: draws + 1,
                    },
                ))
            }
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        bincode::serialize(self).expect("solver state encodes")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, PayloadError> {
        Ok(bincode::deserialize(bytes)?)
    }
}

/// Trajectory of a lone agent.
#[derive(Clone, Debug, PartialEq)]
pub struct SoloRun {
    /// Node at step 0, 1, 2, ...; starts at the maze start.
    pub trajectory: Vec<NodeId>,
    pub reached_goal: bool,
}

impl SoloRun {
    pub fn fuel(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// Runs one agent from start until it reaches the goal or `step_cap` moves
/// have been made.
pub fn run_solo(maze: &MazeGraph, kind: SolverKind, seed: u64, step_cap: u64) -> SoloRun {
    let mut state = SolverState::new(kind, seed);
    let mut current = maze.start();
    let mut trajectory = vec![current];
    while current != maze.goal() && (trajectory.len() as u64) <= step_cap {
        let (next, s) = state.next(current, maze.neighbors(current));
        state = s;
        current = next;
        trajectory.push(current);
    }
    SoloRun {
        reached_goal: current == maze.goal(),
        trajectory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{generate_grid_maze, maze_from_edges};

    /// s=0, d=1, c=2, g=3; edges s-d, s-c, c-g.
    fn star4() -> MazeGraph {
        maze_from_edges(4, &[(0, 1), (0, 2), (2, 3)], 0, 3).unwrap()
    }

    fn nodes(ids: &[u32]) -> Vec<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn dfs_backtracks_from_dead_end() {
        let s = SolverState::Dfs {
            came_from: Some(NodeId(5)),
        };
        assert_eq!(s.next(NodeId(9), &nodes(&[5])).0, NodeId(5));
    }

    #[test]
    fn dfs_takes_successor_of_arrival_edge() {
        let s = SolverState::Dfs {
            came_from: Some(NodeId(3)),
        };
        assert_eq!(s.next(NodeId(0), &nodes(&[1, 2, 3])).0, NodeId(1));
        let s = SolverState::Dfs {
            came_from: Some(NodeId(1)),
        };
        assert_eq!(s.next(NodeId(0), &nodes(&[1, 2, 3])).0, NodeId(2));
        let s = SolverState::Dfs { came_from: None };
        assert_eq!(s.next(NodeId(0), &nodes(&[1, 2, 3])).0, NodeId(1));
    }

    #[test]
    fn solo_runs_on_fixtures() {
        let path = maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        for kind in SolverKind::ALL {
            let run = run_solo(&path, kind, 1, 10_000);
            if kind != SolverKind::RandomWalk {
                assert_eq!(run.trajectory, nodes(&[0, 1, 2, 3]));
                assert_eq!(run.fuel(), 3);
            }
            assert!(run.reached_goal);
        }
        let run = run_solo(&star4(), SolverKind::Dfs, 0, 100);
        assert_eq!(run.trajectory, nodes(&[0, 1, 0, 2, 3]));
        assert_eq!(run.fuel(), 4);
    }

    #[test]
    fn bfs_visits_shallow_nodes_first() {
        // 0 - 1 - 3 - 4(goal), 0 - 2
        let m = maze_from_edges(5, &[(0, 1), (0, 2), (1, 3), (3, 4)], 0, 4).unwrap();
        let run = run_solo(&m, SolverKind::Bfs, 0, 100);
        assert_eq!(run.trajectory, nodes(&[0, 1, 0, 2, 0, 1, 3, 4]));
    }

    #[test]
    fn random_walk_truncates_at_cap() {
        let m = generate_grid_maze(30, 30, 5).unwrap();
        let run = run_solo(&m, SolverKind::RandomWalk, 3, 50);
        assert!(run.fuel() <= 50);
        if !run.reached_goal {
            assert_eq!(run.fuel(), 50);
        }
    }

    #[test]
    fn random_walk_is_uniform() {
        // chi-square with 3 degrees of freedom at significance 0.01: 11.345
        let nbrs = nodes(&[10, 11, 12, 13]);
        let mut counts = [0usize; 4];
        let mut state = SolverState::new(SolverKind::RandomWalk, 42);
        for _ in 0..10_000 {
            let (next, s) = state.next(NodeId(0), &nbrs);
            counts[(next.0 - 10) as usize] += 1;
            state = s;
        }
        let expected = 2_500.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 11.345, "counts {counts:?} chi2 {chi2}");
    }

    #[test]
    fn masked_dfs_skips_walls() {
        let s = SolverState::Dfs {
            came_from: Some(NodeId(3)),
        };
        let nbrs = nodes(&[1, 2, 3]);
        assert_eq!(
            s.next_avoiding(NodeId(0), &nbrs, |v| v == NodeId(1)).unwrap().0,
            NodeId(2)
        );
        assert!(s.next_avoiding(NodeId(0), &nbrs, |_| true).is_none());
    }

    #[test]
    fn payload_round_trip_and_size() {
        let m = generate_grid_maze(12, 12, 2).unwrap();
        for kind in SolverKind::ALL {
            let mut state = SolverState::new(kind, 9);
            let mut at = m.start();
            for _ in 0..40 {
                let (next, s) = state.next(at, m.neighbors(at));
                state = s;
                at = next;
            }
            assert_eq!(SolverState::decode(&state.encode()).unwrap(), state);
        }
        let small = SolverState::Dfs {
            came_from: Some(NodeId(3)),
        }
        .encode()
        .len();
        let large = SolverState::Dfs {
            came_from: Some(NodeId(4_000_000)),
        }
        .encode()
        .len();
        assert_eq!(small, large);
        assert!(SolverState::decode(&[0xff, 0xff, 0xff, 0xff, 1]).is_err());
        assert!(SolverState::decode(&[]).is_err());
    }

    #[test]
    fn bfs_payload_grows_linearly() {
        let m = generate_grid_maze(15, 15, 4).unwrap();
        let mut state = SolverState::new(SolverKind::Bfs, 0);
        let mut at = m.start();
        for _ in 0..300 {
            if at == m.goal() {
                break;
            }
            let (next, s) = state.next(at, m.neighbors(at));
            state = s;
            at = next;
            let SolverState::Bfs(b) = &state else { unreachable!() };
            // root + queue entry + parent entry per discovered node, plus headers
            assert!(state.encode().len() <= 64 + 16 * b.discovered());
        }
    }
}
