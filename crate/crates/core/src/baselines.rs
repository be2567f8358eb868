//! Comparison strategies: independent solvers that treat neighbours as
//! obstacles, sequential exploration over a global blackboard, and
//! shortest-path streaming with a full map.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::maze::NodeId;
use crate::solvers::SolverState;
use crate::world::{AgentId, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    Mamt,
    Naive,
    GlobalComm,
    FullKnowledge,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Mamt,
        StrategyKind::Naive,
        StrategyKind::GlobalComm,
        StrategyKind::FullKnowledge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Mamt => "mamt",
            StrategyKind::Naive => "naive",
            StrategyKind::GlobalComm => "global",
            StrategyKind::FullKnowledge => "fullknowledge",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mamt" => Ok(StrategyKind::Mamt),
            "naive" => Ok(StrategyKind::Naive),
            "global" | "global_comm" => Ok(StrategyKind::GlobalComm),
            "fullknowledge" | "full_knowledge" => Ok(StrategyKind::FullKnowledge),
            other => Err(format!(
                "unknown strategy '{other}' (expected mamt, naive, global or fullknowledge)"
            )),
        }
    }
}

/// Naive strategy: one step of every active agent's own solver.
///
/// Occupied adjacent nodes are walls. Agents claim targets in descending id
/// order, and a node claimed by a higher id within communication range is a
/// wall too, which realizes "higher id has priority for the node between
/// two agents". Several agents may enter the goal at once unless they leave
/// the same node. Returns per slot the chosen move and the continuation to
/// commit if the move happens.
pub fn naive_decide(world: &WorldState, solvers: &[SolverState]) -> Vec<Option<(NodeId, SolverState)>> {
    let n = world.agent_count();
    let goal = world.maze().goal();
    let mut claims: Vec<Option<(NodeId, SolverState)>> = vec![None; n];
    for slot in (0..n).rev() {
        let agent = AgentId::from_slot(slot);
        let here = world.position(agent);
        if here == goal {
            continue;
        }
        let rivals = world.comm_neighbors(agent);
        let claimed = |u: NodeId| {
            rivals.iter().any(|&j| {
                j > agent
                    && matches!(&claims[j.slot()], Some((t, _)) if *t == u)
                    && (u != goal || world.position(j) == here)
            })
        };
        claims[slot] = solvers[slot].next_avoiding(here, world.maze().neighbors(here), |u| {
            world.is_occupied(u) || claimed(u)
        });
    }
    claims
}

/// Shared exploration record of the global-communication strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalBlackboard {
    visited: Vec<bool>,
    goal_found: Option<NodeId>,
}

impl GlobalBlackboard {
    pub fn new(world: &WorldState) -> Self {
        let mut visited = vec![false; world.maze().node_count()];
        for p in world.positions() {
            visited[p.index()] = true;
        }
        GlobalBlackboard {
            visited,
            goal_found: None,
        }
    }

    pub fn is_visited(&self, u: NodeId) -> bool {
        self.visited[u.index()]
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    pub fn goal_found(&self) -> Option<NodeId> {
        self.goal_found
    }

    pub fn record(&mut self, u: NodeId, goal: NodeId) {
        self.visited[u.index()] = true;
        if u == goal && self.goal_found.is_none() {
            self.goal_found = Some(u);
        }
    }
}

/// Next active agent in ascending-id round-robin order, starting at
/// `cursor` (a slot index, wrapping).
pub fn next_turn(world: &WorldState, cursor: usize) -> Option<AgentId> {
    let n = world.agent_count();
    (0..n)
        .map(|k| AgentId::from_slot((cursor + k) % n))
        .find(|&a| !world.at_goal(a))
}

/// Desired move of the agent whose turn it is, or `None` when it forfeits.
///
/// Before the goal is known: the first unexplored neighbour, else one hop
/// towards the nearest visited node that still has an unexplored neighbour
/// (breadth-first over the visited subgraph, ties by neighbour order). Once
/// the goal is known: one hop along the tree path to it. Occupied next hops
/// forfeit the turn.
pub fn global_comm_step(
    world: &WorldState,
    board: &GlobalBlackboard,
    agent: AgentId,
    towards_goal: &[NodeId],
) -> Option<NodeId> {
    let maze = world.maze();
    let here = world.position(agent);
    let next = if board.goal_found().is_some() {
        towards_goal[here.index()]
    } else if let Some(&fresh) = maze.neighbors(here).iter().find(|&&u| !board.is_visited(u)) {
        fresh
    } else {
        nearest_frontier_hop(world, board, here)?
    };
    (!world.is_occupied(next)).then_some(next)
}

fn nearest_frontier_hop(world: &WorldState, board: &GlobalBlackboard, from: NodeId) -> Option<NodeId> {
    let maze = world.maze();
    let mut first_hop: Vec<Option<NodeId>> = vec![None; maze.node_count()];
    let mut seen = vec![false; maze.node_count()];
    seen[from.index()] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u != from && maze.neighbors(u).iter().any(|&w| !board.is_visited(w)) {
            return first_hop[u.index()];
        }
        for &w in maze.neighbors(u) {
            if board.is_visited(w) && !seen[w.index()] {
                seen[w.index()] = true;
                first_hop[w.index()] = first_hop[u.index()].or(Some(w));
                queue.push_back(w);
            }
        }
    }
    None
}

/// Full-knowledge strategy: step along the unique path to the goal as soon
/// as the next node is free. Among agents on the start node heading for the
/// same node only the lowest id departs.
pub fn full_knowledge_decide(world: &WorldState, towards_goal: &[NodeId]) -> Vec<Option<NodeId>> {
    let maze = world.maze();
    let start = maze.start();
    let mut out = vec![None; world.agent_count()];
    for agent in world.agents() {
        let here = world.position(agent);
        if here == maze.goal() {
            continue;
        }
        let next = towards_goal[here.index()];
        if world.is_occupied(next) {
            continue;
        }
        // everyone on the start node shares one next hop; occupants are sorted
        let yields = here == start && world.occupants(start)[0] != agent;
        if !yields {
            out[agent.slot()] = Some(next);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{maze_from_edges, MazeGraph};
    use crate::solvers::SolverKind;
    use std::sync::Arc;

    fn world(m: &Arc<MazeGraph>, pos: &[u32]) -> WorldState {
        WorldState::with_positions(m.clone(), pos.iter().map(|&p| NodeId(p)).collect())
    }

    #[test]
    fn names_round_trip() {
        for s in StrategyKind::ALL {
            assert_eq!(s.name().parse::<StrategyKind>().unwrap(), s);
        }
        assert!("greedy".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn naive_higher_id_takes_middle_node() {
        // 0 - 1 - 2 - 3 - 4 with agents 1 and 2 on either side of node 2
        let m = Arc::new(maze_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], 0, 4).unwrap());
        let w = world(&m, &[1, 3]);
        let solvers = vec![
            SolverState::Dfs {
                came_from: Some(NodeId(0)),
            },
            SolverState::Dfs {
                came_from: Some(NodeId(4)),
            },
        ];
        let d = naive_decide(&w, &solvers);
        assert_eq!(d[1].as_ref().unwrap().0, NodeId(2));
        // the lower id treats node 2 as a wall and turns back
        assert_eq!(d[0].as_ref().unwrap().0, NodeId(0));
    }

    #[test]
    fn naive_waits_when_fully_masked() {
        let m = Arc::new(maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap());
        // agent 1 at dead end 0 (start), agent 2 on its only exit
        let w = world(&m, &[0, 1]);
        let solvers = vec![
            SolverState::new(SolverKind::Dfs, 0),
            SolverState::Dfs {
                came_from: Some(NodeId(0)),
            },
        ];
        let d = naive_decide(&w, &solvers);
        assert!(d[0].is_none());
        assert_eq!(d[1].as_ref().unwrap().0, NodeId(2));
    }

    #[test]
    fn frontier_backtracking() {
        // 0(s) - 1 - 2, 1 - 3 - 4(g), 3 - 5: agent at dead end 2 with 0,1,2 visited
        let m = Arc::new(maze_from_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)], 0, 4).unwrap());
        let w = world(&m, &[2]);
        let mut board = GlobalBlackboard::new(&w);
        board.record(NodeId(0), m.goal());
        board.record(NodeId(1), m.goal());
        let towards = m.next_hops_towards(m.goal());
        assert_eq!(global_comm_step(&w, &board, AgentId(1), &towards), Some(NodeId(1)));
        let w = world(&m, &[1]);
        assert_eq!(global_comm_step(&w, &board, AgentId(1), &towards), Some(NodeId(3)));
    }

    #[test]
    fn global_blocked_agent_forfeits() {
        let m = Arc::new(maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap());
        let w = world(&m, &[1, 2]);
        let mut board = GlobalBlackboard::new(&w);
        board.record(NodeId(3), m.goal());
        let towards = m.next_hops_towards(m.goal());
        assert_eq!(global_comm_step(&w, &board, AgentId(1), &towards), None);
        assert_eq!(global_comm_step(&w, &board, AgentId(2), &towards), Some(NodeId(3)));
    }

    #[test]
    fn round_robin_skips_finished_agents() {
        let m = Arc::new(maze_from_edges(3, &[(0, 1), (1, 2)], 0, 2).unwrap());
        let w = world(&m, &[2, 0, 1]);
        assert_eq!(next_turn(&w, 0), Some(AgentId(2)));
        assert_eq!(next_turn(&w, 2), Some(AgentId(3)));
        assert_eq!(next_turn(&world(&m, &[2, 2]), 0), None);
    }

    #[test]
    fn full_knowledge_serializes_start() {
        let m = Arc::new(maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap());
        let towards = m.next_hops_towards(m.goal());
        let w = world(&m, &[0, 0, 0]);
        assert_eq!(full_knowledge_decide(&w, &towards), vec![Some(NodeId(1)), None, None]);
        let w = world(&m, &[1, 0, 0]);
        assert_eq!(full_knowledge_decide(&w, &towards), vec![Some(NodeId(2)), None, None]);
        let w = world(&m, &[2, 0, 0]);
        assert_eq!(
            full_knowledge_decide(&w, &towards),
            vec![Some(NodeId(3)), Some(NodeId(1)), None]
        );
    }
}
