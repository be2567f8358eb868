//! Lockstep trial executor.
//!
//! Every step runs four phases against consistent snapshots: decide (all
//! agents read the end-of-previous-step state), move (validated against the
//! movement rules), sense/message, and heal/transfer. Rule violations end the
//! trial with a fault status.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::baselines::{
    full_knowledge_decide, global_comm_step, naive_decide, next_turn, GlobalBlackboard, StrategyKind,
};
use crate::maze::{MazeGraph, NodeId};
use crate::protocol::{AgentState, LocalView, UpdateEvent};
use crate::seeds::{agent_solver_seed, solver_seed};
use crate::solvers::{SolverKind, SolverState};
use crate::trace::{Phase, TraceRecord};
use crate::world::{AgentId, HeadTransfer, MessageDraft, WorldState};

pub const DEFAULT_STEP_CAP: u64 = 10_000;

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub maze: Arc<MazeGraph>,
    pub agents: usize,
    pub strategy: StrategyKind,
    pub solver: SolverKind,
    pub seed: u64,
    pub step_cap: u64,
    /// Keep the event trace in the result.
    pub trace: bool,
    /// Run [`check_invariants`] after every step.
    pub check_invariants: bool,
    /// Evaluate per-agent phases in descending slot order. Results must not
    /// depend on it.
    #[doc(hidden)]
    pub reverse_evaluation: bool,
}

impl TrialConfig {
    pub fn new(maze: Arc<MazeGraph>, agents: usize, strategy: StrategyKind, solver: SolverKind, seed: u64) -> Self {
        TrialConfig {
            maze,
            agents,
            strategy,
            solver,
            seed,
            step_cap: DEFAULT_STEP_CAP,
            trace: false,
            check_invariants: false,
            reverse_evaluation: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.agents == 0 {
            return Err(ConfigError::NoAgents);
        }
        if self.step_cap == 0 {
            return Err(ConfigError::ZeroStepCap);
        }
        Ok(())
    }

    /// Seed of the single solver stream used by the head role (and by
    /// [`crate::solvers::run_solo`] to replay it).
    pub fn solver_seed(&self) -> u64 {
        solver_seed(self.seed)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("agent count must be at least 1")]
    NoAgents,
    #[error("step cap must be at least 1")]
    ZeroStepCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrialStatus {
    Success,
    Timeout,
    CollisionFault,
    WallFault,
}

impl TrialStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrialStatus::Success => "success",
            TrialStatus::Timeout => "timeout",
            TrialStatus::CollisionFault => "collision_fault",
            TrialStatus::WallFault => "wall_fault",
        }
    }

    pub fn is_fault(self) -> bool {
        matches!(self, TrialStatus::CollisionFault | TrialStatus::WallFault)
    }

    /// Process exit code in single-trial mode.
    pub fn exit_code(self) -> i32 {
        match self {
            TrialStatus::Success => 0,
            TrialStatus::CollisionFault | TrialStatus::WallFault => 2,
            TrialStatus::Timeout => 3,
        }
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// More than one agent on a node other than start and goal.
    MultiOccupancy { node: NodeId, agents: Vec<AgentId> },
    /// Wrong number of active heads.
    HeadCount { expected: usize, heads: Vec<AgentId> },
    /// Following leader pointers from `agent` neither reaches the head nor
    /// an agent at the goal.
    LeaderChain { agent: AgentId },
    /// Communication graph split into `components` pieces.
    Disconnected { components: usize },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::MultiOccupancy { .. } => "multi_occupancy",
            Violation::HeadCount { .. } => "head_uniqueness",
            Violation::LeaderChain { .. } => "leader_acyclicity",
            Violation::Disconnected { .. } => "connectivity",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultiOccupancy { node, agents } => write!(f, "node {node} holds agents {agents:?}"),
            Violation::HeadCount { expected, heads } => write!(f, "expected {expected} head(s), found {heads:?}"),
            Violation::LeaderChain { agent } => write!(f, "leader chain from agent {agent} does not terminate"),
            Violation::Disconnected { components } => write!(f, "communication graph has {components} components"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub status: TrialStatus,
    pub makespan: Option<u64>,
    pub per_agent_fuel: Vec<u64>,
    pub head_arrival_step: Option<u64>,
    /// Steps executed.
    pub ticks: u64,
    pub trace: Option<Vec<TraceRecord>>,
    /// Invariant violations with the tick they were observed at.
    pub violations: Vec<(u64, Violation)>,
}

enum Controller {
    Mamt(Vec<AgentState>),
    Naive(Vec<SolverState>),
    Global {
        board: GlobalBlackboard,
        cursor: usize,
        towards_goal: Vec<NodeId>,
    },
    FullKnowledge {
        towards_goal: Vec<NodeId>,
    },
}

/// A running trial. [`run_trial`] drives one to completion; tests can step
/// it and inspect the world in between.
pub struct Trial {
    config: TrialConfig,
    world: WorldState,
    controller: Controller,
    fuel: Vec<u64>,
    head_arrival: Option<u64>,
    status: Option<TrialStatus>,
    trace: Option<Vec<TraceRecord>>,
    violations: Vec<(u64, Violation)>,
}

impl Trial {
    pub fn new(config: TrialConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let n = config.agents;
        let world = WorldState::new(config.maze.clone(), n);
        let goal = config.maze.goal();
        let mut trace = config.trace.then(Vec::new);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRecord::new(
                0,
                Phase::Config,
                format!(
                    "strategy={} solver={} n={} seed={} step_cap={}",
                    config.strategy, config.solver, n, config.seed, config.step_cap
                ),
            ));
        }

        let controller = match config.strategy {
            StrategyKind::Mamt => {
                let drafts: Vec<_> = world
                    .agents()
                    .map(|a| {
                        Some(MessageDraft {
                            sender: a,
                            location_class: world.location_class(world.position(a)),
                            leader_of_sender: None,
                            payload: None,
                        })
                    })
                    .collect();
                let inboxes = world.deliver_messages(&drafts, &vec![true; n]);
                let solver = SolverState::new(config.solver, config.solver_seed());
                let mut agents: Vec<AgentState> = inboxes
                    .into_iter()
                    .enumerate()
                    .map(|(slot, inbox)| {
                        let id = AgentId::from_slot(slot);
                        AgentState::initialize(id, world.position(id), inbox, solver.clone())
                    })
                    .collect();
                // Second round: everybody announces the leader it adopted.
                let drafts: Vec<_> = agents
                    .iter()
                    .map(|a| Some(a.draft(world.location_class(a.position), None)))
                    .collect();
                for (a, inbox) in agents.iter_mut().zip(world.deliver_messages(&drafts, &vec![true; n])) {
                    a.inbox = inbox;
                }
                Controller::Mamt(agents)
            }
            StrategyKind::Naive => Controller::Naive(
                (0..n)
                    .map(|slot| {
                        let seed = agent_solver_seed(config.seed, AgentId::from_slot(slot).0);
                        SolverState::new(config.solver, seed)
                    })
                    .collect(),
            ),
            StrategyKind::GlobalComm => Controller::Global {
                board: GlobalBlackboard::new(&world),
                cursor: 0,
                towards_goal: config.maze.next_hops_towards(goal),
            },
            StrategyKind::FullKnowledge => Controller::FullKnowledge {
                towards_goal: config.maze.next_hops_towards(goal),
            },
        };

        if let Some(t) = trace.as_mut() {
            for a in world.agents() {
                let leader = match &controller {
                    Controller::Mamt(agents) => agents[a.slot()].leader.map(|l| l.0),
                    _ => None,
                };
                let mut r = TraceRecord::new(0, Phase::Init, "init");
                r.agent = Some(a.0);
                r.position = Some(world.position(a).0);
                r.leader = leader;
                t.push(r);
            }
        }

        Ok(Trial {
            fuel: vec![0; n],
            config,
            world,
            controller,
            head_arrival: None,
            status: None,
            trace,
            violations: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn status(&self) -> Option<TrialStatus> {
        self.status
    }

    pub fn fuel(&self) -> &[u64] {
        &self.fuel
    }

    pub fn head_arrival(&self) -> Option<u64> {
        self.head_arrival
    }

    /// Protocol states (MAMT only).
    pub fn agents(&self) -> Option<&[AgentState]> {
        match &self.controller {
            Controller::Mamt(agents) => Some(agents),
            _ => None,
        }
    }

    /// Current head (MAMT only): the agent whose leader pointer is nil.
    /// Stays the arrived head once it has reached the goal.
    pub fn head(&self) -> Option<AgentId> {
        self.agents()?.iter().find(|a| a.is_head()).map(|a| a.id)
    }

    pub fn violations(&self) -> &[(u64, Violation)] {
        &self.violations
    }

    /// Advances one step; returns the terminal status once the trial ended.
    pub fn step(&mut self) -> Option<TrialStatus> {
        self.step_with(|_| {})
    }

    /// Like [`step`](Self::step), but lets the caller rewrite the decided
    /// targets before the movement phase validates them.
    #[doc(hidden)]
    pub fn step_with(&mut self, tamper: impl FnOnce(&mut [NodeId])) -> Option<TrialStatus> {
        if self.status.is_some() {
            return self.status;
        }
        let n = self.world.agent_count();
        let tick = self.world.tick + 1;
        let goal = self.world.maze().goal();
        let active: Vec<bool> = self.world.positions().iter().map(|&p| p != goal).collect();
        let mut targets = self.world.positions().to_vec();
        let order: Vec<usize> = if self.config.reverse_evaluation {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };

        // Decision phase.
        let mut transfers: Vec<Option<HeadTransfer>> = vec![None; n];
        let mut naive_moves = Vec::new();
        match &mut self.controller {
            Controller::Mamt(agents) => {
                let mut decisions = vec![None; n];
                for &slot in &order {
                    if active[slot] {
                        let view = LocalView::sense(&self.world, AgentId::from_slot(slot));
                        decisions[slot] = Some(agents[slot].decide(&view));
                    }
                }
                for (slot, decision) in decisions.into_iter().enumerate() {
                    if let Some(d) = decision {
                        transfers[slot] = agents[slot].apply_decision(d);
                        targets[slot] = agents[slot].target;
                    }
                }
            }
            Controller::Naive(solvers) => {
                naive_moves = naive_decide(&self.world, solvers);
                for (slot, mv) in naive_moves.iter().enumerate() {
                    if let Some((to, _)) = mv {
                        targets[slot] = *to;
                    }
                }
            }
            Controller::Global {
                board,
                cursor,
                towards_goal,
            } => {
                if let Some(agent) = next_turn(&self.world, *cursor) {
                    *cursor = (agent.slot() + 1) % n;
                    if let Some(to) = global_comm_step(&self.world, board, agent, towards_goal) {
                        targets[agent.slot()] = to;
                    }
                }
            }
            Controller::FullKnowledge { towards_goal } => {
                for (slot, mv) in full_knowledge_decide(&self.world, towards_goal).into_iter().enumerate() {
                    if let Some(to) = mv {
                        targets[slot] = to;
                    }
                }
            }
        }
        tamper(&mut targets);

        if let Some(t) = self.trace.as_mut() {
            for slot in (0..n).filter(|&s| active[s]) {
                let a = AgentId::from_slot(slot);
                let (leader, event) = match &self.controller {
                    Controller::Mamt(agents) => (
                        agents[slot].leader.map(|l| l.0),
                        match &transfers[slot] {
                            Some(tr) => format!("transfer:{}", tr.to),
                            None => "decide".to_string(),
                        },
                    ),
                    _ => (None, "decide".to_string()),
                };
                let mut r = TraceRecord::new(tick, Phase::Decide, event);
                r.agent = Some(a.0);
                r.position = Some(self.world.position(a).0);
                r.leader = leader;
                r.target = Some(targets[slot].0);
                t.push(r);
            }
        }

        // Movement phase.
        if let Err((status, agent)) = validate_moves(&self.world, &targets) {
            self.world.tick = tick;
            self.status = Some(status);
            if let Some(t) = self.trace.as_mut() {
                let mut r = TraceRecord::new(tick, Phase::End, status.name());
                r.agent = Some(agent.0);
                r.position = Some(self.world.position(agent).0);
                r.target = Some(targets[agent.slot()].0);
                t.push(r);
            }
            return self.status;
        }
        let before = self.world.positions().to_vec();
        for slot in 0..n {
            if targets[slot] != before[slot] {
                self.fuel[slot] += 1;
            }
        }
        self.world.set_positions(targets);
        self.world.tick = tick;
        if let Some(t) = self.trace.as_mut() {
            for slot in (0..n).filter(|&s| active[s]) {
                let moved = self.world.positions()[slot] != before[slot];
                let mut r = TraceRecord::new(tick, Phase::Move, if moved { "move" } else { "wait" });
                r.agent = Some(AgentId::from_slot(slot).0);
                r.position = Some(self.world.positions()[slot].0);
                t.push(r);
            }
        }

        // Sensing, messaging, healing and head transfer.
        match &mut self.controller {
            Controller::Mamt(agents) => {
                let drafts: Vec<_> = agents
                    .iter()
                    .enumerate()
                    .map(|(slot, a)| {
                        let here = self.world.positions()[slot];
                        Some(a.draft(self.world.location_class(here), transfers[slot].take()))
                    })
                    .collect();
                let mut inboxes = self.world.deliver_messages(&drafts, &active);
                let mut events = vec![UpdateEvent::Unchanged; n];
                for &slot in &order {
                    if active[slot] {
                        let a = &mut agents[slot];
                        a.position = self.world.positions()[slot];
                        a.fuel = self.fuel[slot];
                        events[slot] = a.post_move_update(std::mem::take(&mut inboxes[slot]));
                    }
                }
                if self.head_arrival.is_none() && agents.iter().any(|a| a.is_head() && a.position == goal) {
                    self.head_arrival = Some(tick);
                }
                if let Some(t) = self.trace.as_mut() {
                    for slot in (0..n).filter(|&s| active[s]) {
                        let a = &agents[slot];
                        let event = match events[slot] {
                            UpdateEvent::Unchanged => "none".to_string(),
                            UpdateEvent::Healed { from, to } => format!("heal:{from}->{to}"),
                            UpdateEvent::HealDeferred { .. } => "heal_deferred".to_string(),
                            UpdateEvent::BecameHead => "became_head".to_string(),
                        };
                        let mut r = TraceRecord::new(tick, Phase::Update, event);
                        r.agent = Some(a.id.0);
                        r.position = Some(a.position.0);
                        r.leader = a.leader.map(|l| l.0);
                        t.push(r);
                    }
                }
            }
            Controller::Naive(solvers) => {
                for (slot, mv) in naive_moves.into_iter().enumerate() {
                    if let Some((to, continuation)) = mv {
                        if self.world.positions()[slot] == to && before[slot] != to {
                            solvers[slot] = continuation;
                        }
                    }
                }
            }
            Controller::Global { board, .. } => {
                for (&now, &was) in self.world.positions().iter().zip(&before) {
                    if now != was {
                        board.record(now, goal);
                    }
                }
            }
            Controller::FullKnowledge { .. } => {}
        }

        if self.config.check_invariants {
            let found = check_invariants(&self.world, self.agents(), self.head_arrival.is_some());
            self.violations.extend(found.into_iter().map(|v| (tick, v)));
        }

        if self.world.all_at_goal() {
            self.status = Some(TrialStatus::Success);
        } else if tick >= self.config.step_cap {
            self.status = Some(TrialStatus::Timeout);
        }
        if let (Some(status), Some(t)) = (self.status, self.trace.as_mut()) {
            t.push(TraceRecord::new(tick, Phase::End, status.name()));
        }
        self.status
    }

    pub fn run(mut self) -> TrialResult {
        while self.step().is_none() {}
        self.into_result()
    }

    fn into_result(self) -> TrialResult {
        let status = self.status.expect("trial finished");
        TrialResult {
            status,
            makespan: (status == TrialStatus::Success).then_some(self.world.tick),
            per_agent_fuel: self.fuel,
            head_arrival_step: self.head_arrival,
            ticks: self.world.tick,
            trace: self.trace,
            violations: self.violations,
        }
    }
}

pub fn run_trial(config: TrialConfig) -> Result<TrialResult, ConfigError> {
    Ok(Trial::new(config)?.run())
}

/// Checks the movement rules; on violation returns the fault and the first
/// offending agent.
fn validate_moves(world: &WorldState, targets: &[NodeId]) -> Result<(), (TrialStatus, AgentId)> {
    let maze = world.maze();
    let (start, goal) = (maze.start(), maze.goal());
    let mut used_edges = HashSet::new();
    for (slot, (&from, &to)) in world.positions().iter().zip(targets).enumerate() {
        if from == to {
            continue;
        }
        let agent = AgentId::from_slot(slot);
        if from == goal || !maze.are_adjacent(from, to) {
            return Err((TrialStatus::WallFault, agent));
        }
        // Only nodes unoccupied at the start of the step may be entered.
        if world.is_occupied(to) {
            return Err((TrialStatus::CollisionFault, agent));
        }
        if !used_edges.insert((from.min(to), from.max(to))) {
            return Err((TrialStatus::CollisionFault, agent));
        }
    }
    let mut holder: Vec<Option<usize>> = vec![None; maze.node_count()];
    for (slot, &to) in targets.iter().enumerate() {
        if to == start || to == goal {
            continue;
        }
        if holder[to.index()].replace(slot).is_some() {
            return Err((TrialStatus::CollisionFault, AgentId::from_slot(slot)));
        }
    }
    Ok(())
}

/// Step-boundary invariants. `agents` is given for MAMT trials only; the
/// head, leader-chain and connectivity checks apply to MAMT alone.
pub fn check_invariants(world: &WorldState, agents: Option<&[AgentState]>, head_arrived: bool) -> Vec<Violation> {
    let maze = world.maze();
    let mut out = Vec::new();
    for u in maze.nodes() {
        if u != maze.start() && u != maze.goal() && world.occupants(u).len() > 1 {
            out.push(Violation::MultiOccupancy {
                node: u,
                agents: world.occupants(u).to_vec(),
            });
        }
    }
    let Some(agents) = agents else { return out };

    let active = |a: &AgentState| world.position(a.id) != maze.goal();
    let heads: Vec<AgentId> = agents
        .iter()
        .filter(|a| active(a) && a.is_head())
        .map(|a| a.id)
        .collect();
    let expected = usize::from(!head_arrived);
    if heads.len() != expected {
        out.push(Violation::HeadCount { expected, heads });
    }

    // Leader chains: 0 unknown, 1 on the current walk, 2 known good, 3 bad.
    let n = agents.len();
    let mut mark = vec![0u8; n];
    for start in 0..n {
        if !active(&agents[start]) || mark[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = start;
        let verdict = loop {
            if mark[cur] >= 2 {
                break mark[cur];
            }
            if mark[cur] == 1 {
                break 3;
            }
            mark[cur] = 1;
            walk.push(cur);
            let a = &agents[cur];
            if !active(a) {
                break 2;
            }
            match a.leader {
                None => break 2,
                Some(l) if l.0 == 0 || l.slot() >= n => break 3,
                Some(l) => cur = l.slot(),
            }
        };
        for &w in &walk {
            mark[w] = verdict;
        }
        if verdict == 3 {
            out.push(Violation::LeaderChain {
                agent: AgentId::from_slot(start),
            });
        }
    }

    let components = comm_components(world);
    if components > 1 {
        out.push(Violation::Disconnected { components });
    }
    out
}

/// Number of connected components of the communication graph over all
/// agents, computed on the nodes they occupy: agents sharing a node are
/// always connected, and two occupied nodes are linked when adjacent or
/// joined through an unoccupied common neighbour.
fn comm_components(world: &WorldState) -> usize {
    let maze = world.maze();
    let has_agents = |u: NodeId| !world.occupants(u).is_empty();
    let mut seen = vec![false; maze.node_count()];
    let mut components = 0;
    for root in maze.nodes().filter(|&u| has_agents(u)) {
        if seen[root.index()] {
            continue;
        }
        components += 1;
        seen[root.index()] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in maze.neighbors(u) {
                if has_agents(v) && !seen[v.index()] {
                    seen[v.index()] = true;
                    stack.push(v);
                }
                if world.is_occupied(v) {
                    continue;
                }
                for &w in maze.neighbors(v) {
                    if w != u && has_agents(w) && !seen[w.index()] {
                        seen[w.index()] = true;
                        stack.push(w);
                    }
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::maze_from_edges;

    fn star4() -> Arc<MazeGraph> {
        Arc::new(maze_from_edges(4, &[(0, 1), (0, 2), (2, 3)], 0, 3).unwrap())
    }

    fn path4() -> Arc<MazeGraph> {
        Arc::new(maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap())
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = TrialConfig::new(star4(), 0, StrategyKind::Mamt, SolverKind::Dfs, 0);
        assert_eq!(run_trial(c.clone()).err(), Some(ConfigError::NoAgents));
        c.agents = 1;
        c.step_cap = 0;
        assert_eq!(run_trial(c).err(), Some(ConfigError::ZeroStepCap));
    }

    #[test]
    fn star4_fixture() {
        let r = run_trial(TrialConfig::new(star4(), 2, StrategyKind::Mamt, SolverKind::Dfs, 0)).unwrap();
        assert_eq!(r.status, TrialStatus::Success);
        assert_eq!(r.makespan, Some(6));
        assert_eq!(r.per_agent_fuel, vec![4, 2]);
        assert_eq!(r.head_arrival_step, Some(4));
    }

    #[test]
    fn path4_full_knowledge() {
        let r = run_trial(TrialConfig::new(
            path4(),
            2,
            StrategyKind::FullKnowledge,
            SolverKind::Dfs,
            0,
        ))
        .unwrap();
        assert_eq!(r.status, TrialStatus::Success);
        assert_eq!(r.makespan, Some(5));
        assert_eq!(r.per_agent_fuel, vec![3, 3]);
    }

    #[test]
    fn non_adjacent_move_is_wall_fault() {
        let mut trial = Trial::new(TrialConfig::new(path4(), 2, StrategyKind::Mamt, SolverKind::Dfs, 0)).unwrap();
        let status = trial.step_with(|t| t[0] = NodeId(2));
        assert_eq!(status, Some(TrialStatus::WallFault));
        assert_eq!(trial.step(), Some(TrialStatus::WallFault));
    }

    #[test]
    fn opposite_traversal_is_collision() {
        let m = path4();
        let mut trial = Trial::new(TrialConfig::new(m, 2, StrategyKind::FullKnowledge, SolverKind::Dfs, 0)).unwrap();
        trial.step(); // agent 1 -> node 1
        let status = trial.step_with(|t| {
            t[0] = NodeId(0);
            t[1] = NodeId(1);
        });
        assert_eq!(status, Some(TrialStatus::CollisionFault));
    }

    #[test]
    fn timeout_when_cap_reached() {
        let mut c = TrialConfig::new(path4(), 3, StrategyKind::Mamt, SolverKind::Dfs, 0);
        c.step_cap = 2;
        let r = run_trial(c).unwrap();
        assert_eq!(r.status, TrialStatus::Timeout);
        assert_eq!(r.makespan, None);
        assert_eq!(r.ticks, 2);
    }

    #[test]
    fn healthy_trial_has_no_violations() {
        let mut c = TrialConfig::new(star4(), 3, StrategyKind::Mamt, SolverKind::Dfs, 0);
        c.check_invariants = true;
        let r = run_trial(c).unwrap();
        assert_eq!(r.status, TrialStatus::Success);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
    }

    #[test]
    fn injected_second_head_is_reported() {
        let trial = Trial::new(TrialConfig::new(star4(), 3, StrategyKind::Mamt, SolverKind::Dfs, 0)).unwrap();
        let mut agents = trial.agents().unwrap().to_vec();
        assert!(check_invariants(trial.world(), Some(&agents), false).is_empty());
        agents[2].leader = None;
        let v = check_invariants(trial.world(), Some(&agents), false);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind(), "head_uniqueness");
    }

    #[test]
    fn injected_leader_cycle_is_reported() {
        let trial = Trial::new(TrialConfig::new(star4(), 3, StrategyKind::Mamt, SolverKind::Dfs, 0)).unwrap();
        let mut agents = trial.agents().unwrap().to_vec();
        agents[1].leader = Some(AgentId(3));
        agents[2].leader = Some(AgentId(2));
        let v = check_invariants(trial.world(), Some(&agents), false);
        assert!(v.iter().any(|v| v.kind() == "leader_acyclicity"));
    }

    #[test]
    fn injected_disconnection_is_reported() {
        let m = Arc::new(maze_from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], 0, 5).unwrap());
        let world = WorldState::with_positions(m, vec![NodeId(0), NodeId(4)]);
        let v = check_invariants(&world, None, false);
        assert!(v.is_empty());
        let trial = Trial::new(TrialConfig::new(star4(), 2, StrategyKind::Mamt, SolverKind::Dfs, 0)).unwrap();
        let agents = trial.agents().unwrap();
        let v = check_invariants(&world, Some(agents), false);
        assert!(v.contains(&Violation::Disconnected { components: 2 }));
    }

    #[test]
    fn trace_fuel_matches() {
        let mut c = TrialConfig::new(star4(), 3, StrategyKind::Mamt, SolverKind::Dfs, 0);
        c.trace = true;
        let r = run_trial(c).unwrap();
        let moves = r
            .trace
            .unwrap()
            .iter()
            .filter(|t| t.phase == Phase::Move && t.event == "move")
            .count();
        assert_eq!(moves as u64, r.per_agent_fuel.iter().sum::<u64>());
    }
}
