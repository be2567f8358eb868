//! Per-agent state machine of the leader-switching traversal protocol.
//!
//! One agent, the head, runs a single-agent solver. Every other agent keeps a
//! leader pointer to a nearby agent and moves towards it. When the solver
//! would send the head onto a node another agent is about to occupy, the head
//! stays and hands its role, together with the solver continuation, to that
//! agent. Each agent acts only on its own state, its sensed neighbourhood and
//! the messages received in the last messaging phase.

use std::sync::Arc;

use crate::maze::NodeId;
use crate::solvers::SolverState;
use crate::world::{AgentId, HeadTransfer, Inbox, LocationClass, Message, MessageDraft, WorldState};

/// Deterministic ID choice; the minimum.
pub fn selector(ids: impl IntoIterator<Item = AgentId>) -> AgentId {
    ids.into_iter().min().expect("selector needs a non-empty set")
}

/// What an agent senses about its surroundings at the start of a step.
#[derive(Clone, Debug)]
pub struct LocalView<'a> {
    pub node: NodeId,
    pub location: LocationClass,
    /// Adjacent nodes in the maze's total order.
    pub neighbors: &'a [NodeId],
    /// Occupancy of `neighbors`, index-aligned.
    pub occupied: Vec<bool>,
}

impl<'a> LocalView<'a> {
    pub fn sense(world: &'a WorldState, agent: AgentId) -> Self {
        let node = world.position(agent);
        let neighbors = world.maze().neighbors(node);
        LocalView {
            node,
            location: world.location_class(node),
            neighbors,
            occupied: neighbors.iter().map(|&u| world.is_occupied(u)).collect(),
        }
    }

    /// Whether `u` is an occupied adjacent node. The agent's own node is not
    /// adjacent, so it never counts.
    pub fn is_occupied_neighbor(&self, u: NodeId) -> bool {
        self.neighbors
            .iter()
            .zip(&self.occupied)
            .any(|(&v, &occ)| v == u && occ)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub position: NodeId,
    /// `None` iff this agent is the head.
    pub leader: Option<AgentId>,
    pub prev_leader: Option<AgentId>,
    /// Node chosen in the last decision phase.
    pub target: NodeId,
    /// Node towards the leader as of the last decision phase.
    pub leader_target: Option<NodeId>,
    /// Solver continuation; held by the head only.
    pub solver: Option<SolverState>,
    pub fuel: u64,
    /// Messages from the last messaging phase. Carries the leader pointers
    /// and location classes of the current communication neighbours.
    pub inbox: Arc<Inbox>,
}

/// Outcome of the decision phase for one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub move_to: NodeId,
    pub leader: Option<AgentId>,
    pub leader_target: Option<NodeId>,
    pub solver: Option<SolverState>,
    /// Head role handed to this agent, with the encoded solver continuation.
    pub transfer: Option<HeadTransfer>,
}

/// What changed in the post-move update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateEvent {
    Unchanged,
    /// Leader out of range; re-pointed to the agent now towards the old one.
    Healed {
        from: AgentId,
        to: AgentId,
    },
    /// Leader out of range and nobody to re-point to; retried next step.
    HealDeferred {
        leader: AgentId,
    },
    BecameHead,
}

impl AgentState {
    /// Initial protocol state for an agent at the start node, given the
    /// messages of the initial messaging round. The caller follows up with a
    /// second round announcing the chosen leaders.
    pub fn initialize(id: AgentId, position: NodeId, inbox: Arc<Inbox>, solver: SolverState) -> Self {
        let head = selector(inbox.messages().iter().map(|m| m.sender).chain([id]));
        let leader = (head != id).then_some(head);
        AgentState {
            id,
            position,
            leader,
            prev_leader: leader,
            target: position,
            leader_target: None,
            solver: leader.is_none().then_some(solver),
            fuel: 0,
            inbox,
        }
    }

    pub fn is_head(&self) -> bool {
        self.leader.is_none()
    }

    fn message_from(&self, a: AgentId) -> Option<&Message> {
        if a == self.id {
            return None;
        }
        self.inbox.get(a)
    }

    pub fn in_range(&self, a: AgentId) -> bool {
        self.message_from(a).is_some()
    }

    /// Arrival node of `a`'s last message, if `a` is in range.
    pub fn node_towards(&self, a: AgentId) -> Option<NodeId> {
        self.message_from(a).map(|m| m.arrival_node)
    }

    fn location_of(&self, a: AgentId, view: &LocalView) -> Option<LocationClass> {
        if a == self.id {
            Some(view.location)
        } else {
            self.message_from(a).map(|m| m.location_class)
        }
    }

    /// Neighbours that compete for entry into `targets`: every `a` in range
    /// with `(v_{L_a} != s or v_a != s) and (a != L or NodeTowards(a) = v)
    /// and NodeTowards(a) in targets and v_a != g`.
    ///
    /// A leader that is out of range cannot be at the start node when `a` is
    /// there (it would be co-located with `a`, hence in range), so an unknown
    /// leader location counts as "not at start". So does a missing leader.
    pub fn competing_agents(&self, view: &LocalView, targets: &[NodeId]) -> Vec<AgentId> {
        self.inbox
            .messages()
            .iter()
            .enumerate()
            .filter(|&(i, m)| {
                let a = m.sender;
                if a == self.id || m.location_class == LocationClass::AtGoal || !targets.contains(&m.arrival_node) {
                    return false;
                }
                if Some(a) == self.leader && m.arrival_node != view.node {
                    return false;
                }
                let leader_class = if m.leader_of_sender == Some(self.id) {
                    Some(view.location)
                } else {
                    self.inbox.leader_class(i)
                };
                !(m.location_class == LocationClass::AtStart && leader_class == Some(LocationClass::AtStart))
            })
            .map(|(_, m)| m.sender)
            .collect()
    }

    /// Keeps `leader` unless a competitor with a smaller id heads for the
    /// same node, in which case that competitor becomes the new leader.
    pub fn resolve_leader_conflict(&self, view: &LocalView, leader: AgentId) -> AgentId {
        let mut targets = vec![view.node];
        if let Some(towards) = self.node_towards(leader) {
            targets.push(towards);
        }
        let chosen = selector(self.competing_agents(view, &targets).into_iter().chain([self.id]));
        if chosen == self.id {
            leader
        } else {
            chosen
        }
    }

    /// Decision phase.
    pub fn decide(&self, view: &LocalView) -> Decision {
        debug_assert_ne!(view.location, LocationClass::AtGoal);
        let here = view.node;
        match self.leader {
            None => {
                let solver = self.solver.as_ref().expect("head carries the solver");
                let (proposed, continuation) = solver.next(here, view.neighbors);
                let contenders = self.competing_agents(view, &[proposed]);
                if contenders.is_empty() {
                    Decision {
                        move_to: proposed,
                        leader: None,
                        leader_target: None,
                        solver: Some(continuation),
                        transfer: None,
                    }
                } else {
                    let successor = selector(contenders);
                    Decision {
                        move_to: here,
                        leader: Some(successor),
                        leader_target: Some(proposed),
                        solver: None,
                        transfer: Some(HeadTransfer {
                            to: successor,
                            solver: Arc::from(continuation.encode()),
                        }),
                    }
                }
            }
            Some(previous) => {
                let leader = self.resolve_leader_conflict(view, previous);
                let towards = self.node_towards(leader);
                let leader_at_goal = self.location_of(leader, view) == Some(LocationClass::AtGoal);
                let move_to = match towards {
                    Some(d) if leader == previous && (leader_at_goal || !view.is_occupied_neighbor(d)) => d,
                    _ => here,
                };
                Decision {
                    move_to,
                    leader: Some(leader),
                    leader_target: towards,
                    solver: None,
                    transfer: None,
                }
            }
        }
    }

    /// Records a decision; returns the head-transfer record to broadcast.
    pub fn apply_decision(&mut self, decision: Decision) -> Option<HeadTransfer> {
        self.prev_leader = self.leader;
        self.leader = decision.leader;
        self.target = decision.move_to;
        self.leader_target = decision.leader_target;
        self.solver = decision.solver;
        decision.transfer
    }

    /// Message broadcast in the messaging phase.
    pub fn draft(&self, location_class: LocationClass, payload: Option<HeadTransfer>) -> MessageDraft {
        MessageDraft {
            sender: self.id,
            location_class,
            leader_of_sender: self.leader,
            payload,
        }
    }

    /// Sensing results after movement: leader healing, then head transfer.
    pub fn post_move_update(&mut self, inbox: Arc<Inbox>) -> UpdateEvent {
        self.inbox = inbox;
        let mut event = UpdateEvent::Unchanged;
        if let Some(leader) = self.leader {
            if !self.in_range(leader) {
                let candidates = self
                    .inbox
                    .received_by(self.id)
                    .filter(|m| Some(m.arrival_node) == self.leader_target)
                    .map(|m| m.sender);
                match candidates.min() {
                    Some(to) => {
                        self.leader = Some(to);
                        event = UpdateEvent::Healed { from: leader, to };
                    }
                    None => event = UpdateEvent::HealDeferred { leader },
                }
            }
        }
        let handover = self
            .inbox
            .messages()
            .iter()
            .filter_map(|m| m.payload.as_ref())
            .find(|p| p.to == self.id);
        if let Some(transfer) = handover {
            let solver = SolverState::decode(&transfer.solver).expect("head transfer payload decodes");
            self.leader = None;
            self.solver = Some(solver);
            event = UpdateEvent::BecameHead;
        }
        event
    }
}
