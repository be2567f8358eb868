//! Per-step ground truth: agent positions, node occupancy, the situated
//! communication graph and message delivery.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::maze::{MazeGraph, NodeId};

/// Agent identifier. Trials number agents `1..=n`; slot index is `id - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn from_slot(slot: usize) -> Self {
        AgentId(slot as u32 + 1)
    }

    #[inline]
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Occupied,
    Unoccupied,
}

/// What an agent can tell about its own node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocationClass {
    AtStart,
    AtGoal,
    Interior,
}

/// Opaque head-transfer record: the addressee plus the encoded solver
/// continuation.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadTransfer {
    pub to: AgentId,
    pub solver: Arc<[u8]>,
}

/// Broadcast content before the channel stamps the arrival node.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageDraft {
    pub sender: AgentId,
    pub location_class: LocationClass,
    pub leader_of_sender: Option<AgentId>,
    pub payload: Option<HeadTransfer>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub sender: AgentId,
    pub location_class: LocationClass,
    pub leader_of_sender: Option<AgentId>,
    /// Node the message reached the receiver from: its own node or an adjacent one.
    pub arrival_node: NodeId,
    pub payload: Option<HeadTransfer>,
}

/// Messages heard on one node in a messaging phase, ascending sender id.
///
/// Every agent on a node hears the same broadcasts, so one inbox serves all
/// of them. It includes their own messages; readers skip their own id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Inbox {
    messages: Vec<Message>,
    /// Location class of each sender's leader, when that leader was heard too.
    leader_class: Vec<Option<LocationClass>>,
}

impl Inbox {
    pub fn new(mut messages: Vec<Message>) -> Self {
        messages.sort_unstable_by_key(|m| m.sender);
        let find = |a: AgentId| messages.binary_search_by_key(&a, |m| m.sender).ok();
        let leader_class = messages
            .iter()
            .map(|m| m.leader_of_sender.and_then(find).map(|i| messages[i].location_class))
            .collect();
        Inbox { messages, leader_class }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// Messages as received by `agent`, i.e. without its own.
    pub fn received_by(&self, agent: AgentId) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.sender != agent)
    }

    pub fn get(&self, sender: AgentId) -> Option<&Message> {
        self.find(sender).map(|i| &self.messages[i])
    }

    pub fn find(&self, sender: AgentId) -> Option<usize> {
        self.messages.binary_search_by_key(&sender, |m| m.sender).ok()
    }

    /// Location class of the leader of the sender of `messages()[index]`.
    pub fn leader_class(&self, index: usize) -> Option<LocationClass> {
        self.leader_class[index]
    }
}

#[derive(Clone, Debug)]
pub struct WorldState {
    maze: Arc<MazeGraph>,
    pub tick: u64,
    positions: Vec<NodeId>,
    occupants: Vec<Vec<AgentId>>,
}

impl WorldState {
    /// All `agents` agents on the start node at tick 0.
    pub fn new(maze: Arc<MazeGraph>, agents: usize) -> Self {
        let positions = vec![maze.start(); agents];
        Self::with_positions(maze, positions)
    }

    pub fn with_positions(maze: Arc<MazeGraph>, positions: Vec<NodeId>) -> Self {
        let mut world = WorldState {
            occupants: vec![Vec::new(); maze.node_count()],
            maze,
            tick: 0,
            positions,
        };
        world.rebuild_occupancy();
        world
    }

    fn rebuild_occupancy(&mut self) {
        for list in &mut self.occupants {
            list.clear();
        }
        for (slot, p) in self.positions.iter().enumerate() {
            self.occupants[p.index()].push(AgentId::from_slot(slot));
        }
    }

    pub fn maze(&self) -> &MazeGraph {
        &self.maze
    }

    pub fn maze_arc(&self) -> &Arc<MazeGraph> {
        &self.maze
    }

    pub fn agent_count(&self) -> usize {
        self.positions.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.positions.len()).map(AgentId::from_slot)
    }

    pub fn positions(&self) -> &[NodeId] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, agent: AgentId) -> NodeId {
        self.positions[agent.slot()]
    }

    pub fn at_goal(&self, agent: AgentId) -> bool {
        self.position(agent) == self.maze.goal()
    }

    pub fn all_at_goal(&self) -> bool {
        let goal = self.maze.goal();
        self.positions.iter().all(|&p| p == goal)
    }

    /// Agents on `u`, ascending id.
    pub fn occupants(&self, u: NodeId) -> &[AgentId] {
        &self.occupants[u.index()]
    }

    /// Replaces every position at once; the engine's only mutation path.
    pub fn set_positions(&mut self, positions: Vec<NodeId>) {
        assert_eq!(positions.len(), self.positions.len());
        self.positions = positions;
        self.rebuild_occupancy();
    }

    pub fn location_class(&self, u: NodeId) -> LocationClass {
        if u == self.maze.goal() {
            LocationClass::AtGoal
        } else if u == self.maze.start() {
            LocationClass::AtStart
        } else {
            LocationClass::Interior
        }
    }

    /// The goal is never occupied; any other node is occupied iff an agent
    /// stands on it.
    #[inline]
    pub fn node_status(&self, u: NodeId) -> NodeStatus {
        if u != self.maze.goal() && !self.occupants[u.index()].is_empty() {
            NodeStatus::Occupied
        } else {
            NodeStatus::Unoccupied
        }
    }

    #[inline]
    pub fn is_occupied(&self, u: NodeId) -> bool {
        self.node_status(u) == NodeStatus::Occupied
    }

    /// Calls `f(j, arrival_node)` for every agent in communication range of
    /// node `here`, including the agents on `here` itself, in no particular
    /// order.
    fn for_each_in_range(&self, here: NodeId, mut f: impl FnMut(AgentId, NodeId)) {
        for &j in self.occupants(here) {
            f(j, here);
        }
        for &u in self.maze.neighbors(here) {
            for &j in self.occupants(u) {
                f(j, u);
            }
            if self.is_occupied(u) {
                continue;
            }
            // On a tree each distance-2 node is reached through exactly one u.
            for &w in self.maze.neighbors(u) {
                if w != here {
                    for &j in self.occupants(w) {
                        f(j, u);
                    }
                }
            }
        }
    }

    /// Agents sharing a node, an edge, or an unoccupied common neighbour
    /// with `agent`, ascending id.
    pub fn comm_neighbors(&self, agent: AgentId) -> Vec<AgentId> {
        let mut out = Vec::new();
        self.for_each_in_range(self.position(agent), |j, _| {
            if j != agent {
                out.push(j);
            }
        });
        out.sort_unstable();
        out
    }

    /// Node through which a message from `from` reaches `to`.
    pub fn node_towards(&self, to: AgentId, from: AgentId) -> Option<NodeId> {
        let (vi, vj) = (self.position(to), self.position(from));
        if vi == vj || self.maze.are_adjacent(vi, vj) {
            return Some(vj);
        }
        let mut shared = self
            .maze
            .neighbors(vi)
            .iter()
            .filter(|&&u| !self.is_occupied(u) && self.maze.are_adjacent(u, vj));
        let first = shared.next().copied();
        debug_assert!(shared.next().is_none(), "two shared neighbours imply a cycle");
        first
    }

    /// Delivers every draft to every communication neighbour of its sender.
    /// `drafts[slot]` is `None` for silent agents. Inboxes are built only
    /// for slots with `receiving[slot]` (others get an empty one) and are
    /// shared between agents on the same node.
    pub fn deliver_messages(&self, drafts: &[Option<MessageDraft>], receiving: &[bool]) -> Vec<Arc<Inbox>> {
        assert_eq!(drafts.len(), self.positions.len());
        let empty = Arc::new(Inbox::default());
        let mut by_node: Vec<Option<Arc<Inbox>>> = vec![None; self.maze.node_count()];
        let mut inboxes = Vec::with_capacity(self.positions.len());
        for receiver in self.agents() {
            if !receiving[receiver.slot()] {
                inboxes.push(empty.clone());
                continue;
            }
            let here = self.position(receiver);
            let inbox = by_node[here.index()].get_or_insert_with(|| {
                let mut messages = Vec::new();
                self.for_each_in_range(here, |j, arrival_node| {
                    if let Some(d) = &drafts[j.slot()] {
                        messages.push(Message {
                            sender: d.sender,
                            location_class: d.location_class,
                            leader_of_sender: d.leader_of_sender,
                            arrival_node,
                            payload: d.payload.clone(),
                        });
                    }
                });
                Arc::new(Inbox::new(messages))
            });
            inboxes.push(inbox.clone());
        }
        inboxes
    }
}
