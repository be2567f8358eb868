//! Tree mazes: representation, generators, unique-path queries and the
//! maze file format.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index into a maze's node table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Optional spatial embedding of a maze.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// `width x height` grid; node id = row * width + column.
    Grid { width: usize, height: usize },
    /// Free-standing points, one per node. Screen convention: y grows downward.
    Points(Vec<(f64, f64)>),
}

#[derive(Debug, Error, PartialEq)]
pub enum MazeError {
    #[error("invalid grid dimensions {width}x{height}: need at least two cells")]
    InvalidDimensions { width: usize, height: usize },
    #[error("a maze needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("could not place {count} separated nodes in a {width}x{height} region")]
    PlacementFailed { count: usize, width: f64, height: f64 },
    #[error("{field}: node {node} out of range (node count {count})")]
    NodeOutOfRange {
        field: &'static str,
        node: u32,
        count: usize,
    },
    #[error("edges: self loop on node {0}")]
    SelfLoop(u32),
    #[error("edges: duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("edges: a tree on {nodes} nodes has {expected} edges, found {found} (cycle or disconnection)")]
    EdgeCount {
        nodes: usize,
        expected: usize,
        found: usize,
    },
    #[error("edges: graph is disconnected (node {0} unreachable from start)")]
    Disconnected(u32),
    #[error("start and goal must differ (both {0})")]
    StartEqualsGoal(u32),
    #[error("grid: {width}x{height} does not match node count {nodes}")]
    GridMismatch { width: usize, height: usize, nodes: usize },
    #[error("edges: {0}-{1} are not neighbouring grid cells")]
    NonGridEdge(u32, u32),
    #[error("coords: expected {expected} entries, found {found}")]
    CoordCount { expected: usize, found: usize },
    #[error("version: unsupported maze file version {0}")]
    Version(u32),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

/// Immutable tree maze with a fixed total order on every adjacency list.
#[derive(Clone, Debug, PartialEq)]
pub struct MazeGraph {
    adjacency: Vec<Vec<NodeId>>,
    start: NodeId,
    goal: NodeId,
    layout: Option<Layout>,
}

impl MazeGraph {
    /// Builds and validates a maze. Adjacency order is derived from the layout:
    /// compass order N, E, S, W for grids; ascending angle from the positive
    /// x-axis (ties by id) for point layouts; ascending id otherwise.
    pub fn new(
        node_count: usize,
        edges: &[(NodeId, NodeId)],
        start: NodeId,
        goal: NodeId,
        layout: Option<Layout>,
    ) -> Result<Self, MazeError> {
        if node_count < 2 {
            return Err(MazeError::TooFewNodes(node_count));
        }
        let check = |field, node: NodeId| {
            if node.index() < node_count {
                Ok(())
            } else {
                Err(MazeError::NodeOutOfRange {
                    field,
                    node: node.0,
                    count: node_count,
                })
            }
        };
        check("start", start)?;
        check("goal", goal)?;
        if start == goal {
            return Err(MazeError::StartEqualsGoal(start.0));
        }
        match &layout {
            Some(Layout::Grid { width, height }) if width * height != node_count => {
                return Err(MazeError::GridMismatch {
                    width: *width,
                    height: *height,
                    nodes: node_count,
                });
            }
            Some(Layout::Points(points)) if points.len() != node_count => {
                return Err(MazeError::CoordCount {
                    expected: node_count,
                    found: points.len(),
                });
            }
            _ => {}
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            check("edges", u)?;
            check("edges", v)?;
            if u == v {
                return Err(MazeError::SelfLoop(u.0));
            }
            if adjacency[u.index()].contains(&v) {
                return Err(MazeError::DuplicateEdge(u.0.min(v.0), u.0.max(v.0)));
            }
            if let Some(Layout::Grid { width, .. }) = &layout {
                let (a, b) = (u.index(), v.index());
                let (ra, ca, rb, cb) = (a / width, a % width, b / width, b % width);
                if ra.abs_diff(rb) + ca.abs_diff(cb) != 1 {
                    return Err(MazeError::NonGridEdge(u.0, v.0));
                }
            }
            adjacency[u.index()].push(v);
            adjacency[v.index()].push(u);
        }
        if edges.len() != node_count - 1 {
            return Err(MazeError::EdgeCount {
                nodes: node_count,
                expected: node_count - 1,
                found: edges.len(),
            });
        }

        let mut maze = MazeGraph {
            adjacency,
            start,
            goal,
            layout,
        };
        if let Some(unreached) = maze.distances_from(start).iter().position(|d| d.is_none()) {
            return Err(MazeError::Disconnected(unreached as u32));
        }
        maze.order_adjacency();
        Ok(maze)
    }

    fn order_adjacency(&mut self) {
        let layout = self.layout.clone();
        for (u, list) in self.adjacency.iter_mut().enumerate() {
            match &layout {
                Some(Layout::Grid { width, .. }) => {
                    let w = *width;
                    // North, East, South, West relative to u.
                    let rank = |v: &NodeId| {
                        let v = v.index();
                        if v + w == u {
                            0
                        } else if v == u + 1 {
                            1
                        } else if v == u + w {
                            2
                        } else {
                            3
                        }
                    };
                    list.sort_by_key(rank);
                }
                Some(Layout::Points(points)) => {
                    let (ux, uy) = points[u];
                    let angle = |v: &NodeId| {
                        let (vx, vy) = points[v.index()];
                        let a = (vy - uy).atan2(vx - ux);
                        if a < 0.0 {
                            a + std::f64::consts::TAU
                        } else {
                            a
                        }
                    };
                    list.sort_by(|a, b| angle(a).total_cmp(&angle(b)).then(a.cmp(b)));
                }
                None => list.sort(),
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn goal(&self) -> NodeId {
        self.goal
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    /// Neighbours of `u` in the maze's total order.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u.index()]
    }

    #[inline]
    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.index()].contains(&v)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// Each undirected edge once, as (smaller, larger), sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<_> = self
            .nodes()
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        out.sort();
        out
    }

    /// Hop distances from `from`; `None` for unreachable nodes.
    pub fn distances_from(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap();
            for &v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// For every node, the next hop on the unique path towards `target`
    /// (`target` maps to itself).
    pub fn next_hops_towards(&self, target: NodeId) -> Vec<NodeId> {
        let mut next = vec![target; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        seen[target.index()] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    next[v.index()] = u;
                    queue.push_back(v);
                }
            }
        }
        next
    }

    /// The unique simple path from `from` to `to`, both endpoints included.
    pub fn tree_path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let mut parent: Vec<Option<NodeId>> = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        seen[to.index()] = true;
        let mut queue = VecDeque::from([to]);
        while let Some(u) = queue.pop_front() {
            if u == from {
                break;
            }
            for &v in self.neighbors(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    parent[v.index()] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![from];
        let mut cur = from;
        while let Some(p) = parent[cur.index()] {
            path.push(p);
            cur = p;
        }
        path
    }

    /// Length of the start-goal path in edges.
    pub fn optimal_distance(&self) -> u32 {
        self.distances_from(self.start)[self.goal.index()].expect("maze is connected")
    }

    pub fn grid_dimensions(&self) -> Option<(usize, usize)> {
        match self.layout {
            Some(Layout::Grid { width, height }) => Some((width, height)),
            _ => None,
        }
    }

    /// Planar position of a node, if the maze has a layout.
    pub fn position(&self, u: NodeId) -> Option<(f64, f64)> {
        match &self.layout {
            Some(Layout::Grid { width, .. }) => Some(((u.index() % width) as f64, (u.index() / width) as f64)),
            Some(Layout::Points(points)) => Some(points[u.index()]),
            None => None,
        }
    }
}

/// Randomized Prim over the cells of a `width x height` grid. Start and goal
/// are a uniformly drawn pair of distinct cells.
pub fn generate_grid_maze(width: usize, height: usize, seed: u64) -> Result<MazeGraph, MazeError> {
    if width == 0 || height == 0 || width * height < 2 {
        return Err(MazeError::InvalidDimensions { width, height });
    }
    let n = width * height;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell_neighbors = |c: usize| {
        let (r, col) = (c / width, c % width);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(c - width);
        }
        if col + 1 < width {
            out.push(c + 1);
        }
        if r + 1 < height {
            out.push(c + width);
        }
        if col > 0 {
            out.push(c - 1);
        }
        out
    };

    let mut visited = vec![false; n];
    let first = rng.gen_range(0..n);
    visited[first] = true;
    let mut frontier: Vec<(usize, usize)> = cell_neighbors(first).into_iter().map(|v| (first, v)).collect();
    let mut edges = Vec::with_capacity(n - 1);
    while !frontier.is_empty() {
        let (from, to) = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if visited[to] {
            continue;
        }
        visited[to] = true;
        edges.push((NodeId(from as u32), NodeId(to as u32)));
        frontier.extend(cell_neighbors(to).into_iter().filter(|&v| !visited[v]).map(|v| (to, v)));
    }

    let start = rng.gen_range(0..n);
    let mut goal = rng.gen_range(0..n - 1);
    if goal >= start {
        goal += 1;
    }
    MazeGraph::new(
        n,
        &edges,
        NodeId(start as u32),
        NodeId(goal as u32),
        Some(Layout::Grid { width, height }),
    )
}

const PLACEMENT_RETRIES: usize = 10_000;

/// Random non-overlapping points joined by their Euclidean minimum spanning
/// tree. Start is the node nearest the upper-left corner, goal the node
/// nearest the lower-right corner.
pub fn generate_geometric_maze(node_count: usize, seed: u64, region: (f64, f64)) -> Result<MazeGraph, MazeError> {
    if node_count < 2 {
        return Err(MazeError::TooFewNodes(node_count));
    }
    let (w, h) = region;
    let min_sep = 0.05 * (w * w + h * h).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(node_count);
    while points.len() < node_count {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRIES {
            let p = (rng.gen::<f64>() * w, rng.gen::<f64>() * h);
            if points.iter().all(|q| dist(p, *q) >= min_sep) {
                points.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(MazeError::PlacementFailed {
                count: node_count,
                width: w,
                height: h,
            });
        }
    }

    let edges = euclidean_mst(&points);
    let nearest = |corner: (f64, f64), skip: Option<usize>| {
        (0..node_count)
            .filter(|&i| Some(i) != skip)
            .min_by(|&a, &b| dist(points[a], corner).total_cmp(&dist(points[b], corner)))
            .unwrap()
    };
    let start = nearest((0.0, 0.0), None);
    let goal = nearest((w, h), Some(start));
    MazeGraph::new(
        node_count,
        &edges,
        NodeId(start as u32),
        NodeId(goal as u32),
        Some(Layout::Points(points)),
    )
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Prim's algorithm on the complete Euclidean graph, O(n^2).
pub(crate) fn euclidean_mst(points: &[(f64, f64)]) -> Vec<(NodeId, NodeId)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    in_tree[0] = true;
    for v in 1..n {
        best[v] = (dist(points[0], points[v]), 0);
    }
    for _ in 1..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(a.cmp(&b)))
            .unwrap();
        in_tree[v] = true;
        edges.push((NodeId(best[v].1 as u32), NodeId(v as u32)));
        for u in 0..n {
            if !in_tree[u] {
                let d = dist(points[v], points[u]);
                if d < best[u].0 {
                    best[u] = (d, v);
                }
            }
        }
    }
    edges
}

pub const MAZE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MazeFile {
    version: u32,
    nodes: usize,
    start: u32,
    goal: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<[usize; 2]>,
    edges: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
}

/// Renders the maze file (TOML document).
pub fn serialize_maze(maze: &MazeGraph) -> String {
    let (grid, coords) = match &maze.layout {
        Some(Layout::Grid { width, height }) => (Some([*width, *height]), None),
        Some(Layout::Points(points)) => (None, Some(points.iter().map(|&(x, y)| [x, y]).collect())),
        None => (None, None),
    };
    let file = MazeFile {
        version: MAZE_FILE_VERSION,
        nodes: maze.node_count(),
        start: maze.start.0,
        goal: maze.goal.0,
        grid,
        edges: maze.edges().into_iter().map(|(u, v)| [u.0, v.0]).collect(),
        coords,
    };
    toml::to_string(&file).expect("maze file serializes")
}

pub fn parse_maze(text: &str) -> Result<MazeGraph, MazeError> {
    let file: MazeFile = toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        let before = &text[..offset.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let column = offset - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
        MazeError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if file.version != MAZE_FILE_VERSION {
        return Err(MazeError::Version(file.version));
    }
    let layout = match (file.grid, file.coords) {
        (Some([width, height]), _) => Some(Layout::Grid { width, height }),
        (None, Some(coords)) => Some(Layout::Points(coords.into_iter().map(|[x, y]| (x, y)).collect())),
        (None, None) => None,
    };
    let edges: Vec<_> = file.edges.iter().map(|&[u, v]| (NodeId(u), NodeId(v))).collect();
    MazeGraph::new(file.nodes, &edges, NodeId(file.start), NodeId(file.goal), layout)
}

/// Builds a maze from a plain edge list with ascending-id neighbour order.
pub fn maze_from_edges(node_count: usize, edges: &[(u32, u32)], start: u32, goal: u32) -> Result<MazeGraph, MazeError> {
    let edges: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
    MazeGraph::new(node_count, &edges, NodeId(start), NodeId(goal), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_tree(m: &MazeGraph) -> bool {
        m.edge_count() == m.node_count() - 1 && m.distances_from(m.start()).iter().all(Option::is_some)
    }

    fn symmetric(m: &MazeGraph) -> bool {
        m.nodes()
            .all(|u| m.neighbors(u).iter().all(|&v| m.neighbors(v).contains(&u)))
    }

    #[test]
    fn grid_5x5_is_spanning_tree() {
        for seed in 0..20 {
            let m = generate_grid_maze(5, 5, seed).unwrap();
            assert_eq!(m.node_count(), 25);
            assert_eq!(m.edge_count(), 24);
            assert!(is_tree(&m));
            assert!(symmetric(&m));
        }
    }

    #[test]
    fn grid_1x2_is_forced() {
        let m = generate_grid_maze(1, 2, 0).unwrap();
        assert_eq!(m.edges(), vec![(NodeId(0), NodeId(1))]);
        let mut ends = [m.start().0, m.goal().0];
        ends.sort();
        assert_eq!(ends, [0, 1]);
    }

    #[test]
    fn grid_rejects_single_cell() {
        assert!(matches!(
            generate_grid_maze(1, 1, 0),
            Err(MazeError::InvalidDimensions { .. })
        ));
        assert!(generate_grid_maze(0, 5, 0).is_err());
    }

    #[test]
    fn grid_is_deterministic() {
        assert_eq!(
            generate_grid_maze(20, 20, 7).unwrap(),
            generate_grid_maze(20, 20, 7).unwrap()
        );
        assert_ne!(
            generate_grid_maze(20, 20, 7).unwrap(),
            generate_grid_maze(20, 20, 8).unwrap()
        );
    }

    #[test]
    fn grid_adjacency_is_compass_ordered() {
        let m = generate_grid_maze(6, 6, 3).unwrap();
        for u in m.nodes() {
            let ranks: Vec<usize> = m
                .neighbors(u)
                .iter()
                .map(|v| {
                    let (u, v) = (u.index() as i64, v.index() as i64);
                    match v - u {
                        -6 => 0,
                        1 => 1,
                        6 => 2,
                        -1 => 3,
                        d => panic!("non-grid step {d}"),
                    }
                })
                .collect();
            assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn geometric_two_nodes_single_edge() {
        let m = generate_geometric_maze(2, 4, (10.0, 10.0)).unwrap();
        assert_eq!(m.edge_count(), 1);
        assert_ne!(m.start(), m.goal());
    }

    #[test]
    fn geometric_rejects_bad_input() {
        assert_eq!(
            generate_geometric_maze(1, 0, (1.0, 1.0)),
            Err(MazeError::TooFewNodes(1))
        );
        // 5% of the diagonal leaves room for only a few hundred points.
        assert!(matches!(
            generate_geometric_maze(5000, 0, (1.0, 1.0)),
            Err(MazeError::PlacementFailed { .. })
        ));
    }

    #[test]
    fn geometric_corners_and_separation() {
        let m = generate_geometric_maze(12, 3, (100.0, 80.0)).unwrap();
        assert_eq!(m.edge_count(), 11);
        let Some(Layout::Points(points)) = m.layout() else {
            panic!()
        };
        let min_sep = 0.05 * (100.0f64.powi(2) + 80.0f64.powi(2)).sqrt();
        for i in 0..points.len() {
            for j in 0..i {
                assert!(dist(points[i], points[j]) >= min_sep);
            }
        }
        let s = points[m.start().index()];
        assert!(points.iter().all(|&p| dist(p, (0.0, 0.0)) >= dist(s, (0.0, 0.0))));
    }

    #[test]
    fn tree_path_on_path_graph() {
        let m = maze_from_edges(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        assert_eq!(
            m.tree_path(NodeId(0), NodeId(3)),
            vec![NodeId(0), NodeId(1), NodeId(2), NodeId(3)]
        );
        assert_eq!(m.tree_path(NodeId(2), NodeId(2)), vec![NodeId(2)]);
        assert_eq!(m.optimal_distance(), 3);
    }

    #[test]
    fn rejects_cycles_and_disconnection() {
        assert!(matches!(
            maze_from_edges(3, &[(0, 1), (1, 2), (2, 0)], 0, 2),
            Err(MazeError::EdgeCount { .. })
        ));
        assert!(matches!(
            maze_from_edges(4, &[(0, 1), (1, 0), (2, 3)], 0, 2),
            Err(MazeError::DuplicateEdge(0, 1))
        ));
        // right edge count, but a triangle plus an isolated node
        assert!(matches!(
            maze_from_edges(4, &[(0, 1), (1, 2), (2, 0)], 0, 2),
            Err(MazeError::Disconnected(3))
        ));
        assert_eq!(maze_from_edges(2, &[(0, 1)], 1, 1), Err(MazeError::StartEqualsGoal(1)));
    }

    #[test]
    fn file_round_trip() {
        for m in [
            generate_grid_maze(7, 4, 11).unwrap(),
            generate_geometric_maze(15, 2, (3.0, 2.0)).unwrap(),
            maze_from_edges(4, &[(0, 1), (0, 2), (2, 3)], 0, 3).unwrap(),
        ] {
            let text = serialize_maze(&m);
            assert_eq!(parse_maze(&text).unwrap(), m);
        }
    }

    #[test]
    fn parse_reports_problems() {
        let cyclic = "version = 1\nnodes = 3\nstart = 0\ngoal = 2\nedges = [[0, 1], [1, 2], [2, 0]]\n";
        assert!(matches!(parse_maze(cyclic), Err(MazeError::EdgeCount { .. })));
        let same = "version = 1\nnodes = 2\nstart = 1\ngoal = 1\nedges = [[0, 1]]\n";
        assert_eq!(parse_maze(same), Err(MazeError::StartEqualsGoal(1)));
        let broken = "version = 1\nnodes = 2\nstart = 0\ngoal = oops\nedges = [[0, 1]]\n";
        match parse_maze(broken) {
            Err(MazeError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let v2 = "version = 2\nnodes = 2\nstart = 0\ngoal = 1\nedges = [[0, 1]]\n";
        assert_eq!(parse_maze(v2), Err(MazeError::Version(2)));
    }
}
