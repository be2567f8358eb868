//! ASCII and SVG output: maze pictures, replay frames and sweep charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::maze::{MazeGraph, NodeId};
use crate::metrics::BatchSummary;
use crate::trace::{Phase, TraceRecord};
use crate::world::AgentId;

/// Agent positions and leader pointers at the end of one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub tick: u64,
    pub positions: Vec<NodeId>,
    pub leaders: Vec<Option<AgentId>>,
    pub head: Option<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Replay {
    pub frames: Vec<Frame>,
    pub warnings: Vec<String>,
}

/// Rebuilds one frame per completed tick (tick 0 included) from a trace.
pub fn replay_frames(records: &[TraceRecord]) -> Replay {
    let mut replay = Replay::default();
    if records.is_empty() {
        replay.warnings.push("trace is empty; nothing to replay".to_string());
        return replay;
    }
    let mamt = records
        .iter()
        .find(|r| r.phase == Phase::Config)
        .is_none_or(|r| r.event.split_whitespace().any(|kv| kv == "strategy=mamt"));
    let init: Vec<&TraceRecord> = records.iter().filter(|r| r.phase == Phase::Init).collect();
    if init.is_empty() {
        replay.warnings.push("trace has no init records".to_string());
        return replay;
    }
    let n = init.iter().filter_map(|r| r.agent).max().unwrap_or(0) as usize;
    let mut current = Frame {
        tick: 0,
        positions: vec![NodeId(0); n],
        leaders: vec![None; n],
        head: None,
    };
    let set = |frame: &mut Frame, r: &TraceRecord, leader: bool| {
        if let (Some(a), Some(p)) = (r.agent, r.position) {
            let slot = AgentId(a).slot();
            if slot < frame.positions.len() {
                frame.positions[slot] = NodeId(p);
                if leader {
                    frame.leaders[slot] = r.leader.map(AgentId);
                }
            }
        }
    };
    for r in &init {
        set(&mut current, r, true);
    }
    let finish = |frame: &mut Frame| {
        frame.head = if mamt {
            frame.leaders.iter().position(Option::is_none).map(AgentId::from_slot)
        } else {
            None
        };
    };
    finish(&mut current);
    replay.frames.push(current.clone());

    let mut by_tick: BTreeMap<u64, Vec<&TraceRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.tick > 0) {
        by_tick.entry(r.tick).or_default().push(r);
    }
    for (tick, rs) in by_tick {
        if !rs.iter().any(|r| r.phase == Phase::Move) {
            continue;
        }
        current.tick = tick;
        for r in &rs {
            match r.phase {
                Phase::Move => set(&mut current, r, false),
                Phase::Update => set(&mut current, r, true),
                _ => {}
            }
        }
        finish(&mut current);
        replay.frames.push(current.clone());
    }
    replay
}

/// Draws a grid maze with walls `#`, corridors ` `, `S`, `G`, the head `H`
/// and followers `o`. Followers show an arrow towards their leader in the
/// corridor they would leave through. `None` for mazes without a grid.
pub fn ascii_grid(maze: &MazeGraph, frame: Option<&Frame>) -> Option<String> {
    let (w, h) = maze.grid_dimensions()?;
    let (cols, rows) = (2 * w + 1, 2 * h + 1);
    let mut canvas = vec![vec!['#'; cols]; rows];
    let cell = |u: NodeId| (2 * (u.index() / w) + 1, 2 * (u.index() % w) + 1);
    for u in maze.nodes() {
        let (r, c) = cell(u);
        canvas[r][c] = ' ';
    }
    for (u, v) in maze.edges() {
        let ((r1, c1), (r2, c2)) = (cell(u), cell(v));
        canvas[(r1 + r2) / 2][(c1 + c2) / 2] = ' ';
    }
    let mut start_count = 0;
    let mut goal_count = 0;
    if let Some(frame) = frame {
        for (slot, &p) in frame.positions.iter().enumerate() {
            if p == maze.start() {
                start_count += 1;
                continue;
            }
            if p == maze.goal() {
                goal_count += 1;
                continue;
            }
            let (r, c) = cell(p);
            let agent = AgentId::from_slot(slot);
            canvas[r][c] = if frame.head == Some(agent) { 'H' } else { 'o' };
            if let Some(leader) = frame.leaders[slot] {
                let there = frame.positions[leader.slot()];
                if let Some(&next) = maze.tree_path(p, there).get(1) {
                    let (r2, c2) = cell(next);
                    canvas[(r + r2) / 2][(c + c2) / 2] = match (r2.cmp(&r), c2.cmp(&c)) {
                        (std::cmp::Ordering::Less, _) => '^',
                        (std::cmp::Ordering::Greater, _) => 'v',
                        (_, std::cmp::Ordering::Less) => '<',
                        _ => '>',
                    };
                }
            }
        }
    }
    let (r, c) = cell(maze.start());
    canvas[r][c] = 'S';
    let (r, c) = cell(maze.goal());
    canvas[r][c] = 'G';
    let mut out = String::new();
    if let Some(frame) = frame {
        let head = frame.head.map_or("-".to_string(), |a| a.to_string());
        let _ = writeln!(
            out,
            "k={} start={start_count} goal={goal_count} head={head}",
            frame.tick
        );
    }
    for row in canvas {
        out.extend(row);
        out.push('\n');
    }
    Some(out)
}

/// Plain-text frame for mazes without a grid: one line per occupied node.
pub fn text_frame(maze: &MazeGraph, frame: &Frame) -> String {
    let mut by_node: BTreeMap<NodeId, Vec<AgentId>> = BTreeMap::new();
    for (slot, &p) in frame.positions.iter().enumerate() {
        by_node.entry(p).or_default().push(AgentId::from_slot(slot));
    }
    let mut out = format!("k={}\n", frame.tick);
    for (u, agents) in by_node {
        let tag = if u == maze.start() {
            " (s)"
        } else if u == maze.goal() {
            " (g)"
        } else {
            ""
        };
        let ids: Vec<String> = agents
            .iter()
            .map(|a| {
                if frame.head == Some(*a) {
                    format!("{a}*")
                } else {
                    a.to_string()
                }
            })
            .collect();
        let _ = writeln!(out, "  node {u}{tag}: {}", ids.join(" "));
    }
    out
}

fn node_xy(maze: &MazeGraph, u: NodeId) -> (f64, f64) {
    maze.position(u).unwrap_or((u.index() as f64, 0.0))
}

/// One replay frame as SVG: maze edges, start and goal, agents (head
/// highlighted) and leader-pointer arrows.
pub fn svg_frame(maze: &MazeGraph, frame: &Frame) -> String {
    let pts: Vec<(f64, f64)> = maze.nodes().map(|u| node_xy(maze, u)).collect();
    let max_x = pts.iter().map(|p| p.0).fold(1.0, f64::max);
    let max_y = pts.iter().map(|p| p.1).fold(1.0, f64::max);
    let scale = 560.0 / max_x.max(max_y);
    let at = |u: NodeId| {
        let (x, y) = node_xy(maze, u);
        (20.0 + x * scale, 20.0 + y * scale)
    };
    let width = 40.0 + max_x * scale;
    let height = 60.0 + max_y * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#555"/></marker></defs>"##,
    );
    s.push('\n');
    for (u, v) in maze.edges() {
        let ((x1, y1), (x2, y2)) = (at(u), at(v));
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="#ccc" stroke-width="4"/>"##
        );
    }
    for (u, fill) in [(maze.start(), "#d9534f"), (maze.goal(), "#f0ad4e")] {
        let (x, y) = at(u);
        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="9" fill="{fill}"/>"#);
    }
    for (slot, &p) in frame.positions.iter().enumerate() {
        if let Some(leader) = frame.leaders[slot] {
            let q = frame.positions[leader.slot()];
            if p != q && p != maze.start() && p != maze.goal() {
                let ((x1, y1), (x2, y2)) = (at(p), at(q));
                let _ = writeln!(
                    s,
                    r##"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="#555" marker-end="url(#arrow)"/>"##
                );
            }
        }
    }
    for (slot, &p) in frame.positions.iter().enumerate() {
        if p == maze.start() || p == maze.goal() {
            continue;
        }
        let (x, y) = at(p);
        let fill = if frame.head == Some(AgentId::from_slot(slot)) {
            "#7fd67f"
        } else {
            "#2e7d32"
        };
        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="6" fill="{fill}"/>"#);
    }
    let count = |u: NodeId| frame.positions.iter().filter(|&&p| p == u).count();
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.0}">k={}  start={}  goal={}</text>"#,
        height - 15.0,
        frame.tick,
        count(maze.start()),
        count(maze.goal())
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartMetric {
    Makespan,
    AvgFuel,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Line chart of the median metric against n, one series per
/// (maze size, strategy, solver), with interquartile bands. Dashed lines
/// give the optimal-path reference per maze size: d(s, g) for fuel and
/// d(s, g) + 2(n - 1) for makespan.
pub fn svg_chart(summaries: &[BatchSummary], metric: ChartMetric) -> String {
    type SeriesKey = (usize, usize, String, String);
    let mut series: BTreeMap<SeriesKey, Vec<&BatchSummary>> = BTreeMap::new();
    for s in summaries {
        let k = &s.key;
        series
            .entry((k.maze_w, k.maze_h, k.strategy.clone(), k.solver.clone()))
            .or_default()
            .push(s);
    }
    let mut ns: Vec<usize> = summaries.iter().map(|s| s.key.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let quart = |s: &BatchSummary| match metric {
        ChartMetric::Makespan => s.makespan,
        ChartMetric::AvgFuel => s.avg_fuel,
    };
    let reference = |s: &BatchSummary| match metric {
        ChartMetric::Makespan => s.optimal_d + 2.0 * (s.key.n as f64 - 1.0),
        ChartMetric::AvgFuel => s.optimal_d,
    };
    let y_max = summaries
        .iter()
        .flat_map(|s| [quart(s).map_or(0.0, |q| q.q3), reference(s)])
        .fold(1.0, f64::max)
        * 1.05;

    let (left, top, pw, ph) = (70.0, 30.0, 560.0, 320.0);
    let x_of = |n: usize| {
        let i = ns.iter().position(|&m| m == n).unwrap_or(0) as f64;
        left + if ns.len() > 1 {
            i * pw / (ns.len() - 1) as f64
        } else {
            pw / 2.0
        }
    };
    let y_of = |v: f64| top + ph - v / y_max * ph;
    let title = match metric {
        ChartMetric::Makespan => "median makespan",
        ChartMetric::AvgFuel => "median average sum-of-fuel",
    };

    let mut out = String::new();
    let legend_h = 18.0 * series.len() as f64;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="12">"#,
        left + pw + 220.0,
        top + ph + 50.0 + (legend_h - ph).max(0.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{left}" y="18" font-size="14">{title} vs number of agents</text>"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for &n in &ns {
        let x = x_of(n);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#,
            top + ph + 16.0
        );
    }
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.0}</text>"#,
            left - 6.0,
            y + 4.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/>"##,
            left + pw
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n</text>"#,
        left + pw / 2.0,
        top + ph + 34.0
    );

    let mut references_drawn = Vec::new();
    for (i, ((w, h, strategy, solver), rows)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(usize, f64, f64, f64)> = rows
            .iter()
            .filter_map(|s| quart(s).map(|q| (s.key.n, q.q1, q.median, q.q3)))
            .collect();
        if pts.len() > 1 {
            let upper: Vec<String> = pts
                .iter()
                .map(|p| format!("{:.1},{:.1}", x_of(p.0), y_of(p.3)))
                .collect();
            let lower: Vec<String> = pts
                .iter()
                .rev()
                .map(|p| format!("{:.1},{:.1}", x_of(p.0), y_of(p.1)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
        }
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.1},{:.1}", x_of(p.0), y_of(p.2)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for p in &pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                x_of(p.0),
                y_of(p.2)
            );
        }
        if !references_drawn.contains(&(*w, *h)) {
            references_drawn.push((*w, *h));
            let refs: Vec<String> = rows
                .iter()
                .map(|s| format!("{:.1},{:.1}", x_of(s.key.n), y_of(reference(s))))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-dasharray="6,4"/>"#,
                refs.join(" ")
            );
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{w}x{h} {strategy} {solver}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::StrategyKind;
    use crate::engine::{run_trial, TrialConfig};
    use crate::maze::{generate_grid_maze, maze_from_edges};
    use crate::solvers::SolverKind;
    use std::sync::Arc;

    #[test]
    fn star4_replay_has_one_frame_per_tick() {
        let m = Arc::new(maze_from_edges(4, &[(0, 1), (0, 2), (2, 3)], 0, 3).unwrap());
        let mut c = TrialConfig::new(m.clone(), 2, StrategyKind::Mamt, SolverKind::Dfs, 0);
        c.trace = true;
        let r = run_trial(c).unwrap();
        let replay = replay_frames(r.trace.as_ref().unwrap());
        assert_eq!(replay.frames.len(), 7);
        assert!(replay.warnings.is_empty());
        let last = replay.frames.last().unwrap();
        assert!(last.positions.iter().all(|&p| p == m.goal()));
        assert_eq!(replay.frames[0].head, Some(AgentId(1)));
        assert!(text_frame(&m, last).contains("node 3 (g): 1 2"));
    }

    #[test]
    fn empty_trace_warns() {
        let replay = replay_frames(&[]);
        assert!(replay.frames.is_empty());
        assert_eq!(replay.warnings.len(), 1);
    }

    #[test]
    fn ascii_cells_follow_coordinates() {
        let m = generate_grid_maze(4, 3, 7).unwrap();
        let text = ascii_grid(&m, None).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines.iter().all(|l| l.len() == 9));
        let (sr, sc) = (m.start().index() / 4, m.start().index() % 4);
        assert_eq!(lines[2 * sr + 1].as_bytes()[2 * sc + 1], b'S');
        // a spanning tree of 12 cells opens exactly 11 walls
        let open = text.chars().filter(|&c| c == ' ').count();
        assert_eq!(open, 12 - 2 + 11);
    }

    #[test]
    fn svg_outputs_are_well_formed() {
        let m = Arc::new(generate_grid_maze(5, 5, 1).unwrap());
        let mut c = TrialConfig::new(m.clone(), 5, StrategyKind::Mamt, SolverKind::Dfs, 0);
        c.trace = true;
        let r = run_trial(c).unwrap();
        let replay = replay_frames(r.trace.as_ref().unwrap());
        let svg = svg_frame(&m, &replay.frames[3]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(ascii_grid(&m, Some(&replay.frames[3])).unwrap().starts_with("k=3 "));
    }
}
