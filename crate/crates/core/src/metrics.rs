//! Per-trial metrics, CSV rows and batch aggregation.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::engine::{TrialResult, TrialStatus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialMetrics {
    pub makespan: u64,
    pub avg_fuel: f64,
}

/// Makespan and mean per-agent fuel of a successful trial; `None` otherwise.
pub fn compute_metrics(result: &TrialResult) -> Option<TrialMetrics> {
    if result.status != TrialStatus::Success {
        return None;
    }
    let total: u64 = result.per_agent_fuel.iter().sum();
    Some(TrialMetrics {
        makespan: result.makespan?,
        avg_fuel: total as f64 / result.per_agent_fuel.len() as f64,
    })
}

/// One line of the metrics CSV. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub maze_w: usize,
    pub maze_h: usize,
    pub maze_seed: u64,
    pub n: usize,
    pub strategy: String,
    pub solver: String,
    pub trial_seed: u64,
    pub status: String,
    pub makespan: Option<u64>,
    pub avg_fuel: Option<f64>,
    pub head_arrival: Option<u64>,
    pub optimal_d: u32,
}

pub fn write_csv<W: Write>(out: W, rows: &[TrialRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "maze_w",
            "maze_h",
            "maze_seed",
            "n",
            "strategy",
            "solver",
            "trial_seed",
            "status",
            "makespan",
            "avg_fuel",
            "head_arrival",
            "optimal_d",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<TrialRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub maze_w: usize,
    pub maze_h: usize,
    pub n: usize,
    pub strategy: String,
    pub solver: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Quartiles> {
        if values.is_empty() {
            return None;
        }
        let mut data = Data::new(values.to_vec());
        Some(Quartiles {
            q1: data.lower_quartile(),
            median: data.median(),
            q3: data.upper_quartile(),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchSummary {
    pub key: GroupKey,
    pub trials: usize,
    pub successes: usize,
    pub timeouts: usize,
    pub faults: usize,
    /// Over successful trials only.
    pub makespan: Option<Quartiles>,
    pub avg_fuel: Option<Quartiles>,
    /// Median shortest start-goal distance over the group's mazes.
    pub optimal_d: f64,
}

/// Groups rows by (maze size, n, strategy, solver) in key order.
pub fn aggregate(rows: &[TrialRow]) -> Vec<BatchSummary> {
    let mut groups: BTreeMap<GroupKey, Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        let key = GroupKey {
            maze_w: r.maze_w,
            maze_h: r.maze_h,
            n: r.n,
            strategy: r.strategy.clone(),
            solver: r.solver.clone(),
        };
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let count = |s: &str| rows.iter().filter(|r| r.status == s).count();
            let makespans: Vec<f64> = rows.iter().filter_map(|r| r.makespan.map(|m| m as f64)).collect();
            let fuels: Vec<f64> = rows.iter().filter_map(|r| r.avg_fuel).collect();
            let optimal: Vec<f64> = rows.iter().map(|r| r.optimal_d as f64).collect();
            BatchSummary {
                key,
                trials: rows.len(),
                successes: count(TrialStatus::Success.name()),
                timeouts: count(TrialStatus::Timeout.name()),
                faults: count(TrialStatus::CollisionFault.name()) + count(TrialStatus::WallFault.name()),
                makespan: Quartiles::of(&makespans),
                avg_fuel: Quartiles::of(&fuels),
                optimal_d: Quartiles::of(&optimal).map_or(0.0, |q| q.median),
            }
        })
        .collect()
}

/// Relative reduction from `before` to `after`, e.g. 0.85 for a drop from
/// 100 to 15.
pub fn reduction(before: f64, after: f64) -> f64 {
    1.0 - after / before
}
