//! Benchmark grids: deterministic instance generation, a worker pool running
//! every (instance, variant) pair, CSV rows and per-cell aggregates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;
use std::sync::{mpsc, Arc};
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dist::DistCache;
use crate::grid::{GridGraph, GridMap};
use crate::instance::{generate_instance, Scenario};
use crate::maps::{self, MapKind};
use crate::rng;
use crate::solver::{self, LnsLimit, SolverConfig, Variant, DEFAULT_LNS_ITERATIONS};
use crate::validate::validate;

/// First line of every CSV file written by [`write_csv`].
pub const CSV_SCHEMA: &str = "# ctsmapf-bench schema v1";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("map {path}: {msg}")]
    Map { path: PathBuf, msg: String },
    #[error("cannot generate {map} N={agents} M={tasks}: {msg}")]
    Generate { map: String, agents: usize, tasks: usize, msg: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A solver configuration that can appear in a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchVariant {
    Solver(Variant),
    /// v1 without lock release: plain task-aware PIBT.
    Pibt,
    /// v3 with zero LNS budget: the anytime sequence loop alone.
    V3NoLns,
}

impl BenchVariant {
    pub fn name(self) -> &'static str {
        match self {
            BenchVariant::Solver(v) => v.name(),
            BenchVariant::Pibt => "pibt",
            BenchVariant::V3NoLns => "v3-nolns",
        }
    }

    pub fn config(self, time_limit: Duration, lns: LnsLimit, seed: u64, max_sequences: Option<usize>) -> SolverConfig {
        let (variant, lock_release, lns) = match self {
            BenchVariant::Solver(v) => (v, true, lns),
            BenchVariant::Pibt => (Variant::V1, false, lns),
            BenchVariant::V3NoLns => (Variant::V3, true, LnsLimit::Iterations(0)),
        };
        SolverConfig {
            time_limit,
            lns,
            lock_release,
            seed,
            max_sequences,
            ..SolverConfig::new(variant)
        }
    }
}

impl fmt::Display for BenchVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pibt" => Ok(BenchVariant::Pibt),
            "v3-nolns" => Ok(BenchVariant::V3NoLns),
            _ => s
                .parse::<Variant>()
                .map(BenchVariant::Solver)
                .map_err(|_| format!("unknown variant {s:?} (expected v1, v2, v3, pibt or v3-nolns)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSpec {
    Builtin(MapKind),
    File(PathBuf),
}

impl MapSpec {
    pub fn name(&self) -> String {
        match self {
            MapSpec::Builtin(k) => k.name().to_string(),
            MapSpec::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }

    /// Builtin maps are generated from the root seed; files are read and
    /// parsed. Relative paths resolve against `base`.
    pub fn load(&self, root_seed: u64, base: Option<&FsPath>) -> Result<GridMap, BenchError> {
        match self {
            MapSpec::Builtin(k) => {
                Ok(maps::generate(*k, rng::derive_seed(root_seed, rng::purpose::MAP, &[rng::name_key(k.name())])))
            }
            MapSpec::File(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let err = |msg: String| BenchError::Map { path: path.clone(), msg };
                let text = std::fs::read_to_string(&path).map_err(|e| err(e.to_string()))?;
                GridMap::parse(&text).map_err(|e| err(e.to_string()))
            }
        }
    }
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<MapKind>() {
            Ok(k) => MapSpec::Builtin(k),
            Err(_) => MapSpec::File(PathBuf::from(s)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub maps: Vec<MapSpec>,
    pub agent_counts: Vec<usize>,
    pub task_counts: Vec<usize>,
    pub instances: usize,
    pub variants: Vec<BenchVariant>,
    pub time_limit: Duration,
    pub time_limits: BTreeMap<BenchVariant, Duration>,
    pub lns: LnsLimit,
    pub seed: u64,
    pub max_sequences: Option<usize>,
}

impl BenchGrid {
    pub fn new(maps: Vec<MapSpec>, agent_counts: Vec<usize>, task_counts: Vec<usize>, instances: usize) -> Self {
        Self {
            maps,
            agent_counts,
            task_counts,
            instances,
            variants: vec![BenchVariant::Solver(Variant::V1)],
            time_limit: Duration::from_secs(60),
            time_limits: BTreeMap::new(),
            lns: LnsLimit::Iterations(DEFAULT_LNS_ITERATIONS),
            seed: 0,
            max_sequences: None,
        }
    }

    /// Parses `key = value` lines. Lists are comma separated; `#` starts a
    /// comment.
    ///
    /// ```text
    /// maps = maze, room
    /// agents = 5, 10
    /// tasks = 10, 30
    /// instances = 25
    /// variants = v1, pibt
    /// time_limit = 60
    /// time_limit.pibt = 30
    /// lns_iters = 100
    /// seed = 1
    /// ```
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut maps = None;
        let mut agents = None;
        let mut tasks = None;
        let mut instances = None;
        let mut grid = BenchGrid::new(Vec::new(), Vec::new(), Vec::new(), 0);
        let mut lns_set = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |msg: String| BenchError::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected key = value, got {content:?}")))?;
            let list = |value: &str| -> Vec<String> {
                value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            };
            let counts = |value: &str| -> Result<Vec<usize>, BenchError> {
                let items = list(value);
                if items.is_empty() {
                    return Err(bad(format!("{key} needs at least one value")));
                }
                items
                    .iter()
                    .map(|s| match s.parse::<usize>() {
                        Ok(n) if n > 0 => Ok(n),
                        _ => Err(bad(format!("{key}: expected a positive integer, got {s:?}"))),
                    })
                    .collect()
            };
            let seconds = |value: &str| -> Result<Duration, BenchError> {
                match value.parse::<f64>() {
                    Ok(s) if s > 0.0 && s.is_finite() => Ok(Duration::from_secs_f64(s)),
                    _ => Err(bad(format!("{key}: expected positive seconds, got {value:?}"))),
                }
            };
            match key {
                "maps" => {
                    let items = list(value);
                    if items.is_empty() {
                        return Err(bad("maps needs at least one value".into()));
                    }
                    maps = Some(items.iter().map(|s| s.parse().unwrap()).collect());
                }
                "agents" => agents = Some(counts(value)?),
                "tasks" => tasks = Some(counts(value)?),
                "instances" => instances = Some(counts(value)?.into_iter().next().unwrap()),
                "variants" => {
                    let vs = list(value)
                        .iter()
                        .map(|s| s.parse::<BenchVariant>().map_err(&bad))
                        .collect::<Result<Vec<_>, _>>()?;
                    if vs.is_empty() {
                        return Err(bad("variants needs at least one value".into()));
                    }
                    grid.variants = vs;
                }
                "time_limit" => grid.time_limit = seconds(value)?,
                "lns_iters" | "lns_time" => {
                    if lns_set {
                        return Err(bad("lns_iters and lns_time are mutually exclusive".into()));
                    }
                    lns_set = true;
                    grid.lns = if key == "lns_iters" {
                        LnsLimit::Iterations(
                            value.parse().map_err(|_| bad(format!("lns_iters: bad integer {value:?}")))?,
                        )
                    } else {
                        match value.parse::<f64>() {
                            Ok(s) if s >= 0.0 && s.is_finite() => LnsLimit::Seconds(s),
                            _ => return Err(bad(format!("lns_time: bad seconds {value:?}"))),
                        }
                    };
                }
                "seed" => grid.seed = value.parse().map_err(|_| bad(format!("seed: bad integer {value:?}")))?,
                "max_sequences" => {
                    grid.max_sequences = Some(counts(value)?.into_iter().next().unwrap());
                }
                _ => match key.strip_prefix("time_limit.") {
                    Some(v) => {
                        let variant = v.parse::<BenchVariant>().map_err(&bad)?;
                        grid.time_limits.insert(variant, seconds(value)?);
                    }
                    None => return Err(bad(format!("unknown key {key:?}"))),
                },
            }
        }
        grid.maps = maps.ok_or(BenchError::Missing("maps"))?;
        grid.agent_counts = agents.ok_or(BenchError::Missing("agents"))?;
        grid.task_counts = tasks.ok_or(BenchError::Missing("tasks"))?;
        grid.instances = instances.ok_or(BenchError::Missing("instances"))?;
        Ok(grid)
    }

    pub fn time_limit_for(&self, v: BenchVariant) -> Duration {
        self.time_limits.get(&v).copied().unwrap_or(self.time_limit)
    }

    pub fn cells(&self) -> usize {
        self.maps.len() * self.agent_counts.len() * self.task_counts.len()
    }

    pub fn row_count(&self) -> usize {
        self.cells() * self.instances * self.variants.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Solved,
    Failed,
    /// The solver claimed a feasible plan that the validator rejected.
    Invalid,
    Panicked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub map: String,
    pub agents: usize,
    pub tasks: usize,
    pub instance: usize,
    pub instance_seed: u64,
    pub variant: String,
    pub success: bool,
    pub status: RowStatus,
    pub wall_time: f64,
    pub flowtime: Option<usize>,
    pub makespan: Option<usize>,
    pub first_flowtime: Option<usize>,
    pub sequences_tried: usize,
    pub lock_events: usize,
    pub lns_iterations: usize,
}

impl BenchRow {
    /// The row with its wall-time column zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        Self { wall_time: 0.0, ..self.clone() }
    }
}

struct Cell {
    map: String,
    graph: Arc<GridGraph>,
    dist: Arc<DistCache>,
    agents: usize,
    tasks: usize,
    instances: Vec<(u64, Scenario)>,
}

fn build_cells(grid: &BenchGrid, base: Option<&FsPath>) -> Result<Vec<Cell>, BenchError> {
    let mut cells = Vec::new();
    for spec in &grid.maps {
        let name = spec.name();
        let map = spec.load(grid.seed, base)?;
        let graph = Arc::new(GridGraph::new(map));
        let dist = Arc::new(DistCache::new(graph.clone()));
        for &n in &grid.agent_counts {
            for &m in &grid.task_counts {
                let instances = (0..grid.instances)
                    .map(|idx| {
                        let coords = [rng::name_key(&name), n as u64, m as u64, idx as u64];
                        let seed = rng::derive_seed(grid.seed, rng::purpose::GENERATE, &coords);
                        generate_instance(graph.map(), n, m, seed)
                            .map(|s| (seed, s))
                            .map_err(|e| BenchError::Generate { map: name.clone(), agents: n, tasks: m, msg: e.to_string() })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                cells.push(Cell { map: name.clone(), graph: graph.clone(), dist: dist.clone(), agents: n, tasks: m, instances });
            }
        }
    }
    Ok(cells)
}

fn run_one(grid: &BenchGrid, cell: &Cell, idx: usize, variant: BenchVariant) -> BenchRow {
    let (instance_seed, scenario) = &cell.instances[idx];
    let solver_seed = rng::derive_seed(
        grid.seed,
        rng::purpose::BENCH,
        &[rng::name_key(&cell.map), cell.agents as u64, cell.tasks as u64, idx as u64],
    );
    let mut row = BenchRow {
        map: cell.map.clone(),
        agents: cell.agents,
        tasks: cell.tasks,
        instance: idx,
        instance_seed: *instance_seed,
        variant: variant.name().to_string(),
        success: false,
        status: RowStatus::Panicked,
        wall_time: 0.0,
        flowtime: None,
        makespan: None,
        first_flowtime: None,
        sequences_tried: 0,
        lock_events: 0,
        lns_iterations: 0,
    };
    let config = variant.config(grid.time_limit_for(variant), grid.lns, solver_seed, grid.max_sequences);
    let result = catch_unwind(AssertUnwindSafe(|| {
        let res = solver::solve(scenario, &cell.dist, &config);
        let valid = res.best_plan.as_ref().map(|p| validate(p, scenario, &cell.graph).is_ok());
        (res, valid)
    }));
    let Ok((res, valid)) = result else {
        log::warn!("worker panicked on {} N={} M={} #{idx} {variant}", cell.map, cell.agents, cell.tasks);
        return row;
    };
    row.wall_time = res.wall_time;
    row.sequences_tried = res.sequences_tried;
    row.lock_events = res.lock_events;
    row.lns_iterations = res.lns_iterations;
    row.status = match (res.success, valid) {
        (true, Some(true)) => RowStatus::Solved,
        (true, _) => RowStatus::Invalid,
        (false, _) => RowStatus::Failed,
    };
    if row.status == RowStatus::Solved {
        row.success = true;
        row.flowtime = res.flowtime;
        row.makespan = res.makespan;
        row.first_flowtime = res.first_flowtime;
    }
    row
}

/// Runs every (instance, variant) pair of the grid on `workers` threads and
/// hands rows to `sink` in canonical order (map, N, M, instance, variant), so
/// output never depends on scheduling. Relative map paths resolve against
/// `base`.
pub fn run_grid<F: FnMut(&BenchRow) -> Result<(), BenchError>>(
    grid: &BenchGrid,
    workers: usize,
    base: Option<&FsPath>,
    mut sink: F,
) -> Result<Vec<BenchRow>, BenchError> {
    let cells = build_cells(grid, base)?;
    let jobs: Vec<(usize, usize, BenchVariant)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| {
            (0..cell.instances.len()).flat_map(move |i| grid.variants.iter().map(move |&v| (c, i, v)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;

    let (tx, rx) = mpsc::channel::<(usize, BenchRow)>();
    let mut rows = Vec::with_capacity(jobs.len());
    std::thread::scope(|s| -> Result<(), BenchError> {
        let cells = &cells;
        let jobs = &jobs;
        s.spawn(move || {
            pool.install(|| {
                jobs.par_iter().enumerate().for_each_with(tx, |tx, (k, &(c, i, v))| {
                    let _ = tx.send((k, run_one(grid, &cells[c], i, v)));
                });
            });
        });
        let mut pending: HashMap<usize, BenchRow> = HashMap::new();
        for (k, row) in rx {
            pending.insert(k, row);
            while let Some(row) = pending.remove(&rows.len()) {
                sink(&row)?;
                rows.push(row);
            }
        }
        Ok(())
    })?;
    Ok(rows)
}

pub fn csv_writer<W: Write>(mut out: W) -> Result<csv::Writer<W>, BenchError> {
    writeln!(out, "{CSV_SCHEMA}")?;
    Ok(csv::Writer::from_writer(out))
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), BenchError> {
    let mut w = csv_writer(out)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub map: String,
    pub agents: usize,
    pub tasks: usize,
    pub variant: String,
    pub instances: usize,
    pub solved: usize,
    pub success_rate: f64,
    /// Over this variant's solved instances.
    pub mean_runtime: Option<f64>,
    /// Over instances solved by every variant of the cell.
    pub mean_flowtime: Option<f64>,
    pub common: usize,
}

impl fmt::Display for CellSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
        write!(
            f,
            "{} N={} M={} {:<8} success {:>6.2}% ({}/{})  runtime {}s  flowtime {} (common {})",
            self.map,
            self.agents,
            self.tasks,
            self.variant,
            self.success_rate * 100.0,
            self.solved,
            self.instances,
            opt(self.mean_runtime, 3),
            opt(self.mean_flowtime, 2),
            self.common
        )
    }
}

/// Per-cell, per-variant statistics in the order cells first appear.
pub fn aggregate(rows: &[BenchRow]) -> Vec<CellSummary> {
    type Key = (String, usize, usize);
    let mut order: Vec<Key> = Vec::new();
    let mut by_cell: HashMap<Key, Vec<&BenchRow>> = HashMap::new();
    for r in rows {
        let key = (r.map.clone(), r.agents, r.tasks);
        if !by_cell.contains_key(&key) {
            order.push(key.clone());
        }
        by_cell.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for key in order {
        let cell = &by_cell[&key];
        let mut variants: Vec<&str> = Vec::new();
        for r in cell {
            if !variants.contains(&r.variant.as_str()) {
                variants.push(&r.variant);
            }
        }
        let mut instances: Vec<usize> = cell.iter().map(|r| r.instance).collect();
        instances.sort_unstable();
        instances.dedup();
        let common: Vec<usize> = instances
            .iter()
            .copied()
            .filter(|&i| variants.iter().all(|v| cell.iter().any(|r| r.instance == i && r.variant == *v && r.success)))
            .collect();
        for v in variants {
            let mine: Vec<&&BenchRow> = cell.iter().filter(|r| r.variant == v).collect();
            let solved: Vec<&&BenchRow> = mine.iter().copied().filter(|r| r.success).collect();
            let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
            let flows = solved
                .iter()
                .filter(|r| common.contains(&r.instance))
                .filter_map(|r| r.flowtime.map(|f| f as f64))
                .collect();
            out.push(CellSummary {
                map: key.0.clone(),
                agents: key.1,
                tasks: key.2,
                variant: v.to_string(),
                instances: mine.len(),
                solved: solved.len(),
                success_rate: if mine.is_empty() { 0.0 } else { solved.len() as f64 / mine.len() as f64 },
                mean_runtime: mean(solved.iter().map(|r| r.wall_time).collect()),
                mean_flowtime: mean(flows),
                common: common.len(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(map: &str, instance: usize, variant: &str, flow: Option<usize>, wall: f64) -> BenchRow {
        BenchRow {
            map: map.into(),
            agents: 2,
            tasks: 3,
            instance,
            instance_seed: 0,
            variant: variant.into(),
            success: flow.is_some(),
            status: if flow.is_some() { RowStatus::Solved } else { RowStatus::Failed },
            wall_time: wall,
            flowtime: flow,
            makespan: flow,
            first_flowtime: flow,
            sequences_tried: 1,
            lock_events: 0,
            lns_iterations: 0,
        }
    }

    #[test]
    fn parses_a_full_config() {
        let g = BenchGrid::parse(
            "# sparse\nmaps = empty, room, maps/x.map\nagents = 5,10\ntasks = 10\ninstances = 3\n\
             variants = v2, v3, pibt, v3-nolns\ntime_limit = 2.5\ntime_limit.v3 = 10\nlns_time = 0.5\nseed = 9\nmax_sequences = 4\n",
        )
        .unwrap();
        assert_eq!(
            g.maps,
            vec![MapSpec::Builtin(MapKind::Empty), MapSpec::Builtin(MapKind::Room), MapSpec::File("maps/x.map".into())]
        );
        assert_eq!(g.agent_counts, vec![5, 10]);
        assert_eq!(g.instances, 3);
        assert_eq!(g.variants.len(), 4);
        assert_eq!(g.time_limit_for(BenchVariant::Solver(Variant::V3)), Duration::from_secs(10));
        assert_eq!(g.time_limit_for(BenchVariant::Pibt), Duration::from_secs_f64(2.5));
        assert_eq!(g.lns, LnsLimit::Seconds(0.5));
        assert_eq!((g.seed, g.max_sequences), (9, Some(4)));
        assert_eq!(g.row_count(), 3 * 2 * 3 * 4);
        assert_eq!(g.maps[2].name(), "x");
    }

    #[test]
    fn config_errors_name_the_line() {
        let base = "maps = empty\nagents = 1\ntasks = 1\ninstances = 1\n";
        for (extra, line) in [("agents = 0", 5), ("bogus = 1", 5), ("variants = v9", 5), ("time_limit = -1", 5), ("no equals", 5)] {
            match BenchGrid::parse(&format!("{base}{extra}\n")) {
                Err(BenchError::Config { line: l, .. }) => assert_eq!(l, line, "{extra}"),
                other => panic!("{extra}: {other:?}"),
            }
        }
        assert!(matches!(BenchGrid::parse("maps = empty\n"), Err(BenchError::Missing("agents"))));
        assert!(matches!(
            BenchGrid::parse(&format!("{base}lns_iters = 3\nlns_time = 1\n")),
            Err(BenchError::Config { line: 6, .. })
        ));
    }

    #[test]
    fn baseline_variants_map_to_solver_configs() {
        let d = Duration::from_secs(1);
        let p = BenchVariant::Pibt.config(d, LnsLimit::Iterations(5), 3, None);
        assert_eq!((p.variant, p.lock_release), (Variant::V1, false));
        let n = BenchVariant::V3NoLns.config(d, LnsLimit::Iterations(5), 3, None);
        assert_eq!((n.variant, n.lock_release, n.lns), (Variant::V3, true, LnsLimit::Iterations(0)));
        assert_eq!("v3-nolns".parse::<BenchVariant>().unwrap(), BenchVariant::V3NoLns);
        assert_eq!("v2".parse::<BenchVariant>().unwrap(), BenchVariant::Solver(Variant::V2));
    }

    #[test]
    fn aggregates_use_common_instances_for_flowtime() {
        let rows = vec![
            row("m", 0, "a", Some(10), 1.0),
            row("m", 0, "b", Some(8), 3.0),
            row("m", 1, "a", Some(20), 2.0),
            row("m", 1, "b", None, 9.0),
        ];
        let s = aggregate(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].variant.as_str(), s[0].solved, s[0].common), ("a", 2, 1));
        assert_eq!(s[0].success_rate, 1.0);
        assert_eq!(s[0].mean_runtime, Some(1.5));
        assert_eq!(s[0].mean_flowtime, Some(10.0));
        assert_eq!(s[1].success_rate, 0.5);
        assert_eq!(s[1].mean_runtime, Some(3.0));
        assert_eq!(s[1].mean_flowtime, Some(8.0));
    }

    #[test]
    fn csv_starts_with_schema_row() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row("m", 0, "v1", None, 0.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_SCHEMA));
        assert!(lines.next().unwrap().starts_with("map,agents,tasks,instance,instance_seed,variant,success"));
        assert_eq!(lines.next(), Some("m,2,3,0,0,v1,false,failed,0.5,,,,1,0,0"));
    }

    #[test]
    fn small_grid_runs_in_canonical_order() {
        let mut g = BenchGrid::new(vec![MapSpec::Builtin(MapKind::Empty)], vec![2], vec![2, 3], 2);
        g.variants = vec![BenchVariant::Solver(Variant::V1), BenchVariant::Pibt];
        g.time_limit = Duration::from_secs(5);
        let mut seen = Vec::new();
        let rows = run_grid(&g, 2, None, |r| {
            seen.push((r.tasks, r.instance, r.variant.clone()));
            Ok(())
        })
        .unwrap();
        assert_eq!(rows.len(), g.row_count());
        let want: Vec<_> = [2, 3]
            .iter()
            .flat_map(|&m| (0..2).flat_map(move |i| ["v1", "pibt"].map(|v| (m, i, v.to_string()))))
            .collect();
        assert_eq!(seen, want);
        assert!(rows.iter().all(|r| r.status != RowStatus::Invalid && r.status != RowStatus::Panicked));
    }
}
