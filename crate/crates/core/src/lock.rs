//! Lock release: find the agents involved in a stalled episode, rewind to
//! the lock time, move them with a complete local solver and resume.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{GridGraph, Vertex};
use crate::lacam::{self, LocalInstance, LocalOutcome};
use crate::rng;
use crate::xpibt::{Configuration, Episode, EpisodeContext};

pub const PERMUTATION_ATTEMPTS: usize = 10;
pub const LOCAL_BUDGET: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LockError {
    #[error("episode is feasible; there is no lock to release")]
    Feasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReleaseConfig {
    pub permutation_attempts: usize,
    pub local_budget: Duration,
}

impl Default for ReleaseConfig {
    fn default() -> Self {
        Self { permutation_attempts: PERMUTATION_ATTEMPTS, local_budget: LOCAL_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockReport {
    pub lock_agents: Vec<usize>,
    pub t_hat: usize,
    /// Time the plan is cut at: `t_hat`, or later if some frozen agent
    /// settles later or an earlier release committed a longer prefix.
    pub splice: usize,
    pub local_start: Configuration,
    /// Static obstacles: (vertex, agent) for every agent outside the lock.
    pub frozen: Vec<(Vertex, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStrategy {
    Permutation,
    NextTask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseOutcome {
    Released,
    Unrecoverable,
    TimedOut,
}

/// One release round, for logs and the bench harness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockEvent {
    /// Episode time when the stall was detected.
    pub time: usize,
    pub lock_agents: Vec<usize>,
    pub t_hat: usize,
    pub splice: usize,
    pub attempts: usize,
    pub strategy: Option<TargetStrategy>,
    pub outcome: ReleaseOutcome,
    pub local_solve_secs: f64,
}

/// Unfinished agents plus finished ones parked on a shortest path of some
/// unfinished agent toward its current target.
pub fn detect_lock(ep: &Episode, ctx: &EpisodeContext) -> Result<Vec<usize>, LockError> {
    if ep.all_finished() {
        return Err(LockError::Feasible);
    }
    let q = ep.current();
    let n = ctx.agent_count();
    let unfinished: Vec<usize> = (0..n).filter(|&i| !ep.is_finished(i)).collect();
    let lock = (0..n)
        .filter(|&j| {
            !ep.is_finished(j)
                || unfinished.iter().any(|&i| {
                    let target = ctx.target(i, ep.progress[i].seq_cursor);
                    ctx.dist.on_shortest_path(q[i], target, q[j])
                })
        })
        .collect();
    Ok(lock)
}

/// Earliest "latest completion" among the lock agents.
pub fn find_lock_time(ep: &Episode, lock_agents: &[usize]) -> usize {
    lock_agents.iter().map(|&i| ep.last_completion[i]).min().unwrap_or(0)
}

/// First time at or after `t_hat` from which every agent outside the lock
/// stays put.
pub fn splice_time(ep: &Episode, lock_agents: &[usize], t_hat: usize) -> usize {
    let n = ep.progress.len();
    let now = ep.now();
    let mut splice = t_hat;
    for j in (0..n).filter(|j| !lock_agents.contains(j)) {
        let last = ep.configs[now][j];
        let mut t = now;
        while t > 0 && ep.configs[t - 1][j] == last {
            t -= 1;
        }
        splice = splice.max(t);
    }
    splice
}

pub fn report(ep: &Episode, ctx: &EpisodeContext) -> Result<LockReport, LockError> {
    let lock_agents = detect_lock(ep, ctx)?;
    Ok(report_for(ep, ctx, lock_agents))
}

fn report_for(ep: &Episode, ctx: &EpisodeContext, lock_agents: Vec<usize>) -> LockReport {
    let t_hat = find_lock_time(ep, &lock_agents);
    let splice = splice_time(ep, &lock_agents, t_hat.max(ep.committed));
    let q = &ep.configs[splice];
    let local_start = lock_agents.iter().map(|&i| q[i]).collect();
    let frozen = (0..ctx.agent_count()).filter(|j| !lock_agents.contains(j)).map(|j| (q[j], j)).collect();
    LockReport { lock_agents, t_hat, splice, local_start, frozen }
}

/// Uniform non-identity permutation of the lock agents' positions.
pub fn build_targets<R: Rng>(local_start: &[Vertex], rng: &mut R) -> Configuration {
    assert!(local_start.len() >= 2, "a permutation target needs two agents");
    loop {
        let mut t = local_start.to_vec();
        rng::shuffle(rng, &mut t);
        if t != local_start {
            return t;
        }
    }
}

/// Next-task goals for a local instance. `rank` orders claims on a shared
/// or blocked target (lower wins, ties by position); agents that lose
/// become free and may end anywhere.
pub fn next_task_targets(graph: &GridGraph, wanted: &[Vertex], rank: &[usize]) -> Vec<Option<Vertex>> {
    let mut order: Vec<usize> = (0..wanted.len()).collect();
    order.sort_by_key(|&k| rank[k]);
    let mut used = HashSet::new();
    let mut targets = vec![None; wanted.len()];
    for k in order {
        let t = wanted[k];
        if graph.is_passable(t) && used.insert(t) {
            targets[k] = Some(t);
        }
    }
    targets
}

/// Tries to release the lock in `ep`. On success the episode is rewound and
/// spliced, ready to resume; otherwise it is left untouched.
///
/// Permutation targets come first, then next-task targets; with `escalate`,
/// used after a release that led straight back into a lock, the order is
/// reversed. If the detected lock set cannot be released, one more round
/// treats every agent as a lock agent.
pub fn release<R: Rng>(
    ep: &mut Episode,
    ctx: &EpisodeContext,
    cfg: &ReleaseConfig,
    escalate: bool,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Result<LockEvent, LockError> {
    let rep = report(ep, ctx)?;
    let mut event = LockEvent {
        time: ep.now(),
        lock_agents: rep.lock_agents.clone(),
        t_hat: rep.t_hat,
        splice: rep.splice,
        attempts: 0,
        strategy: None,
        outcome: ReleaseOutcome::Unrecoverable,
        local_solve_secs: 0.0,
    };
    try_release(ep, ctx, &rep, cfg, escalate, rng, deadline, &mut event);
    let n = ctx.agent_count();
    if event.outcome == ReleaseOutcome::Unrecoverable && rep.lock_agents.len() < n {
        let wide = report_for(ep, ctx, (0..n).collect());
        event.lock_agents = wide.lock_agents.clone();
        event.t_hat = wide.t_hat;
        event.splice = wide.splice;
        try_release(ep, ctx, &wide, cfg, true, rng, deadline, &mut event);
    }
    Ok(event)
}

#[allow(clippy::too_many_arguments)]
fn try_release<R: Rng>(
    ep: &mut Episode,
    ctx: &EpisodeContext,
    rep: &LockReport,
    cfg: &ReleaseConfig,
    next_task_first: bool,
    rng: &mut R,
    deadline: Option<Instant>,
    event: &mut LockEvent,
) {
    let graph = Arc::new(ctx.dist.graph().with_blocked(rep.frozen.iter().map(|&(v, _)| v)));
    let rewound = Episode::from_prefix(ctx, ep.configs[..=rep.splice].to_vec());
    let wanted: Vec<Vertex> = rep
        .lock_agents
        .iter()
        .map(|&i| ctx.target(i, rewound.progress[i].seq_cursor))
        .collect();
    // agents with tasks left claim first, then those heading home
    let rank: Vec<usize> = rep
        .lock_agents
        .iter()
        .map(|&i| {
            let cursor = rewound.progress[i].seq_cursor;
            if cursor < ctx.orders[i].len() {
                0
            } else if !rewound.is_finished(i) {
                1
            } else {
                2
            }
        })
        .collect();
    let next_targets = next_task_targets(&graph, &wanted, &rank);

    let mut plans: Vec<(TargetStrategy, Vec<Option<Vertex>>)> = Vec::new();
    if rep.lock_agents.len() >= 2 {
        for _ in 0..cfg.permutation_attempts {
            plans.push((TargetStrategy::Permutation, Vec::new()));
        }
    }
    if next_task_first {
        plans.insert(0, (TargetStrategy::NextTask, next_targets));
    } else {
        plans.push((TargetStrategy::NextTask, next_targets));
    }

    for (strategy, targets) in plans {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            event.outcome = ReleaseOutcome::TimedOut;
            return;
        }
        let targets = match strategy {
            TargetStrategy::Permutation => build_targets(&rep.local_start, rng).into_iter().map(Some).collect(),
            TargetStrategy::NextTask => targets,
        };
        event.attempts += 1;
        event.strategy = Some(strategy);
        let Ok(inst) = LocalInstance::partial(graph.clone(), rep.local_start.clone(), targets, rep.lock_agents.clone())
        else {
            continue;
        };
        let local_deadline = Instant::now() + cfg.local_budget;
        let local_deadline = deadline.map_or(local_deadline, |d| d.min(local_deadline));
        let started = Instant::now();
        let outcome = lacam::solve(&inst, Some(local_deadline), rng);
        event.local_solve_secs += started.elapsed().as_secs_f64();
        log::debug!(
            "lock t={} agents={:?} t_hat={} splice={} attempt={} {:?} -> {}",
            event.time,
            rep.lock_agents,
            rep.t_hat,
            rep.splice,
            event.attempts,
            strategy,
            match &outcome {
                LocalOutcome::Solved(_) => "solved",
                LocalOutcome::Timeout => "timeout",
                LocalOutcome::Unsolvable => "unsolvable",
            }
        );
        if let LocalOutcome::Solved(seq) = outcome {
            let mut configs = rewound.configs;
            let base = configs[rep.splice].clone();
            for local in &seq[1..] {
                let mut q = base.clone();
                for (k, &i) in rep.lock_agents.iter().enumerate() {
                    q[i] = local[k];
                }
                configs.push(q);
            }
            *ep = Episode::from_prefix(ctx, configs);
            ep.committed = ep.now();
            event.outcome = ReleaseOutcome::Released;
            return;
        }
    }
}
