//! The anytime loop over ranked joint task sequences: plan each sequence,
//! release locks, refine, keep the best plan.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::dist::DistCache;
use crate::instance::Scenario;
use crate::lns::{self, LnsBudget, LnsParams};
use crate::lock::{self, LockEvent, ReleaseConfig, ReleaseOutcome};
use crate::plan::JointPlan;
use crate::rng;
use crate::sequencing::JointSequences;
use crate::validate::validate;
use crate::xpibt::{Episode, EpisodeContext, EpisodeStatus, StagnationBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Best sequence only.
    V1,
    /// First feasible plan over the ranked sequences.
    V2,
    /// Every sequence until the deadline, each refined by LNS.
    V3,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::V1, Variant::V2, Variant::V3];

    pub fn name(self) -> &'static str {
        match self {
            Variant::V1 => "v1",
            Variant::V2 => "v2",
            Variant::V3 => "v3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s:?} (expected v1, v2 or v3)"))
    }
}

/// LNS budget per sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LnsLimit {
    Iterations(usize),
    Seconds(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("time limit must be positive")]
    TimeLimit,
    #[error("LNS time budget must be non-negative")]
    LnsTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub time_limit: Duration,
    pub lns: LnsLimit,
    pub lock_release: bool,
    /// Release rounds allowed per sequence before moving on.
    pub lock_attempt_limit: usize,
    pub release: ReleaseConfig,
    pub seed: u64,
    /// Stop after this many sequences even if time remains.
    pub max_sequences: Option<usize>,
}

pub const DEFAULT_LOCK_ATTEMPT_LIMIT: usize = 100;
pub const DEFAULT_LNS_ITERATIONS: usize = 100;

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            time_limit: Duration::from_secs(60),
            lns: LnsLimit::Iterations(DEFAULT_LNS_ITERATIONS),
            lock_release: true,
            lock_attempt_limit: DEFAULT_LOCK_ATTEMPT_LIMIT,
            release: ReleaseConfig::default(),
            seed: 0,
            max_sequences: None,
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.time_limit.is_zero() {
            return Err(ConfigError::TimeLimit);
        }
        if let LnsLimit::Seconds(s) = self.lns {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(ConfigError::LnsTime);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub best_plan: Option<JointPlan>,
    pub success: bool,
    pub flowtime: Option<usize>,
    pub makespan: Option<usize>,
    pub sequences_tried: usize,
    pub lock_events: usize,
    pub lns_iterations: usize,
    pub wall_time: f64,
    /// (seconds since start, incumbent flowtime) at every improvement.
    pub timeline: Vec<(f64, usize)>,
    /// Flowtime of the first feasible plan, before any refinement.
    pub first_flowtime: Option<usize>,
    pub lock_log: Vec<LockEvent>,
}

struct Incumbent {
    plan: Option<JointPlan>,
    flow: usize,
    timeline: Vec<(f64, usize)>,
}

impl Incumbent {
    fn offer(&mut self, plan: &JointPlan, at: f64) -> bool {
        match plan.flowtime() {
            Some(f) if f < self.flow => {
                self.flow = f;
                self.plan = Some(plan.clone());
                self.timeline.push((at, f));
                true
            }
            _ => false,
        }
    }
}

/// Tasks done plus agents finished: grows whenever a release helped.
fn completions(ep: &Episode) -> usize {
    ep.progress.iter().map(|p| p.seq_cursor).sum::<usize>() + ep.finished_count()
}

/// Runs the configured variant until it returns or the deadline passes.
pub fn solve(scenario: &Scenario, dist: &DistCache, config: &SolverConfig) -> SolveResult {
    let started = Instant::now();
    let deadline = started + config.time_limit;
    let map = dist.graph().map();
    let mut inc = Incumbent { plan: None, flow: usize::MAX, timeline: Vec::new() };
    let mut result = SolveResult {
        best_plan: None,
        success: false,
        flowtime: None,
        makespan: None,
        sequences_tried: 0,
        lock_events: 0,
        lns_iterations: 0,
        wall_time: 0.0,
        timeline: Vec::new(),
        first_flowtime: None,
        lock_log: Vec::new(),
    };

    for seq in JointSequences::new(scenario, dist) {
        if Instant::now() >= deadline || config.max_sequences.is_some_and(|m| result.sequences_tried >= m) {
            break;
        }
        if config.variant == Variant::V1 && result.sequences_tried >= 1 {
            break;
        }
        result.sequences_tried += 1;
        let k = seq.rank as u64;
        let ctx = EpisodeContext::new(scenario, dist, &seq);
        let budget = StagnationBudget::for_instance(map, ctx.lb_makespan());
        let mut pibt_rng = rng::stream(config.seed, rng::purpose::PIBT, &[k]);
        let mut lock_rng = rng::stream(config.seed, rng::purpose::LOCK, &[k]);

        let start = scenario.agents.iter().map(|a| a.start).collect();
        let mut ep = Episode::new(&ctx, start);
        let mut status = ep.run(&ctx, budget, &mut pibt_rng, Some(deadline));
        let mut rounds = 0;
        let mut last_progress = None;
        while status == EpisodeStatus::Stagnated && config.lock_release && rounds < config.lock_attempt_limit {
            rounds += 1;
            let progress = completions(&ep);
            let escalate = last_progress.is_some_and(|p| progress <= p);
            last_progress = Some(progress);
            let Ok(ev) = lock::release(&mut ep, &ctx, &config.release, escalate, &mut lock_rng, Some(deadline)) else {
                break;
            };
            let outcome = ev.outcome;
            result.lock_log.push(ev);
            result.lock_events += 1;
            if outcome != ReleaseOutcome::Released {
                break;
            }
            status = ep.run(&ctx, budget, &mut pibt_rng, Some(deadline));
        }
        if status != EpisodeStatus::Feasible {
            log::debug!("sequence {k}: {status:?} after {rounds} release rounds");
            continue;
        }
        let mut plan = ep.to_plan();
        plan.trim_to_makespan();
        if let Err(v) = validate(&plan, scenario, dist.graph()) {
            log::error!("sequence {k}: planner produced an invalid plan: {:?}", v.first());
            continue;
        }
        if result.first_flowtime.is_none() {
            result.first_flowtime = plan.flowtime();
        }
        inc.offer(&plan, started.elapsed().as_secs_f64());
        if config.variant != Variant::V3 {
            break;
        }

        let lns_budget = match config.lns {
            LnsLimit::Iterations(n) => LnsBudget { iterations: Some(n), deadline: Some(deadline) },
            LnsLimit::Seconds(s) => {
                let d = Instant::now() + Duration::from_secs_f64(s);
                LnsBudget { iterations: None, deadline: Some(d.min(deadline)) }
            }
        };
        let lns_started = started.elapsed().as_secs_f64();
        let mut lns_rng = rng::stream(config.seed, rng::purpose::LNS, &[k]);
        let (refined, records) = lns::refine(&plan, &ctx, lns_budget, &LnsParams::default(), &mut lns_rng);
        result.lns_iterations += records.len();
        let mut improved = false;
        for r in records.iter().filter(|r| r.accepted) {
            if r.incumbent_flowtime >= inc.flow {
                continue;
            }
            inc.flow = r.incumbent_flowtime;
            inc.timeline.push((lns_started + r.elapsed_secs, r.incumbent_flowtime));
            improved = true;
        }
        if improved {
            debug_assert_eq!(refined.flowtime(), Some(inc.flow));
            inc.plan = Some(refined);
        }
    }

    result.wall_time = started.elapsed().as_secs_f64();
    if let Some(plan) = inc.plan {
        debug_assert!(validate(&plan, scenario, dist.graph()).is_ok());
        result.success = true;
        result.flowtime = plan.flowtime();
        result.makespan = plan.makespan();
        result.best_plan = Some(plan);
    }
    result.timeline = inc.timeline;
    result
}
