//! Task-aware PIBT: steps a configuration forward, steering each agent to its
//! next unvisited task (then its goal), and reports stagnation.

use std::time::Instant;

use rand::Rng;

use crate::dist::{DistCache, UNREACHABLE};
use crate::grid::{GridMap, Vertex};
use crate::instance::Scenario;
use crate::pibt::{pibt_step, PibtScratch};
use crate::plan::JointPlan;
use crate::sequencing::JointSequence;

pub type Configuration = Vec<Vertex>;

/// What an agent reached in a completion event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reached {
    /// Position in the agent's task order.
    Task(usize),
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Completion {
    pub time: usize,
    pub agent: usize,
    pub reached: Reached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentProgress {
    pub agent: usize,
    pub seq_cursor: usize,
    pub elapsed: u32,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: Configuration,
    pub moved_count: usize,
    pub completions: Vec<(usize, Reached)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StagnationBudget {
    /// Steps without progress before giving up.
    pub window: usize,
    /// Absolute cap on the plan horizon.
    pub max_steps: usize,
}

impl StagnationBudget {
    pub fn for_instance(map: &GridMap, lb_makespan: usize) -> Self {
        Self {
            window: 4 * (map.width() + map.height()),
            max_steps: 20 * (lb_makespan + map.passable_count()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeStatus {
    Running,
    Feasible,
    Stagnated,
    TimedOut,
}

/// Fixed inputs of an episode: the scenario and the visiting order chosen
/// for every agent.
#[derive(Debug, Clone)]
pub struct EpisodeContext<'a> {
    pub scenario: &'a Scenario,
    pub dist: &'a DistCache,
    pub orders: Vec<Vec<Vertex>>,
}

impl<'a> EpisodeContext<'a> {
    pub fn new(scenario: &'a Scenario, dist: &'a DistCache, seq: &JointSequence) -> Self {
        let orders = (0..scenario.agent_count()).map(|i| seq.order(i).to_vec()).collect();
        Self::with_orders(scenario, dist, orders)
    }

    pub fn with_orders(scenario: &'a Scenario, dist: &'a DistCache, orders: Vec<Vec<Vertex>>) -> Self {
        assert_eq!(orders.len(), scenario.agent_count());
        Self { scenario, dist, orders }
    }

    pub fn agent_count(&self) -> usize {
        self.orders.len()
    }

    /// Next target: the task at `cursor`, or the goal once all are visited.
    pub fn target(&self, agent: usize, cursor: usize) -> Vertex {
        self.orders[agent].get(cursor).copied().unwrap_or(self.scenario.agents[agent].goal)
    }

    pub fn remaining_cost(&self, agent: usize, pos: Vertex, cursor: usize) -> u32 {
        let order = &self.orders[agent];
        self.dist.tour_cost_raw(pos, &order[cursor.min(order.len())..], self.scenario.agents[agent].goal)
    }

    /// Largest single-agent tour cost of the orders; a makespan lower bound
    /// for this sequence.
    pub fn lb_makespan(&self) -> usize {
        (0..self.agent_count())
            .map(|i| self.remaining_cost(i, self.scenario.agents[i].start, 0))
            .filter(|&c| c != UNREACHABLE)
            .max()
            .unwrap_or(0) as usize
    }

    /// Cursor after standing on `pos`: skips every leading task at `pos`.
    fn advance(&self, agent: usize, mut cursor: usize, pos: Vertex) -> usize {
        let order = &self.orders[agent];
        while cursor < order.len() && order[cursor] == pos {
            cursor += 1;
        }
        cursor
    }

    fn finished(&self, agent: usize, cursor: usize, pos: Vertex) -> bool {
        cursor >= self.orders[agent].len() && pos == self.scenario.agents[agent].goal
    }
}

/// Recomputes `priority = elapsed + remaining / (1 + max remaining)`.
pub fn update_priorities(ctx: &EpisodeContext, config: &[Vertex], progress: &mut [AgentProgress]) {
    let remaining: Vec<u32> = progress
        .iter()
        .map(|p| ctx.remaining_cost(p.agent, config[p.agent], p.seq_cursor))
        .map(|c| if c == UNREACHABLE { 0 } else { c })
        .collect();
    let max = remaining.iter().copied().max().unwrap_or(0) as f64;
    for (p, r) in progress.iter_mut().zip(remaining) {
        p.priority = p.elapsed as f64 + r as f64 / (1.0 + max);
    }
}

/// Agents by descending priority, ties by index.
pub fn priority_order(progress: &[AgentProgress]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..progress.len()).collect();
    order.sort_by(|&a, &b| progress[b].priority.total_cmp(&progress[a].priority).then(a.cmp(&b)));
    order
}

/// One synchronous step of the planner.
pub fn step<R: Rng>(
    ctx: &EpisodeContext,
    q_from: &[Vertex],
    progress: &[AgentProgress],
    rng: &mut R,
    scratch: &mut PibtScratch,
) -> StepOutcome {
    let order = priority_order(progress);
    let targets: Vec<Vertex> = progress.iter().map(|p| ctx.target(p.agent, p.seq_cursor)).collect();
    let mut q_to = vec![None; q_from.len()];
    let graph = ctx.dist.graph();
    pibt_step(graph, q_from, &mut q_to, &order, |i, v| ctx.dist.raw(v, targets[i]), rng, scratch);
    let next: Configuration = q_to.into_iter().map(|v| v.expect("every agent is placed")).collect();

    let mut completions = Vec::new();
    for p in progress {
        let i = p.agent;
        let was_finished = ctx.finished(i, p.seq_cursor, q_from[i]);
        let cursor = ctx.advance(i, p.seq_cursor, next[i]);
        for c in p.seq_cursor..cursor {
            completions.push((i, Reached::Task(c)));
        }
        if !was_finished && ctx.finished(i, cursor, next[i]) {
            completions.push((i, Reached::Goal));
        }
    }
    let moved_count = q_from.iter().zip(&next).filter(|(a, b)| a != b).count();
    StepOutcome { next, moved_count, completions }
}

/// An episode's full state, resumable after the plan prefix is edited.
#[derive(Debug, Clone)]
pub struct Episode {
    /// Configuration per timestep, starting at 0.
    pub configs: Vec<Configuration>,
    pub progress: Vec<AgentProgress>,
    pub events: Vec<Completion>,
    /// Time since which the agent has been finished, if it is now.
    pub finished_since: Vec<Option<usize>>,
    /// Time of the agent's latest completion event, 0 if none.
    pub last_completion: Vec<usize>,
    /// End of the last spliced lock-release plan; later releases never
    /// rewind past it.
    pub committed: usize,
    pub status: EpisodeStatus,
    last_progress: usize,
    best_finished: usize,
}

impl Episode {
    pub fn new(ctx: &EpisodeContext, start: Configuration) -> Self {
        Self::from_prefix(ctx, vec![start])
    }

    /// Replays task progress over an existing prefix. Elapsed counters start
    /// from zero at the end of the prefix.
    pub fn from_prefix(ctx: &EpisodeContext, configs: Vec<Configuration>) -> Self {
        assert!(!configs.is_empty());
        let n = ctx.agent_count();
        let mut cursors = vec![0usize; n];
        let mut events = Vec::new();
        let mut finished_since = vec![None; n];
        let mut last_completion = vec![0usize; n];
        for (t, q) in configs.iter().enumerate() {
            for i in 0..n {
                let c = ctx.advance(i, cursors[i], q[i]);
                for k in cursors[i]..c {
                    events.push(Completion { time: t, agent: i, reached: Reached::Task(k) });
                    last_completion[i] = t;
                }
                cursors[i] = c;
                let fin = ctx.finished(i, c, q[i]);
                match (fin, finished_since[i]) {
                    (true, None) => {
                        finished_since[i] = Some(t);
                        events.push(Completion { time: t, agent: i, reached: Reached::Goal });
                        last_completion[i] = t;
                    }
                    (false, Some(_)) => finished_since[i] = None,
                    _ => {}
                }
            }
        }
        let progress = (0..n)
            .map(|i| AgentProgress { agent: i, seq_cursor: cursors[i], elapsed: 0, priority: 0.0 })
            .collect();
        let now = configs.len() - 1;
        let mut ep = Self {
            configs,
            progress,
            events,
            finished_since,
            last_completion,
            committed: 0,
            status: EpisodeStatus::Running,
            last_progress: now,
            best_finished: 0,
        };
        ep.best_finished = ep.finished_count();
        let last = ep.configs[now].clone();
        update_priorities(ctx, &last, &mut ep.progress);
        ep
    }

    pub fn now(&self) -> usize {
        self.configs.len() - 1
    }

    pub fn current(&self) -> &[Vertex] {
        &self.configs[self.now()]
    }

    pub fn is_finished(&self, agent: usize) -> bool {
        self.finished_since[agent].is_some()
    }

    pub fn finished_count(&self) -> usize {
        self.finished_since.iter().filter(|f| f.is_some()).count()
    }

    pub fn all_finished(&self) -> bool {
        self.finished_since.iter().all(Option::is_some)
    }

    fn apply(&mut self, ctx: &EpisodeContext, out: StepOutcome) {
        self.configs.push(out.next);
        let t = self.now();
        let mut progressed = false;
        for &(i, reached) in &out.completions {
            self.events.push(Completion { time: t, agent: i, reached });
            self.last_completion[i] = t;
            match reached {
                Reached::Task(k) => {
                    self.progress[i].seq_cursor = k + 1;
                    progressed = true;
                }
                Reached::Goal => {}
            }
        }
        let q = &self.configs[t];
        for i in 0..ctx.agent_count() {
            let fin = ctx.finished(i, self.progress[i].seq_cursor, q[i]);
            if fin {
                if self.finished_since[i].is_none() {
                    self.finished_since[i] = Some(t);
                }
                self.progress[i].elapsed = 0;
            } else {
                self.finished_since[i] = None;
                self.progress[i].elapsed += 1;
            }
        }
        let finished = self.finished_count();
        if finished > self.best_finished {
            self.best_finished = finished;
            progressed = true;
        }
        if progressed {
            self.last_progress = t;
        }
        let q = self.configs[t].clone();
        update_priorities(ctx, &q, &mut self.progress);
    }

    /// Steps until every agent is finished, the budget runs out, or the
    /// deadline passes.
    pub fn run<R: Rng>(
        &mut self,
        ctx: &EpisodeContext,
        budget: StagnationBudget,
        rng: &mut R,
        deadline: Option<Instant>,
    ) -> EpisodeStatus {
        let mut scratch = PibtScratch::new(ctx.dist.graph().vertex_count());
        self.status = loop {
            if self.all_finished() {
                break EpisodeStatus::Feasible;
            }
            let t = self.now();
            if t >= budget.max_steps || t - self.last_progress >= budget.window {
                break EpisodeStatus::Stagnated;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                break EpisodeStatus::TimedOut;
            }
            let out = step(ctx, self.current(), &self.progress, rng, &mut scratch);
            log::trace!("t={} moved={} config={:?}", t + 1, out.moved_count, out.next);
            self.apply(ctx, out);
        };
        self.status
    }

    /// Paths per agent over the whole prefix; completion times are set only
    /// for a feasible episode.
    pub fn to_plan(&self) -> JointPlan {
        let n = self.progress.len();
        let paths = (0..n).map(|i| self.configs.iter().map(|q| q[i]).collect()).collect();
        let feasible = self.all_finished();
        let completion = if feasible { self.finished_since.clone() } else { vec![None; n] };
        JointPlan::new(paths, completion, feasible)
    }
}

/// Runs a fresh episode from the scenario's start configuration.
pub fn run_episode<R: Rng>(
    ctx: &EpisodeContext,
    budget: StagnationBudget,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Episode {
    let start = ctx.scenario.agents.iter().map(|a| a.start).collect();
    let mut ep = Episode::new(ctx, start);
    ep.run(ctx, budget, rng, deadline);
    ep
}
