//! Independent feasibility checking for joint plans.
//!
//! Nothing in here is shared with the planners: conflicts, completion times
//! and task visits are recomputed from the raw paths.

use std::collections::HashMap;
use std::fmt;

use crate::grid::{GridGraph, Vertex};
use crate::instance::Scenario;
use crate::plan::{JointPlan, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    /// Both agents on this vertex.
    Vertex(Vertex),
    /// The lower-indexed agent moves `.0 -> .1` while the other moves back.
    Edge(Vertex, Vertex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conflict {
    pub kind: ConflictKind,
    /// For edge conflicts, the earlier endpoint of the swap.
    pub time: usize,
    /// Ordered pair, `agents.0 < agents.1`.
    pub agents: (usize, usize),
}

impl Conflict {
    fn sort_key(&self) -> (usize, (usize, usize), u8) {
        let k = match self.kind {
            ConflictKind::Vertex(_) => 0,
            ConflictKind::Edge(..) => 1,
        };
        (self.time, self.agents, k)
    }
}

/// Every vertex and edge conflict in `paths`, each pair once, sorted by time
/// then agent pair. Paths shorter than the longest are treated as parked.
pub fn find_conflicts(paths: &[Path]) -> Vec<Conflict> {
    let horizon = paths.iter().map(|p| p.len()).max().unwrap_or(0);
    let at = |a: usize, t: usize| -> Vertex {
        let p = &paths[a];
        p[t.min(p.len() - 1)]
    };
    let mut out = Vec::new();
    let mut occupants: HashMap<Vertex, Vec<usize>> = HashMap::new();
    let mut moves: HashMap<(Vertex, Vertex), usize> = HashMap::new();
    for t in 0..horizon {
        occupants.clear();
        for a in 0..paths.len() {
            if paths[a].is_empty() {
                continue;
            }
            occupants.entry(at(a, t)).or_default().push(a);
        }
        for (&v, agents) in &occupants {
            for (i, &a) in agents.iter().enumerate() {
                for &b in &agents[i + 1..] {
                    out.push(Conflict {
                        kind: ConflictKind::Vertex(v),
                        time: t,
                        agents: (a.min(b), a.max(b)),
                    });
                }
            }
        }
        if t + 1 < horizon {
            moves.clear();
            for a in 0..paths.len() {
                if paths[a].is_empty() {
                    continue;
                }
                let (u, v) = (at(a, t), at(a, t + 1));
                if u != v {
                    moves.insert((u, v), a);
                }
            }
            for (&(u, v), &a) in &moves {
                if let Some(&b) = moves.get(&(v, u)) {
                    if a < b {
                        out.push(Conflict {
                            kind: ConflictKind::Edge(u, v),
                            time: t,
                            agents: (a, b),
                        });
                    }
                }
            }
        }
    }
    out.sort_by_key(Conflict::sort_key);
    out
}

/// First timestep at which each of the agent's tasks is visited.
fn first_visits(path: &Path, targets: &[Vertex]) -> Vec<Option<usize>> {
    targets
        .iter()
        .map(|&v| path.iter().position(|&u| u == v))
        .collect()
}

/// Per-agent permanent-arrival time: the smallest `t` at which all of the
/// agent's tasks have been visited and the agent is at its goal and stays
/// there for the rest of the horizon. `None` if the agent never settles.
pub fn completion_times(paths: &[Path], scenario: &Scenario) -> Vec<Option<usize>> {
    paths
        .iter()
        .enumerate()
        .map(|(a, path)| {
            let goal = scenario.agents.get(a)?.goal;
            if path.last() != Some(&goal) {
                return None;
            }
            let mut settle = path.len() - 1;
            while settle > 0 && path[settle - 1] == goal {
                settle -= 1;
            }
            let visits = first_visits(path, &scenario.task_vertices_of(a));
            let mut done = 0;
            for v in visits {
                done = done.max(v?);
            }
            Some(settle.max(done))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AgentCount { expected: usize, got: usize },
    EmptyPath { agent: usize },
    RaggedHorizon { agent: usize, len: usize, expected: usize },
    WrongStart { agent: usize, expected: Vertex, got: Vertex },
    Blocked { agent: usize, time: usize, vertex: Vertex },
    IllegalMove { agent: usize, time: usize, from: Vertex, to: Vertex },
    Conflict(Conflict),
    TaskNotVisited { task: usize, agent: usize },
    NotAtGoal { agent: usize, goal: Vertex, last: Vertex },
    CompletionMismatch { agent: usize, claimed: Option<usize>, actual: Option<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AgentCount { expected, got } => {
                write!(f, "plan has {got} paths for {expected} agents")
            }
            Violation::EmptyPath { agent } => write!(f, "agent {agent}: empty path"),
            Violation::RaggedHorizon { agent, len, expected } => write!(
                f,
                "agent {agent}: path length {len} differs from common length {expected}"
            ),
            Violation::WrongStart { agent, expected, got } => write!(
                f,
                "condition (iii): agent {agent} starts at vertex {got}, expected {expected}"
            ),
            Violation::Blocked { agent, time, vertex } => {
                write!(f, "agent {agent}: blocked vertex {vertex} at t={time}")
            }
            Violation::IllegalMove { agent, time, from, to } => write!(
                f,
                "agent {agent}: illegal move {from} -> {to} at t={time} (not adjacent)"
            ),
            Violation::Conflict(c) => match c.kind {
                ConflictKind::Vertex(v) => write!(
                    f,
                    "condition (ii): vertex conflict between agents {} and {} at vertex {v}, t={}",
                    c.agents.0, c.agents.1, c.time
                ),
                ConflictKind::Edge(u, v) => write!(
                    f,
                    "condition (ii): edge conflict between agents {} and {} on {u}<->{v}, t={}",
                    c.agents.0, c.agents.1, c.time
                ),
            },
            Violation::TaskNotVisited { task, agent } => {
                write!(f, "condition (i): agent {agent} never visits task {task}")
            }
            Violation::NotAtGoal { agent, goal, last } => write!(
                f,
                "condition (iii): agent {agent} ends at vertex {last}, goal is {goal}"
            ),
            Violation::CompletionMismatch { agent, claimed, actual } => write!(
                f,
                "agent {agent}: recorded completion time {claimed:?}, recomputed {actual:?}"
            ),
        }
    }
}

/// Checks feasibility conditions (i)-(iii) plus move legality and the
/// recorded completion times. Returns every violation found.
pub fn validate(
    plan: &JointPlan,
    scenario: &Scenario,
    graph: &GridGraph,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = scenario.agent_count();
    if plan.paths.len() != n {
        out.push(Violation::AgentCount {
            expected: n,
            got: plan.paths.len(),
        });
        return Err(out);
    }
    if let Some(agent) = plan.paths.iter().position(|p| p.is_empty()) {
        out.push(Violation::EmptyPath { agent });
        return Err(out);
    }
    let len = plan.paths.iter().map(Vec::len).max().unwrap_or(0);
    for (agent, p) in plan.paths.iter().enumerate() {
        if p.len() != len {
            out.push(Violation::RaggedHorizon {
                agent,
                len: p.len(),
                expected: len,
            });
        }
    }

    for (agent, (p, a)) in plan.paths.iter().zip(&scenario.agents).enumerate() {
        if p[0] != a.start {
            out.push(Violation::WrongStart {
                agent,
                expected: a.start,
                got: p[0],
            });
        }
        for (time, &v) in p.iter().enumerate() {
            if !graph.is_passable(v) {
                out.push(Violation::Blocked { agent, time, vertex: v });
            }
        }
        for (time, w) in p.windows(2).enumerate() {
            if w[0] != w[1] && !graph.adjacent(w[0], w[1]) {
                out.push(Violation::IllegalMove {
                    agent,
                    time,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        let last = *p.last().unwrap();
        if last != a.goal {
            out.push(Violation::NotAtGoal {
                agent,
                goal: a.goal,
                last,
            });
        }
    }

    out.extend(find_conflicts(&plan.paths).into_iter().map(Violation::Conflict));

    for (task, t) in scenario.tasks.iter().enumerate() {
        for &agent in &t.assignees {
            if !plan.paths[agent].contains(&t.vertex) {
                out.push(Violation::TaskNotVisited { task, agent });
            }
        }
    }

    let actual = completion_times(&plan.paths, scenario);
    for (agent, (&claimed, &actual)) in plan.completion.iter().zip(&actual).enumerate() {
        if claimed != actual {
            out.push(Violation::CompletionMismatch {
                agent,
                claimed,
                actual,
            });
        }
    }
    if plan.completion.len() != n {
        out.push(Violation::CompletionMismatch {
            agent: plan.completion.len().min(n),
            claimed: None,
            actual: None,
        });
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
