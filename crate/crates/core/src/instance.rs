//! CTS-MAPF scenarios: agents with start/goal pairs plus task vertices that
//! designated agent subsets must visit.
//!
//! Text format (line oriented, `#` starts a comment):
//!
//! ```text
//! cts 1
//! seed 42
//! agent 0 <start_row> <start_col> <goal_row> <goal_col>
//! task 0 <row> <col> <assignee>[,<assignee>...]
//! ```
//!
//! The `seed` line is optional and defaults to 0.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::grid::{GridGraph, GridMap, Vertex};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("scenario has no agents")]
    NoAgents,
    #[error("{what} at ({row},{col}) is outside the map")]
    OutOfBounds { what: String, row: usize, col: usize },
    #[error("{what} at vertex {vertex} is on a blocked cell")]
    Blocked { what: String, vertex: Vertex },
    #[error("agents {first} and {second} share start vertex {vertex}")]
    DuplicateStart { first: usize, second: usize, vertex: Vertex },
    #[error("agents {first} and {second} share goal vertex {vertex}")]
    DuplicateGoal { first: usize, second: usize, vertex: Vertex },
    #[error("task {task}: empty assignee set")]
    EmptyAssignees { task: usize },
    #[error("task {task}: unknown agent {agent}")]
    UnknownAgent { task: usize, agent: usize },
    #[error("agent {agent}: {what} is unreachable from its start")]
    Unreachable { agent: usize, what: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("requested {requested} agents but the map has only {available} passable cells")]
    TooManyAgents { requested: usize, available: usize },
    #[error("no valid instance found after {attempts} attempts")]
    Exhausted { attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Agent {
    pub start: Vertex,
    pub goal: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Task {
    pub vertex: Vertex,
    /// Sorted, duplicate-free agent indices.
    pub assignees: Vec<usize>,
}

impl Task {
    pub fn new(vertex: Vertex, mut assignees: Vec<usize>) -> Self {
        assignees.sort_unstable();
        assignees.dedup();
        Self { vertex, assignees }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub agents: Vec<Agent>,
    pub tasks: Vec<Task>,
    pub seed: u64,
}

impl Scenario {
    /// Builds and validates a scenario. Assignee lists are normalized
    /// (sorted, deduplicated).
    pub fn new(
        agents: Vec<Agent>,
        mut tasks: Vec<Task>,
        seed: u64,
        map: &GridMap,
    ) -> Result<Self, ScenarioError> {
        for t in &mut tasks {
            t.assignees.sort_unstable();
            t.assignees.dedup();
        }
        let s = Self {
            agents,
            tasks,
            seed,
        };
        s.validate(map)?;
        Ok(s)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    /// Indices of the tasks assigned to `agent`, ascending.
    pub fn tasks_of(&self, agent: usize) -> Vec<usize> {
        self.tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.assignees.binary_search(&agent).is_ok())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn task_vertices_of(&self, agent: usize) -> Vec<Vertex> {
        self.tasks_of(agent)
            .into_iter()
            .map(|i| self.tasks[i].vertex)
            .collect()
    }

    /// Checks every scenario invariant against `map`.
    pub fn validate(&self, map: &GridMap) -> Result<(), ScenarioError> {
        if self.agents.is_empty() {
            return Err(ScenarioError::NoAgents);
        }
        let cells = map.cell_count();
        let check = |what: String, v: Vertex| -> Result<(), ScenarioError> {
            if v >= cells {
                return Err(ScenarioError::OutOfBounds {
                    what,
                    row: v / map.width(),
                    col: v % map.width(),
                });
            }
            if map.is_blocked(v) {
                return Err(ScenarioError::Blocked { what, vertex: v });
            }
            Ok(())
        };
        for (i, a) in self.agents.iter().enumerate() {
            check(format!("start of agent {i}"), a.start)?;
            check(format!("goal of agent {i}"), a.goal)?;
        }
        for (i, t) in self.tasks.iter().enumerate() {
            check(format!("task {i}"), t.vertex)?;
            if t.assignees.is_empty() {
                return Err(ScenarioError::EmptyAssignees { task: i });
            }
            if let Some(&agent) = t.assignees.iter().find(|&&a| a >= self.agents.len()) {
                return Err(ScenarioError::UnknownAgent { task: i, agent });
            }
        }
        let mut start_owner = vec![usize::MAX; cells];
        let mut goal_owner = vec![usize::MAX; cells];
        for (i, a) in self.agents.iter().enumerate() {
            if start_owner[a.start] != usize::MAX {
                return Err(ScenarioError::DuplicateStart {
                    first: start_owner[a.start],
                    second: i,
                    vertex: a.start,
                });
            }
            start_owner[a.start] = i;
            if goal_owner[a.goal] != usize::MAX {
                return Err(ScenarioError::DuplicateGoal {
                    first: goal_owner[a.goal],
                    second: i,
                    vertex: a.goal,
                });
            }
            goal_owner[a.goal] = i;
        }

        let comp = GridGraph::new(map.clone()).components();
        for (i, a) in self.agents.iter().enumerate() {
            if comp[a.goal] != comp[a.start] {
                return Err(ScenarioError::Unreachable {
                    agent: i,
                    what: "goal".into(),
                });
            }
        }
        for (ti, t) in self.tasks.iter().enumerate() {
            for &a in &t.assignees {
                if comp[t.vertex] != comp[self.agents[a].start] {
                    return Err(ScenarioError::Unreachable {
                        agent: a,
                        what: format!("task {ti}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, map: &GridMap) -> Result<Self, ScenarioError> {
        let mut agents = Vec::new();
        let mut tasks = Vec::new();
        let mut seed = 0;
        let mut seen_header = false;

        let perr = |line: usize, reason: String| ScenarioError::Parse { line, reason };

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !seen_header {
                if toks != ["cts", "1"] {
                    return Err(perr(line_no, format!("expected `cts 1` header, found {line:?}")));
                }
                seen_header = true;
                continue;
            }
            let num = |s: &str| -> Result<usize, ScenarioError> {
                s.parse()
                    .map_err(|_| perr(line_no, format!("invalid number {s:?}")))
            };
            let cell = |what: String, r: usize, c: usize| -> Result<Vertex, ScenarioError> {
                if !map.contains(r, c) {
                    return Err(ScenarioError::OutOfBounds { what, row: r, col: c });
                }
                Ok(map.vertex(r, c))
            };
            match toks[0] {
                "seed" if toks.len() == 2 => {
                    seed = toks[1]
                        .parse()
                        .map_err(|_| perr(line_no, format!("invalid seed {:?}", toks[1])))?;
                }
                "agent" if toks.len() == 6 => {
                    let id = num(toks[1])?;
                    if id != agents.len() {
                        return Err(perr(
                            line_no,
                            format!("agent id {id} out of sequence (expected {})", agents.len()),
                        ));
                    }
                    let start = cell(format!("start of agent {id}"), num(toks[2])?, num(toks[3])?)?;
                    let goal = cell(format!("goal of agent {id}"), num(toks[4])?, num(toks[5])?)?;
                    agents.push(Agent { start, goal });
                }
                "task" if toks.len() == 5 => {
                    let id = num(toks[1])?;
                    if id != tasks.len() {
                        return Err(perr(
                            line_no,
                            format!("task id {id} out of sequence (expected {})", tasks.len()),
                        ));
                    }
                    let vertex = cell(format!("task {id}"), num(toks[2])?, num(toks[3])?)?;
                    let assignees = toks[4]
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(num)
                        .collect::<Result<Vec<_>, _>>()?;
                    tasks.push(Task { vertex, assignees });
                }
                "task" if toks.len() == 4 => {
                    return Err(ScenarioError::EmptyAssignees { task: tasks.len() });
                }
                _ => return Err(perr(line_no, format!("unrecognized line {line:?}"))),
            }
        }
        if !seen_header {
            return Err(perr(1, "missing `cts 1` header".into()));
        }
        Self::new(agents, tasks, seed, map)
    }

    pub fn to_text(&self, map: &GridMap) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cts 1");
        let _ = writeln!(out, "seed {}", self.seed);
        for (i, a) in self.agents.iter().enumerate() {
            let (sr, sc) = map.coords(a.start);
            let (gr, gc) = map.coords(a.goal);
            let _ = writeln!(out, "agent {i} {sr} {sc} {gr} {gc}");
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let (r, c) = map.coords(t.vertex);
            let ids: Vec<String> = t.assignees.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "task {i} {r} {c} {}", ids.join(","));
        }
        out
    }
}

/// Draws an assignee-set size: 1 w.p. 0.7, 2 w.p. 0.2, 3 w.p. 0.1.
fn assignee_count<R: Rng + ?Sized>(rng: &mut R, n_agents: usize) -> usize {
    let u: f64 = rng.gen();
    let k = if u < 0.7 {
        1
    } else if u < 0.9 {
        2
    } else {
        3
    };
    k.min(n_agents)
}

const GENERATE_ATTEMPTS: usize = 1000;

/// Random scenario with distinct starts, distinct goals and uniformly placed
/// tasks. Deterministic in `(map, n_agents, n_tasks, seed)`.
pub fn generate_instance(
    map: &GridMap,
    n_agents: usize,
    n_tasks: usize,
    seed: u64,
) -> Result<Scenario, GenerateError> {
    let cells: Vec<Vertex> = map.passable_vertices().collect();
    if n_agents == 0 || n_agents > cells.len() {
        return Err(GenerateError::TooManyAgents {
            requested: n_agents,
            available: cells.len(),
        });
    }
    let mut rng = rng::stream(seed, rng::purpose::GENERATE, &[]);
    let agent_ids: Vec<usize> = (0..n_agents).collect();
    for _ in 0..GENERATE_ATTEMPTS {
        let starts = rng::sample(&mut rng, &cells, n_agents);
        let goals = rng::sample(&mut rng, &cells, n_agents);
        let agents = starts
            .into_iter()
            .zip(goals)
            .map(|(start, goal)| Agent { start, goal })
            .collect();
        let tasks = (0..n_tasks)
            .map(|_| {
                let vertex = cells[rng::index(&mut rng, cells.len())];
                let k = assignee_count(&mut rng, n_agents);
                Task {
                    vertex,
                    assignees: rng::sample(&mut rng, &agent_ids, k),
                }
            })
            .collect();
        if let Ok(s) = Scenario::new(agents, tasks, seed, map) {
            return Ok(s);
        }
    }
    Err(GenerateError::Exhausted {
        attempts: GENERATE_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_map() -> GridMap {
        GridMap::from_rows(&["..."]).unwrap()
    }

    #[test]
    fn parse_single_agent_line() {
        let s = Scenario::parse("cts 1\nagent 0 0 0 0 2\ntask 0 0 1 0\n", &line_map()).unwrap();
        assert_eq!(s.agents, vec![Agent { start: 0, goal: 2 }]);
        assert_eq!(s.tasks[0].vertex, 1);
        assert_eq!(s.tasks_of(0), vec![0]);
        assert_eq!(s.seed, 0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let t = "# header comment\ncts 1 # v1\n\nagent 0 0 0 0 2 # a\n";
        assert!(Scenario::parse(t, &line_map()).is_ok());
    }

    #[test]
    fn empty_assignee_set() {
        let e = Scenario::parse("cts 1\nagent 0 0 0 0 2\ntask 0 0 1\n", &line_map()).unwrap_err();
        assert_eq!(e, ScenarioError::EmptyAssignees { task: 0 });
        assert!(e.to_string().contains("empty assignee set"));
        let e = Scenario::parse("cts 1\nagent 0 0 0 0 2\ntask 0 0 1 ,\n", &line_map()).unwrap_err();
        assert_eq!(e, ScenarioError::EmptyAssignees { task: 0 });
    }

    #[test]
    fn goal_on_obstacle() {
        let m = GridMap::from_rows(&["..@"]).unwrap();
        let e = Scenario::parse("cts 1\nagent 0 0 0 0 2\n", &m).unwrap_err();
        assert!(matches!(e, ScenarioError::Blocked { .. }), "{e}");
    }

    #[test]
    fn structural_errors() {
        let m = GridMap::from_rows(&[".@.", ".@."]).unwrap();
        let cases = [
            ("cts 2\n", "header"),
            ("cts 1\nagent 0 0 0 9 9\n", "outside"),
            ("cts 1\nagent 0 0 0 1 0\nagent 1 0 0 0 0\n", "share start"),
            ("cts 1\nagent 0 0 0 1 0\nagent 1 1 0 1 0\n", "share goal"),
            ("cts 1\nagent 0 0 0 0 2\n", "unreachable"),
            ("cts 1\nagent 0 0 0 1 0\ntask 0 0 2 0\n", "unreachable"),
            ("cts 1\nagent 0 0 0 1 0\ntask 0 1 0 3\n", "unknown agent"),
            ("cts 1\nagent 1 0 0 1 0\n", "out of sequence"),
            ("cts 1\nrobot 0\n", "unrecognized"),
            ("", "missing"),
        ];
        for (text, needle) in cases {
            let e = Scenario::parse(text, &m).unwrap_err();
            assert!(e.to_string().contains(needle), "{text:?}: {e}");
        }
    }

    #[test]
    fn text_round_trip() {
        let m = GridMap::open(4, 3);
        let s = Scenario::new(
            vec![Agent { start: 0, goal: 11 }, Agent { start: 5, goal: 6 }],
            vec![
                Task { vertex: 3, assignees: vec![1, 0] },
                Task { vertex: 3, assignees: vec![1] },
            ],
            99,
            &m,
        )
        .unwrap();
        assert_eq!(s.tasks[0].assignees, vec![0, 1]);
        assert_eq!(Scenario::parse(&s.to_text(&m), &m).unwrap(), s);
    }

    #[test]
    fn generation_is_deterministic() {
        let m = GridMap::open(8, 8);
        let a = generate_instance(&m, 5, 10, 7).unwrap();
        let b = generate_instance(&m, 5, 10, 7).unwrap();
        assert_eq!(a.to_text(&m), b.to_text(&m));
        assert_eq!(a.tasks.len(), 10);
        a.validate(&m).unwrap();
        assert_ne!(a, generate_instance(&m, 5, 10, 8).unwrap());
    }

    #[test]
    fn generation_rejects_overfull_maps() {
        let m = GridMap::from_rows(&["..@", "@.."]).unwrap();
        assert!(matches!(
            generate_instance(&m, 5, 1, 0),
            Err(GenerateError::TooManyAgents { requested: 5, available: 4 })
        ));
        assert!(generate_instance(&m, 4, 3, 0).is_ok());
    }

    #[test]
    fn assignee_distribution_roughly_matches() {
        let mut rng = rng::stream(5, 0, &[]);
        let mut hist = [0usize; 4];
        for _ in 0..20_000 {
            hist[assignee_count(&mut rng, 10)] += 1;
        }
        let frac = |k: usize| hist[k] as f64 / 20_000.0;
        assert!((frac(1) - 0.7).abs() < 0.02);
        assert!((frac(2) - 0.2).abs() < 0.02);
        assert!((frac(3) - 0.1).abs() < 0.02);
        assert_eq!(assignee_count(&mut rng, 1), 1);
    }
}
