//! Exhaustive joint-state search for tiny instances, used to check the
//! planners.
//!
//! [`solve_local`] finds a minimum-makespan path between two configurations
//! by breadth-first search. [`solve_scenario`] finds a minimum-flowtime plan
//! for a whole scenario by A* over positions, per-agent task bitmasks and a
//! "settled" flag per agent.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use thiserror::Error;

use super::LocalInstance;
use crate::dist::{DistCache, UNREACHABLE};
use crate::grid::{GridGraph, Vertex};
use crate::instance::Scenario;
use crate::plan::JointPlan;
use crate::validate::completion_times;
use crate::xpibt::Configuration;

pub const DEFAULT_STATE_BOUND: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search exceeded {0} joint states")]
    StateBound(usize),
    #[error("agent {0} has more than 32 tasks")]
    TooManyTasks(usize),
}

/// Calls `f` with every conflict-free successor of `from`. Agents with
/// `fixed[i]` stay put.
fn for_each_successor(
    graph: &GridGraph,
    from: &[Vertex],
    fixed: &[bool],
    f: &mut dyn FnMut(&[Vertex]),
) {
    fn rec(
        graph: &GridGraph,
        from: &[Vertex],
        fixed: &[bool],
        next: &mut Vec<Vertex>,
        f: &mut dyn FnMut(&[Vertex]),
    ) {
        let i = next.len();
        if i == from.len() {
            f(next);
            return;
        }
        let here = from[i];
        let stay = [here];
        let moves: &[Vertex] = if fixed[i] { &stay } else { graph.neighbors(here) };
        for &v in moves.iter().chain(if fixed[i] { &[][..] } else { &stay[..] }) {
            if next.contains(&v) {
                continue;
            }
            // swap with an earlier agent
            if v != here && (0..i).any(|j| from[j] == v && next[j] == here) {
                continue;
            }
            next.push(v);
            rec(graph, from, fixed, next, f);
            next.pop();
        }
    }
    let mut next = Vec::with_capacity(from.len());
    rec(graph, from, fixed, &mut next, f);
}

/// Minimum-makespan configuration sequence, or `None` if unsolvable.
pub fn solve_local(inst: &LocalInstance, bound: usize) -> Result<Option<Vec<Configuration>>, OracleError> {
    let graph = &*inst.graph;
    let fixed = vec![false; inst.agent_count()];
    let mut parent: HashMap<Configuration, Option<Configuration>> = HashMap::new();
    parent.insert(inst.starts.clone(), None);
    let mut queue = VecDeque::from([inst.starts.clone()]);
    while let Some(q) = queue.pop_front() {
        if inst.is_goal(&q) {
            let mut seq = vec![q.clone()];
            let mut at = q;
            while let Some(Some(p)) = parent.get(&at) {
                seq.push(p.clone());
                at = p.clone();
            }
            seq.reverse();
            return Ok(Some(seq));
        }
        let mut fresh = Vec::new();
        for_each_successor(graph, &q, &fixed, &mut |next| {
            if !parent.contains_key(next) {
                fresh.push(next.to_vec());
            }
        });
        for next in fresh {
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some(q.clone()));
            if parent.len() > bound {
                return Err(OracleError::StateBound(bound));
            }
            queue.push_back(next);
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    pos: Vec<Vertex>,
    done: Vec<u32>,
    settled: u64,
}

/// Minimum-flowtime plan for the whole scenario, or `None` if none exists.
pub fn solve_scenario(
    scenario: &Scenario,
    dist: &DistCache,
    bound: usize,
) -> Result<Option<JointPlan>, OracleError> {
    let graph = dist.graph();
    let n = scenario.agent_count();
    assert!(n <= 64, "oracle supports at most 64 agents");
    let tasks: Vec<Vec<Vertex>> = (0..n).map(|i| scenario.task_vertices_of(i)).collect();
    if let Some(i) = tasks.iter().position(|t| t.len() > 32) {
        return Err(OracleError::TooManyTasks(i));
    }
    let full: Vec<u32> = tasks.iter().map(|t| ((1u64 << t.len()) - 1) as u32).collect();
    let mark = |i: usize, v: Vertex, mut m: u32| {
        for (k, &tv) in tasks[i].iter().enumerate() {
            if tv == v {
                m |= 1 << k;
            }
        }
        m
    };

    // Remaining-tour lower bound per (agent, position, done mask).
    let mut tour_memo: HashMap<(usize, Vertex, u32), u32> = HashMap::new();
    let mut tour = |i: usize, v: Vertex, m: u32| -> u32 {
        *tour_memo.entry((i, v, m)).or_insert_with(|| remaining_tour(dist, &tasks[i], scenario.agents[i].goal, v, m))
    };

    let start = State {
        pos: scenario.agents.iter().map(|a| a.start).collect(),
        done: (0..n).map(|i| mark(i, scenario.agents[i].start, 0)).collect(),
        settled: 0,
    };
    let mut h_of = |s: &State| -> Option<u64> {
        let mut h = 0u64;
        for i in 0..n {
            if s.settled >> i & 1 == 0 {
                let c = tour(i, s.pos[i], s.done[i]);
                if c == UNREACHABLE {
                    return None;
                }
                h += c as u64;
            }
        }
        Some(h)
    };

    struct Rec {
        state: State,
        g: u64,
        parent: Option<usize>,
        closed: bool,
    }
    let Some(h0) = h_of(&start) else { return Ok(None) };
    let mut recs = vec![Rec { state: start.clone(), g: 0, parent: None, closed: false }];
    let mut index: HashMap<State, usize> = HashMap::from([(start, 0)]);
    // (f, deeper first, id)
    let mut heap = BinaryHeap::from([Reverse((h0, Reverse(0u64), 0usize))]);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    while let Some(Reverse((_, Reverse(g), id))) = heap.pop() {
        if recs[id].closed || recs[id].g != g {
            continue;
        }
        recs[id].closed = true;
        let state = recs[id].state.clone();
        if state.settled == all {
            let mut chain = Vec::new();
            let mut at = Some(id);
            while let Some(k) = at {
                chain.push(&recs[k].state.pos);
                at = recs[k].parent;
            }
            chain.reverse();
            return Ok(Some(build_plan(scenario, &chain)));
        }
        let mut succ: Vec<(State, u64)> = Vec::new();
        // settle transitions (free)
        for i in 0..n {
            if state.settled >> i & 1 == 0 && state.done[i] == full[i] && state.pos[i] == scenario.agents[i].goal {
                let mut s = state.clone();
                s.settled |= 1 << i;
                succ.push((s, 0));
            }
        }
        let fixed: Vec<bool> = (0..n).map(|i| state.settled >> i & 1 == 1).collect();
        let cost = (n - state.settled.count_ones() as usize) as u64;
        for_each_successor(graph, &state.pos, &fixed, &mut |next| {
            let done = (0..n).map(|i| mark(i, next[i], state.done[i])).collect();
            succ.push((State { pos: next.to_vec(), done, settled: state.settled }, cost));
        });
        for (s, c) in succ {
            let ng = g + c;
            let Some(h) = h_of(&s) else { continue };
            match index.entry(s) {
                Entry::Occupied(e) => {
                    let k = *e.get();
                    if !recs[k].closed && ng < recs[k].g {
                        recs[k].g = ng;
                        recs[k].parent = Some(id);
                        heap.push(Reverse((ng + h, Reverse(ng), k)));
                    }
                }
                Entry::Vacant(e) => {
                    let k = recs.len();
                    recs.push(Rec { state: e.key().clone(), g: ng, parent: Some(id), closed: false });
                    e.insert(k);
                    if recs.len() > bound {
                        return Err(OracleError::StateBound(bound));
                    }
                    heap.push(Reverse((ng + h, Reverse(ng), k)));
                }
            }
        }
    }
    Ok(None)
}

/// Shortest walk from `v` through the unvisited tasks (any order) to `goal`,
/// by brute force over orders.
fn remaining_tour(dist: &DistCache, tasks: &[Vertex], goal: Vertex, v: Vertex, done: u32) -> u32 {
    let left: Vec<Vertex> = tasks.iter().enumerate().filter(|(k, _)| done >> k & 1 == 0).map(|(_, &t)| t).collect();
    // Held-Karp over the remaining tasks.
    let m = left.len();
    if m == 0 {
        return dist.raw(v, goal);
    }
    let size = 1usize << m;
    let mut best = vec![vec![UNREACHABLE; m]; size];
    for (k, &t) in left.iter().enumerate() {
        best[1 << k][k] = dist.raw(v, t);
    }
    for mask in 1..size {
        for k in 0..m {
            let cur = best[mask][k];
            if mask >> k & 1 == 0 || cur == UNREACHABLE {
                continue;
            }
            for j in 0..m {
                if mask >> j & 1 == 1 {
                    continue;
                }
                let d = dist.raw(left[k], left[j]);
                if d == UNREACHABLE {
                    continue;
                }
                let nm = mask | 1 << j;
                best[nm][j] = best[nm][j].min(cur + d);
            }
        }
    }
    (0..m)
        .filter_map(|k| {
            let a = best[size - 1][k];
            let b = dist.raw(left[k], goal);
            (a != UNREACHABLE && b != UNREACHABLE).then(|| a + b)
        })
        .min()
        .unwrap_or(UNREACHABLE)
}

fn build_plan(scenario: &Scenario, chain: &[&Vec<Vertex>]) -> JointPlan {
    let n = scenario.agent_count();
    let mut paths: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for (k, pos) in chain.iter().enumerate() {
        // settle transitions repeat the same positions without a time step
        if k > 0 && chain[k - 1] == *pos {
            continue;
        }
        for i in 0..n {
            paths[i].push(pos[i]);
        }
    }
    let completion = completion_times(&paths, scenario);
    JointPlan::new(paths, completion, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::instance::{Agent, Task};
    use crate::validate::validate;
    use std::sync::Arc;

    fn setup(rows: &[&str]) -> (GridMap, Arc<GridGraph>, DistCache) {
        let map = GridMap::from_rows(rows).unwrap();
        let g = Arc::new(GridGraph::new(map.clone()));
        (map, g.clone(), DistCache::new(g))
    }

    #[test]
    fn one_agent_one_task_on_a_line() {
        let (map, g, d) = setup(&["....."]);
        let sc = Scenario::new(vec![Agent { start: 2, goal: 4 }], vec![Task::new(0, vec![0])], 0, &map).unwrap();
        let plan = solve_scenario(&sc, &d, DEFAULT_STATE_BOUND).unwrap().unwrap();
        assert_eq!(plan.flowtime(), Some(6));
        assert!(validate(&plan, &sc, &g).is_ok());
    }

    #[test]
    fn corridor_with_passing_bay() {
        // Row 0: 5-cell corridor; (1,2) is a bay. Two agents swap ends.
        // Neither can run straight through (the other cannot reach the bay
        // in time), so one agent waits a step: 0,1,1,2,3,4 while the other
        // ducks 4,3,2,7,2,1,0 -> 5 + 6.
        let (map, g, d) = setup(&[".....", "@@.@@"]);
        let sc = Scenario::new(vec![Agent { start: 0, goal: 4 }, Agent { start: 4, goal: 0 }], vec![], 0, &map)
            .unwrap();
        let plan = solve_scenario(&sc, &d, DEFAULT_STATE_BOUND).unwrap().unwrap();
        assert!(validate(&plan, &sc, &g).is_ok());
        assert_eq!(plan.flowtime(), Some(11));
        assert_eq!(plan.makespan(), Some(6));
    }

    #[test]
    fn impossible_swap_is_none() {
        let (map, _, d) = setup(&["..."]);
        let sc = Scenario::new(vec![Agent { start: 0, goal: 2 }, Agent { start: 2, goal: 0 }], vec![], 0, &map)
            .unwrap();
        assert_eq!(solve_scenario(&sc, &d, DEFAULT_STATE_BOUND), Ok(None));
    }

    #[test]
    fn state_bound_is_enforced() {
        let (map, _, d) = setup(&["....", "....", "....", "...."]);
        let sc = Scenario::new(
            vec![Agent { start: 0, goal: 15 }, Agent { start: 15, goal: 0 }, Agent { start: 3, goal: 12 }],
            vec![],
            0,
            &map,
        )
        .unwrap();
        assert_eq!(solve_scenario(&sc, &d, 10), Err(OracleError::StateBound(10)));
    }

    #[test]
    fn local_bfs_is_minimal() {
        let g = Arc::new(GridGraph::new(GridMap::from_rows(&["...", "@.@"]).unwrap()));
        let inst = LocalInstance::new(g, vec![0, 2], vec![2, 0], vec![0, 1]).unwrap();
        let seq = solve_local(&inst, DEFAULT_STATE_BOUND).unwrap().unwrap();
        assert_eq!(seq.len() - 1, brute_makespan(&inst));
    }

    /// Iterative deepening over joint moves.
    fn brute_makespan(inst: &LocalInstance) -> usize {
        fn reach(g: &GridGraph, q: &[Vertex], goal: &[Vertex], depth: usize) -> bool {
            if q == goal {
                return true;
            }
            if depth == 0 {
                return false;
            }
            let mut found = false;
            for_each_successor(g, q, &vec![false; q.len()], &mut |n| {
                if !found && reach(g, n, goal, depth - 1) {
                    found = true;
                }
            });
            found
        }
        let goal: Vec<Vertex> = inst.goals.iter().map(|g| g.unwrap()).collect();
        (0..12).find(|&k| reach(&inst.graph, &inst.starts, &goal, k)).unwrap()
    }
}
