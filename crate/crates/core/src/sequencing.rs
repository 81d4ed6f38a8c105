//! Ranked task orders per agent and lazy K-best enumeration of their
//! combinations.
//!
//! Each agent's orders are scored by the BFS tour cost
//! `start -> tasks... -> goal`. Agents with at most
//! [`EXHAUSTIVE_TASK_LIMIT`] tasks are enumerated exactly; larger task sets
//! fall back to distinct local optima of cheapest insertion followed by 2-opt
//! and or-opt. Joint sequences are then produced in non-decreasing total cost
//! by best-first search over per-agent rank vectors.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use crate::dist::{DistCache, UNREACHABLE};
use crate::grid::Vertex;
use crate::instance::Scenario;
use crate::rng;

pub const EXHAUSTIVE_TASK_LIMIT: usize = 8;
/// Orders kept per agent when the task set is too large to enumerate.
pub const HEURISTIC_ORDER_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentSequence {
    pub agent: usize,
    pub order: Vec<Vertex>,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointSequence {
    pub per_agent: Vec<AgentSequence>,
    pub total_cost: u64,
    /// 1-based position in the enumeration.
    pub rank: usize,
}

impl JointSequence {
    pub fn order(&self, agent: usize) -> &[Vertex] {
        &self.per_agent[agent].order
    }
}

/// The `limit` cheapest orders of the agent's tasks, ascending by cost with
/// ties broken by the vertex sequence.
pub fn agent_orders(
    scenario: &Scenario,
    dist: &DistCache,
    agent: usize,
    limit: usize,
) -> Vec<AgentSequence> {
    let a = scenario.agents[agent];
    let mut tasks = scenario.task_vertices_of(agent);
    tasks.sort_unstable();
    let cost = |order: &[Vertex]| dist.tour_cost_raw(a.start, order, a.goal);

    let mut orders: Vec<(u32, Vec<Vertex>)> = if tasks.len() <= EXHAUSTIVE_TASK_LIMIT {
        let mut out = Vec::new();
        for_each_distinct_permutation(&mut tasks, &mut |p| out.push((cost(p), p.to_vec())));
        out
    } else {
        let mut seen = BTreeSet::new();
        let attempts = limit.clamp(1, HEURISTIC_ORDER_LIMIT) * 4;
        for i in 0..attempts {
            let order = local_optimum(dist, a.start, a.goal, &tasks, i as u64);
            seen.insert((cost(&order), order));
        }
        seen.into_iter().collect()
    };
    orders.sort_unstable();
    orders.truncate(limit.max(1));
    orders
        .into_iter()
        .map(|(cost, order)| AgentSequence { agent, order, cost })
        .collect()
}

/// Visits every distinct permutation of a sorted multiset in lexicographic
/// order.
fn for_each_distinct_permutation(items: &mut [Vertex], f: &mut dyn FnMut(&[Vertex])) {
    loop {
        f(items);
        // next_permutation
        let n = items.len();
        if n < 2 {
            return;
        }
        let mut i = n - 1;
        while i > 0 && items[i - 1] >= items[i] {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let mut j = n - 1;
        while items[j] <= items[i - 1] {
            j -= 1;
        }
        items.swap(i - 1, j);
        items[i..].reverse();
    }
}

fn route_cost(dist: &DistCache, start: Vertex, order: &[Vertex], goal: Vertex) -> u64 {
    let c = dist.tour_cost_raw(start, order, goal);
    if c == UNREACHABLE {
        u64::MAX / 4
    } else {
        c as u64
    }
}

/// Cheapest insertion in a variant-specific order, polished with 2-opt and
/// or-opt moves until no move improves.
fn local_optimum(dist: &DistCache, start: Vertex, goal: Vertex, tasks: &[Vertex], variant: u64) -> Vec<Vertex> {
    let d = |u: Vertex, v: Vertex| dist.raw(u, v) as u64;
    let mut pending = tasks.to_vec();
    if variant == 0 {
        pending.sort_by_key(|&v| Reverse((d(start, v), v)));
    } else {
        let mut r = rng::stream(variant, rng::purpose::GENERATE, &[start as u64, goal as u64]);
        rng::shuffle(&mut r, &mut pending);
    }

    let mut order: Vec<Vertex> = Vec::with_capacity(tasks.len());
    for v in pending {
        let mut best = (u64::MAX, 0);
        for pos in 0..=order.len() {
            let prev = if pos == 0 { start } else { order[pos - 1] };
            let next = if pos == order.len() { goal } else { order[pos] };
            let delta = d(prev, v) + d(v, next) - d(prev, next);
            if delta < best.0 {
                best = (delta, pos);
            }
        }
        order.insert(best.1, v);
    }

    let mut best = route_cost(dist, start, &order, goal);
    loop {
        let mut improved = false;
        // 2-opt: reverse order[i..=j]
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                order[i..=j].reverse();
                let c = route_cost(dist, start, &order, goal);
                if c < best {
                    best = c;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
        // or-opt: relocate one task
        for i in 0..order.len() {
            for j in 0..order.len() {
                if i == j {
                    continue;
                }
                let v = order.remove(i);
                order.insert(j, v);
                let c = route_cost(dist, start, &order, goal);
                if c < best {
                    best = c;
                    improved = true;
                } else {
                    let v = order.remove(j);
                    order.insert(i, v);
                }
            }
        }
        if !improved {
            return order;
        }
    }
}

/// Lazy enumerator of joint sequences in non-decreasing total cost.
///
/// Ties are broken by the lexicographic order of the per-agent rank vector,
/// so the ranking is a pure function of the scenario.
#[derive(Debug, Clone)]
pub struct JointSequences {
    lists: Vec<Vec<AgentSequence>>,
    heap: BinaryHeap<Reverse<(u64, Vec<u32>)>>,
    visited: HashSet<Vec<u32>>,
    produced: usize,
}

impl JointSequences {
    pub fn new(scenario: &Scenario, dist: &DistCache) -> Self {
        let lists = (0..scenario.agent_count())
            .map(|a| agent_orders(scenario, dist, a, usize::MAX))
            .collect();
        Self::from_lists(lists)
    }

    /// Enumerates combinations of pre-ranked per-agent lists.
    pub fn from_lists(lists: Vec<Vec<AgentSequence>>) -> Self {
        let mut heap = BinaryHeap::new();
        let mut visited = HashSet::new();
        if lists.iter().all(|l| !l.is_empty()) {
            let root = vec![0u32; lists.len()];
            let total = lists.iter().map(|l| l[0].cost as u64).sum();
            visited.insert(root.clone());
            heap.push(Reverse((total, root)));
        }
        Self {
            lists,
            heap,
            visited,
            produced: 0,
        }
    }

    /// Number of orders available for each agent.
    pub fn list_lengths(&self) -> Vec<usize> {
        self.lists.iter().map(Vec::len).collect()
    }
}

impl Iterator for JointSequences {
    type Item = JointSequence;

    fn next(&mut self) -> Option<JointSequence> {
        let Reverse((total, ranks)) = self.heap.pop()?;
        for i in 0..ranks.len() {
            let r = ranks[i] as usize + 1;
            if r < self.lists[i].len() {
                let mut succ = ranks.clone();
                succ[i] += 1;
                if self.visited.insert(succ.clone()) {
                    let t = total - self.lists[i][r - 1].cost as u64 + self.lists[i][r].cost as u64;
                    self.heap.push(Reverse((t, succ)));
                }
            }
        }
        self.produced += 1;
        Some(JointSequence {
            per_agent: ranks
                .iter()
                .enumerate()
                .map(|(a, &r)| self.lists[a][r as usize].clone())
                .collect(),
            total_cost: total,
            rank: self.produced,
        })
    }
}

/// The `k`-th (1-based) cheapest joint sequence, `None` once exhausted.
pub fn kth_joint_sequence(scenario: &Scenario, dist: &DistCache, k: usize) -> Option<JointSequence> {
    if k == 0 {
        return None;
    }
    JointSequences::new(scenario, dist).nth(k - 1)
}
