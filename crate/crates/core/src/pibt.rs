//! One-step priority inheritance with backtracking.
//!
//! Shared by the task-aware stepper and by the configuration generator of the
//! local complete solver. Agents may be pre-assigned ("forced") to vertices
//! before the step; every other agent is planned in the given order.

use rand::Rng;

use crate::grid::{GridGraph, Vertex};
use crate::rng;

const NONE: usize = usize::MAX;

/// Scratch buffers sized to the graph; reusable across steps.
#[derive(Debug, Clone)]
pub struct PibtScratch {
    occ_now: Vec<usize>,
    occ_next: Vec<usize>,
}

impl PibtScratch {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            occ_now: vec![NONE; vertex_count],
            occ_next: vec![NONE; vertex_count],
        }
    }
}

struct Step<'a, D, R> {
    graph: &'a GridGraph,
    q_from: &'a [Vertex],
    q_to: &'a mut [Option<Vertex>],
    occ_now: &'a mut [usize],
    occ_next: &'a mut [usize],
    dist: D,
    rng: &'a mut R,
}

impl<D: Fn(usize, Vertex) -> u32, R: Rng> Step<'_, D, R> {
    fn has_conflict(&self, i: usize, v: Vertex) -> bool {
        if self.occ_next[v] != NONE {
            return true;
        }
        let j = self.occ_now[v];
        j != NONE && j != i && self.q_to[j] == Some(self.q_from[i])
    }

    fn plan(&mut self, i: usize) -> bool {
        let here = self.q_from[i];
        let mut cands: Vec<(u32, Vertex)> = self
            .graph
            .neighbors(here)
            .iter()
            .chain(std::iter::once(&here))
            .map(|&v| ((self.dist)(i, v), v))
            .collect();
        // Shuffle first so the stable sort leaves equal-distance groups in
        // random order.
        rng::shuffle(self.rng, &mut cands);
        cands.sort_by_key(|&(d, _)| d);

        for &(_, v) in &cands {
            if self.has_conflict(i, v) {
                continue;
            }
            self.q_to[i] = Some(v);
            self.occ_next[v] = i;
            let j = self.occ_now[v];
            if j != NONE && j != i && self.q_to[j].is_none() && !self.plan(j) {
                continue;
            }
            return true;
        }
        self.q_to[i] = Some(here);
        self.occ_next[here] = i;
        false
    }
}

/// Plans one step from `q_from`.
///
/// Entries already `Some` in `q_to` are treated as fixed. `order` lists the
/// agents by decreasing priority; `dist(agent, v)` ranks candidate vertices.
/// Returns `false` when some top-level agent in `order` could not be placed
/// (only possible with fixed entries); the result is conflict-free whenever
/// it returns `true`.
pub fn pibt_step<D, R>(
    graph: &GridGraph,
    q_from: &[Vertex],
    q_to: &mut [Option<Vertex>],
    order: &[usize],
    dist: D,
    rng: &mut R,
    scratch: &mut PibtScratch,
) -> bool
where
    D: Fn(usize, Vertex) -> u32,
    R: Rng,
{
    for (i, &v) in q_from.iter().enumerate() {
        scratch.occ_now[v] = i;
    }
    for (i, v) in q_to.iter().enumerate() {
        if let Some(v) = *v {
            scratch.occ_next[v] = i;
        }
    }
    let mut ok = true;
    {
        let mut step = Step {
            graph,
            q_from,
            q_to: &mut *q_to,
            occ_now: &mut scratch.occ_now,
            occ_next: &mut scratch.occ_next,
            dist,
            rng,
        };
        for &i in order {
            if step.q_to[i].is_none() && !step.plan(i) {
                ok = false;
                break;
            }
        }
    }
    for &v in q_from {
        scratch.occ_now[v] = NONE;
    }
    for v in q_to.iter().flatten() {
        scratch.occ_next[*v] = NONE;
    }
    // Stale entries can survive when an agent's tentative vertex was later
    // taken over; clear the whole touched neighborhood.
    for &v in q_from {
        for &u in graph.neighbors(v) {
            scratch.occ_next[u] = NONE;
        }
        scratch.occ_next[v] = NONE;
    }
    ok && q_to.iter().all(Option::is_some)
}

/// True when `next` has no duplicate vertices, no swaps against `prev`, and
/// every move is a wait or a graph edge.
pub fn step_is_valid(graph: &GridGraph, prev: &[Vertex], next: &[Vertex]) -> bool {
    if prev.len() != next.len() {
        return false;
    }
    let mut seen = std::collections::HashMap::with_capacity(next.len());
    for (i, &v) in next.iter().enumerate() {
        if !graph.legal_move(prev[i], v) || seen.insert(v, i).is_some() {
            return false;
        }
    }
    for (i, &v) in next.iter().enumerate() {
        if v != prev[i] {
            if let Some(j) = prev.iter().position(|&u| u == v) {
                if next[j] == prev[i] {
                    return false;
                }
            }
        }
    }
    true
}
