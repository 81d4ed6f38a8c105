//! Exact BFS distances, memoized per target vertex.

use std::collections::VecDeque;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::grid::{GridGraph, Vertex};

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("vertex {0} is blocked or outside the map")]
    Blocked(Vertex),
}

/// Distances from every vertex to one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistTable {
    pub target: Vertex,
    pub dist: Vec<u32>,
}

impl DistTable {
    pub fn build(graph: &GridGraph, target: Vertex) -> Self {
        let mut dist = vec![UNREACHABLE; graph.vertex_count()];
        if graph.is_passable(target) {
            dist[target] = 0;
            let mut queue = VecDeque::from([target]);
            while let Some(u) = queue.pop_front() {
                let d = dist[u] + 1;
                for &v in graph.neighbors(u) {
                    if dist[v] == UNREACHABLE {
                        dist[v] = d;
                        queue.push_back(v);
                    }
                }
            }
        }
        Self { target, dist }
    }

    pub fn get(&self, from: Vertex) -> Option<u32> {
        match self.dist.get(from) {
            Some(&d) if d != UNREACHABLE => Some(d),
            _ => None,
        }
    }
}

/// Lazily built per-target tables; safe to share across threads.
#[derive(Debug)]
pub struct DistCache {
    graph: Arc<GridGraph>,
    tables: Vec<OnceLock<DistTable>>,
}

impl DistCache {
    pub fn new(graph: Arc<GridGraph>) -> Self {
        let tables = (0..graph.vertex_count()).map(|_| OnceLock::new()).collect();
        Self { graph, tables }
    }

    pub fn graph(&self) -> &GridGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<GridGraph> {
        &self.graph
    }

    pub fn table(&self, target: Vertex) -> &DistTable {
        self.tables[target].get_or_init(|| DistTable::build(&self.graph, target))
    }

    /// Raw distance, [`UNREACHABLE`] when disconnected or blocked.
    pub fn raw(&self, from: Vertex, to: Vertex) -> u32 {
        if to >= self.tables.len() {
            return UNREACHABLE;
        }
        self.table(to).dist.get(from).copied().unwrap_or(UNREACHABLE)
    }

    /// Shortest-path length, `Ok(None)` when the vertices are disconnected.
    pub fn distance(&self, from: Vertex, to: Vertex) -> Result<Option<u32>, DistError> {
        for v in [from, to] {
            if !self.graph.is_passable(v) {
                return Err(DistError::Blocked(v));
            }
        }
        Ok(self.table(to).get(from))
    }

    /// Length of the walk `start -> order[0] -> ... -> goal` built from
    /// shortest legs; `Ok(None)` if any leg is disconnected.
    pub fn tour_cost(
        &self,
        start: Vertex,
        order: &[Vertex],
        goal: Vertex,
    ) -> Result<Option<u32>, DistError> {
        let mut total = 0u32;
        let mut at = start;
        for &next in order.iter().chain(std::iter::once(&goal)) {
            match self.distance(at, next)? {
                Some(d) => total += d,
                None => return Ok(None),
            }
            at = next;
        }
        Ok(Some(total))
    }

    /// Unchecked [`Self::tour_cost`] for hot paths over validated vertices.
    pub fn tour_cost_raw(&self, start: Vertex, order: &[Vertex], goal: Vertex) -> u32 {
        let mut total = 0u32;
        let mut at = start;
        for &next in order.iter().chain(std::iter::once(&goal)) {
            let d = self.raw(at, next);
            if d == UNREACHABLE {
                return UNREACHABLE;
            }
            total += d;
            at = next;
        }
        total
    }

    /// Vertices lying on at least one shortest path from `from` to `to`.
    pub fn on_shortest_path(&self, from: Vertex, to: Vertex, v: Vertex) -> bool {
        let d = self.raw(from, to);
        if d == UNREACHABLE {
            return false;
        }
        let a = self.raw(from, v);
        let b = self.raw(v, to);
        a != UNREACHABLE && b != UNREACHABLE && a + b == d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use proptest::prelude::*;

    fn cache(rows: &[&str]) -> DistCache {
        DistCache::new(Arc::new(GridGraph::new(GridMap::from_rows(rows).unwrap())))
    }

    #[test]
    fn corner_to_corner() {
        let d = cache(&["...", "...", "..."]);
        assert_eq!(d.distance(0, 8), Ok(Some(4)));
        assert_eq!(d.distance(4, 4), Ok(Some(0)));
    }

    #[test]
    fn wall_separates() {
        let d = cache(&[".@.", ".@."]);
        assert_eq!(d.distance(0, 2), Ok(None));
        assert_eq!(d.distance(0, 1), Err(DistError::Blocked(1)));
        assert_eq!(d.raw(0, 2), UNREACHABLE);
    }

    #[test]
    fn detour_around_wall() {
        let d = cache(&["...", ".@.", "..."]);
        assert_eq!(d.distance(3, 5), Ok(Some(4)));
    }

    #[test]
    fn tours() {
        let d = DistCache::new(Arc::new(GridGraph::new(GridMap::open(5, 5))));
        assert_eq!(d.tour_cost(0, &[2], 4), Ok(Some(4)));
        assert_eq!(d.tour_cost(0, &[], 24), d.distance(0, 24));
        let w = cache(&[".@."]);
        assert_eq!(w.tour_cost(0, &[0], 2), Ok(None));
    }

    /// Shortest walk through a fixed visiting order by BFS over
    /// (position, next-index) states.
    fn walk_oracle(g: &GridGraph, start: Vertex, order: &[Vertex], goal: Vertex) -> u32 {
        let mut targets = order.to_vec();
        targets.push(goal);
        let advance = |mut i: usize, v: Vertex| {
            while i < targets.len() && targets[i] == v {
                i += 1;
            }
            i
        };
        let n = g.vertex_count();
        let mut seen = vec![false; n * (targets.len() + 1)];
        let s = (start, advance(0, start));
        seen[s.0 * (targets.len() + 1) + s.1] = true;
        let mut q = VecDeque::from([(s, 0u32)]);
        while let Some(((v, i), d)) = q.pop_front() {
            if i == targets.len() {
                return d;
            }
            for &u in g.neighbors(v) {
                let j = advance(i, u);
                let key = u * (targets.len() + 1) + j;
                if !seen[key] {
                    seen[key] = true;
                    q.push_back(((u, j), d + 1));
                }
            }
        }
        UNREACHABLE
    }

    #[test]
    fn three_corner_tour_matches_walk_oracle() {
        let g = Arc::new(GridGraph::new(GridMap::open(4, 4)));
        let d = DistCache::new(g.clone());
        let corners = [3, 15, 12];
        for start in [0, 5, 10] {
            for goal in [0, 6, 9] {
                let want = walk_oracle(&g, start, &corners, goal);
                assert_eq!(d.tour_cost(start, &corners, goal), Ok(Some(want)));
            }
        }
    }

    fn random_map() -> impl Strategy<Value = GridMap> {
        (2usize..7, 2usize..7)
            .prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(prop::bool::weighted(0.25), w * h)))
            .prop_filter_map("needs open cell", |(w, h, mut b)| {
                b[0] = false;
                GridMap::new(w, h, b).ok()
            })
    }

    proptest! {
        #[test]
        fn metric_laws(map in random_map(), seed in any::<u64>()) {
            let g = Arc::new(GridGraph::new(map.clone()));
            let d = DistCache::new(g.clone());
            let cells: Vec<Vertex> = map.passable_vertices().collect();
            let pick = |k: u64| cells[(seed.wrapping_mul(k + 1) >> 7) as usize % cells.len()];
            let (a, b, c) = (pick(1), pick(2), pick(3));
            prop_assert_eq!(d.distance(a, b).unwrap(), d.distance(b, a).unwrap());
            if let (Some(ab), Some(bc), Some(ac)) =
                (d.raw_opt(a, b), d.raw_opt(b, c), d.raw_opt(a, c))
            {
                prop_assert!(ac <= ab + bc);
            }
            // cache transparency
            let fresh = DistTable::build(&g, b).get(a);
            prop_assert_eq!(d.distance(a, b).unwrap(), fresh);
            // tour never beats the direct route
            if let Ok(Some(t)) = d.tour_cost(a, &[c], b) {
                prop_assert!(t >= d.distance(a, b).unwrap().unwrap());
            }
            // table invariant: every finite non-target vertex has a downhill neighbor
            let t = d.table(b);
            for &v in &cells {
                if v != b && t.dist[v] != UNREACHABLE {
                    prop_assert!(g.neighbors(v).iter().any(|&u| t.dist[u] + 1 == t.dist[v]));
                }
            }
        }
    }

    impl DistCache {
        fn raw_opt(&self, a: Vertex, b: Vertex) -> Option<u32> {
            Some(self.raw(a, b)).filter(|&d| d != UNREACHABLE)
        }
    }
}
