//! Anytime refinement of a feasible plan by destroy-and-repair with
//! adaptively weighted neighborhood strategies. Task orders are kept fixed.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::dist::UNREACHABLE;
use crate::grid::{GridGraph, Vertex};
use crate::plan::{JointPlan, Path};
use crate::rng;
use crate::validate::{completion_times, validate};
use crate::xpibt::EpisodeContext;

pub const NEIGHBORHOOD_CAP: usize = 8;
pub const GAMMA: f64 = 0.1;
pub const DELTA: f64 = 1.0;
pub const INITIAL_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Intersection,
    RandomWalk,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Intersection, Strategy::RandomWalk];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Random => "random",
            Strategy::Intersection => "intersection",
            Strategy::RandomWalk => "random_walk",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyWeights {
    pub w: [f64; 3],
    pub gamma: f64,
    /// Smoothing added to every weight before normalizing.
    pub delta: f64,
}

impl Default for StrategyWeights {
    fn default() -> Self {
        Self { w: [INITIAL_WEIGHT; 3], gamma: GAMMA, delta: DELTA }
    }
}

impl StrategyWeights {
    pub fn weight(&self, s: Strategy) -> f64 {
        self.w[s.index()]
    }

    pub fn probabilities(&self) -> [f64; 3] {
        let shifted = self.w.map(|w| w + self.delta);
        let total: f64 = shifted.iter().sum();
        if total > 0.0 {
            shifted.map(|x| x / total)
        } else {
            [1.0 / 3.0; 3]
        }
    }

    pub fn choose<R: Rng>(&self, rng: &mut R) -> Strategy {
        let p = self.probabilities();
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        for s in Strategy::ALL {
            acc += p[s.index()];
            if x < acc {
                return s;
            }
        }
        Strategy::RandomWalk
    }
}

/// Applies the moving-average update for `s` and returns the cost saving.
pub fn update_weight(weights: &mut StrategyWeights, s: Strategy, removed: &[usize], repaired: &[usize]) -> f64 {
    let delta = removed.iter().sum::<usize>() as f64 - repaired.iter().sum::<usize>() as f64;
    let w = &mut weights.w[s.index()];
    *w = (1.0 - weights.gamma) * *w + weights.gamma * delta.max(0.0);
    delta
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub agents: Vec<usize>,
    pub strategy: Strategy,
}

/// Draws a strategy and lets it pick at most `cap` agents.
pub fn select_neighborhood<R: Rng>(
    plan: &JointPlan,
    ctx: &EpisodeContext,
    weights: &StrategyWeights,
    cap: usize,
    rng: &mut R,
) -> Neighborhood {
    let strategy = weights.choose(rng);
    let agents = neighborhood_for(strategy, plan, ctx, cap, rng);
    Neighborhood { agents, strategy }
}

pub fn neighborhood_for<R: Rng>(
    strategy: Strategy,
    plan: &JointPlan,
    ctx: &EpisodeContext,
    cap: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n = plan.agent_count();
    let cap = cap.clamp(1, n.max(1));
    let all: Vec<usize> = (0..n).collect();
    let mut agents = match strategy {
        Strategy::Random => rng::sample(rng, &all, cap),
        Strategy::Intersection => intersection(plan, cap, rng),
        Strategy::RandomWalk => random_walk(plan, ctx, cap, rng),
    };
    agents.sort_unstable();
    agents
}

/// Distinct agents per vertex, highest first (ties in random order).
fn vertex_ranking<R: Rng>(plan: &JointPlan, rng: &mut R) -> Vec<(Vertex, Vec<usize>)> {
    let mut visitors: HashMap<Vertex, Vec<usize>> = HashMap::new();
    for (a, path) in plan.paths.iter().enumerate() {
        let mut seen = HashSet::new();
        for &v in path {
            if seen.insert(v) {
                visitors.entry(v).or_default().push(a);
            }
        }
    }
    let mut ranked: Vec<(Vertex, Vec<usize>)> = visitors.into_iter().collect();
    ranked.sort_unstable_by_key(|(v, _)| *v);
    rng::shuffle(rng, &mut ranked);
    ranked.sort_by_key(|(_, a)| Reverse(a.len()));
    ranked
}

fn intersection<R: Rng>(plan: &JointPlan, cap: usize, rng: &mut R) -> Vec<usize> {
    let ranked = vertex_ranking(plan, rng);
    let mut picked: Vec<usize> = Vec::new();
    for (_, agents) in &ranked {
        for &a in agents {
            if !picked.contains(&a) {
                picked.push(a);
            }
        }
        if picked.len() >= 2 {
            break;
        }
    }
    if picked.len() > cap {
        picked = rng::sample(rng, &picked, cap);
    }
    picked
}

fn random_walk<R: Rng>(plan: &JointPlan, ctx: &EpisodeContext, cap: usize, rng: &mut R) -> Vec<usize> {
    let n = plan.agent_count();
    let delay = |j: usize| {
        let t = plan.completion[j].unwrap_or(plan.horizon());
        let lb = ctx.remaining_cost(j, ctx.scenario.agents[j].start, 0);
        t as i64 - if lb == UNREACHABLE { 0 } else { lb as i64 }
    };
    let worst = (0..n).map(delay).max().unwrap_or(0);
    let candidates: Vec<usize> = (0..n).filter(|&j| delay(j) == worst).collect();
    let j = candidates[rng::index(rng, candidates.len())];
    let mut picked = vec![j];
    let graph = ctx.dist.graph();
    let end = plan.completion[j].unwrap_or(plan.horizon()).max(1);
    let t0 = rng::index(rng, end + 1);
    for k in 0..=end {
        if picked.len() >= cap {
            break;
        }
        let t = (t0 + k) % (end + 1);
        let here = plan.at(j, t);
        for a in 0..n {
            if picked.len() >= cap {
                break;
            }
            let v = plan.at(a, t);
            if a != j && !picked.contains(&a) && (v == here || graph.adjacent(here, v)) {
                picked.push(a);
            }
        }
    }
    picked
}

/// Space-time occupancy of the preserved paths. A path's last vertex stays
/// occupied forever.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReservationTable {
    vertex: HashSet<(Vertex, usize)>,
    /// Moves `(from, to, t)` made between `t` and `t + 1`.
    edges: HashSet<(Vertex, Vertex, usize)>,
    /// Vertex -> time from which some agent is parked there forever.
    parked: HashMap<Vertex, usize>,
    /// Latest time a vertex is used by a non-parked visit.
    last_use: HashMap<Vertex, usize>,
    /// No reservation changes after this time.
    settled_after: usize,
}

impl ReservationTable {
    pub fn from_paths<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Self {
        let mut t = Self::default();
        for p in paths {
            t.add(p);
        }
        t
    }

    pub fn add(&mut self, path: &Path) {
        let Some((&last, body)) = path.split_last() else { return };
        let mut end = body.len();
        while end > 0 && body[end - 1] == last {
            end -= 1;
        }
        for (t, &v) in path[..end].iter().enumerate() {
            self.vertex.insert((v, t));
            let lu = self.last_use.entry(v).or_insert(t);
            *lu = (*lu).max(t);
            let next = path[t + 1];
            if next != v {
                self.edges.insert((v, next, t));
            }
        }
        self.parked.insert(last, end);
        self.settled_after = self.settled_after.max(end);
    }

    /// Time after which the table no longer changes.
    pub fn settled_after(&self) -> usize {
        self.settled_after
    }

    pub fn vertex_free(&self, v: Vertex, t: usize) -> bool {
        !self.vertex.contains(&(v, t)) && self.parked.get(&v).is_none_or(|&p| t < p)
    }

    /// Whether moving `u -> v` between `t` and `t + 1` swaps with someone.
    pub fn edge_free(&self, u: Vertex, v: Vertex, t: usize) -> bool {
        u == v || !self.edges.contains(&(v, u, t))
    }

    /// Whether an agent may occupy `v` from `t` onward.
    pub fn free_forever_from(&self, v: Vertex, t: usize) -> bool {
        !self.parked.contains_key(&v) && self.last_use.get(&v).is_none_or(|&lu| lu < t)
    }
}

/// Earliest-arrival path visiting `order` then parking at `goal`, avoiding
/// the reservations. `None` if no such path ends within `max_time`.
pub fn plan_agent(
    ctx: &EpisodeContext,
    agent: usize,
    table: &ReservationTable,
    max_time: usize,
) -> Option<Path> {
    let graph: &GridGraph = ctx.dist.graph();
    let order = &ctx.orders[agent];
    let start = ctx.scenario.agents[agent].start;
    let goal = ctx.scenario.agents[agent].goal;
    let m = order.len();
    let advance = |mut seg: usize, v: Vertex| {
        while seg < m && order[seg] == v {
            seg += 1;
        }
        seg
    };
    // suffix[s]: tour cost from order[s] through the rest to the goal
    let mut suffix = vec![0u32; m + 1];
    for s in (0..m).rev() {
        let next = order.get(s + 1).copied().unwrap_or(goal);
        suffix[s] = ctx.dist.raw(order[s], next).saturating_add(suffix[s + 1]);
    }
    let h = |v: Vertex, seg: usize| -> u32 {
        let next = order.get(seg).copied().unwrap_or(goal);
        ctx.dist.raw(v, next).saturating_add(suffix[seg])
    };

    if !table.vertex_free(start, 0) {
        return None;
    }
    type Key = (Vertex, usize, usize);
    // Past the table's last change every timestep looks the same, so later
    // times collapse onto one representative.
    let settled = table.settled_after() + 1;
    let closed_key = |(v, t, seg): Key| (v, t.min(settled), seg);
    let s0 = (start, 0usize, advance(0, start));
    if h(s0.0, s0.2) == UNREACHABLE {
        return None;
    }
    let mut parent: HashMap<Key, Key> = HashMap::new();
    let mut closed: HashSet<Key> = HashSet::new();
    let mut open = BinaryHeap::new();
    open.push(Reverse((s0.1 + h(s0.0, s0.2) as usize, Reverse(s0.1), s0)));
    while let Some(Reverse((_, _, key))) = open.pop() {
        if !closed.insert(closed_key(key)) {
            continue;
        }
        let (v, t, seg) = key;
        if seg == m && v == goal && table.free_forever_from(goal, t) {
            let mut path = vec![v];
            let mut at = key;
            while let Some(&p) = parent.get(&at) {
                path.push(p.0);
                at = p;
            }
            path.reverse();
            return Some(path);
        }
        if t >= max_time {
            continue;
        }
        for &u in graph.neighbors(v).iter().chain(std::iter::once(&v)) {
            if !table.vertex_free(u, t + 1) || !table.edge_free(v, u, t) {
                continue;
            }
            let next = (u, t + 1, advance(seg, u));
            if closed.contains(&closed_key(next)) {
                continue;
            }
            let hv = h(u, next.2);
            if hv == UNREACHABLE {
                continue;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(key);
                open.push(Reverse((t + 1 + hv as usize, Reverse(t + 1), next)));
            }
        }
    }
    None
}

/// Re-plans the neighborhood's agents one by one in random order against
/// everyone else. Returns the candidate plan, or `None` if any agent fails.
pub fn repair<R: Rng>(
    plan: &JointPlan,
    agents: &[usize],
    ctx: &EpisodeContext,
    rng: &mut R,
) -> Option<JointPlan> {
    let n = plan.agent_count();
    let mut removed: Vec<usize> = agents.to_vec();
    rng::shuffle(rng, &mut removed);
    let kept: Vec<usize> = (0..n).filter(|a| !agents.contains(a)).collect();
    let mut paths: Vec<Path> = plan.paths.clone();
    for &a in &kept {
        trim_parked(&mut paths[a]);
    }
    let mut table = ReservationTable::from_paths(kept.iter().map(|&a| &paths[a]));
    let max_time = 2 * plan.horizon() + ctx.dist.graph().map().passable_count();
    for &a in &removed {
        let p = plan_agent(ctx, a, &table, max_time)?;
        table.add(&p);
        paths[a] = p;
    }
    let completion = completion_times(&paths, ctx.scenario);
    let feasible = completion.iter().all(Option::is_some);
    let mut out = JointPlan::new(paths, completion, feasible);
    out.trim_to_makespan();
    Some(out)
}

fn trim_parked(path: &mut Path) {
    while path.len() >= 2 && path[path.len() - 1] == path[path.len() - 2] {
        path.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LnsBudget {
    pub iterations: Option<usize>,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LnsRecord {
    pub iteration: usize,
    pub strategy: Strategy,
    pub delta: f64,
    pub accepted: bool,
    pub incumbent_flowtime: usize,
    /// Seconds since the refinement started.
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone)]
pub struct LnsParams {
    pub cap: usize,
    pub weights: StrategyWeights,
}

impl Default for LnsParams {
    fn default() -> Self {
        Self { cap: NEIGHBORHOOD_CAP, weights: StrategyWeights::default() }
    }
}

/// Destroy/repair loop. The result never has a higher flowtime than `plan`.
pub fn refine<R: Rng>(
    plan: &JointPlan,
    ctx: &EpisodeContext,
    budget: LnsBudget,
    params: &LnsParams,
    rng: &mut R,
) -> (JointPlan, Vec<LnsRecord>) {
    let started = Instant::now();
    let mut best = plan.clone();
    let mut log = Vec::new();
    let Some(mut flow) = best.flowtime() else { return (best, log) };
    if !best.feasible {
        return (best, log);
    }
    best.trim_to_makespan();
    let mut weights = params.weights.clone();
    let cap = params.cap.min(best.agent_count());
    let mut it = 0;
    loop {
        if budget.iterations.is_some_and(|k| it >= k) || budget.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        if budget.iterations.is_none() && budget.deadline.is_none() {
            break;
        }
        let nb = select_neighborhood(&best, ctx, &weights, cap, rng);
        let removed: Vec<usize> = nb.agents.iter().map(|&a| best.completion[a].unwrap_or(0)).collect();
        let candidate = repair(&best, &nb.agents, ctx, rng).filter(|c| c.feasible);
        let (delta, accepted) = match candidate {
            Some(c) => {
                let repaired: Vec<usize> = nb.agents.iter().map(|&a| c.completion[a].unwrap_or(0)).collect();
                let delta = update_weight(&mut weights, nb.strategy, &removed, &repaired);
                let cf = c.flowtime().unwrap_or(usize::MAX);
                let ok = cf < flow && validate(&c, ctx.scenario, ctx.dist.graph()).is_ok();
                if ok {
                    best = c;
                    flow = cf;
                }
                (delta, ok)
            }
            None => (update_weight(&mut weights, nb.strategy, &[], &[]), false),
        };
        log::trace!("lns it={it} {} delta={delta} accepted={accepted} flowtime={flow}", nb.strategy);
        log.push(LnsRecord {
            iteration: it,
            strategy: nb.strategy,
            delta,
            accepted,
            incumbent_flowtime: flow,
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
        it += 1;
    }
    (best, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistCache;
    use crate::grid::GridMap;
    use crate::instance::{Agent, Scenario, Task};
    use crate::lacam::oracle;
    use crate::sequencing::kth_joint_sequence;
    use crate::xpibt::{run_episode, StagnationBudget};
    use proptest::prelude::{any, prop_assert, prop_assume, proptest, ProptestConfig};
    use std::sync::Arc;

    fn setup(rows: &[&str]) -> (GridMap, Arc<GridGraph>, DistCache) {
        let map = GridMap::from_rows(rows).unwrap();
        let g = Arc::new(GridGraph::new(map.clone()));
        (map, g.clone(), DistCache::new(g))
    }

    #[test]
    fn weight_update_arithmetic() {
        let mut w = StrategyWeights::default();
        let d = update_weight(&mut w, Strategy::Random, &[10, 7], &[8, 7]);
        assert_eq!(d, 2.0);
        assert!((w.weight(Strategy::Random) - 1.1).abs() < 1e-12);
        assert_eq!(w.weight(Strategy::Intersection), 1.0);
        update_weight(&mut w, Strategy::Intersection, &[5], &[9]);
        assert!((w.weight(Strategy::Intersection) - 0.9).abs() < 1e-12);
        let mut z = StrategyWeights { gamma: 0.0, ..Default::default() };
        update_weight(&mut z, Strategy::RandomWalk, &[100], &[1]);
        assert_eq!(z.weight(Strategy::RandomWalk), 1.0);
    }

    #[test]
    fn zero_weights_are_equiprobable() {
        let w = StrategyWeights { w: [0.0; 3], ..Default::default() };
        for p in w.probabilities() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    fn context<'a>(d: &'a DistCache, sc: &'a Scenario) -> EpisodeContext<'a> {
        EpisodeContext::new(sc, d, &kth_joint_sequence(sc, d, 1).unwrap())
    }

    fn feasible_plan(map: &GridMap, ctx: &EpisodeContext) -> JointPlan {
        let budget = StagnationBudget::for_instance(map, ctx.lb_makespan());
        run_episode(ctx, budget, &mut rng::stream(1, 0, &[]), None).to_plan()
    }

    #[test]
    fn single_agent_neighborhood_is_that_agent() {
        let (map, _, d) = setup(&["....."]);
        let sc = Scenario::new(vec![Agent { start: 0, goal: 4 }], vec![], 0, &map).unwrap();
        let ctx = context(&d, &sc);
        let plan = feasible_plan(&map, &ctx);
        let mut r = rng::stream(0, 0, &[]);
        for s in Strategy::ALL {
            assert_eq!(neighborhood_for(s, &plan, &ctx, 8, &mut r), vec![0]);
        }
    }

    #[test]
    fn intersection_picks_the_shared_cell() {
        // Agents 0..3 each cross the center cell (1,1) at different times;
        // agent 3 stays in the corner.
        let (map, _, d) = setup(&["...", "...", "..."]);
        let sc = Scenario::new(
            vec![
                Agent { start: 1, goal: 7 },
                Agent { start: 3, goal: 5 },
                Agent { start: 2, goal: 6 },
                Agent { start: 8, goal: 8 },
            ],
            vec![],
            0,
            &map,
        )
        .unwrap();
        let paths = vec![vec![1, 4, 7, 7, 7], vec![3, 3, 4, 5, 5], vec![2, 2, 2, 4, 3], vec![8; 5]];
        // agent 2 ends at 3 rather than its goal; only visits matter here
        let plan = JointPlan::new(paths, vec![Some(2), Some(3), None, Some(0)], false);
        let ctx = context(&d, &sc);
        let got = neighborhood_for(Strategy::Intersection, &plan, &ctx, 8, &mut rng::stream(0, 0, &[]));
        assert_eq!(got, vec![0, 1, 2]);
    }

    #[test]
    fn reservation_table_rebuilds_identically() {
        let paths = vec![vec![0, 1, 2, 2], vec![5, 4, 3]];
        let a = ReservationTable::from_paths(&paths);
        let mut b = ReservationTable::default();
        for p in paths.iter().rev() {
            b.add(p);
        }
        assert_eq!(a, b);
        assert!(!a.vertex_free(1, 1));
        assert!(!a.vertex_free(2, 100));
        assert!(a.vertex_free(2, 1));
        assert!(!a.edge_free(2, 1, 1));
        assert!(a.free_forever_from(4, 2));
        assert!(!a.free_forever_from(4, 1));
    }

    #[test]
    fn unobstructed_repair_matches_tour_bound() {
        let (map, _, d) = setup(&[".....", ".....", "....."]);
        let sc = Scenario::new(vec![Agent { start: 0, goal: 14 }], vec![Task::new(4, vec![0])], 0, &map).unwrap();
        let ctx = context(&d, &sc);
        let plan = feasible_plan(&map, &ctx);
        let out = repair(&plan, &[0], &ctx, &mut rng::stream(0, 0, &[])).unwrap();
        assert_eq!(out.flowtime(), Some(ctx.remaining_cost(0, 0, 0) as usize));
        let same = repair(&plan, &[], &ctx, &mut rng::stream(0, 0, &[])).unwrap();
        let mut trimmed = plan.clone();
        trimmed.trim_to_makespan();
        assert_eq!(same.paths, trimmed.paths);
    }

    /// Two agents on a corridor with a bay; agent 0's initial plan takes a
    /// pointless detour through the bay.
    fn detour() -> (GridMap, Arc<GridGraph>, DistCache, Scenario, JointPlan) {
        let (map, g, d) = setup(&[".....", "@@.@@"]);
        let sc = Scenario::new(vec![Agent { start: 0, goal: 3 }, Agent { start: 4, goal: 4 }], vec![], 0, &map)
            .unwrap();
        let p0 = vec![0, 1, 2, 7, 7, 2, 3];
        let p1 = vec![4; 7];
        let plan = JointPlan::new(vec![p0.clone(), p1.clone()], completion_times(&[p0, p1], &sc), true);
        assert_eq!(validate(&plan, &sc, &g), Ok(()));
        (map, g, d, sc, plan)
    }

    #[test]
    fn detour_is_refined_to_the_optimum() {
        let (_, _, d, sc, plan) = detour();
        let ctx = context(&d, &sc);
        let opt = oracle::solve_scenario(&sc, &d, oracle::DEFAULT_STATE_BOUND).unwrap().unwrap();
        let (out, log) = refine(&plan, &ctx, LnsBudget { iterations: Some(50), deadline: None }, &LnsParams::default(), &mut rng::stream(0, 0, &[]));
        assert_eq!(out.flowtime(), opt.flowtime());
        assert_eq!(log.len(), 50);
        let (same, none) = refine(&plan, &ctx, LnsBudget { iterations: Some(0), deadline: None }, &LnsParams::default(), &mut rng::stream(0, 0, &[]));
        assert_eq!(same.flowtime(), plan.flowtime());
        assert!(none.is_empty());
    }

    fn follows_orders(plan: &JointPlan, ctx: &EpisodeContext) -> bool {
        (0..plan.agent_count()).all(|a| {
            let order = &ctx.orders[a];
            let mut k = 0;
            for &v in &plan.paths[a] {
                while k < order.len() && order[k] == v {
                    k += 1;
                }
            }
            k == order.len()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn refinement_is_monotone_and_valid(seed in any::<u64>(), n in 2usize..8, m in 0usize..8) {
            let map = crate::maps::generate_sized(crate::maps::MapKind::Random, 10, 10, seed);
            let g = Arc::new(GridGraph::new(map.clone()));
            let d = DistCache::new(g.clone());
            let sc = crate::instance::generate_instance(&map, n, m, seed).unwrap();
            let ctx = context(&d, &sc);
        let plan = feasible_plan(&map, &ctx);
            prop_assume!(plan.feasible);
            let (out, log) = refine(&plan, &ctx, LnsBudget { iterations: Some(15), deadline: None }, &LnsParams::default(), &mut rng::stream(seed, 3, &[]));
            prop_assert!(out.flowtime() <= plan.flowtime());
            prop_assert!(validate(&out, &sc, &g).is_ok());
            prop_assert!(follows_orders(&out, &ctx));
            for w in log.windows(2) {
                prop_assert!(w[1].incumbent_flowtime <= w[0].incumbent_flowtime);
            }
        }
    }
}
