//! Small hand-built scenarios on which plain task-aware PIBT gets stuck.

use crate::grid::GridMap;
use crate::instance::{Agent, Scenario, Task};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub map: GridMap,
    pub scenario: Scenario,
}

/// Deadlock: a corridor `(1,1)..(1,4)` with a bay below `(1,3)`. Agent 0
/// must visit the dead end `(1,1)`, where agent 1 already sits on its goal
/// and has nowhere to yield.
pub fn corridor_deadlock() -> Fixture {
    let map = GridMap::from_rows(&["@@@@@@", "@....@", "@@@.@@", "@@@@@@"]).unwrap();
    let v = |r, c| map.vertex(r, c);
    let scenario = Scenario::new(
        vec![Agent { start: v(1, 2), goal: v(1, 4) }, Agent { start: v(1, 1), goal: v(1, 1) }],
        vec![Task::new(v(1, 1), vec![0])],
        0,
        &map,
    )
    .unwrap();
    Fixture { map, scenario }
}

/// Livelock: two agents start on each other's goals `(0,3)` and `(1,3)`.
/// Whichever one has priority steps onto its goal and pushes the other
/// aside, the priorities flip, and the pair oscillates forever.
pub fn goal_swap_livelock() -> Fixture {
    let map = GridMap::from_rows(&["@.@..", "....@"]).unwrap();
    let v = |r, c| map.vertex(r, c);
    let scenario = Scenario::new(
        vec![Agent { start: v(1, 3), goal: v(0, 3) }, Agent { start: v(0, 3), goal: v(1, 3) }],
        vec![],
        0,
        &map,
    )
    .unwrap();
    Fixture { map, scenario }
}
