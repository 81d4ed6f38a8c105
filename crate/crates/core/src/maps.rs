//! Procedural benchmark maps: empty, random, room and maze, 32x32 by default.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::grid::{GridGraph, GridMap, Vertex};
use crate::rng;

pub const DEFAULT_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapKind {
    Empty,
    Random,
    Room,
    Maze,
}

impl MapKind {
    pub const ALL: [MapKind; 4] = [MapKind::Empty, MapKind::Random, MapKind::Room, MapKind::Maze];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Empty => "empty",
            MapKind::Random => "random",
            MapKind::Room => "room",
            MapKind::Maze => "maze",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MapKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown map kind {s:?} (expected empty, random, room or maze)"))
    }
}

/// 32x32 map of the given kind.
pub fn generate(kind: MapKind, seed: u64) -> GridMap {
    generate_sized(kind, DEFAULT_SIZE, DEFAULT_SIZE, seed)
}

pub fn generate_sized(kind: MapKind, width: usize, height: usize, seed: u64) -> GridMap {
    let mut rng = rng::stream(seed, rng::purpose::MAP, &[kind as u64]);
    match kind {
        MapKind::Empty => GridMap::open(width, height),
        MapKind::Random => random_map(width, height, 0.2, &mut rng),
        MapKind::Room => room_map(width, height, 4, &mut rng),
        MapKind::Maze => maze_map(width, height, 0.15, &mut rng),
    }
}

fn random_map<R: Rng>(width: usize, height: usize, density: f64, rng: &mut R) -> GridMap {
    let n = width * height;
    let mut cells: Vec<Vertex> = (0..n).collect();
    rng::shuffle(rng, &mut cells);
    let k = ((n as f64) * density).round() as usize;
    let mut blocked = vec![false; n];
    for &v in cells.iter().take(k.min(n - 1)) {
        blocked[v] = true;
    }
    let mut map = GridMap::new(width, height, blocked).expect("at least one open cell");
    repair_connectivity(&mut map);
    map
}

/// Carves shortest corridors from every minor component into the largest one.
fn repair_connectivity(map: &mut GridMap) {
    loop {
        let comp = GridGraph::new(map.clone()).components();
        let count = comp.iter().flatten().map(|&c| c as usize + 1).max().unwrap_or(0);
        if count <= 1 {
            return;
        }
        let mut sizes = vec![0usize; count];
        for c in comp.iter().flatten() {
            sizes[*c as usize] += 1;
        }
        let main = (0..count).max_by_key(|&c| (sizes[c], usize::MAX - c)).unwrap() as u32;

        // BFS through every cell from the main component until another
        // component is hit, then unblock the cells along that route.
        let (w, h) = (map.width(), map.height());
        let n = w * h;
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for v in 0..n {
            if comp[v] == Some(main) {
                parent[v] = v;
                queue.push_back(v);
            }
        }
        let mut hit = None;
        'bfs: while let Some(u) = queue.pop_front() {
            let (r, c) = (u / w, u % w);
            let mut nbrs = Vec::with_capacity(4);
            if r > 0 {
                nbrs.push(u - w);
            }
            if c > 0 {
                nbrs.push(u - 1);
            }
            if c + 1 < w {
                nbrs.push(u + 1);
            }
            if r + 1 < h {
                nbrs.push(u + w);
            }
            for v in nbrs {
                if parent[v] != usize::MAX {
                    continue;
                }
                parent[v] = u;
                if comp[v].is_some() {
                    hit = Some(v);
                    break 'bfs;
                }
                queue.push_back(v);
            }
        }
        let mut v = parent[hit.expect("grid is connected when obstacles are ignored")];
        while comp[v] != Some(main) {
            map.set_blocked(v, false);
            v = parent[v];
        }
    }
}

/// Rooms of `room`x`room` open cells separated by one-cell walls, with a
/// single-cell door in every wall segment between neighboring rooms.
fn room_map<R: Rng>(width: usize, height: usize, room: usize, rng: &mut R) -> GridMap {
    let period = room + 1;
    let is_wall = |i: usize| i % period == room;
    let mut blocked = vec![false; width * height];
    for r in 0..height {
        for c in 0..width {
            blocked[r * width + c] = is_wall(r) || is_wall(c);
        }
    }
    let span = |start: usize, limit: usize| start..(start + room).min(limit);
    // Vertical walls (between horizontally adjacent rooms).
    for wc in (room..width).step_by(period) {
        for r0 in (0..height).step_by(period) {
            let rows: Vec<usize> = span(r0, height).collect();
            if wc + 1 < width && !rows.is_empty() {
                let r = rows[rng::index(rng, rows.len())];
                blocked[r * width + wc] = false;
            }
        }
    }
    // Horizontal walls.
    for wr in (room..height).step_by(period) {
        for c0 in (0..width).step_by(period) {
            let cols: Vec<usize> = span(c0, width).collect();
            if wr + 1 < height && !cols.is_empty() {
                let c = cols[rng::index(rng, cols.len())];
                blocked[wr * width + c] = false;
            }
        }
    }
    let mut map = GridMap::new(width, height, blocked).expect("rooms have open cells");
    repair_connectivity(&mut map);
    map
}

/// Recursive-division maze on a coarse lattice rendered with two-cell-wide
/// corridors and one-cell walls, plus a fraction of walls reopened to add
/// loops.
fn maze_map<R: Rng>(width: usize, height: usize, loop_fraction: f64, rng: &mut R) -> GridMap {
    let cw = (width + 1) / 3;
    let ch = (height + 1) / 3;
    // open_e[i][j]: passage between coarse (i,j) and (i,j+1);
    // open_s[i][j]: between (i,j) and (i+1,j).
    let mut open_e = vec![vec![true; cw]; ch];
    let mut open_s = vec![vec![true; cw]; ch];
    divide(&mut open_e, &mut open_s, 0, 0, cw, ch, rng);

    let mut closed = Vec::new();
    for i in 0..ch {
        for j in 0..cw {
            if j + 1 < cw && !open_e[i][j] {
                closed.push((i, j, true));
            }
            if i + 1 < ch && !open_s[i][j] {
                closed.push((i, j, false));
            }
        }
    }
    let reopen = ((closed.len() as f64) * loop_fraction).round() as usize;
    for (i, j, east) in rng::sample(rng, &closed, reopen) {
        if east {
            open_e[i][j] = true;
        } else {
            open_s[i][j] = true;
        }
    }

    let mut blocked = vec![true; width * height];
    let mut open = |r: usize, c: usize| {
        if r < height && c < width {
            blocked[r * width + c] = false;
        }
    };
    for i in 0..ch {
        for j in 0..cw {
            let (r0, c0) = (3 * i, 3 * j);
            for dr in 0..2 {
                for dc in 0..2 {
                    open(r0 + dr, c0 + dc);
                }
            }
            if j + 1 < cw && open_e[i][j] {
                open(r0, c0 + 2);
                open(r0 + 1, c0 + 2);
            }
            if i + 1 < ch && open_s[i][j] {
                open(r0 + 2, c0);
                open(r0 + 2, c0 + 1);
            }
        }
    }
    let mut map = GridMap::new(width, height, blocked).expect("maze has open cells");
    repair_connectivity(&mut map);
    map
}

fn divide<R: Rng>(
    open_e: &mut [Vec<bool>],
    open_s: &mut [Vec<bool>],
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    rng: &mut R,
) {
    if w < 2 || h < 2 {
        // A strip: keep it fully connected along its length.
        return;
    }
    let horizontal = if w < h {
        true
    } else if h < w {
        false
    } else {
        rng.gen_bool(0.5)
    };
    if horizontal {
        // Wall between rows y+k and y+k+1, one gap.
        let k = rng::index(rng, h - 1);
        let gap = x + rng::index(rng, w);
        for j in x..x + w {
            open_s[y + k][j] = j == gap;
        }
        divide(open_e, open_s, x, y, w, k + 1, rng);
        divide(open_e, open_s, x, y + k + 1, w, h - k - 1, rng);
    } else {
        let k = rng::index(rng, w - 1);
        let gap = y + rng::index(rng, h);
        for i in y..y + h {
            open_e[i][x + k] = i == gap;
        }
        divide(open_e, open_s, x, y, k + 1, h, rng);
        divide(open_e, open_s, x + k + 1, y, w - k - 1, h, rng);
    }
}
