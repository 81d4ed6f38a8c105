//! Grid maps and the 4-connected graph view used by every planner.
//!
//! Maps use the octile text convention:
//!
//! ```text
//! type octile
//! height H
//! width W
//! map
//! <H rows of W characters>
//! ```
//!
//! `.` and `G` are passable, `@` and `T` are blocked. Vertex ids are row-major
//! cell indices, so a vertex id is meaningful for both passable and blocked
//! cells; only passable cells carry edges.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

/// Row-major cell index.
pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("map must have positive width and height (got {width}x{height})")]
    EmptyDimensions { width: usize, height: usize },
    #[error("map has no passable cell")]
    NoPassableCell,
    #[error("blocked mask has {got} cells, expected {expected}")]
    MaskSize { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyDimensions { width, height });
        }
        if blocked.len() != width * height {
            return Err(MapError::MaskSize {
                got: blocked.len(),
                expected: width * height,
            });
        }
        if blocked.iter().all(|&b| b) {
            return Err(MapError::NoPassableCell);
        }
        Ok(Self {
            width,
            height,
            blocked,
        })
    }

    /// Obstacle-free map.
    pub fn open(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height]).expect("positive dimensions")
    }

    /// Builds a map from rows of characters, e.g. `["..@", "..."]`.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, MapError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count());
        let mut blocked = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != width {
                return Err(MapError::Parse {
                    line: i + 1,
                    reason: format!("row has {} cells, expected {width}", row.chars().count()),
                });
            }
            for ch in row.chars() {
                blocked.push(cell_blocked(ch).ok_or_else(|| MapError::Parse {
                    line: i + 1,
                    reason: format!("illegal map character {ch:?}"),
                })?);
            }
        }
        Self::new(width, height, blocked)
    }

    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));

        let mut header = |key: &str| -> Result<(usize, String), MapError> {
            let (no, line) = lines.next().ok_or(MapError::Parse {
                line: 0,
                reason: format!("missing `{key}` header"),
            })?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(MapError::Parse {
                    line: no,
                    reason: format!("expected `{key}` header, found {line:?}"),
                });
            }
            Ok((no, parts.collect::<Vec<_>>().join(" ")))
        };

        let (no, kind) = header("type")?;
        if kind.is_empty() {
            return Err(MapError::Parse {
                line: no,
                reason: "missing map type".into(),
            });
        }
        let (no, h) = header("height")?;
        let height: usize = h.parse().map_err(|_| MapError::Parse {
            line: no,
            reason: format!("invalid height {h:?}"),
        })?;
        let (no, w) = header("width")?;
        let width: usize = w.parse().map_err(|_| MapError::Parse {
            line: no,
            reason: format!("invalid width {w:?}"),
        })?;
        let (no, rest) = header("map")?;
        if !rest.is_empty() {
            return Err(MapError::Parse {
                line: no,
                reason: "unexpected tokens after `map`".into(),
            });
        }
        if width == 0 || height == 0 {
            return Err(MapError::EmptyDimensions { width, height });
        }

        let mut blocked = Vec::with_capacity(width * height);
        let mut rows = 0;
        let mut last_line = no;
        for (no, line) in lines {
            last_line = no;
            if line.is_empty() {
                continue;
            }
            if rows == height {
                return Err(MapError::Parse {
                    line: no,
                    reason: format!("more than {height} map rows"),
                });
            }
            let cells: Vec<char> = line.chars().collect();
            if cells.len() != width {
                return Err(MapError::Parse {
                    line: no,
                    reason: format!("row has {} cells, expected {width}", cells.len()),
                });
            }
            for ch in cells {
                blocked.push(cell_blocked(ch).ok_or_else(|| MapError::Parse {
                    line: no,
                    reason: format!("illegal map character {ch:?}"),
                })?);
            }
            rows += 1;
        }
        if rows != height {
            return Err(MapError::Parse {
                line: last_line + 1,
                reason: format!("expected {height} map rows, found {rows}"),
            });
        }
        Self::new(width, height, blocked)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 40);
        let _ = writeln!(out, "type octile");
        let _ = writeln!(out, "height {}", self.height);
        let _ = writeln!(out, "width {}", self.width);
        let _ = writeln!(out, "map");
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(if self.blocked[r * self.width + c] { '@' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_blocked(&self, v: Vertex) -> bool {
        self.blocked.get(v).copied().unwrap_or(true)
    }

    pub fn is_passable(&self, v: Vertex) -> bool {
        !self.is_blocked(v)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width
    }

    pub fn vertex(&self, row: usize, col: usize) -> Vertex {
        debug_assert!(self.contains(row, col));
        row * self.width + col
    }

    pub fn coords(&self, v: Vertex) -> (usize, usize) {
        (v / self.width, v % self.width)
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn passable_count(&self) -> usize {
        self.cell_count() - self.blocked_count()
    }

    pub fn passable_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(v, _)| v)
    }

    pub(crate) fn set_blocked(&mut self, v: Vertex, blocked: bool) {
        self.blocked[v] = blocked;
    }
}

fn cell_blocked(ch: char) -> Option<bool> {
    match ch {
        '.' | 'G' => Some(false),
        '@' | 'T' => Some(true),
        _ => None,
    }
}

/// 4-connected adjacency over the passable cells of a [`GridMap`].
///
/// Neighbor lists are stored in a fixed up/left/right/down order, which keeps
/// every planner's tie-breaking reproducible.
#[derive(Debug, Clone)]
pub struct GridGraph {
    map: GridMap,
    offsets: Vec<u32>,
    flat: Vec<Vertex>,
}

impl GridGraph {
    pub fn new(map: GridMap) -> Self {
        let (w, h) = (map.width, map.height);
        let mut offsets = Vec::with_capacity(map.cell_count() + 1);
        let mut flat = Vec::with_capacity(map.cell_count() * 4);
        offsets.push(0);
        for v in 0..map.cell_count() {
            if map.is_passable(v) {
                let (r, c) = (v / w, v % w);
                if r > 0 && map.is_passable(v - w) {
                    flat.push(v - w);
                }
                if c > 0 && map.is_passable(v - 1) {
                    flat.push(v - 1);
                }
                if c + 1 < w && map.is_passable(v + 1) {
                    flat.push(v + 1);
                }
                if r + 1 < h && map.is_passable(v + w) {
                    flat.push(v + w);
                }
            }
            offsets.push(flat.len() as u32);
        }
        Self { map, offsets, flat }
    }

    /// Same grid with additional cells treated as obstacles.
    pub fn with_blocked(&self, extra: impl IntoIterator<Item = Vertex>) -> Self {
        let mut map = self.map.clone();
        for v in extra {
            map.set_blocked(v, true);
        }
        Self::new(map)
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn vertex_count(&self) -> usize {
        self.map.cell_count()
    }

    pub fn is_passable(&self, v: Vertex) -> bool {
        self.map.is_passable(v)
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let lo = self.offsets[v] as usize;
        let hi = self.offsets[v + 1] as usize;
        &self.flat[lo..hi]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).contains(&v)
    }

    /// Identical or adjacent, both passable.
    pub fn legal_move(&self, u: Vertex, v: Vertex) -> bool {
        self.is_passable(u) && self.is_passable(v) && (u == v || self.adjacent(u, v))
    }

    /// Connected-component label per cell (`None` for blocked cells).
    pub fn components(&self) -> Vec<Option<u32>> {
        let mut label = vec![None; self.vertex_count()];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.vertex_count() {
            if !self.is_passable(s) || label[s].is_some() {
                continue;
            }
            label[s] = Some(next);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v].is_none() {
                        label[v] = Some(next);
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Formats a vertex as `(row,col)`.
    pub fn fmt_vertex(&self, v: Vertex) -> String {
        let (r, c) = self.map.coords(v);
        format!("({r},{c})")
    }
}

impl From<GridMap> for GridGraph {
    fn from(map: GridMap) -> Self {
        Self::new(map)
    }
}
