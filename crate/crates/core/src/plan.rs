//! Joint plans and their text trace format.
//!
//! ```text
//! plan <n_agents> <horizon> <flowtime> <makespan>
//! t 0 <a0_row> <a0_col> <a1_row> <a1_col> ...
//! ...
//! done <agent> <T_j>
//! ```
//!
//! Infeasible plans carry `-` in place of flowtime, makespan and the
//! completion time of every unfinished agent.

use std::fmt::Write as _;

use thiserror::Error;

use crate::grid::{GridMap, Vertex};

/// Vertex per timestep, `t = 0..=T`; the agent implicitly stays at the last
/// vertex afterwards.
pub type Path = Vec<Vertex>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPlan {
    /// One path per agent, all of length `horizon + 1`.
    pub paths: Vec<Path>,
    /// Per-agent time of permanent arrival at the goal with all tasks done.
    pub completion: Vec<Option<usize>>,
    pub feasible: bool,
}

impl JointPlan {
    /// Builds a plan, padding every path to the longest one.
    pub fn new(mut paths: Vec<Path>, completion: Vec<Option<usize>>, feasible: bool) -> Self {
        pad_paths(&mut paths);
        Self {
            paths,
            completion,
            feasible,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.paths.len()
    }

    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, |p| p.len().saturating_sub(1))
    }

    /// Position of `agent` at `t`, holding the final vertex past the horizon.
    pub fn at(&self, agent: usize, t: usize) -> Vertex {
        let p = &self.paths[agent];
        p[t.min(p.len() - 1)]
    }

    pub fn configuration(&self, t: usize) -> Vec<Vertex> {
        (0..self.agent_count()).map(|a| self.at(a, t)).collect()
    }

    /// Sum of completion times, `None` while any agent is unfinished.
    pub fn flowtime(&self) -> Option<usize> {
        self.completion.iter().try_fold(0, |acc, t| t.map(|t| acc + t))
    }

    pub fn makespan(&self) -> Option<usize> {
        self.completion
            .iter()
            .try_fold(0, |acc: usize, t| t.map(|t| acc.max(t)))
    }

    /// Cuts the common horizon down to the makespan. Only meaningful for
    /// complete plans, where every agent is parked after its completion time.
    pub fn trim_to_makespan(&mut self) {
        if let Some(m) = self.makespan() {
            for p in &mut self.paths {
                p.truncate(m + 1);
            }
            pad_paths(&mut self.paths);
        }
    }

    pub fn to_trace(&self, map: &GridMap) -> String {
        let fmt_opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        let (flow, span) = if self.feasible {
            (self.flowtime(), self.makespan())
        } else {
            (None, None)
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "plan {} {} {} {}",
            self.agent_count(),
            self.horizon(),
            fmt_opt(flow),
            fmt_opt(span)
        );
        for t in 0..=self.horizon() {
            let _ = write!(out, "t {t}");
            for p in &self.paths {
                let (r, c) = map.coords(p[t]);
                let _ = write!(out, " {r} {c}");
            }
            out.push('\n');
        }
        for (a, t) in self.completion.iter().enumerate() {
            let _ = writeln!(out, "done {a} {}", fmt_opt(*t));
        }
        out
    }

    pub fn parse_trace(text: &str, map: &GridMap) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, reason: String| TraceError { line, reason };
        let opt = |line: usize, s: &str| -> Result<Option<usize>, TraceError> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| err(line, format!("invalid number {s:?}")))
            }
        };
        let num = |line: usize, s: &str| -> Result<usize, TraceError> {
            s.parse()
                .map_err(|_| err(line, format!("invalid number {s:?}")))
        };

        let (no, header) = lines.next().ok_or(err(1, "empty trace".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "plan" {
            return Err(err(no, format!("expected plan header, found {header:?}")));
        }
        let n = num(no, h[1])?;
        let horizon = num(no, h[2])?;
        let flow = opt(no, h[3])?;
        let span = opt(no, h[4])?;

        let mut paths = vec![Vec::with_capacity(horizon + 1); n];
        let mut completion = vec![None; n];
        let mut seen_done = vec![false; n];
        for (no, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "t" => {
                    let t = num(no, toks.get(1).copied().unwrap_or(""))?;
                    if t != paths.first().map_or(0, Vec::len) {
                        return Err(err(no, format!("timestep {t} out of order")));
                    }
                    if toks.len() != 2 + 2 * n {
                        return Err(err(no, format!("expected {n} positions")));
                    }
                    for (a, path) in paths.iter_mut().enumerate() {
                        let r = num(no, toks[2 + 2 * a])?;
                        let c = num(no, toks[3 + 2 * a])?;
                        if !map.contains(r, c) {
                            return Err(err(no, format!("({r},{c}) outside the map")));
                        }
                        path.push(map.vertex(r, c));
                    }
                }
                "done" if toks.len() == 3 => {
                    let a = num(no, toks[1])?;
                    if a >= n || seen_done[a] {
                        return Err(err(no, format!("bad done line for agent {a}")));
                    }
                    seen_done[a] = true;
                    completion[a] = opt(no, toks[2])?;
                }
                _ => return Err(err(no, format!("unrecognized line {line:?}"))),
            }
        }
        if n > 0 && paths[0].len() != horizon + 1 {
            return Err(err(
                0,
                format!("header horizon {horizon} but {} timesteps", paths[0].len()),
            ));
        }
        if let Some(a) = seen_done.iter().position(|s| !s) {
            return Err(err(0, format!("missing done line for agent {a}")));
        }
        let feasible = flow.is_some() && span.is_some();
        Ok(Self {
            paths,
            completion,
            feasible,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {reason}")]
pub struct TraceError {
    pub line: usize,
    pub reason: String,
}

/// Extends every path with its final vertex up to the longest length.
pub fn pad_paths(paths: &mut [Path]) {
    let len = paths.iter().map(Vec::len).max().unwrap_or(0);
    for p in paths.iter_mut() {
        if let Some(&last) = p.last() {
            p.resize(len, last);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn costs() {
        let p = JointPlan::new(vec![vec![0; 6], vec![1; 4]], vec![Some(3), Some(5)], true);
        assert_eq!(p.flowtime(), Some(8));
        assert_eq!(p.makespan(), Some(5));
        assert_eq!(p.horizon(), 5);
        assert_eq!(p.paths[1].len(), 6);

        let p = JointPlan::new(vec![vec![0]], vec![Some(0)], true);
        assert_eq!((p.flowtime(), p.makespan()), (Some(0), Some(0)));

        let p = JointPlan::new(vec![vec![0], vec![1], vec![2]], vec![Some(4); 3], true);
        assert_eq!((p.flowtime(), p.makespan()), (Some(12), Some(4)));

        let p = JointPlan::new(vec![vec![0]], vec![None], false);
        assert_eq!(p.flowtime(), None);
    }

    #[test]
    fn stationary_trace_is_one_row() {
        let map = GridMap::open(2, 2);
        let p = JointPlan::new(vec![vec![3]], vec![Some(0)], true);
        let text = p.to_trace(&map);
        assert_eq!(text, "plan 1 0 0 0\nt 0 1 1\ndone 0 0\n");
        assert_eq!(JointPlan::parse_trace(&text, &map).unwrap(), p);
    }

    #[test]
    fn infeasible_trace_round_trip() {
        let map = GridMap::open(3, 3);
        let p = JointPlan::new(vec![vec![0, 1, 2], vec![8, 8, 7]], vec![Some(2), None], false);
        let text = p.to_trace(&map);
        assert!(text.starts_with("plan 2 2 - -\n"));
        assert_eq!(JointPlan::parse_trace(&text, &map).unwrap(), p);
    }

    #[test]
    fn malformed_traces() {
        let map = GridMap::open(3, 3);
        for bad in [
            "",
            "plan 1 0 0\n",
            "plan 1 1 0 0\nt 0 0 0\ndone 0 0\n",
            "plan 1 0 0 0\nt 0 0 9\ndone 0 0\n",
            "plan 1 0 0 0\nt 0 0 0\n",
            "plan 1 0 0 0\nt 1 0 0\ndone 0 0\n",
            "plan 1 0 0 0\nt 0 0 0\nmove 0\n",
        ] {
            assert!(JointPlan::parse_trace(bad, &map).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn trim() {
        let mut p = JointPlan::new(vec![vec![0, 1, 1, 1], vec![5, 5, 5, 5]], vec![Some(1), Some(0)], true);
        p.trim_to_makespan();
        assert_eq!(p.horizon(), 1);
        assert_eq!(p.at(0, 10), 1);
    }
}
