//! Delay schedules for the two walks.
//!
//! Both walks start on `x[1]` and `y[1]`. A right step of a lattice path
//! advances `X` to its next vertex while `Y` waits, an up step does the
//! converse. The walks stay apart exactly when every visited site is open.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Sequence, Site};
use crate::reachability::{reach, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    AdvanceX,
    AdvanceY,
}

/// A move and the vertex the moving walk lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub mv: Move,
    pub vertex: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub steps: Vec<Step>,
}

impl Schedule {
    pub fn count(&self, mv: Move) -> usize {
        self.steps.iter().filter(|s| s.mv == mv).count()
    }

    /// Sites visited after each prefix, starting at `(1, 1)`.
    pub fn sites(&self) -> Vec<Site> {
        let mut cur = Site::new(1, 1);
        let mut out = vec![cur];
        for s in &self.steps {
            match s.mv {
                Move::AdvanceX => cur.i1 += 1,
                Move::AdvanceY => cur.i2 += 1,
            }
            out.push(cur);
        }
        out
    }

    /// One move per line: `X <vertex>` or `Y <vertex>`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (who, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("line {}: `{line}`", n + 1)))?;
            let mv = match who {
                "X" => Move::AdvanceX,
                "Y" => Move::AdvanceY,
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown walk `{who}`",
                        n + 1
                    )))
                }
            };
            let vertex = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad vertex `{v}`", n + 1)))?;
            steps.push(Step { mv, vertex });
        }
        Ok(Schedule { steps })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let who = match s.mv {
                Move::AdvanceX => 'X',
                Move::AdvanceY => 'Y',
            };
            writeln!(f, "{who} {}", s.vertex)?;
        }
        Ok(())
    }
}

/// Outcome of replaying a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub ok: bool,
    /// 0 is the initial placement, `k` the state after the `k`-th move.
    pub first_violation: Option<usize>,
    pub reason: Option<String>,
}

impl ScheduleCheck {
    fn pass() -> Self {
        ScheduleCheck {
            ok: true,
            first_violation: None,
            reason: None,
        }
    }

    fn fail(k: usize, reason: String) -> Self {
        ScheduleCheck {
            ok: false,
            first_violation: Some(k),
            reason: Some(reason),
        }
    }
}

/// Turn an open oriented path from `(1, 1)` into moves.
pub fn extract_schedule(path: &[Site], x: &Sequence, y: &Sequence) -> Result<Schedule> {
    let first = path.first().ok_or(Error::InvalidPath {
        index: 0,
        reason: "empty path".into(),
    })?;
    if *first != Site::new(1, 1) {
        return Err(Error::InvalidPath {
            index: 0,
            reason: format!("path starts at ({}, {})", first.i1, first.i2),
        });
    }
    let mut steps = Vec::with_capacity(path.len().saturating_sub(1));
    for (k, s) in path.iter().enumerate() {
        let (a, b) = (
            x.get(s.i1).map_err(|e| Error::InvalidPath {
                index: k,
                reason: e.to_string(),
            })?,
            y.get(s.i2).map_err(|e| Error::InvalidPath {
                index: k,
                reason: e.to_string(),
            })?,
        );
        if a == b {
            return Err(Error::InvalidPath {
                index: k,
                reason: format!("site ({}, {}) is closed", s.i1, s.i2),
            });
        }
        if k == 0 {
            continue;
        }
        let p = path[k - 1];
        let mv = if s.i1 == p.i1 + 1 && s.i2 == p.i2 {
            Move::AdvanceX
        } else if s.i1 == p.i1 && s.i2 == p.i2 + 1 {
            Move::AdvanceY
        } else {
            return Err(Error::InvalidPath {
                index: k,
                reason: format!(
                    "step ({}, {}) -> ({}, {}) is not right or up",
                    p.i1, p.i2, s.i1, s.i2
                ),
            });
        };
        let vertex = match mv {
            Move::AdvanceX => a,
            Move::AdvanceY => b,
        };
        steps.push(Step { mv, vertex });
    }
    Ok(Schedule { steps })
}

/// Replay `s` against the step sequences.
pub fn verify_schedule(s: &Schedule, x: &Sequence, y: &Sequence) -> ScheduleCheck {
    let (mut i1, mut i2) = (1usize, 1usize);
    let (Ok(mut px), Ok(mut py)) = (x.get(1), y.get(1)) else {
        return ScheduleCheck::fail(0, "empty sequence".into());
    };
    if px == py {
        return ScheduleCheck::fail(0, format!("both walks start on vertex {px}"));
    }
    for (k, step) in s.steps.iter().enumerate() {
        let k = k + 1;
        let (seq, idx, pos) = match step.mv {
            Move::AdvanceX => {
                i1 += 1;
                (x, i1, &mut px)
            }
            Move::AdvanceY => {
                i2 += 1;
                (y, i2, &mut py)
            }
        };
        match seq.get(idx) {
            Ok(v) if v == step.vertex => *pos = v,
            Ok(v) => {
                return ScheduleCheck::fail(
                    k,
                    format!(
                        "move lands on {} but step {idx} of the walk is {v}",
                        step.vertex
                    ),
                )
            }
            Err(_) => return ScheduleCheck::fail(k, format!("walk has no step {idx}")),
        }
        if px == py {
            return ScheduleCheck::fail(k, format!("walks collide on vertex {px}"));
        }
    }
    ScheduleCheck::pass()
}

/// Outcome of searching a schedule that reaches depth `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Search {
    Found(Schedule),
    Blocked { max_depth: usize },
}

/// A schedule whose final site lies on `i1 + i2 - 1 = n`, found by oriented
/// reachability in the `n x n` window.
pub fn schedule_to_depth(x: &Sequence, y: &Sequence, n: usize) -> Result<Search> {
    let rect = Rect::new(1, n, 1, n)?;
    let rs = reach(x, y, rect)?;
    let target = rs.sites().find(|s| s.i1 + s.i2 - 1 == n);
    match target {
        Some(t) => {
            let path = rs.trace_path(t).expect("marked target");
            Ok(Search::Found(extract_schedule(&path, x, y)?))
        }
        None => {
            let max_depth = rs.deepest().map(|s| (s.i1 + s.i2 - 1).min(n)).unwrap_or(0);
            Ok(Search::Blocked { max_depth })
        }
    }
}
