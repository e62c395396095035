//! Scale parameters of the multi-scale construction.
//!
//! `L_j = L0^(alpha^j)` grows doubly exponentially, so every derived scale is
//! computed with checked arithmetic and overflow is reported, never wrapped.
//!
//! In [`Mode::Strict`] the exponents used by the block machinery are the
//! fixed ones (`alpha - 1` for block length, 4 for chunks, 3 for good runs,
//! 4 for geometric padding, `alpha - 5` for route cells). [`Mode::Relaxed`]
//! decouples them through the `p_*` fields so that multi-level objects stay
//! small enough to simulate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Relaxed,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(Mode::Strict),
            "relaxed" => Ok(Mode::Relaxed),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Strict => write!(f, "strict"),
            Mode::Relaxed => write!(f, "relaxed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: u32,
    pub beta: u32,
    pub delta: u32,
    pub m: u64,
    pub k0: u64,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "L0")]
    pub l0: u64,
    pub mode: Mode,
    pub p_len: u32,
    pub p_chunk: u32,
    pub p_run: u32,
    pub p_geom: u32,
    pub p_cell: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<String>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

impl Params {
    /// The fixed constant choice `alpha=10, delta=50, beta=600, m=60000,
    /// k0=300000, R=400000` in strict mode. `L0` has no fixed value there;
    /// 2 is used so that level-1 quantities stay printable.
    pub fn paper() -> Self {
        Params {
            alpha: 10,
            beta: 600,
            delta: 50,
            m: 60_000,
            k0: 300_000,
            r: 400_000,
            l0: 2,
            mode: Mode::Strict,
            p_len: 9,
            p_chunk: 4,
            p_run: 3,
            p_geom: 4,
            p_cell: 5,
        }
    }

    /// Smallest useful relaxed configuration: `L1 = 4`, `L2 = 16`.
    pub fn toy() -> Self {
        Params {
            alpha: 2,
            beta: 1,
            delta: 1,
            m: 1,
            k0: 3,
            r: 2,
            l0: 2,
            mode: Mode::Relaxed,
            p_len: 2,
            p_chunk: 1,
            p_run: 1,
            p_geom: 2,
            p_cell: 2,
        }
    }

    /// A somewhat larger relaxed configuration (`L1 = 8`).
    pub fn relaxed() -> Self {
        Params {
            alpha: 3,
            beta: 2,
            delta: 2,
            m: 2,
            k0: 4,
            r: 4,
            l0: 2,
            mode: Mode::Relaxed,
            p_len: 2,
            p_chunk: 1,
            p_run: 1,
            p_geom: 2,
            p_cell: 2,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(Self::paper()),
            "toy" => Ok(Self::toy()),
            "relaxed" => Ok(Self::relaxed()),
            other => Err(Error::Parse(format!("unknown preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let a = self.alpha as u128;
        let b = self.beta as u128;
        let d = self.delta as u128;
        match self.mode {
            Mode::Strict => {
                if self.alpha <= 6 {
                    v.push("alpha>6".to_string());
                }
                if d <= (2 * a).max(48) {
                    v.push("delta>max(2alpha,48)".to_string());
                }
                if b <= a * (d + 1) {
                    v.push("beta>alpha(delta+1)".to_string());
                }
                if (self.m as u128) <= 9 * a * b {
                    v.push("m>9alpha*beta".to_string());
                }
                if (self.k0 as u128) <= 36 * a * b {
                    v.push("k0>36alpha*beta".to_string());
                }
                if (self.r as u128) <= 6 * (self.m as u128 + 1) {
                    v.push("R>6(m+1)".to_string());
                }
                if self.l0 < 2 {
                    v.push("L0>=2".to_string());
                }
            }
            Mode::Relaxed => {
                if self.alpha < 2 {
                    v.push("alpha>=2".to_string());
                }
                for (name, value) in [
                    ("beta>=1", self.beta as u64),
                    ("delta>=1", self.delta as u64),
                    ("m>=1", self.m),
                    ("k0>=1", self.k0),
                    ("R>=1", self.r),
                    ("L0>=1", self.l0),
                    ("p_len>=1", self.p_len as u64),
                    ("p_chunk>=1", self.p_chunk as u64),
                    ("p_run>=1", self.p_run as u64),
                    ("p_geom>=1", self.p_geom as u64),
                    ("p_cell>=1", self.p_cell as u64),
                ] {
                    if value < 1 {
                        v.push(name.to_string());
                    }
                }
            }
        }
        ValidationReport::from_violations(v)
    }

    /// `L_j = L0^(alpha^j)`.
    pub fn scale(&self, j: u32) -> Result<u64> {
        let exp = (self.alpha as u64)
            .checked_pow(j)
            .and_then(|e| u32::try_from(e).ok())
            .ok_or(Error::Overflow {
                what: "scale exponent",
                level: j,
            })?;
        self.l0.checked_pow(exp).ok_or(Error::Overflow {
            what: "scale L_j",
            level: j,
        })
    }

    /// `L_j^p`, checked.
    pub fn scale_pow(&self, j: u32, p: u32) -> Result<u64> {
        self.scale(j)?.checked_pow(p).ok_or(Error::Overflow {
            what: "scale power",
            level: j,
        })
    }

    /// Block-length exponent (`alpha - 1` in strict mode).
    pub fn p_len(&self) -> u32 {
        match self.mode {
            Mode::Strict => self.alpha.saturating_sub(1),
            Mode::Relaxed => self.p_len,
        }
    }

    /// Chunk-size exponent (4 in strict mode).
    pub fn p_chunk(&self) -> u32 {
        match self.mode {
            Mode::Strict => 4,
            Mode::Relaxed => self.p_chunk,
        }
    }

    /// Good-run exponent (3 in strict mode).
    pub fn p_run(&self) -> u32 {
        match self.mode {
            Mode::Strict => 3,
            Mode::Relaxed => self.p_run,
        }
    }

    /// Geometric padding exponent (4 in strict mode).
    pub fn p_geom(&self) -> u32 {
        match self.mode {
            Mode::Strict => 4,
            Mode::Relaxed => self.p_geom,
        }
    }

    /// Route cell-size exponent (`alpha - 5` in strict mode).
    pub fn p_cell(&self) -> u32 {
        match self.mode {
            Mode::Strict => self.alpha.saturating_sub(5),
            Mode::Relaxed => self.p_cell,
        }
    }

    /// `m_j = m + 2^-j`.
    pub fn m_j(&self, j: u32) -> f64 {
        self.m as f64 + 0.5f64.powi(j as i32)
    }

    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value `{value}` for `{key}`")))
        }
        match key.trim() {
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "k0" => self.k0 = num(key, value)?,
            "R" | "r" => self.r = num(key, value)?,
            "L0" | "l0" => self.l0 = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "p_len" => self.p_len = num(key, value)?,
            "p_chunk" => self.p_chunk = num(key, value)?,
            "p_run" => self.p_run = num(key, value)?,
            "p_geom" => self.p_geom = num(key, value)?,
            "p_cell" => self.p_cell = num(key, value)?,
            other => return Err(Error::Parse(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    /// Parse a `key=value` file body on top of `base`. `#` starts a comment.
    /// A `preset=<name>` line replaces everything read so far.
    pub fn parse_onto(base: Params, text: &str) -> Result<Params> {
        let mut p = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            if k.trim() == "preset" {
                p = Params::preset(v.trim())?;
            } else {
                p.set(k, v)?;
            }
        }
        Ok(p)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "alpha={}\nbeta={}\ndelta={}\nm={}\nk0={}\nR={}\nL0={}\nmode={}\np_len={}\np_chunk={}\np_run={}\np_geom={}\np_cell={}\n",
            self.alpha,
            self.beta,
            self.delta,
            self.m,
            self.k0,
            self.r,
            self.l0,
            self.mode,
            self.p_len,
            self.p_chunk,
            self.p_run,
            self.p_geom,
            self.p_cell
        )
    }
}

impl FromStr for Params {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Params::parse_onto(Params::toy(), s)
    }
}
