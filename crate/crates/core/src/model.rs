//! Step sequences of the two walks and the openness predicate.
//!
//! All public coordinates are 1-based: site `(1, 1)` pairs the first symbol
//! of `X` with the first symbol of `Y`. A site is closed exactly when both
//! walks would sit on the same vertex there.
//!
//! ## Generator
//!
//! [`generate`] draws from `ChaCha8Rng` (rand_chacha 0.3) seeded with
//! `seed_from_u64(seed)` and stream 1 for `X`, 2 for `Y`. Each symbol consumes
//! one `u64` word `r` and is `floor(r * M / 2^64) + 1`. The map is
//! value-stable across platforms, its bias is below `M / 2^64`, and when
//! `M | M'` the same seed yields coupled sequences: equal symbols at `M'`
//! imply equal symbols at `M`.

use std::fmt;
use std::io::{Read, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    X,
    Y,
}

impl Role {
    pub fn stream(self) -> u64 {
        match self {
            Role::X => 1,
            Role::Y => 2,
        }
    }

    pub fn other(self) -> Role {
        match self {
            Role::X => Role::Y,
            Role::Y => Role::X,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::X => write!(f, "X"),
            Role::Y => write!(f, "Y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub i1: usize,
    pub i2: usize,
}

impl Site {
    pub fn new(i1: usize, i2: usize) -> Self {
        Site { i1, i2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    m: u32,
    items: Vec<u32>,
    role: Role,
}

impl Sequence {
    /// Build a sequence, checking `M >= 3` and every item in `1..=M`.
    pub fn new(m: u32, items: Vec<u32>, role: Role) -> Result<Self> {
        if m < 3 {
            return Err(Error::Domain(format!("alphabet size {m} < 3")));
        }
        if let Some((i, v)) = items.iter().enumerate().find(|(_, &v)| v == 0 || v > m) {
            return Err(Error::Domain(format!(
                "item {} at position {} outside 1..={m}",
                v,
                i + 1
            )));
        }
        Ok(Sequence { m, items, role })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    /// 1-based access.
    pub fn get(&self, i: usize) -> Result<u32> {
        if i == 0 || i > self.items.len() {
            return Err(Error::Bounds(format!(
                "{} index {i} outside 1..={}",
                self.role,
                self.items.len()
            )));
        }
        Ok(self.items[i - 1])
    }

    /// Items `lo..=hi` (1-based, inclusive).
    pub fn slice(&self, lo: usize, hi: usize) -> Result<&[u32]> {
        if lo == 0 || lo > hi || hi > self.items.len() {
            return Err(Error::Bounds(format!(
                "{} range {lo}..={hi} outside 1..={}",
                self.role,
                self.items.len()
            )));
        }
        Ok(&self.items[lo - 1..hi])
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Text form: `M=<int> n=<int>` then whitespace separated items.
    pub fn to_text(&self) -> String {
        let mut s = format!("M={} n={}\n", self.m, self.items.len());
        for (i, v) in self.items.iter().enumerate() {
            if i > 0 {
                s.push(if i % 32 == 0 { '\n' } else { ' ' });
            }
            s.push_str(&v.to_string());
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str, role: Role) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty sequence file".into()))?;
        let mut m = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("M", v)) => m = v.parse::<u32>().ok(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                _ => return Err(Error::Parse(format!("bad header token `{tok}`"))),
            }
        }
        let (m, n) = match (m, n) {
            (Some(m), Some(n)) => (m, n),
            _ => return Err(Error::Parse("header must be `M=<int> n=<int>`".into())),
        };
        let items = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad item `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if items.len() != n {
            return Err(Error::Parse(format!(
                "header says n={n} but {} items follow",
                items.len()
            )));
        }
        Sequence::new(m, items, role)
    }

    /// Binary form: little-endian u32 `M`, u32 `n`, then `n` u32 items.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = u32::try_from(self.items.len())
            .map_err(|_| Error::Domain("sequence too long for binary form".into()))?;
        w.write_all(&self.m.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        for v in &self.items {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, role: Role) -> Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let m = u32::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut word)?;
            items.push(u32::from_le_bytes(word));
        }
        Sequence::new(m, items, role)
    }

    /// Accepts either form; binary is recognised by a non-UTF-8 or non-`M=`
    /// prefix.
    pub fn from_bytes(bytes: &[u8], role: Role) -> Result<Self> {
        if bytes.starts_with(b"M=") {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
            Sequence::from_text(text, role)
        } else {
            Sequence::read_binary(bytes, role)
        }
    }
}

/// The openness predicate on raw symbols.
#[inline]
pub fn open_symbols(x: u32, y: u32) -> bool {
    x != y
}

/// True iff `X[i1] != Y[i2]`.
pub fn is_open(x: &Sequence, y: &Sequence, s: Site) -> Result<bool> {
    Ok(open_symbols(x.get(s.i1)?, y.get(s.i2)?))
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub(crate) fn symbol_from_word(r: u64, m: u32) -> u32 {
    ((r as u128 * m as u128) >> 64) as u32 + 1
}

/// `n` i.i.d. uniform symbols on `1..=M`; see the module docs for the exact
/// generator.
pub fn generate(m: u32, n: usize, seed: u64, role: Role) -> Result<Sequence> {
    if m < 3 {
        return Err(Error::Domain(format!("alphabet size {m} < 3")));
    }
    if n == 0 {
        return Err(Error::Domain("sequence length must be >= 1".into()));
    }
    let mut rng = rng_for(seed, role.stream());
    let items = (0..n)
        .map(|_| symbol_from_word(rng.next_u64(), m))
        .collect();
    Ok(Sequence { m, items, role })
}

/// Symbols drawn from a fixed residue class: odd values for `X`, even values
/// for `Y` (both within `1..=M`). Every site of such a pair is open.
pub fn generate_disjoint(m: u32, n: usize, seed: u64, role: Role) -> Result<Sequence> {
    if m < 4 {
        return Err(Error::Domain(format!(
            "disjoint alphabets need M >= 4, got {m}"
        )));
    }
    let half = m / 2;
    let mut rng = rng_for(seed, role.stream());
    let items = (0..n)
        .map(|_| {
            let k = symbol_from_word(rng.next_u64(), half);
            match role {
                Role::X => 2 * k - 1,
                Role::Y => 2 * k,
            }
        })
        .collect();
    Sequence::new(m, items, role)
}
