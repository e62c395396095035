//! Admissible assignments and routes through rectangles of rectangles.
//!
//! An assignment matches marked positions of one interval to unmarked
//! positions of another while keeping every gap ratio inside a slope window.
//! A route is a chunk-level path through a grid of cells, entering and
//! leaving each cell through ports whose slope is again windowed.
//!
//! Every validity verdict is exact: gaps and port offsets are integers and go
//! through [`SlopeWindow`].

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Params, ValidationReport};
use crate::slope::{HalfExp, SlopeWindow};

type Q = Ratio<i128>;

/// Inclusive integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::Domain(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// `[lo + k, hi - k]`, or `None` when nothing is left.
    pub fn trimmed(&self, k: usize) -> Option<(usize, usize)> {
        let lo = self.lo.checked_add(k)?;
        let hi = self.hi.checked_sub(k)?;
        (lo <= hi).then_some((lo, hi))
    }
}

/// An assignment `tau: H -> H'` with `tau(h[i]) = h_prime[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub i1: Interval,
    pub i2: Interval,
    pub j: u32,
    pub h: Vec<usize>,
    pub h_prime: Vec<usize>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn tau(&self, x: usize) -> Option<usize> {
        self.h.iter().position(|&v| v == x).map(|i| self.h_prime[i])
    }

    pub fn tau_inv(&self, y: usize) -> Option<usize> {
        self.h_prime.iter().position(|&v| v == y).map(|i| self.h[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
enum Kind {
    /// `x` in `B`, image moves up with the member index.
    Marked,
    /// `y` in `B'`, preimage moves left with the member index.
    MarkedImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Pair {
    x: i64,
    y: i64,
    kind: Kind,
}

/// The shift family `tau_i(x) = tau_1(x) + i - 1` on `B` and
/// `tau_i^-1(y) = tau_1^-1(y) - i + 1` on `B'`, for `i` in `1..=size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentFamily {
    pub i1: Interval,
    pub i2: Interval,
    pub j: u32,
    pub b: Vec<usize>,
    pub b_prime: Vec<usize>,
    pub size: u64,
    base: Vec<Pair>,
}

impl AssignmentFamily {
    /// Member `i`, 1-based.
    pub fn member(&self, i: u64) -> Result<Assignment> {
        if i == 0 || i > self.size {
            return Err(Error::Bounds(format!("member {i} of {}", self.size)));
        }
        let d = (i - 1) as i64;
        let (h, h_prime) = self
            .base
            .iter()
            .map(|p| match p.kind {
                Kind::Marked => (p.x as usize, (p.y + d) as usize),
                Kind::MarkedImage => ((p.x - d) as usize, p.y as usize),
            })
            .unzip();
        Ok(Assignment {
            i1: self.i1,
            i2: self.i2,
            j: self.j,
            h,
            h_prime,
        })
    }

    pub fn members(&self) -> impl Iterator<Item = Assignment> + '_ {
        (1..=self.size).map(|i| self.member(i).expect("in range"))
    }
}

fn sorted_set(v: &[usize]) -> Vec<usize> {
    v.iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Gap between consecutive matched pairs as a function of the member shift
/// `d`: `g(d) = g0 + rate * d`.
#[derive(Debug, Clone, Copy)]
struct Lin {
    g0: i64,
    rate: i64,
}

impl Lin {
    fn at(&self, d: i64) -> i64 {
        self.g0 + self.rate * d
    }

    fn zeros(&self, dmax: i64) -> Zeros {
        if self.rate == 0 {
            return if self.g0 == 0 {
                Zeros::All
            } else {
                Zeros::None
            };
        }
        if (-self.g0) % self.rate != 0 {
            return Zeros::None;
        }
        let z = -self.g0 / self.rate;
        if (0..=dmax).contains(&z) {
            Zeros::At(z)
        } else {
            Zeros::None
        }
    }
}

/// Zero set of a gap over `[0, dmax]`.
#[derive(Debug, Clone, Copy)]
enum Zeros {
    None,
    At(i64),
    All,
}

impl Zeros {
    fn point(self) -> Option<i64> {
        match self {
            Zeros::At(z) => Some(z),
            _ => None,
        }
    }
}

/// Motion of a pair under the member shift: B images go up, B' preimages
/// go left, sentinels stay.
fn motion(kind: Option<Kind>) -> (i64, i64) {
    match kind {
        None => (0, 0),
        Some(Kind::Marked) => (0, 1),
        Some(Kind::MarkedImage) => (-1, 0),
    }
}

/// Is the gap from `p` to `q` admissible for every shift in `[0, dmax]`?
fn gap_ok(
    p: (i64, i64, Option<Kind>),
    q: (i64, i64, Option<Kind>),
    dmax: i64,
    win: &SlopeWindow,
) -> bool {
    let (pmx, pmy) = motion(p.2);
    let (qmx, qmy) = motion(q.2);
    let gx = Lin {
        g0: q.0 - p.0 - 1,
        rate: qmx - pmx,
    };
    let gy = Lin {
        g0: q.1 - p.1 - 1,
        rate: qmy - pmy,
    };
    for d in [0, dmax] {
        if gx.at(d) < 0 || gy.at(d) < 0 {
            return false;
        }
    }
    let (zx, zy) = (gx.zeros(dmax), gy.zeros(dmax));
    let zs = match (zx, zy) {
        (Zeros::All, Zeros::All) => return true,
        (Zeros::All, _) | (_, Zeros::All) => return false,
        (a, b) => [a.point(), b.point()],
    };
    if zs.iter().flatten().any(|&z| gx.at(z) != gy.at(z)) {
        return false;
    }
    let probes = zs.iter().flatten().flat_map(|&z| [z - 1, z + 1]);
    [0, dmax]
        .into_iter()
        .chain(probes)
        .filter(|d| (0..=dmax).contains(d))
        .filter(|&d| gx.at(d) > 0)
        .all(|d| win.contains(gy.at(d), gx.at(d)))
}

/// Admissibility of one assignment against the marked sets.
pub fn validate_assignment(
    a: &Assignment,
    b: &[usize],
    b_prime: &[usize],
    params: &Params,
) -> ValidationReport {
    let mut v = Vec::new();
    let trim = match params.scale_pow(a.j, params.p_run()) {
        Ok(t) => t as usize,
        Err(e) => return ValidationReport::from_violations(vec![e.to_string()]),
    };
    let b = sorted_set(b);
    let b_prime = sorted_set(b_prime);
    let star2 = a.i2.trimmed(trim);
    if a.h.len() != a.h_prime.len() {
        v.push("(i) |H| != |H'|".to_string());
        return ValidationReport::from_violations(v);
    }
    if a.h.len() != b.len() + b_prime.len() {
        v.push(format!(
            "(i) l = {} but |B| + |B'| = {}",
            a.h.len(),
            b.len() + b_prime.len()
        ));
    }
    if a.h.windows(2).any(|w| w[0] >= w[1]) {
        v.push("(i) H not strictly increasing".into());
    }
    if a.h_prime.windows(2).any(|w| w[0] >= w[1]) {
        v.push("(i) H' not strictly increasing".into());
    }
    if let Some(x) = b.iter().find(|x| !a.h.contains(x)) {
        v.push(format!("(i) {x} in B but not in H"));
    }
    if let Some(y) = b_prime.iter().find(|y| !a.h_prime.contains(y)) {
        v.push(format!("(i) {y} in B' but not in H'"));
    }
    if let Some(x) = a.h.iter().find(|&&x| !a.i1.contains(x)) {
        v.push(format!("(i) {x} in H outside I1"));
    }
    if let Some(y) = a
        .h_prime
        .iter()
        .find(|&&y| star2.is_none_or(|(lo, hi)| y < lo || y > hi))
    {
        v.push(format!("(i) {y} in H' outside I2*"));
    }
    for x in &b {
        if let Some(y) = a.tau(*x) {
            if b_prime.binary_search(&y).is_ok() {
                v.push(format!("(ii) tau({x}) = {y} lies in B'"));
            }
        }
    }
    let win = SlopeWindow::new(params.r, HalfExp::assign(a.j));
    let xs: Vec<i64> = std::iter::once(a.i1.lo as i64 - 1)
        .chain(a.h.iter().map(|&x| x as i64))
        .chain(std::iter::once(a.i1.hi as i64 + 1))
        .collect();
    let ys: Vec<i64> = std::iter::once(a.i2.lo as i64 - 1)
        .chain(a.h_prime.iter().map(|&y| y as i64))
        .chain(std::iter::once(a.i2.hi as i64 + 1))
        .collect();
    for i in 0..xs.len() - 1 {
        let gx = xs[i + 1] - xs[i] - 1;
        let gy = ys[i + 1] - ys[i] - 1;
        let ok = if gx == 0 && gy == 0 {
            true
        } else {
            win.contains(gy, gx)
        };
        if !ok {
            v.push(format!("(iii) gap {i}: {gy}/{gx} outside the slope window"));
        }
    }
    ValidationReport::from_violations(v)
}

/// A family of `L_j^2` admissible assignments of `(I1, I2)` w.r.t.
/// `(B, B')` with the shift structure.
pub fn build_assignments(
    i1: Interval,
    i2: Interval,
    b: &[usize],
    b_prime: &[usize],
    j: u32,
    params: &Params,
) -> Result<AssignmentFamily> {
    let lj = params.scale(j)?;
    let size = lj.checked_mul(lj).ok_or(Error::Overflow {
        what: "assignment family size",
        level: j,
    })?;
    let trim = params.scale_pow(j, params.p_run())? as usize;
    let b = sorted_set(b);
    let b_prime = sorted_set(b_prime);
    let (t, tp) = (i1.len() as i64, i2.len() as i64);

    if !SlopeWindow::new(params.r, HalfExp::chunk(j)).contains(tp, t) {
        return Err(Error::Infeasible(format!(
            "t'/t = {tp}/{t} outside the interval-ratio window"
        )));
    }
    let cap = 3 * params.k0 as usize;
    if b.len() > cap || b_prime.len() > cap {
        return Err(Error::Infeasible(format!(
            "|B| = {}, |B'| = {} exceed 3 k0 = {cap}",
            b.len(),
            b_prime.len()
        )));
    }
    let star1 = i1.trimmed(trim);
    let star2 = i2.trimmed(trim);
    let inside = |s: Option<(usize, usize)>, v: &[usize]| {
        v.iter()
            .all(|&x| s.is_some_and(|(lo, hi)| lo <= x && x <= hi))
    };
    if !inside(star1, &b) || !inside(star2, &b_prime) {
        return Err(Error::Infeasible(
            "marked positions must lie in the trimmed intervals".into(),
        ));
    }

    let dmax = (size - 1) as i64;
    let base = if b.is_empty() && b_prime.is_empty() {
        Vec::new()
    } else {
        let (lo2, hi2) = star2.expect("non-empty B' or B forces a trimmed interval");
        let search = Search {
            a: i1.lo as i64 - 1,
            b: i2.lo as i64 - 1,
            t,
            tp,
            dmax,
            i1,
            y_lo: lo2 as i64,
            y_hi: hi2 as i64,
            bs: b.iter().map(|&x| x as i64).collect(),
            bps: b_prime.iter().map(|&y| y as i64).collect(),
            win: SlopeWindow::new(params.r, HalfExp::assign(j)),
            edges: window_edges(params.r, HalfExp::assign(j)),
        };
        search.run().ok_or_else(|| {
            Error::Infeasible(format!(
                "no shift family of size {size} found for |B| = {}, |B'| = {}",
                b.len(),
                b_prime.len()
            ))
        })?
    };
    Ok(AssignmentFamily {
        i1,
        i2,
        j,
        b,
        b_prime,
        size,
        base,
    })
}

fn window_edges(r: u64, h: HalfExp) -> [(i128, i128); 2] {
    const DEN: i128 = 1 << 20;
    let eps = h.eps();
    let lo = ((1.0 - eps) / r as f64 * DEN as f64).ceil() as i128 + 1;
    let hi = (r as f64 * (1.0 + eps) * DEN as f64).floor() as i128 - 1;
    [(lo, DEN), (hi, DEN)]
}

type Source = (Option<StateKey>, (i64, i64, Option<Kind>), i64);

/// Dynamic program over merge orders of `B` and `B'`, one free coordinate per
/// pair, minimising the distance to the family-centred diagonal.
struct Search {
    a: i64,
    b: i64,
    t: i64,
    tp: i64,
    dmax: i64,
    i1: Interval,
    y_lo: i64,
    y_hi: i64,
    bs: Vec<i64>,
    bps: Vec<i64>,
    win: SlopeWindow,
    /// Rational slopes just inside both window edges.
    edges: [(i128, i128); 2],
}

type StateKey = (usize, usize, bool);

#[derive(Clone, Copy)]
struct Node {
    cost: i64,
    prev: Option<(StateKey, i64)>,
}

/// Offsets around each static candidate.
const LOCAL: i64 = 2;
/// Free values kept per merge state.
const KEEP: usize = 64;

impl Search {
    /// Diagonal through both sentinels, rounded.
    fn line_y(&self, x: i64) -> i64 {
        let num = (x - self.a) as i128 * (self.tp + 1) as i128;
        let den = (self.t + 1) as i128;
        self.b + ((2 * num + den) / (2 * den)) as i64
    }

    fn line_x(&self, y: i64) -> i64 {
        let num = (y - self.b) as i128 * (self.t + 1) as i128;
        let den = (self.tp + 1) as i128;
        self.a + ((2 * num + den) / (2 * den)) as i64
    }

    fn centre(&self, kind: Kind, fixed: i64) -> i64 {
        match kind {
            Kind::Marked => self.line_y(fixed) - self.dmax / 2,
            Kind::MarkedImage => self.line_x(fixed) + (self.dmax + 1) / 2,
        }
    }

    fn free_ok(&self, kind: Kind, v: i64) -> bool {
        match kind {
            Kind::Marked => {
                v >= self.y_lo
                    && v + self.dmax <= self.y_hi
                    && !self.bps.iter().any(|&y| y >= v && y <= v + self.dmax)
            }
            Kind::MarkedImage => {
                v - self.dmax >= self.i1.lo as i64
                    && v <= self.i1.hi as i64
                    && !self.bs.iter().any(|&x| x >= v - self.dmax && x <= v)
            }
        }
    }

    /// Range of the free coordinate that keeps every member inside its domain.
    fn free_range(&self, kind: Kind) -> (i64, i64) {
        match kind {
            Kind::Marked => (self.y_lo, self.y_hi - self.dmax),
            Kind::MarkedImage => (self.i1.lo as i64 + self.dmax, self.i1.hi as i64),
        }
    }

    fn static_candidates(&self, kind: Kind, fixed: i64) -> Vec<i64> {
        let (lo, hi) = self.free_range(kind);
        let c = self.centre(kind, fixed).clamp(lo, hi.max(lo));
        let mut out: Vec<i64> = (-LOCAL..=LOCAL)
            .flat_map(|d| [c + d, lo + d, hi - d])
            .collect();
        let others = match kind {
            Kind::Marked => &self.bps,
            Kind::MarkedImage => &self.bs,
        };
        let reach = 8 * (self.dmax + 1);
        for &o in others.iter().filter(|&&o| (o - c).abs() <= reach) {
            for g in 0..=LOCAL {
                match kind {
                    Kind::Marked => {
                        out.push(o + 1 + g);
                        out.push(o - 1 - g - self.dmax);
                    }
                    Kind::MarkedImage => {
                        out.push(o - 1 - g);
                        out.push(o + 1 + g + self.dmax);
                    }
                }
            }
        }
        out
    }

    /// Free values whose gap from `p` has slope 1, the overall slope, or the
    /// slope still needed to reach `end`, at chosen members of the family.
    fn tracking_candidates(
        &self,
        p: (i64, i64, Option<Kind>),
        kind: Kind,
        fixed: i64,
        end: (i64, i64, Option<Kind>),
    ) -> Vec<i64> {
        let (pmx, pmy) = motion(p.2);
        let mut targets = vec![(1i128, 1i128, self.dmax / 2)];
        targets.push(((self.tp + 1) as i128, (self.t + 1) as i128, self.dmax / 2));
        let (ex, ey) = (end.0 - p.0, end.1 - p.1);
        if ex > 0 && ey > 0 {
            for at in [0, self.dmax / 2, self.dmax] {
                targets.push((ey as i128, ex as i128, at));
            }
        }
        for &(num, den) in &self.edges {
            for at in [0, self.dmax] {
                targets.push((num, den, at));
            }
        }
        let mut out = Vec::with_capacity(4 * targets.len());
        for (num, den, at) in targets {
            // Target gy(at) * den = gx(at) * num.
            let (base, q) = match kind {
                Kind::Marked => {
                    let gx = (fixed - p.0 - 1 - pmx * at) as i128;
                    (p.1 + 1 - (1 - pmy) * at, (gx * num).div_euclid(den))
                }
                Kind::MarkedImage => {
                    let gy = (fixed - p.1 - 1 - pmy * at) as i128;
                    (p.0 + 1 + (1 + pmx) * at, (gy * den).div_euclid(num))
                }
            };
            let v = base + q as i64;
            out.extend([v - 1, v, v + 1, v + 2]);
        }
        out
    }

    fn pair(&self, kind: Kind, fixed: i64, free: i64) -> (i64, i64, Option<Kind>) {
        match kind {
            Kind::Marked => (fixed, free, Some(kind)),
            Kind::MarkedImage => (free, fixed, Some(kind)),
        }
    }

    fn run(&self) -> Option<Vec<Pair>> {
        let (nb, nbp) = (self.bs.len(), self.bps.len());
        let statics: Vec<Vec<i64>> = self
            .bs
            .iter()
            .map(|&x| (Kind::Marked, x))
            .chain(self.bps.iter().map(|&y| (Kind::MarkedImage, y)))
            .map(|(kind, fixed)| {
                let mut c: Vec<i64> = self
                    .static_candidates(kind, fixed)
                    .into_iter()
                    .filter(|&v| self.free_ok(kind, v))
                    .collect();
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        let start = (self.a, self.b, None);
        let end = (self.a + self.t + 1, self.b + self.tp + 1, None);

        let mut table: HashMap<StateKey, HashMap<i64, Node>> = HashMap::new();
        for s in 0..nb + nbp {
            for i in 0..=nb.min(s) {
                let k = s - i;
                if k > nbp {
                    continue;
                }
                // Source states: the sentinel at s = 0, else filled states.
                let sources: Vec<Source> = if s == 0 {
                    vec![(None, start, 0)]
                } else {
                    let mut v = Vec::new();
                    for last_b in [true, false] {
                        let key = (i, k, last_b);
                        if let Some(m) = table.get(&key) {
                            for (&free, node) in m {
                                let (kind, fixed) = if last_b {
                                    (Kind::Marked, self.bs[i - 1])
                                } else {
                                    (Kind::MarkedImage, self.bps[k - 1])
                                };
                                v.push((Some(key), self.pair(kind, fixed, free), node.cost));
                            }
                        }
                    }
                    v
                };
                for next_b in [true, false] {
                    let (ni, nk) = if next_b { (i + 1, k) } else { (i, k + 1) };
                    if ni > nb || nk > nbp {
                        continue;
                    }
                    let (kind, fixed, idx) = if next_b {
                        (Kind::Marked, self.bs[i], i)
                    } else {
                        (Kind::MarkedImage, self.bps[k], nb + k)
                    };
                    let centre = self.centre(kind, fixed);
                    let mut fresh: HashMap<i64, Node> = HashMap::new();
                    for (src_key, p, cost) in &sources {
                        let dynamic = self
                            .tracking_candidates(*p, kind, fixed, end)
                            .into_iter()
                            .filter(|&v| self.free_ok(kind, v));
                        for v in statics[idx].iter().copied().chain(dynamic) {
                            let q = self.pair(kind, fixed, v);
                            if !gap_ok(*p, q, self.dmax, &self.win) {
                                continue;
                            }
                            let c = cost + (v - centre).abs();
                            let better = fresh.get(&v).is_none_or(|n| c < n.cost);
                            if better {
                                fresh.insert(
                                    v,
                                    Node {
                                        cost: c,
                                        prev: src_key.map(|key| (key, p_free(*p))),
                                    },
                                );
                            }
                        }
                    }
                    let entry = table.entry((ni, nk, next_b)).or_default();
                    for (v, n) in fresh {
                        let better = entry.get(&v).is_none_or(|m| n.cost < m.cost);
                        if better {
                            entry.insert(v, n);
                        }
                    }
                    if entry.len() > KEEP {
                        let mut all: Vec<(i64, Node)> = entry.drain().collect();
                        all.sort_by_key(|(v, n)| (n.cost, *v));
                        all.truncate(KEEP);
                        entry.extend(all);
                    }
                }
            }
        }

        // Close against the end sentinel and walk back.
        let mut best: Option<(i64, StateKey, i64)> = None;
        for last_b in [true, false] {
            let key = (nb, nbp, last_b);
            let Some(m) = table.get(&key) else { continue };
            for (&free, node) in m {
                let (kind, fixed) = if last_b {
                    (Kind::Marked, self.bs[nb - 1])
                } else {
                    (Kind::MarkedImage, self.bps[nbp - 1])
                };
                if gap_ok(self.pair(kind, fixed, free), end, self.dmax, &self.win)
                    && best.is_none_or(|(c, _, _)| node.cost < c)
                {
                    best = Some((node.cost, key, free));
                }
            }
        }
        let (_, mut key, mut free) = best?;
        let mut out = Vec::new();
        loop {
            let (i, k, last_b) = key;
            let (kind, fixed) = if last_b {
                (Kind::Marked, self.bs[i - 1])
            } else {
                (Kind::MarkedImage, self.bps[k - 1])
            };
            let (x, y, _) = self.pair(kind, fixed, free);
            out.push(Pair { x, y, kind });
            match table[&key][&free].prev {
                Some((pk, pf)) => {
                    key = pk;
                    free = pf;
                }
                None => break,
            }
        }
        out.reverse();
        Some(out)
    }
}

fn p_free(p: (i64, i64, Option<Kind>)) -> i64 {
    match p.2 {
        Some(Kind::MarkedImage) => p.0,
        _ => p.1,
    }
}

/// `2 k0 R^3 10^(j+8)`.
pub fn paper_margin(params: &Params, j: u32) -> Result<u64> {
    let ten = 10u64.checked_pow(j + 8);
    ten.and_then(|t| {
        params
            .r
            .checked_pow(3)
            .and_then(|r3| r3.checked_mul(2 * params.k0))
            .and_then(|c| c.checked_mul(t))
    })
    .ok_or(Error::Overflow {
        what: "avoidance margin",
        level: j,
    })
}

/// Smallest sup-norm distance from the pairs over `B` and `B'` to `S`.
pub fn avoidance_distance(
    a: &Assignment,
    b: &[usize],
    b_prime: &[usize],
    s: &[(usize, usize)],
) -> Option<u64> {
    let pts = b
        .iter()
        .filter_map(|&x| a.tau(x).map(|y| (x, y)))
        .chain(b_prime.iter().filter_map(|&y| a.tau_inv(y).map(|x| (x, y))));
    let mut best: Option<u64> = None;
    for (x, y) in pts {
        for &(sx, sy) in s {
            let d = x.abs_diff(sx).max(y.abs_diff(sy)) as u64;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// First member of the family whose matched pairs stay at sup-norm distance
/// at least `margin` from every point of `s`.
pub fn select_avoiding(
    family: &AssignmentFamily,
    s: &[(usize, usize)],
    margin: u64,
) -> Result<(u64, Assignment)> {
    for i in 1..=family.size {
        let a = family.member(i)?;
        match avoidance_distance(&a, &family.b, &family.b_prime, s) {
            Some(d) if d < margin => continue,
            _ => return Ok((i, a)),
        }
    }
    Err(Error::Exhausted(format!(
        "none of {} assignments keeps distance {margin} from {} forbidden points",
        family.size,
        s.len()
    )))
}

/// Cell widths `n` (one per column) and heights `n_prime` (one per row).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDims {
    pub n: Vec<u64>,
    pub n_prime: Vec<u64>,
}

impl CellDims {
    pub fn uniform(t: usize, tp: usize, w: u64, h: u64) -> Self {
        CellDims {
            n: vec![w; t],
            n_prime: vec![h; tp],
        }
    }

    pub fn t(&self) -> usize {
        self.n.len()
    }

    pub fn t_prime(&self) -> usize {
        self.n_prime.len()
    }
}

/// A point inside a cell, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Port {
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteCell {
    /// 1-based `(column, row)` in the cell grid.
    pub cell: (usize, usize),
    pub entry: Port,
    pub exit: Port,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub j: u32,
    pub dims: CellDims,
    pub cells: Vec<RouteCell>,
}

impl Route {
    pub fn vertices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().map(|c| c.cell)
    }

    /// Columns visited in row `k`.
    pub fn section(&self, k: usize) -> Vec<usize> {
        self.vertices().filter(|v| v.1 == k).map(|v| v.0).collect()
    }
}

/// Where a route starts or ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Corner,
    Port(Port),
}

fn margin_l(params: &Params, j: u32) -> Result<u64> {
    if j == 0 {
        return Err(Error::Domain("routes are defined from level 1".into()));
    }
    params.scale(j - 1)
}

/// Conditions of a route: oriented path, port windows, per-cell slopes,
/// matching consecutive ports.
pub fn validate_route(r: &Route, params: &Params) -> ValidationReport {
    let mut v = Vec::new();
    let l = match margin_l(params, r.j) {
        Ok(l) => l,
        Err(e) => return ValidationReport::from_violations(vec![e.to_string()]),
    };
    let (t, tp) = (r.dims.t(), r.dims.t_prime());
    if r.cells.is_empty() {
        return ValidationReport::from_violations(vec!["(i) empty route".into()]);
    }
    if r.cells[0].cell != (1, 1) || r.cells.last().expect("non-empty").cell != (t, tp) {
        v.push(format!("(i) path does not run from (1, 1) to ({t}, {tp})"));
    }
    for (i, w) in r.cells.windows(2).enumerate() {
        let (a, b) = (w[0].cell, w[1].cell);
        if !((b.0 == a.0 + 1 && b.1 == a.1) || (b.0 == a.0 && b.1 == a.1 + 1)) {
            v.push(format!("(i) step {i}: {a:?} -> {b:?} is not right or up"));
        }
    }
    let win = SlopeWindow::new(params.r, HalfExp::route(r.j));
    let last = r.cells.len() - 1;
    for (i, c) in r.cells.iter().enumerate() {
        let (col, row) = c.cell;
        if col == 0 || col > t || row == 0 || row > tp {
            v.push(format!("(i) cell {:?} outside the grid", c.cell));
            continue;
        }
        let (n, np) = (r.dims.n[col - 1], r.dims.n_prime[row - 1]);
        let in_x = |x: u64| l <= x && x + l <= n;
        let in_y = |y: u64| l <= y && y + l <= np;
        let entry_ok = (in_x(c.entry.x) && c.entry.y == 1)
            || (c.entry.x == 1 && in_y(c.entry.y))
            || (i == 0 && c.entry == Port { x: 1, y: 1 });
        let exit_ok = (in_x(c.exit.x) && c.exit.y == np)
            || (c.exit.x == n && in_y(c.exit.y))
            || (i == last && c.exit == Port { x: n, y: np });
        if !entry_ok {
            v.push(format!(
                "(ii) cell {i}: entry {:?} outside the port windows",
                c.entry
            ));
        }
        if !exit_ok {
            v.push(format!(
                "(ii) cell {i}: exit {:?} outside the port windows",
                c.exit
            ));
        }
        let dy = c.exit.y as i64 - c.entry.y as i64;
        let dx = c.exit.x as i64 - c.entry.x as i64;
        if !win.contains(dy, dx) {
            v.push(format!(
                "(iii) cell {i}: slope {dy}/{dx} outside the window"
            ));
        }
        if i < last {
            let nx = r.cells[i + 1].entry;
            if c.exit.x != nx.x && c.exit.y != nx.y {
                v.push(format!(
                    "(iv) cell {i}: exit and next entry share no coordinate"
                ));
            }
        }
    }
    ValidationReport::from_violations(v)
}

/// Is every vertex within L1 distance `radius` of the segment from `(0, 0)`
/// to `(t, t')`?
pub fn within_band(r: &Route, radius: u64) -> bool {
    let (t, tp) = (r.dims.t() as i128, r.dims.t_prime() as i128);
    let rad = radius as i128;
    r.vertices().all(|(x, y)| {
        let (x, y) = (x as i128, y as i128);
        // Minimum over the two breakpoints x = v1/t and x = v2/t'.
        (y * t - x * tp).abs() <= rad * t || (x * tp - y * t).abs() <= rad * tp
    })
}

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

fn floor_q(v: Q) -> i128 {
    v.floor().to_integer()
}

fn ceil_q(v: Q) -> i128 {
    v.ceil().to_integer()
}

/// Continuous position (in cell units) of a start or end.
fn anchor(end: End, dims: &CellDims, at_start: bool) -> Result<(Q, Q)> {
    let (t, tp) = (dims.t() as i128, dims.t_prime() as i128);
    let (n, np) = if at_start {
        (dims.n[0] as i128, dims.n_prime[0] as i128)
    } else {
        (
            dims.n[dims.t() - 1] as i128,
            dims.n_prime[dims.t_prime() - 1] as i128,
        )
    };
    // Ports sit at half-integer positions so that the construction commutes
    // with the grid flips away from exact lattice ties.
    Ok(match (end, at_start) {
        (End::Corner, true) => (q(0, 1), q(0, 1)),
        (End::Corner, false) => (q(t, 1), q(tp, 1)),
        (End::Port(p), true) if p.y == 1 && p.x > 1 => (q(2 * p.x as i128 - 1, 2 * n), q(0, 1)),
        (End::Port(p), true) if p.x == 1 => (q(0, 1), q(2 * p.y as i128 - 1, 2 * np)),
        (End::Port(p), false) if p.y as i128 == np && (p.x as i128) < n => {
            (q(t - 1, 1) + q(2 * p.x as i128 - 1, 2 * n), q(tp, 1))
        }
        (End::Port(p), false) if p.x as i128 == n => {
            (q(t, 1), q(tp - 1, 1) + q(2 * p.y as i128 - 1, 2 * np))
        }
        (End::Port(p), _) => {
            return Err(Error::Domain(format!(
                "port {p:?} is not on the required sides"
            )))
        }
    })
}

/// Route along the monotone polyline through `pts` (cell units).
fn polyline_route(
    dims: &CellDims,
    j: u32,
    params: &Params,
    pts: &[(Q, Q)],
    start: End,
    end: End,
) -> Result<Route> {
    let l = margin_l(params, j)? as i128;
    let (t, tp) = (dims.t(), dims.t_prime());
    if pts.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 <= w[0].1) {
        return Err(Error::Infeasible(
            "polyline is not strictly increasing".into(),
        ));
    }
    let y_at = |x: Q| -> Q {
        let k = pts
            .windows(2)
            .position(|w| w[1].0 >= x)
            .unwrap_or(pts.len() - 2);
        let (p, r) = (pts[k], pts[k + 1]);
        p.1 + (r.1 - p.1) * (x - p.0) / (r.0 - p.0)
    };
    let x_at = |y: Q| -> Q {
        let k = pts
            .windows(2)
            .position(|w| w[1].1 >= y)
            .unwrap_or(pts.len() - 2);
        let (p, r) = (pts[k], pts[k + 1]);
        p.0 + (r.0 - p.0) * (y - p.1) / (r.1 - p.1)
    };
    let clamp = |v: i128, n: i128| v.max(l).min(n - l);

    // Right exits of columns 1..t-1 and top exits of rows 1..t'-1.
    let mut right: HashMap<usize, (usize, u64)> = HashMap::new();
    let mut top: HashMap<usize, (usize, u64)> = HashMap::new();
    let mut verts: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..t {
        let h = y_at(q(i as i128, 1));
        let row = floor_q(h) + 1;
        let np = dims.n_prime[row as usize - 1] as i128;
        let frac = h - q(floor_q(h), 1);
        let ys = floor_q(frac * q(np, 1)) + 1;
        right.insert(i, (row as usize, clamp(ys, np) as u64));
        verts.insert((i, row as usize));
    }
    for i in 1..tp {
        let g = x_at(q(i as i128, 1));
        let col = ceil_q(g);
        let n = dims.n[col as usize - 1] as i128;
        let frac = g - q(col - 1, 1);
        let xs = ceil_q(frac * q(n, 1));
        top.insert(i, (col as usize, clamp(xs, n) as u64));
        verts.insert((col as usize, i));
    }
    verts.insert((t, tp));
    let mut path: Vec<(usize, usize)> = verts.into_iter().collect();
    path.sort_by_key(|&(x, y)| (x + y, x));

    let start_port = match start {
        End::Corner => Port { x: 1, y: 1 },
        End::Port(p) => p,
    };
    let end_port = match end {
        End::Corner => Port {
            x: dims.n[t - 1],
            y: dims.n_prime[tp - 1],
        },
        End::Port(p) => p,
    };
    let mut cells = Vec::with_capacity(path.len());
    for (k, &(c, r)) in path.iter().enumerate() {
        let entry = if k == 0 {
            start_port
        } else if path[k - 1] == (c - 1, r) {
            let (row, y) = right[&(c - 1)];
            debug_assert_eq!(row, r);
            Port { x: 1, y }
        } else {
            let (col, x) = top[&(r - 1)];
            debug_assert_eq!(col, c);
            Port { x, y: 1 }
        };
        let exit = if k + 1 == path.len() {
            end_port
        } else if path[k + 1] == (c + 1, r) {
            Port {
                x: dims.n[c - 1],
                y: right[&c].1,
            }
        } else {
            Port {
                x: top[&r].1,
                y: dims.n_prime[r - 1],
            }
        };
        cells.push(RouteCell {
            cell: (c, r),
            entry,
            exit,
        });
    }
    Ok(Route {
        j,
        dims: dims.clone(),
        cells,
    })
}

fn check_dims(dims: &CellDims, j: u32, params: &Params) -> Result<()> {
    let l = margin_l(params, j)?;
    let lo = params.scale_pow(j - 1, params.p_cell())?;
    let hi = lo.checked_add(l).ok_or(Error::Overflow {
        what: "cell size",
        level: j,
    })?;
    if dims.t() == 0 || dims.t_prime() == 0 {
        return Err(Error::Infeasible("empty cell grid".into()));
    }
    if let Some(bad) = dims
        .n
        .iter()
        .chain(&dims.n_prime)
        .find(|&&n| n < lo || n > hi)
    {
        return Err(Error::Infeasible(format!(
            "cell side {bad} outside [{lo}, {hi}]"
        )));
    }
    let win = SlopeWindow::new(params.r, HalfExp::assign(j));
    if !win.contains(dims.t_prime() as i64, dims.t() as i64) {
        return Err(Error::Infeasible(format!(
            "t'/t = {}/{} outside the slope window",
            dims.t_prime(),
            dims.t()
        )));
    }
    Ok(())
}

fn checked(r: Route, params: &Params) -> Result<Route> {
    let rep = validate_route(&r, params);
    if rep.ok {
        Ok(r)
    } else {
        Err(Error::Infeasible(format!(
            "straight-line construction fails at this scale: {}",
            rep.violations.join("; ")
        )))
    }
}

/// Corner-to-corner route along the diagonal of the cell grid.
pub fn build_cc_route(dims: &CellDims, j: u32, params: &Params) -> Result<Route> {
    check_dims(dims, j, params)?;
    let pts = [
        (q(0, 1), q(0, 1)),
        (q(dims.t() as i128, 1), q(dims.t_prime() as i128, 1)),
    ];
    checked(
        polyline_route(dims, j, params, &pts, End::Corner, End::Corner)?,
        params,
    )
}

/// Corner-to-corner route avoiding `forbidden` cells: the diagonal first,
/// then up to `attempts` two-segment lines bent at a random midpoint.
pub fn build_cc_route_avoiding(
    dims: &CellDims,
    j: u32,
    params: &Params,
    forbidden: &[(usize, usize)],
    attempts: usize,
    seed: u64,
) -> Result<Route> {
    check_dims(dims, j, params)?;
    let (t, tp) = (dims.t() as i128, dims.t_prime() as i128);
    let bad: BTreeSet<(usize, usize)> = forbidden.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..=attempts {
        let pts = if k == 0 {
            vec![(q(0, 1), q(0, 1)), (q(t, 1), q(tp, 1))]
        } else {
            let spread = (t.min(tp) / 4).max(1);
            let off: i128 = rng.gen_range(-spread..=spread);
            let at: i128 = rng.gen_range(1..t.max(2));
            let mx = q(2 * at + 1, 2);
            let my = mx * q(tp, t) + q(2 * off + 1, 2);
            if my <= q(0, 1) || my >= q(tp, 1) || mx >= q(t, 1) {
                continue;
            }
            vec![(q(0, 1), q(0, 1)), (mx, my), (q(t, 1), q(tp, 1))]
        };
        let r = polyline_route(dims, j, params, &pts, End::Corner, End::Corner)?;
        if validate_route(&r, params).ok && r.vertices().all(|v| !bad.contains(&v)) {
            return Ok(r);
        }
    }
    Err(Error::Exhausted(format!(
        "no route avoiding {} cells after {attempts} attempts",
        bad.len()
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    CornerToSide,
    SideToCorner,
    SideToSide,
}

/// `5^(j+6) R`.
pub fn connection_threshold(params: &Params, j: u32) -> Result<u64> {
    5u64.checked_pow(j + 6)
        .and_then(|v| v.checked_mul(params.r))
        .ok_or(Error::Overflow {
            what: "connection threshold",
            level: j,
        })
}

/// Entry ports on the first cell and exit ports on the last cell.
pub fn side_ports(dims: &CellDims, j: u32, params: &Params) -> Result<(Vec<Port>, Vec<Port>)> {
    let l = margin_l(params, j)?;
    let (n1, np1) = (dims.n[0], dims.n_prime[0]);
    let (nt, npt) = (dims.n[dims.t() - 1], dims.n_prime[dims.t_prime() - 1]);
    let span = |n: u64| l..=n.saturating_sub(l);
    let s_in = span(n1)
        .map(|x| Port { x, y: 1 })
        .chain(span(np1).map(|y| Port { x: 1, y }))
        .collect();
    let s_out = span(nt)
        .map(|x| Port { x, y: npt })
        .chain(span(npt).map(|y| Port { x: nt, y }))
        .collect();
    Ok((s_in, s_out))
}

/// One route per required port (or port pair), each along the line through
/// its endpoints. `min_side` replaces `5^(j+6) R` as the lower bound on `t`
/// and `t'`.
pub fn build_connection(
    kind: ConnectionKind,
    dims: &CellDims,
    j: u32,
    params: &Params,
    min_side: u64,
) -> Result<Vec<Route>> {
    check_dims(dims, j, params)?;
    let (t, tp) = (dims.t() as u64, dims.t_prime() as u64);
    if t < min_side || tp < min_side {
        return Err(Error::Infeasible(format!(
            "t = {t}, t' = {tp} below the connection threshold {min_side}"
        )));
    }
    let (s_in, s_out) = side_ports(dims, j, params)?;
    let ends: Vec<(End, End)> = match kind {
        ConnectionKind::CornerToSide => {
            s_out.iter().map(|&b| (End::Corner, End::Port(b))).collect()
        }
        ConnectionKind::SideToCorner => s_in.iter().map(|&b| (End::Port(b), End::Corner)).collect(),
        ConnectionKind::SideToSide => s_in
            .iter()
            .flat_map(|&b| s_out.iter().map(move |&c| (End::Port(b), End::Port(c))))
            .collect(),
    };
    ends.into_iter()
        .map(|(s, e)| {
            let pts = [anchor(s, dims, true)?, anchor(e, dims, false)?];
            checked(polyline_route(dims, j, params, &pts, s, e)?, params)
        })
        .collect()
}

/// Route between arbitrary side ports or corners, unvalidated.
pub fn line_route(dims: &CellDims, j: u32, params: &Params, start: End, end: End) -> Result<Route> {
    let pts = [anchor(start, dims, true)?, anchor(end, dims, false)?];
    polyline_route(dims, j, params, &pts, start, end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toyish() -> Params {
        Params {
            r: 2,
            ..Params::toy()
        }
    }

    #[test]
    fn gap_motion_cases() {
        let win = SlopeWindow::new(2, HalfExp::assign(1));
        let start = (0, 0, None);
        // Sentinel to a B pair: y gap grows with d.
        assert!(gap_ok(start, (10, 10, Some(Kind::Marked)), 3, &win));
        assert!(!gap_ok(start, (2, 2, Some(Kind::Marked)), 10, &win));
        // B' pair then B pair at the same offsets: gaps grow together.
        assert!(gap_ok(
            (5, 5, Some(Kind::MarkedImage)),
            (6, 6, Some(Kind::Marked)),
            20,
            &win
        ));
        // B pair then B' pair: gaps shrink and must not cross.
        assert!(!gap_ok(
            (5, 5, Some(Kind::Marked)),
            (8, 8, Some(Kind::MarkedImage)),
            5,
            &win
        ));
        // Adjacent with one gap zero: x/0 is inadmissible.
        assert!(!gap_ok((1, 1, None), (2, 5, None), 0, &win));
        assert!(gap_ok((1, 1, None), (2, 2, None), 0, &win));
    }

    #[test]
    fn empty_marked_sets() {
        let p = toyish();
        let i = Interval::new(1, 100).unwrap();
        let fam = build_assignments(i, i, &[], &[], 1, &p).unwrap();
        assert_eq!(fam.size, 16);
        for a in fam.members() {
            assert!(a.is_empty());
            assert!(validate_assignment(&a, &[], &[], &p).ok);
        }
    }

    #[test]
    fn ratio_outside_window_is_infeasible() {
        let p = toyish();
        let r = build_assignments(
            Interval::new(1, 100).unwrap(),
            Interval::new(1, 400).unwrap(),
            &[],
            &[],
            1,
            &p,
        );
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn adjacent_a_with_huge_b_gap_is_reported() {
        let p = toyish();
        let a = Assignment {
            i1: Interval::new(1, 100).unwrap(),
            i2: Interval::new(1, 100).unwrap(),
            j: 1,
            h: vec![50, 51],
            h_prime: vec![30, 70],
        };
        let rep = validate_assignment(&a, &[50, 51], &[], &p);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|v| v.starts_with("(iii)")));
    }

    #[test]
    fn single_marked_point_family() {
        let p = Params {
            r: 2,
            p_run: 3,
            ..Params::toy()
        };
        let t = 600;
        let i = Interval::new(1, t).unwrap();
        let fam = build_assignments(i, i, &[t / 2], &[], 1, &p).unwrap();
        let first = fam.member(1).unwrap();
        for (k, a) in fam.members().enumerate() {
            let rep = validate_assignment(&a, &[t / 2], &[], &p);
            assert!(rep.ok, "{:?}", rep.violations);
            assert_eq!(a.tau(t / 2), Some(first.tau(t / 2).unwrap() + k));
        }
    }

    #[test]
    fn select_avoiding_basics() {
        let p = Params {
            r: 2,
            p_run: 3,
            ..Params::toy()
        };
        let i = Interval::new(1, 600).unwrap();
        let fam = build_assignments(i, i, &[300], &[], 1, &p).unwrap();
        let (k, _) = select_avoiding(&fam, &[], 10).unwrap();
        assert_eq!(k, 1);
        let (k, _) = select_avoiding(&fam, &[(1, 1)], 10).unwrap();
        assert_eq!(k, 1);
        let first = fam.member(1).unwrap().tau(300).unwrap();
        let (k, a) = select_avoiding(&fam, &[(300, first)], 3).unwrap();
        assert_eq!(k, 4);
        assert_eq!(a.tau(300), Some(first + 3));
        assert!(matches!(
            select_avoiding(&fam, &[(300, first + 8)], 100),
            Err(Error::Exhausted(_))
        ));
    }

    fn big_l() -> Params {
        Params {
            l0: 1000,
            r: 2,
            ..Params::toy()
        }
    }

    #[test]
    fn square_grid_hugs_the_diagonal() {
        let p = big_l();
        let n = p.scale_pow(0, p.p_cell()).unwrap() + 7;
        let dims = CellDims::uniform(12, 12, n, n);
        let r = build_cc_route(&dims, 1, &p).unwrap();
        assert!(validate_route(&r, &p).ok);
        assert!(within_band(&r, 50));
        for k in 1..=12 {
            assert!(
                r.section(k).iter().all(|&c| c + 1 >= k && c <= k + 1),
                "{k}"
            );
        }
    }

    #[test]
    fn hand_executed_three_by_two() {
        // t = 3, t' = 2: y_i = floor(2i/3) + 1 = (1, 2), x_1 = ceil(3/2) = 2.
        let p = Params {
            l0: 3,
            r: 2,
            ..Params::toy()
        };
        let dims = CellDims::uniform(3, 2, 10, 10);
        let r = line_route(&dims, 1, &p, End::Corner, End::Corner).unwrap();
        let v: Vec<_> = r.vertices().collect();
        assert_eq!(v, vec![(1, 1), (2, 1), (2, 2), (3, 2)]);
        // y~_1 = 2/3: y* = floor(20/3) + 1 = 7; y~_2 = 1/3: y* = 4.
        // x~_1 = 1/2: x* = 5. Clamping to [3, 7] keeps all three.
        assert_eq!(r.cells[0].exit, Port { x: 10, y: 7 });
        assert_eq!(r.cells[1].entry, Port { x: 1, y: 7 });
        assert_eq!(r.cells[1].exit, Port { x: 5, y: 10 });
        assert_eq!(r.cells[2].entry, Port { x: 5, y: 1 });
        assert_eq!(r.cells[2].exit, Port { x: 10, y: 4 });
        assert_eq!(r.cells[3].entry, Port { x: 1, y: 4 });
        assert_eq!(r.cells[3].exit, Port { x: 10, y: 10 });
    }

    #[test]
    fn route_preconditions() {
        let p = big_l();
        let n = p.scale_pow(0, p.p_cell()).unwrap();
        assert!(matches!(
            build_cc_route(&CellDims::uniform(10, 40, n, n), 1, &p),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            build_cc_route(&CellDims::uniform(10, 10, n - 1, n), 1, &p),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            build_connection(
                ConnectionKind::CornerToSide,
                &CellDims::uniform(10, 10, n, n),
                1,
                &p,
                20
            ),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn port_in_margin_is_reported() {
        let p = big_l();
        let n = p.scale_pow(0, p.p_cell()).unwrap();
        let dims = CellDims::uniform(1, 1, n, n);
        let ok = Route {
            j: 1,
            dims: dims.clone(),
            cells: vec![RouteCell {
                cell: (1, 1),
                entry: Port { x: 1, y: 1 },
                exit: Port { x: n, y: n },
            }],
        };
        assert!(validate_route(&ok, &p).ok);
        let mut bad = ok.clone();
        bad.cells[0].entry = Port { x: 5, y: 1 };
        let rep = validate_route(&bad, &p);
        assert!(rep.violations.iter().any(|v| v.starts_with("(ii)")));
    }
}
