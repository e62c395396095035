//! Oriented reachability in rectangles of the coordinate-percolation lattice.
//!
//! Paths use right `(+1, 0)` and up `(0, +1)` steps only. Everything is built
//! on one column sweep ([`Frontier::propagate_up`]); backward questions
//! ("which sources reach this target") run the same sweep on reversed
//! sequences.
//!
//! Side events quantify over chunk-level entry and exit data. `Condition S`
//! needs, for a pair of chunks, dense source and target sets that are
//! pairwise connected. Ordering sources along the lower-left boundary and
//! targets along the upper-right boundary, planarity makes each source's
//! reachable targets an interval of the live targets with endpoints monotone
//! in the source, so optimal source sets are windows and the search is
//! quadratic in the chunk size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{Frontier, SymbolMasks};
use crate::model::{Role, Sequence, Site};
use crate::params::Params;
use crate::slope::{density_required, HalfExp, SlopeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub a1: usize,
    pub a2: usize,
    pub b1: usize,
    pub b2: usize,
}

impl Rect {
    pub fn new(a1: usize, a2: usize, b1: usize, b2: usize) -> Result<Self> {
        if a1 == 0 || b1 == 0 || a1 > a2 || b1 > b2 {
            return Err(Error::Bounds(format!(
                "rectangle [{a1},{a2}]x[{b1},{b2}] is empty or not 1-based"
            )));
        }
        Ok(Rect { a1, a2, b1, b2 })
    }

    /// The full `x.len() x y.len()` window.
    pub fn full(x: &Sequence, y: &Sequence) -> Result<Self> {
        Rect::new(1, x.len(), 1, y.len())
    }

    pub fn width(&self) -> usize {
        self.a2 - self.a1 + 1
    }

    pub fn height(&self) -> usize {
        self.b2 - self.b1 + 1
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.a1..=self.a2).contains(&s.i1) && (self.b1..=self.b2).contains(&s.i2)
    }

    fn check(&self, x: &Sequence, y: &Sequence) -> Result<()> {
        if self.a2 > x.len() || self.b2 > y.len() {
            return Err(Error::Bounds(format!(
                "rectangle [{},{}]x[{},{}] exceeds sequences of length {} and {}",
                self.a1,
                self.a2,
                self.b1,
                self.b2,
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Left,
    Top,
    Right,
}

/// Column sweep over `xs` (columns) and `ys` (rows, bit 0 at the bottom).
/// The first visited column is `start`; `seed` bits there are kept where
/// open. `visit` sees every non-empty column; the sweep stops at the first
/// empty one.
fn sweep(
    xs: &[u32],
    masks: &SymbolMasks,
    start: usize,
    seed: &Frontier,
    mut visit: impl FnMut(usize, &Frontier),
) {
    let mut prev: Option<Frontier> = None;
    for (c, &sym) in xs.iter().enumerate().skip(start) {
        let open = masks.open(sym);
        let mut seeds = match &prev {
            None => seed.clone(),
            Some(p) => p.clone(),
        };
        seeds.and_assign(&open);
        let col = Frontier::propagate_up(&open, &seeds);
        if !col.any() {
            return;
        }
        visit(c, &col);
        prev = Some(col);
    }
}

fn unit(len: usize, r: usize) -> Frontier {
    let mut f = Frontier::zeros(len);
    f.set(r, true);
    f
}

/// Reachable sites of a rectangle, one bit column per `X` index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachSet {
    rect: Rect,
    cols: Vec<Frontier>,
}

impl ReachSet {
    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn contains(&self, s: Site) -> bool {
        self.rect.contains(s) && self.cols[s.i1 - self.rect.a1].get(s.i2 - self.rect.b1)
    }

    pub fn count(&self) -> usize {
        self.cols.iter().map(Frontier::count).sum()
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.cols.iter().enumerate().flat_map(move |(c, col)| {
            col.iter_ones()
                .map(move |r| Site::new(self.rect.a1 + c, self.rect.b1 + r))
        })
    }

    /// Reachable sites on the top row, by `X` index.
    pub fn top(&self) -> Frontier {
        let h = self.rect.height() - 1;
        let mut f = Frontier::zeros(self.rect.width());
        for (c, col) in self.cols.iter().enumerate() {
            if col.get(h) {
                f.set(c, true);
            }
        }
        f
    }

    /// Reachable sites on the right column, by `Y` index.
    pub fn right(&self) -> &Frontier {
        self.cols.last().expect("rectangles are non-empty")
    }

    /// Reachable site maximising `i1 + i2`, ties broken by larger `i1`.
    pub fn deepest(&self) -> Option<Site> {
        self.cols
            .iter()
            .enumerate()
            .filter_map(|(c, col)| col.highest().map(|r| (c, r)))
            .max_by_key(|&(c, r)| (c + r, c))
            .map(|(c, r)| Site::new(self.rect.a1 + c, self.rect.b1 + r))
    }

    /// An open oriented path from the lower-left corner to `target`, if
    /// `target` is marked.
    pub fn trace_path(&self, target: Site) -> Option<Vec<Site>> {
        if !self.contains(target) {
            return None;
        }
        let origin = Site::new(self.rect.a1, self.rect.b1);
        let mut path = vec![target];
        let mut cur = target;
        while cur != origin {
            let left = Site::new(cur.i1.wrapping_sub(1), cur.i2);
            let down = Site::new(cur.i1, cur.i2.wrapping_sub(1));
            cur = if cur.i1 > self.rect.a1 && self.contains(left) {
                left
            } else if cur.i2 > self.rect.b1 && self.contains(down) {
                down
            } else {
                unreachable!("marked site without marked predecessor");
            };
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Sites of `rect` reachable from its lower-left corner by open oriented
/// paths inside `rect`.
pub fn reach(x: &Sequence, y: &Sequence, rect: Rect) -> Result<ReachSet> {
    rect.check(x, y)?;
    let xs = x.slice(rect.a1, rect.a2)?;
    let ys = y.slice(rect.b1, rect.b2)?;
    let masks = SymbolMasks::new(ys);
    let h = ys.len();
    let mut cols = vec![Frontier::zeros(h); xs.len()];
    sweep(xs, &masks, 0, &unit(h, 0), |c, col| cols[c] = col.clone());
    Ok(ReachSet { rect, cols })
}

pub fn cc_connected(x: &Sequence, y: &Sequence, rect: Rect) -> Result<bool> {
    rect.check(x, y)?;
    let xs = x.slice(rect.a1, rect.a2)?;
    let ys = y.slice(rect.b1, rect.b2)?;
    let masks = SymbolMasks::new(ys);
    let last = xs.len() - 1;
    let top = ys.len() - 1;
    let mut hit = false;
    sweep(xs, &masks, 0, &unit(ys.len(), 0), |c, col| {
        if c == last {
            hit = col.get(top);
        }
    });
    Ok(hit)
}

/// Reachable top-row and right-column sites from one source.
struct Hits {
    top: Frontier,
    right: Frontier,
}

/// Forward and backward sweeps over one rectangle.
struct Grid<'a> {
    xs: &'a [u32],
    ys: &'a [u32],
    masks: SymbolMasks,
    rev_xs: Vec<u32>,
    rev_masks: SymbolMasks,
}

impl<'a> Grid<'a> {
    fn new(x: &'a Sequence, y: &'a Sequence, rect: Rect) -> Result<Self> {
        rect.check(x, y)?;
        let xs = x.slice(rect.a1, rect.a2)?;
        let ys = y.slice(rect.b1, rect.b2)?;
        let rev_xs: Vec<u32> = xs.iter().rev().copied().collect();
        let rev_ys: Vec<u32> = ys.iter().rev().copied().collect();
        Ok(Grid {
            xs,
            ys,
            masks: SymbolMasks::new(ys),
            rev_xs,
            rev_masks: SymbolMasks::new(&rev_ys),
        })
    }

    fn w(&self) -> usize {
        self.xs.len()
    }

    fn h(&self) -> usize {
        self.ys.len()
    }

    /// Forward sweep from local source `(c, r)` (0-based).
    fn forward(&self, c: usize, r: usize) -> Hits {
        let (w, h) = (self.w(), self.h());
        let mut top = Frontier::zeros(w);
        let mut right = Frontier::zeros(h);
        sweep(self.xs, &self.masks, c, &unit(h, r), |cc, col| {
            if col.get(h - 1) {
                top.set(cc, true);
            }
            if cc == w - 1 {
                right = col.clone();
            }
        });
        Hits { top, right }
    }

    /// Sources able to reach local target `(c, r)`: bottom row by column and
    /// left column by row.
    fn backward(&self, c: usize, r: usize) -> (Frontier, Frontier) {
        let (w, h) = (self.w(), self.h());
        let mut bottom = Frontier::zeros(w);
        let mut left = Frontier::zeros(h);
        sweep(
            &self.rev_xs,
            &self.rev_masks,
            w - 1 - c,
            &unit(h, h - 1 - r),
            |cc, col| {
                if col.get(h - 1) {
                    bottom.set(w - 1 - cc, true);
                }
                if cc == w - 1 {
                    for rr in col.iter_ones() {
                        left.set(h - 1 - rr, true);
                    }
                }
            },
        );
        (bottom, left)
    }
}

/// A contiguous run of level-0 indices inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub role: Role,
    /// 1-based chunk index.
    pub k: usize,
    /// Global level-0 bounds, inclusive.
    pub lo: usize,
    pub hi: usize,
    pub subblocks: usize,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Group consecutive sub-blocks (given by their level-0 lengths) into chunks
/// of `size` sub-blocks; the last chunk absorbs the remainder. `start` is the
/// global index of the first level-0 element.
pub fn chunks(sub_lens: &[usize], start: usize, size: usize, role: Role) -> Result<Vec<Chunk>> {
    if size == 0 {
        return Err(Error::Domain("chunk size must be positive".into()));
    }
    let n = sub_lens.len() / size;
    if n == 0 {
        return Err(Error::NoFullChunk(format!(
            "{} sub-blocks, chunk size {size}",
            sub_lens.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut pos = start;
    for k in 1..=n {
        let range = if k < n {
            (k - 1) * size..k * size
        } else {
            (n - 1) * size..sub_lens.len()
        };
        let count = range.len();
        let len: usize = sub_lens[range].iter().sum();
        if len == 0 {
            return Err(Error::Domain("empty sub-block".into()));
        }
        out.push(Chunk {
            role,
            k,
            lo: pos,
            hi: pos + len - 1,
            subblocks: count,
        });
        pos += len;
    }
    Ok(out)
}

/// One side of a block rectangle split into chunks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedBlock {
    pub role: Role,
    pub lo: usize,
    pub hi: usize,
    pub chunks: Vec<Chunk>,
}

impl ChunkedBlock {
    pub fn new(sub_lens: &[usize], start: usize, size: usize, role: Role) -> Result<Self> {
        let chunks = chunks(sub_lens, start, size, role)?;
        let hi = chunks.last().map(|c| c.hi).unwrap_or(start);
        Ok(ChunkedBlock {
            role,
            lo: start,
            hi,
            chunks,
        })
    }

    pub fn n(&self) -> usize {
        self.chunks.len()
    }

    fn chunk(&self, k: usize) -> &Chunk {
        &self.chunks[k - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntryExit {
    pub side: Side,
    /// 1-based chunk index along the side.
    pub k: usize,
}

impl EntryExit {
    /// Chunk-lattice coordinates of the chunk on its side.
    fn coords(&self, nx: usize, ny: usize) -> (i64, i64) {
        let k = self.k as i64;
        match self.side {
            Side::Bottom => (k, 1),
            Side::Left => (1, k),
            Side::Top => (k, ny as i64),
            Side::Right => (nx as i64, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EntryExitSet {
    pub entries: Vec<EntryExit>,
    pub exits: Vec<EntryExit>,
    pub pairs: Vec<(EntryExit, EntryExit)>,
    /// Set when a side has at most `2 L_j` chunks, so every window is empty.
    pub too_few_chunks: bool,
}

/// Admissible entry chunks, exit chunks and entry-exit pairs for a block pair
/// with `nx` and `ny` chunks whose sub-blocks live at level `j`.
pub fn entry_exit_pairs(nx: usize, ny: usize, j: u32, params: &Params) -> Result<EntryExitSet> {
    let lj = params.scale(j)? as usize;
    let win = SlopeWindow::new(params.r, HalfExp::chunk(j));
    let mut set = EntryExitSet {
        too_few_chunks: nx <= 2 * lj || ny <= 2 * lj,
        ..Default::default()
    };
    let idx = |n: usize| lj.max(1)..=n.saturating_sub(lj);
    let (nxi, nyi) = (nx as i64, ny as i64);

    let mut bottom_top = Vec::new();
    for k in idx(nx) {
        bottom_top.push(k);
    }
    let mut left_right = Vec::new();
    for k in idx(ny) {
        left_right.push(k);
    }

    for &k in &bottom_top {
        let k_ = k as i64;
        if win.contains(nyi - 1, nxi - k_) {
            set.entries.push(EntryExit {
                side: Side::Bottom,
                k,
            });
        }
    }
    for &k in &left_right {
        let k_ = k as i64;
        if win.contains(nyi - k_, nxi - 1) {
            set.entries.push(EntryExit {
                side: Side::Left,
                k,
            });
        }
    }
    for &k in &bottom_top {
        let k_ = k as i64;
        if win.contains(nyi - 1, k_ - 1) {
            set.exits.push(EntryExit { side: Side::Top, k });
        }
    }
    for &k in &left_right {
        let k_ = k as i64;
        if win.contains(k_ - 1, nxi - 1) {
            set.exits.push(EntryExit {
                side: Side::Right,
                k,
            });
        }
    }

    let ins = bottom_top
        .iter()
        .map(|&k| EntryExit {
            side: Side::Bottom,
            k,
        })
        .chain(left_right.iter().map(|&k| EntryExit {
            side: Side::Left,
            k,
        }));
    for e in ins {
        let (ex, ey) = e.coords(nx, ny);
        let outs = bottom_top
            .iter()
            .map(|&k| EntryExit { side: Side::Top, k })
            .chain(left_right.iter().map(|&k| EntryExit {
                side: Side::Right,
                k,
            }));
        for f in outs {
            let (fx, fy) = f.coords(nx, ny);
            if win.contains(fy - ey, fx - ex) {
                set.pairs.push((e, f));
            }
        }
    }
    Ok(set)
}

/// A block rectangle with its chunk structure; sub-blocks are at level `j`.
#[derive(Debug, Clone, Copy)]
pub struct BlockPair<'a> {
    pub x: &'a Sequence,
    pub y: &'a Sequence,
    pub xb: &'a ChunkedBlock,
    pub yb: &'a ChunkedBlock,
    pub j: u32,
}

impl<'a> BlockPair<'a> {
    pub fn rect(&self) -> Result<Rect> {
        Rect::new(self.xb.lo, self.xb.hi, self.yb.lo, self.yb.hi)
    }

    fn required(&self, c: &Chunk) -> usize {
        density_required(c.len(), HalfExp::density(self.j))
    }

    fn side_chunk(&self, e: &EntryExit) -> &Chunk {
        match e.side {
            Side::Bottom | Side::Top => self.xb.chunk(e.k),
            Side::Left | Side::Right => self.yb.chunk(e.k),
        }
    }
}

/// Corner-to-side event: every exit chunk has the required density of top
/// (or right) sites reachable from the lower-left corner.
pub fn cs_connected(pair: &BlockPair<'_>, params: &Params) -> Result<bool> {
    let rect = pair.rect()?;
    let set = entry_exit_pairs(pair.xb.n(), pair.yb.n(), pair.j, params)?;
    let rs = reach(pair.x, pair.y, rect)?;
    let top = rs.top();
    let right = rs.right();
    for e in &set.exits {
        let c = pair.side_chunk(e);
        let hit = match e.side {
            Side::Top => top.count_range(c.lo - rect.a1, c.hi - rect.a1 + 1),
            _ => right.count_range(c.lo - rect.b1, c.hi - rect.b1 + 1),
        };
        if hit < pair.required(c) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Side-to-corner event: every entry chunk has the required density of
/// bottom (or left) sites from which the upper-right corner is reachable.
pub fn sc_connected(pair: &BlockPair<'_>, params: &Params) -> Result<bool> {
    let rect = pair.rect()?;
    let set = entry_exit_pairs(pair.xb.n(), pair.yb.n(), pair.j, params)?;
    let grid = Grid::new(pair.x, pair.y, rect)?;
    let (bottom, left) = grid.backward(grid.w() - 1, grid.h() - 1);
    for e in &set.entries {
        let c = pair.side_chunk(e);
        let hit = match e.side {
            Side::Bottom => bottom.count_range(c.lo - rect.a1, c.hi - rect.a1 + 1),
            _ => left.count_range(c.lo - rect.b1, c.hi - rect.b1 + 1),
        };
        if hit < pair.required(c) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Boundary sites of a chunk in planar order: bottom and top left to right,
/// left and right top to bottom. Returns local `(c, r)` coordinates.
fn boundary_sites(side: Side, c: &Chunk, rect: Rect) -> Vec<(usize, usize)> {
    let (w, h) = (rect.width(), rect.height());
    match side {
        Side::Bottom => (c.lo..=c.hi).map(|a| (a - rect.a1, 0)).collect(),
        Side::Top => (c.lo..=c.hi).map(|a| (a - rect.a1, h - 1)).collect(),
        Side::Left => (c.lo..=c.hi).rev().map(|b| (0, b - rect.b1)).collect(),
        Side::Right => (c.lo..=c.hi).rev().map(|b| (w - 1, b - rect.b1)).collect(),
    }
}

fn hits_at(h: &Hits, site: (usize, usize), w: usize, height: usize) -> bool {
    let (c, r) = site;
    (r == height - 1 && h.top.get(c)) || (c == w - 1 && h.right.get(r))
}

/// Witness search for dense, pairwise-connected source and target sets.
///
/// `rows[s]` lists the targets reached by source `s` (sources and targets in
/// planar boundary order); `src_part` and `tgt_part` assign each to one of
/// two parts with the given minimum counts.
pub(crate) fn witness_exists(
    rows: &[Frontier],
    src_part: &[usize],
    src_req: [usize; 2],
    tgt_part: &[usize],
    tgt_req: [usize; 2],
) -> bool {
    if src_req == [0, 0] {
        return true;
    }
    let tgt_count = |f: &Frontier| {
        let mut n = [0usize; 2];
        for t in f.iter_ones() {
            n[tgt_part[t]] += 1;
        }
        n
    };
    let live: Vec<usize> = (0..rows.len()).filter(|&s| rows[s].any()).collect();
    for (i, &s) in live.iter().enumerate() {
        let mut acc = rows[s].clone();
        let mut got = [0usize; 2];
        for &e in &live[i..] {
            acc.and_assign(&rows[e]);
            let t = tgt_count(&acc);
            if t[0] < tgt_req[0] || t[1] < tgt_req[1] {
                break;
            }
            got[src_part[e]] += 1;
            if got[0] >= src_req[0] && got[1] >= src_req[1] {
                return true;
            }
        }
    }
    false
}

/// Condition S for one entry-exit pair.
fn condition_s(
    pair: &BlockPair<'_>,
    grid: &Grid<'_>,
    rect: Rect,
    entry: &EntryExit,
    exit: &EntryExit,
    cache: &mut std::collections::HashMap<(usize, usize), Hits>,
) -> bool {
    let ce = pair.side_chunk(entry);
    let cx = pair.side_chunk(exit);
    let sources = boundary_sites(entry.side, ce, rect);
    let targets = boundary_sites(exit.side, cx, rect);
    let (w, h) = (rect.width(), rect.height());
    let rows: Vec<Frontier> = sources
        .iter()
        .map(|&src| {
            let hits = cache
                .entry(src)
                .or_insert_with(|| grid.forward(src.0, src.1));
            let mut row = Frontier::zeros(targets.len());
            for (t, &tgt) in targets.iter().enumerate() {
                if hits_at(hits, tgt, w, h) {
                    row.set(t, true);
                }
            }
            row
        })
        .collect();
    witness_exists(
        &rows,
        &vec![0; sources.len()],
        [pair.required(ce), 0],
        &vec![0; targets.len()],
        [pair.required(cx), 0],
    )
}

/// Side-to-side event: Condition S for every entry-exit pair.
pub fn ss_connected(pair: &BlockPair<'_>, params: &Params) -> Result<bool> {
    let rect = pair.rect()?;
    let set = entry_exit_pairs(pair.xb.n(), pair.yb.n(), pair.j, params)?;
    let grid = Grid::new(pair.x, pair.y, rect)?;
    let mut cache = std::collections::HashMap::new();
    for (e, f) in &set.pairs {
        if !condition_s(pair, &grid, rect, e, f, &mut cache) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-pair Condition S verdicts, in the order of `entry_exit_pairs`.
pub fn condition_s_all(pair: &BlockPair<'_>, params: &Params) -> Result<Vec<bool>> {
    let rect = pair.rect()?;
    let set = entry_exit_pairs(pair.xb.n(), pair.yb.n(), pair.j, params)?;
    let grid = Grid::new(pair.x, pair.y, rect)?;
    let mut cache = std::collections::HashMap::new();
    Ok(set
        .pairs
        .iter()
        .map(|(e, f)| condition_s(pair, &grid, rect, e, f, &mut cache))
        .collect())
}

/// A segment rectangle `[a1, a4] x [b1, b4]` whose first sub-blocks are
/// `[a1, a2]`, `[b1, b2]` and last sub-blocks `[a3, a4]`, `[b3, b4]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRect {
    pub a: [usize; 4],
    pub b: [usize; 4],
}

impl SegmentRect {
    pub fn new(a: [usize; 4], b: [usize; 4]) -> Result<Self> {
        let ok = |v: &[usize; 4]| {
            v[0] >= 1 && v[0] <= v[1] && v[2] <= v[3] && v[1] <= v[3] && v[0] <= v[2]
        };
        if !ok(&a) || !ok(&b) {
            return Err(Error::Bounds(format!("bad segment bounds {a:?} x {b:?}")));
        }
        Ok(SegmentRect { a, b })
    }

    pub fn rect(&self) -> Rect {
        Rect {
            a1: self.a[0],
            a2: self.a[3],
            b1: self.b[0],
            b2: self.b[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Starred {
    pub cs: bool,
    pub sc: bool,
    pub ss: bool,
}

/// The starred corner/side events on a segment rectangle, with density
/// `3/4 + 2^-(j+7/2)` measured against `b4 - b3` (etc.).
pub fn starred_events(x: &Sequence, y: &Sequence, seg: SegmentRect, j: u32) -> Result<Starred> {
    let rect = seg.rect();
    let grid = Grid::new(x, y, rect)?;
    let (w, h) = (rect.width(), rect.height());
    let [a1, a2, a3, a4] = seg.a;
    let [b1, b2, b3, b4] = seg.b;
    let req = |span: usize| density_required(span, HalfExp::assign(j));

    let from_corner = grid.forward(0, 0);
    let cs = from_corner.right.count_range(b3 - b1, b4 - b1 + 1) >= req(b4 - b3)
        && from_corner.top.count_range(a3 - a1, a4 - a1 + 1) >= req(a4 - a3);

    let (bottom, left) = grid.backward(w - 1, h - 1);
    let sc = bottom.count_range(0, a2 - a1 + 1) >= req(a2 - a1)
        && left.count_range(0, b2 - b1 + 1) >= req(b2 - b1);

    // Sources: left side [b1, b2] top to bottom (part 0), then bottom side
    // [a1, a2] left to right (part 1). Targets: top side [a3, a4] left to
    // right (part 0), then right side [b3, b4] top to bottom (part 1).
    let mut sources: Vec<((usize, usize), usize)> =
        (b1..=b2).rev().map(|b| ((0, b - b1), 0)).collect();
    sources.extend((a1..=a2).map(|a| ((a - a1, 0), 1)));
    let mut targets: Vec<((usize, usize), usize)> =
        (a3..=a4).map(|a| ((a - a1, h - 1), 0)).collect();
    targets.extend((b3..=b4).rev().map(|b| ((w - 1, b - b1), 1)));
    let mut cache = std::collections::HashMap::new();
    let rows: Vec<Frontier> = sources
        .iter()
        .map(|&(src, _)| {
            let hits = cache
                .entry(src)
                .or_insert_with(|| grid.forward(src.0, src.1));
            let mut row = Frontier::zeros(targets.len());
            for (t, &(tgt, _)) in targets.iter().enumerate() {
                if hits_at(hits, tgt, w, h) {
                    row.set(t, true);
                }
            }
            row
        })
        .collect();
    let src_part: Vec<usize> = sources.iter().map(|s| s.1).collect();
    let tgt_part: Vec<usize> = targets.iter().map(|t| t.1).collect();
    let ss = witness_exists(
        &rows,
        &src_part,
        [req(b2 - b1), req(a2 - a1)],
        &tgt_part,
        [req(a4 - a3), req(b4 - b3)],
    );
    Ok(Starred { cs, sc, ss })
}

/// Largest `i1 + i2 - 1` over sites of the `n_max x n_max` window reachable
/// from `(1, 1)`, capped at `n_max`; 0 when the origin is closed.
pub fn survival_depth(x: &Sequence, y: &Sequence, n_max: usize) -> Result<usize> {
    if n_max == 0 {
        return Ok(0);
    }
    let rect = Rect::new(1, n_max, 1, n_max)?;
    rect.check(x, y)?;
    let xs = x.slice(1, n_max)?;
    let ys = y.slice(1, n_max)?;
    let masks = SymbolMasks::new(ys);
    let mut best = 0usize;
    sweep(xs, &masks, 0, &unit(n_max, 0), |c, col| {
        if let Some(r) = col.highest() {
            best = best.max(c + r + 1);
        }
    });
    Ok(best.min(n_max))
}

/// Does the 4-neighbour open cluster of `(1, 1)` in the `n x n` window touch
/// the far sides `i1 = n` or `i2 = n`?
pub fn non_oriented_reaches(x: &Sequence, y: &Sequence, n: usize) -> Result<bool> {
    if n == 0 || x.len() < n || y.len() < n {
        return Err(Error::Bounds(format!(
            "window {n} exceeds sequences of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let xs = &x.items()[..n];
    let ys = &y.items()[..n];
    if xs[0] == ys[0] {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    let mut seen = vec![false; n * n];
    let mut stack = vec![(0usize, 0usize)];
    seen[0] = true;
    while let Some((i, j)) = stack.pop() {
        if i == n - 1 || j == n - 1 {
            return Ok(true);
        }
        let nbrs = [
            (i + 1, j),
            (i, j + 1),
            (i.wrapping_sub(1), j),
            (i, j.wrapping_sub(1)),
        ];
        for (a, b) in nbrs {
            if a < n && b < n && !seen[a * n + b] && xs[a] != ys[b] {
                seen[a * n + b] = true;
                stack.push((a, b));
            }
        }
    }
    Ok(false)
}
