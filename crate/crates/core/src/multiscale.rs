//! Multi-scale blocks: construction, sampling, goodness and diagnostics.
//!
//! Level-1 blocks are cut from a symbol stream at the first position `t >= L1`
//! where `X_t = 1 (mod 4)` and `X_{t+1} = 0 (mod 4)` (for `Y`: 3 and 2). A
//! level-`(j+1)` block takes `L_j^p_run` sub-blocks, then `L_j^p_len` more,
//! then a geometric number `W`, then waits for a run of `2 L_j^p_run` good
//! sub-blocks and stops at the run's midpoint.
//!
//! Goodness at level `j+1` depends on connection probabilities against a
//! random partner block, which in turn depends on goodness at level `j`.
//! [`McOracle`] resolves this bottom-up with a verdict memo keyed by block
//! content.

use std::collections::HashMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rng_for, symbol_from_word, Role, Sequence};
use crate::montecarlo::{derive_seed, trials_to_certify, Estimate, Verdict};
use crate::params::Params;
use crate::reachability::{
    cc_connected, cs_connected, sc_connected, ss_connected, BlockPair, ChunkedBlock, Rect,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    FirstBlock,
    Mu,
    MuGood,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub level: u32,
    pub role: Role,
    /// Level-0 interval, 1-based inclusive, in the owning sequence.
    pub lo: usize,
    pub hi: usize,
    /// Level-0 lengths of the level-`(level-1)` sub-blocks.
    pub sub_lens: Vec<usize>,
    /// Goodness of each sub-block; empty at level 1.
    pub sub_good: Vec<bool>,
    pub t: u64,
    pub w: Option<u64>,
    /// 1-based positions of bad sub-blocks.
    pub bad: Vec<usize>,
    pub law: Law,
}

impl Block {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_sub(&self) -> usize {
        self.sub_lens.len()
    }

    pub fn k(&self) -> usize {
        self.bad.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub level: u32,
    pub role: Role,
    pub blocks: Vec<Block>,
    /// Level-0 symbols covered by `blocks`.
    pub consumed: usize,
    /// Set when the input ran out before the next block could be closed.
    pub incomplete: bool,
}

fn stop_classes(role: Role) -> (u32, u32) {
    match role {
        Role::X => (1, 0),
        Role::Y => (3, 2),
    }
}

fn check_alphabet(m: u32) -> Result<()> {
    if m < 4 || !m.is_multiple_of(4) {
        return Err(Error::Domain(format!(
            "block construction needs M divisible by 4, got {m}"
        )));
    }
    Ok(())
}

/// Length of the level-1 block starting at `items[0]`, if the stopping
/// pattern occurs.
fn level1_cut(items: &[u32], l1: usize, role: Role) -> Option<usize> {
    let (a, b) = stop_classes(role);
    let l1 = l1.max(1);
    (l1..items.len()).find(|&t| items[t - 1] % 4 == a && items[t] % 4 == b)
}

/// Level-1 partition with the threshold `L1 = params.scale(1)`.
pub fn build_level1(seq: &Sequence, params: &Params, role: Role) -> Result<BlockPartition> {
    let l1 = params.scale(1)? as usize;
    build_level1_with(seq, l1, role)
}

/// Level-1 partition with an explicit threshold `l1`.
pub fn build_level1_with(seq: &Sequence, l1: usize, role: Role) -> Result<BlockPartition> {
    check_alphabet(seq.m())?;
    let items = seq.items();
    let mut blocks = Vec::new();
    let mut start = 0usize;
    let mut incomplete = false;
    while start < items.len() {
        match level1_cut(&items[start..], l1, role) {
            Some(len) => {
                blocks.push(Block {
                    level: 1,
                    role,
                    lo: start + 1,
                    hi: start + len,
                    sub_lens: vec![1; len],
                    sub_good: Vec::new(),
                    t: (len - l1.max(1)) as u64,
                    w: None,
                    bad: Vec::new(),
                    law: if start == 0 { Law::FirstBlock } else { Law::Mu },
                });
                start += len;
            }
            None => {
                incomplete = true;
                break;
            }
        }
    }
    Ok(BlockPartition {
        level: 1,
        role,
        blocks,
        consumed: start,
        incomplete,
    })
}

/// Level-`j` run/length/padding sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sizes {
    run: usize,
    len: usize,
    geom_p: f64,
}

fn sizes(params: &Params, j: u32) -> Result<Sizes> {
    let run = params.scale_pow(j, params.p_run())? as usize;
    let len = params.scale_pow(j, params.p_len())? as usize;
    let g = params.scale_pow(j, params.p_geom())? as f64;
    Ok(Sizes {
        run,
        len,
        geom_p: 1.0 / g,
    })
}

/// `Geom(p)` on `{0, 1, ...}` by inversion of one 53-bit uniform.
pub fn geometric(rng: &mut impl RngCore, p: f64) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let w = (u.ln() / (-p).ln_1p()).floor();
    if w.is_finite() && w < u64::MAX as f64 {
        w as u64
    } else {
        u64::MAX
    }
}

/// Index `l >= s0` (relative to the block start) such that the `2 * run`
/// sub-blocks after it are all good, using `good_run[i]` = length of the good
/// run starting at absolute position `i`.
fn find_cut(good_run: &[usize], m: usize, s0: usize, run: usize) -> Option<usize> {
    let need = 2 * run;
    let mut s = s0;
    while m + s + need <= good_run.len() {
        let r = good_run[m + s];
        if r >= need {
            return Some(s);
        }
        s += r + 1;
    }
    None
}

/// Level-`(j+1)` partition from a level-`j` partition and its verdicts. `W`
/// is drawn from `ChaCha8Rng(seed)` on the role's stream, one draw per block.
pub fn build_next_level(
    part: &BlockPartition,
    verdicts: &[bool],
    params: &Params,
    seed: u64,
) -> Result<BlockPartition> {
    let j = part.level;
    let p = sizes(params, j)?.geom_p;
    let mut rng = rng_for(seed, part.role.stream() + 2);
    build_next_level_with(part, verdicts, params, &mut || geometric(&mut rng, p))
}

/// As [`build_next_level`] with caller-supplied padding draws.
pub fn build_next_level_with(
    part: &BlockPartition,
    verdicts: &[bool],
    params: &Params,
    draw_w: &mut dyn FnMut() -> u64,
) -> Result<BlockPartition> {
    if verdicts.len() != part.blocks.len() {
        return Err(Error::Domain(format!(
            "{} verdicts for {} blocks",
            verdicts.len(),
            part.blocks.len()
        )));
    }
    let j = part.level;
    let sz = sizes(params, j)?;
    let n = verdicts.len();
    let mut good_run = vec![0usize; n + 1];
    for i in (0..n).rev() {
        good_run[i] = if verdicts[i] { good_run[i + 1] + 1 } else { 0 };
    }
    good_run.pop();

    let mut blocks = Vec::new();
    let mut m = 0usize;
    let mut incomplete = false;
    while m < n {
        let w = draw_w();
        let s0 = sz
            .run
            .checked_add(sz.len)
            .and_then(|v| usize::try_from(w).ok().and_then(|w| v.checked_add(w)));
        let cut = s0.and_then(|s0| find_cut(&good_run, m, s0, sz.run));
        let Some(l) = cut else {
            incomplete = true;
            break;
        };
        let count = l + sz.run;
        let subs = &part.blocks[m..m + count];
        let good = &verdicts[m..m + count];
        blocks.push(Block {
            level: j + 1,
            role: part.role,
            lo: subs[0].lo,
            hi: subs[count - 1].hi,
            sub_lens: subs.iter().map(Block::len).collect(),
            sub_good: good.to_vec(),
            t: (l - sz.run - sz.len) as u64,
            w: Some(w),
            bad: good
                .iter()
                .enumerate()
                .filter(|(_, &g)| !g)
                .map(|(i, _)| i + 1)
                .collect(),
            law: if m == 0 { Law::FirstBlock } else { Law::Mu },
        });
        m += count;
    }
    let consumed = blocks.last().map(|b| b.hi).unwrap_or(0)
        - part.blocks.first().map(|b| b.lo - 1).unwrap_or(0);
    Ok(BlockPartition {
        level: j + 1,
        role: part.role,
        blocks,
        consumed,
        incomplete,
    })
}

/// Goodness of a block given its level-0 content.
pub trait GoodnessOracle {
    fn is_good(&mut self, block: &Block, symbols: &[u32]) -> Result<bool>;
}

/// Every block gets the same verdict.
#[derive(Debug, Clone, Copy)]
pub struct ConstOracle(pub bool);

impl GoodnessOracle for ConstOracle {
    fn is_good(&mut self, _: &Block, _: &[u32]) -> Result<bool> {
        Ok(self.0)
    }
}

/// Verdicts from a closure.
pub struct FnOracle<F>(pub F);

impl<F: FnMut(&Block, &[u32]) -> bool> GoodnessOracle for FnOracle<F> {
    fn is_good(&mut self, block: &Block, symbols: &[u32]) -> Result<bool> {
        Ok((self.0)(block, symbols))
    }
}

/// A sampled block together with its level-0 content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledBlock {
    pub block: Block,
    pub symbols: Vec<u32>,
}

/// Symbols of a non-first level-1 block: the first symbol is drawn from the
/// class that follows a stopping pattern, the rest i.i.d. uniform.
pub fn sample_level1_symbols(m: u32, l1: usize, role: Role, rng: &mut impl RngCore) -> Vec<u32> {
    let (a, b) = stop_classes(role);
    let k = symbol_from_word(rng.next_u64(), m / 4);
    let first = 4 * k - (4 - b) % 4;
    let mut items = vec![first];
    loop {
        let next = symbol_from_word(rng.next_u64(), m);
        let t = items.len();
        if t >= l1.max(1) && items[t - 1] % 4 == a && next % 4 == b {
            return items;
        }
        items.push(next);
    }
}

/// Sampling limits shared by [`sample_block`] and the goodness oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Rejection attempts for conditioned laws.
    pub attempts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { attempts: 1000 }
    }
}

fn level1_block(symbols: &[u32], l1: usize, role: Role, law: Law) -> Block {
    Block {
        level: 1,
        role,
        lo: 1,
        hi: symbols.len(),
        sub_lens: vec![1; symbols.len()],
        sub_good: Vec::new(),
        t: (symbols.len() - l1.max(1)) as u64,
        w: None,
        bad: Vec::new(),
        law,
    }
}

/// Unconditioned level-`level` block from `seed`.
fn sample_mu(
    level: u32,
    role: Role,
    m: u32,
    params: &Params,
    seed: u64,
    oracle: &mut dyn GoodnessOracle,
    budget: Budget,
) -> Result<SampledBlock> {
    if level == 1 {
        let l1 = params.scale(1)? as usize;
        let mut rng = rng_for(seed, role.stream());
        let symbols = sample_level1_symbols(m, l1, role, &mut rng);
        return Ok(SampledBlock {
            block: level1_block(&symbols, l1, role, Law::Mu),
            symbols,
        });
    }
    let j = level - 1;
    let sz = sizes(params, j)?;
    let mut rng = rng_for(seed, role.stream() + 2);
    let w = geometric(&mut rng, sz.geom_p);
    let s0 = sz
        .run
        .checked_add(sz.len)
        .and_then(|v| usize::try_from(w).ok().and_then(|w| v.checked_add(w)))
        .ok_or(Error::Overflow {
            what: "padding",
            level,
        })?;

    let mut subs: Vec<SampledBlock> = Vec::new();
    let mut good: Vec<bool> = Vec::new();
    // Sub-block `i` (0-based) is drawn from seed derive_seed(seed, i + 1);
    // the first `run` are conditioned on goodness.
    let ensure = |upto: usize,
                  subs: &mut Vec<SampledBlock>,
                  good: &mut Vec<bool>,
                  oracle: &mut dyn GoodnessOracle|
     -> Result<()> {
        while subs.len() < upto {
            let i = subs.len();
            let s = derive_seed(seed, i as u64 + 1);
            if i < sz.run {
                subs.push(sample_block(
                    j,
                    Law::MuGood,
                    role,
                    m,
                    params,
                    s,
                    oracle,
                    budget,
                )?);
                good.push(true);
            } else {
                let sb = sample_mu(j, role, m, params, s, oracle, budget)?;
                let g = oracle.is_good(&sb.block, &sb.symbols)?;
                subs.push(sb);
                good.push(g);
            }
        }
        Ok(())
    };

    // l = min{ s >= s0 : sub-blocks s+1 .. s+2run good } (1-based).
    let mut s = s0;
    loop {
        ensure(s + 2 * sz.run, &mut subs, &mut good, oracle)?;
        match (0..2 * sz.run).rev().find(|&i| !good[s + i]) {
            None => break,
            Some(i) => s += i + 1,
        }
    }
    let count = s + sz.run;
    subs.truncate(count);
    good.truncate(count);
    let sub_lens: Vec<usize> = subs.iter().map(|b| b.symbols.len()).collect();
    let symbols: Vec<u32> = subs.into_iter().flat_map(|b| b.symbols).collect();
    let bad = good
        .iter()
        .enumerate()
        .filter(|(_, &g)| !g)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(SampledBlock {
        block: Block {
            level,
            role,
            lo: 1,
            hi: symbols.len(),
            sub_lens,
            sub_good: good,
            t: (s - sz.run - sz.len) as u64,
            w: Some(w),
            bad,
            law: Law::Mu,
        },
        symbols,
    })
}

/// A level-`level` block under `law` (`Mu` or `MuGood`), by the block
/// representation recipe. `MuGood` rejects on the oracle's verdict.
#[allow(clippy::too_many_arguments)]
pub fn sample_block(
    level: u32,
    law: Law,
    role: Role,
    m: u32,
    params: &Params,
    seed: u64,
    oracle: &mut dyn GoodnessOracle,
    budget: Budget,
) -> Result<SampledBlock> {
    check_alphabet(m)?;
    if level == 0 {
        return Err(Error::Domain("blocks start at level 1".into()));
    }
    match law {
        Law::Mu | Law::FirstBlock => sample_mu(level, role, m, params, seed, oracle, budget),
        Law::MuGood => {
            for attempt in 0..budget.attempts {
                let s = derive_seed(seed, 1u64 << 40 | attempt as u64);
                let mut sb = sample_mu(level, role, m, params, s, oracle, budget)?;
                if oracle.is_good(&sb.block, &sb.symbols)? {
                    sb.block.law = Law::MuGood;
                    return Ok(sb);
                }
            }
            Err(Error::SamplingBudget {
                attempts: budget.attempts,
                accepted: 0,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub estimate: Estimate,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessVerdict {
    pub level: u32,
    pub role: Role,
    pub length: usize,
    pub n_sub: usize,
    /// `None` at level 1.
    pub cond_i: Option<bool>,
    pub cond_v: bool,
    pub length_bound: usize,
    pub ss: Option<ConditionEstimate>,
    pub cs: Option<ConditionEstimate>,
    pub sc: Option<ConditionEstimate>,
    pub cc: Option<ConditionEstimate>,
    pub samples: u64,
    pub seed: u64,
    pub overall: Verdict,
}

/// Monte Carlo settings for goodness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub force_point: bool,
    pub budget: Budget,
}

/// FNV-1a over a block's identity.
fn content_key(block: &Block, symbols: &[u32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    };
    eat(block.level as u64);
    eat(block.role.stream());
    for &l in &block.sub_lens {
        eat(l as u64);
    }
    eat(u64::MAX);
    for &s in symbols {
        eat(s as u64);
    }
    h
}

/// Thresholds of the probabilistic goodness conditions for a block at level
/// `j + 1`: `(ss, cs = sc, cc)`.
pub fn goodness_thresholds(params: &Params, j: u32) -> Result<(f64, f64, f64)> {
    let l = params.scale(j + 1)? as f64;
    let ss = 1.0 - l.powf(-2.0 * params.beta as f64);
    let bump = 0.5f64.powi(j as i32 + 4);
    Ok((ss, 0.9 + bump, 0.75 + bump))
}

/// Upper bound on the number of sub-blocks of a good level-`(j+1)` block.
/// At level 1 (`j = 0`) the deterministic part is `L1` itself.
pub fn length_bound(params: &Params, j: u32) -> Result<usize> {
    let base = if j == 0 {
        params.scale(1)?
    } else {
        params.scale_pow(j, params.p_len())?
    };
    let extra = params.scale_pow(j, params.p_run() + 2)?;
    base.checked_add(extra)
        .map(|v| v as usize)
        .ok_or(Error::Overflow {
            what: "length bound",
            level: j,
        })
}

/// Chunk structure of a block for side events at level `j`.
fn chunked(block: &Block, params: &Params, j: u32) -> Result<ChunkedBlock> {
    let size = params.scale_pow(j, params.p_chunk())? as usize;
    ChunkedBlock::new(&block.sub_lens, 1, size, block.role)
}

/// Corner and side events of one block pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEvents {
    pub ss: bool,
    pub cs: bool,
    pub sc: bool,
    pub cc: bool,
}

/// Evaluate every event on the rectangle of an `X` block and a `Y` block.
pub fn pair_events(
    xb: &Block,
    xs: &[u32],
    yb: &Block,
    ys: &[u32],
    m: u32,
    params: &Params,
) -> Result<PairEvents> {
    let j = xb.level - 1;
    let x = Sequence::new(m, xs.to_vec(), Role::X)?;
    let y = Sequence::new(m, ys.to_vec(), Role::Y)?;
    let xc = chunked(xb, params, j)?;
    let yc = chunked(yb, params, j)?;
    let pair = BlockPair {
        x: &x,
        y: &y,
        xb: &xc,
        yb: &yc,
        j,
    };
    Ok(PairEvents {
        ss: ss_connected(&pair, params)?,
        cs: cs_connected(&pair, params)?,
        sc: sc_connected(&pair, params)?,
        cc: cc_connected(&x, &y, Rect::full(&x, &y)?)?,
    })
}

/// Classify a block at level `j + 1 >= 1`. Structural conditions are checked
/// first; the probabilistic ones use `mc.samples` partner blocks drawn from
/// the unconditioned law of the other role, with sub-block goodness supplied
/// by `partner_oracle`.
pub fn classify_good(
    block: &Block,
    symbols: &[u32],
    m: u32,
    mc: &McConfig,
    params: &Params,
    partner_oracle: &mut dyn GoodnessOracle,
) -> Result<GoodnessVerdict> {
    let other = block.role.other();
    let level = block.level;
    classify_good_with(block, symbols, m, mc, params, &mut |seed| {
        sample_block(
            level,
            Law::Mu,
            other,
            m,
            params,
            seed,
            partner_oracle,
            mc.budget,
        )
    })
}

/// As [`classify_good`] with a caller-supplied partner sampler.
pub fn classify_good_with(
    block: &Block,
    symbols: &[u32],
    m: u32,
    mc: &McConfig,
    params: &Params,
    partner: &mut dyn FnMut(u64) -> Result<SampledBlock>,
) -> Result<GoodnessVerdict> {
    if block.level == 0 {
        return Err(Error::Domain("goodness is defined from level 1".into()));
    }
    let j = block.level - 1;
    let bound = length_bound(params, j)?;
    let cond_v = block.n_sub() <= bound;
    let cond_i = if block.level >= 2 {
        let run = params.scale_pow(j, params.p_run())? as usize;
        Some(block.sub_good.len() >= run && block.sub_good[..run].iter().all(|&g| g))
    } else {
        None
    };
    let seed = derive_seed(mc.seed, content_key(block, symbols));
    let mut v = GoodnessVerdict {
        level: block.level,
        role: block.role,
        length: block.len(),
        n_sub: block.n_sub(),
        cond_i,
        cond_v,
        length_bound: bound,
        ss: None,
        cs: None,
        sc: None,
        cc: None,
        samples: 0,
        seed,
        overall: Verdict::Fail,
    };
    if !cond_v || cond_i == Some(false) {
        return Ok(v);
    }

    let (t_ss, t_side, t_cc) = goodness_thresholds(params, j)?;
    let need = trials_to_certify(t_ss.max(t_side).max(t_cc));
    if need.is_none() && !mc.force_point {
        return Err(Error::InsufficientSamples(format!(
            "level {} threshold {t_ss} cannot be certified by sampling",
            block.level
        )));
    }
    if mc.samples == 0 {
        return Err(Error::InsufficientSamples("zero partner samples".into()));
    }

    let mut counts = [0u64; 4];
    for i in 0..mc.samples {
        let partner = partner(derive_seed(seed, i))?;
        let ev = match block.role {
            Role::X => pair_events(block, symbols, &partner.block, &partner.symbols, m, params)?,
            Role::Y => pair_events(&partner.block, &partner.symbols, block, symbols, m, params)?,
        };
        for (c, hit) in counts.iter_mut().zip([ev.ss, ev.cs, ev.sc, ev.cc]) {
            *c += hit as u64;
        }
    }
    let mk = |succ: u64, thr: f64| {
        let estimate = Estimate::from_counts(succ, mc.samples, seed);
        ConditionEstimate {
            estimate,
            threshold: thr,
            verdict: estimate.verdict(thr, mc.force_point),
        }
    };
    v.ss = Some(mk(counts[0], t_ss));
    v.cs = Some(mk(counts[1], t_side));
    v.sc = Some(mk(counts[2], t_side));
    v.cc = Some(mk(counts[3], t_cc));
    v.samples = mc.samples;
    let verdicts = [v.ss, v.cs, v.sc, v.cc].map(|c| c.expect("set above").verdict);
    v.overall = if verdicts.contains(&Verdict::Fail) {
        Verdict::Fail
    } else if verdicts.contains(&Verdict::Undecided) {
        Verdict::Undecided
    } else {
        Verdict::Pass
    };
    Ok(v)
}

/// Recursive Monte Carlo goodness with a verdict memo.
pub struct McOracle {
    pub params: Params,
    pub m: u32,
    pub mc: McConfig,
    memo: HashMap<u64, bool>,
    pub evaluations: u64,
}

impl McOracle {
    pub fn new(params: Params, m: u32, mc: McConfig) -> Self {
        McOracle {
            params,
            m,
            mc,
            memo: HashMap::new(),
            evaluations: 0,
        }
    }

    pub fn classify(&mut self, block: &Block, symbols: &[u32]) -> Result<GoodnessVerdict> {
        let params = self.params.clone();
        let (m, mc) = (self.m, self.mc);
        classify_good(block, symbols, m, &mc, &params, self)
    }
}

impl GoodnessOracle for McOracle {
    fn is_good(&mut self, block: &Block, symbols: &[u32]) -> Result<bool> {
        let key = content_key(block, symbols);
        if let Some(&g) = self.memo.get(&key) {
            return Ok(g);
        }
        self.evaluations += 1;
        let v = self.classify(block, symbols)?;
        let g = match v.overall {
            Verdict::Pass => true,
            Verdict::Fail => false,
            Verdict::Undecided => {
                return Err(Error::InsufficientSamples(format!(
                    "goodness of a level-{} block is undecided at {} samples",
                    block.level, self.mc.samples
                )))
            }
        };
        self.memo.insert(key, g);
        Ok(g)
    }
}

/// Classes of the five-case decomposition, checked in order.
pub fn classify_case(
    t: u64,
    k: u64,
    product: f64,
    l_j: f64,
    params: &Params,
    p_len: u32,
    r_plus: f64,
) -> u8 {
    let r = params.r as f64;
    let len = l_j.powi(p_len as i32);
    let t_small = (t as f64) <= r * len / 2.0;
    let bound = (len + t as f64) / (10.0 * r_plus);
    let few = k <= params.k0;
    let kf = k as f64;
    if t_small && few && product > l_j.powf(-1.0 / 3.0) {
        1
    } else if t_small && few {
        2
    } else if t_small && k >= params.k0 && kf <= bound {
        3
    } else if !t_small && kf <= bound {
        4
    } else {
        5
    }
}

/// Case of a block from its recorded `T`, bad positions and per-bad-block
/// connection estimates (the product over an empty set is 1).
pub fn classify_block_case(
    block: &Block,
    s_bad: &[f64],
    params: &Params,
    r_plus: f64,
) -> Result<u8> {
    if block.level < 2 {
        return Err(Error::Domain("cases are defined for levels >= 2".into()));
    }
    if s_bad.len() != block.bad.len() {
        return Err(Error::Domain(format!(
            "{} estimates for {} bad sub-blocks",
            s_bad.len(),
            block.bad.len()
        )));
    }
    let j = block.level - 1;
    let l = params.scale(j)? as f64;
    let product: f64 = s_bad.iter().product();
    Ok(classify_case(
        block.t,
        block.k() as u64,
        product,
        l,
        params,
        params.p_len(),
        r_plus,
    ))
}

/// `mean exp(l_prev^-6 (|X| - (2 - 2^-j) l_j))` over sampled lengths.
pub fn length_mgf(lengths: &[usize], l_prev: f64, l_j: f64, j: u32) -> f64 {
    let c = 2.0 - 0.5f64.powi(j as i32);
    let k = l_prev.powi(-6);
    lengths
        .iter()
        .map(|&n| (k * (n as f64 - c * l_j)).exp())
        .sum::<f64>()
        / lengths.len().max(1) as f64
}

/// Lengths of `samples` independent non-first level-1 blocks.
pub fn level1_lengths(
    m: u32,
    l1: usize,
    role: Role,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<usize>> {
    check_alphabet(m)?;
    crate::montecarlo::run_trials(samples, seed, workers, |_, s| {
        let mut rng = rng_for(s, role.stream());
        sample_level1_symbols(m, l1, role, &mut rng).len()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub l: u64,
    pub empirical: f64,
    pub sigma: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical `P(T >= l)` against `(15/16)^((l-1)/2)` with a 3-sigma margin.
pub fn level1_tail(lengths: &[usize], l1: usize, ls: &[u64]) -> Vec<TailRow> {
    let n = lengths.len().max(1) as f64;
    ls.iter()
        .map(|&l| {
            let hits = lengths
                .iter()
                .filter(|&&len| (len - l1) as u64 >= l)
                .count() as f64;
            let p = hits / n;
            let sigma = (p * (1.0 - p) / n).sqrt();
            let bound = (15.0f64 / 16.0).powf((l as f64 - 1.0) / 2.0);
            TailRow {
                l,
                empirical: p,
                sigma,
                bound,
                pass: p <= bound + 3.0 * sigma,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub p: f64,
    pub estimate: Estimate,
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursiveReport {
    pub level: u32,
    pub ensemble: u64,
    pub tail: Vec<TailPoint>,
    pub mgf: f64,
    pub mgf_tolerance: f64,
    pub mgf_verdict: Verdict,
    pub good: Estimate,
    pub undecided: u64,
    pub good_threshold: f64,
    pub good_verdict: Verdict,
}

/// Settings for [`check_recursive_estimates`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCheck {
    pub level: u32,
    pub ensemble: u64,
    pub m: u32,
    pub mc: McConfig,
    pub p_grid: Vec<f64>,
    pub mgf_tolerance: f64,
}

/// Empirical versions of the tail (I), length (II) and goodness (III)
/// estimates at one level, for `X` blocks.
pub fn check_recursive_estimates(cfg: &EstimateCheck, params: &Params) -> Result<RecursiveReport> {
    let j = cfg.level;
    if j == 0 {
        return Err(Error::Domain("estimates start at level 1".into()));
    }
    if cfg.ensemble == 0 {
        return Err(Error::InsufficientSamples("empty ensemble".into()));
    }
    let l_j = params.scale(j)? as f64;
    let l_prev = params.scale(j - 1)? as f64;
    let mut oracle = McOracle::new(params.clone(), cfg.m, cfg.mc);
    let mut lengths = Vec::new();
    let mut s_hat = Vec::new();
    let mut good = 0u64;
    let mut decided = 0u64;
    for i in 0..cfg.ensemble {
        let seed = derive_seed(cfg.mc.seed ^ 0x5EED, i);
        let sb = sample_block(
            j,
            Law::Mu,
            Role::X,
            cfg.m,
            params,
            seed,
            &mut oracle,
            cfg.mc.budget,
        )?;
        lengths.push(sb.block.len());
        let v = match oracle.classify(&sb.block, &sb.symbols) {
            Ok(v) => Some(v),
            Err(Error::InsufficientSamples(_)) if !cfg.mc.force_point => None,
            Err(e) => return Err(e),
        };
        // S_j(X) with the same partner draws as the goodness check.
        let s = match v.as_ref().and_then(|v| v.cc) {
            Some(cc) => cc.estimate.point,
            None => {
                let mc = McConfig {
                    force_point: true,
                    ..cfg.mc
                };
                classify_good(&sb.block, &sb.symbols, cfg.m, &mc, params, &mut oracle)?
                    .cc
                    .map(|c| c.estimate.point)
                    .unwrap_or(0.0)
            }
        };
        s_hat.push(s);
        match v.map(|v| v.overall) {
            Some(Verdict::Pass) => {
                good += 1;
                decided += 1;
            }
            Some(Verdict::Fail) => decided += 1,
            _ => {}
        }
    }
    let cap = 0.75 + 0.5f64.powi(j as i32 + 3);
    let n = cfg.ensemble;
    let tail = cfg
        .p_grid
        .iter()
        .filter(|&&p| p <= cap)
        .map(|&p| {
            let hits = s_hat.iter().filter(|&&s| s <= p).count() as u64;
            let estimate = Estimate::from_counts(hits, n, cfg.mc.seed);
            let bound = if p <= 0.0 {
                0.0
            } else {
                p.powf(params.m_j(j)) * l_j.powi(-(params.beta as i32))
            };
            let verdict = if p <= 0.0 || estimate.ci_low <= bound {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            TailPoint {
                p,
                estimate,
                bound,
                verdict,
            }
        })
        .collect();
    let mgf = length_mgf(&lengths, l_prev, l_j, j);
    let good_est = Estimate::from_counts(good, decided, cfg.mc.seed);
    let good_threshold = 1.0 - l_j.powi(-(params.delta as i32));
    let good_verdict = if decided == 0 {
        Verdict::Undecided
    } else if good_est.ci_high >= good_threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(RecursiveReport {
        level: j,
        ensemble: n,
        tail,
        mgf,
        mgf_tolerance: cfg.mgf_tolerance,
        mgf_verdict: if mgf <= 1.0 + cfg.mgf_tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        good: good_est,
        undecided: n - decided,
        good_threshold,
        good_verdict,
    })
}
