//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use clairvoyant::geometry::{
    build_assignments, build_cc_route, select_avoiding, validate_assignment, validate_route,
    within_band, Assignment, CellDims, Interval,
};
use clairvoyant::montecarlo::{derive_seed, estimate, survival_curve, Alphabet, Estimate};
use clairvoyant::multiscale::{
    build_level1, build_next_level, length_mgf, level1_lengths, level1_tail, Block, BlockPartition,
    Law,
};
use clairvoyant::reachability::{cc_connected, non_oriented_reaches, reach, Rect};
use clairvoyant::scheduler::{extract_schedule, verify_schedule, Move, Schedule};
use clairvoyant::slope::{HalfExp, SlopeWindow};
use clairvoyant::{generate, Error, Params, Role, Sequence, Site};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce() -> Outcome>;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn open(x: &Sequence, y: &Sequence, a: usize, b: usize) -> bool {
    x.items()[a - 1] != y.items()[b - 1]
}

/// Depth-first enumeration of monotone paths, no memo.
fn enumerate_cc(x: &Sequence, y: &Sequence, r: Rect) -> bool {
    fn go(x: &Sequence, y: &Sequence, r: Rect, a: usize, b: usize) -> bool {
        if !open(x, y, a, b) {
            return false;
        }
        if a == r.a2 && b == r.b2 {
            return true;
        }
        (a < r.a2 && go(x, y, r, a + 1, b)) || (b < r.b2 && go(x, y, r, a, b + 1))
    }
    go(x, y, r, r.a1, r.b1)
}

fn c1_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    let mut connected = 0;
    let windows = 2000;
    for k in 0..windows {
        let m = rng.gen_range(3..=5);
        let x = generate(m, 24, derive_seed(11, k), Role::X).unwrap();
        let y = generate(m, 24, derive_seed(11, k), Role::Y).unwrap();
        let w = rng.gen_range(0..=16usize);
        let h = rng.gen_range(0..=16 - w);
        let a1 = rng.gen_range(1..=24 - w);
        let b1 = rng.gen_range(1..=24 - h);
        let r = Rect::new(a1, a1 + w, b1, b1 + h).unwrap();
        let got = cc_connected(&x, &y, r).map_err(|e| e.to_string())?;
        connected += got as usize;
        if got != enumerate_cc(&x, &y, r) {
            mismatches += 1;
        }
    }
    let took = start.elapsed();
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!(
        "{windows} windows ({connected} connected), 0 mismatches, {took:.2?}"
    ))
}

/// First failing state of a replay, recomputed from the sites.
fn first_violation(s: &Schedule, x: &Sequence, y: &Sequence) -> Option<usize> {
    let (mut i1, mut i2) = (1, 1);
    if !open(x, y, 1, 1) {
        return Some(0);
    }
    for (k, st) in s.steps.iter().enumerate() {
        let (seq, idx) = match st.mv {
            Move::AdvanceX => {
                i1 += 1;
                (x, i1)
            }
            Move::AdvanceY => {
                i2 += 1;
                (y, i2)
            }
        };
        if idx > seq.len() || seq.items()[idx - 1] != st.vertex || !open(x, y, i1, i2) {
            return Some(k + 1);
        }
    }
    None
}

fn c2_scheduler_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut instances, mut corrupted, mut swapped) = (0, 0, 0);
    let mut seed = 0u64;
    while instances < 1000 {
        seed += 1;
        let m = [4, 8, 16][rng.gen_range(0..3)];
        let (n1, n2) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
        let x = generate(m, n1, seed, Role::X).unwrap();
        let y = generate(m, n2, seed, Role::Y).unwrap();
        let full = Rect::full(&x, &y).unwrap();
        if !cc_connected(&x, &y, full).unwrap() {
            continue;
        }
        instances += 1;
        let path = reach(&x, &y, full)
            .unwrap()
            .trace_path(Site::new(n1, n2))
            .ok_or("connected instance without a path")?;
        let s = extract_schedule(&path, &x, &y).map_err(|e| e.to_string())?;
        ensure(verify_schedule(&s, &x, &y).ok, || {
            format!("seed {seed}: rejected")
        })?;
        ensure(
            Schedule::from_text(&s.to_text()).ok() == Some(s.clone()),
            || format!("seed {seed}: text round trip"),
        )?;
        if s.steps.is_empty() {
            continue;
        }
        // A wrong landing vertex fails exactly at its own index.
        let k = rng.gen_range(0..s.steps.len());
        let mut bad = s.clone();
        bad.steps[k].vertex = bad.steps[k].vertex % m + 1;
        let v = verify_schedule(&bad, &x, &y);
        ensure(!v.ok && v.first_violation == Some(k + 1), || {
            format!("seed {seed}: vertex mutation at {} reported {:?}", k + 1, v)
        })?;
        corrupted += 1;
        // Swapping two different moves keeps vertices honest; the replay
        // oracle decides where it breaks.
        if let Some(i) = (0..s.steps.len() - 1).find(|&i| s.steps[i].mv != s.steps[i + 1].mv) {
            let mut sw = s.clone();
            let sites = {
                sw.steps.swap(i, i + 1);
                sw.sites()
            };
            for (st, site) in sw.steps.iter_mut().zip(&sites[1..]) {
                st.vertex = match st.mv {
                    Move::AdvanceX => x.items()[site.i1 - 1],
                    Move::AdvanceY => y.items()[site.i2 - 1],
                };
            }
            let want = first_violation(&sw, &x, &y);
            let v = verify_schedule(&sw, &x, &y);
            ensure(v.first_violation == want && v.ok == want.is_none(), || {
                format!("seed {seed}: swap at {i}: {v:?} vs {want:?}")
            })?;
            swapped += want.is_some() as usize;
        }
    }
    Ok(format!(
        "{instances} instances verified; {corrupted} vertex mutations and {swapped} failing swaps located exactly"
    ))
}

fn level1_sample() -> (Vec<usize>, Duration) {
    let start = Instant::now();
    let lengths = level1_lengths(100, 10, Role::X, 100_000, 3, workers()).unwrap();
    (lengths, start.elapsed())
}

fn c3_level1_tail(lengths: &[usize], took: Duration) -> Outcome {
    let rows = level1_tail(lengths, 10, &[1, 3, 5, 9]);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "l={}: {:.4} <= {:.4}+3*{:.4}",
                r.l, r.empirical, r.bound, r.sigma
            )
        })
        .collect();
    ensure(rows.iter().all(|r| r.pass), || detail.join("; "))?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{}; {took:.2?}", detail.join("; ")))
}

fn c4_level1_mgf(lengths: &[usize]) -> Outcome {
    let mgf = length_mgf(lengths, 10f64.sqrt(), 10.0, 1);
    ensure(mgf <= 1.05, || format!("mean {mgf}"))?;
    Ok(format!(
        "mean exp(L0^-6(|X|-1.5 L1)) = {mgf:.6} over {}",
        lengths.len()
    ))
}

fn nonoriented(m: u32, n: usize, seed: u64) -> Estimate {
    estimate(1000, seed, workers(), |s| {
        let x = generate(m, n, s, Role::X).unwrap();
        let y = generate(m, n, s, Role::Y).unwrap();
        non_oriented_reaches(&x, &y, n).unwrap()
    })
    .unwrap()
}

fn c5_nonoriented_phase() -> Outcome {
    let q4 = [nonoriented(4, 256, 5), nonoriented(4, 1024, 6)];
    let q3 = [nonoriented(3, 256, 7), nonoriented(3, 1024, 8)];
    let detail = format!(
        "M=4: {:.3} / {:.3}; M=3: {:.3} / {:.3} (n=256 / n=1024)",
        q4[0].point, q4[1].point, q3[0].point, q3[1].point
    );
    let tol = q4[0].half_width() + q4[1].half_width() + 0.05;
    ensure((q4[0].point - q4[1].point).abs() < tol, || {
        format!("M=4 collapses: {detail}")
    })?;
    ensure(q3[1].point < 0.5 * q3[0].point, || {
        format!("M=3 does not decay: {detail}")
    })?;
    Ok(detail)
}

fn c6_oriented_decay() -> Outcome {
    let c = survival_curve(3, &[50, 100, 200], 10_000, 9, workers(), Alphabet::Uniform)
        .map_err(|e| e.to_string())?;
    let detail: Vec<String> = c
        .iter()
        .map(|p| {
            format!(
                "n={}: {:.4} [{:.4}, {:.4}]",
                p.n, p.estimate.point, p.estimate.ci_low, p.estimate.ci_high
            )
        })
        .collect();
    let ok = c.windows(2).all(|w| {
        w[1].estimate.point < w[0].estimate.point && w[1].estimate.ci_high < w[0].estimate.ci_low
    });
    ensure(ok, || detail.join("; "))?;
    Ok(detail.join("; "))
}

fn c7_monotone_in_m() -> Outcome {
    let ms = [4u32, 8, 16, 64];
    let mut est = Vec::new();
    for &m in &ms {
        let c = survival_curve(m, &[100], 10_000, 10, workers(), Alphabet::Uniform)
            .map_err(|e| e.to_string())?;
        est.push(c[0].estimate);
    }
    let detail: Vec<String> = ms
        .iter()
        .zip(&est)
        .map(|(m, e)| format!("M={m}: {:.4}", e.point))
        .collect();
    let ok = est.windows(2).all(|w| w[1].ci_high >= w[0].ci_low);
    ensure(ok, || detail.join("; "))?;
    Ok(detail.join("; "))
}

fn route_params() -> Params {
    Params {
        l0: 1000,
        ..Params::toy()
    }
}

fn random_dims(rng: &mut ChaCha8Rng, p: &Params, j: u32, tmax: usize) -> CellDims {
    let l = p.scale(j - 1).unwrap();
    let base = p.scale_pow(j - 1, p.p_cell()).unwrap();
    let win = SlopeWindow::new(p.r, HalfExp::assign(j));
    loop {
        let t = rng.gen_range(1..=tmax);
        let tp = rng.gen_range(1..=tmax);
        if win.contains(tp as i64, t as i64) {
            return CellDims {
                n: (0..t).map(|_| base + rng.gen_range(0..=l)).collect(),
                n_prime: (0..tp).map(|_| base + rng.gen_range(0..=l)).collect(),
            };
        }
    }
}

/// L1 distance from `v` to the segment `(0,0)-(t,t')` is at most `radius`,
/// in integers: at `s = a/b`, `b * dist = |b v1 - a t| + |b v2 - a t'|`.
fn within_l1(v: (usize, usize), t: usize, tp: usize, radius: i128) -> bool {
    let (v1, v2, t, tp) = (v.0 as i128, v.1 as i128, t as i128, tp as i128);
    [(0, 1), (1, 1), (v1, t), (v2, tp)]
        .into_iter()
        .filter(|&(a, b)| a <= b)
        .any(|(a, b)| (b * v1 - a * t).abs() + (b * v2 - a * tp).abs() <= radius * b)
}

fn c8_routes() -> Outcome {
    let p = route_params();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 10_000;
    for k in 0..n {
        let j = 1 + (k % 2) as u32;
        let dims = random_dims(&mut rng, &p, j, 300);
        let r = build_cc_route(&dims, j, &p)
            .map_err(|e| format!("t={} t'={} j={j}: {e}", dims.t(), dims.t_prime()))?;
        let rep = validate_route(&r, &p);
        ensure(rep.ok, || format!("invalid route: {:?}", rep.violations))?;
        let (t, tp) = (dims.t(), dims.t_prime());
        ensure(r.vertices().all(|v| within_l1(v, t, tp, 50)), || {
            format!("t={t} t'={tp}: vertex beyond distance 50")
        })?;
        ensure(within_band(&r, 50), || "band check disagrees".into())?;
    }
    Ok(format!("{n} routes valid, all within L1 distance 50"))
}

fn assign_params() -> Params {
    Params {
        p_run: 3,
        p_len: 7,
        ..Params::toy()
    }
}

/// `num/den` inside `[(1 - e)/R, R (1 + e)]` with `e^2 = 2^-h`, squared in
/// integers.
fn in_window(num: i128, den: i128, r: i128, h: u32) -> bool {
    if den <= 0 {
        return false;
    }
    let s = 1i128 << h;
    let low = den - num * r;
    let high = num - r * den;
    (low <= 0 || low * low * s <= den * den) && (high <= 0 || high * high * s <= (r * den).pow(2))
}

fn oracle_valid(a: &Assignment, b: &[usize], bp: &[usize], trim: usize, r: u64) -> bool {
    let star = (a.i2.lo + trim, a.i2.hi - trim);
    let inc = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
    if a.h.len() != a.h_prime.len() || !inc(&a.h) || !inc(&a.h_prime) {
        return false;
    }
    let b: BTreeSet<_> = b.iter().copied().collect();
    let bp: BTreeSet<_> = bp.iter().copied().collect();
    if a.h.len() != b.len() + bp.len()
        || !b.iter().all(|x| a.h.contains(x))
        || !bp.iter().all(|y| a.h_prime.contains(y))
    {
        return false;
    }
    if a.h.iter().any(|&x| x < a.i1.lo || x > a.i1.hi)
        || a.h_prime.iter().any(|&y| y < star.0 || y > star.1)
    {
        return false;
    }
    if a.h
        .iter()
        .zip(&a.h_prime)
        .any(|(x, y)| b.contains(x) && bp.contains(y))
    {
        return false;
    }
    let mut xs = vec![a.i1.lo as i128 - 1];
    xs.extend(a.h.iter().map(|&v| v as i128));
    xs.push(a.i1.hi as i128 + 1);
    let mut ys = vec![a.i2.lo as i128 - 1];
    ys.extend(a.h_prime.iter().map(|&v| v as i128));
    ys.push(a.i2.hi as i128 + 1);
    (0..xs.len() - 1).all(|i| {
        let gx = xs[i + 1] - xs[i] - 1;
        let gy = ys[i + 1] - ys[i] - 1;
        (gx == 0 && gy == 0) || in_window(gy, gx, r as i128, 2 * a.j + 7)
    })
}

fn c9_assignments() -> Outcome {
    let p = assign_params();
    let j = 1;
    let trim = p.scale_pow(j, p.p_run()).unwrap() as usize;
    let len = p.scale_pow(j, p.p_len()).unwrap() as usize;
    let win = SlopeWindow::new(p.r, HalfExp::chunk(j));
    let cap = 3 * p.k0 as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut inputs, mut selected, mut exhausted) = (0, 0, 0);
    while inputs < 1000 {
        let t = rng.gen_range(len..10 * len);
        let tp = rng.gen_range(t / 3..3 * t);
        if !win.contains(tp as i64, t as i64) {
            continue;
        }
        inputs += 1;
        let (lo1, lo2) = (rng.gen_range(1..1000), rng.gen_range(1..1000));
        let i1 = Interval::new(lo1, lo1 + t - 1).unwrap();
        let i2 = Interval::new(lo2, lo2 + tp - 1).unwrap();
        let b: Vec<usize> = (0..rng.gen_range(0..=cap))
            .map(|_| rng.gen_range(i1.lo + trim..=i1.hi - trim))
            .collect();
        let bp: Vec<usize> = (0..rng.gen_range(0..=cap))
            .map(|_| rng.gen_range(i2.lo + trim..=i2.hi - trim))
            .collect();
        let fam = build_assignments(i1, i2, &b, &bp, j, &p)
            .map_err(|e| format!("{i1:?} {i2:?} {b:?} {bp:?}: {e}"))?;
        let first = fam.member(1).unwrap();
        for (k, a) in fam.members().enumerate() {
            ensure(validate_assignment(&a, &b, &bp, &p).ok, || {
                format!("member {} rejected by validator", k + 1)
            })?;
            ensure(oracle_valid(&a, &b, &bp, trim, p.r), || {
                format!("member {} rejected by oracle", k + 1)
            })?;
            ensure(
                b.iter().all(|&x| a.tau(x) == first.tau(x).map(|v| v + k)),
                || format!("member {}: tau shift", k + 1),
            )?;
            ensure(
                bp.iter()
                    .all(|&y| a.tau_inv(y) == first.tau_inv(y).map(|v| v - k)),
                || format!("member {}: inverse shift", k + 1),
            )?;
        }
        let s: Vec<(usize, usize)> = (0..rng.gen_range(0..=p.k0))
            .map(|_| (rng.gen_range(i1.lo..=i1.hi), rng.gen_range(i2.lo..=i2.hi)))
            .collect();
        let margin = rng.gen_range(1..=6u64);
        let near = |a: &Assignment| {
            a.h.iter().zip(&a.h_prime).any(|(x, y)| {
                s.iter()
                    .any(|&(sx, sy)| (x.abs_diff(sx).max(y.abs_diff(sy)) as u64) < margin)
            })
        };
        match select_avoiding(&fam, &s, margin) {
            Ok((i, a)) => {
                ensure(a == fam.member(i).unwrap() && !near(&a), || {
                    format!("selected member {i} is within {margin} of S")
                })?;
                selected += 1;
            }
            Err(Error::Exhausted(_)) => {
                ensure(fam.members().all(|a| near(&a)), || {
                    "exhausted although a member avoids S".into()
                })?;
                exhausted += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!(
        "{inputs} families valid with exact shifts; select_avoiding: {selected} selected, {exhausted} correctly exhausted"
    ))
}

fn check_tiling(parts: &[BlockPartition]) -> Result<(), String> {
    for part in parts {
        let start = part.blocks.first().map_or(1, |b| b.lo);
        let mut pos = start;
        for b in &part.blocks {
            ensure(b.lo == pos, || format!("level {} gap at {pos}", part.level))?;
            ensure(b.sub_lens.iter().sum::<usize>() == b.len(), || {
                "sub-blocks do not fill their block".into()
            })?;
            pos = b.hi + 1;
        }
        ensure(pos - start == part.consumed, || "consumed mismatch".into())?;
        ensure(
            part.level == 1 || start == 1 || part.blocks.is_empty(),
            || "partition does not start at 1".into(),
        )?;
    }
    for w in parts.windows(2) {
        let mut it = w[0].blocks.iter();
        for b in &w[1].blocks {
            for &len in &b.sub_lens {
                ensure(it.next().map(|s| s.len()) == Some(len), || {
                    format!("level {} sub-blocks misaligned", w[1].level)
                })?;
            }
        }
    }
    Ok(())
}

fn good_runs(part: &BlockPartition, run: usize) -> Result<usize, String> {
    for (i, b) in part.blocks.iter().enumerate() {
        let n = b.sub_good.len();
        ensure(n >= run && b.sub_good[n - run..].iter().all(|&g| g), || {
            format!("level {} block {i} tail", part.level)
        })?;
        if i > 0 {
            ensure(b.sub_good[..run].iter().all(|&g| g), || {
                format!("level {} block {i} head", part.level)
            })?;
        }
    }
    Ok(part.blocks.len())
}

/// A level-2 partition with random block lengths; only lengths and verdicts
/// enter the next level.
fn synthetic_level2(rng: &mut ChaCha8Rng, n: usize) -> BlockPartition {
    let mut lo = 1;
    let blocks = (0..n)
        .map(|_| {
            let len = rng.gen_range(300..1000);
            let b = Block {
                level: 2,
                role: Role::X,
                lo,
                hi: lo + len - 1,
                sub_lens: vec![len],
                sub_good: vec![true],
                t: 0,
                w: None,
                bad: vec![],
                law: Law::Mu,
            };
            lo += len;
            b
        })
        .collect();
    BlockPartition {
        level: 2,
        role: Role::X,
        blocks,
        consumed: lo - 1,
        incomplete: false,
    }
}

fn c10_multiscale() -> Outcome {
    let p = Params::toy();
    let (mut l2, mut l3) = (0usize, 0usize);
    for seed in 0..10_000u64 {
        let x = generate(8, 20_000, seed, Role::X).unwrap();
        let level1 = build_level1(&x, &p, Role::X).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let p_good = rng.gen_range(0.6..1.0);
        let v: Vec<bool> = level1.blocks.iter().map(|_| rng.gen_bool(p_good)).collect();
        let level2 = build_next_level(&level1, &v, &p, seed).map_err(|e| e.to_string())?;
        check_tiling(&[level1, level2.clone()]).map_err(|e| format!("seed {seed}: {e}"))?;
        l2 += good_runs(&level2, p.scale_pow(1, p.p_run()).unwrap() as usize)
            .map_err(|e| format!("seed {seed}: {e}"))?;

        let base = synthetic_level2(&mut rng, 2500);
        let p_good = rng.gen_range(0.97..1.0);
        let v: Vec<bool> = base.blocks.iter().map(|_| rng.gen_bool(p_good)).collect();
        let level3 = build_next_level(&base, &v, &p, seed).map_err(|e| e.to_string())?;
        check_tiling(&[base, level3.clone()]).map_err(|e| format!("seed {seed}: {e}"))?;
        l3 += good_runs(&level3, p.scale_pow(2, p.p_run()).unwrap() as usize)
            .map_err(|e| format!("seed {seed}: {e}"))?;
    }
    ensure(l2 > 0 && l3 > 0, || {
        format!("{l2} level-2, {l3} level-3 blocks")
    })?;
    Ok(format!(
        "10000 seeds: {l2} level-2 blocks from sequences, {l3} level-3 blocks from synthetic level-2 partitions; all tile with good end runs"
    ))
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_clairvoyant"))
        .args(args)
        .output()
        .expect("spawn cli");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (x, y, cells) = (d("x.seq"), d("y.seq"), d("cells.json"));
    cli(&[
        "generate", "--M", "8", "--n", "3000", "--seed", "4", "--out", &x,
    ]);
    cli(&[
        "generate", "--M", "8", "--n", "3000", "--role", "y", "--seed", "4", "--out", &y,
    ]);
    let side = 1_000_000u64;
    std::fs::write(
        &cells,
        serde_json::json!({ "n": vec![side; 12], "n_prime": vec![side + 7; 13] }).to_string(),
    )
    .map_err(|e| e.to_string())?;
    let runs: Vec<(&str, Vec<&str>)> = vec![
        (
            "percolate",
            vec![
                "percolate",
                "--x",
                &x,
                "--y",
                &y,
                "--rect",
                "1,40,1,40",
                "--query",
                "cc",
            ],
        ),
        (
            "percolate-ss",
            vec![
                "percolate",
                "--x",
                &x,
                "--y",
                &y,
                "--rect",
                "1,30,1,30",
                "--query",
                "ss",
                "--j",
                "1",
            ],
        ),
        (
            "survive",
            vec![
                "survive", "--M", "4", "--depths", "10,20,40", "--trials", "2000",
            ],
        ),
        (
            "blocks",
            vec![
                "blocks",
                "--level",
                "2",
                "--seq",
                &x,
                "--samples",
                "60",
                "--force-point-estimate",
            ],
        ),
        (
            "goodness",
            vec!["goodness", "--samples", "60", "--count", "5"],
        ),
        (
            "route",
            vec![
                "route", "--t", "12", "--tprime", "13", "--cells", &cells, "--L0", "1000",
            ],
        ),
        (
            "schedule",
            vec!["schedule", "--x", &x, "--y", &y, "--n", "60"],
        ),
        (
            "check-estimates",
            vec!["check-estimates", "--ensemble", "20", "--samples", "60"],
        ),
        (
            "params-validate",
            vec!["params-validate", "--preset", "paper"],
        ),
    ];
    for (name, args) in &runs {
        let (a, b, c) = (
            d(&format!("{name}.1")),
            d(&format!("{name}.8")),
            d(&format!("{name}.re")),
        );
        let with = |out: &str, w: &str| {
            let mut v: Vec<&str> = args.clone();
            v.extend(["--seed", "17", "--workers", w, "--out"]);
            v.push(out);
            v.iter().map(|s| s.to_string()).collect::<Vec<_>>()
        };
        let code1 = cli(&with(&a, "1").iter().map(String::as_str).collect::<Vec<_>>()).0;
        let code8 = cli(&with(&b, "8").iter().map(String::as_str).collect::<Vec<_>>()).0;
        let manifest = format!("{a}.manifest.json");
        let code_re = cli(&["rerun", &manifest, "--workers", "8", "--out", &c]).0;
        ensure(code1 == code8 && code1 == code_re, || {
            format!("{name}: exit codes {code1} {code8} {code_re}")
        })?;
        let read = |p: &str| std::fs::read(p).map_err(|e| format!("{name}: {p}: {e}"));
        let (pa, pb, pc) = (read(&a)?, read(&b)?, read(&c)?);
        ensure(!pa.is_empty() && pa == pb && pa == pc, || {
            format!("{name}: payloads differ")
        })?;
        ensure(Path::new(&manifest).exists(), || {
            format!("{name}: no manifest")
        })?;
    }
    Ok(format!(
        "{} runs: workers 1, workers 8 and manifest reruns byte-identical",
        runs.len()
    ))
}

fn main() {
    let criteria: Vec<(&str, Criterion)> = {
        let (lengths, took) = level1_sample();
        let l2 = lengths.clone();
        vec![
            ("1 oracle equivalence", Box::new(c1_oracle_equivalence)),
            ("2 scheduler round trip", Box::new(c2_scheduler_round_trip)),
            (
                "3 level-1 tail bound",
                Box::new(move || c3_level1_tail(&lengths, took)),
            ),
            ("4 level-1 length MGF", Box::new(move || c4_level1_mgf(&l2))),
            ("5 non-oriented phase", Box::new(c5_nonoriented_phase)),
            ("6 oriented decay at M=3", Box::new(c6_oriented_decay)),
            ("7 monotone in M", Box::new(c7_monotone_in_m)),
            ("8 route construction", Box::new(c8_routes)),
            ("9 assignment family", Box::new(c9_assignments)),
            ("10 multiscale invariants", Box::new(c10_multiscale)),
            ("11 determinism", Box::new(c11_determinism)),
        ]
    };
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match res {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.1?}]");
            }
        }
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
