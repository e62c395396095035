//! Bernoulli estimates with Wilson intervals, and survival curves.
//!
//! Trial `t` of a run with master seed `s` always sees the seed
//! [`derive_seed`]`(s, t)`, whichever worker executes it, so results do not
//! depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{generate, generate_disjoint, Role};
use crate::reachability::survival_depth;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64, master_seed: u64) -> Self {
        let (ci_low, ci_high) = wilson(successes, trials);
        let point = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Estimate {
            successes,
            trials,
            point,
            ci_low,
            ci_high,
            master_seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// Three-way comparison of the interval against `threshold`.
    pub fn verdict(&self, threshold: f64, force_point: bool) -> Verdict {
        if self.ci_low >= threshold {
            Verdict::Pass
        } else if self.ci_high < threshold {
            Verdict::Fail
        } else if force_point {
            if self.point >= threshold {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        } else {
            Verdict::Undecided
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

/// Wilson score interval at 95%. Zero trials give `[0, 1]`.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let spread = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = ((centre - spread) / denom).clamp(0.0, p);
    let hi = ((centre + spread) / denom).clamp(p, 1.0);
    let lo = if successes == 0 { 0.0 } else { lo };
    let hi = if successes == trials { 1.0 } else { hi };
    (lo, hi)
}

/// Smallest trial count at which an all-success run certifies `threshold`
/// (Wilson lower bound at or above it).
pub fn trials_to_certify(threshold: f64) -> Option<u64> {
    if threshold >= 1.0 {
        return None;
    }
    if threshold <= 0.0 {
        return Some(1);
    }
    // All successes: lower bound n / (n + z^2) >= thr.
    let n = (Z95 * Z95 * threshold / (1.0 - threshold)).ceil();
    if n.is_finite() && n < u64::MAX as f64 {
        let mut n = n.max(1.0) as u64;
        while wilson(n, n).0 < threshold {
            n += 1;
        }
        Some(n)
    } else {
        None
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

/// Run `f(trial, derive_seed(master, trial))` for every trial on `workers`
/// threads and collect results in trial order.
pub fn run_trials<T, F>(trials: u64, master_seed: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    let pool = pool(workers)?;
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| f(t, derive_seed(master_seed, t)))
            .collect()
    }))
}

/// Fraction of trials where `event(seed)` holds.
pub fn estimate<F>(trials: u64, master_seed: u64, workers: usize, event: F) -> Result<Estimate>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let pool = pool(workers)?;
    let successes = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .filter(|&t| event(derive_seed(master_seed, t)))
            .count() as u64
    });
    Ok(Estimate::from_counts(successes, trials, master_seed))
}

/// How sequence pairs are drawn for survival runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    Uniform,
    /// `X` over odd and `Y` over even symbols: every site open.
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub estimate: Estimate,
}

/// Survival depth of one sequence pair drawn from `seed`.
pub fn sample_depth(m: u32, n_max: usize, seed: u64, alphabet: Alphabet) -> Result<usize> {
    let (x, y) = match alphabet {
        Alphabet::Uniform => (
            generate(m, n_max, seed, Role::X)?,
            generate(m, n_max, seed, Role::Y)?,
        ),
        Alphabet::Disjoint => (
            generate_disjoint(m, n_max, seed, Role::X)?,
            generate_disjoint(m, n_max, seed, Role::Y)?,
        ),
    };
    survival_depth(&x, &y, n_max)
}

/// `P(survival_depth >= n)` for each requested `n`, one sequence pair per
/// trial shared by every depth.
pub fn survival_curve(
    m: u32,
    depths: &[usize],
    trials: u64,
    seed: u64,
    workers: usize,
    alphabet: Alphabet,
) -> Result<Vec<CurvePoint>> {
    if depths.is_empty() {
        return Ok(Vec::new());
    }
    if depths.windows(2).any(|w| w[0] > w[1]) || depths[0] == 0 {
        return Err(Error::Domain(
            "depths must be positive and ascending".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let n_max = *depths.last().expect("non-empty");
    let got = run_trials(trials, seed, workers, |_, s| {
        sample_depth(m, n_max, s, alphabet)
    })?;
    let got = got.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(depths
        .iter()
        .map(|&n| CurvePoint {
            n,
            estimate: Estimate::from_counts(
                got.iter().filter(|&&d| d >= n).count() as u64,
                trials,
                seed,
            ),
        })
        .collect())
}
