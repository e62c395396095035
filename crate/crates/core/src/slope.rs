//! Exact slope windows `[(1 - eps)/R, R (1 + eps)]` with `eps = 2^(-h/2)`.
//!
//! Window endpoints are irrational for odd `h`, so membership of a rational
//! `p/d` is decided by squaring integer inequalities. No floating point is
//! involved in any verdict here.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Window exponent counted in half steps: `eps = 2^(-halves/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfExp(pub u32);

impl HalfExp {
    /// `2^-(j+4)`: entry/exit chunks and goodness thresholds.
    pub fn chunk(j: u32) -> Self {
        HalfExp(2 * j + 8)
    }

    /// `2^-(j+7/2)`: assignments, starred events and route-input bounds.
    pub fn assign(j: u32) -> Self {
        HalfExp(2 * j + 7)
    }

    /// `2^-(j+3)`: per-cell route slopes.
    pub fn route(j: u32) -> Self {
        HalfExp(2 * j + 6)
    }

    /// `2^-(j+5)`: boundary densities of the side events.
    pub fn density(j: u32) -> Self {
        HalfExp(2 * j + 10)
    }

    pub fn eps(self) -> f64 {
        (-(self.0 as f64) / 2.0).exp2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeWindow {
    pub r: u64,
    pub h: HalfExp,
}

impl SlopeWindow {
    pub fn new(r: u64, h: HalfExp) -> Self {
        SlopeWindow { r, h }
    }

    /// Is `num/den` inside the window? A non-positive denominator is never
    /// inside.
    pub fn contains(&self, num: i64, den: i64) -> bool {
        if den <= 0 {
            return false;
        }
        self.lower_ok(num as i128, den as i128) && self.upper_ok(num as i128, den as i128)
    }

    // p/d >= (1 - eps)/R  <=>  d - pR <= d eps  <=>  (d - pR)^2 2^h <= d^2
    fn lower_ok(&self, p: i128, d: i128) -> bool {
        let r = self.r as i128;
        let gap = match p.checked_mul(r).and_then(|pr| d.checked_sub(pr)) {
            Some(g) => g,
            None => return big_lower_ok(p, d, self.r, self.h.0),
        };
        if gap <= 0 {
            return true;
        }
        match scaled_square(gap, self.h.0).zip(d.checked_mul(d)) {
            Some((lhs, rhs)) => lhs <= rhs,
            None => big_lower_ok(p, d, self.r, self.h.0),
        }
    }

    // p/d <= R (1 + eps)  <=>  p - Rd <= Rd eps  <=>  (p - Rd)^2 2^h <= (Rd)^2
    fn upper_ok(&self, p: i128, d: i128) -> bool {
        let r = self.r as i128;
        let rd = match r.checked_mul(d) {
            Some(v) => v,
            None => return big_upper_ok(p, d, self.r, self.h.0),
        };
        let gap = p - rd;
        if gap <= 0 {
            return true;
        }
        match scaled_square(gap, self.h.0).zip(rd.checked_mul(rd)) {
            Some((lhs, rhs)) => lhs <= rhs,
            None => big_upper_ok(p, d, self.r, self.h.0),
        }
    }
}

fn scaled_square(g: i128, h: u32) -> Option<i128> {
    let sq = g.checked_mul(g)?;
    if h >= 127 {
        return None;
    }
    sq.checked_mul(1i128 << h)
}

fn big_lower_ok(p: i128, d: i128, r: u64, h: u32) -> bool {
    let (p, d, r) = (BigInt::from(p), BigInt::from(d), BigInt::from(r));
    let gap = &d - &p * &r;
    if gap <= BigInt::from(0) {
        return true;
    }
    (&gap * &gap) << h <= &d * &d
}

fn big_upper_ok(p: i128, d: i128, r: u64, h: u32) -> bool {
    let (p, d, r) = (BigInt::from(p), BigInt::from(d), BigInt::from(r));
    let rd = &r * &d;
    let gap = &p - &rd;
    if gap <= BigInt::from(0) {
        return true;
    }
    (&gap * &gap) << h <= &rd * &rd
}

/// Smallest count meeting `(3/4 + 2^(-h/2)) * size`, evaluated in binary
/// floating point and rounded up.
pub fn density_required(size: usize, h: HalfExp) -> usize {
    ((0.75 + h.eps()) * size as f64).ceil() as usize
}
