//! Rate schedules `(r_n)`, integer schedules `f(n)`, the nodes `u(r)` and binary expansions.

use std::sync::Arc;

use num::{Integer, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, half, least_pow2_below, one, pow2, Q};
use crate::word::Word;

/// `k(r)`: the least `h > 0` with `r ≤ 1 − 2^(−h)`.
pub fn k_of(r: &Q) -> Result<u64> {
    if r.is_negative() || r >= &one() {
        return Err(Error::domain(format!("u_node needs 0 <= r < 1, got {}", fmt_q(r))));
    }
    if r <= &half() {
        return Ok(1);
    }
    Ok(least_pow2_below(&(one() - r)))
}

/// `(k(r), 0^(k−1)⌢1)`.
pub fn u_node(r: &Q) -> Result<(u64, Word)> {
    let k = k_of(r)?;
    let mut u = vec![0u8; k as usize - 1];
    u.push(1);
    Ok((k, u))
}

/// Positions `n_k` of the ones in the terminating binary expansion `r = Σ 2^(−n_k−1)`.
pub fn expansion_indices(r: &Q, count: usize) -> Result<Vec<u64>> {
    if !r.is_positive() || r >= &one() {
        return Err(Error::domain(format!("expansion needs 0 < r < 1, got {}", fmt_q(r))));
    }
    let mut x = r.clone();
    let mut out = Vec::new();
    let mut n = 0u64;
    while out.len() < count && !x.is_zero() {
        x = &x * Q::from_integer(2.into());
        if x >= one() {
            out.push(n);
            x -= one();
        }
        n += 1;
    }
    Ok(out)
}

/// Whether `n` is one of the expansion indices of `r`.
pub fn expansion_has(r: &Q, n: u64) -> bool {
    let scaled = r * pow2(n as i64 + 1);
    scaled.numer().div_floor(scaled.denom()).is_odd()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum RateBase {
    Default,
    Explicit(Arc<Vec<Q>>),
}

/// A strictly increasing sequence in `(0,1)` with supremum 1, indexed absolutely.
///
/// Localizing a construction shifts the schedule, so `value(n)` is the base value at `n + shift`.
/// Explicit schedules continue after their last listed value by halving the gap to 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RateSchedule {
    base: RateBase,
    shift: usize,
}

impl Default for RateSchedule {
    fn default() -> Self {
        RateSchedule { base: RateBase::Default, shift: 0 }
    }
}

impl RateSchedule {
    pub fn explicit(values: Vec<Q>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("explicit schedule needs at least one value"));
        }
        for w in values.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::domain("schedule must be strictly increasing"));
            }
        }
        if values.iter().any(|v| !v.is_positive() || v >= &one()) {
            return Err(Error::domain("schedule values must lie in (0,1)"));
        }
        Ok(RateSchedule { base: RateBase::Explicit(Arc::new(values)), shift: 0 })
    }

    pub fn is_default(&self) -> bool {
        self.base == RateBase::Default
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn shifted(&self, k: usize) -> Self {
        RateSchedule { base: self.base.clone(), shift: self.shift + k }
    }

    pub fn unshifted(&self) -> Self {
        RateSchedule { base: self.base.clone(), shift: 0 }
    }

    pub fn base_values(&self) -> Option<&[Q]> {
        match &self.base {
            RateBase::Default => None,
            RateBase::Explicit(v) => Some(v),
        }
    }

    fn base_value(&self, i: usize) -> Q {
        match &self.base {
            RateBase::Default => one() - pow2(-(i as i64) - 1),
            RateBase::Explicit(v) => {
                let l = v.len();
                if i < l {
                    v[i].clone()
                } else {
                    let g = one() - &v[l - 1];
                    one() - g * pow2(-((i - l + 1) as i64))
                }
            }
        }
    }

    /// `r_{n + shift}`.
    pub fn value(&self, n: usize) -> Q {
        self.base_value(n + self.shift)
    }

    /// `(n0, c)` with `k(value(n)) = n + c` for all `n ≥ n0`.
    pub fn k_regime(&self) -> (usize, i64) {
        let (l0, c) = match &self.base {
            RateBase::Default => (0usize, 1i64),
            RateBase::Explicit(v) => {
                let l = v.len();
                let g = one() - &v[l - 1];
                (l, 1 - l as i64 + least_pow2_below(&g) as i64)
            }
        };
        (l0.saturating_sub(self.shift), c + self.shift as i64)
    }

    pub fn describe(&self) -> String {
        match &self.base {
            RateBase::Default => "default".into(),
            RateBase::Explicit(v) => {
                let vals: Vec<String> = v.iter().map(fmt_q).collect();
                format!("[{}]", vals.join(","))
            }
        }
    }
}

/// A schedule `f: ω → ω∖{0}`: an explicit head followed by the affine tail `a·n + b`.
///
/// The tail is evaluated at the schedule's own index, so `value(n) = a·n + b` for `n ≥ head.len()`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct IntSchedule {
    pub head: Vec<u64>,
    pub a: u64,
    pub b: u64,
}

impl IntSchedule {
    pub fn affine(a: u64, b: u64) -> Result<Self> {
        Self::new(Vec::new(), a, b)
    }

    pub fn constant(c: u64) -> Result<Self> {
        Self::affine(0, c)
    }

    /// A list whose last entry repeats forever.
    pub fn list(values: Vec<u64>) -> Result<Self> {
        let mut head = values;
        let last = head.pop().ok_or_else(|| Error::domain("empty schedule list"))?;
        Self::new(head, 0, last)
    }

    pub fn new(head: Vec<u64>, a: u64, b: u64) -> Result<Self> {
        if head.contains(&0) || (b == 0) {
            return Err(Error::domain("integer schedule values must be >= 1"));
        }
        Ok(IntSchedule { head, a, b })
    }

    pub fn value(&self, n: usize) -> u64 {
        if n < self.head.len() {
            self.head[n]
        } else {
            self.a * n as u64 + self.b
        }
    }

    pub fn shifted(&self) -> Self {
        if self.head.is_empty() {
            IntSchedule { head: Vec::new(), a: self.a, b: self.a + self.b }
        } else {
            IntSchedule { head: self.head[1..].to_vec(), a: self.a, b: self.b }
        }
    }

    pub fn describe(&self) -> String {
        if self.head.is_empty() {
            format!("n*{}+{}", self.a, self.b)
        } else {
            let mut parts: Vec<String> = self.head.iter().map(|v| v.to_string()).collect();
            if self.a == 0 {
                parts.push(self.b.to_string());
                format!("[{}]", parts.join(","))
            } else {
                format!("[{}]+n*{}+{}", parts.join(","), self.a, self.b)
            }
        }
    }
}
