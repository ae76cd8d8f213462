//! Exact rationals and nested measure intervals.

use std::fmt;

use num::bigint::BigInt;
use num::{BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn half() -> Q {
    q(1, 2)
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Q {
    let m = BigInt::one() << k.unsigned_abs() as usize;
    if k >= 0 {
        Q::from_integer(m)
    } else {
        Q::new(BigInt::one(), m)
    }
}

pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

pub fn is_dyadic(x: &Q) -> bool {
    let d = x.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    (d >> tz as usize).is_one()
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn clamp01(x: Q) -> Q {
    if x.is_negative() {
        zero()
    } else if x > one() {
        one()
    } else {
        x
    }
}

/// Approximate value for display only.
pub fn approx(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Least `h ≥ 1` with `2^(-h) ≤ g`, for `0 < g`.
pub fn least_pow2_below(g: &Q) -> u64 {
    let (p, qd) = (g.numer().clone(), g.denom().clone());
    let mut h = (qd.bits() as i64 - p.bits() as i64 - 1).max(1) as u64;
    while h > 1 && (&p << (h as usize - 1)) >= qd {
        h -= 1;
    }
    while (&p << h as usize) < qd {
        h += 1;
    }
    h
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn floor_q(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// A closed interval `[lo, hi]` with `0 ≤ lo ≤ hi ≤ 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MeasureInterval {
    pub lo: Q,
    pub hi: Q,
}

impl MeasureInterval {
    pub fn new(lo: Q, hi: Q) -> Self {
        let lo = clamp01(lo);
        let hi = clamp01(hi);
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        if lo > hi {
            return MeasureInterval { lo: hi.clone(), hi };
        }
        MeasureInterval { lo, hi }
    }

    pub fn exact(x: Q) -> Self {
        Self::new(x.clone(), x)
    }

    pub fn unit() -> Self {
        Self::new(zero(), one())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, o: &MeasureInterval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn intersect(&self, o: &MeasureInterval) -> MeasureInterval {
        let lo = max_q(&self.lo, &o.lo);
        let hi = min_q(&self.hi, &o.hi);
        if lo <= hi {
            MeasureInterval { lo, hi }
        } else {
            // Disjoint bounds can only come from an evaluator bug; keep the tighter one.
            debug_assert!(false, "disjoint intervals {self} and {o}");
            o.clone()
        }
    }

    pub fn complement(&self) -> MeasureInterval {
        Self::new(one() - &self.hi, one() - &self.lo)
    }

    pub fn scale(&self, c: &Q) -> MeasureInterval {
        Self::new(&self.lo * c, &self.hi * c)
    }

    pub fn shift(&self, c: &Q) -> MeasureInterval {
        Self::new(&self.lo + c, &self.hi + c)
    }

    pub fn add(&self, o: &MeasureInterval) -> MeasureInterval {
        Self::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn avg(&self, o: &MeasureInterval) -> MeasureInterval {
        let h = half();
        Self::new((&self.lo + &o.lo) * &h, (&self.hi + &o.hi) * &h)
    }

    /// Image under a function that is monotone in each argument, evaluated at the corners.
    pub fn map2(&self, o: &MeasureInterval, f: impl Fn(&Q, &Q) -> Q) -> MeasureInterval {
        let vals = [f(&self.lo, &o.lo), f(&self.lo, &o.hi), f(&self.hi, &o.lo), f(&self.hi, &o.hi)];
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        Self::new(lo, hi)
    }
}

impl fmt::Display for MeasureInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_q(&self.lo), fmt_q(&self.hi))
    }
}

impl Serialize for MeasureInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MeasureInterval", 2)?;
        st.serialize_field("lo", &fmt_q(&self.lo))?;
        st.serialize_field("hi", &fmt_q(&self.hi))?;
        st.end()
    }
}

/// Serialize a rational as a `"p/q"` string.
pub fn ser_q<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_q(&one()), "1/1");
        assert_eq!(fmt_q(&zero()), "0/1");
        assert_eq!(fmt_q(&q(6, 8)), "3/4");
        assert_eq!(parse_q("3/5").unwrap(), q(3, 5));
        assert_eq!(parse_q("1").unwrap(), one());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn pow2_and_dyadic() {
        assert_eq!(pow2(3), q(8, 1));
        assert_eq!(pow2(-3), q(1, 8));
        assert!(is_dyadic(&q(3, 8)));
        assert!(!is_dyadic(&q(1, 3)));
    }

    #[test]
    fn least_pow2() {
        for n in 1..200i64 {
            for d in [n, n + 1, 3 * n + 1] {
                let g = q(n, d * 7);
                let h = least_pow2_below(&g);
                assert!(pow2(-(h as i64)) <= g);
                if h > 1 {
                    assert!(pow2(-(h as i64) + 1) > g);
                }
            }
        }
        assert_eq!(least_pow2_below(&one()), 1);
        assert_eq!(least_pow2_below(&half()), 1);
        assert_eq!(least_pow2_below(&q(1, 4)), 2);
    }
}
