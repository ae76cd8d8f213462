//! Measures of layered constructions (Plus, Sum, Natural, Flat).
//!
//! For a layer `L` with continuation `C`, `μ(L) = f·(1 − β) + β·μ(C)` where `f` is 1 when the
//! `O` regions belong to the set and
//!
//! ```text
//! β = Σ_s 2^(−2 lh(s) − 1) · 2^(−m(s)),   m(s) = k(max{r, r_lh(s) · μ(A|s)})
//! ```
//!
//! is the total measure of the exit cones. `β` satisfies `β(A) = ½ 2^(−m(ε)) + ¼(β(A|0) + β(A|1))`
//! and has closed forms when `μ(A) ∈ {0, 1}`.

use std::collections::HashMap;

use num::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;

use crate::measure::exact::exact_measure;
use crate::measure::interval::raw;
use crate::rational::{half, max_q, one, pow2, q, zero, MeasureInterval, Q};
use crate::schedule::{k_of, RateSchedule};
use crate::sets::expr::*;
use crate::sets::localize::localize_bit;

type BetaKey = (Expr, Q, RateSchedule, u32);

static BETA_MEMO: Lazy<Mutex<HashMap<BetaKey, MeasureInterval>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn k(r: &Q) -> i64 {
    k_of(r).expect("thresholds lie in [0,1)") as i64
}

/// `Σ_n 2^(−n−1) 2^(−k(max{r, r_n}))` for a schedule shifted to the layer root.
fn beta_full(r: &Q, sched: &RateSchedule) -> Q {
    let (n0, c) = sched.k_regime();
    let mut n = 0usize;
    let mut total = zero();
    while n < n0 || sched.value(n) < *r {
        let m = k(&max_q(r, &sched.value(n)));
        total += pow2(-(n as i64) - 1 - m);
        n += 1;
    }
    // For n ≥ N: m_n = n + c, so the tail is 2^(−1−c) Σ_{n≥N} 4^(−n).
    total + pow2(-1 - c) * pow2(-2 * n as i64) * q(4, 3)
}

/// Interval for `β` of the layer `(a, r, sched)` using `budget` bits (two per level).
pub fn beta(a: &Expr, r: &Q, sched: &RateSchedule, budget: u32) -> MeasureInterval {
    let mu = exact_measure(a).expect("layer A-slot is exact");
    if mu.is_zero() {
        return MeasureInterval::exact(pow2(-k(r)));
    }
    if mu.is_one() {
        return MeasureInterval::exact(beta_full(r, sched));
    }
    if budget < 2 {
        return MeasureInterval::new(zero(), pow2(-k(r)));
    }
    let key = (a.clone(), r.clone(), sched.clone(), budget);
    if let Some(v) = BETA_MEMO.lock().get(&key) {
        return v.clone();
    }
    let m = k(&max_q(r, &(sched.value(0) * &mu)));
    let next = sched.shifted(1);
    let b0 = beta(&localize_bit(a, 0), r, &next, budget - 2);
    let b1 = beta(&localize_bit(a, 1), r, &next, budget - 2);
    let quarter = pow2(-2);
    let v = b0.add(&b1).scale(&quarter).shift(&(pow2(-m) * half()));
    BETA_MEMO.lock().insert(key, v.clone());
    v
}

/// `f(1 − β) + β·c`, monotone in each argument, evaluated at the corners.
fn combine(filled: bool, beta: &MeasureInterval, c: &MeasureInterval) -> MeasureInterval {
    beta.map2(c, |b, m| if filled { one() - b + b * m } else { b * m })
}

/// `μ(X) = (1 − β)/(1 − β/2)` for the repeating Natural layer, decreasing in `β`.
fn nat_fixed_point(beta: &MeasureInterval) -> MeasureInterval {
    let g = |b: &Q| (one() - b) / (one() - b * half());
    MeasureInterval::new(g(&beta.hi), g(&beta.lo))
}

pub fn cont_raw(cont: &Cont, budget: u32) -> MeasureInterval {
    match cont {
        Cont::Set(b) => raw(b, budget),
        Cont::Nat { a0, sched0 } => {
            let bf = beta(a0, &Q::zero(), sched0, budget);
            nat_fixed_point(&bf).scale(&half())
        }
        Cont::Flat { a0, sched0, level } => flat_chain(a0, sched0, *level, budget, (budget / 2).max(1)),
    }
}

/// `μ(P_{h(n)}(Y_{n+1}))` with `μ(Y_{n+1}) = 1 − β_{n+1}(1 − μ(cont_{n+1}))`, truncated after `depth` levels.
fn flat_chain(a0: &Expr, sched0: &RateSchedule, level: usize, budget: u32, depth: u32) -> MeasureInterval {
    let h = flat_h(sched0, level) as i64;
    let inner = if depth == 0 {
        MeasureInterval::unit()
    } else {
        let b = beta(a0, &sched0.value(level + 1), sched0, budget);
        let c = flat_chain(a0, sched0, level + 1, budget, depth - 1);
        combine(true, &b, &c)
    };
    let two = Q::from_integer(2.into());
    let ph = pow2(-h);
    MeasureInterval::new(one() - &ph * (&two - &inner.lo), one() - &ph * (&two - &inner.hi))
}

pub fn layer_raw(l: &Layer, budget: u32) -> MeasureInterval {
    let b = beta(&l.a, &l.r, &l.sched, budget);
    let c = cont_raw(&l.cont, budget);
    combine(l.filled, &b, &c)
}

/// Exact layer measure when `a` is clopen, so the `β` recursion bottoms out.
pub fn layer_exact(l: &Layer) -> Option<Q> {
    let c = as_clopen(&l.a)?;
    let budget = 2 * c.depth() as u32 + 2;
    let b = beta(&l.a, &l.r, &l.sched, budget);
    if !b.is_exact() {
        return None;
    }
    let cont = match &l.cont {
        Cont::Set(x) => MeasureInterval::exact(exact_measure(x)?),
        Cont::Nat { a0, sched0 } => {
            let cc = as_clopen(a0)?;
            let bf = beta(a0, &Q::zero(), sched0, 2 * cc.depth() as u32 + 2);
            if !bf.is_exact() {
                return None;
            }
            nat_fixed_point(&bf).scale(&half())
        }
        Cont::Flat { .. } => return None,
    };
    let v = combine(l.filled, &b, &cont);
    v.is_exact().then(|| v.lo)
}

/// Measure of the union of the cones `N_e` over level-`n` exit nodes (`n ≥ 1`).
///
/// Natural: `μ(U_1) = β(A, 0)` and `μ(U_{n+1}) = μ(U_n)·β/2`. Flat: `μ(U_1) = β(A, r_1)` and
/// `μ(U_{n+1}) = μ(U_n)·2^(−h(n))·β(A, r_{n+1})`. Both ratios are at most `1/2`.
pub fn crossing_measure(l: &Layer, n: usize, budget: u32) -> Option<MeasureInterval> {
    match &l.cont {
        Cont::Nat { a0, sched0 } => {
            let b = beta(a0, &Q::zero(), sched0, budget);
            let mut acc = beta(&l.a, &l.r, &l.sched, budget);
            for _ in 1..n {
                acc = MeasureInterval::new(&acc.lo * &b.lo * half(), &acc.hi * &b.hi * half());
            }
            Some(acc)
        }
        Cont::Flat { a0, sched0, level } => {
            let mut acc = beta(&l.a, &l.r, &l.sched, budget);
            for i in 0..n.saturating_sub(1) {
                let lv = level + i;
                let b = beta(a0, &sched0.value(lv + 1), sched0, budget);
                let ph = pow2(-(flat_h(sched0, lv) as i64));
                acc = MeasureInterval::new(&acc.lo * &b.lo * &ph, &acc.hi * &b.hi * &ph);
            }
            Some(acc)
        }
        Cont::Set(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn plus_empty_is_half() {
        let p = plus(empty(), zero(), RateSchedule::default()).unwrap();
        assert_eq!(exact_measure(&p), Some(half()));
    }

    #[test]
    fn beta_full_matches_truncated_sum() {
        let s = RateSchedule::default();
        for r in [zero(), q(1, 2), q(5, 6), q(31, 32)] {
            let closed = beta_full(&r, &s);
            let mut partial = zero();
            for n in 0..60usize {
                let m = k(&max_q(&r, &s.value(n)));
                partial += pow2(-(n as i64) - 1 - m);
            }
            assert!(closed >= partial && &closed - &partial < pow2(-100));
        }
    }
}
