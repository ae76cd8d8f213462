//! The positive-measure tree, ρ-levels, the climb and descend searches, supports and distance.

use std::collections::VecDeque;

use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::interval::{measure_exact_with, measure_interval, Measure, MAX_BUDGET};
use crate::rational::{least_pow2_below, one, pow2, MeasureInterval, Q};
use crate::sets::expr::*;
use crate::sets::localize::localize;
use crate::word::{is_prefix, word_label, Word};

/// Budgets tried when a sign or level has to be resolved.
const BUDGETS: [u32; 5] = [8, 16, 24, 32, MAX_BUDGET];

fn word_set_label(ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| word_label(w)).collect()
}

/// `{s : lh(s) ≤ d, μ(e|s) > 0}` in ⊴ order.
pub fn density_tree(e: &Expr, d: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    let mut layer: Vec<(Word, Expr)> = vec![(Vec::new(), e.clone())];
    for depth in 0..=d {
        let mut next = Vec::new();
        for (s, loc) in layer {
            if !positive(&loc, &s)? {
                continue;
            }
            out.push(s.clone());
            if depth < d {
                for b in 0..2u8 {
                    let mut t = s.clone();
                    t.push(b);
                    next.push((t, crate::sets::localize::localize_bit(&loc, b)));
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

fn positive(loc: &Expr, s: &[u8]) -> Result<bool> {
    if is_empty(loc) {
        return Ok(false);
    }
    if is_full(loc) {
        return Ok(true);
    }
    for b in BUDGETS {
        let m = measure_interval(loc, b);
        if m.lo > Q::zero() {
            return Ok(true);
        }
        if m.hi.is_zero() {
            return Ok(false);
        }
    }
    Err(Error::Precision {
        msg: format!("sign of the measure at node {} unresolved", word_label(s)),
        best: measure_interval(loc, MAX_BUDGET),
    })
}

/// The level `n` with `x ∈ [1 − 2^(−n), 1 − 2^(−n−1))`, for `0 ≤ x < 1`.
pub fn level_of(x: &Q) -> u32 {
    let g = one() - x;
    let h = least_pow2_below(&g) as u32;
    if pow2(-(h as i64)) == g {
        h
    } else {
        h - 1
    }
}

/// Lowest and highest levels compatible with an interval (the upper end may be `None` when
/// `hi = 1`).
pub fn rho_bounds(m: &MeasureInterval) -> (u32, Option<u32>) {
    let lo = level_of(&m.lo.clone().min(one() - pow2(-200)));
    let hi = if m.hi >= one() { None } else { Some(level_of(&m.hi)) };
    (lo, hi)
}

/// Whether the true measure of `e` is known to lie strictly below the upper end of its enclosures.
pub fn upper_is_strict(e: &Expr) -> bool {
    matches!(&**e, SetExpr::Sparse(r) if r.data.strict_upper())
}

/// As `rho_bounds`, using `μ < hi` when the upper end is strict.
pub fn rho_bounds_strict(m: &MeasureInterval, strict: bool) -> (u32, Option<u32>) {
    let (lo, hi) = rho_bounds(m);
    if !strict || m.hi >= one() {
        return (lo, hi);
    }
    let g = one() - &m.hi;
    let k = least_pow2_below(&g) as u32;
    if k >= 1 && pow2(-(k as i64)) == g {
        return (lo, Some(k - 1));
    }
    (lo, hi)
}

/// Enclosure of `μ(e|s)` refined until the ρ-level is determined.
pub fn rho_with(e: &Expr, s: &[u8], budgets: &[u32]) -> Result<(u32, MeasureInterval)> {
    let loc = localize(e, s);
    let strict = upper_is_strict(&loc);
    let mut last = MeasureInterval::unit();
    for &b in budgets {
        let m = measure_interval(&loc, b);
        if m.hi.is_zero() {
            return Err(Error::Domain(format!("node {} is not in the positive-measure tree", word_label(s))));
        }
        if m.lo.is_one() {
            return Err(Error::Domain(format!("μ = 1 at node {}, so ρ is undefined", word_label(s))));
        }
        let (l, h) = rho_bounds_strict(&m, strict);
        if h == Some(l) {
            return Ok((l, m));
        }
        last = m;
    }
    Err(Error::Precision { msg: format!("ρ at node {} unresolved", word_label(s)), best: last })
}

pub fn rho(e: &Expr, s: &[u8]) -> Result<u32> {
    rho_with(e, s, &BUDGETS).map(|(l, _)| l)
}

/// Parameters for the tree searches.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub measure_budget: u32,
    pub max_nodes: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { measure_budget: 24, max_nodes: 20_000 }
    }
}

fn measure_at(e: &Expr, t: &[u8], b: u32) -> MeasureInterval {
    measure_interval(&localize(e, t), b)
}

/// Least `t ⊇ s` in ⊴ order with `μ(e|t) ≥ r`, reached through nodes `u` with `μ(e|u) ≥ μ(e|s)`
/// (or already `≥ r`), all certified by enclosures.
pub fn climb(e: &Expr, s: &[u8], r: &Q, cfg: &SearchConfig) -> Result<Word> {
    let base = measure_at(e, s, cfg.measure_budget);
    if &base.lo >= r {
        return Ok(s.to_vec());
    }
    if r >= &one() {
        return Err(Error::domain("climb target must be below 1"));
    }
    let mut queue: VecDeque<Word> = VecDeque::from([s.to_vec()]);
    let mut visited = 0;
    while let Some(u) = queue.pop_front() {
        for b in 0..2u8 {
            let mut t = u.clone();
            t.push(b);
            visited += 1;
            if visited > cfg.max_nodes {
                return Err(Error::Budget(format!("climb from {} to {} exceeded {} nodes", word_label(s), crate::rational::fmt_q(r), cfg.max_nodes)));
            }
            let m = measure_at(e, &t, cfg.measure_budget);
            if &m.lo >= r {
                return Ok(t);
            }
            if m.lo >= base.hi {
                queue.push_back(t);
            }
        }
    }
    Err(Error::Budget(format!("no admissible extension of {} reaches {}", word_label(s), crate::rational::fmt_q(r))))
}

/// Least `t ⊃ s` in ⊴ order with `ρ(t) = j`, reached through nodes with `ρ ≥ j + 1`.
pub fn descend_to(e: &Expr, s: &[u8], j: u32, cfg: &SearchConfig) -> Result<Word> {
    let budgets = [cfg.measure_budget, cfg.measure_budget + 8, MAX_BUDGET.max(cfg.measure_budget + 16)];
    let (start, _) = rho_with(e, s, &budgets)?;
    if j >= start {
        return Err(Error::Domain(format!("descend_to needs j < ρ(s) = {start}, got {j}")));
    }
    let floor = one() - pow2(-(j as i64) - 1);
    let ceil = one() - pow2(-(j as i64));
    let mut queue: VecDeque<Word> = VecDeque::from([s.to_vec()]);
    let mut visited = 0;
    while let Some(u) = queue.pop_front() {
        for b in 0..2u8 {
            let mut t = u.clone();
            t.push(b);
            visited += 1;
            if visited > cfg.max_nodes {
                return Err(Error::Budget(format!("descend from {} to level {j} exceeded {} nodes", word_label(s), cfg.max_nodes)));
            }
            let m = measure_at(e, &t, cfg.measure_budget);
            if m.lo >= floor {
                queue.push_back(t);
            } else if m.hi < floor && m.lo >= ceil {
                return Ok(t);
            }
        }
    }
    Err(Error::Budget(format!("no descent from {} to level {j}", word_label(s))))
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportsApprox {
    pub depth: usize,
    pub inner: Vec<String>,
    pub outer: Vec<String>,
    pub unknown: Vec<String>,
    #[serde(skip)]
    pub inner_words: Vec<Word>,
    #[serde(skip)]
    pub outer_words: Vec<Word>,
}

/// Depth-`d` cylinders of full relative measure and the positive-measure tree to depth `d`.
pub fn supports_approx(e: &Expr, d: usize) -> SupportsApprox {
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    let mut unknown = Vec::new();
    let mut layer: Vec<(Word, Expr)> = vec![(Vec::new(), e.clone())];
    for depth in 0..=d {
        let mut next = Vec::new();
        for (s, loc) in layer {
            let m = if is_full(&loc) {
                MeasureInterval::exact(one())
            } else if is_empty(&loc) {
                MeasureInterval::exact(Q::zero())
            } else {
                let mut m = measure_interval(&loc, BUDGETS[0]);
                for &b in &BUDGETS[1..] {
                    if m.lo > Q::zero() || m.hi.is_zero() {
                        break;
                    }
                    m = measure_interval(&loc, b);
                }
                m
            };
            if depth == d && m.lo.is_one() {
                inner.push(s.clone());
            }
            if m.hi.is_zero() {
                continue;
            }
            if m.lo.is_zero() {
                unknown.push(s.clone());
            }
            outer.push(s.clone());
            if depth < d {
                for b in 0..2u8 {
                    let mut t = s.clone();
                    t.push(b);
                    next.push((t, crate::sets::localize::localize_bit(&loc, b)));
                }
            }
        }
        layer = next;
    }
    SupportsApprox {
        depth: d,
        inner: word_set_label(&inner),
        outer: word_set_label(&outer),
        unknown: word_set_label(&unknown),
        inner_words: inner,
        outer_words: outer,
    }
}

pub fn sym_diff(a: &Expr, b: &Expr) -> Expr {
    union(intersect(a.clone(), complement(b.clone())), intersect(complement(a.clone()), b.clone()))
}

/// Enclosure of `δ(a, b) = μ(a △ b)` of width at most `tol`.
pub fn malg_distance(a: &Expr, b: &Expr, tol: &Q) -> Result<MeasureInterval> {
    malg_distance_with(a, b, tol, MAX_BUDGET)
}

pub fn malg_distance_with(a: &Expr, b: &Expr, tol: &Q, max_budget: u32) -> Result<MeasureInterval> {
    if let (Some(x), Some(y)) = (as_clopen(a), as_clopen(b)) {
        return Ok(MeasureInterval::exact(x.sym_diff(&y).measure()));
    }
    measure_exact_with(&sym_diff(a, b), tol, max_budget).map(|m| match m {
        Measure::Exact(q) => MeasureInterval::exact(q),
        Measure::Interval(i) => i,
    })
}

/// Whether `w` lies in the listed tree.
pub fn tree_contains(tree: &[Word], w: &[u8]) -> bool {
    tree.iter().any(|t| t.as_slice() == w)
}

/// All nodes of `tree` extending `s`.
pub fn subtree<'a>(tree: &'a [Word], s: &'a [u8]) -> impl Iterator<Item = &'a Word> + 'a {
    tree.iter().filter(move |t| is_prefix(s, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::schedule::IntSchedule;

    #[test]
    fn levels() {
        assert_eq!(level_of(&q(7, 10)), 1);
        assert_eq!(level_of(&q(1, 4)), 0);
        assert_eq!(level_of(&q(1, 2)), 1);
        assert_eq!(level_of(&q(3, 4)), 2);
        assert_eq!(level_of(&Q::zero()), 0);
        assert_eq!(level_of(&q(5, 6)), 2);
    }

    #[test]
    fn climb_examples() {
        let c = clopen_words([vec![0]]);
        assert_eq!(climb(&c, &[], &q(9, 10), &SearchConfig::default()).unwrap(), vec![0]);
        assert_eq!(climb(&c, &[0], &q(9, 10), &SearchConfig::default()).unwrap(), vec![0]);
        assert!(density_tree(&empty(), 4).unwrap().is_empty());
        let t = density_tree(&c, 3).unwrap();
        assert!(t.iter().all(|w| w.first().map_or(true, |&b| b == 0)));
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn distances() {
        let a = clopen_words([vec![0]]);
        let b = clopen_words([vec![1]]);
        assert_eq!(malg_distance(&a, &b, &pow2(-10)).unwrap(), MeasureInterval::exact(one()));
        let r = rake(false, IntSchedule::affine(1, 1).unwrap(), SetFamily::constant(full())).unwrap();
        assert_eq!(malg_distance(&r, &full(), &pow2(-10)).unwrap(), MeasureInterval::exact(q(1, 3)));
    }
}
