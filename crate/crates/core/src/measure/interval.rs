//! Interval evaluation of measures with a bit budget.
//!
//! `raw(e, b)` is a sound enclosure of `μ(e)`; boolean combinations spend one bit per
//! localization step and fall back to Fréchet bounds, layers spend two bits per level.
//! `measure_interval` intersects the enclosures for all budgets up to `d`, so results are
//! nested in `d` by construction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::exact::exact_measure;
use crate::measure::layer::layer_raw;
use crate::rational::{fmt_q, half, max_q, min_q, one, pow2, zero, MeasureInterval, Q};
use crate::sets::expr::*;
use crate::sets::localize::localize_bit;

/// Budget ceiling used by `measure_exact`.
pub const MAX_BUDGET: u32 = 40;

pub fn raw(e: &Expr, b: u32) -> MeasureInterval {
    match &**e {
        SetExpr::Empty | SetExpr::Point(_) | SetExpr::Double(_) => MeasureInterval::exact(zero()),
        SetExpr::Full => MeasureInterval::exact(one()),
        SetExpr::Clopen(c) => MeasureInterval::exact(c.measure()),
        SetExpr::O(r) => MeasureInterval::exact(o_tree(r).measure()),
        SetExpr::OStar(r) => MeasureInterval::exact(r.clone()),
        SetExpr::Concat(w, a) => raw(a, b).scale(&pow2(-(w.len() as i64))),
        SetExpr::Complement(a) => raw(a, b).complement(),
        SetExpr::Oplus(a, c) => raw(a, b).avg(&raw(c, b)),
        SetExpr::DisjointExtend(d, t, c) => raw(c, b).scale(&pow2(-(t.len() as i64))).shift(&d.measure()),
        SetExpr::Pad(n, a) => {
            let m = raw(a, b);
            let ph = pow2(-(*n as i64));
            let two = Q::from_integer(2.into());
            MeasureInterval::new(one() - &ph * (&two - &m.lo), one() - &ph * (&two - &m.hi))
        }
        SetExpr::Rake { pole, f, fam } => rake_raw(*pole, f, fam, b),
        SetExpr::Union(x, y) | SetExpr::Intersect(x, y) => bool_raw(e, x, y, b),
        SetExpr::Layer(l) => layer_raw(l, b),
        SetExpr::WTree(t) => match exact_measure(e) {
            Some(m) => MeasureInterval::exact(m),
            None => wtree_raw(t, b),
        },
        SetExpr::Sparse(s) => s.data.measure_at(&s.at, b),
    }
}

fn rake_raw(pole: bool, f: &crate::schedule::IntSchedule, fam: &SetFamily, b: u32) -> MeasureInterval {
    let (fam_start, period) = fam.period();
    let start = fam_start.max(f.head.len());
    // Sum of weights times "term" intervals; the term is μ(A_n) or 1 − μ(A_n).
    let term = |e: &Expr| {
        let m = raw(e, b);
        if pole { m.complement() } else { m }
    };
    let mut lo = zero();
    let mut hi = zero();
    for n in 0..start {
        let w = pow2(-(n as i64) - f.value(n) as i64);
        let t = term(&fam.get(n));
        lo += &w * &t.lo;
        hi += &w * &t.hi;
    }
    let a1 = f.a as i64 + 1;
    let ratio = one() - pow2(-a1 * period as i64);
    for j in 0..period {
        let n = start + j;
        let w = pow2(-a1 * n as i64 - f.b as i64) / &ratio;
        let t = term(&fam.get(n));
        lo += &w * &t.lo;
        hi += &w * &t.hi;
    }
    let s = MeasureInterval::new(lo, hi);
    if pole { s.complement() } else { s }
}

/// Syntactic disjointness used to add measures of unions.
pub fn disjoint(a: &Expr, b: &Expr) -> bool {
    match (&**a, &**b) {
        (SetExpr::Complement(x), SetExpr::Sparse(s)) | (SetExpr::Sparse(s), SetExpr::Complement(x)) => {
            if let SetExpr::Sparse(t) = &**x {
                s.data.inside(&s.at, t)
            } else {
                false
            }
        }
        _ => match (as_clopen(a), as_clopen(b)) {
            (Some(x), Some(y)) => x.intersect(&y).is_empty(),
            _ => false,
        },
    }
}

fn frechet(is_union: bool, x: &MeasureInterval, y: &MeasureInterval) -> MeasureInterval {
    if is_union {
        MeasureInterval::new(max_q(&x.lo, &y.lo), min_q(&one(), &(&x.hi + &y.hi)))
    } else {
        MeasureInterval::new(max_q(&zero(), &(&x.lo + &y.lo - one())), min_q(&x.hi, &y.hi))
    }
}

fn bool_raw(e: &Expr, x: &Expr, y: &Expr, b: u32) -> MeasureInterval {
    let is_union = matches!(**e, SetExpr::Union(_, _));
    let rx = raw(x, b);
    let ry = raw(y, b);
    if is_union && disjoint(x, y) {
        return rx.add(&ry);
    }
    let fr = frechet(is_union, &rx, &ry);
    if b == 0 || fr.is_exact() {
        return fr;
    }
    let l = raw(&localize_bit(e, 0), b - 1);
    let r = raw(&localize_bit(e, 1), b - 1);
    fr.intersect(&l.avg(&r))
}

fn wtree_raw(t: &Expr, b: u32) -> MeasureInterval {
    if is_empty(t) {
        return MeasureInterval::exact(zero());
    }
    if is_full(t) {
        return MeasureInterval::exact(one());
    }
    let mu = exact_measure(t).expect("wtree body has exact measure");
    if b < 2 {
        // μ(W(T)) lies between ½μ(T)·(4/3)·... and 1; use the crude enclosure.
        return MeasureInterval::new(&mu * half(), one());
    }
    let w0 = raw(&crate::sets::localize::wtree_node(localize_bit(t, 0)), b - 2);
    let w1 = raw(&crate::sets::localize::wtree_node(localize_bit(t, 1)), b - 2);
    w0.add(&w1).scale(&pow2(-2)).shift(&(mu * half()))
}

/// Nested enclosure of `μ(e)` using budgets `0..=d`.
pub fn measure_interval(e: &Expr, d: u32) -> MeasureInterval {
    if is_exact_class(e) {
        if let Some(m) = exact_measure(e) {
            return MeasureInterval::exact(m);
        }
    }
    if let SetExpr::Layer(_) | SetExpr::WTree(_) = &**e {
        if let Some(m) = exact_measure(e) {
            return MeasureInterval::exact(m);
        }
    }
    if let SetExpr::Sparse(s) = &**e {
        return s.data.measure_at(&s.at, d);
    }
    let mut acc = raw(e, 0);
    for b in 1..=d {
        if acc.is_exact() {
            break;
        }
        acc = acc.intersect(&raw(e, b));
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    Exact(Q),
    Interval(MeasureInterval),
}

impl Measure {
    pub fn interval(&self) -> MeasureInterval {
        match self {
            Measure::Exact(q) => MeasureInterval::exact(q.clone()),
            Measure::Interval(i) => i.clone(),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.interval().serialize(s)
    }
}

/// Exact value when available, otherwise the first enclosure of width `≤ tol`.
pub fn measure_exact(e: &Expr, tol: &Q) -> Result<Measure> {
    measure_exact_with(e, tol, MAX_BUDGET)
}

pub fn measure_exact_with(e: &Expr, tol: &Q, max_budget: u32) -> Result<Measure> {
    if tol <= &zero() {
        return Err(Error::domain("tolerance must be positive"));
    }
    if let Some(m) = exact_measure(e) {
        return Ok(Measure::Exact(m));
    }
    let mut acc = raw(e, 0);
    for b in 0..=max_budget {
        if b > 0 {
            acc = acc.intersect(&raw(e, b));
        }
        if acc.is_exact() {
            return Ok(Measure::Exact(acc.lo));
        }
        if &acc.width() <= tol {
            return Ok(Measure::Interval(acc));
        }
    }
    Err(Error::Precision {
        msg: format!("width above {} after budget {max_budget}", fmt_q(tol)),
        best: acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::schedule::RateSchedule;

    #[test]
    fn examples() {
        let c = clopen_words([vec![0], vec![1, 0]]);
        assert_eq!(measure_interval(&c, 2), MeasureInterval::exact(q(3, 4)));
        let f = flat(clopen_words([vec![0]]), RateSchedule::default()).unwrap();
        let m = measure_exact(&f, &pow2(-6)).unwrap();
        assert!(m.interval().width() <= pow2(-6));
        let o = make_o(q(3, 5)).unwrap();
        assert_eq!(measure_exact(&o, &pow2(-6)).unwrap(), Measure::Exact(q(3, 4)));
    }

    #[test]
    fn nested_in_depth() {
        let a = union(make_ostar(q(1, 3)).unwrap(), concat(&[1], make_ostar(q(2, 5)).unwrap()));
        let mut prev = MeasureInterval::unit();
        for d in 0..10 {
            let m = measure_interval(&a, d);
            assert!(prev.contains_interval(&m));
            prev = m;
        }
    }
}
