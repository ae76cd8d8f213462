//! Localization `A|s = {x : s⌢x ∈ A}`, one bit at a time.

use std::sync::Arc;

use num::Zero;

use crate::measure::exact::exact_measure;
use crate::rational::{half, max_q, one, Q};
use crate::schedule::u_node;
use crate::sets::clopen::ClopenTree;
use crate::sets::expr::*;
use crate::word::repeat;

pub fn localize(e: &Expr, s: &[u8]) -> Expr {
    let mut cur = e.clone();
    for &b in s {
        if is_empty(&cur) || is_full(&cur) {
            break;
        }
        cur = localize_bit(&cur, b);
    }
    cur
}

/// The threshold `max{r, r_0·μ(a)}` and its node `u`, for a layer at its root.
pub fn layer_exit(l: &Layer) -> (Q, Vec<u8>) {
    let mu = exact_measure(&l.a).expect("layer A-slot is exact");
    let thr = max_q(&l.r, &(l.sched.value(0) * mu));
    let (_, u) = u_node(&thr).expect("thresholds lie in [0,1)");
    (thr, u)
}

/// The set seen just after a break `η` at the root of a layer: the optional `O` region
/// followed by the continuation at `u`.
pub fn layer_after_break(l: &Layer) -> Expr {
    let (_, u) = layer_exit(l);
    let d = if l.filled { ClopenTree::cylinder(&u).complement() } else { ClopenTree::empty() };
    dext_unchecked(d, u, l.cont.expr())
}

pub fn layer_shift(l: &Layer, b: u8) -> Expr {
    layer(Layer {
        a: localize_bit(&l.a, b),
        r: l.r.clone(),
        sched: l.sched.shifted(1),
        filled: l.filled,
        cont: l.cont.clone(),
    })
}

pub fn localize_bit(e: &Expr, b: u8) -> Expr {
    match &**e {
        SetExpr::Empty | SetExpr::Full => e.clone(),
        SetExpr::Clopen(c) => clopen(c.localize(&[b])),
        SetExpr::Point(x) => {
            if x.bit(0) == b {
                point(x.drop(1))
            } else {
                empty()
            }
        }
        SetExpr::Concat(w, a) => {
            if w[0] == b {
                concat(&w[1..], a.clone())
            } else {
                empty()
            }
        }
        SetExpr::Complement(a) => complement(localize_bit(a, b)),
        SetExpr::Union(a, c) => union(localize_bit(a, b), localize_bit(c, b)),
        SetExpr::Intersect(a, c) => intersect(localize_bit(a, b), localize_bit(c, b)),
        SetExpr::Oplus(a, c) => {
            if b == 0 {
                a.clone()
            } else {
                c.clone()
            }
        }
        SetExpr::DisjointExtend(d, t, bb) => {
            let dl = d.localize(&[b]);
            if t.is_empty() {
                localize_bit(bb, b)
            } else if t[0] == b {
                dext_unchecked(dl, t[1..].to_vec(), bb.clone())
            } else {
                clopen(dl)
            }
        }
        SetExpr::O(r) => clopen(o_tree(r).localize(&[b])),
        SetExpr::OStar(r) => {
            let h = half();
            if b == 1 {
                if r >= &h {
                    full()
                } else {
                    empty()
                }
            } else if r < &h {
                ostar_closed(r * Q::from_integer(2.into()))
            } else {
                ostar_closed(r * Q::from_integer(2.into()) - one())
            }
        }
        SetExpr::Pad(n, a) => {
            if *n == 1 {
                if b == 1 {
                    a.clone()
                } else {
                    empty()
                }
            } else if b == 1 {
                let ones = repeat(1, n - 1);
                dext_unchecked(ClopenTree::cylinder(&ones).complement(), ones, a.clone())
            } else {
                clopen(ClopenTree::cylinder(&repeat(0, n - 1)).complement())
            }
        }
        SetExpr::Double(a) => concat(&[b], double(localize_bit(a, b))),
        SetExpr::Rake { pole, f, fam } => {
            if b == 0 {
                Arc::new(SetExpr::Rake { pole: *pole, f: f.shifted(), fam: fam.shifted() })
            } else {
                let f0 = f.value(0) as usize;
                let ones = repeat(1, f0 - 1);
                if *pole {
                    dext_unchecked(ClopenTree::cylinder(&ones).complement(), ones, fam.get(0))
                } else {
                    concat(&ones, fam.get(0))
                }
            }
        }
        SetExpr::Layer(l) => {
            let cexpr = layer_after_break(l);
            let next = layer_shift(l, b);
            if b == 0 {
                oplus(next, cexpr)
            } else {
                oplus(cexpr, next)
            }
        }
        SetExpr::WTree(t) => {
            let mu = exact_measure(t).expect("wtree body has exact measure");
            let o = ostar_closed(mu);
            let sub = wtree_node(crate::sets::localize::localize_bit(t, b));
            if b == 0 {
                oplus(sub, o)
            } else {
                oplus(o, sub)
            }
        }
        SetExpr::Sparse(s) => crate::reductions::sparse::localize_ref(s, b),
    }
}

pub(crate) fn wtree_node(t: Expr) -> Expr {
    if is_empty(&t) {
        return empty();
    }
    if let Some(m) = exact_measure(&t) {
        if m.is_zero() && as_clopen(&t).is_some() {
            return empty();
        }
    }
    Arc::new(SetExpr::WTree(t))
}
