//! Three-valued membership of ultimately periodic points and cylinder classification.

use std::collections::HashSet;

use num::Zero;
use serde::Serialize;

use crate::measure::exact::exact_measure;
use crate::measure::interval::measure_interval;
use crate::schedule::expansion_has;
use crate::sets::expr::*;
use crate::sets::localize::{layer_exit, localize};
use crate::word::{repeat, Lasso};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Verdict {
    In,
    Out,
    Unknown,
}

impl Verdict {
    pub fn not(self) -> Verdict {
        match self {
            Verdict::In => Verdict::Out,
            Verdict::Out => Verdict::In,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    pub fn or(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::In, _) | (_, Verdict::In) => Verdict::In,
            (Verdict::Out, Verdict::Out) => Verdict::Out,
            _ => Verdict::Unknown,
        }
    }

    pub fn and(self, o: Verdict) -> Verdict {
        self.not().or(o.not()).not()
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::In
        } else {
            Verdict::Out
        }
    }

    pub fn is_known(self) -> bool {
        self != Verdict::Unknown
    }
}

struct Ctx {
    depth: usize,
    seen: HashSet<(Expr, Lasso)>,
}

/// Membership of `x` in `e`, deciding only what can be certified after consuming at most
/// `d` bits of `x` in recursive steps.
pub fn member_at_depth(e: &Expr, x: &Lasso, d: usize) -> Verdict {
    let mut ctx = Ctx { depth: d, seen: HashSet::new() };
    member(e, x, 0, &mut ctx)
}

fn first_one(x: &Lasso) -> Option<usize> {
    if x.is_eventually_const_from(0, 0) {
        return None;
    }
    (0..).find(|&i| x.bit(i) == 1)
}

fn member(e: &Expr, x: &Lasso, used: usize, ctx: &mut Ctx) -> Verdict {
    match &**e {
        SetExpr::Empty => return Verdict::Out,
        SetExpr::Full => return Verdict::In,
        SetExpr::Clopen(c) => return Verdict::from_bool(c.contains_point(x)),
        SetExpr::O(r) => return Verdict::from_bool(o_tree(r).contains_point(x)),
        SetExpr::Point(y) => return Verdict::from_bool(x == y),
        SetExpr::OStar(r) => {
            return Verdict::from_bool(first_one(x).is_some_and(|n| expansion_has(r, n as u64)));
        }
        _ => {}
    }
    if used > ctx.depth {
        return Verdict::Unknown;
    }
    let step = |ctx: &mut Ctx, a: &Expr, k: usize| member(a, &x.drop(k), used + k.max(1), ctx);
    match &**e {
        SetExpr::Concat(w, a) => {
            if x.starts_with(w) {
                step(ctx, a, w.len())
            } else {
                Verdict::Out
            }
        }
        SetExpr::Complement(a) => member(a, x, used, ctx).not(),
        SetExpr::Union(a, b) => {
            let va = member(a, x, used, ctx);
            if va == Verdict::In {
                return va;
            }
            va.or(member(b, x, used, ctx))
        }
        SetExpr::Intersect(a, b) => {
            let va = member(a, x, used, ctx);
            if va == Verdict::Out {
                return va;
            }
            va.and(member(b, x, used, ctx))
        }
        SetExpr::Oplus(a, b) => {
            let a = if x.bit(0) == 0 { a } else { b };
            step(ctx, a, 1)
        }
        SetExpr::DisjointExtend(d, t, b) => {
            if d.contains_point(x) {
                Verdict::In
            } else if x.starts_with(t) {
                step(ctx, b, t.len())
            } else {
                Verdict::Out
            }
        }
        SetExpr::Pad(n, a) => {
            if x.starts_with(&repeat(1, *n)) {
                step(ctx, a, *n)
            } else {
                Verdict::from_bool(!x.starts_with(&repeat(0, *n)))
            }
        }
        SetExpr::Double(a) => match x.undouble() {
            Some(y) => {
                let v = member(a, &y, used + 1, ctx);
                v
            }
            None => Verdict::Out,
        },
        SetExpr::Rake { pole, f, fam } => {
            let Some(n) = first_one(x) else {
                return Verdict::from_bool(*pole);
            };
            let fl = f.value(n) as usize;
            if (n..n + fl).all(|i| x.bit(i) == 1) {
                step(ctx, &fam.get(n), n + fl)
            } else {
                Verdict::from_bool(*pole)
            }
        }
        SetExpr::Layer(l) => member_layer(l, x, used, ctx),
        SetExpr::WTree(t) => {
            let Some(i) = x.first_break() else { return Verdict::Out };
            let s: Vec<u8> = (0..i).map(|j| x.bit(2 * j)).collect();
            let Some(mu) = exact_measure(&localize(t, &s)) else { return Verdict::Unknown };
            step(ctx, &ostar_closed(mu), 2 * i + 2)
        }
        SetExpr::Sparse(sr) => {
            let lim = ctx.depth.saturating_sub(used);
            let w = x.take(lim);
            if sr.data.ambient_contains_cone(&sr.at, &w) {
                Verdict::Out
            } else {
                Verdict::Unknown
            }
        }
        _ => unreachable!("handled above"),
    }
}

fn member_layer(l: &Layer, x: &Lasso, used: usize, ctx: &mut Ctx) -> Verdict {
    let Some(i) = x.first_break() else {
        if !l.filled {
            return Verdict::Out;
        }
        let y = x.undouble().expect("no break means doubled");
        return member(&l.a, &y, used + 1, ctx);
    };
    let s: Vec<u8> = (0..i).map(|j| x.bit(2 * j)).collect();
    let local = Layer {
        a: localize(&l.a, &s),
        r: l.r.clone(),
        sched: l.sched.shifted(s.len()),
        filled: l.filled,
        cont: l.cont.clone(),
    };
    let (_, u) = layer_exit(&local);
    let rest = x.drop(2 * i + 2);
    if !rest.starts_with(&u) {
        return Verdict::from_bool(l.filled);
    }
    let tail = rest.drop(u.len());
    let cont = l.cont.expr();
    if let Cont::Nat { .. } = &l.cont {
        if !ctx.seen.insert((cont.clone(), tail.clone())) {
            return Verdict::Out;
        }
    }
    let k = 2 * i + 2 + u.len();
    if used + k > ctx.depth {
        return Verdict::Unknown;
    }
    member(&cont, &tail, used + k, ctx)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum CylinderStatus {
    AllIn,
    AllOut,
    Mixed,
}

/// Classify `N_s` against `e`: `AllIn` when the localization is the full space, `AllOut` when it is
/// empty or certified null with budget `d`, `Mixed` otherwise.
pub fn cylinder_status(e: &Expr, s: &[u8], d: u32) -> CylinderStatus {
    let loc = localize(e, s);
    if is_full(&loc) {
        return CylinderStatus::AllIn;
    }
    if is_empty(&loc) || measure_interval(&loc, d).hi.is_zero() {
        return CylinderStatus::AllOut;
    }
    CylinderStatus::Mixed
}
