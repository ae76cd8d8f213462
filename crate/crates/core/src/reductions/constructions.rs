//! Closed sets with empty interior, a regular open set with a fat frontier, the supports
//! counterexample, the `W(T)` set and the clopen codes used for density.

use std::sync::Arc;

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::exact::exact_measure;
use crate::measure::interval::measure_interval;
use crate::measure::tree::supports_approx;
use crate::rational::{fmt_q, half, one, pow2, zero, MeasureInterval, Q};
use crate::reductions::sparse::{Ambient, SparseData};
use crate::schedule::IntSchedule;
use crate::sets::clopen::{make_clopen, ClopenTree};
use crate::sets::expr::*;
use crate::sets::localize::localize;
use crate::sets::member::{cylinder_status, CylinderStatus};
use crate::word::{double, repeat, word_label, words_of_len, words_up_to, Lasso, Word};

/// Budget used by the certificates below.
const CERT_BUDGET: u32 = 24;

/// A closed set `[T]` obtained from a sparse sequence, with its bookkeeping.
#[derive(Clone, Debug)]
pub struct SparseClosed {
    pub expr: Expr,
    pub data: Arc<SparseData>,
    pub order: IntSchedule,
    /// `Σ_n 2^(−ℓ_n)`, an upper bound on the measure removed.
    pub loss_bound: Q,
}

impl SparseClosed {
    /// Whether every node of length at most `horizon` that survives in the ambient tree has a
    /// removed cone below it or above it.
    pub fn empty_interior_to(&self, horizon: usize) -> bool {
        for s in words_up_to(horizon) {
            if self.data.cone_above(&s).is_some() || self.data.ambient_contains_cone(&[], &s) {
                continue;
            }
            if self.data.cones_below(&s).is_empty() {
                let m = self.data.measure_at(&s, 8);
                if self.data.cones_below(&s).is_empty() && !m.hi.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// `Σ_n 2^(−ℓ_n)` in closed form.
pub fn order_mass(order: &IntSchedule) -> Q {
    let mut s = zero();
    let hl = order.head.len();
    for n in 0..hl {
        s += pow2(-(order.value(n) as i64));
    }
    s + pow2(-(order.value(hl) as i64)) / (one() - pow2(-(order.a as i64)))
}

/// `T ⊆ S` removing a sparse sequence of order `ℓ_n = 2n + c` with `c` least such that the
/// removed mass is below `eps`.
pub fn empty_interior_closed(ambient: Ambient, eps: &Q) -> Result<SparseClosed> {
    if eps <= &zero() {
        return Err(Error::domain(format!("empty_interior_closed needs eps > 0, got {}", fmt_q(eps))));
    }
    let mut c = 1;
    let order = loop {
        let o = IntSchedule::affine(2, c)?;
        if &order_mass(&o) < eps {
            break o;
        }
        c += 1;
    };
    sparse_closed(ambient, order)
}

pub fn sparse_closed(ambient: Ambient, order: IntSchedule) -> Result<SparseClosed> {
    let data = SparseData::new(ambient, order.clone())?;
    data.ensure(1)?;
    let loss_bound = order_mass(&order);
    Ok(SparseClosed { expr: sparse(data.clone(), Vec::new()), data, order, loss_bound })
}

/// The regular open set `U = ¬[T]` with `T` of order `2n + 2` in the full tree.
#[derive(Clone, Debug)]
pub struct LargeFrontier {
    pub open: Expr,
    pub tree: SparseClosed,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontierReport {
    pub depth: usize,
    pub nodes_checked: usize,
    pub max_local_hi: MeasureInterval,
    pub bound_ok: bool,
    pub measure_u: MeasureInterval,
    pub frontier: MeasureInterval,
}

pub fn large_frontier_regular() -> Result<LargeFrontier> {
    let tree = sparse_closed(Ambient::Full, IntSchedule::affine(2, 2)?)?;
    Ok(LargeFrontier { open: complement(tree.expr.clone()), tree })
}

impl LargeFrontier {
    /// Certify `μ(U|t) ≤ 2/3` for every tree node `t` of length at most `depth`.
    pub fn certify(&self, depth: usize) -> FrontierReport {
        let bound = Q::new(2.into(), 3.into());
        let mut worst = MeasureInterval::exact(zero());
        let mut ok = true;
        let mut count = 0;
        for t in words_up_to(depth) {
            if self.tree.data.cone_above(&t).is_some() {
                continue;
            }
            count += 1;
            let m = measure_interval(&localize(&self.open, &t), CERT_BUDGET);
            if m.hi > bound {
                ok = false;
            }
            if m.hi > worst.hi {
                worst = m;
            }
        }
        let frontier = measure_interval(&self.tree.expr, CERT_BUDGET);
        FrontierReport {
            depth,
            nodes_checked: count,
            max_local_hi: worst,
            bound_ok: ok,
            measure_u: frontier.complement(),
            frontier,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportsReport {
    pub depth: usize,
    pub delta: MeasureInterval,
    pub outer_full_a: bool,
    pub outer_full_b: bool,
    pub inner_a: Vec<String>,
    pub inner_b: Vec<String>,
    pub inner_equal: bool,
}

#[derive(Clone, Debug)]
pub struct Supports {
    pub a: Expr,
    pub b: Expr,
    pub inner_tree: SparseClosed,
    pub frontier: LargeFrontier,
}

/// `A = U` and `B = U ∪ [T′]` where `T′` removes a sparse sequence of order `3n + 2` inside `[T]`.
pub fn supports_counterexample() -> Result<Supports> {
    let frontier = large_frontier_regular()?;
    let amb = match &*frontier.tree.expr {
        SetExpr::Sparse(r) => Ambient::Sparse(r.clone()),
        _ => unreachable!("sparse_closed builds a sparse expression"),
    };
    let inner_tree = sparse_closed(amb, IntSchedule::affine(3, 2)?)?;
    let a = frontier.open.clone();
    let b = union(a.clone(), inner_tree.expr.clone());
    Ok(Supports { a, b, inner_tree, frontier })
}

impl Supports {
    /// `δ(A, B) = μ[T′]` since `[T′] ⊆ [T]` is disjoint from `U`.
    pub fn delta(&self) -> MeasureInterval {
        measure_interval(&self.inner_tree.expr, CERT_BUDGET)
    }

    pub fn report(&self, depth: usize) -> SupportsReport {
        let outer_full = |e: &Expr| {
            words_up_to(depth).all(|s| cylinder_status(e, &s, CERT_BUDGET) != CylinderStatus::AllOut)
        };
        let ia = supports_approx(&self.a, depth);
        let ib = supports_approx(&self.b, depth);
        SupportsReport {
            depth,
            delta: self.delta(),
            outer_full_a: outer_full(&self.a),
            outer_full_b: outer_full(&self.b),
            inner_equal: ia.inner_words == ib.inner_words,
            inner_a: ia.inner,
            inner_b: ib.inner,
        }
    }
}

/// `W = ⋃_(s∈T) ⋃_i s̄⌢i⌢(1−i)⌢O*(μ[T|s])`.
pub fn w_from_tree(t: &Expr) -> Result<Expr> {
    wtree(t.clone())
}

/// Pairs `(t, μ(W|t̄), μ([T]|t))` for all `t` with `lh(t) ≤ depth`.
pub fn w_identity_table(t: &Expr, w: &Expr, depth: usize) -> Result<Vec<(Word, Q, Q)>> {
    let mut out = Vec::new();
    for s in words_up_to(depth) {
        let lhs = exact_measure(&localize(w, &double(&s)))
            .ok_or_else(|| Error::Domain(format!("μ(W|{}) not exact", word_label(&double(&s)))))?;
        let rhs = exact_measure(&localize(t, &s))
            .ok_or_else(|| Error::Domain(format!("μ(T|{}) not exact", word_label(&s))))?;
        out.push((s, lhs, rhs));
    }
    Ok(out)
}

/// The clopen sections `{x : m ≥ n ⟹ μ(e|x↾m) > 1 − 2^(−k−1)}` for `m ≤ m_max`.
pub fn pi03_section_code(e: &Expr, k: u32, n: usize, m_max: usize) -> Result<Vec<ClopenTree>> {
    if !is_exact_class(e) {
        return Err(Error::domain("pi03 codes need an exact-measure expression"));
    }
    let thr = one() - pow2(-(k as i64) - 1);
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m < n {
            out.push(ClopenTree::full());
            continue;
        }
        let mut words = Vec::new();
        for s in words_of_len(m) {
            let mu = exact_measure(&localize(e, &s))
                .ok_or_else(|| Error::Domain(format!("μ(e|{}) not exact", word_label(&s))))?;
            if mu > thr {
                words.push(s);
            }
        }
        out.push(make_clopen(words));
    }
    Ok(out)
}

/// Finite shadow of `∀k ∃n ∀m ≥ n x↾m ∈ C(k, m)`: `k ≤ k_max`, `n ≤ m_max/2`, `m ≤ m_max`.
pub fn pi03_member(e: &Expr, x: &Lasso, k_max: u32, m_max: usize) -> Result<bool> {
    let mut mus = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let s = x.take(m);
        mus.push(exact_measure(&localize(e, &s)).ok_or_else(|| Error::domain("pi03 codes need exact measures"))?);
    }
    Ok((0..=k_max).all(|k| {
        let thr = one() - pow2(-(k as i64) - 1);
        (0..=m_max / 2).any(|n| mus[n..].iter().all(|mu| mu > &thr))
    }))
}

/// `D ∪ t⌢B` approximating `target` within `eps`.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub expr: Expr,
    pub d: ClopenTree,
    pub t: Word,
    pub depth: usize,
    /// `μ(target △ D)`.
    pub delta_d: Q,
}

/// Depth ceiling for the refinement of `D`.
const APPROX_DEPTH: usize = 20;

pub fn approximate_in_degree(target: &Expr, eps: &Q, b: &Expr) -> Result<Approximation> {
    if eps <= &zero() {
        return Err(Error::domain("approximation needs eps > 0"));
    }
    if !is_exact_class(target) {
        return Err(Error::domain("approximation target must have exact measures"));
    }
    let quarter = eps * pow2(-2);
    let mut l = 0usize;
    while pow2(-(l as i64)) >= quarter {
        l += 1;
    }
    for d in 0..=APPROX_DEPTH {
        let mut words = Vec::new();
        let mut delta = zero();
        for s in words_of_len(d) {
            let mu = exact_measure(&localize(target, &s))
                .ok_or_else(|| Error::Domain(format!("μ(target|{}) not exact", word_label(&s))))?;
            if mu > half() {
                delta += one() - &mu;
                words.push(s);
            } else {
                delta += mu;
            }
        }
        let delta = delta * pow2(-(d as i64));
        if delta >= quarter {
            continue;
        }
        let full_layer = words.len() == 1usize << d;
        let (dset, t) = if full_layer {
            let t = repeat(1, l.max(d));
            (make_clopen(words).difference(&ClopenTree::cylinder(&t)), t)
        } else {
            let missing = words_of_len(d).find(|s| !words.contains(s)).expect("layer not full");
            let mut t = missing;
            if t.len() < l {
                t.resize(l, 0);
            }
            (make_clopen(words), t)
        };
        let delta_d = crate::measure::tree::malg_distance(target, &clopen(dset.clone()), &pow2(-30))
            .map(|m| m.hi)
            .unwrap_or(&delta + pow2(-(t.len() as i64)));
        let expr = dext(dset.clone(), t.clone(), b.clone())?;
        return Ok(Approximation { expr, d: dset, t, depth: d, delta_d });
    }
    Err(Error::Budget(format!("no clopen approximation within {} up to depth {APPROX_DEPTH}", fmt_q(eps))))
}
