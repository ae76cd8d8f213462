//! Sparse sequences of nodes and the closed sets obtained by removing their cones.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num::Zero;
use parking_lot::Mutex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::interval::measure_interval;
use crate::rational::{one, pow2, zero, MeasureInterval, Q};
use crate::schedule::IntSchedule;
use crate::sets::expr::*;
use crate::sets::localize::localize;
use crate::word::{incompatible, is_prefix, word_label, words_up_to, Word};

/// Where the removed cones live.
#[derive(Clone, Debug)]
pub enum Ambient {
    Full,
    /// The branches of another sparse construction.
    Sparse(SparseRef),
    /// A closed set given by an expression with computable measures.
    Expr(Expr),
}

#[derive(Default, Debug)]
struct State {
    nodes: Vec<Word>,
    pivots: Vec<Word>,
    by_lex: BTreeMap<Word, usize>,
    search_len: usize,
    failure: Option<String>,
}

/// Lazily generated sparse sequence of order `ℓ` inside an ambient tree.
#[derive(Debug)]
pub struct SparseData {
    ambient: Ambient,
    order: IntSchedule,
    probe_cap: AtomicUsize,
    state: Mutex<State>,
}

/// Budget used for ambient node tests.
const NODE_BUDGET: u32 = 24;
/// Hard ceiling on generated nodes.
const NODE_CAP: usize = 1 << 16;

impl SparseData {
    pub fn new(ambient: Ambient, order: IntSchedule) -> Result<Arc<Self>> {
        for w in order.head.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::domain("sparse order must be strictly increasing"));
            }
        }
        if order.a == 0 {
            return Err(Error::domain("sparse order tail must grow (a >= 1)"));
        }
        if let Some(&last) = order.head.last() {
            if order.value(order.head.len()) <= last {
                return Err(Error::domain("sparse order must be strictly increasing"));
            }
        }
        Ok(Arc::new(SparseData { ambient, order, probe_cap: AtomicUsize::new(1024), state: Mutex::new(State::default()) }))
    }

    pub fn order(&self) -> &IntSchedule {
        &self.order
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Number of nodes a measure query may generate while looking for a cone below its node.
    pub fn set_probe_cap(&self, cap: usize) {
        self.probe_cap.store(cap.min(NODE_CAP), Ordering::Relaxed);
    }

    pub fn probe_cap(&self) -> usize {
        self.probe_cap.load(Ordering::Relaxed)
    }

    pub fn generated(&self) -> usize {
        self.state.lock().nodes.len()
    }

    pub fn nodes(&self, count: usize) -> Result<(Vec<Word>, Vec<Word>)> {
        self.ensure(count)?;
        let st = self.state.lock();
        Ok((st.nodes[..count].to_vec(), st.pivots[..count].to_vec()))
    }

    /// Measure of the ambient branches through `w`.
    pub fn ambient_measure(&self, w: &[u8], b: u32) -> MeasureInterval {
        match &self.ambient {
            Ambient::Full => MeasureInterval::exact(one()),
            Ambient::Sparse(r) => {
                let mut at = r.at.clone();
                at.extend_from_slice(w);
                r.data.measure_at(&at, b)
            }
            Ambient::Expr(e) => measure_interval(&localize(e, w), b),
        }
    }

    fn ambient_node(&self, w: &[u8]) -> bool {
        match &self.ambient {
            Ambient::Full => true,
            _ => self.ambient_measure(w, NODE_BUDGET).lo > zero(),
        }
    }

    fn ambient_dead(&self, w: &[u8]) -> bool {
        match &self.ambient {
            Ambient::Full => false,
            Ambient::Sparse(r) => {
                let mut at = r.at.clone();
                at.extend_from_slice(w);
                r.data.cone_above(&at).is_some() || r.data.ambient_dead(&at)
            }
            Ambient::Expr(e) => is_empty(&localize(e, w)),
        }
    }

    /// Generate nodes until at least `count` exist.
    pub fn ensure(&self, count: usize) -> Result<()> {
        let mut st = self.state.lock();
        while st.nodes.len() < count {
            if let Some(f) = &st.failure {
                return Err(Error::Domain(f.clone()));
            }
            if st.nodes.len() >= NODE_CAP {
                return Err(Error::Budget(format!("sparse sequence exceeds {NODE_CAP} nodes")));
            }
            if let Err(e) = self.step(&mut st) {
                st.failure = Some(e.to_string());
                return Err(e);
            }
        }
        Ok(())
    }

    /// Generate nodes until every index `n` with `ℓ_n ≤ len` exists.
    pub fn ensure_order_len(&self, len: usize) -> usize {
        let mut n = self.generated();
        while (self.order.value(n) as usize) <= len && n < NODE_CAP {
            n += 1;
        }
        let _ = self.ensure(n);
        self.generated().min(n)
    }

    fn step(&self, st: &mut State) -> Result<()> {
        let n = st.nodes.len();
        let u = loop {
            if st.search_len > 4096 {
                return Err(Error::Budget("no free pivot below length 4096".into()));
            }
            let l = st.search_len;
            if let Some(u) = self.first_free(st, &mut Vec::new(), l) {
                break u;
            }
            st.search_len += 1;
        };
        let prev = st.nodes.last().map(|t| t.len() + 1).unwrap_or(0);
        let len = (self.order.value(n) as usize).max(prev).max(u.len() + 1);
        let t = self.extend_path(&u, len)?;
        st.by_lex.insert(t.clone(), n);
        st.nodes.push(t);
        st.pivots.push(u);
        Ok(())
    }

    /// Lexicographically least ambient node of length `len` below `p` incompatible with all cones.
    fn first_free(&self, st: &State, p: &mut Word, len: usize) -> Option<Word> {
        if cone_above_in(&st.by_lex, p).is_some() || !self.ambient_node(p) {
            return None;
        }
        let has_below = st.by_lex.range(p.clone()..).next().is_some_and(|(k, _)| is_prefix(p, k));
        if !has_below {
            if matches!(self.ambient, Ambient::Full) {
                let mut w = p.clone();
                w.resize(len, 0);
                return Some(w);
            }
            if p.len() == len {
                return Some(p.clone());
            }
        } else if p.len() == len {
            return None;
        }
        for b in [0u8, 1] {
            p.push(b);
            let r = self.first_free(st, p, len);
            p.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }

    /// Lexicographically least ambient path of length `len` through `u` that leaves a branching witness.
    fn extend_path(&self, u: &[u8], len: usize) -> Result<Word> {
        if matches!(self.ambient, Ambient::Full) {
            let mut t = u.to_vec();
            t.resize(len, 0);
            return Ok(t);
        }
        let mut t = u.to_vec();
        let mut witness = false;
        while t.len() < len {
            if self.ambient_clear(&t, len) {
                witness = true;
                t.resize(len, 0);
                break;
            }
            let mut ok = [false; 2];
            for b in 0..2u8 {
                t.push(b);
                ok[b as usize] = !self.ambient_dead(&t) && self.ambient_node(&t);
                t.pop();
            }
            if ok[0] && ok[1] {
                witness = true;
            }
            match (ok[0], ok[1]) {
                (true, _) => t.push(0),
                (false, true) => t.push(1),
                _ => return Err(Error::Domain(format!("ambient tree has no certified extension at {}", word_label(&t)))),
            }
        }
        if !witness {
            return Err(Error::Domain(format!("ambient tree is not perfect below {}", word_label(u))));
        }
        Ok(t)
    }

    /// Whether every extension of `w` up to length `len` is an ambient node.
    fn ambient_clear(&self, w: &[u8], len: usize) -> bool {
        match &self.ambient {
            Ambient::Full => true,
            Ambient::Sparse(r) => {
                let mut at = r.at.clone();
                at.extend_from_slice(w);
                r.data.clear_below(&at, r.at.len() + len)
            }
            Ambient::Expr(_) => false,
        }
    }

    /// No cone of length at most `len` meets `N_at`, here or in the ambient tree.
    fn clear_below(&self, at: &[u8], len: usize) -> bool {
        self.ensure_order_len(len);
        if self.cone_above(at).is_some() {
            return false;
        }
        let st = self.state.lock();
        let below = st.by_lex.range(at.to_vec()..).take_while(|(k, _)| is_prefix(at, k)).any(|(k, _)| k.len() <= len);
        drop(st);
        !below && self.ambient_clear(at, len)
    }

    pub fn cone_above(&self, at: &[u8]) -> Option<usize> {
        self.ensure_order_len(at.len());
        cone_above_in(&self.state.lock().by_lex, at)
    }

    /// Whether `at⌢w` lies in a removed cone, here or in the ambient tree.
    pub fn ambient_contains_cone(&self, at: &[u8], w: &[u8]) -> bool {
        let mut full = at.to_vec();
        full.extend_from_slice(w);
        self.cone_above(&full).is_some() || self.ambient_dead(&full)
    }

    /// Generated cones strictly extending `at`, with their indices.
    pub fn cones_below(&self, at: &[u8]) -> Vec<(usize, Word)> {
        let st = self.state.lock();
        st.by_lex
            .range(at.to_vec()..)
            .take_while(|(k, _)| is_prefix(at, k))
            .filter(|(k, _)| k.len() > at.len())
            .map(|(k, &i)| (i, k.clone()))
            .collect()
    }

    pub fn has_cone_below(&self, at: &[u8]) -> bool {
        let st = self.state.lock();
        let r = st.by_lex.range(at.to_vec()..).next().is_some_and(|(k, _)| is_prefix(at, k) && k.len() > at.len());
        r
    }

    /// Lengths of the generated cones strictly extending `at`.
    pub fn cone_lengths_below(&self, at: &[u8]) -> Vec<usize> {
        let st = self.state.lock();
        st.by_lex
            .range(at.to_vec()..)
            .take_while(|(k, _)| is_prefix(at, k))
            .filter(|(k, _)| k.len() > at.len())
            .map(|(k, _)| k.len())
            .collect()
    }

    /// The true measure at every surviving node lies strictly below the upper end of
    /// `measure_at`: infinitely many cones lie below each node and only finitely many are
    /// ever generated.
    pub fn strict_upper(&self) -> bool {
        match &self.ambient {
            Ambient::Full => true,
            Ambient::Sparse(r) => r.data.strict_upper(),
            Ambient::Expr(_) => false,
        }
    }

    /// Tail bound `Σ_{n ≥ from} 2^(base − ℓ_n)`.
    fn tail(&self, from: usize, base: usize) -> Q {
        let mut s = zero();
        let hl = self.order.head.len();
        let mut n = from;
        while n < hl {
            s += pow2(base as i64 - self.order.value(n) as i64);
            n += 1;
        }
        let a = self.order.a as i64;
        s + pow2(base as i64 - self.order.value(n) as i64) / (one() - pow2(-a))
    }

    /// Enclosure of `μ([T]|at)`.
    pub fn measure_at(&self, at: &[u8], b: u32) -> MeasureInterval {
        if self.cone_above(at).is_some() {
            return MeasureInterval::exact(zero());
        }
        let amb = self.ambient_measure(at, b);
        if amb.hi.is_zero() {
            return amb;
        }
        let n = self.ensure_order_len(at.len() + b as usize + 2);
        if !self.has_cone_below(at) {
            self.probe(at);
        }
        let generated = self.generated().max(n);
        let mut loss_lo = zero();
        let mut loss_hi = zero();
        if matches!(self.ambient, Ambient::Full) {
            let mut by_len: BTreeMap<usize, u64> = BTreeMap::new();
            for l in self.cone_lengths_below(at) {
                *by_len.entry(l).or_default() += 1;
            }
            for (l, k) in by_len {
                loss_lo += pow2(at.len() as i64 - l as i64) * Q::from_integer(k.into());
            }
            loss_hi = loss_lo.clone();
        } else {
            for (_, c) in self.cones_below(at) {
                let w = pow2(at.len() as i64 - c.len() as i64);
                let m = self.ambient_measure(&c, b);
                loss_lo += &w * &m.lo;
                loss_hi += &w * &m.hi;
            }
        }
        let tail = self.tail(generated, at.len());
        MeasureInterval::new(&amb.lo - loss_hi - tail, &amb.hi - loss_lo)
    }

    /// Extend the sequence until a cone below `at` appears, up to the probe cap.
    fn probe(&self, at: &[u8]) -> bool {
        let mut count = self.generated();
        while count < self.probe_cap() {
            count += 1;
            if self.ensure(count).is_err() {
                return false;
            }
            let st = self.state.lock();
            if is_prefix(at, &st.nodes[count - 1]) {
                return true;
            }
        }
        false
    }

    /// Whether `T′ = self` at node `at` lies inside the branches of `t`.
    pub fn inside(&self, at: &[u8], t: &SparseRef) -> bool {
        match &self.ambient {
            Ambient::Sparse(r) => {
                let mut full_at = r.at.clone();
                full_at.extend_from_slice(at);
                Arc::ptr_eq(&r.data, &t.data) && full_at == t.at
            }
            _ => false,
        }
    }
}

fn cone_above_in(by_lex: &BTreeMap<Word, usize>, at: &[u8]) -> Option<usize> {
    let (k, &i) = by_lex.range(..=at.to_vec()).next_back()?;
    is_prefix(k, at).then_some(i)
}

pub fn localize_ref(s: &SparseRef, b: u8) -> Expr {
    let mut at = s.at.clone();
    at.push(b);
    if s.data.cone_above(&at).is_some() || s.data.ambient_dead(&at) {
        return empty();
    }
    sparse(s.data.clone(), at)
}

/// A sparse sequence with its verification record.
#[derive(Clone, Debug, Serialize)]
pub struct SparseSequence {
    pub nodes: Vec<String>,
    pub pivots: Vec<String>,
    pub order: IntSchedule,
    #[serde(skip)]
    pub raw_nodes: Vec<Word>,
    #[serde(skip)]
    pub raw_pivots: Vec<Word>,
}

pub fn sparse_sequence(ambient: Ambient, order: IntSchedule, count: usize) -> Result<(Arc<SparseData>, SparseSequence)> {
    let data = SparseData::new(ambient, order.clone())?;
    let (nodes, pivots) = data.nodes(count)?;
    let seq = SparseSequence {
        nodes: nodes.iter().map(|w| word_label(w)).collect(),
        pivots: pivots.iter().map(|w| word_label(w)).collect(),
        order,
        raw_nodes: nodes,
        raw_pivots: pivots,
    };
    Ok((data, seq))
}

/// Outcome of checking the defining conditions on a finite stretch of a sparse sequence.
#[derive(Clone, Debug, Serialize, Default)]
pub struct SparseCheck {
    pub density: bool,
    pub density_horizon: usize,
    pub pairwise_incompatible: bool,
    pub increasing_lengths: bool,
    pub gap_fraction_ok: bool,
    pub order_respected: bool,
    #[serde(serialize_with = "crate::rational::ser_q")]
    pub removed_mass: Q,
    #[serde(serialize_with = "crate::rational::ser_q")]
    pub order_mass: Q,
}

impl SparseCheck {
    pub fn all_ok(&self) -> bool {
        self.density && self.pairwise_incompatible && self.increasing_lengths && self.gap_fraction_ok && self.order_respected
    }
}

/// Check the five conditions over the full tree. Density is checked for every word `s`
/// that precedes the last pivot in ⊴ order (the range the finite stretch is responsible for),
/// and additionally for all words up to `density_len` when that range covers them.
pub fn check_sparse_full(seq: &SparseSequence, density_len: usize) -> SparseCheck {
    let t = &seq.raw_nodes;
    let u = &seq.raw_pivots;
    let mut c = SparseCheck::default();
    c.pairwise_incompatible = (0..t.len()).all(|i| (i + 1..t.len()).all(|j| incompatible(&t[i], &t[j])));
    c.increasing_lengths = t.windows(2).all(|w| w[0].len() < w[1].len());
    let gaps = t.windows(2).filter(|w| w[1].len() > w[0].len() + 1).count();
    c.gap_fraction_ok = t.len() < 2 || 2 * gaps >= t.len() - 1;
    c.order_respected = t.iter().enumerate().all(|(n, w)| seq.order.value(n) as usize <= w.len());
    let last = u.last().cloned().unwrap_or_default();
    let mut density = true;
    let mut horizon = 0;
    for s in words_up_to(density_len) {
        if crate::word::tri_compare(&s, &last) == std::cmp::Ordering::Greater {
            break;
        }
        horizon = s.len();
        if !t.iter().any(|tn| is_prefix(&s, tn) || is_prefix(tn, &s)) {
            density = false;
        }
    }
    c.density = density;
    c.density_horizon = horizon;
    c.removed_mass = t.iter().fold(zero(), |acc, w| acc + pow2(-(w.len() as i64)));
    c.order_mass = (0..t.len()).fold(zero(), |acc, n| acc + pow2(-(seq.order.value(n) as i64)));
    c
}
