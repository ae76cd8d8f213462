//! The set-expression algebra and its smart constructors.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, one, Q};
use crate::reductions::sparse::SparseData;
use crate::schedule::{k_of, IntSchedule, RateSchedule};
use crate::sets::clopen::{make_clopen, ClopenTree};
use crate::word::{cat, is_prefix, repeat, word_label, Lasso, Word};

pub type Expr = Arc<SetExpr>;

/// A sequence of sets: a finite head, then a constant or periodic tail.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SetFamily {
    pub head: Vec<Expr>,
    pub tail: FamilyTail,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FamilyTail {
    Const(Expr),
    Periodic(Vec<Expr>),
}

impl SetFamily {
    pub fn constant(e: Expr) -> Self {
        SetFamily { head: Vec::new(), tail: FamilyTail::Const(e) }
    }

    pub fn new(head: Vec<Expr>, tail: FamilyTail) -> Result<Self> {
        if let FamilyTail::Periodic(c) = &tail {
            if c.is_empty() {
                return Err(Error::domain("periodic family tail must be nonempty"));
            }
        }
        Ok(SetFamily { head, tail })
    }

    pub fn get(&self, n: usize) -> Expr {
        if n < self.head.len() {
            return self.head[n].clone();
        }
        match &self.tail {
            FamilyTail::Const(e) => e.clone(),
            FamilyTail::Periodic(c) => c[(n - self.head.len()) % c.len()].clone(),
        }
    }

    pub fn shifted(&self) -> Self {
        if !self.head.is_empty() {
            return SetFamily { head: self.head[1..].to_vec(), tail: self.tail.clone() };
        }
        match &self.tail {
            FamilyTail::Const(_) => self.clone(),
            FamilyTail::Periodic(c) => {
                let mut c = c.clone();
                c.rotate_left(1);
                SetFamily { head: Vec::new(), tail: FamilyTail::Periodic(c) }
            }
        }
    }

    pub fn members(&self) -> Vec<Expr> {
        let mut v = self.head.clone();
        match &self.tail {
            FamilyTail::Const(e) => v.push(e.clone()),
            FamilyTail::Periodic(c) => v.extend(c.iter().cloned()),
        }
        v
    }

    /// Index from which the family is periodic and its period.
    pub fn period(&self) -> (usize, usize) {
        match &self.tail {
            FamilyTail::Const(_) => (self.head.len(), 1),
            FamilyTail::Periodic(c) => (self.head.len(), c.len()),
        }
    }
}

/// What a Layer attaches at each exit node.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Cont {
    /// A fixed set `B` (Plus when `B` is empty, Sum otherwise).
    Set(Expr),
    /// `1⌢Plus(A)` again, as in Natural.
    Nat { a0: Expr, sched0: RateSchedule },
    /// `P_{h(n)}(Plus(A, r_{n+1}))` with the next flat level.
    Flat { a0: Expr, sched0: RateSchedule, level: usize },
}

/// The common shape of Plus, Sum, Natural and Flat: the doubled copy of `a`, the clopen
/// `O(max{r, r_lh(s)·μ(a|s)})` at each break `s̄⌢η`, and `cont` attached at the exit nodes.
/// `filled` selects whether the `O` region belongs to the set.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Layer {
    pub a: Expr,
    pub r: Q,
    pub sched: RateSchedule,
    pub filled: bool,
    pub cont: Cont,
}

/// A node of the closed set obtained by removing the cones of a sparse sequence.
#[derive(Clone, Debug)]
pub struct SparseRef {
    pub data: Arc<SparseData>,
    pub at: Word,
}

impl PartialEq for SparseRef {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.data, &o.data) && self.at == o.at
    }
}

impl Eq for SparseRef {}

impl Hash for SparseRef {
    fn hash<H: Hasher>(&self, h: &mut H) {
        (Arc::as_ptr(&self.data) as usize).hash(h);
        self.at.hash(h);
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SetExpr {
    Empty,
    Full,
    Clopen(ClopenTree),
    Point(Lasso),
    Concat(Word, Expr),
    Complement(Expr),
    Union(Expr, Expr),
    Intersect(Expr, Expr),
    Oplus(Expr, Expr),
    DisjointExtend(ClopenTree, Word, Expr),
    O(Q),
    OStar(Q),
    Pad(usize, Expr),
    Double(Expr),
    Rake { pole: bool, f: IntSchedule, fam: SetFamily },
    Layer(Layer),
    WTree(Expr),
    Sparse(SparseRef),
}

pub fn empty() -> Expr {
    Arc::new(SetExpr::Empty)
}

pub fn full() -> Expr {
    Arc::new(SetExpr::Full)
}

pub fn is_empty(e: &Expr) -> bool {
    matches!(**e, SetExpr::Empty)
}

pub fn is_full(e: &Expr) -> bool {
    matches!(**e, SetExpr::Full)
}

pub fn clopen(c: ClopenTree) -> Expr {
    if c.is_empty() {
        empty()
    } else if c.is_full() {
        full()
    } else {
        Arc::new(SetExpr::Clopen(c))
    }
}

pub fn clopen_words(words: impl IntoIterator<Item = Word>) -> Expr {
    clopen(make_clopen(words))
}

/// The clopen tree of an expression that is syntactically clopen.
pub fn as_clopen(e: &Expr) -> Option<ClopenTree> {
    match &**e {
        SetExpr::Empty => Some(ClopenTree::empty()),
        SetExpr::Full => Some(ClopenTree::full()),
        SetExpr::Clopen(c) => Some(c.clone()),
        SetExpr::O(r) => Some(o_tree(r)),
        _ => None,
    }
}

pub fn o_tree(r: &Q) -> ClopenTree {
    let k = k_of(r).expect("O(r) built with validated r") as usize;
    let mut u = repeat(0, k - 1);
    u.push(1);
    ClopenTree::cylinder(&u).complement()
}

pub fn point(x: Lasso) -> Expr {
    Arc::new(SetExpr::Point(x))
}

pub fn concat(w: &[u8], a: Expr) -> Expr {
    if w.is_empty() {
        return a;
    }
    if let Some(c) = as_clopen(&a) {
        return clopen(c.prepend(w));
    }
    match &*a {
        SetExpr::Concat(v, inner) => Arc::new(SetExpr::Concat(cat(w, v), inner.clone())),
        SetExpr::Point(x) => point(x.prepend(w)),
        _ => Arc::new(SetExpr::Concat(w.to_vec(), a)),
    }
}

pub fn complement(a: Expr) -> Expr {
    if let Some(c) = as_clopen(&a) {
        if !matches!(*a, SetExpr::O(_)) {
            return clopen(c.complement());
        }
    }
    match &*a {
        SetExpr::Complement(inner) => inner.clone(),
        _ => Arc::new(SetExpr::Complement(a)),
    }
}

pub fn union(a: Expr, b: Expr) -> Expr {
    if is_empty(&a) || is_full(&b) {
        return b;
    }
    if is_empty(&b) || is_full(&a) || a == b {
        return a;
    }
    if let (Some(x), Some(y)) = (as_clopen(&a), as_clopen(&b)) {
        return clopen(x.union(&y));
    }
    Arc::new(SetExpr::Union(a, b))
}

pub fn intersect(a: Expr, b: Expr) -> Expr {
    if is_full(&a) || is_empty(&b) {
        return b;
    }
    if is_full(&b) || is_empty(&a) || a == b {
        return a;
    }
    if let (Some(x), Some(y)) = (as_clopen(&a), as_clopen(&b)) {
        return clopen(x.intersect(&y));
    }
    Arc::new(SetExpr::Intersect(a, b))
}

pub fn oplus(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (as_clopen(&a), as_clopen(&b)) {
        return clopen(x.prepend(&[0]).union(&y.prepend(&[1])));
    }
    Arc::new(SetExpr::Oplus(a, b))
}

/// `D ∪ t⌢B`, requiring `N_t ∩ D = ∅`.
pub fn dext(d: ClopenTree, t: Word, b: Expr) -> Result<Expr> {
    if !d.avoids(&t) {
        return Err(Error::Invariant(format!("dext: N_{} meets the clopen {}", word_label(&t), d)));
    }
    Ok(dext_unchecked(d, t, b))
}

pub(crate) fn dext_unchecked(d: ClopenTree, t: Word, b: Expr) -> Expr {
    if d.is_empty() {
        return concat(&t, b);
    }
    if let Some(c) = as_clopen(&b) {
        return clopen(d.union(&c.prepend(&t)));
    }
    Arc::new(SetExpr::DisjointExtend(d, t, b))
}

pub fn make_o(r: Q) -> Result<Expr> {
    k_of(&r)?;
    Ok(Arc::new(SetExpr::O(r)))
}

pub fn make_ostar(r: Q) -> Result<Expr> {
    if !r.is_positive() || r >= one() {
        return Err(Error::domain(format!("Ostar needs 0 < r < 1, got {}", fmt_q(&r))));
    }
    Ok(Arc::new(SetExpr::OStar(r)))
}

/// `O*(r)` extended to the closed interval: `O*(0) = ∅` and `O*(1)` is the full space.
pub fn ostar_closed(r: Q) -> Expr {
    if r.is_zero() || r.is_negative() {
        empty()
    } else if r >= one() {
        full()
    } else {
        Arc::new(SetExpr::OStar(r))
    }
}

/// `P_n(A) = 1^n⌢A ∪ (full ∖ (N_{0^n} ∪ N_{1^n}))`.
pub fn pad(n: usize, a: Expr) -> Result<Expr> {
    if n == 0 {
        return Err(Error::domain("padding length must be >= 1"));
    }
    Ok(pad_unchecked(n, a))
}

pub(crate) fn pad_unchecked(n: usize, a: Expr) -> Expr {
    if let Some(c) = as_clopen(&a) {
        let ones = repeat(1, n);
        let zeros = repeat(0, n);
        let outside = make_clopen([zeros, ones.clone()]).complement();
        return clopen(outside.union(&c.prepend(&ones)));
    }
    Arc::new(SetExpr::Pad(n, a))
}

pub fn double(a: Expr) -> Expr {
    if is_empty(&a) {
        return a;
    }
    Arc::new(SetExpr::Double(a))
}

pub fn rake(pole: bool, f: IntSchedule, fam: SetFamily) -> Result<Expr> {
    IntSchedule::new(f.head.clone(), f.a, f.b)?;
    Ok(Arc::new(SetExpr::Rake { pole, f, fam }))
}

/// Sets whose measure and localized measures are exact rationals by closed forms.
pub fn is_exact_class(e: &Expr) -> bool {
    match &**e {
        SetExpr::Empty | SetExpr::Full | SetExpr::Clopen(_) | SetExpr::Point(_) => true,
        SetExpr::O(_) | SetExpr::OStar(_) => true,
        SetExpr::Concat(_, a) | SetExpr::Complement(a) | SetExpr::Pad(_, a) | SetExpr::Double(a) => {
            is_exact_class(a)
        }
        SetExpr::DisjointExtend(_, _, a) => is_exact_class(a),
        SetExpr::Oplus(a, b) => is_exact_class(a) && is_exact_class(b),
        SetExpr::Rake { fam, .. } => fam.members().iter().all(is_exact_class),
        _ => false,
    }
}

fn check_a_slot(a: &Expr, who: &str) -> Result<()> {
    if is_exact_class(a) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{who}: the A-slot must have exactly computable localized measures (clopen, O, Ostar, \
             padding, doubling, rakes and their boolean-free combinations); got {}",
            serialize(a)
        )))
    }
}

fn check_r(r: &Q) -> Result<()> {
    if r.is_negative() || r >= &one() {
        return Err(Error::domain(format!("threshold r must satisfy 0 <= r < 1, got {}", fmt_q(r))));
    }
    Ok(())
}

pub fn layer(l: Layer) -> Expr {
    Arc::new(SetExpr::Layer(l))
}

pub fn plus(a: Expr, r: Q, sched: RateSchedule) -> Result<Expr> {
    check_a_slot(&a, "plus")?;
    check_r(&r)?;
    Ok(layer(Layer { a, r, sched, filled: true, cont: Cont::Set(empty()) }))
}

pub fn sum(b: Expr, a: Expr, r: Q, sched: RateSchedule) -> Result<Expr> {
    check_a_slot(&a, "sum")?;
    check_r(&r)?;
    Ok(layer(Layer { a, r, sched, filled: true, cont: Cont::Set(b) }))
}

pub fn natural(a: Expr, sched: RateSchedule) -> Result<Expr> {
    check_a_slot(&a, "nat")?;
    Ok(layer(Layer {
        a: a.clone(),
        r: Q::zero(),
        sched: sched.clone(),
        filled: false,
        cont: Cont::Nat { a0: a, sched0: sched },
    }))
}

pub fn flat(a: Expr, sched: RateSchedule) -> Result<Expr> {
    check_a_slot(&a, "flat")?;
    Ok(layer(Layer {
        a: a.clone(),
        r: sched.value(1),
        sched: sched.clone(),
        filled: false,
        cont: Cont::Flat { a0: a, sched0: sched, level: 1 },
    }))
}

/// `h(i) = min k (1 − 2^(−k+1) ≥ r_i)`.
pub fn flat_h(sched: &RateSchedule, i: usize) -> usize {
    k_of(&sched.value(i)).expect("schedule values lie in (0,1)") as usize + 1
}

impl Cont {
    /// The set attached at an exit node.
    pub fn expr(&self) -> Expr {
        match self {
            Cont::Set(b) => b.clone(),
            Cont::Nat { a0, sched0 } => oplus(
                empty(),
                layer(Layer {
                    a: a0.clone(),
                    r: Q::zero(),
                    sched: sched0.clone(),
                    filled: true,
                    cont: self.clone(),
                }),
            ),
            Cont::Flat { a0, sched0, level } => pad_unchecked(
                flat_h(sched0, *level),
                layer(Layer {
                    a: a0.clone(),
                    r: sched0.value(level + 1),
                    sched: sched0.clone(),
                    filled: true,
                    cont: Cont::Flat { a0: a0.clone(), sched0: sched0.clone(), level: level + 1 },
                }),
            ),
        }
    }
}

pub fn wtree(t: Expr) -> Result<Expr> {
    if crate::measure::exact::exact_measure(&t).is_none() {
        return Err(Error::Domain(format!("wfromtree needs a tree with exact measures, got {}", serialize(&t))));
    }
    Ok(Arc::new(SetExpr::WTree(t)))
}

pub fn sparse(data: Arc<SparseData>, at: Word) -> Expr {
    Arc::new(SetExpr::Sparse(SparseRef { data, at }))
}

/// Canonical DSL text. Forms produced internally by localization that have no surface
/// syntax are rendered inside angle brackets and do not parse back.
pub fn serialize(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_sched(sched: &RateSchedule, out: &mut String) {
    if sched.is_default() && sched.shift() == 0 {
        return;
    }
    out.push_str("; ");
    out.push_str(&sched.describe());
    if sched.shift() > 0 {
        out.push_str(&format!("@{}", sched.shift()));
    }
}

fn write_family(fam: &SetFamily, out: &mut String) {
    let mut parts: Vec<String> = fam.head.iter().map(serialize).collect();
    match &fam.tail {
        FamilyTail::Const(e) => {
            parts.push(serialize(e));
            out.push_str(&parts.join(", "));
        }
        FamilyTail::Periodic(c) => {
            let cyc: Vec<String> = c.iter().map(serialize).collect();
            if parts.is_empty() {
                out.push_str(&cyc.join(", "));
                out.push_str("; cycle");
            } else {
                out.push_str(&parts.join(", "));
                out.push_str("; cycle ");
                out.push_str(&cyc.join(", "));
            }
        }
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match &**e {
        SetExpr::Empty => out.push_str("empty"),
        SetExpr::Full => out.push_str("full"),
        SetExpr::Clopen(c) => {
            let parts: Vec<String> = c.terminals().iter().map(|t| word_label(t)).collect();
            out.push_str(&format!("clopen{{{}}}", parts.join(",")));
        }
        SetExpr::Point(x) => out.push_str(&format!("point({x})")),
        SetExpr::Concat(w, a) => out.push_str(&format!("cat({}, {})", word_label(w), serialize(a))),
        SetExpr::Complement(a) => out.push_str(&format!("compl {}", serialize(a))),
        SetExpr::Union(a, b) => out.push_str(&format!("({} | {})", serialize(a), serialize(b))),
        SetExpr::Intersect(a, b) => out.push_str(&format!("({} & {})", serialize(a), serialize(b))),
        SetExpr::Oplus(a, b) => out.push_str(&format!("oplus({}, {})", serialize(a), serialize(b))),
        SetExpr::DisjointExtend(d, t, b) => {
            let parts: Vec<String> = d.terminals().iter().map(|t| word_label(t)).collect();
            out.push_str(&format!("dext(clopen{{{}}}, {}, {})", parts.join(","), word_label(t), serialize(b)))
        }
        SetExpr::O(r) => out.push_str(&format!("O({})", fmt_q(r))),
        SetExpr::OStar(r) => out.push_str(&format!("Ostar({})", fmt_q(r))),
        SetExpr::Pad(n, a) => out.push_str(&format!("pad({n}, {})", serialize(a))),
        SetExpr::Double(a) => out.push_str(&format!("dbl {}", serialize(a))),
        SetExpr::Rake { pole, f, fam } => {
            out.push_str(if *pole { "rakep(" } else { "rake(" });
            out.push_str(&f.describe());
            out.push_str("; ");
            write_family(fam, out);
            out.push(')');
        }
        SetExpr::Layer(l) => write_layer(l, out),
        SetExpr::WTree(t) => out.push_str(&format!("wtree({})", serialize(t))),
        SetExpr::Sparse(s) => out.push_str(&format!(
            "<sparse {} nodes at {}>",
            s.data.generated(),
            word_label(&s.at)
        )),
    }
}

fn write_layer(l: &Layer, out: &mut String) {
    match &l.cont {
        Cont::Set(b) if l.filled => {
            if is_empty(b) {
                out.push_str(&format!("plus({}, {}", serialize(&l.a), fmt_q(&l.r)));
            } else {
                out.push_str(&format!("sum({}, {}, {}", serialize(b), serialize(&l.a), fmt_q(&l.r)));
            }
            write_sched(&l.sched, out);
            out.push(')');
            return;
        }
        Cont::Nat { a0, sched0 } if !l.filled && &l.a == a0 && &l.sched == sched0 && l.r.is_zero() => {
            out.push_str(&format!("nat({}", serialize(&l.a)));
            write_sched(&l.sched, out);
            out.push(')');
            return;
        }
        Cont::Flat { a0, sched0, level: 1 }
            if !l.filled && &l.a == a0 && &l.sched == sched0 && l.r == sched0.value(1) =>
        {
            out.push_str(&format!("flat({}", serialize(&l.a)));
            write_sched(&l.sched, out);
            out.push(')');
            return;
        }
        _ => {}
    }
    let kind = match &l.cont {
        Cont::Set(_) => "set".to_string(),
        Cont::Nat { .. } => "nat".to_string(),
        Cont::Flat { level, .. } => format!("flat level {level}"),
    };
    out.push_str(&format!(
        "<layer {} a={} r={} shift={} filled={}>",
        kind,
        serialize(&l.a),
        fmt_q(&l.r),
        l.sched.shift(),
        l.filled
    ));
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(&Arc::new(self.clone())))
    }
}

/// Whether `w` is a prefix of some terminal of `c` or extends one.
pub fn clopen_meets(c: &ClopenTree, w: &[u8]) -> bool {
    c.terminals().iter().any(|t| is_prefix(t, w) || is_prefix(w, t))
}
