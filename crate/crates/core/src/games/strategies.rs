//! The strategies of the reductions between Rake, Sum, Natural and dense extensions.

use serde_json::json;

use crate::error::{Error, Result};
use crate::games::engine::{GameKind, GameSet, Move, Strategy};
use crate::measure::exact::exact_measure;
use crate::rational::{fmt_q, max_q, Q};
use crate::schedule::{u_node, IntSchedule, RateSchedule};
use crate::sets::clopen::ClopenTree;
use crate::sets::expr::{clopen_meets, clopen_words, dext, natural, rake, serialize, sum, Expr, SetFamily};
use crate::sets::localize::localize_bit;
use crate::sets::member::Verdict;
use crate::word::{cat, enumerate_lassos, repeat, tri_compare, word_string, Lasso, Word};

pub const BUILTIN_NAMES: [&str; 8] = [
    "rake_fwd",
    "rake_bwd",
    "sum_fwd",
    "sum_bwd",
    "natural_fwd",
    "natural_bwd",
    "dense_extend_fwd",
    "dense_extend_bwd",
];

/// Depth used when certifying witness verdicts.
const WITNESS_DEPTH: usize = 64;

/// The ⊴-least lasso with prefix and cycle of length at most 4 whose membership in `set`
/// is certified to be `want`.
pub fn choose_witness(set: &GameSet, want: bool) -> Option<Lasso> {
    let mut cands = enumerate_lassos(4, 4);
    cands.sort_by(|x, y| {
        let key = |l: &Lasso| cat(l.prefix(), l.cycle());
        tri_compare(&key(x), &key(y)).then(x.prefix().len().cmp(&y.prefix().len()))
    });
    let v = Verdict::from_bool(want);
    cands.into_iter().find(|l| set.member(l, WITNESS_DEPTH) == v)
}

fn witness(set: &GameSet, want: bool, given: &Option<Lasso>, what: &str) -> Result<Lasso> {
    if let Some(w) = given {
        return Ok(w.clone());
    }
    choose_witness(set, want).ok_or_else(|| {
        Error::Domain(format!("missing witness: no lasso {} {set} for the {what} branch", if want { "in" } else { "outside" }))
    })
}

/// `u(max{r, r_n·μ(A|s)})` for the localized slot `a = A|s` with `n = lh(s)`.
fn exit_u(a: &Expr, r: &Q, sched: &RateSchedule, n: usize) -> Word {
    let mu = exact_measure(a).expect("games need an exact A-slot");
    let thr = max_q(r, &(sched.value(n) * mu));
    u_node(&thr).expect("threshold in [0,1)").1
}

/// Tracks `s` while the opponent plays a doubled word `s̄`.
#[derive(Clone)]
struct Pairs {
    a: Expr,
    n: usize,
    pending: Option<u8>,
}

enum PairStep {
    First,
    Same,
    Break,
}

impl Pairs {
    fn new(a: &Expr) -> Self {
        Pairs { a: a.clone(), n: 0, pending: None }
    }

    fn push(&mut self, b: u8) -> PairStep {
        match self.pending.take() {
            None => {
                self.pending = Some(b);
                PairStep::First
            }
            Some(p) if p == b => {
                self.a = localize_bit(&self.a, b);
                self.n += 1;
                PairStep::Same
            }
            Some(_) => PairStep::Break,
        }
    }

    /// Whether the opponent's remaining play `rest` never breaks a pair.
    fn key(&self) -> String {
        format!("{}/{}/{:?}", serialize(&self.a), self.n, self.pending)
    }

    fn no_break_ahead(&self, rest: &Lasso) -> bool {
        let aligned = match self.pending {
            Some(p) => rest.prepend(&[p]),
            None => rest.clone(),
        };
        aligned.first_break().is_none()
    }
}

/// One bit of a fixed lasso per observed move.
#[derive(Clone)]
struct Stream {
    w: Lasso,
    pos: usize,
}

impl Stream {
    fn new(w: Lasso, pos: usize) -> Self {
        Stream { w, pos }
    }

    fn next(&mut self) -> Vec<u8> {
        let b = self.w.bit(self.pos);
        self.pos += 1;
        vec![b]
    }

    fn rest(&self) -> Lasso {
        self.w.drop(self.pos)
    }
}

/// II copies I's moves.
#[derive(Clone)]
pub struct Copycat;

impl Strategy for Copycat {
    fn name(&self) -> String {
        "copy".into()
    }
    fn kind(&self) -> GameKind {
        GameKind::Lipschitz
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        match opp {
            Move::Bit(b) => vec![b],
            Move::Pass => Vec::new(),
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        Some(rest.clone())
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// A copycat that flips its output bit at position `at`.
#[derive(Clone)]
pub struct Corrupt {
    pub at: usize,
    seen: usize,
}

impl Corrupt {
    pub fn new(at: usize) -> Self {
        Corrupt { at, seen: 0 }
    }
}

impl Strategy for Corrupt {
    fn name(&self) -> String {
        "corrupt".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "flip_at": self.at })
    }
    fn kind(&self) -> GameKind {
        GameKind::Lipschitz
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        let i = self.seen;
        self.seen += 1;
        vec![if i == self.at { 1 - b } else { b }]
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        (self.seen > self.at).then(|| rest.clone())
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum RakeFwdMode {
    Zeros(usize),
    Copy,
}

/// `(A_n)^▽ → Rake(f; (A_n))`: copy 0s; at `0^n⌢1` play up to `0^n⌢1^(f(n))`, then copy.
#[derive(Clone)]
pub struct RakeFwd {
    f: IntSchedule,
    mode: RakeFwdMode,
}

impl Strategy for RakeFwd {
    fn name(&self) -> String {
        "rake_fwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "f": self.f.describe() })
    }
    fn kind(&self) -> GameKind {
        GameKind::Lipschitz
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        match self.mode {
            RakeFwdMode::Copy => vec![b],
            RakeFwdMode::Zeros(n) if b == 0 => {
                self.mode = RakeFwdMode::Zeros(n + 1);
                vec![0]
            }
            RakeFwdMode::Zeros(n) => {
                self.mode = RakeFwdMode::Copy;
                repeat(1, self.f.value(n) as usize)
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match self.mode {
            RakeFwdMode::Copy => Some(rest.clone()),
            RakeFwdMode::Zeros(_) => rest.is_eventually_const_from(0, 0).then(|| Lasso::constant(0)),
        }
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum RakeBwdMode {
    Zeros(usize),
    Ones { n: usize, m: usize },
    Copy,
    Bail(Stream),
}

/// `Rake(f; (A_n)) → (A_n)^▽`: copy 0s; pass through the tine `1^(f(n))`, then play 1 and copy.
/// On an early 0 the play can no longer reach the set, and II bails to a point outside.
#[derive(Clone)]
pub struct RakeBwd {
    f: IntSchedule,
    fam: SetFamily,
    pole: bool,
    mode: RakeBwdMode,
}

impl RakeBwd {
    fn bail(&self, n: usize) -> RakeBwdMode {
        if !self.pole {
            return RakeBwdMode::Bail(Stream::new(Lasso::constant(0), 0));
        }
        let w = choose_witness(&GameSet::Expr(self.fam.get(n)), false)
            .map(|w| w.prepend(&[1]))
            .unwrap_or_else(|| Lasso::constant(0));
        RakeBwdMode::Bail(Stream::new(w, 0))
    }
}

impl Strategy for RakeBwd {
    fn name(&self) -> String {
        "rake_bwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "f": self.f.describe(), "pole": self.pole })
    }
    fn kind(&self) -> GameKind {
        GameKind::Wadge
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        match &mut self.mode {
            RakeBwdMode::Copy => vec![b],
            RakeBwdMode::Bail(s) => s.next(),
            RakeBwdMode::Zeros(n) if b == 0 => {
                *n += 1;
                vec![0]
            }
            RakeBwdMode::Zeros(n) => {
                let n = *n;
                if self.f.value(n) == 1 {
                    self.mode = RakeBwdMode::Copy;
                    vec![1]
                } else {
                    self.mode = RakeBwdMode::Ones { n, m: 1 };
                    Vec::new()
                }
            }
            RakeBwdMode::Ones { n, m } => {
                let n = *n;
                if b == 0 {
                    self.mode = self.bail(n);
                    let RakeBwdMode::Bail(s) = &mut self.mode else { unreachable!() };
                    return s.next();
                }
                *m += 1;
                if *m as u64 == self.f.value(n) {
                    self.mode = RakeBwdMode::Copy;
                    vec![1]
                } else {
                    Vec::new()
                }
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match &self.mode {
            RakeBwdMode::Copy => Some(rest.clone()),
            RakeBwdMode::Bail(s) => Some(s.rest()),
            RakeBwdMode::Zeros(_) => rest.is_eventually_const_from(0, 0).then(|| Lasso::constant(0)),
            RakeBwdMode::Ones { .. } => None,
        }
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum SumFwdMode {
    Doubled(Pairs),
    Copy,
}

/// `B + A → Sum(B, A, r)`: copy; after a break `s̄⌢η` play `u(max{r, r_lh(s)·μ(A|s)})`, then copy.
#[derive(Clone)]
pub struct SumFwd {
    r: Q,
    sched: RateSchedule,
    mode: SumFwdMode,
}

impl Strategy for SumFwd {
    fn name(&self) -> String {
        "sum_fwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "r": fmt_q(&self.r), "schedule": self.sched.describe() })
    }
    fn kind(&self) -> GameKind {
        GameKind::Lipschitz
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        let SumFwdMode::Doubled(p) = &mut self.mode else { return vec![b] };
        match p.push(b) {
            PairStep::First | PairStep::Same => vec![b],
            PairStep::Break => {
                let u = exit_u(&p.a, &self.r, &self.sched, p.n);
                self.mode = SumFwdMode::Copy;
                cat(&[b], &u)
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match &self.mode {
            SumFwdMode::Copy => Some(rest.clone()),
            SumFwdMode::Doubled(p) => p.no_break_ahead(rest).then(|| rest.clone()),
        }
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum SumBwdMode {
    Doubled(Pairs),
    Wait { u: Word, i: usize },
    Copy,
    Bail(Stream),
}

/// `Sum(B, A, r) → B + A`: copy; after a break pass while I follows the exit node, then copy.
/// If I leaves the node it has entered the `O` region, and II plays a fixed point of `B`.
#[derive(Clone)]
pub struct SumBwd {
    r: Q,
    sched: RateSchedule,
    witness_b: Lasso,
    mode: SumBwdMode,
}

impl Strategy for SumBwd {
    fn name(&self) -> String {
        "sum_bwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "r": fmt_q(&self.r), "schedule": self.sched.describe(), "witness": self.witness_b.to_string() })
    }
    fn kind(&self) -> GameKind {
        GameKind::Wadge
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        match &mut self.mode {
            SumBwdMode::Copy => vec![b],
            SumBwdMode::Bail(s) => s.next(),
            SumBwdMode::Doubled(p) => match p.push(b) {
                PairStep::First | PairStep::Same => vec![b],
                PairStep::Break => {
                    let u = exit_u(&p.a, &self.r, &self.sched, p.n);
                    self.mode = SumBwdMode::Wait { u, i: 0 };
                    vec![b]
                }
            },
            SumBwdMode::Wait { u, i } => {
                if u[*i] != b {
                    let mut s = Stream::new(self.witness_b.clone(), 0);
                    let out = s.next();
                    self.mode = SumBwdMode::Bail(s);
                    return out;
                }
                *i += 1;
                if *i == u.len() {
                    self.mode = SumBwdMode::Copy;
                }
                Vec::new()
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match &self.mode {
            SumBwdMode::Copy => Some(rest.clone()),
            SumBwdMode::Bail(s) => Some(s.rest()),
            SumBwdMode::Doubled(p) => p.no_break_ahead(rest).then(|| rest.clone()),
            SumBwdMode::Wait { .. } => None,
        }
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// `A^♮ → Natural(A)`: play a level-1 exit node and 1, then copy, inserting `u⌢1` after each
/// break and restarting `s` at the new level.
#[derive(Clone)]
pub struct NaturalFwd {
    a0: Expr,
    sched: RateSchedule,
    started: bool,
    pairs: Pairs,
}

impl NaturalFwd {
    fn entry(&self) -> Word {
        let mut e = vec![0, 1];
        e.extend(exit_u(&self.a0, &Q::from_integer(0.into()), &self.sched, 0));
        e.push(1);
        e
    }
}

impl Strategy for NaturalFwd {
    fn name(&self) -> String {
        "natural_fwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "schedule": self.sched.describe() })
    }
    fn kind(&self) -> GameKind {
        GameKind::Lipschitz
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        let mut out = if self.started { Vec::new() } else { self.entry() };
        self.started = true;
        out.push(b);
        if let PairStep::Break = self.pairs.push(b) {
            out.extend(exit_u(&self.pairs.a, &Q::from_integer(0.into()), &self.sched, self.pairs.n));
            out.push(1);
            self.pairs = Pairs::new(&self.a0);
        }
        out
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        if !self.pairs.no_break_ahead(rest) {
            return None;
        }
        Some(if self.started { rest.clone() } else { rest.prepend(&self.entry()) })
    }
    fn state_key(&self) -> Option<String> {
        Some(format!("{}:{}", self.started, self.pairs.key()))
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum NatBwdMode {
    /// Before I reaches a level-1 exit node and its 1; II plays `ā` with `a ∉ A`.
    Seek { pairs: Pairs, wait: Option<(Word, usize)>, expect_one: bool, out: Stream },
    Copy(Pairs),
    Follow { u: Word, i: usize },
    ExpectOne,
    Bail(Stream),
}

/// `Natural(A) → A^♮`: wait for the first level, then play `01` and copy, removing the `u⌢1`
/// blocks. An escape into `O` is answered by `ā` with `a ∈ A`, an exit without the 1 by `ā`
/// with `a ∉ A`.
#[derive(Clone)]
pub struct NaturalBwd {
    a0: Expr,
    sched: RateSchedule,
    a_in: Lasso,
    a_out: Lasso,
    mode: NatBwdMode,
}

impl Strategy for NaturalBwd {
    fn name(&self) -> String {
        "natural_bwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "schedule": self.sched.describe(), "a_in": self.a_in.to_string(), "a_out": self.a_out.to_string() })
    }
    fn kind(&self) -> GameKind {
        GameKind::Wadge
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let Move::Bit(b) = opp else { return Vec::new() };
        let zero = Q::from_integer(0.into());
        match &mut self.mode {
            NatBwdMode::Bail(s) => s.next(),
            NatBwdMode::Seek { pairs, wait, expect_one, out } => {
                if *expect_one {
                    if b == 0 {
                        let s = out.clone();
                        self.mode = NatBwdMode::Bail(s);
                        let NatBwdMode::Bail(s) = &mut self.mode else { unreachable!() };
                        return s.next();
                    }
                    let mut res = Vec::new();
                    if out.pos % 2 == 1 {
                        res.extend(out.next());
                    }
                    res.extend([0, 1]);
                    self.mode = NatBwdMode::Copy(Pairs::new(&self.a0));
                    return res;
                }
                if let Some((u, i)) = wait {
                    if u[*i] != b {
                        let s = out.clone();
                        self.mode = NatBwdMode::Bail(s);
                        let NatBwdMode::Bail(s) = &mut self.mode else { unreachable!() };
                        return s.next();
                    }
                    *i += 1;
                    if *i == u.len() {
                        *wait = None;
                        *expect_one = true;
                    }
                } else if let PairStep::Break = pairs.push(b) {
                    *wait = Some((exit_u(&pairs.a, &zero, &self.sched, pairs.n), 0));
                }
                out.next()
            }
            NatBwdMode::Copy(p) => {
                if let PairStep::Break = p.push(b) {
                    let u = exit_u(&p.a, &zero, &self.sched, p.n);
                    self.mode = NatBwdMode::Follow { u, i: 0 };
                }
                vec![b]
            }
            NatBwdMode::Follow { u, i } => {
                if u[*i] != b {
                    let mut s = Stream::new(self.a_in.double(), 0);
                    let out = s.next();
                    self.mode = NatBwdMode::Bail(s);
                    return out;
                }
                *i += 1;
                if *i == u.len() {
                    self.mode = NatBwdMode::ExpectOne;
                }
                Vec::new()
            }
            NatBwdMode::ExpectOne => {
                if b == 1 {
                    self.mode = NatBwdMode::Copy(Pairs::new(&self.a0));
                    return Vec::new();
                }
                let mut s = Stream::new(self.a_out.double(), 0);
                let out = s.next();
                self.mode = NatBwdMode::Bail(s);
                out
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match &self.mode {
            NatBwdMode::Bail(s) => Some(s.rest()),
            NatBwdMode::Seek { pairs, wait: None, expect_one: false, out } => pairs.no_break_ahead(rest).then(|| out.rest()),
            NatBwdMode::Copy(p) => p.no_break_ahead(rest).then(|| rest.clone()),
            _ => None,
        }
    }
    fn state_key(&self) -> Option<String> {
        match &self.mode {
            NatBwdMode::Copy(p) => Some(format!("copy:{}", p.key())),
            NatBwdMode::Follow { u, i } => Some(format!("follow:{}:{i}", word_string(u))),
            NatBwdMode::ExpectOne => Some("one".into()),
            _ => None,
        }
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// `A → D ∪ t⌢B`: play `t`, then follow a reduction of `A` to `B`.
#[derive(Clone)]
pub struct DenseExtendFwd {
    t: Word,
    inner: Box<dyn Strategy>,
    started: bool,
}

impl Strategy for DenseExtendFwd {
    fn name(&self) -> String {
        "dense_extend_fwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({ "t": word_string(&self.t), "inner": self.inner.name() })
    }
    fn kind(&self) -> GameKind {
        self.inner.kind()
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        let mut out = if self.started { Vec::new() } else { self.t.clone() };
        self.started = true;
        out.extend(self.inner.observe(opp));
        out
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        let tail = self.inner.settle(rest)?;
        Some(if self.started { tail } else { tail.prepend(&self.t) })
    }
    fn pass_bound(&self) -> Option<usize> {
        self.inner.pass_bound()
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
enum DenseBwdMode {
    Wait(Word),
    Inner,
    Bail(Stream),
}

/// `D ∪ t⌢B → A`: pass until I is inside `D` (play a point of `A`), outside `D ∪ N_t` (play a
/// point outside `A`) or at `t` (follow a reduction of `B` to `A`).
#[derive(Clone)]
pub struct DenseExtendBwd {
    d: ClopenTree,
    t: Word,
    inner: Box<dyn Strategy>,
    a_in: Lasso,
    a_out: Lasso,
    mode: DenseBwdMode,
}

impl Strategy for DenseExtendBwd {
    fn name(&self) -> String {
        "dense_extend_bwd".into()
    }
    fn params(&self) -> serde_json::Value {
        json!({
            "d": self.d.to_string(),
            "t": word_string(&self.t),
            "inner": self.inner.name(),
            "a_in": self.a_in.to_string(),
            "a_out": self.a_out.to_string(),
        })
    }
    fn kind(&self) -> GameKind {
        GameKind::Wadge
    }
    fn observe(&mut self, opp: Move) -> Vec<u8> {
        match &mut self.mode {
            DenseBwdMode::Inner => self.inner.observe(opp),
            DenseBwdMode::Bail(s) => match opp {
                Move::Bit(_) => s.next(),
                Move::Pass => Vec::new(),
            },
            DenseBwdMode::Wait(pos) => {
                let Move::Bit(b) = opp else { return Vec::new() };
                pos.push(b);
                if self.d.covers(pos) {
                    self.mode = DenseBwdMode::Bail(Stream::new(self.a_in.clone(), 0));
                } else if *pos == self.t {
                    self.mode = DenseBwdMode::Inner;
                    return Vec::new();
                } else if !clopen_meets(&self.d, pos) && !crate::word::is_prefix(pos, &self.t) {
                    self.mode = DenseBwdMode::Bail(Stream::new(self.a_out.clone(), 0));
                } else {
                    return Vec::new();
                }
                let DenseBwdMode::Bail(s) = &mut self.mode else { unreachable!() };
                s.next()
            }
        }
    }
    fn settle(&self, rest: &Lasso) -> Option<Lasso> {
        match &self.mode {
            DenseBwdMode::Inner => self.inner.settle(rest),
            DenseBwdMode::Bail(s) => Some(s.rest()),
            DenseBwdMode::Wait(_) => None,
        }
    }
    fn pass_bound(&self) -> Option<usize> {
        let own = self.d.depth().max(self.t.len());
        Some(own + self.inner.pass_bound().unwrap_or(0))
    }
    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// A strategy with the sets it reduces: II wins `G(domain, target)` by following it.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub strategy: Box<dyn Strategy>,
    pub domain: GameSet,
    pub target: GameSet,
}

impl Reduction {
    pub fn copy(a: Expr) -> Self {
        Reduction { strategy: Box::new(Copycat), domain: a.clone().into(), target: a.into() }
    }

    pub fn corrupt(a: Expr, at: usize) -> Self {
        Reduction { strategy: Box::new(Corrupt::new(at)), domain: a.clone().into(), target: a.into() }
    }
}

/// Construction parameters; `None` fields fall back to the defaults of [`StrategyParams::catalog`].
#[derive(Clone, Debug)]
pub struct StrategyParams {
    pub f: IntSchedule,
    pub family: SetFamily,
    pub pole: bool,
    pub a: Expr,
    pub b: Expr,
    pub r: Q,
    pub sched: RateSchedule,
    pub d: ClopenTree,
    pub t: Word,
    /// Reduction of `A` to `B` for `dense_extend_fwd`, of `B` to `A` for `dense_extend_bwd`.
    pub inner: Option<Reduction>,
    pub witness_in: Option<Lasso>,
    pub witness_out: Option<Lasso>,
}

impl StrategyParams {
    /// `f(n) = n+1`, `A_n = A = N_0`, `B = N_1`, `r = 0`, default schedule, `D = N_00`, `t = 01`.
    pub fn catalog() -> Self {
        StrategyParams {
            f: IntSchedule::affine(1, 1).expect("valid schedule"),
            family: SetFamily::constant(clopen_words([vec![0]])),
            pole: false,
            a: clopen_words([vec![0]]),
            b: clopen_words([vec![1]]),
            r: Q::from_integer(0.into()),
            sched: RateSchedule::default(),
            d: ClopenTree::cylinder(&[0, 0]),
            t: vec![0, 1],
            inner: None,
            witness_in: None,
            witness_out: None,
        }
    }
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams::catalog()
    }
}

pub fn builtin_reduction(name: &str, p: &StrategyParams) -> Result<Reduction> {
    let tri = || rake(p.pole, IntSchedule::constant(1).expect("valid"), p.family.clone());
    let rk = || rake(p.pole, p.f.clone(), p.family.clone());
    let sm = || sum(p.b.clone(), p.a.clone(), p.r.clone(), p.sched.clone());
    let ws = || GameSet::WadgeSum { b: p.b.clone(), a: p.a.clone() };
    let nat = || natural(p.a.clone(), p.sched.clone());
    let pairs = || Pairs::new(&p.a);
    let red = |s: Box<dyn Strategy>, domain: GameSet, target: GameSet| Reduction { strategy: s, domain, target };
    Ok(match name {
        "copy" => Reduction::copy(p.a.clone()),
        "corrupt" => Reduction::corrupt(p.a.clone(), 0),
        "rake_fwd" => red(Box::new(RakeFwd { f: p.f.clone(), mode: RakeFwdMode::Zeros(0) }), tri()?.into(), rk()?.into()),
        "rake_bwd" => red(
            Box::new(RakeBwd { f: p.f.clone(), fam: p.family.clone(), pole: p.pole, mode: RakeBwdMode::Zeros(0) }),
            rk()?.into(),
            tri()?.into(),
        ),
        "sum_fwd" => red(
            Box::new(SumFwd { r: p.r.clone(), sched: p.sched.clone(), mode: SumFwdMode::Doubled(pairs()) }),
            ws(),
            sm()?.into(),
        ),
        "sum_bwd" => {
            let witness_b = witness(&p.b.clone().into(), true, &p.witness_in, "sum_bwd escape")?;
            red(
                Box::new(SumBwd { r: p.r.clone(), sched: p.sched.clone(), witness_b, mode: SumBwdMode::Doubled(pairs()) }),
                sm()?.into(),
                ws(),
            )
        }
        "natural_fwd" => {
            let n = nat()?;
            red(
                Box::new(NaturalFwd { a0: p.a.clone(), sched: p.sched.clone(), started: false, pairs: pairs() }),
                GameSet::Sharp(p.a.clone()),
                n.into(),
            )
        }
        "natural_bwd" => {
            let n = nat()?;
            let aset: GameSet = p.a.clone().into();
            let a_in = witness(&aset, true, &p.witness_in, "natural_bwd escape")?;
            let a_out = witness(&aset, false, &p.witness_out, "natural_bwd exit")?;
            let out = Stream::new(a_out.double(), 0);
            red(
                Box::new(NaturalBwd {
                    a0: p.a.clone(),
                    sched: p.sched.clone(),
                    a_in,
                    a_out,
                    mode: NatBwdMode::Seek { pairs: pairs(), wait: None, expect_one: false, out },
                }),
                n.into(),
                GameSet::Sharp(p.a.clone()),
            )
        }
        "dense_extend_fwd" => {
            let inner = p.inner.clone().unwrap_or_else(|| Reduction::copy(p.b.clone()));
            let b = inner
                .target
                .as_expr()
                .cloned()
                .ok_or_else(|| Error::domain("dense_extend_fwd needs an expression target for its inner reduction"))?;
            let target = dext(p.d.clone(), p.t.clone(), b)?;
            red(Box::new(DenseExtendFwd { t: p.t.clone(), inner: inner.strategy, started: false }), inner.domain, target.into())
        }
        "dense_extend_bwd" => {
            let inner = p.inner.clone().unwrap_or_else(|| Reduction::copy(p.b.clone()));
            let b = inner
                .domain
                .as_expr()
                .cloned()
                .ok_or_else(|| Error::domain("dense_extend_bwd needs an expression domain for its inner reduction"))?;
            let a_in = witness(&inner.target, true, &p.witness_in, "dense_extend_bwd inside-D")?;
            let a_out = witness(&inner.target, false, &p.witness_out, "dense_extend_bwd outside")?;
            let domain = dext(p.d.clone(), p.t.clone(), b)?;
            red(
                Box::new(DenseExtendBwd {
                    d: p.d.clone(),
                    t: p.t.clone(),
                    inner: inner.strategy,
                    a_in,
                    a_out,
                    mode: DenseBwdMode::Wait(Vec::new()),
                }),
                domain.into(),
                inner.target,
            )
        }
        other => return Err(Error::Domain(format!("unknown strategy `{other}`"))),
    })
}

pub fn builtin_strategy(name: &str, p: &StrategyParams) -> Result<Box<dyn Strategy>> {
    Ok(builtin_reduction(name, p)?.strategy)
}

pub fn describe_params(p: &StrategyParams) -> serde_json::Value {
    json!({
        "f": p.f.describe(),
        "pole": p.pole,
        "a": serialize(&p.a),
        "b": serialize(&p.b),
        "r": fmt_q(&p.r),
        "schedule": p.sched.describe(),
        "d": p.d.to_string(),
        "t": word_string(&p.t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::engine::move_at;

    fn feed(s: &mut dyn Strategy, bits: &[u8]) -> Vec<u8> {
        bits.iter().flat_map(|&b| s.observe(Move::Bit(b))).collect()
    }

    #[test]
    fn rake_fwd_reaches_the_tine() {
        let mut s = builtin_strategy("rake_fwd", &StrategyParams::catalog()).unwrap();
        assert_eq!(feed(s.as_mut(), &[0, 0, 0, 1, 0, 1]), vec![0, 0, 0, 1, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn sum_bwd_escape_plays_b_witness() {
        let p = StrategyParams::catalog();
        let mut s = builtin_strategy("sum_bwd", &p).unwrap();
        let out = feed(s.as_mut(), &[0, 1, 0, 0, 0]);
        assert_eq!(out[..2], [0, 1]);
        let w = choose_witness(&p.b.clone().into(), true).unwrap();
        assert_eq!(out[2..], w.take(3)[..]);
    }

    #[test]
    fn move_at_replays() {
        let s = builtin_strategy("rake_bwd", &StrategyParams::catalog()).unwrap();
        assert_eq!(move_at(s.as_ref(), &[0, 0, 1]), Move::Pass);
        assert_eq!(move_at(s.as_ref(), &[0, 1]), Move::Pass);
        assert_eq!(move_at(s.as_ref(), &[1]), Move::Bit(1));
        assert_eq!(move_at(s.as_ref(), &[0]), Move::Bit(0));
    }

    #[test]
    fn unknown_name() {
        assert!(builtin_strategy("nope", &StrategyParams::catalog()).is_err());
    }
}
