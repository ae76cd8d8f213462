//! Lipschitz and Wadge games on `{0,1}` with queue-buffered strategies.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sets::expr::{serialize, Expr};
use crate::sets::member::{member_at_depth, Verdict};
use crate::word::{word_string, Lasso, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum GameKind {
    Lipschitz,
    Wadge,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Move {
    Bit(u8),
    Pass,
}

/// A player's strategy as a deterministic state machine.
///
/// After each opponent move the strategy returns the bits it now commits to; the engine plays
/// them one per round from a queue and passes when the queue is empty.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    fn params(&self) -> serde_json::Value {
        serde_json::Value::Null
    }

    /// `Lipschitz` strategies never leave their queue empty.
    fn kind(&self) -> GameKind;

    fn observe(&mut self, opp: Move) -> Vec<u8>;

    /// The rest of this player's output once the opponent's remaining play is the lasso `rest`,
    /// if the current state already determines it.
    fn settle(&self, rest: &Lasso) -> Option<Lasso>;

    /// A finite summary of the state; equal keys at equal positions of a periodic input give
    /// equal futures.
    fn state_key(&self) -> Option<String> {
        None
    }

    /// A bound on the total number of passes, when the strategy guarantees one.
    fn pass_bound(&self) -> Option<usize> {
        None
    }

    fn box_clone(&self) -> Box<dyn Strategy>;
}

impl Clone for Box<dyn Strategy> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

impl fmt::Debug for dyn Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({})", self.name())
    }
}

/// The move `s` makes at the position where the opponent has played `opp`, with the queue
/// drained one bit per round; replays `s` from its current state.
pub fn move_at(s: &dyn Strategy, opp: &[u8]) -> Move {
    let mut st = s.box_clone();
    let mut queue = VecDeque::new();
    let mut last = Move::Pass;
    for &b in opp {
        queue.extend(st.observe(Move::Bit(b)));
        last = queue.pop_front().map_or(Move::Pass, Move::Bit);
    }
    last
}

/// A set on which membership of lassos can be decided: an expression, `B + A`
/// (`{s̄⌢η⌢b : b ∈ B} ∪ Ā`) or `A^♮` (finitely many breaks, ending in `ā` with `a ∈ A`).
#[derive(Clone, Debug)]
pub enum GameSet {
    Expr(Expr),
    WadgeSum { b: Expr, a: Expr },
    Sharp(Expr),
}

impl From<Expr> for GameSet {
    fn from(e: Expr) -> Self {
        GameSet::Expr(e)
    }
}

impl fmt::Display for GameSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameSet::Expr(e) => write!(f, "{}", serialize(e)),
            GameSet::WadgeSum { b, a } => write!(f, "({}) + ({})", serialize(b), serialize(a)),
            GameSet::Sharp(a) => write!(f, "sharp({})", serialize(a)),
        }
    }
}

impl Serialize for GameSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Index of the last pair break of `x`, `Err(())` when there are infinitely many.
fn last_break(x: &Lasso) -> std::result::Result<Option<usize>, ()> {
    let start = x.prefix().len().div_ceil(2);
    let c = x.cycle().len();
    let period = if c % 2 == 0 { c / 2 } else { c };
    let brk = |i: usize| x.bit(2 * i) != x.bit(2 * i + 1);
    if (start..start + period).any(brk) {
        return Err(());
    }
    Ok((0..start).rev().find(|&i| brk(i)))
}

impl GameSet {
    pub fn member(&self, x: &Lasso, depth: usize) -> Verdict {
        match self {
            GameSet::Expr(e) => member_at_depth(e, x, depth),
            GameSet::WadgeSum { b, a } => match x.first_break() {
                Some(i) => member_at_depth(b, &x.drop(2 * i + 2), depth),
                None => member_at_depth(a, &x.undouble().expect("no break"), depth),
            },
            GameSet::Sharp(a) => match last_break(x) {
                Err(()) => Verdict::Out,
                Ok(i) => {
                    let tail = i.map_or_else(|| x.clone(), |i| x.drop(2 * i + 2));
                    member_at_depth(a, &tail.undouble().expect("no later break"), depth)
                }
            },
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            GameSet::Expr(e) => Some(e),
            _ => None,
        }
    }
}

pub struct GameConfig {
    pub kind: GameKind,
    pub set_i: GameSet,
    pub set_ii: GameSet,
    pub rounds: usize,
}

pub enum PlayerI {
    Point(Lasso),
    Strategy(Box<dyn Strategy>),
}

fn ser_word<S: Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&word_string(w))
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub kind: GameKind,
    pub rounds: usize,
    #[serde(serialize_with = "ser_word")]
    pub moves_i: Word,
    #[serde(serialize_with = "ser_word")]
    pub moves_ii: Word,
    pub passes: Vec<usize>,
    #[serde(serialize_with = "ser_word")]
    pub pending: Word,
    pub point: Option<Lasso>,
    pub output: Option<Lasso>,
    pub verdict_i: Verdict,
    pub verdict_ii: Verdict,
}

/// The rest of `s`'s output when the opponent continues with `rest`: from [`Strategy::settle`],
/// or by running `s` on `rest` until it settles or its state repeats at a cycle boundary.
pub fn output_tail(s: &dyn Strategy, rest: &Lasso, budget: usize) -> Option<Lasso> {
    let mut st = s.box_clone();
    let mut emitted: Word = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let (p, c) = (rest.prefix().len(), rest.cycle().len());
    for i in 0..budget {
        if let Some(t) = st.settle(&rest.drop(i)) {
            return Some(t.prepend(&emitted));
        }
        if i >= p && (i - p) % c == 0 {
            if let Some(k) = st.state_key() {
                if let Some(&start) = seen.get(&k) {
                    return Lasso::new(emitted[..start].to_vec(), emitted[start..].to_vec()).ok();
                }
                seen.insert(k, emitted.len());
            }
        }
        emitted.extend(st.observe(Move::Bit(rest.bit(i))));
    }
    None
}

/// Membership depth used for verdicts at horizon `rounds`.
pub fn verdict_depth(rounds: usize) -> usize {
    4 * rounds.max(16)
}

pub fn play(cfg: &GameConfig, player_i: PlayerI, player_ii: &dyn Strategy) -> Result<Transcript> {
    if cfg.rounds == 0 {
        return Err(Error::domain("a game needs at least one round"));
    }
    let mut ii = player_ii.box_clone();
    let (point, mut strat_i) = match player_i {
        PlayerI::Point(x) => (Some(x), None),
        PlayerI::Strategy(s) => (None, Some(s)),
    };
    let mut queue_i: VecDeque<u8> = VecDeque::new();
    let mut queue_ii: VecDeque<u8> = VecDeque::new();
    let mut moves_i = Vec::with_capacity(cfg.rounds);
    let mut moves_ii = Vec::with_capacity(cfg.rounds);
    let mut passes = Vec::new();
    let mut last_ii = Move::Pass;
    let depth = verdict_depth(cfg.rounds);
    for round in 0..cfg.rounds {
        let b = match (&point, strat_i.as_mut()) {
            (Some(x), _) => x.bit(round),
            (None, Some(s)) => {
                queue_i.extend(s.observe(last_ii));
                queue_i
                    .pop_front()
                    .ok_or_else(|| Error::Rule(format!("player I did not move in round {round}")))?
            }
            (None, None) => unreachable!(),
        };
        moves_i.push(b);
        queue_ii.extend(ii.observe(Move::Bit(b)));
        match queue_ii.pop_front() {
            Some(c) => {
                moves_ii.push(c);
                last_ii = Move::Bit(c);
            }
            None => {
                if cfg.kind == GameKind::Lipschitz {
                    return Err(Error::Rule(format!("{} passed in round {round} of a Lipschitz game", ii.name())));
                }
                passes.push(round);
                last_ii = Move::Pass;
            }
        }
    }
    if cfg.kind == GameKind::Wadge && 2 * passes.len() > cfg.rounds && ii.pass_bound().map_or(true, |b| passes.len() > b) {
        return Err(Error::Rule(format!(
            "{} passed in {} of {} rounds, over the pass quota",
            ii.name(),
            passes.len(),
            cfg.rounds
        )));
    }
    let pending: Word = queue_ii.iter().copied().collect();
    let (output, verdict_i, verdict_ii) = match &point {
        Some(x) => {
            let out = output_tail(ii.as_ref(), &x.drop(cfg.rounds), depth).map(|tail| {
                let mut head = moves_ii.clone();
                head.extend_from_slice(&pending);
                tail.prepend(&head)
            });
            let vi = cfg.set_i.member(x, depth);
            let vii = out.as_ref().map_or(Verdict::Unknown, |y| cfg.set_ii.member(y, depth));
            (out, vi, vii)
        }
        None => (None, Verdict::Unknown, Verdict::Unknown),
    };
    Ok(Transcript { kind: cfg.kind, rounds: cfg.rounds, moves_i, moves_ii, passes, pending, point, output, verdict_i, verdict_ii })
}
