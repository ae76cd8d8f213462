//! The Banach–Mazur game on the measure algebra with clopen-centred balls.

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, min_q, pow2, ser_q, Q};
use crate::sets::clopen::{make_clopen, ClopenTree};
use crate::word::{nth_word, word_label, Word};

/// `{⟦B⟧ : μ(B △ center) < radius}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Ball {
    pub center: ClopenTree,
    #[serde(serialize_with = "ser_q")]
    pub radius: Q,
}

pub fn delta(a: &ClopenTree, b: &ClopenTree) -> Q {
    a.sym_diff(b).measure()
}

impl Ball {
    pub fn new(center: ClopenTree, radius: Q) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::domain(format!("ball radius must be positive, got {}", fmt_q(&radius))));
        }
        Ok(Ball { center, radius })
    }

    /// `δ(c, c') + ε' ≤ ε`, which puts `o` inside `self`.
    pub fn contains_ball(&self, o: &Ball) -> bool {
        delta(&self.center, &o.center) + &o.radius <= self.radius
    }

    /// `δ(c, c') + ε' < ε`, which puts the closure of `o` inside `self`.
    pub fn contains_closure(&self, o: &Ball) -> bool {
        delta(&self.center, &o.center) + &o.radius < self.radius
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum BmTarget {
    /// `μ(V_n ∖ A) > 0` for all `n`.
    Minus,
    /// `μ(V_n ∩ A) > 0` for all `n`.
    Plus,
    Both,
}

impl BmTarget {
    fn minus(self) -> bool {
        matches!(self, BmTarget::Minus | BmTarget::Both)
    }
    fn plus(self) -> bool {
        matches!(self, BmTarget::Plus | BmTarget::Both)
    }
}

/// How player I chooses its balls.
#[derive(Clone, Debug)]
pub enum Adversary {
    /// Fixed balls, then `Shrink` once the script runs out.
    Script(Vec<Ball>),
    /// Keep II's centre and halve its radius.
    Shrink,
    /// Move II's centre as far towards a fixed clopen set as the ball allows.
    Toward(ClopenTree),
    /// Alternately try to fill and to empty the next basic open set.
    Greedy,
}

/// `V_n`: the `n`-th cylinder in ⊴ order.
pub fn v_n(n: usize) -> ClopenTree {
    ClopenTree::cylinder(&nth_word(n as u64))
}

/// A clopen `S ⊆ d` with `0 < μ(S) ≤ budget` when `d` is nonempty.
fn piece_of(d: &ClopenTree, budget: &Q) -> ClopenTree {
    let mut left = budget.clone();
    let mut out: Vec<Word> = Vec::new();
    for t in d.terminals() {
        let mut w = t.clone();
        while pow2(-(w.len() as i64)) > left {
            w.push(0);
        }
        left -= pow2(-(w.len() as i64));
        let partial = w.len() > t.len();
        out.push(w);
        if partial || left.is_zero() {
            break;
        }
    }
    make_clopen(out)
}

/// I's move `U_{2n}` inside II's previous ball.
fn adversary_move(adv: &Adversary, n: usize, prev: Option<&Ball>) -> Ball {
    let toward = |b: &Ball, target: &ClopenTree| {
        let s = piece_of(&b.center.sym_diff(target), &(&b.radius / Q::from_integer(2.into())));
        let c = b.center.sym_diff(&s);
        let r = (&b.radius - s.measure()) / Q::from_integer(2.into());
        Ball { center: c, radius: r }
    };
    let Some(b) = prev else {
        return match adv {
            Adversary::Script(s) if !s.is_empty() => s[0].clone(),
            _ => Ball { center: ClopenTree::empty(), radius: Q::from_integer(2.into()) },
        };
    };
    match adv {
        Adversary::Script(s) if n < s.len() => s[n].clone(),
        Adversary::Script(_) | Adversary::Shrink => Ball { center: b.center.clone(), radius: &b.radius / Q::from_integer(2.into()) },
        Adversary::Toward(t) => toward(b, t),
        Adversary::Greedy => {
            let v = v_n(n);
            let t = if n % 2 == 0 { b.center.union(&v) } else { b.center.difference(&v) };
            toward(b, &t)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BmRound {
    pub n: usize,
    pub v: String,
    pub ball_i: Ball,
    pub ball_ii: Ball,
    pub cases: Vec<String>,
    /// `Cl U_{2n+1} ⊆ U_{2n}`.
    pub cond1: bool,
    /// `ε_{2n+1} < 2^(−n)`.
    pub cond2: bool,
    /// `ε_{2n+1} ≤ μ(V_n ∖ A_{2n+1})`.
    pub cond3: Option<bool>,
    /// `ε_{2n+1} ≤ μ(V_n ∩ A_{2n+1})`.
    pub cond3p: Option<bool>,
    #[serde(serialize_with = "ser_q")]
    pub outside: Q,
    #[serde(serialize_with = "ser_q")]
    pub inside: Q,
    /// `δ(A_{2n−1}, A_{2n+1}) < 2^(−n+1)`, vacuous at `n = 0`.
    pub converging: bool,
}

impl BmRound {
    pub fn ok(&self) -> bool {
        self.cond1 && self.cond2 && self.cond3.unwrap_or(true) && self.cond3p.unwrap_or(true) && self.converging
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalCheck {
    pub n: usize,
    #[serde(serialize_with = "ser_q")]
    pub outside: Q,
    #[serde(serialize_with = "ser_q")]
    pub inside: Q,
}

impl FinalCheck {
    pub fn both_positive(&self) -> bool {
        self.outside.is_positive() && self.inside.is_positive()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BmTrace {
    pub target: BmTarget,
    pub rounds: Vec<BmRound>,
    pub final_center: ClopenTree,
    pub final_checks: Vec<FinalCheck>,
}

impl BmTrace {
    pub fn all_rounds_ok(&self) -> bool {
        self.rounds.iter().all(BmRound::ok)
    }
}

/// A cylinder inside `c` of measure at most `budget`, strictly smaller than `μ(c)`.
fn small_piece(c: &ClopenTree, budget: &Q) -> ClopenTree {
    let t = &c.terminals()[0];
    let mut w = t.clone();
    w.push(0);
    while pow2(-(w.len() as i64)) > *budget {
        w.push(0);
    }
    ClopenTree::cylinder(&w)
}

/// II's answer to `U_{2n} = Ball(c, e)`, following the cases of the comeagreness argument with
/// `A'_{2n+1} = A_{2n}` (so `r = 0`).
fn respond(target: BmTarget, n: usize, bi: &Ball) -> (Ball, Vec<String>) {
    let two = Q::from_integer(2.into());
    let e = &bi.radius;
    let v = v_n(n);
    let eps1 = min_q(e, &pow2(-(n as i64))) / &two;
    let mut a = bi.center.clone();
    let mut caps = vec![eps1];
    let mut cases = Vec::new();
    if target.minus() {
        let meet = v.intersect(&a);
        if meet.measure().is_zero() {
            cases.push("1".to_string());
            caps.push(v.measure());
        } else {
            let room = (e - delta(&a, &bi.center)) / &two;
            let vp = small_piece(&meet, &room);
            cases.push(format!("2:{}", word_label(&vp.terminals()[0])));
            caps.push(vp.measure() / &two);
            a = a.difference(&vp);
        }
    }
    if target.plus() {
        let meet = v.intersect(&a);
        if meet.measure().is_positive() {
            cases.push("1'".to_string());
            caps.push(meet.measure());
        } else {
            let room = (e - delta(&a, &bi.center)) / &two;
            let vp = small_piece(&v, &room);
            cases.push(format!("2':{}", word_label(&vp.terminals()[0])));
            caps.push(vp.measure());
            a = a.union(&vp);
        }
    }
    caps.push((e - delta(&a, &bi.center)) / &two);
    if target.minus() {
        caps.push(v.difference(&a).measure());
    }
    if target.plus() {
        caps.push(v.intersect(&a).measure());
    }
    let eps = caps.into_iter().reduce(|x, y| min_q(&x, &y)).expect("nonempty");
    (Ball { center: a, radius: eps }, cases)
}

pub fn banach_mazur_simulate(target: BmTarget, adversary: &Adversary, rounds: usize) -> Result<BmTrace> {
    if rounds == 0 {
        return Err(Error::domain("the Banach–Mazur game needs at least one round"));
    }
    let mut out = Vec::with_capacity(rounds);
    let mut prev: Option<Ball> = None;
    for n in 0..rounds {
        let bi = adversary_move(adversary, n, prev.as_ref());
        if !bi.radius.is_positive() {
            return Err(Error::Rule(format!("I's ball in round {n} has radius {}", fmt_q(&bi.radius))));
        }
        if let Some(p) = &prev {
            if !p.contains_ball(&bi) {
                return Err(Error::Rule(format!("I's ball in round {n} is not inside II's previous ball")));
            }
        }
        let (bii, cases) = respond(target, n, &bi);
        let v = v_n(n);
        let outside = v.difference(&bii.center).measure();
        let inside = v.intersect(&bii.center).measure();
        let converging = prev.as_ref().map_or(true, |p| delta(&p.center, &bii.center) < pow2(1 - n as i64));
        out.push(BmRound {
            n,
            v: word_label(&nth_word(n as u64)),
            cond1: bi.contains_closure(&bii) && bii.radius.is_positive(),
            cond2: bii.radius < pow2(-(n as i64)),
            cond3: target.minus().then(|| bii.radius <= outside),
            cond3p: target.plus().then(|| bii.radius <= inside),
            outside,
            inside,
            converging,
            ball_i: bi,
            ball_ii: bii.clone(),
            cases,
        });
        prev = Some(bii);
    }
    let final_center = prev.expect("at least one round").center;
    let final_checks = (0..rounds)
        .map(|n| {
            let v = v_n(n);
            FinalCheck { n, outside: v.difference(&final_center).measure(), inside: v.intersect(&final_center).measure() }
        })
        .collect();
    Ok(BmTrace { target, rounds: out, final_center, final_checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn full_then_toward_empty() {
        let t = banach_mazur_simulate(BmTarget::Plus, &Adversary::Toward(ClopenTree::empty()), 3).unwrap();
        assert_eq!(t.rounds[0].cases, vec!["2':0".to_string()]);
        let r0 = &t.rounds[0];
        assert_eq!(r0.ball_ii.center, ClopenTree::cylinder(&[0]));
        assert_eq!(r0.ball_ii.radius, q(1, 2));
        assert_eq!(r0.cond3p, Some(true));
        assert!(t.all_rounds_ok());
    }

    #[test]
    fn bad_script_is_a_rule_violation() {
        let b0 = Ball::new(ClopenTree::empty(), q(1, 8)).unwrap();
        let b1 = Ball::new(ClopenTree::full(), q(1, 8)).unwrap();
        let e = banach_mazur_simulate(BmTarget::Both, &Adversary::Script(vec![b0, b1]), 2).unwrap_err();
        assert!(matches!(e, Error::Rule(_)));
    }

    #[test]
    fn pieces_fit() {
        let d = make_clopen(vec![vec![0], vec![1, 1]]);
        let s = piece_of(&d, &q(5, 8));
        assert!(s.is_subset(&d) && s.measure() <= q(5, 8) && s.measure().is_positive());
    }
}
