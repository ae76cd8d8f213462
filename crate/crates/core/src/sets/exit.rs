//! Enumeration of exit nodes of Plus, Natural and Flat.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::exact::exact_measure;
use crate::rational::{max_q, zero, Q};
use crate::schedule::{u_node, RateSchedule};
use crate::sets::expr::{flat_h, is_exact_class, Expr};
use crate::sets::localize::localize;
use crate::word::{double, repeat, word_label, words_of_len, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum ExitKind {
    Plus,
    Natural,
    Flat,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExitNode {
    pub level: usize,
    pub word: Word,
}

impl Serialize for ExitNode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExitNode", 2)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("word", &word_label(&self.word))?;
        st.end()
    }
}

/// Blocks `s̄⌢η⌢u(max{r, r_lh(s)·μ(A|s)})` of length at most `max_len`, in ⊴ order of `s` then `η`.
pub fn plus_blocks(a: &Expr, r: &Q, sched: &RateSchedule, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut n = 0;
    while 2 * n + 3 <= max_len {
        for s in words_of_len(n) {
            let mu = exact_measure(&localize(a, &s)).expect("exact A-slot");
            let thr = max_q(r, &(sched.value(n) * mu));
            let (_, u) = u_node(&thr).expect("threshold in [0,1)");
            if 2 * n + 2 + u.len() > max_len {
                continue;
            }
            for eta in [[0u8, 1], [1, 0]] {
                let mut w = double(&s);
                w.extend_from_slice(&eta);
                w.extend_from_slice(&u);
                out.push(w);
            }
        }
        n += 1;
    }
    out
}

/// Exit nodes up to length `max_len` (and at most `max_count` of them), level by level.
///
/// Plus nodes all have level 1. For Natural, level `n+1` nodes are `e⌢1⌢v` with `e` at level `n`;
/// for Flat they are `e⌢1^(h(n))⌢w` where `w` uses the threshold `r_(n+1)`.
pub fn exit_nodes(
    kind: ExitKind,
    a: &Expr,
    r: &Q,
    sched: &RateSchedule,
    max_len: usize,
    max_count: usize,
) -> Result<Vec<ExitNode>> {
    if !is_exact_class(a) {
        return Err(Error::domain("exit nodes need an exact A-slot"));
    }
    let level_r = |n: usize| -> Q {
        match kind {
            ExitKind::Plus => r.clone(),
            ExitKind::Natural => zero(),
            ExitKind::Flat => sched.value(n),
        }
    };
    let mut out: Vec<ExitNode> = Vec::new();
    let mut frontier: Vec<Word> = vec![Vec::new()];
    let mut level = 1;
    while !frontier.is_empty() && out.len() < max_count {
        let mut next = Vec::new();
        let sep: Word = match (kind, level) {
            (_, 1) => Vec::new(),
            (ExitKind::Natural, _) => vec![1],
            (ExitKind::Flat, _) => repeat(1, flat_h(sched, level - 1)),
            (ExitKind::Plus, _) => break,
        };
        let rl = level_r(level);
        for e in &frontier {
            let base = e.len() + sep.len();
            if base + 3 > max_len {
                continue;
            }
            for w in plus_blocks(a, &rl, sched, max_len - base) {
                let mut node = e.clone();
                node.extend_from_slice(&sep);
                node.extend_from_slice(&w);
                next.push(node);
            }
        }
        next.sort_by(|x, y| crate::word::tri_compare(x, y));
        for w in &next {
            if out.len() >= max_count {
                break;
            }
            out.push(ExitNode { level, word: w.clone() });
        }
        frontier = next;
        level += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::expr::{clopen_words, empty};
    use crate::word::{incompatible, is_prefix, parse_word};

    #[test]
    fn plus_empty_nodes() {
        let nodes = exit_nodes(ExitKind::Plus, &empty(), &zero(), &RateSchedule::default(), 7, 1000).unwrap();
        let words: Vec<String> = nodes.iter().map(|n| word_label(&n.word)).collect();
        assert_eq!(words[..2], ["011", "101"]);
        assert!(words.contains(&"11011".to_string()));
        assert!(nodes.iter().all(|n| n.word.ends_with(&[1]) && n.word.len() % 2 == 1));
    }

    #[test]
    fn natural_levels_nest() {
        let a = clopen_words([vec![0]]);
        let nodes = exit_nodes(ExitKind::Natural, &a, &zero(), &RateSchedule::default(), 12, 300).unwrap();
        assert!(nodes.iter().any(|n| n.word == parse_word("011").unwrap() && n.level == 1));
        for n in nodes.iter().filter(|n| n.level == 2) {
            let parents = nodes.iter().filter(|m| m.level == 1 && is_prefix(&m.word, &n.word)).count();
            assert_eq!(parents, 1);
        }
        for x in &nodes {
            for y in &nodes {
                let ok = (x.word == y.word && x.level == y.level)
                    || incompatible(&x.word, &y.word)
                    || (is_prefix(&x.word, &y.word) && x.level < y.level)
                    || (is_prefix(&y.word, &x.word) && y.level < x.level);
                assert!(ok);
            }
        }
    }
}
