//! Canonical finite antichains of cylinders.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::rational::{pow2, zero, Q};
use crate::word::{cat, incompatible, is_prefix, tri_compare, word_label, Lasso, Word};

/// A clopen set `⋃ N_t`, stored as a canonical antichain of terminals in ⊴ order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ClopenTree {
    terms: Vec<Word>,
}

impl ClopenTree {
    pub fn empty() -> Self {
        ClopenTree { terms: Vec::new() }
    }

    pub fn full() -> Self {
        ClopenTree { terms: vec![Vec::new()] }
    }

    pub fn cylinder(w: &[u8]) -> Self {
        ClopenTree { terms: vec![w.to_vec()] }
    }

    pub fn terminals(&self) -> &[Word] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_empty()
    }

    pub fn depth(&self) -> usize {
        self.terms.iter().map(|t| t.len()).max().unwrap_or(0)
    }

    pub fn measure(&self) -> Q {
        let mut s = zero();
        for t in &self.terms {
            s += pow2(-(t.len() as i64));
        }
        s
    }

    pub fn contains_point(&self, x: &Lasso) -> bool {
        self.terms.iter().any(|t| x.starts_with(t))
    }

    /// Every point through `w` lies in the set.
    pub fn covers(&self, w: &[u8]) -> bool {
        self.terms.iter().any(|t| is_prefix(t, w))
    }

    /// `N_w` is disjoint from the set.
    pub fn avoids(&self, w: &[u8]) -> bool {
        self.terms.iter().all(|t| incompatible(t, w))
    }

    pub fn localize(&self, w: &[u8]) -> ClopenTree {
        if self.covers(w) {
            return ClopenTree::full();
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| is_prefix(w, t))
            .map(|t| t[w.len()..].to_vec())
            .collect();
        ClopenTree { terms }
    }

    /// `{w⌢x : x ∈ self}`.
    pub fn prepend(&self, w: &[u8]) -> ClopenTree {
        ClopenTree { terms: self.terms.iter().map(|t| cat(w, t)).collect() }
    }

    pub fn complement(&self) -> ClopenTree {
        let mut out = Vec::new();
        complement_into(&self.terms, &mut Vec::new(), &mut out);
        make_clopen(out)
    }

    pub fn union(&self, o: &ClopenTree) -> ClopenTree {
        make_clopen(self.terms.iter().chain(o.terms.iter()).cloned())
    }

    pub fn intersect(&self, o: &ClopenTree) -> ClopenTree {
        let mut out = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                if is_prefix(a, b) {
                    out.push(b.clone());
                } else if is_prefix(b, a) {
                    out.push(a.clone());
                }
            }
        }
        make_clopen(out)
    }

    pub fn difference(&self, o: &ClopenTree) -> ClopenTree {
        self.intersect(&o.complement())
    }

    pub fn sym_diff(&self, o: &ClopenTree) -> ClopenTree {
        self.difference(o).union(&o.difference(self))
    }

    pub fn is_subset(&self, o: &ClopenTree) -> bool {
        self.difference(o).is_empty()
    }
}

fn complement_into(terms: &[Word], prefix: &mut Word, out: &mut Vec<Word>) {
    if terms.iter().any(|t| is_prefix(t, prefix)) {
        return;
    }
    if !terms.iter().any(|t| is_prefix(prefix, t)) {
        out.push(prefix.clone());
        return;
    }
    for b in [0u8, 1] {
        prefix.push(b);
        complement_into(terms, prefix, out);
        prefix.pop();
    }
}

/// Canonical antichain with the same union: drop covered words, then merge sibling pairs.
pub fn make_clopen(cylinders: impl IntoIterator<Item = Word>) -> ClopenTree {
    let mut set: BTreeSet<Word> = cylinders.into_iter().collect();
    let all: Vec<Word> = set.iter().cloned().collect();
    for w in &all {
        if all.iter().any(|p| p != w && is_prefix(p, w)) {
            set.remove(w);
        }
    }
    loop {
        let sib = set.iter().find(|w| {
            if let Some((&last, init)) = w.split_last() {
                let mut s = init.to_vec();
                s.push(1 - last);
                set.contains(&s)
            } else {
                false
            }
        });
        let Some(w) = sib.cloned() else { break };
        let parent = w[..w.len() - 1].to_vec();
        let mut s = parent.clone();
        s.push(1 - w[w.len() - 1]);
        set.remove(&w);
        set.remove(&s);
        set.insert(parent);
    }
    let mut terms: Vec<Word> = set.into_iter().collect();
    terms.sort_by(|a, b| tri_compare(a, b));
    ClopenTree { terms }
}

impl fmt::Display for ClopenTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| word_label(t)).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for ClopenTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.terms.iter().map(|t| word_label(t)).collect();
        parts.serialize(s)
    }
}
