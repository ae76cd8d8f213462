//! Finite binary words, ultimately periodic points and the ⊴ well-order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite binary word. Every entry is 0 or 1.
pub type Word = Vec<u8>;

pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s == "_" || s == "ε" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("invalid bit {c:?} in word {s:?}"))),
        })
        .collect()
}

pub fn word_string(w: &[u8]) -> String {
    w.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Display form where the empty word is shown as `_`.
pub fn word_label(w: &[u8]) -> String {
    if w.is_empty() {
        "_".to_string()
    } else {
        word_string(w)
    }
}

pub fn repeat(bit: u8, n: usize) -> Word {
    vec![bit; n]
}

pub fn cat(a: &[u8], b: &[u8]) -> Word {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

pub fn is_prefix(p: &[u8], w: &[u8]) -> bool {
    p.len() <= w.len() && &w[..p.len()] == p
}

/// Neither word extends the other.
pub fn incompatible(a: &[u8], b: &[u8]) -> bool {
    !is_prefix(a, b) && !is_prefix(b, a)
}

pub fn double(w: &[u8]) -> Word {
    w.iter().flat_map(|&b| [b, b]).collect()
}

/// Length first, then lexicographic.
pub fn tri_compare(s: &[u8], t: &[u8]) -> Ordering {
    s.len().cmp(&t.len()).then_with(|| s.cmp(t))
}

/// All words of length `n` in lexicographic order.
pub fn words_of_len(n: usize) -> impl Iterator<Item = Word> {
    assert!(n < 63, "word length too large to enumerate");
    (0u64..(1u64 << n)).map(move |i| (0..n).map(|j| ((i >> (n - 1 - j)) & 1) as u8).collect())
}

/// All words of length ≤ `n` in ⊴ order.
pub fn words_up_to(n: usize) -> impl Iterator<Item = Word> {
    (0..=n).flat_map(words_of_len)
}

/// The `i`-th word in ⊴ order (ε, 0, 1, 00, ...).
pub fn nth_word(i: u64) -> Word {
    let len = 63 - (i + 1).leading_zeros() as usize;
    let rank = i + 1 - (1u64 << len);
    (0..len).map(|j| ((rank >> (len - 1 - j)) & 1) as u8).collect()
}

/// An ultimately periodic point `prefix⌢cycle⌢cycle⌢…`, kept in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Lasso {
    prefix: Word,
    cycle: Word,
}

impl Lasso {
    pub fn new(prefix: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Domain("lasso cycle must be nonempty".into()));
        }
        if prefix.iter().chain(cycle.iter()).any(|&b| b > 1) {
            return Err(Error::Domain("lasso bits must be 0 or 1".into()));
        }
        Ok(Self::canonical(prefix, cycle))
    }

    pub fn constant(bit: u8) -> Self {
        Lasso { prefix: Vec::new(), cycle: vec![bit] }
    }

    fn canonical(mut prefix: Word, mut cycle: Word) -> Self {
        let n = cycle.len();
        for d in 1..=n {
            if n % d == 0 && (d..n).all(|i| cycle[i] == cycle[i - d]) {
                cycle.truncate(d);
                break;
            }
        }
        while let (Some(&p), Some(&c)) = (prefix.last(), cycle.last()) {
            if p != c {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        Lasso { prefix, cycle }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[u8] {
        &self.cycle
    }

    pub fn bit(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn take(&self, n: usize) -> Word {
        (0..n).map(|i| self.bit(i)).collect()
    }

    pub fn drop(&self, n: usize) -> Lasso {
        if n <= self.prefix.len() {
            Self::canonical(self.prefix[n..].to_vec(), self.cycle.clone())
        } else {
            let mut c = self.cycle.clone();
            let k = (n - self.prefix.len()) % c.len();
            c.rotate_left(k);
            Self::canonical(Vec::new(), c)
        }
    }

    /// `w⌢self`.
    pub fn prepend(&self, w: &[u8]) -> Lasso {
        Self::canonical(cat(w, &self.prefix), self.cycle.clone())
    }

    pub fn starts_with(&self, w: &[u8]) -> bool {
        w.iter().enumerate().all(|(i, &b)| self.bit(i) == b)
    }

    /// Every bit from position `from` on equals `bit`.
    pub fn is_eventually_const_from(&self, from: usize, bit: u8) -> bool {
        self.cycle.iter().all(|&c| c == bit) && (from..self.prefix.len()).all(|i| self.prefix[i] == bit)
    }

    /// Length after which the point is periodic with period `cycle().len()`.
    pub fn horizon(&self) -> usize {
        self.prefix.len() + 2 * self.cycle.len() + 2
    }

    pub fn double(&self) -> Lasso {
        Self::canonical(double(&self.prefix), double(&self.cycle))
    }

    /// Index of the first pair `(x(2i), x(2i+1))` with distinct entries.
    pub fn first_break(&self) -> Option<usize> {
        let pairs = self.horizon() / 2 + 1;
        (0..pairs).find(|&i| self.bit(2 * i) != self.bit(2 * i + 1))
    }

    pub fn undouble(&self) -> Option<Lasso> {
        if self.first_break().is_some() {
            return None;
        }
        let p0 = self.prefix.len().div_ceil(2);
        let pre = (0..p0).map(|i| self.bit(2 * i)).collect();
        let cyc = (p0..p0 + self.cycle.len()).map(|i| self.bit(2 * i)).collect();
        Some(Self::canonical(pre, cyc))
    }

    pub fn parse(s: &str) -> Result<Lasso> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| Error::Parse(format!("lasso {s:?} needs prefix(cycle)")))?;
        if !s.ends_with(')') {
            return Err(Error::Parse(format!("lasso {s:?} needs a closing parenthesis")));
        }
        let prefix = parse_word(&s[..open])?;
        let cycle = parse_word(&s[open + 1..s.len() - 1])?;
        Lasso::new(prefix, cycle)
    }
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", word_string(&self.prefix), word_string(&self.cycle))
    }
}

impl Serialize for Lasso {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// All canonical lassos with `|prefix| ≤ p` and `|cycle| ≤ c`, deduplicated, in a fixed order.
pub fn enumerate_lassos(p: usize, c: usize) -> Vec<Lasso> {
    let mut out: Vec<Lasso> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for cl in 1..=c {
        for pl in 0..=p {
            for pre in words_of_len(pl) {
                for cyc in words_of_len(cl) {
                    let l = Lasso::canonical(pre.clone(), cyc);
                    if seen.insert(l.clone()) {
                        out.push(l);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_examples() {
        assert!(double(&[]).is_empty());
        assert_eq!(double(&[0, 1]), vec![0, 0, 1, 1]);
        let l = Lasso::new(vec![0], vec![1]).unwrap();
        assert_eq!(l.double(), Lasso::new(vec![0, 0], vec![1, 1]).unwrap());
        assert_eq!(l.double().to_string(), "00(1)");
    }

    #[test]
    fn tri_order() {
        assert_eq!(tri_compare(&[0], &[1]), Ordering::Less);
        assert_eq!(tri_compare(&[1], &[0, 0]), Ordering::Less);
        assert_eq!(tri_compare(&[1, 0], &[1, 0]), Ordering::Equal);
        let all: Vec<Word> = words_up_to(8).collect();
        for (i, w) in all.iter().enumerate() {
            assert_eq!(&nth_word(i as u64), w);
        }
        for pair in all.windows(2) {
            assert_eq!(tri_compare(&pair[0], &pair[1]), Ordering::Less);
        }
    }

    #[test]
    fn trichotomy_exhaustive() {
        let all: Vec<Word> = words_up_to(5).collect();
        for s in &all {
            for t in &all {
                if s == t {
                    continue;
                }
                let a = is_prefix(s, t);
                let b = is_prefix(t, s);
                let c = incompatible(s, t);
                assert_eq!(a as u8 + b as u8 + c as u8, 1);
            }
        }
    }

    #[test]
    fn lasso_canonical() {
        let l = Lasso::new(vec![0, 1, 0, 1], vec![0, 1, 0, 1]).unwrap();
        assert!(l.prefix().is_empty());
        assert_eq!(l.cycle(), &[0, 1]);
        let z = Lasso::parse("000(0)").unwrap();
        assert_eq!(z, Lasso::constant(0));
        assert_eq!(Lasso::parse("1(0)").unwrap().to_string(), "1(0)");
        assert!(Lasso::parse("1()").is_err());
    }

    #[test]
    fn lasso_drop_and_undouble() {
        let l = Lasso::parse("011(01)").unwrap();
        for n in 0..10 {
            let d = l.drop(n);
            for i in 0..20 {
                assert_eq!(d.bit(i), l.bit(n + i));
            }
        }
        let x = Lasso::parse("1(011)").unwrap();
        let y = x.double();
        assert_eq!(y.undouble().unwrap(), x);
        assert!(Lasso::parse("01(1)").unwrap().undouble().is_none());
        assert_eq!(Lasso::parse("0(1)").unwrap().double().first_break(), None);
    }
}
