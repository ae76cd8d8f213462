//! The reduction of `P₃` to density points: `φ` on finite 0-1 matrices and its traces.

use std::collections::VecDeque;

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::interval::measure_interval;
use crate::measure::tree::{rho_bounds_strict, upper_is_strict};
use crate::rational::{one, pow2, MeasureInterval, Q};
use crate::sets::expr::{Expr, SetExpr, SparseRef};
use crate::sets::localize::localize;
use crate::word::{is_prefix, word_label, Word};

/// A square 0-1 matrix `a(j, i)`, `j, i < order`; `j` indexes rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix01 {
    order: usize,
    entries: Vec<bool>,
}

impl Matrix01 {
    pub fn new(order: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for j in 0..order {
            for i in 0..order {
                entries.push(f(j, i));
            }
        }
        Matrix01 { order, entries }
    }

    pub fn zero(order: usize) -> Self {
        Matrix01::new(order, |_, _| false)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, j: usize, i: usize) -> bool {
        self.entries[j * self.order + i]
    }

    /// The upper-left `k × k` corner.
    pub fn restrict(&self, k: usize) -> Matrix01 {
        let k = k.min(self.order);
        Matrix01::new(k, |j, i| self.get(j, i))
    }

    /// Least `j ≤ n` with `a(j, n) = 1`, for the last column `n = order − 1`.
    pub fn last_column_hit(&self) -> Option<usize> {
        let n = self.order.checked_sub(1)?;
        (0..=n).find(|&j| self.get(j, n))
    }
}

/// An infinite 0-1 matrix: row `k` has ones exactly at `m < bounds[k]`, except an optional
/// row that is all ones.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Generator {
    pub bounds: Vec<usize>,
    pub infinite_row: Option<usize>,
}

impl Generator {
    pub fn zero() -> Self {
        Generator { bounds: Vec::new(), infinite_row: None }
    }

    pub fn entry(&self, j: usize, m: usize) -> bool {
        self.infinite_row == Some(j) || m < self.bounds.get(j).copied().unwrap_or(0)
    }

    pub fn in_p3(&self) -> bool {
        self.infinite_row.is_none()
    }

    /// `M_k = max{m_0, …, m_k}`.
    pub fn big_m(&self, k: usize) -> usize {
        (0..=k).map(|j| self.bounds.get(j).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn matrix(&self, n: usize) -> Matrix01 {
        Matrix01::new(n, |j, i| self.entry(j, i))
    }

    /// `zero`, `bounds:3,5,2`, `row:1` or `row:1;bounds:2,0`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut g = Generator::zero();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "zero" {
                continue;
            }
            let (key, val) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("generator part `{part}` is not key:value")))?;
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad number `{s}` in generator")));
            match key.trim() {
                "bounds" => g.bounds = val.split(',').map(num).collect::<Result<_>>()?,
                "row" => g.infinite_row = Some(num(val)?),
                k => return Err(Error::Parse(format!("unknown generator key `{k}`"))),
            }
        }
        Ok(g)
    }
}

#[derive(Clone, Debug)]
pub struct P3Config {
    pub budget: u32,
    pub max_nodes: usize,
}

impl Default for P3Config {
    fn default() -> Self {
        P3Config { budget: 32, max_nodes: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct P3Step {
    pub n: usize,
    pub case: u8,
    pub j0: Option<usize>,
    pub node: String,
    pub len: usize,
    pub rho_lo: u32,
    pub rho: Option<u32>,
    pub path_min: u32,
    #[serde(skip)]
    pub word: Word,
}

#[derive(Clone, Debug, Serialize)]
pub struct P3Trace {
    pub generator: Generator,
    pub steps: Vec<P3Step>,
    pub error: Option<String>,
}

impl P3Trace {
    pub fn last_node(&self) -> Word {
        self.steps.last().map(|s| s.word.clone()).unwrap_or_default()
    }
}

struct Node {
    m: MeasureInterval,
    lo: u32,
    hi: Option<u32>,
}

impl Node {
    fn exact(&self) -> Option<u32> {
        (self.hi == Some(self.lo)).then_some(self.lo)
    }
}

struct Engine<'a> {
    e: &'a Expr,
    cfg: &'a P3Config,
}

fn level_floor(j: u32) -> Q {
    one() - pow2(-(j as i64))
}

impl Engine<'_> {
    fn node(&self, w: &[u8]) -> Result<Node> {
        let loc = localize(self.e, w);
        let m = measure_interval(&loc, self.cfg.budget);
        if m.hi.is_zero() {
            return Err(Error::Domain(format!("node {} left the positive-measure tree", word_label(w))));
        }
        if m.lo >= one() {
            return Err(Error::Domain(format!("μ = 1 at node {}, so ρ is undefined", word_label(w))));
        }
        let (lo, hi) = rho_bounds_strict(&m, upper_is_strict(&loc));
        Ok(Node { m, lo, hi })
    }

    /// BFS over proper extensions of `s` through nodes with `lo ≥ 1 − 2^(−floor)`; the first node
    /// accepted by `done` wins.
    fn bfs(&self, s: &[u8], floor: u32, done: impl Fn(&Node) -> bool, what: &str) -> Result<Word> {
        self.bfs_where(s, floor, done, |_| true, what)
    }

    fn bfs_where(
        &self,
        s: &[u8],
        floor: u32,
        done: impl Fn(&Node) -> bool,
        keep: impl Fn(&[u8]) -> bool,
        what: &str,
    ) -> Result<Word> {
        let thr = level_floor(floor);
        let mut queue: VecDeque<Word> = VecDeque::from([s.to_vec()]);
        let mut visited = 0;
        while let Some(u) = queue.pop_front() {
            for b in 0..2u8 {
                let mut t = u.clone();
                t.push(b);
                if !keep(&t) {
                    continue;
                }
                visited += 1;
                if visited > self.cfg.max_nodes {
                    return Err(Error::Budget(format!("{what} from {} exceeded {} nodes", word_label(s), self.cfg.max_nodes)));
                }
                let nd = match self.node(&t) {
                    Ok(nd) => nd,
                    Err(Error::Domain(_)) => continue,
                    Err(e) => return Err(e),
                };
                if nd.m.lo < thr {
                    continue;
                }
                if done(&nd) {
                    return Ok(t);
                }
                queue.push_back(t);
            }
        }
        Err(Error::Budget(format!("{what} from {}: no admissible extension", word_label(s))))
    }

    /// Proper extension with certified `ρ = j0` and every intermediate node at level `≥ floor`.
    ///
    /// For sparse sets the upper end of an enclosure is below 1 only above a generated cone, so
    /// a certified level can only be found there and the search is restricted to those nodes.
    fn reach(&self, s: &[u8], j0: u32, floor: u32) -> Result<Word> {
        match &**self.e {
            SetExpr::Sparse(SparseRef { data, at }) if data.strict_upper() => {
                let on_cone_path = |t: &[u8]| {
                    let mut full = at.clone();
                    full.extend_from_slice(t);
                    data.has_cone_below(&full)
                };
                if !on_cone_path(s) {
                    return Err(Error::Budget(format!(
                        "no generated cone below {} within {} nodes",
                        word_label(s),
                        data.generated()
                    )));
                }
                self.bfs_where(s, floor, |nd| nd.exact() == Some(j0), on_cone_path, "reach")
            }
            _ => self.bfs(s, floor, |nd| nd.exact() == Some(j0), "reach"),
        }
    }

    fn step(&self, a: &Matrix01, prev: &[u8]) -> Result<P3Step> {
        let n = a.order() - 1;
        let p = self.node(prev)?;
        let (case, j0, t) = match a.last_column_hit() {
            None => {
                let floor = p.lo.min(n as u32 + 1);
                let target = level_floor(n as u32 + 1);
                (1, None, self.bfs(prev, floor, |nd| nd.m.lo >= target, "climb")?)
            }
            Some(j0) => {
                let floor = p.lo.min(j0 as u32);
                (2, Some(j0), self.reach(prev, j0 as u32, floor)?)
            }
        };
        let mut path_min = u32::MAX;
        for l in prev.len()..=t.len() {
            path_min = path_min.min(self.node(&t[..l])?.lo);
        }
        let nd = self.node(&t)?;
        Ok(P3Step { n, case, j0, node: word_label(&t), len: t.len(), rho_lo: nd.lo, rho: nd.exact(), path_min, word: t })
    }
}

/// `φ(a)`, built through `φ(a↾1×1) ⊂ φ(a↾2×2) ⊂ …`.
pub fn p3_phi(e: &Expr, a: &Matrix01, cfg: &P3Config) -> Result<Word> {
    let eng = Engine { e, cfg };
    let mut cur = Vec::new();
    for k in 1..=a.order() {
        cur = eng.step(&a.restrict(k), &cur)?.word;
    }
    Ok(cur)
}

/// `φ(z↾n×n)`.
pub fn p3_reduce_prefix(e: &Expr, z: &Generator, n: usize, cfg: &P3Config) -> Result<Word> {
    p3_phi(e, &z.matrix(n), cfg)
}

/// Steps `φ(z↾k×k)` for `k = 1..=steps`; a failing step ends the trace with its error.
pub fn p3_trace(e: &Expr, z: &Generator, steps: usize, cfg: &P3Config) -> P3Trace {
    let eng = Engine { e, cfg };
    let mut out = P3Trace { generator: z.clone(), steps: Vec::new(), error: None };
    let mut cur = Vec::new();
    for k in 1..=steps {
        match eng.step(&z.matrix(k), &cur) {
            Ok(st) => {
                debug_assert!(is_prefix(&cur, &st.word) && st.word.len() > cur.len());
                cur = st.word.clone();
                out.steps.push(st);
            }
            Err(e) => {
                out.error = Some(e.to_string());
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        let g = Generator::parse("row:1;bounds:3,5").unwrap();
        assert!(!g.in_p3());
        assert!(g.entry(1, 1000) && g.entry(0, 2) && !g.entry(0, 3));
        assert_eq!(g.big_m(1), 5);
        let m = g.matrix(4);
        assert_eq!(m.restrict(2).order(), 2);
        assert_eq!(m.last_column_hit(), Some(1));
        assert_eq!(Matrix01::zero(3).last_column_hit(), None);
        assert!(Generator::parse("cols:1").is_err());
    }
}
