//! Density sequences `μ(A|x↾n)` along ultimately periodic points and their verdicts.

use serde::Serialize;

use crate::measure::interval::measure_interval;
use crate::rational::{fmt_q, min_q, one, pow2, MeasureInterval, Q};
use crate::sets::expr::Expr;
use crate::sets::localize::localize;
use crate::word::Lasso;

/// Default certainty exponent `p`: density 1 means `lo > 1 − 2^(−p)` on the tail.
pub const CERTAINTY: u32 = 6;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DensityVerdict {
    ConvergesTo1,
    ConvergesTo0,
    BoundedAwayFrom1(Q),
    Inconclusive,
}

impl DensityVerdict {
    pub fn label(&self) -> String {
        match self {
            DensityVerdict::ConvergesTo1 => "ConvergesTo1".into(),
            DensityVerdict::ConvergesTo0 => "ConvergesTo0".into(),
            DensityVerdict::BoundedAwayFrom1(b) => format!("BoundedAwayFrom1({})", fmt_q(b)),
            DensityVerdict::Inconclusive => "Inconclusive".into(),
        }
    }

    /// Density 1 is certified.
    pub fn is_one(&self) -> bool {
        matches!(self, DensityVerdict::ConvergesTo1)
    }

    /// Density is certified to differ from 1.
    pub fn is_not_one(&self) -> bool {
        matches!(self, DensityVerdict::ConvergesTo0 | DensityVerdict::BoundedAwayFrom1(_))
    }
}

impl Serialize for DensityVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub point: Lasso,
    pub values: Vec<MeasureInterval>,
    pub verdict: DensityVerdict,
}

/// `values(i) = measure_interval(localize(e, x↾i), budget − i)` for `i ≤ n`.
pub fn density_sequence(e: &Expr, x: &Lasso, n: usize, budget: u32) -> DensityReport {
    density_sequence_with(e, x, n, budget, CERTAINTY)
}

pub fn density_sequence_with(e: &Expr, x: &Lasso, n: usize, budget: u32, p: u32) -> DensityReport {
    let mut values = Vec::with_capacity(n + 1);
    let mut cur = e.clone();
    for i in 0..=n {
        if i > 0 {
            cur = localize(&cur, &[x.bit(i - 1)]);
        }
        values.push(measure_interval(&cur, budget.saturating_sub(i as u32)));
    }
    let verdict = verdict_of(&values, p);
    DensityReport { point: x.clone(), values, verdict }
}

/// Like [`density_sequence_with`], but every term is refined `depth` levels below its own node.
pub fn density_sequence_rel(e: &Expr, x: &Lasso, n: usize, depth: u32, p: u32) -> DensityReport {
    let mut values = Vec::with_capacity(n + 1);
    let mut cur = e.clone();
    for i in 0..=n {
        if i > 0 {
            cur = localize(&cur, &[x.bit(i - 1)]);
        }
        values.push(measure_interval(&cur, depth));
    }
    let verdict = verdict_of(&values, p);
    DensityReport { point: x.clone(), values, verdict }
}

/// Verdict from the tail `[n/2, n]` of a density sequence.
///
/// `ConvergesTo0` when every upper bound is below `2^(−p)`, `ConvergesTo1` when every lower bound
/// exceeds `1 − 2^(−p)`, and `BoundedAwayFrom1(b)` when the least upper bound `b < 1` seen on the
/// third quarter is met again on the last quarter.
pub fn verdict_of(values: &[MeasureInterval], p: u32) -> DensityVerdict {
    if values.is_empty() {
        return DensityVerdict::Inconclusive;
    }
    let n = values.len() - 1;
    let tail = &values[n / 2..];
    let eps = pow2(-(p as i64));
    if tail.iter().all(|v| v.hi < eps) {
        return DensityVerdict::ConvergesTo0;
    }
    let top = one() - &eps;
    if tail.iter().all(|v| v.lo > top) {
        return DensityVerdict::ConvergesTo1;
    }
    let split = (tail.len() / 2).max(1).min(tail.len());
    let (q3, q4) = tail.split_at(split);
    let min_hi = |s: &[MeasureInterval]| s.iter().map(|v| v.hi.clone()).reduce(|a, b| min_q(&a, &b));
    if let (Some(b3), Some(b4)) = (min_hi(q3), min_hi(q4)) {
        if b3 < one() && b4 <= b3 {
            return DensityVerdict::BoundedAwayFrom1(b3);
        }
    }
    DensityVerdict::Inconclusive
}

/// Verdict from `density_sequence(e, x, budget/2, budget)`.
pub fn density_verdict(e: &Expr, x: &Lasso, budget: u32) -> DensityVerdict {
    density_sequence(e, x, (budget / 2) as usize, budget).verdict
}

pub fn density_verdict_with(e: &Expr, x: &Lasso, budget: u32, p: u32) -> DensityVerdict {
    density_sequence_with(e, x, (budget / 2) as usize, budget, p).verdict
}
