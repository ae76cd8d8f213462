//! Checking reductions on ultimately periodic plays.

use serde::Serialize;

use crate::games::engine::{play, GameConfig, GameSet, PlayerI, Strategy};
use crate::games::strategies::Reduction;
use crate::sets::member::Verdict;
use crate::word::{enumerate_lassos, Lasso};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum RowStatus {
    Agree,
    Unknown,
    Contradiction,
    Violation,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionRow {
    pub point: Lasso,
    pub output: Option<Lasso>,
    pub domain: Verdict,
    pub target: Verdict,
    pub passes: usize,
    pub status: RowStatus,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub strategy: String,
    pub params: serde_json::Value,
    pub domain: String,
    pub target: String,
    pub horizon: usize,
    pub agreements: usize,
    pub unknowns: usize,
    pub contradictions: usize,
    pub violations: usize,
    pub rows: Vec<ReductionRow>,
}

impl ReductionReport {
    pub fn ok(&self) -> bool {
        self.contradictions == 0 && self.violations == 0
    }
}

/// Plays `strategy` against every point and compares `x ∈ A` with `y ∈ B` for II's output `y`.
pub fn verify_reduction(strategy: &dyn Strategy, a: &GameSet, b: &GameSet, points: &[Lasso], horizon: usize) -> ReductionReport {
    let cfg = GameConfig { kind: strategy.kind(), set_i: a.clone(), set_ii: b.clone(), rounds: horizon };
    let mut rep = ReductionReport {
        strategy: strategy.name(),
        params: strategy.params(),
        domain: a.to_string(),
        target: b.to_string(),
        horizon,
        agreements: 0,
        unknowns: 0,
        contradictions: 0,
        violations: 0,
        rows: Vec::with_capacity(points.len()),
    };
    for x in points {
        let row = match play(&cfg, PlayerI::Point(x.clone()), strategy) {
            Ok(t) => {
                let status = match (t.verdict_i, t.verdict_ii) {
                    (Verdict::Unknown, _) | (_, Verdict::Unknown) => RowStatus::Unknown,
                    (p, q) if p == q => RowStatus::Agree,
                    _ => RowStatus::Contradiction,
                };
                ReductionRow {
                    point: x.clone(),
                    output: t.output,
                    domain: t.verdict_i,
                    target: t.verdict_ii,
                    passes: t.passes.len(),
                    status,
                    error: None,
                }
            }
            Err(e) => ReductionRow {
                point: x.clone(),
                output: None,
                domain: Verdict::Unknown,
                target: Verdict::Unknown,
                passes: 0,
                status: RowStatus::Violation,
                error: Some(e.to_string()),
            },
        };
        match row.status {
            RowStatus::Agree => rep.agreements += 1,
            RowStatus::Unknown => rep.unknowns += 1,
            RowStatus::Contradiction => rep.contradictions += 1,
            RowStatus::Violation => rep.violations += 1,
        }
        rep.rows.push(row);
    }
    rep
}

pub fn verify(red: &Reduction, points: &[Lasso], horizon: usize) -> ReductionReport {
    verify_reduction(red.strategy.as_ref(), &red.domain, &red.target, points, horizon)
}

const HANDPICKED: [&str; 12] = [
    "00111(0)",
    "0011(0)",
    "0001111(01)",
    "011(0)",
    "0110(1)",
    "010(0)",
    "000101(1)",
    "0111(0)",
    "01110110(1)",
    "011100(0)",
    "01(1)",
    "1101(10)",
];

/// Thirty fixed lassos: the first eighteen canonical lassos, then plays through tines, breaks,
/// exit nodes and escapes of the catalog constructions.
pub fn catalog_points() -> Vec<Lasso> {
    let mut out: Vec<Lasso> = enumerate_lassos(3, 2).into_iter().take(18).collect();
    for s in HANDPICKED {
        let l = Lasso::parse(s).expect("valid catalog lasso");
        if !out.contains(&l) {
            out.push(l);
        }
    }
    let mut extra = enumerate_lassos(3, 3).into_iter();
    while out.len() < 30 {
        let l = extra.next().expect("enough lassos");
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::strategies::{builtin_reduction, StrategyParams};

    #[test]
    fn catalog_has_thirty() {
        let pts = catalog_points();
        assert_eq!(pts.len(), 30);
    }

    #[test]
    fn rake_agree_at_zero() {
        let red = builtin_reduction("rake_bwd", &StrategyParams::catalog()).unwrap();
        let rep = verify(&red, &[Lasso::constant(0)], 32);
        assert_eq!(rep.rows[0].domain, Verdict::Out);
        assert_eq!(rep.rows[0].status, RowStatus::Agree);
    }
}
