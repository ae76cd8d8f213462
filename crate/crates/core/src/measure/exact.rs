//! Closed-form measures.

use std::collections::HashMap;

use num::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;

use crate::measure::layer::layer_exact;
use crate::rational::{half, one, pow2, zero, Q};
use crate::sets::expr::*;
use crate::sets::localize::localize_bit;

/// Depth to which boolean combinations are unfolded in search of an exact value.
const BOOL_DEPTH: usize = 6;
/// Largest number of distinct localizations handled by the linear solver for `W(T)`.
const WTREE_STATES: usize = 512;

static WTREE_MEMO: Lazy<Mutex<HashMap<Expr, Option<Q>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn exact_measure(e: &Expr) -> Option<Q> {
    match &**e {
        SetExpr::Empty | SetExpr::Point(_) | SetExpr::Double(_) => Some(zero()),
        SetExpr::Full => Some(one()),
        SetExpr::Clopen(c) => Some(c.measure()),
        SetExpr::O(r) => Some(o_tree(r).measure()),
        SetExpr::OStar(r) => Some(r.clone()),
        SetExpr::Concat(w, a) => Some(pow2(-(w.len() as i64)) * exact_measure(a)?),
        SetExpr::Complement(a) => Some(one() - exact_measure(a)?),
        SetExpr::Oplus(a, b) => Some((exact_measure(a)? + exact_measure(b)?) * half()),
        SetExpr::DisjointExtend(d, t, b) => Some(d.measure() + pow2(-(t.len() as i64)) * exact_measure(b)?),
        SetExpr::Pad(n, a) => {
            let m = exact_measure(a)?;
            Some(one() - pow2(-(*n as i64)) * (Q::from_integer(2.into()) - m))
        }
        SetExpr::Rake { pole, f, fam } => rake_measure(*pole, f, fam),
        SetExpr::Union(_, _) | SetExpr::Intersect(_, _) => bool_exact(e, BOOL_DEPTH),
        SetExpr::Layer(l) => layer_exact(l),
        SetExpr::WTree(_) => wtree_exact(e),
        SetExpr::Sparse(_) => None,
    }
}

fn bool_exact(e: &Expr, depth: usize) -> Option<Q> {
    match &**e {
        SetExpr::Union(_, _) | SetExpr::Intersect(_, _) => {
            if depth == 0 {
                return None;
            }
            let a = bool_exact(&localize_bit(e, 0), depth - 1)?;
            let b = bool_exact(&localize_bit(e, 1), depth - 1)?;
            Some((a + b) * half())
        }
        _ => exact_measure(e),
    }
}

/// `Σ_n 2^(−n−f(n)) μ(A_n)` for plain rakes and `1 − Σ_n 2^(−n−f(n))(1 − μ(A_n))` with a pole.
fn rake_measure(pole: bool, f: &crate::schedule::IntSchedule, fam: &SetFamily) -> Option<Q> {
    let term = |m: Q| if pole { one() - m } else { m };
    let (fam_start, period) = fam.period();
    let start = fam_start.max(f.head.len());
    let mut total = zero();
    for n in 0..start {
        let w = pow2(-(n as i64) - f.value(n) as i64);
        total += w * term(exact_measure(&fam.get(n))?);
    }
    // For n ≥ start: f(n) = a·n + b and A_n is periodic with the given period.
    let a1 = f.a as i64 + 1;
    let ratio = one() - pow2(-a1 * period as i64);
    for j in 0..period {
        let n = start + j;
        let w = pow2(-a1 * n as i64 - f.b as i64) / &ratio;
        total += w * term(exact_measure(&fam.get(n))?);
    }
    Some(if pole { one() - total } else { total })
}

/// Solve `x_T = ½μ(T) + ¼(x_{T|0} + x_{T|1})` over the distinct localizations of `T`.
fn wtree_exact(e: &Expr) -> Option<Q> {
    if let Some(v) = WTREE_MEMO.lock().get(e) {
        return v.clone();
    }
    let SetExpr::WTree(t0) = &**e else { return None };
    let mut index: HashMap<Expr, usize> = HashMap::new();
    let mut states: Vec<Expr> = Vec::new();
    let mut queue = vec![t0.clone()];
    index.insert(t0.clone(), 0);
    states.push(t0.clone());
    let mut edges: Vec<(Q, usize, usize)> = Vec::new();
    let mut qi = 0;
    while qi < queue.len() {
        let t = queue[qi].clone();
        qi += 1;
        let mu = exact_measure(&t)?;
        let mut kids = [0usize; 2];
        for b in 0..2u8 {
            let c = localize_bit(&t, b);
            let id = match index.get(&c) {
                Some(&i) => i,
                None => {
                    if states.len() >= WTREE_STATES {
                        let v = exact_measure(t0);
                        WTREE_MEMO.lock().insert(e.clone(), v.clone());
                        return v;
                    }
                    let i = states.len();
                    index.insert(c.clone(), i);
                    states.push(c.clone());
                    queue.push(c);
                    i
                }
            };
            kids[b as usize] = id;
        }
        edges.push((mu, kids[0], kids[1]));
    }
    let n = states.len();
    // Row i: x_i − ¼x_{k0} − ¼x_{k1} = ½μ_i, except for Empty/Full rows which are fixed.
    let mut m: Vec<Vec<Q>> = vec![vec![zero(); n + 1]; n];
    let quarter = pow2(-2);
    for (i, (mu, k0, k1)) in edges.iter().enumerate() {
        m[i][i] += one();
        if is_empty(&states[i]) {
            continue;
        }
        if is_full(&states[i]) {
            m[i][n] = one();
            continue;
        }
        m[i][*k0] -= &quarter;
        m[i][*k1] -= &quarter;
        m[i][n] = mu * half();
    }
    let sol = gauss(m)?;
    let v = Some(sol[0].clone());
    WTREE_MEMO.lock().insert(e.clone(), v.clone());
    v
}

pub(crate) fn gauss(mut m: Vec<Vec<Q>>) -> Option<Vec<Q>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        if !p.is_one() {
            for v in m[col].iter_mut() {
                *v = &*v / &p;
            }
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let fct = m[r][col].clone();
                for c in col..=n {
                    let sub = &fct * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::schedule::IntSchedule;

    #[test]
    fn rake_values() {
        let f = IntSchedule::affine(1, 1).unwrap();
        let r = rake(false, f.clone(), SetFamily::constant(full())).unwrap();
        assert_eq!(exact_measure(&r), Some(q(2, 3)));
        let g = IntSchedule::constant(1).unwrap();
        let p = rake(false, g, SetFamily::constant(full())).unwrap();
        assert_eq!(exact_measure(&p), Some(one()));
        let per = SetFamily::new(vec![], FamilyTail::Periodic(vec![full(), empty()])).unwrap();
        let r2 = rake(false, IntSchedule::constant(1).unwrap(), per).unwrap();
        // Σ_{n even} 2^(−n−1) = 2/3
        assert_eq!(exact_measure(&r2), Some(q(2, 3)));
    }

    #[test]
    fn padding_formula() {
        let a = make_ostar(q(1, 3)).unwrap();
        let p = pad(2, a).unwrap();
        assert_eq!(exact_measure(&p), Some(q(7, 12)));
    }

    #[test]
    fn wtree_full_and_clopen() {
        let w = wtree(clopen_words([vec![0]])).unwrap();
        assert_eq!(exact_measure(&w), Some(half()));
        let w = wtree(full()).unwrap();
        assert_eq!(exact_measure(&w), Some(one()));
    }
}
