#![allow(dead_code)]

use cantor_density::cli::{parse_expr, resolve_expr};
use cantor_density::measure::exact::exact_measure;
use cantor_density::rational::{pow2, Q};
use cantor_density::word::{Lasso, Word};
use cantor_density::Expr;
use num::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Twenty expressions covering every constructor.
pub const CATALOG: [&str; 20] = [
    "empty",
    "full",
    "clopen{0}",
    "clopen{01,1}",
    "clopen{00,11}",
    "O(3/5)",
    "Ostar(3/4)",
    "Ostar(5/16)",
    "pad(2, clopen{0})",
    "cat(01, clopen{1})",
    "oplus(clopen{0}, full)",
    "dbl full",
    "rake(n*1+1; full)",
    "rake(n*0+1; clopen{1})",
    "rakep(n*0+1; clopen{0})",
    "compl rake(n*1+1; full)",
    "dext(clopen{1}, 01, rake(n*1+1; full))",
    "plus(clopen{0}, 1/2)",
    "sum(clopen{1}, clopen{0})",
    "nat(clopen{0})",
];

pub fn catalog() -> Vec<(String, Expr)> {
    CATALOG.iter().map(|s| (s.to_string(), parse_expr(s).expect("catalog parses"))).collect()
}

pub fn expr(s: &str) -> Expr {
    resolve_expr(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn exact_catalog() -> Vec<(String, Expr)> {
    catalog().into_iter().filter(|(_, e)| exact_measure(e).is_some()).collect()
}

pub fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
    (0..len).map(|_| rng.gen_range(0..=1u8)).collect()
}

pub fn random_lasso(rng: &mut ChaCha8Rng, max_prefix: usize, max_cycle: usize) -> Lasso {
    let p = rng.gen_range(0..=max_prefix);
    let c = rng.gen_range(1..=max_cycle);
    let pre = random_word(rng, p);
    let cyc = random_word(rng, c);
    Lasso::new(pre, cyc).unwrap()
}

/// `1 − 2^(−k)` with `k` the least `h > 0` such that `r ≤ 1 − 2^(−h)`, by direct search.
pub fn o_measure_oracle(r: &Q) -> Q {
    let mut h = 1;
    while *r > Q::one() - pow2(-h) {
        h += 1;
    }
    Q::one() - pow2(-h)
}

/// Binary digits of `r` read off by doubling, summed back as `Σ 2^(−n−1)`.
pub fn dyadic_oracle(r: &Q) -> Q {
    let mut x = r.clone();
    let mut acc = Q::zero();
    let two = Q::from_integer(2.into());
    for n in 0..64 {
        x *= &two;
        if x >= Q::one() {
            x -= Q::one();
            acc += pow2(-(n + 1));
        }
    }
    acc
}
