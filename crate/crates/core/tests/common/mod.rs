//! Brute-force oracles shared by the integration tests. They work from their own block
//! descriptions and only use the library to build the group under test.

#![allow(dead_code)]

use oag_core::group::{ConvexSubgroup, Element, Group};
use rand::Rng;

/// `∞` in oracle exponents.
pub const INF: u64 = u64::MAX;

/// An archimedean block as the oracle sees it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum B {
    Z,
    Q,
    /// `dense{p:e, ...}` with default exponent 0; `e = INF` for `inf`.
    Dense(Vec<(u64, u64)>),
}

impl B {
    pub fn exp(&self, p: u64) -> u64 {
        match self {
            B::Z => 1,
            B::Q => 0,
            B::Dense(pairs) => pairs.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e),
        }
    }

    pub fn dsl(&self) -> String {
        match self {
            B::Z => "Z".into(),
            B::Q => "Q".into(),
            B::Dense(pairs) => {
                let items: Vec<String> = pairs
                    .iter()
                    .map(|&(p, e)| {
                        if e == INF {
                            format!("{p}:inf")
                        } else {
                            format!("{p}:{e}")
                        }
                    })
                    .collect();
                format!("dense{{{}}}", items.join(","))
            }
        }
    }
}

pub fn lex_dsl(blocks: &[B]) -> String {
    let items: Vec<String> = blocks.iter().map(B::dsl).collect();
    format!("lex({})", items.join(", "))
}

pub fn build(blocks: &[B]) -> Group {
    oag_core::parse(&lex_dsl(blocks)).expect("oracle blocks parse")
}

pub fn tail(g: &Group, c: usize) -> ConvexSubgroup {
    g.tail(c).expect("cut in range")
}

pub fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn vp(k: i64, p: u64) -> u32 {
    if k == 0 {
        return u32::MAX;
    }
    let (mut k, p) = (k.unsigned_abs(), p);
    let mut e = 0;
    while k % p == 0 {
        k /= p;
        e += 1;
    }
    e
}

/// `k·e_i ∈ n·B_i` under the designated-generator model.
pub fn component_in_ng(b: &B, k: i64, n: u64) -> bool {
    prime_factors(n)
        .into_iter()
        .all(|(p, a)| b.exp(p) == 0 || vp(k, p) >= a)
}

/// `x ∈ tail(c) + nG`.
pub fn in_tail_plus_ng(blocks: &[B], x: &[i64], c: usize, n: u64) -> bool {
    (0..c.min(blocks.len())).all(|i| component_in_ng(&blocks[i], x[i], n))
}

/// `H_n(x)` as a cut index: the largest tail `H` with `x ∉ H + nG`, or `0 = tail(len)` if `x ∈ nG`.
pub fn hn_cut(blocks: &[B], x: &[i64], n: u64) -> usize {
    (0..=blocks.len())
        .find(|&c| !in_tail_plus_ng(blocks, x, c, n))
        .unwrap_or(blocks.len())
}

/// Cuts of the definable convex subgroups other than `G`: `0` and the cut after every block
/// that is not `q`-divisible for some prime `q`, found as `H_q(e_i)`.
pub fn definable_cuts(blocks: &[B], primes: &[u64]) -> Vec<usize> {
    let n = blocks.len();
    let mut cuts = vec![n];
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        cuts.extend(primes.iter().map(|&q| hn_cut(blocks, &e, q)));
    }
    cuts.sort_unstable();
    cuts.dedup();
    cuts.retain(|&c| c > 0);
    cuts
}

/// Exponent of `p` in `[tail(a)/tail(b) : p·(tail(a)/tail(b))]`, `INF` when infinite.
pub fn quotient_exp(blocks: &[B], a: usize, b: usize, p: u64) -> u64 {
    blocks[a..b].iter().map(|x| x.exp(p)).fold(0, |acc, e| {
        if acc == INF || e == INF {
            INF
        } else {
            acc + e
        }
    })
}

/// `k_p` by brute force: the longest chain `H_0 ⊊ … ⊊ H_n = G` of definable convex subgroups whose
/// consecutive quotients all have infinite `p`-index, over every subset of the definable tails.
pub fn kp_bruteforce(blocks: &[B], p: u64, primes: &[u64]) -> u64 {
    let cuts = definable_cuts(blocks, primes);
    let mut best = 0;
    for mask in 0u32..(1 << cuts.len()) {
        let mut chain: Vec<usize> = cuts
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &c)| c)
            .collect();
        if chain.is_empty() {
            continue;
        }
        chain.push(0);
        chain.sort_unstable();
        chain.dedup();
        let ok = chain
            .windows(2)
            .all(|w| quotient_exp(blocks, w[0], w[1], p) == INF);
        if ok {
            best = best.max(chain.len() as u64 - 1);
        }
    }
    best
}

pub fn random_block<R: Rng>(rng: &mut R) -> B {
    let e = |rng: &mut R| {
        if rng.random_bool(0.4) {
            INF
        } else {
            rng.random_range(1..=3)
        }
    };
    match rng.random_range(0..6) {
        0 | 1 => B::Z,
        2 => B::Q,
        _ => {
            let mut pairs = Vec::new();
            for p in [2u64, 3, 5] {
                if rng.random_bool(0.45) {
                    pairs.push((p, e(rng)));
                }
            }
            B::Dense(pairs)
        }
    }
}

pub fn random_blocks<R: Rng>(rng: &mut R, max: usize) -> Vec<B> {
    let n = rng.random_range(1..=max);
    (0..n).map(|_| random_block(rng)).collect()
}

pub fn random_coeffs<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => 0,
            1 => rng.random_range(-3..=3),
            2 => rng.random_range(-64..=64),
            _ => {
                let k: i64 = rng.random_range(1..=9);
                let s = [2i64, 3, 4, 8, 9, 6][rng.random_range(0..6)];
                k * s * if rng.random_bool(0.5) { 1 } else { -1 }
            }
        })
        .collect()
}

pub fn element(x: &[i64]) -> Element {
    Element::from_slice(x)
}
