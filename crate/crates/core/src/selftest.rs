//! Randomized cross-check of the ladder calculus against the integer-lattice oracle.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::Index;
use crate::group::{Block, Element, Group};
use crate::ladder::{Ambient, LadderSubgroup, Modulus};
use crate::lattice::{embed, IntegerLattice};

/// Largest modulus drawn.
pub const MAX_MODULUS: u64 = 1 << 20;
/// Largest number of `Z` blocks drawn.
pub const MAX_BLOCKS: usize = 6;
/// Discrepancy messages kept in a summary.
const KEEP: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub iterations: u64,
    pub checks: u64,
    pub discrepancies: u64,
    pub examples: Vec<String>,
}

impl Summary {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.discrepancies += 1;
            if self.examples.len() < KEEP {
                self.examples.push(what());
            }
        }
    }
}

/// A random monotone modulus vector of length `n` with finite moduli at most [`MAX_MODULUS`].
pub fn random_moduli<R: Rng>(rng: &mut R, n: usize) -> Vec<Modulus> {
    let mut out = Vec::with_capacity(n);
    let mut current = 1u64;
    let mut infinite = false;
    for _ in 0..n {
        if infinite || rng.random_bool(0.12) {
            infinite = true;
            out.push(Modulus::Infinite);
            continue;
        }
        if rng.random_bool(0.6) {
            let factor = match rng.random_range(0..4) {
                0 => rng.random_range(2..=6),
                1 => [2u64, 3, 5, 7, 11, 13][rng.random_range(0..6)],
                2 => 1 << rng.random_range(1..=5),
                _ => rng.random_range(2..=1000),
            };
            if current * factor <= MAX_MODULUS {
                current *= factor;
            }
        }
        out.push(Modulus::from_u64(current).expect("positive"));
    }
    out.reverse();
    out
}

fn random_element<R: Rng>(rng: &mut R, n: usize) -> Element {
    let ks: Vec<i64> = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => 0,
            1 => rng.random_range(-50..=50),
            _ => rng.random_range(-(1i64 << 22)..=(1i64 << 22)),
        })
        .collect();
    Element::from_slice(&ks)
}

/// The same lattice rebuilt from a scrambled generating set.
fn oracle(g: &Group, a: &LadderSubgroup, rng: &mut ChaCha8Rng) -> IntegerLattice {
    let lat = embed(g, a).expect("all-Z presentation");
    IntegerLattice::from_generators(lat.dim(), lat.scrambled(rng)).expect("same dimension")
}

fn same(x: &IntegerLattice, y: &IntegerLattice) -> bool {
    x.contains(y) && y.contains(x)
}

/// Runs `iters` random instances from `seed`; every instance checks intersection, sum,
/// index and membership against the lattice oracle.
pub fn run(seed: u64, iters: u64) -> Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Summary {
        seed,
        iterations: iters,
        ..Summary::default()
    };
    for _ in 0..iters {
        let n = rng.random_range(1..=MAX_BLOCKS);
        let g = Group::from_blocks(vec![Block::z(); n]).expect("non-empty");
        let ambient = Ambient::of_group(&g).expect("finite presentation");
        let a = LadderSubgroup::new(ambient.clone(), random_moduli(&mut rng, n)).expect("monotone");
        let b = LadderSubgroup::new(ambient, random_moduli(&mut rng, n)).expect("monotone");
        let la = oracle(&g, &a, &mut rng);
        let lb = oracle(&g, &b, &mut rng);

        let meet = a.intersect(&b).expect("same ambient");
        let lmeet = la.intersect(&lb).expect("same dimension");
        s.record(same(&embed(&g, &meet).expect("embeds"), &lmeet), || {
            format!("intersect {a} {b} -> {meet}")
        });

        let join = a.sum(&b).expect("same ambient");
        let ljoin = la.sum(&lb).expect("same dimension");
        s.record(same(&embed(&g, &join).expect("embeds"), &ljoin), || {
            format!("sum {a} {b} -> {join}")
        });

        match (a.index(&meet), la.index(&lmeet)) {
            (Ok(x), Ok(y)) => s.record(x == y, || format!("index [{a}:{meet}] = {x}, lattice {y}")),
            (x, y) => s.record(false, || {
                format!("index [{a}:{meet}] failed: {x:?} / {y:?}")
            }),
        }
        let sub_expected = if la.contains(&lb) {
            Some(la.index(&lb).expect("sublattice"))
        } else {
            None
        };
        let sub_got = if a.contains(&b) {
            a.index(&b).ok()
        } else {
            None
        };
        s.record(sub_expected == sub_got, || {
            format!("index [{a}:{b}] = {sub_got:?}, lattice {sub_expected:?}")
        });

        for _ in 0..2 {
            let x = random_element(&mut rng, n);
            let v: Vec<BigInt> = (0..n).map(|i| BigInt::from(x.coeff(i))).collect();
            let got = a.contains_element(&x).expect("in range");
            let expected = la.contains_vector(&v);
            s.record(got == expected, || {
                format!("membership of {v:?} in {a}: {got}, lattice {expected}")
            });
        }
        if let Index::Finite(_) = a.index(&meet).unwrap_or(Index::Infinite) {
            s.record(la.rank() == lmeet.rank(), || {
                format!("rank drop without infinite index for {a} {b}")
            });
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_are_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let m = random_moduli(&mut rng, 6);
            assert!(m.windows(2).all(|w| w[1].divides(&w[0])));
            assert!(m
                .iter()
                .all(|x| x.value().is_none_or(|v| v <= MAX_MODULUS.into())));
        }
    }

    #[test]
    fn short_run_is_clean() {
        let s = run(3, 200);
        assert_eq!(s.discrepancies, 0, "{:?}", s.examples);
        assert!(s.checks >= 200 * 6);
    }
}
