//! Exact sublattice arithmetic on `Z^n`, used as an independent oracle for ladder arithmetic.
//!
//! Lattices are kept in Hermite normal form: row echelon, positive pivots,
//! entries above each pivot reduced into `[0, pivot)`. The form is canonical,
//! so equal lattices have equal bases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::arith::Index;
use crate::group::{BlockKind, Group};
use crate::ladder::{LadderSubgroup, Modulus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattices live in Z^{0} and Z^{1}")]
    RankMismatch(usize, usize),
    #[error("second lattice is not contained in the first")]
    NotSublattice,
    #[error("block {0} is not discrete")]
    NonDiscreteBlock(usize),
    #[error("generator has length {got}, expected {expected}")]
    BadGenerator { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerLattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
}

fn hnf(dim: usize, mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut col = 0;
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    while col < dim && !rows.is_empty() {
        // Euclid on column `col` until at most one row is non-zero there.
        loop {
            let mut nonzero: Vec<usize> = (0..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .collect();
            if nonzero.len() <= 1 {
                break;
            }
            nonzero.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let piv = nonzero[0];
            let pivot_row = rows[piv].clone();
            for &i in &nonzero[1..] {
                let q = rows[i][col].div_floor(&pivot_row[col]);
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        if let Some(i) = rows.iter().position(|r| !r[col].is_zero()) {
            let mut r = rows.swap_remove(i);
            if r[col].is_negative() {
                r.iter_mut().for_each(|x| *x = -&*x);
            }
            out.push(r);
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        col += 1;
    }
    // Reduce entries above pivots.
    for k in 0..out.len() {
        let pc = out[k]
            .iter()
            .position(|x| !x.is_zero())
            .expect("non-zero row");
        let pivot_row = out[k].clone();
        for row in out.iter_mut().take(k) {
            let q = row[pc].div_floor(&pivot_row[pc]);
            if !q.is_zero() {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
    }
    out
}

impl IntegerLattice {
    pub fn from_generators(dim: usize, gens: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        if let Some(g) = gens.iter().find(|g| g.len() != dim) {
            return Err(LatticeError::BadGenerator {
                expected: dim,
                got: g.len(),
            });
        }
        Ok(IntegerLattice {
            dim,
            basis: hnf(dim, gens),
        })
    }

    pub fn from_i64_rows(dim: usize, rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        IntegerLattice::from_generators(
            dim,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// The full lattice `Z^n`.
    pub fn standard(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        IntegerLattice { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    fn check_dim(&self, other: &IntegerLattice) -> Result<(), LatticeError> {
        if self.dim != other.dim {
            return Err(LatticeError::RankMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// Membership by reduction against the echelon basis.
    pub fn contains_vector(&self, v: &[BigInt]) -> bool {
        let mut v = v.to_vec();
        for row in &self.basis {
            let pc = row.iter().position(|x| !x.is_zero()).expect("non-zero row");
            if v[..pc].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let (q, r) = v[pc].div_rem(&row[pc]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        v.iter().all(|x| x.is_zero())
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &IntegerLattice) -> bool {
        self.dim == other.dim && other.basis.iter().all(|r| self.contains_vector(r))
    }

    pub fn sum(&self, other: &IntegerLattice) -> Result<Self, LatticeError> {
        self.check_dim(other)?;
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(IntegerLattice {
            dim: self.dim,
            basis: hnf(self.dim, rows),
        })
    }

    /// Intersection via the kernel trick on `[[A, A], [B, 0]]`.
    pub fn intersect(&self, other: &IntegerLattice) -> Result<Self, LatticeError> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut rows = Vec::new();
        for a in &self.basis {
            rows.push(a.iter().chain(a.iter()).cloned().collect::<Vec<_>>());
        }
        for b in &other.basis {
            rows.push(
                b.iter()
                    .cloned()
                    .chain(std::iter::repeat_n(BigInt::zero(), n))
                    .collect(),
            );
        }
        let echelon = hnf(2 * n, rows);
        let kernel = echelon
            .into_iter()
            .filter(|r| r[..n].iter().all(|x| x.is_zero()))
            .map(|r| r[n..].to_vec())
            .collect();
        Ok(IntegerLattice {
            dim: n,
            basis: hnf(n, kernel),
        })
    }

    fn pivot_product(&self) -> BigInt {
        self.basis
            .iter()
            .map(|r| {
                r.iter()
                    .find(|x| !x.is_zero())
                    .expect("non-zero row")
                    .clone()
            })
            .product()
    }

    /// `[self : sub]`; infinite when the rank drops.
    pub fn index(&self, sub: &IntegerLattice) -> Result<Index, LatticeError> {
        self.check_dim(sub)?;
        if !self.contains(sub) {
            return Err(LatticeError::NotSublattice);
        }
        if sub.rank() < self.rank() {
            return Ok(Index::Infinite);
        }
        let q = sub.pivot_product() / self.pivot_product();
        Ok(Index::Finite(q.magnitude().clone()))
    }

    /// Same lattice given by a randomly scrambled generating set.
    pub fn scrambled<R: Rng>(&self, rng: &mut R) -> Vec<Vec<BigInt>> {
        let mut rows = self.basis.clone();
        for _ in 0..(3 * rows.len()) {
            if rows.len() < 2 {
                break;
            }
            let i = rng.random_range(0..rows.len());
            let mut j = rng.random_range(0..rows.len() - 1);
            if j >= i {
                j += 1;
            }
            let k = BigInt::from(rng.random_range(-3i64..=3));
            let src = rows[j].clone();
            for (x, y) in rows[i].iter_mut().zip(&src) {
                *x += &k * y;
            }
            rows.swap(i, j);
        }
        if !rows.is_empty() && rng.random_bool(0.5) {
            let extra = rows[0]
                .iter()
                .zip(rows.last().expect("non-empty"))
                .map(|(a, b)| a + b)
                .collect();
            rows.push(extra);
        }
        rows
    }
}

/// Image of a ladder over an all-`Z` presentation, forgetting the order.
pub fn embed(g: &Group, a: &LadderSubgroup) -> Result<IntegerLattice, LatticeError> {
    let blocks = g.blocks().map_err(|_| LatticeError::NonDiscreteBlock(0))?;
    if let Some(i) = blocks.iter().position(|b| b.kind() != BlockKind::Discrete) {
        return Err(LatticeError::NonDiscreteBlock(i));
    }
    let n = blocks.len();
    if a.moduli().len() != n {
        return Err(LatticeError::RankMismatch(n, a.moduli().len()));
    }
    let rows = a
        .moduli()
        .iter()
        .enumerate()
        .filter_map(|(i, m)| match m {
            Modulus::Infinite => None,
            m => {
                let v = BigInt::from(m.value().expect("finite"));
                Some(
                    (0..n)
                        .map(|j| if i == j { v.clone() } else { BigInt::zero() })
                        .collect(),
                )
            }
        })
        .collect();
    IntegerLattice::from_generators(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Block;
    use crate::ladder::Ambient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(rows: &[Vec<i64>]) -> IntegerLattice {
        IntegerLattice::from_i64_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn index_examples() {
        let z2 = IntegerLattice::standard(2);
        assert_eq!(
            z2.index(&lat(&[vec![2, 0], vec![0, 2]])).unwrap(),
            Index::Finite(4u32.into())
        );
        assert_eq!(z2.index(&lat(&[vec![1, 0]])).unwrap(), Index::Infinite);
        assert_eq!(
            z2.index(&lat(&[vec![2, 0], vec![0, 3]])).unwrap(),
            Index::Finite(6u32.into())
        );
        assert_eq!(
            lat(&[vec![2, 0]]).index(&z2),
            Err(LatticeError::NotSublattice)
        );
    }

    #[test]
    fn sum_and_intersection() {
        let two = lat(&[vec![2, 0], vec![0, 2]]);
        let three = lat(&[vec![3, 0], vec![0, 3]]);
        assert_eq!(
            two.intersect(&three).unwrap(),
            lat(&[vec![6, 0], vec![0, 6]])
        );
        assert_eq!(two.sum(&three).unwrap(), IntegerLattice::standard(2));
        let diag = lat(&[vec![1, 1]]);
        let axis = lat(&[vec![1, 0]]);
        assert_eq!(diag.intersect(&axis).unwrap().rank(), 0);
        let a = lat(&[vec![2, 4], vec![0, 6]]);
        let b = lat(&[vec![3, 0], vec![0, 3]]);
        let i = a.intersect(&b).unwrap();
        for v in i.basis() {
            assert!(a.contains_vector(v) && b.contains_vector(v));
        }
        assert_eq!(i, lat(&[vec![6, 0], vec![0, 6]]));
    }

    #[test]
    fn hnf_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = lat(&[vec![4, 2, 0], vec![0, 6, 3], vec![0, 0, 5]]);
        for _ in 0..50 {
            let scr = a.scrambled(&mut rng);
            assert_eq!(IntegerLattice::from_generators(3, scr).unwrap(), a);
        }
    }

    #[test]
    fn embed_examples() {
        let zz = Group::from_blocks(vec![Block::z(), Block::z()]).unwrap();
        let amb = Ambient::of_group(&zz).unwrap();
        let two = LadderSubgroup::multiple(amb.clone(), &Modulus::from_u64(2).unwrap());
        assert_eq!(embed(&zz, &two).unwrap(), lat(&[vec![2, 0], vec![0, 2]]));
        let t = LadderSubgroup::tail_plus(amb, 1, &Modulus::from_u64(2).unwrap()).unwrap();
        assert_eq!(embed(&zz, &t).unwrap(), lat(&[vec![2, 0], vec![0, 1]]));
        let zzz = Group::from_blocks(vec![Block::z(); 3]).unwrap();
        let amb3 = Ambient::of_group(&zzz).unwrap();
        let l = LadderSubgroup::new(
            amb3,
            vec![
                Modulus::Infinite,
                Modulus::from_u64(4).unwrap(),
                Modulus::one(),
            ],
        )
        .unwrap();
        assert_eq!(
            embed(&zzz, &l).unwrap(),
            lat(&[vec![0, 4, 0], vec![0, 0, 1]])
        );
        let zq = Group::from_blocks(vec![Block::z(), Block::q()]).unwrap();
        let amb = Ambient::of_group(&zq).unwrap();
        assert_eq!(
            embed(&zq, &LadderSubgroup::whole(amb)),
            Err(LatticeError::NonDiscreteBlock(1))
        );
    }
}
