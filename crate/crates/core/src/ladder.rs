//! Definable subgroups of the form `H_1 + m_1·H_2 + … + m_k·G` in blockwise-modulus form.
//!
//! A [`LadderSubgroup`] is `⊕ m_i·B_i` over the blocks `B_i` of an [`Ambient`],
//! where `m_i = ∞` stands for the zero subgroup of `B_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{self, Exp, Index};
use crate::group::{ConvexSubgroup, Element, ExpProfile, Group, GroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LadderError {
    #[error("subgroups live in different ambient groups")]
    AmbientMismatch,
    #[error("expected {expected} moduli, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("moduli are not divisibility-monotone at block {0}")]
    NotMonotone(usize),
    #[error("second subgroup is not contained in the first")]
    NotASubgroupOf,
    #[error("element has support outside the ambient blocks")]
    ElementOutOfRange,
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Exponent profiles of the blocks a ladder lives over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ambient {
    blocks: Vec<ExpProfile>,
}

impl Ambient {
    pub fn new(blocks: Vec<ExpProfile>) -> Self {
        Ambient { blocks }
    }

    /// One ambient block per block of a finite presentation.
    pub fn of_group(g: &Group) -> Result<Arc<Self>, GroupError> {
        Ok(Arc::new(Ambient {
            blocks: g
                .blocks()?
                .into_iter()
                .map(|b| b.profile().clone())
                .collect(),
        }))
    }

    /// Coarsens a presentation along the given cuts: one ambient block per
    /// quotient between consecutive cuts. `G` and `0` are always included.
    /// Returns the ambient and the sorted cut list; the cut at list index `k`
    /// is the ambient `tail(k)`.
    pub fn coarsen(
        g: &Group,
        cuts: &[ConvexSubgroup],
    ) -> Result<(Arc<Self>, Vec<ConvexSubgroup>), GroupError> {
        let mut all = vec![g.whole(), g.zero()];
        for &c in cuts {
            all.push(g.check_cut(c)?);
        }
        all.sort();
        all.dedup();
        let blocks = all
            .windows(2)
            .map(|w| g.segment_profile(w[0], w[1]))
            .collect();
        Ok((Arc::new(Ambient { blocks }), all))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn profile(&self, i: usize) -> &ExpProfile {
        &self.blocks[i]
    }

    pub fn profiles(&self) -> &[ExpProfile] {
        &self.blocks
    }
}

/// A block modulus: a positive integer in factored form, or `∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Modulus {
    Finite(BTreeMap<u64, u64>),
    Infinite,
}

impl Modulus {
    pub fn one() -> Self {
        Modulus::Finite(BTreeMap::new())
    }

    pub fn from_u64(n: u64) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::ZeroModulus);
        }
        Ok(Modulus::Finite(
            arith::factorize(n)
                .into_iter()
                .map(|(p, e)| (p, e as u64))
                .collect(),
        ))
    }

    pub fn prime_power(p: u64, e: u64) -> Self {
        if e == 0 {
            return Modulus::one();
        }
        Modulus::Finite(BTreeMap::from([(p, e)]))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Modulus::Infinite)
    }

    pub fn valuation(&self, p: u64) -> Exp {
        match self {
            Modulus::Finite(f) => Exp::Fin(f.get(&p).copied().unwrap_or(0)),
            Modulus::Infinite => Exp::Inf,
        }
    }

    /// `self | other`.
    pub fn divides(&self, other: &Modulus) -> bool {
        match (self, other) {
            (_, Modulus::Infinite) => true,
            (Modulus::Infinite, Modulus::Finite(_)) => false,
            (Modulus::Finite(a), Modulus::Finite(b)) => {
                a.iter().all(|(p, e)| b.get(p).is_some_and(|f| f >= e))
            }
        }
    }

    pub fn lcm(&self, other: &Modulus) -> Modulus {
        match (self, other) {
            (Modulus::Finite(a), Modulus::Finite(b)) => {
                let mut out = a.clone();
                for (&p, &e) in b {
                    let slot = out.entry(p).or_insert(0);
                    *slot = (*slot).max(e);
                }
                Modulus::Finite(out)
            }
            _ => Modulus::Infinite,
        }
    }

    pub fn gcd(&self, other: &Modulus) -> Modulus {
        match (self, other) {
            (Modulus::Infinite, m) | (m, Modulus::Infinite) => m.clone(),
            (Modulus::Finite(a), Modulus::Finite(b)) => Modulus::Finite(
                a.iter()
                    .filter_map(|(p, &e)| b.get(p).map(|&f| (*p, e.min(f))))
                    .collect(),
            ),
        }
    }

    /// Drops primes that act trivially on a block with the given profile.
    pub fn effective(&self, profile: &ExpProfile) -> Modulus {
        match self {
            Modulus::Infinite => Modulus::Infinite,
            Modulus::Finite(f) => Modulus::Finite(
                f.iter()
                    .filter(|(&p, _)| !profile.exp(p).is_zero())
                    .map(|(&p, &e)| (p, e))
                    .collect(),
            ),
        }
    }

    /// The `p`-part: `p^{v_p(m)}`, or `∞` for `∞`.
    pub fn p_part(&self, p: u64) -> Modulus {
        match self {
            Modulus::Infinite => Modulus::Infinite,
            Modulus::Finite(f) => Modulus::prime_power(p, f.get(&p).copied().unwrap_or(0)),
        }
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let f = match self {
            Modulus::Finite(f) => Some(f),
            Modulus::Infinite => None,
        };
        f.into_iter().flat_map(|f| f.keys().copied())
    }

    /// Integer value of a finite modulus.
    pub fn value(&self) -> Option<BigUint> {
        match self {
            Modulus::Infinite => None,
            Modulus::Finite(f) => Some(f.iter().fold(BigUint::one(), |acc, (&p, &e)| {
                acc * BigUint::from(p).pow(e as u32)
            })),
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

/// `⊕ m_i·B_i` over an ambient. Equality is equality of subgroups.
#[derive(Clone, Debug)]
pub struct LadderSubgroup {
    ambient: Arc<Ambient>,
    moduli: Vec<Modulus>,
}

impl PartialEq for LadderSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.contains(other) && other.contains(self)
    }
}

impl Eq for LadderSubgroup {}

const MAX_INDEX_BITS: f64 = (1u64 << 24) as f64;

impl LadderSubgroup {
    /// Validates length and the divisibility-monotone invariant `m_{i+1} | m_i`.
    pub fn new(ambient: Arc<Ambient>, moduli: Vec<Modulus>) -> Result<Self, LadderError> {
        if moduli.len() != ambient.len() {
            return Err(LadderError::LengthMismatch {
                expected: ambient.len(),
                got: moduli.len(),
            });
        }
        if let Some(i) = moduli.windows(2).position(|w| !w[1].divides(&w[0])) {
            return Err(LadderError::NotMonotone(i + 1));
        }
        Ok(LadderSubgroup { ambient, moduli })
    }

    pub fn whole(ambient: Arc<Ambient>) -> Self {
        let n = ambient.len();
        LadderSubgroup {
            ambient,
            moduli: vec![Modulus::one(); n],
        }
    }

    /// The convex subgroup `tail(c)`.
    pub fn tail(ambient: Arc<Ambient>, c: usize) -> Result<Self, LadderError> {
        LadderSubgroup::tail_plus(ambient, c, &Modulus::Infinite)
    }

    /// `nG`.
    pub fn multiple(ambient: Arc<Ambient>, n: &Modulus) -> Self {
        let len = ambient.len();
        LadderSubgroup {
            ambient,
            moduli: vec![n.clone(); len],
        }
    }

    /// `tail(c) + nG`.
    pub fn tail_plus(ambient: Arc<Ambient>, c: usize, n: &Modulus) -> Result<Self, LadderError> {
        if c > ambient.len() {
            return Err(
                GroupError::BadCut(format!("tail({c}) over {} blocks", ambient.len())).into(),
            );
        }
        let moduli = (0..ambient.len())
            .map(|i| if i < c { n.clone() } else { Modulus::one() })
            .collect();
        LadderSubgroup::new(ambient, moduli)
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    fn effective(&self, i: usize) -> Modulus {
        self.moduli[i].effective(self.ambient.profile(i))
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &LadderSubgroup) -> bool {
        self.ambient == other.ambient
            && (0..self.moduli.len()).all(|i| self.effective(i).divides(&other.effective(i)))
    }

    fn check_same(&self, other: &LadderSubgroup) -> Result<(), LadderError> {
        if self.ambient != other.ambient {
            return Err(LadderError::AmbientMismatch);
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &LadderSubgroup,
        f: impl Fn(&Modulus, &Modulus) -> Modulus,
    ) -> Result<Self, LadderError> {
        self.check_same(other)?;
        let moduli = self
            .moduli
            .iter()
            .zip(&other.moduli)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(LadderSubgroup {
            ambient: self.ambient.clone(),
            moduli,
        })
    }

    /// `self ∩ other`: blockwise lcm.
    pub fn intersect(&self, other: &LadderSubgroup) -> Result<Self, LadderError> {
        self.zip_with(other, Modulus::lcm)
    }

    /// `self + other`: blockwise gcd.
    pub fn sum(&self, other: &LadderSubgroup) -> Result<Self, LadderError> {
        self.zip_with(other, Modulus::gcd)
    }

    /// `[self : sub]`.
    pub fn index(&self, sub: &LadderSubgroup) -> Result<Index, LadderError> {
        self.check_same(sub)?;
        if !self.contains(sub) {
            return Err(LadderError::NotASubgroupOf);
        }
        let mut value = BigUint::one();
        let mut bits = 0f64;
        for i in 0..self.moduli.len() {
            let (a, b) = (self.effective(i), sub.effective(i));
            let Modulus::Finite(bf) = &b else {
                if a.is_infinite() {
                    continue;
                }
                return Ok(Index::Infinite);
            };
            for (&p, &vb) in bf {
                let Exp::Fin(va) = a.valuation(p) else {
                    unreachable!("a divides b")
                };
                let d = vb - va;
                if d == 0 {
                    continue;
                }
                match self.ambient.profile(i).exp(p) {
                    Exp::Inf => return Ok(Index::Infinite),
                    Exp::Fin(e) => {
                        let k = e
                            .checked_mul(d)
                            .ok_or(LadderError::Overflow("index exponent"))?;
                        bits += k as f64 * (p as f64).log2();
                        if bits > MAX_INDEX_BITS {
                            return Err(LadderError::Overflow("index too large to represent"));
                        }
                        value *= BigUint::from(p).pow(k as u32);
                    }
                }
            }
        }
        Ok(Index::Finite(value))
    }

    /// Splits into a convex part and single-prime parts whose intersection is `self`.
    pub fn decompose_crt(&self) -> CrtDecomposition {
        let convex_moduli = self
            .moduli
            .iter()
            .map(|m| {
                if m.is_infinite() {
                    Modulus::Infinite
                } else {
                    Modulus::one()
                }
            })
            .collect();
        let convex = LadderSubgroup {
            ambient: self.ambient.clone(),
            moduli: convex_moduli,
        };
        let primes: std::collections::BTreeSet<u64> =
            self.moduli.iter().flat_map(|m| m.primes()).collect();
        let parts = primes
            .into_iter()
            .map(|p| {
                let moduli = self.moduli.iter().map(|m| m.p_part(p)).collect();
                (
                    p,
                    LadderSubgroup {
                        ambient: self.ambient.clone(),
                        moduli,
                    },
                )
            })
            .collect();
        CrtDecomposition { convex, parts }
    }

    /// Membership under the designated-generator model.
    pub fn contains_element(&self, x: &Element) -> Result<bool, LadderError> {
        if x.support().any(|(i, _)| i >= self.moduli.len()) {
            return Err(LadderError::ElementOutOfRange);
        }
        Ok(x.support().all(|(i, k)| match self.effective(i) {
            Modulus::Infinite => false,
            Modulus::Finite(f) => f
                .iter()
                .all(|(&p, &e)| arith::valuation(k as i128, p) as u64 >= e),
        }))
    }

    /// Same modulus vector, element-wise; differs from `==` on blocks where a prime acts trivially.
    pub fn same_moduli(&self, other: &LadderSubgroup) -> bool {
        self.ambient == other.ambient && self.moduli == other.moduli
    }
}

impl fmt::Display for LadderSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str(")")
    }
}

/// Result of [`LadderSubgroup::decompose_crt`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtDecomposition {
    /// Blocks with modulus `∞` in the input, everything else `1`.
    pub convex: LadderSubgroup,
    /// One ladder per prime dividing some finite modulus.
    pub parts: Vec<(u64, LadderSubgroup)>,
}

impl CrtDecomposition {
    /// Intersection of all parts.
    pub fn recompose(&self) -> Result<LadderSubgroup, LadderError> {
        self.parts
            .iter()
            .try_fold(self.convex.clone(), |acc, (_, part)| acc.intersect(part))
    }
}

/// `tail(c) + nG` over a finite presentation.
pub fn ladder_in(g: &Group, c: ConvexSubgroup, n: &Modulus) -> Result<LadderSubgroup, LadderError> {
    let ambient = Ambient::of_group(g)?;
    LadderSubgroup::tail_plus(ambient, g.check_cut(c)?.seg, n)
}

/// A coset `base + group`.
#[derive(Clone, Debug)]
pub struct Coset {
    pub base: Element,
    pub group: LadderSubgroup,
}

impl Coset {
    pub fn new(base: Element, group: LadderSubgroup) -> Result<Self, LadderError> {
        if base.support().any(|(i, _)| i >= group.moduli.len()) {
            return Err(LadderError::ElementOutOfRange);
        }
        Ok(Coset { base, group })
    }

    pub fn contains(&self, x: &Element) -> Result<bool, LadderError> {
        let d = x
            .add_scaled(&self.base, -1)
            .ok_or(LadderError::Overflow("element difference"))?;
        self.group.contains_element(&d)
    }

    /// Intersection of two cosets; `None` when disjoint.
    pub fn intersect(&self, other: &Coset) -> Result<Option<Coset>, LadderError> {
        let group = self.group.intersect(&other.group)?;
        let mut pairs = Vec::new();
        for i in 0..group.moduli.len() {
            let (x, y) = (self.base.coeff(i), other.base.coeff(i));
            let a = self.group.effective(i);
            let b = other.group.effective(i);
            match crt_pair(x, &a, y, &b)? {
                None => return Ok(None),
                Some(k) => pairs.push((i, k)),
            }
        }
        Ok(Some(Coset {
            base: Element::from_pairs(pairs),
            group,
        }))
    }
}

impl PartialEq for Coset {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.contains(&other.base).unwrap_or(false)
    }
}

fn modulus_int(m: &Modulus) -> Option<BigInt> {
    m.value().map(BigInt::from)
}

/// Solves `k ≡ x (a)`, `k ≡ y (b)` with `∞` meaning equality; returns a small representative.
fn crt_pair(x: i64, a: &Modulus, y: i64, b: &Modulus) -> Result<Option<i64>, LadderError> {
    let (xb, yb) = (BigInt::from(x), BigInt::from(y));
    let k = match (modulus_int(a), modulus_int(b)) {
        (None, None) => (x == y).then_some(xb),
        (None, Some(mb)) => (&xb - &yb).is_multiple_of(&mb).then_some(xb),
        (Some(ma), None) => (&yb - &xb).is_multiple_of(&ma).then_some(yb),
        (Some(ma), Some(mb)) => {
            let e = ma.extended_gcd(&mb);
            let diff = &yb - &xb;
            if !diff.is_multiple_of(&e.gcd) {
                None
            } else {
                let l = &ma / &e.gcd * &mb;
                let k = (&xb + &ma * (&diff / &e.gcd) * &e.x).mod_floor(&l);
                // Prefer the representative closest to zero so small inputs stay small.
                let alt = &k - &l;
                Some(if alt.abs() < k.abs() { alt } else { k })
            }
        }
    };
    match k {
        None => Ok(None),
        Some(k) if k.is_zero() => Ok(Some(0)),
        Some(k) => k
            .to_i64()
            .map(Some)
            .ok_or(LadderError::Overflow("coset representative")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Block;

    fn zz(n: usize) -> Arc<Ambient> {
        Ambient::of_group(&Group::from_blocks(vec![Block::z(); n]).unwrap()).unwrap()
    }

    fn lad(amb: &Arc<Ambient>, ms: &[Option<u64>]) -> LadderSubgroup {
        let moduli = ms
            .iter()
            .map(|m| m.map_or(Modulus::Infinite, |n| Modulus::from_u64(n).unwrap()))
            .collect();
        LadderSubgroup::new(amb.clone(), moduli).unwrap()
    }

    #[test]
    fn intersect_and_sum() {
        let a = zz(2);
        let six = lad(&a, &[Some(6), Some(6)]);
        let t1 = lad(&a, &[None, Some(1)]);
        assert!(six
            .intersect(&t1)
            .unwrap()
            .same_moduli(&lad(&a, &[None, Some(6)])));
        let h4 = lad(&a, &[Some(4), Some(1)]);
        let h6 = lad(&a, &[Some(6), Some(1)]);
        assert_eq!(h4.intersect(&h6).unwrap(), lad(&a, &[Some(12), Some(1)]));
        assert_eq!(h4.intersect(&h4).unwrap(), h4);
        let g4 = lad(&a, &[Some(4), Some(4)]);
        assert_eq!(g4.sum(&six).unwrap(), lad(&a, &[Some(2), Some(2)]));
        let three = lad(&a, &[Some(3), Some(3)]);
        assert_eq!(t1.sum(&three).unwrap(), lad(&a, &[Some(3), Some(1)]));
    }

    #[test]
    fn index_values() {
        let a = zz(2);
        let g = LadderSubgroup::whole(a.clone());
        let two = lad(&a, &[Some(2), Some(2)]);
        assert_eq!(g.index(&two).unwrap(), Index::Finite(4u32.into()));
        let t1 = lad(&a, &[None, Some(1)]);
        let t1_2 = lad(&a, &[None, Some(2)]);
        assert_eq!(t1.index(&t1_2).unwrap(), Index::Finite(2u32.into()));
        assert_eq!(g.index(&t1).unwrap(), Index::Infinite);
        assert_eq!(two.index(&g), Err(LadderError::NotASubgroupOf));
    }

    #[test]
    fn monotone_invariant_enforced() {
        let a = zz(2);
        let bad = LadderSubgroup::new(
            a.clone(),
            vec![Modulus::from_u64(2).unwrap(), Modulus::from_u64(4).unwrap()],
        );
        assert_eq!(bad.unwrap_err(), LadderError::NotMonotone(1));
        let bad = LadderSubgroup::new(a, vec![Modulus::one(), Modulus::Infinite]);
        assert_eq!(bad.unwrap_err(), LadderError::NotMonotone(1));
    }

    #[test]
    fn divisible_blocks_ignore_moduli() {
        let g = Group::from_blocks(vec![Block::z(), Block::q()]).unwrap();
        let a = Ambient::of_group(&g).unwrap();
        assert_eq!(lad(&a, &[Some(2), Some(2)]), lad(&a, &[Some(2), Some(1)]));
        assert_eq!(
            LadderSubgroup::whole(a.clone())
                .index(&lad(&a, &[Some(2), Some(2)]))
                .unwrap(),
            Index::Finite(2u32.into())
        );
    }

    #[test]
    fn crt_decomposition() {
        let a = zz(2);
        let h12 = lad(&a, &[Some(12), Some(1)]);
        let d = h12.decompose_crt();
        assert_eq!(d.parts.len(), 2);
        assert!(d.parts[0].1.same_moduli(&lad(&a, &[Some(4), Some(1)])));
        assert!(d.parts[1].1.same_moduli(&lad(&a, &[Some(3), Some(1)])));
        assert_eq!(d.recompose().unwrap(), h12);
        let six = lad(&a, &[Some(6), Some(6)]);
        assert_eq!(six.decompose_crt().recompose().unwrap(), six);
        let t1 = lad(&a, &[None, Some(1)]);
        assert!(t1.decompose_crt().parts.is_empty());
        assert_eq!(t1.decompose_crt().recompose().unwrap(), t1);
    }

    #[test]
    fn element_membership() {
        let a = zz(2);
        let two = lad(&a, &[Some(2), Some(2)]);
        assert!(two.contains_element(&Element::from_slice(&[2, 6])).unwrap());
        let t1 = lad(&a, &[None, Some(1)]);
        assert!(t1.contains_element(&Element::generator(1, 1)).unwrap());
        assert!(!t1.contains_element(&Element::generator(0, 1)).unwrap());
    }

    #[test]
    fn coset_intersections() {
        let a = zz(2);
        let two = lad(&a, &[Some(2), Some(2)]);
        let three = lad(&a, &[Some(3), Some(3)]);
        let e0 = Element::generator(0, 1);
        let c1 = Coset::new(e0.clone(), two.clone()).unwrap();
        let c2 = Coset::new(e0.clone(), three).unwrap();
        let both = c1.intersect(&c2).unwrap().unwrap();
        assert_eq!(both.group, lad(&a, &[Some(6), Some(6)]));
        assert!(both.contains(&e0).unwrap());
        let c3 = Coset::new(Element::generator(0, 2), two).unwrap();
        assert!(c1.intersect(&c3).unwrap().is_none());
        assert_eq!(c1.intersect(&c1).unwrap().unwrap(), c1);
    }
}
