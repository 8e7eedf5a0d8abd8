//! `k_p`, `P_∞`, `c_G`, dp-ranks, strong-dependence verdicts and their witnesses.
//!
//! The dp-rank values are the closed-form invariants `1 + Σ k_p` and
//! `c_G + Σ k_p`; indiscernible sequences are not modelled.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{Exp, Index};
use crate::group::{ConvexSubgroup, Group, GroupError, Segment};
use crate::ladder::{Ambient, LadderError, LadderSubgroup, Modulus};
use crate::spine::{definable_convex_subgroups, spine, DefinableConvex, Spine};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("spine S_{0} is infinite")]
    InfiniteSpine(u64),
    #[error("group does not have finite dp-rank")]
    NotFiniteRank,
    #[error("group is divisible")]
    Divisible,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

/// A dp-rank value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Fin(u64),
    Aleph0,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Fin(n) => write!(f, "{n}"),
            Rank::Aleph0 => f.write_str("aleph0"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Rank::Fin(n) => s.serialize_u64(*n),
            Rank::Aleph0 => s.serialize_str("aleph0"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Rank::Fin(n)),
            Raw::Str(s) if s == "aleph0" => Ok(Rank::Aleph0),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected integer or \"aleph0\", got {s:?}"
            ))),
        }
    }
}

/// `P_∞(G) = {p : [G:pG] = ∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PInfinity {
    Finite(BTreeSet<u64>),
    Infinite,
}

impl PInfinity {
    pub fn is_empty(&self) -> bool {
        matches!(self, PInfinity::Finite(s) if s.is_empty())
    }
}

pub fn p_infinity(g: &Group) -> PInfinity {
    let mut primes = BTreeSet::new();
    for s in g.segments() {
        match s {
            Segment::Single(b) => {
                primes.extend(
                    b.profile()
                        .exceptions()
                        .iter()
                        .filter(|(_, e)| e.is_inf())
                        .map(|(&p, _)| p),
                );
            }
            Segment::Omega(b) => {
                if !b.profile().default_exp().is_zero() {
                    return PInfinity::Infinite;
                }
                primes.extend(b.profile().exceptions().keys().copied());
            }
            Segment::ZLocAllPrimes => {}
        }
    }
    PInfinity::Finite(primes)
}

/// Every spine `S_n` is finite.
pub fn has_finite_spines(g: &Group) -> bool {
    g.segments()
        .iter()
        .all(|s| !matches!(s, Segment::Omega(b) if !b.is_divisible()))
}

/// `S_p^∞`: spine members `H` whose successor `H'` in `S_p ∪ {G}` has `[H':H]` of infinite `p`-index. Ascending.
pub fn s_infinity(g: &Group, p: u64) -> Result<Vec<ConvexSubgroup>, RankError> {
    let members = match spine(g, p)? {
        Spine::Finite { members, .. } => members,
        Spine::Infinite { .. } => return Err(RankError::InfiniteSpine(p)),
    };
    let mut chain = members.clone();
    chain.push(g.whole());
    let mut out = Vec::new();
    for w in chain.windows(2) {
        if g.segment_exp(w[1], w[0], p)?.is_inf() {
            out.push(w[0]);
        }
    }
    Ok(out)
}

/// `k_p = |S_p^∞|`.
pub fn k_p(g: &Group, p: u64) -> Result<u64, RankError> {
    Ok(s_infinity(g, p)?.len() as u64)
}

/// `c_G` together with the container witnessing `c_G = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CG {
    pub value: u8,
    pub container: Option<ConvexSubgroup>,
}

fn finite_primes(g: &Group) -> Result<BTreeSet<u64>, RankError> {
    if !has_finite_spines(g) {
        return Err(RankError::NotFiniteRank);
    }
    match p_infinity(g) {
        PInfinity::Finite(s) => Ok(s),
        PInfinity::Infinite => Err(RankError::NotFiniteRank),
    }
}

/// Largest proper definable convex subgroup, if there is a non-zero one.
fn largest_proper_definable(g: &Group) -> Option<ConvexSubgroup> {
    let d = definable_convex_subgroups(g, 1);
    d.members.last().copied().filter(|&c| c != g.zero())
}

/// `c_G`: 1 iff a proper definable convex subgroup strictly contains `max S_p^∞` for every `p ∈ P_∞`.
pub fn c_g(g: &Group) -> Result<CG, RankError> {
    let primes = finite_primes(g)?;
    if primes.is_empty() {
        return Ok(CG {
            value: 0,
            container: None,
        });
    }
    let Some(top) = largest_proper_definable(g) else {
        return Ok(CG {
            value: 0,
            container: None,
        });
    };
    for &p in &primes {
        let h_p = *s_infinity(g, p)?.last().expect("p in P_∞ has k_p >= 1");
        if top >= h_p {
            return Ok(CG {
                value: 0,
                container: None,
            });
        }
    }
    Ok(CG {
        value: 1,
        container: Some(top),
    })
}

fn sum_k(g: &Group, primes: &BTreeSet<u64>) -> Result<u64, RankError> {
    primes.iter().map(|&p| k_p(g, p)).sum()
}

/// dp-rank of the reduct: `1` when `P_∞ = ∅`, else `c_G + Σ k_p`.
pub fn dp_rank_reduct(g: &Group) -> Result<Rank, RankError> {
    let Ok(primes) = finite_primes(g) else {
        return Ok(Rank::Aleph0);
    };
    if primes.is_empty() {
        return Ok(Rank::Fin(1));
    }
    Ok(Rank::Fin(c_g(g)?.value as u64 + sum_k(g, &primes)?))
}

/// dp-rank: `1 + Σ_{p ∈ P_∞} k_p` for finite spines and finite `P_∞`, else `ℵ0`.
pub fn dp_rank(g: &Group) -> Result<Rank, RankError> {
    let Ok(primes) = finite_primes(g) else {
        return Ok(Rank::Aleph0);
    };
    Ok(Rank::Fin(1 + sum_k(g, &primes)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DpMinimal,
    StronglyDependentFiniteRank,
    NotStronglyDependent,
}

/// One member of an inp family: a ladder tagged with its prime and exponent.
/// The container added when `c_G = 1` has no prime and exponent `∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InpMember {
    pub prime: Option<u64>,
    pub exponent: Exp,
    pub subgroup: LadderSubgroup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    InpFamily {
        ambient: Arc<Ambient>,
        members: Vec<InpMember>,
    },
    InfiniteSpineChain {
        p: u64,
        segment: usize,
        ambient: Arc<Ambient>,
        members: Vec<LadderSubgroup>,
    },
    ProperContainer(ConvexSubgroup),
}

/// Every subintersection omitting one member has infinite index over the full intersection.
pub fn index_criterion(family: &[LadderSubgroup]) -> Result<bool, LadderError> {
    let Some(first) = family.first() else {
        return Ok(true);
    };
    let whole = LadderSubgroup::whole(first.ambient().clone());
    let full = family
        .iter()
        .try_fold(whole.clone(), |acc, f| acc.intersect(f))?;
    for skip in 0..family.len() {
        let partial = family
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .try_fold(whole.clone(), |acc, (_, f)| acc.intersect(f))?;
        if partial.index(&full)? != Index::Infinite {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shape constraints of an inp family: per prime, exponents strictly increasing,
/// non-zero, `∞` only on top, at most `k_p + 1` members.
pub fn inp_shape_ok(members: &[InpMember], k: impl Fn(u64) -> u64) -> bool {
    let primes: BTreeSet<u64> = members.iter().filter_map(|m| m.prime).collect();
    primes.into_iter().all(|p| {
        let exps: Vec<Exp> = members
            .iter()
            .filter(|m| m.prime == Some(p))
            .map(|m| m.exponent)
            .collect();
        exps.iter().all(|e| !e.is_zero())
            && exps.windows(2).all(|w| w[0] < w[1])
            && exps.iter().rev().skip(1).all(|e| !e.is_inf())
            && exps.len() as u64 <= k(p) + 1
    }) && members
        .iter()
        .filter(|m| m.prime.is_none())
        .all(|m| m.exponent.is_inf())
}

impl Witness {
    /// Re-checks the witness against `g`.
    pub fn verify(&self, g: &Group) -> Result<bool, RankError> {
        match self {
            Witness::InpFamily { members, .. } => {
                let ladders: Vec<LadderSubgroup> =
                    members.iter().map(|m| m.subgroup.clone()).collect();
                let shape = inp_shape_ok(members, |p| k_p(g, p).unwrap_or(0));
                Ok(shape && index_criterion(&ladders)?)
            }
            Witness::InfiniteSpineChain { members, .. } => Ok(index_criterion(members)?),
            Witness::ProperContainer(c) => Ok(c_g(g)?.container == Some(*c)),
        }
    }
}

/// Ambient for witness ladders plus a map from cuts to ambient tails.
fn witness_ambient(
    g: &Group,
    cuts: &[ConvexSubgroup],
) -> Result<(Arc<Ambient>, Vec<ConvexSubgroup>), GroupError> {
    if g.is_finite() {
        let ambient = Ambient::of_group(g)?;
        let n = g.num_blocks().expect("finite");
        let all = (0..=n)
            .map(|k| ConvexSubgroup { seg: k, offset: 0 })
            .collect();
        return Ok((ambient, all));
    }
    Ambient::coarsen(g, cuts)
}

fn tail_index(all: &[ConvexSubgroup], c: ConvexSubgroup) -> usize {
    all.binary_search(&c).expect("cut is part of the ambient")
}

/// The inp family: for each `p ∈ P_∞` the ladders `H_{p,j} + p^j·G` over `S_p^∞ = {H_{p,1} ⊊ … ⊊ H_{p,k_p}}`,
/// plus the `c_G` container when `c_G = 1`.
pub fn inp_witness(g: &Group) -> Result<Witness, RankError> {
    let primes = finite_primes(g)?;
    let mut rows = Vec::new();
    let mut cuts = Vec::new();
    for &p in &primes {
        let s = s_infinity(g, p)?;
        cuts.extend(s.iter().copied());
        rows.push((p, s));
    }
    let cg = c_g(g)?;
    cuts.extend(cg.container);
    let (ambient, all) = witness_ambient(g, &cuts)?;
    let mut members = Vec::new();
    for (p, s) in rows {
        for (j, &h) in s.iter().enumerate() {
            let e = j as u64 + 1;
            let subgroup = LadderSubgroup::tail_plus(
                ambient.clone(),
                tail_index(&all, h),
                &Modulus::prime_power(p, e),
            )?;
            members.push(InpMember {
                prime: Some(p),
                exponent: Exp::Fin(e),
                subgroup,
            });
        }
    }
    if let Some(c) = cg.container {
        let subgroup = LadderSubgroup::tail(ambient.clone(), tail_index(&all, c))?;
        members.push(InpMember {
            prime: None,
            exponent: Exp::Inf,
            subgroup,
        });
    }
    Ok(Witness::InpFamily { ambient, members })
}

/// Chain `H_i + p^{i+1}·G` (`i < first_k`) with `H_0 ⊋ H_1 ⊋ …` for a group with an infinite spine.
///
/// Finitely many blocks of finite `p`-index cannot carry infinite indices, so the
/// chain lives over a saturated coarsening of the ω segment: `first_k + 1`
/// consecutive stretches of infinitely many copies, each of infinite `p`-index.
pub fn infinite_spine_chain(g: &Group, first_k: usize) -> Result<Witness, RankError> {
    let (segment, block) = g
        .segments()
        .iter()
        .enumerate()
        .find_map(|(i, s)| match s {
            Segment::Omega(b) if !b.is_divisible() => Some((i, b.clone())),
            _ => None,
        })
        .ok_or(RankError::Divisible)?;
    let p = block
        .profile()
        .least_nondivisible_prime()
        .expect("non-divisible block");
    let mut blocks = Vec::new();
    if segment > 0 {
        blocks.push(g.segment_profile(
            g.whole(),
            ConvexSubgroup {
                seg: segment,
                offset: 0,
            },
        ));
    }
    let offset = blocks.len();
    blocks.extend(std::iter::repeat_n(
        block.profile().times(Exp::Inf),
        first_k + 1,
    ));
    if segment + 1 < g.segments().len() {
        blocks.push(g.segment_profile(
            ConvexSubgroup {
                seg: segment + 1,
                offset: 0,
            },
            g.zero(),
        ));
    }
    let ambient = Arc::new(Ambient::new(blocks));
    let members = (0..first_k)
        .map(|i| {
            LadderSubgroup::tail_plus(
                ambient.clone(),
                offset + first_k - i,
                &Modulus::prime_power(p, i as u64 + 1),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Witness::InfiniteSpineChain {
        p,
        segment,
        ambient,
        members,
    })
}

/// Per-prime data of a rank report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeData {
    pub p: u64,
    pub spine: Spine,
    pub s_infinity: Option<Vec<ConvexSubgroup>>,
    pub k_p: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub finite_spines: bool,
    pub p_infinity: PInfinity,
    pub primes: Vec<PrimeData>,
    pub c_g: Option<CG>,
    pub dp_rank_reduct: Rank,
    pub dp_rank: Rank,
    pub verdict: Verdict,
    pub definable: DefinableConvex,
    pub witnesses: Vec<Witness>,
}

/// Number of non-zero definable convex subgroups listed in a report.
pub const DEFINABLE_LIMIT: usize = 16;
/// Chain length emitted for groups that are not strongly dependent.
pub const CHAIN_LENGTH: usize = 4;

/// Assembles the full rank report.
pub fn verdict(g: &Group) -> Result<RankReport, RankError> {
    let finite_spines = has_finite_spines(g);
    let p_inf = p_infinity(g);
    let listed: Vec<u64> = match &p_inf {
        PInfinity::Finite(s) => s.iter().copied().collect(),
        PInfinity::Infinite => Vec::new(),
    };
    let mut primes = Vec::new();
    for &p in &listed {
        let sp = spine(g, p)?;
        let s_inf = if sp.is_finite() {
            Some(s_infinity(g, p)?)
        } else {
            None
        };
        let k = s_inf.as_ref().map(|s| s.len() as u64);
        primes.push(PrimeData {
            p,
            spine: sp,
            s_infinity: s_inf,
            k_p: k,
        });
    }
    let dp = dp_rank(g)?;
    let reduct = dp_rank_reduct(g)?;
    let (verdict, c_g_value, witnesses) = match dp {
        Rank::Aleph0 => (
            Verdict::NotStronglyDependent,
            None,
            vec![infinite_spine_chain(g, CHAIN_LENGTH)?],
        ),
        Rank::Fin(n) => {
            let cg = c_g(g)?;
            let mut w = Vec::new();
            let family = inp_witness(g)?;
            if matches!(&family, Witness::InpFamily { members, .. } if !members.is_empty()) {
                w.push(family);
            }
            if let Some(c) = cg.container {
                w.push(Witness::ProperContainer(c));
            }
            let v = if n == 1 {
                Verdict::DpMinimal
            } else {
                Verdict::StronglyDependentFiniteRank
            };
            (v, Some(cg), w)
        }
    };
    Ok(RankReport {
        finite_spines,
        p_infinity: p_inf,
        primes,
        c_g: c_g_value,
        dp_rank_reduct: reduct,
        dp_rank: dp,
        verdict,
        definable: definable_convex_subgroups(g, DEFINABLE_LIMIT),
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Antiregularity {
    Antiregular,
    NotAntiregular {
        /// Kernel of a rank-one quotient.
        rank_one_kernel: ConvexSubgroup,
        /// Kernel of the largest non-trivial `p`-divisible quotient, if any.
        divisible_quotient_kernel: Option<ConvexSubgroup>,
    },
}

/// `p`-antiregularity. A presented group always has a rank-one quotient by its first block.
pub fn antiregularity(g: &Group, p: u64) -> Antiregularity {
    let first = g.positions().next().expect("presentations are non-empty");
    let rank_one_kernel = g.cut_after(first);
    let divisible_quotient_kernel = match g.first_nondivisible_position(p) {
        None => Some(g.zero()),
        Some(pos) => Some(g.cut_at(pos)).filter(|&c| c != g.whole()),
    };
    Antiregularity::NotAntiregular {
        rank_one_kernel,
        divisible_quotient_kernel,
    }
}

/// Data for a definable coarsening of a valuation with value group `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseningWitness {
    /// A prime with `g` neither `p`-divisible nor `p`-antiregular.
    pub p: u64,
    /// Largest member of `S_p`.
    pub spine_top: ConvexSubgroup,
    /// The convex kernel candidate: `G/H` is `p`-divisible, or `H = G` and `G/spine_top` is rank one.
    pub kernel: ConvexSubgroup,
}

/// Coarsening witness for a non-divisible group with finite spines.
pub fn coarsening_witness(g: &Group) -> Result<CoarseningWitness, RankError> {
    if !has_finite_spines(g) {
        return Err(RankError::NotFiniteRank);
    }
    let p = g.least_nondivisible_prime().ok_or(RankError::Divisible)?;
    let pos = g.first_nondivisible_position(p).expect("not p-divisible");
    Ok(CoarseningWitness {
        p,
        spine_top: g.cut_after(pos),
        kernel: g.cut_at(pos),
    })
}
