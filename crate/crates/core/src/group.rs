//! Presented ordered abelian groups: lexicographic sums of archimedean blocks.
//!
//! A [`Group`] is the flattened form of a [`GroupExpr`]. Index 0 is the
//! dominant block. Convex subgroups are tails of the presentation and are
//! addressed by a [`ConvexSubgroup`] cut.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, Exp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("lexicographic sum with no summands")]
    EmptySum,
    #[error("the trivial group cannot be presented")]
    TrivialGroup,
    #[error("{0} is not a prime")]
    NonPrime(u64),
    #[error("invalid divisibility profile: {0}")]
    InvalidProfile(String),
    #[error("omega() takes a single archimedean block")]
    OmegaOfCompound,
    #[error("cut out of range: {0}")]
    BadCut(String),
    #[error("block index {0} out of range")]
    BadBlock(usize),
    #[error("operation needs a presentation with finitely many blocks")]
    UnsupportedGroup,
    #[error("modulus must be positive")]
    ZeroModulus,
}

/// Exponent map `p -> e` with `[A:pA] = p^e`, stored as a default plus finitely many exceptions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpProfile {
    default: Exp,
    exceptions: BTreeMap<u64, Exp>,
}

impl ExpProfile {
    /// Builds a profile, dropping exceptions that equal the default.
    pub fn new(default: Exp, exceptions: BTreeMap<u64, Exp>) -> Result<Self, GroupError> {
        if let Some(&p) = exceptions.keys().find(|&&p| !arith::is_prime(p)) {
            return Err(GroupError::NonPrime(p));
        }
        let exceptions = exceptions
            .into_iter()
            .filter(|&(_, e)| e != default)
            .collect();
        Ok(ExpProfile {
            default,
            exceptions,
        })
    }

    pub fn constant(e: Exp) -> Self {
        ExpProfile {
            default: e,
            exceptions: BTreeMap::new(),
        }
    }

    pub fn default_exp(&self) -> Exp {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, Exp> {
        &self.exceptions
    }

    pub fn exp(&self, p: u64) -> Exp {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    /// True when every prime has exponent zero.
    pub fn is_divisible(&self) -> bool {
        self.default.is_zero() && self.exceptions.is_empty()
    }

    /// Pointwise sum.
    pub fn sum(&self, other: &ExpProfile) -> ExpProfile {
        let default = self.default + other.default;
        let exceptions = self
            .exceptions
            .keys()
            .chain(other.exceptions.keys())
            .map(|&p| (p, self.exp(p) + other.exp(p)))
            .filter(|&(_, e)| e != default)
            .collect();
        ExpProfile {
            default,
            exceptions,
        }
    }

    /// Pointwise `count * self`.
    pub fn times(&self, count: Exp) -> ExpProfile {
        let default = self.default.times(count);
        let exceptions = self
            .exceptions
            .iter()
            .map(|(&p, &e)| (p, e.times(count)))
            .filter(|&(_, e)| e != default)
            .collect();
        ExpProfile {
            default,
            exceptions,
        }
    }

    /// Smallest prime with positive exponent, if any.
    pub fn least_nondivisible_prime(&self) -> Option<u64> {
        if self.default.is_zero() {
            return self.exceptions.keys().next().copied();
        }
        let mut p = 2;
        while self.exp(p).is_zero() {
            p = arith::next_prime(p);
        }
        Some(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Discrete,
    Dense,
}

/// A non-trivial archimedean group described by its kind and divisibility profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    kind: BlockKind,
    profile: ExpProfile,
}

impl Block {
    /// The integers.
    pub fn z() -> Self {
        Block {
            kind: BlockKind::Discrete,
            profile: ExpProfile::constant(Exp::Fin(1)),
        }
    }

    /// The rationals.
    pub fn q() -> Self {
        Block {
            kind: BlockKind::Dense,
            profile: ExpProfile::constant(Exp::ZERO),
        }
    }

    /// A dense block. `default_exp` must be 0 or 1 and exceptions must differ from it.
    pub fn dense(default_exp: u64, exceptions: BTreeMap<u64, Exp>) -> Result<Self, GroupError> {
        if default_exp > 1 {
            return Err(GroupError::InvalidProfile(format!(
                "default exponent {default_exp} not in {{0,1}}"
            )));
        }
        let default = Exp::Fin(default_exp);
        if let Some((p, _)) = exceptions.iter().find(|&(_, &e)| e == default) {
            return Err(GroupError::InvalidProfile(format!(
                "exception {p} equals the default"
            )));
        }
        Ok(Block {
            kind: BlockKind::Dense,
            profile: ExpProfile::new(default, exceptions)?,
        })
    }

    /// The localization `Z_(p)`.
    pub fn zloc(p: u64) -> Self {
        Block {
            kind: BlockKind::Dense,
            profile: ExpProfile {
                default: Exp::ZERO,
                exceptions: BTreeMap::from([(p, Exp::Fin(1))]),
            },
        }
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn profile(&self) -> &ExpProfile {
        &self.profile
    }

    pub fn exp(&self, p: u64) -> Exp {
        self.profile.exp(p)
    }

    pub fn is_divisible(&self) -> bool {
        self.profile.is_divisible()
    }

    /// Not `n`-divisible: some prime factor of `n` has positive exponent.
    pub fn is_n_divisible(&self, n: u64) -> bool {
        arith::factorize(n).keys().all(|&p| self.exp(p).is_zero())
    }
}

/// Unflattened group expression as written in the DSL.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupExpr {
    Block(Block),
    Lex(Vec<GroupExpr>),
    Omega(Box<GroupExpr>),
    ZLocAllPrimes,
}

/// One piece of a flat presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Single(Block),
    /// ω copies of a block, first copy dominant.
    Omega(Block),
    /// `Z_(p)` for every prime `p`, in increasing order of `p`.
    ZLocAllPrimes,
}

/// A flat presentation: a non-empty sequence of segments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    segments: Vec<Segment>,
}

/// A block position inside a flat presentation.
///
/// `offset` is 0 for a single block, the copy index inside an ω segment and
/// the prime of the localization inside the all-primes segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub seg: usize,
    pub offset: u64,
}

/// A convex subgroup, given as the cut where its tail starts.
///
/// Cuts are ordered along the presentation, so a larger cut is a smaller
/// subgroup. Offsets follow [`Position`]; inside the all-primes segment the
/// offset 0 stands for the start of the segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConvexSubgroup {
    pub seg: usize,
    pub offset: u64,
}

impl ConvexSubgroup {
    /// `self ⊆ other`.
    pub fn is_subgroup_of(&self, other: &ConvexSubgroup) -> bool {
        self >= other
    }
}

impl Group {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, GroupError> {
        if segments.is_empty() {
            return Err(GroupError::TrivialGroup);
        }
        Ok(Group { segments })
    }

    /// Lexicographic sum of single blocks.
    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Result<Self, GroupError> {
        Group::from_segments(blocks.into_iter().map(Segment::Single).collect())
    }

    /// Flattens an expression. Nested sums are spliced in order.
    pub fn flatten(expr: &GroupExpr) -> Result<Self, GroupError> {
        fn walk(e: &GroupExpr, out: &mut Vec<Segment>) -> Result<(), GroupError> {
            match e {
                GroupExpr::Block(b) => out.push(Segment::Single(b.clone())),
                GroupExpr::ZLocAllPrimes => out.push(Segment::ZLocAllPrimes),
                GroupExpr::Lex(items) => {
                    if items.is_empty() {
                        return Err(GroupError::EmptySum);
                    }
                    for item in items {
                        walk(item, out)?;
                    }
                }
                GroupExpr::Omega(inner) => {
                    let mut inner_segs = Vec::new();
                    walk(inner, &mut inner_segs)?;
                    match inner_segs.as_slice() {
                        [Segment::Single(b)] => out.push(Segment::Omega(b.clone())),
                        _ => return Err(GroupError::OmegaOfCompound),
                    }
                }
            }
            Ok(())
        }
        let mut segments = Vec::new();
        walk(expr, &mut segments)?;
        Group::from_segments(segments)
    }

    /// The flat expression: a single block or one `Lex` with no nesting.
    pub fn to_expr(&self) -> GroupExpr {
        let mut items: Vec<GroupExpr> = self
            .segments
            .iter()
            .map(|s| match s {
                Segment::Single(b) => GroupExpr::Block(b.clone()),
                Segment::Omega(b) => GroupExpr::Omega(Box::new(GroupExpr::Block(b.clone()))),
                Segment::ZLocAllPrimes => GroupExpr::ZLocAllPrimes,
            })
            .collect();
        if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            GroupExpr::Lex(items)
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True when the presentation has finitely many blocks.
    pub fn is_finite(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!(s, Segment::Single(_)))
    }

    /// Blocks of a finite presentation.
    pub fn blocks(&self) -> Result<Vec<&Block>, GroupError> {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Single(b) => Ok(b),
                _ => Err(GroupError::UnsupportedGroup),
            })
            .collect()
    }

    pub fn num_blocks(&self) -> Option<usize> {
        self.is_finite().then_some(self.segments.len())
    }

    pub fn whole(&self) -> ConvexSubgroup {
        ConvexSubgroup { seg: 0, offset: 0 }
    }

    pub fn zero(&self) -> ConvexSubgroup {
        ConvexSubgroup {
            seg: self.segments.len(),
            offset: 0,
        }
    }

    /// `tail(k)` of a finite presentation: blocks with index `>= k`.
    pub fn tail(&self, k: usize) -> Result<ConvexSubgroup, GroupError> {
        if !self.is_finite() {
            return Err(GroupError::UnsupportedGroup);
        }
        if k > self.segments.len() {
            return Err(GroupError::BadCut(format!(
                "tail({k}) in a group with {} blocks",
                self.segments.len()
            )));
        }
        Ok(ConvexSubgroup { seg: k, offset: 0 })
    }

    /// Validates and normalizes a cut.
    pub fn cut(&self, seg: usize, offset: u64) -> Result<ConvexSubgroup, GroupError> {
        let bad = || GroupError::BadCut(format!("({seg}, {offset})"));
        match self.segments.get(seg) {
            None if seg == self.segments.len() && offset == 0 => Ok(self.zero()),
            None => Err(bad()),
            Some(Segment::Single(_)) if offset == 0 => Ok(ConvexSubgroup { seg, offset }),
            Some(Segment::Single(_)) => Err(bad()),
            Some(Segment::Omega(_)) => Ok(ConvexSubgroup { seg, offset }),
            Some(Segment::ZLocAllPrimes) => match offset {
                0 | 2 => Ok(ConvexSubgroup { seg, offset: 0 }),
                p if arith::is_prime(p) => Ok(ConvexSubgroup { seg, offset: p }),
                _ => Err(bad()),
            },
        }
    }

    /// Checks that a cut is well formed for this presentation.
    pub fn check_cut(&self, c: ConvexSubgroup) -> Result<ConvexSubgroup, GroupError> {
        let n = self.cut(c.seg, c.offset)?;
        if n != c {
            return Err(GroupError::BadCut(format!(
                "({}, {}) is not normalized",
                c.seg, c.offset
            )));
        }
        Ok(n)
    }

    /// The block at a position.
    pub fn block_at(&self, pos: Position) -> Block {
        match &self.segments[pos.seg] {
            Segment::Single(b) | Segment::Omega(b) => b.clone(),
            Segment::ZLocAllPrimes => Block::zloc(pos.offset),
        }
    }

    /// Largest convex subgroup not containing the block at `pos`.
    pub fn cut_after(&self, pos: Position) -> ConvexSubgroup {
        match &self.segments[pos.seg] {
            Segment::Single(_) => ConvexSubgroup {
                seg: pos.seg + 1,
                offset: 0,
            },
            Segment::Omega(_) => ConvexSubgroup {
                seg: pos.seg,
                offset: pos.offset + 1,
            },
            Segment::ZLocAllPrimes => ConvexSubgroup {
                seg: pos.seg,
                offset: arith::next_prime(pos.offset),
            },
        }
    }

    /// Smallest convex subgroup containing the block at `pos`.
    pub fn cut_at(&self, pos: Position) -> ConvexSubgroup {
        match &self.segments[pos.seg] {
            Segment::ZLocAllPrimes if pos.offset == 2 => ConvexSubgroup {
                seg: pos.seg,
                offset: 0,
            },
            _ => ConvexSubgroup {
                seg: pos.seg,
                offset: pos.offset,
            },
        }
    }

    /// All block positions in order; infinite for ω and all-primes segments.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.segments.iter().enumerate().flat_map(
            |(seg, s)| -> Box<dyn Iterator<Item = Position>> {
                match s {
                    Segment::Single(_) => Box::new(std::iter::once(Position { seg, offset: 0 })),
                    Segment::Omega(_) => {
                        Box::new((0..).map(move |offset| Position { seg, offset }))
                    }
                    Segment::ZLocAllPrimes => Box::new(
                        std::iter::successors(Some(2u64), |&p| Some(arith::next_prime(p)))
                            .map(move |offset| Position { seg, offset }),
                    ),
                }
            },
        )
    }

    /// Exponent `e` with `[A/B : p(A/B)] = p^e` for `A = c1 ⊇ B = c2`.
    pub fn segment_exp(
        &self,
        c1: ConvexSubgroup,
        c2: ConvexSubgroup,
        p: u64,
    ) -> Result<Exp, GroupError> {
        self.check_cut(c1)?;
        self.check_cut(c2)?;
        if c1 > c2 {
            return Err(GroupError::BadCut(
                "first cut must not lie after the second".into(),
            ));
        }
        Ok(self.segment_profile(c1, c2).exp(p))
    }

    /// Exponent profile of the quotient `c1 / c2` (cuts assumed valid and ordered).
    pub(crate) fn segment_profile(&self, c1: ConvexSubgroup, c2: ConvexSubgroup) -> ExpProfile {
        let mut acc = ExpProfile::constant(Exp::ZERO);
        for seg in c1.seg..self.segments.len().min(c2.seg + 1) {
            let lo = if seg == c1.seg { c1.offset } else { 0 };
            let hi = if seg == c2.seg { Some(c2.offset) } else { None };
            if hi == Some(0) {
                continue;
            }
            let part = match &self.segments[seg] {
                Segment::Single(b) => b.profile.clone(),
                Segment::Omega(b) => {
                    let count = hi.map_or(Exp::Inf, |h| Exp::Fin(h - lo));
                    b.profile.times(count)
                }
                Segment::ZLocAllPrimes => zloc_range_profile(lo, hi),
            };
            acc = acc.sum(&part);
        }
        acc
    }

    /// `[G:pG] = p^e`.
    pub fn index_exp(&self, p: u64) -> Exp {
        self.segment_profile(self.whole(), self.zero()).exp(p)
    }

    pub fn is_p_divisible(&self, p: u64) -> bool {
        self.index_exp(p).is_zero()
    }

    /// True when every block is divisible.
    pub fn is_divisible(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!(s, Segment::Single(b) | Segment::Omega(b) if b.is_divisible()))
    }

    /// Smallest prime `p` with `G` not `p`-divisible.
    pub fn least_nondivisible_prime(&self) -> Option<u64> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Single(b) | Segment::Omega(b) => b.profile.least_nondivisible_prime(),
                Segment::ZLocAllPrimes => Some(2),
            })
            .min()
    }

    /// First block position that is not `p`-divisible.
    pub fn first_nondivisible_position(&self, p: u64) -> Option<Position> {
        self.segments
            .iter()
            .enumerate()
            .find_map(|(seg, s)| match s {
                Segment::Single(b) | Segment::Omega(b) => {
                    (!b.exp(p).is_zero()).then_some(Position { seg, offset: 0 })
                }
                Segment::ZLocAllPrimes => Some(Position { seg, offset: p }),
            })
    }

    /// Last block position that is not `p`-divisible, `None` when none exists
    /// or when the non-`p`-divisible blocks are unbounded.
    pub(crate) fn last_nondivisible_position(&self, p: u64) -> Result<Option<Position>, ()> {
        for (seg, s) in self.segments.iter().enumerate().rev() {
            match s {
                Segment::Single(b) if !b.exp(p).is_zero() => {
                    return Ok(Some(Position { seg, offset: 0 }))
                }
                Segment::Omega(b) if !b.exp(p).is_zero() => return Err(()),
                Segment::ZLocAllPrimes => return Ok(Some(Position { seg, offset: p })),
                _ => {}
            }
        }
        Ok(None)
    }

    /// Ordinal `ω·a + b` of the first block in the tail, as `(a, b)`.
    /// `b` is `None` when it is too large to enumerate.
    pub fn ordinal(&self, c: ConvexSubgroup) -> (u64, Option<u64>) {
        let (mut a, mut b) = (0u64, Some(0u64));
        for s in &self.segments[..c.seg.min(self.segments.len())] {
            match s {
                Segment::Single(_) => b = b.map(|b| b + 1),
                Segment::Omega(_) | Segment::ZLocAllPrimes => {
                    a += 1;
                    b = Some(0);
                }
            }
        }
        let extra = match self.segments.get(c.seg) {
            Some(Segment::Omega(_)) => Some(c.offset),
            Some(Segment::ZLocAllPrimes) if c.offset > 0 => arith::prime_count_below(c.offset),
            _ => Some(0),
        };
        let b = match (b, extra) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        (a, b)
    }

    /// Human-readable name of a convex subgroup, e.g. `tail(2)` or `tail(ω+3)`.
    pub fn label(&self, c: ConvexSubgroup) -> String {
        if c == self.zero() {
            return "0".into();
        }
        if c == self.whole() {
            return "G".into();
        }
        let (a, b) = self.ordinal(c);
        let head = match a {
            0 => String::new(),
            1 => "ω".into(),
            a => format!("ω·{a}"),
        };
        let body = match (head.is_empty(), b) {
            (true, Some(b)) => b.to_string(),
            (false, Some(0)) => head,
            (false, Some(b)) => format!("{head}+{b}"),
            (true, None) => format!("π({})", c.offset),
            (false, None) => format!("{head}+π({})", c.offset),
        };
        format!("tail({body})")
    }
}

fn zloc_range_profile(lo: u64, hi: Option<u64>) -> ExpProfile {
    let lo = lo.max(2);
    let primes_between = |a: u64, b: u64| {
        std::iter::successors(Some(a), |&p| Some(arith::next_prime(p)))
            .take_while(move |&p| p < b)
            .collect::<Vec<_>>()
    };
    match hi {
        Some(hi) => ExpProfile {
            default: Exp::ZERO,
            exceptions: primes_between(lo, hi)
                .into_iter()
                .map(|p| (p, Exp::Fin(1)))
                .collect(),
        },
        None => ExpProfile {
            default: Exp::Fin(1),
            exceptions: primes_between(2, lo)
                .into_iter()
                .map(|p| (p, Exp::ZERO))
                .collect(),
        },
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BlockKind::Discrete => f.write_str("Z"),
            BlockKind::Dense if self.is_divisible() => f.write_str("Q"),
            BlockKind::Dense => {
                f.write_str("dense{")?;
                let items: Vec<String> = self
                    .profile
                    .exceptions
                    .iter()
                    .map(|(p, e)| format!("{p}:{e}"))
                    .collect();
                f.write_str(&items.join(","))?;
                if self.profile.default == Exp::Fin(1) {
                    f.write_str(";default:1")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Block(b) => write!(f, "{b}"),
            GroupExpr::ZLocAllPrimes => f.write_str("zhat_primes"),
            GroupExpr::Omega(inner) => write!(f, "omega({inner})"),
            GroupExpr::Lex(items) => {
                f.write_str("lex(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// `Σ k_i·e_i` over designated block generators. Zero coefficients are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    coeffs: BTreeMap<usize, i64>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    /// `k·e_i`.
    pub fn generator(i: usize, k: i64) -> Self {
        Element::from_pairs([(i, k)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (i, k) in pairs {
            *coeffs.entry(i).or_insert(0i64) += k;
        }
        coeffs.retain(|_, k| *k != 0);
        Element { coeffs }
    }

    pub fn from_slice(ks: &[i64]) -> Self {
        Element::from_pairs(ks.iter().copied().enumerate())
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(&i).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().map(|(&i, &k)| (i, k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_support(&self) -> Option<usize> {
        self.coeffs.keys().next().copied()
    }

    /// `self + m·other`, `None` on overflow.
    pub fn add_scaled(&self, other: &Element, m: i64) -> Option<Element> {
        let mut out = self.coeffs.clone();
        for (&i, &k) in &other.coeffs {
            let e = out.entry(i).or_insert(0);
            *e = e.checked_add(k.checked_mul(m)?)?;
        }
        out.retain(|_, k| *k != 0);
        Some(Element { coeffs: out })
    }

    pub fn scale(&self, m: i64) -> Option<Element> {
        Element::zero().add_scaled(self, m)
    }

    /// Checks the support against a finite presentation.
    pub fn check(&self, g: &Group) -> Result<(), GroupError> {
        let n = g.num_blocks().ok_or(GroupError::UnsupportedGroup)?;
        match self.coeffs.keys().next_back() {
            Some(&i) if i >= n => Err(GroupError::BadBlock(i)),
            _ => Ok(()),
        }
    }
}

/// `k·e` lies in `n·B` for the designated generator `e` of block `B`.
pub fn block_multiple_in(block: &ExpProfile, k: i64, n: u64) -> bool {
    k == 0
        || arith::factorize(n)
            .into_iter()
            .all(|(p, a)| block.exp(p).is_zero() || arith::valuation(k as i128, p) >= a)
}

/// Membership of `x` in `nG`.
pub fn in_ng(x: &Element, n: u64, g: &Group) -> Result<bool, GroupError> {
    Ok(first_non_multiple(x, n, g)?.is_none())
}

fn first_non_multiple(x: &Element, n: u64, g: &Group) -> Result<Option<usize>, GroupError> {
    if n == 0 {
        return Err(GroupError::ZeroModulus);
    }
    x.check(g)?;
    let blocks = g.blocks()?;
    Ok(x.support()
        .find(|&(i, k)| !block_multiple_in(blocks[i].profile(), k, n))
        .map(|(i, _)| i))
}

/// `H_n(x)`: the largest convex subgroup `H` with `x ∉ H + nG`; `0` when `x ∈ nG`.
pub fn h_n(x: &Element, n: u64, g: &Group) -> Result<ConvexSubgroup, GroupError> {
    Ok(match first_non_multiple(x, n, g)? {
        None => g.zero(),
        Some(j) => ConvexSubgroup {
            seg: j + 1,
            offset: 0,
        },
    })
}

/// `H_n^-(x)`: the largest member of the spine `S_n` not containing `x`; `0` if none.
pub fn h_n_minus(x: &Element, n: u64, g: &Group) -> Result<ConvexSubgroup, GroupError> {
    if n == 0 {
        return Err(GroupError::ZeroModulus);
    }
    x.check(g)?;
    let Some(lead) = x.min_support() else {
        return Ok(g.zero());
    };
    let spine = crate::spine::spine(g, n)?;
    let members = spine.members().ok_or(GroupError::UnsupportedGroup)?;
    Ok(members
        .iter()
        .rev()
        .copied()
        .find(|c| c.seg > lead)
        .unwrap_or_else(|| g.zero()))
}
