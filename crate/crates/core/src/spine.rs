//! Spines `S_n`, bracket groups `G_α^{[m]}` and definable convex subgroups.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::group::{h_n, ConvexSubgroup, Element, Group, GroupError, Position, Segment};
use crate::ladder::{Ambient, LadderError, LadderSubgroup, Modulus};

/// The spine `S_n` as a set of convex subgroups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Spine {
    /// Members ascending by inclusion; always starts with `0`.
    Finite {
        n: u64,
        members: Vec<ConvexSubgroup>,
    },
    /// Infinitely many members, generated by an ω segment that is not `p`-divisible.
    Infinite { n: u64, p: u64, segment: usize },
}

impl Spine {
    pub fn n(&self) -> u64 {
        match self {
            Spine::Finite { n, .. } | Spine::Infinite { n, .. } => *n,
        }
    }

    pub fn members(&self) -> Option<&[ConvexSubgroup]> {
        match self {
            Spine::Finite { members, .. } => Some(members),
            Spine::Infinite { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Spine::Finite { .. })
    }
}

/// `S_n(G)`: `0` together with the cut after every block that is not `n`-divisible.
pub fn spine(g: &Group, n: u64) -> Result<Spine, GroupError> {
    if n == 0 {
        return Err(GroupError::ZeroModulus);
    }
    let primes: Vec<u64> = arith::factorize(n).into_keys().collect();
    let mut members = vec![g.zero()];
    for (seg, s) in g.segments().iter().enumerate() {
        match s {
            Segment::Single(b) => {
                if !b.is_n_divisible(n) {
                    members.push(ConvexSubgroup {
                        seg: seg + 1,
                        offset: 0,
                    });
                }
            }
            Segment::Omega(b) => {
                if let Some(&p) = primes.iter().find(|&&p| !b.exp(p).is_zero()) {
                    return Ok(Spine::Infinite { n, p, segment: seg });
                }
            }
            Segment::ZLocAllPrimes => {
                members.extend(primes.iter().map(|&p| ConvexSubgroup {
                    seg,
                    offset: arith::next_prime(p),
                }));
            }
        }
    }
    members.sort_by(|a, b| b.cmp(a));
    members.dedup();
    Ok(Spine::Finite { n, members })
}

/// `s_n(x)`, the spine class of an element, as a subgroup.
pub fn spine_class(x: &Element, n: u64, g: &Group) -> Result<ConvexSubgroup, GroupError> {
    h_n(x, n, g)
}

/// `G_α^{[m]}`: the intersection of `H + mG` over convex `H` strictly containing `α`.
/// Equals `α' + mG` for the successor `α'` of `α`, and `G` when `α = G`.
pub fn bracket(g: &Group, alpha: ConvexSubgroup, m: u64) -> Result<LadderSubgroup, LadderError> {
    let ambient = Ambient::of_group(g)?;
    let c = g.check_cut(alpha)?.seg;
    if c == 0 {
        return Ok(LadderSubgroup::whole(ambient));
    }
    LadderSubgroup::tail_plus(ambient, c - 1, &Modulus::from_u64(m)?)
}

/// Definable convex subgroups other than `G`, ascending by inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinableConvex {
    pub members: Vec<ConvexSubgroup>,
    /// False when the list was truncated.
    pub exhaustive: bool,
}

/// `{0}` together with the cut after every non-divisible block; at most `limit` non-zero members.
pub fn definable_convex_subgroups(g: &Group, limit: usize) -> DefinableConvex {
    let mut found = Vec::new();
    let mut exhaustive = true;
    while let Some(pos) = next_nondivisible(g, found.last().copied()) {
        if found.len() == limit {
            exhaustive = false;
            break;
        }
        found.push(g.cut_after(pos));
    }
    let mut members = vec![g.zero()];
    members.extend(found);
    members.sort_by(|a, b| b.cmp(a));
    members.dedup();
    DefinableConvex {
        members,
        exhaustive,
    }
}

/// First non-divisible block position strictly after the cut `after` (or from the start).
fn next_nondivisible(g: &Group, after: Option<ConvexSubgroup>) -> Option<Position> {
    let start = after.unwrap_or_else(|| g.whole());
    for (seg, s) in g.segments().iter().enumerate().skip(start.seg) {
        let from = if seg == start.seg { start.offset } else { 0 };
        match s {
            Segment::Single(b) if !b.is_divisible() && from == 0 => {
                return Some(Position { seg, offset: 0 });
            }
            Segment::Omega(b) if !b.is_divisible() => {
                return Some(Position { seg, offset: from });
            }
            Segment::ZLocAllPrimes => {
                return Some(Position {
                    seg,
                    offset: from.max(2),
                });
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Exp;
    use crate::group::Block;
    use std::collections::BTreeMap;

    fn dense(pairs: &[(u64, Exp)]) -> Block {
        Block::dense(0, pairs.iter().copied().collect::<BTreeMap<_, _>>()).unwrap()
    }

    fn a1() -> Block {
        dense(&[(2, Exp::Inf)])
    }

    fn a2() -> Block {
        dense(&[(2, Exp::Inf), (3, Exp::Inf)])
    }

    #[test]
    fn worked_example_spines() {
        let g1 = Group::from_blocks(vec![Block::q(), a1(), a2()]).unwrap();
        let g2 = Group::from_blocks(vec![Block::z(), a1(), a2()]).unwrap();
        let s1 = spine(&g1, 2).unwrap();
        assert_eq!(s1.members().unwrap(), &[g1.zero(), g1.tail(2).unwrap()]);
        let s2 = spine(&g2, 2).unwrap();
        assert_eq!(
            s2.members().unwrap(),
            &[g2.zero(), g2.tail(2).unwrap(), g2.tail(1).unwrap()]
        );
    }

    #[test]
    fn omega_spine_is_infinite() {
        let g = Group::from_segments(vec![Segment::Omega(dense(&[(2, Exp::Fin(1))]))]).unwrap();
        assert_eq!(
            spine(&g, 2).unwrap(),
            Spine::Infinite {
                n: 2,
                p: 2,
                segment: 0
            }
        );
        assert!(spine(&g, 3).unwrap().is_finite());
    }

    #[test]
    fn spine_embeds_into_multiples() {
        let g = Group::from_blocks(vec![Block::z(), a1(), Block::q(), a2()]).unwrap();
        let s3 = spine(&g, 3).unwrap();
        let s6 = spine(&g, 6).unwrap();
        for m in s3.members().unwrap() {
            assert!(s6.members().unwrap().contains(m));
        }
    }

    #[test]
    fn bracket_values() {
        let zz = Group::from_blocks(vec![Block::z(), Block::z()]).unwrap();
        let b = bracket(&zz, zz.zero(), 2).unwrap();
        assert_eq!(b.to_string(), "(2,1)");
        let q = Group::from_blocks(vec![Block::q()]).unwrap();
        assert_eq!(bracket(&q, q.zero(), 5).unwrap().to_string(), "(1)");
        // Only G strictly contains tail(1), and G + 2G = G.
        assert_eq!(
            bracket(&zz, zz.tail(1).unwrap(), 2).unwrap().to_string(),
            "(1,1)"
        );
        assert_eq!(bracket(&zz, zz.whole(), 2).unwrap().to_string(), "(1,1)");
    }

    #[test]
    fn definable_lists() {
        let g1 = Group::from_blocks(vec![Block::q(), a1(), a2()]).unwrap();
        let d = definable_convex_subgroups(&g1, 10);
        assert!(d.exhaustive);
        assert_eq!(d.members, vec![g1.zero(), g1.tail(2).unwrap()]);
        let zh = Group::from_segments(vec![Segment::ZLocAllPrimes]).unwrap();
        let d = definable_convex_subgroups(&zh, 3);
        assert!(!d.exhaustive);
        let labels: Vec<String> = d.members.iter().map(|&c| zh.label(c)).collect();
        assert_eq!(labels, vec!["0", "tail(3)", "tail(2)", "tail(1)"]);
        let q = Group::from_blocks(vec![Block::q()]).unwrap();
        assert_eq!(
            definable_convex_subgroups(&q, 3),
            DefinableConvex {
                members: vec![q.zero()],
                exhaustive: true
            }
        );
        let om = Group::from_segments(vec![
            Segment::Omega(Block::q()),
            Segment::Single(Block::z()),
        ])
        .unwrap();
        let d = definable_convex_subgroups(&om, 3);
        assert!(d.exhaustive);
        assert_eq!(d.members.len(), 1);
    }
}
