//! JSON reports: a serializable view of a [`RankReport`] plus optional subgroup and field results.
//!
//! Exponents and moduli use `"inf"` for `∞`, ranks use `"aleph0"`. Loading a report
//! re-parses the normalized group and re-verifies every witness.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{Exp, Index};
use crate::dsl::{self, ParseError};
use crate::fields::{FieldVerdict, KaplanskyReport, Status, Tri};
use crate::group::{ConvexSubgroup, ExpProfile, Group, GroupError};
use crate::ladder::{Ambient, LadderError, LadderSubgroup, Modulus};
use crate::rank::{self, InpMember, PInfinity, Rank, RankError, RankReport, Verdict, Witness};
use crate::spine::Spine;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("group does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid report: {0}")]
    Invalid(String),
    #[error("witness {0} fails verification")]
    WitnessFailed(usize),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A convex subgroup with its human-readable label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutView {
    pub seg: usize,
    pub offset: u64,
    pub label: String,
}

impl CutView {
    pub fn new(g: &Group, c: ConvexSubgroup) -> Self {
        CutView {
            seg: c.seg,
            offset: c.offset,
            label: g.label(c),
        }
    }

    /// Validates the cut against `g`; the label must match.
    pub fn resolve(&self, g: &Group) -> Result<ConvexSubgroup, ReportError> {
        let c = g.check_cut(ConvexSubgroup {
            seg: self.seg,
            offset: self.offset,
        })?;
        if g.label(c) != self.label {
            return Err(ReportError::Invalid(format!(
                "cut label {:?} does not match {}",
                self.label,
                g.label(c)
            )));
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpineView {
    Finite { members: Vec<CutView> },
    Infinite { p: u64, segment: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeView {
    pub p: u64,
    pub spine: SpineView,
    pub s_infinity: Option<Vec<CutView>>,
    pub k_p: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgView {
    pub value: u8,
    pub container: Option<CutView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinableView {
    pub members: Vec<CutView>,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberView {
    pub prime: Option<u64>,
    pub exponent: Exp,
    pub moduli: Vec<String>,
}

/// A block profile of a witness ambient; exceptions are `[prime, exponent]` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileView {
    pub default: Exp,
    pub exceptions: Vec<(u64, Exp)>,
}

impl From<&ExpProfile> for ProfileView {
    fn from(p: &ExpProfile) -> Self {
        ProfileView {
            default: p.default_exp(),
            exceptions: p.exceptions().iter().map(|(&p, &e)| (p, e)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WitnessView {
    InpFamily {
        ambient: Vec<ProfileView>,
        members: Vec<MemberView>,
    },
    InfiniteSpineChain {
        p: u64,
        segment: usize,
        ambient: Vec<ProfileView>,
        members: Vec<Vec<String>>,
    },
    ProperContainer {
        container: CutView,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankView {
    pub finite_spines: bool,
    pub p_infinity: PInfinity,
    pub primes: Vec<PrimeView>,
    pub c_g: Option<CgView>,
    pub dp_rank_reduct: Rank,
    pub dp_rank: Rank,
    pub verdict: Verdict,
    pub definable: DefinableView,
    pub witnesses: Vec<WitnessView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtPartView {
    pub p: u64,
    pub moduli: Vec<String>,
}

/// Outcome of one subgroup operation on modulus vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum SubgroupOutcome {
    Intersect {
        a: Vec<String>,
        b: Vec<String>,
        result: Vec<String>,
    },
    Sum {
        a: Vec<String>,
        b: Vec<String>,
        result: Vec<String>,
    },
    Index {
        a: Vec<String>,
        b: Vec<String>,
        index: Index,
    },
    Crt {
        a: Vec<String>,
        convex: Vec<String>,
        parts: Vec<CrtPartView>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub input: String,
    pub normalized: String,
    pub rank: RankView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kaplansky: Option<KaplanskyReport>,
}

pub fn moduli_strings(a: &LadderSubgroup) -> Vec<String> {
    a.moduli().iter().map(Modulus::to_string).collect()
}

fn parse_modulus(s: &str) -> Result<Modulus, ReportError> {
    if s == "inf" {
        return Ok(Modulus::Infinite);
    }
    let n: u64 = s
        .parse()
        .map_err(|_| ReportError::Invalid(format!("bad modulus {s:?}")))?;
    Ok(Modulus::from_u64(n)?)
}

fn ladder_from(ambient: &Arc<Ambient>, moduli: &[String]) -> Result<LadderSubgroup, ReportError> {
    let moduli = moduli
        .iter()
        .map(|s| parse_modulus(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LadderSubgroup::new(ambient.clone(), moduli)?)
}

fn ambient_from(profiles: &[ProfileView]) -> Result<Arc<Ambient>, ReportError> {
    let blocks = profiles
        .iter()
        .map(|p| ExpProfile::new(p.default, p.exceptions.iter().copied().collect()))
        .collect::<Result<Vec<_>, _>>()?;
    if blocks.is_empty() {
        return Err(ReportError::Invalid("empty ambient".into()));
    }
    Ok(Arc::new(Ambient::new(blocks)))
}

impl WitnessView {
    pub fn new(g: &Group, w: &Witness) -> Self {
        match w {
            Witness::InpFamily { ambient, members } => WitnessView::InpFamily {
                ambient: ambient.profiles().iter().map(ProfileView::from).collect(),
                members: members
                    .iter()
                    .map(|m| MemberView {
                        prime: m.prime,
                        exponent: m.exponent,
                        moduli: moduli_strings(&m.subgroup),
                    })
                    .collect(),
            },
            Witness::InfiniteSpineChain {
                p,
                segment,
                ambient,
                members,
            } => WitnessView::InfiniteSpineChain {
                p: *p,
                segment: *segment,
                ambient: ambient.profiles().iter().map(ProfileView::from).collect(),
                members: members.iter().map(moduli_strings).collect(),
            },
            Witness::ProperContainer(c) => WitnessView::ProperContainer {
                container: CutView::new(g, *c),
            },
        }
    }

    /// Rebuilds the library witness.
    pub fn resolve(&self, g: &Group) -> Result<Witness, ReportError> {
        Ok(match self {
            WitnessView::InpFamily { ambient, members } => {
                let ambient = ambient_from(ambient)?;
                let members = members
                    .iter()
                    .map(|m| {
                        Ok(InpMember {
                            prime: m.prime,
                            exponent: m.exponent,
                            subgroup: ladder_from(&ambient, &m.moduli)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ReportError>>()?;
                Witness::InpFamily { ambient, members }
            }
            WitnessView::InfiniteSpineChain {
                p,
                segment,
                ambient,
                members,
            } => {
                let ambient = ambient_from(ambient)?;
                let members = members
                    .iter()
                    .map(|m| ladder_from(&ambient, m))
                    .collect::<Result<Vec<_>, _>>()?;
                Witness::InfiniteSpineChain {
                    p: *p,
                    segment: *segment,
                    ambient,
                    members,
                }
            }
            WitnessView::ProperContainer { container } => {
                Witness::ProperContainer(container.resolve(g)?)
            }
        })
    }
}

impl RankView {
    pub fn new(g: &Group, r: &RankReport) -> Self {
        let cuts =
            |cs: &[ConvexSubgroup]| cs.iter().map(|&c| CutView::new(g, c)).collect::<Vec<_>>();
        RankView {
            finite_spines: r.finite_spines,
            p_infinity: r.p_infinity.clone(),
            primes: r
                .primes
                .iter()
                .map(|d| PrimeView {
                    p: d.p,
                    spine: match &d.spine {
                        Spine::Finite { members, .. } => SpineView::Finite {
                            members: cuts(members),
                        },
                        Spine::Infinite { p, segment, .. } => SpineView::Infinite {
                            p: *p,
                            segment: *segment,
                        },
                    },
                    s_infinity: d.s_infinity.as_deref().map(cuts),
                    k_p: d.k_p,
                })
                .collect(),
            c_g: r.c_g.as_ref().map(|c| CgView {
                value: c.value,
                container: c.container.map(|k| CutView::new(g, k)),
            }),
            dp_rank_reduct: r.dp_rank_reduct,
            dp_rank: r.dp_rank,
            verdict: r.verdict,
            definable: DefinableView {
                members: cuts(&r.definable.members),
                exhaustive: r.definable.exhaustive,
            },
            witnesses: r.witnesses.iter().map(|w| WitnessView::new(g, w)).collect(),
        }
    }
}

impl Report {
    /// Parses `input` and computes its rank report.
    pub fn analyze(input: &str) -> Result<(Group, Report), ReportError> {
        let g = dsl::parse(input)?;
        let r = rank::verdict(&g)?;
        let report = Report {
            schema_version: SCHEMA_VERSION,
            input: input.to_string(),
            normalized: g.to_string(),
            rank: RankView::new(&g, &r),
            subgroup: None,
            field: None,
            kaplansky: None,
        };
        Ok((g, report))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Deserializes and re-verifies a report.
    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let report: Report = serde_json::from_str(text)?;
        report.check()?;
        Ok(report)
    }

    /// Re-parses the normalized group, validates every cut and re-verifies every witness.
    pub fn check(&self) -> Result<(), ReportError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Schema(self.schema_version));
        }
        let g = dsl::parse(&self.normalized)?;
        if g.to_string() != self.normalized {
            return Err(ReportError::Invalid(
                "normalized expression is not in normal form".into(),
            ));
        }
        let r = &self.rank;
        let mut cuts: Vec<&CutView> = r.definable.members.iter().collect();
        for p in &r.primes {
            if let SpineView::Finite { members } = &p.spine {
                cuts.extend(members);
            }
            cuts.extend(p.s_infinity.iter().flatten());
        }
        cuts.extend(r.c_g.iter().filter_map(|c| c.container.as_ref()));
        for c in cuts {
            c.resolve(&g)?;
        }
        for (i, w) in r.witnesses.iter().enumerate() {
            if !w.resolve(&g)?.verify(&g)? {
                return Err(ReportError::WitnessFailed(i));
            }
        }
        Ok(())
    }

    /// Plain-text rendering.
    pub fn to_text(&self) -> String {
        let r = &self.rank;
        let mut out = String::new();
        let labels = |cs: &[CutView]| {
            cs.iter()
                .map(|c| c.label.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "group           {}", self.normalized);
        let _ = writeln!(out, "finite spines   {}", r.finite_spines);
        let p_inf = match &r.p_infinity {
            PInfinity::Finite(s) => format!(
                "{{{}}}",
                s.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
            ),
            PInfinity::Infinite => "infinite".into(),
        };
        let _ = writeln!(out, "P_inf           {p_inf}");
        for p in &r.primes {
            let spine = match &p.spine {
                SpineView::Finite { members } => format!("{{{}}}", labels(members)),
                SpineView::Infinite { segment, .. } => format!("infinite (segment {segment})"),
            };
            let k = p.k_p.map_or("-".into(), |k| k.to_string());
            let _ = writeln!(out, "p = {:<11} S_p = {spine}, k_p = {k}", p.p);
        }
        if let Some(c) = &r.c_g {
            let container = c
                .container
                .as_ref()
                .map_or(String::new(), |k| format!(" (container {})", k.label));
            let _ = writeln!(out, "c_G             {}{container}", c.value);
        }
        let _ = writeln!(out, "dp_rank_reduct  {}", r.dp_rank_reduct);
        let _ = writeln!(out, "dp_rank         {}", r.dp_rank);
        let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
        let _ = writeln!(
            out,
            "verdict         {}",
            verdict.as_str().unwrap_or_default()
        );
        let more = if r.definable.exhaustive { "" } else { ", ..." };
        let _ = writeln!(
            out,
            "definable       {{{}{more}}}",
            labels(&r.definable.members)
        );
        for w in &r.witnesses {
            let line = match w {
                WitnessView::InpFamily { members, .. } => format!(
                    "inp family      {}",
                    members
                        .iter()
                        .map(|m| format!("({})", m.moduli.join(",")))
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
                WitnessView::InfiniteSpineChain { p, members, .. } => format!(
                    "spine chain     p = {p}: {}",
                    members
                        .iter()
                        .map(|m| format!("({})", m.join(",")))
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
                WitnessView::ProperContainer { container } => {
                    format!("container       {}", container.label)
                }
            };
            let _ = writeln!(out, "{line}");
        }
        if let Some(s) = &self.subgroup {
            let _ = writeln!(out, "{}", subgroup_text(s));
        }
        if let Some(f) = &self.field {
            let _ = writeln!(out, "field           {}", status_text(&f.status));
            for line in &f.derivation {
                let _ = writeln!(out, "  - {line}");
            }
        }
        if let Some(k) = &self.kaplansky {
            let _ = writeln!(out, "kaplansky       {}", tri_text(k.holds));
            for c in &k.clauses {
                let _ = writeln!(out, "  {}: {} ({})", c.name, tri_text(c.status), c.reason);
            }
        }
        out
    }
}

fn tri_text(t: Tri) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn status_text(s: &Status) -> String {
    match s {
        Status::StronglyDependent { case } => {
            let case = serde_json::to_value(case).expect("case serializes");
            format!("strongly_dependent ({})", case.as_str().unwrap_or_default())
        }
        Status::NotStronglyDependent => "not_strongly_dependent".into(),
        Status::Inconsistent { violations } => {
            let rules: Vec<String> = violations.iter().map(|v| v.rule.to_string()).collect();
            format!("inconsistent ({})", rules.join(", "))
        }
        Status::Undetermined { missing } => {
            format!("undetermined (missing {})", missing.join(", "))
        }
    }
}

pub fn subgroup_text(s: &SubgroupOutcome) -> String {
    let v = |m: &[String]| format!("({})", m.join(","));
    match s {
        SubgroupOutcome::Intersect { a, b, result } => {
            format!("{} ∩ {} = {}", v(a), v(b), v(result))
        }
        SubgroupOutcome::Sum { a, b, result } => format!("{} + {} = {}", v(a), v(b), v(result)),
        SubgroupOutcome::Index { a, b, index } => format!("[{} : {}] = {index}", v(a), v(b)),
        SubgroupOutcome::Crt { a, convex, parts } => {
            let mut out = format!("{} = {}", v(a), v(convex));
            for part in parts {
                let _ = write!(out, " ∩ {}[{}]", v(&part.moduli), part.p);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_reverify() {
        for input in [
            "lex(Z, dense{2:inf}, dense{2:inf,3:inf})",
            "lex(Q, dense{2:inf}, dense{2:inf,3:inf})",
            "zhat_primes",
            "omega(dense{2:1})",
            "lex(Z, omega(dense{3:inf}), Z)",
            "Q",
        ] {
            let (_, r) = Report::analyze(input).unwrap();
            let back = Report::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r, "{input}");
        }
    }

    #[test]
    fn json_uses_string_infinities() {
        let (_, r) = Report::analyze("omega(dense{2:1})").unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rank"]["dp_rank"], "aleph0");
        assert_eq!(v["rank"]["witnesses"][0]["kind"], "infinite_spine_chain");
        assert_eq!(v["rank"]["witnesses"][0]["members"][0][0], "2");
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let (_, r) = Report::analyze("lex(Z, dense{2:inf}, dense{2:inf,3:inf})").unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let members = v["rank"]["witnesses"][0]["members"].as_array_mut().unwrap();
        let first = members[0].clone();
        members.push(first);
        assert!(matches!(
            Report::from_json(&v.to_string()),
            Err(ReportError::WitnessFailed(0))
        ));
    }

    #[test]
    fn bad_label_is_rejected() {
        let (_, r) = Report::analyze("lex(Z, Z)").unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        v["rank"]["definable"]["members"][0]["label"] = "G".into();
        assert!(matches!(
            Report::from_json(&v.to_string()),
            Err(ReportError::Invalid(_))
        ));
    }

    #[test]
    fn text_mentions_ranks() {
        let (_, r) = Report::analyze("lex(Z, dense{2:inf}, dense{2:inf,3:inf})").unwrap();
        let t = r.to_text();
        assert!(t.contains("dp_rank         4"));
        assert!(t.contains("c_G             1"));
    }
}
