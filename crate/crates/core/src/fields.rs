//! Descriptor-level classifier for henselian valued fields.
//!
//! Fields are not computed with; a [`FieldDescriptor`] records the facts the
//! case analysis depends on as tri-state flags. The engine fills in what the
//! stated facts force, audits the necessary conditions for strong dependence,
//! and routes the transfer verdict through the equicharacteristic and
//! mixed-characteristic cases.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::group::{ConvexSubgroup, Group, GroupError};
use crate::rank::{self, RankError, Verdict as RankVerdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("residue characteristic is 0")]
    NotResidueCharP,
    #[error("valuation is not henselian")]
    NotHenselian,
    #[error("value group: {0}")]
    ValueGroup(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// A yes/no/unknown flag. `"derived"` is read as unknown and filled in by [`FieldDescriptor::derive`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    #[default]
    #[serde(alias = "derived")]
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Tri::Yes
    }

    pub fn is_no(self) -> bool {
        self == Tri::No
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    AlgebraicallyClosed,
    SeparablyClosed,
    RealClosed,
    Finite {
        q: u64,
    },
    /// Nothing known beyond the flags; treated as infinite.
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub characteristic: u64,
    pub class: FieldClass,
    #[serde(default)]
    pub strongly_dependent: Tri,
    #[serde(default)]
    pub perfect: Tri,
    #[serde(default)]
    pub artin_schreier_closed: Tri,
    /// No finite separable extension of degree divisible by the characteristic.
    #[serde(default)]
    pub no_separable_ext_degree_div_p: Tri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp_minimal: Option<Tri>,
}

impl FieldDescriptor {
    pub fn new(characteristic: u64, class: FieldClass) -> Self {
        FieldDescriptor {
            characteristic,
            class,
            strongly_dependent: Tri::Unknown,
            perfect: Tri::Unknown,
            artin_schreier_closed: Tri::Unknown,
            no_separable_ext_degree_div_p: Tri::Unknown,
            dp_minimal: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.class, FieldClass::Finite { .. })
    }

    /// Validates the descriptor and fills unknown flags with the values its class forces.
    pub fn derive(&self, role: &str) -> Result<FieldDescriptor, FieldError> {
        let bad = |msg: String| FieldError::InvalidDescriptor(format!("{role}: {msg}"));
        let c = self.characteristic;
        if c != 0 && !arith::is_prime(c) {
            return Err(bad(format!("characteristic {c} is neither 0 nor prime")));
        }
        let mut d = self.clone();
        let force = |flag: &mut Tri, value: Tri, name: &str, why: &str| -> Result<(), FieldError> {
            match *flag {
                Tri::Unknown => {
                    *flag = value;
                    Ok(())
                }
                f if f == value => Ok(()),
                _ => Err(bad(format!("{name} contradicts {why}"))),
            }
        };
        match self.class {
            FieldClass::Finite { q } => {
                if c == 0 || !is_power_of(q, c) {
                    return Err(bad(format!(
                        "finite field of size {q} in characteristic {c}"
                    )));
                }
                force(
                    &mut d.strongly_dependent,
                    Tri::Yes,
                    "strongly_dependent",
                    "finite class",
                )?;
                force(&mut d.perfect, Tri::Yes, "perfect", "finite class")?;
                force(
                    &mut d.artin_schreier_closed,
                    Tri::No,
                    "artin_schreier_closed",
                    "finite class",
                )?;
                force(
                    &mut d.no_separable_ext_degree_div_p,
                    Tri::No,
                    "no_separable_ext_degree_div_p",
                    "finite class",
                )?;
            }
            FieldClass::AlgebraicallyClosed => {
                force(
                    &mut d.strongly_dependent,
                    Tri::Yes,
                    "strongly_dependent",
                    "algebraically closed class",
                )?;
                force(
                    &mut d.perfect,
                    Tri::Yes,
                    "perfect",
                    "algebraically closed class",
                )?;
                force(
                    &mut d.artin_schreier_closed,
                    Tri::Yes,
                    "artin_schreier_closed",
                    "algebraically closed class",
                )?;
                force(
                    &mut d.no_separable_ext_degree_div_p,
                    Tri::Yes,
                    "no_separable_ext_degree_div_p",
                    "algebraically closed class",
                )?;
            }
            FieldClass::SeparablyClosed => {
                force(
                    &mut d.artin_schreier_closed,
                    Tri::Yes,
                    "artin_schreier_closed",
                    "separably closed class",
                )?;
                force(
                    &mut d.no_separable_ext_degree_div_p,
                    Tri::Yes,
                    "no_separable_ext_degree_div_p",
                    "separably closed class",
                )?;
            }
            FieldClass::RealClosed => {
                if c != 0 {
                    return Err(bad("real closed fields have characteristic 0".into()));
                }
                force(
                    &mut d.strongly_dependent,
                    Tri::Yes,
                    "strongly_dependent",
                    "real closed class",
                )?;
            }
            FieldClass::Other => {}
        }
        if c == 0 {
            force(&mut d.perfect, Tri::Yes, "perfect", "characteristic 0")?;
        }
        if d.strongly_dependent.is_yes() {
            force(&mut d.perfect, Tri::Yes, "perfect", "strong dependence")?;
        }
        if d.perfect.is_no() {
            force(
                &mut d.strongly_dependent,
                Tri::No,
                "strongly_dependent",
                "imperfection",
            )?;
        }
        if d.dp_minimal == Some(Tri::Yes) {
            force(
                &mut d.strongly_dependent,
                Tri::Yes,
                "strongly_dependent",
                "dp-minimality",
            )?;
        }
        Ok(d)
    }
}

fn is_power_of(q: u64, p: u64) -> bool {
    let mut q = q;
    if q < p {
        return false;
    }
    while q.is_multiple_of(p) {
        q /= p;
    }
    q == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuedFieldDescriptor {
    pub base: FieldDescriptor,
    pub residue: FieldDescriptor,
    /// Value group in the group DSL.
    pub value_group: String,
    /// Flat block index of the archimedean class of `v(p)`; mixed characteristic only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_of_p: Option<usize>,
    pub henselian: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharCase {
    EquicharZero,
    EquicharP { p: u64 },
    Mixed { p: u64 },
}

/// A validated descriptor with derived flags and a parsed value group.
#[derive(Clone, Debug)]
pub struct ValuedField {
    pub base: FieldDescriptor,
    pub residue: FieldDescriptor,
    pub value_group: Group,
    pub v_of_p: Option<usize>,
    pub henselian: bool,
    pub case: CharCase,
}

impl ValuedFieldDescriptor {
    pub fn resolve(&self) -> Result<ValuedField, FieldError> {
        let value_group = crate::dsl::parse(&self.value_group)
            .map_err(|e| FieldError::ValueGroup(e.to_string()))?;
        ValuedField::new(
            self.base.clone(),
            self.residue.clone(),
            value_group,
            self.v_of_p,
            self.henselian,
        )
    }
}

impl ValuedField {
    pub fn new(
        base: FieldDescriptor,
        residue: FieldDescriptor,
        value_group: Group,
        v_of_p: Option<usize>,
        henselian: bool,
    ) -> Result<Self, FieldError> {
        let base = base.derive("base")?;
        let residue = residue.derive("residue")?;
        let bad = |m: &str| FieldError::InvalidDescriptor(m.to_string());
        let case = match (base.characteristic, residue.characteristic) {
            (0, 0) => CharCase::EquicharZero,
            (0, p) => CharCase::Mixed { p },
            (p, q) if p == q => CharCase::EquicharP { p },
            _ => return Err(bad("illegal characteristic pair")),
        };
        match (case, v_of_p) {
            (CharCase::Mixed { .. }, None) => return Err(bad("mixed characteristic needs v_of_p")),
            (CharCase::Mixed { .. }, Some(b)) => {
                if !v_of_p_addressable(&value_group, b) {
                    return Err(GroupError::BadBlock(b).into());
                }
            }
            (_, Some(_)) => return Err(bad("v_of_p is only meaningful in mixed characteristic")),
            (_, None) => {}
        }
        Ok(ValuedField {
            base,
            residue,
            value_group,
            v_of_p,
            henselian,
            case,
        })
    }

    pub fn residue_char(&self) -> Option<u64> {
        match self.case {
            CharCase::EquicharZero => None,
            CharCase::EquicharP { p } | CharCase::Mixed { p } => Some(p),
        }
    }
}

/// Block indices address single blocks before the first infinite segment.
fn v_of_p_addressable(g: &Group, b: usize) -> bool {
    g.segments()
        .iter()
        .take_while(|s| matches!(s, crate::group::Segment::Single(_)))
        .count()
        > b
}

/// One clause of the Kaplansky condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub status: Tri,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KaplanskyReport {
    /// `yes` iff every clause holds, `no` if one fails, else `unknown`.
    pub holds: Tri,
    pub clauses: Vec<Clause>,
}

fn conjunction(clauses: &[Clause]) -> Tri {
    if clauses.iter().any(|c| c.status.is_no()) {
        Tri::No
    } else if clauses.iter().all(|c| c.status.is_yes()) {
        Tri::Yes
    } else {
        Tri::Unknown
    }
}

/// Value group `p`-divisible, residue field perfect, residue field without
/// finite separable extensions of degree divisible by `p`.
pub fn kaplansky_check(vf: &ValuedField) -> Result<KaplanskyReport, FieldError> {
    let p = vf.residue_char().ok_or(FieldError::NotResidueCharP)?;
    let forced = vf.base.strongly_dependent.is_yes()
        && matches!(vf.case, CharCase::EquicharP { .. })
        && vf.henselian;
    let divisible = vf.value_group.is_p_divisible(p);
    let mut clauses = vec![Clause {
        name: "value_group_p_divisible".into(),
        status: Tri::from_bool(divisible),
        reason: format!("[G:{p}G] = {p}^{}", vf.value_group.index_exp(p)),
    }];
    let residue_clause = |name: &str, flag: Tri| {
        if forced && !flag.is_no() {
            Clause {
                name: name.into(),
                status: Tri::Yes,
                reason: "forced: strongly dependent henselian field of characteristic p".into(),
            }
        } else {
            Clause {
                name: name.into(),
                status: flag,
                reason: "residue descriptor".into(),
            }
        }
    };
    clauses.push(residue_clause("residue_perfect", vf.residue.perfect));
    let no_sep = match (
        vf.residue.no_separable_ext_degree_div_p,
        vf.residue.artin_schreier_closed,
    ) {
        (_, Tri::No) => Tri::No,
        (f, _) => f,
    };
    clauses.push(residue_clause(
        "residue_no_separable_ext_degree_div_p",
        no_sep,
    ));
    Ok(KaplanskyReport {
        holds: conjunction(&clauses),
        clauses,
    })
}

/// Largest `p`-divisible convex subgroup: the cut after the last non-`p`-divisible block.
pub fn delta_p(g: &Group, p: u64) -> Result<ConvexSubgroup, FieldError> {
    match g.last_nondivisible_position(p) {
        Ok(None) => Ok(g.whole()),
        Ok(Some(pos)) => Ok(g.cut_after(pos)),
        Err(()) => Err(FieldError::ValueGroup(format!(
            "no largest {p}-divisible convex subgroup in this presentation"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramification {
    Finite,
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardDecomposition {
    /// Largest convex subgroup not containing `v(p)`.
    pub delta0: ConvexSubgroup,
    /// Smallest convex subgroup containing `v(p)`.
    pub delta: ConvexSubgroup,
    /// Whether `[0, v(p)]` is finite.
    pub ramification: Ramification,
}

/// `Δ0 = tail(b+1)`, `Δ = tail(b)` for `v(p)` in block `b`.
pub fn standard_decomposition(g: &Group, b: usize) -> Result<StandardDecomposition, FieldError> {
    if !v_of_p_addressable(g, b) {
        return Err(GroupError::BadBlock(b).into());
    }
    let delta = ConvexSubgroup { seg: b, offset: 0 };
    let delta0 = ConvexSubgroup {
        seg: b + 1,
        offset: 0,
    };
    let discrete = matches!(&g.segments()[b], crate::group::Segment::Single(bl) if bl.kind() == crate::group::BlockKind::Discrete);
    let ramification = if delta0 == g.zero() && discrete {
        Ramification::Finite
    } else {
        Ramification::Infinite
    };
    Ok(StandardDecomposition {
        delta0,
        delta,
        ramification,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ResidueStronglyDependent,
    ResiduePerfect,
    ValueGroupStronglyDependent,
    KaplanskyValueGroupDivisible,
    KaplanskyResidueExtensions,
    /// `[0, v(p)]` finite or a non-trivial `p`-divisible convex subgroup exists.
    RamificationOrDivisibleCore,
    /// Infinite `[0, v(p)]` forces an infinite residue field.
    InfiniteRamificationInfiniteResidue,
    /// `Δ0` is `p`-divisible.
    CoreDivisible,
    /// An infinite residue field forces `Δ/Δ0` to be `p`-divisible.
    InfiniteResidueDivisibleBlock,
    /// A dp-minimal field has a dp-minimal value group.
    DpMinimalValueGroup,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub detail: String,
}

fn value_group_verdict(vf: &ValuedField) -> Result<RankVerdict, FieldError> {
    Ok(rank::verdict(&vf.value_group)?.verdict)
}

/// Necessary conditions on a henselian valued field whose underlying field is strongly dependent.
pub fn audit_necessary(vf: &ValuedField) -> Result<Vec<Violation>, FieldError> {
    let mut out = Vec::new();
    let mut push = |rule, detail: String| out.push(Violation { rule, detail });
    let g = &vf.value_group;
    if vf.residue.strongly_dependent.is_no() {
        push(
            Rule::ResidueStronglyDependent,
            "residue field is marked not strongly dependent".into(),
        );
    }
    if vf.residue.perfect.is_no() {
        push(
            Rule::ResiduePerfect,
            "residue field is marked imperfect".into(),
        );
    }
    let vg = value_group_verdict(vf)?;
    if vg == RankVerdict::NotStronglyDependent {
        push(
            Rule::ValueGroupStronglyDependent,
            format!("{g} has infinite dp-rank"),
        );
    }
    if vf.base.dp_minimal == Some(Tri::Yes) && vg != RankVerdict::DpMinimal {
        push(Rule::DpMinimalValueGroup, format!("{g} is not dp-minimal"));
    }
    match vf.case {
        CharCase::EquicharZero => {}
        CharCase::EquicharP { p } => {
            if !g.is_p_divisible(p) {
                push(
                    Rule::KaplanskyValueGroupDivisible,
                    format!("{g} is not {p}-divisible"),
                );
            }
            let r = &vf.residue;
            if r.no_separable_ext_degree_div_p.is_no() || r.artin_schreier_closed.is_no() {
                push(
                    Rule::KaplanskyResidueExtensions,
                    format!("residue field has a separable extension of degree divisible by {p}"),
                );
            }
        }
        CharCase::Mixed { p } => {
            let b = vf.v_of_p.expect("validated");
            let dec = standard_decomposition(g, b)?;
            let core_div = g.segment_exp(dec.delta0, g.zero(), p)?.is_zero();
            let block_div = g.segment_exp(dec.delta, dec.delta0, p)?.is_zero();
            let has_div_core = delta_p(g, p).map(|d| d != g.zero()).unwrap_or(true);
            let infinite_residue = !vf.residue.is_finite();
            if dec.ramification == Ramification::Infinite && !has_div_core {
                push(
                    Rule::RamificationOrDivisibleCore,
                    format!("[0, v({p})] is infinite and {g} has no non-trivial {p}-divisible convex subgroup"),
                );
            }
            if dec.ramification == Ramification::Infinite && !infinite_residue {
                push(
                    Rule::InfiniteRamificationInfiniteResidue,
                    format!("[0, v({p})] is infinite but the residue field is finite"),
                );
            }
            if !core_div {
                push(
                    Rule::CoreDivisible,
                    format!("Δ0 = {} is not {p}-divisible", g.label(dec.delta0)),
                );
            }
            if infinite_residue && !block_div {
                push(
                    Rule::InfiniteResidueDivisibleBlock,
                    format!("residue field is infinite but Δ/Δ0 (block {b}) is not {p}-divisible"),
                );
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferCase {
    EquicharZero,
    EquicharP,
    MixedFiniteResidue,
    MixedInfiniteResidue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Status {
    StronglyDependent { case: TransferCase },
    NotStronglyDependent,
    Inconsistent { violations: Vec<Violation> },
    Undetermined { missing: Vec<String> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideFacts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defectless: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebraically_maximal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kaplansky: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp_minimal: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldVerdict {
    pub status: Status,
    pub derivation: Vec<String>,
    pub side_facts: SideFacts,
}

/// Strong dependence of `(K, v)` from the descriptor.
pub fn transfer_verdict(vf: &ValuedField) -> Result<FieldVerdict, FieldError> {
    if !vf.henselian {
        return Err(FieldError::NotHenselian);
    }
    let mut derivation = Vec::new();
    match vf.base.strongly_dependent {
        Tri::No => {
            derivation
                .push("the field sort is a reduct of (K, v) and is not strongly dependent".into());
            return Ok(FieldVerdict {
                status: Status::NotStronglyDependent,
                derivation,
                side_facts: SideFacts::default(),
            });
        }
        Tri::Unknown => {
            let vg = value_group_verdict(vf)?;
            if vg == RankVerdict::NotStronglyDependent || vf.residue.strongly_dependent.is_no() {
                derivation.push("an interpretable sort (value group or residue field) is not strongly dependent".into());
                return Ok(FieldVerdict {
                    status: Status::NotStronglyDependent,
                    derivation,
                    side_facts: SideFacts::default(),
                });
            }
            return Ok(FieldVerdict {
                status: Status::Undetermined {
                    missing: vec!["base.strongly_dependent".into()],
                },
                derivation,
                side_facts: SideFacts::default(),
            });
        }
        Tri::Yes => {}
    }
    derivation.push("K is strongly dependent, so it is perfect".into());
    derivation.push("the residue field of a henselian valuation on K is strongly dependent".into());
    derivation.push("the value group of a henselian valuation on K is strongly dependent".into());
    let violations = audit_necessary(vf)?;
    if !violations.is_empty() {
        derivation.push(format!("{} necessary condition(s) fail", violations.len()));
        return Ok(FieldVerdict {
            status: Status::Inconsistent { violations },
            derivation,
            side_facts: SideFacts::default(),
        });
    }
    let mut side = SideFacts {
        defectless: Some(true),
        algebraically_maximal: Some(true),
        ..SideFacts::default()
    };
    let case = match vf.case {
        CharCase::EquicharZero => {
            derivation.push("residue characteristic 0: value group and residue field strongly dependent transfer to (K, v)".into());
            TransferCase::EquicharZero
        }
        CharCase::EquicharP { p } => {
            derivation.push(format!(
                "characteristic {p}: (K, v) is an algebraically maximal Kaplansky field, hence strongly dependent"
            ));
            side.kaplansky = Some(kaplansky_check(vf)?.holds.is_yes());
            TransferCase::EquicharP
        }
        CharCase::Mixed { p } => {
            let dec = standard_decomposition(&vf.value_group, vf.v_of_p.expect("validated"))?;
            derivation.push(format!(
                "mixed characteristic (0,{p}): split v at Δ0 = {} and Δ = {}",
                vf.value_group.label(dec.delta0),
                vf.value_group.label(dec.delta)
            ));
            derivation.push("coarsening with value group Γ/Δ is equicharacteristic 0".into());
            derivation.push(format!("valuation on Δ0 is equicharacteristic {p}"));
            if vf.residue.is_finite() {
                derivation
                    .push("finite residue field: v is definable in the Shelah expansion".into());
                TransferCase::MixedFiniteResidue
            } else {
                derivation.push(format!("infinite residue field: Δ/Δ0 is {p}-divisible"));
                derivation.push(
                    "a saturated model makes the middle valuation spherically complete, so algebraically maximal"
                        .into(),
                );
                derivation
                    .push("the middle valuation is Kaplansky, hence strongly dependent".into());
                TransferCase::MixedInfiniteResidue
            }
        }
    };
    derivation.push(
        "strongly dependent henselian valued fields are defectless, hence algebraically maximal"
            .into(),
    );
    if vf.base.dp_minimal == Some(Tri::Yes) {
        side.dp_minimal = Some(true);
        derivation.push("K is dp-minimal, so (K, v) is dp-minimal".into());
    }
    Ok(FieldVerdict {
        status: Status::StronglyDependent { case },
        derivation,
        side_facts: side,
    })
}
