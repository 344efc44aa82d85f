//! Recipe engine: picks a prefix `g` such that `g ∘ f` is irreducible for
//! every `f` in the semigroup, and checks individual words with the chained
//! orbit criterion.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::perfect_pth_power;
use crate::classify::{classify_type, TypeReport};
use crate::report::{digest, SCHEMA_VERSION};
use crate::semigroup::{GeneratorSet, SemigroupError, UnicriticalPoly, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseTag {
    SingleGenerator,
    NonSpecialPhi4,
    NonSpecialPhi3,
    BothSpecialEitherOr,
    TypeIPlusReducibleDistinct,
    TypeIPlusMatchingReducible,
    TypeIIPlusReducible,
    OddTwoSpecial,
    FLTDistinct,
    FLTZeroT,
    P3SpecialPair,
    LocalGlobalFamily,
}

impl CaseTag {
    pub const ALL: [CaseTag; 12] = [
        CaseTag::SingleGenerator,
        CaseTag::NonSpecialPhi4,
        CaseTag::NonSpecialPhi3,
        CaseTag::BothSpecialEitherOr,
        CaseTag::TypeIPlusReducibleDistinct,
        CaseTag::TypeIPlusMatchingReducible,
        CaseTag::TypeIIPlusReducible,
        CaseTag::OddTwoSpecial,
        CaseTag::FLTDistinct,
        CaseTag::FLTZeroT,
        CaseTag::P3SpecialPair,
        CaseTag::LocalGlobalFamily,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::SingleGenerator => "SingleGenerator",
            CaseTag::NonSpecialPhi4 => "NonSpecialPhi4",
            CaseTag::NonSpecialPhi3 => "NonSpecialPhi3",
            CaseTag::BothSpecialEitherOr => "BothSpecialEitherOr",
            CaseTag::TypeIPlusReducibleDistinct => "TypeIPlusReducibleDistinct",
            CaseTag::TypeIPlusMatchingReducible => "TypeIPlusMatchingReducible",
            CaseTag::TypeIIPlusReducible => "TypeIIPlusReducible",
            CaseTag::OddTwoSpecial => "OddTwoSpecial",
            CaseTag::FLTDistinct => "FLTDistinct",
            CaseTag::FLTZeroT => "FLTZeroT",
            CaseTag::P3SpecialPair => "P3SpecialPair",
            CaseTag::LocalGlobalFamily => "LocalGlobalFamily",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CaseTag {
    type Err = CertifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseTag::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CertifyError::DomainError(format!("unknown case tag {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("no generator is irreducible over Q")]
    NoIrreducibleGenerator,
    #[error(
        "open case: S is the special pair x^{p} + t^{p} - t^{{{p}^2}}, x^{p} + t^{p} with t = {t}; \
         irreducibility of (x^p + t^p)^p + t^p - t^(p^2) is conjectured but unproven for p > 3"
    )]
    OpenCase { p: u32, t: BigInt },
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),
    #[error("input is not an irreducible special polynomial: {0}")]
    InputNotSpecial(String),
    #[error("the two polynomials are identical")]
    IdenticalPair,
    #[error("prefix {0} is not certified irreducible; pass a case tag to assert it")]
    PrefixNotCertified(Word),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Universal,
    PerWord(Word),
}

/// One recorded check: a description, the integer it concerns, and whether it
/// came out the way the certificate needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailEntry {
    pub check: String,
    pub value: Option<BigInt>,
    pub passed: bool,
}

impl TrailEntry {
    fn new(check: impl Into<String>, value: Option<BigInt>, passed: bool) -> Self {
        TrailEntry { check: check.into(), value, passed }
    }

    fn to_json(&self, full: bool) -> Value {
        json!({
            "check": self.check,
            "value": self.value.as_ref().map(|v| digest(v, full)),
            "passed": self.passed,
        })
    }
}

/// A prefix together with the case that justifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub case: CaseTag,
    pub prefix: Word,
    pub trail: Vec<TrailEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub case: CaseTag,
    pub scope: Scope,
    pub generators: GeneratorSet,
    pub prefix: Word,
    pub claim: Option<String>,
    /// The case was supplied by the caller rather than derived.
    pub asserted: bool,
    pub trail: Vec<TrailEntry>,
    /// Other cases that also apply, shortest first.
    pub alternatives: Vec<(CaseTag, Word)>,
}

impl Certificate {
    pub fn to_json(&self, full: bool) -> Value {
        let scope = match &self.scope {
            Scope::Universal => json!("universal"),
            Scope::PerWord(w) => json!({"per_word": w.to_string()}),
        };
        json!({
            "schema_version": SCHEMA_VERSION,
            "case": self.case.name(),
            "scope": scope,
            "p": self.generators.p(),
            "generators": self.generators.coeffs().iter().map(|c| digest(c, full)).collect::<Vec<_>>(),
            "prefix": self.prefix.to_string(),
            "claim": self.claim,
            "asserted": self.asserted,
            "trail": self.trail.iter().map(|t| t.to_json(full)).collect::<Vec<_>>(),
            "alternatives": self
                .alternatives
                .iter()
                .map(|(c, w)| json!({"case": c.name(), "prefix": w.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Certified(Certificate),
    /// A chained value was a p-th power, so the criterion says nothing.
    Inconclusive {
        level: usize,
        value: BigInt,
        root: BigInt,
        trail: Vec<TrailEntry>,
    },
}

impl VerifyOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, VerifyOutcome::Certified(_))
    }

    pub fn to_json(&self, full: bool) -> Value {
        match self {
            VerifyOutcome::Certified(c) => json!({"outcome": "certified", "certificate": c.to_json(full)}),
            VerifyOutcome::Inconclusive { level, value, root, trail } => json!({
                "outcome": "inconclusive",
                "level": level,
                "value": digest(value, full),
                "root": digest(root, full),
                "trail": trail.iter().map(|t| t.to_json(full)).collect::<Vec<_>>(),
            }),
        }
    }
}

fn power_name(p: u32) -> String {
    match p {
        2 => "square".into(),
        3 => "cube".into(),
        _ => format!("{p}th power"),
    }
}

fn is_pth_power(n: &BigInt, p: u32) -> bool {
    perfect_pth_power(n, p).is_some()
}

fn is_special(r: &TypeReport) -> bool {
    r.is_type1() || r.is_type2()
}

/// Values `b` such that `φ³(b)` being a p-th power forces `b` into this set,
/// for an irreducible special `φ`.
pub fn obstruction_set(report: &TypeReport) -> Vec<BigInt> {
    let p = report.p;
    let mut out = Vec::new();
    if p == 2 {
        for s in &report.type1_witnesses {
            let s2 = s * s;
            out.push(-&s2);
            out.push(s2);
        }
        for s in &report.type2_witnesses {
            let v = s * s + 1u32;
            out.push(-&v);
            out.push(v);
        }
    } else {
        out.extend(report.type1_witnesses.iter().map(|s| Pow::pow(s, p)));
    }
    out.sort();
    out.dedup();
    out
}

/// Whether `φ_outer³ ∘ φ_inner` is universal: no integer `a` has
/// `a^p + c_inner` in the obstruction set of `φ_outer`.
fn obstruction_test(
    outer: &TypeReport,
    outer_name: &str,
    inner_c: &BigInt,
    inner_name: &str,
) -> (bool, Vec<TrailEntry>) {
    let p = outer.p;
    let mut trail = Vec::new();
    let mut ok = true;
    for o in obstruction_set(outer) {
        let diff = &o - inner_c;
        let clear = !is_pth_power(&diff, p);
        trail.push(TrailEntry::new(
            format!(
                "{inner_name}(a) = {o} needs {o} - c_{inner_name} = a^{p}: not a {} ({outer_name} outer)",
                power_name(p)
            ),
            Some(diff),
            clear,
        ));
        ok &= clear;
    }
    (ok, trail)
}

/// Which of `φ_1³∘φ_2` and `φ_2³∘φ_1` is universal, for two distinct
/// irreducible special polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EitherOr {
    /// 0 when `φ_1³∘φ_2` was chosen, 1 for `φ_2³∘φ_1`.
    pub outer: usize,
    pub trail: Vec<TrailEntry>,
}

pub fn decide_either_or(phi1: &UnicriticalPoly, phi2: &UnicriticalPoly) -> Result<EitherOr, CertifyError> {
    if phi1 == phi2 {
        return Err(CertifyError::IdenticalPair);
    }
    if phi1.p() != phi2.p() {
        return Err(CertifyError::DomainError(format!(
            "exponents differ: {} and {}",
            phi1.p(),
            phi2.p()
        )));
    }
    let r1 = classify_type(phi1.p(), phi1.c());
    let r2 = classify_type(phi2.p(), phi2.c());
    for (r, phi) in [(&r1, phi1), (&r2, phi2)] {
        if !r.irreducible_over_q || !is_special(r) {
            return Err(CertifyError::InputNotSpecial(phi.to_string()));
        }
    }
    let (ok12, mut trail) = obstruction_test(&r1, "phi_1", phi2.c(), "phi_2");
    if ok12 {
        return Ok(EitherOr { outer: 0, trail });
    }
    let (ok21, trail21) = obstruction_test(&r2, "phi_2", phi1.c(), "phi_1");
    trail.extend(trail21);
    if ok21 {
        return Ok(EitherOr { outer: 1, trail });
    }
    Err(CertifyError::InternalContradiction(format!(
        "neither orientation of {phi1} and {phi2} passes the obstruction test"
    )))
}

/// Smallest `n ≥ 2` such that `s` is not a perfect `p^{n-1}`-th power.
pub fn minimal_power_index(p: u32, s: &BigInt) -> Result<usize, CertifyError> {
    if s.abs() <= BigInt::one() {
        return Err(CertifyError::DomainError(format!("|s| must be at least 2, got {s}")));
    }
    let mut v = s.clone();
    let mut n = 2;
    while let Some(root) = perfect_pth_power(&v, p) {
        v = root;
        n += 1;
    }
    Ok(n)
}

fn base_entry(set: &GeneratorSet, i: usize) -> TrailEntry {
    let neg = -set.coeff(i);
    let ok = !is_pth_power(&neg, set.p());
    TrailEntry::new(
        format!("-c_{i} is not a {}: phi_{i} irreducible", power_name(set.p())),
        Some(neg),
        ok,
    )
}

fn witness_entries(i: usize, r: &TypeReport) -> Vec<TrailEntry> {
    let mut out = Vec::new();
    for s in &r.type1_witnesses {
        out.push(TrailEntry::new(format!("phi_{i} is Type I with s = {s}"), Some(s.clone()), true));
    }
    for s in &r.type2_witnesses {
        out.push(TrailEntry::new(format!("phi_{i} is Type II with s = {s}"), Some(s.clone()), true));
    }
    if out.is_empty() {
        out.push(TrailEntry::new(format!("phi_{i} is neither Type I nor Type II"), None, true));
    }
    out
}

fn word_of(parts: &[usize]) -> Word {
    Word(parts.to_vec())
}

/// Every recipe that applies to `set`, in no particular order.
pub fn candidates(set: &GeneratorSet) -> Result<Vec<Candidate>, CertifyError> {
    let p = set.p();
    let reports: Vec<TypeReport> = set.coeffs().iter().map(|c| classify_type(p, c)).collect();
    let irreducible: Vec<usize> = (0..set.r()).filter(|&i| reports[i].irreducible_over_q).collect();
    if irreducible.is_empty() {
        return Err(CertifyError::NoIrreducibleGenerator);
    }
    let mut out = Vec::new();
    if set.r() == 1 {
        out.push(Candidate {
            case: CaseTag::SingleGenerator,
            prefix: Word::empty(),
            trail: vec![base_entry(set, 0)],
        });
        return Ok(out);
    }
    let reducible: Vec<usize> = (0..set.r()).filter(|&i| !reports[i].irreducible_over_q).collect();

    for &i in &irreducible {
        let ri = &reports[i];
        let mut head = vec![base_entry(set, i)];
        head.extend(witness_entries(i, ri));
        if !is_special(ri) {
            let (case, k) = if p == 2 {
                (CaseTag::NonSpecialPhi4, 4)
            } else {
                (CaseTag::NonSpecialPhi3, 3)
            };
            out.push(Candidate { case, prefix: Word::repeat(i, k), trail: head });
            continue;
        }

        for &j in irreducible.iter().filter(|&&j| j > i && is_special(&reports[j])) {
            let decision = decide_either_or(&set.generator(i), &set.generator(j))?;
            let (outer, inner) = if decision.outer == 0 { (i, j) } else { (j, i) };
            let mut trail = head.clone();
            trail.push(base_entry(set, j));
            trail.extend(witness_entries(j, &reports[j]));
            trail.extend(decision.trail);
            let case = if p == 2 {
                CaseTag::BothSpecialEitherOr
            } else {
                CaseTag::OddTwoSpecial
            };
            out.push(Candidate { case, prefix: word_of(&[outer, outer, outer, inner]), trail });
        }

        for &j in &reducible {
            let cj = set.coeff(j);
            let mut trail = head.clone();
            if p == 2 {
                // reducible x² + c_j = x² - t²
                let t = perfect_pth_power(&-cj, 2).expect("reducible quadratic");
                trail.push(TrailEntry::new(format!("phi_{j} = x^2 - t^2 with t = {t}"), Some(t.clone()), true));
                let t2 = &t * &t;
                if ri.is_type1() {
                    let matching = ri.type1_witnesses.iter().any(|s| s * s == t2);
                    let (case, prefix) = if matching {
                        (CaseTag::TypeIPlusMatchingReducible, word_of(&[i, i, j, i]))
                    } else {
                        (CaseTag::TypeIPlusReducibleDistinct, word_of(&[i, i, i, j, i]))
                    };
                    out.push(Candidate { case, prefix, trail: trail.clone() });
                }
                if ri.is_type2() {
                    out.push(Candidate {
                        case: CaseTag::TypeIIPlusReducible,
                        prefix: word_of(&[i, i, i, j, i]),
                        trail,
                    });
                }
            } else {
                // reducible x^p + c_j = x^p + t^p
                let t = perfect_pth_power(cj, p).expect("reducible binomial");
                trail.push(TrailEntry::new(format!("phi_{j} = x^{p} + t^{p} with t = {t}"), Some(t.clone()), true));
                if t.is_zero() {
                    let mut n = 2;
                    for s in &ri.type1_witnesses {
                        n = n.max(minimal_power_index(p, s)?);
                        let s_root = Pow::pow(BigInt::from(p), (n - 1) as u32);
                        trail.push(TrailEntry::new(
                            format!("s = {s} is not a perfect {s_root}th power"),
                            Some(s.clone()),
                            true,
                        ));
                    }
                    let mut prefix = vec![i, i, i];
                    prefix.extend(std::iter::repeat_n(j, n));
                    out.push(Candidate { case: CaseTag::FLTZeroT, prefix: Word(prefix), trail });
                } else if !ri.type1_witnesses.contains(&t) {
                    out.push(Candidate {
                        case: CaseTag::FLTDistinct,
                        prefix: word_of(&[i, i, i, j]),
                        trail,
                    });
                } else if p == 3 {
                    out.push(Candidate {
                        case: CaseTag::P3SpecialPair,
                        prefix: word_of(&[i, j, i]),
                        trail,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn candidate_order(c: &Candidate) -> (usize, Word, CaseTag) {
    (c.prefix.len(), c.prefix.clone(), c.case)
}

/// Walks the decision tree and returns the shortest universal prefix
/// (lowest indices on ties), listing the other applicable cases.
pub fn pick_universal_prefix(set: &GeneratorSet) -> Result<Certificate, CertifyError> {
    let mut all = candidates(set)?;
    if all.is_empty() {
        return Err(no_candidate_error(set));
    }
    all.sort_by_key(candidate_order);
    let best = all.remove(0);
    Ok(Certificate {
        case: best.case,
        scope: Scope::Universal,
        generators: set.clone(),
        prefix: best.prefix,
        claim: Some("every composition starting with the prefix is irreducible over Q".into()),
        asserted: false,
        trail: best.trail,
        alternatives: all.into_iter().map(|c| (c.case, c.prefix)).collect(),
    })
}

fn no_candidate_error(set: &GeneratorSet) -> CertifyError {
    let p = set.p();
    if p > 3 {
        for (i, ci) in set.coeffs().iter().enumerate() {
            let r = classify_type(p, ci);
            if !r.irreducible_over_q {
                continue;
            }
            for (j, cj) in set.coeffs().iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(t) = perfect_pth_power(cj, p) {
                    if r.type1_witnesses.contains(&t) {
                        return CertifyError::OpenCase { p, t };
                    }
                }
            }
        }
    }
    CertifyError::InternalContradiction(format!("no recipe applies to {set}"))
}

/// Checks `g ∘ w` with the chained criterion: for each level `j`, the orbit
/// value of `g ++ w[..j]` must not be a p-th power.
pub fn verify_word_irreducible(
    set: &GeneratorSet,
    g: &Word,
    w: &Word,
    asserted: Option<CaseTag>,
) -> Result<VerifyOutcome, CertifyError> {
    set.check_word(g)?;
    set.check_word(w)?;
    let p = set.p();
    let (case, mut trail) = justify_prefix(set, g, asserted)?;
    let (start, mut full) = if g.is_empty() {
        // no outer factor: level 1 is irreducibility of the outermost letter
        let Some(&first) = w.indices().first() else {
            return Err(CertifyError::PrefixNotCertified(g.clone()));
        };
        let neg = -set.coeff(first);
        if let Some(root) = perfect_pth_power(&neg, p) {
            trail.push(TrailEntry::new(format!("level 1: -c_{first} is a {}", power_name(p)), Some(neg.clone()), false));
            return Ok(VerifyOutcome::Inconclusive { level: 1, value: neg, root, trail });
        }
        trail.push(base_entry(set, first));
        (2, Word(vec![first]))
    } else {
        (1, g.clone())
    };
    for level in start..=w.len() {
        full = full.concat(&Word(vec![w.indices()[level - 1]]));
        let value = set.orbit_value(&full)?;
        match perfect_pth_power(&value, p) {
            Some(root) => {
                trail.push(TrailEntry::new(
                    format!("level {level}: orbit value of {full} is a {}", power_name(p)),
                    Some(value.clone()),
                    false,
                ));
                return Ok(VerifyOutcome::Inconclusive { level, value, root, trail });
            }
            None => trail.push(TrailEntry::new(
                format!("level {level}: orbit value of {full} is not a {}", power_name(p)),
                Some(value),
                true,
            )),
        }
    }
    Ok(VerifyOutcome::Certified(Certificate {
        case,
        scope: Scope::PerWord(w.clone()),
        generators: set.clone(),
        prefix: g.clone(),
        claim: Some(format!("the composition {} is irreducible over Q", g.concat(w))),
        asserted: asserted.is_some(),
        trail,
        alternatives: Vec::new(),
    }))
}

fn justify_prefix(
    set: &GeneratorSet,
    g: &Word,
    asserted: Option<CaseTag>,
) -> Result<(CaseTag, Vec<TrailEntry>), CertifyError> {
    if let Some(case) = asserted {
        let entry = TrailEntry::new(format!("prefix {g} asserted by caller as {case}"), None, true);
        return Ok((case, vec![entry]));
    }
    if g.is_empty() {
        return Ok((CaseTag::SingleGenerator, Vec::new()));
    }
    let first = g.indices()[0];
    if g.indices().iter().all(|&i| i == first) && classify_type(set.p(), set.coeff(first)).irreducible_over_q {
        // iterates of an irreducible x^p + c with integer c stay irreducible
        return Ok((CaseTag::SingleGenerator, vec![base_entry(set, first)]));
    }
    let mut all = candidates(set)?;
    all.sort_by_key(candidate_order);
    all.into_iter()
        .find(|c| g.starts_with(&c.prefix) && !c.prefix.is_empty())
        .map(|c| {
            let mut trail = c.trail;
            trail.insert(0, TrailEntry::new(format!("prefix {g} extends universal prefix {}", c.prefix), None, true));
            (c.case, trail)
        })
        .ok_or_else(|| CertifyError::PrefixNotCertified(g.clone()))
}

/// The family `S = {x^p + t^p - t^{p²}, x^p + (-1)^{p-1} t^p, extras…}` for
/// `p ∈ {2, 3}`, whose prefix is irreducible over ℚ and reducible mod every
/// prime.
pub fn local_global_family(p: u32, t: &BigInt, extras: &[BigInt]) -> Result<Certificate, CertifyError> {
    if p != 2 && p != 3 {
        return Err(CertifyError::DomainError(format!("p must be 2 or 3, got {p}")));
    }
    if t.abs() <= BigInt::one() {
        return Err(CertifyError::DomainError(format!("t must avoid 0 and ±1, got {t}")));
    }
    let tp = Pow::pow(t, p);
    let c0 = &tp - Pow::pow(t, p * p);
    let c1 = if p == 2 { -&tp } else { tp.clone() };
    let mut coeffs = vec![c0, c1];
    coeffs.extend(extras.iter().cloned());
    let set = GeneratorSet::new(p, coeffs).map_err(|e| CertifyError::DomainError(e.to_string()))?;
    let (prefix, case_inner) = if p == 2 {
        (word_of(&[0, 0, 1, 0]), CaseTag::TypeIPlusMatchingReducible)
    } else {
        (word_of(&[0, 1, 0]), CaseTag::P3SpecialPair)
    };
    let mut trail = vec![base_entry(&set, 0)];
    trail.push(TrailEntry::new(format!("phi_0 is Type I with s = {t}"), Some(t.clone()), true));
    trail.push(TrailEntry::new(
        format!("irreducibility over Q via {case_inner}"),
        None,
        true,
    ));
    let outer = prefix.prefix(prefix.len() - 1);
    let v = set.orbit_value(&outer)?;
    trail.push(TrailEntry::new(
        format!("orbit value of {outer} is {}^{p}, a {} mod every prime", t, power_name(p)),
        Some(v.clone()),
        v == tp,
    ));
    trail.push(TrailEntry::new(
        format!("phi_0 is a perfect {} mod {p}", power_name(p)),
        None,
        true,
    ));
    Ok(Certificate {
        case: CaseTag::LocalGlobalFamily,
        scope: Scope::Universal,
        generators: set,
        prefix,
        claim: Some("irreducible over Q, reducible modulo every prime".into()),
        asserted: false,
        trail,
        alternatives: Vec::new(),
    })
}

/// Per-length and cumulative share of words that extend `prefix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProportionStats {
    pub r: usize,
    pub prefix_len: usize,
    pub max_len: usize,
    /// `(length, words extending the prefix, all words)`.
    pub per_length: Vec<(usize, u128, u128)>,
    pub cumulative: BigRational,
    pub bound: BigRational,
}

impl ProportionStats {
    pub fn to_json(&self) -> Value {
        json!({
            "r": self.r,
            "prefix_len": self.prefix_len,
            "max_len": self.max_len,
            "per_length": self.per_length.iter().map(|(n, c, t)| json!({
                "length": n,
                "certified": c.to_string(),
                "total": t.to_string(),
                "fraction": BigRational::new(BigInt::from(*c), BigInt::from(*t)).to_string(),
            })).collect::<Vec<_>>(),
            "cumulative": self.cumulative.to_string(),
            "cumulative_decimal": ratio_f64(&self.cumulative),
            "bound": self.bound.to_string(),
            "meets_bound_from_length": self.prefix_len,
        })
    }
}

fn ratio_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Counts words of length `1..=max_len` that start with `prefix` by walking
/// the enumeration.
pub fn proportion_by_enumeration(set: &GeneratorSet, prefix: &Word, max_len: usize) -> ProportionStats {
    let r = set.r();
    let mut per_length: Vec<(usize, u128, u128)> = (1..=max_len).map(|n| (n, 0, 0)).collect();
    for w in set.words(max_len) {
        let slot = &mut per_length[w.len() - 1];
        slot.2 += 1;
        if w.starts_with(prefix) {
            slot.1 += 1;
        }
    }
    finish_stats(r, prefix.len(), max_len, per_length)
}

/// The same numbers in closed form: `r^{n-|g|}` of the `r^n` words of length
/// `n ≥ |g|` extend `g`.
pub fn proportion_closed_form(r: usize, prefix_len: usize, max_len: usize) -> ProportionStats {
    let r128 = r as u128;
    let per_length = (1..=max_len)
        .map(|n| {
            let total = r128.pow(n as u32);
            let cert = if n >= prefix_len { r128.pow((n - prefix_len) as u32) } else { 0 };
            (n, cert, total)
        })
        .collect();
    finish_stats(r, prefix_len, max_len, per_length)
}

fn finish_stats(r: usize, prefix_len: usize, max_len: usize, per_length: Vec<(usize, u128, u128)>) -> ProportionStats {
    let cert: u128 = per_length.iter().map(|x| x.1).sum();
    let total: u128 = per_length.iter().map(|x| x.2).sum();
    let cumulative = if total == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(cert), BigInt::from(total))
    };
    let bound = BigRational::new(BigInt::one(), Pow::pow(BigInt::from(r), prefix_len as u32));
    ProportionStats { r, prefix_len, max_len, per_length, cumulative, bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::type1_coefficient;

    fn set(p: u32, c: &[i64]) -> GeneratorSet {
        GeneratorSet::from_i64s(p, c).unwrap()
    }

    fn word(v: &[usize]) -> Word {
        Word(v.to_vec())
    }

    fn poly(p: u32, c: i64) -> UnicriticalPoly {
        UnicriticalPoly::new(p, BigInt::from(c)).unwrap()
    }

    #[test]
    fn pick_examples() {
        let c = pick_universal_prefix(&set(2, &[2, 3])).unwrap();
        assert_eq!((c.case, c.prefix.clone()), (CaseTag::NonSpecialPhi4, word(&[0, 0, 0, 0])));
        assert_eq!(c.scope, Scope::Universal);
        let c = pick_universal_prefix(&set(2, &[-12, -4])).unwrap();
        assert_eq!((c.case, c.prefix.clone()), (CaseTag::TypeIPlusMatchingReducible, word(&[0, 0, 1, 0])));
        let s5 = GeneratorSet::new(
            5,
            vec![type1_coefficient(5, &BigInt::from(2)), BigInt::from(32)],
        )
        .unwrap();
        assert_eq!(
            pick_universal_prefix(&s5),
            Err(CertifyError::OpenCase { p: 5, t: BigInt::from(2) })
        );
        assert_eq!(
            pick_universal_prefix(&set(2, &[-4, -9])),
            Err(CertifyError::NoIrreducibleGenerator)
        );
        let c = pick_universal_prefix(&set(3, &[5])).unwrap();
        assert_eq!((c.case, c.prefix.len()), (CaseTag::SingleGenerator, 0));
    }

    #[test]
    fn pick_covers_every_branch() {
        let pick = |p, c: &[i64]| {
            let cert = pick_universal_prefix(&set(p, c)).unwrap();
            (cert.case, cert.prefix)
        };
        assert_eq!(pick(3, &[2, 8]), (CaseTag::NonSpecialPhi3, word(&[0, 0, 0])));
        assert_eq!(pick(2, &[-12, -72]), (CaseTag::BothSpecialEitherOr, word(&[0, 0, 0, 1])));
        assert_eq!(pick(2, &[-3, -21]), (CaseTag::BothSpecialEitherOr, word(&[0, 0, 0, 1])));
        assert_eq!(pick(2, &[-12, -9]), (CaseTag::TypeIPlusReducibleDistinct, word(&[0, 0, 0, 1, 0])));
        assert_eq!(pick(2, &[-12, 0]), (CaseTag::TypeIPlusReducibleDistinct, word(&[0, 0, 0, 1, 0])));
        assert_eq!(pick(2, &[-3, -4]), (CaseTag::TypeIIPlusReducible, word(&[0, 0, 0, 1, 0])));
        assert_eq!(pick(3, &[-504, -19_656]), (CaseTag::OddTwoSpecial, word(&[0, 0, 0, 1])));
        assert_eq!(pick(3, &[-504, 27]), (CaseTag::FLTDistinct, word(&[0, 0, 0, 1])));
        assert_eq!(pick(3, &[-504, 0]), (CaseTag::FLTZeroT, word(&[0, 0, 0, 1, 1])));
        assert_eq!(pick(3, &[-504, 8]), (CaseTag::P3SpecialPair, word(&[0, 1, 0])));
        // shortest prefix wins over index order
        assert_eq!(pick(2, &[-12, -4, 2]), (CaseTag::TypeIPlusMatchingReducible, word(&[0, 0, 1, 0])));
        assert_eq!(pick(2, &[-12, -9, 2]), (CaseTag::NonSpecialPhi4, word(&[2, 2, 2, 2])));
    }

    #[test]
    fn flt_zero_t_uses_minimal_power_index() {
        // s = 8 is a cube, so the reducible x³ is repeated three times
        let c = type1_coefficient(3, &BigInt::from(8));
        let s = GeneratorSet::new(3, vec![c, BigInt::zero()]).unwrap();
        let cert = pick_universal_prefix(&s).unwrap();
        assert_eq!(cert.case, CaseTag::FLTZeroT);
        assert_eq!(cert.prefix, word(&[0, 0, 0, 1, 1, 1]));
    }

    #[test]
    fn overlapping_cases_are_listed() {
        let cert = pick_universal_prefix(&set(2, &[-12, -4, -9])).unwrap();
        assert_eq!(cert.prefix, word(&[0, 0, 1, 0]));
        assert!(cert
            .alternatives
            .contains(&(CaseTag::TypeIPlusReducibleDistinct, word(&[0, 0, 0, 2, 0]))));
    }

    #[test]
    fn either_or_examples() {
        let d = decide_either_or(&poly(2, -12), &poly(2, -72)).unwrap();
        assert_eq!(d.outer, 0);
        assert!(d.trail.iter().all(|t| t.passed));
        let vals: Vec<BigInt> = d.trail.iter().filter_map(|t| t.value.clone()).collect();
        assert_eq!(vals, vec![BigInt::from(68), BigInt::from(76)]);
        let d = decide_either_or(&poly(2, -3), &poly(2, -21)).unwrap();
        assert_eq!(d.outer, 0);
        let vals: Vec<BigInt> = d.trail.iter().filter_map(|t| t.value.clone()).collect();
        assert_eq!(vals, vec![BigInt::from(19), BigInt::from(23)]);
        assert_eq!(decide_either_or(&poly(2, -12), &poly(2, -12)), Err(CertifyError::IdenticalPair));
        assert!(matches!(
            decide_either_or(&poly(2, 2), &poly(2, -12)),
            Err(CertifyError::InputNotSpecial(_))
        ));
    }

    #[test]
    fn either_or_falls_back_to_second_orientation() {
        // Type II u = 6 (c = -1333) over Type I s = 2 (c = -12): 37 + 12 = 7²
        let d = decide_either_or(&poly(2, -1333), &poly(2, -12)).unwrap();
        assert_eq!(d.outer, 1);
        assert!(d.trail.iter().any(|t| !t.passed && t.value == Some(BigInt::from(49))));
        let cert = pick_universal_prefix(&set(2, &[-1333, -12])).unwrap();
        assert_eq!(cert.prefix, word(&[1, 1, 1, 0]));
    }

    #[test]
    fn verify_examples() {
        let s = set(2, &[-12, -4]);
        match verify_word_irreducible(&s, &word(&[0, 0, 1, 0]), &word(&[1, 1]), None).unwrap() {
            VerifyOutcome::Certified(c) => {
                assert_eq!(c.scope, Scope::PerWord(word(&[1, 1])));
                assert_eq!(c.trail.iter().filter(|t| t.check.starts_with("level")).count(), 2);
                assert!(c.trail.iter().all(|t| t.passed));
            }
            other => panic!("{other:?}"),
        }
        match verify_word_irreducible(&s, &word(&[0]), &Word::empty(), None).unwrap() {
            VerifyOutcome::Certified(c) => {
                assert_eq!(c.trail.len(), 1);
                assert!(c.trail[0].check.contains("irreducible"));
            }
            other => panic!("{other:?}"),
        }
        match verify_word_irreducible(&s, &word(&[0]), &word(&[0, 1]), None).unwrap() {
            VerifyOutcome::Inconclusive { level, value, root, .. } => {
                assert_eq!((level, value, root), (2, BigInt::from(4), BigInt::from(2)));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            verify_word_irreducible(&s, &word(&[1, 0]), &word(&[0]), None),
            Err(CertifyError::PrefixNotCertified(word(&[1, 0])))
        );
        assert!(verify_word_irreducible(&s, &word(&[1, 0]), &word(&[0]), Some(CaseTag::NonSpecialPhi4)).is_ok());
        assert!(matches!(
            verify_word_irreducible(&s, &word(&[0, 5]), &word(&[0]), None),
            Err(CertifyError::Semigroup(SemigroupError::IndexOutOfRange { .. }))
        ));
    }

    #[test]
    fn minimal_power_index_examples() {
        let m = |p, s: i64| minimal_power_index(p, &BigInt::from(s));
        assert_eq!(m(3, 2), Ok(2));
        assert_eq!(m(3, 8), Ok(3));
        assert_eq!(m(3, 512), Ok(4));
        assert_eq!(m(3, -512), Ok(4));
        assert!(matches!(m(3, 1), Err(CertifyError::DomainError(_))));
        assert!(matches!(m(5, 0), Err(CertifyError::DomainError(_))));
    }

    #[test]
    fn family_examples() {
        let c = local_global_family(2, &BigInt::from(2), &[]).unwrap();
        assert_eq!(c.generators, set(2, &[-12, -4]));
        assert_eq!(c.prefix, word(&[0, 0, 1, 0]));
        assert!(c.trail.iter().all(|t| t.passed));
        let c = local_global_family(3, &BigInt::from(2), &[]).unwrap();
        assert_eq!(c.generators, set(3, &[-504, 8]));
        assert_eq!(c.prefix, word(&[0, 1, 0]));
        assert!(matches!(local_global_family(2, &BigInt::from(1), &[]), Err(CertifyError::DomainError(_))));
        assert!(matches!(local_global_family(5, &BigInt::from(2), &[]), Err(CertifyError::DomainError(_))));
        assert!(matches!(
            local_global_family(2, &BigInt::from(2), &[BigInt::from(-4)]),
            Err(CertifyError::DomainError(_))
        ));
        // the engine agrees with the family prefix
        for (p, t) in [(2u32, 2i64), (2, 3), (2, -5), (3, 2), (3, -3)] {
            let fam = local_global_family(p, &BigInt::from(t), &[]).unwrap();
            let pick = pick_universal_prefix(&fam.generators).unwrap();
            assert_eq!(pick.prefix, fam.prefix, "p = {p}, t = {t}");
        }
    }

    #[test]
    fn proportion_counting() {
        let s = set(2, &[-12, -4]);
        let cert = pick_universal_prefix(&s).unwrap();
        let by_walk = proportion_by_enumeration(&s, &cert.prefix, 12);
        let closed = proportion_closed_form(2, 4, 12);
        assert_eq!(by_walk, closed);
        assert_eq!(closed.cumulative, BigRational::new(BigInt::from(511), BigInt::from(8190)));
        for &(n, c, t) in &closed.per_length[4..] {
            assert_eq!(BigRational::new(BigInt::from(c), BigInt::from(t)), closed.bound, "n = {n}");
        }
    }

    #[test]
    fn case_tag_round_trip() {
        for c in CaseTag::ALL {
            assert_eq!(c.name().parse::<CaseTag>().unwrap(), c);
        }
        assert!("Nope".parse::<CaseTag>().is_err());
    }

    #[test]
    fn certificate_json_shape() {
        let c = pick_universal_prefix(&set(2, &[-12, -4])).unwrap();
        let v = c.to_json(false);
        assert_eq!(v["case"], "TypeIPlusMatchingReducible");
        assert_eq!(v["prefix"], "[0,0,1,0]");
        assert_eq!(v["scope"], "universal");
        assert_eq!(v["generators"], json!(["-12", "-4"]));
        assert!(v["trail"].as_array().is_some_and(|t| !t.is_empty()));
    }
}
