//! Brute-force oracle suite. Each audit enumerates a bounded window, checks
//! every hit against the classification it is meant to confirm, and returns
//! an [`AuditReport`]. Violations are re-substituted into the raw equations
//! (in `BigInt`) before they are recorded.

mod curves;
mod diophantine;
mod pth;
mod quartic;
mod squares;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::report::{digest, sorted, SCHEMA_VERSION};

pub use curves::{curve_point_search, known_curves, CurveSpec, RationalPoint};
pub use diophantine::audit_diophantine;
pub use pth::{audit_coincidence, audit_pth_classification, audit_witness_bound};
pub use quartic::{audit_quartic_octic, monic_factor_search, FactorSearch};
pub use squares::{audit_mod24_sieve, audit_refinement_lemmas, audit_square_classification};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("unknown curve id {0:?}")]
    UnknownCurve(String),
    #[error("unknown audit claim {0:?}")]
    UnknownClaim(String),
    #[error("invalid audit parameter: {0}")]
    InvalidParameter(String),
}

/// One witness tuple that contradicts the audited statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub what: String,
    pub values: Vec<(String, BigInt)>,
    /// Whether the tuple satisfied the raw defining equation when
    /// re-substituted with exact arithmetic. A `false` here means the fast
    /// path disagreed with the slow one, which is itself a failure.
    pub rechecked: bool,
}

impl Violation {
    pub fn new(what: impl Into<String>, values: &[(&str, BigInt)], rechecked: bool) -> Self {
        Violation {
            what: what.into(),
            values: values
                .iter()
                .map(|(k, v)| ((*k).to_string(), v.clone()))
                .collect(),
            rechecked,
        }
    }

    fn to_json(&self, full: bool) -> Value {
        let values: Map<String, Value> = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(digest(v, full))))
            .collect();
        json!({ "what": self.what, "values": values, "rechecked": self.rechecked })
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub claim: String,
    pub params: Value,
    /// Candidates examined (after resumption skips).
    pub checked: u64,
    pub violations: Vec<Violation>,
    pub details: Value,
    pub note: Option<String>,
    pub seconds: f64,
    pub chunks_total: usize,
    pub resumed_from: usize,
}

impl AuditReport {
    fn new(claim: &str, params: Value) -> Self {
        AuditReport {
            claim: claim.to_string(),
            params,
            checked: 0,
            violations: Vec::new(),
            details: Value::Null,
            note: None,
            seconds: 0.0,
            chunks_total: 0,
            resumed_from: 0,
        }
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// JSON form. `timing = false` drops `seconds` so that repeated runs are
    /// byte-identical.
    pub fn to_json(&self, full: bool, timing: bool) -> Value {
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "claim": self.claim,
            "params": self.params,
            "checked": self.checked,
            "violations": self.violations.iter().map(|x| x.to_json(full)).collect::<Vec<_>>(),
            "pass": self.pass(),
            "details": self.details,
            "chunks": { "total": self.chunks_total, "resumed_from": self.resumed_from },
        });
        if let Some(note) = &self.note {
            v["note"] = json!(note);
        }
        if timing {
            v["seconds"] = json!(self.seconds);
        }
        sorted(v)
    }

    fn absorb(&mut self, other: AuditReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
        self.chunks_total += other.chunks_total;
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} candidates, {} violations)",
            self.claim,
            if self.pass() { "PASS" } else { "FAIL" },
            self.checked,
            self.violations.len()
        )?;
        for v in &self.violations {
            let vals: Vec<String> = v
                .values
                .iter()
                .map(|(k, x)| format!("{k}={}", digest(x, false)))
                .collect();
            write!(f, "\n  violation: {} [{}]", v.what, vals.join(", "))?;
        }
        if let Some(note) = &self.note {
            write!(f, "\n  note: {note}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProgressEvent {
    pub done: usize,
    pub total: usize,
}

pub type ProgressFn = Arc<dyn Fn(ProgressEvent) + Send + Sync>;

/// Chunking, resumption and progress reporting shared by all audits.
#[derive(Clone)]
pub struct RunOptions {
    pub chunk_size: u64,
    /// Index of the first chunk to process; earlier chunks are skipped.
    pub resume_from: usize,
    pub progress: Option<ProgressFn>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            chunk_size: 10_000,
            resume_from: 0,
            progress: None,
        }
    }
}

impl fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunOptions")
            .field("chunk_size", &self.chunk_size)
            .field("resume_from", &self.resume_from)
            .finish()
    }
}

/// A contiguous slice `lo..=hi` of the inner search variable for one value
/// of the outer key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Chunk {
    pub key: i64,
    pub lo: i64,
    pub hi: i64,
}

impl Chunk {
    fn len(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }
}

pub(crate) fn split_chunks(
    segments: impl IntoIterator<Item = (i64, i64, i64)>,
    size: u64,
) -> Vec<Chunk> {
    let size = size.max(1) as i64;
    let mut out = Vec::new();
    for (key, lo, hi) in segments {
        let mut start = lo;
        while start <= hi {
            let end = hi.min(start.saturating_add(size - 1));
            out.push(Chunk { key, lo: start, hi: end });
            start = end + 1;
        }
    }
    out
}

/// Runs `f` over every chunk at index `>= resume_from`, in parallel, and
/// returns the results in chunk order together with the candidate count.
pub(crate) fn run_chunks<T, F>(chunks: &[Chunk], opts: &RunOptions, f: F) -> (Vec<T>, u64)
where
    T: Send,
    F: Fn(&Chunk) -> T + Sync + Send,
{
    let start = opts.resume_from.min(chunks.len());
    let todo = &chunks[start..];
    let done = AtomicUsize::new(0);
    let total = todo.len();
    let results = todo
        .par_iter()
        .map(|c| {
            let r = f(c);
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(cb) = &opts.progress {
                cb(ProgressEvent { done: n, total });
            }
            r
        })
        .collect();
    (results, todo.iter().map(Chunk::len).sum())
}

/// Wraps a chunked search: timing, chunk bookkeeping and the merge. Each
/// chunk yields violations plus arbitrary per-chunk hits.
pub(crate) fn chunked_search<T, F>(
    claim: &str,
    params: Value,
    chunks: &[Chunk],
    opts: &RunOptions,
    f: F,
) -> (AuditReport, Vec<T>)
where
    T: Send,
    F: Fn(&Chunk) -> (Vec<Violation>, Vec<T>) + Sync + Send,
{
    let t0 = Instant::now();
    let mut report = AuditReport::new(claim, params);
    let (parts, checked) = run_chunks(chunks, opts, f);
    let mut hits = Vec::new();
    for (v, h) in parts {
        report.violations.extend(v);
        hits.extend(h);
    }
    report.checked = checked;
    report.chunks_total = chunks.len();
    report.resumed_from = opts.resume_from.min(chunks.len());
    if report.resumed_from > 0 {
        report.note = Some(format!(
            "resumed: chunks before index {} were not re-run",
            report.resumed_from
        ));
    }
    report.seconds = t0.elapsed().as_secs_f64();
    (report, hits)
}

/// Whether `(key, x)` lies in a chunk that this run actually processed.
pub(crate) fn was_processed(chunks: &[Chunk], opts: &RunOptions, key: i64, x: i64) -> bool {
    chunks
        .iter()
        .position(|c| c.key == key && c.lo <= x && x <= c.hi)
        .is_some_and(|i| i >= opts.resume_from)
}

/// Audit names accepted by [`run_claim`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Mod24,
    Squares,
    Refinement,
    Pth,
    Diophantine,
    Curves,
    Quartic,
    WitnessBound,
    Coincidence,
}

impl Claim {
    pub const ALL: [Claim; 9] = [
        Claim::Mod24,
        Claim::Squares,
        Claim::Refinement,
        Claim::Pth,
        Claim::Diophantine,
        Claim::Curves,
        Claim::Quartic,
        Claim::WitnessBound,
        Claim::Coincidence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Mod24 => "mod24",
            Claim::Squares => "squares",
            Claim::Refinement => "refinement",
            Claim::Pth => "pth",
            Claim::Diophantine => "diophantine",
            Claim::Curves => "curves",
            Claim::Quartic => "quartic",
            Claim::WitnessBound => "witness-bound",
            Claim::Coincidence => "coincidence",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| AuditError::UnknownClaim(s.to_string()))
    }
}

/// Parameters for [`run_claim`]; `range` is interpreted per claim.
#[derive(Debug, Clone)]
pub struct ClaimParams {
    pub range: i64,
    pub p: u32,
    pub curve: Option<String>,
}

/// Dispatches a named audit. `range` means: `|c_min|` for squares, `s_max`
/// for refinement, `c_bound` for pth, the enumeration radius for
/// diophantine, witness-bound and coincidence, the height bound for curves
/// and `t_max` for quartic. The mod-24 sieve ignores it.
pub fn run_claim(
    claim: Claim,
    params: &ClaimParams,
    opts: &RunOptions,
) -> Result<AuditReport, AuditError> {
    let r = params.range;
    let need = |min: i64| {
        if r < min {
            Err(AuditError::InvalidParameter(format!(
                "{claim} needs --range >= {min}, got {r}"
            )))
        } else {
            Ok(())
        }
    };
    match claim {
        Claim::Mod24 => Ok(audit_mod24_sieve()),
        Claim::Squares => {
            need(2)?;
            Ok(audit_square_classification(
                &BigInt::from(-r),
                &BigInt::from(-2),
                opts,
            ))
        }
        Claim::Refinement => {
            need(2)?;
            Ok(audit_refinement_lemmas(r as u32, opts))
        }
        Claim::Pth => {
            need(1)?;
            if params.p < 3 || !crate::arith::is_prime_u64(u64::from(params.p)) {
                return Err(AuditError::InvalidParameter(format!(
                    "pth needs an odd prime --p, got {}",
                    params.p
                )));
            }
            Ok(audit_pth_classification(params.p, &BigInt::from(r), opts))
        }
        Claim::Diophantine => {
            need(10)?;
            Ok(audit_diophantine(r, opts))
        }
        Claim::Curves => {
            need(100)?;
            match &params.curve {
                Some(id) => {
                    let spec = known_curves()
                        .into_iter()
                        .find(|c| c.id.eq_ignore_ascii_case(id))
                        .ok_or_else(|| AuditError::UnknownCurve(id.clone()))?;
                    Ok(curve_point_search(&spec, r, opts))
                }
                None => {
                    let t0 = Instant::now();
                    let mut all = AuditReport::new("curves", json!({ "height_bound": r }));
                    let mut found = Map::new();
                    for spec in known_curves() {
                        let rep = curve_point_search(&spec, r, opts);
                        found.insert(spec.id.to_string(), rep.details.clone());
                        all.absorb(rep);
                    }
                    all.details = Value::Object(found);
                    all.note = Some(curves::CONSISTENCY_NOTE.to_string());
                    all.seconds = t0.elapsed().as_secs_f64();
                    Ok(all)
                }
            }
        }
        Claim::Quartic => {
            need(2)?;
            Ok(audit_quartic_octic(r, opts))
        }
        Claim::WitnessBound => {
            need(2)?;
            Ok(audit_witness_bound(r))
        }
        Claim::Coincidence => {
            need(1)?;
            Ok(audit_coincidence(r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_segments_in_order() {
        let chunks = split_chunks([(5, -3, 4), (6, 0, 0)], 3);
        let lens: Vec<(i64, i64, i64)> = chunks.iter().map(|c| (c.key, c.lo, c.hi)).collect();
        assert_eq!(lens, vec![(5, -3, -1), (5, 0, 2), (5, 3, 4), (6, 0, 0)]);
    }

    #[test]
    fn resumption_skips_leading_chunks() {
        let chunks = split_chunks([(0, 1, 10)], 2);
        let opts = RunOptions {
            resume_from: 3,
            ..RunOptions::default()
        };
        let (res, checked) = run_chunks(&chunks, &opts, |c| c.lo);
        assert_eq!(res, vec![7, 9]);
        assert_eq!(checked, 4);
    }

    #[test]
    fn claim_names_round_trip() {
        for c in Claim::ALL {
            assert_eq!(c.name().parse::<Claim>().unwrap(), c);
        }
        assert!("nope".parse::<Claim>().is_err());
    }

    #[test]
    fn report_json_without_timing_is_stable() {
        let mut r = AuditReport::new("x", json!({"b": 1, "a": 2}));
        r.seconds = 1.5;
        let a = serde_json::to_string(&r.to_json(false, false)).unwrap();
        r.seconds = 2.5;
        let b = serde_json::to_string(&r.to_json(false, false)).unwrap();
        assert_eq!(a, b);
        assert!(r.to_json(false, true).get("seconds").is_some());
        assert_eq!(r.to_json(false, false)["pass"], json!(true));
    }
}
