//! Odd-p audits plus the small classification sanity checks.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Pow, Signed, ToPrimitive};
use serde_json::{json, Value};

use super::{chunked_search, split_chunks, was_processed, AuditReport, RunOptions, Violation};
use crate::arith::{kth_root_floor, perfect_pth_power};
use crate::classify::{
    base_irreducible_q, type1_coefficient, type1_witnesses, type2_coefficient, type2_witnesses,
};

/// Largest `|x|` allowed by `x^p + c = y^p`: `p(|x| - 1)^{p-1} <= |c|`.
fn lemma_bound(p: u32, c_abs: &BigInt) -> BigInt {
    let (r, _) = kth_root_floor(&(c_abs / p), p - 1).expect("non-negative");
    r + 1
}

fn ceil_root(n: &BigInt, k: u32) -> BigInt {
    let (r, exact) = kth_root_floor(n, k).expect("non-negative");
    if exact {
        r
    } else {
        r + 1
    }
}

/// `p(|x| - 1)^{p-1} <= |c|`, checked without overflow.
fn within_lemma(p: u32, x: i128, c_abs: i128) -> bool {
    let m = x.unsigned_abs();
    if m <= 1 {
        return true;
    }
    (m - 1)
        .checked_pow(p - 1)
        .and_then(|v| v.checked_mul(u128::from(p)))
        .is_some_and(|v| v <= c_abs as u128)
}

fn phi_i128(x: i128, p: u32, c: i128) -> Option<i128> {
    x.checked_pow(p)?.checked_add(c)
}

fn iterate_big(a: &BigInt, p: u32, c: &BigInt, n: usize) -> BigInt {
    (0..n).fold(a.clone(), |x, _| Pow::pow(&x, p) + c)
}

/// Search radius for `a`: the lemma bound plus two, widened if needed so that
/// every `|a|` outside it provably pushes `phi^2(a)` beyond the lemma bound.
fn a_radius(p: u32, c_abs: &BigInt) -> BigInt {
    let xb = lemma_bound(p, c_abs);
    let b1 = ceil_root(&(&xb + c_abs), p);
    let b2 = ceil_root(&(&b1 + c_abs), p);
    (xb + 1u32).max(b2)
}

/// For every irreducible `x^p + c` with `0 < |c| <= c_bound`, all `a` with
/// `phi^3(a)` a p-th power are exactly the `a = s^p` for Type I witnesses
/// `s`. Also checks the bound lemma on `|x|, |y| <= 50`.
pub fn audit_pth_classification(p: u32, c_bound: &BigInt, opts: &RunOptions) -> AuditReport {
    assert!(p >= 3 && p % 2 == 1, "odd prime exponent required");
    let cb = c_bound.to_i64().expect("c_bound fits in i64").abs();
    let params = json!({
        "p": p,
        "c_bound": cb,
        "a_bound": "max((|c|/p)^(1/(p-1)) + 2, growth radius)",
        "bound_lemma_window": 50,
    });
    let cs: Vec<i64> = (-cb..=cb)
        .filter(|&c| c != 0 && base_irreducible_q(p, &BigInt::from(c)))
        .collect();
    let segments: Vec<(i64, i64, i64)> = cs
        .iter()
        .map(|&c| {
            let r = a_radius(p, &BigInt::from(c.abs()))
                .to_i64()
                .expect("radius fits");
            (c, -r, r)
        })
        .collect();
    let chunks = split_chunks(segments, opts.chunk_size);
    let (mut report, hits) = chunked_search("pth", params, &chunks, opts, |ch| {
        let c = i128::from(ch.key);
        let c_abs = c.abs();
        let cbig = BigInt::from(ch.key);
        let mut hits = Vec::new();
        for a in ch.lo..=ch.hi {
            let Some(x1) = phi_i128(i128::from(a), p, c) else { continue };
            // Overflow of x1^p means |phi^2(a)| is far past the lemma bound.
            let Some(x2) = phi_i128(x1, p, c) else { continue };
            if !within_lemma(p, x2, c_abs) {
                continue;
            }
            let x3 = Pow::pow(&BigInt::from(x2), p) + &cbig;
            if perfect_pth_power(&x3, p).is_some() {
                hits.push((ch.key, a));
            }
        }
        (Vec::new(), hits)
    });

    let mut by_c: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for (c, a) in hits {
        by_c.entry(c).or_default().insert(a);
    }
    let mut expected: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for &c in &cs {
        let w: BTreeSet<i64> = type1_witnesses(p, &BigInt::from(c))
            .iter()
            .map(|s| Pow::pow(s, p).to_i64().expect("s^p fits"))
            .collect();
        if !w.is_empty() {
            expected.insert(c, w);
        }
    }
    for (&c, found) in &by_c {
        for &a in found {
            if !expected.get(&c).is_some_and(|w| w.contains(&a)) {
                let v = iterate_big(&a.into(), p, &c.into(), 3);
                report.violations.push(Violation::new(
                    "phi^3(a) is a p-th power but a is not s^p for a Type I witness",
                    &[("p", p.into()), ("c", c.into()), ("a", a.into())],
                    perfect_pth_power(&v, p).is_some(),
                ));
            }
        }
    }
    for (&c, want) in &expected {
        for &a in want {
            let seen = by_c.get(&c).is_some_and(|f| f.contains(&a));
            if !seen && was_processed(&chunks, opts, c, a) {
                let v = iterate_big(&a.into(), p, &c.into(), 3);
                report.violations.push(Violation::new(
                    "fixed point a = s^p not found by the search",
                    &[("p", p.into()), ("c", c.into()), ("a", a.into())],
                    perfect_pth_power(&v, p).is_none(),
                ));
            }
        }
    }

    let (lemma_checked, lemma_violations) = bound_lemma_window(50);
    report.checked += lemma_checked;
    report.violations.extend(lemma_violations);

    report.details = json!({
        "irreducible_c": cs.len(),
        "hits_by_c": by_c
            .iter()
            .map(|(c, f)| json!({ "c": c, "hits": f }))
            .collect::<Vec<Value>>(),
        "bound_lemma_pairs": lemma_checked,
    });
    report
}

/// `x^p + c = y^p` with `c != 0` forces `|x| <= (|c|/p)^{1/(p-1)} + 1`, for
/// `p` in {3, 5, 7} and `|x|, |y| <= w`.
fn bound_lemma_window(w: i64) -> (u64, Vec<Violation>) {
    let mut checked = 0;
    let mut out = Vec::new();
    for p in [3u32, 5, 7] {
        for x in -w..=w {
            for y in -w..=w {
                let c = i128::from(y).pow(p) - i128::from(x).pow(p);
                if c == 0 {
                    continue;
                }
                checked += 1;
                if !within_lemma(p, i128::from(x), c.abs()) {
                    let cb = BigInt::from(c);
                    let recheck = &Pow::pow(&BigInt::from(x), p) + &cb == Pow::pow(&BigInt::from(y), p)
                        && BigInt::from(x.abs()) > lemma_bound(p, &cb.abs());
                    out.push(Violation::new(
                        "x^p + c = y^p with |x| above (|c|/p)^(1/(p-1)) + 1",
                        &[("p", p.into()), ("x", x.into()), ("y", y.into()), ("c", cb)],
                        recheck,
                    ));
                }
            }
        }
    }
    (checked, out)
}

/// Witness magnitudes respect `|s| <= floor(|c|^{1/p^2}) + 1` (Type I, p in
/// {2,3,5}) and `|s| <= floor(|c|^{1/4}) + 1` (Type II), and classify
/// recovers each planted witness.
pub fn audit_witness_bound(range: i64) -> AuditReport {
    let t0 = Instant::now();
    let mut report = AuditReport::new("witness-bound", json!({ "s_max": range, "p": [2, 3, 5] }));
    let mut push = |what: &str, p: u32, s: &BigInt, c: &BigInt, recheck: bool| {
        report.violations.push(Violation::new(
            what,
            &[("p", p.into()), ("s", s.clone()), ("c", c.clone())],
            recheck,
        ));
    };
    let mut checked = 0u64;
    for s in (2..=range).flat_map(|s| [s, -s]) {
        let s = BigInt::from(s);
        for p in [2u32, 3, 5] {
            checked += 1;
            let c = type1_coefficient(p, &s);
            let (root, _) = kth_root_floor(&c.abs(), p * p).expect("non-negative");
            if s.abs() > &root + 1 {
                push("Type I witness exceeds the search bound", p, &s, &c, true);
            }
            if !type1_witnesses(p, &c).contains(&s) {
                let recheck = type1_coefficient(p, &s) == c;
                push("classify missed a planted Type I witness", p, &s, &c, recheck);
            }
        }
    }
    for s in (1..=range).flat_map(|s| [s, -s]) {
        let s = BigInt::from(s);
        checked += 1;
        let c = type2_coefficient(&s);
        let (root, _) = kth_root_floor(&c.abs(), 4).expect("non-negative");
        if s.abs() > &root + 1 {
            push("Type II witness exceeds the search bound", 2, &s, &c, true);
        }
        if !type2_witnesses(&c).contains(&s) {
            let recheck = type2_coefficient(&s) == c;
            push("classify missed a planted Type II witness", 2, &s, &c, recheck);
        }
    }
    report.checked = checked;
    report.seconds = t0.elapsed().as_secs_f64();
    report
}

/// Searches for `c` that is simultaneously Type I and Type II for p = 2.
/// None can exist: equality would give `(2s^2 - 1)^2 - (2u^2 + 1)^2 = 4`.
pub fn audit_coincidence(range: i64) -> AuditReport {
    let t0 = Instant::now();
    let mut report = AuditReport::new("coincidence", json!({ "s_max": range }));
    for s in 2..=range {
        let c = type1_coefficient(2, &BigInt::from(s));
        report.checked += 1;
        if let Some(u) = type2_witnesses(&c).first() {
            let recheck = type2_coefficient(u) == c;
            report.violations.push(Violation::new(
                "c is both Type I and Type II",
                &[("s", s.into()), ("u", u.clone()), ("c", c.clone())],
                recheck,
            ));
        }
    }
    for u in 1..=range {
        let c = type2_coefficient(&BigInt::from(u));
        report.checked += 1;
        if let Some(s) = type1_witnesses(2, &c).first() {
            let recheck = type1_coefficient(2, s) == c;
            report.violations.push(Violation::new(
                "c is both Type II and Type I",
                &[("u", u.into()), ("s", s.clone()), ("c", c.clone())],
                recheck,
            ));
        }
    }
    report.note = Some("no coincidence is possible: (2s^2-1)^2 - (2u^2+1)^2 = 4 has no solution".into());
    report.seconds = t0.elapsed().as_secs_f64();
    report
}
