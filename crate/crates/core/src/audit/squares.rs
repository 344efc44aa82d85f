//! Quadratic (p = 2) audits: squares in the fourth and third iterates.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use super::{chunked_search, split_chunks, was_processed, AuditReport, RunOptions, Violation};
use crate::arith::{exact_sqrt_i128, is_perfect_square};
use crate::classify::{base_irreducible_q, type1_witnesses, type2_witnesses};

#[inline]
fn step(x: i128, c: i128) -> Option<i128> {
    x.checked_mul(x)?.checked_add(c)
}

/// `phi^n(a)` for `phi = x^2 + c`, exactly.
fn iterate_big(a: i64, c: i64, n: usize) -> BigInt {
    let c = BigInt::from(c);
    (0..n).fold(BigInt::from(a), |x, _| &x * &x + &c)
}

/// Whether `phi^n(a)` is a square, pruning at the last step: if
/// `x^2 + c = y^2` then `|x| <= |c|`.
fn iterate_is_square(a: i64, c: i64, n: usize) -> bool {
    let c128 = i128::from(c);
    let bound = c128.abs();
    let mut x = i128::from(a);
    for _ in 0..n - 1 {
        match step(x, c128) {
            Some(v) => x = v,
            // |x|^2 overflowed, so the next value is far beyond |c|.
            None => return false,
        }
    }
    if x.abs() > bound {
        return false;
    }
    step(x, c128).and_then(exact_sqrt_i128).is_some()
}

/// Among `c` in {-2,-3,-5,-6,-7,-8}, only `c = -3` lets `phi^4(a)` be a
/// square modulo 24.
pub fn audit_mod24_sieve() -> AuditReport {
    let t0 = Instant::now();
    const CS: [i64; 6] = [-2, -3, -5, -6, -7, -8];
    let squares: BTreeSet<i64> = (0..24).map(|y| y * y % 24).collect();
    let mut report = AuditReport::new("mod24", json!({ "c": CS, "modulus": 24 }));
    let mut admitting = Vec::new();
    for c in CS {
        let sols: Vec<i64> = (0..24)
            .filter(|&a| {
                let v = (0..4).fold(a, |x, _| (x * x + c).rem_euclid(24));
                squares.contains(&v)
            })
            .collect();
        report.checked += 24;
        let recheck = |a: i64| {
            let v = iterate_big(a, c, 4);
            let r = v.mod_floor(&BigInt::from(24));
            squares.contains(&r.to_i64().unwrap_or(-1))
        };
        match (c == -3, sols.first()) {
            (false, Some(&a)) => report.violations.push(Violation::new(
                "phi^4(a) is a square mod 24",
                &[("c", c.into()), ("a", a.into())],
                recheck(a),
            )),
            (true, None) => report.violations.push(Violation::new(
                "no residue a with phi^4(a) a square mod 24",
                &[("c", c.into())],
                (0..24).all(|a| !recheck(a)),
            )),
            _ => {}
        }
        if !sols.is_empty() {
            admitting.push(json!({ "c": c, "residues": sols }));
        }
    }
    report.details = json!({ "admitting": admitting, "squares_mod_24": squares });
    report.seconds = t0.elapsed().as_secs_f64();
    report
}

/// Type I witnesses, Type II witnesses and the hits they predict.
type Expected = (Vec<BigInt>, Vec<BigInt>, BTreeSet<i64>);

/// For each irreducible `x^2 + c` with `c_min <= c <= c_max < 0`, finds all
/// `|a| <= 2|c|` with `phi^4(a)` a square and checks the hit set equals
/// `{±s^2}` over the Type I and Type II witnesses of `c`.
pub fn audit_square_classification(c_min: &BigInt, c_max: &BigInt, opts: &RunOptions) -> AuditReport {
    let params = json!({
        "c_min": c_min.to_string(),
        "c_max": c_max.to_string(),
        "a_bound": "2|c|",
    });
    let lo = c_min.to_i64().expect("c_min fits in i64");
    let hi = c_max.to_i64().expect("c_max fits in i64").min(-1);
    let cs: Vec<i64> = (lo..=hi)
        .filter(|&c| base_irreducible_q(2, &BigInt::from(c)))
        .collect();

    let mut expected: HashMap<i64, Expected> = HashMap::new();
    for &c in &cs {
        let cb = BigInt::from(c);
        let t1 = type1_witnesses(2, &cb);
        let t2 = type2_witnesses(&cb);
        let set: BTreeSet<i64> = t1
            .iter()
            .chain(&t2)
            .flat_map(|s| {
                let sq = (s * s).to_i64().expect("witness square fits");
                [sq, -sq]
            })
            .collect();
        if !set.is_empty() {
            expected.insert(c, (t1, t2, set));
        }
    }

    let chunks = split_chunks(cs.iter().map(|&c| (c, -2 * c.abs(), 2 * c.abs())), opts.chunk_size);
    let (mut report, hits) = chunked_search("squares", params, &chunks, opts, |ch| {
        let c = ch.key;
        let hits: Vec<(i64, i64)> = (ch.lo..=ch.hi)
            .filter(|&a| iterate_is_square(a, c, 4))
            .map(|a| (c, a))
            .collect();
        (Vec::new(), hits)
    });

    let mut by_c: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for (c, a) in hits {
        by_c.entry(c).or_default().insert(a);
    }
    for (&c, found) in &by_c {
        let want = expected.get(&c).map(|e| &e.2);
        for &a in found {
            if !want.is_some_and(|w| w.contains(&a)) {
                report.violations.push(Violation::new(
                    "phi^4(a) is a square but a is not ±s^2 for a witness s",
                    &[("c", c.into()), ("a", a.into())],
                    is_perfect_square(&iterate_big(a, c, 4)),
                ));
            }
        }
    }
    for (&c, (_, _, want)) in &expected {
        for &a in want {
            let seen = by_c.get(&c).is_some_and(|f| f.contains(&a));
            if !seen && was_processed(&chunks, opts, c, a) {
                report.violations.push(Violation::new(
                    "witness form a = ±s^2 not found by the search",
                    &[("c", c.into()), ("a", a.into())],
                    !is_perfect_square(&iterate_big(a, c, 4)),
                ));
            }
        }
    }
    report.violations.sort_by(|x, y| x.values.cmp(&y.values));

    let special: Vec<Value> = by_c
        .iter()
        .map(|(c, found)| {
            let (t1, t2) = expected
                .get(c)
                .map(|e| (e.0.clone(), e.1.clone()))
                .unwrap_or_default();
            json!({
                "c": c,
                "hits": found,
                "type1_s": t1.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "type2_s": t2.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        })
        .collect();
    report.details = json!({ "irreducible_c": cs.len(), "hits_by_c": special });
    report
}

/// Third-iterate refinement: Type I (`s >= 2`) hits are exactly `±s^2`,
/// Type II (`s >= 1`) hits are exactly `±(s^2 + 1)`, searching
/// `|a| <= s^2 + s^4 + 2`.
pub fn audit_refinement_lemmas(s_max: u32, opts: &RunOptions) -> AuditReport {
    let params = json!({ "s_max": s_max, "a_bound": "s^2 + s^4 + 2" });
    let s_max = i64::from(s_max);
    // Outer key: +s for Type I, -s for Type II.
    let coeff = |key: i64| -> i64 {
        let s = key.abs();
        if key > 0 {
            s * s - s.pow(4)
        } else {
            -1 - s * s - s.pow(4)
        }
    };
    let target = |key: i64| -> i64 {
        let s = key.abs();
        if key > 0 {
            s * s
        } else {
            s * s + 1
        }
    };
    let keys: Vec<i64> = (2..=s_max).chain((1..=s_max).map(|s| -s)).collect();
    let segments = keys.iter().map(|&k| {
        let s = k.abs();
        let b = s * s + s.pow(4) + 2;
        (k, -b, b)
    });
    let chunks = split_chunks(segments, opts.chunk_size);
    let (mut report, hits) = chunked_search("refinement", params, &chunks, opts, |ch| {
        let c = coeff(ch.key);
        let hits: Vec<(i64, i64)> = (ch.lo..=ch.hi)
            .filter(|&a| iterate_is_square(a, c, 3))
            .map(|a| (ch.key, a))
            .collect();
        (Vec::new(), hits)
    });

    let mut by_key: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for (k, a) in hits {
        by_key.entry(k).or_default().insert(a);
    }
    for &k in &keys {
        let c = coeff(k);
        let want = target(k);
        let found = by_key.get(&k).cloned().unwrap_or_default();
        let kind = if k > 0 { "Type I" } else { "Type II" };
        for &a in &found {
            if a.abs() != want {
                report.violations.push(Violation::new(
                    format!("{kind}: phi^3(a) is a square at an unexpected a"),
                    &[("s", k.abs().into()), ("c", c.into()), ("a", a.into())],
                    is_perfect_square(&iterate_big(a, c, 3)),
                ));
            }
        }
        for a in [want, -want] {
            if !found.contains(&a) && was_processed(&chunks, opts, k, a) {
                report.violations.push(Violation::new(
                    format!("{kind}: expected hit missing"),
                    &[("s", k.abs().into()), ("c", c.into()), ("a", a.into())],
                    !is_perfect_square(&iterate_big(a, c, 3)),
                ));
            }
        }
    }

    let sample: Vec<Value> = by_key
        .iter()
        .filter(|(k, _)| k.abs() <= 3)
        .map(|(k, f)| {
            json!({
                "type": if *k > 0 { "I" } else { "II" },
                "s": k.abs(),
                "c": coeff(*k),
                "hits": f,
            })
        })
        .collect();
    report.details = json!({
        "type1_checked": (2..=s_max).count(),
        "type2_checked": s_max.max(0),
        "small_cases": sample,
    });
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};

    fn small_opts() -> RunOptions {
        RunOptions {
            chunk_size: 97,
            ..RunOptions::default()
        }
    }

    #[test]
    fn mod24_sieve_singles_out_minus_three() {
        let r = audit_mod24_sieve();
        assert!(r.pass(), "{r}");
        assert_eq!(r.details["admitting"].as_array().unwrap().len(), 1);
        assert_eq!(r.details["admitting"][0]["c"], json!(-3));
    }

    #[test]
    fn square_hits_at_minus_twelve() {
        let r = audit_square_classification(&BigInt::from(-12), &BigInt::from(-12), &small_opts());
        assert!(r.pass(), "{r}");
        assert_eq!(r.details["hits_by_c"][0]["hits"], json!([-4, 4]));
        assert_eq!(r.details["hits_by_c"][0]["type1_s"], json!(["2", "-2"]));
    }

    #[test]
    fn square_classification_small_window() {
        let r = audit_square_classification(&BigInt::from(-100), &BigInt::from(-2), &small_opts());
        assert!(r.pass(), "{r}");
        let cs: Vec<i64> = r.details["hits_by_c"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["c"].as_i64().unwrap())
            .collect();
        assert_eq!(cs, vec![-91, -72, -21, -12, -3]);
    }

    #[test]
    fn refinement_small_cases() {
        let r = audit_refinement_lemmas(6, &small_opts());
        assert!(r.pass(), "{r}");
        let find = |ty: &str, s: i64| {
            r.details["small_cases"]
                .as_array()
                .unwrap()
                .iter()
                .find(|v| v["type"] == json!(ty) && v["s"] == json!(s))
                .map(|v| v["hits"].clone())
                .unwrap()
        };
        assert_eq!(find("I", 2), json!([-4, 4]));
        assert_eq!(find("II", 1), json!([-2, 2]));
        assert_eq!(find("II", 2), json!([-5, 5]));
    }

    #[test]
    fn pruned_test_agrees_with_exact_iteration() {
        for c in [-3i64, -12, -21, -7, -30] {
            for a in -60..=60 {
                for n in 1..=4 {
                    let slow = !iterate_big(a, c, n).is_negative()
                        && is_perfect_square(&iterate_big(a, c, n));
                    assert_eq!(iterate_is_square(a, c, n), slow, "c={c} a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn resumed_run_does_not_invent_missing_hits() {
        let opts = RunOptions {
            chunk_size: 5,
            resume_from: 3,
            ..RunOptions::default()
        };
        let r = audit_square_classification(&BigInt::from(-12), &BigInt::from(-12), &opts);
        assert!(r.pass(), "{r}");
        assert_eq!(r.resumed_from, 3);
        assert!(r.note.is_some());
        assert!(BigInt::zero() < BigInt::from(r.checked));
    }
}
