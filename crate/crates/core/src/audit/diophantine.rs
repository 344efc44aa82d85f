//! Exhaustive windows for the Diophantine statements behind the certificate
//! recipes. Every subsystem is a list of tasks `(system, outer variable)`
//! whose inner variable is chunked, so the whole suite resumes uniformly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Pow, Signed};
use serde_json::json;

use super::{chunked_search, split_chunks, RunOptions, Violation};
use crate::arith::{exact_sqrt_i128, is_perfect_square, perfect_pth_power};
use crate::audit::AuditReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum System {
    /// a² + s² − s⁴ = ±t², b² + t² − t⁴ = ±s², s,t ≠ 0 ⇒ s² = t².
    TwoTypeI,
    /// a² + s² − s⁴ = ±(1 + t²), b² − 1 − t² − t⁴ = ±s² ⇒ t = 0.
    MixedTypes,
    /// a² − 1 − s² − s⁴ = ±(1 + t²), b² − 1 − t² − t⁴ = ±(1 + s²), s,t ≠ 0 ⇒ s² = t².
    TwoTypeII,
    /// (y² + s² − s⁴)² − t² = ±s² ⇒ s ∈ {0, ±1}.
    TypeIWithReducible,
    /// (y² − 1 − s² − s⁴)² − t² = ±(1 + s²) ⇒ s = 0.
    TypeIIWithReducible,
    /// a^p + s^p − s^{p²} = t^p, b^p + t^p − t^{p²} = s^p ⇒ min(|s|,|t|) ≤ 1 or s = t.
    OddPair,
    /// (t^d − 1)^d < t^{d²} − 2t^d for t ≥ 2, d ≥ 3.
    PowerGap,
    /// y^d − 2 = z^d has no solution with |y| ≥ 2.
    PowerMinusTwo,
    /// x^n + y^n = z^n has no solution with xyz ≠ 0, n ∈ {3,5,7}.
    Fermat,
    /// φ1∘φ2∘φ1(a) ≠ y^p for φ1 = x^p + t^p − t^{p²}, φ2 = x^p + t^p.
    OddSpecialPair,
    /// φ1²∘φ2∘φ1(a) ≠ y² for φ1 = x² + t² − t⁴, φ2 = x² − t².
    QuadraticSpecialPair,
}

impl System {
    fn name(self) -> &'static str {
        match self {
            System::TwoTypeI => "two_type1",
            System::MixedTypes => "mixed_types",
            System::TwoTypeII => "two_type2",
            System::TypeIWithReducible => "type1_with_reducible",
            System::TypeIIWithReducible => "type2_with_reducible",
            System::OddPair => "odd_pair",
            System::PowerGap => "power_gap",
            System::PowerMinusTwo => "power_minus_two",
            System::Fermat => "fermat",
            System::OddSpecialPair => "odd_special_pair",
            System::QuadraticSpecialPair => "quadratic_special_pair",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Task {
    system: System,
    /// Exponent for the odd-p systems (or `d`, `n`); unused otherwise.
    p: u32,
    outer: i64,
}

#[inline]
fn sq(x: i128) -> bool {
    exact_sqrt_i128(x).is_some()
}

#[inline]
fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn pow(x: &BigInt, e: u32) -> BigInt {
    Pow::pow(x, e)
}

/// Largest `t` for the odd special pair: `|t|^p <= 2·10⁶` and every
/// intermediate value fits in `i128`.
fn odd_pair_t_cap(p: u32, range: i64) -> i64 {
    (2..=range)
        .take_while(|&t| {
            let t = i128::from(t);
            let tp = t.pow(p);
            tp <= 2_000_000
                && t.checked_pow(p * p).is_some_and(|v| v.checked_mul(4).is_some())
                && (tp + 1).checked_pow(p).is_some_and(|v| v.checked_mul(4).is_some())
        })
        .last()
        .unwrap_or(1)
}

fn build_tasks(range: i64) -> (Vec<Task>, Vec<(i64, i64, i64)>) {
    let mut tasks = Vec::new();
    let mut segs = Vec::new();
    let mut add = |t: Task, lo: i64, hi: i64| {
        segs.push((tasks.len() as i64, lo, hi));
        tasks.push(t);
    };
    let nonzero = || (-range..=range).filter(|&x| x != 0);
    for s in nonzero() {
        add(Task { system: System::TwoTypeI, p: 2, outer: s }, -range, range);
    }
    for s in -range..=range {
        add(Task { system: System::MixedTypes, p: 2, outer: s }, -range, range);
    }
    for s in nonzero() {
        add(Task { system: System::TwoTypeII, p: 2, outer: s }, -range, range);
    }
    // Only squares enter; y, s >= 0 suffice. y is taken well past the size
    // forced by the factorisation argument (|y² − s⁴| <= 2s² + 1).
    let y_max = range * range + 2;
    for s in 0..=range {
        add(Task { system: System::TypeIWithReducible, p: 2, outer: s }, 0, y_max);
        add(Task { system: System::TypeIIWithReducible, p: 2, outer: s }, 0, y_max);
    }
    for p in [3u32, 5, 7] {
        for s in -range..=range {
            add(Task { system: System::OddPair, p, outer: s }, -range, range);
        }
    }
    for d in 3u32..=7 {
        add(Task { system: System::PowerGap, p: d, outer: 0 }, 2, range);
    }
    for d in 2u32..=7 {
        add(Task { system: System::PowerMinusTwo, p: d, outer: 0 }, -range, range);
    }
    for n in [3u32, 5, 7] {
        for x in 1..=range {
            add(Task { system: System::Fermat, p: n, outer: x }, x, range);
        }
    }
    for p in [3u32, 5, 7] {
        let cap = odd_pair_t_cap(p, range);
        for t in (2..=cap).flat_map(|t| [t, -t]) {
            let r = t.abs().pow(p) + 1;
            add(Task { system: System::OddSpecialPair, p, outer: t }, -r, r);
        }
    }
    for t in 2..=range {
        add(Task { system: System::QuadraticSpecialPair, p: 2, outer: t }, 0, 4 * t * t + 2);
    }
    (tasks, segs)
}

fn check(task: Task, lo: i64, hi: i64) -> Vec<Violation> {
    let mut out = Vec::new();
    match task.system {
        System::TwoTypeI => {
            let s = i128::from(task.outer);
            let s2 = s * s;
            for t in (lo..=hi).filter(|&t| t != 0) {
                let t2 = i128::from(t) * i128::from(t);
                if s2 == t2 {
                    continue;
                }
                let left = sq(s2 * s2 - s2 + t2) || sq(s2 * s2 - s2 - t2);
                let right = left && (sq(t2 * t2 - t2 + s2) || sq(t2 * t2 - t2 - s2));
                if right {
                    let (sb, tb) = (big(task.outer), big(t));
                    let (s2b, t2b) = (&sb * &sb, &tb * &tb);
                    let q = &s2b * &s2b - &s2b;
                    let r = &t2b * &t2b - &t2b;
                    let ok = (is_perfect_square(&(&q + &t2b)) || is_perfect_square(&(&q - &t2b)))
                        && (is_perfect_square(&(&r + &s2b)) || is_perfect_square(&(&r - &s2b)));
                    out.push(Violation::new(
                        "two Type I equations solvable with s^2 != t^2",
                        &[("s", sb), ("t", tb)],
                        ok,
                    ));
                }
            }
        }
        System::MixedTypes => {
            let s = i128::from(task.outer);
            let s2 = s * s;
            for t in (lo..=hi).filter(|&t| t != 0) {
                let t2 = i128::from(t) * i128::from(t);
                let left = sq(s2 * s2 - s2 + 1 + t2) || sq(s2 * s2 - s2 - 1 - t2);
                let right = left && (sq(1 + t2 + t2 * t2 + s2) || sq(1 + t2 + t2 * t2 - s2));
                if right {
                    let (sb, tb) = (big(task.outer), big(t));
                    let (s2b, t2b) = (&sb * &sb, &tb * &tb);
                    let q = &s2b * &s2b - &s2b;
                    let e = &t2b + 1;
                    let r = &t2b * &t2b + &t2b + 1;
                    let ok = (is_perfect_square(&(&q + &e)) || is_perfect_square(&(&q - &e)))
                        && (is_perfect_square(&(&r + &s2b)) || is_perfect_square(&(&r - &s2b)));
                    out.push(Violation::new(
                        "mixed Type I / Type II equations solvable with t != 0",
                        &[("s", sb), ("t", tb)],
                        ok,
                    ));
                }
            }
        }
        System::TwoTypeII => {
            let s = i128::from(task.outer);
            let s2 = s * s;
            for t in (lo..=hi).filter(|&t| t != 0) {
                let t2 = i128::from(t) * i128::from(t);
                if s2 == t2 {
                    continue;
                }
                let a_base = 1 + s2 + s2 * s2;
                let b_base = 1 + t2 + t2 * t2;
                let left = sq(a_base + 1 + t2) || sq(a_base - 1 - t2);
                let right = left && (sq(b_base + 1 + s2) || sq(b_base - 1 - s2));
                if right {
                    let (sb, tb) = (big(task.outer), big(t));
                    let (s2b, t2b) = (&sb * &sb, &tb * &tb);
                    let ab = &s2b * &s2b + &s2b + 1;
                    let bb = &t2b * &t2b + &t2b + 1;
                    let (es, et) = (&s2b + 1, &t2b + 1);
                    let ok = (is_perfect_square(&(&ab + &et)) || is_perfect_square(&(&ab - &et)))
                        && (is_perfect_square(&(&bb + &es)) || is_perfect_square(&(&bb - &es)));
                    out.push(Violation::new(
                        "two Type II equations solvable with s^2 != t^2",
                        &[("s", sb), ("t", tb)],
                        ok,
                    ));
                }
            }
        }
        System::TypeIWithReducible | System::TypeIIWithReducible => {
            let type1 = task.system == System::TypeIWithReducible;
            let s = i128::from(task.outer);
            let s2 = s * s;
            let (shift, rhs) = if type1 {
                (s2 - s2 * s2, s2)
            } else {
                (-1 - s2 - s2 * s2, 1 + s2)
            };
            let exempt = if type1 { task.outer <= 1 } else { task.outer == 0 };
            if exempt {
                return out;
            }
            for y in lo..=hi {
                let y = i128::from(y);
                let u = y * y + shift;
                let u2 = u * u;
                for sign in [1i128, -1] {
                    // u² − t² = ±rhs  ⇔  t² = u² ∓ rhs
                    let t2 = u2 - sign * rhs;
                    if let Some(t) = exact_sqrt_i128(t2) {
                        let (yb, sb, tb) = (BigInt::from(y), big(task.outer), BigInt::from(t));
                        let ub = &yb * &yb + BigInt::from(shift);
                        let ok = &ub * &ub - &tb * &tb == BigInt::from(sign * rhs);
                        out.push(Violation::new(
                            if type1 {
                                "(y^2+s^2-s^4)^2 - t^2 = ±s^2 with |s| >= 2"
                            } else {
                                "(y^2-1-s^2-s^4)^2 - t^2 = ±(1+s^2) with s != 0"
                            },
                            &[("y", yb), ("s", sb), ("t", tb), ("sign", BigInt::from(sign))],
                            ok,
                        ));
                    }
                }
            }
        }
        System::OddPair => {
            let p = task.p;
            let s = task.outer;
            let sb = big(s);
            let (sp, spp) = (pow(&sb, p), pow(&sb, p * p));
            for t in lo..=hi {
                if s.abs().min(t.abs()) <= 1 || s == t {
                    continue;
                }
                let tb = big(t);
                let (tp, tpp) = (pow(&tb, p), pow(&tb, p * p));
                let a_p = &tp - &sp + &spp;
                if perfect_pth_power(&a_p, p).is_none() {
                    continue;
                }
                let b_p = &sp - &tp + &tpp;
                if let Some(b) = perfect_pth_power(&b_p, p) {
                    let a = perfect_pth_power(&a_p, p).expect("checked above");
                    let ok = pow(&a, p) + &sp - &spp == tp && pow(&b, p) + &tp - &tpp == sp;
                    out.push(Violation::new(
                        "odd-p pair system solvable with min(|s|,|t|) >= 2 and s != t",
                        &[("p", p.into()), ("s", sb.clone()), ("t", tb), ("a", a), ("b", b)],
                        ok,
                    ));
                }
            }
        }
        System::PowerGap => {
            let d = task.p;
            for t in lo..=hi {
                let tb = big(t);
                let td = pow(&tb, d);
                let left = pow(&(&td - 1), d);
                let right = pow(&tb, d * d) - &td * 2;
                if left >= right {
                    out.push(Violation::new(
                        "(t^d - 1)^d >= t^(d^2) - 2t^d",
                        &[("d", d.into()), ("t", tb)],
                        true,
                    ));
                }
            }
        }
        System::PowerMinusTwo => {
            let d = task.p;
            for y in (lo..=hi).filter(|y| y.abs() >= 2) {
                let yb = big(y);
                let v = pow(&yb, d) - 2;
                if let Some(z) = perfect_pth_power(&v, d) {
                    let ok = pow(&yb, d) - 2 == pow(&z, d);
                    out.push(Violation::new(
                        "y^d - 2 = z^d with |y| >= 2",
                        &[("d", d.into()), ("y", yb), ("z", z)],
                        ok,
                    ));
                }
            }
        }
        System::Fermat => {
            let n = task.p;
            let xb = big(task.outer);
            let xn = pow(&xb, n);
            for y in lo..=hi {
                let yb = big(y);
                if let Some(z) = perfect_pth_power(&(&xn + pow(&yb, n)), n) {
                    let ok = &xn + pow(&yb, n) == pow(&z, n);
                    out.push(Violation::new(
                        "x^n + y^n = z^n with xyz != 0",
                        &[("n", n.into()), ("x", xb.clone()), ("y", yb), ("z", z)],
                        ok,
                    ));
                }
            }
        }
        System::OddSpecialPair => {
            let p = task.p;
            let t = i128::from(task.outer);
            let tp = t.pow(p);
            let c1 = tp - t.pow(p * p);
            let c1_abs = c1.abs();
            let c1b = BigInt::from(c1);
            for a in lo..=hi {
                let x1 = i128::from(a).pow(p) + c1;
                // Overflow means |x1|^p alone is far past the lemma bound.
                let Some(x2) = x1.checked_pow(p).and_then(|v| v.checked_add(tp)) else {
                    continue;
                };
                if !within_lemma(p, x2, c1_abs) {
                    continue;
                }
                let x3 = pow(&BigInt::from(x2), p) + &c1b;
                if let Some(y) = perfect_pth_power(&x3, p) {
                    let tb = big(task.outer);
                    let f1 = |x: &BigInt| pow(x, p) + &c1b;
                    let f2 = |x: &BigInt| pow(x, p) + pow(&tb, p);
                    let ok = f1(&f2(&f1(&big(a)))) == pow(&y, p);
                    out.push(Violation::new(
                        "phi1(phi2(phi1(a))) is a p-th power",
                        &[("p", p.into()), ("t", tb.clone()), ("a", big(a)), ("y", y)],
                        ok,
                    ));
                }
            }
        }
        System::QuadraticSpecialPair => {
            let t = i128::from(task.outer);
            let t2 = t * t;
            let c1 = t2 - t2 * t2;
            let bound = t2 * t2 - t2;
            let f1 = |x: i128| x.checked_mul(x).and_then(|v| v.checked_add(c1));
            let f2 = |x: i128| x.checked_mul(x).and_then(|v| v.checked_sub(t2));
            for a in lo..=hi {
                let Some(b) = f1(i128::from(a)).and_then(f2).and_then(f1) else {
                    continue;
                };
                // φ1(b) = y² forces |b| <= t⁴ − t².
                if b.abs() > bound {
                    continue;
                }
                if let Some(y) = f1(b).and_then(exact_sqrt_i128) {
                    let (tb, ab) = (big(task.outer), big(a));
                    let c1b = BigInt::from(c1);
                    let g1 = |x: &BigInt| x * x + &c1b;
                    let g2 = |x: &BigInt| x * x - &tb * &tb;
                    let ok = g1(&g1(&g2(&g1(&ab)))) == BigInt::from(y) * BigInt::from(y);
                    out.push(Violation::new(
                        "phi1^2(phi2(phi1(a))) is a square",
                        &[("t", tb), ("a", ab), ("y", BigInt::from(y))],
                        ok,
                    ));
                }
            }
        }
    }
    out
}

/// `p(|x| - 1)^{p-1} <= |c|`.
fn within_lemma(p: u32, x: i128, c_abs: i128) -> bool {
    let m = x.unsigned_abs();
    m <= 1
        || (m - 1)
            .checked_pow(p - 1)
            .and_then(|v| v.checked_mul(u128::from(p)))
            .is_some_and(|v| v <= c_abs as u128)
}

/// Runs every Diophantine window over `[-range, range]` (see the module
/// docs for the per-system variable ranges).
pub fn audit_diophantine(range: i64, opts: &RunOptions) -> AuditReport {
    let (tasks, segs) = build_tasks(range);
    let caps: BTreeMap<String, i64> = [3u32, 5, 7]
        .iter()
        .map(|&p| (p.to_string(), odd_pair_t_cap(p, range)))
        .collect();
    let params = json!({
        "range": range,
        "fermat_window": range,
        "reducible_pair_y_max": range * range + 2,
        "odd_special_pair_t_max": caps,
        "odd_special_pair_a_bound": "|t|^p + 1",
        "quadratic_special_pair_a_bound": "4t^2 + 2",
    });
    let chunks = split_chunks(segs, opts.chunk_size);
    let (mut report, counts) = chunked_search("diophantine", params, &chunks, opts, |ch| {
        let task = tasks[ch.key as usize];
        let v = check(task, ch.lo, ch.hi);
        (v, vec![(task.system, (ch.hi - ch.lo + 1) as u64)])
    });
    let mut per: BTreeMap<System, u64> = BTreeMap::new();
    for (sys, n) in counts {
        *per.entry(sys).or_default() += n;
    }
    let mut bad: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &report.violations {
        *bad.entry(v.what.as_str()).or_default() += 1;
    }
    report.details = json!({
        "candidates": per.iter().map(|(s, n)| (s.name().to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
        "violations_by_kind": bad,
    });
    report
}
