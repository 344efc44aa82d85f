//! Irreducibility of `x^p + c` over ℚ and detection of the two special
//! shapes: Type I, `c = s^p - s^{p²}` (a fixed point `s^p`), and, for
//! `p = 2`, Type II, `c = -1 - s² - s⁴` (a 2-cycle `s² ↔ -(s²+1)`).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{exact_root, kth_root_floor, perfect_pth_power};
use crate::report::digest;

/// `x^p + c` is irreducible over ℚ exactly when `-c` is not a p-th power.
pub fn base_irreducible_q(p: u32, c: &BigInt) -> bool {
    perfect_pth_power(&-c, p).is_none()
}

pub fn base_irreducible_q_rational(p: u32, c: &BigRational) -> bool {
    let neg = -c;
    perfect_pth_power(neg.numer(), p).is_none() || perfect_pth_power(neg.denom(), p).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeReport {
    pub p: u32,
    pub c: BigInt,
    pub irreducible_over_q: bool,
    /// Every integer `s` with `c = s^p - s^{p²}`.
    pub type1_witnesses: Vec<BigInt>,
    /// Every integer `s` with `c = -1 - s² - s⁴` (empty unless `p = 2`).
    pub type2_witnesses: Vec<BigInt>,
}

impl TypeReport {
    pub fn is_type1(&self) -> bool {
        !self.type1_witnesses.is_empty()
    }

    pub fn is_type2(&self) -> bool {
        !self.type2_witnesses.is_empty()
    }

    pub fn is_special(&self) -> bool {
        self.is_type1() || self.is_type2()
    }

    pub fn to_json(&self, full: bool) -> Value {
        let p = self.p;
        let type1: Vec<Value> = self
            .type1_witnesses
            .iter()
            .map(|s| json!({"s": digest(s, full), "fixed_point": digest(&Pow::pow(s, p), full)}))
            .collect();
        let type2: Vec<Value> = self
            .type2_witnesses
            .iter()
            .map(|s| {
                let sq = s * s;
                let partner = -(&sq + 1u32);
                json!({"s": digest(s, full), "two_cycle": [digest(&sq, full), digest(&partner, full)]})
            })
            .collect();
        json!({
            "p": p,
            "c": digest(&self.c, full),
            "irreducible_over_q": self.irreducible_over_q,
            "type1": type1,
            "type2": type2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeReportQ {
    pub p: u32,
    pub c: BigRational,
    pub irreducible_over_q: bool,
    pub type1_witnesses: Vec<BigRational>,
    pub type2_witnesses: Vec<BigRational>,
}

impl TypeReportQ {
    pub fn to_json(&self) -> Value {
        let show = |v: &[BigRational]| v.iter().map(|s| Value::String(s.to_string())).collect::<Vec<_>>();
        json!({
            "p": self.p,
            "c": self.c.to_string(),
            "irreducible_over_q": self.irreducible_over_q,
            "type1": show(&self.type1_witnesses),
            "type2": show(&self.type2_witnesses),
        })
    }
}

/// All integer `a` with `a^{p²} - k·a^p = target`, for `k ≥ 1`.
///
/// As a function of `x = a^p` the left side is `x^p - k·x`, which has a single
/// turning point on `x ≥ 0`. So for `a ≥ 0` it decreases up to roughly
/// `(k/p)^{1/(p(p-1))}` and increases afterwards, and each monotone piece
/// holds at most one root, found by bisection. Negative `a` follow by parity:
/// the expression is even in `a` for `p = 2` and odd for odd `p`.
fn fixed_point_roots(p: u32, k: &BigInt, target: &BigInt) -> Vec<BigInt> {
    let pp = p * p;
    let h = |a: &BigInt| -> BigInt { Pow::pow(a, pp) - k * Pow::pow(a, p) };
    let turn = kth_root_floor(&(k / BigInt::from(p)), p * (p - 1))
        .expect("nonnegative radicand")
        .0;

    let nonneg_roots = |t: &BigInt| -> Vec<BigInt> {
        let mut out = Vec::new();
        // decreasing piece [0, turn]
        if let Some(a) = bisect(&BigInt::zero(), &turn, t, &h, false) {
            out.push(a);
        }
        // increasing piece [turn + 1, ∞)
        let lo = &turn + 1u32;
        let mut hi = &lo * 2u32 + 1u32;
        while h(&hi) < *t {
            hi *= 2u32;
        }
        if let Some(a) = bisect(&lo, &hi, t, &h, true) {
            out.push(a);
        }
        out
    };

    let mut roots = nonneg_roots(target);
    if p == 2 {
        let mirrored: Vec<BigInt> = roots.iter().filter(|a| !a.is_zero()).map(|a| -a).collect();
        roots.extend(mirrored);
    } else {
        roots.extend(
            nonneg_roots(&-target)
                .into_iter()
                .filter(|a| !a.is_zero())
                .map(|a| -a),
        );
    }
    roots.retain(|a| h(a) == *target);
    roots.sort_by_key(crate::semigroup::magnitude_key);
    roots.dedup();
    roots
}

/// Bisection for `f(a) = t` on `[lo, hi]` where `f` is monotone.
fn bisect<F: Fn(&BigInt) -> BigInt>(
    lo: &BigInt,
    hi: &BigInt,
    t: &BigInt,
    f: &F,
    increasing: bool,
) -> Option<BigInt> {
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    while lo <= hi {
        let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
        let v = f(&mid);
        if v == *t {
            return Some(mid);
        }
        if (v < *t) == increasing {
            lo = mid + 1u32;
        } else {
            hi = mid - 1u32;
        }
    }
    None
}

/// Nonnegative integer `a` with `a⁴ + m·a² + n = 0` where the positive branch
/// `a² = (-m + √(m² - 4n)) / 2` is the only one that can be a square.
fn period_two_roots(m: &BigInt, n: &BigInt) -> Vec<BigInt> {
    let disc: BigInt = m * m - n * 4u32;
    if disc.is_negative() {
        return Vec::new();
    }
    let Some(d) = exact_root(&disc, 2) else {
        return Vec::new();
    };
    let twice: BigInt = d - m;
    if twice.is_negative() || twice.is_odd() {
        return Vec::new();
    }
    let w: BigInt = twice / 2u32;
    match exact_root(&w, 2) {
        Some(a) if a.is_zero() => vec![a],
        Some(a) => vec![a.clone(), -a],
        None => Vec::new(),
    }
}

pub fn type1_witnesses(p: u32, c: &BigInt) -> Vec<BigInt> {
    fixed_point_roots(p, &BigInt::one(), &-c)
}

pub fn type2_witnesses(c: &BigInt) -> Vec<BigInt> {
    // s⁴ + s² + (1 + c) = 0
    period_two_roots(&BigInt::one(), &(c + 1u32))
}

/// Finds every integer witness for both special shapes.
pub fn classify_type(p: u32, c: &BigInt) -> TypeReport {
    TypeReport {
        p,
        c: c.clone(),
        irreducible_over_q: base_irreducible_q(p, c),
        type1_witnesses: type1_witnesses(p, c),
        type2_witnesses: if p == 2 { type2_witnesses(c) } else { Vec::new() },
    }
}

/// Rational version. Writing `s = a/b` in lowest terms, `s^p - s^{p²}` has
/// denominator exactly `b^{p²}` (and `-1 - s² - s⁴` has `b⁴`), so `b` is read
/// off the denominator of `c` and `a` solves an integer equation.
pub fn classify_type_rational(p: u32, c: &BigRational) -> TypeReportQ {
    let u = c.numer();
    let v = c.denom();
    let mut type1 = Vec::new();
    if let Some(b) = exact_root(v, p * p) {
        let k = Pow::pow(&b, p * p - p);
        for a in fixed_point_roots(p, &k, &-u) {
            type1.push(BigRational::new(a, b.clone()));
        }
    }
    let mut type2 = Vec::new();
    if p == 2 {
        if let Some(b) = exact_root(v, 4) {
            let b2 = &b * &b;
            let n = &b2 * &b2 + u;
            for a in period_two_roots(&b2, &n) {
                type2.push(BigRational::new(a, b.clone()));
            }
        }
    }
    let key = |s: &BigRational| (s.abs(), s.is_negative());
    type1.sort_by_key(key);
    type2.sort_by_key(key);
    TypeReportQ {
        p,
        c: c.clone(),
        irreducible_over_q: base_irreducible_q_rational(p, c),
        type1_witnesses: type1,
        type2_witnesses: type2,
    }
}

pub fn type1_coefficient(p: u32, s: &BigInt) -> BigInt {
    Pow::pow(s, p) - Pow::pow(s, p * p)
}

pub fn type2_coefficient(s: &BigInt) -> BigInt {
    let s2 = s * s;
    -(BigInt::one() + &s2 + &s2 * &s2)
}
