//! Arithmetic over prime fields 𝔽_q: p-th power residues, irreducibility of
//! compositions via the critical-orbit criterion, a Rabin irreducibility test
//! used as an independent oracle, and the local-global scanner.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{bigint_mod_u64, gcd_u64, is_prime_u64, pow_mod, primes_up_to};
use crate::report::digest;
use crate::semigroup::{DensePoly, GeneratorSet, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModpError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,
}

#[inline]
fn mulq(a: u64, b: u64, q: u64) -> u64 {
    if q <= u64::from(u32::MAX) {
        a * b % q
    } else {
        ((u128::from(a) * u128::from(b)) % u128::from(q)) as u64
    }
}

#[inline]
fn addq(a: u64, b: u64, q: u64) -> u64 {
    let s = u128::from(a) + u128::from(b);
    (s % u128::from(q)) as u64
}

#[inline]
fn subq(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        q - (b - a)
    }
}

fn invq(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

/// An element of 𝔽_q, stored as its least nonnegative residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FqElement {
    value: u64,
    q: u64,
}

impl FqElement {
    pub fn new(value: u64, q: u64) -> Self {
        FqElement { value: value % q, q }
    }

    pub fn from_bigint(n: &BigInt, q: u64) -> Self {
        FqElement { value: bigint_mod_u64(n, q), q }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.q
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, e: u64) -> Self {
        FqElement { value: pow_mod(self.value, e, self.q), q: self.q }
    }
}

impl Add for FqElement {
    type Output = FqElement;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.q, rhs.q);
        FqElement { value: addq(self.value, rhs.value, self.q), q: self.q }
    }
}

impl Sub for FqElement {
    type Output = FqElement;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.q, rhs.q);
        FqElement { value: subq(self.value, rhs.value, self.q), q: self.q }
    }
}

impl Mul for FqElement {
    type Output = FqElement;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.q, rhs.q);
        FqElement { value: mulq(self.value, rhs.value, self.q), q: self.q }
    }
}

impl Neg for FqElement {
    type Output = FqElement;
    fn neg(self) -> Self {
        FqElement { value: subq(0, self.value, self.q), q: self.q }
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.q)
    }
}

/// Dense polynomial over 𝔽_q, ascending, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqPoly {
    coeffs: Vec<u64>,
    q: u64,
}

impl FqPoly {
    pub fn new(coeffs: Vec<u64>, q: u64) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % q).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FqPoly { coeffs, q }
    }

    pub fn from_dense(f: &DensePoly, q: u64) -> Self {
        Self::new(f.coeffs().iter().map(|c| bigint_mod_u64(c, q)).collect(), q)
    }

    pub fn zero(q: u64) -> Self {
        FqPoly { coeffs: Vec::new(), q }
    }

    pub fn x(q: u64) -> Self {
        Self::new(vec![0, 1], q)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let q = self.q;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| addq(mulq(acc, x % q, q), c, q))
    }

    pub fn sub(&self, other: &FqPoly) -> FqPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        FqPoly::new(
            (0..n)
                .map(|i| subq(get(&self.coeffs, i), get(&other.coeffs, i), self.q))
                .collect(),
            self.q,
        )
    }

    pub fn mul(&self, other: &FqPoly) -> FqPoly {
        if self.is_zero() || other.is_zero() {
            return FqPoly::zero(self.q);
        }
        let q = self.q;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = addq(out[i + j], mulq(a, b, q), q);
            }
        }
        FqPoly::new(out, q)
    }

    /// Remainder on division by a nonzero `m`.
    pub fn rem(&self, m: &FqPoly) -> FqPoly {
        let q = self.q;
        let d = m.degree().expect("division by the zero polynomial");
        let lead_inv = invq(*m.coeffs.last().unwrap(), q);
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let top = r.len() - 1;
            let factor = mulq(r[top], lead_inv, q);
            if factor != 0 {
                for (j, &b) in m.coeffs.iter().enumerate() {
                    let k = top - d + j;
                    r[k] = subq(r[k], mulq(factor, b, q), q);
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        FqPoly::new(r, q)
    }

    pub fn mul_mod(&self, other: &FqPoly, m: &FqPoly) -> FqPoly {
        self.mul(other).rem(m)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &FqPoly) -> FqPoly {
        let mut base = self.rem(m);
        let mut acc = FqPoly::new(vec![1], self.q).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(&base, m);
            }
        }
        acc
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &FqPoly) -> FqPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        match a.coeffs.last() {
            Some(&lead) => {
                let inv = invq(lead, a.q);
                FqPoly::new(a.coeffs.iter().map(|&c| mulq(c, inv, a.q)).collect(), a.q)
            }
            None => a,
        }
    }
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, _) => c.to_string(),
                (1, 1) => "x".into(),
                (1, _) => format!("{c}x"),
                (_, 1) => format!("x^{i}"),
                _ => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0 (mod {})", self.q)
        } else {
            write!(f, "{} (mod {})", terms.join(" + "), self.q)
        }
    }
}

/// Whether `a = b^p` for some `b ∈ 𝔽_q`. Zero counts as a p-th power.
pub fn pth_power_residue(a: FqElement, p: u32) -> bool {
    if a.is_zero() {
        return true;
    }
    let q = a.modulus();
    let g = gcd_u64(u64::from(p), q - 1);
    g == 1 || a.pow((q - 1) / g).value() == 1
}

/// Irreducibility of `x^p + c` over 𝔽_q. At `q = p` the binomial is
/// `(x + c)^p`.
pub fn base_irreducible_fq(p: u32, c: &BigInt, q: u64) -> bool {
    base_irreducible_residue(p, bigint_mod_u64(c, q), q)
}

fn base_irreducible_residue(p: u32, c: u64, q: u64) -> bool {
    if q == u64::from(p) {
        return false;
    }
    !pth_power_residue(-FqElement::new(c, q), p)
}

/// Irreducibility over 𝔽_q of the composition named by `w`, from orbit values
/// alone: each prefix `w[..k]` for `k ≥ 2` must send 0 to a non-p-th-power,
/// and the outermost generator must itself be irreducible.
pub fn word_irreducible_fq(set: &GeneratorSet, w: &Word, q: u64) -> bool {
    let cs: Vec<u64> = set.coeffs().iter().map(|c| bigint_mod_u64(c, q)).collect();
    word_irreducible_residues(set.p(), &cs, w.indices(), q)
}

/// Same criterion on coefficients already reduced mod `q`.
pub fn word_irreducible_residues(p: u32, cs: &[u64], w: &[usize], q: u64) -> bool {
    if q == u64::from(p) || w.is_empty() {
        return false;
    }
    if !base_irreducible_residue(p, cs[w[0]], q) {
        return false;
    }
    (2..=w.len()).all(|k| {
        let v = w[..k]
            .iter()
            .rev()
            .fold(0u64, |v, &i| addq(pow_mod(v, u64::from(p), q), cs[i], q));
        !pth_power_residue(FqElement::new(v, q), p)
    })
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: a monic `f` of degree `n` is irreducible over 𝔽_q iff
/// `x^{q^n} ≡ x (mod f)` and `gcd(x^{q^{n/ℓ}} - x, f) = 1` for every prime
/// `ℓ | n`.
pub fn rabin_irreducible(f: &FqPoly) -> Result<bool, ModpError> {
    let q = f.modulus();
    if !is_prime_u64(q) {
        return Err(ModpError::NotPrime(q));
    }
    let n = match f.degree() {
        Some(n) if n >= 1 => n,
        _ => return Err(ModpError::ConstantPolynomial),
    };
    if !f.is_monic() {
        return Err(ModpError::NotMonic);
    }
    if n == 1 {
        return Ok(true);
    }
    let x = FqPoly::x(q);
    let xq = x.pow_mod(q, f);
    // Frobenius is 𝔽_q-linear, so h ↦ h^q mod f is determined by x^{jq}
    let mut rows: Vec<FqPoly> = Vec::with_capacity(n);
    rows.push(FqPoly::new(vec![1], q));
    for j in 1..n {
        rows.push(rows[j - 1].mul_mod(&xq, f));
    }
    let frobenius = |h: &FqPoly| -> FqPoly {
        let mut acc = vec![0u64; n];
        for (&a, row) in h.coeffs().iter().zip(&rows) {
            if a == 0 {
                continue;
            }
            for (k, &b) in row.coeffs().iter().enumerate() {
                acc[k] = addq(acc[k], mulq(a, b, q), q);
            }
        }
        FqPoly::new(acc, q)
    };
    let factors = prime_factors(n);
    let mut h = xq;
    for k in 1..=n {
        if k > 1 {
            h = frobenius(&h);
        }
        if factors.iter().any(|&l| n / l == k) {
            let g = h.sub(&x).gcd(f);
            if g.degree() != Some(0) {
                return Ok(false);
            }
        }
    }
    Ok(h == x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanEntry {
    pub q: u64,
    pub irreducible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub p: u32,
    /// Family parameter, when the scan is of a local-global family.
    pub t: Option<BigInt>,
    pub word: Word,
    pub q_max: u64,
    pub entries: Vec<ScanEntry>,
    pub all_reducible: bool,
}

impl ScanReport {
    pub fn to_json(&self, full: bool) -> Value {
        json!({
            "p": self.p,
            "t": self.t.as_ref().map(|t| digest(t, full)),
            "word": self.word.to_string(),
            "q_max": self.q_max,
            "entries": self.entries,
            "all_reducible": self.all_reducible,
        })
    }

    pub fn to_csv(&self) -> String {
        let t = self.t.as_ref().map(ToString::to_string).unwrap_or_default();
        let mut out = String::from("p,t,word,q_max,q,irreducible\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},\"{}\",{},{},{}\n",
                self.p, t, self.word, self.q_max, e.q, e.irreducible
            ));
        }
        out
    }
}

/// Decides `word_irreducible_fq` for every prime `q ≤ q_max`, in parallel,
/// reporting in ascending `q`.
pub fn local_global_scan(set: &GeneratorSet, w: &Word, q_max: u64, t: Option<BigInt>) -> ScanReport {
    let entries: Vec<ScanEntry> = primes_up_to(q_max)
        .into_par_iter()
        .map(|q| ScanEntry { q, irreducible: word_irreducible_fq(set, w, q) })
        .collect();
    let all_reducible = entries.iter().all(|e| !e.irreducible);
    ScanReport {
        p: set.p(),
        t,
        word: w.clone(),
        q_max,
        entries,
        all_reducible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(p: u32, c: &[i64]) -> GeneratorSet {
        GeneratorSet::from_i64s(p, c).unwrap()
    }

    fn word(v: &[usize]) -> Word {
        Word(v.to_vec())
    }

    #[test]
    fn residue_examples() {
        assert!(!pth_power_residue(FqElement::new(2, 7), 3));
        assert!(pth_power_residue(FqElement::new(4, 7), 2));
        assert!((0..5).all(|a| pth_power_residue(FqElement::new(a, 5), 3)));
        assert!(pth_power_residue(FqElement::new(0, 11), 2));
    }

    #[test]
    fn residue_test_matches_enumeration() {
        for q in primes_up_to(120) {
            for p in [2u32, 3, 5, 7] {
                let powers: BTreeSet<u64> = (0..q).map(|b| pow_mod(b, u64::from(p), q)).collect();
                for a in 0..q {
                    assert_eq!(
                        pth_power_residue(FqElement::new(a, q), p),
                        powers.contains(&a),
                        "a = {a}, p = {p}, q = {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn base_examples() {
        assert!(base_irreducible_fq(2, &BigInt::from(1), 3));
        assert!((-20..20).all(|c| !base_irreducible_fq(3, &BigInt::from(c), 3)));
        assert!(base_irreducible_fq(3, &BigInt::from(-2), 7));
        // cubing is a bijection of 𝔽_5
        assert!((0..5).all(|c| !base_irreducible_fq(3, &BigInt::from(c), 5)));
    }

    #[test]
    fn word_examples() {
        let s = set(2, &[-12, -4]);
        assert!(word_irreducible_fq(&s, &word(&[0]), 5));
        assert!(!word_irreducible_fq(&s, &word(&[0, 0, 1, 0]), 5));
        assert!(!word_irreducible_fq(&set(3, &[-504, 8]), &word(&[0, 1]), 3));
    }

    #[test]
    fn rabin_examples() {
        let f = |c: &[u64], q: u64| FqPoly::new(c.to_vec(), q);
        assert_eq!(rabin_irreducible(&f(&[1, 1, 0, 1], 2)), Ok(true));
        assert_eq!(rabin_irreducible(&f(&[1, 0, 1], 2)), Ok(false));
        assert_eq!(rabin_irreducible(&f(&[1, 0, 1], 5)), Ok(false));
        assert_eq!(rabin_irreducible(&f(&[1, 0, 1], 7)), Ok(true));
        assert_eq!(rabin_irreducible(&f(&[1, 0, 2], 7)), Err(ModpError::NotMonic));
        assert_eq!(rabin_irreducible(&f(&[3], 7)), Err(ModpError::ConstantPolynomial));
        assert_eq!(rabin_irreducible(&f(&[1, 1], 9)), Err(ModpError::NotPrime(9)));
        // (x² + x + 1)² over 𝔽_2 has no roots but is reducible
        assert_eq!(rabin_irreducible(&f(&[1, 0, 1, 0, 1], 2)), Ok(false));
    }

    fn all_monic(q: u64, n: usize) -> Vec<FqPoly> {
        let total = q.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut c = Vec::with_capacity(n + 1);
                for _ in 0..n {
                    c.push(code % q);
                    code /= q;
                }
                c.push(1);
                FqPoly::new(c, q)
            })
            .collect()
    }

    fn mobius(n: usize) -> i64 {
        let mut m = n;
        let mut sign = 1;
        let mut d = 2;
        while d * d <= m {
            if m.is_multiple_of(d) {
                m /= d;
                if m.is_multiple_of(d) {
                    return 0;
                }
                sign = -sign;
            }
            d += 1;
        }
        if m > 1 {
            sign = -sign;
        }
        sign
    }

    #[test]
    fn rabin_matches_trial_division_and_gauss_count() {
        for (q, n_max) in [(2u64, 6usize), (3, 4), (5, 3), (7, 3)] {
            for n in 1..=n_max {
                let mut irreducible = 0i64;
                for f in all_monic(q, n) {
                    let by_trial = (1..=n / 2).all(|d| {
                        all_monic(q, d).iter().all(|g| !f.rem(g).is_zero())
                    });
                    let by_rabin = rabin_irreducible(&f).unwrap();
                    assert_eq!(by_rabin, by_trial, "{f}");
                    irreducible += i64::from(by_rabin);
                }
                // Gauss: (1/n) Σ_{d|n} μ(d) q^{n/d}
                let gauss: i64 = (1..=n)
                    .filter(|d| n % d == 0)
                    .map(|d| mobius(d) * (q as i64).pow((n / d) as u32))
                    .sum::<i64>()
                    / n as i64;
                assert_eq!(irreducible, gauss, "q = {q}, n = {n}");
            }
        }
    }

    #[test]
    fn wild_prime_and_bijection_laws() {
        let s = set(3, &[-504, 8, 5]);
        for w in s.words(3) {
            assert!(!word_irreducible_fq(&s, &w, 3));
        }
        let s2 = set(2, &[-12, -4, 7]);
        for w in s2.words(3) {
            assert!(!word_irreducible_fq(&s2, &w, 2));
        }
        for q in primes_up_to(200) {
            for p in [3u32, 5, 7] {
                if gcd_u64(u64::from(p), q - 1) == 1 {
                    assert!((0..q.min(50)).all(|c| !base_irreducible_fq(p, &BigInt::from(c), q)));
                }
            }
        }
    }

    #[test]
    fn scan_examples() {
        let fam2 = set(2, &[-12, -4]);
        let r = local_global_scan(&fam2, &word(&[0, 0, 1, 0]), 100, Some(BigInt::from(2)));
        assert_eq!(r.entries.len(), 25);
        assert!(r.all_reducible);
        assert!(r.entries.windows(2).all(|e| e[0].q < e[1].q));
        let fam3 = set(3, &[-504, 8]);
        assert!(local_global_scan(&fam3, &word(&[0, 1, 0]), 100, None).all_reducible);
        let r = local_global_scan(&fam2, &word(&[0]), 100, None);
        assert!(!r.all_reducible);
        assert!(r.entries.iter().any(|e| e.q == 5 && e.irreducible));
        let csv = r.to_csv();
        assert!(csv.starts_with("p,t,word,q_max,q,irreducible\n2,,\"[0]\",100,2,false\n"));
    }

    #[test]
    fn big_modulus_arithmetic() {
        let q = 18_446_744_073_709_551_557u64; // largest prime below 2^64
        let a = FqElement::new(q - 1, q);
        assert_eq!((a * a).value(), 1);
        assert_eq!((a + a).value(), q - 2);
        assert!(pth_power_residue(a * a, 2));
    }

    proptest! {
        #[test]
        fn criterion_agrees_with_rabin(
            qi in 0usize..6,
            p in prop_oneof![Just(2u32), Just(3u32)],
            c0 in 0u64..100,
            c1 in 0u64..100,
            w in proptest::collection::vec(0usize..2, 1..4),
        ) {
            let q = [5u64, 7, 11, 13, 17, 19][qi];
            prop_assume!(c0 % q != c1 % q);
            let s = GeneratorSet::new(p, vec![BigInt::from(c0), BigInt::from(c1)]).unwrap();
            let w = Word(w);
            let f = FqPoly::from_dense(&s.expand_word(&w, 1 << 12).unwrap(), q);
            prop_assert_eq!(word_irreducible_fq(&s, &w, q), rabin_irreducible(&f).unwrap());
        }

        #[test]
        fn poly_remainder_identity(
            a in proptest::collection::vec(0u64..13, 0..12),
            b in proptest::collection::vec(0u64..13, 1..6),
        ) {
            let q = 13;
            let a = FqPoly::new(a, q);
            let mut b = b;
            b.push(1 + b.len() as u64 % 12);
            let b = FqPoly::new(b, q);
            let r = a.rem(&b);
            prop_assert!(r.degree().is_none_or(|d| d < b.degree().unwrap()));
            // a - r is divisible by b: check at every point where b vanishes
            for x in 0..q {
                if b.eval(x) == 0 {
                    prop_assert_eq!(a.eval(x), r.eval(x));
                }
            }
        }
    }
}
