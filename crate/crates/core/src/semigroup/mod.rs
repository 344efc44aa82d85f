//! Unicritical generators `x^p + c`, generator sets, words of the free
//! composition semigroup, critical-orbit evaluation and coefficient expansion.

mod poly;
mod word;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::is_prime_u64;

pub use poly::DensePoly;
pub use word::{count_words, Word, WordIter};

/// Default cap on the bit length of any orbit value.
pub const DEFAULT_BIT_GUARD: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error("invalid exponent {0}: must be prime")]
    InvalidExponent(u32),
    #[error("generator set is empty")]
    EmptySet,
    #[error("duplicate generator c = {c} at positions {first} and {second}")]
    DuplicateGenerator { c: BigInt, first: usize, second: usize },
    #[error("generator index {index} out of range for r = {r}")]
    IndexOutOfRange { index: usize, r: usize },
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: String, cap: u64 },
    #[error("orbit value would need about {bits} bits, over the guard of {guard} bits")]
    OrbitTooLarge { bits: u64, guard: u64 },
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
}

/// `x^p + c` with integer `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnicriticalPoly {
    p: u32,
    c: BigInt,
}

impl UnicriticalPoly {
    pub fn new(p: u32, c: BigInt) -> Result<Self, SemigroupError> {
        check_exponent(p)?;
        Ok(UnicriticalPoly { p, c })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn apply(&self, x: &BigInt) -> BigInt {
        Pow::pow(x, self.p) + &self.c
    }

    pub fn to_dense(&self) -> DensePoly {
        let mut v = vec![BigInt::zero(); self.p as usize + 1];
        v[0] = self.c.clone();
        v[self.p as usize] = BigInt::one();
        DensePoly::new(v)
    }
}

impl fmt::Display for UnicriticalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_dense().fmt(f)
    }
}

/// `x^p + c` with rational `c`, held in lowest terms with positive
/// denominator (guaranteed by `BigRational`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnicriticalPolyQ {
    p: u32,
    c: BigRational,
}

impl UnicriticalPolyQ {
    pub fn new(p: u32, c: BigRational) -> Result<Self, SemigroupError> {
        check_exponent(p)?;
        Ok(UnicriticalPolyQ { p, c })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        Pow::pow(x, self.p) + &self.c
    }
}

/// Parses `-12`, `7/3` or `-7/3` into a rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<BigRational, SemigroupError> {
    let s = s.trim();
    let bad = || SemigroupError::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(SemigroupError::ZeroDenominator);
            }
            Ok(BigRational::new(n, d))
        }
    }
}

fn check_exponent(p: u32) -> Result<(), SemigroupError> {
    if is_prime_u64(u64::from(p)) {
        Ok(())
    } else {
        Err(SemigroupError::InvalidExponent(p))
    }
}

/// An ordered list of distinct coefficients `c_0, …, c_{r-1}` sharing one
/// prime exponent: the alphabet of the semigroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    p: u32,
    coeffs: Vec<BigInt>,
    bit_guard: u64,
}

impl GeneratorSet {
    pub fn new(p: u32, coeffs: Vec<BigInt>) -> Result<Self, SemigroupError> {
        check_exponent(p)?;
        if coeffs.is_empty() {
            return Err(SemigroupError::EmptySet);
        }
        for (j, cj) in coeffs.iter().enumerate() {
            if let Some(i) = coeffs[..j].iter().position(|ci| ci == cj) {
                return Err(SemigroupError::DuplicateGenerator {
                    c: cj.clone(),
                    first: i,
                    second: j,
                });
            }
        }
        Ok(GeneratorSet {
            p,
            coeffs,
            bit_guard: DEFAULT_BIT_GUARD,
        })
    }

    pub fn from_i64s(p: u32, coeffs: &[i64]) -> Result<Self, SemigroupError> {
        Self::new(p, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn with_bit_guard(mut self, bits: u64) -> Self {
        self.bit_guard = bits;
        self
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn bit_guard(&self) -> u64 {
        self.bit_guard
    }

    pub fn generator(&self, i: usize) -> UnicriticalPoly {
        UnicriticalPoly {
            p: self.p,
            c: self.coeffs[i].clone(),
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = UnicriticalPoly> + '_ {
        (0..self.r()).map(|i| self.generator(i))
    }

    pub fn check_word(&self, w: &Word) -> Result<(), SemigroupError> {
        match w.max_index() {
            Some(index) if index >= self.r() => Err(SemigroupError::IndexOutOfRange {
                index,
                r: self.r(),
            }),
            _ => Ok(()),
        }
    }

    /// Value of the composition named by `w` at `x`, applying the innermost
    /// generator first. The empty word is the identity.
    pub fn eval_word(&self, w: &Word, x: &BigInt) -> Result<BigInt, SemigroupError> {
        self.check_word(w)?;
        let mut v = x.clone();
        for &i in w.indices().iter().rev() {
            let bits = v.bits().saturating_mul(u64::from(self.p));
            if bits > self.bit_guard {
                return Err(SemigroupError::OrbitTooLarge {
                    bits,
                    guard: self.bit_guard,
                });
            }
            v = Pow::pow(&v, self.p) + &self.coeffs[i];
        }
        Ok(v)
    }

    /// Critical-orbit value of `w`, i.e. `eval_word(w, 0)`.
    pub fn orbit_value(&self, w: &Word) -> Result<BigInt, SemigroupError> {
        self.eval_word(w, &BigInt::zero())
    }

    /// Value of `w` at `x` modulo `q` (no bit guard needed).
    pub fn eval_word_mod(&self, w: &Word, x: u64, q: u64) -> u64 {
        let cs: Vec<u64> = self
            .coeffs
            .iter()
            .map(|c| crate::arith::bigint_mod_u64(c, q))
            .collect();
        w.indices().iter().rev().fold(x % q, |v, &i| {
            (crate::arith::pow_mod(v, u64::from(self.p), q) + cs[i]) % q
        })
    }

    /// Coefficients of the composition named by `w`, which is monic of
    /// degree `p^|w|`.
    pub fn expand_word(&self, w: &Word, degree_cap: u64) -> Result<DensePoly, SemigroupError> {
        self.check_word(w)?;
        let degree = u64::from(self.p).checked_pow(w.len() as u32);
        match degree {
            Some(d) if d <= degree_cap => {}
            _ => {
                return Err(SemigroupError::DegreeCapExceeded {
                    degree: format!("{}^{}", self.p, w.len()),
                    cap: degree_cap,
                })
            }
        }
        // h ← h ∘ (x^p + c_i), walking from the outermost letter inwards
        Ok(w.indices()
            .iter()
            .fold(DensePoly::x(), |h, &i| h.compose_unicritical(self.p, &self.coeffs[i])))
    }

    pub fn words(&self, max_len: usize) -> WordIter {
        WordIter::new(self.r(), max_len)
    }
}

impl fmt::Display for GeneratorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}, c = [", self.p)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorSetRepr {
    p: u32,
    c: Vec<IntLiteral>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntLiteral {
    Signed(i64),
    Unsigned(u64),
    Text(String),
}

impl IntLiteral {
    fn to_bigint(&self) -> Result<BigInt, SemigroupError> {
        match self {
            IntLiteral::Signed(v) => Ok(BigInt::from(*v)),
            IntLiteral::Unsigned(v) => Ok(BigInt::from(*v)),
            IntLiteral::Text(s) => BigInt::from_str(s.trim())
                .map_err(|_| SemigroupError::Parse(format!("not an integer: {s:?}"))),
        }
    }
}

impl Serialize for GeneratorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GeneratorSetRepr {
            p: self.p,
            c: self.coeffs.iter().map(|c| IntLiteral::Text(c.to_string())).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GeneratorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GeneratorSetRepr::deserialize(deserializer)?;
        let coeffs = repr
            .c
            .iter()
            .map(IntLiteral::to_bigint)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        GeneratorSet::new(repr.p, coeffs).map_err(serde::de::Error::custom)
    }
}

/// Sort key putting smaller magnitudes first and, at equal magnitude, the
/// nonnegative representative first.
pub(crate) fn magnitude_key(x: &BigInt) -> (BigInt, bool) {
    (x.abs(), x.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s_std() -> GeneratorSet {
        GeneratorSet::from_i64s(2, &[-12, -4]).unwrap()
    }

    fn w(v: &[usize]) -> Word {
        Word(v.to_vec())
    }

    #[test]
    fn construction_errors() {
        assert_eq!(s_std().r(), 2);
        assert!(matches!(
            GeneratorSet::from_i64s(2, &[-12, -12]),
            Err(SemigroupError::DuplicateGenerator { first: 0, second: 1, .. })
        ));
        assert_eq!(
            GeneratorSet::from_i64s(4, &[1]),
            Err(SemigroupError::InvalidExponent(4))
        );
        assert_eq!(GeneratorSet::from_i64s(2, &[]), Err(SemigroupError::EmptySet));
        assert_eq!(
            GeneratorSet::from_i64s(1, &[]),
            Err(SemigroupError::InvalidExponent(1))
        );
    }

    #[test]
    fn evaluation_examples() {
        let s = s_std();
        let zero = BigInt::zero();
        assert_eq!(s.eval_word(&w(&[0]), &zero).unwrap(), BigInt::from(-12));
        assert_eq!(s.eval_word(&w(&[0, 1]), &zero).unwrap(), BigInt::from(4));
        assert_eq!(s.eval_word(&w(&[1, 0]), &zero).unwrap(), BigInt::from(140));
        assert_eq!(s.eval_word(&Word::empty(), &BigInt::from(9)).unwrap(), BigInt::from(9));
        assert!(matches!(
            s.eval_word(&w(&[2]), &zero),
            Err(SemigroupError::IndexOutOfRange { index: 2, r: 2 })
        ));
        assert_eq!(s.eval_word_mod(&w(&[1, 0]), 0, 7), 0);
    }

    #[test]
    fn bit_guard_aborts() {
        let s = GeneratorSet::from_i64s(2, &[3]).unwrap().with_bit_guard(64);
        let err = s.orbit_value(&Word::repeat(0, 10)).unwrap_err();
        assert!(matches!(err, SemigroupError::OrbitTooLarge { guard: 64, .. }));
    }

    #[test]
    fn expansion_examples() {
        let s = s_std();
        assert_eq!(
            s.expand_word(&w(&[0, 0]), 4096).unwrap(),
            DensePoly::from_i64s(&[132, 0, -24, 0, 1])
        );
        assert_eq!(s.expand_word(&Word::empty(), 1).unwrap(), DensePoly::from_i64s(&[0, 1]));
        assert!(matches!(
            s.expand_word(&Word::repeat(0, 20), 4096),
            Err(SemigroupError::DegreeCapExceeded { cap: 4096, .. })
        ));
        let t = GeneratorSet::from_i64s(3, &[-504, 8]).unwrap();
        assert!(t.expand_word(&Word::repeat(1, 41), u64::MAX).is_err());
    }

    #[test]
    fn serde_forms() {
        let s: GeneratorSet = serde_json::from_str(r#"{"p":2,"c":[-12,"-4"]}"#).unwrap();
        assert_eq!(s, s_std());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"p":2,"c":["-12","-4"]}"#);
        let big: GeneratorSet =
            serde_json::from_str(r#"{"p":3,"c":["-123456789012345678901234567890"]}"#).unwrap();
        assert_eq!(big.coeff(0).to_string(), "-123456789012345678901234567890");
        assert!(serde_json::from_str::<GeneratorSet>(r#"{"p":2,"c":[1,1]}"#).is_err());
        assert!(serde_json::from_str::<GeneratorSet>(r#"{"p":2,"c":["x"]}"#).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(
            parse_rational(" -14/6 ").unwrap(),
            BigRational::new(BigInt::from(-7), BigInt::from(3))
        );
        assert_eq!(parse_rational("5/0"), Err(SemigroupError::ZeroDenominator));
        assert!(parse_rational("a/2").is_err());
        let q = UnicriticalPolyQ::new(2, parse_rational("1/4").unwrap()).unwrap();
        assert_eq!(
            q.apply(&parse_rational("1/2").unwrap()),
            parse_rational("1/2").unwrap()
        );
    }

    fn word_strategy(r: usize, max: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(0..r, 0..=max).prop_map(Word)
    }

    proptest! {
        #[test]
        fn composition_law(
            c0 in -50i64..50, c1 in -50i64..50, pi in 0usize..2,
            w1 in word_strategy(2, 3), w2 in word_strategy(2, 3), x in -20i64..20,
        ) {
            prop_assume!(c0 != c1);
            let p = [2u32, 3][pi];
            let s = GeneratorSet::from_i64s(p, &[c0, c1]).unwrap();
            let x = BigInt::from(x);
            let lhs = s.eval_word(&w1.concat(&w2), &x).unwrap();
            let rhs = s.eval_word(&w1, &s.eval_word(&w2, &x).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn expansion_degree_and_values(
            c0 in -30i64..30, c1 in -30i64..30, pi in 0usize..2,
            w in word_strategy(2, 5), x in -6i64..6,
        ) {
            prop_assume!(c0 != c1);
            let p = [2u32, 3][pi];
            prop_assume!(p == 2 || w.len() <= 4);
            let s = GeneratorSet::from_i64s(p, &[c0, c1]).unwrap();
            let f = s.expand_word(&w, 1 << 20).unwrap();
            prop_assert_eq!(f.degree(), Some((p as usize).pow(w.len() as u32)));
            prop_assert!(f.is_monic());
            let x = BigInt::from(x);
            prop_assert_eq!(f.eval(&x), s.eval_word(&w, &x).unwrap());
        }

        #[test]
        fn modular_evaluation_agrees(c0 in -99i64..99, w in word_strategy(1, 4), x in 0u64..50, qi in 0usize..4) {
            let q = [2u64, 7, 101, 65_537][qi];
            let s = GeneratorSet::from_i64s(3, &[c0]).unwrap();
            let exact = s.eval_word(&w, &BigInt::from(x)).unwrap();
            prop_assert_eq!(s.eval_word_mod(&w, x, q), crate::arith::bigint_mod_u64(&exact, q));
        }
    }
}
