use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::SemigroupError;

/// Dense univariate polynomial over the integers, coefficients in ascending
/// degree order. The zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DensePoly {
    coeffs: Vec<BigInt>,
}

impl DensePoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        DensePoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        DensePoly { coeffs: Vec::new() }
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        DensePoly {
            coeffs: vec![BigInt::zero(), BigInt::one()],
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `h(x + c)`, by repeated synthetic division.
    pub fn taylor_shift(&self, c: &BigInt) -> DensePoly {
        let mut a = self.coeffs.clone();
        let n = a.len();
        if c.is_zero() || n < 2 {
            return self.clone();
        }
        for i in 0..n - 1 {
            for j in (i..n - 1).rev() {
                let add = &a[j + 1] * c;
                a[j] += add;
            }
        }
        DensePoly::new(a)
    }

    /// `h(x^k)`.
    pub fn inflate(&self, k: usize) -> DensePoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut out = vec![BigInt::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = c.clone();
        }
        DensePoly { coeffs: out }
    }

    /// `h ∘ (x^p + c)`.
    pub fn compose_unicritical(&self, p: u32, c: &BigInt) -> DensePoly {
        self.taylor_shift(c).inflate(p as usize)
    }

    pub fn mul(&self, other: &DensePoly) -> DensePoly {
        if self.is_zero() || other.is_zero() {
            return DensePoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        DensePoly::new(out)
    }

    /// Division by a monic divisor; returns `(quotient, remainder)`.
    pub fn div_rem_monic(&self, divisor: &DensePoly) -> Option<(DensePoly, DensePoly)> {
        if !divisor.is_monic() {
            return None;
        }
        let d = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= d {
            return Some((DensePoly::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let lead = std::mem::take(&mut rem[k + d]);
            if lead.is_zero() {
                continue;
            }
            for (j, b) in divisor.coeffs[..d].iter().enumerate() {
                rem[k + j] -= &lead * b;
            }
            quot[k] = lead;
        }
        rem.truncate(d);
        Some((DensePoly::new(quot), DensePoly::new(rem)))
    }
}

impl fmt::Display for DensePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => f.write_str("x")?,
                1 => write!(f, "{mag}x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for DensePoly {
    type Err = SemigroupError;

    /// Accepts sums of terms like `x^2 - 12`, `-3x^4 + x + 7`, `2*x^3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| SemigroupError::Parse(format!("polynomial {s:?}: {msg}"));
        let pieces: Vec<&str> = s.split_whitespace().collect();
        for pair in pieces.windows(2) {
            let end = pair[0].chars().last().unwrap_or(' ');
            let start = pair[1].chars().next().unwrap_or(' ');
            let glued = |c: char| c.is_ascii_alphanumeric() || c == '^';
            if glued(end) && glued(start) {
                return Err(err("missing operator between terms"));
            }
        }
        let text: String = pieces.concat();
        if text.is_empty() {
            return Err(err("empty input"));
        }
        let bytes = text.as_bytes();
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut negative = false;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                negative = bytes[pos] == b'-';
                pos += 1;
            } else if pos != 0 {
                return Err(err("expected + or - between terms"));
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let coeff = if pos > start {
                Some(BigInt::from_str(&text[start..pos]).map_err(|_| err("bad integer"))?)
            } else {
                None
            };
            if pos < bytes.len() && bytes[pos] == b'*' {
                if coeff.is_none() {
                    return Err(err("'*' without coefficient"));
                }
                pos += 1;
                if pos >= bytes.len() || bytes[pos] != b'x' {
                    return Err(err("expected x after '*'"));
                }
            }
            let exponent = if pos < bytes.len() && bytes[pos] == b'x' {
                pos += 1;
                if pos < bytes.len() && bytes[pos] == b'^' {
                    pos += 1;
                    let es = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    text[es..pos]
                        .parse::<usize>()
                        .map_err(|_| err("bad exponent"))?
                } else {
                    1
                }
            } else {
                if coeff.is_none() {
                    return Err(err("empty term"));
                }
                0
            };
            let mut c = coeff.unwrap_or_else(BigInt::one);
            if negative {
                c = -c;
            }
            if coeffs.len() <= exponent {
                coeffs.resize(exponent + 1, BigInt::zero());
            }
            coeffs[exponent] += c;
        }
        Ok(DensePoly::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_round_trip() {
        let f = DensePoly::from_i64s(&[132, 0, -24, 0, 1]);
        assert_eq!(f.to_string(), "x^4 - 24x^2 + 132");
        assert_eq!("x^4 - 24x^2 + 132".parse::<DensePoly>().unwrap(), f);
        assert_eq!("x^2 - 12".parse::<DensePoly>().unwrap().to_string(), "x^2 - 12");
        assert_eq!("-x + 2*x^3 - 0".parse::<DensePoly>().unwrap().to_string(), "2x^3 - x");
        assert_eq!("0".parse::<DensePoly>().unwrap(), DensePoly::zero());
        assert!("x^".parse::<DensePoly>().is_err());
        assert!("3 4".parse::<DensePoly>().is_err());
        assert!("".parse::<DensePoly>().is_err());
    }

    #[test]
    fn taylor_shift_matches_direct_evaluation() {
        let f = DensePoly::from_i64s(&[5, -3, 0, 2, 1]);
        let c = BigInt::from(-7);
        let g = f.taylor_shift(&c);
        for x in -10..10 {
            let x = BigInt::from(x);
            assert_eq!(g.eval(&x), f.eval(&(&x + &c)));
        }
    }

    #[test]
    fn monic_division() {
        let a = DensePoly::from_i64s(&[-1, 0, 1]);
        let b = DensePoly::from_i64s(&[1, 1]);
        let (q, r) = a.div_rem_monic(&b).unwrap();
        assert_eq!(q, DensePoly::from_i64s(&[-1, 1]));
        assert!(r.is_zero());
        let (q, r) = DensePoly::from_i64s(&[3, 0, 0, 1])
            .div_rem_monic(&DensePoly::from_i64s(&[1, 0, 1]))
            .unwrap();
        assert_eq!(q, DensePoly::from_i64s(&[0, 1]));
        assert_eq!(r, DensePoly::from_i64s(&[3, -1]));
        assert!(a.div_rem_monic(&DensePoly::from_i64s(&[1, 2])).is_none());
    }
}
