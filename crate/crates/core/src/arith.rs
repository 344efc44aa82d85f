//! Exact integer utilities: floor k-th roots, perfect p-th power detection,
//! small-prime helpers and a few `i128` fast paths used by the audits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("domain error: even root (k = {k}) of a negative number")]
    EvenRootOfNegative { k: u32 },
    #[error("domain error: root index must be at least 1")]
    ZeroRootIndex,
}

/// Number of residue tests run before an exact root extraction.
pub const SCREEN_PRIMES: usize = 10;

/// Floor of the real k-th root of a non-negative integer, by integer Newton
/// iteration started above the root.
fn floor_root_unsigned(m: &BigUint, k: u32) -> BigUint {
    if m.is_zero() || m.is_one() || k == 1 {
        return m.clone();
    }
    let bits = m.bits();
    if bits <= u64::from(k) {
        // 1 <= m < 2^k, so the root is 1.
        return BigUint::one();
    }
    let k_big = BigUint::from(k);
    let k_minus_one = k - 1;
    // 2^ceil(bits/k) > m^(1/k)
    let mut x = BigUint::one() << bits.div_ceil(u64::from(k));
    loop {
        let next = (&x * k_minus_one + m / x.pow(k_minus_one)) / &k_big;
        if next >= x {
            break;
        }
        x = next;
    }
    // Newton from above lands on the floor; the correction only guards the
    // contract against any off-by-one in the update.
    while x.pow(k) > *m {
        x -= 1u32;
    }
    loop {
        let up = &x + 1u32;
        if up.pow(k) <= *m {
            x = up;
        } else {
            break;
        }
    }
    x
}

/// Largest integer `r` with `r^k <= n`, together with whether `r^k == n`.
///
/// Negative `n` is accepted for odd `k`; the result still satisfies
/// `r^k <= n < (r+1)^k`, so e.g. the floor cube root of `-9` is `-3`.
pub fn kth_root_floor(n: &BigInt, k: u32) -> Result<(BigInt, bool), ArithError> {
    if k == 0 {
        return Err(ArithError::ZeroRootIndex);
    }
    match n.sign() {
        Sign::NoSign => Ok((BigInt::zero(), true)),
        Sign::Plus => {
            let m = n.magnitude();
            let r = floor_root_unsigned(m, k);
            let exact = r.pow(k) == *m;
            Ok((BigInt::from(r), exact))
        }
        Sign::Minus => {
            if k.is_multiple_of(2) {
                return Err(ArithError::EvenRootOfNegative { k });
            }
            let m = n.magnitude();
            let r = floor_root_unsigned(m, k);
            if r.pow(k) == *m {
                Ok((-BigInt::from(r), true))
            } else {
                Ok((-BigInt::from(r + 1u32), false))
            }
        }
    }
}

/// Exact integer k-th root of `n` if one exists (sign rules as for odd/even k).
pub fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    match kth_root_floor(n, k) {
        Ok((r, true)) => Some(r),
        _ => None,
    }
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    perfect_pth_power(n, 2).is_some()
}

/// Returns `r` with `r^p == n` when such an integer exists.
///
/// `n` is first screened modulo the first [`SCREEN_PRIMES`] primes
/// `q ≡ 1 (mod p)`: a true p-th power is a p-th power residue modulo every
/// prime, so a failed residue test rules `n` out without root extraction.
/// For `p = 2` negative inputs are rejected immediately.
pub fn perfect_pth_power(n: &BigInt, p: u32) -> Option<BigInt> {
    debug_assert!(p >= 1);
    if n.is_zero() {
        return Some(BigInt::zero());
    }
    if p.is_multiple_of(2) && n.is_negative() {
        return None;
    }
    if p == 1 {
        return Some(n.clone());
    }
    if !passes_residue_screen(n, p) {
        return None;
    }
    exact_root(n, p)
}

/// True when `n` is a p-th power residue modulo every screening prime.
pub fn passes_residue_screen(n: &BigInt, p: u32) -> bool {
    screen_primes(p).iter().all(|&q| {
        let a = bigint_mod_u64(n, q);
        a == 0 || pow_mod(a, (q - 1) / u64::from(p), q) == 1
    })
}

/// The first [`SCREEN_PRIMES`] primes congruent to 1 modulo `p`, computed
/// once per exponent.
pub fn screen_primes(p: u32) -> Arc<[u64]> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<[u64]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(p)
        .or_insert_with(|| {
            let step = u64::from(p);
            let mut out = Vec::with_capacity(SCREEN_PRIMES);
            let mut q = step + 1;
            while out.len() < SCREEN_PRIMES {
                if is_prime_u64(q) {
                    out.push(q);
                }
                q += step;
            }
            out.into()
        })
        .clone()
}

/// Least non-negative residue of `n` modulo `q`.
pub fn bigint_mod_u64(n: &BigInt, q: u64) -> u64 {
    let r = (n.magnitude() % q).to_u64().expect("residue below modulus");
    if n.is_negative() && r != 0 {
        q - r
    } else {
        r
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes `<= limit`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor square root of a `u128`.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Square root of `n` when `n` is a perfect square; quick residue filters
/// reject most non-squares before the root is taken.
pub fn exact_sqrt_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let u = n as u128;
    // squares mod 64 / 63 / 65 / 11
    const SQ64: u64 = 0x0202_0213_0203_0213;
    if (SQ64 >> (u % 64)) & 1 == 0 {
        return None;
    }
    if !is_small_square_residue((u % 63) as u32, 63)
        || !is_small_square_residue((u % 65) as u32, 65)
        || !is_small_square_residue((u % 11) as u32, 11)
    {
        return None;
    }
    let r = isqrt_u128(u);
    (r * r == u).then_some(r as i128)
}

fn is_small_square_residue(r: u32, m: u32) -> bool {
    (0..m).any(|x| (x * x) % m == r)
}

/// `|x|` as a `BigInt`-free comparison helper for the audits.
#[inline]
pub fn abs_le(x: i128, bound: i128) -> bool {
    x.checked_abs().is_some_and(|a| a <= bound)
}
