//! The quartic `f` behind the quadratic special pair, and the octic `f(x^2)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use super::{chunked_search, split_chunks, AuditReport, RunOptions, Violation};
use crate::arith::{is_perfect_square, primes_up_to};
use crate::modp::{rabin_irreducible, FqPoly};
use crate::semigroup::{DensePoly, GeneratorSet, Word};

/// Values above this are not factored when picking evaluation points.
const FACTOR_LIMIT: u128 = 10_000_000_000_000;
const POINT_RADIUS: i64 = 12;

fn divisors(n: u128) -> Vec<u128> {
    let mut primes = Vec::new();
    let mut m = n;
    let mut d = 2u128;
    while d * d <= m {
        let mut e = 0;
        while m.is_multiple_of(d) {
            m /= d;
            e += 1;
        }
        if e > 0 {
            primes.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        primes.push((m, 1));
    }
    let mut out = vec![1u128];
    for (p, e) in primes {
        let base = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(base.iter().map(|&x| x * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Coefficients of `prod_{j != i} (x - x_j)`, ascending.
fn node_poly(nodes: &[i128], i: usize) -> Vec<i128> {
    let mut poly = vec![1i128];
    for (j, &xj) in nodes.iter().enumerate() {
        if j == i {
            continue;
        }
        let mut next = vec![0i128; poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * xj;
        }
        poly = next;
    }
    poly
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorSearch {
    Found(DensePoly),
    /// No monic integer factor of degree `1..=max_deg` exists.
    NoneUpTo(usize),
    /// Too few evaluation points with small enough values.
    Undecided,
}

impl FactorSearch {
    pub fn factor(&self) -> Option<&DensePoly> {
        match self {
            FactorSearch::Found(g) => Some(g),
            _ => None,
        }
    }
}

/// Searches for a monic integer factor of degree `1..=max_deg` of the monic
/// integer polynomial `f` (Kronecker's method with evaluation points chosen
/// to have few divisors).
///
/// # Panics
/// If `f` is not monic.
pub fn monic_factor_search(f: &DensePoly, max_deg: usize) -> FactorSearch {
    assert!(f.is_monic(), "monic input required");
    let n = f.degree().unwrap_or(0);
    let max_deg = max_deg.min(n.saturating_sub(1));
    // (x, F(x), divisors of |F(x)|)
    let mut points: Vec<(i128, i128, Vec<u128>)> = Vec::new();
    for k in -POINT_RADIUS..=POINT_RADIUS {
        let v = f.eval(&BigInt::from(k));
        if v.is_zero() {
            return FactorSearch::Found(DensePoly::from_i64s(&[-k, 1]));
        }
        let Some(v) = v.to_i128() else { continue };
        if v.unsigned_abs() > FACTOR_LIMIT {
            continue;
        }
        points.push((i128::from(k), v, divisors(v.unsigned_abs())));
    }
    points.sort_by_key(|(x, _, d)| (d.len(), x.abs(), *x));

    for d in 1..=max_deg {
        if points.len() < d + 1 {
            return FactorSearch::Undecided;
        }
        let (nodes, filters) = points.split_at(d);
        let xs: Vec<i128> = nodes.iter().map(|p| p.0).collect();
        let polys: Vec<Vec<i128>> = (0..d).map(|i| node_poly(&xs, i)).collect();
        let dens: Vec<i128> = (0..d)
            .map(|i| {
                xs.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| xs[i] - xj)
                    .product()
            })
            .collect();
        let lcm = dens.iter().fold(1i128, |acc, &x| acc.lcm(&x.abs()));
        let scale: Vec<i128> = dens.iter().map(|&x| lcm / x).collect();
        let xd: Vec<i128> = xs.iter().map(|&x| x.pow(d as u32)).collect();

        let choices: Vec<Vec<i128>> = nodes
            .iter()
            .map(|(_, _, divs)| {
                divs.iter()
                    .flat_map(|&q| [q as i128, -(q as i128)])
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; d];
        'odometer: loop {
            let mut lower = vec![0i128; d];
            for i in 0..d {
                let w = (choices[i][idx[i]] - xd[i]) * scale[i];
                for (k, &c) in polys[i].iter().enumerate() {
                    lower[k] += w * c;
                }
            }
            if lower.iter().all(|c| c % lcm == 0) {
                let mut g: Vec<i128> = lower.iter().map(|c| c / lcm).collect();
                g.push(1);
                let eval = |x: i128| g.iter().rev().fold(0i128, |acc, &c| acc * x + c);
                let consistent = filters.iter().all(|(x, v, _)| {
                    let gv = eval(*x);
                    gv != 0 && v % gv == 0
                });
                if consistent {
                    let cand = DensePoly::new(g.iter().map(|&c| BigInt::from(c)).collect());
                    if let Some((_, r)) = f.div_rem_monic(&cand) {
                        if r.is_zero() {
                            return FactorSearch::Found(cand);
                        }
                    }
                }
            }
            for i in 0..d {
                idx[i] += 1;
                if idx[i] < choices[i].len() {
                    continue 'odometer;
                }
                idx[i] = 0;
            }
            break;
        }
    }
    FactorSearch::NoneUpTo(max_deg)
}

fn quartic(t: &BigInt) -> DensePoly {
    let t2 = t * t;
    let t4 = &t2 * &t2;
    DensePoly::new(vec![
        t2.clone(),
        -(&t4 * 4u32),
        &t4 * 4u32 + &t2 * 2u32,
        -(&t2 * 4u32),
        BigInt::one(),
    ])
}

fn check_t(t: i64) -> (Vec<Violation>, Vec<serde_json::Value>) {
    let mut out = Vec::new();
    let tb = BigInt::from(t);
    let t2 = &tb * &tb;
    let t4 = &t2 * &t2;
    let t6 = &t4 * &t2;
    let t8 = &t4 * &t4;
    let tv = || ("t", tb.clone());
    let f = quartic(&tb);

    // Reduced form f(x + t^2) = x^4 + (2t^2 - 2t^4)x^2 + (t^8 - 2t^6 + t^2).
    let mid = &t2 * 2u32 - &t4 * 2u32;
    let konst = &t8 - &t6 * 2u32 + &t2;
    let reduced = DensePoly::new(vec![konst.clone(), BigInt::zero(), mid.clone(), BigInt::zero(), BigInt::one()]);
    if f.taylor_shift(&t2) != reduced {
        out.push(Violation::new("f(x + t^2) differs from the reduced quartic", &[tv()], true));
    }
    let disc = &mid * &mid - &konst * 4u32;
    let disc_expected = &t4 * 4u32 - &t2 * 4u32;
    if disc != disc_expected {
        out.push(Violation::new("reduced discriminant is not 4t^4 - 4t^2", &[tv(), ("disc", disc.clone())], true));
    }
    if is_perfect_square(&disc) {
        out.push(Violation::new("4t^4 - 4t^2 is a square", &[tv(), ("value", disc.clone())], true));
    }
    if is_perfect_square(&konst) {
        out.push(Violation::new("t^8 - 2t^6 + t^2 is a square", &[tv(), ("value", konst.clone())], true));
    }
    match monic_factor_search(&f, 2) {
        FactorSearch::Found(g) => {
            let ok = f.div_rem_monic(&g).is_some_and(|(_, r)| r.is_zero());
            out.push(Violation::new(format!("quartic has factor {g}"), &[tv()], ok));
        }
        FactorSearch::Undecided => {
            out.push(Violation::new("quartic factor search undecided", &[tv()], false));
        }
        FactorSearch::NoneUpTo(_) => {}
    }

    // The octic phi_1^2 ∘ phi_2 with phi_1 = x^2 + t^2 - t^4, phi_2 = x^2 - t^2.
    let set = GeneratorSet::new(2, vec![&t2 - &t4, -t2.clone()]).expect("distinct coefficients");
    let octic = set
        .expand_word(&Word(vec![0, 0, 1]), 8)
        .expect("degree 8 within cap");
    if octic != f.inflate(2) {
        out.push(Violation::new("phi_1^2 ∘ phi_2 differs from f(x^2)", &[tv()], true));
    }
    let factor = monic_factor_search(&octic, 4);
    match &factor {
        FactorSearch::Found(g) => {
            let ok = octic.div_rem_monic(g).is_some_and(|(_, r)| r.is_zero());
            out.push(Violation::new(format!("octic has factor {g}"), &[tv()], ok));
        }
        FactorSearch::Undecided => {
            out.push(Violation::new("octic factor search undecided", &[tv()], false));
        }
        FactorSearch::NoneUpTo(_) => {}
    }
    // The local route is closed: the orbit value t^2 is a square, so the
    // octic must split modulo every odd prime not dividing t.
    let mut irreducible_mod = Vec::new();
    for q in primes_up_to(60).into_iter().filter(|&q| q > 2 && t % q as i64 != 0) {
        let fq = FqPoly::from_dense(&octic, q);
        if rabin_irreducible(&fq).unwrap_or(false) {
            irreducible_mod.push(q);
            out.push(Violation::new(
                "octic irreducible modulo a prime although its orbit value is a square",
                &[tv(), ("q", q.into())],
                true,
            ));
        }
    }
    let detail = json!({
        "t": t,
        "quartic": f.to_string(),
        "disc": disc.to_string(),
        "constant": konst.to_string(),
        "octic_irreducible": factor == FactorSearch::NoneUpTo(4),
    });
    (out, vec![detail])
}

/// For `2 <= |t| <= t_max`: re-derives the reduced quartic, checks both
/// reducibility quantities are non-squares, and confirms the octic
/// `phi_1^2 ∘ phi_2 = f(x^2)` has no monic integer factor of degree <= 4.
pub fn audit_quartic_octic(t_max: i64, opts: &RunOptions) -> AuditReport {
    let params = json!({
        "t_max": t_max,
        "octic_method": "monic integer factor search, degrees 1..=4",
    });
    let ts: Vec<i64> = (2..=t_max).flat_map(|t| [-t, t]).collect();
    let chunks = split_chunks(ts.iter().map(|&t| (t, 0, 0)), opts.chunk_size);
    let (mut report, details) = chunked_search("quartic", params, &chunks, opts, |ch| check_t(ch.key));
    let mut details = details;
    details.sort_by_key(|d| (d["t"].as_i64().unwrap_or(0).abs(), d["t"].as_i64().unwrap_or(0)));
    report.details = json!({ "per_t": details });
    report
}
