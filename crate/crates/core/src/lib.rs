//! Irreducible polynomials in composition semigroups generated by
//! unicritical polynomials `x^p + c`.
//!
//! Words are written outermost-first: `[i, j]` is `φ_i ∘ φ_j`.

pub mod arith;
pub mod semigroup;
pub mod classify;
pub mod report;
pub mod modp;
pub mod certify;
pub mod audit;
