//! Triangle machinery over the Boolean group `F_2^n`.
//!
//! A *triangle* is an ordered triple `(x, y, z)` with `x + y + z = 0`
//! (addition is XOR).  The crate provides, bottom up:
//!
//! * [`gf2`] — subgroups of `F_2^n` in canonical reduced echelon form,
//!   cosets, dual characters, annihilators;
//! * [`fourier`] — exact integer Walsh–Hadamard spectra of set indicators
//!   restricted to cosets;
//! * [`triangles`] — triangle counting three independent ways, greedy
//!   maximal packings and removal-distance ("farness") bounds;
//! * [`regularity`] — superregular parts and decompositions of a set
//!   within a coset;
//! * [`shattering`] — shattering certificates, the entropy toolbox and the
//!   shatter-or-count dichotomy;
//! * [`driver`] — the refinement loop that either certifies many triangles
//!   or refines the partition subgroup with a guaranteed entropy gain,
//!   plus the symbolic tower-of-exponentials bound;
//! * [`instances`] — seeded instance generators used by tests and the CLI.
//!
//! Everything except entropy values is computed in exact integer or
//! rational arithmetic; entropy is the only floating-point quantity.

pub mod driver;
pub mod fourier;
pub mod gf2;
pub mod instances;
pub mod regularity;
pub mod report;
pub mod set;
pub mod setfile;
pub mod shattering;
pub mod triangles;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational used throughout for densities, thresholds and parameters.
pub type Rat = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "rational with zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an unsigned integer value.
pub fn rat_int(v: u64) -> Rat {
    Rat::from(BigInt::from(v))
}

/// Parse an exact rational from flag text: `"3/4"`, `"0.25"` or `"2"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    use std::str::FromStr as _;
    let s = s.trim();
    let bad = |what: &str| Error::Parse(format!("bad rational {s:?}: {what}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad("numerator"))?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad("denominator"))?;
        if den == BigInt::from(0) {
            return Err(bad("zero denominator"));
        }
        Ok(Rat::new(num, den))
    } else if let Some((int, frac)) = s.split_once('.') {
        let (neg, int) = match int.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int),
        };
        if !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (int.is_empty() && frac.is_empty())
        {
            return Err(bad("decimal digits"));
        }
        let num = BigInt::from_str(&format!("0{int}{frac}")).expect("digits");
        let den = BigInt::from(10).pow(frac.len() as u32);
        let r = Rat::new(num, den);
        Ok(if neg { -r } else { r })
    } else {
        let v = BigInt::from_str(s).map_err(|_| bad("integer"))?;
        Ok(Rat::from(v))
    }
}

/// Largest supported ambient dimension. Elements are stored in `u32`,
/// spectra in dense arrays of length `2^n`.
pub const MAX_N: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands live in different ambient groups or a value is out of range.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// An element was required to lie in a subgroup or coset and does not.
    #[error("not in subgroup: {0}")]
    NotInSubgroup(String),
    /// A claimed subgroup relation `H' <= H` does not hold.
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    /// A documented precondition of an operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Malformed textual input (set files, flag values, reports).
    #[error("parse error: {0}")]
    Parse(String),
    /// An internal invariant failed; indicates a bug, not a caller error.
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_flags_parse_exactly() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat(" -2/6 ").unwrap(), rat(-1, 3));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("2").unwrap(), rat(2, 1));
        for bad in ["", "1/0", "x", "1.2.3", "0x3", "1e-3", "."] {
            assert!(parse_rat(bad).is_err(), "accepted {bad:?}");
        }
    }
}
