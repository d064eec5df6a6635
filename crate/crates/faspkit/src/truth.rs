//! Exact rational truth degrees and the fuzzy connectives over them.
//!
//! Truth values live in the unit interval and are kept as reduced
//! rationals, so degree comparisons and the equalities produced by program
//! completion are decided exactly rather than up to rounding. Only the
//! Łukasiewicz and minimum t-norms are admitted: the product family leads
//! to quadratically constrained models that the solving backend does not
//! target, so its constructors are rejected up front.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The scalar type backing truth degrees. Desk-scale programs keep
/// numerators and denominators tiny; the MILP backend widens to big
/// rationals where pivoting can grow them.
pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TruthError {
    #[error("truth value {0} lies outside the unit interval [0,1]")]
    OutOfRange(String),
    #[error(
        "cannot parse `{0}` as a truth value (expected a decimal like 0.8 or a fraction like 4/5)"
    )]
    Parse(String),
    #[error("t-norm application requires at least one argument")]
    EmptyTNorm,
    #[error("the product t-norm `{0}` is not supported: it yields quadratically constrained models; use TL or TM")]
    ProductTNorm(String),
    #[error("the product negator `{0}` coincides with the Goedel negator; write not_m")]
    ProductNegator(String),
}

/// An exact truth degree in `[0,1]`, stored as a reduced rational.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruthValue(Rational);

impl TruthValue {
    pub fn zero() -> Self {
        TruthValue(Rational::zero())
    }

    pub fn one() -> Self {
        TruthValue(Rational::one())
    }

    /// Builds `numerator/denominator`, reducing and range-checking.
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, TruthError> {
        if denominator == 0 {
            return Err(TruthError::Parse(format!("{numerator}/0")));
        }
        Self::from_rational(Rational::new(numerator, denominator))
    }

    pub fn from_rational(r: Rational) -> Result<Self, TruthError> {
        if r.is_negative() || r > Rational::one() {
            return Err(TruthError::OutOfRange(r.to_string()));
        }
        Ok(TruthValue(r))
    }

    /// Wraps a rational that is already known to lie in the unit interval.
    fn from_unit(r: Rational) -> Self {
        debug_assert!(!r.is_negative() && r <= Rational::one());
        TruthValue(r)
    }

    pub fn as_rational(&self) -> Rational {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `1 - x`, the Łukasiewicz complement.
    pub fn complement(self) -> Self {
        TruthValue(Rational::one() - self.0)
    }
}

impl fmt::Display for TruthValue {
    /// Prints the shortest exact decimal when the denominator is of the
    /// form `2^a * 5^b`, and falls back to `p/q` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let numer = *self.0.numer() as i128;
        let denom = *self.0.denom() as i128;
        if let Some(s) = decimal_form(numer, denom) {
            write!(f, "{s}")
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthValue({self})")
    }
}

/// Exact decimal rendering of `numer/denom` (already reduced, both
/// nonnegative) when the denominator divides a power of ten.
pub(crate) fn decimal_form(numer: i128, denom: i128) -> Option<String> {
    let (mut rest, mut twos, mut fives) = (denom, 0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return None;
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return Some(numer.to_string());
    }
    let pow = 10i128.checked_pow(digits)?;
    let scaled = numer.checked_mul(pow)? / denom;
    let int = scaled / pow;
    let frac = (scaled % pow).abs();
    Some(format!("{int}.{frac:0width$}", width = digits as usize))
}

impl FromStr for TruthValue {
    type Err = TruthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(TruthError::Parse(s.to_string()));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| TruthError::Parse(s.to_string()))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| TruthError::Parse(s.to_string()))?;
            if q <= 0 || p < 0 {
                return Err(TruthError::Parse(s.to_string()));
            }
            return TruthValue::new(p, q);
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_part.is_empty() && frac_part.is_empty())
        {
            return Err(TruthError::Parse(s.to_string()));
        }
        let int: i128 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| TruthError::Parse(s.to_string()))?
        };
        let mut numer = int;
        let mut denom: i128 = 1;
        for c in frac_part.chars() {
            numer = numer
                .checked_mul(10)
                .and_then(|n| n.checked_add((c as u8 - b'0') as i128))
                .ok_or_else(|| TruthError::Parse(s.to_string()))?;
            denom = denom
                .checked_mul(10)
                .ok_or_else(|| TruthError::Parse(s.to_string()))?;
        }
        if numer > denom {
            return Err(TruthError::OutOfRange(s.to_string()));
        }
        let g = gcd(numer, denom);
        TruthValue::new((numer / g) as i64, (denom / g) as i64)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl Serialize for TruthValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TruthValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The admitted t-norm family tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TNormKind {
    /// `T_l(x,y) = max(0, x + y - 1)`.
    Lukasiewicz,
    /// `T_m(x,y) = min(x,y)`.
    Minimum,
}

impl TNormKind {
    /// Resolves a connective symbol, rejecting the product family.
    pub fn from_symbol(symbol: &str) -> Result<Self, TruthError> {
        match symbol {
            "TL" => Ok(TNormKind::Lukasiewicz),
            "TM" => Ok(TNormKind::Minimum),
            "TP" => Err(TruthError::ProductTNorm(symbol.to_string())),
            other => Err(TruthError::Parse(other.to_string())),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            TNormKind::Lukasiewicz => "TL",
            TNormKind::Minimum => "TM",
        }
    }
}

/// The admitted negator tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NegatorKind {
    /// `N_l(x) = 1 - x`.
    Lukasiewicz,
    /// `N_m(x) = 1 if x = 0 else 0` (strict Goedel negation).
    Goedel,
}

impl NegatorKind {
    pub fn from_symbol(symbol: &str) -> Result<Self, TruthError> {
        match symbol {
            "not_l" => Ok(NegatorKind::Lukasiewicz),
            "not_m" => Ok(NegatorKind::Goedel),
            "not_p" => Err(TruthError::ProductNegator(symbol.to_string())),
            other => Err(TruthError::Parse(other.to_string())),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            NegatorKind::Lukasiewicz => "not_l",
            NegatorKind::Goedel => "not_m",
        }
    }
}

/// Applies an n-ary t-norm by its closed form: the Łukasiewicz fold of
/// `n` arguments collapses to `max(0, sum - (n-1))`, and the minimum fold
/// to the pointwise minimum. A single argument is returned unchanged.
pub fn tnorm_apply(kind: TNormKind, args: &[TruthValue]) -> Result<TruthValue, TruthError> {
    let (first, rest) = args.split_first().ok_or(TruthError::EmptyTNorm)?;
    match kind {
        TNormKind::Minimum => Ok(*rest
            .iter()
            .fold(first, |acc, v| if v < acc { v } else { acc })),
        TNormKind::Lukasiewicz => {
            let sum: Rational = args.iter().map(TruthValue::as_rational).sum();
            let slack = sum - Rational::from_integer(args.len() as i64 - 1);
            Ok(TruthValue::from_unit(slack.max(Rational::zero())))
        }
    }
}

/// The residual implicator of the given t-norm:
/// `I(x,y) = sup { z | T(x,z) <= y }`.
pub fn residual_implicator(kind: TNormKind, x: TruthValue, y: TruthValue) -> TruthValue {
    match kind {
        TNormKind::Lukasiewicz => {
            let r = Rational::one() - x.as_rational() + y.as_rational();
            TruthValue::from_unit(r.min(Rational::one()))
        }
        TNormKind::Minimum => {
            if x <= y {
                TruthValue::one()
            } else {
                y
            }
        }
    }
}

pub fn negator_apply(kind: NegatorKind, x: TruthValue) -> TruthValue {
    match kind {
        NegatorKind::Lukasiewicz => x.complement(),
        NegatorKind::Goedel => {
            if x.is_zero() {
                TruthValue::one()
            } else {
                TruthValue::zero()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(n: i64, d: i64) -> TruthValue {
        TruthValue::new(n, d).unwrap()
    }

    /// All rationals i/d for d in 1..=max_denom, collected once per test.
    fn grid(max_denom: i64) -> Vec<TruthValue> {
        let mut vals = std::collections::BTreeSet::new();
        for d in 1..=max_denom {
            for n in 0..=d {
                vals.insert(tv(n, d));
            }
        }
        vals.into_iter().collect()
    }

    #[test]
    fn construction_rejects_out_of_range() {
        assert!(TruthValue::new(3, 2).is_err());
        assert!(TruthValue::new(-1, 2).is_err());
        assert!(TruthValue::new(1, 0).is_err());
        assert_eq!(tv(2, 4), tv(1, 2));
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!("0.8".parse::<TruthValue>().unwrap(), tv(4, 5));
        assert_eq!("4/5".parse::<TruthValue>().unwrap(), tv(4, 5));
        assert_eq!("1".parse::<TruthValue>().unwrap(), TruthValue::one());
        assert_eq!("0".parse::<TruthValue>().unwrap(), TruthValue::zero());
        assert_eq!(".25".parse::<TruthValue>().unwrap(), tv(1, 4));
        assert!("1.2".parse::<TruthValue>().is_err());
        assert!("7/5".parse::<TruthValue>().is_err());
        assert!("-0.1".parse::<TruthValue>().is_err());
        assert!("x".parse::<TruthValue>().is_err());
    }

    #[test]
    fn displays_shortest_exact_decimal_or_fraction() {
        assert_eq!(tv(4, 5).to_string(), "0.8");
        assert_eq!(tv(3, 4).to_string(), "0.75");
        assert_eq!(tv(1, 8).to_string(), "0.125");
        assert_eq!(TruthValue::one().to_string(), "1");
        assert_eq!(TruthValue::zero().to_string(), "0");
        assert_eq!(tv(1, 3).to_string(), "1/3");
        assert_eq!(tv(5, 6).to_string(), "5/6");
    }

    #[test]
    fn product_connectives_are_rejected() {
        assert_eq!(
            TNormKind::from_symbol("TP"),
            Err(TruthError::ProductTNorm("TP".into()))
        );
        assert_eq!(
            NegatorKind::from_symbol("not_p"),
            Err(TruthError::ProductNegator("not_p".into()))
        );
        assert_eq!(TNormKind::from_symbol("TL"), Ok(TNormKind::Lukasiewicz));
        assert_eq!(NegatorKind::from_symbol("not_m"), Ok(NegatorKind::Goedel));
    }

    #[test]
    fn tnorm_worked_values() {
        // Lukasiewicz (0.2, 0.8) -> 0
        assert_eq!(
            tnorm_apply(TNormKind::Lukasiewicz, &[tv(1, 5), tv(4, 5)]).unwrap(),
            TruthValue::zero()
        );
        // unary fold is the identity for both kinds
        for x in grid(6) {
            assert_eq!(tnorm_apply(TNormKind::Minimum, &[x]).unwrap(), x);
            assert_eq!(tnorm_apply(TNormKind::Lukasiewicz, &[x]).unwrap(), x);
        }
        // ternary closed form: max(0, 0.8 + 0.7 + 0.9 - 2) = 0.4
        assert_eq!(
            tnorm_apply(TNormKind::Lukasiewicz, &[tv(4, 5), tv(7, 10), tv(9, 10)]).unwrap(),
            tv(2, 5)
        );
        assert_eq!(
            tnorm_apply(TNormKind::Minimum, &[]),
            Err(TruthError::EmptyTNorm)
        );
    }

    #[test]
    fn nary_lukasiewicz_equals_binary_fold() {
        let g = grid(4);
        for a in &g {
            for b in &g {
                for c in &g {
                    let folded = tnorm_apply(
                        TNormKind::Lukasiewicz,
                        &[tnorm_apply(TNormKind::Lukasiewicz, &[*a, *b]).unwrap(), *c],
                    )
                    .unwrap();
                    let closed = tnorm_apply(TNormKind::Lukasiewicz, &[*a, *b, *c]).unwrap();
                    assert_eq!(folded, closed, "fold mismatch at ({a}, {b}, {c})");
                }
            }
        }
    }

    #[test]
    fn implicator_worked_values() {
        assert_eq!(
            residual_implicator(
                TNormKind::Lukasiewicz,
                TruthValue::zero(),
                TruthValue::zero()
            ),
            TruthValue::one()
        );
        assert_eq!(
            residual_implicator(TNormKind::Minimum, tv(9, 10), tv(2, 5)),
            tv(2, 5)
        );
        assert_eq!(
            residual_implicator(TNormKind::Lukasiewicz, tv(7, 10), tv(1, 2)),
            tv(4, 5)
        );
    }

    #[test]
    fn negator_worked_values() {
        assert_eq!(negator_apply(NegatorKind::Lukasiewicz, tv(4, 5)), tv(1, 5));
        assert_eq!(
            negator_apply(NegatorKind::Goedel, TruthValue::zero()),
            TruthValue::one()
        );
        assert_eq!(
            negator_apply(NegatorKind::Goedel, tv(3, 10)),
            TruthValue::zero()
        );
    }

    #[test]
    fn residuation_principle_holds_on_grid() {
        let g = grid(5);
        for kind in [TNormKind::Lukasiewicz, TNormKind::Minimum] {
            for x in &g {
                for y in &g {
                    for z in &g {
                        let lhs = tnorm_apply(kind, &[*x, *y]).unwrap() <= *z;
                        let rhs = *x <= residual_implicator(kind, *y, *z);
                        assert_eq!(lhs, rhs, "residuation fails for {kind:?} at ({x},{y},{z})");
                    }
                }
            }
        }
    }

    #[test]
    fn implicator_is_one_exactly_on_leq() {
        let g = grid(6);
        for kind in [TNormKind::Lukasiewicz, TNormKind::Minimum] {
            for x in &g {
                for y in &g {
                    assert_eq!(residual_implicator(kind, *x, *y).is_one(), x <= y);
                }
            }
        }
    }

    #[test]
    fn biresiduum_is_one_exactly_on_equality() {
        let g = grid(6);
        for kind in [TNormKind::Lukasiewicz, TNormKind::Minimum] {
            for x in &g {
                for y in &g {
                    let bi = tnorm_apply(
                        kind,
                        &[
                            residual_implicator(kind, *x, *y),
                            residual_implicator(kind, *y, *x),
                        ],
                    )
                    .unwrap();
                    assert_eq!(bi.is_one(), x == y);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(n in 0i64..=60, d in 1i64..=60) {
            prop_assume!(n <= d);
            let v = tv(n, d);
            let back: TruthValue = v.to_string().parse().unwrap();
            prop_assert_eq!(v, back);
        }

        #[test]
        fn tnorm_is_order_insensitive(mut xs in proptest::collection::vec((0i64..=12, 1i64..=4), 1..6)) {
            let vals: Vec<TruthValue> =
                xs.drain(..).map(|(n, d)| tv(n.min(d), d)).collect();
            let mut rev = vals.clone();
            rev.reverse();
            for kind in [TNormKind::Lukasiewicz, TNormKind::Minimum] {
                prop_assert_eq!(
                    tnorm_apply(kind, &vals).unwrap(),
                    tnorm_apply(kind, &rev).unwrap()
                );
            }
        }

        #[test]
        fn tnorm_is_monotone_per_argument(n in 0i64..=6, d in 1i64..=6, m in 0i64..=6) {
            let x = tv(n.min(d), d);
            let y = tv(m.min(d), d);
            let lo = x.min(y);
            let hi = x.max(y);
            for kind in [TNormKind::Lukasiewicz, TNormKind::Minimum] {
                let a = tnorm_apply(kind, &[lo, tv(1, 2)]).unwrap();
                let b = tnorm_apply(kind, &[hi, tv(1, 2)]).unwrap();
                prop_assert!(a <= b);
            }
        }
    }
}
