//! Exact scalars over a prime field `F_p` (p odd) or over the rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest modulus accepted; keeps products of residues inside `u64`.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Prime(u64),
    Rationals,
}

/// The field all entries of a matrix live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec(Kind);

impl FieldSpec {
    pub const Q: FieldSpec = FieldSpec(Kind::Rationals);

    /// `F_p` for an odd prime `p`. Characteristic 2 is rejected.
    pub fn prime(p: u64) -> Result<Self> {
        if p == 2 {
            return Err(Error::InvalidField("characteristic 2 is not supported".into()));
        }
        if p > MAX_MODULUS {
            return Err(Error::InvalidField(format!("modulus {p} exceeds {MAX_MODULUS}")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(FieldSpec(Kind::Prime(p)))
    }

    pub fn rationals() -> Self {
        Self::Q
    }

    /// The modulus for a prime field, `None` for Q.
    pub fn modulus(&self) -> Option<u64> {
        match self.0 {
            Kind::Prime(p) => Some(p),
            Kind::Rationals => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.0, Kind::Prime(_))
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self.0 {
            Kind::Prime(p) => Scalar::Mod {
                value: v.rem_euclid(p as i64) as u64,
                p,
            },
            Kind::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match self.0 {
            Kind::Prime(p) => Scalar::Mod {
                value: reduce_bigint(v, p),
                p,
            },
            Kind::Rationals => Scalar::Rat(BigRational::from_integer(v.clone())),
        }
    }

    /// Maps a rational number into this field; fails if the denominator
    /// vanishes mod p.
    pub fn from_rational(&self, v: &BigRational) -> Result<Scalar> {
        match self.0 {
            Kind::Prime(p) => {
                let num = reduce_bigint(v.numer(), p);
                let den = reduce_bigint(v.denom(), p);
                if den == 0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(Scalar::Mod {
                    value: mul_mod(num, inv_mod(den, p), p),
                    p,
                })
            }
            Kind::Rationals => Ok(Scalar::Rat(v.clone())),
        }
    }

    /// Parses a decimal scalar such as `"3"`, `"-1"` or `"7/2"`.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| Error::Parse(format!("bad scalar {s:?}")))?;
        let den = BigInt::from_str(den).map_err(|_| Error::Parse(format!("bad scalar {s:?}")))?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.from_rational(&BigRational::new(num, den))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Kind::Prime(p) => write!(f, "Fp:{p}"),
            Kind::Rationals => write!(f, "Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `Q`, `Fp:<p>` and the short form `F<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Q" {
            return Ok(Self::Q);
        }
        let digits = s
            .strip_prefix("Fp:")
            .or_else(|| s.strip_prefix('F'))
            .ok_or_else(|| Error::Parse(format!("unknown field {s:?}")))?;
        let p = digits
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("unknown field {s:?}")))?;
        Self::prime(p)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A field element. Rationals are kept in lowest terms with a positive
/// denominator (guaranteed by `BigRational`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Mod { value: u64, p: u64 },
    Rat(BigRational),
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Mod { p, .. } => FieldSpec(Kind::Prime(*p)),
            Scalar::Rat(_) => FieldSpec::Q,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Mod { value, .. } => *value == 0,
            Scalar::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Mod { value, .. } => *value == 1,
            Scalar::Rat(r) => r.is_one(),
        }
    }

    /// The rational value, if this is an element of Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Mod { .. } => None,
        }
    }

    /// The residue in `0..p`, if this is an element of `F_p`.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Mod { value, .. } => Some(*value),
            Scalar::Rat(_) => None,
        }
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.field(),
                right: other.field(),
            })
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Mod { value: a, p }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: (a + b) % p,
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Mod { value: a, p }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: (a + p - b) % p,
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            _ => unreachable!(),
        })
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Mod { value: a, p }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: mul_mod(*a, *b, *p),
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => unreachable!(),
        })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Mod { value, p } => Scalar::Mod {
                value: inv_mod(*value, *p),
                p: *p,
            },
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Mod { value, p } => Scalar::Mod {
                value: (p - value) % p,
                p: *p,
            },
            Scalar::Rat(r) => Scalar::Rat(-r),
        }
    }

    /// Field equality; errors if the scalars live in different fields.
    pub fn checked_eq(&self, other: &Scalar) -> Result<bool> {
        self.check(other)?;
        Ok(self == other)
    }
}

// Operator forms panic on field mismatch; use the `checked_*` methods for
// fallible arithmetic on unvalidated inputs.
macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).expect("scalar field mismatch")
            }
        }
    };
}

scalar_binop!(Add, add, checked_add);
scalar_binop!(Sub, sub, checked_sub);
scalar_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod { value, .. } => write!(f, "{value}"),
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue via Fermat's little theorem.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub(crate) fn reduce_bigint(v: &BigInt, p: u64) -> u64 {
    let r = v % BigInt::from(p);
    let r = if r.is_negative() { r + BigInt::from(p) } else { r };
    r.to_u64().expect("residue fits in u64")
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
