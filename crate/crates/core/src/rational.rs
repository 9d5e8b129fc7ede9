//! Exact scalars: arbitrary-precision rationals and the extended reals over them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The scalar type used by all exact geometry.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

pub fn zeros(n: usize) -> Vec<Q> {
    vec![Q::zero(); n]
}

/// Exact conversion of a finite float (every finite f64 is a dyadic rational).
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_f64(x).ok_or_else(|| Error::Malformed(format!("non-finite value {x}")))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Parses `"3"`, `"-2/5"` or a decimal such as `"0.125"` / `"1e-9"` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Malformed(format!("bad rational {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Malformed(format!("bad rational {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Malformed(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Q::from_integer(n));
    }
    parse_decimal(s).ok_or_else(|| Error::Malformed(format!("bad number {s:?}")))
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut v = Q::from_integer(num);
    if scale >= 0 {
        v *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        v /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -v } else { v })
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_vec(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn scale_vec(v: &[Q], t: &Q) -> Vec<Q> {
    v.iter().map(|x| x * t).collect()
}

pub fn add_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg_vec(v: &[Q]) -> Vec<Q> {
    v.iter().map(|x| -x).collect()
}

pub fn norm1(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| acc + x.abs())
}

pub fn norm_inf(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Scales a nonzero vector so that its largest entry in absolute value is 1.
pub fn normalize_inf(v: &[Q]) -> Vec<Q> {
    let n = norm_inf(v);
    if n.is_zero() {
        v.to_vec()
    } else {
        v.iter().map(|x| x / &n).collect()
    }
}

/// Scales a nonzero vector to unit 1-norm (the dual norm of the box norm).
pub fn normalize_l1(v: &[Q]) -> Vec<Q> {
    let n = norm1(v);
    if n.is_zero() {
        v.to_vec()
    } else {
        v.iter().map(|x| x / &n).collect()
    }
}

pub fn unit(dim: usize, i: usize) -> Vec<Q> {
    let mut e = zeros(dim);
    e[i] = Q::one();
    e
}

/// An element of the extended rational line `Q ∪ {−∞, +∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtQ {
    NegInf,
    Fin(Q),
    PosInf,
}

impl ExtQ {
    pub fn zero() -> Self {
        ExtQ::Fin(Q::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtQ::Fin(_))
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtQ::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtQ::NegInf => f64::NEG_INFINITY,
            ExtQ::PosInf => f64::INFINITY,
            ExtQ::Fin(v) => to_f64(v),
        }
    }

    /// Multiplication by a positive scalar.
    pub fn scale_pos(&self, t: &Q) -> ExtQ {
        debug_assert!(t.is_positive());
        match self {
            ExtQ::Fin(v) => ExtQ::Fin(v * t),
            other => other.clone(),
        }
    }

    pub fn add_q(&self, t: &Q) -> ExtQ {
        match self {
            ExtQ::Fin(v) => ExtQ::Fin(v + t),
            other => other.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ExtQ::NegInf => "-inf".to_string(),
            ExtQ::PosInf => "+inf".to_string(),
            ExtQ::Fin(v) => fmt_q(v),
        }
    }
}

impl Ord for ExtQ {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtQ::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for ExtQ {
    type Output = ExtQ;
    fn neg(self) -> ExtQ {
        match self {
            ExtQ::NegInf => ExtQ::PosInf,
            ExtQ::PosInf => ExtQ::NegInf,
            ExtQ::Fin(v) => ExtQ::Fin(-v),
        }
    }
}

/// Addition with the inf-addition convention `+∞ + (−∞) = +∞`, which is the
/// one compatible with suprema of sums over empty sets.
impl Add for ExtQ {
    type Output = ExtQ;
    fn add(self, rhs: ExtQ) -> ExtQ {
        use ExtQ::*;
        match (self, rhs) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Fin(a), Fin(b)) => Fin(a + b),
        }
    }
}

impl From<Q> for ExtQ {
    fn from(v: Q) -> Self {
        ExtQ::Fin(v)
    }
}

impl fmt::Display for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
