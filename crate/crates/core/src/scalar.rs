//! Exact arithmetic in the biquadratic field Q(sqrt 2, sqrt 3), plus a tagged
//! scalar that falls back to `f64` for values outside the field.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `a + b*sqrt2 + c*sqrt3 + d*sqrt6` with rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AlgScalar {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (x, y) if x == y => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

fn sqrt_bounds(n: u32, bits: u64) -> (Rational, Rational) {
    let scale = BigInt::one() << bits;
    let lo = (BigInt::from(n) * &scale * &scale).sqrt();
    let hi = &lo + BigInt::one();
    (
        Rational::new(lo, scale.clone()),
        Rational::new(hi, scale),
    )
}

fn mul_interval(k: &Rational, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    if k.is_negative() {
        (k * hi, k * lo)
    } else {
        (k * lo, k * hi)
    }
}

impl AlgScalar {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        AlgScalar { a, b, c, d }
    }

    pub fn from_rational(q: Rational) -> Self {
        AlgScalar::new(q, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn sqrt2() -> Self {
        AlgScalar::new(rat(0), rat(1), rat(0), rat(0))
    }

    pub fn sqrt3() -> Self {
        AlgScalar::new(rat(0), rat(0), rat(1), rat(0))
    }

    pub fn sqrt6() -> Self {
        AlgScalar::new(rat(0), rat(0), rat(0), rat(1))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn coords(&self) -> [&Rational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    /// The integer value when the element is a rational integer.
    pub fn is_integer(&self) -> Option<BigInt> {
        if self.is_rational() && self.a.is_integer() {
            Some(self.a.to_integer())
        } else {
            None
        }
    }

    fn conj2(&self) -> Self {
        AlgScalar::new(self.a.clone(), -&self.b, self.c.clone(), -&self.d)
    }

    fn conj3(&self) -> Self {
        AlgScalar::new(self.a.clone(), self.b.clone(), -&self.c, -&self.d)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        AlgScalar::new(&self.a * k, &self.b * k, &self.c * k, &self.d * k)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // x * conj3(x) lies in Q(sqrt2); multiplying by its conj2 lands in Q.
        let y = self * &self.conj3();
        let norm = &y * &y.conj2();
        let n = norm.a.clone();
        let num = &self.conj3() * &y.conj2();
        Ok(num.scale(&n.recip()))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    /// Rational interval containing the value, with endpoints within about `2^-bits`.
    pub fn interval(&self, bits: u64) -> (Rational, Rational) {
        let (l2, h2) = sqrt_bounds(2, bits);
        let (l3, h3) = sqrt_bounds(3, bits);
        let (l6, h6) = sqrt_bounds(6, bits);
        let (b0, b1) = mul_interval(&self.b, &l2, &h2);
        let (c0, c1) = mul_interval(&self.c, &l3, &h3);
        let (d0, d1) = mul_interval(&self.d, &l6, &h6);
        (&self.a + b0 + c0 + d0, &self.a + b1 + c1 + d1)
    }

    pub fn sign(&self) -> Sign {
        if self.is_zero() {
            return Sign::Zero;
        }
        if self.is_rational() {
            return if self.a.is_positive() { Sign::Positive } else { Sign::Negative };
        }
        // sqrt2, sqrt3, sqrt6 are linearly independent over Q, so a nonzero
        // element is a nonzero real and refinement terminates.
        let mut bits = 32;
        loop {
            let (lo, hi) = self.interval(bits);
            if lo.is_positive() {
                return Sign::Positive;
            }
            if hi.is_negative() {
                return Sign::Negative;
            }
            bits *= 2;
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        let mut bits = 32;
        loop {
            let (lo, hi) = self.interval(bits);
            let fl = lo.floor().to_integer();
            if fl == hi.floor().to_integer() {
                return fl;
            }
            bits *= 2;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn to_f64(&self) -> f64 {
        let f = |q: &Rational| q.to_f64().unwrap_or(f64::NAN);
        f(&self.a)
            + f(&self.b) * std::f64::consts::SQRT_2
            + f(&self.c) * 3f64.sqrt()
            + f(&self.d) * 6f64.sqrt()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = AlgScalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact square root of a nonnegative rational, when it lies in the field.
    pub fn sqrt_rational(q: &Rational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(AlgScalar::zero());
        }
        let n = q.numer() * q.denom();
        let m = q.denom().clone();
        for f in [1u32, 2, 3, 6] {
            let fb = BigInt::from(f);
            if !n.is_multiple_of(&fb) {
                continue;
            }
            let s = &n / &fb;
            let r = s.sqrt();
            if &r * &r == s {
                let k = Rational::new(r, m.clone());
                let z = Rational::zero();
                return Some(match f {
                    1 => AlgScalar::new(k, z.clone(), z.clone(), z),
                    2 => AlgScalar::new(z.clone(), k, z.clone(), z),
                    3 => AlgScalar::new(z.clone(), z.clone(), k, z),
                    _ => AlgScalar::new(z.clone(), z.clone(), z, k),
                });
            }
        }
        None
    }
}

impl fmt::Display for AlgScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        let mut parts = Vec::new();
        for (q, unit) in [(&self.a, ""), (&self.b, "√2"), (&self.c, "√3"), (&self.d, "√6")] {
            if q.is_zero() {
                continue;
            }
            let s = if unit.is_empty() {
                q.to_string()
            } else if q.is_one() {
                unit.to_string()
            } else if *q == -Rational::one() {
                format!("-{unit}")
            } else {
                format!("{q}{unit}")
            };
            parts.push(s);
        }
        let mut out = parts.join("+");
        out = out.replace("+-", "-");
        write!(f, "{out}")
    }
}

impl Add for &AlgScalar {
    type Output = AlgScalar;
    fn add(self, r: &AlgScalar) -> AlgScalar {
        AlgScalar::new(&self.a + &r.a, &self.b + &r.b, &self.c + &r.c, &self.d + &r.d)
    }
}

impl Sub for &AlgScalar {
    type Output = AlgScalar;
    fn sub(self, r: &AlgScalar) -> AlgScalar {
        AlgScalar::new(&self.a - &r.a, &self.b - &r.b, &self.c - &r.c, &self.d - &r.d)
    }
}

impl Neg for &AlgScalar {
    type Output = AlgScalar;
    fn neg(self) -> AlgScalar {
        AlgScalar::new(-&self.a, -&self.b, -&self.c, -&self.d)
    }
}

impl Mul for &AlgScalar {
    type Output = AlgScalar;
    fn mul(self, r: &AlgScalar) -> AlgScalar {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&r.a, &r.b, &r.c, &r.d);
        let two = rat(2);
        let three = rat(3);
        let six = rat(6);
        AlgScalar::new(
            a * e + &two * b * f + &three * c * g + &six * d * h,
            a * f + b * e + &three * (c * h + d * g),
            a * g + c * e + &two * (b * h + d * f),
            a * h + d * e + b * g + c * f,
        )
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $m(self, r: $t) -> $t {
                (&self).$m(&r)
            }
        }
    };
}

forward_owned!(AlgScalar, Add, add);
forward_owned!(AlgScalar, Sub, sub);
forward_owned!(AlgScalar, Mul, mul);

impl Neg for AlgScalar {
    type Output = AlgScalar;
    fn neg(self) -> AlgScalar {
        -&self
    }
}

/// Tolerance used when comparing `Approx` values.
pub const APPROX_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Debug)]
pub enum Scalar {
    Exact(AlgScalar),
    Approx(f64),
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Exact(AlgScalar::from_int(n))
    }

    pub fn rational(q: Rational) -> Scalar {
        Scalar::Exact(AlgScalar::from_rational(q))
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn exact(&self) -> Option<&AlgScalar> {
        match self {
            Scalar::Exact(x) => Some(x),
            Scalar::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(x) => x.to_f64(),
            Scalar::Approx(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(x) => x.is_zero(),
            Scalar::Approx(v) => *v == 0.0,
        }
    }

    /// Exact sign for `Exact`; for `Approx`, `None` when within tolerance of zero.
    pub fn sign(&self) -> Option<Sign> {
        match self {
            Scalar::Exact(x) => Some(x.sign()),
            Scalar::Approx(v) => {
                if v.abs() <= APPROX_TOL * (1.0 + v.abs()) {
                    if *v == 0.0 {
                        Some(Sign::Zero)
                    } else {
                        None
                    }
                } else if *v > 0.0 {
                    Some(Sign::Positive)
                } else {
                    Some(Sign::Negative)
                }
            }
        }
    }

    pub fn is_integer(&self) -> Result<Option<BigInt>> {
        match self {
            Scalar::Exact(x) => Ok(x.is_integer()),
            Scalar::Approx(_) => Err(Error::ApproxData),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(x) => Ok(Scalar::Exact(x.inv()?)),
            Scalar::Approx(v) => {
                if *v == 0.0 {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::Approx(1.0 / v))
                }
            }
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self * &rhs.inv()?)
    }

    /// Equality: exact for two `Exact` values, relative tolerance otherwise.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            _ => {
                let (x, y) = (self.to_f64(), other.to_f64());
                (x - y).abs() <= APPROX_TOL * (1.0 + x.abs().max(y.abs()))
            }
        }
    }

    /// Square root of a nonnegative value; exact when the radicand is a
    /// rational whose root lies in the field.
    pub fn sqrt(&self) -> Scalar {
        if let Scalar::Exact(x) = self {
            if let Some(q) = x.as_rational() {
                if let Some(r) = AlgScalar::sqrt_rational(q) {
                    return Scalar::Exact(r);
                }
            }
        }
        Scalar::Approx(self.to_f64().sqrt())
    }
}

impl From<AlgScalar> for Scalar {
    fn from(x: AlgScalar) -> Scalar {
        Scalar::Exact(x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(x) => write!(f, "{x}"),
            Scalar::Approx(v) => write!(f, "~{v}"),
        }
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for &Scalar {
            type Output = Scalar;
            fn $m(self, r: &Scalar) -> Scalar {
                match (self, r) {
                    (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(x.$m(y)),
                    _ => Scalar::Approx(self.to_f64().$m(r.to_f64())),
                }
            }
        }
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, r: Scalar) -> Scalar {
                (&self).$m(&r)
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(-x),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// The canonical Cartan entry `-2cos(pi/m)`; `None` stands for the label infinity.
pub fn make_cos_entry(m: Option<u32>) -> Result<Scalar> {
    let m = m.ok_or(Error::InfiniteLabel)?;
    Ok(match m {
        2 => Scalar::zero(),
        3 => Scalar::int(-1),
        4 => Scalar::Exact(-AlgScalar::sqrt2()),
        6 => Scalar::Exact(-AlgScalar::sqrt3()),
        _ => Scalar::Approx(-2.0 * (std::f64::consts::PI / m as f64).cos()),
    })
}

/// `4cos^2(pi/m)` as an exact integer for crystallographic labels.
pub fn cos_square_times_four(m: u32) -> Option<i64> {
    match m {
        2 => Some(0),
        3 => Some(1),
        4 => Some(2),
        6 => Some(3),
        _ => None,
    }
}

fn parse_rational(t: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{t}`"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

impl std::str::FromStr for AlgScalar {
    type Err = Error;

    /// Accepts the `Display` form, e.g. `-1/2+3√2-√6`; `sqrt2` may stand for `√2`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.replace("sqrt", "√").chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut out = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, term.strip_prefix('+').unwrap_or(&term)),
            };
            let (coef, slot) = match body.split_once('√') {
                Some((c, unit)) => {
                    let slot = match unit {
                        "2" => 1,
                        "3" => 2,
                        "6" => 3,
                        _ => return Err(Error::Parse(format!("unknown radical in `{s}`"))),
                    };
                    (if c.is_empty() { Rational::one() } else { parse_rational(c)? }, slot)
                }
                None => (parse_rational(body)?, 0),
            };
            out[slot] += if neg { -coef } else { coef };
        }
        let [a, b, c, d] = out;
        Ok(AlgScalar::new(a, b, c, d))
    }
}

impl std::str::FromStr for Scalar {
    type Err = Error;

    /// `Display` form: exact values as for `AlgScalar`, approximations as `~x`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_prefix('~') {
            Some(v) => v.parse::<f64>().map(Scalar::Approx).map_err(|_| Error::Parse(format!("bad float `{v}`"))),
            None => Ok(Scalar::Exact(s.parse()?)),
        }
    }
}
