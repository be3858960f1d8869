//! Exact rational scalars.
//!
//! All coefficient arithmetic in this crate is exact. A [`Scalar`] is a
//! reduced fraction of arbitrary-precision integers; there is no floating
//! point anywhere in the computational kernel. Decimal strings are produced
//! from the fraction by exact integer division and are for display only.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// An exact rational number: reduced numerator/denominator, denominator > 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar(BigRational::from_integer(n))
    }

    /// `num/den` from machine integers. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn new(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Scalar(BigRational::new(num, den)))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Scalar {
        Scalar(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        Scalar(self.0.recip())
    }

    /// Integer power, negative exponents allowed (panics on 0^-k).
    pub fn pow(&self, exp: i64) -> Scalar {
        if exp == 0 {
            return Scalar::one();
        }
        let base = if exp < 0 { self.recip() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Scalar::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn floor_u32(&self) -> Option<u32> {
        use num_traits::ToPrimitive;
        self.floor_int().to_u32()
    }

    pub fn floor_i64(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        self.floor_int().to_i64()
    }

    /// Decimal rendering with `sig` significant digits, derived from the
    /// fraction by exact integer arithmetic (round half away from zero).
    /// Trailing zeros after the decimal point are stripped.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let num = self.0.numer().abs();
        let den = self.0.denom().clone();
        let ten = BigInt::from(10);
        let int_part = &num / &den;
        let int_digits = if int_part.is_zero() {
            0
        } else {
            int_part.to_string().len()
        };
        let (scaled, dap) = if int_digits >= sig {
            // more integer digits than significant digits: round and pad
            let shift = (int_digits - sig) as u32;
            let d = &den * ten.pow(shift);
            (round_div(&num, &d) * ten.pow(shift), 0usize)
        } else if int_digits > 0 {
            let dap = sig - int_digits;
            (round_div(&(&num * ten.pow(dap as u32)), &den), dap)
        } else {
            // count leading zeros after the point before the first digit
            let mut z = 0u32;
            let mut t = num.clone();
            while t < den {
                t *= 10;
                z += 1;
            }
            let dap = (z as usize - 1) + sig;
            (round_div(&(&num * ten.pow(dap as u32)), &den), dap)
        };
        let mut digits = scaled.to_string();
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if dap == 0 {
            out.push_str(&digits);
            return out;
        }
        if digits.len() <= dap {
            let pad = dap - digits.len();
            out.push_str("0.");
            for _ in 0..pad {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
            if out.ends_with('.') {
                out.pop();
            }
            if out == "-" || out.is_empty() {
                return "0".to_string();
            }
            return out;
        }
        let point = digits.len() - dap;
        let frac = digits.split_off(point);
        out.push_str(&digits);
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out
    }
}

/// round(n/d) for positive n, d; half away from zero.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    (n * 2 + d) / (d * 2)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = num
            .parse()
            .map_err(|_| format!("invalid integer `{num}`"))?;
        let d: BigInt = den
            .parse()
            .map_err(|_| format!("invalid integer `{den}`"))?;
        Scalar::new(n, d).ok_or_else(|| "zero denominator".to_string())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                Scalar(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero");
        Scalar(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero");
        Scalar(&self.0 / &rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut a, b| {
            a += b;
            a
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(2, 7);
        let c = &(&a + &b) - &b;
        assert_eq!(a, c);
        assert_eq!(Scalar::ratio(2, 4), Scalar::ratio(1, 2));
    }

    #[test]
    fn parse_and_display() {
        let a: Scalar = "-3/4".parse().unwrap();
        assert_eq!(a, Scalar::ratio(-3, 4));
        assert_eq!(a.to_string(), "-3/4");
        let b: Scalar = "5".parse().unwrap();
        assert_eq!(b.to_string(), "5");
        assert!("1/0".parse::<Scalar>().is_err());
    }

    #[test]
    fn floor() {
        assert_eq!(Scalar::ratio(7, 2).floor_int(), BigInt::from(3));
        assert_eq!(Scalar::ratio(-1, 2).floor_int(), BigInt::from(-1));
        assert_eq!(Scalar::from_int(4).floor_int(), BigInt::from(4));
    }

    #[test]
    fn pow_handles_negative_exponents() {
        assert_eq!(Scalar::ratio(2, 3).pow(-2), Scalar::ratio(9, 4));
        assert_eq!(Scalar::ratio(2, 3).pow(0), Scalar::one());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Scalar::ratio(1, 2).to_decimal(12), "0.5");
        assert_eq!(Scalar::ratio(1, 3).to_decimal(12), "0.333333333333");
        assert_eq!(Scalar::ratio(2, 3).to_decimal(12), "0.666666666667");
        assert_eq!(Scalar::ratio(-1, 8).to_decimal(12), "-0.125");
        assert_eq!(Scalar::from_int(0).to_decimal(12), "0");
        assert_eq!(Scalar::ratio(1722, 1600).to_decimal(12), "1.07625");
        assert_eq!(Scalar::ratio(1, 1000).to_decimal(3), "0.001");
        assert_eq!(Scalar::from_int(123).to_decimal(2), "120");
    }
}
