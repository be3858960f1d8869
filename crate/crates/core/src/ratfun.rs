//! Rational functions with declared denominator factorizations.
//!
//! Denominators are never stored expanded: they are products of declared
//! irreducible factors, each either a single variable or a monic linear
//! univariate `x - root`. This covers every model shipped by this crate and
//! avoids general multivariate gcd. The zero element is represented only as
//! numerator 0 over denominator 1.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// A declared irreducible denominator factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DenFactor {
    /// The coordinate `x_i`.
    Var(usize),
    /// The monic linear univariate `x - root`.
    Linear(Scalar),
}

impl DenFactor {
    pub fn to_poly(&self, nvars: usize) -> Poly {
        match self {
            DenFactor::Var(i) => Poly::variable(nvars, *i),
            DenFactor::Linear(root) => {
                assert_eq!(nvars, 1, "linear factors are univariate");
                Poly::variable(1, 0)
                    .sub(&Poly::constant(1, root.clone()))
                    .expect("same arity")
            }
        }
    }
}

/// A factored denominator: a product of declared factors with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Denominator {
    factors: BTreeMap<DenFactor, u32>,
}

impl Denominator {
    pub fn one() -> Self {
        Denominator::default()
    }

    pub fn from_factor(factor: DenFactor, mult: u32) -> Self {
        let mut d = Denominator::one();
        if mult > 0 {
            d.factors.insert(factor, mult);
        }
        d
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (DenFactor, u32)>) -> Self {
        let mut d = Denominator::one();
        for (f, m) in factors {
            if m > 0 {
                *d.factors.entry(f).or_insert(0) += m;
            }
        }
        d
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&DenFactor, u32)> {
        self.factors.iter().map(|(f, &m)| (f, m))
    }

    pub fn mul(&self, other: &Denominator) -> Denominator {
        let mut out = self.clone();
        for (f, m) in &other.factors {
            *out.factors.entry(f.clone()).or_insert(0) += m;
        }
        out
    }

    /// Factor-wise maximum of multiplicities.
    pub fn lcm(&self, other: &Denominator) -> Denominator {
        let mut out = self.clone();
        for (f, m) in &other.factors {
            let e = out.factors.entry(f.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        out
    }

    /// `self / sub` if `sub` divides `self` factor-wise.
    pub fn quotient(&self, sub: &Denominator) -> Option<Denominator> {
        let mut out = self.clone();
        for (f, m) in &sub.factors {
            let e = out.factors.get_mut(f)?;
            if *e < *m {
                return None;
            }
            *e -= m;
            if *e == 0 {
                out.factors.remove(f);
            }
        }
        Some(out)
    }

    /// Total degree of the expanded denominator (all factors have degree 1).
    pub fn degree(&self) -> u64 {
        self.factors.values().map(|&m| m as u64).sum()
    }

    /// Multiplicity of the coordinate factor `x_i`.
    pub fn var_multiplicity(&self, var: usize) -> u32 {
        self.factors
            .get(&DenFactor::Var(var))
            .copied()
            .unwrap_or(0)
    }

    /// Multiplicity of the point `root` among univariate factors: counts
    /// `Linear(root)` and, when `root == 0`, the factor `Var(0)`.
    pub fn multiplicity_at_root(&self, root: &Scalar) -> u32 {
        let mut m = self
            .factors
            .get(&DenFactor::Linear(root.clone()))
            .copied()
            .unwrap_or(0);
        if root.is_zero() {
            m += self.var_multiplicity(0);
        }
        m
    }

    /// Value at `root` of the product of all factors not vanishing there.
    /// Used as the denominator's unit part in local expansions.
    pub fn cofactor_value_at(&self, root: &Scalar) -> Scalar {
        let mut v = Scalar::one();
        for (f, m) in &self.factors {
            let fv = match f {
                DenFactor::Linear(r) => root - r,
                DenFactor::Var(0) => root.clone(),
                DenFactor::Var(_) => panic!("univariate context"),
            };
            if fv.is_zero() {
                continue;
            }
            v = v * fv.pow(*m as i64);
        }
        v
    }

    /// Expand the product of factors into a polynomial.
    pub fn expand(&self, nvars: usize) -> Poly {
        let mut p = Poly::one(nvars);
        for (f, m) in &self.factors {
            let fp = f.to_poly(nvars);
            for _ in 0..*m {
                p = p.mul(&fp).expect("same arity");
            }
        }
        p
    }
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (fac, m) in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match fac {
                DenFactor::Var(i) => write!(f, "x{}", i + 1)?,
                DenFactor::Linear(r) => {
                    if r.is_zero() {
                        write!(f, "x")?;
                    } else if r.is_negative() {
                        write!(f, "(x+{})", r.abs())?;
                    } else {
                        write!(f, "(x-{r})")?;
                    }
                }
            }
            if *m > 1 {
                write!(f, "^{m}")?;
            }
        }
        Ok(())
    }
}

/// An element of the function field: a polynomial numerator over a declared
/// factored denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Denominator,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Denominator) -> Self {
        if num.is_zero() {
            RationalFunction {
                num,
                den: Denominator::one(),
            }
        } else {
            RationalFunction { num, den }
        }
    }

    pub fn from_poly(num: Poly) -> Self {
        RationalFunction::new(num, Denominator::one())
    }

    pub fn zero(nvars: usize) -> Self {
        RationalFunction::from_poly(Poly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        RationalFunction::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        RationalFunction::from_poly(Poly::constant(nvars, c))
    }

    /// A Laurent monomial `x^e` with possibly negative exponents: negative
    /// parts go into the denominator as variable factors.
    pub fn laurent_monomial(nvars: usize, exps: &[i64]) -> Self {
        assert_eq!(exps.len(), nvars);
        let pos: Vec<u32> = exps.iter().map(|&e| e.max(0) as u32).collect();
        let den = Denominator::from_factors(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e < 0)
                .map(|(i, &e)| (DenFactor::Var(i), (-e) as u32)),
        );
        RationalFunction::new(Poly::monomial(nvars, pos, Scalar::one()), den)
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Denominator {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn check_arity(&self, other: &RationalFunction) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::MixedVariables {
                expected: self.nvars(),
                found: other.nvars(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check_arity(other)?;
        Ok(RationalFunction::new(
            self.num.mul(&other.num)?,
            self.den.mul(&other.den),
        ))
    }

    pub fn add(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check_arity(other)?;
        let den = self.den.lcm(&other.den);
        let a = self.numerator_over(&den)?;
        let b = other.numerator_over(&den)?;
        Ok(RationalFunction::new(a.add(&b)?, den))
    }

    pub fn sub(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, s: &Scalar) -> RationalFunction {
        RationalFunction::new(self.num.scale(s), self.den.clone())
    }

    pub fn pow(&self, exp: u32) -> RationalFunction {
        let mut acc = RationalFunction::one(self.nvars());
        for _ in 0..exp {
            acc = acc.mul(self).expect("same arity");
        }
        acc
    }

    /// Numerator after rewriting the element over a denominator shape that
    /// the declared denominator divides.
    pub fn numerator_over(&self, target: &Denominator) -> Result<Poly> {
        let extra = target.quotient(&self.den).ok_or_else(|| {
            Error::Internal(format!(
                "denominator {} does not divide target {}",
                self.den, target
            ))
        })?;
        if extra.is_one() {
            Ok(self.num.clone())
        } else {
            self.num.mul(&extra.expand(self.nvars()))
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / {}", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_normalizes_denominator() {
        let den = Denominator::from_factor(DenFactor::Linear(Scalar::from_int(1)), 2);
        let z = RationalFunction::new(Poly::zero(1), den);
        assert!(z.is_zero());
        assert!(z.den().is_one());
    }

    #[test]
    fn denominator_expansion_matches_factors() {
        let den = Denominator::from_factors([
            (DenFactor::Linear(Scalar::from_int(1)), 2),
            (DenFactor::Linear(Scalar::from_int(2)), 1),
        ]);
        let p = den.expand(1);
        // (x-1)^2 (x-2) = x^3 - 4x^2 + 5x - 2
        assert_eq!(
            p.coeffs_dense(),
            vec![
                Scalar::from_int(-2),
                Scalar::from_int(5),
                Scalar::from_int(-4),
                Scalar::from_int(1)
            ]
        );
        assert_eq!(den.degree(), 3);
    }

    #[test]
    fn add_over_common_denominator() {
        // 1/x + 1/(x-1) = (2x - 1) / (x(x-1))
        let a = RationalFunction::new(
            Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::zero()), 1),
        );
        let b = RationalFunction::new(
            Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::one()), 1),
        );
        let s = a.add(&b).unwrap();
        assert_eq!(s.den().degree(), 2);
        assert_eq!(
            s.num().coeffs_dense(),
            vec![Scalar::from_int(-1), Scalar::from_int(2)]
        );
    }

    #[test]
    fn laurent_monomials_split_signs() {
        let m = RationalFunction::laurent_monomial(2, &[3, -2]);
        assert_eq!(m.num().degree_in(0), Some(3));
        assert_eq!(m.den().var_multiplicity(1), 2);
    }
}
