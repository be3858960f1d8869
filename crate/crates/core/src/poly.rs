//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are kept in a map from exponent vectors to nonzero coefficients,
//! ordered by graded lexicographic order. That order is also the support
//! order used by echelon forms, which makes reduced bases deterministic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// An exponent vector. Ordered graded-lexicographically: total degree
/// first, then lexicographic on the entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponents(pub Vec<u32>);

impl Exponents {
    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial with exact rational coefficients. Zero coefficients
/// are never stored; every stored exponent vector has length `nvars`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, Scalar>,
}

fn add_term(terms: &mut BTreeMap<Exponents, Scalar>, e: Exponents, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match terms.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Exponents(vec![0; nvars]), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Scalar::one())
    }

    pub fn variable(nvars: usize, var: usize) -> Self {
        assert!(var < nvars);
        let mut e = vec![0; nvars];
        e[var] = 1;
        Poly::monomial(nvars, e, Scalar::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, coeff: Scalar) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Poly::zero(nvars);
        if !coeff.is_zero() {
            p.terms.insert(Exponents(exps), coeff);
        }
        p
    }

    /// Univariate polynomial from ascending dense coefficients.
    pub fn from_coeffs(coeffs: &[Scalar]) -> Self {
        let mut p = Poly::zero(1);
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.terms.insert(Exponents(vec![k as u32]), c.clone());
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.terms
            .get(&Exponents(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Some((exponents, coefficient)) if the polynomial has exactly one term.
    pub fn as_monomial(&self) -> Option<(&Exponents, &Scalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Some(c) if the polynomial is a constant (including zero).
    pub fn constant_value(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.total_degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| e.total_degree()).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e.0[var]).max()
    }

    pub fn min_degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e.0[var]).min()
    }

    fn check_arity(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::MixedVariables {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            add_term(&mut terms, e.clone(), c.clone());
        }
        Ok(Poly {
            nvars: self.nvars,
            terms,
        })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = Exponents(
                    ea.0.iter()
                        .zip(eb.0.iter())
                        .map(|(a, b)| a + b)
                        .collect(),
                );
                add_term(&mut terms, e, ca * cb);
            }
        }
        Ok(Poly {
            nvars: self.nvars,
            terms,
        })
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..exp {
            acc = acc.mul(self).expect("same arity");
        }
        acc
    }

    /// Translate the given center to the origin: substitute
    /// `x_i -> x_i + center[i]` for every variable.
    pub fn shift(&self, center: &[Scalar]) -> Poly {
        assert_eq!(center.len(), self.nvars);
        let mut cur = self.clone();
        for (i, c) in center.iter().enumerate() {
            if !c.is_zero() {
                cur = cur.shift_one(i, c);
            }
        }
        cur
    }

    fn shift_one(&self, var: usize, c: &Scalar) -> Poly {
        let mut terms = BTreeMap::new();
        for (e, coef) in &self.terms {
            let n = e.0[var];
            // (x + c)^n expanded by the binomial theorem
            let mut binom = Scalar::one();
            let mut cpow = c.pow(n as i64);
            for k in 0..=n {
                let mut e2 = e.0.clone();
                e2[var] = k;
                add_term(&mut terms, Exponents(e2), &(coef * &binom) * &cpow);
                if k < n {
                    binom = binom * Scalar::from_int((n - k) as i64)
                        / Scalar::from_int((k + 1) as i64);
                    cpow = cpow / c.clone();
                }
            }
        }
        Poly {
            nvars: self.nvars,
            terms,
        }
    }

    /// Exact division by `x_var^k` (panics if some term has a smaller
    /// exponent in `var`).
    pub fn divide_var_power(&self, var: usize, k: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    assert!(e.0[var] >= k, "inexact variable-power division");
                    let mut e2 = e.0.clone();
                    e2[var] -= k;
                    (Exponents(e2), c.clone())
                })
                .collect(),
        }
    }

    /// Restrict to the hyperplane `x_var = 0` (drop terms with positive
    /// exponent in `var`; the variable slot remains).
    pub fn restrict_var_zero(&self, var: usize) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.0[var] == 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Dense ascending coefficients of a univariate polynomial.
    pub fn coeffs_dense(&self) -> Vec<Scalar> {
        assert_eq!(self.nvars, 1);
        let deg = match self.degree_in(0) {
            Some(d) => d,
            None => return Vec::new(),
        };
        let mut out = vec![Scalar::zero(); deg as usize + 1];
        for (e, c) in &self.terms {
            out[e.0[0] as usize] = c.clone();
        }
        out
    }

    /// Evaluate a univariate polynomial by Horner's rule.
    pub fn eval_univariate(&self, x: &Scalar) -> Scalar {
        assert_eq!(self.nvars, 1);
        let coeffs = self.coeffs_dense();
        let mut acc = Scalar::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Multiplicity of `root` in a nonzero univariate polynomial, together
    /// with the value of the cofactor at the root: `p = (x - root)^k * g`
    /// with `g(root) != 0` returns `(k, g(root))`.
    pub fn root_order(&self, root: &Scalar) -> (u32, Scalar) {
        assert!(!self.is_zero(), "root order of zero polynomial");
        assert_eq!(self.nvars, 1);
        let mut coeffs = self.coeffs_dense();
        let mut order = 0u32;
        loop {
            let mut value = Scalar::zero();
            for c in coeffs.iter().rev() {
                value = &(&value * root) + c;
            }
            if !value.is_zero() {
                return (order, value);
            }
            // synthetic division by (x - root); exact because value == 0
            let deg = coeffs.len() - 1;
            let mut q = vec![Scalar::zero(); deg];
            q[deg - 1] = coeffs[deg].clone();
            for k in (1..deg).rev() {
                q[k - 1] = &coeffs[k] + &(root * &q[k]);
            }
            coeffs = q;
            order += 1;
        }
    }

    /// Leading coefficient of a nonzero univariate polynomial.
    pub fn leading_coeff_univariate(&self) -> Scalar {
        assert_eq!(self.nvars, 1);
        let deg = self.degree_in(0).expect("nonzero polynomial");
        self.coeff(&[deg])
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let ca = c.abs();
            let is_const = e.total_degree() == 0;
            if !ca.is_one() || is_const {
                write!(f, "{ca}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut firstv = true;
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !firstv {
                    write!(f, "*")?;
                }
                firstv = false;
                if self.nvars == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x{}", i + 1)?;
                }
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::variable(1, 0)
    }

    #[test]
    fn grlex_order() {
        let a = Exponents(vec![2, 0]);
        let b = Exponents(vec![1, 1]);
        let c = Exponents(vec![0, 1]);
        assert!(a > b, "same degree falls back to lex");
        assert!(b > c, "degree dominates");
    }

    #[test]
    fn mul_commutes_and_associates() {
        let p = x().add(&Poly::one(1)).unwrap();
        let q = x().mul(&x()).unwrap().sub(&Poly::one(1)).unwrap();
        let r = x().scale(&Scalar::ratio(3, 2));
        let pq = p.mul(&q).unwrap();
        let qp = q.mul(&p).unwrap();
        assert_eq!(pq, qp);
        assert_eq!(
            pq.mul(&r).unwrap(),
            p.mul(&q.mul(&r).unwrap()).unwrap()
        );
    }

    #[test]
    fn shift_round_trip() {
        let p = Poly::monomial(2, vec![2, 1], Scalar::one())
            .add(&Poly::variable(2, 1))
            .unwrap();
        let c = vec![Scalar::ratio(1, 2), Scalar::from_int(-3)];
        let back: Vec<Scalar> = c.iter().map(|v| -v).collect();
        assert_eq!(p.shift(&c).shift(&back), p);
    }

    #[test]
    fn root_order_counts_multiplicity() {
        // (x - 2)^3 * (x + 1)
        let p = x()
            .sub(&Poly::constant(1, Scalar::from_int(2)))
            .unwrap()
            .pow(3)
            .mul(&x().add(&Poly::one(1)).unwrap())
            .unwrap();
        let (ord, unit) = p.root_order(&Scalar::from_int(2));
        assert_eq!(ord, 3);
        assert_eq!(unit, Scalar::from_int(3));
        let (ord0, _) = p.root_order(&Scalar::zero());
        assert_eq!(ord0, 0);
    }

    #[test]
    fn restrict_and_divide() {
        // x1^2*x2 + x1^3
        let p = Poly::monomial(2, vec![2, 1], Scalar::one())
            .add(&Poly::monomial(2, vec![3, 0], Scalar::one()))
            .unwrap();
        let q = p.divide_var_power(0, 2);
        let r = q.restrict_var_zero(0);
        assert_eq!(r, Poly::variable(2, 1));
    }
}
