//! Reduced echelon bases of finite-dimensional spaces of rational functions.
//!
//! Elements are rewritten over the factor-wise least common denominator and
//! their numerators are row-reduced against the graded-lexicographic support
//! order. The reduced row echelon form is unique for a given row space and
//! column order, so a [`Basis`] is a canonical representation of the spanned
//! space: two spans are equal iff their `Basis` values are equal.

use crate::error::{Error, Result};
use crate::poly::{Exponents, Poly};
use crate::ratfun::{Denominator, RationalFunction};
use crate::scalar::Scalar;
use std::collections::BTreeSet;

/// A canonical basis of a finite-dimensional subspace of the function field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    nvars: usize,
    support: Vec<Exponents>,
    den: Denominator,
    rows: Vec<Vec<Scalar>>,
}

impl Basis {
    pub fn empty(nvars: usize) -> Self {
        Basis {
            nvars,
            support: Vec::new(),
            den: Denominator::one(),
            rows: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn support(&self) -> &[Exponents] {
        &self.support
    }

    pub fn den(&self) -> &Denominator {
        &self.den
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    /// Reconstruct the i-th basis element as a rational function.
    pub fn element(&self, i: usize) -> RationalFunction {
        let mut num = Poly::zero(self.nvars);
        for (j, c) in self.rows[i].iter().enumerate() {
            if !c.is_zero() {
                num = num
                    .add(&Poly::monomial(
                        self.nvars,
                        self.support[j].0.clone(),
                        c.clone(),
                    ))
                    .expect("same arity");
            }
        }
        RationalFunction::new(num, self.den.clone())
    }

    pub fn elements(&self) -> Vec<RationalFunction> {
        (0..self.dimension()).map(|i| self.element(i)).collect()
    }

    /// Basis whose elements are single monomials over a shared denominator.
    /// The supports must be pairwise distinct; the resulting identity rows
    /// are already the reduced echelon form.
    pub(crate) fn from_monomial_supports(
        nvars: usize,
        mut supports: Vec<Exponents>,
        den: Denominator,
    ) -> Basis {
        supports.sort();
        supports.dedup();
        let n = supports.len();
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![Scalar::zero(); n];
                row[i] = Scalar::one();
                row
            })
            .collect();
        Basis {
            nvars,
            support: supports,
            den,
            rows,
        }
    }

    /// Membership test: is `f` in the span of this basis?
    pub fn contains(&self, f: &RationalFunction) -> Result<bool> {
        if f.is_zero() {
            return Ok(true);
        }
        let mut elems = self.elements();
        elems.push(f.clone());
        let extended = echelonize(&elems)?;
        Ok(extended.dimension() == self.dimension())
    }
}

/// Deterministic reduced row echelon form in place. Returns the pivot
/// columns; zero rows are removed.
pub(crate) fn rref_in_place(mat: &mut Vec<Vec<Scalar>>) -> Vec<usize> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pr);
        if !mat[rank][col].is_one() {
            let inv = mat[rank][col].recip();
            for j in col..cols {
                if !mat[rank][j].is_zero() {
                    mat[rank][j] = &mat[rank][j] * &inv;
                }
            }
        }
        for r in 0..rows {
            if r == rank || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for j in col..cols {
                if mat[rank][j].is_zero() {
                    continue;
                }
                let t = &mat[rank][j] * &factor;
                mat[r][j] = &mat[r][j] - &t;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    mat.truncate(rank);
    pivots
}

/// Reduce a list of elements (possibly dependent, possibly containing
/// zeros) to a canonical basis of their span. All elements must share one
/// variable set; denominators are merged factor-wise.
pub fn echelonize(elements: &[RationalFunction]) -> Result<Basis> {
    let nonzero: Vec<&RationalFunction> = elements.iter().filter(|e| !e.is_zero()).collect();
    let Some(first) = nonzero.first() else {
        let nvars = elements.first().map(|e| e.nvars()).unwrap_or(0);
        return Ok(Basis::empty(nvars));
    };
    let nvars = first.nvars();
    for e in &nonzero {
        if e.nvars() != nvars {
            return Err(Error::MixedVariables {
                expected: nvars,
                found: e.nvars(),
            });
        }
    }
    let den = nonzero
        .iter()
        .fold(Denominator::one(), |acc, e| acc.lcm(e.den()));
    let numerators: Vec<Poly> = nonzero
        .iter()
        .map(|e| e.numerator_over(&den))
        .collect::<Result<_>>()?;
    let mut support: BTreeSet<Exponents> = BTreeSet::new();
    for n in &numerators {
        for (e, _) in n.terms() {
            support.insert(e.clone());
        }
    }
    let support: Vec<Exponents> = support.into_iter().collect();
    let col_of: std::collections::BTreeMap<&Exponents, usize> =
        support.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut mat: Vec<Vec<Scalar>> = numerators
        .iter()
        .map(|n| {
            let mut row = vec![Scalar::zero(); support.len()];
            for (e, c) in n.terms() {
                row[col_of[e]] = c.clone();
            }
            row
        })
        .collect();
    rref_in_place(&mut mat);
    Ok(Basis {
        nvars,
        support,
        den,
        rows: mat,
    })
}

/// Canonical basis of `span{ f * g : f in a, g in b }`.
pub fn product_space(a: &Basis, b: &Basis) -> Result<Basis> {
    if a.dimension() == 0 || b.dimension() == 0 {
        return Ok(Basis::empty(a.nvars().max(b.nvars())));
    }
    if a.nvars() != b.nvars() {
        return Err(Error::MixedVariables {
            expected: a.nvars(),
            found: b.nvars(),
        });
    }
    let ea = a.elements();
    let eb = b.elements();
    let mut products: BTreeSet<RationalFunction> = BTreeSet::new();
    for f in &ea {
        for g in &eb {
            products.insert(f.mul(g)?);
        }
    }
    let products: Vec<RationalFunction> = products.into_iter().collect();
    echelonize(&products)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::DenFactor;

    fn x() -> Poly {
        Poly::variable(1, 0)
    }

    fn pf(p: Poly) -> RationalFunction {
        RationalFunction::from_poly(p)
    }

    #[test]
    fn echelon_of_triangular_set() {
        // {1 + x, x + x^2, x^2} spans a 3-dimensional space with pivots on
        // the supports 1, x, x^2.
        let elems = vec![
            pf(Poly::one(1).add(&x()).unwrap()),
            pf(x().add(&x().pow(2)).unwrap()),
            pf(x().pow(2)),
        ];
        let b = echelonize(&elems).unwrap();
        assert_eq!(b.dimension(), 3);
        assert_eq!(
            b.support(),
            &[
                Exponents(vec![0]),
                Exponents(vec![1]),
                Exponents(vec![2])
            ]
        );
        // reduced rows are the identity here
        for (i, row) in b.rows().iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                assert_eq!(c.is_one(), i == j);
            }
        }
    }

    #[test]
    fn scalar_dependence_collapses() {
        let elems = vec![pf(x()), pf(x().scale(&Scalar::from_int(2)))];
        assert_eq!(echelonize(&elems).unwrap().dimension(), 1);
    }

    #[test]
    fn empty_span() {
        assert_eq!(echelonize(&[]).unwrap().dimension(), 0);
        let z = RationalFunction::zero(1);
        assert_eq!(echelonize(&[z]).unwrap().dimension(), 0);
    }

    #[test]
    fn product_of_polynomial_lines() {
        // span{1, x} * span{1, x} = span{1, x, x^2}
        let a = echelonize(&[pf(Poly::one(1)), pf(x())]).unwrap();
        let p = product_space(&a, &a).unwrap();
        assert_eq!(p.dimension(), 3);
    }

    #[test]
    fn product_with_poles() {
        // span{1/x, 1} squared has dimension 3: 1/x^2, 1/x, 1
        let inv_x = RationalFunction::new(
            Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::zero()), 1),
        );
        let a = echelonize(&[inv_x, pf(Poly::one(1))]).unwrap();
        assert_eq!(a.dimension(), 2);
        let p = product_space(&a, &a).unwrap();
        assert_eq!(p.dimension(), 3);
    }

    #[test]
    fn product_with_constants_is_identity() {
        let a = echelonize(&[pf(Poly::one(1).add(&x()).unwrap()), pf(x().pow(3))]).unwrap();
        let one = echelonize(&[pf(Poly::one(1))]).unwrap();
        let p = product_space(&a, &one).unwrap();
        assert_eq!(p, a);
        let q = product_space(&one, &a).unwrap();
        assert_eq!(q, a);
    }

    #[test]
    fn mixed_variable_sets_rejected() {
        let a = pf(Poly::one(1));
        let b = RationalFunction::from_poly(Poly::variable(2, 1));
        assert!(matches!(
            echelonize(&[a, b]),
            Err(crate::error::Error::MixedVariables { .. })
        ));
    }

    #[test]
    fn membership() {
        let b = echelonize(&[pf(Poly::one(1)), pf(x().pow(2))]).unwrap();
        assert!(b
            .contains(&pf(Poly::one(1)
                .add(&x().pow(2).scale(&Scalar::from_int(-7)))
                .unwrap()))
            .unwrap());
        assert!(!b.contains(&pf(x())).unwrap());
    }

    #[test]
    fn monomial_basis_matches_echelon_route() {
        let den = Denominator::from_factor(DenFactor::Linear(Scalar::one()), 2);
        let sup = vec![
            Exponents(vec![0]),
            Exponents(vec![1]),
            Exponents(vec![2]),
        ];
        let direct = Basis::from_monomial_supports(1, sup, den.clone());
        let via = echelonize(&direct.elements()).unwrap();
        assert_eq!(direct, via);
    }
}
