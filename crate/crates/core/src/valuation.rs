//! Flag multivaluations on the shipped geometric models.
//!
//! A flag is either a point of the projective line (including infinity) or a
//! coordinate flag on affine d-space: an ordering of the coordinates with a
//! rational center. The valuation of an element is computed inductively:
//! translate the center to the origin, extract the lowest power of the
//! current flag variable, divide it out exactly, restrict to its zero locus,
//! and continue. For fractions the valuation is taken on numerator and
//! denominator separately and subtracted; denominator factors are handled
//! through their declared factorization, never by expansion.

use crate::basis::{rref_in_place, Basis};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ratfun::RationalFunction;
use crate::scalar::Scalar;
use std::fmt;

/// A point of the projective line over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveLocus {
    Finite(Scalar),
    Infinity,
}

impl fmt::Display for CurveLocus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveLocus::Finite(q) => write!(f, "{q}"),
            CurveLocus::Infinity => write!(f, "inf"),
        }
    }
}

/// An admissible flag on one of the fixed models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flag {
    /// A point of the projective line (univariate models).
    CurvePoint(CurveLocus),
    /// A full coordinate flag: iterate the variables in `order` (a
    /// permutation of all coordinates), vanishing orders taken after
    /// translating `center` to the origin.
    Coordinate { order: Vec<usize>, center: Vec<Scalar> },
}

impl Flag {
    pub fn at_point(q: Scalar) -> Flag {
        Flag::CurvePoint(CurveLocus::Finite(q))
    }

    pub fn at_infinity() -> Flag {
        Flag::CurvePoint(CurveLocus::Infinity)
    }

    pub fn coordinate_origin(nvars: usize) -> Flag {
        Flag::Coordinate {
            order: (0..nvars).collect(),
            center: vec![Scalar::zero(); nvars],
        }
    }

    /// Length of the valuation vectors this flag produces.
    pub fn dim(&self) -> usize {
        match self {
            Flag::CurvePoint(_) => 1,
            Flag::Coordinate { order, .. } => order.len(),
        }
    }

    /// Structural checks: arity match and, for coordinate flags, that
    /// `order` is a permutation of the variables.
    pub fn validate_for(&self, nvars: usize) -> Result<()> {
        match self {
            Flag::CurvePoint(_) => {
                if nvars != 1 {
                    return Err(Error::FlagInapplicable(format!(
                        "curve point flag on a {nvars}-variable model"
                    )));
                }
            }
            Flag::Coordinate { order, center } => {
                if order.len() != nvars || center.len() != nvars {
                    return Err(Error::FlagInapplicable(format!(
                        "coordinate flag arity {} on a {nvars}-variable model",
                        order.len()
                    )));
                }
                let mut seen = vec![false; nvars];
                for &v in order {
                    if v >= nvars || seen[v] {
                        return Err(Error::FlagInapplicable(
                            "variable order is not a permutation".to_string(),
                        ));
                    }
                    seen[v] = true;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::CurvePoint(l) => write!(f, "point({l})"),
            Flag::Coordinate { order, center } => {
                write!(f, "coordinate([")?;
                for (i, c) in center.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")?;
                if order.iter().enumerate().any(|(i, &v)| i != v) {
                    write!(f, ", order=[")?;
                    for (i, v) in order.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", v + 1)?;
                    }
                    write!(f, "]")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The image of an element under a flag multivaluation, compared
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuationVector(pub Vec<i64>);

impl ValuationVector {
    pub fn zero(d: usize) -> Self {
        ValuationVector(vec![0; d])
    }

    pub fn add(&self, other: &ValuationVector) -> ValuationVector {
        ValuationVector(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl fmt::Display for ValuationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Valuation and residual leading coefficient of a nonzero polynomial.
fn poly_leading(p: &Poly, flag: &Flag) -> Result<(Vec<i64>, Scalar)> {
    if p.is_zero() {
        return Err(Error::ZeroElement);
    }
    match flag {
        Flag::CurvePoint(CurveLocus::Finite(q)) => {
            let (ord, unit) = p.root_order(q);
            Ok((vec![ord as i64], unit))
        }
        Flag::CurvePoint(CurveLocus::Infinity) => {
            let deg = p.degree_in(0).expect("nonzero") as i64;
            Ok((vec![-deg], p.leading_coeff_univariate()))
        }
        Flag::Coordinate { order, center } => {
            let mut g = p.shift(center);
            let mut vals = Vec::with_capacity(order.len());
            for &var in order {
                if g.is_zero() {
                    // cannot happen for polynomials after exact division;
                    // guarded for fraction components all the same
                    return Err(Error::FlagInapplicable(
                        "restriction vanished identically before division".to_string(),
                    ));
                }
                let k = g.min_degree_in(var).expect("nonzero");
                g = g.divide_var_power(var, k).restrict_var_zero(var);
                vals.push(k as i64);
            }
            let unit = g
                .constant_value()
                .ok_or_else(|| Error::Internal("flag did not exhaust variables".to_string()))?;
            if unit.is_zero() {
                return Err(Error::Internal(
                    "zero residual after flag reduction".to_string(),
                ));
            }
            Ok((vals, unit))
        }
    }
}

/// Valuation together with the leading (residual) coefficient. The leading
/// coefficient is multiplicative and detects cancellation: two elements with
/// the same valuation and proportional leading coefficients drop in a linear
/// combination.
pub fn leading_term(f: &RationalFunction, flag: &Flag) -> Result<(ValuationVector, Scalar)> {
    if f.is_zero() {
        return Err(Error::ZeroElement);
    }
    flag.validate_for(f.nvars())?;
    let (vn, un) = poly_leading(f.num(), flag)?;
    let mut v = vn;
    let mut unit = un;
    match flag {
        Flag::CurvePoint(CurveLocus::Finite(q)) => {
            let m = f.den().multiplicity_at_root(q);
            v[0] -= m as i64;
            let cof = f.den().cofactor_value_at(q);
            unit = unit / cof;
        }
        Flag::CurvePoint(CurveLocus::Infinity) => {
            v[0] += f.den().degree() as i64;
            // all declared factors are monic, so the denominator's leading
            // coefficient is 1
        }
        Flag::Coordinate { .. } => {
            for (factor, mult) in f.den().factors() {
                let fp = factor.to_poly(f.nvars());
                let (fv, fu) = poly_leading(&fp, flag)?;
                for (vi, fvi) in v.iter_mut().zip(fv.iter()) {
                    *vi -= fvi * mult as i64;
                }
                unit = unit / fu.pow(mult as i64);
            }
        }
    }
    Ok((ValuationVector(v), unit))
}

/// The flag multivaluation of a nonzero element.
pub fn multivaluation(f: &RationalFunction, flag: &Flag) -> Result<ValuationVector> {
    leading_term(f, flag).map(|(v, _)| v)
}

/// The full valuation image of a subspace, with representative elements.
#[derive(Clone, Debug)]
pub struct ValuationImage {
    pairs: Vec<(ValuationVector, RationalFunction)>,
}

impl ValuationImage {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &ValuationVector> {
        self.pairs.iter().map(|(v, _)| v)
    }

    pub fn pairs(&self) -> &[(ValuationVector, RationalFunction)] {
        &self.pairs
    }
}

/// Compute the set of valuations attained on the nonzero elements of the
/// space spanned by `basis`. The cardinality always equals the dimension.
///
/// Collisions between basis valuations are eliminated by reducing the later
/// element against the earlier one with the exact ratio of leading
/// coefficients; curve flags take a direct echelon route in the local
/// parameter instead.
pub fn valuation_image(basis: &Basis, flag: &Flag) -> Result<ValuationImage> {
    flag.validate_for(basis.nvars().max(1))?;
    if basis.dimension() == 0 {
        return Ok(ValuationImage { pairs: Vec::new() });
    }
    let elements = basis.elements();
    let mut items: Vec<(ValuationVector, Scalar, RationalFunction)> = Vec::new();
    for e in &elements {
        let (v, u) = leading_term(e, flag)?;
        items.push((v, u, e.clone()));
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let distinct = items.windows(2).all(|w| w[0].0 != w[1].0);
    if distinct {
        return Ok(ValuationImage {
            pairs: items.into_iter().map(|(v, _, e)| (v, e)).collect(),
        });
    }
    if let Flag::CurvePoint(locus) = flag {
        return curve_image(basis, locus);
    }
    // generic valuation-echelon loop; each reduction strictly increases the
    // later row's valuation inside the finite value set of the space
    let dim = items.len();
    let max_steps = 4 * dim * dim + 16;
    let mut steps = 0usize;
    while let Some(i) = (0..items.len() - 1).find(|&i| items[i].0 == items[i + 1].0) {
        let ratio = &items[i + 1].1 / &items[i].1;
        let reduced = items[i + 1].2.sub(&items[i].2.scale(&ratio))?;
        if reduced.is_zero() {
            return Err(Error::Internal(
                "dependent elements in valuation image input".to_string(),
            ));
        }
        let (v, u) = leading_term(&reduced, flag)?;
        items.remove(i + 1);
        let pos = items.partition_point(|it| it.0 <= v);
        items.insert(pos, (v, u, reduced));
        steps += 1;
        if steps > max_steps {
            return Err(Error::Internal(
                "valuation-echelon reduction did not terminate".to_string(),
            ));
        }
    }
    Ok(ValuationImage {
        pairs: items.into_iter().map(|(v, _, e)| (v, e)).collect(),
    })
}

/// Curve-point fast path: write numerators in powers of the local parameter
/// and row-reduce; the pivot positions are exactly the attained orders.
fn curve_image(basis: &Basis, locus: &CurveLocus) -> Result<ValuationImage> {
    let den = basis.den().clone();
    let elements = basis.elements();
    let numerators: Vec<Poly> = elements
        .iter()
        .map(|e| e.numerator_over(&den))
        .collect::<Result<_>>()?;
    let max_deg = numerators
        .iter()
        .filter_map(|n| n.degree_in(0))
        .max()
        .unwrap_or(0) as usize;
    let cols = max_deg + 1;
    let mut mat: Vec<Vec<Scalar>> = Vec::with_capacity(numerators.len());
    for n in &numerators {
        let local = match locus {
            CurveLocus::Finite(q) => n.shift(std::slice::from_ref(q)),
            CurveLocus::Infinity => n.clone(),
        };
        let dense = local.coeffs_dense();
        let mut row = vec![Scalar::zero(); cols];
        for (k, c) in dense.into_iter().enumerate() {
            match locus {
                // column j carries the coefficient of (x - q)^j
                CurveLocus::Finite(_) => row[k] = c,
                // at infinity the local parameter is 1/x: order by
                // descending degree
                CurveLocus::Infinity => row[max_deg - k] = c,
            }
        }
        mat.push(row);
    }
    let pivots = rref_in_place(&mut mat);
    if mat.len() != basis.dimension() {
        return Err(Error::Internal(
            "rank drop in curve valuation image".to_string(),
        ));
    }
    let mut pairs = Vec::with_capacity(mat.len());
    for (row, &pcol) in mat.iter().zip(pivots.iter()) {
        let v = match locus {
            // order at q is the pivot power minus the denominator's
            // multiplicity there
            CurveLocus::Finite(q) => pcol as i64 - den.multiplicity_at_root(q) as i64,
            // order at infinity is deg(den) - deg(num); the pivot column
            // indexes descending numerator degree
            CurveLocus::Infinity => den.degree() as i64 - (max_deg - pcol) as i64,
        };
        let local_poly = match locus {
            CurveLocus::Finite(q) => {
                Poly::from_coeffs(row).shift(std::slice::from_ref(&(-q)))
            }
            CurveLocus::Infinity => {
                let mut rev = row.clone();
                rev.reverse();
                Poly::from_coeffs(&rev)
            }
        };
        pairs.push((
            ValuationVector(vec![v]),
            RationalFunction::new(local_poly, den.clone()),
        ));
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ValuationImage { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::echelonize;
    use crate::poly::Poly;
    use crate::ratfun::{DenFactor, Denominator};

    fn x() -> Poly {
        Poly::variable(1, 0)
    }

    fn pf(p: Poly) -> RationalFunction {
        RationalFunction::from_poly(p)
    }

    #[test]
    fn coordinate_flag_inductive_definition() {
        // x1^2 x2 + x1^3 at the origin in the order (x1, x2): lowest power
        // of x1 is 2, the restriction is x2, which vanishes to order 1.
        let f = Poly::monomial(2, vec![2, 1], Scalar::one())
            .add(&Poly::monomial(2, vec![3, 0], Scalar::one()))
            .unwrap();
        let flag = Flag::coordinate_origin(2);
        let v = multivaluation(&pf(f), &flag).unwrap();
        assert_eq!(v, ValuationVector(vec![2, 1]));
    }

    #[test]
    fn local_parameter_at_infinity() {
        let inv_x = RationalFunction::new(
            Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::zero()), 1),
        );
        let v = multivaluation(&inv_x, &Flag::at_infinity()).unwrap();
        assert_eq!(v, ValuationVector(vec![1]));
        let v3 = multivaluation(&pf(x().pow(3)), &Flag::at_infinity()).unwrap();
        assert_eq!(v3, ValuationVector(vec![-3]));
    }

    #[test]
    fn fraction_valuation_subtracts_denominator() {
        // (x1 + x2^2)/x2 at the origin in the order (x1, x2):
        // numerator valuation (0, 2), denominator (0, 1); difference (0, 1).
        let num = Poly::variable(2, 0)
            .add(&Poly::monomial(2, vec![0, 2], Scalar::one()))
            .unwrap();
        let f = RationalFunction::new(num, Denominator::from_factor(DenFactor::Var(1), 1));
        let flag = Flag::coordinate_origin(2);
        let v = multivaluation(&f, &flag).unwrap();
        assert_eq!(v, ValuationVector(vec![0, 1]));
    }

    #[test]
    fn zero_has_no_valuation() {
        let z = RationalFunction::zero(1);
        assert_eq!(
            multivaluation(&z, &Flag::at_point(Scalar::zero())),
            Err(Error::ZeroElement)
        );
    }

    #[test]
    fn poles_at_the_center_give_negative_entries() {
        let f = RationalFunction::new(
            Poly::one(2),
            Denominator::from_factor(DenFactor::Var(0), 1),
        );
        let flag = Flag::coordinate_origin(2);
        assert_eq!(
            multivaluation(&f, &flag).unwrap(),
            ValuationVector(vec![-1, 0])
        );
        let off_center = Flag::Coordinate {
            order: vec![0, 1],
            center: vec![Scalar::one(), Scalar::zero()],
        };
        assert_eq!(
            multivaluation(&f, &off_center).unwrap(),
            ValuationVector(vec![0, 0])
        );
    }

    #[test]
    fn constants_valuate_to_zero() {
        let c = RationalFunction::constant(2, Scalar::ratio(-7, 3));
        let flag = Flag::coordinate_origin(2);
        assert_eq!(
            multivaluation(&c, &flag).unwrap(),
            ValuationVector(vec![0, 0])
        );
    }

    #[test]
    fn image_of_monomial_space() {
        let b = echelonize(&[pf(Poly::one(1)), pf(x()), pf(x().pow(2))]).unwrap();
        let img = valuation_image(&b, &Flag::at_point(Scalar::zero())).unwrap();
        let vs: Vec<i64> = img.vectors().map(|v| v.0[0]).collect();
        assert_eq!(vs, vec![0, 1, 2]);
    }

    #[test]
    fn image_resolves_collisions() {
        // {1+x, x+x^2, x^2} at 0: valuations 0, 1, 2 with size = dimension.
        let b = echelonize(&[
            pf(Poly::one(1).add(&x()).unwrap()),
            pf(x().add(&x().pow(2)).unwrap()),
            pf(x().pow(2)),
        ])
        .unwrap();
        let img = valuation_image(&b, &Flag::at_point(Scalar::zero())).unwrap();
        assert_eq!(img.len(), 3);
        let vs: Vec<i64> = img.vectors().map(|v| v.0[0]).collect();
        assert_eq!(vs, vec![0, 1, 2]);
    }

    #[test]
    fn image_at_generic_point_still_counts_dimension() {
        // all three elements are units at x = 5, so every basis valuation
        // collides at 0; the image still has exactly dim = 3 points
        let b = echelonize(&[pf(Poly::one(1)), pf(x()), pf(x().pow(2))]).unwrap();
        let img = valuation_image(&b, &Flag::at_point(Scalar::from_int(5))).unwrap();
        assert_eq!(img.len(), 3);
        let vs: Vec<i64> = img.vectors().map(|v| v.0[0]).collect();
        assert_eq!(vs, vec![0, 1, 2]);
    }

    #[test]
    fn one_dimensional_image() {
        let b = echelonize(&[pf(x())]).unwrap();
        let img = valuation_image(&b, &Flag::at_infinity()).unwrap();
        assert_eq!(img.len(), 1);
    }

    #[test]
    fn image_resolves_collisions_at_infinity() {
        // 1 + x and x share degree 1, but x - (1 + x) is constant:
        // the image is {-1, 0}
        let b = echelonize(&[pf(Poly::one(1).add(&x()).unwrap()), pf(x())]).unwrap();
        let flag = Flag::at_infinity();
        let img = valuation_image(&b, &flag).unwrap();
        let vs: Vec<i64> = img.vectors().map(|v| v.0[0]).collect();
        assert_eq!(vs, vec![-1, 0]);
        for (v, rep) in img.pairs() {
            assert_eq!(&multivaluation(rep, &flag).unwrap(), v);
            assert!(b.contains(rep).unwrap());
        }
        // same space with poles: {(1+x)/(x-2), x/(x-2)} has image {0, 1}
        let den = Denominator::from_factor(DenFactor::Linear(Scalar::from_int(2)), 1);
        let c = echelonize(&[
            RationalFunction::new(Poly::one(1).add(&x()).unwrap(), den.clone()),
            RationalFunction::new(x(), den),
        ])
        .unwrap();
        let img = valuation_image(&c, &flag).unwrap();
        let vs: Vec<i64> = img.vectors().map(|v| v.0[0]).collect();
        assert_eq!(vs, vec![0, 1]);
    }

    #[test]
    fn representatives_attain_their_valuations() {
        let b = echelonize(&[
            pf(Poly::one(1).add(&x()).unwrap()),
            pf(x().add(&x().pow(2)).unwrap()),
            pf(x().pow(2)),
        ])
        .unwrap();
        let flag = Flag::at_point(Scalar::zero());
        let img = valuation_image(&b, &flag).unwrap();
        for (v, rep) in img.pairs() {
            assert_eq!(&multivaluation(rep, &flag).unwrap(), v);
            assert!(b.contains(rep).unwrap());
        }
    }

    #[test]
    fn additivity_spot_check() {
        let f = RationalFunction::new(
            x().add(&Poly::one(1)).unwrap(),
            Denominator::from_factor(DenFactor::Linear(Scalar::from_int(2)), 1),
        );
        let g = pf(x().pow(2).sub(&x()).unwrap());
        let flag = Flag::at_point(Scalar::zero());
        let sum = multivaluation(&f, &flag)
            .unwrap()
            .add(&multivaluation(&g, &flag).unwrap());
        assert_eq!(
            multivaluation(&f.mul(&g).unwrap(), &flag).unwrap(),
            sum
        );
    }
}
