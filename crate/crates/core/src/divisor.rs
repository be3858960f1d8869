//! Pole divisors, their per-degree suprema and the truncated limit divisor.
//!
//! For a graded piece the supremum of pole divisors over the whole space is
//! attained coefficientwise on any basis: the order along a prime divisor
//! is a valuation, so its minimum over the space equals its minimum over
//! the basis. No generic linear combinations are needed and the result is
//! deterministic and basis-independent.

use crate::algebra::{CoeffRule, GradedAlgebraModel, ModelKind};
use crate::error::{Error, Result};
use crate::par::*;
use crate::ratfun::RationalFunction;
use crate::scalar::Scalar;
use crate::valuation::CurveLocus;
use std::collections::BTreeMap;
use std::fmt;

/// A prime divisor of one of the fixed geometries: a point of the
/// projective line, or a coordinate hyperplane of a monomial model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimeDivisor {
    Point(CurveLocus),
    Hyperplane(usize),
}

impl fmt::Display for PrimeDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeDivisor::Point(CurveLocus::Finite(q)) => write!(f, "[{q}]"),
            PrimeDivisor::Point(CurveLocus::Infinity) => write!(f, "[inf]"),
            PrimeDivisor::Hyperplane(i) => write!(f, "[x{}=0]", i + 1),
        }
    }
}

/// Pole-extraction geometry of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Geometry {
    Curve,
    Laurent { nvars: usize },
}

impl Geometry {
    pub fn of(model: &GradedAlgebraModel) -> Geometry {
        if model.is_curve() {
            Geometry::Curve
        } else {
            Geometry::Laurent {
                nvars: model.nvars(),
            }
        }
    }
}

/// An integer divisor with finite support.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiniteDivisor {
    coeffs: BTreeMap<PrimeDivisor, i64>,
}

impl FiniteDivisor {
    pub fn zero() -> Self {
        FiniteDivisor::default()
    }

    pub fn coeff(&self, id: &PrimeDivisor) -> i64 {
        self.coeffs.get(id).copied().unwrap_or(0)
    }

    pub fn set(&mut self, id: PrimeDivisor, c: i64) {
        if c == 0 {
            self.coeffs.remove(&id);
        } else {
            self.coeffs.insert(id, c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PrimeDivisor, i64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &PrimeDivisor> {
        self.coeffs.keys()
    }

    /// Coefficientwise maximum.
    pub fn sup_with(&mut self, other: &FiniteDivisor) {
        for (id, c) in other.iter() {
            let cur = self.coeff(id);
            if c > cur {
                self.set(id.clone(), c);
            }
        }
    }
}

impl fmt::Display for FiniteDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (id, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *c == 1 {
                write!(f, "{id}")?;
            } else {
                write!(f, "{c}*{id}")?;
            }
        }
        Ok(())
    }
}

/// The negative part of `div(f)`: pole orders at the declared denominator
/// loci (plus infinity for curve geometry). Coefficients are nonnegative.
pub fn pole_divisor(f: &RationalFunction, geometry: &Geometry) -> Result<FiniteDivisor> {
    if f.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut out = FiniteDivisor::zero();
    match geometry {
        Geometry::Curve => {
            if f.nvars() != 1 {
                return Err(Error::MixedVariables {
                    expected: 1,
                    found: f.nvars(),
                });
            }
            // group the declared factors by their root
            let mut roots: BTreeMap<Scalar, u32> = BTreeMap::new();
            for (factor, mult) in f.den().factors() {
                let root = match factor {
                    crate::ratfun::DenFactor::Linear(r) => r.clone(),
                    crate::ratfun::DenFactor::Var(0) => Scalar::zero(),
                    crate::ratfun::DenFactor::Var(_) => {
                        return Err(Error::InvalidModel(
                            "multivariate denominator in curve geometry".into(),
                        ))
                    }
                };
                *roots.entry(root).or_insert(0) += mult;
            }
            for (root, mult) in roots {
                // monomial numerators x^j vanish only at the origin
                let num_ord = match f.num().as_monomial() {
                    Some((e, _)) => {
                        if root.is_zero() {
                            e.0[0]
                        } else {
                            0
                        }
                    }
                    None => f.num().root_order(&root).0,
                };
                let pole = mult as i64 - num_ord as i64;
                if pole > 0 {
                    out.set(PrimeDivisor::Point(CurveLocus::Finite(root)), pole);
                }
            }
            let num_deg = f.num().degree_in(0).unwrap_or(0) as i64;
            let pole_inf = num_deg - f.den().degree() as i64;
            if pole_inf > 0 {
                out.set(PrimeDivisor::Point(CurveLocus::Infinity), pole_inf);
            }
        }
        Geometry::Laurent { nvars } => {
            if f.nvars() != *nvars {
                return Err(Error::MixedVariables {
                    expected: *nvars,
                    found: f.nvars(),
                });
            }
            for i in 0..*nvars {
                let den_mult = f.den().var_multiplicity(i) as i64;
                let num_min = f.num().min_degree_in(i).unwrap_or(0) as i64;
                let pole = den_mult - num_min;
                if pole > 0 {
                    out.set(PrimeDivisor::Hyperplane(i), pole);
                }
            }
        }
    }
    Ok(out)
}

/// The smallest effective divisor dominating the pole divisors of every
/// element of `B_m`: the coefficientwise maximum over any basis.
pub fn sup_pole_divisor(model: &GradedAlgebraModel, m: u32) -> Result<FiniteDivisor> {
    let piece = model.graded_piece(m)?;
    if piece.dimension() == 0 {
        return Err(Error::ZeroPiece(m));
    }
    let geometry = Geometry::of(model);
    let mut out = FiniteDivisor::zero();
    for e in piece.elements() {
        out.sup_with(&pole_divisor(&e, &geometry)?);
    }
    Ok(out)
}

/// Per-prime records of the truncated limit divisor.
#[derive(Clone, Debug)]
pub struct EstimateRecord {
    /// sup over m <= M of coeff(D_m)/m.
    pub sup: Scalar,
    /// Smallest degree attaining the supremum.
    pub argmax: u32,
    /// coeff(D_m)/m along the divisors of the truncation degree: monotone
    /// nondecreasing by the divisibility lemma.
    pub divisor_chain: Vec<(u32, Scalar)>,
}

/// Truncated estimate of the limit divisor: per-prime suprema of the
/// normalized coefficient sequences together with the full sequence data.
#[derive(Clone, Debug)]
pub struct DivisorEstimate {
    pub truncation: u32,
    pub per_degree: Vec<(u32, FiniteDivisor)>,
    pub records: BTreeMap<PrimeDivisor, EstimateRecord>,
}

impl DivisorEstimate {
    /// The estimate as a rational divisor.
    pub fn sup_divisor(&self) -> BTreeMap<PrimeDivisor, Scalar> {
        self.records
            .iter()
            .map(|(id, r)| (id.clone(), r.sup.clone()))
            .collect()
    }

    /// Floor of `m` times the estimate.
    pub fn floor_multiple(&self, m: u32) -> FiniteDivisor {
        let ms = Scalar::from_int(m as i64);
        let mut out = FiniteDivisor::zero();
        for (id, r) in &self.records {
            let c = (&ms * &r.sup).floor_i64().unwrap_or(i64::MAX);
            if c != 0 {
                out.set(id.clone(), c);
            }
        }
        out
    }
}

/// Compute `D_m` for every `m <= truncation` (in parallel) and assemble the
/// per-prime suprema and divisibility chains.
pub fn limit_divisor_estimate(
    model: &GradedAlgebraModel,
    truncation: u32,
) -> Result<DivisorEstimate> {
    let degrees: Vec<u32> = (1..=truncation).collect();
    let per_degree: Vec<(u32, FiniteDivisor)> = degrees
        .into_par_iter()
        .map(|m| -> Result<(u32, FiniteDivisor)> {
            let piece_dim = model.graded_piece(m)?.dimension();
            if piece_dim == 0 {
                return Ok((m, FiniteDivisor::zero()));
            }
            Ok((m, sup_pole_divisor(model, m)?))
        })
        .collect::<Result<_>>()?;
    let mut records: BTreeMap<PrimeDivisor, EstimateRecord> = BTreeMap::new();
    for (m, d) in &per_degree {
        for (id, c) in d.iter() {
            let value = Scalar::ratio(c, *m as i64);
            match records.get_mut(id) {
                None => {
                    records.insert(
                        id.clone(),
                        EstimateRecord {
                            sup: value,
                            argmax: *m,
                            divisor_chain: Vec::new(),
                        },
                    );
                }
                Some(r) => {
                    if value > r.sup {
                        r.sup = value;
                        r.argmax = *m;
                    }
                }
            }
        }
    }
    let chain: Vec<u32> = (1..=truncation).filter(|m| truncation.is_multiple_of(*m)).collect();
    for (id, r) in records.iter_mut() {
        r.divisor_chain = chain
            .iter()
            .map(|&m| {
                let c = per_degree[m as usize - 1].1.coeff(id);
                (m, Scalar::ratio(c, m as i64))
            })
            .collect();
    }
    Ok(DivisorEstimate {
        truncation,
        per_degree,
        records,
    })
}

/// Outcome of the divisibility monotonicity check `D_a / a <= D_b / b` for
/// `a | b`, exact and coefficientwise.
#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub checked_pairs: usize,
    pub violations: Vec<(u32, u32, PrimeDivisor)>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_divisibility_monotonicity(
    model: &GradedAlgebraModel,
    pairs: &[(u32, u32)],
) -> Result<MonotonicityReport> {
    let mut cache: BTreeMap<u32, FiniteDivisor> = BTreeMap::new();
    let mut get = |m: u32| -> Result<FiniteDivisor> {
        if let Some(d) = cache.get(&m) {
            return Ok(d.clone());
        }
        let dim = model.graded_piece(m)?.dimension();
        let d = if dim == 0 {
            FiniteDivisor::zero()
        } else {
            sup_pole_divisor(model, m)?
        };
        cache.insert(m, d.clone());
        Ok(d)
    };
    let mut violations = Vec::new();
    for &(a, b) in pairs {
        if a == 0 || b % a != 0 {
            return Err(Error::InvalidModel(format!(
                "({a}, {b}) is not a divisibility pair"
            )));
        }
        let da = get(a)?;
        let db = get(b)?;
        let ids: std::collections::BTreeSet<&PrimeDivisor> =
            da.support().chain(db.support()).collect();
        for id in ids {
            let lhs = Scalar::ratio(da.coeff(id), a as i64);
            let rhs = Scalar::ratio(db.coeff(id), b as i64);
            if lhs > rhs {
                violations.push((a, b, id.clone()));
            }
        }
    }
    Ok(MonotonicityReport {
        checked_pairs: pairs.len(),
        violations,
    })
}

/// One inclusion failure: an element whose pole at `id` exceeds the floored
/// multiple of the estimate.
#[derive(Clone, Debug)]
pub struct InclusionFailure {
    pub degree: u32,
    pub id: PrimeDivisor,
    pub pole: i64,
    pub allowed: i64,
}

#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub checked_degrees: u32,
    pub estimate_truncation: u32,
    pub failures: Vec<InclusionFailure>,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check that every basis element of every `B_m`, `m <= bound`, satisfies
/// `div(b) + floor(m * estimate) >= 0`, i.e. the graded pieces embed in the
/// section spaces of the estimated divisor. Failures indicate the estimate's
/// truncation is too small and carry the offending degree and prime.
pub fn check_section_inclusion(
    model: &GradedAlgebraModel,
    estimate: &DivisorEstimate,
    bound: u32,
) -> Result<InclusionReport> {
    let geometry = Geometry::of(model);
    let mut failures = Vec::new();
    for m in 1..=bound {
        let piece = model.graded_piece(m)?;
        if piece.dimension() == 0 {
            continue;
        }
        let allowed = estimate.floor_multiple(m);
        let mut sup = FiniteDivisor::zero();
        for e in piece.elements() {
            let pole = pole_divisor(&e, &geometry)?;
            for (id, c) in pole.iter() {
                if c > allowed.coeff(id) {
                    failures.push(InclusionFailure {
                        degree: m,
                        id: id.clone(),
                        pole: c,
                        allowed: allowed.coeff(id),
                    });
                }
            }
            sup.sup_with(&pole);
        }
        // integrality: the degree-m supremum itself stays under the floor
        for (id, c) in sup.iter() {
            if c > allowed.coeff(id)
                && !failures
                    .iter()
                    .any(|f| f.degree == m && f.id == *id)
            {
                failures.push(InclusionFailure {
                    degree: m,
                    id: id.clone(),
                    pole: c,
                    allowed: allowed.coeff(id),
                });
            }
        }
    }
    failures.sort_by_key(|f| (f.degree, f.id.clone()));
    failures.dedup_by_key(|f| (f.degree, f.id.clone()));
    Ok(InclusionReport {
        checked_degrees: bound,
        estimate_truncation: estimate.truncation,
        failures,
    })
}

/// Coefficient-decay report: counts of estimated coefficients above the
/// thresholds 1/l, plus the analytic counts from the instance's coefficient
/// rule when one is declared.
#[derive(Clone, Debug)]
pub struct DecayReport {
    /// Estimated coefficients, descending.
    pub coefficients: Vec<(PrimeDivisor, Scalar)>,
    /// (l, observed count >= 1/l, analytic count from the rule).
    pub threshold_counts: Vec<(u64, usize, Option<u64>)>,
}

pub fn coefficient_decay(model: &GradedAlgebraModel, estimate: &DivisorEstimate) -> DecayReport {
    let mut coefficients: Vec<(PrimeDivisor, Scalar)> = estimate
        .records
        .iter()
        .map(|(id, r)| (id.clone(), r.sup.clone()))
        .collect();
    coefficients.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let rule: Option<&CoeffRule> = match model.kind() {
        ModelKind::CurveSectionRing { divisor } => divisor.rule.as_ref(),
        _ => None,
    };
    let threshold_counts = (1..=10u64)
        .map(|l| {
            let threshold = Scalar::ratio(1, l as i64);
            let observed = coefficients.iter().filter(|(_, c)| c >= &threshold).count();
            let analytic = rule.map(|r| r.count_at_least(&threshold));
            (l, observed, analytic)
        })
        .collect();
    DecayReport {
        coefficients,
        threshold_counts,
    }
}
