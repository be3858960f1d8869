//! Computable graded-algebra models and the shipped instance library.
//!
//! A model describes a graded family `B = sum of B_m` whose pieces can be
//! produced as explicit echelon bases:
//!
//! * section rings `B_m = L(floor(m D))` of a (possibly infinite) divisor on
//!   the projective line, with exact genus-zero bases;
//! * Laurent-monomial families cut out by a slice rule on exponents;
//! * finitely generated subalgebras of an ambient model;
//! * rescalings `m -> B_{km}`.
//!
//! Pieces are pure values: computing them in parallel over degrees is safe,
//! and the only cache (generated models) is an idempotent fill.

use crate::basis::{echelonize, product_space, Basis};
use crate::error::{Error, Result};
use crate::hull;
use crate::poly::Exponents;
use crate::ratfun::{DenFactor, Denominator, RationalFunction};
use crate::scalar::Scalar;
use crate::valuation::CurveLocus;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// Coefficient rule for the tail of an infinite divisor, 1-based: `a_i` is
/// the coefficient attached to the i-th support point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffRule {
    /// `a_i = scale * ratio^(i-1)` with `ratio` in (0, 1).
    Geometric { scale: Scalar, ratio: Scalar },
    /// `a_i = scale / i^2`.
    InverseSquares { scale: Scalar },
    /// `a_i = scale / i`. Summable coefficient mass fails; the floor
    /// supports stay finite for every degree.
    Harmonic { scale: Scalar },
}

impl CoeffRule {
    pub fn coeff(&self, i: u64) -> Scalar {
        assert!(i >= 1);
        match self {
            CoeffRule::Geometric { scale, ratio } => scale * &ratio.pow(i as i64 - 1),
            CoeffRule::InverseSquares { scale } => {
                scale / &Scalar::from_bigint(num_bigint::BigInt::from(i) * i)
            }
            CoeffRule::Harmonic { scale } => {
                scale / &Scalar::from_bigint(num_bigint::BigInt::from(i))
            }
        }
    }

    /// Whether the total coefficient mass converges.
    pub fn summable(&self) -> bool {
        !matches!(self, CoeffRule::Harmonic { .. })
    }

    /// A rational upper bound for the total mass, when one exists.
    pub fn mass_upper_bound(&self) -> Option<Scalar> {
        match self {
            CoeffRule::Geometric { scale, ratio } => {
                Some(scale / &(&Scalar::one() - ratio))
            }
            // sum 1/i^2 < 2
            CoeffRule::InverseSquares { scale } => Some(scale * &Scalar::from_int(2)),
            CoeffRule::Harmonic { .. } => None,
        }
    }

    /// Exact sum of the coefficient series, when rational.
    pub fn exact_mass(&self) -> Option<Scalar> {
        match self {
            CoeffRule::Geometric { scale, ratio } => {
                Some(scale / &(&Scalar::one() - ratio))
            }
            _ => None,
        }
    }

    /// Number of indices with `a_i >= threshold`; finite for every positive
    /// threshold since the coefficients decrease to zero.
    pub fn count_at_least(&self, threshold: &Scalar) -> u64 {
        assert!(threshold.is_positive());
        let mut count = 0u64;
        let mut i = 1u64;
        loop {
            if &self.coeff(i) < threshold {
                return count;
            }
            count += 1;
            i += 1;
        }
    }
}

impl fmt::Display for CoeffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRule::Geometric { scale, ratio } => write!(f, "geometric({scale}, {ratio})"),
            CoeffRule::InverseSquares { scale } => write!(f, "inverse_squares({scale})"),
            CoeffRule::Harmonic { scale } => write!(f, "harmonic({scale})"),
        }
    }
}

/// A divisor on the projective line with positive rational coefficients,
/// possibly infinitely many. The materialized prefix must carry every point
/// whose floored coefficient can be nonzero up to the certified truncation;
/// the optional rule documents how the prefix was generated and certifies
/// the tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfiniteDivisorSpec {
    pub support: Vec<(CurveLocus, Scalar)>,
    pub rule: Option<CoeffRule>,
}

impl InfiniteDivisorSpec {
    pub fn finite(support: Vec<(CurveLocus, Scalar)>) -> Self {
        InfiniteDivisorSpec {
            support,
            rule: None,
        }
    }

    /// Total coefficient mass of the divisor when it is finite (None when a
    /// non-geometric rule's tail has an irrational or divergent sum).
    pub fn mass_upper_bound(&self) -> Option<Scalar> {
        match &self.rule {
            None => Some(self.support.iter().map(|(_, a)| a).sum()),
            Some(rule) => rule.mass_upper_bound(),
        }
    }
}

/// Slice rules for Laurent-monomial models: the allowed exponent vectors of
/// each graded piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SliceRule {
    /// Full interval `{0..m}` in even degrees, `{0}` in odd degrees.
    Parity,
    /// Lattice points of the m-fold dilation of a rational polytope
    /// (dimension 1 or 2).
    Polytope { vertices: Vec<Vec<Scalar>> },
    /// Finitely many declared slices; degrees without a declaration are
    /// empty. Degree 0 is always the origin.
    Explicit { slices: BTreeMap<u32, Vec<Vec<i64>>> },
}

impl SliceRule {
    pub fn dim(&self) -> usize {
        match self {
            SliceRule::Parity => 1,
            SliceRule::Polytope { vertices } => vertices.first().map(|v| v.len()).unwrap_or(1),
            SliceRule::Explicit { slices } => slices
                .values()
                .flat_map(|s| s.iter())
                .map(|v| v.len())
                .next()
                .unwrap_or(1),
        }
    }

    pub fn slice(&self, m: u32) -> Result<Vec<Vec<i64>>> {
        if m == 0 {
            return Ok(vec![vec![0; self.dim()]]);
        }
        match self {
            SliceRule::Parity => {
                if m.is_multiple_of(2) {
                    Ok((0..=m as i64).map(|a| vec![a]).collect())
                } else {
                    Ok(vec![vec![0]])
                }
            }
            SliceRule::Polytope { vertices } => dilated_lattice_points(vertices, m),
            SliceRule::Explicit { slices } => {
                Ok(slices.get(&m).cloned().unwrap_or_default())
            }
        }
    }

    /// True when the rule provably pins the piece of degree `m` to at most
    /// the constants, by direct evaluation of the rule itself.
    pub fn provably_degenerate(&self, m: u32) -> bool {
        match self {
            SliceRule::Parity => !m.is_multiple_of(2),
            SliceRule::Polytope { .. } => false,
            SliceRule::Explicit { slices } => {
                slices.get(&m).map(|s| s.len() <= 1).unwrap_or(true)
            }
        }
    }

    /// True when degenerate degrees occur beyond every bound.
    pub fn degenerate_degrees_unbounded(&self) -> bool {
        match self {
            SliceRule::Parity => true,
            SliceRule::Polytope { .. } => false,
            SliceRule::Explicit { .. } => true,
        }
    }
}

/// Integer points of `m * conv(vertices)` for polytopes of dimension 1 or 2.
fn dilated_lattice_points(vertices: &[Vec<Scalar>], m: u32) -> Result<Vec<Vec<i64>>> {
    let d = vertices.first().map(|v| v.len()).unwrap_or(0);
    let ms = Scalar::from_int(m as i64);
    match d {
        1 => {
            let lo = vertices
                .iter()
                .map(|v| &v[0])
                .min()
                .expect("nonempty vertex list");
            let hi = vertices.iter().map(|v| &v[0]).max().expect("nonempty");
            let lo = -((&(-lo) * &ms).floor_int());
            let hi = (hi * &ms).floor_int();
            let (lo, hi) = (
                num_traits::ToPrimitive::to_i64(&lo).ok_or_else(too_big)?,
                num_traits::ToPrimitive::to_i64(&hi).ok_or_else(too_big)?,
            );
            Ok((lo..=hi).map(|a| vec![a]).collect())
        }
        2 => {
            let hull = hull::convex_hull_2d(vertices);
            let mut out = Vec::new();
            let bound = |pick: fn(&Vec<Scalar>) -> &Scalar, neg: bool| -> Result<i64> {
                let it = vertices.iter().map(pick);
                let v = if neg { it.min() } else { it.max() }.expect("nonempty");
                let scaled = v * &ms;
                let b = if neg {
                    -((-&scaled).floor_int())
                } else {
                    scaled.floor_int()
                };
                num_traits::ToPrimitive::to_i64(&b).ok_or_else(too_big)
            };
            let (x0, x1) = (bound(|v| &v[0], true)?, bound(|v| &v[0], false)?);
            let (y0, y1) = (bound(|v| &v[1], true)?, bound(|v| &v[1], false)?);
            for a in x0..=x1 {
                for b in y0..=y1 {
                    let p = vec![
                        Scalar::ratio(a, m as i64),
                        Scalar::ratio(b, m as i64),
                    ];
                    if hull::point_in_convex_polygon(&hull, &p) {
                        out.push(vec![a, b]);
                    }
                }
            }
            Ok(out)
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

fn too_big() -> Error {
    Error::Internal("lattice bound exceeds machine range".to_string())
}

/// The kind of a graded-algebra model.
#[derive(Clone, Debug)]
pub enum ModelKind {
    CurveSectionRing { divisor: InfiniteDivisorSpec },
    LaurentMonomial { rule: SliceRule },
    Generated {
        ambient: Arc<GradedAlgebraModel>,
        generators: Vec<(u32, RationalFunction)>,
    },
    Rescale { base: Arc<GradedAlgebraModel>, k: u32 },
}

/// A computable graded algebra: produces each graded piece as a canonical
/// echelon basis, and symmetric-power images through exact products.
#[derive(Debug)]
pub struct GradedAlgebraModel {
    kind: ModelKind,
    name: String,
    nvars: usize,
    dim: usize,
    truncation: u32,
    piece_cache: Mutex<BTreeMap<u32, Arc<Basis>>>,
}

impl GradedAlgebraModel {
    fn new(kind: ModelKind, name: String, nvars: usize, dim: usize, truncation: u32) -> Self {
        GradedAlgebraModel {
            kind,
            name,
            nvars,
            dim,
            truncation,
            piece_cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// The declared dimension d of the model (valuation vectors have this
    /// many entries).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// The graded piece `B_m` as a canonical basis.
    pub fn graded_piece(&self, m: u32) -> Result<Arc<Basis>> {
        if m > self.truncation {
            return Err(Error::Truncation {
                degree: m,
                truncation: self.truncation,
            });
        }
        match &self.kind {
            ModelKind::CurveSectionRing { divisor } => Ok(Arc::new(curve_piece(divisor, m))),
            ModelKind::LaurentMonomial { rule } => {
                Ok(Arc::new(monomial_piece(rule, m, self.nvars)?))
            }
            ModelKind::Rescale { base, k } => base.graded_piece(m.checked_mul(*k).ok_or(
                Error::Truncation {
                    degree: m,
                    truncation: self.truncation,
                },
            )?),
            ModelKind::Generated { .. } => self.generated_piece(m),
        }
    }

    fn generated_piece(&self, m: u32) -> Result<Arc<Basis>> {
        if let Some(b) = self.piece_cache.lock().unwrap().get(&m) {
            return Ok(b.clone());
        }
        let ModelKind::Generated { generators, .. } = &self.kind else {
            unreachable!()
        };
        for j in 0..=m {
            if self.piece_cache.lock().unwrap().contains_key(&j) {
                continue;
            }
            let piece = if j == 0 {
                Arc::new(echelonize(&[RationalFunction::one(self.nvars)])?)
            } else {
                let mut elements = Vec::new();
                for (deg, gen) in generators {
                    if *deg > j {
                        continue;
                    }
                    let lower = self
                        .piece_cache
                        .lock()
                        .unwrap()
                        .get(&(j - *deg))
                        .cloned()
                        .ok_or_else(|| Error::Internal("generated fill out of order".into()))?;
                    for e in lower.elements() {
                        elements.push(gen.mul(&e)?);
                    }
                }
                if elements.is_empty() {
                    // no composition of generator degrees reaches j
                    Arc::new(Basis::empty(self.nvars))
                } else {
                    Arc::new(echelonize(&elements)?)
                }
            };
            // idempotent fill: first writer wins, recomputation is identical
            self.piece_cache
                .lock()
                .unwrap()
                .entry(j)
                .or_insert(piece);
        }
        Ok(self
            .piece_cache
            .lock()
            .unwrap()
            .get(&m)
            .cloned()
            .expect("filled above"))
    }

    /// Image of the n-th symmetric power of `B_p` inside `B_{np}`, computed
    /// by binary exponentiation on spans of products.
    pub fn power_image(&self, p: u32, n: u32) -> Result<Arc<Basis>> {
        assert!(p >= 1 && n >= 1);
        let np = p.checked_mul(n).ok_or(Error::Truncation {
            degree: u32::MAX,
            truncation: self.truncation,
        })?;
        if np > self.truncation {
            return Err(Error::Truncation {
                degree: np,
                truncation: self.truncation,
            });
        }
        let base = self.graded_piece(p)?;
        if base.dimension() == 0 {
            return Err(Error::ZeroPiece(p));
        }
        if n == 1 {
            return Ok(base);
        }
        let mut acc: Option<Basis> = None;
        let mut sq = (*base).clone();
        let mut e = n;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => product_space(&a, &sq)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = product_space(&sq, &sq)?;
        }
        Ok(Arc::new(acc.expect("n >= 1")))
    }

    /// Geometry tag used by pole extraction.
    pub fn is_curve(&self) -> bool {
        match &self.kind {
            ModelKind::CurveSectionRing { .. } => true,
            ModelKind::LaurentMonomial { .. } => false,
            ModelKind::Generated { ambient, .. } => ambient.is_curve(),
            ModelKind::Rescale { base, .. } => base.is_curve(),
        }
    }

    /// A box bound for normalized valuation vectors `v/m` of degree-m
    /// elements under the shipped flags, when the instance provides one.
    pub fn normalized_box_bound(&self) -> Option<Scalar> {
        match &self.kind {
            ModelKind::CurveSectionRing { divisor } => divisor.mass_upper_bound(),
            ModelKind::LaurentMonomial { rule } => match rule {
                SliceRule::Parity => Some(Scalar::one()),
                SliceRule::Polytope { vertices } => vertices
                    .iter()
                    .flat_map(|v| v.iter())
                    .map(|c| c.abs())
                    .max(),
                SliceRule::Explicit { slices } => slices
                    .iter()
                    .filter(|(m, _)| **m > 0)
                    .flat_map(|(m, s)| {
                        let md = Scalar::from_int(*m as i64);
                        s.iter()
                            .flat_map(|v| v.iter())
                            .map(move |&c| Scalar::from_int(c.abs()) / md.clone())
                    })
                    .max()
                    .or(Some(Scalar::zero())),
            },
            ModelKind::Generated { ambient, .. } => ambient.normalized_box_bound(),
            ModelKind::Rescale { base, k } => base
                .normalized_box_bound()
                .map(|b| b * Scalar::from_int(*k as i64)),
        }
    }

    /// Degrees whose pieces the defining rule pins to at most the constants;
    /// used by the approximability verdict as a structural certificate.
    pub fn provably_degenerate_piece(&self, m: u32) -> bool {
        match &self.kind {
            ModelKind::LaurentMonomial { rule } => rule.provably_degenerate(m),
            ModelKind::Rescale { base, k } => base.provably_degenerate_piece(m * k),
            _ => false,
        }
    }

    pub fn degenerate_degrees_unbounded(&self) -> bool {
        match &self.kind {
            ModelKind::LaurentMonomial { rule } => rule.degenerate_degrees_unbounded(),
            ModelKind::Rescale { base, .. } => base.degenerate_degrees_unbounded(),
            _ => false,
        }
    }
}

/// `B_m = L(floor(m D))` on the projective line: numerators of degree up to
/// `deg floor(m D)` over the floored finite-part denominator.
fn curve_piece(divisor: &InfiniteDivisorSpec, m: u32) -> Basis {
    let ms = Scalar::from_int(m as i64);
    let mut den_factors: Vec<(DenFactor, u32)> = Vec::new();
    let mut total: u64 = 0;
    for (locus, a) in &divisor.support {
        let e = (&ms * a).floor_u32().expect("desk-scale floor");
        if e == 0 {
            continue;
        }
        total += e as u64;
        match locus {
            CurveLocus::Finite(p) => den_factors.push((DenFactor::Linear(p.clone()), e)),
            CurveLocus::Infinity => {}
        }
    }
    let den = Denominator::from_factors(den_factors);
    let supports: Vec<Exponents> = (0..=total).map(|j| Exponents(vec![j as u32])).collect();
    Basis::from_monomial_supports(1, supports, den)
}

fn monomial_piece(rule: &SliceRule, m: u32, nvars: usize) -> Result<Basis> {
    let mut slice = rule.slice(m)?;
    slice.sort();
    slice.dedup();
    if slice.is_empty() {
        return Ok(Basis::empty(nvars));
    }
    // shared denominator: per-variable maximum of the negative parts
    let mut neg = vec![0i64; nvars];
    for v in &slice {
        for (i, &e) in v.iter().enumerate() {
            neg[i] = neg[i].max(-e);
        }
    }
    let den = Denominator::from_factors(
        neg.iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (DenFactor::Var(i), n as u32)),
    );
    let supports: Vec<Exponents> = slice
        .iter()
        .map(|v| {
            Exponents(
                v.iter()
                    .zip(neg.iter())
                    .map(|(&e, &n)| (e + n) as u32)
                    .collect(),
            )
        })
        .collect();
    Ok(Basis::from_monomial_supports(nvars, supports, den))
}

/// The rescaled model whose degree-n piece is `B_{nk}`.
pub fn subalgebra_rescale(model: &Arc<GradedAlgebraModel>, k: u32) -> Result<Arc<GradedAlgebraModel>> {
    if k == 0 {
        return Err(Error::InvalidModel("rescale factor must be positive".into()));
    }
    Ok(Arc::new(GradedAlgebraModel::new(
        ModelKind::Rescale {
            base: model.clone(),
            k,
        },
        format!("rescale({}, {k})", model.name()),
        model.nvars(),
        model.dim(),
        model.truncation() / k,
    )))
}

// ---------------------------------------------------------------------------
// instance constructors
// ---------------------------------------------------------------------------

/// Section ring of a divisor given by explicit support, with optional
/// coefficient rule certifying degrees up to `truncation`.
pub fn curve_section_ring(
    divisor: InfiniteDivisorSpec,
    truncation: u32,
    name: &str,
) -> Result<Arc<GradedAlgebraModel>> {
    let mut seen = std::collections::BTreeSet::new();
    for (locus, a) in &divisor.support {
        if !seen.insert(locus.clone()) {
            return Err(Error::InvalidModel(format!(
                "duplicate support point {locus}"
            )));
        }
        if !a.is_positive() {
            return Err(Error::InvalidModel(format!(
                "coefficient at {locus} must be positive"
            )));
        }
    }
    if let Some(rule) = &divisor.rule {
        // the first coefficient beyond the materialized prefix must floor to
        // zero at the truncation degree, otherwise supports are missing
        let next = rule.coeff(divisor.support.len() as u64 + 1);
        if (&next * &Scalar::from_int(truncation as i64)) >= Scalar::one() {
            return Err(Error::InvalidModel(format!(
                "truncation {truncation} exceeds the certified support: coefficient {} of the \
                 first omitted point still floors to a positive multiple",
                next
            )));
        }
    }
    Ok(Arc::new(GradedAlgebraModel::new(
        ModelKind::CurveSectionRing { divisor },
        name.to_string(),
        1,
        1,
        truncation,
    )))
}

/// Section ring of the geometric-tail divisor `a_i = ratio^i` at the points
/// `p_i = i`. Enough support points are materialized for the requested
/// truncation.
pub fn dyadic_curve(ratio: Scalar, truncation: u32) -> Result<Arc<GradedAlgebraModel>> {
    if !ratio.is_positive() || ratio >= Scalar::one() {
        return Err(Error::InvalidModel("ratio must lie in (0, 1)".into()));
    }
    let rule = CoeffRule::Geometric {
        scale: ratio.clone(),
        ratio: ratio.clone(),
    };
    let mut support = Vec::new();
    let mut i = 1u64;
    let bound = Scalar::from_int(truncation.max(1) as i64);
    loop {
        let a = rule.coeff(i);
        if (&a * &bound) < Scalar::one() {
            break;
        }
        support.push((CurveLocus::Finite(Scalar::from_int(i as i64)), a));
        i += 1;
    }
    curve_section_ring(
        InfiniteDivisorSpec {
            support,
            rule: Some(rule),
        },
        truncation,
        &format!("dyadic_curve({ratio})"),
    )
}

/// Complete section ring of `degree * [0]` on the line: `dim B_m =
/// floor(m * degree) + 1`.
pub fn big_line_bundle_curve(degree: Scalar, truncation: u32) -> Result<Arc<GradedAlgebraModel>> {
    if !degree.is_positive() {
        return Err(Error::InvalidModel("degree must be positive".into()));
    }
    curve_section_ring(
        InfiniteDivisorSpec::finite(vec![(CurveLocus::Finite(Scalar::zero()), degree.clone())]),
        truncation,
        &format!("big_line_bundle_curve({degree})"),
    )
}

/// Monomial algebra whose degree-m slice is the dilated polytope.
pub fn polytope_monomial(
    vertices: Vec<Vec<Scalar>>,
    truncation: u32,
) -> Result<Arc<GradedAlgebraModel>> {
    if vertices.is_empty() {
        return Err(Error::InvalidModel("empty vertex list".into()));
    }
    let d = vertices[0].len();
    if d == 0 || d > 2 {
        return Err(Error::InvalidModel(format!(
            "polytope slices support dimensions 1 and 2, got {d}"
        )));
    }
    if vertices.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidModel("ragged vertex list".into()));
    }
    Ok(Arc::new(GradedAlgebraModel::new(
        ModelKind::LaurentMonomial {
            rule: SliceRule::Polytope { vertices },
        },
        "polytope_monomial".to_string(),
        d,
        d,
        truncation,
    )))
}

/// The parity monomial family: full monomial intervals in even degrees,
/// constants only in odd degrees. Note this is a graded linear series and
/// not a multiplicatively closed algebra; see `validate_model`.
pub fn parity_monomial(truncation: u32) -> Arc<GradedAlgebraModel> {
    Arc::new(GradedAlgebraModel::new(
        ModelKind::LaurentMonomial {
            rule: SliceRule::Parity,
        },
        "parity_monomial".to_string(),
        1,
        1,
        truncation,
    ))
}

/// Monomial model from finitely many declared slices.
pub fn explicit_monomial(
    slices: BTreeMap<u32, Vec<Vec<i64>>>,
    truncation: u32,
) -> Result<Arc<GradedAlgebraModel>> {
    let d = slices
        .values()
        .flat_map(|s| s.iter())
        .map(|v| v.len())
        .next()
        .unwrap_or(1);
    if slices
        .values()
        .flat_map(|s| s.iter())
        .any(|v| v.len() != d)
    {
        return Err(Error::InvalidModel("ragged slice vectors".into()));
    }
    Ok(Arc::new(GradedAlgebraModel::new(
        ModelKind::LaurentMonomial {
            rule: SliceRule::Explicit { slices },
        },
        "explicit_monomial".to_string(),
        d,
        d,
        truncation,
    )))
}

/// Subalgebra generated by finitely many homogeneous elements of an ambient
/// model.
pub fn generated(
    ambient: Arc<GradedAlgebraModel>,
    generators: Vec<(u32, RationalFunction)>,
    truncation: u32,
) -> Result<Arc<GradedAlgebraModel>> {
    if generators.is_empty() {
        return Err(Error::InvalidModel("no generators".into()));
    }
    for (deg, g) in &generators {
        if *deg == 0 {
            return Err(Error::InvalidModel("generator of degree zero".into()));
        }
        if g.is_zero() {
            return Err(Error::InvalidModel("zero generator".into()));
        }
        if g.nvars() != ambient.nvars() {
            return Err(Error::MixedVariables {
                expected: ambient.nvars(),
                found: g.nvars(),
            });
        }
    }
    let truncation = truncation.min(ambient.truncation());
    let nvars = ambient.nvars();
    let dim = ambient.dim();
    Ok(Arc::new(GradedAlgebraModel::new(
        ModelKind::Generated {
            ambient,
            generators,
        },
        "generated".to_string(),
        nvars,
        dim,
        truncation,
    )))
}

/// Tail families for the coefficient-decay sweeps: named coefficient rules
/// over the integer points `p_i = i`.
pub fn tail_family(
    name: &str,
    params: &[Scalar],
    truncation: u32,
    require_convergent_class: bool,
) -> Result<Arc<GradedAlgebraModel>> {
    let rule = match (name, params) {
        ("geometric", [scale, ratio]) => CoeffRule::Geometric {
            scale: scale.clone(),
            ratio: ratio.clone(),
        },
        ("inverse_squares", [scale]) => CoeffRule::InverseSquares {
            scale: scale.clone(),
        },
        ("harmonic", [scale]) => CoeffRule::Harmonic {
            scale: scale.clone(),
        },
        _ => {
            return Err(Error::InvalidModel(format!(
                "unknown tail family `{name}` or wrong parameter count"
            )))
        }
    };
    if let CoeffRule::Geometric { scale, ratio } = &rule {
        if !scale.is_positive() || !ratio.is_positive() || ratio >= &Scalar::one() {
            return Err(Error::InvalidModel(
                "geometric rule needs scale > 0 and ratio in (0, 1)".into(),
            ));
        }
    } else if !params[0].is_positive() {
        return Err(Error::InvalidModel("scale must be positive".into()));
    }
    if require_convergent_class && !rule.summable() {
        return Err(Error::InvalidModel(format!(
            "tail family `{name}` has divergent coefficient mass but a convergent class was required"
        )));
    }
    let bound = Scalar::from_int(truncation.max(1) as i64);
    let mut support = Vec::new();
    let mut i = 1u64;
    loop {
        let a = rule.coeff(i);
        if (&a * &bound) < Scalar::one() {
            break;
        }
        support.push((CurveLocus::Finite(Scalar::from_int(i as i64)), a));
        i += 1;
        if i > 1_000_000 {
            return Err(Error::InvalidModel(
                "tail support too large for the requested truncation".into(),
            ));
        }
    }
    curve_section_ring(
        InfiniteDivisorSpec {
            support,
            rule: Some(rule.clone()),
        },
        truncation,
        &format!("tail_family({rule})"),
    )
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

/// Outcome of one validation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail { witness: String },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// Structured validation report. Never aborts: failures are recorded with
/// witnesses.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// `B_0` is exactly the one-dimensional space of constants.
    pub unit_piece: CheckOutcome,
    /// Sampled multiplicative-closure checks `B_a * B_b inside B_{a+b}`.
    pub closure: Vec<(u32, u32, CheckOutcome)>,
    /// Degrees in the checked range with a zero piece.
    pub checked_nonempty_range: (u32, u32),
    pub zero_degrees: Vec<u32>,
    pub first_nonempty_positive: Option<u32>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn closure_failures(&self) -> Vec<&(u32, u32, CheckOutcome)> {
        self.closure.iter().filter(|(_, _, o)| !o.passed()).collect()
    }

    /// Zero pieces in the upper half of the checked range. Nonemptiness is
    /// only required for all sufficiently large degrees, so early gaps (a
    /// subalgebra generated in degrees 2 and 3 misses degree 1) are data,
    /// not failures.
    pub fn tail_zero_degrees(&self) -> Vec<u32> {
        let (lo, hi) = self.checked_nonempty_range;
        let mid = lo + (hi - lo) / 2;
        self.zero_degrees
            .iter()
            .copied()
            .filter(|&m| m > mid)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.unit_piece.passed()
            && self.closure.iter().all(|(_, _, o)| o.passed())
            && self.tail_zero_degrees().is_empty()
    }
}

/// Validate a model: the unit piece, multiplicative closure on deterministic
/// small-degree pairs plus `samples` seeded random pairs, and nonemptiness of
/// a declared degree range. Nonemptiness is read as `B_m != {0}` (constants
/// count); the report notes this reading.
pub fn validate_model(
    model: &GradedAlgebraModel,
    samples: u32,
    seed: u64,
) -> Result<ValidationReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let b0 = model.graded_piece(0)?;
    let unit_piece = if b0.dimension() == 1
        && b0
            .element(0)
            .num()
            .constant_value()
            .map(|c| !c.is_zero())
            .unwrap_or(false)
        && b0.element(0).den().is_one()
    {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail {
            witness: format!("B_0 has dimension {}", b0.dimension()),
        }
    };

    let trunc = model.truncation();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let small = trunc.min(8);
    for m1 in 1..=small {
        for m2 in m1..=small {
            if m1 + m2 <= trunc {
                pairs.push((m1, m2));
            }
        }
    }
    let cap = trunc.clamp(2, 24);
    for _ in 0..samples {
        let m1 = rng.gen_range(1..=cap / 2);
        let m2 = rng.gen_range(1..=(cap - m1));
        pairs.push((m1.min(m2), m1.max(m2)));
    }
    pairs.sort();
    pairs.dedup();

    let mut closure = Vec::new();
    for (m1, m2) in pairs {
        let a = model.graded_piece(m1)?;
        let b = model.graded_piece(m2)?;
        let target = model.graded_piece(m1 + m2)?;
        if a.dimension() == 0 || b.dimension() == 0 {
            continue;
        }
        let f = random_element(&a, &mut rng)?;
        let g = random_element(&b, &mut rng)?;
        let prod = f.mul(&g)?;
        let outcome = if target.contains(&prod)? {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail {
                witness: format!(
                    "({f}) in B_{m1} times ({g}) in B_{m2} leaves the span of B_{}",
                    m1 + m2
                ),
            }
        };
        closure.push((m1, m2, outcome));
    }

    let hi = trunc.min(32);
    let mut zero_degrees = Vec::new();
    let mut first_nonempty = None;
    for m in 1..=hi {
        let dim = model.graded_piece(m)?.dimension();
        if dim == 0 {
            zero_degrees.push(m);
        } else if first_nonempty.is_none() {
            first_nonempty = Some(m);
        }
    }

    Ok(ValidationReport {
        unit_piece,
        closure,
        checked_nonempty_range: (1, hi),
        zero_degrees,
        first_nonempty_positive: first_nonempty,
        notes: vec![
            "nonemptiness is read as B_m != {0}: pieces containing only constants count as \
             nonempty"
                .to_string(),
        ],
    })
}

/// A random element with small integer coordinates in the given basis.
/// Guaranteed nonzero.
pub fn random_element<R: Rng>(basis: &Basis, rng: &mut R) -> Result<RationalFunction> {
    assert!(basis.dimension() > 0);
    loop {
        let mut acc = RationalFunction::zero(basis.nvars());
        for e in basis.elements() {
            let c = rng.gen_range(-3i64..=3);
            if c != 0 {
                acc = acc.add(&e.scale(&Scalar::from_int(c)))?;
            }
        }
        if !acc.is_zero() {
            return Ok(acc);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic() -> Arc<GradedAlgebraModel> {
        dyadic_curve(Scalar::ratio(1, 2), 64).unwrap()
    }

    fn digit_sum_formula(m: u32) -> usize {
        (m - m.count_ones() + 1) as usize
    }

    #[test]
    fn line_bundle_dimensions() {
        let line = big_line_bundle_curve(Scalar::one(), 16).unwrap();
        for m in 0..=16 {
            assert_eq!(line.graded_piece(m).unwrap().dimension(), m as usize + 1);
        }
    }

    #[test]
    fn complete_series_basis_shape() {
        let line = big_line_bundle_curve(Scalar::one(), 8).unwrap();
        let b3 = line.graded_piece(3).unwrap();
        assert_eq!(b3.dimension(), 4);
        assert_eq!(b3.den().degree(), 3);
    }

    #[test]
    fn dyadic_small_dimensions() {
        let d = dyadic();
        // floor(4/2) + floor(4/4) + floor(4/8) = 2 + 1 + 0 = 3
        assert_eq!(d.graded_piece(4).unwrap().dimension(), 4);
        for m in 1..=64u32 {
            assert_eq!(
                d.graded_piece(m).unwrap().dimension(),
                digit_sum_formula(m),
                "degree {m}"
            );
        }
    }

    #[test]
    fn parity_dimensions() {
        let p = parity_monomial(16);
        assert_eq!(p.graded_piece(5).unwrap().dimension(), 1);
        assert_eq!(p.graded_piece(6).unwrap().dimension(), 7);
    }

    #[test]
    fn triangle_dimensions() {
        let t = polytope_monomial(
            vec![
                vec![Scalar::zero(), Scalar::zero()],
                vec![Scalar::one(), Scalar::zero()],
                vec![Scalar::zero(), Scalar::one()],
            ],
            12,
        )
        .unwrap();
        for m in 0..=12u32 {
            let expect = ((m + 1) * (m + 2) / 2) as usize;
            assert_eq!(t.graded_piece(m).unwrap().dimension(), expect);
        }
    }

    #[test]
    fn power_image_examples() {
        let d = dyadic();
        // B_2 = L([p1]) has dimension 2; its square spans L(2 [p1])
        assert_eq!(d.power_image(2, 2).unwrap().dimension(), 3);
        // first power is the piece itself
        assert_eq!(d.power_image(3, 1).unwrap(), d.graded_piece(3).unwrap());
    }

    #[test]
    fn power_image_binary_vs_chain() {
        let d = dyadic();
        for p in 1..=6u32 {
            for n in 1..=6u32 {
                let by_binary = d.power_image(p, n).unwrap();
                let mut chain = (*d.graded_piece(p).unwrap()).clone();
                for _ in 1..n {
                    chain = product_space(&chain, &d.graded_piece(p).unwrap()).unwrap();
                }
                assert_eq!(*by_binary, chain, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn dyadic_large_power_dimension() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 256).unwrap();
        // deg floor(8 D) = 7, and products of complete series on the line
        // stay complete, so dim S^16(B_8) = 16 * 7 + 1
        assert_eq!(d.power_image(8, 16).unwrap().dimension(), 113);
    }

    #[test]
    fn rescale_behaviour() {
        let d = dyadic();
        let r1 = subalgebra_rescale(&d, 1).unwrap();
        for m in 0..=8 {
            assert_eq!(
                r1.graded_piece(m).unwrap().dimension(),
                d.graded_piece(m).unwrap().dimension()
            );
        }
        let r2 = subalgebra_rescale(&d, 2).unwrap();
        assert_eq!(r2.graded_piece(2).unwrap().dimension(), 4);
        let p = parity_monomial(64);
        let pr = subalgebra_rescale(&p, 2).unwrap();
        for n in 1..=8u32 {
            assert_eq!(pr.graded_piece(n).unwrap().dimension(), (2 * n + 1) as usize);
        }
        // rescaling composes multiplicatively
        let r6 = subalgebra_rescale(&r2, 3).unwrap();
        let d6 = subalgebra_rescale(&d, 6).unwrap();
        for m in 0..=8 {
            assert_eq!(
                r6.graded_piece(m).unwrap().dimension(),
                d6.graded_piece(m).unwrap().dimension()
            );
        }
    }

    #[test]
    fn truncation_is_enforced() {
        let d = dyadic();
        assert!(matches!(
            d.graded_piece(65),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn uncertified_truncation_is_rejected() {
        // ratio 1/2 with truncation 64 needs points 1..6; a one-point prefix
        // cannot certify it
        let rule = CoeffRule::Geometric {
            scale: Scalar::ratio(1, 2),
            ratio: Scalar::ratio(1, 2),
        };
        let spec = InfiniteDivisorSpec {
            support: vec![(CurveLocus::Finite(Scalar::one()), rule.coeff(1))],
            rule: Some(rule),
        };
        assert!(curve_section_ring(spec, 64, "bad").is_err());
    }

    #[test]
    fn duplicate_support_rejected() {
        let spec = InfiniteDivisorSpec::finite(vec![
            (CurveLocus::Finite(Scalar::one()), Scalar::one()),
            (CurveLocus::Finite(Scalar::one()), Scalar::ratio(1, 2)),
        ]);
        assert!(matches!(
            curve_section_ring(spec, 8, "dup"),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn generated_subalgebra_of_line() {
        let line = big_line_bundle_curve(Scalar::one(), 16).unwrap();
        let one = RationalFunction::one(1);
        let inv_x = RationalFunction::new(
            crate::poly::Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::zero()), 1),
        );
        let g = generated(line.clone(), vec![(1, one), (1, inv_x)], 16).unwrap();
        // {1, 1/x} generate the full section ring degree by degree
        for m in 0..=10u32 {
            assert_eq!(
                g.graded_piece(m).unwrap().dimension(),
                line.graded_piece(m).unwrap().dimension()
            );
        }
    }

    #[test]
    fn sparse_generator_degrees_leave_early_gaps() {
        // generated in degrees 2 and 3: degree 1 is empty, everything from
        // degree 2 on is hit; early gaps do not fail validation
        let line = big_line_bundle_curve(Scalar::one(), 24).unwrap();
        let inv_x = RationalFunction::new(
            crate::poly::Poly::one(1),
            Denominator::from_factor(DenFactor::Linear(Scalar::zero()), 1),
        );
        let g = generated(
            line,
            vec![(2, RationalFunction::one(1)), (3, inv_x)],
            24,
        )
        .unwrap();
        assert_eq!(g.graded_piece(1).unwrap().dimension(), 0);
        assert_eq!(g.graded_piece(2).unwrap().dimension(), 1);
        let report = validate_model(&g, 8, 1).unwrap();
        assert!(report.zero_degrees.contains(&1));
        assert!(report.passed());
    }

    #[test]
    fn validate_dyadic_passes() {
        let d = dyadic();
        let report = validate_model(&d, 16, 7).unwrap();
        assert!(report.passed());
        assert_eq!(report.first_nonempty_positive, Some(1));
    }

    #[test]
    fn validate_corrupted_slices_fails_with_witness() {
        // S_1 + S_1 is not inside S_2
        let mut slices = BTreeMap::new();
        slices.insert(1, vec![vec![0], vec![1]]);
        slices.insert(2, vec![vec![0]]);
        let m = explicit_monomial(slices, 2).unwrap();
        let report = validate_model(&m, 4, 11).unwrap();
        let failures = report.closure_failures();
        assert!(!failures.is_empty());
        assert_eq!((failures[0].0, failures[0].1), (1, 1));
    }

    #[test]
    fn validate_parity_reports_mixed_parity_closure_failure() {
        // a degree-2 monomial times a degree-3 constant leaves the odd
        // slice, so closure genuinely fails at mixed parities; the report
        // carries the witness rather than aborting
        let p = parity_monomial(16);
        let report = validate_model(&p, 16, 3).unwrap();
        assert!(report.unit_piece.passed());
        assert!(report.zero_degrees.is_empty());
        assert!(report
            .closure_failures()
            .iter()
            .any(|(m1, m2, _)| (m1 + m2) % 2 == 1));
    }

    #[test]
    fn tail_family_rules() {
        let inv = tail_family("inverse_squares", &[Scalar::one()], 25, true).unwrap();
        // deg floor(m D) = sum floor(m / i^2)
        let dim9: u64 = (1..=3u64).map(|i| 9 / (i * i)).sum();
        assert_eq!(inv.graded_piece(9).unwrap().dimension() as u64, dim9 + 1);
        assert!(tail_family("harmonic", &[Scalar::one()], 12, true).is_err());
        let h = tail_family("harmonic", &[Scalar::one()], 12, false).unwrap();
        let dim4: u64 = (1..=4u64).map(|i| 4 / i).sum();
        assert_eq!(h.graded_piece(4).unwrap().dimension() as u64, dim4 + 1);
    }

    #[test]
    fn coeff_rule_counts() {
        let geo = CoeffRule::Geometric {
            scale: Scalar::ratio(1, 2),
            ratio: Scalar::ratio(1, 2),
        };
        assert_eq!(geo.count_at_least(&Scalar::ratio(1, 8)), 3);
        let inv = CoeffRule::InverseSquares {
            scale: Scalar::one(),
        };
        for l in 1..=10u64 {
            let count = inv.count_at_least(&Scalar::ratio(1, l as i64));
            assert_eq!(count, (1..).take_while(|i| i * i <= l).count() as u64);
        }
    }
}
