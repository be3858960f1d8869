//! Valuation semigroups, convex-body approximations and exact volumes.
//!
//! For a model and an applicable flag, the degree-m level of the semigroup
//! is the full valuation image of `B_m`; its cardinality equals `dim B_m`.
//! Normalizing level m by 1/m and taking the convex hull gives an inner
//! approximation of the limit body which refines monotonically along degree
//! multiples. Volumes are exact rationals.

use crate::algebra::GradedAlgebraModel;
use crate::error::{Error, Result};
use crate::hull;
use crate::par::*;
use crate::scalar::Scalar;
use crate::valuation::{valuation_image, Flag, ValuationVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Valuation points of all graded pieces up to a degree bound.
#[derive(Clone, Debug)]
pub struct OkounkovSample {
    pub degree_bound: u32,
    pub flag: Flag,
    /// Level m -> sorted distinct valuation vectors; exactly `dim B_m` many.
    pub levels: BTreeMap<u32, Vec<ValuationVector>>,
}

impl OkounkovSample {
    pub fn points(&self) -> impl Iterator<Item = (u32, &ValuationVector)> {
        self.levels
            .iter()
            .flat_map(|(m, vs)| vs.iter().map(move |v| (*m, v)))
    }

    pub fn total_points(&self) -> usize {
        self.levels.values().map(|v| v.len()).sum()
    }

    pub fn level(&self, m: u32) -> Option<&[ValuationVector]> {
        self.levels.get(&m).map(|v| v.as_slice())
    }
}

/// Collect the valuation points of `B_1 .. B_M` under the given flag.
/// Levels are computed independently (in parallel when enabled); each level
/// is checked against the dimension of its piece.
pub fn collect_semigroup(
    model: &GradedAlgebraModel,
    flag: &Flag,
    degree_bound: u32,
) -> Result<OkounkovSample> {
    flag.validate_for(model.nvars())?;
    let degrees: Vec<u32> = (1..=degree_bound).collect();
    let computed: Vec<(u32, Vec<ValuationVector>)> = degrees
        .into_par_iter()
        .map(|m| -> Result<(u32, Vec<ValuationVector>)> {
            let piece = model.graded_piece(m)?;
            if piece.dimension() == 0 {
                return Ok((m, Vec::new()));
            }
            let image = valuation_image(&piece, flag)?;
            if image.len() != piece.dimension() {
                return Err(Error::Internal(format!(
                    "level {m}: {} valuation points for dimension {}",
                    image.len(),
                    piece.dimension()
                )));
            }
            Ok((m, image.vectors().cloned().collect()))
        })
        .collect::<Result<_>>()?;
    let mut levels = BTreeMap::new();
    for (m, vs) in computed {
        if !vs.is_empty() {
            levels.insert(m, vs);
        }
    }
    Ok(OkounkovSample {
        degree_bound,
        flag: flag.clone(),
        levels,
    })
}

/// A convex polytope given by its extreme points, with exact rational
/// volume in dimensions up to 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vec<Scalar>>,
    /// False when the ambient dimension exceeds 3 and only the raw point
    /// cloud is carried.
    pub exact_hull: bool,
}

impl Polytope {
    /// Containment test (dimensions 1 and 2; higher dimensions fall back to
    /// a hull-growth test).
    pub fn contains(&self, p: &[Scalar]) -> Result<bool> {
        match self.dim {
            1 => {
                let lo = self.vertices.iter().map(|v| &v[0]).min();
                let hi = self.vertices.iter().map(|v| &v[0]).max();
                Ok(match (lo, hi) {
                    (Some(a), Some(b)) => a <= &p[0] && &p[0] <= b,
                    _ => false,
                })
            }
            2 => Ok(hull::point_in_convex_polygon(&self.vertices, &p.to_vec())),
            3 => {
                let (_, vertices_before) = hull::hull_3d_volume_and_vertices(&self.vertices)?;
                let mut grown = self.vertices.clone();
                grown.push(p.to_vec());
                let (_, vertices_after) = hull::hull_3d_volume_and_vertices(&grown)?;
                Ok(vertices_before == vertices_after)
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }
}

/// Inner approximation of the limit body at the sample's truncation: the
/// convex hull of all normalized points `v / m`.
pub fn body_approximation(sample: &OkounkovSample) -> Result<Polytope> {
    let d = sample.flag.dim();
    let mut points: Vec<Vec<Scalar>> = Vec::new();
    for (m, v) in sample.points() {
        let inv = Scalar::ratio(1, m as i64);
        points.push(v.0.iter().map(|&c| Scalar::from_int(c) * inv.clone()).collect());
    }
    points.sort();
    points.dedup();
    if points.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (vertices, exact) = match d {
        1 => {
            let lo = points.iter().map(|p| p[0].clone()).min().unwrap();
            let hi = points.iter().map(|p| p[0].clone()).max().unwrap();
            let mut vs = vec![vec![lo.clone()]];
            if hi != lo {
                vs.push(vec![hi]);
            }
            (vs, true)
        }
        2 => (hull::convex_hull_2d(&points), true),
        3 => {
            let (_, verts) = hull::hull_3d_volume_and_vertices(&points)?;
            (verts, true)
        }
        _ => (points, false),
    };
    Ok(Polytope {
        dim: d,
        vertices,
        exact_hull: exact,
    })
}

/// Exact Euclidean volume of a polytope of dimension at most 3.
pub fn body_volume(p: &Polytope) -> Result<Scalar> {
    if !p.exact_hull {
        return Err(Error::UnsupportedDimension(p.dim));
    }
    hull::hull_volume(p.dim, &p.vertices)
}

fn factorial(d: usize) -> Scalar {
    let mut acc = BigInt::one();
    for k in 2..=d {
        acc *= k;
    }
    Scalar::from_bigint(acc)
}

/// The normalized rank sequence `v_m = d! rk B_m / m^d` for `1 <= m <= M`,
/// as exact rationals.
pub fn volume_sequence(model: &GradedAlgebraModel, bound: u32) -> Result<Vec<(u32, Scalar)>> {
    let d = model.dim();
    let fact = factorial(d);
    let degrees: Vec<u32> = (1..=bound).collect();
    degrees
        .into_par_iter()
        .map(|m| -> Result<(u32, Scalar)> {
            let dim = model.graded_piece(m)?.dimension();
            let md = Scalar::from_int(m as i64).pow(d as i64);
            Ok((m, &(&fact * &Scalar::from_int(dim as i64)) / &md))
        })
        .collect()
}

/// Index of the sublattice of Z^n generated by the rows, via integer
/// elimination. Returns the rank and, when the rank is full, the absolute
/// determinant of a triangularized generating set.
pub fn lattice_index(mut rows: Vec<Vec<BigInt>>, n: usize) -> (usize, Option<BigInt>) {
    let mut diag: Vec<BigInt> = Vec::new();
    let mut top = 0usize;
    for col in 0..n {
        loop {
            let mut best: Option<usize> = None;
            for r in top..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                match &best {
                    None => best = Some(r),
                    Some(b) => {
                        if rows[r][col].abs() < rows[*b][col].abs() {
                            best = Some(r);
                        }
                    }
                }
            }
            let Some(b) = best else {
                break;
            };
            rows.swap(top, b);
            let mut finished = true;
            for r in top + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = &rows[r][col] / &rows[top][col];
                if !q.is_zero() {
                    for j in col..n {
                        let t = &rows[top][j] * &q;
                        rows[r][j] -= t;
                    }
                }
                if !rows[r][col].is_zero() {
                    finished = false;
                }
            }
            if finished {
                diag.push(rows[top][col].abs());
                top += 1;
                break;
            }
        }
        if top == rows.len() {
            break;
        }
    }
    let rank = diag.len();
    if rank == n {
        let det = diag.iter().fold(BigInt::one(), |a, b| a * b);
        (rank, Some(det))
    } else {
        (rank, None)
    }
}

/// Hypothesis checks for the volume identity at truncation.
#[derive(Clone, Debug)]
pub struct HypothesisChecks {
    /// All sampled valuation coordinates are non-negative.
    pub nonnegative: bool,
    pub first_negative: Option<(u32, ValuationVector)>,
    /// The differences of sampled points generate the full integer lattice
    /// in level-degree coordinates (index 1).
    pub lattice_rank: usize,
    pub lattice_index: Option<BigInt>,
    /// Normalized points against the instance box bound, when one exists.
    pub box_bound: Option<Scalar>,
    pub bounded: Option<bool>,
    /// The hull spans the full dimension d.
    pub full_dimensional: bool,
}

impl HypothesisChecks {
    pub fn generates_lattice(&self) -> bool {
        self.lattice_index.as_ref().map(|i| i.is_one()).unwrap_or(false)
    }

    pub fn all_hold(&self) -> bool {
        self.nonnegative
            && self.generates_lattice()
            && self.bounded.unwrap_or(true)
            && self.full_dimensional
    }
}

/// Report of the volume identity check: either the hypotheses fail (no
/// comparison is emitted) or both sides are reported with their exact
/// difference.
#[derive(Clone, Debug)]
pub struct VolumeIdentityReport {
    pub degree_bound: u32,
    pub hypotheses: HypothesisChecks,
    /// `d! * vol(body at truncation)` and the tail of the normalized rank
    /// sequence; `None` when a hypothesis fails.
    pub comparison: Option<VolumeComparison>,
}

#[derive(Clone, Debug)]
pub struct VolumeComparison {
    pub scaled_body_volume: Scalar,
    pub sequence_tail: Vec<(u32, Scalar)>,
    pub last_value: Scalar,
    pub abs_difference: Scalar,
}

/// Compare `d! * vol` of the truncated body against the normalized rank
/// sequence. Hypothesis failures are reported explicitly instead of a
/// comparison.
pub fn check_volume_identity(
    model: &GradedAlgebraModel,
    flag: &Flag,
    degree_bound: u32,
) -> Result<VolumeIdentityReport> {
    let d = model.dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let sample = collect_semigroup(model, flag, degree_bound)?;
    let mut nonnegative = true;
    let mut first_negative = None;
    for (m, v) in sample.points() {
        if v.0.iter().any(|&c| c < 0) {
            nonnegative = false;
            first_negative = Some((m, v.clone()));
            break;
        }
    }
    // lattice generated by differences of sampled (degree, valuation) points
    let all: Vec<(u32, &ValuationVector)> = sample.points().collect();
    let (rank, index) = if all.len() < 2 {
        (0, None)
    } else {
        let base = &all[0];
        let rows: Vec<Vec<BigInt>> = all[1..]
            .iter()
            .map(|(m, v)| {
                let mut row = vec![BigInt::from(*m as i64 - base.0 as i64)];
                row.extend(
                    v.0.iter()
                        .zip(base.1 .0.iter())
                        .map(|(a, b)| BigInt::from(a - b)),
                );
                row
            })
            .collect();
        lattice_index(rows, d + 1)
    };
    let box_bound = model.normalized_box_bound();
    let bounded = box_bound.as_ref().map(|bound| {
        sample.points().all(|(m, v)| {
            let m = Scalar::from_int(m as i64);
            v.0.iter()
                .all(|&c| &(&Scalar::from_int(c).abs() / &m) <= bound)
        })
    });
    let body = body_approximation(&sample)?;
    let full_dimensional = body.vertices.len() > d;
    let hypotheses = HypothesisChecks {
        nonnegative,
        first_negative,
        lattice_rank: rank,
        lattice_index: index,
        box_bound,
        bounded,
        full_dimensional,
    };
    let comparison = if hypotheses.all_hold() {
        let vol = body_volume(&body)?;
        let scaled = &factorial(d) * &vol;
        let seq = volume_sequence(model, degree_bound)?;
        let tail_len = (seq.len() / 4).max(1);
        let tail: Vec<(u32, Scalar)> = seq[seq.len() - tail_len..].to_vec();
        let last = seq.last().ok_or(Error::EmptySequence)?.1.clone();
        let diff = (&scaled - &last).abs();
        Some(VolumeComparison {
            scaled_body_volume: scaled,
            sequence_tail: tail,
            last_value: last,
            abs_difference: diff,
        })
    } else {
        None
    };
    Ok(VolumeIdentityReport {
        degree_bound,
        hypotheses,
        comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        big_line_bundle_curve, dyadic_curve, parity_monomial, polytope_monomial,
    };

    fn triangle() -> std::sync::Arc<GradedAlgebraModel> {
        polytope_monomial(
            vec![
                vec![Scalar::zero(), Scalar::zero()],
                vec![Scalar::one(), Scalar::zero()],
                vec![Scalar::zero(), Scalar::one()],
            ],
            64,
        )
        .unwrap()
    }

    #[test]
    fn line_bundle_levels() {
        let line = big_line_bundle_curve(Scalar::one(), 8).unwrap();
        let s = collect_semigroup(&line, &Flag::at_infinity(), 3).unwrap();
        for m in 1..=3u32 {
            let lv: Vec<i64> = s.level(m).unwrap().iter().map(|v| v.0[0]).collect();
            let expect: Vec<i64> = (0..=m as i64).collect();
            assert_eq!(lv, expect);
        }
    }

    #[test]
    fn triangle_levels_are_dilated_lattice_points() {
        let t = triangle();
        let flag = Flag::coordinate_origin(2);
        let s = collect_semigroup(&t, &flag, 2).unwrap();
        let lv2 = s.level(2).unwrap();
        assert_eq!(lv2.len(), 6);
        assert!(lv2.contains(&ValuationVector(vec![2, 0])));
        assert!(lv2.contains(&ValuationVector(vec![0, 2])));
        assert!(lv2.contains(&ValuationVector(vec![1, 1])));
    }

    #[test]
    fn level_counts_match_dimensions() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 16).unwrap();
        let s = collect_semigroup(&d, &Flag::at_point(Scalar::from_int(5)), 8).unwrap();
        for m in 1..=8u32 {
            assert_eq!(
                s.level(m).map(|l| l.len()).unwrap_or(0),
                d.graded_piece(m).unwrap().dimension()
            );
        }
    }

    #[test]
    fn sample_is_semigroup_closed_for_algebras() {
        let line = big_line_bundle_curve(Scalar::one(), 8).unwrap();
        let s = collect_semigroup(&line, &Flag::at_infinity(), 6).unwrap();
        let pts: Vec<(u32, ValuationVector)> =
            s.points().map(|(m, v)| (m, v.clone())).collect();
        for (m1, v1) in &pts {
            for (m2, v2) in &pts {
                if m1 + m2 <= 6 {
                    let sum = v1.add(v2);
                    assert!(s.level(m1 + m2).unwrap().contains(&sum));
                }
            }
        }
    }

    #[test]
    fn parity_sample_violates_semigroup_closure() {
        // (2, 1) + (3, 0) = (5, 1) is not sampled: the degree-5 slice is
        // the origin only; the parity family is not an algebra
        let p = parity_monomial(8);
        let s = collect_semigroup(&p, &Flag::coordinate_origin(1), 8).unwrap();
        assert!(s.level(2).unwrap().contains(&ValuationVector(vec![1])));
        assert!(s.level(3).unwrap().contains(&ValuationVector(vec![0])));
        assert!(!s.level(5).unwrap().contains(&ValuationVector(vec![1])));
    }

    #[test]
    fn segment_body() {
        let line = big_line_bundle_curve(Scalar::one(), 8).unwrap();
        let s = collect_semigroup(&line, &Flag::at_infinity(), 3).unwrap();
        let body = body_approximation(&s).unwrap();
        assert_eq!(body.dim, 1);
        assert_eq!(
            body.vertices,
            vec![vec![Scalar::zero()], vec![Scalar::one()]]
        );
        assert_eq!(body_volume(&body).unwrap(), Scalar::one());
    }

    #[test]
    fn triangle_body_is_exact() {
        let t = triangle();
        let s = collect_semigroup(&t, &Flag::coordinate_origin(2), 2).unwrap();
        let body = body_approximation(&s).unwrap();
        assert_eq!(body.vertices.len(), 3);
        assert_eq!(body_volume(&body).unwrap(), Scalar::ratio(1, 2));
    }

    #[test]
    fn parity_body_is_unit_segment() {
        let p = parity_monomial(8);
        let s = collect_semigroup(&p, &Flag::coordinate_origin(1), 8).unwrap();
        let body = body_approximation(&s).unwrap();
        assert_eq!(
            body.vertices,
            vec![vec![Scalar::zero()], vec![Scalar::one()]]
        );
    }

    #[test]
    fn body_refines_along_multiples() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 48).unwrap();
        let flag = Flag::at_point(Scalar::zero());
        let m0 = 8u32;
        let base = body_approximation(&collect_semigroup(&d, &flag, m0).unwrap()).unwrap();
        for k in [2u32, 3] {
            let finer =
                body_approximation(&collect_semigroup(&d, &flag, m0 * k).unwrap()).unwrap();
            for v in &base.vertices {
                assert!(finer.contains(v).unwrap(), "vertex {v:?} escaped at k={k}");
            }
        }
    }

    #[test]
    fn volume_sequence_closed_forms() {
        let line = big_line_bundle_curve(Scalar::one(), 8).unwrap();
        let vs = volume_sequence(&line, 4).unwrap();
        let expect = [
            Scalar::from_int(2),
            Scalar::ratio(3, 2),
            Scalar::ratio(4, 3),
            Scalar::ratio(5, 4),
        ];
        for ((m, v), e) in vs.iter().zip(expect.iter()) {
            assert_eq!(v, e, "m={m}");
        }
        let t = triangle();
        let vt = volume_sequence(&t, 3).unwrap();
        // (m+1)(m+2)/m^2
        assert_eq!(vt[2].1, Scalar::ratio(20, 9));
    }

    #[test]
    fn identity_check_line_bundle() {
        let line = big_line_bundle_curve(Scalar::one(), 32).unwrap();
        let r = check_volume_identity(&line, &Flag::at_infinity(), 32).unwrap();
        assert!(r.hypotheses.all_hold());
        let c = r.comparison.unwrap();
        assert_eq!(c.scaled_body_volume, Scalar::one());
        assert_eq!(c.abs_difference, Scalar::ratio(1, 32));
    }

    #[test]
    fn identity_check_triangle() {
        let t = triangle();
        let r = check_volume_identity(&t, &Flag::coordinate_origin(2), 40).unwrap();
        assert!(r.hypotheses.all_hold());
        let c = r.comparison.unwrap();
        assert_eq!(c.scaled_body_volume, Scalar::one());
        assert_eq!(c.abs_difference, Scalar::ratio(122, 1600));
    }

    #[test]
    fn hypothesis_failure_blocks_comparison() {
        // flag at a support point produces poles, hence negative valuations
        let d = dyadic_curve(Scalar::ratio(1, 2), 16).unwrap();
        let r = check_volume_identity(&d, &Flag::at_point(Scalar::one()), 8).unwrap();
        assert!(!r.hypotheses.nonnegative);
        assert!(r.comparison.is_none());
    }

    #[test]
    fn boundedness_against_instance_box() {
        let d = dyadic_curve(Scalar::ratio(1, 2), 32).unwrap();
        let r = check_volume_identity(&d, &Flag::at_point(Scalar::zero()), 32).unwrap();
        assert_eq!(r.hypotheses.bounded, Some(true));
        // mass of the dyadic divisor is 1
        assert_eq!(r.hypotheses.box_bound, Some(Scalar::one()));
    }

    #[test]
    fn volume_rejects_unsupported_dimensions() {
        let p = Polytope {
            dim: 4,
            vertices: vec![vec![Scalar::zero(); 4]],
            exact_hull: false,
        };
        assert!(matches!(
            body_volume(&p),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn lattice_index_detects_sublattices() {
        let rows = vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        assert_eq!(lattice_index(rows, 2), (2, Some(BigInt::from(2))));
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(3), BigInt::from(1)],
        ];
        assert_eq!(lattice_index(rows, 2), (2, Some(BigInt::from(1))));
        let rows = vec![vec![BigInt::from(1), BigInt::from(2)]];
        assert_eq!(lattice_index(rows, 2).0, 1);
    }
}
