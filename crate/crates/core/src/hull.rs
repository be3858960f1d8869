//! Exact convex hulls and volumes in dimensions 1 to 3.
//!
//! All predicates are exact rational arithmetic. The 3-dimensional routine
//! enumerates supporting planes by brute force and is meant for the small
//! point sets this crate produces; shipped instances live in dimensions 1
//! and 2.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeSet;

pub type Point = Vec<Scalar>;

fn cross2(o: &Point, a: &Point, b: &Point) -> Scalar {
    let ax = &a[0] - &o[0];
    let ay = &a[1] - &o[1];
    let bx = &b[0] - &o[0];
    let by = &b[1] - &o[1];
    &(&ax * &by) - &(&ay * &bx)
}

/// Convex hull in the plane by the monotone chain, counterclockwise,
/// collinear interior points dropped. Degenerate inputs return the distinct
/// extreme points (possibly fewer than three).
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in pts.iter() {
        while lower.len() >= 2
            && !cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    if lower.len() + upper.len() < 3 {
        // all points collinear: keep the two extremes
        let mut ends = vec![pts[0].clone(), pts[n - 1].clone()];
        ends.dedup();
        return ends;
    }
    lower.extend(upper);
    lower
}

/// Twice the area of a counterclockwise convex polygon (shoelace).
pub fn polygon_area_twice(hull: &[Point]) -> Scalar {
    if hull.len() < 3 {
        return Scalar::zero();
    }
    let mut acc = Scalar::zero();
    for i in 0..hull.len() {
        let a = &hull[i];
        let b = &hull[(i + 1) % hull.len()];
        acc = acc + (&(&a[0] * &b[1]) - &(&a[1] * &b[0]));
    }
    acc.abs()
}

/// Point-in-polygon test against a counterclockwise convex hull (boundary
/// counts as inside). Hulls with fewer than three vertices degrade to
/// segment and point tests.
pub fn point_in_convex_polygon(hull: &[Point], p: &Point) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == *p,
        2 => {
            // on the segment: collinear and within the bounding box
            if !cross2(&hull[0], &hull[1], p).is_zero() {
                return false;
            }
            let within = |i: usize| {
                let lo = hull[0][i].clone().min(hull[1][i].clone());
                let hi = hull[0][i].clone().max(hull[1][i].clone());
                lo <= p[i] && p[i] <= hi
            };
            within(0) && within(1)
        }
        _ => (0..hull.len()).all(|i| {
            !cross2(&hull[i], &hull[(i + 1) % hull.len()], p).is_negative()
        }),
    }
}

fn sub3(a: &Point, b: &Point) -> [Scalar; 3] {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross3(a: &[Scalar; 3], b: &[Scalar; 3]) -> [Scalar; 3] {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

fn dot3(a: &[Scalar; 3], b: &[Scalar; 3]) -> Scalar {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

/// Exact volume and extreme points of the convex hull of a 3-dimensional
/// point set. Quadratic-ish brute force over candidate facet planes; fine
/// for the desk-scale inputs that reach it. Degenerate (flat) inputs report
/// volume zero.
pub fn hull_3d_volume_and_vertices(points: &[Point]) -> Result<(Scalar, Vec<Point>)> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    let n = pts.len();
    if n < 4 {
        return Ok((Scalar::zero(), pts));
    }
    // centroid is interior (or on a face for flat inputs)
    let inv_n = Scalar::ratio(1, n as i64);
    let centroid: Point = (0..3)
        .map(|i| pts.iter().map(|p| &p[i]).sum::<Scalar>() * inv_n.clone())
        .collect();

    let mut seen_planes: BTreeSet<(Vec<Scalar>, Scalar)> = BTreeSet::new();
    let mut volume6 = Scalar::zero();
    let mut hull_vertices: BTreeSet<Point> = BTreeSet::new();

    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let u = sub3(&pts[j], &pts[i]);
                let v = sub3(&pts[k], &pts[i]);
                let normal = cross3(&u, &v);
                if normal.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let base = [pts[i][0].clone(), pts[i][1].clone(), pts[i][2].clone()];
                let offset = dot3(&normal, &base);
                // supporting plane test
                let mut has_pos = false;
                let mut has_neg = false;
                for p in &pts {
                    let d = &dot3(&normal, &[p[0].clone(), p[1].clone(), p[2].clone()]) - &offset;
                    if d.is_positive() {
                        has_pos = true;
                    } else if d.is_negative() {
                        has_neg = true;
                    }
                    if has_pos && has_neg {
                        break;
                    }
                }
                if has_pos && has_neg {
                    continue;
                }
                // orient the normal outward
                let (normal, offset) = if has_pos {
                    (
                        [-&normal[0], -&normal[1], -&normal[2]],
                        -offset,
                    )
                } else {
                    (normal, offset)
                };
                // canonical plane key: divide by the first nonzero component
                let lead = normal
                    .iter()
                    .find(|c| !c.is_zero())
                    .expect("nonzero normal")
                    .clone();
                let scale = lead.abs().recip();
                let key: (Vec<Scalar>, Scalar) = (
                    normal.iter().map(|c| c * &scale).collect(),
                    &offset * &scale,
                );
                if !seen_planes.insert(key) {
                    continue;
                }
                // facet polygon: points on the plane, ordered in the plane
                let on_plane: Vec<Point> = pts
                    .iter()
                    .filter(|p| {
                        (&dot3(&normal, &[p[0].clone(), p[1].clone(), p[2].clone()]) - &offset)
                            .is_zero()
                    })
                    .cloned()
                    .collect();
                // project out the dominant normal axis
                let axis = (0..3)
                    .max_by(|&a, &b| normal[a].abs().cmp(&normal[b].abs()))
                    .unwrap();
                let (u_axis, v_axis) = match axis {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let flat: Vec<Point> = on_plane
                    .iter()
                    .map(|p| vec![p[u_axis].clone(), p[v_axis].clone()])
                    .collect();
                let flat_hull = convex_hull_2d(&flat);
                if flat_hull.len() < 3 {
                    continue;
                }
                // recover the 3d cycle in hull order
                let cycle: Vec<Point> = flat_hull
                    .iter()
                    .map(|q| {
                        on_plane
                            .iter()
                            .find(|p| p[u_axis] == q[0] && p[v_axis] == q[1])
                            .expect("projection is injective on a non-vertical plane")
                            .clone()
                    })
                    .collect();
                for p in &cycle {
                    hull_vertices.insert(p.clone());
                }
                // fan triangulation from the centroid; orientation fixed by
                // the outward normal
                for t in 1..cycle.len() - 1 {
                    let a = sub3(&cycle[0], &centroid);
                    let b = sub3(&cycle[t], &centroid);
                    let c = sub3(&cycle[t + 1], &centroid);
                    let det = dot3(&cross3(&a, &b), &c);
                    volume6 = volume6 + det.abs();
                }
            }
        }
    }
    if hull_vertices.is_empty() {
        // flat point set
        return Ok((Scalar::zero(), pts));
    }
    Ok((
        volume6 / Scalar::from_int(6),
        hull_vertices.into_iter().collect(),
    ))
}

/// Exact Euclidean volume of the hull of a point set in dimension 1, 2 or 3.
pub fn hull_volume(dim: usize, points: &[Point]) -> Result<Scalar> {
    match dim {
        1 => {
            let lo = points.iter().map(|p| &p[0]).min();
            let hi = points.iter().map(|p| &p[0]).max();
            Ok(match (lo, hi) {
                (Some(a), Some(b)) => b - a,
                _ => Scalar::zero(),
            })
        }
        2 => {
            let hull = convex_hull_2d(points);
            Ok(polygon_area_twice(&hull) / Scalar::from_int(2))
        }
        3 => hull_3d_volume_and_vertices(points).map(|(v, _)| v),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(x: i64, y: i64) -> Point {
        vec![Scalar::from_int(x), Scalar::from_int(y)]
    }

    fn p3(x: i64, y: i64, z: i64) -> Point {
        vec![
            Scalar::from_int(x),
            Scalar::from_int(y),
            Scalar::from_int(z),
        ]
    }

    #[test]
    fn unit_square_hull() {
        let pts = vec![p2(0, 0), p2(1, 0), p2(0, 1), p2(1, 1), p2(0, 0)];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
        assert_eq!(polygon_area_twice(&hull), Scalar::from_int(2));
        assert!(point_in_convex_polygon(
            &hull,
            &vec![Scalar::ratio(1, 2), Scalar::ratio(1, 3)]
        ));
        assert!(!point_in_convex_polygon(&hull, &p2(2, 0)));
    }

    #[test]
    fn interior_points_are_dropped() {
        let mut pts = vec![p2(0, 0), p2(4, 0), p2(0, 4)];
        pts.push(p2(1, 1));
        pts.push(p2(2, 0)); // on an edge
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 3);
    }

    #[test]
    fn collinear_degenerates_to_segment() {
        let pts = vec![p2(0, 0), p2(1, 1), p2(2, 2)];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 2);
        assert_eq!(polygon_area_twice(&hull), Scalar::zero());
    }

    #[test]
    fn volumes_low_dimensions() {
        let seg = vec![vec![Scalar::zero()], vec![Scalar::one()]];
        assert_eq!(hull_volume(1, &seg).unwrap(), Scalar::one());
        let tri = vec![p2(0, 0), p2(1, 0), p2(0, 1)];
        assert_eq!(hull_volume(2, &tri).unwrap(), Scalar::ratio(1, 2));
        let square = vec![p2(0, 0), p2(1, 0), p2(0, 1), p2(1, 1)];
        assert_eq!(hull_volume(2, &square).unwrap(), Scalar::one());
        assert!(matches!(
            hull_volume(4, &[vec![Scalar::zero(); 4]]),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn cube_and_simplex_volumes() {
        let mut cube = Vec::new();
        for x in 0..=1 {
            for y in 0..=1 {
                for z in 0..=1 {
                    cube.push(p3(x, y, z));
                }
            }
        }
        // an interior point must not disturb the hull
        cube.push(vec![
            Scalar::ratio(1, 2),
            Scalar::ratio(1, 2),
            Scalar::ratio(1, 2),
        ]);
        let (vol, verts) = hull_3d_volume_and_vertices(&cube).unwrap();
        assert_eq!(vol, Scalar::one());
        assert_eq!(verts.len(), 8);

        let simplex = vec![p3(0, 0, 0), p3(1, 0, 0), p3(0, 1, 0), p3(0, 0, 1)];
        let (vol, verts) = hull_3d_volume_and_vertices(&simplex).unwrap();
        assert_eq!(vol, Scalar::ratio(1, 6));
        assert_eq!(verts.len(), 4);
    }

    #[test]
    fn flat_3d_input_has_zero_volume() {
        let flat = vec![p3(0, 0, 0), p3(1, 0, 0), p3(0, 1, 0), p3(1, 1, 0)];
        let (vol, _) = hull_3d_volume_and_vertices(&flat).unwrap();
        assert_eq!(vol, Scalar::zero());
    }
}
