//! Convex geometry kernel: hulls, distances, clearance queries and
//! norm-ball facet approximations.
//!
//! Everything here is pure and value-semantic. Positions are
//! [`Point<D>`] with `D` ∈ {2, 3}; distances are Euclidean and in meters.
//! Polygon-polygon distance in 2D is computed by exact edge-pair
//! enumeration, 3D (and any other dimension) falls back to GJK over the
//! raw point sets, which never needs an explicit hull.

use nalgebra::SVector;
use thiserror::Error;

/// Position or direction in `D`-dimensional space.
pub type Point<const D: usize> = SVector<f64, D>;

const EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("empty point set")]
    EmptyInput,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("obstacle is degenerate (needs positive area/volume)")]
    DegenerateObstacle,
    #[error("half-space normal must be nonzero")]
    ZeroNormal,
    #[error("facet count must be at least 3")]
    FacetCount,
}

/// Half-space `{ x : normal · x ≥ offset }` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace<const D: usize> {
    pub normal: Point<D>,
    pub offset: f64,
}

impl<const D: usize> HalfSpace<D> {
    /// Builds from any nonzero `(normal, offset)` pair, rescaling so the
    /// normal is unit length; the satisfied set is unchanged.
    pub fn new(normal: Point<D>, offset: f64) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if n < EPS || !n.is_finite() || !offset.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Self { normal: normal / n, offset: offset / n })
    }

    /// Signed margin of `p`; nonnegative iff the half-space is satisfied.
    pub fn slack(&self, p: &Point<D>) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn satisfied(&self, p: &Point<D>) -> bool {
        self.slack(p) >= 0.0
    }

    /// Same set with the offset grown by `delta` (shrinks the satisfied set).
    pub fn tightened(&self, delta: f64) -> Self {
        Self { normal: self.normal, offset: self.offset + delta }
    }
}

/// Convex hull of a point set, reduced to its extreme vertices.
///
/// `degenerate` marks hulls without full-dimensional interior (a single
/// point, a segment, or a planar set in 3D). Degenerate hulls are kept and
/// supported by all distance queries; they occur routinely, e.g. for the
/// repeated points of a startup trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull<const D: usize> {
    pub vertices: Vec<Point<D>>,
    pub degenerate: bool,
}

/// Convex obstacle given by its extreme vertices (counterclockwise in 2D).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexObstacle<const D: usize> {
    vertices: Vec<Point<D>>,
}

impl<const D: usize> ConvexObstacle<D> {
    /// Canonicalizes `points` to their convex hull. Errors when the hull is
    /// degenerate: obstacles must have positive area (2D) or volume (3D).
    pub fn new(points: Vec<Point<D>>) -> Result<Self, GeometryError> {
        let hull = convex_hull(&points)?;
        if hull.degenerate || hull.vertices.len() < D + 1 {
            return Err(GeometryError::DegenerateObstacle);
        }
        Ok(Self { vertices: hull.vertices })
    }

    pub fn vertices(&self) -> &[Point<D>] {
        &self.vertices
    }

    pub fn bbox(&self) -> (Point<D>, Point<D>) {
        bbox(&self.vertices)
    }
}

pub fn bbox<const D: usize>(pts: &[Point<D>]) -> (Point<D>, Point<D>) {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts.iter().skip(1) {
        for i in 0..D {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

fn check_finite<const D: usize>(pts: &[Point<D>]) -> Result<(), GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if pts.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(GeometryError::NonFinite);
    }
    Ok(())
}

/// Convex hull with canonical ordering: counterclockwise from the
/// lexicographically smallest vertex in 2D, lexicographically sorted in 3D.
/// Collinear and duplicate inputs are reduced.
pub fn convex_hull<const D: usize>(points: &[Point<D>]) -> Result<Hull<D>, GeometryError> {
    check_finite(points)?;
    match D {
        2 => {
            let ring = hull_ring_2d(points);
            Ok(Hull { degenerate: ring.len() < 3, vertices: ring })
        }
        _ => {
            let mut verts = extreme_points(points);
            verts.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
            let degenerate = affine_rank(&verts) < D;
            Ok(Hull { vertices: verts, degenerate })
        }
    }
}

/// Euclidean distance between the convex hulls of two point sets; zero iff
/// the hulls intersect.
pub fn hull_distance<const D: usize>(a: &[Point<D>], b: &[Point<D>]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "hull_distance needs nonempty sets");
    if D == 2 {
        let ra = hull_ring_2d(a);
        let rb = hull_ring_2d(b);
        distance_2d(&ra, &rb)
    } else {
        gjk_distance(a, b)
    }
}

/// True iff the hull of `pts` keeps at least `clearance` from the obstacle.
/// Boundary contact counts as clear only at zero clearance (the comparison
/// is `≥`, matching the direction of every planner constraint).
pub fn hull_clear_of<const D: usize>(
    pts: &[Point<D>],
    obstacle: &ConvexObstacle<D>,
    clearance: f64,
) -> bool {
    hull_distance(pts, obstacle.vertices()) >= clearance
}

// ---------------------------------------------------------------------------
// 2D: monotone chain + edge-pair enumeration
// ---------------------------------------------------------------------------

fn cross2<const D: usize>(o: &Point<D>, a: &Point<D>, b: &Point<D>) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain hull. Returns a CCW ring starting at the lexicographic
/// minimum; one point for coincident inputs, two for collinear ones.
fn hull_ring_2d<const D: usize>(points: &[Point<D>]) -> Vec<Point<D>> {
    let mut pts: Vec<Point<D>> = points.to_vec();
    pts.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
    pts.dedup_by(|a, b| (*a - *b).norm() < EPS);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point<D>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= EPS
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point<D>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= EPS
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && (lower[0] - lower[1]).norm() < EPS {
        lower.pop();
    }
    lower
}

fn point_segment_distance<const D: usize>(p: &Point<D>, a: &Point<D>, b: &Point<D>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < EPS * EPS {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn point_in_ring_2d<const D: usize>(p: &Point<D>, ring: &[Point<D>]) -> bool {
    match ring.len() {
        0 => false,
        1 => (p - ring[0]).norm() < EPS,
        2 => point_segment_distance(p, &ring[0], &ring[1]) < EPS,
        n => (0..n).all(|i| cross2(&ring[i], &ring[(i + 1) % n], p) >= -EPS),
    }
}

fn segments_cross<const D: usize>(
    a: &Point<D>,
    b: &Point<D>,
    c: &Point<D>,
    d: &Point<D>,
) -> bool {
    let d1 = cross2(c, d, a);
    let d2 = cross2(c, d, b);
    let d3 = cross2(a, b, c);
    let d4 = cross2(a, b, d);
    ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
}

fn edges<const D: usize>(ring: &[Point<D>]) -> Vec<(Point<D>, Point<D>)> {
    match ring.len() {
        0 | 1 => Vec::new(),
        2 => vec![(ring[0], ring[1])],
        n => (0..n).map(|i| (ring[i], ring[(i + 1) % n])).collect(),
    }
}

fn rings_overlap_2d<const D: usize>(a: &[Point<D>], b: &[Point<D>]) -> bool {
    if a.iter().any(|p| point_in_ring_2d(p, b)) || b.iter().any(|p| point_in_ring_2d(p, a)) {
        return true;
    }
    let ea = edges(a);
    let eb = edges(b);
    ea.iter()
        .any(|(p, q)| eb.iter().any(|(r, s)| segments_cross(p, q, r, s)))
}

fn distance_2d<const D: usize>(a: &[Point<D>], b: &[Point<D>]) -> f64 {
    if rings_overlap_2d(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let ea = edges(a);
    let eb = edges(b);
    for p in a {
        for (r, s) in &eb {
            best = best.min(point_segment_distance(p, r, s));
        }
        if eb.is_empty() {
            best = best.min((p - b[0]).norm());
        }
    }
    for p in b {
        for (r, s) in &ea {
            best = best.min(point_segment_distance(p, r, s));
        }
        if ea.is_empty() {
            best = best.min((p - a[0]).norm());
        }
    }
    best
}

// ---------------------------------------------------------------------------
// GJK over raw point sets (any dimension)
// ---------------------------------------------------------------------------

fn support<const D: usize>(pts: &[Point<D>], dir: &Point<D>) -> Point<D> {
    let mut best = pts[0];
    let mut best_dot = best.dot(dir);
    for p in pts.iter().skip(1) {
        let d = p.dot(dir);
        if d > best_dot {
            best_dot = d;
            best = *p;
        }
    }
    best
}

/// Projection of the origin onto the affine hull of `subset`, returned with
/// its barycentric coordinates; `None` when the subset is degenerate.
fn affine_projection<const D: usize>(subset: &[Point<D>]) -> Option<(Point<D>, Vec<f64>)> {
    let k = subset.len() - 1;
    if k == 0 {
        return Some((subset[0], vec![1.0]));
    }
    let mut gram = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut rhs = nalgebra::DVector::<f64>::zeros(k);
    let base = subset[0];
    for i in 0..k {
        let ei = subset[i + 1] - base;
        rhs[i] = -base.dot(&ei);
        for j in 0..k {
            gram[(i, j)] = ei.dot(&(subset[j + 1] - base));
        }
    }
    let lu = gram.lu();
    let sol = lu.solve(&rhs)?;
    let mut coords = Vec::with_capacity(k + 1);
    coords.push(1.0 - sol.iter().sum::<f64>());
    coords.extend(sol.iter().copied());
    let mut point = Point::<D>::zeros();
    for (c, p) in coords.iter().zip(subset) {
        point += *p * *c;
    }
    Some((point, coords))
}

/// Shrinks `simplex` to the smallest face whose closest point to the origin
/// has nonnegative barycentric coordinates, returning that point.
fn closest_on_simplex<const D: usize>(simplex: &mut Vec<Point<D>>) -> Point<D> {
    let n = simplex.len();
    let mut best: Option<(f64, Vec<usize>, Point<D>)> = None;
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<Point<D>> = subset.iter().map(|&i| simplex[i]).collect();
        if let Some((point, coords)) = affine_projection(&pts) {
            if coords.iter().all(|&c| c >= -1e-10) {
                let d = point.norm_squared();
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd - 1e-15) {
                    best = Some((d, subset, point));
                }
            }
        }
    }
    match best {
        Some((_, subset, point)) => {
            *simplex = subset.iter().map(|&i| simplex[i]).collect();
            point
        }
        // Numerically flat simplex: fall back to the nearest vertex.
        None => {
            let p = *simplex
                .iter()
                .min_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap())
                .unwrap();
            *simplex = vec![p];
            p
        }
    }
}

/// GJK distance between the convex hulls of two point sets.
pub fn gjk_distance<const D: usize>(a: &[Point<D>], b: &[Point<D>]) -> f64 {
    let minkowski = |dir: &Point<D>| support(a, dir) - support(b, &-dir);
    let dir = a[0] - b[0];
    if dir.norm_squared() < EPS * EPS {
        return 0.0;
    }
    let mut simplex = vec![minkowski(&-dir)];
    for _ in 0..200 {
        let v = closest_on_simplex(&mut simplex);
        let v2 = v.norm_squared();
        if v2 < 1e-22 {
            return 0.0;
        }
        let s = minkowski(&-v);
        // No measurable progress toward the origin: converged.
        if v2 - v.dot(&s) <= 1e-12 * v2.max(1e-12) {
            return v.norm();
        }
        if simplex.iter().any(|p| (p - s).norm_squared() < EPS * EPS) {
            return v.norm();
        }
        simplex.push(s);
    }
    closest_on_simplex(&mut simplex).norm()
}

/// Extreme points of a set: `v` is kept iff it lies strictly outside the
/// hull of the remaining points.
fn extreme_points<const D: usize>(points: &[Point<D>]) -> Vec<Point<D>> {
    let mut pts: Vec<Point<D>> = points.to_vec();
    pts.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
    pts.dedup_by(|a, b| (*a - *b).norm() < EPS);
    if pts.len() <= 2 {
        return pts;
    }
    let mut keep = Vec::new();
    for i in 0..pts.len() {
        let rest: Vec<Point<D>> = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| *p)
            .collect();
        if gjk_distance(&[pts[i]], &rest) > 1e-9 {
            keep.push(pts[i]);
        }
    }
    if keep.is_empty() {
        // All points coincide within tolerance of the hull boundary.
        keep.push(pts[0]);
    }
    keep
}

fn affine_rank<const D: usize>(pts: &[Point<D>]) -> usize {
    if pts.len() < 2 {
        return 0;
    }
    let base = pts[0];
    let mat = nalgebra::DMatrix::from_fn(D, pts.len() - 1, |r, c| (pts[c + 1] - base)[r]);
    mat.rank(1e-9)
}

// ---------------------------------------------------------------------------
// Norm-ball facets
// ---------------------------------------------------------------------------

/// Inscribed polytope approximation of the ball of `radius`.
///
/// Returns half-spaces in flipped orientation, `normal · x ≤ offset`: any
/// point satisfying all of them has norm at most `radius` (conservative
/// direction). In 2D the normals sit at angles `2πj/m` and
/// `offset = radius · cos(π/m)`; in 3D the fixed icosahedral direction set
/// is used and `m` is ignored.
pub fn norm_ball_facets<const D: usize>(
    radius: f64,
    m: usize,
) -> Result<Vec<HalfSpace<D>>, GeometryError> {
    assert!(radius > 0.0, "radius must be positive");
    match D {
        2 => {
            if m < 3 {
                return Err(GeometryError::FacetCount);
            }
            let offset = radius * (std::f64::consts::PI / m as f64).cos();
            Ok((0..m)
                .map(|j| {
                    let ang = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    let mut n = Point::<D>::zeros();
                    n[0] = ang.cos();
                    n[1] = ang.sin();
                    HalfSpace { normal: n, offset }
                })
                .collect())
        }
        3 => {
            static SCALE: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
            // Scale so the farthest polytope vertex lands exactly on the
            // sphere; computed once from the unit-offset polytope.
            let c = *SCALE.get_or_init(|| {
                let planes: Vec<(Point<3>, f64)> = icosahedral_directions::<3>()
                    .into_iter()
                    .map(|n| (-n, -1.0))
                    .collect();
                let far = enumerate_polytope_vertices(&planes)
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                1.0 / far
            });
            Ok(icosahedral_directions::<D>()
                .into_iter()
                .map(|n| HalfSpace { normal: n, offset: radius * c })
                .collect())
        }
        _ => panic!("norm_ball_facets supports 2 or 3 dimensions"),
    }
}

/// The 20 face normals of a regular icosahedron (unit vectors).
fn icosahedral_directions<const D: usize>() -> Vec<Point<D>> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut dirs = Vec::with_capacity(20);
    let mut push = |x: f64, y: f64, z: f64| {
        let mut v = Point::<D>::zeros();
        v[0] = x;
        v[1] = y;
        v[2] = z;
        dirs.push(v / v.norm());
    };
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                push(sx, sy, sz);
            }
        }
    }
    let a = 1.0 / phi;
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            push(0.0, s1 * a, s2 * phi);
            push(s1 * a, s2 * phi, 0.0);
            push(s2 * phi, 0.0, s1 * a);
        }
    }
    dirs
}

/// Vertices of the polytope `{ x : normal_i · x ≥ offset_i }`, found by
/// enumerating plane combinations. Intended for validation and sampling;
/// cost grows combinatorially with the plane count.
pub fn enumerate_polytope_vertices<const D: usize>(
    planes: &[(Point<D>, f64)],
) -> Vec<Point<D>> {
    let n = planes.len();
    let mut verts: Vec<Point<D>> = Vec::new();
    let mut combo = vec![0usize; D];
    fn rec<const D: usize>(
        planes: &[(Point<D>, f64)],
        combo: &mut Vec<usize>,
        depth: usize,
        start: usize,
        verts: &mut Vec<Point<D>>,
    ) {
        let n = planes.len();
        if depth == D {
            let a = nalgebra::DMatrix::from_fn(D, D, |r, c| planes[combo[r]].0[c]);
            let b = nalgebra::DVector::from_fn(D, |r, _| planes[combo[r]].1);
            if let Some(sol) = a.lu().solve(&b) {
                let x = Point::<D>::from_column_slice(sol.as_slice());
                if x.iter().all(|c| c.is_finite() && c.abs() < 1e9)
                    && planes.iter().all(|(nv, o)| nv.dot(&x) >= o - 1e-7)
                    && verts.iter().all(|v| (v - x).norm() > 1e-9)
                {
                    verts.push(x);
                }
            }
            return;
        }
        for i in start..n {
            combo[depth] = i;
            rec(planes, combo, depth + 1, i + 1, verts);
        }
    }
    if n >= D {
        rec(planes, &mut combo, 0, 0, &mut verts);
    }
    verts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn p2(x: f64, y: f64) -> Point<2> {
        Point::<2>::new(x, y)
    }

    fn unit_square(dx: f64, dy: f64) -> Vec<Point<2>> {
        vec![
            p2(dx, dy),
            p2(dx + 1.0, dy),
            p2(dx + 1.0, dy + 1.0),
            p2(dx, dy + 1.0),
        ]
    }

    // O(n^3) hull oracle: a pair of points is a hull edge iff every other
    // point lies on one side of its line.
    fn hull_vertices_bruteforce(pts: &[Point<2>]) -> Vec<Point<2>> {
        let mut verts: Vec<Point<2>> = Vec::new();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let all_left = pts
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i && *k != j)
                    .all(|(_, p)| cross2(&pts[i], &pts[j], p) >= -1e-12);
                if all_left {
                    for &v in [pts[i], pts[j]].iter() {
                        if verts.iter().all(|u| (u - v).norm() > 1e-12) {
                            verts.push(v);
                        }
                    }
                }
            }
        }
        verts
    }

    #[test]
    fn hull_of_triangle_is_identity() {
        let pts = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(0.0, 1.0)];
        let h = convex_hull(&pts).unwrap();
        assert!(!h.degenerate);
        assert_eq!(h.vertices.len(), 3);
    }

    #[test]
    fn collinear_input_reduces_to_flagged_segment() {
        let pts = vec![p2(0.0, 0.0), p2(2.0, 0.0), p2(1.0, 0.0)];
        let h = convex_hull(&pts).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.vertices, vec![p2(0.0, 0.0), p2(2.0, 0.0)]);
    }

    #[test]
    fn interior_point_is_dropped() {
        let pts = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0), p2(0.5, 0.5)];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        let expected = hull_vertices_bruteforce(&pts);
        assert_eq!(expected.len(), 4);
        for v in &h.vertices {
            assert!(expected.iter().any(|u| (u - v).norm() < 1e-12));
        }
    }

    #[test]
    fn hull_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pts: Vec<Point<2>> = (0..12)
                .map(|_| p2(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let h1 = convex_hull(&pts).unwrap();
            let h2 = convex_hull(&h1.vertices).unwrap();
            assert_eq!(h1.vertices, h2.vertices);
        }
    }

    #[test]
    fn empty_input_errors() {
        assert_eq!(convex_hull::<2>(&[]), Err(GeometryError::EmptyInput));
    }

    #[test]
    fn separated_squares_distance() {
        let a = unit_square(0.0, 0.0);
        let b = unit_square(3.0, 0.0);
        assert_relative_eq!(hull_distance(&a, &b), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn overlapping_squares_distance_zero() {
        let a = unit_square(0.0, 0.0);
        let b = unit_square(0.5, 0.5);
        assert_eq!(hull_distance(&a, &b), 0.0);
    }

    #[test]
    fn contained_square_distance_zero() {
        let a = unit_square(0.0, 0.0);
        let b = vec![p2(0.4, 0.4), p2(0.6, 0.4), p2(0.6, 0.6), p2(0.4, 0.6)];
        assert_eq!(hull_distance(&a, &b), 0.0);
    }

    #[test]
    fn point_to_segment_distance() {
        let a = vec![p2(0.0, 2.0)];
        let b = vec![p2(-1.0, 0.0), p2(1.0, 0.0)];
        assert_relative_eq!(hull_distance(&a, &b), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_matches_boundary_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 25 {
            let ca = p2(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let cb = p2(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let poly = |c: Point<2>, r: f64, n: usize, rng: &mut ChaCha8Rng| -> Vec<Point<2>> {
                (0..n)
                    .map(|_| {
                        let ang = rng.random_range(0.0..std::f64::consts::TAU);
                        let rad = rng.random_range(0.3 * r..r);
                        c + p2(rad * ang.cos(), rad * ang.sin())
                    })
                    .collect()
            };
            let a = poly(ca, 1.2, 7, &mut rng);
            let b = poly(cb, 1.2, 7, &mut rng);
            let d = hull_distance(&a, &b);
            assert_relative_eq!(d, hull_distance(&b, &a), epsilon = 1e-12);
            if d < 0.05 {
                continue; // oracle needs separation
            }
            checked += 1;
            // Sample one boundary densely, project exactly onto the other hull.
            let ring = hull_ring_2d(&a);
            let mut oracle = f64::INFINITY;
            for (s, e) in edges(&ring) {
                let len = (e - s).norm();
                let steps = (len / 5e-4).ceil() as usize;
                for i in 0..=steps {
                    let q = s + (e - s) * (i as f64 / steps as f64);
                    oracle = oracle.min(hull_distance(&[q], &b));
                }
            }
            if ring.len() == 1 {
                oracle = hull_distance(&[ring[0]], &b);
            }
            assert!((d - oracle).abs() < 1e-6, "d={d} oracle={oracle}");
        }
    }

    #[test]
    fn gjk_agrees_with_2d_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let mk = |rng: &mut ChaCha8Rng| -> Vec<Point<2>> {
                let cx = rng.random_range(-3.0..3.0);
                (0..6)
                    .map(|_| p2(cx + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let exact = hull_distance(&a, &b);
            let gjk = gjk_distance(&a, &b);
            assert!((exact - gjk).abs() < 1e-8, "exact={exact} gjk={gjk}");
        }
    }

    #[test]
    fn gjk_3d_boxes() {
        let cube = |c: Point<3>, r: f64| -> Vec<Point<3>> {
            let mut v = Vec::new();
            for sx in [-r, r] {
                for sy in [-r, r] {
                    for sz in [-r, r] {
                        v.push(c + Point::<3>::new(sx, sy, sz));
                    }
                }
            }
            v
        };
        let a = cube(Point::<3>::zeros(), 0.5);
        let b = cube(Point::<3>::new(3.0, 0.0, 0.0), 0.5);
        assert_relative_eq!(gjk_distance(&a, &b), 2.0, epsilon = 1e-9);
        let c = cube(Point::<3>::new(0.6, 0.0, 0.0), 0.5);
        assert_eq!(gjk_distance(&a, &c), 0.0);
    }

    #[test]
    fn clearance_queries() {
        let a = unit_square(0.0, 0.0);
        let obs = ConvexObstacle::new(unit_square(3.0, 0.0)).unwrap();
        assert!(hull_clear_of(&a, &obs, 0.3));
        assert!(!hull_clear_of(&a, &obs, 2.5));
        let touching = vec![p2(2.5, 0.0), p2(3.0, 0.5)];
        assert!(hull_clear_of(&touching, &obs, 0.0));
    }

    #[test]
    fn degenerate_obstacle_rejected() {
        let pts = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(2.0, 0.0)];
        assert_eq!(ConvexObstacle::new(pts), Err(GeometryError::DegenerateObstacle));
    }

    #[test]
    fn square_facets_offsets_and_vertices() {
        let facets = norm_ball_facets::<2>(2.0, 4).unwrap();
        assert_eq!(facets.len(), 4);
        let expected = 2.0 * (std::f64::consts::PI / 4.0).cos();
        for f in &facets {
            assert_relative_eq!(f.offset, expected, epsilon = 1e-9);
            assert_relative_eq!(f.normal.norm(), 1.0, epsilon = 1e-12);
        }
        // Polytope vertices must lie exactly on the radius-2 circle.
        let planes: Vec<(Point<2>, f64)> =
            facets.iter().map(|f| (-f.normal, -f.offset)).collect();
        let verts = enumerate_polytope_vertices(&planes);
        assert_eq!(verts.len(), 4);
        for v in verts {
            assert_relative_eq!(v.norm(), 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn facet_polytope_contained_in_ball_2d() {
        let facets = norm_ball_facets::<2>(1.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut kept = 0;
        while kept < 1000 {
            let x = p2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if facets.iter().all(|f| f.normal.dot(&x) <= f.offset) {
                assert!(x.norm() <= 1.0 + 1e-12);
                kept += 1;
            }
        }
    }

    #[test]
    fn facet_polytope_contained_in_ball_3d() {
        let facets = norm_ball_facets::<3>(0.8, 0).unwrap();
        assert_eq!(facets.len(), 20);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut kept = 0;
        while kept < 1000 {
            let x = Point::<3>::new(
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
            );
            if facets.iter().all(|f| f.normal.dot(&x) <= f.offset) {
                assert!(x.norm() <= 0.8 + 1e-12);
                kept += 1;
            }
        }
        // The icosahedral polytope should not be needlessly small.
        for f in &facets {
            assert!(f.offset > 0.8 * 0.7, "offset {}", f.offset);
        }
    }

    #[test]
    fn facet_offset_approaches_radius() {
        let facets = norm_ball_facets::<2>(1.5, 4096).unwrap();
        assert_relative_eq!(facets[0].offset, 1.5, epsilon = 1e-5);
    }

    proptest! {
        #[test]
        fn halfspace_normalizes_and_preserves_set(
            nx in -5.0f64..5.0, ny in -5.0f64..5.0, off in -5.0f64..5.0,
            px in -5.0f64..5.0, py in -5.0f64..5.0,
        ) {
            prop_assume!(nx.abs() > 1e-3 || ny.abs() > 1e-3);
            let raw_n = p2(nx, ny);
            let hs = HalfSpace::new(raw_n, off).unwrap();
            prop_assert!((hs.normal.norm() - 1.0).abs() < 1e-9);
            let p = p2(px, py);
            let raw_satisfied = raw_n.dot(&p) >= off;
            let scaled_slack = hs.slack(&p);
            if scaled_slack.abs() > 1e-9 {
                prop_assert_eq!(raw_satisfied, scaled_slack >= 0.0);
            }
        }

        #[test]
        fn hull_distance_symmetry(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut ChaCha8Rng| -> Vec<Point<2>> {
                (0..5).map(|_| p2(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let d1 = hull_distance(&a, &b);
            let d2 = hull_distance(&b, &a);
            prop_assert!((d1 - d2).abs() < 1e-9);
        }
    }
}
