//! Online safe-corridor construction.
//!
//! The corridor is rebuilt every round from the extended predetermined
//! trajectory (EPT): the shifted previous plan plus, outside deadlocks, the
//! tractive point. The EPT is greedily divided into segments whose point
//! hulls keep the robot-radius clearance, one maximum-margin separating
//! plane is built per (segment, nearby obstacle), and each horizon index
//! inherits the planes of every segment containing it. Because the
//! predetermined trajectory is obstacle-clear, construction always
//! succeeds, the predetermined points satisfy the emitted constraints, and
//! any positions satisfying them stay clear of the considered obstacles —
//! the properties the recursive-feasibility argument stands on.

use crate::geometry::{bbox, hull_distance, ConvexObstacle, HalfSpace, Point};
use crate::qp::{separating_plane, QpError};
use thiserror::Error;

/// Extra slack on the obstacle-shadowing filter.
const FILTER_TOL: f64 = 1e-9;
/// Tolerance of the clearance comparisons in segment division. Planned
/// positions are only guaranteed feasible to the solver's KKT tolerance
/// (1e-6), so the division must accept that much dirt on the clearance.
const SEG_TOL: f64 = 2e-6;

#[derive(Debug, Error)]
pub enum CorridorError {
    #[error("predetermined trajectory is not obstacle-clear at horizon pair {index}..={}; \
             the feasibility invariant is broken upstream", index + 1)]
    PredeterminedBlocked { index: usize },
    #[error("separating plane failed: {0}")]
    Plane(#[from] QpError),
}

/// Extended predetermined trajectory: the predetermined points, plus the
/// tractive point when no terminal overlap is active.
#[derive(Debug, Clone)]
pub struct Ept<const D: usize> {
    pub points: Vec<Point<D>>,
    /// Number of predetermined points (the horizon length `K`).
    pub horizon: usize,
}

/// Builds the EPT. The tractive point is appended only when no terminal
/// overlap was detected last round.
pub fn build_ept<const D: usize>(
    predetermined: &[Point<D>],
    tractive: Option<Point<D>>,
    terminal_overlap: bool,
) -> Ept<D> {
    let mut points = predetermined.to_vec();
    if !terminal_overlap {
        if let Some(t) = tractive {
            points.push(t);
        }
    }
    Ept { points, horizon: predetermined.len() }
}

/// Contiguous EPT index range `lo..=hi`; adjacent segments share exactly
/// one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
}

/// Greedy division from the end of the EPT toward its start: points are
/// absorbed while the segment's point hull keeps `r_a` clearance from every
/// obstacle; on failure a new segment starts at the last absorbed point.
/// Worst case every segment is one adjacent pair, which is guaranteed to be
/// clear for a valid EPT.
pub fn segment_division<const D: usize>(
    ept: &Ept<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> Result<Vec<Segment>, CorridorError> {
    let pts = &ept.points;
    let m = pts.len();
    let clear = |lo: usize, hi: usize| -> bool {
        obstacles
            .iter()
            .all(|o| hull_distance(&pts[lo..=hi], o.vertices()) >= r_a - SEG_TOL)
    };
    let mut segments = Vec::new();
    let mut hi = m - 1;
    while hi > 0 {
        let mut lo = hi - 1;
        if !clear(lo, hi) {
            return Err(CorridorError::PredeterminedBlocked { index: lo });
        }
        while lo > 0 && clear(lo - 1, hi) {
            lo -= 1;
        }
        segments.push(Segment { lo, hi });
        hi = lo;
    }
    if segments.is_empty() {
        // Single-point EPT (all predetermined points coincide, no tractive).
        segments.push(Segment { lo: 0, hi: 0 });
    }
    segments.reverse();
    Ok(segments)
}

/// Per-horizon obstacle constraints: `per_horizon[k-1]` lists the planes
/// `normal · p_k ≥ offset` for horizon `k ∈ 1..=K`. The robot-radius
/// clearance is already folded into each offset.
#[derive(Debug, Clone, Default)]
pub struct Corridor<const D: usize> {
    pub per_horizon: Vec<Vec<HalfSpace<D>>>,
}

impl<const D: usize> Corridor<D> {
    /// Minimum slack of the given positions against their own constraint
    /// lists; nonnegative means every constraint is satisfied.
    pub fn min_slack(&self, positions: &[Point<D>]) -> f64 {
        let mut worst = f64::INFINITY;
        for (p, planes) in positions.iter().zip(&self.per_horizon) {
            for plane in planes {
                worst = worst.min(plane.slack(p));
            }
        }
        worst
    }
}

/// Per-segment construction record, kept for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct SegmentPolyhedron<const D: usize> {
    pub segment: Segment,
    /// Raw separating planes (offset without the clearance term).
    pub raw: Vec<HalfSpace<D>>,
    /// Emitted planes (offset tightened by `r_a`).
    pub emitted: Vec<HalfSpace<D>>,
    /// Seed box of the contact test: segment bounding box grown by `limit`.
    pub box_lo: Point<D>,
    pub box_hi: Point<D>,
}

#[derive(Debug, Clone)]
pub struct CorridorBuild<const D: usize> {
    pub corridor: Corridor<D>,
    pub polyhedra: Vec<SegmentPolyhedron<D>>,
}

/// Builds the corridor for one robot.
///
/// Per segment, obstacles are visited nearest-first (by hull distance to
/// the segment points). An obstacle is skipped when it is farther than
/// `limit` from `robot_pos` (unreachable within the horizon), when it lies
/// more than `r_a` outside the segment's expanded bounding box, or when an
/// already-emitted raw plane of this segment separates it by more than
/// `r_a` (it cannot touch the remaining polyhedron). Horizon `k` receives
/// the planes of every segment containing EPT index `k-1`.
pub fn build_corridor<const D: usize>(
    segments: &[Segment],
    ept: &Ept<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
    limit: f64,
    robot_pos: &Point<D>,
) -> Result<CorridorBuild<D>, CorridorError> {
    let mut per_horizon: Vec<Vec<HalfSpace<D>>> = vec![Vec::new(); ept.horizon];
    let mut polyhedra = Vec::with_capacity(segments.len());

    for seg in segments {
        let pts = &ept.points[seg.lo..=seg.hi];
        let (mut box_lo, mut box_hi) = bbox(pts);
        for i in 0..D {
            box_lo[i] -= limit;
            box_hi[i] += limit;
        }

        let mut order: Vec<(f64, usize)> = obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| (hull_distance(pts, o.vertices()), i))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut raw: Vec<HalfSpace<D>> = Vec::new();
        let mut emitted: Vec<HalfSpace<D>> = Vec::new();
        for (_, oi) in order {
            let obs = &obstacles[oi];
            if hull_distance(std::slice::from_ref(robot_pos), obs.vertices()) > limit {
                continue;
            }
            // Shadowed: an existing raw plane of this segment already keeps
            // the whole obstacle at least r_a behind it, while any point
            // satisfying the emitted planes stays at least r_a in front —
            // the obstacle cannot touch the remaining polyhedron.
            let shadowed = raw.iter().any(|plane| {
                obs.vertices().iter().all(|v| plane.slack(v) < -(r_a + FILTER_TOL))
            });
            if shadowed {
                continue;
            }
            let (plane, _margin) = separating_plane(pts, obs)?;
            emitted.push(plane.tightened(r_a));
            raw.push(plane);
        }

        for k in seg.lo..=seg.hi.min(ept.horizon - 1) {
            per_horizon[k].extend(emitted.iter().cloned());
        }
        polyhedra.push(SegmentPolyhedron { segment: *seg, raw, emitted, box_lo, box_hi });
    }

    Ok(CorridorBuild { corridor: Corridor { per_horizon }, polyhedra })
}
