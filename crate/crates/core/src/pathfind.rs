//! Global path planning and tractive-point selection.
//!
//! The planner only needs an approximate collision-free polyline from the
//! terminal predetermined position to the target; the trajectory optimizer
//! does the rest. In 2D we build a visibility graph over obstacle vertices
//! offset outward by the robot radius and run Dijkstra, which is
//! deterministic and length-optimal among graph paths. In 3D a uniform
//! grid search with segment shortcutting stands in.

use crate::geometry::{bbox, hull_distance, ConvexObstacle, Point};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Spacing of tractive-point candidates along the path arc, meters.
const CANDIDATE_SPACING: f64 = 0.05;
/// Slop for clearance comparisons against exactly-offset geometry.
const CLEAR_TOL: f64 = 1e-9;
/// 3D grid resolution, meters.
const GRID_RES: f64 = 0.1;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("start has less than the required clearance from an obstacle")]
    StartBlocked,
    #[error("goal has less than the required clearance from an obstacle")]
    GoalBlocked,
    #[error("no collision-free path to the goal exists")]
    Unreachable,
}

/// Collision-free polyline from start to goal; consecutive-waypoint
/// segments keep `r_a` clearance from every obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<const D: usize> {
    pub waypoints: Vec<Point<D>>,
}

impl<const D: usize> Path<D> {
    pub fn goal(&self) -> Point<D> {
        *self.waypoints.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

fn point_clearance<const D: usize>(p: &Point<D>, obstacles: &[ConvexObstacle<D>]) -> f64 {
    obstacles
        .iter()
        .map(|o| hull_distance(std::slice::from_ref(p), o.vertices()))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum clearance of the segment `a`-`b` over all obstacles (exact,
/// using hull distance of the two-point set).
pub fn segment_clearance<const D: usize>(
    a: &Point<D>,
    b: &Point<D>,
    obstacles: &[ConvexObstacle<D>],
) -> f64 {
    let seg = [*a, *b];
    obstacles
        .iter()
        .map(|o| hull_distance(&seg, o.vertices()))
        .fold(f64::INFINITY, f64::min)
}

/// Plans a collision-free polyline with clearance `r_a`.
pub fn plan_path<const D: usize>(
    start: Point<D>,
    goal: Point<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> Result<Path<D>, PathError> {
    if point_clearance(&start, obstacles) < r_a - CLEAR_TOL {
        return Err(PathError::StartBlocked);
    }
    if point_clearance(&goal, obstacles) < r_a - CLEAR_TOL {
        return Err(PathError::GoalBlocked);
    }
    if segment_clearance(&start, &goal, obstacles) >= r_a - CLEAR_TOL {
        return Ok(Path { waypoints: vec![start, goal] });
    }
    match D {
        2 => plan_visibility(start, goal, obstacles, r_a),
        _ => plan_grid(start, goal, obstacles, r_a),
    }
}

/// Offset polygon vertices along the exterior angle bisectors: the corner
/// of the radius-`r` swept outline, at distance `r / sin(α/2)` for interior
/// angle `α`.
fn offset_vertices_2d<const D: usize>(obstacle: &ConvexObstacle<D>, r: f64) -> Vec<Point<D>> {
    let verts = obstacle.vertices();
    let n = verts.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = verts[(i + n - 1) % n];
        let next = verts[(i + 1) % n];
        let v = verts[i];
        let u1 = (v - prev).normalize();
        let u2 = (v - next).normalize();
        let bisector = u1 + u2;
        let b_norm = bisector.norm();
        if b_norm < 1e-9 {
            continue; // antipodal edges: flat corner, no usable bisector
        }
        let bisector = bisector / b_norm;
        let cos_half = (-u1.dot(&u2)).clamp(-1.0, 1.0);
        let half_interior = (cos_half.acos()) / 2.0;
        let sin_half = half_interior.sin().max(1e-6);
        out.push(v + bisector * (r / sin_half));
    }
    out
}

struct HeapEntry {
    cost: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, node index as the deterministic tie-break.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then(other.node.cmp(&self.node))
    }
}

fn plan_visibility<const D: usize>(
    start: Point<D>,
    goal: Point<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> Result<Path<D>, PathError> {
    let mut nodes: Vec<Point<D>> = vec![start, goal];
    for obs in obstacles {
        for v in offset_vertices_2d(obs, r_a + CLEAR_TOL) {
            if point_clearance(&v, obstacles) >= r_a - CLEAR_TOL {
                nodes.push(v);
            }
        }
    }
    let n = nodes.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if segment_clearance(&nodes[i], &nodes[j], obstacles) >= r_a - CLEAR_TOL {
                let w = (nodes[j] - nodes[i]).norm();
                adj[i].push((j, w));
                adj[j].push((i, w));
            }
        }
    }

    // Dijkstra from start (node 0) to goal (node 1).
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(HeapEntry { cost: 0.0, node: 0 });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if node == 1 {
            break;
        }
        for &(next, w) in &adj[node] {
            let cand = cost + w;
            if cand < dist[next] - 1e-15 {
                dist[next] = cand;
                prev[next] = node;
                heap.push(HeapEntry { cost: cand, node: next });
            }
        }
    }
    if !dist[1].is_finite() {
        return Err(PathError::Unreachable);
    }
    let mut waypoints = vec![nodes[1]];
    let mut at = 1;
    while at != 0 {
        at = prev[at];
        waypoints.push(nodes[at]);
    }
    waypoints.reverse();
    Ok(Path { waypoints })
}

fn plan_grid<const D: usize>(
    start: Point<D>,
    goal: Point<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> Result<Path<D>, PathError> {
    let mut all = vec![start, goal];
    for o in obstacles {
        all.extend_from_slice(o.vertices());
    }
    let (mut lo, mut hi) = bbox(&all);
    for i in 0..D {
        lo[i] -= r_a + 0.5;
        hi[i] += r_a + 0.5;
    }
    let dims: Vec<usize> = (0..D)
        .map(|i| ((hi[i] - lo[i]) / GRID_RES).ceil() as usize + 1)
        .collect();
    let total: usize = dims.iter().product();
    let index = |cell: &[i64]| -> usize {
        let mut idx = 0usize;
        for i in 0..D {
            idx = idx * dims[i] + cell[i] as usize;
        }
        idx
    };
    let cell_of = |p: &Point<D>| -> Vec<i64> {
        (0..D).map(|i| ((p[i] - lo[i]) / GRID_RES).round() as i64).collect()
    };
    let center_of = |cell: &[i64]| -> Point<D> {
        Point::from_fn(|i, _| lo[i] + cell[i] as f64 * GRID_RES)
    };
    let in_range = |cell: &[i64]| (0..D).all(|i| cell[i] >= 0 && (cell[i] as usize) < dims[i]);

    // Lazily computed clearance per cell; f32 keeps the table small.
    let mut clearance: Vec<f32> = vec![f32::NAN; total];
    let clear_at = |cell: &[i64], clearance: &mut Vec<f32>| -> f64 {
        let idx = index(cell);
        if clearance[idx].is_nan() {
            clearance[idx] = point_clearance(&center_of(cell), obstacles) as f32;
        }
        clearance[idx] as f64
    };

    // Moves: all nonzero offsets in {-1,0,1}^D.
    let mut moves: Vec<Vec<i64>> = Vec::new();
    let mut offs = vec![-1i64; D];
    loop {
        if offs.iter().any(|&o| o != 0) {
            moves.push(offs.clone());
        }
        let mut i = 0;
        loop {
            offs[i] += 1;
            if offs[i] <= 1 {
                break;
            }
            offs[i] = -1;
            i += 1;
            if i == D {
                break;
            }
        }
        if i == D {
            break;
        }
    }
    let step_len = GRID_RES * (D as f64).sqrt();

    let start_cell = cell_of(&start);
    let goal_cell = cell_of(&goal);
    if !in_range(&start_cell) || !in_range(&goal_cell) {
        return Err(PathError::Unreachable);
    }
    // A* over grid cells with Euclidean heuristic.
    let mut dist = vec![f64::INFINITY; total];
    let mut prev_cell: Vec<u32> = vec![u32::MAX; total];
    let start_idx = index(&start_cell);
    let goal_idx = index(&goal_cell);
    let mut heap = BinaryHeap::new();
    dist[start_idx] = 0.0;
    heap.push(HeapEntry { cost: (center_of(&start_cell) - goal).norm(), node: start_idx });
    let unindex = |mut idx: usize| -> Vec<i64> {
        let mut cell = vec![0i64; D];
        for i in (0..D).rev() {
            cell[i] = (idx % dims[i]) as i64;
            idx /= dims[i];
        }
        cell
    };
    let mut found = false;
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        let cell = unindex(node);
        let g = dist[node];
        if cost > g + (center_of(&cell) - goal).norm() + 1e-9 {
            continue;
        }
        if node == goal_idx {
            found = true;
            break;
        }
        let c_here = clear_at(&cell, &mut clearance);
        for mv in &moves {
            let nc: Vec<i64> = cell.iter().zip(mv).map(|(c, m)| c + m).collect();
            if !in_range(&nc) {
                continue;
            }
            let c_next = clear_at(&nc, &mut clearance);
            if c_next < r_a - CLEAR_TOL {
                continue;
            }
            let d_step = (center_of(&nc) - center_of(&cell)).norm();
            // Segment-level check only when an obstacle could graze the edge.
            if c_here.min(c_next) < r_a + step_len
                && segment_clearance(&center_of(&cell), &center_of(&nc), obstacles)
                    < r_a - CLEAR_TOL
            {
                continue;
            }
            let ni = index(&nc);
            let cand = g + d_step;
            if cand < dist[ni] - 1e-12 {
                dist[ni] = cand;
                prev_cell[ni] = node as u32;
                heap.push(HeapEntry { cost: cand + (center_of(&nc) - goal).norm(), node: ni });
            }
        }
    }
    if !found {
        return Err(PathError::Unreachable);
    }
    let mut cells = vec![goal_idx];
    while *cells.last().unwrap() != start_idx {
        cells.push(prev_cell[*cells.last().unwrap()] as usize);
    }
    cells.reverse();
    let mut waypoints: Vec<Point<D>> = Vec::with_capacity(cells.len() + 2);
    waypoints.push(start);
    waypoints.extend(cells.iter().map(|&c| center_of(&unindex(c))));
    waypoints.push(goal);
    // The endpoints replace their grid cells when directly connectable.
    if waypoints.len() >= 3 && segment_clearance(&waypoints[0], &waypoints[2], obstacles) >= r_a {
        waypoints.remove(1);
    }
    let wl = waypoints.len();
    if wl >= 3 && segment_clearance(&waypoints[wl - 3], &waypoints[wl - 1], obstacles) >= r_a {
        waypoints.remove(wl - 2);
    }

    // Greedy shortcutting: jump to the farthest directly visible waypoint.
    let mut short = vec![waypoints[0]];
    let mut i = 0;
    while i + 1 < waypoints.len() {
        let mut j = waypoints.len() - 1;
        while j > i + 1 {
            if segment_clearance(&waypoints[i], &waypoints[j], obstacles) >= r_a {
                break;
            }
            j -= 1;
        }
        short.push(waypoints[j]);
        i = j;
    }
    Ok(Path { waypoints: short })
}

/// Picks the point on `path` nearest the goal (by arc length from the
/// goal) whose straight segment to `anchor` keeps `r_a` clearance.
/// Candidates are the waypoints plus samples every 5 cm of arc.
pub fn select_tractive_point<const D: usize>(
    path: &Path<D>,
    anchor: &Point<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> Option<Point<D>> {
    // Walk segments from the goal end toward the start, sampling each.
    for w in (0..path.waypoints.len().max(1) - 1).rev() {
        let a = path.waypoints[w];
        let b = path.waypoints[w + 1];
        let len = (b - a).norm();
        let steps = (len / CANDIDATE_SPACING).ceil().max(1.0) as usize;
        // From b (goal side) toward a, including both endpoints.
        for s in 0..=steps {
            let t = 1.0 - s as f64 / steps as f64;
            let cand = a + (b - a) * t;
            if segment_clearance(&cand, anchor, obstacles) >= r_a - CLEAR_TOL {
                return Some(cand);
            }
        }
        // Only the goal-side endpoint of the next segment is new, so the
        // loop above covering both endpoints keeps the sweep contiguous.
    }
    if path.waypoints.len() == 1
        && segment_clearance(&path.waypoints[0], anchor, obstacles) >= r_a - CLEAR_TOL
    {
        return Some(path.waypoints[0]);
    }
    None
}

/// True when the cached path cannot serve this round: none exists, the
/// target moved, or no tractive point on it is visible from the anchor.
pub fn needs_replan<const D: usize>(
    cached: Option<&Path<D>>,
    cached_target: Option<&Point<D>>,
    target: &Point<D>,
    anchor: &Point<D>,
    obstacles: &[ConvexObstacle<D>],
    r_a: f64,
) -> bool {
    let Some(path) = cached else { return true };
    match cached_target {
        Some(t) if (t - target).norm() <= 1e-12 => {}
        _ => return true,
    }
    select_tractive_point(path, anchor, obstacles, r_a).is_none()
}
