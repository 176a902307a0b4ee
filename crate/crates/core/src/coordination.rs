//! Inter-robot coordination: pairwise separating half-spaces with an
//! elastic warning band at the terminal horizon, deadlock detection via
//! terminal overlap, and the adaptive right-hand rule.
//!
//! For each neighbor and horizon step a plane is placed halfway between
//! the two predetermined positions, offset by half the extended minimum
//! distance `r'_min = sqrt(r_min² + h²·v_max²)`; satisfying it at
//! consecutive steps keeps the pair at least `r_min` apart in continuous
//! time. At the terminal step the plane is pushed out by the band width
//! `ε` and a per-neighbor variable `w ∈ [0, ε]` measures how deep the
//! robot presses into that band; intrusion is allowed but charged
//! `ρ/(ε·γ)·w²`, where `γ` tracks recent intrusion and `ρ` is skewed by
//! the right-hand rule to break deadlocks.

use crate::geometry::{HalfSpace, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoordinationError {
    #[error("predetermined positions of a robot pair coincide at horizon {k}")]
    CoincidentPair { k: usize },
    #[error("band history gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
}

/// Parameters of the inter-robot machinery.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InterRobotParams {
    /// Minimum allowed center distance, meters.
    pub r_min: f64,
    /// Warning-band width ε, meters.
    pub epsilon: f64,
    /// Smoothing factor β of the band history, in (0, 1).
    pub beta: f64,
    /// Base penalty weight ρ₀.
    pub rho0: f64,
    /// Escalation step Δη of the right-hand rule.
    pub delta_eta: f64,
}

impl InterRobotParams {
    /// Extended minimum distance `sqrt(r_min² + h²·v_max²)`: sampled-time
    /// separation that guarantees `r_min` in continuous time.
    pub fn r_min_ext(&self, h: f64, v_max: f64) -> f64 {
        (self.r_min * self.r_min + h * h * v_max * v_max).sqrt()
    }
}

/// Separating half-space between two robots at one horizon step, from
/// their predetermined positions. With a scaling `E` (diagonal) the plane
/// acts on E-scaled positions: `normal · (E p) ≥ offset` keeps
/// `‖E(p_i - p_j)‖ ≥ r'_min` when both robots satisfy their mirrored
/// constraints.
pub fn mbvc_halfspace<const D: usize>(
    p_i: &Point<D>,
    p_j: &Point<D>,
    r_min_ext: f64,
    scaling: Option<&Point<D>>,
) -> Result<HalfSpace<D>, CoordinationError> {
    let scale = |p: &Point<D>| -> Point<D> {
        match scaling {
            Some(e) => Point::from_fn(|i, _| e[i] * p[i]),
            None => *p,
        }
    };
    let qi = scale(p_i);
    let qj = scale(p_j);
    let delta = qi - qj;
    let dist = delta.norm();
    if dist < 1e-9 {
        return Err(CoordinationError::CoincidentPair { k: 0 });
    }
    let normal = delta / dist;
    let offset = normal.dot(&((qi + qj) * 0.5)) + 0.5 * r_min_ext;
    Ok(HalfSpace { normal, offset })
}

/// All separating planes robot `i` owes one neighbor: hard planes for
/// horizons `1..=K-1` and the terminal-horizon plane whose band is made
/// elastic by the per-neighbor intrusion variable.
#[derive(Debug, Clone)]
pub struct NeighborConstraints<const D: usize> {
    pub neighbor: usize,
    /// Hard planes for k = 1..=K-1, in order.
    pub hard: Vec<HalfSpace<D>>,
    /// Terminal plane (hard floor); the optimizer may approach it through
    /// the band: `normal · (E p_K) ≥ offset + ε - w`.
    pub terminal: HalfSpace<D>,
}

/// Builds the constraint set of robot `i` against every neighbor's
/// predetermined trajectory. Both trajectories must have equal length `K`.
pub fn interrobot_constraints<const D: usize>(
    own_pred: &[Point<D>],
    neighbors: &[(usize, Vec<Point<D>>)],
    r_min_ext: f64,
    scaling: Option<&Point<D>>,
) -> Result<Vec<NeighborConstraints<D>>, CoordinationError> {
    let k_horizon = own_pred.len();
    let mut out = Vec::with_capacity(neighbors.len());
    for (id, pred_j) in neighbors {
        assert_eq!(pred_j.len(), k_horizon, "neighbor horizon mismatch");
        let mut hard = Vec::with_capacity(k_horizon - 1);
        for k in 0..k_horizon - 1 {
            hard.push(
                mbvc_halfspace(&own_pred[k], &pred_j[k], r_min_ext, scaling)
                    .map_err(|_| CoordinationError::CoincidentPair { k: k + 1 })?,
            );
        }
        let terminal =
            mbvc_halfspace(&own_pred[k_horizon - 1], &pred_j[k_horizon - 1], r_min_ext, scaling)
                .map_err(|_| CoordinationError::CoincidentPair { k: k_horizon })?;
        out.push(NeighborConstraints { neighbor: *id, hard, terminal });
    }
    Ok(out)
}

/// Stiffness cap of the band weight. Beyond this the band is
/// indistinguishable from a hard constraint, while the quadratic
/// coefficient would start to poison the conditioning of the planning
/// program.
pub const BAND_WEIGHT_CAP: f64 = 1e6;

/// Quadratic band-intrusion weight: the cost contribution is
/// `rho / (ε·γ) · w²`, saturated at [`BAND_WEIGHT_CAP`].
pub fn warning_band_weight(rho: f64, gamma: f64, epsilon: f64) -> Result<f64, CoordinationError> {
    if gamma <= 0.0 {
        return Err(CoordinationError::NonPositiveGamma(gamma));
    }
    Ok((rho / (epsilon * gamma)).min(BAND_WEIGHT_CAP))
}

/// Band-history recursion `γ ← (1-β)·γ + β·w`, clamped below at `1e-6·ε`
/// so the weight stays finite after long intrusion-free stretches.
pub fn update_gamma(gamma_prev: f64, w_prev: f64, beta: f64, epsilon: f64) -> f64 {
    ((1.0 - beta) * gamma_prev + beta * w_prev).clamp(1e-6 * epsilon, epsilon)
}

/// Terminal-overlap deadlock signature: the terminal planned point is away
/// from the target, did not move since last round, and coincides with its
/// predecessor.
pub fn detect_terminal_overlap<const D: usize>(
    planned: &[Point<D>],
    prev_terminal: &Point<D>,
    target: &Point<D>,
    tol_pos: f64,
) -> bool {
    let k = planned.len();
    let p_k = &planned[k - 1];
    let p_k1 = &planned[k - 2];
    (p_k - target).norm() > tol_pos
        && (p_k - prev_terminal).norm() <= tol_pos
        && (p_k - p_k1).norm() <= tol_pos
}

/// Saturation of the escalation state. `e^{±ETA_MAX}` already skews the
/// left/right weights by five orders of magnitude; growing further only
/// destabilizes the cost scaling.
pub const ETA_MAX: f64 = 6.0;

/// Right-hand-rule escalation: grows by `Δη` (saturating at [`ETA_MAX`])
/// while a terminal overlap holds, resets to zero once the robot is free
/// of every warning band, and carries over otherwise — in exactly that
/// priority order.
pub fn update_eta(eta_prev: f64, terminal_overlap: bool, all_w_zero: bool, delta_eta: f64) -> f64 {
    if terminal_overlap {
        (eta_prev + delta_eta).min(ETA_MAX)
    } else if all_w_zero {
        0.0
    } else {
        eta_prev
    }
}

/// Signed x-y angle from the bearing `p → target` to the bearing
/// `p → neighbor`, counterclockwise positive, in `(-π, π]`. Degenerate
/// projections give zero.
pub fn theta_xy<const D: usize>(p: &Point<D>, target: &Point<D>, neighbor: &Point<D>) -> f64 {
    let to_target = (target[0] - p[0], target[1] - p[1]);
    let to_nbr = (neighbor[0] - p[0], neighbor[1] - p[1]);
    let n1 = (to_target.0 * to_target.0 + to_target.1 * to_target.1).sqrt();
    let n2 = (to_nbr.0 * to_nbr.0 + to_nbr.1 * to_nbr.1).sqrt();
    if n1 < 1e-9 || n2 < 1e-9 {
        return 0.0;
    }
    let cross = to_target.0 * to_nbr.1 - to_target.1 * to_nbr.0;
    let dot = to_target.0 * to_nbr.0 + to_target.1 * to_nbr.1;
    cross.atan2(dot)
}

/// Adaptive penalty weight `ρ = ρ₀·e^{η·sin θ}`: neighbors on the left of
/// the goal bearing get a stiffer band, inducing right-hand passing.
pub fn rho(rho0: f64, eta: f64, theta: f64) -> f64 {
    rho0 * (eta * theta.sin()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p2(x: f64, y: f64) -> Point<2> {
        Point::<2>::new(x, y)
    }

    fn params() -> InterRobotParams {
        InterRobotParams { r_min: 0.6, epsilon: 0.12, beta: 0.3, rho0: 100.0, delta_eta: 0.5 }
    }

    #[test]
    fn halfspace_matches_hand_evaluation() {
        // r'_min = sqrt(0.6² + 0.2²·3²) = sqrt(0.72)
        let r_ext = params().r_min_ext(0.2, 3.0);
        assert_relative_eq!(r_ext, 0.72f64.sqrt(), epsilon = 1e-12);
        let hs = mbvc_halfspace(&p2(1.0, 0.0), &p2(-1.0, 0.0), r_ext, None).unwrap();
        assert_relative_eq!(hs.normal[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(hs.normal[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(hs.offset, 0.72f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(hs.offset, 0.42426, epsilon = 1e-5);
    }

    #[test]
    fn swapped_pair_gives_mirror_separation() {
        let r_ext = params().r_min_ext(0.2, 3.0);
        let a = p2(0.4, 0.7);
        let b = p2(-0.3, -0.2);
        let hs_i = mbvc_halfspace(&a, &b, r_ext, None).unwrap();
        let hs_j = mbvc_halfspace(&b, &a, r_ext, None).unwrap();
        assert!((hs_i.normal + hs_j.normal).norm() < 1e-12);
        // Summing the mirrored constraints: normal·(p_i - p_j) ≥
        // offset_i + offset_j = r'_min, so the midpoint terms cancel and
        // any compliant pair is separated by at least r'_min.
        assert_relative_eq!(hs_i.offset + hs_j.offset, r_ext, epsilon = 1e-12);
    }

    #[test]
    fn coincident_pair_errors() {
        assert!(matches!(
            mbvc_halfspace(&p2(1.0, 1.0), &p2(1.0, 1.0), 0.8, None),
            Err(CoordinationError::CoincidentPair { .. })
        ));
    }

    #[test]
    fn ellipsoid_scaling_compresses_normal() {
        // Vertical pair under E = diag(1, 1, 0.4): the plane normal in
        // scaled space follows E·Δ/.
        let e = Point::<3>::new(1.0, 1.0, 0.24 / 0.6);
        let a = Point::<3>::new(0.1, 0.0, 0.5);
        let b = Point::<3>::new(-0.1, 0.0, -0.5);
        let r_ext: f64 = 0.4;
        let hs = mbvc_halfspace(&a, &b, r_ext, Some(&e)).unwrap();
        let scaled_delta = Point::<3>::new(0.2, 0.0, 0.4);
        let expect = scaled_delta / scaled_delta.norm();
        assert!((hs.normal - expect).norm() < 1e-12);
        // Offset passes through the scaled midpoint plus half r'.
        let scaled_mid = Point::<3>::new(0.0, 0.0, 0.0);
        assert_relative_eq!(
            hs.offset,
            hs.normal.dot(&scaled_mid) + r_ext / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn constraint_counts() {
        let r_ext = params().r_min_ext(0.2, 3.0);
        let own = vec![p2(0.0, 0.0), p2(0.1, 0.0), p2(0.2, 0.0)];
        let nbr = vec![p2(2.0, 0.0), p2(2.0, 0.1), p2(2.0, 0.2)];
        let cons = interrobot_constraints(&own, &[(1, nbr)], r_ext, None).unwrap();
        assert_eq!(cons.len(), 1);
        assert_eq!(cons[0].hard.len(), 2);
        // With four robots fully pairwise, each robot owes three neighbors
        // one band variable each.
        let others: Vec<(usize, Vec<Point<2>>)> = (1..4)
            .map(|i| (i, vec![p2(2.0 * i as f64, 0.0); 3]))
            .collect();
        let cons4 = interrobot_constraints(&own, &others, r_ext, None).unwrap();
        assert_eq!(cons4.len(), 3);
    }

    #[test]
    fn exact_extended_distance_pair_has_zero_slack() {
        let r_ext = params().r_min_ext(0.2, 3.0);
        let a = p2(0.0, 0.0);
        let b = p2(r_ext, 0.0);
        let hs = mbvc_halfspace(&a, &b, r_ext, None).unwrap();
        assert_relative_eq!(hs.slack(&a), 0.0, epsilon = 1e-12);
        let hs_j = mbvc_halfspace(&b, &a, r_ext, None).unwrap();
        assert_relative_eq!(hs_j.slack(&b), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn band_weight_examples() {
        let p = params();
        // gamma = epsilon: coefficient rho0/epsilon².
        let w0 = warning_band_weight(p.rho0, p.epsilon, p.epsilon).unwrap();
        assert_relative_eq!(w0, p.rho0 / (p.epsilon * p.epsilon), epsilon = 1e-12);
        // Halving gamma doubles the coefficient.
        let w1 = warning_band_weight(p.rho0, p.epsilon / 2.0, p.epsilon).unwrap();
        assert_relative_eq!(w1, 2.0 * w0, epsilon = 1e-12);
        assert!(warning_band_weight(p.rho0, 0.0, p.epsilon).is_err());
    }

    #[test]
    fn gamma_recursion_chained_with_weight() {
        // epsilon = 0.1, beta = 0.5, prior w = 0, prior gamma = 0.1:
        // gamma -> 0.05, coefficient -> rho/(0.1*0.05) = 200 rho.
        let gamma = update_gamma(0.1, 0.0, 0.5, 0.1);
        assert_relative_eq!(gamma, 0.05, epsilon = 1e-12);
        let w = warning_band_weight(1.0, gamma, 0.1).unwrap();
        assert_relative_eq!(w, 200.0, epsilon = 1e-9);
    }

    #[test]
    fn gamma_fixed_point_and_limit() {
        assert_relative_eq!(update_gamma(0.07, 0.07, 0.3, 0.12), 0.07, epsilon = 1e-12);
        let mut g = 1e-5;
        for _ in 0..200 {
            g = update_gamma(g, 0.12, 0.3, 0.12);
        }
        assert_relative_eq!(g, 0.12, epsilon = 1e-9);
        // Decay from any start is clamped at 1e-6 epsilon.
        let mut g = 0.12;
        for _ in 0..2000 {
            g = update_gamma(g, 0.0, 0.3, 0.12);
        }
        assert_relative_eq!(g, 1e-6 * 0.12, epsilon = 1e-18);
    }

    #[test]
    fn terminal_overlap_detection() {
        let tol = 1e-3;
        let target = p2(5.0, 0.0);
        // Parked at the target: no overlap.
        let parked = vec![target; 4];
        assert!(!detect_terminal_overlap(&parked, &target, &target, tol));
        // Frozen far from the target: overlap.
        let frozen = vec![p2(1.0, 0.0); 4];
        assert!(detect_terminal_overlap(&frozen, &p2(1.0, 0.0), &target, tol));
        // Terminal drifting two tolerances per round: no overlap.
        let drifting = vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.998, 0.0), p2(2.0, 0.0)];
        assert!(!detect_terminal_overlap(&drifting, &p2(1.998, 0.0), &target, tol));
    }

    #[test]
    fn eta_branch_priority() {
        // Overlap escalates even when all bands are free.
        assert_relative_eq!(update_eta(0.0, true, true, 0.5), 0.5);
        // Free of every band: reset.
        assert_relative_eq!(update_eta(2.5, false, true, 0.5), 0.0);
        // Neither: carry over.
        assert_relative_eq!(update_eta(1.5, false, false, 0.5), 1.5);
    }

    #[test]
    fn rho_left_right_asymmetry() {
        let rho0 = 10.0;
        assert_relative_eq!(rho(rho0, 0.0, 1.234), rho0, epsilon = 1e-12);
        // Neighbor 90° to the left of the goal bearing.
        let left = theta_xy(&p2(0.0, 0.0), &p2(1.0, 0.0), &p2(0.0, 1.0));
        assert_relative_eq!(left, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(rho(rho0, 1.0, left), rho0 * std::f64::consts::E, epsilon = 1e-9);
        let right = theta_xy(&p2(0.0, 0.0), &p2(1.0, 0.0), &p2(0.0, -1.0));
        assert_relative_eq!(rho(rho0, 1.0, right), rho0 / std::f64::consts::E, epsilon = 1e-9);
    }

    #[test]
    fn theta_invariant_under_uniform_scaling() {
        let p = p2(0.3, -0.4);
        let t = p2(2.0, 1.0);
        let n = p2(-1.0, 2.0);
        let th = theta_xy(&p, &t, &n);
        let s = 17.0;
        let th_scaled = theta_xy(&(p * s), &(t * s), &(n * s));
        assert_relative_eq!(th, th_scaled, epsilon = 1e-12);
    }

    #[test]
    fn theta_degenerate_projection_is_zero() {
        let p = Point::<3>::new(0.0, 0.0, 0.0);
        let above = Point::<3>::new(0.0, 0.0, 2.0);
        let t = Point::<3>::new(1.0, 0.0, 0.0);
        assert_eq!(theta_xy(&p, &t, &above), 0.0);
    }
}
