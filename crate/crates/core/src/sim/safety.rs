//! Post-hoc safety verification of executed runs.
//!
//! The executed motion inside each sampling interval is the quadratic arc
//! induced by the constant first input. Sampling it at 10 ms bounds the
//! continuous-time pairwise distances and obstacle clearances the planner
//! promises.

use super::log::RunLog;
use super::scenario::Scenario;
use crate::geometry::{hull_distance, Point};

/// Sampling step of the checker, seconds.
const CHECK_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub description: String,
}

#[derive(Debug, Clone, Default)]
pub struct SafetyReport {
    /// Minimum pairwise center distance over the run (E-scaled in
    /// ellipsoid mode); `None` for a single robot.
    pub min_pairwise: Option<f64>,
    /// Minimum robot-obstacle clearance; `None` without obstacles.
    pub min_clearance: Option<f64>,
    pub first_violation: Option<Violation>,
}

impl SafetyReport {
    pub fn clean(&self) -> bool {
        self.first_violation.is_none()
    }
}

pub fn check_safety<const D: usize>(log: &RunLog, scenario: &Scenario<D>) -> SafetyReport {
    let h = scenario.params.h;
    let r_min = scenario.params.r_min;
    let r_a = scenario.params.r_a;
    let scale: Option<Point<D>> =
        scenario.params.ellipsoid.as_ref().map(|e| Point::from_column_slice(e));
    let mut report = SafetyReport::default();
    let mut record = |t: f64, desc: String, report: &mut SafetyReport| {
        if report.first_violation.is_none() {
            report.first_violation = Some(Violation { t, description: desc });
        }
    };

    let point_at = |rec: &super::log::RobotRecord, tau: f64| -> Point<D> {
        let p = Point::<D>::from_column_slice(&rec.anchor_position);
        let v = Point::<D>::from_column_slice(&rec.anchor_velocity);
        let u = Point::<D>::from_column_slice(&rec.inputs[0]);
        p + v * tau + u * (0.5 * tau * tau)
    };

    let steps = (h / CHECK_DT).round() as usize;
    for (ri, round) in log.rounds.iter().enumerate() {
        let last_round = ri + 1 == log.rounds.len();
        let top = if last_round { steps } else { steps - 1 };
        for s in 0..=top {
            let tau = s as f64 * CHECK_DT;
            let t = round.t + tau;
            let pts: Vec<Point<D>> = round.robots.iter().map(|r| point_at(r, tau)).collect();
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let delta = pts[i] - pts[j];
                    let dist = match &scale {
                        Some(e) => Point::<D>::from_fn(|k, _| delta[k] * e[k]).norm(),
                        None => delta.norm(),
                    };
                    let best = report.min_pairwise.get_or_insert(f64::INFINITY);
                    *best = best.min(dist);
                    if dist < r_min - 1e-6 {
                        record(
                            t,
                            format!("robots {i} and {j} at distance {dist:.6} < r_min"),
                            &mut report,
                        );
                    }
                }
                for (oi, obs) in scenario.obstacles.iter().enumerate() {
                    let clear = hull_distance(std::slice::from_ref(&pts[i]), obs.vertices());
                    let best = report.min_clearance.get_or_insert(f64::INFINITY);
                    *best = best.min(clear);
                    if clear < r_a - 1e-6 {
                        record(
                            t,
                            format!("robot {i} clearance {clear:.6} < r_a at obstacle {oi}"),
                            &mut report,
                        );
                    }
                }
            }
        }
    }
    report
}
