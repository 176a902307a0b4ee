//! Run metrics: transition time, summed executed path length, mean
//! per-robot computation time and fallback count.

use super::log::{Outcome, RunLog};

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Completion time, seconds; absent for runs that did not complete.
    pub transition_time: Option<f64>,
    /// Summed executed path length over all robots, meters; absent for
    /// runs that did not complete.
    pub total_length: Option<f64>,
    /// Mean wall-clock per robot per replanning round, milliseconds.
    pub mean_solve_ms: f64,
    pub fallback_count: usize,
    pub rounds: usize,
}

pub fn metrics(log: &RunLog) -> Metrics {
    let dim = log.scenario.dim;
    let h = log.scenario.params.h;
    let completed = matches!(log.outcome, Outcome::Completed { .. });
    let transition_time = match log.outcome {
        Outcome::Completed { t } => Some(t),
        _ => None,
    };

    let mut solve_ms = 0.0;
    let mut solves = 0usize;
    let mut fallback_count = 0usize;
    let mut length = 0.0;
    for round in &log.rounds {
        for rec in &round.robots {
            solve_ms += rec.solve_ms;
            solves += 1;
            fallback_count += usize::from(rec.used_fallback);
            // Arc length of the executed quadratic segment, 10 ms polyline.
            let steps = (h / 0.01).round().max(1.0) as usize;
            let at = |tau: f64, i: usize| {
                rec.anchor_position[i]
                    + rec.anchor_velocity[i] * tau
                    + 0.5 * rec.inputs[0][i] * tau * tau
            };
            for s in 0..steps {
                let t0 = s as f64 * 0.01;
                let t1 = t0 + 0.01;
                let mut seg = 0.0;
                for i in 0..dim {
                    let d = at(t1, i) - at(t0, i);
                    seg += d * d;
                }
                length += seg.sqrt();
            }
        }
    }
    Metrics {
        transition_time,
        total_length: completed.then_some(length),
        mean_solve_ms: if solves > 0 { solve_ms / solves as f64 } else { 0.0 },
        fallback_count,
        rounds: log.rounds.len(),
    }
}
