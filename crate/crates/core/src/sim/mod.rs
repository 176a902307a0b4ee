//! Synchronous multi-robot simulation loop.
//!
//! Every round all robots exchange predetermined-trajectory snapshots,
//! plan concurrently against those immutable snapshots, and execute the
//! first step of their plans at a common barrier. Tracking is perfect by
//! assumption: the executed state at `t + h` is exactly the first planned
//! state.

pub mod log;
pub mod metrics;
pub mod safety;
pub mod scenario;
pub mod scenarios;

pub use log::{Outcome, RobotRecord, RoundRecord, RunLog};
pub use metrics::{metrics, Metrics};
pub use safety::{check_safety, SafetyReport};
pub use scenario::{AnyScenario, Params, Scenario, ScenarioError, ScenarioFile};

use crate::coordination::{
    detect_terminal_overlap, interrobot_constraints, rho, theta_xy, update_eta, update_gamma,
    warning_band_weight,
};
use crate::corridor::{build_corridor, build_ept, segment_division};
use crate::dynamics::{Limits, State, Trajectory};
use crate::geometry::Point;
use crate::mpc::{
    make_predetermined, solve_replan, CostWeights, PlanProblem, PlannerContext,
};
use crate::pathfind::{plan_path, select_tractive_point, Path};
use rayon::prelude::*;
use std::time::Instant;

/// Arrival tolerances of the completion test.
const ARRIVE_POS: f64 = 1e-3;
const ARRIVE_VEL: f64 = 1e-3;
/// Slack accepted when asserting that predetermined points satisfy their
/// own corridor: the separating margin inherits up to the solver's KKT
/// tolerance (1e-6) of feasibility dirt from the previous round.
const PREDETERMINED_SLACK: f64 = -2.5e-6;

struct Runtime<const D: usize> {
    state: State<D>,
    pred: Vec<Point<D>>,
    prev_plan: Trajectory<D>,
    /// Band history per other robot id (self slot unused).
    gammas: Vec<f64>,
    /// Last round's band intrusions per other robot id.
    w_prev: Option<Vec<f64>>,
    eta: f64,
    overlap: bool,
    path: Option<(Path<D>, Point<D>)>,
}

struct RoundOutput<const D: usize> {
    plan: crate::mpc::PlanResult<D>,
    gammas: Vec<f64>,
    eta: f64,
    overlap: bool,
    new_path: Option<(Path<D>, Point<D>)>,
    solve_ms: f64,
}

/// Runs the scenario to completion, timeout, or invariant breach.
pub fn run_scenario<const D: usize>(sc: &Scenario<D>) -> RunLog {
    let n = sc.robots.len();
    let params = &sc.params;
    let limits = Limits::<D>::new(params.v_max, params.a_max, params.h, params.horizon);
    let scaling: Option<Point<D>> =
        params.ellipsoid.as_ref().map(|e| Point::from_column_slice(e));
    let ctx = PlannerContext::new(
        limits,
        CostWeights { q_step: params.q_step, q_terminal: params.q_terminal },
        params.facets,
        params.epsilon,
        scaling,
    )
    .expect("validated scenario parameters");
    let r_ext = params.plan_separation();
    let reach = params.horizon_reach();
    let clearance = params.plan_clearance();

    let mut runtimes: Vec<Runtime<D>> = sc
        .robots
        .iter()
        .map(|(start, _)| Runtime {
            state: State::at_rest(*start),
            pred: vec![*start; params.horizon],
            prev_plan: Trajectory::hold(State::at_rest(*start), params.horizon, params.h),
            gammas: vec![params.epsilon; n],
            w_prev: None,
            eta: 0.0,
            overlap: false,
            path: None,
        })
        .collect();

    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut round_idx = 0usize;
    let max_rounds = (sc.time_cap / params.h).ceil() as usize;

    let outcome = loop {
        let t = round_idx as f64 * params.h;
        let done = runtimes.iter().zip(&sc.robots).all(|(rt, (_, target))| {
            (rt.state.position - target).norm() <= ARRIVE_POS
                && rt.state.velocity.norm() < ARRIVE_VEL
        });
        if done {
            break Outcome::Completed { t };
        }
        if round_idx >= max_rounds {
            break Outcome::Timeout;
        }

        // Immutable snapshot of every predetermined trajectory.
        let snapshot: Vec<Vec<Point<D>>> = runtimes.iter().map(|r| r.pred.clone()).collect();

        let results: Vec<Result<RoundOutput<D>, String>> = (0..n)
            .into_par_iter()
            .map(|i| plan_one(i, sc, &ctx, &runtimes[i], &snapshot, r_ext, reach, clearance))
            .collect();

        if let Some((i, err)) = results
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.as_ref().err().map(|e| (i, e.clone())))
        {
            break Outcome::InvariantBreach {
                round: round_idx,
                message: format!("robot {i}: {err}"),
            };
        }

        let mut records = Vec::with_capacity(n);
        for (rt, result) in runtimes.iter_mut().zip(results) {
            let out = result.expect("errors handled above");
            let traj = &out.plan.trajectory;
            records.push(RobotRecord {
                anchor_position: rt.state.position.as_slice().to_vec(),
                anchor_velocity: rt.state.velocity.as_slice().to_vec(),
                positions: (1..=traj.horizon())
                    .map(|k| traj.position(k).as_slice().to_vec())
                    .collect(),
                velocities: (1..=traj.horizon())
                    .map(|k| traj.states[k].velocity.as_slice().to_vec())
                    .collect(),
                inputs: traj.inputs.iter().map(|u| u.as_slice().to_vec()).collect(),
                w: out.plan.w.clone(),
                eta: out.eta,
                terminal_overlap: out.overlap,
                used_fallback: out.plan.used_fallback,
                solve_ms: out.solve_ms,
            });
            // Execute the first planned step and shift bookkeeping.
            rt.state = traj.states[1];
            rt.pred = make_predetermined(traj);
            rt.gammas = out.gammas;
            let mut w_ids = vec![0.0; n];
            for (id, w) in &out.plan.w {
                w_ids[*id] = *w;
            }
            rt.w_prev = Some(w_ids);
            rt.eta = out.eta;
            rt.overlap = out.overlap;
            if let Some(p) = out.new_path {
                rt.path = Some(p);
            }
            rt.prev_plan = out.plan.trajectory;
        }
        rounds.push(RoundRecord { t, robots: records });
        round_idx += 1;
    };

    RunLog { scenario: sc.to_file_form(), rounds, outcome }
}

#[allow(clippy::too_many_arguments)]
fn plan_one<const D: usize>(
    i: usize,
    sc: &Scenario<D>,
    ctx: &PlannerContext<D>,
    rt: &Runtime<D>,
    snapshot: &[Vec<Point<D>>],
    r_ext: f64,
    reach: f64,
    clearance: f64,
) -> Result<RoundOutput<D>, String> {
    let started = Instant::now();
    let params = &sc.params;
    let target = sc.robots[i].1;
    let anchor = *rt.pred.last().unwrap();

    // Band history and escalation updates from last round's results.
    let mut gammas = rt.gammas.clone();
    let mut all_w_zero = true;
    if let Some(w_prev) = &rt.w_prev {
        for (j, g) in gammas.iter_mut().enumerate() {
            if j != i {
                // The band history tracks the remaining margin: untouched
                // bands stay soft, sustained deep intrusion stiffens the
                // weight and expels campers from the band.
                let margin = (params.epsilon - w_prev[j]).clamp(0.0, params.epsilon);
                *g = update_gamma(*g, margin, params.beta, params.epsilon);
            }
        }
        all_w_zero = w_prev.iter().all(|&w| w <= 1e-9);
    }
    let eta = update_eta(rt.eta, rt.overlap, all_w_zero, params.delta_eta);

    // Tractive point from the cached path, replanning only when needed.
    let mut new_path = None;
    let cached = rt.path.as_ref().filter(|(_, tgt)| (tgt - target).norm() <= 1e-12);
    let tractive = match cached
        .and_then(|(p, _)| select_tractive_point(p, &anchor, &sc.obstacles, clearance))
    {
        Some(tp) => tp,
        None => {
            let path = plan_path(anchor, target, &sc.obstacles, clearance)
                .map_err(|e| format!("path planning failed: {e}"))?;
            let tp = select_tractive_point(&path, &anchor, &sc.obstacles, clearance)
                .ok_or_else(|| "fresh path has no visible tractive point".to_string())?;
            new_path = Some((path, target));
            tp
        }
    };

    // Safe corridor around the predetermined trajectory.
    let ept = build_ept(&rt.pred, Some(tractive), rt.overlap);
    let segments = segment_division(&ept, &sc.obstacles, clearance)
        .map_err(|e| format!("segment division failed: {e}"))?;
    let built = build_corridor(&segments, &ept, &sc.obstacles, clearance, reach, &rt.pred[0])
        .map_err(|e| format!("corridor construction failed: {e}"))?;
    let slack = built.corridor.min_slack(&rt.pred);
    if slack < PREDETERMINED_SLACK {
        return Err(format!(
            "predetermined trajectory violates its own corridor (slack {slack:.3e})"
        ));
    }

    // Inter-robot constraints against the snapshot.
    let neighbors: Vec<(usize, Vec<Point<D>>)> = (0..snapshot.len())
        .filter(|&j| j != i)
        .map(|j| (j, snapshot[j].clone()))
        .collect();
    let inter = interrobot_constraints(&rt.pred, &neighbors, r_ext, ctx.scaling.as_ref())
        .map_err(|e| format!("inter-robot constraints failed: {e}"))?;
    let own_terminal = *rt.pred.last().unwrap();
    let band_weights: Vec<f64> = inter
        .iter()
        .map(|nc| {
            let nbr_terminal = snapshot[nc.neighbor].last().unwrap();
            let theta = theta_xy(&own_terminal, &target, nbr_terminal);
            warning_band_weight(rho(params.rho0, eta, theta), gammas[nc.neighbor], params.epsilon)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;

    // While escalated, attract slightly to the right of the tractive
    // direction. Mirror-symmetric encounters otherwise stall with the
    // neighbor dead ahead (sin θ = 0 gives the exponential reweighting no
    // asymmetry to amplify); the bias seeds the lateral drift and only
    // touches the cost, never the separation constraints.
    let cost_tractive = if eta > 0.0 {
        rotate_right_xy(&anchor, &tractive, (0.12 * eta).min(0.35))
    } else {
        tractive
    };

    let problem = PlanProblem {
        x0: rt.state,
        tractive: cost_tractive,
        corridor: &built.corridor,
        inter: &inter,
        band_weights: &band_weights,
    };
    let plan =
        solve_replan(ctx, &problem, &rt.prev_plan).map_err(|e| format!("replanning failed: {e}"))?;

    let overlap = detect_terminal_overlap(
        &plan.trajectory.planned_positions(),
        &own_terminal,
        &target,
        params.tol_pos,
    );
    let solve_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(RoundOutput { plan, gammas, eta, overlap, new_path, solve_ms })
}

/// Rotates `point` clockwise by `phi` in the x-y plane around `center`.
fn rotate_right_xy<const D: usize>(center: &Point<D>, point: &Point<D>, phi: f64) -> Point<D> {
    let d = point - center;
    let (x, y) = (d[0], d[1]);
    let mut out = *point;
    out[0] = center[0] + x * phi.cos() + y * phi.sin();
    out[1] = center[1] - x * phi.sin() + y * phi.cos();
    out
}

/// Runs a dimension-erased scenario.
pub fn run_any(sc: &AnyScenario) -> RunLog {
    match sc {
        AnyScenario::D2(s) => run_scenario(s),
        AnyScenario::D3(s) => run_scenario(s),
    }
}

/// Safety check for a dimension-erased scenario/log pair.
pub fn check_any(log: &RunLog, sc: &AnyScenario) -> SafetyReport {
    match sc {
        AnyScenario::D2(s) => check_safety(log, s),
        AnyScenario::D3(s) => check_safety(log, s),
    }
}
