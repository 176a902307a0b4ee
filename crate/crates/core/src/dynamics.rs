//! Discrete double-integrator model: single steps, horizon rollouts and the
//! condensed input-to-state maps that keep the dynamics out of the QP.

use crate::geometry::Point;
use nalgebra::{DMatrix, DVector, SMatrix};

/// Planar/spatial state `(position, velocity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<const D: usize> {
    pub position: Point<D>,
    pub velocity: Point<D>,
}

impl<const D: usize> State<D> {
    pub fn at_rest(position: Point<D>) -> Self {
        Self { position, velocity: Point::zeros() }
    }

    /// Stacked `[p; v]` vector, the affine input of the condensed maps.
    pub fn stacked(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * D);
        for i in 0..D {
            v[i] = self.position[i];
            v[D + i] = self.velocity[i];
        }
        v
    }
}

/// One discrete double-integrator step over `h` seconds:
/// `p⁺ = p + h·v + h²/2·u`, `v⁺ = v + h·u`.
pub fn step<const D: usize>(x: &State<D>, u: &Point<D>, h: f64) -> State<D> {
    State {
        position: x.position + x.velocity * h + u * (0.5 * h * h),
        velocity: x.velocity + u * h,
    }
}

/// A planned trajectory: the anchor state (`k = 0`) followed by the `K`
/// planned states driven by `K` inputs.
///
/// `states[k] = step(states[k-1], inputs[k-1], h)` holds exactly;
/// `states.len() == inputs.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    pub states: Vec<State<D>>,
    pub inputs: Vec<Point<D>>,
    pub h: f64,
}

impl<const D: usize> Trajectory<D> {
    /// Horizon length `K`.
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    /// Planned position at horizon index `k ∈ 0..=K` (0 is the anchor).
    pub fn position(&self, k: usize) -> Point<D> {
        self.states[k].position
    }

    /// The planned positions `p_1 ... p_K`, excluding the anchor.
    pub fn planned_positions(&self) -> Vec<Point<D>> {
        self.states[1..].iter().map(|s| s.position).collect()
    }

    pub fn terminal(&self) -> &State<D> {
        self.states.last().unwrap()
    }

    /// Hold trajectory: stay at `x` with zero input for `k_horizon` steps.
    pub fn hold(x: State<D>, k_horizon: usize, h: f64) -> Self {
        rollout(&x, &vec![Point::zeros(); k_horizon], h)
    }

    /// Largest violation of the dynamics recursion, for audits.
    pub fn dynamics_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.states.len() {
            let pred = step(&self.states[k - 1], &self.inputs[k - 1], self.h);
            worst = worst
                .max((pred.position - self.states[k].position).amax())
                .max((pred.velocity - self.states[k].velocity).amax());
        }
        worst
    }
}

/// Iterates [`step`] over the input sequence, anchoring at `x0`.
pub fn rollout<const D: usize>(x0: &State<D>, inputs: &[Point<D>], h: f64) -> Trajectory<D> {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(*x0);
    for u in inputs {
        let next = step(states.last().unwrap(), u, h);
        states.push(next);
    }
    Trajectory { states, inputs: inputs.to_vec(), h }
}

/// Velocity, acceleration and horizon limits.
#[derive(Debug, Clone)]
pub struct Limits<const D: usize> {
    pub v_max: f64,
    pub a_max: f64,
    /// Positive-definite scalings inside the norm bounds
    /// `‖Θ_v v‖ ≤ v_max`, `‖Θ_a u‖ ≤ a_max`; identity by default.
    pub theta_v: SMatrix<f64, D, D>,
    pub theta_a: SMatrix<f64, D, D>,
    pub h: f64,
    pub k_horizon: usize,
}

impl<const D: usize> Limits<D> {
    pub fn new(v_max: f64, a_max: f64, h: f64, k_horizon: usize) -> Self {
        assert!(v_max > 0.0 && a_max > 0.0 && h > 0.0 && k_horizon >= 1);
        Self { v_max, a_max, theta_v: SMatrix::identity(), theta_a: SMatrix::identity(), h, k_horizon }
    }

    /// Reach of one full horizon at top speed, `K·h·v_max`.
    pub fn horizon_reach(&self) -> f64 {
        self.k_horizon as f64 * self.h * self.v_max
    }
}

/// Condensed linear maps from stacked inputs `U = [u_0; ...; u_{K-1}]` to
/// stacked planned positions/velocities `[x_1; ...; x_K]`:
/// `P = p_from_u · U + p_from_x0 · [p0; v0]`, same shape for velocities.
#[derive(Debug, Clone)]
pub struct CondensedMaps {
    pub p_from_u: DMatrix<f64>,
    pub v_from_u: DMatrix<f64>,
    pub p_from_x0: DMatrix<f64>,
    pub v_from_x0: DMatrix<f64>,
    dim: usize,
}

impl CondensedMaps {
    /// Rows of the position map for horizon `k ∈ 1..=K`.
    pub fn p_rows(&self, k: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.p_from_u.rows((k - 1) * self.dim, self.dim)
    }

    pub fn v_rows(&self, k: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.v_from_u.rows((k - 1) * self.dim, self.dim)
    }

    /// Affine position part at horizon `k` for anchor state `x0`.
    pub fn p_affine(&self, k: usize, x0_stacked: &DVector<f64>) -> DVector<f64> {
        self.p_from_x0.rows((k - 1) * self.dim, self.dim) * x0_stacked
    }

    pub fn v_affine(&self, k: usize, x0_stacked: &DVector<f64>) -> DVector<f64> {
        self.v_from_x0.rows((k - 1) * self.dim, self.dim) * x0_stacked
    }
}

/// Builds the condensed maps for a `K`-step horizon in `dim` dimensions:
/// `p_k = p_0 + k·h·v_0 + h² Σ_{j<k} (k - j - ½) u_j`,
/// `v_k = v_0 + h Σ_{j<k} u_j`.
pub fn condensed_maps(k_horizon: usize, h: f64, dim: usize) -> CondensedMaps {
    assert!(k_horizon >= 1);
    let kd = k_horizon * dim;
    let mut p_from_u = DMatrix::zeros(kd, kd);
    let mut v_from_u = DMatrix::zeros(kd, kd);
    let mut p_from_x0 = DMatrix::zeros(kd, 2 * dim);
    let mut v_from_x0 = DMatrix::zeros(kd, 2 * dim);
    for k in 1..=k_horizon {
        for j in 0..k {
            let p_coef = h * h * (k as f64 - j as f64 - 0.5);
            for i in 0..dim {
                p_from_u[((k - 1) * dim + i, j * dim + i)] = p_coef;
                v_from_u[((k - 1) * dim + i, j * dim + i)] = h;
            }
        }
        for i in 0..dim {
            p_from_x0[((k - 1) * dim + i, i)] = 1.0;
            p_from_x0[((k - 1) * dim + i, dim + i)] = k as f64 * h;
            v_from_x0[((k - 1) * dim + i, dim + i)] = 1.0;
        }
    }
    CondensedMaps { p_from_u, v_from_u, p_from_x0, v_from_x0, dim }
}

/// Stacks per-step inputs into the condensed variable vector.
pub fn stack_inputs<const D: usize>(inputs: &[Point<D>]) -> DVector<f64> {
    let mut u = DVector::zeros(inputs.len() * D);
    for (k, inp) in inputs.iter().enumerate() {
        for i in 0..D {
            u[k * D + i] = inp[i];
        }
    }
    u
}

/// Splits a condensed variable vector back into per-step inputs.
pub fn unstack_inputs<const D: usize>(u: &DVector<f64>, k_horizon: usize) -> Vec<Point<D>> {
    (0..k_horizon)
        .map(|k| Point::<D>::from_fn(|i, _| u[k * D + i]))
        .collect()
}
