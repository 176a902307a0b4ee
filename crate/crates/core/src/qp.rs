//! Dense convex quadratic programming.
//!
//! One solver backs both the per-robot planning program and the small
//! separating-plane programs: the dual active-set method of Goldfarb and
//! Idnani. It needs no feasible starting point, terminates finitely, and
//! detects primal infeasibility with a Farkas certificate, which the
//! planner relies on to distinguish "numerical trouble, use the fallback"
//! from "the feasibility invariant is broken".
//!
//! Problems are posed as
//! `min ½ zᵀHz + fᵀz  s.t.  rowᵀz ≥ bound, eqᵀz = value, lo ≤ z ≤ hi`.

use crate::geometry::{ConvexObstacle, GeometryError, HalfSpace, Point};
use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

/// Diagonal regularization added to the Hessian before factorization.
const DIAG_REG: f64 = 1e-10;
/// Iteration cap across constraint additions and drops.
const MAX_ITER: usize = 20_000;
/// A solve only reports `Optimal` below this KKT residual.
const KKT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("hessian is not symmetric")]
    NotSymmetric,
    #[error("hessian is not positive semidefinite")]
    NotPsd,
    #[error("non-finite value in problem data")]
    NonFinite,
    #[error("point sets are not strictly separable (Farkas gap {gap:.3e})")]
    NotSeparable { gap: f64 },
    #[error("separating-plane solve stalled")]
    Stalled,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    /// Rows `(normal, bound)` meaning `normal · z ≥ bound`.
    pub inequalities: Vec<(DVector<f64>, f64)>,
    /// Rows `(normal, value)` meaning `normal · z = value`.
    pub equalities: Vec<(DVector<f64>, f64)>,
    /// Optional per-variable box; use infinities for one-sided bounds.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl QuadraticProgram {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>) -> Self {
        Self { hessian, linear, inequalities: Vec::new(), equalities: Vec::new(), bounds: None }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    /// Inequality list with box bounds expanded to rows, in the order the
    /// solver sees them (and the order of `ineq_multipliers`).
    pub fn expanded_inequalities(&self) -> Vec<(DVector<f64>, f64)> {
        let n = self.num_vars();
        let mut rows = self.inequalities.clone();
        if let Some(bounds) = &self.bounds {
            for (i, (lo, hi)) in bounds.iter().enumerate() {
                if lo.is_finite() {
                    let mut r = DVector::zeros(n);
                    r[i] = 1.0;
                    rows.push((r, *lo));
                }
                if hi.is_finite() {
                    let mut r = DVector::zeros(n);
                    r[i] = -1.0;
                    rows.push((r, -hi));
                }
            }
        }
        rows
    }

    fn validate(&self) -> Result<(), QpError> {
        let n = self.num_vars();
        if self.hessian.nrows() != n || self.hessian.ncols() != n {
            return Err(QpError::Dimension(format!(
                "hessian is {}x{}, expected {n}x{n}",
                self.hessian.nrows(),
                self.hessian.ncols()
            )));
        }
        if !self.hessian.iter().all(|v| v.is_finite()) || !self.linear.iter().all(|v| v.is_finite())
        {
            return Err(QpError::NonFinite);
        }
        for (i, (row, bound)) in self.equalities.iter().chain(&self.inequalities).enumerate() {
            if row.len() != n {
                return Err(QpError::Dimension(format!("constraint {i} has {} entries", row.len())));
            }
            if !row.iter().all(|v| v.is_finite()) || !bound.is_finite() {
                return Err(QpError::NonFinite);
            }
        }
        if let Some(b) = &self.bounds {
            if b.len() != n {
                return Err(QpError::Dimension("bounds length mismatch".into()));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.hessian[(i, j)] - self.hessian[(j, i)]).abs() > 1e-9 {
                    return Err(QpError::NotSymmetric);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QpStatus {
    Optimal,
    /// Primal infeasibility proved: a nonnegative combination of constraint
    /// rows yields an unsatisfiable bound, exceeding it by `farkas_gap`.
    Infeasible { farkas_gap: f64 },
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub status: QpStatus,
    pub kkt_residual: f64,
    pub objective: f64,
    /// One multiplier per row of `expanded_inequalities`, nonnegative.
    pub ineq_multipliers: Vec<f64>,
    pub eq_multipliers: Vec<f64>,
}

/// Givens rotation zeroing `b` against `a`, in the rank-one update form of
/// the classic quadprog routine: returns `(c, s, nu)`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    let h = a.hypot(b).copysign(a);
    (a / h, b / h, b / (a + h))
}

fn apply_givens_columns(j: &mut DMatrix<f64>, col_a: usize, col_b: usize, c: f64, s: f64, nu: f64) {
    let n = j.nrows();
    for row in 0..n {
        let t = c * j[(row, col_a)] + s * j[(row, col_b)];
        j[(row, col_b)] = nu * (j[(row, col_a)] + t) - j[(row, col_b)];
        j[(row, col_a)] = t;
    }
}

/// Solves the program with the Goldfarb–Idnani dual active-set method.
///
/// `Optimal` guarantees a KKT residual at most 1e-6; `Infeasible` is only
/// reported together with a Farkas certificate; `MaxIter` means the caller
/// must fall back (the iterate in `z` is the last dual-feasible point).
pub fn solve_qp(qp: &QuadraticProgram) -> Result<QpSolution, QpError> {
    qp.validate()?;
    let n = qp.num_vars();
    let meq = qp.equalities.len();
    let ineq_rows = qp.expanded_inequalities();
    let m = meq + ineq_rows.len();

    // Jacobi scaling: substitute z = z'/d with d_i = max(√H_ii, 1), which
    // flattens large penalty weights out of the Hessian. Multipliers are
    // unchanged by this substitution; only z needs unscaling at the end.
    let scale_d: Vec<f64> =
        (0..n).map(|i| qp.hessian[(i, i)].max(0.0).sqrt().max(1.0)).collect();

    // Column k of `normals` holds constraint k's (scaled) normal;
    // equalities first.
    let mut normals = DMatrix::<f64>::zeros(n, m);
    let mut bounds = DVector::<f64>::zeros(m);
    for (k, (row, b)) in qp.equalities.iter().chain(&ineq_rows).enumerate() {
        let scaled = DVector::from_fn(n, |i, _| row[i] / scale_d[i]);
        normals.set_column(k, &scaled);
        bounds[k] = *b;
    }
    let norm_scale: Vec<f64> = (0..m).map(|k| normals.column(k).norm().max(1e-30)).collect();

    let mut h_scaled =
        DMatrix::from_fn(n, n, |i, j| qp.hessian[(i, j)] / (scale_d[i] * scale_d[j]));
    let reg = DIAG_REG * (1.0 + h_scaled.diagonal().amax());
    for i in 0..n {
        h_scaled[(i, i)] += reg;
    }
    let f_scaled = DVector::from_fn(n, |i, _| qp.linear[i] / scale_d[i]);
    let chol = Cholesky::new(h_scaled).ok_or(QpError::NotPsd)?;
    let mut z = chol.solve(&(-&f_scaled));
    // J = L^{-T}: its trailing columns span the null space of the active
    // normals in the metric of H.
    let mut j_mat = chol
        .l()
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or(QpError::NotPsd)?;

    // R is upper triangular, packed by columns: column q at offset q(q+1)/2.
    let mut r_packed: Vec<f64> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut act_sign: Vec<f64> = Vec::new();
    let mut u: Vec<f64> = Vec::new();

    let mut iter = 0usize;
    let mut d = DVector::<f64>::zeros(n);
    let mut z_dir = DVector::<f64>::zeros(n);

    'outer: loop {
        // Most violated constraint, violation measured per unit normal.
        let mut iadd = usize::MAX;
        let mut worst = 1e-11;
        for k in 0..m {
            if active.contains(&k) {
                continue;
            }
            let s = normals.column(k).dot(&z) - bounds[k];
            let v = if k < meq { s.abs() } else { -s } / norm_scale[k];
            if v > worst {
                worst = v;
                iadd = k;
            }
        }
        if iadd == usize::MAX {
            break 'outer;
        }

        let sign = if iadd < meq && normals.column(iadd).dot(&z) - bounds[iadd] > 0.0 {
            -1.0
        } else {
            1.0
        };
        let n_add = normals.column(iadd) * sign;
        let b_add = bounds[iadd] * sign;
        let mut slack = n_add.dot(&z) - b_add;
        let mut u_add = 0.0;

        loop {
            iter += 1;
            if iter > MAX_ITER {
                let z = unscale(&z, &scale_d);
                return Ok(finish(qp, &ineq_rows, z, QpStatus::MaxIter, &active, &act_sign, &u, meq));
            }
            let q = active.len();
            d.gemv_tr(1.0, &j_mat, &n_add, 0.0);
            z_dir.fill(0.0);
            for i in q..n {
                let di = d[i];
                if di != 0.0 {
                    z_dir.iter_mut().zip(j_mat.column(i).iter()).for_each(|(zd, jv)| *zd += di * jv);
                }
            }
            // r = R⁻¹ d₁: back substitution on the packed triangle.
            let mut r_dir = vec![0.0; q];
            r_dir.copy_from_slice(&d.as_slice()[..q]);
            for i in (0..q).rev() {
                let start = i * (i + 1) / 2;
                r_dir[i] /= r_packed[start + i];
                let ri = r_dir[i];
                for (l, item) in r_dir.iter_mut().enumerate().take(i) {
                    *item -= r_packed[start + l] * ri;
                }
            }

            let mut t1 = f64::INFINITY;
            let mut idel = usize::MAX;
            for (i, (&r_i, &k)) in r_dir.iter().zip(active.iter()).enumerate() {
                if k >= meq && r_i > 1e-12 {
                    let step = u[i] / r_i;
                    if step < t1 {
                        t1 = step;
                        idel = i;
                    }
                }
            }

            let denom = z_dir.dot(&n_add);
            let t2 = if denom.abs() <= 1e-13 { f64::INFINITY } else { -slack / denom };

            if !t1.is_finite() && !t2.is_finite() {
                // n_add = Σ rᵢ nᵢ over the active set with rᵢ ≤ 0 on
                // inequalities, so every feasible point would violate iadd.
                let gap: f64 = b_add
                    - r_dir
                        .iter()
                        .zip(active.iter().zip(&act_sign))
                        .map(|(&r_i, (&k, &s))| r_i * bounds[k] * s)
                        .sum::<f64>();
                let status = QpStatus::Infeasible { farkas_gap: gap };
                let z = unscale(&z, &scale_d);
                return Ok(finish(qp, &ineq_rows, z, status, &active, &act_sign, &u, meq));
            }

            let full_step = t2 <= t1;
            let t = if full_step { t2 } else { t1 };

            if t2.is_finite() {
                z.axpy(t, &z_dir, 1.0);
                slack = n_add.dot(&z) - b_add;
            }
            for (ui, &ri) in u.iter_mut().zip(&r_dir) {
                *ui -= t * ri;
            }
            u_add += t;

            if full_step {
                // Add iadd: rotate d's tail onto position q and grow R.
                for i in ((q + 1)..n).rev() {
                    if d[i] == 0.0 {
                        continue;
                    }
                    if d[i - 1] == 0.0 {
                        d[i - 1] = d[i];
                        j_mat.swap_columns(i - 1, i);
                    } else {
                        let (c, s, nu) = givens(d[i - 1], d[i]);
                        d[i - 1] = d[i - 1].hypot(d[i]).copysign(d[i - 1]);
                        apply_givens_columns(&mut j_mat, i - 1, i, c, s, nu);
                    }
                }
                r_packed.extend_from_slice(&d.as_slice()[..=q]);
                active.push(iadd);
                act_sign.push(sign);
                u.push(u_add);
                continue 'outer;
            }

            // Partial step: drop the blocking constraint and retry iadd.
            qr_delete(idel, &mut r_packed, &mut j_mat, active.len());
            active.remove(idel);
            act_sign.remove(idel);
            u.remove(idel);
        }
    }

    let z = unscale(&z, &scale_d);
    Ok(finish(qp, &ineq_rows, z, QpStatus::Optimal, &active, &act_sign, &u, meq))
}


fn unscale(z: &DVector<f64>, d: &[f64]) -> DVector<f64> {
    DVector::from_fn(z.len(), |i, _| z[i] / d[i])
}

/// Removes packed-R column `idel` and restores triangularity, applying the
/// same rotations to the columns of `j_mat`.
fn qr_delete(idel: usize, r_packed: &mut Vec<f64>, j_mat: &mut DMatrix<f64>, q: usize) {
    for i in (idel + 1)..q {
        let di = i * (i + 1) / 2;
        let l = di + i;
        if r_packed[l] != 0.0 {
            if r_packed[l - 1] == 0.0 {
                let mut ind = l;
                for jj in (i + 1)..=q {
                    r_packed.swap(ind - 1, ind);
                    ind += jj;
                }
                j_mat.swap_columns(i - 1, i);
            } else {
                let (c, s, nu) = givens(r_packed[l - 1], r_packed[l]);
                let mut ind = l;
                for jj in (i + 1)..=q {
                    let t = c * r_packed[ind - 1] + s * r_packed[ind];
                    r_packed[ind] = nu * (r_packed[ind - 1] + t) - r_packed[ind];
                    r_packed[ind - 1] = t;
                    ind += jj;
                }
                apply_givens_columns(j_mat, i - 1, i, c, s, nu);
            }
        }
        // Shift column i of R into slot i-1.
        let (before, from) = r_packed.split_at_mut(di);
        before[di - i..].swap_with_slice(&mut from[..i]);
    }
    r_packed.truncate(q * (q - 1) / 2);
}

#[allow(clippy::too_many_arguments)]
fn finish(
    qp: &QuadraticProgram,
    ineq_rows: &[(DVector<f64>, f64)],
    z: DVector<f64>,
    status: QpStatus,
    active: &[usize],
    act_sign: &[f64],
    u: &[f64],
    meq: usize,
) -> QpSolution {
    let mut eq_mult = vec![0.0; meq];
    let mut ineq_mult = vec![0.0; ineq_rows.len()];
    for ((&k, &s), &ui) in active.iter().zip(act_sign).zip(u) {
        if k < meq {
            eq_mult[k] = s * ui;
        } else {
            ineq_mult[k - meq] = ui;
        }
    }
    let mut z = z;
    let mut kkt = kkt_residual(qp, ineq_rows, &z, &eq_mult, &ineq_mult);
    // One direct solve of the KKT system over the final active set
    // tightens the residual left by the iterative updates, which matters
    // when the Hessian carries large penalty weights.
    if matches!(status, QpStatus::Optimal) && kkt > 1e-9 {
        if let Some((pz, pe, pi)) = polish(qp, ineq_rows, &eq_mult, &ineq_mult) {
            let pk = kkt_residual(qp, ineq_rows, &pz, &pe, &pi);
            if pk < kkt {
                z = pz;
                eq_mult = pe;
                ineq_mult = pi;
                kkt = pk;
            }
        }
    }
    let objective = 0.5 * (&qp.hessian * &z).dot(&z) + qp.linear.dot(&z);
    let status = match status {
        QpStatus::Optimal if kkt > KKT_TOL => QpStatus::MaxIter,
        s => s,
    };
    QpSolution {
        z,
        status,
        kkt_residual: kkt,
        objective,
        ineq_multipliers: ineq_mult,
        eq_multipliers: eq_mult,
    }
}

/// Re-solves the equality-constrained problem induced by the active set.
fn polish(
    qp: &QuadraticProgram,
    ineq_rows: &[(DVector<f64>, f64)],
    eq_mult: &[f64],
    ineq_mult: &[f64],
) -> Option<(DVector<f64>, Vec<f64>, Vec<f64>)> {
    let n = qp.num_vars();
    let active: Vec<usize> =
        (0..ineq_rows.len()).filter(|&i| ineq_mult[i] > 0.0).collect();
    let meq = qp.equalities.len();
    let q = meq + active.len();
    if q > n {
        return None;
    }
    let dim = n + q;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    kkt.view_mut((0, 0), (n, n)).copy_from(&qp.hessian);
    rhs.rows_mut(0, n).copy_from(&(-&qp.linear));
    for (col, (row, b)) in qp
        .equalities
        .iter()
        .chain(active.iter().map(|&i| &ineq_rows[i]))
        .enumerate()
    {
        for r in 0..n {
            kkt[(r, n + col)] = -row[r];
            kkt[(n + col, r)] = row[r];
        }
        rhs[n + col] = *b;
    }
    let sol = kkt.lu().solve(&rhs)?;
    if !sol.iter().all(|v| v.is_finite()) {
        return None;
    }
    let z = sol.rows(0, n).into_owned();
    let mut pe = eq_mult.to_vec();
    for (k, pe_k) in pe.iter_mut().enumerate() {
        *pe_k = sol[n + k];
    }
    let mut pi = vec![0.0; ineq_rows.len()];
    for (idx, &i) in active.iter().enumerate() {
        let lam = sol[n + meq + idx];
        if lam < -1e-9 {
            return None; // active set mismatch, keep the iterative solution
        }
        pi[i] = lam.max(0.0);
    }
    Some((z, pe, pi))
}

/// Max over stationarity, primal feasibility, dual feasibility and
/// complementary slackness, evaluated on the unregularized problem.
pub fn kkt_residual(
    qp: &QuadraticProgram,
    ineq_rows: &[(DVector<f64>, f64)],
    z: &DVector<f64>,
    eq_mult: &[f64],
    ineq_mult: &[f64],
) -> f64 {
    let mut grad = &qp.hessian * z + &qp.linear;
    for ((row, _), &nu) in qp.equalities.iter().zip(eq_mult) {
        grad.axpy(-nu, row, 1.0);
    }
    for ((row, _), &lam) in ineq_rows.iter().zip(ineq_mult) {
        if lam != 0.0 {
            grad.axpy(-lam, row, 1.0);
        }
    }
    let mut res = grad.amax();
    for (row, b) in &qp.equalities {
        res = res.max((row.dot(z) - b).abs());
    }
    for ((row, b), &lam) in ineq_rows.iter().zip(ineq_mult) {
        let slack = row.dot(z) - b;
        res = res.max(-slack);
        res = res.max(-lam);
        res = res.max((lam * slack).abs());
    }
    res
}

/// Maximum-margin separating plane between a free point set and an
/// obstacle, via the quadratic program
/// `min ‖a‖²  s.t.  aᵀp ≥ 1 + b (free),  aᵀv ≤ b (obstacle)`.
///
/// Returns the normalized plane and its margin: every free point satisfies
/// `normal · p ≥ offset + margin`, every obstacle vertex
/// `normal · v ≤ offset`, and the margin equals the hull distance.
pub fn separating_plane<const D: usize>(
    free: &[Point<D>],
    obstacle: &ConvexObstacle<D>,
) -> Result<(HalfSpace<D>, f64), QpError> {
    assert!(!free.is_empty(), "separating_plane needs free points");
    let n = D + 1;
    // Recenter on the joint centroid so the offset variable stays
    // well-scaled far from the origin.
    let mut center = Point::<D>::zeros();
    for p in free.iter().chain(obstacle.vertices()) {
        center += p;
    }
    center /= (free.len() + obstacle.vertices().len()) as f64;

    let mut hessian = DMatrix::<f64>::zeros(n, n);
    for i in 0..D {
        hessian[(i, i)] = 2.0;
    }
    let mut qp = QuadraticProgram::new(hessian, DVector::zeros(n));
    for p in free {
        let mut row = DVector::zeros(n);
        for i in 0..D {
            row[i] = p[i] - center[i];
        }
        row[D] = -1.0;
        qp.inequalities.push((row, 1.0));
    }
    for v in obstacle.vertices() {
        let mut row = DVector::zeros(n);
        for i in 0..D {
            row[i] = -(v[i] - center[i]);
        }
        row[D] = 1.0;
        qp.inequalities.push((row, 0.0));
    }

    let sol = solve_qp(&qp)?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::Infeasible { farkas_gap } => {
            return Err(QpError::NotSeparable { gap: farkas_gap })
        }
        QpStatus::MaxIter => return Err(QpError::Stalled),
    }
    let mut a = Point::<D>::zeros();
    for i in 0..D {
        a[i] = sol.z[i];
    }
    let norm = a.norm();
    if norm < 1e-12 {
        return Err(QpError::NotSeparable { gap: 0.0 });
    }
    let normal = a / norm;
    let margin = 1.0 / norm;
    let offset = sol.z[D] / norm + normal.dot(&center);
    Ok((HalfSpace { normal, offset }, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hull_distance;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn p2(x: f64, y: f64) -> Point<2> {
        Point::<2>::new(x, y)
    }

    fn solve_expect_optimal(qp: &QuadraticProgram) -> QpSolution {
        let sol = solve_qp(qp).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal, "kkt={}", sol.kkt_residual);
        assert!(sol.kkt_residual <= 1e-6);
        sol
    }

    #[test]
    fn single_active_constraint() {
        // min (z-1)^2 s.t. z >= 2
        let mut qp = QuadraticProgram::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::from_element(1, -2.0),
        );
        qp.inequalities.push((DVector::from_element(1, 1.0), 2.0));
        let sol = solve_expect_optimal(&qp);
        assert_relative_eq!(sol.z[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.ineq_multipliers[0], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn unconstrained_minimum() {
        let qp = QuadraticProgram::new(DMatrix::identity(3, 3) * 2.0, DVector::zeros(3));
        let sol = solve_expect_optimal(&qp);
        assert!(sol.z.amax() < 1e-12);
    }

    #[test]
    fn symmetric_halfplane() {
        // min z1^2 + z2^2 s.t. z1 + z2 >= 2 -> (1, 1)
        let mut qp = QuadraticProgram::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2));
        qp.inequalities.push((DVector::from_vec(vec![1.0, 1.0]), 2.0));
        let sol = solve_expect_optimal(&qp);
        assert_relative_eq!(sol.z[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.z[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_constraint() {
        // min ||z||^2 s.t. z1 - z2 = 3 -> (1.5, -1.5)
        let mut qp = QuadraticProgram::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2));
        qp.equalities.push((DVector::from_vec(vec![1.0, -1.0]), 3.0));
        let sol = solve_expect_optimal(&qp);
        assert_relative_eq!(sol.z[0], 1.5, epsilon = 1e-9);
        assert_relative_eq!(sol.z[1], -1.5, epsilon = 1e-9);
    }

    #[test]
    fn box_bounds() {
        // min (z0-5)^2 + (z1+5)^2 within [0,1]^2
        let mut qp = QuadraticProgram::new(
            DMatrix::identity(2, 2) * 2.0,
            DVector::from_vec(vec![-10.0, 10.0]),
        );
        qp.bounds = Some(vec![(0.0, 1.0), (0.0, 1.0)]);
        let sol = solve_expect_optimal(&qp);
        assert_relative_eq!(sol.z[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.z[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_has_certificate() {
        // z >= 1 and -z >= 0 cannot both hold.
        let mut qp =
            QuadraticProgram::new(DMatrix::from_element(1, 1, 2.0), DVector::zeros(1));
        qp.inequalities.push((DVector::from_element(1, 1.0), 1.0));
        qp.inequalities.push((DVector::from_element(1, -1.0), 0.0));
        let sol = solve_qp(&qp).unwrap();
        match sol.status {
            QpStatus::Infeasible { farkas_gap } => assert!(farkas_gap > 0.9),
            s => panic!("expected infeasible, got {s:?}"),
        }
    }

    #[test]
    fn asymmetric_hessian_rejected() {
        let mut h = DMatrix::identity(2, 2);
        h[(0, 1)] = 0.5;
        let qp = QuadraticProgram::new(h, DVector::zeros(2));
        assert!(matches!(solve_qp(&qp), Err(QpError::NotSymmetric)));
    }

    #[test]
    fn random_qps_satisfy_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.random_range(2..6);
            let mmat = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let hessian = &mmat * mmat.transpose() + DMatrix::identity(n, n) * 0.1;
            let linear = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let mut qp = QuadraticProgram::new(hessian, linear);
            let feas = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            for _ in 0..rng.random_range(0..8) {
                let row = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let bound = row.dot(&feas) - rng.random_range(0.0..1.0);
                qp.inequalities.push((row, bound));
            }
            let sol = solve_expect_optimal(&qp);
            // Independent recomputation of the residual.
            let rows = qp.expanded_inequalities();
            let res = kkt_residual(&qp, &rows, &sol.z, &sol.eq_multipliers, &sol.ineq_multipliers);
            assert!(res <= 1e-6, "kkt residual {res}");
            assert!(sol.ineq_multipliers.iter().all(|&l| l >= -1e-9));
        }
    }

    #[test]
    fn plane_between_points_and_square() {
        let free = vec![p2(2.0, 0.0), p2(2.0, 1.0)];
        let obstacle = ConvexObstacle::new(vec![
            p2(0.0, 0.0),
            p2(1.0, 0.0),
            p2(1.0, 1.0),
            p2(0.0, 1.0),
        ])
        .unwrap();
        let (plane, margin) = separating_plane(&free, &obstacle).unwrap();
        assert_relative_eq!(plane.normal[0], 1.0, epsilon = 1e-7);
        assert_relative_eq!(plane.normal[1], 0.0, epsilon = 1e-7);
        assert_relative_eq!(plane.offset, 1.0, epsilon = 1e-7);
        assert_relative_eq!(margin, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn plane_between_point_pair() {
        // Near-degenerate obstacle around (-1, 0) against a single free
        // point at (1, 0): plane through the middle, margin the full gap.
        let free = vec![p2(1.0, 0.0)];
        let obstacle = ConvexObstacle::new(vec![
            p2(-1.0, 0.0),
            p2(-1.001, 0.001),
            p2(-1.001, -0.001),
        ])
        .unwrap();
        let (plane, margin) = separating_plane(&free, &obstacle).unwrap();
        assert_relative_eq!(plane.normal[0], 1.0, epsilon = 1e-3);
        assert_relative_eq!(margin, 2.0, epsilon = 2e-3);
        assert_relative_eq!(plane.offset, -1.0, epsilon = 2e-3);
    }

    #[test]
    fn margin_matches_hull_distance_on_translates() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..30 {
            let pts: Vec<Point<2>> = (0..6)
                .map(|_| p2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let obstacle = match ConvexObstacle::new(pts.clone()) {
                Ok(o) => o,
                Err(_) => continue,
            };
            let shift = p2(rng.random_range(2.5..6.0), rng.random_range(-1.0..1.0));
            let free: Vec<Point<2>> = pts.iter().map(|p| p + shift).collect();
            let (plane, margin) = separating_plane(&free, &obstacle).unwrap();
            let dist = hull_distance(&free, obstacle.vertices());
            assert_relative_eq!(margin, dist, epsilon = 1e-6);
            for p in &free {
                assert!(plane.slack(p) >= margin - 1e-9);
            }
            for v in obstacle.vertices() {
                assert!(plane.slack(v) <= 1e-9);
            }
        }
    }

    #[test]
    fn separating_plane_scale_invariance() {
        let base_free = vec![p2(2.0, 0.3), p2(2.5, 1.0), p2(2.2, -0.5)];
        let base_obs = vec![p2(0.0, 0.0), p2(1.0, 0.1), p2(0.5, 1.0)];
        let (pl1, m1) =
            separating_plane(&base_free, &ConvexObstacle::new(base_obs.clone()).unwrap()).unwrap();
        let s = 7.5;
        let scaled_free: Vec<Point<2>> = base_free.iter().map(|p| p * s).collect();
        let scaled_obs: Vec<Point<2>> = base_obs.iter().map(|p| p * s).collect();
        let (pl2, m2) =
            separating_plane(&scaled_free, &ConvexObstacle::new(scaled_obs).unwrap()).unwrap();
        assert_relative_eq!(m2, s * m1, epsilon = 1e-6);
        assert_relative_eq!(pl2.offset, s * pl1.offset, epsilon = 1e-6);
        assert!((pl2.normal - pl1.normal).norm() < 1e-6);
    }

    #[test]
    fn non_separable_errors() {
        let free = vec![p2(0.5, 0.5)];
        let obstacle = ConvexObstacle::new(vec![
            p2(0.0, 0.0),
            p2(1.0, 0.0),
            p2(1.0, 1.0),
            p2(0.0, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            separating_plane(&free, &obstacle),
            Err(QpError::NotSeparable { .. })
        ));
    }
}
