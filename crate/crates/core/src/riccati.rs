//! The two DARE iterations: the Riccati difference equation (value
//! iteration) and the Newton-Hewer method (policy iteration), with gains,
//! residuals, the fixed-point solver and time-varying parameter schedules.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    is_pd, is_psd, rank, solve_discrete_lyapunov, spectral_radius, CostMatrix, Matrix,
    SymmetricMatrix, DEFAULT_TOL, STABILITY_MARGIN,
};

/// One time slice of `(A, B, Q, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct SystemParams {
    a: Matrix,
    b: Matrix,
    q: SymmetricMatrix,
    r: SymmetricMatrix,
}

#[derive(Deserialize)]
struct RawSystem {
    a: Matrix,
    b: Matrix,
    q: SymmetricMatrix,
    r: SymmetricMatrix,
}

impl TryFrom<RawSystem> for SystemParams {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        SystemParams::new(raw.a, raw.b, raw.q, raw.r)
    }
}

impl SystemParams {
    /// Validates dimensions and requires `Q > 0`, `R > 0`.
    pub fn new(a: Matrix, b: Matrix, q: SymmetricMatrix, r: SymmetricMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if b.rows() != n || q.dim() != n || r.dim() != b.cols() {
            return Err(Error::DimensionMismatch(format!(
                "A {n}x{n}, B {}x{}, Q {}x{}, R {}x{}",
                b.rows(),
                b.cols(),
                q.dim(),
                q.dim(),
                r.dim(),
                r.dim()
            )));
        }
        if !is_pd(&q, DEFAULT_TOL)? {
            return Err(Error::NotPositiveDefinite("Q"));
        }
        if !is_pd(&r, DEFAULT_TOL)? {
            return Err(Error::NotPositiveDefinite("R"));
        }
        Ok(SystemParams { a, b, q, r })
    }

    pub fn scalar(a: f64, b: f64, q: f64, r: f64) -> Result<Self> {
        SystemParams::new(
            Matrix::scalar(a)?,
            Matrix::scalar(b)?,
            SymmetricMatrix::scalar(q)?,
            SymmetricMatrix::scalar(r)?,
        )
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn q(&self) -> &SymmetricMatrix {
        &self.q
    }

    pub fn r(&self) -> &SymmetricMatrix {
        &self.r
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    /// Same `(A, B, R)` with a different `Q`.
    pub fn with_q(&self, q: SymmetricMatrix) -> Result<Self> {
        SystemParams::new(self.a.clone(), self.b.clone(), q, self.r.clone())
    }

    fn check_cost(&self, p: &SymmetricMatrix) -> Result<()> {
        if p.dim() != self.state_dim() {
            return Err(Error::DimensionMismatch(format!(
                "P is {0}x{0}, system has n = {1}",
                p.dim(),
                self.state_dim()
            )));
        }
        Ok(())
    }

    fn check_gain(&self, k: &Matrix) -> Result<()> {
        if k.rows() != self.input_dim() || k.cols() != self.state_dim() {
            return Err(Error::DimensionMismatch(format!(
                "K is {}x{}, expected {}x{}",
                k.rows(),
                k.cols(),
                self.input_dim(),
                self.state_dim()
            )));
        }
        Ok(())
    }
}

/// How a schedule is extended past its last slice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    #[default]
    HoldLast,
    Cycle,
}

/// Time-indexed parameters; slice `t` (t >= 1) drives step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct ParameterSchedule {
    slices: Vec<SystemParams>,
    #[serde(default)]
    extension: Extension,
}

#[derive(Deserialize)]
struct RawSchedule {
    slices: Vec<SystemParams>,
    #[serde(default)]
    extension: Extension,
}

impl TryFrom<RawSchedule> for ParameterSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        ParameterSchedule::new(raw.slices, raw.extension)
    }
}

impl ParameterSchedule {
    pub fn new(slices: Vec<SystemParams>, extension: Extension) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidSystem("schedule has no slices".into()))?;
        let dims = (first.state_dim(), first.input_dim());
        if slices
            .iter()
            .any(|s| (s.state_dim(), s.input_dim()) != dims)
        {
            return Err(Error::DimensionMismatch(
                "schedule slices disagree on (n, m)".into(),
            ));
        }
        Ok(ParameterSchedule { slices, extension })
    }

    pub fn constant(sys: SystemParams) -> Self {
        ParameterSchedule {
            slices: vec![sys],
            extension: Extension::HoldLast,
        }
    }

    /// Scalar `A, B, R` held fixed with the given `Q_1, Q_2, ..`.
    pub fn scalar_q(a: f64, b: f64, r: f64, qs: &[f64], extension: Extension) -> Result<Self> {
        let slices = qs
            .iter()
            .map(|&q| SystemParams::scalar(a, b, q, r))
            .collect::<Result<Vec<_>>>()?;
        ParameterSchedule::new(slices, extension)
    }

    /// Slice for time step `t`, counting from 1.
    pub fn slice(&self, t: usize) -> &SystemParams {
        let t = t.max(1);
        let len = self.slices.len();
        match self.extension {
            Extension::HoldLast => &self.slices[t.min(len) - 1],
            Extension::Cycle => &self.slices[(t - 1) % len],
        }
    }

    pub fn slices(&self) -> &[SystemParams] {
        &self.slices
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn state_dim(&self) -> usize {
        self.slices[0].state_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.slices[0].input_dim()
    }
}

/// Feedback gain `K` with the closed loop `A - B K` of the slice it was
/// built against and that loop's spectral radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub k: Matrix,
    pub closed_loop: Matrix,
    pub rho: f64,
}

impl Gain {
    pub fn new(k: Matrix, sys: &SystemParams) -> Result<Self> {
        sys.check_gain(&k)?;
        let cl = sys.a.as_dmatrix() - sys.b.as_dmatrix() * k.as_dmatrix();
        let closed_loop = Matrix::from_dmatrix(cl)?;
        let rho = spectral_radius(&closed_loop)?;
        Ok(Gain {
            k,
            closed_loop,
            rho,
        })
    }

    pub fn is_stabilizing(&self) -> bool {
        self.rho < 1.0 - STABILITY_MARGIN
    }
}

/// Solves `(B^T P B + R) K = B^T P A` for `K`.
fn gain_parts(p: &CostMatrix, sys: &SystemParams) -> Result<DMatrix<f64>> {
    sys.check_cost(p)?;
    let (a, b, pm) = (sys.a.as_dmatrix(), sys.b.as_dmatrix(), p.as_dmatrix());
    let bt_p = b.transpose() * pm;
    let s = &bt_p * b + sys.r.as_dmatrix();
    let rhs = &bt_p * a;
    s.lu().solve(&rhs).ok_or(Error::Singular("B^T P B + R"))
}

/// `K = (B^T P B + R)^{-1} B^T P A`, computed by a linear solve.
pub fn optimal_gain(p: &CostMatrix, sys: &SystemParams) -> Result<Gain> {
    let k = gain_parts(p, sys)?;
    Gain::new(Matrix::from_dmatrix(k)?, sys)
}

/// One step of the Riccati difference equation:
/// `A^T P A - A^T P B (B^T P B + R)^{-1} B^T P A + Q`.
pub fn riccati_difference_step(p: &CostMatrix, sys: &SystemParams) -> Result<CostMatrix> {
    let k = gain_parts(p, sys)?;
    let (a, b, pm) = (sys.a.as_dmatrix(), sys.b.as_dmatrix(), p.as_dmatrix());
    let at_p = a.transpose() * pm;
    let next = &at_p * a - &at_p * b * k + sys.q.as_dmatrix();
    SymmetricMatrix::from_dmatrix(&next)
}

/// DARE residual `Ric(P) - P`; zero exactly at solutions.
pub fn dare_residual(p: &CostMatrix, sys: &SystemParams) -> Result<SymmetricMatrix> {
    riccati_difference_step(p, sys)?.sub(p)
}

/// Policy evaluation: the `P` with `P = (A-BK)^T P (A-BK) + K^T R K + Q`.
/// For `u = -K x` the infinite-horizon cost from `x0` is `x0^T P x0`.
///
/// The closed loop is rebuilt against `sys`, whatever slice `gain` came from.
pub fn evaluate_policy_cost(gain: &Gain, sys: &SystemParams) -> Result<CostMatrix> {
    let gain = Gain::new(gain.k.clone(), sys)?;
    let k = gain.k.as_dmatrix();
    let w = k.transpose() * sys.r.as_dmatrix() * k + sys.q.as_dmatrix();
    solve_discrete_lyapunov(&gain.closed_loop, &SymmetricMatrix::from_dmatrix(&w)?)
}

/// Newton-Hewer step: evaluate `gain` on `sys`, then improve it.
pub fn newton_hewer_step(gain: &Gain, sys: &SystemParams) -> Result<(CostMatrix, Gain)> {
    let p = evaluate_policy_cost(gain, sys)?;
    let next = optimal_gain(&p, sys)?;
    Ok((p, next))
}

/// Closed-form scalar Newton-Hewer map `p -> p'` with the gain induced by
/// `p` evaluated on the same `(a, b, q, r)`:
///
/// `p' = (a²b²p²r + qb⁴p² + 2qb²pr + qr²) / ((pb² + r + ar)(pb² + r - ar))`
///
/// The denominator equals `(pb² + r)² (1 - ρ²)` with `ρ = |a| r / (pb² + r)`
/// the closed-loop radius, so a vanishing or negative denominator means the
/// induced gain does not stabilize.
pub fn scalar_newton_hewer_step(p: f64, a: f64, b: f64, q: f64, r: f64) -> Result<f64> {
    if !(p.is_finite() && a.is_finite() && b.is_finite() && q.is_finite() && r.is_finite()) {
        return Err(Error::NonFinite);
    }
    if p < 0.0 || q <= 0.0 || r <= 0.0 {
        return Err(Error::InvalidSystem(format!(
            "need p >= 0, q > 0, r > 0 (p={p}, q={q}, r={r})"
        )));
    }
    let (a2, b2) = (a * a, b * b);
    let s = p * b2 + r;
    let rho = a.abs() * r / s;
    if rho >= 1.0 - STABILITY_MARGIN {
        return Err(Error::UnstableClosedLoop {
            rho,
            margin: STABILITY_MARGIN,
        });
    }
    let num = a2 * b2 * p * p * r + q * b2 * b2 * p * p + 2.0 * q * b2 * p * r + q * r * r;
    let den = (s + a * r) * (s - a * r);
    Ok(num / den)
}

/// Closed-form scalar Riccati difference map.
pub fn scalar_riccati_step(p: f64, a: f64, b: f64, q: f64, r: f64) -> f64 {
    a * a * p * r / (b * b * p + r) + q
}

/// `rank [B, AB, .., A^{n-1} B] = n`.
pub fn is_controllable(a: &Matrix, b: &Matrix) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}x{n} but B has {} rows",
            b.rows()
        )));
    }
    let m = b.cols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.as_dmatrix().clone();
    for i in 0..n {
        ctrb.view_mut((0, i * m), (n, m)).copy_from(&block);
        block = a.as_dmatrix() * block;
    }
    Ok(rank(&ctrb)? == n)
}

/// `(A, Q^{1/2})` observable, i.e. `(A^T, Q^{1/2})` controllable.
pub fn is_observable(a: &Matrix, q: &SymmetricMatrix) -> Result<bool> {
    let root = q.sqrt_psd(DEFAULT_TOL)?;
    is_controllable(&a.transpose(), &root.to_matrix())
}

/// Solves the DARE by Riccati difference iteration from `P_0 = Q`, stopping
/// once `|P_{k+1} - P_k|_F <= tol (1 + |P_k|_F)`.
pub fn solve_dare_fixed_point(sys: &SystemParams, tol: f64, max_iter: usize) -> Result<CostMatrix> {
    if !(tol > 0.0 && tol.is_finite()) || max_iter == 0 {
        return Err(Error::InvalidConfig(format!(
            "need tol > 0 and max_iter > 0 (tol={tol}, max_iter={max_iter})"
        )));
    }
    if !is_controllable(&sys.a, &sys.b)? {
        return Err(Error::InvalidSystem("(A, B) is not controllable".into()));
    }
    if !is_observable(&sys.a, &sys.q)? {
        return Err(Error::InvalidSystem("(A, Q^1/2) is not observable".into()));
    }
    let mut p = sys.q.clone();
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let next = riccati_difference_step(&p, sys)?;
        change = next.sub(&p)?.frobenius_norm();
        let done = change <= tol * (1.0 + p.frobenius_norm());
        p = next;
        if done {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RiccatiDifference,
    NewtonHewer,
}

/// Starting point of a trajectory: an initial gain `K_0` for Newton-Hewer,
/// or the first iterate `P_1` for the Riccati difference equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Gain(Matrix),
    Cost(SymmetricMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    /// `P_1 .. P_T`.
    pub iterates: Vec<CostMatrix>,
    /// For Newton-Hewer, `gains[t-1]` is the gain evaluated at step `t`
    /// (`K_{t-1}`), with its closed loop taken against slice `t`.
    pub gains: Vec<Gain>,
    pub schedule: ParameterSchedule,
}

impl Trajectory {
    /// Scalar iterates, for 1x1 trajectories.
    pub fn scalar_iterates(&self) -> Vec<f64> {
        self.iterates.iter().map(|p| p.get(0, 0)).collect()
    }
}

/// Runs `horizon` steps of `method`, step `t` consuming slice `t`.
///
/// Newton-Hewer: `P_t` evaluates `K_{t-1}` on slice `t`, and
/// `K_t = optimal_gain(P_t, slice t)`. Riccati difference: `P_1` is `init`
/// and `P_t = Ric(P_{t-1}; slice t)` for `t >= 2`.
pub fn run_trajectory(
    method: Method,
    init: &Init,
    schedule: &ParameterSchedule,
    horizon: usize,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let mut iterates = Vec::with_capacity(horizon);
    let mut gains = Vec::new();
    match (method, init) {
        (Method::NewtonHewer, Init::Gain(k0)) => {
            let mut k = k0.clone();
            for t in 1..=horizon {
                let sys = schedule.slice(t);
                let gain = Gain::new(k, sys)?;
                if !gain.is_stabilizing() {
                    return Err(Error::UnstableAtStep {
                        step: t,
                        rho: gain.rho,
                    });
                }
                let (p, next) = newton_hewer_step(&gain, sys).map_err(|e| match e {
                    Error::UnstableClosedLoop { rho, .. } => Error::UnstableAtStep { step: t, rho },
                    other => other,
                })?;
                log::trace!("newton-hewer step {t}: rho {:.6}", gain.rho);
                iterates.push(p);
                gains.push(gain);
                k = next.k;
            }
        }
        (Method::RiccatiDifference, Init::Cost(p1)) => {
            if p1.dim() != schedule.state_dim() {
                return Err(Error::DimensionMismatch("initial cost matrix".into()));
            }
            if !is_psd(p1, DEFAULT_TOL)? {
                return Err(Error::NotPositiveDefinite(
                    "initial cost matrix must be PSD",
                ));
            }
            let mut p = p1.clone();
            iterates.push(p.clone());
            for t in 2..=horizon {
                p = riccati_difference_step(&p, schedule.slice(t))?;
                iterates.push(p.clone());
            }
        }
        (Method::NewtonHewer, Init::Cost(_)) => {
            return Err(Error::InvalidConfig(
                "newton-hewer needs an initial gain".into(),
            ))
        }
        (Method::RiccatiDifference, Init::Gain(_)) => {
            return Err(Error::InvalidConfig(
                "riccati-difference needs an initial cost matrix".into(),
            ))
        }
    }
    Ok(Trajectory {
        method,
        iterates,
        gains,
        schedule: schedule.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    fn scalar_cost(p: f64) -> CostMatrix {
        SymmetricMatrix::scalar(p).unwrap()
    }

    fn scalar_gain(k: f64, sys: &SystemParams) -> Gain {
        Gain::new(Matrix::scalar(k).unwrap(), sys).unwrap()
    }

    #[test]
    fn system_validation() {
        assert!(matches!(
            SystemParams::scalar(1.0, 1.0, 0.0, 1.0),
            Err(Error::NotPositiveDefinite("Q"))
        ));
        assert!(matches!(
            SystemParams::scalar(1.0, 1.0, 1.0, -1.0),
            Err(Error::NotPositiveDefinite("R"))
        ));
        let bad = SystemParams::new(
            Matrix::identity(2),
            Matrix::zeros(3, 1),
            SymmetricMatrix::identity(2),
            SymmetricMatrix::identity(1),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn optimal_gain_examples() {
        let sys = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        // oracle: pab / (b²p + r) = (1+√3)/(2+√3) = √3 - 1
        let g = optimal_gain(&scalar_cost(1.0 + SQRT3), &sys).unwrap();
        assert!((g.k.get(0, 0) - (SQRT3 - 1.0)).abs() < 1e-6);

        let g = optimal_gain(&scalar_cost(0.0), &sys).unwrap();
        assert_eq!(g.k.get(0, 0), 0.0);
        assert_eq!(g.closed_loop, *sys.a());

        let g = optimal_gain(&scalar_cost(1.6547), &sys).unwrap();
        assert!((g.k.get(0, 0) - 0.6233).abs() < 5e-4);
    }

    #[test]
    fn dare_residual_examples() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let s2 = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(
            dare_residual(&scalar_cost(golden()), &s1)
                .unwrap()
                .get(0, 0)
                .abs()
                < 1e-9
        );
        assert!(
            dare_residual(&scalar_cost(1.0 + SQRT3), &s2)
                .unwrap()
                .get(0, 0)
                .abs()
                < 1e-9
        );
        assert_relative_eq!(
            dare_residual(&scalar_cost(1.0), &s1).unwrap().get(0, 0),
            0.5
        );
    }

    #[test]
    fn riccati_step_examples() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            riccati_difference_step(&scalar_cost(1.0), &s1)
                .unwrap()
                .get(0, 0),
            1.5
        );
        let fp = riccati_difference_step(&scalar_cost(golden()), &s1).unwrap();
        assert_relative_eq!(fp.get(0, 0), golden(), epsilon = 1e-14);
        let s2 = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(
            riccati_difference_step(&scalar_cost(0.0), &s2)
                .unwrap()
                .get(0, 0),
            2.0
        );
    }

    #[test]
    fn newton_hewer_examples() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let s2 = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        let (p, _) = newton_hewer_step(&scalar_gain(SQRT3 - 1.0, &s1), &s1).unwrap();
        assert!((p.get(0, 0) - 1.6547).abs() < 5e-4);

        let (p, g) = newton_hewer_step(&scalar_gain(SQRT3 - 1.0, &s2), &s2).unwrap();
        assert!((p.get(0, 0) - 2.7321).abs() < 5e-4);
        assert!((g.k.get(0, 0) - (SQRT3 - 1.0)).abs() < 1e-12);

        // (K²R + Q) / (1 - (A - BK)²) = (1/4 + 1) / (3/4)
        let (p, _) = newton_hewer_step(&scalar_gain(0.5, &s1), &s1).unwrap();
        assert_relative_eq!(p.get(0, 0), 5.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn newton_hewer_rejects_unstable_gain() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let err = newton_hewer_step(&scalar_gain(0.0, &s1), &s1).unwrap_err();
        assert!(matches!(err, Error::UnstableClosedLoop { .. }));
    }

    #[test]
    fn scalar_map_examples() {
        assert_relative_eq!(
            scalar_newton_hewer_step(1.0, 1.0, 1.0, 1.0, 1.0).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            scalar_newton_hewer_step(golden(), 1.0, 1.0, 1.0, 1.0).unwrap(),
            golden(),
            epsilon = 1e-14
        );
        let p2 = scalar_newton_hewer_step(1.6547, 1.0, 1.0, 2.0, 1.0).unwrap();
        assert!((p2 - 2.7835).abs() < 5e-4);
    }

    #[test]
    fn scalar_map_degenerate_denominator() {
        // p = 0 with a = b = r = 1: pb² + r - ar = 0
        let err = scalar_newton_hewer_step(0.0, 1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::UnstableClosedLoop { .. }));
        assert!(scalar_newton_hewer_step(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let p = solve_dare_fixed_point(&s1, 1e-13, 10_000).unwrap();
        assert!((p.get(0, 0) - golden()).abs() < 1e-8);
        let s2 = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        let p = solve_dare_fixed_point(&s2, 1e-13, 10_000).unwrap();
        assert!((p.get(0, 0) - (1.0 + SQRT3)).abs() < 1e-8);
        let s0 = SystemParams::scalar(0.0, 3.0, 5.0, 0.7).unwrap();
        assert_eq!(
            solve_dare_fixed_point(&s0, 1e-12, 10).unwrap().get(0, 0),
            5.0
        );
    }

    #[test]
    fn fixed_point_errors() {
        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            solve_dare_fixed_point(&s1, 1e-14, 2),
            Err(Error::NoConvergence { .. })
        ));
        let uncontrollable = SystemParams::new(
            Matrix::new(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap(),
            Matrix::new(2, 1, &[1.0, 0.0]).unwrap(),
            SymmetricMatrix::identity(2),
            SymmetricMatrix::identity(1),
        )
        .unwrap();
        assert!(matches!(
            solve_dare_fixed_point(&uncontrollable, 1e-10, 100),
            Err(Error::InvalidSystem(_))
        ));
    }

    #[test]
    fn controllability_examples() {
        let one = Matrix::scalar(1.0).unwrap();
        assert!(is_controllable(&one, &one).unwrap());
        assert!(!is_controllable(&Matrix::identity(2), &Matrix::zeros(2, 1)).unwrap());
        let a = Matrix::new(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let b = Matrix::new(2, 1, &[1.0, 0.0]).unwrap();
        assert!(!is_controllable(&a, &b).unwrap());
        let b = Matrix::new(2, 1, &[1.0, 1.0]).unwrap();
        assert!(is_controllable(&a, &b).unwrap());
    }

    #[test]
    fn observability_examples() {
        let a = Matrix::new(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(is_observable(&a, &SymmetricMatrix::identity(2)).unwrap());
        assert!(!is_observable(&a, &SymmetricMatrix::diagonal(&[1.0, 0.0]).unwrap()).unwrap());
        let one = Matrix::scalar(1.0).unwrap();
        assert!(is_observable(&one, &SymmetricMatrix::scalar(1.0).unwrap()).unwrap());
        assert!(matches!(
            is_observable(&a, &SymmetricMatrix::diagonal(&[1.0, -1.0]).unwrap()),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn policy_cost_examples() {
        let s2 = SystemParams::scalar(1.0, 1.0, 2.0, 1.0).unwrap();
        let pstar = scalar_cost(1.0 + SQRT3);
        let kstar = optimal_gain(&pstar, &s2).unwrap();
        let p = evaluate_policy_cost(&kstar, &s2).unwrap();
        assert!((p.get(0, 0) - pstar.get(0, 0)).abs() < 1e-12);

        let s1 = SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let p = evaluate_policy_cost(&scalar_gain(SQRT3 - 1.0, &s1), &s1).unwrap();
        assert!((p.get(0, 0) - 1.6547).abs() < 5e-4);

        let s11 = SystemParams::scalar(1.0, 1.0, 1.1, 1.0).unwrap();
        let p = evaluate_policy_cost(&scalar_gain(0.6180, &s11), &s11).unwrap();
        let oracle = (0.618f64.powi(2) + 1.1) / (1.0 - (1.0 - 0.618f64).powi(2));
        assert_relative_eq!(p.get(0, 0), oracle, epsilon = 1e-12);
        assert!((p.get(0, 0) - 1.7352).abs() < 5e-4);
    }

    #[test]
    fn schedule_extension() {
        let hold =
            ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[1.0, 2.0], Extension::HoldLast).unwrap();
        let qs: Vec<f64> = (1..=4).map(|t| hold.slice(t).q().get(0, 0)).collect();
        assert_eq!(qs, [1.0, 2.0, 2.0, 2.0]);
        let cyc =
            ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[1.0, 1.1], Extension::Cycle).unwrap();
        let qs: Vec<f64> = (1..=4).map(|t| cyc.slice(t).q().get(0, 0)).collect();
        assert_eq!(qs, [1.0, 1.1, 1.0, 1.1]);
        assert!(ParameterSchedule::new(vec![], Extension::Cycle).is_err());
    }

    #[test]
    fn trajectory_example1() {
        let sched =
            ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[1.0, 2.0], Extension::HoldLast).unwrap();
        let init = Init::Gain(Matrix::scalar(SQRT3 - 1.0).unwrap());
        let traj = run_trajectory(Method::NewtonHewer, &init, &sched, 2).unwrap();
        let p = traj.scalar_iterates();
        assert!((p[0] - 1.6547).abs() < 5e-4);
        assert!((p[1] - 2.7835).abs() < 5e-4);
        assert_eq!(traj.gains.len(), 2);

        let flat = ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[2.0], Extension::HoldLast).unwrap();
        let p = run_trajectory(Method::NewtonHewer, &init, &flat, 2)
            .unwrap()
            .scalar_iterates();
        assert!((p[0] - 2.7321).abs() < 5e-4 && (p[1] - 2.7321).abs() < 5e-4);
    }

    #[test]
    fn riccati_trajectory_is_nondecreasing() {
        let sched =
            ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[1.0, 2.0], Extension::HoldLast).unwrap();
        let traj = run_trajectory(
            Method::RiccatiDifference,
            &Init::Cost(scalar_cost(1.6547)),
            &sched,
            40,
        )
        .unwrap();
        let p = traj.scalar_iterates();
        assert_eq!(p[0], 1.6547);
        // oracle: the scalar map p -> p r a² / (b² p + r) + q
        let mut x = 1.6547;
        for (t, &pt) in p.iter().enumerate().skip(1) {
            x = x / (x + 1.0) + 2.0;
            assert_relative_eq!(pt, x, epsilon = 1e-12);
            assert!(pt >= p[t - 1]);
        }
        assert!((p[39] - (1.0 + SQRT3)).abs() < 1e-9);
        assert!(traj.gains.is_empty());
    }

    #[test]
    fn trajectory_reports_unstable_step() {
        // K0 stabilizes A=1 but not A=3 in slice 2: |3 - 0.6| > 1 after the
        // first gain update
        let slices = vec![
            SystemParams::scalar(1.0, 1.0, 1.0, 1.0).unwrap(),
            SystemParams::scalar(3.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        let sched = ParameterSchedule::new(slices, Extension::HoldLast).unwrap();
        let init = Init::Gain(Matrix::scalar(0.5).unwrap());
        let err = run_trajectory(Method::NewtonHewer, &init, &sched, 3).unwrap_err();
        assert!(matches!(err, Error::UnstableAtStep { step: 2, .. }));
    }

    #[test]
    fn trajectory_init_mismatch() {
        let sched =
            ParameterSchedule::scalar_q(1.0, 1.0, 1.0, &[1.0], Extension::HoldLast).unwrap();
        assert!(run_trajectory(
            Method::NewtonHewer,
            &Init::Cost(scalar_cost(1.0)),
            &sched,
            1
        )
        .is_err());
        assert!(run_trajectory(
            Method::RiccatiDifference,
            &Init::Cost(scalar_cost(-1.0)),
            &sched,
            1
        )
        .is_err());
        assert!(run_trajectory(
            Method::RiccatiDifference,
            &Init::Cost(scalar_cost(1.0)),
            &sched,
            0
        )
        .is_err());
    }
}
