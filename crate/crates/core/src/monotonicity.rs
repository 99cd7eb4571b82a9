//! Order-preservation checks between pairs of trajectories, and the block
//! ordering on `(A, B, Q, R)` under which the Riccati difference equation is
//! monotone in its parameters.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{is_psd, loewner_compare, OrderingResult, Relation, SymmetricMatrix};
use crate::riccati::{SystemParams, Trajectory};

/// Floor for the witness eigenvalue before a step is called a violation.
/// Scaled by `1 + max(|P|, |P^|)` like every other tolerance.
pub const VIOLATION_TOL: f64 = 1e-6;

/// `[[Q, A^T], [A, -B R^{-1} B^T]]`.
pub fn hamiltonian_block(sys: &SystemParams) -> Result<SymmetricMatrix> {
    let n = sys.state_dim();
    let (a, b) = (sys.a().as_dmatrix(), sys.b().as_dmatrix());
    let r_inv_bt = sys
        .r()
        .as_dmatrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("R"))?
        .solve(&b.transpose());
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(sys.q().as_dmatrix());
    h.view_mut((0, n), (n, n)).copy_from(&a.transpose());
    h.view_mut((n, 0), (n, n)).copy_from(a);
    h.view_mut((n, n), (n, n)).copy_from(&(-(b * r_inv_bt)));
    SymmetricMatrix::from_dmatrix(&h)
}

/// Whether `H(sys1) - H(sys2)` is PSD within `tol`.
pub fn hamiltonian_order_holds(sys1: &SystemParams, sys2: &SystemParams, tol: f64) -> Result<bool> {
    if (sys1.state_dim(), sys1.input_dim()) != (sys2.state_dim(), sys2.input_dim()) {
        return Err(Error::DimensionMismatch(
            "systems disagree on (n, m)".into(),
        ));
    }
    let diff = hamiltonian_block(sys1)?.sub(&hamiltonian_block(sys2)?)?;
    is_psd(&diff, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationWitness {
    pub step: usize,
    pub first: SymmetricMatrix,
    pub second: SymmetricMatrix,
    /// Most negative eigenvalue of the difference that should have been PSD.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub compared_steps: usize,
    pub tolerance: f64,
    pub violation_tolerance: f64,
    pub initial_relation: OrderingResult,
    pub per_step: Vec<OrderingResult>,
    /// Set when step 1 is `Equal` or `Incomparable`: nothing to propagate.
    pub inconclusive: bool,
    /// 1-based step at which the step-1 order first fails to hold.
    pub first_violation: Option<usize>,
    pub violation_witness: Option<ViolationWitness>,
}

impl MonotonicityReport {
    pub fn is_violation(&self) -> bool {
        self.first_violation.is_some()
    }
}

/// Compares `first[t]` against `second[t]` at every step and reports the
/// first step at which the step-1 order is lost.
pub fn check_iterate_monotonicity(
    first: &[SymmetricMatrix],
    second: &[SymmetricMatrix],
    tol: f64,
) -> Result<MonotonicityReport> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory lengths {} vs {}",
            first.len(),
            second.len()
        )));
    }
    if first.is_empty() {
        return Err(Error::InvalidConfig("empty trajectories".into()));
    }
    let per_step = first
        .iter()
        .zip(second)
        .map(|(x, y)| loewner_compare(x, y, tol))
        .collect::<Result<Vec<_>>>()?;
    let initial_relation = per_step[0];
    let violation_tolerance = VIOLATION_TOL.max(10.0 * tol);
    let inconclusive = matches!(
        initial_relation.relation,
        Relation::Equal | Relation::Incomparable
    );

    let mut first_violation = None;
    let mut violation_witness = None;
    if !inconclusive {
        for (i, ord) in per_step.iter().enumerate().skip(1) {
            let witness = match initial_relation.relation {
                Relation::GreaterEqual => ord.min_eig_forward,
                _ => ord.min_eig_backward,
            };
            let scale = 1.0 + first[i].frobenius_norm().max(second[i].frobenius_norm());
            if witness < -violation_tolerance * scale {
                first_violation = Some(i + 1);
                violation_witness = Some(ViolationWitness {
                    step: i + 1,
                    first: first[i].clone(),
                    second: second[i].clone(),
                    min_eigenvalue: witness,
                });
                break;
            }
        }
    }

    Ok(MonotonicityReport {
        compared_steps: per_step.len(),
        tolerance: tol,
        violation_tolerance,
        initial_relation,
        per_step,
        inconclusive,
        first_violation,
        violation_witness,
    })
}

pub fn check_pair_monotonicity(
    traj1: &Trajectory,
    traj2: &Trajectory,
    tol: f64,
) -> Result<MonotonicityReport> {
    if traj1.schedule.state_dim() != traj2.schedule.state_dim() {
        return Err(Error::DimensionMismatch(
            "trajectories have different state dimensions".into(),
        ));
    }
    check_iterate_monotonicity(&traj1.iterates, &traj2.iterates, tol)
}
