//! Seeded random search for pairs of Newton-Hewer trajectories whose
//! step-1 Loewner order is not preserved.
//!
//! Sample `i` draws from its own ChaCha stream (`seed`, stream `i`), so the
//! result does not depend on evaluation order. The reported counterexample is
//! always the lowest sample index that both screens and revalidates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Matrix, SymmetricMatrix, DEFAULT_TOL, STABILITY_MARGIN};
use crate::monotonicity::{check_pair_monotonicity, MonotonicityReport, VIOLATION_TOL};
use crate::riccati::{
    is_controllable, Extension, Gain, Init, Method, ParameterSchedule, SystemParams, Trajectory,
};
use crate::scenarios::TrajectorySpec;

/// Closed interval `[min, max]`, written `[min, max]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub const fn point(x: f64) -> Self {
        Range { min: x, max: x }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidConfig(format!(
                "{what}: invalid range [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn validate_positive(&self, what: &str) -> Result<()> {
        self.validate(what)?;
        if self.min <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "{what}: range must be positive"
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

impl From<[f64; 2]> for Range {
    fn from([min, max]: [f64; 2]) -> Self {
        Range { min, max }
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.min, r.max]
    }
}

/// How the two trajectories' `Q` schedules are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleSampler {
    /// Each trajectory gets its own schedule, slot `t` drawn from range `t`.
    Independent {
        first: Vec<Range>,
        second: Vec<Range>,
    },
    /// One schedule, slot `t` drawn from range `t`, shared by both.
    Shared { slots: Vec<Range> },
    /// One time-invariant `Q` shared by both.
    Constant { q: Range },
    /// One strictly decreasing schedule spanning the whole horizon, shared.
    Decreasing { q: Range },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSampler {
    pub first: Range,
    pub second: Range,
    /// Draw once from `first` and use it for both.
    #[serde(default)]
    pub shared: bool,
}

/// Switches the search from scalar systems to `n x n` / `n x m` ones with
/// `Q_t = q_t I` and `R = r I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSearch {
    pub state_dim: usize,
    pub input_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub a: Range,
    pub b: Range,
    pub r: Range,
    pub schedule: ScheduleSampler,
    #[serde(default)]
    pub extension: Extension,
    pub gains: GainSampler,
    pub horizon: usize,
    pub tolerance: f64,
    pub budget: usize,
    #[serde(default)]
    pub matrix: Option<MatrixSearch>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            a: Range::new(0.5, 1.5),
            b: Range::new(0.5, 1.5),
            r: Range::new(0.5, 1.5),
            schedule: ScheduleSampler::Independent {
                first: vec![Range::new(0.5, 2.5), Range::new(0.5, 2.5)],
                second: vec![Range::new(0.5, 2.5), Range::new(0.5, 2.5)],
            },
            extension: Extension::HoldLast,
            gains: GainSampler {
                first: Range::new(0.0, 1.5),
                second: Range::new(0.0, 1.5),
                shared: false,
            },
            horizon: 6,
            tolerance: DEFAULT_TOL,
            budget: 10_000,
            matrix: None,
        }
    }
}

impl SearchConfig {
    /// Degenerate ranges at `K_0 = √3 - 1`, `A = B = R = 1`,
    /// `Q = (1, 2)` vs `Q = 2`.
    pub fn example1_pinned() -> Self {
        let k0 = 3f64.sqrt() - 1.0;
        SearchConfig {
            a: Range::point(1.0),
            b: Range::point(1.0),
            r: Range::point(1.0),
            schedule: ScheduleSampler::Independent {
                first: vec![Range::point(1.0), Range::point(2.0)],
                second: vec![Range::point(2.0), Range::point(2.0)],
            },
            gains: GainSampler {
                first: Range::point(k0),
                second: Range::point(k0),
                shared: true,
            },
            budget: 1,
            ..SearchConfig::default()
        }
    }

    /// Ranges that contain the first canonical scenario.
    pub fn around_example1() -> Self {
        SearchConfig {
            a: Range::new(0.8, 1.2),
            b: Range::new(0.8, 1.2),
            r: Range::new(0.8, 1.2),
            schedule: ScheduleSampler::Independent {
                first: vec![Range::new(0.5, 1.5), Range::new(1.5, 2.5)],
                second: vec![Range::new(1.5, 2.5), Range::new(1.5, 2.5)],
            },
            gains: GainSampler {
                first: Range::new(0.5, 1.0),
                second: Range::new(0.5, 1.0),
                shared: true,
            },
            ..SearchConfig::default()
        }
    }

    /// Time-invariant shared `Q`, independent initial gains.
    pub fn constant_q(budget: usize) -> Self {
        SearchConfig {
            schedule: ScheduleSampler::Constant {
                q: Range::new(0.1, 5.0),
            },
            gains: GainSampler {
                first: Range::new(-1.0, 3.0),
                second: Range::new(-1.0, 3.0),
                shared: false,
            },
            budget,
            ..SearchConfig::default()
        }
    }

    /// Shared strictly decreasing `Q`, independent initial gains.
    pub fn decreasing_q(budget: usize) -> Self {
        SearchConfig {
            schedule: ScheduleSampler::Decreasing {
                q: Range::new(0.1, 5.0),
            },
            ..SearchConfig::constant_q(budget)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate("a")?;
        self.b.validate("b")?;
        self.r.validate_positive("r")?;
        self.gains.first.validate("gains.first")?;
        self.gains.second.validate("gains.second")?;
        match &self.schedule {
            ScheduleSampler::Independent { first, second } => {
                check_slots(first, "schedule.first")?;
                check_slots(second, "schedule.second")?;
            }
            ScheduleSampler::Shared { slots } => check_slots(slots, "schedule.slots")?,
            ScheduleSampler::Constant { q } | ScheduleSampler::Decreasing { q } => {
                q.validate_positive("schedule.q")?
            }
        }
        if self.horizon < 2 {
            return Err(Error::InvalidConfig("horizon must be at least 2".into()));
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig("tolerance must be >= 0".into()));
        }
        if let Some(m) = self.matrix {
            if m.state_dim == 0 || m.input_dim == 0 {
                return Err(Error::InvalidConfig(
                    "matrix dimensions must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

fn check_slots(slots: &[Range], what: &str) -> Result<()> {
    if slots.is_empty() {
        return Err(Error::InvalidConfig(format!("{what}: no slots")));
    }
    slots.iter().try_for_each(|r| r.validate_positive(what))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub seed: u64,
    pub sample_index: usize,
    pub tolerance: f64,
    pub first: TrajectorySpec,
    pub second: TrajectorySpec,
    pub first_trajectory: Trajectory,
    pub second_trajectory: Trajectory,
    pub violating_step: usize,
    pub report: MonotonicityReport,
    /// Both trajectories were recomputed from `first`/`second` and the
    /// violation reproduced.
    pub revalidated: bool,
}

impl CounterexampleReport {
    /// Recomputes both trajectories from the stored specs and checks that the
    /// same violation appears.
    pub fn revalidate(&self) -> Result<bool> {
        let a = self.first.run()?;
        let b = self.second.run()?;
        let rep = check_pair_monotonicity(&a, &b, self.tolerance)?;
        Ok(rep.first_violation == Some(self.violating_step))
    }
}

struct Candidate {
    first: TrajectorySpec,
    second: TrajectorySpec,
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_slots(slots: &[Range], rng: &mut impl Rng) -> Vec<f64> {
    slots.iter().map(|r| r.sample(rng)).collect()
}

/// `(Q schedule for first, Q schedule for second)`; `None` rejects the draw.
fn draw_schedules(cfg: &SearchConfig, rng: &mut impl Rng) -> Option<(Vec<f64>, Vec<f64>)> {
    match &cfg.schedule {
        ScheduleSampler::Independent { first, second } => {
            Some((draw_slots(first, rng), draw_slots(second, rng)))
        }
        ScheduleSampler::Shared { slots } => {
            let q = draw_slots(slots, rng);
            Some((q.clone(), q))
        }
        ScheduleSampler::Constant { q } => {
            let q = q.sample(rng);
            Some((vec![q], vec![q]))
        }
        ScheduleSampler::Decreasing { q } => {
            let mut qs: Vec<f64> = (0..cfg.horizon).map(|_| q.sample(rng)).collect();
            qs.sort_by(|x, y| y.total_cmp(x));
            if qs.windows(2).any(|w| w[1] >= w[0]) {
                return None;
            }
            Some((qs.clone(), qs))
        }
    }
}

fn draw_gains(cfg: &SearchConfig, len: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let first: Vec<f64> = (0..len).map(|_| cfg.gains.first.sample(rng)).collect();
    let second = if cfg.gains.shared {
        first.clone()
    } else {
        (0..len).map(|_| cfg.gains.second.sample(rng)).collect()
    };
    (first, second)
}

fn draw_candidate(cfg: &SearchConfig, seed: u64, index: usize) -> Option<Candidate> {
    let mut rng = rng_for(seed, index);
    let (n, m) = cfg.matrix.map_or((1, 1), |d| (d.state_dim, d.input_dim));
    let a: Vec<f64> = (0..n * n).map(|_| cfg.a.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..n * m).map(|_| cfg.b.sample(&mut rng)).collect();
    let r = cfg.r.sample(&mut rng);
    let (q1, q2) = draw_schedules(cfg, &mut rng)?;
    let (k1, k2) = draw_gains(cfg, m * n, &mut rng);

    let a = Matrix::new(n, n, &a).ok()?;
    let b = Matrix::new(n, m, &b).ok()?;
    if !is_controllable(&a, &b).ok()? {
        return None;
    }
    let r = SymmetricMatrix::identity(m).scale(r);
    let schedule = |qs: &[f64]| -> Option<ParameterSchedule> {
        let slices = qs
            .iter()
            .map(|&q| {
                SystemParams::new(
                    a.clone(),
                    b.clone(),
                    SymmetricMatrix::identity(n).scale(q),
                    r.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()
            .ok()?;
        ParameterSchedule::new(slices, cfg.extension).ok()
    };
    let (s1, s2) = (schedule(&q1)?, schedule(&q2)?);
    let k1 = Matrix::new(m, n, &k1).ok()?;
    let k2 = Matrix::new(m, n, &k2).ok()?;
    for (k, s) in [(&k1, &s1), (&k2, &s2)] {
        if !Gain::new(k.clone(), s.slice(1)).ok()?.is_stabilizing() {
            return None;
        }
    }
    let spec = |label: &str, k: Matrix, schedule: ParameterSchedule| TrajectorySpec {
        label: label.into(),
        method: Method::NewtonHewer,
        init: Init::Gain(k),
        schedule,
        horizon: cfg.horizon,
    };
    Some(Candidate {
        first: spec("first", k1, s1),
        second: spec("second", k2, s2),
    })
}

/// Scalar screen. Returns the violating step if the pair loses its step-1
/// order, using the same thresholds as the matrix check.
fn screen_scalar(cand: &Candidate, tol: f64) -> Option<usize> {
    let p = scalar_newton_hewer(&cand.first)?;
    let ph = scalar_newton_hewer(&cand.second)?;
    let vtol = VIOLATION_TOL.max(10.0 * tol);
    let d0 = p[0] - ph[0];
    let cmp = tol * (1.0 + p[0].abs().max(ph[0].abs()));
    // +1: first >= second, -1: first <= second
    let sign = if d0 >= -cmp && d0 <= cmp {
        return None;
    } else if d0 > 0.0 {
        1.0
    } else {
        -1.0
    };
    (1..p.len())
        .find(|&i| sign * (p[i] - ph[i]) < -vtol * (1.0 + p[i].abs().max(ph[i].abs())))
        .map(|i| i + 1)
}

fn scalar_newton_hewer(spec: &TrajectorySpec) -> Option<Vec<f64>> {
    let Init::Gain(k0) = &spec.init else {
        return None;
    };
    let mut k = k0.get(0, 0);
    let mut out = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let s = spec.schedule.slice(t);
        let (a, b, q, r) = (
            s.a().get(0, 0),
            s.b().get(0, 0),
            s.q().get(0, 0),
            s.r().get(0, 0),
        );
        let cl = a - b * k;
        if cl.abs() >= 1.0 - STABILITY_MARGIN {
            return None;
        }
        let p = (k * k * r + q) / (1.0 - cl * cl);
        k = b * p * a / (b * b * p + r);
        out.push(p);
    }
    Some(out)
}

fn evaluate(cfg: &SearchConfig, seed: u64, index: usize) -> Option<CounterexampleReport> {
    let cand = draw_candidate(cfg, seed, index)?;
    let screened = if cfg.matrix.is_none() {
        screen_scalar(&cand, cfg.tolerance)?
    } else {
        let a = cand.first.run().ok()?;
        let b = cand.second.run().ok()?;
        check_pair_monotonicity(&a, &b, cfg.tolerance)
            .ok()?
            .first_violation?
    };
    log::debug!("sample {index}: candidate violation at step {screened}");

    let first_trajectory = cand.first.run().ok()?;
    let second_trajectory = cand.second.run().ok()?;
    let report =
        check_pair_monotonicity(&first_trajectory, &second_trajectory, cfg.tolerance).ok()?;
    if report.first_violation != Some(screened) {
        log::debug!("sample {index}: screen and recomputation disagree, discarded");
        return None;
    }
    let mut out = CounterexampleReport {
        seed,
        sample_index: index,
        tolerance: cfg.tolerance,
        first: cand.first,
        second: cand.second,
        first_trajectory,
        second_trajectory,
        violating_step: screened,
        report,
        revalidated: false,
    };
    out.revalidated = out.revalidate().ok()?;
    out.revalidated.then_some(out)
}

/// Draws up to `config.budget` candidate pairs and returns the first
/// (lowest-index) revalidated counterexample, or `None` when the budget is
/// exhausted.
pub fn search_counterexample(
    config: &SearchConfig,
    seed: u64,
) -> Result<Option<CounterexampleReport>> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    let found = {
        use rayon::prelude::*;
        (0..config.budget)
            .into_par_iter()
            .find_map_first(|i| evaluate(config, seed, i))
    };
    #[cfg(not(feature = "parallel"))]
    let found = (0..config.budget).find_map(|i| evaluate(config, seed, i));
    Ok(found)
}
