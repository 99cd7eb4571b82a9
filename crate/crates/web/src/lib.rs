//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers or a JSON string and returns a JSON
//! string; errors surface as thrown JS strings.

use riccati_core::search::SearchConfig;
use riccati_core::{
    build_example1, build_example2, check_pair_monotonicity, scalar_newton_hewer_step,
    scalar_riccati_step, search_counterexample, solve_dare_fixed_point, Extension, Init, Matrix,
    Method, MonotonicityReport, PairedScenario, ParameterSchedule, SystemParams, Trajectory,
    TrajectorySpec, DEFAULT_HORIZON, DEFAULT_TOL,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub p: Vec<f64>,
    /// `None` where the induced gain does not stabilize.
    pub newton_hewer: Vec<Option<f64>>,
    pub riccati_difference: Vec<f64>,
    pub fixed_point: f64,
}

/// Scalar Newton-Hewer and Riccati maps sampled on `points` values of `P`.
pub fn scalar_curves(
    a: f64,
    b: f64,
    q: f64,
    r: f64,
    p_min: f64,
    p_max: f64,
    points: usize,
) -> Result<Curves, String> {
    if !(p_min.is_finite() && p_max.is_finite() && 0.0 <= p_min && p_min < p_max) || points < 2 {
        return Err(format!(
            "invalid grid [{p_min}, {p_max}] with {points} points"
        ));
    }
    let sys = SystemParams::scalar(a, b, q, r).map_err(|e| e.to_string())?;
    let fixed_point = solve_dare_fixed_point(&sys, 1e-13, 100_000)
        .map_err(|e| e.to_string())?
        .get(0, 0);
    let step = (p_max - p_min) / (points - 1) as f64;
    let p: Vec<f64> = (0..points).map(|i| p_min + step * i as f64).collect();
    Ok(Curves {
        newton_hewer: p
            .iter()
            .map(|&x| scalar_newton_hewer_step(x, a, b, q, r).ok())
            .collect(),
        riccati_difference: p
            .iter()
            .map(|&x| scalar_riccati_step(x, a, b, q, r))
            .collect(),
        p,
        fixed_point,
    })
}

/// One side of a custom scalar pair.
#[derive(Debug, Clone, Deserialize)]
pub struct SideRequest {
    pub q: Vec<f64>,
    pub k0: f64,
}

/// Either `{"example": "example1" | "example2"}` or a custom scalar pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PairRequest {
    Example {
        example: String,
        #[serde(default)]
        horizon: Option<usize>,
    },
    Custom {
        a: f64,
        b: f64,
        r: f64,
        first: SideRequest,
        second: SideRequest,
        #[serde(default)]
        extension: Extension,
        horizon: usize,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Serialize)]
pub struct Series {
    pub label: String,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct PairResult {
    pub name: String,
    pub notes: Vec<String>,
    pub first: Series,
    pub second: Series,
    pub report: MonotonicityReport,
}

fn series(label: &str, traj: &Trajectory) -> Series {
    Series {
        label: label.to_string(),
        q: (1..=traj.iterates.len())
            .map(|t| traj.schedule.slice(t).q().get(0, 0))
            .collect(),
        p: traj.scalar_iterates(),
        k: traj.gains.iter().map(|g| g.k.get(0, 0)).collect(),
    }
}

fn custom_side(
    label: &str,
    a: f64,
    b: f64,
    r: f64,
    side: &SideRequest,
    ext: Extension,
    horizon: usize,
) -> Result<TrajectorySpec, String> {
    Ok(TrajectorySpec {
        label: label.to_string(),
        method: Method::NewtonHewer,
        init: Init::Gain(Matrix::scalar(side.k0).map_err(|e| e.to_string())?),
        schedule: ParameterSchedule::scalar_q(a, b, r, &side.q, ext).map_err(|e| e.to_string())?,
        horizon,
    })
}

/// Runs a Newton-Hewer pair and checks whether the Loewner order survives.
pub fn run_pair(request: &PairRequest) -> Result<PairResult, String> {
    let (scenario, tol): (PairedScenario, f64) = match request {
        PairRequest::Example { example, horizon } => {
            let h = horizon.unwrap_or(DEFAULT_HORIZON);
            let sc = match example.as_str() {
                "example1" => build_example1(h),
                "example2" => build_example2(h),
                other => return Err(format!("unknown example {other:?}")),
            };
            (sc, DEFAULT_TOL)
        }
        PairRequest::Custom {
            a,
            b,
            r,
            first,
            second,
            extension,
            horizon,
            tolerance,
        } => {
            if *horizon == 0 || *horizon > 10_000 {
                return Err(format!("horizon must be in 1..=10000, got {horizon}"));
            }
            (
                PairedScenario {
                    name: "custom".into(),
                    first: custom_side("first", *a, *b, *r, first, *extension, *horizon)?,
                    second: custom_side("second", *a, *b, *r, second, *extension, *horizon)?,
                    companion: None,
                    notes: Vec::new(),
                },
                tolerance.unwrap_or(DEFAULT_TOL),
            )
        }
    };
    let (x, y) = scenario.run().map_err(|e| e.to_string())?;
    let report = check_pair_monotonicity(&x, &y, tol).map_err(|e| e.to_string())?;
    Ok(PairResult {
        first: series(&scenario.first.label, &x),
        second: series(&scenario.second.label, &y),
        name: scenario.name,
        notes: scenario.notes,
        report,
    })
}

fn search_config(name: &str, budget: usize) -> Result<SearchConfig, String> {
    let mut config = match name {
        "example1-pinned" => SearchConfig::example1_pinned(),
        "around-example1" => SearchConfig::around_example1(),
        "constant-q" => SearchConfig::constant_q(budget),
        "decreasing-q" => SearchConfig::decreasing_q(budget),
        other => return Err(format!("unknown search {other:?}")),
    };
    if budget > 0 {
        config.budget = budget;
    }
    Ok(config)
}

/// Runs a built-in seeded search; `null` in the `counterexample` field when
/// the budget is exhausted.
pub fn run_search(name: &str, seed: u64, budget: usize) -> Result<serde_json::Value, String> {
    let config = search_config(name, budget)?;
    let found = search_counterexample(&config, seed).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "search": name,
        "seed": seed,
        "budget": config.budget,
        "counterexample": found,
    }))
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsValue> {
    value
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = scalarCurves)]
pub fn scalar_curves_js(
    a: f64,
    b: f64,
    q: f64,
    r: f64,
    p_min: f64,
    p_max: f64,
    points: usize,
) -> Result<String, JsValue> {
    to_js(scalar_curves(a, b, q, r, p_min, p_max, points))
}

#[wasm_bindgen(js_name = runPair)]
pub fn run_pair_js(request_json: &str) -> Result<String, JsValue> {
    to_js(
        serde_json::from_str::<PairRequest>(request_json)
            .map_err(|e| format!("bad request: {e}"))
            .and_then(|r| run_pair(&r)),
    )
}

#[wasm_bindgen(js_name = runSearch)]
pub fn run_search_js(name: &str, seed: u64, budget: usize) -> Result<String, JsValue> {
    to_js(run_search(name, seed, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_cross_identity_at_fixed_point() {
        let c = scalar_curves(1.0, 1.0, 1.0, 1.0, 0.0, 6.0, 61).unwrap();
        assert!((c.fixed_point - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);
        assert_eq!(c.newton_hewer[0], None);
        assert_eq!(c.p.len(), 61);
        assert!(scalar_curves(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 10).is_err());
    }

    #[test]
    fn example_pairs_violate_at_step_two() {
        for name in ["example1", "example2"] {
            let req: PairRequest =
                serde_json::from_str(&format!(r#"{{"example": "{name}"}}"#)).unwrap();
            let res = run_pair(&req).unwrap();
            assert_eq!(res.report.first_violation, Some(2));
            assert_eq!(res.first.p.len(), DEFAULT_HORIZON);
        }
    }

    #[test]
    fn custom_pair_matches_example1() {
        let k0 = 3f64.sqrt() - 1.0;
        let json = format!(
            r#"{{"a": 1, "b": 1, "r": 1, "first": {{"q": [1, 2], "k0": {k0}}},
                "second": {{"q": [2], "k0": {k0}}}, "horizon": 4}}"#
        );
        let res = run_pair(&serde_json::from_str(&json).unwrap()).unwrap();
        assert!((res.first.p[1] - 2.7835).abs() < 5e-4);
        assert_eq!(res.report.first_violation, Some(2));
    }

    #[test]
    fn search_outcomes() {
        let hit = run_search("example1-pinned", 5, 0).unwrap();
        assert_eq!(hit["counterexample"]["violating_step"], 2);
        let miss = run_search("constant-q", 5, 200).unwrap();
        assert!(miss["counterexample"].is_null());
        assert!(run_search("nope", 0, 1).is_err());
    }
}
