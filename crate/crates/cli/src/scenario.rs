//! Scenario files: JSON descriptions of a system schedule, an iteration
//! method, its initialization and a horizon.

use std::path::Path;

use riccati_core::{
    build_example1, build_example2, Extension, Init, Matrix, Method, ParameterSchedule,
    SymmetricMatrix, SystemParams, TrajectorySpec, DEFAULT_TOL,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A bare number stands for a 1x1 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixSpec {
    fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            MatrixSpec::Scalar(x) => vec![vec![*x]],
            MatrixSpec::Rows(r) => r.clone(),
        }
    }

    fn to_matrix(&self, what: &str) -> Result<Matrix, CliError> {
        Matrix::from_rows(&self.rows()).map_err(|e| CliError::input(format!("{what}: {e}")))
    }

    fn to_symmetric(&self, what: &str) -> Result<SymmetricMatrix, CliError> {
        SymmetricMatrix::from_rows(&self.rows())
            .map_err(|e| CliError::input(format!("{what}: {e}")))
    }

    fn from_matrix(m: &Matrix) -> Self {
        if m.rows() == 1 && m.cols() == 1 {
            MatrixSpec::Scalar(m.get(0, 0))
        } else {
            MatrixSpec::Rows(m.to_rows())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub a: MatrixSpec,
    pub b: MatrixSpec,
    pub q: MatrixSpec,
    pub r: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub slices: Vec<SliceSpec>,
    #[serde(default)]
    pub extension: Extension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Gain(MatrixSpec),
    Cost(MatrixSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Loewner comparisons.
    #[serde(default = "default_comparison")]
    pub comparison: f64,
    /// Fixed-point iteration stopping rule.
    #[serde(default = "default_solve")]
    pub solve: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_comparison() -> f64 {
    DEFAULT_TOL
}

fn default_solve() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    100_000
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            comparison: default_comparison(),
            solve: default_solve(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Shorthand for a one-slice schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SliceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    pub method: Method,
    pub init: InitSpec,
    pub horizon: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub spec: TrajectorySpec,
}

impl Scenario {
    pub fn name(&self) -> &str {
        self.file.name.as_deref().unwrap_or("scenario")
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.file.horizon = horizon;
        self.spec.horizon = horizon;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.file.tolerances.comparison = tol;
        self
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("scenario: {e}")))
    }

    pub fn validate(self) -> Result<Scenario, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.horizon == 0 {
            return Err(CliError::input("horizon must be positive"));
        }
        let t = &self.tolerances;
        if !(t.comparison >= 0.0 && t.solve > 0.0 && t.max_iter > 0) {
            return Err(CliError::input("invalid tolerances"));
        }
        let schedule = match (&self.system, &self.schedule) {
            (Some(sys), None) => ParameterSchedule::constant(slice(sys, 0)?),
            (None, Some(s)) => {
                let slices = s
                    .slices
                    .iter()
                    .enumerate()
                    .map(|(i, sl)| slice(sl, i))
                    .collect::<Result<Vec<_>, _>>()?;
                ParameterSchedule::new(slices, s.extension)
                    .map_err(|e| CliError::input(e.to_string()))?
            }
            _ => {
                return Err(CliError::input(
                    "give exactly one of `system` or `schedule`",
                ))
            }
        };
        let init = match &self.init {
            InitSpec::Gain(k) => Init::Gain(k.to_matrix("init.gain")?),
            InitSpec::Cost(p) => Init::Cost(p.to_symmetric("init.cost")?),
        };
        let (n, m) = (schedule.state_dim(), schedule.input_dim());
        match &init {
            Init::Gain(k) if (k.rows(), k.cols()) != (m, n) => {
                return Err(CliError::input(format!("init.gain must be {m}x{n}")))
            }
            Init::Cost(p) if p.dim() != n => {
                return Err(CliError::input(format!("init.cost must be {n}x{n}")))
            }
            _ => {}
        }
        let spec = TrajectorySpec {
            label: self.name.clone().unwrap_or_else(|| "scenario".into()),
            method: self.method,
            init,
            schedule,
            horizon: self.horizon,
        };
        Ok(Scenario { file: self, spec })
    }

    /// Inverse of [`ScenarioFile::validate`] for built-in scenarios.
    pub fn from_spec(name: &str, spec: &TrajectorySpec) -> Self {
        let slices = spec
            .schedule
            .slices()
            .iter()
            .map(|s| SliceSpec {
                a: MatrixSpec::from_matrix(s.a()),
                b: MatrixSpec::from_matrix(s.b()),
                q: MatrixSpec::from_matrix(&s.q().to_matrix()),
                r: MatrixSpec::from_matrix(&s.r().to_matrix()),
            })
            .collect();
        let init = match &spec.init {
            Init::Gain(k) => InitSpec::Gain(MatrixSpec::from_matrix(k)),
            Init::Cost(p) => InitSpec::Cost(MatrixSpec::from_matrix(&p.to_matrix())),
        };
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: Some(name.into()),
            system: None,
            schedule: Some(ScheduleSpec {
                slices,
                extension: spec.schedule.extension(),
            }),
            method: spec.method,
            init,
            horizon: spec.horizon,
            tolerances: Tolerances::default(),
        }
    }
}

fn slice(s: &SliceSpec, i: usize) -> Result<SystemParams, CliError> {
    let what = |f: &str| format!("slice {i}.{f}");
    SystemParams::new(
        s.a.to_matrix(&what("a"))?,
        s.b.to_matrix(&what("b"))?,
        s.q.to_symmetric(&what("q"))?,
        s.r.to_symmetric(&what("r"))?,
    )
    .map_err(|e| CliError::input(format!("slice {i}: {e}")))
}

pub const BUILTIN_SCENARIOS: &[&str] = &[
    "example1",
    "example1-hat",
    "example1-riccati",
    "example2",
    "example2-hat",
];

/// Built-in single scenarios by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    let ex1 = || build_example1(riccati_core::DEFAULT_HORIZON);
    let ex2 = || build_example2(riccati_core::DEFAULT_HORIZON);
    let spec = match name {
        "example1" => ex1().first,
        "example1-hat" => ex1().second,
        "example1-riccati" => ex1().companion?,
        "example2" => ex2().first,
        "example2-hat" => ex2().second,
        _ => return None,
    };
    let file = ScenarioFile::from_spec(name, &spec);
    Some(file.validate().expect("built-in scenarios are valid"))
}

/// Built-in pairs: `example1` compares against `example1-hat`, likewise
/// `example2`.
pub fn builtin_pair(name: &str) -> Option<(Scenario, Scenario)> {
    match name {
        "example1" | "example2" => Some((builtin(name)?, builtin(&format!("{name}-hat"))?)),
        _ => None,
    }
}

/// A path to a scenario JSON file, or a built-in name.
pub fn load(source: &str) -> Result<Scenario, CliError> {
    let path = Path::new(source);
    if path.exists() {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{source}: {e}")))?;
        let mut file = ScenarioFile::parse(&text)?;
        if file.name.is_none() {
            file.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        return file.validate();
    }
    builtin(source).ok_or_else(|| {
        CliError::input(format!(
            "{source}: no such file or built-in scenario (built-ins: {})",
            BUILTIN_SCENARIOS.join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_shorthand() {
        let s = ScenarioFile::parse(
            r#"{"schema_version": 1, "system": {"a": 1, "b": 1, "q": 2, "r": 1},
                "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3}"#,
        )
        .unwrap()
        .validate()
        .unwrap();
        assert_eq!(s.spec.schedule.slice(5).q().get(0, 0), 2.0);
        assert_eq!(s.file.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            // unknown field
            r#"{"schema_version": 1, "system": {"a": 1, "b": 1, "q": 1, "r": 1}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3, "extra": 1}"#,
            // wrong version
            r#"{"schema_version": 9, "system": {"a": 1, "b": 1, "q": 1, "r": 1}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3}"#,
            // gain shape
            r#"{"schema_version": 1, "system": {"a": [[1,0],[0,1]], "b": [[1],[0]], "q": [[1,0],[0,1]], "r": 1}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3}"#,
            // Q not positive definite
            r#"{"schema_version": 1, "system": {"a": 1, "b": 1, "q": 0, "r": 1}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3}"#,
            // both system and schedule
            r#"{"schema_version": 1, "system": {"a": 1, "b": 1, "q": 1, "r": 1}, "schedule": {"slices": [{"a": 1, "b": 1, "q": 1, "r": 1}]}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 3}"#,
            // zero horizon
            r#"{"schema_version": 1, "system": {"a": 1, "b": 1, "q": 1, "r": 1}, "method": "newton-hewer", "init": {"gain": 0.5}, "horizon": 0}"#,
        ];
        for text in bad {
            let res = ScenarioFile::parse(text).and_then(ScenarioFile::validate);
            assert_eq!(res.unwrap_err().code, 1, "{text}");
        }
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for name in BUILTIN_SCENARIOS {
            let s = builtin(name).unwrap();
            let json = serde_json::to_string(&s.file).unwrap();
            let back = ScenarioFile::parse(&json).unwrap().validate().unwrap();
            assert_eq!(back.spec.run().unwrap(), s.spec.run().unwrap(), "{name}");
        }
    }
}
