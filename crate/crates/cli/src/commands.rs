use std::path::Path;

use riccati_core::search::{CounterexampleReport, SearchConfig};
use riccati_core::{
    check_iterate_monotonicity, dare_residual, optimal_gain, search_counterexample,
    solve_dare_fixed_point, Relation, SymmetricMatrix,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_EXHAUSTED, EXIT_OK};
use crate::figures::{self, Grid};
use crate::report::{
    read_trajectory_csv, step_records, trajectory_csv, Outcome, RunReport, Solution,
};
use crate::scenario::{self, Scenario};

/// What a command produced; `main` decides where it goes.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub exit_code: i32,
    pub report: Option<RunReport>,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
    /// Stdout payload when no output directory is given; the report JSON
    /// is printed when this is `None`.
    pub stdout: Option<String>,
    /// File name for the report when writing to an output directory.
    pub report_file: Option<String>,
    pub summary: String,
}

fn echo<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("inputs serialize")
}

pub fn solve(scenario: &Scenario) -> Result<CommandOutput, CliError> {
    let sys = scenario.spec.schedule.slice(1);
    let tol = &scenario.file.tolerances;
    let p = solve_dare_fixed_point(sys, tol.solve, tol.max_iter)?;
    let residual_norm = dare_residual(&p, sys)?.frobenius_norm();
    let gain = optimal_gain(&p, sys)?;
    let summary = format!(
        "P* = {:?}\nresidual |Ric(P*) - P*|_F = {residual_norm:.3e}\nK* = {:?}\nrho(A - B K*) = {:.6}",
        p.to_rows(),
        gain.k.to_rows(),
        gain.rho
    );
    let mut report = RunReport::new("solve", vec![echo(&scenario.file)], Outcome::Solved);
    report.solution = Some(Solution {
        p_star: p,
        residual_norm,
        closed_loop_rho: gain.rho,
        gain: gain.k,
    });
    Ok(CommandOutput {
        stdout: None,
        files: Vec::new(),
        report_file: Some("solve.json".into()),
        report: Some(report),
        summary,
        exit_code: EXIT_OK,
    })
}

pub fn iterate(scenario: &Scenario) -> Result<CommandOutput, CliError> {
    let traj = scenario.spec.run()?;
    let csv = trajectory_csv(&traj);
    let mut report = RunReport::new("iterate", vec![echo(&scenario.file)], Outcome::Iterated);
    report.steps = step_records(&traj);
    let last = traj.iterates.last().expect("horizon >= 1");
    let summary = format!(
        "{} steps of {:?}; P_T = {:?}",
        traj.iterates.len(),
        traj.method,
        last.to_rows()
    );
    let name = scenario.name().to_string();
    Ok(CommandOutput {
        stdout: Some(csv.clone()),
        files: vec![(format!("{name}.csv"), csv)],
        report_file: Some(format!("{name}.json")),
        report: Some(report),
        summary,
        exit_code: EXIT_OK,
    })
}

/// One side of a comparison: either a scenario to run or a trajectory CSV.
#[derive(Debug, Clone)]
pub enum Side {
    Scenario(Box<Scenario>),
    Csv {
        path: String,
        iterates: Vec<SymmetricMatrix>,
    },
}

impl Side {
    pub fn load(source: &str) -> Result<Side, CliError> {
        if source.ends_with(".csv") {
            let text = std::fs::read_to_string(source)
                .map_err(|e| CliError::input(format!("{source}: {e}")))?;
            return Ok(Side::Csv {
                path: source.into(),
                iterates: read_trajectory_csv(&text)?,
            });
        }
        Ok(Side::Scenario(Box::new(scenario::load(source)?)))
    }

    fn iterates(&self) -> Result<Vec<SymmetricMatrix>, CliError> {
        match self {
            Side::Scenario(s) => Ok(s.spec.run()?.iterates),
            Side::Csv { iterates, .. } => Ok(iterates.clone()),
        }
    }

    fn echo(&self) -> serde_json::Value {
        match self {
            Side::Scenario(s) => echo(&s.file),
            Side::Csv { path, .. } => serde_json::json!({ "csv": path }),
        }
    }

    fn with_horizon(self, horizon: Option<usize>) -> Side {
        match (self, horizon) {
            (Side::Scenario(s), Some(h)) => Side::Scenario(Box::new(s.with_horizon(h))),
            (side, _) => side,
        }
    }

    fn tolerance(&self) -> Option<f64> {
        match self {
            Side::Scenario(s) => Some(s.file.tolerances.comparison),
            Side::Csv { .. } => None,
        }
    }
}

/// Resolves compare arguments: one built-in pair name, or two sources.
pub fn compare_sides(sources: &[String]) -> Result<(Side, Side), CliError> {
    match sources {
        [one] => scenario::builtin_pair(one)
            .map(|(a, b)| (Side::Scenario(Box::new(a)), Side::Scenario(Box::new(b))))
            .ok_or_else(|| {
                CliError::input(format!(
                    "{one}: compare needs two scenarios or a built-in pair (example1, example2)"
                ))
            }),
        [a, b] => Ok((Side::load(a)?, Side::load(b)?)),
        _ => Err(CliError::input(
            "compare takes one built-in pair or two scenarios",
        )),
    }
}

pub fn compare(
    first: Side,
    second: Side,
    tol: Option<f64>,
    horizon: Option<usize>,
) -> Result<CommandOutput, CliError> {
    let (first, second) = (first.with_horizon(horizon), second.with_horizon(horizon));
    let tol = tol
        .or(first.tolerance())
        .or(second.tolerance())
        .unwrap_or(riccati_core::DEFAULT_TOL);
    let (x, y) = (first.iterates()?, second.iterates()?);
    if x.len() != y.len() {
        return Err(CliError::input(format!(
            "trajectory lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x[0].dim() != y[0].dim() {
        return Err(CliError::input(format!(
            "state dimensions differ ({} vs {})",
            x[0].dim(),
            y[0].dim()
        )));
    }
    let rep = check_iterate_monotonicity(&x, &y, tol)?;
    let outcome = if rep.inconclusive {
        Outcome::Inconclusive
    } else if rep.is_violation() {
        Outcome::Violation
    } else {
        Outcome::Monotone
    };
    let relation = match rep.initial_relation.relation {
        Relation::GreaterEqual => "P_1 >= P^_1",
        Relation::LessEqual => "P_1 <= P^_1",
        Relation::Equal => "P_1 == P^_1 (inconclusive)",
        Relation::Incomparable => "P_1, P^_1 incomparable (inconclusive)",
    };
    let summary = match (&rep.first_violation, &rep.violation_witness) {
        (Some(t), Some(w)) => format!(
            "{relation}; order lost at step {t} (witness eigenvalue {:.6e})",
            w.min_eigenvalue
        ),
        _ => format!("{relation}; no violation over {} steps", rep.compared_steps),
    };
    let mut report = RunReport::new("compare", vec![first.echo(), second.echo()], outcome);
    report.comparison = Some(rep);
    Ok(CommandOutput {
        stdout: None,
        files: Vec::new(),
        report_file: Some("compare.json".into()),
        report: Some(report),
        summary,
        exit_code: EXIT_OK,
    })
}

/// Search config file: a [`SearchConfig`] plus `schema_version`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfigFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub config: SearchConfig,
}

pub const BUILTIN_SEARCHES: &[&str] = &[
    "example1-pinned",
    "around-example1",
    "constant-q",
    "decreasing-q",
];

pub fn load_search_config(source: &str) -> Result<SearchConfig, CliError> {
    let path = Path::new(source);
    if path.exists() {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{source}: {e}")))?;
        let file: SearchConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("search config: {e}")))?;
        if file.schema_version != scenario::SCHEMA_VERSION {
            return Err(CliError::input(format!(
                "unsupported schema_version {}",
                file.schema_version
            )));
        }
        return Ok(file.config);
    }
    match source {
        "example1-pinned" => Ok(SearchConfig::example1_pinned()),
        "around-example1" => Ok(SearchConfig::around_example1()),
        "constant-q" => Ok(SearchConfig::constant_q(100_000)),
        "decreasing-q" => Ok(SearchConfig::decreasing_q(100_000)),
        _ => Err(CliError::input(format!(
            "{source}: no such file or built-in search (built-ins: {})",
            BUILTIN_SEARCHES.join(", ")
        ))),
    }
}

pub fn search(
    mut config: SearchConfig,
    seed: u64,
    tol: Option<f64>,
    budget: Option<usize>,
    horizon: Option<usize>,
) -> Result<CommandOutput, CliError> {
    if let Some(t) = tol {
        config.tolerance = t;
    }
    if let Some(b) = budget {
        config.budget = b;
    }
    if let Some(h) = horizon {
        config.horizon = h;
    }
    let found: Option<CounterexampleReport> = search_counterexample(&config, seed)?;
    let input = echo(&SearchConfigFile {
        schema_version: scenario::SCHEMA_VERSION,
        config: config.clone(),
    });
    let (outcome, exit_code, summary) = match &found {
        Some(c) => (
            Outcome::Found,
            EXIT_OK,
            format!(
                "counterexample at sample {}: order lost at step {} (revalidated: {})",
                c.sample_index, c.violating_step, c.revalidated
            ),
        ),
        None => (
            Outcome::NoneFound,
            EXIT_EXHAUSTED,
            format!("none found in {} samples", config.budget),
        ),
    };
    let mut report = RunReport::new("search", vec![input], outcome);
    report.seed = Some(seed);
    report.counterexample = found;
    Ok(CommandOutput {
        stdout: None,
        files: Vec::new(),
        report_file: Some("search.json".into()),
        report: Some(report),
        summary,
        exit_code,
    })
}

pub fn figures(which: &[u8], grid: &Grid, horizon: usize) -> Result<CommandOutput, CliError> {
    let mut files = Vec::new();
    for &w in which {
        files.extend(figures::figure(w, grid, horizon)?);
    }
    let summary = format!(
        "wrote {}",
        files
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(CommandOutput {
        exit_code: EXIT_OK,
        report: None,
        files,
        stdout: None,
        report_file: None,
        summary,
    })
}
