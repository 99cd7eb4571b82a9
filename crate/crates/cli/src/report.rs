//! JSON run reports and CSV trajectory series.

use riccati_core::{
    CounterexampleReport, Matrix, Method, MonotonicityReport, SymmetricMatrix, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub p: SymmetricMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub q: SymmetricMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub p_star: SymmetricMatrix,
    pub residual_norm: f64,
    pub gain: Matrix,
    pub closed_loop_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Solved,
    Iterated,
    Violation,
    Monotone,
    Inconclusive,
    Found,
    NoneFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub library_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<serde_json::Value>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<MonotonicityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleReport>,
    /// The only field allowed to differ between identical runs.
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, inputs: Vec<serde_json::Value>, outcome: Outcome) -> Self {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.into(),
            library_version: riccati_core::VERSION.into(),
            seed: None,
            inputs,
            outcome,
            steps: Vec::new(),
            solution: None,
            comparison: None,
            counterexample: None,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn step_records(traj: &Trajectory) -> Vec<StepRecord> {
    traj.iterates
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = i + 1;
            let gain = traj.gains.get(i);
            StepRecord {
                t,
                p: p.clone(),
                k: gain.map(|g| g.k.clone()),
                rho: gain.map(|g| g.rho),
                q: traj.schedule.slice(t).q().clone(),
            }
        })
        .collect()
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn matrix_headers(name: &str, rows: usize, cols: usize) -> Vec<String> {
    if rows == 1 && cols == 1 {
        return vec![name.into()];
    }
    (0..rows)
        .flat_map(|i| (0..cols).map(move |j| format!("{name}_{i}_{j}")))
        .collect()
}

/// Columns `t, P.., K.., rho, Q..`. Matrices are flattened row-major with
/// `P_i_j` headers when `n > 1`. Riccati-difference rows leave `K` and `rho`
/// empty.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.schedule.state_dim();
    let m = traj.schedule.input_dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(matrix_headers("P", n, n));
    header.extend(matrix_headers("K", m, n));
    header.push("rho".into());
    header.extend(matrix_headers("Q", n, n));
    w.write_record(&header).expect("in-memory write");
    for rec in step_records(traj) {
        let mut row = vec![rec.t.to_string()];
        row.extend(rec.p.row_major().into_iter().map(fmt_num));
        match (&rec.k, traj.method) {
            (Some(k), Method::NewtonHewer) => row.extend(k.row_major().into_iter().map(fmt_num)),
            _ => row.extend(std::iter::repeat_n(String::new(), m * n)),
        }
        row.push(rec.rho.map(fmt_num).unwrap_or_default());
        row.extend(rec.q.row_major().into_iter().map(fmt_num));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Reads the `P` columns of a trajectory CSV back into matrices.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<SymmetricMatrix>, CliError> {
    let bad = |msg: String| CliError::input(format!("trajectory csv: {msg}"));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let p_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| *h == "P" || h.starts_with("P_"))
        .map(|(i, _)| i)
        .collect();
    let n = (p_cols.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != p_cols.len() {
        return Err(bad(format!(
            "{} P columns is not a square matrix",
            p_cols.len()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let vals = p_cols
            .iter()
            .map(|&i| {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", out.len() + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows: Vec<Vec<f64>> = vals.chunks(n).map(<[f64]>::to_vec).collect();
        out.push(SymmetricMatrix::from_rows(&rows).map_err(|e| bad(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(out)
}
