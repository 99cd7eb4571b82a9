//! Data series behind the four standard plots: the scalar Newton-Hewer and
//! Riccati maps `P_t -> P_{t+1}`, and the two counterexample trajectory pairs.

use riccati_core::{
    build_example1, build_example2, scalar_newton_hewer_step, scalar_riccati_step,
    solve_dare_fixed_point, SystemParams,
};

use crate::error::CliError;
use crate::report::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            min: 0.0,
            max: 6.0,
            points: 601,
        }
    }
}

impl Grid {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.min < self.max)
            || self.points < 2
        {
            return Err(CliError::input(format!(
                "invalid grid [{}, {}] with {} points",
                self.min, self.max, self.points
            )));
        }
        Ok(())
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(move |i| self.min + step * i as f64)
    }
}

/// `(a, b, q, r)`.
type Scalars = (f64, f64, f64, f64);

struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Csv(w)
    }

    fn row(&mut self, cells: Vec<String>) {
        self.0.write_record(&cells).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.0.into_inner().expect("flush")).expect("utf8")
    }
}

/// Undefined points (induced gain not stabilizing) are left empty.
fn nh_cell(p: f64, (a, b, q, r): Scalars) -> String {
    scalar_newton_hewer_step(p, a, b, q, r)
        .map(fmt_num)
        .unwrap_or_default()
}

fn fixed_point((a, b, q, r): Scalars) -> Result<f64, CliError> {
    let sys = SystemParams::scalar(a, b, q, r)?;
    Ok(solve_dare_fixed_point(&sys, 1e-14, 100_000)?.get(0, 0))
}

fn fixed_points_csv(rows: &[(&str, Scalars)]) -> Result<String, CliError> {
    let mut out = Csv::new(&["curve", "a", "b", "q", "r", "p_star"]);
    for (name, params) in rows {
        let (a, b, q, r) = *params;
        out.row(vec![
            name.to_string(),
            fmt_num(a),
            fmt_num(b),
            fmt_num(q),
            fmt_num(r),
            fmt_num(fixed_point(*params)?),
        ]);
    }
    Ok(out.finish())
}

const UNIT: Scalars = (1.0, 1.0, 1.0, 1.0);
const Q_TWO: Scalars = (1.0, 1.0, 2.0, 1.0);

/// Newton-Hewer and Riccati maps for `(A, B, R, Q) = (1, 1, 1, 1)`.
pub fn figure1(grid: &Grid) -> Result<Vec<(String, String)>, CliError> {
    grid.validate()?;
    let mut out = Csv::new(&["p", "identity", "newton_hewer", "riccati_difference"]);
    let (a, b, q, r) = UNIT;
    for p in grid.values() {
        out.row(vec![
            fmt_num(p),
            fmt_num(p),
            nh_cell(p, UNIT),
            fmt_num(scalar_riccati_step(p, a, b, q, r)),
        ]);
    }
    Ok(vec![
        ("fig1.csv".into(), out.finish()),
        (
            "fig1_fixed_points.csv".into(),
            fixed_points_csv(&[("newton_hewer", UNIT), ("riccati_difference", UNIT)])?,
        ),
    ])
}

/// Newton-Hewer maps for `Q = 1` and `Q = 2`, other parameters 1.
pub fn figure2(grid: &Grid) -> Result<Vec<(String, String)>, CliError> {
    grid.validate()?;
    let mut out = Csv::new(&["p", "identity", "newton_hewer_q1", "newton_hewer_q2"]);
    for p in grid.values() {
        out.row(vec![
            fmt_num(p),
            fmt_num(p),
            nh_cell(p, UNIT),
            nh_cell(p, Q_TWO),
        ]);
    }
    Ok(vec![
        ("fig2.csv".into(), out.finish()),
        (
            "fig2_fixed_points.csv".into(),
            fixed_points_csv(&[("newton_hewer_q1", UNIT), ("newton_hewer_q2", Q_TWO)])?,
        ),
    ])
}

/// The first counterexample: Newton-Hewer with `Q = 1, 2, 2, ..`, Newton-Hewer
/// with `Q = 2`, and the Riccati difference equation on `Q = 1, 2, 2, ..`
/// started from the first trajectory's `P_1`.
pub fn figure3(horizon: usize) -> Result<Vec<(String, String)>, CliError> {
    let sc = build_example1(horizon);
    let varying = sc.first.run()?.scalar_iterates();
    let constant = sc.second.run()?.scalar_iterates();
    let companion = sc
        .companion
        .as_ref()
        .expect("example 1 has a companion")
        .run()?;
    let riccati = companion.scalar_iterates();
    let mut out = Csv::new(&[
        "t",
        "q",
        "newton_hewer_varying_q",
        "newton_hewer_constant_q",
        "riccati_difference_varying_q",
    ]);
    for t in 0..horizon {
        out.row(vec![
            (t + 1).to_string(),
            fmt_num(companion.schedule.slice(t + 1).q().get(0, 0)),
            fmt_num(varying[t]),
            fmt_num(constant[t]),
            fmt_num(riccati[t]),
        ]);
    }
    Ok(vec![("fig3.csv".into(), out.finish())])
}

/// The second counterexample: shared alternating `Q`, two initial gains.
pub fn figure4(horizon: usize) -> Result<Vec<(String, String)>, CliError> {
    let sc = build_example2(horizon);
    let (a, b) = sc.run()?;
    let (pa, pb) = (a.scalar_iterates(), b.scalar_iterates());
    let mut out = Csv::new(&["t", "q", "newton_hewer_k0_0.6180", "newton_hewer_k0_0.7321"]);
    for t in 0..horizon {
        out.row(vec![
            (t + 1).to_string(),
            fmt_num(a.schedule.slice(t + 1).q().get(0, 0)),
            fmt_num(pa[t]),
            fmt_num(pb[t]),
        ]);
    }
    Ok(vec![("fig4.csv".into(), out.finish())])
}

pub fn figure(which: u8, grid: &Grid, horizon: usize) -> Result<Vec<(String, String)>, CliError> {
    match which {
        1 => figure1(grid),
        2 => figure2(grid),
        3 => figure3(horizon),
        4 => figure4(horizon),
        other => Err(CliError::input(format!("no figure {other} (choose 1-4)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(csv: &str, name: &str) -> Vec<Option<f64>> {
        let mut r = csv::Reader::from_reader(csv.as_bytes());
        let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
        r.records()
            .map(|rec| rec.unwrap()[idx].parse().ok())
            .collect()
    }

    /// Grid point where `curve(p) - p` changes sign from + to -.
    fn crossing(csv: &str, curve: &str) -> f64 {
        let p = column(csv, "p");
        let f = column(csv, curve);
        for i in 1..p.len() {
            if let (Some(f0), Some(f1)) = (f[i - 1], f[i]) {
                let (p0, p1) = (p[i - 1].unwrap(), p[i].unwrap());
                if f0 - p0 > 0.0 && f1 - p1 <= 0.0 {
                    return p1;
                }
            }
        }
        panic!("no crossing for {curve}");
    }

    #[test]
    fn figure1_crosses_identity_at_golden_ratio() {
        let files = figure1(&Grid::default()).unwrap();
        let csv = &files[0].1;
        assert_eq!(csv.lines().count(), 602);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((crossing(csv, "newton_hewer") - golden).abs() <= 0.01);
        assert!((crossing(csv, "riccati_difference") - golden).abs() <= 0.01);
        // p = 0 is on the stability boundary for this system
        assert_eq!(column(csv, "newton_hewer")[0], None);
        assert!(files[1].1.contains("1.6180339887"));
    }

    #[test]
    fn figure2_second_curve_crosses_at_one_plus_sqrt3() {
        let files = figure2(&Grid::default()).unwrap();
        assert!((crossing(&files[0].1, "newton_hewer_q2") - (1.0 + 3f64.sqrt())).abs() <= 0.01);
        assert!(files[1].1.contains("2.7320508075"));
    }

    #[test]
    fn figure3_dashed_series_is_constant() {
        let files = figure3(6).unwrap();
        let dashed = column(&files[0].1, "newton_hewer_constant_q");
        assert_eq!(dashed.len(), 6);
        for v in dashed {
            assert!((v.unwrap() - 2.7321).abs() < 5e-4);
        }
    }

    #[test]
    fn figure4_rows() {
        let files = figure4(6).unwrap();
        let a = column(&files[0].1, "newton_hewer_k0_0.6180");
        assert!((a[1].unwrap() - 1.7352).abs() < 5e-4);
    }

    #[test]
    fn bad_grid_and_figure() {
        let g = Grid {
            min: 3.0,
            max: 1.0,
            points: 10,
        };
        assert_eq!(figure1(&g).unwrap_err().code, 1);
        assert_eq!(figure(7, &Grid::default(), 6).unwrap_err().code, 1);
    }
}
