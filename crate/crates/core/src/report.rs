//! Error norms, observed orders and the convergence tables.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::assembly::{interpolate, Discretization};
use crate::config::{Method, RunConfig};
use crate::ecmg::{ecmg_solve_with, InnerSolver};
use crate::error::{Error, Result};
use crate::grid::{GridHierarchy, GridLevel};
use crate::multigrid::{mg_solve_level, CycleConfig};
use crate::problems::by_name;

/// A pair of discrete norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

/// Root-mean-square over nodes and maximum norm of a nodal vector.
pub fn discrete_norms(v: &[f64], grid: &GridLevel) -> Result<Norms> {
    if v.len() != grid.node_count() {
        return Err(Error::LengthMismatch {
            expected: grid.node_count(),
            found: v.len(),
        });
    }
    let sq: f64 = v.iter().map(|x| x * x).sum();
    let linf = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(Norms {
        l2: (sq / v.len() as f64).sqrt(),
        linf,
    })
}

/// Norms of `a − b`.
pub fn difference_norms(a: &[f64], b: &[f64], grid: &GridLevel) -> Result<Norms> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    discrete_norms(&d, grid)
}

/// `log₂(e_coarse / e_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(Error::NonPositive {
            op: "observed order",
            a: e_coarse,
            b: e_fine,
        });
    }
    Ok((e_coarse / e_fine).log2())
}

fn order_pair(coarse: Option<Norms>, fine: Option<Norms>) -> Option<Norms> {
    let (c, f) = (coarse?, fine?);
    Some(Norms {
        l2: observed_order(c.l2, f.l2).ok()?,
        linf: observed_order(c.linf, f.linf).ok()?,
    })
}

/// One level of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub mesh: String,
    pub level: usize,
    /// Krylov iterations, or outer cycles for multigrid.
    pub iterations: usize,
    pub rel_res: f64,
    /// `U_h − u`.
    pub err: Option<Norms>,
    /// `ũ_h − u`.
    pub err_tilde: Option<Norms>,
    /// `W_h − U_h`.
    pub err_w: Option<Norms>,
    pub order: Option<Norms>,
    pub order_tilde: Option<Norms>,
    pub order_w: Option<Norms>,
    /// `‖W_h − U_h‖₂ / ‖U_h − u‖₂`.
    pub ratio_r: Option<f64>,
    /// Smoothing sweeps on this level for multigrid runs.
    pub sweeps: Option<usize>,
}

impl ReportRow {
    pub fn new(mesh: String, level: usize, iterations: usize, rel_res: f64) -> Self {
        ReportRow {
            mesh,
            level,
            iterations,
            rel_res,
            err: None,
            err_tilde: None,
            err_w: None,
            order: None,
            order_tilde: None,
            order_w: None,
            ratio_r: None,
            sweeps: None,
        }
    }
}

/// Per-level results of one run.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub problem: String,
    pub method: String,
    pub eps: f64,
    pub rows: Vec<ReportRow>,
    /// Informational wall-clock times per phase.
    pub timings: Vec<(String, Duration)>,
}

impl ConvergenceReport {
    /// Appends a row, filling orders from the previous row and the ratio.
    pub fn push(&mut self, mut row: ReportRow) {
        if let Some(prev) = self.rows.last() {
            row.order = order_pair(prev.err, row.err);
            row.order_tilde = order_pair(prev.err_tilde, row.err_tilde);
            row.order_w = order_pair(prev.err_w, row.err_w);
        }
        row.ratio_r = match (row.err_w, row.err) {
            (Some(w), Some(e)) if e.l2 > 0.0 => Some(w.l2 / e.l2),
            _ => None,
        };
        self.rows.push(row);
    }

    pub fn row(&self, mesh: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.mesh == mesh)
    }
}

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "mesh",
    "iters",
    "rel_res",
    "err_l2",
    "order_l2",
    "err_tilde_l2",
    "order_tilde_l2",
    "err_w_l2",
    "order_w_l2",
    "ratio_r",
    "err_linf",
    "order_linf",
    "err_tilde_linf",
    "order_tilde_linf",
    "err_w_linf",
    "order_w_linf",
];

fn sci(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.2e}"))
}

fn csv_record(r: &ReportRow) -> Vec<String> {
    let l2 = |n: Option<Norms>| sci(n.map(|n| n.l2));
    let li = |n: Option<Norms>| sci(n.map(|n| n.linf));
    vec![
        r.mesh.clone(),
        r.iterations.to_string(),
        sci(Some(r.rel_res)),
        l2(r.err),
        l2(r.order),
        l2(r.err_tilde),
        l2(r.order_tilde),
        l2(r.err_w),
        l2(r.order_w),
        sci(r.ratio_r),
        li(r.err),
        li(r.order),
        li(r.err_tilde),
        li(r.order_tilde),
        li(r.err_w),
        li(r.order_w),
    ]
}

/// `4.02(-4)` style used in printed tables.
pub fn compact_sci(x: f64) -> String {
    let s = format!("{x:.2e}");
    match s.split_once('e') {
        Some((m, e)) => format!("{m}({e})"),
        None => s,
    }
}

fn text_table(report: &ConvergenceReport) -> String {
    let mut out = format!(
        "problem {}  method {}  eps {:e}\n",
        report.problem, report.method, report.eps
    );
    let head = [
        "mesh", "iters", "RRe", "|U-u|2", "ord", "|ũ-u|2", "ord", "|W-U|2", "ord", "r_h", "|U-u|∞", "ord", "|ũ-u|∞", "ord",
        "|W-U|∞", "ord",
    ];
    let cells: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let n = |v: Option<Norms>, f: fn(&Norms) -> f64| v.map_or("-".to_string(), |n| compact_sci(f(&n)));
            let o = |v: Option<Norms>, f: fn(&Norms) -> f64| v.map_or("-".to_string(), |n| format!("{:.2}", f(&n)));
            let l2 = |n: &Norms| n.l2;
            let li = |n: &Norms| n.linf;
            vec![
                r.mesh.clone(),
                r.iterations.to_string(),
                compact_sci(r.rel_res),
                n(r.err, l2),
                o(r.order, l2),
                n(r.err_tilde, l2),
                o(r.order_tilde, l2),
                n(r.err_w, l2),
                o(r.order_w, l2),
                r.ratio_r.map_or("-".to_string(), compact_sci),
                n(r.err, li),
                o(r.order, li),
                n(r.err_tilde, li),
                o(r.order_tilde, li),
                n(r.err_w, li),
                o(r.order_w, li),
            ]
        })
        .collect();
    let width: Vec<usize> = (0..head.len())
        .map(|c| cells.iter().map(|r| r[c].chars().count()).chain([head[c].chars().count()]).max().unwrap())
        .collect();
    let line = |row: &[String]| -> String {
        let parts: Vec<String> = row
            .iter()
            .zip(&width)
            .map(|(s, &w)| format!("{}{s}", " ".repeat(w - s.chars().count())))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    out += &line(&head.map(String::from));
    for r in &cells {
        out += &line(r);
    }
    out
}

/// Writes `report` in the requested format.
pub fn emit_report(report: &ConvergenceReport, format: Format, mut sink: impl Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(CSV_COLUMNS).map_err(csv_error)?;
            for r in &report.rows {
                w.write_record(csv_record(r)).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Text => sink.write_all(text_table(report).as_bytes())?,
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Builds the hierarchy, assembles and solves, and tabulates the errors.
pub fn run(config: &RunConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let problem = by_name(&config.problem)?;
    let coarsest = config.coarsest.unwrap_or(problem.default_coarsest);
    let mut report = ConvergenceReport {
        problem: problem.name.clone(),
        method: config.method.name().to_string(),
        eps: config.eps,
        ..Default::default()
    };

    let t = Instant::now();
    let hierarchy = GridHierarchy::build(problem.origin, problem.extent, coarsest, config.levels)?;
    config.check_size(hierarchy.finest())?;
    let disc = Discretization::new(hierarchy, &problem)?;
    report.timings.push(("assembly".into(), t.elapsed()));

    let exact_on = |k: usize| problem.exact.as_ref().map(|u| interpolate(disc.grid(k), u));
    let t = Instant::now();
    match config.method {
        Method::EcmgJcg | Method::EcmgCg => {
            let inner = if config.method == Method::EcmgJcg {
                InnerSolver::Jcg
            } else {
                InnerSolver::Cg
            };
            let levels = ecmg_solve_with(&disc, config.eps, inner, config.interpolation)?;
            report.timings.push(("solve".into(), t.elapsed()));
            for (k, sol) in levels.iter().enumerate().skip(2) {
                let g = disc.grid(k);
                let mut row = ReportRow::new(g.mesh_label(), k, sol.stats.iterations, sol.stats.final_relative_residual);
                if let Some(u) = exact_on(k) {
                    row.err = Some(difference_norms(&sol.u, &u, g)?);
                    if let Some(ut) = &sol.u_tilde {
                        row.err_tilde = Some(difference_norms(ut, &u, g)?);
                    }
                }
                if let Some(w) = &sol.w {
                    row.err_w = Some(difference_norms(w, &sol.u, g)?);
                }
                report.push(row);
            }
        }
        Method::VCycle | Method::WCycle => {
            let cycle = if config.method == Method::VCycle {
                CycleConfig::v11(config.eps)
            } else {
                CycleConfig::w21(config.eps)
            };
            for k in 2..disc.levels() {
                let out = mg_solve_level(&disc, k, &cycle)?;
                let g = disc.grid(k);
                let stats = out.final_stats();
                let mut row = ReportRow::new(g.mesh_label(), k, out.cycles, stats.final_relative_residual);
                row.sweeps = Some(out.finest_sweeps());
                if let Some(u) = exact_on(k) {
                    row.err = Some(difference_norms(&out.u, &u, g)?);
                }
                report.push(row);
            }
            report.timings.push(("solve".into(), t.elapsed()));
        }
    }
    Ok(report)
}
