use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ecmg::config::{parse_cells, Method, RunConfig};
use ecmg::report::{emit_report, run, Format};

/// Convergence experiments for cascadic and classical multigrid.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// p1, p2, p3 or manufactured:{trilinear,robin,varcoef}.
    #[arg(long)]
    problem: Option<String>,
    /// ecmg_jcg, ecmg_cg, vcycle or wcycle.
    #[arg(long)]
    method: Option<String>,
    /// Coarsest grid cells as NX,NY,NZ.
    #[arg(long)]
    coarsest: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// serendipity or lagrange27.
    #[arg(long)]
    interp: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or text.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Permit grids above 128³.
    #[arg(long)]
    allow_large: bool,
    /// key=value file with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> ecmg::Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::from_file_contents(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.problem {
        c.problem = p.clone();
    }
    if let Some(m) = &cli.method {
        c.method = m.parse::<Method>()?;
    }
    if let Some(s) = &cli.coarsest {
        c.coarsest = Some(parse_cells(s)?);
    }
    if let Some(l) = cli.levels {
        c.levels = l;
    }
    if let Some(e) = cli.eps {
        c.eps = e;
    }
    if let Some(i) = &cli.interp {
        c.interpolation = i.parse()?;
    }
    if let Some(o) = &cli.out {
        c.out = Some(o.clone());
    }
    if let Some(f) = &cli.format {
        c.format = f.parse::<Format>()?;
    }
    if let Some(t) = cli.threads {
        c.threads = Some(t);
    }
    c.allow_large |= cli.allow_large;
    c.validate()?;
    Ok(c)
}

fn execute(c: &RunConfig) -> ecmg::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = c.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| ecmg::Error::Config(e.to_string()))?;
    let report = pool.install(|| run(c))?;
    for (phase, t) in &report.timings {
        eprintln!("{phase}: {:.3} s", t.as_secs_f64());
    }
    match &c.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            emit_report(&report, c.format, &mut w)?;
            w.flush()?;
        }
        None => emit_report(&report, c.format, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match build_config(&cli).and_then(|c| execute(&c)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
