//! `uniwkb` — solve power-law bound states, dump wave functions, reproduce
//! the reference table and run the reference solver.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use uniwkb::diagnostics::{compare_row, expectations, reference_rows, CellCheck, CellTolerances, RowComparison};
use uniwkb::oracle::{numerov_solve, reference, Method};
use uniwkb::{solve_level, table1_row, DiagnosticsRecord, Error, PowerLawProblem, ReferenceRow, WaveFunction};

const EXIT_MISMATCH: u8 = 1;
const EXIT_FAILURE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(version, about = "Airy-summed uniform WKB bound states of V(x) = x^k + l(l+1)/x²")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one level and report its energy and accuracy measures.
    Solve(SolveArgs),
    /// Sample the normalized approximate wave function on a grid (CSV).
    Wavefn(WavefnArgs),
    /// Recompute the 26-row reference table and compare cell by cell.
    Table1(Table1Args),
    /// Exact or Numerov reference energy with a resolution check.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Level {
    /// Power of the potential, k ≥ 1.
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    /// Angular momentum.
    #[arg(long, default_value_t = 0)]
    l: u32,
    /// Radial quantum number.
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Override the substitution exponent x = q^s.
    #[arg(long)]
    s: Option<f64>,
}

impl Level {
    fn problem(&self) -> Result<PowerLawProblem, Failure> {
        let p = match self.s {
            Some(s) => PowerLawProblem::with_s(self.k, self.l, s),
            None => PowerLawProblem::new(self.k, self.l),
        };
        p.map_err(Failure::usage)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    level: Level,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WavefnArgs {
    #[command(flatten)]
    level: Level,
    /// `min:max:count`, inclusive and uniform, all points > 0.
    #[arg(long)]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Table1Args {
    /// Keep rows matching `k=…`, `l=…`, `n=…` (comma-separated).
    #[arg(long)]
    only: Option<Filter>,
    /// Relative tolerance for v, d and δe cells.
    #[arg(long)]
    tol_table: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err("expected min:max:count".into());
        };
        let lo: f64 = lo.parse().map_err(|e| format!("min: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("max: {e}"))?;
        let count: usize = count.parse().map_err(|e| format!("count: {e}"))?;
        if count == 0 || !(lo > 0.0) || !(hi.is_finite()) || (count > 1 && !(hi > lo)) {
            return Err("need 0 < min < max and count ≥ 1".into());
        }
        if count == 1 {
            return Ok(Grid(vec![lo]));
        }
        let last = (count - 1) as f64;
        Ok(Grid((0..count).map(|i| lo + (hi - lo) * (i as f64 / last)).collect()))
    }
}

#[derive(Clone, Debug, Default)]
struct Filter {
    k: Option<f64>,
    l: Option<u32>,
    n: Option<u32>,
}

impl FromStr for Filter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut f = Filter::default();
        for term in s.split(',') {
            let (key, value) = term.split_once('=').ok_or_else(|| format!("expected key=value, got {term:?}"))?;
            let bad = |e: &dyn Display| format!("{key}: {e}");
            match key.trim() {
                "k" => f.k = Some(value.trim().parse().map_err(|e| bad(&e))?),
                "l" => f.l = Some(value.trim().parse().map_err(|e| bad(&e))?),
                "n" => f.n = Some(value.trim().parse().map_err(|e| bad(&e))?),
                other => return Err(format!("unknown key {other:?}; use k, l or n")),
            }
        }
        Ok(f)
    }
}

impl Filter {
    fn keeps(&self, r: &ReferenceRow) -> bool {
        self.k.map_or(true, |k| k == r.k) && self.l.map_or(true, |l| l == r.l) && self.n.map_or(true, |n| n == r.n)
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl Display) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: EXIT_FAILURE, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_FAILURE, message: format!("output: {e}") }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure { code: EXIT_FAILURE, message: format!("output: {e}") }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_FAILURE, message: format!("output: {e}") }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(File::create(path).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("cannot write {}: {e}", path.display()),
        })?),
        None => Box::new(io::stdout().lock()),
    })
}

/// The documented `solve` report.
#[derive(Debug, Serialize)]
struct SolveReport {
    k: f64,
    l: u32,
    n: u32,
    s: f64,
    e_app: f64,
    q_minus: f64,
    q_plus: f64,
    t0: f64,
    phi: f64,
    e_prime_app: f64,
    d: f64,
    v: f64,
    e_ex: f64,
    delta_e: f64,
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, Failure> {
    let p = a.level.problem()?;
    let state = solve_level(&p, a.level.n)?;
    let wf = WaveFunction::new(&state)?;
    let ex = expectations(&wf)?;
    let e_ex = reference(p.k, p.l, a.level.n)?.e_ex;
    let report = SolveReport {
        k: p.k,
        l: p.l,
        n: a.level.n,
        s: p.s,
        e_app: ex.e_app,
        q_minus: state.q_minus,
        q_plus: state.q_plus,
        t0: state.origin.t0,
        phi: state.origin.phi,
        e_prime_app: ex.e_prime_app,
        d: ex.d,
        v: ex.v,
        e_ex,
        delta_e: ex.e_app / e_ex - 1.0,
    };
    let mut w = sink(&a.out)?;
    match a.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Text => {
            let v = serde_json::to_value(&report)?;
            for (key, value) in v.as_object().expect("struct serializes to an object") {
                writeln!(w, "{key:<12} {value}")?;
            }
            writeln!(w, "{:<12} {}", "e_quant", state.e)?;
        }
    }
    Ok(0)
}

fn cmd_wavefn(a: &WavefnArgs) -> Result<u8, Failure> {
    let p = a.level.problem()?;
    let wf = WaveFunction::new(&solve_level(&p, a.level.n)?)?;
    let samples = wf.sample_grid(&a.grid.0)?;
    // Every (k, l, n) with k ≥ 1 has a reference; a failure leaves the
    // exact columns empty rather than aborting the dump.
    let exact = reference(p.k, p.l, a.level.n).ok();
    let sign = exact.as_ref().map(|ex| {
        let overlap: f64 = samples.iter().map(|s| s.psi * ex.psi_at(s.x)).sum();
        if overlap < 0.0 {
            -1.0
        } else {
            1.0
        }
    });
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record(["x", "psi_app", "dpsi_app", "h_psi", "psi_exact", "diff"])?;
    for s in &samples {
        let (ex, diff) = match (&exact, sign) {
            (Some(r), Some(sg)) => {
                let e = sg * r.psi_at(s.x);
                (e.to_string(), (s.psi - e).to_string())
            }
            _ => (String::new(), String::new()),
        };
        w.write_record([s.x.to_string(), s.psi.to_string(), s.dpsi.to_string(), s.h_psi.to_string(), ex, diff])?;
    }
    w.flush()?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct TableLine {
    k: f64,
    l: u32,
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    computed: Option<DiagnosticsRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<RowComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    pass: bool,
}

fn cell_text(c: &CellCheck) -> String {
    let mark = if c.pass { ' ' } else { '*' };
    format!("{:>11.4e} {:>11.4e} {:>+9.2e}{mark}", c.computed, c.reference, c.deviation)
}

fn energy_text(c: &CellCheck) -> String {
    let mark = if c.pass { ' ' } else { '*' };
    format!("{:>11.6} {:>11} {:>+9.2e}{mark}", c.computed, c.reference, c.deviation)
}

fn cmd_table1(a: &Table1Args) -> Result<u8, Failure> {
    let mut tol = CellTolerances::default();
    if let Some(t) = a.tol_table {
        if !(t > 0.0) {
            return Err(Failure::usage("--tol-table must be positive"));
        }
        tol.relative = t;
    }
    let filter = a.only.clone().unwrap_or_default();
    let rows: Vec<&ReferenceRow> = reference_rows().iter().filter(|r| filter.keeps(r)).collect();
    let lines: Vec<TableLine> = rows
        .par_iter()
        .map(|r| match table1_row(r.k, r.l, r.n) {
            Ok(rec) => {
                let c = compare_row(&rec, r, &tol);
                TableLine { k: r.k, l: r.l, n: r.n, computed: Some(rec), comparison: Some(c), error: None, pass: c.pass() }
            }
            Err(e) => TableLine { k: r.k, l: r.l, n: r.n, computed: None, comparison: None, error: Some(e.to_string()), pass: false },
        })
        .collect();

    let mut w = sink(&a.out)?;
    match a.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&lines)?)?,
        Format::Text => {
            writeln!(
                w,
                "{:>3} {:>2} {:>2}  {:^34} {:^34} {:^34} {:^34}",
                "k", "l", "n", "v (computed / table / rel)", "d", "e_ex (abs dev)", "δe"
            )?;
            for line in &lines {
                write!(w, "{:>3} {:>2} {:>2}  ", line.k, line.l, line.n)?;
                match (&line.comparison, &line.error) {
                    (Some(c), _) => writeln!(
                        w,
                        "{} {} {} {}",
                        cell_text(&c.v),
                        cell_text(&c.d),
                        energy_text(&c.e_ex),
                        cell_text(&c.delta_e)
                    )?,
                    (None, Some(e)) => writeln!(w, "ERROR {e}")?,
                    (None, None) => unreachable!("a line has either a comparison or an error"),
                }
            }
            let passed = lines.iter().filter(|l| l.pass).count();
            writeln!(
                w,
                "{passed}/{} rows within tolerance (relative {}, zero cells {:e}, e_ex {:e}); * marks failing cells",
                lines.len(),
                tol.relative,
                tol.zero,
                tol.energy
            )?;
        }
    }
    Ok(if lines.iter().all(|l| l.pass) { 0 } else { EXIT_MISMATCH })
}

#[derive(Debug, Serialize)]
struct OracleReport {
    k: f64,
    l: u32,
    n: u32,
    e_ex: f64,
    method: &'static str,
    /// Numerov energies on the full and the half-resolution grid.
    e_numerov: f64,
    e_numerov_half: f64,
    resolution_change: f64,
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8, Failure> {
    PowerLawProblem::new(a.k, a.l).map_err(Failure::usage)?;
    let best = reference(a.k, a.l, a.n)?;
    let num = if best.method == Method::Numerov { best.clone() } else { numerov_solve(a.k, a.l, a.n, 1e-12)? };
    let half = num.e_half_resolution.expect("Numerov reports both resolutions");
    let report = OracleReport {
        k: a.k,
        l: a.l,
        n: a.n,
        e_ex: best.e_ex,
        method: match best.method {
            Method::OscillatorClosedForm => "oscillator closed form",
            Method::AiryClosedForm => "Airy zero",
            Method::Numerov => "Numerov",
        },
        e_numerov: num.e_ex,
        e_numerov_half: half,
        resolution_change: num.e_ex - half,
    };
    let mut w = sink(&a.out)?;
    match a.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Text => {
            let v = serde_json::to_value(&report)?;
            for (key, value) in v.as_object().expect("struct serializes to an object") {
                writeln!(w, "{key:<18} {value}")?;
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Wavefn(a) => cmd_wavefn(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
