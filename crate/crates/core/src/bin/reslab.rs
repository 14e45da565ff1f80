//! `reslab` command-line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use reslab::dynamics::{self, Galerkin, PEquation, Scheme, SpectralState, TimeFourierField};
use reslab::fourier::{self, rel_err};
use reslab::nondegeneracy::{self, DEFAULT_M_SCAN};
use reslab::resonant;
use reslab::{Error, ModelSpec};

#[derive(Parser)]
#[command(name = "reslab", version, about = "Mode couplings, resonant operators and periodic-wave diagnostics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// allow indices outside the validated ranges
    #[arg(long, global = true)]
    unchecked: bool,
    /// override the command's numerical tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Cw,
    Ch,
    Ym,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ggmm,
    Cbar,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    StormerVerlet,
    RotatingVerlet,
    TripleJump,
}

#[derive(Args)]
struct ModelOpts {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// CH parameter (μ1 = μ2 = mu)
    #[arg(long, default_value_t = 0)]
    mu: u32,
}

impl ModelOpts {
    fn spec(&self) -> Result<ModelSpec, Error> {
        match (self.model, self.mu) {
            (ModelArg::Cw, 0) => Ok(ModelSpec::Cw),
            (ModelArg::Ym, 0) => Ok(ModelSpec::Ym),
            (ModelArg::Ch, mu) => Ok(ModelSpec::ch(mu)),
            _ => Err(Error::Domain("--mu applies to the ch model only".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// closed-form coefficients against direct quadrature
    Coeffs {
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        gamma: Option<usize>,
        /// first index of a 𝔠̄ family
        #[arg(long)]
        i: Option<usize>,
        /// second index of a 𝔠̄ family
        #[arg(long)]
        j: Option<usize>,
        /// inclusive index range a..b
        #[arg(long)]
        m: Option<String>,
        /// a single 3- or 4-index coefficient
        #[arg(long, num_args = 3..=4)]
        quad: Option<Vec<usize>>,
    },
    /// non-degeneracy certificate at a 1-mode
    Certify {
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long)]
        gamma: usize,
        #[arg(long, default_value_t = DEFAULT_M_SCAN)]
        mscan: usize,
    },
    /// Galerkin evolution of perturbed 1-mode data
    Simulate {
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long)]
        mode: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = dynamics::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// defaults to one linear period
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
        #[arg(long, value_enum, default_value_t = SchemeArg::RotatingVerlet)]
        scheme: SchemeArg,
        /// return distances for ε ∈ {2 eps, eps, eps/2}
        #[arg(long)]
        period_scan: bool,
    },
    /// truncated P-equation by contraction
    Pequation {
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long)]
        vmode: usize,
        #[arg(long)]
        vamp: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = dynamics::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = dynamics::DEFAULT_L)]
        l: usize,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
    /// strong Diophantine membership test
    Diophantine {
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lmax: usize,
    },
}

enum Cell {
    Num(f64),
    Int(i64),
    Str(String),
    Null,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
    extra: Option<Value>,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(i) => json!(i),
            Cell::Str(s) => json!(s),
            Cell::Null => Value::Null,
        }
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn opt(x: Option<f64>) -> Cell {
    x.map(Cell::Num).unwrap_or(Cell::Null)
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn emit(common: &Common, table: &Table) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match &common.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    match common.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Object(table.header.iter().zip(r).map(|(h, c)| (h.clone(), c.json())).collect::<Map<_, _>>()))
                .collect();
            let mut doc = Map::new();
            doc.insert("rows".into(), Value::Array(rows));
            if let Some(extra) = &table.extra {
                doc.insert("summary".into(), extra.clone());
            }
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &Value::Object(doc)).map_err(|e| Failure::Io(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("range `{s}` is not of the form a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

const MAX_INDEX: usize = 200;

fn coeff_row(model: ModelSpec, idx: &[usize]) -> Result<Vec<Cell>, Error> {
    let closed = closed_value(model, idx)?;
    let oracle = fourier::oracle_coeff(model, idx)?;
    let names: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    Ok(vec![Cell::Str(names.join(" ")), opt(closed), Cell::Num(oracle), opt(closed.map(|c| rel_err(c, oracle)))])
}

/// Closed form where one exists for the index pattern.
fn closed_value(model: ModelSpec, idx: &[usize]) -> Result<Option<f64>, Error> {
    let pair = |idx: &[usize]| -> Option<(usize, usize)> {
        let mut s = idx.to_vec();
        s.sort_unstable();
        (s.len() == 4 && s[0] == s[1] && s[2] == s[3]).then_some((s[0], s[2]))
    };
    Ok(match (model, idx.len()) {
        (ModelSpec::Cw, 4) => Some(fourier::cw_coeff(idx[0], idx[1], idx[2], idx[3]) as f64),
        (ModelSpec::Ym, 3) => Some(fourier::ym_cbar(idx[0], idx[1], idx[2])),
        (ModelSpec::Ym, 4) => match pair(idx) {
            Some((g, m)) if m >= 2 * g + 1 => Some(fourier::ym_c_ggmm(g, m)?),
            _ => None,
        },
        (ModelSpec::Ch { mu1, mu2 }, 4) if mu1 == mu2 => match pair(idx) {
            Some((g, m)) => Some(fourier::ch_coeff_ggmm(g, m, mu1)?),
            None => None,
        },
        _ => None,
    })
}

fn index_bound(unchecked: bool, idx: usize) -> Result<(), Failure> {
    if !unchecked && idx > MAX_INDEX {
        return Err(Failure::Lib(Error::Index(format!("index {idx} exceeds {MAX_INDEX}; pass --unchecked to allow"))));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_coeffs(
    common: &Common,
    model: ModelSpec,
    family: Option<Family>,
    gamma: Option<usize>,
    i: Option<usize>,
    j: Option<usize>,
    m: Option<String>,
    quad: Option<Vec<usize>>,
) -> Result<ExitCode, Failure> {
    let tuples: Vec<Vec<usize>> = if let Some(q) = quad {
        for &k in &q {
            index_bound(common.unchecked, k)?;
        }
        vec![q]
    } else {
        let range = m.ok_or_else(|| Failure::Usage("coeffs needs --quad or --family with --m".into()))?;
        let (a, b) = parse_range(&range)?;
        if a <= b {
            index_bound(common.unchecked, b)?;
        }
        match family.ok_or_else(|| Failure::Usage("--family is required with --m".into()))? {
            Family::Ggmm => {
                let g = gamma.ok_or_else(|| Failure::Usage("--gamma is required for the ggmm family".into()))?;
                if !common.unchecked {
                    nondegeneracy::check_validated_range(model, g)?;
                }
                (a..=b).map(|m| vec![g, g, m, m]).collect()
            }
            Family::Cbar => {
                if model != ModelSpec::Ym {
                    return Err(Failure::Usage("the cbar family exists for ym only".into()));
                }
                let (i, j) = (
                    i.ok_or_else(|| Failure::Usage("--i is required for cbar".into()))?,
                    j.ok_or_else(|| Failure::Usage("--j is required for cbar".into()))?,
                );
                index_bound(common.unchecked, i.max(j))?;
                (a..=b).map(|m| vec![i, j, m]).collect()
            }
        }
    };
    let rows = tuples.par_iter().map(|t| coeff_row(model, t)).collect::<Result<Vec<_>, _>>()?;
    let tol = common.tol.unwrap_or(1e-10);
    let worst = rows
        .iter()
        .filter_map(|r| match r[3] {
            Cell::Num(x) => Some(x),
            _ => None,
        })
        .fold(0.0f64, f64::max);
    if worst > tol {
        eprintln!("warning: largest relative error {worst:e} exceeds tolerance {tol:e}");
    }
    emit(common, &Table { header: cols(&["indices", "closed_value", "oracle_value", "rel_err"]), rows, extra: None })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(common: &Common, model: ModelSpec, gamma: usize, mscan: usize) -> Result<ExitCode, Failure> {
    let r = nondegeneracy::certify(model, gamma, mscan, common.unchecked)?;
    let mut rows = vec![
        vec![Cell::Str("gamma_entry".into()), Cell::Int(gamma as i64), Cell::Num(r.gamma_entry)],
        vec![Cell::Str("diagonal_min".into()), Cell::Int(r.diagonal_min_at as i64), Cell::Num(r.diagonal_min)],
    ];
    rows.extend(r.determinants.iter().map(|&(n, d)| vec![Cell::Str("determinant".into()), Cell::Int(n as i64), Cell::Num(d)]));
    rows.extend(r.direct_checks.iter().map(|&(m, d)| vec![Cell::Str("direct_check".into()), Cell::Int(m as i64), Cell::Num(d)]));
    rows.push(vec![Cell::Str(format!("tail_bound_{:?}", r.tail_bound_name)), Cell::Int(r.tail_from as i64), Cell::Num(r.tail_bound)]);
    rows.extend(r.tail_violations.iter().map(|&m| vec![Cell::Str("tail_violation".into()), Cell::Int(m as i64), Cell::Null]));
    rows.push(vec![Cell::Str("verdict".into()), Cell::Null, Cell::Str(r.verdict.to_string())]);
    let extra = serde_json::to_value(&r).map_err(|e| Failure::Io(e.to_string()))?;
    emit(common, &Table { header: cols(&["kind", "index", "value"]), rows, extra: Some(extra) })?;
    Ok(if r.verdict { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn scheme(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::StormerVerlet => Scheme::StormerVerlet,
        SchemeArg::RotatingVerlet => Scheme::RotatingVerlet,
        SchemeArg::TripleJump => Scheme::TripleJump,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    common: &Common,
    model: ModelSpec,
    mode: usize,
    eps: f64,
    n: usize,
    dt: f64,
    steps: Option<usize>,
    sample_every: usize,
    sch: SchemeArg,
    period_scan: bool,
) -> Result<ExitCode, Failure> {
    if !common.unchecked {
        nondegeneracy::check_validated_range(model, mode)?;
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Failure::Lib(Error::Domain(format!("eps = {eps} must be positive"))));
    }
    let sign: i8 = if model == ModelSpec::Ym { -1 } else { 1 };
    let om = resonant::one_mode(model, mode, sign)?;
    let g = Galerkin::new(model, n)?;
    if period_scan {
        let sigma = sign as f64;
        let steps_per_period = steps.unwrap_or((2.0 * std::f64::consts::PI / dt).round() as usize);
        let epss = [2.0 * eps, eps, 0.5 * eps];
        let ms = epss
            .par_iter()
            .map(|&e| dynamics::measure_return(&g, mode, om.amplitude, e, sigma, steps_per_period))
            .collect::<Result<Vec<_>, _>>()?;
        let xs: Vec<f64> = ms.iter().map(|m| m.eps).collect();
        let ex = |f: fn(&dynamics::ReturnMeasurement) -> f64| dynamics::fitted_exponent(&xs, &ms.iter().map(f).collect::<Vec<_>>());
        let (e1, e2, e3) = (ex(|m| m.return_distance), ex(|m| m.return_distance_rescaled), ex(|m| m.sup_distance_rescaled));
        eprintln!("fitted exponents: return_distance {e1:.4}, return_distance_rescaled {e2:.4}, sup_distance_rescaled {e3:.4}");
        let rows = ms
            .iter()
            .map(|m| vec![Cell::Num(m.eps), Cell::Num(m.return_distance), Cell::Num(m.return_distance_rescaled), Cell::Num(m.sup_distance_rescaled)])
            .collect();
        let extra = json!({"exponent_return_distance": e1, "exponent_return_distance_rescaled": e2, "exponent_sup_distance_rescaled": e3});
        emit(
            common,
            &Table { header: cols(&["eps", "return_distance", "return_distance_rescaled", "sup_distance_rescaled"]), rows, extra: Some(extra) },
        )?;
        return Ok(ExitCode::SUCCESS);
    }
    if mode >= n {
        return Err(Failure::Lib(Error::Index(format!("mode {mode} outside truncation {n}"))));
    }
    let mut u = vec![0.0; n];
    u[mode] = eps * om.amplitude;
    let s0 = SpectralState::at_rest(u)?;
    let steps = steps.unwrap_or((2.0 * std::f64::consts::PI / (model.omega(mode) * dt)).round() as usize);
    let tr = dynamics::integrate(&g, &s0, dt, steps, scheme(sch), Some(sample_every.max(1)))?;
    eprintln!("max relative energy drift {:e}", tr.max_relative_drift);
    let mut names: Vec<String> = vec!["t".into()];
    names.extend((0..n).map(|k| format!("u{k}")));
    names.extend((0..n).map(|k| format!("v{k}")));
    names.push("energy".into());
    let rows = tr
        .samples
        .iter()
        .map(|(s, e)| {
            let mut r = vec![Cell::Num(s.t)];
            r.extend(s.u.iter().chain(&s.v).map(|&x| Cell::Num(x)));
            r.push(Cell::Num(*e));
            r
        })
        .collect();
    emit(common, &Table { header: names, rows, extra: Some(json!({"max_relative_drift": tr.max_relative_drift})) })?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_pequation(
    common: &Common,
    model: ModelSpec,
    vmode: usize,
    vamp: f64,
    omega: f64,
    alpha: f64,
    n: usize,
    l: usize,
    max_iter: usize,
) -> Result<ExitCode, Failure> {
    let dio = dynamics::diophantine_member(omega, alpha, model, l)?;
    if !dio.member && !common.unchecked {
        return Err(Failure::Lib(Error::Domain(format!(
            "omega = {omega} violates the Diophantine bound at l = {} (margin {:e} < alpha = {alpha})",
            dio.worst_l, dio.margin
        ))));
    }
    let v = TimeFourierField::kernel_mode(model, n, l, vmode, vamp)?;
    let pe = PEquation::new(model, omega, n, l)?;
    let tol = common.tol.unwrap_or(1e-13);
    let sol = pe.solve(&v, tol, max_iter)?;
    eprintln!("iterations {}, residual {:e}, |q| {:e}, |v| {:e}", sol.iterations, sol.residual, sol.norm_q, sol.norm_v);
    let mut rows = Vec::new();
    for li in 0..=l {
        for j in 0..n {
            let x = sol.q.get(li, j);
            if x != 0.0 {
                rows.push(vec![Cell::Int(li as i64), Cell::Int(j as i64), Cell::Num(x)]);
            }
        }
    }
    let extra = json!({
        "iterations": sol.iterations,
        "increment": sol.increment,
        "residual": sol.residual,
        "norm_q": sol.norm_q,
        "norm_v": sol.norm_v,
        "smallest_divisor": sol.smallest_divisor,
    });
    emit(common, &Table { header: cols(&["l", "j", "q"]), rows, extra: Some(extra) })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diophantine(common: &Common, model: ModelSpec, omega: f64, alpha: f64, lmax: usize) -> Result<ExitCode, Failure> {
    let r = dynamics::diophantine_member(omega, alpha, model, lmax)?;
    let status = if r.member { "member" } else { "non-member" };
    let rows = vec![vec![Cell::Str(status.into()), Cell::Num(r.margin), Cell::Int(r.worst_l as i64), Cell::Int(r.worst_j as i64)]];
    emit(common, &Table { header: cols(&["status", "margin", "worst_l", "worst_j"]), rows, extra: None })?;
    Ok(if r.member { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let c = &cli.common;
    match cli.command {
        Command::Coeffs { model, family, gamma, i, j, m, quad } => cmd_coeffs(c, model.spec()?, family, gamma, i, j, m, quad),
        Command::Certify { model, gamma, mscan } => cmd_certify(c, model.spec()?, gamma, mscan),
        Command::Simulate { model, mode, eps, n, dt, steps, sample_every, scheme, period_scan } => {
            cmd_simulate(c, model.spec()?, mode, eps, n, dt, steps, sample_every, scheme, period_scan)
        }
        Command::Pequation { model, vmode, vamp, omega, alpha, n, l, max_iter } => {
            cmd_pequation(c, model.spec()?, vmode, vamp, omega, alpha, n, l, max_iter)
        }
        Command::Diophantine { model, omega, alpha, lmax } => cmd_diophantine(c, model.spec()?, omega, alpha, lmax),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = std::env::var("RESLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            match f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
            }
            ExitCode::from(1)
        }
    }
}
