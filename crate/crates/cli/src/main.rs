//! `mqlab`: experiments on quasi-periodic block Jacobi operators.

mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mqlab::ergodic::{deviation_ladder, ldt_decay_fit, DEFAULT_Q_LADDER, DEFAULT_S, DEFAULT_SIGMA};
use mqlab::exec::midpoint_grid;
use mqlab::greens::{check_det_lower_bound, check_minor_bound, green_entry_cramer, green_full, BoundFitReport, GreenEntryQuery};
use mqlab::localization::scan::ScanOptions;
use mqlab::localization::{green_decay_scan, localize, resolvent_patch_check, LocalizeOptions};
use mqlab::operator::{assemble_h, assemble_htilde};
use mqlab::quasiperiodic::{check_nondegeneracy, is_diophantine, ModelFile};
use mqlab::{BlockModel, BlockTridiagonal, Error, OperatorParams, Window};
use serde::Serialize;

use output::{num, opt_num, Csv, Provenance};

#[derive(Parser)]
#[command(name = "mqlab", version, about = "Quasi-periodic block Jacobi operator experiments")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, short = 'j', global = true, env = "MQLAB_THREADS")]
    threads: Option<usize>,
    /// Seed for sampled phases, recorded in every output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest k scanned when checking the Diophantine condition.
    #[arg(long, global = true, default_value_t = 1000)]
    k_max: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Minor,
    Det,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-volume H (or the regularized H̃) as block entries.
    Assemble {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x: f64,
        #[arg(long = "E", default_value_t = 0.0, allow_hyphen_values = true)]
        energy: f64,
        /// Site window `u:v`.
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        regularized: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Green's function on a window, or one entry by both routes.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x: f64,
        #[arg(long = "E", allow_hyphen_values = true)]
        energy: f64,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// One 1-based entry `alpha,alpha'`, also computed by Cramer's rule.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Minor upper bound or determinant lower bound sweep.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Large-deviation set measure over a Q ladder.
    Ldt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "E", default_value_t = 0.0, allow_hyphen_values = true)]
        energy: f64,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long = "S", default_value_t = DEFAULT_S)]
        s: f64,
        #[arg(long = "Qs", value_delimiter = ',', default_values_t = DEFAULT_Q_LADDER)]
        qs: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Green's function decay over orbit shifts.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "E", allow_hyphen_values = true)]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long = "N0", default_value_t = 16)]
        n0: usize,
        /// Shift range `a:b`, inclusive.
        #[arg(long, default_value = "0:511", allow_hyphen_values = true)]
        shifts: String,
        /// Scan the shifts of a resolvent patch of scale N2 instead.
        #[arg(long = "patch")]
        patch: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long = "S", default_value_t = DEFAULT_S)]
        s: f64,
        #[arg(long, default_value_t = 1024)]
        nodes: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Eigenpairs on [-N, N] with decay fits.
    Localize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = LocalizeOptions::default().margin)]
        margin: usize,
        #[arg(long, default_value_t = LocalizeOptions::default().floor)]
        floor: f64,
        #[arg(long, default_value_t = LocalizeOptions::default().refine_steps)]
        refine_steps: usize,
    },
    /// Diophantine condition, nondegeneracy and pole phases.
    CheckModel {
        #[command(flatten)]
        common: Common,
        /// Values of t for the nondegeneracy check, `lo:hi:count`.
        #[arg(long, default_value = "-10:10:41", allow_hyphen_values = true)]
        t_grid: String,
        #[arg(long, default_value_t = 4096)]
        x_grid: usize,
    },
}

/// Exit 1 for input problems, 2 for numerical failures.
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PoleProximity { .. }
            | Error::NearSingular { .. }
            | Error::TooManyExclusions { .. }
            | Error::AllZero
            | Error::TooFewPoints { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn read(path: &Path) -> Outcome<Vec<u8>> {
    std::fs::read(path).map_err(|e| config(format!("{}: {e}", path.display())))
}

struct Loaded {
    model: BlockModel,
    bytes: Vec<u8>,
}

fn load_model(path: &Path, k_max: u64) -> Outcome<Loaded> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let model = ModelFile::from_json(text)
        .and_then(|f| f.build())
        .map_err(|e| config(format!("{}: {e}", path.display())))?;
    if k_max == 0 {
        return Err(config("--k-max must be at least 1"));
    }
    let dioph = is_diophantine(model.omega(), model.dioph(), k_max);
    if !dioph.satisfied {
        eprintln!(
            "warning: omega = {} fails the Diophantine condition at k = {} (ratio {:.3e}, A = {}, C0 = {})",
            model.omega(),
            dioph.worst_k,
            dioph.worst_ratio,
            model.dioph().a,
            model.dioph().c0
        );
    }
    Ok(Loaded { model, bytes })
}

fn parse_window(s: &str) -> Outcome<Window> {
    let (u, v) = s.split_once(':').ok_or_else(|| config(format!("window: expected u:v, got {s:?}")))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| config(format!("window: {t:?}: {e}")));
    Ok(Window::new(parse(u)?, parse(v)?)?)
}

fn parse_grid(s: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || config(format!("t-grid: expected lo:hi:count, got {s:?}"));
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || hi < lo || !hi.is_finite() || !lo.is_finite() {
        return Err(bad());
    }
    Ok((0..n).map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect())
}

/// Arguments that identify the experiment: everything except the output
/// path and the thread count.
fn command_line() -> String {
    let mut kept = Vec::new();
    let mut skip = false;
    for a in std::env::args().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if ["--out", "--threads", "-j"].contains(&a.as_str()) {
            skip = true;
        } else if !(a.starts_with("--out=") || a.starts_with("--threads=")) {
            kept.push(a);
        }
    }
    kept.join(" ")
}

fn block_rows(h: &BlockTridiagonal) -> Vec<(i64, i64, usize, usize, f64)> {
    let (n, l, u) = (h.n_sites(), h.l(), h.window().u);
    let mut rows = Vec::new();
    for p in 0..n {
        for q in p.saturating_sub(1)..(p + 2).min(n) {
            let b = h.block(p, q).expect("tridiagonal block");
            for i in 0..l {
                for j in 0..l {
                    rows.push((u + p as i64, u + q as i64, i + 1, j + 1, b[(i, j)]));
                }
            }
        }
    }
    rows
}

#[derive(Serialize)]
struct Entry {
    block_row: i64,
    block_col: i64,
    i: usize,
    j: usize,
    value: f64,
}

fn entries_out(prov: &Provenance, rows: Vec<(i64, i64, usize, usize, f64)>, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut csv = Csv::new(prov, &["block_row", "block_col", "i", "j", "value"]);
            for (br, bc, i, j, v) in rows {
                csv.row([br.to_string(), bc.to_string(), i.to_string(), j.to_string(), num(v)]);
            }
            csv.finish()
        }
        Format::Json => {
            let entries: Vec<Entry> =
                rows.into_iter().map(|(block_row, block_col, i, j, value)| Entry { block_row, block_col, i, j, value }).collect();
            output::json(prov, &entries)
        }
    }
}

fn bounds_out(prov: &Provenance, report: &BoundFitReport, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut csv = Csv::new(prov, &["N", "lambda", "E", "x", "quantity", "slack"]);
            for s in &report.samples {
                csv.row([s.n.to_string(), num(s.lambda), num(s.energy), opt_num(s.x), num(s.quantity), num(s.slack)]);
            }
            csv.finish()
        }
        Format::Json => output::json(prov, report),
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let (seed, k_max) = (cli.seed, cli.k_max);
    let prov = |bytes: &[u8]| Provenance::new(bytes, seed, command_line());
    let emit = |out: &Option<PathBuf>, text: String| {
        output::emit(out.as_deref(), &text).map_err(|e| config(format!("writing output: {e}")))
    };
    match cli.command {
        Command::Assemble { common, lambda, x, energy, window, regularized, format } => {
            let m = load_model(&common.model, k_max)?;
            let params = OperatorParams::new(lambda, x, energy, parse_window(&window)?)?;
            let h = if regularized { assemble_htilde(&m.model, &params) } else { assemble_h(&m.model, &params)? };
            emit(&common.out, entries_out(&prov(&m.bytes), block_rows(&h), format))
        }
        Command::Green { common, lambda, x, energy, window, entry, format } => {
            let m = load_model(&common.model, k_max)?;
            let window = parse_window(&window)?;
            let params = OperatorParams::new(lambda, x, energy, window)?;
            let g = green_full(&m.model, &params)?;
            let p = prov(&m.bytes);
            let text = match entry {
                None => {
                    let l = m.model.l();
                    let rows = (0..g.nrows())
                        .flat_map(|r| (0..g.ncols()).map(move |c| (r, c)))
                        .map(|(r, c)| (window.u + (r / l) as i64, window.u + (c / l) as i64, r % l + 1, c % l + 1, g[(r, c)]))
                        .collect();
                    entries_out(&p, rows, format)
                }
                Some(spec) => {
                    let bad = || config(format!("entry: expected alpha,alpha', got {spec:?}"));
                    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
                    let query = GreenEntryQuery {
                        alpha: a.trim().parse().map_err(|_| bad())?,
                        alpha_prime: b.trim().parse().map_err(|_| bad())?,
                    };
                    let cramer = green_entry_cramer(&m.model, &params, query)?;
                    let value = g[(query.alpha - 1, query.alpha_prime - 1)];
                    #[derive(Serialize)]
                    struct One {
                        alpha: usize,
                        alpha_prime: usize,
                        value: f64,
                        cramer_abs: f64,
                    }
                    match format {
                        Format::Csv => {
                            let mut csv = Csv::new(&p, &["alpha", "alpha_prime", "value", "cramer_abs"]);
                            csv.row([query.alpha.to_string(), query.alpha_prime.to_string(), num(value), num(cramer)]);
                            csv.finish()
                        }
                        Format::Json => output::json(
                            &p,
                            &One { alpha: query.alpha, alpha_prime: query.alpha_prime, value, cramer_abs: cramer },
                        ),
                    }
                }
            };
            emit(&common.out, text)
        }
        Command::Bounds { common, sweep, check, format } => {
            let m = load_model(&common.model, k_max)?;
            let sweep_bytes = read(&sweep)?;
            let text = std::str::from_utf8(&sweep_bytes).map_err(|e| config(format!("{}: {e}", sweep.display())))?;
            let sw = sweep::SweepFile::parse(text).map_err(|e| config(format!("{}: {e}", sweep.display())))?;
            let report = match check {
                Check::Minor => check_minor_bound(&m.model, &sw.minor_sweep(seed))?,
                Check::Det => check_det_lower_bound(&m.model, &sw.lambda, &sw.energy_spec(), &sw.ns, &midpoint_grid(sw.grid))?,
            };
            eprintln!(
                "fitted constant {:.6e}, relative spread over N {:.3}, {} samples, {} excluded",
                report.fitted_constant,
                report.relative_spread_over_n(),
                report.samples.len(),
                report.excluded
            );
            emit(&common.out, bounds_out(&prov(&m.bytes), &report, format))
        }
        Command::Ldt { common, lambda, energy, n, sigma, s, qs, grid, format } => {
            let m = load_model(&common.model, k_max)?;
            let ladder = deviation_ladder(&m.model, lambda, energy, n, &qs, s, sigma, &midpoint_grid(grid))?;
            match ldt_decay_fit(&ladder) {
                Ok(fit) => eprintln!("c10 {:.6e}, monotone {}", fit.c10, fit.monotone),
                Err(e) => eprintln!("no decay fit: {e}"),
            }
            let p = prov(&m.bytes);
            let text = match format {
                Format::Csv => {
                    let mut csv = Csv::new(&p, &["Q", "threshold", "bad_fraction"]);
                    for r in &ladder {
                        csv.row([r.q.to_string(), num(r.threshold), num(r.bad_fraction)]);
                    }
                    csv.finish()
                }
                Format::Json => output::json(&p, &ladder),
            };
            emit(&common.out, text)
        }
        Command::Scan { common, lambda, energy, x0, n0, shifts, patch, sigma, s, nodes, format } => {
            let m = load_model(&common.model, k_max)?;
            let options = ScanOptions { s, sigma, quadrature_nodes: nodes };
            let p = prov(&m.bytes);
            let (scan, patch_report) = match patch {
                Some(n2) => {
                    let r = resolvent_patch_check(&m.model, lambda, energy, x0, n0, n2, options)?;
                    eprintln!(
                        "patch {} on [{}, {}]: log prefactor {:.6e} vs bound {:.6e}",
                        if r.passed { "passed" } else { "failed" },
                        r.union.u,
                        r.union.v,
                        r.log_prefactor,
                        r.bound
                    );
                    (r.scan.clone(), Some(r))
                }
                None => {
                    let w = parse_window(&shifts).map_err(|_| config(format!("shifts: expected a:b with a <= b, got {shifts:?}")))?;
                    let list: Vec<i64> = w.sites().collect();
                    (green_decay_scan(&m.model, lambda, energy, x0, n0, &list, options)?, None)
                }
            };
            eprintln!("c11 {:.6e}, {} bad of {} shifts", scan.c11, scan.bad_count(), scan.shifts.len());
            let text = match (format, patch_report) {
                (Format::Csv, _) => {
                    let mut csv = Csv::new(&p, &["shift", "status", "slack"]);
                    for r in &scan.shifts {
                        csv.row([r.shift.to_string(), r.status.as_str().to_string(), opt_num(r.slack)]);
                    }
                    csv.finish()
                }
                (Format::Json, Some(r)) => output::json(&p, &r),
                (Format::Json, None) => output::json(&p, &scan),
            };
            emit(&common.out, text)
        }
        Command::Localize { common, lambda, x0, n, margin, floor, refine_steps } => {
            let m = load_model(&common.model, k_max)?;
            let options = LocalizeOptions { margin, floor, refine_steps, ..LocalizeOptions::default() };
            let report = localize(&m.model, lambda, x0, n, options)?;
            eprintln!("{} of {} interior eigenpairs localized", report.localized, report.interior);
            emit(&common.out, output::json(&prov(&m.bytes), &report))
        }
        Command::CheckModel { common, t_grid, x_grid } => {
            let m = load_model(&common.model, k_max)?;
            if x_grid == 0 {
                return Err(config("x-grid must be positive"));
            }
            #[derive(Serialize)]
            struct ModelCheck {
                l: usize,
                omega: f64,
                diophantine: mqlab::quasiperiodic::DiophantineCheck,
                k_max: u64,
                nondegenerate: bool,
                nondegeneracy_error: Option<String>,
                witnesses: Vec<mqlab::quasiperiodic::NondegeneracyWitness>,
                pole_phases: Vec<f64>,
            }
            let nondeg = check_nondegeneracy(&m.model, &parse_grid(&t_grid)?, &midpoint_grid(x_grid));
            let report = ModelCheck {
                l: m.model.l(),
                omega: m.model.omega(),
                diophantine: is_diophantine(m.model.omega(), m.model.dioph(), k_max),
                k_max,
                nondegenerate: nondeg.is_ok(),
                nondegeneracy_error: nondeg.as_ref().err().map(Error::to_string),
                witnesses: nondeg.clone().unwrap_or_default(),
                pole_phases: m.model.pole_phases(),
            };
            emit(&common.out, output::json(&prov(&m.bytes), &report))?;
            match nondeg {
                Ok(_) => Ok(()),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
