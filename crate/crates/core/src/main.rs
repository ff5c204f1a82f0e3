use cisparse::cimatrix::census;
use cisparse::coloring::check_coloring;
use cisparse::driver::riemann::TERM_CAP;
use cisparse::driver::{represent, run_pipeline, Grids, Mode, ProblemConfig};
use cisparse::orbitals::derive_bounds;
use cisparse::quadrature::{plan_quadrature, riemann_terms, sum_terms, IntegralKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cisparse", version, about = "CI-matrix Hamiltonian simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Problem configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Target error in the 2-norm of the final state.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Evolution time (atomic units).
    #[arg(long)]
    time: Option<f64>,
    /// Quadrature precision per integral (hartree).
    #[arg(long)]
    delta: Option<f64>,
    /// Rounding unit for the self-inverse split.
    #[arg(long)]
    zeta: Option<f64>,
    /// Points per axis for s0,s1,s2 (riemann mode; replaces --delta).
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    S0,
    S1,
    S2,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively verify the coloring for the configured N and eta.
    ColoringCheck(Common),
    /// Emit the CI matrix and its term census.
    BuildHamiltonian(Common),
    /// Riemann-sum terms of one integral (CSV: rho,re,im,bound).
    Quadrature {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated 1-based spin-orbital labels.
        #[arg(long, value_delimiter = ',')]
        orbitals: Vec<usize>,
        /// 0-based nucleus index for s1.
        #[arg(long, default_value_t = 0)]
        nucleus: usize,
    },
    /// Run the pipeline and emit the evolution summary.
    Evolve(Common),
    /// Run the pipeline and emit the full report.
    Report(Common),
}

fn load(c: &Common) -> cisparse::Result<ProblemConfig> {
    let mut cfg = ProblemConfig::from_path(&c.config)?;
    if let Some(v) = c.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = c.time {
        cfg.time = v;
    }
    if let Some(v) = c.delta {
        cfg.overrides.delta = Some(v);
    }
    if let Some(v) = c.zeta {
        cfg.overrides.zeta = Some(v);
    }
    if let Some(g) = &c.grids {
        if g.len() != 3 {
            return Err(cisparse::Error::Config("--grids takes three sizes: s0,s1,s2".into()));
        }
        cfg.overrides.grids = Some(Grids {
            s0: g[0],
            s1: g[1],
            s2: g[2],
        });
    }
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    Ok(cfg)
}

fn emit(c: &Common, text: &str) -> std::io::Result<()> {
    match &c.out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Dotted-path leaves of a JSON value.
fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        serde_json::Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        serde_json::Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        _ => out.push((prefix.to_string(), v.to_string())),
    }
}

fn run(cli: Cli) -> cisparse::Result<(String, bool, Common)> {
    Ok(match cli.command {
        Command::ColoringCheck(c) => {
            let cfg = load(&c)?;
            let check = check_coloring(cfg.orbitals.len(), cfg.eta)?;
            let ok = check.passed();
            let text = match c.output {
                Output::Json => to_json(&check),
                Output::Csv => format!(
                    "n,eta,colors,pairs,coverage_failures,inverse_failures\n{},{},{},{},{},{}\n",
                    check.n, check.eta, check.colors, check.pairs, check.coverage_failures, check.inverse_failures
                ),
            };
            (text, ok, c)
        }
        Command::BuildHamiltonian(c) => {
            let rep = represent(&load(&c)?)?;
            let h = &rep.hamiltonian;
            let text = match c.output {
                Output::Json => {
                    let dets: Vec<Vec<u16>> = rep.basis.dets().iter().map(|d| d.occ().to_vec()).collect();
                    let rows: Vec<Vec<[f64; 2]>> = (0..h.nrows())
                        .map(|r| (0..h.ncols()).map(|c| [h[(r, c)].re, h[(r, c)].im]).collect())
                        .collect();
                    to_json(&json!({
                        "xi": rep.basis.len(),
                        "determinants": dets,
                        "census": census(&rep.basis),
                        "matrix": rows,
                    }))
                }
                Output::Csv => {
                    let mut s = String::from("row,col,re,im\n");
                    for r in 0..h.nrows() {
                        for col in 0..h.ncols() {
                            let v = h[(r, col)];
                            if v.norm() > 0.0 {
                                s += &format!("{r},{col},{:e},{:e}\n", v.re, v.im);
                            }
                        }
                    }
                    s
                }
            };
            (text, true, c)
        }
        Command::Quadrature {
            common: c,
            kind,
            orbitals,
            nucleus,
        } => {
            let cfg = load(&c)?;
            let orbs = cfg.validate()?;
            let bounds = derive_bounds(&orbs, cfg.alpha_decay())?;
            let kind = match kind {
                Kind::S0 => IntegralKind::S0,
                Kind::S1 => IntegralKind::S1 { q: nucleus },
                Kind::S2 => IntegralKind::S2,
            };
            let delta = match cfg.overrides.delta {
                Some(d) => d,
                None => cisparse::driver::budget_errors(
                    cfg.epsilon,
                    cfg.time,
                    cisparse::cimatrix::count_gamma(orbs.len(), cfg.eta),
                    cisparse::cimatrix::count_gamma_pair(orbs.len(), cfg.eta, cfg.nuclei.len()),
                )?
                .delta,
            };
            let spec = plan_quadrature(kind, &orbitals, delta, &bounds, &orbs, &cfg.nuclei, cfg.grid_cap())?;
            if spec.mu > TERM_CAP {
                return Err(cisparse::Error::TooManyTerms {
                    terms: spec.mu,
                    limit: TERM_CAP,
                });
            }
            let terms = riemann_terms(&spec, &orbs, &cfg.nuclei);
            let text = match c.output {
                Output::Json => {
                    let sum = sum_terms(&terms);
                    to_json(&json!({ "spec": spec, "sum": [sum.re, sum.im] }))
                }
                Output::Csv => {
                    let mut s = String::from("rho,re,im,bound\n");
                    for t in &terms {
                        s += &format!("{},{:e},{:e},{:e}\n", t.rho, t.value.re, t.value.im, t.bound);
                    }
                    s
                }
            };
            (text, true, c)
        }
        Command::Evolve(c) => {
            let report = run_pipeline(&load(&c)?)?;
            let ok = report.status == cisparse::driver::Status::Ok;
            let text = match c.output {
                Output::Json => to_json(&json!({
                    "r": report.dims.r,
                    "K": report.dims.k,
                    "lambda": report.dims.lambda,
                    "per_segment_deviation": report.per_segment_deviation,
                    "final_error_vs_exact": report.measured.two_norm_error,
                })),
                Output::Csv => {
                    let mut s = String::from("segment,deviation\n");
                    for (i, d) in report.per_segment_deviation.iter().enumerate() {
                        s += &format!("{},{d:e}\n", i + 1);
                    }
                    s
                }
            };
            (text, ok, c)
        }
        Command::Report(c) => {
            let report = run_pipeline(&load(&c)?)?;
            let ok = report.status == cisparse::driver::Status::Ok;
            let text = match c.output {
                Output::Json => to_json(&report),
                Output::Csv => {
                    let mut rows = Vec::new();
                    flatten("", &serde_json::to_value(&report).expect("serializable"), &mut rows);
                    let mut s = String::from("field,value\n");
                    for (k, v) in rows {
                        s += &format!("{k},{v}\n");
                    }
                    s
                }
            };
            (text, ok, c)
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok((text, ok, common)) => {
            if let Err(e) = emit(&common, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
