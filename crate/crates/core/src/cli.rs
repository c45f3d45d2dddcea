//! Command-line front end. Reports are JSON (schema `muntz-embed/1`) on
//! stdout or `--out`, tables go to `--csv`, and a short human summary goes
//! to stderr. Nothing in a report depends on wall-clock time, so a fixed
//! `--seed` gives byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::composition::{analyze_composition, MapSpec, PiecewiseFn};
use crate::constructions::{build_example1, build_example2, verify_example1};
use crate::embedding::{
    embed_estimate, essential_norm_estimate, kappa_numeric, EstimateOptions, KappaMajorant,
};
use crate::error::{MuntzError, Result};
use crate::measure::{log_grid, Measure};
use crate::nsq::{default_c, final_bound_threshold, kappa_nsq, nsq_product_bounds, DEFAULT_C1};
use crate::sequence::{check_lacunary, find_quasilacunary_blocks, muntz_sum_bound, ExponentSequence};

pub const SCHEMA: &str = "muntz-embed/1";

#[derive(Debug, Parser)]
#[command(name = "muntz-embed", version, about = "Embeddings of Müntz spaces into L¹(μ)")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the command's table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Number of exponents in the search span.
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Random restarts per search.
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Müntz sum, lacunarity and quasilacunary blocks of a sequence.
    AnalyzeSequence {
        /// JSON file or shorthand (`nsq`, `power:s`, `geometric:l,q`, `grouped:a,b`, `explicit:…`).
        #[arg(long)]
        seq: String,
        #[arg(long, default_value_t = 1000)]
        n_max: usize,
        #[arg(long, default_value_t = 2.0)]
        q_min: f64,
        #[arg(long, default_value_t = 64)]
        n_block_max: usize,
    },
    /// Tail masses and sublinear norm of a measure.
    AnalyzeMeasure {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps_min: f64,
    },
    /// Lower/upper bounds on the embedding constant and a verdict.
    EmbedEstimate {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 20)]
        n_check: usize,
        /// κ-majorant JSON for the upper bound.
        #[arg(long)]
        kappa: Option<PathBuf>,
        /// Also estimate the essential norm over m = 2, 4, …, m_max.
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Essential norm from tail restrictions μ'_m, m = 2, 4, …, m_max.
    EssentialNorm {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 64)]
        m_max: usize,
    },
    /// Numeric point-evaluation constants κ̂(t) on a grid.
    KappaTable {
        #[arg(long)]
        seq: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 20)]
        t_points: usize,
        #[arg(long, default_value_t = 0.95)]
        t_max: f64,
    },
    /// Bound chain and analytic κ for λₙ = n² (CSV on stdout).
    #[command(alias = "kappa")]
    KappaNsq {
        #[arg(long, default_value = "nsq")]
        seq: String,
        #[arg(long, default_value_t = 20)]
        m_max: usize,
        #[arg(long, default_value_t = DEFAULT_C1)]
        c1: f64,
    },
    /// Boundedness and essential norm of f ↦ ψ·(f∘φ).
    Compose {
        #[arg(long)]
        phi: PathBuf,
        /// Weight ψ (defaults to 1).
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Rebuild one of the two counterexample measures.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Example {
    Example1,
    Example2,
}

/// A command's result before it is written anywhere.
pub struct Report {
    pub command: &'static str,
    pub result: Value,
    pub table: Option<Table>,
    pub summary: String,
    /// Print the table rather than the JSON on stdout.
    pub csv_stdout: bool,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| (v + 0.0).to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        MuntzError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// A path to a JSON file, or a shorthand.
fn load_sequence(arg: &str) -> Result<ExponentSequence> {
    let p = Path::new(arg);
    if p.is_file() {
        ExponentSequence::from_json(&read(p)?)
    } else {
        ExponentSequence::from_shorthand(arg)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn powers_of_two(max: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |m| m.checked_mul(2))
        .take_while(|&m| m <= max)
        .collect()
}

pub fn execute(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::AnalyzeSequence {
            seq,
            n_max,
            q_min,
            n_block_max,
        } => {
            let s = load_sequence(seq)?;
            let n = s.representable_len().map_or(*n_max, |l| l.min(*n_max));
            let values = s.materialize(n)?;
            let sum = muntz_sum_bound(&s, n)?;
            let lacunary = check_lacunary(&s, n)?;
            let blocks = find_quasilacunary_blocks(&s, n, *q_min, *n_block_max)?;
            let summary = format!(
                "Σ1/λ ∈ [{}, {}]; lacunary: {}; quasilacunary blocks: {}",
                sum.lower,
                sum.upper,
                lacunary.map_or("no".into(), |q| format!("q = {q}")),
                blocks.as_ref().map_or("not found".into(), |c| format!("N = {}, q = {}", c.n_block, c.q)),
            );
            Ok(Report {
                command: "analyze-sequence",
                result: json!({
                    "sequence": s,
                    "n_terms": n,
                    "sum_bound": sum,
                    "tail_bound": s.tail_bound(n),
                    "lacunary_q": lacunary,
                    "quasilacunary": blocks,
                }),
                table: Some(Table {
                    header: vec!["n", "lambda"],
                    rows: values.iter().enumerate().map(|(i, &v)| vec![(i + 1) as f64, v]).collect(),
                }),
                summary,
                csv_stdout: false,
            })
        }
        Command::AnalyzeMeasure {
            measure,
            grid_points,
            eps_min,
        } => {
            let mu = Measure::from_json(&read(measure)?)?;
            if !(*eps_min > 0.0 && *eps_min < 1.0) || *grid_points < 2 {
                return Err(MuntzError::invalid("need 0 < eps-min < 1 and at least 2 grid points"));
            }
            let prof = mu.sublinear_profile(&log_grid(*eps_min, 1.0, *grid_points))?;
            let summary = format!(
                "total mass {}; ‖μ‖_S {} {}; vanishing: {}",
                mu.total_mass()?,
                if prof.exact { "=" } else { "≥" },
                prof.sublinear_norm_estimate,
                prof.vanishing_flag
            );
            Ok(Report {
                command: "analyze-measure",
                result: json!({ "total_mass": mu.total_mass()?, "profile": prof }),
                table: Some(Table {
                    header: vec!["eps", "tail_ratio"],
                    rows: prof.samples.iter().map(|&(e, m)| vec![e, m / e]).collect(),
                }),
                summary,
                csv_stdout: false,
            })
        }
        Command::EmbedEstimate {
            seq,
            measure,
            search,
            n_check,
            kappa,
            m_max,
        } => {
            let s = load_sequence(seq)?;
            let mu = Measure::from_json(&read(measure)?)?;
            let kappa = match kappa {
                Some(p) => Some(KappaMajorant::from_json(&read(p)?)?),
                None => None,
            };
            let opts = EstimateOptions {
                degree: search.degree,
                budget: search.budget,
                seed: search.seed,
                n_check: *n_check,
                kappa,
                m_list: m_max.map(powers_of_two),
            };
            let r = embed_estimate(&mu, &s, &opts)?;
            let summary = format!(
                "verdict: {:?}; ‖ι_μ‖ ≥ {}{}",
                r.verdict.kind,
                r.lower_bound.value,
                r.upper_bound
                    .as_ref()
                    .and_then(|u| u.value.filter(|_| u.is_upper_bound))
                    .map_or(String::new(), |v| format!(", ≤ {v}"))
            );
            let table = Table {
                header: vec!["lambda", "tail_ratio"],
                rows: r.necessary.table.iter().map(|row| vec![row.lambda, row.ratio]).collect(),
            };
            Ok(Report {
                command: "embed-estimate",
                result: to_value(&r),
                table: Some(table),
                summary,
                csv_stdout: false,
            })
        }
        Command::EssentialNorm {
            seq,
            measure,
            search,
            m_max,
        } => {
            let s = load_sequence(seq)?;
            let mu = Measure::from_json(&read(measure)?)?;
            let ms = powers_of_two(*m_max);
            if ms.is_empty() {
                return Err(MuntzError::invalid("m-max must be at least 2"));
            }
            let e = essential_norm_estimate(&mu, &s, search.degree, &ms, search.budget, search.seed)?;
            Ok(Report {
                command: "essential-norm",
                summary: format!("‖ι_μ‖_e ≈ {} (m = {})", e.estimate, ms[ms.len() - 1]),
                table: Some(Table {
                    header: vec!["m", "value"],
                    rows: e.table.iter().map(|r| vec![r.m as f64, r.value]).collect(),
                }),
                result: to_value(&e),
                csv_stdout: false,
            })
        }
        Command::KappaTable {
            seq,
            search,
            t_points,
            t_max,
        } => {
            let s = load_sequence(seq)?;
            if !(0.0..1.0).contains(t_max) || *t_points < 1 {
                return Err(MuntzError::invalid("need 0 ≤ t-max < 1 and t-points ≥ 1"));
            }
            let grid: Vec<f64> = (1..=*t_points).map(|i| t_max * i as f64 / *t_points as f64).collect();
            let k = kappa_numeric(&s, search.degree, &grid, search.budget, search.seed)?;
            let KappaMajorant::NumericTable { table } = &k else {
                unreachable!("kappa_numeric returns a table")
            };
            Ok(Report {
                command: "kappa-table",
                summary: format!("κ̂ tabulated at {} points up to t = {t_max}", grid.len()),
                table: Some(Table {
                    header: vec!["t", "kappa"],
                    rows: table.iter().map(|&(t, v)| vec![t, v]).collect(),
                }),
                result: to_value(&k),
                csv_stdout: false,
            })
        }
        Command::KappaNsq { seq, m_max, c1 } => {
            let s = load_sequence(seq)?;
            if s != ExponentSequence::power(2.0) {
                return Err(MuntzError::UnsupportedDomain("the analytic chain covers λₙ = n² only".into()));
            }
            if *m_max == 0 {
                return Err(MuntzError::invalid("m-max must be positive"));
            }
            let chain = (1..=*m_max).map(nsq_product_bounds).collect::<Result<Vec<_>>>()?;
            let (m0, exceptions) = final_bound_threshold(*m_max)?;
            let c = default_c();
            let kappa: Vec<(f64, f64)> = [0.0, 0.5, 0.9, 0.99]
                .iter()
                .map(|&t| kappa_nsq(t, *c1, c).map(|v| (t, v)))
                .collect::<Result<_>>()?;
            let l10 = std::f64::consts::LN_10;
            let rows = chain
                .iter()
                .map(|r| {
                    vec![
                        r.m as f64,
                        -r.ln_inv_gram_distance / l10,
                        r.ln_parts[0] / l10,
                        r.ln_parts[1] / l10,
                        r.ln_parts[2] / l10,
                        r.ln_coeff_bound_tilde / l10,
                        r.ln_coeff_bound / l10,
                    ]
                })
                .collect();
            let summary = format!(
                "tilde bound holds for all m ≤ {m_max}: {}; 100^m bound from m₀ = {}; C = {c}",
                chain.iter().all(|r| r.tilde_holds),
                m0.map_or("none".into(), |m| m.to_string())
            );
            Ok(Report {
                command: "kappa-nsq",
                result: json!({
                    "chain": chain,
                    "final_bound_from": m0,
                    "final_bound_exceptions": exceptions,
                    "kappa": { "form": "analytic-nsq", "c1": c1, "c": c, "samples": kappa },
                }),
                table: Some(Table {
                    header: vec!["m", "d", "P1", "P2", "P3", "tilde", "final"],
                    rows,
                }),
                summary,
                csv_stdout: true,
            })
        }
        Command::Compose { phi, psi } => {
            let map = MapSpec::new(PiecewiseFn::from_json(&read(phi)?)?)?;
            let weight = match psi {
                Some(p) => PiecewiseFn::from_json(&read(p)?)?,
                None => PiecewiseFn::constant(1.0),
            };
            let r = analyze_composition(&map, &weight)?;
            let summary = format!(
                "bounded: {}; essential norm: {}",
                r.bounded,
                r.essential_norm.map_or("n/a".into(), |v| v.to_string())
            );
            Ok(Report {
                command: "compose",
                result: to_value(&r),
                table: None,
                summary,
                csv_stdout: false,
            })
        }
        Command::Reproduce { example, n_max, k_max } => match example {
            Example::Example1 => {
                let ex = build_example1(*n_max)?;
                let violations = verify_example1(&ex);
                let summary = format!(
                    "bounded branch ≤ c+3: {}; growth slope C₁ = {}; clause violations: {}",
                    ex.bounded_ok,
                    ex.c1_fit,
                    violations.len()
                );
                Ok(Report {
                    command: "reproduce-example1",
                    table: Some(Table {
                        header: vec!["n", "bounded_integral", "growth_integral"],
                        rows: ex
                            .rows
                            .iter()
                            .map(|r| vec![r.n as f64, r.bounded_integral, r.growth_integral])
                            .collect(),
                    }),
                    result: json!({ "example": ex, "clause_violations": violations }),
                    summary,
                    csv_stdout: false,
                })
            }
            Example::Example2 => {
                let ex = build_example2(*k_max)?;
                let summary = format!(
                    "‖μ‖_S = {}; normalized ratios in band: {}; ratios nondecreasing: {}",
                    ex.sublinear_norm, ex.band_ok, ex.ratio_nondecreasing
                );
                Ok(Report {
                    command: "reproduce-example2",
                    table: Some(Table {
                        header: vec!["q", "ratio"],
                        rows: ex.rows.iter().map(|r| vec![r.q as f64, r.ratio]).collect(),
                    }),
                    result: to_value(&ex),
                    summary,
                    csv_stdout: false,
                })
            }
        },
    }
}

/// Exit code for an error: 2 for malformed input, 3 for resource limits.
pub fn exit_code(e: &MuntzError) -> i32 {
    match e {
        MuntzError::Parse { .. } => 2,
        MuntzError::Resource(_) => 3,
        _ => 1,
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let doc = json!({
        "schema": SCHEMA,
        "command": report.command,
        "result": report.result,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    let csv = report.table.as_ref().map(Table::to_csv);
    if let Some(path) = &cli.csv {
        let csv = csv.as_deref().ok_or_else(|| MuntzError::invalid(format!("{} has no table", report.command)))?;
        fs::write(path, csv)?;
    }
    match (&cli.out, report.csv_stdout) {
        (Some(path), _) => fs::write(path, &text)?,
        (None, true) if cli.csv.is_none() => print!("{}", csv.unwrap_or_default()),
        (None, _) => print!("{text}"),
    }
    Ok(())
}

/// Parse `args`, run, write outputs, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command).and_then(|r| emit(&cli, &r).map(|_| r)) {
        Ok(r) => {
            eprintln!("{}", r.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
