use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poe_core::bounds::{bound_table, bound_table_csv, format_sig, poe_lower_bound, poe_upper_bound, CSV_FORMAT_VERSION};
use poe_core::doubly::{eating_matrix, randomized_allocation};
use poe_core::generators::{example1, gen_doubly_normalised, gen_lower_bound_instance, gen_submodular_lb_instance, remark_3x4};
use poe_core::io::{instance_from_json, instance_to_json, DecompositionFile, PoeEntry, SolveReport, FORMAT_VERSION};
use poe_core::model::{validate, ValidationReport};
use poe_core::oracle::{enumerate, DEFAULT_BUDGET};
use poe_core::solver::solve;
use poe_core::verify::{run_verification, VerifyConfig};
use poe_core::welfare::{PParam, WelfareKey, FLOAT_REL_TOL};
use poe_core::{Error, Instance, PoeValue};
use serde::{Deserialize, Serialize};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "poe", version, about = "Price of equity for EQ1 allocations under binary valuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PList {
    /// Welfare exponent: a rational such as 1, 1/2, -3, or "nash", "-inf". Repeatable.
    #[arg(long = "p", allow_hyphen_values = true)]
    p: Vec<PParam>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lb,
    #[value(name = "submodular_lb", alias = "submodular-lb")]
    SubmodularLb,
    Doubly,
    Example1,
    #[value(name = "remark_3x4", alias = "remark-3x4")]
    Remark3x4,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file for a named family.
    Generate {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long = "W")]
        w: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "Wc")]
        wc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Compute A*, B, welfare and PoE for an instance file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        p: PList,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Validate an instance and cross-check the solver against exhaustive search.
    Check {
        file: PathBuf,
        #[command(flatten)]
        p: PList,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Tabulate the lower and upper PoE bounds.
    Bounds {
        #[command(flatten)]
        p: PList,
        #[arg(long, default_value_t = 64)]
        r_max: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Solver PoE of the lower-bound family against the bounds.
    Sweep {
        #[arg(long, default_value = "lb")]
        family: String,
        #[command(flatten)]
        p: PList,
        /// Inclusive range of type counts, as `a..b`.
        #[arg(long, default_value = "2..8")]
        r_range: String,
        /// `auto` picks W per exponent; an integer fixes it.
        #[arg(long = "W-rule", default_value = "auto")]
        w_rule: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Eating matrix and lottery over EQ1 allocations for a doubly normalised instance.
    Doubly {
        file: PathBuf,
        /// `json` writes the lottery, `csv` the eating matrix.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Run the oracle gates over the seeded corpus.
    Verify {
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 200)]
        doubly_cases: usize,
        /// Corrupt one fair allocation so the EQ1 gate must fail.
        #[arg(long)]
        self_test: bool,
        #[command(flatten)]
        out: Output,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            Error::Internal(_) => Failure::Verification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Run = Result<(), Failure>;

fn emit(out: &Output, text: &str) -> Run {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_instance(path: &PathBuf) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(instance_from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?.0)
}

fn p_list_or(list: &PList, default: Vec<PParam>) -> Vec<PParam> {
    if list.p.is_empty() {
        default
    } else {
        list.p.clone()
    }
}

fn need(value: Option<usize>, flag: &str, family: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("generate {family} requires --{flag}")))
}

fn generate(family: Family, args: [Option<usize>; 6], seed: u64, name: Option<String>, out: &Output) -> Run {
    let [r, w, k, n, m, wc] = args;
    let (inst, default_name) = match family {
        Family::Lb => {
            let (r, w) = (need(r, "r", "lb")?, need(w, "W", "lb")?);
            (gen_lower_bound_instance(r, w)?, format!("lb_r{r}_w{w}"))
        }
        Family::SubmodularLb => {
            let k = need(k, "k", "submodular_lb")?;
            (gen_submodular_lb_instance(k)?, format!("submodular_lb_{k}"))
        }
        Family::Doubly => {
            let (n, m) = (need(n, "n", "doubly")?, need(m, "m", "doubly")?);
            let (w, wc) = (need(w, "W", "doubly")?, need(wc, "Wc", "doubly")?);
            (gen_doubly_normalised(n, m, w, wc, seed)?, format!("doubly_{n}x{m}_w{w}_c{wc}_s{seed}"))
        }
        Family::Example1 => (example1(), "example1".into()),
        Family::Remark3x4 => (remark_3x4(), "remark_3x4".into()),
    };
    emit(out, &instance_to_json(&inst, Some(name.as_deref().unwrap_or(&default_name))))
}

fn solve_cmd(file: &PathBuf, p: &PList, format: Format, out: &Output) -> Run {
    let inst = read_instance(file)?;
    let grid = p_list_or(p, PParam::standard_grid());
    let res = solve(&inst, &grid)?;
    let report = SolveReport::new(&inst, &res);
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut s = format!("# format_version={CSV_FORMAT_VERSION}\np,poe,poe_exact,opt_welfare,fair_welfare\n");
            let (alw, blw) = (&report.a_star.welfare, &report.b.welfare);
            for ((e, a), b) in report.poe.iter().zip(alw).zip(blw) {
                let w = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.p,
                    format_sig(e.approx),
                    if e.exact { e.value.as_str() } else { "" },
                    w(a.approx),
                    w(b.approx)
                ));
            }
            s
        }
    };
    emit(out, &text)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct CheckReport {
    format_version: u32,
    validation: ValidationReport,
    enumerated: u64,
    poe: Vec<PoeEntry>,
    oracle_poe: Vec<PoeEntry>,
    mismatches: Vec<String>,
}

fn check(file: &PathBuf, p: &PList, budget: u64, out: &Output) -> Run {
    let inst = read_instance(file)?;
    let validation = validate(&inst)?;
    let grid = p_list_or(p, PParam::standard_grid());
    let res = solve(&inst, &grid)?;
    let oracle = enumerate(&inst, &grid, budget)?;
    let mut mismatches = Vec::new();
    for e in &oracle.entries {
        if !WelfareKey::of(&res.opt.values, &e.p).matches(&e.best_key, FLOAT_REL_TOL) {
            mismatches.push(format!("p = {}: A* is not optimal", e.p));
        }
        if !WelfareKey::of(&res.fair.values, &e.p).matches(&e.best_eq1_key, FLOAT_REL_TOL) {
            mismatches.push(format!("p = {}: B is not the best EQ1 allocation", e.p));
        }
    }
    let report = CheckReport {
        format_version: FORMAT_VERSION,
        validation,
        enumerated: oracle.enumeration_count,
        poe: res.poe.iter().map(|(p, v)| PoeEntry::new(p, v)).collect(),
        oracle_poe: oracle.entries.iter().map(|e| PoeEntry::new(&e.p, &e.exact_poe)).collect(),
        mismatches,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    emit(out, &text)?;
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(report.mismatches.join("; ")))
    }
}

fn with_figure_grid(p: &PList) -> Vec<PParam> {
    let mut grid: Vec<PParam> = ["1", "nash", "-1", "-10"].iter().map(|s| s.parse().expect("literal")).collect();
    for q in &p.p {
        if !grid.contains(q) {
            grid.push(q.clone());
        }
    }
    grid
}

fn json_lines<T: Serialize>(rows: &T) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    format_version: u32,
    rows: &'a [T],
}

fn bounds(p: &PList, r_max: usize, format: Format, out: &Output) -> Run {
    if r_max < 2 {
        return Err(Failure::Usage("--r-max must be at least 2".into()));
    }
    let rows = bound_table(&with_figure_grid(p), 2..=r_max)?;
    let text = match format {
        Format::Csv => bound_table_csv(&rows),
        Format::Json => json_lines(&Versioned { format_version: FORMAT_VERSION, rows: &rows }),
    };
    emit(out, &text)
}

fn parse_range(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--r-range expects a..b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 2 || b < a {
        return Err(Failure::Usage(format!("--r-range needs 2 <= a <= b, got {s:?}")));
    }
    Ok((a, b))
}

/// Group size making the lower-bound family tight for exponent `p`.
fn auto_w(p: &PParam, s: usize) -> usize {
    let sf = s as f64;
    let w = match p {
        PParam::MinusInfinity => 1.0,
        PParam::Nash => {
            if s < 2 {
                1.0
            } else {
                (sf / sf.ln()).ceil()
            }
        }
        _ if p.is_utilitarian() => sf * sf,
        _ => {
            let e = p.exponent();
            if e > 0.0 {
                (e * sf).ceil()
            } else {
                sf.powf(1.0 / (1.0 - e)).ceil()
            }
        }
    };
    (w as usize).max(1)
}

#[derive(Serialize)]
struct SweepRow {
    p: PParam,
    r: usize,
    s: usize,
    w: usize,
    poe_exact: Option<String>,
    poe_approx: f64,
    lower: Option<f64>,
    upper: f64,
}

fn sweep(family: &str, p: &PList, range: &str, w_rule: &str, format: Format, out: &Output) -> Run {
    if family != "lb" {
        return Err(Failure::Usage(format!("unknown sweep family {family:?}; only lb is supported")));
    }
    let (lo, hi) = parse_range(range)?;
    let fixed = match w_rule {
        "auto" => None,
        x => Some(x.parse::<usize>().ok().filter(|&w| w >= 1).ok_or_else(|| {
            Failure::Usage(format!("--W-rule expects auto or a positive integer, got {x:?}"))
        })?),
    };
    let grid = p_list_or(p, vec![PParam::utilitarian(), PParam::Nash, "-1".parse().expect("literal")]);
    let mut rows = Vec::new();
    for q in &grid {
        for r in lo..=hi {
            let s = r - 1;
            let w = fixed.unwrap_or_else(|| auto_w(q, s));
            let inst = gen_lower_bound_instance(r, w)?;
            let res = solve(&inst, std::slice::from_ref(q))?;
            let v = &res.poe[0].1;
            rows.push(SweepRow {
                p: q.clone(),
                r,
                s,
                w,
                poe_exact: (!matches!(v, PoeValue::Float(_))).then(|| v.to_string()),
                poe_approx: v.to_f64(),
                lower: poe_lower_bound(q, r).ok(),
                upper: poe_upper_bound(q, r)?,
            });
        }
    }
    let text = match format {
        Format::Json => json_lines(&Versioned { format_version: FORMAT_VERSION, rows: &rows }),
        Format::Csv => {
            let mut s = format!("# format_version={CSV_FORMAT_VERSION}\np,r,s,W,poe,poe_exact,lower,upper\n");
            for row in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.p,
                    row.r,
                    row.s,
                    row.w,
                    format_sig(row.poe_approx),
                    row.poe_exact.as_deref().unwrap_or(""),
                    row.lower.map(format_sig).unwrap_or_default(),
                    format_sig(row.upper)
                ));
            }
            s
        }
    };
    emit(out, &text)
}

fn doubly(file: &PathBuf, format: Format, out: &Output) -> Run {
    let inst = read_instance(file)?;
    let text = match format {
        Format::Csv => eating_matrix(&inst)?.to_csv(),
        Format::Json => DecompositionFile::new(&randomized_allocation(&inst)?).to_json(),
    };
    emit(out, &text)
}

fn verify(cfg: VerifyConfig, out: &Output) -> Run {
    let start = Instant::now();
    let gates = run_verification(&cfg)?;
    let mut text = String::new();
    let mut failed = 0;
    for g in &gates {
        let tag = if g.passed() { "PASS" } else { "FAIL" };
        text.push_str(&format!("{tag} {} ({} cases)\n", g.name, g.cases));
        for f in g.failures.iter().take(5) {
            text.push_str(&format!("  {f}\n"));
        }
        eprintln!("{}: {:.3}s", g.name, g.elapsed.as_secs_f64());
        failed += usize::from(!g.passed());
    }
    eprintln!("total: {:.3}s", start.elapsed().as_secs_f64());
    text.push_str(&format!("{} of {} gates passed\n", gates.len() - failed, gates.len()));
    emit(out, &text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{failed} gates failed")))
    }
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Generate { family, r, w, k, n, m, wc, seed, name, out } => {
            generate(family, [r, w, k, n, m, wc], seed, name, &out)
        }
        Command::Solve { file, p, format, out } => solve_cmd(&file, &p, format, &out),
        Command::Check { file, p, budget, out } => check(&file, &p, budget, &out),
        Command::Bounds { p, r_max, format, out } => bounds(&p, r_max, format, &out),
        Command::Sweep { family, p, r_range, w_rule, format, out } => {
            sweep(&family, &p, &r_range, &w_rule, format, &out)
        }
        Command::Doubly { file, format, out } => doubly(&file, format, &out),
        Command::Verify { budget, seed, cases, doubly_cases, self_test, out } => verify(
            VerifyConfig { budget, random_cases: cases, doubly_cases, seed, self_test },
            &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget refused: {msg}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}
