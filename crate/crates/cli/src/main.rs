//! `coxcode` command-line front end.
//!
//! Exit status: 0 on success, 2 when the requested design does not exist or
//! an input document is malformed, 3 when an internal invariant breaks.
//! Failures print one JSON object `{"error": kind, "message": text}` on stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coxcode::analysis::{alpha_sq_for_vector, error_curve, exact_bit_error, snr_noise_map};
use coxcode::catalog::reproduce_table;
use coxcode::coxeter::{select_clique, Negation, RootSet};
use coxcode::document::{DesignDocument, Provenance};
use coxcode::linecode::{search_roots, LineCode};
use coxcode::optimizer::{enumerate_designs, CandidateSummary, DesignOptions, DEFAULT_MAX_CANDIDATES};
use coxcode::pmset::InitialVector;
use coxcode::sim::{compare_theory, simulate, SimConfig};

#[derive(Parser)]
#[command(name = "coxcode", version, about = "Design, analyse and simulate reflection-group line codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a design document from an initial vector or by searching all partitions of b+1.
    Design(DesignArgs),
    /// List root-permutation cliques for a vector, or ranked partitions for a bit count.
    Search(SearchArgs),
    /// Closed-form error curves for a design document.
    Analyze(AnalyzeArgs),
    /// Monte Carlo error rates for a design document.
    Simulate(SimulateArgs),
    /// Regenerate the reference design table.
    Table(TableArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum NegationArg {
    Auto,
    On,
    Off,
}

impl From<NegationArg> for Negation {
    fn from(n: NegationArg) -> Self {
        match n {
            NegationArg::Auto => Negation::Auto,
            NegationArg::On => Negation::On,
            NegationArg::Off => Negation::Off,
        }
    }
}

#[derive(Args)]
struct Target {
    /// Bits per word; searches every partition of b+1.
    #[arg(long, conflicts_with = "w1")]
    b: Option<usize>,
    /// Balanced initial vector, e.g. "-1,0,1".
    #[arg(long, allow_hyphen_values = true)]
    w1: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    allow_negation: NegationArg,
    /// Largest orbit searched for cliques.
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: usize,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    target: Target,
    /// Explicit root permutations, e.g. "0,-1,1;1,-1,0".
    #[arg(long, allow_hyphen_values = true, requires = "w1")]
    roots: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CurveArgs {
    /// Design document written by `design`.
    document: PathBuf,
    /// SNR grid: "1,2,4" or inclusive "start:stop:step".
    #[arg(long, default_value = "1:10:1")]
    eta: String,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    curve: CurveArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Trials per grid point.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Cross-check the slicer against nearest-codeword search.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Only rows with this many bits.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug)]
enum CliError {
    Core(coxcode::Error),
    Usage(String),
    Io(String),
}

impl From<coxcode::Error> for CliError {
    fn from(e: coxcode::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_design_failure() => 2,
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }

    fn report(&self) -> String {
        let (kind, message) = match self {
            CliError::Core(e) => (e.kind(), e.to_string()),
            CliError::Usage(m) => ("InvalidInput", m.clone()),
            CliError::Io(m) => ("Io", m.clone()),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Search(a) => cmd_search(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Table(a) => cmd_table(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}

fn parse_ints(s: &str) -> CliResult<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("not an integer: {t:?}")))
        })
        .collect()
}

fn parse_roots(s: &str) -> CliResult<Vec<Vec<i64>>> {
    s.split(';').filter(|r| !r.trim().is_empty()).map(parse_ints).collect()
}

/// `"a,b,c"` or inclusive `"start:stop:step"`.
fn parse_eta_grid(s: &str) -> CliResult<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("not a number: {t:?}")))
    };
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(CliError::Usage(format!("range must be start:stop:step, got {s:?}")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start {
            return Err(CliError::Usage(format!("empty or unbounded range {s:?}")));
        }
        // index-based so the grid does not accumulate rounding
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(CliError::Usage("empty eta grid".into()));
    }
    Ok(grid)
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_text<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn json_line<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load_document(path: &Path) -> CliResult<(DesignDocument, LineCode)> {
    let text = fs::read_to_string(path)
        .map_err(|e| coxcode::Error::MalformedDocument(format!("{}: {e}", path.display())))?;
    let doc = DesignDocument::from_json(&text)?;
    let code = doc.verify()?;
    Ok((doc, code))
}

fn initial_vector(s: &str) -> CliResult<InitialVector> {
    Ok(InitialVector::new(parse_ints(s)?)?)
}

fn design_options(t: &Target) -> DesignOptions {
    DesignOptions {
        negation: t.allow_negation.into(),
        max_candidates: t.max_candidates,
        ..DesignOptions::default()
    }
}

fn cmd_design(a: DesignArgs) -> CliResult<()> {
    let doc = match (&a.target.b, &a.target.w1) {
        (_, Some(w1)) => {
            let w1 = initial_vector(w1)?;
            let (code, negation_used) = match &a.roots {
                Some(r) => {
                    let roots = parse_roots(r)?;
                    let negated = roots.iter().any(|r| !w1.is_permutation(r));
                    (LineCode::from_root_set(RootSet::new(w1, roots)?)?, negated)
                }
                None => {
                    let (report, negated) = search_roots(&w1, a.target.allow_negation.into())?;
                    (LineCode::from_root_set(select_clique(&report)?)?, negated)
                }
            };
            code.verify()?;
            let provenance = Provenance {
                negation_used,
                ..Provenance::default()
            };
            DesignDocument::from_code(&code, provenance)?
        }
        (Some(b), None) => {
            let ranked = enumerate_designs(*b, &design_options(&a.target))?;
            let best = ranked.iter().find_map(|c| c.design()).ok_or_else(|| {
                coxcode::Error::DesignInfeasible(format!("no partition of {} yields a {b}-bit code", b + 1))
            })?;
            best.code.verify()?;
            let provenance = Provenance {
                negation_used: best.negation_used,
                ..Provenance::default()
            };
            let mut doc = DesignDocument::from_code(&best.code, provenance)?;
            doc.search = ranked.iter().map(CandidateSummary::from).collect();
            doc
        }
        (None, None) => return Err(CliError::Usage("give --b or --w1".into())),
    };
    let text = match a.format {
        Format::Json => doc.to_json()? + "\n",
        Format::Text => design_text(&doc),
        Format::Csv => return Err(CliError::Usage("design documents are json or text".into())),
    };
    emit(a.output.as_deref(), &text)
}

fn design_text(doc: &DesignDocument) -> String {
    let mut s = format!("b = {}, w1 = ({})\n", doc.b, join(&doc.w1, ", "));
    for (r, a) in doc.root_permutations.iter().zip(&doc.profile.alphas) {
        s += &format!("  root ({})  alpha {:.4}\n", join(r, ", "), a);
    }
    s += &format!("alpha_min {:.4} (x{}), d_min^2 {}\nW:\n", doc.profile.alpha_min, doc.profile.nu, doc.profile.d_min_sq);
    for row in &doc.w {
        s += &format!("  [{}]\n", row.join(", "));
    }
    s += "M:\n";
    for row in &doc.m {
        s += &format!("  [{}]\n", row.join(", "));
    }
    if !doc.search.is_empty() {
        s += "ranking:\n";
        s += &ranking_text(&doc.search);
    }
    s
}

fn ranking_text(rows: &[CandidateSummary]) -> String {
    rows.iter()
        .map(|c| {
            let w1 = c.w1.as_ref().map_or("-".to_string(), |w| join(w, ","));
            let status = match &c.reason {
                None => {
                    let a: Vec<String> = c.alphas.iter().map(|a| format!("{a:.2}")).collect();
                    format!("alphas ({})", a.join(", "))
                }
                Some(why) => format!("infeasible: {why}"),
            };
            format!("  {:<10} ({w1})  {status}\n", join(&c.partition, "+"))
        })
        .collect()
}

#[derive(Serialize)]
struct RankingCsvRow {
    rank: usize,
    partition: String,
    w1: String,
    feasible: bool,
    reason: String,
    alphas: String,
    roots: String,
    negation_used: bool,
    cliques: usize,
}

#[derive(Serialize)]
struct CliqueRow {
    index: usize,
    roots: Vec<Vec<i64>>,
    norms_sq: Vec<i64>,
    alphas: Vec<f64>,
    pm_closed: bool,
    selected: bool,
}

fn cmd_search(a: SearchArgs) -> CliResult<()> {
    let text = match (&a.target.b, &a.target.w1) {
        (Some(b), None) => {
            let ranked: Vec<CandidateSummary> = enumerate_designs(*b, &design_options(&a.target))?
                .iter()
                .map(CandidateSummary::from)
                .collect();
            match a.format {
                Format::Json => json_line(&ranked)?,
                Format::Text => ranking_text(&ranked),
                Format::Csv => {
                    let rows: Vec<RankingCsvRow> = ranked
                        .iter()
                        .enumerate()
                        .map(|(i, c)| RankingCsvRow {
                            rank: i + 1,
                            partition: join(&c.partition, "+"),
                            w1: c.w1.as_ref().map_or(String::new(), |w| join(w, " ")),
                            feasible: c.feasible,
                            reason: c.reason.as_ref().map_or(String::new(), |r| r.to_string()),
                            alphas: join(&c.alphas, " "),
                            roots: c.roots.iter().map(|r| join(r, " ")).collect::<Vec<_>>().join(";"),
                            negation_used: c.negation_used,
                            cliques: c.cliques,
                        })
                        .collect();
                    csv_text(&rows)?
                }
            }
        }
        (_, Some(w1)) => {
            let w1 = initial_vector(w1)?;
            let (report, _) = search_roots(&w1, a.target.allow_negation.into())?;
            let chosen = select_clique(&report)?;
            let rows = (0..report.len())
                .map(|i| {
                    let rs = report.root_set(i)?;
                    let alphas = alpha_sq_for_vector(&rs.diffs, w1.components())
                        .iter()
                        .map(|q| coxcode::exactla::to_f64(q).sqrt())
                        .collect();
                    Ok(CliqueRow {
                        index: i,
                        selected: rs.roots == chosen.roots,
                        norms_sq: report.cliques[i].ranking.clone(),
                        pm_closed: report.cliques[i].pm_closed,
                        roots: rs.roots,
                        alphas,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            match a.format {
                Format::Json => json_line(&rows)?,
                Format::Text => rows
                    .iter()
                    .map(|r| {
                        let roots: Vec<String> = r.roots.iter().map(|x| format!("({})", join(x, ","))).collect();
                        let alphas: Vec<String> = r.alphas.iter().map(|x| format!("{x:.2}")).collect();
                        format!(
                            "{}{:>3}  norms [{}]  alphas ({})  {}{}\n",
                            if r.selected { "*" } else { " " },
                            r.index,
                            join(&r.norms_sq, ","),
                            alphas.join(", "),
                            roots.join(" "),
                            if r.pm_closed { "" } else { "  (not closed)" },
                        )
                    })
                    .collect(),
                Format::Csv => return Err(CliError::Usage("clique listings are json or text".into())),
            }
        }
        (None, None) => return Err(CliError::Usage("give --b or --w1".into())),
    };
    emit(a.output.as_deref(), &text)
}

#[derive(Serialize)]
struct AnalyzeRow {
    eta: f64,
    n0: f64,
    p_exact: f64,
    p_union: f64,
    p_asymptotic: f64,
    p_bit: f64,
}

fn cmd_analyze(a: AnalyzeArgs) -> CliResult<()> {
    let c = a.curve;
    let grid = parse_eta_grid(&c.eta)?;
    let (_, code) = load_document(&c.document)?;
    let profile = coxcode::alphas(&code)?;
    let rows = error_curve(&profile, &grid)?
        .points
        .iter()
        .map(|p| {
            Ok(AnalyzeRow {
                eta: p.eta,
                n0: snr_noise_map(&code, p.eta)?,
                p_exact: p.p_exact,
                p_union: p.p_union,
                p_asymptotic: p.p_asymptotic,
                p_bit: exact_bit_error(&profile, p.eta)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let text = match c.format {
        Format::Json => json_line(&rows)?,
        Format::Csv | Format::Text => csv_text(&rows)?,
    };
    emit(c.output.as_deref(), &text)
}

#[derive(Serialize)]
struct SimulateRow {
    eta: f64,
    n0: f64,
    p_exact: f64,
    p_union: f64,
    p_asymptotic: f64,
    trials: u64,
    word_errors: u64,
    bit_errors: u64,
    wer: f64,
    ber: f64,
    wilson_low: f64,
    wilson_high: f64,
    z_score: f64,
    flagged: bool,
    ambiguous: u64,
    oracle_disagreements: u64,
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let c = a.curve;
    let grid = parse_eta_grid(&c.eta)?;
    let (_, code) = load_document(&c.document)?;
    let profile = coxcode::alphas(&code)?;
    let cfg = SimConfig {
        shards: a.shards,
        oracle: a.oracle,
        ..SimConfig::new(grid, a.trials, a.seed)
    };
    let result = simulate(&code, &cfg)?;
    let theory = compare_theory(&result, &profile)?;
    let rows: Vec<SimulateRow> = result
        .points
        .iter()
        .zip(&theory.rows)
        .map(|(p, t)| SimulateRow {
            eta: p.eta,
            n0: p.n0,
            p_exact: t.p_exact,
            p_union: t.p_union,
            p_asymptotic: t.p_asymptotic,
            trials: p.tally.trials,
            word_errors: p.tally.word_errors,
            bit_errors: p.tally.bit_errors,
            wer: p.word_error_rate,
            ber: p.bit_error_rate,
            wilson_low: p.wilson_low,
            wilson_high: p.wilson_high,
            z_score: t.z_score,
            flagged: t.flagged,
            ambiguous: p.tally.ambiguous,
            oracle_disagreements: p.tally.oracle_disagreements,
        })
        .collect();
    let text = match c.format {
        Format::Json => json_line(&serde_json::json!({
            "seed": result.seed,
            "batch_trials": result.batch_trials,
            "sampler": result.sampler,
            "generator": result.generator,
            "points": rows,
        }))?,
        Format::Csv | Format::Text => csv_text(&rows)?,
    };
    emit(c.output.as_deref(), &text)
}

#[derive(Serialize)]
struct TableCsvRow {
    b: usize,
    w1: String,
    roots: String,
    alphas: String,
    alphas_full: String,
    negation_used: bool,
}

fn cmd_table(a: TableArgs) -> CliResult<()> {
    let rows = reproduce_table(a.b)?;
    let text = match a.format {
        Format::Json => json_line(&rows)?,
        Format::Csv => {
            let out: Vec<TableCsvRow> = rows
                .iter()
                .map(|r| TableCsvRow {
                    b: r.b,
                    w1: join(&r.w1, " "),
                    roots: r.roots.iter().map(|x| join(x, " ")).collect::<Vec<_>>().join(";"),
                    alphas: r.rounded.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" "),
                    alphas_full: join(&r.alphas, " "),
                    negation_used: r.negation_used,
                })
                .collect();
            csv_text(&out)?
        }
        Format::Text => {
            let mut s = String::from("b  w1                       alphas\n");
            for r in &rows {
                let alphas: Vec<String> = r.rounded.iter().map(|x| format!("{x:.2}")).collect();
                s += &format!("{}  {:<24} {}\n", r.b, format!("({})", join(&r.w1, ",")), alphas.join(" "));
                for root in &r.roots {
                    s += &format!("     root ({})\n", join(root, ","));
                }
            }
            s
        }
    };
    emit(a.output.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_ranges_are_inclusive() {
        assert_eq!(parse_eta_grid("1:4:1").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_eta_grid("0.5:1.5:0.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_eta_grid("2, 8").unwrap(), vec![2.0, 8.0]);
        assert!(parse_eta_grid("1:2").is_err());
        assert!(parse_eta_grid("3:1:1").is_err());
        assert!(parse_eta_grid("1:3:0").is_err());
    }

    #[test]
    fn roots_split_on_semicolons() {
        assert_eq!(parse_roots("0,-1,1; 1,-1,0").unwrap(), vec![vec![0, -1, 1], vec![1, -1, 0]]);
        assert!(parse_roots("1,x").is_err());
    }
}
