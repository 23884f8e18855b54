use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::Serialize;

use tilebench::analysis::{self, AnalysisError, Metric};
use tilebench::bot::{BotConfig, LeaveTable, LeaveTableError, SpeedyBot};
use tilebench::engine::{play_game, EngineError, GameOptions, GameRng};
use tilebench::harness::{self, ExperimentConfig, HarnessError, OutcomeTable};
use tilebench::lexicon::{Lexicon, LexiconError};
use tilebench::record::{replay, GameRecord, RecordError};
use tilebench::ruleset::{resolve_ruleset, validate_ruleset, RulesetError};
use tilebench::tiles::parse_tile;

/// Crossword tile-game simulator and analysis toolkit.
///
/// Exit codes: 0 success, 1 i/o or runtime failure, 2 usage error,
/// 3 invalid or unsupported input, 4 estimate undefined for the data,
/// 5 replay mismatch, 6 interrupted run.
#[derive(Parser)]
#[command(name = "tilebench", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect lexicons.
    #[command(subcommand)]
    Lexicon(LexiconCmd),
    /// Check or export rulesets.
    #[command(subcommand)]
    Ruleset(RulesetCmd),
    /// Run an orders × replicates experiment and write the outcome table.
    Simulate(SimulateArgs),
    /// Play the game for one (seed, order, replicate) and write its record.
    Play(PlayArgs),
    /// Re-apply a game record move by move and print the final scores.
    Replay(ReplayArgs),
    /// Estimators over an outcome table.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

#[derive(Subcommand)]
enum LexiconCmd {
    /// Compile a word list (one word per line) into a lexicon file.
    Build {
        wordlist: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Report whether each word is in a lexicon (or word list).
    Check { lexicon: PathBuf, words: Vec<String> },
}

#[derive(Subcommand)]
enum RulesetCmd {
    /// Validate a ruleset file or bundled name (scrabble, wwf).
    Validate { ruleset: String },
    /// Print a ruleset as a ruleset file.
    Export { ruleset: String },
}

#[derive(Args, Clone)]
struct GameSetup {
    /// Bundled ruleset name or ruleset file.
    #[arg(long, default_value = "scrabble")]
    ruleset: String,
    /// Word list or compiled lexicon; defaults to the bundled word list.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Leave-table file for both bots.
    #[arg(long)]
    leave_table: Option<PathBuf>,
    /// Half width of the uniform utility perturbation.
    #[arg(long, default_value_t = 1.0)]
    perturb: f64,
    /// Best-placement utility below which the bots consider exchanging.
    #[arg(long, default_value_t = 2.0)]
    exchange_threshold: f64,
    /// Weight of the board-openness term.
    #[arg(long, default_value_t = 0.0)]
    openness: f64,
    /// Audit every selection against the perturbation bound.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    setup: GameSetup,
    #[arg(long, default_value_t = 200)]
    orders: u64,
    #[arg(long, default_value_t = 20)]
    reps: u64,
    /// Worker threads.
    #[arg(long, env = "TILEBENCH_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Stop after this many new games; rerun the same command to resume.
    #[arg(long)]
    stop_after: Option<usize>,
    /// Print a running game counter to stderr.
    #[arg(long)]
    progress: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    setup: GameSetup,
    #[arg(long, default_value_t = 0)]
    order: u64,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    record: PathBuf,
    /// Ruleset the game was played under; defaults to the name in the record.
    #[arg(long)]
    ruleset: Option<String>,
    /// Print the board after every move.
    #[arg(long)]
    boards: bool,
}

#[derive(Args)]
struct TableArg {
    /// Outcome table written by `simulate`.
    table: PathBuf,
    /// Prefix for data files (`<prefix>.csv` and friends).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Between/within-order variance decomposition and per-order sd quantiles.
    Decompose {
        #[command(flatten)]
        input: TableArg,
        /// p1_score or diff.
        #[arg(long, default_value = "diff", value_parser = parse_metric)]
        metric: Metric,
        /// Label shuffles for the null between-order fraction.
        #[arg(long, default_value_t = 200)]
        permutations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Histogram bin width for per-order sds.
        #[arg(long, default_value_t = 5.0)]
        bin_width: f64,
    },
    /// Mean first-player lead with an order-clustered interval.
    Advantage {
        #[command(flatten)]
        input: TableArg,
    },
    /// Mean p1 score by the deciles of the two blanks.
    Blanks {
        #[command(flatten)]
        input: TableArg,
        /// Cells with fewer games are masked.
        #[arg(long, default_value_t = 50)]
        min_count: usize,
    },
    /// Mean p1 score by the decile of the k-th S.
    Sletters {
        #[command(flatten)]
        input: TableArg,
        #[arg(long, default_value_t = 50)]
        min_count: usize,
    },
    /// Per-tile slope of the metric on player 1's exposure count.
    Regress {
        #[command(flatten)]
        input: TableArg,
        /// A letter, `?` for the blank, or `all`.
        #[arg(long, default_value = "all")]
        letter: String,
        #[arg(long, default_value = "p1_score", value_parser = parse_metric)]
        metric: Metric,
    },
    /// Per-letter slopes under two rulesets and their difference.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value = "p1_score", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    Metric::parse(s).ok_or_else(|| format!("unknown metric {s:?} (use p1_score or diff)"))
}

/// A failure with its machine-readable category and exit code.
struct Failure {
    code: &'static str,
    exit: u8,
    message: String,
}

impl Failure {
    fn new(code: &'static str, exit: u8, message: impl Into<String>) -> Self {
        Failure { code, exit, message: message.into() }
    }
}

fn input_exit(code: &str) -> u8 {
    if code == "io" {
        1
    } else {
        3
    }
}

impl From<RulesetError> for Failure {
    fn from(e: RulesetError) -> Self {
        Failure::new(e.code(), input_exit(e.code()), e.to_string())
    }
}

impl From<LexiconError> for Failure {
    fn from(e: LexiconError) -> Self {
        Failure::new(e.code(), input_exit(e.code()), e.to_string())
    }
}

impl From<LeaveTableError> for Failure {
    fn from(e: LeaveTableError) -> Self {
        Failure::new(e.code(), input_exit(e.code()), e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::new(e.code(), 1, e.to_string())
    }
}

impl From<RecordError> for Failure {
    fn from(e: RecordError) -> Self {
        let exit = match e {
            RecordError::Io(_) => 1,
            RecordError::Diverged { .. } => 5,
            _ => 3,
        };
        Failure::new(e.code(), exit, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let exit = match &e {
            HarnessError::Interrupted { .. } => 6,
            HarnessError::Io { .. } => 1,
            other => input_exit(other.code()),
        };
        Failure::new(e.code(), exit, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::new(e.code(), 4, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("io", 1, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lexicon(cmd) => lexicon_cmd(cmd),
        Command::Ruleset(cmd) => ruleset_cmd(cmd),
        Command::Simulate(args) => simulate(args),
        Command::Play(args) => play(args),
        Command::Replay(args) => replay_cmd(args),
        Command::Analyze(cmd) => analyze(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn print_toml<T: Serialize>(value: &T) -> Outcome {
    let text = toml::to_string(value).map_err(|e| Failure::new("internal", 1, e.to_string()))?;
    print!("{text}");
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::new("io", 1, format!("{}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn lexicon_cmd(cmd: LexiconCmd) -> Outcome {
    match cmd {
        LexiconCmd::Build { wordlist, output } => {
            let (lex, report) = Lexicon::from_word_list(&wordlist)?;
            lex.save(&output)?;
            println!("words = {}", report.accepted);
            println!("duplicates = {}", report.duplicates);
            println!("rejected_length = {}", report.rejected_length);
            println!("nodes = {}", lex.node_count());
            println!("arcs = {}", lex.arc_count());
            Ok(())
        }
        LexiconCmd::Check { lexicon, words } => {
            let lex = Lexicon::open(&lexicon)?;
            for w in words {
                println!("{w}\t{}", lex.contains(&w));
            }
            Ok(())
        }
    }
}

fn ruleset_cmd(cmd: RulesetCmd) -> Outcome {
    match cmd {
        RulesetCmd::Validate { ruleset } => {
            let rs = match resolve_ruleset(&ruleset) {
                Ok(rs) => rs,
                Err(RulesetError::Invalid(report)) => {
                    for f in &report.findings {
                        println!("{}\t{}\t{}", f.code(), f.field(), f);
                    }
                    let first = report.findings.first().map_or("invalid_ruleset", |f| f.code());
                    return Err(Failure::new(first, 3, format!("{} finding(s) in {ruleset}", report.findings.len())));
                }
                Err(e) => return Err(e.into()),
            };
            let report = validate_ruleset(&rs);
            debug_assert!(report.is_empty());
            println!("ok\t{}\t{} tiles", rs.name, rs.total_tiles());
            Ok(())
        }
        RulesetCmd::Export { ruleset } => {
            print!("{}", resolve_ruleset(&ruleset)?.to_toml());
            Ok(())
        }
    }
}

fn bot_config(setup: &GameSetup) -> Result<BotConfig, Failure> {
    if setup.perturb.is_nan() || setup.perturb < 0.0 {
        return Err(Failure::new("invalid_config", 2, "--perturb must be non-negative"));
    }
    let leave_table = match &setup.leave_table {
        Some(p) => LeaveTable::load(p)?,
        None => LeaveTable::default(),
    };
    Ok(BotConfig {
        leave_table,
        perturbation_half_width: setup.perturb,
        openness_weight: setup.openness,
        exchange_threshold: setup.exchange_threshold,
    })
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<Lexicon, Failure> {
    Ok(match path {
        Some(p) => Lexicon::open(p)?,
        None => Lexicon::bundled(),
    })
}

fn simulate(args: SimulateArgs) -> Outcome {
    let bot = bot_config(&args.setup)?;
    let config = ExperimentConfig {
        ruleset: args.setup.ruleset.clone(),
        lexicon: args.setup.lexicon.clone(),
        n_orders: args.orders,
        replicates_per_order: args.reps,
        master_seed: args.setup.seed,
        bots: [bot.clone(), bot],
        workers: args.workers,
        output: Some(args.output.clone()),
        audit: args.setup.audit,
        stop_after: args.stop_after,
        progress: args.progress,
    };
    let table = harness::run_experiment(&config)?;
    println!("games = {}", table.len());
    println!("aborted = {}", table.meta.aborted);
    if config.audit {
        println!("audit_violations = {}", table.outcomes.iter().map(|o| o.audit_violations as u64).sum::<u64>());
    }
    println!("output = {:?}", args.output.display().to_string());
    Ok(())
}

fn play(args: PlayArgs) -> Outcome {
    let rules = resolve_ruleset(&args.setup.ruleset)?;
    let lexicon = load_lexicon(&args.setup.lexicon)?;
    let bot = SpeedyBot::new(bot_config(&args.setup)?);
    let sequence = harness::generate_sequence(&rules, args.setup.seed, args.order);
    let seed = harness::game_seed(args.setup.seed, args.order, args.replicate);
    let options = GameOptions { order_id: args.order, replicate_id: args.replicate, seed, audit: args.setup.audit };
    let rec = play_game(&rules, &lexicon, &sequence, [&bot, &bot], &mut GameRng::seed_from_u64(seed), options)?;
    let file = fs::File::create(&args.output)?;
    rec.write_to(std::io::BufWriter::new(file))?;
    println!("moves = {}", rec.moves.len());
    println!("end = {:?}", rec.end.label());
    println!("final_scores = {:?}", rec.final_scores);
    Ok(())
}

fn replay_cmd(args: ReplayArgs) -> Outcome {
    let file = fs::File::open(&args.record)?;
    let rec = GameRecord::read_from(BufReader::new(file))?;
    let rules = resolve_ruleset(args.ruleset.as_deref().unwrap_or(&rec.ruleset))?;
    let result = replay(&rec, &rules)?;
    let mut out = std::io::stdout().lock();
    for (i, step) in result.steps.iter().enumerate() {
        let m = &step.record;
        let what = match m.kind.as_str() {
            "place" => format!("{} {:?}", m.word.as_deref().unwrap_or(""), m.direction.expect("placement direction")),
            "exchange" => format!("exchange {}", m.exchanged.as_deref().unwrap_or("")),
            _ => "pass".to_string(),
        };
        writeln!(out, "{:>3} P{} {:<8} {:<24} {:>4} {:>5}", i + 1, m.player + 1, m.rack, what, m.score, m.total)?;
        if args.boards {
            writeln!(out, "{}", step.board)?;
        }
    }
    writeln!(out, "end = {:?}", rec.end.label())?;
    writeln!(out, "final_scores = {:?}", result.final_scores)?;
    if result.final_scores != rec.final_scores {
        return Err(Failure::new(
            "replay_mismatch",
            5,
            format!("replayed {:?} but the record stores {:?}", result.final_scores, rec.final_scores),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeSummary {
    decomposition: analysis::DecompositionResult,
    identity_relative_error: f64,
    null_between_fraction: analysis::NullFractions,
    within_sd: SdSummary,
}

#[derive(Serialize)]
struct SdSummary {
    metric: String,
    orders: usize,
    probabilities: Vec<f64>,
    quantiles: Vec<f64>,
}

#[derive(Serialize)]
struct Effects {
    effects: Vec<analysis::TileEffect>,
}

fn analyze(cmd: AnalyzeCmd) -> Outcome {
    match cmd {
        AnalyzeCmd::Decompose { input, metric, permutations, seed, bin_width } => {
            let table = OutcomeTable::read_csv(&input.table)?;
            let d = analysis::variance_decomposition(&table, metric)?;
            let null = analysis::null_between_fraction(&analysis::grouped(&table, metric), permutations, seed)?;
            let sds = analysis::within_sd_quantiles(&table, metric)?;
            if let Some(prefix) = &input.out {
                let mut s = String::from("sd_low,sd_high,orders\n");
                for (lo, hi, n) in analysis::histogram(&sds.sds, bin_width) {
                    s.push_str(&format!("{lo},{hi},{n}\n"));
                }
                write_file(&with_suffix(prefix, ".sd-histogram.csv"), s)?;
                let mut s = String::from("order_id,games,p1_mean,p1_sd,diff_mean,diff_sd\n");
                for o in harness::summarize_orders(&table) {
                    let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
                    s.push_str(&format!(
                        "{},{},{:.4},{},{:.4},{}\n",
                        o.order_id,
                        o.games,
                        o.p1_mean,
                        f(o.p1_sd()),
                        o.diff_mean,
                        f(o.diff_sd())
                    ));
                }
                write_file(&with_suffix(prefix, ".orders.csv"), s)?;
            }
            print_toml(&DecomposeSummary {
                identity_relative_error: d.identity_error(),
                decomposition: d,
                null_between_fraction: null,
                within_sd: SdSummary {
                    metric: sds.metric,
                    orders: sds.orders,
                    probabilities: sds.probabilities,
                    quantiles: sds.values,
                },
            })
        }
        AnalyzeCmd::Advantage { input } => {
            let table = OutcomeTable::read_csv(&input.table)?;
            print_toml(&analysis::first_player_advantage(&table)?)
        }
        AnalyzeCmd::Blanks { input, min_count } => {
            let table = OutcomeTable::read_csv(&input.table)?;
            let grid = analysis::blank_decile_table(&table, min_count);
            if let Some(prefix) = &input.out {
                write_file(&with_suffix(prefix, ".blanks.csv"), grid.to_csv())?;
            }
            print_toml(&analysis::blank_contrast(&table)?)
        }
        AnalyzeCmd::Sletters { input, min_count } => {
            let table = OutcomeTable::read_csv(&input.table)?;
            let s = analysis::s_position_table(&table, min_count);
            match &input.out {
                Some(prefix) => write_file(&with_suffix(prefix, ".sletters.csv"), s.to_csv()),
                None => {
                    print!("{}", s.to_csv());
                    Ok(())
                }
            }
        }
        AnalyzeCmd::Regress { input, letter, metric } => {
            let table = OutcomeTable::read_csv(&input.table)?;
            let effects = if letter.eq_ignore_ascii_case("all") {
                analysis::all_tile_effects(&table, metric)
            } else {
                let kind = single_tile(&letter)?;
                vec![analysis::tile_regression(&table, kind, metric)?]
            };
            if let Some(prefix) = &input.out {
                let mut s = String::from("letter,slope,std_error,games\n");
                for e in &effects {
                    s.push_str(&format!("{},{:.4},{:.4},{}\n", e.letter, e.slope, e.std_error, e.games));
                }
                write_file(&with_suffix(prefix, ".effects.csv"), s)?;
            }
            print_toml(&Effects { effects })
        }
        AnalyzeCmd::Compare { first, second, metric, out } => {
            let a = OutcomeTable::read_csv(&first)?;
            let b = OutcomeTable::read_csv(&second)?;
            let c = analysis::compare_rulesets(&a, &b, metric);
            match &out {
                Some(prefix) => {
                    write_file(&with_suffix(prefix, ".compare.csv"), c.to_csv())?;
                    println!("first_mean_p1 = {}", c.first_mean_p1);
                    println!("second_mean_p1 = {}", c.second_mean_p1);
                }
                None => print!("{}", c.to_csv()),
            }
            Ok(())
        }
    }
}

fn single_tile(s: &str) -> Result<u8, Failure> {
    let mut chars = s.chars();
    match (chars.next().and_then(|c| parse_tile(c.to_ascii_uppercase())), chars.next()) {
        (Some(kind), None) => Ok(kind),
        _ => Err(Failure::new("unknown_tile", 2, format!("{s:?} is not a single tile letter"))),
    }
}
