//! Orders × replicates experiment runner and the outcome table.
//!
//! Every game's randomness is derived from `(master_seed, order_id,
//! replicate_id)`, so the sorted table does not depend on the number of
//! workers or on interruptions. Completed games are appended to
//! `<out>.partial` as they arrive and a rerun with the same configuration
//! skips them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crossbeam_channel::bounded;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bot::{BotConfig, SpeedyBot};
use crate::engine::{play_game, GameOptions, GameRng};
use crate::lexicon::{Lexicon, LexiconError};
use crate::record::GameRecord;
use crate::reservoir::TileSequence;
use crate::ruleset::{resolve_ruleset, RuleSet, RulesetError};
use crate::tiles::{tile_char, BLANK, TILE_KINDS};

pub const OUTCOMES_FORMAT: &str = "tilebench-outcomes";
pub const OUTCOMES_VERSION: u32 = 1;
const PARTIAL_TAG: &str = "# tilebench-partial 1";
const S_KIND: u8 = b'S' - b'A';

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one game: `mix64(mix64(mix64(master) ^ order) ^ replicate)`.
pub fn game_seed(master_seed: u64, order_id: u64, replicate_id: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ order_id) ^ replicate_id)
}

/// Seed of an order's tile sequence; the replicate slot is `u64::MAX`.
pub fn sequence_seed(master_seed: u64, order_id: u64) -> u64 {
    game_seed(master_seed, order_id, u64::MAX)
}

pub fn generate_sequence(rules: &RuleSet, master_seed: u64, order_id: u64) -> TileSequence {
    TileSequence::generate(rules, order_id, &mut GameRng::seed_from_u64(sequence_seed(master_seed, order_id)))
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ruleset(#[from] RulesetError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed outcome table: {0}")]
    Table(String),
    #[error("unsupported outcome table header {0:?}")]
    UnsupportedVersion(String),
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("partial results in {0} belong to a different experiment")]
    PartialMismatch(PathBuf),
    #[error("stopped after {completed} games; rerun to resume")]
    Interrupted { completed: usize },
}

impl HarnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Ruleset(e) => e.code(),
            HarnessError::Lexicon(e) => e.code(),
            HarnessError::Io { .. } => "io",
            HarnessError::Table(_) => "parse",
            HarnessError::UnsupportedVersion(_) => "unsupported_version",
            HarnessError::Config(_) => "invalid_config",
            HarnessError::PartialMismatch(_) => "partial_mismatch",
            HarnessError::Interrupted { .. } => "interrupted",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Bundled ruleset name or path to a ruleset file.
    pub ruleset: String,
    /// Word list or compiled lexicon; `None` uses the bundled list.
    pub lexicon: Option<PathBuf>,
    pub n_orders: u64,
    pub replicates_per_order: u64,
    pub master_seed: u64,
    pub bots: [BotConfig; 2],
    pub workers: usize,
    pub output: Option<PathBuf>,
    /// Track the perturbation bound on every selection.
    pub audit: bool,
    /// Stop after this many newly completed games (leaves the partial file).
    pub stop_after: Option<usize>,
    pub progress: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ruleset: "scrabble".into(),
            lexicon: None,
            n_orders: 200,
            replicates_per_order: 20,
            master_seed: 1,
            bots: [BotConfig::default(), BotConfig::default()],
            workers: 1,
            output: None,
            audit: false,
            stop_after: None,
            progress: false,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.n_orders == 0 || self.replicates_per_order == 0 {
            return Err(HarnessError::Config("orders and replicates must both be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        for b in &self.bots {
            if b.perturbation_half_width.is_nan() || b.perturbation_half_width < 0.0 {
                return Err(HarnessError::Config("perturbation half width must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Identifies everything that affects game results.
    fn fingerprint(&self, rules: &RuleSet, lexicon: &Lexicon) -> String {
        let mut h = Sha256::new();
        h.update(rules.to_toml().as_bytes());
        h.update(lexicon.to_bytes());
        h.update(format!(
            "{:?}|{}|{}|{}|{}",
            self.bots, self.n_orders, self.replicates_per_order, self.master_seed, self.audit
        ));
        h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    P1,
    P2,
    Tie,
}

impl Winner {
    fn of(diff: i32) -> Winner {
        match diff.signum() {
            1 => Winner::P1,
            -1 => Winner::P2,
            _ => Winner::Tie,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Winner::P1 => "p1",
            Winner::P2 => "p2",
            Winner::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    pub order_id: u64,
    pub replicate_id: u64,
    pub seed: u64,
    pub p1_score: i32,
    pub p2_score: i32,
    pub diff: i32,
    pub winner: Winner,
    pub bingos: [u32; 2],
    /// 1-based positions of the blanks in the order (0 when absent).
    pub blank_positions: [u16; 2],
    /// 1-based positions of the S tiles, ascending.
    pub s_positions: Vec<u16>,
    pub tiles_available: [u32; 2],
    pub turns: u32,
    pub end: String,
    pub audit_violations: u32,
    /// Distinct tiles of each kind drawn by player 1.
    pub p1_drawn: [u32; TILE_KINDS],
    /// Tiles of each kind player 1 put on the board.
    pub p1_played: [u32; TILE_KINDS],
}

impl GameOutcome {
    pub fn from_record(rec: &GameRecord, sequence: &TileSequence) -> GameOutcome {
        let blanks = sequence.positions_of(BLANK);
        let diff = rec.final_scores[0] - rec.final_scores[1];
        GameOutcome {
            order_id: rec.order_id,
            replicate_id: rec.replicate_id,
            seed: rec.seed,
            p1_score: rec.final_scores[0],
            p2_score: rec.final_scores[1],
            diff,
            winner: Winner::of(diff),
            bingos: rec.bingos,
            blank_positions: [blanks.first().copied().unwrap_or(0), blanks.get(1).copied().unwrap_or(0)],
            s_positions: sequence.positions_of(S_KIND),
            tiles_available: rec.tiles_available,
            turns: rec.moves.len() as u32,
            end: rec.end.label().to_string(),
            audit_violations: rec.audit.map_or(0, |a| a.violations),
            p1_drawn: rec.p1_exposure,
            p1_played: rec.p1_played,
        }
    }

    fn kind_label(kind: usize) -> String {
        if kind as u8 == BLANK {
            "blank".into()
        } else {
            tile_char(kind as u8).to_string()
        }
    }

    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = [
            "order_id",
            "replicate_id",
            "seed",
            "p1_score",
            "p2_score",
            "diff",
            "winner",
            "p1_bingos",
            "p2_bingos",
            "blank1",
            "blank2",
            "s_positions",
            "p1_tiles_available",
            "p2_tiles_available",
            "turns",
            "end",
            "audit_violations",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend((0..TILE_KINDS).map(|k| format!("p1_drawn_{}", Self::kind_label(k))));
        h.extend((0..TILE_KINDS).map(|k| format!("p1_played_{}", Self::kind_label(k))));
        h
    }

    fn to_row(&self) -> Vec<String> {
        let s = self.s_positions.iter().map(u16::to_string).collect::<Vec<_>>().join(";");
        let mut row = vec![
            self.order_id.to_string(),
            self.replicate_id.to_string(),
            self.seed.to_string(),
            self.p1_score.to_string(),
            self.p2_score.to_string(),
            self.diff.to_string(),
            self.winner.label().to_string(),
            self.bingos[0].to_string(),
            self.bingos[1].to_string(),
            self.blank_positions[0].to_string(),
            self.blank_positions[1].to_string(),
            s,
            self.tiles_available[0].to_string(),
            self.tiles_available[1].to_string(),
            self.turns.to_string(),
            self.end.clone(),
            self.audit_violations.to_string(),
        ];
        row.extend(self.p1_drawn.iter().map(u32::to_string));
        row.extend(self.p1_played.iter().map(u32::to_string));
        row
    }

    fn from_row(row: &csv::StringRecord) -> Result<GameOutcome, String> {
        if row.len() != 17 + 2 * TILE_KINDS {
            return Err(format!("expected {} columns, found {}", 17 + 2 * TILE_KINDS, row.len()));
        }
        fn num<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T, String> {
            row[i].parse().map_err(|_| format!("bad value {:?} in column {}", &row[i], i + 1))
        }
        let winner = match &row[6] {
            "p1" => Winner::P1,
            "p2" => Winner::P2,
            "tie" => Winner::Tie,
            other => return Err(format!("bad winner {other:?}")),
        };
        let s_positions = if row[11].is_empty() {
            Vec::new()
        } else {
            row[11]
                .split(';')
                .map(|p| p.parse().map_err(|_| format!("bad S position {p:?}")))
                .collect::<Result<_, _>>()?
        };
        let mut p1_drawn = [0u32; TILE_KINDS];
        let mut p1_played = [0u32; TILE_KINDS];
        for k in 0..TILE_KINDS {
            p1_drawn[k] = num(row, 17 + k)?;
            p1_played[k] = num(row, 17 + TILE_KINDS + k)?;
        }
        let out = GameOutcome {
            order_id: num(row, 0)?,
            replicate_id: num(row, 1)?,
            seed: num(row, 2)?,
            p1_score: num(row, 3)?,
            p2_score: num(row, 4)?,
            diff: num(row, 5)?,
            winner,
            bingos: [num(row, 7)?, num(row, 8)?],
            blank_positions: [num(row, 9)?, num(row, 10)?],
            s_positions,
            tiles_available: [num(row, 12)?, num(row, 13)?],
            turns: num(row, 14)?,
            end: row[15].to_string(),
            audit_violations: num(row, 16)?,
            p1_drawn,
            p1_played,
        };
        if out.diff != out.p1_score - out.p2_score {
            return Err(format!("diff {} does not equal p1_score - p2_score", out.diff));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub format: String,
    pub version: u32,
    pub ruleset: String,
    pub lexicon_words: u64,
    pub n_orders: u64,
    pub replicates_per_order: u64,
    pub master_seed: u64,
    pub perturbation_half_width: [f64; 2],
    pub exchange_threshold: [f64; 2],
    pub openness_weight: [f64; 2],
    pub audit: bool,
    pub games: usize,
    pub aborted: usize,
    pub seed_derivation: String,
    pub fingerprint: String,
}

/// All game outcomes of one experiment, sorted by (order, replicate).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeTable {
    pub meta: ExperimentMeta,
    pub outcomes: Vec<GameOutcome>,
}

impl OutcomeTable {
    pub fn new(mut outcomes: Vec<GameOutcome>) -> Self {
        outcomes.sort_by_key(|o| (o.order_id, o.replicate_id));
        OutcomeTable { meta: ExperimentMeta::default(), outcomes }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn by_order(&self) -> BTreeMap<u64, Vec<&GameOutcome>> {
        let mut groups: BTreeMap<u64, Vec<&GameOutcome>> = BTreeMap::new();
        for o in &self.outcomes {
            groups.entry(o.order_id).or_default().push(o);
        }
        groups
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = format!("# {OUTCOMES_FORMAT} {OUTCOMES_VERSION}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(GameOutcome::csv_header()).expect("in-memory write");
            for o in &self.outcomes {
                w.write_record(o.to_row()).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_csv_bytes()).map_err(io_err(path))
    }

    pub fn parse_csv(text: &str) -> Result<OutcomeTable, HarnessError> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let expected = format!("# {OUTCOMES_FORMAT} {OUTCOMES_VERSION}");
        if first.trim_end() != expected {
            return Err(HarnessError::UnsupportedVersion(first.to_string()));
        }
        let mut rdr = csv::Reader::from_reader(rest.as_bytes());
        let header = rdr.headers().map_err(|e| HarnessError::Table(e.to_string()))?.clone();
        if header.iter().ne(GameOutcome::csv_header().iter().map(String::as_str)) {
            return Err(HarnessError::Table("column header does not match this version".into()));
        }
        let mut outcomes = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| HarnessError::Table(e.to_string()))?;
            outcomes.push(GameOutcome::from_row(&rec).map_err(|e| HarnessError::Table(format!("row {}: {e}", i + 1)))?);
        }
        Ok(OutcomeTable::new(outcomes))
    }

    /// Reads a table and, when present, its `.meta.toml` sidecar.
    pub fn read_csv(path: &Path) -> Result<OutcomeTable, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut table = Self::parse_csv(&text)?;
        let meta_path = sidecar(path, "meta.toml");
        if let Ok(meta) = fs::read_to_string(&meta_path) {
            table.meta =
                toml::from_str(&meta).map_err(|e| HarnessError::Table(format!("{}: {e}", meta_path.display())))?;
        }
        Ok(table)
    }
}

pub fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Loads the ruleset and lexicon named in `config` and runs it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<OutcomeTable, HarnessError> {
    let rules = resolve_ruleset(&config.ruleset)?;
    let lexicon = match &config.lexicon {
        Some(p) => Lexicon::open(p)?,
        None => Lexicon::bundled(),
    };
    run_with(config, &rules, &lexicon)
}

enum GameResult {
    Done(Box<GameOutcome>),
    Aborted { order_id: u64, replicate_id: u64, code: &'static str, message: String },
}

fn play_one(
    rules: &RuleSet,
    lexicon: &Lexicon,
    sequence: &TileSequence,
    bots: &[SpeedyBot; 2],
    config: &ExperimentConfig,
    replicate_id: u64,
) -> GameResult {
    let seed = game_seed(config.master_seed, sequence.order_id, replicate_id);
    let mut rng = GameRng::seed_from_u64(seed);
    let options = GameOptions { order_id: sequence.order_id, replicate_id, seed, audit: config.audit };
    match play_game(rules, lexicon, sequence, [&bots[0], &bots[1]], &mut rng, options) {
        Ok(rec) => GameResult::Done(Box::new(GameOutcome::from_record(&rec, sequence))),
        Err(e) => {
            GameResult::Aborted { order_id: sequence.order_id, replicate_id, code: e.code(), message: e.to_string() }
        }
    }
}

/// Runs the experiment with an already loaded ruleset and lexicon.
pub fn run_with(config: &ExperimentConfig, rules: &RuleSet, lexicon: &Lexicon) -> Result<OutcomeTable, HarnessError> {
    config.validate()?;
    let fingerprint = config.fingerprint(rules, lexicon);
    let sequences: Vec<TileSequence> =
        (0..config.n_orders).map(|o| generate_sequence(rules, config.master_seed, o)).collect();

    let partial_path = config.output.as_ref().map(|p| sidecar(p, "partial"));
    let aborted_path = config.output.as_ref().map(|p| sidecar(p, "aborted"));
    let mut outcomes: Vec<GameOutcome> = Vec::new();
    let mut aborted: BTreeSet<(u64, u64)> = BTreeSet::new();
    if let Some(pp) = &partial_path {
        if pp.exists() {
            let (done, ab) = read_partial(pp, &fingerprint)?;
            outcomes = done;
            aborted = ab;
        } else {
            fs::write(pp, format!("{PARTIAL_TAG} {fingerprint}\n")).map_err(io_err(pp))?;
        }
    }
    let finished: BTreeSet<(u64, u64)> =
        outcomes.iter().map(|o| (o.order_id, o.replicate_id)).chain(aborted.iter().copied()).collect();
    let jobs: Vec<(u64, u64)> = (0..config.n_orders)
        .flat_map(|o| (0..config.replicates_per_order).map(move |r| (o, r)))
        .filter(|k| !finished.contains(k))
        .collect();

    let mut partial = match &partial_path {
        Some(pp) => Some(BufWriter::new(OpenOptions::new().append(true).open(pp).map_err(io_err(pp))?)),
        None => None,
    };
    let bots = [SpeedyBot::new(config.bots[0].clone()), SpeedyBot::new(config.bots[1].clone())];
    let total = (config.n_orders * config.replicates_per_order) as usize;
    let mut new_games = 0usize;
    let mut interrupted = false;
    let mut aborted_log: Vec<String> = Vec::new();

    std::thread::scope(|scope| -> Result<(), HarnessError> {
        let (job_tx, job_rx) = bounded::<(u64, u64)>(config.workers * 4);
        let (res_tx, res_rx) = bounded::<GameResult>(config.workers * 4);
        for _ in 0..config.workers {
            let job_rx = job_rx.clone();
            let res_tx = res_tx.clone();
            let (bots, sequences) = (&bots, &sequences);
            scope.spawn(move || {
                for (order, rep) in job_rx {
                    let result = play_one(rules, lexicon, &sequences[order as usize], bots, config, rep);
                    if res_tx.send(result).is_err() {
                        break;
                    }
                }
            });
        }
        drop(job_rx);
        drop(res_tx);
        let jobs = &jobs;
        scope.spawn(move || {
            for &job in jobs {
                if job_tx.send(job).is_err() {
                    break;
                }
            }
        });

        // The collector is the only writer.
        for result in res_rx.iter() {
            let line = match result {
                GameResult::Done(o) => {
                    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                    w.write_record(o.to_row()).expect("in-memory write");
                    let bytes = w.into_inner().expect("in-memory write");
                    outcomes.push(*o);
                    String::from_utf8(bytes).expect("utf8")
                }
                GameResult::Aborted { order_id, replicate_id, code, message } => {
                    aborted.insert((order_id, replicate_id));
                    aborted_log.push(format!("{order_id}\t{replicate_id}\t{code}\t{message}"));
                    format!("!aborted,{order_id},{replicate_id}\n")
                }
            };
            if let (Some(w), Some(pp)) = (partial.as_mut(), &partial_path) {
                w.write_all(line.as_bytes()).and_then(|_| w.flush()).map_err(io_err(pp))?;
            }
            new_games += 1;
            if config.progress {
                eprint!("\r{}/{} games", outcomes.len() + aborted.len(), total);
            }
            if config.stop_after.is_some_and(|n| new_games >= n) && outcomes.len() + aborted.len() < total {
                interrupted = true;
                break;
            }
        }
        Ok(())
    })?;
    if config.progress {
        eprintln!();
    }

    if let (Some(ap), false) = (&aborted_path, aborted_log.is_empty()) {
        let mut f = OpenOptions::new().create(true).append(true).open(ap).map_err(io_err(ap))?;
        for line in &aborted_log {
            writeln!(f, "{line}").map_err(io_err(ap))?;
        }
    }
    if interrupted {
        return Err(HarnessError::Interrupted { completed: outcomes.len() + aborted.len() });
    }

    let mut table = OutcomeTable::new(outcomes);
    table.meta = ExperimentMeta {
        format: OUTCOMES_FORMAT.into(),
        version: OUTCOMES_VERSION,
        ruleset: rules.name.clone(),
        lexicon_words: lexicon.word_count(),
        n_orders: config.n_orders,
        replicates_per_order: config.replicates_per_order,
        master_seed: config.master_seed,
        perturbation_half_width: [config.bots[0].perturbation_half_width, config.bots[1].perturbation_half_width],
        exchange_threshold: [config.bots[0].exchange_threshold, config.bots[1].exchange_threshold],
        openness_weight: [config.bots[0].openness_weight, config.bots[1].openness_weight],
        audit: config.audit,
        games: table.outcomes.len(),
        aborted: aborted.len(),
        seed_derivation: "game = mix64(mix64(mix64(master) ^ order) ^ replicate); order sequence uses replicate = 2^64-1; mix64 = SplitMix64 finalizer".into(),
        fingerprint,
    };
    if let Some(out) = &config.output {
        table.write_csv(out)?;
        let meta = toml::to_string(&table.meta).map_err(|e| HarnessError::Table(e.to_string()))?;
        let meta_path = sidecar(out, "meta.toml");
        fs::write(&meta_path, meta).map_err(io_err(&meta_path))?;
        write_orders(&sidecar(out, "orders"), &sequences)?;
        if let Some(pp) = &partial_path {
            drop(partial);
            fs::remove_file(pp).map_err(io_err(pp))?;
        }
    }
    Ok(table)
}

/// Finished outcomes and the (order, replicate) pairs of aborted games.
type Resumed = (Vec<GameOutcome>, BTreeSet<(u64, u64)>);

fn read_partial(path: &Path, fingerprint: &str) -> Result<Resumed, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines.next().transpose().map_err(io_err(path))?.unwrap_or_default();
    if first != format!("{PARTIAL_TAG} {fingerprint}") {
        return Err(HarnessError::PartialMismatch(path.to_path_buf()));
    }
    let mut outcomes = Vec::new();
    let mut aborted = BTreeSet::new();
    for line in lines {
        let line = line.map_err(io_err(path))?;
        if let Some(rest) = line.strip_prefix("!aborted,") {
            let mut it = rest.split(',').map(str::parse::<u64>);
            if let (Some(Ok(o)), Some(Ok(r))) = (it.next(), it.next()) {
                aborted.insert((o, r));
            }
            continue;
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        // A torn final line from a crash is dropped and the game replayed.
        if let Some(Ok(rec)) = rdr.records().next() {
            if let Ok(o) = GameOutcome::from_row(&rec) {
                outcomes.push(o);
            }
        }
    }
    Ok((outcomes, aborted))
}

/// One line per order: `order_id<TAB>sequence`.
pub fn write_orders(path: &Path, sequences: &[TileSequence]) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for s in sequences {
        writeln!(w, "{}\t{}", s.order_id, s.to_line()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_orders(path: &Path) -> Result<Vec<TileSequence>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (id, seq) = l.split_once('\t').ok_or_else(|| HarnessError::Table(format!("bad order line {l:?}")))?;
            let id: u64 = id.parse().map_err(|_| HarnessError::Table(format!("bad order id {id:?}")))?;
            TileSequence::parse_line(id, seq).ok_or_else(|| HarnessError::Table(format!("bad sequence for order {id}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderSummary {
    pub order_id: u64,
    pub games: usize,
    pub p1_mean: f64,
    /// Unbiased sample variance; `None` with a single replicate.
    pub p1_variance: Option<f64>,
    pub diff_mean: f64,
    pub diff_variance: Option<f64>,
}

impl OrderSummary {
    pub fn p1_sd(&self) -> Option<f64> {
        self.p1_variance.map(f64::sqrt)
    }

    pub fn diff_sd(&self) -> Option<f64> {
        self.diff_variance.map(f64::sqrt)
    }
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (usize, f64, Option<f64>) {
    let n = xs.clone().count();
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = (n >= 2).then(|| xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64);
    (n, mean, var)
}

pub fn summarize_orders(table: &OutcomeTable) -> Vec<OrderSummary> {
    table
        .by_order()
        .into_iter()
        .map(|(order_id, games)| {
            let (n, p1_mean, p1_variance) = mean_var(games.iter().map(|g| g.p1_score as f64));
            let (_, diff_mean, diff_variance) = mean_var(games.iter().map(|g| g.diff as f64));
            OrderSummary { order_id, games: n, p1_mean, p1_variance, diff_mean, diff_variance }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(order_id: u64, replicate_id: u64, p1: i32, p2: i32) -> GameOutcome {
        GameOutcome {
            order_id,
            replicate_id,
            seed: 0,
            p1_score: p1,
            p2_score: p2,
            diff: p1 - p2,
            winner: Winner::of(p1 - p2),
            bingos: [0, 0],
            blank_positions: [3, 90],
            s_positions: vec![1, 2, 50, 99],
            tiles_available: [50, 50],
            turns: 20,
            end: "played_out".into(),
            audit_violations: 0,
            p1_drawn: [1; TILE_KINDS],
            p1_played: [0; TILE_KINDS],
        }
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(game_seed(1, 0, 1), game_seed(1, 1, 0));
        assert_eq!(sequence_seed(5, 3), game_seed(5, 3, u64::MAX));
    }

    #[test]
    fn csv_round_trip() {
        let table = OutcomeTable::new(vec![outcome(1, 0, 400, 380), outcome(0, 1, 350, 420)]);
        let text = String::from_utf8(table.to_csv_bytes()).unwrap();
        assert!(text.starts_with("# tilebench-outcomes 1\n"));
        let back = OutcomeTable::parse_csv(&text).unwrap();
        assert_eq!(back.outcomes, table.outcomes);
        assert_eq!(back.outcomes[0].order_id, 0);
    }

    #[test]
    fn csv_refuses_other_versions() {
        let text =
            String::from_utf8(OutcomeTable::new(vec![]).to_csv_bytes()).unwrap().replace("outcomes 1", "outcomes 2");
        assert_eq!(OutcomeTable::parse_csv(&text).unwrap_err().code(), "unsupported_version");
    }

    #[test]
    fn summaries() {
        let table = OutcomeTable::new(vec![
            outcome(0, 0, 10, 10),
            outcome(0, 1, 10, 10),
            outcome(0, 2, 10, 10),
            outcome(1, 0, 0, 10),
            outcome(1, 1, 10, 0),
            outcome(2, 0, 5, 5),
        ]);
        let s = summarize_orders(&table);
        assert_eq!((s[0].diff_mean, s[0].diff_sd()), (0.0, Some(0.0)));
        assert_eq!(s[1].diff_mean, 0.0);
        assert!((s[1].diff_sd().unwrap() - 200f64.sqrt()).abs() < 1e-12);
        assert_eq!(s[2].diff_variance, None);
    }

    #[test]
    fn rejects_empty_experiment() {
        let config = ExperimentConfig { n_orders: 0, ..Default::default() };
        let err = run_with(&config, &RuleSet::scrabble(), &Lexicon::build(["AB"]).unwrap().0).unwrap_err();
        assert_eq!(err.code(), "invalid_config");
    }
}
