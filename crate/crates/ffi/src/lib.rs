//! C interface to tilebench.
//!
//! Objects are opaque handles from the `tb_*_open`, `tb_*_bundled`,
//! `tb_*_read` and `tb_experiment_run` calls, released with the matching
//! `tb_*_free`. Every fallible call
//! returns a [`TbStatus`]; on failure `tb_last_error()` describes the problem
//! for the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use tilebench::analysis::{self, Metric};
use tilebench::bot::BotConfig;
use tilebench::harness::{run_with, ExperimentConfig, OutcomeTable};
use tilebench::lexicon::Lexicon;
use tilebench::ruleset::{resolve_ruleset, RuleSet};
use tilebench::tiles::parse_tile;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidInput = 4,
    UndefinedEstimate = 5,
    Interrupted = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbMetric {
    P1Score = 0,
    Diff = 1,
}

impl From<TbMetric> for Metric {
    fn from(m: TbMetric) -> Metric {
        match m {
            TbMetric::P1Score => Metric::P1Score,
            TbMetric::Diff => Metric::Diff,
        }
    }
}

pub struct TbLexicon(Lexicon);

pub struct TbRuleset(RuleSet);

pub struct TbOutcomeTable(OutcomeTable);

/// Experiment settings; start from `tb_experiment_config_default()`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TbExperimentConfig {
    pub n_orders: u64,
    pub replicates_per_order: u64,
    pub master_seed: u64,
    pub workers: u32,
    pub audit: bool,
    /// Applied to both players.
    pub perturbation_half_width: f64,
    pub exchange_threshold: f64,
    pub openness_weight: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbGameSummary {
    pub order_id: u64,
    pub replicate_id: u64,
    pub seed: u64,
    pub p1_score: i32,
    pub p2_score: i32,
    pub diff: i32,
    pub turns: u32,
    pub bingos: [u32; 2],
    /// 1-based positions of the blanks in the tile order, 0 when absent.
    pub blank_positions: [u16; 2],
    pub audit_violations: u32,
}

/// Fractions are NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbDecomposition {
    pub n_orders: usize,
    pub replicates: usize,
    pub ss_total: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub between_fraction_naive: f64,
    pub between_fraction_anova: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbAdvantage {
    pub games: usize,
    pub clusters: usize,
    pub mean_diff: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(TbStatus, String);

fn fail(status: TbStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn status_for(code: &str) -> TbStatus {
    match code {
        "io" => TbStatus::Io,
        "interrupted" => TbStatus::Interrupted,
        "undefined_estimate" => TbStatus::UndefinedEstimate,
        _ => TbStatus::InvalidInput,
    }
}

macro_rules! coded {
    ($e:expr) => {{
        let e = $e;
        Failure(status_for(e.code()), format!("[{}] {}", e.code(), e))
    }};
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TbStatus {
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(fail(TbStatus::Panic, format!("[panic] {msg}")))
    });
    match result {
        Ok(()) => TbStatus::Ok,
        Err(Failure(status, msg)) => {
            let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(fail(TbStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| fail(TbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| fail(TbStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(TbStatus::NullArgument, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The bundled word list.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_lexicon_bundled(out: *mut *mut TbLexicon) -> TbStatus {
    guard(|| put(out, Box::into_raw(Box::new(TbLexicon(Lexicon::bundled()))), "out"))
}

/// Opens a compiled lexicon or a plain word list.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_lexicon_open(path: *const c_char, out: *mut *mut TbLexicon) -> TbStatus {
    guard(|| {
        let lex = Lexicon::open(text(path, "path")?).map_err(|e| coded!(e))?;
        put(out, Box::into_raw(Box::new(TbLexicon(lex))), "out")
    })
}

/// # Safety
/// `lexicon` must come from this library; `word` must be NUL-terminated and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_lexicon_contains(
    lexicon: *const TbLexicon,
    word: *const c_char,
    out: *mut bool,
) -> TbStatus {
    guard(|| {
        let lex = get(lexicon, "lexicon")?;
        put(out, lex.0.contains(text(word, "word")?), "out")
    })
}

/// # Safety
/// `lexicon` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tb_lexicon_word_count(lexicon: *const TbLexicon) -> u64 {
    lexicon.as_ref().map_or(0, |l| l.0.word_count())
}

/// # Safety
/// `lexicon` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_lexicon_free(lexicon: *mut TbLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// A bundled ruleset name ("scrabble", "wwf") or a ruleset file path.
///
/// # Safety
/// `name_or_path` must be NUL-terminated and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_ruleset_open(name_or_path: *const c_char, out: *mut *mut TbRuleset) -> TbStatus {
    guard(|| {
        let rules = resolve_ruleset(text(name_or_path, "name_or_path")?).map_err(|e| coded!(e))?;
        put(out, Box::into_raw(Box::new(TbRuleset(rules))), "out")
    })
}

/// # Safety
/// `ruleset` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tb_ruleset_tile_total(ruleset: *const TbRuleset) -> usize {
    ruleset.as_ref().map_or(0, |r| r.0.total_tiles())
}

/// # Safety
/// `ruleset` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tb_ruleset_bingo_bonus(ruleset: *const TbRuleset) -> i32 {
    ruleset.as_ref().map_or(0, |r| r.0.bingo_bonus)
}

/// # Safety
/// `ruleset` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_ruleset_free(ruleset: *mut TbRuleset) {
    if !ruleset.is_null() {
        drop(Box::from_raw(ruleset));
    }
}

#[no_mangle]
pub extern "C" fn tb_experiment_config_default() -> TbExperimentConfig {
    let d = ExperimentConfig::default();
    let b = BotConfig::default();
    TbExperimentConfig {
        n_orders: d.n_orders,
        replicates_per_order: d.replicates_per_order,
        master_seed: d.master_seed,
        workers: d.workers as u32,
        audit: d.audit,
        perturbation_half_width: b.perturbation_half_width,
        exchange_threshold: b.exchange_threshold,
        openness_weight: b.openness_weight,
    }
}

/// Runs an experiment. With a non-null `output` path the table, its
/// metadata and the tile orders are written there, and an interrupted run
/// with the same settings resumes.
///
/// # Safety
/// Handles must come from this library, `config` must be readable, `output`
/// null or NUL-terminated, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_experiment_run(
    ruleset: *const TbRuleset,
    lexicon: *const TbLexicon,
    config: *const TbExperimentConfig,
    output: *const c_char,
    out: *mut *mut TbOutcomeTable,
) -> TbStatus {
    guard(|| {
        let rules = &get(ruleset, "ruleset")?.0;
        let lex = &get(lexicon, "lexicon")?.0;
        let c = get(config, "config")?;
        let output = if output.is_null() { None } else { Some(PathBuf::from(text(output, "output")?)) };
        let bot = BotConfig {
            perturbation_half_width: c.perturbation_half_width,
            exchange_threshold: c.exchange_threshold,
            openness_weight: c.openness_weight,
            ..BotConfig::default()
        };
        let config = ExperimentConfig {
            ruleset: rules.name.clone(),
            n_orders: c.n_orders,
            replicates_per_order: c.replicates_per_order,
            master_seed: c.master_seed,
            bots: [bot.clone(), bot],
            workers: c.workers as usize,
            audit: c.audit,
            output,
            ..ExperimentConfig::default()
        };
        let table = run_with(&config, rules, lex).map_err(|e| coded!(e))?;
        put(out, Box::into_raw(Box::new(TbOutcomeTable(table))), "out")
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_outcome_table_read(path: *const c_char, out: *mut *mut TbOutcomeTable) -> TbStatus {
    guard(|| {
        let table = OutcomeTable::read_csv(text(path, "path")?.as_ref()).map_err(|e| coded!(e))?;
        put(out, Box::into_raw(Box::new(TbOutcomeTable(table))), "out")
    })
}

/// # Safety
/// `table` must come from this library and `path` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tb_outcome_table_write(table: *const TbOutcomeTable, path: *const c_char) -> TbStatus {
    guard(|| get(table, "table")?.0.write_csv(text(path, "path")?.as_ref()).map_err(|e| coded!(e)))
}

/// # Safety
/// `table` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tb_outcome_table_len(table: *const TbOutcomeTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Game `index` in (order, replicate) order.
///
/// # Safety
/// `table` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_outcome_table_get(
    table: *const TbOutcomeTable,
    index: usize,
    out: *mut TbGameSummary,
) -> TbStatus {
    guard(|| {
        let t = &get(table, "table")?.0;
        let o = t
            .outcomes
            .get(index)
            .ok_or_else(|| fail(TbStatus::OutOfRange, format!("index {index} out of range for {} games", t.len())))?;
        let summary = TbGameSummary {
            order_id: o.order_id,
            replicate_id: o.replicate_id,
            seed: o.seed,
            p1_score: o.p1_score,
            p2_score: o.p2_score,
            diff: o.diff,
            turns: o.turns,
            bingos: o.bingos,
            blank_positions: o.blank_positions,
            audit_violations: o.audit_violations,
        };
        put(out, summary, "out")
    })
}

/// # Safety
/// `table` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_outcome_table_free(table: *mut TbOutcomeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Between/within variance decomposition of `metric` across tile orders.
///
/// # Safety
/// `table` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_decompose(
    table: *const TbOutcomeTable,
    metric: TbMetric,
    out: *mut TbDecomposition,
) -> TbStatus {
    guard(|| {
        let d = analysis::variance_decomposition(&get(table, "table")?.0, metric.into()).map_err(|e| coded!(e))?;
        let result = TbDecomposition {
            n_orders: d.n_orders,
            replicates: d.replicates,
            ss_total: d.ss_total,
            ss_between: d.ss_between,
            ss_within: d.ss_within,
            between_fraction_naive: d.between_fraction_naive.unwrap_or(f64::NAN),
            between_fraction_anova: d.between_fraction_anova.unwrap_or(f64::NAN),
        };
        put(out, result, "out")
    })
}

/// Mean first-player score difference with a 95% interval clustered by order.
///
/// # Safety
/// `table` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_first_player_advantage(table: *const TbOutcomeTable, out: *mut TbAdvantage) -> TbStatus {
    guard(|| {
        let a = analysis::first_player_advantage(&get(table, "table")?.0).map_err(|e| coded!(e))?;
        let result = TbAdvantage {
            games: a.games,
            clusters: a.clusters,
            mean_diff: a.mean_diff,
            std_error: a.std_error,
            ci_low: a.ci_low,
            ci_high: a.ci_high,
        };
        put(out, result, "out")
    })
}

/// Points of `metric` per extra copy of `letter` drawn by player 1; `'?'`
/// is the blank.
///
/// # Safety
/// `table` must come from this library; `slope` and `std_error` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_tile_effect(
    table: *const TbOutcomeTable,
    letter: c_char,
    metric: TbMetric,
    slope: *mut f64,
    std_error: *mut f64,
) -> TbStatus {
    guard(|| {
        let t = &get(table, "table")?.0;
        let ch = letter as u8 as char;
        let kind = parse_tile(ch).ok_or_else(|| fail(TbStatus::InvalidInput, format!("{ch:?} is not a tile")))?;
        let e = analysis::tile_regression(t, kind, metric.into()).map_err(|e| coded!(e))?;
        put(slope, e.slope, "slope")?;
        put(std_error, e.std_error, "std_error")
    })
}
