//! Game configurations: premium layout, tile distribution and scalar rules.
//!
//! Rulesets are stored as TOML with the premium grid spelled out row by row
//! so a file can be checked against a picture of the board. See
//! `data/scrabble.toml` for the annotated format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tiles::{parse_tile, tile_char, BLANK, TILE_KINDS};

pub const BOARD_SIZE: usize = 15;
pub const CENTER: usize = 7;
pub const RULESET_FORMAT: &str = "tilebench-ruleset";
pub const RULESET_VERSION: u32 = 1;

const SCRABBLE_TOML: &str = include_str!("../data/scrabble.toml");
const WWF_TOML: &str = include_str!("../data/wwf.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Premium {
    #[default]
    None,
    DoubleLetter,
    TripleLetter,
    DoubleWord,
    TripleWord,
}

impl Premium {
    pub fn from_char(c: char) -> Option<Premium> {
        Some(match c {
            '.' => Premium::None,
            'd' => Premium::DoubleLetter,
            't' => Premium::TripleLetter,
            'D' => Premium::DoubleWord,
            'T' => Premium::TripleWord,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Premium::None => '.',
            Premium::DoubleLetter => 'd',
            Premium::TripleLetter => 't',
            Premium::DoubleWord => 'D',
            Premium::TripleWord => 'T',
        }
    }

    pub fn letter_multiplier(self) -> i32 {
        match self {
            Premium::DoubleLetter => 2,
            Premium::TripleLetter => 3,
            _ => 1,
        }
    }

    pub fn word_multiplier(self) -> i32 {
        match self {
            Premium::DoubleWord => 2,
            Premium::TripleWord => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub name: String,
    pub board: [[Premium; BOARD_SIZE]; BOARD_SIZE],
    pub tile_counts: [u8; TILE_KINDS],
    pub tile_values: [u8; TILE_KINDS],
    /// Declared total; checked against the sum of `tile_counts`.
    pub tile_total: usize,
    pub bingo_bonus: i32,
    pub rack_size: usize,
    pub exchange_min_reserve: usize,
    pub scoreless_turn_limit: u32,
    pub center_premium_applies: bool,
}

impl RuleSet {
    pub fn scrabble() -> RuleSet {
        parse_ruleset(SCRABBLE_TOML).expect("bundled scrabble config")
    }

    pub fn wwf() -> RuleSet {
        parse_ruleset(WWF_TOML).expect("bundled wwf config")
    }

    /// Looks up a bundled configuration by name (`scrabble` or `wwf`).
    pub fn bundled(name: &str) -> Option<RuleSet> {
        match name {
            "scrabble" => Some(Self::scrabble()),
            "wwf" => Some(Self::wwf()),
            _ => None,
        }
    }

    pub fn premium(&self, row: usize, col: usize) -> Premium {
        self.board[row][col]
    }

    pub fn value(&self, kind: u8) -> i32 {
        self.tile_values[kind as usize] as i32
    }

    pub fn total_tiles(&self) -> usize {
        self.tile_counts.iter().map(|&c| c as usize).sum()
    }

    /// The full tile multiset in kind order.
    pub fn tile_multiset(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_tiles());
        for (k, &c) in self.tile_counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(k as u8, c as usize));
        }
        out
    }

    pub fn to_toml(&self) -> String {
        let raw = RawRuleSet::from(self);
        toml::to_string(&raw).expect("ruleset serializes")
    }
}

/// Resolves `path` as a bundled name first, then as a file.
pub fn resolve_ruleset(path_or_name: &str) -> Result<RuleSet, RulesetError> {
    match RuleSet::bundled(path_or_name) {
        Some(rs) => Ok(rs),
        None => load_ruleset(path_or_name),
    }
}

/// Reads, parses and validates a ruleset file.
pub fn load_ruleset(path: impl AsRef<Path>) -> Result<RuleSet, RulesetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| RulesetError::Io { path: path.display().to_string(), source })?;
    let rs = parse_ruleset(&text)?;
    let report = validate_ruleset(&rs);
    if report.is_empty() {
        Ok(rs)
    } else {
        Err(RulesetError::Invalid(report))
    }
}

/// Structural parse only; call [`validate_ruleset`] for the semantic checks.
pub fn parse_ruleset(text: &str) -> Result<RuleSet, RulesetError> {
    let raw: RawRuleSet = toml::from_str(text).map_err(|e| RulesetError::Parse(e.to_string()))?;
    raw.try_into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    TileCountMismatch { declared: usize, actual: usize },
    BoardAsymmetry { row: usize, col: usize },
    RackSize(usize),
    BlankCount(u8),
    BlankValue(u8),
    CenterFlagMismatch { flag: bool, center: Premium },
    ZeroValueLetter(char),
}

impl Finding {
    pub fn code(&self) -> &'static str {
        match self {
            Finding::TileCountMismatch { .. } => "tile_count_mismatch",
            Finding::BoardAsymmetry { .. } => "board_asymmetry",
            Finding::RackSize(_) => "rack_size",
            Finding::BlankCount(_) => "blank_count",
            Finding::BlankValue(_) => "blank_value",
            Finding::CenterFlagMismatch { .. } => "center_flag_mismatch",
            Finding::ZeroValueLetter(_) => "zero_value_letter",
        }
    }

    pub fn field(&self) -> &'static str {
        match self {
            Finding::TileCountMismatch { .. } => "tile_counts",
            Finding::BoardAsymmetry { .. } => "board.rows",
            Finding::RackSize(_) => "rules.rack_size",
            Finding::BlankCount(_) => "tile_counts.?",
            Finding::BlankValue(_) => "tile_values.?",
            Finding::CenterFlagMismatch { .. } => "rules.center_premium_applies",
            Finding::ZeroValueLetter(_) => "tile_values",
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): ", self.code(), self.field())?;
        match self {
            Finding::TileCountMismatch { declared, actual } => {
                write!(f, "tile counts sum to {actual}, tile_total declares {declared}")
            }
            Finding::BoardAsymmetry { row, col } => write!(
                f,
                "premium at ({row},{col}) differs from its 180-degree image ({},{})",
                BOARD_SIZE - 1 - row,
                BOARD_SIZE - 1 - col
            ),
            Finding::RackSize(n) => write!(f, "rack size {n}, expected 7"),
            Finding::BlankCount(n) => write!(f, "{n} blanks, expected 2"),
            Finding::BlankValue(v) => write!(f, "blank worth {v}, expected 0"),
            Finding::CenterFlagMismatch { flag, center } => {
                write!(f, "center_premium_applies = {flag} but center square is '{}'", center.to_char())
            }
            Finding::ZeroValueLetter(c) => write!(f, "letter {c} has value 0"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code() == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

pub fn validate_ruleset(rs: &RuleSet) -> ValidationReport {
    let mut findings = Vec::new();

    let actual = rs.total_tiles();
    if actual != rs.tile_total {
        findings.push(Finding::TileCountMismatch { declared: rs.tile_total, actual });
    }
    for row in 0..BOARD_SIZE {
        for col in 0..BOARD_SIZE {
            if rs.board[row][col] != rs.board[BOARD_SIZE - 1 - row][BOARD_SIZE - 1 - col] {
                findings.push(Finding::BoardAsymmetry { row, col });
            }
        }
    }
    if rs.rack_size != 7 {
        findings.push(Finding::RackSize(rs.rack_size));
    }
    let blanks = rs.tile_counts[BLANK as usize];
    if blanks != 2 {
        findings.push(Finding::BlankCount(blanks));
    }
    let blank_value = rs.tile_values[BLANK as usize];
    if blank_value != 0 {
        findings.push(Finding::BlankValue(blank_value));
    }
    let center = rs.board[CENTER][CENTER];
    let center_has_premium = center != Premium::None;
    if center_has_premium != rs.center_premium_applies {
        findings.push(Finding::CenterFlagMismatch { flag: rs.center_premium_applies, center });
    }
    for letter in 0..BLANK {
        if rs.tile_values[letter as usize] == 0 {
            findings.push(Finding::ZeroValueLetter(tile_char(letter)));
        }
    }
    ValidationReport { findings }
}

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("cannot read ruleset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ruleset parse error: {0}")]
    Parse(String),
    #[error("unsupported ruleset format {format:?} version {version} (expected {RULESET_FORMAT:?} version {RULESET_VERSION})")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("invalid board shape: expected 15x15, got {rows} rows with widths {widths:?}")]
    InvalidBoardShape { rows: usize, widths: Vec<usize> },
    #[error("invalid premium character {ch:?} at row {row}, col {col}")]
    InvalidBoardChar { row: usize, col: usize, ch: char },
    #[error("unknown tile key {0:?} in {1}")]
    UnknownTile(String, &'static str),
    #[error("missing {1} entry for tile {0}")]
    MissingTile(char, &'static str),
    #[error("value out of range for {0}")]
    OutOfRange(&'static str),
    #[error("ruleset invariant violated:\n{0}")]
    Invalid(ValidationReport),
}

impl RulesetError {
    pub fn code(&self) -> &'static str {
        match self {
            RulesetError::Io { .. } => "io",
            RulesetError::Parse(_) => "parse",
            RulesetError::UnsupportedVersion { .. } => "unsupported_version",
            RulesetError::InvalidBoardShape { .. } => "invalid_board_shape",
            RulesetError::InvalidBoardChar { .. } => "invalid_board_char",
            RulesetError::UnknownTile(..) => "unknown_tile",
            RulesetError::MissingTile(..) => "missing_tile",
            RulesetError::OutOfRange(_) => "out_of_range",
            RulesetError::Invalid(report) => report.findings.first().map(Finding::code).unwrap_or("invalid"),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRuleSet {
    format: String,
    version: u32,
    name: String,
    rules: RawRules,
    board: RawBoard,
    tile_counts: BTreeMap<String, u32>,
    tile_values: BTreeMap<String, u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRules {
    tile_total: usize,
    bingo_bonus: i32,
    rack_size: usize,
    exchange_min_reserve: usize,
    scoreless_turn_limit: u32,
    center_premium_applies: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBoard {
    rows: Vec<String>,
}

fn tile_table(map: &BTreeMap<String, u32>, section: &'static str) -> Result<[u8; TILE_KINDS], RulesetError> {
    let mut seen = [false; TILE_KINDS];
    let mut out = [0u8; TILE_KINDS];
    for (key, &v) in map {
        let mut chars = key.chars();
        let kind = match (chars.next(), chars.next()) {
            (Some(c), None) if c == '?' || c.is_ascii_uppercase() => parse_tile(c),
            _ => None,
        }
        .ok_or_else(|| RulesetError::UnknownTile(key.clone(), section))?;
        out[kind as usize] = u8::try_from(v).map_err(|_| RulesetError::OutOfRange(section))?;
        seen[kind as usize] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(RulesetError::MissingTile(tile_char(k as u8), section));
    }
    Ok(out)
}

impl TryFrom<RawRuleSet> for RuleSet {
    type Error = RulesetError;

    fn try_from(raw: RawRuleSet) -> Result<Self, Self::Error> {
        if raw.format != RULESET_FORMAT || raw.version != RULESET_VERSION {
            return Err(RulesetError::UnsupportedVersion { format: raw.format, version: raw.version });
        }
        let rows = &raw.board.rows;
        let widths: Vec<usize> = rows.iter().map(|r| r.chars().count()).collect();
        if rows.len() != BOARD_SIZE || widths.iter().any(|&w| w != BOARD_SIZE) {
            return Err(RulesetError::InvalidBoardShape { rows: rows.len(), widths });
        }
        let mut board = [[Premium::None; BOARD_SIZE]; BOARD_SIZE];
        for (r, line) in rows.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                board[r][c] = Premium::from_char(ch).ok_or(RulesetError::InvalidBoardChar { row: r, col: c, ch })?;
            }
        }
        Ok(RuleSet {
            name: raw.name,
            board,
            tile_counts: tile_table(&raw.tile_counts, "tile_counts")?,
            tile_values: tile_table(&raw.tile_values, "tile_values")?,
            tile_total: raw.rules.tile_total,
            bingo_bonus: raw.rules.bingo_bonus,
            rack_size: raw.rules.rack_size,
            exchange_min_reserve: raw.rules.exchange_min_reserve,
            scoreless_turn_limit: raw.rules.scoreless_turn_limit,
            center_premium_applies: raw.rules.center_premium_applies,
        })
    }
}

impl From<&RuleSet> for RawRuleSet {
    fn from(rs: &RuleSet) -> Self {
        let table = |t: &[u8; TILE_KINDS]| {
            (0..TILE_KINDS as u8).map(|k| (tile_char(k).to_string(), t[k as usize] as u32)).collect()
        };
        RawRuleSet {
            format: RULESET_FORMAT.to_string(),
            version: RULESET_VERSION,
            name: rs.name.clone(),
            rules: RawRules {
                tile_total: rs.tile_total,
                bingo_bonus: rs.bingo_bonus,
                rack_size: rs.rack_size,
                exchange_min_reserve: rs.exchange_min_reserve,
                scoreless_turn_limit: rs.scoreless_turn_limit,
                center_premium_applies: rs.center_premium_applies,
            },
            board: RawBoard { rows: rs.board.iter().map(|row| row.iter().map(|p| p.to_char()).collect()).collect() },
            tile_counts: table(&rs.tile_counts),
            tile_values: table(&rs.tile_values),
        }
    }
}
