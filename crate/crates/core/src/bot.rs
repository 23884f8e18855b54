//! Static-evaluation bot: utility is the move score plus the value of the
//! tiles left on the rack, and a uniform perturbation breaks the
//! determinism of move choice.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::board::{Board, Direction, Placement};
use crate::engine::{Decision, GameRng, MoveChoice, Player, SelectionAudit, TurnContext};
use crate::movegen::for_each_move;
use crate::ruleset::{Premium, RuleSet, BOARD_SIZE};
use crate::tiles::{is_vowel, parse_tile, Rack, BLANK, TILE_KINDS};

pub const LEAVES_FORMAT: &str = "tilebench-leaves";
pub const LEAVES_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LeaveTableError {
    #[error("cannot read leave table: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed leave table: {0}")]
    Parse(String),
    #[error("unsupported leave table format {format:?} version {version}")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("unknown tile {0:?} in leave table")]
    UnknownTile(String),
}

impl LeaveTableError {
    pub fn code(&self) -> &'static str {
        match self {
            LeaveTableError::Io(_) => "io",
            LeaveTableError::Parse(_) => "parse",
            LeaveTableError::UnsupportedVersion { .. } => "unsupported_version",
            LeaveTableError::UnknownTile(_) => "unknown_tile",
        }
    }
}

#[derive(Deserialize)]
struct RawLeaves {
    format: String,
    version: u32,
    balance_weight: f64,
    vowel_target: f64,
    exchange_adjustment: f64,
    letters: BTreeMap<String, f64>,
    #[serde(default)]
    duplicates: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaveTable {
    pub letter_values: [f64; TILE_KINDS],
    /// Added once for every copy of a kind beyond the first.
    pub duplicate_penalties: [f64; TILE_KINDS],
    pub balance_weight: f64,
    pub vowel_target: f64,
    pub exchange_adjustment: f64,
}

impl Default for LeaveTable {
    fn default() -> Self {
        LeaveTable::parse(include_str!("../data/leaves.toml")).expect("bundled leave table")
    }
}

impl LeaveTable {
    pub fn parse(text: &str) -> Result<LeaveTable, LeaveTableError> {
        let raw: RawLeaves = toml::from_str(text).map_err(|e| LeaveTableError::Parse(e.to_string()))?;
        if raw.format != LEAVES_FORMAT || raw.version != LEAVES_VERSION {
            return Err(LeaveTableError::UnsupportedVersion { format: raw.format, version: raw.version });
        }
        let table = |m: &BTreeMap<String, f64>| -> Result<[f64; TILE_KINDS], LeaveTableError> {
            let mut out = [0.0; TILE_KINDS];
            for (k, &v) in m {
                let mut chars = k.chars();
                let kind = match (chars.next(), chars.next()) {
                    (Some(c), None) => parse_tile(c),
                    _ => None,
                };
                out[kind.ok_or_else(|| LeaveTableError::UnknownTile(k.clone()))? as usize] = v;
            }
            Ok(out)
        };
        Ok(LeaveTable {
            letter_values: table(&raw.letters)?,
            duplicate_penalties: table(&raw.duplicates)?,
            balance_weight: raw.balance_weight,
            vowel_target: raw.vowel_target,
            exchange_adjustment: raw.exchange_adjustment,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LeaveTable, LeaveTableError> {
        LeaveTable::parse(&std::fs::read_to_string(path)?)
    }

    /// Value of keeping `leave` on the rack. Zero for an empty leave.
    pub fn leave(&self, leave: &Rack) -> f64 {
        let mut value = 0.0;
        let mut vowels = 0usize;
        let mut letters = 0usize;
        for (kind, &n) in leave.counts().iter().enumerate() {
            if n == 0 {
                continue;
            }
            value += self.letter_values[kind] * n as f64;
            value += self.duplicate_penalties[kind] * (n - 1) as f64;
            if kind as u8 != BLANK {
                letters += n as usize;
                if is_vowel(kind as u8) {
                    vowels += n as usize;
                }
            }
        }
        let off = vowels as f64 - self.vowel_target * letters as f64;
        value - self.balance_weight * off * off
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotConfig {
    pub leave_table: LeaveTable,
    pub perturbation_half_width: f64,
    pub openness_weight: f64,
    /// An exchange is considered only when the best placement's utility is
    /// below this.
    pub exchange_threshold: f64,
}

impl Default for BotConfig {
    fn default() -> Self {
        BotConfig {
            leave_table: LeaveTable::default(),
            perturbation_half_width: 1.0,
            openness_weight: 0.0,
            exchange_threshold: 2.0,
        }
    }
}

/// Empty word-premium squares that `placement` turns into anchors.
pub fn openness(board: &Board, placement: &Placement, rules: &RuleSet) -> u32 {
    let n = BOARD_SIZE as isize;
    let occupied =
        |r: isize, c: isize| (0..n).contains(&r) && (0..n).contains(&c) && board.get(r as usize, c as usize).is_some();
    let placed = |r: isize, c: isize| placement.tiles.iter().any(|t| t.row as isize == r && t.col as isize == c);
    let mut seen = Vec::new();
    for t in &placement.tiles {
        let (r, c) = (t.row as isize, t.col as isize);
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let (rr, cc) = (r + dr, c + dc);
            if !(0..n).contains(&rr) || !(0..n).contains(&cc) || occupied(rr, cc) || placed(rr, cc) {
                continue;
            }
            let was_anchor = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(a, b)| occupied(rr + a, cc + b));
            let premium = rules.premium(rr as usize, cc as usize);
            if !was_anchor && matches!(premium, Premium::DoubleWord | Premium::TripleWord) && !seen.contains(&(rr, cc))
            {
                seen.push((rr, cc));
            }
        }
    }
    seen.len() as u32
}

/// Raw (unperturbed) utility of a move. Pure.
pub fn utility(choice: &MoveChoice, board: &Board, rack: &Rack, config: &BotConfig, rules: &RuleSet) -> f64 {
    let leaves = &config.leave_table;
    match choice {
        MoveChoice::Place(p) => placement_utility(p, board, rack, config, rules),
        MoveChoice::Exchange(discards) => {
            leaves.leave(&rack.minus(discards).expect("exchange uses rack tiles")) + leaves.exchange_adjustment
        }
        MoveChoice::Pass => leaves.leave(rack),
    }
}

/// The exchange that keeps the most valuable leave. Discards at least one
/// tile; ties go to the first subset in index order.
pub fn best_exchange(rack: &Rack, leaves: &LeaveTable) -> Option<Rack> {
    let tiles = rack.tiles();
    let n = tiles.len();
    if n == 0 {
        return None;
    }
    let mut best: Option<(f64, Rack)> = None;
    // `mask` selects the kept tiles; the full rack is excluded.
    for mask in 0u32..(1 << n) - 1 {
        let mut kept = Rack::new();
        let mut discards = Rack::new();
        for (i, &t) in tiles.iter().enumerate() {
            if mask & (1 << i) != 0 {
                kept.add(t);
            } else {
                discards.add(t);
            }
        }
        let v = leaves.leave(&kept);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, discards));
        }
    }
    best.map(|(_, d)| d)
}

/// Streaming argmax of perturbed utility. Each offered candidate gets its own
/// Uniform(-w, w) draw in offer order.
pub struct Selector {
    half_width: f64,
    best_perturbed: f64,
    best_raw: f64,
    max_raw: f64,
    candidates: usize,
}

impl Selector {
    pub fn new(half_width: f64) -> Self {
        assert!(half_width >= 0.0, "perturbation half width must be non-negative");
        Selector {
            half_width,
            best_perturbed: f64::NEG_INFINITY,
            best_raw: f64::NEG_INFINITY,
            max_raw: f64::NEG_INFINITY,
            candidates: 0,
        }
    }

    /// Offers a candidate; returns true when it becomes the current choice.
    /// `wins_tie` is consulted only on an exact tie of perturbed utilities.
    pub fn offer(&mut self, raw: f64, rng: &mut impl Rng, wins_tie: impl FnOnce() -> bool) -> bool {
        let noise = self.half_width * (2.0 * rng.gen::<f64>() - 1.0);
        let perturbed = raw + noise;
        self.candidates += 1;
        self.max_raw = self.max_raw.max(raw);
        let take = match perturbed.partial_cmp(&self.best_perturbed) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => self.candidates == 1 || wins_tie(),
            _ => self.candidates == 1,
        };
        if take {
            self.best_perturbed = perturbed;
            self.best_raw = raw;
        }
        take
    }

    pub fn audit(&self) -> SelectionAudit {
        SelectionAudit { max_utility: self.max_raw, chosen_utility: self.best_raw, candidates: self.candidates }
    }
}

/// Picks an index from plain utilities; the same rule as the bot uses, with
/// ties going to the earlier candidate.
pub fn select_index(utilities: &[f64], half_width: f64, rng: &mut impl Rng) -> Option<usize> {
    let mut sel = Selector::new(half_width);
    let mut chosen = None;
    for (i, &u) in utilities.iter().enumerate() {
        if sel.offer(u, rng, || false) {
            chosen = Some(i);
        }
    }
    chosen
}

/// Deterministic order among equal perturbed utilities: higher score, then
/// word, row, column and direction ascending.
fn tie_key(p: &Placement) -> (i32, &str, u8, u8, Direction) {
    (-p.score, p.word.as_str(), p.row, p.col, p.direction)
}

/// Chooses a move for the position in `ctx`.
pub fn select_move(ctx: &TurnContext<'_>, config: &BotConfig, rng: &mut GameRng) -> Decision {
    let mut sel = Selector::new(config.perturbation_half_width);
    let mut chosen: Option<Placement> = None;
    let mut best_place_raw = f64::NEG_INFINITY;
    for_each_move(ctx.board, ctx.rack, ctx.lexicon, ctx.rules, |p| {
        let raw = placement_utility(p, ctx.board, ctx.rack, config, ctx.rules);
        best_place_raw = best_place_raw.max(raw);
        let current = chosen.as_ref();
        if sel.offer(raw, rng, || current.is_some_and(|c| tie_key(p) < tie_key(c))) {
            chosen = Some(p.clone());
        }
    });
    let mut choice = chosen.map(MoveChoice::Place);
    if ctx.exchange_allowed && best_place_raw < config.exchange_threshold {
        if let Some(discards) = best_exchange(ctx.rack, &config.leave_table) {
            let ex = MoveChoice::Exchange(discards);
            let raw = utility(&ex, ctx.board, ctx.rack, config, ctx.rules);
            let placement_wins = matches!(&choice, Some(MoveChoice::Place(p)) if p.score > 0);
            if sel.offer(raw, rng, || !placement_wins) {
                choice = Some(ex);
            }
        }
    }
    match choice {
        Some(choice) => Decision { choice, audit: Some(sel.audit()) },
        None => {
            let raw = utility(&MoveChoice::Pass, ctx.board, ctx.rack, config, ctx.rules);
            sel.offer(raw, rng, || true);
            Decision { choice: MoveChoice::Pass, audit: Some(sel.audit()) }
        }
    }
}

fn placement_utility(p: &Placement, board: &Board, rack: &Rack, config: &BotConfig, rules: &RuleSet) -> f64 {
    let rest = rack.minus(&p.tiles_used()).expect("placement uses rack tiles");
    let mut u = p.score as f64 + config.leave_table.leave(&rest);
    if config.openness_weight != 0.0 {
        u += config.openness_weight * openness(board, p, rules) as f64;
    }
    u
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpeedyBot {
    pub config: BotConfig,
}

impl SpeedyBot {
    pub fn new(config: BotConfig) -> Self {
        SpeedyBot { config }
    }
}

impl Player for SpeedyBot {
    fn choose(&self, ctx: &TurnContext<'_>, rng: &mut GameRng) -> Decision {
        select_move(ctx, &self.config, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rack(s: &str) -> Rack {
        Rack::parse(s).unwrap()
    }

    #[test]
    fn empty_leave_is_zero() {
        assert_eq!(LeaveTable::default().leave(&Rack::new()), 0.0);
    }

    #[test]
    fn leave_ignores_order() {
        let t = LeaveTable::default();
        assert_eq!(t.leave(&rack("SEQ?")), t.leave(&rack("?QES")));
    }

    #[test]
    fn double_e_beats_double_u() {
        let t = LeaveTable::default();
        assert!(t.leave(&rack("EE")) > t.leave(&rack("UU")));
    }

    #[test]
    fn leave_signs() {
        let t = LeaveTable::default();
        for good in ["S", "?"] {
            assert!(t.leave(&rack(good)) > 0.0, "{good}");
        }
        for bad in ["Q", "U", "V", "W"] {
            assert!(t.leave(&rack(bad)) < 0.0, "{bad}");
        }
    }

    #[test]
    fn leave_table_refuses_other_versions() {
        let text = include_str!("../data/leaves.toml").replace("version = 1", "version = 2");
        assert_eq!(LeaveTable::parse(&text).unwrap_err().code(), "unsupported_version");
    }

    #[test]
    fn single_candidate_always_chosen() {
        let mut rng = GameRng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(select_index(&[-40.0], 1.0, &mut rng), Some(0));
        }
    }

    #[test]
    fn gap_above_two_never_flips() {
        let mut rng = GameRng::seed_from_u64(2);
        for _ in 0..10_000 {
            assert_eq!(select_index(&[10.0, 7.5], 1.0, &mut rng), Some(0));
        }
    }

    #[test]
    fn equal_utilities_split_evenly() {
        let mut rng = GameRng::seed_from_u64(3);
        let trials = 10_000;
        let first = (0..trials).filter(|_| select_index(&[10.0, 10.0], 1.0, &mut rng) == Some(0)).count();
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn zero_width_is_deterministic() {
        let mut rng = GameRng::seed_from_u64(4);
        for _ in 0..100 {
            assert_eq!(select_index(&[1.0, 3.0, 2.0], 0.0, &mut rng), Some(1));
        }
    }

    #[test]
    fn best_exchange_drops_the_worst_tiles() {
        let t = LeaveTable::default();
        let d = best_exchange(&rack("SQUVWEA"), &t).unwrap();
        for kind in ["Q", "V", "W"] {
            assert_eq!(d.count(parse_tile(kind.chars().next().unwrap()).unwrap()), 1, "{d}");
        }
        assert_eq!(d.count(parse_tile('S').unwrap()), 0);
    }

    #[test]
    fn utility_is_pure_and_counts_leave() {
        let rules = RuleSet::scrabble();
        let board = Board::new();
        let config = BotConfig::default();
        let r = rack("SEQ");
        let pass = utility(&MoveChoice::Pass, &board, &r, &config, &rules);
        assert_eq!(pass, utility(&MoveChoice::Pass, &board, &r, &config, &rules));
        assert_eq!(pass, config.leave_table.leave(&r));
        let ex = utility(&MoveChoice::Exchange(rack("Q")), &board, &r, &config, &rules);
        assert_eq!(ex, config.leave_table.leave(&rack("SE")) + config.leave_table.exchange_adjustment);
    }
}
