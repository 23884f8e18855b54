//! Game records: a line-delimited JSON log of one game, and replay.
//!
//! Line 1 is a header with the format tag and version, followed by one line
//! per move and a final result line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{make_placement, Board, Direction, PlacedTile};
use crate::engine::{end_adjustments, AppliedMove, EndReason, GameOptions, MoveChoice};
use crate::reservoir::{End, SeqTile, TileSequence};
use crate::ruleset::RuleSet;
use crate::tiles::{BoardTile, Rack, TILE_KINDS};

pub const RECORD_FORMAT: &str = "tilebench-game";
pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub player: usize,
    pub kind: String,
    /// Rack before the move.
    pub rack: String,
    /// Placed tiles as (row, col, letter); lower case marks a blank.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tiles: Vec<(u8, u8, char)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchanged: Option<String>,
    pub score: i32,
    pub drawn: String,
    pub total: i32,
}

impl MoveRecord {
    pub fn new(choice: &MoveChoice, player: usize, rack_before: &Rack, applied: &AppliedMove, total: i32) -> Self {
        let mut rec = MoveRecord {
            player,
            kind: choice.kind().to_string(),
            rack: rack_before.to_string(),
            tiles: Vec::new(),
            direction: None,
            word: None,
            exchanged: None,
            score: applied.score,
            drawn: applied.drawn.iter().map(|t| crate::tiles::tile_char(t.kind)).collect(),
            total,
        };
        match choice {
            MoveChoice::Place(p) => {
                rec.tiles = p.tiles.iter().map(|t| (t.row, t.col, t.tile.display_char())).collect();
                rec.direction = Some(p.direction);
                rec.word = Some(p.word.to_string());
            }
            MoveChoice::Exchange(r) => rec.exchanged = Some(r.to_string()),
            MoveChoice::Pass => {}
        }
        rec
    }

    fn placed_tiles(&self) -> Vec<PlacedTile> {
        self.tiles
            .iter()
            .map(|&(row, col, ch)| {
                let letter = ch.to_ascii_uppercase() as u8 - b'A';
                let tile =
                    if ch.is_ascii_lowercase() { BoardTile::blank_as(letter) } else { BoardTile::natural(letter) };
                PlacedTile { row, col, tile }
            })
            .collect()
    }

    fn used(&self) -> Option<Rack> {
        match self.kind.as_str() {
            "place" => Some(Rack::from_tiles(&self.placed_tiles().iter().map(|t| t.tile.kind()).collect::<Vec<_>>())),
            "exchange" => Rack::parse(self.exchanged.as_deref().unwrap_or("")),
            _ => Some(Rack::new()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub violations: u32,
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub ruleset: String,
    pub order_id: u64,
    pub replicate_id: u64,
    pub seed: u64,
    pub sequence: String,
    pub end_assignment: [End; 2],
    pub moves: Vec<MoveRecord>,
    pub end: EndReason,
    pub final_racks: [String; 2],
    pub end_adjustments: [i32; 2],
    pub final_scores: [i32; 2],
    /// Tile kinds each player drew, in draw order (opening rack first).
    pub drawn: [String; 2],
    /// Distinct physical tiles of each kind drawn by player 1.
    pub p1_exposure: [u32; TILE_KINDS],
    /// Tiles of each kind player 1 put on the board.
    pub p1_played: [u32; TILE_KINDS],
    /// Distinct physical tiles each player drew.
    pub tiles_available: [u32; 2],
    pub bingos: [u32; 2],
    pub audit: Option<AuditSummary>,
}

impl GameRecord {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        rules: &RuleSet,
        sequence: &TileSequence,
        options: GameOptions,
        moves: Vec<MoveRecord>,
        end: EndReason,
        final_racks: [Rack; 2],
        end_adjustments: [i32; 2],
        final_scores: [i32; 2],
        drawn: [Vec<SeqTile>; 2],
        played: [[u32; TILE_KINDS]; 2],
        bingos: [u32; 2],
        audit: Option<(u32, f64)>,
    ) -> GameRecord {
        let distinct = |tiles: &[SeqTile]| {
            let mut seen = vec![false; sequence.len()];
            let mut per_kind = [0u32; TILE_KINDS];
            let mut total = 0;
            for t in tiles {
                if !seen[t.id as usize] {
                    seen[t.id as usize] = true;
                    per_kind[t.kind as usize] += 1;
                    total += 1;
                }
            }
            (per_kind, total)
        };
        let (p1_exposure, p1_total) = distinct(&drawn[0]);
        let (_, p2_total) = distinct(&drawn[1]);
        let kinds = |tiles: &[SeqTile]| tiles.iter().map(|t| crate::tiles::tile_char(t.kind)).collect::<String>();
        GameRecord {
            ruleset: rules.name.clone(),
            order_id: options.order_id,
            replicate_id: options.replicate_id,
            seed: options.seed,
            sequence: sequence.to_line(),
            end_assignment: [End::Front, End::Back],
            moves,
            end,
            final_racks: [final_racks[0].to_string(), final_racks[1].to_string()],
            end_adjustments,
            final_scores,
            drawn: [kinds(&drawn[0]), kinds(&drawn[1])],
            p1_exposure,
            p1_played: played[0],
            tiles_available: [p1_total, p2_total],
            bingos,
            audit: audit.map(|(violations, max_gap)| AuditSummary { violations, max_gap }),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = Line::Header(Header {
            format: RECORD_FORMAT.to_string(),
            version: RECORD_VERSION,
            ruleset: self.ruleset.clone(),
            order_id: self.order_id,
            replicate_id: self.replicate_id,
            seed: self.seed,
            sequence: self.sequence.clone(),
            end_assignment: self.end_assignment,
        });
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for m in &self.moves {
            writeln!(w, "{}", serde_json::to_string(&Line::Move(m.clone()))?)?;
        }
        let result = Line::Result(ResultLine {
            end: self.end,
            final_racks: self.final_racks.clone(),
            end_adjustments: self.end_adjustments,
            final_scores: self.final_scores,
            drawn: self.drawn.clone(),
            p1_exposure: self.p1_exposure.to_vec(),
            p1_played: self.p1_played.to_vec(),
            tiles_available: self.tiles_available,
            bingos: self.bingos,
            audit: self.audit,
        });
        writeln!(w, "{}", serde_json::to_string(&result)?)?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<GameRecord, RecordError> {
        let mut header = None;
        let mut moves = Vec::new();
        let mut result = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(&line).map_err(|e| RecordError::Parse { line: i + 1, msg: e.to_string() })?;
            match parsed {
                Line::Header(h) => {
                    if h.format != RECORD_FORMAT || h.version != RECORD_VERSION {
                        return Err(RecordError::UnsupportedVersion { format: h.format, version: h.version });
                    }
                    header = Some(h);
                }
                Line::Move(m) if header.is_some() => moves.push(m),
                Line::Result(r) if header.is_some() => result = Some(r),
                _ => return Err(RecordError::Parse { line: i + 1, msg: "line before header".into() }),
            }
        }
        let h = header.ok_or(RecordError::Incomplete("missing header"))?;
        let r = result.ok_or(RecordError::Incomplete("missing result line"))?;
        let array27 = |v: Vec<u32>| -> Result<[u32; TILE_KINDS], RecordError> {
            v.try_into().map_err(|_| RecordError::Incomplete("per-kind count list must have 27 entries"))
        };
        Ok(GameRecord {
            ruleset: h.ruleset,
            order_id: h.order_id,
            replicate_id: h.replicate_id,
            seed: h.seed,
            sequence: h.sequence,
            end_assignment: h.end_assignment,
            moves,
            end: r.end,
            final_racks: r.final_racks,
            end_adjustments: r.end_adjustments,
            final_scores: r.final_scores,
            drawn: r.drawn,
            p1_exposure: array27(r.p1_exposure)?,
            p1_played: array27(r.p1_played)?,
            tiles_available: r.tiles_available,
            bingos: r.bingos,
            audit: r.audit,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header(Header),
    Move(MoveRecord),
    Result(ResultLine),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    ruleset: String,
    order_id: u64,
    replicate_id: u64,
    seed: u64,
    sequence: String,
    end_assignment: [End; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultLine {
    end: EndReason,
    final_racks: [String; 2],
    end_adjustments: [i32; 2],
    final_scores: [i32; 2],
    drawn: [String; 2],
    p1_exposure: Vec<u32>,
    p1_played: Vec<u32>,
    tiles_available: [u32; 2],
    bingos: [u32; 2],
    audit: Option<AuditSummary>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("record line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported record format {format:?} version {version}")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("incomplete record: {0}")]
    Incomplete(&'static str),
    #[error("replay diverged at move {index}: {msg}")]
    Diverged { index: usize, msg: String },
}

impl RecordError {
    pub fn code(&self) -> &'static str {
        match self {
            RecordError::Io(_) => "io",
            RecordError::Parse { .. } => "parse",
            RecordError::UnsupportedVersion { .. } => "unsupported_version",
            RecordError::Incomplete(_) => "incomplete_record",
            RecordError::Diverged { .. } => "replay_mismatch",
        }
    }
}

pub struct ReplayStep {
    pub record: MoveRecord,
    pub board: Board,
    pub scores: [i32; 2],
}

pub struct Replay {
    pub steps: Vec<ReplayStep>,
    pub final_scores: [i32; 2],
}

/// Re-applies every move of `record` from the initial sequence, rescoring
/// each placement from the board and recomputing the end adjustments.
pub fn replay(record: &GameRecord, rules: &RuleSet) -> Result<Replay, RecordError> {
    let diverged = |index: usize, msg: String| RecordError::Diverged { index, msg };
    let seq = TileSequence::parse_line(record.order_id, &record.sequence)
        .ok_or_else(|| diverged(0, "unreadable tile sequence".into()))?;
    let tiles = seq.tiles();
    let n = rules.rack_size.min(tiles.len());
    let mut racks =
        [Rack::from_tiles(&tiles[..n]), Rack::from_tiles(&tiles.iter().rev().take(n).copied().collect::<Vec<_>>())];
    let mut board = Board::new();
    let mut scores = [0i32; 2];
    let mut steps = Vec::with_capacity(record.moves.len());
    for (i, m) in record.moves.iter().enumerate() {
        let p = m.player;
        if m.rack != racks[p].to_string() {
            return Err(diverged(i, format!("rack {} but replay holds {}", m.rack, racks[p])));
        }
        let used = m.used().ok_or_else(|| diverged(i, "unreadable tiles".into()))?;
        let rest = racks[p].minus(&used).ok_or_else(|| diverged(i, format!("{used} not on rack {}", racks[p])))?;
        if m.kind == "place" {
            let dir = m.direction.ok_or_else(|| diverged(i, "placement without direction".into()))?;
            let placement = make_placement(&board, dir, &m.placed_tiles(), rules)
                .ok_or_else(|| diverged(i, "bad placement".into()))?;
            if placement.score != m.score {
                return Err(diverged(i, format!("recorded score {} rescored {}", m.score, placement.score)));
            }
            board.apply(&placement);
        } else if m.score != 0 {
            return Err(diverged(i, "non-placement with a score".into()));
        }
        let drawn = Rack::parse(&m.drawn).ok_or_else(|| diverged(i, "unreadable draw".into()))?;
        racks[p] = rest;
        for t in drawn.tiles() {
            racks[p].add(t);
        }
        scores[p] += m.score;
        if scores[p] != m.total {
            return Err(diverged(i, format!("running total {} vs recorded {}", scores[p], m.total)));
        }
        steps.push(ReplayStep { record: m.clone(), board: board.clone(), scores });
    }
    for (p, rack) in racks.iter().enumerate() {
        if rack.to_string() != record.final_racks[p] {
            return Err(diverged(
                record.moves.len(),
                format!("final rack {} vs recorded {}", rack, record.final_racks[p]),
            ));
        }
    }
    let adj = end_adjustments(record.end, &racks, rules);
    Ok(Replay { steps, final_scores: [scores[0] + adj[0], scores[1] + adj[1]] })
}
