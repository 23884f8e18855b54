//! Game state, move application and the game loop.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{validate_placement, Board, Placement, PlacementError};
use crate::lexicon::Lexicon;
use crate::record::{GameRecord, MoveRecord};
use crate::reservoir::{End, Reservoir, ReservoirError, SeqTile, TileSequence};
use crate::ruleset::RuleSet;
use crate::tiles::{Rack, TILE_KINDS};

pub type GameRng = ChaCha8Rng;

const MAX_TURNS: u32 = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum MoveChoice {
    Place(Placement),
    Exchange(Rack),
    Pass,
}

impl MoveChoice {
    pub fn kind(&self) -> &'static str {
        match self {
            MoveChoice::Place(_) => "place",
            MoveChoice::Exchange(_) => "exchange",
            MoveChoice::Pass => "pass",
        }
    }
}

/// Raw utilities seen by a selection, for auditing the perturbation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionAudit {
    pub max_utility: f64,
    pub chosen_utility: f64,
    pub candidates: usize,
}

impl SelectionAudit {
    pub fn gap(&self) -> f64 {
        self.max_utility - self.chosen_utility
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub choice: MoveChoice,
    pub audit: Option<SelectionAudit>,
}

impl From<MoveChoice> for Decision {
    fn from(choice: MoveChoice) -> Self {
        Decision { choice, audit: None }
    }
}

/// What a player sees when asked to move.
pub struct TurnContext<'a> {
    pub board: &'a Board,
    pub rack: &'a Rack,
    pub player: usize,
    pub turn: u32,
    pub scores: [i32; 2],
    pub reservoir_remaining: usize,
    pub exchange_allowed: bool,
    pub lexicon: &'a Lexicon,
    pub rules: &'a RuleSet,
}

pub trait Player: Sync {
    fn choose(&self, ctx: &TurnContext<'_>, rng: &mut GameRng) -> Decision;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub board: Board,
    pub racks: [Rack; 2],
    /// Identities of the rack tiles, parallel to `racks`.
    held: [Vec<SeqTile>; 2],
    pub scores: [i32; 2],
    pub to_move: usize,
    pub consecutive_scoreless: u32,
    pub turn: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppliedMove {
    pub player: usize,
    pub score: i32,
    pub drawn: Vec<SeqTile>,
    /// Physical tiles that left the rack (played or exchanged).
    pub removed: Vec<SeqTile>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("illegal placement by player {player} on turn {turn}: {reason} ({placement})")]
    IllegalPlacement { player: usize, turn: u32, placement: String, reason: PlacementError },
    #[error("player {player} on turn {turn} does not hold {tiles}")]
    NotOnRack { player: usize, turn: u32, tiles: String },
    #[error("illegal exchange by player {player} on turn {turn}: {source}")]
    IllegalExchange {
        player: usize,
        turn: u32,
        #[source]
        source: ReservoirError,
    },
    #[error("game exceeded {MAX_TURNS} turns")]
    TooLong,
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::IllegalPlacement { .. } => "illegal_move",
            EngineError::NotOnRack { .. } => "illegal_move",
            EngineError::IllegalExchange { .. } => "exchange_not_allowed",
            EngineError::TooLong => "runaway_game",
        }
    }
}

/// Removes one physical tile per kind in `kinds`, most recently drawn first.
fn take_kinds(held: &mut Vec<SeqTile>, kinds: &Rack) -> Vec<SeqTile> {
    let mut out = Vec::with_capacity(kinds.len());
    for kind in kinds.tiles() {
        let i = held.iter().rposition(|t| t.kind == kind).expect("held tile");
        out.push(held.remove(i));
    }
    out
}

impl GameState {
    /// Deals the opening racks: player 1 from the front, then player 2 from
    /// the back.
    pub fn deal(reservoir: &mut Reservoir, rules: &RuleSet) -> (GameState, [Vec<SeqTile>; 2]) {
        let first = reservoir.draw(End::Front, rules.rack_size);
        let second = reservoir.draw(End::Back, rules.rack_size);
        let rack_of = |tiles: &[SeqTile]| Rack::from_tiles(&tiles.iter().map(|t| t.kind).collect::<Vec<_>>());
        let state = GameState {
            board: Board::new(),
            racks: [rack_of(&first), rack_of(&second)],
            held: [first.clone(), second.clone()],
            scores: [0, 0],
            to_move: 0,
            consecutive_scoreless: 0,
            turn: 0,
        };
        (state, [first, second])
    }

    /// Physical tiles on `player`'s rack.
    pub fn held(&self, player: usize) -> &[SeqTile] {
        &self.held[player]
    }

    /// Board, racks and live reservoir tiles together still form the full
    /// tile set, with every physical tile in exactly one place.
    pub fn conserves_tiles(&self, reservoir: &Reservoir, rules: &RuleSet) -> bool {
        let mut counts = [0u32; TILE_KINDS];
        for (_, _, t) in self.board.tiles() {
            counts[t.kind() as usize] += 1;
        }
        let mut seen = vec![false; reservoir.initial().len()];
        for t in self.held[0].iter().chain(&self.held[1]).chain(reservoir.live()) {
            if std::mem::replace(&mut seen[t.id as usize], true) {
                return false;
            }
            counts[t.kind as usize] += 1;
        }
        let racks_match =
            (0..2).all(|p| Rack::from_tiles(&self.held[p].iter().map(|t| t.kind).collect::<Vec<_>>()) == self.racks[p]);
        racks_match && counts.iter().zip(&rules.tile_counts).all(|(&c, &e)| c == e as u32)
    }

    fn give(&mut self, player: usize, tiles: &[SeqTile]) {
        for t in tiles {
            self.racks[player].add(t.kind);
            self.held[player].push(*t);
        }
    }

    /// Applies `choice` for the player to move, refilling their rack from
    /// their end of the reservoir.
    pub fn apply_move(
        &mut self,
        choice: &MoveChoice,
        reservoir: &mut Reservoir,
        rng: &mut GameRng,
        lexicon: &Lexicon,
        rules: &RuleSet,
    ) -> Result<AppliedMove, EngineError> {
        let player = self.to_move;
        let end = End::for_player(player);
        let (score, drawn, removed) =
            match choice {
                MoveChoice::Place(p) => {
                    let used = p.tiles_used();
                    let Some(rest) = self.racks[player].minus(&used) else {
                        return Err(EngineError::NotOnRack { player, turn: self.turn, tiles: used.to_string() });
                    };
                    let score = validate_placement(&self.board, p, lexicon, rules).map_err(|reason| {
                        EngineError::IllegalPlacement { player, turn: self.turn, placement: p.to_string(), reason }
                    })?;
                    if score != p.score {
                        return Err(EngineError::IllegalPlacement {
                            player,
                            turn: self.turn,
                            placement: p.to_string(),
                            reason: PlacementError::Mismatch(format!("claimed {} scores {}", p.score, score)),
                        });
                    }
                    self.board.apply(p);
                    let removed = take_kinds(&mut self.held[player], &used);
                    self.racks[player] = rest;
                    self.scores[player] += score;
                    let drawn = reservoir.draw(end, rules.rack_size - rest.len());
                    self.give(player, &drawn);
                    (score, drawn, removed)
                }
                MoveChoice::Exchange(tiles) => {
                    let Some(rest) = self.racks[player].minus(tiles) else {
                        return Err(EngineError::NotOnRack { player, turn: self.turn, tiles: tiles.to_string() });
                    };
                    let mut held = self.held[player].clone();
                    let discards = take_kinds(&mut held, tiles);
                    let drawn = reservoir
                        .exchange(end, &discards, rng)
                        .map_err(|source| EngineError::IllegalExchange { player, turn: self.turn, source })?;
                    self.held[player] = held;
                    self.racks[player] = rest;
                    self.give(player, &drawn);
                    (0, drawn, discards)
                }
                MoveChoice::Pass => (0, Vec::new(), Vec::new()),
            };
        if score > 0 {
            self.consecutive_scoreless = 0;
        } else {
            self.consecutive_scoreless += 1;
        }
        self.to_move = 1 - player;
        self.turn += 1;
        Ok(AppliedMove { player, score, drawn, removed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    /// `player` emptied their rack with the reservoir empty.
    PlayedOut {
        player: usize,
    },
    ScorelessTurns,
}

impl EndReason {
    pub fn label(&self) -> &'static str {
        match self {
            EndReason::PlayedOut { .. } => "played_out",
            EndReason::ScorelessTurns => "scoreless",
        }
    }
}

/// Final score adjustments. Playing out earns the opponent's rack value and
/// the opponent loses it; a scoreless-turn ending costs each player their
/// own rack value.
pub fn end_adjustments(reason: EndReason, racks: &[Rack; 2], rules: &RuleSet) -> [i32; 2] {
    let values = [racks[0].value(&rules.tile_values), racks[1].value(&rules.tile_values)];
    match reason {
        EndReason::PlayedOut { player } => {
            let other = 1 - player;
            let mut adj = [0; 2];
            adj[player] = values[other];
            adj[other] = -values[other];
            adj
        }
        EndReason::ScorelessTurns => [-values[0], -values[1]],
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GameOptions {
    pub order_id: u64,
    pub replicate_id: u64,
    pub seed: u64,
    /// Record the perturbation audit for each selection.
    pub audit: bool,
}

/// Plays one game to completion. The result depends only on the sequence,
/// the players and the RNG state.
pub fn play_game(
    rules: &RuleSet,
    lexicon: &Lexicon,
    sequence: &TileSequence,
    players: [&dyn Player; 2],
    rng: &mut GameRng,
    options: GameOptions,
) -> Result<GameRecord, EngineError> {
    let mut reservoir = Reservoir::two_sided(sequence, rules.exchange_min_reserve);
    play_game_with(rules, lexicon, sequence, &mut reservoir, players, rng, options)
}

/// As [`play_game`], with a caller-provided reservoir (for example a classic bag).
pub fn play_game_with(
    rules: &RuleSet,
    lexicon: &Lexicon,
    sequence: &TileSequence,
    reservoir: &mut Reservoir,
    players: [&dyn Player; 2],
    rng: &mut GameRng,
    options: GameOptions,
) -> Result<GameRecord, EngineError> {
    let (mut state, opening) = GameState::deal(reservoir, rules);
    let mut drawn: [Vec<SeqTile>; 2] = opening;
    let mut played = [[0u32; TILE_KINDS]; 2];
    let mut bingos = [0u32; 2];
    let mut moves = Vec::new();
    let mut audit_violations = 0u32;
    let mut audit_max_gap = 0f64;

    let reason = loop {
        if state.turn >= MAX_TURNS {
            return Err(EngineError::TooLong);
        }
        let player = state.to_move;
        let rack_before = state.racks[player];
        let ctx = TurnContext {
            board: &state.board,
            rack: &state.racks[player],
            player,
            turn: state.turn,
            scores: state.scores,
            reservoir_remaining: reservoir.remaining(),
            exchange_allowed: reservoir.exchange_allowed(),
            lexicon,
            rules,
        };
        let decision = players[player].choose(&ctx, rng);
        if options.audit {
            if let Some(a) = decision.audit {
                audit_max_gap = audit_max_gap.max(a.gap());
                if a.gap() >= 2.0 {
                    audit_violations += 1;
                }
            }
        }
        let applied = state.apply_move(&decision.choice, reservoir, rng, lexicon, rules)?;
        if let MoveChoice::Place(p) = &decision.choice {
            for t in &p.tiles {
                played[player][t.tile.kind() as usize] += 1;
            }
            if p.tiles.len() == rules.rack_size {
                bingos[player] += 1;
            }
        }
        drawn[player].extend_from_slice(&applied.drawn);
        moves.push(MoveRecord::new(&decision.choice, player, &rack_before, &applied, state.scores[player]));

        if matches!(decision.choice, MoveChoice::Place(_))
            && state.racks[player].is_empty()
            && reservoir.remaining() == 0
        {
            break EndReason::PlayedOut { player };
        }
        if state.consecutive_scoreless >= rules.scoreless_turn_limit {
            break EndReason::ScorelessTurns;
        }
    };

    let adjustments = end_adjustments(reason, &state.racks, rules);
    let final_scores = [state.scores[0] + adjustments[0], state.scores[1] + adjustments[1]];
    Ok(GameRecord::assemble(
        rules,
        sequence,
        options,
        moves,
        reason,
        [state.racks[0], state.racks[1]],
        adjustments,
        final_scores,
        drawn,
        played,
        bingos,
        options.audit.then_some((audit_violations, audit_max_gap)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    struct AlwaysPass;

    impl Player for AlwaysPass {
        fn choose(&self, _: &TurnContext<'_>, _: &mut GameRng) -> Decision {
            MoveChoice::Pass.into()
        }
    }

    fn small_lexicon() -> Lexicon {
        Lexicon::build(["AB", "BA"]).unwrap().0
    }

    fn sequence(rules: &RuleSet, seed: u64) -> TileSequence {
        TileSequence::generate(rules, 0, &mut GameRng::seed_from_u64(seed))
    }

    #[test]
    fn always_pass_ends_on_the_scoreless_limit() {
        let rules = RuleSet::scrabble();
        let lex = small_lexicon();
        let seq = sequence(&rules, 1);
        let mut rng = GameRng::seed_from_u64(0);
        let rec = play_game(&rules, &lex, &seq, [&AlwaysPass, &AlwaysPass], &mut rng, GameOptions::default()).unwrap();
        assert_eq!(rec.moves.len(), 6);
        assert_eq!(rec.end, EndReason::ScorelessTurns);
        let racks_value = |i: usize| -Rack::parse(&rec.final_racks[i]).unwrap().value(&rules.tile_values);
        assert_eq!(rec.final_scores, [racks_value(0), racks_value(1)]);
        assert_eq!(rec.end_adjustments, rec.final_scores);
    }

    #[test]
    fn pass_flips_turn_and_counts_scoreless() {
        let rules = RuleSet::scrabble();
        let lex = small_lexicon();
        let seq = sequence(&rules, 2);
        let mut res = Reservoir::two_sided(&seq, 7);
        let (mut state, _) = GameState::deal(&mut res, &rules);
        let board = state.board.clone();
        let mut rng = GameRng::seed_from_u64(0);
        state.apply_move(&MoveChoice::Pass, &mut res, &mut rng, &lex, &rules).unwrap();
        assert_eq!(state.board, board);
        assert_eq!(state.to_move, 1);
        assert_eq!(state.consecutive_scoreless, 1);
    }

    #[test]
    fn exchange_keeps_rack_and_reservoir_sizes() {
        let rules = RuleSet::scrabble();
        let lex = small_lexicon();
        let seq = sequence(&rules, 3);
        let mut res = Reservoir::two_sided(&seq, 7);
        let (mut state, _) = GameState::deal(&mut res, &rules);
        let remaining = res.remaining();
        let tiles = state.racks[0].tiles();
        let discard = Rack::from_tiles(&tiles[..2]);
        let mut rng = GameRng::seed_from_u64(4);
        state.apply_move(&MoveChoice::Exchange(discard), &mut res, &mut rng, &lex, &rules).unwrap();
        assert_eq!(state.racks[0].len(), 7);
        assert_eq!(res.remaining(), remaining);
        assert_eq!(state.consecutive_scoreless, 1);
    }

    #[test]
    fn exchange_refused_when_reservoir_is_low() {
        let rules = RuleSet::scrabble();
        let lex = small_lexicon();
        let seq = sequence(&rules, 3);
        let mut res = Reservoir::two_sided(&seq, 7);
        let (mut state, _) = GameState::deal(&mut res, &rules);
        res.draw(End::Front, res.remaining() - 6);
        let discard = Rack::from_tiles(&state.racks[0].tiles()[..1]);
        let mut rng = GameRng::seed_from_u64(4);
        let err = state.apply_move(&MoveChoice::Exchange(discard), &mut res, &mut rng, &lex, &rules).unwrap_err();
        assert_eq!(err.code(), "exchange_not_allowed");
    }

    #[test]
    fn end_adjustment_rules() {
        let rules = RuleSet::scrabble();
        let racks = [Rack::new(), Rack::parse("QZ").unwrap()];
        assert_eq!(end_adjustments(EndReason::PlayedOut { player: 0 }, &racks, &rules), [20, -20]);
        let racks = [Rack::parse("A").unwrap(), Rack::parse("QZ").unwrap()];
        assert_eq!(end_adjustments(EndReason::ScorelessTurns, &racks, &rules), [-1, -20]);
    }
}
