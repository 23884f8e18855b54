//! The two-sided tile reservoir.
//!
//! All tiles are laid out in a fixed order before the game. Player 1 draws
//! from the front of the order and player 2 from the back, so a replayed
//! order hands each seat the same tiles for as long as that seat draws the
//! same counts. Exchanged tiles are drawn for first, then the discards are
//! put back one at a time at a uniformly random gap between the two draw
//! positions.
//!
//! ```text
//!   drawn by P1        live tiles          drawn by P2
//!  [ . . . . . |  x  x  x  x  x  x  x  | . . . . ]
//!              ^front              back^
//! ```

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ruleset::RuleSet;
use crate::tiles::{parse_tile, tile_char};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Front,
    Back,
}

impl End {
    /// Player 1 (index 0) always draws from the front.
    pub fn for_player(player: usize) -> End {
        if player == 0 {
            End::Front
        } else {
            End::Back
        }
    }
}

/// One physical tile: its kind and its index in the initial order, which
/// identifies it for the rest of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeqTile {
    pub kind: u8,
    pub id: u16,
}

/// A fixed ordering of the full tile set; the experimental treatment.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TileSequence {
    pub order_id: u64,
    tiles: Vec<u8>,
}

impl TileSequence {
    pub fn new(order_id: u64, tiles: Vec<u8>) -> Self {
        TileSequence { order_id, tiles }
    }

    /// A uniformly random permutation of the ruleset's tile multiset.
    pub fn generate<R: Rng + ?Sized>(rules: &RuleSet, order_id: u64, rng: &mut R) -> Self {
        let mut tiles = rules.tile_multiset();
        tiles.shuffle(rng);
        TileSequence { order_id, tiles }
    }

    pub fn tiles(&self) -> &[u8] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// 1-based positions of every tile of `kind`, ascending.
    pub fn positions_of(&self, kind: u8) -> Vec<u16> {
        self.tiles.iter().enumerate().filter(|(_, &t)| t == kind).map(|(i, _)| i as u16 + 1).collect()
    }

    /// The sequence as a line of tile letters, blank = `?`.
    pub fn to_line(&self) -> String {
        self.tiles.iter().map(|&t| tile_char(t)).collect()
    }

    pub fn parse_line(order_id: u64, line: &str) -> Option<Self> {
        let tiles = line.trim().chars().map(parse_tile).collect::<Option<Vec<u8>>>()?;
        Some(TileSequence { order_id, tiles })
    }

    pub fn matches_ruleset(&self, rules: &RuleSet) -> bool {
        let mut counts = [0u8; crate::tiles::TILE_KINDS];
        for &t in &self.tiles {
            counts[t as usize] += 1;
        }
        counts == rules.tile_counts
    }
}

impl fmt::Debug for TileSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TileSequence#{}({})", self.order_id, self.to_line())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReservoirError {
    #[error("exchange not allowed: {remaining} tiles remain, {required} required, {discarded} discarded")]
    ExchangeNotAllowed { remaining: usize, required: usize, discarded: usize },
}

impl ReservoirError {
    pub fn code(&self) -> &'static str {
        "exchange_not_allowed"
    }
}

#[derive(Debug, Clone)]
enum Mode {
    TwoSided,
    /// Uniform draws without order structure, for validation runs.
    ClassicBag(Box<ChaCha8Rng>),
}

#[derive(Debug, Clone)]
pub struct Reservoir {
    live: Vec<SeqTile>,
    front: usize,
    /// One past the next back draw.
    back_end: usize,
    initial: Vec<SeqTile>,
    exchange_min_reserve: usize,
    mode: Mode,
}

impl Reservoir {
    pub fn two_sided(sequence: &TileSequence, exchange_min_reserve: usize) -> Self {
        let live: Vec<SeqTile> =
            sequence.tiles().iter().enumerate().map(|(i, &kind)| SeqTile { kind, id: i as u16 }).collect();
        Reservoir {
            back_end: live.len(),
            initial: live.clone(),
            live,
            front: 0,
            exchange_min_reserve,
            mode: Mode::TwoSided,
        }
    }

    /// Classic bag over the same tiles; draws are uniform and independent of
    /// the sequence order.
    pub fn classic_bag(sequence: &TileSequence, exchange_min_reserve: usize, seed: u64) -> Self {
        let mut r = Self::two_sided(sequence, exchange_min_reserve);
        r.mode = Mode::ClassicBag(Box::new(ChaCha8Rng::seed_from_u64(seed)));
        r
    }

    pub fn remaining(&self) -> usize {
        self.back_end - self.front
    }

    pub fn front_cursor(&self) -> usize {
        self.front
    }

    /// Index of the next back draw; `front_cursor - 1` when empty.
    pub fn back_cursor(&self) -> isize {
        self.back_end as isize - 1
    }

    pub fn exchange_allowed(&self) -> bool {
        self.remaining() >= self.exchange_min_reserve
    }

    /// Tiles still available, in order.
    pub fn live(&self) -> &[SeqTile] {
        &self.live[self.front..self.back_end]
    }

    pub fn initial(&self) -> &[SeqTile] {
        &self.initial
    }

    /// Draws `min(n, remaining())` tiles from `end`. Back draws come out in
    /// descending index order.
    pub fn draw(&mut self, end: End, n: usize) -> Vec<SeqTile> {
        let n = n.min(self.remaining());
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let tile = match &mut self.mode {
                Mode::TwoSided => match end {
                    End::Front => {
                        self.front += 1;
                        self.live[self.front - 1]
                    }
                    End::Back => {
                        self.back_end -= 1;
                        self.live[self.back_end]
                    }
                },
                Mode::ClassicBag(rng) => {
                    let i = rng.gen_range(self.front..self.back_end);
                    self.live.swap(i, self.front);
                    self.front += 1;
                    self.live[self.front - 1]
                }
            };
            out.push(tile);
        }
        out
    }

    /// Swaps `discarded` for the same number of tiles. Replacements are drawn
    /// from `end` first; each discard is then inserted at a gap chosen
    /// uniformly among the `remaining() + 1` gaps between the cursors.
    pub fn exchange<R: RngCore + ?Sized>(
        &mut self,
        end: End,
        discarded: &[SeqTile],
        rng: &mut R,
    ) -> Result<Vec<SeqTile>, ReservoirError> {
        if !self.exchange_allowed() || discarded.len() > self.remaining() || discarded.is_empty() {
            return Err(ReservoirError::ExchangeNotAllowed {
                remaining: self.remaining(),
                required: self.exchange_min_reserve,
                discarded: discarded.len(),
            });
        }
        let replacements = self.draw(end, discarded.len());
        // Drawn positions are dead; compact them away so gaps index the live run.
        let live_run: Vec<SeqTile> = self.live[self.front..self.back_end].to_vec();
        self.live.truncate(self.front);
        self.live.extend_from_slice(&live_run);
        self.back_end = self.live.len();
        for &tile in discarded {
            let gap = rng.gen_range(0..=self.remaining());
            self.live.insert(self.front + gap, tile);
            self.back_end += 1;
        }
        Ok(replacements)
    }
}
