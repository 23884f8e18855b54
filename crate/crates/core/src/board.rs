//! Board state, placements and scoring.

use std::fmt;

use arrayvec::{ArrayString, ArrayVec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::ruleset::{RuleSet, BOARD_SIZE, CENTER};
use crate::tiles::{BoardTile, Rack};

pub const SQUARES: usize = BOARD_SIZE * BOARD_SIZE;
pub const MAX_RACK: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Across,
    Down,
}

impl Direction {
    pub fn other(self) -> Direction {
        match self {
            Direction::Across => Direction::Down,
            Direction::Down => Direction::Across,
        }
    }

    /// Square index of position `pos` along `line` in this direction.
    #[inline]
    pub fn square(self, line: usize, pos: usize) -> usize {
        match self {
            Direction::Across => line * BOARD_SIZE + pos,
            Direction::Down => pos * BOARD_SIZE + line,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    cells: [Option<BoardTile>; SQUARES],
    tiles_on_board: u16,
}

impl Default for Board {
    fn default() -> Self {
        Board { cells: [None; SQUARES], tiles_on_board: 0 }
    }
}

impl Board {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<BoardTile> {
        self.cells[row * BOARD_SIZE + col]
    }

    #[inline]
    pub fn at(&self, square: usize) -> Option<BoardTile> {
        self.cells[square]
    }

    pub fn set(&mut self, row: usize, col: usize, tile: BoardTile) {
        let sq = &mut self.cells[row * BOARD_SIZE + col];
        if sq.is_none() {
            self.tiles_on_board += 1;
        }
        *sq = Some(tile);
    }

    pub fn is_empty(&self) -> bool {
        self.tiles_on_board == 0
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_on_board as usize
    }

    pub fn tiles(&self) -> impl Iterator<Item = (usize, usize, BoardTile)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, c)| c.map(|t| (i / BOARD_SIZE, i % BOARD_SIZE, t)))
    }

    /// Places a word's letters starting at (row, col); for test setup.
    /// Lower-case letters are placed as blanks.
    pub fn place_word(&mut self, row: usize, col: usize, dir: Direction, word: &str) {
        for (i, ch) in word.chars().enumerate() {
            let letter = ch.to_ascii_uppercase() as u8 - b'A';
            let tile = if ch.is_ascii_lowercase() { BoardTile::blank_as(letter) } else { BoardTile::natural(letter) };
            let (r, c) = match dir {
                Direction::Across => (row, col + i),
                Direction::Down => (row + i, col),
            };
            self.set(r, c, tile);
        }
    }

    pub fn apply(&mut self, placement: &Placement) {
        for t in &placement.tiles {
            self.set(t.row as usize, t.col as usize, t.tile);
        }
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..BOARD_SIZE {
            for c in 0..BOARD_SIZE {
                let ch = self.get(r, c).map(BoardTile::display_char).unwrap_or('.');
                write!(f, "{ch}")?;
                if c + 1 < BOARD_SIZE {
                    write!(f, " ")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\n{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlacedTile {
    pub row: u8,
    pub col: u8,
    pub tile: BoardTile,
}

/// A word placed on the board. `row`/`col` locate the first letter of the
/// main word (which may be an existing tile); `tiles` are the newly placed
/// tiles in board order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    pub row: u8,
    pub col: u8,
    pub direction: Direction,
    pub tiles: ArrayVec<PlacedTile, MAX_RACK>,
    pub word: ArrayString<BOARD_SIZE>,
    pub score: i32,
}

impl Placement {
    pub fn tiles_used(&self) -> Rack {
        let mut rack = Rack::new();
        for t in &self.tiles {
            rack.add(t.tile.kind());
        }
        rack
    }

    /// Canonical key that ignores the direction label of one-tile plays.
    pub fn key(&self) -> Vec<PlacedTile> {
        let mut k: Vec<PlacedTile> = self.tiles.to_vec();
        k.sort();
        k
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut word = String::new();
        let (mut r, mut c) = (self.row as usize, self.col as usize);
        for ch in self.word.chars() {
            match self.tiles.iter().find(|t| t.row as usize == r && t.col as usize == c) {
                Some(t) => word.push(t.tile.display_char()),
                None => {
                    word.push('(');
                    word.push(ch);
                    word.push(')');
                }
            }
            match self.direction {
                Direction::Across => c += 1,
                Direction::Down => r += 1,
            }
        }
        let coord = match self.direction {
            Direction::Across => format!("{}{}", self.row + 1, (b'A' + self.col) as char),
            Direction::Down => format!("{}{}", (b'A' + self.col) as char, self.row + 1),
        };
        write!(f, "{coord} {} {}", word.replace(")(", ""), self.score)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("placement has no tiles")]
    NoTiles,
    #[error("tile off the board or on an occupied square at ({0},{1})")]
    BadSquare(u8, u8),
    #[error("tiles are not in one line")]
    NotInLine,
    #[error("gap in the main word")]
    Gap,
    #[error("first move must cover the center square")]
    MissesCenter,
    #[error("placement does not touch existing tiles")]
    Disconnected,
    #[error("main word is a single letter")]
    SingleLetter,
    #[error("{0} is not in the lexicon")]
    NotAWord(String),
    #[error("rack does not hold the tiles {0}")]
    NotOnRack(String),
    #[error("recorded word or score disagrees with the board: {0}")]
    Mismatch(String),
}

/// Start square and (square, tile, newly placed) for each letter.
type FormedWord = (usize, Vec<(usize, BoardTile, bool)>);

/// Returns the words formed by a set of new tiles along `dir`: the main word
/// and every perpendicular word of length >= 2, each as
/// (start square, letters, indices of new tiles within the word).
fn words_formed(board: &Board, new_tiles: &[PlacedTile], dir: Direction) -> Vec<FormedWord> {
    let lookup = |r: isize, c: isize| -> Option<(BoardTile, bool)> {
        if r < 0 || c < 0 || r >= BOARD_SIZE as isize || c >= BOARD_SIZE as isize {
            return None;
        }
        let (r, c) = (r as usize, c as usize);
        if let Some(t) = new_tiles.iter().find(|t| t.row as usize == r && t.col as usize == c) {
            return Some((t.tile, true));
        }
        board.get(r, c).map(|t| (t, false))
    };
    let run = |r0: usize, c0: usize, d: Direction| -> (usize, Vec<(usize, BoardTile, bool)>) {
        let (dr, dc) = match d {
            Direction::Across => (0isize, 1isize),
            Direction::Down => (1, 0),
        };
        let (mut r, mut c) = (r0 as isize, c0 as isize);
        while lookup(r - dr, c - dc).is_some() {
            r -= dr;
            c -= dc;
        }
        let start = (r as usize) * BOARD_SIZE + c as usize;
        let mut letters = Vec::new();
        while let Some((t, is_new)) = lookup(r, c) {
            letters.push(((r as usize) * BOARD_SIZE + c as usize, t, is_new));
            r += dr;
            c += dc;
        }
        (start, letters)
    };
    let first = new_tiles[0];
    let mut out = vec![run(first.row as usize, first.col as usize, dir)];
    for t in new_tiles {
        let cross = run(t.row as usize, t.col as usize, dir.other());
        if cross.1.len() >= 2 {
            out.push(cross);
        }
    }
    out
}

fn score_words(words: &[FormedWord], rules: &RuleSet) -> i32 {
    let mut total = 0;
    for (_, letters) in words {
        if letters.len() < 2 {
            continue;
        }
        let mut sum = 0;
        let mut mult = 1;
        for &(sq, t, is_new) in letters {
            let v = rules.value(t.kind());
            if is_new {
                let p = rules.premium(sq / BOARD_SIZE, sq % BOARD_SIZE);
                sum += v * p.letter_multiplier();
                mult *= p.word_multiplier();
            } else {
                sum += v;
            }
        }
        total += sum * mult;
    }
    total
}

/// Score of placing `placement.tiles` on `board`: every formed word scores
/// its letter values (letter premiums only under new tiles) times the word
/// premiums under new tiles, plus the bingo bonus when a full rack is used.
/// Assumes the placement is legal.
pub fn score_move(board: &Board, placement: &Placement, rules: &RuleSet) -> i32 {
    if placement.tiles.is_empty() {
        return 0;
    }
    let words = words_formed(board, &placement.tiles, placement.direction);
    let mut score = score_words(&words, rules);
    if placement.tiles.len() == rules.rack_size {
        score += rules.bingo_bonus;
    }
    score
}

/// Checks a placement against the board and lexicon from scratch and
/// returns its score. Independent of the move generator.
pub fn validate_placement(
    board: &Board,
    placement: &Placement,
    lexicon: &Lexicon,
    rules: &RuleSet,
) -> Result<i32, PlacementError> {
    let tiles = &placement.tiles;
    if tiles.is_empty() {
        return Err(PlacementError::NoTiles);
    }
    for (i, t) in tiles.iter().enumerate() {
        let (r, c) = (t.row as usize, t.col as usize);
        if r >= BOARD_SIZE || c >= BOARD_SIZE || board.get(r, c).is_some() {
            return Err(PlacementError::BadSquare(t.row, t.col));
        }
        if tiles[..i].iter().any(|u| u.row == t.row && u.col == t.col) {
            return Err(PlacementError::BadSquare(t.row, t.col));
        }
    }
    let dir = placement.direction;
    let same_line = tiles.iter().all(|t| match dir {
        Direction::Across => t.row == tiles[0].row,
        Direction::Down => t.col == tiles[0].col,
    });
    if !same_line {
        return Err(PlacementError::NotInLine);
    }
    let words = words_formed(board, tiles, dir);
    let main = &words[0].1;
    if main.iter().filter(|(_, _, n)| *n).count() != tiles.len() {
        return Err(PlacementError::Gap);
    }
    if board.is_empty() {
        if !tiles.iter().any(|t| t.row as usize == CENTER && t.col as usize == CENTER) {
            return Err(PlacementError::MissesCenter);
        }
    } else {
        let touches = words.iter().any(|(_, w)| w.iter().any(|(_, _, n)| !n));
        if !touches {
            return Err(PlacementError::Disconnected);
        }
    }
    let formed: Vec<&FormedWord> = words.iter().filter(|(_, w)| w.len() >= 2).collect();
    if formed.is_empty() {
        return Err(PlacementError::SingleLetter);
    }
    for (_, w) in &formed {
        let letters: Vec<u8> = w.iter().map(|(_, t, _)| t.letter).collect();
        if !lexicon.contains_letters(&letters) {
            return Err(PlacementError::NotAWord(letters.iter().map(|&l| (b'A' + l) as char).collect()));
        }
    }
    let mut score = score_words(&words, rules);
    if tiles.len() == rules.rack_size {
        score += rules.bingo_bonus;
    }
    Ok(score)
}

/// Builds a placement from explicit tiles, filling in the main word and
/// score from the board. Used for replay, scripted players and tests.
pub fn make_placement(board: &Board, dir: Direction, tiles: &[PlacedTile], rules: &RuleSet) -> Option<Placement> {
    if tiles.is_empty() || tiles.len() > MAX_RACK {
        return None;
    }
    let mut sorted: Vec<PlacedTile> = tiles.to_vec();
    sorted.sort_by_key(|t| (t.row, t.col));
    let words = words_formed(board, &sorted, dir);
    let (start, main) = &words[0];
    let mut word = ArrayString::new();
    for (_, t, _) in main {
        word.try_push((b'A' + t.letter) as char).ok()?;
    }
    let mut p = Placement {
        row: (start / BOARD_SIZE) as u8,
        col: (start % BOARD_SIZE) as u8,
        direction: dir,
        tiles: sorted.into_iter().collect(),
        word,
        score: 0,
    };
    p.score = score_move(board, &p, rules);
    Some(p)
}
