//! Anchored move generation over the GADDAG.
//!
//! For each anchor (an empty square next to a tile, or the center on an
//! empty board) the generator extends left from the anchor through the
//! reversed-prefix arcs, then crosses the separator and extends right.
//! Tiles left of the anchor may only go on non-anchor squares, so every
//! play is produced exactly once, from the leftmost anchor it covers.
//! One-tile plays are reported once, under the direction of their longer
//! word.

use arrayvec::{ArrayString, ArrayVec};

use crate::board::{Board, Direction, PlacedTile, Placement, SQUARES};
use crate::lexicon::{Lexicon, NodeId, SEPARATOR};
use crate::ruleset::{RuleSet, BOARD_SIZE, CENTER};
use crate::tiles::{BoardTile, Rack, ALPHABET_SIZE, BLANK, TILE_KINDS};

const ALL_LETTERS: u32 = (1 << ALPHABET_SIZE) - 1;

/// Cross-check data for one direction of play.
struct CrossInfo {
    mask: [u32; SQUARES],
    sum: [i32; SQUARES],
    has_cross: [bool; SQUARES],
}

fn cross_info(board: &Board, lexicon: &Lexicon, rules: &RuleSet, dir: Direction) -> CrossInfo {
    let mut info = CrossInfo { mask: [ALL_LETTERS; SQUARES], sum: [0; SQUARES], has_cross: [false; SQUARES] };
    let perp = dir.other();
    for line in 0..BOARD_SIZE {
        for pos in 0..BOARD_SIZE {
            let sq = perp.square(line, pos);
            if board.at(sq).is_some() {
                info.mask[sq] = 0;
                continue;
            }
            let mut before = ArrayVec::<u8, BOARD_SIZE>::new();
            let mut sum = 0;
            let mut p = pos;
            while p > 0 {
                match board.at(perp.square(line, p - 1)) {
                    Some(t) => {
                        before.push(t.letter);
                        sum += rules.value(t.kind());
                        p -= 1;
                    }
                    None => break,
                }
            }
            before.reverse();
            let mut after = ArrayVec::<u8, BOARD_SIZE>::new();
            let mut p = pos + 1;
            while p < BOARD_SIZE {
                match board.at(perp.square(line, p)) {
                    Some(t) => {
                        after.push(t.letter);
                        sum += rules.value(t.kind());
                        p += 1;
                    }
                    None => break,
                }
            }
            if before.is_empty() && after.is_empty() {
                continue;
            }
            info.mask[sq] = lexicon.between_mask(&before, &after);
            info.sum[sq] = sum;
            info.has_cross[sq] = true;
        }
    }
    info
}

fn anchors(board: &Board) -> [bool; SQUARES] {
    let mut out = [false; SQUARES];
    if board.is_empty() {
        out[CENTER * BOARD_SIZE + CENTER] = true;
        return out;
    }
    for r in 0..BOARD_SIZE {
        for c in 0..BOARD_SIZE {
            if board.get(r, c).is_some() {
                continue;
            }
            let occupied = |dr: isize, dc: isize| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                nr >= 0
                    && nc >= 0
                    && (nr as usize) < BOARD_SIZE
                    && (nc as usize) < BOARD_SIZE
                    && board.get(nr as usize, nc as usize).is_some()
            };
            out[r * BOARD_SIZE + c] = occupied(-1, 0) || occupied(1, 0) || occupied(0, -1) || occupied(0, 1);
        }
    }
    out
}

struct Generator<'a, F: FnMut(&Placement)> {
    board: &'a Board,
    lexicon: &'a Lexicon,
    rules: &'a RuleSet,
    cross: CrossInfo,
    anchors: &'a [bool; SQUARES],
    dir: Direction,
    line: usize,
    anchor: usize,
    left_start: usize,
    rack: [u8; TILE_KINDS],
    rack_len: usize,
    placed: ArrayVec<(u8, BoardTile), 7>,
    sink: F,
}

impl<F: FnMut(&Placement)> Generator<'_, F> {
    #[inline]
    fn square(&self, pos: usize) -> usize {
        self.dir.square(self.line, pos)
    }

    #[inline]
    fn empty_at(&self, pos: isize) -> bool {
        pos < 0 || pos >= BOARD_SIZE as isize || self.board.at(self.square(pos as usize)).is_none()
    }

    fn gen(&mut self, pos: usize, node: NodeId) {
        let sq = self.square(pos);
        if let Some(t) = self.board.at(sq) {
            if let Some(next) = self.lexicon.child(node, t.letter) {
                self.go_on(pos, next);
            }
            return;
        }
        if self.rack_len == 0 {
            return;
        }
        let mut allowed = self.cross.mask[sq] & self.lexicon.letter_mask(node);
        while allowed != 0 {
            let letter = allowed.trailing_zeros() as u8;
            allowed &= allowed - 1;
            let next = self.lexicon.child(node, letter).expect("masked arc");
            if self.rack[letter as usize] > 0 {
                self.take(letter);
                self.placed.push((pos as u8, BoardTile::natural(letter)));
                self.go_on(pos, next);
                self.placed.pop();
                self.put_back(letter);
            }
            if self.rack[BLANK as usize] > 0 {
                self.take(BLANK);
                self.placed.push((pos as u8, BoardTile::blank_as(letter)));
                self.go_on(pos, next);
                self.placed.pop();
                self.put_back(BLANK);
            }
        }
    }

    fn go_on(&mut self, pos: usize, next: NodeId) {
        let p = pos as isize;
        if pos <= self.anchor {
            let right_of_anchor_empty = self.empty_at(self.anchor as isize + 1);
            if self.lexicon.is_terminal(next) && self.empty_at(p - 1) && right_of_anchor_empty {
                self.record(pos, self.anchor);
            }
            if pos > 0 {
                let left_sq = self.square(pos - 1);
                if self.board.at(left_sq).is_some() || !self.anchors[left_sq] {
                    self.gen(pos - 1, next);
                }
            }
            if self.empty_at(p - 1) && self.anchor + 1 < BOARD_SIZE {
                if let Some(sep) = self.lexicon.child(next, SEPARATOR) {
                    let saved = self.left_start;
                    self.left_start = pos;
                    self.gen(self.anchor + 1, sep);
                    self.left_start = saved;
                }
            }
        } else {
            if self.lexicon.is_terminal(next) && self.empty_at(p + 1) {
                self.record(self.left_start, pos);
            }
            if pos + 1 < BOARD_SIZE {
                self.gen(pos + 1, next);
            }
        }
    }

    #[inline]
    fn take(&mut self, kind: u8) {
        self.rack[kind as usize] -= 1;
        self.rack_len -= 1;
    }

    #[inline]
    fn put_back(&mut self, kind: u8) {
        self.rack[kind as usize] += 1;
        self.rack_len += 1;
    }

    fn record(&mut self, start: usize, end: usize) {
        if self.placed.is_empty() {
            return;
        }
        if self.placed.len() == 1 && self.dir == Direction::Down {
            let sq = self.square(self.placed[0].0 as usize);
            if self.cross.has_cross[sq] {
                // Found already by the across pass.
                return;
            }
        }
        let mut word = ArrayString::<BOARD_SIZE>::new();
        let mut main_sum = 0;
        let mut word_mult = 1;
        let mut cross_total = 0;
        for pos in start..=end {
            let sq = self.square(pos);
            match self.board.at(sq) {
                Some(t) => {
                    word.push((b'A' + t.letter) as char);
                    main_sum += self.rules.value(t.kind());
                }
                None => {
                    let (_, t) = *self.placed.iter().find(|(p, _)| *p as usize == pos).expect("placed tile");
                    word.push((b'A' + t.letter) as char);
                    let premium = self.rules.premium(sq / BOARD_SIZE, sq % BOARD_SIZE);
                    let v = self.rules.value(t.kind()) * premium.letter_multiplier();
                    main_sum += v;
                    word_mult *= premium.word_multiplier();
                    if self.cross.has_cross[sq] {
                        cross_total += (self.cross.sum[sq] + v) * premium.word_multiplier();
                    }
                }
            }
        }
        let mut score = main_sum * word_mult + cross_total;
        if self.placed.len() == self.rules.rack_size {
            score += self.rules.bingo_bonus;
        }
        let mut tiles: ArrayVec<PlacedTile, 7> = self
            .placed
            .iter()
            .map(|&(pos, tile)| {
                let sq = self.square(pos as usize);
                PlacedTile { row: (sq / BOARD_SIZE) as u8, col: (sq % BOARD_SIZE) as u8, tile }
            })
            .collect();
        tiles.sort_unstable_by_key(|t| (t.row, t.col));
        let start_sq = self.square(start);
        let placement = Placement {
            row: (start_sq / BOARD_SIZE) as u8,
            col: (start_sq % BOARD_SIZE) as u8,
            direction: self.dir,
            tiles,
            word,
            score,
        };
        (self.sink)(&placement);
    }
}

/// Calls `sink` once for every legal placement of tiles from `rack`.
pub fn for_each_move<F: FnMut(&Placement)>(board: &Board, rack: &Rack, lexicon: &Lexicon, rules: &RuleSet, sink: F) {
    if rack.is_empty() {
        return;
    }
    let anchors = anchors(board);
    let mut gen = Generator {
        board,
        lexicon,
        rules,
        cross: cross_info(board, lexicon, rules, Direction::Across),
        anchors: &anchors,
        dir: Direction::Across,
        line: 0,
        anchor: 0,
        left_start: 0,
        rack: *rack.counts(),
        rack_len: rack.len(),
        placed: ArrayVec::new(),
        sink,
    };
    for dir in [Direction::Across, Direction::Down] {
        if dir == Direction::Down {
            gen.cross = cross_info(board, lexicon, rules, dir);
        }
        gen.dir = dir;
        for line in 0..BOARD_SIZE {
            gen.line = line;
            for pos in 0..BOARD_SIZE {
                let sq = dir.square(line, pos);
                if !anchors[sq] {
                    continue;
                }
                gen.anchor = pos;
                gen.left_start = pos;
                let root = lexicon.root();
                gen.gen(pos, root);
            }
        }
    }
}

/// Every legal placement of tiles from `rack` on `board`.
pub fn legal_moves(board: &Board, rack: &Rack, lexicon: &Lexicon, rules: &RuleSet) -> Vec<Placement> {
    let mut out = Vec::new();
    for_each_move(board, rack, lexicon, rules, |p| out.push(p.clone()));
    out
}
