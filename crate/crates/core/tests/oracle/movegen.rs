//! Move generation against exhaustive enumeration of every span, fill and
//! cross-word on small random positions.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilebench::board::{Board, Direction};
use tilebench::lexicon::Lexicon;
use tilebench::movegen::legal_moves;
use tilebench::ruleset::RuleSet;
use tilebench::tiles::{BoardTile, Rack, BLANK};

const N: usize = 15;
const WORDS: &str = include_str!("../../data/words-2to8.txt");

/// Newly placed tiles as (row, col, letter, blank), sorted, and the score.
type Key = (Vec<(u8, u8, u8, bool)>, i32);

fn at(dir: Direction, line: usize, pos: usize) -> (usize, usize) {
    match dir {
        Direction::Across => (line, pos),
        Direction::Down => (pos, line),
    }
}

struct Brute<'a> {
    board: &'a Board,
    dict: &'a HashSet<Vec<u8>>,
    rules: &'a RuleSet,
    found: BTreeSet<Key>,
}

impl Brute<'_> {
    fn occupied(&self, r: isize, c: isize) -> bool {
        (0..N as isize).contains(&r) && (0..N as isize).contains(&c) && self.board.get(r as usize, c as usize).is_some()
    }

    fn run(&mut self, rack: &Rack) {
        for dir in [Direction::Across, Direction::Down] {
            for line in 0..N {
                for start in 0..N {
                    for end in start + 1..N {
                        self.span(dir, line, start, end, rack);
                    }
                }
            }
        }
    }

    fn span(&mut self, dir: Direction, line: usize, start: usize, end: usize, rack: &Rack) {
        let before = start.checked_sub(1).map(|p| at(dir, line, p));
        let after = (end + 1 < N).then(|| at(dir, line, end + 1));
        if before.is_some_and(|(r, c)| self.board.get(r, c).is_some())
            || after.is_some_and(|(r, c)| self.board.get(r, c).is_some())
        {
            return;
        }
        let squares: Vec<(usize, usize)> = (start..=end).map(|p| at(dir, line, p)).collect();
        let empties: Vec<(usize, usize)> =
            squares.iter().copied().filter(|&(r, c)| self.board.get(r, c).is_none()).collect();
        if empties.is_empty() || empties.len() > rack.len() {
            return;
        }
        let connected = if self.board.is_empty() {
            squares.contains(&(7, 7))
        } else {
            squares.len() > empties.len()
                || empties.iter().any(|&(r, c)| {
                    let (r, c) = (r as isize, c as isize);
                    [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(dr, dc)| self.occupied(r + dr, c + dc))
                })
        };
        if !connected {
            return;
        }
        let mut fill = Vec::new();
        self.fill(dir, &squares, &empties, rack, &mut fill);
    }

    fn fill(
        &mut self,
        dir: Direction,
        squares: &[(usize, usize)],
        empties: &[(usize, usize)],
        rack: &Rack,
        fill: &mut Vec<BoardTile>,
    ) {
        if fill.len() == empties.len() {
            self.check(dir, squares, empties, fill);
            return;
        }
        for kind in 0..=BLANK {
            if rack.count(kind) == 0 {
                continue;
            }
            let mut rest = *rack;
            rest.remove(kind);
            if kind == BLANK {
                for letter in 0..26 {
                    fill.push(BoardTile::blank_as(letter));
                    self.fill(dir, squares, empties, &rest, fill);
                    fill.pop();
                }
            } else {
                fill.push(BoardTile::natural(kind));
                self.fill(dir, squares, empties, &rest, fill);
                fill.pop();
            }
        }
    }

    fn tile_at(&self, r: usize, c: usize, empties: &[(usize, usize)], fill: &[BoardTile]) -> Option<(BoardTile, bool)> {
        if let Some(i) = empties.iter().position(|&s| s == (r, c)) {
            return Some((fill[i], true));
        }
        self.board.get(r, c).map(|t| (t, false))
    }

    /// Score of a word given as (row, col) squares.
    fn word_score(&self, word: &[(usize, usize)], empties: &[(usize, usize)], fill: &[BoardTile]) -> i32 {
        let mut sum = 0;
        let mut mult = 1;
        for &(r, c) in word {
            let (t, new) = self.tile_at(r, c, empties, fill).expect("occupied");
            let value = if t.blank { 0 } else { self.rules.tile_values[t.letter as usize] as i32 };
            let (lm, wm) = if new { premium(self.rules, r, c) } else { (1, 1) };
            sum += value * lm;
            mult *= wm;
        }
        sum * mult
    }

    fn check(&mut self, dir: Direction, squares: &[(usize, usize)], empties: &[(usize, usize)], fill: &[BoardTile]) {
        let main: Vec<u8> = squares.iter().map(|&(r, c)| self.tile_at(r, c, empties, fill).unwrap().0.letter).collect();
        if !self.dict.contains(&main) {
            return;
        }
        let mut score = self.word_score(squares, empties, fill);
        for &(r, c) in empties {
            // Perpendicular word through this tile.
            let (dr, dc) = match dir {
                Direction::Across => (1isize, 0isize),
                Direction::Down => (0, 1),
            };
            let (mut r0, mut c0) = (r as isize, c as isize);
            while self.occupied(r0 - dr, c0 - dc) {
                r0 -= dr;
                c0 -= dc;
            }
            let mut cross = Vec::new();
            let (mut rr, mut cc) = (r0, c0);
            while (rr, cc) == (r as isize, c as isize) || self.occupied(rr, cc) {
                cross.push((rr as usize, cc as usize));
                rr += dr;
                cc += dc;
            }
            if cross.len() < 2 {
                continue;
            }
            let letters: Vec<u8> =
                cross.iter().map(|&(a, b)| self.tile_at(a, b, empties, fill).unwrap().0.letter).collect();
            if !self.dict.contains(&letters) {
                return;
            }
            score += self.word_score(&cross, empties, fill);
        }
        if empties.len() == self.rules.rack_size {
            score += self.rules.bingo_bonus;
        }
        let mut tiles: Vec<(u8, u8, u8, bool)> =
            empties.iter().zip(fill).map(|(&(r, c), t)| (r as u8, c as u8, t.letter, t.blank)).collect();
        tiles.sort();
        self.found.insert((tiles, score));
    }
}

fn premium(rules: &RuleSet, r: usize, c: usize) -> (i32, i32) {
    use tilebench::ruleset::Premium::*;
    match rules.premium(r, c) {
        None => (1, 1),
        DoubleLetter => (2, 1),
        TripleLetter => (3, 1),
        DoubleWord => (1, 2),
        TripleWord => (1, 3),
    }
}

fn generated(board: &Board, rack: &Rack, lex: &Lexicon, rules: &RuleSet) -> (BTreeSet<Key>, usize) {
    let moves = legal_moves(board, rack, lex, rules);
    let n = moves.len();
    let keys = moves
        .into_iter()
        .map(|p| {
            let mut tiles: Vec<_> = p.tiles.iter().map(|t| (t.row, t.col, t.tile.letter, t.tile.blank)).collect();
            tiles.sort();
            (tiles, p.score)
        })
        .collect();
    (keys, n)
}

struct Instance {
    rules: RuleSet,
    dict: Vec<String>,
    board: Board,
    rack: Rack,
}

fn instance(seed: u64, all_words: &[&str]) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rules = if seed.is_multiple_of(2) { RuleSet::scrabble() } else { RuleSet::wwf() };
    let mut letters: Vec<u8> = b"AEIOU".to_vec();
    letters.shuffle(&mut rng);
    letters.truncate(3);
    let mut consonants: Vec<u8> = b"BCDFGHJKLMNPQRSTVWXYZ".to_vec();
    consonants.shuffle(&mut rng);
    letters.extend_from_slice(&consonants[..5]);
    let mut dict: Vec<String> = all_words
        .iter()
        .filter(|w| (2..=5).contains(&w.len()) && w.bytes().all(|b| letters.contains(&b)))
        .map(|w| w.to_string())
        .collect();
    dict.shuffle(&mut rng);
    dict.truncate(rng.gen_range(20..=200));
    dict.sort();
    let lex = Lexicon::build(&dict).unwrap().0;

    let draw_rack = |rng: &mut ChaCha8Rng, n: usize| {
        let mut rack = Rack::new();
        for _ in 0..n {
            if rng.gen_bool(0.08) {
                rack.add(BLANK);
            } else {
                rack.add(letters.choose(rng).unwrap() - b'A');
            }
        }
        rack
    };
    let mut board = Board::new();
    for _ in 0..rng.gen_range(0..=4) {
        let rack = draw_rack(&mut rng, 5);
        let moves: Vec<_> = legal_moves(&board, &rack, &lex, &rules)
            .into_iter()
            .filter(|m| board.tile_count() + m.tiles.len() <= 7)
            .collect();
        if let Some(m) = moves.choose(&mut rng) {
            board.apply(m);
        }
    }
    let size = rng.gen_range(1..=5);
    let rack = draw_rack(&mut rng, size);
    Instance { rules, dict, board, rack }
}

/// Compares the generator with brute force on `instances` seeded
/// positions. Returns the total move count and the number of non-empty boards.
pub fn check(instances: u64) -> Result<(usize, usize), String> {
    let all_words: Vec<&str> = WORDS.lines().collect();
    let mut total_moves = 0;
    let mut nonempty_boards = 0;
    for seed in 0..instances {
        let inst = instance(seed, &all_words);
        assert!(inst.dict.len() <= 200 && inst.rack.len() <= 5 && inst.board.tile_count() <= 7);
        let lex = Lexicon::build(&inst.dict).unwrap().0;
        let dict: HashSet<Vec<u8>> = inst.dict.iter().map(|w| w.bytes().map(|b| b - b'A').collect()).collect();
        let mut brute = Brute { board: &inst.board, dict: &dict, rules: &inst.rules, found: BTreeSet::new() };
        brute.run(&inst.rack);
        let (keys, n) = generated(&inst.board, &inst.rack, &lex, &inst.rules);
        if n != keys.len() {
            return Err(format!("seed {seed}: duplicate moves generated"));
        }
        let missing: Vec<_> = brute.found.difference(&keys).take(5).collect();
        let extra: Vec<_> = keys.difference(&brute.found).take(5).collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(format!(
                "seed {seed} rack {} board\n{}\nmissing {missing:?}\nextra {extra:?}",
                inst.rack, inst.board
            ));
        }
        total_moves += keys.len();
        nonempty_boards += usize::from(!inst.board.is_empty());
    }
    Ok((total_moves, nonempty_boards))
}
