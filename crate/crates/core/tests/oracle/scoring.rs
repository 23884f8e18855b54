//! Hand-scored positions. Each expected value is worked out in the comment
//! next to it from the printed board layouts and tile values.

use tilebench::board::{make_placement, score_move, validate_placement, Board, Direction, PlacedTile};
use tilebench::lexicon::Lexicon;
use tilebench::ruleset::RuleSet;
use tilebench::tiles::BoardTile;

use Direction::{Across, Down};

struct Case {
    name: &'static str,
    rules: RuleSet,
    /// Existing words: (row, col, direction, letters).
    board: Vec<(usize, usize, Direction, &'static str)>,
    /// New tiles laid from (row, col) along the direction; `.` skips an
    /// occupied square, lower case is a blank.
    play: (usize, usize, Direction, &'static str),
    expected: i32,
    words: &'static [&'static str],
}

fn tile(ch: char) -> BoardTile {
    let letter = ch.to_ascii_uppercase() as u8 - b'A';
    if ch.is_ascii_lowercase() {
        BoardTile::blank_as(letter)
    } else {
        BoardTile::natural(letter)
    }
}

fn laid(row: usize, col: usize, dir: Direction, pattern: &str) -> Vec<PlacedTile> {
    pattern
        .chars()
        .enumerate()
        .filter(|(_, c)| *c != '.')
        .map(|(i, c)| {
            let (r, c2) = match dir {
                Across => (row, col + i),
                Down => (row + i, col),
            };
            PlacedTile { row: r as u8, col: c2 as u8, tile: tile(c) }
        })
        .collect()
}

fn cases() -> Vec<Case> {
    let s = RuleSet::scrabble;
    let w = RuleSet::wwf;
    vec![
        // C3 A1 B3 = 7, centre DW -> 14
        Case {
            name: "scrabble opening doubled by centre",
            rules: s(),
            board: vec![],
            play: (7, 6, Across, "CAB"),
            expected: 14,
            words: &["CAB"],
        },
        // Q10 I1 = 11, x2 -> 22
        Case {
            name: "scrabble opening QI",
            rules: s(),
            board: vec![],
            play: (7, 7, Across, "QI"),
            expected: 22,
            words: &["QI"],
        },
        // J8 A1 B3 = 12, x2 -> 24
        Case {
            name: "scrabble opening down",
            rules: s(),
            board: vec![],
            play: (6, 7, Down, "JAB"),
            expected: 24,
            words: &["JAB"],
        },
        // blank C 0 + A1 + B3 = 4, x2 -> 8
        Case {
            name: "scrabble opening with blank",
            rules: s(),
            board: vec![],
            play: (7, 6, Across, "cAB"),
            expected: 8,
            words: &["CAB"],
        },
        // R on DL 2 + E T A I N S 6 = 8, x2 = 16, +50 -> 66
        Case {
            name: "scrabble opening bingo",
            rules: s(),
            board: vec![],
            play: (7, 3, Across, "RETAINS"),
            expected: 66,
            words: &["RETAINS"],
        },
        // R2 E1 T1 A1 blank 0 N1 S1 = 7, x2 = 14, +50 -> 64
        Case {
            name: "scrabble opening bingo with blank",
            rules: s(),
            board: vec![],
            play: (7, 3, Across, "RETAiNS"),
            expected: 64,
            words: &["RETAINS"],
        },
        // CABS 3+1+3+1, centre premium already used -> 8
        Case {
            name: "scrabble hook extends word",
            rules: s(),
            board: vec![(7, 6, Across, "CAB")],
            play: (7, 6, Across, "...S"),
            expected: 8,
            words: &["CABS"],
        },
        // existing B3 + E on DL 2 -> 5
        Case {
            name: "scrabble down through existing tile",
            rules: s(),
            board: vec![(7, 6, Across, "CAB")],
            play: (7, 8, Down, ".E"),
            expected: 5,
            words: &["BE"],
        },
        // AX: 1 + X on DL 16 = 17; AA: 1+1 = 2; BX: 3+16 = 19 -> 38
        Case {
            name: "scrabble parallel play",
            rules: s(),
            board: vec![(7, 6, Across, "CAB")],
            play: (8, 7, Across, "AX"),
            expected: 38,
            words: &["AX", "AA", "BX"],
        },
        // Q10 U1 I1 V4x2 E1 R1 E1 D2 = 25, TW x TW = 225, +50 -> 275
        Case {
            name: "scrabble triple-triple bingo",
            rules: s(),
            board: vec![(0, 4, Across, "E")],
            play: (0, 0, Across, "QUIV.RED"),
            expected: 275,
            words: &["QUIVERED"],
        },
        // blank on TL scores 0, T1 -> 1
        Case {
            name: "scrabble blank on triple letter",
            rules: s(),
            board: vec![(6, 5, Across, "T")],
            play: (5, 5, Down, "a"),
            expected: 1,
            words: &["AT"],
        },
        // A1 x3 + T1 -> 4
        Case {
            name: "scrabble natural on triple letter",
            rules: s(),
            board: vec![(6, 5, Across, "T")],
            play: (5, 5, Down, "A"),
            expected: 4,
            words: &["AT"],
        },
        // HAS (4+1+1) x2 = 12; SO (1+1) x2 = 4 -> 16
        Case {
            name: "scrabble word premium counts in both words",
            rules: s(),
            board: vec![(2, 4, Down, "HA"), (4, 5, Across, "O")],
            play: (4, 4, Down, "S"),
            expected: 16,
            words: &["HAS", "SO"],
        },
        // AX 1+24 = 25; EX 1+24 = 25 -> 50
        Case {
            name: "scrabble letter premium counts in both words",
            rules: s(),
            board: vec![(4, 5, Across, "A"), (5, 4, Across, "E")],
            play: (5, 5, Down, "X"),
            expected: 50,
            words: &["AX", "EX"],
        },
        // B3 A1 D2, centre under the existing A is spent -> 6
        Case {
            name: "scrabble spent premium ignored",
            rules: s(),
            board: vec![(7, 7, Across, "A")],
            play: (6, 7, Down, "B.D"),
            expected: 6,
            words: &["BAD"],
        },
        // T1 A1 X8 = 10, TW x3 -> 30
        Case {
            name: "scrabble triple word",
            rules: s(),
            board: vec![(7, 1, Across, "A")],
            play: (7, 0, Across, "T.X"),
            expected: 30,
            words: &["TAX"],
        },
        // Q on DL 20 + I1 -> 21
        Case {
            name: "scrabble double letter Q",
            rules: s(),
            board: vec![(7, 6, Across, "I")],
            play: (6, 6, Down, "Q"),
            expected: 21,
            words: &["QI"],
        },
        // AN: 1 + N on DL 2 = 3; AA 2; BN 3+2 = 5 -> 10
        Case {
            name: "scrabble parallel AN",
            rules: s(),
            board: vec![(7, 6, Across, "CAB")],
            play: (8, 7, Across, "AN"),
            expected: 10,
            words: &["AN", "AA", "BN"],
        },
        // C4 A1 B4, no centre premium -> 9
        Case {
            name: "wwf opening is not doubled",
            rules: w(),
            board: vec![],
            play: (7, 6, Across, "CAB"),
            expected: 9,
            words: &["CAB"],
        },
        // blank 0 + A1 + B4 -> 5
        Case {
            name: "wwf opening with blank",
            rules: w(),
            board: vec![],
            play: (7, 6, Across, "cAB"),
            expected: 5,
            words: &["CAB"],
        },
        // J10 O1 K5 E1 R1 = 18, DW at (7,3) -> 36
        Case {
            name: "wwf opening on double word",
            rules: w(),
            board: vec![],
            play: (7, 3, Across, "JOKER"),
            expected: 36,
            words: &["JOKER"],
        },
        // R1 E1 T1 A1 I1 N2 S1 = 8, x2 = 16, +35 -> 51
        Case {
            name: "wwf opening bingo",
            rules: w(),
            board: vec![],
            play: (7, 1, Across, "RETAINS"),
            expected: 51,
            words: &["RETAINS"],
        },
        // ZEST: 10+1+1+ T on TL 3 = 15, TW -> 45; SO 1+1 = 2 -> 47
        Case {
            name: "wwf triple word with triple letter",
            rules: w(),
            board: vec![(1, 5, Across, "O")],
            play: (0, 3, Across, "ZEST"),
            expected: 47,
            words: &["ZEST", "SO"],
        },
        // AN 1+2 = 3; AA 2; BN 4+2 = 6 -> 11
        Case {
            name: "wwf parallel AN",
            rules: w(),
            board: vec![(7, 6, Across, "CAB")],
            play: (8, 7, Across, "AN"),
            expected: 11,
            words: &["AN", "AA", "BN"],
        },
        // SA (1+1) x2 = 4; SO (1+1) x2 = 4 -> 8
        Case {
            name: "wwf word premium counts in both words",
            rules: w(),
            board: vec![(2, 5, Across, "A"), (1, 6, Across, "O")],
            play: (1, 5, Down, "S"),
            expected: 8,
            words: &["SA", "SO"],
        },
    ]
}

/// Checks every hand-scored case; returns the number of cases.
pub fn check() -> Result<usize, String> {
    let cases = cases();
    let mut failures = Vec::new();
    for case in &cases {
        let mut board = Board::new();
        for &(r, c, d, word) in &case.board {
            board.place_word(r, c, d, word);
        }
        let (r, c, d, pattern) = case.play;
        let tiles = laid(r, c, d, pattern);
        let Some(p) = make_placement(&board, d, &tiles, &case.rules) else {
            failures.push(format!("{}: no placement", case.name));
            continue;
        };
        let lex = Lexicon::build(case.words.iter().copied()).unwrap().0;
        let validated = validate_placement(&board, &p, &lex, &case.rules);
        let scored = score_move(&board, &p, &case.rules);
        if p.score != case.expected || scored != case.expected || validated != Ok(case.expected) {
            failures.push(format!(
                "{}: expected {}, placement {}, score_move {}, validator {:?}",
                case.name, case.expected, p.score, scored, validated
            ));
        }
    }
    if failures.is_empty() {
        Ok(cases.len())
    } else {
        Err(failures.join("\n"))
    }
}
