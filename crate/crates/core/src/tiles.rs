//! Tile identities and rack multisets.
//!
//! Tiles are identified by a small integer kind: `0..26` for `A..Z` and
//! [`BLANK`] for the blank. Text forms use `A`-`Z` and `?`.

use std::fmt;

pub const ALPHABET_SIZE: usize = 26;
pub const BLANK: u8 = 26;
pub const TILE_KINDS: usize = 27;
pub const BLANK_CHAR: char = '?';

pub fn tile_char(kind: u8) -> char {
    if kind == BLANK {
        BLANK_CHAR
    } else {
        (b'A' + kind) as char
    }
}

/// Parses `A`-`Z` (either case) or `?`.
pub fn parse_tile(c: char) -> Option<u8> {
    match c {
        '?' => Some(BLANK),
        'A'..='Z' => Some(c as u8 - b'A'),
        'a'..='z' => Some(c as u8 - b'a'),
        _ => None,
    }
}

pub fn letter_index(c: u8) -> Option<u8> {
    match c {
        b'A'..=b'Z' => Some(c - b'A'),
        b'a'..=b'z' => Some(c - b'a'),
        _ => None,
    }
}

pub fn is_vowel(kind: u8) -> bool {
    matches!(kind, 0 | 4 | 8 | 14 | 20)
}

/// A tile on the board. `letter` is the letter it shows; for a blank that is
/// the letter assigned when it was played, fixed for the rest of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoardTile {
    pub letter: u8,
    pub blank: bool,
}

impl BoardTile {
    pub fn natural(letter: u8) -> Self {
        BoardTile { letter, blank: false }
    }

    pub fn blank_as(letter: u8) -> Self {
        BoardTile { letter, blank: true }
    }

    /// The rack tile kind this board tile came from.
    pub fn kind(self) -> u8 {
        if self.blank {
            BLANK
        } else {
            self.letter
        }
    }

    /// Upper case for natural tiles, lower case for blanks.
    pub fn display_char(self) -> char {
        let c = (b'A' + self.letter) as char;
        if self.blank {
            c.to_ascii_lowercase()
        } else {
            c
        }
    }
}

/// Multiset of tile kinds. Used for racks, leaves and exchange sets.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Rack {
    counts: [u8; TILE_KINDS],
    len: u8,
}

impl Rack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tiles(tiles: &[u8]) -> Self {
        let mut rack = Rack::new();
        for &t in tiles {
            rack.add(t);
        }
        rack
    }

    /// Parses a string such as `"AEIR?S"`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut rack = Rack::new();
        for c in s.chars() {
            rack.add(parse_tile(c)?);
        }
        Some(rack)
    }

    pub fn counts(&self) -> &[u8; TILE_KINDS] {
        &self.counts
    }

    pub fn count(&self, kind: u8) -> u8 {
        self.counts[kind as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn add(&mut self, kind: u8) {
        self.counts[kind as usize] += 1;
        self.len += 1;
    }

    /// Removes one tile of `kind`; returns false if none present.
    pub fn remove(&mut self, kind: u8) -> bool {
        if self.counts[kind as usize] == 0 {
            return false;
        }
        self.counts[kind as usize] -= 1;
        self.len -= 1;
        true
    }

    pub fn contains_all(&self, other: &Rack) -> bool {
        self.counts.iter().zip(other.counts.iter()).all(|(a, b)| a >= b)
    }

    /// Removes every tile of `other`; returns None if `other` is not a sub-multiset.
    pub fn minus(&self, other: &Rack) -> Option<Rack> {
        if !self.contains_all(other) {
            return None;
        }
        let mut out = *self;
        for (k, &c) in other.counts.iter().enumerate() {
            out.counts[k] -= c;
        }
        out.len -= other.len;
        Some(out)
    }

    /// Tiles in kind order (letters, then blanks).
    pub fn tiles(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        for (k, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(k as u8, c as usize));
        }
        out
    }

    pub fn value(&self, values: &[u8; TILE_KINDS]) -> i32 {
        self.counts.iter().zip(values.iter()).map(|(&c, &v)| c as i32 * v as i32).sum()
    }
}

impl fmt::Display for Rack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.tiles() {
            write!(f, "{}", tile_char(t))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Rack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rack({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let rack = Rack::parse("s?ea").unwrap();
        assert_eq!(rack.to_string(), "AES?");
        assert_eq!(rack.len(), 4);
        assert!(Rack::parse("A1").is_none());
    }

    #[test]
    fn minus_requires_submultiset() {
        let rack = Rack::parse("AAB").unwrap();
        assert_eq!(rack.minus(&Rack::parse("AB").unwrap()).unwrap().to_string(), "A");
        assert!(rack.minus(&Rack::parse("BB").unwrap()).is_none());
    }

    #[test]
    fn board_tile_kind() {
        assert_eq!(BoardTile::blank_as(3).kind(), BLANK);
        assert_eq!(BoardTile::blank_as(3).display_char(), 'd');
        assert_eq!(BoardTile::natural(3).display_char(), 'D');
    }
}
