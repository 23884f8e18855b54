//! Minimized GADDAG word graph.
//!
//! Every word `c1..cn` is stored as the `n` paths `rev(c1..ci) ^ c(i+1)..cn`
//! (the separator is omitted when `i = n`). Move generation starts at an
//! anchor square, walks left through the reversed prefix, crosses the
//! separator and walks right. Identical suffix subgraphs are shared, so the
//! graph is a DAG rather than a trie.
//!
//! Nodes store a 27-bit arc mask (26 letters plus the separator); arcs of a
//! node are contiguous and ordered by label, so a child lookup is one
//! popcount.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tiles::{letter_index, ALPHABET_SIZE};

/// Arc label that separates the reversed prefix from the suffix.
pub const SEPARATOR: u8 = ALPHABET_SIZE as u8;
pub const MIN_WORD_LEN: usize = 2;
pub const MAX_WORD_LEN: usize = 15;

const MAGIC: &[u8; 4] = b"TBLX";
const BUNDLED_WORDS: &str = include_str!("../data/words-2to8.txt");
const FILE_VERSION: u32 = 1;
const LETTER_MASK: u32 = (1 << ALPHABET_SIZE) - 1;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    mask: u32,
    first_arc: u32,
    terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    nodes: Vec<Node>,
    arcs: Vec<NodeId>,
    word_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub accepted: usize,
    pub duplicates: usize,
    pub rejected_length: usize,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("word list is empty")]
    Empty,
    #[error("non-alphabetic word {word:?} (entry {index})")]
    NonAlphabetic { index: usize, word: String },
    #[error("corrupt lexicon file: {0}")]
    Corrupt(String),
    #[error("unsupported lexicon file version {0} (expected {FILE_VERSION})")]
    UnsupportedVersion(u32),
    #[error("lexicon i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LexiconError {
    pub fn code(&self) -> &'static str {
        match self {
            LexiconError::Empty => "empty_word_list",
            LexiconError::NonAlphabetic { .. } => "non_alphabetic",
            LexiconError::Corrupt(_) => "corrupt_lexicon",
            LexiconError::UnsupportedVersion(_) => "unsupported_version",
            LexiconError::Io(_) => "io",
        }
    }
}

impl Lexicon {
    /// Builds from words (any case). Words shorter than 2 or longer than 15
    /// letters are skipped and counted in the report.
    pub fn build<I, S>(words: I) -> Result<(Lexicon, BuildReport), LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut report = BuildReport::default();
        let mut encoded: Vec<Vec<u8>> = Vec::new();
        let mut any = false;
        for (index, word) in words.into_iter().enumerate() {
            let word = word.as_ref().trim();
            if word.is_empty() {
                continue;
            }
            any = true;
            let letters: Option<Vec<u8>> = word.bytes().map(letter_index).collect();
            let letters = letters.ok_or_else(|| LexiconError::NonAlphabetic { index, word: word.to_string() })?;
            if !(MIN_WORD_LEN..=MAX_WORD_LEN).contains(&letters.len()) {
                report.rejected_length += 1;
                continue;
            }
            encoded.push(letters);
        }
        if !any {
            return Err(LexiconError::Empty);
        }
        let before = encoded.len();
        encoded.sort_unstable();
        encoded.dedup();
        report.duplicates = before - encoded.len();
        report.accepted = encoded.len();
        if encoded.is_empty() {
            return Err(LexiconError::Empty);
        }

        let mut paths = Vec::with_capacity(encoded.iter().map(Vec::len).sum());
        for w in &encoded {
            for split in 1..=w.len() {
                let mut path = Vec::with_capacity(w.len() + 1);
                path.extend(w[..split].iter().rev());
                if split < w.len() {
                    path.push(SEPARATOR);
                    path.extend_from_slice(&w[split..]);
                }
                paths.push(path);
            }
        }
        paths.sort_unstable();
        paths.dedup();

        let mut builder = Builder::new();
        for p in &paths {
            builder.insert(p);
        }
        let mut lex = builder.finish();
        lex.word_count = encoded.len() as u64;
        Ok((lex, report))
    }

    /// Reads a plain word list, one word per line.
    pub fn from_word_list(path: impl AsRef<Path>) -> Result<(Lexicon, BuildReport), LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::build(text.lines())
    }

    /// The bundled 2-8 letter word list (115k words).
    pub fn bundled() -> Lexicon {
        Self::build(BUNDLED_WORDS.lines()).expect("bundled word list").0
    }

    /// Opens either a compiled lexicon or a plain word list, by content.
    pub fn open(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            return Self::from_bytes(&bytes);
        }
        let text = String::from_utf8(bytes)
            .map_err(|_| LexiconError::Corrupt("neither a lexicon nor a UTF-8 word list".into()))?;
        Ok(Self::build(text.lines())?.0)
    }

    pub fn word_count(&self) -> u64 {
        self.word_count
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        0
    }

    #[inline]
    pub fn child(&self, node: NodeId, label: u8) -> Option<NodeId> {
        let n = &self.nodes[node as usize];
        let bit = 1u32 << label;
        if n.mask & bit == 0 {
            return None;
        }
        let offset = (n.mask & (bit - 1)).count_ones();
        Some(self.arcs[(n.first_arc + offset) as usize])
    }

    #[inline]
    pub fn is_terminal(&self, node: NodeId) -> bool {
        self.nodes[node as usize].terminal
    }

    /// Letters (not the separator) with an outgoing arc.
    #[inline]
    pub fn letter_mask(&self, node: NodeId) -> u32 {
        self.nodes[node as usize].mask & LETTER_MASK
    }

    fn walk(&self, mut node: NodeId, labels: impl IntoIterator<Item = u8>) -> Option<NodeId> {
        for l in labels {
            node = self.child(node, l)?;
        }
        Some(node)
    }

    fn encode(word: &str) -> Option<Vec<u8>> {
        word.bytes().map(letter_index).collect()
    }

    pub fn contains(&self, word: &str) -> bool {
        match Self::encode(word) {
            Some(w) => self.contains_letters(&w),
            None => false,
        }
    }

    /// Membership for a word given as letter indices `0..26`.
    pub fn contains_letters(&self, word: &[u8]) -> bool {
        if word.len() < MIN_WORD_LEN {
            return false;
        }
        self.walk(self.root(), word.iter().rev().copied()).is_some_and(|n| self.is_terminal(n))
    }

    /// Letters `L` such that `prefix + L` is a word.
    pub fn hooks_after(&self, prefix: &str) -> Vec<char> {
        let Some(p) = Self::encode(prefix) else { return Vec::new() };
        mask_chars(self.between_mask(&p, &[]))
    }

    /// Letters `L` such that `L + suffix` is a word.
    pub fn hooks_before(&self, suffix: &str) -> Vec<char> {
        let Some(s) = Self::encode(suffix) else { return Vec::new() };
        mask_chars(self.between_mask(&[], &s))
    }

    /// Bitmask of letters `L` such that `before + L + after` is a word.
    /// This is the cross-check a square needs when `before` is the run of
    /// tiles above (left of) it and `after` the run below (right of) it.
    pub fn between_mask(&self, before: &[u8], after: &[u8]) -> u32 {
        let mut out = 0;
        let mut letters = self.letter_mask(self.root());
        while letters != 0 {
            let l = letters.trailing_zeros() as u8;
            letters &= letters - 1;
            let Some(mut node) = self.child(self.root(), l) else { continue };
            let Some(n) = self.walk(node, before.iter().rev().copied()) else { continue };
            node = n;
            if !after.is_empty() {
                let Some(n) = self.child(node, SEPARATOR).and_then(|s| self.walk(s, after.iter().copied())) else {
                    continue;
                };
                node = n;
            }
            if self.is_terminal(node) && before.len() + after.len() + 1 >= MIN_WORD_LEN {
                out |= 1 << l;
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        let bytes = self.to_bytes();
        let mut f = std::fs::File::create(path)?;
        f.write_all(&bytes)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + self.nodes.len() * 9 + self.arcs.len() * 4 + 32);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FILE_VERSION.to_le_bytes());
        out.extend_from_slice(&self.word_count.to_le_bytes());
        out.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.arcs.len() as u32).to_le_bytes());
        for n in &self.nodes {
            out.extend_from_slice(&n.mask.to_le_bytes());
            out.extend_from_slice(&n.first_arc.to_le_bytes());
            out.push(n.terminal as u8);
        }
        for a in &self.arcs {
            out.extend_from_slice(&a.to_le_bytes());
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Lexicon, LexiconError> {
        let corrupt = |m: &str| LexiconError::Corrupt(m.to_string());
        if bytes.len() < 24 + 32 || &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic or truncated header"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != FILE_VERSION {
            return Err(LexiconError::UnsupportedVersion(version));
        }
        let word_count = u64::from_le_bytes(body[8..16].try_into().unwrap());
        let n_nodes = u32_at(16) as usize;
        let n_arcs = u32_at(20) as usize;
        if body.len() != 24 + n_nodes * 9 + n_arcs * 4 || n_nodes == 0 {
            return Err(corrupt("length does not match header"));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut o = 24;
        for _ in 0..n_nodes {
            let mask = u32_at(o);
            let first_arc = u32_at(o + 4);
            let terminal = body[o + 8] != 0;
            if first_arc as usize + mask.count_ones() as usize > n_arcs || mask >> (SEPARATOR + 1) != 0 {
                return Err(corrupt("arc range out of bounds"));
            }
            nodes.push(Node { mask, first_arc, terminal });
            o += 9;
        }
        let mut arcs = Vec::with_capacity(n_arcs);
        for _ in 0..n_arcs {
            let a = u32_at(o);
            if a as usize >= n_nodes {
                return Err(corrupt("arc target out of bounds"));
            }
            arcs.push(a);
            o += 4;
        }
        Ok(Lexicon { nodes, arcs, word_count })
    }
}

fn mask_chars(mask: u32) -> Vec<char> {
    (0..ALPHABET_SIZE as u8).filter(|l| mask & (1 << l) != 0).map(|l| (b'A' + l) as char).collect()
}

/// Incremental construction of a minimal acyclic automaton from sorted
/// input (Daciuk, Mihov, Watson and Watson). Finished subtrees are replaced
/// by an equivalent registered node; freed slots are recycled.
struct Builder {
    nodes: Vec<BuildNode>,
    free: Vec<u32>,
    register: HashMap<(bool, Vec<(u8, u32)>), u32>,
    registered: Vec<bool>,
    prev: Vec<u8>,
}

#[derive(Default, Clone)]
struct BuildNode {
    terminal: bool,
    children: Vec<(u8, u32)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            nodes: vec![BuildNode::default()],
            free: Vec::new(),
            register: HashMap::new(),
            registered: vec![false],
            prev: Vec::new(),
        }
    }

    fn alloc(&mut self) -> u32 {
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = BuildNode::default();
            self.registered[id as usize] = false;
            id
        } else {
            self.nodes.push(BuildNode::default());
            self.registered.push(false);
            (self.nodes.len() - 1) as u32
        }
    }

    fn insert(&mut self, word: &[u8]) {
        let common = self.prev.iter().zip(word).take_while(|(a, b)| a == b).count();
        let mut state = 0u32;
        for _ in 0..common {
            state = self.nodes[state as usize].children.last().expect("prefix path").1;
        }
        if !self.nodes[state as usize].children.is_empty() {
            self.replace_or_register(state);
        }
        for &l in &word[common..] {
            let next = self.alloc();
            self.nodes[state as usize].children.push((l, next));
            state = next;
        }
        self.nodes[state as usize].terminal = true;
        self.prev.clear();
        self.prev.extend_from_slice(word);
    }

    fn replace_or_register(&mut self, state: u32) {
        let (_, child) = *self.nodes[state as usize].children.last().unwrap();
        if self.registered[child as usize] {
            return;
        }
        if !self.nodes[child as usize].children.is_empty() {
            self.replace_or_register(child);
        }
        let key = (self.nodes[child as usize].terminal, self.nodes[child as usize].children.clone());
        match self.register.get(&key) {
            Some(&existing) => {
                self.nodes[state as usize].children.last_mut().unwrap().1 = existing;
                self.nodes[child as usize].children = Vec::new();
                self.free.push(child);
            }
            None => {
                self.register.insert(key, child);
                self.registered[child as usize] = true;
            }
        }
    }

    fn finish(mut self) -> Lexicon {
        if !self.nodes[0].children.is_empty() {
            self.replace_or_register(0);
        }
        // Renumber reachable nodes breadth-first with the root at 0.
        let mut new_id = vec![u32::MAX; self.nodes.len()];
        let mut order = vec![0u32];
        new_id[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let old = order[i] as usize;
            for &(_, c) in &self.nodes[old].children {
                if new_id[c as usize] == u32::MAX {
                    new_id[c as usize] = order.len() as u32;
                    order.push(c);
                }
            }
            i += 1;
        }
        let mut nodes = Vec::with_capacity(order.len());
        let mut arcs = Vec::new();
        for &old in &order {
            let n = &self.nodes[old as usize];
            let mut mask = 0u32;
            let first_arc = arcs.len() as u32;
            for &(l, c) in &n.children {
                mask |= 1 << l;
                arcs.push(new_id[c as usize]);
            }
            nodes.push(Node { mask, first_arc, terminal: n.terminal });
        }
        Lexicon { nodes, arcs, word_count: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn lex(words: &[&str]) -> Lexicon {
        Lexicon::build(words.iter().copied()).unwrap().0
    }

    fn all_strings(max_len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &frontier {
                for c in b'A'..=b'Z' {
                    let mut t = s.clone();
                    t.push(c as char);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn basic_membership() {
        let l = lex(&["AB", "ABS"]);
        assert!(l.contains("ABS"));
        assert!(l.contains("AB"));
        assert!(!l.contains("BA"));
        assert!(!l.contains("A"));
        assert!(!l.contains("ABC"));
        assert!(!l.contains("ab1"));
        assert_eq!(l.word_count(), 2);
    }

    #[test]
    fn hook_queries() {
        let l = lex(&["CAB"]);
        assert_eq!(l.hooks_after("CA"), vec!['B']);
        assert_eq!(l.hooks_before("AB"), vec!['C']);
        let l = lex(&["AB", "ABS", "CAB", "CABS", "SCAB"]);
        assert_eq!(l.hooks_after("CAB"), vec!['S']);
        assert_eq!(l.hooks_before("CAB"), vec!['S']);
        assert_eq!(l.hooks_after("AB"), vec!['S']);
    }

    #[test]
    fn lowercase_is_uppercased_and_bad_lengths_counted() {
        let (l, report) = Lexicon::build(["cab", "a", "ABCDEFGHIJKLMNOP", "CAB"]).unwrap();
        assert!(l.contains("CAB"));
        assert_eq!(report.accepted, 1);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.rejected_length, 2);
    }

    #[test]
    fn errors() {
        assert_eq!(Lexicon::build(Vec::<String>::new()).unwrap_err().code(), "empty_word_list");
        assert_eq!(Lexicon::build(["CAB", "C-B"]).unwrap_err().code(), "non_alphabetic");
    }

    #[test]
    fn membership_agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let letters = b"AEIOURSTLNCB";
        let random_word = |rng: &mut ChaCha8Rng| -> String {
            let len = rng.gen_range(1..=6);
            (0..len).map(|_| letters[rng.gen_range(0..letters.len())] as char).collect()
        };
        let source: Vec<String> = (0..400).map(|_| random_word(&mut rng)).filter(|w| w.len() >= 2).collect();
        let l = Lexicon::build(&source).unwrap().0;
        for _ in 0..1000 {
            let probe =
                if rng.gen_bool(0.3) { source[rng.gen_range(0..source.len())].clone() } else { random_word(&mut rng) };
            let expected = source.contains(&probe);
            assert_eq!(l.contains(&probe), expected, "{probe}");
        }
    }

    #[test]
    fn graph_is_acyclic_and_every_accepting_path_is_a_word() {
        let words = ["AB", "ABS", "BA", "CAB", "CABS", "SCAB", "BAA"];
        let set: HashSet<&str> = words.iter().copied().collect();
        let l = lex(&words);
        // Enumerate all accepting paths; a cycle would make this diverge.
        let mut stack = vec![(l.root(), Vec::<u8>::new())];
        let mut found = 0;
        while let Some((node, path)) = stack.pop() {
            assert!(path.len() <= 16, "path too long, graph has a cycle");
            if l.is_terminal(node) {
                let sep = path.iter().position(|&c| c == SEPARATOR);
                let word: String = match sep {
                    Some(i) => path[..i].iter().rev().chain(&path[i + 1..]).map(|&c| (b'A' + c) as char).collect(),
                    None => path.iter().rev().map(|&c| (b'A' + c) as char).collect(),
                };
                assert!(set.contains(word.as_str()), "{word}");
                found += 1;
            }
            for label in 0..=SEPARATOR {
                if let Some(c) = l.child(node, label) {
                    let mut p = path.clone();
                    p.push(label);
                    stack.push((c, p));
                }
            }
        }
        let expected: usize = words.iter().map(|w| w.len()).sum();
        assert_eq!(found, expected);
    }

    #[test]
    fn save_load_round_trip_small() {
        let l = lex(&["AB", "ABS", "BA"]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("small.lex");
        l.save(&path).unwrap();
        let loaded = Lexicon::load(&path).unwrap();
        assert_eq!(loaded, l);
        for s in all_strings(3) {
            assert_eq!(loaded.contains(&s), l.contains(&s), "{s}");
            assert_eq!(loaded.hooks_after(&s), l.hooks_after(&s));
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let l = lex(&["AB", "ABS", "BA"]);
        let bytes = l.to_bytes();
        for cut in [0, 10, bytes.len() / 2, bytes.len() - 1] {
            let err = Lexicon::from_bytes(&bytes[..cut]).unwrap_err();
            assert_eq!(err.code(), "corrupt_lexicon", "cut at {cut}");
        }
        let mut flipped = bytes.clone();
        flipped[30] ^= 1;
        assert_eq!(Lexicon::from_bytes(&flipped).unwrap_err().code(), "corrupt_lexicon");
    }

    #[test]
    fn sharing_shrinks_the_graph() {
        let words: Vec<String> =
            ["CAT", "BAT", "HAT", "MAT", "RAT", "SAT"].iter().flat_map(|w| [w.to_string(), format!("{w}S")]).collect();
        let l = Lexicon::build(&words).unwrap().0;
        let letters: usize = words.iter().map(|w| w.len()).sum();
        assert!(l.node_count() < letters, "{} nodes vs {letters} letters", l.node_count());
    }
}
