//! Reduced-word algebra in the free group on `k` generators.
//!
//! Letters are coded `2i` for `a_i` and `2i + 1` for its inverse, so the
//! derived ordering (and every enumeration in this module) is
//! lexicographic by generator index with the positive letter first:
//! `a < A < b < B < …`. In text, lowercase is a generator and uppercase its
//! inverse.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported rank (one lowercase letter per generator).
pub const MAX_RANK: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator < MAX_RANK, "generator index {generator} out of range");
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn from_code(code: usize) -> Letter {
        assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn generator(self) -> usize {
        self.code() / 2
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new(c as usize - 'a' as usize, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new(c as usize - 'A' as usize, true))
        } else {
            None
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

/// Free reduction of an arbitrary letter sequence.
pub fn reduce_word<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Deletes the first letter; the identity is fixed.
pub fn shift(x: &Word) -> Word {
    Word(x.0.get(1..).map(<[Letter]>::to_vec).unwrap_or_default())
}

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    /// Wraps letters that must already be reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Word> {
        if letters.windows(2).any(|p| p[1] == p[0].inverse()) {
            return Err(Error::InvalidInput("letter sequence is not reduced".into()));
        }
        Ok(Word(letters))
    }

    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[1] != p[0].inverse()));
        Word(letters)
    }

    /// Parses text such as `a b A b`, `abAb`, or `1` / empty for the identity.
    /// The input is freely reduced; letters beyond the rank are rejected.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        let trimmed = text.trim();
        if trimmed == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for c in trimmed.chars().filter(|c| !c.is_whitespace()) {
            let l = Letter::from_char(c)
                .ok_or_else(|| Error::InvalidInput(format!("`{c}` is not a generator letter")))?;
            if l.generator() >= rank {
                return Err(Error::InvalidInput(format!(
                    "letter `{c}` exceeds the rank {rank} of the presentation"
                )));
            }
            letters.push(l);
        }
        Ok(reduce_word(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        reduce_word(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Concatenation that must not cancel.
    pub fn concat_reduced(&self, other: &Word) -> Option<Word> {
        match (self.last(), other.first()) {
            (Some(a), Some(b)) if b == a.inverse() => None,
            _ => {
                let mut v = self.0.clone();
                v.extend_from_slice(&other.0);
                Some(Word(v))
            }
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.len() == 1 || b != a.inverse(),
            _ => true,
        }
    }

    /// First `n` letters (the whole word if shorter).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    /// Cyclic rotation `x_j … x_{n-1} x_0 … x_{j-1}`.
    pub fn rotate(&self, j: usize) -> Word {
        if self.is_empty() {
            return Word::identity();
        }
        let j = j % self.len();
        let mut v = self.0[j..].to_vec();
        v.extend_from_slice(&self.0[..j]);
        Word(v)
    }

    /// `self` repeated `m` times; only meaningful for cyclically reduced words.
    pub fn power(&self, m: usize) -> Word {
        let mut acc = Word::identity();
        for _ in 0..m {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_char().to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Decomposes a nonidentity word as `x = conjugator⁻¹ · core · conjugator`
/// with `core` cyclically reduced and no cancellation in the product.
pub fn cyclic_reduce(x: &Word) -> Result<(Word, Word)> {
    if x.is_identity() {
        return Err(Error::InvalidInput("the identity has no cyclic reduction".into()));
    }
    let l = x.letters();
    let (mut lo, mut hi) = (0usize, l.len());
    while hi - lo >= 2 && l[hi - 1] == l[lo].inverse() {
        lo += 1;
        hi -= 1;
    }
    let core = Word(l[lo..hi].to_vec());
    let conjugator = Word(l[hi..].to_vec());
    Ok((core, conjugator))
}

/// Number of reduced words of length exactly `m` whose first letter avoids
/// `forbidden` first letters: `(2k - |forbidden|)·(2k-1)^(m-1)`.
pub fn count_words(rank: usize, m: usize, forbidden: usize) -> u128 {
    if m == 0 {
        return 1;
    }
    let first = (2 * rank).saturating_sub(forbidden) as u128;
    first * ((2 * rank - 1) as u128).pow(m as u32 - 1)
}

/// Lexicographic stream of the reduced words of length `m` whose first
/// letter avoids a forbidden set.
#[derive(Debug, Clone)]
pub struct ReducedWords {
    alphabet: usize,
    forbidden_mask: u64,
    current: Option<Vec<Letter>>,
    started: bool,
}

pub fn enumerate_words(rank: usize, m: usize, forbidden: &[Letter]) -> ReducedWords {
    let forbidden_mask = forbidden.iter().fold(0u64, |acc, l| acc | 1 << l.code());
    let alphabet = 2 * rank;
    let mut it = ReducedWords {
        alphabet,
        forbidden_mask,
        current: None,
        started: false,
    };
    let mut word = Vec::with_capacity(m);
    if it.fill_from(&mut word, m) {
        it.current = Some(word);
    }
    it
}

impl ReducedWords {
    fn admissible(&self, pos: usize, prev: Option<Letter>, code: usize) -> bool {
        if pos == 0 {
            self.forbidden_mask & (1 << code) == 0
        } else {
            prev.map_or(true, |p| code != p.inverse().code())
        }
    }

    fn next_code(&self, pos: usize, prev: Option<Letter>, from: usize) -> Option<usize> {
        (from..self.alphabet).find(|&c| self.admissible(pos, prev, c))
    }

    /// Extends `word` with minimal admissible letters up to length `m`.
    fn fill_from(&self, word: &mut Vec<Letter>, m: usize) -> bool {
        while word.len() < m {
            let pos = word.len();
            match self.next_code(pos, word.last().copied(), 0) {
                Some(c) => word.push(Letter::from_code(c)),
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) {
        let Some(mut word) = self.current.take() else {
            return;
        };
        let m = word.len();
        while let Some(last) = word.pop() {
            let pos = word.len();
            if let Some(c) = self.next_code(pos, word.last().copied(), last.code() + 1) {
                word.push(Letter::from_code(c));
                if self.fill_from(&mut word, m) {
                    self.current = Some(word);
                }
                return;
            }
        }
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.started {
            self.advance();
        }
        self.started = true;
        self.current.as_ref().map(|w| Word(w.clone()))
    }
}

/// Dense lexicographic indexing of all reduced words of length at most
/// `max_len`, ordered by length and then lexicographically.
#[derive(Debug, Clone)]
pub struct WordIndexer {
    rank: usize,
    max_len: usize,
    offsets: Vec<usize>,
    radix_pows: Vec<usize>,
}

impl WordIndexer {
    pub fn new(rank: usize, max_len: usize) -> WordIndexer {
        let mut offsets = vec![0usize];
        for j in 0..=max_len {
            let c = count_words(rank, j, 0) as usize;
            offsets.push(offsets[j] + c);
        }
        let radix_pows = (0..=max_len).map(|j| (2 * rank - 1).pow(j as u32)).collect();
        WordIndexer {
            rank,
            max_len,
            offsets,
            radix_pows,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Total number of indexed words.
    pub fn len(&self) -> usize {
        self.offsets[self.max_len + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index range occupied by words of length `j`.
    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    #[inline]
    pub fn index_of(&self, letters: &[Letter]) -> usize {
        let j = letters.len();
        debug_assert!(j <= self.max_len);
        if j == 0 {
            return 0;
        }
        let mut r = letters[0].code() * self.radix_pows[j - 1];
        for i in 1..j {
            let z = letters[i].code();
            let inv_prev = letters[i - 1].inverse().code();
            let rel = z - (z > inv_prev) as usize;
            r += rel * self.radix_pows[j - 1 - i];
        }
        self.offsets[j] + r
    }

    pub fn word_at(&self, index: usize) -> Word {
        let j = (0..=self.max_len)
            .find(|&j| index < self.offsets[j + 1])
            .expect("index out of range");
        let mut r = index - self.offsets[j];
        let mut letters: Vec<Letter> = Vec::with_capacity(j);
        for i in 0..j {
            let p = self.radix_pows[j - 1 - i];
            let digit = r / p;
            r %= p;
            let code = if i == 0 {
                digit
            } else {
                let inv_prev = letters[i - 1].inverse().code();
                if digit >= inv_prev {
                    digit + 1
                } else {
                    digit
                }
            };
            letters.push(Letter::from_code(code));
        }
        Word(letters)
    }
}

/// A nontrivial conjugacy class, represented by its cyclically reduced
/// core and the distinct rotations of the core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjClassSpec {
    core: Word,
    rotations: Vec<Word>,
}

impl ConjClassSpec {
    /// The class of any nonidentity word.
    pub fn new(x: &Word) -> Result<ConjClassSpec> {
        let (core, _) = cyclic_reduce(x)?;
        let mut rotations: Vec<Word> = Vec::new();
        for j in 0..core.len() {
            let r = core.rotate(j);
            if j > 0 && r == core {
                // periodic core: rotations repeat from here on
                break;
            }
            rotations.push(r);
        }
        Ok(ConjClassSpec { core, rotations })
    }

    pub fn core(&self) -> &Word {
        &self.core
    }

    /// Minimal word length in the class.
    pub fn min_length(&self) -> usize {
        self.core.len()
    }

    pub fn rotations(&self) -> &[Word] {
        &self.rotations
    }

    /// First letters a conjugator of `rotation` may not start with:
    /// `g'_1` and `(g'_last)⁻¹`.
    pub fn forbidden_first(&self, rotation: usize) -> [Letter; 2] {
        let g = &self.rotations[rotation];
        [g.first().unwrap(), g.last().unwrap().inverse()]
    }
}

/// An element `w⁻¹ g′ w` of a conjugacy class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassElement {
    pub rotation: usize,
    pub conjugator: Word,
}

impl ClassElement {
    pub fn element(&self, spec: &ConjClassSpec) -> Word {
        let w = &self.conjugator;
        let mut v = w.inverse().0;
        v.extend_from_slice(spec.rotations[self.rotation].letters());
        v.extend_from_slice(w.letters());
        Word(v)
    }
}

/// Streams each element of the class of word length `min_length + 2m`
/// exactly once, rotation by rotation, conjugators in lexicographic order.
pub fn class_elements<'a>(spec: &'a ConjClassSpec, rank: usize, m: usize) -> impl Iterator<Item = ClassElement> + 'a {
    (0..spec.rotations.len()).flat_map(move |rotation| {
        let forbidden = spec.forbidden_first(rotation);
        enumerate_words(rank, m, &forbidden).map(move |conjugator| ClassElement { rotation, conjugator })
    })
}
