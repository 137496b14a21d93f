//! Dot-bracket structures: parsing, saturation and order.
//!
//! Positions in the public API are 1-based, as in the usual dot-bracket
//! conventions. A pair `(i, j)` always has `i < j` and `j - i >= 2`: every
//! hairpin encloses at least one unpaired position.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Smallest allowed distance `j - i` of a pair `(i, j)`.
pub const MIN_PAIR_DISTANCE: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty structure")]
    EmptyInput,
    #[error("invalid character {ch:?} at position {position}")]
    InvalidCharacter { position: usize, ch: char },
    #[error("unbalanced bracket at position {position}")]
    UnbalancedBrackets { position: usize },
    #[error("pair ({i},{j}) encloses no unpaired position")]
    MinLoopViolation { i: usize, j: usize },
    #[error("position {position} is outside 1..={length}")]
    PositionOutOfRange { position: usize, length: usize },
    #[error("position {position} is paired twice")]
    PositionReused { position: usize },
    #[error("pairs ({i},{j}) and ({k},{l}) cross")]
    CrossingPairs { i: usize, j: usize, k: usize, l: usize },
}

/// Order of a structure; zero exactly for structures without pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OrderValue(pub u32);

impl OrderValue {
    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for OrderValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A validated secondary structure.
///
/// Invariants: the partner table is an involution without fixed points, all
/// pairs are non-crossing and respect [`MIN_PAIR_DISTANCE`], and `text` is
/// the dot-bracket rendering of the partner table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    // 0-based partner table.
    partner: Vec<Option<usize>>,
    text: String,
}

impl Structure {
    /// Builds a structure of the given length from 1-based pairs.
    pub fn from_pairs(length: usize, pairs: &[(usize, usize)]) -> Result<Self, ParseError> {
        if length == 0 {
            return Err(ParseError::EmptyInput);
        }
        let mut partner = vec![None; length];
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            for position in [i, j] {
                if position == 0 || position > length {
                    return Err(ParseError::PositionOutOfRange { position, length });
                }
            }
            if j - i < MIN_PAIR_DISTANCE {
                return Err(ParseError::MinLoopViolation { i, j });
            }
            for position in [i, j] {
                if partner[position - 1].is_some() {
                    return Err(ParseError::PositionReused { position });
                }
            }
            partner[i - 1] = Some(j - 1);
            partner[j - 1] = Some(i - 1);
        }
        // Non-crossing check: a stack scan must close pairs in LIFO order.
        let mut stack: Vec<usize> = Vec::new();
        for (pos, p) in partner.iter().enumerate() {
            match *p {
                Some(q) if q > pos => stack.push(pos),
                Some(q) => {
                    let top = stack.pop().expect("opening position recorded before its partner");
                    if top != q {
                        let (k, l) = (top, partner[top].expect("paired"));
                        return Err(ParseError::CrossingPairs {
                            i: q + 1,
                            j: pos + 1,
                            k: k + 1,
                            l: l + 1,
                        });
                    }
                }
                None => {}
            }
        }
        let text = render(&partner);
        Ok(Structure { partner, text })
    }

    /// The unpaired structure of the given length.
    pub fn unpaired(length: usize) -> Result<Self, ParseError> {
        Self::from_pairs(length, &[])
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    /// Always false: the empty string is not a structure.
    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Partner of a 1-based position, if paired.
    pub fn partner(&self, position: usize) -> Option<usize> {
        self.partner
            .get(position.checked_sub(1)?)
            .copied()
            .flatten()
            .map(|q| q + 1)
    }

    /// All pairs `(i, j)`, `i < j`, 1-based, sorted by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| match *p {
                Some(j) if j > i => Some((i + 1, j + 1)),
                _ => None,
            })
            .collect()
    }

    pub fn pair_count(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count() / 2
    }

    /// Dot-bracket serialization; `parse(s.serialize()) == s`.
    pub fn serialize(&self) -> String {
        self.text.clone()
    }

    /// Wraps the structure in one enclosing pair: `s` becomes `(s)`.
    pub fn enclose(&self) -> Structure {
        let n = self.len();
        let mut partner = Vec::with_capacity(n + 2);
        partner.push(Some(n + 1));
        partner.extend(self.partner.iter().map(|p| p.map(|q| q + 1)));
        partner.push(Some(0));
        let text = render(&partner);
        Structure { partner, text }
    }

    /// Adds the 1-based pair `(i, j)`, validating the result.
    pub fn with_pair(&self, i: usize, j: usize) -> Result<Structure, ParseError> {
        let mut pairs = self.pairs();
        pairs.push((i, j));
        Structure::from_pairs(self.len(), &pairs)
    }
}

fn render(partner: &[Option<usize>]) -> String {
    partner
        .iter()
        .enumerate()
        .map(|(i, p)| match *p {
            None => '.',
            Some(j) if j > i => '(',
            Some(_) => ')',
        })
        .collect()
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Structure {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses a dot-bracket string, enforcing balance and the minimum loop size.
pub fn parse(text: &str) -> Result<Structure, ParseError> {
    if text.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut partner = vec![None; text.chars().count()];
    let mut stack = Vec::new();
    for (pos, ch) in text.chars().enumerate() {
        match ch {
            '.' => {}
            '(' => stack.push(pos),
            ')' => {
                let open = stack
                    .pop()
                    .ok_or(ParseError::UnbalancedBrackets { position: pos + 1 })?;
                if pos - open < MIN_PAIR_DISTANCE {
                    return Err(ParseError::MinLoopViolation {
                        i: open + 1,
                        j: pos + 1,
                    });
                }
                partner[open] = Some(pos);
                partner[pos] = Some(open);
            }
            _ => {
                return Err(ParseError::InvalidCharacter {
                    position: pos + 1,
                    ch,
                })
            }
        }
    }
    if let Some(&open) = stack.last() {
        return Err(ParseError::UnbalancedBrackets { position: open + 1 });
    }
    Ok(Structure {
        partner,
        text: text.to_owned(),
    })
}

/// Dot-bracket serialization of `s`.
pub fn serialize(s: &Structure) -> String {
    s.serialize()
}

/// Every pair that could be added to `s` while keeping it a valid structure,
/// 1-based and sorted lexicographically.
///
/// Two unpaired positions can pair without crossing iff they lie in the same
/// loop, i.e. share the same innermost enclosing pair (or both lie in the
/// exterior loop).
pub fn addable_pairs(s: &Structure) -> Vec<(usize, usize)> {
    let n = s.len();
    // Innermost enclosing opening position, `None` for the exterior loop.
    let mut stack: Vec<usize> = Vec::new();
    let loop_of: Vec<Option<usize>> = s
        .partner
        .iter()
        .enumerate()
        .map(|(pos, p)| match *p {
            Some(q) if q > pos => {
                let outer = stack.last().copied();
                stack.push(pos);
                outer
            }
            Some(_) => {
                stack.pop();
                stack.last().copied()
            }
            None => stack.last().copied(),
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        if s.partner[i].is_some() {
            continue;
        }
        for j in i + MIN_PAIR_DISTANCE..n {
            if s.partner[j].is_none() && loop_of[i] == loop_of[j] {
                out.push((i + 1, j + 1));
            }
        }
    }
    out
}

/// True iff no pair can be added to `s`.
pub fn is_saturated(s: &Structure) -> bool {
    addable_pairs(s).is_empty()
}

/// Order by literal rewriting.
///
/// Dots are erased; then each round deletes every maximal substring of the
/// form `(^k)^k` simultaneously. The order is the number of rounds needed to
/// reach the empty string.
pub fn order(s: &Structure) -> OrderValue {
    let mut word: Vec<u8> = s.text.bytes().filter(|&c| c != b'.').collect();
    let mut rounds = 0;
    while !word.is_empty() {
        let mut delete = vec![false; word.len()];
        for k in 0..word.len() - 1 {
            if word[k] == b'(' && word[k + 1] == b')' {
                let (mut lo, mut hi) = (k, k + 1);
                while lo > 0 && hi + 1 < word.len() && word[lo - 1] == b'(' && word[hi + 1] == b')'
                {
                    lo -= 1;
                    hi += 1;
                }
                delete[lo..=hi].iter_mut().for_each(|d| *d = true);
            }
        }
        word = word
            .iter()
            .zip(&delete)
            .filter(|(_, &d)| !d)
            .map(|(&c, _)| c)
            .collect();
        rounds += 1;
    }
    OrderValue(rounds)
}

/// Order by a single pass over the nesting forest.
///
/// A pair without inner pairs has order 1. Otherwise a pair takes the
/// maximal order among its directly enclosed pairs, plus one when that
/// maximum is attained at least twice. Unary nesting chains therefore
/// collapse, and the order of the whole structure is the maximum over its
/// outermost pairs.
pub fn order_fast(s: &Structure) -> OrderValue {
    // (max child order, multiplicity of max) for every open pair.
    let mut stack: Vec<(u32, u32)> = Vec::new();
    let mut top = 0;
    for c in s.text.bytes() {
        match c {
            b'(' => stack.push((0, 0)),
            b')' => {
                let (max, count) = stack.pop().expect("balanced structure");
                let value = match (max, count) {
                    (0, _) => 1,
                    (m, c) if c >= 2 => m + 1,
                    (m, _) => m,
                };
                match stack.last_mut() {
                    Some(parent) => {
                        if value > parent.0 {
                            *parent = (value, 1);
                        } else if value == parent.0 {
                            parent.1 += 1;
                        }
                    }
                    None => top = top.max(value),
                }
            }
            _ => {}
        }
    }
    OrderValue(top)
}
