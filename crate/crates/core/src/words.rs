//! Free-group alphabets, freely reduced words and multi-pattern occurrence search.
//!
//! Letters are interned as small integers: generator `g` is encoded as `2g`
//! and its formal inverse as `2g + 1`. The textual form used at every
//! boundary is `x*y^-1*x`, with `1` denoting the empty word.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator name {0:?} is not a valid identifier")]
    BadGeneratorName(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("malformed word {0:?}")]
    Malformed(String),
}

/// A letter of `S ∪ S⁻¹`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u32);

impl Letter {
    pub fn new(generator: u32, inverse: bool) -> Self {
        Letter(generator * 2 + inverse as u32)
    }

    pub fn generator(self) -> u32 {
        self.0 / 2
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> u32 {
        self.0
    }
}

/// Ordered set of generator names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            let name = name.into();
            if !valid_name(&name) {
                return Err(WordError::BadGeneratorName(name));
            }
            if out.index.contains_key(&name) {
                return Err(WordError::DuplicateGenerator(name));
            }
            out.index.insert(name.clone(), out.names.len() as u32);
            out.names.push(name);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, generator: u32) -> &str {
        &self.names[generator as usize]
    }

    /// All letters in the fixed order `x < x⁻¹ < y < y⁻¹ < ...`.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len() as u32).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
    }

    pub fn parse_letter(&self, token: &str) -> Result<Letter, WordError> {
        let token = token.trim();
        let (name, inverse) = match token.strip_suffix("^-1") {
            Some(base) => (base.trim_end(), true),
            None => (token, false),
        };
        self.index
            .get(name)
            .map(|&g| Letter::new(g, inverse))
            .ok_or_else(|| WordError::UnknownSymbol(token.to_string()))
    }

    /// Parses `x*y^-1*x` (or `1`) into a reduced word.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(WordError::Malformed(text.to_string()));
        }
        let mut letters = Vec::new();
        for factor in text.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(WordError::Malformed(text.to_string()));
            }
            if factor == "1" {
                continue;
            }
            letters.push(self.parse_letter(factor)?);
        }
        Ok(reduce(letters))
    }

    pub fn format_letter(&self, letter: Letter) -> String {
        if letter.is_inverse() {
            format!("{}^-1", self.name(letter.generator()))
        } else {
            self.name(letter.generator()).to_string()
        }
    }

    pub fn format_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "1".to_string();
        }
        word.letters()
            .iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn contains(&self, letter: Letter) -> bool {
        (letter.generator() as usize) < self.names.len()
    }
}

/// A freely reduced word; the empty word is the identity `1`.
///
/// Ordering is shortlex: shorter words first, then letter by letter in the
/// alphabet order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
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

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// Wraps letters that are already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1].inverse()));
        Word(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
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

    /// Reduced product together with the number of letter pairs cancelled at
    /// the boundary.
    pub fn concat(&self, other: &Word) -> (Word, usize) {
        let mut k = 0;
        while k < self.0.len() && k < other.0.len() {
            if self.0[self.0.len() - 1 - k] != other.0[k].inverse() {
                break;
            }
            k += 1;
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len() - 2 * k);
        out.extend_from_slice(&self.0[..self.0.len() - k]);
        out.extend_from_slice(&other.0[k..]);
        (Word(out), k)
    }

    pub fn mul(&self, other: &Word) -> Word {
        self.concat(other).0
    }

    /// `left · self · right`, reduced.
    pub fn sandwich(&self, left: &Word, right: &Word) -> Word {
        left.mul(self).mul(right)
    }

    /// True when `self · other` involves no cancellation.
    pub fn joins_cleanly(&self, other: &Word) -> bool {
        match (self.last(), other.first()) {
            (Some(a), Some(b)) => a != b.inverse(),
            _ => true,
        }
    }

    pub fn subword(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    /// Letter-order reversal (not inversion). Reversal maps reduced words to
    /// reduced words and exchanges left and right.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn contains_subword(&self, pattern: &Word) -> bool {
        pattern.is_empty() || self.0.windows(pattern.len()).any(|w| w == pattern.0.as_slice())
    }

    /// All contiguous nonempty subwords, deduplicated by the caller.
    pub fn subwords(&self) -> impl Iterator<Item = Word> + '_ {
        let n = self.0.len();
        (0..n).flat_map(move |i| (i + 1..=n).map(move |j| Word(self.0[i..j].to_vec())))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        reduce(v)
    }
}

impl fmt::Display for Word {
    /// Alphabet-free rendering (`g0`, `g0^-1`); use [`Alphabet::format_word`]
    /// for user-facing output.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "g{}", l.generator())?;
            if l.is_inverse() {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// A positioned subword of a host word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub start: usize,
    pub len: usize,
    pub pattern: Word,
}

impl Occurrence {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn contains(&self, other: &Occurrence) -> bool {
        self.start <= other.start && other.end() <= self.end()
    }

    /// Common letter positions of two occurrences in the same host.
    pub fn overlap(&self, other: &Occurrence) -> Option<(usize, usize)> {
        let s = self.start.max(other.start);
        let e = self.end().min(other.end());
        (s < e).then_some((s, e))
    }
}

/// Aho–Corasick automaton over letters.
#[derive(Clone, Debug)]
pub struct PatternMatcher {
    patterns: Vec<Word>,
    goto: Vec<HashMap<Letter, usize>>,
    fail: Vec<usize>,
    // pattern indices ending at each state, including those inherited via
    // dictionary suffix links
    output: Vec<Vec<usize>>,
}

impl PatternMatcher {
    /// Empty patterns are ignored.
    pub fn new(patterns: &[Word]) -> Self {
        let mut goto: Vec<HashMap<Letter, usize>> = vec![HashMap::new()];
        let mut output: Vec<Vec<usize>> = vec![Vec::new()];
        let mut kept = Vec::new();
        for p in patterns {
            if p.is_empty() || kept.contains(p) {
                continue;
            }
            let mut state = 0;
            for &l in p.letters() {
                state = match goto[state].get(&l) {
                    Some(&s) => s,
                    None => {
                        goto.push(HashMap::new());
                        output.push(Vec::new());
                        let s = goto.len() - 1;
                        goto[state].insert(l, s);
                        s
                    }
                };
            }
            output[state].push(kept.len());
            kept.push(p.clone());
        }
        let mut fail = vec![0; goto.len()];
        let mut queue = VecDeque::new();
        let root_children: Vec<usize> = goto[0].values().copied().collect();
        for s in root_children {
            queue.push_back(s);
        }
        while let Some(state) = queue.pop_front() {
            let edges: Vec<(Letter, usize)> = goto[state].iter().map(|(&l, &s)| (l, s)).collect();
            for (l, next) in edges {
                let mut f = fail[state];
                let target = loop {
                    if let Some(&t) = goto[f].get(&l) {
                        if t != next {
                            break t;
                        }
                    }
                    if f == 0 {
                        break 0;
                    }
                    f = fail[f];
                };
                fail[next] = target;
                let inherited = output[target].clone();
                output[next].extend(inherited);
                queue.push_back(next);
            }
        }
        PatternMatcher {
            patterns: kept,
            goto,
            fail,
            output,
        }
    }

    pub fn patterns(&self) -> &[Word] {
        &self.patterns
    }

    fn step(&self, mut state: usize, l: Letter) -> usize {
        loop {
            if let Some(&s) = self.goto[state].get(&l) {
                return s;
            }
            if state == 0 {
                return 0;
            }
            state = self.fail[state];
        }
    }

    /// Every (pattern, position) match, sorted by start then length.
    pub fn find_all(&self, host: &Word) -> Vec<Occurrence> {
        let mut out = Vec::new();
        let mut state = 0;
        for (i, &l) in host.letters().iter().enumerate() {
            state = self.step(state, l);
            for &p in &self.output[state] {
                let len = self.patterns[p].len();
                out.push(Occurrence {
                    start: i + 1 - len,
                    len,
                    pattern: self.patterns[p].clone(),
                });
            }
        }
        out.sort_by(|a, b| a.start.cmp(&b.start).then(a.len.cmp(&b.len)));
        out
    }
}

pub fn find_occurrences(patterns: &[Word], host: &Word) -> Vec<Occurrence> {
    PatternMatcher::new(patterns).find_all(host)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(["x", "y", "z"]).unwrap()
    }

    fn w(a: &Alphabet, s: &str) -> Word {
        a.parse_word(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let a = abc();
        assert_eq!(w(&a, "x*x^-1*y"), w(&a, "y"));
        assert_eq!(reduce(Vec::new()), Word::identity());
        assert_eq!(w(&a, "x*y*y^-1*x^-1"), Word::identity());
        assert_eq!(a.format_word(&w(&a, "x*x^-1")), "1");
    }

    #[test]
    fn concat_examples() {
        let a = abc();
        assert_eq!(w(&a, "x*y").concat(&w(&a, "y^-1*z")), (w(&a, "x*z"), 1));
        let u = w(&a, "x*y^-1");
        assert_eq!(u.concat(&Word::identity()), (u.clone(), 0));
        assert_eq!(w(&a, "x*y").concat(&w(&a, "y^-1*x^-1")), (Word::identity(), 2));
        assert_eq!(u.concat(&u.inverse()), (Word::identity(), u.len()));
    }

    #[test]
    fn invert_examples() {
        let a = abc();
        assert_eq!(w(&a, "x*y^-1").inverse(), w(&a, "y*x^-1"));
        assert_eq!(Word::identity().inverse(), Word::identity());
        assert_eq!(w(&a, "x").inverse(), w(&a, "x^-1"));
    }

    #[test]
    fn parse_errors() {
        let a = abc();
        assert!(matches!(a.parse_word("q"), Err(WordError::UnknownSymbol(_))));
        assert!(matches!(a.parse_word("x**y"), Err(WordError::Malformed(_))));
        assert!(Alphabet::new(["x", "x"]).is_err());
        assert!(Alphabet::new(["1x"]).is_err());
        assert!(Alphabet::new([""]).is_err());
    }

    #[test]
    fn occurrences_examples() {
        let a = abc();
        let occ = find_occurrences(&[w(&a, "x*y")], &w(&a, "x*y*x*y"));
        assert_eq!(occ.iter().map(|o| o.start).collect::<Vec<_>>(), vec![0, 2]);
        assert!(find_occurrences(&[w(&a, "z")], &w(&a, "x*y*x*y")).is_empty());
        let occ = find_occurrences(&[w(&a, "x"), w(&a, "x*y")], &w(&a, "x*y"));
        assert_eq!(
            occ.iter().map(|o| (o.start, o.len)).collect::<Vec<_>>(),
            vec![(0, 1), (0, 2)]
        );
    }

    #[test]
    fn shortlex_order() {
        let a = abc();
        assert!(w(&a, "y") < w(&a, "x*x"));
        assert!(w(&a, "x") < w(&a, "x^-1"));
        assert!(w(&a, "x^-1") < w(&a, "y"));
        assert!(Word::identity() < w(&a, "x"));
    }
}
