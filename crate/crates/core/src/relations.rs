//! Compatibility-closed relation systems, small pieces and the Λ-measure.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, Field, Poly};
use crate::words::{Alphabet, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("compatibility closure diverged: {reason} (reached {relations} relations, longest monomial {longest})")]
    ClosureDiverged {
        reason: String,
        relations: usize,
        longest: usize,
    },
    #[error("word {0} is not in the monomial set M")]
    NotInM(String),
    #[error("generator {0} is zero")]
    ZeroGenerator(usize),
    #[error("tau must be at least 1")]
    BadTau,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ClosureCaps {
    pub max_relations: usize,
    pub max_word_length: usize,
}

impl Default for ClosureCaps {
    fn default() -> Self {
        ClosureCaps {
            max_relations: 1_000_000,
            max_word_length: 256,
        }
    }
}

/// Λ value: a finite count of small pieces, or ∞.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lambda {
    Finite(u32),
    Infinite,
}

impl Lambda {
    /// `Λ ≥ t` for a possibly negative threshold.
    pub fn at_least(self, t: i64) -> bool {
        match self {
            Lambda::Infinite => true,
            Lambda::Finite(v) => v as i64 >= t,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(v) => write!(f, "{v}"),
            Lambda::Infinite => write!(f, "inf"),
        }
    }
}

/// A presentation file: field, τ, alphabet and generating relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub field: Field,
    pub tau: u32,
    pub alphabet: Alphabet,
    pub relations: Vec<Poly>,
}

impl Presentation {
    /// Parses the line format. Blank lines and `#` comments are skipped;
    /// `field` and `alphabet` must precede the first `rel`.
    pub fn parse(text: &str) -> Result<Presentation, RelationError> {
        let mut field = None;
        let mut tau = None;
        let mut alphabet: Option<Alphabet> = None;
        let mut relations = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| RelationError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (keyword, rest) = match content.split_once(char::is_whitespace) {
                Some((k, r)) => (k, r.trim()),
                None => (content, ""),
            };
            match keyword {
                "field" => {
                    if field.is_some() {
                        return Err(err("duplicate field line".into()));
                    }
                    field = Some(rest.parse::<Field>().map_err(|e| err(e.to_string()))?);
                }
                "tau" => {
                    if tau.is_some() {
                        return Err(err("duplicate tau line".into()));
                    }
                    let t: u32 = rest
                        .parse()
                        .map_err(|_| err(format!("bad tau {rest:?}")))?;
                    if t == 0 {
                        return Err(err("tau must be at least 1".into()));
                    }
                    tau = Some(t);
                }
                "alphabet" => {
                    if alphabet.is_some() {
                        return Err(err("duplicate alphabet line".into()));
                    }
                    alphabet = Some(
                        Alphabet::new(rest.split_whitespace()).map_err(|e| err(e.to_string()))?,
                    );
                }
                "rel" => {
                    let (Some(f), Some(a)) = (field, alphabet.as_ref()) else {
                        return Err(err("rel before field and alphabet".into()));
                    };
                    let p = Poly::parse(rest, f, a).map_err(|e| err(e.to_string()))?;
                    if p.is_zero() {
                        return Err(err("zero relation".into()));
                    }
                    relations.push(p);
                }
                other => return Err(err(format!("unknown keyword {other:?}"))),
            }
        }
        let missing = |what: &str| RelationError::Parse {
            line: 0,
            message: format!("missing {what} line"),
        };
        Ok(Presentation {
            field: field.ok_or_else(|| missing("field"))?,
            tau: tau.ok_or_else(|| missing("tau"))?,
            alphabet: alphabet.ok_or_else(|| missing("alphabet"))?,
            relations,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "field {}\ntau {}\nalphabet {}\n",
            self.field,
            self.tau,
            self.alphabet.names().join(" ")
        );
        for r in &self.relations {
            out.push_str("rel ");
            out.push_str(&r.format(&self.alphabet));
            out.push('\n');
        }
        out
    }
}

/// Trie over a subword-closed word set. Every node spells an element.
#[derive(Clone, Debug, Default)]
pub struct FactorTrie {
    children: Vec<HashMap<Letter, u32>>,
}

impl FactorTrie {
    fn new() -> Self {
        FactorTrie {
            children: vec![HashMap::new()],
        }
    }

    fn insert(&mut self, letters: &[Letter]) {
        let mut node = 0usize;
        for &l in letters {
            node = match self.children[node].get(&l) {
                Some(&n) => n as usize,
                None => {
                    self.children.push(HashMap::new());
                    let n = self.children.len() - 1;
                    self.children[node].insert(l, n as u32);
                    n
                }
            };
        }
    }

    pub fn contains(&self, letters: &[Letter]) -> bool {
        let mut node = 0usize;
        for l in letters {
            match self.children[node].get(l) {
                Some(&n) => node = n as usize,
                None => return false,
            }
        }
        true
    }

    /// Length of the longest element that is a prefix of `letters`.
    pub fn longest_prefix(&self, letters: &[Letter]) -> usize {
        let mut node = 0usize;
        for (k, l) in letters.iter().enumerate() {
            match self.children[node].get(l) {
                Some(&n) => node = n as usize,
                None => return k,
            }
        }
        letters.len()
    }
}

/// Suffix trie of the support monomials, counting (monomial, position)
/// pairs per node.
struct SuffixCounter {
    children: Vec<HashMap<Letter, u32>>,
    count: Vec<u32>,
}

impl SuffixCounter {
    fn build<'a>(words: impl Iterator<Item = &'a Word>) -> Self {
        let mut t = SuffixCounter {
            children: vec![HashMap::new()],
            count: vec![0],
        };
        for w in words {
            let letters = w.letters();
            for j in 0..letters.len() {
                let mut node = 0usize;
                for &l in &letters[j..] {
                    node = match t.children[node].get(&l) {
                        Some(&n) => n as usize,
                        None => {
                            t.children.push(HashMap::new());
                            t.count.push(0);
                            let n = t.children.len() - 1;
                            t.children[node].insert(l, n as u32);
                            n
                        }
                    };
                    t.count[node] += 1;
                }
            }
        }
        t
    }

    /// Counts along the path spelled by `letters` (all of which must exist).
    fn path_counts(&self, letters: &[Letter]) -> Vec<u32> {
        let mut node = 0usize;
        let mut out = Vec::with_capacity(letters.len());
        for l in letters {
            node = self.children[node][l] as usize;
            out.push(self.count[node]);
        }
        out
    }
}

/// Left-translation class key: the least normalized `m⁻¹·p`, and the
/// monomial `m` attaining it.
fn left_class_key(p: &Poly) -> (Poly, Word) {
    let e = Word::identity();
    p.monomials()
        .map(|m| (unit_at_identity(&p.translate(&m.inverse(), &e)), m.clone()))
        .min()
        .expect("nonzero relation")
}

fn right_class_key(p: &Poly) -> (Poly, Word) {
    let e = Word::identity();
    p.monomials()
        .map(|m| (unit_at_identity(&p.translate(&e, &m.inverse())), m.clone()))
        .min()
        .expect("nonzero relation")
}

fn unit_at_identity(p: &Poly) -> Poly {
    let c = p.coeff(&Word::identity()).expect("identity monomial present");
    p.scale(&c.inv())
}

/// A compatibility-closed relation system with its derived data.
#[derive(Clone, Debug)]
pub struct RelationSystem {
    field: Field,
    tau: u32,
    alphabet: Alphabet,
    caps: ClosureCaps,
    generators: Vec<Poly>,
    relations: Vec<Poly>,
    relation_index: HashMap<Poly, usize>,
    support: BTreeSet<Word>,
    monomials: BTreeSet<Word>,
    pieces: BTreeSet<Word>,
    m_trie: FactorTrie,
    s_trie: FactorTrie,
    by_monomial: HashMap<Word, Vec<usize>>,
}

/// Fixed point of the left/right Compatibility moves, as normalized
/// representatives in discovery order.
fn closure_fixed_point(generators: &[Poly], caps: &ClosureCaps) -> Result<Vec<Poly>, RelationError> {
    let mut seen: HashSet<Poly> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    let mut longest = 0usize;
    let e = Word::identity();
    let mut admit = |p: Poly,
                     seen: &mut HashSet<Poly>,
                     order: &mut Vec<Poly>,
                     queue: &mut VecDeque<Poly>|
     -> Result<(), RelationError> {
        if seen.contains(&p) {
            return Ok(());
        }
        longest = longest.max(p.max_len());
        if longest > caps.max_word_length {
            return Err(RelationError::ClosureDiverged {
                reason: format!("monomial longer than {}", caps.max_word_length),
                relations: order.len(),
                longest,
            });
        }
        if order.len() >= caps.max_relations {
            return Err(RelationError::ClosureDiverged {
                reason: format!("relation cap {} exceeded", caps.max_relations),
                relations: order.len(),
                longest,
            });
        }
        seen.insert(p.clone());
        order.push(p.clone());
        queue.push_back(p);
        Ok(())
    };
    for (i, g) in generators.iter().enumerate() {
        if g.is_zero() {
            return Err(RelationError::ZeroGenerator(i));
        }
        admit(g.normalized(), &mut seen, &mut order, &mut queue)?;
    }
    while let Some(p) = queue.pop_front() {
        let mut firsts = BTreeSet::new();
        let mut lasts = BTreeSet::new();
        for m in p.monomials() {
            if let (Some(f), Some(l)) = (m.first(), m.last()) {
                firsts.insert(f);
                lasts.insert(l);
            }
        }
        for f in firsts {
            let q = p.translate(&Word::letter(f.inverse()), &e).normalized();
            admit(q, &mut seen, &mut order, &mut queue)?;
        }
        for l in lasts {
            let q = p.translate(&e, &Word::letter(l.inverse())).normalized();
            admit(q, &mut seen, &mut order, &mut queue)?;
        }
    }
    Ok(order)
}

impl RelationSystem {
    pub fn from_presentation(p: &Presentation, caps: ClosureCaps) -> Result<Self, RelationError> {
        close_compatibility(p.field, p.tau, &p.alphabet, &p.relations, caps)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn caps(&self) -> ClosureCaps {
        self.caps
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    /// Closed relations in canonical order.
    pub fn relations(&self) -> &[Poly] {
        &self.relations
    }

    /// Same relations, different τ.
    pub fn with_tau(&self, tau: u32) -> Result<Self, RelationError> {
        if tau == 0 {
            return Err(RelationError::BadTau);
        }
        let mut s = self.clone();
        s.tau = tau;
        Ok(s)
    }

    /// Projective membership in the closed relation set.
    pub fn is_relation(&self, p: &Poly) -> bool {
        !p.is_zero() && p.field() == self.field && self.relation_index.contains_key(&p.normalized())
    }

    pub fn relation_id(&self, p: &Poly) -> Option<usize> {
        if p.is_zero() {
            return None;
        }
        self.relation_index.get(&p.normalized()).copied()
    }

    /// Monomials occurring in the closed relations.
    pub fn support(&self) -> &BTreeSet<Word> {
        &self.support
    }

    /// The monomial set M (subword-closed; empty for the empty system).
    pub fn monomials(&self) -> &BTreeSet<Word> {
        &self.monomials
    }

    pub fn in_m(&self, letters: &[Letter]) -> bool {
        !self.monomials.is_empty() && self.m_trie.contains(letters)
    }

    /// Longest `k` with `letters[..k] ∈ M`.
    pub fn longest_m_prefix(&self, letters: &[Letter]) -> usize {
        if self.monomials.is_empty() {
            0
        } else {
            self.m_trie.longest_prefix(letters)
        }
    }

    /// The small-piece set S, always containing 1.
    pub fn small_pieces(&self) -> &BTreeSet<Word> {
        &self.pieces
    }

    pub fn is_piece(&self, letters: &[Letter]) -> bool {
        self.s_trie.contains(letters)
    }

    /// Indices of closed relations having `m` as a monomial.
    pub fn relations_containing(&self, m: &Word) -> &[usize] {
        self.by_monomial.get(m).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Λ on an arbitrary letter sequence by shortest factorization into
    /// nonempty pieces. Membership in M is not checked.
    pub fn lambda_unchecked(&self, letters: &[Letter]) -> Lambda {
        let n = letters.len();
        let mut best: Vec<Option<u32>> = vec![None; n + 1];
        best[0] = Some(0);
        for i in 0..n {
            let Some(d) = best[i] else { continue };
            let mut node = 0usize;
            for (j, l) in letters.iter().enumerate().skip(i) {
                match self.s_trie.children[node].get(l) {
                    Some(&next) => node = next as usize,
                    None => break,
                }
                let slot = &mut best[j + 1];
                if slot.is_none_or(|v| v > d + 1) {
                    *slot = Some(d + 1);
                }
            }
        }
        best[n].map_or(Lambda::Infinite, Lambda::Finite)
    }

    pub fn lambda(&self, u: &Word) -> Result<Lambda, RelationError> {
        if u.is_empty() {
            return Ok(Lambda::Finite(0));
        }
        if !self.in_m(u.letters()) {
            return Err(RelationError::NotInM(self.alphabet.format_word(u)));
        }
        Ok(self.lambda_unchecked(u.letters()))
    }

    /// Λ for every element of M.
    pub fn lambda_table(&self) -> BTreeMap<Word, Lambda> {
        self.monomials
            .iter()
            .map(|m| (m.clone(), self.lambda_unchecked(m.letters())))
            .collect()
    }

    /// The system with every word reversed; left and right swap roles.
    pub fn mirrored(&self) -> RelationSystem {
        let rev = |p: &Poly| {
            Poly::from_terms(self.field, p.terms().map(|(w, c)| (w.reversed(), c.clone())))
        };
        let gens: Vec<Poly> = self.generators.iter().map(rev).collect();
        let rels: Vec<Poly> = self.relations.iter().map(rev).collect();
        assemble(self.field, self.tau, &self.alphabet, self.caps, gens, rels)
    }

    pub fn format_word(&self, w: &Word) -> String {
        self.alphabet.format_word(w)
    }

    pub fn format_poly(&self, p: &Poly) -> String {
        p.format(&self.alphabet)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, RelationError> {
        Ok(self.alphabet.parse_word(s)?)
    }

    pub fn parse_poly(&self, s: &str) -> Result<Poly, RelationError> {
        Ok(Poly::parse(s, self.field, &self.alphabet)?)
    }
}

/// Closes `generators` under the Compatibility Axiom and derives M, S and Λ.
pub fn close_compatibility(
    field: Field,
    tau: u32,
    alphabet: &Alphabet,
    generators: &[Poly],
    caps: ClosureCaps,
) -> Result<RelationSystem, RelationError> {
    if tau == 0 {
        return Err(RelationError::BadTau);
    }
    for g in generators {
        if g.field() != field {
            return Err(AlgebraError::FieldMismatch(field, g.field()).into());
        }
    }
    let relations = closure_fixed_point(generators, &caps)?;
    Ok(assemble(field, tau, alphabet, caps, generators.to_vec(), relations))
}

fn assemble(
    field: Field,
    tau: u32,
    alphabet: &Alphabet,
    caps: ClosureCaps,
    generators: Vec<Poly>,
    mut relations: Vec<Poly>,
) -> RelationSystem {
    relations.sort();
    relations.dedup();
    let relation_index: HashMap<Poly, usize> = relations
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let mut support = BTreeSet::new();
    let mut by_monomial: HashMap<Word, Vec<usize>> = HashMap::new();
    for (i, p) in relations.iter().enumerate() {
        for m in p.monomials() {
            support.insert(m.clone());
            by_monomial.entry(m.clone()).or_default().push(i);
        }
    }
    let mut monomials = BTreeSet::new();
    let mut m_trie = FactorTrie::new();
    if !support.is_empty() {
        monomials.insert(Word::identity());
    }
    for m in &support {
        for s in 0..m.len() {
            m_trie.insert(&m.letters()[s..]);
            for e in s + 1..=m.len() {
                monomials.insert(m.subword(s, e - s));
            }
        }
    }
    let pieces = compute_pieces(&relations, &relation_index, &support);
    let mut s_trie = FactorTrie::new();
    for p in &pieces {
        s_trie.insert(p.letters());
    }
    RelationSystem {
        field,
        tau,
        alphabet: alphabet.clone(),
        caps,
        generators,
        relations,
        relation_index,
        support,
        monomials,
        pieces,
        m_trie,
        s_trie,
        by_monomial,
    }
}

/// Small pieces via anchor classes.
///
/// For an anchor `(p, a, i)` and a position `(b, j)` with `a[i] = b[j]`, the
/// two translates `b[..j]·a[..i]⁻¹·p` and `p·a[i..]⁻¹·b[j..]` do not depend on
/// how far the common segment extends. The positions where both translates
/// stay in R are exactly the splits `b = g·h` with `g` in the left translate
/// class of `a[..i]⁻¹·p` and `h` in the right class of `p·a[i..]⁻¹`. A prefix
/// `c` of `a[i..]` is a piece iff some position starting with `c` is not of
/// that form, which is a count comparison on a suffix trie.
fn compute_pieces(
    relations: &[Poly],
    relation_index: &HashMap<Poly, usize>,
    support: &BTreeSet<Word>,
) -> BTreeSet<Word> {
    let mut pieces = BTreeSet::new();
    pieces.insert(Word::identity());
    if relations.is_empty() {
        return pieces;
    }
    let mut left_classes: HashMap<Poly, Vec<Word>> = HashMap::new();
    let mut right_classes: HashMap<Poly, Vec<Word>> = HashMap::new();
    for r in relations {
        let (k, m) = left_class_key(r);
        left_classes.entry(k).or_default().push(m);
        let (k, m) = right_class_key(r);
        right_classes.entry(k).or_default().push(m);
    }
    debug_assert_eq!(relation_index.len(), relations.len());
    let counter = SuffixCounter::build(support.iter());
    let e = Word::identity();
    let mut done: HashSet<(Poly, Poly, Vec<Letter>)> = HashSet::new();
    for p in relations {
        for a in p.monomials() {
            for i in 0..a.len() {
                let head = a.prefix(i);
                let tail = a.suffix_from(i);
                let left_poly = p.translate(&head.inverse(), &e).normalized();
                let right_poly = p.translate(&e, &tail.inverse()).normalized();
                let key = (left_poly.clone(), right_poly.clone(), tail.letters().to_vec());
                if !done.insert(key) {
                    continue;
                }
                // g with g·left_poly ∈ R
                let (lk, lm) = left_class_key(&left_poly);
                let lefts: Vec<Word> = left_classes
                    .get(&lk)
                    .map(|ms| ms.iter().map(|m| m.mul(&lm.inverse())).collect())
                    .unwrap_or_default();
                let (rk, rm) = right_class_key(&right_poly);
                let rights: Vec<Word> = right_classes
                    .get(&rk)
                    .map(|ms| ms.iter().map(|m| rm.inverse().mul(m)).collect())
                    .unwrap_or_default();
                let t = tail.letters();
                let mut consistent = vec![0u32; t.len()];
                for h in &rights {
                    let hl = h.letters();
                    let lce = hl.iter().zip(t).take_while(|(x, y)| x == y).count();
                    if lce == 0 {
                        continue;
                    }
                    for g in &lefts {
                        if !g.joins_cleanly(h) {
                            continue;
                        }
                        let b = g.concat(h).0;
                        if support.contains(&b) {
                            for c in consistent.iter_mut().take(lce) {
                                *c += 1;
                            }
                        }
                    }
                }
                let totals = counter.path_counts(t);
                for k in 0..t.len() {
                    if totals[k] > consistent[k] {
                        pieces.insert(Word::from_reduced(t[..=k].to_vec()));
                    } else {
                        break;
                    }
                }
            }
        }
    }
    pieces
}
