//! Brute-force membership by linear algebra over bounded-length layouts.
//!
//! A layout `L·q·R` containing a monomial `w` can be written as
//! `g·(q·b⁻¹)·g⁻¹·w` for a monomial `b` of `q` and a conjugator `g`. The
//! span is grown from the queried monomials over the connected component,
//! enumerating at each monomial only the conjugators that keep every
//! monomial within the bound.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::algebra::{to_row, EchelonBasis, Field, MonoKey, Poly, Scalar};
use crate::relations::RelationSystem;
use crate::words::{Letter, Word};

pub const DEFAULT_ROW_CAP: usize = 200_000;
pub const DEFAULT_ORACLE_BOUND: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("layout span exceeds {cap} rows at bound {bound}")]
    SpanTooLarge { cap: usize, bound: usize },
    #[error("bound {bound} is below the input's longest monomial ({needed})")]
    BoundTooSmall { bound: usize, needed: usize },
}

/// `scalar · left·q·right` where `q` is row `row` of the relation echelon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutTerm {
    pub row: usize,
    pub left: Word,
    pub right: Word,
    pub scalar: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Member(Vec<LayoutTerm>),
    UnknownAtBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub outcome: OracleOutcome,
    pub bound: usize,
    pub dimension: usize,
}

impl OracleVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self.outcome, OracleOutcome::Member(_))
    }
}

impl fmt::Display for OracleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleOutcome::Member(_) => f.write_str("member"),
            OracleOutcome::UnknownAtBound => f.write_str("unknown-at-bound"),
        }
    }
}

/// A row `q` shifted by one of its monomials `b` to `q·b⁻¹`, with the
/// conjugacy data of its first nontrivial monomial `c = s·κ·s⁻¹`.
#[derive(Clone, Debug)]
struct Anchor {
    row: usize,
    b: Word,
    /// `(m·b⁻¹, coefficient)` for each monomial `m` of the row, in row order.
    terms: Vec<(Word, Scalar)>,
    shell: Word,
    core: Vec<Letter>,
    /// Generator of the centralizer of `c`.
    root: Word,
    /// Longest monomial of `q·b⁻¹`.
    reach: usize,
}

fn split_shell(w: &Word) -> (Word, Vec<Letter>) {
    let l = w.letters();
    let (mut i, mut j) = (0, l.len());
    while j - i >= 2 && l[i] == l[j - 1].inverse() {
        i += 1;
        j -= 1;
    }
    (w.prefix(i), l[i..j].to_vec())
}

fn primitive_root(core: &[Letter]) -> &[Letter] {
    let n = core.len();
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| &core[..d])
        .find(|r| core.chunks(r.len()).all(|c| c == *r))
        .unwrap_or(core)
}

/// Reduced words of length ≤ `max` whose first letter avoids `banned`.
fn words_avoiding(letters: &[Letter], banned: &[Letter], max: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for &l in letters {
                let ok = match w.last() {
                    None => !banned.contains(&l),
                    Some(&p) => p != l.inverse(),
                };
                if ok {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

impl Anchor {
    fn new(row: usize, q: &Poly, b: &Word) -> Self {
        let base = q.translate(&Word::identity(), &b.inverse());
        let c = base
            .monomials()
            .find(|m| !m.is_empty())
            .cloned()
            .unwrap_or_default();
        let (shell, core) = split_shell(&c);
        let root = Word::from(primitive_root(&core).to_vec()).sandwich(&shell, &shell.inverse());
        let terms = q.terms().map(|(m, c)| (m.mul(&b.inverse()), c.clone())).collect();
        Anchor {
            row,
            b: b.clone(),
            terms,
            reach: base.max_len(),
            shell,
            core,
            root,
        }
    }

    /// Every conjugator `g` with all monomials of `g·q·b⁻¹·g⁻¹·w` of length
    /// ≤ `bound`, with those monomials in row order.
    ///
    /// `g·c·g⁻¹` is written `v·κ′·v⁻¹` with `κ′` a rotation of the core and
    /// `v = w[..k]·v₁` branching off `w` after `k` letters; past the branch
    /// point nothing cancels, so `|v₁|` is limited by the slack `bound − |w|`.
    fn layouts_at(&self, w: &Word, bound: usize, letters: &[Letter]) -> Vec<(Vec<Word>, Word)> {
        if self.terms.len() == 1 {
            return vec![(vec![w.clone()], Word::identity())];
        }
        let mut out = Vec::new();
        let mut seen: HashSet<Vec<Word>> = HashSet::new();
        let wl = w.letters();
        let slack = bound.saturating_sub(w.len() + self.core.len()) / 2;
        let spread = if self.terms.len() > 2 { (bound + self.reach) as i64 } else { 0 };
        let rotations: Vec<Word> = (0..self.core.len())
            .map(|i| Word::from(self.core[..i].to_vec()).inverse().mul(&self.shell.inverse()))
            .collect();
        for k in 0..=wl.len() {
            let mut banned = Vec::new();
            if k < wl.len() {
                banned.push(wl[k]);
            }
            if k > 0 {
                banned.push(wl[k - 1].inverse());
            }
            for tail in words_avoiding(letters, &banned, slack) {
                let mut v_letters = wl[..k].to_vec();
                v_letters.extend_from_slice(&tail);
                let v = Word::from(v_letters);
                for rot in &rotations {
                    let g0 = v.mul(rot);
                    for e in -spread..=spread {
                        let g = g0.mul(&power(&self.root, e));
                        let ginv = g.inverse();
                        let mut images = Vec::with_capacity(self.terms.len());
                        for (m, _) in &self.terms {
                            let img = g.mul(m).mul(&ginv).mul(w);
                            if img.len() > bound {
                                break;
                            }
                            images.push(img);
                        }
                        if images.len() == self.terms.len() && seen.insert(images.clone()) {
                            out.push((images, g));
                        }
                    }
                }
            }
        }
        out
    }
}

fn power(w: &Word, e: i64) -> Word {
    let base = if e < 0 { w.inverse() } else { w.clone() };
    let mut out = Word::identity();
    for _ in 0..e.unsigned_abs() {
        out = out.mul(&base);
    }
    out
}

/// Reusable oracle over one system: echelon rows of the closed relations.
#[derive(Debug)]
pub struct Oracle<'a> {
    sys: &'a RelationSystem,
    rows: Vec<Poly>,
    anchors: Vec<Anchor>,
    letters: Vec<Letter>,
    row_cap: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(sys: &'a RelationSystem) -> Self {
        Self::with_row_cap(sys, DEFAULT_ROW_CAP)
    }

    pub fn with_row_cap(sys: &'a RelationSystem, row_cap: usize) -> Self {
        let basis = crate::algebra::row_reduce(sys.field(), sys.relations());
        let rows = basis
            .rows()
            .into_iter()
            .map(|(r, _)| crate::algebra::from_row(sys.field(), r))
            .collect();
        let rows: Vec<Poly> = rows;
        let anchors = rows
            .iter()
            .enumerate()
            .flat_map(|(i, q)| q.monomials().map(move |b| Anchor::new(i, q, b)))
            .collect();
        Oracle {
            sys,
            rows,
            anchors,
            letters: sys.alphabet().letters().collect(),
            row_cap,
        }
    }

    pub fn rows(&self) -> &[Poly] {
        &self.rows
    }

    /// Layouts reachable from `seeds` through shared monomials, every
    /// monomial of length ≤ `bound`.
    fn grow(&self, seeds: Vec<Word>, bound: usize) -> Result<Vec<(Poly, LayoutTerm)>, OracleError> {
        let field = self.sys.field();
        let mut visited: HashSet<Word> = seeds.iter().cloned().collect();
        let mut queue: VecDeque<Word> = seeds.into_iter().collect();
        let mut layouts: Vec<(Poly, LayoutTerm)> = Vec::new();
        let mut seen: HashSet<(usize, Vec<Word>)> = HashSet::new();
        while let Some(w) = queue.pop_front() {
            for anchor in &self.anchors {
                for (images, left) in anchor.layouts_at(&w, bound, &self.letters) {
                    if !seen.insert((anchor.row, images.clone())) {
                        continue;
                    }
                    for m in &images {
                        if visited.insert(m.clone()) {
                            queue.push_back(m.clone());
                        }
                    }
                    let t = Poly::from_terms(
                        field,
                        images.into_iter().zip(anchor.terms.iter().map(|(_, c)| c.clone())),
                    );
                    let right = anchor.b.inverse().mul(&left.inverse()).mul(&w);
                    layouts.push((
                        t,
                        LayoutTerm {
                            row: anchor.row,
                            left,
                            right,
                            scalar: field.one(),
                        },
                    ));
                    if layouts.len() > self.row_cap {
                        return Err(OracleError::SpanTooLarge {
                            cap: self.row_cap,
                            bound,
                        });
                    }
                }
            }
        }
        Ok(layouts)
    }

    /// Decides whether `p` lies in the span of layouts whose monomials all
    /// have length ≤ `bound`, restricted to the component of `p`.
    pub fn member(&self, p: &Poly, bound: usize) -> Result<OracleVerdict, OracleError> {
        if p.max_len() > bound {
            return Err(OracleError::BoundTooSmall {
                bound,
                needed: p.max_len(),
            });
        }
        if p.is_zero() {
            return Ok(OracleVerdict {
                outcome: OracleOutcome::Member(Vec::new()),
                bound,
                dimension: 0,
            });
        }
        let layouts = self.grow(p.monomials().cloned().collect(), bound)?;
        let mut columns: HashMap<Word, u32> = HashMap::new();
        let mut key = |w: &Word| {
            let next = columns.len() as u32;
            let col = *columns.entry(w.clone()).or_insert(next);
            MonoKey {
                major: (col, 0),
                word: Word::identity(),
            }
        };
        let target = to_row(p, &mut key);
        let rows: Vec<_> = layouts.iter().map(|(t, _)| to_row(t, &mut key)).collect();
        // decide untracked first; combinations are only needed for members
        let mut probe = EchelonBasis::new(p.field(), false);
        for (i, r) in rows.iter().enumerate() {
            probe.insert(r.clone(), i);
        }
        if !probe.contains(&target) {
            return Ok(OracleVerdict {
                outcome: OracleOutcome::UnknownAtBound,
                bound,
                dimension: probe.rank(),
            });
        }
        let mut basis = EchelonBasis::new(p.field(), true);
        for (i, r) in rows.into_iter().enumerate() {
            basis.insert(r, i);
        }
        let red = basis.reduce(&target);
        let outcome = if red.remainder.is_empty() {
            OracleOutcome::Member(
                red.used
                    .into_iter()
                    .map(|(i, s)| LayoutTerm {
                        scalar: s,
                        ..layouts[i].1.clone()
                    })
                    .collect(),
            )
        } else {
            OracleOutcome::UnknownAtBound
        };
        Ok(OracleVerdict {
            outcome,
            bound,
            dimension: basis.rank(),
        })
    }

    /// Re-sums a member combination.
    pub fn evaluate(&self, terms: &[LayoutTerm]) -> Poly {
        let mut sum = Poly::zero(self.sys.field());
        for t in terms {
            sum = sum.add(&self.rows[t.row].scale_and_translate(&t.scalar, &t.left, &t.right));
        }
        sum
    }
}

pub fn oracle_member(p: &Poly, sys: &RelationSystem, max_len: usize) -> Result<OracleVerdict, OracleError> {
    Oracle::new(sys).member(p, max_len)
}

/// Evaluates `p` under the multiplicative character sending generator `i`
/// to `values[i]`.
pub fn evaluate_character(p: &Poly, values: &[Scalar]) -> Scalar {
    let mut total = p.field().zero();
    for (w, c) in p.terms() {
        let mut v = c.clone();
        for l in w.letters() {
            let x = &values[l.generator() as usize];
            v = v.mul(&if l.is_inverse() { x.inv() } else { x.clone() });
        }
        total = total.add(&v);
    }
    total
}

const CHARACTER_SEARCH_CAP: usize = 1_000_000;

fn character_candidates(field: Field) -> Vec<Scalar> {
    match field.nonzero_elements() {
        Some(all) if all.len() <= 64 => all,
        _ => {
            let mut out = Vec::new();
            for (n, d) in [(1, 1), (2, 1), (3, 1), (1, 2), (1, 3), (2, 3), (3, 2)] {
                for sign in [1, -1] {
                    let s = field.from_i64(sign * n).div(&field.from_i64(d));
                    if !s.is_zero() && !out.contains(&s) {
                        out.push(s);
                    }
                }
            }
            out
        }
    }
}

/// Searches for a character `F → k*` killing every generating relation;
/// such a character factors through kF/I and proves `1 ∉ I`.
pub fn character_certificate(sys: &RelationSystem) -> Option<Vec<Scalar>> {
    let field = sys.field();
    let n = sys.alphabet().len();
    let cands = character_candidates(field);
    let total = cands.len().checked_pow(n as u32).unwrap_or(usize::MAX);
    let mut digits = vec![0usize; n];
    for _ in 0..total.min(CHARACTER_SEARCH_CAP) {
        let values: Vec<Scalar> = digits.iter().map(|&d| cands[d].clone()).collect();
        if sys
            .generators()
            .iter()
            .all(|p| evaluate_character(p, &values).is_zero())
        {
            return Some(values);
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < cands.len() {
                break;
            }
            *d = 0;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nontriviality {
    EmptySystem,
    /// Values of a character killing the relations.
    Character(Vec<Scalar>),
    NotInSpan { dimension: usize },
    /// 1 lies in the layout span.
    Trivial(Vec<LayoutTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NontrivialityReport {
    pub outcome: Nontriviality,
    pub bound: usize,
}

impl NontrivialityReport {
    pub fn passes(&self) -> bool {
        !matches!(self.outcome, Nontriviality::Trivial(_))
    }

    pub fn method(&self) -> &'static str {
        match self.outcome {
            Nontriviality::EmptySystem => "empty-system",
            Nontriviality::Character(_) => "character",
            Nontriviality::NotInSpan { .. } => "layout-span",
            Nontriviality::Trivial(_) => "layout-span",
        }
    }
}

/// Asserts `1 ∉` layout span at `max_len`. A character certificate settles
/// it for every bound; otherwise the span is built.
pub fn nontriviality_check(sys: &RelationSystem, max_len: usize) -> Result<NontrivialityReport, OracleError> {
    let outcome = if sys.relations().is_empty() {
        Nontriviality::EmptySystem
    } else if let Some(values) = character_certificate(sys) {
        Nontriviality::Character(values)
    } else {
        let one = Poly::monomial(sys.field(), Word::identity());
        let v = oracle_member(&one, sys, max_len)?;
        match v.outcome {
            OracleOutcome::Member(terms) => Nontriviality::Trivial(terms),
            OracleOutcome::UnknownAtBound => Nontriviality::NotInSpan {
                dimension: v.dimension,
            },
        }
    };
    Ok(NontrivialityReport {
        outcome,
        bound: max_len,
    })
}
