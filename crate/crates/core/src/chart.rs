//! Charts of monomials: maximal M-occurrences, members, virtual members,
//! minimal coverings, f-characteristics and filtration levels.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::relations::{Lambda, RelationSystem};
use crate::words::{Letter, Occurrence, Word};

pub const DEFAULT_VIRTUAL_DEPTH: usize = 2;
pub const MIN_CHART_TAU: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("charts need tau >= {MIN_CHART_TAU}, got {0}")]
    TauTooSmall(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartEntry {
    pub occurrence: Occurrence,
    pub lambda: Lambda,
    pub member: bool,
    pub virtual_member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub host: Word,
    pub entries: Vec<ChartEntry>,
}

impl Chart {
    pub fn occurrences(&self) -> impl Iterator<Item = &Occurrence> {
        self.entries.iter().map(|e| &e.occurrence)
    }

    /// One line per occurrence: `start length pattern Λ member virtual`.
    pub fn dump(&self, sys: &RelationSystem) -> String {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "{} {} {} {} {} {}\n",
                    e.occurrence.start,
                    e.occurrence.len,
                    sys.format_word(&e.occurrence.pattern),
                    e.lambda,
                    e.member as u8,
                    e.virtual_member as u8
                )
            })
            .collect()
    }
}

/// `(MinCov, Nvirt)`, ordered lexicographically.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FChar {
    pub min_cov: u32,
    pub n_virt: u32,
}

impl fmt::Display for FChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.min_cov, self.n_virt)
    }
}

/// `t(n)`: start at (0,0); from (r,s) step to (r,s+1) when r > s, else (r+1,0).
pub fn t(n: usize) -> (u32, u32) {
    let (mut r, mut s) = (0u32, 0u32);
    for _ in 0..n {
        if r > s {
            s += 1;
        } else {
            r += 1;
            s = 0;
        }
    }
    (r, s)
}

/// Least `n` with `f ≤ t(n)`.
pub fn level_of(f: FChar) -> usize {
    let target = (f.min_cov, f.n_virt);
    let mut n = 0usize;
    loop {
        if target <= t(n) {
            return n;
        }
        n += 1;
    }
}

/// Minimum number of intervals covering the same positions as all of them,
/// choosing leftmost-longest intervals. Returns the chosen indices.
pub fn min_cover(intervals: &[(usize, usize)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..intervals.len())
        .filter(|&i| intervals[i].0 < intervals[i].1)
        .collect();
    order.sort_by_key(|&i| intervals[i]);
    let mut chosen = Vec::new();
    let mut k = 0;
    while k < order.len() {
        // one connected component of the union
        let comp_start = intervals[order[k]].0;
        let mut comp_end = intervals[order[k]].1;
        let mut j = k;
        while j < order.len() && intervals[order[j]].0 <= comp_end {
            comp_end = comp_end.max(intervals[order[j]].1);
            j += 1;
        }
        let comp = &order[k..j];
        let mut pos = comp_start;
        while pos < comp_end {
            let best = comp
                .iter()
                .copied()
                .filter(|&i| intervals[i].0 <= pos && intervals[i].1 > pos)
                .max_by(|&a, &b| {
                    intervals[a]
                        .1
                        .cmp(&intervals[b].1)
                        .then(intervals[b].0.cmp(&intervals[a].0))
                })
                .expect("union component is connected");
            chosen.push(best);
            pos = intervals[best].1;
        }
        k = j;
    }
    chosen
}

/// Result of replacing `[start, start+len)` of a word and freely reducing:
/// each surviving letter is tagged with its old position, or `None` when it
/// comes from the inserted word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedReplacement {
    pub word: Word,
    pub tags: Vec<Option<usize>>,
}

impl TaggedReplacement {
    /// Positions of surviving letters from the old interval `[s, e)`.
    pub fn image(&self, s: usize, e: usize) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some_and(|p| s <= p && p < e))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn inserted(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn replace_tagged(host: &Word, start: usize, len: usize, new: &Word) -> TaggedReplacement {
    let hl = host.letters();
    let seq = hl[..start]
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, Some(i)))
        .chain(new.letters().iter().map(|&l| (l, None)))
        .chain(
            hl[start + len..]
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, Some(start + len + i))),
        );
    let mut stack: Vec<(Letter, Option<usize>)> = Vec::new();
    for (l, tag) in seq {
        if stack.last().is_some_and(|(top, _)| *top == l.inverse()) {
            stack.pop();
        } else {
            stack.push((l, tag));
        }
    }
    let (letters, tags): (Vec<Letter>, Vec<Option<usize>>) = stack.into_iter().unzip();
    TaggedReplacement {
        word: Word::from(letters),
        tags,
    }
}

fn within(positions: &[usize], o: &Occurrence) -> bool {
    positions.iter().all(|&p| o.start <= p && p < o.end())
}

/// Chart computations for one relation system at a fixed virtual depth.
#[derive(Clone, Copy, Debug)]
pub struct Charter<'a> {
    sys: &'a RelationSystem,
    depth: usize,
}

impl<'a> Charter<'a> {
    pub fn new(sys: &'a RelationSystem, depth: usize) -> Result<Self, ChartError> {
        if sys.tau() < MIN_CHART_TAU {
            return Err(ChartError::TauTooSmall(sys.tau()));
        }
        Ok(Charter { sys, depth })
    }

    pub fn system(&self) -> &'a RelationSystem {
        self.sys
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn tau(&self) -> i64 {
        self.sys.tau() as i64
    }

    /// Containment-maximal nonempty M-occurrences in start order.
    pub fn maximal_occurrences(&self, u: &Word) -> Vec<(Occurrence, Lambda)> {
        let letters = u.letters();
        let mut out = Vec::new();
        let mut prev_end = 0usize;
        for s in 0..letters.len() {
            let e = s + self.sys.longest_m_prefix(&letters[s..]);
            if e > s && e > prev_end {
                let pattern = u.subword(s, e - s);
                let lambda = self.sys.lambda_unchecked(pattern.letters());
                out.push((
                    Occurrence {
                        start: s,
                        len: e - s,
                        pattern,
                    },
                    lambda,
                ));
            }
            prev_end = prev_end.max(e);
        }
        out
    }

    pub fn chart(&self, u: &Word) -> Chart {
        let occ = self.maximal_occurrences(u);
        let virt = self.virtual_flags(u, &occ);
        let tau = self.tau();
        Chart {
            host: u.clone(),
            entries: occ
                .into_iter()
                .zip(virt)
                .map(|((o, lambda), v)| ChartEntry {
                    occurrence: o,
                    member: lambda.at_least(tau),
                    lambda,
                    virtual_member: v,
                })
                .collect(),
        }
    }

    pub fn min_cov(&self, u: &Word) -> usize {
        let occ = self.maximal_occurrences(u);
        let iv: Vec<(usize, usize)> = occ.iter().map(|(o, _)| (o.start, o.end())).collect();
        min_cover(&iv).len()
    }

    pub fn virtual_members(&self, u: &Word) -> Vec<Occurrence> {
        let occ = self.maximal_occurrences(u);
        let flags = self.virtual_flags(u, &occ);
        occ.into_iter()
            .zip(flags)
            .filter(|(_, v)| *v)
            .map(|((o, _), _)| o)
            .collect()
    }

    fn virtual_flags(&self, u: &Word, occ: &[(Occurrence, Lambda)]) -> Vec<bool> {
        let tau = self.tau();
        occ.iter()
            .enumerate()
            .map(|(i, (o, lambda))| {
                if lambda.at_least(tau) {
                    true
                } else if !lambda.at_least(tau - 2) {
                    false
                } else {
                    let positions: Vec<usize> = (o.start..o.end()).collect();
                    self.becomes_member(u, occ, Some(i), &positions, self.depth)
                }
            })
            .collect()
    }

    /// Whether the letters at `target` end up inside a member occurrence
    /// after at most `depth` admissible replacements.
    fn becomes_member(
        &self,
        u: &Word,
        occ: &[(Occurrence, Lambda)],
        skip: Option<usize>,
        target: &[usize],
        depth: usize,
    ) -> bool {
        let tau = self.tau();
        if occ
            .iter()
            .any(|(o, l)| l.at_least(tau) && within(target, o))
        {
            return true;
        }
        if depth == 0 {
            return false;
        }
        for (h, (ah, lh)) in occ.iter().enumerate() {
            if Some(h) == skip || !lh.at_least(tau - 2) {
                continue;
            }
            for aj in self.incident(&ah.pattern) {
                let Some(rep) = self.admissible(u, occ, h, &aj) else {
                    continue;
                };
                let image: Vec<usize> = rep
                    .tags
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.is_some_and(|p| target.contains(&p)))
                    .map(|(k, _)| k)
                    .collect();
                if image.is_empty() {
                    continue;
                }
                let next = self.maximal_occurrences(&rep.word);
                if self.becomes_member(&rep.word, &next, None, &image, depth - 1) {
                    return true;
                }
            }
        }
        false
    }

    /// Monomials incident to `a`, other than `a`, in shortlex order.
    pub fn incident(&self, a: &Word) -> Vec<Word> {
        let mut out: Vec<Word> = self
            .sys
            .relations_containing(a)
            .iter()
            .flat_map(|&i| self.sys.relations()[i].monomials().cloned())
            .filter(|m| m != a)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Performs `a_h ↦ a_j` at occurrence `h` if it is admissible: some
    /// surviving letter of `a_j` lies outside every maximal occurrence of the
    /// new word that contains the image of an element of
    /// `longmo(U) ∖ {a_h}`.
    pub fn admissible(
        &self,
        u: &Word,
        occ: &[(Occurrence, Lambda)],
        h: usize,
        aj: &Word,
    ) -> Option<TaggedReplacement> {
        let ah = &occ[h].0;
        let rep = replace_tagged(u, ah.start, ah.len, aj);
        let inserted = rep.inserted();
        if inserted.is_empty() {
            return None;
        }
        let next = self.maximal_occurrences(&rep.word);
        let mut covered = vec![false; rep.word.len()];
        for (k, (o, l)) in occ.iter().enumerate() {
            if k == h || !l.at_least(3) {
                continue;
            }
            let img = rep.image(o.start, o.end());
            if img.is_empty() {
                continue;
            }
            for (n, _) in next.iter().filter(|(n, _)| within(&img, n)) {
                for c in covered.iter_mut().take(n.end()).skip(n.start) {
                    *c = true;
                }
            }
        }
        inserted.iter().any(|&p| !covered[p]).then_some(rep)
    }

    /// Whether `positions` of `u` are exactly the letters of a virtual member.
    pub fn is_virtual_at(&self, u: &Word, positions: &[usize]) -> bool {
        let (Some(&first), Some(&last)) = (positions.first(), positions.last()) else {
            return false;
        };
        if last + 1 - first != positions.len() {
            return false;
        }
        let occ = self.maximal_occurrences(u);
        let flags = self.virtual_flags(u, &occ);
        occ.iter()
            .zip(flags)
            .any(|((o, _), v)| v && o.start == first && o.end() == last + 1)
    }

    pub fn f_char(&self, u: &Word) -> FChar {
        let occ = self.maximal_occurrences(u);
        let iv: Vec<(usize, usize)> = occ.iter().map(|(o, _)| (o.start, o.end())).collect();
        let n_virt = self.virtual_flags(u, &occ).into_iter().filter(|v| *v).count();
        FChar {
            min_cov: min_cover(&iv).len() as u32,
            n_virt: n_virt as u32,
        }
    }

    pub fn filtration_level(&self, u: &Word) -> usize {
        level_of(self.f_char(u))
    }

    /// Checks that every pairwise overlap of maximal occurrences is a small
    /// piece; returns the offending overlaps.
    pub fn overlap_violations(&self, u: &Word) -> Vec<(Occurrence, Occurrence)> {
        let occ = self.maximal_occurrences(u);
        let mut bad = Vec::new();
        for i in 0..occ.len() {
            for j in i + 1..occ.len() {
                let (a, b) = (&occ[i].0, &occ[j].0);
                if b.start >= a.end() {
                    break;
                }
                if let Some((s, e)) = a.overlap(b) {
                    if !self.sys.is_piece(&u.letters()[s..e]) {
                        bad.push((a.clone(), b.clone()));
                    }
                }
            }
        }
        bad
    }
}

/// Lexicographic comparison of f-characteristics.
pub fn cmp_fchar(a: FChar, b: FChar) -> Ordering {
    a.cmp(&b)
}
