//! Multi-turns, layouts, derived monomials and the bounded spaces built
//! from them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::algebra::{to_row, EchelonBasis, Insert, MonoKey, Poly};
use crate::chart::Charter;
use crate::relations::{RelationError, RelationSystem};
use crate::words::{Occurrence, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultiTurnError {
    #[error("pattern {0} is not a monomial of the relation")]
    PatternNotInRelation(String),
    #[error("occurrence does not match the host word")]
    BadOccurrence,
    #[error("set is not closed under derived monomials: {0} leads outside it")]
    NotDerivedClosed(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// One substitution `a_h ↦ Σ_{j≠h} (−α_h⁻¹ α_j) a_j` inside a host word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiTurn {
    pub host: Word,
    pub occurrence: Occurrence,
    pub relation: Poly,
    pub result: Poly,
    pub layout: Poly,
}

impl MultiTurn {
    /// `host − result − layout`, which is zero for every valid multi-turn.
    pub fn defect(&self) -> Poly {
        Poly::monomial(self.relation.field(), self.host.clone())
            .sub(&self.result)
            .sub(&self.layout)
    }
}

/// `(relation index, substitute)` for every closed relation containing `a`.
pub fn elementary_multi_turns(
    a: &Word,
    sys: &RelationSystem,
) -> Result<Vec<(usize, Poly)>, MultiTurnError> {
    if !a.is_empty() && !sys.in_m(a.letters()) {
        return Err(RelationError::NotInM(sys.format_word(a)).into());
    }
    Ok(sys
        .relations_containing(a)
        .iter()
        .map(|&i| (i, substitute(&sys.relations()[i], a)))
        .collect())
}

fn substitute(p: &Poly, a: &Word) -> Poly {
    let alpha = p.coeff(a).expect("monomial of relation");
    let factor = alpha.inv().neg();
    Poly::from_terms(
        p.field(),
        p.terms()
            .filter(|(w, _)| *w != a)
            .map(|(w, c)| (w.clone(), c.mul(&factor))),
    )
}

pub fn multi_turn(host: &Word, occ: &Occurrence, rel: &Poly) -> Result<MultiTurn, MultiTurnError> {
    if occ.end() > host.len() || host.subword(occ.start, occ.len) != occ.pattern {
        return Err(MultiTurnError::BadOccurrence);
    }
    let Some(alpha) = rel.coeff(&occ.pattern) else {
        return Err(MultiTurnError::PatternNotInRelation(occ.pattern.to_string()));
    };
    let left = host.prefix(occ.start);
    let right = host.suffix_from(occ.end());
    let result = substitute(rel, &occ.pattern).translate(&left, &right);
    let layout = rel.scale_and_translate(&alpha.inv(), &left, &right);
    Ok(MultiTurn {
        host: host.clone(),
        occurrence: occ.clone(),
        relation: rel.clone(),
        result,
        layout,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SpaceCaps {
    pub max_count: usize,
    pub max_length: usize,
    pub max_depth: usize,
}

impl Default for SpaceCaps {
    fn default() -> Self {
        SpaceCaps {
            max_count: 256,
            max_length: 64,
            max_depth: 8,
        }
    }
}

/// One replacement step `L a R ↦ L a′ R` of a virtual member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedEdge {
    pub from: Word,
    pub to: Word,
    pub occurrence: Occurrence,
    pub replacement: Word,
    /// Whether `a′` survives intact as a virtual member of `to`.
    pub lands_virtual: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedSet {
    pub root: Word,
    pub monomials: BTreeSet<Word>,
    pub edges: Vec<DerivedEdge>,
    pub truncated: bool,
}

/// Single replacements of virtual members of `u` by incident monomials.
pub fn replacement_steps(charter: &Charter, u: &Word) -> Vec<DerivedEdge> {
    let mut out = Vec::new();
    for occ in charter.virtual_members(u) {
        for aj in charter.incident(&occ.pattern) {
            let rep = crate::chart::replace_tagged(u, occ.start, occ.len, &aj);
            let inserted = rep.inserted();
            let lands_virtual = inserted.len() == aj.len() && charter.is_virtual_at(&rep.word, &inserted);
            out.push(DerivedEdge {
                from: u.clone(),
                to: rep.word,
                occurrence: occ.clone(),
                replacement: aj,
                lands_virtual,
            });
        }
    }
    out
}

/// Breadth-first closure of `{u}` under virtual-member replacements.
pub fn derived_monomials(charter: &Charter, u: &Word, caps: &SpaceCaps) -> DerivedSet {
    let mut seen: BTreeSet<Word> = BTreeSet::new();
    let mut edges = Vec::new();
    let mut truncated = false;
    let mut queue = VecDeque::new();
    seen.insert(u.clone());
    queue.push_back((u.clone(), 0usize));
    if caps.max_count <= 1 {
        truncated = !replacement_steps(charter, u).is_empty() || caps.max_count == 0;
        return DerivedSet {
            root: u.clone(),
            monomials: seen,
            edges,
            truncated,
        };
    }
    while let Some((w, d)) = queue.pop_front() {
        let steps = replacement_steps(charter, &w);
        if d >= caps.max_depth {
            if steps.iter().any(|e| !seen.contains(&e.to)) {
                truncated = true;
            }
            continue;
        }
        for e in steps {
            if e.to.len() > caps.max_length {
                truncated = true;
                continue;
            }
            if !seen.contains(&e.to) {
                if seen.len() >= caps.max_count {
                    truncated = true;
                    continue;
                }
                seen.insert(e.to.clone());
                queue.push_back((e.to.clone(), d + 1));
            }
            edges.push(e);
        }
    }
    DerivedSet {
        root: u.clone(),
        monomials: seen,
        edges,
        truncated,
    }
}

/// A finite-dimensional subspace of kF with its echelon basis.
#[derive(Clone, Debug)]
pub struct SpaceHandle {
    pub monomials: BTreeSet<Word>,
    pub echelon: EchelonBasis,
    pub caps: SpaceCaps,
    pub truncated: bool,
}

impl SpaceHandle {
    fn from_polys<'p>(
        sys: &RelationSystem,
        polys: impl IntoIterator<Item = &'p Poly>,
        caps: SpaceCaps,
        truncated: bool,
    ) -> Self {
        let mut echelon = EchelonBasis::new(sys.field(), false);
        let mut monomials = BTreeSet::new();
        for (i, p) in polys.into_iter().enumerate() {
            monomials.extend(p.monomials().cloned());
            echelon.insert(to_row(p, |w| MonoKey::plain(w.clone())), i);
        }
        echelon.finalize();
        SpaceHandle {
            monomials,
            echelon,
            caps,
            truncated,
        }
    }

    pub fn dim(&self) -> usize {
        self.echelon.rank()
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &SpaceHandle) -> SpaceHandle {
        let mut echelon = self.echelon.clone();
        let base = echelon.rank();
        for (i, (row, _)) in other.echelon.rows().into_iter().enumerate() {
            echelon.insert(row.clone(), base + i);
        }
        echelon.finalize();
        SpaceHandle {
            monomials: self.monomials.union(&other.monomials).cloned().collect(),
            echelon,
            caps: self.caps,
            truncated: self.truncated || other.truncated,
        }
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.echelon.contains(&to_row(p, |w| MonoKey::plain(w.clone())))
    }
}

/// `dim V / (V ∩ W) = dim(V + W) − dim W`.
pub fn quotient_dim(v: &SpaceHandle, w: &SpaceHandle) -> usize {
    w.sum(v).dim() - w.dim()
}

/// ⟨U⟩_d.
pub fn space_of(charter: &Charter, u: &Word, caps: &SpaceCaps) -> SpaceHandle {
    let d = derived_monomials(charter, u, caps);
    let sys = charter.system();
    let polys: Vec<Poly> = d
        .monomials
        .iter()
        .map(|m| Poly::monomial(sys.field(), m.clone()))
        .collect();
    SpaceHandle::from_polys(sys, &polys, *caps, d.truncated)
}

/// L⟨U⟩_d: derived monomials with f-characteristic below f(U).
pub fn l_space(charter: &Charter, u: &Word, caps: &SpaceCaps) -> SpaceHandle {
    let d = derived_monomials(charter, u, caps);
    let sys = charter.system();
    let fu = charter.f_char(u);
    let polys: Vec<Poly> = d
        .monomials
        .iter()
        .filter(|m| charter.f_char(m) < fu)
        .map(|m| Poly::monomial(sys.field(), m.clone()))
        .collect();
    SpaceHandle::from_polys(sys, &polys, *caps, d.truncated)
}

/// Layouts of all multi-turns at virtual members of monomials of `y`.
pub fn layouts(charter: &Charter, y: &BTreeSet<Word>) -> Vec<MultiTurn> {
    let sys = charter.system();
    let mut out = Vec::new();
    for u in y {
        for occ in charter.virtual_members(u) {
            for &i in sys.relations_containing(&occ.pattern) {
                out.push(
                    multi_turn(u, &occ, &sys.relations()[i]).expect("occurrence of a monomial"),
                );
            }
        }
    }
    out
}

/// Dp(Y). `y` must be closed under single replacements within the length cap.
pub fn dp_space(
    charter: &Charter,
    y: &BTreeSet<Word>,
    caps: &SpaceCaps,
) -> Result<SpaceHandle, MultiTurnError> {
    for u in y {
        for e in replacement_steps(charter, u) {
            if e.to.len() <= caps.max_length && !y.contains(&e.to) {
                return Err(MultiTurnError::NotDerivedClosed(
                    charter.system().format_word(&e.to),
                ));
            }
        }
    }
    let lays: Vec<Poly> = layouts(charter, y).into_iter().map(|m| m.layout).collect();
    Ok(SpaceHandle::from_polys(charter.system(), &lays, *caps, false))
}

/// A coset representative of `V_i / (Dp(V_i) + L(V_i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub representative: Poly,
    pub space_id: usize,
}

#[derive(Clone, Debug)]
pub struct BasisSample {
    pub elements: Vec<BasisElement>,
    /// Derived-monomial set of each distinct space, indexed by space id.
    pub spaces: Vec<BTreeSet<Word>>,
    pub truncated: bool,
}

/// All reduced words of length at most `n`, in shortlex order.
pub fn words_up_to(sys: &RelationSystem, n: usize) -> Vec<Word> {
    let letters: Vec<_> = sys.alphabet().letters().collect();
    let mut out = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.last() != Some(l.inverse()) {
                    next.push(w.mul(&Word::letter(l)));
                }
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn basis_sample(charter: &Charter, caps: &SpaceCaps, length_bound: usize) -> BasisSample {
    let sys = charter.system();
    let mut spaces: BTreeMap<BTreeSet<Word>, Word> = BTreeMap::new();
    let mut truncated = false;
    for z in words_up_to(sys, length_bound) {
        let d = derived_monomials(charter, &z, caps);
        truncated |= d.truncated;
        spaces.entry(d.monomials).or_insert(z);
    }
    let mut ordered: Vec<(BTreeSet<Word>, Word)> = spaces.into_iter().collect();
    ordered.sort_by(|a, b| a.0.iter().next().cmp(&b.0.iter().next()).then(a.0.cmp(&b.0)));
    let mut elements = Vec::new();
    let mut space_sets = Vec::new();
    for (id, (set, z)) in ordered.into_iter().enumerate() {
        let fz = charter.f_char(&z);
        let mut w = match dp_space(charter, &set, caps) {
            Ok(s) => s.echelon,
            Err(_) => {
                truncated = true;
                EchelonBasis::new(sys.field(), false)
            }
        };
        let mut tag = w.rank();
        for m in set.iter().filter(|m| charter.f_char(m) < fz) {
            w.insert(to_row(&Poly::monomial(sys.field(), m.clone()), |x| MonoKey::plain(x.clone())), tag);
            tag += 1;
        }
        for m in &set {
            let p = Poly::monomial(sys.field(), m.clone());
            if let Insert::Added(_) = w.insert(to_row(&p, |x| MonoKey::plain(x.clone())), tag) {
                elements.push(BasisElement {
                    representative: p,
                    space_id: id,
                });
            }
            tag += 1;
        }
        space_sets.push(set);
    }
    BasisSample {
        elements,
        spaces: space_sets,
        truncated,
    }
}
