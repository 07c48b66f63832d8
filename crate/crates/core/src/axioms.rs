//! Checkers for the Compatibility, Small Cancellation and Isolation axioms.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::algebra::{from_row, to_row, EchelonBasis, MonoKey, Poly, Scalar};
use crate::relations::{Lambda, RelationSystem};
use crate::report::Report;
use crate::words::Word;

pub const DEFAULT_MAX_CHAIN: usize = 6;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axiom {
    Compatibility,
    SmallCancellation,
    IsolationLeft,
    IsolationRight,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Compatibility => "Compatibility",
            Axiom::SmallCancellation => "SmallCancellation",
            Axiom::IsolationLeft => "IsolationLeft",
            Axiom::IsolationRight => "IsolationRight",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    HoldsUpToBound,
}

impl Status {
    pub fn passes(self) -> bool {
        self != Status::Fails
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::HoldsUpToBound => "holds-up-to-bound",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Counterexample to the isolation condition, in the orientation of the
/// side it was found on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationWitness {
    pub chain: Vec<Word>,
    pub a: Word,
    pub l: Word,
    pub l_prime: Word,
    pub b_chain: Vec<Word>,
    pub p_first: Word,
    pub p_last: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A Compatibility move leading outside the relation set.
    Translate { relation: usize, result: Poly },
    /// `Σ γ_s p_s` supported on monomials with Λ ≤ τ.
    Combination {
        gamma: Vec<(usize, Scalar)>,
        element: Poly,
    },
    Isolation(IsolationWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub status: Status,
    pub witness: Option<Witness>,
    pub bound: Option<usize>,
    pub note: Option<String>,
}

impl AxiomReport {
    pub fn to_report(&self, sys: &RelationSystem) -> Report {
        let mut r = Report::new(format!("axiom {}", self.axiom));
        r.push("axiom", self.axiom);
        r.push("status", self.status);
        r.push(
            "bound",
            self.bound.map_or_else(|| "-".to_string(), |b| b.to_string()),
        );
        if let Some(n) = &self.note {
            r.push("note", n);
        }
        let words = |ws: &[Word]| {
            ws.iter()
                .map(|w| sys.format_word(w))
                .collect::<Vec<_>>()
                .join(" ; ")
        };
        match &self.witness {
            None => {}
            Some(Witness::Translate { relation, result }) => {
                r.push("witness.relation", relation);
                r.push("witness.translate", sys.format_poly(result));
            }
            Some(Witness::Combination { gamma, element }) => {
                for (i, g) in gamma {
                    r.push("witness.gamma", format!("{i}:{g}"));
                }
                r.push("witness.element", sys.format_poly(element));
            }
            Some(Witness::Isolation(w)) => {
                r.push("witness.chain", words(&w.chain));
                r.push("witness.a", sys.format_word(&w.a));
                r.push("witness.l", sys.format_word(&w.l));
                r.push("witness.l_prime", sys.format_word(&w.l_prime));
                r.push("witness.b_chain", words(&w.b_chain));
                r.push("witness.p_first", sys.format_word(&w.p_first));
                r.push("witness.p_last", sys.format_word(&w.p_last));
            }
        }
        r
    }
}

/// Re-runs the Compatibility moves on every closed relation.
pub fn check_compatibility(sys: &RelationSystem) -> AxiomReport {
    let e = Word::identity();
    for (i, p) in sys.relations().iter().enumerate() {
        for m in p.monomials() {
            let (Some(f), Some(l)) = (m.first(), m.last()) else {
                continue;
            };
            for q in [
                p.translate(&Word::letter(f.inverse()), &e),
                p.translate(&e, &Word::letter(l.inverse())),
            ] {
                if !sys.is_relation(&q) {
                    return AxiomReport {
                        axiom: Axiom::Compatibility,
                        status: Status::Fails,
                        witness: Some(Witness::Translate {
                            relation: i,
                            result: q.normalized(),
                        }),
                        bound: None,
                        note: None,
                    };
                }
            }
        }
    }
    AxiomReport {
        axiom: Axiom::Compatibility,
        status: Status::Holds,
        witness: None,
        bound: None,
        note: Some(format!("relations={}", sys.relations().len())),
    }
}

/// Decides the Small Cancellation Axiom by echelonizing the relation span
/// with high-Λ monomials (Λ > τ) ranked above all others: the axiom holds iff
/// every pivot is high.
pub fn check_small_cancellation(sys: &RelationSystem) -> AxiomReport {
    let tau = sys.tau() as i64;
    let high = |w: &Word| sys.lambda_unchecked(w.letters()).at_least(tau + 1);
    let key = |w: &Word| MonoKey {
        major: (high(w) as u32, 0),
        word: w.clone(),
    };
    let mut basis = EchelonBasis::new(sys.field(), true);
    for (i, p) in sys.relations().iter().enumerate() {
        basis.insert(to_row(p, key), i);
    }
    basis.finalize();
    let low_row = basis
        .rows()
        .into_iter().rfind(|(row, _)| row.keys().next_back().is_some_and(|k| k.major.0 == 0));
    let note = Some(format!("rank={} tau={}", basis.rank(), sys.tau()));
    match low_row {
        None => AxiomReport {
            axiom: Axiom::SmallCancellation,
            status: Status::Holds,
            witness: None,
            bound: None,
            note,
        },
        Some((row, combo)) => AxiomReport {
            axiom: Axiom::SmallCancellation,
            status: Status::Fails,
            witness: Some(Witness::Combination {
                gamma: combo.iter().map(|(i, s)| (*i, s.clone())).collect(),
                element: from_row(sys.field(), row),
            }),
            bound: None,
            note,
        },
    }
}

/// Re-evaluates a Small Cancellation witness: the combination must equal the
/// element, be nonzero, and use only monomials with Λ ≤ τ.
pub fn recheck_combination(sys: &RelationSystem, gamma: &[(usize, Scalar)], element: &Poly) -> bool {
    let mut sum = Poly::zero(sys.field());
    for (i, g) in gamma {
        sum = sum.add(&sys.relations()[*i].scale(g));
    }
    let tau = sys.tau() as i64;
    sum == *element
        && !sum.is_zero()
        && sum
            .monomials()
            .all(|m| !sys.lambda_unchecked(m.letters()).at_least(tau + 1))
}

/// Monomials with Λ ≥ `min`, joined when they occur in a common relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceGraph {
    pub vertices: Vec<Word>,
    pub edges: BTreeMap<Word, BTreeSet<Word>>,
}

impl IncidenceGraph {
    pub fn neighbours(&self, w: &Word) -> impl Iterator<Item = &Word> {
        self.edges.get(w).into_iter().flatten()
    }

    pub fn has_edge(&self, a: &Word, b: &Word) -> bool {
        self.edges.get(a).is_some_and(|s| s.contains(b))
    }

    /// Shortest path from `from` using at most `max_steps` edges, per
    /// reachable target.
    pub fn paths_from(&self, from: &Word, max_steps: usize) -> BTreeMap<Word, Vec<Word>> {
        let mut parent: HashMap<Word, Option<Word>> = HashMap::new();
        let mut depth: HashMap<Word, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert(from.clone(), None);
        depth.insert(from.clone(), 0);
        queue.push_back(from.clone());
        while let Some(v) = queue.pop_front() {
            let d = depth[&v];
            if d == max_steps {
                continue;
            }
            for n in self.neighbours(&v) {
                if !parent.contains_key(n) {
                    parent.insert(n.clone(), Some(v.clone()));
                    depth.insert(n.clone(), d + 1);
                    queue.push_back(n.clone());
                }
            }
        }
        let mut out = BTreeMap::new();
        for target in parent.keys() {
            let mut path = vec![target.clone()];
            let mut cur = target.clone();
            while let Some(Some(p)) = parent.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            out.insert(target.clone(), path);
        }
        out
    }
}

pub fn incidence_graph(sys: &RelationSystem, min: Lambda) -> IncidenceGraph {
    let keep = |w: &Word| sys.lambda_unchecked(w.letters()) >= min;
    let vertices: Vec<Word> = sys.monomials().iter().filter(|w| keep(w)).cloned().collect();
    let mut edges: BTreeMap<Word, BTreeSet<Word>> = BTreeMap::new();
    for p in sys.relations() {
        let ms: Vec<&Word> = p.monomials().filter(|w| keep(w)).collect();
        for a in &ms {
            for b in &ms {
                edges.entry((*a).clone()).or_default().insert((*b).clone());
            }
        }
    }
    IncidenceGraph { vertices, edges }
}

fn threshold(sys: &RelationSystem) -> Lambda {
    Lambda::Finite((sys.tau() as i64 - 2).max(0) as u32)
}

/// Everything about `a` placed before `m` that the condition needs.
struct Placement {
    p: Word,
    tail: Word,
}

/// Clauses 2 and 3 for the word `a·m`, returning `p(a)` and `p(a)⁻¹·m`.
fn placement(sys: &RelationSystem, a: &Word, m: &Word) -> Option<Placement> {
    if a.is_empty() || !a.joins_cleanly(m) {
        return None;
    }
    let am = a.concat(m).0;
    if sys.in_m(am.letters()) {
        return None;
    }
    // m must not extend leftwards inside a·m
    let from_last = &am.letters()[a.len() - 1..];
    if sys.in_m(from_last) {
        return None;
    }
    let e = sys.longest_m_prefix(am.letters());
    debug_assert!(e >= a.len() && e < am.len());
    let cut = e - a.len();
    Some(Placement {
        p: m.prefix(cut),
        tail: m.suffix_from(cut),
    })
}

/// Searches for `l ∈ S` with `l·a ∈ M` (no cancellation) and returns the
/// candidates in shortlex order.
fn left_pieces(sys: &RelationSystem, a: &Word) -> Vec<Word> {
    sys.small_pieces()
        .iter()
        .filter(|l| l.joins_cleanly(a) && sys.in_m(l.concat(a).0.letters()))
        .cloned()
        .collect()
}

struct IsolationSearch {
    witness: Option<IsolationWitness>,
    reachable_pairs: usize,
    candidates: usize,
    derived_fact_failures: usize,
}

fn search_isolation(sys: &RelationSystem, max_chain: usize) -> IsolationSearch {
    let min = threshold(sys);
    let graph = incidence_graph(sys, min);
    let steps = max_chain.saturating_sub(1);
    let chain_vertices: Vec<&Word> = graph.edges.keys().collect();
    let mut paths: BTreeMap<&Word, BTreeMap<Word, Vec<Word>>> = BTreeMap::new();
    let mut reachable_pairs = 0;
    for v in &chain_vertices {
        let p = graph.paths_from(v, steps);
        reachable_pairs += p.keys().filter(|t| t != v).count();
        paths.insert(v, p);
    }
    let mut out = IsolationSearch {
        witness: None,
        reachable_pairs,
        candidates: 0,
        derived_fact_failures: 0,
    };
    if reachable_pairs == 0 {
        return out;
    }
    let high = |w: &Word| sys.lambda_unchecked(w.letters()) >= min;
    let b_chain = |b1: &Word, bn: &Word| -> Option<Vec<Word>> {
        if !high(b1) || !high(bn) {
            return None;
        }
        if b1 == bn {
            return Some(vec![b1.clone()]);
        }
        graph
            .edges
            .get(b1)
            .and_then(|_| graph.paths_from(b1, steps).remove(bn))
    };
    for a in sys.monomials().iter().filter(|a| !a.is_empty() && high(a)) {
        let mut groups: BTreeMap<Word, Vec<(&Word, Placement)>> = BTreeMap::new();
        for m in &chain_vertices {
            if let Some(pl) = placement(sys, a, m) {
                groups.entry(pl.tail.clone()).or_default().push((m, pl));
            }
        }
        if groups.is_empty() {
            continue;
        }
        out.candidates += 1;
        let ls = left_pieces(sys, a);
        for members in groups.values() {
            for (m1, pl1) in members {
                for (mk, plk) in members {
                    if m1 == mk {
                        continue;
                    }
                    let Some(chain) = paths[m1].get(*mk) else {
                        continue;
                    };
                    for l in &ls {
                        let b1 = l.concat(a).0.concat(&pl1.p).0;
                        if !sys.in_m(b1.letters()) {
                            out.derived_fact_failures += 1;
                            continue;
                        }
                        for lp in &ls {
                            let bn = lp.concat(a).0.concat(&plk.p).0;
                            if !sys.in_m(bn.letters()) {
                                out.derived_fact_failures += 1;
                                continue;
                            }
                            if let Some(bc) = b_chain(&b1, &bn) {
                                out.witness = Some(IsolationWitness {
                                    chain: chain.clone(),
                                    a: a.clone(),
                                    l: l.clone(),
                                    l_prime: lp.clone(),
                                    b_chain: bc,
                                    p_first: pl1.p.clone(),
                                    p_last: plk.p.clone(),
                                });
                                return out;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Bounded check of one Isolation Axiom side. Chains and b-chains have at
/// most `max_chain` monomials.
pub fn check_isolation(sys: &RelationSystem, side: Side, max_chain: usize) -> AxiomReport {
    let (view, axiom) = match side {
        Side::Left => (sys.clone(), Axiom::IsolationLeft),
        Side::Right => (sys.mirrored(), Axiom::IsolationRight),
    };
    let found = search_isolation(&view, max_chain);
    let mut note = format!(
        "reachable-pairs={} candidates={} derived-fact-failures={}",
        found.reachable_pairs, found.candidates, found.derived_fact_failures
    );
    if found.reachable_pairs == 0 || found.candidates == 0 {
        note = format!("vacuous {note}");
    }
    match found.witness {
        None => AxiomReport {
            axiom,
            status: Status::HoldsUpToBound,
            witness: None,
            bound: Some(max_chain),
            note: Some(note),
        },
        Some(w) => {
            let w = match side {
                Side::Left => w,
                Side::Right => mirror_witness(&w),
            };
            AxiomReport {
                axiom,
                status: Status::Fails,
                witness: Some(Witness::Isolation(w)),
                bound: Some(max_chain),
                note: Some(note),
            }
        }
    }
}

fn mirror_witness(w: &IsolationWitness) -> IsolationWitness {
    let rev = |ws: &[Word]| ws.iter().map(Word::reversed).collect();
    IsolationWitness {
        chain: rev(&w.chain),
        a: w.a.reversed(),
        l: w.l.reversed(),
        l_prime: w.l_prime.reversed(),
        b_chain: rev(&w.b_chain),
        p_first: w.p_first.reversed(),
        p_last: w.p_last.reversed(),
    }
}

/// Evaluates every clause of the isolation condition on a witness directly.
/// Returns `Ok` when the witness is a genuine violation.
pub fn recheck_isolation(
    sys: &RelationSystem,
    side: Side,
    witness: &IsolationWitness,
    max_chain: usize,
) -> Result<(), String> {
    let (view, w) = match side {
        Side::Left => (sys.clone(), witness.clone()),
        Side::Right => (sys.mirrored(), mirror_witness(witness)),
    };
    let min = threshold(&view);
    let lam = |x: &Word| view.lambda_unchecked(x.letters());
    let incident = |x: &Word, y: &Word| {
        view.relations()
            .iter()
            .any(|p| p.contains(x) && p.contains(y))
    };
    let chain_ok = |c: &[Word]| {
        !c.is_empty()
            && c.len() <= max_chain
            && c.iter().all(|x| view.in_m(x.letters()) && lam(x) >= min)
            && c.windows(2).all(|p| incident(&p[0], &p[1]))
    };
    let (m1, mk) = (&w.chain[0], w.chain.last().ok_or("empty chain")?);
    if m1 == mk || !chain_ok(&w.chain) {
        return Err("chain clause".into());
    }
    if !view.in_m(w.a.letters()) || lam(&w.a) < min {
        return Err("clause 1".into());
    }
    for (m, p) in [(m1, &w.p_first), (mk, &w.p_last)] {
        if !w.a.joins_cleanly(m) || view.in_m(w.a.concat(m).0.letters()) {
            return Err("clause 2".into());
        }
        let am = w.a.concat(m).0;
        // maximality of the m-occurrence: no M-subword of a·m strictly contains it
        for s in 0..w.a.len() {
            if view.in_m(&am.letters()[s..]) {
                return Err("clause 3".into());
            }
        }
        // p(a): the a-containing maximal occurrence ends exactly at |a|+|p|
        let end = w.a.len() + p.len();
        if !m.letters().starts_with(p.letters())
            || !view.in_m(&am.letters()[..end])
            || (end < am.len() && view.in_m(&am.letters()[..end + 1]))
        {
            return Err("clause 4: p(a)".into());
        }
    }
    for l in [&w.l, &w.l_prime] {
        if !view.is_piece(l.letters()) || !l.joins_cleanly(&w.a) || !view.in_m(l.concat(&w.a).0.letters()) {
            return Err("clause 4: l".into());
        }
    }
    let b1 = w.l.concat(&w.a).0.concat(&w.p_first).0;
    let bn = w.l_prime.concat(&w.a).0.concat(&w.p_last).0;
    if w.b_chain.first() != Some(&b1) || w.b_chain.last() != Some(&bn) || !chain_ok(&w.b_chain) {
        return Err("clause 4: b-chain".into());
    }
    let t1 = w.p_first.inverse().mul(m1);
    let tk = w.p_last.inverse().mul(mk);
    if t1 != tk {
        return Err("required inequality holds".into());
    }
    Ok(())
}

/// All four reports, Compatibility first.
pub fn check_all(sys: &RelationSystem, max_chain: usize) -> Vec<AxiomReport> {
    vec![
        check_compatibility(sys),
        check_small_cancellation(sys),
        check_isolation(sys, Side::Left, max_chain),
        check_isolation(sys, Side::Right, max_chain),
    ]
}

/// Compatibility and Small Cancellation hold and at least one Isolation side
/// holds up to its bound.
pub fn ring_verdict(reports: &[AxiomReport]) -> bool {
    let status = |ax: Axiom| {
        reports
            .iter()
            .find(|r| r.axiom == ax)
            .map(|r| r.status.passes())
            .unwrap_or(false)
    };
    status(Axiom::Compatibility)
        && status(Axiom::SmallCancellation)
        && (status(Axiom::IsolationLeft) || status(Axiom::IsolationRight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Field;
    use crate::relations::{close_compatibility, ClosureCaps};
    use crate::words::Alphabet;

    fn system(field: Field, names: &[&str], rels: &[&str], tau: u32) -> RelationSystem {
        let a = Alphabet::new(names.iter().copied()).unwrap();
        let gens: Vec<Poly> = rels.iter().map(|r| Poly::parse(r, field, &a).unwrap()).collect();
        close_compatibility(field, tau, &a, &gens, ClosureCaps::default()).unwrap()
    }

    #[test]
    fn letter_scalar_passes_sc() {
        let sys = system(Field::Rational, &["x", "y"], &["2 + x"], 10);
        let r = check_small_cancellation(&sys);
        assert_eq!(r.status, Status::Holds);
        assert_eq!(check_compatibility(&sys).status, Status::Holds);
    }

    #[test]
    fn low_lambda_relation_fails_with_witness() {
        let sys = system(Field::prime(2).unwrap(), &["x", "y"], &["1 + x*y"], 10);
        let r = check_small_cancellation(&sys);
        assert_eq!(r.status, Status::Fails);
        let Some(Witness::Combination { gamma, element }) = r.witness else {
            panic!("missing witness")
        };
        assert!(recheck_combination(&sys, &gamma, &element));
    }

    #[test]
    fn cancelling_pair_fails() {
        // (1 + x) − (2 + x) = −1 over GF(3): the only high monomial cancels.
        let f = Field::prime(3).unwrap();
        let sys = system(f, &["x"], &["1 + x", "2 + x"], 10);
        let r = check_small_cancellation(&sys);
        assert_eq!(r.status, Status::Fails);
        let Some(Witness::Combination { gamma, element }) = r.witness else {
            panic!("missing witness")
        };
        assert!(recheck_combination(&sys, &gamma, &element));
        assert!(element.monomials().all(|m| m.is_empty()));
    }

    #[test]
    fn incidence_examples() {
        let sys = system(Field::prime(2).unwrap(), &["x", "y"], &["x^-1 + y"], 10);
        let g = incidence_graph(&sys, Lambda::Finite(0));
        let x = sys.parse_word("x").unwrap();
        let yi = sys.parse_word("y^-1").unwrap();
        assert!(g.has_edge(&x, &yi) && g.has_edge(&yi, &x));
        assert!(g.has_edge(&x, &x));
        let inf_only = incidence_graph(&sys, Lambda::Infinite);
        assert!(inf_only.edges.is_empty());
    }

    #[test]
    fn isolation_bound_one_is_vacuous() {
        let sys = system(Field::prime(2).unwrap(), &["x", "y"], &["x + x*y"], 10);
        let r = check_isolation(&sys, Side::Left, 1);
        assert_eq!(r.status, Status::HoldsUpToBound);
        assert!(r.note.unwrap().starts_with("vacuous"));
    }
}
