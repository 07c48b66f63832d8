//! The order <_f, the additive closure Add(R) and greedy head reduction
//! deciding ideal membership with certificates.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::algebra::{from_row, to_row, EchelonBasis, Insert, MonoKey, Poly, Row, Scalar};
use crate::chart::{Charter, FChar};
use crate::relations::RelationSystem;
use crate::words::Word;

/// <_f: f-characteristic, then length, then letter order.
#[derive(Debug)]
pub struct FOrder<'a> {
    charter: Charter<'a>,
    cache: RefCell<HashMap<Word, FChar>>,
}

impl<'a> FOrder<'a> {
    pub fn new(charter: Charter<'a>) -> Self {
        FOrder {
            charter,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn charter(&self) -> &Charter<'a> {
        &self.charter
    }

    pub fn system(&self) -> &'a RelationSystem {
        self.charter.system()
    }

    pub fn f(&self, w: &Word) -> FChar {
        if let Some(f) = self.cache.borrow().get(w) {
            return *f;
        }
        let f = self.charter.f_char(w);
        self.cache.borrow_mut().insert(w.clone(), f);
        f
    }

    pub fn key(&self, w: &Word) -> MonoKey {
        let f = self.f(w);
        MonoKey {
            major: (f.min_cov, f.n_virt),
            word: w.clone(),
        }
    }

    pub fn row(&self, p: &Poly) -> Row {
        to_row(p, |w| self.key(w))
    }

    /// The <_f-greatest monomial.
    pub fn leading(&self, p: &Poly) -> Option<Word> {
        p.monomials().max_by_key(|w| self.key(w)).cloned()
    }
}

pub fn cmp_f(m1: &Word, m2: &Word, order: &FOrder) -> Ordering {
    order.key(m1).cmp(&order.key(m2))
}

/// Add(R): reduced echelon basis of the relation span under <_f, tracked by
/// relation index.
pub fn add_closure(order: &FOrder) -> EchelonBasis {
    let sys = order.system();
    let mut basis = EchelonBasis::new(sys.field(), true);
    for (i, p) in sys.relations().iter().enumerate() {
        basis.insert(order.row(p), i);
    }
    basis.finalize();
    basis
}

/// `scalar · L·q·R` with `q = Σ parts` over closed relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub left: Word,
    pub right: Word,
    pub q: Poly,
    pub scalar: Scalar,
    pub parts: Vec<(usize, Scalar)>,
}

impl Step {
    pub fn layout(&self) -> Poly {
        self.q.scale_and_translate(&self.scalar, &self.left, &self.right)
    }

    /// Longest monomial among the translates `L·p_i·R` of the constituents.
    pub fn bound(&self, sys: &RelationSystem) -> usize {
        self.parts
            .iter()
            .map(|(i, _)| sys.relations()[*i].translate(&self.left, &self.right).max_len())
            .max()
            .unwrap_or(0)
            .max(self.layout().max_len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub next: Poly,
    pub step: Step,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    FirstBranch,
    AllBranches,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(Policy::FirstBranch),
            "all" => Ok(Policy::AllBranches),
            other => Err(format!("unknown policy {other:?}")),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::FirstBranch => "first",
            Policy::AllBranches => "all",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Member,
    Nonmember,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::Nonmember => "nonmember",
            Verdict::Inconclusive => "inconclusive(step-budget)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub input: Poly,
    pub verdict: Verdict,
    pub steps: Vec<Step>,
    pub normal_form: Option<Poly>,
    /// Longest monomial over the input, every intermediate element and every
    /// constituent translate.
    pub bound: usize,
    /// All-branches policy only: whether every explored branch agreed.
    pub branches_agree: Option<bool>,
    pub explored: usize,
}

impl MembershipCertificate {
    /// Member certificates must re-sum to the input exactly.
    pub fn verify(&self) -> bool {
        match self.verdict {
            Verdict::Member => {
                let mut sum = Poly::zero(self.input.field());
                for s in &self.steps {
                    sum = sum.add(&s.layout());
                }
                sum == self.input
            }
            _ => true,
        }
    }
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Greedy reducer over Add(R).
pub struct Greedy<'a> {
    order: FOrder<'a>,
    rows: Vec<(Poly, Vec<(usize, Scalar)>)>,
}

impl<'a> Greedy<'a> {
    pub fn new(charter: Charter<'a>) -> Self {
        let order = FOrder::new(charter);
        let basis = add_closure(&order);
        let field = order.system().field();
        let rows = basis
            .rows()
            .into_iter()
            .map(|(row, combo)| {
                (
                    from_row(field, row),
                    combo.iter().map(|(i, s)| (*i, s.clone())).collect(),
                )
            })
            .collect();
        Greedy { order, rows }
    }

    pub fn order(&self) -> &FOrder<'a> {
        &self.order
    }

    pub fn system(&self) -> &'a RelationSystem {
        self.order.system()
    }

    /// Rows of Add(R) in decreasing pivot order.
    pub fn add_rows(&self) -> &[(Poly, Vec<(usize, Scalar)>)] {
        &self.rows
    }

    /// Every head reduction of `p`: splits `m* = L·a·R` with `a ∈ M` such
    /// that some element of `L·Add(R)·R` has <_f-leading monomial `m*`.
    pub fn reduce_once(&self, p: &Poly) -> Vec<Branch> {
        let sys = self.system();
        let Some(top) = self.order.leading(p) else {
            return Vec::new();
        };
        let top_key = self.order.key(&top);
        let coeff = p.coeff(&top).expect("leading monomial").clone();
        let letters = top.letters();
        let mut splits = Vec::new();
        for s in 0..=letters.len() {
            if !sys.monomials().is_empty() {
                splits.push((s, s));
            }
            let reach = sys.longest_m_prefix(&letters[s..]);
            for e in s + 1..=s + reach {
                splits.push((s, e));
            }
        }
        let mut seen: HashSet<Poly> = HashSet::new();
        let mut out = Vec::new();
        for (s, e) in splits {
            let left = top.prefix(s);
            let right = top.suffix_from(e);
            let mut basis = EchelonBasis::new(sys.field(), true);
            let mut translated: Vec<Poly> = Vec::new();
            for (q, _) in &self.rows {
                let t = q.translate(&left, &right);
                let row = self.order.row(&t);
                if row.keys().next_back().is_some_and(|k| *k >= top_key) {
                    basis.insert(row, translated.len());
                    translated.push(t);
                } else {
                    translated.push(Poly::zero(sys.field()));
                }
            }
            let Some((row, combo)) = basis.row_for_pivot(&top_key) else {
                continue;
            };
            let layout = from_row(sys.field(), row);
            let next = p.sub(&layout.scale(&coeff));
            if !seen.insert(next.clone()) {
                continue;
            }
            let mut q = Poly::zero(sys.field());
            let mut parts: HashMap<usize, Scalar> = HashMap::new();
            for (i, g) in combo {
                q = q.add(&self.rows[*i].0.scale(g));
                for (rel, c) in &self.rows[*i].1 {
                    let v = c.mul(g);
                    let entry = parts.entry(*rel).or_insert_with(|| sys.field().zero());
                    *entry = entry.add(&v);
                }
            }
            let mut parts: Vec<(usize, Scalar)> =
                parts.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            parts.sort_by_key(|(i, _)| *i);
            debug_assert_eq!(q.translate(&left, &right), layout);
            out.push(Branch {
                next,
                step: Step {
                    left,
                    right,
                    q,
                    scalar: coeff.clone(),
                    parts,
                },
            });
        }
        out
    }

    pub fn is_member(&self, p: &Poly, policy: Policy, max_steps: usize) -> MembershipCertificate {
        match policy {
            Policy::FirstBranch => self.first_branch(p, max_steps),
            Policy::AllBranches => self.all_branches(p, max_steps),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn certificate(
        &self,
        input: &Poly,
        verdict: Verdict,
        steps: Vec<Step>,
        trail: &[Poly],
        normal_form: Option<Poly>,
        branches_agree: Option<bool>,
        explored: usize,
    ) -> MembershipCertificate {
        let sys = self.system();
        let bound = trail
            .iter()
            .map(Poly::max_len)
            .chain(steps.iter().map(|s| s.bound(sys)))
            .max()
            .unwrap_or(0)
            .max(input.max_len());
        MembershipCertificate {
            input: input.clone(),
            verdict,
            steps,
            normal_form,
            bound,
            branches_agree,
            explored,
        }
    }

    fn first_branch(&self, p: &Poly, max_steps: usize) -> MembershipCertificate {
        let mut cur = p.clone();
        let mut steps = Vec::new();
        let mut trail = vec![cur.clone()];
        loop {
            if cur.is_zero() {
                return self.certificate(p, Verdict::Member, steps, &trail, None, None, trail.len());
            }
            if steps.len() >= max_steps {
                return self.certificate(p, Verdict::Inconclusive, steps, &trail, Some(cur), None, trail.len());
            }
            let mut branches = self.reduce_once(&cur);
            if branches.is_empty() {
                return self.certificate(p, Verdict::Nonmember, steps, &trail, Some(cur), None, trail.len());
            }
            let b = branches.swap_remove(0);
            steps.push(b.step);
            cur = b.next;
            trail.push(cur.clone());
        }
    }

    fn all_branches(&self, p: &Poly, max_steps: usize) -> MembershipCertificate {
        struct Search<'g, 'a> {
            greedy: &'g Greedy<'a>,
            visited: HashSet<Poly>,
            budget: usize,
            exhausted: bool,
            zero_path: Option<(Vec<Step>, Vec<Poly>)>,
            irreducible: Option<Poly>,
        }
        impl Search<'_, '_> {
            fn go(&mut self, cur: &Poly, steps: &mut Vec<Step>, trail: &mut Vec<Poly>) {
                if !self.visited.insert(cur.clone()) {
                    return;
                }
                if cur.is_zero() {
                    if self.zero_path.is_none() {
                        self.zero_path = Some((steps.clone(), trail.clone()));
                    }
                    return;
                }
                if self.visited.len() > self.budget {
                    self.exhausted = true;
                    return;
                }
                let branches = self.greedy.reduce_once(cur);
                if branches.is_empty() {
                    if self.irreducible.is_none() {
                        self.irreducible = Some(cur.clone());
                    }
                    return;
                }
                for b in branches {
                    if self.exhausted {
                        return;
                    }
                    steps.push(b.step);
                    trail.push(b.next.clone());
                    self.go(&b.next, steps, trail);
                    trail.pop();
                    steps.pop();
                }
            }
        }
        let mut s = Search {
            greedy: self,
            visited: HashSet::new(),
            budget: max_steps,
            exhausted: false,
            zero_path: None,
            irreducible: None,
        };
        let mut steps = Vec::new();
        let mut trail = vec![p.clone()];
        s.go(p, &mut steps, &mut trail);
        let explored = s.visited.len();
        let agree = !(s.zero_path.is_some() && s.irreducible.is_some());
        if s.exhausted {
            let (steps, trail) = s.zero_path.unwrap_or_default();
            return self.certificate(p, Verdict::Inconclusive, steps, &trail, s.irreducible, Some(agree), explored);
        }
        match s.zero_path {
            Some((steps, trail)) => {
                self.certificate(p, Verdict::Member, steps, &trail, s.irreducible, Some(agree), explored)
            }
            None => self.certificate(p, Verdict::Nonmember, Vec::new(), std::slice::from_ref(p), s.irreducible, Some(agree), explored),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SampleCaps {
    pub samples: usize,
    /// Longest random `L`, `R` and nonmember candidate.
    pub max_side: usize,
    pub max_steps: usize,
}

impl Default for SampleCaps {
    fn default() -> Self {
        SampleCaps {
            samples: 100,
            max_side: 3,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerReport {
    pub layouts_passed: usize,
    pub layouts_total: usize,
    pub layout_witness: Option<Poly>,
    /// Greedy nonmembers the oracle did not contradict.
    pub nonmembers_passed: usize,
    pub nonmembers_total: usize,
    pub nonmember_witness: Option<Poly>,
}

impl GroebnerReport {
    pub fn passes(&self) -> bool {
        self.layouts_passed == self.layouts_total && self.nonmembers_passed == self.nonmembers_total
    }
}

/// Property sample: layouts `L·q·R` of `sources` must reduce to zero, and
/// no random element the greedy reducer rejects may be an oracle member at
/// its certificate bound.
pub fn groebner_check<R: rand::Rng>(
    greedy: &Greedy,
    sources: &[Poly],
    rng: &mut R,
    caps: SampleCaps,
) -> GroebnerReport {
    let sys = greedy.system();
    let oracle = crate::oracle::Oracle::new(sys);
    let mut report = GroebnerReport {
        layouts_passed: 0,
        layouts_total: 0,
        layout_witness: None,
        nonmembers_passed: 0,
        nonmembers_total: 0,
        nonmember_witness: None,
    };
    if sources.is_empty() {
        return report;
    }
    for _ in 0..caps.samples {
        let q = &sources[rng.gen_range(0..sources.len())];
        let left = random_word(sys, rng, caps.max_side);
        let right = random_word(sys, rng, caps.max_side);
        let layout = q.translate(&left, &right);
        report.layouts_total += 1;
        let cert = greedy.is_member(&layout, Policy::FirstBranch, caps.max_steps);
        if cert.verdict == Verdict::Member && cert.verify() {
            report.layouts_passed += 1;
        } else if report.layout_witness.is_none() {
            report.layout_witness = Some(layout.clone());
        }

        let extra = Poly::monomial(sys.field(), random_word(sys, rng, caps.max_side));
        let candidate = if rng.gen_bool(0.5) { extra } else { layout.add(&extra) };
        let cert = greedy.is_member(&candidate, Policy::FirstBranch, caps.max_steps);
        if cert.verdict == Verdict::Nonmember {
            report.nonmembers_total += 1;
            match oracle.member(&candidate, cert.bound) {
                Ok(v) if v.is_member() => {
                    if report.nonmember_witness.is_none() {
                        report.nonmember_witness = Some(candidate);
                    }
                }
                _ => report.nonmembers_passed += 1,
            }
        }
    }
    report
}

/// Uniform-length random reduced word of length at most `max_len`.
pub fn random_word<R: rand::Rng>(sys: &RelationSystem, rng: &mut R, max_len: usize) -> Word {
    let letters: Vec<_> = sys.alphabet().letters().collect();
    let len = rng.gen_range(0..=max_len);
    let mut out: Vec<crate::words::Letter> = Vec::with_capacity(len);
    while out.len() < len {
        let l = letters[rng.gen_range(0..letters.len())];
        if out.last() == Some(&l.inverse()) {
            continue;
        }
        out.push(l);
    }
    Word::from(out)
}

/// Inserts `p` into a fresh <_f echelon basis of Add(R) and reports whether
/// it is in the span of the closed relations.
pub fn in_relation_span(order: &FOrder, p: &Poly) -> bool {
    let mut basis = add_closure(order);
    let tag = order.system().relations().len();
    matches!(basis.insert(order.row(p), tag), Insert::Dependent(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Field;
    use crate::relations::{close_compatibility, ClosureCaps};
    use crate::words::Alphabet;

    fn system(field: Field, rels: &[&str]) -> RelationSystem {
        let a = Alphabet::new(["x", "y"]).unwrap();
        let gens: Vec<Poly> = rels.iter().map(|r| Poly::parse(r, field, &a).unwrap()).collect();
        close_compatibility(field, 10, &a, &gens, ClosureCaps::default()).unwrap()
    }

    #[test]
    fn order_examples() {
        let sys = system(Field::prime(2).unwrap(), &["1 + x"]);
        let order = FOrder::new(Charter::new(&sys, 2).unwrap());
        let y = sys.parse_word("y").unwrap();
        let x = sys.parse_word("x").unwrap();
        let yy = sys.parse_word("y*y").unwrap();
        assert_eq!(cmp_f(&y, &x, &order), Ordering::Less);
        assert_eq!(cmp_f(&y, &yy, &order), Ordering::Less);
        assert_eq!(cmp_f(&x, &x, &order), Ordering::Equal);
    }

    #[test]
    fn add_closure_rows() {
        let sys = system(Field::prime(2).unwrap(), &["1 + x"]);
        let order = FOrder::new(Charter::new(&sys, 2).unwrap());
        assert_eq!(add_closure(&order).rank(), sys.relations().len());
    }

    #[test]
    fn layout_reduces_in_one_step() {
        let sys = system(Field::prime(2).unwrap(), &["1 + x"]);
        let g = Greedy::new(Charter::new(&sys, 2).unwrap());
        let p = sys.parse_poly("y*y + y*x*y").unwrap();
        let branches = g.reduce_once(&p);
        assert!(branches.iter().any(|b| b.next.is_zero()));
        let cert = g.is_member(&p, Policy::FirstBranch, 100);
        assert_eq!(cert.verdict, Verdict::Member);
        assert!(cert.verify());
    }

    #[test]
    fn irreducible_and_nonmember() {
        let sys = system(Field::prime(2).unwrap(), &["1 + x"]);
        let g = Greedy::new(Charter::new(&sys, 2).unwrap());
        let y = sys.parse_poly("y").unwrap();
        assert!(g.reduce_once(&y).is_empty());
        let p = sys.parse_poly("1 + x + y").unwrap();
        for policy in [Policy::FirstBranch, Policy::AllBranches] {
            let cert = g.is_member(&p, policy, 100);
            assert_eq!(cert.verdict, Verdict::Nonmember);
            assert_eq!(cert.normal_form, Some(y.clone()));
        }
    }

    #[test]
    fn zero_and_generator() {
        let sys = system(Field::Rational, &["2 + x"]);
        let g = Greedy::new(Charter::new(&sys, 2).unwrap());
        let zero = g.is_member(&Poly::zero(Field::Rational), Policy::AllBranches, 10);
        assert_eq!(zero.verdict, Verdict::Member);
        assert!(zero.steps.is_empty());
        let gen = g.is_member(&sys.generators()[0], Policy::FirstBranch, 10);
        assert_eq!(gen.verdict, Verdict::Member);
        assert_eq!(gen.steps.len(), 1);
        assert!(gen.verify());
    }

    #[test]
    fn proportional_relations_give_one_row() {
        let sys = system(Field::Rational, &["2 + x", "4 + 2*x"]);
        let order = FOrder::new(Charter::new(&sys, 2).unwrap());
        assert_eq!(add_closure(&order).rank(), 2);
        let single = system(Field::Rational, &["2 + x"]);
        assert_eq!(sys.relations(), single.relations());
    }

    #[test]
    fn overlapping_pair_keeps_distinct_pivots() {
        let sys = system(Field::prime(3).unwrap(), &["1 + x", "1 + y*x*y^-1"]);
        let order = FOrder::new(Charter::new(&sys, 2).unwrap());
        let basis = add_closure(&order);
        assert!(basis.is_reduced());
        let pivots: HashSet<_> = basis.pivot_keys().cloned().collect();
        assert_eq!(pivots.len(), basis.rank());
        assert_eq!(basis.rank(), sys.relations().len());
    }

    #[test]
    fn groebner_sample_and_negative_control() {
        use rand::SeedableRng;
        let sys = system(Field::prime(2).unwrap(), &["1 + x"]);
        let g = Greedy::new(Charter::new(&sys, 2).unwrap());
        let caps = SampleCaps {
            samples: 20,
            max_side: 2,
            max_steps: 1000,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let report = groebner_check(&g, sys.relations(), &mut rng, caps);
        assert!(report.passes(), "{report:?}");
        assert_eq!(report.layouts_total, 20);
        let corrupt = vec![sys.parse_poly("1 + y").unwrap()];
        let report = groebner_check(&g, &corrupt, &mut rng, caps);
        assert!(!report.passes());
        assert!(report.layout_witness.is_some());
    }
}
