//! Generators for group-algebra and trinomial presentations and the tagged
//! test corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{Field, Poly};
use crate::axioms::{check_all, AxiomReport, DEFAULT_MAX_CHAIN};
use crate::relations::{close_compatibility, ClosureCaps, Presentation, RelationError};
use crate::words::{Alphabet, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExampleError {
    #[error("trinomial words must be nonempty")]
    EmptyWord,
    #[error("relator {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
}

fn cyclically_reduced(w: &Word) -> bool {
    match (w.first(), w.last()) {
        (Some(a), Some(b)) => w.len() == 1 || a != b.inverse(),
        _ => true,
    }
}

/// Relations `r − 1` for each relator (`r + 1` in characteristic 2).
pub fn gen_group_algebra(
    alphabet: &Alphabet,
    relators: &[Word],
    field: Field,
    tau: u32,
) -> Result<Presentation, ExampleError> {
    let mut relations = Vec::new();
    for r in relators {
        if !cyclically_reduced(r) {
            return Err(ExampleError::NotCyclicallyReduced(alphabet.format_word(r)));
        }
        let p = Poly::from_terms(
            field,
            [(r.clone(), field.one()), (Word::identity(), field.from_i64(-1))],
        );
        if !p.is_zero() {
            relations.push(p);
        }
    }
    Ok(Presentation {
        field,
        tau,
        alphabet: alphabet.clone(),
        relations,
    })
}

/// All cyclic conjugates of `r` and `r⁻¹`.
fn cyclic_words(r: &Word) -> Vec<Word> {
    let mut out = Vec::new();
    for w in [r.clone(), r.inverse()] {
        let l = w.letters();
        for i in 0..l.len() {
            let mut v = l[i..].to_vec();
            v.extend_from_slice(&l[..i]);
            out.push(Word::from(v));
        }
    }
    out
}

/// Longest word that is a prefix of two distinct cyclic conjugates of the
/// relators or their inverses (a group-theoretic piece).
pub fn max_piece_length(relators: &[Word]) -> usize {
    let words: Vec<Word> = relators.iter().flat_map(cyclic_words).collect();
    let mut best = 0;
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if a == b {
                continue;
            }
            let common = a
                .letters()
                .iter()
                .zip(b.letters())
                .take_while(|(x, y)| x == y)
                .count();
            best = best.max(common.min(a.len() - 1));
        }
    }
    best
}

/// A single relator of length `len` over `alphabet` whose cyclic words share
/// no two-letter subword, so every piece is a single letter and the
/// presentation is C(len).
pub fn single_relator_cm(alphabet: &Alphabet, len: usize) -> Option<Word> {
    let letters: Vec<Letter> = alphabet.letters().collect();
    let mut path: Vec<Letter> = Vec::new();
    let mut used = std::collections::HashSet::new();

    fn pair_ok(
        used: &std::collections::HashSet<(Letter, Letter)>,
        a: Letter,
        b: Letter,
    ) -> bool {
        a != b.inverse()
            && a != b
            && !used.contains(&(a, b))
            && !used.contains(&(b.inverse(), a.inverse()))
            && (a, b) != (b.inverse(), a.inverse())
    }

    fn dfs(
        letters: &[Letter],
        len: usize,
        path: &mut Vec<Letter>,
        used: &mut std::collections::HashSet<(Letter, Letter)>,
    ) -> bool {
        if path.len() == len {
            let (a, b) = (*path.last().unwrap(), path[0]);
            return pair_ok(used, a, b);
        }
        for &l in letters {
            if let Some(&prev) = path.last() {
                if !pair_ok(used, prev, l) {
                    continue;
                }
                used.insert((prev, l));
                path.push(l);
                if dfs(letters, len, path, used) {
                    return true;
                }
                path.pop();
                used.remove(&(prev, l));
            } else {
                path.push(l);
                if dfs(letters, len, path, used) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }

    dfs(&letters, len, &mut path, &mut used).then(|| Word::from(path))
}

/// The single trinomial `1 + v + v·w`.
pub fn gen_trinomial(
    alphabet: &Alphabet,
    w: &Word,
    v: &Word,
    field: Field,
    tau: u32,
) -> Result<Presentation, ExampleError> {
    if w.is_empty() || v.is_empty() {
        return Err(ExampleError::EmptyWord);
    }
    let p = Poly::from_terms(
        field,
        [
            (Word::identity(), field.one()),
            (v.clone(), field.one()),
            (v.mul(w), field.one()),
        ],
    );
    Ok(Presentation {
        field,
        tau,
        alphabet: alphabet.clone(),
        relations: vec![p],
    })
}

/// `(1 + w)·v − 1`, which lies in the ideal of `1 + v + v·w` exactly when
/// `1 + w` is invertible with inverse `v` modulo it.
pub fn inverse_query(w: &Word, v: &Word, field: Field) -> Poly {
    let one_plus_w = Poly::from_terms(field, [(Word::identity(), field.one()), (w.clone(), field.one())]);
    one_plus_w
        .mul(&Poly::monomial(field, v.clone()))
        .sub(&Poly::monomial(field, Word::identity()))
}

#[derive(Clone, Debug)]
pub enum ScreenOutcome {
    Diverged(RelationError),
    Checked { passes: bool, reports: Vec<AxiomReport> },
}

#[derive(Clone, Debug)]
pub struct Screening {
    pub v: Word,
    pub outcome: ScreenOutcome,
}

/// Positive words up to `max_len` sharing no two-letter subword with `w`,
/// shortest first.
pub fn trinomial_candidates(alphabet: &Alphabet, w: &Word, max_len: usize) -> Vec<Word> {
    let positive: Vec<Letter> = alphabet.letters().filter(|l| !l.is_inverse()).collect();
    let w_pairs: Vec<&[Letter]> = w.letters().windows(2).collect();
    let mut out = Vec::new();
    let mut layer = vec![Vec::<Letter>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for base in &layer {
            for &l in &positive {
                let mut v = base.clone();
                v.push(l);
                if v.windows(2).any(|p| w_pairs.contains(&p)) {
                    continue;
                }
                out.push(Word::from(v.clone()));
                next.push(v);
            }
        }
        layer = next;
    }
    out
}

/// Runs each candidate trinomial through closure and the axiom checkers.
pub fn screen_trinomials(
    alphabet: &Alphabet,
    w: &Word,
    candidates: &[Word],
    field: Field,
    tau: u32,
    caps: ClosureCaps,
) -> Vec<Screening> {
    candidates
        .iter()
        .map(|v| {
            let pres = gen_trinomial(alphabet, w, v, field, tau).expect("nonempty words");
            let outcome = match close_compatibility(field, tau, alphabet, &pres.relations, caps) {
                Err(e) => ScreenOutcome::Diverged(e),
                Ok(sys) => {
                    let reports = check_all(&sys, DEFAULT_MAX_CHAIN);
                    ScreenOutcome::Checked {
                        passes: crate::axioms::ring_verdict(&reports),
                        reports,
                    }
                }
            };
            Screening { v: v.clone(), outcome }
        })
        .collect()
}

/// Which axioms an instance is built to pass.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DesignTags {
    pub small_cancellation: bool,
    /// At least one isolation side.
    pub isolation: bool,
}

impl DesignTags {
    pub fn ring(self) -> bool {
        self.small_cancellation && self.isolation
    }
}

#[derive(Clone, Debug)]
pub struct CorpusInstance {
    pub name: String,
    pub presentation: Presentation,
    pub tags: DesignTags,
}

impl CorpusInstance {
    pub fn file_name(&self) -> String {
        format!("corpus-{}.pres", self.name)
    }

    /// Presentation text preceded by a comment line carrying the tags.
    pub fn file_text(&self) -> String {
        format!(
            "# corpus instance {}: designed small-cancellation={} isolation={}\n{}",
            self.name,
            self.tags.small_cancellation,
            self.tags.isolation,
            self.presentation.to_text()
        )
    }
}

struct Template {
    name: &'static str,
    field: Field,
    tau: u32,
    alphabet: &'static [&'static str],
    relations: &'static [&'static str],
    sc: bool,
    iso: bool,
}

fn gf(p: u64) -> Field {
    Field::prime(p).expect("prime")
}

fn templates() -> Vec<Template> {
    let t = |name, field, tau, alphabet, relations, sc, iso| Template {
        name,
        field,
        tau,
        alphabet,
        relations,
        sc,
        iso,
    };
    vec![
        t("binomial-orbit", gf(2), 10, &["x", "y"], &["x^-1 + y"], false, true),
        t("letter-gf2", gf(2), 10, &["x", "y"], &["1 + x"], true, true),
        t("letter-q", Field::Rational, 10, &["x", "y"], &["2 + x"], true, true),
        t("two-letters-gf3", gf(3), 10, &["x", "y", "z"], &["1 + x", "1 + y"], true, true),
        t("conjugate-q", Field::Rational, 10, &["x", "y"], &["y*x*y^-1 - 3"], true, true),
        t("inverse-gf5", gf(5), 10, &["x", "y"], &["3 + x^-1"], true, true),
        t("deep-conjugate-gf7", gf(7), 10, &["a", "b", "c"], &["1 + 3*b*c*a*c^-1*b^-1"], true, true),
        t("mixed-q", Field::Rational, 10, &["x", "y", "z"], &["1 + x", "-1 + y*z*y^-1"], true, true),
        t("shifted-gf2", gf(2), 10, &["a", "b"], &["a + a*b"], true, true),
        t("half-q", Field::Rational, 10, &["u", "v", "w"], &["1/2 + w*u*w^-1", "1 + v"], true, true),
        t("conjugate-pair-gf3", gf(3), 10, &["x", "y"], &["1 + x", "1 + y*x*y^-1"], true, true),
        t("relator-two", gf(2), 10, &["x", "y"], &["1 + x*y"], false, true),
        t("ratio-gf5", gf(5), 10, &["x", "y"], &["x + 2*y"], false, true),
        t("square", gf(2), 10, &["x", "y"], &["1 + x*x"], false, true),
        t("monomial", gf(2), 10, &["x", "y"], &["x"], false, true),
        t("constant-combination", gf(3), 10, &["x", "y"], &["1 + x", "2 + x"], false, true),
        t("commutator", gf(2), 2, &["x", "y"], &["1 + x*y*x^-1*y^-1"], false, false),
        t("positive-pair", gf(2), 10, &["x", "y", "z"], &["x*y + x*z*y"], false, true),
        t("relator-three", Field::Rational, 10, &["x", "y", "z"], &["1 + x*y*z"], false, true),
        t("cyclotomic", gf(2), 10, &["x", "y"], &["1 + x + x*x"], false, true),
    ]
}

/// Applies the automorphism permuting generators and inverting some.
fn map_poly(p: &Poly, perm: &[u32], flip: &[bool]) -> Poly {
    Poly::from_terms(
        p.field(),
        p.terms().map(|(w, c)| {
            let letters: Vec<Letter> = w
                .letters()
                .iter()
                .map(|l| {
                    let g = l.generator() as usize;
                    Letter::new(perm[g], l.is_inverse() ^ flip[g])
                })
                .collect();
            (Word::from(letters), c.clone())
        }),
    )
}

/// The tagged corpus: ten instances designed to pass every axiom, ten to
/// fail Small Cancellation. Seed 0 gives the canonical forms (the binomial
/// orbit of `x⁻¹ + y` first); other seeds apply a random generator
/// permutation with inversions and rescale each relation.
pub fn gen_corpus(seed: u64) -> Vec<CorpusInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    templates()
        .into_iter()
        .map(|t| {
            let alphabet = Alphabet::new(t.alphabet.iter().copied()).expect("alphabet");
            let mut relations: Vec<Poly> = t
                .relations
                .iter()
                .map(|r| Poly::parse(r, t.field, &alphabet).expect("template relation"))
                .collect();
            if seed != 0 {
                let n = alphabet.len();
                let mut perm: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    perm.swap(i, rng.gen_range(0..=i));
                }
                let flip: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                relations = relations
                    .iter()
                    .map(|p| {
                        let scale = match t.field.nonzero_elements() {
                            Some(all) => all[rng.gen_range(0..all.len())].clone(),
                            None => t.field.from_i64(rng.gen_range(1..=5)),
                        };
                        map_poly(p, &perm, &flip).scale(&scale)
                    })
                    .collect();
            }
            CorpusInstance {
                name: t.name.to_string(),
                presentation: Presentation {
                    field: t.field,
                    tau: t.tau,
                    alphabet,
                    relations,
                },
                tags: DesignTags {
                    small_cancellation: t.sc,
                    isolation: t.iso,
                },
            }
        })
        .collect()
}

/// Presentation files shipped with the repository, as `(file name, text)`.
pub fn shipped_presentations() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = gen_corpus(0)
        .into_iter()
        .map(|c| (c.file_name(), c.file_text()))
        .collect();
    let alphabet = Alphabet::new(["a", "b", "c", "d"]).expect("alphabet");
    let relator = single_relator_cm(&alphabet, 24).expect("relator exists");
    let pres = gen_group_algebra(&alphabet, &[relator], gf(2), 10).expect("cyclically reduced");
    out.push((
        "group-algebra-c24.pres".to_string(),
        "# group algebra of a one-relator C(24) group over GF(2)\n".to_string() + &pres.to_text(),
    ));
    out.push((
        "free-group.pres".to_string(),
        "# group algebra of the free group: no relations\n".to_string()
            + &gen_group_algebra(&Alphabet::new(["x", "y"]).expect("alphabet"), &[], gf(2), 10)
                .expect("no relators")
                .to_text(),
    ));
    out
}
