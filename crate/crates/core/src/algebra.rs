//! Exact scalars, additively reduced elements of kF and sparse echelon bases.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Bound;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::words::{Alphabet, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("malformed coefficient {0:?}")]
    BadCoefficient(String),
    #[error("coefficient {0:?} has a zero denominator in {1}")]
    ZeroDenominator(String, Field),
    #[error("malformed polynomial {0:?}")]
    Malformed(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Coefficient field: the rationals or a prime field.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Prime(u64),
}

impl Field {
    /// Prime fields are limited to moduli below 2³² so products fit in `u64`.
    pub fn prime(p: u64) -> Result<Self, AlgebraError> {
        if is_prime(p) && p < (1 << 32) {
            Ok(Field::Prime(p))
        } else {
            Err(AlgebraError::NotPrime(p))
        }
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Scalar::Prime {
                value: n.rem_euclid(p as i64) as u64,
                modulus: p,
            },
        }
    }

    pub fn from_ratio(self, num: &BigInt, den: &BigInt) -> Option<Scalar> {
        if den.is_zero() {
            return None;
        }
        match self {
            Field::Rational => Some(Scalar::Rational(BigRational::new(num.clone(), den.clone()))),
            Field::Prime(p) => {
                let m = BigInt::from(p);
                let residue = |x: &BigInt| -> u64 {
                    let r = ((x % &m) + &m) % &m;
                    u64::try_from(r).expect("residue fits")
                };
                let d = residue(den);
                if d == 0 {
                    return None;
                }
                let n = Scalar::Prime {
                    value: residue(num),
                    modulus: p,
                };
                Some(n.mul(&Scalar::Prime { value: d, modulus: p }.inv()))
            }
        }
    }

    /// Parses an integer or `a/b` literal, with an optional leading `-`.
    pub fn parse_scalar(self, text: &str) -> Result<Scalar, AlgebraError> {
        let text = text.trim();
        let bad = || AlgebraError::BadCoefficient(text.to_string());
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        let digits = |s: &str| {
            let body = s.strip_prefix('-').unwrap_or(s);
            !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
        };
        if !digits(num) || !digits(den) || den.starts_with('-') {
            return Err(bad());
        }
        let n = BigInt::from_str(num).map_err(|_| bad())?;
        let d = BigInt::from_str(den).map_err(|_| bad())?;
        self.from_ratio(&n, &d)
            .ok_or_else(|| AlgebraError::ZeroDenominator(text.to_string(), self))
    }

    /// Every nonzero element when the field is finite.
    pub fn nonzero_elements(self) -> Option<Vec<Scalar>> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some(
                (1..p)
                    .map(|v| Scalar::Prime { value: v, modulus: p })
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "GF({p})"),
        }
    }
}

impl FromStr for Field {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "Q" {
            return Ok(Field::Rational);
        }
        let inner = s
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| AlgebraError::UnknownField(s.to_string()))?;
        let p: u64 = inner
            .trim()
            .parse()
            .map_err(|_| AlgebraError::UnknownField(s.to_string()))?;
        Field::prime(p)
    }
}

/// A field element; prime-field scalars carry their modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Prime { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Prime { value, .. } => *value == 1,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, modulus: m2 }) => {
                assert_eq!(modulus, m2, "mixed prime fields");
                Scalar::Prime {
                    value: (a + b) % modulus,
                    modulus: *modulus,
                }
            }
            _ => panic!("mixed field scalars"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, modulus: m2 }) => {
                assert_eq!(modulus, m2, "mixed prime fields");
                Scalar::Prime {
                    value: a * b % modulus,
                    modulus: *modulus,
                }
            }
            _ => panic!("mixed field scalars"),
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Scalar::Rational(a) => Scalar::Rational(a.recip()),
            Scalar::Prime { value, modulus } => {
                let mut result = 1u64;
                let mut base = *value;
                let mut exp = modulus - 2;
                while exp > 0 {
                    if exp & 1 == 1 {
                        result = result * base % modulus;
                    }
                    base = base * base % modulus;
                    exp >>= 1;
                }
                Scalar::Prime {
                    value: result,
                    modulus: *modulus,
                }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv())
    }

    pub fn pow(&self, exp: i64) -> Scalar {
        let base = if exp < 0 { self.inv() } else { self.clone() };
        let mut acc = self.field().one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

/// An additively reduced element of kF: nonzero coefficients keyed by
/// reduced words in shortlex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    field: Field,
    terms: BTreeMap<Word, Scalar>,
}

impl Poly {
    pub fn zero(field: Field) -> Self {
        Poly {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(field: Field, word: Word) -> Self {
        Self::term(field.one(), word)
    }

    pub fn term(coeff: Scalar, word: Word) -> Self {
        let mut p = Poly::zero(coeff.field());
        p.add_term(word, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Scalar)>>(field: Field, terms: I) -> Self {
        let mut p = Poly::zero(field);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn coeff(&self, w: &Word) -> Option<&Scalar> {
        self.terms.get(w)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.terms.contains_key(w)
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, word: Word, coeff: Scalar) {
        assert_eq!(coeff.field(), self.field, "mixed field scalars");
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(c) => {
                let s = c.add(&coeff);
                if s.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *c = s;
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        if self.field != other.field {
            return Err(AlgebraError::FieldMismatch(self.field, other.field));
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    /// Panicking sum for internal use where fields are known to agree.
    pub fn add(&self, other: &Poly) -> Poly {
        self.try_add(other).expect("field mismatch")
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, beta: &Scalar) -> Poly {
        if beta.is_zero() {
            return Poly::zero(self.field);
        }
        Poly {
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.mul(beta)))
                .collect(),
        }
    }

    /// `β · L · self · R` with free reduction of every monomial.
    pub fn scale_and_translate(&self, beta: &Scalar, left: &Word, right: &Word) -> Poly {
        let mut out = Poly::zero(self.field);
        if beta.is_zero() {
            return out;
        }
        for (w, c) in &self.terms {
            out.add_term(w.sandwich(left, right), c.mul(beta));
        }
        out
    }

    pub fn translate(&self, left: &Word, right: &Word) -> Poly {
        self.scale_and_translate(&self.field.one(), left, right)
    }

    /// Product in kF.
    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.field);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                out.add_term(a.mul(b), c.mul(d));
            }
        }
        out
    }

    /// Projective representative: the shortlex-least monomial gets
    /// coefficient 1. Zero stays zero.
    pub fn normalized(&self) -> Poly {
        match self.terms.values().next() {
            Some(c) if !c.is_one() => self.scale(&c.inv()),
            _ => self.clone(),
        }
    }

    pub fn parse(text: &str, field: Field, alphabet: &Alphabet) -> Result<Poly, AlgebraError> {
        let malformed = || AlgebraError::Malformed(text.to_string());
        let mut p = Poly::zero(field);
        let mut chunks: Vec<(bool, String)> = Vec::new();
        let mut negate = false;
        let mut current = String::new();
        let mut prev_caret = false;
        for ch in text.chars() {
            let is_sign = (ch == '+' || ch == '-') && !prev_caret;
            if is_sign && current.trim().is_empty() {
                if ch == '-' {
                    negate = !negate;
                }
            } else if is_sign {
                chunks.push((negate, std::mem::take(&mut current)));
                negate = ch == '-';
            } else {
                current.push(ch);
            }
            if !ch.is_whitespace() {
                prev_caret = ch == '^';
            }
        }
        if current.trim().is_empty() {
            if !chunks.is_empty() || negate {
                return Err(malformed());
            }
        } else {
            chunks.push((negate, current));
        }
        if chunks.is_empty() {
            return Err(malformed());
        }
        for (neg, chunk) in chunks {
            let chunk = chunk.trim();
            let (head, rest) = match chunk.split_once('*') {
                Some((h, r)) => (h.trim(), Some(r)),
                None => (chunk, None),
            };
            let numeric = !head.is_empty()
                && head.bytes().all(|b| b.is_ascii_digit() || b == b'/')
                && head.bytes().next().is_some_and(|b| b.is_ascii_digit());
            let (coeff, word) = if numeric {
                let c = field.parse_scalar(head)?;
                let w = match rest {
                    Some(r) => alphabet.parse_word(r)?,
                    None => Word::identity(),
                };
                (c, w)
            } else {
                (field.one(), alphabet.parse_word(chunk)?)
            };
            let coeff = if neg { coeff.neg() } else { coeff };
            p.add_term(word, coeff);
        }
        Ok(p)
    }

    /// Canonical text `c1*w1 + c2*w2`, terms in shortlex order, `0` for zero.
    pub fn format(&self, alphabet: &Alphabet) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(w, c)| format!("{}*{}", c, alphabet.format_word(w)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn into_terms(self) -> BTreeMap<Word, Scalar> {
        self.terms
    }
}

/// Ordering key for echelon rows: `major` ranks first, then shortlex on the
/// word. Rows pivot on their greatest key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonoKey {
    pub major: (u32, u32),
    pub word: Word,
}

impl MonoKey {
    pub fn plain(word: Word) -> Self {
        MonoKey {
            major: (0, 0),
            word,
        }
    }
}

pub type Row = BTreeMap<MonoKey, Scalar>;

/// Sparse combination of inserted inputs, keyed by caller-supplied tags.
pub type Combination = BTreeMap<usize, Scalar>;

#[derive(Clone, Debug)]
struct EchelonRow {
    row: Row,
    combo: Combination,
}

/// Outcome of inserting a vector into an [`EchelonBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insert {
    /// New pivot introduced.
    Added(MonoKey),
    /// Already in the span; the tracked combination of earlier inputs equal
    /// to the inserted vector (empty when untracked).
    Dependent(Combination),
}

/// Row-echelon basis with distinct pivots (each row's maximal key, with
/// coefficient 1). Optionally records how each row arises from inputs.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: Field,
    track: bool,
    rows: Vec<EchelonRow>,
    pivots: HashMap<MonoKey, usize>,
    reduced: bool,
}

fn axpy(target: &mut Row, factor: &Scalar, source: &Row) {
    for (k, v) in source {
        let delta = v.mul(factor);
        match target.get_mut(k) {
            Some(c) => {
                let s = c.add(&delta);
                if s.is_zero() {
                    target.remove(k);
                } else {
                    *c = s;
                }
            }
            None => {
                if !delta.is_zero() {
                    target.insert(k.clone(), delta);
                }
            }
        }
    }
}

fn axpy_combo(target: &mut Combination, factor: &Scalar, source: &Combination) {
    for (k, v) in source {
        let delta = v.mul(factor);
        match target.get_mut(k) {
            Some(c) => {
                let s = c.add(&delta);
                if s.is_zero() {
                    target.remove(k);
                } else {
                    *c = s;
                }
            }
            None => {
                if !delta.is_zero() {
                    target.insert(*k, delta);
                }
            }
        }
    }
}

/// Result of reducing a vector against the basis.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub remainder: Row,
    /// Combination of inputs subtracted from the vector (tracked bases only).
    pub used: Combination,
}

impl EchelonBasis {
    pub fn new(field: Field, track: bool) -> Self {
        EchelonBasis {
            field,
            track,
            rows: Vec::new(),
            pivots: HashMap::new(),
            reduced: true,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_pivot(&self, key: &MonoKey) -> bool {
        self.pivots.contains_key(key)
    }

    pub fn pivot_keys(&self) -> impl Iterator<Item = &MonoKey> {
        self.pivots.keys()
    }

    /// Rows as `(row, combination)` sorted by decreasing pivot.
    pub fn rows(&self) -> Vec<(&Row, &Combination)> {
        let mut out: Vec<_> = self.rows.iter().map(|r| (&r.row, &r.combo)).collect();
        out.sort_by(|a, b| b.0.keys().next_back().cmp(&a.0.keys().next_back()));
        out
    }

    pub fn row_for_pivot(&self, key: &MonoKey) -> Option<(&Row, &Combination)> {
        self.pivots
            .get(key)
            .map(|&i| (&self.rows[i].row, &self.rows[i].combo))
    }

    /// Eliminates every pivot key from `row`, scanning keys downward.
    pub fn reduce(&self, row: &Row) -> Reduction {
        let mut rem = row.clone();
        let mut used = Combination::new();
        let mut cursor: Option<MonoKey> = None;
        loop {
            let next = match &cursor {
                None => rem.keys().next_back().cloned(),
                Some(c) => rem
                    .range((Bound::Unbounded, Bound::Excluded(c)))
                    .next_back()
                    .map(|(k, _)| k.clone()),
            };
            let Some(key) = next else { break };
            if let Some(&i) = self.pivots.get(&key) {
                let factor = rem[&key].neg();
                let r = &self.rows[i];
                axpy(&mut rem, &factor, &r.row);
                if self.track {
                    axpy_combo(&mut used, &factor.neg(), &r.combo);
                }
            }
            cursor = Some(key);
        }
        Reduction {
            remainder: rem,
            used,
        }
    }

    pub fn contains(&self, row: &Row) -> bool {
        self.reduce(row).remainder.is_empty()
    }

    /// Inserts `row`; `tag` identifies it in tracked combinations.
    pub fn insert(&mut self, row: Row, tag: usize) -> Insert {
        let Reduction { remainder, used } = self.reduce(&row);
        if remainder.is_empty() {
            return Insert::Dependent(used);
        }
        let (pivot, lead) = remainder
            .iter()
            .next_back()
            .map(|(k, v)| (k.clone(), v.clone()))
            .expect("nonempty");
        let scale = lead.inv();
        let mut combo = Combination::new();
        if self.track {
            combo.insert(tag, self.field.one());
            axpy_combo(&mut combo, &self.field.from_i64(-1), &used);
            combo = combo.into_iter().map(|(k, v)| (k, v.mul(&scale))).collect();
        }
        let row: Row = remainder
            .into_iter()
            .map(|(k, v)| (k, v.mul(&scale)))
            .collect();
        self.pivots.insert(pivot.clone(), self.rows.len());
        self.rows.push(EchelonRow { row, combo });
        self.reduced = false;
        Insert::Added(pivot)
    }

    /// Brings the basis to reduced echelon form: no pivot key occurs in any
    /// other row.
    pub fn finalize(&mut self) {
        if self.reduced {
            return;
        }
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&a, &b| {
            self.rows[a]
                .row
                .keys()
                .next_back()
                .cmp(&self.rows[b].row.keys().next_back())
        });
        for (pos, &i) in order.iter().enumerate() {
            // rows with smaller pivots are already reduced
            let lower: Vec<usize> = order[..pos].to_vec();
            let mut row = std::mem::take(&mut self.rows[i].row);
            let mut combo = std::mem::take(&mut self.rows[i].combo);
            for &j in lower.iter().rev() {
                let pk = self.rows[j].row.keys().next_back().cloned().expect("row");
                if let Some(c) = row.get(&pk).cloned() {
                    let f = c.neg();
                    axpy(&mut row, &f, &self.rows[j].row);
                    if self.track {
                        axpy_combo(&mut combo, &f, &self.rows[j].combo);
                    }
                }
            }
            self.rows[i].row = row;
            self.rows[i].combo = combo;
        }
        self.reduced = true;
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }
}

/// Converts a polynomial into an echelon row under the given key function.
pub fn to_row<F: FnMut(&Word) -> MonoKey>(p: &Poly, mut key: F) -> Row {
    p.terms().map(|(w, c)| (key(w), c.clone())).collect()
}

pub fn from_row(field: Field, row: &Row) -> Poly {
    Poly::from_terms(field, row.iter().map(|(k, c)| (k.word.clone(), c.clone())))
}

/// Convenience: echelon basis of `polys` under plain shortlex, finalized.
pub fn row_reduce(field: Field, polys: &[Poly]) -> EchelonBasis {
    let mut basis = EchelonBasis::new(field, false);
    for (i, p) in polys.iter().enumerate() {
        basis.insert(to_row(p, |w| MonoKey::plain(w.clone())), i);
    }
    basis.finalize();
    basis
}

impl Scalar {
    pub fn abs_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rational(r) => Some(r.abs()),
            Scalar::Prime { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Alphabet, Field, Field) {
        (
            Alphabet::new(["x", "y", "z"]).unwrap(),
            Field::Rational,
            Field::prime(2).unwrap(),
        )
    }

    fn p(a: &Alphabet, f: Field, s: &str) -> Poly {
        Poly::parse(s, f, a).unwrap()
    }

    #[test]
    fn add_examples() {
        let (a, q, gf2) = setup();
        assert_eq!(p(&a, q, "x + y").add(&p(&a, q, "-1*x")), p(&a, q, "y"));
        let x = p(&a, q, "x + y");
        assert_eq!(x.add(&Poly::zero(q)), x);
        assert!(p(&a, gf2, "1 + x*y").add(&p(&a, gf2, "1 + x*y")).is_zero());
        assert!(matches!(
            x.try_add(&Poly::zero(gf2)),
            Err(AlgebraError::FieldMismatch(..))
        ));
    }

    #[test]
    fn scale_and_translate_examples() {
        let (a, q, _) = setup();
        let one = q.one();
        let z = a.parse_word("z").unwrap();
        let xi = a.parse_word("x^-1").unwrap();
        let e = Word::identity();
        assert_eq!(
            p(&a, q, "x + y").scale_and_translate(&one, &z, &e),
            p(&a, q, "z*x + z*y")
        );
        assert_eq!(
            p(&a, q, "x + y").scale_and_translate(&one, &xi, &e),
            p(&a, q, "1 + x^-1*y")
        );
        assert_eq!(
            p(&a, q, "x - y").scale_and_translate(&q.from_i64(-1), &e, &e),
            p(&a, q, "y - x")
        );
    }

    #[test]
    fn row_reduce_examples() {
        let (a, q, _) = setup();
        let b = row_reduce(q, &[p(&a, q, "x + y"), p(&a, q, "x + 2*y")]);
        let mut rows: Vec<Poly> = b.rows().iter().map(|(r, _)| from_row(q, r)).collect();
        rows.sort_by(|u, v| u.monomials().next().cmp(&v.monomials().next()));
        assert_eq!(rows, vec![p(&a, q, "x"), p(&a, q, "y")]);
        let one = row_reduce(q, &[p(&a, q, "x + y"), p(&a, q, "x + y")]);
        assert_eq!(one.rank(), 1);
        assert_eq!(row_reduce(q, &[]).rank(), 0);
    }

    #[test]
    fn parse_format_round_trip() {
        let (a, q, gf2) = setup();
        for (f, s) in [
            (q, "1*1 + -1/2*x + 3*x*y^-1"),
            (gf2, "1*1 + 1*y + 1*y*z"),
            (q, "0"),
        ] {
            if s == "0" {
                assert!(Poly::parse(s, f, &a).unwrap().is_zero());
                continue;
            }
            let once = p(&a, f, s);
            assert_eq!(once.format(&a), s);
            assert_eq!(p(&a, f, &once.format(&a)), once);
        }
        assert_eq!(p(&a, gf2, "3*x"), p(&a, gf2, "x"));
        assert!(Poly::parse("x +", q, &a).is_err());
        assert!(Poly::parse("1/0*x", q, &a).is_err());
        assert!(Poly::parse("q", q, &a).is_err());
    }

    #[test]
    fn prime_arithmetic() {
        let f = Field::prime(7).unwrap();
        let three = f.from_i64(3);
        assert!(three.mul(&three.inv()).is_one());
        assert_eq!(f.from_i64(-1), f.from_i64(6));
        assert!(Field::prime(9).is_err());
        assert_eq!("GF(5)".parse::<Field>().unwrap(), Field::Prime(5));
        assert_eq!("Q".parse::<Field>().unwrap(), Field::Rational);
    }

    #[test]
    fn tracked_dependency_recovers_combination() {
        let (a, q, _) = setup();
        let inputs = [p(&a, q, "x + y"), p(&a, q, "y + z"), p(&a, q, "x - z")];
        let mut b = EchelonBasis::new(q, true);
        let key = |w: &Word| MonoKey::plain(w.clone());
        b.insert(to_row(&inputs[0], key), 0);
        b.insert(to_row(&inputs[1], key), 1);
        match b.insert(to_row(&inputs[2], key), 2) {
            Insert::Dependent(c) => {
                let mut sum = Poly::zero(q);
                for (i, s) in c {
                    sum = sum.add(&inputs[i].scale(&s));
                }
                assert_eq!(sum, inputs[2]);
            }
            other => panic!("expected dependency, got {other:?}"),
        }
    }
}
