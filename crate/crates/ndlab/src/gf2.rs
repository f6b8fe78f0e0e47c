//! Exact arithmetic over the two-element field on length-tagged binary
//! words, together with the set-level helpers the rest of the crate is
//! built on: linear independence by Gaussian elimination, deterministic
//! construction of words with independent tails, and the unique-translate
//! search with its brute-force oracle.
//!
//! A [`BitWord`] is an element of `2^len`. Coordinate 0 is the leftmost
//! digit; the canonical text encoding is a `'0'`/`'1'` string in that
//! order. Addition is coordinatewise XOR and is only defined between
//! words of equal length; every word is self-inverse.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Default cap for exhaustive `2^len` scans.
pub const BRUTE_FORCE_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot restrict a word of length {len} to length {want}")]
    RestrictBeyondLength { len: usize, want: usize },
    #[error("word of length {len} cannot anchor a prefix block of length {prefix}")]
    AnchorTooLong { len: usize, prefix: usize },
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("malformed digit string: {0}")]
    BadDigits(String),
    #[error("translate precondition failed: {0}")]
    TranslatePrecondition(TranslateFailure),
    #[error("internal inconsistency: preconditions hold but no translate found")]
    TranslateInconsistency,
}

/// Which clause of the unique-translate precondition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslateFailure {
    LengthMismatch,
    SourceTooSmall,
    TargetDependent,
    SumsNotCovered,
}

impl fmt::Display for TranslateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TranslateFailure::LengthMismatch => "A.len != B.len",
            TranslateFailure::SourceTooSmall => "|A| < 5",
            TranslateFailure::TargetDependent => "B is linearly dependent",
            TranslateFailure::SumsNotCovered => "A+A is not contained in B+B",
        };
        f.write_str(s)
    }
}

/// A length-tagged binary word: an element of `2^len`.
///
/// Bits are packed into `u64` limbs, coordinate `i` at limb `i / 64`,
/// bit `i % 64`. Unused bits of the last limb are always zero, so
/// equality and hashing can be derived.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    len: usize,
    limbs: Vec<u64>,
}

fn limb_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitWord {
    /// The zero word of the given length. Length 0 is permitted only as
    /// an internal prefix anchor; catalog structures require `len >= 1`.
    pub fn zero(len: usize) -> Self {
        BitWord {
            len,
            limbs: vec![0; limb_count(len)],
        }
    }

    /// The standard basis word `e_i` of the given length.
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len, "unit index {i} out of range for length {len}");
        let mut w = BitWord::zero(len);
        w.set(i, true);
        w
    }

    /// Builds a word from an iterator of digits, leftmost first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut limbs = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                limbs.push(0u64);
            }
            if b {
                *limbs.last_mut().unwrap() |= 1u64 << (len % 64);
            }
            len += 1;
        }
        BitWord { len, limbs }
    }

    /// Parses the canonical `'0'`/`'1'` digit string.
    pub fn parse(s: &str) -> Result<Self, Gf2Error> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Gf2Error::BadDigits(s.to_string())),
            }
        }
        Ok(BitWord::from_bits(bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.limbs[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        if v {
            self.limbs[i / 64] |= 1u64 << (i % 64);
        } else {
            self.limbs[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// The packed limb representation, coordinate 0 at the low bit of
    /// the first limb. For digest-style keys; the digit string is the
    /// canonical encoding.
    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Coordinatewise addition mod 2. Defined only between equal lengths.
    pub fn add(&self, other: &BitWord) -> Result<BitWord, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let limbs = self
            .limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitWord {
            len: self.len,
            limbs,
        })
    }

    /// XOR with the other word, which must not be longer; the tail of
    /// `self` beyond `other.len()` is left alone.
    pub fn add_prefix(&self, other: &BitWord) -> Result<BitWord, Gf2Error> {
        if other.len > self.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let mut out = self.clone();
        for (i, limb) in other.limbs.iter().enumerate() {
            out.limbs[i] ^= limb;
        }
        Ok(out)
    }

    /// The first `want` digits.
    pub fn restrict(&self, want: usize) -> Result<BitWord, Gf2Error> {
        if want > self.len {
            return Err(Gf2Error::RestrictBeyondLength {
                len: self.len,
                want,
            });
        }
        let mut limbs: Vec<u64> = self.limbs[..limb_count(want)].to_vec();
        if want % 64 != 0 {
            if let Some(last) = limbs.last_mut() {
                *last &= (1u64 << (want % 64)) - 1;
            }
        }
        Ok(BitWord { len: want, limbs })
    }

    /// True iff `self` is an initial segment of `other`.
    pub fn is_prefix_of(&self, other: &BitWord) -> bool {
        self.len <= other.len && other.restrict(self.len).unwrap() == *self
    }

    /// `self` followed by `tail`.
    pub fn concat(&self, tail: &BitWord) -> BitWord {
        BitWord::from_bits(self.iter_bits().chain(tail.iter_bits()))
    }

    /// `self` padded with zeros up to `len`.
    pub fn pad_zeros(&self, len: usize) -> BitWord {
        assert!(len >= self.len);
        let mut w = BitWord::zero(len);
        for (i, limb) in self.limbs.iter().enumerate() {
            w.limbs[i] = *limb;
        }
        w
    }

    /// The digits on `[from, self.len)` as a word of length `len - from`.
    pub fn tail(&self, from: usize) -> BitWord {
        assert!(from <= self.len);
        BitWord::from_bits((from..self.len).map(|i| self.get(i)))
    }

    /// Enumerates all words of the given length in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitWord> {
        assert!(len <= 26, "refusing to enumerate 2^{len} words");
        (0..(1u64 << len)).map(move |v| {
            // v's most significant of `len` bits is coordinate 0
            BitWord::from_bits((0..len).map(|i| v >> (len - 1 - i) & 1 == 1))
        })
    }

    /// Draws a uniformly random word of the given length.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitWord {
        BitWord::from_bits((0..len).map(|_| rng.gen::<bool>()))
    }
}

impl Ord for BitWord {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic on digits, coordinate 0 first; a proper prefix
        // precedes its extensions. reverse_bits puts coordinate 0 in the
        // most significant position of each limb.
        let common = self.limbs.len().min(other.limbs.len());
        for i in 0..common {
            let (a, b) = (self.limbs[i].reverse_bits(), other.limbs[i].reverse_bits());
            if a != b {
                return a.cmp(&b);
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter_bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

/// A finite set of words, all of one length. Elements of the level-set
/// family are nonempty; emptiness is permitted here and rejected by the
/// validators that care.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct WordSet {
    len: usize,
    words: BTreeSet<BitWord>,
}

impl WordSet {
    pub fn new(len: usize) -> Self {
        WordSet {
            len,
            words: BTreeSet::new(),
        }
    }

    pub fn from_words<I: IntoIterator<Item = BitWord>>(
        len: usize,
        words: I,
    ) -> Result<Self, Gf2Error> {
        let mut s = WordSet::new(len);
        for w in words {
            s.insert(w)?;
        }
        Ok(s)
    }

    /// Parses a list of digit strings, all of the stated length.
    pub fn parse(len: usize, digits: &[impl AsRef<str>]) -> Result<Self, Gf2Error> {
        WordSet::from_words(
            len,
            digits
                .iter()
                .map(|d| BitWord::parse(d.as_ref()))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }

    pub fn insert(&mut self, w: BitWord) -> Result<(), Gf2Error> {
        if w.len() != self.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: w.len(),
            });
        }
        self.words.insert(w);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &BitWord) -> bool {
        self.words.contains(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitWord> + Clone {
        self.words.iter()
    }

    pub fn min(&self) -> Option<&BitWord> {
        self.words.iter().next()
    }

    pub fn is_subset(&self, other: &WordSet) -> bool {
        self.len == other.len && self.words.is_subset(&other.words)
    }

    /// The translate `self + x`, elementwise.
    pub fn translate(&self, x: &BitWord) -> Result<WordSet, Gf2Error> {
        let words = self
            .words
            .iter()
            .map(|w| w.add(x))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(WordSet {
            len: self.len,
            words,
        })
    }

    /// The set of restrictions `{w|len : w in self}` (duplicates merge).
    pub fn restrict(&self, len: usize) -> Result<WordSet, Gf2Error> {
        let words = self
            .words
            .iter()
            .map(|w| w.restrict(len))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(WordSet { len, words })
    }

    /// All pairwise sums `a + a'` over the set, including zero.
    pub fn pair_sums(&self) -> HashSet<BitWord> {
        let mut out = HashSet::new();
        for a in &self.words {
            for b in &self.words {
                out.insert(a.add(b).unwrap());
            }
        }
        out
    }
}

/// Rank of a family of words by Gaussian elimination over GF(2).
/// Duplicates count once toward rank, so a list with a repetition of
/// length `k` has rank `< k`.
pub fn gf2_rank<'a, I: IntoIterator<Item = &'a BitWord>>(words: I) -> usize {
    let mut basis: Vec<BitWord> = Vec::new();
    'next: for w in words {
        let mut v = w.clone();
        for b in &basis {
            // reduce by the pivot position of b
            let pivot = (0..b.len()).find(|&i| b.get(i)).unwrap();
            if pivot < v.len() && v.get(pivot) {
                v = v.add(b).unwrap();
            }
        }
        if v.is_zero() {
            continue 'next;
        }
        basis.push(v);
    }
    basis.len()
}

/// True iff the listed words are linearly independent. A list with a
/// repetition or with the zero word is dependent.
pub fn is_independent_list(words: &[BitWord]) -> bool {
    gf2_rank(words.iter()) == words.len()
}

/// True iff no nonempty subset of the set sums to zero.
pub fn is_independent(set: &WordSet) -> bool {
    gf2_rank(set.iter()) == set.size()
}

/// How tails are chosen by [`extend_independent`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    /// Standard basis tails `e_0, e_1, ...` in index order. This is the
    /// canonical mode used by every condition construction.
    StandardBasis,
    /// Random invertible tail matrix drawn from the given seed.
    Seeded(u64),
}

/// Produces `count` words of length `total_len` whose digits on
/// `[prefix_len, total_len)` form a linearly independent family and
/// whose initial segments extend the given anchors (anchors shorter
/// than `prefix_len` are padded with zeros).
///
/// Anchors beyond `count` are ignored; missing anchors default to the
/// empty word.
pub fn extend_independent(
    prefix_len: usize,
    total_len: usize,
    count: usize,
    anchors: &[BitWord],
    mode: TailMode,
) -> Result<Vec<BitWord>, Gf2Error> {
    if total_len < prefix_len {
        return Err(Gf2Error::Capacity(format!(
            "total length {total_len} below prefix length {prefix_len}"
        )));
    }
    let block = total_len - prefix_len;
    if count > block {
        return Err(Gf2Error::Capacity(format!(
            "cannot fit {count} independent tails in a block of length {block}"
        )));
    }
    for a in anchors.iter().take(count) {
        if a.len() > prefix_len {
            return Err(Gf2Error::AnchorTooLong {
                len: a.len(),
                prefix: prefix_len,
            });
        }
    }
    let tails: Vec<BitWord> = match mode {
        TailMode::StandardBasis => (0..count).map(|a| BitWord::unit(block, a)).collect(),
        TailMode::Seeded(seed) => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut tails: Vec<BitWord> = Vec::with_capacity(count);
            while tails.len() < count {
                let t = BitWord::random(block, &mut rng);
                tails.push(t);
                if gf2_rank(tails.iter()) != tails.len() {
                    tails.pop();
                }
            }
            tails
        }
    };
    let mut out = Vec::with_capacity(count);
    for (a, tail) in tails.into_iter().enumerate() {
        let anchor = anchors.get(a).cloned().unwrap_or_else(|| BitWord::zero(0));
        out.push(anchor.pad_zeros(prefix_len).concat(&tail));
    }
    Ok(out)
}

/// All `x` with `A + x` contained in `B`, by exhaustive scan over `2^len`.
pub fn brute_force_translate(
    a: &WordSet,
    b: &WordSet,
    cap: usize,
) -> Result<BTreeSet<BitWord>, Gf2Error> {
    if a.len() != b.len() {
        return Err(Gf2Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let ell = a.len();
    if ell > cap {
        return Err(Gf2Error::Capacity(format!(
            "brute-force scan over 2^{ell} exceeds cap {cap}"
        )));
    }
    let mut out = BTreeSet::new();
    for x in BitWord::all(ell) {
        if a.iter().all(|w| b.contains(&w.add(&x).unwrap())) {
            out.insert(x);
        }
    }
    Ok(out)
}

/// The unique `x` with `A + x` contained in `B`, found constructively.
///
/// Preconditions (each failure is reported separately): equal lengths,
/// `B` linearly independent, `|A| >= 5`, and `A+A` contained in `B+B`.
/// Under these the translate exists and is unique; candidates `a0 + b`
/// for the least element `a0` of `A` are tried in lexicographic order
/// and verified directly.
pub fn unique_translate(a: &WordSet, b: &WordSet) -> Result<BitWord, Gf2Error> {
    if a.len() != b.len() {
        return Err(Gf2Error::TranslatePrecondition(
            TranslateFailure::LengthMismatch,
        ));
    }
    if a.size() < 5 {
        return Err(Gf2Error::TranslatePrecondition(
            TranslateFailure::SourceTooSmall,
        ));
    }
    if !is_independent(b) {
        return Err(Gf2Error::TranslatePrecondition(
            TranslateFailure::TargetDependent,
        ));
    }
    let b_sums = b.pair_sums();
    for s in a.pair_sums() {
        if !b_sums.contains(&s) {
            return Err(Gf2Error::TranslatePrecondition(
                TranslateFailure::SumsNotCovered,
            ));
        }
    }
    let a0 = a.min().expect("|A| >= 5");
    let mut candidates: Vec<BitWord> = b.iter().map(|w| a0.add(w).unwrap()).collect();
    candidates.sort();
    for x in candidates {
        if a.iter().all(|w| b.contains(&w.add(&x).unwrap())) {
            return Ok(x);
        }
    }
    Err(Gf2Error::TranslateInconsistency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn w(s: &str) -> BitWord {
        BitWord::parse(s).unwrap()
    }

    #[test]
    fn add_is_coordinatewise_xor() {
        assert_eq!(w("101").add(&w("011")).unwrap(), w("110"));
        let a = w("10110");
        assert!(a.add(&a).unwrap().is_zero());
        assert_eq!(a.add(&BitWord::zero(5)).unwrap(), a);
        assert!(a.add(&w("10")).is_err());
    }

    #[test]
    fn restrict_is_prefix() {
        assert_eq!(w("10110").restrict(3).unwrap(), w("101"));
        let a = w("10110");
        assert_eq!(a.restrict(5).unwrap(), a);
        assert_eq!(a.restrict(0).unwrap(), BitWord::zero(0));
        assert!(a.restrict(6).is_err());
    }

    #[test]
    fn group_laws_exhaustive_small_lengths() {
        for len in 1..=6 {
            let words: Vec<BitWord> = BitWord::all(len).collect();
            for a in &words {
                for b in &words {
                    assert_eq!(a.add(&a.add(b).unwrap()).unwrap(), *b);
                }
            }
        }
    }

    #[test]
    fn lex_order_matches_string_order() {
        let mut words: Vec<BitWord> = BitWord::all(4).collect();
        words.sort();
        let strings: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
        // prefix precedes extension
        assert!(w("10") < w("100"));
        assert!(w("011") < w("10"));
    }

    #[test]
    fn independence_standard_basis_and_known_dependent() {
        let basis = WordSet::from_words(5, (0..5).map(|i| BitWord::unit(5, i))).unwrap();
        assert!(is_independent(&basis));
        let dep = WordSet::parse(3, &["110", "011", "101"]).unwrap();
        assert!(!is_independent(&dep));
        let with_zero = WordSet::parse(3, &["000", "100"]).unwrap();
        assert!(!is_independent(&with_zero));
        // repetition in a list is dependent even though the set would not be
        assert!(!is_independent_list(&[w("101"), w("101")]));
    }

    /// Span-size reference: a family is independent iff its XOR-span has
    /// exactly 2^size elements.
    fn independent_by_span(set: &WordSet) -> bool {
        let mut span = HashSet::new();
        span.insert(BitWord::zero(set.len()));
        for v in set.iter() {
            let add: Vec<BitWord> = span.iter().map(|s| s.add(v).unwrap()).collect();
            span.extend(add);
        }
        span.len() == 1usize << set.size()
    }

    #[test]
    fn independence_agrees_with_span_reference_on_all_subsets_of_len_4() {
        let words: Vec<BitWord> = BitWord::all(4).collect();
        for mask in 0u32..(1 << 16) {
            if mask.count_ones() > 5 {
                continue; // more than 5 of 16 words can never be independent in 2^4 anyway
            }
            let subset = WordSet::from_words(
                4,
                words
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, w)| w.clone()),
            )
            .unwrap();
            assert_eq!(
                is_independent(&subset),
                independent_by_span(&subset),
                "mask {mask:#x}"
            );
        }
    }

    #[test]
    fn extend_independent_standard_tails() {
        let anchors = vec![w("00"), w("01"), w("10")];
        let out = extend_independent(2, 5, 3, &anchors, TailMode::StandardBasis).unwrap();
        assert_eq!(out, vec![w("00100"), w("01010"), w("10001")]);
        for (a, r) in anchors.iter().zip(&out) {
            assert!(a.is_prefix_of(r));
        }
        let tails: Vec<BitWord> = out.iter().map(|r| r.tail(2)).collect();
        assert!(is_independent_list(&tails));
    }

    #[test]
    fn extend_independent_capacity_boundary() {
        // exactly fills the dimension
        let out = extend_independent(2, 5, 3, &[], TailMode::StandardBasis).unwrap();
        assert_eq!(out.len(), 3);
        // one more than the dimension
        let err = extend_independent(2, 5, 4, &[], TailMode::StandardBasis);
        assert!(matches!(err, Err(Gf2Error::Capacity(_))));
    }

    #[test]
    fn extend_independent_seeded_mode() {
        let anchors = vec![w("1"), w("0")];
        let out = extend_independent(1, 9, 5, &anchors, TailMode::Seeded(7)).unwrap();
        let again = extend_independent(1, 9, 5, &anchors, TailMode::Seeded(7)).unwrap();
        assert_eq!(out, again);
        let tails: Vec<BitWord> = out.iter().map(|r| r.tail(1)).collect();
        assert!(is_independent_list(&tails));
        assert!(anchors[0].is_prefix_of(&out[0]));
        assert!(anchors[1].is_prefix_of(&out[1]));
    }

    #[test]
    fn brute_force_translate_basics() {
        let single = WordSet::parse(3, &["101"]).unwrap();
        let res = brute_force_translate(&single, &single, BRUTE_FORCE_CAP).unwrap();
        assert_eq!(res, BTreeSet::from([BitWord::zero(3)]));

        let a = WordSet::parse(3, &["000", "001"]).unwrap();
        let b = WordSet::parse(3, &["111"]).unwrap();
        assert!(brute_force_translate(&a, &b, BRUTE_FORCE_CAP)
            .unwrap()
            .is_empty());

        assert!(matches!(
            brute_force_translate(&WordSet::new(25), &WordSet::new(25), BRUTE_FORCE_CAP),
            Err(Gf2Error::Capacity(_))
        ));
    }

    #[test]
    fn unique_translate_identity_and_shifted_basis() {
        let b5 = WordSet::from_words(5, (0..5).map(|i| BitWord::unit(5, i))).unwrap();
        assert_eq!(unique_translate(&b5, &b5).unwrap(), BitWord::zero(5));

        // B = {e_0..e_5} in 2^6, A = {e_i + e_5 : i < 5}; the translate is e_5.
        let b6 = WordSet::from_words(6, (0..6).map(|i| BitWord::unit(6, i))).unwrap();
        let e5 = BitWord::unit(6, 5);
        let a =
            WordSet::from_words(6, (0..5).map(|i| BitWord::unit(6, i).add(&e5).unwrap())).unwrap();
        let x = unique_translate(&a, &b6).unwrap();
        assert_eq!(x, e5);
        let oracle = brute_force_translate(&a, &b6, BRUTE_FORCE_CAP).unwrap();
        assert_eq!(oracle, BTreeSet::from([x]));
    }

    /// The size-five precondition is sharp: exhaustive search at len = 4
    /// finds 4-element sources whose pairwise sums all land in B + B yet
    /// which translate into B in no way at all. (Two distinct translates
    /// are impossible over an independent target once the source has
    /// three elements: two shift-orbits inside B would sum to zero. The
    /// failure mode at four elements is nonexistence.)
    #[test]
    fn four_element_source_defeats_existence() {
        let b = WordSet::from_words(4, (0..4).map(|i| BitWord::unit(4, i))).unwrap();
        let b_sums = b.pair_sums();
        let words: Vec<BitWord> = BitWord::all(4).collect();
        let mut found = None;
        'search: for m in 0u32..(1 << 16) {
            if m.count_ones() != 4 {
                continue;
            }
            let a = WordSet::from_words(
                4,
                words
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|(_, w)| w.clone()),
            )
            .unwrap();
            if !a.pair_sums().iter().all(|s| b_sums.contains(s)) {
                continue;
            }
            let ts = brute_force_translate(&a, &b, BRUTE_FORCE_CAP).unwrap();
            assert!(
                ts.len() <= 1,
                "two translates over an independent target at {a:?}"
            );
            if ts.is_empty() {
                found = Some(a);
                break 'search;
            }
        }
        let a = found.expect("a 4-element existence failure at len 4");
        assert!(matches!(
            unique_translate(&a, &b),
            Err(Gf2Error::TranslatePrecondition(
                TranslateFailure::SourceTooSmall
            ))
        ));
    }

    /// Below three elements even uniqueness fails: a two-element source
    /// aligned with a difference of basis vectors admits two translates.
    #[test]
    fn two_element_source_admits_two_translates() {
        let b = WordSet::from_words(4, (0..4).map(|i| BitWord::unit(4, i))).unwrap();
        let a = WordSet::from_words(4, [BitWord::unit(4, 0), BitWord::unit(4, 1)]).unwrap();
        let ts = brute_force_translate(&a, &b, BRUTE_FORCE_CAP).unwrap();
        assert!(ts.len() >= 2, "translates: {ts:?}");
    }

    proptest! {
        #[test]
        fn digit_string_round_trip(s in "[01]{1,40}") {
            let word = BitWord::parse(&s).unwrap();
            prop_assert_eq!(word.to_string(), s);
        }

        #[test]
        fn oracle_equivalence_on_planted_instances(
            seed in any::<u64>(),
            ell in 5usize..=8,
        ) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // random independent B of size 5..=ell
            let bsize = rng.gen_range(5..=ell);
            let mut bwords: Vec<BitWord> = Vec::new();
            while bwords.len() < bsize {
                let cand = BitWord::random(ell, &mut rng);
                bwords.push(cand);
                if gf2_rank(bwords.iter()) != bwords.len() {
                    bwords.pop();
                }
            }
            let b = WordSet::from_words(ell, bwords.clone()).unwrap();
            // A = translated subset of B of size >= 5
            let asize = rng.gen_range(5..=bsize);
            let x = BitWord::random(ell, &mut rng);
            let a = WordSet::from_words(
                ell,
                bwords.iter().take(asize).map(|w| w.add(&x).unwrap()),
            ).unwrap();
            let got = unique_translate(&a, &b).unwrap();
            prop_assert_eq!(&got, &x);
            let oracle = brute_force_translate(&a, &b, BRUTE_FORCE_CAP).unwrap();
            prop_assert_eq!(oracle, BTreeSet::from([x]));
        }
    }
}
