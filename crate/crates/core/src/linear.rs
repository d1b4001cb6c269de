//! Exact rational linear algebra over graded vector spaces.
//!
//! Permutations are 0-based vectors: `perm[i]` is the position that the
//! factor at position `i` moves to. Acting on a word `w` gives `w'` with
//! `w'[perm[i]] = w[i]`, and the Koszul sign counts inversions between
//! odd-degree factors.

use std::collections::BTreeMap;

use num::{BigInt, One, Signed, Zero};

use crate::error::{input, Error, Result};

pub type Rational = num::BigRational;

/// A sparse linear combination keyed by `K`. Zero coefficients are never stored.
pub type LinComb<K> = BTreeMap<K, Rational>;

/// Add `c * key` into `acc`, dropping the entry if it cancels.
pub fn add_term<K: Ord>(acc: &mut LinComb<K>, key: K, c: Rational) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match acc.entry(key) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// `acc += c * other`.
pub fn add_scaled<K: Ord + Clone>(acc: &mut LinComb<K>, other: &LinComb<K>, c: &Rational) {
    for (k, v) in other {
        add_term(acc, k.clone(), v * c);
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn sign_rat(s: i32) -> Rational {
    int(s as i64)
}

/// Parse `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Input(format!("malformed rational {s:?}"));
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// Serialize as `"p/q"` (always with an explicit denominator).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn is_odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

pub fn parity_sign(d: i64) -> i32 {
    if is_odd(d) {
        -1
    } else {
        1
    }
}

/// Check that `perm` is a bijection of `0..perm.len()`.
pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// Koszul sign of moving factors of the given degrees by `perm`.
pub fn koszul_sign(perm: &[usize], degrees: &[i64]) -> Result<i32> {
    if perm.len() != degrees.len() {
        return input(format!(
            "permutation of length {} applied to {} degrees",
            perm.len(),
            degrees.len()
        ));
    }
    if !is_permutation(perm) {
        return input("not a permutation");
    }
    Ok(koszul_sign_unchecked(perm, degrees))
}

pub(crate) fn koszul_sign_unchecked(perm: &[usize], degrees: &[i64]) -> i32 {
    let mut s = 1;
    for i in 0..perm.len() {
        if !is_odd(degrees[i]) {
            continue;
        }
        for j in (i + 1)..perm.len() {
            if is_odd(degrees[j]) && perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

/// Apply `perm` to a sequence: `out[perm[i]] = items[i]`.
pub fn permute<T: Clone>(perm: &[usize], items: &[T]) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (i, x) in items.iter().enumerate() {
        out[perm[i]] = Some(x.clone());
    }
    out.into_iter().map(|x| x.expect("perm is a bijection")).collect()
}

/// `(a ∘ b)[i] = a[b[i]]`.
pub fn compose_perm(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

pub fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Sign and permutation that sort `keys` stably, with the Koszul sign of the
/// induced move of factors with the given degrees.
pub fn sorting_perm<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    // idx[k] = original position placed at k; perm maps original -> new.
    invert_perm(&idx)
}

/// An ordered homogeneous basis. The order is fixed and drives every sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedBasis {
    names: Vec<String>,
    degrees: Vec<i64>,
}

impl GradedBasis {
    pub fn new(elements: Vec<(String, i64)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (n, _) in &elements {
            if !seen.insert(n.clone()) {
                return input(format!("duplicate basis name {n:?}"));
            }
        }
        let (names, degrees) = elements.into_iter().unzip();
        Ok(Self { names, degrees })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn word_degree(&self, word: &[usize]) -> i64 {
        word.iter().map(|&i| self.degrees[i]).sum()
    }

    pub fn word_degrees(&self, word: &[usize]) -> Vec<i64> {
        word.iter().map(|&i| self.degrees[i]).collect()
    }

    /// The dual basis `φ^i`, named `#name`, with negated degrees.
    pub fn dual(&self) -> GradedBasis {
        GradedBasis {
            names: self.names.iter().map(|n| format!("#{n}")).collect(),
            degrees: self.degrees.iter().map(|d| -d).collect(),
        }
    }
}

/// Sparse matrix keyed by `(target, source)`.
pub type SparseMatrix = BTreeMap<(usize, usize), Rational>;

/// A finite-dimensional dg vector space with a degree `+1` differential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DGVectorSpace {
    basis: GradedBasis,
    d: SparseMatrix,
}

impl DGVectorSpace {
    /// Validate degree `+1` and `d² = 0`.
    pub fn new(basis: GradedBasis, d: SparseMatrix) -> Result<Self> {
        let space = Self::new_unchecked(basis, d)?;
        if !space.d_squared().is_empty() {
            return input("differential does not square to zero");
        }
        Ok(space)
    }

    /// Validate only the degree condition. Used to build mutation fixtures.
    pub fn new_unchecked(basis: GradedBasis, d: SparseMatrix) -> Result<Self> {
        let d: SparseMatrix = d.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        for &(t, s) in d.keys() {
            if t >= basis.len() || s >= basis.len() {
                return input("differential index out of range");
            }
            if basis.degree(t) != basis.degree(s) + 1 {
                return input(format!(
                    "differential {} -> {} does not raise degree by one",
                    basis.name(s),
                    basis.name(t)
                ));
            }
        }
        Ok(Self { basis, d })
    }

    /// A space with zero differential.
    pub fn with_zero_differential(basis: GradedBasis) -> Self {
        Self { basis, d: SparseMatrix::new() }
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.d
    }

    pub fn is_zero_differential(&self) -> bool {
        self.d.is_empty()
    }

    /// `d(a_s) = Σ_t d[t,s] a_t`.
    pub fn apply_basis(&self, s: usize) -> Vec<(usize, Rational)> {
        self.d
            .iter()
            .filter(|((_, src), _)| *src == s)
            .map(|((t, _), c)| (*t, c.clone()))
            .collect()
    }

    /// Nonzero entries of `d²`.
    pub fn d_squared(&self) -> SparseMatrix {
        let mut out = SparseMatrix::new();
        for (&(t, s), c) in &self.d {
            for (&(u, t2), c2) in &self.d {
                if t2 == t {
                    add_term(&mut out, (u, s), c * c2);
                }
            }
        }
        out
    }

    /// Apply `d` to a word as a degree one derivation, with the Koszul sign
    /// of passing `d` across the preceding factors.
    pub fn apply_derivation(&self, word: &[usize]) -> LinComb<Vec<usize>> {
        let mut out = LinComb::new();
        let mut prefix = 0i64;
        for (i, &x) in word.iter().enumerate() {
            let s = sign_rat(parity_sign(prefix));
            for (t, c) in self.apply_basis(x) {
                let mut w = word.to_vec();
                w[i] = t;
                add_term(&mut out, w, &s * c);
            }
            prefix += self.basis.degree(x);
        }
        out
    }

    /// Apply the derivation extension to a linear combination of words.
    pub fn apply_derivation_lin(&self, x: &LinComb<Vec<usize>>) -> LinComb<Vec<usize>> {
        let mut out = LinComb::new();
        for (w, c) in x {
            add_scaled(&mut out, &self.apply_derivation(w), c);
        }
        out
    }

    /// The dual dg space on `V^#` with `(d^#α)(v) = (-1)^{|α|} α(dv)`.
    pub fn dualize(&self) -> DGVectorSpace {
        let dual = self.basis.dual();
        let mut m = SparseMatrix::new();
        // (d^# φ^s)(a_t) = (-1)^{|φ^s|} φ^s(d a_t) = (-1)^{|a_s|} d[s,t],
        // so the coefficient of φ^t in d^# φ^s is that number.
        for (&(s, t), c) in &self.d {
            add_term(&mut m, (t, s), sign_rat(parity_sign(self.basis.degree(s))) * c);
        }
        DGVectorSpace { basis: dual, d: m }
    }
}

/// Word-indexed sparse matrix: `(target word, source word) -> coefficient`.
pub type WordMatrix = BTreeMap<(Vec<usize>, Vec<usize>), Rational>;

/// All words of length `m` over `0..dim`, in lexicographic order.
pub fn all_words(dim: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * dim);
        for w in &out {
            for i in 0..dim {
                let mut v = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `Σ_i id^{⊗i} ⊗ d ⊗ id^{⊗(m-i-1)}` on `V^{⊗m}` as a word matrix.
pub fn extend_differential_as_derivation(v: &DGVectorSpace, m: usize) -> WordMatrix {
    let mut out = WordMatrix::new();
    if m == 0 {
        return out;
    }
    for w in all_words(v.dim(), m) {
        for (t, c) in v.apply_derivation(&w) {
            add_term(&mut out, (t, w.clone()), c);
        }
    }
    out
}

/// Square of a word matrix.
pub fn word_matrix_square(a: &WordMatrix) -> WordMatrix {
    let mut out = WordMatrix::new();
    for ((t, s), c) in a {
        for ((u, t2), c2) in a {
            if t2 == t {
                add_term(&mut out, (u.clone(), s.clone()), c * c2);
            }
        }
    }
    out
}

/// A tensor word `c · a_{i_1} ⊗ … ⊗ a_{i_n}` over a fixed basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TensorWord {
    pub factors: Vec<usize>,
    pub coefficient: Rational,
}

impl TensorWord {
    pub fn new(factors: Vec<usize>, coefficient: Rational) -> Self {
        Self { factors, coefficient }
    }

    pub fn degree(&self, basis: &GradedBasis) -> i64 {
        basis.word_degree(&self.factors)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Apply a permutation of factors with its Koszul sign.
    pub fn permuted(&self, perm: &[usize], basis: &GradedBasis) -> Result<TensorWord> {
        let s = koszul_sign(perm, &basis.word_degrees(&self.factors))?;
        Ok(TensorWord {
            factors: permute(perm, &self.factors),
            coefficient: sign_rat(s) * &self.coefficient,
        })
    }
}

/// The canonical iso `ι_ψ : V^{⊗n} → ⊙_C V` for an ordering `ψ: [n] → C`.
///
/// Elements of `⊙_C V` are stored in the representative whose factors are
/// listed in increasing label order. Returns that representative.
pub fn unordered_iso(
    psi: &[String],
    word: &TensorWord,
    basis: &GradedBasis,
) -> Result<(Vec<(String, usize)>, Rational)> {
    if psi.len() != word.factors.len() {
        return input("ordering and word lengths differ");
    }
    let mut set = std::collections::BTreeSet::new();
    if !psi.iter().all(|l| set.insert(l)) {
        return input("ordering is not a bijection");
    }
    let perm = sorting_perm(psi);
    let s = koszul_sign_unchecked(&perm, &basis.word_degrees(&word.factors));
    let labels = permute(&perm, psi);
    let factors = permute(&perm, &word.factors);
    Ok((
        labels.into_iter().zip(factors).collect(),
        sign_rat(s) * &word.coefficient,
    ))
}

/// Inverse of [`unordered_iso`]: read an unordered element back into
/// `V^{⊗n}` along the ordering `psi`.
pub fn unordered_iso_inverse(
    psi: &[String],
    element: &[(String, usize)],
    coefficient: &Rational,
    basis: &GradedBasis,
) -> Result<TensorWord> {
    if psi.len() != element.len() {
        return input("ordering and element sizes differ");
    }
    let perm = sorting_perm(psi);
    let inv = invert_perm(&perm);
    let mut factors = Vec::with_capacity(psi.len());
    for (k, l) in psi.iter().enumerate() {
        let pos = perm[k];
        if &element[pos].0 != l {
            return input(format!("label {l:?} missing from element"));
        }
        factors.push(element[pos].1);
    }
    let sorted_factors: Vec<usize> = element.iter().map(|(_, x)| *x).collect();
    let s = koszul_sign_unchecked(&inv, &basis.word_degrees(&sorted_factors));
    Ok(TensorWord::new(factors, sign_rat(s) * coefficient))
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}


/// Serde adapter storing a rational as its `"p/q"` string.
pub mod rational_serde {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
