//! Label sets, bijections, shuffles and cyclic words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linear::{compose_perm, invert_perm};

/// Prefix reserved for machine-generated labels.
pub const FRESH_PREFIX: &str = "~";

pub type Label = String;
pub type LabelSet = BTreeSet<Label>;

/// Fresh label `~<tag><k>` not contained in `avoid`.
pub fn fresh_label(tag: &str, avoid: &LabelSet) -> Label {
    (0..)
        .map(|k| format!("{FRESH_PREFIX}{tag}{k}"))
        .find(|l| !avoid.contains(l))
        .expect("unbounded search")
}

pub fn label_set<I, S>(labels: I) -> LabelSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    labels.into_iter().map(Into::into).collect()
}

/// A bijection between finite label sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bijection {
    map: BTreeMap<Label, Label>,
}

impl Bijection {
    pub fn new(pairs: impl IntoIterator<Item = (Label, Label)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (a, b) in pairs {
            if map.insert(a.clone(), b.clone()).is_some() {
                return input(format!("label {a:?} mapped twice"));
            }
            if !targets.insert(b.clone()) {
                return input(format!("label {b:?} hit twice"));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(labels: &LabelSet) -> Self {
        Self { map: labels.iter().map(|l| (l.clone(), l.clone())).collect() }
    }

    pub fn get(&self, l: &str) -> Option<&Label> {
        self.map.get(l)
    }

    pub fn apply(&self, l: &str) -> Result<Label> {
        match self.map.get(l) {
            Some(x) => Ok(x.clone()),
            None => input(format!("label {l:?} outside bijection domain")),
        }
    }

    /// Apply, leaving labels outside the domain fixed.
    pub fn apply_or_keep(&self, l: &str) -> Label {
        self.map.get(l).cloned().unwrap_or_else(|| l.to_string())
    }

    pub fn domain(&self) -> LabelSet {
        self.map.keys().cloned().collect()
    }

    pub fn codomain(&self) -> LabelSet {
        self.map.values().cloned().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Label, &Label)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Bijection) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in &other.map {
            map.insert(a.clone(), self.apply(b)?);
        }
        Ok(Self { map })
    }

    /// Disjoint union of two bijections.
    pub fn union(&self, other: &Bijection) -> Result<Self> {
        Self::new(self.map.iter().chain(other.map.iter()).map(|(a, b)| (a.clone(), b.clone())))
    }

    pub fn restrict(&self, domain: &LabelSet) -> Self {
        Self {
            map: self
                .map
                .iter()
                .filter(|(a, _)| domain.contains(*a))
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }
}

/// All bijections from `src` onto `dst` (empty if sizes differ).
pub fn all_bijections(src: &LabelSet, dst: &LabelSet) -> Vec<Bijection> {
    if src.len() != dst.len() {
        return Vec::new();
    }
    let s: Vec<&Label> = src.iter().collect();
    let n = s.len();
    dst.iter()
        .permutations(n)
        .map(|img| Bijection {
            map: s.iter().zip(img).map(|(a, b)| ((*a).clone(), b.clone())).collect(),
        })
        .collect()
}

/// All subsets of `set`, in order of increasing size then lexicographic.
pub fn subsets(set: &LabelSet) -> Vec<LabelSet> {
    let v: Vec<&Label> = set.iter().collect();
    (0..=v.len())
        .flat_map(|k| v.iter().copied().combinations(k).map(|c| c.into_iter().cloned().collect()).collect::<Vec<_>>())
        .collect()
}

/// All permutations of `0..n` as 0-based vectors.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// Shuffles of type `(p, q)`: `σ` increasing on the first `p` and on the last
/// `q` positions. 0-based, `σ[i]` is the image of `i`.
pub fn enumerate_shuffles(p: i64, q: i64) -> Result<Vec<Vec<usize>>> {
    if p < 0 || q < 0 {
        return input("negative arity");
    }
    let (p, q) = (p as usize, q as usize);
    let n = p + q;
    Ok((0..n)
        .combinations(p)
        .map(|first| {
            let rest: Vec<usize> = (0..n).filter(|x| !first.contains(x)).collect();
            first.into_iter().chain(rest).collect()
        })
        .collect())
}

/// Whether `rho` satisfies the unshuffle condition of type `(p, q)`: the
/// preimages of `1..p` and of `p+1..p+q` are both increasing.
pub fn is_unshuffle(rho: &[usize], p: usize) -> bool {
    let inv = invert_perm(rho);
    inv[..p].windows(2).all(|w| w[0] < w[1]) && inv[p..].windows(2).all(|w| w[0] < w[1])
}

pub fn is_shuffle(sigma: &[usize], p: usize) -> bool {
    sigma[..p].windows(2).all(|w| w[0] < w[1]) && sigma[p..].windows(2).all(|w| w[0] < w[1])
}

/// The increasing bijection `ρ_N : [n1+|N|] − N → offset + [n1]` (1-based).
pub fn increasing_unshuffle(
    subset: &BTreeSet<usize>,
    n1: usize,
    offset: usize,
) -> Result<BTreeMap<usize, usize>> {
    let total = n1 + subset.len();
    if subset.iter().any(|&x| x == 0 || x > total) {
        return input("subset not contained in its ambient interval");
    }
    Ok((1..=total)
        .filter(|x| !subset.contains(x))
        .enumerate()
        .map(|(k, x)| (x, offset + k + 1))
        .collect())
}

/// A cyclic word of distinct labels in canonical rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Cycle {
    word: Vec<Label>,
}

impl Cycle {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn word(&self) -> &[Label] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn contains(&self, l: &str) -> bool {
        self.word.iter().any(|x| x == l)
    }

    pub fn labels(&self) -> LabelSet {
        self.word.iter().cloned().collect()
    }

    /// Successor of `l` in cyclic order.
    pub fn next(&self, l: &str) -> Option<&Label> {
        let i = self.word.iter().position(|x| x == l)?;
        Some(&self.word[(i + 1) % self.word.len()])
    }

    /// Build without duplicate checking; callers guarantee distinctness.
    pub(crate) fn from_distinct(word: Vec<Label>) -> Self {
        let mut word = word;
        if let Some((k, _)) = word.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)) {
            word.rotate_left(k);
        }
        Self { word }
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}))", self.word.join(","))
    }
}

/// Canonical rotation: the lexicographically least label first.
pub fn canonical_cycle<S: AsRef<str>>(word: &[S]) -> Result<Cycle> {
    let w: Vec<Label> = word.iter().map(|s| s.as_ref().to_string()).collect();
    let set: BTreeSet<&Label> = w.iter().collect();
    if set.len() != w.len() {
        return input("duplicate label in cycle");
    }
    Ok(Cycle::from_distinct(w))
}

/// `ρ((x1,…,xn)) = ((ρ(x1),…,ρ(xn)))`.
pub fn map_cycle(rho: &Bijection, c: &Cycle) -> Result<Cycle> {
    let w = c.word.iter().map(|x| rho.apply(x)).collect::<Result<Vec<_>>>()?;
    Ok(Cycle::from_distinct(w))
}

/// Permutation composition re-exported for callers working with 0-based vectors.
pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    compose_perm(a, b)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cyc(xs: &[&str]) -> Cycle {
        canonical_cycle(xs).unwrap()
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(enumerate_shuffles(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_shuffles(2, 1).unwrap().len(), 3);
        assert_eq!(enumerate_shuffles(0, 3).unwrap(), vec![vec![0, 1, 2]]);
        assert!(enumerate_shuffles(-1, 2).is_err());
    }

    #[test]
    fn shuffle_counts_binomial() {
        for n in 0..=8i64 {
            for p in 0..=n {
                let s = enumerate_shuffles(p, n - p).unwrap();
                assert_eq!(s.len() as u64, binomial(n as u64, p as u64));
                assert!(s.iter().all(|x| is_shuffle(x, p as usize)));
            }
        }
    }

    #[test]
    fn shuffle_unshuffle_duality() {
        for n in 0..=6usize {
            for p in 0..=n {
                for s in permutations(n) {
                    assert_eq!(is_shuffle(&s, p), is_unshuffle(&invert_perm(&s), p));
                }
            }
        }
    }

    #[test]
    fn unshuffle_examples() {
        let n: BTreeSet<usize> = [2].into();
        let r = increasing_unshuffle(&n, 2, 0).unwrap();
        assert_eq!(r, BTreeMap::from([(1, 1), (3, 2)]));
        let r = increasing_unshuffle(&BTreeSet::new(), 3, 4).unwrap();
        assert_eq!(r, BTreeMap::from([(1, 5), (2, 6), (3, 7)]));
        let k: BTreeSet<usize> = [1, 2].into();
        let r = increasing_unshuffle(&k, 3, 1).unwrap();
        assert!(r.iter().all(|(i, j)| *j == i - 2 + 1));
        let bad: BTreeSet<usize> = [5].into();
        assert!(increasing_unshuffle(&bad, 1, 0).is_err());
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(cyc(&["x2", "x3", "x1"]).word(), ["x1", "x2", "x3"]);
        assert!(cyc(&[]).is_empty());
        assert_eq!(cyc(&["x1"]).word(), ["x1"]);
        assert!(canonical_cycle(&["a", "a"]).is_err());
        let c = cyc(&["x1", "x2", "x3"]);
        assert_eq!(map_cycle(&Bijection::identity(&c.labels()), &c).unwrap(), c);
        let swap = Bijection::new(vec![
            ("x1".into(), "x2".into()),
            ("x2".into(), "x1".into()),
            ("x3".into(), "x3".into()),
        ])
        .unwrap();
        assert_eq!(map_cycle(&swap, &c).unwrap().word(), ["x1", "x3", "x2"]);
        assert_eq!(map_cycle(&swap, &Cycle::empty()).unwrap(), Cycle::empty());
        assert!(map_cycle(&Bijection::default(), &c).is_err());
    }

    #[test]
    fn bijection_checks() {
        assert!(Bijection::new(vec![("a".into(), "x".into()), ("b".into(), "x".into())]).is_err());
        let s = label_set(["a", "b", "c"]);
        assert_eq!(all_bijections(&s, &label_set(["x", "y", "z"])).len(), 6);
        assert_eq!(subsets(&s).len(), 8);
        assert!(fresh_label("e", &label_set(["~e0"])) == "~e1");
    }

    proptest! {
        #[test]
        fn rotation_invariance(n in 0usize..7, k in 0usize..7) {
            let w: Vec<String> = (0..n).map(|i| format!("l{}", (i * 5 + 3) % 11)).collect();
            let mut r = w.clone();
            if n > 0 { r.rotate_left(k % n); }
            prop_assert_eq!(canonical_cycle(&w).unwrap(), canonical_cycle(&r).unwrap());
        }

        #[test]
        fn map_cycle_functorial(n in 0usize..6, a in 0usize..720, b in 0usize..720) {
            let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            let perms = permutations(n);
            let p = &perms[a % perms.len()];
            let q = &perms[b % perms.len()];
            let mk = |p: &Vec<usize>| Bijection::new(
                labels.iter().enumerate().map(|(i, l)| (l.clone(), labels[p[i]].clone()))
            ).unwrap();
            let (rp, rq) = (mk(p), mk(q));
            let c = canonical_cycle(&labels).unwrap();
            let lhs = map_cycle(&rp.compose(&rq).unwrap(), &c).unwrap();
            let rhs = map_cycle(&rp, &map_cycle(&rq, &c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
