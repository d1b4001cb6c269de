//! The endomorphism properad of a finite-dimensional dg vector space.
//!
//! Labelled elements are elementary maps `E_{J,I}` sending the unordered
//! basis tensor `u_I` to `u_J`, where `I: D → basis` and `J: C → basis` and
//! unordered tensors are written with factors in increasing label order.
//! The skeletal form [`GradedLinearMap`] stores coordinates `f^J_I` on
//! positional labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{Bijection, Label, LabelSet};
use crate::error::{input, Result};
use crate::linear::{add_scaled, add_term, int, is_odd, sign_rat, DGVectorSpace, LinComb, Rational};
use crate::properad::{
    in_label, out_label, skeletal_act, skeletal_compose, sort_sign, Conjugation, Properad,
};

/// `E_{J,I}` with χ carried as metadata.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EndElem {
    pub outputs: BTreeMap<Label, usize>,
    pub inputs: BTreeMap<Label, usize>,
    pub chi: i64,
}

/// The endomorphism properad `E_V`.
#[derive(Debug, Clone)]
pub struct EndProperad {
    pub v: DGVectorSpace,
}

fn assignments(labels: &LabelSet, dim: usize) -> Vec<BTreeMap<Label, usize>> {
    let mut out = vec![BTreeMap::new()];
    for l in labels {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..dim).map(move |i| {
                    let mut m = m.clone();
                    m.insert(l.clone(), i);
                    m
                })
            })
            .collect();
    }
    out
}

impl EndProperad {
    pub fn new(v: DGVectorSpace) -> Self {
        Self { v }
    }

    fn deg(&self, i: usize) -> i64 {
        self.v.basis().degree(i)
    }

    fn degs<'a>(&self, it: impl Iterator<Item = &'a usize>) -> Vec<i64> {
        it.map(|&i| self.deg(i)).collect()
    }

    /// `deg J − deg I`.
    pub fn elem_degree(&self, e: &EndElem) -> i64 {
        e.outputs.values().map(|&i| self.deg(i)).sum::<i64>() - e.inputs.values().map(|&i| self.deg(i)).sum::<i64>()
    }

    /// Sign of re-sorting the factors of `u_J` when its labels are renamed by `rho`.
    fn relabel_sign(&self, rho: &Bijection, j: &BTreeMap<Label, usize>) -> i32 {
        let keys: Vec<Label> = j.keys().map(|l| rho.apply_or_keep(l)).collect();
        sort_sign(&keys, &self.degs(j.values()))
    }
}

impl Properad for EndProperad {
    type Elem = EndElem;

    fn name(&self) -> String {
        format!("End(dim {})", self.v.dim())
    }
    fn outputs(&self, e: &EndElem) -> LabelSet {
        e.outputs.keys().cloned().collect()
    }
    fn inputs(&self, e: &EndElem) -> LabelSet {
        e.inputs.keys().cloned().collect()
    }
    fn chi(&self, e: &EndElem) -> i64 {
        e.chi
    }
    fn degree(&self, e: &EndElem) -> i64 {
        self.elem_degree(e)
    }
    fn basis(&self, c: &LabelSet, d: &LabelSet, chi: i64) -> Vec<EndElem> {
        let dim = self.v.dim();
        let mut out = Vec::new();
        for j in assignments(c, dim) {
            for i in assignments(d, dim) {
                out.push(EndElem { outputs: j.clone(), inputs: i, chi });
            }
        }
        out
    }

    /// `ρ̄ ∘ f ∘ σ̄^{-1}`.
    fn act(&self, rho: &Bijection, sigma: &Bijection, e: &EndElem) -> LinComb<EndElem> {
        let s = self.relabel_sign(rho, &e.outputs) * self.relabel_sign(sigma, &e.inputs);
        let r = EndElem {
            outputs: e.outputs.iter().map(|(l, &i)| (rho.apply_or_keep(l), i)).collect(),
            inputs: e.inputs.iter().map(|(l, &i)| (sigma.apply_or_keep(l), i)).collect(),
            chi: e.chi,
        };
        let mut out = LinComb::new();
        add_term(&mut out, r, sign_rat(s));
        out
    }

    /// `g ∘^η f`: feed the outputs `A` of `f` into the inputs `B` of `g`.
    fn compose(&self, g: &EndElem, f: &EndElem, eta: &Bijection) -> LinComb<EndElem> {
        let b = eta.domain();
        let a = eta.codomain();
        let d1: BTreeMap<&Label, usize> = g.inputs.iter().filter(|(l, _)| !b.contains(*l)).map(|(l, &i)| (l, i)).collect();
        let c2: BTreeMap<&Label, usize> = f.outputs.iter().filter(|(l, _)| !a.contains(*l)).map(|(l, &i)| (l, i)).collect();
        let mut sign = 1;
        // Split ⊙_{D1⊔D2} into ⊙_{D1} ⊗ ⊙_{D2}.
        let mut din: Vec<(&Label, usize)> = d1.iter().map(|(l, &i)| (*l, i)).collect();
        din.extend(f.inputs.iter().map(|(l, &i)| (l, i)));
        din.sort();
        let keys: Vec<(bool, &Label)> = din.iter().map(|(l, _)| (!d1.contains_key(l), *l)).collect();
        sign *= sort_sign(&keys, &self.degs(din.iter().map(|(_, i)| i)));
        // id ⊗ f.
        let x_deg: i64 = d1.values().map(|&i| self.deg(i)).sum();
        if is_odd(x_deg * self.elem_degree(f)) {
            sign = -sign;
        }
        // Split ⊙_{C2⊔A} into ⊙_A ⊗ ⊙_{C2}.
        let keys: Vec<(bool, &Label)> = f.outputs.keys().map(|l| (!a.contains(l), l)).collect();
        sign *= sort_sign(&keys, &self.degs(f.outputs.values()));
        // Rename A to B and re-sort.
        let a_part: Vec<(&Label, usize)> = f.outputs.iter().filter(|(l, _)| a.contains(*l)).map(|(l, &i)| (l, i)).collect();
        let inv = eta.inverse();
        let renamed: Vec<Label> = a_part.iter().map(|(l, _)| inv.apply_or_keep(l)).collect();
        sign *= sort_sign(&renamed, &self.degs(a_part.iter().map(|(_, i)| i)));
        let b_part: BTreeMap<Label, usize> = renamed.into_iter().zip(a_part.iter().map(|(_, i)| *i)).collect();
        // Join ⊙_{D1} ⊗ ⊙_B and feed to g.
        let mut joined: Vec<(&Label, usize)> = d1.iter().map(|(l, &i)| (*l, i)).collect();
        joined.extend(b_part.iter().map(|(l, &i)| (l, i)));
        let keys: Vec<&Label> = joined.iter().map(|(l, _)| *l).collect();
        sign *= sort_sign(&keys, &self.degs(joined.iter().map(|(_, i)| i)));
        let fed: BTreeMap<Label, usize> = joined.into_iter().map(|(l, i)| (l.clone(), i)).collect();
        if fed != g.inputs {
            return LinComb::new();
        }
        // Join ⊙_{C1} ⊗ ⊙_{C2}.
        let mut outs: Vec<(&Label, usize)> = g.outputs.iter().map(|(l, &i)| (l, i)).collect();
        outs.extend(c2.iter().map(|(l, &i)| (*l, i)));
        let keys: Vec<&Label> = outs.iter().map(|(l, _)| *l).collect();
        sign *= sort_sign(&keys, &self.degs(outs.iter().map(|(_, i)| i)));
        let r = EndElem {
            outputs: outs.into_iter().map(|(l, i)| (l.clone(), i)).collect(),
            inputs: d1.iter().map(|(l, &i)| ((*l).clone(), i)).chain(f.inputs.iter().map(|(l, &i)| (l.clone(), i))).collect(),
            chi: g.chi + f.chi,
        };
        let mut out = LinComb::new();
        add_term(&mut out, r, sign_rat(sign));
        out
    }

    /// `d ∘ f − (−1)^{|f|} f ∘ d`.
    fn differential(&self, e: &EndElem) -> LinComb<EndElem> {
        let mut out = LinComb::new();
        let m = self.v.matrix();
        let mut prefix = 0;
        for (l, &s) in &e.outputs {
            for ((t, src), c) in m {
                if *src != s {
                    continue;
                }
                let mut r = e.clone();
                r.outputs.insert(l.clone(), *t);
                add_term(&mut out, r, c * sign_rat(if is_odd(prefix) { -1 } else { 1 }));
            }
            prefix += self.deg(s);
        }
        let outer = if is_odd(self.elem_degree(e)) { 1 } else { -1 };
        let mut prefix = 0;
        for (l, &t) in &e.inputs {
            for ((tt, s), c) in m {
                if *tt != t {
                    continue;
                }
                let mut r = e.clone();
                r.inputs.insert(l.clone(), *s);
                let sg = outer * if is_odd(prefix) { -1 } else { 1 };
                add_term(&mut out, r, c * sign_rat(sg));
            }
            prefix += self.deg(t);
        }
        out
    }
}

/// Skeletal element of `Hom(V^{⊗n}, V^{⊗m})`: coordinates `f^J_I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedLinearMap {
    pub m: usize,
    pub n: usize,
    pub degree: i64,
    pub coords: BTreeMap<(Vec<usize>, Vec<usize>), Rational>,
}

impl GradedLinearMap {
    /// Validates index ranges, arities, and that every coordinate has the
    /// stated degree. Zero coordinates are dropped.
    pub fn new(
        v: &DGVectorSpace,
        m: usize,
        n: usize,
        degree: i64,
        coords: BTreeMap<(Vec<usize>, Vec<usize>), Rational>,
    ) -> Result<Self> {
        let b = v.basis();
        let mut kept = BTreeMap::new();
        for ((j, i), c) in coords {
            if j.len() != m || i.len() != n {
                return input(format!("coordinate {j:?},{i:?} does not have arity ({m},{n})"));
            }
            if j.iter().chain(&i).any(|&x| x >= b.len()) {
                return input(format!("coordinate {j:?},{i:?} is out of range"));
            }
            if b.word_degree(&j) - b.word_degree(&i) != degree {
                return input(format!("coordinate {j:?},{i:?} does not have degree {degree}"));
            }
            if c != int(0) {
                kept.insert((j, i), c);
            }
        }
        Ok(Self { m, n, degree, coords: kept })
    }

    pub fn zero(m: usize, n: usize, degree: i64) -> Self {
        Self { m, n, degree, coords: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// The identity of `V` as a map in arity (1,1).
    pub fn identity(v: &DGVectorSpace) -> Self {
        let coords = (0..v.dim()).map(|i| ((vec![i], vec![i]), int(1))).collect();
        Self { m: 1, n: 1, degree: 0, coords }
    }

    /// Labelled form on positional labels, with metadata `chi`.
    pub fn to_labelled(&self, chi: i64) -> LinComb<EndElem> {
        let mut out = LinComb::new();
        for ((j, i), c) in &self.coords {
            let e = EndElem {
                outputs: j.iter().enumerate().map(|(p, &x)| (out_label(p + 1), x)).collect(),
                inputs: i.iter().enumerate().map(|(p, &x)| (in_label(p + 1), x)).collect(),
                chi,
            };
            add_term(&mut out, e, c.clone());
        }
        out
    }

    /// Inverse of [`to_labelled`](Self::to_labelled).
    pub fn from_labelled(x: &LinComb<EndElem>, m: usize, n: usize, degree: i64) -> Result<Self> {
        let mut coords = BTreeMap::new();
        for (e, c) in x {
            if e.outputs.len() != m || e.inputs.len() != n {
                return input("labelled element has the wrong arity");
            }
            let pos_ok = e.outputs.keys().enumerate().all(|(p, l)| *l == out_label(p + 1))
                && e.inputs.keys().enumerate().all(|(p, l)| *l == in_label(p + 1));
            if !pos_ok {
                return input("labelled element is not on positional labels");
            }
            let key = (e.outputs.values().copied().collect(), e.inputs.values().copied().collect());
            add_term(&mut coords, key, c.clone());
        }
        Ok(Self { m, n, degree, coords })
    }
}

/// Left `Σ_m` and right `Σ_n` action with Koszul signs. Permutations are
/// 0-based: position `i` moves to `rho[i]`.
pub fn end_sigma_action(p: &EndProperad, rho: &[usize], sigma: &[usize], f: &GradedLinearMap) -> Result<GradedLinearMap> {
    if rho.len() != f.m || sigma.len() != f.n {
        return input("permutation sizes do not match the arities");
    }
    if !crate::linear::is_permutation(rho) || !crate::linear::is_permutation(sigma) {
        return input("not a permutation");
    }
    let x = skeletal_act(p, rho, sigma, &f.to_labelled(0));
    GradedLinearMap::from_labelled(&x, f.m, f.n, f.degree)
}

/// Skeletal composition `g ∘^ξ_{N,M} f`: the inputs `N` of `g` are fed by
/// the outputs `M = ξ(N)` of `f` (1-based positions).
pub fn end_compose(
    p: &EndProperad,
    g: &GradedLinearMap,
    f: &GradedLinearMap,
    xi: &BTreeMap<usize, usize>,
) -> Result<GradedLinearMap> {
    let k = xi.len();
    let dims = (g.m, g.n, f.m, f.n);
    let z = skeletal_compose(p, &g.to_labelled(0), &f.to_labelled(0), dims, xi, &Conjugation::identity(g.m, g.n, f.m, f.n))?;
    GradedLinearMap::from_labelled(&z, g.m + f.m - k, g.n + f.n - k, g.degree + f.degree)
}

/// `d(f) = Σ (id⊗…⊗d⊗…⊗id) f − (−1)^{|f|} Σ f (id⊗…⊗d⊗…⊗id)`.
pub fn end_differential(p: &EndProperad, f: &GradedLinearMap) -> GradedLinearMap {
    let mut out = LinComb::new();
    for (e, c) in f.to_labelled(0) {
        add_scaled(&mut out, &p.differential(&e), &c);
    }
    GradedLinearMap::from_labelled(&out, f.m, f.n, f.degree + 1).expect("positional labels are preserved")
}

/// `f` as a map `⊙_D V → ⊙_C V`, where position `i` carries label `c[i]`
/// (resp. `d[i]`).
pub fn unordered_end_component(
    p: &EndProperad,
    c: &[Label],
    d: &[Label],
    f: &GradedLinearMap,
) -> Result<LinComb<EndElem>> {
    if c.len() != f.m || d.len() != f.n {
        return input("label lists do not match the arities");
    }
    let rho = Bijection::new((0..c.len()).map(|i| (out_label(i + 1), c[i].clone())))?;
    let sigma = Bijection::new((0..d.len()).map(|i| (in_label(i + 1), d[i].clone())))?;
    if rho.codomain().len() != c.len() || sigma.codomain().len() != d.len() {
        return input("repeated label");
    }
    Ok(crate::properad::act_lin(p, &rho, &sigma, &f.to_labelled(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{all_words, GradedBasis, SparseMatrix};
    use crate::properad::{check_all_axioms, AxiomBounds};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(degs: &[i64], d: &[((usize, usize), i64)]) -> DGVectorSpace {
        let b = GradedBasis::new(degs.iter().enumerate().map(|(i, &g)| (format!("e{i}"), g)).collect()).unwrap();
        let m: SparseMatrix = d.iter().map(|&(k, c)| (k, int(c))).collect();
        DGVectorSpace::new(b, m).unwrap()
    }

    fn random_map(v: &DGVectorSpace, m: usize, n: usize, degree: i64, rng: &mut ChaCha8Rng) -> GradedLinearMap {
        let b = v.basis();
        let mut coords = BTreeMap::new();
        for j in all_words(v.dim(), m) {
            for i in all_words(v.dim(), n) {
                if b.word_degree(&j) - b.word_degree(&i) == degree && rng.gen_bool(0.6) {
                    coords.insert((j.clone(), i), int(rng.gen_range(-3..=3)));
                }
            }
        }
        GradedLinearMap::new(v, m, n, degree, coords).unwrap()
    }

    /// Ordered-tensor evaluation of the standard gluing: the last `k` inputs
    /// of `g` eat the first `k` outputs of `f`; result inputs are those of
    /// `f` followed by the free ones of `g`.
    fn oracle_standard(v: &DGVectorSpace, g: &GradedLinearMap, f: &GradedLinearMap, k: usize) -> GradedLinearMap {
        let b = v.basis();
        let n1 = g.n - k;
        let mut coords = BTreeMap::new();
        for ((j1, gi), gc) in &g.coords {
            let (i1, ja) = gi.split_at(n1);
            for ((fj, i2), fc) in &f.coords {
                if &fj[..k] != ja {
                    continue;
                }
                let (d1, d2) = (b.word_degree(i1), b.word_degree(i2));
                let mut s = gc * fc;
                if is_odd(d1 * d2 + f.degree * d1) {
                    s = -s;
                }
                let j: Vec<usize> = j1.iter().chain(&fj[k..]).copied().collect();
                let i: Vec<usize> = i2.iter().chain(i1).copied().collect();
                add_term(&mut coords, (j, i), s);
            }
        }
        GradedLinearMap { m: g.m + f.m - k, n: g.n + f.n - k, degree: g.degree + f.degree, coords }
    }

    fn standard_xi(n1: usize, k: usize) -> BTreeMap<usize, usize> {
        (1..=k).map(|j| (n1 + j, j)).collect()
    }

    #[test]
    fn composition_matches_ordered_tensor_oracle() {
        let v = space(&[0, 1, 1], &[((1, 0), 1)]);
        let p = EndProperad::new(v.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let k = rng.gen_range(1..=2);
            let (m1, n1, m2, n2) = (rng.gen_range(0..=1), rng.gen_range(0..=1), rng.gen_range(0..=1), rng.gen_range(0..=1));
            let g = random_map(&v, m1, n1 + k, rng.gen_range(-1..=1), &mut rng);
            let f = random_map(&v, m2 + k, n2, rng.gen_range(-1..=1), &mut rng);
            let got = end_compose(&p, &g, &f, &standard_xi(n1, k)).unwrap();
            assert_eq!(got, oracle_standard(&v, &g, &f, k), "g={g:?} f={f:?}");
        }
    }

    #[test]
    fn odd_swap_example() {
        // g = φ ↦ e1⊗e1 contraction pattern with one odd-odd exchange.
        let v = space(&[0, 1], &[]);
        let p = EndProperad::new(v.clone());
        let g = GradedLinearMap::new(&v, 0, 2, -2, [((vec![], vec![1, 1]), int(1))].into()).unwrap();
        let f = GradedLinearMap::new(&v, 1, 1, 0, [((vec![1], vec![1]), int(1))].into()).unwrap();
        let z = end_compose(&p, &g, &f, &standard_xi(1, 1)).unwrap();
        // Input word (e1 from f, e1 free of g) must be swapped past each other.
        assert_eq!(z.coords.get(&(vec![], vec![1, 1])), Some(&int(-1)));
    }

    #[test]
    fn scalar_case_is_a_product() {
        let v = space(&[0], &[]);
        let p = EndProperad::new(v.clone());
        let g = GradedLinearMap::new(&v, 1, 2, 0, [((vec![0], vec![0, 0]), int(3))].into()).unwrap();
        let f = GradedLinearMap::new(&v, 2, 1, 0, [((vec![0, 0], vec![0]), int(5))].into()).unwrap();
        let z = end_compose(&p, &g, &f, &standard_xi(1, 1)).unwrap();
        assert_eq!(z.coords.get(&(vec![0, 0], vec![0, 0])), Some(&int(15)));
    }

    #[test]
    fn identity_composition() {
        let v = space(&[0, 1], &[((1, 0), 1)]);
        let p = EndProperad::new(v.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = GradedLinearMap::identity(&v);
        for _ in 0..10 {
            let f = random_map(&v, 2, 1, 1, &mut rng);
            let xi: BTreeMap<usize, usize> = [(1, 1)].into();
            assert_eq!(end_compose(&p, &id, &f, &xi).unwrap(), f);
        }
        assert!(end_compose(&p, &id, &id, &BTreeMap::new()).is_err());
        assert!(end_compose(&p, &id, &id, &[(2, 1)].into()).is_err());
    }

    #[test]
    fn action_examples() {
        let v = space(&[0, 1], &[]);
        let p = EndProperad::new(v.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_map(&v, 2, 1, 1, &mut rng);
        assert_eq!(end_sigma_action(&p, &[0, 1], &[0], &f).unwrap(), f);
        let flipped = end_sigma_action(&p, &[1, 0], &[0], &f).unwrap();
        for ((j, i), c) in &f.coords {
            let sign = if j[0] == 1 && j[1] == 1 { -1 } else { 1 };
            assert_eq!(flipped.coords.get(&(vec![j[1], j[0]], i.clone())), Some(&(c * int(sign))));
        }
        let even = space(&[0, 2], &[]);
        let pe = EndProperad::new(even.clone());
        let g = random_map(&even, 2, 2, 0, &mut rng);
        let h = end_sigma_action(&pe, &[1, 0], &[1, 0], &g).unwrap();
        for ((j, i), c) in &g.coords {
            assert_eq!(h.coords.get(&(vec![j[1], j[0]], vec![i[1], i[0]])), Some(c));
        }
        assert!(end_sigma_action(&p, &[0], &[0], &f).is_err());
    }

    #[test]
    fn action_is_a_group_action() {
        let v = space(&[0, 1], &[]);
        let p = EndProperad::new(v.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (m, n) in [(2, 1), (3, 2), (2, 3), (3, 3)] {
            let f = random_map(&v, m, n, rng.gen_range(-1..=1), &mut rng);
            let pm = crate::combinatorics::permutations(m);
            let pn = crate::combinatorics::permutations(n);
            for r1 in &pm {
                for r2 in &pm {
                    let (s1, s2) = (&pn[rng.gen_range(0..pn.len())], &pn[rng.gen_range(0..pn.len())]);
                    let two = end_sigma_action(&p, r1, s1, &end_sigma_action(&p, r2, s2, &f).unwrap()).unwrap();
                    let one = end_sigma_action(
                        &p,
                        &crate::linear::compose_perm(r1, r2),
                        &crate::linear::compose_perm(s1, s2),
                        &f,
                    )
                    .unwrap();
                    assert_eq!(one, two);
                }
            }
        }
    }

    #[test]
    fn differential_examples() {
        let v0 = space(&[0, 1], &[]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = random_map(&v0, 2, 1, 0, &mut rng);
        assert!(end_differential(&EndProperad::new(v0.clone()), &f).is_zero());
        let v = space(&[0, 1], &[((1, 0), 1)]);
        let p = EndProperad::new(v.clone());
        assert!(end_differential(&p, &GradedLinearMap::identity(&v)).is_zero());
        // d(a ↦ a) = (a ↦ b) and d(b ↦ b) = −(a ↦ b).
        let f = GradedLinearMap::new(&v, 1, 1, 0, [((vec![0], vec![0]), int(1))].into()).unwrap();
        let df = end_differential(&p, &f);
        let want: BTreeMap<_, _> = [((vec![1], vec![0]), int(1))].into();
        assert_eq!(df.coords, want);
        let h = GradedLinearMap::new(&v, 1, 1, 0, [((vec![1], vec![1]), int(1))].into()).unwrap();
        let want: BTreeMap<_, _> = [((vec![1], vec![0]), int(-1))].into();
        assert_eq!(end_differential(&p, &h).coords, want);
    }

    #[test]
    fn differential_squares_to_zero_and_is_a_derivation() {
        let v = space(&[0, 1, 1], &[((1, 0), 1), ((2, 0), 2)]);
        let p = EndProperad::new(v.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let k = rng.gen_range(1..=2);
            let (m1, n1, m2, n2) = (rng.gen_range(0..=1), rng.gen_range(0..=1), rng.gen_range(0..=1), rng.gen_range(0..=1));
            let g = random_map(&v, m1, n1 + k, rng.gen_range(-1..=1), &mut rng);
            let f = random_map(&v, m2 + k, n2, rng.gen_range(-1..=1), &mut rng);
            assert!(end_differential(&p, &end_differential(&p, &g)).is_zero());
            let xi = standard_xi(n1, k);
            let lhs = end_differential(&p, &end_compose(&p, &g, &f, &xi).unwrap());
            let a = end_compose(&p, &end_differential(&p, &g), &f, &xi).unwrap();
            let b = end_compose(&p, &g, &end_differential(&p, &f), &xi).unwrap();
            let mut rhs = a.coords.clone();
            add_scaled(&mut rhs, &b.coords, &sign_rat(if is_odd(g.degree) { -1 } else { 1 }));
            assert_eq!(lhs.coords, rhs);
        }
    }

    #[test]
    fn unordered_component() {
        let v = space(&[1, 1], &[]);
        let p = EndProperad::new(v.clone());
        let f = GradedLinearMap::new(&v, 2, 0, 2, [((vec![0, 1], vec![]), int(1))].into()).unwrap();
        let c: Vec<Label> = vec!["a".into(), "b".into()];
        let nat = unordered_end_component(&p, &c, &[], &f).unwrap();
        assert_eq!(nat.values().next(), Some(&int(1)));
        let rev: Vec<Label> = vec!["b".into(), "a".into()];
        let r = unordered_end_component(&p, &rev, &[], &f).unwrap();
        assert_eq!(r.values().next(), Some(&int(-1)));
        assert!(unordered_end_component(&p, &c[..1], &[], &f).is_err());
    }

    #[test]
    fn axioms_dim_two() {
        let p = EndProperad::new(space(&[0, 1], &[]));
        let rep = check_all_axioms(&p, AxiomBounds::new(2, 1, 6));
        assert!(rep.passed(), "{:?}", rep.violations.first());
    }
}
