//! Generating operators and the master equation.
//!
//! An element of the coinvariant space `P̃` is a linear combination of
//! [`CoinvKey`]s: a generator on positional labels together with a basis
//! index of `V` on every leg. Output indices read in increasing label order
//! form the word `J`, input indices form `I`, and the key stands for
//! `p ⊗ a_J ⊗ φ^I`. As a differential operator this is `a_J ∂_{i_n} ⋯ ∂_{i_1}`,
//! so that `φ^I` pairs with `a_I` without a sign.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;

use crate::combinatorics::{Bijection, Label, LabelSet};
use crate::endomorphism::{EndElem, EndProperad};
use crate::error::{input, Result};
use crate::frobenius::{oc_compose, ClosedFrobenius, ClosedGenerator, OpenClosedGenerator, OpenFrobenius, OpenSurface};
use crate::linear::{add_scaled, add_term, int, is_odd, sign_rat, DGVectorSpace, GradedBasis, LinComb, Rational, SparseMatrix};
use crate::properad::{in_label, out_label, sort_sign, Properad};

/// A generator with a basis index on each leg.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CoinvKey<G> {
    pub gen: G,
    pub deco: BTreeMap<Label, usize>,
}

impl CoinvKey<ClosedGenerator> {
    /// `p_{m,n,χ} ⊗ a_J ⊗ φ^I` on positional labels.
    pub fn closed(outputs: &[usize], inputs: &[usize], chi: i64) -> Self {
        let gen = ClosedGenerator { outputs: crate::properad::out_labels(outputs.len()), inputs: crate::properad::in_labels(inputs.len()), chi };
        let deco = gen.outputs.iter().cloned().zip(outputs.iter().copied()).chain(gen.inputs.iter().cloned().zip(inputs.iter().copied())).collect();
        Self { gen, deco }
    }
}

/// One coefficient record of `P̃`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoinvariantTerm<G> {
    pub key: CoinvKey<G>,
    #[serde(with = "crate::linear::rational_serde")]
    pub coeff: Rational,
}

/// An element of `P̃`.
pub type Coinv<G> = LinComb<CoinvKey<G>>;

/// `(outputs, inputs, χ)` of a component.
pub type Component = (usize, usize, i64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Flavor {
    Closed,
    Open,
    OpenClosed,
}

/// The dg vector spaces of the colors, with the combined space used for the
/// endomorphism differential.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub colors: Vec<DGVectorSpace>,
    offsets: Vec<usize>,
    total: EndProperad,
}

impl Spaces {
    pub fn new(colors: Vec<DGVectorSpace>) -> Result<Self> {
        if colors.is_empty() {
            return input("at least one color is needed");
        }
        let mut offsets = Vec::new();
        let mut elems = Vec::new();
        let mut d = SparseMatrix::new();
        for (c, v) in colors.iter().enumerate() {
            let off = elems.len();
            offsets.push(off);
            for i in 0..v.dim() {
                elems.push((format!("c{c}:{}", v.basis().name(i)), v.basis().degree(i)));
            }
            for (&(t, s), x) in v.matrix() {
                d.insert((t + off, s + off), x.clone());
            }
        }
        let total = DGVectorSpace::new_unchecked(GradedBasis::new(elems)?, d)?;
        Ok(Self { colors, offsets, total: EndProperad::new(total) })
    }

    pub fn single(v: DGVectorSpace) -> Self {
        Self::new(vec![v]).expect("one color")
    }

    pub fn degree(&self, color: usize, i: usize) -> i64 {
        self.colors[color].basis().degree(i)
    }

    pub fn dim(&self, color: usize) -> usize {
        self.colors[color].dim()
    }

    /// Whether every color has `d² = 0`.
    pub fn d_squared_vanishes(&self) -> bool {
        self.colors.iter().all(|v| v.d_squared().is_empty())
    }
}

/// A properad whose basis is preserved by relabelling and composition, as
/// needed to write `P̃` on generators.
pub trait CoinvariantModel {
    type Gen: Clone + Ord + Debug + Hash + Serialize;

    fn flavor(&self) -> Flavor;
    fn outputs(&self, g: &Self::Gen) -> LabelSet;
    fn inputs(&self, g: &Self::Gen) -> LabelSet;
    fn chi(&self, g: &Self::Gen) -> i64;
    fn degree(&self, _g: &Self::Gen) -> i64 {
        0
    }
    fn differential(&self, _g: &Self::Gen) -> LinComb<Self::Gen> {
        LinComb::new()
    }
    /// Color of the leg `label` of `g`.
    fn color(&self, _g: &Self::Gen, _label: &str) -> usize {
        0
    }
    /// Rename every leg of `g` by `map`.
    fn relabel(&self, g: &Self::Gen, map: &BTreeMap<Label, Label>) -> LinComb<Self::Gen>;
    fn compose(&self, l: &Self::Gen, r: &Self::Gen, eta: &Bijection) -> LinComb<Self::Gen>;
    /// The `i`-th positional label (1-based) of a color and side.
    fn positional(&self, color: usize, output: bool, i: usize) -> Label {
        let _ = color;
        if output {
            out_label(i)
        } else {
            in_label(i)
        }
    }
    /// Canonical representative of the orbit of `key`, and the scalar `c`
    /// with `[key] = c·[rep]`; `None` when the class vanishes.
    fn normal_form(&self, key: &CoinvKey<Self::Gen>, spaces: &Spaces) -> Option<(CoinvKey<Self::Gen>, Rational)> {
        brute_force_normal_form(self, key, spaces)
    }
}

fn rename_map(labels: impl IntoIterator<Item = Label>, f: impl Fn(&str) -> Label) -> BTreeMap<Label, Label> {
    labels.into_iter().map(|l| (l.clone(), f(&l))).collect()
}

fn split_bij(map: &BTreeMap<Label, Label>, outs: &LabelSet, ins: &LabelSet) -> (Bijection, Bijection) {
    let pick = |s: &LabelSet| Bijection::new(s.iter().map(|l| (l.clone(), map.get(l).cloned().unwrap_or_else(|| l.clone()))));
    (pick(outs).expect("bijection"), pick(ins).expect("bijection"))
}

impl CoinvariantModel for ClosedFrobenius {
    type Gen = ClosedGenerator;

    fn flavor(&self) -> Flavor {
        Flavor::Closed
    }
    fn outputs(&self, g: &ClosedGenerator) -> LabelSet {
        g.outputs.clone()
    }
    fn inputs(&self, g: &ClosedGenerator) -> LabelSet {
        g.inputs.clone()
    }
    fn chi(&self, g: &ClosedGenerator) -> i64 {
        g.chi
    }
    fn relabel(&self, g: &ClosedGenerator, map: &BTreeMap<Label, Label>) -> LinComb<ClosedGenerator> {
        let (r, s) = split_bij(map, &g.outputs, &g.inputs);
        Properad::act(self, &r, &s, g)
    }
    fn compose(&self, l: &ClosedGenerator, r: &ClosedGenerator, eta: &Bijection) -> LinComb<ClosedGenerator> {
        // The cylinder is admitted here although it is not a basis element.
        crate::frobenius::closed_compose(l, r, eta).map(crate::properad::single).unwrap_or_default()
    }
    /// The action is trivial, so the class is fixed by sorting both words.
    fn normal_form(&self, key: &CoinvKey<ClosedGenerator>, spaces: &Spaces) -> Option<(CoinvKey<ClosedGenerator>, Rational)> {
        let mut deco = BTreeMap::new();
        let mut sign = 1;
        for (labels, output) in [(&key.gen.outputs, true), (&key.gen.inputs, false)] {
            let idx: Vec<usize> = labels.iter().map(|l| key.deco[l]).collect();
            let degs: Vec<i64> = idx.iter().map(|&i| spaces.degree(0, i)).collect();
            let mut sorted = idx.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1] && is_odd(spaces.degree(0, w[0]))) {
                return None;
            }
            sign *= sort_sign(&idx, &degs);
            for (p, i) in sorted.into_iter().enumerate() {
                deco.insert(self.positional(0, output, p + 1), i);
            }
        }
        let gen = ClosedGenerator { outputs: positional_set(self, 0, true, key.gen.outputs.len()), inputs: positional_set(self, 0, false, key.gen.inputs.len()), chi: key.gen.chi };
        Some((CoinvKey { gen, deco }, sign_rat(sign)))
    }
}

fn positional_set<M: CoinvariantModel + ?Sized>(m: &M, color: usize, output: bool, n: usize) -> LabelSet {
    (1..=n).map(|i| m.positional(color, output, i)).collect()
}

impl CoinvariantModel for OpenFrobenius {
    type Gen = OpenSurface;

    fn flavor(&self) -> Flavor {
        Flavor::Open
    }
    fn outputs(&self, g: &OpenSurface) -> LabelSet {
        g.outputs()
    }
    fn inputs(&self, g: &OpenSurface) -> LabelSet {
        g.inputs()
    }
    fn chi(&self, g: &OpenSurface) -> i64 {
        g.chi()
    }
    fn relabel(&self, g: &OpenSurface, map: &BTreeMap<Label, Label>) -> LinComb<OpenSurface> {
        let (r, s) = split_bij(map, &g.outputs(), &g.inputs());
        Properad::act(self, &r, &s, g)
    }
    fn compose(&self, l: &OpenSurface, r: &OpenSurface, eta: &Bijection) -> LinComb<OpenSurface> {
        Properad::compose(self, l, r, eta)
    }
}

/// The open-closed model: open segments carry color 0 and closed punctures
/// color 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpenClosedModel;

impl CoinvariantModel for OpenClosedModel {
    type Gen = OpenClosedGenerator;

    fn flavor(&self) -> Flavor {
        Flavor::OpenClosed
    }
    fn outputs(&self, g: &OpenClosedGenerator) -> LabelSet {
        g.open_part().outputs().union(&g.closed_out).cloned().collect()
    }
    fn inputs(&self, g: &OpenClosedGenerator) -> LabelSet {
        g.open_part().inputs().union(&g.closed_in).cloned().collect()
    }
    fn chi(&self, g: &OpenClosedGenerator) -> i64 {
        g.chi()
    }
    fn color(&self, g: &OpenClosedGenerator, label: &str) -> usize {
        usize::from(g.closed_out.contains(label) || g.closed_in.contains(label))
    }
    fn relabel(&self, g: &OpenClosedGenerator, map: &BTreeMap<Label, Label>) -> LinComb<OpenClosedGenerator> {
        let open = g.open_part();
        let (r, s) = split_bij(map, &open.outputs(), &open.inputs());
        let Ok(o) = open.relabel(&r, &s) else { return LinComb::new() };
        let m = |set: &LabelSet| -> LabelSet { set.iter().map(|l| map.get(l).cloned().unwrap_or_else(|| l.clone())).collect() };
        let out = OpenClosedGenerator {
            genus: o.genus,
            out_cycles: o.out_cycles,
            in_cycles: o.in_cycles,
            empty: o.empty,
            closed_out: m(&g.closed_out),
            closed_in: m(&g.closed_in),
        };
        crate::properad::single(out)
    }
    fn compose(&self, l: &OpenClosedGenerator, r: &OpenClosedGenerator, eta: &Bijection) -> LinComb<OpenClosedGenerator> {
        let (closed, open): (Vec<_>, Vec<_>) = eta.pairs().partition(|(b, _)| l.closed_in.contains(*b));
        let mk = |v: Vec<(&Label, &Label)>| Bijection::new(v.into_iter().map(|(a, b)| (a.clone(), b.clone())));
        match (mk(open), mk(closed)) {
            (Ok(o), Ok(c)) => oc_compose(l, r, &o, &c).map(crate::properad::single).unwrap_or_default(),
            _ => LinComb::new(),
        }
    }
    fn positional(&self, color: usize, output: bool, i: usize) -> Label {
        match (color, output) {
            (0, true) => out_label(i),
            (0, false) => in_label(i),
            (_, true) => format!("p{i:03}"),
            (_, false) => format!("q{i:03}"),
        }
    }
}

/// Degree of a labelled leg.
fn leg_degree<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>, l: &str) -> i64 {
    spaces.degree(m.color(&key.gen, l), key.deco[l])
}

/// `|p| + deg a_J − deg a_I`.
pub fn key_degree<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>) -> i64 {
    let outs: i64 = m.outputs(&key.gen).iter().map(|l| leg_degree(m, spaces, key, l)).sum();
    let ins: i64 = m.inputs(&key.gen).iter().map(|l| leg_degree(m, spaces, key, l)).sum();
    m.degree(&key.gen) + outs - ins
}

/// `(m, n, χ)` of a key.
pub fn key_component<M: CoinvariantModel + ?Sized>(m: &M, key: &CoinvKey<M::Gen>) -> Component {
    (m.outputs(&key.gen).len(), m.inputs(&key.gen).len(), m.chi(&key.gen))
}

/// Koszul sign of renaming the legs of `key` by `map` and re-reading the
/// word in the new label order. Inputs are read in reverse, which leaves the
/// sign unchanged.
fn rename_sign<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>, map: &BTreeMap<Label, Label>) -> i32 {
    let mut s = 1;
    for side in [m.outputs(&key.gen), m.inputs(&key.gen)] {
        let new: Vec<&Label> = side.iter().map(|l| map.get(l).unwrap_or(l)).collect();
        let degs: Vec<i64> = side.iter().map(|l| leg_degree(m, spaces, key, l)).collect();
        s *= sort_sign(&new, &degs);
    }
    s
}

/// `π·[p ⊗ w] = c·[p' ⊗ w']` for a relabelling `π`, returned as `(p' ⊗ w', c)`.
fn rename_key<M: CoinvariantModel + ?Sized>(
    m: &M,
    spaces: &Spaces,
    key: &CoinvKey<M::Gen>,
    map: &BTreeMap<Label, Label>,
) -> Vec<(CoinvKey<M::Gen>, Rational)> {
    let s = sign_rat(rename_sign(m, spaces, key, map));
    let deco: BTreeMap<Label, usize> = key.deco.iter().map(|(l, &i)| (map.get(l).unwrap_or(l).clone(), i)).collect();
    m.relabel(&key.gen, map).into_iter().map(|(gen, c)| (CoinvKey { gen, deco: deco.clone() }, c * &s)).collect()
}

/// Legs grouped by `(color, is_output)`, each in label order.
fn leg_classes<M: CoinvariantModel + ?Sized>(m: &M, g: &M::Gen) -> BTreeMap<(usize, bool), Vec<Label>> {
    let mut out: BTreeMap<(usize, bool), Vec<Label>> = BTreeMap::new();
    for (side, output) in [(m.outputs(g), true), (m.inputs(g), false)] {
        for l in side {
            out.entry((m.color(g, &l), output)).or_default().push(l);
        }
    }
    out
}

/// Every `π·key` for `π` in the product of the symmetric groups of the leg
/// classes, with the scalar `c` such that `[key] = c·[π·key]`.
pub fn orbit<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>) -> Vec<(CoinvKey<M::Gen>, Rational)> {
    let classes: Vec<Vec<Label>> = leg_classes(m, &key.gen).into_values().collect();
    let mut maps = vec![BTreeMap::new()];
    for class in &classes {
        let perms = crate::combinatorics::permutations(class.len());
        maps = maps
            .into_iter()
            .flat_map(|base: BTreeMap<Label, Label>| {
                perms.iter().map(move |p| {
                    let mut m = base.clone();
                    for (i, l) in class.iter().enumerate() {
                        m.insert(l.clone(), class[p[i]].clone());
                    }
                    m
                })
            })
            .collect();
    }
    maps.iter().flat_map(|map| rename_key(m, spaces, key, map)).collect()
}

/// Least element of the orbit, or `None` if the orbit forces `[key] = 0`.
pub fn brute_force_normal_form<M: CoinvariantModel + ?Sized>(
    m: &M,
    key: &CoinvKey<M::Gen>,
    spaces: &Spaces,
) -> Option<(CoinvKey<M::Gen>, Rational)> {
    let mut seen: BTreeMap<CoinvKey<M::Gen>, Rational> = BTreeMap::new();
    for (k, c) in orbit(m, spaces, key) {
        match seen.get(&k) {
            Some(prev) if *prev != c => return None,
            Some(_) => {}
            None => {
                seen.insert(k, c);
            }
        }
    }
    seen.into_iter().next()
}

/// Rename every leg to its positional label, keeping the order within each
/// leg class.
fn positionalize<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>) -> Vec<(CoinvKey<M::Gen>, Rational)> {
    let mut map = BTreeMap::new();
    for ((color, output), labels) in leg_classes(m, &key.gen) {
        for (i, l) in labels.into_iter().enumerate() {
            map.insert(l, m.positional(color, output, i + 1));
        }
    }
    rename_key(m, spaces, key, &map)
}

/// Bring a labelled combination into orbit-canonical form.
pub fn normalize<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, x: &Coinv<M::Gen>) -> Coinv<M::Gen> {
    let mut out = LinComb::new();
    for (k, c) in x {
        for (p, s) in positionalize(m, spaces, k) {
            if let Some((rep, t)) = m.normal_form(&p, spaces) {
                add_term(&mut out, rep, c * s * t);
            }
        }
    }
    out
}

/// Orbit-canonical form of a single record.
pub fn orbit_normal_form<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, t: &CoinvariantTerm<M::Gen>) -> Vec<CoinvariantTerm<M::Gen>> {
    let x: Coinv<M::Gen> = [(t.key.clone(), t.coeff.clone())].into_iter().filter(|(_, c)| *c != int(0)).collect();
    to_terms(&normalize(m, spaces, &x))
}

pub fn to_terms<G: Clone>(x: &LinComb<CoinvKey<G>>) -> Vec<CoinvariantTerm<G>> {
    x.iter().map(|(k, c)| CoinvariantTerm { key: k.clone(), coeff: c.clone() }).collect()
}

/// Size of the relabelling group acting on a key of this shape.
fn group_order<M: CoinvariantModel + ?Sized>(m: &M, g: &M::Gen) -> u64 {
    leg_classes(m, g).values().map(|c| crate::combinatorics::factorial(c.len() as u64)).product()
}

fn prefixed<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, key: &CoinvKey<M::Gen>, tag: &str) -> Vec<(CoinvKey<M::Gen>, Rational)> {
    let labels = m.outputs(&key.gen).into_iter().chain(m.inputs(&key.gen));
    rename_key(m, spaces, key, &rename_map(labels, |l| format!("{tag}{l}")))
}

/// Partial matchings of the inputs of `x` with equally decorated outputs of
/// `y` of the same color.
fn contractions<M: CoinvariantModel + ?Sized>(m: &M, x: &CoinvKey<M::Gen>, y: &CoinvKey<M::Gen>) -> Vec<Vec<(Label, Label)>> {
    let ins: Vec<Label> = m.inputs(&x.gen).into_iter().collect();
    let outs: Vec<Label> = m.outputs(&y.gen).into_iter().collect();
    let mut acc = vec![Vec::new()];
    for b in &ins {
        let mut next = Vec::new();
        for partial in acc {
            for a in &outs {
                let used = partial.iter().any(|(_, u): &(Label, Label)| u == a);
                if !used && x.deco[b] == y.deco[a] && m.color(&x.gen, b) == m.color(&y.gen, a) {
                    let mut p = partial.clone();
                    p.push((b.clone(), a.clone()));
                    next.push(p);
                }
            }
            next.push(partial);
        }
        acc = next;
    }
    acc.retain(|p| !p.is_empty());
    acc
}

/// Koszul sign of normal-ordering `a_{A1} ∂_{D1}^rev a_{A2} ∂_{D2}^rev` with the
/// given contractions moved next to each other.
fn wick_sign<M: CoinvariantModel + ?Sized>(
    m: &M,
    spaces: &Spaces,
    x: &CoinvKey<M::Gen>,
    y: &CoinvKey<M::Gen>,
    pairs: &[(Label, Label)],
) -> i32 {
    let partner_of_in: BTreeMap<&Label, usize> = pairs.iter().enumerate().map(|(i, (b, _))| (b, i)).collect();
    let partner_of_out: BTreeMap<&Label, usize> = pairs.iter().enumerate().map(|(i, (_, a))| (a, i)).collect();
    // Target ranks: contracted pairs first, then the surviving outputs in
    // label order, then the surviving inputs in reverse label order.
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Slot<'a> {
        Pair(usize, u8),
        Out(&'a Label),
        In(std::cmp::Reverse<&'a Label>),
    }
    let mut slots = Vec::new();
    let mut degs = Vec::new();
    let a1 = m.outputs(&x.gen);
    let d1 = m.inputs(&x.gen);
    let a2 = m.outputs(&y.gen);
    let d2 = m.inputs(&y.gen);
    for l in &a1 {
        slots.push(Slot::Out(l));
        degs.push(leg_degree(m, spaces, x, l));
    }
    for l in d1.iter().rev() {
        slots.push(match partner_of_in.get(l) {
            Some(&i) => Slot::Pair(i, 0),
            None => Slot::In(std::cmp::Reverse(l)),
        });
        degs.push(leg_degree(m, spaces, x, l));
    }
    for l in &a2 {
        slots.push(match partner_of_out.get(l) {
            Some(&i) => Slot::Pair(i, 1),
            None => Slot::Out(l),
        });
        degs.push(leg_degree(m, spaces, y, l));
    }
    for l in d2.iter().rev() {
        slots.push(Slot::In(std::cmp::Reverse(l)));
        degs.push(leg_degree(m, spaces, y, l));
    }
    sort_sign(&slots, &degs)
}

fn compose_keys<M: CoinvariantModel + ?Sized>(
    m: &M,
    spaces: &Spaces,
    x: &CoinvKey<M::Gen>,
    y: &CoinvKey<M::Gen>,
    out: &mut Coinv<M::Gen>,
    scale: &Rational,
) {
    let w1: i64 = key_degree(m, spaces, x) - m.degree(&x.gen);
    let outer = if is_odd(w1 * m.degree(&y.gen)) { -scale.clone() } else { scale.clone() };
    for (x1, c1) in prefixed(m, spaces, x, "1") {
        for (y2, c2) in prefixed(m, spaces, y, "2") {
            for pairs in contractions(m, &x1, &y2) {
                let eta = Bijection::new(pairs.iter().cloned()).expect("distinct labels");
                let s = sign_rat(wick_sign(m, spaces, &x1, &y2, &pairs));
                let mut deco = x1.deco.clone();
                deco.extend(y2.deco.iter().map(|(l, &i)| (l.clone(), i)));
                for (b, a) in &pairs {
                    deco.remove(b);
                    deco.remove(a);
                }
                let mut raw = LinComb::new();
                for (gen, cg) in m.compose(&x1.gen, &y2.gen, &eta) {
                    add_term(&mut raw, CoinvKey { gen, deco: deco.clone() }, cg * &s * &c1 * &c2 * &outer);
                }
                add_scaled(out, &normalize(m, spaces, &raw), &int(1));
            }
        }
    }
}

/// `x ∘̃ y`: every nonempty contraction of inputs of `x` with outputs of
/// `y`, composing the generators along the same pairs.
pub fn tilde_compose<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, x: &Coinv<M::Gen>, y: &Coinv<M::Gen>) -> Coinv<M::Gen> {
    let mut out = LinComb::new();
    for (kx, cx) in x {
        for (ky, cy) in y {
            compose_keys(m, spaces, kx, ky, &mut out, &(cx * cy));
        }
    }
    out
}

/// `d̃(p ⊗ w) = d_P(p) ⊗ w − (−1)^{|p|} p ⊗ d_E(w)`.
pub fn tilde_differential<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, x: &Coinv<M::Gen>) -> Coinv<M::Gen> {
    let mut raw = LinComb::new();
    for (k, c) in x {
        for (g, cg) in m.differential(&k.gen) {
            add_term(&mut raw, CoinvKey { gen: g, deco: k.deco.clone() }, c * cg);
        }
        let global = |l: &Label| spaces.offsets[m.color(&k.gen, l)] + k.deco[l];
        let e = EndElem {
            outputs: m.outputs(&k.gen).iter().map(|l| (l.clone(), global(l))).collect(),
            inputs: m.inputs(&k.gen).iter().map(|l| (l.clone(), global(l))).collect(),
            chi: 0,
        };
        let sign = if is_odd(m.degree(&k.gen)) { int(1) } else { int(-1) };
        for (de, cd) in Properad::differential(&spaces.total, &e) {
            let local = |l: &Label, i: usize| i - spaces.offsets[m.color(&k.gen, l)];
            let deco = de.outputs.iter().chain(&de.inputs).map(|(l, &i)| (l.clone(), local(l, i))).collect();
            add_term(&mut raw, CoinvKey { gen: k.gen.clone(), deco }, c * cd * &sign);
        }
    }
    normalize(m, spaces, &raw)
}

/// `∂^{(k)}/∂a_j` on a tensor word: removes the `k`-th factor (1-based) if it
/// is `a_j`, with the sign of moving it to the front.
pub fn positional_derivative(k: usize, j: usize, word: &crate::linear::TensorWord, basis: &GradedBasis) -> Result<crate::linear::TensorWord> {
    if k == 0 || k > word.factors.len() {
        return input(format!("position {k} is outside a word of length {}", word.factors.len()));
    }
    let mut factors = word.factors.clone();
    if factors[k - 1] != j {
        return Ok(crate::linear::TensorWord::new(factors, int(0)));
    }
    factors.remove(k - 1);
    let prefix = basis.word_degree(&word.factors[..k - 1]);
    let c = if is_odd(basis.degree(j) * prefix) { -word.coefficient.clone() } else { word.coefficient.clone() };
    Ok(crate::linear::TensorWord::new(factors, c))
}

/// A truncated generating operator `L`. The differential of `V` is carried
/// by `spaces`; `terms` holds the components with `χ > 0`.
#[derive(Debug, Clone)]
pub struct GeneratingOperator<G> {
    pub flavor: Flavor,
    pub spaces: Spaces,
    pub terms: Coinv<G>,
}

impl<G: Clone + Ord + Debug + Hash + Serialize> GeneratingOperator<G> {
    /// Normalizes `terms` and checks that each has degree 1 and `χ > 0`.
    pub fn new<M: CoinvariantModel<Gen = G>>(m: &M, spaces: Spaces, terms: &Coinv<G>) -> Result<Self> {
        let terms = normalize(m, &spaces, terms);
        for k in terms.keys() {
            let d = key_degree(m, &spaces, k);
            if d != 1 {
                return input(format!("term {k:?} has degree {d}, expected 1"));
            }
            if m.chi(&k.gen) <= 0 {
                return input(format!("term {k:?} has χ ≤ 0; the differential belongs to the space"));
            }
        }
        Ok(Self { flavor: m.flavor(), spaces, terms })
    }
}

/// Bounds on the components that are examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub chi_max: i64,
    pub m_max: usize,
    pub n_max: usize,
    /// Declare `L` to vanish outside the loaded terms, making every
    /// component within bounds decidable.
    pub complete: bool,
}

impl Truncation {
    pub fn new(chi_max: i64, m_max: usize, n_max: usize) -> Self {
        Self { chi_max, m_max, n_max, complete: false }
    }

    pub fn complete(mut self) -> Self {
        self.complete = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualTerm {
    pub generator: String,
    /// The word `J`.
    pub outputs: Vec<usize>,
    /// The word `I`.
    pub inputs: Vec<usize>,
    #[serde(with = "crate::linear::rational_serde")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail { residual: Vec<ResidualTerm> },
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentVerdict {
    pub m: usize,
    pub n: usize,
    pub chi: i64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MasterReport {
    pub flavor: Flavor,
    pub components: Vec<ComponentVerdict>,
}

impl MasterReport {
    /// No component failed. Skipped components do not count as failures.
    pub fn passed(&self) -> bool {
        !self.components.iter().any(|c| matches!(c.verdict, Verdict::Fail { .. }))
    }

    pub fn failing(&self) -> BTreeSet<Component> {
        self.components.iter().filter(|c| matches!(c.verdict, Verdict::Fail { .. })).map(|c| (c.m, c.n, c.chi)).collect()
    }

    pub fn skipped(&self) -> BTreeSet<Component> {
        self.components.iter().filter(|c| c.verdict == Verdict::Skipped).map(|c| (c.m, c.n, c.chi)).collect()
    }
}

/// Whether `(m, n, χ)` can carry a stable generator of the flavor.
pub fn stable_shape(flavor: Flavor, m: usize, n: usize, chi: i64) -> bool {
    let twice_g = chi - m as i64 - n as i64 + 2;
    chi >= 1
        && twice_g >= 0
        && match flavor {
            Flavor::Closed | Flavor::Open => twice_g % 2 == 0,
            Flavor::OpenClosed => true,
        }
}

/// Closed flavor: every pair of shapes composing into `(m, n, χ)`, the
/// cylinder included.
fn feeding_shapes(m: usize, n: usize, chi: i64) -> Vec<(Component, Component)> {
    let ok = |a: usize, b: usize, c: i64| stable_shape(Flavor::Closed, a, b, c) || (a, b, c) == (1, 1, 0);
    let mut out = Vec::new();
    for cx in 0..=chi {
        let cy = chi - cx;
        for k in 1..=(chi as usize + 2) {
            for mx in 0..=m {
                let my = m + k - mx;
                for nx in k..=n + k {
                    let ny = n + k - nx;
                    if ok(mx, nx, cx) && ok(my, ny, cy) {
                        out.push(((mx, nx, cx), (my, ny, cy)));
                    }
                }
            }
        }
    }
    out
}

fn decidable(flavor: Flavor, c: Component, t: &Truncation) -> bool {
    if t.complete {
        return true;
    }
    match flavor {
        Flavor::Closed => feeding_shapes(c.0, c.1, c.2)
            .iter()
            .all(|(x, y)| [x, y].iter().all(|s| s.0 <= t.m_max && s.1 <= t.n_max && s.2 <= t.chi_max)),
        // Capping of boundary circles lets arbitrarily large factors feed a
        // component, so only a complete `L` decides it.
        Flavor::Open | Flavor::OpenClosed => false,
    }
}

fn residual_term<M: CoinvariantModel + ?Sized>(m: &M, k: &CoinvKey<M::Gen>, c: &Rational) -> ResidualTerm {
    ResidualTerm {
        generator: format!("{:?}", k.gen),
        outputs: m.outputs(&k.gen).iter().map(|l| k.deco[l]).collect(),
        inputs: m.inputs(&k.gen).iter().map(|l| k.deco[l]).collect(),
        coeff: c.clone(),
    }
}

/// `d̃L + L∘̃L` for the terms of `L`.
pub fn master_residual<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, l: &Coinv<M::Gen>) -> Coinv<M::Gen> {
    let mut r = tilde_differential(m, spaces, l);
    add_scaled(&mut r, &tilde_compose(m, spaces, l, l), &int(1));
    r
}

/// Assemble a report from a residual grouped by component. `d_squared`
/// holds the residual of the `(1,1,0)` component.
fn assemble<M: CoinvariantModel + ?Sized>(
    m: &M,
    residual: &Coinv<M::Gen>,
    d_squared: Vec<ResidualTerm>,
    t: &Truncation,
) -> MasterReport {
    let flavor = m.flavor();
    let mut by_comp: BTreeMap<Component, Vec<ResidualTerm>> = BTreeMap::new();
    for (k, c) in residual {
        by_comp.entry(key_component(m, k)).or_default().push(residual_term(m, k, c));
    }
    let mut components = vec![ComponentVerdict {
        m: 1,
        n: 1,
        chi: 0,
        verdict: if d_squared.is_empty() { Verdict::Pass } else { Verdict::Fail { residual: d_squared } },
    }];
    for chi in 1..=t.chi_max {
        for a in 0..=t.m_max {
            for b in 0..=t.n_max {
                if !stable_shape(flavor, a, b, chi) {
                    continue;
                }
                let verdict = if !decidable(flavor, (a, b, chi), t) {
                    Verdict::Skipped
                } else {
                    match by_comp.remove(&(a, b, chi)) {
                        Some(res) => Verdict::Fail { residual: res },
                        None => Verdict::Pass,
                    }
                };
                components.push(ComponentVerdict { m: a, n: b, chi, verdict });
            }
        }
    }
    MasterReport { flavor, components }
}

fn d_squared_terms(spaces: &Spaces) -> Vec<ResidualTerm> {
    let mut out = Vec::new();
    for (c, v) in spaces.colors.iter().enumerate() {
        for ((t, s), x) in v.d_squared() {
            out.push(ResidualTerm { generator: format!("d²[color {c}]"), outputs: vec![t], inputs: vec![s], coeff: x });
        }
    }
    out
}

/// Evaluate `d(L) + L∘L` componentwise.
pub fn master_check<M: CoinvariantModel + ?Sized>(m: &M, l: &GeneratingOperator<M::Gen>, t: &Truncation) -> MasterReport {
    let r = master_residual(m, &l.spaces, &l.terms);
    assemble(m, &r, d_squared_terms(&l.spaces), t)
}

/// Structure constants `f(p ⊗ w)` on positional labels, stored on whole
/// orbits so that `f(π·key) = c·f(key)` whenever `[key] = c·[π·key]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants<G> {
    pub entries: LinComb<CoinvKey<G>>,
}

impl<G: Clone + Ord + Debug + Hash + Serialize> StructureConstants<G> {
    /// Extend each record over its orbit. Two records that disagree on a
    /// common orbit element are rejected, naming both.
    pub fn from_entries<M: CoinvariantModel<Gen = G>>(
        m: &M,
        spaces: &Spaces,
        entries: impl IntoIterator<Item = (CoinvKey<G>, Rational)>,
    ) -> Result<Self> {
        let mut full: BTreeMap<CoinvKey<G>, (Rational, CoinvKey<G>)> = BTreeMap::new();
        for (key, v) in entries {
            for (p, s) in positionalize(m, spaces, &key) {
                let v = &v * s;
                for (k, c) in orbit(m, spaces, &p) {
                    let val = &v * &c;
                    match full.get(&k) {
                        Some((prev, src)) if *prev != val => {
                            return input(format!(
                                "invariance violated: {src:?} and {key:?} assign {prev} and {val} to {k:?}"
                            ));
                        }
                        Some(_) => {}
                        None => {
                            full.insert(k, (val, key.clone()));
                        }
                    }
                }
            }
        }
        let entries = full.into_iter().filter(|(_, (v, _))| *v != int(0)).map(|(k, (v, _))| (k, v)).collect();
        Ok(Self { entries })
    }

    pub fn get(&self, k: &CoinvKey<G>) -> Rational {
        self.entries.get(k).cloned().unwrap_or_else(|| int(0))
    }
}

/// `L = Σ 1/|Σ| · f(p ⊗ w) · [p ⊗ w]`, with `|Σ| = m!n!` for one color.
pub fn y_iso<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, f: &StructureConstants<M::Gen>) -> Coinv<M::Gen> {
    let mut raw = LinComb::new();
    for (k, v) in &f.entries {
        add_term(&mut raw, k.clone(), v / int(group_order(m, &k.gen) as i64));
    }
    normalize(m, spaces, &raw)
}

/// Inverse of [`y_iso`]: sum each term of `L` over the relabelling group.
pub fn y_inverse<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, l: &Coinv<M::Gen>) -> StructureConstants<M::Gen> {
    let mut entries = LinComb::new();
    for (k, c) in l {
        for (kk, s) in orbit(m, spaces, k) {
            add_term(&mut entries, kk, c * s);
        }
    }
    StructureConstants { entries }
}

/// Open flavor: `L` built from cyclic structure constants, checked through
/// the generic composition driven by boundary-cycle gluing.
pub fn iba_check(spaces: &Spaces, f: &StructureConstants<OpenSurface>, t: &Truncation) -> Result<MasterReport> {
    let m = OpenFrobenius::default();
    let l = GeneratingOperator::new(&m, spaces.clone(), &y_iso(&m, spaces, f))?;
    Ok(master_check(&m, &l, t))
}

/// Open-closed flavor on the two-colored space `(V_o, V_c)`.
pub fn oc_check(spaces: &Spaces, f: &StructureConstants<OpenClosedGenerator>, t: &Truncation) -> Result<MasterReport> {
    if spaces.colors.len() != 2 {
        return input("the open-closed flavor needs an open and a closed space");
    }
    let m = OpenClosedModel;
    let l = GeneratingOperator::new(&m, spaces.clone(), &y_iso(&m, spaces, f))?;
    Ok(master_check(&m, &l, t))
}

mod ibl;
mod operator;
mod sample;

pub use ibl::{closed_maps, ibl_component_relations, ibl_residual};
pub use operator::{operator_square_check, operator_symbol, DiffOperator};
pub use sample::{lie_admissibility_test, random_closed_instance, random_closed_key, random_sample, ClosedInstance, InstanceParams, LieReport, Triple};

#[cfg(test)]
mod tests;
