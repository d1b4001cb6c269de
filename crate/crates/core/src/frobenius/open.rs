//! The open Frobenius properad: oriented surfaces whose boundary circles
//! carry cyclically ordered output or input segments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{map_cycle, permutations, Bijection, Cycle, Label, LabelSet};
use crate::error::{input, Error, Result};
use crate::linear::LinComb;
use crate::properad::{single, Properad};

/// `{c_1,…,c_p, d_1,…,d_q}^g`. Nonempty cycles are kept canonical and
/// sorted, so two surfaces are equal iff they present the same generator.
///
/// An empty cycle carries no segments and so is neither an output nor an
/// input cycle; only their number is recorded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpenSurface {
    pub genus: u32,
    pub out_cycles: Vec<Cycle>,
    pub in_cycles: Vec<Cycle>,
    #[serde(default)]
    pub empty: u32,
}

fn disjoint_union(cycles: &[Cycle], what: &str) -> Result<LabelSet> {
    let mut seen = LabelSet::new();
    for c in cycles {
        for l in c.word() {
            if !seen.insert(l.clone()) {
                return input(format!("{what} segment {l} appears in two cycles"));
            }
        }
    }
    Ok(seen)
}

impl OpenSurface {
    /// Empty cycles in either list are counted into [`empty`](Self::empty).
    pub fn new(genus: u32, out_cycles: Vec<Cycle>, in_cycles: Vec<Cycle>) -> Result<Self> {
        Self::with_empty(genus, out_cycles, in_cycles, 0)
    }

    pub fn with_empty(genus: u32, out_cycles: Vec<Cycle>, in_cycles: Vec<Cycle>, empty: u32) -> Result<Self> {
        let c = disjoint_union(&out_cycles, "output")?;
        let d = disjoint_union(&in_cycles, "input")?;
        if let Some(l) = c.intersection(&d).next() {
            return input(format!("label {l} is both an output and an input segment"));
        }
        let empties = out_cycles.iter().chain(&in_cycles).filter(|c| c.is_empty()).count() as u32;
        let mut out_cycles: Vec<Cycle> = out_cycles.into_iter().filter(|c| !c.is_empty()).collect();
        let mut in_cycles: Vec<Cycle> = in_cycles.into_iter().filter(|c| !c.is_empty()).collect();
        out_cycles.sort();
        in_cycles.sort();
        Ok(Self { genus, out_cycles, in_cycles, empty: empty + empties })
    }

    pub fn outputs(&self) -> LabelSet {
        self.out_cycles.iter().flat_map(|c| c.labels()).collect()
    }

    pub fn inputs(&self) -> LabelSet {
        self.in_cycles.iter().flat_map(|c| c.labels()).collect()
    }

    /// Number of boundary circles `b`.
    pub fn boundaries(&self) -> usize {
        self.out_cycles.len() + self.in_cycles.len() + self.empty as usize
    }

    /// `G = 2g + b − 1`.
    pub fn big_g(&self) -> i64 {
        2 * self.genus as i64 + self.boundaries() as i64 - 1
    }

    /// `χ = 2G + |C| + |D| − 2`.
    pub fn chi(&self) -> i64 {
        2 * self.big_g() + (self.outputs().len() + self.inputs().len()) as i64 - 2
    }

    /// Topological Euler characteristic `2 − 2g − b`.
    pub fn chi_top(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries() as i64
    }

    pub fn is_stable(&self) -> bool {
        super::stability_check(self.chi())
    }

    /// Relabel outputs by `rho` and inputs by `sigma`.
    pub fn relabel(&self, rho: &Bijection, sigma: &Bijection) -> Result<Self> {
        let o = self.out_cycles.iter().map(|c| map_cycle(rho, c)).collect::<Result<Vec<_>>>()?;
        let i = self.in_cycles.iter().map(|c| map_cycle(sigma, c)).collect::<Result<Vec<_>>>()?;
        Self::with_empty(self.genus, o, i, self.empty)
    }
}

impl fmt::Display for OpenSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o: Vec<String> = self.out_cycles.iter().map(|c| c.to_string()).collect();
        let i: Vec<String> = self.in_cycles.iter().map(|c| c.to_string()).collect();
        write!(f, "{{out: {} | in: {} | empty: {}}}^{}", o.join(" "), i.join(" "), self.empty, self.genus)
    }
}

/// Which factor a segment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

type Seg = (Side, Label);

/// Cycles of `left` and `right` touched by `eta`, together with the
/// successor and partner maps on their segments.
struct Walk {
    next: BTreeMap<Seg, Seg>,
    partner: BTreeMap<Seg, Seg>,
    /// Segments of touched cycles in a fixed order.
    order: Vec<Seg>,
    touched_left: BTreeSet<usize>,
    touched_right: BTreeSet<usize>,
}

/// Validate a gluing of the inputs `B` of `left` to the outputs `A` of `right`.
pub fn validate_gluing(left: &OpenSurface, right: &OpenSurface, eta: &Bijection) -> Result<()> {
    if eta.is_empty() {
        return input("compositions require nonempty gluing sets");
    }
    let (b, a) = (eta.domain(), eta.codomain());
    if !b.is_subset(&left.inputs()) {
        return input("gluing domain is not a set of input segments of the left surface");
    }
    if !a.is_subset(&right.outputs()) {
        return input("gluing codomain is not a set of output segments of the right surface");
    }
    let c1 = left.outputs();
    let c2: LabelSet = right.outputs().difference(&a).cloned().collect();
    let d1: LabelSet = left.inputs().difference(&b).cloned().collect();
    let d2 = right.inputs();
    if !c1.is_disjoint(&c2) || !d1.is_disjoint(&d2) {
        return input("overlapping label sets in composition");
    }
    let outs: LabelSet = c1.union(&c2).cloned().collect();
    let ins: LabelSet = d1.union(&d2).cloned().collect();
    if !outs.is_disjoint(&ins) {
        return input("result would share a label between outputs and inputs");
    }
    Ok(())
}

impl Walk {
    fn new(left: &OpenSurface, right: &OpenSurface, eta: &Bijection) -> Self {
        let mut w = Walk {
            next: BTreeMap::new(),
            partner: BTreeMap::new(),
            order: Vec::new(),
            touched_left: BTreeSet::new(),
            touched_right: BTreeSet::new(),
        };
        for (b, a) in eta.pairs() {
            w.partner.insert((Side::Left, b.clone()), (Side::Right, a.clone()));
            w.partner.insert((Side::Right, a.clone()), (Side::Left, b.clone()));
        }
        let add = |side: Side, cycles: &[Cycle], set: &mut BTreeSet<usize>, w: &mut Walk| {
            for (i, c) in cycles.iter().enumerate() {
                if !c.word().iter().any(|l| w.partner.contains_key(&(side, l.clone()))) {
                    continue;
                }
                set.insert(i);
                let word = c.word();
                for (j, l) in word.iter().enumerate() {
                    let nx = word[(j + 1) % word.len()].clone();
                    w.next.insert((side, l.clone()), (side, nx));
                    w.order.push((side, l.clone()));
                }
            }
        };
        let (mut tl, mut tr) = (BTreeSet::new(), BTreeSet::new());
        add(Side::Left, &left.in_cycles, &mut tl, &mut w);
        add(Side::Right, &right.out_cycles, &mut tr, &mut w);
        w.touched_left = tl;
        w.touched_right = tr;
        w
    }

    /// From the gap after `s`: step to the next segment, jumping across a
    /// glued pair to the gap after the partner.
    fn step(&self, s: &Seg) -> Seg {
        let t = &self.next[s];
        self.partner.get(t).unwrap_or(t).clone()
    }

    fn is_glued(&self, s: &Seg) -> bool {
        self.partner.contains_key(s)
    }

    /// Run the walk. Non-glued starting points are taken in `starts` order;
    /// orbits that only meet glued segments give empty mixed cycles.
    fn run(&self, starts: &[Seg]) -> Vec<Vec<Seg>> {
        let mut visited: BTreeSet<Seg> = BTreeSet::new();
        let mut out = Vec::new();
        let free = starts.iter().filter(|s| !self.is_glued(s));
        let glued = self.order.iter().filter(|s| self.is_glued(s));
        for s in free.chain(glued) {
            if visited.contains(s) {
                continue;
            }
            let mut rec = Vec::new();
            let mut cur = s.clone();
            loop {
                visited.insert(cur.clone());
                if !self.is_glued(&cur) {
                    rec.push(cur.clone());
                }
                cur = self.step(&cur);
                if &cur == s {
                    break;
                }
            }
            out.push(rec);
        }
        out
    }
}

fn to_cycles(orbits: Vec<Vec<Seg>>) -> Vec<Cycle> {
    let mut v: Vec<Cycle> = orbits
        .into_iter()
        .map(|o| Cycle::from_distinct(o.into_iter().map(|(_, l)| l).collect()))
        .collect();
    v.sort();
    v
}

/// Mixed cycles produced by gluing `left` (inputs `B`) to `right` (outputs `A`).
pub fn trace_mixed_cycles(left: &OpenSurface, right: &OpenSurface, eta: &Bijection) -> Result<Vec<Cycle>> {
    validate_gluing(left, right, eta)?;
    let w = Walk::new(left, right, eta);
    Ok(to_cycles(w.run(&w.order)))
}

/// As [`trace_mixed_cycles`], visiting starting segments in a random order.
pub fn trace_mixed_cycles_shuffled<R: Rng>(
    left: &OpenSurface,
    right: &OpenSurface,
    eta: &Bijection,
    rng: &mut R,
) -> Result<Vec<Cycle>> {
    validate_gluing(left, right, eta)?;
    let w = Walk::new(left, right, eta);
    let mut starts = w.order.clone();
    starts.shuffle(rng);
    Ok(to_cycles(w.run(&starts)))
}

/// Split a mixed cycle into its output and input subwords.
/// Whether every maximal run of `kept` labels in `cycle` (cyclically between
/// labels outside `kept`) is a contiguous piece of one of `targets`. A cycle
/// without foreign labels must itself be one of `targets`.
fn runs_survive(cycle: &Cycle, kept: &LabelSet, targets: &[Cycle]) -> bool {
    let w = cycle.word();
    let Some(start) = w.iter().position(|l| !kept.contains(l)) else {
        return targets.contains(cycle);
    };
    let n = w.len();
    let mut run: Vec<&Label> = Vec::new();
    for i in 1..=n {
        let l = &w[(start + i) % n];
        if kept.contains(l) {
            run.push(l);
            continue;
        }
        if !run.is_empty() && !targets.iter().any(|t| contiguous_in(&run, t)) {
            return false;
        }
        run.clear();
    }
    true
}

fn contiguous_in(run: &[&Label], t: &Cycle) -> bool {
    let tw = t.word();
    let Some(p) = tw.iter().position(|l| l == run[0]) else { return false };
    run.len() <= tw.len() && run.iter().enumerate().all(|(i, l)| &tw[(p + i) % tw.len()] == *l)
}

/// Change in the number of boundary circles when a traced cycle is made
/// pure: a cycle with both kinds of segment is cut in two, a pure cycle is
/// kept, and a cycle with no segments left is capped off.
pub(crate) fn split_cost(cycle: &Cycle, outputs: &LabelSet) -> i64 {
    let w = cycle.word();
    let o = w.iter().any(|l| outputs.contains(l)) as i64;
    let i = w.iter().any(|l| !outputs.contains(l)) as i64;
    o + i - 1
}

pub fn split_mixed_cycle(mixed: &Cycle, outputs: &LabelSet) -> (Cycle, Cycle) {
    let (o, i): (Vec<Label>, Vec<Label>) = mixed.word().iter().cloned().partition(|l| outputs.contains(l));
    (Cycle::from_distinct(o), Cycle::from_distinct(i))
}

/// How the genus of a glued surface is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenusRule {
    /// Euler characteristic bookkeeping: each glued pair and each split
    /// cycle lowers `χ_top` by one.
    #[default]
    Ledger,
    /// Sum of the genera plus the number of distinct pairs of glued
    /// boundary circles. Kept for comparison only.
    PaperVerbal,
}

impl std::str::FromStr for GenusRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ledger" => Ok(Self::Ledger),
            "paper-verbal" => Ok(Self::PaperVerbal),
            _ => input(format!("unknown genus rule {s:?}")),
        }
    }
}

/// Genus from `χ_top` and `b`; fails if `(2 − χ_top − b)/2` is not a
/// nonnegative integer.
pub(crate) fn genus_from_ledger(chi_top: i64, b: i64) -> Result<u32> {
    let twice = 2 - chi_top - b;
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::Invariant(format!("ledger gives 2g = {twice} (χ_top={chi_top}, b={b})")));
    }
    Ok((twice / 2) as u32)
}

/// Boundary data of a gluing: the untouched cycles of both factors and the
/// split mixed cycles, plus the mixed cycles themselves. The untouched empty
/// cycles of the factors are not included.
pub(crate) fn glue_boundaries(
    left: &OpenSurface,
    right: &OpenSurface,
    eta: &Bijection,
) -> Result<(Vec<Cycle>, Vec<Cycle>, i64)> {
    validate_gluing(left, right, eta)?;
    let w = Walk::new(left, right, eta);
    let mixed = to_cycles(w.run(&w.order));
    let c2: LabelSet = right.outputs().difference(&eta.codomain()).cloned().collect();
    let mut outs = left.out_cycles.clone();
    let mut ins = right.in_cycles.clone();
    outs.extend(right.out_cycles.iter().enumerate().filter(|(i, _)| !w.touched_right.contains(i)).map(|(_, c)| c.clone()));
    ins.extend(left.in_cycles.iter().enumerate().filter(|(i, _)| !w.touched_left.contains(i)).map(|(_, c)| c.clone()));
    let mut splits = 0;
    for m in &mixed {
        splits += split_cost(m, &c2);
        let (o, i) = split_mixed_cycle(m, &c2);
        if !o.is_empty() {
            outs.push(o);
        }
        if !i.is_empty() {
            ins.push(i);
        }
    }
    Ok((outs, ins, splits))
}

/// Glue the inputs `B` of `left` to the outputs `A` of `right` along `η`.
pub fn open_glue(left: &OpenSurface, right: &OpenSurface, eta: &Bijection, rule: GenusRule) -> Result<OpenSurface> {
    let s = open_glue_unstable(left, right, eta, rule)?;
    if !s.is_stable() {
        return input(format!("composition is unstable: {s}"));
    }
    Ok(s)
}

/// [`open_glue`] without the stability check on the result.
pub(crate) fn open_glue_unstable(
    left: &OpenSurface,
    right: &OpenSurface,
    eta: &Bijection,
    rule: GenusRule,
) -> Result<OpenSurface> {
    let (outs, ins, splits) = glue_boundaries(left, right, eta)?;
    let empty = left.empty + right.empty;
    let b = (outs.len() + ins.len()) as i64 + empty as i64;
    let genus = match rule {
        GenusRule::Ledger => {
            let chi_top = left.chi_top() + right.chi_top() - eta.len() as i64 - splits;
            genus_from_ledger(chi_top, b)?
        }
        GenusRule::PaperVerbal => {
            let cycle_of = |cycles: &[Cycle], l: &str| cycles.iter().position(|c| c.contains(l));
            let pairs: BTreeSet<(Option<usize>, Option<usize>)> = eta
                .pairs()
                .map(|(bl, al)| (cycle_of(&left.in_cycles, bl), cycle_of(&right.out_cycles, al)))
                .collect();
            left.genus + right.genus + pairs.len() as u32
        }
    };
    OpenSurface::with_empty(genus, outs, ins, empty)
}

/// All ways to arrange `labels` into disjoint nonempty cycles.
pub fn cycle_decompositions(labels: &LabelSet) -> Vec<Vec<Cycle>> {
    let v: Vec<&Label> = labels.iter().collect();
    let mut out = Vec::new();
    for p in permutations(v.len()) {
        let mut seen = vec![false; v.len()];
        let mut cycles = Vec::new();
        for s in 0..v.len() {
            if seen[s] {
                continue;
            }
            let mut word = Vec::new();
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                word.push(v[i].clone());
                i = p[i];
            }
            cycles.push(Cycle::from_distinct(word));
        }
        cycles.sort();
        out.push(cycles);
    }
    out
}

/// All stable surfaces with outputs `c`, inputs `d` and the given `χ`.
pub fn open_basis(c: &LabelSet, d: &LabelSet, chi: i64) -> Vec<OpenSurface> {
    let s = (c.len() + d.len()) as i64;
    let twice_g = chi - s + 2;
    if chi <= 0 || twice_g < 0 || twice_g % 2 != 0 {
        return Vec::new();
    }
    let big_g = twice_g / 2;
    let mut out = Vec::new();
    for oc in cycle_decompositions(c) {
        for ic in cycle_decompositions(d) {
            let nonempty = (oc.len() + ic.len()) as i64;
            let mut genus = 0i64;
            // b = G + 1 − 2g must cover the nonempty cycles.
            while big_g + 1 - 2 * genus >= nonempty.max(1) {
                let empties = big_g + 1 - 2 * genus - nonempty;
                let s = OpenSurface::with_empty(genus as u32, oc.clone(), ic.clone(), empties as u32);
                out.push(s.expect("disjoint by construction"));
                genus += 1;
            }
        }
    }
    out.sort();
    out
}

/// The open Frobenius properad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenFrobenius {
    /// Admit surfaces without outputs or without inputs.
    pub generalized: bool,
    pub genus_rule: GenusRule,
}

impl Default for OpenFrobenius {
    fn default() -> Self {
        Self { generalized: true, genus_rule: GenusRule::Ledger }
    }
}

impl Properad for OpenFrobenius {
    type Elem = OpenSurface;

    fn name(&self) -> String {
        "open-frobenius".into()
    }
    fn outputs(&self, e: &OpenSurface) -> LabelSet {
        e.outputs()
    }
    fn inputs(&self, e: &OpenSurface) -> LabelSet {
        e.inputs()
    }
    fn chi(&self, e: &OpenSurface) -> i64 {
        e.chi()
    }
    fn basis(&self, c: &LabelSet, d: &LabelSet, chi: i64) -> Vec<OpenSurface> {
        if !self.generalized && (c.is_empty() || d.is_empty()) {
            return Vec::new();
        }
        open_basis(c, d, chi)
    }
    fn act(&self, rho: &Bijection, sigma: &Bijection, e: &OpenSurface) -> LinComb<OpenSurface> {
        single(e.relabel(rho, sigma).expect("relabelling by bijections"))
    }
    fn split_chis(&self, chi: i64, glued: usize) -> Vec<(i64, i64)> {
        // χ = χ1 + χ2 + 2·(cuts − caps), with at most 2|A| touched circles
        let k = 2 * glued as i64;
        let mut out = Vec::new();
        for sum in (chi - 2 * k).max(2)..=chi + 2 * k {
            if (sum - chi) % 2 == 0 {
                out.extend((1..sum).map(|c1| (c1, sum - c1)));
            }
        }
        out
    }
    fn split_shape_ok(&self, target: &OpenSurface, c1: &LabelSet, d2: &LabelSet) -> bool {
        // the upper factor's output cycles and the lower factor's input
        // cycles pass through a gluing unchanged
        let union_of = |cycles: &[Cycle], s: &LabelSet| {
            cycles.iter().all(|c| {
                let l = c.labels();
                l.is_subset(s) || l.is_disjoint(s)
            })
        };
        union_of(&target.out_cycles, c1) && union_of(&target.in_cycles, d2)
    }
    fn split_factor_ok(&self, target: &OpenSurface, f: &OpenSurface, upper: bool) -> bool {
        if f.genus > target.genus || f.empty > target.empty {
            return false;
        }
        let (kept, touched, dest) = if upper {
            (&f.out_cycles, &f.in_cycles, &target.in_cycles)
        } else {
            (&f.in_cycles, &f.out_cycles, &target.out_cycles)
        };
        if !kept.iter().all(|c| target.out_cycles.contains(c) || target.in_cycles.contains(c)) {
            return false;
        }
        // labels foreign to the target are glued away; the runs between them
        // are traced in order and stay contiguous in the result
        let labels = target.outputs().into_iter().chain(target.inputs()).collect::<LabelSet>();
        touched.iter().all(|c| runs_survive(c, &labels, dest))
    }
    fn compose(&self, l: &OpenSurface, r: &OpenSurface, eta: &Bijection) -> LinComb<OpenSurface> {
        match open_glue(l, r, eta, self.genus_rule) {
            Ok(s) => single(s),
            Err(Error::Invariant(msg)) => panic!("open gluing invariant failure: {msg}"),
            Err(_) => LinComb::new(),
        }
    }
}
