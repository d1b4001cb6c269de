//! Independent cross-check for open gluing: paste polygon models of both
//! surfaces, identify the glued boundary arcs, and read off the Euler
//! characteristic and boundary circles of the resulting cell complex.

use std::collections::BTreeMap;

use crate::combinatorics::{Bijection, Cycle, Label, LabelSet};
use crate::error::{input, Result};

use super::open::{split_cost, validate_gluing, OpenSurface};

/// Union-find over dense indices.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new() -> Self {
        Dsu(Vec::new())
    }
    fn add(&mut self) -> usize {
        self.0.push(self.0.len());
        self.0.len() - 1
    }
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
    fn classes(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    /// Handle or tether side, paired with another side of the same polygon.
    Paired,
    Segment(Label),
    Gap,
}

struct Edge {
    from: usize,
    to: usize,
    kind: Kind,
}

#[derive(Default)]
struct Complex {
    verts: Option<Dsu>,
    edges: Vec<Edge>,
    edge_dsu: Option<Dsu>,
    faces: usize,
}

/// What the cell complex says about a gluing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub genus: u32,
    /// Boundary circles once glued circles are made pure: cut in two when
    /// they carry both kinds of segment, capped when they carry none.
    pub boundaries: usize,
    /// Mixed cycles read off the boundary circles through glued arcs.
    pub mixed: Vec<Cycle>,
}

/// Side of the polygon word: a boundary edge, or a paired symbol with its
/// id and whether this occurrence is inverted.
enum Letter {
    Pair(usize, bool),
    Boundary(Kind),
}

impl Complex {
    fn v(&mut self) -> &mut Dsu {
        self.verts.get_or_insert_with(Dsu::new)
    }
    fn e(&mut self) -> &mut Dsu {
        self.edge_dsu.get_or_insert_with(Dsu::new)
    }

    /// Add one polygon for `s`; returns the edge index of every segment,
    /// and the indices of the edges on each boundary circle.
    fn add_surface(&mut self, s: &OpenSurface) -> Result<(BTreeMap<Label, usize>, Vec<Vec<usize>>)> {
        let mut word = Vec::new();
        let mut pid = 0;
        for _ in 0..s.genus {
            let (a, b) = (pid, pid + 1);
            pid += 2;
            word.extend([Letter::Pair(a, false), Letter::Pair(b, false), Letter::Pair(a, true), Letter::Pair(b, true)]);
        }
        let mut circle_pos = Vec::new();
        let empties: Vec<Cycle> = (0..s.empty).map(|_| Cycle::empty()).collect();
        for c in s.out_cycles.iter().chain(&s.in_cycles).chain(&empties) {
            word.push(Letter::Pair(pid, false));
            let mut pos = Vec::new();
            if c.is_empty() {
                pos.push(word.len());
                word.push(Letter::Boundary(Kind::Gap));
            }
            for l in c.word() {
                pos.push(word.len());
                word.push(Letter::Boundary(Kind::Segment(l.clone())));
                pos.push(word.len());
                word.push(Letter::Boundary(Kind::Gap));
            }
            word.push(Letter::Pair(pid, true));
            pid += 1;
            circle_pos.push(pos);
        }
        if word.is_empty() {
            return input("the sphere has no polygon model here");
        }
        let n = word.len();
        let corners: Vec<usize> = (0..n).map(|_| self.v().add()).collect();
        let base = self.edges.len();
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for (j, letter) in word.iter().enumerate() {
            let (from, to) = (corners[j], corners[(j + 1) % n]);
            let kind = match letter {
                Letter::Boundary(k) => k.clone(),
                Letter::Pair(..) => Kind::Paired,
            };
            self.edges.push(Edge { from, to, kind });
            self.e().add();
            if let Letter::Pair(id, inv) = letter {
                match first.get(id) {
                    None => {
                        first.insert(*id, j);
                    }
                    Some(&k) => {
                        // Occurrence `k` is direct and `j` inverted.
                        debug_assert!(*inv);
                        self.identify(base + k, base + j, true);
                    }
                }
            }
        }
        self.faces += 1;
        let mut segs = BTreeMap::new();
        for (j, letter) in word.iter().enumerate() {
            if let Letter::Boundary(Kind::Segment(l)) = letter {
                segs.insert(l.clone(), base + j);
            }
        }
        let circles = circle_pos.into_iter().map(|p| p.into_iter().map(|j| base + j).collect()).collect();
        Ok((segs, circles))
    }

    /// Identify two edges, reversing orientation if `reversed`.
    fn identify(&mut self, a: usize, b: usize, reversed: bool) {
        let (af, at, bf, bt) = (self.edges[a].from, self.edges[a].to, self.edges[b].from, self.edges[b].to);
        if reversed {
            self.v().union(af, bt);
            self.v().union(at, bf);
        } else {
            self.v().union(af, bf);
            self.v().union(at, bt);
        }
        self.e().union(a, b);
    }
}

/// Glue through the cell-complex model.
pub fn oracle_glue(left: &OpenSurface, right: &OpenSurface, eta: &Bijection) -> Result<OracleResult> {
    validate_gluing(left, right, eta)?;
    let mut cx = Complex::default();
    let (seg_l, circ_l) = cx.add_surface(left)?;
    let (seg_r, circ_r) = cx.add_surface(right)?;
    let mut glued = vec![false; cx.edges.len()];
    for (b, a) in eta.pairs() {
        let (eb, ea) = (seg_l[b], seg_r[a]);
        cx.identify(ea, eb, true);
        glued[ea] = true;
        glued[eb] = true;
    }
    let mut touched_edge = vec![false; cx.edges.len()];
    for circle in circ_l.iter().chain(&circ_r) {
        if circle.iter().any(|&e| glued[e]) {
            for &e in circle {
                touched_edge[e] = true;
            }
        }
    }
    let v = cx.v().classes() as i64;
    let e = cx.e().classes() as i64;
    let chi_glued = v - e + cx.faces as i64;

    // Boundary graph on vertex classes.
    let mut succ: BTreeMap<usize, usize> = BTreeMap::new();
    let mut indeg: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..cx.edges.len() {
        if cx.edges[i].kind == Kind::Paired || glued[i] {
            continue;
        }
        let (f, t) = (cx.edges[i].from, cx.edges[i].to);
        let f = cx.v().find(f);
        let t = cx.v().find(t);
        if succ.insert(f, i).is_some() {
            return Err(crate::error::Error::Invariant("boundary vertex with two outgoing edges".into()));
        }
        *indeg.entry(t).or_default() += 1;
    }
    if indeg.values().any(|&d| d != 1) || indeg.len() != succ.len() {
        return Err(crate::error::Error::Invariant("boundary is not a union of circles".into()));
    }
    let mut seen = vec![false; cx.edges.len()];
    let mut circles = 0usize;
    let mut mixed = Vec::new();
    let starts: Vec<usize> = succ.values().copied().collect();
    for s in starts {
        if seen[s] {
            continue;
        }
        circles += 1;
        let mut labels = Vec::new();
        let mut touched = false;
        let mut cur = s;
        while !seen[cur] {
            seen[cur] = true;
            touched |= touched_edge[cur];
            if let Kind::Segment(l) = &cx.edges[cur].kind {
                labels.push(l.clone());
            }
            let t = cx.edges[cur].to;
            let t = cx.v().find(t);
            cur = succ[&t];
        }
        if touched {
            mixed.push(Cycle::from_distinct(labels));
        }
    }
    mixed.sort();
    let outputs: LabelSet = left.outputs().into_iter().chain(right.outputs()).collect();
    let t: i64 = mixed.iter().map(|c| split_cost(c, &outputs)).sum();
    let chi_top = chi_glued - t;
    let b = circles as i64 + t;
    let genus = super::open::genus_from_ledger(chi_top, b)?;
    Ok(OracleResult { genus, boundaries: b as usize, mixed })
}

/// Outcome of [`cross_check`].
#[derive(Debug, Clone, Default)]
pub struct CrossCheckReport {
    pub cases: usize,
    pub mismatches: Vec<String>,
}

fn labels(prefix: &str, k: usize) -> crate::combinatorics::LabelSet {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Compare the ledger with the cell-complex model on every gluing of two
/// surfaces of genus at most `max_genus` and at most `max_boundaries`
/// boundary circles each, with at most `max_segments` segments in total. Factors are stable and may carry one extra empty
/// cycle.
pub fn cross_check(max_segments: usize, max_genus: u32, max_boundaries: usize) -> CrossCheckReport {
    use super::open::{cycle_decompositions, open_glue_unstable, trace_mixed_cycles, GenusRule};
    use crate::combinatorics::{all_bijections, subsets};
    let mut rep = CrossCheckReport::default();
    let surfaces = |outs: &crate::combinatorics::LabelSet, ins: &crate::combinatorics::LabelSet| {
        let mut v = Vec::new();
        for oc in cycle_decompositions(outs) {
            for ic in cycle_decompositions(ins) {
                for g in 0..=max_genus {
                    for extra in 0..2 {
                        let s = OpenSurface::with_empty(g, oc.clone(), ic.clone(), extra).expect("disjoint");
                        if s.is_stable() && s.boundaries() <= max_boundaries {
                            v.push(s);
                        }
                    }
                }
            }
        }
        v
    };
    for total in 2..=max_segments {
        for c1 in 0..total {
            for d1b in 1..=total - c1 {
                for c2a in 1..=total - c1 - d1b {
                    let d2 = total - c1 - d1b - c2a;
                    let lefts = surfaces(&labels("u", c1), &labels("y", d1b));
                    let rights = surfaces(&labels("x", c2a), &labels("v", d2));
                    for bset in subsets(&labels("y", d1b)).into_iter().filter(|s| !s.is_empty()) {
                        for aset in subsets(&labels("x", c2a)).into_iter().filter(|s| s.len() == bset.len()) {
                            for eta in all_bijections(&bset, &aset) {
                                for l in &lefts {
                                    for r in &rights {
                                        rep.cases += 1;
                                        let glued = open_glue_unstable(l, r, &eta, GenusRule::Ledger);
                                        let traced = trace_mixed_cycles(l, r, &eta);
                                        let oracle = oracle_glue(l, r, &eta);
                                        let ok = match (&glued, &traced, &oracle) {
                                            (Ok(s), Ok(t), Ok(o)) => {
                                                s.genus == o.genus && s.boundaries() == o.boundaries && t == &o.mixed
                                            }
                                            _ => false,
                                        };
                                        if !ok {
                                            rep.mismatches.push(format!(
                                                "left={l} right={r} eta={:?}: ledger={glued:?} oracle={oracle:?}",
                                                eta.pairs().collect::<Vec<_>>()
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}
