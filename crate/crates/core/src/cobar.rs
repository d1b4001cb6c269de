//! Cobar complex of a properad: decorated directed graphs without directed
//! circuits, grafting, and the vertex-splitting differential.
//!
//! A term is a list of vertices, each decorated by a dual basis element of the
//! properad. An internal edge is a label that one vertex carries as an output
//! and another as an input; every other label is a leg. The list order is the
//! wedge order of the degree-one vertex markers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::Zero;
use serde::Serialize;

use crate::combinatorics::{factorial, fresh_label, permutations, subsets, Bijection, Label, LabelSet};
use crate::error::{input, Error, Result};
use crate::linear::{add_term, int, is_odd, LinComb, Rational};
use crate::properad::{in_labels, out_labels, AxiomBounds, Properad};

/// Underlying directed graph of a term. Edges run from the vertex carrying the
/// output half-edge to the vertex carrying the input half-edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectedGraph {
    pub genera: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    pub out_legs: Vec<(Label, usize)>,
    pub in_legs: Vec<(Label, usize)>,
}

impl DirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.genera.len()
    }

    fn components(&self) -> usize {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent[a] = b;
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// `dim H_1 + Σ G_i`.
    pub fn genus(&self) -> Result<u32> {
        if self.vertex_count() == 0 || self.components() != 1 {
            return input("graph genus needs a connected graph");
        }
        let h1 = self.edges.len() + 1 - self.vertex_count();
        Ok(h1 as u32 + self.genera.iter().sum::<u32>())
    }

    pub fn has_directed_circuit(&self) -> bool {
        let n = self.vertex_count();
        let mut indeg = vec![0usize; n];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for &(a, b) in &self.edges {
                if a == u {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        stack.push(b);
                    }
                }
            }
        }
        seen < n
    }

    /// Graphviz rendering: vertices annotated with their genus, legs as
    /// point-shaped half-nodes.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n");
        for (i, g) in self.genera.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"G={g}\"];");
        }
        for (u, v) in &self.edges {
            let _ = writeln!(s, "  v{u} -> v{v};");
        }
        for (l, v) in &self.in_legs {
            let _ = writeln!(s, "  \"in:{l}\" [shape=point, xlabel=\"{l}\"];\n  \"in:{l}\" -> v{v};");
        }
        for (l, v) in &self.out_legs {
            let _ = writeln!(s, "  \"out:{l}\" [shape=point, xlabel=\"{l}\"];\n  v{v} -> \"out:{l}\";");
        }
        s.push_str("}\n");
        s
    }
}

/// One decorated graph. `vertices[i]` is the element whose dual decorates
/// the i-th vertex; the order is the wedge order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CobarTerm<E> {
    pub vertices: Vec<E>,
}

pub type CobarElement<E> = LinComb<CobarTerm<E>>;

/// Truncation and search limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CobarConfig {
    /// Largest number of vertices canonicalization accepts.
    pub vertex_cap: usize,
    /// Largest number of edges created by one splitting, and largest edge
    /// count of graphs kept by [`verify_d_squared`]. `None` uses `χ + 2`.
    pub max_edges: Option<usize>,
}

impl Default for CobarConfig {
    fn default() -> Self {
        Self { vertex_cap: 5, max_edges: None }
    }
}

/// Where each label sits: vertex carrying it as an output and as an input.
struct Shape {
    outs: Vec<LabelSet>,
    ins: Vec<LabelSet>,
    /// internal label → (tail, head)
    edges: BTreeMap<Label, (usize, usize)>,
    out_legs: BTreeMap<Label, usize>,
    in_legs: BTreeMap<Label, usize>,
}

fn shape<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<Shape> {
    let outs: Vec<LabelSet> = t.vertices.iter().map(|v| p.outputs(v)).collect();
    let ins: Vec<LabelSet> = t.vertices.iter().map(|v| p.inputs(v)).collect();
    let mut out_at = BTreeMap::new();
    let mut in_at = BTreeMap::new();
    for (i, (o, d)) in outs.iter().zip(&ins).enumerate() {
        for l in o {
            if out_at.insert(l.clone(), i).is_some() {
                return input(format!("label {l} is an output of two vertices"));
            }
        }
        for l in d {
            if in_at.insert(l.clone(), i).is_some() {
                return input(format!("label {l} is an input of two vertices"));
            }
        }
    }
    let mut edges = BTreeMap::new();
    let mut out_legs = BTreeMap::new();
    for (l, &u) in &out_at {
        match in_at.remove(l) {
            Some(v) if v == u => return input(format!("label {l} is a loop at one vertex")),
            Some(v) => {
                edges.insert(l.clone(), (u, v));
            }
            None => {
                out_legs.insert(l.clone(), u);
            }
        }
    }
    Ok(Shape { outs, ins, edges, out_legs, in_legs: in_at })
}

fn vertex_genus(chi: i64, legs: usize) -> u32 {
    ((chi - legs as i64 + 2).max(0) / 2) as u32
}

/// The underlying graph of a term.
pub fn graph_of<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<DirectedGraph> {
    let s = shape(p, t)?;
    let genera = t
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| vertex_genus(p.chi(v), s.outs[i].len() + s.ins[i].len()))
        .collect();
    Ok(DirectedGraph {
        genera,
        edges: s.edges.values().copied().collect(),
        out_legs: s.out_legs.into_iter().collect(),
        in_legs: s.in_legs.into_iter().collect(),
    })
}

/// Legs `(C, D)` of a term.
pub fn legs<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<(LabelSet, LabelSet)> {
    let s = shape(p, t)?;
    Ok((s.out_legs.into_keys().collect(), s.in_legs.into_keys().collect()))
}

/// Check that a term is a connected graph without directed circuits whose
/// vertices are all stable.
pub fn validate_term<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<()> {
    let g = graph_of(p, t)?;
    g.genus()?;
    if g.has_directed_circuit() {
        return input("graph has a directed circuit");
    }
    if let Some(v) = t.vertices.iter().find(|v| p.chi(v) <= 0) {
        return input(format!("unstable vertex {v:?}"));
    }
    Ok(())
}

pub fn graph_genus<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<u32> {
    graph_of(p, t)?.genus()
}

/// Relabel an element, returning the image of its dual and the coefficient.
/// The action must send basis elements to multiples of basis elements.
fn relabel_dual<P: Properad>(p: &P, e: &P::Elem, map: &BTreeMap<Label, Label>) -> Result<(P::Elem, Rational)> {
    let bij = |s: LabelSet| {
        Bijection::new(s.into_iter().map(|l| {
            let img = map.get(&l).cloned().unwrap_or_else(|| l.clone());
            (l, img)
        }))
    };
    let (rho, sigma) = (bij(p.outputs(e))?, bij(p.inputs(e))?);
    let img = p.act(&rho, &sigma, e);
    let mut it = img.into_iter();
    match (it.next(), it.next()) {
        (Some((k, c)), None) if !c.is_zero() => Ok((k, c.recip())),
        _ => Err(Error::Invariant(format!("action on {e:?} is not monomial"))),
    }
}

/// Sign of reordering the decoration: `order[j]` is the old position of the
/// new j-th vertex. Markers contribute the permutation sign, the duals their
/// Koszul sign.
fn reorder_sign(order: &[usize], degrees: &[i64]) -> Rational {
    let mut odd = false;
    for j in 0..order.len() {
        for k in j + 1..order.len() {
            if order[j] > order[k] {
                odd ^= true;
                odd ^= is_odd(degrees[order[j]]) && is_odd(degrees[order[k]]);
            }
        }
    }
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

/// Canonical representative of a term under graph isomorphisms fixing the
/// legs. Internal labels become `~0, ~1, …`. Returns `None` when an
/// automorphism acts by a scalar other than one, so the term vanishes.
pub fn canonicalize<P: Properad>(
    p: &P,
    t: &CobarTerm<P::Elem>,
    vertex_cap: usize,
) -> Result<Option<(CobarTerm<P::Elem>, Rational)>> {
    let n = t.vertices.len();
    if n > vertex_cap {
        return Err(Error::Capacity(format!("{n} vertices exceed the cap of {vertex_cap}")));
    }
    let s = shape(p, t)?;
    let degrees: Vec<i64> = t.vertices.iter().map(|v| p.degree(v)).collect();
    // isomorphism invariants; candidate orders keep them sorted
    let inv: Vec<_> = (0..n)
        .map(|i| {
            let legs_o: Vec<&Label> = s.outs[i].iter().filter(|l| s.out_legs.contains_key(*l)).collect();
            let legs_i: Vec<&Label> = s.ins[i].iter().filter(|l| s.in_legs.contains_key(*l)).collect();
            (p.chi(&t.vertices[i]), degrees[i], legs_o, legs_i, s.outs[i].len(), s.ins[i].len())
        })
        .collect();
    let mut best: Option<(Vec<P::Elem>, Rational)> = None;
    let mut conflict = false;
    for order in permutations(n) {
        if order.windows(2).any(|w| inv[w[0]] > inv[w[1]]) {
            continue;
        }
        let mut pos = vec![0; n];
        for (j, &i) in order.iter().enumerate() {
            pos[i] = j;
        }
        let mut groups: BTreeMap<(usize, usize), Vec<&Label>> = BTreeMap::new();
        for (l, &(u, v)) in &s.edges {
            groups.entry((pos[u], pos[v])).or_default().push(l);
        }
        let groups: Vec<Vec<&Label>> = groups.into_values().collect();
        let choices: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| permutations(g.len())).collect();
        let sign = reorder_sign(&order, &degrees);
        let mut idx = vec![0usize; groups.len()];
        loop {
            let mut map = BTreeMap::new();
            let mut k = 0;
            for (g, (labels, perm)) in groups.iter().zip(&choices).enumerate() {
                for &j in &perm[idx[g]] {
                    map.insert(labels[j].clone(), format!("~{k}"));
                    k += 1;
                }
            }
            let mut coeff = sign.clone();
            let mut verts = Vec::with_capacity(n);
            for &i in &order {
                let (e, c) = relabel_dual(p, &t.vertices[i], &map)?;
                coeff *= c;
                verts.push(e);
            }
            match &best {
                Some((b, c)) if *b == verts => conflict |= *c != coeff,
                Some((b, _)) if *b < verts => {}
                _ => {
                    best = Some((verts, coeff));
                    conflict = false;
                }
            }
            // next combination of parallel-edge orders
            let mut g = 0;
            while g < idx.len() {
                idx[g] += 1;
                if idx[g] < choices[g].len() {
                    break;
                }
                idx[g] = 0;
                g += 1;
            }
            if g == idx.len() {
                break;
            }
        }
    }
    let (vertices, coeff) = best.ok_or_else(|| Error::Invariant("no canonical candidate".into()))?;
    Ok((!conflict).then_some((CobarTerm { vertices }, coeff)))
}

/// Canonicalize every term of a combination and collect.
pub fn canonicalize_element<P: Properad>(
    p: &P,
    x: &CobarElement<P::Elem>,
    vertex_cap: usize,
) -> Result<CobarElement<P::Elem>> {
    let mut out = LinComb::new();
    for (t, c) in x {
        if let Some((u, s)) = canonicalize(p, t, vertex_cap)? {
            add_term(&mut out, u, c * s);
        }
    }
    Ok(out)
}

/// One term of the dual composition applied to a vertex: `left` on top,
/// `right` below, joined along the labels in `joined` (inputs of `left`,
/// outputs of `right`).
#[derive(Debug, Clone)]
pub struct Splitting<E> {
    pub left: E,
    pub right: E,
    pub joined: LabelSet,
    pub coeff: Rational,
}

fn edge_bound(chi: i64, cfg: &CobarConfig) -> usize {
    cfg.max_edges.unwrap_or((chi + 2).max(1) as usize)
}

/// All splittings of the dual of `v`: pairs `x ∈ P(C1, D1 ⊔ B, χ1)` and
/// `y ∈ P(C2 ⊔ B, D2, χ2)` joined along the fresh labels `B`, with
/// coefficient `⟨v, x ∘ y⟩ / |B|!`. Each labelled two-vertex graph appears
/// once; summing additionally over the `|B|!` gluings `η` of a fixed pair
/// would overcount every graph by `|B|!`.
pub fn split_vertex<P: Properad>(
    p: &P,
    v: &P::Elem,
    avoid: &LabelSet,
    cfg: &CobarConfig,
) -> Result<Vec<Splitting<P::Elem>>> {
    let (c, d, chi) = (p.outputs(v), p.inputs(v), p.chi(v));
    let mut avoid = avoid.clone();
    avoid.extend(c.iter().cloned());
    avoid.extend(d.iter().cloned());
    let mut out = Vec::new();
    let mut eta = Vec::new();
    for k in 1..=edge_bound(chi, cfg) {
        let lb = fresh_label("e", &avoid);
        avoid.insert(lb.clone());
        let la = fresh_label("a", &avoid);
        avoid.insert(la.clone());
        eta.push((lb, la));
        let glue = Bijection::new(eta.iter().cloned())?;
        let (b, a) = (glue.domain(), glue.codomain());
        let back: BTreeMap<Label, Label> = eta.iter().map(|(bl, al)| (al.clone(), bl.clone())).collect();
        let weight = Rational::from_integer(factorial(k as u64).into()).recip();
        let chis: BTreeSet<(i64, i64)> = p.split_chis(chi, k).into_iter().collect();
        for c1 in subsets(&c) {
            let c2: LabelSet = c.difference(&c1).cloned().collect();
            let c2a: LabelSet = c2.union(&a).cloned().collect();
            for d1 in subsets(&d) {
                let d2: LabelSet = d.difference(&d1).cloned().collect();
                if !p.split_shape_ok(v, &c1, &d2) {
                    continue;
                }
                let d1b: LabelSet = d1.union(&b).cloned().collect();
                let chi1s: BTreeSet<i64> = chis.iter().map(|c| c.0).collect();
                let chi2s: BTreeSet<i64> = chis.iter().map(|c| c.1).collect();
                let xs: Vec<P::Elem> = chi1s
                    .iter()
                    .flat_map(|&c| p.basis(&c1, &d1b, c))
                    .filter(|x| p.split_factor_ok(v, x, true))
                    .collect();
                if xs.is_empty() {
                    continue;
                }
                let ys: Vec<P::Elem> = chi2s
                    .iter()
                    .flat_map(|&c| p.basis(&c2a, &d2, c))
                    .filter(|y| p.split_factor_ok(v, y, false))
                    .collect();
                for x in &xs {
                    for y in &ys {
                        if !chis.contains(&(p.chi(x), p.chi(y))) {
                            continue;
                        }
                        let Some(coef) = p.compose(x, y, &glue).remove(v) else { continue };
                        let sign = if is_odd(p.degree(x)) && is_odd(p.degree(y)) { -1 } else { 1 };
                        let (y2, cy) = relabel_dual(p, y, &back)?;
                        out.push(Splitting {
                            left: x.clone(),
                            right: y2,
                            joined: b.clone(),
                            coeff: coef * cy * &weight * int(sign),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn sign_of(odd: bool) -> Rational {
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

fn all_labels<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> LabelSet {
    t.vertices.iter().flat_map(|v| p.outputs(v).into_iter().chain(p.inputs(v))).collect()
}

/// `∂` of a single term, not yet canonicalized.
fn term_differential<P: Properad>(
    p: &P,
    t: &CobarTerm<P::Elem>,
    cfg: &CobarConfig,
    out: &mut CobarElement<P::Elem>,
) -> Result<()> {
    let n = t.vertices.len();
    let degrees: Vec<i64> = t.vertices.iter().map(|v| p.degree(v)).collect();
    let avoid = all_labels(p, t);
    // splits past the edge bound cannot come back below it
    let mut cfg = *cfg;
    if let Some(k) = cfg.max_edges {
        cfg.max_edges = Some(k.saturating_sub(edge_count(p, t)?));
    }
    let cfg = &cfg;
    let mut prefix = 0i64;
    for i in 0..n {
        let v = &t.vertices[i];
        // internal differential of the dual, moved past the markers and the
        // earlier duals
        let eps = sign_of(is_odd(n as i64 + prefix));
        let dual_sign = sign_of(!is_odd(degrees[i]));
        for q in p.basis(&p.outputs(v), &p.inputs(v), p.chi(v)) {
            if let Some(c) = p.differential(&q).get(v) {
                let mut vs = t.vertices.clone();
                vs[i] = q;
                add_term(out, CobarTerm { vertices: vs }, &eps * &dual_sign * c);
            }
        }
        // splitting: the lower factor is the new vertex and goes in front
        for s in split_vertex(p, v, &avoid, cfg)? {
            let (dx, dy) = (p.degree(&s.left), p.degree(&s.right));
            let mut vs = Vec::with_capacity(n + 1);
            vs.push(s.right);
            vs.extend(t.vertices[..i].iter().cloned());
            vs.push(s.left);
            vs.extend(t.vertices[i + 1..].iter().cloned());
            let sign = sign_of(is_odd(dy) && is_odd(prefix + dx));
            add_term(out, CobarTerm { vertices: vs }, s.coeff * sign);
        }
        prefix += degrees[i];
    }
    Ok(())
}

/// The cobar differential, canonicalized.
pub fn cobar_differential<P: Properad>(
    p: &P,
    x: &CobarElement<P::Elem>,
    cfg: &CobarConfig,
) -> Result<CobarElement<P::Elem>> {
    let mut raw = LinComb::new();
    for (t, c) in x {
        let mut d = LinComb::new();
        term_differential(p, t, cfg, &mut d)?;
        for (u, e) in d {
            add_term(&mut raw, u, e * c);
        }
    }
    canonicalize_element(p, &raw, cfg.vertex_cap)
}

/// A single-vertex term.
pub fn vertex<E: Clone>(e: &E) -> CobarTerm<E> {
    CobarTerm { vertices: vec![e.clone()] }
}

/// Relabel a whole term (dual action on every vertex).
fn relabel_term<P: Properad>(
    p: &P,
    t: &CobarTerm<P::Elem>,
    map: &BTreeMap<Label, Label>,
) -> Result<(CobarTerm<P::Elem>, Rational)> {
    let mut c = int(1);
    let mut vs = Vec::with_capacity(t.vertices.len());
    for v in &t.vertices {
        let (e, k) = relabel_dual(p, v, map)?;
        c *= k;
        vs.push(e);
    }
    Ok((CobarTerm { vertices: vs }, c))
}

/// Cobar composition: join input legs `B` of `x` to output legs `A` of `y`
/// along `η: B → A`. Pairings that close a directed circuit give zero; the
/// wedge orders concatenate with `x` first.
pub fn graft<P: Properad>(
    p: &P,
    x: &CobarElement<P::Elem>,
    y: &CobarElement<P::Elem>,
    eta: &Bijection,
    cfg: &CobarConfig,
) -> Result<CobarElement<P::Elem>> {
    if eta.is_empty() {
        return input("grafting needs at least one pair of legs");
    }
    let mut raw = LinComb::new();
    for (tx, cx) in x {
        let (cx_out, dx) = legs(p, tx)?;
        if !eta.domain().is_subset(&dx) {
            return input("grafting set B is not among the input legs of the upper graph");
        }
        for (ty, cy) in y {
            let (cy_out, dy) = legs(p, ty)?;
            if !eta.codomain().is_subset(&cy_out) {
                return input("grafting set A is not among the output legs of the lower graph");
            }
            let c2: LabelSet = cy_out.difference(&eta.codomain()).cloned().collect();
            let d1: LabelSet = dx.difference(&eta.domain()).cloned().collect();
            if !cx_out.is_disjoint(&c2) || !d1.is_disjoint(&dy) {
                return input("grafting would repeat a leg label");
            }
            let mut avoid = all_labels(p, tx);
            avoid.extend(all_labels(p, ty));
            let mut map_x = BTreeMap::new();
            let mut map_y = BTreeMap::new();
            let (cy_legs, dy_legs) = (cy_out.clone(), dy.clone());
            for l in all_labels(p, ty) {
                if !cy_legs.contains(&l) && !dy_legs.contains(&l) {
                    let f = fresh_label("g", &avoid);
                    avoid.insert(f.clone());
                    map_y.insert(l, f);
                }
            }
            for (bl, al) in eta.pairs() {
                let f = fresh_label("g", &avoid);
                avoid.insert(f.clone());
                map_x.insert(bl.clone(), f.clone());
                map_y.insert(al.clone(), f);
            }
            let (ux, sx) = relabel_term(p, tx, &map_x)?;
            let (uy, sy) = relabel_term(p, ty, &map_y)?;
            let px: i64 = ux.vertices.iter().map(|v| p.degree(v)).sum();
            let sign = sign_of(is_odd(uy.vertices.len() as i64) && is_odd(px));
            let mut vertices = ux.vertices;
            vertices.extend(uy.vertices);
            let t = CobarTerm { vertices };
            if graph_of(p, &t)?.has_directed_circuit() {
                continue;
            }
            add_term(&mut raw, t, cx * cy * sx * sy * sign);
        }
    }
    canonicalize_element(p, &raw, cfg.vertex_cap)
}

/// Outcome of [`verify_d_squared`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DSquaredReport {
    pub generators: usize,
    /// Terms of `∂x` that were differentiated again.
    pub terms: usize,
    /// First generator with `∂² ≠ 0`, with a surviving graph.
    pub witness: Option<String>,
}

impl DSquaredReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

fn edge_count<P: Properad>(p: &P, t: &CobarTerm<P::Elem>) -> Result<usize> {
    Ok(shape(p, t)?.edges.len())
}

/// `∂²` of one generator and the number of terms in `∂`. With an edge bound
/// configured, only graphs within it are kept (the truncated `∂` is exact on
/// those).
pub fn d_squared<P: Properad>(p: &P, e: &P::Elem, cfg: &CobarConfig) -> Result<(usize, CobarElement<P::Elem>)> {
    let mut x = LinComb::new();
    x.insert(vertex(e), int(1));
    let d1 = cobar_differential(p, &x, cfg)?;
    let mut d2 = cobar_differential(p, &d1, cfg)?;
    if let Some(k) = cfg.max_edges {
        let mut keep = LinComb::new();
        for (t, c) in d2 {
            if edge_count(p, &t)? <= k {
                keep.insert(t, c);
            }
        }
        d2 = keep;
    }
    Ok((d1.len(), d2))
}

/// Check `∂² = 0` on every single-vertex generator with positional labels,
/// `|C|, |D| ≤ max_arity`, `|C| + |D| ≤ max_total_legs` and
/// `1 ≤ χ ≤ max_chi`.
pub fn verify_d_squared<P: Properad>(p: &P, bounds: AxiomBounds, cfg: &CobarConfig) -> Result<DSquaredReport> {
    let mut rep = DSquaredReport::default();
    for m in 0..=bounds.max_arity {
        for n in 0..=bounds.max_arity {
            if m + n > bounds.max_total_legs {
                continue;
            }
            let (c, d) = (out_labels(m), in_labels(n));
            for chi in 1..=bounds.max_chi {
                for e in p.basis(&c, &d, chi) {
                    rep.generators += 1;
                    let (terms, d2) = d_squared(p, &e, cfg)?;
                    rep.terms += terms;
                    if let Some((t, c)) = d2.iter().next() {
                        rep.witness = Some(format!("∂²({e:?}) has coefficient {c} on {:?}", t.vertices));
                        return Ok(rep);
                    }
                }
            }
        }
    }
    Ok(rep)
}
