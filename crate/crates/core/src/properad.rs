//! Behavioural properads, axiom checkers and the skeletal bridge.
//!
//! A [`Properad`] is given by a finite homogeneous basis for each component
//! `P(C, D, χ)`, the relabelling action and the partial compositions on basis
//! elements. Everything else is extended bilinearly.
//!
//! Relabellings are covariant on both sides: `(ρ, σ)` with `ρ: C → C'` and
//! `σ: D → D'` sends `P(C, D)` to `P(C', D')`, and functoriality reads
//! `P(ρρ', σσ') = P(ρ, σ) P(ρ', σ')`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::combinatorics::{all_bijections, label_set, Bijection, LabelSet};
use crate::error::{input, Result};
use crate::linear::{add_scaled, add_term, int, is_odd, koszul_sign_unchecked, LinComb, Rational};

pub trait Properad: Sync {
    type Elem: Clone + Ord + Debug + Send + Sync;

    fn name(&self) -> String;
    fn outputs(&self, e: &Self::Elem) -> LabelSet;
    fn inputs(&self, e: &Self::Elem) -> LabelSet;
    fn chi(&self, e: &Self::Elem) -> i64;
    fn degree(&self, _e: &Self::Elem) -> i64 {
        0
    }
    /// A basis of `P(C, D, χ)`; empty when the component vanishes.
    fn basis(&self, outputs: &LabelSet, inputs: &LabelSet, chi: i64) -> Vec<Self::Elem>;
    /// `P(ρ, σ)` on a basis element.
    fn act(&self, rho: &Bijection, sigma: &Bijection, e: &Self::Elem) -> LinComb<Self::Elem>;
    /// `left ∘^η_{B,A} right` with `η: B → A`, `B ⊆ inputs(left)`,
    /// `A ⊆ outputs(right)`. Callers validate the shapes.
    fn compose(&self, left: &Self::Elem, right: &Self::Elem, eta: &Bijection) -> LinComb<Self::Elem>;
    fn differential(&self, _e: &Self::Elem) -> LinComb<Self::Elem> {
        LinComb::new()
    }
    /// Smallest admissible χ for the given arities (stability or the
    /// generalized cylinder/sphere components).
    fn min_chi(&self, _m: usize, _n: usize) -> i64 {
        1
    }
    /// Pairs `(χ1, χ2)` of stable factors that can compose to `chi` when
    /// `glued` pairs are joined. The default suits additive characteristics.
    fn split_chis(&self, chi: i64, _glued: usize) -> Vec<(i64, i64)> {
        (1..chi).map(|c1| (c1, chi - c1)).collect()
    }
    /// Cheap necessary condition on a splitting of `target` into an upper
    /// factor with outputs `c1` and a lower factor with inputs `d2`.
    fn split_shape_ok(&self, _target: &Self::Elem, _c1: &LabelSet, _d2: &LabelSet) -> bool {
        true
    }
    /// Cheap necessary condition on one factor of a splitting of `target`.
    fn split_factor_ok(&self, _target: &Self::Elem, _factor: &Self::Elem, _upper: bool) -> bool {
        true
    }
}

/// Validate a composition request and apply it.
pub fn compose_checked<P: Properad>(
    p: &P,
    left: &P::Elem,
    right: &P::Elem,
    eta: &Bijection,
) -> Result<LinComb<P::Elem>> {
    if eta.is_empty() {
        return input("compositions require nonempty gluing sets");
    }
    let (li, ro) = (p.inputs(left), p.outputs(right));
    if !eta.domain().is_subset(&li) {
        return input("gluing set B is not contained in the left inputs");
    }
    if !eta.codomain().is_subset(&ro) {
        return input("gluing set A is not contained in the right outputs");
    }
    let c1 = p.outputs(left);
    let c2: LabelSet = ro.difference(&eta.codomain()).cloned().collect();
    let d1: LabelSet = li.difference(&eta.domain()).cloned().collect();
    let d2 = p.inputs(right);
    if !c1.is_disjoint(&c2) || !d1.is_disjoint(&d2) {
        return input("overlapping label sets in composition");
    }
    Ok(p.compose(left, right, eta))
}

/// Bilinear extension of the composition.
pub fn compose_lin<P: Properad>(
    p: &P,
    x: &LinComb<P::Elem>,
    y: &LinComb<P::Elem>,
    eta: &Bijection,
) -> LinComb<P::Elem> {
    let mut out = LinComb::new();
    for (a, ca) in x {
        for (b, cb) in y {
            add_scaled(&mut out, &p.compose(a, b, eta), &(ca * cb));
        }
    }
    out
}

pub fn act_lin<P: Properad>(
    p: &P,
    rho: &Bijection,
    sigma: &Bijection,
    x: &LinComb<P::Elem>,
) -> LinComb<P::Elem> {
    let mut out = LinComb::new();
    for (a, c) in x {
        add_scaled(&mut out, &p.act(rho, sigma, a), c);
    }
    out
}

pub fn single<K: Ord>(k: K) -> LinComb<K> {
    let mut m = LinComb::new();
    m.insert(k, int(1));
    m
}

/// Bounds for exhaustive axiom checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomBounds {
    /// Largest output and input arity of any element involved.
    pub max_arity: usize,
    /// Largest χ of any element involved.
    pub max_chi: i64,
    /// Largest total number of legs summed over all factors of one case.
    pub max_total_legs: usize,
}

impl AxiomBounds {
    pub fn new(max_arity: usize, max_chi: i64, max_total_legs: usize) -> Self {
        Self { max_arity, max_chi, max_total_legs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: String,
    pub witness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub cases: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(&mut self, other: AxiomReport) {
        self.cases += other.cases;
        self.violations.extend(other.violations);
    }
}

/// Labels `<prefix>1..<prefix>k`.
pub fn labels(prefix: &str, k: usize) -> LabelSet {
    label_set((1..=k).map(|i| format!("{prefix}{i}")))
}

fn union(a: &LabelSet, b: &LabelSet) -> LabelSet {
    a.union(b).cloned().collect()
}

fn perms_of(s: &LabelSet) -> Vec<Bijection> {
    all_bijections(s, s)
}

fn show_bij(b: &Bijection) -> String {
    let parts: Vec<String> = b.pairs().map(|(a, c)| format!("{a}->{c}")).collect();
    format!("{{{}}}", parts.join(","))
}

/// Adjacent transpositions of `s` in label order.
fn adjacent_transpositions(s: &LabelSet) -> Vec<Bijection> {
    let v: Vec<&String> = s.iter().collect();
    (1..v.len())
        .map(|i| {
            let mut id = Bijection::identity(s);
            id = id.restrict(&s.iter().filter(|l| *l != v[i - 1] && *l != v[i]).cloned().collect());
            id.union(&Bijection::new([(v[i - 1].clone(), v[i].clone()), (v[i].clone(), v[i - 1].clone())]).expect("swap"))
                .expect("disjoint")
        })
        .collect()
}

/// Axiom 1: identity and functoriality of the relabelling action.
///
/// Functoriality is verified as `P(t g) = P(t) P(g)` for every group element
/// `g` and every adjacent transposition `t` on either side. Since the
/// transpositions generate, this implies the identity for all pairs.
pub fn check_sigma_bimodule<P: Properad>(p: &P, bounds: AxiomBounds) -> AxiomReport {
    let mut rep = AxiomReport::default();
    for m in 0..=bounds.max_arity {
        for n in 0..=bounds.max_arity {
            if m + n > bounds.max_total_legs || (m == 0 && n == 0 && bounds.max_arity == 0) {
                continue;
            }
            let (c, d) = (labels("c", m), labels("d", n));
            let (pc, pd) = (perms_of(&c), perms_of(&d));
            let (idc, idd) = (Bijection::identity(&c), Bijection::identity(&d));
            let gens: Vec<(Bijection, Bijection)> = adjacent_transpositions(&c)
                .into_iter()
                .map(|t| (t, idd.clone()))
                .chain(adjacent_transpositions(&d).into_iter().map(|t| (idc.clone(), t)))
                .collect();
            for chi in p.min_chi(m, n)..=bounds.max_chi {
                for e in p.basis(&c, &d, chi) {
                    rep.cases += 1;
                    let x = single(e.clone());
                    if act_lin(p, &idc, &idd, &x) != x {
                        rep.violations.push(Violation {
                            axiom: "1 (identity)".into(),
                            witness: format!("{e:?}"),
                        });
                    }
                    for (r1, s1) in pc.iter().cartesian_product(pd.iter()) {
                        let y = act_lin(p, r1, s1, &x);
                        for (r2, s2) in &gens {
                            let lhs = act_lin(
                                p,
                                &r2.compose(r1).expect("same set"),
                                &s2.compose(s1).expect("same set"),
                                &x,
                            );
                            if lhs != act_lin(p, r2, s2, &y) {
                                rep.violations.push(Violation {
                                    axiom: "1 (functoriality)".into(),
                                    witness: format!(
                                        "{e:?} rho={} sigma={} rho'={} sigma'={}",
                                        show_bij(r2),
                                        show_bij(s2),
                                        show_bij(r1),
                                        show_bij(s1)
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}

/// One two-factor shape: left `(C1, D1 ⊔ B)`, right `(C2 ⊔ A, D2)`.
#[derive(Debug, Clone)]
struct PairShape {
    c1: LabelSet,
    d1: LabelSet,
    b: LabelSet,
    c2: LabelSet,
    a: LabelSet,
    d2: LabelSet,
}

fn pair_shapes(bounds: AxiomBounds) -> Vec<PairShape> {
    let mut out = Vec::new();
    let r = bounds.max_arity;
    for k in 1..=r {
        for (m1, n1, m2, n2) in (0..=r).cartesian_product(0..=r).cartesian_product(0..=r).cartesian_product(0..=r).map(|(((a, b), c), d)| (a, b, c, d)) {
            if n1 + k > r || m2 + k > r {
                continue;
            }
            if m1 + n1 + m2 + n2 + 2 * k > bounds.max_total_legs {
                continue;
            }
            if m1 + m2 > r || n1 + n2 > r {
                continue;
            }
            out.push(PairShape {
                c1: labels("c", m1),
                d1: labels("d", n1),
                b: labels("b", k),
                c2: labels("e", m2),
                a: labels("a", k),
                d2: labels("f", n2),
            });
        }
    }
    out
}

/// Axiom 2: equivariance of the compositions.
pub fn check_equivariance<P: Properad>(p: &P, bounds: AxiomBounds) -> AxiomReport {
    let mut rep = AxiomReport::default();
    if bounds.max_arity == 0 {
        return rep;
    }
    for sh in pair_shapes(bounds) {
        let lin = union(&sh.d1, &sh.b);
        let rout = union(&sh.c2, &sh.a);
        for chi1 in p.min_chi(sh.c1.len(), lin.len())..=bounds.max_chi {
            let xs = p.basis(&sh.c1, &lin, chi1);
            if xs.is_empty() {
                continue;
            }
            for chi2 in p.min_chi(rout.len(), sh.d2.len())..=bounds.max_chi {
                let ys = p.basis(&rout, &sh.d2, chi2);
                for eta in all_bijections(&sh.b, &sh.a) {
                    for x in &xs {
                        for y in &ys {
                            let base = p.compose(x, y, &eta);
                            rep.merge(equivariance_case(p, &sh, x, y, &eta, &base));
                        }
                    }
                }
            }
        }
    }
    rep
}

/// Compatibility with the differential: `d² = 0`, `d` raises degree by one,
/// and `d(x ∘ y) = dx ∘ y + (−1)^{|x|} x ∘ dy`.
pub fn check_differential<P: Properad>(p: &P, bounds: AxiomBounds) -> AxiomReport {
    let mut rep = AxiomReport::default();
    if bounds.max_arity == 0 {
        return rep;
    }
    let d_lin = |x: &LinComb<P::Elem>| {
        let mut out = LinComb::new();
        for (e, c) in x {
            add_scaled(&mut out, &p.differential(e), c);
        }
        out
    };
    for sh in pair_shapes(bounds) {
        let lin = union(&sh.d1, &sh.b);
        let rout = union(&sh.c2, &sh.a);
        for chi1 in p.min_chi(sh.c1.len(), lin.len())..=bounds.max_chi {
            let xs = p.basis(&sh.c1, &lin, chi1);
            for chi2 in p.min_chi(rout.len(), sh.d2.len())..=bounds.max_chi {
                let ys = p.basis(&rout, &sh.d2, chi2);
                let eta = all_bijections(&sh.b, &sh.a).into_iter().next().expect("equal sizes");
                for x in &xs {
                    let dx = p.differential(x);
                    let bad_degree = dx.keys().any(|e| p.degree(e) != p.degree(x) + 1);
                    if bad_degree || !d_lin(&dx).is_empty() {
                        rep.violations.push(Violation { axiom: "dg".into(), witness: format!("x={x:?}") });
                    }
                    for y in &ys {
                        rep.cases += 1;
                        let lhs = d_lin(&p.compose(x, y, &eta));
                        let mut rhs = compose_lin(p, &dx, &single(y.clone()), &eta);
                        let sign = if is_odd(p.degree(x)) { int(-1) } else { int(1) };
                        add_scaled(&mut rhs, &compose_lin(p, &single(x.clone()), &p.differential(y), &eta), &sign);
                        if lhs != rhs {
                            rep.violations.push(Violation {
                                axiom: "dg (Leibniz)".into(),
                                witness: format!("x={x:?} y={y:?} eta={}", show_bij(&eta)),
                            });
                        }
                    }
                }
            }
        }
    }
    rep
}

fn equivariance_case<P: Properad>(
    p: &P,
    sh: &PairShape,
    x: &P::Elem,
    y: &P::Elem,
    eta: &Bijection,
    base: &LinComb<P::Elem>,
) -> AxiomReport {
    let mut rep = AxiomReport::default();
    let lin = union(&sh.d1, &sh.b);
    let rout = union(&sh.c2, &sh.a);
    let ids = [&sh.c1, &lin, &rout, &sh.d2].map(Bijection::identity);
    // Generators of Σ_{C1} × Σ_{D1⊔B} × Σ_{C2⊔A} × Σ_{D2}; both sides of the
    // axiom are multiplicative in the group element, so these suffice.
    let mut gens = vec![ids.clone()];
    for (slot, set) in [&sh.c1, &lin, &rout, &sh.d2].into_iter().enumerate() {
        for t in adjacent_transpositions(set) {
            let mut g = ids.clone();
            g[slot] = t;
            gens.push(g);
        }
    }
    for [r1, s1, r2, s2] in gens {
        rep.cases += 1;
        let px = p.act(&r1, &s1, x);
        // ρ2 η σ1^{-1} : σ1(B) → ρ2(A).
        let s1_inv_b = s1.inverse().restrict(&s1.apply_set(&sh.b));
        let eta2 = r2.compose(eta).and_then(|e| e.compose(&s1_inv_b)).expect("shapes match");
        let py = p.act(&r2, &s2, y);
        let rho = r1.union(&r2.restrict(&sh.c2)).expect("disjoint");
        let sigma = s1.restrict(&sh.d1).union(&s2).expect("disjoint");
        let lhs = act_lin(p, &rho, &sigma, base);
        let rhs = compose_lin(p, &px, &py, &eta2);
        if lhs != rhs {
            rep.violations.push(Violation {
                axiom: "2".into(),
                witness: format!(
                    "x={x:?} y={y:?} eta={} rho1={} sigma1={} rho2={} sigma2={}",
                    show_bij(eta),
                    show_bij(&r1),
                    show_bij(&s1),
                    show_bij(&r2),
                    show_bij(&s2)
                ),
            });
        }
    }
    rep
}

impl Bijection {
    /// Image of a set of labels.
    pub fn apply_set(&self, s: &LabelSet) -> LabelSet {
        s.iter().map(|l| self.apply_or_keep(l)).collect()
    }
}

/// Which of the associativity configurations a case belongs to.
///
/// Three factors `x` (top), `y` (middle), `z` (bottom) with gluing sets
/// `xy`, `yz`, `xz`. The written clauses are the triangle (all three
/// nonempty), `xy` empty and `yz` empty. The chain (`xz` empty) is the
/// unwritten clause and is checked as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AssocClause {
    Triangle,
    EmptyXY,
    EmptyYZ,
    Chain,
}

/// Axiom 3: associativity.
pub fn check_associativity<P: Properad>(p: &P, bounds: AxiomBounds) -> AxiomReport {
    let mut rep = AxiomReport::default();
    if bounds.max_arity == 0 {
        return rep;
    }
    let r = bounds.max_arity;
    // (kxy, kyz, kxz) gluing sizes; free legs: x: cx outputs, dx inputs; etc.
    for kxy in 0..=r {
        for kyz in 0..=r {
            for kxz in 0..=r {
                let clause = match (kxy > 0, kyz > 0, kxz > 0) {
                    (true, true, true) => AssocClause::Triangle,
                    (false, true, true) => AssocClause::EmptyXY,
                    (true, false, true) => AssocClause::EmptyYZ,
                    (true, true, false) => AssocClause::Chain,
                    _ => continue,
                };
                let glued = 2 * (kxy + kyz + kxz);
                if glued > bounds.max_total_legs {
                    continue;
                }
                let free = bounds.max_total_legs - glued;
                for sizes in (0..6).map(|_| 0..=free.min(r)).multi_cartesian_product() {
                    let (cx, dx, cy, dy, cz, dz) = (sizes[0], sizes[1], sizes[2], sizes[3], sizes[4], sizes[5]);
                    if sizes.iter().sum::<usize>() > free {
                        continue;
                    }
                    if dx + kxy + kxz > r || cy + kxy > r || dy + kyz > r || cz + kyz + kxz > r {
                        continue;
                    }
                    if cx + cy + cz > r || dx + dy + dz > r {
                        continue;
                    }
                    rep.merge(assoc_shape(p, bounds, clause, [cx, dx, cy, dy, cz, dz], [kxy, kyz, kxz]));
                }
            }
        }
    }
    rep
}

fn assoc_shape<P: Properad>(
    p: &P,
    bounds: AxiomBounds,
    clause: AssocClause,
    s: [usize; 6],
    k: [usize; 3],
) -> AxiomReport {
    let mut rep = AxiomReport::default();
    let (cx, dx, cy, dy, cz, dz) = (
        labels("cx", s[0]),
        labels("dx", s[1]),
        labels("cy", s[2]),
        labels("dy", s[3]),
        labels("cz", s[4]),
        labels("dz", s[5]),
    );
    let (bxy, axy) = (labels("bxy", k[0]), labels("axy", k[0]));
    let (byz, ayz) = (labels("byz", k[1]), labels("ayz", k[1]));
    let (bxz, axz) = (labels("bxz", k[2]), labels("axz", k[2]));
    let x_in = union(&union(&dx, &bxy), &bxz);
    let y_out = union(&cy, &axy);
    let y_in = union(&dy, &byz);
    let z_out = union(&union(&cz, &ayz), &axz);
    let basis_upto = |c: &LabelSet, d: &LabelSet| -> Vec<P::Elem> {
        (p.min_chi(c.len(), d.len())..=bounds.max_chi).flat_map(|chi| p.basis(c, d, chi)).collect()
    };
    let xs = basis_upto(&cx, &x_in);
    let ys = basis_upto(&y_out, &y_in);
    let zs = basis_upto(&z_out, &dz);
    if xs.is_empty() || ys.is_empty() || zs.is_empty() {
        return rep;
    }
    let exy = all_bijections(&bxy, &axy);
    let eyz = all_bijections(&byz, &ayz);
    let exz = all_bijections(&bxz, &axz);
    for e1 in &exy {
        for e2 in &eyz {
            for e3 in &exz {
                for x in &xs {
                    for y in &ys {
                        for z in &zs {
                            let (lhs, rhs) = match clause {
                                AssocClause::Triangle | AssocClause::Chain => {
                                    let xy = p.compose(x, y, e1);
                                    let l = compose_lin(p, &xy, &single(z.clone()), &e2.union(e3).unwrap());
                                    let yz = p.compose(y, z, e2);
                                    let r = compose_lin(p, &single(x.clone()), &yz, &e1.union(e3).unwrap());
                                    (l, r)
                                }
                                AssocClause::EmptyXY => {
                                    // `y` passes `x`.
                                    let xz = p.compose(x, z, e3);
                                    let mut l = compose_lin(p, &single(y.clone()), &xz, e2);
                                    if is_odd(p.degree(x) * p.degree(y)) {
                                        l = scale(&l, &int(-1));
                                    }
                                    let yz = p.compose(y, z, e2);
                                    let r = compose_lin(p, &single(x.clone()), &yz, e3);
                                    (l, r)
                                }
                                AssocClause::EmptyYZ => {
                                    // `z` passes `y`.
                                    let xy = p.compose(x, y, e1);
                                    let l = compose_lin(p, &xy, &single(z.clone()), e3);
                                    let xz = p.compose(x, z, e3);
                                    let mut r = compose_lin(p, &xz, &single(y.clone()), e1);
                                    if is_odd(p.degree(y) * p.degree(z)) {
                                        r = scale(&r, &int(-1));
                                    }
                                    (l, r)
                                }
                            };
                            rep.cases += 1;
                            if lhs != rhs {
                                rep.violations.push(Violation {
                                    axiom: format!("3 ({clause:?})"),
                                    witness: format!(
                                        "x={x:?} y={y:?} z={z:?} xy={} yz={} xz={}",
                                        show_bij(e1),
                                        show_bij(e2),
                                        show_bij(e3)
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}

/// All three axioms.
pub fn check_all_axioms<P: Properad>(p: &P, bounds: AxiomBounds) -> AxiomReport {
    let mut rep = check_sigma_bimodule(p, bounds);
    rep.merge(check_equivariance(p, bounds));
    rep.merge(check_associativity(p, bounds));
    rep.merge(check_differential(p, bounds));
    rep
}

// ---------------------------------------------------------------------------
// Skeletal bridge
// ---------------------------------------------------------------------------

/// Positional output label for slot `i` (1-based). Sorts positionally.
pub fn out_label(i: usize) -> String {
    format!("o{i:03}")
}

/// Positional input label for slot `i` (1-based).
pub fn in_label(i: usize) -> String {
    format!("i{i:03}")
}

pub fn out_labels(m: usize) -> LabelSet {
    (1..=m).map(out_label).collect()
}

pub fn in_labels(n: usize) -> LabelSet {
    (1..=n).map(in_label).collect()
}

/// Position of a positional label.
pub fn label_pos(l: &str) -> usize {
    l[1..].parse().expect("positional label")
}

/// The auxiliary bijections `κ1, λ1, κ2, λ2` used to conjugate a skeletal
/// composition into a labelled one. Each is given as a permutation of the
/// fresh target labels, so that `κ(i) = targets[perm[i-1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjugation {
    pub kappa1: Vec<usize>,
    pub lambda1: Vec<usize>,
    pub kappa2: Vec<usize>,
    pub lambda2: Vec<usize>,
}

impl Conjugation {
    pub fn identity(m1: usize, n1k: usize, m2k: usize, n2: usize) -> Self {
        Self {
            kappa1: (0..m1).collect(),
            lambda1: (0..n1k).collect(),
            kappa2: (0..m2k).collect(),
            lambda2: (0..n2).collect(),
        }
    }

    pub fn random<R: Rng>(m1: usize, n1k: usize, m2k: usize, n2: usize, rng: &mut R) -> Self {
        let mut c = Self::identity(m1, n1k, m2k, n2);
        c.kappa1.shuffle(rng);
        c.lambda1.shuffle(rng);
        c.kappa2.shuffle(rng);
        c.lambda2.shuffle(rng);
        c
    }
}

/// Skeletal composition `∘̄^ξ_{N,M}` obtained by conjugating the labelled one.
///
/// `x` lives in `P̄(m1, n1+|N|)` and `y` in `P̄(m2+|M|, n2)`, both on positional
/// labels. `xi` maps each element of `N` to an element of `M` (1-based).
pub fn skeletal_compose<P: Properad>(
    p: &P,
    x: &LinComb<P::Elem>,
    y: &LinComb<P::Elem>,
    dims: (usize, usize, usize, usize),
    xi: &BTreeMap<usize, usize>,
    conj: &Conjugation,
) -> Result<LinComb<P::Elem>> {
    let (m1, n1k, m2k, n2) = dims;
    let nset: BTreeSet<usize> = xi.keys().copied().collect();
    let mset: BTreeSet<usize> = xi.values().copied().collect();
    if nset.is_empty() {
        return input("compositions require nonempty gluing sets");
    }
    if nset.len() != mset.len() || nset.iter().any(|&i| i == 0 || i > n1k) || mset.iter().any(|&i| i == 0 || i > m2k) {
        return input("invalid gluing data");
    }
    let k = nset.len();
    let (n1, m2) = (n1k - k, m2k - k);
    // Fresh disjoint targets. Labels are chosen so that every group sorts
    // apart from the positional labels.
    let t_c1: Vec<String> = (1..=m1).map(|i| format!("pc{i:03}")).collect();
    let t_d1b: Vec<String> = (1..=n1k).map(|i| format!("pd{i:03}")).collect();
    let t_c2a: Vec<String> = (1..=m2k).map(|i| format!("qc{i:03}")).collect();
    let t_d2: Vec<String> = (1..=n2).map(|i| format!("qd{i:03}")).collect();
    let mk = |src: &dyn Fn(usize) -> String, tgt: &[String], perm: &[usize]| {
        Bijection::new((0..tgt.len()).map(|i| (src(i + 1), tgt[perm[i]].clone()))).expect("bijection")
    };
    let kappa1 = mk(&out_label, &t_c1, &conj.kappa1);
    let lambda1 = mk(&in_label, &t_d1b, &conj.lambda1);
    let kappa2 = mk(&out_label, &t_c2a, &conj.kappa2);
    let lambda2 = mk(&in_label, &t_d2, &conj.lambda2);
    // η = κ2 ξ λ1^{-1} : B → A.
    let eta = Bijection::new(xi.iter().map(|(&nn, &mm)| {
        (lambda1.apply_or_keep(&in_label(nn)), kappa2.apply_or_keep(&out_label(mm)))
    }))?;
    let xl = act_lin(p, &kappa1, &lambda1, x);
    let yl = act_lin(p, &kappa2, &lambda2, y);
    let z = compose_lin(p, &xl, &yl, &eta);
    // ρ_N: [n1+k] − N → n2 + [n1], ρ_M: [m2+k] − M → m1 + [m2], increasing.
    let rho_n = crate::combinatorics::increasing_unshuffle(&nset, n1, n2)?;
    let rho_m = crate::combinatorics::increasing_unshuffle(&mset, m2, m1)?;
    let mut back_out = Vec::new();
    for i in 1..=m1 {
        back_out.push((kappa1.apply_or_keep(&out_label(i)), out_label(i)));
    }
    for (src, dst) in &rho_m {
        back_out.push((kappa2.apply_or_keep(&out_label(*src)), out_label(*dst)));
    }
    let mut back_in = Vec::new();
    for (src, dst) in &rho_n {
        back_in.push((lambda1.apply_or_keep(&in_label(*src)), in_label(*dst)));
    }
    for i in 1..=n2 {
        back_in.push((lambda2.apply_or_keep(&in_label(i)), in_label(i)));
    }
    let _ = m2;
    Ok(act_lin(p, &Bijection::new(back_out)?, &Bijection::new(back_in)?, &z))
}

/// Skeletal relabelling by positional permutations (0-based vectors).
pub fn skeletal_act<P: Properad>(
    p: &P,
    rho: &[usize],
    sigma: &[usize],
    x: &LinComb<P::Elem>,
) -> LinComb<P::Elem> {
    let r = Bijection::new((0..rho.len()).map(|i| (out_label(i + 1), out_label(rho[i] + 1)))).expect("perm");
    let s = Bijection::new((0..sigma.len()).map(|i| (in_label(i + 1), in_label(sigma[i] + 1)))).expect("perm");
    act_lin(p, &r, &s, x)
}

/// Sign helper: Koszul sign of reordering `items` (by `keys`) into sorted order.
pub(crate) fn sort_sign<K: Ord>(keys: &[K], degrees: &[i64]) -> i32 {
    koszul_sign_unchecked(&crate::linear::sorting_perm(keys), degrees)
}

/// Scalar multiple helper.
pub fn scale<K: Ord + Clone>(x: &LinComb<K>, c: &Rational) -> LinComb<K> {
    let mut out = LinComb::new();
    add_scaled(&mut out, x, c);
    out
}

/// Sum helper.
pub fn sum<K: Ord + Clone>(a: &LinComb<K>, b: &LinComb<K>) -> LinComb<K> {
    let mut out = a.clone();
    for (k, v) in b {
        add_term(&mut out, k.clone(), v.clone());
    }
    out
}

/// A properad wrapper that flips the sign of selected operations. Used as a
/// mutation fixture for the checkers.
pub struct Mutated<'a, P: Properad> {
    pub inner: &'a P,
    /// Flip the sign of `P(ρ, σ)` whenever `ρ` swaps exactly these two labels.
    pub flip_action_swap: Option<(String, String)>,
    /// Flip the sign of any composition gluing exactly this many pairs and
    /// whose left factor has this χ.
    pub flip_compose: Option<(usize, i64)>,
}

impl<P: Properad> Properad for Mutated<'_, P> {
    type Elem = P::Elem;
    fn name(&self) -> String {
        format!("mutated {}", self.inner.name())
    }
    fn outputs(&self, e: &Self::Elem) -> LabelSet {
        self.inner.outputs(e)
    }
    fn inputs(&self, e: &Self::Elem) -> LabelSet {
        self.inner.inputs(e)
    }
    fn chi(&self, e: &Self::Elem) -> i64 {
        self.inner.chi(e)
    }
    fn degree(&self, e: &Self::Elem) -> i64 {
        self.inner.degree(e)
    }
    fn basis(&self, c: &LabelSet, d: &LabelSet, chi: i64) -> Vec<Self::Elem> {
        self.inner.basis(c, d, chi)
    }
    fn act(&self, rho: &Bijection, sigma: &Bijection, e: &Self::Elem) -> LinComb<Self::Elem> {
        let out = self.inner.act(rho, sigma, e);
        if let Some((a, b)) = &self.flip_action_swap {
            let moved: Vec<_> = rho.pairs().filter(|(x, y)| x != y).collect();
            if moved.len() == 2 && rho.get(a) == Some(b) && rho.get(b) == Some(a) {
                return scale(&out, &int(-1));
            }
        }
        out
    }
    fn compose(&self, l: &Self::Elem, r: &Self::Elem, eta: &Bijection) -> LinComb<Self::Elem> {
        let out = self.inner.compose(l, r, eta);
        if let Some((k, chi)) = self.flip_compose {
            if eta.len() == k && self.inner.chi(l) == chi {
                return scale(&out, &int(-1));
            }
        }
        out
    }
    fn differential(&self, e: &Self::Elem) -> LinComb<Self::Elem> {
        self.inner.differential(e)
    }
    fn min_chi(&self, m: usize, n: usize) -> i64 {
        self.inner.min_chi(m, n)
    }
    fn split_chis(&self, chi: i64, glued: usize) -> Vec<(i64, i64)> {
        self.inner.split_chis(chi, glued)
    }
    fn split_shape_ok(&self, target: &Self::Elem, c1: &LabelSet, d2: &LabelSet) -> bool {
        self.inner.split_shape_ok(target, c1, d2)
    }
    fn split_factor_ok(&self, target: &Self::Elem, factor: &Self::Elem, upper: bool) -> bool {
        self.inner.split_factor_ok(target, factor, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{closed_chi, ClosedFrobenius, ClosedGenerator};
    use rand::SeedableRng;

    fn skel(m: usize, n: usize, g: i64) -> LinComb<ClosedGenerator> {
        single(ClosedGenerator::new(out_labels(m), in_labels(n), closed_chi(g, m, n)).unwrap())
    }

    #[test]
    fn empty_gluing_is_rejected() {
        let p = ClosedFrobenius::default();
        let x = ClosedGenerator::new(out_labels(1), in_labels(2), 1).unwrap();
        assert!(compose_checked(&p, &x, &x, &Bijection::default()).is_err());
        let r = skeletal_compose(&p, &skel(1, 2, 0), &skel(2, 1, 0), (1, 2, 2, 1), &BTreeMap::new(), &Conjugation::identity(1, 2, 2, 1));
        assert!(r.is_err());
    }

    #[test]
    fn skeletal_result_is_independent_of_conjugation() {
        let p = ClosedFrobenius::default();
        let (x, y) = (skel(2, 3, 0), skel(3, 2, 1));
        let xi: BTreeMap<usize, usize> = [(1, 3), (3, 1)].into_iter().collect();
        let dims = (2, 3, 3, 2);
        let base = skeletal_compose(&p, &x, &y, dims, &xi, &Conjugation::identity(2, 3, 3, 2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let c = Conjugation::random(2, 3, 3, 2, &mut rng);
            assert_eq!(skeletal_compose(&p, &x, &y, dims, &xi, &c).unwrap(), base);
        }
        let z = base.keys().next().unwrap();
        assert_eq!((z.outputs.clone(), z.inputs.clone()), (out_labels(3), in_labels(3)));
        assert_eq!(z.chi, closed_chi(0, 2, 3) + closed_chi(1, 3, 2));
    }

    #[test]
    fn skeletal_act_identity() {
        let p = ClosedFrobenius::default();
        let x = skel(2, 2, 0);
        assert_eq!(skeletal_act(&p, &[0, 1], &[1, 0], &x), x);
    }

    #[test]
    fn out_of_range_gluing_rejected() {
        let p = ClosedFrobenius::default();
        let xi: BTreeMap<usize, usize> = [(4, 1)].into_iter().collect();
        assert!(skeletal_compose(&p, &skel(1, 3, 0), &skel(2, 1, 0), (1, 3, 2, 1), &xi, &Conjugation::identity(1, 3, 2, 1)).is_err());
    }
}
