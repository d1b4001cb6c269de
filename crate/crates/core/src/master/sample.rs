//! Random closed instances that solve the master equation, and the
//! Lie-admissibility test.

use rand::Rng;
use serde::Serialize;

use crate::frobenius::{ClosedFrobenius, ClosedGenerator};
use crate::linear::{add_scaled, add_term, frac, int, is_odd, DGVectorSpace, GradedBasis, LinComb, SparseMatrix};
use crate::properad::{in_labels, out_labels};

use super::{key_degree, normalize, stable_shape, tilde_compose, CoinvKey, Coinv, CoinvariantModel, Flavor, GeneratingOperator, Spaces};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceParams {
    /// 1 or 2.
    pub dim: usize,
    pub chi_max: i64,
    /// Number of terms of the conjugating element.
    pub h_terms: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self { dim: 2, chi_max: 4, h_terms: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct ClosedInstance {
    pub spaces: Spaces,
    pub l: GeneratingOperator<ClosedGenerator>,
}

fn cd_key(outs: &[usize], ins: &[usize], chi: i64) -> CoinvKey<ClosedGenerator> {
    CoinvKey::closed(outs, ins, chi)
}

fn basis2(d0: i64, d1: i64) -> GradedBasis {
    GradedBasis::new(vec![("e0".into(), d0), ("e1".into(), d1)]).expect("basis")
}

/// A space together with a degree-1 operator `Q0 = −D + s` with `Q0² = 0`,
/// where `s` collects the terms with `χ > 0`.
///
/// Spaces with degrees `(0, 1)` or `(−1, 0)` are avoided: there every
/// degree-1 term carries a single odd factor on the same side and all
/// compositions vanish.
fn random_seed<R: Rng>(rng: &mut R, dim: usize) -> (DGVectorSpace, Coinv<ClosedGenerator>) {
    let pick = |r: &mut R| int([-2, -1, 1, 2][r.gen_range(0..4)]);
    let mut s = LinComb::new();
    if dim == 1 {
        let v = DGVectorSpace::with_zero_differential(GradedBasis::new(vec![("e0".into(), 1)]).expect("basis"));
        add_term(&mut s, cd_key(&[0], &[], 1), pick(rng));
        return (v, s);
    }
    match rng.gen_range(0..3) {
        // d e0 = c·e1 with e0 odd of degree 1.
        0 => {
            let mut d = SparseMatrix::new();
            d.insert((1, 0), pick(rng));
            (DGVectorSpace::new(basis2(1, 2), d).expect("d² = 0"), s)
        }
        // Two odd generators: e0 and ∂_{e1} anticommute.
        1 => {
            add_term(&mut s, cd_key(&[0], &[], 1), pick(rng));
            add_term(&mut s, cd_key(&[], &[1], 1), pick(rng));
            (DGVectorSpace::with_zero_differential(basis2(1, -1)), s)
        }
        // e1 ∂_{e0} with e0 odd squares to zero.
        _ => {
            add_term(&mut s, cd_key(&[1], &[0], 2), pick(rng));
            (DGVectorSpace::with_zero_differential(basis2(1, 2)), s)
        }
    }
}

/// A random key of the given degree, or `None` if the draw misses it.
pub fn random_closed_key<R: Rng>(rng: &mut R, spaces: &Spaces, chis: std::ops::RangeInclusive<i64>, max_inputs: usize, degree: i64) -> Option<CoinvKey<ClosedGenerator>> {
    let chi = rng.gen_range(chis);
    let (m, n) = (rng.gen_range(0..=3), rng.gen_range(0..=max_inputs));
    if !stable_shape(Flavor::Closed, m, n, chi) {
        return None;
    }
    let gen = ClosedGenerator { outputs: out_labels(m), inputs: in_labels(n), chi };
    let dim = spaces.dim(0);
    let deco = gen.outputs.iter().chain(&gen.inputs).map(|l| (l.clone(), rng.gen_range(0..dim))).collect();
    let key = CoinvKey { gen, deco };
    (key_degree(&ClosedFrobenius::default(), spaces, &key) == degree).then_some(key)
}

fn random_terms<R: Rng>(rng: &mut R, spaces: &Spaces, count: usize, chis: std::ops::RangeInclusive<i64>, max_inputs: usize, degree: i64) -> Coinv<ClosedGenerator> {
    let model = ClosedFrobenius::default();
    let mut raw = LinComb::new();
    let mut tries = 0;
    while raw.len() < count && tries < 400 {
        tries += 1;
        if let Some(k) = random_closed_key(rng, spaces, chis.clone(), max_inputs, degree) {
            let c = frac(rng.gen_range(-3..=3), rng.gen_range(1..=2));
            add_term(&mut raw, k, c);
        }
    }
    normalize(&model, spaces, &raw)
}

fn truncate(x: Coinv<ClosedGenerator>, chi_max: i64) -> Coinv<ClosedGenerator> {
    x.into_iter().filter(|(k, _)| k.gen.chi <= chi_max).collect()
}

/// `Q' = e^{-h} Q0 e^{h}` for a random degree-0 `h` and a seed `Q0` with
/// `Q0² = 0`. Then `L = Q' + D` solves the
/// master equation up to `χ_max`.
pub fn random_closed_instance<R: Rng>(rng: &mut R, params: InstanceParams) -> ClosedInstance {
    let model = ClosedFrobenius::default();
    let (v, seed) = random_seed(rng, params.dim);
    let spaces = Spaces::single(v);
    let cyl = ClosedGenerator { outputs: out_labels(1), inputs: in_labels(1), chi: 0 };
    let mut q: Coinv<ClosedGenerator> = seed;
    for (&(t, s), c) in spaces.colors[0].matrix() {
        let deco = [(cyl.outputs.first().unwrap().clone(), t), (cyl.inputs.first().unwrap().clone(), s)].into_iter().collect();
        add_term(&mut q, CoinvKey { gen: cyl.clone(), deco }, -c.clone());
    }
    let h = random_terms(rng, &spaces, params.h_terms, 1..=2, 3, 0);
    let mut total = q.clone();
    let mut term = q;
    for k in 1..=params.chi_max {
        let mut next = tilde_compose(&model, &spaces, &h, &term);
        add_scaled(&mut next, &tilde_compose(&model, &spaces, &term, &h), &int(-1));
        term = truncate(next, params.chi_max);
        let w = frac(if k % 2 == 0 { 1 } else { -1 }, crate::combinatorics::factorial(k as u64) as i64);
        add_scaled(&mut total, &term, &w);
    }
    let terms: Coinv<ClosedGenerator> = total.into_iter().filter(|(k, _)| k.gen.chi > 0).collect();
    let l = GeneratingOperator::new(&model, spaces.clone(), &terms).expect("conjugation preserves degree 1");
    ClosedInstance { spaces, l }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LieReport {
    pub triples: usize,
    pub jacobi_failures: usize,
    /// Triples whose associator `(x∘̃y)∘̃z − x∘̃(y∘̃z)` is nonzero.
    pub nonzero_associators: usize,
}

impl LieReport {
    pub fn passed(&self) -> bool {
        self.jacobi_failures == 0
    }
}

fn degree_of<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, x: &Coinv<M::Gen>) -> i64 {
    x.keys().next().map(|k| key_degree(m, spaces, k)).unwrap_or(0)
}

fn bracket<M: CoinvariantModel + ?Sized>(m: &M, spaces: &Spaces, x: &Coinv<M::Gen>, y: &Coinv<M::Gen>) -> Coinv<M::Gen> {
    let mut out = tilde_compose(m, spaces, x, y);
    let s = if is_odd(degree_of(m, spaces, x) * degree_of(m, spaces, y)) { int(1) } else { int(-1) };
    add_scaled(&mut out, &tilde_compose(m, spaces, y, x), &s);
    out
}

pub type Triple<G> = (Coinv<G>, Coinv<G>, Coinv<G>);

/// Graded Jacobi identity for `[x, y] = x∘̃y − (−1)^{|x||y|} y∘̃x` on
/// homogeneous triples.
pub fn lie_admissibility_test<M: CoinvariantModel + ?Sized>(
    m: &M,
    spaces: &Spaces,
    triples: &[Triple<M::Gen>],
) -> LieReport {
    let mut rep = LieReport { triples: triples.len(), ..Default::default() };
    for (x, y, z) in triples {
        let (dx, dy, dz) = (degree_of(m, spaces, x), degree_of(m, spaces, y), degree_of(m, spaces, z));
        let sgn = |d: i64| if is_odd(d) { int(-1) } else { int(1) };
        let mut j = LinComb::new();
        add_scaled(&mut j, &bracket(m, spaces, x, &bracket(m, spaces, y, z)), &sgn(dx * dz));
        add_scaled(&mut j, &bracket(m, spaces, y, &bracket(m, spaces, z, x)), &sgn(dy * dx));
        add_scaled(&mut j, &bracket(m, spaces, z, &bracket(m, spaces, x, y)), &sgn(dz * dy));
        if !j.is_empty() {
            rep.jacobi_failures += 1;
        }
        let mut a = tilde_compose(m, spaces, &tilde_compose(m, spaces, x, y), z);
        add_scaled(&mut a, &tilde_compose(m, spaces, x, &tilde_compose(m, spaces, y, z)), &int(-1));
        if !a.is_empty() {
            rep.nonzero_associators += 1;
        }
    }
    rep
}

/// Homogeneous random closed terms for sampling.
pub fn random_sample<R: Rng>(rng: &mut R, spaces: &Spaces, count: usize, degree: i64) -> Coinv<ClosedGenerator> {
    random_terms(rng, spaces, count, 1..=2, 2, degree)
}
