//! The closed master equation written on the maps `α_{m,n,χ}`.

use std::collections::BTreeMap;

use crate::combinatorics::{enumerate_shuffles, factorial};
use crate::endomorphism::{end_compose, end_sigma_action, EndProperad, GradedLinearMap};
use crate::frobenius::{ClosedFrobenius, ClosedGenerator};
use crate::linear::{add_term, int, LinComb, Rational};
use crate::properad::{in_labels, out_labels};

use super::{assemble, stable_shape, CoinvKey, Coinv, Component, Flavor, MasterReport, ResidualTerm, Spaces, StructureConstants, Truncation};

/// `α_{m,n,χ}` with coordinates `f^{χ,J}_I`, together with `α_{1,1,0} = −d`.
pub fn closed_maps(spaces: &Spaces, f: &StructureConstants<ClosedGenerator>) -> BTreeMap<Component, GradedLinearMap> {
    let mut out: BTreeMap<Component, GradedLinearMap> = BTreeMap::new();
    for (k, c) in &f.entries {
        let shape = (k.gen.outputs.len(), k.gen.inputs.len(), k.gen.chi);
        let j: Vec<usize> = k.gen.outputs.iter().map(|l| k.deco[l]).collect();
        let i: Vec<usize> = k.gen.inputs.iter().map(|l| k.deco[l]).collect();
        let a = out.entry(shape).or_insert_with(|| GradedLinearMap::zero(shape.0, shape.1, 1));
        add_term(&mut a.coords, (j, i), c.clone());
    }
    let mut d = GradedLinearMap::zero(1, 1, 1);
    for (&(t, s), c) in spaces.colors[0].matrix() {
        add_term(&mut d.coords, (vec![t], vec![s]), -c.clone());
    }
    out.insert((1, 1, 0), d);
    out.retain(|_, a| !a.is_zero());
    out
}

/// `Σ 1/k! · Σ_{ρ,σ} ρ ∘ (α_{m1,n1+k,χ1} ∘_k α_{m2+k,n2,χ2}) ∘ σ^{-1}` for every
/// component within bounds. Shuffles run over types `(m1, m2)` and `(n2, n1)`.
pub fn ibl_residual(spaces: &Spaces, f: &StructureConstants<ClosedGenerator>, t: &Truncation) -> BTreeMap<Component, GradedLinearMap> {
    let p = EndProperad::new(spaces.colors[0].clone());
    let alphas = closed_maps(spaces, f);
    let mut out: BTreeMap<Component, GradedLinearMap> = BTreeMap::new();
    for (&(a1, b1, c1), g) in &alphas {
        for (&(a2, b2, c2), h) in &alphas {
            for k in 1..=b1.min(a2) {
                let (m1, n1, m2, n2) = (a1, b1 - k, a2 - k, b2);
                let comp = (m1 + m2, n1 + n2, c1 + c2);
                if comp.0 > t.m_max || comp.1 > t.n_max || comp.2 > t.chi_max {
                    continue;
                }
                let xi: BTreeMap<usize, usize> = (1..=k).map(|j| (n1 + j, j)).collect();
                let Ok(z) = end_compose(&p, g, h, &xi) else { continue };
                let w = Rational::new(1.into(), factorial(k as u64).into());
                let acc = out.entry(comp).or_insert_with(|| GradedLinearMap::zero(comp.0, comp.1, 2));
                for rho in enumerate_shuffles(m1 as i64, m2 as i64).expect("arities") {
                    for sigma in enumerate_shuffles(n2 as i64, n1 as i64).expect("arities") {
                        let y = end_sigma_action(&p, &rho, &sigma, &z).expect("permutations");
                        for (key, c) in y.coords {
                            add_term(&mut acc.coords, key, c * &w);
                        }
                    }
                }
            }
        }
    }
    out.retain(|_, a| !a.is_zero());
    out
}

/// The closed master equation on structure constants.
pub fn ibl_component_relations(spaces: &Spaces, f: &StructureConstants<ClosedGenerator>, t: &Truncation) -> MasterReport {
    let model = ClosedFrobenius::default();
    let mut residual: Coinv<ClosedGenerator> = LinComb::new();
    let mut d_squared = Vec::new();
    for ((m, n, chi), r) in ibl_residual(spaces, f, t) {
        if chi == 0 {
            for ((j, i), c) in r.coords {
                d_squared.push(ResidualTerm { generator: "d²[color 0]".into(), outputs: j, inputs: i, coeff: c });
            }
            continue;
        }
        if !stable_shape(Flavor::Closed, m, n, chi) {
            continue;
        }
        let gen = ClosedGenerator { outputs: out_labels(m), inputs: in_labels(n), chi };
        let mut raw = LinComb::new();
        let w = int((factorial(m as u64) * factorial(n as u64)) as i64);
        for ((j, i), c) in r.coords {
            let deco = gen.outputs.iter().cloned().zip(j).chain(gen.inputs.iter().cloned().zip(i)).collect();
            add_term(&mut raw, CoinvKey { gen: gen.clone(), deco }, c / &w);
        }
        for (k, c) in super::normalize(&model, spaces, &raw) {
            add_term(&mut residual, k, c);
        }
    }
    assemble(&model, &residual, d_squared, t)
}
