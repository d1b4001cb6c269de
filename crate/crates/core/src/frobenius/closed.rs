//! The closed Frobenius properad: one degree-zero generator `p_{C,D,χ}` per
//! stable corolla, trivial action, χ additive under composition.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{Bijection, LabelSet};
use crate::error::{input, Result};
use crate::linear::LinComb;
use crate::properad::{single, Properad};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClosedGenerator {
    pub outputs: LabelSet,
    pub inputs: LabelSet,
    pub chi: i64,
}

impl ClosedGenerator {
    pub fn new(outputs: LabelSet, inputs: LabelSet, chi: i64) -> Result<Self> {
        let g = Self { outputs, inputs, chi };
        if g.doubled_genus() < 0 || g.doubled_genus() % 2 != 0 {
            return input(format!("χ={} is incompatible with |C|={}, |D|={}", g.chi, g.outputs.len(), g.inputs.len()));
        }
        Ok(g)
    }

    fn doubled_genus(&self) -> i64 {
        self.chi - self.outputs.len() as i64 - self.inputs.len() as i64 + 2
    }

    /// `g = (χ − |C| − |D| + 2) / 2`.
    pub fn genus(&self) -> i64 {
        self.doubled_genus() / 2
    }

    pub fn is_stable(&self) -> bool {
        stability_check(self.chi)
    }
}

/// `χ > 0`.
pub fn stability_check(chi: i64) -> bool {
    chi > 0
}

/// `χ = 2g + |C| + |D| − 2`.
pub fn closed_chi(genus: i64, m: usize, n: usize) -> i64 {
    2 * genus + m as i64 + n as i64 - 2
}

/// Glue the inputs `B` of `left` to the outputs `A` of `right` along `η`.
pub fn closed_compose(left: &ClosedGenerator, right: &ClosedGenerator, eta: &Bijection) -> Result<ClosedGenerator> {
    if eta.is_empty() {
        return input("compositions require nonempty gluing sets");
    }
    if !eta.domain().is_subset(&left.inputs) || !eta.codomain().is_subset(&right.outputs) {
        return input("gluing labels are not legs of the factors");
    }
    let c2: LabelSet = right.outputs.difference(&eta.codomain()).cloned().collect();
    let d1: LabelSet = left.inputs.difference(&eta.domain()).cloned().collect();
    if !left.outputs.is_disjoint(&c2) || !d1.is_disjoint(&right.inputs) {
        return input("overlapping label sets in composition");
    }
    Ok(ClosedGenerator {
        outputs: left.outputs.union(&c2).cloned().collect(),
        inputs: d1.union(&right.inputs).cloned().collect(),
        chi: left.chi + right.chi,
    })
}

/// The closed Frobenius properad. With `generalized` unset, components with
/// no inputs or no outputs vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedFrobenius {
    pub generalized: bool,
}

impl Default for ClosedFrobenius {
    fn default() -> Self {
        Self { generalized: true }
    }
}

impl Properad for ClosedFrobenius {
    type Elem = ClosedGenerator;

    fn name(&self) -> String {
        "closed-frobenius".into()
    }
    fn outputs(&self, e: &ClosedGenerator) -> LabelSet {
        e.outputs.clone()
    }
    fn inputs(&self, e: &ClosedGenerator) -> LabelSet {
        e.inputs.clone()
    }
    fn chi(&self, e: &ClosedGenerator) -> i64 {
        e.chi
    }
    fn basis(&self, c: &LabelSet, d: &LabelSet, chi: i64) -> Vec<ClosedGenerator> {
        if !self.generalized && (c.is_empty() || d.is_empty()) {
            return Vec::new();
        }
        match ClosedGenerator::new(c.clone(), d.clone(), chi) {
            Ok(g) if g.is_stable() => vec![g],
            _ => Vec::new(),
        }
    }
    fn act(&self, rho: &Bijection, sigma: &Bijection, e: &ClosedGenerator) -> LinComb<ClosedGenerator> {
        single(ClosedGenerator {
            outputs: rho.apply_set(&e.outputs),
            inputs: sigma.apply_set(&e.inputs),
            chi: e.chi,
        })
    }
    fn compose(&self, l: &ClosedGenerator, r: &ClosedGenerator, eta: &Bijection) -> LinComb<ClosedGenerator> {
        closed_compose(l, r, eta).map(single).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::label_set;
    use crate::properad::{check_all_axioms, check_sigma_bimodule, AxiomBounds, Mutated};

    fn gen(c: &[&str], d: &[&str], g: i64) -> ClosedGenerator {
        let (c, d) = (label_set(c.iter().copied()), label_set(d.iter().copied()));
        let chi = closed_chi(g, c.len(), d.len());
        ClosedGenerator::new(c, d, chi).unwrap()
    }

    #[test]
    fn pants_gluing() {
        let l = gen(&["c"], &["d1", "b"], 0);
        let r = gen(&["a", "c2"], &["d2"], 0);
        let eta = Bijection::new(vec![("b".into(), "a".into())]).unwrap();
        let z = closed_compose(&l, &r, &eta).unwrap();
        assert_eq!((z.outputs.len(), z.inputs.len(), z.chi, z.genus()), (2, 2, 2, 0));
    }

    #[test]
    fn two_pair_gluing_raises_genus() {
        let l = gen(&["c"], &["b1", "b2"], 0);
        let r = gen(&["a1", "a2"], &["d"], 0);
        let eta = Bijection::new(vec![("b1".into(), "a1".into()), ("b2".into(), "a2".into())]).unwrap();
        let z = closed_compose(&l, &r, &eta).unwrap();
        assert_eq!(z.genus(), 1);
        assert_eq!(z.chi, l.chi + r.chi);
    }

    #[test]
    fn rejects_overlaps_and_empty() {
        let l = gen(&["c"], &["b", "x"], 0);
        let r = gen(&["a", "c"], &["x"], 0);
        let eta = Bijection::new(vec![("b".into(), "a".into())]).unwrap();
        assert!(closed_compose(&l, &r, &eta).is_err());
        assert!(closed_compose(&l, &r, &Bijection::default()).is_err());
    }

    #[test]
    fn stability_examples() {
        assert!(!stability_check(closed_chi(0, 1, 1)));
        assert!(stability_check(closed_chi(1, 1, 1)));
        assert_eq!(closed_chi(1, 1, 1), 2);
    }

    #[test]
    fn axioms_small() {
        let rep = check_all_axioms(&ClosedFrobenius::default(), AxiomBounds::new(2, 3, 5));
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert!(rep.cases > 0);
        let vac = check_all_axioms(&ClosedFrobenius::default(), AxiomBounds::new(0, 3, 5));
        assert!(vac.passed());
    }

    #[test]
    fn mutated_action_is_caught() {
        let base = ClosedFrobenius::default();
        let m = Mutated { inner: &base, flip_action_swap: Some(("c1".into(), "c2".into())), flip_compose: None };
        let rep = check_sigma_bimodule(&m, AxiomBounds::new(3, 3, 6));
        assert!(!rep.passed());
        assert!(rep.violations[0].witness.contains("rho="));
    }

    #[test]
    fn restricted_drops_boundary_free_sides() {
        let p = ClosedFrobenius { generalized: false };
        assert!(p.basis(&label_set(["c"]), &LabelSet::new(), 1).is_empty());
        assert_eq!(ClosedFrobenius::default().basis(&label_set(["c"]), &LabelSet::new(), 1).len(), 1);
    }
}
