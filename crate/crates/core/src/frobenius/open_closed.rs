//! Two-colored surfaces: open boundary segments plus closed interior
//! punctures.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{Bijection, Cycle, LabelSet};
use crate::error::{input, Result};

use super::open::{genus_from_ledger, glue_boundaries, OpenSurface};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpenClosedGenerator {
    pub genus: u32,
    pub out_cycles: Vec<Cycle>,
    pub in_cycles: Vec<Cycle>,
    #[serde(default)]
    pub empty: u32,
    pub closed_out: LabelSet,
    pub closed_in: LabelSet,
}

impl OpenClosedGenerator {
    pub fn new(
        genus: u32,
        out_cycles: Vec<Cycle>,
        in_cycles: Vec<Cycle>,
        closed_out: LabelSet,
        closed_in: LabelSet,
    ) -> Result<Self> {
        let open = OpenSurface::new(genus, out_cycles, in_cycles)?;
        let mut all: LabelSet = open.outputs().union(&open.inputs()).cloned().collect();
        for l in closed_out.iter().chain(&closed_in) {
            if !all.insert(l.clone()) {
                return input(format!("label {l} is used twice"));
            }
        }
        Ok(Self { genus, out_cycles: open.out_cycles, in_cycles: open.in_cycles, empty: open.empty, closed_out, closed_in })
    }

    /// The open boundary data as a surface of the same genus.
    pub fn open_part(&self) -> OpenSurface {
        OpenSurface {
            genus: self.genus,
            out_cycles: self.out_cycles.clone(),
            in_cycles: self.in_cycles.clone(),
            empty: self.empty,
        }
    }

    pub fn boundaries(&self) -> usize {
        self.out_cycles.len() + self.in_cycles.len() + self.empty as usize
    }

    /// `2G = 2(2g + b − 1) + |C1| + |C2|`.
    pub fn twice_big_g(&self) -> i64 {
        2 * (2 * self.genus as i64 + self.boundaries() as i64 - 1) + (self.closed_out.len() + self.closed_in.len()) as i64
    }

    /// `χ = 2G + |O1| + |O2| + |C1| + |C2| − 2`.
    pub fn chi(&self) -> i64 {
        let p = self.open_part();
        let legs = p.outputs().len() + p.inputs().len() + self.closed_out.len() + self.closed_in.len();
        self.twice_big_g() + legs as i64 - 2
    }

    /// `2 − 2g − b`; punctures are marked points and do not contribute.
    pub fn chi_top(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries() as i64
    }

    pub fn is_stable(&self) -> bool {
        super::stability_check(self.chi())
    }
}

/// Glue along open segment pairs `eta_o` and closed puncture pairs `eta_c`.
pub fn oc_compose(
    left: &OpenClosedGenerator,
    right: &OpenClosedGenerator,
    eta_o: &Bijection,
    eta_c: &Bijection,
) -> Result<OpenClosedGenerator> {
    if eta_o.is_empty() && eta_c.is_empty() {
        return input("compositions require nonempty gluing sets");
    }
    let closed_labels = |g: &OpenClosedGenerator| -> LabelSet { g.closed_out.union(&g.closed_in).cloned().collect() };
    let (lc, rc) = (closed_labels(left), closed_labels(right));
    if eta_o.pairs().any(|(b, a)| lc.contains(b) || rc.contains(a)) {
        return input("open gluing pair uses a closed puncture");
    }
    let (lp, rp) = (left.open_part(), right.open_part());
    if eta_c
        .pairs()
        .any(|(b, a)| lp.inputs().contains(b) || lp.outputs().contains(b) || rp.outputs().contains(a) || rp.inputs().contains(a))
    {
        return input("closed gluing pair uses an open segment");
    }
    if !eta_c.domain().is_subset(&left.closed_in) || !eta_c.codomain().is_subset(&right.closed_out) {
        return input("closed gluing labels are not punctures of the factors");
    }
    let (outs, ins, splits) = if eta_o.is_empty() {
        let mut o = lp.out_cycles.clone();
        o.extend(rp.out_cycles.iter().cloned());
        let mut i = lp.in_cycles.clone();
        i.extend(rp.in_cycles.iter().cloned());
        (o, i, 0)
    } else {
        glue_boundaries(&lp, &rp, eta_o)?
    };
    let c2: LabelSet = right.closed_out.difference(&eta_c.codomain()).cloned().collect();
    let d1: LabelSet = left.closed_in.difference(&eta_c.domain()).cloned().collect();
    if !left.closed_out.is_disjoint(&c2) || !d1.is_disjoint(&right.closed_in) {
        return input("overlapping puncture labels in composition");
    }
    let closed_out: LabelSet = left.closed_out.union(&c2).cloned().collect();
    let closed_in: LabelSet = d1.union(&right.closed_in).cloned().collect();
    let chi_top = left.chi_top() + right.chi_top() - eta_o.len() as i64 - splits - 2 * eta_c.len() as i64;
    let empty = left.empty + right.empty;
    let b = (outs.len() + ins.len()) as i64 + empty as i64;
    let genus = genus_from_ledger(chi_top, b)?;
    let mut g = OpenClosedGenerator::new(genus, outs, ins, closed_out, closed_in)?;
    g.empty += empty;
    if !g.is_stable() {
        return input("composition is unstable");
    }
    Ok(g)
}
