//! JSON documents: graded spaces, structure constants, surfaces and
//! gluings. Coefficients are `"p/q"` strings.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{canonical_cycle, Bijection, Cycle, Label};
use crate::error::{input, Result};
use crate::frobenius::{ClosedGenerator, OpenClosedGenerator, OpenSurface};
use crate::linear::{rational_serde, DGVectorSpace, GradedBasis, Rational, SparseMatrix};
use crate::master::{CoinvKey, Spaces};
use crate::properad::{in_label, out_label};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i64,
}

/// `d(from) = coeff · to + …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialEntry {
    pub from: String,
    pub to: String,
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgvsDoc {
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub differential: Vec<DifferentialEntry>,
}

impl DgvsDoc {
    /// Rejects differentials of the wrong degree or with `d² ≠ 0`.
    pub fn to_space(&self) -> Result<DGVectorSpace> {
        let basis = GradedBasis::new(self.basis.iter().map(|b| (b.name.clone(), b.degree)).collect())?;
        let mut d = SparseMatrix::new();
        for e in &self.differential {
            let (Some(s), Some(t)) = (basis.index_of(&e.from), basis.index_of(&e.to)) else {
                return input(format!("differential entry {} -> {} names an unknown basis element", e.from, e.to));
            };
            if d.insert((t, s), e.coeff.clone()).is_some() {
                return input(format!("differential entry {} -> {} given twice", e.from, e.to));
            }
        }
        DGVectorSpace::new(basis, d)
    }

    pub fn from_space(v: &DGVectorSpace) -> Self {
        let b = v.basis();
        Self {
            basis: (0..b.len()).map(|i| BasisEntry { name: b.name(i).into(), degree: b.degree(i) }).collect(),
            differential: v
                .matrix()
                .iter()
                .map(|(&(t, s), c)| DifferentialEntry { from: b.name(s).into(), to: b.name(t).into(), coeff: c.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureFlavor {
    Closed,
    Open,
    OpenClosed,
}

/// One record `f = coeff`. Closed records use `m`, `n`, `chi`, `J`, `I`;
/// open records use `g`, `J_blocks`, `I_blocks`; open-closed records add
/// `J_closed`, `I_closed`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<String>>,
    #[serde(rename = "I", default, skip_serializing_if = "Option::is_none")]
    pub i: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<u32>,
    #[serde(rename = "J_blocks", default, skip_serializing_if = "Option::is_none")]
    pub j_blocks: Option<Vec<Vec<String>>>,
    #[serde(rename = "I_blocks", default, skip_serializing_if = "Option::is_none")]
    pub i_blocks: Option<Vec<Vec<String>>>,
    #[serde(rename = "J_closed", default, skip_serializing_if = "Option::is_none")]
    pub j_closed: Option<Vec<String>>,
    #[serde(rename = "I_closed", default, skip_serializing_if = "Option::is_none")]
    pub i_closed: Option<Vec<String>>,
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDoc {
    pub flavor: StructureFlavor,
    pub entries: Vec<StructureEntry>,
}

fn indices(basis: &GradedBasis, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| basis.index_of(n).map_or_else(|| input(format!("unknown basis element {n:?}")), Ok))
        .collect()
}

fn need<T: Clone>(x: &Option<T>, field: &str, flavor: &str) -> Result<T> {
    x.clone().map_or_else(|| input(format!("{flavor} entry is missing {field:?}")), Ok)
}

fn forbid(present: bool, field: &str, flavor: &str) -> Result<()> {
    if present {
        return input(format!("{flavor} entry must not carry {field:?}"));
    }
    Ok(())
}

/// Cycles on positional labels, numbered through the blocks in order, with
/// the decoration of each label.
fn blocks(
    spaces: &Spaces,
    blocks: &[Vec<String>],
    label: fn(usize) -> String,
    deco: &mut Vec<(Label, usize)>,
) -> Result<Vec<Cycle>> {
    let basis = spaces.colors[0].basis();
    let mut next = 0;
    let mut out = Vec::new();
    for b in blocks {
        let idx = indices(basis, b)?;
        let labels: Vec<Label> = idx.iter().map(|_| {
            next += 1;
            label(next)
        }).collect();
        deco.extend(labels.iter().cloned().zip(idx));
        out.push(canonical_cycle(&labels)?);
    }
    Ok(out)
}

fn closed_legs(basis: &GradedBasis, names: &[String], prefix: char, deco: &mut Vec<(Label, usize)>) -> Result<Vec<Label>> {
    let idx = indices(basis, names)?;
    let labels: Vec<Label> = (1..=idx.len()).map(|k| format!("{prefix}{k:03}")).collect();
    deco.extend(labels.iter().cloned().zip(idx));
    Ok(labels)
}

impl StructureEntry {
    pub fn closed_key(&self, spaces: &Spaces) -> Result<CoinvKey<ClosedGenerator>> {
        let f = "closed";
        forbid(self.g.is_some() || self.j_blocks.is_some() || self.i_blocks.is_some(), "g/J_blocks/I_blocks", f)?;
        forbid(self.j_closed.is_some() || self.i_closed.is_some(), "J_closed/I_closed", f)?;
        let (j, i) = (need(&self.j, "J", f)?, need(&self.i, "I", f)?);
        let (m, n, chi) = (need(&self.m, "m", f)?, need(&self.n, "n", f)?, need(&self.chi, "chi", f)?);
        if j.len() != m || i.len() != n {
            return input(format!("closed entry has m = {m}, n = {n} but |J| = {}, |I| = {}", j.len(), i.len()));
        }
        let basis = spaces.colors[0].basis();
        let key = CoinvKey::closed(&indices(basis, &j)?, &indices(basis, &i)?, chi);
        ClosedGenerator::new(key.gen.outputs.clone(), key.gen.inputs.clone(), chi)?;
        Ok(key)
    }

    fn open_parts(&self, f: &str, spaces: &Spaces, deco: &mut Vec<(Label, usize)>) -> Result<(u32, Vec<Cycle>, Vec<Cycle>)> {
        forbid(self.m.is_some() || self.n.is_some() || self.chi.is_some(), "m/n/chi", f)?;
        forbid(self.j.is_some() || self.i.is_some(), "J/I", f)?;
        let g = need(&self.g, "g", f)?;
        let outs = blocks(spaces, &need(&self.j_blocks, "J_blocks", f)?, out_label, deco)?;
        let ins = blocks(spaces, &need(&self.i_blocks, "I_blocks", f)?, in_label, deco)?;
        Ok((g, outs, ins))
    }

    pub fn open_key(&self, spaces: &Spaces) -> Result<CoinvKey<OpenSurface>> {
        forbid(self.j_closed.is_some() || self.i_closed.is_some(), "J_closed/I_closed", "open")?;
        let mut deco = Vec::new();
        let (g, outs, ins) = self.open_parts("open", spaces, &mut deco)?;
        let gen = OpenSurface::new(g, outs, ins)?;
        Ok(CoinvKey { gen, deco: deco.into_iter().collect() })
    }

    pub fn open_closed_key(&self, spaces: &Spaces) -> Result<CoinvKey<OpenClosedGenerator>> {
        let f = "open-closed";
        let mut deco = Vec::new();
        let (g, outs, ins) = self.open_parts(f, spaces, &mut deco)?;
        let Some(closed) = spaces.colors.get(1) else {
            return input("open-closed structure needs a closed color");
        };
        let co = closed_legs(closed.basis(), &self.j_closed.clone().unwrap_or_default(), 'p', &mut deco)?;
        let ci = closed_legs(closed.basis(), &self.i_closed.clone().unwrap_or_default(), 'q', &mut deco)?;
        let gen = OpenClosedGenerator::new(g, outs, ins, co.into_iter().collect(), ci.into_iter().collect())?;
        Ok(CoinvKey { gen, deco: deco.into_iter().collect() })
    }
}

/// `{"genus", "out_cycles", "in_cycles"}`; empty blocks are empty cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDoc {
    pub genus: u32,
    pub out_cycles: Vec<Vec<String>>,
    pub in_cycles: Vec<Vec<String>>,
}

fn cycles(c: &[Vec<String>]) -> Result<Vec<Cycle>> {
    c.iter().map(|w| canonical_cycle(w)).collect()
}

impl SurfaceDoc {
    pub fn to_surface(&self) -> Result<OpenSurface> {
        OpenSurface::new(self.genus, cycles(&self.out_cycles)?, cycles(&self.in_cycles)?)
    }

    pub fn from_surface(s: &OpenSurface) -> Self {
        let words = |cs: &[Cycle]| cs.iter().map(|c| c.word().to_vec()).collect::<Vec<_>>();
        let mut in_cycles = words(&s.in_cycles);
        in_cycles.extend((0..s.empty).map(|_| Vec::new()));
        Self { genus: s.genus, out_cycles: words(&s.out_cycles), in_cycles }
    }
}

/// Pairs `[input of the left surface, output of the right surface]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingDoc {
    pub pairs: Vec<(String, String)>,
}

impl GluingDoc {
    pub fn to_bijection(&self) -> Result<Bijection> {
        Bijection::new(self.pairs.iter().cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{frac, int};

    fn space() -> Spaces {
        let doc: DgvsDoc = serde_json::from_str(
            r#"{"basis":[{"name":"x","degree":0},{"name":"y","degree":1}],
                "differential":[{"from":"x","to":"y","coeff":"2/1"}]}"#,
        )
        .unwrap();
        Spaces::single(doc.to_space().unwrap())
    }

    #[test]
    fn dgvs_round_trip() {
        let sp = space();
        assert_eq!(sp.colors[0].matrix()[&(1, 0)], int(2));
        let doc = DgvsDoc::from_space(&sp.colors[0]);
        assert_eq!(doc.to_space().unwrap(), sp.colors[0]);
    }

    #[test]
    fn dgvs_rejects_bad_input() {
        let unknown = r#"{"basis":[{"name":"x","degree":0}],"extra":1}"#;
        assert!(serde_json::from_str::<DgvsDoc>(unknown).is_err());
        let wrong_degree = r#"{"basis":[{"name":"x","degree":0},{"name":"y","degree":2}],
            "differential":[{"from":"x","to":"y","coeff":"1"}]}"#;
        assert!(serde_json::from_str::<DgvsDoc>(wrong_degree).unwrap().to_space().is_err());
        let d2 = r#"{"basis":[{"name":"x","degree":0},{"name":"y","degree":1},{"name":"z","degree":2}],
            "differential":[{"from":"x","to":"y","coeff":"1"},{"from":"y","to":"z","coeff":"1"}]}"#;
        assert!(serde_json::from_str::<DgvsDoc>(d2).unwrap().to_space().is_err());
        let float = r#"{"basis":[{"name":"x","degree":0},{"name":"y","degree":1}],
            "differential":[{"from":"x","to":"y","coeff":"0.5"}]}"#;
        assert!(serde_json::from_str::<DgvsDoc>(float).is_err());
    }

    #[test]
    fn closed_entry() {
        let sp = space();
        let e: StructureEntry =
            serde_json::from_str(r#"{"m":1,"n":2,"chi":3,"J":["y"],"I":["x","y"],"coeff":"1/2"}"#).unwrap();
        assert_eq!(e.coeff, frac(1, 2));
        assert_eq!(e.closed_key(&sp).unwrap(), CoinvKey::closed(&[1], &[0, 1], 3));
        let bad: StructureEntry = serde_json::from_str(r#"{"m":2,"n":2,"chi":3,"J":["y"],"I":["x","y"],"coeff":"1"}"#).unwrap();
        assert!(bad.closed_key(&sp).is_err());
        assert!(e.open_key(&sp).is_err());
    }

    #[test]
    fn open_entry_numbers_blocks() {
        let sp = space();
        let e: StructureEntry =
            serde_json::from_str(r#"{"g":0,"J_blocks":[["x","y"],["y"]],"I_blocks":[["x"]],"coeff":"1"}"#).unwrap();
        let k = e.open_key(&sp).unwrap();
        assert_eq!(k.gen.out_cycles.len(), 2);
        assert_eq!(k.deco.len(), 4);
        assert_eq!(k.deco["o003"], 1);
        assert_eq!(k.deco["i001"], 0);
    }

    #[test]
    fn surface_round_trip() {
        let doc: SurfaceDoc = serde_json::from_str(r#"{"genus":1,"out_cycles":[["b","a"]],"in_cycles":[[]]}"#).unwrap();
        let s = doc.to_surface().unwrap();
        assert_eq!(s.empty, 1);
        assert_eq!(SurfaceDoc::from_surface(&s).to_surface().unwrap(), s);
        let g: GluingDoc = serde_json::from_str(r#"{"pairs":[["y1","x1"]]}"#).unwrap();
        assert_eq!(g.to_bijection().unwrap().len(), 1);
    }
}
