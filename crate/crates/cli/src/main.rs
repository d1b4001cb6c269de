//! `properad`: command-line front end for the properad engine.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical violation
//! is found, 2 on input or usage errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use properad::cobar::{verify_d_squared, CobarConfig};
use properad::endomorphism::EndProperad;
use properad::frobenius::{open_glue, ClosedFrobenius, ClosedGenerator, GenusRule, OpenFrobenius, OpenSurface};
use properad::io::{DgvsDoc, GluingDoc, StructureDoc, StructureEntry, StructureFlavor, SurfaceDoc};
use properad::master::{
    iba_check, ibl_component_relations, master_check, oc_check, operator_square_check, random_closed_instance, y_inverse,
    y_iso, GeneratingOperator, InstanceParams, MasterReport, OpenClosedModel, Spaces, StructureConstants, Truncation,
};
use properad::properad::{check_all_axioms, AxiomBounds, AxiomReport, Mutated, Properad};

#[derive(Parser)]
#[command(name = "properad", version, about = "Exact checks for properads, cobar complexes and master equations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Glue two open surfaces and print the result.
    GlueOpen {
        /// JSON array `[left, right]` of surface documents.
        surfaces: PathBuf,
        /// Pairs `[input of left, output of right]`.
        gluing: PathBuf,
        #[arg(long, value_enum, default_value_t = Rule::Ledger)]
        genus_rule: Rule,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a DOT drawing of the boundary cycles here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check that the cobar differential squares to zero on generators.
    CobarD2 {
        properad: Named,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value_t = 5)]
        vertex_cap: usize,
        /// Keep only graphs with at most this many edges.
        #[arg(long)]
        max_edges: Option<usize>,
    },
    /// Check the master equation for a structure document.
    Check {
        #[arg(value_enum)]
        flavor: Flavor,
        dgvs: PathBuf,
        structure: PathBuf,
        /// Space for the closed color of the open-closed flavor; defaults to `dgvs`.
        #[arg(long)]
        closed_dgvs: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        chi_max: i64,
        #[arg(long, default_value_t = 4)]
        m_max: usize,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Treat the structure as complete: no terms beyond the bounds.
        #[arg(long)]
        complete: bool,
        /// Recompute closed verdicts with independent formulations.
        #[arg(long, value_enum)]
        cross_check: Option<Cross>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the properad axioms exhaustively within bounds.
    Axioms {
        properad: Named,
        #[command(flatten)]
        bounds: Bounds,
        /// Space for the endomorphism properad.
        #[arg(long)]
        dgvs: Option<PathBuf>,
    },
    /// Emit a random closed solution of the master equation, seeded by
    /// `PROPERAD_SEED`.
    Sample {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        chi_max: i64,
        #[arg(long)]
        out_dgvs: PathBuf,
        #[arg(long)]
        out_structure: PathBuf,
    },
}

#[derive(Args)]
struct Bounds {
    #[arg(long, default_value_t = 4)]
    chi_max: i64,
    /// Largest output arity.
    #[arg(long, default_value_t = 2)]
    m_max: usize,
    /// Largest input arity.
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    /// Largest total number of legs (segments) in one case.
    #[arg(long, default_value_t = 6)]
    segments_max: usize,
    #[arg(long, overrides_with = "restricted")]
    generalized: bool,
    /// Require at least one output and one input.
    #[arg(long)]
    restricted: bool,
    #[arg(long, value_enum, default_value_t = Rule::Ledger)]
    genus_rule: Rule,
}

impl Bounds {
    fn axiom_bounds(&self) -> AxiomBounds {
        AxiomBounds::new(self.m_max.max(self.n_max), self.chi_max, self.segments_max)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Ledger,
    PaperVerbal,
}

impl From<Rule> for GenusRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Ledger => GenusRule::Ledger,
            Rule::PaperVerbal => GenusRule::PaperVerbal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Named {
    ClosedFrobenius,
    OpenFrobenius,
    /// Endomorphism properad of `--dgvs`.
    End,
    /// Closed Frobenius with one composition sign flipped.
    MutatedClosedFrobenius,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Flavor {
    Closed,
    Open,
    OpenClosed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Cross {
    Components,
    Operator,
    Both,
}

/// A command that ran to completion; `ok` is false on a violation.
struct Outcome {
    ok: bool,
    output: String,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_space(path: &Path) -> Result<properad::linear::DGVectorSpace> {
    read_json::<DgvsDoc>(path)?.to_space().with_context(|| format!("loading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            say(text);
            Ok(())
        }
    }
}

/// Print to stdout; a closed pipe is not an error.
fn say(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn surface_dot(s: &OpenSurface) -> String {
    let mut d = String::from("digraph surface {\n");
    let _ = writeln!(d, "  label=\"genus {}, chi {}\";", s.genus, s.chi());
    let all = s.out_cycles.iter().map(|c| ("out", c)).chain(s.in_cycles.iter().map(|c| ("in", c)));
    for (k, (kind, c)) in all.enumerate() {
        let _ = writeln!(d, "  subgraph cluster_{k} {{\n    label=\"{kind} {c}\";");
        let w = c.word();
        for (i, l) in w.iter().enumerate() {
            let _ = writeln!(d, "    \"{l}\" -> \"{}\";", w[(i + 1) % w.len()]);
        }
        d.push_str("  }\n");
    }
    for e in 0..s.empty {
        let _ = writeln!(d, "  \"empty{e}\" [shape=circle, label=\"\"];");
    }
    d.push_str("}\n");
    d
}

fn glue_open(surfaces: &Path, gluing: &Path, rule: Rule, out: Option<&Path>, dot: Option<&Path>) -> Result<Outcome> {
    let [left, right]: [SurfaceDoc; 2] = read_json(surfaces)?;
    let eta = read_json::<GluingDoc>(gluing)?.to_bijection()?;
    let s = open_glue(&left.to_surface()?, &right.to_surface()?, &eta, rule.into())?;
    if let Some(p) = dot {
        std::fs::write(p, surface_dot(&s)).with_context(|| format!("writing {}", p.display()))?;
    }
    let doc = SurfaceDoc::from_surface(&s);
    let v = json!({
        "genus": doc.genus,
        "out_cycles": doc.out_cycles,
        "in_cycles": doc.in_cycles,
        "boundaries": s.boundaries(),
        "chi": s.chi(),
    });
    emit(out, &pretty(&v))?;
    Ok(Outcome { ok: true, output: String::new() })
}

fn cobar_d2(named: Named, b: &Bounds, vertex_cap: usize, max_edges: Option<usize>) -> Result<Outcome> {
    let cfg = CobarConfig { vertex_cap, max_edges };
    let closed = ClosedFrobenius { generalized: !b.restricted };
    let rep = match named {
        Named::ClosedFrobenius => verify_d_squared(&closed, b.axiom_bounds(), &cfg)?,
        Named::OpenFrobenius => {
            let open = OpenFrobenius { generalized: !b.restricted, genus_rule: b.genus_rule.into() };
            verify_d_squared(&open, b.axiom_bounds(), &cfg)?
        }
        Named::MutatedClosedFrobenius => verify_d_squared(&mutated(&closed), b.axiom_bounds(), &cfg)?,
        Named::End => bail!("cobar-d2 supports the Frobenius properads only"),
    };
    let v = json!({
        "status": if rep.passed() { "PASS" } else { "FAIL" },
        "generators": rep.generators,
        "terms": rep.terms,
        "witness": rep.witness,
    });
    Ok(Outcome { ok: rep.passed(), output: pretty(&v) })
}

fn mutated(inner: &ClosedFrobenius) -> Mutated<'_, ClosedFrobenius> {
    Mutated { inner, flip_action_swap: None, flip_compose: Some((1, 1)) }
}

fn axioms_report<P: Properad>(p: &P, b: &Bounds) -> AxiomReport {
    check_all_axioms(p, b.axiom_bounds())
}

fn axioms(named: Named, b: &Bounds, dgvs: Option<&Path>) -> Result<Outcome> {
    let closed = ClosedFrobenius { generalized: !b.restricted };
    let rep = match named {
        Named::ClosedFrobenius => axioms_report(&closed, b),
        Named::OpenFrobenius => {
            axioms_report(&OpenFrobenius { generalized: !b.restricted, genus_rule: b.genus_rule.into() }, b)
        }
        Named::End => {
            let Some(path) = dgvs else { bail!("the endomorphism properad needs --dgvs") };
            axioms_report(&EndProperad::new(load_space(path)?), b)
        }
        Named::MutatedClosedFrobenius => axioms_report(&mutated(&closed), b),
    };
    let v = json!({
        "status": if rep.passed() { "PASS" } else { "FAIL" },
        "cases": rep.cases,
        "violations": rep.violations.iter().map(|v| json!({"axiom": v.axiom, "witness": v.witness})).collect::<Vec<_>>(),
    });
    Ok(Outcome { ok: rep.passed(), output: pretty(&v) })
}

fn report_value(r: &MasterReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

#[allow(clippy::too_many_arguments)]
fn check(
    flavor: Flavor,
    dgvs: &Path,
    structure: &Path,
    closed_dgvs: Option<&Path>,
    t: Truncation,
    cross: Option<Cross>,
    out: Option<&Path>,
) -> Result<Outcome> {
    let doc: StructureDoc = read_json(structure)?;
    let expected = match flavor {
        Flavor::Closed => StructureFlavor::Closed,
        Flavor::Open => StructureFlavor::Open,
        Flavor::OpenClosed => StructureFlavor::OpenClosed,
    };
    if doc.flavor != expected {
        bail!("structure document has flavor {:?}, command asked for {:?}", doc.flavor, expected);
    }
    if cross.is_some() && flavor != Flavor::Closed {
        bail!("--cross-check applies to the closed flavor only");
    }
    let v = load_space(dgvs)?;
    let (report, extra) = match flavor {
        Flavor::Closed => {
            let sp = Spaces::single(v);
            let keys = entries(&doc.entries, |e| e.closed_key(&sp))?;
            let model = ClosedFrobenius::default();
            let f = StructureConstants::from_entries(&model, &sp, keys)?;
            let l = GeneratingOperator::new(&model, sp.clone(), &y_iso(&model, &sp, &f))?;
            let rep = master_check(&model, &l, &t);
            (rep, cross.map(|c| cross_reports(c, &sp, &l, &f, &t)).unwrap_or_default())
        }
        Flavor::Open => {
            let sp = Spaces::single(v);
            let keys = entries(&doc.entries, |e| e.open_key(&sp))?;
            let f = StructureConstants::from_entries(&OpenFrobenius::default(), &sp, keys)?;
            (iba_check(&sp, &f, &t)?, Vec::new())
        }
        Flavor::OpenClosed => {
            let c = match closed_dgvs {
                Some(p) => load_space(p)?,
                None => v.clone(),
            };
            let sp = Spaces::new(vec![v, c])?;
            let keys = entries(&doc.entries, |e| e.open_closed_key(&sp))?;
            let f = StructureConstants::from_entries(&OpenClosedModel, &sp, keys)?;
            (oc_check(&sp, &f, &t)?, Vec::new())
        }
    };
    let agree = extra.iter().all(|(_, r)| *r == report);
    let ok = report.passed() && agree;
    let value = if extra.is_empty() {
        report_value(&report)
    } else {
        let mut m = serde_json::Map::new();
        m.insert("master".into(), report_value(&report));
        for (name, r) in &extra {
            m.insert((*name).into(), report_value(r));
        }
        m.insert("agree".into(), agree.into());
        Value::Object(m)
    };
    emit(out, &pretty(&value))?;
    Ok(Outcome { ok, output: String::new() })
}

fn entries<K>(
    es: &[StructureEntry],
    key: impl Fn(&StructureEntry) -> properad::error::Result<K>,
) -> Result<Vec<(K, properad::linear::Rational)>> {
    es.iter().enumerate().map(|(i, e)| Ok((key(e).with_context(|| format!("entry {i}"))?, e.coeff.clone()))).collect()
}

fn cross_reports(
    c: Cross,
    sp: &Spaces,
    l: &GeneratingOperator<ClosedGenerator>,
    f: &StructureConstants<ClosedGenerator>,
    t: &Truncation,
) -> Vec<(&'static str, MasterReport)> {
    let mut out = Vec::new();
    if matches!(c, Cross::Components | Cross::Both) {
        out.push(("components", ibl_component_relations(sp, f, t)));
    }
    if matches!(c, Cross::Operator | Cross::Both) {
        out.push(("operator", operator_square_check(sp, &l.terms, t)));
    }
    out
}

fn seed() -> Result<u64> {
    match std::env::var("PROPERAD_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("PROPERAD_SEED={s:?} is not an unsigned integer")),
        Err(_) => Ok(0),
    }
}

fn sample(dim: usize, chi_max: i64, out_dgvs: &Path, out_structure: &Path) -> Result<Outcome> {
    use rand::SeedableRng;
    if !(1..=2).contains(&dim) || chi_max < 1 {
        bail!("sample needs dim 1 or 2 and chi-max at least 1");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed()?);
    let inst = random_closed_instance(&mut rng, InstanceParams { dim, chi_max, ..Default::default() });
    let b = inst.spaces.colors[0].basis();
    let names = |ix: Vec<usize>| ix.into_iter().map(|i| b.name(i).to_string()).collect::<Vec<_>>();
    let f = y_inverse(&ClosedFrobenius::default(), &inst.spaces, &inst.l.terms);
    let entries = f
        .entries
        .iter()
        .map(|(k, c)| StructureEntry {
            m: Some(k.gen.outputs.len()),
            n: Some(k.gen.inputs.len()),
            chi: Some(k.gen.chi),
            j: Some(names(k.gen.outputs.iter().map(|l| k.deco[l]).collect())),
            i: Some(names(k.gen.inputs.iter().map(|l| k.deco[l]).collect())),
            coeff: c.clone(),
            ..Default::default()
        })
        .collect();
    let doc = StructureDoc { flavor: StructureFlavor::Closed, entries };
    let text = |v: Value| pretty(&v);
    emit(Some(out_dgvs), &text(serde_json::to_value(DgvsDoc::from_space(&inst.spaces.colors[0]))?))?;
    emit(Some(out_structure), &text(serde_json::to_value(doc)?))?;
    Ok(Outcome { ok: true, output: String::new() })
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.cmd {
        Cmd::GlueOpen { surfaces, gluing, genus_rule, out, dot } => {
            glue_open(&surfaces, &gluing, genus_rule, out.as_deref(), dot.as_deref())
        }
        Cmd::CobarD2 { properad, bounds, vertex_cap, max_edges } => cobar_d2(properad, &bounds, vertex_cap, max_edges),
        Cmd::Check { flavor, dgvs, structure, closed_dgvs, chi_max, m_max, n_max, complete, cross_check, out } => {
            let mut t = Truncation::new(chi_max, m_max, n_max);
            if complete {
                t = t.complete();
            }
            check(flavor, &dgvs, &structure, closed_dgvs.as_deref(), t, cross_check, out.as_deref())
        }
        Cmd::Axioms { properad, bounds, dgvs } => axioms(properad, &bounds, dgvs.as_deref()),
        Cmd::Sample { dim, chi_max, out_dgvs, out_structure } => sample(dim, chi_max, &out_dgvs, &out_structure),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            if !o.output.is_empty() {
                say(&o.output);
            }
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
