use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use properad::cobar::{d_squared, CobarConfig};
use properad::combinatorics::{canonical_cycle, enumerate_shuffles, permutations, Bijection, Cycle};
use properad::frobenius::{open_glue, ClosedFrobenius, ClosedGenerator, GenusRule, OpenSurface};
use properad::linear::koszul_sign;
use properad::master::{
    ibl_component_relations, master_check, operator_square_check, random_closed_instance, y_inverse, InstanceParams,
    Truncation,
};
use properad::properad::{check_all_axioms, in_labels, out_labels, AxiomBounds};

fn cyc(w: &[&str]) -> Cycle {
    canonical_cycle(w).unwrap()
}

fn signs(c: &mut Criterion) {
    let perms = permutations(5);
    let deg = [1, 0, 1, 1, 0];
    c.bench_function("koszul_sign all S5", |b| {
        b.iter(|| perms.iter().map(|p| koszul_sign(p, black_box(&deg)).unwrap()).sum::<i32>())
    });
    c.bench_function("shuffles (4,4)", |b| b.iter(|| enumerate_shuffles(black_box(4), 4).unwrap().len()));
}

fn gluing(c: &mut Criterion) {
    let right = OpenSurface::new(0, vec![cyc(&["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"])], vec![]).unwrap();
    let left =
        OpenSurface::new(0, vec![], vec![cyc(&["y1", "y2", "y3", "y4", "y5", "y6"]), cyc(&["z1", "z2", "z3", "z4"])]).unwrap();
    let eta = Bijection::new([("y6", "x2"), ("z1", "x3"), ("y4", "x7")].map(|(a, b)| (a.to_string(), b.to_string()))).unwrap();
    c.bench_function("open_glue three pairs", |b| {
        b.iter(|| open_glue(black_box(&left), &right, &eta, GenusRule::Ledger).unwrap())
    });
    c.bench_function("closed axioms arity 2, chi 3", |b| {
        b.iter(|| check_all_axioms(&ClosedFrobenius::default(), AxiomBounds::new(2, 3, 6)).cases)
    });
}

fn cobar(c: &mut Criterion) {
    let e = ClosedGenerator::new(out_labels(1), in_labels(2), 3).unwrap();
    let p = ClosedFrobenius::default();
    c.bench_function("cobar d² on (1,2,3)", |b| {
        b.iter(|| d_squared(&p, black_box(&e), &CobarConfig::default()).unwrap().0)
    });
}

fn master(c: &mut Criterion) {
    let inst = random_closed_instance(&mut ChaCha8Rng::seed_from_u64(2), InstanceParams::default());
    let t = Truncation::new(4, 6, 6);
    let m = ClosedFrobenius::default();
    let f = y_inverse(&m, &inst.spaces, &inst.l.terms);
    let mut g = c.benchmark_group("master equation, dim 2, chi 4");
    g.bench_function("coinvariants", |b| b.iter(|| master_check(&m, black_box(&inst.l), &t)));
    g.bench_function("operator", |b| b.iter(|| operator_square_check(&inst.spaces, black_box(&inst.l.terms), &t)));
    g.bench_function("components", |b| b.iter(|| ibl_component_relations(&inst.spaces, black_box(&f), &t)));
    g.finish();
}

criterion_group!(benches, signs, gluing, cobar, master);
criterion_main!(benches);
