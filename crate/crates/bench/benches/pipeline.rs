use criterion::{black_box, criterion_group, criterion_main, Criterion};
use dgbv_core::deformation::{solve_mc, DgLieAlgebra};
use dgbv_core::frobenius::frobenius_data;
use dgbv_core::hbar::HbarWindow;
use dgbv_core::vhs::{build_filtrations, harmonic_reps, period_map, HodgeFiltration, WSpec};
use dgbv_core::{kahler, linalg, models, verify_mirror_theorem, FlatTorusPair, Rat};

fn bench_axiom_suite(c: &mut Criterion) {
    let a = models::torus_forms(2);
    c.bench_function("axioms/torus-forms-n2", |b| {
        b.iter(|| {
            let rep = dgbv_core::check_dgbv_axioms(black_box(&a));
            assert!(rep.all_passed());
        })
    });
}

fn bench_mc_solver(c: &mut Criterion) {
    let a = models::torus_forms(2);
    let g = DgLieAlgebra::from_dgbv(&a).unwrap();
    c.bench_function("deform/torus-forms-n2 order 4", |b| {
        b.iter(|| {
            let sol = solve_mc(black_box(&g), 4).unwrap();
            assert!(sol.is_unobstructed());
        })
    });
}

fn bench_full_pipeline(c: &mut Criterion) {
    let pair = kahler::build_model_a(1, &linalg::identity(1), Rat::one())
        .unwrap()
        .pair;
    c.bench_function("frobenius/torus-n1 order 3", |b| {
        b.iter(|| {
            let g = DgLieAlgebra::from_pair(&pair);
            let sol = solve_mc(&g, 3).unwrap();
            let classes = harmonic_reps(&pair).unwrap();
            let hodge = HodgeFiltration::from_classes(&pair, &classes).unwrap();
            let filt = build_filtrations(&pair, &classes, WSpec::opposite(&hodge)).unwrap();
            let pm = period_map(&pair, &sol, &filt, &classes, HbarWindow::for_run(3, 1)).unwrap();
            let (_, report) = frobenius_data(&pm).unwrap();
            assert!(report.all_passed());
        })
    });
}

fn bench_mirror(c: &mut Criterion) {
    let tp = FlatTorusPair::new(1, linalg::identity(1)).unwrap();
    c.bench_function("mirror/n1 order 3 both roles", |b| {
        b.iter(|| {
            for swap in [false, true] {
                let rep = verify_mirror_theorem(black_box(&tp), 3, swap).unwrap();
                assert!(rep.all_passed());
            }
        })
    });
}

criterion_group!(
    benches,
    bench_axiom_suite,
    bench_mc_solver,
    bench_full_pipeline,
    bench_mirror
);
criterion_main!(benches);
