//! Condition checkers under the active backend. Compare backends with
//! `cargo bench -p hydroham-core` and `cargo bench -p hydroham-core --no-default-features`.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hydroham_core::conditions::{
    check_coupling, check_local_third_order, check_nonlocal_third_order, CTensor, NonlocalTail,
};
use hydroham_core::jet::{DirectFrame, EvolutionSystem, Frame, JetSpace};
use hydroham_core::lax::zero_curvature;
use hydroham_core::oassoc::build_bundle;
use hydroham_core::par::PARALLEL;
use hydroham_core::tensor::Metric;
use hydroham_kernel::{Expr, Var};

fn backend() -> &'static str {
    if PARALLEL {
        "rayon"
    } else {
        "sequential"
    }
}

fn small_coupling_data() -> (EvolutionSystem, Metric, CTensor, NonlocalTail) {
    let (a, b) = (Expr::var(Var(0)), Expr::var(Var(1)));
    let int = Expr::from_int;
    let frame: Arc<dyn Frame> = Arc::new(DirectFrame::first(2));
    let space = JetSpace::new(frame.clone(), vec!["u1".into(), "u2".into()]);
    let sys = EvolutionSystem::new(space, vec![&(&a * &b) + &a, &(&a * &a) - &b]);
    let g = vec![vec![&int(1) + &(&a * &a), b.clone()], vec![b.clone(), int(-2)]];
    let m = Metric::new(g, frame).expect("invertible metric");
    let c = CTensor::from_metric(&m);
    let w = vec![vec![a.clone(), int(1)], vec![int(-1), b.clone()]];
    let t = NonlocalTail::new(vec![vec![int(1)]], vec![w]);
    (sys, m, c, t)
}

fn benches(cr: &mut Criterion) {
    let b = build_bundle().expect("bundle builds");
    let mut g = cr.benchmark_group("checks");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("local third order, q chart", backend()), |x| {
        x.iter(|| check_local_third_order(&b.metric3_q, &b.c3_q))
    });
    g.bench_function(BenchmarkId::new("nonlocal third order, u chart", backend()), |x| {
        x.iter(|| check_nonlocal_third_order(&b.metric3, &b.c3, &b.tails))
    });
    g.bench_function(BenchmarkId::new("zero curvature", backend()), |x| {
        x.iter(|| zero_curvature(&b.lax, &b.system_q).unwrap())
    });
    let (sys, m, c, t) = small_coupling_data();
    g.bench_function(BenchmarkId::new("coupling, two components", backend()), |x| {
        x.iter(|| check_coupling(&sys, &m, &c, &t))
    });
    g.finish();
}

criterion_group!(checks, benches);
criterion_main!(checks);
