use criterion::{criterion_group, criterion_main, Criterion};
use theta_core::classical::{hecke_t_orthogonal, hecke_t_upper, unit_delta};
use theta_core::hecke::{verify_case, HeckeCase};
use theta_core::quadric::CaseKind;
use theta_core::theta::{GlobalTheta, Presentation};
use theta_core::weil::WeilCtx;
use theta_core::Flavor;

fn classical(c: &mut Criterion) {
    let w = WeilCtx::new(3, Flavor::Unramified, false).unwrap();
    let d = unit_delta(&w).unwrap();
    c.bench_function("T1 by orthogonality, q=3", |b| b.iter(|| hecke_t_orthogonal(&w, 1, &d).unwrap()));
    c.bench_function("T1 by upper cosets, q=3", |b| b.iter(|| hecke_t_upper(&w, 1, &d).unwrap()));
    let w5 = WeilCtx::new(5, Flavor::Unramified, false).unwrap();
    let d5 = unit_delta(&w5).unwrap();
    c.bench_function("T2 by orthogonality, q=5", |b| b.iter(|| hecke_t_orthogonal(&w5, 2, &d5).unwrap()));
}

fn dual(c: &mut Criterion) {
    let mut g = c.benchmark_group("dual T1");
    g.sample_size(10);
    for kind in [CaseKind::UnramifiedV1, CaseKind::RamifiedV1, CaseKind::SplitV1] {
        let case = HeckeCase::new(3, kind);
        g.bench_function(format!("{kind:?}"), |b| b.iter(|| verify_case(&case, 2).unwrap()));
    }
    g.finish();
}

fn global(c: &mut Criterion) {
    let g = GlobalTheta::new(3).unwrap();
    c.bench_function("bundle table to n=4", |b| b.iter(|| g.table(4).unwrap()));
    let pres = Presentation::split(2);
    c.bench_function("adelic theta sum O(2)", |b| b.iter(|| g.theta_adelic(&pres).unwrap()));
}

criterion_group!(benches, classical, dual, global);
criterion_main!(benches);
