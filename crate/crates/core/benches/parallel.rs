use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;

use projector_core::dynamics::{propagate_with, PropagateOptions, TimeGrid};
use projector_core::models::build_optomech;
use projector_core::reductions::{second_order_generator, Method, OptomechParams, SecondOrderOptions};
use projector_core::sparse::CompiledSuperOp;
use projector_core::superop::DensityMatrix;
use projector_core::Execution;

fn modes() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn params(n_mech: usize) -> OptomechParams {
    OptomechParams {
        omega_m: 10.0,
        delta: 10.0,
        kappa: 1.0,
        gamma_m: 1e-3,
        nbar: 10.0,
        g: C64::new(0.05, 0.0),
        n_cav: 4,
        n_mech,
    }
}

fn matvec(c: &mut Criterion) {
    let model = build_optomech(&params(12)).unwrap();
    let op = CompiledSuperOp::from_superop(&model.spec_schrodinger.evaluate_at(0.0));
    let x: Vec<C64> = (0..op.dim()).map(|k| C64::new(k as f64, 1.0)).collect();
    let mut group = c.benchmark_group("csr_matvec_2304");
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            let mut out = vec![C64::new(0.0, 0.0); op.dim()];
            b.iter(|| {
                op.mul_add(black_box(&x), C64::new(1.0, 0.0), &mut out, exec);
            })
        });
    }
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let model = build_optomech(&params(12)).unwrap();
    let rho0 = DensityMatrix::basis(48, 0).unwrap();
    let grid = TimeGrid::new(0.0, 0.5, 200).unwrap();
    let mut group = c.benchmark_group("propagate_optomech_200_steps");
    group.sample_size(10);
    for (name, exec) in modes() {
        let opts = PropagateOptions {
            exec,
            keep_states: false,
            ..Default::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| propagate_with(&model.spec_schrodinger, &rho0, &grid, &[], opts, |_, _, _| Ok(())).unwrap())
        });
    }
    group.finish();
}

fn born_columns(c: &mut Criterion) {
    let mut group = c.benchmark_group("second_order_generator");
    group.sample_size(10);
    for n in [8usize, 16] {
        let model = build_optomech(&params(n)).unwrap();
        for (name, exec) in modes() {
            let opts = SecondOrderOptions {
                method: Method::Sideband,
                secular: true,
                reference_freq: None,
                exec,
            };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    second_order_generator(&model.bath_liouvillian, &model.interaction, &model.bath_state, opts).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, matvec, propagation, born_columns);
criterion_main!(benches);
