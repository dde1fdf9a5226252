use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use qsp_core::coideal::{counit, kmatrix_solve, su2_params, Coideal};
use qsp_core::diagrams::SatakeDiagram;
use qsp_core::kzmono::{psi, MonodromyProblem};
use qsp_core::rmatrix::rmat;
use qsp_core::uqrep::{build_irrep, QParams};
use qsp_core::vogan10::build_mr;
use qsp_core::{build_root_datum, parse_type, CMat, Weight, C64};

fn kernels(c: &mut Criterion) {
    let q = 0.7;
    let a2 = Arc::new(build_root_datum(&parse_type("A2").unwrap()).unwrap());
    let qp2 = QParams::new(q, &a2).unwrap();
    let v = build_irrep(&a2, &Weight::from_ints(&[1, 1]), &qp2).unwrap();
    c.bench_function("rmat su3 adjoint", |b| b.iter(|| rmat(black_box(&v), &v).unwrap()));

    let m = CMat::from_fn(3, 3, |i, j| C64::new(0.0, 0.1 * (i + 2 * j) as f64));
    let skew = (&m + m.adjoint()) * C64::new(0.0, 0.5);
    let p = MonodromyProblem::new(skew.clone(), skew.transpose(), skew.adjoint() * C64::new(-1.0, 0.0));
    c.bench_function("psi 3x3", |b| b.iter(|| psi(black_box(&p)).unwrap()));

    c.bench_function("twisted double N=20", |b| b.iter(|| build_mr(black_box(0.25), q, 20).unwrap()));

    let a1 = build_root_datum(&parse_type("A1").unwrap()).unwrap();
    let d = SatakeDiagram::new(a1, &[], &[0]).unwrap();
    let qp1 = QParams::new(q, &d.datum).unwrap();
    let u = build_irrep(&Arc::new(d.datum.clone()), &Weight::from_ints(&[2]), &qp1).unwrap();
    let pr = su2_params(0.3, &qp1);
    let co = Coideal::new(&d, pr.clone(), qp1).unwrap();
    let chi = counit(&d, &pr);
    c.bench_function("kmatrix_solve su2 spin 1", |b| b.iter(|| kmatrix_solve(black_box(&co), &chi, &u).unwrap()));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
