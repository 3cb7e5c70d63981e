use criterion::{black_box, criterion_group, criterion_main, Criterion};

use quadhecke::classchar::{is_principal, ClassGroup};
use quadhecke::galois::attachment_table;
use quadhecke::localtree::{laplacian_walk_inert, laplacian_walk_split, local_vertex_inert, local_vertex_split};
use quadhecke::{Lattice, QuadraticField};
use quadhecke_bench::{deep_lattices, headline, panel};

fn local_vertices(c: &mut Criterion) {
    let setup = headline();
    let qf = setup.qf();
    let lattices = deep_lattices();
    c.bench_function("local_vertex_inert/13", |b| {
        b.iter(|| {
            for (ell, l) in lattices.iter().filter(|(ell, _)| *ell == 13) {
                black_box(local_vertex_inert(qf, *ell, l).unwrap());
            }
        })
    });
    c.bench_function("local_vertex_split/3", |b| {
        b.iter(|| {
            for (ell, l) in lattices.iter().filter(|(ell, _)| *ell == 3) {
                black_box(local_vertex_split(qf, *ell, l).unwrap());
            }
        })
    });
}

fn phi_and_hecke(c: &mut Criterion) {
    let setup = headline();
    let ev = &setup.ev;
    let panel = panel(&setup);
    c.bench_function("phi/panel", |b| {
        b.iter(|| {
            for l in &panel {
                black_box(ev.phi(l).unwrap());
            }
        })
    });
    let mut group = c.benchmark_group("hecke_decompose");
    group.sample_size(10);
    for ell in [3u64, 13, 47] {
        group.bench_function(format!("O/{ell}"), |b| b.iter(|| black_box(ev.hecke_decompose(&Lattice::unit(), ell).unwrap())));
    }
    group.bench_function("attach/upto_20", |b| b.iter(|| black_box(attachment_table(ev, 20, &panel[..1]).unwrap())));
    group.finish();
}

fn walkers(c: &mut Criterion) {
    let setup = headline();
    let mut group = c.benchmark_group("laplacian_walk");
    group.sample_size(10);
    group.bench_function("inert/13/r4", |b| b.iter(|| black_box(laplacian_walk_inert(setup.field(), 13, 4).unwrap())));
    group.bench_function("split/3/r5", |b| {
        b.iter(|| black_box(laplacian_walk_split(setup.qf(), setup.field(), &setup.ev.chi, 3, 5).unwrap()))
    });
    group.finish();
}

fn class_groups(c: &mut Criterion) {
    let mut group = c.benchmark_group("class_group");
    group.sample_size(10);
    for d0 in [229i64, 331, 4_729] {
        let qf = QuadraticField::new(d0).unwrap();
        group.bench_function(format!("compute/{d0}"), |b| b.iter(|| black_box(ClassGroup::compute(&qf).unwrap())));
    }
    let qf = QuadraticField::new(331).unwrap();
    let ideal = Lattice::unit().scale(&qf, &quadhecke::KElement::from_ints(17, 5)).unwrap();
    group.bench_function("is_principal/331", |b| b.iter(|| black_box(is_principal(&qf, &ideal))));
    group.finish();
}

criterion_group!(benches, local_vertices, phi_and_hecke, walkers, class_groups);
criterion_main!(benches);
