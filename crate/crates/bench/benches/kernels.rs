use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use robustcsp::flex::k_robust;
use robustcsp::reduction::{find_four_cycle, three_colouring, untriangulated_edge};
use robustcsp::semigroup::{build_s_i, build_t_mod_u, green, isomorphic, DEFAULT_ELEMENT_LIMIT};
use robustcsp::structure::{complete_graph, cycle_graph};
use robustcsp::{builtin, enumerate_homs};
use robustcsp_bench::{amplified_graph, single_clause_1in3};

fn homomorphisms(c: &mut Criterion) {
    let k3 = builtin("K3").unwrap();
    let cycle = cycle_graph(12);
    c.bench_function("enumerate_homs C12 -> K3", |b| b.iter(|| enumerate_homs(black_box(&cycle), &k3).unwrap()));
    let k4 = complete_graph(4);
    c.bench_function("k_robust K4 -> K3, k=2", |b| b.iter(|| k_robust(black_box(&k4), &k3, 2).unwrap()));
}

fn reduction_graph(c: &mut Criterion) {
    let rg = amplified_graph(1);
    let g = rg.graph();
    c.bench_function("three_colouring amplified k=1", |b| b.iter(|| three_colouring(black_box(g)).unwrap()));
    c.bench_function("find_four_cycle amplified k=1", |b| b.iter(|| find_four_cycle(black_box(g)).unwrap()));
    c.bench_function("untriangulated_edge amplified k=1", |b| b.iter(|| untriangulated_edge(black_box(g)).unwrap()));
}

fn semigroups(c: &mut Criterion) {
    let inst = single_clause_1in3();
    c.bench_function("build_s_i single clause", |b| b.iter(|| build_s_i(black_box(&inst), DEFAULT_ELEMENT_LIMIT).unwrap()));
    c.bench_function("build_t_mod_u single clause", |b| {
        b.iter(|| build_t_mod_u(black_box(&inst), 12, DEFAULT_ELEMENT_LIMIT).unwrap())
    });
    let si = build_s_i(&inst, DEFAULT_ELEMENT_LIMIT).unwrap().semigroup;
    let tu = build_t_mod_u(&inst, 12, DEFAULT_ELEMENT_LIMIT).unwrap().semigroup;
    c.bench_function("green S_I single clause", |b| b.iter(|| green(black_box(&si), DEFAULT_ELEMENT_LIMIT).unwrap()));
    c.bench_function("isomorphic T/U S_I single clause", |b| b.iter(|| isomorphic(black_box(&tu), &si)));
}

criterion_group!(kernels, homomorphisms, reduction_graph, semigroups);
criterion_main!(kernels);
