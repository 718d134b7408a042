mod common;

use blaschke::factorizer::{
    branch_partition, build_inner, build_outer, equivalent, factorize_all, mobius_distance, random_disk_points,
    residual, synthesize, transport_partition, zero_fiber_blocks,
};
use blaschke::{compose, BlaschkeProduct, Config, ErrorKind, MobiusAuto};
use common::*;

#[test]
fn z_six_has_two_monomial_factorizations() {
    let cfg = Config::default();
    let report = factorize_all(&monomial(6), &cfg).unwrap();
    assert!(report.errors.is_empty());
    let shapes: Vec<(usize, usize)> = report
        .factorizations
        .iter()
        .map(|f| (f.outer.degree(), f.inner.degree()))
        .collect();
    assert_eq!(shapes, vec![(3, 2), (2, 3)]);
    for f in &report.factorizations {
        assert!(f.outer.is_monomial() && f.inner.is_monomial());
        assert!(f.residual <= 1e-14);
    }
}

#[test]
fn gauge_variants_of_a_composition_agree() {
    let cfg = Config::default();
    let (j, b, product) = composition(2, 3, 6);
    let m = MobiusAuto::sending_to_zero(c(0.3, -0.2));
    let twisted_outer = compose(&j, &m.inverse().to_blaschke(), &cfg).unwrap();
    let twisted_inner = compose(&m.to_blaschke(), &b, &cfg).unwrap();
    let twisted = compose(&twisted_outer, &twisted_inner, &cfg).unwrap();
    assert!(sup_distance(&product, &twisted, &fresh_grid(0, 300)) <= 1e-9);

    let first = factorize_all(&product, &cfg).unwrap();
    let second = factorize_all(&twisted, &cfg).unwrap();
    let f = first.factorizations.iter().find(|f| f.inner.degree() == 3).unwrap();
    let g = second.factorizations.iter().find(|f| f.inner.degree() == 3).unwrap();
    assert!(mobius_distance(&f.inner, &g.inner) <= 1e-7);
    assert!(mobius_distance(&b, &f.inner) <= 1e-7);
    assert!(mobius_distance(&twisted_inner, &g.inner) <= 1e-7);
}

#[test]
fn triple_composition_factorizations_are_pairwise_distinct() {
    let cfg = Config::default();
    let (a, b, c2) = (random(2, 31), random(2, 32), random(2, 33));
    let product = compose(&compose(&a, &b, &cfg).unwrap(), &c2, &cfg).unwrap();
    let report = factorize_all(&product, &cfg).unwrap();
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    let fs = &report.factorizations;
    assert!(fs
        .iter()
        .any(|f| f.inner.degree() == 2 && mobius_distance(&c2, &f.inner) <= 1e-7));
    let abc = compose(&b, &c2, &cfg).unwrap();
    assert!(fs
        .iter()
        .any(|f| f.inner.degree() == 4 && mobius_distance(&abc, &f.inner) <= 1e-7));
    for (i, x) in fs.iter().enumerate() {
        for (k, y) in fs.iter().enumerate() {
            assert_eq!(equivalent(x, y), i == k, "{i} vs {k}");
        }
    }
}

#[test]
fn inner_is_constant_on_transported_blocks() {
    let cfg = Config::default();
    let (_, _, product) = composition(2, 3, 8);
    let report = factorize_all(&product, &cfg).unwrap();
    let f = report.factorizations.iter().find(|f| f.inner.degree() == 3).unwrap();
    // the system lives on the normalized product's fiber; so does the inner factor up to gauge
    let mut checked = 0;
    for w in random_disk_points(12, 80, 0.95) {
        let near = report
            .monodromy
            .punctures
            .iter()
            .map(|v| (v - w).norm())
            .fold(f64::INFINITY, f64::min);
        if near < 1e-2 {
            continue;
        }
        let labeled = transport_partition(&report.normalized, &report.monodromy, &f.source_system, w, &cfg).unwrap();
        for block in labeled.blocks() {
            let values: Vec<_> = block.iter().map(|z| f.inner.value(*z).unwrap()).collect();
            let spread = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
            assert!(spread <= 1e-8, "spread {spread:e} at {w}");
        }
        checked += 1;
        if checked == 50 {
            break;
        }
    }
    assert_eq!(checked, 50);
}

#[test]
fn factors_hold_on_a_fresh_grid() {
    let cfg = Config::default();
    for seed in 0..5 {
        let (_, _, product) = composition(3, 2, 40 + seed);
        let report = factorize_all(&product, &cfg).unwrap();
        assert!(!report.factorizations.is_empty());
        for f in &report.factorizations {
            let composed = compose(&f.outer, &f.inner, &cfg).unwrap();
            assert!(sup_distance(&product, &composed, &fresh_grid(seed, 500)) <= 1e-8);
            assert!(residual(&product, &f.outer, &f.inner, &fresh_grid(seed + 100, 500)).unwrap() <= 1e-8);
        }
    }
}

#[test]
fn building_blocks_reproduce_the_normalized_product() {
    let cfg = Config::default();
    let (_, _, product) = composition(2, 2, 3);
    let report = factorize_all(&product, &cfg).unwrap();
    let system = &report.block_systems[0];
    let bn = &report.normalized;
    let blocks = zero_fiber_blocks(bn, &report.monodromy, system, &cfg).unwrap();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].contains(&c(0.0, 0.0)));
    let inner = build_inner(bn, &report.monodromy, system, &cfg).unwrap();
    assert_eq!(inner.degree(), 2);
    let (outer, res) = build_outer(bn, &inner, &blocks, &cfg).unwrap();
    assert!(res <= 1e-10);
    assert!(outer.value(c(0.0, 0.0)).unwrap().norm() <= 1e-12);
    assert_eq!(branch_partition(bn, &report.monodromy, &inner).unwrap(), *system);
}

#[test]
fn synthesize_rejects_foreign_partitions() {
    let cfg = Config::default();
    let (_, _, product) = composition(2, 2, 5);
    let report = factorize_all(&product, &cfg).unwrap();
    let system = report.block_systems[0].clone();
    assert!(synthesize(&product, &report, &system, &cfg).unwrap().residual <= cfg.residual);
    let mut foreign = None;
    for candidate in [
        vec![vec![0, 1], vec![2, 3]],
        vec![vec![0, 2], vec![1, 3]],
        vec![vec![0, 3], vec![1, 2]],
    ] {
        let s = blaschke::BlockSystem::from_blocks(4, &candidate).unwrap();
        if !s.is_invariant(&report.monodromy.generators) {
            foreign = Some(s);
        }
    }
    if let Some(s) = foreign {
        let e = synthesize(&product, &report, &s, &cfg).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::InvalidInput);
    }
}

#[test]
fn prime_degree_has_no_factorizations() {
    let cfg = Config::default();
    for (n, seed) in [(5, 1), (7, 2), (3, 3)] {
        let report = factorize_all(&random(n, seed), &cfg).unwrap();
        assert!(report.block_systems.is_empty());
        assert!(report.factorizations.is_empty());
    }
}

#[test]
fn degree_limits() {
    let cfg = Config::default();
    let linear = BlaschkeProduct::new(c(1.0, 0.0), vec![c(0.2, 0.1)]).unwrap();
    assert_eq!(
        factorize_all(&linear, &cfg).unwrap_err().kind(),
        ErrorKind::InvalidInput
    );
    let big = random(cfg.max_degree + 1, 1);
    assert_eq!(factorize_all(&big, &cfg).unwrap_err().kind(), ErrorKind::Declined);
}

#[test]
fn repeated_zeros_go_through_conjugation() {
    let cfg = Config::default();
    let inner = BlaschkeProduct::new(c(1.0, 0.0), vec![c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
    let outer = BlaschkeProduct::new(c(0.0, 1.0), vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    let product = compose(&outer, &inner, &cfg).unwrap();
    let report = factorize_all(&product, &cfg).unwrap();
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    let f = report.factorizations.iter().find(|f| f.inner.degree() == 2).unwrap();
    assert!(f.residual <= cfg.residual);
    assert!(mobius_distance(&inner, &f.inner) <= 1e-7);
}
