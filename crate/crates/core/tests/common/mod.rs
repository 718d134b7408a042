#![allow(dead_code)]

use blaschke::factorizer::random_disk_points;
use blaschke::{compose, product, BlaschkeProduct, ComplexPoint, Config, Permutation};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> ComplexPoint {
    Complex64::new(re, im)
}

pub fn monomial(n: usize) -> BlaschkeProduct {
    BlaschkeProduct::monomial(n, c(1.0, 0.0)).unwrap()
}

pub fn random(degree: usize, seed: u64) -> BlaschkeProduct {
    product::random(degree, seed, 0.8).unwrap()
}

/// `(J, b, J ∘ b)` for independent seeded factors.
pub fn composition(outer: usize, inner: usize, seed: u64) -> (BlaschkeProduct, BlaschkeProduct, BlaschkeProduct) {
    let j = random(outer, 1_000_003 * seed + 17);
    let b = random(inner, 1_000_003 * seed + 29);
    let product = compose(&j, &b, &Config::default()).unwrap();
    (j, b, product)
}

/// Fresh evaluation points, independent of the construction grid.
pub fn fresh_grid(seed: u64, count: usize) -> Vec<ComplexPoint> {
    random_disk_points(0xf00d_0000 + seed, count, 1.0)
}

pub fn sup_distance(a: &BlaschkeProduct, b: &BlaschkeProduct, points: &[ComplexPoint]) -> f64 {
    points
        .iter()
        .map(|z| (a.value(*z).unwrap() - b.value(*z).unwrap()).norm())
        .fold(0.0, f64::max)
}

pub fn is_single_cycle(p: &Permutation) -> bool {
    p.cycles().len() == 1
}

/// Every partition of `0..n` into blocks of equal size `k` with `1 < k < n`
/// that the generators map to itself, by exhaustive search.
pub fn brute_force_block_systems(generators: &[Permutation], n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for k in 2..n {
        if !n.is_multiple_of(k) {
            continue;
        }
        let mut labels = vec![usize::MAX; n];
        equal_partitions(n, k, &mut labels, 0, &mut |labels| {
            let invariant = generators.iter().all(|g| {
                (0..n).all(|x| (0..n).all(|y| labels[x] != labels[y] || labels[g.apply(x)] == labels[g.apply(y)]))
            });
            if invariant {
                let mut blocks = vec![Vec::new(); n / k];
                for (x, &l) in labels.iter().enumerate() {
                    blocks[l].push(x);
                }
                out.push(blocks);
            }
        });
    }
    out.sort_by(|a, b| a[0].len().cmp(&b[0].len()).then_with(|| a.cmp(b)));
    out
}

fn equal_partitions(n: usize, k: usize, labels: &mut Vec<usize>, used: usize, visit: &mut dyn FnMut(&[usize])) {
    let Some(first) = labels.iter().position(|&l| l == usize::MAX) else {
        visit(labels);
        return;
    };
    labels[first] = used;
    choose(n, k - 1, first + 1, used, labels, &mut |labels| {
        equal_partitions(n, k, labels, used + 1, visit)
    });
    labels[first] = usize::MAX;
}

fn choose(
    n: usize,
    remaining: usize,
    from: usize,
    label: usize,
    labels: &mut Vec<usize>,
    then: &mut dyn FnMut(&mut Vec<usize>),
) {
    if remaining == 0 {
        then(labels);
        return;
    }
    for x in from..n {
        if labels[x] == usize::MAX {
            labels[x] = label;
            choose(n, remaining - 1, x + 1, label, labels, then);
            labels[x] = usize::MAX;
        }
    }
}
