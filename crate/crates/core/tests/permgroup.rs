mod common;

use std::collections::{BTreeSet, HashSet};

use blaschke::monodromy::monodromy_group;
use blaschke::permgroup::{all_block_systems, minimal_block, normal_subgroups, NormalSubgroups};
use blaschke::{BlockSystem, Config, PermGroup, Permutation};
use common::*;
use proptest::prelude::*;

const CAP: u128 = 200_000;

fn cyc(n: usize, cycles: &[&[usize]]) -> Permutation {
    Permutation::from_cycles(n, cycles).unwrap()
}

/// Closure by breadth-first multiplication.
fn closure(generators: &[Permutation], n: usize) -> HashSet<Permutation> {
    let mut seen: HashSet<Permutation> = HashSet::from([Permutation::identity(n)]);
    let mut queue = vec![Permutation::identity(n)];
    while let Some(x) = queue.pop() {
        for g in generators {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    seen
}

fn brute_normal_subgroups(elements: &HashSet<Permutation>) -> BTreeSet<BTreeSet<Permutation>> {
    let mut remaining: BTreeSet<Permutation> = elements.iter().cloned().collect();
    let mut classes: Vec<BTreeSet<Permutation>> = Vec::new();
    while let Some(x) = remaining.iter().next().cloned() {
        let class: BTreeSet<Permutation> = elements.iter().map(|g| g.inverse().then(&x).then(g)).collect();
        for y in &class {
            remaining.remove(y);
        }
        classes.push(class);
    }
    let mut out = BTreeSet::new();
    for mask in 0u64..(1 << classes.len()) {
        let set: BTreeSet<Permutation> = classes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .flat_map(|(_, c)| c.iter().cloned())
            .collect();
        let n = elements.iter().next().unwrap().degree();
        if !set.contains(&Permutation::identity(n)) {
            continue;
        }
        if set.iter().all(|a| set.iter().all(|b| set.contains(&a.then(b)))) {
            out.insert(set);
        }
    }
    out
}

fn listed_as_sets(listed: &NormalSubgroups, n: usize) -> BTreeSet<BTreeSet<Permutation>> {
    let NormalSubgroups::Listed { subgroups } = listed else {
        panic!("declined");
    };
    subgroups
        .iter()
        .map(|s| {
            let set = closure(&s.generators, n);
            assert_eq!(set.len() as u128, s.order);
            set.into_iter().collect()
        })
        .collect()
}

fn as_partitions(systems: &[BlockSystem]) -> Vec<Vec<Vec<usize>>> {
    systems.iter().map(|s| s.blocks.clone()).collect()
}

#[test]
fn generated_groups_have_the_right_order() {
    let s4 = PermGroup::generate(&[cyc(4, &[&[0, 1, 2, 3]]), cyc(4, &[&[0, 1]])], 4, CAP).unwrap();
    assert_eq!(s4.order(), 24);
    let a5 = PermGroup::generate(&[cyc(5, &[&[0, 1, 2]]), cyc(5, &[&[0, 1, 2, 3, 4]])], 5, CAP).unwrap();
    assert_eq!(a5.order(), 60);
    let d4 = PermGroup::generate(&[cyc(4, &[&[0, 1, 2, 3]]), cyc(4, &[&[1, 3]])], 4, CAP).unwrap();
    assert_eq!(d4.order(), 8);
    assert!(!d4.is_abelian());
    let trivial = PermGroup::generate(&[], 3, CAP).unwrap();
    assert_eq!(trivial.order(), 1);
    assert!(!trivial.is_transitive());
}

#[test]
fn order_matches_closure_for_large_symmetric_group() {
    let gens = [cyc(7, &[&[0, 1, 2, 3, 4, 5, 6]]), cyc(7, &[&[0, 1]])];
    let g = PermGroup::generate(&gens, 7, CAP).unwrap();
    assert_eq!(g.order(), 5040);
    assert_eq!(closure(&gens, 7).len(), 5040);
    let s12 = PermGroup::generate(
        &[cyc(12, &[&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]]), cyc(12, &[&[0, 1]])],
        12,
        CAP,
    )
    .unwrap();
    assert_eq!(s12.order(), 479_001_600);
    assert!(s12.elements().is_none());
}

#[test]
fn transitivity() {
    let split = PermGroup::generate(&[cyc(4, &[&[0, 1], &[2, 3]])], 4, CAP).unwrap();
    assert!(!split.is_transitive());
    assert!(all_block_systems(&split).is_empty());
    let c4 = PermGroup::generate(&[cyc(4, &[&[0, 1, 2, 3]])], 4, CAP).unwrap();
    assert!(c4.is_transitive() && c4.is_abelian());
}

#[test]
fn cyclic_six_has_two_block_systems() {
    let gens = [cyc(6, &[&[0, 1, 2, 3, 4, 5]])];
    let g = PermGroup::generate(&gens, 6, CAP).unwrap();
    let systems = all_block_systems(&g);
    assert_eq!(as_partitions(&systems), brute_force_block_systems(&gens, 6));
    assert_eq!(
        as_partitions(&systems),
        vec![
            vec![vec![0, 3], vec![1, 4], vec![2, 5]],
            vec![vec![0, 2, 4], vec![1, 3, 5]],
        ]
    );
}

#[test]
fn primitive_groups_have_no_block_systems() {
    let s6 = PermGroup::generate(&[cyc(6, &[&[0, 1, 2, 3, 4, 5]]), cyc(6, &[&[0, 1]])], 6, CAP).unwrap();
    assert!(all_block_systems(&s6).is_empty());
    let c7 = PermGroup::generate(&[cyc(7, &[&[0, 1, 2, 3, 4, 5, 6]])], 7, CAP).unwrap();
    assert!(all_block_systems(&c7).is_empty());
}

#[test]
fn minimal_blocks_are_joined() {
    let gens = [cyc(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]])];
    let two = minimal_block(&gens, 8, 0, 4).unwrap();
    let four = minimal_block(&gens, 8, 0, 2).unwrap();
    assert_eq!(two.block_size, 2);
    assert_eq!(four.block_size, 4);
    assert_eq!(two.join(&four).unwrap(), four);
    let g = PermGroup::generate(&gens, 8, CAP).unwrap();
    let systems = all_block_systems(&g);
    assert!(systems.contains(&two) && systems.contains(&four));
    for a in &systems {
        for b in &systems {
            if let Some(j) = a.join(b) {
                assert!(j.is_trivial() || systems.contains(&j));
            }
        }
    }
}

#[test]
fn normal_subgroups_of_a_composition_group() {
    let cfg = Config::default();
    let (_, _, b) = composition(2, 3, 1);
    let mono = monodromy_group(&b, &cfg).unwrap();
    let g = PermGroup::generate(&mono.generators, 6, CAP).unwrap();
    let elements = closure(&mono.generators, 6);
    assert_eq!(elements.len() as u128, g.order());
    let listed = normal_subgroups(&g, CAP);
    assert_eq!(listed_as_sets(&listed, 6), brute_normal_subgroups(&elements));
}

#[test]
fn normal_subgroups_of_small_groups() {
    let cases: Vec<(usize, Vec<Permutation>)> = vec![
        (4, vec![cyc(4, &[&[0, 1, 2, 3]]), cyc(4, &[&[0, 1]])]),
        (4, vec![cyc(4, &[&[0, 1, 2, 3]]), cyc(4, &[&[1, 3]])]),
        (5, vec![cyc(5, &[&[0, 1, 2]]), cyc(5, &[&[0, 1, 2, 3, 4]])]),
        (6, vec![cyc(6, &[&[0, 1, 2, 3, 4, 5]])]),
    ];
    for (n, gens) in cases {
        let g = PermGroup::generate(&gens, n, CAP).unwrap();
        let listed = normal_subgroups(&g, CAP);
        assert_eq!(listed_as_sets(&listed, n), brute_normal_subgroups(&closure(&gens, n)));
    }
}

#[test]
fn normal_subgroups_decline_above_the_cap() {
    let g = PermGroup::generate(&[cyc(6, &[&[0, 1, 2, 3, 4, 5]]), cyc(6, &[&[0, 1]])], 6, CAP).unwrap();
    assert_eq!(
        normal_subgroups(&g, 100),
        NormalSubgroups::Declined {
            group_order: 720,
            cap: 100
        }
    );
}

fn arb_generators(n: usize) -> impl Strategy<Value = Vec<Permutation>> {
    prop::collection::vec(Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), 1..=3)
        .prop_map(|gs| gs.into_iter().map(|g| Permutation::from_images(g).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn block_systems_match_brute_force((n, gens) in (4usize..=8).prop_flat_map(|n| (Just(n), arb_generators(n)))) {
        let g = PermGroup::generate(&gens, n, CAP).unwrap();
        prop_assert_eq!(g.order() as usize, closure(&gens, n).len());
        if g.is_transitive() {
            prop_assert_eq!(as_partitions(&all_block_systems(&g)), brute_force_block_systems(&gens, n));
        }
    }

    #[test]
    fn cyclic_generators_give_divisor_blocks(n in 4usize..=12) {
        let cycle: Vec<usize> = (0..n).collect();
        let gens = [Permutation::from_cycles(n, &[&cycle]).unwrap()];
        let g = PermGroup::generate(&gens, n, CAP).unwrap();
        let divisors = (2..n).filter(|k| n % k == 0).count();
        prop_assert_eq!(all_block_systems(&g).len(), divisors);
    }
}
