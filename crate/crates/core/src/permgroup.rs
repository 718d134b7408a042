//! Permutation groups on branch labels: generation with a stabilizer chain,
//! transitivity, block systems and normal subgroups of small groups.
//!
//! Points are 0-indexed. Products are written left to right: `a.then(&b)`
//! applies `a` first, matching the order in which loops are traversed.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for (i, &x) in images.iter().enumerate() {
            if x >= images.len() || seen[x] {
                return Err(Error::input(format!("images[{i}]"), "not a bijection"));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation of `n` points from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                if x >= n || next >= n {
                    return Err(Error::input("cycles", format!("point out of range 0..{n}")));
                }
                images[x] = next;
            }
        }
        Self::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&x| other.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// All cycles, fixed points included, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// 1-indexed cycle notation without fixed points, `()` for the identity.
    pub fn cycle_notation(&self) -> String {
        let parts: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let labels: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", labels.join(" "))
            })
            .collect();
        if parts.is_empty() {
            "()".to_string()
        } else {
            parts.concat()
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}

/// Sims table with the full base `n-1, ..., 0`: `transversal[k][j]`, when
/// present, fixes every point above `k` and sends `k` to `j`.
#[derive(Clone, Debug)]
struct SimsTable {
    transversal: Vec<Vec<Option<Permutation>>>,
    strong: Vec<Vec<Permutation>>,
}

impl SimsTable {
    fn new(n: usize) -> Self {
        let transversal = (0..n)
            .map(|k| {
                let mut row = vec![None; n];
                row[k] = Some(Permutation::identity(n));
                row
            })
            .collect();
        SimsTable {
            transversal,
            strong: vec![Vec::new(); n],
        }
    }

    fn from_generators(n: usize, generators: &[Permutation]) -> Self {
        let mut table = SimsTable::new(n);
        for g in generators {
            table.insert(g);
        }
        table
    }

    fn degree(&self) -> usize {
        self.transversal.len()
    }

    fn insert(&mut self, g: &Permutation) {
        if let Some(top) = self.degree().checked_sub(1) {
            self.add(top, g.clone());
        }
    }

    fn sift(&self, level: usize, g: &Permutation) -> bool {
        let mut tau = g.clone();
        for k in (0..=level).rev() {
            match &self.transversal[k][tau.apply(k)] {
                Some(s) => tau = tau.then(&s.inverse()),
                None => return false,
            }
        }
        true
    }

    fn contains(&self, g: &Permutation) -> bool {
        self.degree() == 0 || self.sift(self.degree() - 1, g)
    }

    fn add(&mut self, k: usize, tau: Permutation) {
        if self.sift(k, &tau) {
            return;
        }
        self.strong[k].push(tau.clone());
        let known: Vec<Permutation> = self.transversal[k].iter().flatten().cloned().collect();
        for s in known {
            self.extend(k, s.then(&tau));
        }
    }

    fn extend(&mut self, k: usize, tau: Permutation) {
        let j = tau.apply(k);
        match self.transversal[k][j].clone() {
            None => {
                self.transversal[k][j] = Some(tau.clone());
                let strong = self.strong[k].clone();
                for pi in strong {
                    self.extend(k, tau.then(&pi));
                }
            }
            Some(s) => {
                if k > 0 {
                    self.add(k - 1, tau.then(&s.inverse()));
                }
            }
        }
    }

    fn order(&self) -> u128 {
        self.transversal
            .iter()
            .map(|row| row.iter().flatten().count() as u128)
            .product()
    }

    fn elements(&self) -> Vec<Permutation> {
        let n = self.degree();
        let mut out = vec![Permutation::identity(n)];
        for row in &self.transversal {
            let reps: Vec<&Permutation> = row.iter().flatten().collect();
            out = out.iter().flat_map(|g| reps.iter().map(move |r| g.then(r))).collect();
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    order: u128,
    elements: Option<Vec<Permutation>>,
    table: SimsTable,
}

impl PermGroup {
    pub fn generate(generators: &[Permutation], degree: usize, enumeration_cap: u128) -> Result<Self> {
        if let Some((i, _)) = generators.iter().enumerate().find(|(_, g)| g.degree() != degree) {
            return Err(Error::input(
                format!("generators[{i}]"),
                format!("degree differs from {degree}"),
            ));
        }
        let table = SimsTable::from_generators(degree, generators);
        let order = table.order();
        let elements = (order <= enumeration_cap).then(|| {
            let mut e = table.elements();
            e.sort();
            e
        });
        Ok(PermGroup {
            degree,
            generators: generators.to_vec(),
            order,
            elements,
            table,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn elements(&self) -> Option<&[Permutation]> {
        self.elements.as_deref()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.degree() == self.degree && self.table.contains(g)
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || orbit(0, &self.generators, self.degree).len() == self.degree
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.then(b) == b.then(a)))
    }
}

pub fn orbit(point: usize, generators: &[Permutation], degree: usize) -> Vec<usize> {
    let mut seen = vec![false; degree];
    seen[point] = true;
    let mut out = vec![point];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for g in generators {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// A partition of `0..n` into blocks, stored canonically: blocks sorted by
/// their least point, block ids in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockSystem {
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub block_size: usize,
    pub block_count: usize,
}

impl BlockSystem {
    /// Canonicalizes arbitrary labels. Returns `None` if blocks differ in size.
    pub fn from_labels(labels: &[usize]) -> Option<Self> {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (point, label) in labels.iter().enumerate() {
            let id = *remap.entry(*label).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(point);
            block_of.push(id);
        }
        let block_size = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != block_size) {
            return None;
        }
        Some(BlockSystem {
            block_count: blocks.len(),
            block_of,
            blocks,
            block_size,
        })
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Option<Self> {
        let mut labels = vec![usize::MAX; n];
        for (id, block) in blocks.iter().enumerate() {
            for &p in block {
                if p >= n || labels[p] != usize::MAX {
                    return None;
                }
                labels[p] = id;
            }
        }
        if labels.contains(&usize::MAX) {
            return None;
        }
        Self::from_labels(&labels)
    }

    pub fn degree(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.block_size <= 1 || self.block_count <= 1
    }

    /// Every generator maps blocks onto blocks.
    pub fn is_invariant(&self, generators: &[Permutation]) -> bool {
        generators.iter().all(|g| {
            self.blocks.iter().all(|block| {
                let target = self.block_of[g.apply(block[0])];
                block.iter().all(|&p| self.block_of[g.apply(p)] == target)
            })
        })
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &BlockSystem) -> Option<BlockSystem> {
        let mut uf = UnionFind::new(self.degree());
        for block in self.blocks.iter().chain(&other.blocks) {
            for &p in &block[1..] {
                uf.union(block[0], p);
            }
        }
        Self::from_labels(&uf.labels())
    }

    /// Blocks as 1-indexed label lists, for reports.
    pub fn one_indexed(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|p| p + 1).collect()).collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already merged.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

/// The finest block system in which `a` and `b` share a block (Atkinson).
pub fn minimal_block(generators: &[Permutation], degree: usize, a: usize, b: usize) -> Option<BlockSystem> {
    let mut uf = UnionFind::new(degree);
    uf.union(a, b);
    let mut queue = vec![(a, b)];
    while let Some((x, y)) = queue.pop() {
        for g in generators {
            let (gx, gy) = (g.apply(x), g.apply(y));
            let (rx, ry) = (uf.find(gx), uf.find(gy));
            if rx != ry {
                uf.union(rx, ry);
                queue.push((rx, ry));
            }
        }
    }
    BlockSystem::from_labels(&uf.labels())
}

/// Every nontrivial block system of a transitive group, sorted by block size
/// and then lexicographically. Intransitive groups yield an empty list.
pub fn all_block_systems(group: &PermGroup) -> Vec<BlockSystem> {
    let n = group.degree();
    if n < 4 || !group.is_transitive() {
        return Vec::new();
    }
    let mut found: HashSet<BlockSystem> = HashSet::new();
    for j in 1..n {
        if let Some(system) = minimal_block(group.generators(), n, 0, j) {
            if !system.is_trivial() {
                found.insert(system);
            }
        }
    }
    let mut frontier: Vec<BlockSystem> = found.iter().cloned().collect();
    while !frontier.is_empty() {
        let current: Vec<BlockSystem> = found.iter().cloned().collect();
        let mut next = Vec::new();
        for a in &frontier {
            for b in &current {
                if let Some(j) = a.join(b) {
                    if !j.is_trivial() && found.insert(j.clone()) {
                        next.push(j);
                    }
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<BlockSystem> = found.into_iter().collect();
    out.sort_by(|x, y| x.block_size.cmp(&y.block_size).then_with(|| x.blocks.cmp(&y.blocks)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupDescriptor {
    pub order: u128,
    pub generators: Vec<Permutation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NormalSubgroups {
    Listed { subgroups: Vec<SubgroupDescriptor> },
    Declined { group_order: u128, cap: u128 },
}

impl NormalSubgroups {
    pub fn orders(&self) -> Option<Vec<u128>> {
        match self {
            NormalSubgroups::Listed { subgroups } => Some(subgroups.iter().map(|s| s.order).collect()),
            NormalSubgroups::Declined { .. } => None,
        }
    }
}

/// Conjugacy classes as lists of element indices, in order of first element.
pub fn conjugacy_classes(group: &PermGroup) -> Option<Vec<Vec<usize>>> {
    let elements = group.elements()?;
    let index: HashMap<&Permutation, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let inverses: Vec<Permutation> = group.generators().iter().map(Permutation::inverse).collect();
    let mut class_of = vec![usize::MAX; elements.len()];
    let mut classes = Vec::new();
    for start in 0..elements.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[start] = id;
        let mut members = vec![start];
        let mut i = 0;
        while i < members.len() {
            let x = &elements[members[i]];
            for (g, gi) in group.generators().iter().zip(&inverses) {
                let y = gi.then(x).then(g);
                let j = index[&y];
                if class_of[j] == usize::MAX {
                    class_of[j] = id;
                    members.push(j);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        classes.push(members);
    }
    Some(classes)
}

/// Normal subgroups, enumerated as joins of normal closures of conjugacy
/// classes. Declines when the group is too large to materialize.
pub fn normal_subgroups(group: &PermGroup, cap: u128) -> NormalSubgroups {
    let classes = if group.order() <= cap {
        conjugacy_classes(group)
    } else {
        None
    };
    let Some(classes) = classes else {
        return NormalSubgroups::Declined {
            group_order: group.order(),
            cap,
        };
    };
    let elements = group.elements().expect("materialized above");
    let n = group.degree();
    let reps: Vec<&Permutation> = classes.iter().map(|c| &elements[c[0]]).collect();

    struct Candidate {
        generators: Vec<Permutation>,
        table: SimsTable,
    }
    let membership = |table: &SimsTable| -> Vec<bool> { reps.iter().map(|r| table.contains(r)).collect() };
    let close = |seed: &[Permutation], extra: &[&Permutation]| -> Candidate {
        let mut table = SimsTable::from_generators(n, seed);
        let mut generators = seed.to_vec();
        for g in extra {
            if !table.contains(g) {
                table.insert(g);
                generators.push((*g).clone());
            }
        }
        Candidate { generators, table }
    };

    let mut seen: HashMap<Vec<bool>, Candidate> = HashMap::new();
    let trivial = close(&[], &[]);
    seen.insert(membership(&trivial.table), trivial);
    let mut frontier: Vec<Vec<bool>> = Vec::new();
    for class in &classes {
        let members: Vec<&Permutation> = class.iter().map(|&i| &elements[i]).collect();
        let candidate = close(&[], &members);
        let key = membership(&candidate.table);
        if let Entry::Vacant(slot) = seen.entry(key.clone()) {
            frontier.push(key);
            slot.insert(candidate);
        }
    }
    while !frontier.is_empty() {
        let keys: Vec<Vec<bool>> = seen.keys().cloned().collect();
        let mut next = Vec::new();
        for a in &frontier {
            for b in &keys {
                let ga = &seen[a].generators;
                let gb: Vec<&Permutation> = seen[b].generators.iter().collect();
                let candidate = close(ga, &gb);
                let key = membership(&candidate.table);
                if let Entry::Vacant(slot) = seen.entry(key.clone()) {
                    next.push(key);
                    slot.insert(candidate);
                }
            }
        }
        frontier = next;
    }
    let mut subgroups: Vec<SubgroupDescriptor> = seen
        .into_values()
        .map(|c| SubgroupDescriptor {
            order: c.table.order(),
            generators: c.generators,
        })
        .collect();
    subgroups.sort_by(|x, y| x.order.cmp(&y.order).then_with(|| x.generators.cmp(&y.generators)));
    NormalSubgroups::Listed { subgroups }
}
