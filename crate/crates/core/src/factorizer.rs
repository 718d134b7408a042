//! Factorizations `B = J ∘ b` from block systems of the monodromy group, and
//! block systems back from a given inner factor.
//!
//! Synthesis works on the normalized product `Bn = m ∘ B` (so `Bn(0) = 0`):
//! the block system is carried from the base fiber to the zero fiber by
//! continuation, the block holding 0 becomes the zero set of `b`, and the
//! images of the other blocks under `b` become the zeros of `J`. The outer
//! factor is finally postcomposed with `m⁻¹` so the pair factors `B` itself.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::monodromy::{self, FiberTracker, MonodromyResult};
use crate::permgroup::{all_block_systems, BlockSystem, PermGroup};
use crate::polyroots::{self, CriticalData};
use crate::product::{self, canonical_lambda, compose, BlaschkeProduct, MobiusAuto};
use crate::ComplexPoint;

/// Inner values of two branches closer than this put them in one block.
const BRANCH_MATCH: f64 = 1e-7;
/// Allowed spread of the inner factor over a block of the zero fiber.
const BLOCK_SPREAD: f64 = 1e-9;
const MOBIUS_FIT: f64 = 1e-7;
const CANONICAL_TOL: f64 = 1e-10;
const SIMPLE_ZERO_SEPARATION: f64 = 1e-6;
const ORIGIN_SNAP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factorization {
    pub outer: BlaschkeProduct,
    pub inner: BlaschkeProduct,
    pub source_system: BlockSystem,
    pub residual: f64,
    pub canonical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemError {
    pub block_system: BlockSystem,
    pub message: String,
}

/// Everything the pipeline learns on the way to the factorizations.
#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub normalized: BlaschkeProduct,
    pub automorphism: MobiusAuto,
    pub critical: CriticalData,
    pub monodromy: MonodromyResult,
    pub group: PermGroup,
    pub block_systems: Vec<BlockSystem>,
    pub factorizations: Vec<Factorization>,
    pub errors: Vec<SystemError>,
    pub timings: Timings,
}

/// Wall-clock milliseconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub critical: f64,
    pub monodromy: f64,
    pub group: f64,
    pub synthesis: f64,
}

type FactorPair = (BlaschkeProduct, BlaschkeProduct);

fn elapsed_ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// A fiber whose entry `i` continues base branch `i`, with its block id.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledFiber {
    pub target: ComplexPoint,
    pub points: Vec<ComplexPoint>,
    pub block_of: Vec<usize>,
}

impl LabeledFiber {
    pub fn blocks(&self) -> Vec<Vec<ComplexPoint>> {
        let count = self.block_of.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (p, &b) in self.points.iter().zip(&self.block_of) {
            out[b].push(*p);
        }
        out
    }
}

pub fn transport_partition(
    b: &BlaschkeProduct,
    mono: &MonodromyResult,
    system: &BlockSystem,
    target: ComplexPoint,
    cfg: &Config,
) -> Result<LabeledFiber> {
    let path = monodromy::admissible_path(&mono.punctures, &mono.loop_radii, mono.base_point, target);
    transport_partition_along(b, mono, system, &path, cfg)
}

/// Like [`transport_partition`] along an explicit path that starts at the base point.
pub fn transport_partition_along(
    b: &BlaschkeProduct,
    mono: &MonodromyResult,
    system: &BlockSystem,
    path: &[ComplexPoint],
    cfg: &Config,
) -> Result<LabeledFiber> {
    let (Some(&first), Some(&target)) = (path.first(), path.last()) else {
        return Err(Error::Precondition("empty transport path".into()));
    };
    if first != mono.base_point {
        return Err(Error::Precondition(
            "transport path must start at the base point".into(),
        ));
    }
    if system.degree() != mono.degree() {
        return Err(Error::Precondition(
            "block system degree differs from the fiber size".into(),
        ));
    }
    if mono.punctures.contains(&target) {
        return Err(Error::Precondition(format!(
            "transport target {target} is a critical value"
        )));
    }
    let points = FiberTracker::new(b, cfg).track(path, &mono.base_fiber)?;
    Ok(LabeledFiber {
        target,
        points,
        block_of: system.block_of.clone(),
    })
}

/// Blocks of the zero fiber of `bn`, as exact zeros of `bn`, with the block
/// holding the origin first.
pub fn zero_fiber_blocks(
    bn: &BlaschkeProduct,
    mono: &MonodromyResult,
    system: &BlockSystem,
    cfg: &Config,
) -> Result<Vec<Vec<ComplexPoint>>> {
    let origin = Complex64::new(0.0, 0.0);
    if bn.value(origin)?.norm() > 1e-12 {
        return Err(Error::Precondition("product is not normalized to B(0) = 0".into()));
    }
    if monodromy::min_pairwise(bn.zeros()) <= SIMPLE_ZERO_SEPARATION {
        return Err(Error::Precondition(
            "zero fiber is degenerate (repeated zeros); use the conjugation workflow".into(),
        ));
    }
    let labeled = transport_partition(bn, mono, system, origin, cfg)?;
    let matched = monodromy::match_fibers(bn.zeros(), &labeled.points, origin)?;
    let mut blocks = vec![Vec::new(); system.block_count];
    for (label, &block) in labeled.block_of.iter().enumerate() {
        blocks[block].push(bn.zeros()[matched.apply(label)]);
    }
    let holding_origin = blocks
        .iter()
        .position(|b| b.iter().any(|z| z.re == 0.0 && z.im == 0.0))
        .ok_or_else(|| Error::Internal("no block holds the origin".into()))?;
    blocks.swap(0, holding_origin);
    Ok(blocks)
}

/// Inner factor of a simple-zero normalized product: the Blaschke product
/// whose zeros are the zero-fiber block holding the origin, in canonical gauge.
pub fn build_inner(
    bn: &BlaschkeProduct,
    mono: &MonodromyResult,
    system: &BlockSystem,
    cfg: &Config,
) -> Result<BlaschkeProduct> {
    let blocks = zero_fiber_blocks(bn, mono, system, cfg)?;
    inner_from_block(&blocks[0])
}

fn inner_from_block(block: &[ComplexPoint]) -> Result<BlaschkeProduct> {
    BlaschkeProduct::new(canonical_lambda(block), block.to_vec())
}

/// Outer factor with zeros `inner(block)` for each zero-fiber block, and its
/// residual against `bn` on the verification grid.
pub fn build_outer(
    bn: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    blocks: &[Vec<ComplexPoint>],
    cfg: &Config,
) -> Result<(BlaschkeProduct, f64)> {
    let grid = verification_grid(cfg);
    let mut direct_ok = true;
    let mut zeros = Vec::with_capacity(blocks.len());
    for block in blocks {
        let values = block.iter().map(|z| inner.value(*z)).collect::<Result<Vec<_>>>()?;
        let spread = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
        if spread > BLOCK_SPREAD {
            direct_ok = false;
        }
        zeros.push(values[0]);
    }
    let mut best = f64::INFINITY;
    if direct_ok {
        if let Ok(outer) = BlaschkeProduct::new(Complex64::new(1.0, 0.0), zeros)
            .and_then(|unit| match_constant(bn, &unit, inner, &grid))
        {
            let r = residual(bn, &outer, inner, &grid)?;
            if r <= cfg.residual {
                return Ok((outer, r));
            }
            best = r;
        }
    }
    if let Some(outer) = least_squares_outer(bn, inner, blocks.len(), &grid) {
        let r = residual(bn, &outer, inner, &grid)?;
        if r <= cfg.residual {
            return Ok((outer, r));
        }
        best = best.min(r);
    }
    Err(Error::Synthesis { best_residual: best })
}

/// Sets the constant of `unit` so that `outer ∘ inner` matches `target` at the
/// grid point where the unit-constant composition is largest.
fn match_constant(
    target: &BlaschkeProduct,
    unit: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    grid: &[ComplexPoint],
) -> Result<BlaschkeProduct> {
    let mut best = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for z in grid {
        let v = unit.value(inner.value(*z)?)?;
        if v.norm() > best.1.norm() {
            best = (*z, v);
        }
    }
    let raw = target.value(best.0)? / best.1;
    BlaschkeProduct::new(raw / raw.norm(), unit.zeros().to_vec())
}

/// Linearized rational fit `P(u) - v Q(u) = 0` of degree `degree` on pairs
/// `(inner(z), bn(z))`, converted back to zero/constant form.
fn least_squares_outer(
    bn: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    degree: usize,
    grid: &[ComplexPoint],
) -> Option<BlaschkeProduct> {
    let pairs: Vec<(Complex64, Complex64)> = grid
        .iter()
        .filter_map(|z| Some((inner.value(*z).ok()?, bn.value(*z).ok()?)))
        .collect();
    let cols = 2 * degree + 1;
    let a = DMatrix::from_fn(pairs.len(), cols, |r, c| {
        let (u, v) = pairs[r];
        if c <= degree {
            u.powi(c as i32)
        } else {
            -v * u.powi((c - degree) as i32)
        }
    });
    let rhs = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.1));
    let solution = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let numerator: Vec<Complex64> = (0..=degree).map(|i| solution[i]).collect();
    let zeros = polyroots::all_roots_with_budget(&numerator, 500, 1e-10).ok()?;
    if zeros.len() != degree {
        return None;
    }
    let unit = BlaschkeProduct::new(Complex64::new(1.0, 0.0), zeros).ok()?;
    match_constant(bn, &unit, inner, grid).ok()
}

/// Radii {0.3, 0.6, 0.9} times `grid` equispaced angles, plus `grid` seeded
/// random points of the open disk.
pub fn verification_grid(cfg: &Config) -> Vec<ComplexPoint> {
    let mut out = Vec::with_capacity(4 * cfg.grid);
    for radius in [0.3, 0.6, 0.9] {
        for k in 0..cfg.grid {
            out.push(Complex64::from_polar(
                radius,
                std::f64::consts::TAU * k as f64 / cfg.grid as f64,
            ));
        }
    }
    out.extend(random_disk_points(cfg.seed, cfg.grid, 1.0));
    out
}

/// Uniform points of the disk of the given radius, by rejection.
pub fn random_disk_points(seed: u64, count: usize, radius: f64) -> Vec<ComplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() < radius {
            out.push(z);
        }
    }
    out
}

/// `sup |B(z) - J(b(z))|` over `grid`.
pub fn residual(
    b: &BlaschkeProduct,
    outer: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    grid: &[ComplexPoint],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in grid {
        let diff = (b.value(*z)? - outer.value(inner.value(*z)?)?).norm();
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// The block system of the base fiber induced by a candidate inner factor:
/// branches `i ~ j` when `inner` agrees on them.
pub fn branch_partition(b: &BlaschkeProduct, mono: &MonodromyResult, inner: &BlaschkeProduct) -> Result<BlockSystem> {
    let n = mono.degree();
    let k = inner.degree();
    if b.degree() != n || !n.is_multiple_of(k) {
        return Err(Error::NotAFactorization(format!(
            "inner degree {k} does not divide degree {n}"
        )));
    }
    let values = mono
        .base_fiber
        .iter()
        .map(|z| inner.value(*z))
        .collect::<Result<Vec<_>>>()?;
    let mut labels: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if (values[i] - values[j]).norm() <= BRANCH_MATCH {
                labels[i] = labels[j];
                break;
            }
        }
    }
    let system = BlockSystem::from_labels(&labels)
        .ok_or_else(|| Error::NotAFactorization("inner factor induces unequal blocks".into()))?;
    if system.block_size != k {
        return Err(Error::NotAFactorization(format!(
            "blocks have size {}, inner degree is {k}",
            system.block_size
        )));
    }
    if !system.is_invariant(&mono.generators) {
        return Err(Error::NotAFactorization(
            "induced partition is not respected by the monodromy group".into(),
        ));
    }
    Ok(system)
}

/// Least-squares fit of `v = (a u + b) / (c u + 1)`; returns the coefficients
/// and the worst pointwise misfit.
pub fn fit_mobius(us: &[ComplexPoint], vs: &[ComplexPoint]) -> Option<([Complex64; 3], f64)> {
    let a = DMatrix::from_fn(us.len(), 3, |r, c| match c {
        0 => us[r],
        1 => Complex64::new(1.0, 0.0),
        _ => -us[r] * vs[r],
    });
    let rhs = DVector::from_column_slice(vs);
    let x = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let coeffs = [x[0], x[1], x[2]];
    let misfit = us
        .iter()
        .zip(vs)
        .map(|(u, v)| ((coeffs[0] * u + coeffs[1]) / (coeffs[2] * u + 1.0) - v).norm())
        .fold(0.0, f64::max);
    misfit.is_finite().then_some((coeffs, misfit))
}

/// Worst misfit of `second ≈ m ∘ first` over a fixed sample of the disk.
pub fn mobius_distance(first: &BlaschkeProduct, second: &BlaschkeProduct) -> f64 {
    let samples = random_disk_points(0x5eed, 20, 0.9);
    let us: Option<Vec<_>> = samples.iter().map(|z| first.value(*z).ok()).collect();
    let vs: Option<Vec<_>> = samples.iter().map(|z| second.value(*z).ok()).collect();
    match (us, vs) {
        (Some(us), Some(vs)) => fit_mobius(&us, &vs).map_or(f64::INFINITY, |f| f.1),
        _ => f64::INFINITY,
    }
}

/// Same block system, confirmed by a Möbius fit between the inner factors.
pub fn equivalent(f1: &Factorization, f2: &Factorization) -> bool {
    f1.source_system == f2.source_system
        && f1.inner.degree() == f2.inner.degree()
        && mobius_distance(&f1.inner, &f2.inner) <= MOBIUS_FIT
}

pub fn factorize_all(b: &BlaschkeProduct, cfg: &Config) -> Result<FactorizationReport> {
    factorize(b, cfg, true)
}

fn factorize(b: &BlaschkeProduct, cfg: &Config, allow_conjugation: bool) -> Result<FactorizationReport> {
    let n = b.degree();
    if n < 2 {
        return Err(Error::Precondition("factorization needs degree >= 2".into()));
    }
    if n > cfg.max_degree {
        return Err(Error::Declined(format!(
            "degree {n} exceeds the supported maximum {}",
            cfg.max_degree
        )));
    }
    let mut timings = Timings::default();
    let clock = Instant::now();
    let (bn, m) = product::normalize_to_zero(b, cfg)?;
    // Taken from the input: when 0 is critical for `b`, the zeros of `bn` come
    // from a degenerate fiber and would split its critical values.
    let mut critical = polyroots::critical_data(b, cfg)?;
    for v in &mut critical.critical_values {
        *v = m.apply(*v);
    }
    timings.critical = elapsed_ms(clock);
    let clock = Instant::now();
    let mono = monodromy::monodromy_from_critical_data(&bn, &critical, cfg)?;
    timings.monodromy = elapsed_ms(clock);
    let clock = Instant::now();
    let group = PermGroup::generate(&mono.generators, n, cfg.enumeration_cap)?;
    let block_systems = all_block_systems(&group);
    timings.group = elapsed_ms(clock);
    let clock = Instant::now();

    let mut factorizations = Vec::new();
    let mut errors = Vec::new();
    for (system, result) in synthesize_systems(b, &bn, &m, &mono, &block_systems, cfg, allow_conjugation)? {
        match result {
            Ok(f) => factorizations.push(f),
            Err(e) => errors.push(SystemError {
                block_system: system,
                message: e.to_string(),
            }),
        }
    }
    factorizations.sort_by(|x, y| {
        x.inner
            .degree()
            .cmp(&y.inner.degree())
            .then_with(|| x.source_system.blocks.cmp(&y.source_system.blocks))
    });
    timings.synthesis = elapsed_ms(clock);
    Ok(FactorizationReport {
        normalized: bn,
        automorphism: m,
        critical,
        monodromy: mono,
        group,
        block_systems,
        factorizations,
        errors,
        timings,
    })
}

/// Re-runs synthesis for one block system of an existing report.
pub fn synthesize(
    b: &BlaschkeProduct,
    report: &FactorizationReport,
    system: &BlockSystem,
    cfg: &Config,
) -> Result<Factorization> {
    if !system.is_invariant(&report.monodromy.generators) || system.is_trivial() {
        return Err(Error::Precondition(
            "not a nontrivial block system of the monodromy group".into(),
        ));
    }
    let systems = [system.clone()];
    synthesize_systems(
        b,
        &report.normalized,
        &report.automorphism,
        &report.monodromy,
        &systems,
        cfg,
        true,
    )?
    .into_iter()
    .map(|(_, r)| r)
    .next()
    .unwrap_or_else(|| Err(Error::Internal("no synthesis result".into())))
}

type SystemResult = (BlockSystem, Result<Factorization>);

fn synthesize_systems(
    b: &BlaschkeProduct,
    bn: &BlaschkeProduct,
    m: &MobiusAuto,
    mono: &MonodromyResult,
    systems: &[BlockSystem],
    cfg: &Config,
    allow_conjugation: bool,
) -> Result<Vec<SystemResult>> {
    let simple = monodromy::min_pairwise(bn.zeros()) > SIMPLE_ZERO_SEPARATION;
    let factors: Vec<(BlockSystem, Result<FactorPair>)> = if systems.is_empty() {
        Vec::new()
    } else if bn.is_monomial() {
        systems
            .iter()
            .map(|s| (s.clone(), monomial_factor(bn, mono, s)))
            .collect()
    } else if simple {
        systems
            .par_iter()
            .map(|s| (s.clone(), generic_factor(bn, mono, s, cfg)))
            .collect()
    } else if allow_conjugation {
        conjugated_factors(b, bn, mono, systems, cfg)?
    } else {
        return Err(Error::Degenerate("conjugated product still has repeated zeros".into()));
    };
    // conjugated pairs already factor `b`
    let undo = if bn.is_monomial() || simple {
        *m
    } else {
        MobiusAuto::identity()
    };
    let grid = verification_grid(cfg);
    Ok(factors
        .into_iter()
        .map(|(system, result)| {
            let f = result.and_then(|(outer, inner)| finish(b, &undo, outer, inner, system.clone(), &grid, cfg));
            (system, f)
        })
        .collect())
}

fn generic_factor(
    bn: &BlaschkeProduct,
    mono: &MonodromyResult,
    system: &BlockSystem,
    cfg: &Config,
) -> Result<FactorPair> {
    let blocks = zero_fiber_blocks(bn, mono, system, cfg)?;
    let inner = inner_from_block(&blocks[0])?;
    let (outer, _) = build_outer(bn, &inner, &blocks, cfg)?;
    Ok((outer, inner))
}

/// `lambda z^n = (lambda z^(n/k)) ∘ z^k`, checked against the block system.
fn monomial_factor(bn: &BlaschkeProduct, mono: &MonodromyResult, system: &BlockSystem) -> Result<FactorPair> {
    let one = Complex64::new(1.0, 0.0);
    let inner = BlaschkeProduct::monomial(system.block_size, one)?;
    let outer = BlaschkeProduct::monomial(system.block_count, bn.lambda())?;
    let induced = branch_partition(bn, mono, &inner)?;
    if &induced != system {
        return Err(Error::Internal(
            "monomial factor induces a different block system".into(),
        ));
    }
    Ok((outer, inner))
}

/// Repeated zeros: factor `b ∘ m_a` for a seeded automorphism `m_a` whose
/// normalized zero fiber is simple, then undo the conjugation. The returned
/// pairs factor `b` itself, not `bn`.
fn conjugated_factors(
    b: &BlaschkeProduct,
    bn: &BlaschkeProduct,
    mono: &MonodromyResult,
    systems: &[BlockSystem],
    cfg: &Config,
) -> Result<Vec<(BlockSystem, Result<FactorPair>)>> {
    let shift = conjugation_point(bn, mono, cfg)?;
    // z -> (z + p) / (1 + conj(p) z), sending 0 to p
    let ma = MobiusAuto {
        a: -shift,
        rot: Complex64::new(-1.0, 0.0),
    };
    let conjugated = compose(b, &ma.to_blaschke(), cfg)?;
    let report = factorize(&conjugated, cfg, false)?;
    let undo = ma.inverse().to_blaschke();
    let mut out: Vec<(BlockSystem, Result<FactorPair>)> = Vec::new();
    let mut failures = Vec::new();
    for f in &report.factorizations {
        let mapped = (|| {
            let shifted_inner = compose(&f.inner, &undo, cfg)?;
            let (inner, g) = product::canonicalize(&shifted_inner, cfg)?;
            let outer = compose(&f.outer, &g.inverse().to_blaschke(), cfg)?;
            let (inner, outer) = snap_inner_zeros(&inner, &outer, bn.zeros())?;
            let system = branch_partition(bn, mono, &inner)?;
            Ok::<_, Error>((system, outer, inner))
        })();
        match mapped {
            Ok((system, outer, inner)) => out.push((system, Ok((outer, inner)))),
            Err(e) => failures.push(e),
        }
    }
    for e in report.errors {
        failures.push(Error::Internal(format!("conjugated product: {}", e.message)));
    }
    for system in systems {
        if !out.iter().any(|(s, _)| s == system) {
            let error = failures
                .first()
                .cloned()
                .unwrap_or_else(|| Error::Internal("conjugated factorization did not reach this system".into()));
            out.push((system.clone(), Err(error)));
        }
    }
    out.retain(|(s, _)| systems.contains(s));
    Ok(out)
}

/// The zeros of a canonical inner factor are a sub-multiset of the zeros of
/// the normalized product. Snaps them there (those near 0 to exactly 0) and
/// turns the outer factor to absorb the resulting change of the constant.
fn snap_inner_zeros(inner: &BlaschkeProduct, outer: &BlaschkeProduct, targets: &[ComplexPoint]) -> Result<FactorPair> {
    let mut used = vec![false; targets.len()];
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    let origin = Complex64::new(0.0, 0.0);
    let targets: Vec<ComplexPoint> = targets
        .iter()
        .map(|t| if t.norm() <= ORIGIN_SNAP { origin } else { *t })
        .collect();
    for (i, z) in inner.zeros().iter().enumerate() {
        for (j, t) in targets.iter().enumerate() {
            pairs.push(((z - t).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut snapped: Vec<Option<ComplexPoint>> = vec![None; inner.degree()];
    for (d, i, j) in pairs {
        if snapped[i].is_none() && !used[j] && d <= ORIGIN_SNAP {
            snapped[i] = Some(targets[j]);
            used[j] = true;
        }
    }
    let zeros = snapped
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Internal("inner zeros are not zeros of the product".into()))?;
    let lambda = canonical_lambda(&zeros);
    let turn = lambda / inner.lambda();
    // J(u / t) has zeros t a_k and constant conj(t)^m lambda_J
    let outer = BlaschkeProduct::new(
        outer.lambda() * turn.conj().powi(outer.degree() as i32),
        outer.zeros().iter().map(|a| turn * a).collect(),
    )?;
    Ok((BlaschkeProduct::new(lambda, zeros)?, outer))
}

fn conjugation_point(bn: &BlaschkeProduct, mono: &MonodromyResult, cfg: &Config) -> Result<ComplexPoint> {
    let candidates = random_disk_points(cfg.seed ^ 0xc0ff_ee00, 64, 0.5);
    for p in candidates {
        let w = bn.value(p)?;
        let clear = mono.punctures.iter().all(|v| (v - w).norm() > 1e-3);
        if clear && monodromy::min_pairwise(&polyroots::fiber(bn, w, cfg)?) > SIMPLE_ZERO_SEPARATION {
            return Ok(p);
        }
    }
    Err(Error::Degenerate("no conjugation point with a simple fiber".into()))
}

/// Outer factor read off the zeros of `b`: each zero of `J` is `inner(a)` for
/// exactly `deg inner` zeros `a` of `b`, counted with multiplicity.
fn outer_from_input_zeros(
    b: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    grid: &[ComplexPoint],
) -> Option<BlaschkeProduct> {
    let k = inner.degree();
    let values: Vec<ComplexPoint> = b.zeros().iter().map(|a| inner.value(*a).ok()).collect::<Option<_>>()?;
    let mut taken = vec![false; values.len()];
    let mut zeros = Vec::with_capacity(values.len() / k);
    for i in 0..values.len() {
        if taken[i] {
            continue;
        }
        let mut nearest: Vec<(f64, usize)> = (0..values.len())
            .filter(|&j| !taken[j])
            .map(|j| ((values[j] - values[i]).norm(), j))
            .collect();
        nearest.sort_by(|x, y| x.0.total_cmp(&y.0));
        let group = nearest.get(..k)?;
        if group[k - 1].0 > BRANCH_MATCH {
            return None;
        }
        for &(_, j) in group {
            taken[j] = true;
        }
        zeros.push(group.iter().map(|&(_, j)| values[j]).sum::<Complex64>() / k as f64);
    }
    let unit = BlaschkeProduct::new(Complex64::new(1.0, 0.0), zeros).ok()?;
    match_constant(b, &unit, inner, grid).ok()
}

/// Postcomposes the outer factor with `m⁻¹` and verifies against `b`,
/// keeping the better of that and the outer factor read off the zeros of `b`.
fn finish(
    b: &BlaschkeProduct,
    m: &MobiusAuto,
    outer: BlaschkeProduct,
    inner: BlaschkeProduct,
    source_system: BlockSystem,
    grid: &[ComplexPoint],
    cfg: &Config,
) -> Result<Factorization> {
    if outer.degree() * inner.degree() != b.degree() || inner.degree() != source_system.block_size {
        return Err(Error::Internal("factor degrees do not match the block system".into()));
    }
    let composed = if *m == MobiusAuto::identity() {
        Some(outer)
    } else {
        compose(&m.inverse().to_blaschke(), &outer, cfg).ok()
    };
    let mut best: Option<(BlaschkeProduct, f64)> = None;
    for candidate in [composed, outer_from_input_zeros(b, &inner, grid)]
        .into_iter()
        .flatten()
    {
        let r = residual(b, &candidate, &inner, grid)?;
        if best.as_ref().is_none_or(|(_, old)| r < *old) {
            best = Some((candidate, r));
        }
    }
    let (outer, r) = best.ok_or(Error::Synthesis {
        best_residual: f64::INFINITY,
    })?;
    if r > cfg.residual {
        return Err(Error::Synthesis { best_residual: r });
    }
    Ok(Factorization {
        canonical: product::is_canonical(&inner, CANONICAL_TOL),
        outer,
        inner,
        source_system,
        residual: r,
    })
}
