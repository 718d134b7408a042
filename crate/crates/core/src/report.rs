//! Serializable summaries of an analysis, as printed by the command line tool.

use std::time::Instant;

use serde::Serialize;

use crate::config::Config;
use crate::error::Result;
use crate::factorizer::{self, Factorization, FactorizationReport, Timings};
use crate::permgroup::{normal_subgroups, BlockSystem, NormalSubgroups, Permutation};
use crate::product::{BlaschkeProduct, MobiusAuto};
use crate::ComplexPoint;

#[derive(Clone, Debug, Serialize)]
pub struct BlockSystemSummary {
    /// Blocks of branch labels, counted from 1.
    pub blocks: Vec<Vec<usize>>,
    pub block_size: usize,
    pub block_count: usize,
}

impl From<&BlockSystem> for BlockSystemSummary {
    fn from(s: &BlockSystem) -> Self {
        BlockSystemSummary {
            blocks: s.one_indexed(),
            block_size: s.block_size,
            block_count: s.block_count,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationSummary {
    pub outer: BlaschkeProduct,
    pub inner: BlaschkeProduct,
    pub block_system: Vec<Vec<usize>>,
    pub block_size: usize,
    pub block_count: usize,
    pub residual: f64,
    pub canonical: bool,
}

impl From<&Factorization> for FactorizationSummary {
    fn from(f: &Factorization) -> Self {
        FactorizationSummary {
            outer: f.outer.clone(),
            inner: f.inner.clone(),
            block_system: f.source_system.one_indexed(),
            block_size: f.source_system.block_size,
            block_count: f.source_system.block_count,
            residual: f.residual,
            canonical: f.canonical,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemFailure {
    pub block_system: Vec<Vec<usize>>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromySummary {
    pub base_point: ComplexPoint,
    pub base_fiber: Vec<ComplexPoint>,
    /// Critical values in loop order.
    pub punctures: Vec<ComplexPoint>,
    pub loop_radii: Vec<f64>,
    /// Generators in cycle notation on labels counted from 1.
    pub generators: Vec<String>,
    /// The same generators as image arrays on labels counted from 0.
    pub generator_images: Vec<Permutation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub order: u128,
    pub transitive: bool,
    pub abelian: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisTimings {
    #[serde(flatten)]
    pub stages: Timings,
    pub normal_subgroups: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub degree: usize,
    pub input: BlaschkeProduct,
    pub normalized: BlaschkeProduct,
    pub automorphism: MobiusAuto,
    pub critical_points: Vec<ComplexPoint>,
    pub critical_values: Vec<ComplexPoint>,
    pub multiplicity_map: Vec<Vec<usize>>,
    pub monodromy: MonodromySummary,
    pub group: GroupSummary,
    pub block_systems: Vec<BlockSystemSummary>,
    pub normal_subgroups: NormalSubgroups,
    pub factorizations: Vec<FactorizationSummary>,
    pub errors: Vec<SystemFailure>,
    pub timings_ms: AnalysisTimings,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorOutput {
    pub degree: usize,
    pub factorizations: Vec<FactorizationSummary>,
    pub errors: Vec<SystemFailure>,
    pub timings_ms: AnalysisTimings,
}

fn failures(report: &FactorizationReport) -> Vec<SystemFailure> {
    report
        .errors
        .iter()
        .map(|e| SystemFailure {
            block_system: e.block_system.one_indexed(),
            message: e.message.clone(),
        })
        .collect()
}

pub fn analyze(b: &BlaschkeProduct, cfg: &Config) -> Result<AnalysisReport> {
    let start = Instant::now();
    let report = factorizer::factorize_all(b, cfg)?;
    let clock = Instant::now();
    let normal = normal_subgroups(&report.group, cfg.enumeration_cap);
    let normal_ms = clock.elapsed().as_secs_f64() * 1e3;
    let mono = &report.monodromy;
    Ok(AnalysisReport {
        degree: b.degree(),
        input: b.clone(),
        normalized: report.normalized.clone(),
        automorphism: report.automorphism,
        critical_points: report.critical.critical_points.clone(),
        critical_values: report.critical.critical_values.clone(),
        multiplicity_map: report.critical.multiplicity_map.clone(),
        monodromy: MonodromySummary {
            base_point: mono.base_point,
            base_fiber: mono.base_fiber.clone(),
            punctures: mono.punctures.clone(),
            loop_radii: mono.loop_radii.clone(),
            generators: mono.generators.iter().map(Permutation::cycle_notation).collect(),
            generator_images: mono.generators.clone(),
        },
        group: GroupSummary {
            order: report.group.order(),
            transitive: report.group.is_transitive(),
            abelian: report.group.is_abelian(),
        },
        block_systems: report.block_systems.iter().map(BlockSystemSummary::from).collect(),
        normal_subgroups: normal,
        factorizations: report.factorizations.iter().map(FactorizationSummary::from).collect(),
        errors: failures(&report),
        timings_ms: AnalysisTimings {
            stages: report.timings.clone(),
            normal_subgroups: normal_ms,
            total: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

pub fn factor(b: &BlaschkeProduct, cfg: &Config) -> Result<FactorOutput> {
    let start = Instant::now();
    let report = factorizer::factorize_all(b, cfg)?;
    Ok(FactorOutput {
        degree: b.degree(),
        factorizations: report.factorizations.iter().map(FactorizationSummary::from).collect(),
        errors: failures(&report),
        timings_ms: AnalysisTimings {
            stages: report.timings.clone(),
            normal_subgroups: 0.0,
            total: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}
