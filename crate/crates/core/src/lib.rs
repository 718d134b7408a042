//! Decomposition of finite Blaschke products `B = J ∘ b` through the
//! monodromy group of their inverse branches.
//!
//! The pipeline: critical values of `B` ([`polyroots::critical_data`]),
//! monodromy generators by fiber continuation around each critical value
//! ([`monodromy::monodromy_group`]), block systems of the generated group
//! ([`permgroup::all_block_systems`]), and one verified factorization per
//! block system ([`factorizer::factorize_all`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod factorizer;
pub mod json;
pub mod monodromy;
pub mod permgroup;
pub mod polyroots;
pub mod product;
pub mod report;

pub type ComplexPoint = num_complex::Complex64;

pub use config::Config;
pub use error::{Error, ErrorKind, Result};
pub use factorizer::{factorize_all, Factorization, FactorizationReport};
pub use monodromy::{monodromy_group, MonodromyResult};
pub use permgroup::{BlockSystem, PermGroup, Permutation};
pub use product::{compose, BlaschkeProduct, MobiusAuto, RationalPair};
