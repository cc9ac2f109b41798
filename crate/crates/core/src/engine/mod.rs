//! Interval estimation of channel complexities and related norms.
//!
//! Lower bounds are values of explicit witnesses; upper bounds are named
//! certificates. Nothing here returns a bare point estimate.

mod complexity;
mod diamond;
mod entropy;
mod index;
mod lmo;
mod norms;
mod sdp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::resource::NormVariant;

pub use complexity::{
    cb_complexity_estimate, complexity_estimate, evaluate_witness, expected_length,
    group_mixture_length, tensor_additivity, tensor_witness, TensorAdditivityReport,
};
pub use diamond::{diamond_norm, DiamondResult};
pub use entropy::{entropy_transport_check, relative_entropy, EntropyReport, LambdaSource};
pub use index::{subalgebra_index, IndexInterval};
pub use lmo::LmoMethod;
pub use norms::{inf_to_inf_norm, wasserstein_norm, NormInterval};

/// A named upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
}

impl Certificate {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Certified interval for a complexity-type quantity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Mean-zero observable in the unit Lipschitz ball attaining `lower`,
    /// living on `witness_level` ancilla copies.
    pub witness: ComplexMatrix,
    pub witness_level: usize,
    pub certificates: Vec<Certificate>,
    pub iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub levels: Vec<usize>,
    pub warnings: Vec<String>,
}

impl ComplexityEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn certificate(&self, name: &str) -> Option<f64> {
        self.certificates
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }

    /// Smallest certificate value.
    pub fn certificate_min(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| c.value)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Random restarts per ancilla level.
    pub restarts: usize,
    /// Outer alternating-maximization iterations per restart.
    pub max_iter: usize,
    /// Iteration cap of the inner linear maximization.
    pub lmo_iter: usize,
    pub lmo: LmoMethod,
    /// Initial step scale for projected ascent.
    pub step: f64,
    /// Ancilla levels for complete estimates; empty means `{1, 2, d}`.
    pub levels: Vec<usize>,
    pub tol: f64,
    pub seed: u64,
    pub variant: NormVariant,
    /// Extra upper bounds known to the caller.
    pub certificates: Vec<Certificate>,
    /// Extra starting observables (any ancilla level).
    #[serde(skip)]
    pub candidates: Vec<ComplexMatrix>,
}

impl SolveOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            restarts: 6,
            max_iter: 60,
            lmo_iter: 4000,
            lmo: LmoMethod::Admm,
            step: 1.0,
            levels: Vec::new(),
            tol: 1e-9,
            seed,
            variant: NormVariant::Inf,
            certificates: Vec::new(),
            candidates: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 || self.lmo_iter == 0 {
            return Err(Error::input("restarts and iteration caps must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) || !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::input("tolerance and step must be positive"));
        }
        if self.levels.contains(&0) {
            return Err(Error::input("ancilla levels must be at least 1"));
        }
        if self.certificates.iter().any(|c| c.value.is_nan() || c.value < 0.0) {
            return Err(Error::input("caller certificates must be non-negative"));
        }
        Ok(())
    }
}
