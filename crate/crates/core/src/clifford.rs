//! Single-site Pauli resources on `n` qubits and the norm comparisons between
//! the resulting Lipschitz seminorm, the site-wise partial-trace norm and the
//! continuous resources obtained by taking logarithms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, partial_trace, paulis, spectral_norm, ComplexMatrix, SubsystemShape};
use crate::random::{ginibre, stream_rng};
use crate::resource::{embed, LipschitzStructure, ResourceSet};

pub const MAX_QUBITS: usize = 3;

#[derive(Clone, Debug)]
pub struct PauliResource {
    n: usize,
    /// `[σX_j, σY_j, σZ_j]` for each site `j`.
    sites: Vec<[ComplexMatrix; 3]>,
}

pub fn pauli_resources(n: usize) -> Result<PauliResource> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::input(format!("qubit count must be in 1..={MAX_QUBITS}, got {n}")));
    }
    let [_, x, y, z] = paulis();
    let dims = vec![2; n];
    let sites = (0..n)
        .map(|j| [embed(&x, j, &dims), embed(&y, j, &dims), embed(&z, j, &dims)])
        .collect();
    Ok(PauliResource { n, sites })
}

impl PauliResource {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn site(&self, j: usize) -> &[ComplexMatrix; 3] {
        &self.sites[j]
    }

    /// All `3n` generators, site by site.
    pub fn generators(&self) -> Vec<ComplexMatrix> {
        self.sites.iter().flat_map(|s| s.iter().cloned()).collect()
    }

    pub fn resource_set(&self) -> Result<ResourceSet> {
        ResourceSet::discrete(self.generators())
    }

    /// `sup_s ||[s, x]||` over the Pauli generators.
    pub fn lipschitz(&self, x: &ComplexMatrix) -> f64 {
        self.generators()
            .iter()
            .map(|s| spectral_norm(&commutator(s, x)))
            .fold(0.0, f64::max)
    }
}

fn check_dim(x: &ComplexMatrix, n: usize) -> Result<()> {
    if n == 0 || n > 16 || x.rows() != 1 << n || x.cols() != 1 << n {
        return Err(Error::input(format!(
            "matrix is {}x{}, expected 2^{n} square",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// Partial trace over qubit `j`, put back as `tr_j(x) ⊗ I_j / 2`.
pub fn site_partial_trace(x: &ComplexMatrix, n: usize, j: usize) -> Result<ComplexMatrix> {
    check_dim(x, n)?;
    if j >= n {
        return Err(Error::input("site index out of range"));
    }
    let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
    if keep.is_empty() {
        return Ok(ComplexMatrix::identity(2).scale(x.trace() * 0.5));
    }
    let red = partial_trace(x, &SubsystemShape::qubits(n), &keep)?;
    let dim = 1usize << n;
    let bit = n - 1 - j;
    let squeeze = |i: usize| {
        let high = i >> (bit + 1);
        let low = i & ((1 << bit) - 1);
        (high << bit) | low
    };
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        if (r >> bit) & 1 == (c >> bit) & 1 {
            red[(squeeze(r), squeeze(c))] * 0.5
        } else {
            crate::linalg::ZERO
        }
    }))
}

/// `(x + X_j x X_j + Y_j x Y_j + Z_j x Z_j) / 4`.
pub fn pauli_average(x: &ComplexMatrix, p: &PauliResource, j: usize) -> Result<ComplexMatrix> {
    check_dim(x, p.n)?;
    let mut out = x.clone();
    for s in p.site(j) {
        out += &(&(s * x) * s);
    }
    Ok(out.scale_re(0.25))
}

/// `||x||_L = sup_j ||x - tr_j x||`, with both realizations of `tr_j`
/// compared to `1e-10`.
pub fn l_norm(x: &ComplexMatrix, n: usize) -> Result<f64> {
    let p = pauli_resources(n)?;
    check_dim(x, n)?;
    let mut best: f64 = 0.0;
    for j in 0..n {
        let direct = site_partial_trace(x, n, j)?;
        let avg = pauli_average(x, &p, j)?;
        let gap = (&direct - &avg).max_abs();
        if gap > 1e-10 * x.max_abs().max(1.0) {
            return Err(Error::LemmaViolation(format!(
                "partial trace and Pauli average differ by {gap:.3e} at site {j}"
            )));
        }
        best = best.max(spectral_norm(&(x - &direct)));
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEquivalenceReport {
    pub qubits: usize,
    pub samples: usize,
    pub checked: usize,
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub seed: u64,
}

pub const EQUIVALENCE_SLACK: f64 = 1e-9;

/// Checks `¼ |||x|||_P ≤ ||x||_L ≤ ¾ |||x|||_P` on Ginibre samples and a
/// few fixed edge cases. A violation is an error carrying the sample.
pub fn norm_equivalence_check(samples: usize, n: usize, seed: u64) -> Result<NormEquivalenceReport> {
    let p = pauli_resources(n)?;
    let d = p.dim();
    let mut fixed = vec![ComplexMatrix::identity(d), p.site(0)[2].clone()];
    if n >= 2 {
        fixed.push(&p.site(0)[2] * &p.site(1)[2]);
    }
    let mut xs = fixed;
    xs.extend((0..samples).map(|i| ginibre(d, d, &mut stream_rng(seed, i as u64))));
    let ratios: Vec<Option<f64>> = xs
        .par_iter()
        .map(|x| -> Result<Option<f64>> {
            let lip = p.lipschitz(x);
            if lip <= 1e-12 {
                return Ok(None);
            }
            let l = l_norm(x, n)?;
            if 0.25 * lip > l + EQUIVALENCE_SLACK || l > 0.75 * lip + EQUIVALENCE_SLACK {
                return Err(Error::LemmaViolation(format!(
                    "norm equivalence fails: |||x|||_P = {lip}, ||x||_L = {l}, x = {:?}",
                    x.to_pairs()
                )));
            }
            Ok(Some(l / lip))
        })
        .collect::<Result<_>>()?;
    let checked: Vec<f64> = ratios.iter().flatten().copied().collect();
    Ok(NormEquivalenceReport {
        qubits: n,
        samples: xs.len(),
        checked: checked.len(),
        skipped: xs.len() - checked.len(),
        min_ratio: checked.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: checked.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        seed,
    })
}

/// Continuous resources `a_j = -i log c_j = π (I - c_j) / 2` on the principal
/// branch, for self-adjoint unitary generators `c_j`.
pub fn continuous_from_discrete(p: &PauliResource) -> Result<ResourceSet> {
    let d = p.dim();
    let id = ComplexMatrix::identity(d);
    let mut out = Vec::new();
    for c in p.generators() {
        if !c.is_hermitian(1e-12) || !c.is_unitary(1e-12) {
            return Err(Error::input("generator is not a self-adjoint unitary"));
        }
        out.push((&id - &c).scale_re(std::f64::consts::FRAC_PI_2));
    }
    ResourceSet::continuous(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionReport {
    pub qubits: usize,
    pub commutant_discrete: usize,
    pub commutant_continuous: usize,
    pub samples: usize,
    /// Largest observed `|||x|||_S - |||x|||_Δ`; non-positive when the
    /// contraction holds.
    pub max_excess: f64,
}

/// Compares discrete and logarithmic resources: equal commutants and
/// `|||x|||_S ≤ |||x|||_Δ` on samples.
pub fn verify_contraction(p: &PauliResource, samples: usize, seed: u64) -> Result<ContractionReport> {
    let discrete = LipschitzStructure::build(&p.resource_set()?)?;
    let continuous = LipschitzStructure::build(&continuous_from_discrete(p)?)?;
    let d = p.dim();
    let excess: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = ginibre(d, d, &mut stream_rng(seed, i as u64));
            let s = discrete.lipschitz_norm_unchecked(&x, crate::resource::NormVariant::Inf);
            let a = continuous.lipschitz_norm_unchecked(&x, crate::resource::NormVariant::Inf);
            s - a
        })
        .collect();
    let max_excess = excess.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max_excess > 1e-9 {
        return Err(Error::LemmaViolation(format!(
            "logarithmic resources fail to dominate: excess {max_excess:.3e}"
        )));
    }
    Ok(ContractionReport {
        qubits: p.n,
        commutant_discrete: discrete.commutant_basis().len(),
        commutant_continuous: continuous.commutant_basis().len(),
        samples,
        max_excess,
    })
}
