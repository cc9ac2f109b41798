use serde::{Deserialize, Serialize};

use super::{expected_length, subalgebra_index, wasserstein_norm, SolveOptions};
use crate::dynamics::{empirical_mlsi, make_semigroup, SemigroupKind};
use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix};
use crate::resource::{LipschitzStructure, NormVariant, ResourceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaSource {
    Supplied,
    /// Estimated from finite differences; not a certified constant.
    Empirical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyReport {
    pub relative_entropy: f64,
    pub wasserstein_lower: f64,
    pub wasserstein_upper: f64,
    pub lambda: f64,
    pub lambda_source: LambdaSource,
    /// `4 sqrt(2 D / λ)`.
    pub transport_bound: f64,
    pub transport_holds: bool,
    pub expected_length_lower: f64,
    pub index_upper: f64,
    /// `4 sqrt(2 |Δ| log Ind / λ)`.
    pub length_bound: f64,
    pub length_holds: bool,
    /// Only true when `λ` was supplied.
    pub certified: bool,
}

/// `tr ρ (log ρ - log σ)` in nats, with `0 log 0 = 0`.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let (rv, rvec) = eigh(rho);
    let (sv, svec) = eigh(sigma);
    let rtop = rv.first().copied().unwrap_or(0.0).max(1e-300);
    let stop = sv.first().copied().unwrap_or(0.0).max(1e-300);
    let mut out = 0.0;
    for (i, &p) in rv.iter().enumerate() {
        if p <= 1e-14 * rtop {
            continue;
        }
        out += p * p.ln();
        let ri = rvec.column(i);
        for (j, &q) in sv.iter().enumerate() {
            let overlap = crate::linalg::vdot(&svec.column(j), &ri).norm_sqr();
            if q <= 1e-14 * stop {
                if overlap * p > 1e-10 {
                    return Err(Error::input(
                        "relative entropy is infinite: support not contained",
                    ));
                }
                continue;
            }
            out -= p * overlap * q.ln();
        }
    }
    Ok(out.max(0.0))
}

pub(crate) fn check_state(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::input("state dimension mismatch"));
    }
    if !rho.is_hermitian(1e-9) {
        return Err(Error::input("state is not Hermitian"));
    }
    let (vals, _) = eigh(rho);
    if vals.last().copied().unwrap_or(0.0) < -1e-9 || (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::input("not a density matrix (PSD, trace one)"));
    }
    Ok(())
}

/// Consistency probe of the transport-entropy inequality
/// `||ρ - E ρ||_W ≤ 4 sqrt(2 D(ρ||Eρ)/λ)` and the matching expected-length
/// bound, for the gradient Lipschitz norm of a set of self-adjoint jumps.
pub fn entropy_transport_check(
    rho: &ComplexMatrix,
    structure: &LipschitzStructure,
    lambda: Option<f64>,
    opts: &SolveOptions,
) -> Result<EntropyReport> {
    let d = structure.dim();
    check_state(rho, d)?;
    if structure.resource().kind() != ResourceKind::Continuous {
        return Err(Error::input("entropy check needs self-adjoint jumps"));
    }
    let (lambda, source) = match lambda {
        Some(l) if l > 0.0 && l.is_finite() => (l, LambdaSource::Supplied),
        Some(_) => return Err(Error::input("MLSI constant must be positive")),
        None => {
            let family = make_semigroup(SemigroupKind::Lindblad, structure.resource(), None)?;
            (empirical_mlsi(&family)?, LambdaSource::Empirical)
        }
    };
    let e_rho = structure.e_fix().apply(rho, false)?;
    let relent = relative_entropy(rho, &e_rho)?;
    let diff = rho - &e_rho;
    let w = wasserstein_norm(&diff.hermitian_part(), structure, NormVariant::Gradient, opts)?;
    let transport_bound = 4.0 * (2.0 * relent / lambda).sqrt();

    let mut el_opts = opts.clone();
    el_opts.variant = NormVariant::Gradient;
    let el = expected_length(structure, &el_opts)?;
    let index = subalgebra_index(structure, opts)?;
    let jumps = structure.generators().len() as f64;
    let length_bound = 4.0 * (2.0 * jumps * index.upper.ln() / lambda).sqrt();
    Ok(EntropyReport {
        relative_entropy: relent,
        wasserstein_lower: w.lower,
        wasserstein_upper: w.upper,
        lambda,
        lambda_source: source,
        transport_bound,
        transport_holds: w.lower <= transport_bound + 1e-9,
        expected_length_lower: el.lower,
        index_upper: index.upper,
        length_bound,
        length_holds: el.lower <= length_bound + 1e-9,
        certified: source == LambdaSource::Supplied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, stream_rng};

    #[test]
    fn relative_entropy_examples() {
        let mut rng = stream_rng(8, 0);
        let rho = random_density(3, &mut rng);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);
        let mixed = ComplexMatrix::identity(3).scale_re(1.0 / 3.0);
        let dv = relative_entropy(&rho, &mixed).unwrap();
        assert!(dv <= 3f64.ln() + 1e-12);
        let pure = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!((relative_entropy(&pure, &half).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(relative_entropy(&half, &pure).is_err());
    }
}
