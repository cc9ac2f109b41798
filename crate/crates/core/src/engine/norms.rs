use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diamond::diamond_norm;
use super::lmo::{hs_radius, LiftedBall};
use super::SolveOptions;
use crate::channel::apply_superop;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, svd, top_singular_pair, ComplexMatrix, C64};
use crate::random::{random_unitary, stream_rng};
use crate::resource::{LipschitzStructure, NormVariant, ResourceKind};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormInterval {
    pub lower: f64,
    pub upper: f64,
    pub witness: ComplexMatrix,
}

/// `||Ψ : (M_d, ||·||∞) → (M_d, ||·||∞)||` for a column-stacked superoperator.
///
/// Lower bound by ascent over unitaries (extreme points of the unit ball),
/// upper bound by the diamond norm of the preadjoint.
pub fn inf_to_inf_norm(superop: &ComplexMatrix, opts: &SolveOptions) -> Result<NormInterval> {
    opts.validate()?;
    let n = superop.require_square("inf_to_inf_norm superoperator")?;
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::input(format!("superoperator side {n} is not a square dimension")));
    }
    let adj = superop.adjoint();
    let ascend = |start: ComplexMatrix| -> (f64, ComplexMatrix) {
        let mut u = start;
        let mut best = spectral_norm(&apply_superop(superop, &u));
        for _ in 0..opts.max_iter {
            let (s, l, r) = top_singular_pair(&apply_superop(superop, &u));
            if s == 0.0 {
                break;
            }
            let g = apply_superop(&adj, &ComplexMatrix::outer(&l, &r));
            let dec = svd(&g);
            let next = &dec.u * &dec.v.adjoint();
            let val = spectral_norm(&apply_superop(superop, &next));
            if val > best + opts.tol * best.max(1.0) {
                best = val;
                u = next;
            } else {
                break;
            }
        }
        (best, u)
    };
    let mut runs: Vec<(f64, ComplexMatrix)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                ComplexMatrix::identity(d)
            } else {
                random_unitary(d, &mut stream_rng(opts.seed, r as u64))
            };
            ascend(start)
        })
        .collect();
    let (lower, witness) = pick_max(&mut runs);
    let upper = diamond_norm(&adj)?.primal.max(lower);
    Ok(NormInterval {
        lower,
        upper,
        witness,
    })
}

fn pick_max(runs: &mut Vec<(f64, ComplexMatrix)>) -> (f64, ComplexMatrix) {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    runs.swap_remove(best)
}

/// Dual Lipschitz norm `sup{|τ(ρX)| : X mean-zero, |||X||| ≤ 1}` with the
/// normalized trace `τ = tr / d`.
pub fn wasserstein_norm(
    rho: &ComplexMatrix,
    structure: &LipschitzStructure,
    variant: NormVariant,
    opts: &SolveOptions,
) -> Result<NormInterval> {
    opts.validate()?;
    let d = structure.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::input("wasserstein_norm: dimension mismatch"));
    }
    if !rho.is_hermitian(1e-9 * rho.max_abs().max(1.0)) {
        return Err(Error::input("wasserstein_norm needs a Hermitian argument"));
    }
    if variant == NormVariant::Gradient && structure.resource().kind() != ResourceKind::Continuous {
        return Err(Error::input("gradient variant requires continuous resources"));
    }
    let ball = LiftedBall::new(structure, variant, 1);
    let g = ball.project(rho).scale_re(1.0 / d as f64);
    let gn = g.fro_norm();
    if gn <= 1e-15 || ball.is_trivial() {
        return Ok(NormInterval {
            lower: 0.0,
            upper: 0.0,
            witness: ComplexMatrix::zeros(d, d),
        });
    }
    let out = ball.maximize(&g, opts.lmo, opts.lmo_iter, opts.step);
    let witness = ball.rescale(&out.point);
    let lower = ((rho * &witness).trace() / C64::new(d as f64, 0.0)).norm();
    let upper = (gn * hs_radius(structure, variant, 1)).max(lower);
    Ok(NormInterval {
        lower,
        upper,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{superop_difference, QuantumChannel};
    use crate::linalg::paulis;
    use crate::resource::ResourceSet;

    #[test]
    fn inf_norm_examples() {
        let opts = SolveOptions::new(1);
        let zero = ComplexMatrix::zeros(4, 4);
        let r = inf_to_inf_norm(&zero, &opts).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));

        let id = QuantumChannel::identity(2);
        let r = inf_to_inf_norm(id.superop(), &opts).unwrap();
        assert!(r.lower >= 1.0 - 1e-12 && (r.upper - 1.0).abs() < 1e-6);

        let e = QuantumChannel::completely_depolarizing(2);
        let s = superop_difference(&id, &e).unwrap();
        let r = inf_to_inf_norm(&s, &opts).unwrap();
        assert!(r.lower >= 1.0 - 1e-9);
        assert!(r.upper + 1e-6 >= r.lower);
    }

    #[test]
    fn wasserstein_examples() {
        let [_, x, y, z] = paulis();
        let l = LipschitzStructure::build(&ResourceSet::discrete(vec![x, y, z.clone()]).unwrap()).unwrap();
        let opts = SolveOptions::new(2);
        let zero = wasserstein_norm(&ComplexMatrix::zeros(2, 2), &l, NormVariant::Inf, &opts).unwrap();
        assert_eq!(zero.upper, 0.0);
        let fixed = ComplexMatrix::identity(2).scale_re(0.5);
        assert_eq!(wasserstein_norm(&fixed, &l, NormVariant::Inf, &opts).unwrap().upper, 0.0);
        let r = wasserstein_norm(&z.scale_re(0.5), &l, NormVariant::Inf, &opts).unwrap();
        assert!(r.lower <= r.upper);
        assert!((r.lower - 0.25).abs() < 1e-6, "{}", r.lower);
    }
}
