use serde::{Deserialize, Serialize};

use super::sdp::{solve, SdpProblem, SparseBlock};
use crate::channel::superop_to_choi;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

const MAX_ITER: usize = 200;
const GAP_TOL: f64 = 1e-8;
const REPORT_GAP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiamondResult {
    pub value: f64,
    /// Objective of the minimization side (an upper bound).
    pub primal: f64,
    /// Objective of the maximization side (a lower bound).
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Diamond norm of a Hermitian-preserving superoperator (column-stacked).
///
/// Solved as `max tr(J Z)` over `-σ⊗I ⪯ Z ⪯ σ⊗I`, `σ` a density matrix on the
/// input, where `J` is the Choi matrix with the input factor first.
pub fn diamond_norm(superop: &ComplexMatrix) -> Result<DiamondResult> {
    let n = superop.require_square("diamond_norm superoperator")?;
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || d == 0 {
        return Err(Error::input(format!("superoperator side {n} is not a square dimension")));
    }
    if !superop.all_finite() {
        return Err(Error::input("diamond_norm: non-finite superoperator"));
    }
    let j = superop_to_choi(superop, d);
    let scale = j.max_abs().max(1.0);
    if (&j - &j.adjoint()).max_abs() > 1e-8 * scale {
        return Err(Error::input("diamond_norm needs a Hermitian-preserving map"));
    }
    let j = j.hermitian_part();
    if j.max_abs() == 0.0 {
        return Ok(DiamondResult {
            value: 0.0,
            primal: 0.0,
            dual: 0.0,
            gap: 0.0,
            iterations: 0,
        });
    }

    let nn = d * d;
    let mut a: Vec<SparseBlock> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    // σ = I/d + Σ r_k T_k with T_k traceless Hermitian on the input factor.
    for t in traceless_basis(d) {
        let mut sp = SparseBlock::default();
        for &(r, c, v) in &t {
            for k in 0..d {
                for blk in 0..2 {
                    sp.push(blk, r * d + k, c * d + k, -v);
                }
            }
        }
        a.push(sp);
        b.push(0.0);
    }
    // Z = Σ z_l H_l over a Hermitian basis of M_{d²}.
    for h in hermitian_basis(nn) {
        let mut sp = SparseBlock::default();
        let mut coef = C64::new(0.0, 0.0);
        for &(r, c, v) in &h {
            sp.push(0, r, c, v);
            sp.push(1, r, c, -v);
            coef += j[(c, r)] * v;
        }
        a.push(sp);
        b.push(coef.re);
    }
    let c_block = ComplexMatrix::identity(nn).scale_re(1.0 / d as f64);
    let prob = SdpProblem {
        blocks: vec![nn, nn],
        c: vec![c_block.clone(), c_block],
        a,
        b,
    };
    let sol = solve(&prob, MAX_ITER, GAP_TOL);
    let gap = (sol.primal - sol.dual).abs();
    if !sol.converged && gap > REPORT_GAP {
        return Err(Error::NonConvergence {
            solver: "diamond-norm interior point",
            iterations: sol.iterations,
            residual: sol.residual,
        });
    }
    Ok(DiamondResult {
        value: 0.5 * (sol.primal + sol.dual),
        primal: sol.primal,
        dual: sol.dual,
        gap,
        iterations: sol.iterations,
    })
}

type Sparse = Vec<(usize, usize, C64)>;

fn traceless_basis(d: usize) -> Vec<Sparse> {
    let mut out = Vec::new();
    let re = |v: f64| C64::new(v, 0.0);
    for k in 1..d {
        out.push(vec![(0, 0, re(-1.0)), (k, k, re(1.0))]);
    }
    out.extend(offdiagonal_basis(d));
    out
}

fn hermitian_basis(n: usize) -> Vec<Sparse> {
    let mut out: Vec<Sparse> = (0..n).map(|k| vec![(k, k, C64::new(1.0, 0.0))]).collect();
    out.extend(offdiagonal_basis(n));
    out
}

fn offdiagonal_basis(n: usize) -> Vec<Sparse> {
    let mut out = Vec::new();
    for r in 0..n {
        for c in r + 1..n {
            out.push(vec![(r, c, C64::new(1.0, 0.0)), (c, r, C64::new(1.0, 0.0))]);
            out.push(vec![(r, c, C64::new(0.0, 1.0)), (c, r, C64::new(0.0, -1.0))]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{superop_difference, QuantumChannel};
    use crate::linalg::paulis;

    #[test]
    fn zero_map() {
        let ch = QuantumChannel::completely_depolarizing(2);
        let s = superop_difference(&ch, &ch).unwrap();
        assert_eq!(diamond_norm(&s).unwrap().value, 0.0);
    }

    #[test]
    fn pauli_z_against_identity() {
        let z = QuantumChannel::unitary(&paulis()[3]).unwrap();
        let s = superop_difference(&z, &QuantumChannel::identity(2)).unwrap();
        let r = diamond_norm(&s).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "{r:?}");
        assert!(r.gap <= 1e-6);
    }

    #[test]
    fn identity_and_depolarizing() {
        let id = QuantumChannel::identity(2);
        let r = diamond_norm(id.superop()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        let e = QuantumChannel::completely_depolarizing(2);
        let s = superop_difference(&id, &e).unwrap();
        assert!((diamond_norm(&s).unwrap().value - 1.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_hermitian_preserving() {
        let s = ComplexMatrix::from_fn(4, 4, |r, c| if r == 0 && c == 3 { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) });
        assert!(diamond_norm(&s).is_err());
    }
}
