//! Dense primal-dual interior-point method for block-diagonal complex
//! Hermitian semidefinite programs
//!
//! ```text
//! (P) min <C, X>  s.t. <A_i, X> = b_i, X ⪰ 0
//! (D) max b·y     s.t. S = C - Σ y_i A_i ⪰ 0
//! ```
//!
//! HKM search direction with Mehrotra predictor-corrector steps. Constraint
//! matrices are sparse lists of entries so the Schur complement is cheap.

use nalgebra::DMatrix;

use crate::linalg::{eigvalsh, hs_inner, ComplexMatrix, C64, ZERO};

/// Sparse Hermitian block-diagonal matrix; both triangles stored.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseBlock {
    pub entries: Vec<(usize, usize, usize, C64)>,
}

impl SparseBlock {
    pub fn push(&mut self, block: usize, r: usize, c: usize, v: C64) {
        self.entries.push((block, r, c, v));
    }
}

pub(crate) struct SdpProblem {
    pub blocks: Vec<usize>,
    pub c: Vec<ComplexMatrix>,
    pub a: Vec<SparseBlock>,
    pub b: Vec<f64>,
}

pub(crate) struct SdpSolution {
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

type Blocks = Vec<ComplexMatrix>;

fn inner(x: &Blocks, s: &Blocks) -> f64 {
    x.iter().zip(s).map(|(a, b)| hs_inner(a, b).re).sum()
}

fn blocks_norm(x: &Blocks) -> f64 {
    x.iter().map(|m| m.fro_norm().powi(2)).sum::<f64>().sqrt()
}

impl SdpProblem {
    /// `<A_i, Y>` for every constraint; `Y` need not be Hermitian.
    fn a_op(&self, y: &Blocks) -> Vec<f64> {
        self.a
            .iter()
            .map(|ai| {
                ai.entries
                    .iter()
                    .map(|&(blk, r, c, v)| (v * y[blk][(c, r)]).re)
                    .sum()
            })
            .collect()
    }

    fn at_op(&self, y: &[f64]) -> Blocks {
        let mut out: Blocks = self.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
        for (ai, &yi) in self.a.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for &(blk, r, c, v) in &ai.entries {
                out[blk][(r, c)] += v * yi;
            }
        }
        out
    }

    /// `M_ij = Re tr(A_i X A_j S^{-1})`.
    fn schur(&self, x: &Blocks, sinv: &Blocks) -> DMatrix<f64> {
        let p = self.a.len();
        let mut m = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let mut acc = ZERO;
                for &(bi, r, c, v) in &self.a[i].entries {
                    for &(bj, r2, c2, v2) in &self.a[j].entries {
                        if bi == bj {
                            acc += v * x[bi][(c, r2)] * v2 * sinv[bi][(c2, r)];
                        }
                    }
                }
                m[(i, j)] = acc.re;
                m[(j, i)] = acc.re;
            }
        }
        m
    }
}

fn identity_blocks(sizes: &[usize], s: f64) -> Blocks {
    sizes.iter().map(|&n| ComplexMatrix::identity(n).scale_re(s)).collect()
}

fn hermitian_inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let chol = m.hermitian_part().to_nalgebra().cholesky()?;
    Some(ComplexMatrix::from_nalgebra(&chol.inverse()))
}

/// Largest α ≤ ∞ with `X + α D ⪰ 0`, assuming `X ≻ 0`.
fn max_step(x: &Blocks, d: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(d) {
        let chol = match xb.hermitian_part().to_nalgebra().cholesky() {
            Some(c) => c,
            None => return 0.0,
        };
        let l = chol.l();
        let linv = match l.clone().try_inverse() {
            Some(v) => v,
            None => return 0.0,
        };
        let z = &linv * db.hermitian_part().to_nalgebra() * linv.adjoint();
        let lam = eigvalsh(&ComplexMatrix::from_nalgebra(&z))
            .last()
            .copied()
            .unwrap_or(0.0);
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    alpha
}

pub(crate) fn solve(prob: &SdpProblem, max_iter: usize, tol: f64) -> SdpSolution {
    let n_total: usize = prob.blocks.iter().sum();
    let p = prob.a.len();
    let b_norm = prob.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = blocks_norm(&prob.c);
    let b_max = prob.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale_x = 10.0 * (1.0 + b_max) * (n_total as f64).sqrt();
    let scale_s = 10.0 * (1.0 + c_norm);
    let mut x = identity_blocks(&prob.blocks, scale_x);
    let mut s = identity_blocks(&prob.blocks, scale_s);
    let mut y = vec![0.0; p];
    let mut best = (f64::INFINITY, 0.0, 0.0);

    for iter in 1..=max_iter {
        let ax = prob.a_op(&x);
        let rp: Vec<f64> = prob.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = prob.at_op(&y);
        let rd: Blocks = (0..prob.blocks.len())
            .map(|k| &(&prob.c[k] - &s[k]) - &aty[k])
            .collect();
        let pobj = inner(&prob.c, &x);
        let dobj: f64 = prob.b.iter().zip(&y).map(|(b, v)| b * v).sum();
        let mu = inner(&x, &s) / n_total as f64;
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + b_norm);
        let dinf = blocks_norm(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let residual = gap.max(pinf).max(dinf);
        if residual < best.0 {
            best = (residual, pobj, dobj);
        }
        if residual <= tol {
            return SdpSolution {
                primal: pobj,
                dual: dobj,
                iterations: iter,
                converged: true,
                residual,
            };
        }

        let sinv: Blocks = match s.iter().map(hermitian_inverse).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => break,
        };
        let mut mat = prob.schur(&x, &sinv);
        let chol = match mat.clone().cholesky() {
            Some(c) => c,
            None => {
                let reg = 1e-14 * (1.0 + mat.diagonal().amax());
                for i in 0..p {
                    mat[(i, i)] += reg;
                }
                match mat.cholesky() {
                    Some(c) => c,
                    None => break,
                }
            }
        };

        // X Rd S^{-1}
        let x_rd_sinv: Blocks = (0..x.len()).map(|k| &(&x[k] * &rd[k]) * &sinv[k]).collect();
        let direction = |h: &Blocks| -> (Blocks, Vec<f64>, Blocks) {
            // M Δy = rp - A(H - X - X Rd S^{-1})
            let t: Blocks = (0..x.len())
                .map(|k| &(&h[k] - &x[k]) - &x_rd_sinv[k])
                .collect();
            let at = prob.a_op(&t);
            let rhs: Vec<f64> = rp.iter().zip(&at).map(|(r, a)| r - a).collect();
            let dy_vec = chol.solve(&nalgebra::DVector::from_vec(rhs));
            let dy: Vec<f64> = dy_vec.iter().copied().collect();
            let atdy = prob.at_op(&dy);
            let ds: Blocks = (0..x.len()).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Blocks = (0..x.len())
                .map(|k| (&(&h[k] - &x[k]) - &(&(&x[k] * &ds[k]) * &sinv[k])).hermitian_part())
                .collect();
            (dx, dy, ds)
        };

        let zero_h: Blocks = prob.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
        let (dxa, _, dsa) = direction(&zero_h);
        let ap = max_step(&x, &dxa).min(1.0);
        let ad = max_step(&s, &dsa).min(1.0);
        let xa: Blocks = (0..x.len()).map(|k| { let mut t = x[k].clone(); t.axpy(C64::new(ap, 0.0), &dxa[k]); t }).collect();
        let sa: Blocks = (0..s.len()).map(|k| { let mut t = s[k].clone(); t.axpy(C64::new(ad, 0.0), &dsa[k]); t }).collect();
        let mu_aff = inner(&xa, &sa) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let h: Blocks = (0..x.len())
            .map(|k| {
                let mut t = ComplexMatrix::identity(prob.blocks[k]).scale_re(sigma * mu);
                t -= &(&dxa[k] * &dsa[k]);
                &t * &sinv[k]
            })
            .collect();
        let (dx, dy, ds) = direction(&h);
        let ap = (0.95 * max_step(&x, &dx)).min(1.0);
        let ad = (0.95 * max_step(&s, &ds)).min(1.0);
        for k in 0..x.len() {
            x[k].axpy(C64::new(ap, 0.0), &dx[k]);
            x[k] = x[k].hermitian_part();
            s[k].axpy(C64::new(ad, 0.0), &ds[k]);
            s[k] = s[k].hermitian_part();
        }
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += ad * di;
        }
    }
    SdpSolution {
        primal: best.1,
        dual: best.2,
        iterations: max_iter,
        converged: false,
        residual: best.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_sdp() {
        // max y s.t. C - y I ⪰ 0 gives λ_min(C).
        let c = ComplexMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(3.0, 0.0)],
        ])
        .unwrap();
        let mut a = SparseBlock::default();
        a.push(0, 0, 0, C64::new(1.0, 0.0));
        a.push(0, 1, 1, C64::new(1.0, 0.0));
        let prob = SdpProblem {
            blocks: vec![2],
            c: vec![c.clone()],
            a: vec![a],
            b: vec![1.0],
        };
        let sol = solve(&prob, 100, 1e-10);
        assert!(sol.converged);
        let expect = *eigvalsh(&c).last().unwrap();
        assert!((sol.dual - expect).abs() < 1e-8, "{} vs {expect}", sol.dual);
        assert!((sol.primal - sol.dual).abs() < 1e-8);
    }
}
