//! Linear maximization `max Re<G, z>` over `K = {z ∈ V_m : |||z||| ≤ 1}`,
//! where `V_m = M_m ⊗ V` is the amplified mean-zero space.
//!
//! The ball is handled in a lifted space `(z, W)` with `W_j = [I_m ⊗ s_j, z]`
//! so that every norm constraint becomes a spectral-norm ball on `W`, whose
//! projection is singular-value clipping.

use serde::{Deserialize, Serialize};

use crate::linalg::{hs_inner, svd, ComplexMatrix, C64, ZERO};
use crate::resource::{hstack, vstack, LipschitzStructure, NormVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LmoMethod {
    /// Alternating direction method of multipliers on the lifted problem.
    Admm,
    /// Projected ascent with Dykstra projections in the lifted space.
    DykstraAscent,
}

#[derive(Clone, Copy, Debug)]
enum Ball {
    Single(usize),
    VStack,
    HStack,
}

pub(crate) const DYKSTRA_TOL: f64 = 1e-10;
pub(crate) const DYKSTRA_MAX_CYCLES: usize = 10_000;

pub(crate) struct LmoOutcome {
    pub point: ComplexMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// ADMM iterate to warm-start the next, nearby problem.
    pub state: Option<AdmmState>,
}

/// Lifted iterate, scaled dual and penalty of an ADMM run.
#[derive(Clone)]
pub(crate) struct AdmmState {
    w: Lifted,
    u: Lifted,
    rho: f64,
}

type Lifted = Vec<Vec<ComplexMatrix>>;

/// Amplified constraint geometry at one ancilla level.
pub(crate) struct LiftedBall<'a> {
    structure: &'a LipschitzStructure,
    variant: NormVariant,
    m: usize,
    gens: Vec<ComplexMatrix>,
    gens_adj: Vec<ComplexMatrix>,
    balls: Vec<Ball>,
    mult: f64,
}

impl<'a> LiftedBall<'a> {
    pub fn new(structure: &'a LipschitzStructure, variant: NormVariant, m: usize) -> Self {
        let id = ComplexMatrix::identity(m);
        let gens: Vec<ComplexMatrix> = structure
            .generators()
            .iter()
            .map(|s| if m == 1 { s.clone() } else { id.kron(s) })
            .collect();
        let gens_adj = gens.iter().map(ComplexMatrix::adjoint).collect();
        let (balls, mult) = match variant {
            NormVariant::Inf => ((0..gens.len()).map(Ball::Single).collect(), 1.0),
            NormVariant::L2 => (vec![Ball::VStack], 1.0),
            NormVariant::Gradient => (vec![Ball::VStack, Ball::HStack], 2.0),
        };
        Self {
            structure,
            variant,
            m,
            gens,
            gens_adj,
            balls,
            mult,
        }
    }

    pub fn dim(&self) -> usize {
        self.m * self.structure.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.structure.mean_zero_basis().is_empty() || self.gens.is_empty()
    }

    pub fn lipschitz(&self, z: &ComplexMatrix) -> f64 {
        self.structure.lipschitz_norm_unchecked(z, self.variant)
    }

    /// `z / max(1, |||z|||)`.
    pub fn rescale(&self, z: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lipschitz(z);
        if n > 1.0 {
            z.scale_re(1.0 / n)
        } else {
            z.clone()
        }
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.structure.project_mean_zero_subspace(x)
    }

    fn commutators(&self, z: &ComplexMatrix) -> Vec<ComplexMatrix> {
        self.gens.iter().map(|g| &(g * z) - &(z * g)).collect()
    }

    fn apply(&self, z: &ComplexMatrix) -> Lifted {
        let c = self.commutators(z);
        self.balls
            .iter()
            .map(|b| match b {
                Ball::Single(j) => vec![c[*j].clone()],
                Ball::VStack | Ball::HStack => c.clone(),
            })
            .collect()
    }

    fn adjoint(&self, w: &Lifted) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (ball, blocks) in self.balls.iter().zip(w) {
            for (i, blk) in blocks.iter().enumerate() {
                let j = match ball {
                    Ball::Single(j) => *j,
                    _ => i,
                };
                let g = &self.gens_adj[j];
                out += &(&(g * blk) - &(blk * g));
            }
        }
        out
    }

    fn clip(&self, w: &Lifted) -> Lifted {
        self.balls
            .iter()
            .zip(w)
            .map(|(ball, blocks)| match ball {
                Ball::Single(_) => vec![clip_singular_values(&blocks[0])],
                Ball::VStack => {
                    let c = clip_singular_values(&vstack(blocks));
                    split_rows(&c, blocks.len())
                }
                Ball::HStack => {
                    let c = clip_singular_values(&hstack(blocks));
                    split_cols(&c, blocks.len())
                }
            })
            .collect()
    }

    /// Solves `(shift I + N) z = P_V x` on `V_m`, with `N = Σ A_j† A_j`.
    fn solve_normal(&self, x: &ComplexMatrix, shift: f64) -> ComplexMatrix {
        let d = self.structure.dim();
        let basis = self.structure.mean_zero_basis();
        let (vals, vecs) = self.structure.laplacian_eigen();
        let k = basis.len();
        crate::channel::map_blocks(x, self.m, d, |blk| {
            let coords: Vec<C64> = basis.iter().map(|v| hs_inner(v, blk)).collect();
            // c' = Q diag(1/(shift + mult λ)) Q† c
            let mut rotated = vec![ZERO; k];
            for (j, r) in rotated.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (i, c) in coords.iter().enumerate() {
                    acc += vecs[(i, j)].conj() * c;
                }
                let denom = shift + self.mult * vals[j];
                *r = if denom > 1e-14 { acc / denom } else { ZERO };
            }
            let mut out = ComplexMatrix::zeros(d, d);
            for i in 0..k {
                let mut acc = ZERO;
                for (j, r) in rotated.iter().enumerate() {
                    acc += vecs[(i, j)] * r;
                }
                out.axpy(acc, &basis[i]);
            }
            out
        })
    }

    /// Approximate maximizer of `Re<g, z>` over the ball, before rescaling.
    pub fn maximize(&self, g: &ComplexMatrix, method: LmoMethod, max_iter: usize, step: f64) -> LmoOutcome {
        self.maximize_from(g, method, max_iter, step, None)
    }

    /// As [`Self::maximize`], warm-starting ADMM from an earlier state.
    pub fn maximize_from(
        &self,
        g: &ComplexMatrix,
        method: LmoMethod,
        max_iter: usize,
        step: f64,
        warm: Option<AdmmState>,
    ) -> LmoOutcome {
        match method {
            LmoMethod::Admm => self.admm(g, max_iter, warm),
            LmoMethod::DykstraAscent => self.dykstra_ascent(g, max_iter, step),
        }
    }

    fn admm(&self, g: &ComplexMatrix, max_iter: usize, warm: Option<AdmmState>) -> LmoOutcome {
        let n = self.dim();
        let gn = g.fro_norm().max(1e-300);
        let (mut w, mut u, mut rho) = match warm {
            Some(st) => (st.w, st.u, st.rho),
            None => {
                let zero_lift = self.apply(&ComplexMatrix::zeros(n, n));
                (zero_lift.clone(), zero_lift, gn / (n as f64).sqrt())
            }
        };
        let (eps_abs, eps_rel) = (1e-7, 1e-5);
        let mut z = ComplexMatrix::zeros(n, n);
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            let wu = lifted_sub(&w, &u);
            let mut rhs = self.adjoint(&wu);
            rhs.axpy(C64::new(1.0 / rho, 0.0), g);
            z = self.solve_normal(&rhs, 0.0);
            let az = self.apply(&z);
            let w_old = w;
            w = self.clip(&lifted_add(&az, &u));
            let r = lifted_sub(&az, &w);
            u = lifted_add(&u, &r);
            let r_norm = lifted_norm(&r);
            let s_norm = rho * self.adjoint(&lifted_sub(&w, &w_old)).fro_norm();
            let eps_pri = eps_abs * (n as f64) + eps_rel * lifted_norm(&az).max(lifted_norm(&w));
            let eps_dual = eps_abs * (n as f64) + eps_rel * rho * self.adjoint(&u).fro_norm();
            residual = r_norm.max(s_norm);
            if r_norm <= eps_pri && s_norm <= eps_dual {
                return LmoOutcome {
                    point: z,
                    iterations: it,
                    converged: true,
                    residual,
                    state: Some(AdmmState { w, u, rho }),
                };
            }
            if it % 10 == 0 {
                if r_norm > 10.0 * s_norm {
                    rho *= 2.0;
                    u = lifted_scale(&u, 0.5);
                } else if s_norm > 10.0 * r_norm {
                    rho *= 0.5;
                    u = lifted_scale(&u, 2.0);
                }
            }
        }
        LmoOutcome {
            point: z,
            iterations: max_iter,
            converged: false,
            residual,
            state: Some(AdmmState { w, u, rho }),
        }
    }

    /// Projection of `(z, w)` onto `{(z, W): z ∈ V_m, W = A z}`.
    fn project_graph(&self, z: &ComplexMatrix, w: &Lifted) -> (ComplexMatrix, Lifted) {
        let mut rhs = self.adjoint(w);
        rhs += z;
        let p = self.solve_normal(&rhs, 1.0);
        let aw = self.apply(&p);
        (p, aw)
    }

    /// Dykstra's alternating projections onto graph ∩ balls: subspace first,
    /// then the balls. Returns the last graph point.
    pub fn dykstra(&self, z0: &ComplexMatrix, w0: &Lifted) -> (ComplexMatrix, Lifted, usize, bool) {
        let n = self.dim();
        let (mut xz, mut xw) = (z0.clone(), w0.clone());
        let mut pz = ComplexMatrix::zeros(n, n);
        let mut pw = lifted_scale(w0, 0.0);
        let mut qz = pz.clone();
        let mut qw = pw.clone();
        let mut last = (xz.clone(), xw.clone());
        for cycle in 1..=DYKSTRA_MAX_CYCLES {
            let (yz, yw) = self.project_graph(&(&xz + &pz), &lifted_add(&xw, &pw));
            pz = &(&xz + &pz) - &yz;
            pw = lifted_sub(&lifted_add(&xw, &pw), &yw);
            let nz = &yz + &qz;
            let nw = self.clip(&lifted_add(&yw, &qw));
            qz = &(&yz + &qz) - &nz;
            qw = lifted_sub(&lifted_add(&yw, &qw), &nw);
            let disp = ((&nz - &xz).fro_norm().powi(2) + lifted_norm(&lifted_sub(&nw, &xw)).powi(2)).sqrt();
            xz = nz;
            xw = nw;
            last = (yz, yw);
            if disp <= DYKSTRA_TOL {
                return (last.0, last.1, cycle, true);
            }
        }
        (last.0, last.1, DYKSTRA_MAX_CYCLES, false)
    }

    fn dykstra_ascent(&self, g: &ComplexMatrix, iters: usize, step: f64) -> LmoOutcome {
        let n = self.dim();
        let gn = g.fro_norm();
        let mut z = ComplexMatrix::zeros(n, n);
        let mut w = self.apply(&z);
        let mut best = ComplexMatrix::zeros(n, n);
        if gn == 0.0 {
            return LmoOutcome {
                point: best,
                iterations: 0,
                converged: true,
                residual: 0.0,
                state: None,
            };
        }
        let radius = self.hs_radius();
        let mut best_val = 0.0;
        let mut converged = true;
        let mut stall = 0;
        let mut done = 0;
        for t in 0..iters {
            done = t + 1;
            let eta = step * radius / gn;
            z.axpy(C64::new(eta, 0.0), g);
            let (pz, pw, _, ok) = self.dykstra(&z, &w);
            converged &= ok;
            z = pz;
            w = pw;
            let cand = self.rescale(&z);
            let val = hs_inner(g, &cand).re;
            if val > best_val * (1.0 + 1e-12) {
                best_val = val;
                best = cand;
                stall = 0;
            } else {
                stall += 1;
                if stall >= 20 {
                    break;
                }
            }
        }
        LmoOutcome {
            point: best,
            iterations: done,
            converged,
            residual: 0.0,
            state: None,
        }
    }

    /// Bound on `||z||_HS` over the unit ball: `sqrt(n_eff m d / λ_gap)`.
    pub fn hs_radius(&self) -> f64 {
        hs_radius(self.structure, self.variant, self.m)
    }
}

pub(crate) fn hs_radius(structure: &LipschitzStructure, variant: NormVariant, m: usize) -> f64 {
    let n_eff = match variant {
        NormVariant::Inf => structure.generators().len(),
        NormVariant::L2 | NormVariant::Gradient => 1,
    } as f64;
    match structure.spectral_gap() {
        Some(gap) if gap > 0.0 => (n_eff * (m * structure.dim()) as f64 / gap).sqrt(),
        _ => 0.0,
    }
}

pub(crate) fn clip_singular_values(m: &ComplexMatrix) -> ComplexMatrix {
    let dec = svd(m);
    if dec.s.first().copied().unwrap_or(0.0) <= 1.0 {
        return m.clone();
    }
    let r = dec.s.len();
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let mut acc = ZERO;
        for k in 0..r {
            acc += dec.u[(i, k)] * dec.s[k].min(1.0) * dec.v[(j, k)].conj();
        }
        acc
    })
}

fn split_rows(m: &ComplexMatrix, parts: usize) -> Vec<ComplexMatrix> {
    let r = m.rows() / parts;
    (0..parts)
        .map(|p| ComplexMatrix::from_fn(r, m.cols(), |i, j| m[(p * r + i, j)]))
        .collect()
}

fn split_cols(m: &ComplexMatrix, parts: usize) -> Vec<ComplexMatrix> {
    let c = m.cols() / parts;
    (0..parts)
        .map(|p| ComplexMatrix::from_fn(m.rows(), c, |i, j| m[(i, p * c + j)]))
        .collect()
}

fn lifted_zip(a: &Lifted, b: &Lifted, f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix) -> Lifted {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| f(p, q)).collect())
        .collect()
}

fn lifted_add(a: &Lifted, b: &Lifted) -> Lifted {
    lifted_zip(a, b, |p, q| p + q)
}

fn lifted_sub(a: &Lifted, b: &Lifted) -> Lifted {
    lifted_zip(a, b, |p, q| p - q)
}

fn lifted_scale(a: &Lifted, s: f64) -> Lifted {
    a.iter()
        .map(|x| x.iter().map(|p| p.scale_re(s)).collect())
        .collect()
}

fn lifted_norm(a: &Lifted) -> f64 {
    a.iter()
        .flatten()
        .map(|p| p.fro_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;
    use crate::random::{ginibre, stream_rng};
    use crate::resource::ResourceSet;

    fn pauli_structure() -> LipschitzStructure {
        let [_, x, y, z] = paulis();
        LipschitzStructure::build(&ResourceSet::discrete(vec![x, y, z]).unwrap()).unwrap()
    }

    #[test]
    fn clip_examples() {
        let m = ComplexMatrix::diag_real(&[3.0, 0.5]);
        let c = clip_singular_values(&m);
        assert!((&c - &ComplexMatrix::diag_real(&[1.0, 0.5])).max_abs() < 1e-12);
    }

    #[test]
    fn admm_and_dykstra_agree_on_qubit() {
        let l = pauli_structure();
        let ball = LiftedBall::new(&l, NormVariant::Inf, 1);
        let mut rng = stream_rng(11, 0);
        for _ in 0..3 {
            let g = ball.project(&ginibre(2, 2, &mut rng));
            let a = ball.rescale(&ball.maximize(&g, LmoMethod::Admm, 4000, 1.0).point);
            let b = ball.rescale(&ball.maximize(&g, LmoMethod::DykstraAscent, 300, 1.0).point);
            let va = hs_inner(&g, &a).re;
            let vb = hs_inner(&g, &b).re;
            assert!(ball.lipschitz(&a) <= 1.0 + 1e-12);
            assert!((va - vb).abs() <= 2e-3 * va.abs().max(1.0), "{va} vs {vb}");
        }
    }

    #[test]
    fn dykstra_projection_is_feasible_and_idempotent() {
        let l = pauli_structure();
        let ball = LiftedBall::new(&l, NormVariant::L2, 1);
        let mut rng = stream_rng(12, 0);
        let z0 = ball.project(&ginibre(2, 2, &mut rng).scale_re(3.0));
        let (z, w, _, ok) = ball.dykstra(&z0, &ball.apply(&z0));
        assert!(ok);
        assert!(ball.lipschitz(&z) <= 1.0 + 1e-8);
        let (z2, _, _, _) = ball.dykstra(&z, &w);
        assert!((&z2 - &z).fro_norm() <= 1e-8);
    }

    #[test]
    fn admm_on_known_linear_problem() {
        // max Re<σZ, z>: the optimum is z = σZ/2 with value 1.
        let l = pauli_structure();
        let ball = LiftedBall::new(&l, NormVariant::Inf, 1);
        let z = paulis()[3].clone();
        let out = ball.maximize(&z, LmoMethod::Admm, 4000, 1.0);
        let x = ball.rescale(&out.point);
        assert!((hs_inner(&z, &x).re - 1.0).abs() < 1e-6);
    }
}
