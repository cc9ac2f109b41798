use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SolveOptions;
use crate::error::{Error, Result};
use crate::linalg::{
    commutator, default_rank_tol, eigh, eigvalsh, hs_inner, nullspace_basis, vdot, ComplexMatrix,
    C64, ONE, ZERO,
};
use crate::random::{normal_c64, random_pure_state, stream_rng};
use crate::resource::LipschitzStructure;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexInterval {
    pub lower: f64,
    pub upper: f64,
    /// Pure state attaining `lower`.
    pub witness: Vec<C64>,
    /// `(n_k, m_k)` per block of the fixed algebra `⊕ M_{n_k} ⊗ I_{m_k}`.
    pub blocks: Vec<(usize, usize)>,
}

/// Index of the fixed-point algebra: the least `α` with `ρ ≤ α E(ρ)` for all
/// states.
///
/// The lower bound is the best pure state found by local search; the upper
/// bound is the block formula `Σ_k m_k min(n_k, m_k)` read off from the
/// decomposition of the fixed algebra.
pub fn subalgebra_index(structure: &LipschitzStructure, opts: &SolveOptions) -> Result<IndexInterval> {
    opts.validate()?;
    if structure.ambient().is_some() {
        return Err(Error::input("subalgebra_index supports the full matrix algebra only"));
    }
    let d = structure.dim();
    let blocks = block_structure(structure, opts.seed)?;
    let upper: f64 = blocks.iter().map(|&(n, m)| (m * n.min(m)) as f64).sum();

    let mut starts: Vec<Vec<C64>> = net(d);
    let mut rng = stream_rng(opts.seed, 0x1d);
    for _ in 0..opts.restarts {
        starts.push(random_pure_state(d, &mut rng));
    }
    let runs: Vec<(f64, Vec<C64>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| climb(structure, s, opts.seed, i as u64, opts.max_iter * 10))
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    let (lower, witness) = runs[best].clone();
    if lower > upper * (1.0 + 1e-6) {
        return Err(Error::LemmaViolation(format!(
            "index lower bound {lower} exceeds block formula {upper}"
        )));
    }
    Ok(IndexInterval {
        lower,
        upper,
        witness,
        blocks,
    })
}

/// `ψ† E(ψψ†)^+ ψ`, inverting only on the support of `E(ψψ†)`.
fn pure_state_ratio(structure: &LipschitzStructure, psi: &[C64]) -> f64 {
    let rho = ComplexMatrix::outer(psi, psi);
    let e = structure.e_fix().apply_unchecked(&rho, false);
    let (vals, vecs) = eigh(&e);
    let top = vals.first().copied().unwrap_or(0.0);
    let mut acc = 0.0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 1e-8 * top.max(1e-300) {
            acc += vdot(&vecs.column(k), psi).norm_sqr() / lam;
        }
    }
    acc
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v {
        *z /= n;
    }
}

/// Random-perturbation hill climb with a shrinking radius.
fn climb(structure: &LipschitzStructure, start: Vec<C64>, seed: u64, stream: u64, iters: usize) -> (f64, Vec<C64>) {
    let mut rng = stream_rng(seed, 0x100 + stream);
    let mut psi = start;
    let mut best = pure_state_ratio(structure, &psi);
    let mut radius = 0.3;
    for _ in 0..iters {
        let mut cand: Vec<C64> = psi.iter().map(|z| z + normal_c64(&mut rng) * radius).collect();
        normalize(&mut cand);
        let val = pure_state_ratio(structure, &cand);
        if val > best {
            best = val;
            psi = cand;
        } else {
            radius *= 0.97;
            if radius < 1e-9 {
                break;
            }
        }
    }
    (best, psi)
}

/// Basis states and their pairwise balanced superpositions.
fn net(d: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let mut v = vec![ZERO; d];
        v[i] = ONE;
        out.push(v);
        for j in i + 1..d {
            for ph in [ONE, -ONE, C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
                let mut v = vec![ZERO; d];
                v[i] = C64::new(s, 0.0);
                v[j] = ph * s;
                out.push(v);
            }
        }
    }
    out
}

/// `(n_k, m_k)` for the fixed algebra `⊕ M_{n_k} ⊗ I_{m_k}` (up to unitary
/// equivalence), from its center.
fn block_structure(structure: &LipschitzStructure, seed: u64) -> Result<Vec<(usize, usize)>> {
    let basis = structure.commutant_basis();
    let d = structure.dim();
    let k = basis.len();
    let n = d * d;
    // α ↦ ([b_j, Σ α_i b_i])_j
    let mut map = ComplexMatrix::zeros(k * n, k);
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let c = commutator(bj, bi).vec_col();
            for (r, z) in c.into_iter().enumerate() {
                map[(j * n + r, i)] = z;
            }
        }
    }
    let center: Vec<ComplexMatrix> = nullspace_basis(&map, default_rank_tol(n))?
        .into_iter()
        .map(|alpha| {
            let mut m = ComplexMatrix::zeros(d, d);
            for (a, b) in alpha.iter().zip(basis) {
                m.axpy(*a, b);
            }
            m
        })
        .collect();
    let mut rng = stream_rng(seed, 0xce);
    let mut h = ComplexMatrix::zeros(d, d);
    for c in &center {
        h.axpy(C64::new(normal_c64(&mut rng).re, 0.0), &c.hermitian_part());
        h.axpy(C64::new(normal_c64(&mut rng).re, 0.0), &c.scale(C64::new(0.0, -1.0)).hermitian_part());
    }
    let (vals, vecs) = eigh(&h);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gtol = 1e-6 * scale.max(1e-12);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (vals[g[0]] - v).abs() <= gtol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let mut p = ComplexMatrix::zeros(d, d);
        for &i in &g {
            let v = vecs.column(i);
            p += &ComplexMatrix::outer(&v, &v);
        }
        let compressed: Vec<ComplexMatrix> = basis.iter().map(|b| &(&p * b) * &p).collect();
        let gram = ComplexMatrix::from_fn(k, k, |a, b| hs_inner(&compressed[a], &compressed[b]));
        let top = eigvalsh(&gram).first().copied().unwrap_or(0.0);
        let dim = eigvalsh(&gram).iter().filter(|&&x| x > 1e-8 * top.max(1e-300)).count();
        let nk = (dim as f64).sqrt().round() as usize;
        let rank = g.len();
        if nk == 0 || nk * nk != dim || rank % nk != 0 {
            return Err(Error::input(format!(
                "fixed algebra block has inconsistent dimensions (dim {dim}, rank {rank})"
            )));
        }
        out.push((nk, rank / nk));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;
    use crate::resource::ResourceSet;

    fn index_of(elements: Vec<ComplexMatrix>) -> IndexInterval {
        let l = LipschitzStructure::build(&ResourceSet::discrete(elements).unwrap()).unwrap();
        subalgebra_index(&l, &SolveOptions::new(4)).unwrap()
    }

    #[test]
    fn qubit_over_scalars_and_diagonals() {
        let [id, x, y, z] = paulis();
        let r = index_of(vec![x.clone(), y, z.clone()]);
        assert!((r.lower - 2.0).abs() < 1e-4 && (r.upper - 2.0).abs() < 1e-12);
        let r = index_of(vec![z.clone()]);
        assert_eq!(r.blocks.len(), 2);
        assert!((r.lower - 2.0).abs() < 1e-4 && (r.upper - 2.0).abs() < 1e-12);
        let r = index_of(vec![id.clone()]);
        assert!((r.lower - 1.0).abs() < 1e-9 && r.upper == 1.0, "{r:?}");
        // Fixed algebra I ⊗ M_2 inside M_4.
        let r = index_of(vec![x.kron(&id), z.kron(&id)]);
        assert_eq!(r.blocks, vec![(2, 2)]);
        assert!(r.lower > 4.0 - 1e-4 && r.upper == 4.0);
    }
}
