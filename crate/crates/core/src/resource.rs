//! Resource sets, commutants, conditional expectations and Lipschitz
//! seminorms.
//!
//! A [`LipschitzStructure`] bundles everything derived from a resource set:
//! an orthonormal (Hilbert–Schmidt) basis of the commutant, a basis of its
//! orthogonal complement (the mean-zero space), and the trace-preserving
//! conditional expectation onto the commutant as a channel.
//!
//! Structures can live inside a restricted ambient *-subalgebra (for example
//! the diagonal matrices, modelling `ℓ∞(G)`); then the commutant is the
//! relative commutant and the mean-zero space stays inside the ambient
//! algebra.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    commutator, default_rank_tol, eigh, hs_inner, spectral_norm, svd, ComplexMatrix, C64, ONE,
    ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    /// Unitary gates.
    Discrete,
    /// Self-adjoint generators.
    Continuous,
}

/// Which Lipschitz seminorm to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormVariant {
    /// `sup_s ||[s, x]||`.
    Inf,
    /// `||(Σ_s |[s, x]|^2)^{1/2}||`.
    L2,
    /// `max(||Γ(x,x)||, ||Γ(x*,x*)||)^{1/2}` with `Γ(x,x) = Σ_j [a_j,x]†[a_j,x]`.
    Gradient,
}

#[derive(Clone, Debug)]
pub struct ResourceSet {
    kind: ResourceKind,
    dim: usize,
    elements: Vec<ComplexMatrix>,
    symmetrized: bool,
}

const MEMBER_TOL: f64 = 1e-9;

impl ResourceSet {
    /// Discrete resource set. The set is closed under adjoints and the
    /// identity is adjoined.
    pub fn discrete(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = check_common_dim(&elements)?;
        if elements.iter().any(|u| !u.is_unitary(MEMBER_TOL)) {
            return Err(Error::input("discrete resources must be unitary"));
        }
        let mut out: Vec<ComplexMatrix> = Vec::new();
        let mut push = |m: ComplexMatrix| {
            if !out.iter().any(|e| (e - &m).max_abs() <= MEMBER_TOL) {
                out.push(m);
            }
        };
        push(ComplexMatrix::identity(dim));
        for u in elements {
            let adj = u.adjoint();
            push(u);
            push(adj);
        }
        Ok(Self {
            kind: ResourceKind::Discrete,
            dim,
            elements: out,
            symmetrized: true,
        })
    }

    /// Continuous resource set of self-adjoint generators, used as given.
    pub fn continuous(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = check_common_dim(&elements)?;
        if elements.iter().any(|a| !a.is_hermitian(MEMBER_TOL)) {
            return Err(Error::input("continuous resources must be self-adjoint"));
        }
        Ok(Self {
            kind: ResourceKind::Continuous,
            dim,
            elements,
            symmetrized: false,
        })
    }

    pub fn kind(&self) -> ResourceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Elements that are not multiples of the identity; the only ones that
    /// contribute commutators.
    pub fn generators(&self) -> Vec<ComplexMatrix> {
        self.elements
            .iter()
            .filter(|s| !is_scalar(s))
            .cloned()
            .collect()
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ResourceFile = serde_json::from_str(text)?;
        if file.elements.iter().any(|e| e.rows() != file.dim || e.cols() != file.dim) {
            return Err(Error::input(format!(
                "resource file declares dim {} but element shapes differ",
                file.dim
            )));
        }
        match file.kind {
            ResourceKind::Discrete => Self::discrete(file.elements),
            ResourceKind::Continuous => Self::continuous(file.elements),
        }
    }

    pub fn to_file(&self) -> ResourceFile {
        ResourceFile {
            kind: self.kind,
            dim: self.dim,
            elements: self.elements.clone(),
        }
    }
}

/// On-disk resource description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceFile {
    pub kind: ResourceKind,
    pub dim: usize,
    pub elements: Vec<ComplexMatrix>,
}

fn check_common_dim(elements: &[ComplexMatrix]) -> Result<usize> {
    let d = match elements.first() {
        Some(e) => e.require_square("resource element")?,
        None => return Err(Error::input("resource set is empty")),
    };
    if elements.iter().any(|e| e.rows() != d || e.cols() != d) {
        return Err(Error::input("resource elements must share one dimension"));
    }
    if elements.iter().any(|e| !e.all_finite()) {
        return Err(Error::input("resource elements have non-finite entries"));
    }
    Ok(d)
}

fn is_scalar(m: &ComplexMatrix) -> bool {
    let d = m.rows();
    let c = m.trace() / d as f64;
    (m - &ComplexMatrix::identity(d).scale(c)).max_abs() <= 1e-12
}

/// Resource set on a tensor product, each part embedded with identities on
/// the other factors (`s ⊗ I`, `I ⊗ s`, ...).
pub fn join_resources(parts: &[ResourceSet]) -> Result<ResourceSet> {
    if parts.len() < 2 {
        return Err(Error::input("join needs at least two parts"));
    }
    let kind = parts[0].kind;
    if parts.iter().any(|p| p.kind != kind) {
        return Err(Error::input("cannot join discrete and continuous resources"));
    }
    let dims: Vec<usize> = parts.iter().map(|p| p.dim).collect();
    let mut elements = Vec::new();
    for (j, part) in parts.iter().enumerate() {
        for s in &part.elements {
            elements.push(embed(s, j, &dims));
        }
    }
    match kind {
        ResourceKind::Discrete => ResourceSet::discrete(elements),
        ResourceKind::Continuous => ResourceSet::continuous(elements),
    }
}

/// `I ⊗ ... ⊗ x ⊗ ... ⊗ I` with `x` on factor `site`.
pub fn embed(x: &ComplexMatrix, site: usize, dims: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let f = if k == site {
            x.clone()
        } else {
            ComplexMatrix::identity(d)
        };
        out = out.kron(&f);
    }
    out
}

/// Derived objects for a resource set.
#[derive(Clone, Debug)]
pub struct LipschitzStructure {
    resource: ResourceSet,
    generators: Vec<ComplexMatrix>,
    ambient: Option<Vec<ComplexMatrix>>,
    commutant_basis: Vec<ComplexMatrix>,
    mean_zero_basis: Vec<ComplexMatrix>,
    e_fix: QuantumChannel,
    /// Eigenpairs of `Σ_s ad_s† ad_s` in mean-zero coordinates, ascending.
    laplacian_values: Vec<f64>,
    laplacian_vectors: ComplexMatrix,
}

impl LipschitzStructure {
    /// Structure on the full matrix algebra `M_d`.
    pub fn build(resource: &ResourceSet) -> Result<Self> {
        Self::build_in(resource, None)
    }

    /// Structure inside an ambient *-subalgebra given by an orthonormal
    /// Hilbert–Schmidt basis (`None` for all of `M_d`).
    pub fn build_in(resource: &ResourceSet, ambient: Option<Vec<ComplexMatrix>>) -> Result<Self> {
        let d = resource.dim;
        let n = d * d;
        // Ambient basis as columns of an n x a matrix in vec coordinates.
        let amb_cols: Vec<Vec<C64>> = match &ambient {
            None => (0..n)
                .map(|i| (0..n).map(|j| if i == j { ONE } else { ZERO }).collect())
                .collect(),
            Some(b) => {
                if b.iter().any(|m| m.rows() != d || m.cols() != d) {
                    return Err(Error::input("ambient basis dimension mismatch"));
                }
                b.iter().map(ComplexMatrix::vec_col).collect()
            }
        };
        let a = amb_cols.len();
        let generators = resource.generators();

        let (kernel, coimage) = if generators.is_empty() {
            ((0..a).map(|i| unit_vec(a, i)).collect(), Vec::new())
        } else {
            let id = ComplexMatrix::identity(d);
            let mut stacked = ComplexMatrix::zeros(generators.len() * n, a);
            for (g, s) in generators.iter().enumerate() {
                let ad = &id.kron(s) - &s.transpose().kron(&id);
                for (col, b) in amb_cols.iter().enumerate() {
                    let img = ad.mul_vec(b);
                    for (r, z) in img.into_iter().enumerate() {
                        stacked[(g * n + r, col)] = z;
                    }
                }
            }
            let tol = default_rank_tol(n);
            let (kernel, coimage, counts) = split_kernel(&stacked, tol);
            if counts.0 != counts.1 || counts.0 != counts.2 {
                return Err(Error::Conditioning {
                    at_tol: counts.0,
                    at_loose: counts.1,
                    at_tight: counts.2,
                });
            }
            (kernel, coimage)
        };

        let lift = |coords: &Vec<C64>| -> ComplexMatrix {
            let mut v = vec![ZERO; n];
            for (c, b) in coords.iter().zip(&amb_cols) {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += c * bi;
                }
            }
            ComplexMatrix::from_vec_col(d, &v)
        };
        let commutant_basis: Vec<ComplexMatrix> = kernel.iter().map(lift).collect();
        let mean_zero_basis: Vec<ComplexMatrix> = coimage.iter().map(lift).collect();

        let mut proj = ComplexMatrix::zeros(n, n);
        for b in &commutant_basis {
            let v = b.vec_col();
            proj += &ComplexMatrix::outer(&v, &v);
        }
        let e_fix = QuantumChannel::from_superop(proj)?;

        let k = mean_zero_basis.len();
        let mut lap = ComplexMatrix::zeros(k, k);
        if k > 0 {
            let images: Vec<ComplexMatrix> = mean_zero_basis
                .iter()
                .map(|v| laplacian_apply(&generators, v))
                .collect();
            for i in 0..k {
                for j in 0..k {
                    lap[(i, j)] = hs_inner(&mean_zero_basis[i], &images[j]);
                }
            }
        }
        let (mut vals, vecs) = if k > 0 {
            eigh(&lap)
        } else {
            (vec![], ComplexMatrix::zeros(0, 0))
        };
        // eigh sorts descending; keep ascending for the gap lookup.
        vals.reverse();
        let vecs = ComplexMatrix::from_fn(k, k, |r, c| vecs[(r, k - 1 - c)]);

        Ok(Self {
            resource: resource.clone(),
            generators,
            ambient,
            commutant_basis,
            mean_zero_basis,
            e_fix,
            laplacian_values: vals,
            laplacian_vectors: vecs,
        })
    }

    pub fn resource(&self) -> &ResourceSet {
        &self.resource
    }

    pub fn dim(&self) -> usize {
        self.resource.dim
    }

    /// Non-scalar resource elements.
    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn ambient(&self) -> Option<&[ComplexMatrix]> {
        self.ambient.as_deref()
    }

    pub fn commutant_basis(&self) -> &[ComplexMatrix] {
        &self.commutant_basis
    }

    pub fn mean_zero_basis(&self) -> &[ComplexMatrix] {
        &self.mean_zero_basis
    }

    /// Trace-preserving conditional expectation onto the commutant.
    pub fn e_fix(&self) -> &QuantumChannel {
        &self.e_fix
    }

    /// Smallest eigenvalue of `Σ_s ad_s† ad_s` on the mean-zero space.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.laplacian_values.first().copied()
    }

    pub(crate) fn laplacian_eigen(&self) -> (&[f64], &ComplexMatrix) {
        (&self.laplacian_values, &self.laplacian_vectors)
    }

    /// Lipschitz seminorm of `x`, which may be amplified: an `md x md`
    /// matrix is measured against `I_m ⊗ s`.
    pub fn lipschitz_norm(&self, x: &ComplexMatrix, variant: NormVariant) -> Result<f64> {
        let d = self.dim();
        if !x.is_square() || x.rows() % d != 0 || x.rows() == 0 {
            return Err(Error::input(format!(
                "lipschitz_norm: {}x{} matrix does not match dimension {d}",
                x.rows(),
                x.cols()
            )));
        }
        if variant == NormVariant::Gradient && self.resource.kind != ResourceKind::Continuous {
            return Err(Error::input(
                "gradient Lipschitz norm requires a continuous (self-adjoint) resource set",
            ));
        }
        Ok(self.lipschitz_norm_unchecked(x, variant))
    }

    pub(crate) fn lipschitz_norm_unchecked(&self, x: &ComplexMatrix, variant: NormVariant) -> f64 {
        let m = x.rows() / self.dim();
        let comms: Vec<ComplexMatrix> = self
            .generators
            .iter()
            .map(|s| amplified_commutator(s, x, m))
            .collect();
        lipschitz_from_commutators(&comms, variant)
    }

    /// `x - E_fix*(x)`.
    pub fn mean_zero_project(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let ex = self.e_fix.apply(x, true)?;
        Ok(x - &ex)
    }

    /// Orthogonal projection onto the mean-zero space inside the ambient
    /// algebra, blockwise for amplified matrices.
    pub fn project_mean_zero_subspace(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let m = x.rows() / d;
        crate::channel::map_blocks(x, m, d, |b| {
            let mut out = ComplexMatrix::zeros(d, d);
            for v in &self.mean_zero_basis {
                out.axpy(hs_inner(v, b), v);
            }
            out
        })
    }

    pub fn save_resource(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.resource.to_file())?)?;
        Ok(())
    }
}

/// Assembles a Lipschitz seminorm value from the commutators `[s_j, x]`.
pub(crate) fn lipschitz_from_commutators(comms: &[ComplexMatrix], variant: NormVariant) -> f64 {
    if comms.is_empty() {
        return 0.0;
    }
    match variant {
        NormVariant::Inf => comms.iter().map(spectral_norm).fold(0.0, f64::max),
        NormVariant::L2 => spectral_norm(&vstack(comms)),
        NormVariant::Gradient => spectral_norm(&vstack(comms)).max(spectral_norm(&hstack(comms))),
    }
}

/// `[I_m ⊗ s, x]` for an `md x md` matrix `x`.
pub(crate) fn amplified_commutator(s: &ComplexMatrix, x: &ComplexMatrix, m: usize) -> ComplexMatrix {
    if m == 1 {
        return commutator(s, x);
    }
    let big = ComplexMatrix::identity(m).kron(s);
    commutator(&big, x)
}

/// `Σ_s [s†, [s, x]]`.
fn laplacian_apply(generators: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for s in generators {
        out += &commutator(&s.adjoint(), &commutator(s, x));
    }
    out
}

pub(crate) fn vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let (r, c) = (blocks[0].rows(), blocks[0].cols());
    ComplexMatrix::from_fn(r * blocks.len(), c, |i, j| blocks[i / r][(i % r, j)])
}

pub(crate) fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let (r, c) = (blocks[0].rows(), blocks[0].cols());
    ComplexMatrix::from_fn(r, c * blocks.len(), |i, j| blocks[j / c][(i, j % c)])
}

fn unit_vec(n: usize, i: usize) -> Vec<C64> {
    (0..n).map(|j| if i == j { ONE } else { ZERO }).collect()
}

/// Kernel and coimage bases of `a` plus the kernel dimension at `tol`,
/// `10 tol` and `tol / 10`.
fn split_kernel(a: &ComplexMatrix, tol: f64) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, (usize, usize, usize)) {
    let k = a.cols();
    let padded = if a.rows() < k {
        ComplexMatrix::from_fn(k, k, |r, c| if r < a.rows() { a[(r, c)] } else { ZERO })
    } else {
        a.clone()
    };
    let dec = svd(&padded);
    let smax = dec.s[0];
    let count = |t: f64| dec.s.iter().filter(|&&s| s <= t * smax).count();
    let counts = (count(tol), count(10.0 * tol), count(tol / 10.0));
    let mut kernel = Vec::new();
    let mut coimage = Vec::new();
    for j in (0..k).rev() {
        let v = dec.v.column(j);
        if dec.s[j] <= tol * smax {
            kernel.push(v);
        } else {
            coimage.push(v);
        }
    }
    coimage.reverse();
    (kernel, coimage, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;
    use crate::random::{ginibre, stream_rng};
    use proptest::prelude::*;

    fn pauli_set() -> ResourceSet {
        let [_, x, y, z] = paulis();
        ResourceSet::discrete(vec![x, y, z]).unwrap()
    }

    #[test]
    fn symmetrization_adds_identity_and_adjoints() {
        let s = ResourceSet::discrete(vec![ComplexMatrix::diag(&[ONE, crate::linalg::I])]).unwrap();
        assert_eq!(s.elements().len(), 3);
        assert_eq!(s.generators().len(), 2);
        assert!(ResourceSet::discrete(vec![ComplexMatrix::identity(2).scale_re(2.0)]).is_err());
        assert!(ResourceSet::continuous(vec![ginibre(2, 2, &mut stream_rng(1, 0))]).is_err());
    }

    #[test]
    fn full_pauli_commutant_is_scalars() {
        let l = LipschitzStructure::build(&pauli_set()).unwrap();
        assert_eq!(l.commutant_basis().len(), 1);
        assert_eq!(l.mean_zero_basis().len(), 3);
        let x = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let ex = l.e_fix().apply(&x, false).unwrap();
        assert!((&ex - &ComplexMatrix::identity(2).scale_re(0.75)).max_abs() < 1e-12);
    }

    #[test]
    fn partial_pauli_commutant() {
        let [id, x, _, z] = paulis();
        let s = ResourceSet::discrete(vec![x.kron(&id), z.kron(&id)]).unwrap();
        let l = LipschitzStructure::build(&s).unwrap();
        assert_eq!(l.commutant_basis().len(), 4);
        // Every commutant element has the form I ⊗ b.
        for b in l.commutant_basis() {
            let red = crate::linalg::partial_trace(b, &crate::SubsystemShape::qubits(2), &[1]).unwrap();
            let back = id.kron(&red.scale_re(0.5));
            assert!((&back - b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_resource_has_no_mean_zero_space() {
        let s = ResourceSet::discrete(vec![ComplexMatrix::identity(3)]).unwrap();
        let l = LipschitzStructure::build(&s).unwrap();
        assert_eq!(l.commutant_basis().len(), 9);
        assert!(l.mean_zero_basis().is_empty());
        assert!(l.spectral_gap().is_none());
    }

    #[test]
    fn lipschitz_norm_examples() {
        let l = LipschitzStructure::build(&pauli_set()).unwrap();
        let [id, _, _, z] = paulis();
        assert!((l.lipschitz_norm(&z, NormVariant::Inf).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(l.lipschitz_norm(&id, NormVariant::Inf).unwrap(), 0.0);
        assert_eq!(l.lipschitz_norm(&id, NormVariant::L2).unwrap(), 0.0);
        assert!(l.lipschitz_norm(&z, NormVariant::Gradient).is_err());
        assert!(l.lipschitz_norm(&ComplexMatrix::identity(3), NormVariant::Inf).is_err());
    }

    #[test]
    fn gradient_norm_bounded_by_sqrt_count_times_inf() {
        let [_, x, y, z] = paulis();
        let s = ResourceSet::continuous(vec![x, y, z]).unwrap();
        let l = LipschitzStructure::build(&s).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let m = ginibre(2, 2, &mut rng);
            let g = l.lipschitz_norm(&m, NormVariant::Gradient).unwrap();
            let inf = l.lipschitz_norm(&m, NormVariant::Inf).unwrap();
            assert!(g <= 3f64.sqrt() * inf + 1e-9);
        }
    }

    #[test]
    fn gradient_form_matches_lindbladian_definition() {
        // Γ(x,x) = L(x*x) - x*L(x) - L(x*)x for L(x) = Σ a x a - (a²x + x a²)/2.
        let [_, x, _, z] = paulis();
        let jumps = [x.scale_re(0.7), z.scale_re(1.3)];
        let lind = |m: &ComplexMatrix| {
            let mut out = ComplexMatrix::zeros(2, 2);
            for a in &jumps {
                let a2 = a * a;
                out += &(&(a * m) * a);
                out -= &(&(&a2 * m) + &(m * &a2)).scale_re(0.5);
            }
            out
        };
        let mut rng = stream_rng(5, 0);
        let m = ginibre(2, 2, &mut rng);
        let md = m.adjoint();
        let gamma = &(&lind(&(&md * &m)) - &(&md * &lind(&m))) - &(&lind(&md) * &m);
        let mut direct = ComplexMatrix::zeros(2, 2);
        for a in &jumps {
            let c = commutator(a, &m);
            direct += &(&c.adjoint() * &c);
        }
        assert!((&gamma - &direct).max_abs() < 1e-12);
    }

    #[test]
    fn mean_zero_projection_examples() {
        let l = LipschitzStructure::build(&pauli_set()).unwrap();
        let [id, _, _, z] = paulis();
        assert!(l.mean_zero_project(&id).unwrap().max_abs() < 1e-12);
        assert!((&l.mean_zero_project(&z).unwrap() - &z).max_abs() < 1e-12);
        assert!((&l.mean_zero_project(&(&id + &z)).unwrap() - &z).max_abs() < 1e-12);
    }

    #[test]
    fn join_examples() {
        let [id, x, y, z] = paulis();
        let a = ResourceSet::discrete(vec![x.clone()]).unwrap();
        let b = ResourceSet::discrete(vec![z.clone()]).unwrap();
        let j = join_resources(&[a.clone(), b.clone()]).unwrap();
        let gens = j.generators();
        assert_eq!(gens.len(), 2);
        assert!((&gens[0] - &x.kron(&id)).max_abs() < 1e-15);
        assert!((&gens[1] - &id.kron(&z)).max_abs() < 1e-15);

        // E_fix of the join is the tensor product of the parts' E_fix.
        let la = LipschitzStructure::build(&a).unwrap();
        let lb = LipschitzStructure::build(&b).unwrap();
        let lj = LipschitzStructure::build(&j).unwrap();
        let t = crate::channel::tensor(la.e_fix(), lb.e_fix()).unwrap();
        assert!((t.superop() - lj.e_fix().superop()).max_abs() < 1e-10);

        let full = ResourceSet::discrete(vec![x, y, z]).unwrap();
        let jf = join_resources(&[full.clone(), full]).unwrap();
        let lf = LipschitzStructure::build(&jf).unwrap();
        assert_eq!(lf.commutant_basis().len(), 1);

        let c = ResourceSet::continuous(vec![paulis()[3].clone()]).unwrap();
        assert!(join_resources(&[a.clone(), c]).is_err());
        assert!(join_resources(&[a]).is_err());
    }

    #[test]
    fn resource_json_round_trip() {
        let text = r#"{"kind":"continuous","dim":2,"elements":[[[[1,0],[0,0]],[[0,0],[-1,0]]]]}"#;
        let s = ResourceSet::from_json_str(text).unwrap();
        assert_eq!(s.kind(), ResourceKind::Continuous);
        let again = serde_json::to_string(&s.to_file()).unwrap();
        let back = ResourceSet::from_json_str(&again).unwrap();
        assert_eq!(back.elements().len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn structure_invariants(seed in 0u64..5000) {
            let mut rng = stream_rng(seed, 2);
            let [id, x, _, z] = paulis();
            let u = crate::random::random_unitary(2, &mut rng);
            let s = ResourceSet::discrete(vec![x.kron(&id), id.kron(&z), u.kron(&id)]).unwrap();
            let l = LipschitzStructure::build(&s).unwrap();
            for b in l.commutant_basis() {
                for g in l.generators() {
                    prop_assert!(spectral_norm(&commutator(g, b)) <= 1e-8);
                }
                for v in l.mean_zero_basis() {
                    prop_assert!(hs_inner(b, v).norm() <= 1e-10);
                }
            }
            prop_assert_eq!(l.commutant_basis().len() + l.mean_zero_basis().len(), 16);
            let e = l.e_fix();
            let e2 = crate::channel::compose(e, e).unwrap();
            prop_assert!((e2.superop() - e.superop()).max_abs() <= 1e-9);
            let unit = e.apply(&ComplexMatrix::identity(4), true).unwrap();
            prop_assert!((&unit - &ComplexMatrix::identity(4)).max_abs() <= 1e-9);

            let a = ginibre(4, 4, &mut rng);
            let b = ginibre(4, 4, &mut rng);
            let lam = crate::random::normal_c64(&mut rng);
            for variant in [NormVariant::Inf, NormVariant::L2] {
                let na = l.lipschitz_norm(&a, variant).unwrap();
                let nb = l.lipschitz_norm(&b, variant).unwrap();
                let nab = l.lipschitz_norm(&(&a + &b), variant).unwrap();
                prop_assert!(nab <= na + nb + 1e-9);
                let nl = l.lipschitz_norm(&a.scale(lam), variant).unwrap();
                prop_assert!((nl - lam.norm() * na).abs() <= 1e-9 * (1.0 + na));
            }
            // Symmetric sets give adjoint-symmetric inf norms.
            let na = l.lipschitz_norm(&a, NormVariant::Inf).unwrap();
            let nad = l.lipschitz_norm(&a.adjoint(), NormVariant::Inf).unwrap();
            prop_assert!((na - nad).abs() <= 1e-9 * (1.0 + na));
            // Zero seminorm exactly on the commutant.
            let pm = l.mean_zero_project(&a).unwrap();
            let nz = l.lipschitz_norm(&pm, NormVariant::Inf).unwrap();
            prop_assert!((nz - na).abs() <= 1e-9 * (1.0 + na));
        }
    }
}
