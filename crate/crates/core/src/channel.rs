//! Quantum channels in Kraus, Choi and superoperator form.
//!
//! A [`QuantumChannel`] acts on states (Schrödinger picture). Its dual acts on
//! observables: `Φ*(x) = Σ K† x K`, so that `tr(Φ(ρ) x) = tr(ρ Φ*(x))`.
//!
//! Conventions, fixed throughout the crate:
//! - superoperators act on column-stacked vectors, `S = Σ conj(K) ⊗ K`;
//! - the Choi matrix is `J = Σ_ij |i><j| ⊗ Φ(|i><j|)` with the input factor
//!   first, so the identity channel has `J = |Ω><Ω|`, `|Ω> = Σ_i |ii>`.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, C64};
use crate::random::random_unitary;

/// Tolerance for accepting a map as CPTP at construction.
pub const CPTP_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    superop: ComplexMatrix,
    choi: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineKind {
    Compose,
    Mix,
    Tensor,
}

impl QuantumChannel {
    /// Builds a channel from Kraus operators, checking `Σ K† K = I`.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let d = match kraus.first() {
            Some(k) => k.require_square("kraus operator")?,
            None => return Err(Error::input("at least one Kraus operator is required")),
        };
        if kraus.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(Error::input("Kraus operators must share one square dimension"));
        }
        if kraus.iter().any(|k| !k.all_finite()) {
            return Err(Error::input("Kraus operators have non-finite entries"));
        }
        let mut completeness = ComplexMatrix::zeros(d, d);
        for k in &kraus {
            completeness += &(&k.adjoint() * k);
        }
        let residual = (&completeness - &ComplexMatrix::identity(d)).max_abs();
        if residual > CPTP_TOL {
            return Err(Error::Cptp {
                reason: "Kraus completeness sum differs from identity".into(),
                residual,
            });
        }
        let mut superop = ComplexMatrix::zeros(d * d, d * d);
        for k in &kraus {
            superop += &k.conj().kron(k);
        }
        let choi = superop_to_choi(&superop, d);
        Ok(Self {
            dim: d,
            kraus,
            superop,
            choi,
        })
    }

    /// Builds a channel from a column-stacked superoperator, validating
    /// complete positivity through the Choi matrix and deriving Kraus
    /// operators from its eigendecomposition.
    pub fn from_superop(superop: ComplexMatrix) -> Result<Self> {
        let n = superop.require_square("superoperator")?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::input(format!("superoperator size {n} is not a square")));
        }
        if !superop.all_finite() {
            return Err(Error::input("superoperator has non-finite entries"));
        }
        let choi = superop_to_choi(&superop, d);
        Self::from_choi_parts(d, choi, superop)
    }

    pub fn from_choi(choi: ComplexMatrix) -> Result<Self> {
        let n = choi.require_square("choi matrix")?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::input(format!("choi size {n} is not a square")));
        }
        let superop = choi_to_superop(&choi, d);
        Self::from_choi_parts(d, choi, superop)
    }

    fn from_choi_parts(d: usize, choi: ComplexMatrix, superop: ComplexMatrix) -> Result<Self> {
        let herm = (&choi - &choi.adjoint()).max_abs();
        if herm > CPTP_TOL {
            return Err(Error::Cptp {
                reason: "Choi matrix is not Hermitian".into(),
                residual: herm,
            });
        }
        let tp = (&choi_output_trace(&choi, d) - &ComplexMatrix::identity(d)).max_abs();
        if tp > CPTP_TOL {
            return Err(Error::Cptp {
                reason: "not trace preserving".into(),
                residual: tp,
            });
        }
        let (vals, vecs) = eigh(&choi);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -CPTP_TOL {
            return Err(Error::Cptp {
                reason: "Choi matrix is not positive semidefinite".into(),
                residual: -min,
            });
        }
        let cutoff = 1e-13 * vals[0].max(1.0);
        let kraus = vals
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cutoff)
            .map(|(j, &l)| {
                let s = l.sqrt();
                ComplexMatrix::from_fn(d, d, |a, i| vecs[(i * d + a, j)] * s)
            })
            .collect();
        Ok(Self {
            dim: d,
            kraus,
            superop,
            choi,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![ComplexMatrix::identity(d)]).expect("identity is CPTP")
    }

    /// Conjugation `ρ ↦ U ρ U†`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_unitary(1e-9) {
            return Err(Error::input("matrix is not unitary"));
        }
        Self::from_kraus(vec![u.clone()])
    }

    /// Completely depolarizing channel `ρ ↦ tr(ρ) I/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / d as f64;
        let mut choi = ComplexMatrix::identity(d * d);
        choi = choi.scale_re(s);
        Self::from_choi(choi).expect("depolarizing is CPTP")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Schrödinger-picture superoperator (column-stacking).
    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    /// Superoperator of the dual map, the Hilbert–Schmidt adjoint.
    pub fn dual_superop(&self) -> ComplexMatrix {
        self.superop.adjoint()
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// Applies `Φ` (or `Φ*` when `dual`) to a `d x d` matrix.
    pub fn apply(&self, x: &ComplexMatrix, dual: bool) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::input(format!(
                "channel of dimension {} applied to a {}x{} matrix",
                self.dim,
                x.rows(),
                x.cols()
            )));
        }
        Ok(self.apply_unchecked(x, dual))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix, dual: bool) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            let term = if dual {
                &(&k.adjoint() * x) * k
            } else {
                &(k * x) * &k.adjoint()
            };
            out += &term;
        }
        out
    }

    /// Applies `id_m ⊗ Φ` (or its dual) to an `md x md` matrix, ancilla first.
    pub fn apply_amplified(&self, x: &ComplexMatrix, m: usize, dual: bool) -> ComplexMatrix {
        map_blocks(x, m, self.dim, |b| self.apply_unchecked(b, dual))
    }

    /// Minimum Choi eigenvalue and trace-preservation residual.
    pub fn cptp_residuals(&self) -> (f64, f64) {
        let min = crate::linalg::eigvalsh(&self.choi).last().copied().unwrap_or(0.0);
        let tp = (&choi_output_trace(&self.choi, self.dim) - &ComplexMatrix::identity(self.dim))
            .max_abs();
        (min, tp)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = ChannelFile {
            dim: self.dim,
            kraus: self.kraus.clone(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        if file.kraus.iter().any(|k| k.rows() != file.dim || k.cols() != file.dim) {
            return Err(Error::input(format!(
                "channel file declares dim {} but Kraus shapes differ",
                file.dim
            )));
        }
        Self::from_kraus(file.kraus)
    }
}

/// On-disk channel description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

/// Applies `f` to each `d x d` block of an `md x md` matrix.
pub(crate) fn map_blocks(
    x: &ComplexMatrix,
    m: usize,
    d: usize,
    mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix,
) -> ComplexMatrix {
    assert_eq!(x.rows(), m * d);
    if m == 1 {
        return f(x);
    }
    let mut out = ComplexMatrix::zeros(m * d, m * d);
    for a in 0..m {
        for b in 0..m {
            let block = ComplexMatrix::from_fn(d, d, |r, c| x[(a * d + r, b * d + c)]);
            let y = f(&block);
            for r in 0..d {
                for c in 0..d {
                    out[(a * d + r, b * d + c)] = y[(r, c)];
                }
            }
        }
    }
    out
}

/// Reshuffles a column-stacked superoperator into its Choi matrix.
pub fn superop_to_choi(s: &ComplexMatrix, d: usize) -> ComplexMatrix {
    // J[(i,a),(j,b)] = <a|Φ(|i><j|)|b> = S[b d + a, j d + i]
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, a) = (row / d, row % d);
        let (j, b) = (col / d, col % d);
        s[(b * d + a, j * d + i)]
    })
}

pub fn choi_to_superop(j: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (q, p) = (row / d, row % d);
        let (c, r) = (col / d, col % d);
        j[(r * d + p, c * d + q)]
    })
}

/// Partial trace of a Choi matrix over its output factor.
fn choi_output_trace(j: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, k| (0..d).map(|a| j[(i * d + a, k * d + a)]).sum())
}

/// Superoperator of `Φ_1 ⊗ Φ_2` from the factors' superoperators.
pub fn tensor_superop(s1: &ComplexMatrix, d1: usize, s2: &ComplexMatrix, d2: usize) -> ComplexMatrix {
    let d = d1 * d2;
    // Column-stacked index of entry (r, c) with r = r1 d2 + r2, c = c1 d2 + c2.
    ComplexMatrix::from_fn(d * d, d * d, |out_idx, in_idx| {
        let (oc, or) = (out_idx / d, out_idx % d);
        let (ic, ir) = (in_idx / d, in_idx % d);
        let o1 = (oc / d2) * d1 + or / d2;
        let o2 = (oc % d2) * d2 + or % d2;
        let i1 = (ic / d2) * d1 + ir / d2;
        let i2 = (ic % d2) * d2 + ir % d2;
        s1[(o1, i1)] * s2[(o2, i2)]
    })
}

/// Composition, convex mixture, or tensor product of channels.
///
/// `Compose` applies the last channel first: `[Φ, Ψ] ↦ Φ ∘ Ψ`.
pub fn combine(
    kind: CombineKind,
    channels: &[QuantumChannel],
    weights: Option<&[f64]>,
) -> Result<QuantumChannel> {
    let first = channels
        .first()
        .ok_or_else(|| Error::input("combine needs at least one channel"))?;
    match kind {
        CombineKind::Compose => {
            let d = first.dim;
            if channels.iter().any(|c| c.dim != d) {
                return Err(Error::input("compose: dimension mismatch"));
            }
            let s = channels[1..]
                .iter()
                .fold(first.superop.clone(), |acc, c| &acc * &c.superop);
            QuantumChannel::from_superop(s)
        }
        CombineKind::Mix => {
            let w = weights.ok_or_else(|| Error::input("mix requires weights"))?;
            check_distribution(w, channels.len())?;
            let d = first.dim;
            if channels.iter().any(|c| c.dim != d) {
                return Err(Error::input("mix: dimension mismatch"));
            }
            let mut s = ComplexMatrix::zeros(d * d, d * d);
            for (c, &p) in channels.iter().zip(w) {
                s.axpy(C64::new(p, 0.0), &c.superop);
            }
            QuantumChannel::from_superop(s)
        }
        CombineKind::Tensor => {
            let mut s = first.superop.clone();
            let mut d = first.dim;
            for c in &channels[1..] {
                s = tensor_superop(&s, d, &c.superop, c.dim);
                d *= c.dim;
            }
            QuantumChannel::from_superop(s)
        }
    }
}

pub fn compose(outer: &QuantumChannel, inner: &QuantumChannel) -> Result<QuantumChannel> {
    combine(CombineKind::Compose, &[outer.clone(), inner.clone()], None)
}

pub fn tensor(a: &QuantumChannel, b: &QuantumChannel) -> Result<QuantumChannel> {
    combine(CombineKind::Tensor, &[a.clone(), b.clone()], None)
}

pub fn mix(channels: &[QuantumChannel], weights: &[f64]) -> Result<QuantumChannel> {
    combine(CombineKind::Mix, channels, Some(weights))
}

pub(crate) fn check_distribution(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::input(format!("{} weights for {n} items", w.len())));
    }
    if w.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::input("weights must be finite and nonnegative"));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Random-unitary channel `Σ μ_i U_i · U_i†`.
pub fn unitary_mixture(unitaries: &[ComplexMatrix], mu: &[f64]) -> Result<QuantumChannel> {
    check_distribution(mu, unitaries.len())?;
    if unitaries.iter().any(|u| !u.is_unitary(1e-9)) {
        return Err(Error::input("unitary_mixture: non-unitary element"));
    }
    let kraus: Vec<ComplexMatrix> = unitaries
        .iter()
        .zip(mu)
        .filter(|(_, &p)| p > 0.0)
        .map(|(u, &p)| u.scale_re(p.sqrt()))
        .collect();
    QuantumChannel::from_kraus(kraus)
}

/// Random channel with `k` Kraus operators from a Haar-random isometry.
pub fn random_channel(d: usize, k: usize, rng: &mut impl Rng) -> QuantumChannel {
    let u = random_unitary(d * k, rng);
    let kraus = (0..k)
        .map(|i| ComplexMatrix::from_fn(d, d, |r, c| u[(i * d + r, c)]))
        .collect();
    QuantumChannel::from_kraus(kraus).expect("isometry slices are complete")
}

/// Superoperator of the difference `a - b`.
pub fn superop_difference(a: &QuantumChannel, b: &QuantumChannel) -> Result<ComplexMatrix> {
    if a.dim != b.dim {
        return Err(Error::input("difference of channels with different dimensions"));
    }
    Ok(&a.superop - &b.superop)
}

/// Applies a column-stacked superoperator to a matrix.
pub fn apply_superop(s: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let d = x.rows();
    ComplexMatrix::from_vec_col(d, &s.mul_vec(&x.vec_col()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{paulis, I as IM, ZERO};
    use crate::random::{random_density, stream_rng};
    use proptest::prelude::*;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn identity_channel_choi_is_max_entangled() {
        let id = QuantumChannel::identity(2);
        let omega = [C64::new(1.0, 0.0), ZERO, ZERO, C64::new(1.0, 0.0)];
        assert!(close(id.choi(), &ComplexMatrix::outer(&omega, &omega), 1e-15));
    }

    #[test]
    fn pauli_x_channel_rank_one_choi() {
        let [_, x, _, _] = paulis();
        let ch = QuantumChannel::from_kraus(vec![x.clone()]).unwrap();
        let vals = crate::linalg::eigvalsh(ch.choi());
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!(vals[1..].iter().all(|v| v.abs() < 1e-12));
        // Permutation-like: each row of the superop has a single unit entry.
        for r in 0..4 {
            let nz = (0..4).filter(|&c| ch.superop()[(r, c)].norm() > 1e-12).count();
            assert_eq!(nz, 1);
        }
    }

    #[test]
    fn depolarizing_from_paulis() {
        let ps = paulis();
        let kraus = ps.iter().map(|p| p.scale_re(0.5)).collect();
        let ch = QuantumChannel::from_kraus(kraus).unwrap();
        assert!(close(ch.choi(), &ComplexMatrix::identity(4).scale_re(0.5), 1e-14));
        let rho = ComplexMatrix::from_real(2, 2, &[0.8, 0.3, 0.3, 0.2]);
        let out = ch.apply(&rho, false).unwrap();
        assert!(close(&out, &ComplexMatrix::identity(2).scale_re(0.5), 1e-14));
    }

    #[test]
    fn incomplete_kraus_is_rejected() {
        let [_, x, _, _] = paulis();
        match QuantumChannel::from_kraus(vec![x.scale_re(0.9)]) {
            Err(Error::Cptp { residual, .. }) => assert!((residual - 0.19).abs() < 1e-12),
            other => panic!("expected CPTP error, got {other:?}"),
        }
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(QuantumChannel::from_kraus(vec![a, b]), Err(Error::Input(_))));
    }

    #[test]
    fn dual_of_unitary_channel() {
        let [_, _, y, _] = paulis();
        let u = crate::linalg::matrix_exp(&y.scale(IM * 0.3)).unwrap();
        let ch = QuantumChannel::unitary(&u).unwrap();
        let x = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let got = ch.apply(&x, true).unwrap();
        assert!(close(&got, &(&(&u.adjoint() * &x) * &u), 1e-14));
        let id = QuantumChannel::identity(2);
        assert!(close(&id.apply(&x, false).unwrap(), &x, 1e-15));
        assert!(id.apply(&ComplexMatrix::identity(3), false).is_err());
    }

    #[test]
    fn combine_examples() {
        let [_, _, y, _] = paulis();
        let u = crate::linalg::matrix_exp(&y.scale(IM * 0.7)).unwrap();
        let a = QuantumChannel::unitary(&u).unwrap();
        let b = QuantumChannel::unitary(&u.adjoint()).unwrap();
        let c = compose(&a, &b).unwrap();
        assert!(close(c.superop(), QuantumChannel::identity(2).superop(), 1e-12));

        let id = QuantumChannel::identity(2);
        let m = mix(&[id.clone(), id.clone()], &[0.5, 0.5]).unwrap();
        assert!(close(m.superop(), id.superop(), 1e-15));
        assert!(mix(&[id.clone(), id.clone()], &[0.5, 0.6]).is_err());

        let t = tensor(&id, &id).unwrap();
        assert!(close(t.superop(), QuantumChannel::identity(4).superop(), 1e-15));
    }

    #[test]
    fn tensor_matches_kraus_products() {
        let mut rng = stream_rng(7, 0);
        let a = random_channel(2, 2, &mut rng);
        let b = random_channel(3, 2, &mut rng);
        let t = tensor(&a, &b).unwrap();
        let rho = random_density(2, &mut rng).kron(&random_density(3, &mut rng));
        let mut want = ComplexMatrix::zeros(6, 6);
        for ka in a.kraus() {
            for kb in b.kraus() {
                let k = ka.kron(kb);
                want += &(&(&k * &rho) * &k.adjoint());
            }
        }
        assert!(close(&t.apply(&rho, false).unwrap(), &want, 1e-12));
    }

    #[test]
    fn unitary_mixture_examples() {
        let ps = paulis();
        let single = unitary_mixture(&ps[1..2], &[1.0]).unwrap();
        assert!(close(single.superop(), QuantumChannel::unitary(&ps[1]).unwrap().superop(), 1e-15));
        let dep = unitary_mixture(&ps, &[0.25; 4]).unwrap();
        assert!(close(dep.superop(), QuantumChannel::completely_depolarizing(2).superop(), 1e-14));
        let pick = unitary_mixture(&ps[1..3], &[1.0, 0.0]).unwrap();
        assert!(close(pick.superop(), single.superop(), 1e-15));
        assert!(unitary_mixture(&[ps[1].scale_re(2.0)], &[1.0]).is_err());
        assert!(unitary_mixture(&ps[..2], &[0.7, 0.7]).is_err());
    }

    #[test]
    fn representations_round_trip() {
        let mut rng = stream_rng(11, 0);
        let ch = random_channel(3, 4, &mut rng);
        let from_s = QuantumChannel::from_superop(ch.superop().clone()).unwrap();
        assert!(close(from_s.choi(), ch.choi(), 1e-12));
        let from_k = QuantumChannel::from_kraus(from_s.kraus().to_vec()).unwrap();
        assert!(close(from_k.superop(), ch.superop(), 1e-9));
    }

    #[test]
    fn json_round_trip() {
        let dir = std::env::temp_dir().join(format!("chancomp-chan-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        let ch = QuantumChannel::completely_depolarizing(2);
        ch.write_json(&path).unwrap();
        let back = QuantumChannel::load_json(&path).unwrap();
        assert!(close(back.superop(), ch.superop(), 1e-14));
        let bad = r#"{"dim": 2, "kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        assert!(matches!(QuantumChannel::from_json_str(bad), Err(Error::Cptp { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn channel_invariants(seed in 0u64..10_000, d in 2usize..4, k in 1usize..4) {
            let mut rng = stream_rng(seed, 1);
            let a = random_channel(d, k, &mut rng);
            let (min_eig, tp) = a.cptp_residuals();
            prop_assert!(min_eig >= -1e-9);
            prop_assert!(tp <= 1e-9);
            let dual_unit = a.apply(&ComplexMatrix::identity(d), true).unwrap();
            prop_assert!(close(&dual_unit, &ComplexMatrix::identity(d), 1e-9));

            let rho = random_density(d, &mut rng);
            let x = crate::random::ginibre(d, d, &mut rng);
            let lhs = (&a.apply(&rho, false).unwrap() * &x).trace();
            let rhs = (&rho * &a.apply(&x, true).unwrap()).trace();
            prop_assert!((lhs - rhs).norm() <= 1e-8);

            let b = random_channel(d, 2, &mut rng);
            let c = random_channel(d, 2, &mut rng);
            let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            prop_assert!(close(left.superop(), right.superop(), 1e-9));

            let t = tensor(&a, &b).unwrap();
            let (m2, tp2) = t.cptp_residuals();
            prop_assert!(m2 >= -1e-9 && tp2 <= 1e-9);
        }
    }
}
