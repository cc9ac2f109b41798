//! Quantum Markov semigroups generated by resources, return times to the
//! fixed-point algebra, and complexity trajectories.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{check_distribution, unitary_mixture, QuantumChannel};
use crate::engine::{
    cb_complexity_estimate, diamond_norm, expected_length, relative_entropy, Certificate,
    ComplexityEstimate, SolveOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{default_rank_tol, eigenvalues, matrix_exp, nullspace_basis, ComplexMatrix};
use crate::random::{random_pure_state, stream_rng};
use crate::resource::{LipschitzStructure, ResourceKind, ResourceSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemigroupKind {
    /// `exp(t (Φ_μ - id))` for a unitary mixture `Φ_μ`.
    Discrete,
    /// `exp(t L)` with `L(x) = Σ_j a_j x a_j - ½{a_j², x}`.
    Lindblad,
}

#[derive(Clone, Debug)]
pub struct SemigroupFamily {
    kind: SemigroupKind,
    generator: ComplexMatrix,
    structure: LipschitzStructure,
    e_fix: ComplexMatrix,
}

const VALIDATION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

/// Builds the semigroup for a resource set. For the discrete kind `mu` is a
/// distribution over `resource.elements()` (uniform when `None`); the
/// Lindblad kind ignores it.
pub fn make_semigroup(kind: SemigroupKind, resource: &ResourceSet, mu: Option<&[f64]>) -> Result<SemigroupFamily> {
    let d = resource.dim();
    let generator = match kind {
        SemigroupKind::Discrete => {
            if resource.kind() != ResourceKind::Discrete {
                return Err(Error::input("discrete semigroup needs unitary resources"));
            }
            let n = resource.elements().len();
            let uniform = vec![1.0 / n as f64; n];
            let w = mu.unwrap_or(&uniform);
            check_distribution(w, n)?;
            let phi = unitary_mixture(resource.elements(), w)?;
            phi.superop() - &ComplexMatrix::identity(d * d)
        }
        SemigroupKind::Lindblad => {
            if resource.kind() != ResourceKind::Continuous {
                return Err(Error::input("Lindblad semigroup needs self-adjoint jumps"));
            }
            lindblad_superop(resource.elements())
        }
    };
    let structure = LipschitzStructure::build(resource)?;
    let e_fix = structure.e_fix().superop().clone();

    for b in structure.commutant_basis() {
        let img = generator.mul_vec(&b.vec_col());
        let r = img.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if r > 1e-8 {
            return Err(Error::input(format!("generator moves a commutant element (residual {r:.2e})")));
        }
    }
    let fixed = nullspace_basis(&generator, default_rank_tol(d * d).max(1e-10))?;
    if fixed.len() != structure.commutant_basis().len() {
        return Err(Error::input(format!(
            "fixed-point space has dimension {} but the commutant has {}",
            fixed.len(),
            structure.commutant_basis().len()
        )));
    }
    let family = SemigroupFamily {
        kind,
        generator,
        structure,
        e_fix,
    };
    for t in VALIDATION_TIMES {
        family.evolve(t)?;
    }
    Ok(family)
}

/// Column-stacked superoperator of `x ↦ Σ a x a - ½(a² x + x a²)`.
fn lindblad_superop(jumps: &[ComplexMatrix]) -> ComplexMatrix {
    let d = jumps[0].rows();
    let id = ComplexMatrix::identity(d);
    let mut g = ComplexMatrix::zeros(d * d, d * d);
    for a in jumps {
        let a2 = a * a;
        g += &a.transpose().kron(a);
        g -= &(&id.kron(&a2) + &a2.transpose().kron(&id)).scale_re(0.5);
    }
    g
}

impl SemigroupFamily {
    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn structure(&self) -> &LipschitzStructure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// `T_t = exp(t G)`, revalidated as a channel.
    pub fn evolve(&self, t: f64) -> Result<QuantumChannel> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::input(format!("evolution time must be finite and non-negative, got {t}")));
        }
        QuantumChannel::from_superop(matrix_exp(&self.generator.scale_re(t))?)
    }

    /// Superoperator of `T_t - E_fix`.
    pub fn distance_superop(&self, t: f64) -> Result<ComplexMatrix> {
        let s = matrix_exp(&self.generator.scale_re(t))?;
        Ok(&s - &self.e_fix)
    }

    /// Largest real part among the non-fixed eigenvalues of the generator;
    /// errors when it is not negative.
    pub fn spectral_gap(&self) -> Result<f64> {
        let mut re: Vec<f64> = eigenvalues(&self.generator).iter().map(|z| z.re).collect();
        re.sort_by(|a, b| b.total_cmp(a));
        let k = self.structure.commutant_basis().len();
        match re.get(k) {
            None => Err(Error::NoReturnTime(0.0)),
            Some(&v) if v >= -1e-9 => Err(Error::NoReturnTime(v)),
            Some(&v) => Ok(-v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReturnNorm {
    Diamond,
    /// Upper bound on `||T_t* - E*||_{∞→∞}`; the returned time is itself an
    /// upper bound.
    InfInfUpper,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReturnTime {
    pub time: f64,
    pub norm: ReturnNorm,
    pub resolution: f64,
    pub upper_bound_only: bool,
    pub monotone: bool,
}

pub const RETURN_TIME_RESOLUTION: f64 = 1e-4;

fn distance(family: &SemigroupFamily, t: f64, norm: ReturnNorm) -> Result<f64> {
    let s = family.distance_superop(t)?;
    let r = diamond_norm(&s)?;
    Ok(match norm {
        ReturnNorm::Diamond => r.value,
        // cb ∞→∞ norm of the dual map equals the diamond norm of the map;
        // take the upper side of the solver.
        ReturnNorm::InfInfUpper => r.primal,
    })
}

/// First time the semigroup is within `eps` of its fixed-point projection.
pub fn return_time(family: &SemigroupFamily, eps: f64, norm: ReturnNorm) -> Result<ReturnTime> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::input("return-time threshold must lie in (0, 2)"));
    }
    family.spectral_gap()?;
    let done = |time: f64, monotone: bool| ReturnTime {
        time,
        norm,
        resolution: RETURN_TIME_RESOLUTION,
        upper_bound_only: norm == ReturnNorm::InfInfUpper,
        monotone,
    };
    if distance(family, 0.0, norm)? <= eps {
        return Ok(done(0.0, true));
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while distance(family, hi, norm)? > eps {
        hi *= 2.0;
        guard += 1;
        if guard > 40 {
            return Err(Error::NoReturnTime(0.0));
        }
    }
    let samples: Vec<f64> = (0..=8)
        .map(|k| distance(family, hi * k as f64 / 8.0, norm))
        .collect::<Result<_>>()?;
    let monotone = samples.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let mut lo = 0.0;
    if !monotone {
        // Scan for the first crossing, then bisect inside it.
        let steps = 400;
        for k in 1..=steps {
            let t = hi * k as f64 / steps as f64;
            if distance(family, t, norm)? <= eps {
                lo = hi * (k - 1) as f64 / steps as f64;
                hi = t;
                break;
            }
        }
    }
    while hi - lo > RETURN_TIME_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if distance(family, mid, norm)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(done(hi, monotone))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Linear,
    Plateau,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Plateau => "plateau",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub estimates: Vec<ComplexityEstimate>,
    pub return_time: Option<f64>,
    pub regimes: Vec<Regime>,
    pub plateau: ComplexityEstimate,
}

/// Geometric grid of `points` times from `0.05 k` to `5 k`.
pub fn default_grid(k: f64, points: usize) -> Vec<f64> {
    let (a, b) = (0.05 * k, 5.0 * k);
    if points == 1 {
        return vec![a];
    }
    (0..points)
        .map(|i| a * (b / a).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Complete-complexity estimates along the semigroup.
///
/// The discrete kind attaches the certificate `C(T_t) ≤ t`; the plateau
/// reference is the expected length.
pub fn complexity_trajectory(family: &SemigroupFamily, grid: &[f64], opts: &SolveOptions) -> Result<TrajectoryRecord> {
    if grid.is_empty() {
        return Err(Error::input("trajectory grid is empty"));
    }
    if grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("grid must be non-negative and strictly increasing"));
    }
    let k = match return_time(family, 0.5, ReturnNorm::Diamond) {
        Ok(r) => Some(r.time),
        Err(Error::NoReturnTime(_)) => None,
        Err(e) => return Err(e),
    };
    let plateau = expected_length(family.structure(), opts)?;
    let estimates: Vec<ComplexityEstimate> = grid
        .par_iter()
        .map(|&t| {
            let ch = family.evolve(t)?;
            let mut o = opts.clone();
            if family.kind == SemigroupKind::Discrete {
                o.certificates.push(Certificate::new("semigroup_time", t));
            }
            cb_complexity_estimate(&ch, family.structure(), &o)
        })
        .collect::<Result<_>>()?;
    let regimes = grid
        .iter()
        .map(|&t| match k {
            Some(k) if t > k => Regime::Plateau,
            _ => Regime::Linear,
        })
        .collect();
    Ok(TrajectoryRecord {
        times: grid.to_vec(),
        estimates,
        return_time: k,
        regimes,
        plateau,
    })
}

impl TrajectoryRecord {
    /// CSV with 17 significant digits and a `claim` column.
    pub fn to_csv(&self, claim: &str) -> String {
        let mut out = String::from("time,lower,upper,certificate_min,regime,seed,claim\n");
        for ((t, e), r) in self.times.iter().zip(&self.estimates).zip(&self.regimes) {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                t,
                e.lower,
                e.upper,
                e.certificate_min(),
                r.label(),
                e.seed,
                claim
            );
        }
        out
    }
}

const MLSI_NET: usize = 64;
const MLSI_SEED: u64 = 0x6d6c_7369;

/// Empirical decay rate `min_ρ -(d/dt) log D(T_t ρ || E ρ)` at `t = 0.01`
/// over a fixed net of pure states, by central differences. Not a certified
/// constant.
pub fn empirical_mlsi(family: &SemigroupFamily) -> Result<f64> {
    let (t, h) = (0.01, 1e-3);
    let d = family.dim();
    let ch_m = family.evolve(t - h)?;
    let ch_p = family.evolve(t + h)?;
    let e = family.structure().e_fix();
    let rates: Vec<Option<f64>> = (0..MLSI_NET)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let psi = random_pure_state(d, &mut stream_rng(MLSI_SEED, i as u64));
            let rho = ComplexMatrix::outer(&psi, &psi);
            let er = e.apply(&rho, false)?;
            let dm = relative_entropy(&ch_m.apply(&rho, false)?, &er)?;
            let dp = relative_entropy(&ch_p.apply(&rho, false)?, &er)?;
            if dm <= 1e-10 || dp <= 1e-10 {
                return Ok(None);
            }
            Ok(Some(-(dp.ln() - dm.ln()) / (2.0 * h)))
        })
        .collect::<Result<_>>()?;
    rates
        .into_iter()
        .flatten()
        .reduce(f64::min)
        .ok_or_else(|| Error::input("no state in the net has positive relative entropy"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;

    fn pauli_mixture() -> SemigroupFamily {
        let [_, x, y, z] = paulis();
        make_semigroup(SemigroupKind::Discrete, &ResourceSet::discrete(vec![x, y, z]).unwrap(), None).unwrap()
    }

    #[test]
    fn discrete_pauli_closed_form() {
        let f = pauli_mixture();
        let e = QuantumChannel::completely_depolarizing(2);
        for t in [0.0, 0.3, 2.0] {
            let tt = f.evolve(t).unwrap();
            let expect = &ComplexMatrix::identity(4).scale_re((-t as f64).exp())
                + &e.superop().scale_re(1.0 - (-t as f64).exp());
            assert!((tt.superop() - &expect).max_abs() < 1e-10);
        }
        let s = f.evolve(0.4).unwrap();
        let u = f.evolve(0.7).unwrap();
        let st = f.evolve(1.1).unwrap();
        let comp = crate::channel::compose(&s, &u).unwrap();
        assert!((comp.superop() - st.superop()).max_abs() < 1e-8);
        let far = f.evolve(1e3).unwrap();
        assert!((far.superop() - e.superop()).max_abs() < 1e-6);
        assert!(f.evolve(-1.0).is_err());
    }

    #[test]
    fn dephasing_fixed_algebra() {
        let z = paulis()[3].clone();
        let f = make_semigroup(SemigroupKind::Lindblad, &ResourceSet::continuous(vec![z]).unwrap(), None).unwrap();
        assert_eq!(f.structure().commutant_basis().len(), 2);
        let r = return_time(&f, 0.5, ReturnNorm::Diamond).unwrap();
        // ||T_t - E||_⋄ = e^{-2t} for dephasing with jump σZ.
        assert!((r.time - 0.5 * 2f64.ln()).abs() < 1e-3, "{}", r.time);
    }

    #[test]
    fn return_time_examples() {
        let f = pauli_mixture();
        let r = return_time(&f, 0.5, ReturnNorm::Diamond).unwrap();
        assert!((r.time - 3f64.ln()).abs() < 1e-3);
        assert_eq!(return_time(&f, 1.9, ReturnNorm::Diamond).unwrap().time, 0.0);
        let r2 = return_time(&f, 0.25, ReturnNorm::Diamond).unwrap();
        assert!(r2.time >= r.time);
        assert!(return_time(&f, 2.5, ReturnNorm::Diamond).is_err());
    }

    #[test]
    fn gapless_generator_is_rejected() {
        let [id, x, _, _] = paulis();
        // Jump I ⊗ X on two qubits leaves a large fixed algebra but is gapped;
        // a zero jump is gapless on everything.
        let zero = ComplexMatrix::zeros(2, 2);
        let f = make_semigroup(SemigroupKind::Lindblad, &ResourceSet::continuous(vec![zero]).unwrap(), None).unwrap();
        assert!(matches!(f.spectral_gap(), Err(Error::NoReturnTime(_))));
        let g = make_semigroup(SemigroupKind::Lindblad, &ResourceSet::continuous(vec![id.kron(&x)]).unwrap(), None).unwrap();
        assert!(g.spectral_gap().is_ok());
    }

    #[test]
    fn zero_grid_point() {
        let f = pauli_mixture();
        let rec = complexity_trajectory(&f, &[0.0], &SolveOptions::new(1)).unwrap();
        assert!(rec.estimates[0].lower.abs() < 1e-12);
        assert!(rec.estimates[0].upper.abs() < 1e-9);
        let csv = rec.to_csv("semigroup-upper-line");
        assert!(csv.starts_with("time,lower,upper,certificate_min,regime,seed,claim\n"));
        assert!(complexity_trajectory(&f, &[1.0, 0.5], &SolveOptions::new(1)).is_err());
    }

    #[test]
    fn empirical_mlsi_is_positive_for_depolarizing() {
        let [_, x, y, z] = paulis();
        let f = make_semigroup(SemigroupKind::Lindblad, &ResourceSet::continuous(vec![x, y, z]).unwrap(), None).unwrap();
        let lam = empirical_mlsi(&f).unwrap();
        assert!(lam > 0.0 && lam.is_finite());
    }
}
