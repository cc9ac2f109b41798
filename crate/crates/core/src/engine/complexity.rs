use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diamond::diamond_norm;
use super::lmo::{hs_radius, LiftedBall};
use super::{Certificate, ComplexityEstimate, SolveOptions};
use crate::channel::{tensor, QuantumChannel};
use crate::error::{Error, Result};
use crate::groups::{group_closure, length_statistics, GroupTable};
use crate::linalg::{spectral_norm, top_singular_pair, ComplexMatrix, C64};
use crate::random::{ginibre, random_vector, stream_rng, SeededRng};
use crate::resource::{join_resources, LipschitzStructure, NormVariant, ResourceKind, ResourceSet};

const GROUP_ORDER_CAP: usize = 256;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Channel,
    ExpectedLength,
}

/// `(id_m ⊗ (Φ* - id))(x)`.
fn objective(ch: &QuantumChannel, m: usize, x: &ComplexMatrix) -> ComplexMatrix {
    &ch.apply_amplified(x, m, true) - x
}

/// Hilbert–Schmidt adjoint of [`objective`].
fn objective_adjoint(ch: &QuantumChannel, m: usize, y: &ComplexMatrix) -> ComplexMatrix {
    &ch.apply_amplified(y, m, false) - y
}

struct Run {
    value: f64,
    witness: ComplexMatrix,
    iterations: usize,
    warnings: Vec<String>,
}

fn ascend(
    ch: &QuantumChannel,
    ball: &LiftedBall,
    m: usize,
    start: ComplexMatrix,
    opts: &SolveOptions,
    rng: &mut SeededRng,
) -> Run {
    let n = ball.dim();
    let mut x = ball.rescale(&ball.project(&start));
    let mut value = spectral_norm(&objective(ch, m, &x));
    let mut iterations = 0;
    let mut warnings = Vec::new();
    let mut warm = None;
    for _ in 0..opts.max_iter {
        let (s, mut u, mut v) = top_singular_pair(&objective(ch, m, &x));
        if s <= 1e-300 {
            u = random_vector(n, rng);
            v = random_vector(n, rng);
        }
        let g = ball.project(&objective_adjoint(ch, m, &ComplexMatrix::outer(&u, &v)));
        if g.fro_norm() <= 1e-14 {
            break;
        }
        let out = ball.maximize_from(&g, opts.lmo, opts.lmo_iter, opts.step, warm.take());
        warm = out.state.clone();
        iterations += out.iterations;
        if !out.converged && warnings.is_empty() {
            warnings.push(format!(
                "linear maximization stopped at iteration cap (level {m}, residual {:.2e}); lower bound may be loose",
                out.residual
            ));
        }
        let cand = ball.rescale(&out.point);
        let cv = spectral_norm(&objective(ch, m, &cand));
        if cv > value + opts.tol * value.max(1.0) {
            x = cand;
            value = cv;
        } else {
            break;
        }
    }
    Run {
        value,
        witness: x,
        iterations,
        warnings,
    }
}

fn pad(x: &ComplexMatrix, to: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(to, to, |r, c| {
        if r < x.rows() && c < x.cols() {
            x[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn run_level(
    ch: &QuantumChannel,
    structure: &LipschitzStructure,
    opts: &SolveOptions,
    m: usize,
    starts: Vec<ComplexMatrix>,
) -> Run {
    let d = structure.dim();
    let ball = LiftedBall::new(structure, opts.variant, m);
    if ball.is_trivial() {
        return Run {
            value: 0.0,
            witness: ComplexMatrix::zeros(m * d, m * d),
            iterations: 0,
            warnings: Vec::new(),
        };
    }
    let jobs: Vec<Option<ComplexMatrix>> = starts
        .into_iter()
        .map(Some)
        .chain((0..opts.restarts).map(|_| None))
        .collect();
    let runs: Vec<Run> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(i, job)| {
            let mut rng = stream_rng(opts.seed, ((m as u64) << 32) | i as u64);
            let start = job.unwrap_or_else(|| ginibre(m * d, m * d, &mut rng));
            ascend(ch, &ball, m, start, opts, &mut rng)
        })
        .collect();
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    let mut warnings = Vec::new();
    for r in runs {
        iterations += r.iterations;
        for w in &r.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one restart");
    Run {
        value: best.value,
        witness: best.witness,
        iterations,
        warnings,
    }
}

/// Certified value of a candidate observable: it is projected onto the
/// amplified mean-zero space and scaled into the unit Lipschitz ball.
pub fn evaluate_witness(
    channel: &QuantumChannel,
    structure: &LipschitzStructure,
    x: &ComplexMatrix,
    variant: NormVariant,
) -> Result<f64> {
    let d = structure.dim();
    if channel.dim() != d || !x.is_square() || x.rows() % d != 0 || x.rows() == 0 {
        return Err(Error::input("witness shape does not match channel and resources"));
    }
    let m = x.rows() / d;
    let ball = LiftedBall::new(structure, variant, m);
    let xh = ball.rescale(&ball.project(x));
    Ok(spectral_norm(&objective(channel, m, &xh)))
}

fn closure_of(structure: &LipschitzStructure) -> Option<GroupTable> {
    if structure.resource().kind() != ResourceKind::Discrete || structure.generators().is_empty() {
        return None;
    }
    group_closure(structure.generators(), GROUP_ORDER_CAP).ok()
}

/// `Σ_g c_g ℓ(g)` when the channel is a convex combination `Σ_g c_g Ad_g`
/// over the group generated by discrete resources; an upper bound on the
/// complexity at every ancilla level.
pub fn group_mixture_length(channel: &QuantumChannel, structure: &LipschitzStructure) -> Option<f64> {
    let table = closure_of(structure)?;
    mixture_length_in(channel, &table)
}

fn mixture_length_in(channel: &QuantumChannel, table: &GroupTable) -> Option<f64> {
    let d = channel.dim();
    let n = table.order();
    let rows = d * d * d * d;
    let cols: Vec<Vec<C64>> = table
        .elements()
        .iter()
        .map(|g| g.conj().kron(g).vec_col())
        .collect();
    let b = nalgebra::DMatrix::<C64>::from_fn(rows, n, |r, c| cols[c][r]);
    let target = nalgebra::DVector::<C64>::from_vec(channel.superop().vec_col());
    let svd = b.clone().svd(true, true);
    let coef = svd.solve(&target, 1e-10).ok()?;
    let resid = (&b * &coef - &target).norm();
    if resid > 1e-8 * (1.0 + target.norm()) {
        return None;
    }
    let mut total = 0.0;
    for (k, c) in coef.iter().enumerate() {
        if c.im.abs() > 1e-8 || c.re < -1e-9 {
            return None;
        }
        total += c.re.max(0.0) * table.word_lengths()[k] as f64;
    }
    Some(total)
}

fn certificates(
    ch: &QuantumChannel,
    structure: &LipschitzStructure,
    opts: &SolveOptions,
    m_top: usize,
    target: Target,
) -> Result<Vec<Certificate>> {
    let mut certs = Vec::new();
    let radius = hs_radius(structure, opts.variant, m_top);
    let table = closure_of(structure);
    let word_mean = table.as_ref().map(|t| length_statistics(t).mean);
    match target {
        Target::ExpectedLength => {
            if radius > 0.0 {
                certs.push(Certificate::new(format!("el_spectral@m={m_top}"), radius));
            }
            if let Some(w) = word_mean {
                certs.push(Certificate::new("word_length_mean", w));
            }
        }
        Target::Channel => {
            let mut el_up = radius;
            if let Some(w) = word_mean {
                el_up = el_up.min(w);
            }
            if radius > 0.0 {
                certs.push(Certificate::new(format!("spectral_gap@m={m_top}"), 2.0 * radius));
            }
            let diff = &ch.superop().clone() - &ComplexMatrix::identity(ch.dim() * ch.dim());
            let dn = diamond_norm(&diff)?;
            certs.push(Certificate::new("el_times_diamond", el_up * dn.primal.max(0.0)));
            if let Some(t) = &table {
                if let Some(v) = mixture_length_in(ch, t) {
                    certs.push(Certificate::new("group_mixture", v));
                }
            }
        }
    }
    certs.extend(opts.certificates.iter().cloned());
    Ok(certs)
}

fn estimate(
    ch: &QuantumChannel,
    structure: &LipschitzStructure,
    opts: &SolveOptions,
    levels: &[usize],
    target: Target,
) -> Result<ComplexityEstimate> {
    opts.validate()?;
    let d = structure.dim();
    if ch.dim() != d {
        return Err(Error::input(format!(
            "channel dimension {} differs from resource dimension {d}",
            ch.dim()
        )));
    }
    if opts.variant == NormVariant::Gradient && structure.resource().kind() != ResourceKind::Continuous {
        return Err(Error::input("gradient variant requires continuous resources"));
    }
    for c in &opts.candidates {
        if !c.is_square() || c.rows() % d != 0 || c.rows() == 0 {
            return Err(Error::input("candidate witness shape does not match dimension"));
        }
    }
    let mut levels: Vec<usize> = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();

    let mut best: Option<(f64, ComplexMatrix, usize)> = None;
    let mut iterations = 0;
    let mut warnings: Vec<String> = Vec::new();
    let mut previous: Option<f64> = None;
    for &m in &levels {
        let mut starts: Vec<ComplexMatrix> = opts
            .candidates
            .iter()
            .filter(|c| c.rows() == m * d)
            .cloned()
            .collect();
        if let Some((_, w, _)) = &best {
            starts.push(pad(w, m * d));
        }
        let run = run_level(ch, structure, opts, m, starts);
        iterations += run.iterations;
        for w in run.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        if let Some(p) = previous {
            if run.value < p - 1e-12 {
                warnings.push(format!("level {m} lower bound fell below previous level"));
            }
        }
        previous = Some(run.value.max(previous.unwrap_or(0.0)));
        if best.as_ref().is_none_or(|b| run.value > b.0) {
            best = Some((run.value, run.witness, m));
        }
    }
    let mut m_top = levels.last().copied().unwrap_or(1);
    for c in &opts.candidates {
        let m = c.rows() / d;
        if levels.contains(&m) {
            continue;
        }
        m_top = m_top.max(m);
        let ball = LiftedBall::new(structure, opts.variant, m);
        let w = ball.rescale(&ball.project(c));
        let v = spectral_norm(&objective(ch, m, &w));
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, w, m));
        }
    }
    let (lower, witness, witness_level) = best.ok_or_else(|| Error::input("no ancilla levels"))?;

    let trivial = structure.mean_zero_basis().is_empty() || structure.generators().is_empty();
    let certs = if trivial {
        vec![Certificate::new("trivial", 0.0)]
    } else {
        certificates(ch, structure, opts, m_top, target)?
    };
    let mut upper = certs.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    if lower > upper + 1e-9 * upper.max(1.0) {
        return Err(Error::LemmaViolation(format!(
            "witness value {lower} exceeds certified upper bound {upper}"
        )));
    }
    upper = upper.max(lower);
    Ok(ComplexityEstimate {
        lower,
        upper,
        witness,
        witness_level,
        certificates: certs,
        iterations,
        seed: opts.seed,
        tolerance: opts.tol,
        levels,
        warnings,
    })
}

/// Interval for the Lipschitz complexity `||Φ* - id : (A, |||·|||) → M_d||`.
pub fn complexity_estimate(
    channel: &QuantumChannel,
    structure: &LipschitzStructure,
    opts: &SolveOptions,
) -> Result<ComplexityEstimate> {
    estimate(channel, structure, opts, &[1], Target::Channel)
}

/// Interval for the complete complexity, truncated to the ancilla levels in
/// `opts.levels` (default `{1, 2, d}`).
pub fn cb_complexity_estimate(
    channel: &QuantumChannel,
    structure: &LipschitzStructure,
    opts: &SolveOptions,
) -> Result<ComplexityEstimate> {
    let levels = if opts.levels.is_empty() {
        vec![1, 2, structure.dim()]
    } else {
        opts.levels.clone()
    };
    estimate(channel, structure, opts, &levels, Target::Channel)
}

/// Expected length: the complexity of the fixed-point conditional
/// expectation, i.e. `sup ||x||` over the mean-zero unit Lipschitz ball.
pub fn expected_length(structure: &LipschitzStructure, opts: &SolveOptions) -> Result<ComplexityEstimate> {
    let levels = if opts.levels.is_empty() { vec![1] } else { opts.levels.clone() };
    estimate(structure.e_fix(), structure, opts, &levels, Target::ExpectedLength)
}

/// `F = f₁' ⊗ I + I ⊗ f₂'` from two witnesses, where `f' = [[0, f], [f†, 0]]`
/// is the Hermitian dilation. Ancilla factors are moved in front, so the
/// result lives at level `4 m₁ m₂` over `M_{d₁} ⊗ M_{d₂}`.
pub fn tensor_witness(
    first: &ComplexityEstimate,
    d1: usize,
    second: &ComplexityEstimate,
    d2: usize,
) -> Result<ComplexMatrix> {
    let dil1 = dilate(&first.witness);
    let dil2 = dilate(&second.witness);
    let (n1, n2) = (dil1.rows(), dil2.rows());
    if n1 % d1 != 0 || n2 % d2 != 0 {
        return Err(Error::input("witness dimensions do not match the factors"));
    }
    let (a1, a2) = (n1 / d1, n2 / d2);
    let f = &dil1.kron(&ComplexMatrix::identity(n2)) + &ComplexMatrix::identity(n1).kron(&dil2);
    // (a1, i1, a2, i2) -> (a1, a2, i1, i2)
    let old = |a: usize, b: usize, i: usize, j: usize| ((a * d1 + i) * a2 + b) * d2 + j;
    let newi = |a: usize, b: usize, i: usize, j: usize| ((a * a2 + b) * d1 + i) * d2 + j;
    let n = n1 * n2;
    let mut perm = vec![0; n];
    for a in 0..a1 {
        for b in 0..a2 {
            for i in 0..d1 {
                for j in 0..d2 {
                    perm[newi(a, b, i, j)] = old(a, b, i, j);
                }
            }
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| f[(perm[r], perm[c])]))
}

/// Outcome of comparing a product channel with its two factors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorAdditivityReport {
    pub first: ComplexityEstimate,
    pub second: ComplexityEstimate,
    pub joint: ComplexityEstimate,
    /// Certified value of the combined witness on the product channel.
    pub combined_witness_value: f64,
    pub tolerance: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Complete estimates for `Φ₁`, `Φ₂` and `Φ₁ ⊗ Φ₂` (resources joined
/// site-wise). The product lower bound is the better of its own search and
/// the combined witness from [`tensor_witness`].
pub fn tensor_additivity(
    first: (&QuantumChannel, &ResourceSet),
    second: (&QuantumChannel, &ResourceSet),
    opts: &SolveOptions,
    tolerance: f64,
) -> Result<TensorAdditivityReport> {
    let s1 = LipschitzStructure::build(first.1)?;
    let s2 = LipschitzStructure::build(second.1)?;
    let e1 = cb_complexity_estimate(first.0, &s1, opts)?;
    let e2 = cb_complexity_estimate(second.0, &s2, opts)?;
    let (d1, d2) = (s1.dim(), s2.dim());
    let f = tensor_witness(&e1, d1, &e2, d2)?;
    let product = tensor(first.0, second.0)?;
    let joint_structure = LipschitzStructure::build(&join_resources(&[first.1.clone(), second.1.clone()])?)?;
    let combined = evaluate_witness(&product, &joint_structure, &f, opts.variant)?;
    let mut o = opts.clone();
    o.candidates.push(f);
    let joint = cb_complexity_estimate(&product, &joint_structure, &o)?;
    Ok(TensorAdditivityReport {
        lower_ok: combined.max(joint.lower) >= e1.lower + e2.lower - tolerance,
        upper_ok: joint.upper <= e1.upper + e2.upper + tolerance,
        combined_witness_value: combined,
        first: e1,
        second: e2,
        joint,
        tolerance,
    })
}

fn dilate(f: &ComplexMatrix) -> ComplexMatrix {
    let n = f.rows();
    let fa = f.adjoint();
    ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
        (true, false) => f[(r, c - n)],
        (false, true) => fa[(r - n, c)],
        _ => C64::new(0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;
    use crate::resource::ResourceSet;

    fn pauli_structure() -> LipschitzStructure {
        let [_, x, y, z] = paulis();
        LipschitzStructure::build(&ResourceSet::discrete(vec![x, y, z]).unwrap()).unwrap()
    }

    #[test]
    fn identity_channel_is_zero() {
        let l = pauli_structure();
        let e = complexity_estimate(&QuantumChannel::identity(2), &l, &SolveOptions::new(1)).unwrap();
        assert_eq!(e.lower, 0.0);
        assert!(e.upper.abs() < 1e-9, "{:?}", e.certificates);
    }

    #[test]
    fn depolarizing_matches_expected_length_and_witness_floor() {
        let l = pauli_structure();
        let opts = SolveOptions::new(2);
        let dep = QuantumChannel::completely_depolarizing(2);
        let c = complexity_estimate(&dep, &l, &opts).unwrap();
        let el = expected_length(&l, &opts).unwrap();
        let floor = 3f64.sqrt() / (2.0 * 2f64.sqrt());
        assert!(c.lower >= floor - 1e-9 && el.lower >= floor - 1e-9);
        assert!((c.lower - el.lower).abs() < 1e-4);
        assert!(el.upper >= floor && (el.upper - 0.75).abs() < 1e-12);
        assert!(c.lower <= c.upper);
    }

    #[test]
    fn conjugation_by_x_with_x_resource() {
        let [_, x, _, z] = paulis();
        let l = LipschitzStructure::build(&ResourceSet::discrete(vec![x.clone()]).unwrap()).unwrap();
        let ch = QuantumChannel::unitary(&x).unwrap();
        let opts = SolveOptions::new(3);
        let v = evaluate_witness(&ch, &l, &z.scale_re(0.5), NormVariant::Inf).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let e = complexity_estimate(&ch, &l, &opts).unwrap();
        assert!(e.lower >= 1.0 - 1e-9);
        assert!(e.upper <= 1.0 + 1e-9, "{:?}", e.certificates);
    }

    #[test]
    fn witness_invariants_hold() {
        let l = pauli_structure();
        let mut rng = stream_rng(9, 0);
        let ch = crate::channel::random_channel(2, 2, &mut rng);
        let e = cb_complexity_estimate(&ch, &l, &SolveOptions::new(9)).unwrap();
        let m = e.witness_level;
        assert!(l.lipschitz_norm(&e.witness, NormVariant::Inf).unwrap() <= 1.0 + 1e-7);
        let ex = ch.dim();
        let fixed = crate::channel::map_blocks(&e.witness, m, ex, |b| l.e_fix().apply_unchecked(b, true));
        assert!(fixed.max_abs() <= 1e-8);
        let v = spectral_norm(&objective(&ch, m, &e.witness));
        assert!((v - e.lower).abs() <= 1e-9);
        for c in &e.certificates {
            assert!(c.value + 1e-9 >= e.lower);
        }
    }
}
