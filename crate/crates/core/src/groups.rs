//! Finite unitary groups modulo global phase, word lengths, and the
//! expected-length identity on their commutative function algebras.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::channel::unitary_mixture;
use crate::engine::{complexity_estimate, expected_length, ComplexityEstimate, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};
use crate::resource::{LipschitzStructure, ResourceSet};

const KEY_GRID: f64 = 1e8;

/// Closure of a generating set, with identity at index 0.
#[derive(Clone, Debug)]
pub struct GroupTable {
    elements: Vec<ComplexMatrix>,
    generators: Vec<usize>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    word_lengths: Vec<usize>,
    index: HashMap<Vec<(i64, i64)>, usize>,
}

/// Multiplies by the phase making the first significant entry real positive.
pub fn canonical_phase(m: &ComplexMatrix) -> ComplexMatrix {
    let first = m.as_slice().iter().find(|z| z.norm() > 1e-6).copied();
    match first {
        Some(z) => m.scale(z.conj() / z.norm()),
        None => m.clone(),
    }
}

fn key(m: &ComplexMatrix) -> Vec<(i64, i64)> {
    m.as_slice()
        .iter()
        .map(|z| ((z.re * KEY_GRID).round() as i64, (z.im * KEY_GRID).round() as i64))
        .collect()
}

/// Breadth-first closure; the generating set is symmetrized (inverses added,
/// identities dropped) and BFS depth is the word length.
pub fn group_closure(generators: &[ComplexMatrix], max_order: usize) -> Result<GroupTable> {
    let d = match generators.first() {
        Some(g) => g.require_square("group generator")?,
        None => return Err(Error::input("group_closure needs at least one generator")),
    };
    if generators.iter().any(|g| g.rows() != d || !g.is_unitary(1e-9)) {
        return Err(Error::input("group generators must be unitaries of one dimension"));
    }
    let id = ComplexMatrix::identity(d);
    let mut gens: Vec<ComplexMatrix> = Vec::new();
    let mut seen: HashMap<Vec<(i64, i64)>, ()> = HashMap::new();
    seen.insert(key(&id), ());
    for g in generators {
        for h in [g.clone(), g.adjoint()] {
            let c = canonical_phase(&h);
            if seen.insert(key(&c), ()).is_none() {
                gens.push(c);
            }
        }
    }

    let mut elements = vec![id.clone()];
    let mut word_lengths = vec![0];
    let mut index = HashMap::new();
    index.insert(key(&id), 0usize);
    let mut head = 0;
    while head < elements.len() {
        for s in &gens {
            let h = canonical_phase(&(s * &elements[head]));
            let k = key(&h);
            if !index.contains_key(&k) {
                if elements.len() >= max_order {
                    return Err(Error::GroupTooLarge(max_order));
                }
                index.insert(k, elements.len());
                word_lengths.push(word_lengths[head] + 1);
                elements.push(h);
            }
        }
        head += 1;
    }
    let generators: Vec<usize> = gens.iter().map(|g| index[&key(g)]).collect();
    let n = elements.len();
    let mut table = vec![vec![0; n]; n];
    let mut inverse = vec![0; n];
    for i in 0..n {
        for j in 0..n {
            let p = canonical_phase(&(&elements[i] * &elements[j]));
            table[i][j] = *index
                .get(&key(&p))
                .ok_or_else(|| Error::input("closure failed to close under multiplication"))?;
            if table[i][j] == 0 {
                inverse[i] = j;
            }
        }
    }
    Ok(GroupTable {
        elements,
        generators,
        table,
        inverse,
        word_lengths,
        index,
    })
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Indices of the symmetrized generating set.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn word_lengths(&self) -> &[usize] {
        &self.word_lengths
    }

    /// Index of `g_i g_j`.
    pub fn multiply(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    /// Index of a unitary modulo phase, if it belongs to the group.
    pub fn find(&self, u: &ComplexMatrix) -> Option<usize> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return None;
        }
        self.index.get(&key(&canonical_phase(u))).copied()
    }

    /// Left-regular representation `λ_g e_h = e_{gh}`.
    pub fn regular_representation(&self, g: usize) -> ComplexMatrix {
        let n = self.order();
        let mut m = ComplexMatrix::zeros(n, n);
        for h in 0..n {
            m[(self.multiply(g, h), h)] = ONE;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthStatistics {
    pub order: usize,
    pub mean: f64,
    pub diameter: usize,
    /// `histogram[k]` = number of elements of word length `k`.
    pub histogram: Vec<usize>,
}

/// Statistics of the word length under the uniform measure on the group.
pub fn length_statistics(table: &GroupTable) -> LengthStatistics {
    let diameter = table.word_lengths.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0; diameter + 1];
    for &l in &table.word_lengths {
        histogram[l] += 1;
    }
    let total: usize = table.word_lengths.iter().sum();
    LengthStatistics {
        order: table.order(),
        mean: total as f64 / table.order() as f64,
        diameter,
        histogram,
    }
}

/// Lipschitz structure of `ℓ∞(G)` as diagonal matrices with the translation
/// unitaries `λ_s` as resources.
pub fn commutative_structure(table: &GroupTable) -> Result<LipschitzStructure> {
    let n = table.order();
    let gens: Vec<ComplexMatrix> = table
        .generators()
        .iter()
        .map(|&g| table.regular_representation(g))
        .collect();
    let resource = if gens.is_empty() {
        ResourceSet::discrete(vec![ComplexMatrix::identity(n)])?
    } else {
        ResourceSet::discrete(gens)?
    };
    let ambient = (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect();
    LipschitzStructure::build_in(&resource, Some(ambient))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutativeReport {
    pub order: usize,
    pub mean_length: f64,
    /// Value of the witness `E(ℓ) - ℓ`.
    pub witness_value: f64,
    pub estimate: ComplexityEstimate,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Expected length of `ℓ∞(G)` against the mean word length.
pub fn verify_expected_length_commutative(table: &GroupTable, opts: &SolveOptions) -> Result<CommutativeReport> {
    if table.order() > 64 {
        return Err(Error::input("commutative verification is limited to 64 elements"));
    }
    let stats = length_statistics(table);
    let structure = commutative_structure(table)?;
    let f: Vec<C64> = table
        .word_lengths()
        .iter()
        .map(|&l| C64::new(stats.mean - l as f64, 0.0))
        .collect();
    let witness = ComplexMatrix::diag(&f);
    let witness_lip = structure.lipschitz_norm(&witness, opts.variant)?;
    let witness_value = if witness_lip > 0.0 {
        f.iter().map(|z| z.norm()).fold(0.0, f64::max) / witness_lip.max(1.0)
    } else {
        0.0
    };
    let mut o = opts.clone();
    o.candidates.push(witness);
    let estimate = expected_length(&structure, &o)?;
    let tol = 1e-6;
    Ok(CommutativeReport {
        order: table.order(),
        mean_length: stats.mean,
        witness_value,
        lower_ok: estimate.lower >= stats.mean - tol,
        upper_ok: estimate.upper <= stats.mean + tol,
        estimate,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AveragingReport {
    pub mixture_length: f64,
    pub diameter: usize,
    pub estimate: ComplexityEstimate,
    pub holds: bool,
}

/// Complexity of `Φ_f = Σ f(g) Ad_g` against `Σ f(g) ℓ(g) ≤ diameter`.
pub fn averaging_channel_bound(table: &GroupTable, weights: &[f64], opts: &SolveOptions) -> Result<AveragingReport> {
    if weights.len() != table.order() {
        return Err(Error::input("one weight per group element required"));
    }
    crate::channel::check_distribution(weights, table.order())?;
    let channel = unitary_mixture(table.elements(), weights)?;
    let gens: Vec<ComplexMatrix> = table
        .generators()
        .iter()
        .map(|&g| table.elements()[g].clone())
        .collect();
    let resource = if gens.is_empty() {
        ResourceSet::discrete(vec![ComplexMatrix::identity(table.dim())])?
    } else {
        ResourceSet::discrete(gens)?
    };
    let structure = LipschitzStructure::build(&resource)?;
    let estimate = complexity_estimate(&channel, &structure, opts)?;
    let mixture_length: f64 = weights
        .iter()
        .zip(table.word_lengths())
        .map(|(w, &l)| w * l as f64)
        .sum();
    let stats = length_statistics(table);
    let tol = 1e-9;
    Ok(AveragingReport {
        mixture_length,
        diameter: stats.diameter,
        holds: estimate.upper <= mixture_length + tol && mixture_length <= stats.diameter as f64 + tol,
        estimate,
    })
}

/// `diag(1, ω, ..., ω^{n-1})` with `ω = e^{2πi/n}`.
pub fn cyclic_generator(n: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    ComplexMatrix::diag(&entries)
}

/// Permutation matrix sending basis vector `i` to `perm[i]`.
pub fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = ONE;
    }
    m
}
