//! Dense eigendecomposition of unitary operators and the eigen-relations between a
//! walk and its expansion.
//!
//! A normal matrix `M` is split by diagonalizing the Hermitian part of `e^{−iφ}M`,
//! which shares its eigenvectors. Eigenvalues that collide under one rotation are
//! separated by recursing on the restricted block with another angle, until each
//! block is a multiple of the identity.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{to_dense, Walk, DEFAULT_DENSE_CAP};
use crate::io::{ser_c64, ser_c64_vec};
use crate::state::{StateVector, C64};
use crate::transform::{eigen_residual, nu_eigenvectors, IntersectionLink};

pub const UNITARY_TOL: f64 = 1e-8;
/// Eigenvalues closer than this are matched or grouped as one eigenspace.
pub const MATCH_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-8;

// restricted block counted as scalar
const SCALAR_TOL: f64 = 1e-9;
// relative gap below which rotated eigenvalues stay in one cluster
const CLUSTER_GAP: f64 = 1e-3;
const MAX_DEPTH: usize = 64;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub vector: StateVector,
}

/// Orthonormal eigenbasis of a unitary matrix, sorted by eigenvalue argument.
pub fn eigendecompose(m: &DMatrix<C64>) -> Result<Vec<EigenPair>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let n = m.nrows();
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            dim: n,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    let gram = m.adjoint() * m - DMatrix::<C64>::identity(n, n);
    let deviation = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let mut pairs = Vec::with_capacity(n);
    if n > 0 {
        split(m, DMatrix::identity(n, n), 0, &mut pairs)?;
    }
    pairs.sort_by(|a, b| a.value.arg().total_cmp(&b.value.arg()));
    Ok(pairs)
}

fn split(
    m: &DMatrix<C64>,
    basis: DMatrix<C64>,
    depth: usize,
    out: &mut Vec<EigenPair>,
) -> Result<()> {
    let s = basis.ncols();
    let block = basis.adjoint() * m * &basis;
    let mu = block.trace() / s as f64;
    let centered = &block - DMatrix::<C64>::identity(s, s) * mu;
    let scale = centered.iter().map(|z| z.norm()).fold(0.0, f64::max);

    if s == 1 || scale <= SCALAR_TOL {
        for col in basis.column_iter() {
            let v = DVector::from_iterator(col.len(), col.iter().copied());
            let value = (v.adjoint() * m * &v)[(0, 0)];
            out.push(EigenPair {
                value,
                vector: StateVector::from_raw(v.iter().copied().collect()),
            });
        }
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NoConvergence);
    }

    let phase = C64::from_polar(1.0, 0.3 + depth as f64 * GOLDEN_ANGLE);
    let c = centered / C64::new(scale, 0.0);
    let h = (&c * phase.conj() + c.adjoint() * phase) * C64::new(0.5, 0.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();

    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut start = 0;
    while start < s {
        let mut end = start + 1;
        while end < s
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= CLUSTER_GAP
        {
            end += 1;
        }
        let w = DMatrix::from_fn(s, end - start, |i, j| {
            eig.eigenvectors[(i, order[start + j])]
        });
        // a cluster spanning the whole block made no progress; only the angle changes
        split(m, &basis * w, depth + 1, out)?;
        start = end;
    }
    Ok(())
}

/// Eigenpairs of a walk's evolution operator.
pub fn walk_spectrum(walk: &Walk) -> Result<Vec<EigenPair>> {
    eigendecompose(&to_dense(walk.operator(), DEFAULT_DENSE_CAP)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftedPair {
    #[serde(serialize_with = "ser_c64")]
    pub eigenvalue: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NuPair {
    pub index: usize,
    #[serde(serialize_with = "ser_c64")]
    pub rayleigh: C64,
    pub residual: f64,
    pub parity_ok: bool,
}

/// Outcome of comparing the spectrum of an expanded walk with the spectrum
/// predicted from the reduced walk: lifted eigenpairs plus `k − 1` copies of
/// `(−1)^l` carried by the ν vectors.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    pub pass: bool,
    pub n: usize,
    pub n_expanded: usize,
    pub k: usize,
    pub tessellations: usize,
    pub parity: f64,
    pub lifted: Vec<LiftedPair>,
    pub nu: Vec<NuPair>,
    pub matched: usize,
    #[serde(serialize_with = "ser_c64_vec")]
    pub unmatched_expanded: Vec<C64>,
    #[serde(serialize_with = "ser_c64_vec")]
    pub unmatched_predicted: Vec<C64>,
    /// Largest sine of a principal angle between a predicted and a computed eigenspace.
    pub max_subspace_sine: f64,
    pub dimension_ok: bool,
}

impl Theorem2Report {
    pub fn max_lift_residual(&self) -> f64 {
        self.lifted.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn max_nu_residual(&self) -> f64 {
        self.nu.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

/// Checks every eigen-relation between `reduced` and `expanded`: lifted eigenvectors
/// of the reduced walk, the ν vectors with eigenvalue `(−1)^l`, the eigenvalue
/// multisets, the eigenspaces and the dimension count.
pub fn verify_theorem2(
    reduced: &Walk,
    expanded: &Walk,
    link: &IntersectionLink,
) -> Result<Theorem2Report> {
    let (n, nt, k) = (reduced.n(), expanded.n(), link.k());
    if link.reduced_len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: link.reduced_len(),
        });
    }
    if link.expanded_len() != nt {
        return Err(Error::DimensionMismatch {
            expected: nt,
            found: link.expanded_len(),
        });
    }
    let l = expanded.cover().len();
    let parity = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    let parity_c = C64::new(parity, 0.0);

    let small = walk_spectrum(reduced)?;
    let big = walk_spectrum(expanded)?;

    let mut predicted: Vec<(C64, StateVector)> = Vec::with_capacity(n + k - 1);
    let mut lifted = Vec::with_capacity(n);
    for pair in &small {
        let v = link.lift(&pair.vector)?;
        let residual = eigen_residual(expanded.operator(), pair.value, &v)?;
        lifted.push(LiftedPair {
            eigenvalue: pair.value,
            residual,
        });
        predicted.push((pair.value, v));
    }
    let mut nu = Vec::with_capacity(k.saturating_sub(1));
    for (i, v) in nu_eigenvectors(&link.clique, nt)?.into_iter().enumerate() {
        let residual = eigen_residual(expanded.operator(), parity_c, &v)?;
        let mut image = v.amplitudes().to_vec();
        use crate::evolution::Operator;
        expanded.operator().apply_in_place(&mut image);
        let rayleigh = v.inner(&StateVector::from_raw(image));
        nu.push(NuPair {
            index: i + 1,
            rayleigh,
            residual,
            parity_ok: (rayleigh - parity_c).norm() <= MATCH_TOL,
        });
        predicted.push((parity_c, v));
    }

    let dimension_ok = n + k - 1 == nt && predicted.len() == big.len();

    // greedy matching of the two eigenvalue multisets, closest pairs first
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, (p, _)) in predicted.iter().enumerate() {
        for (j, b) in big.iter().enumerate() {
            let d = (p - b.value).norm();
            if d <= MATCH_TOL {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_p = vec![false; predicted.len()];
    let mut used_b = vec![false; big.len()];
    let mut matched = 0;
    for (_, i, j) in candidates {
        if !used_p[i] && !used_b[j] {
            used_p[i] = true;
            used_b[j] = true;
            matched += 1;
        }
    }
    let unmatched_predicted = (0..predicted.len())
        .filter(|&i| !used_p[i])
        .map(|i| predicted[i].0)
        .collect::<Vec<_>>();
    let unmatched_expanded = (0..big.len())
        .filter(|&j| !used_b[j])
        .map(|j| big[j].value)
        .collect::<Vec<_>>();

    let max_subspace_sine = subspace_mismatch(&predicted, &big, nt);

    let pass = lifted.iter().all(|p| p.residual <= RESIDUAL_TOL)
        && nu.iter().all(|p| p.residual <= RESIDUAL_TOL && p.parity_ok)
        && unmatched_predicted.is_empty()
        && unmatched_expanded.is_empty()
        && dimension_ok
        && max_subspace_sine <= MATCH_TOL;

    Ok(Theorem2Report {
        pass,
        n,
        n_expanded: nt,
        k,
        tessellations: l,
        parity,
        lifted,
        nu,
        matched,
        unmatched_expanded,
        unmatched_predicted,
        max_subspace_sine,
        dimension_ok,
    })
}

/// Groups computed eigenvalues into eigenspaces and compares each with the span of
/// the predicted vectors for that eigenvalue. A dimension mismatch counts as sine 1.
fn subspace_mismatch(predicted: &[(C64, StateVector)], big: &[EigenPair], nt: usize) -> f64 {
    let mut groups: Vec<(C64, Vec<usize>)> = Vec::new();
    for (j, pair) in big.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|(rep, _)| (rep - pair.value).norm() <= MATCH_TOL)
        {
            Some((_, members)) => members.push(j),
            None => groups.push((pair.value, vec![j])),
        }
    }
    let columns =
        |vs: &[&StateVector]| DMatrix::from_fn(nt, vs.len(), |i, j| vs[j].amplitudes()[i]);
    let mut worst: f64 = 0.0;
    for (rep, members) in &groups {
        let q: Vec<&StateVector> = members.iter().map(|&j| &big[j].vector).collect();
        let e: Vec<&StateVector> = predicted
            .iter()
            .filter(|(v, _)| (v - rep).norm() <= MATCH_TOL)
            .map(|(_, s)| s)
            .collect();
        if e.len() != q.len() {
            return 1.0;
        }
        let overlap = columns(&e).adjoint() * columns(&q);
        let sigma_min = overlap
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((1.0 - sigma_min.min(1.0).powi(2)).max(0.0).sqrt());
    }
    worst
}
