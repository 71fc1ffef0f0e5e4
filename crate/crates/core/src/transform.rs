//! Intersection expansion and reduction at the operator level.
//!
//! Expansion replaces a vertex `u` by a `k`-clique and substitutes `|u⟩ → |ũ⟩` in
//! every polygon state containing `u`. Reduction is the inverse: a multi-vertex
//! intersection whose per-tessellation amplitude restrictions are mutually
//! proportional collapses to one vertex, with `|ũ⟩` read off one chosen tessellation.
//! Both produce an [`IntersectionLink`] tying the smaller walk to the larger one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evolution::{Operator, Walk};
use crate::graph::{
    check_shared_intersection, expand_vertex_graph, polygon_intersections,
    reduce_intersection_graph, VertexId, VertexMap,
};
use crate::state::{
    lift_state, polygon_state, project_state, CliqueState, PolygonState, StateVector, C64,
};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Residual allowed by [`lift_eigenvector`] before it reports an inconsistency.
pub const LIFT_RESIDUAL_TOL: f64 = 1e-9;

/// What to expand and how: vertex `u` becomes a clique carrying `amplitudes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSpec {
    u: VertexId,
    amplitudes: Vec<C64>,
}

impl ExpansionSpec {
    pub fn new(u: VertexId, amplitudes: Vec<C64>) -> Result<Self> {
        // validates length and norm; the vertex ids are placeholders
        CliqueState::new((0..amplitudes.len()).collect(), amplitudes.clone())?;
        Ok(ExpansionSpec { u, amplitudes })
    }

    pub fn uniform(u: VertexId, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroCliqueSize);
        }
        let a = C64::new(1.0 / (k as f64).sqrt(), 0.0);
        Ok(ExpansionSpec {
            u,
            amplitudes: vec![a; k],
        })
    }

    pub fn u(&self) -> VertexId {
        self.u
    }

    pub fn k(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Relates a reduced walk on `G` to an expanded walk on `G̃`: vertex `u` of `G`
/// corresponds to `clique` in `G̃`, and `map` sends reduced ids to expanded ids.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionLink {
    pub u: VertexId,
    pub clique: CliqueState,
    pub map: VertexMap,
}

impl IntersectionLink {
    pub fn k(&self) -> usize {
        self.clique.k()
    }

    pub fn reduced_len(&self) -> usize {
        self.map.source_len()
    }

    pub fn expanded_len(&self) -> usize {
        self.map.target_len()
    }

    pub fn lift(&self, psi: &StateVector) -> Result<StateVector> {
        lift_state(psi, self.u, &self.clique, &self.map)
    }

    pub fn project(&self, psi_t: &StateVector, tol: f64) -> Result<StateVector> {
        project_state(psi_t, &self.clique, &self.map, tol)
    }

    /// The lift as an `ñ × n` isometry, column `v` being the lift of `|v⟩`.
    pub fn lift_matrix(&self) -> Result<DMatrix<C64>> {
        let (n, nt) = (self.reduced_len(), self.expanded_len());
        let mut m = DMatrix::zeros(nt, n);
        for v in 0..n {
            let col = self.lift(&StateVector::basis(n, v))?;
            for (i, a) in col.amplitudes().iter().enumerate() {
                m[(i, v)] = *a;
            }
        }
        Ok(m)
    }

    /// The same link with `|ũ⟩` multiplied by a unit phase.
    pub fn with_phase(&self, phase: C64) -> Result<IntersectionLink> {
        let amps = self.clique.amplitudes().iter().map(|a| a * phase).collect();
        Ok(IntersectionLink {
            u: self.u,
            clique: CliqueState::new(self.clique.vertices().to_vec(), amps)?,
            map: self.map.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Expanded {
    pub walk: Walk,
    pub link: IntersectionLink,
    pub notes: Vec<String>,
}

/// Expands `spec.u` into a clique and substitutes `|u⟩ → |ũ⟩` in every polygon
/// state that contains it.
pub fn expand_walk(walk: &Walk, spec: &ExpansionSpec) -> Result<Expanded> {
    let u = spec.u();
    let rw = expand_vertex_graph(walk.graph(), walk.cover(), u, spec.k())?;
    let clique = CliqueState::new(rw.map.image(u).to_vec(), spec.amplitudes().to_vec())?;

    let mut states = Vec::with_capacity(walk.cover().len());
    for (t, tess) in rw.cover.tessellations().iter().enumerate() {
        let row = walk
            .polygon_states(t)
            .iter()
            .zip(tess.polygons())
            .map(|(st, poly)| {
                if !st.polygon().contains(u) {
                    return Ok(st.clone());
                }
                let amps = st
                    .iter()
                    .flat_map(|(v, c)| {
                        if v == u {
                            spec.amplitudes().iter().map(|uj| c * uj).collect()
                        } else {
                            vec![c]
                        }
                    })
                    .collect();
                polygon_state(poly.clone(), amps)
            })
            .collect::<Result<Vec<_>>>()?;
        states.push(row);
    }

    Ok(Expanded {
        walk: Walk::from_states(rw.graph, states)?,
        link: IntersectionLink {
            u,
            clique,
            map: rw.map,
        },
        notes: rw.notes,
    })
}

/// Global phase applied to the clique state read off a tessellation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PhaseConvention {
    /// The normalized restriction as it stands.
    #[default]
    Raw,
    /// Rotate so the first non-negligible amplitude is real and positive.
    FirstRealPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    pub tol: f64,
    /// Tessellation `|ũ⟩` is read from.
    pub canonical_j: usize,
    pub phase: PhaseConvention,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            tol: DEFAULT_TOL,
            canonical_j: 0,
            phase: PhaseConvention::Raw,
        }
    }
}

/// Evidence that a reduction was legitimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCertificate {
    /// The collapsed set, ascending.
    pub intersection: Vec<VertexId>,
    pub canonical_j: usize,
    /// `|ũ⟩` over `intersection`.
    pub clique: CliqueState,
    /// `c̃_u^{(t)} = ⟨ũ|r_t⟩` per tessellation, `r_t` being the restriction to the set.
    pub coefficients: Vec<C64>,
    /// `beta[j][i] = c̃_u^{(j)} / c̃_u^{(i)}`, `None` where the denominator vanishes.
    pub beta: Vec<Vec<Option<C64>>>,
    /// `‖r_t − c̃_u^{(t)}|ũ⟩‖` per tessellation.
    pub residuals: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub walk: Walk,
    /// Reduced → expanded; `link.u` is the collapsed vertex.
    pub link: IntersectionLink,
    /// Expanded → reduced ids.
    pub collapse: VertexMap,
    pub certificate: ReductionCertificate,
}

// below this mass a tessellation's restriction is treated as absent
const ZERO_MASS: f64 = 1e-12;
const PHASE_FLOOR: f64 = 1e-10;

fn restriction(walk: &Walk, t: usize, polygon: usize, set: &[VertexId]) -> Vec<C64> {
    let st = &walk.polygon_states(t)[polygon];
    set.iter()
        .map(|&v| st.amplitude_of(v).unwrap_or_default())
        .collect()
}

fn normalize_restriction(r: &[C64], j: usize, phase: PhaseConvention) -> Result<Vec<C64>> {
    let mass = r.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if mass <= ZERO_MASS {
        return Err(Error::ZeroMass(j));
    }
    let mut amps: Vec<C64> = r.iter().map(|a| a / mass).collect();
    if phase == PhaseConvention::FirstRealPositive {
        if let Some(lead) = amps.iter().find(|a| a.norm() > PHASE_FLOOR).copied() {
            let rot = lead.conj() / lead.norm();
            amps.iter_mut().for_each(|a| *a *= rot);
        }
    }
    Ok(amps)
}

/// `|ũ⟩` read from tessellation `canonical_j`: the normalized restriction of its
/// polygon state to `set`, ordered by ascending vertex id.
pub fn extract_clique_state(
    walk: &Walk,
    set: &[VertexId],
    canonical_j: usize,
    phase: PhaseConvention,
) -> Result<CliqueState> {
    if canonical_j >= walk.cover().len() {
        return Err(Error::NoSuchTessellation(canonical_j));
    }
    let (sorted, polygons) = check_shared_intersection(walk.graph(), walk.cover(), set)?;
    let r = restriction(walk, canonical_j, polygons[canonical_j], &sorted);
    CliqueState::new(sorted, normalize_restriction(&r, canonical_j, phase)?)
}

/// Collapses `set` to one vertex. Every tessellation's restriction to `set` must be
/// a multiple of the one in `opts.canonical_j`, up to `opts.tol`.
pub fn reduce_walk(walk: &Walk, set: &[VertexId], opts: &ReduceOptions) -> Result<Reduced> {
    let l = walk.cover().len();
    if opts.canonical_j >= l {
        return Err(Error::NoSuchTessellation(opts.canonical_j));
    }
    let (sorted, polygons) = check_shared_intersection(walk.graph(), walk.cover(), set)?;
    let rw = reduce_intersection_graph(walk.graph(), walk.cover(), &sorted)?;

    let restrictions: Vec<Vec<C64>> = (0..l)
        .map(|t| restriction(walk, t, polygons[t], &sorted))
        .collect();
    let cs = normalize_restriction(
        &restrictions[opts.canonical_j],
        opts.canonical_j,
        opts.phase,
    )?;

    let mut coefficients = Vec::with_capacity(l);
    let mut residuals = Vec::with_capacity(l);
    for r in &restrictions {
        let c: C64 = cs.iter().zip(r).map(|(u, a)| u.conj() * a).sum();
        let res = cs
            .iter()
            .zip(r)
            .map(|(u, a)| (a - c * u).norm_sqr())
            .sum::<f64>()
            .sqrt();
        coefficients.push(c);
        residuals.push(res);
    }
    let (worst_t, worst) = residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (t, r)| if r > acc.1 { (t, r) } else { acc });
    if worst > opts.tol {
        return Err(Error::ReductionNotApplicable {
            residual: worst,
            pair: (opts.canonical_j, worst_t),
        });
    }

    let in_set = |v: VertexId| sorted.binary_search(&v).is_ok();
    let mut states: Vec<Vec<PolygonState>> = Vec::with_capacity(l);
    for (t, tess) in rw.cover.tessellations().iter().enumerate() {
        let row = walk
            .polygon_states(t)
            .iter()
            .zip(tess.polygons())
            .enumerate()
            .map(|(p, (st, poly))| {
                if p != polygons[t] {
                    return polygon_state(poly.clone(), st.amplitudes().to_vec());
                }
                let mut amps = Vec::with_capacity(poly.len());
                let mut placed = false;
                for (v, c) in st.iter() {
                    if !in_set(v) {
                        amps.push(c);
                    } else if !placed {
                        amps.push(coefficients[t]);
                        placed = true;
                    }
                }
                // off by at most the residual; restore unit norm
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                amps.iter_mut().for_each(|a| *a /= norm);
                polygon_state(poly.clone(), amps)
            })
            .collect::<Result<Vec<_>>>()?;
        states.push(row);
    }

    let beta = coefficients
        .iter()
        .map(|cj| {
            coefficients
                .iter()
                .map(|ci| (ci.norm() > ZERO_MASS).then(|| cj / ci))
                .collect()
        })
        .collect();

    let clique = CliqueState::new(sorted.clone(), cs)?;
    let u = rw.map.image(sorted[0])[0];
    let link = IntersectionLink {
        u,
        clique: clique.clone(),
        map: rw.map.invert(),
    };
    Ok(Reduced {
        walk: Walk::from_states(rw.graph, states)?,
        link,
        collapse: rw.map,
        certificate: ReductionCertificate {
            intersection: sorted,
            canonical_j: opts.canonical_j,
            clique,
            coefficients,
            beta,
            residuals,
            tol: opts.tol,
        },
    })
}

/// Outcome of [`reduce_all`].
#[derive(Debug, Clone)]
pub struct FullReduction {
    pub walk: Walk,
    /// Original → final ids.
    pub collapse: VertexMap,
    pub certificates: Vec<ReductionCertificate>,
}

/// Reduces every multi-vertex intersection, one at a time, always taking the one
/// with the smallest vertex id next.
pub fn reduce_all(walk: &Walk, opts: &ReduceOptions) -> Result<FullReduction> {
    let mut current = walk.clone();
    let mut collapse = VertexMap::identity(walk.n());
    let mut certificates = Vec::new();
    while let Some(next) = polygon_intersections(current.cover())
        .into_iter()
        .find(|i| i.reducible)
    {
        let reduced = reduce_walk(&current, &next.vertices, opts)?;
        collapse = collapse.compose(&reduced.collapse)?;
        certificates.push(reduced.certificate);
        current = reduced.walk;
    }
    Ok(FullReduction {
        walk: current,
        collapse,
        certificates,
    })
}

/// The `k − 1` orthonormal vectors on the clique that are orthogonal to `|ũ⟩`:
///
/// `ν_j = (1/γ_j) [ (conj(u_j)/γ_{j−1}) Σ_{v<j} u_v |v⟩ − γ_{j−1} |j⟩ ]`,
/// `γ_j = (Σ_{v≤j} |u_v|²)^{1/2}`.
///
/// While the leading amplitudes are all zero (`γ_{j−1} = 0`) the formula is undefined;
/// there `ν_j = −|j−1⟩`, which spans the same complement.
pub fn nu_eigenvectors(cs: &CliqueState, n: usize) -> Result<Vec<StateVector>> {
    let u = cs.amplitudes();
    let verts = cs.vertices();
    if let Some(&v) = verts.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    let k = u.len();
    let mut gamma = Vec::with_capacity(k);
    let mut acc = 0.0;
    for a in u {
        acc += a.norm_sqr();
        gamma.push(acc.sqrt());
    }

    let mut out = Vec::with_capacity(k.saturating_sub(1));
    for j in 1..k {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        if gamma[j - 1] <= ZERO_MASS {
            amps[verts[j - 1]] = C64::new(-1.0, 0.0);
        } else {
            let lead = u[j].conj() / gamma[j - 1];
            for v in 0..j {
                amps[verts[v]] = lead * u[v] / gamma[j];
            }
            amps[verts[j]] = C64::new(-gamma[j - 1] / gamma[j], 0.0);
        }
        out.push(StateVector::from_raw(amps));
    }
    Ok(out)
}

/// Lifts an eigenvector of the reduced walk and checks it against the expanded
/// operator: `‖Ũ λ̃ − λ λ̃‖ ≤` [`LIFT_RESIDUAL_TOL`].
pub fn lift_eigenvector(
    expanded: &impl Operator,
    eigenvalue: C64,
    vector: &StateVector,
    link: &IntersectionLink,
) -> Result<StateVector> {
    let lifted = link.lift(vector)?;
    let residual = eigen_residual(expanded, eigenvalue, &lifted)?;
    if residual > LIFT_RESIDUAL_TOL {
        return Err(Error::InternalInconsistency { residual });
    }
    Ok(lifted)
}

/// `‖A v − λ v‖`.
pub fn eigen_residual(op: &impl Operator, eigenvalue: C64, v: &StateVector) -> Result<f64> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: v.len(),
        });
    }
    let mut image = v.amplitudes().to_vec();
    op.apply_in_place(&mut image);
    Ok(image
        .iter()
        .zip(v.amplitudes())
        .map(|(a, b)| (a - eigenvalue * b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
