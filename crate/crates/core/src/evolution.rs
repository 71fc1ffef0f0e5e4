//! Reflection operators and their products.
//!
//! A [`LocalOperator`] is `2 Σ_P |P⟩⟨P| − I` over the polygon states of one
//! tessellation. It is applied polygon by polygon in `O(Σ |P|)` and never stored as
//! a matrix; [`to_dense`] exists for oracle checks on small walks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{validate_cover, Graph, Polygon, Tessellation, TessellationCover, VertexId};
use crate::state::{norm_sqr, polygon_state, PolygonState, StateVector, C64};

pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Allowed change of the squared norm over a run before it is aborted.
pub const DRIFT_TOL: f64 = 1e-9;

/// A linear operator on `C^dim` that can act on an amplitude buffer in place.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply_in_place(&self, amps: &mut [C64]);
}

#[derive(Debug, Clone)]
pub struct LocalOperator {
    n: usize,
    tessellation: usize,
    states: Vec<PolygonState>,
    // vertices in no polygon; the reflection negates them
    uncovered: Vec<VertexId>,
}

impl LocalOperator {
    /// Polygon supports must be disjoint and inside `0..n`. Vertices left out of every
    /// polygon are allowed (partial tessellations) and are negated by the reflection.
    pub fn new(n: usize, tessellation: usize, states: Vec<PolygonState>) -> Result<Self> {
        let mut covered = vec![false; n];
        for st in &states {
            for &v in st.polygon().vertices() {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if covered[v] {
                    return Err(Error::InvalidCover(format!(
                        "vertex {v} appears in two polygons of tessellation {tessellation}"
                    )));
                }
                covered[v] = true;
            }
        }
        let uncovered = (0..n).filter(|&v| !covered[v]).collect();
        Ok(LocalOperator {
            n,
            tessellation,
            states,
            uncovered,
        })
    }

    pub fn tessellation(&self) -> usize {
        self.tessellation
    }

    pub fn states(&self) -> &[PolygonState] {
        &self.states
    }

    /// Vertices not covered by any polygon state.
    pub fn uncovered(&self) -> &[VertexId] {
        &self.uncovered
    }

    /// The same reflection with polygon `polygon`'s projector dropped.
    pub fn without_polygon(&self, polygon: usize) -> Result<LocalOperator> {
        if polygon >= self.states.len() {
            return Err(Error::NoSuchPolygon {
                tessellation: self.tessellation,
                polygon,
            });
        }
        let mut states = self.states.clone();
        states.remove(polygon);
        LocalOperator::new(self.n, self.tessellation, states)
    }
}

impl Operator for LocalOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_in_place(&self, amps: &mut [C64]) {
        for st in &self.states {
            let m: C64 = st.iter().map(|(v, c)| c.conj() * amps[v]).sum();
            let two_m = m * 2.0;
            for (v, c) in st.iter() {
                amps[v] = two_m * c - amps[v];
            }
        }
        for &v in &self.uncovered {
            amps[v] = -amps[v];
        }
    }
}

/// Local operators in application order: index 0 acts first.
#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    n: usize,
    locals: Vec<LocalOperator>,
}

impl EvolutionOperator {
    pub fn new(n: usize, locals: Vec<LocalOperator>) -> Result<Self> {
        if let Some(l) = locals.iter().find(|l| l.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.dim(),
            });
        }
        Ok(EvolutionOperator { n, locals })
    }

    pub fn locals(&self) -> &[LocalOperator] {
        &self.locals
    }

    /// Number of tessellations, `l`.
    pub fn len(&self) -> usize {
        self.locals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locals.is_empty()
    }

    pub(crate) fn replace_local(&self, index: usize, local: LocalOperator) -> Result<Self> {
        let mut locals = self.locals.clone();
        *locals
            .get_mut(index)
            .ok_or(Error::NoSuchTessellation(index))? = local;
        EvolutionOperator::new(self.n, locals)
    }
}

impl Operator for EvolutionOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_in_place(&self, amps: &mut [C64]) {
        for l in &self.locals {
            l.apply_in_place(amps);
        }
    }
}

fn check_dim(expected: usize, psi: &StateVector) -> Result<()> {
    if psi.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: psi.len(),
        });
    }
    Ok(())
}

/// Per polygon, `a_v ← 2·m·c_v − a_v` with `m = Σ conj(c_v)·a_v`.
pub fn apply_local(op: &LocalOperator, psi: &StateVector) -> Result<StateVector> {
    check_dim(op.dim(), psi)?;
    let mut amps = psi.amplitudes().to_vec();
    op.apply_in_place(&mut amps);
    Ok(StateVector::from_raw(amps))
}

/// `U^t ψ`. Aborts with [`Error::NumericalDrift`] if the squared norm moves by more
/// than [`DRIFT_TOL`]; states are never renormalized.
pub fn apply_evolution(op: &EvolutionOperator, psi: &StateVector, t: usize) -> Result<StateVector> {
    check_dim(op.dim(), psi)?;
    let mut amps = psi.amplitudes().to_vec();
    let reference = norm_sqr(&amps);
    for step in 1..=t {
        op.apply_in_place(&mut amps);
        let ns = norm_sqr(&amps);
        if (ns - reference).abs() > DRIFT_TOL || !ns.is_finite() {
            return Err(Error::NumericalDrift { norm_sqr: ns, step });
        }
    }
    Ok(StateVector::from_raw(amps))
}

/// Materializes `op` column by column from its action on basis vectors.
pub fn to_dense(op: &impl Operator, cap: usize) -> Result<DMatrix<C64>> {
    let n = op.dim();
    if n > cap {
        return Err(Error::DenseCapExceeded { dim: n, cap });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        col[j] = C64::new(1.0, 0.0);
        op.apply_in_place(&mut col);
        for (i, a) in col.iter().enumerate() {
            m[(i, j)] = *a;
        }
    }
    Ok(m)
}

/// Per-polygon amplitude lists as read from a walk file: `[tessellation][polygon]`,
/// `None` meaning the uniform polygon state.
pub type AmplitudeTable = Vec<Vec<Option<Vec<C64>>>>;

/// A staggered walk: graph, validated cover, and one polygon state per polygon.
#[derive(Debug, Clone)]
pub struct Walk {
    graph: Graph,
    cover: TessellationCover,
    operator: EvolutionOperator,
}

impl Walk {
    /// Validates the cover and builds the evolution operator. Missing amplitudes
    /// default to the uniform polygon state.
    pub fn new(
        graph: Graph,
        cover: TessellationCover,
        amplitudes: Option<AmplitudeTable>,
    ) -> Result<Self> {
        let report = validate_cover(&graph, &cover);
        if !report.valid {
            return Err(Error::InvalidCover(format!("{:?}", report.violations)));
        }
        if let Some(table) = &amplitudes {
            if table.len() != cover.len() {
                return Err(Error::DimensionMismatch {
                    expected: cover.len(),
                    found: table.len(),
                });
            }
        }
        let mut states = Vec::with_capacity(cover.len());
        for (t, tess) in cover.tessellations().iter().enumerate() {
            let row = amplitudes.as_ref().map(|table| &table[t]);
            if let Some(row) = row {
                if row.len() != tess.polygons().len() {
                    return Err(Error::DimensionMismatch {
                        expected: tess.polygons().len(),
                        found: row.len(),
                    });
                }
            }
            let mut tess_states = Vec::with_capacity(tess.polygons().len());
            for (p, poly) in tess.polygons().iter().enumerate() {
                let st = match row.and_then(|r| r[p].clone()) {
                    Some(amps) => polygon_state(poly.clone(), amps)?,
                    None => PolygonState::uniform(poly.clone()),
                };
                tess_states.push(st);
            }
            states.push(tess_states);
        }
        Walk::from_parts(graph, cover, states)
    }

    /// Builds a walk from explicit polygon states; the cover is read off the states.
    pub fn from_states(graph: Graph, states: Vec<Vec<PolygonState>>) -> Result<Self> {
        let cover = TessellationCover::new(
            states
                .iter()
                .map(|row| Tessellation::new(row.iter().map(|s| s.polygon().clone()).collect()))
                .collect(),
        );
        let report = validate_cover(&graph, &cover);
        if !report.valid {
            return Err(Error::InvalidCover(format!("{:?}", report.violations)));
        }
        Walk::from_parts(graph, cover, states)
    }

    fn from_parts(
        graph: Graph,
        cover: TessellationCover,
        states: Vec<Vec<PolygonState>>,
    ) -> Result<Self> {
        let n = graph.n();
        let locals = states
            .into_iter()
            .enumerate()
            .map(|(t, row)| LocalOperator::new(n, t, row))
            .collect::<Result<Vec<_>>>()?;
        Ok(Walk {
            operator: EvolutionOperator::new(n, locals)?,
            graph,
            cover,
        })
    }

    /// Uniform polygon states on every polygon.
    pub fn uniform(graph: Graph, cover: TessellationCover) -> Result<Self> {
        Walk::new(graph, cover, None)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cover(&self) -> &TessellationCover {
        &self.cover
    }

    pub fn operator(&self) -> &EvolutionOperator {
        &self.operator
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn polygon_states(&self, tessellation: usize) -> &[PolygonState] {
        self.operator.locals()[tessellation].states()
    }

    /// All polygon states, `[tessellation][polygon]`.
    pub fn states(&self) -> Vec<Vec<PolygonState>> {
        self.operator
            .locals()
            .iter()
            .map(|l| l.states().to_vec())
            .collect()
    }

    /// The polygon state of tessellation `t` containing `v`, with its index.
    pub fn state_containing(&self, t: usize, v: VertexId) -> Option<(usize, &PolygonState)> {
        self.polygon_states(t)
            .iter()
            .enumerate()
            .find(|(_, s)| s.polygon().contains(v))
    }
}

/// The S₃ walk: `|α₀⟩ = (|0⟩ + i|3⟩)/√2`, `|β₁⟩ = (|1⟩ + |3⟩)/√2`,
/// `|γ₂⟩ = (|2⟩ + |3⟩)/√2`, all other polygons singletons. Applied blue, red, green.
pub fn star_s3_walk() -> Walk {
    let (graph, cover) = crate::graph::build_star_s3();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = Some(vec![C64::new(1.0, 0.0)]);
    let table = vec![
        vec![
            Some(vec![C64::new(h, 0.0), C64::new(0.0, h)]),
            one.clone(),
            one.clone(),
        ],
        vec![
            one.clone(),
            Some(vec![C64::new(h, 0.0), C64::new(h, 0.0)]),
            one.clone(),
        ],
        vec![
            one.clone(),
            one,
            Some(vec![C64::new(h, 0.0), C64::new(h, 0.0)]),
        ],
    ];
    Walk::new(graph, cover, Some(table)).expect("static walk")
}

/// A tessellation's reflection as a local operator with uniform polygon states.
pub fn uniform_local(n: usize, index: usize, tess: &Tessellation) -> Result<LocalOperator> {
    LocalOperator::new(
        n,
        index,
        tess.polygons()
            .iter()
            .cloned()
            .map(PolygonState::uniform)
            .collect(),
    )
}

/// Convenience for tests and fixtures: a polygon state from a vertex list.
pub fn polygon_with(vertices: Vec<VertexId>, amplitudes: Vec<C64>) -> Result<PolygonState> {
    polygon_state(Polygon::new(vertices)?, amplitudes)
}
