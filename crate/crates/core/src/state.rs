//! Amplitude vectors: walk states over all vertices, polygon-induced states and the
//! clique state `|ũ⟩` that ties an expanded intersection to its collapsed vertex.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, Polygon, VertexId, VertexMap};

pub type C64 = Complex64;

/// Tolerance on `|‖x‖² − 1|` accepted by the state constructors.
pub const NORM_TOL: f64 = 1e-9;

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_unit(amps: &[C64]) -> Result<()> {
    let ns = norm_sqr(amps);
    if (ns - 1.0).abs() > NORM_TOL || !ns.is_finite() {
        return Err(Error::NotNormalized { norm_sqr: ns });
    }
    Ok(())
}

/// Dense amplitude vector indexed by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    /// A unit state; fails when the squared norm is off by more than [`NORM_TOL`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_unit(&amplitudes)?;
        Ok(StateVector(amplitudes))
    }

    /// Wraps amplitudes without checking the norm.
    pub fn from_raw(amplitudes: Vec<C64>) -> Self {
        StateVector(amplitudes)
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector(amplitudes))
    }

    pub fn basis(n: usize, v: VertexId) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[v] = C64::new(1.0, 0.0);
        StateVector(amps)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        StateVector(self.0.iter().map(|a| a * factor).collect())
    }
}

/// Unit state supported on one polygon; `amplitudes[i]` belongs to `polygon.vertices()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonState {
    polygon: Polygon,
    amplitudes: Vec<C64>,
}

impl PolygonState {
    pub fn uniform(polygon: Polygon) -> Self {
        let a = C64::new(1.0 / (polygon.len() as f64).sqrt(), 0.0);
        let amplitudes = vec![a; polygon.len()];
        PolygonState {
            polygon,
            amplitudes,
        }
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude_of(&self, v: VertexId) -> Option<C64> {
        self.polygon.position(v).map(|i| self.amplitudes[i])
    }

    /// `(vertex, amplitude)` pairs in polygon order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, C64)> + '_ {
        self.polygon
            .vertices()
            .iter()
            .copied()
            .zip(self.amplitudes.iter().copied())
    }
}

/// The state `|P⟩ = Σ c_v |v⟩` induced by `polygon`.
pub fn polygon_state(polygon: Polygon, amplitudes: Vec<C64>) -> Result<PolygonState> {
    if amplitudes.len() != polygon.len() {
        return Err(Error::DimensionMismatch {
            expected: polygon.len(),
            found: amplitudes.len(),
        });
    }
    check_unit(&amplitudes)?;
    Ok(PolygonState {
        polygon,
        amplitudes,
    })
}

/// Unit state `|ũ⟩ = Σ u_j |j⟩` over an ordered list of clique vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueState {
    vertices: Vec<VertexId>,
    amplitudes: Vec<C64>,
}

impl CliqueState {
    pub fn new(vertices: Vec<VertexId>, amplitudes: Vec<C64>) -> Result<Self> {
        if vertices.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                found: amplitudes.len(),
            });
        }
        if vertices.is_empty() {
            return Err(Error::ZeroCliqueSize);
        }
        check_unit(&amplitudes)?;
        Ok(CliqueState {
            vertices,
            amplitudes,
        })
    }

    pub fn uniform(vertices: Vec<VertexId>) -> Result<Self> {
        let a = C64::new(1.0 / (vertices.len() as f64).sqrt(), 0.0);
        let amplitudes = vec![a; vertices.len()];
        CliqueState::new(vertices, amplitudes)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    /// The same state as a vector over `0..n`.
    pub fn to_state(&self, n: usize) -> Result<StateVector> {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for (&v, &a) in self.vertices.iter().zip(&self.amplitudes) {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            amps[v] = a;
        }
        Ok(StateVector(amps))
    }
}

/// `1/√n` on every vertex.
pub fn uniform_state(graph: &Graph) -> StateVector {
    let n = graph.n();
    StateVector(vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n])
}

fn check_link(map: &VertexMap, u: VertexId, cs: &CliqueState) -> Result<()> {
    if u >= map.source_len() {
        return Err(Error::VertexOutOfRange {
            vertex: u,
            n: map.source_len(),
        });
    }
    let mut image = map.image(u).to_vec();
    let mut clique = cs.vertices().to_vec();
    image.sort_unstable();
    clique.sort_unstable();
    if image != clique {
        return Err(Error::Invalid(format!(
            "vertex {u} maps to {:?}, but the clique state lives on {:?}",
            map.image(u),
            cs.vertices()
        )));
    }
    Ok(())
}

fn single_image(map: &VertexMap, v: VertexId) -> Result<VertexId> {
    match map.image(v) {
        [w] => Ok(*w),
        other => Err(Error::Invalid(format!(
            "vertex {v} has {} images; only the expanded vertex may split",
            other.len()
        ))),
    }
}

/// Lifts `psi` from the reduced graph to the expanded one: amplitudes off `u` are
/// copied through `map` and `a_u` is spread as `a_u · u_j` over the clique.
/// `map` goes from reduced to expanded ids.
pub fn lift_state(
    psi: &StateVector,
    u: VertexId,
    cs: &CliqueState,
    map: &VertexMap,
) -> Result<StateVector> {
    if psi.len() != map.source_len() {
        return Err(Error::DimensionMismatch {
            expected: map.source_len(),
            found: psi.len(),
        });
    }
    check_link(map, u, cs)?;
    let mut out = vec![C64::new(0.0, 0.0); map.target_len()];
    for (v, &a) in psi.amplitudes().iter().enumerate() {
        if v == u {
            for (&w, &uj) in cs.vertices().iter().zip(cs.amplitudes()) {
                out[w] = a * uj;
            }
        } else {
            out[single_image(map, v)?] = a;
        }
    }
    Ok(StateVector(out))
}

/// Inverse of [`lift_state`]. Succeeds only when the clique restriction of `psi_t` is
/// `a_u · |ũ⟩` up to `tol`, with `a_u = ⟨ũ|restriction⟩`.
pub fn project_state(
    psi_t: &StateVector,
    cs: &CliqueState,
    map: &VertexMap,
    tol: f64,
) -> Result<StateVector> {
    if psi_t.len() != map.target_len() {
        return Err(Error::DimensionMismatch {
            expected: map.target_len(),
            found: psi_t.len(),
        });
    }
    let u = (0..map.source_len())
        .find(|&v| map.image(v).contains(&cs.vertices()[0]))
        .ok_or_else(|| Error::Invalid("clique state is not the image of any vertex".into()))?;
    check_link(map, u, cs)?;

    let amps = psi_t.amplitudes();
    let a_u: C64 = cs
        .vertices()
        .iter()
        .zip(cs.amplitudes())
        .map(|(&w, uj)| uj.conj() * amps[w])
        .sum();
    let residual = cs
        .vertices()
        .iter()
        .zip(cs.amplitudes())
        .map(|(&w, uj)| (amps[w] - a_u * uj).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > tol {
        return Err(Error::ProportionalityViolation { residual });
    }

    let mut out = vec![C64::new(0.0, 0.0); map.source_len()];
    for (v, slot) in out.iter_mut().enumerate() {
        *slot = if v == u {
            a_u
        } else {
            amps[single_image(map, v)?]
        };
    }
    Ok(StateVector(out))
}

/// `Σ_{v∈S} |a_v|²`.
pub fn subset_probability(psi: &StateVector, set: &[VertexId]) -> f64 {
    set.iter().map(|&v| psi.amplitudes()[v].norm_sqr()).sum()
}
