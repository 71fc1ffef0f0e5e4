//! JSON and CSV formats for walks, states, certificates and reports.
//!
//! Complex numbers are written as `[re, im]`. A walk file looks like
//!
//! ```json
//! {"n": 4, "edges": [[0, 3]], "tessellations": [[[0, 3], [1], [2]]],
//!  "amplitudes": [[[[0.7071, 0], [0, 0.7071]], null, null]]}
//! ```
//!
//! where `amplitudes` and each of its entries may be omitted or `null` for uniform
//! polygon states.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evolution::{AmplitudeTable, Walk};
use crate::graph::{Graph, Tessellation, TessellationCover, VertexId};
use crate::state::{polygon_state, StateVector, C64};
use crate::transform::ReductionCertificate;

pub fn ser_c64<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn ser_c64_vec<S: Serializer>(zs: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    zs.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// `[tessellation][polygon]` amplitude lists as `[re, im]` pairs; `None` is uniform.
pub type AmplitudeRows = Vec<Vec<Option<Vec<[f64; 2]>>>>;

/// On-disk walk description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkFile {
    pub n: usize,
    pub edges: Vec<[VertexId; 2]>,
    pub tessellations: Vec<Vec<Vec<VertexId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudeRows>,
}

impl WalkFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Graph and cover, without checking that the cover is valid.
    pub fn graph_and_cover(&self) -> Result<(Graph, TessellationCover)> {
        let graph = Graph::new(self.n, self.edges.iter().map(|e| (e[0], e[1])))?;
        let cover = TessellationCover::new(
            self.tessellations
                .iter()
                .map(|t| Tessellation::from_lists(t.clone()))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok((graph, cover))
    }

    pub fn amplitude_table(&self) -> Option<AmplitudeTable> {
        self.amplitudes.as_ref().map(|table| {
            table
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|amps| {
                            amps.as_ref()
                                .map(|a| a.iter().copied().map(unpair).collect())
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Checks each explicit polygon amplitude list for length and unit norm.
    pub fn check_amplitudes(&self) -> Result<()> {
        let (_, cover) = self.graph_and_cover()?;
        let Some(table) = self.amplitude_table() else {
            return Ok(());
        };
        if table.len() != cover.len() {
            return Err(Error::DimensionMismatch {
                expected: cover.len(),
                found: table.len(),
            });
        }
        for (row, tess) in table.into_iter().zip(cover.tessellations()) {
            if row.len() != tess.polygons().len() {
                return Err(Error::DimensionMismatch {
                    expected: tess.polygons().len(),
                    found: row.len(),
                });
            }
            for (amps, poly) in row.into_iter().zip(tess.polygons()) {
                if let Some(amps) = amps {
                    polygon_state(poly.clone(), amps)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_walk(&self) -> Result<Walk> {
        let (graph, cover) = self.graph_and_cover()?;
        Walk::new(graph, cover, self.amplitude_table())
    }

    /// Every polygon amplitude written out explicitly.
    pub fn from_walk(walk: &Walk) -> Self {
        let states = walk.states();
        WalkFile {
            n: walk.n(),
            edges: walk.graph().edges().map(|(a, b)| [a, b]).collect(),
            tessellations: walk
                .cover()
                .tessellations()
                .iter()
                .map(|t| t.polygons().iter().map(|p| p.vertices().to_vec()).collect())
                .collect(),
            amplitudes: Some(
                states
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|s| Some(s.amplitudes().iter().copied().map(pair).collect()))
                            .collect()
                    })
                    .collect(),
            ),
        }
    }
}

pub fn walk_from_json(text: &str) -> Result<Walk> {
    WalkFile::parse(text)?.to_walk()
}

pub fn walk_to_json(walk: &Walk) -> String {
    serde_json::to_string_pretty(&WalkFile::from_walk(walk)).expect("walk serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

pub fn state_to_json(psi: &StateVector) -> String {
    let file = StateFile {
        n: psi.len(),
        amplitudes: psi.amplitudes().iter().copied().map(pair).collect(),
    };
    serde_json::to_string_pretty(&file).expect("state serializes")
}

/// Reads a state file; the vector must have unit norm.
pub fn state_from_json(text: &str) -> Result<StateVector> {
    let file: StateFile = serde_json::from_str(text)?;
    if file.amplitudes.len() != file.n {
        return Err(Error::DimensionMismatch {
            expected: file.n,
            found: file.amplitudes.len(),
        });
    }
    StateVector::new(file.amplitudes.into_iter().map(unpair).collect())
}

/// `vertex,re,im,prob` rows with a header.
pub fn state_to_csv(psi: &StateVector) -> String {
    let mut out = String::from("vertex,re,im,prob\n");
    for (v, a) in psi.amplitudes().iter().enumerate() {
        out.push_str(&format!("{v},{:e},{:e},{:e}\n", a.re, a.im, a.norm_sqr()));
    }
    out
}

pub fn certificate_to_json(cert: &ReductionCertificate) -> Value {
    json!({
        "intersection": cert.intersection,
        "canonical_j": cert.canonical_j,
        "clique_state": cert.clique.amplitudes().iter().copied().map(pair).collect::<Vec<_>>(),
        "coefficients": cert.coefficients.iter().copied().map(pair).collect::<Vec<_>>(),
        "beta": cert.beta.iter().map(|row| {
            row.iter().map(|b| b.map(pair)).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "residuals": cert.residuals,
        "tol": cert.tol,
    })
}

const GAUGE_FLOOR: f64 = 1e-12;

/// Removes the freedom of per-vertex and per-polygon phases: each vertex is
/// rephased so its first non-negligible amplitude (tessellations in order) is real
/// and positive, then each polygon state so its first non-negligible amplitude is.
/// Walks related by such phases have unitarily equivalent operators via a
/// diagonal matrix, and map to the same canonical form.
pub fn canonical_walk(walk: &Walk) -> Result<Walk> {
    let n = walk.n();
    let mut gauge = vec![C64::new(1.0, 0.0); n];
    let mut fixed = vec![false; n];
    for t in 0..walk.cover().len() {
        for st in walk.polygon_states(t) {
            for (v, a) in st.iter() {
                if !fixed[v] && a.norm() > GAUGE_FLOOR {
                    gauge[v] = a.conj() / a.norm();
                    fixed[v] = true;
                }
            }
        }
    }
    let mut states = walk.states();
    for row in states.iter_mut() {
        for st in row.iter_mut() {
            let mut amps: Vec<C64> = st.iter().map(|(v, a)| a * gauge[v]).collect();
            if let Some(lead) = amps.iter().find(|a| a.norm() > GAUGE_FLOOR).copied() {
                let rot = lead.conj() / lead.norm();
                amps.iter_mut().for_each(|a| *a *= rot);
            }
            *st = polygon_state(st.polygon().clone(), amps)?;
        }
    }
    Walk::from_states(walk.graph().clone(), states)
}

fn round10(x: f64) -> f64 {
    let r = (x * 1e10).round() / 1e10;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// JSON of [`canonical_walk`] with amplitudes rounded to 1e-10.
pub fn canonical_walk_json(walk: &Walk) -> Result<String> {
    let mut file = WalkFile::from_walk(&canonical_walk(walk)?);
    if let Some(table) = file.amplitudes.as_mut() {
        for amps in table.iter_mut().flatten().flatten() {
            for p in amps.iter_mut() {
                *p = [round10(p[0]), round10(p[1])];
            }
        }
    }
    Ok(serde_json::to_string_pretty(&file)?)
}
