//! Graphs, polygons, tessellations and tessellation covers.
//!
//! A tessellation partitions the vertex set into cliques (polygons); a cover is an
//! ordered list of tessellations whose polygons jointly contain every edge. The
//! order of the list is the application order of the walk's reflections: index 0
//! is applied first.
//!
//! This module also holds the graph-level halves of the two intersection rewrites
//! ([`expand_vertex_graph`], [`reduce_intersection_graph`]) and the constructors
//! for the star graph S₃ and the clique-grid torus.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl Graph {
    /// Builds a graph, storing each edge once as `(min, max)`. Duplicate edges are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { n, edges: set })
    }

    /// The graph whose edges are exactly the pairs sharing a polygon of `cover`.
    pub fn induced_by(n: usize, cover: &TessellationCover) -> Result<Self> {
        let mut edges = Vec::new();
        for tess in cover.tessellations() {
            for poly in tess.polygons() {
                let vs = poly.vertices();
                for (i, &a) in vs.iter().enumerate() {
                    for &b in &vs[i + 1..] {
                        edges.push((a, b));
                    }
                }
            }
        }
        Graph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Ordered, duplicate-free vertex list. Whether it is a clique depends on the host
/// graph and is checked by [`validate_cover`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polygon(Vec<VertexId>);

impl Polygon {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPolygon);
        }
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            if !seen.insert(v) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        Ok(Polygon(vertices))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.0.iter().position(|&w| w == v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tessellation {
    polygons: Vec<Polygon>,
}

impl Tessellation {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Tessellation { polygons }
    }

    /// Convenience constructor from raw vertex lists.
    pub fn from_lists(lists: Vec<Vec<VertexId>>) -> Result<Self> {
        Ok(Tessellation::new(
            lists.into_iter().map(Polygon::new).collect::<Result<_>>()?,
        ))
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    /// Index of the (first) polygon containing `v`.
    pub fn polygon_of(&self, v: VertexId) -> Option<usize> {
        self.polygons.iter().position(|p| p.contains(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TessellationCover {
    tessellations: Vec<Tessellation>,
}

impl TessellationCover {
    pub fn new(tessellations: Vec<Tessellation>) -> Self {
        TessellationCover { tessellations }
    }

    pub fn tessellations(&self) -> &[Tessellation] {
        &self.tessellations
    }

    /// Number of tessellations, `l`.
    pub fn len(&self) -> usize {
        self.tessellations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tessellations.is_empty()
    }

    /// For every vertex of `0..n`, the polygon index in each tessellation.
    /// `None` where a vertex is missing from a tessellation.
    fn membership(&self, n: usize) -> Vec<Vec<Option<usize>>> {
        let mut table = vec![vec![None; self.len()]; n];
        for (t, tess) in self.tessellations.iter().enumerate() {
            for (p, poly) in tess.polygons().iter().enumerate() {
                for &v in poly.vertices() {
                    if v < n && table[v][t].is_none() {
                        table[v][t] = Some(p);
                    }
                }
            }
        }
        table
    }

    fn vertex_bound(&self) -> usize {
        self.tessellations
            .iter()
            .flat_map(|t| t.polygons())
            .flat_map(|p| p.vertices())
            .map(|&v| v + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionDefect {
    /// The vertex is in no polygon of the tessellation.
    Missing,
    /// The vertex is in more than one polygon of the tessellation.
    Repeated,
    /// The polygon names a vertex id `>= n`.
    OutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NotAClique {
        tessellation: usize,
        polygon: usize,
        missing_edge: (VertexId, VertexId),
    },
    NotAPartition {
        tessellation: usize,
        vertex: VertexId,
        defect: PartitionDefect,
    },
    UncoveredEdge {
        edge: (VertexId, VertexId),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks that every polygon is a clique, every tessellation partitions the vertex
/// set and every edge lies inside some polygon. Reports every failure found.
pub fn validate_cover(graph: &Graph, cover: &TessellationCover) -> ValidationReport {
    let n = graph.n();
    let mut violations = Vec::new();

    for (t, tess) in cover.tessellations().iter().enumerate() {
        let mut count = vec![0usize; n];
        for (p, poly) in tess.polygons().iter().enumerate() {
            let vs = poly.vertices();
            for &v in vs {
                if v >= n {
                    violations.push(Violation::NotAPartition {
                        tessellation: t,
                        vertex: v,
                        defect: PartitionDefect::OutOfRange,
                    });
                } else {
                    count[v] += 1;
                }
            }
            for (i, &a) in vs.iter().enumerate() {
                for &b in &vs[i + 1..] {
                    if a < n && b < n && !graph.has_edge(a, b) {
                        violations.push(Violation::NotAClique {
                            tessellation: t,
                            polygon: p,
                            missing_edge: (a.min(b), a.max(b)),
                        });
                    }
                }
            }
        }
        for (v, &c) in count.iter().enumerate() {
            let defect = match c {
                0 => PartitionDefect::Missing,
                1 => continue,
                _ => PartitionDefect::Repeated,
            };
            violations.push(Violation::NotAPartition {
                tessellation: t,
                vertex: v,
                defect,
            });
        }
    }

    let membership = cover.membership(n);
    for (a, b) in graph.edges() {
        let covered = (0..cover.len())
            .any(|t| membership[a][t].is_some() && membership[a][t] == membership[b][t])
            || covered_by_repeats(cover, a, b);
        if !covered {
            violations.push(Violation::UncoveredEdge { edge: (a, b) });
        }
    }

    ValidationReport {
        valid: violations.is_empty(),
        violations,
    }
}

// Membership only records the first polygon per tessellation; a vertex listed twice
// is already a violation, but the edge may still be covered by the second listing.
fn covered_by_repeats(cover: &TessellationCover, a: VertexId, b: VertexId) -> bool {
    cover
        .tessellations()
        .iter()
        .flat_map(|t| t.polygons())
        .any(|p| p.contains(a) && p.contains(b))
}

/// Star graph S₃ (leaves 0, 1, 2, center 3) with its 3-tessellation cover, listed in
/// application order: blue, red, green.
pub fn build_star_s3() -> (Graph, TessellationCover) {
    let graph = Graph::new(4, [(0, 3), (1, 3), (2, 3)]).expect("static graph");
    let tess =
        |lists: Vec<Vec<VertexId>>| Tessellation::from_lists(lists).expect("static polygons");
    let cover = TessellationCover::new(vec![
        tess(vec![vec![0, 3], vec![1], vec![2]]),
        tess(vec![vec![0], vec![1, 3], vec![2]]),
        tess(vec![vec![0], vec![1], vec![2, 3]]),
    ]);
    (graph, cover)
}

/// Row-major id of clique-grid vertex `(x, y, k)`; `x` and `y` are taken mod `n`.
pub fn grid_index(n: usize, q: usize, x: usize, y: usize, k: usize) -> VertexId {
    (x % n) * 4 * q * n + (y % n) * 4 * q + k
}

/// Blue polygon index of the `4q`-clique at `(x, y)`.
pub fn grid_blue_polygon(n: usize, x: usize, y: usize) -> usize {
    (x % n) * n + (y % n)
}

/// Clique grid on the `n × n` torus: `n²` blue `4q`-cliques linked by `2n²` red
/// `2q`-cliques. Tessellations are `[blue, red]`. Red polygons are listed per
/// `(x, y)` in row-major order, the `x`-link before the `y`-link.
pub fn build_clique_grid(n: usize, q: usize) -> Result<(Graph, TessellationCover)> {
    if n < 2 || q < 1 {
        return Err(Error::InvalidGridSize { n, q });
    }
    let idx = |x, y, k| grid_index(n, q, x, y, k);
    let mut blue = Vec::with_capacity(n * n);
    let mut red = Vec::with_capacity(2 * n * n);
    for x in 0..n {
        for y in 0..n {
            blue.push((0..4 * q).map(|k| idx(x, y, k)).collect::<Vec<_>>());
            red.push(
                (0..q)
                    .map(|k| idx(x, y, k))
                    .chain((0..q).map(|k| idx(x + 1, y, 2 * q + k)))
                    .collect::<Vec<_>>(),
            );
            red.push(
                (0..q)
                    .map(|k| idx(x, y, q + k))
                    .chain((0..q).map(|k| idx(x, y + 1, 3 * q + k)))
                    .collect::<Vec<_>>(),
            );
        }
    }
    let cover = TessellationCover::new(vec![
        Tessellation::from_lists(blue)?,
        Tessellation::from_lists(red)?,
    ]);
    let graph = Graph::induced_by(4 * q * n * n, &cover)?;
    Ok((graph, cover))
}

/// Where each source vertex went: `images[v]` lists its target ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexMap {
    target_len: usize,
    images: Vec<Vec<VertexId>>,
}

impl VertexMap {
    pub fn new(target_len: usize, images: Vec<Vec<VertexId>>) -> Result<Self> {
        for &w in images.iter().flatten() {
            if w >= target_len {
                return Err(Error::VertexOutOfRange {
                    vertex: w,
                    n: target_len,
                });
            }
        }
        Ok(VertexMap { target_len, images })
    }

    pub fn identity(n: usize) -> Self {
        VertexMap {
            target_len: n,
            images: (0..n).map(|v| vec![v]).collect(),
        }
    }

    pub fn source_len(&self) -> usize {
        self.images.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn image(&self, v: VertexId) -> &[VertexId] {
        &self.images[v]
    }

    /// Apply `self`, then `next`.
    pub fn compose(&self, next: &VertexMap) -> Result<VertexMap> {
        if next.source_len() != self.target_len {
            return Err(Error::DimensionMismatch {
                expected: self.target_len,
                found: next.source_len(),
            });
        }
        let images = self
            .images
            .iter()
            .map(|img| {
                let mut out: Vec<VertexId> = Vec::new();
                for &w in img {
                    for &z in next.image(w) {
                        if !out.contains(&z) {
                            out.push(z);
                        }
                    }
                }
                out
            })
            .collect();
        Ok(VertexMap {
            target_len: next.target_len,
            images,
        })
    }

    /// Target → source preimages, in ascending source order.
    pub fn invert(&self) -> VertexMap {
        let mut images = vec![Vec::new(); self.target_len];
        for (v, img) in self.images.iter().enumerate() {
            for &w in img {
                images[w].push(v);
            }
        }
        VertexMap {
            target_len: self.source_len(),
            images,
        }
    }
}

/// Result of a graph-level rewrite.
#[derive(Debug, Clone)]
pub struct Rewrite {
    pub graph: Graph,
    pub cover: TessellationCover,
    pub map: VertexMap,
    /// Informational remarks, e.g. expansion of a vertex sitting in a singleton polygon.
    pub notes: Vec<String>,
}

/// Replaces `u` by a `k`-clique. `u` keeps its id as the first clique vertex and the
/// other `k − 1` vertices are appended at the end of the id space. Every neighbour
/// of `u` becomes adjacent to the whole clique and every polygon containing `u`
/// gets the clique spliced in at `u`'s position.
pub fn expand_vertex_graph(
    graph: &Graph,
    cover: &TessellationCover,
    u: VertexId,
    k: usize,
) -> Result<Rewrite> {
    let n = graph.n();
    if u >= n {
        return Err(Error::VertexOutOfRange { vertex: u, n });
    }
    if k == 0 {
        return Err(Error::ZeroCliqueSize);
    }
    let clique: Vec<VertexId> = std::iter::once(u).chain(n..n + k - 1).collect();
    let new_n = n + k - 1;

    let mut edges: Vec<(VertexId, VertexId)> = graph.edges().collect();
    for v in graph.neighbors(u) {
        edges.extend(clique[1..].iter().map(|&c| (v, c)));
    }
    for (i, &a) in clique.iter().enumerate() {
        edges.extend(clique[i + 1..].iter().map(|&b| (a, b)));
    }

    let mut notes = Vec::new();
    let mut tessellations = Vec::with_capacity(cover.len());
    for (t, tess) in cover.tessellations().iter().enumerate() {
        let mut polygons = Vec::with_capacity(tess.polygons().len());
        for poly in tess.polygons() {
            if poly.contains(u) {
                if poly.len() == 1 && k > 1 {
                    notes.push(format!(
                        "vertex {u} is a singleton polygon in tessellation {t}; \
                         the {k}-clique becomes that polygon"
                    ));
                }
                let vs = poly
                    .vertices()
                    .iter()
                    .flat_map(|&v| if v == u { clique.clone() } else { vec![v] })
                    .collect();
                polygons.push(Polygon::new(vs)?);
            } else {
                polygons.push(poly.clone());
            }
        }
        tessellations.push(Tessellation::new(polygons));
    }

    let mut images: Vec<Vec<VertexId>> = (0..n).map(|v| vec![v]).collect();
    images[u] = clique;
    Ok(Rewrite {
        graph: Graph::new(new_n, edges)?,
        cover: TessellationCover::new(tessellations),
        map: VertexMap::new(new_n, images)?,
        notes,
    })
}

/// Checks that `set` is exactly the common vertex set of one polygon per
/// tessellation and that its members are interchangeable (same neighbours outside
/// the set, same polygons). Returns the sorted set and the per-tessellation polygon
/// indices.
pub(crate) fn check_shared_intersection(
    graph: &Graph,
    cover: &TessellationCover,
    set: &[VertexId],
) -> Result<(Vec<VertexId>, Vec<usize>)> {
    let n = graph.n();
    if set.is_empty() {
        return Err(Error::NotAnIntersection("empty vertex set".into()));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateVertex(w[0]));
    }
    if let Some(&v) = sorted.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }

    let members: BTreeSet<VertexId> = sorted.iter().copied().collect();
    let mut polygon_ids = Vec::with_capacity(cover.len());
    let mut common: Option<BTreeSet<VertexId>> = None;
    for (t, tess) in cover.tessellations().iter().enumerate() {
        let p = tess.polygon_of(sorted[0]).ok_or_else(|| {
            Error::NotAnIntersection(format!(
                "vertex {} is in no polygon of tessellation {t}",
                sorted[0]
            ))
        })?;
        let poly = &tess.polygons()[p];
        if let Some(&v) = sorted.iter().find(|&&v| !poly.contains(v)) {
            return Err(Error::NotAnIntersection(format!(
                "vertices {} and {v} lie in different polygons of tessellation {t}",
                sorted[0]
            )));
        }
        let vs: BTreeSet<VertexId> = poly.vertices().iter().copied().collect();
        common = Some(match common {
            None => vs,
            Some(c) => c.intersection(&vs).copied().collect(),
        });
        polygon_ids.push(p);
    }
    if let Some(c) = &common {
        if *c != members {
            return Err(Error::NotAnIntersection(format!(
                "{sorted:?} is not a full polygon intersection (the intersection is {:?})",
                c.iter().collect::<Vec<_>>()
            )));
        }
    }

    let adj = graph.adjacency();
    let outside = |v: VertexId| -> Vec<VertexId> {
        adj[v]
            .iter()
            .copied()
            .filter(|w| !members.contains(w))
            .collect()
    };
    let reference = outside(sorted[0]);
    for &v in &sorted[1..] {
        if outside(v) != reference {
            return Err(Error::NotAnIntersection(format!(
                "vertices {} and {v} have different neighbourhoods outside the set",
                sorted[0]
            )));
        }
    }
    Ok((sorted, polygon_ids))
}

/// Collapses the shared intersection `set` to its smallest vertex id. Remaining ids
/// are compacted (shifted down) so the result is again `0..n'`.
pub fn reduce_intersection_graph(
    graph: &Graph,
    cover: &TessellationCover,
    set: &[VertexId],
) -> Result<Rewrite> {
    let (sorted, _) = check_shared_intersection(graph, cover, set)?;
    let rep = sorted[0];
    let removed: BTreeSet<VertexId> = sorted[1..].iter().copied().collect();
    let n = graph.n();
    let new_n = n - removed.len();

    let mut target = vec![0; n];
    let mut shift = 0;
    for (v, slot) in target.iter_mut().enumerate() {
        if removed.contains(&v) {
            shift += 1;
        } else {
            *slot = v - shift;
        }
    }
    for &v in &removed {
        target[v] = target[rep];
    }

    let edges: Vec<_> = graph
        .edges()
        .map(|(a, b)| (target[a], target[b]))
        .filter(|(a, b)| a != b)
        .collect();

    let tessellations = cover
        .tessellations()
        .iter()
        .map(|tess| {
            let polygons = tess
                .polygons()
                .iter()
                .map(|poly| {
                    let mut vs: Vec<VertexId> = Vec::with_capacity(poly.len());
                    for &v in poly.vertices() {
                        let w = target[v];
                        if !vs.contains(&w) {
                            vs.push(w);
                        }
                    }
                    Polygon::new(vs)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Tessellation::new(polygons))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Rewrite {
        graph: Graph::new(new_n, edges)?,
        cover: TessellationCover::new(tessellations),
        map: VertexMap::new(new_n, target.into_iter().map(|w| vec![w]).collect())?,
        notes: Vec::new(),
    })
}

/// A maximal set of vertices sharing the same polygon in every tessellation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Intersection {
    pub vertices: Vec<VertexId>,
    /// `(tessellation, polygon)` pairs whose intersection is `vertices`.
    pub polygons: Vec<(usize, usize)>,
    /// At least two vertices: a candidate for reduction.
    pub reducible: bool,
}

/// All polygon intersections of a cover, ordered by smallest vertex id.
pub fn polygon_intersections(cover: &TessellationCover) -> Vec<Intersection> {
    let n = cover.vertex_bound();
    let membership = cover.membership(n);
    let mut groups: BTreeMap<Vec<Option<usize>>, Vec<VertexId>> = BTreeMap::new();
    for (v, sig) in membership.into_iter().enumerate() {
        if sig.iter().any(Option::is_some) {
            groups.entry(sig).or_default().push(v);
        }
    }
    let mut out: Vec<Intersection> = groups
        .into_iter()
        .map(|(sig, vertices)| Intersection {
            reducible: vertices.len() >= 2,
            polygons: sig
                .iter()
                .enumerate()
                .filter_map(|(t, p)| p.map(|p| (t, p)))
                .collect(),
            vertices,
        })
        .collect();
    out.sort_by_key(|i| i.vertices[0]);
    out
}
