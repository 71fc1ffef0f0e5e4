//! Seeded generators of random walks and expansions for property checks.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evolution::{AmplitudeTable, Walk};
use crate::graph::{Graph, Tessellation, TessellationCover};
use crate::state::C64;
use crate::transform::ExpansionSpec;

pub const DEFAULT_SEED: u64 = 0x5157_2024;

/// Seed from `SQW_SEED` when set, otherwise [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("SQW_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct WalkParams {
    pub min_n: usize,
    pub max_n: usize,
    pub tessellations: &'static [usize],
    pub max_polygon: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            min_n: 3,
            max_n: 10,
            tessellations: &[2, 3, 4],
            max_polygon: 4,
        }
    }
}

/// A unit vector with independent components uniform in the unit square.
pub fn random_unit<R: Rng>(rng: &mut R, k: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..k)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

fn random_partition<R: Rng>(rng: &mut R, n: usize, max_polygon: usize) -> Vec<Vec<usize>> {
    let mut verts: Vec<usize> = (0..n).collect();
    verts.shuffle(rng);
    let mut out = Vec::new();
    let mut rest = &verts[..];
    while !rest.is_empty() {
        let size = rng.random_range(1..=max_polygon.min(rest.len()));
        let (head, tail) = rest.split_at(size);
        out.push(head.to_vec());
        rest = tail;
    }
    out
}

/// Random partitions for each tessellation, the graph they induce, and random
/// polygon states.
pub fn random_walk<R: Rng>(rng: &mut R, params: &WalkParams) -> Result<Walk> {
    let n = rng.random_range(params.min_n..=params.max_n);
    let l = *params
        .tessellations
        .choose(rng)
        .expect("at least one tessellation count");
    let tessellations = (0..l)
        .map(|_| Tessellation::from_lists(random_partition(rng, n, params.max_polygon)))
        .collect::<Result<Vec<_>>>()?;
    let cover = TessellationCover::new(tessellations);
    let graph = Graph::induced_by(n, &cover)?;
    let table: AmplitudeTable = cover
        .tessellations()
        .iter()
        .map(|t| {
            t.polygons()
                .iter()
                .map(|p| Some(random_unit(rng, p.len())))
                .collect()
        })
        .collect();
    Walk::new(graph, cover, Some(table))
}

/// Expansion of a random vertex into a clique of `1..=max_k` vertices with a
/// random clique state.
pub fn random_expansion<R: Rng>(rng: &mut R, walk: &Walk, max_k: usize) -> Result<ExpansionSpec> {
    let u = rng.random_range(0..walk.n());
    let k = rng.random_range(1..=max_k);
    ExpansionSpec::new(u, random_unit(rng, k))
}
