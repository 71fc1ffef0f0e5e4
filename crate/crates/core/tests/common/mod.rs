#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::Rng;
use sqw::evolution::{to_dense, Operator, DEFAULT_DENSE_CAP};
use sqw::random::random_unit;
use sqw::transform::Expanded;
use sqw::{StateVector, Walk, C64};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Walk {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    sqw::io::walk_from_json(&text).expect("fixture parses")
}

pub fn dense(op: &impl Operator) -> DMatrix<C64> {
    to_dense(op, DEFAULT_DENSE_CAP).expect("within dense cap")
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    StateVector::new(random_unit(rng, n)).expect("unit")
}

/// Largest violation of the per-tessellation amplitude equalities between a walk
/// and its expansion for one state: outside the clique the amplitudes after `U_j`
/// agree, and on the clique the overlap with `|ũ⟩` equals the amplitude of `u`.
pub fn theorem1_deviation(walk: &Walk, expanded: &Expanded, psi: &StateVector) -> f64 {
    let link = &expanded.link;
    let lifted = link.lift(psi).expect("lift");
    let mut worst: f64 = 0.0;
    for (small, big) in walk
        .operator()
        .locals()
        .iter()
        .zip(expanded.walk.operator().locals())
    {
        let mut a = psi.amplitudes().to_vec();
        small.apply_in_place(&mut a);
        let mut b = lifted.amplitudes().to_vec();
        big.apply_in_place(&mut b);
        for (v, av) in a.iter().enumerate() {
            let dev = if v == link.u {
                let overlap: C64 = link
                    .clique
                    .vertices()
                    .iter()
                    .zip(link.clique.amplitudes())
                    .map(|(&w, uw)| uw.conj() * b[w])
                    .sum();
                (overlap - av).norm()
            } else {
                (b[link.map.image(v)[0]] - av).norm()
            };
            worst = worst.max(dev);
        }
    }
    worst
}

/// `‖L² − I‖_max` and `‖L − L†‖_max` of a dense operator.
pub fn reflection_defects(m: &DMatrix<C64>) -> (f64, f64) {
    let n = m.nrows();
    let square = m * m - DMatrix::<C64>::identity(n, n);
    (max_abs(&square), max_abs(&(m - m.adjoint())))
}
