//! Spatial search on the clique-grid torus by removing a polygon from a tessellation.
//!
//! The vertices of the removed polygon are the marked ones; the marked tessellation's
//! reflection then negates them instead of reflecting about the polygon state.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{EvolutionOperator, Operator, Walk, DRIFT_TOL};
use crate::graph::{build_clique_grid, grid_blue_polygon, VertexId};
use crate::state::{uniform_state, C64};

/// Minimum ratio `p(t) / p(0)` for a peak.
pub const PEAK_FACTOR: f64 = 5.0;
/// Probabilities closer than this are treated as equal by the peak rule.
pub const PLATEAU_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SearchWalk {
    base: Walk,
    operator: EvolutionOperator,
    removed: Vec<(usize, usize)>,
    marked: Vec<VertexId>,
}

impl SearchWalk {
    pub fn base(&self) -> &Walk {
        &self.base
    }

    pub fn operator(&self) -> &EvolutionOperator {
        &self.operator
    }

    /// `(tessellation, polygon)` pairs whose projectors were dropped.
    pub fn removed(&self) -> &[(usize, usize)] {
        &self.removed
    }

    /// Sorted marked vertices.
    pub fn marked(&self) -> &[VertexId] {
        &self.marked
    }
}

/// Drops the projector of one polygon; its vertices become the marked set.
pub fn mark_polygon(walk: &Walk, tessellation: usize, polygon: usize) -> Result<SearchWalk> {
    let locals = walk.operator().locals();
    let local = locals
        .get(tessellation)
        .ok_or(Error::NoSuchTessellation(tessellation))?;
    let st = local.states().get(polygon).ok_or(Error::NoSuchPolygon {
        tessellation,
        polygon,
    })?;
    let mut marked = st.polygon().vertices().to_vec();
    marked.sort_unstable();
    let operator = walk
        .operator()
        .replace_local(tessellation, local.without_polygon(polygon)?)?;
    Ok(SearchWalk {
        base: walk.clone(),
        operator,
        removed: vec![(tessellation, polygon)],
        marked,
    })
}

/// Uniform clique grid with the blue polygon at `(x, y)` marked.
pub fn clique_grid_search(n: usize, q: usize, x: usize, y: usize) -> Result<SearchWalk> {
    if x >= n || y >= n {
        return Err(Error::Invalid(format!(
            "mark ({x},{y}) outside the {n}×{n} torus"
        )));
    }
    let (g, cover) = build_clique_grid(n, q)?;
    mark_polygon(&Walk::uniform(g, cover)?, 0, grid_blue_polygon(n, x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub t: usize,
    pub p: f64,
}

impl Peak {
    /// `t_peak / √p_peak`, the step count after amplitude amplification.
    pub fn cost(&self) -> f64 {
        self.t as f64 / self.p.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SearchRun {
    /// `p_marked(t)` for `t = 0..=t_max`.
    pub series: Vec<f64>,
    pub peak: Option<Peak>,
}

/// Evolves the uniform state for `t_max` steps, recording the marked probability.
pub fn run_search(sw: &SearchWalk, t_max: usize) -> Result<SearchRun> {
    if t_max == 0 {
        return Err(Error::Invalid("t_max must be at least 1".into()));
    }
    let mut amps = uniform_state(sw.base.graph()).into_amplitudes();
    let marked_p = |a: &[C64]| sw.marked.iter().map(|&v| a[v].norm_sqr()).sum::<f64>();
    let mut series = Vec::with_capacity(t_max + 1);
    series.push(marked_p(&amps));
    for step in 1..=t_max {
        sw.operator.apply_in_place(&mut amps);
        let ns: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (ns - 1.0).abs() > DRIFT_TOL {
            return Err(Error::NumericalDrift { norm_sqr: ns, step });
        }
        series.push(marked_p(&amps));
    }
    let peak = find_peak(&series, PEAK_FACTOR);
    Ok(SearchRun { series, peak })
}

/// First `t` with `p(t) ≥ factor·p(0)` followed by a strict decrease, moved back to
/// the first step of the plateau it ends (equal values within [`PLATEAU_TOL`]).
pub fn find_peak(series: &[f64], factor: f64) -> Option<Peak> {
    let threshold = factor * *series.first()?;
    let t = (0..series.len().saturating_sub(1))
        .find(|&t| series[t] >= threshold && series[t + 1] < series[t] - PLATEAU_TOL)?;
    let mut start = t;
    while start > 0 && (series[start - 1] - series[t]).abs() <= PLATEAU_TOL {
        start -= 1;
    }
    Some(Peak {
        t: start,
        p: series[start],
    })
}

/// `ceil(4·√(N ln N))` with `N = n²`.
pub fn default_t_max(n: usize) -> usize {
    let big_n = (n * n) as f64;
    (4.0 * (big_n * big_n.ln()).sqrt()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TMaxRule {
    Default,
    Fixed(usize),
}

impl TMaxRule {
    pub fn t_max(&self, n: usize) -> usize {
        match *self {
            TMaxRule::Default => default_t_max(n),
            TMaxRule::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub q: usize,
    /// `n²`, the number of blue polygons.
    pub big_n: usize,
    pub t_max: usize,
    pub t_peak: Option<usize>,
    pub p_peak: Option<f64>,
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    /// Fit of `ln t_peak` against `ln √(N ln N)` over the rows of the first `q`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `max / min` of `p_peak · ln N` over the same rows.
    pub p_log_ratio: f64,
    /// Largest difference of `p_peak` between rows with equal `n`.
    pub cross_q_max_dev: f64,
    pub cross_q_consistent: bool,
    pub rows_fitted: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Full series per row, same order.
    pub series: Vec<Vec<f64>>,
}

/// One search per `(n, q)`, blue polygon `(0, 0)` marked. Runs in parallel; rows
/// are ordered by `n_list` then `q_list`.
pub fn scaling_experiment(
    n_list: &[usize],
    q_list: &[usize],
    rule: TMaxRule,
) -> Result<ScalingTable> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidGridSize {
            n,
            q: q_list.first().copied().unwrap_or(1),
        });
    }
    let jobs: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| q_list.iter().map(move |&q| (n, q)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, q)| {
            let t_max = rule.t_max(n);
            let run = run_search(&clique_grid_search(n, q, 0, 0)?, t_max)?;
            let row = ScalingRow {
                n,
                q,
                big_n: n * n,
                t_max,
                t_peak: run.peak.map(|p| p.t),
                p_peak: run.peak.map(|p| p.p),
                cost: run.peak.map(|p| p.cost()),
            };
            Ok((row, run.series))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, series) = results.into_iter().unzip();
    Ok(ScalingTable { rows, series })
}

impl ScalingTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,q,N,t_peak,p_peak,cost\n");
        let opt = |x: Option<String>| x.unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.q,
                r.big_n,
                opt(r.t_peak.map(|t| t.to_string())),
                opt(r.p_peak.map(|p| format!("{p:.12}"))),
                opt(r.cost.map(|c| format!("{c:.6}"))),
            ));
        }
        out
    }

    pub fn summary(&self) -> ScalingSummary {
        let first_q = self.rows.first().map(|r| r.q);
        let fitted: Vec<(f64, f64, f64)> = self
            .rows
            .iter()
            .filter(|r| Some(r.q) == first_q)
            .filter_map(|r| {
                let big_n = r.big_n as f64;
                Some((
                    (big_n * big_n.ln()).sqrt(),
                    r.t_peak? as f64,
                    r.p_peak? * big_n.ln(),
                ))
            })
            .collect();
        let xs: Vec<f64> = fitted.iter().map(|f| f.0.ln()).collect();
        let ys: Vec<f64> = fitted.iter().map(|f| f.1.ln()).collect();
        let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
        let ratios = fitted.iter().map(|f| f.2);
        let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });

        let mut dev: f64 = 0.0;
        let mut consistent = true;
        for a in &self.rows {
            for b in self.rows.iter().filter(|b| b.n == a.n) {
                consistent &= a.t_peak == b.t_peak;
                if let (Some(pa), Some(pb)) = (a.p_peak, b.p_peak) {
                    dev = dev.max((pa - pb).abs());
                }
            }
        }
        ScalingSummary {
            slope,
            intercept,
            r_squared,
            p_log_ratio: hi / lo,
            cross_q_max_dev: dev,
            cross_q_consistent: consistent && dev <= 1e-6,
            rows_fitted: fitted.len(),
        }
    }
}

/// Least squares `y ≈ slope·x + intercept`, with the coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r_squared)
}

/// `t,p_marked` rows with a header.
pub fn series_to_csv(series: &[f64]) -> String {
    let mut out = String::from("t,p_marked\n");
    for (t, p) in series.iter().enumerate() {
        out.push_str(&format!("{t},{p:.15e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{star_s3_walk, to_dense};
    use crate::graph::grid_index;
    use crate::state::StateVector;

    #[test]
    fn marked_blue_polygon_negates_its_uniform_state() {
        let sw = clique_grid_search(3, 2, 0, 0).unwrap();
        assert_eq!(sw.marked(), &(0..8).collect::<Vec<_>>()[..]);
        let n = sw.base().n();
        let a = 1.0 / 8f64.sqrt();
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[..8].iter_mut().for_each(|x| *x = C64::new(a, 0.0));
        let mut img = v.clone();
        sw.operator().locals()[0].apply_in_place(&mut img);
        for (x, y) in img.iter().zip(&v) {
            assert!((x + y).norm() < 1e-15);
        }
    }

    #[test]
    fn marking_a_singleton_in_s3() {
        let w = star_s3_walk();
        let sw = mark_polygon(&w, 0, 1).unwrap();
        assert_eq!(sw.marked(), &[1]);
        let mut e1 = StateVector::basis(4, 1).into_amplitudes();
        sw.operator().locals()[0].apply_in_place(&mut e1);
        assert_eq!(e1[1], C64::new(-1.0, 0.0));
        assert!(mark_polygon(&w, 3, 0).is_err());
        assert!(mark_polygon(&w, 0, 3).is_err());
    }

    #[test]
    fn dense_marked_operator() {
        // removing |α⟩ from 2Σ|P⟩⟨P| − I subtracts 2|α⟩⟨α|
        let w = {
            let (g, c) = build_clique_grid(2, 1).unwrap();
            Walk::uniform(g, c).unwrap()
        };
        let sw = mark_polygon(&w, 0, 0).unwrap();
        let before = to_dense(&w.operator().locals()[0], 64).unwrap();
        let after = to_dense(&sw.operator().locals()[0], 64).unwrap();
        let alpha = w.polygon_states(0)[0].clone();
        let mut proj = nalgebra::DMatrix::<C64>::zeros(16, 16);
        for (a, ca) in alpha.iter() {
            for (b, cb) in alpha.iter() {
                proj[(a, b)] = ca * cb.conj();
            }
        }
        let diff = before - proj * C64::new(2.0, 0.0) - &after;
        assert!(diff.iter().all(|z| z.norm() < 1e-15));
        let full = to_dense(sw.operator(), 64).unwrap();
        let gram = full.adjoint() * &full - nalgebra::DMatrix::<C64>::identity(16, 16);
        assert!(gram.iter().all(|z| z.norm() <= 1e-10));
    }

    #[test]
    fn initial_probability_is_one_over_n_squared() {
        for (n, q) in [(2, 1), (3, 2), (4, 3)] {
            let run = run_search(&clique_grid_search(n, q, 1, 1).unwrap(), 1).unwrap();
            assert!((run.series[0] - 1.0 / (n * n) as f64).abs() < 1e-15);
        }
        assert!(run_search(&clique_grid_search(2, 1, 0, 0).unwrap(), 0).is_err());
        assert!(clique_grid_search(2, 1, 2, 0).is_err());
    }

    #[test]
    fn series_agree_across_q() {
        let t_max = default_t_max(4);
        let base = run_search(&clique_grid_search(4, 1, 0, 0).unwrap(), t_max).unwrap();
        let other = run_search(&clique_grid_search(4, 2, 0, 0).unwrap(), t_max).unwrap();
        for (a, b) in base.series.iter().zip(&other.series) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(base
            .series
            .iter()
            .all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
        let (peak, other_peak) = (base.peak.unwrap(), other.peak.unwrap());
        assert_eq!(peak.t, other_peak.t);
        assert!((peak.p - other_peak.p).abs() < 1e-8);
        assert!(peak.p > 5.0 / 16.0);
    }

    #[test]
    fn unmarked_intersections_stay_uniform() {
        let (n, q) = (3, 3);
        let sw = clique_grid_search(n, q, 0, 0).unwrap();
        let mut amps = uniform_state(sw.base().graph()).into_amplitudes();
        for step in 1..=20 {
            sw.operator().apply_in_place(&mut amps);
            if step % 5 != 0 {
                continue;
            }
            for x in 0..n {
                for y in 0..n {
                    for m in 0..4 {
                        let block: Vec<C64> = (0..q)
                            .map(|i| amps[grid_index(n, q, x, y, m * q + i)])
                            .collect();
                        let mean = block.iter().sum::<C64>() / q as f64;
                        let residual: f64 = block
                            .iter()
                            .map(|a| (a - mean).norm_sqr())
                            .sum::<f64>()
                            .sqrt();
                        assert!(residual <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn peak_rule_handles_plateaus() {
        let s = [0.1, 0.2, 0.6, 0.6, 0.7, 0.7, 0.3, 0.9];
        assert_eq!(find_peak(&s, 5.0), Some(Peak { t: 4, p: 0.7 }));
        assert_eq!(find_peak(&[0.1, 0.2, 0.3], 5.0), None);
        assert_eq!(find_peak(&[], 5.0), None);
        let p = Peak { t: 9, p: 0.25 };
        assert!((p.cost() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn t_max_rule() {
        assert_eq!(
            default_t_max(4),
            (4.0 * (16.0 * 16f64.ln()).sqrt()).ceil() as usize
        );
        assert_eq!(TMaxRule::Fixed(7).t_max(100), 7);
    }

    #[test]
    fn scaling_table_is_ordered_and_consistent() {
        let table = scaling_experiment(&[4, 3], &[1, 2], TMaxRule::Default).unwrap();
        let keys: Vec<(usize, usize)> = table.rows.iter().map(|r| (r.n, r.q)).collect();
        assert_eq!(keys, vec![(4, 1), (4, 2), (3, 1), (3, 2)]);
        let summary = table.summary();
        assert!(summary.cross_q_consistent);
        assert!(table
            .to_csv()
            .starts_with("n,q,N,t_peak,p_peak,cost\n4,1,16,"));
        assert!(scaling_experiment(&[1], &[1], TMaxRule::Default).is_err());
    }

    #[test]
    fn fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (s, i, r2) = linear_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-12 && (i + 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
