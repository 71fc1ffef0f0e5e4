//! Command-line front end. Exit codes: 0 success, 1 validation or verification
//! failure, 2 usage or input error, 3 numerical error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, ErrorKind, Result};
use crate::evolution::{apply_evolution, to_dense, Walk, DEFAULT_DENSE_CAP};
use crate::graph::{polygon_intersections, validate_cover, VertexId};
use crate::io::{
    certificate_to_json, state_from_json, state_to_csv, state_to_json, walk_to_json, WalkFile,
};
use crate::search::{clique_grid_search, run_search, scaling_experiment, series_to_csv, TMaxRule};
use crate::spectral::{eigendecompose, verify_theorem2};
use crate::state::{uniform_state, StateVector, C64};
use crate::transform::{
    expand_walk, reduce_walk, ExpansionSpec, PhaseConvention, ReduceOptions, DEFAULT_TOL,
};

#[derive(Debug, Parser)]
#[command(
    name = "sqw",
    version,
    about = "Staggered quantum walks on tessellated graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StateFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a walk file's tessellations form a valid cover.
    Validate { walk: PathBuf },
    /// Evolve a state for a number of steps.
    Evolve {
        walk: PathBuf,
        #[arg(long)]
        steps: usize,
        /// `uniform`, `vertex:V` or a state JSON file.
        #[arg(long, default_value = "uniform")]
        init: String,
        #[arg(long, value_enum, default_value = "json")]
        format: StateFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalues (and optionally eigenvectors) of the evolution operator.
    Spectrum {
        walk: PathBuf,
        #[arg(long)]
        vectors: bool,
    },
    /// Expand a vertex into a clique.
    Expand {
        walk: PathBuf,
        #[arg(long)]
        u: VertexId,
        /// Clique size for a uniform clique state.
        #[arg(long, conflicts_with = "cs")]
        k: Option<usize>,
        /// Clique state as JSON `[[re, im], ...]`.
        #[arg(long)]
        cs: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Collapse a polygon intersection to one vertex.
    Reduce {
        walk: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        intersection: Vec<VertexId>,
        /// Tessellation the clique state is read from.
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Rotate the clique state so its first amplitude is real and positive.
        #[arg(long)]
        canonical_phase: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Where the certificate goes; standard error when absent.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Check the eigen-relations between a reduced and an expanded walk.
    Verify {
        #[arg(long)]
        expanded: PathBuf,
        #[arg(long)]
        reduced: PathBuf,
        #[arg(long, value_delimiter = ',')]
        intersection: Option<Vec<VertexId>>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Marked-polygon search on the clique grid.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value = "0,0")]
        mark: String,
        #[arg(long)]
        tmax: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search over several grid sizes with a scaling fit.
    Scaling {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        q_list: Vec<usize>,
        #[arg(long)]
        tmax: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// JSON summary destination; standard error when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    Failed,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e.kind() {
                ErrorKind::Verification => 1,
                ErrorKind::Input => 2,
                ErrorKind::Numerical => 3,
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_walk(path: &Path) -> Result<Walk> {
    WalkFile::parse(&read(path)?)?.to_walk()
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Validate { walk } => {
            let file = WalkFile::parse(&read(&walk)?)?;
            let (graph, cover) = file.graph_and_cover()?;
            let report = validate_cover(&graph, &cover);
            let amplitudes = file.check_amplitudes().map_err(|e| e.to_string()).err();
            let valid = report.valid && amplitudes.is_none();
            let mut value = serde_json::to_value(&report)?;
            value["valid"] = json!(valid);
            value["amplitude_error"] = json!(amplitudes);
            emit(&pretty(&value), None, out)?;
            Ok(if valid { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Evolve {
            walk,
            steps,
            init,
            format,
            output,
        } => {
            let w = read_walk(&walk)?;
            let psi0 = initial_state(&w, &init)?;
            let psi = apply_evolution(w.operator(), &psi0, steps)?;
            let text = match format {
                StateFormat::Json => state_to_json(&psi),
                StateFormat::Csv => state_to_csv(&psi),
            };
            emit(&text, output.as_deref(), out)?;
            Ok(Outcome::Ok)
        }
        Command::Spectrum { walk, vectors } => {
            let w = read_walk(&walk)?;
            let pairs = eigendecompose(&to_dense(w.operator(), DEFAULT_DENSE_CAP)?)?;
            let mut value = json!({
                "n": w.n(),
                "eigenvalues": pairs.iter().map(|p| pair(p.value)).collect::<Vec<_>>(),
            });
            if vectors {
                value["eigenvectors"] = json!(pairs
                    .iter()
                    .map(|p| p
                        .vector
                        .amplitudes()
                        .iter()
                        .copied()
                        .map(pair)
                        .collect::<Vec<_>>())
                    .collect::<Vec<_>>());
            }
            emit(&pretty(&value), None, out)?;
            Ok(Outcome::Ok)
        }
        Command::Expand {
            walk,
            u,
            k,
            cs,
            output,
        } => {
            let w = read_walk(&walk)?;
            let spec = match (k, cs) {
                (_, Some(text)) => {
                    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
                    ExpansionSpec::new(
                        u,
                        pairs.into_iter().map(|p| C64::new(p[0], p[1])).collect(),
                    )?
                }
                (Some(k), None) => ExpansionSpec::uniform(u, k)?,
                (None, None) => {
                    return Err(Error::Invalid("one of --k or --cs is required".into()))
                }
            };
            let expanded = expand_walk(&w, &spec)?;
            for note in &expanded.notes {
                writeln!(err, "note: {note}")?;
            }
            emit(&walk_to_json(&expanded.walk), output.as_deref(), out)?;
            Ok(Outcome::Ok)
        }
        Command::Reduce {
            walk,
            intersection,
            j,
            tol,
            canonical_phase,
            output,
            certificate,
        } => {
            let w = read_walk(&walk)?;
            let opts = ReduceOptions {
                tol,
                canonical_j: j,
                phase: if canonical_phase {
                    PhaseConvention::FirstRealPositive
                } else {
                    PhaseConvention::Raw
                },
            };
            let reduced = reduce_walk(&w, &intersection, &opts)?;
            emit(&walk_to_json(&reduced.walk), output.as_deref(), out)?;
            let cert = pretty(&certificate_to_json(&reduced.certificate));
            match certificate {
                Some(p) => fs::write(p, cert)?,
                None => writeln!(err, "{cert}")?,
            }
            Ok(Outcome::Ok)
        }
        Command::Verify {
            expanded,
            reduced,
            intersection,
            tol,
        } => {
            let big = read_walk(&expanded)?;
            let small = read_walk(&reduced)?;
            let report = verify_pair(&small, &big, intersection.as_deref(), tol)?;
            emit(&pretty(&serde_json::to_value(&report)?), None, out)?;
            Ok(if report.pass {
                Outcome::Ok
            } else {
                Outcome::Failed
            })
        }
        Command::Search {
            n,
            q,
            mark,
            tmax,
            output,
        } => {
            let (x, y) = parse_mark(&mark)?;
            let sw = clique_grid_search(n, q, x, y)?;
            let run = run_search(&sw, tmax.unwrap_or_else(|| crate::search::default_t_max(n)))?;
            emit(&series_to_csv(&run.series), output.as_deref(), out)?;
            match run.peak {
                Some(p) => writeln!(
                    err,
                    "t_peak={} p_peak={:.12} cost={:.6}",
                    p.t,
                    p.p,
                    p.cost()
                )?,
                None => writeln!(err, "no peak within t_max")?,
            }
            Ok(Outcome::Ok)
        }
        Command::Scaling {
            n_list,
            q_list,
            tmax,
            output,
            summary,
        } => {
            let rule = tmax.map_or(TMaxRule::Default, TMaxRule::Fixed);
            let table = scaling_experiment(&n_list, &q_list, rule)?;
            emit(&table.to_csv(), output.as_deref(), out)?;
            let text = pretty(&serde_json::to_value(table.summary())?);
            match summary {
                Some(p) => fs::write(p, text)?,
                None => writeln!(err, "{text}")?,
            }
            Ok(Outcome::Ok)
        }
    }
}

fn initial_state(w: &Walk, init: &str) -> Result<StateVector> {
    if init == "uniform" {
        return Ok(uniform_state(w.graph()));
    }
    if let Some(v) = init.strip_prefix("vertex:") {
        let v: usize = v
            .parse()
            .map_err(|_| Error::Invalid(format!("bad vertex in --init {init}")))?;
        if v >= w.n() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: w.n(),
            });
        }
        return Ok(StateVector::basis(w.n(), v));
    }
    let psi = state_from_json(&read(Path::new(init))?)?;
    if psi.len() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            found: psi.len(),
        });
    }
    Ok(psi)
}

fn parse_mark(mark: &str) -> Result<(usize, usize)> {
    let bad = || Error::Invalid(format!("--mark expects x,y, got {mark}"));
    let (x, y) = mark.split_once(',').ok_or_else(bad)?;
    Ok((
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

const GAUGE_TOL: f64 = 1e-8;

/// Finds the intersection that links the two walks, reduces the expanded walk on
/// it, fits the phase of `|ũ⟩` so the result matches `small`, and runs the
/// spectral check with that link.
pub fn verify_pair(
    small: &Walk,
    big: &Walk,
    intersection: Option<&[VertexId]>,
    tol: f64,
) -> Result<crate::spectral::Theorem2Report> {
    if big.n() < small.n() {
        return Err(Error::DimensionMismatch {
            expected: small.n(),
            found: big.n(),
        });
    }
    let k = big.n() - small.n() + 1;
    let candidates: Vec<Vec<VertexId>> = match intersection {
        Some(set) => vec![set.to_vec()],
        None if k == 1 => (0..big.n()).map(|v| vec![v]).collect(),
        None => polygon_intersections(big.cover())
            .into_iter()
            .filter(|i| i.vertices.len() == k)
            .map(|i| i.vertices)
            .collect(),
    };
    let target = to_dense(small.operator(), DEFAULT_DENSE_CAP)?;
    let mut last_err =
        Error::NotAnIntersection(format!("no intersection of size {k} links the walks"));
    for set in candidates {
        for j in 0..big.cover().len() {
            let opts = ReduceOptions {
                tol,
                canonical_j: j,
                phase: PhaseConvention::Raw,
            };
            let reduced = match reduce_walk(big, &set, &opts) {
                Ok(r) => r,
                Err(Error::ZeroMass(_)) => continue,
                Err(e) => {
                    last_err = e;
                    break;
                }
            };
            if reduced.walk.graph() != small.graph() {
                last_err = Error::Invalid("reduced graph differs from the supplied walk".into());
                break;
            }
            let got = to_dense(reduced.walk.operator(), DEFAULT_DENSE_CAP)?;
            let u = reduced.link.u;
            // conj(D) W D with D = e^{iφ} at u; fit φ from column u
            let anchor = (0..got.nrows())
                .filter(|&a| a != u)
                .max_by(|&a, &b| got[(a, u)].norm().total_cmp(&got[(b, u)].norm()));
            let phase = match anchor {
                Some(a) if got[(a, u)].norm() > GAUGE_TOL && target[(a, u)].norm() > GAUGE_TOL => {
                    let r = target[(a, u)] / got[(a, u)];
                    r / r.norm()
                }
                _ => C64::new(1.0, 0.0),
            };
            let mut aligned = got.clone();
            for i in 0..aligned.nrows() {
                aligned[(i, u)] *= phase;
                aligned[(u, i)] *= phase.conj();
            }
            let deviation = (&aligned - &target)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if deviation > GAUGE_TOL {
                last_err = Error::Invalid(format!(
                    "reduced operator differs from the supplied walk by {deviation:e}"
                ));
                break;
            }
            let link = reduced.link.with_phase(phase)?;
            return verify_theorem2(small, big, &link);
        }
    }
    Err(last_err)
}
