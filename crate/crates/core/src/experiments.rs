//! Experiment drivers behind the command-line front end.
//!
//! Every driver is deterministic in its arguments. JSON results are wrapped in
//! a [`Record`] whose only run-dependent field is `timestamp`; CSV outputs carry
//! no timestamp at all.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::certificate::{certified_lower_bound, l1_chain_lower_bound, poincare_sides};
use crate::cut::{cuts_to_embedding, min_distortion_l1, CutSolutionJson, MAX_CUT_POINTS};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::graph::{build_diamond, vertex_count, DiamondGraph, GraphJson};
use crate::lp::{diamond_gap, smoothness_gap, PExponent, GAP_TOL};
use crate::metric::{shortest_path_metric, MetricMatrix};
use crate::optimizer::{evaluate_distortion, optimize_embedding, OptimizerConfig};

pub const VERSION: &str = concat!("diamond-embed ", env!("CARGO_PKG_VERSION"));

/// Slack allowed when comparing measured distortions against lower bounds.
pub const BOUND_SLACK: f64 = 1e-6;

/// Exponents of the single-vector fuzz regimes.
pub const FUZZ_EXPONENTS: [f64; 6] = [1.0, 1.01, 1.25, 1.5, 1.75, 2.0];
pub const FUZZ_DIMENSIONS: [usize; 4] = [1, 2, 8, 16];
/// Exponents, levels and dimensions of the embedding fuzz regime.
pub const FUZZ_EMBED_EXPONENTS: [f64; 3] = [1.1, 1.5, 2.0];
pub const FUZZ_EMBED_LEVELS: [usize; 3] = [1, 2, 3];
pub const FUZZ_EMBED_DIMENSIONS: [usize; 3] = [1, 3, 10];

/// One reproducible result: the command, its parameters and its output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record<P, R> {
    pub command: String,
    pub version: String,
    pub timestamp: u64,
    pub parameters: P,
    #[serde(flatten)]
    pub result: R,
}

impl<P, R> Record<P, R> {
    pub fn new(command: &str, parameters: P, result: R) -> Self {
        Record {
            command: command.to_string(),
            version: VERSION.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            parameters,
            result,
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn diamond_metric(k: usize) -> Result<(DiamondGraph, MetricMatrix)> {
    let g = build_diamond(k)?;
    let m = shortest_path_metric(&g)?;
    Ok((g, m))
}

/// `generate`: the graph document of `G_k`.
pub fn generate(k: usize) -> Result<GraphJson> {
    Ok(build_diamond(k)?.to_json())
}

/// `metric`: the pair-distance CSV of `G_k`.
pub fn metric_csv(k: usize) -> Result<String> {
    Ok(diamond_metric(k)?.1.to_csv())
}

/// `bound-table`: `k,p,lower_bound` for every `k <= k_max` and listed `p`.
pub fn bound_table(k_max: usize, ps: &[f64]) -> Result<String> {
    let ps = ps
        .iter()
        .map(|&p| PExponent::new(p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("k,p,lower_bound\n");
    for k in 0..=k_max {
        for &p in &ps {
            let _ = writeln!(
                out,
                "{},{},{}",
                k,
                sig17(p.get()),
                sig17(certified_lower_bound(k, p))
            );
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessParams {
    pub k: usize,
    pub p: f64,
    pub d: usize,
    pub seed: u64,
    pub restarts: usize,
}

/// Optimizer summary in the report layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub p: f64,
    pub d: usize,
    pub distortion: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub lower_bound: f64,
    pub seed: u64,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub report: EmbeddingReport,
    #[serde(skip)]
    pub embedding: Option<Embedding>,
}

fn optimizer_config(seed: u64, restarts: usize) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        restarts,
        ..OptimizerConfig::default()
    }
}

/// `tightness`: certificate lower bound against the best embedding found.
pub fn tightness(params: &TightnessParams) -> Result<Tightness> {
    let p = PExponent::new(params.p)?;
    let (_, m) = diamond_metric(params.k)?;
    let lower = certified_lower_bound(params.k, p);
    let out = optimize_embedding(&m, p, params.d, &optimizer_config(params.seed, params.restarts))?;
    let upper = out.report.distortion;
    if upper < lower - BOUND_SLACK {
        return Err(Error::Violation(format!(
            "embedding distortion {upper} below certified bound {lower}"
        )));
    }
    Ok(Tightness {
        lower_bound: lower,
        upper_bound: upper,
        gap: upper - lower,
        report: EmbeddingReport {
            p: params.p,
            d: params.d,
            distortion: upper,
            expansion: out.report.expansion,
            contraction: out.report.contraction,
            lower_bound: lower,
            seed: params.seed,
            restarts: params.restarts,
        },
        embedding: Some(out.embedding),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub d: usize,
    pub p: f64,
    pub best_distortion: f64,
    pub lower_bound_chain: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimSweep {
    pub rows: Vec<SweepRow>,
    /// `D*(G_k)` from the cut LP, when `G_k` is small enough to solve exactly.
    pub l1_constant: Option<f64>,
}

impl DimSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,d,p,best_distortion,lower_bound_chain,seed\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.k,
                r.d,
                sig17(r.p),
                sig17(r.best_distortion),
                sig17(r.lower_bound_chain),
                r.seed
            );
        }
        out
    }
}

/// `dim-sweep`: best `l_1^d` distortion of `G_k` per `d`, checked against the
/// chain bound divided by `D*(G_k)`.
pub fn dim_sweep(k: usize, ds: &[usize], seed: u64, restarts: usize) -> Result<DimSweep> {
    let (_, m) = diamond_metric(k)?;
    if let Some(&d) = ds.iter().find(|&&d| d == 0) {
        return Err(Error::InvalidArgument(format!("dimension {d} must be at least 1")));
    }
    let l1_constant = if vertex_count(k) <= MAX_CUT_POINTS as u128 {
        Some(min_distortion_l1(&m)?.distortion)
    } else {
        None
    };
    let cfg = optimizer_config(seed, restarts);
    let certified = certified_lower_bound(k, PExponent::ONE);
    let mut rows = Vec::with_capacity(ds.len());
    for &d in ds {
        let out = optimize_embedding(&m, PExponent::ONE, d, &cfg)?;
        let best = out.report.distortion;
        let chain = l1_chain_lower_bound(k, d)?;
        if best < certified - BOUND_SLACK {
            return Err(Error::Violation(format!(
                "d={d}: distortion {best} below certified bound {certified}"
            )));
        }
        if let Some(c1) = l1_constant {
            if best < chain / c1 - BOUND_SLACK {
                return Err(Error::Violation(format!(
                    "d={d}: distortion {best} below chain bound {chain} / {c1}"
                )));
            }
        }
        rows.push(SweepRow {
            k,
            d,
            p: 1.0,
            best_distortion: best,
            lower_bound_chain: chain,
            seed,
        });
    }
    Ok(DimSweep { rows, l1_constant })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Exact {
    #[serde(flatten)]
    pub solution: CutSolutionJson,
    /// Distortion of the coordinate embedding built from the cuts.
    pub embedding_distortion: f64,
    pub embedding: Vec<Vec<f64>>,
}

/// `l1-exact`: minimum `l_1` distortion of `G_k` and its cut embedding.
pub fn l1_exact(k: usize) -> Result<L1Exact> {
    let n = vertex_count(k.min(32));
    if n > MAX_CUT_POINTS as u128 {
        return Err(Error::Capacity {
            what: "l1-exact vertex count",
            value: n.min(u64::MAX as u128) as u64,
            max: MAX_CUT_POINTS as u64,
        });
    }
    let (_, m) = diamond_metric(k)?;
    let sol = min_distortion_l1(&m)?;
    let f = cuts_to_embedding(&sol)?;
    let report = evaluate_distortion(&m, &f)?;
    if (report.distortion - sol.distortion).abs() > 1e-6 * sol.distortion {
        return Err(Error::Violation(format!(
            "cut embedding distortion {} differs from LP optimum {}",
            report.distortion, sol.distortion
        )));
    }
    Ok(L1Exact {
        solution: sol.to_json(),
        embedding_distortion: report.distortion,
        embedding: (0..f.len()).map(|i| f.point(i).to_vec()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzParams {
    pub trials: usize,
    pub seed: u64,
    pub exponents: Option<Vec<f64>>,
}

/// A failing instance, serialized for exact replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Replay {
    Smoothness { p: f64, a: Vec<f64>, b: Vec<f64>, gap: f64, scale: f64 },
    Parallelogram { a: Vec<f64>, b: Vec<f64>, gap: f64, scale: f64 },
    Quadrilateral { p: f64, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>, w: Vec<f64>, gap: f64, scale: f64 },
    Poincare { k: usize, p: f64, embedding: Vec<Vec<f64>>, slack: f64, rhs: f64 },
}

/// Scale-normalized minima over every fuzz instance (gap / scale).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub lemma1_min_gap: f64,
    pub smoothness_min_gap: f64,
    pub lemma2_min_slack: f64,
    /// Largest `|gap| / scale` of the smoothness gap at `p = 2`.
    pub parallelogram_max_deviation: f64,
    pub pairs: usize,
    pub quadruples: usize,
    pub embeddings: usize,
    pub violation: Option<Replay>,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `fuzz`: randomized checks of the two-point inequality, the quadrilateral
/// inequality and the diamond certificate. `trials` pairs and quadruples cycle
/// through [`FUZZ_DIMENSIONS`] and the exponents; the certificate regime runs
/// `max(1, trials / 100)` embeddings per level, exponent and dimension.
/// Stops at the first violation.
pub fn fuzz(params: &FuzzParams) -> Result<FuzzSummary> {
    if params.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let single: Vec<PExponent> = match &params.exponents {
        Some(ps) if !ps.is_empty() => ps.iter().map(|&p| PExponent::new(p)).collect::<Result<_>>()?,
        _ => FUZZ_EXPONENTS.iter().map(|&p| PExponent::new(p)).collect::<Result<_>>()?,
    };
    let embed: Vec<PExponent> = match &params.exponents {
        Some(ps) if !ps.is_empty() => single.clone(),
        _ => FUZZ_EMBED_EXPONENTS.iter().map(|&p| PExponent::new(p)).collect::<Result<_>>()?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut summary = FuzzSummary {
        lemma1_min_gap: f64::INFINITY,
        smoothness_min_gap: f64::INFINITY,
        lemma2_min_slack: f64::INFINITY,
        parallelogram_max_deviation: 0.0,
        pairs: 0,
        quadruples: 0,
        embeddings: 0,
        violation: None,
    };

    for t in 0..params.trials {
        let dim = FUZZ_DIMENSIONS[t % FUZZ_DIMENSIONS.len()];
        let p = single[(t / FUZZ_DIMENSIONS.len()) % single.len()];
        // magnitudes spread over six decades
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));

        let a = gaussian_vec(&mut rng, dim, scale);
        let b = gaussian_vec(&mut rng, dim, scale);
        let g = smoothness_gap(&a, &b, p)?;
        summary.pairs += 1;
        summary.smoothness_min_gap = summary.smoothness_min_gap.min(g.relative());
        if !g.holds(GAP_TOL) {
            summary.violation = Some(Replay::Smoothness { p: p.get(), a, b, gap: g.value, scale: g.scale });
            return Ok(summary);
        }
        if p.get() == 2.0 {
            let dev = g.relative().abs();
            summary.parallelogram_max_deviation = summary.parallelogram_max_deviation.max(dev);
            if dev > 1e-12 {
                summary.violation = Some(Replay::Parallelogram { a, b, gap: g.value, scale: g.scale });
                return Ok(summary);
            }
        }

        let x = gaussian_vec(&mut rng, dim, scale);
        let y = gaussian_vec(&mut rng, dim, scale);
        let z = gaussian_vec(&mut rng, dim, scale);
        let w = gaussian_vec(&mut rng, dim, scale);
        let g = diamond_gap(&x, &y, &z, &w, p)?;
        summary.quadruples += 1;
        summary.lemma1_min_gap = summary.lemma1_min_gap.min(g.relative());
        if !g.holds(GAP_TOL) {
            summary.violation = Some(Replay::Quadrilateral {
                p: p.get(),
                x,
                y,
                z,
                w,
                gap: g.value,
                scale: g.scale,
            });
            return Ok(summary);
        }
    }

    let per_combo = (params.trials / 100).max(1);
    for &k in &FUZZ_EMBED_LEVELS {
        let g = build_diamond(k)?;
        let n = g.num_vertices();
        for &p in &embed {
            for &dim in &FUZZ_EMBED_DIMENSIONS {
                for _ in 0..per_combo {
                    let coords = gaussian_vec(&mut rng, n * dim, 1.0);
                    let f = Embedding::new(n, dim, p, coords)?;
                    let c = poincare_sides(&g, &f)?;
                    summary.embeddings += 1;
                    let rel = if c.rhs == 0.0 { 0.0 } else { c.slack / c.rhs };
                    summary.lemma2_min_slack = summary.lemma2_min_slack.min(rel);
                    if !c.holds(GAP_TOL) {
                        summary.violation = Some(Replay::Poincare {
                            k,
                            p: p.get(),
                            embedding: (0..n).map(|i| f.point(i).to_vec()).collect(),
                            slack: c.slack,
                            rhs: c.rhs,
                        });
                        return Ok(summary);
                    }
                }
            }
        }
    }
    Ok(summary)
}

/// Re-evaluates a serialized failing instance; returns its gap or slack.
pub fn replay(instance: &Replay) -> Result<f64> {
    match instance {
        Replay::Smoothness { p, a, b, .. } => Ok(smoothness_gap(a, b, PExponent::new(*p)?)?.value),
        Replay::Parallelogram { a, b, .. } => Ok(smoothness_gap(a, b, PExponent::TWO)?.value),
        Replay::Quadrilateral { p, x, y, z, w, .. } => {
            Ok(diamond_gap(x, y, z, w, PExponent::new(*p)?)?.value)
        }
        Replay::Poincare { k, p, embedding, .. } => {
            let g = build_diamond(*k)?;
            let f = Embedding::from_points(embedding, PExponent::new(*p)?)?;
            Ok(poincare_sides(&g, &f)?.slack)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_table_rows() {
        let csv = bound_table(1, &[2.0]).unwrap();
        assert_eq!(csv, "k,p,lower_bound\n0,2,1\n1,2,1.4142135623730951\n");
        let csv = bound_table(3, &[1.5]).unwrap();
        assert_eq!(csv.lines().last().unwrap(), "3,1.5,1.5811388300841898");
        assert_eq!(bound_table(0, &[]).unwrap(), "k,p,lower_bound\n");
        assert!(matches!(bound_table(2, &[2.5]), Err(Error::ExponentOutOfRange(_))));
    }

    #[test]
    fn generate_small() {
        let g = generate(1).unwrap();
        assert_eq!((g.num_vertices, g.anti_edges.len()), (4, 1));
        assert_eq!(g.edges.iter().filter(|e| e.level == 1).count(), 4);
        let g = generate(0).unwrap();
        assert_eq!((g.num_vertices, g.edges.len()), (2, 1));
        assert!(matches!(generate(99), Err(Error::Capacity { .. })));
    }

    #[test]
    fn l1_exact_caps() {
        assert!((l1_exact(1).unwrap().solution.distortion - 1.0).abs() < 1e-6);
        assert!(matches!(l1_exact(3), Err(Error::Capacity { .. })));
        assert!(matches!(l1_exact(60), Err(Error::Capacity { .. })));
    }

    #[test]
    fn trivial_tightness() {
        let t = tightness(&TightnessParams {
            k: 0,
            p: 1.5,
            d: 1,
            seed: 0,
            restarts: 1,
        })
        .unwrap();
        assert_eq!(t.lower_bound, 1.0);
        assert!((t.upper_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fuzz_small_and_rejects_out_of_range() {
        let s = fuzz(&FuzzParams {
            trials: 1,
            seed: 0,
            exponents: None,
        })
        .unwrap();
        assert!(s.passed());
        assert_eq!(s.embeddings, 27);
        let err = fuzz(&FuzzParams {
            trials: 10,
            seed: 0,
            exponents: Some(vec![3.0]),
        });
        assert!(matches!(err, Err(Error::ExponentOutOfRange(_))));
        assert!(fuzz(&FuzzParams { trials: 0, seed: 0, exponents: None }).is_err());
    }

    #[test]
    fn replay_reproduces_values() {
        let r = Replay::Quadrilateral {
            p: 2.0,
            x: vec![0.0, 0.0],
            y: vec![1.0, 0.0],
            z: vec![0.0, 1.0],
            w: vec![1.0, 1.0],
            gap: 0.0,
            scale: 4.0,
        };
        assert!(replay(&r).unwrap().abs() < 1e-15);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"kind\":\"quadrilateral\""));
        let back: Replay = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
    }
}
