//! Repeated generate-detect-evaluate runs over the synthetic scenarios.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{detect, LartConfig};
use crate::error::{LartError, Result};
use crate::metrics::{fowlkes_mallows, nmi};
use crate::synthgen::{generate, Scenario, ScenarioConfig};

pub const CSV_HEADER: &str = "scenario,seed,algorithm,nmi,fm,runtime_ms,num_communities,q_m";

/// Coupling used by the fixed-weight baseline.
pub const FIXED_OMEGA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Locally adaptive inter-layer weights.
    Lart,
    /// Every inter-layer weight set to [`FIXED_OMEGA`].
    Fixed,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lart => "lart",
            Algorithm::Fixed => "fixed",
        }
    }

    pub fn config(self, base: &LartConfig) -> LartConfig {
        match self {
            Algorithm::Lart => LartConfig {
                fixed_omega: None,
                ..*base
            },
            Algorithm::Fixed => LartConfig {
                fixed_omega: Some(FIXED_OMEGA),
                ..*base
            },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = LartError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lart" => Ok(Algorithm::Lart),
            "fixed" | "fixed1" => Ok(Algorithm::Fixed),
            _ => Err(LartError::InvalidArgument(format!(
                "unknown algorithm `{s}` (expected lart or fixed)"
            ))),
        }
    }
}

/// Seed of run `index` under `master`. Independent of the number of runs.
pub fn run_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a per-index counter
    let mut z = master.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub nmi: f64,
    pub fm: f64,
    pub runtime_ms: f64,
    pub num_communities: usize,
    pub q_m: f64,
}

/// A row, or the error that stopped the run.
pub type BenchOutcome = std::result::Result<BenchRow, BenchFailure>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchFailure {
    pub scenario: Scenario,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub scenario: Scenario,
    pub runs: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub config: LartConfig,
}

/// Runs `runs` instances of one scenario. Results come back ordered by run
/// index, then by the order of `algorithms`.
pub fn run(spec: &BenchSpec) -> Result<Vec<BenchOutcome>> {
    if spec.runs == 0 {
        return Err(LartError::InvalidArgument("runs must be at least 1".into()));
    }
    if spec.algorithms.is_empty() {
        return Err(LartError::InvalidArgument("no algorithm selected".into()));
    }
    let per_run: Vec<Vec<BenchOutcome>> = (0..spec.runs as u64)
        .into_par_iter()
        .map(|index| {
            let seed = run_seed(spec.master_seed, index);
            let instance = generate(&ScenarioConfig::new(spec.scenario, seed));
            spec.algorithms
                .iter()
                .map(|&algorithm| {
                    let fail = |message: String| BenchFailure {
                        scenario: spec.scenario,
                        seed,
                        algorithm,
                        message,
                    };
                    let instance = instance.as_ref().map_err(|e| fail(e.to_string()))?;
                    let clock = Instant::now();
                    let det = detect(&instance.multiplex, &algorithm.config(&spec.config))
                        .map_err(|e| fail(e.to_string()))?;
                    let runtime_ms = clock.elapsed().as_secs_f64() * 1e3;
                    let truth = instance.truth.to_partition();
                    Ok(BenchRow {
                        scenario: spec.scenario,
                        seed,
                        algorithm,
                        nmi: nmi(&truth, &det.partition).map_err(|e| fail(e.to_string()))?,
                        fm: fowlkes_mallows(&truth, &det.partition)
                            .map_err(|e| fail(e.to_string()))?,
                        runtime_ms,
                        num_communities: det.partition.num_communities(),
                        q_m: det.q_m,
                    })
                })
                .collect()
        })
        .collect();
    Ok(per_run.into_iter().flatten().collect())
}

/// CSV with [`CSV_HEADER`]. `runtime_ms` is left empty unless
/// `with_runtime`, so that repeated runs produce identical bytes.
pub fn to_csv(outcomes: &[BenchOutcome], with_runtime: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for outcome in outcomes {
        match outcome {
            Ok(row) => {
                let runtime = if with_runtime {
                    format!("{:.3}", row.runtime_ms)
                } else {
                    String::new()
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{:.6},{},{},{:.6}",
                    row.scenario,
                    row.seed,
                    row.algorithm,
                    row.nmi,
                    row.fm,
                    runtime,
                    row.num_communities,
                    row.q_m
                );
            }
            Err(f) => {
                let _ = writeln!(out, "{},{},{},failed,failed,,,", f.scenario, f.seed, f.algorithm);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; a single value has spread 0.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}±{:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: Scenario,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failures: usize,
    pub nmi: MeanStd,
    pub fm: MeanStd,
    pub runtime_ms: MeanStd,
}

/// Mean and spread per `(scenario, algorithm)`, in first-seen order.
pub fn aggregate(outcomes: &[BenchOutcome]) -> Vec<Aggregate> {
    let mut keys: Vec<(Scenario, Algorithm)> = Vec::new();
    for o in outcomes {
        let key = match o {
            Ok(r) => (r.scenario, r.algorithm),
            Err(f) => (f.scenario, f.algorithm),
        };
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scenario, algorithm)| {
            let rows: Vec<&BenchRow> = outcomes
                .iter()
                .filter_map(|o| o.as_ref().ok())
                .filter(|r| r.scenario == scenario && r.algorithm == algorithm)
                .collect();
            let failures = outcomes
                .iter()
                .filter(|o| matches!(o, Err(f) if f.scenario == scenario && f.algorithm == algorithm))
                .count();
            let pick = |f: fn(&BenchRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
            Aggregate {
                scenario,
                algorithm,
                runs: rows.len(),
                failures,
                nmi: MeanStd::of(&pick(|r| r.nmi)),
                fm: MeanStd::of(&pick(|r| r.fm)),
                runtime_ms: MeanStd::of(&pick(|r| r.runtime_ms)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_do_not_depend_on_run_count() {
        let a: Vec<u64> = (0..5).map(|i| run_seed(42, i)).collect();
        let b: Vec<u64> = (0..10).map(|i| run_seed(42, i)).collect();
        assert_eq!(a, b[..5]);
        assert_ne!(run_seed(42, 0), run_seed(43, 0));
    }

    #[test]
    fn single_run_has_zero_spread() {
        let m = MeanStd::of(&[0.7]);
        assert_eq!(m.mean, 0.7);
        assert_eq!(m.std, 0.0);
        let m = MeanStd::of(&[1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("lart".parse::<Algorithm>().unwrap(), Algorithm::Lart);
        assert_eq!("Fixed".parse::<Algorithm>().unwrap(), Algorithm::Fixed);
        assert!("infomap".parse::<Algorithm>().is_err());
        let cfg = Algorithm::Fixed.config(&LartConfig::default());
        assert_eq!(cfg.fixed_omega, Some(1.0));
    }

    #[test]
    fn rejects_empty_bench() {
        let spec = BenchSpec {
            scenario: Scenario::S1,
            runs: 0,
            master_seed: 0,
            algorithms: vec![Algorithm::Lart],
            config: LartConfig::default(),
        };
        assert!(run(&spec).is_err());
    }

    #[test]
    fn csv_marks_failures_and_aggregates_recompute() {
        let row = |seed, nmi| {
            Ok(BenchRow {
                scenario: Scenario::S2,
                seed,
                algorithm: Algorithm::Lart,
                nmi,
                fm: 1.0,
                runtime_ms: 12.0,
                num_communities: 4,
                q_m: 0.5,
            })
        };
        let outcomes = vec![
            row(1, 0.5),
            row(2, 1.0),
            Err(BenchFailure {
                scenario: Scenario::S2,
                seed: 3,
                algorithm: Algorithm::Lart,
                message: "boom".into(),
            }),
        ];
        let csv = to_csv(&outcomes, false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "s2,1,lart,0.500000,1.000000,,4,0.500000");
        assert_eq!(lines[3], "s2,3,lart,failed,failed,,,");
        assert!(to_csv(&outcomes, true).contains(",12.000,"));

        let agg = aggregate(&outcomes);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].runs, 2);
        assert_eq!(agg[0].failures, 1);
        assert_eq!(agg[0].nmi.mean, 0.75);
    }
}
