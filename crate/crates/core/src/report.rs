//! Experiment configuration and the versioned JSON report shared by the CLI
//! and the acceptance suite.
//!
//! A report carries its full config, so running [`run_experiment`] on
//! `report.config` reproduces the report byte for byte. Nothing time- or
//! host-dependent is recorded.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{decompose, verify_decomposition, DecomposeConfig, Decomposition, VerifyReport};
use crate::graph::{generate, parse_edge_list, CutSummary, GeneratorSpec, Graph, GraphError, VertexId};
use crate::nibble::{distributed_nibble, NibbleCertificate, NibbleConfig, NibbleStats};
use crate::runtime::{pool, Transcript};
use crate::triangle::{
    brute_force_occurrences, brute_force_triangles, edge_concentration_probe, enumerate_general_with_stats,
    enumerate_subgraphs, GeneralConfig, LevelStats, Occurrence, Pattern, ProbeReport, SubgraphConfig, Triangle,
    TriangleSet, ORACLE_MAX_EDGES,
};

pub const SCHEMA: &str = "congest-lab/report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Run(String),
    #[error("io: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(String),
}

impl ReportError {
    /// Errors caused by the invocation rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(self, ReportError::Usage(_) | ReportError::Graph(_) | ReportError::Io(_) | ReportError::Json(_))
    }
}

fn run_err(e: impl fmt::Display) -> ReportError {
    ReportError::Run(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Decompose,
    Nibble,
    Triangles,
    Count,
    Detect,
    Subgraphs,
    Verify,
    Probe,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Decompose,
        Mode::Nibble,
        Mode::Triangles,
        Mode::Count,
        Mode::Detect,
        Mode::Subgraphs,
        Mode::Verify,
        Mode::Probe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Decompose => "decompose",
            Mode::Nibble => "nibble",
            Mode::Triangles => "triangles",
            Mode::Count => "count",
            Mode::Detect => "detect",
            Mode::Subgraphs => "subgraphs",
            Mode::Verify => "verify",
            Mode::Probe => "probe",
        }
    }
}

impl FromStr for Mode {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ReportError::Usage(format!("unknown mode {s:?}")))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    /// Edge-list file, one `u v` pair per line.
    File(String),
    /// Generator spec such as `er:n=64,p=0.3`.
    Gen(String),
}

impl GraphSource {
    pub fn load(&self, seed: u64) -> Result<Graph, ReportError> {
        match self {
            GraphSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ReportError::Io(format!("{path}: {e}")))?;
                Ok(parse_edge_list(&text)?)
            }
            GraphSource::Gen(spec) => Ok(generate(&spec.parse::<GeneratorSpec>()?, seed)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub graph: Option<GraphSource>,
    pub seed: u64,
    pub delta: f64,
    pub phi: f64,
    pub kappa: Option<u64>,
    /// Charged rounds above this count as a failed run.
    pub round_cap: Option<u64>,
    /// Test-only scale on the high-diameter threshold.
    pub case1_threshold_scale: f64,
    /// Skip the easy case of the expander step.
    pub force_partition: bool,
    /// Mode-specific argument: a report or decomposition path for `verify`,
    /// a pattern for `subgraphs`, `q=..,trials=..` for `probe`.
    pub mode_args: Option<String>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, graph: Option<GraphSource>, seed: u64) -> Self {
        ExperimentConfig {
            mode,
            graph,
            seed,
            delta: 0.5,
            phi: 1.0 / 50.0,
            kappa: None,
            round_cap: None,
            case1_threshold_scale: 1.0,
            force_partition: false,
            mode_args: None,
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ReportError::Usage(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if !(self.case1_threshold_scale > 0.0) {
            return Err(ReportError::Usage("case1 threshold scale must be positive".into()));
        }
        if self.graph.is_none() && self.mode != Mode::Verify {
            return Err(ReportError::Usage(format!("mode {} needs --graph or --gen", self.mode)));
        }
        if self.mode == Mode::Verify && self.mode_args.is_none() {
            return Err(ReportError::Usage("verify needs --mode-args <report or decomposition json>".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleResult {
    pub cut: Option<CutSummary>,
    pub certificate: Option<NibbleCertificate>,
    pub stats: NibbleStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleResult {
    pub triangles: Vec<Triangle>,
    pub count: usize,
    /// Reports per reporting vertex.
    pub attribution: BTreeMap<VertexId, usize>,
    pub exactly_once: bool,
    /// `None` when the graph is above the oracle cap.
    pub matches_oracle: Option<bool>,
    pub levels: Vec<LevelStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphResult {
    pub pattern: Pattern,
    pub count: usize,
    pub occurrences: Vec<(Occurrence, VertexId)>,
    pub exactly_once: bool,
    pub matches_oracle: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Decompose { decomposition: Decomposition, verify: VerifyReport },
    Nibble(NibbleResult),
    Triangles(TriangleResult),
    Count { count: usize, oracle_count: Option<usize> },
    Detect { found: bool, oracle_found: Option<bool> },
    Subgraphs(SubgraphResult),
    Verify { verify: VerifyReport },
    Probe(ProbeReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: u32,
    pub config: ExperimentConfig,
    pub graph: GraphInfo,
    /// False when a check built into the mode failed.
    pub passed: bool,
    pub summary: String,
    pub outcome: Outcome,
    pub transcript: Option<Transcript>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let r: Report = serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))?;
        if r.schema != SCHEMA || r.version != SCHEMA_VERSION {
            return Err(ReportError::Json(format!(
                "unsupported report {} v{}, expected {SCHEMA} v{SCHEMA_VERSION}",
                r.schema, r.version
            )));
        }
        Ok(r)
    }
}

fn parse_probe_args(args: Option<&str>) -> Result<(usize, usize), ReportError> {
    let (mut q, mut trials) = (None, 20);
    for kv in args.unwrap_or("").split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ReportError::Usage(format!("probe argument {kv:?} is not key=value")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| ReportError::Usage(format!("probe argument {kv:?} is not an integer")))?;
        match k.trim() {
            "q" => q = Some(v),
            "trials" => trials = v,
            _ => return Err(ReportError::Usage(format!("unknown probe argument {k:?}"))),
        }
    }
    Ok((q.unwrap_or(0), trials))
}

/// Reads the decomposition to verify: either a `decompose` report, whose
/// config also names the graph, or a bare decomposition.
fn load_decomposition(path: &str) -> Result<(Decomposition, Option<ExperimentConfig>), ReportError> {
    let text = std::fs::read_to_string(Path::new(path)).map_err(|e| ReportError::Io(format!("{path}: {e}")))?;
    if let Ok(r) = Report::from_json(&text) {
        return match r.outcome {
            Outcome::Decompose { decomposition, .. } => Ok((decomposition, Some(r.config))),
            _ => Err(ReportError::Usage(format!("{path} is a {} report, not a decomposition", r.config.mode))),
        };
    }
    let d: Decomposition = serde_json::from_str(&text).map_err(|e| ReportError::Json(format!("{path}: {e}")))?;
    Ok((d, None))
}

fn triangle_config(cfg: &ExperimentConfig) -> GeneralConfig {
    GeneralConfig {
        kappa: cfg.kappa,
        force_partition: cfg.force_partition,
        ..GeneralConfig::new(cfg.delta, cfg.seed)
    }
}

fn oracle_triangles(g: &Graph) -> Option<TriangleSet> {
    (g.m() <= ORACLE_MAX_EDGES).then(|| brute_force_triangles(g).ok()).flatten()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, ReportError> {
    cfg.validate()?;
    let mut verify_source = None;
    let g = match (&cfg.graph, cfg.mode) {
        (Some(src), _) => src.load(cfg.seed)?,
        (None, _) => {
            let (d, from) = load_decomposition(cfg.mode_args.as_deref().unwrap_or_default())?;
            let from = from.ok_or_else(|| {
                ReportError::Usage("a bare decomposition needs --graph or --gen to verify against".into())
            })?;
            let src = from
                .graph
                .clone()
                .ok_or_else(|| ReportError::Usage("the report names no graph".into()))?;
            let g = src.load(from.seed)?;
            verify_source = Some(d);
            g
        }
    };
    let info = GraphInfo {
        n: g.n(),
        m: g.m(),
        max_degree: g.max_degree(),
    };
    let (outcome, transcript, passed, summary) = match cfg.mode {
        Mode::Decompose => {
            let dcfg = DecomposeConfig {
                case1_scale: cfg.case1_threshold_scale,
                ..DecomposeConfig::new(cfg.delta, cfg.seed)
            };
            let (d, tr) = decompose(&g, &dcfg).map_err(run_err)?;
            let v = verify_decomposition(&g, &d);
            let summary = format!(
                "clusters={} em={} es={} er={} verified={}",
                d.clusters.len(),
                d.em_edge_count(),
                d.es_edge_count(),
                d.er.len(),
                v.passes
            );
            let passed = v.passes;
            (Outcome::Decompose { decomposition: d, verify: v }, Some(tr), passed, summary)
        }
        Mode::Nibble => {
            let out = distributed_nibble(&g, &NibbleConfig::new(cfg.phi, cfg.seed)).map_err(run_err)?;
            let (cut, certificate) = match &out.cut {
                Some(c) => {
                    let (s, cert) = c.summary();
                    (Some(s), Some(cert))
                }
                None => (None, None),
            };
            // A returned cut must meet 12 phi on recomputation.
            let sound = out.cut.as_ref().is_none_or(|c| c.cut.phi_f64() <= 12.0 * cfg.phi + 1e-12);
            let summary = match &certificate {
                Some(c) => format!("cut phi={:.6} target={:.6} b={} t={}", c.phi_achieved, 12.0 * cfg.phi, c.b, c.t),
                None => "cut=none".to_string(),
            };
            let res = NibbleResult {
                cut,
                certificate,
                stats: out.stats,
            };
            (Outcome::Nibble(res), Some(out.transcript), sound, summary)
        }
        Mode::Triangles | Mode::Count | Mode::Detect => {
            let (mut set, tr, levels) = enumerate_general_with_stats(&g, &triangle_config(cfg)).map_err(run_err)?;
            set.normalize();
            let oracle = oracle_triangles(&g);
            let matches = oracle.as_ref().map(|o| o.triangles() == set.triangles());
            let exactly_once = set.is_exactly_once();
            let passed = exactly_once && matches != Some(false);
            let count = set.count();
            let (outcome, summary) = match cfg.mode {
                Mode::Triangles => (
                    Outcome::Triangles(TriangleResult {
                        triangles: set.triangles(),
                        count,
                        attribution: set.per_reporter(),
                        exactly_once,
                        matches_oracle: matches,
                        levels,
                    }),
                    format!("triangles={count}"),
                ),
                Mode::Count => (
                    Outcome::Count {
                        count,
                        oracle_count: oracle.as_ref().map(|o| o.count()),
                    },
                    format!("triangles={count}"),
                ),
                _ => (
                    Outcome::Detect {
                        found: count > 0,
                        oracle_found: oracle.as_ref().map(|o| o.count() > 0),
                    },
                    format!("triangle_found={}", count > 0),
                ),
            };
            (outcome, Some(tr), passed, summary)
        }
        Mode::Subgraphs => {
            let pattern: Pattern = cfg.mode_args.as_deref().unwrap_or("clique:4").parse().map_err(run_err)?;
            let scfg = SubgraphConfig {
                kappa: cfg.kappa,
                force_partition: cfg.force_partition,
                ..SubgraphConfig::new(cfg.seed)
            };
            let (mut set, tr) = enumerate_subgraphs(&g, &pattern, &scfg).map_err(run_err)?;
            set.reports.sort();
            let matches = if g.m() <= 20_000 {
                let oracle = brute_force_occurrences(&g, &pattern).map_err(run_err)?;
                Some(oracle == set.occurrences())
            } else {
                None
            };
            let exactly_once = set.is_exactly_once();
            let count = set.count();
            let res = SubgraphResult {
                pattern,
                count,
                occurrences: set.reports,
                exactly_once,
                matches_oracle: matches,
            };
            (Outcome::Subgraphs(res), Some(tr), exactly_once && matches != Some(false), format!("occurrences={count}"))
        }
        Mode::Verify => {
            let d = match verify_source.take() {
                Some(d) => d,
                None => load_decomposition(cfg.mode_args.as_deref().unwrap_or_default())?.0,
            };
            let v = verify_decomposition(&g, &d);
            let summary = format!("verified={} problems={}", v.passes, v.problems.len());
            let passed = v.passes;
            (Outcome::Verify { verify: v }, None, passed, summary)
        }
        Mode::Probe => {
            let (q, trials) = parse_probe_args(cfg.mode_args.as_deref())?;
            let q = if q == 0 { crate::triangle::part_count(g.n(), 3) } else { q };
            let p = edge_concentration_probe(&g, q, cfg.seed, trials, false).map_err(run_err)?;
            let summary = format!("max={} bound={:.1} within={}/{}", p.max, p.bound, p.within_bound, trials);
            let passed = p.within_bound == trials;
            (Outcome::Probe(p), None, passed, summary)
        }
    };
    let mut transcript = transcript;
    let mut passed = passed;
    if let Some(tr) = transcript.as_mut() {
        if let Some(cap) = cfg.round_cap {
            if tr.rounds > cap {
                tr.round_cap_hit = true;
                passed = false;
            }
        }
        if tr.routing.violations > 0 || tr.channel_load > 1 {
            passed = false;
        }
    }
    Ok(Report {
        schema: SCHEMA.to_string(),
        version: SCHEMA_VERSION,
        config: cfg.clone(),
        graph: info,
        passed,
        summary,
        outcome,
        transcript,
    })
}

/// Runs `cfg` once per seed, concurrently; reports come back in seed order.
pub fn run_batch(cfg: &ExperimentConfig, seeds: &[u64]) -> Vec<Result<Report, ReportError>> {
    use rayon::prelude::*;
    pool().install(|| {
        seeds
            .par_iter()
            .map(|&s| run_experiment(&ExperimentConfig { seed: s, ..cfg.clone() }))
            .collect()
    })
}

pub const CSV_HEADER: &str = "mode,graph,n,m,seed,rounds,messages,passed,summary";

/// One row of the scaling table.
pub fn csv_row(r: &Report) -> String {
    let graph = match &r.config.graph {
        Some(GraphSource::File(p)) | Some(GraphSource::Gen(p)) => p.clone(),
        None => String::new(),
    };
    let (rounds, messages) = r
        .transcript
        .as_ref()
        .map_or((String::new(), String::new()), |t| (t.rounds.to_string(), t.message_count.to_string()));
    let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.config.mode,
        quote(&graph),
        r.graph.n,
        r.graph.m,
        r.config.seed,
        rounds,
        messages,
        r.passed,
        quote(&r.summary)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(mode: Mode, spec: &str) -> ExperimentConfig {
        ExperimentConfig::new(mode, Some(GraphSource::Gen(spec.into())), 1)
    }

    #[test]
    fn count_on_k4() {
        let r = run_experiment(&gen(Mode::Count, "clique:n=4")).unwrap();
        assert_eq!(r.summary, "triangles=4");
        assert!(r.passed);
        assert_eq!(r.outcome, Outcome::Count { count: 4, oracle_count: Some(4) });
    }

    #[test]
    fn report_round_trips_and_replays() {
        let r = run_experiment(&gen(Mode::Triangles, "barbell:k=8,bridges=1")).unwrap();
        let text = r.to_json();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(run_experiment(&back.config).unwrap().to_json(), text);
    }

    #[test]
    fn rejects_other_schema_versions() {
        let r = run_experiment(&gen(Mode::Detect, "cycle:n=5")).unwrap();
        assert_eq!(r.summary, "triangle_found=false");
        let text = r.to_json().replace("\"version\": 1", "\"version\": 99");
        assert!(Report::from_json(&text).is_err());
    }

    #[test]
    fn usage_errors() {
        let mut c = gen(Mode::Count, "clique:n=4");
        c.delta = 1.5;
        assert!(run_experiment(&c).unwrap_err().is_usage());
        let c = ExperimentConfig::new(Mode::Count, None, 1);
        assert!(run_experiment(&c).unwrap_err().is_usage());
        let c = gen(Mode::Count, "nonsense:n=4");
        assert!(run_experiment(&c).unwrap_err().is_usage());
    }

    #[test]
    fn round_cap_fails_the_run() {
        let mut c = gen(Mode::Count, "clique:n=6");
        c.round_cap = Some(0);
        let r = run_experiment(&c).unwrap();
        assert!(!r.passed);
        assert!(r.transcript.unwrap().round_cap_hit);
    }

    #[test]
    fn csv_rows_quote_fields() {
        let r = run_experiment(&gen(Mode::Count, "er:n=30,p=0.3")).unwrap();
        let row = csv_row(&r);
        assert!(row.starts_with("count,\"er:n=30,p=0.3\",30,"));
        assert_eq!(row.matches(',').count(), CSV_HEADER.matches(',').count() + 1);
    }
}
