//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Tolerances and limits are pinned below.

mod common;

use std::time::{Duration, Instant};

use common::*;
use congest_lab::decomposition::{
    balanced_index, decompose, verify_decomposition, DecomposeConfig, ExpansionMethod,
};
use congest_lab::graph::{conductance, generate, GeneratorSpec, Graph};
use congest_lab::nibble::{distributed_nibble, NibbleConfig};
use congest_lab::report::{run_experiment, ExperimentConfig, GraphSource, Mode};
use congest_lab::runtime::Transcript;
use congest_lab::triangle::{brute_force_triangles, edge_concentration_probe, enumerate_general, GeneralConfig};

const SYMMETRY_TOL: f64 = 1e-12;
const SYMMETRY_STEPS: usize = 20;
const TRIANGLE_LIMIT: Duration = Duration::from_secs(60);
const DECOMPOSITION_LIMIT: Duration = Duration::from_secs(120);
const NIBBLE_LIMIT: Duration = Duration::from_secs(90);
const SCALING_LIMIT: Duration = Duration::from_secs(600);
const RECALL_NEEDED: usize = 45;
const CONCENTRATION_NEEDED: usize = 99;
const SCALING_EXPONENT: f64 = 0.75;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Transcripts from criteria 1 to 4, checked by criterion 9.
#[derive(Default)]
struct Bandwidth {
    runs: usize,
    bad_channel: usize,
    bad_routing: usize,
}

impl Bandwidth {
    fn record(&mut self, t: &Transcript) {
        self.runs += 1;
        self.bad_channel += (t.channel_load > 1) as usize;
        self.bad_routing += (t.routing.violations > 0) as usize;
    }
}

fn spec(s: &str) -> GeneratorSpec {
    s.parse().unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Serialized output of criterion 1, used again by criterion 11.
fn triangle_runs(bw: &mut Bandwidth) -> (usize, usize, usize, Vec<String>) {
    let graphs = [
        "clique:n=4",
        "cycle:n=5",
        "er:n=50,p=0.3",
        "er:n=200,p=0.2",
        "er:n=500,p=0.05",
        "barbell:k=16,bridges=1",
    ];
    let (mut runs, mut exact, mut once) = (0, 0, 0);
    let mut dump = Vec::new();
    for gs in graphs {
        for seed in 0..20u64 {
            let g = generate(&spec(gs), seed).unwrap();
            let (t, tr) = enumerate_general(&g, &GeneralConfig::new(0.5, seed)).unwrap();
            runs += 1;
            exact += (t.triangles() == brute_force_triangles(&g).unwrap().triangles()) as usize;
            once += t.is_exactly_once() as usize;
            bw.record(&tr);
            dump.push(serde_json::to_string(&(&t, &tr)).unwrap());
        }
    }
    (runs, exact, once, dump)
}

fn criterion_1(bw: &mut Bandwidth) -> (Line, Vec<String>) {
    let start = Instant::now();
    let (runs, exact, once, dump) = triangle_runs(bw);
    let took = start.elapsed();
    let line = Line {
        id: 1,
        name: "triangle exactness",
        pass: exact == runs && once == runs && took <= TRIANGLE_LIMIT,
        detail: format!(
            "{exact}/{runs} exact, {once}/{runs} exactly-once, {} (limit {})",
            secs(took),
            secs(TRIANGLE_LIMIT)
        ),
    };
    (line, dump)
}

fn criteria_2_3(bw: &mut Bandwidth) -> (Line, Line) {
    let graphs = ["er:n=512,p=0.25", "er:n=1024,p=0.02", "hypercube:d=9", "path:n=1000", "clique:n=64"];
    let start = Instant::now();
    let (mut runs, mut ok) = (0, 0);
    let mut problems = Vec::new();
    let (mut clusters, mut cert_fail) = (0, 0);
    let (mut brute, mut spectral, mut mixing) = (0, 0, 0);
    for gs in graphs {
        for seed in 0..10u64 {
            let g = generate(&spec(gs), seed).unwrap();
            let (d, tr) = decompose(&g, &DecomposeConfig::new(0.5, seed)).unwrap();
            bw.record(&tr);
            let rep = verify_decomposition(&g, &d);
            runs += 1;
            let structural = rep.partition_ok
                && rep.clusters_ok
                && rep.min_degree_ok
                && rep.orientation.passes
                && rep.er_ok
                && 6 * d.er.len() <= g.m();
            ok += structural as usize;
            if !structural && problems.len() < 3 {
                problems.push(format!("{gs} seed {seed}: {:?}", rep.problems));
            }
            for c in &rep.clusters {
                clusters += 1;
                let small_ok = c.vertices > 24 || c.method == ExpansionMethod::BruteForce;
                if !c.passes || !small_ok || c.method == ExpansionMethod::Unchecked {
                    cert_fail += 1;
                }
                match c.method {
                    ExpansionMethod::BruteForce => brute += 1,
                    ExpansionMethod::Spectral => spectral += 1,
                    ExpansionMethod::Mixing => mixing += 1,
                    ExpansionMethod::Unchecked => {}
                }
            }
        }
    }
    let took = start.elapsed();
    let mut detail = format!("{ok}/{runs} verified, {} (limit {})", secs(took), secs(DECOMPOSITION_LIMIT));
    if !problems.is_empty() {
        detail += &format!("; {}", problems.join("; "));
    }
    let two = Line {
        id: 2,
        name: "decomposition structure",
        pass: ok == runs && took <= DECOMPOSITION_LIMIT,
        detail,
    };
    let three = Line {
        id: 3,
        name: "cluster expansion certificates",
        pass: cert_fail == 0,
        detail: format!(
            "{cert_fail} failures over {clusters} clusters (brute force {brute}, spectral {spectral}, mixing {mixing})"
        ),
    };
    (two, three)
}

/// Returns the line and the sorted cut sides, reused by criterion 11.
fn criterion_4(bw: &mut Bandwidth, seeds: u64) -> (Line, Vec<Option<Vec<usize>>>) {
    let phi = 1.0 / 50.0;
    let start = Instant::now();
    let (mut found, mut cuts, mut unsound) = (0, 0, 0);
    let mut sides = Vec::new();
    let planted = GeneratorSpec::PlantedCut {
        block: 64,
        p: 0.3,
        cross_edges: 4,
    };
    let mut check = |g: &Graph, seed: u64, bw: &mut Bandwidth| {
        let cfg = NibbleConfig { simulate: true, ..NibbleConfig::new(phi, seed) };
        let out = distributed_nibble(g, &cfg).unwrap();
        bw.record(&out.transcript);
        if let Some(c) = &out.cut {
            cuts += 1;
            let again = conductance(g, &c.cut.side).unwrap();
            if again.phi_f64() > 12.0 * phi || again != c.cut {
                unsound += 1;
            }
        }
        out.cut.map(|c| c.cut.side.to_vec())
    };
    for seed in 0..seeds {
        let g = generate(&planted, seed).unwrap();
        let side = check(&g, seed, bw);
        found += side.is_some() as usize;
        sides.push(side);
    }
    // No sparse cut exists in K16: every returned cut would be unsound.
    let k16 = generate(&GeneratorSpec::Clique { n: 16 }, 0).unwrap();
    let mut k16_cuts = 0;
    for seed in 0..5 {
        k16_cuts += check(&k16, seed, bw).is_some() as usize;
    }
    let took = start.elapsed();
    let needed = RECALL_NEEDED * seeds as usize / 50;
    let line = Line {
        id: 4,
        name: "nibble soundness and recall",
        pass: unsound == 0 && found >= needed && k16_cuts == 0 && took <= NIBBLE_LIMIT,
        detail: format!(
            "recall {found}/{seeds} (need {needed}), {unsound} unsound of {cuts} cuts, K16 cuts {k16_cuts}, {} (limit {})",
            secs(took),
            secs(NIBBLE_LIMIT)
        ),
    };
    (line, sides)
}

fn criterion_5() -> Line {
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    for i in 0..20u64 {
        let n = 16 + (i as usize * 37) % 49;
        let p = 0.05 + 0.04 * (i % 10) as f64;
        let g = connected_er(n, p, 1000 + i);
        sizes.push(n);
        worst = worst.max(walk_symmetry_gap(&g, SYMMETRY_STEPS));
    }
    Line {
        id: 5,
        name: "walk symmetry",
        pass: worst <= SYMMETRY_TOL,
        detail: format!(
            "max |rho_t^v(u) - rho_t^u(v)| = {worst:.2e} (tol {SYMMETRY_TOL:.0e}) over 20 graphs, n in {}..={}, t <= {SYMMETRY_STEPS}",
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap()
        ),
    }
}

fn criterion_6() -> Line {
    let (mut qualifying, mut checked, mut bad) = (0, 0, 0);
    for i in 0..50u64 {
        let block = 5 + (i as usize % 6);
        let phi = if i % 4 < 2 { 1.0 / 15.0 } else { 1.0 / 20.0 };
        let g = if i % 2 == 0 {
            small_planted(block, 0.8, 1 + (i as usize % 4) / 2, 2000 + i)
        } else {
            planted_with_pendants(block.min(8), 20, 2000 + i)
        };
        let (q, c, b) = sweep_approximation(&g, phi, 10);
        qualifying += q;
        checked += c;
        bad += b;
    }
    Line {
        id: 6,
        name: "sweep approximation",
        pass: bad == 0 && qualifying > 0,
        detail: format!(
            "{bad} violations over {checked} prefix pairs ({} strict extensions) from {qualifying} qualifying prefixes, 50 graphs n <= 20",
            checked - qualifying
        ),
    }
}

fn criterion_7() -> Line {
    let mut bad = 0;
    for seed in 0..100 {
        let (a, m) = balanced_sequence(seed);
        match balanced_index(&a, m) {
            Ok(j) if balanced_ok(&a, m, j) => {}
            _ => bad += 1,
        }
    }
    Line {
        id: 7,
        name: "balanced index",
        pass: bad == 0,
        detail: format!("{bad} violations over 100 sequences"),
    }
}

fn criterion_8() -> (Line, String) {
    let g = generate(&spec("er:n=512,p=0.5"), 0).unwrap();
    let p = edge_concentration_probe(&g, 8, 0, 100, false).unwrap();
    let line = Line {
        id: 8,
        name: "edge concentration",
        pass: p.within_bound >= CONCENTRATION_NEEDED,
        detail: format!(
            "{}/100 trials within 24m/64 = {:.0} (need {CONCENTRATION_NEEDED}), max {}; degree precondition {}",
            p.within_bound,
            p.bound,
            p.max,
            if p.precondition_holds { "holds" } else { "does not hold at this size" }
        ),
    };
    (line, serde_json::to_string(&p).unwrap())
}

fn criterion_9(bw: &Bandwidth) -> Line {
    Line {
        id: 9,
        name: "bandwidth discipline",
        pass: bw.bad_channel == 0 && bw.bad_routing == 0 && bw.runs > 0,
        detail: format!(
            "{} runs: {} with channel load > 1, {} with routing load violations",
            bw.runs, bw.bad_channel, bw.bad_routing
        ),
    }
}

/// Least-squares slope of log y against log x.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1.0).ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn criterion_10() -> Line {
    let start = Instant::now();
    let sizes = [128usize, 256, 512, 1024];
    let mut medians = Vec::new();
    let mut exact = true;
    for &n in &sizes {
        let mut rounds = Vec::new();
        for seed in 0..5u64 {
            let g = generate(
                &GeneratorSpec::ErdosRenyi {
                    n,
                    p: 8.0 / n as f64,
                    drop_isolated: false,
                },
                seed,
            )
            .unwrap();
            let (t, tr) = enumerate_general(&g, &GeneralConfig::new(0.5, seed)).unwrap();
            exact &= t.triangles() == brute_force_triangles(&g).unwrap().triangles();
            rounds.push(tr.rounds);
        }
        rounds.sort_unstable();
        medians.push(rounds[2] as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &medians);
    let took = start.elapsed();
    Line {
        id: 10,
        name: "scaling envelope",
        pass: slope <= SCALING_EXPONENT && exact && took <= SCALING_LIMIT,
        detail: format!(
            "median rounds {:?} for n = {sizes:?}, fitted exponent {slope:.3} (limit {SCALING_EXPONENT}), {}",
            medians,
            secs(took)
        ),
    }
}

fn report_bytes() -> Vec<String> {
    let runs = [
        (Mode::Triangles, "er:n=200,p=0.2", None),
        (Mode::Decompose, "hypercube:d=9", None),
        (Mode::Nibble, "planted:block=64,p=0.3,cross=4", None),
        (Mode::Subgraphs, "er:n=40,p=0.5", Some("clique:4")),
        (Mode::Probe, "er:n=512,p=0.5", Some("q=8,trials=20")),
    ];
    runs.iter()
        .map(|(mode, g, args)| {
            let cfg = ExperimentConfig {
                mode_args: args.map(String::from),
                force_partition: *mode == Mode::Subgraphs,
                ..ExperimentConfig::new(*mode, Some(GraphSource::Gen(g.to_string())), 3)
            };
            run_experiment(&cfg).unwrap().to_json()
        })
        .collect()
}

fn criterion_11(tri: &[String], nibble_sides: &[Option<Vec<usize>>], probe: &str) -> Line {
    let mut scratch = Bandwidth::default();
    let (_, _, _, tri_again) = triangle_runs(&mut scratch);
    let (_, sides_again) = criterion_4(&mut scratch, nibble_sides.len() as u64);
    let (_, probe_again) = criterion_8();
    let first = report_bytes();
    let second = report_bytes();
    let same_reports = first.iter().zip(&second).filter(|(a, b)| a == b).count();
    let pass = tri == tri_again && nibble_sides == sides_again && probe == probe_again && same_reports == first.len();
    Line {
        id: 11,
        name: "determinism",
        pass,
        detail: format!(
            "criteria 1, 4, 8 rerun identical: {}, {}, {}; {same_reports}/{} CLI reports byte-identical",
            tri == tri_again,
            nibble_sides == sides_again,
            probe == probe_again,
            first.len()
        ),
    }
}

fn main() {
    let mut lines = Vec::new();
    let mut bw = Bandwidth::default();
    let emit = |l: &Line| {
        println!("criterion {:>2} {:<32} {}  {}", l.id, l.name, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    };

    let (l1, tri) = criterion_1(&mut bw);
    emit(&l1);
    lines.push(l1);
    let (l2, l3) = criteria_2_3(&mut bw);
    emit(&l2);
    emit(&l3);
    lines.push(l2);
    lines.push(l3);
    let (l4, sides) = criterion_4(&mut bw, 50);
    emit(&l4);
    lines.push(l4);
    for l in [criterion_5(), criterion_6(), criterion_7()] {
        emit(&l);
        lines.push(l);
    }
    let (l8, probe) = criterion_8();
    emit(&l8);
    lines.push(l8);
    let l9 = criterion_9(&bw);
    emit(&l9);
    lines.push(l9);
    let l10 = criterion_10();
    emit(&l10);
    lines.push(l10);
    let l11 = criterion_11(&tri, &sides[..10], &probe);
    emit(&l11);
    lines.push(l11);

    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("acceptance: {}/{} criteria pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
