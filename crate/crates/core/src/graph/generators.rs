use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError};
use crate::rng::seeded;

/// Test-graph families. Parsed from and printed as `name:key=value,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// G(n, p); with `drop_isolated`, isolated vertices are removed and ids compacted.
    ErdosRenyi { n: usize, p: f64, drop_isolated: bool },
    /// Two copies of K_k; bridge i joins `k-1-i` to `k+i`.
    Barbell { k: usize, bridges: usize },
    Hypercube { d: usize },
    /// Two independent G(block, p) blocks on `0..block` and `block..2*block`
    /// plus exactly `cross_edges` distinct uniform cross pairs.
    PlantedCut { block: usize, p: f64, cross_edges: usize },
    Clique { n: usize },
    Cycle { n: usize },
    Path { n: usize },
    /// K_{1,leaves} with the center at vertex 0.
    Star { leaves: usize },
    /// `blobs` cliques of `size` vertices strung along a path, consecutive
    /// cliques joined by one edge.
    CliqueChain { blobs: usize, size: usize },
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Graph, GraphError> {
    use GeneratorSpec::*;
    let bad = |msg: &str| Err(GraphError::InvalidGenerator(msg.to_string()));
    match *spec {
        ErdosRenyi { n, p, drop_isolated } => {
            if !(0.0..=1.0).contains(&p) {
                return bad("p must lie in [0, 1]");
            }
            let mut rng = seeded(seed, 0x6572);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            if !drop_isolated {
                return Graph::from_edges(n, edges);
            }
            let mut used = vec![false; n];
            for &(u, v) in &edges {
                used[u] = true;
                used[v] = true;
            }
            let mut relabel = vec![usize::MAX; n];
            let mut next = 0;
            for v in 0..n {
                if used[v] {
                    relabel[v] = next;
                    next += 1;
                }
            }
            Graph::from_edges(
                next,
                edges.into_iter().map(|(u, v)| (relabel[u], relabel[v])),
            )
        }
        Barbell { k, bridges } => {
            if k < 2 || bridges == 0 || bridges > k {
                return bad("barbell needs k >= 2 and 1 <= bridges <= k");
            }
            let mut edges = clique_edges(0, k);
            edges.extend(clique_edges(k, k));
            edges.extend((0..bridges).map(|i| (k - 1 - i, k + i)));
            Graph::from_edges(2 * k, edges)
        }
        Hypercube { d } => {
            if d > 20 {
                return bad("hypercube dimension above 20");
            }
            let n = 1usize << d;
            let edges = (0..n).flat_map(|u| {
                (0..d)
                    .map(move |b| (u, u ^ (1 << b)))
                    .filter(|&(u, v)| u < v)
            });
            Graph::from_edges(n, edges)
        }
        PlantedCut { block, p, cross_edges } => {
            if !(0.0..=1.0).contains(&p) || block == 0 {
                return bad("planted cut needs block >= 1 and p in [0, 1]");
            }
            if cross_edges > block * block {
                return bad("more cross edges than cross pairs");
            }
            let mut rng = seeded(seed, 0x706c);
            let mut edges = Vec::new();
            for off in [0, block] {
                for u in 0..block {
                    for v in u + 1..block {
                        if rng.gen::<f64>() < p {
                            edges.push((off + u, off + v));
                        }
                    }
                }
            }
            let mut cross = HashSet::new();
            while cross.len() < cross_edges {
                let u = rng.gen_range(0..block);
                let v = block + rng.gen_range(0..block);
                if cross.insert((u, v)) {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(2 * block, edges)
        }
        Clique { n } => Graph::from_edges(n, clique_edges(0, n)),
        Cycle { n } => {
            if n < 3 {
                return bad("cycle needs n >= 3");
            }
            Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        Path { n } => Graph::from_edges(n, (1..n).map(|i| (i - 1, i))),
        Star { leaves } => Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))),
        CliqueChain { blobs, size } => {
            if blobs == 0 || size == 0 {
                return bad("clique chain needs blobs >= 1 and size >= 1");
            }
            let mut edges = Vec::new();
            for b in 0..blobs {
                edges.extend(clique_edges(b * size, size));
                if b + 1 < blobs {
                    edges.push((b * size + size - 1, (b + 1) * size));
                }
            }
            Graph::from_edges(blobs * size, edges)
        }
    }
}

fn clique_edges(offset: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for u in 0..k {
        for v in u + 1..k {
            out.push((offset + u, offset + v));
        }
    }
    out
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratorSpec::*;
        match self {
            ErdosRenyi { n, p, drop_isolated } => {
                write!(f, "er:n={n},p={p}")?;
                if *drop_isolated {
                    write!(f, ",drop_isolated=1")?;
                }
                Ok(())
            }
            Barbell { k, bridges } => write!(f, "barbell:k={k},bridges={bridges}"),
            Hypercube { d } => write!(f, "hypercube:d={d}"),
            PlantedCut { block, p, cross_edges } => {
                write!(f, "planted:block={block},p={p},cross={cross_edges}")
            }
            Clique { n } => write!(f, "clique:n={n}"),
            Cycle { n } => write!(f, "cycle:n={n}"),
            Path { n } => write!(f, "path:n={n}"),
            Star { leaves } => write!(f, "star:n={leaves}"),
            CliqueChain { blobs, size } => write!(f, "chain:blobs={blobs},size={size}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| GraphError::InvalidGenerator(msg);
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let int = |key: &str| -> Result<usize, GraphError> {
            kv.get(key)
                .ok_or_else(|| bad(format!("{family}: missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("{family}: {key} is not an integer")))
        };
        let float = |key: &str| -> Result<f64, GraphError> {
            kv.get(key)
                .ok_or_else(|| bad(format!("{family}: missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("{family}: {key} is not a number")))
        };
        let flag = |key: &str| kv.get(key).is_some_and(|v| v == "1" || v == "true");
        use GeneratorSpec::*;
        Ok(match family.trim() {
            "er" => ErdosRenyi {
                n: int("n")?,
                p: float("p")?,
                drop_isolated: flag("drop_isolated"),
            },
            "barbell" => Barbell {
                k: int("k")?,
                bridges: kv.get("bridges").map_or(Ok(1), |_| int("bridges"))?,
            },
            "hypercube" => Hypercube { d: int("d")? },
            "planted" => PlantedCut {
                block: int("block")?,
                p: float("p")?,
                cross_edges: int("cross")?,
            },
            "clique" => Clique { n: int("n")? },
            "cycle" => Cycle { n: int("n")? },
            "path" => Path { n: int("n")? },
            "star" => Star { leaves: int("n")? },
            "chain" => CliqueChain {
                blobs: int("blobs")?,
                size: int("size")?,
            },
            other => return Err(bad(format!("unknown generator family {other:?}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_families() {
        let k4 = generate(&GeneratorSpec::Clique { n: 4 }, 0).unwrap();
        assert_eq!((k4.n(), k4.m()), (4, 6));
        let h = generate(&GeneratorSpec::Hypercube { d: 3 }, 0).unwrap();
        assert_eq!((h.n(), h.m()), (8, 12));
        assert!((0..8).all(|v| h.degree(v) == 3));
        let s = generate(&GeneratorSpec::Star { leaves: 4 }, 0).unwrap();
        assert_eq!(s.degree(0), 4);
        let chain = generate(&GeneratorSpec::CliqueChain { blobs: 3, size: 4 }, 0).unwrap();
        assert_eq!(chain.m(), 3 * 6 + 2);
        assert_eq!(chain.diameter(), 2 * 3 - 1);
    }

    #[test]
    fn er_edge_count_in_six_sigma_window() {
        let g = generate(
            &GeneratorSpec::ErdosRenyi { n: 100, p: 0.3, drop_isolated: false },
            1,
        )
        .unwrap();
        let pairs = 100.0 * 99.0 / 2.0;
        let mean = pairs * 0.3;
        let sigma = (pairs * 0.3 * 0.7f64).sqrt();
        let m = g.m() as f64;
        assert!((mean - 6.0 * sigma..=mean + 6.0 * sigma).contains(&m));
        assert!((1044..=1926).contains(&g.m()));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec: GeneratorSpec = "er:n=60,p=0.2".parse().unwrap();
        assert_eq!(generate(&spec, 5).unwrap(), generate(&spec, 5).unwrap());
        assert_ne!(generate(&spec, 5).unwrap(), generate(&spec, 6).unwrap());
    }

    #[test]
    fn planted_cut_has_exact_cross_count() {
        let g = generate(
            &GeneratorSpec::PlantedCut { block: 64, p: 0.3, cross_edges: 4 },
            9,
        )
        .unwrap();
        let cross = g.edges().iter().filter(|e| (e.0 < 64) != (e.1 < 64)).count();
        assert_eq!(cross, 4);
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "er:n=512,p=0.25",
            "er:n=10,p=0.5,drop_isolated=1",
            "barbell:k=16,bridges=1",
            "hypercube:d=9",
            "planted:block=64,p=0.3,cross=4",
            "clique:n=4",
            "cycle:n=5",
            "path:n=1000",
            "star:n=4",
            "chain:blobs=10,size=5",
        ] {
            let spec: GeneratorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("er:n=5".parse::<GeneratorSpec>().is_err());
        assert!("blob:n=5".parse::<GeneratorSpec>().is_err());
    }
}
