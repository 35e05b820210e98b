//! Seeded synthetic multiplexes with planted shared and layer-specific
//! communities.
//!
//! Every scenario follows the same recipe: sample `N` and the community
//! node sets, decide per layer which structure each community has there,
//! draw the planted edges, then add background noise between every pair of
//! nodes that is not inside the same planted community of that layer.
//!
//! | scenario | L | N | pattern |
//! |---|---|---|---|
//! | S1 | 3 | 30..=90 | each community lives in a random non-empty subset of layers |
//! | S2 | 3 | 60..=80 | shared by all layers, split into 2-3 dense pieces in two layers |
//! | S3 | 3 | 60..=80 | shared by all layers, two communities weakened and blurred in one layer |
//! | S4 | 3 | 80 | two communities re-partitioned into bipartite groups in one layer |
//! | S5 | 4 | 150..=180 | per-community mixture of the above, at most 3 layers each |

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{collect_grid, Partition};
use crate::error::{LartError, Result};
use crate::multiplex::{Multiplex, MultiplexBuilder};

pub const MIN_COMMUNITY_SIZE: usize = 8;
pub const BIPARTITE_EDGE_PROBABILITY: f64 = 0.4;
const WEAK_RANGE: (f64, f64) = (0.10, 0.20);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::S1,
        Scenario::S2,
        Scenario::S3,
        Scenario::S4,
        Scenario::S5,
    ];

    pub fn num_layers(self) -> usize {
        match self {
            Scenario::S5 => 4,
            _ => 3,
        }
    }

    /// Inclusive range `N` is drawn from.
    pub fn node_range(self) -> (usize, usize) {
        match self {
            Scenario::S1 => (30, 90),
            Scenario::S2 | Scenario::S3 => (60, 80),
            Scenario::S4 => (80, 80),
            Scenario::S5 => (150, 180),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
            Scenario::S3 => "s3",
            Scenario::S4 => "s4",
            Scenario::S5 => "s5",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = LartError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            "s3" => Ok(Scenario::S3),
            "s4" => Ok(Scenario::S4),
            "s5" => Ok(Scenario::S5),
            _ => Err(LartError::InvalidArgument(format!(
                "unknown scenario `{s}` (expected s1..s5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Range the within-community edge probability is drawn from.
    pub p_in: (f64, f64),
    /// Probability of a background edge between nodes not in the same
    /// planted community of a layer.
    pub p_noise: f64,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        ScenarioConfig {
            scenario,
            seed,
            p_in: (0.25, 0.40),
            p_noise: 0.05,
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.p_in;
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !(unit(lo) && unit(hi) && lo <= hi && unit(self.p_noise)) {
            return Err(LartError::InvalidArgument(format!(
                "probabilities must lie in [0, 1] with p_in low <= high (p_in = {:?}, p_noise = {})",
                self.p_in, self.p_noise
            )));
        }
        Ok(())
    }
}

/// Planted community of every node-layer, `None` for background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    num_nodes: usize,
    num_layers: usize,
    labels: Vec<Option<usize>>,
}

impl GroundTruth {
    pub fn new(num_nodes: usize, num_layers: usize, labels: Vec<Option<usize>>) -> Result<Self> {
        if labels.len() != num_nodes * num_layers {
            return Err(LartError::DimensionMismatch(format!(
                "{} truth labels for N = {num_nodes}, L = {num_layers}",
                labels.len()
            )));
        }
        Ok(GroundTruth {
            num_nodes,
            num_layers,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// Flat (layer-major) labels.
    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label(&self, node: usize, layer: usize) -> Option<usize> {
        self.labels[layer * self.num_nodes + node]
    }

    pub fn num_background(&self) -> usize {
        self.labels.iter().filter(|g| g.is_none()).count()
    }

    /// Partition for scoring: every background node-layer becomes its own
    /// singleton community.
    pub fn to_partition(&self) -> Partition {
        let offset = self.labels.iter().flatten().max().map_or(0, |m| m + 1);
        let labels: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(x, g)| g.unwrap_or(offset + x))
            .collect();
        Partition::from_labels(self.num_nodes, self.num_layers, &labels)
            .expect("truth labels sized at construction")
    }

    /// `<layer> <node> <label>` per node-layer, `-1` for background.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 10);
        for (x, g) in self.labels.iter().enumerate() {
            let (layer, node) = (x / self.num_nodes, x % self.num_nodes);
            match g {
                Some(g) => writeln!(out, "{layer} {node} {g}"),
                None => writeln!(out, "{layer} {node} -1"),
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(LartError::parse(
                    origin,
                    line_no,
                    format!("expected `<layer> <node> <label>`, got `{line}`"),
                ));
            }
            let index = |f: &str| {
                f.parse::<usize>()
                    .map_err(|_| LartError::parse(origin, line_no, format!("not an index: `{f}`")))
            };
            let layer = index(fields[0])?;
            let node = index(fields[1])?;
            let label = match fields[2].parse::<i64>() {
                Ok(-1) => None,
                Ok(g) if g >= 0 => Some(g as usize),
                _ => {
                    return Err(LartError::parse(
                        origin,
                        line_no,
                        format!("label must be -1 or a non-negative integer, got `{}`", fields[2]),
                    ))
                }
            };
            entries.push((line_no, layer, node, label));
        }
        let (layers, nodes, labels) = collect_grid(&entries, origin, last_line)?;
        GroundTruth::new(nodes, layers, labels)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LartError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| LartError::io(path, e))
    }
}

/// How one planted community is laid out in one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LayerStructure {
    /// Erdős-Rényi inside each piece; no planted edges between pieces.
    Dense { pieces: Vec<Vec<usize>>, p: Vec<f64> },
    /// Edges only between the two halves.
    Bipartite {
        left: Vec<usize>,
        right: Vec<usize>,
        p: f64,
    },
}

/// A community as planted in a single layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBlock {
    pub layer: usize,
    pub label: usize,
    pub structure: LayerStructure,
}

/// Extra edges drawn between two planted communities of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossNoise {
    pub layer: usize,
    pub labels: (usize, usize),
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityRecord {
    pub label: usize,
    pub size: usize,
    pub layers: Vec<usize>,
    pub pattern: String,
}

/// Everything needed to audit a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub seed: u64,
    pub num_nodes: usize,
    pub num_layers: usize,
    pub p_in: (f64, f64),
    pub p_noise: f64,
    /// Node-layers without a planted community, per layer.
    pub background: Vec<usize>,
    pub communities: Vec<CommunityRecord>,
    pub blocks: Vec<PlantedBlock>,
    pub cross_noise: Vec<CrossNoise>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub multiplex: Multiplex,
    pub truth: GroundTruth,
    pub manifest: Manifest,
}

/// Generates one instance. Identical configs give identical instances.
pub fn generate(cfg: &ScenarioConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scenario = cfg.scenario;
    let (lo, hi) = scenario.node_range();
    let n = rng.gen_range(lo..=hi);
    let layers = scenario.num_layers();

    let communities = loop {
        let sets = sample_communities(n, &mut rng);
        if sets.iter().all(|c| c.len() >= MIN_COMMUNITY_SIZE) {
            break sets;
        }
    };

    let mut plan = Plan::new(n, layers, communities.len());
    match scenario {
        Scenario::S1 => {
            let all: Vec<usize> = (0..layers).collect();
            for (label, nodes) in communities.iter().enumerate() {
                let p = draw(cfg.p_in, &mut rng);
                let subset = nonempty_subset(&all, layers, &mut rng);
                for &k in &subset {
                    plan.dense(k, label, nodes.clone(), p);
                }
                plan.record(label, nodes.len(), subset, "layer subset");
            }
        }
        Scenario::S2 => {
            for (label, nodes) in communities.iter().enumerate() {
                let split_layers = choose(&(0..layers).collect::<Vec<_>>(), 2, &mut rng);
                for k in 0..layers {
                    if split_layers.contains(&k) {
                        plan.split(k, label, nodes, cfg.p_in, &mut rng);
                    } else {
                        plan.dense(k, label, nodes.clone(), draw(cfg.p_in, &mut rng));
                    }
                }
                plan.record(label, nodes.len(), (0..layers).collect(), "split in two layers");
            }
        }
        Scenario::S3 => {
            let ps: Vec<f64> = communities.iter().map(|_| draw(cfg.p_in, &mut rng)).collect();
            let pair = choose(&(0..communities.len()).collect::<Vec<_>>(), 2, &mut rng);
            let blurred = rng.gen_range(0..layers);
            for (label, nodes) in communities.iter().enumerate() {
                for k in 0..layers {
                    let p = if k == blurred && pair.contains(&label) {
                        draw(WEAK_RANGE, &mut rng)
                    } else {
                        ps[label]
                    };
                    plan.dense(k, label, nodes.clone(), p);
                }
                let pattern = if pair.contains(&label) {
                    "shared, weakened and blurred in one layer"
                } else {
                    "shared"
                };
                plan.record(label, nodes.len(), (0..layers).collect(), pattern);
            }
            plan.cross_noise(blurred, (pair[0], pair[1]), draw(WEAK_RANGE, &mut rng));
        }
        Scenario::S4 => {
            let special = rng.gen_range(0..layers);
            let pair = choose(&(0..communities.len()).collect::<Vec<_>>(), 2, &mut rng);
            for (label, nodes) in communities.iter().enumerate() {
                let p = draw(cfg.p_in, &mut rng);
                let layer_set: Vec<usize> = (0..layers)
                    .filter(|&k| k != special || !pair.contains(&label))
                    .collect();
                for &k in &layer_set {
                    plan.dense(k, label, nodes.clone(), p);
                }
                let pattern = if pair.contains(&label) { "shared by two layers" } else { "shared" };
                plan.record(label, nodes.len(), layer_set, pattern);
            }
            let union: Vec<usize> = pair.iter().flat_map(|&c| communities[c].clone()).collect();
            plan.regroup_bipartite(special, union, &mut rng);
        }
        Scenario::S5 => plan_mixture(&mut plan, &communities, cfg, &mut rng),
    }

    let multiplex = plan.draw_edges(cfg.p_noise, &mut rng)?;
    let truth = GroundTruth::new(n, layers, plan.truth.clone())?;
    let background = (0..layers)
        .map(|k| plan.truth[k * n..(k + 1) * n].iter().filter(|g| g.is_none()).count())
        .collect();
    let manifest = Manifest {
        scenario,
        seed: cfg.seed,
        num_nodes: n,
        num_layers: layers,
        p_in: cfg.p_in,
        p_noise: cfg.p_noise,
        background,
        communities: plan.records,
        blocks: plan.blocks,
        cross_noise: plan.cross,
    };
    Ok(Instance {
        multiplex,
        truth,
        manifest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Subset,
    Split,
    Blurred,
    Regrouped,
}

/// S5: each community picks one of the four patterns; at most three of the
/// four layers carry any community.
fn plan_mixture(plan: &mut Plan, communities: &[Vec<usize>], cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
    let layers = plan.layers;
    let all: Vec<usize> = (0..layers).collect();
    let styles: Vec<Style> = communities
        .iter()
        .map(|_| [Style::Subset, Style::Split, Style::Blurred, Style::Regrouped][rng.gen_range(0..4)])
        .collect();

    // regrouping needs two communities; an odd one out falls back to a subset
    let regrouped: Vec<usize> = (0..communities.len())
        .filter(|&c| styles[c] == Style::Regrouped)
        .collect();
    let paired = regrouped.len() / 2 * 2;

    let mut blurred = Vec::new();
    for (label, nodes) in communities.iter().enumerate() {
        let p = draw(cfg.p_in, rng);
        match styles[label] {
            Style::Regrouped if regrouped[..paired].contains(&label) => {}
            Style::Subset | Style::Regrouped => {
                let subset = nonempty_subset(&all, 3, rng);
                for &k in &subset {
                    plan.dense(k, label, nodes.clone(), p);
                }
                let pattern = if styles[label] == Style::Subset {
                    "layer subset"
                } else {
                    "layer subset (unpaired regroup)"
                };
                plan.record(label, nodes.len(), subset, pattern);
            }
            Style::Split => {
                let subset = choose(&all, 3, rng);
                let split = choose(&subset, 2, rng);
                for &k in &subset {
                    if split.contains(&k) {
                        plan.split(k, label, nodes, cfg.p_in, rng);
                    } else {
                        plan.dense(k, label, nodes.clone(), p);
                    }
                }
                plan.record(label, nodes.len(), subset, "split in two layers");
            }
            Style::Blurred => {
                let subset = choose(&all, 3, rng);
                let weak = subset[rng.gen_range(0..subset.len())];
                for &k in &subset {
                    let pk = if k == weak { draw(WEAK_RANGE, rng) } else { p };
                    plan.dense(k, label, nodes.clone(), pk);
                }
                blurred.push((label, weak));
                plan.record(label, nodes.len(), subset, "weakened and blurred in one layer");
            }
        }
    }

    for pair in regrouped[..paired].chunks_exact(2) {
        let subset = choose(&all, 3, rng);
        let special = subset[rng.gen_range(0..subset.len())];
        for &label in pair {
            let p = draw(cfg.p_in, rng);
            let dense_layers: Vec<usize> = subset.iter().copied().filter(|&k| k != special).collect();
            for &k in &dense_layers {
                plan.dense(k, label, communities[label].clone(), p);
            }
            plan.record(label, communities[label].len(), dense_layers, "regrouped in one layer");
        }
        let union: Vec<usize> = pair.iter().flat_map(|&c| communities[c].clone()).collect();
        plan.regroup_bipartite(special, union, rng);
    }

    // blur each weakened community into another community of the same layer
    for (label, layer) in blurred {
        let partners: BTreeSet<usize> = plan
            .blocks
            .iter()
            .filter(|b| b.layer == layer && b.label != label)
            .map(|b| b.label)
            .collect();
        let partners: Vec<usize> = partners.into_iter().collect();
        if partners.is_empty() {
            continue;
        }
        let partner = partners[rng.gen_range(0..partners.len())];
        let q = draw(WEAK_RANGE, rng);
        plan.cross_noise(layer, (label, partner), q);
    }
    plan.records.sort_by_key(|r| r.label);
}

struct Plan {
    n: usize,
    layers: usize,
    next_label: usize,
    truth: Vec<Option<usize>>,
    blocks: Vec<PlantedBlock>,
    cross: Vec<CrossNoise>,
    records: Vec<CommunityRecord>,
}

impl Plan {
    fn new(n: usize, layers: usize, num_communities: usize) -> Self {
        Plan {
            n,
            layers,
            next_label: num_communities,
            truth: vec![None; n * layers],
            blocks: Vec::new(),
            cross: Vec::new(),
            records: Vec::new(),
        }
    }

    fn assign(&mut self, layer: usize, label: usize, nodes: &[usize]) {
        for &v in nodes {
            self.truth[layer * self.n + v] = Some(label);
        }
    }

    fn dense(&mut self, layer: usize, label: usize, nodes: Vec<usize>, p: f64) {
        self.assign(layer, label, &nodes);
        self.blocks.push(PlantedBlock {
            layer,
            label,
            structure: LayerStructure::Dense {
                pieces: vec![nodes],
                p: vec![p],
            },
        });
    }

    /// Splits `nodes` into 2 or 3 disjoint pieces, each with its own density.
    fn split(&mut self, layer: usize, label: usize, nodes: &[usize], p_in: (f64, f64), rng: &mut ChaCha8Rng) {
        let parts = rng.gen_range(2..=3).min(nodes.len() / 2).max(1);
        let mut shuffled = nodes.to_vec();
        shuffled.shuffle(rng);
        let pieces = chunk_evenly(&shuffled, parts);
        let p = pieces.iter().map(|_| draw(p_in, rng)).collect();
        self.assign(layer, label, nodes);
        self.blocks.push(PlantedBlock {
            layer,
            label,
            structure: LayerStructure::Dense { pieces, p },
        });
    }

    /// Re-partitions `union` in `layer` into two fresh communities, each a
    /// random bipartite graph between its two halves.
    fn regroup_bipartite(&mut self, layer: usize, mut union: Vec<usize>, rng: &mut ChaCha8Rng) {
        union.shuffle(rng);
        for group in chunk_evenly(&union, 2) {
            let label = self.next_label;
            self.next_label += 1;
            let halves = chunk_evenly(&group, 2);
            self.assign(layer, label, &group);
            self.blocks.push(PlantedBlock {
                layer,
                label,
                structure: LayerStructure::Bipartite {
                    left: halves[0].clone(),
                    right: halves[1].clone(),
                    p: BIPARTITE_EDGE_PROBABILITY,
                },
            });
            self.record(label, group.len(), vec![layer], "bipartite, single layer");
        }
    }

    fn cross_noise(&mut self, layer: usize, labels: (usize, usize), p: f64) {
        self.cross.push(CrossNoise { layer, labels, p });
    }

    fn record(&mut self, label: usize, size: usize, mut layers: Vec<usize>, pattern: &str) {
        layers.sort_unstable();
        self.records.push(CommunityRecord {
            label,
            size,
            layers,
            pattern: pattern.into(),
        });
    }

    fn draw_edges(&self, p_noise: f64, rng: &mut ChaCha8Rng) -> Result<Multiplex> {
        let n = self.n;
        let mut builder = MultiplexBuilder::new(n, self.layers)?;
        // planted probability between u and v, per layer
        let mut planted = vec![0.0f64; n * n];
        let mut extra = vec![0.0f64; n * n];
        for k in 0..self.layers {
            planted.fill(0.0);
            extra.fill(0.0);
            for block in self.blocks.iter().filter(|b| b.layer == k) {
                match &block.structure {
                    LayerStructure::Dense { pieces, p } => {
                        for (piece, &p) in pieces.iter().zip(p) {
                            for &u in piece {
                                for &v in piece {
                                    planted[u * n + v] = p;
                                }
                            }
                        }
                    }
                    LayerStructure::Bipartite { left, right, p } => {
                        for &u in left {
                            for &v in right {
                                planted[u * n + v] = *p;
                                planted[v * n + u] = *p;
                            }
                        }
                    }
                }
            }
            for c in self.cross.iter().filter(|c| c.layer == k) {
                for (a, b) in [(c.labels.0, c.labels.1), (c.labels.1, c.labels.0)] {
                    for u in (0..n).filter(|&u| self.truth[k * n + u] == Some(a)) {
                        for v in (0..n).filter(|&v| self.truth[k * n + v] == Some(b)) {
                            extra[u * n + v] = c.p;
                        }
                    }
                }
            }
            let truth = &self.truth[k * n..(k + 1) * n];
            for u in 0..n {
                for v in u + 1..n {
                    let same = truth[u].is_some() && truth[u] == truth[v];
                    let p = if same {
                        planted[u * n + v]
                    } else {
                        1.0 - (1.0 - p_noise) * (1.0 - extra[u * n + v])
                    };
                    if rng.gen::<f64>() < p {
                        builder.add_edge(k, u, v)?;
                    }
                }
            }
        }
        Ok(builder.build())
    }
}

/// Near-equal community sizes, `max(2, N / 15)` communities over shuffled nodes.
fn sample_communities(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let count = (n / 15).max(2);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    let mut sizes = vec![n / count; count];
    let mut bumped: Vec<usize> = (0..count).collect();
    bumped.shuffle(rng);
    for &c in &bumped[..n % count] {
        sizes[c] += 1;
    }
    let mut out = Vec::with_capacity(count);
    let mut start = 0;
    for size in sizes {
        let mut members = nodes[start..start + size].to_vec();
        members.sort_unstable();
        out.push(members);
        start += size;
    }
    out
}

fn chunk_evenly(items: &[usize], parts: usize) -> Vec<Vec<usize>> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        let mut piece = items[start..start + len].to_vec();
        piece.sort_unstable();
        out.push(piece);
        start += len;
    }
    out
}

fn draw((lo, hi): (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn choose(items: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut picked: Vec<usize> = items.choose_multiple(rng, count).copied().collect();
    picked.sort_unstable();
    picked
}

/// Uniform non-empty subset of `items` with at most `max_size` elements.
fn nonempty_subset(items: &[usize], max_size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let masks: Vec<u32> = (1u32..(1 << items.len()))
        .filter(|m| m.count_ones() as usize <= max_size)
        .collect();
    let mask = masks[rng.gen_range(0..masks.len())];
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &k)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(s: Scenario, seed: u64) -> Instance {
        generate(&ScenarioConfig::new(s, seed)).unwrap()
    }

    /// Node sets of each label, per layer it appears in.
    fn label_sets(truth: &GroundTruth) -> std::collections::BTreeMap<usize, Vec<(usize, Vec<usize>)>> {
        let mut out = std::collections::BTreeMap::new();
        for k in 0..truth.num_layers() {
            let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for i in 0..truth.num_nodes() {
                if let Some(g) = truth.label(i, k) {
                    by_label.entry(g).or_default().push(i);
                }
            }
            for (g, nodes) in by_label {
                out.entry(g).or_insert_with(Vec::new).push((k, nodes));
            }
        }
        out
    }

    #[test]
    fn shapes_follow_the_scenario() {
        for s in Scenario::ALL {
            for seed in 0..5 {
                let inst = instance(s, seed);
                let (lo, hi) = s.node_range();
                let n = inst.multiplex.num_nodes();
                assert!((lo..=hi).contains(&n), "{s}: N = {n}");
                assert_eq!(inst.multiplex.num_layers(), s.num_layers());
                assert_eq!(inst.truth.num_nodes(), n);
                for r in &inst.manifest.communities {
                    assert!(r.size >= MIN_COMMUNITY_SIZE);
                }
            }
        }
    }

    #[test]
    fn community_node_sets_are_identical_across_their_layers() {
        for s in Scenario::ALL {
            for seed in 0..5 {
                let inst = instance(s, seed);
                for (g, per_layer) in label_sets(&inst.truth) {
                    let first = &per_layer[0].1;
                    for (_, nodes) in &per_layer {
                        assert_eq!(nodes, first, "{s} seed {seed} label {g}");
                    }
                    let record = inst.manifest.communities.iter().find(|r| r.label == g).unwrap();
                    let layers: Vec<usize> = per_layer.iter().map(|(k, _)| *k).collect();
                    assert_eq!(record.layers, layers);
                }
            }
        }
    }

    #[test]
    fn s5_communities_use_at_most_three_layers() {
        for seed in 0..10 {
            let inst = instance(Scenario::S5, seed);
            for r in &inst.manifest.communities {
                assert!(!r.layers.is_empty() && r.layers.len() <= 3);
            }
        }
    }

    #[test]
    fn s2_pieces_partition_the_community() {
        let inst = instance(Scenario::S2, 3);
        let mut split_layers = 0;
        for block in &inst.manifest.blocks {
            let LayerStructure::Dense { pieces, .. } = &block.structure else {
                panic!("S2 has no bipartite blocks");
            };
            let mut all: Vec<usize> = pieces.concat();
            all.sort_unstable();
            let expected: Vec<usize> = (0..inst.truth.num_nodes())
                .filter(|&i| inst.truth.label(i, block.layer) == Some(block.label))
                .collect();
            assert_eq!(all, expected);
            if pieces.len() > 1 {
                split_layers += 1;
                for (a, pa) in pieces.iter().enumerate() {
                    for pb in &pieces[a + 1..] {
                        for &u in pa {
                            for &v in pb {
                                assert!(!inst.multiplex.has_edge(block.layer, u, v));
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(split_layers, 2 * inst.manifest.communities.len());
    }

    #[test]
    fn s4_bipartite_halves_have_no_internal_edges() {
        for seed in 0..5 {
            let inst = instance(Scenario::S4, seed);
            let mut seen = 0;
            for block in &inst.manifest.blocks {
                if let LayerStructure::Bipartite { left, right, p } = &block.structure {
                    seen += 1;
                    assert_eq!(*p, 0.4);
                    for half in [left, right] {
                        for &u in half {
                            for &v in half {
                                assert!(!inst.multiplex.has_edge(block.layer, u, v));
                            }
                        }
                    }
                }
            }
            assert_eq!(seen, 2);
        }
    }

    #[test]
    fn s4_labels_differ_in_the_regrouped_layer() {
        let inst = instance(Scenario::S4, 11);
        let regrouped: Vec<&PlantedBlock> = inst
            .manifest
            .blocks
            .iter()
            .filter(|b| matches!(b.structure, LayerStructure::Bipartite { .. }))
            .collect();
        let layer = regrouped[0].layer;
        let other = (layer + 1) % 3;
        let n = inst.truth.num_nodes();
        for i in (0..n).filter(|&i| {
            regrouped
                .iter()
                .any(|b| inst.truth.label(i, layer) == Some(b.label))
        }) {
            assert_ne!(inst.truth.label(i, layer), inst.truth.label(i, other));
        }
    }

    #[test]
    fn planted_density_tracks_p_in() {
        for seed in 0..20 {
            let inst = instance(Scenario::S3, seed);
            let (mut edges_total, mut expected_total, mut pairs_total) = (0.0, 0.0, 0.0);
            for block in &inst.manifest.blocks {
                let LayerStructure::Dense { pieces, p } = &block.structure else { continue };
                for (piece, &p) in pieces.iter().zip(p) {
                    if piece.len() < 10 {
                        continue;
                    }
                    let mut edges = 0.0;
                    let mut pairs = 0.0;
                    for (a, &u) in piece.iter().enumerate() {
                        for &v in &piece[a + 1..] {
                            pairs += 1.0;
                            edges += inst.multiplex.has_edge(block.layer, u, v) as u8 as f64;
                        }
                    }
                    // a single block of 45-100 pairs spreads by up to ~0.07,
                    // so each one only gets a four-sigma binomial bound
                    let sigma = (p * (1.0 - p) / pairs).sqrt();
                    assert!((edges / pairs - p).abs() < 4.0 * sigma, "density {} vs {p}", edges / pairs);
                    edges_total += edges;
                    expected_total += p * pairs;
                    pairs_total += pairs;
                }
            }
            let pooled = (edges_total - expected_total) / pairs_total;
            assert!(pooled.abs() < 0.05, "seed {seed}: pooled density off by {pooled}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        for s in Scenario::ALL {
            let a = instance(s, 42);
            let b = instance(s, 42);
            assert_eq!(a.multiplex.to_text(), b.multiplex.to_text());
            assert_eq!(a.truth.to_text(), b.truth.to_text());
            assert_eq!(a.manifest.to_json().unwrap(), b.manifest.to_json().unwrap());
        }
        assert_ne!(instance(Scenario::S1, 1).multiplex, instance(Scenario::S1, 2).multiplex);
    }

    #[test]
    fn truth_round_trip_keeps_background() {
        let inst = instance(Scenario::S1, 5);
        let text = inst.truth.to_text();
        assert!(text.contains(" -1\n") || inst.truth.num_background() == 0);
        let back = GroundTruth::parse(&text, Path::new("<t>")).unwrap();
        assert_eq!(back, inst.truth);
    }

    #[test]
    fn truth_parse_errors() {
        let o = Path::new("<t>");
        assert!(GroundTruth::parse("0 0 1\n0 1 -1\n1 0 0\n", o).is_err()); // missing (1, 1)
        assert!(GroundTruth::parse("0 0 -2\n", o).is_err());
        assert!(GroundTruth::parse("0 0 1 2\n", o).is_err());
    }

    #[test]
    fn background_becomes_singletons() {
        let truth = GroundTruth::new(3, 1, vec![Some(0), None, None]).unwrap();
        let p = truth.to_partition();
        assert_eq!(p.num_communities(), 3);
    }

    #[test]
    fn scenario_names_parse() {
        assert_eq!("S3".parse::<Scenario>().unwrap(), Scenario::S3);
        assert_eq!("s5".parse::<Scenario>().unwrap(), Scenario::S5);
        assert!("s6".parse::<Scenario>().is_err());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut cfg = ScenarioConfig::new(Scenario::S1, 0);
        cfg.p_noise = 1.5;
        assert!(generate(&cfg).is_err());
    }
}
