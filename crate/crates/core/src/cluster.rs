//! Connectivity-constrained average-linkage clustering of node-layers and
//! selection of the output partition by multiplex modularity.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dissim::DissimilarityMatrix;
use crate::error::{LartError, Result};
use crate::multiplex::{Multiplex, NodeLayer};
use crate::supra::{Coupling, SupraAdjacency};
use crate::walk::{TransitionMatrix, TransitionPowers};

/// Community assignment of every node-layer, with ids `0..num_communities`.
///
/// Ids are canonical: communities are numbered in order of their first
/// member by flat (layer-major) index, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    num_nodes: usize,
    num_layers: usize,
    labels: Vec<usize>,
    num_communities: usize,
}

impl Partition {
    /// Builds a partition from arbitrary per-node-layer labels (flat order).
    pub fn from_labels(num_nodes: usize, num_layers: usize, labels: &[usize]) -> Result<Self> {
        if labels.len() != num_nodes * num_layers {
            return Err(LartError::DimensionMismatch(format!(
                "{} labels for N = {num_nodes}, L = {num_layers}",
                labels.len()
            )));
        }
        let mut remap = HashMap::new();
        let canonical: Vec<usize> = labels
            .iter()
            .map(|&g| {
                let next = remap.len();
                *remap.entry(g).or_insert(next)
            })
            .collect();
        Ok(Partition {
            num_nodes,
            num_layers,
            labels: canonical,
            num_communities: remap.len(),
        })
    }

    pub fn singletons(num_nodes: usize, num_layers: usize) -> Self {
        let size = num_nodes * num_layers;
        Partition {
            num_nodes,
            num_layers,
            labels: (0..size).collect(),
            num_communities: size,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    /// Labels in flat (layer-major) order.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, x: NodeLayer) -> usize {
        self.labels[x.flat(self.num_nodes)]
    }

    /// Members of each community, in flat order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (x, &g) in self.labels.iter().enumerate() {
            out[g].push(x);
        }
        out
    }

    /// Whether every community induces a connected subgraph of the raw
    /// supra-adjacency.
    pub fn communities_are_connected(&self, sa: &SupraAdjacency) -> bool {
        let raw = sa.raw();
        let mut seen = vec![false; self.labels.len()];
        let mut roots = vec![false; self.num_communities];
        for start in 0..self.labels.len() {
            if seen[start] {
                continue;
            }
            let g = self.labels[start];
            if roots[g] {
                // a second component of an already visited community
                return false;
            }
            roots[g] = true;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for (y, _) in raw.row(x) {
                    if !seen[y] && self.labels[y] == g {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        true
    }

    /// One line per node-layer: `<layer> <node> <community>`, flat order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 10);
        for (x, &g) in self.labels.iter().enumerate() {
            let nl = NodeLayer::from_flat(x, self.num_nodes);
            let _ = writeln!(out, "{} {} {}", nl.layer, nl.node, g);
        }
        out
    }

    /// Parses the `<layer> <node> <community>` format. The shape is taken
    /// from the largest indices seen, and every node-layer must appear once.
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
                    format!("expected `<layer> <node> <community>`, got `{line}`"),
                ));
            }
            let mut nums = [0usize; 3];
            for (slot, f) in nums.iter_mut().zip(&fields) {
                *slot = f.parse().map_err(|_| {
                    LartError::parse(origin, line_no, format!("not a non-negative integer: `{f}`"))
                })?;
            }
            entries.push((line_no, nums[0], nums[1], nums[2]));
        }
        let labels = collect_grid(&entries, origin, last_line)?;
        let (layers, nodes, labels) = labels;
        Partition::from_labels(nodes, layers, &labels)
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

/// Arranges `(line, layer, node, value)` entries into a full flat grid,
/// rejecting duplicates and gaps.
pub(crate) fn collect_grid<T: Copy>(
    entries: &[(usize, usize, usize, T)],
    origin: &Path,
    last_line: usize,
) -> Result<(usize, usize, Vec<T>)> {
    if entries.is_empty() {
        return Err(LartError::parse(origin, last_line, "no node-layer lines"));
    }
    let layers = entries.iter().map(|e| e.1).max().unwrap_or(0) + 1;
    let nodes = entries.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let mut grid: Vec<Option<T>> = vec![None; layers * nodes];
    for &(line, layer, node, value) in entries {
        let slot = &mut grid[layer * nodes + node];
        if slot.is_some() {
            return Err(LartError::parse(
                origin,
                line,
                format!("node {node} in layer {layer} listed twice"),
            ));
        }
        *slot = Some(value);
    }
    let mut out = Vec::with_capacity(grid.len());
    for (x, v) in grid.into_iter().enumerate() {
        match v {
            Some(v) => out.push(v),
            None => {
                let nl = NodeLayer::from_flat(x, nodes);
                return Err(LartError::parse(
                    origin,
                    last_line,
                    format!("missing line for node {} in layer {}", nl.node, nl.layer),
                ));
            }
        }
    }
    Ok((layers, nodes, out))
}

/// One agglomeration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Smaller id of the two merged clusters.
    pub a: usize,
    /// Larger id of the two merged clusters.
    pub b: usize,
    /// Average-linkage distance at the time of the merge.
    pub distance: f64,
    /// Id of the new cluster. Singletons are `0..NL`, merge `s` creates `NL + s`.
    pub id: usize,
    pub size: usize,
}

/// Merge history plus the multiplex modularity of every level.
///
/// Level 0 is the all-singletons partition; level `s` is the partition after
/// the first `s` merges. Merge distances are stored as computed and may be
/// non-monotone.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    num_nodes: usize,
    num_layers: usize,
    merges: Vec<Merge>,
    q_scores: Vec<f64>,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// `Q_M` per level, starting with the singletons level.
    pub fn q_scores(&self) -> &[f64] {
        &self.q_scores
    }

    pub fn num_levels(&self) -> usize {
        self.merges.len() + 1
    }

    /// Partitions after each merge, starting with all singletons.
    pub fn levels(&self) -> impl Iterator<Item = Partition> + '_ {
        let size = self.num_nodes * self.num_layers;
        let mut labels: Vec<usize> = (0..size).collect();
        let mut members: HashMap<usize, Vec<usize>> = (0..size).map(|x| (x, vec![x])).collect();
        let mut step = 0;
        std::iter::from_fn(move || {
            if step > self.merges.len() {
                return None;
            }
            if step > 0 {
                let m = self.merges[step - 1];
                let mut joined = members.remove(&m.a).unwrap_or_default();
                joined.extend(members.remove(&m.b).unwrap_or_default());
                for &x in &joined {
                    labels[x] = m.id;
                }
                members.insert(m.id, joined);
            }
            step += 1;
            Some(
                Partition::from_labels(self.num_nodes, self.num_layers, &labels)
                    .expect("labels sized from the dendrogram"),
            )
        })
    }

    pub fn level(&self, index: usize) -> Option<Partition> {
        self.levels().nth(index)
    }

    /// Index of the level with the largest `Q_M`. Ties go to the level with
    /// fewer communities, which is always the later one.
    pub fn best_level(&self) -> usize {
        let mut best = 0;
        for (idx, &q) in self.q_scores.iter().enumerate() {
            if q >= self.q_scores[best] {
                best = idx;
            }
        }
        best
    }

    /// The level with maximal `Q_M`, see [`Dendrogram::best_level`].
    pub fn select_partition(&self) -> Partition {
        self.level(self.best_level())
            .expect("a dendrogram always has the singletons level")
    }
}

/// Agglomerates node-layers by average linkage over `s`, merging only
/// clusters joined by at least one entry of the raw supra-adjacency.
///
/// Stops when no connected pair of clusters is left. Equal linkage
/// distances are broken by the smallest `(a, b)` cluster-id pair.
pub fn agglomerate(s: &DissimilarityMatrix, sa: &SupraAdjacency, gamma: f64) -> Result<Dendrogram> {
    let n = sa.size();
    if s.dim() != n {
        return Err(LartError::DimensionMismatch(format!(
            "dissimilarity is {0}x{0} but supra-adjacency is {n}x{n}",
            s.dim()
        )));
    }
    validate_gamma(gamma)?;

    // Cluster state lives in slots; a merged cluster keeps the lower slot.
    let mut active = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut sums = s.values().clone();
    let mut neighbors: Vec<BTreeSet<usize>> = (0..n)
        .map(|x| sa.raw().row(x).map(|(y, _)| y).filter(|&y| y != x).collect())
        .collect();

    let mut labels: Vec<usize> = (0..n).collect();
    let mut q_scores = vec![modularity_of_labels(&labels, sa, gamma)];
    let mut merges = Vec::new();

    loop {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for &b in neighbors[a].range(a + 1..) {
                let avg = sums.get(a, b) / (sizes[a] * sizes[b]) as f64;
                let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let better = match best {
                    None => true,
                    Some((d, ka, kb, _, _)) => avg < d || (avg == d && key < (ka, kb)),
                };
                if better {
                    best = Some((avg, key.0, key.1, a, b));
                }
            }
        }
        let Some((distance, id_a, id_b, keep, gone)) = best else {
            break;
        };

        let new_id = n + merges.len();
        for c in (0..n).filter(|&c| active[c] && c != keep && c != gone) {
            let v = sums.get(keep, c) + sums.get(gone, c);
            sums.set(keep, c, v);
            sums.set(c, keep, v);
        }
        let moved = std::mem::take(&mut neighbors[gone]);
        for c in moved {
            if c == keep {
                continue;
            }
            neighbors[c].remove(&gone);
            neighbors[c].insert(keep);
            neighbors[keep].insert(c);
        }
        neighbors[keep].remove(&gone);
        active[gone] = false;
        sizes[keep] += sizes[gone];
        ids[keep] = new_id;

        for g in labels.iter_mut() {
            if *g == id_a || *g == id_b {
                *g = new_id;
            }
        }
        q_scores.push(modularity_of_labels(&labels, sa, gamma));
        merges.push(Merge {
            a: id_a,
            b: id_b,
            distance,
            id: new_id,
            size: sizes[keep],
        });
    }

    Ok(Dendrogram {
        num_nodes: sa.num_nodes(),
        num_layers: sa.num_layers(),
        merges,
        q_scores,
    })
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(LartError::InvalidArgument(format!(
            "resolution gamma must be positive, got {gamma}"
        )))
    }
}

/// Multiplex modularity of `p` on the raw supra-adjacency.
///
/// Intra-layer terms use a configuration null model per layer scaled by
/// `gamma`; each inter-layer weight `ω_{i;sr}` counts in full when the two
/// replicas of node `i` share a community. `ε` plays no part. A layer with
/// no edges contributes no null term, and a multiplex with no edges and no
/// coupling has modularity 0.
pub fn multiplex_modularity(p: &Partition, sa: &SupraAdjacency, gamma: f64) -> Result<f64> {
    validate_gamma(gamma)?;
    if p.num_nodes() != sa.num_nodes() || p.num_layers() != sa.num_layers() {
        return Err(LartError::DimensionMismatch(format!(
            "partition is N = {}, L = {} but supra-adjacency is N = {}, L = {}",
            p.num_nodes(),
            p.num_layers(),
            sa.num_nodes(),
            sa.num_layers()
        )));
    }
    Ok(modularity_of_labels(p.labels(), sa, gamma))
}

fn modularity_of_labels(labels: &[usize], sa: &SupraAdjacency, gamma: f64) -> f64 {
    let n = sa.num_nodes();
    let raw = sa.raw();
    let mut two_mu = 0.0;
    let mut inside = 0.0;
    let mut null = 0.0;
    let mut community_degree: HashMap<usize, f64> = HashMap::new();
    for s in 0..sa.num_layers() {
        community_degree.clear();
        let mut two_m = 0.0;
        for x in s * n..(s + 1) * n {
            let mut k = 0.0;
            for (y, w) in raw.row(x) {
                two_mu += w;
                if labels[x] == labels[y] {
                    inside += w;
                }
                if y / n == s {
                    k += w;
                }
            }
            two_m += k;
            *community_degree.entry(labels[x]).or_insert(0.0) += k;
        }
        if two_m > 0.0 {
            let mut sq: Vec<(usize, f64)> = community_degree.iter().map(|(&g, &k)| (g, k)).collect();
            sq.sort_unstable_by_key(|&(g, _)| g);
            null += sq.iter().map(|&(_, k)| k * k).sum::<f64>() / two_m;
        }
    }
    if two_mu == 0.0 {
        return 0.0;
    }
    (inside - gamma * null) / two_mu
}

/// Parameters of a detection run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LartConfig {
    /// Walk length; `None` means `3L`.
    pub t: Option<usize>,
    pub epsilon: f64,
    pub gamma: f64,
    /// Replace the adaptive inter-layer weights by this constant.
    pub fixed_omega: Option<f64>,
}

impl Default for LartConfig {
    fn default() -> Self {
        LartConfig {
            t: None,
            epsilon: 1.0,
            gamma: 1.0,
            fixed_omega: None,
        }
    }
}

impl LartConfig {
    pub fn walk_length(&self, num_layers: usize) -> usize {
        self.t.unwrap_or(3 * num_layers)
    }

    pub fn coupling(&self) -> Coupling {
        match self.fixed_omega {
            Some(w) => Coupling::Fixed(w),
            None => Coupling::Adaptive,
        }
    }
}

/// Wall-clock milliseconds spent in each phase of [`detect`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub supra_ms: f64,
    pub walk_ms: f64,
    pub dissimilarity_ms: f64,
    pub linkage_ms: f64,
}

impl PhaseTimings {
    pub fn total_ms(&self) -> f64 {
        self.supra_ms + self.walk_ms + self.dissimilarity_ms + self.linkage_ms
    }
}

/// Output of [`detect`].
#[derive(Debug, Clone)]
pub struct Detection {
    pub partition: Partition,
    pub dendrogram: Dendrogram,
    pub selected_level: usize,
    pub q_m: f64,
    pub t: usize,
    pub config: LartConfig,
    pub walk: TransitionPowers,
    pub dissimilarity: DissimilarityMatrix,
    pub timings: PhaseTimings,
}

/// Serializable summary of a detection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub num_nodes: usize,
    pub num_layers: usize,
    pub t: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub coupling: Coupling,
    /// Which supra-adjacency variant `Q_M` was evaluated on.
    pub modularity_matrix: String,
    pub num_communities: usize,
    pub q_m: f64,
    pub selected_level: usize,
    pub q_curve: Vec<f64>,
    pub merges: Vec<Merge>,
    /// `[layer, node, community]` per node-layer, flat order.
    pub partition: Vec<[usize; 3]>,
}

impl Detection {
    pub fn report(&self) -> DetectionReport {
        let n = self.partition.num_nodes();
        DetectionReport {
            num_nodes: n,
            num_layers: self.partition.num_layers(),
            t: self.t,
            epsilon: self.config.epsilon,
            gamma: self.config.gamma,
            coupling: self.config.coupling(),
            modularity_matrix: "raw".into(),
            num_communities: self.partition.num_communities(),
            q_m: self.q_m,
            selected_level: self.selected_level,
            q_curve: self.dendrogram.q_scores().to_vec(),
            merges: self.dendrogram.merges().to_vec(),
            partition: self
                .partition
                .labels()
                .iter()
                .enumerate()
                .map(|(x, &g)| [x / n, x % n, g])
                .collect(),
        }
    }
}

/// Runs the full pipeline: supra-adjacency, walk, dissimilarity, linkage,
/// and modularity-based level selection.
pub fn detect(m: &Multiplex, config: &LartConfig) -> Result<Detection> {
    validate_gamma(config.gamma)?;
    let t = config.walk_length(m.num_layers());
    let mut timings = PhaseTimings::default();

    let clock = Instant::now();
    let sa = SupraAdjacency::build_with(m, config.coupling(), config.epsilon)?;
    timings.supra_ms = ms(clock);

    let clock = Instant::now();
    let walk = TransitionMatrix::new(&sa).power(t);
    timings.walk_ms = ms(clock);

    let clock = Instant::now();
    let dissimilarity = DissimilarityMatrix::new(&walk);
    timings.dissimilarity_ms = ms(clock);

    let clock = Instant::now();
    let dendrogram = agglomerate(&dissimilarity, &sa, config.gamma)?;
    let selected_level = dendrogram.best_level();
    let partition = dendrogram.select_partition();
    timings.linkage_ms = ms(clock);

    Ok(Detection {
        q_m: dendrogram.q_scores()[selected_level],
        partition,
        dendrogram,
        selected_level,
        t,
        config: *config,
        walk,
        dissimilarity,
        timings,
    })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}
