//! Instance data model: directed pedestrian network with vertex/arc
//! capacities and traversal times, OD demands, JSON (de)serialization,
//! validation and a synthetic instance generator.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A crossroad. `cap` is the number of pedestrians that can transit per
/// unit time without gathering; `traverse_time` is in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: String,
    pub cap: f64,
    pub traverse_time: f64,
}

/// A road segment between two crossroads. At most one arc may exist per
/// ordered (tail, head) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub tail: String,
    pub head: String,
    pub cap: f64,
    pub walk_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

/// Consolidated demand from one origin to one destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ODPair {
    pub id: String,
    pub origin: String,
    pub destination: String,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<Arc>,
    pub od_pairs: Vec<ODPair>,
}

/// One violated validation rule; violations are data, not failures.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Id of the offending entity (vertex id, "tail->head" for arcs, OD id).
    pub entity: String,
    pub rule: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.entity, self.rule, self.message)
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn violation(entity: impl Into<String>, rule: &str, message: impl Into<String>) -> Violation {
    Violation {
        entity: entity.into(),
        rule: rule.to_string(),
        message: message.into(),
    }
}

/// Checks every type invariant; returns an empty list iff the instance is
/// well-formed.
// Negated comparisons are deliberate: NaN must fail every numeric check.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for v in &instance.vertices {
        if !ids.insert(v.id.as_str()) {
            out.push(violation(&v.id, "unique vertex id", "duplicate vertex id"));
        }
        if !(v.cap > 0.0) {
            out.push(violation(&v.id, "vertex cap", "cap must be > 0"));
        }
        if !(v.traverse_time >= 0.0) {
            out.push(violation(&v.id, "vertex traverse_time", "traverse_time must be >= 0"));
        }
    }
    let mut arc_pairs = HashSet::new();
    for a in &instance.arcs {
        let ent = format!("({},{})", a.tail, a.head);
        if a.tail == a.head {
            out.push(violation(&ent, "arc endpoints", "tail equals head"));
        }
        if !(a.cap > 0.0) {
            out.push(violation(&ent, "arc cap", "cap must be > 0"));
        }
        if !(a.walk_time > 0.0) {
            out.push(violation(&ent, "arc walk_time", "walk_time must be > 0"));
        }
        for end in [&a.tail, &a.head] {
            if !ids.contains(end.as_str()) {
                out.push(violation(
                    &ent,
                    "arc reference",
                    format!("arc ({},{}) references missing vertex {}", a.tail, a.head, end),
                ));
            }
        }
        if !arc_pairs.insert((a.tail.as_str(), a.head.as_str())) {
            out.push(violation(
                &ent,
                "duplicate arc",
                format!("duplicate arc ({},{})", a.tail, a.head),
            ));
        }
    }
    let mut od_ids = HashSet::new();
    for od in &instance.od_pairs {
        if !od_ids.insert(od.id.as_str()) {
            out.push(violation(&od.id, "unique od id", "duplicate OD id"));
        }
        if od.origin == od.destination {
            out.push(violation(&od.id, "od endpoints", "origin equals destination"));
        }
        if !(od.demand > 0.0) {
            out.push(violation(&od.id, "od demand", "demand must be > 0"));
        }
        for end in [&od.origin, &od.destination] {
            if !ids.contains(end.as_str()) {
                out.push(violation(
                    &od.id,
                    "od reference",
                    format!("OD {} references missing vertex {}", od.id, end),
                ));
            }
        }
    }
    out
}

/// Parses and validates the JSON instance format. Unknown fields are
/// rejected.
pub fn load_instance(mut source: impl Read) -> Result<Instance, NetError> {
    let mut buf = String::new();
    source.read_to_string(&mut buf)?;
    let instance: Instance = serde_json::from_str(&buf)?;
    let violations = validate(&instance);
    if violations.is_empty() {
        Ok(instance)
    } else {
        Err(NetError::Invalid(violations))
    }
}

/// Serializes an instance; `load_instance(save_instance(x))` reproduces
/// `x` field-for-field (serde_json emits shortest round-trip decimals, so
/// every numeric value survives exactly).
pub fn save_instance(instance: &Instance, mut dest: impl Write) -> Result<(), NetError> {
    serde_json::to_writer_pretty(&mut dest, instance)?;
    dest.write_all(b"\n")?;
    Ok(())
}

pub fn save_instance_to_vec(instance: &Instance) -> Vec<u8> {
    let mut out = Vec::new();
    save_instance(instance, &mut out).expect("writing to Vec cannot fail");
    out
}

/// Numeric-index view of an instance used by the path and assignment
/// machinery. Vertices, arcs and OD pairs keep their instance order.
pub struct NetIndex<'a> {
    pub instance: &'a Instance,
    pub vertex_pos: HashMap<&'a str, usize>,
    pub arc_tail: Vec<usize>,
    pub arc_head: Vec<usize>,
    /// Outgoing arc indices per vertex.
    pub out_arcs: Vec<Vec<usize>>,
    /// Incoming arc indices per vertex.
    pub in_arcs: Vec<Vec<usize>>,
    pub arc_by_pair: HashMap<(usize, usize), usize>,
    /// Rank of each vertex in the id-sorted order; used for lexicographic
    /// tie-breaking on vertex-id sequences.
    pub lex_rank: Vec<usize>,
}

impl<'a> NetIndex<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let n = instance.vertices.len();
        let vertex_pos: HashMap<&str, usize> = instance
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut arc_tail = Vec::with_capacity(instance.arcs.len());
        let mut arc_head = Vec::with_capacity(instance.arcs.len());
        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        let mut arc_by_pair = HashMap::new();
        for (k, a) in instance.arcs.iter().enumerate() {
            let t = vertex_pos[a.tail.as_str()];
            let h = vertex_pos[a.head.as_str()];
            arc_tail.push(t);
            arc_head.push(h);
            out_arcs[t].push(k);
            in_arcs[h].push(k);
            arc_by_pair.insert((t, h), k);
        }
        let mut by_id: Vec<usize> = (0..n).collect();
        by_id.sort_by(|&a, &b| instance.vertices[a].id.cmp(&instance.vertices[b].id));
        let mut lex_rank = vec![0usize; n];
        for (rank, &v) in by_id.iter().enumerate() {
            lex_rank[v] = rank;
        }
        NetIndex {
            instance,
            vertex_pos,
            arc_tail,
            arc_head,
            out_arcs,
            in_arcs,
            arc_by_pair,
            lex_rank,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.instance.vertices.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.instance.vertices[v].id
    }
}

/// Axis-aligned rectangle in meters for random coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_vertices: usize,
    pub arc_density: f64,
    pub n_od_pairs: usize,
    pub safety_distance: f64,
    pub walking_speed: f64,
    /// Fraction of total entering-arc capacity given to each vertex.
    pub node_cap_fraction: f64,
    pub node_time_window: (f64, f64),
    /// Each OD demand is this fraction of its origin's out-arc capacity.
    pub demand_fraction: f64,
    pub bbox: BBox,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_vertices: 50,
            arc_density: 1.0,
            n_od_pairs: 25,
            safety_distance: 2.0,
            walking_speed: 1.4,
            node_cap_fraction: 0.5,
            node_time_window: (1.0, 10.0),
            demand_fraction: 0.3,
            bbox: BBox {
                width: 2000.0,
                height: 2000.0,
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("infeasible config: {0}")]
    Infeasible(String),
}

fn check_fraction(name: &str, x: f64) -> Result<(), GeneratorError> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(GeneratorError::Infeasible(format!(
            "{name} must lie in (0, 1], got {x}"
        )))
    }
}

/// Builds a random instance: uniform coordinates in the bbox, a random
/// Hamiltonian cycle backbone (so the digraph is strongly connected) plus
/// random extra arcs up to `ceil(arc_density * n * (n-1))`, capacities
/// `length / safety_distance`, walk times `length / walking_speed`.
/// Fully deterministic given the seed.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    let n = config.n_vertices;
    if n < 2 {
        return Err(GeneratorError::Infeasible("need at least 2 vertices".into()));
    }
    check_fraction("arc_density", config.arc_density)?;
    check_fraction("node_cap_fraction", config.node_cap_fraction)?;
    check_fraction("demand_fraction", config.demand_fraction)?;
    if config.n_od_pairs == 0 || config.n_od_pairs > n * (n - 1) {
        return Err(GeneratorError::Infeasible(format!(
            "n_od_pairs must lie in [1, n(n-1)] = [1, {}]",
            n * (n - 1)
        )));
    }
    let (lo, hi) = config.node_time_window;
    if !(lo >= 0.0 && lo <= hi) {
        return Err(GeneratorError::Infeasible(
            "node_time_window must satisfy 0 <= low <= high".into(),
        ));
    }
    if !(config.safety_distance > 0.0 && config.walking_speed > 0.0) {
        return Err(GeneratorError::Infeasible(
            "safety_distance and walking_speed must be > 0".into(),
        ));
    }
    if !(config.bbox.width > 0.0 && config.bbox.height > 0.0) {
        return Err(GeneratorError::Infeasible("bbox must have positive extent".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(0.0..config.bbox.width),
                rng.gen_range(0.0..config.bbox.height),
            )
        })
        .collect();

    // Backbone: Hamiltonian cycle over a random permutation.
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut present = HashSet::new();
    for i in 0..n {
        let pair = (perm[i], perm[(i + 1) % n]);
        chosen.push(pair);
        present.insert(pair);
    }

    let target = ((config.arc_density * (n * (n - 1)) as f64).ceil() as usize).max(n);
    let mut candidates: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j && !present.contains(&(i, j)) {
                candidates.push((i, j));
            }
        }
    }
    candidates.shuffle(&mut rng);
    for pair in candidates {
        if chosen.len() >= target {
            break;
        }
        chosen.push(pair);
    }

    let vid = |i: usize| format!("v{i}");
    let mut arcs = Vec::with_capacity(chosen.len());
    let mut in_cap = vec![0.0f64; n];
    let mut out_cap = vec![0.0f64; n];
    for (i, j) in chosen {
        let dx = coords[i].0 - coords[j].0;
        let dy = coords[i].1 - coords[j].1;
        let length = (dx * dx + dy * dy).sqrt().max(1e-6);
        let cap = length / config.safety_distance;
        in_cap[j] += cap;
        out_cap[i] += cap;
        arcs.push(Arc {
            tail: vid(i),
            head: vid(j),
            cap,
            walk_time: length / config.walking_speed,
            length: Some(length),
        });
    }

    let vertices: Vec<Vertex> = (0..n)
        .map(|i| Vertex {
            id: vid(i),
            cap: config.node_cap_fraction * in_cap[i],
            traverse_time: rng.gen_range(lo..=hi),
        })
        .collect();

    // Distinct ordered OD pairs, sampled without replacement.
    let mut od_candidates: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                od_candidates.push((i, j));
            }
        }
    }
    od_candidates.shuffle(&mut rng);
    let od_pairs: Vec<ODPair> = od_candidates
        .into_iter()
        .take(config.n_od_pairs)
        .enumerate()
        .map(|(k, (o, d))| ODPair {
            id: format!("od{k}"),
            origin: vid(o),
            destination: vid(d),
            demand: config.demand_fraction * out_cap[o],
        })
        .collect();

    Ok(Instance {
        name: format!("gen-n{}-d{}-od{}-s{}", n, config.arc_density, config.n_od_pairs, config.seed),
        vertices,
        arcs,
        od_pairs,
    })
}
