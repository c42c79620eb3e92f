//! Shortest-path times and enumeration of the fairness-bounded eligible
//! path set per OD pair.
//!
//! A path's time is the sum of arc walk times plus the traverse time of
//! every vertex entered (all path vertices except the origin). The
//! eligible set for fairness fraction `phi` holds every simple path whose
//! time is within `(1 + phi)` of the OD's shortest-path time; the bound
//! is inclusive with absolute tolerance 1e-9.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::netmodel::{Instance, NetIndex, ODPair};

/// Absolute slack applied to the fairness band and to shortest-path
/// tie detection.
pub const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub vertex_sequence: Vec<String>,
    pub arc_sequence: Vec<(String, String)>,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct ODPathSet {
    pub od: ODPair,
    pub phi: f64,
    pub shortest_time: f64,
    /// Sorted by (time ascending, lexicographic vertex sequence).
    pub paths: Vec<Path>,
    pub truncated: bool,
}

#[derive(Debug, Error)]
pub enum PathError {
    #[error("no path from {origin} to {destination} for OD pair {od}")]
    NoPath {
        od: String,
        origin: String,
        destination: String,
    },
    #[error("path uses nonexistent arc ({tail},{head})")]
    MissingArc { tail: String, head: String },
    #[error("path references missing vertex {0}")]
    MissingVertex(String),
    #[error("path must contain at least two vertices")]
    TooShort,
}

/// Time of a walk given as a vertex-id sequence: arc walk times plus the
/// traverse time of every vertex except the first. Addition order is
/// fixed (arc, then head vertex, in path order) so identical walks always
/// produce bit-identical times.
pub fn path_time<S: AsRef<str>>(instance: &Instance, vertices: &[S]) -> Result<f64, PathError> {
    if vertices.len() < 2 {
        return Err(PathError::TooShort);
    }
    let idx = NetIndex::new(instance);
    let mut seq = Vec::with_capacity(vertices.len());
    for v in vertices {
        let v = v.as_ref();
        seq.push(
            *idx.vertex_pos
                .get(v)
                .ok_or_else(|| PathError::MissingVertex(v.to_string()))?,
        );
    }
    path_time_indexed(&idx, &seq)
}

fn path_time_indexed(idx: &NetIndex, seq: &[usize]) -> Result<f64, PathError> {
    let mut t = 0.0f64;
    for w in seq.windows(2) {
        let arc = *idx
            .arc_by_pair
            .get(&(w[0], w[1]))
            .ok_or_else(|| PathError::MissingArc {
                tail: idx.vertex_id(w[0]).to_string(),
                head: idx.vertex_id(w[1]).to_string(),
            })?;
        t += idx.instance.arcs[arc].walk_time;
        t += idx.instance.vertices[w[1]].traverse_time;
    }
    Ok(t)
}

fn make_path(idx: &NetIndex, seq: &[usize]) -> Path {
    let vertex_sequence: Vec<String> = seq.iter().map(|&v| idx.vertex_id(v).to_string()).collect();
    let arc_sequence = seq
        .windows(2)
        .map(|w| (idx.vertex_id(w[0]).to_string(), idx.vertex_id(w[1]).to_string()))
        .collect();
    let time = path_time_indexed(idx, seq).expect("search only follows existing arcs");
    Path {
        vertex_sequence,
        arc_sequence,
        time,
    }
}

/// Minimum time from every vertex to `dest` (Dijkstra on the reversed
/// graph). The vertex's own traverse time is not counted, matching the
/// path-time convention where the starting vertex is free.
pub fn reverse_shortest_times(idx: &NetIndex, dest: usize) -> Vec<f64> {
    let n = idx.n_vertices();
    let mut dist = vec![f64::INFINITY; n];
    dist[dest] = 0.0;
    let mut heap: BinaryHeap<std::cmp::Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    heap.push(std::cmp::Reverse((OrdF64(0.0), dest)));
    while let Some(std::cmp::Reverse((OrdF64(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &k in &idx.in_arcs[v] {
            let u = idx.arc_tail[k];
            let arc = &idx.instance.arcs[k];
            let cand = d + arc.walk_time + idx.instance.vertices[v].traverse_time;
            if cand < dist[u] {
                dist[u] = cand;
                heap.push(std::cmp::Reverse((OrdF64(cand), u)));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Minimum-time simple path, ties broken by lexicographically smallest
/// vertex-id sequence. Deterministic.
pub fn shortest_path(instance: &Instance, od: &ODPair) -> Result<Path, PathError> {
    let idx = NetIndex::new(instance);
    shortest_path_indexed(&idx, od)
}

fn no_path_err(od: &ODPair) -> PathError {
    PathError::NoPath {
        od: od.id.clone(),
        origin: od.origin.clone(),
        destination: od.destination.clone(),
    }
}

fn od_endpoints(idx: &NetIndex, od: &ODPair) -> Result<(usize, usize), PathError> {
    let o = *idx
        .vertex_pos
        .get(od.origin.as_str())
        .ok_or_else(|| PathError::MissingVertex(od.origin.clone()))?;
    let d = *idx
        .vertex_pos
        .get(od.destination.as_str())
        .ok_or_else(|| PathError::MissingVertex(od.destination.clone()))?;
    Ok((o, d))
}

fn shortest_path_indexed(idx: &NetIndex, od: &ODPair) -> Result<Path, PathError> {
    let (origin, dest) = od_endpoints(idx, od)?;
    let dist_rev = reverse_shortest_times(idx, dest);
    let total = dist_rev[origin];
    if !total.is_finite() {
        return Err(no_path_err(od));
    }
    // Greedy lex-smallest reconstruction: at each vertex follow the
    // smallest-id successor that still lies on a shortest continuation.
    // Near-ties within TIME_TOL are treated as exact ties.
    let eps = TIME_TOL * (1.0 + total);
    let mut seq = vec![origin];
    let mut time = 0.0f64;
    let mut cur = origin;
    while cur != dest {
        let mut best: Option<(usize, f64)> = None; // (vertex, new_time)
        for &k in &idx.out_arcs[cur] {
            let v = idx.arc_head[k];
            if seq.contains(&v) {
                continue;
            }
            let mut t2 = time + idx.instance.arcs[k].walk_time;
            t2 += idx.instance.vertices[v].traverse_time;
            if t2 + dist_rev[v] <= total + eps {
                match best {
                    Some((bv, _)) if idx.lex_rank[bv] <= idx.lex_rank[v] => {}
                    _ => best = Some((v, t2)),
                }
            }
        }
        let (v, t2) = best.ok_or_else(|| no_path_err(od))?;
        seq.push(v);
        time = t2;
        cur = v;
    }
    Ok(make_path(idx, &seq))
}

struct SearchState {
    /// Lower bound on the final path time: time so far + reverse bound.
    f: f64,
    time: f64,
    seq: Vec<u32>,
}

impl PartialEq for SearchState {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for SearchState {}
impl PartialOrd for SearchState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SearchState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f.total_cmp(&other.f).then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Every simple path within the fairness band, found by best-first search
/// from the origin pruned with the admissible reverse-shortest-time
/// bound. If more than `max_paths` qualify, the `max_paths` smallest by
/// (time, lexicographic vertex sequence) are kept and `truncated` is set.
/// `phi = 0` yields exactly the tie-broken shortest path.
pub fn enumerate_eligible_paths(
    instance: &Instance,
    od: &ODPair,
    phi: f64,
    max_paths: usize,
) -> Result<ODPathSet, PathError> {
    assert!(phi >= 0.0, "phi must be nonnegative");
    assert!(max_paths > 0, "max_paths must be positive");
    let idx = NetIndex::new(instance);
    let sp = shortest_path_indexed(&idx, od)?;
    let shortest_time = sp.time;
    if phi == 0.0 {
        return Ok(ODPathSet {
            od: od.clone(),
            phi,
            shortest_time,
            paths: vec![sp],
            truncated: false,
        });
    }
    let (origin, dest) = od_endpoints(&idx, od)?;
    let dist_rev = reverse_shortest_times(&idx, dest);
    let budget = (1.0 + phi) * shortest_time + TIME_TOL;
    let hard_cap = max_paths.saturating_mul(2).saturating_add(100);

    // States are expanded in (f, lex) order, so completed paths arrive in
    // nondecreasing time. The sequences are stored as lex ranks so the
    // heap ordering matches vertex-id lexicographic order directly.
    let mut inv_rank = vec![0u32; idx.n_vertices()];
    for (v, &r) in idx.lex_rank.iter().enumerate() {
        inv_rank[r] = v as u32;
    }
    let mut heap: BinaryHeap<std::cmp::Reverse<SearchState>> = BinaryHeap::new();
    heap.push(std::cmp::Reverse(SearchState {
        f: dist_rev[origin],
        time: 0.0,
        seq: vec![idx.lex_rank[origin] as u32],
    }));
    let mut collected: Vec<(f64, Vec<u32>)> = Vec::new();
    let mut leftover = false;
    while let Some(std::cmp::Reverse(st)) = heap.pop() {
        if collected.len() >= max_paths {
            let worst = collected.last().map(|(t, _)| *t).unwrap_or(f64::INFINITY);
            if st.f > worst + 1e-12 || collected.len() >= hard_cap {
                leftover = true;
                break;
            }
        }
        let cur = inv_rank[*st.seq.last().unwrap() as usize] as usize;
        if cur == dest {
            collected.push((st.time, st.seq));
            continue;
        }
        for &k in &idx.out_arcs[cur] {
            let v = idx.arc_head[k];
            let vr = idx.lex_rank[v] as u32;
            if st.seq.contains(&vr) {
                continue;
            }
            let mut t2 = st.time + idx.instance.arcs[k].walk_time;
            t2 += idx.instance.vertices[v].traverse_time;
            let f2 = t2 + dist_rev[v];
            if f2 <= budget {
                let mut seq = st.seq.clone();
                seq.push(vr);
                heap.push(std::cmp::Reverse(SearchState { f: f2, time: t2, seq }));
            }
        }
    }

    collected.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut truncated = leftover;
    if collected.len() > max_paths {
        collected.truncate(max_paths);
        truncated = true;
    }
    let paths: Vec<Path> = collected
        .iter()
        .map(|(_, seq)| {
            let vseq: Vec<usize> = seq.iter().map(|&r| inv_rank[r as usize] as usize).collect();
            make_path(&idx, &vseq)
        })
        .collect();
    debug_assert!(!paths.is_empty());
    Ok(ODPathSet {
        od: od.clone(),
        phi,
        shortest_time,
        paths,
        truncated,
    })
}
