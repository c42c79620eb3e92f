//! Small hand-checkable networks used across the test suites and benches.

use crate::netmodel::{Arc, Instance, ODPair, Vertex};

/// Canonical 4-vertex network: two parallel two-arc routes O->A->D
/// (time 2.0) and O->B->D (time 2.2), all arc capacities 10, vertex
/// capacities 100 with zero traverse time, one OD pair O->D with
/// demand 15.
pub fn diamond() -> Instance {
    let v = |id: &str| Vertex {
        id: id.to_string(),
        cap: 100.0,
        traverse_time: 0.0,
    };
    let a = |tail: &str, head: &str, t: f64| Arc {
        tail: tail.to_string(),
        head: head.to_string(),
        cap: 10.0,
        walk_time: t,
        length: None,
    };
    Instance {
        name: "diamond".to_string(),
        vertices: vec![v("O"), v("A"), v("B"), v("D")],
        arcs: vec![a("O", "A", 1.0), a("A", "D", 1.0), a("O", "B", 1.1), a("B", "D", 1.1)],
        od_pairs: vec![ODPair {
            id: "od0".to_string(),
            origin: "O".to_string(),
            destination: "D".to_string(),
            demand: 15.0,
        }],
    }
}
