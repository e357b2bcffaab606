//! Planar machinery: weighted planar graphs with rotation systems, matching
//! sums, Kasteleyn orientations, compilation of matchgates into planar
//! matching-sum graphs via crossing gadgets, and the one-shot contraction of
//! a planar open network into a single Gaussian integral.

use num_complex::Complex64;

use crate::error::{Error, Result};

mod chords;
mod compile;
mod gadget;
mod kasteleyn;
mod matchsum;
mod open;

pub use compile::{compile_matchsum, compile_pfaffian_graph, CompiledMatchsum};
pub use gadget::crossing_gadget;
pub use kasteleyn::{kasteleyn_orient, verify_kasteleyn, KasteleynOrientation};
pub use matchsum::{matching_sum_bruteforce, matching_sum_exact};
pub use open::{contract_open_network, sign_diagnostic, OpenContraction, OpenNetwork, SignDiagnostic};

/// One slot of a vertex's counterclockwise rotation: either one end of an
/// edge or an external stub (a dangling half-edge on the outer face).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Edge { edge: usize, end: u8 },
    Stub { stub: usize },
}

/// A weighted graph with a counterclockwise rotation system (a combinatorial
/// embedding) and optional external stubs. Faces are implied by the rotation
/// system; a valid disk embedding satisfies V − E + F = 2.
#[derive(Clone, Debug)]
pub struct PlanarGraph {
    rotations: Vec<Vec<Slot>>,
    weights: Vec<Complex64>,
    n_stubs: usize,
    /// (vertex, slot index) of dart 2e+t (the end-t side of edge e).
    dart_pos: Vec<(usize, usize)>,
    /// (vertex, slot index) of each stub.
    stub_pos: Vec<(usize, usize)>,
}

impl PlanarGraph {
    pub fn new(rotations: Vec<Vec<Slot>>, weights: Vec<Complex64>, n_stubs: usize) -> Result<Self> {
        let n_edges = weights.len();
        let mut dart_pos = vec![(usize::MAX, usize::MAX); 2 * n_edges];
        let mut stub_pos = vec![(usize::MAX, usize::MAX); n_stubs];
        for (v, rot) in rotations.iter().enumerate() {
            for (i, slot) in rot.iter().enumerate() {
                match *slot {
                    Slot::Edge { edge, end } => {
                        if edge >= n_edges || end > 1 {
                            return Err(Error::NotPlanar(format!(
                                "vertex {v}: bad edge slot ({edge},{end})"
                            )));
                        }
                        let d = 2 * edge + end as usize;
                        if dart_pos[d].0 != usize::MAX {
                            return Err(Error::NotPlanar(format!(
                                "edge {edge} end {end} appears twice"
                            )));
                        }
                        dart_pos[d] = (v, i);
                    }
                    Slot::Stub { stub } => {
                        if stub >= n_stubs {
                            return Err(Error::NotPlanar(format!("vertex {v}: bad stub {stub}")));
                        }
                        if stub_pos[stub].0 != usize::MAX {
                            return Err(Error::NotPlanar(format!("stub {stub} appears twice")));
                        }
                        stub_pos[stub] = (v, i);
                    }
                }
            }
        }
        if let Some(d) = dart_pos.iter().position(|p| p.0 == usize::MAX) {
            return Err(Error::NotPlanar(format!(
                "edge {} end {} is not placed",
                d / 2,
                d % 2
            )));
        }
        if let Some(s) = stub_pos.iter().position(|p| p.0 == usize::MAX) {
            return Err(Error::NotPlanar(format!("stub {s} is not placed")));
        }
        Ok(Self {
            rotations,
            weights,
            n_stubs,
            dart_pos,
            stub_pos,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.rotations.len()
    }

    pub fn n_edges(&self) -> usize {
        self.weights.len()
    }

    pub fn n_stubs(&self) -> usize {
        self.n_stubs
    }

    pub fn weight(&self, edge: usize) -> Complex64 {
        self.weights[edge]
    }

    pub fn set_weight(&mut self, edge: usize, w: Complex64) {
        self.weights[edge] = w;
    }

    pub fn rotation(&self, v: usize) -> &[Slot] {
        &self.rotations[v]
    }

    /// Vertices holding end 0 and end 1 of an edge.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        (self.dart_pos[2 * edge].0, self.dart_pos[2 * edge + 1].0)
    }

    /// (vertex, slot index) of dart `d` = 2·edge + end.
    pub fn dart_position(&self, d: usize) -> (usize, usize) {
        self.dart_pos[d]
    }

    /// (vertex, slot index) of a stub.
    pub fn stub_position(&self, s: usize) -> (usize, usize) {
        self.stub_pos[s]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotations[v]
            .iter()
            .filter(|s| matches!(s, Slot::Edge { .. }))
            .count()
    }

    fn rebuild_index(&mut self) {
        let n_edges = self.weights.len();
        self.dart_pos = vec![(usize::MAX, usize::MAX); 2 * n_edges];
        self.stub_pos = vec![(usize::MAX, usize::MAX); self.n_stubs];
        for (v, rot) in self.rotations.iter().enumerate() {
            for (i, slot) in rot.iter().enumerate() {
                match *slot {
                    Slot::Edge { edge, end } => {
                        self.dart_pos[2 * edge + end as usize] = (v, i);
                    }
                    Slot::Stub { stub } => {
                        self.stub_pos[stub] = (v, i);
                    }
                }
            }
        }
    }

    /// Inserts a new edge between `u` and `z` with its ends placed at the
    /// given slot indexes (existing slots shift right). Returns the edge id.
    pub fn insert_edge_at(
        &mut self,
        u: usize,
        pos_u: usize,
        z: usize,
        pos_z: usize,
        weight: Complex64,
    ) -> usize {
        let e = self.weights.len();
        self.weights.push(weight);
        if u == z {
            let (lo, hi, lo_end, hi_end) = if pos_u <= pos_z {
                (pos_u, pos_z, 0u8, 1u8)
            } else {
                (pos_z, pos_u, 1u8, 0u8)
            };
            self.rotations[u].insert(lo, Slot::Edge { edge: e, end: lo_end });
            self.rotations[u].insert(hi + 1, Slot::Edge { edge: e, end: hi_end });
        } else {
            self.rotations[u].insert(pos_u, Slot::Edge { edge: e, end: 0 });
            self.rotations[z].insert(pos_z, Slot::Edge { edge: e, end: 1 });
        }
        self.rebuild_index();
        e
    }

    /// True when the graph is connected, ignoring stubs; the empty graph and
    /// single vertices count as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for slot in &self.rotations[v] {
                if let Slot::Edge { edge, end } = *slot {
                    let other = self.dart_pos[2 * edge + (1 - end) as usize].0;
                    if !seen[other] {
                        seen[other] = true;
                        count += 1;
                        stack.push(other);
                    }
                }
            }
        }
        count == n
    }

    /// Face orbits of the rotation system. Each walk lists darts
    /// (2·edge + source end); inner faces of a planar embedding come out
    /// counterclockwise. Stubs are transparent: the stubs swept while
    /// turning at each corner are recorded per face in trace order.
    pub fn trace_faces(&self) -> Faces {
        let n_darts = 2 * self.n_edges();
        let mut face_of_dart = vec![usize::MAX; n_darts];
        let mut walks = Vec::new();
        let mut face_stubs = Vec::new();
        for start in 0..n_darts {
            if face_of_dart[start] != usize::MAX {
                continue;
            }
            let id = walks.len();
            let mut walk = Vec::new();
            let mut stubs = Vec::new();
            let mut d = start;
            loop {
                face_of_dart[d] = id;
                walk.push(d);
                // next dart: from twin(d), step ccw skipping stubs
                let twin = d ^ 1;
                let (v, start_i) = self.dart_pos[twin];
                let len = self.rotations[v].len();
                let mut i = start_i;
                loop {
                    i = (i + 1) % len;
                    match self.rotations[v][i] {
                        Slot::Edge { edge, end } => {
                            d = 2 * edge + end as usize;
                            break;
                        }
                        Slot::Stub { stub } => stubs.push(stub),
                    }
                }
                if d == start {
                    break;
                }
            }
            walks.push(walk);
            face_stubs.push(stubs);
        }
        // Edge-free graph: a single face holding every stub.
        if walks.is_empty() {
            let mut stubs = Vec::new();
            for rot in &self.rotations {
                for slot in rot {
                    if let Slot::Stub { stub } = slot {
                        stubs.push(*stub);
                    }
                }
            }
            walks.push(Vec::new());
            face_stubs.push(stubs);
        }
        Faces {
            walks,
            face_of_dart,
            face_stubs,
        }
    }

    /// V − E + F; 2 for a connected rotation system embedded in the sphere.
    pub fn euler_characteristic(&self) -> isize {
        let f = self.trace_faces().walks.len();
        self.n_vertices() as isize - self.n_edges() as isize + f as isize
    }

    pub fn check_disk_embedding(&self) -> Result<()> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let chi = self.euler_characteristic();
        if chi != 2 {
            return Err(Error::NotPlanar(format!(
                "Euler characteristic {chi} (expected 2)"
            )));
        }
        Ok(())
    }

    /// Source vertex of a dart.
    pub fn dart_source(&self, d: usize) -> usize {
        self.dart_pos[d].0
    }

    /// Target vertex of a dart.
    pub fn dart_target(&self, d: usize) -> usize {
        self.dart_pos[d ^ 1].0
    }
}

/// Face structure of a rotation system.
pub struct Faces {
    /// Dart walks, one per face.
    pub walks: Vec<Vec<usize>>,
    /// Face id containing each dart.
    pub face_of_dart: Vec<usize>,
    /// Stubs swept by each face walk, in trace order.
    pub face_stubs: Vec<Vec<usize>>,
}

impl Faces {
    /// The face holding all `m` stubs (the outer face of an open network).
    pub fn face_with_all_stubs(&self, m: usize) -> Option<usize> {
        (0..self.walks.len()).find(|&f| self.face_stubs[f].len() == m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// Triangle with ccw rotations: two faces, Euler characteristic 2, and
    /// the inner face traced counterclockwise.
    #[test]
    fn triangle_faces() {
        // vertices: 0 top, 1 bottom-left, 2 bottom-right (ccw order 0,1,2)
        // edges: 0 = (0,1), 1 = (1,2), 2 = (2,0)
        let rot = vec![
            vec![Slot::Edge { edge: 0, end: 0 }, Slot::Edge { edge: 2, end: 1 }],
            vec![Slot::Edge { edge: 1, end: 0 }, Slot::Edge { edge: 0, end: 1 }],
            vec![Slot::Edge { edge: 2, end: 0 }, Slot::Edge { edge: 1, end: 1 }],
        ];
        let g = PlanarGraph::new(rot, vec![c1(); 3], 0).unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.walks.len(), 2);
        assert_eq!(g.euler_characteristic(), 2);
        // one face is the ccw triangle 0→1→2 (darts 0,2,4)
        let ccw: Vec<usize> = vec![0, 2, 4];
        assert!(faces
            .walks
            .iter()
            .any(|w| w.len() == 3 && ccw.iter().all(|d| w.contains(d))));
    }

    #[test]
    fn stub_collection() {
        // single vertex with two stubs and a self-loop around them
        let rot = vec![vec![
            Slot::Stub { stub: 0 },
            Slot::Edge { edge: 0, end: 0 },
            Slot::Edge { edge: 0, end: 1 },
            Slot::Stub { stub: 1 },
        ]];
        let g = PlanarGraph::new(rot, vec![c1()], 2).unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.walks.len(), 2);
        // both stubs sit outside the loop, in one face
        assert!(faces.face_with_all_stubs(2).is_some());
    }
}
