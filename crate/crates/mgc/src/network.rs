//! The tensor-network data model — a graph with a counterclockwise rotation
//! system, per-vertex tensors and a genus tag — plus brute-force contraction
//! and pairwise edge / self-loop contraction through Gaussian convolution.
//!
//! Edge *ends* are the primitive: every edge has exactly two ends (0 and 1),
//! and each end occupies one slot of some vertex's rotation list. Self-loops
//! put both ends on the same vertex.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_integral_closed, CMat, SkewMatrix};
use crate::matchgate::{from_dense, repair_gauge, CanonicalMatchgate, DenseTensor, Parity};

/// Brute-force contraction bound (2^|E| index strings).
pub const MAX_BRUTEFORCE_EDGES: usize = 24;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One end of an edge: `end` distinguishes the two ends (0/1), which is what
/// disambiguates self-loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: u8,
}

/// A tensor attached to a vertex, in either representation.
#[derive(Clone, Debug)]
pub enum VertexTensor {
    Dense(DenseTensor),
    Canonical(CanonicalMatchgate),
}

impl VertexTensor {
    pub fn rank(&self) -> usize {
        match self {
            VertexTensor::Dense(t) => t.rank(),
            VertexTensor::Canonical(g) => g.rank(),
        }
    }

    /// Canonical form, converting (and thereby validating) dense input.
    pub fn to_canonical(&self, tol: f64) -> Result<CanonicalMatchgate> {
        match self {
            VertexTensor::Dense(t) => from_dense(t, tol),
            VertexTensor::Canonical(g) => Ok(g.clone()),
        }
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        match self {
            VertexTensor::Dense(t) => Ok(t.clone()),
            VertexTensor::Canonical(g) => g.to_dense(),
        }
    }

    /// Weight vector when the tensor is linear (single excitation per
    /// component).
    pub fn linear_weights(&self) -> Option<Vec<Complex64>> {
        match self {
            VertexTensor::Dense(t) => t.linear_weights(),
            VertexTensor::Canonical(g) => {
                if g.k() == 1 && g.a().max_abs() == 0.0 {
                    Some((0..g.rank()).map(|j| g.c() * g.b()[(0, j)]).collect())
                } else if g.rank() + g.k() <= 12 {
                    g.to_dense().ok().and_then(|t| t.linear_weights())
                } else {
                    None
                }
            }
        }
    }
}

/// A tensor network on an oriented surface: per-vertex counterclockwise
/// incidence lists, per-vertex tensors, a genus tag and an optional planar
/// cut (edges whose removal leaves the network inside a disk).
#[derive(Clone, Debug)]
pub struct TensorNetwork {
    genus: usize,
    incidence: Vec<Vec<EdgeEnd>>,
    n_edges: usize,
    tensors: Vec<VertexTensor>,
    planar_cut: Option<Vec<usize>>,
}

impl TensorNetwork {
    pub fn new(
        genus: usize,
        incidence: Vec<Vec<EdgeEnd>>,
        n_edges: usize,
        tensors: Vec<VertexTensor>,
        planar_cut: Option<Vec<usize>>,
    ) -> Result<Self> {
        if tensors.len() != incidence.len() {
            return Err(Error::BadNetwork(format!(
                "{} vertices but {} tensors",
                incidence.len(),
                tensors.len()
            )));
        }
        let mut seen = vec![[false, false]; n_edges];
        for (v, ends) in incidence.iter().enumerate() {
            if tensors[v].rank() != ends.len() {
                return Err(Error::BadNetwork(format!(
                    "vertex {v}: degree {} but tensor rank {}",
                    ends.len(),
                    tensors[v].rank()
                )));
            }
            for e in ends {
                if e.edge >= n_edges || e.end > 1 {
                    return Err(Error::BadNetwork(format!(
                        "vertex {v}: bad edge end ({}, {})",
                        e.edge, e.end
                    )));
                }
                if seen[e.edge][e.end as usize] {
                    return Err(Error::BadNetwork(format!(
                        "edge {} end {} appears twice",
                        e.edge, e.end
                    )));
                }
                seen[e.edge][e.end as usize] = true;
            }
        }
        for (e, s) in seen.iter().enumerate() {
            if !s[0] || !s[1] {
                return Err(Error::BadNetwork(format!("edge {e} is missing an end")));
            }
        }
        if let Some(cut) = &planar_cut {
            for &e in cut {
                if e >= n_edges {
                    return Err(Error::BadCut(format!("cut edge {e} does not exist")));
                }
            }
        }
        Ok(Self {
            genus,
            incidence,
            n_edges,
            tensors,
            planar_cut,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn n_vertices(&self) -> usize {
        self.incidence.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn incidence(&self, v: usize) -> &[EdgeEnd] {
        &self.incidence[v]
    }

    pub fn tensor(&self, v: usize) -> &VertexTensor {
        &self.tensors[v]
    }

    pub fn tensors(&self) -> &[VertexTensor] {
        &self.tensors
    }

    pub fn planar_cut(&self) -> Option<&[usize]> {
        self.planar_cut.as_deref()
    }

    pub fn set_planar_cut(&mut self, cut: Option<Vec<usize>>) {
        self.planar_cut = cut;
    }

    /// The (vertex, slot) locations of an edge's two ends, end 0 first.
    pub fn edge_ends(&self, edge: usize) -> [(usize, usize); 2] {
        let mut out = [(usize::MAX, usize::MAX); 2];
        for (v, ends) in self.incidence.iter().enumerate() {
            for (slot, e) in ends.iter().enumerate() {
                if e.edge == edge {
                    out[e.end as usize] = (v, slot);
                }
            }
        }
        out
    }

    /// Direct contraction: sums the product of all tensor components over
    /// every edge index string. Exponential in |E|; capped at 24 edges.
    pub fn contract_bruteforce(&self) -> Result<Complex64> {
        if self.n_edges > MAX_BRUTEFORCE_EDGES {
            return Err(Error::SizeLimit {
                what: "brute-force edge count",
                got: self.n_edges,
                limit: MAX_BRUTEFORCE_EDGES,
            });
        }
        let dense: Vec<DenseTensor> = self
            .tensors
            .iter()
            .map(|t| t.to_dense())
            .collect::<Result<_>>()?;
        let mut total = Complex64::new(0.0, 0.0);
        for assign in 0u64..(1u64 << self.n_edges) {
            let mut prod = ONE;
            for (v, ends) in self.incidence.iter().enumerate() {
                let mut local = 0u32;
                for (slot, e) in ends.iter().enumerate() {
                    if assign >> e.edge & 1 == 1 {
                        local |= 1 << slot;
                    }
                }
                prod *= dense[v].get(local);
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            total += prod;
        }
        Ok(total)
    }

    /// Positions in `u`'s rotation of the edges joining `u` and `v`.
    fn shared_positions(&self, u: usize, v: usize) -> Vec<usize> {
        self.incidence[u]
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                let [a, b] = self.edge_ends(e.edge);
                (a.0 == u && b.0 == v) || (a.0 == v && b.0 == u)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Contracts all edges joining adjacent vertices `u` and `v` lying in a
    /// disk: the parallel edges must be cyclically consecutive at both
    /// endpoints, with mutually reversed order. Applies the needed cyclic
    /// shifts itself, computes the contracted tensor in canonical form
    /// through one Gaussian integral, and returns the reduced network
    /// (vertex ids above `v` shift down by one; edge ids are compacted
    /// preserving order).
    pub fn contract_edge_pair(&self, u: usize, v: usize) -> Result<TensorNetwork> {
        if u == v {
            return Err(Error::BadNetwork(
                "contract_edge_pair needs two distinct vertices; use contract_self_loops".into(),
            ));
        }
        let shared_u = self.shared_positions(u, v);
        let b = shared_u.len();
        if b == 0 {
            return Err(Error::BadNetwork(format!(
                "vertices {u} and {v} are not adjacent"
            )));
        }
        let du = self.incidence[u].len();
        let dv = self.incidence[v].len();
        let su = cyclic_run_start(&shared_u, du).ok_or_else(|| {
            Error::NotDiskContractible(format!(
                "edges between {u} and {v} interleave with other edges at {u}"
            ))
        })?;
        let shared_v = self.shared_positions(v, u);
        let sv = cyclic_run_start(&shared_v, dv).ok_or_else(|| {
            Error::NotDiskContractible(format!(
                "edges between {u} and {v} interleave with other edges at {v}"
            ))
        })?;

        let gu = self.tensors[u].to_canonical(1e-9)?;
        let gv = self.tensors[v].to_canonical(1e-9)?;

        // Cyclic shifts: the run goes to the tail of u, to the head of v.
        let ku_shift = (su + b) % du;
        let kv_shift = sv % dv;
        let gu = gu.cyclic_shift_by(ku_shift)?;
        let gv = gv.cyclic_shift_by(kv_shift)?;
        let rot_u: Vec<EdgeEnd> = (0..du)
            .map(|i| self.incidence[u][(i + ku_shift) % du])
            .collect();
        let rot_v: Vec<EdgeEnd> = (0..dv)
            .map(|i| self.incidence[v][(i + kv_shift) % dv])
            .collect();

        // Anti-alignment: u's last run slot meets v's first run slot.
        let p = du - b;
        let q = dv - b;
        for j in 0..b {
            if rot_u[p + j].edge != rot_v[b - 1 - j].edge {
                return Err(Error::NotDiskContractible(format!(
                    "parallel edges between {u} and {v} are not reversed between the two rotations"
                )));
            }
        }

        let merged = convolve_canonical(&gu, &gv, b)?;

        // Rebuild the network without the contracted edges and vertex v.
        let dropped: Vec<usize> = rot_u[p..].iter().map(|e| e.edge).collect();
        let mut edge_map = vec![usize::MAX; self.n_edges];
        let mut next = 0usize;
        for e in 0..self.n_edges {
            if !dropped.contains(&e) {
                edge_map[e] = next;
                next += 1;
            }
        }
        let remap = |ends: &[EdgeEnd]| -> Vec<EdgeEnd> {
            ends.iter()
                .map(|e| EdgeEnd {
                    edge: edge_map[e.edge],
                    end: e.end,
                })
                .collect()
        };
        let mut new_inc = Vec::new();
        let mut new_tensors = Vec::new();
        for w in 0..self.incidence.len() {
            if w == v {
                continue;
            }
            if w == u {
                let mut ends = Vec::with_capacity(p + q);
                ends.extend_from_slice(&rot_u[..p]);
                ends.extend_from_slice(&rot_v[b..]);
                new_inc.push(remap(&ends));
                new_tensors.push(merged.clone());
            } else {
                new_inc.push(remap(&self.incidence[w]));
                new_tensors.push(self.tensors[w].clone());
            }
        }
        let cut = self.planar_cut.as_ref().map(|c| {
            c.iter()
                .filter(|&&e| edge_map[e] != usize::MAX)
                .map(|&e| edge_map[e])
                .collect()
        });
        TensorNetwork::new(self.genus, new_inc, next, new_tensors, cut)
    }

    /// Contracts every disk-contractible self-loop at `u`, innermost first:
    /// a loop is contractible when its two ends become cyclically adjacent
    /// once inner loops are gone. Loops that never become adjacent represent
    /// non-trivial homotopy classes and are rejected.
    pub fn contract_self_loops(&self, u: usize) -> Result<TensorNetwork> {
        let mut net = self.clone();
        loop {
            let ends = &net.incidence[u];
            let d = ends.len();
            let mut has_loop = false;
            for e in ends {
                let [a, b] = net.edge_ends(e.edge);
                if a.0 == u && b.0 == u {
                    has_loop = true;
                    break;
                }
            }
            if !has_loop {
                return Ok(net);
            }
            let mut found = None;
            for i in 0..d {
                let j = (i + 1) % d;
                if ends[i].edge == ends[j].edge {
                    found = Some(i);
                    break;
                }
            }
            let Some(pos) = found else {
                return Err(Error::NotDiskContractible(format!(
                    "self-loops at vertex {u} are interleaved (non-trivial homotopy class)"
                )));
            };
            net = net.contract_one_loop(u, pos)?;
        }
    }

    /// Replaces the self-loop whose ends sit at cyclic positions
    /// (pos, pos+1) of `u` by a dummy identity vertex and contracts it away.
    fn contract_one_loop(&self, u: usize, pos: usize) -> Result<TensorNetwork> {
        let d = self.incidence[u].len();
        let loop_edge = self.incidence[u][pos].edge;
        let fresh = self.n_edges;
        let mut inc = self.incidence.clone();
        let slot_a = pos;
        let slot_b = (pos + 1) % d;
        inc[u][slot_a] = EdgeEnd {
            edge: loop_edge,
            end: 0,
        };
        inc[u][slot_b] = EdgeEnd { edge: fresh, end: 0 };
        // Reversed alignment at the dummy: its first slot carries the edge
        // at u's later run position.
        inc.push(vec![
            EdgeEnd { edge: fresh, end: 1 },
            EdgeEnd {
                edge: loop_edge,
                end: 1,
            },
        ]);
        let mut tensors = self.tensors.clone();
        let delta =
            CanonicalMatchgate::new(SkewMatrix::from_upper(2, &[ONE])?, CMat::zeros(0, 2), ONE)?;
        tensors.push(VertexTensor::Canonical(delta));
        let net = TensorNetwork::new(
            self.genus,
            inc,
            self.n_edges + 1,
            tensors,
            self.planar_cut.clone(),
        )?;
        net.contract_edge_pair(u, net.n_vertices() - 1)
    }
}

/// Start of the cyclic run formed by `positions` within a rotation of
/// length `d`, or `None` if they are not cyclically consecutive.
fn cyclic_run_start(positions: &[usize], d: usize) -> Option<usize> {
    let b = positions.len();
    let set: std::collections::HashSet<usize> = positions.iter().copied().collect();
    if set.len() != b {
        return None;
    }
    if b == d {
        return Some(0);
    }
    'starts: for &s in positions {
        // s is a run start iff s−1 is not in the set and s..s+b are.
        if set.contains(&((s + d - 1) % d)) {
            continue;
        }
        for j in 0..b {
            if !set.contains(&((s + j) % d)) {
                continue 'starts;
            }
        }
        return Some(s);
    }
    None
}

/// Convolution of two canonical matchgates over the last b indexes of `gu`
/// against the first b indexes of `gv` (anti-aligned, already shifted into
/// place). One Gaussian integral over the internal pairs and both μ blocks;
/// the internal variable ordering is chosen so the integral conventions
/// leave no residual sign.
pub(crate) fn convolve_canonical(
    gu: &CanonicalMatchgate,
    gv: &CanonicalMatchgate,
    b: usize,
) -> Result<VertexTensor> {
    let du = gu.rank();
    let dv = gv.rank();
    if b > du || b > dv {
        return Err(Error::RankMismatch {
            got: b,
            expected: du.min(dv),
        });
    }
    let p = du - b;
    let q = dv - b;
    let ku = gu.k();
    let kv = gv.k();
    let m = p + q;
    let dim = kv + ku + 2 * b;

    // Internal vector: (μ_v, μ_u, x_{u,p}, x_{v,b−1}, x_{u,p+1}, x_{v,b−2},
    // …, x_{u,p+b−1}, x_{v,0}); externals: (x_{u,0..p}, x_{v,b..b+q}).
    let pos_mu_v = |r: usize| r;
    let pos_mu_u = |r: usize| kv + r;
    let pos_xu = |slot: usize| kv + ku + 2 * (slot - p);
    let pos_xv = |slot: usize| kv + ku + 2 * (b - 1 - slot) + 1;
    let col_u = |slot: usize| slot;
    let col_v = |slot: usize| p + (slot - b);

    let mut kmat = CMat::zeros(dim, dim);
    let mut lmat = CMat::zeros(dim, m);
    let mut hmat = CMat::zeros(m, m);

    // Placement of a slot: internal position or external column.
    enum Place {
        Int(usize),
        Ext(usize),
    }
    let u_place = |slot: usize| {
        if slot >= p {
            Place::Int(pos_xu(slot))
        } else {
            Place::Ext(col_u(slot))
        }
    };
    let v_place = |slot: usize| {
        if slot < b {
            Place::Int(pos_xv(slot))
        } else {
            Place::Ext(col_v(slot))
        }
    };
    // Coefficient of the ordered product var_a · var_b.
    let mut add_pair = |a: Place, bp: Place, c: Complex64| match (a, bp) {
        (Place::Int(pa), Place::Int(pb)) => {
            kmat[(pa, pb)] += c;
            kmat[(pb, pa)] -= c;
        }
        (Place::Int(pa), Place::Ext(cb)) => lmat[(pa, cb)] += c,
        (Place::Ext(ca), Place::Int(pb)) => lmat[(pb, ca)] -= c,
        (Place::Ext(ca), Place::Ext(cb)) => {
            hmat[(ca, cb)] += c;
            hmat[(cb, ca)] -= c;
        }
    };

    for i in 0..du {
        for j in (i + 1)..du {
            let c = gu.a().get(i, j);
            if c != Complex64::new(0.0, 0.0) {
                add_pair(u_place(i), u_place(j), c);
            }
        }
    }
    for i in 0..dv {
        for j in (i + 1)..dv {
            let c = gv.a().get(i, j);
            if c != Complex64::new(0.0, 0.0) {
                add_pair(v_place(i), v_place(j), c);
            }
        }
    }
    for r in 0..ku {
        for j in 0..du {
            let c = gu.b()[(r, j)];
            if c != Complex64::new(0.0, 0.0) {
                add_pair(Place::Int(pos_mu_u(r)), u_place(j), c);
            }
        }
    }
    for r in 0..kv {
        for j in 0..dv {
            let c = gv.b()[(r, j)];
            if c != Complex64::new(0.0, 0.0) {
                add_pair(Place::Int(pos_mu_v(r)), v_place(j), c);
            }
        }
    }
    // Edge pairing terms: x_{u, p+b−1−j} · x_{v, j}, coefficient +1.
    for j in 0..b {
        add_pair(Place::Int(pos_xu(p + b - 1 - j)), Place::Int(pos_xv(j)), ONE);
    }

    let kskew = SkewMatrix::new_canonicalized(kmat);
    let gf = gaussian_integral_closed(&kskew, &lmat)?;
    let parity = Parity::from_k(gu.k() + gv.k());
    let c_new = gu.c() * gv.c() * gf.prefactor;
    if gf.is_zero || residual_deficient(&gf.residual) || c_new == Complex64::new(0.0, 0.0) {
        return Ok(VertexTensor::Dense(DenseTensor::zeros(m)?));
    }
    let a_new = SkewMatrix::new_canonicalized(hmat + gf.quad.as_matrix());
    let g = CanonicalMatchgate::new_lax(a_new, gf.residual.clone(), c_new)?;
    debug_assert_eq!(g.parity(), parity);
    Ok(VertexTensor::Canonical(repair_gauge(g)))
}

/// True when the residual coupling rows are linearly dependent, which makes
/// the whole integral vanish.
pub(crate) fn residual_deficient(residual: &CMat) -> bool {
    let r = residual.nrows();
    if r == 0 {
        return false;
    }
    if r > residual.ncols() {
        return true;
    }
    let svd = residual.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return true;
    }
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    svd.singular_values.len() < r || smin < 1e-10 * smax
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchgate::check_matchgate;
    use num_complex::Complex64 as C;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn pair_tensor(w: C) -> DenseTensor {
        let mut t = DenseTensor::zeros(2).unwrap();
        t.set(0b00, c(1.0, 0.0));
        t.set(0b11, w);
        t
    }

    /// Direct summation oracle: contract the last b indexes of `tu` against
    /// the first b indexes of `tv`, reversed.
    fn dense_pair_oracle(tu: &DenseTensor, tv: &DenseTensor, b: usize) -> DenseTensor {
        let du = tu.rank();
        let dv = tv.rank();
        let p = du - b;
        let q = dv - b;
        let mut out = DenseTensor::zeros(p + q).unwrap();
        for x in 0..(1u32 << p) {
            for y in 0..(1u32 << q) {
                let mut acc = c(0.0, 0.0);
                for z in 0..(1u32 << b) {
                    let mut um = x;
                    for j in 0..b {
                        if z >> j & 1 == 1 {
                            um |= 1 << (p + (b - 1 - j));
                        }
                    }
                    let vm = z | (y << b);
                    acc += tu.get(um) * tv.get(vm);
                }
                out.set(x | (y << p), acc);
            }
        }
        out
    }

    #[test]
    fn bruteforce_examples() {
        let net = TensorNetwork::new(
            0,
            vec![vec![]],
            0,
            vec![VertexTensor::Dense(DenseTensor::scalar(c(2.5, -1.0)))],
            None,
        )
        .unwrap();
        assert_eq!(net.contract_bruteforce().unwrap(), c(2.5, -1.0));

        let w = c(0.3, 0.4);
        let net = TensorNetwork::new(
            0,
            vec![
                vec![EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 1, end: 0 }],
                vec![EdgeEnd { edge: 1, end: 1 }, EdgeEnd { edge: 0, end: 1 }],
            ],
            2,
            vec![
                VertexTensor::Dense(pair_tensor(w)),
                VertexTensor::Dense(pair_tensor(w)),
            ],
            None,
        )
        .unwrap();
        let got = net.contract_bruteforce().unwrap();
        let expect = c(1.0, 0.0) + w * w;
        assert!((got - expect).norm() < 1e-14);

        let net = TensorNetwork::new(
            0,
            vec![
                vec![EdgeEnd { edge: 0, end: 0 }],
                vec![EdgeEnd { edge: 0, end: 1 }],
            ],
            1,
            vec![
                VertexTensor::Dense(DenseTensor::zeros(1).unwrap()),
                VertexTensor::Dense({
                    let mut t = DenseTensor::zeros(1).unwrap();
                    t.set(1, c(1.0, 0.0));
                    t
                }),
            ],
            None,
        )
        .unwrap();
        assert_eq!(net.contract_bruteforce().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn two_vertex_full_contraction() {
        // both parallel edges at once: scalar 1 + w1·w2
        let w1 = c(0.7, 0.1);
        let w2 = c(-0.2, 0.5);
        let net = TensorNetwork::new(
            0,
            vec![
                vec![EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 1, end: 0 }],
                vec![EdgeEnd { edge: 1, end: 1 }, EdgeEnd { edge: 0, end: 1 }],
            ],
            2,
            vec![
                VertexTensor::Dense(pair_tensor(w1)),
                VertexTensor::Dense(pair_tensor(w2)),
            ],
            None,
        )
        .unwrap();
        let direct = net.contract_bruteforce().unwrap();
        let reduced = net.contract_edge_pair(0, 1).unwrap();
        assert_eq!(reduced.n_vertices(), 1);
        assert_eq!(reduced.n_edges(), 0);
        let value = reduced.contract_bruteforce().unwrap();
        assert!((value - direct).norm() < 1e-10, "{value} vs {direct}");
    }

    #[test]
    fn triangle_chain_contractions() {
        // 3-cycle of rank-2 tensors: contract pairwise down to a scalar.
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..10 {
            let ws: Vec<C> = (0..3)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let net = TensorNetwork::new(
                0,
                vec![
                    vec![EdgeEnd { edge: 2, end: 1 }, EdgeEnd { edge: 0, end: 0 }],
                    vec![EdgeEnd { edge: 0, end: 1 }, EdgeEnd { edge: 1, end: 0 }],
                    vec![EdgeEnd { edge: 1, end: 1 }, EdgeEnd { edge: 2, end: 0 }],
                ],
                3,
                vec![
                    VertexTensor::Dense(pair_tensor(ws[0])),
                    VertexTensor::Dense(pair_tensor(ws[1])),
                    VertexTensor::Dense(pair_tensor(ws[2])),
                ],
                None,
            )
            .unwrap();
            let direct = net.contract_bruteforce().unwrap();
            let step = net.contract_edge_pair(0, 1).unwrap();
            assert_eq!(step.n_vertices(), 2);
            let mid = step.contract_bruteforce().unwrap();
            assert!((direct - mid).norm() < 1e-10);
            let fin = step.contract_edge_pair(0, 1).unwrap();
            let v = fin.contract_bruteforce().unwrap();
            assert!((direct - v).norm() < 1e-9, "{direct} vs {v}");
        }
    }

    #[test]
    fn random_pair_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for trial in 0..40 {
            let b = rng.gen_range(1..=3usize);
            let du = rng.gen_range(b..=6);
            let dv = rng.gen_range(b..=6);
            let ku = rng.gen_range(0..=du);
            let kv = rng.gen_range(0..=dv);
            let gu = crate::matchgate::test_support::random_canonical(&mut rng, du, ku);
            let gv = crate::matchgate::test_support::random_canonical(&mut rng, dv, kv);
            let merged = convolve_canonical(&gu, &gv, b).unwrap();
            let got = merged.to_dense().unwrap();
            let expect = dense_pair_oracle(&gu.to_dense().unwrap(), &gv.to_dense().unwrap(), b);
            let scale = expect.max_abs().max(1e-12);
            for mask in 0..(1u32 << (du + dv - 2 * b)) {
                assert!(
                    (got.get(mask) - expect.get(mask)).norm() < 1e-8 * scale,
                    "trial {trial} b={b} du={du} dv={dv} mask={mask:b}: {} vs {}",
                    got.get(mask),
                    expect.get(mask)
                );
            }
            if !got.is_zero() {
                assert!(check_matchgate(&got, 1e-7).is_matchgate, "trial {trial}");
            }
        }
    }

    #[test]
    fn self_loop_trace() {
        let w = c(0.25, -0.75);
        let net = TensorNetwork::new(
            0,
            vec![vec![EdgeEnd { edge: 0, end: 0 }, EdgeEnd { edge: 0, end: 1 }]],
            1,
            vec![VertexTensor::Dense(pair_tensor(w))],
            None,
        )
        .unwrap();
        let direct = net.contract_bruteforce().unwrap();
        assert!((direct - (c(1.0, 0.0) + w)).norm() < 1e-14);
        let reduced = net.contract_self_loops(0).unwrap();
        assert_eq!(reduced.n_vertices(), 1);
        assert_eq!(reduced.n_edges(), 0);
        let v = reduced.contract_bruteforce().unwrap();
        assert!((v - direct).norm() < 1e-10, "{v} vs {direct}");
    }

    #[test]
    fn nested_loops_match_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let k = 2 * rng.gen_range(0..=2usize);
            let g = crate::matchgate::test_support::random_canonical(&mut rng, 4, k);
            let net = TensorNetwork::new(
                0,
                vec![vec![
                    EdgeEnd { edge: 0, end: 0 },
                    EdgeEnd { edge: 1, end: 0 },
                    EdgeEnd { edge: 1, end: 1 },
                    EdgeEnd { edge: 0, end: 1 },
                ]],
                2,
                vec![VertexTensor::Canonical(g)],
                None,
            )
            .unwrap();
            let direct = net.contract_bruteforce().unwrap();
            let reduced = net.contract_self_loops(0).unwrap();
            let v = reduced.contract_bruteforce().unwrap();
            assert!(
                (v - direct).norm() < 1e-9 * direct.norm().max(1.0),
                "{v} vs {direct}"
            );
        }
    }

    #[test]
    fn interleaved_loops_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let g = crate::matchgate::test_support::random_canonical(&mut rng, 4, 0);
        let net = TensorNetwork::new(
            1,
            vec![vec![
                EdgeEnd { edge: 0, end: 0 },
                EdgeEnd { edge: 1, end: 0 },
                EdgeEnd { edge: 0, end: 1 },
                EdgeEnd { edge: 1, end: 1 },
            ]],
            2,
            vec![VertexTensor::Canonical(g)],
            None,
        )
        .unwrap();
        assert!(matches!(
            net.contract_self_loops(0),
            Err(Error::NotDiskContractible(_))
        ));
    }

    #[test]
    fn degree_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let gu = crate::matchgate::test_support::random_canonical(&mut rng, 5, 1);
        let gv = crate::matchgate::test_support::random_canonical(&mut rng, 3, 1);
        // u carries a self-loop pair (slots 0,1) plus three edges to v,
        // reversed at v.
        let net = TensorNetwork::new(
            0,
            vec![
                vec![
                    EdgeEnd { edge: 3, end: 0 },
                    EdgeEnd { edge: 3, end: 1 },
                    EdgeEnd { edge: 0, end: 0 },
                    EdgeEnd { edge: 1, end: 0 },
                    EdgeEnd { edge: 2, end: 0 },
                ],
                vec![
                    EdgeEnd { edge: 2, end: 1 },
                    EdgeEnd { edge: 1, end: 1 },
                    EdgeEnd { edge: 0, end: 1 },
                ],
            ],
            4,
            vec![VertexTensor::Canonical(gu), VertexTensor::Canonical(gv)],
            None,
        )
        .unwrap();
        let direct = net.contract_bruteforce().unwrap();
        let merged = net.contract_edge_pair(0, 1).unwrap();
        // d(u⋆v) = 5 + 3 − 2·3 = 2
        assert_eq!(merged.incidence(0).len(), 2);
        let after = merged.contract_bruteforce().unwrap();
        assert!((after - direct).norm() < 1e-9 * direct.norm().max(1.0));
    }
}
