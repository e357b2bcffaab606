//! End-to-end contraction: stage one contracts the planar-cut subnetwork in
//! one shot into a single rank-2m matchgate, stage two pairs the cut-edge
//! stubs as a chord diagram and evaluates at most 2^{2g} Pfaffians. Also
//! houses the instance generators (matching sums, Ising partition
//! functions, random matchgate networks).

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::genus::{contract_single_vertex, PairingGraph};
use crate::linalg::SkewMatrix;
use crate::matchgate::CanonicalMatchgate;
use crate::network::{EdgeEnd, TensorNetwork, VertexTensor};
use crate::planar::{contract_open_network, OpenNetwork, Slot};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Outcome of the two-stage contraction.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub value: Complex64,
    /// Dimension of the planar-stage Gaussian integral.
    pub planar_matrix_dim: usize,
    /// GF(2) rank of the cut-edge intersection matrix.
    pub genus_rank: usize,
    /// Pfaffian terms evaluated in stage two.
    pub pfaffian_terms: usize,
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
    /// Direct-summation value when a cross-check was requested.
    pub bruteforce_value: Option<Complex64>,
}

/// Contracts a matchgate tensor network with a declared planar cut. With an
/// empty (or absent) cut this is the purely planar one-shot path; cut edges
/// turn into boundary stubs paired by the genus stage.
pub fn contract(net: &TensorNetwork) -> Result<ContractionReport> {
    contract_with_options(net, false)
}

pub fn contract_with_options(
    net: &TensorNetwork,
    bruteforce_check: bool,
) -> Result<ContractionReport> {
    // The genus implied by the rotation system must not exceed the tag.
    let skeleton = crate::planar::PlanarGraph::new(
        (0..net.n_vertices())
            .map(|v| {
                net.incidence(v)
                    .iter()
                    .map(|e| Slot::Edge {
                        edge: e.edge,
                        end: e.end,
                    })
                    .collect()
            })
            .collect(),
        vec![ONE; net.n_edges()],
        0,
    )?;
    let chi = skeleton.euler_characteristic();
    let derived_genus = (2 - chi) / 2;
    if derived_genus > net.genus() as isize {
        return Err(Error::BadNetwork(format!(
            "rotation system needs genus {derived_genus}, network declares {}",
            net.genus()
        )));
    }

    let cut: Vec<usize> = net.planar_cut().map(|c| c.to_vec()).unwrap_or_default();
    let mut is_cut = vec![false; net.n_edges()];
    for &e in &cut {
        if e >= net.n_edges() {
            return Err(Error::BadCut(format!("cut edge {e} does not exist")));
        }
        if is_cut[e] {
            return Err(Error::BadCut(format!("cut edge {e} repeated")));
        }
        is_cut[e] = true;
    }

    // Open network: cut-edge ends become stubs 2i (end 0) and 2i+1 (end 1).
    let mut cut_index = vec![usize::MAX; net.n_edges()];
    for (i, &e) in cut.iter().enumerate() {
        cut_index[e] = i;
    }
    let mut edge_map = vec![usize::MAX; net.n_edges()];
    let mut kept = 0;
    for e in 0..net.n_edges() {
        if !is_cut[e] {
            edge_map[e] = kept;
            kept += 1;
        }
    }
    let rotations: Vec<Vec<Slot>> = (0..net.n_vertices())
        .map(|v| {
            net.incidence(v)
                .iter()
                .map(|&EdgeEnd { edge, end }| {
                    if is_cut[edge] {
                        Slot::Stub {
                            stub: 2 * cut_index[edge] + end as usize,
                        }
                    } else {
                        Slot::Edge {
                            edge: edge_map[edge],
                            end,
                        }
                    }
                })
                .collect()
        })
        .collect();
    let open = OpenNetwork::new(rotations, kept, 2 * cut.len(), net.tensors().to_vec())
        .map_err(|e| match e {
            Error::BadNetwork(s) => Error::BadCut(s),
            other => other,
        })?;

    let t1 = Instant::now();
    let stage1 = contract_open_network(&open).map_err(|e| match e {
        Error::NotPlanar(s) => Error::BadCut(format!("cut does not leave a disk network: {s}")),
        Error::Disconnected => Error::BadCut("cut leaves a disconnected network".into()),
        other => other,
    })?;
    let stage1_seconds = t1.elapsed().as_secs_f64();

    let m = cut.len();
    let t2 = Instant::now();
    let (value, genus_rank, pfaffian_terms) = match &stage1.tensor {
        None => (ZERO, 0, 0),
        Some(g) if m == 0 => (g.c(), 0, 1),
        Some(g) => {
            // Chord diagram: stub positions along the boundary, paired per
            // cut edge.
            let mut pos_of_stub = vec![usize::MAX; 2 * m];
            for (pos, &s) in stage1.stub_order.iter().enumerate() {
                pos_of_stub[s] = pos;
            }
            let pairs: Vec<(usize, usize)> = (0..m)
                .map(|i| {
                    let a = pos_of_stub[2 * i];
                    let b = pos_of_stub[2 * i + 1];
                    (a.min(b), a.max(b))
                })
                .collect();
            let pairing = PairingGraph::new(pairs)?;
            let out = contract_single_vertex(g, &pairing)?;
            (out.value, out.rank, out.terms)
        }
    };
    let stage2_seconds = t2.elapsed().as_secs_f64();

    if genus_rank > 2 * net.genus() {
        return Err(Error::BadCut(format!(
            "intersection rank {genus_rank} exceeds 2·genus = {}",
            2 * net.genus()
        )));
    }

    let bruteforce_value = if bruteforce_check {
        Some(net.contract_bruteforce()?)
    } else {
        None
    };

    Ok(ContractionReport {
        value,
        planar_matrix_dim: stage1.matrix_dim,
        genus_rank,
        pfaffian_terms,
        stage1_seconds,
        stage2_seconds,
        bruteforce_value,
    })
}

/// A weighted graph with a counterclockwise rotation system, as consumed by
/// the generators.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    pub genus: usize,
    /// Counterclockwise incidence lists.
    pub incidence: Vec<Vec<EdgeEnd>>,
    pub weights: Vec<Complex64>,
    /// Edges wrapping the surface handles (the natural planar cut).
    pub cut: Vec<usize>,
}

/// Turns a weighted graph into a matching-sum network: every vertex gets a
/// linear tensor, and each edge weight rides on its smaller-id endpoint, so
/// the contraction value is the perfect-matching sum PerfMatch(G, ∅).
pub fn gen_matching_network(g: &WeightedGraph) -> Result<TensorNetwork> {
    let nv = g.incidence.len();
    let mut endpoint0 = vec![usize::MAX; g.weights.len()];
    let mut endpoint1 = vec![usize::MAX; g.weights.len()];
    for (v, ends) in g.incidence.iter().enumerate() {
        for e in ends {
            if e.end == 0 {
                endpoint0[e.edge] = v;
            } else {
                endpoint1[e.edge] = v;
            }
        }
    }
    let mut tensors = Vec::with_capacity(nv);
    for (v, ends) in g.incidence.iter().enumerate() {
        let mut w = Vec::with_capacity(ends.len());
        for e in ends {
            let (a, b) = (endpoint0[e.edge], endpoint1[e.edge]);
            if a == b {
                return Err(Error::BadNetwork(
                    "matching-sum generator rejects self-loops".into(),
                ));
            }
            let carrier = a.min(b);
            w.push(if v == carrier { g.weights[e.edge] } else { ONE });
        }
        tensors.push(VertexTensor::Canonical(CanonicalMatchgate::linear(&w)?));
    }
    TensorNetwork::new(
        g.genus,
        g.incidence.clone(),
        g.weights.len(),
        tensors,
        Some(g.cut.clone()),
    )
}

/// Ising partition function as a matchgate network through the
/// high-temperature expansion: every vertex carries the even-subgraph
/// indicator (all even-weight components 1), every edge folds in
/// tanh(βJ_e) by rescaling one endpoint variable, and
/// Z = 2^{|V|}·Π_e cosh(βJ_e) × contraction value.
pub fn gen_ising_network(g: &WeightedGraph) -> Result<(TensorNetwork, Complex64)> {
    let nv = g.incidence.len();
    let mut endpoint0 = vec![usize::MAX; g.weights.len()];
    let mut endpoint1 = vec![usize::MAX; g.weights.len()];
    for (v, ends) in g.incidence.iter().enumerate() {
        for e in ends {
            if e.end == 0 {
                endpoint0[e.edge] = v;
            } else {
                endpoint1[e.edge] = v;
            }
        }
    }
    let mut prefactor = Complex64::new(2f64.powi(nv as i32), 0.0);
    for &w in &g.weights {
        prefactor *= w.cosh();
    }
    let mut tensors = Vec::with_capacity(nv);
    for (v, ends) in g.incidence.iter().enumerate() {
        let d = ends.len();
        if d > 8 {
            return Err(Error::SizeLimit {
                what: "Ising vertex degree",
                got: d,
                limit: 8,
            });
        }
        // even indicator: exp(½θᵀJθ) with all upper entries 1, rescaled by
        // tanh at the carrier endpoints
        let mut scale = vec![ONE; d];
        for (i, e) in ends.iter().enumerate() {
            let (a, b) = (endpoint0[e.edge], endpoint1[e.edge]);
            if a == b {
                return Err(Error::BadNetwork(
                    "Ising generator rejects self-loops".into(),
                ));
            }
            if v == a.min(b) {
                scale[i] = g.weights[e.edge].tanh();
            }
        }
        let mut a = SkewMatrix::zeros(d);
        for i in 0..d {
            for j in (i + 1)..d {
                a.set(i, j, scale[i] * scale[j]);
            }
        }
        tensors.push(VertexTensor::Canonical(CanonicalMatchgate::new(
            a,
            crate::linalg::CMat::zeros(0, d),
            ONE,
        )?));
    }
    let net = TensorNetwork::new(
        g.genus,
        g.incidence.clone(),
        g.weights.len(),
        tensors,
        Some(g.cut.clone()),
    )?;
    Ok((net, prefactor))
}

/// Direct spin-sum oracle for small Ising instances: Σ_s Π_e exp(βJ_e s_u s_v).
pub fn ising_spin_sum(g: &WeightedGraph) -> Complex64 {
    let nv = g.incidence.len();
    let mut endpoint0 = vec![usize::MAX; g.weights.len()];
    let mut endpoint1 = vec![usize::MAX; g.weights.len()];
    for (v, ends) in g.incidence.iter().enumerate() {
        for e in ends {
            if e.end == 0 {
                endpoint0[e.edge] = v;
            } else {
                endpoint1[e.edge] = v;
            }
        }
    }
    let mut z = ZERO;
    for s in 0u64..(1 << nv) {
        let mut energy = ZERO;
        for e in 0..g.weights.len() {
            let su = if s >> endpoint0[e] & 1 == 1 { 1.0 } else { -1.0 };
            let sv = if s >> endpoint1[e] & 1 == 1 { 1.0 } else { -1.0 };
            energy += g.weights[e] * su * sv;
        }
        z += energy.exp();
    }
    z
}

/// A rows×cols grid with counterclockwise rotations; with `torus` the rows
/// and columns wrap, the wrap edges form the planar cut, and the genus tag
/// is 1. Weights are supplied per edge in construction order (all
/// horizontal edges row by row, then all vertical edges).
pub fn grid_graph(rows: usize, cols: usize, torus: bool, weights: &[Complex64]) -> Result<WeightedGraph> {
    let vid = |r: usize, c: usize| r * cols + c;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut cut = Vec::new();
    // horizontal edges (east-bound), wrapping ones flagged as cut
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((vid(r, c), vid(r, c + 1)));
            } else if torus && cols > 1 {
                cut.push(edges.len());
                edges.push((vid(r, c), vid(r, 0)));
            }
        }
    }
    // vertical edges (south-bound)
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows {
                edges.push((vid(r, c), vid(r + 1, c)));
            } else if torus && rows > 1 {
                cut.push(edges.len());
                edges.push((vid(r, c), vid(0, c)));
            }
        }
    }
    if weights.len() != edges.len() {
        return Err(Error::RankMismatch {
            got: weights.len(),
            expected: edges.len(),
        });
    }
    // ccw rotations: directions E=0, N=1, W=2, S=3 around each vertex (row
    // 0 drawn at the top). On the torus the wrap edges keep the same local
    // directions, which is exactly the standard flat embedding.
    let nv = rows * cols;
    let mut dir_slots: Vec<Vec<(u8, EdgeEnd)>> = vec![Vec::new(); nv];
    let mut horiz_count = 0;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols || (torus && cols > 1) {
                let e = horiz_count;
                horiz_count += 1;
                let a = vid(r, c);
                let b = if c + 1 < cols { vid(r, c + 1) } else { vid(r, 0) };
                dir_slots[a].push((0, EdgeEnd { edge: e, end: 0 }));
                dir_slots[b].push((2, EdgeEnd { edge: e, end: 1 }));
            }
        }
    }
    let mut vert_index = horiz_count;
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows || (torus && rows > 1) {
                let e = vert_index;
                vert_index += 1;
                let a = vid(r, c);
                let b = if r + 1 < rows { vid(r + 1, c) } else { vid(0, c) };
                dir_slots[a].push((3, EdgeEnd { edge: e, end: 0 }));
                dir_slots[b].push((1, EdgeEnd { edge: e, end: 1 }));
            }
        }
    }
    let incidence: Vec<Vec<EdgeEnd>> = dir_slots
        .into_iter()
        .map(|mut v| {
            v.sort_by_key(|(d, _)| *d);
            v.into_iter().map(|(_, e)| e).collect()
        })
        .collect();
    Ok(WeightedGraph {
        genus: if torus { 1 } else { 0 },
        incidence,
        weights: weights.to_vec(),
        cut,
    })
}

/// Random planar matchgate network on a grid skeleton with random edge
/// deletions, used by the CLI and the test corpus.
pub fn gen_random_network(
    seed: u64,
    rows: usize,
    cols: usize,
    keep_probability: f64,
) -> Result<TensorNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_edges_full = (rows * (cols - 1)) + ((rows - 1) * cols);
    let weights = vec![ONE; n_edges_full];
    let g = grid_graph(rows, cols, false, &weights)?;
    // delete random edges, keeping the graph connected
    let nv = rows * cols;
    let mut keep = vec![true; n_edges_full];
    for e in 0..n_edges_full {
        if rng.gen_bool(1.0 - keep_probability) {
            keep[e] = false;
            if !connected_with(&g, &keep, nv) {
                keep[e] = true;
            }
        }
    }
    let mut edge_map = vec![usize::MAX; n_edges_full];
    let mut kept = 0;
    for e in 0..n_edges_full {
        if keep[e] {
            edge_map[e] = kept;
            kept += 1;
        }
    }
    let incidence: Vec<Vec<EdgeEnd>> = g
        .incidence
        .iter()
        .map(|ends| {
            ends.iter()
                .filter(|e| keep[e.edge])
                .map(|e| EdgeEnd {
                    edge: edge_map[e.edge],
                    end: e.end,
                })
                .collect()
        })
        .collect();
    // Pick annihilator dimensions with even total parity so the value does
    // not vanish for trivial parity reasons.
    let mut ks: Vec<usize> = incidence
        .iter()
        .map(|ends| rng.gen_range(0..=ends.len()))
        .collect();
    if ks.iter().sum::<usize>() % 2 == 1 {
        if let Some(k) = ks.iter_mut().find(|k| **k > 0) {
            *k -= 1;
        }
    }
    let tensors: Vec<VertexTensor> = incidence
        .iter()
        .zip(&ks)
        .map(|(ends, &k)| {
            VertexTensor::Canonical(random_canonical_tensor(&mut rng, ends.len(), k))
        })
        .collect();
    TensorNetwork::new(0, incidence, kept, tensors, Some(Vec::new()))
}

fn connected_with(g: &WeightedGraph, keep: &[bool], nv: usize) -> bool {
    let mut endpoint = vec![(usize::MAX, usize::MAX); keep.len()];
    for (v, ends) in g.incidence.iter().enumerate() {
        for e in ends {
            if e.end == 0 {
                endpoint[e.edge].0 = v;
            } else {
                endpoint[e.edge].1 = v;
            }
        }
    }
    let mut adj = vec![Vec::new(); nv];
    for (e, &(a, b)) in endpoint.iter().enumerate() {
        if keep[e] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; nv];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &o in &adj[v] {
            if !seen[o] {
                seen[o] = true;
                count += 1;
                stack.push(o);
            }
        }
    }
    count == nv
}

/// Random matchgate in canonical form with exact B·A = 0 (structural in a
/// rotated frame), used by the random-network generator.
pub fn random_canonical_tensor(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CanonicalMatchgate {
    use crate::linalg::CMat;
    assert!(k <= n);
    let c = Complex64::new;
    let mut m = CMat::zeros(n, n);
    for i in 0..n.saturating_sub(k) {
        for j in (i + 1)..(n - k) {
            let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    let mut bt = CMat::zeros(k, n);
    for r in 0..k {
        bt[(r, n - k + r)] = ONE;
    }
    let real = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = real.qr().q();
    let qc = CMat::from_fn(n, n, |i, j| c(q[(i, j)], 0.0));
    let a = SkewMatrix::new_canonicalized(qc.transpose() * m * &qc);
    let b = bt * &qc;
    let cval = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) + c(1.5, 0.0);
    CanonicalMatchgate::new(a, b, cval).expect("construction satisfies the gauge")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matching_generator_examples() {
        // single edge of weight w → c = w
        let w = c(0.8, 0.4);
        let g = WeightedGraph {
            genus: 0,
            incidence: vec![
                vec![EdgeEnd { edge: 0, end: 0 }],
                vec![EdgeEnd { edge: 0, end: 1 }],
            ],
            weights: vec![w],
            cut: vec![],
        };
        let net = gen_matching_network(&g).unwrap();
        let direct = net.contract_bruteforce().unwrap();
        assert!((direct - w).norm() < 1e-14);
        let report = contract(&net).unwrap();
        assert!((report.value - w).norm() < 1e-10);

        // 4-cycle with unit weights → 2 perfect matchings
        let weights = vec![ONE; 4];
        let g = grid_graph(2, 2, false, &weights).unwrap();
        let net = gen_matching_network(&g).unwrap();
        let report = contract(&net).unwrap();
        assert!((report.value - c(2.0, 0.0)).norm() < 1e-10, "{}", report.value);
    }

    #[test]
    fn planar_contract_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for seed in 0..10 {
            let net = gen_random_network(seed, 2, 3, 0.9).unwrap();
            if net.n_edges() > 20 {
                continue;
            }
            let direct = net.contract_bruteforce().unwrap();
            let report = contract(&net).unwrap();
            assert!(
                (report.value - direct).norm() <= 1e-7 * direct.norm().max(1.0),
                "seed {seed}: {} vs {direct}",
                report.value
            );
        }
        let _ = &mut rng;
    }

    #[test]
    fn two_vertex_torus_matches_bruteforce() {
        // two vertices joined by 2 planar edges and 2 handle-wrapping cut
        // edges: rank-4 tensors, rotation interleaves the wrap edges.
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for trial in 0..10 {
            let ku = 2 * rng.gen_range(0..=2usize);
            let kv = 2 * rng.gen_range(0..=2usize);
            let gu = random_canonical_tensor(&mut rng, 4, ku);
            let gv = random_canonical_tensor(&mut rng, 4, kv);
            // Genuine torus embedding (two faces): planar edges 0,1 bound a
            // lens; cut edges 2,3 wrap the two handle directions.
            // u: [e0, c1, c0, e1], v: [c0, e0, e1, c1].
            let net = TensorNetwork::new(
                1,
                vec![
                    vec![
                        EdgeEnd { edge: 0, end: 0 },
                        EdgeEnd { edge: 3, end: 0 },
                        EdgeEnd { edge: 2, end: 0 },
                        EdgeEnd { edge: 1, end: 0 },
                    ],
                    vec![
                        EdgeEnd { edge: 2, end: 1 },
                        EdgeEnd { edge: 0, end: 1 },
                        EdgeEnd { edge: 1, end: 1 },
                        EdgeEnd { edge: 3, end: 1 },
                    ],
                ],
                4,
                vec![VertexTensor::Canonical(gu), VertexTensor::Canonical(gv)],
                Some(vec![2, 3]),
            )
            .unwrap();
            let direct = net.contract_bruteforce().unwrap();
            let report = contract(&net).unwrap();
            assert!(
                (report.value - direct).norm() <= 1e-7 * direct.norm().max(1.0),
                "trial {trial}: {} vs {direct}",
                report.value
            );
            assert!(report.pfaffian_terms <= 4);
        }
    }

    #[test]
    fn toroidal_matching_grid() {
        // 3×3 torus grid matching sum vs enumeration (edge count 18 ≤ 20)
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let n_edges = 18;
        let weights: Vec<Complex64> = (0..n_edges)
            .map(|_| c(rng.gen_range(0.2..1.0), rng.gen_range(-0.5..0.5)))
            .collect();
        let g = grid_graph(3, 3, true, &weights).unwrap();
        let net = gen_matching_network(&g).unwrap();
        let direct = net.contract_bruteforce().unwrap();
        let report = contract(&net).unwrap();
        assert!(
            (report.value - direct).norm() <= 1e-7 * direct.norm().max(1.0),
            "{} vs {direct}",
            report.value
        );
        assert!(report.pfaffian_terms <= 4);
    }

    #[test]
    fn ising_small_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        // single edge: Z = 2·2·cosh β (1 + tanh β · t1 t2 …) = 4 cosh β + …
        let beta = c(0.37, 0.0);
        let g = WeightedGraph {
            genus: 0,
            incidence: vec![
                vec![EdgeEnd { edge: 0, end: 0 }],
                vec![EdgeEnd { edge: 0, end: 1 }],
            ],
            weights: vec![beta],
            cut: vec![],
        };
        let (net, prefactor) = gen_ising_network(&g).unwrap();
        let z = prefactor * contract(&net).unwrap().value;
        let direct = ising_spin_sum(&g);
        assert!((z - direct).norm() < 1e-9 * direct.norm(), "{z} vs {direct}");

        // zero couplings → Z = 2^{|V|}
        let weights = vec![ZERO; 4];
        let g0 = grid_graph(2, 2, false, &weights).unwrap();
        let (net0, pre0) = gen_ising_network(&g0).unwrap();
        let z0 = pre0 * contract(&net0).unwrap().value;
        assert!((z0 - c(16.0, 0.0)).norm() < 1e-9);

        // 2×3 grid, random couplings
        let weights: Vec<Complex64> = (0..7).map(|_| c(rng.gen_range(-0.6..0.6), 0.0)).collect();
        let g = grid_graph(2, 3, false, &weights).unwrap();
        let (net, prefactor) = gen_ising_network(&g).unwrap();
        let z = prefactor * contract(&net).unwrap().value;
        let direct = ising_spin_sum(&g);
        assert!((z - direct).norm() < 1e-9 * direct.norm(), "{z} vs {direct}");
    }

    #[test]
    fn genus0_cut_on_planar_instance_single_term() {
        // a 2×2 planar grid declared genus 1 with two parallel cut edges
        // that are actually contractible: rank(N) = 0 → one Pfaffian term
        let weights = vec![ONE; 4];
        let g = grid_graph(2, 2, false, &weights).unwrap();
        let mut net = gen_matching_network(&g).unwrap();
        // declare one edge as "cut" even though it is contractible
        let nv = net.n_vertices();
        let _ = nv;
        net.set_planar_cut(Some(vec![0]));
        let mut net = TensorNetwork::new(
            1,
            (0..net.n_vertices()).map(|v| net.incidence(v).to_vec()).collect(),
            net.n_edges(),
            net.tensors().to_vec(),
            Some(vec![0]),
        )
        .unwrap();
        let report = contract(&net).unwrap();
        assert_eq!(report.pfaffian_terms, 1);
        let direct = net.contract_bruteforce().unwrap();
        assert!((report.value - direct).norm() <= 1e-9 * direct.norm().max(1.0));
        net.set_planar_cut(Some(Vec::new()));
    }
}
