//! JSON encodings of tensors, networks, pairings, compiled graphs and
//! contraction reports. Complex numbers are `[re, im]` pairs; all indices
//! are 0-based. Dense tensor values are listed in lexicographic order of
//! the index string x₁x₂…x_n (x₁ most significant).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, SkewMatrix};
use crate::matchgate::{CanonicalMatchgate, DenseTensor, Parity};
use crate::network::{EdgeEnd, TensorNetwork, VertexTensor};
use crate::planar::{KasteleynOrientation, PlanarGraph};

fn cpx(v: Complex64) -> [f64; 2] {
    [v.re, v.im]
}

fn uncpx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Bit-reversal between the internal index (x₁ at bit 0) and the
/// lexicographic position (x₁ most significant).
fn bit_reverse(mask: u32, n: usize) -> u32 {
    let mut out = 0;
    for j in 0..n {
        if mask & (1 << j) != 0 {
            out |= 1 << (n - 1 - j);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
pub struct DenseTensorJson {
    pub rank: usize,
    pub values: Vec<[f64; 2]>,
}

impl DenseTensorJson {
    pub fn from_tensor(t: &DenseTensor) -> Self {
        let n = t.rank();
        let values = (0..(1u32 << n))
            .map(|lex| cpx(t.get(bit_reverse(lex, n))))
            .collect();
        Self { rank: n, values }
    }

    pub fn to_tensor(&self) -> Result<DenseTensor> {
        if self.values.len() != 1 << self.rank {
            return Err(Error::RankMismatch {
                got: self.values.len(),
                expected: 1 << self.rank,
            });
        }
        let mut t = DenseTensor::zeros(self.rank)?;
        for (lex, &v) in self.values.iter().enumerate() {
            t.set(bit_reverse(lex as u32, self.rank), uncpx(v));
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
pub struct CanonicalJson {
    pub n: usize,
    pub k: usize,
    /// Strict upper triangle of A, row-major.
    pub a: Vec<[f64; 2]>,
    /// B, row-major (k rows of n entries).
    pub b: Vec<[f64; 2]>,
    pub c: [f64; 2],
    pub parity: String,
}

impl CanonicalJson {
    pub fn from_tensor(g: &CanonicalMatchgate) -> Self {
        let n = g.rank();
        let mut a = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                a.push(cpx(g.a().get(i, j)));
            }
        }
        let mut b = Vec::with_capacity(g.k() * n);
        for r in 0..g.k() {
            for j in 0..n {
                b.push(cpx(g.b()[(r, j)]));
            }
        }
        Self {
            n,
            k: g.k(),
            a,
            b,
            c: cpx(g.c()),
            parity: match g.parity() {
                Parity::Even => "even".into(),
                Parity::Odd => "odd".into(),
            },
        }
    }

    pub fn to_tensor(&self) -> Result<CanonicalMatchgate> {
        let n = self.n;
        if self.a.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::RankMismatch {
                got: self.a.len(),
                expected: n * n.saturating_sub(1) / 2,
            });
        }
        if self.b.len() != self.k * n {
            return Err(Error::RankMismatch {
                got: self.b.len(),
                expected: self.k * n,
            });
        }
        let upper: Vec<Complex64> = self.a.iter().map(|&v| uncpx(v)).collect();
        let a = SkewMatrix::from_upper(n, &upper)?;
        let b = CMat::from_fn(self.k, n, |r, j| uncpx(self.b[r * n + j]));
        let g = CanonicalMatchgate::new_lax(a, b, uncpx(self.c))?;
        let declared = match self.parity.as_str() {
            "even" => Parity::Even,
            "odd" => Parity::Odd,
            other => {
                return Err(Error::BadNetwork(format!("unknown parity \"{other}\"")));
            }
        };
        if declared != g.parity() {
            return Err(Error::BadNetwork(
                "parity does not match k mod 2".to_string(),
            ));
        }
        Ok(g)
    }
}

/// Either tensor representation, distinguished by its fields.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorJson {
    Dense(DenseTensorJson),
    Canonical(CanonicalJson),
}

impl TensorJson {
    pub fn from_vertex(t: &VertexTensor) -> Self {
        match t {
            VertexTensor::Dense(d) => TensorJson::Dense(DenseTensorJson::from_tensor(d)),
            VertexTensor::Canonical(g) => TensorJson::Canonical(CanonicalJson::from_tensor(g)),
        }
    }

    pub fn to_vertex(&self) -> Result<VertexTensor> {
        match self {
            TensorJson::Dense(d) => Ok(VertexTensor::Dense(d.to_tensor()?)),
            TensorJson::Canonical(c) => Ok(VertexTensor::Canonical(c.to_tensor()?)),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct NetworkVertexJson {
    pub id: usize,
    /// Counterclockwise incidence: (edge id, end slot 0/1).
    pub incidence: Vec<(usize, u8)>,
}

#[derive(Serialize, Deserialize)]
pub struct NetworkEdgeJson {
    pub id: usize,
}

#[derive(Serialize, Deserialize)]
pub struct NetworkJson {
    pub genus: usize,
    pub vertices: Vec<NetworkVertexJson>,
    pub edges: Vec<NetworkEdgeJson>,
    pub tensors: std::collections::BTreeMap<String, TensorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planar_cut: Option<Vec<usize>>,
}

impl NetworkJson {
    pub fn from_network(net: &TensorNetwork) -> Self {
        let vertices = (0..net.n_vertices())
            .map(|v| NetworkVertexJson {
                id: v,
                incidence: net
                    .incidence(v)
                    .iter()
                    .map(|e| (e.edge, e.end))
                    .collect(),
            })
            .collect();
        let edges = (0..net.n_edges()).map(|id| NetworkEdgeJson { id }).collect();
        let tensors = (0..net.n_vertices())
            .map(|v| (v.to_string(), TensorJson::from_vertex(net.tensor(v))))
            .collect();
        Self {
            genus: net.genus(),
            vertices,
            edges,
            tensors,
            planar_cut: net.planar_cut().map(|c| c.to_vec()),
        }
    }

    pub fn to_network(&self) -> Result<TensorNetwork> {
        let nv = self.vertices.len();
        let mut incidence = vec![Vec::new(); nv];
        for v in &self.vertices {
            if v.id >= nv {
                return Err(Error::BadNetwork(format!("vertex id {} out of range", v.id)));
            }
            incidence[v.id] = v
                .incidence
                .iter()
                .map(|&(edge, end)| EdgeEnd { edge, end })
                .collect();
        }
        let mut tensors = Vec::with_capacity(nv);
        for v in 0..nv {
            let t = self
                .tensors
                .get(&v.to_string())
                .ok_or_else(|| Error::BadNetwork(format!("no tensor for vertex {v}")))?;
            tensors.push(t.to_vertex()?);
        }
        TensorNetwork::new(
            self.genus,
            incidence,
            self.edges.len(),
            tensors,
            self.planar_cut.clone(),
        )
    }
}

#[derive(Serialize, Deserialize)]
pub struct PairingJson {
    pub m: usize,
    /// Chords as (l, r) index pairs over 0..2m.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
pub struct GraphEdgeJson {
    pub u: usize,
    pub v: usize,
    pub weight: [f64; 2],
    /// +1 when oriented u→v, −1 otherwise.
    pub orientation: i8,
}

/// CLI-visible dump of a compiled matching-sum graph.
#[derive(Serialize, Deserialize)]
pub struct CompiledGraphJson {
    pub vertices: usize,
    pub edges: Vec<GraphEdgeJson>,
    pub external: Vec<usize>,
}

impl CompiledGraphJson {
    pub fn from_graph(
        g: &PlanarGraph,
        orientation: Option<&KasteleynOrientation>,
        external: &[usize],
    ) -> Self {
        let edges = (0..g.n_edges())
            .map(|e| {
                let (u, v) = g.endpoints(e);
                GraphEdgeJson {
                    u,
                    v,
                    weight: cpx(g.weight(e)),
                    orientation: match orientation {
                        Some(o) => {
                            if o.forward[e] {
                                1
                            } else {
                                -1
                            }
                        }
                        None => 1,
                    },
                }
            })
            .collect();
        Self {
            vertices: g.n_vertices(),
            edges,
            external: external.to_vec(),
        }
    }
}

/// CLI-visible contraction report.
#[derive(Serialize, Deserialize)]
pub struct ReportJson {
    pub value: [f64; 2],
    pub planar_matrix_dim: usize,
    pub genus_rank: usize,
    pub pfaffian_terms: usize,
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bruteforce_value: Option<[f64; 2]>,
}

impl ReportJson {
    pub fn from_report(r: &crate::pipeline::ContractionReport) -> Self {
        Self {
            value: cpx(r.value),
            planar_matrix_dim: r.planar_matrix_dim,
            genus_rank: r.genus_rank,
            pfaffian_terms: r.pfaffian_terms,
            stage1_seconds: r.stage1_seconds,
            stage2_seconds: r.stage2_seconds,
            bruteforce_value: r.bruteforce_value.map(cpx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchgate::test_support::random_canonical;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_round_trip_lexicographic() {
        // order check on a rank-2 tensor: lexicographic = [T(00), T(01),
        // T(10), T(11)] with x₁ the first index
        let mut t = DenseTensor::zeros(2).unwrap();
        t.set(0b01, Complex64::new(1.0, 0.0)); // T(x1=1, x2=0) = T(10)
        let json = DenseTensorJson::from_tensor(&t);
        assert_eq!(json.values[2], [1.0, 0.0]); // position "10"
        let back = json.to_tensor().unwrap();
        assert_eq!(back.get(0b01), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn canonical_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        for (n, k) in [(3, 1), (4, 0), (5, 3)] {
            let g = random_canonical(&mut rng, n, k);
            let json = CanonicalJson::from_tensor(&g);
            let text = serde_json::to_string(&json).unwrap();
            let parsed: CanonicalJson = serde_json::from_str(&text).unwrap();
            let back = parsed.to_tensor().unwrap();
            let d1 = g.to_dense().unwrap();
            let d2 = back.to_dense().unwrap();
            for mask in 0..(1u32 << n) {
                assert!((d1.get(mask) - d2.get(mask)).norm() < 1e-12);
            }
        }
    }
}
