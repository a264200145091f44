//! Benchmark instances: the one-qubit cosine problem and QAOA MaxCut.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{Circuit, DiagonalTerm, Observable, Pauli, PauliString};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= num_vertices {
                    return Err(Error::VertexRange {
                        vertex: w,
                        num_vertices,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
        }
        Ok(Self {
            num_vertices,
            edges,
        })
    }

    /// The 4-cycle 0–1–2–3–0.
    pub fn square() -> Self {
        Self::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).expect("valid square graph")
    }

    /// Edge list with one `u v` pair per line, 0-indexed. Blank lines and
    /// lines starting with `#` are skipped. The vertex count is one more than
    /// the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::Config(format!("line {}: invalid vertex {s:?}", lineno + 1))
                })
            };
            match parts.as_slice() {
                [u, v] => edges.push((parse(u)?, parse(v)?)),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: expected \"u v\", got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::new(n, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of edges cut by the assignment encoded in the bits of `bits`.
    pub fn cut_size(&self, bits: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| ((bits >> u) ^ (bits >> v)) & 1 == 1)
            .count()
    }
}

/// Reference optimum and where it comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum<T> {
    pub value: T,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkProblem<T> {
    pub name: String,
    pub circuit: Circuit,
    pub observable: Observable<T>,
    pub known_optimum: Option<KnownOptimum<T>>,
}

impl<T: Real> BenchmarkProblem<T> {
    pub fn new(
        name: impl Into<String>,
        circuit: Circuit,
        observable: Observable<T>,
        known_optimum: Option<KnownOptimum<T>>,
    ) -> Result<Self> {
        if circuit.num_qubits() != observable.num_qubits() {
            return Err(Error::DimensionMismatch {
                circuit: circuit.num_qubits(),
                observable: observable.num_qubits(),
            });
        }
        Ok(Self {
            name: name.into(),
            circuit,
            observable,
            known_optimum,
        })
    }

    pub fn num_params(&self) -> usize {
        self.circuit.num_params()
    }
}

/// `U(θ) = R_x(θ)` on one qubit with `O = Z`, so `f(θ) = cos θ`.
pub fn make_cosine_problem<T: Real>() -> BenchmarkProblem<T> {
    let mut circuit = Circuit::new(1, 1).expect("one qubit");
    circuit
        .rotation(PauliString::new(vec![Pauli::X]), 0)
        .expect("valid rotation");
    let z = DiagonalTerm::pauli(&PauliString::new(vec![Pauli::Z])).expect("Z term");
    let observable = Observable::new(vec![z]).expect("one term");
    BenchmarkProblem::new(
        "cosine",
        circuit,
        observable,
        Some(KnownOptimum {
            value: -T::one(),
            note: "cos θ attains −1 at θ = π",
        }),
    )
    .expect("dimensions agree")
}

/// Depth-`p` QAOA for MaxCut: `H` on every qubit, then `p` layers of
/// `exp(−iγ_l Z_uZ_v/2)` per edge and `exp(−iβ_l X_q/2)` per qubit. The
/// parameters are ordered `[γ_1, β_1, …, γ_p, β_p]`.
///
/// The observable is `Σ_{(u,v)∈E} Z_uZ_v`, kept as one unit-norm term per
/// edge unless `merge_terms` is set. Minimizing `f` maximizes the cut
/// `(|E| − f)/2`.
pub fn make_maxcut_problem<T: Real>(
    graph: &Graph,
    layers: usize,
    merge_terms: bool,
) -> Result<BenchmarkProblem<T>> {
    if layers == 0 {
        return Err(Error::ZeroDepth);
    }
    if graph.num_edges() == 0 {
        return Err(Error::EmptyObservable);
    }
    let n = graph.num_vertices();
    let mut circuit = Circuit::new(n, 2 * layers)?;
    for q in 0..n {
        circuit.h(q)?;
    }
    for l in 0..layers {
        for &(u, v) in graph.edges() {
            circuit.rotation(PauliString::on(n, &[u, v], Pauli::Z)?, 2 * l)?;
        }
        for q in 0..n {
            circuit.rotation(PauliString::on(n, &[q], Pauli::X)?, 2 * l + 1)?;
        }
    }
    let terms = graph
        .edges()
        .iter()
        .map(|&(u, v)| DiagonalTerm::pauli(&PauliString::on(n, &[u, v], Pauli::Z)?))
        .collect::<Result<Vec<_>>>()?;
    let mut observable = Observable::new(terms)?;
    if merge_terms {
        observable = observable.merged()?;
    }
    let (max_cut, _) = brute_force_maxcut(graph)?;
    let optimum = graph.num_edges() as f64 - 2.0 * max_cut as f64;
    BenchmarkProblem::new(
        format!("maxcut-p{layers}"),
        circuit,
        observable,
        Some(KnownOptimum {
            value: T::lit(optimum),
            note: "ground energy |E| − 2·maxcut of the cost observable; \
                   a shallow ansatz need not reach it",
        }),
    )
}

/// `(|E| − f)/2`
pub fn cut_from_energy<T: Real>(num_edges: usize, f: T) -> T {
    (T::from_count(num_edges as u64) - f) / T::lit(2.0)
}

/// Exhaustive MaxCut. Returns the maximum cut and every assignment reaching
/// it, as bit masks over the vertices.
pub fn brute_force_maxcut(graph: &Graph) -> Result<(usize, Vec<u64>)> {
    let n = graph.num_vertices();
    if n > 20 {
        return Err(Error::TooManyVertices(n));
    }
    let mut best = 0;
    let mut argmax = Vec::new();
    for bits in 0..(1u64 << n) {
        let c = graph.cut_size(bits);
        if c > best {
            best = c;
            argmax.clear();
        }
        if c == best {
            argmax.push(bits);
        }
    }
    Ok((best, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{exact_expectation, hessian_norm_bound, shift_gradient};
    use std::f64::consts::PI;

    #[test]
    fn cosine_problem_values() {
        let p = make_cosine_problem::<f64>();
        assert_eq!(p.num_params(), 1);
        assert_eq!(p.observable.num_terms(), 1);
        assert_eq!(exact_expectation(&p.circuit, &[0.0], &p.observable).unwrap(), 1.0);
        let f = exact_expectation(&p.circuit, &[PI], &p.observable).unwrap();
        assert!((f + 1.0).abs() < 1e-15);
        for i in 0..50 {
            let t = -PI + 2.0 * PI * i as f64 / 49.0;
            let g = shift_gradient(&p.circuit, &[t], &p.observable, 0).unwrap();
            assert!((g + t.sin()).abs() < 1e-10);
        }
        assert_eq!(hessian_norm_bound(&p.observable, 1), 1.0);
    }

    #[test]
    fn maxcut_structure() {
        let p = make_maxcut_problem::<f64>(&Graph::square(), 1, false).unwrap();
        assert_eq!(p.num_params(), 2);
        assert_eq!(p.observable.num_terms(), 4);
        assert!(p.observable.term_norms().iter().all(|&n| n == 1.0));
        assert_eq!(hessian_norm_bound(&p.observable, 2), 8.0);
        assert_eq!(p.known_optimum.as_ref().unwrap().value, -4.0);
        let f = exact_expectation(&p.circuit, &[0.0, 0.0], &p.observable).unwrap();
        assert!(f.abs() < 1e-12);

        let merged = make_maxcut_problem::<f64>(&Graph::square(), 2, true).unwrap();
        assert_eq!(merged.observable.num_terms(), 1);
        assert_eq!(merged.num_params(), 4);
        assert!(make_maxcut_problem::<f64>(&Graph::square(), 0, false).is_err());
    }

    #[test]
    fn uniform_superposition_by_amplitude_sum() {
        // Independent check: |+⟩^⊗4 gives every bitstring weight 1/16, and
        // Σ_b (Σ_edges (−1)^{b_u ⊕ b_v}) = 0 edge by edge.
        let g = Graph::square();
        let total: i64 = (0..16u64)
            .map(|b| g.num_edges() as i64 - 2 * g.cut_size(b) as i64)
            .sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_maxcut(&Graph::square()).unwrap().0, 4);
        let (c, arg) = brute_force_maxcut(&Graph::square()).unwrap();
        assert_eq!(c, 4);
        assert_eq!(arg, vec![0b0101, 0b1010]);
        let k3 = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_maxcut(&k3).unwrap().0, 2);
        let edge = Graph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(brute_force_maxcut(&edge).unwrap().0, 1);
        let big = Graph::new(21, vec![(0, 1)]).unwrap();
        assert_eq!(brute_force_maxcut(&big), Err(Error::TooManyVertices(21)));
    }

    #[test]
    fn observable_minimum_maps_to_max_cut() {
        let g = Graph::square();
        let p = make_maxcut_problem::<f64>(&g, 1, true).unwrap();
        let min = p.observable.terms()[0]
            .diagonal()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        assert_eq!(min, -4.0);
        assert_eq!(cut_from_energy(g.num_edges(), min), 4.0);
    }

    #[test]
    fn graph_validation_and_parsing() {
        assert_eq!(Graph::new(2, vec![(1, 1)]), Err(Error::SelfLoop(1)));
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
        let g = Graph::parse_edge_list("# square\n0 1\n1 2\n\n2 3\n3 0\n").unwrap();
        assert_eq!(g, Graph::square());
        assert!(Graph::parse_edge_list("0 1 2\n").is_err());
        assert!(Graph::parse_edge_list("0 x\n").is_err());
    }
}
