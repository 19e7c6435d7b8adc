//! Conflict graph between factors, maximal independent set enumeration, and
//! selection of the most significant compatible set.

use std::cmp::Ordering;

/// Bitset adjacency for at most 64 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    adjacency: Vec<u64>,
}

pub const MAX_VERTICES: usize = 64;

impl ConflictGraph {
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "conflict graph limited to {MAX_VERTICES} vertices");
        Self { adjacency: vec![0; n] }
    }

    pub fn from_adjacency(adjacency: &[Vec<bool>]) -> Self {
        let mut graph = Self::new(adjacency.len());
        for (a, row) in adjacency.iter().enumerate() {
            for (b, &edge) in row.iter().enumerate() {
                if edge && a != b {
                    graph.add_edge(a, b);
                }
            }
        }
        graph
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert_ne!(a, b);
        self.adjacency[a] |= 1 << b;
        self.adjacency[b] |= 1 << a;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a] >> b & 1 == 1
    }

    /// All maximal independent sets, each as a bitmask, in discovery order.
    ///
    /// Independent sets of the graph are the cliques of its complement, so
    /// this is Bron–Kerbosch with pivoting on the complement.
    pub fn maximal_independent_sets(&self) -> Vec<u64> {
        let n = self.len();
        if n == 0 {
            return vec![0];
        }
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let complement: Vec<u64> = (0..n).map(|v| !self.adjacency[v] & all & !(1 << v)).collect();
        let mut out = Vec::new();
        bron_kerbosch(&complement, 0, all, 0, &mut out);
        out
    }
}

fn bron_kerbosch(neighbors: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    // Pivot on the vertex of P ∪ X with the most neighbours in P.
    let pivot = bits(p | x).max_by_key(|&u| (neighbors[u] & p).count_ones()).expect("P is nonempty");
    for v in bits(p & !neighbors[pivot]) {
        let bit = 1 << v;
        bron_kerbosch(neighbors, r | bit, p & neighbors[v], x & neighbors[v], out);
        p &= !bit;
        x |= bit;
    }
}

fn bits(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (set != 0).then(|| {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            v
        })
    })
}

pub fn members(set: u64) -> Vec<usize> {
    bits(set).collect()
}

/// Picks the maximal independent set with the smallest geometric mean of
/// p-values (compared through the mean of their logs). Ties go to the larger
/// set, then the smaller total residual energy, then the lexicographically
/// smaller member list.
pub fn select_from_graph(graph: &ConflictGraph, log_p: &[f64], energy: &[f64]) -> Vec<usize> {
    assert_eq!(graph.len(), log_p.len());
    assert_eq!(graph.len(), energy.len());
    if graph.is_empty() {
        return Vec::new();
    }
    let score = |set: &[usize]| set.iter().map(|&t| log_p[t]).sum::<f64>() / set.len() as f64;
    let total_energy = |set: &[usize]| set.iter().map(|&t| energy[t]).sum::<f64>();
    let mut best: Option<Vec<usize>> = None;
    for set in graph.maximal_independent_sets() {
        let candidate = members(set);
        let better = match &best {
            None => true,
            Some(current) => {
                let order = score(&candidate)
                    .total_cmp(&score(current))
                    .then_with(|| current.len().cmp(&candidate.len()))
                    .then_with(|| total_energy(&candidate).total_cmp(&total_energy(current)))
                    .then_with(|| candidate.cmp(current));
                order == Ordering::Less
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.unwrap_or_default()
}
