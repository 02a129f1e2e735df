use std::collections::{BTreeMap, BTreeSet};

use super::WickError;

/// Multigraph whose edges are identity kernels `1(k_a, k_b)`. Integrating a
/// degree-2 vertex fuses its two edges; a consumed self-loop is one factor of `Omega`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionGraph {
    vertices: BTreeSet<u32>,
    /// Normalized `(min, max)`, kept sorted so equal multisets compare equal.
    edges: Vec<(u32, u32)>,
    integrated: BTreeSet<u32>,
}

impl ContractionGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
        integrated: impl IntoIterator<Item = u32>,
    ) -> Result<Self, WickError> {
        let vertices: BTreeSet<u32> = vertices.into_iter().collect();
        let mut norm = Vec::new();
        for (a, b) in edges {
            if !vertices.contains(&a) || !vertices.contains(&b) {
                return Err(WickError::UnknownVertex(a, b));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let integrated: BTreeSet<u32> = integrated.into_iter().collect();
        if let Some(&v) = integrated.iter().find(|v| !vertices.contains(v)) {
            return Err(WickError::UnknownVertex(v, v));
        }
        Ok(Self { vertices, edges: norm, integrated })
    }

    pub fn vertices(&self) -> &BTreeSet<u32> {
        &self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn integrated(&self) -> &BTreeSet<u32> {
        &self.integrated
    }

    fn degree(&self, v: u32) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    /// Eliminates every integrated vertex in ascending label order.
    pub fn contract(&self) -> Result<(u32, ContractionGraph), WickError> {
        let order: Vec<u32> = self.integrated.iter().copied().collect();
        self.contract_in_order(&order)
    }

    /// Eliminates the integrated vertices in the given order (which must list
    /// each of them once). The loop count and the residual do not depend on it.
    pub fn contract_in_order(&self, order: &[u32]) -> Result<(u32, ContractionGraph), WickError> {
        for &v in &self.integrated {
            let degree = self.degree(v);
            if degree != 2 {
                return Err(WickError::DegreeMismatch { vertex: v, degree });
            }
        }
        debug_assert_eq!(order.iter().copied().collect::<BTreeSet<_>>(), self.integrated);
        let mut edges = self.edges.clone();
        let mut loops = 0;
        for &v in order {
            let incident: Vec<usize> =
                edges.iter().enumerate().filter(|(_, &(a, b))| a == v || b == v).map(|(i, _)| i).collect();
            match incident.as_slice() {
                [i] => {
                    // A self-loop is the vertex's only edge: integral of 1(k, k).
                    edges.swap_remove(*i);
                    loops += 1;
                }
                [i, j] => {
                    let other = |(a, b): (u32, u32)| if a == v { b } else { a };
                    let x = other(edges[*i]);
                    let y = other(edges[*j]);
                    let (hi, lo) = if i > j { (*i, *j) } else { (*j, *i) };
                    edges.swap_remove(hi);
                    edges.swap_remove(lo);
                    edges.push((x.min(y), x.max(y)));
                }
                _ => unreachable!("degree checked above and preserved by fusion"),
            }
        }
        edges.sort_unstable();
        let vertices: BTreeSet<u32> = self.vertices.difference(&self.integrated).copied().collect();
        Ok((loops, ContractionGraph { vertices, edges, integrated: BTreeSet::new() }))
    }

    /// Residual edges grouped as a multiset, for comparisons.
    pub fn edge_multiset(&self) -> BTreeMap<(u32, u32), usize> {
        let mut m = BTreeMap::new();
        for &e in &self.edges {
            *m.entry(e).or_insert(0) += 1;
        }
        m
    }
}
