//! The maximal subspace graph: vertices are the `2·C(n,k)` subspaces
//! `V_S^row`, `V_S^col` with `|S| = k`, and each edge carries the dimension
//! of the intersection of its endpoints.

use std::fmt::Write as _;

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::subspace::{canonical_basis, CanonicalSubspace, Orientation};

/// Largest `n` for which the complete graph is stored.
pub const MAX_THETA_N: usize = 12;

pub type ThetaVertex = CanonicalSubspace;

#[derive(Clone, Debug)]
pub struct ThetaGraph {
    n: usize,
    k: usize,
    vertices: Vec<ThetaVertex>,
    weights: Vec<usize>,
}

/// Closed-form weight: `k²` across orientations, `n·|S ∩ S'|` within one.
pub fn closed_form_weight(u: &ThetaVertex, v: &ThetaVertex, n: usize) -> usize {
    if u.orientation != v.orientation {
        u.support().len() * v.support().len()
    } else {
        let common = u.support().iter().filter(|i| v.support().contains(i)).count();
        n * common
    }
}

/// `dim(U ∩ V)` computed by elimination, independent of the closed form.
pub fn intersection_weight(u: &ThetaVertex, v: &ThetaVertex, n: usize, field: FieldSpec) -> Result<usize> {
    let a = canonical_basis(u, n, field)?;
    let b = canonical_basis(v, n, field)?;
    Ok(a.intersect(&b)?.dim())
}

/// Rows first, then columns, each in lexicographic order of supports.
pub fn theta_vertices(n: usize, k: usize) -> Vec<ThetaVertex> {
    let mut out = Vec::new();
    for orientation in [Orientation::Row, Orientation::Col] {
        for s in (0..n).combinations(k) {
            out.push(CanonicalSubspace::new(orientation, s, n).expect("k-subset of [n]"));
        }
    }
    out
}

pub fn build_theta(n: usize, k: usize) -> Result<ThetaGraph> {
    if k == 0 || k >= n {
        return Err(Error::InvalidRange(format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    if n > MAX_THETA_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_THETA_N,
        });
    }
    let vertices = theta_vertices(n, k);
    let count = vertices.len();
    let mut weights = vec![0; count * count];
    for a in 0..count {
        for b in (a + 1)..count {
            let w = closed_form_weight(&vertices[a], &vertices[b], n);
            weights[a * count + b] = w;
            weights[b * count + a] = w;
        }
    }
    Ok(ThetaGraph {
        n,
        k,
        vertices,
        weights,
    })
}

impl ThetaGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertices(&self) -> &[ThetaVertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, v: &ThetaVertex) -> Option<usize> {
        self.vertices.iter().position(|u| u == v)
    }

    /// Weight between distinct vertices; `None` for a loop.
    pub fn weight(&self, a: usize, b: usize) -> Option<usize> {
        (a != b).then(|| self.weights[a * self.vertices.len() + b])
    }

    /// All unordered pairs `a < b` with their weights.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let count = self.vertices.len();
        (0..count)
            .tuple_combinations()
            .map(move |(a, b)| (a, b, self.weights[a * count + b]))
    }

    /// Pairs whose stored weight disagrees with `dim(U ∩ V)` over `field`.
    pub fn weight_mismatches(&self, field: FieldSpec) -> Result<Vec<(usize, usize, usize, usize)>> {
        let mut bad = Vec::new();
        for (a, b, w) in self.edges() {
            let dim = intersection_weight(&self.vertices[a], &self.vertices[b], self.n, field)?;
            if dim != w {
                bad.push((a, b, w, dim));
            }
        }
        Ok(bad)
    }

    pub fn to_dot(&self) -> String {
        let edges: Vec<(usize, usize, usize)> = self.edges().collect();
        render_dot(&format!("theta_{}_{}", self.n, self.k), &self.vertices, &edges)
    }

    pub fn to_doc(&self) -> GraphDoc {
        let edges: Vec<(usize, usize, usize)> = self.edges().collect();
        let components = components(&build_theta_hat(self));
        graph_doc(self.n, self.k, false, &self.vertices, &edges, &components)
    }
}

/// The unweighted graph keeping only edges of weight `n(k-1)`.
#[derive(Clone, Debug)]
pub struct ThetaHat {
    pub n: usize,
    pub k: usize,
    pub vertices: Vec<ThetaVertex>,
    pub edges: Vec<(usize, usize)>,
}

pub fn build_theta_hat(g: &ThetaGraph) -> ThetaHat {
    let threshold = g.n * (g.k - 1);
    ThetaHat {
        n: g.n,
        k: g.k,
        vertices: g.vertices.clone(),
        edges: g
            .edges()
            .filter(|&(_, _, w)| w == threshold)
            .map(|(a, b, _)| (a, b))
            .collect(),
    }
}

impl ThetaHat {
    pub fn to_dot(&self) -> String {
        let w = self.n * (self.k - 1);
        let edges: Vec<(usize, usize, usize)> = self.edges.iter().map(|&(a, b)| (a, b, w)).collect();
        render_dot(&format!("theta_hat_{}_{}", self.n, self.k), &self.vertices, &edges)
    }

    pub fn to_doc(&self) -> GraphDoc {
        let w = self.n * (self.k - 1);
        let edges: Vec<(usize, usize, usize)> = self.edges.iter().map(|&(a, b)| (a, b, w)).collect();
        graph_doc(self.n, self.k, true, &self.vertices, &edges, &components(self))
    }
}

/// Connected components as sorted vertex-index lists, ordered by their
/// smallest member.
pub fn components(g: &ThetaHat) -> Vec<Vec<usize>> {
    let count = g.vertices.len();
    let mut uf = UnionFind::<usize>::new(count);
    for &(a, b) in &g.edges {
        uf.union(a, b);
    }
    let labels = uf.into_labeling();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; count];
    for v in 0..count {
        let root = labels[v];
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(v);
    }
    groups
}

/// The exchange path `S_t = (S \ {i_1..i_t}) ∪ {j_1..j_t}` from `S` to `S'`,
/// removing elements of `S \ S'` and adding elements of `S' \ S` in ascending
/// order.
pub fn exchange_path(s: &[usize], target: &[usize]) -> Vec<Vec<usize>> {
    let out_of: Vec<usize> = s.iter().copied().filter(|x| !target.contains(x)).collect();
    let into: Vec<usize> = target.iter().copied().filter(|x| !s.contains(x)).collect();
    let mut path = vec![s.to_vec()];
    let mut cur = s.to_vec();
    for (i, j) in out_of.into_iter().zip(into) {
        cur.retain(|&x| x != i);
        cur.push(j);
        cur.sort_unstable();
        path.push(cur.clone());
    }
    path
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub n: usize,
    pub k: usize,
    pub vertex_count: usize,
    pub hat_edge_count: usize,
    pub component_count: usize,
    pub zero_weight_edges: usize,
    /// `(k, n) = (2, 4)`: cross edges reach the threshold weight.
    pub special_case: bool,
}

/// Checks the component structure of `Θ̂_{n,k}`. Outside `(k, n) = (2, 4)`
/// the components are exactly the row side and the column side and no cross
/// edge has weight `n(k-1)`. At `(2, 4)` the graph has exactly six edges of
/// weight zero (complementary supports) and every other weight is four.
pub fn verify_components(n: usize, k: usize) -> Result<ThetaReport> {
    let g = build_theta(n, k)?;
    let hat = build_theta_hat(&g);
    let comps = components(&hat);
    let zero_weight_edges = g.edges().filter(|&(_, _, w)| w == 0).count();
    let special_case = (k, n) == (2, 4);
    let fail = |msg: String| Err(Error::AssertionFailure(msg));

    let expected = 2 * binomial(n, k);
    if g.vertex_count() != expected {
        return fail(format!("{} vertices, expected {expected}", g.vertex_count()));
    }
    let half = expected / 2;
    if special_case {
        if zero_weight_edges != 6 {
            return fail(format!("{zero_weight_edges} zero-weight edges, expected 6"));
        }
        for (a, b, w) in g.edges() {
            let complementary = g.vertices[a].orientation == g.vertices[b].orientation
                && g.vertices[a]
                    .support()
                    .iter()
                    .all(|x| !g.vertices[b].support().contains(x));
            let want = if complementary { 0 } else { 4 };
            if w != want {
                return fail(format!("edge ({a}, {b}) has weight {w}, expected {want}"));
            }
        }
        if comps.len() != 1 {
            return fail(format!("{} components, expected 1", comps.len()));
        }
    } else {
        let threshold = n * (k - 1);
        for (a, b, w) in g.edges() {
            if (a < half) != (b < half) && w == threshold {
                return fail(format!("cross edge ({a}, {b}) reaches weight {threshold}"));
            }
        }
        let rows: Vec<usize> = (0..half).collect();
        let cols: Vec<usize> = (half..expected).collect();
        if comps != vec![rows, cols] {
            return fail(format!("components {comps:?} are not the two sides"));
        }
    }
    Ok(ThetaReport {
        n,
        k,
        vertex_count: g.vertex_count(),
        hat_edge_count: hat.edges.len(),
        component_count: comps.len(),
        zero_weight_edges,
        special_case,
    })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: String,
    pub v: String,
    pub weight: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub n: usize,
    pub k: usize,
    pub hat: bool,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    /// Components of the threshold graph, by vertex label.
    pub components: Vec<Vec<String>>,
}

fn graph_doc(
    n: usize,
    k: usize,
    hat: bool,
    vertices: &[ThetaVertex],
    edges: &[(usize, usize, usize)],
    comps: &[Vec<usize>],
) -> GraphDoc {
    let label = |i: usize| vertices[i].to_string();
    GraphDoc {
        n,
        k,
        hat,
        vertices: vertices.iter().map(|v| v.to_string()).collect(),
        edges: edges
            .iter()
            .map(|&(a, b, w)| EdgeDoc {
                u: label(a),
                v: label(b),
                weight: w,
            })
            .collect(),
        components: comps
            .iter()
            .map(|c| c.iter().map(|&i| label(i)).collect())
            .collect(),
    }
}

fn render_dot(name: &str, vertices: &[ThetaVertex], edges: &[(usize, usize, usize)]) -> String {
    let mut out = format!("graph {name} {{\n");
    for v in vertices {
        let _ = writeln!(out, "  \"{v}\";");
    }
    for &(a, b, w) in edges {
        let _ = writeln!(out, "  \"{}\" -- \"{}\" [label={w}];", vertices[a], vertices[b]);
    }
    out.push_str("}\n");
    out
}
