//! Brute-force section search on free, function-like cone sheaves.
//!
//! For such sheaves every vertex generator restricts to a single edge
//! generator on each side, so a global section class is a choice of one
//! generator per cell, compatible along every incidence. These routines work
//! directly on those choices and never touch the coboundary or the LP.

use indexmap::IndexMap;
use num_traits::{Signed, Zero};

use crate::cones::rational::Rational;
use crate::cones::RationalVector;
use crate::error::{Error, Result};
use crate::sheaf::{Cell, ConeSheaf, Side};

/// One generator index per vertex and per edge (including unbounded edges).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectionChain {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl SectionChain {
    /// `{cell id: generator label}` in cell order.
    pub fn labels(&self, s: &ConeSheaf) -> IndexMap<String, String> {
        let mut out = IndexMap::new();
        for (e, &g) in self.edges.iter().enumerate() {
            if e > 0 {
                let v = e - 1;
                out.insert(
                    Cell::Vertex(v).id(),
                    s.vertex_stalk(v).label(self.vertices[v]),
                );
            }
            out.insert(Cell::Edge(e).id(), s.edge_stalk(e).label(g));
        }
        out
    }

    /// Indicator of the chain's vertex generators in the stacked vertex
    /// coordinates.
    pub fn indicator(&self, s: &ConeSheaf) -> RationalVector {
        let mut out = Vec::new();
        for (v, &c) in self.vertices.iter().enumerate() {
            let n = s.vertex_stalk(v).len();
            out.extend((0..n).map(|j| {
                if j == c {
                    crate::cones::rational::one()
                } else {
                    Rational::zero()
                }
            }));
        }
        RationalVector::new(out)
    }

    /// Compatibility of the chain with the sheaf's restriction maps.
    pub fn is_compatible(&self, s: &ConeSheaf) -> bool {
        let Ok(maps) = FunctionMaps::of(s) else {
            return false;
        };
        self.edges.len() == s.num_vertices() + 1
            && self.vertices.len() == s.num_vertices()
            && self.vertices.iter().enumerate().all(|(v, &c)| {
                c < maps.left[v].len()
                    && maps.left[v][c] == self.edges[v]
                    && maps.right[v][c] == self.edges[v + 1]
            })
    }
}

/// Restriction maps as generator-to-generator functions.
struct FunctionMaps {
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

impl FunctionMaps {
    fn of(s: &ConeSheaf) -> Result<Self> {
        if !s.is_free_function_like() {
            return Err(Error::Unsupported(
                "section oracle needs free stalks and 0/1 function-like restrictions".into(),
            ));
        }
        let as_fn = |v: usize, side: Side| {
            let m = s.restriction(v, side);
            let mut f = vec![0; m.cols()];
            for i in 0..m.rows() {
                for (j, _) in m.row_entries(i) {
                    f[*j] = i;
                }
            }
            f
        };
        let k = s.num_vertices();
        Ok(FunctionMaps {
            left: (0..k).map(|v| as_fn(v, Side::Left)).collect(),
            right: (0..k).map(|v| as_fn(v, Side::Right)).collect(),
        })
    }

    fn chain(&self, vertices: Vec<usize>) -> SectionChain {
        let mut edges: Vec<usize> = vertices
            .iter()
            .enumerate()
            .map(|(v, &c)| self.left[v][c])
            .collect();
        if let Some((v, &c)) = vertices.iter().enumerate().next_back() {
            edges.push(self.right[v][c]);
        }
        SectionChain { vertices, edges }
    }
}

fn vertexless_chain(s: &ConeSheaf) -> Option<SectionChain> {
    (!s.edge_stalk(0).is_empty()).then(|| SectionChain {
        vertices: vec![],
        edges: vec![0],
    })
}

/// Left-to-right sweep over reachable vertex generators. Returns a
/// compatible chain when one exists.
pub fn dp_section_exists(s: &ConeSheaf) -> Result<Option<SectionChain>> {
    let maps = FunctionMaps::of(s)?;
    let k = s.num_vertices();
    if k == 0 {
        return Ok(vertexless_chain(s));
    }
    // pred[v][c]: Some(previous generator) when c is reachable at v.
    let mut pred: Vec<Vec<Option<usize>>> = Vec::with_capacity(k);
    pred.push(vec![Some(usize::MAX); maps.left[0].len()]);
    for v in 1..k {
        // First reachable predecessor per edge generator of e_v.
        let mut via = vec![None; s.edge_stalk(v).len()];
        for (c, p) in pred[v - 1].iter().enumerate() {
            if p.is_some() {
                let g = maps.right[v - 1][c];
                via[g] = via[g].or(Some(c));
            }
        }
        pred.push(maps.left[v].iter().map(|&g| via[g]).collect());
    }
    let Some(mut c) = pred[k - 1].iter().position(Option::is_some) else {
        return Ok(None);
    };
    let mut vertices = vec![0; k];
    for v in (0..k).rev() {
        vertices[v] = c;
        c = pred[v][c].unwrap();
    }
    Ok(Some(maps.chain(vertices)))
}

/// All compatible chains, in lexicographic order of vertex choices, up to
/// `cap` of them.
pub fn enumerate_sections(s: &ConeSheaf, cap: usize) -> Result<Vec<SectionChain>> {
    let maps = FunctionMaps::of(s)?;
    let k = s.num_vertices();
    if k == 0 {
        return Ok(vertexless_chain(s).into_iter().take(cap).collect());
    }
    // alive[v][c]: some compatible continuation from (v, c) to the last vertex.
    let mut alive: Vec<Vec<bool>> = vec![Vec::new(); k];
    alive[k - 1] = vec![true; maps.left[k - 1].len()];
    for v in (0..k - 1).rev() {
        let mut ok_edge = vec![false; s.edge_stalk(v + 1).len()];
        for (c, &a) in alive[v + 1].iter().enumerate() {
            if a {
                ok_edge[maps.left[v + 1][c]] = true;
            }
        }
        alive[v] = maps.right[v].iter().map(|&g| ok_edge[g]).collect();
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    fn dfs(
        v: usize,
        maps: &FunctionMaps,
        alive: &[Vec<bool>],
        stack: &mut Vec<usize>,
        out: &mut Vec<SectionChain>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if v == alive.len() {
            out.push(maps.chain(stack.clone()));
            return;
        }
        for c in 0..alive[v].len() {
            if !alive[v][c] {
                continue;
            }
            if v > 0 && maps.left[v][c] != maps.right[v - 1][stack[v - 1]] {
                continue;
            }
            stack.push(c);
            dfs(v + 1, maps, alive, stack, out, cap);
            stack.pop();
            if out.len() >= cap {
                return;
            }
        }
    }
    dfs(0, &maps, &alive, &mut stack, &mut out, cap);
    Ok(out)
}

/// Splits a nonnegative conserved vertex vector into weighted chains.
///
/// Each round follows positive coordinates left to right (conservation at
/// every precompact edge generator guarantees a continuation), subtracts the
/// chain's minimum weight, and so zeroes at least one coordinate.
pub fn flow_decompose(s: &ConeSheaf, x: &RationalVector) -> Result<Vec<(SectionChain, Rational)>> {
    let maps = FunctionMaps::of(s)?;
    let k = s.num_vertices();
    let widths: Vec<usize> = (0..k).map(|v| s.vertex_stalk(v).len()).collect();
    let total: usize = widths.iter().sum();
    if x.dim() != total {
        return Err(Error::mismatch("flow witness", total, x.dim()));
    }
    if !x.is_nonnegative() || x.is_zero() {
        return Err(Error::Input("witness must be nonnegative and nonzero".into()));
    }
    let mut blocks: Vec<Vec<Rational>> = Vec::with_capacity(k);
    let mut off = 0;
    for &w in &widths {
        blocks.push(x.entries()[off..off + w].to_vec());
        off += w;
    }
    // Conservation on every precompact edge generator.
    for v in 1..k {
        let mut bal = vec![Rational::zero(); s.edge_stalk(v).len()];
        for (c, w) in blocks[v].iter().enumerate() {
            bal[maps.left[v][c]] += w;
        }
        for (c, w) in blocks[v - 1].iter().enumerate() {
            bal[maps.right[v - 1][c]] -= w;
        }
        if let Some(g) = bal.iter().position(|b| !b.is_zero()) {
            return Err(Error::Input(format!(
                "witness is not conserved at generator {} of e{}",
                s.edge_stalk(v).label(g),
                v + 1
            )));
        }
    }
    let mut out = Vec::new();
    while blocks.iter().any(|b| b.iter().any(|w| w.is_positive())) {
        let mut vertices = Vec::with_capacity(k);
        let first = blocks[0]
            .iter()
            .position(|w| w.is_positive())
            .ok_or_else(|| Error::Internal("residual flow has no source".into()))?;
        vertices.push(first);
        for v in 1..k {
            let g = maps.right[v - 1][vertices[v - 1]];
            let c = (0..blocks[v].len())
                .find(|&c| blocks[v][c].is_positive() && maps.left[v][c] == g)
                .ok_or_else(|| Error::Internal("residual flow is not conserved".into()))?;
            vertices.push(c);
        }
        let weight = vertices
            .iter()
            .enumerate()
            .map(|(v, &c)| blocks[v][c].clone())
            .min()
            .expect("at least one vertex");
        for (v, &c) in vertices.iter().enumerate() {
            blocks[v][c] -= &weight;
        }
        out.push((maps.chain(vertices), weight));
    }
    Ok(out)
}
