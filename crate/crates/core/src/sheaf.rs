//! Cellular sheaves of polyhedral cones on a stratified real line.
//!
//! A stratification with vertex times `t₁ < … < t_k` has vertices
//! `v₁ … v_k` and edges `e₁ … e_{k+1}`; `e₁` and `e_{k+1}` are unbounded and
//! `e_i` for `2 ≤ i ≤ k` is the open interval `(t_{i−1}, t_i)`. Indices are
//! zero-based in code and one-based in cell ids (`"v1"`, `"e1"`).

use std::fmt;

use num_traits::Zero;

use crate::cones::rational::{self, Rational};
use crate::cones::{
    cone_membership, is_positive_cone, kernel_basis, lp_positive_kernel, FeasibilityResult,
    PolyhedralCone, RationalMatrix, RationalVector,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
}

impl Cell {
    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Cell> {
        let bad = || Error::Input(format!("bad cell id {s:?} (expected v<n> or e<n>)"));
        let (kind, n) = s.split_at(s.len().min(1));
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind {
            "v" => Ok(Cell::Vertex(n - 1)),
            "e" => Ok(Cell::Edge(n - 1)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Vertex(i) => write!(f, "v{}", i + 1),
            Cell::Edge(i) => write!(f, "e{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Stratification {
    vertex_times: Vec<Rational>,
}

impl Stratification {
    pub fn new(vertex_times: Vec<Rational>) -> Result<Self> {
        if let Some(w) = vertex_times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Input(format!(
                "vertex times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Stratification { vertex_times })
    }

    pub fn vertex_times(&self) -> &[Rational] {
        &self.vertex_times
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_times.len()
    }

    pub fn num_edges(&self) -> usize {
        self.vertex_times.len() + 1
    }

    /// Edges with two vertex endpoints.
    pub fn is_precompact(&self, edge: usize) -> bool {
        edge > 0 && edge < self.num_vertices()
    }

    /// The cell containing `t`.
    pub fn locate(&self, t: &Rational) -> Cell {
        match self.vertex_times.binary_search(t) {
            Ok(i) => Cell::Vertex(i),
            Err(i) => Cell::Edge(i),
        }
    }

    /// A representative time: the vertex time, the midpoint of a precompact
    /// edge, or one unit beyond the nearest vertex on an unbounded edge.
    pub fn sample_time(&self, cell: Cell) -> Rational {
        let k = self.num_vertices();
        match cell {
            Cell::Vertex(i) => self.vertex_times[i].clone(),
            Cell::Edge(_) if k == 0 => Rational::zero(),
            Cell::Edge(0) => &self.vertex_times[0] - rational::one(),
            Cell::Edge(e) if e == k => &self.vertex_times[k - 1] + rational::one(),
            Cell::Edge(e) => rational::midpoint(&self.vertex_times[e - 1], &self.vertex_times[e]),
        }
    }

    /// All cells in time order: `e1, v1, e2, …, v_k, e_{k+1}`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = vec![Cell::Edge(0)];
        for i in 0..self.num_vertices() {
            out.push(Cell::Vertex(i));
            out.push(Cell::Edge(i + 1));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Stalks on every cell plus restriction maps from each vertex to its two
/// incident edges. Restriction matrices act on ambient coordinates:
/// `rows = edge ambient dim`, `cols = vertex ambient dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSheaf {
    strat: Stratification,
    vertex_stalks: Vec<PolyhedralCone>,
    edge_stalks: Vec<PolyhedralCone>,
    to_left: Vec<RationalMatrix>,
    to_right: Vec<RationalMatrix>,
}

impl ConeSheaf {
    /// `to_left[i]` is `ρ(vᵢ → eᵢ)` and `to_right[i]` is `ρ(vᵢ → eᵢ₊₁)`
    /// (zero-based). Only shapes are checked here; see [`validate_sheaf`]
    /// for the cone-map and positivity conditions.
    pub fn new(
        strat: Stratification,
        vertex_stalks: Vec<PolyhedralCone>,
        edge_stalks: Vec<PolyhedralCone>,
        to_left: Vec<RationalMatrix>,
        to_right: Vec<RationalMatrix>,
    ) -> Result<Self> {
        let k = strat.num_vertices();
        for (what, n, want) in [
            ("vertex stalks", vertex_stalks.len(), k),
            ("edge stalks", edge_stalks.len(), k + 1),
            ("left restrictions", to_left.len(), k),
            ("right restrictions", to_right.len(), k),
        ] {
            if n != want {
                return Err(Error::Input(format!("{what}: expected {want}, found {n}")));
            }
        }
        for i in 0..k {
            let vd = vertex_stalks[i].ambient_dim();
            for (m, e) in [(&to_left[i], i), (&to_right[i], i + 1)] {
                let ed = edge_stalks[e].ambient_dim();
                if m.rows() != ed || m.cols() != vd {
                    return Err(Error::Input(format!(
                        "restriction v{} -> e{} is {}x{}, expected {}x{}",
                        i + 1,
                        e + 1,
                        m.rows(),
                        m.cols(),
                        ed,
                        vd
                    )));
                }
            }
        }
        Ok(ConeSheaf {
            strat,
            vertex_stalks,
            edge_stalks,
            to_left,
            to_right,
        })
    }

    pub fn stratification(&self) -> &Stratification {
        &self.strat
    }

    pub fn num_vertices(&self) -> usize {
        self.strat.num_vertices()
    }

    pub fn vertex_stalk(&self, v: usize) -> &PolyhedralCone {
        &self.vertex_stalks[v]
    }

    pub fn edge_stalk(&self, e: usize) -> &PolyhedralCone {
        &self.edge_stalks[e]
    }

    pub fn stalk(&self, cell: Cell) -> &PolyhedralCone {
        match cell {
            Cell::Vertex(v) => &self.vertex_stalks[v],
            Cell::Edge(e) => &self.edge_stalks[e],
        }
    }

    pub fn restriction(&self, v: usize, side: Side) -> &RationalMatrix {
        match side {
            Side::Left => &self.to_left[v],
            Side::Right => &self.to_right[v],
        }
    }

    /// Edge index reached from vertex `v` on `side`.
    pub fn incident_edge(v: usize, side: Side) -> usize {
        match side {
            Side::Left => v,
            Side::Right => v + 1,
        }
    }

    /// Every stalk free and every restriction column a single entry `1`.
    pub fn is_free_function_like(&self) -> bool {
        let free = self.vertex_stalks.iter().chain(&self.edge_stalks).all(|c| c.is_free());
        free && self
            .to_left
            .iter()
            .chain(&self.to_right)
            .all(is_function_like)
    }
}

/// Each column holds exactly one nonzero entry, equal to 1.
pub fn is_function_like(m: &RationalMatrix) -> bool {
    let one = rational::one();
    let mut count = vec![0usize; m.cols()];
    for i in 0..m.rows() {
        for (j, v) in m.row_entries(i) {
            if *v != one {
                return false;
            }
            count[*j] += 1;
        }
    }
    count.iter().all(|&c| c == 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The image of a vertex generator is not in the edge cone.
    NotConeMap {
        vertex: usize,
        edge: usize,
        generator: String,
        image: RationalVector,
    },
    NotPositive { cell: Cell },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotConeMap {
                vertex,
                edge,
                generator,
                image,
            } => write!(
                f,
                "restriction v{} -> e{} sends generator {generator} to {image}, outside the edge cone",
                vertex + 1,
                edge + 1
            ),
            Violation::NotPositive { cell } => write!(f, "stalk over {cell} is not a positive cone"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafViolations(pub Vec<Violation>);

impl fmt::Display for SheafViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for SheafViolations {}

/// Checks that every stalk is a positive cone and every restriction maps
/// each vertex generator into the target edge cone. Reports every violation.
pub fn validate_sheaf(s: &ConeSheaf) -> std::result::Result<(), SheafViolations> {
    let mut out = Vec::new();
    for cell in s.strat.cells() {
        if !is_positive_cone(s.stalk(cell)) {
            out.push(Violation::NotPositive { cell });
        }
    }
    for v in 0..s.num_vertices() {
        let stalk = &s.vertex_stalks[v];
        for side in [Side::Left, Side::Right] {
            let e = ConeSheaf::incident_edge(v, side);
            let m = s.restriction(v, side);
            for (g, gen) in stalk.generators().iter().enumerate() {
                let image = m.mul_vec(gen).expect("shapes checked at construction");
                if !cone_membership(&image, &s.edge_stalks[e]).expect("dims match") {
                    out.push(Violation::NotConeMap {
                        vertex: v,
                        edge: e,
                        generator: stalk.label(g),
                        image,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(SheafViolations(out))
    }
}

/// Labeled coboundary of a sheaf.
///
/// `matrix` acts on vertex ambient coordinates and lands in precompact edge
/// ambient coordinates; the block for edge `e` and vertex `v` is
/// `+ρ(v → e)` when `v` is the right endpoint of `e` and `−ρ(v → e)` when it
/// is the left endpoint. Unbounded edges contribute no rows. `system` is
/// `matrix · G` with `G` the block-diagonal generator matrix, so its columns
/// are vertex generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coboundary {
    pub matrix: RationalMatrix,
    pub system: RationalMatrix,
    /// `(edge id, coordinate label)` per row.
    pub row_labels: Vec<(String, String)>,
    /// `(vertex id, generator label)` per column of `system`.
    pub column_labels: Vec<(String, String)>,
    /// `(vertex id, coordinate label)` per column of `matrix`.
    pub coordinate_labels: Vec<(String, String)>,
    /// First `system` column of each vertex block, plus the total at the end.
    pub generator_offsets: Vec<usize>,
}

impl Coboundary {
    /// Vertex index owning `system` column `j`.
    pub fn column_vertex(&self, j: usize) -> usize {
        self.generator_offsets.partition_point(|&o| o <= j) - 1
    }
}

fn coordinate_label(c: &PolyhedralCone, j: usize) -> String {
    if c.is_free() {
        c.label(j)
    } else {
        format!("x{j}")
    }
}

/// Assembles the signed coboundary after validating the sheaf.
pub fn assemble_coboundary(s: &ConeSheaf) -> Result<Coboundary> {
    validate_sheaf(s)?;
    Ok(assemble_unchecked(s))
}

fn assemble_unchecked(s: &ConeSheaf) -> Coboundary {
    let k = s.num_vertices();
    let mut row_offsets = vec![0usize; k + 1];
    let mut row_labels = Vec::new();
    let mut rows = 0;
    for e in 0..=k {
        row_offsets[e] = rows;
        if s.strat.is_precompact(e) {
            let c = &s.edge_stalks[e];
            for j in 0..c.ambient_dim() {
                row_labels.push((Cell::Edge(e).id(), coordinate_label(c, j)));
            }
            rows += c.ambient_dim();
        }
    }
    let mut coord_offsets = Vec::with_capacity(k + 1);
    let mut generator_offsets = Vec::with_capacity(k + 1);
    let mut coordinate_labels = Vec::new();
    let mut column_labels = Vec::new();
    let (mut nc, mut ng) = (0, 0);
    for v in 0..k {
        let c = &s.vertex_stalks[v];
        coord_offsets.push(nc);
        generator_offsets.push(ng);
        for j in 0..c.ambient_dim() {
            coordinate_labels.push((Cell::Vertex(v).id(), coordinate_label(c, j)));
        }
        for g in 0..c.len() {
            column_labels.push((Cell::Vertex(v).id(), c.label(g)));
        }
        nc += c.ambient_dim();
        ng += c.len();
    }
    coord_offsets.push(nc);
    generator_offsets.push(ng);

    let mut matrix = RationalMatrix::zeros(rows, nc);
    let mut system = RationalMatrix::zeros(rows, ng);
    for v in 0..k {
        let stalk = &s.vertex_stalks[v];
        for (side, sign) in [(Side::Left, 1i64), (Side::Right, -1i64)] {
            let e = ConeSheaf::incident_edge(v, side);
            if !s.strat.is_precompact(e) {
                continue;
            }
            let rho = s.restriction(v, side);
            let block = if sign < 0 { rho.neg() } else { rho.clone() };
            matrix.add_block(row_offsets[e], coord_offsets[v], &block);
            let gen_block = if stalk.is_free() {
                block
            } else {
                block
                    .mul(&stalk.generator_matrix())
                    .expect("restriction width equals stalk dim")
            };
            system.add_block(row_offsets[e], generator_offsets[v], &gen_block);
        }
    }
    Coboundary {
        matrix,
        system,
        row_labels,
        column_labels,
        coordinate_labels,
        generator_offsets,
    }
}

/// Global sections: the coboundary, an exact basis of `ker(system)`, and the
/// positive-kernel decision over vertex generator coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalSections {
    pub coboundary: Coboundary,
    pub kernel: Vec<RationalVector>,
    pub decision: FeasibilityResult,
}

impl GlobalSections {
    pub fn is_feasible(&self) -> bool {
        self.decision.is_feasible()
    }

    /// Generator coordinates `λ` of the witness, if feasible.
    pub fn witness(&self) -> Option<&RationalVector> {
        self.decision.witness.as_ref()
    }

    /// `(vertex id, generator label)` of every witness coordinate that is
    /// strictly positive.
    pub fn support_labels(&self) -> Vec<(String, String)> {
        self.witness()
            .map(|x| {
                x.support()
                    .into_iter()
                    .map(|j| self.coboundary.column_labels[j].clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Slice of a generator-coordinate vector belonging to vertex `v`.
    pub fn vertex_block<'a>(&self, x: &'a RationalVector, v: usize) -> &'a [Rational] {
        let o = &self.coboundary.generator_offsets;
        &x.entries()[o[v]..o[v + 1]]
    }
}

/// Computes global sections per vertex stalk products intersected with the
/// coboundary kernel.
///
/// A sheaf without vertices has `ℝ` as its only cell; it is evaluated on its
/// refinement at `t = 0`, which has the same sections, so labels in the
/// result then refer to that one-vertex sheaf.
pub fn global_sections(s: &ConeSheaf) -> Result<GlobalSections> {
    validate_sheaf(s)?;
    if s.num_vertices() == 0 {
        return global_sections(&refine(s, &Rational::zero())?);
    }
    let coboundary = assemble_unchecked(s);
    let decision = lp_positive_kernel(&coboundary.system);
    let kernel = kernel_basis(&coboundary.system);
    Ok(GlobalSections {
        coboundary,
        kernel,
        decision,
    })
}

/// The section `G·λ` in vertex ambient coordinates, one block per vertex.
pub fn section_blocks(s: &ConeSheaf, gs: &GlobalSections, lambda: &RationalVector) -> Result<Vec<RationalVector>> {
    (0..s.num_vertices())
        .map(|v| {
            let block = RationalVector::new(gs.vertex_block(lambda, v).to_vec());
            s.vertex_stalks[v].combine(&block)
        })
        .collect()
}

/// Inserts a vertex at `t` inside an edge. The new vertex and both daughter
/// edges carry copies of the old edge stalk, joined by identity maps; the
/// old endpoint restrictions are retargeted to the adjacent daughters.
pub fn refine(s: &ConeSheaf, t: &Rational) -> Result<ConeSheaf> {
    let e = match s.strat.locate(t) {
        Cell::Vertex(v) => {
            return Err(Error::Input(format!("{t} is already the vertex time of v{}", v + 1)));
        }
        Cell::Edge(e) => e,
    };
    let mut times = s.strat.vertex_times.clone();
    times.insert(e, t.clone());
    let stalk = s.edge_stalks[e].clone();
    let id = RationalMatrix::identity(stalk.ambient_dim());
    let mut vertex_stalks = s.vertex_stalks.clone();
    vertex_stalks.insert(e, stalk.clone());
    let mut edge_stalks = s.edge_stalks.clone();
    edge_stalks.insert(e, stalk);
    let mut to_left = s.to_left.clone();
    to_left.insert(e, id.clone());
    let mut to_right = s.to_right.clone();
    to_right.insert(e, id);
    ConeSheaf::new(
        Stratification::new(times)?,
        vertex_stalks,
        edge_stalks,
        to_left,
        to_right,
    )
}
