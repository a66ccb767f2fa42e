//! Stratification of a scene and its sheaf of free gap-component cones.

use super::{critical_times, gap_components, validate_scene, GapFiber, Scene};
use crate::cones::rational;
use crate::cones::{PolyhedralCone, RationalMatrix};
use crate::error::{Error, Result};
use crate::sheaf::{Cell, ConeSheaf, Side, Stratification};

/// Gap components per cell of the critical stratification, with the
/// containment of every vertex component in each adjacent edge fiber.
#[derive(Clone, Debug)]
pub struct GapLabeling {
    pub strat: Stratification,
    pub vertex_fibers: Vec<GapFiber>,
    pub edge_fibers: Vec<GapFiber>,
    /// `to_left[v][c]` is the component of edge `v` containing component `c`
    /// of vertex `v`; `to_right[v][c]` likewise for edge `v + 1`.
    pub to_left: Vec<Vec<usize>>,
    pub to_right: Vec<Vec<usize>>,
}

impl GapLabeling {
    pub fn fiber(&self, cell: Cell) -> &GapFiber {
        match cell {
            Cell::Vertex(v) => &self.vertex_fibers[v],
            Cell::Edge(e) => &self.edge_fibers[e],
        }
    }

    pub fn map(&self, v: usize, side: Side) -> &[usize] {
        match side {
            Side::Left => &self.to_left[v],
            Side::Right => &self.to_right[v],
        }
    }
}

/// Vertex times used for a scene: its critical times, or a single vertex at
/// `t = 0` when there are none (a trivial refinement of the one-cell line).
pub fn scene_stratification(scene: &Scene) -> Stratification {
    let mut ts = critical_times(scene);
    if ts.is_empty() {
        ts.push(rational::zero());
    }
    Stratification::new(ts).expect("critical times are strictly increasing")
}

/// Labels gap components on every cell after validating the scene.
///
/// Returns an internal error if a vertex component is not contained in
/// exactly one component of an adjacent edge fiber.
pub fn gap_labeling(scene: &Scene) -> Result<GapLabeling> {
    validate_scene(scene)?;
    let strat = scene_stratification(scene);
    let k = strat.num_vertices();
    let fiber = |cell| gap_components(scene, &strat.sample_time(cell));
    let vertex_fibers: Vec<GapFiber> = (0..k).map(|v| fiber(Cell::Vertex(v))).collect();
    let edge_fibers: Vec<GapFiber> = (0..=k).map(|e| fiber(Cell::Edge(e))).collect();
    let mut to_left = Vec::with_capacity(k);
    let mut to_right = Vec::with_capacity(k);
    for (v, vf) in vertex_fibers.iter().enumerate() {
        for (side, out) in [(Side::Left, &mut to_left), (Side::Right, &mut to_right)] {
            let e = ConeSheaf::incident_edge(v, side);
            let ef = &edge_fibers[e];
            let map = vf
                .components
                .iter()
                .map(|c| {
                    ef.component_at(&c.sample).ok_or_else(|| {
                        Error::Internal(format!(
                            "gap component {} at t = {} does not persist into e{}",
                            c.label,
                            vf.time,
                            e + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(map);
        }
    }
    Ok(GapLabeling {
        strat,
        vertex_fibers,
        edge_fibers,
        to_left,
        to_right,
    })
}

fn inclusion_matrix(rows: usize, map: &[usize]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(rows, map.len());
    for (c, &r) in map.iter().enumerate() {
        m.set(r, c, rational::one());
    }
    m
}

/// Free cones on gap components with 0/1 containment restrictions.
pub fn sheaf_from_labeling(l: &GapLabeling) -> ConeSheaf {
    let free = |f: &GapFiber| PolyhedralCone::free(f.labels());
    let to_left = (0..l.strat.num_vertices())
        .map(|v| inclusion_matrix(l.edge_fibers[v].len(), &l.to_left[v]))
        .collect();
    let to_right = (0..l.strat.num_vertices())
        .map(|v| inclusion_matrix(l.edge_fibers[v + 1].len(), &l.to_right[v]))
        .collect();
    ConeSheaf::new(
        l.strat.clone(),
        l.vertex_fibers.iter().map(free).collect(),
        l.edge_fibers.iter().map(free).collect(),
        to_left,
        to_right,
    )
    .expect("shapes follow from the labeling")
}

pub fn build_sheaf(scene: &Scene) -> Result<ConeSheaf> {
    Ok(sheaf_from_labeling(&gap_labeling(scene)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::{bx, window10};
    use crate::sheaf::{global_sections, validate_sheaf};

    #[test]
    fn empty_scene_is_rank_one_everywhere() {
        let s = Scene::new(window10(), vec![]);
        let sh = build_sheaf(&s).unwrap();
        assert_eq!(sh.num_vertices(), 1);
        for c in sh.stratification().cells() {
            assert_eq!(sh.stalk(c).len(), 1);
        }
        assert_eq!(*sh.restriction(0, Side::Left), RationalMatrix::identity(1));
        assert_eq!(*sh.restriction(0, Side::Right), RationalMatrix::identity(1));
        assert!(global_sections(&sh).unwrap().is_feasible());
    }

    #[test]
    fn full_cover_blocks_evasion() {
        let s = Scene::new(window10(), vec![bx((1, 2), (0, 10), (0, 10))]);
        let sh = build_sheaf(&s).unwrap();
        assert!(validate_sheaf(&sh).is_ok());
        assert_eq!(sh.vertex_stalk(0).len(), 0);
        assert!(!global_sections(&sh).unwrap().is_feasible());
    }

    #[test]
    fn invalid_scene_propagates() {
        let s = Scene::new(window10(), vec![bx((1, 2), (4, 6), (4, 6))]);
        assert!(matches!(build_sheaf(&s), Err(Error::InvalidScene(_))));
    }
}
