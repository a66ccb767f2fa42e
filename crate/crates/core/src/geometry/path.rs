//! Concrete evasion paths from feasible global sections.

use super::build::{gap_labeling, GapLabeling};
use super::{Point, Scene};
use crate::cones::rational::Rational;
use crate::error::{Error, Result};
use crate::sheaf::{Cell, GlobalSections};

/// Constant position over a closed time interval; `None` bounds are
/// infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSegment {
    pub start: Option<Rational>,
    pub end: Option<Rational>,
    pub point: Point,
}

/// A piecewise-constant evasion path.
///
/// Consecutive segments meet at a common time; at that instant the evader
/// moves in a straight line from one segment's point to the next, within
/// the gap fiber of that time. Zero-length segments `[τ, τ]` carry the
/// waypoints of such moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvasionPath {
    pub segments: Vec<PathSegment>,
    /// `(cell id, component label)` of the chosen component on every cell.
    pub chain: Vec<(String, String)>,
}

/// Picks one vertex component per vertex from the witness support so that
/// consecutive choices land in the same component of the edge between them.
fn select_chain(l: &GapLabeling, gs: &GlobalSections) -> Result<Vec<usize>> {
    let x = gs
        .witness()
        .ok_or_else(|| Error::Input("global sections are not feasible".into()))?;
    let k = l.strat.num_vertices();
    let support: Vec<Vec<usize>> = (0..k)
        .map(|v| {
            gs.vertex_block(x, v)
                .iter()
                .enumerate()
                .filter(|(_, w)| num_traits::Signed::is_positive(*w))
                .map(|(c, _)| c)
                .collect()
        })
        .collect();
    let mut chain = Vec::with_capacity(k);
    let first = *support
        .first()
        .and_then(|s| s.first())
        .ok_or_else(|| Error::Internal("witness has no support on the first vertex".into()))?;
    chain.push(first);
    for v in 1..k {
        let target = l.to_right[v - 1][chain[v - 1]];
        let next = support[v]
            .iter()
            .copied()
            .find(|&c| l.to_left[v][c] == target)
            .ok_or_else(|| {
                Error::Internal(format!(
                    "witness is not conserved across e{}: no continuation at v{}",
                    v + 1,
                    v + 1
                ))
            })?;
        chain.push(next);
    }
    Ok(chain)
}

/// Builds and verifies a concrete path for a scene whose global sections
/// (computed from `build_sheaf(scene)`) are feasible.
pub fn extract_path(scene: &Scene, gs: &GlobalSections) -> Result<EvasionPath> {
    let l = gap_labeling(scene)?;
    let k = l.strat.num_vertices();
    let widths: Vec<usize> = l.vertex_fibers.iter().map(|f| f.len()).collect();
    let expected: Vec<usize> = gs
        .coboundary
        .generator_offsets
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    if widths != expected {
        return Err(Error::Input(
            "global sections do not belong to this scene's sheaf".into(),
        ));
    }
    let comps = select_chain(&l, gs)?;
    let points: Vec<Point> = comps
        .iter()
        .enumerate()
        .map(|(v, &c)| l.vertex_fibers[v].components[c].sample.clone())
        .collect();

    let mut chain = Vec::with_capacity(2 * k + 1);
    for v in 0..k {
        let e = l.to_left[v][comps[v]];
        chain.push((Cell::Edge(v).id(), l.edge_fibers[v].components[e].label.clone()));
        chain.push((
            Cell::Vertex(v).id(),
            l.vertex_fibers[v].components[comps[v]].label.clone(),
        ));
    }
    let last = l.to_right[k - 1][comps[k - 1]];
    chain.push((Cell::Edge(k).id(), l.edge_fibers[k].components[last].label.clone()));

    let mut segments = Vec::new();
    let mut start: Option<Rational> = None;
    for v in 0..k {
        if v + 1 == k {
            segments.push(PathSegment {
                start,
                end: None,
                point: points[v].clone(),
            });
            break;
        }
        // Switch components in the middle of the edge between the vertices,
        // where the gap fiber is the union of both vertex fibers' pieces.
        let edge = Cell::Edge(v + 1);
        let tau = l.strat.sample_time(edge);
        segments.push(PathSegment {
            start,
            end: Some(tau.clone()),
            point: points[v].clone(),
        });
        let route = l
            .fiber(edge)
            .route(&points[v], &points[v + 1])
            .ok_or_else(|| {
                Error::Internal(format!("no route inside {} between chosen components", edge))
            })?;
        for w in route.iter().skip(1).take(route.len().saturating_sub(2)) {
            segments.push(PathSegment {
                start: Some(tau.clone()),
                end: Some(tau.clone()),
                point: w.clone(),
            });
        }
        start = Some(tau);
    }
    let path = EvasionPath { segments, chain };
    verify_path(scene, &path).map_err(|e| Error::Internal(format!("extracted path failed verification: {e}")))?;
    Ok(path)
}

fn box_meets_segment(b: &super::CoverBox, a: &Point, c: &Point) -> bool {
    // Clip the parameter range s ∈ [0, 1] of a + s(c − a) against the box.
    let mut lo = Rational::from_integer(0.into());
    let mut hi = Rational::from_integer(1.into());
    for (p, q, iv) in [(&a.x, &c.x, &b.x), (&a.y, &c.y, &b.y)] {
        let d = q - p;
        if num_traits::Zero::is_zero(&d) {
            if !iv.contains(p) {
                return false;
            }
            continue;
        }
        let s0 = (&iv.lo - p) / &d;
        let s1 = (&iv.hi - p) / &d;
        let (s0, s1) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        lo = lo.max(s0);
        hi = hi.min(s1);
        if lo > hi {
            return false;
        }
    }
    true
}

/// Exact check that the path never enters the coverage: each segment's point
/// is uncovered on its whole closed time interval, and each instantaneous
/// straight move avoids every box alive at that instant.
pub fn verify_path(scene: &Scene, path: &EvasionPath) -> std::result::Result<(), String> {
    let segs = &path.segments;
    if segs.is_empty() {
        return Err("empty path".into());
    }
    if segs[0].start.is_some() || segs[segs.len() - 1].end.is_some() {
        return Err("path does not cover the whole time axis".into());
    }
    for (n, s) in segs.iter().enumerate() {
        if let (Some(a), Some(b)) = (&s.start, &s.end) {
            if a > b {
                return Err(format!("segment {n} has reversed time interval"));
            }
        }
        if !scene.window.interior_contains(&s.point) {
            return Err(format!("segment {n} point {} leaves the window", s.point));
        }
        for (i, b) in scene.boxes.iter().enumerate() {
            let overlaps = s.start.as_ref().is_none_or(|a| a <= &b.t.hi)
                && s.end.as_ref().is_none_or(|e| &b.t.lo <= e);
            if overlaps && b.contains_point(&s.point) {
                return Err(format!("segment {n} point {} is covered by box {i}", s.point));
            }
        }
    }
    for (n, w) in segs.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let t = match (&a.end, &b.start) {
            (Some(x), Some(y)) if x == y => x,
            _ => return Err(format!("segments {n} and {} do not meet in time", n + 1)),
        };
        for (i, bx) in scene.boxes.iter().enumerate() {
            if bx.t.contains(t) && box_meets_segment(bx, &a.point, &b.point) {
                return Err(format!(
                    "move {} -> {} at t = {t} crosses box {i}",
                    a.point, b.point
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::rational::int;
    use crate::geometry::tests::{bx, window10};
    use crate::geometry::{build_sheaf, point_uncovered};
    use crate::sheaf::global_sections;

    fn path_for(s: &Scene) -> EvasionPath {
        let gs = global_sections(&build_sheaf(s).unwrap()).unwrap();
        extract_path(s, &gs).unwrap()
    }

    #[test]
    fn empty_scene_constant_path_at_centre() {
        let s = Scene::new(window10(), vec![]);
        let p = path_for(&s);
        assert_eq!(p.segments.len(), 1);
        assert_eq!(p.segments[0].point, Point::new(int(5), int(5)));
    }

    #[test]
    fn path_stays_in_corridor() {
        // A corridor y ∈ (4,6) survives while the rest of the window is
        // closed off at different times.
        let s = Scene::new(
            window10(),
            vec![
                bx((1, 3), (0, 10), (0, 4)),
                bx((2, 4), (0, 10), (6, 10)),
            ],
        );
        let p = path_for(&s);
        for seg in &p.segments {
            for t in [&seg.start, &seg.end].into_iter().flatten() {
                assert!(point_uncovered(&s, t, &seg.point));
            }
        }
        for t in 0..6 {
            let t = int(t);
            let seg = p
                .segments
                .iter()
                .find(|g| g.start.as_ref().is_none_or(|a| a <= &t) && g.end.as_ref().is_none_or(|b| &t <= b))
                .unwrap();
            assert!(point_uncovered(&s, &t, &seg.point));
        }
    }

    #[test]
    fn segment_box_clipping() {
        let b = bx((0, 1), (2, 4), (2, 4));
        let p = |x, y| Point::new(int(x), int(y));
        assert!(box_meets_segment(&b, &p(0, 3), &p(6, 3)));
        assert!(!box_meets_segment(&b, &p(0, 5), &p(6, 5)));
        assert!(box_meets_segment(&b, &p(0, 0), &p(2, 2)));
        assert!(!box_meets_segment(&b, &p(0, 1), &p(1, 6)));
        assert!(box_meets_segment(&b, &p(3, 3), &p(3, 3)));
    }

    #[test]
    fn verify_rejects_covered_hold() {
        let s = Scene::new(window10(), vec![bx((1, 2), (0, 10), (0, 5))]);
        let bad = EvasionPath {
            segments: vec![PathSegment {
                start: None,
                end: None,
                point: Point::new(int(5), int(2)),
            }],
            chain: vec![],
        };
        assert!(verify_path(&s, &bad).is_err());
    }
}
