mod common;

use rand::Rng;

use common::{covered, iv, path_points_uncovered, vertical_names, window10};
use evasion::cones::rational::{int, ratio, Rational};
use evasion::cones::RationalMatrix;
use evasion::geometry::{
    build_sheaf, critical_times, extract_path, gap_components, gap_labeling, validate_scene, verify_path,
    CoverBox, EvasionPath, Point, Scene,
};
use evasion::oracle::dp_section_exists;
use evasion::sheaf::{global_sections, Cell, Side};

fn bx(t: (i64, i64), x: (i64, i64), y: (i64, i64)) -> CoverBox {
    CoverBox::new(iv(t.0, t.1), iv(x.0, x.1), iv(y.0, y.1))
}

fn path_of(scene: &Scene) -> Option<EvasionPath> {
    let gs = global_sections(&build_sheaf(scene).unwrap()).unwrap();
    gs.is_feasible().then(|| extract_path(scene, &gs).unwrap())
}

fn ranks(scene: &Scene) -> (Vec<usize>, Vec<usize>) {
    let s = build_sheaf(scene).unwrap();
    let k = s.num_vertices();
    (
        (0..=k).map(|e| s.edge_stalk(e).len()).collect(),
        (0..k).map(|v| s.vertex_stalk(v).len()).collect(),
    )
}

#[test]
fn critical_time_examples() {
    assert!(critical_times(&Scene::new(window10(), vec![])).is_empty());
    let one = Scene::new(window10(), vec![bx((1, 2), (0, 3), (0, 10))]);
    assert_eq!(critical_times(&one), vec![int(1), int(2)]);
    // A box outside the open window does not stratify time.
    let outside = Scene::new(window10(), vec![bx((1, 2), (10, 12), (0, 10))]);
    assert!(critical_times(&outside).is_empty());
    assert_eq!(critical_times(&common::scene("walls_evasion.json")).len(), 4);
}

#[test]
fn validation_examples() {
    assert!(validate_scene(&Scene::new(window10(), vec![])).is_ok());
    assert!(validate_scene(&common::scene("walls_evasion.json")).is_ok());
    let island = Scene::new(window10(), vec![bx((0, 1), (0, 10), (0, 1)), bx((3, 5), (4, 6), (4, 6))]);
    let v = validate_scene(&island).unwrap_err();
    assert_eq!(v.detached_boxes, vec![1]);
    assert!(int(3) <= v.time && v.time <= int(5));
    // Touching a box that reaches the outside is enough.
    let chained = Scene::new(window10(), vec![bx((0, 2), (0, 5), (4, 5)), bx((1, 2), (5, 6), (2, 8))]);
    assert!(validate_scene(&chained).is_ok());
    assert!(build_sheaf(&island).is_err());
}

#[test]
fn component_counts() {
    let s = common::scene("walls_evasion.json");
    assert_eq!(gap_components(&s, &ratio(5, 2)).len(), 3);
    assert_eq!(gap_components(&s, &int(0)).len(), 1);
    let full = Scene::new(window10(), vec![bx((0, 1), (0, 10), (0, 10))]);
    assert!(gap_components(&full, &ratio(1, 2)).is_empty());
    assert_eq!(gap_components(&full, &int(2)).len(), 1);
}

#[test]
fn stalk_ranks() {
    assert_eq!(ranks(&common::scene("walls_evasion.json")), (vec![1, 2, 3, 2, 1], vec![1, 3, 3, 1]));
    assert_eq!(ranks(&common::scene("walls_capture.json")), (vec![1, 2, 3, 2, 1], vec![1, 3, 3, 1]));
}

#[test]
fn capture_differs_in_its_middle_restrictions() {
    let evade = build_sheaf(&common::scene("walls_evasion.json")).unwrap();
    let capture = build_sheaf(&common::scene("walls_capture.json")).unwrap();
    let maps = |s: &evasion::sheaf::ConeSheaf, v: usize| -> Vec<RationalMatrix> {
        vec![s.restriction(v, Side::Left).clone(), s.restriction(v, Side::Right).clone()]
    };
    assert_eq!(maps(&evade, 0), maps(&capture, 0));
    assert_eq!(maps(&evade, 3), maps(&capture, 3));
    assert!(maps(&evade, 1) != maps(&capture, 1) || maps(&evade, 2) != maps(&capture, 2));
}

#[test]
fn empty_scene_is_the_constant_section() {
    let scene = Scene::new(window10(), vec![]);
    let s = build_sheaf(&scene).unwrap();
    for cell in s.stratification().cells() {
        assert_eq!(s.stalk(cell).len(), 1);
    }
    for v in 0..s.num_vertices() {
        for side in [Side::Left, Side::Right] {
            assert_eq!(*s.restriction(v, side), RationalMatrix::identity(1));
        }
    }
    let path = path_of(&scene).unwrap();
    let centre = Point::new(int(5), int(5));
    assert!(path.segments.iter().all(|seg| seg.point == centre));
    assert!(path.segments.first().unwrap().start.is_none());
    assert!(path.segments.last().unwrap().end.is_none());
}

#[test]
fn evasion_path_follows_the_witness() {
    let scene = common::scene("walls_evasion.json");
    let path = path_of(&scene).unwrap();
    let l = gap_labeling(&scene).unwrap();
    let names: Vec<String> = path
        .chain
        .iter()
        .map(|(cell, label)| {
            let c = Cell::parse(cell).unwrap();
            let pairs = vertical_names(cell, &l.fiber(c).labels());
            pairs.into_iter().find(|(lab, _)| lab == label).unwrap().1
        })
        .collect();
    assert_eq!(
        names,
        ["e1^t", "v1^t", "e2^t", "v2^m", "e3^m", "v3^m", "e4^b", "v4^b", "e5^b"]
    );
    assert!(verify_path(&scene, &path).is_ok());
    path_points_uncovered(&scene, &path).unwrap();
}

#[test]
fn corridor_path_stays_in_the_open_corridor() {
    // A wall splits the window on [1,3]; a flash seals the lower side at 2.
    let scene = Scene::new(
        window10(),
        vec![bx((1, 3), (0, 10), (4, 6)), bx((2, 2), (0, 10), (0, 4))],
    );
    let path = path_of(&scene).unwrap();
    path_points_uncovered(&scene, &path).unwrap();
    for seg in &path.segments {
        let meets = seg.start.as_ref().is_none_or(|a| *a <= int(3)) && seg.end.as_ref().is_none_or(|b| *b >= int(1));
        if meets {
            assert!(seg.point.y > int(6), "segment {seg:?} leaves the corridor");
        }
    }
    let sealed = Scene::new(
        window10(),
        vec![bx((1, 3), (0, 10), (4, 6)), bx((2, 2), (0, 10), (0, 4)), bx((2, 2), (0, 10), (6, 10))],
    );
    assert!(path_of(&sealed).is_none());
}

#[test]
fn verify_path_rejects_covered_points() {
    let scene = common::scene("walls_evasion.json");
    let mut path = path_of(&scene).unwrap();
    for seg in &mut path.segments {
        seg.point = Point::new(int(5), ratio(5, 2));
    }
    assert!(verify_path(&scene, &path).is_err());
}

#[test]
fn product_structure_within_edges() {
    let mut rng = common::rng(31);
    for _ in 0..60 {
        let scene = common::random_scene(&mut rng);
        let l = gap_labeling(&scene).unwrap();
        let times = l.strat.vertex_times().to_vec();
        for e in 0..l.strat.num_edges() {
            let reference = l.fiber(Cell::Edge(e));
            for _ in 0..3 {
                let f = ratio(rng.gen_range(1..16), 16);
                let t = match (e, times.len()) {
                    (_, 0) => f * int(100) - int(50),
                    (0, _) => &times[0] - f * int(5),
                    (e, k) if e == k => &times[k - 1] + f * int(5),
                    (e, _) => &times[e - 1] + (&times[e] - &times[e - 1]) * f,
                };
                let g = gap_components(&scene, &t);
                assert_eq!(g.components, reference.components, "edge e{} at t = {t}", e + 1);
            }
        }
    }
}

#[test]
fn vertex_components_persist_into_both_edges() {
    let mut rng = common::rng(32);
    for _ in 0..60 {
        let scene = common::random_scene(&mut rng);
        let l = gap_labeling(&scene).unwrap();
        for v in 0..l.strat.num_vertices() {
            let fiber = l.fiber(Cell::Vertex(v));
            for side in [Side::Left, Side::Right] {
                let e = evasion::sheaf::ConeSheaf::incident_edge(v, side);
                let edge = l.fiber(Cell::Edge(e));
                let t = l.strat.sample_time(Cell::Edge(e));
                assert_eq!(l.map(v, side).len(), fiber.len());
                for (c, comp) in fiber.components.iter().enumerate() {
                    assert!(!covered(&scene, &t, &comp.sample));
                    assert_eq!(edge.component_at(&comp.sample), Some(l.map(v, side)[c]));
                }
            }
        }
    }
}

#[test]
fn duality_consistency_on_random_scenes() {
    let mut rng = common::rng(33);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..150 {
        let scene = common::random_scene(&mut rng);
        let s = build_sheaf(&scene).unwrap();
        let gs = global_sections(&s).unwrap();
        let dp = dp_section_exists(&s).unwrap();
        assert_eq!(gs.is_feasible(), dp.is_some());
        if gs.is_feasible() {
            let path = extract_path(&scene, &gs).unwrap();
            path_points_uncovered(&scene, &path).unwrap();
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 10 && no > 10, "{yes} evasions, {no} captures");
}

#[test]
fn translation_invariance() {
    let mut rng = common::rng(34);
    for _ in 0..60 {
        let scene = common::random_scene(&mut rng);
        let d = |rng: &mut rand_chacha::ChaCha8Rng| -> Rational { ratio(rng.gen_range(-40..40), rng.gen_range(1..7)) };
        let moved = scene.shifted(&d(&mut rng), &d(&mut rng), &d(&mut rng));
        let a = global_sections(&build_sheaf(&scene).unwrap()).unwrap();
        let b = global_sections(&build_sheaf(&moved).unwrap()).unwrap();
        assert_eq!(a.is_feasible(), b.is_feasible());
        assert_eq!(a.kernel.len(), b.kernel.len());
        assert_eq!(a.witness(), b.witness());
        assert_eq!(a.coboundary.matrix, b.coboundary.matrix);
        if a.is_feasible() {
            let pa = extract_path(&scene, &a).unwrap();
            let pb = extract_path(&moved, &b).unwrap();
            let cells = |p: &EvasionPath| p.chain.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>();
            assert_eq!(cells(&pa), cells(&pb));
            assert_eq!(pa.segments.len(), pb.segments.len());
        }
    }
}
