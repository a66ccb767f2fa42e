//! Helpers shared by the integration tests: fixture loading, seeded random
//! instances and small dense linear algebra used as an independent check.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evasion::cones::rational::{int, Rational};
use evasion::cones::{PolyhedralCone, RationalMatrix, RationalVector};
use evasion::geometry::{CoverBox, EvasionPath, Interval, Point, Scene, Window};
use evasion::sheaf::{ConeSheaf, Stratification};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn scene(name: &str) -> Scene {
    evasion::io::parse_scene(&fixture_text(name)).unwrap()
}

pub fn sheaf(name: &str) -> ConeSheaf {
    evasion::io::parse_sheaf(&fixture_text(name)).unwrap()
}

/// Seed for randomized tests, overridable with `EVASION_SEED`.
pub fn seed() -> u64 {
    std::env::var("EVASION_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed_2013)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

// Dense rational linear algebra, written independently of the library's
// sparse elimination.

pub fn dense(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    let flat = m.to_dense();
    (0..m.rows())
        .map(|i| flat[i * m.cols()..(i + 1) * m.cols()].to_vec())
        .collect()
}

/// Reduced row echelon form; returns pivot columns.
fn rref(a: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    pivots
}

pub fn rank(a: &[Vec<Rational>], cols: usize) -> usize {
    rref(&mut a.to_vec(), cols).len()
}

pub fn nullspace(a: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = a.to_vec();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// `(Aᵀy)_j > 0` for every column `j`.
pub fn certificate_ok(a: &RationalMatrix, y: &RationalVector) -> bool {
    let d = dense(a);
    if y.dim() != a.rows() {
        return false;
    }
    (0..a.cols()).all(|j| {
        let s: Rational = (0..a.rows()).map(|i| &d[i][j] * &y[i]).sum();
        s.is_positive()
    })
}

/// `x >= 0`, `Σx = 1`, `Ax = 0`.
pub fn witness_ok(a: &RationalMatrix, x: &RationalVector) -> bool {
    let d = dense(a);
    x.dim() == a.cols()
        && x.entries().iter().all(|v| !v.is_negative())
        && x.entries().iter().sum::<Rational>() == Rational::one()
        && mat_vec(&d, x.entries()).iter().all(Zero::is_zero)
}

/// Extreme rays of `ker A ∩ orthant`, found as minimal supports: column sets
/// `S` whose restricted kernel is a line spanned by a strictly one-signed
/// vector. Returned as support bitmasks.
pub fn extreme_ray_supports(a: &RationalMatrix) -> Vec<u32> {
    let d = dense(a);
    let n = a.cols();
    assert!(n <= 16, "brute force over column subsets");
    let mut rays = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub: Vec<Vec<Rational>> = d
            .iter()
            .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
            .collect();
        let ns = nullspace(&sub, cols.len());
        if ns.len() != 1 {
            continue;
        }
        let v = &ns[0];
        if v.iter().all(|x| x.is_positive()) || v.iter().all(|x| x.is_negative()) {
            rays.insert(mask);
        }
    }
    rays.into_iter().collect()
}

pub fn extreme_ray_count(a: &RationalMatrix) -> usize {
    extreme_ray_supports(a).len()
}

/// Dimension of the linear span of `ker A ∩ orthant`: the kernel restricted
/// to the union of all extreme-ray supports.
pub fn positive_span_dim(a: &RationalMatrix) -> usize {
    let union = extreme_ray_supports(a).into_iter().fold(0, |acc, m| acc | m);
    let cols: Vec<usize> = (0..a.cols()).filter(|j| union & (1 << j) != 0).collect();
    let sub: Vec<Vec<Rational>> = dense(a)
        .iter()
        .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
        .collect();
    cols.len() - rank(&sub, cols.len())
}

// Scenes.

pub fn iv(a: i64, b: i64) -> Interval {
    Interval::new(int(a), int(b)).unwrap()
}

pub fn window10() -> Window {
    Window::new(iv(0, 10), iv(0, 10)).unwrap()
}

/// Independent point test: covered iff outside the open window or inside a
/// closed box alive at `t`.
pub fn covered(scene: &Scene, t: &Rational, p: &Point) -> bool {
    let w = &scene.window;
    let inside = w.x.lo < p.x && p.x < w.x.hi && w.y.lo < p.y && p.y < w.y.hi;
    !inside
        || scene.boxes.iter().any(|b| {
            b.t.lo <= *t
                && *t <= b.t.hi
                && b.x.lo <= p.x
                && p.x <= b.x.hi
                && b.y.lo <= p.y
                && p.y <= b.y.hi
        })
}

/// Checks every segment at its finite endpoints and midpoint (one unit
/// beyond the finite end for unbounded segments), and every instantaneous
/// move at its endpoints and midpoint.
pub fn path_points_uncovered(scene: &Scene, path: &EvasionPath) -> Result<(), String> {
    let half = Rational::new(1.into(), 2.into());
    for (n, s) in path.segments.iter().enumerate() {
        let times: Vec<Rational> = match (&s.start, &s.end) {
            (Some(a), Some(b)) => vec![a.clone(), b.clone(), (a + b) * &half],
            (Some(a), None) => vec![a.clone(), a + int(1)],
            (None, Some(b)) => vec![b.clone(), b - int(1)],
            (None, None) => vec![int(0)],
        };
        for t in times {
            if covered(scene, &t, &s.point) {
                return Err(format!("segment {n} covered at t = {t}"));
            }
        }
    }
    for (n, w) in path.segments.windows(2).enumerate() {
        let t = w[0].end.clone().unwrap();
        let mid = Point::new(
            (&w[0].point.x + &w[1].point.x) * &half,
            (&w[0].point.y + &w[1].point.y) * &half,
        );
        if covered(scene, &t, &mid) {
            return Err(format!("move {n} covered at t = {t}"));
        }
    }
    Ok(())
}

/// Random scene whose boxes all touch the window boundary, so coverage is
/// always connected. Coordinates are small integers; instantaneous boxes
/// occur.
pub fn random_scene(rng: &mut impl Rng) -> Scene {
    let n = rng.gen_range(0..=8);
    let boxes = (0..n)
        .map(|_| {
            let t0 = rng.gen_range(0..8);
            let t1 = t0 + rng.gen_range(0..4);
            // Half of the boxes span their whole side, which cuts the gap.
            let (a, b) = if rng.gen_bool(0.5) {
                (0, 10)
            } else {
                let a = rng.gen_range(0..10);
                (a, rng.gen_range(a..=10))
            };
            let depth = rng.gen_range(1..=10);
            let (x, y) = match rng.gen_range(0..4) {
                0 => (iv(0, depth), iv(a, b)),
                1 => (iv(10 - depth, 10), iv(a, b)),
                2 => (iv(a, b), iv(0, depth)),
                _ => (iv(a, b), iv(10 - depth, 10)),
            };
            CoverBox::new(iv(t0, t1), x, y)
        })
        .collect();
    Scene::new(window10(), boxes)
}

fn function_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(rows, cols);
    for c in 0..cols {
        m.set(rng.gen_range(0..rows), c, int(1));
    }
    m
}

fn free(n: usize) -> PolyhedralCone {
    PolyhedralCone::free((0..n).map(|i| format!("g{i}")).collect())
}

/// Random free function-like sheaf: up to 6 vertices, edges of rank 1 to 4,
/// vertices of rank 0 to 4.
pub fn random_function_sheaf(rng: &mut impl Rng) -> ConeSheaf {
    let k = rng.gen_range(0..=6);
    let edge_ranks: Vec<usize> = (0..=k).map(|_| rng.gen_range(1..=4)).collect();
    let vertex_ranks: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=4)).collect();
    let to_left = (0..k)
        .map(|v| function_matrix(rng, edge_ranks[v], vertex_ranks[v]))
        .collect();
    let to_right = (0..k)
        .map(|v| function_matrix(rng, edge_ranks[v + 1], vertex_ranks[v]))
        .collect();
    ConeSheaf::new(
        Stratification::new((0..k as i64).map(int).collect()).unwrap(),
        vertex_ranks.iter().map(|&n| free(n)).collect(),
        edge_ranks.iter().map(|&n| free(n)).collect(),
        to_left,
        to_right,
    )
    .unwrap()
}

/// Random sheaf with non-orthant vertex stalks: vertex generators are
/// nonnegative, edge stalks are orthants and restrictions nonnegative, so
/// every restriction is a cone map.
pub fn random_nonfree_sheaf(rng: &mut impl Rng) -> ConeSheaf {
    let k = rng.gen_range(1..=4);
    let edge_dims: Vec<usize> = (0..=k).map(|_| rng.gen_range(1..=3)).collect();
    let vertex_dims: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let mut vertex_stalks = Vec::new();
    for &d in &vertex_dims {
        let n = rng.gen_range(0..=3);
        let gens = (0..n)
            .map(|_| {
                let mut g: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=2)).collect();
                g[rng.gen_range(0..d)] += 1;
                RationalVector::from_i64(&g)
            })
            .collect();
        vertex_stalks.push(PolyhedralCone::new(d, gens, None).unwrap());
    }
    let mut nonneg = |rows: usize, cols: usize| {
        let mut m = RationalMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if rng.gen_bool(0.5) {
                    m.set(i, j, int(rng.gen_range(1..=2)));
                }
            }
        }
        m
    };
    let to_left = (0..k).map(|v| nonneg(edge_dims[v], vertex_dims[v])).collect();
    let to_right = (0..k).map(|v| nonneg(edge_dims[v + 1], vertex_dims[v])).collect();
    ConeSheaf::new(
        Stratification::new((0..k as i64).map(int).collect()).unwrap(),
        vertex_stalks,
        edge_dims.iter().map(|&d| PolyhedralCone::orthant(d)).collect(),
        to_left,
        to_right,
    )
    .unwrap()
}

/// Anchor height of a component label `"(x,y)"`.
pub fn label_y(label: &str) -> Rational {
    let inner = label.trim_start_matches('(').trim_end_matches(')');
    let (_, y) = inner.split_once(',').unwrap();
    evasion::cones::rational::parse(y).unwrap()
}

/// Names gap components of the two-wall scenes by vertical order: `b`, `m`,
/// `t` for three components, `b`, `t` for two. A lone component is the top
/// hole at the first vertex and the bottom hole afterwards.
pub fn vertical_names(cell: &str, labels: &[String]) -> Vec<(String, String)> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| label_y(&labels[i]));
    let names: &[&str] = match labels.len() {
        3 => &["b", "m", "t"],
        2 => &["b", "t"],
        1 if cell == "v1" || cell == "e1" => &["t"],
        1 => &["b"],
        _ => &[],
    };
    let mut out = vec![(String::new(), String::new()); labels.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (labels[i].clone(), format!("{cell}^{}", names[rank]));
    }
    out
}
