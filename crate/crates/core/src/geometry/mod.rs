//! Planar coverage scenes built from axis-aligned rational boxes in
//! space-time.
//!
//! Coverage at time `t` is the closed set `(ℝ² ∖ int W) ∪ ⋃ {boxes alive at
//! t}`, where a box is alive on its closed time interval. The gap is the open
//! complement, which always lies inside the window `W`.

mod arrangement;
mod build;
mod path;

use std::fmt;

use crate::cones::rational::Rational;
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

pub use arrangement::{gap_components, GapComponent, GapFiber};
pub use build::{build_sheaf, gap_labeling, GapLabeling};
pub use path::{extract_path, verify_path, EvasionPath, PathSegment};

/// Closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Input(format!("interval [{lo}, {hi}] is reversed")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn shifted(&self, d: &Rational) -> Interval {
        Interval {
            lo: &self.lo + d,
            hi: &self.hi + d,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point {
            x: crate::cones::rational::midpoint(&self.x, &other.x),
            y: crate::cones::rational::midpoint(&self.y, &other.y),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Spatial window with nonempty interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub x: Interval,
    pub y: Interval,
}

impl Window {
    pub fn new(x: Interval, y: Interval) -> Result<Self> {
        if x.lo >= x.hi || y.lo >= y.hi {
            return Err(Error::Input(format!("window {x} × {y} has empty interior")));
        }
        Ok(Window { x, y })
    }

    pub fn interior_contains(&self, p: &Point) -> bool {
        self.x.lo < p.x && p.x < self.x.hi && self.y.lo < p.y && p.y < self.y.hi
    }
}

/// Closed space-time box `t × x × y`; zero widths are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverBox {
    pub t: Interval,
    pub x: Interval,
    pub y: Interval,
}

impl CoverBox {
    pub fn new(t: Interval, x: Interval, y: Interval) -> Self {
        CoverBox { t, x, y }
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y)
    }

    fn intersects_rect(&self, other: &CoverBox) -> bool {
        self.x.intersects(&other.x) && self.y.intersects(&other.y)
    }

    /// Meets the interior of the window.
    pub fn is_relevant(&self, w: &Window) -> bool {
        self.x.lo < w.x.hi && self.x.hi > w.x.lo && self.y.lo < w.y.hi && self.y.hi > w.y.lo
    }

    /// Meets `ℝ² ∖ int W`.
    fn touches_outside(&self, w: &Window) -> bool {
        self.x.lo <= w.x.lo || self.x.hi >= w.x.hi || self.y.lo <= w.y.lo || self.y.hi >= w.y.hi
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scene {
    pub window: Window,
    pub boxes: Vec<CoverBox>,
}

impl Scene {
    pub fn new(window: Window, boxes: Vec<CoverBox>) -> Self {
        Scene { window, boxes }
    }

    /// Indices of boxes alive at `t` that meet the window interior.
    pub fn alive(&self, t: &Rational) -> Vec<usize> {
        (0..self.boxes.len())
            .filter(|&i| {
                let b = &self.boxes[i];
                b.t.contains(t) && b.is_relevant(&self.window)
            })
            .collect()
    }

    /// Translates every box and the window in space by `(dx, dy)` and every
    /// box in time by `dt`.
    pub fn shifted(&self, dt: &Rational, dx: &Rational, dy: &Rational) -> Scene {
        Scene {
            window: Window {
                x: self.window.x.shifted(dx),
                y: self.window.y.shifted(dy),
            },
            boxes: self
                .boxes
                .iter()
                .map(|b| CoverBox {
                    t: b.t.shifted(dt),
                    x: b.x.shifted(dx),
                    y: b.y.shifted(dy),
                })
                .collect(),
        }
    }
}

/// True iff `p` is in the gap at time `t`: inside the open window and in no
/// box alive at `t`.
pub fn point_uncovered(scene: &Scene, t: &Rational, p: &Point) -> bool {
    scene.window.interior_contains(p)
        && !scene
            .boxes
            .iter()
            .any(|b| b.t.contains(t) && b.contains_point(p))
}

/// Sorted, deduplicated start and end times of the boxes that meet the
/// window interior. Between consecutive times the alive set is constant.
pub fn critical_times(scene: &Scene) -> Vec<Rational> {
    let mut ts: Vec<Rational> = scene
        .boxes
        .iter()
        .filter(|b| b.is_relevant(&scene.window))
        .flat_map(|b| [b.t.lo.clone(), b.t.hi.clone()])
        .collect();
    ts.sort();
    ts.dedup();
    ts
}

/// A time at which the coverage fiber is disconnected, with the boxes that
/// are cut off from the coverage outside the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneViolation {
    pub time: Rational,
    pub detached_boxes: Vec<usize>,
}

impl fmt::Display for SceneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "coverage is disconnected at t = {}: boxes {:?} do not reach the region outside the window",
            self.time, self.detached_boxes
        )
    }
}

impl std::error::Error for SceneViolation {}

fn detached_at(scene: &Scene, t: &Rational) -> Vec<usize> {
    let alive = scene.alive(t);
    let outside = alive.len();
    let mut uf = UnionFind::new(alive.len() + 1);
    for (a, &i) in alive.iter().enumerate() {
        let bi = &scene.boxes[i];
        if bi.touches_outside(&scene.window) {
            uf.union(a, outside);
        }
        for (b, &j) in alive.iter().enumerate().skip(a + 1) {
            if bi.intersects_rect(&scene.boxes[j]) {
                uf.union(a, b);
            }
        }
    }
    let root = uf.find(outside);
    (0..alive.len())
        .filter(|&a| uf.find(a) != root)
        .map(|a| alive[a])
        .collect()
}

/// Checks that the coverage fiber is connected at every critical time and
/// at one sample time per edge of the critical stratification. Gap
/// components lie inside the window by construction.
pub fn validate_scene(scene: &Scene) -> std::result::Result<(), SceneViolation> {
    let strat = crate::sheaf::Stratification::new(critical_times(scene))
        .expect("critical times are strictly increasing");
    for cell in strat.cells() {
        let t = strat.sample_time(cell);
        let detached = detached_at(scene, &t);
        if !detached.is_empty() {
            return Err(SceneViolation {
                time: t,
                detached_boxes: detached,
            });
        }
    }
    Ok(())
}
