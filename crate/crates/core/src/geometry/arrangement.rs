//! Gap components of one time slice, computed on the rectangle arrangement.
//!
//! The window and the alive boxes cut the window into a grid of open cells.
//! Every cell, and every open grid segment between two cells, is either
//! wholly covered or wholly uncovered, so the open gap decomposes into
//! uncovered cells glued along uncovered shared segments.

use std::collections::VecDeque;

use super::{Point, Scene};
use crate::cones::rational::{midpoint, Rational};
use crate::union_find::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapComponent {
    /// Deterministic label from the lexicographically least cell corner.
    pub label: String,
    /// Least lower-left corner `(x, y)` over the component's cells.
    pub anchor: Point,
    /// Centre of the anchor cell; lies in the open component.
    pub sample: Point,
    /// Grid cells `(i, j)` of the component in lexicographic order.
    pub cells: Vec<(usize, usize)>,
}

/// Gap fiber at one time.
#[derive(Clone, Debug)]
pub struct GapFiber {
    pub time: Rational,
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    /// Component index per cell, `None` when covered.
    cell_comp: Vec<Option<usize>>,
    /// Open vertical segment `x = xs[i]`, `ys[j] < y < ys[j+1]` (for
    /// `1 <= i < nx-1`) is uncovered.
    vseg_open: Vec<bool>,
    /// Open horizontal segment `y = ys[j]`, `xs[i] < x < xs[i+1]`.
    hseg_open: Vec<bool>,
    pub components: Vec<GapComponent>,
}

impl GapFiber {
    fn ncx(&self) -> usize {
        self.xs.len() - 1
    }

    fn ncy(&self) -> usize {
        self.ys.len() - 1
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i * self.ncy() + j
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label.clone()).collect()
    }

    /// Vertical extent `(min y, max y)` of component `c`.
    pub fn y_extent(&self, c: usize) -> (Rational, Rational) {
        let cells = &self.components[c].cells;
        let lo = cells.iter().map(|&(_, j)| &self.ys[j]).min().expect("nonempty component");
        let hi = cells.iter().map(|&(_, j)| &self.ys[j + 1]).max().expect("nonempty component");
        (lo.clone(), hi.clone())
    }

    fn cell_center(&self, (i, j): (usize, usize)) -> Point {
        Point::new(
            midpoint(&self.xs[i], &self.xs[i + 1]),
            midpoint(&self.ys[j], &self.ys[j + 1]),
        )
    }

    /// Grid indices whose closed range contains `v`, restricted to the open
    /// cells touching it.
    fn candidates(coords: &[Rational], v: &Rational) -> Vec<usize> {
        let n = coords.len() - 1;
        match coords.binary_search(v) {
            Ok(k) => [k.checked_sub(1), (k < n).then_some(k)]
                .into_iter()
                .flatten()
                .collect(),
            Err(0) => vec![],
            Err(k) if k > n => vec![],
            Err(k) => vec![k - 1],
        }
    }

    /// Component containing `p`, or `None` if `p` is covered.
    ///
    /// The caller must ensure `p` is uncovered at this fiber's time for
    /// points on grid lines; the open neighbourhood of an uncovered point
    /// meets only cells of its own component.
    pub fn component_at(&self, p: &Point) -> Option<usize> {
        let is = Self::candidates(&self.xs, &p.x);
        let js = Self::candidates(&self.ys, &p.y);
        let on_line = is.len() > 1 || js.len() > 1;
        let mut found = None;
        for &i in &is {
            for &j in &js {
                match self.cell_comp[self.cell(i, j)] {
                    Some(c) if !on_line => return Some(c),
                    Some(c) => found = Some(c),
                    None if on_line => return None,
                    None => {}
                }
            }
        }
        found
    }

    /// Cell containing `p` in its interior-or-boundary that belongs to
    /// component `comp`.
    fn cell_of(&self, p: &Point, comp: usize) -> Option<(usize, usize)> {
        let is = Self::candidates(&self.xs, &p.x);
        let js = Self::candidates(&self.ys, &p.y);
        for &i in &is {
            for &j in &js {
                if self.cell_comp[self.cell(i, j)] == Some(comp) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn neighbours(&self, (i, j): (usize, usize)) -> Vec<((usize, usize), Point)> {
        let mut out = Vec::with_capacity(4);
        let (nx, ny) = (self.ncx(), self.ncy());
        if i + 1 < nx && self.vseg_open[(i + 1) * ny + j] {
            out.push((
                (i + 1, j),
                Point::new(self.xs[i + 1].clone(), midpoint(&self.ys[j], &self.ys[j + 1])),
            ));
        }
        if i > 0 && self.vseg_open[i * ny + j] {
            out.push((
                (i - 1, j),
                Point::new(self.xs[i].clone(), midpoint(&self.ys[j], &self.ys[j + 1])),
            ));
        }
        if j + 1 < ny && self.hseg_open[i * (ny + 1) + j + 1] {
            out.push((
                (i, j + 1),
                Point::new(midpoint(&self.xs[i], &self.xs[i + 1]), self.ys[j + 1].clone()),
            ));
        }
        if j > 0 && self.hseg_open[i * (ny + 1) + j] {
            out.push((
                (i, j - 1),
                Point::new(midpoint(&self.xs[i], &self.xs[i + 1]), self.ys[j].clone()),
            ));
        }
        out
    }

    /// Polyline from `a` to `b` inside one gap component of this fiber, or
    /// `None` if they lie in different components. Consecutive waypoints are
    /// joined by straight segments that stay in open cells or cross open
    /// shared segments.
    pub fn route(&self, a: &Point, b: &Point) -> Option<Vec<Point>> {
        let comp = self.component_at(a)?;
        if self.component_at(b)? != comp {
            return None;
        }
        let start = self.cell_of(a, comp)?;
        let goal = self.cell_of(b, comp)?;
        let mut prev: std::collections::HashMap<(usize, usize), ((usize, usize), Point)> =
            Default::default();
        let mut queue = VecDeque::from([start]);
        let mut seen = std::collections::HashSet::from([start]);
        while let Some(c) = queue.pop_front() {
            if c == goal {
                break;
            }
            for (n, via) in self.neighbours(c) {
                if seen.insert(n) {
                    prev.insert(n, (c, via));
                    queue.push_back(n);
                }
            }
        }
        let mut rev = vec![b.clone()];
        let mut c = goal;
        if c != start || a != b {
            rev.push(self.cell_center(goal));
        }
        while c != start {
            let (p, via) = prev.get(&c)?.clone();
            rev.push(via);
            rev.push(self.cell_center(p));
            c = p;
        }
        rev.push(a.clone());
        rev.reverse();
        rev.dedup();
        Some(rev)
    }
}

/// Connected components of `int W ∖ ⋃ {boxes alive at t}`.
pub fn gap_components(scene: &Scene, t: &Rational) -> GapFiber {
    let w = &scene.window;
    let alive: Vec<_> = scene.alive(t).into_iter().map(|i| &scene.boxes[i]).collect();
    let clip = |v: &Rational, lo: &Rational, hi: &Rational| v.clone().max(lo.clone()).min(hi.clone());
    let mut xs = vec![w.x.lo.clone(), w.x.hi.clone()];
    let mut ys = vec![w.y.lo.clone(), w.y.hi.clone()];
    for b in &alive {
        xs.push(clip(&b.x.lo, &w.x.lo, &w.x.hi));
        xs.push(clip(&b.x.hi, &w.x.lo, &w.x.hi));
        ys.push(clip(&b.y.lo, &w.y.lo, &w.y.hi));
        ys.push(clip(&b.y.hi, &w.y.lo, &w.y.hi));
    }
    xs.sort();
    xs.dedup();
    ys.sort();
    ys.dedup();
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);

    let covers_cell = |i: usize, j: usize| {
        alive.iter().any(|b| {
            b.x.lo <= xs[i] && xs[i + 1] <= b.x.hi && b.y.lo <= ys[j] && ys[j + 1] <= b.y.hi
        })
    };
    let mut covered = vec![false; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            covered[i * ny + j] = covers_cell(i, j);
        }
    }
    let mut vseg_open = vec![false; (nx + 1) * ny];
    for i in 1..nx {
        for j in 0..ny {
            vseg_open[i * ny + j] = !covered[(i - 1) * ny + j]
                && !covered[i * ny + j]
                && !alive.iter().any(|b| {
                    b.x.contains(&xs[i]) && b.y.lo <= ys[j] && ys[j + 1] <= b.y.hi
                });
        }
    }
    let mut hseg_open = vec![false; nx * (ny + 1)];
    for i in 0..nx {
        for j in 1..ny {
            hseg_open[i * (ny + 1) + j] = !covered[i * ny + j - 1]
                && !covered[i * ny + j]
                && !alive.iter().any(|b| {
                    b.y.contains(&ys[j]) && b.x.lo <= xs[i] && xs[i + 1] <= b.x.hi
                });
        }
    }

    let mut uf = UnionFind::new(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            if i + 1 < nx && vseg_open[(i + 1) * ny + j] {
                uf.union(i * ny + j, (i + 1) * ny + j);
            }
            if j + 1 < ny && hseg_open[i * (ny + 1) + j + 1] {
                uf.union(i * ny + j, i * ny + j + 1);
            }
        }
    }
    // Cells are visited in (x, y) lexicographic order of their lower-left
    // corners, so the first cell seen for a root is its anchor.
    let mut root_to_comp = std::collections::HashMap::new();
    let mut comps: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut cell_comp = vec![None; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            if covered[i * ny + j] {
                continue;
            }
            let r = uf.find(i * ny + j);
            let c = *root_to_comp.entry(r).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[c].push((i, j));
            cell_comp[i * ny + j] = Some(c);
        }
    }
    let components = comps
        .into_iter()
        .map(|cells| {
            let (i, j) = cells[0];
            let anchor = Point::new(xs[i].clone(), ys[j].clone());
            let sample = Point::new(midpoint(&xs[i], &xs[i + 1]), midpoint(&ys[j], &ys[j + 1]));
            GapComponent {
                label: anchor.to_string(),
                anchor,
                sample,
                cells,
            }
        })
        .collect();
    GapFiber {
        time: t.clone(),
        xs,
        ys,
        cell_comp,
        vseg_open,
        hseg_open,
        components,
    }
}
