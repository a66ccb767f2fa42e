//! JSON wire formats for scenes, sheaves, matrices and paths.
//!
//! Rationals travel as `"p"` / `"p/q"` strings; plain JSON integers are
//! accepted on input, floats are rejected.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cones::rational::{self, serde_rational, Rational};
use crate::cones::{PolyhedralCone, RationalMatrix, RationalVector};
use crate::error::{Error, Result};
use crate::geometry::{CoverBox, EvasionPath, Interval, Scene, Window};
use crate::sheaf::{Cell, ConeSheaf, Side, Stratification};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "serde_rational::vec")]
    pub entries: Vec<Rational>,
}

impl From<&RationalMatrix> for MatrixJson {
    fn from(m: &RationalMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.to_dense(),
        }
    }
}

impl TryFrom<&MatrixJson> for RationalMatrix {
    type Error = Error;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        RationalMatrix::new(m.rows, m.cols, m.entries.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowJson {
    #[serde(with = "serde_rational::vec")]
    x: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    y: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(with = "serde_rational::vec")]
    t: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    x: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    y: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    window: WindowJson,
    boxes: Vec<BoxJson>,
}

fn interval(what: &str, v: &[Rational]) -> Result<Interval> {
    match v {
        [lo, hi] => Interval::new(lo.clone(), hi.clone())
            .map_err(|e| Error::Input(format!("{what}: {e}"))),
        _ => Err(Error::Input(format!(
            "{what}: expected [lo, hi], found {} values",
            v.len()
        ))),
    }
}

fn pair(i: &Interval) -> Vec<Rational> {
    vec![i.lo.clone(), i.hi.clone()]
}

fn parse_json<'a, T: Deserialize<'a>>(what: &str, text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("{what}: {e}")))
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let s: SceneJson = parse_json("scene", text)?;
    let window = Window::new(interval("window.x", &s.window.x)?, interval("window.y", &s.window.y)?)?;
    let boxes = s
        .boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let ctx = |axis: &str| match &b.name {
                Some(n) => format!("box {n}.{axis}"),
                None => format!("boxes[{i}].{axis}"),
            };
            Ok(CoverBox::new(
                interval(&ctx("t"), &b.t)?,
                interval(&ctx("x"), &b.x)?,
                interval(&ctx("y"), &b.y)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene::new(window, boxes))
}

pub fn scene_to_json(scene: &Scene) -> String {
    let s = SceneJson {
        description: None,
        window: WindowJson {
            x: pair(&scene.window.x),
            y: pair(&scene.window.y),
        },
        boxes: scene
            .boxes
            .iter()
            .map(|b| BoxJson {
                name: None,
                t: pair(&b.t),
                x: pair(&b.x),
                y: pair(&b.y),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&s).expect("scene serializes")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StalkJson {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<VectorJson>>,
    /// Ambient dimension; needed only for non-free stalks without generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorJson(#[serde(with = "serde_rational::vec")] pub Vec<Rational>);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionJson {
    pub from: String,
    pub to: String,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(with = "serde_rational::vec")]
    pub vertices: Vec<Rational>,
    pub stalks: IndexMap<String, StalkJson>,
    pub restrictions: Vec<RestrictionJson>,
}

fn stalk_json(k: &PolyhedralCone) -> StalkJson {
    let labels = (0..k.len()).map(|i| k.label(i)).collect();
    if k.is_free() {
        StalkJson {
            labels,
            generators: None,
            dim: None,
        }
    } else {
        StalkJson {
            labels,
            generators: Some(
                k.generators()
                    .iter()
                    .map(|g| VectorJson(g.entries().to_vec()))
                    .collect(),
            ),
            dim: Some(k.ambient_dim()),
        }
    }
}

fn stalk_from_json(id: &str, s: &StalkJson) -> Result<PolyhedralCone> {
    let ctx = |e: Error| Error::Input(format!("stalk {id}: {e}"));
    match &s.generators {
        None => {
            if let Some(d) = s.dim {
                if d != s.labels.len() {
                    return Err(ctx(Error::mismatch("free stalk dim", s.labels.len(), d)));
                }
            }
            Ok(PolyhedralCone::free(s.labels.clone()))
        }
        Some(gens) => {
            let dim = s
                .dim
                .or_else(|| gens.first().map(|g| g.0.len()))
                .ok_or_else(|| ctx(Error::Input("empty generator list needs \"dim\"".into())))?;
            let gens = gens.iter().map(|g| RationalVector::new(g.0.clone())).collect();
            PolyhedralCone::new(dim, gens, Some(s.labels.clone())).map_err(ctx)
        }
    }
}

pub fn sheaf_to_json_value(s: &ConeSheaf) -> SheafJson {
    let strat = s.stratification();
    let mut stalks = IndexMap::new();
    for cell in strat.cells() {
        stalks.insert(cell.id(), stalk_json(s.stalk(cell)));
    }
    let mut restrictions = Vec::new();
    for v in 0..s.num_vertices() {
        for side in [Side::Left, Side::Right] {
            restrictions.push(RestrictionJson {
                from: Cell::Vertex(v).id(),
                to: Cell::Edge(ConeSheaf::incident_edge(v, side)).id(),
                matrix: s.restriction(v, side).into(),
            });
        }
    }
    SheafJson {
        description: None,
        vertices: strat.vertex_times().to_vec(),
        stalks,
        restrictions,
    }
}

pub fn sheaf_to_json(s: &ConeSheaf) -> String {
    serde_json::to_string_pretty(&sheaf_to_json_value(s)).expect("sheaf serializes")
}

pub fn parse_sheaf(text: &str) -> Result<ConeSheaf> {
    let j: SheafJson = parse_json("sheaf", text)?;
    sheaf_from_json(&j)
}

pub fn sheaf_from_json(j: &SheafJson) -> Result<ConeSheaf> {
    let strat = Stratification::new(j.vertices.clone())?;
    let k = strat.num_vertices();
    for id in j.stalks.keys() {
        let cell = Cell::parse(id)?;
        let ok = match cell {
            Cell::Vertex(v) => v < k,
            Cell::Edge(e) => e <= k,
        };
        if !ok {
            return Err(Error::Input(format!("stalk {id} names no cell of the stratification")));
        }
    }
    let stalk = |cell: Cell| -> Result<PolyhedralCone> {
        let id = cell.id();
        let s = j
            .stalks
            .get(&id)
            .ok_or_else(|| Error::Input(format!("missing stalk {id}")))?;
        stalk_from_json(&id, s)
    };
    let vertex_stalks = (0..k).map(|v| stalk(Cell::Vertex(v))).collect::<Result<Vec<_>>>()?;
    let edge_stalks = (0..=k).map(|e| stalk(Cell::Edge(e))).collect::<Result<Vec<_>>>()?;
    let mut to_left: Vec<Option<RationalMatrix>> = vec![None; k];
    let mut to_right: Vec<Option<RationalMatrix>> = vec![None; k];
    for r in &j.restrictions {
        let ctx = |msg: String| Error::Input(format!("restriction {} -> {}: {msg}", r.from, r.to));
        let (Cell::Vertex(v), Cell::Edge(e)) = (Cell::parse(&r.from)?, Cell::parse(&r.to)?) else {
            return Err(ctx("must map a vertex to an edge".into()));
        };
        if v >= k {
            return Err(ctx("unknown vertex".into()));
        }
        let slot = if e == v {
            &mut to_left[v]
        } else if e == v + 1 {
            &mut to_right[v]
        } else {
            return Err(ctx("edge is not incident to the vertex".into()));
        };
        if slot.is_some() {
            return Err(ctx("given twice".into()));
        }
        *slot = Some(RationalMatrix::try_from(&r.matrix).map_err(|e| ctx(e.to_string()))?);
    }
    let collect = |maps: Vec<Option<RationalMatrix>>, side: Side| {
        maps.into_iter()
            .enumerate()
            .map(|(v, m)| {
                m.ok_or_else(|| {
                    Error::Input(format!(
                        "missing restriction {} -> {}",
                        Cell::Vertex(v),
                        Cell::Edge(ConeSheaf::incident_edge(v, side))
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    ConeSheaf::new(
        strat,
        vertex_stalks,
        edge_stalks,
        collect(to_left, Side::Left)?,
        collect(to_right, Side::Right)?,
    )
}

/// Bound of a path segment: a rational or `"-inf"` / `"inf"`.
fn bound(b: &Option<Rational>, neg: bool) -> serde_json::Value {
    match b {
        Some(r) => serde_json::Value::String(rational::format(r)),
        None if neg => "-inf".into(),
        None => "inf".into(),
    }
}

pub fn path_to_json_value(p: &EvasionPath) -> serde_json::Value {
    serde_json::Value::Array(
        p.segments
            .iter()
            .map(|s| {
                serde_json::json!({
                    "t": [bound(&s.start, true), bound(&s.end, false)],
                    "point": [rational::format(&s.point.x), rational::format(&s.point.y)],
                })
            })
            .collect(),
    )
}

pub fn path_to_json(p: &EvasionPath) -> String {
    serde_json::to_string_pretty(&path_to_json_value(p)).expect("path serializes")
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::rational::int;

    #[test]
    fn truncated_scene_reports_location() {
        let err = parse_scene("{\"window\": {\"x\": [0, 1],").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn float_rejected() {
        let err = parse_scene(r#"{"window":{"x":[0,1.5],"y":[0,1]},"boxes":[]}"#).unwrap_err();
        assert!(err.to_string().contains("p/q"), "{err}");
    }

    #[test]
    fn scene_round_trip() {
        let text = r#"{"window":{"x":[0,"10"],"y":["0","21/2"]},
            "boxes":[{"name":"A","t":[1,3],"x":[0,10],"y":[2,3]}]}"#;
        let s = parse_scene(text).unwrap();
        assert_eq!(s.window.y.hi, rational::ratio(21, 2));
        let again = parse_scene(&scene_to_json(&s)).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn reversed_interval_named() {
        let text = r#"{"window":{"x":[0,10],"y":[0,10]},
            "boxes":[{"name":"A","t":[3,1],"x":[0,10],"y":[2,3]}]}"#;
        let msg = parse_scene(text).unwrap_err().to_string();
        assert!(msg.contains("box A.t"), "{msg}");
    }

    #[test]
    fn sheaf_round_trip() {
        let text = r#"{
          "vertices": ["1/2"],
          "stalks": {
            "e1": {"labels": ["a"]},
            "v1": {"labels": ["p", "q"], "generators": [[1, 0], [1, 1]]},
            "e2": {"labels": ["b", "c"]}
          },
          "restrictions": [
            {"from": "v1", "to": "e1", "matrix": {"rows": 1, "cols": 2, "entries": [1, 0]}},
            {"from": "v1", "to": "e2", "matrix": {"rows": 2, "cols": 2, "entries": [1, 0, 0, 1]}}
          ]
        }"#;
        let s = parse_sheaf(text).unwrap();
        assert!(!s.vertex_stalk(0).is_free());
        assert_eq!(s.restriction(0, Side::Right), &RationalMatrix::identity(2));
        let again = parse_sheaf(&sheaf_to_json(&s)).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn missing_restriction() {
        let text = r#"{"vertices": [0],
          "stalks": {"e1": {"labels": []}, "v1": {"labels": []}, "e2": {"labels": []}},
          "restrictions": [{"from": "v1", "to": "e1", "matrix": {"rows": 0, "cols": 0, "entries": []}}]}"#;
        let msg = parse_sheaf(text).unwrap_err().to_string();
        assert!(msg.contains("missing restriction v1 -> e2"), "{msg}");
    }

    #[test]
    fn non_incident_restriction() {
        let text = r#"{"vertices": [0, 1],
          "stalks": {"e1": {"labels": []}, "v1": {"labels": []}, "e2": {"labels": []},
                     "v2": {"labels": []}, "e3": {"labels": []}},
          "restrictions": [{"from": "v1", "to": "e3", "matrix": {"rows": 0, "cols": 0, "entries": []}}]}"#;
        let msg = parse_sheaf(text).unwrap_err().to_string();
        assert!(msg.contains("not incident"), "{msg}");
    }

    #[test]
    fn matrix_shape_checked() {
        let m = MatrixJson {
            rows: 2,
            cols: 2,
            entries: vec![int(1)],
        };
        assert!(RationalMatrix::try_from(&m).is_err());
    }
}
