//! Command-line front end: subcommands, run reports and plots.
//!
//! Exit codes: `0` when an evasion path (or section) exists, `2` when it
//! does not, `1` on any error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use num_traits::ToPrimitive;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cones::is_valid_certificate;
use crate::cones::rational::{serde_rational, Rational};
use crate::error::{Error, Result};
use crate::geometry::{build_sheaf, extract_path, gap_labeling, validate_scene, EvasionPath, Scene};
use crate::io;
use crate::oracle::{dp_section_exists, enumerate_sections};
use crate::sheaf::{global_sections, validate_sheaf, ConeSheaf, GlobalSections};

pub const EXIT_EVASION: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_EVASION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "evasion", version, about = "Exact evasion-path decisions for planar coverage scenes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide a scene and print a run report.
    Check(CheckArgs),
    /// Print the sheaf of gap components of a scene.
    Sheaf {
        /// Scene JSON file.
        scene: PathBuf,
    },
    /// Print the labeled coboundary matrix of a scene or sheaf.
    Matrix {
        /// Scene JSON file, or sheaf JSON with --sheaf.
        input: PathBuf,
        /// Treat the input as sheaf JSON instead of a scene.
        #[arg(long)]
        sheaf: bool,
    },
    /// Decide an abstract sheaf and print a run report.
    Lp(LpArgs),
    /// Run the combinatorial section search on a free function-like sheaf.
    Oracle {
        /// Sheaf JSON file.
        sheaf: PathBuf,
        /// Maximum number of sections to enumerate.
        #[arg(long, default_value_t = 1000)]
        cap: usize,
    },
    /// Print an evasion path for a scene, if one exists.
    Path {
        /// Scene JSON file.
        scene: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Scene JSON file.
    pub scene: PathBuf,
    /// Cross-check the verdict against the section oracle.
    #[arg(long)]
    pub oracle: bool,
    /// Embed the labeled coboundary in the report.
    #[arg(long)]
    pub matrix: bool,
    /// Write the extracted evasion path to this file.
    #[arg(long, value_name = "FILE")]
    pub path: Option<PathBuf>,
    /// Write an SVG of gap components over time with the path overlaid.
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LpArgs {
    /// Sheaf JSON file.
    pub sheaf: PathBuf,
    /// Cross-check the verdict against the section oracle.
    #[arg(long)]
    pub oracle: bool,
    /// Embed the labeled coboundary in the report.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Evasion,
    NoEvasion,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Evasion => EXIT_EVASION,
            Verdict::NoEvasion => EXIT_NO_EVASION,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledValue {
    pub cell: String,
    pub label: String,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// Positive generator coordinates.
    pub support: Vec<LabeledValue>,
    /// Full generator-coordinate vector.
    #[serde(with = "serde_rational::vec")]
    pub lambda: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    /// Nonzero entries of `y`, indexed by coboundary row.
    pub entries: Vec<LabeledValue>,
    #[serde(with = "serde_rational::vec")]
    pub y: Vec<Rational>,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixReport {
    pub rows: usize,
    pub cols: usize,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    #[serde(with = "serde_rational::vec")]
    pub entries: Vec<Rational>,
    /// Coboundary times the generator matrix, present when some vertex
    /// stalk is not free.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<io::MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<IndexMap<String, String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub file: Option<String>,
    pub segments: usize,
    pub chain: IndexMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub verdict: Verdict,
    pub kernel_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathReport>,
    pub timing_ms: IndexMap<String, f64>,
    pub input_digest: String,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Default)]
struct Timer(IndexMap<String, f64>);

impl Timer {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        self.0.insert(name.to_string(), (ms * 1e3).round() / 1e3);
        out
    }
}

fn digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

fn joined((cell, label): &(String, String)) -> String {
    format!("{cell}:{label}")
}

pub fn matrix_report(gs: &GlobalSections, s: &ConeSheaf) -> MatrixReport {
    let cb = &gs.coboundary;
    let m = io::MatrixJson::from(&cb.matrix);
    let free = (0..s.num_vertices()).all(|v| s.vertex_stalk(v).is_free());
    MatrixReport {
        rows: m.rows,
        cols: m.cols,
        row_labels: cb.row_labels.iter().map(joined).collect(),
        column_labels: cb.coordinate_labels.iter().map(joined).collect(),
        entries: m.entries,
        system: (!free).then(|| io::MatrixJson::from(&cb.system)),
        generator_labels: (!free).then(|| cb.column_labels.iter().map(joined).collect()),
    }
}

fn labeled(labels: &[(String, String)], values: &[Rational]) -> Vec<LabeledValue> {
    labels
        .iter()
        .zip(values)
        .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
        .map(|((cell, label), v)| LabeledValue {
            cell: cell.clone(),
            label: label.clone(),
            value: v.clone(),
        })
        .collect()
}

/// Verdict, witness or re-verified certificate, and kernel dimension.
fn decision_report(gs: &GlobalSections, timing: IndexMap<String, f64>, digest: String) -> RunReport {
    let cb = &gs.coboundary;
    let witness = gs.witness().map(|x| WitnessReport {
        support: labeled(&cb.column_labels, x.entries()),
        lambda: x.entries().to_vec(),
    });
    let certificate = gs.decision.certificate.as_ref().map(|y| CertificateReport {
        entries: labeled(&cb.row_labels, y.entries()),
        y: y.entries().to_vec(),
        verified: is_valid_certificate(&cb.system, y).unwrap_or(false),
    });
    RunReport {
        verdict: if gs.is_feasible() {
            Verdict::Evasion
        } else {
            Verdict::NoEvasion
        },
        kernel_dim: gs.kernel.len(),
        witness,
        certificate,
        matrix: None,
        oracle: None,
        path: None,
        timing_ms: timing,
        input_digest: digest,
    }
}

fn run_oracle(s: &ConeSheaf, gs: &GlobalSections) -> Result<OracleReport> {
    let chain = dp_section_exists(s)?;
    if chain.is_some() != gs.is_feasible() {
        return Err(Error::Internal(format!(
            "section oracle disagrees with the linear program (oracle: {}, LP: {})",
            chain.is_some(),
            gs.is_feasible()
        )));
    }
    Ok(OracleReport {
        exists: chain.is_some(),
        chain: chain.map(|c| c.labels(s)),
    })
}

/// Full pipeline on scene JSON text.
pub fn check_scene(
    text: &str,
    oracle: bool,
    matrix: bool,
) -> Result<(RunReport, Scene, Option<EvasionPath>)> {
    let mut t = Timer::default();
    let scene = t.stage("parse", || io::parse_scene(text))?;
    t.stage("validate", || validate_scene(&scene))?;
    let sheaf = t.stage("build_sheaf", || build_sheaf(&scene))?;
    let gs = t.stage("global_sections", || global_sections(&sheaf))?;
    let path = if gs.is_feasible() {
        Some(t.stage("extract_path", || extract_path(&scene, &gs))?)
    } else {
        None
    };
    let oracle_report = if oracle {
        Some(t.stage("oracle", || run_oracle(&sheaf, &gs))?)
    } else {
        None
    };
    let mut report = decision_report(&gs, t.0, digest(text.as_bytes()));
    report.oracle = oracle_report;
    if matrix {
        report.matrix = Some(matrix_report(&gs, &sheaf));
    }
    Ok((report, scene, path))
}

/// Decision on abstract sheaf JSON text.
pub fn check_sheaf(text: &str, oracle: bool, matrix: bool) -> Result<RunReport> {
    let mut t = Timer::default();
    let sheaf = t.stage("parse", || io::parse_sheaf(text))?;
    t.stage("validate", || validate_sheaf(&sheaf))?;
    let gs = t.stage("global_sections", || global_sections(&sheaf))?;
    let oracle_report = if oracle {
        Some(t.stage("oracle", || run_oracle(&sheaf, &gs))?)
    } else {
        None
    };
    let mut report = decision_report(&gs, t.0, digest(text.as_bytes()));
    report.oracle = oracle_report;
    if matrix {
        report.matrix = Some(matrix_report(&gs, &sheaf));
    }
    Ok(report)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

/// Runs one command, writing its primary output to `out`. Returns the exit
/// code for a successful run.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Check(a) => {
            let text = io::read_file(&a.scene)?;
            let (mut report, scene, path) = check_scene(&text, a.oracle, a.matrix)?;
            if let Some(p) = &path {
                report.path = Some(PathReport {
                    file: a.path.as_ref().map(|f| f.display().to_string()),
                    segments: p.segments.len(),
                    chain: p.chain.iter().cloned().collect(),
                });
            }
            if let (Some(file), Some(p)) = (&a.path, &path) {
                write_file(file, &io::path_to_json(p))?;
            }
            if let Some(file) = &a.plot {
                write_file(file, &plot_svg(&scene, path.as_ref())?)?;
            }
            writeln!(out, "{}", report.to_json())?;
            Ok(report.verdict.exit_code())
        }
        Command::Sheaf { scene } => {
            let scene = io::parse_scene(&io::read_file(scene)?)?;
            validate_scene(&scene)?;
            writeln!(out, "{}", io::sheaf_to_json(&build_sheaf(&scene)?))?;
            Ok(0)
        }
        Command::Matrix { input, sheaf } => {
            let text = io::read_file(input)?;
            let s = if *sheaf {
                io::parse_sheaf(&text)?
            } else {
                let scene = io::parse_scene(&text)?;
                validate_scene(&scene)?;
                build_sheaf(&scene)?
            };
            let gs = global_sections(&s)?;
            let m = matrix_report(&gs, &s);
            writeln!(out, "{}", serde_json::to_string_pretty(&m).expect("matrix serializes"))?;
            Ok(0)
        }
        Command::Lp(a) => {
            let report = check_sheaf(&io::read_file(&a.sheaf)?, a.oracle, a.matrix)?;
            writeln!(out, "{}", report.to_json())?;
            Ok(report.verdict.exit_code())
        }
        Command::Oracle { sheaf, cap } => {
            let s = io::parse_sheaf(&io::read_file(sheaf)?)?;
            validate_sheaf(&s)?;
            let chain = dp_section_exists(&s)?;
            let all = enumerate_sections(&s, *cap)?;
            let value = serde_json::json!({
                "exists": chain.is_some(),
                "chain": chain.as_ref().map(|c| c.labels(&s)),
                "count": all.len(),
                "truncated": all.len() >= *cap,
                "sections": all.iter().map(|c| c.labels(&s)).collect::<Vec<_>>(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))?;
            Ok(if chain.is_some() {
                EXIT_EVASION
            } else {
                EXIT_NO_EVASION
            })
        }
        Command::Path { scene } => {
            let (_, _, path) = check_scene(&io::read_file(scene)?, false, false)?;
            match path {
                Some(p) => {
                    writeln!(out, "{}", io::path_to_json(&p))?;
                    Ok(EXIT_EVASION)
                }
                None => {
                    writeln!(out, "[]")?;
                    Ok(EXIT_NO_EVASION)
                }
            }
        }
    }
}

fn f(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

const PALETTE: [&str; 6] = ["#4c72b0", "#55a868", "#c44e52", "#8172b2", "#ccb974", "#64b5cd"];

/// Time runs left to right, `y` bottom to top; `x` is projected away.
/// Gap components are drawn as bands over each edge and as bars at each
/// vertex; boxes are shaded grey and the path is drawn in black.
pub fn plot_svg(scene: &Scene, path: Option<&EvasionPath>) -> Result<String> {
    let l = gap_labeling(scene)?;
    let times = l.strat.vertex_times();
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(a), Some(b)) => (f(a) - 1.0, f(b) + 1.0),
        _ => (-1.0, 1.0),
    };
    let (y0, y1) = (f(&scene.window.y.lo), f(&scene.window.y.hi));
    let (w, h, pad) = (640.0, 400.0, 20.0);
    let sx = |t: f64| pad + (t - t0) / (t1 - t0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        sx(t0),
        sy(y1),
        sx(t1) - sx(t0),
        sy(y0) - sy(y1)
    );
    let k = l.strat.num_vertices();
    for e in 0..=k {
        let lo = if e == 0 { t0 } else { f(&times[e - 1]) };
        let hi = if e == k { t1 } else { f(&times[e]) };
        let fiber = &l.edge_fibers[e];
        for c in 0..fiber.len() {
            let (a, b) = fiber.y_extent(c);
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.35"><title>e{} {}</title></rect>"#,
                sx(lo),
                sy(f(&b)),
                sx(hi) - sx(lo),
                sy(f(&a)) - sy(f(&b)),
                PALETTE[c % PALETTE.len()],
                e + 1,
                fiber.components[c].label
            );
        }
    }
    for (v, t) in times.iter().enumerate() {
        let fiber = &l.vertex_fibers[v];
        for c in 0..fiber.len() {
            let (a, b) = fiber.y_extent(c);
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{3}" stroke-width="3"><title>v{4} {5}</title></line>"#,
                sx(f(t)),
                sy(f(&a)),
                sy(f(&b)),
                PALETTE[c % PALETTE.len()],
                v + 1,
                fiber.components[c].label
            );
        }
    }
    for b in &scene.boxes {
        let lo = f(&b.t.lo).max(t0);
        let hi = f(&b.t.hi).min(t1);
        let ylo = f(&b.y.lo).max(y0);
        let yhi = f(&b.y.hi).min(y1);
        if lo > hi || ylo > yhi {
            continue;
        }
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#888" fill-opacity="0.3" stroke="#555" stroke-width="1"/>"##,
            sx(lo),
            sy(yhi),
            (sx(hi) - sx(lo)).max(1.0),
            sy(ylo) - sy(yhi)
        );
    }
    if let Some(p) = path {
        let mut pts = Vec::new();
        for s in &p.segments {
            let a = s.start.as_ref().map_or(t0, f);
            let b = s.end.as_ref().map_or(t1, f);
            let y = sy(f(&s.point.y));
            pts.push(format!("{:.2},{:.2}", sx(a), y));
            pts.push(format!("{:.2},{:.2}", sx(b), y));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#000" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENE: &str = r#"{"window":{"x":[0,10],"y":[0,10]},
        "boxes":[{"t":[1,2],"x":[0,5],"y":[4,6]}]}"#;

    #[test]
    fn report_is_deterministic_modulo_timing() {
        let (mut a, _, _) = check_scene(SCENE, true, true).unwrap();
        let (mut b, _, _) = check_scene(SCENE, true, true).unwrap();
        a.timing_ms.clear();
        b.timing_ms.clear();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.verdict, Verdict::Evasion);
        assert!(a.input_digest.starts_with("sha256:"));
    }

    #[test]
    fn plot_is_svg() {
        let (_, scene, path) = check_scene(SCENE, false, false).unwrap();
        let svg = plot_svg(&scene, path.as_ref()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }
}
