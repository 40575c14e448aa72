//! Plain-text dataset, result and report files.
//!
//! Points: one `x,y` per line. Features: one `id;ring_count;c1,c2,...;x1 y1 x2 y2 ...`
//! per line with rings concatenated and implicitly closed. In both, blank
//! lines and lines starting with `#` are skipped. Coordinates are written with
//! the shortest decimal form that parses back to the same `f32`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::columnar::{build_feature_columns, Feature, FeatureColumns, FeatureKind, PointColumns};
use crate::error::{JoinError, Result};
use crate::exec::{FilterStats, SpeedupMatrix, TimingReport};
use crate::geometry::Point2D;
use crate::refine::{P2PResult, PipResult};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| JoinError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_with(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let io_err = |source| JoinError::Io {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_coord(tok: &str) -> std::result::Result<f32, String> {
    let v: f32 = tok.trim().parse().map_err(|_| format!("invalid number {tok:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite coordinate {tok:?}"))
    }
}

pub fn parse_points(text: &str, source: &Path) -> Result<PointColumns> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, l) in data_lines(text) {
        let err = |msg: String| JoinError::Parse {
            path: source.to_owned(),
            line,
            msg,
        };
        let (x, y) = l.split_once(',').ok_or_else(|| err("expected `x,y`".into()))?;
        xs.push(parse_coord(x).map_err(err)?);
        ys.push(parse_coord(y).map_err(err)?);
    }
    PointColumns::new(xs, ys)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<PointColumns> {
    let path = path.as_ref();
    parse_points(&read(path)?, path)
}

pub fn write_points(points: &PointColumns, path: impl AsRef<Path>) -> Result<()> {
    write_with(path.as_ref(), |w| {
        for (x, y) in points.xs().iter().zip(points.ys()) {
            writeln!(w, "{x},{y}")?;
        }
        Ok(())
    })
}

fn parse_feature_line(l: &str, kind: FeatureKind) -> std::result::Result<Feature, JoinError> {
    let parse_err = |msg: String| JoinError::Parse {
        path: PathBuf::new(),
        line: 0,
        msg,
    };
    let fields: Vec<&str> = l.split(';').collect();
    let [id, ring_count, counts, coords] = fields[..] else {
        return Err(parse_err(format!(
            "expected 4 `;`-separated fields, got {}",
            fields.len()
        )));
    };
    let id: u64 = id
        .trim()
        .parse()
        .map_err(|_| parse_err(format!("invalid feature id {id:?}")))?;
    let ring_count: usize = ring_count
        .trim()
        .parse()
        .map_err(|_| parse_err(format!("invalid ring count {ring_count:?}")))?;
    let counts: Vec<usize> = counts
        .split(',')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            c.trim()
                .parse()
                .map_err(|_| parse_err(format!("invalid vertex count {c:?}")))
        })
        .collect::<std::result::Result<_, _>>()?;
    let values: Vec<f32> = coords
        .split_whitespace()
        .map(|t| parse_coord(t).map_err(&parse_err))
        .collect::<std::result::Result<_, _>>()?;

    if counts.len() != ring_count {
        return Err(JoinError::validation(format!(
            "feature {id}: ring count {ring_count} but {} vertex counts",
            counts.len()
        )));
    }
    if !values.len().is_multiple_of(2) {
        return Err(parse_err("odd number of coordinate values".into()));
    }
    let total: usize = counts.iter().sum();
    if total * 2 != values.len() {
        return Err(JoinError::validation(format!(
            "feature {id}: vertex counts sum to {total} but {} vertices given",
            values.len() / 2
        )));
    }
    let min = kind.min_ring_vertices();
    let mut pts = values.chunks_exact(2).map(|c| Point2D::new(c[0] as f64, c[1] as f64));
    let mut rings = Vec::with_capacity(ring_count);
    for (ri, &c) in counts.iter().enumerate() {
        if c < min {
            return Err(JoinError::validation(format!(
                "feature {id}: ring {ri} has {c} vertices, need at least {min}"
            )));
        }
        rings.push(pts.by_ref().take(c).collect());
    }
    Ok(Feature::new(id, rings))
}

pub fn parse_features(text: &str, kind: FeatureKind, source: &Path) -> Result<FeatureColumns> {
    let mut features = Vec::new();
    for (line, l) in data_lines(text) {
        let f = parse_feature_line(l, kind).map_err(|e| match e {
            JoinError::Parse { msg, .. } => JoinError::Parse {
                path: source.to_owned(),
                line,
                msg,
            },
            JoinError::Validation(msg) => JoinError::Validation(format!("{}:{line}: {msg}", source.display())),
            other => other,
        })?;
        features.push(f);
    }
    build_feature_columns(kind, &features)
}

pub fn load_features(path: impl AsRef<Path>, kind: FeatureKind) -> Result<FeatureColumns> {
    let path = path.as_ref();
    parse_features(&read(path)?, kind, path)
}

pub fn write_features(features: &FeatureColumns, path: impl AsRef<Path>) -> Result<()> {
    write_with(path.as_ref(), |w| {
        let mut line = String::new();
        for pos in 0..features.len() {
            line.clear();
            let rings = features.ring_range(pos);
            let counts: Vec<String> = rings
                .clone()
                .map(|r| features.ring_vertex_counts[r].to_string())
                .collect();
            let _ = write!(line, "{};{};{};", features.id(pos), rings.len(), counts.join(","));
            for (i, v) in features.vertex_range(pos).enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{} {}", features.vxs[v], features.vys[v]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

pub fn write_p2p_results(result: &P2PResult, path: impl AsRef<Path>) -> Result<()> {
    write_with(path.as_ref(), |w| {
        writeln!(w, "point_index,feature_id,distance")?;
        for (i, m) in result.matches.iter().enumerate() {
            match m {
                Some(m) => writeln!(w, "{i},{},{}", m.feature_id, m.distance)?,
                None => writeln!(w, "{i},-1,")?,
            }
        }
        Ok(())
    })
}

pub fn write_pip_results(result: &PipResult, path: impl AsRef<Path>) -> Result<()> {
    write_with(path.as_ref(), |w| {
        writeln!(w, "point_index,feature_id")?;
        for (i, m) in result.containing.iter().enumerate() {
            match m {
                Some(id) => writeln!(w, "{i},{id}")?,
                None => writeln!(w, "{i},-1")?,
            }
        }
        Ok(())
    })
}

/// Context lines printed above the tables of a benchmark report.
#[derive(Debug, Clone, Default)]
pub struct ReportContext {
    pub title: String,
    pub notes: Vec<String>,
}

/// Markdown benchmark report: per-mode phase times, then the five speedups.
pub fn render_report(
    ctx: &ReportContext,
    reports: &[TimingReport],
    stats: Option<&FilterStats>,
    matrix: &SpeedupMatrix,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", ctx.title);
    for n in &ctx.notes {
        let _ = writeln!(s, "- {n}");
    }
    if let Some(st) = stats {
        let _ = writeln!(
            s,
            "- grid: {} x {} cells of size {}",
            st.grid.ncols, st.grid.nrows, st.grid.cell_size
        );
        let _ = writeln!(
            s,
            "- occupied cells: {}, candidate groups: {}, refined (point, feature) pairs: {}",
            st.occupied_cells, st.candidate_groups, st.refined_pairs
        );
    }
    let _ = writeln!(s, "\n## Runtimes (milliseconds)\n");
    let _ = writeln!(
        s,
        "| Configuration | Workers | Lanes | Repeats | Index | Filter | Refine (median) | Refine (min) |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
    for r in reports {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.3} |",
            r.label(),
            r.workers,
            r.lane_width,
            r.repeats,
            r.index.median_ms,
            r.filter.median_ms,
            r.refine.median_ms,
            r.refine.min_ms
        );
    }
    let _ = writeln!(s, "\n## Speedups (refine phase)\n");
    let _ = writeln!(s, "| | Configuration | Speedup |");
    let _ = writeln!(s, "|---|---|---|");
    for (group, label, v) in matrix.rows() {
        let _ = writeln!(s, "| {group} | {label} | {v:.2} |");
    }
    s
}

pub fn write_report(text: &str, path: impl AsRef<Path>) -> Result<()> {
    write_with(path.as_ref(), |w| w.write_all(text.as_bytes()))
}
