use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridjoin::exec::{run_join, run_join_repeated, speedup_matrix, ExecConfig, JoinOp, JoinOutput, Mode};
use gridjoin::io::{self, ReportContext};
use gridjoin::refine::DEFAULT_BATCH_SIZE;
use gridjoin::synth::{generate, GenSpec, PointLayout};
use gridjoin::{FeatureColumns, FeatureKind, JoinError, PointColumns};

#[derive(Parser, Debug)]
#[command(
    name = "gridjoin",
    version,
    about = "Grid-filtered point-to-polyline and point-in-polygon joins"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nearest polyline within a range for every point.
    P2p(P2pArgs),
    /// Containing polygon for every point.
    Pip(PipArgs),
    /// Run all four execution modes and report speedups.
    Bench(BenchArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sc,
    Mc,
    ScLanes,
    McLanes,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sc => Mode::Sc,
            ModeArg::Mc => Mode::Mc,
            ModeArg::ScLanes => Mode::ScLanes,
            ModeArg::McLanes => Mode::McLanes,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LayoutArg {
    Clustered,
    Scattered,
}

impl From<LayoutArg> for PointLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Clustered => PointLayout::Clustered,
            LayoutArg::Scattered => PointLayout::Scattered,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ShapeArg {
    Polyline,
    Polygon,
}

impl From<ShapeArg> for FeatureKind {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Polyline => FeatureKind::Polyline,
            ShapeArg::Polygon => FeatureKind::Polygon,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OpArg {
    P2p,
    Pip,
}

#[derive(Args, Debug)]
struct ExecArgs {
    /// Grid cell side length; derived from the data extent when omitted.
    #[arg(long)]
    grid_size: Option<f64>,
    #[arg(long, value_enum, default_value = "sc")]
    mode: ModeArg,
    /// Worker threads for the multi-worker modes [default: all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Points per lane batch for the lane modes.
    #[arg(long, default_value_t = gridjoin::exec::DEFAULT_LANE_WIDTH)]
    lanes: usize,
    /// Candidate groups per scheduled batch.
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch: usize,
}

impl ExecArgs {
    fn config(&self, mode: Mode) -> Result<ExecConfig, JoinError> {
        let workers = self.workers.unwrap_or_else(gridjoin::exec::default_workers);
        ExecConfig::new(mode, workers, self.lanes, self.batch)
    }
}

#[derive(Args, Debug)]
struct P2pArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    polylines: PathBuf,
    /// Search range R.
    #[arg(long)]
    range: f64,
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PipArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    polygons: PathBuf,
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    op: OpArg,
    /// Generate the workload instead of loading it.
    #[arg(long, value_enum, conflicts_with_all = ["points", "polylines", "polygons"])]
    gen: Option<LayoutArg>,
    #[arg(long, default_value_t = 100_000)]
    gen_points: usize,
    #[arg(long, default_value_t = 1_000)]
    gen_features: usize,
    #[arg(long)]
    mean_vertices: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    holes_frac: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, conflicts_with = "polygons")]
    polylines: Option<PathBuf>,
    #[arg(long)]
    polygons: Option<PathBuf>,
    /// Search range R (p2p only).
    #[arg(long)]
    range: Option<f64>,
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: LayoutArg,
    /// Feature type [default: polyline for clustered, polygon for scattered].
    #[arg(long, value_enum)]
    shape: Option<ShapeArg>,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    features: usize,
    #[arg(long)]
    mean_vertices: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    holes_frac: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_points: PathBuf,
    #[arg(long)]
    out_features: PathBuf,
}

fn gen_spec(
    layout: PointLayout,
    shape: FeatureKind,
    points: usize,
    features: usize,
    mean_vertices: Option<f64>,
    holes_frac: f64,
    seed: u64,
) -> GenSpec {
    let mut spec = GenSpec::new(layout, shape, points, features, seed);
    if let Some(v) = mean_vertices {
        spec.mean_vertices = v;
    }
    spec.holes_fraction = holes_frac;
    spec
}

fn print_summary(points: usize, features: usize, run: &gridjoin::exec::JoinRun) {
    let t = &run.timing;
    eprintln!(
        "{} points, {} features, {} matched | {} workers={} lanes={} | index {:.3} ms, filter {:.3} ms, refine {:.3} ms",
        points,
        features,
        run.output.matched_count(),
        t.label(),
        t.workers,
        t.lane_width,
        t.index.median_ms,
        t.filter.median_ms,
        t.refine.median_ms
    );
}

fn cmd_p2p(a: P2pArgs) -> Result<(), JoinError> {
    let cfg = a.exec.config(a.exec.mode.into())?;
    let points = io::load_points(&a.points)?;
    let lines = io::load_features(&a.polylines, FeatureKind::Polyline)?;
    let run = run_join(JoinOp::P2P { range: a.range }, &points, &lines, a.exec.grid_size, &cfg)?;
    print_summary(points.len(), lines.len(), &run);
    match &run.output {
        JoinOutput::P2P(r) => io::write_p2p_results(r, &a.out),
        JoinOutput::Pip(_) => unreachable!("p2p join produced pip output"),
    }
}

fn cmd_pip(a: PipArgs) -> Result<(), JoinError> {
    let cfg = a.exec.config(a.exec.mode.into())?;
    let points = io::load_points(&a.points)?;
    let polys = io::load_features(&a.polygons, FeatureKind::Polygon)?;
    let run = run_join(JoinOp::Pip, &points, &polys, a.exec.grid_size, &cfg)?;
    print_summary(points.len(), polys.len(), &run);
    match &run.output {
        JoinOutput::Pip(r) => io::write_pip_results(r, &a.out),
        JoinOutput::P2P(_) => unreachable!("pip join produced p2p output"),
    }
}

fn bench_data(a: &BenchArgs, shape: FeatureKind) -> Result<(PointColumns, FeatureColumns, String), JoinError> {
    if let Some(layout) = a.gen {
        let spec = gen_spec(
            layout.into(),
            shape,
            a.gen_points,
            a.gen_features,
            a.mean_vertices,
            a.holes_frac,
            a.seed,
        );
        let (p, f) = generate(&spec)?;
        let desc = format!(
            "synthetic {} workload, seed {}, mean vertices {}, holes fraction {}",
            spec.layout, spec.seed, spec.mean_vertices, spec.holes_fraction
        );
        return Ok((p, f, desc));
    }
    let points = a
        .points
        .as_ref()
        .ok_or_else(|| JoinError::Usage("bench needs --gen or --points".into()))?;
    let feats = match shape {
        FeatureKind::Polyline => a.polylines.as_ref(),
        FeatureKind::Polygon => a.polygons.as_ref(),
    }
    .ok_or_else(|| {
        JoinError::Usage(format!(
            "bench --points needs --{}",
            if shape == FeatureKind::Polyline {
                "polylines"
            } else {
                "polygons"
            }
        ))
    })?;
    let desc = format!("{} against {}", points.display(), feats.display());
    Ok((io::load_points(points)?, io::load_features(feats, shape)?, desc))
}

fn cmd_bench(a: BenchArgs) -> Result<(), JoinError> {
    let (op, shape) = match a.op {
        OpArg::P2p => {
            let range = a
                .range
                .ok_or_else(|| JoinError::Usage("bench --op p2p needs --range".into()))?;
            (JoinOp::P2P { range }, FeatureKind::Polyline)
        }
        OpArg::Pip => (JoinOp::Pip, FeatureKind::Polygon),
    };
    let (points, feats, desc) = bench_data(&a, shape)?;

    let mut reports = Vec::new();
    let mut reference: Option<JoinOutput> = None;
    let mut stats = None;
    for mode in Mode::ALL {
        let cfg = a.exec.config(mode)?;
        let run = run_join_repeated(op, &points, &feats, a.exec.grid_size, &cfg, a.repeat)?;
        print_summary(points.len(), feats.len(), &run);
        match &reference {
            None => reference = Some(run.output.clone()),
            Some(r) if !r.bit_identical(&run.output) => {
                return Err(JoinError::Validation(format!(
                    "{} output differs from SC output",
                    mode.label()
                )));
            }
            Some(_) => {}
        }
        stats = Some(run.stats);
        reports.push(run.timing);
    }
    let matrix = speedup_matrix(&reports)?;
    let op_name = match op {
        JoinOp::P2P { range } => format!("point-to-polyline, range {range}"),
        JoinOp::Pip => "point-in-polygon".to_string(),
    };
    let ctx = ReportContext {
        title: format!("Speedup report: {op_name}"),
        notes: vec![
            desc,
            format!(
                "{} points, {} features, {} vertices",
                points.len(),
                feats.len(),
                feats.vertex_count()
            ),
            format!("batch size {}, {} repeats (median reported)", a.exec.batch, a.repeat),
            "all four modes produced bit-identical results".into(),
        ],
    };
    let text = io::render_report(&ctx, &reports, stats.as_ref(), &matrix);
    print!("{text}");
    io::write_report(&text, &a.report)
}

fn cmd_gen(a: GenArgs) -> Result<(), JoinError> {
    let layout: PointLayout = a.kind.into();
    let shape = a.shape.map(FeatureKind::from).unwrap_or(match layout {
        PointLayout::Clustered => FeatureKind::Polyline,
        PointLayout::Scattered => FeatureKind::Polygon,
    });
    let spec = gen_spec(
        layout,
        shape,
        a.points,
        a.features,
        a.mean_vertices,
        a.holes_frac,
        a.seed,
    );
    let (points, feats) = generate(&spec)?;
    io::write_points(&points, &a.out_points)?;
    io::write_features(&feats, &a.out_features)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match cli.command {
        Command::P2p(a) => cmd_p2p(a),
        Command::Pip(a) => cmd_pip(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
