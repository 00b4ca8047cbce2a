use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pentamesh_core::generate::{box_tet_mesh, valve_analog_base, BoxGrid};
use pentamesh_core::io::{fieldfile, msh, p4m, vtk, RunConfig};
use pentamesh_core::locate::NodalField;
use pentamesh_core::pipeline::{self, DISPLACEMENT_FIELD, SOLUTION_FIELD};
use pentamesh_core::{
    extrude, slice, validate, Error, ExtrusionSpec, LocateIndex, PentaMesh, SliceJob, SliceQuery, BOTTOM, TOP,
};

mod log;

use log::kv;

#[derive(Parser)]
#[command(name = "pentamesh", version, about = "Pentatope space-time meshes: extrusion, elastic mesh update, solve, slicing")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extrude a tet mesh (MSH 2.2) into a pentatope mesh.
    Extrude {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Move the nodes with the 4D elastic mesh update.
    Deform {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides `solver.tol` of the configuration.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the nodal displacement field.
        #[arg(long)]
        displacement: Option<PathBuf>,
    },
    /// Check element measures and facet conformity.
    Validate {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Solve the configured scalar problem.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Interpolate nodal fields onto 3D slices and write VTK files.
    Interp(InterpArgs),
    /// Run every stage from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a structured tet mesh.
    #[command(subcommand)]
    Generate(Generate),
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Field files; every field in them can be sliced.
    #[arg(long, num_args = 1.., required = true)]
    fields: Vec<PathBuf>,
    /// Take the slices from this configuration.
    #[arg(long, conflicts_with_all = ["time", "query", "output"])]
    config: Option<PathBuf>,
    /// Output directory for configured slices (default: the configuration's).
    #[arg(long, requires = "config")]
    output_dir: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    time: Option<f64>,
    /// Spatial tet mesh (MSH) whose nodes are the query points.
    #[arg(long, required_unless_present = "config")]
    query: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    output: Option<PathBuf>,
    /// Fields to slice (default: all).
    #[arg(long = "field")]
    names: Vec<String>,
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Subcommand)]
enum Generate {
    /// Box `[lo, hi]^3` with six tets per cell.
    Box {
        #[arg(long, default_value_t = 1)]
        cells: usize,
        #[arg(long, num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
        lo: Vec<f64>,
        #[arg(long, num_args = 3, default_values_t = [1.0, 1.0, 1.0], allow_negative_numbers = true)]
        hi: Vec<f64>,
        /// Cells per axis; overrides `--cells`.
        #[arg(long, num_args = 3)]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Valve-like channel in (x, y, t) that splits for 4 < t < 8.
    Valve {
        #[arg(long, default_value_t = 1)]
        refine: usize,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Exit status for library errors: 2 usage and input, 3 invalid meshes,
/// 4 numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidMesh(_)
        | Error::Conformity { .. }
        | Error::DegeneratePrism(_)
        | Error::InvertedElement { .. }
        | Error::EmptyMesh => 3,
        Error::NoConvergence { .. } => 4,
        _ => 2,
    }
}

enum Failure {
    Lib(Error),
    Tangled,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match cli.cmd {
        Cmd::Extrude {
            input,
            t0,
            t1,
            layers,
            output,
        } => cmd_extrude(&input, t0, t1, layers, &output),
        Cmd::Deform {
            mesh,
            config,
            output,
            tol,
            displacement,
        } => cmd_deform(&mesh, &config, &output, tol, displacement.as_deref()),
        Cmd::Validate { mesh } => cmd_validate(&mesh),
        Cmd::Solve { mesh, config, output } => cmd_solve(&mesh, &config, &output),
        Cmd::Interp(args) => cmd_interp(&args),
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Generate(g) => cmd_generate(g),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tangled) => ExitCode::from(3),
        Err(Failure::Lib(e)) => {
            let code = exit_code(&e);
            kv(
                "error",
                &[("code", code.to_string()), ("kind", e.kind().into()), ("message", format!("{e}"))],
            );
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(code)
        }
    }
}

fn cmd_extrude(input: &Path, t0: f64, t1: f64, layers: usize, output: &Path) -> CmdResult {
    let start = Instant::now();
    let spec = ExtrusionSpec::new(t0, t1, layers)?;
    let base = msh::read_msh(input)?;
    let mesh = extrude(&base, &spec)?;
    let elapsed = start.elapsed();

    let (tets, tris) = (base.tets().len(), base.boundary_tris().len());
    let count = |tag: i32| mesh.boundary_facets().iter().filter(|f| f.tag == tag).count();
    let (bottom, top) = (count(BOTTOM), count(TOP));
    let mantle = mesh.boundary_facets().len() - bottom - top;
    let content = mesh.total_measure();
    let expected = base.volume() * (t1 - t0);
    let rel = (content - expected).abs() / expected.abs();
    println!("pentatopes: {}", mesh.num_pentas());
    println!("nodes: {}", mesh.num_nodes());
    println!("boundary facets: {}", mesh.boundary_facets().len());
    println!(
        "identity pentatopes = 4 * tets * layers: {} = 4 * {tets} * {layers}",
        mesh.num_pentas()
    );
    println!(
        "identity nodes = base nodes * (layers + 1): {} = {} * {}",
        mesh.num_nodes(),
        base.nodes().len(),
        layers + 1
    );
    println!("identity mantle facets = 3 * boundary triangles * layers: {mantle} = 3 * {tris} * {layers}");
    println!("identity bottom = top = tets: {bottom} = {top} = {tets}");
    println!("content: {content:e} expected: {expected:e} relative error: {rel:e}");

    let report = validate(&mesh);
    let identities = mesh.num_pentas() == 4 * tets * layers
        && mesh.num_nodes() == base.nodes().len() * (layers + 1)
        && mantle == 3 * tris * layers
        && bottom == tets
        && top == tets;
    kv(
        "extrude",
        &[
            ("pentatopes", mesh.num_pentas().to_string()),
            ("nodes", mesh.num_nodes().to_string()),
            ("content_rel_error", format!("{rel:e}")),
            ("elapsed_s", format!("{:.3}", elapsed.as_secs_f64())),
        ],
    );
    if !identities || rel > 1e-12 || !report.passed {
        eprintln!("error: extruded mesh failed its checks");
        return Err(Failure::Tangled);
    }
    p4m::write_p4m(output, &mesh)?;
    Ok(())
}

fn print_report(mesh: &PentaMesh) -> bool {
    let r = validate(mesh);
    println!("pentatopes: {}", mesh.num_pentas());
    println!("nodes: {}", mesh.num_nodes());
    println!("min measure: {:e}", r.min_measure);
    println!("max measure: {:e}", r.max_measure);
    println!("inverted: {}", r.inverted_count);
    println!("nonconforming facets: {}", r.nonconforming_facet_count);
    println!("orphan nodes: {}", r.orphan_node_count);
    println!("max edge ratio: {:e}", r.max_edge_ratio);
    println!("passed: {}", r.passed);
    kv(
        "validate",
        &[
            ("min_measure", format!("{:e}", r.min_measure)),
            ("inverted", r.inverted_count.to_string()),
            ("nonconforming", r.nonconforming_facet_count.to_string()),
            ("passed", r.passed.to_string()),
        ],
    );
    r.passed
}

fn cmd_validate(path: &Path) -> CmdResult {
    let mesh = p4m::read_p4m(path)?;
    if print_report(&mesh) {
        Ok(())
    } else {
        Err(Failure::Tangled)
    }
}

fn cmd_deform(mesh: &Path, config: &Path, output: &Path, tol: Option<f64>, disp: Option<&Path>) -> CmdResult {
    let mut cfg = RunConfig::load(config)?;
    if let Some(t) = tol {
        cfg.solver.tol = t;
    }
    let input = p4m::read_p4m(mesh)?;
    let start = Instant::now();
    let stage = pipeline::deform_stage(&input, &cfg)?;
    let (iters, res) = stage
        .stats
        .as_ref()
        .map_or((0, 0.0), |s| (s.iterations, s.relative_residual));
    println!("min measure: {:e}", stage.report.min_measure);
    println!("inverted: {}", stage.report.inverted_count);
    println!("cg iterations: {iters}");
    println!("max displacement: {:e}", stage.displacement.max_norm());
    kv(
        "deform",
        &[
            ("cg_iterations", iters.to_string()),
            ("relative_residual", format!("{res:e}")),
            ("min_measure", format!("{:e}", stage.report.min_measure)),
            ("elapsed_s", format!("{:.3}", start.elapsed().as_secs_f64())),
        ],
    );
    p4m::write_p4m(output, &stage.mesh)?;
    if let Some(p) = disp {
        let values = NodalField::Vector(stage.displacement.values().to_vec());
        fieldfile::write_fields(p, &[(DISPLACEMENT_FIELD.to_string(), values)])?;
    }
    if !stage.report.passed {
        eprintln!(
            "error: updated mesh is tangled ({} inverted elements)",
            stage.report.inverted_count
        );
        return Err(Failure::Tangled);
    }
    Ok(())
}

fn cmd_solve(mesh: &Path, config: &Path, output: &Path) -> CmdResult {
    let cfg = RunConfig::load(config)?;
    let mesh = p4m::read_p4m(mesh)?;
    let start = Instant::now();
    let (u, stats) = pipeline::solve_stage(&mesh, &cfg)?;
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("gmres iterations: {}", stats.iterations);
    println!("min u: {lo:e}");
    println!("max u: {hi:e}");
    kv(
        "solve",
        &[
            ("iterations", stats.iterations.to_string()),
            ("relative_residual", format!("{:e}", stats.relative_residual)),
            ("elapsed_s", format!("{:.3}", start.elapsed().as_secs_f64())),
        ],
    );
    fieldfile::write_fields(output, &[(SOLUTION_FIELD.to_string(), NodalField::Scalar(u))])?;
    Ok(())
}

fn load_fields(paths: &[PathBuf]) -> Result<Vec<(String, NodalField)>, Error> {
    let mut all: Vec<(String, NodalField)> = Vec::new();
    for p in paths {
        for (name, f) in fieldfile::read_fields(p)? {
            if all.iter().any(|(n, _)| *n == name) {
                return Err(Error::Config(format!("field `{name}` given twice")));
            }
            all.push((name, f));
        }
    }
    Ok(all)
}

fn cmd_interp(a: &InterpArgs) -> CmdResult {
    let mesh = p4m::read_p4m(&a.mesh)?;
    let fields = load_fields(&a.fields)?;
    for (_, f) in &fields {
        if f.len() != mesh.num_nodes() {
            return Err(Error::LengthMismatch {
                what: "field",
                expected: mesh.num_nodes(),
                actual: f.len(),
            }
            .into());
        }
    }
    if let Some(config) = &a.config {
        let cfg = RunConfig::load(config)?;
        let dir = a.output_dir.clone().unwrap_or_else(|| cfg.output_dir());
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let slices = pipeline::slice_stage(&mesh, &fields, &cfg)?;
        for p in pipeline::write_slices(&dir, &slices)? {
            println!("wrote {}", p.display());
        }
        kv("interp", &[("slices", slices.len().to_string())]);
        return Ok(());
    }

    // required_unless_present guarantees these
    let (time, query, output) = (a.time.unwrap(), a.query.as_ref().unwrap(), a.output.as_ref().unwrap());
    let names = if a.names.is_empty() {
        fields.iter().map(|(n, _)| n.clone()).collect()
    } else {
        a.names.clone()
    };
    let job = SliceJob {
        query: SliceQuery::Mesh(msh::read_msh(query)?),
        time,
        fields: names,
        margin: a.margin,
    };
    let index = LocateIndex::build(&mesh)?;
    let out = slice(&job, &mesh, &index, &fields)?;
    vtk::write_vtk_slice(output, &out.points, &out.tets, &out.arrays)?;
    let extrapolated = out
        .arrays
        .iter()
        .find(|a| a.name == "status")
        .map_or(0, |a| match &a.data {
            vtk::PointData::Int(v) => v.iter().filter(|&&s| s != 0).count(),
            _ => 0,
        });
    println!("points: {}", out.points.len());
    println!("extrapolated: {extrapolated}");
    kv(
        "interp",
        &[("points", out.points.len().to_string()), ("extrapolated", extrapolated.to_string())],
    );
    Ok(())
}

fn cmd_run(config: &Path) -> CmdResult {
    let cfg = RunConfig::load(config)?;
    let start = Instant::now();
    let summary = pipeline::run(&cfg)?;
    println!("pentatopes: {}", summary.extruded.num_pentas());
    println!("min measure: {:e}", summary.deformed.report.min_measure);
    if let Some(s) = &summary.deformed.stats {
        println!("cg iterations: {}", s.iterations);
    }
    if let Some((_, s)) = &summary.solution {
        println!("gmres iterations: {}", s.iterations);
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    kv(
        "run",
        &[
            ("files", summary.files.len().to_string()),
            ("elapsed_s", format!("{:.3}", start.elapsed().as_secs_f64())),
        ],
    );
    Ok(())
}

fn cmd_generate(g: Generate) -> CmdResult {
    let (mesh, output) = match g {
        Generate::Box {
            cells,
            lo,
            hi,
            grid,
            output,
        } => {
            let cells = match grid {
                Some(g) => [g[0], g[1], g[2]],
                None => [cells; 3],
            };
            let grid = BoxGrid {
                lo: [lo[0], lo[1], lo[2]],
                hi: [hi[0], hi[1], hi[2]],
                cells,
            };
            (box_tet_mesh(&grid)?, output)
        }
        Generate::Valve { refine, output } => (valve_analog_base(refine)?, output),
    };
    msh::write_msh(&output, &mesh)?;
    println!("tets: {}", mesh.tets().len());
    println!("nodes: {}", mesh.nodes().len());
    Ok(())
}
