//! Workflow stages shared by the command line driver: extrusion, mesh
//! preparation and update, scalar solve and slicing.

use std::path::{Path, PathBuf};

use crate::emum::{deform, NodalField4};
use crate::error::{Error, Result};
use crate::extrude::extrude;
use crate::io::config::RunConfig;
use crate::io::{fieldfile, msh, p4m, vtk};
use crate::krylov::SolveStats;
use crate::locate::{slice, LocateIndex, NodalField, SliceJob, SliceOutput, SliceQuery};
use crate::mesh::{validate, PentaMesh, ValidationReport};
use crate::scalar::assemble_solve;

pub const EXTRUDED_FILE: &str = "extruded.p4m";
pub const DEFORMED_FILE: &str = "deformed.p4m";
pub const DISPLACEMENT_FILE: &str = "displacement.p4f";
pub const SOLUTION_FILE: &str = "solution.p4f";

/// Name of the solution field of the scalar solver.
pub const SOLUTION_FIELD: &str = "u";
/// Name of the mesh displacement field.
pub const DISPLACEMENT_FIELD: &str = "displacement";

/// Extrudes the configured input mesh.
pub fn extrude_stage(cfg: &RunConfig) -> Result<PentaMesh> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("missing `input`".into()))?;
    let spec = cfg
        .extrusion
        .as_ref()
        .ok_or_else(|| Error::Config("missing `extrusion`".into()))?
        .spec()?;
    extrude(&msh::read_msh(input)?, &spec)
}

#[derive(Debug, Clone)]
pub struct DeformStage {
    pub mesh: PentaMesh,
    pub displacement: NodalField4,
    /// `None` when no Dirichlet data is configured and no solve took place.
    pub stats: Option<SolveStats>,
    pub report: ValidationReport,
}

/// Applies the configured axis permutation and shift/scale, then moves the
/// nodes with the elastic mesh update if Dirichlet data is given. The
/// returned mesh may be tangled; check `report`.
pub fn deform_stage(mesh: &PentaMesh, cfg: &RunConfig) -> Result<DeformStage> {
    let mut mesh = match cfg.axes {
        Some(perm) => mesh.permute_axes(perm)?,
        None => mesh.clone(),
    };
    if let Some(s) = &cfg.shift_scale {
        mesh = s.apply(&mesh)?;
    }
    cfg.check_regions(&mesh)?;
    let (mesh, displacement, stats) = if cfg.dirichlet.is_empty() {
        let n = mesh.num_nodes();
        (mesh, NodalField4::zeros(n), None)
    } else {
        let entries = cfg.dirichlet_entries()?;
        let d = deform(&mesh, cfg.elastic, &entries, cfg.solver.tol, cfg.solver.max_iter)?;
        (d.mesh, d.displacement, Some(d.stats))
    };
    let report = validate(&mesh);
    Ok(DeformStage {
        mesh,
        displacement,
        stats,
        report,
    })
}

pub fn solve_stage(mesh: &PentaMesh, cfg: &RunConfig) -> Result<(Vec<f64>, SolveStats)> {
    let prob = cfg
        .problem
        .as_ref()
        .ok_or_else(|| Error::Config("missing `problem`".into()))?;
    cfg.check_regions(mesh)?;
    assemble_solve(mesh, prob, cfg.solver.tol, cfg.solver.max_iter)
}

/// Evaluates every configured slice. Returns output file names and data.
pub fn slice_stage(
    mesh: &PentaMesh,
    fields: &[(String, NodalField)],
    cfg: &RunConfig,
) -> Result<Vec<(String, SliceOutput)>> {
    if cfg.slices.is_empty() {
        return Ok(Vec::new());
    }
    let index = LocateIndex::build(mesh)?;
    let mut out = Vec::with_capacity(cfg.slices.len());
    for (i, s) in cfg.slices.iter().enumerate() {
        let query = match (&s.query_mesh, s.raw_points()) {
            (Some(p), _) => SliceQuery::Mesh(msh::read_msh(p)?),
            (None, Some(points)) => SliceQuery::Points(points),
            (None, None) => {
                return Err(Error::Config(format!("slice {i} has no query")));
            }
        };
        let job = SliceJob {
            query,
            time: s.time,
            fields: s.fields.clone(),
            margin: s.margin,
        };
        out.push((s.output_name(i), slice(&job, mesh, &index, fields)?));
    }
    Ok(out)
}

pub fn write_slices(dir: &Path, slices: &[(String, SliceOutput)]) -> Result<Vec<PathBuf>> {
    slices
        .iter()
        .map(|(name, s)| {
            let path = dir.join(name);
            vtk::write_vtk_slice(&path, &s.points, &s.tets, &s.arrays)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub extruded: PentaMesh,
    pub deformed: DeformStage,
    pub solution: Option<(Vec<f64>, SolveStats)>,
    pub files: Vec<PathBuf>,
}

/// Runs all stages and writes their outputs into the configured output
/// directory: the extruded and deformed meshes, the displacement and
/// solution field files and one VTK file per slice.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files = Vec::new();

    let extruded = extrude_stage(cfg)?;
    let path = dir.join(EXTRUDED_FILE);
    p4m::write_p4m(&path, &extruded)?;
    files.push(path);

    let deformed = deform_stage(&extruded, cfg)?;
    if !deformed.report.passed {
        return Err(Error::InvalidMesh(format!(
            "updated mesh failed validation: {} inverted, {} nonconforming facets",
            deformed.report.inverted_count, deformed.report.nonconforming_facet_count
        )));
    }
    let path = dir.join(DEFORMED_FILE);
    p4m::write_p4m(&path, &deformed.mesh)?;
    files.push(path);
    let mut fields = vec![(
        DISPLACEMENT_FIELD.to_string(),
        NodalField::Vector(deformed.displacement.values().to_vec()),
    )];
    let path = dir.join(DISPLACEMENT_FILE);
    fieldfile::write_fields(&path, &fields)?;
    files.push(path);

    let solution = match &cfg.problem {
        Some(_) => {
            let (u, stats) = solve_stage(&deformed.mesh, cfg)?;
            let sol = vec![(SOLUTION_FIELD.to_string(), NodalField::Scalar(u.clone()))];
            let path = dir.join(SOLUTION_FILE);
            fieldfile::write_fields(&path, &sol)?;
            files.push(path);
            fields.extend(sol);
            Some((u, stats))
        }
        None => None,
    };

    let slices = slice_stage(&deformed.mesh, &fields, cfg)?;
    files.extend(write_slices(&dir, &slices)?);
    Ok(RunSummary {
        extruded,
        deformed,
        solution,
        files,
    })
}
