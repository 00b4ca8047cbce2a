#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_pentamesh");

/// Runs the binary in `dir`.
pub fn pentamesh(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to start pentamesh")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Values of a `SCALARS` array of a legacy VTK file.
pub fn vtk_scalars(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header = format!("SCALARS {name} ");
    lines.by_ref().find(|l| l.starts_with(&header)).expect("array not found");
    lines.next();
    lines
        .map_while(|l| l.parse::<f64>().ok())
        .collect()
}

pub fn vtk_points(text: &str) -> Vec<[f64; 3]> {
    let mut lines = text.lines();
    let n: usize = lines
        .by_ref()
        .find_map(|l| l.strip_prefix("POINTS "))
        .and_then(|l| l.split_whitespace().next()?.parse().ok())
        .expect("no POINTS section");
    lines
        .take(n)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

/// Square channel along x1 in (x1, x2, t): extruded in x3 with 14 layers,
/// then fitted onto [-6, 6] x [-1, 1]^3 and mapped towards a circular
/// cross-section.
pub fn artery_config(c: f64) -> String {
    format!(
        r#"{{
    "input": "channel.msh",
    "extrusion": {{"t_lo": 0, "t_hi": 1, "layers": 14}},
    "axes": [0, 1, 3, 2],
    "shift_scale": {{"lo": [-6, -1, -1, -1], "hi": [6, 1, 1, 1]}},
    "dirichlet": [
        {{"regions": [1, 2, 3, 4, 5, 6, -1, -2],
          "field": {{"kind": "SQUARE_TO_CIRCLE", "params": {{"c": {c}}}}}}}
    ]
}}"#
    )
}

/// Valve analog: the base channel in (x, y, t) is extruded over z in
/// [0, 4] with 5 layers, the axes are reordered to (x, y, z, t) and the
/// exit gate closes with VALVE_GATE. The scalar problem drives u = 1
/// left of the valve and u = 2 right of it.
pub const VALVE_CONFIG: &str = r#"{
    "input": "valve.msh",
    "extrusion": {"t_lo": 0, "t_hi": 4, "layers": 5},
    "axes": [0, 1, 3, 2],
    "dirichlet": [
        {"regions": [1, 2, 3, 4, 5, 6, 7, -1, -2], "field": {"kind": "VALVE_GATE", "params": {}}}
    ],
    "problem": {
        "advection": [1, 0, 0],
        "kappa": 0.01,
        "initial": {"kind": "RAMP", "params": {"axis": 0, "from": 6, "to": 8, "v_from": 1, "v_to": 2}},
        "initial_regions": [5],
        "dirichlet": [{"regions": [1, 2, 3, 4, 7, -1, -2],
                       "field": {"kind": "RAMP", "params": {"axis": 0, "from": 6, "to": 8, "v_from": 1, "v_to": 2}}}]
    },
    "slices": [
        {"time": 2, "query_mesh": "space.msh", "fields": ["u", "displacement"], "output": "open.vtk"},
        {"time": 6, "query_mesh": "space.msh", "fields": ["u", "displacement"], "output": "split.vtk"},
        {"time": 10, "query_mesh": "space.msh", "fields": ["u", "displacement"], "output": "closing.vtk"}
    ],
    "output_dir": "out"
}"#;

/// Writes the valve base mesh, the spatial query box and the config.
pub fn valve_case(dir: &Path) {
    let out = pentamesh(dir, &["generate", "valve", "--output", "valve.msh"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = pentamesh(
        dir,
        &["generate", "box", "--grid", "30", "8", "8", "--hi", "15", "4", "4", "--output", "space.msh"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    std::fs::write(dir.join("run.json"), VALVE_CONFIG).unwrap();
}

/// Sorted `(name, bytes)` of every file in `dir`.
pub fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}
