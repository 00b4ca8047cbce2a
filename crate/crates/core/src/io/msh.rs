//! Gmsh MSH 2.2 ASCII reader for tetrahedral meshes.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mesh::{tet_faces, TetMesh};

const TRIANGLE: u32 = 2;
const TETRAHEDRON: u32 = 4;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            inner: s.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-empty line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what}")))
}

pub fn read_msh(path: impl AsRef<Path>) -> Result<TetMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_msh(&String::from_utf8_lossy(&bytes))
}

/// Parses MSH 2.2 ASCII text. Tets (type 4) and triangles (type 2) are read;
/// other element types are skipped. The first tag of a triangle is its
/// region (0 when untagged). Triangles that are not boundary faces of the
/// tet mesh are dropped, and nodes not used by any tet are removed.
pub fn parse_msh(text: &str) -> Result<TetMesh> {
    let mut lines = Lines::new(text);
    let mut nodes: Vec<Point3> = Vec::new();
    let mut node_ids: HashMap<u64, usize> = HashMap::new();
    let mut tets: Vec<[u64; 4]> = Vec::new();
    let mut tris: Vec<([u64; 3], i32, usize)> = Vec::new();
    let mut saw_format = false;

    while let Some((ln, header)) = lines.next() {
        match header {
            "$MeshFormat" => {
                let (ln, l) = lines.expect("format line")?;
                let mut it = l.split_whitespace();
                let version = it.next().unwrap_or("");
                let file_type: u32 = num(it.next(), ln, "file type")?;
                if !version.starts_with("2.") {
                    return Err(Error::UnsupportedVersion(format!("MSH {version}")));
                }
                if file_type != 0 {
                    return Err(Error::UnsupportedVersion(format!("MSH {version} binary")));
                }
                expect_end(&mut lines, "$EndMeshFormat")?;
                saw_format = true;
            }
            "$Nodes" => {
                let (ln, l) = lines.expect("node count")?;
                let n: usize = num(Some(l), ln, "node count")?;
                nodes.reserve(n);
                for _ in 0..n {
                    let (ln, l) = lines.expect("node")?;
                    let mut it = l.split_whitespace();
                    let id: u64 = num(it.next(), ln, "node id")?;
                    let x: f64 = num(it.next(), ln, "x coordinate")?;
                    let y: f64 = num(it.next(), ln, "y coordinate")?;
                    let z: f64 = num(it.next(), ln, "z coordinate")?;
                    if node_ids.insert(id, nodes.len()).is_some() {
                        return Err(Error::parse(ln, format!("duplicate node id {id}")));
                    }
                    nodes.push(Point3::new(x, y, z));
                }
                expect_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                let (ln, l) = lines.expect("element count")?;
                let n: usize = num(Some(l), ln, "element count")?;
                for _ in 0..n {
                    let (ln, l) = lines.expect("element")?;
                    let mut it = l.split_whitespace();
                    let _id: u64 = num(it.next(), ln, "element id")?;
                    let ty: u32 = num(it.next(), ln, "element type")?;
                    let ntags: usize = num(it.next(), ln, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(num::<i32>(it.next(), ln, "tag")?);
                    }
                    let mut ids = || num::<u64>(it.next(), ln, "node reference");
                    match ty {
                        TETRAHEDRON => tets.push([ids()?, ids()?, ids()?, ids()?]),
                        TRIANGLE => tris.push(([ids()?, ids()?, ids()?], tags.first().copied().unwrap_or(0), ln)),
                        _ => {}
                    }
                }
                expect_end(&mut lines, "$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = lines.expect(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            other => return Err(Error::parse(ln, format!("unexpected line `{other}`"))),
        }
    }
    if !saw_format {
        return Err(Error::parse(1, "missing $MeshFormat section"));
    }
    if tets.is_empty() {
        return Err(Error::NoTets);
    }

    let lookup = |id: u64| {
        node_ids
            .get(&id)
            .copied()
            .ok_or_else(|| Error::InvalidMesh(format!("element references undefined node {id}")))
    };
    // compact to the nodes used by tets, in file order
    let mut used = vec![false; nodes.len()];
    let mut raw_tets = Vec::with_capacity(tets.len());
    for t in &tets {
        let t = [lookup(t[0])?, lookup(t[1])?, lookup(t[2])?, lookup(t[3])?];
        t.iter().for_each(|&i| used[i] = true);
        raw_tets.push(t);
    }
    let mut new_index = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (i, p) in nodes.iter().enumerate() {
        if used[i] {
            new_index[i] = kept.len();
            kept.push(*p);
        }
    }
    let tets: Vec<[usize; 4]> = raw_tets.iter().map(|t| t.map(|i| new_index[i])).collect();

    let mut face_count: HashMap<[usize; 3], usize> = HashMap::new();
    for t in &tets {
        for mut f in tet_faces(t) {
            f.sort_unstable();
            *face_count.entry(f).or_default() += 1;
        }
    }
    let mut seen = HashSet::new();
    let mut boundary = Vec::new();
    for (tri, tag, ln) in tris {
        let tri = [lookup(tri[0])?, lookup(tri[1])?, lookup(tri[2])?];
        if tri.iter().any(|&i| !used[i]) {
            continue;
        }
        let tri = tri.map(|i| new_index[i]);
        let mut key = tri;
        key.sort_unstable();
        if face_count.get(&key) != Some(&1) {
            continue;
        }
        if !seen.insert(key) {
            return Err(Error::parse(ln, format!("boundary triangle {tri:?} listed twice")));
        }
        boundary.push((tri, tag));
    }
    TetMesh::new(kept, tets, boundary)
}

fn expect_end(lines: &mut Lines<'_>, end: &str) -> Result<()> {
    let (ln, l) = lines.expect(end)?;
    if l != end {
        return Err(Error::parse(ln, format!("expected {end}, found `{l}`")));
    }
    Ok(())
}

/// Serializes a tet mesh as MSH 2.2 ASCII: boundary triangles (type 2) with
/// their region as physical and elementary tag, followed by the tets
/// (type 4) in region 1.
pub fn format_msh(mesh: &TetMesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.nodes().len());
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{} {:.16e} {:.16e} {:.16e}", i + 1, p.x, p.y, p.z);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary_tris().len() + mesh.tets().len());
    let mut id = 1;
    for (tri, tag) in mesh.boundary_tris() {
        let _ = writeln!(s, "{id} 2 2 {tag} {tag} {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
        id += 1;
    }
    for t in mesh.tets() {
        let _ = writeln!(s, "{id} 4 2 1 1 {} {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

pub fn write_msh(path: impl AsRef<Path>, mesh: &TetMesh) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_msh(mesh)).map_err(|e| Error::io(path, e))
}
