//! Native ASCII format for pentatope meshes.
//!
//! ```text
//! P4M 1
//! nodes N
//! x y z t            (N lines)
//! pentatopes M
//! a b c d e          (M lines, zero-based)
//! facets F
//! a b c d tag        (F lines)
//! provenance N       (optional)
//! base layer         (N lines)
//! ```
//!
//! Coordinates are written with 17 significant digits, so a write/read
//! round trip reproduces the mesh exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point4;
use crate::mesh::{BoundaryFacet, PentaMesh, Provenance};

pub const MAGIC: &str = "P4M 1";

pub fn format_p4m(mesh: &PentaMesh) -> String {
    let mut s = String::with_capacity(80 * mesh.num_nodes() + 40 * mesh.num_pentas());
    s.push_str(MAGIC);
    s.push('\n');
    let _ = writeln!(s, "nodes {}", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2], p[3]);
    }
    let _ = writeln!(s, "pentatopes {}", mesh.num_pentas());
    for e in mesh.pentas() {
        let _ = writeln!(s, "{} {} {} {} {}", e[0], e[1], e[2], e[3], e[4]);
    }
    let _ = writeln!(s, "facets {}", mesh.boundary_facets().len());
    for f in mesh.boundary_facets() {
        let n = f.nodes;
        let _ = writeln!(s, "{} {} {} {} {}", n[0], n[1], n[2], n[3], f.tag);
    }
    if let Some(prov) = mesh.provenance() {
        let _ = writeln!(s, "provenance {}", prov.len());
        for p in prov {
            let _ = writeln!(s, "{} {}", p.base, p.layer);
        }
    }
    s
}

pub fn write_p4m(path: impl AsRef<Path>, mesh: &PentaMesh) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_p4m(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_p4m(path: impl AsRef<Path>) -> Result<PentaMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_p4m(&text)
}

const SECTIONS: [&str; 4] = ["nodes", "pentatopes", "facets", "provenance"];

fn is_header(line: &str) -> bool {
    line.split_whitespace()
        .next()
        .is_some_and(|w| SECTIONS.contains(&w))
}

fn fields<T: std::str::FromStr, const N: usize>(line: &str, ln: usize) -> Result<[T; N]> {
    let mut it = line.split_whitespace();
    let mut out = Vec::with_capacity(N);
    for _ in 0..N {
        let tok = it
            .next()
            .ok_or_else(|| Error::parse(ln, format!("expected {N} values")))?;
        out.push(
            tok.parse()
                .map_err(|_| Error::parse(ln, format!("invalid value `{tok}`")))?,
        );
    }
    if it.next().is_some() {
        return Err(Error::parse(ln, format!("expected {N} values")));
    }
    out.try_into().map_err(|_| Error::parse(ln, "internal"))
}

/// Body lines of the section at `pos`, which must be `name`.
fn section<'a>(
    lines: &'a [(usize, &'a str)],
    pos: &mut usize,
    name: &str,
    required: bool,
) -> Result<Option<&'a [(usize, &'a str)]>> {
    let Some(&(ln, header)) = lines.get(*pos) else {
        return if required {
            Err(Error::parse(lines.last().map_or(1, |l| l.0) + 1, format!("missing section `{name}`")))
        } else {
            Ok(None)
        };
    };
    let mut it = header.split_whitespace();
    if it.next() != Some(name) {
        return Err(Error::parse(ln, format!("expected section `{name}`, found `{header}`")));
    }
    let count: usize = it
        .next()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::parse(ln, format!("invalid count in `{header}`")))?;
    let start = *pos + 1;
    let found = lines[start..]
        .iter()
        .take(count)
        .take_while(|(_, l)| !is_header(l))
        .count();
    if found != count {
        return Err(Error::CountMismatch {
            section: name.into(),
            declared: count,
            found,
        });
    }
    *pos = start + count;
    Ok(Some(&lines[start..*pos]))
}

/// Keeps the stored vertex order; inverted elements are not reoriented.
pub fn parse_p4m(text: &str) -> Result<PentaMesh> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::parse(1, "empty file"));
    };
    if first != MAGIC {
        return match first.strip_prefix("P4M ") {
            Some(v) => Err(Error::UnsupportedVersion(format!("P4M {v}"))),
            None => Err(Error::parse(1, format!("expected `{MAGIC}`"))),
        };
    }

    let mut pos = 1;
    let nodes = section(&lines, &mut pos, "nodes", true)?
        .unwrap()
        .iter()
        .map(|&(ln, l)| fields::<f64, 4>(l, ln).map(|c| Point4::new(c[0], c[1], c[2], c[3])))
        .collect::<Result<Vec<_>>>()?;
    let pentas = section(&lines, &mut pos, "pentatopes", true)?
        .unwrap()
        .iter()
        .map(|&(ln, l)| fields::<usize, 5>(l, ln))
        .collect::<Result<Vec<_>>>()?;
    let facets = section(&lines, &mut pos, "facets", true)?
        .unwrap()
        .iter()
        .map(|&(ln, l)| {
            let [a, b, c, d, tag] = fields::<i64, 5>(l, ln)?;
            let idx = [a, b, c, d]
                .map(usize::try_from)
                .into_iter()
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(ln, "negative node index"))?;
            let tag = i32::try_from(tag).map_err(|_| Error::parse(ln, "tag out of range"))?;
            Ok(BoundaryFacet {
                nodes: [idx[0], idx[1], idx[2], idx[3]],
                tag,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = section(&lines, &mut pos, "provenance", false)?
        .map(|body| {
            body.iter()
                .map(|&(ln, l)| fields::<usize, 2>(l, ln).map(|[base, layer]| Provenance { base, layer }))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    if let Some(&(ln, l)) = lines.get(pos) {
        return Err(Error::parse(ln, format!("unexpected trailing content `{l}`")));
    }
    PentaMesh::from_raw(nodes, pentas, facets, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrude::{extrude, ExtrusionSpec};
    use crate::geometry::Point3;
    use crate::mesh::TetMesh;

    fn sample() -> PentaMesh {
        let tet = TetMesh::new(
            vec![
                Point3::new(0.1, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0 / 3.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2, 3]],
            vec![([0, 1, 2], 4)],
        )
        .unwrap();
        extrude(&tet, &ExtrusionSpec::new(0.0, 0.7, 1).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let back = parse_p4m(&format_p4m(&m)).unwrap();
        assert_eq!(back, m);
        assert!(back.provenance().is_some());
    }

    #[test]
    fn truncated_file_is_a_count_mismatch() {
        let text = format_p4m(&sample());
        let cut: Vec<&str> = text.lines().collect();
        let truncated = cut[..cut.len() - 12].join("\n");
        assert!(matches!(parse_p4m(&truncated), Err(Error::CountMismatch { .. })));
        let short_nodes = text.replacen("nodes 8", "nodes 9", 1);
        assert!(matches!(
            parse_p4m(&short_nodes),
            Err(Error::CountMismatch { declared: 9, found: 8, .. })
        ));
    }

    #[test]
    fn bad_tokens_and_versions() {
        let text = format_p4m(&sample());
        let bad = text.replacen("pentatopes 4\n", "pentatopes 4\n0 1 2 x 4\n", 1);
        assert!(matches!(parse_p4m(&bad), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_p4m(&text.replacen("P4M 1", "P4M 2", 1)),
            Err(Error::UnsupportedVersion(_))
        ));
    }
}
