//! Nodal field files.
//!
//! ```text
//! P4F 1
//! field <name> <components> <N>
//! v [v v v]          (N lines)
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::locate::NodalField;

pub const MAGIC: &str = "P4F 1";

pub fn format_fields(fields: &[(String, NodalField)]) -> Result<String> {
    let mut s = String::new();
    s.push_str(MAGIC);
    s.push('\n');
    for (name, f) in fields {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("invalid field name `{name}`")));
        }
        let _ = writeln!(s, "field {name} {} {}", f.components(), f.len());
        match f {
            NodalField::Scalar(v) => v.iter().for_each(|x| {
                let _ = writeln!(s, "{x:.16e}");
            }),
            NodalField::Vector(v) => v.iter().for_each(|x| {
                let _ = writeln!(s, "{:.16e} {:.16e} {:.16e} {:.16e}", x[0], x[1], x[2], x[3]);
            }),
        }
    }
    Ok(s)
}

pub fn write_fields(path: impl AsRef<Path>, fields: &[(String, NodalField)]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_fields(fields)?).map_err(|e| Error::io(path, e))
}

pub fn read_fields(path: impl AsRef<Path>) -> Result<Vec<(String, NodalField)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fields(&text)
}

pub fn parse_fields(text: &str) -> Result<Vec<(String, NodalField)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((_, l)) if l.starts_with("P4F ") => return Err(Error::UnsupportedVersion(l.into())),
        _ => return Err(Error::parse(1, format!("expected `{MAGIC}`"))),
    }
    let mut out = Vec::new();
    while let Some((ln, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [kw, name, comps, count] = parts[..] else {
            return Err(Error::parse(ln, format!("expected `field <name> <components> <count>`, found `{header}`")));
        };
        if kw != "field" {
            return Err(Error::parse(ln, format!("expected a field header, found `{header}`")));
        }
        let count: usize = count
            .parse()
            .map_err(|_| Error::parse(ln, "invalid count"))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            match lines.peek() {
                Some((_, l)) if !l.starts_with("field ") => {}
                _ => {
                    return Err(Error::CountMismatch {
                        section: name.into(),
                        declared: count,
                        found: values.len(),
                    })
                }
            }
            let (ln, l) = lines.next().unwrap();
            let row = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::parse(ln, format!("invalid value `{t}`"))))
                .collect::<Result<Vec<f64>>>()?;
            values.push((ln, row));
        }
        let field = match comps {
            "1" => NodalField::Scalar(
                values
                    .into_iter()
                    .map(|(ln, r)| match r[..] {
                        [v] => Ok(v),
                        _ => Err(Error::parse(ln, "expected 1 value")),
                    })
                    .collect::<Result<_>>()?,
            ),
            "4" => NodalField::Vector(
                values
                    .into_iter()
                    .map(|(ln, r)| match r[..] {
                        [a, b, c, d] => Ok([a, b, c, d]),
                        _ => Err(Error::parse(ln, "expected 4 values")),
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(Error::parse(ln, "components must be 1 or 4")),
        };
        out.push((name.to_string(), field));
    }
    Ok(out)
}
