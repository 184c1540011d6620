//! Text attribute files.
//!
//! ```text
//! #c=10;classes=5,5
//! # any other comment
//! 0,3,7
//! 1,0,5
//! ```
//!
//! The header declares `c` and optionally contiguous class sizes. Every
//! vector id in `0..n` must appear on exactly one line, where `n` is one past
//! the largest id.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::attributes::AttributeTable;
use crate::error::{Error, Result};

pub fn read_attrs(path: impl AsRef<Path>) -> Result<AttributeTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_attrs(&text).map_err(|m| Error::format(path, m))
}

/// As [`read_attrs`], additionally requiring exactly `n` vectors.
pub fn read_attrs_for(path: impl AsRef<Path>, n: usize) -> Result<AttributeTable> {
    let path = path.as_ref();
    let table = read_attrs(path)?;
    if table.num_vectors() != n {
        return Err(Error::format(path, format!("covers {} vectors but the dataset has {n}", table.num_vectors())));
    }
    Ok(table)
}

fn parse_header(h: &str) -> std::result::Result<(usize, Option<Vec<usize>>), String> {
    let mut c = None;
    let mut classes = None;
    for part in h.split(';') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("malformed header field `{part}`"))?;
        match key.trim() {
            "c" => c = Some(value.trim().parse::<usize>().map_err(|e| format!("bad c: {e}"))?),
            "classes" => {
                classes = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("bad class size `{s}`: {e}")))
                        .collect::<std::result::Result<Vec<_>, _>>()?,
                )
            }
            other => return Err(format!("unknown header field `{other}`")),
        }
    }
    Ok((c.ok_or("header lacks c")?, classes))
}

fn parse_attrs(text: &str) -> std::result::Result<AttributeTable, String> {
    let mut header = None;
    let mut rows: Vec<Option<Vec<usize>>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let at = |m: String| format!("line {}: {m}", lineno + 1);
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_none() && comment.trim_start().starts_with("c=") {
                header = Some(parse_header(comment.trim()).map_err(at)?);
            }
            continue;
        }
        let (c, _) = header.as_ref().ok_or_else(|| at("data before the `#c=` header".into()))?;
        let mut fields = line.split(',').map(str::trim);
        let id: usize =
            fields.next().expect("split yields one field").parse().map_err(|e| at(format!("bad vector id: {e}")))?;
        let attrs = fields
            .map(|f| {
                let a: usize = f.parse().map_err(|e| at(format!("bad attribute `{f}`: {e}")))?;
                if a >= *c {
                    return Err(at(format!("attribute {a} out of range (c = {c})")));
                }
                Ok(a)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if attrs.is_empty() {
            return Err(at(format!("vector {id} lists no attribute")));
        }
        if rows.len() <= id {
            rows.resize(id + 1, None);
        }
        if rows[id].is_some() {
            return Err(at(format!("duplicate line for vector {id}")));
        }
        rows[id] = Some(attrs);
    }
    let (c, classes) = header.ok_or("missing `#c=` header")?;
    if let Some(missing) = rows.iter().position(Option::is_none) {
        return Err(format!("vector {missing} has no line"));
    }
    if rows.is_empty() {
        return Err("no vectors".into());
    }
    let table = AttributeTable::new(c, rows.into_iter().map(Option::unwrap).collect()).map_err(|e| e.to_string())?;
    match classes {
        Some(sizes) => table.with_class_sizes(&sizes).map_err(|e| e.to_string()),
        None => Ok(table),
    }
}

pub fn format_attrs(table: &AttributeTable) -> String {
    let mut s = format!("#c={}", table.num_attributes());
    if let Some(sizes) = table.class_sizes() {
        let sizes: Vec<String> = sizes.iter().map(ToString::to_string).collect();
        write!(s, ";classes={}", sizes.join(",")).expect("write to String");
    }
    s.push('\n');
    for id in 0..table.num_vectors() {
        write!(s, "{id}").expect("write to String");
        for a in table.of(id) {
            write!(s, ",{a}").expect("write to String");
        }
        s.push('\n');
    }
    s
}

pub fn write_attrs(path: impl AsRef<Path>, table: &AttributeTable) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_attrs(table)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> std::result::Result<AttributeTable, String> {
        parse_attrs(text)
    }

    #[test]
    fn valid_files() {
        let t = parse("#c=3\n0,2\n1,0\n2,1\n").unwrap();
        assert_eq!((t.num_vectors(), t.label(0), t.label(2)), (3, 2, 1));
        let t = parse("# produced by hand\n#c=10;classes=5,5\n\n1,3,8\n0,1,6\n2,4,9\n3,0,5\n5,0,7\n4,2,5\n").unwrap();
        assert_eq!(t.of(5), &[0, 7]);
        assert_eq!(t.class_sizes(), Some(vec![5, 5]));
        assert!(t.is_one_per_class());
    }

    #[test]
    fn rejects() {
        let missing = parse("#c=3\n0,1\n2,1\n").unwrap_err();
        assert!(missing.contains("vector 1"), "{missing}");
        assert!(parse("#c=3\n0,3\n").unwrap_err().contains("out of range"));
        assert!(parse("#c=3\n0,1\n0,2\n").unwrap_err().contains("duplicate"));
        assert!(parse("0,1\n").is_err());
        assert!(parse("#c=3\n0\n").is_err());
        assert!(parse("#c=3\nx,1\n").is_err());
        assert!(parse("#c=4;classes=3,2\n0,1\n").is_err());
        assert!(parse("#c=3\n").is_err());
        assert!(parse("#c=3;k=2\n0,1\n").is_err());
    }

    #[test]
    fn round_trip_and_io() {
        let t = AttributeTable::new(6, vec![vec![0, 4], vec![2, 3], vec![1, 5]])
            .unwrap()
            .with_class_sizes(&[3, 3])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_attrs(&p, &t).unwrap();
        assert_eq!(read_attrs(&p).unwrap(), t);
        assert!(read_attrs_for(&p, 3).is_ok());
        assert!(matches!(read_attrs_for(&p, 4), Err(Error::Format { .. })));
        assert!(matches!(read_attrs(dir.path().join("nope")), Err(Error::Io { .. })));
    }
}
