//! Plain-text point files.
//!
//! One point per line as whitespace-separated decimal coordinates; `#`
//! starts a comment. The dimension is taken from the first data line.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::points::PointSet;

pub fn parse(text: &str) -> Result<PointSet> {
    let mut points = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let coords: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{t:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let expected = *dim.get_or_insert(coords.len());
        if coords.len() != expected {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {expected} coordinates, found {}", coords.len()),
            });
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("non-finite coordinate {x}"),
            });
        }
        points.push(Point(coords));
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no points".into(),
        });
    }
    PointSet::new(points)
}

pub fn read(path: &Path) -> Result<PointSet> {
    parse(&std::fs::read_to_string(path)?)
}

/// Canonical form: 17 significant digits per coordinate, one point per line.
pub fn format(points: &PointSet) -> String {
    let mut out = String::new();
    for p in points.iter() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, points: &PointSet) -> Result<()> {
    std::fs::write(path, format(points))?;
    Ok(())
}

/// SHA-256 of the canonical form, as lowercase hex.
pub fn digest(points: &PointSet) -> String {
    hex::encode(Sha256::digest(format(points).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments() {
        let p = parse("# header\n0 0\n1 0 # corner\n\n0.5 1e-1\n").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.point(2).coords(), &[0.5, 0.1]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            parse("0 0\n1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("0 0\n1 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse("# only\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let p = PointSet::from_coords(&[[0.1, 1.0 / 3.0], [-2.5e-7, 12345.678901234567]]).unwrap();
        let q = parse(&format(&p)).unwrap();
        assert_eq!(p, q);
        assert_eq!(digest(&p), digest(&q));
        assert_eq!(digest(&p).len(), 64);
    }
}
