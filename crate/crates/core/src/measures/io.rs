//! Plain-text measure files.
//!
//! ```text
//! # atomic-measure v1, alpha=1.5, provenance=cantor
//! # atom_spacing=1.2e-4
//! x,y,re_w,im_w
//! ```
//! The `atom_spacing` line is optional; without it the nearest-neighbour
//! distance is used. Factored measures are written expanded.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{Atom, AtomicMeasure, Provenance};
use crate::error::{LabError, Result};
use crate::vec2::Vec2;

const MAGIC: &str = "# atomic-measure v1";

pub fn write_csv<W: Write>(measure: &AtomicMeasure, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{MAGIC}, alpha={}, provenance={}",
        measure.declared_alpha(),
        measure.provenance()
    )?;
    writeln!(out, "# atom_spacing={:e}", measure.atom_spacing())?;
    for a in measure.atoms() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            a.position.x, a.position.y, a.weight.re, a.weight.im
        )?;
    }
    out.flush()?;
    Ok(())
}

fn header_field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.split(',')
        .map(str::trim)
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| LabError::Parse(format!("header is missing `{key}=`")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| LabError::Parse(format!("line {line}: `{s}` is not a number")))
}

pub fn read_csv<R: BufRead>(input: R) -> Result<AtomicMeasure> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| LabError::Parse("empty file".into()))??;
    if !header.starts_with(MAGIC) {
        return Err(LabError::Parse(format!("expected `{MAGIC}` header")));
    }
    let alpha = parse_f64(header_field(&header, "alpha")?, 1)?;
    let provenance: Provenance = header_field(&header, "provenance")?.parse()?;
    let mut spacing = None;
    let mut atoms = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("atom_spacing=") {
                spacing = Some(parse_f64(v, lineno)?);
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(LabError::Parse(format!("line {lineno}: expected 4 columns")));
        }
        let v: Vec<f64> = cols.iter().map(|c| parse_f64(c, lineno)).collect::<Result<_>>()?;
        atoms.push(Atom::new(Vec2::new(v[0], v[1]), Complex64::new(v[2], v[3])));
    }
    let mut m = AtomicMeasure::from_atoms(atoms, alpha, provenance)?;
    if let Some(s) = spacing {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(LabError::Parse(format!("bad atom_spacing {s}")));
        }
        m.set_atom_spacing(s);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor_measure, CantorSpec};

    #[test]
    fn round_trip_is_exact() {
        let m = build_cantor_measure(&CantorSpec::new(2, 0.3, 3, 0.2, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.declared_alpha(), m.declared_alpha());
        assert_eq!(back.provenance(), Provenance::Cantor);
        assert_eq!(back.atom_spacing(), m.atom_spacing());
        let a: Vec<Atom> = m.atoms().collect();
        let b: Vec<Atom> = back.atoms().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_csv("hello\n".as_bytes()).is_err());
        let bad = "# atomic-measure v1, alpha=1, provenance=custom\n1,2,3\n";
        assert!(read_csv(bad.as_bytes()).is_err());
        let bad = "# atomic-measure v1, alpha=1, provenance=weird\n1,2,3,4\n";
        assert!(read_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn spacing_line_is_optional() {
        let text = "# atomic-measure v1, alpha=1, provenance=custom\n0,0,0.5,0\n0.25,0,0.5,0\n";
        let m = read_csv(text.as_bytes()).unwrap();
        assert_eq!(m.atom_spacing(), 0.25);
    }
}
