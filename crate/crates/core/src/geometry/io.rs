//! JSON geometry files.
//!
//! ```json
//! {
//!   "patches": [
//!     { "degrees": [1], "knots": [[0, 0, 1, 1]], "points": [[0, 1], [1, 1]] }
//!   ],
//!   "interfaces": []
//! }
//! ```
//!
//! `points` lists `[x, y(, z), w]` rows in lexicographic order, first
//! parametric index fastest. Interfaces are
//! `{patch_a, side_a, patch_b, side_b, reverse}` with sides named
//! `d{k}_min` / `d{k}_max` and one reverse flag per tangential direction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{patch_from_rows, Interface, MultiPatch, Patch};
use crate::error::{Error, Result};
use crate::splines::KnotVector;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    patches: Vec<PatchFile>,
    #[serde(default)]
    interfaces: Vec<InterfaceFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchFile {
    degrees: Vec<usize>,
    knots: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfaceFile {
    patch_a: usize,
    side_a: String,
    patch_b: usize,
    side_b: String,
    #[serde(default)]
    reverse: Vec<bool>,
}

const BUNDLED: &[(&str, &str)] = &[
    ("line", include_str!("../../geometries/line.json")),
    ("square", include_str!("../../geometries/square.json")),
    ("cube", include_str!("../../geometries/cube.json")),
    ("two-square", include_str!("../../geometries/two-square.json")),
    ("disc", include_str!("../../geometries/disc.json")),
    ("annulus", include_str!("../../geometries/annulus.json")),
    ("annulus-layered", include_str!("../../geometries/annulus-layered.json")),
];

/// Names accepted by [`bundled`].
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// One of the geometries shipped with the crate; a trailing `.json` is
/// ignored.
pub fn bundled(name: &str) -> Option<MultiPatch> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_geometry(text).expect("bundled geometry is valid"))
}

pub fn parse_geometry(text: &str) -> Result<MultiPatch> {
    let file: GeometryFile =
        serde_json::from_str(text).map_err(|e| Error::validation(format!("invalid geometry file: {e}")))?;
    let patches = file
        .patches
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            build_patch(p).map_err(|e| match e {
                Error::Validation(m) => Error::Validation(format!("patch {k}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let interfaces = file
        .interfaces
        .into_iter()
        .map(|i| Ok(Interface::new(i.patch_a, i.side_a.parse()?, i.patch_b, i.side_b.parse()?, i.reverse)))
        .collect::<Result<Vec<_>>>()?;
    MultiPatch::new(patches, interfaces)
}

fn build_patch(p: PatchFile) -> Result<Patch> {
    if p.degrees.len() != p.knots.len() {
        return Err(Error::validation(format!("{} degrees but {} knot vectors", p.degrees.len(), p.knots.len())));
    }
    let dirs =
        p.knots.into_iter().zip(p.degrees).map(|(k, deg)| KnotVector::new(k, deg)).collect::<Result<Vec<_>>>()?;
    patch_from_rows(dirs, &p.points)
}

/// Reads a geometry file, falling back to the bundled geometry of that name
/// when no such file exists.
pub fn load_geometry(path: impl AsRef<Path>) -> Result<MultiPatch> {
    let path = path.as_ref();
    if !path.exists() {
        if let Some(mp) = path.to_str().and_then(bundled) {
            return Ok(mp);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_geometry(&text)
}

pub fn to_json(mp: &MultiPatch) -> String {
    let file = GeometryFile {
        patches: mp
            .patches()
            .iter()
            .map(|p| PatchFile {
                degrees: p.basis().degrees(),
                knots: p.basis().dirs.iter().map(|kv| kv.knots().to_vec()).collect(),
                points: p.points().zip(p.weights()).map(|(x, &w)| x.iter().copied().chain([w]).collect()).collect(),
            })
            .collect(),
        interfaces: mp
            .interfaces()
            .iter()
            .map(|i| InterfaceFile {
                patch_a: i.patch_a,
                side_a: i.side_a.to_string(),
                patch_b: i.patch_b,
                side_b: i.side_b.to_string(),
                reverse: i.reverse.clone(),
            })
            .collect(),
    };
    // one line per knot vector, control point and interface
    let mut s = String::from("{\n  \"patches\": [\n");
    for (k, p) in file.patches.iter().enumerate() {
        s += "    {\n";
        s += &format!("      \"degrees\": {},\n", compact(&p.degrees));
        s += "      \"knots\": [\n";
        s += &join_lines(p.knots.iter().map(compact), 8);
        s += "      ],\n      \"points\": [\n";
        s += &join_lines(p.points.iter().map(compact), 8);
        s += "      ]\n    }";
        s += if k + 1 < file.patches.len() { ",\n" } else { "\n" };
    }
    s += "  ],\n  \"interfaces\": [";
    if file.interfaces.is_empty() {
        s += "]\n}\n";
    } else {
        s += "\n";
        s += &join_lines(file.interfaces.iter().map(compact), 4);
        s += "  ]\n}\n";
    }
    s
}

fn join_lines(items: impl Iterator<Item = String>, indent: usize) -> String {
    let items: Vec<String> = items.collect();
    let pad = " ".repeat(indent);
    let mut s = String::new();
    for (k, item) in items.iter().enumerate() {
        s += &pad;
        s += item;
        s += if k + 1 < items.len() { ",\n" } else { "\n" };
    }
    s
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("geometry serializes")
}

pub fn save_geometry(mp: &MultiPatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(mp)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conics;

    fn constructed() -> Vec<(&'static str, MultiPatch)> {
        vec![
            ("line", MultiPatch::single(conics::line(&[0.0], &[1.0]).unwrap()).unwrap()),
            ("square", MultiPatch::single(conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap()),
            ("cube", MultiPatch::single(conics::cuboid([0.0, 1.0], [0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap()),
            ("two-square", conics::two_squares().unwrap()),
            ("disc", conics::disc(1.0).unwrap()),
            ("annulus", conics::annulus(1.0, 2.0).unwrap()),
            ("annulus-layered", conics::layered_annulus(&[1.0, 1.5, 2.0]).unwrap()),
        ]
    }

    // cargo test -p igakit --lib write_bundled -- --ignored
    #[test]
    #[ignore]
    fn write_bundled() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/geometries");
        for (name, mp) in constructed() {
            save_geometry(&mp, format!("{dir}/{name}.json")).unwrap();
        }
    }

    #[test]
    fn bundled_files_match_constructors() {
        for (name, mp) in constructed() {
            assert_eq!(bundled(name).unwrap(), mp, "{name}");
            assert_eq!(bundled(&format!("{name}.json")).unwrap(), mp);
        }
        assert!(bundled("nope").is_none());
    }

    #[test]
    fn round_trip_is_identical() {
        for name in bundled_names() {
            let mp = bundled(name).unwrap();
            assert_eq!(parse_geometry(&to_json(&mp)).unwrap(), mp);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"patches": [{"degrees": [1], "knots": [[0,0,1,1]], "points": [[0,1],[1,1]], "colour": 3}]}"#;
        assert!(matches!(parse_geometry(text), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_geometry("/nonexistent/geometry.json").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
