//! Mesh vertex loading for footprint analysis.
//!
//! Only vertex positions matter for an axis-aligned bounding box, so faces,
//! normals, and materials are ignored everywhere. STL covers the binary and
//! ASCII variants, OBJ reads `v` records, and Collada reads geometry
//! `<float_array>` positions, applying the document's `<unit meter>` scale
//! and the Y_UP to Z_UP axis remap when declared.

use std::path::Path;

use roxmltree::{Document, Node};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read mesh `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown mesh extension for `{0}` (expected .stl, .obj, or .dae)")]
    UnknownExtension(String),
    #[error("corrupt mesh `{path}`: {detail}")]
    Corrupt { path: String, detail: String },
    #[error("collada `{0}` has no position arrays")]
    NoPositions(String),
}

/// Load every vertex position of a mesh file, in mesh-local coordinates.
pub fn load_mesh_vertices(path: &Path) -> Result<Vec<[f64; 3]>, MeshError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| MeshError::Io {
        path: display.clone(),
        source,
    })?;
    match ext.as_str() {
        "stl" => load_stl(&bytes, &display),
        "obj" => load_obj(&bytes, &display),
        "dae" => load_collada(&bytes, &display),
        _ => Err(MeshError::UnknownExtension(display)),
    }
}

fn corrupt(path: &str, detail: impl Into<String>) -> MeshError {
    MeshError::Corrupt {
        path: path.to_string(),
        detail: detail.into(),
    }
}

fn load_stl(bytes: &[u8], path: &str) -> Result<Vec<[f64; 3]>, MeshError> {
    // Binary STL: 80-byte header, u32 triangle count, 50 bytes per triangle.
    // The size check is the reliable discriminator; binary files may well
    // start with the bytes "solid" too.
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if bytes.len() == 84 + 50 * count {
            return load_binary_stl(bytes, count);
        }
    }
    if bytes.trim_ascii_start().starts_with(b"solid") {
        let text = std::str::from_utf8(bytes).map_err(|_| corrupt(path, "ASCII STL is not valid UTF-8"))?;
        return load_ascii_stl(text, path);
    }
    Err(corrupt(path, "neither a well-sized binary STL nor an ASCII STL"))
}

fn load_binary_stl(bytes: &[u8], count: usize) -> Result<Vec<[f64; 3]>, MeshError> {
    let mut vertices = Vec::with_capacity(count * 3);
    for tri in 0..count {
        let base = 84 + tri * 50 + 12; // skip the normal
        for v in 0..3 {
            let off = base + v * 12;
            let mut coord = [0.0; 3];
            for c in 0..3 {
                let s = off + c * 4;
                coord[c] = f32::from_le_bytes([bytes[s], bytes[s + 1], bytes[s + 2], bytes[s + 3]]) as f64;
            }
            vertices.push(coord);
        }
    }
    Ok(vertices)
}

fn load_ascii_stl(text: &str, path: &str) -> Result<Vec<[f64; 3]>, MeshError> {
    let mut vertices = Vec::new();
    let mut tokens = text.split_whitespace();
    while let Some(tok) = tokens.next() {
        if tok != "vertex" {
            continue;
        }
        let mut coord = [0.0; 3];
        for c in &mut coord {
            let t = tokens.next().ok_or_else(|| corrupt(path, "truncated vertex record"))?;
            *c = t
                .parse::<f64>()
                .map_err(|_| corrupt(path, format!("bad vertex coordinate `{t}`")))?;
        }
        vertices.push(coord);
    }
    Ok(vertices)
}

fn load_obj(bytes: &[u8], path: &str) -> Result<Vec<[f64; 3]>, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|_| corrupt(path, "OBJ is not valid UTF-8"))?;
    let mut vertices = Vec::new();
    for line in text.lines() {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("v") {
            continue;
        }
        let mut coord = [0.0; 3];
        for c in &mut coord {
            let t = tokens
                .next()
                .ok_or_else(|| corrupt(path, format!("short vertex record `{line}`")))?;
            *c = t
                .parse::<f64>()
                .map_err(|_| corrupt(path, format!("bad vertex coordinate `{t}`")))?;
        }
        vertices.push(coord);
    }
    Ok(vertices)
}

fn load_collada(bytes: &[u8], path: &str) -> Result<Vec<[f64; 3]>, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|_| corrupt(path, "collada is not valid UTF-8"))?;
    let doc = Document::parse(text).map_err(|e| corrupt(path, format!("invalid XML: {e}")))?;
    let root = doc.root_element();

    let meter = root
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "unit")
        .and_then(|n| n.attribute("meter"))
        .and_then(|m| m.trim().parse::<f64>().ok())
        .unwrap_or(1.0);
    let y_up = root
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "up_axis")
        .and_then(|n| n.text())
        .map(|t| t.trim() == "Y_UP")
        .unwrap_or(false);

    let mut vertices = Vec::new();
    for vertices_node in root
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "vertices")
    {
        let source_id = match position_source_id(&vertices_node) {
            Some(id) => id,
            None => continue,
        };
        let source = root
            .descendants()
            .find(|n| n.is_element() && n.tag_name().name() == "source" && n.attribute("id") == Some(source_id));
        let source = match source {
            Some(s) => s,
            None => continue,
        };
        let stride = source
            .descendants()
            .find(|n| n.is_element() && n.tag_name().name() == "accessor")
            .and_then(|a| a.attribute("stride"))
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(3);
        let floats_text = source
            .descendants()
            .find(|n| n.is_element() && n.tag_name().name() == "float_array")
            .and_then(|n| n.text())
            .unwrap_or("");
        let floats: Vec<f64> = floats_text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| corrupt(path, "bad float in position array"))?;
        for chunk in floats.chunks_exact(stride.max(3)) {
            let p = [chunk[0] * meter, chunk[1] * meter, chunk[2] * meter];
            vertices.push(if y_up { [p[0], -p[2], p[1]] } else { p });
        }
    }
    if vertices.is_empty() {
        return Err(MeshError::NoPositions(path.to_string()));
    }
    Ok(vertices)
}

fn position_source_id<'a>(vertices_node: &Node<'a, '_>) -> Option<&'a str> {
    vertices_node
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "input")
        .find(|n| n.attribute("semantic") == Some("POSITION"))
        .and_then(|n| n.attribute("source"))
        .map(|s| s.strip_prefix('#').unwrap_or(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn extremes(vertices: &[[f64; 3]]) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in vertices {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    #[test]
    fn ascii_stl_unit_cube() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.stl");
        std::fs::write(&path, fixtures::cube_ascii_stl([0.0; 3], [1.0; 3])).unwrap();
        let vertices = load_mesh_vertices(&path).unwrap();
        assert_eq!(vertices.len(), 36);
        assert_eq!(extremes(&vertices), ([0.0; 3], [1.0; 3]));
    }

    #[test]
    fn binary_stl_matches_ascii() {
        let dir = tempfile::tempdir().unwrap();
        let ascii = dir.path().join("a.stl");
        let binary = dir.path().join("b.stl");
        std::fs::write(&ascii, fixtures::cube_ascii_stl([0.0; 3], [1.0; 3])).unwrap();
        std::fs::write(&binary, fixtures::cube_binary_stl([0.0; 3], [1.0; 3])).unwrap();
        let a = load_mesh_vertices(&ascii).unwrap();
        let b = load_mesh_vertices(&binary).unwrap();
        assert_eq!(extremes(&a), extremes(&b));
    }

    #[test]
    fn obj_matches_stl_extremes() {
        let dir = tempfile::tempdir().unwrap();
        let obj = dir.path().join("cube.obj");
        std::fs::write(&obj, fixtures::cube_obj([0.0; 3], [1.0; 3])).unwrap();
        let v = load_mesh_vertices(&obj).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(extremes(&v), ([0.0; 3], [1.0; 3]));
    }

    #[test]
    fn collada_centimeter_units_scale_to_meters() {
        let dir = tempfile::tempdir().unwrap();
        let dae = dir.path().join("cube.dae");
        // A 100-unit cube declared in centimeters spans one meter.
        std::fs::write(&dae, fixtures::cube_dae([0.0; 3], [1.0; 3], 0.01, false)).unwrap();
        let v = load_mesh_vertices(&dae).unwrap();
        let (lo, hi) = extremes(&v);
        for i in 0..3 {
            assert!((lo[i] - 0.0).abs() < 1e-9);
            assert!((hi[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn collada_y_up_remap() {
        let dir = tempfile::tempdir().unwrap();
        let dae = dir.path().join("cube.dae");
        // An asymmetric cuboid authored in Y_UP coordinates must land on the
        // declared Z-up extents after the remap.
        std::fs::write(
            &dae,
            fixtures::cube_dae([-0.3, -0.2, 0.0], [0.7, 0.4, 0.5], 1.0, true),
        )
        .unwrap();
        let v = load_mesh_vertices(&dae).unwrap();
        let (lo, hi) = extremes(&v);
        let want_lo = [-0.3, -0.2, 0.0];
        let want_hi = [0.7, 0.4, 0.5];
        for i in 0..3 {
            assert!((lo[i] - want_lo[i]).abs() < 1e-12, "{lo:?} {hi:?}");
            assert!((hi[i] - want_hi[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn collada_without_positions_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dae = dir.path().join("empty.dae");
        std::fs::write(&dae, r#"<?xml version="1.0"?><COLLADA><library_geometries/></COLLADA>"#).unwrap();
        assert!(matches!(
            load_mesh_vertices(&dae).unwrap_err(),
            MeshError::NoPositions(_)
        ));
    }

    #[test]
    fn unknown_extension_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.ply");
        std::fs::write(&path, "ply").unwrap();
        assert!(matches!(
            load_mesh_vertices(&path).unwrap_err(),
            MeshError::UnknownExtension(_)
        ));
    }

    #[test]
    fn truncated_binary_stl_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stl");
        let mut bytes = fixtures::cube_binary_stl([0.0; 3], [1.0; 3]);
        bytes.truncate(bytes.len() - 7);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_mesh_vertices(&path).unwrap_err(), MeshError::Corrupt { .. }));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_mesh_vertices(Path::new("/nonexistent/m.stl")).unwrap_err(),
            MeshError::Io { .. }
        ));
    }

    #[test]
    fn case_insensitive_extension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("CUBE.STL");
        std::fs::write(&path, fixtures::cube_ascii_stl([0.0; 3], [1.0; 3])).unwrap();
        assert_eq!(load_mesh_vertices(&path).unwrap().len(), 36);
    }
}
