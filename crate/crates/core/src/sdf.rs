//! SDF model parsing and footprint derivation.
//!
//! Reads the collision (and visual) geometries out of an SDF model document,
//! computes a model-frame axis-aligned bounding box per geometry, and unions
//! them into the 2D footprint the sampler places. Of the nine SDF geometry
//! shapes, five are supported: empty, box, cylinder, sphere, and mesh.
//! Version differences between SDFormat 1.4 and 1.7 are tolerated by reading
//! only the elements named here and ignoring the rest.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use nalgebra::{Rotation3, Vector3};
use roxmltree::{Document, Node};
use thiserror::Error;

use crate::mesh::{load_mesh_vertices, MeshError};

/// A 3D pose: translation plus roll/pitch/yaw (radians), SDF convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        roll: 0.0,
        pitch: 0.0,
        yaw: 0.0,
    };

    pub fn translation(x: f64, y: f64, z: f64) -> Pose {
        Pose {
            x,
            y,
            z,
            ..Pose::IDENTITY
        }
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    /// Compose with a child pose: the result maps child-local coordinates
    /// through `child` and then through `self`.
    pub fn compose(&self, child: &Pose) -> Pose {
        let r_self = self.rotation();
        let r = r_self * child.rotation();
        let t = Vector3::new(self.x, self.y, self.z) + r_self * Vector3::new(child.x, child.y, child.z);
        let (roll, pitch, yaw) = r.euler_angles();
        Pose {
            x: t.x,
            y: t.y,
            z: t.z,
            roll,
            pitch,
            yaw,
        }
    }

    pub fn transform_point(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.rotation() * Vector3::new(p[0], p[1], p[2]) + Vector3::new(self.x, self.y, self.z);
        [v.x, v.y, v.z]
    }

    fn from_sdf_text(text: &str) -> Result<Pose, SdfError> {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| SdfError::BadValue {
                element: "pose".into(),
                text: text.trim().into(),
            })?;
        if vals.len() != 6 || vals.iter().any(|v| !v.is_finite()) {
            return Err(SdfError::BadValue {
                element: "pose".into(),
                text: text.trim().into(),
            });
        }
        Ok(Pose {
            x: vals[0],
            y: vals[1],
            z: vals[2],
            roll: vals[3],
            pitch: vals[4],
            yaw: vals[5],
        })
    }
}

/// A collision (or visual) geometry shape.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Empty,
    Box { size: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
    /// `uri` starts as the raw SDF uri and becomes a filesystem path after
    /// [`resolve_mesh_uris`]; `scale` multiplies vertex coordinates
    /// componentwise before the pose transform.
    Mesh { uri: String, scale: [f64; 3] },
}

/// One geometry with its pose composed into the model frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionGeometry {
    pub shape: Shape,
    pub pose: Pose,
}

/// An axis-aligned box; the empty box is min=+inf, max=-inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb3 {
    pub fn empty() -> Aabb3 {
        Aabb3 {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn include(&mut self, p: [f64; 3]) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, other: &Aabb3) -> Aabb3 {
        let mut out = *self;
        if !other.is_empty() {
            out.include(other.min);
            out.include(other.max);
        }
        out
    }

    pub fn from_points<I: IntoIterator<Item = [f64; 3]>>(points: I) -> Aabb3 {
        let mut out = Aabb3::empty();
        for p in points {
            out.include(p);
        }
        out
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        let (lo, hi) = (self.min, self.max);
        [
            [lo[0], lo[1], lo[2]],
            [hi[0], lo[1], lo[2]],
            [lo[0], hi[1], lo[2]],
            [hi[0], hi[1], lo[2]],
            [lo[0], lo[1], hi[2]],
            [hi[0], lo[1], hi[2]],
            [lo[0], hi[1], hi[2]],
            [hi[0], hi[1], hi[2]],
        ]
    }
}

/// The model-frame 2D footprint (plus vertical extent) of a whole model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootprintInfo {
    /// x-extent in the model frame, meters.
    pub width: f64,
    /// y-extent in the model frame, meters.
    pub length: f64,
    /// z-extent, meters.
    pub height: f64,
    /// Bottom of the bounding box relative to the model origin.
    pub z_offset: f64,
    /// True iff the model has exactly one collision geometry of a simple
    /// shape (empty, box, cylinder, or sphere).
    pub simple_single_geometry: bool,
}

#[derive(Debug, Error)]
pub enum SdfError {
    #[error("invalid XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("expected an <sdf><model> document root")]
    NotAModel,
    #[error("nested <model> elements are not supported")]
    NestedModel,
    #[error("unsupported collision geometry <{0}>")]
    UnsupportedGeometry(String),
    #[error("<geometry> element without a shape")]
    MissingShape,
    #[error("invalid <{element}> value `{text}`")]
    BadValue { element: String, text: String },
    #[error("non-positive dimension in <{0}>")]
    NonPositiveDimension(String),
    #[error("mesh uri `{uri}` does not resolve to a known model root")]
    UnknownModelUri { uri: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A parsed SDF model: collision geometries drive footprints, visual
/// geometries are retained for re-emission of rescaled models.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfModel {
    pub name: String,
    pub collisions: Vec<CollisionGeometry>,
    pub visuals: Vec<CollisionGeometry>,
}

impl SdfModel {
    /// Parse an SDF model document. Each geometry's pose is its link pose
    /// composed with its own pose, i.e. expressed in the model frame.
    /// Exactly one level of nesting (model -> link -> collision) is
    /// supported; nested `<model>` elements are rejected.
    pub fn parse(xml: &str) -> Result<SdfModel, SdfError> {
        let doc = Document::parse(xml)?;
        let root = doc.root_element();
        if root.tag_name().name() != "sdf" {
            return Err(SdfError::NotAModel);
        }
        let model = child_elements(&root)
            .find(|n| n.tag_name().name() == "model")
            .ok_or(SdfError::NotAModel)?;
        if descendant_has_model(&model) {
            return Err(SdfError::NestedModel);
        }

        let name = model.attribute("name").unwrap_or("").to_string();
        let model_pose = element_pose(&model)?;
        let mut collisions = Vec::new();
        let mut visuals = Vec::new();
        for link in child_elements(&model).filter(|n| n.tag_name().name() == "link") {
            let link_pose = model_pose.compose(&element_pose(&link)?);
            for node in child_elements(&link) {
                match node.tag_name().name() {
                    "collision" => {
                        let pose = link_pose.compose(&element_pose(&node)?);
                        let shape = parse_geometry(&node, true)?;
                        if let Some(shape) = shape {
                            collisions.push(CollisionGeometry { shape, pose });
                        }
                    }
                    "visual" => {
                        let pose = link_pose.compose(&element_pose(&node)?);
                        // Visuals never affect footprints; shapes we cannot
                        // represent are skipped instead of rejected.
                        if let Ok(Some(shape)) = parse_geometry(&node, false) {
                            visuals.push(CollisionGeometry { shape, pose });
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(SdfModel {
            name,
            collisions,
            visuals,
        })
    }
}

/// Parse an SDF model document into its collision geometry list.
pub fn parse_model_sdf(xml: &str) -> Result<Vec<CollisionGeometry>, SdfError> {
    Ok(SdfModel::parse(xml)?.collisions)
}

fn descendant_has_model(model: &Node) -> bool {
    model
        .descendants()
        .filter(|n| n.is_element() && n.id() != model.id())
        .any(|n| n.tag_name().name() == "model")
}

fn child_elements<'a, 'd>(node: &Node<'a, 'd>) -> impl Iterator<Item = Node<'a, 'd>> {
    node.children().filter(|n| n.is_element())
}

fn element_pose(node: &Node) -> Result<Pose, SdfError> {
    match child_elements(node).find(|n| n.tag_name().name() == "pose") {
        Some(p) => Pose::from_sdf_text(p.text().unwrap_or("")),
        None => Ok(Pose::IDENTITY),
    }
}

fn child_text<'a>(node: &Node<'a, '_>, name: &str) -> Option<&'a str> {
    child_elements(node)
        .find(|n| n.tag_name().name() == name)
        .and_then(|n| n.text())
}

fn parse_geometry(parent: &Node, strict: bool) -> Result<Option<Shape>, SdfError> {
    let geometry = match child_elements(parent).find(|n| n.tag_name().name() == "geometry") {
        Some(g) => g,
        None => return Err(SdfError::MissingShape),
    };
    let shape_node = match child_elements(&geometry).next() {
        Some(n) => n,
        None => return Err(SdfError::MissingShape),
    };
    let shape = match shape_node.tag_name().name() {
        "empty" => Shape::Empty,
        "box" => {
            let size = parse_vec3(&shape_node, "size", [1.0; 3])?;
            if size.iter().any(|&s| s <= 0.0) {
                return Err(SdfError::NonPositiveDimension("box".into()));
            }
            Shape::Box { size }
        }
        "cylinder" => {
            let radius = parse_scalar(&shape_node, "radius", 1.0)?;
            let length = parse_scalar(&shape_node, "length", 1.0)?;
            if radius <= 0.0 || length <= 0.0 {
                return Err(SdfError::NonPositiveDimension("cylinder".into()));
            }
            Shape::Cylinder { radius, length }
        }
        "sphere" => {
            let radius = parse_scalar(&shape_node, "radius", 1.0)?;
            if radius <= 0.0 {
                return Err(SdfError::NonPositiveDimension("sphere".into()));
            }
            Shape::Sphere { radius }
        }
        "mesh" => {
            let uri = child_text(&shape_node, "uri").unwrap_or("").trim().to_string();
            let scale = parse_vec3(&shape_node, "scale", [1.0; 3])?;
            Shape::Mesh { uri, scale }
        }
        other => {
            if strict {
                return Err(SdfError::UnsupportedGeometry(other.to_string()));
            }
            return Ok(None);
        }
    };
    Ok(Some(shape))
}

fn parse_vec3(node: &Node, name: &str, default: [f64; 3]) -> Result<[f64; 3], SdfError> {
    let text = match child_text(node, name) {
        Some(t) => t,
        None => return Ok(default),
    };
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| SdfError::BadValue {
            element: name.into(),
            text: text.trim().into(),
        })?;
    if vals.len() != 3 {
        return Err(SdfError::BadValue {
            element: name.into(),
            text: text.trim().into(),
        });
    }
    Ok([vals[0], vals[1], vals[2]])
}

fn parse_scalar(node: &Node, name: &str, default: f64) -> Result<f64, SdfError> {
    let text = match child_text(node, name) {
        Some(t) => t,
        None => return Ok(default),
    };
    text.trim().parse::<f64>().map_err(|_| SdfError::BadValue {
        element: name.into(),
        text: text.trim().into(),
    })
}

/// Rewrite mesh uris to filesystem paths. `model://name/...` resolves against
/// `roots`, relative paths against `model_root`.
pub fn resolve_mesh_uris(
    geoms: &mut [CollisionGeometry],
    model_root: &Path,
    roots: &HashMap<String, PathBuf>,
) -> Result<(), SdfError> {
    for geom in geoms {
        if let Shape::Mesh { uri, .. } = &mut geom.shape {
            let resolved = if let Some(rest) = uri.strip_prefix("model://") {
                let (name, tail) = rest.split_once('/').unwrap_or((rest, ""));
                let root = roots.get(name).ok_or_else(|| SdfError::UnknownModelUri { uri: uri.clone() })?;
                root.join(tail)
            } else if let Some(rest) = uri.strip_prefix("file://") {
                PathBuf::from(rest)
            } else {
                let p = PathBuf::from(&*uri);
                if p.is_absolute() {
                    p
                } else {
                    model_root.join(p)
                }
            };
            *uri = resolved.display().to_string();
        }
    }
    Ok(())
}

/// Model-frame bounding box of one geometry.
///
/// Boxes and meshes bound their local extremes and transform the eight box
/// corners through the pose; cylinders and spheres use their exact rotated
/// extents so the result stays tight under rotation. Empty geometries yield
/// the empty box marker.
pub fn geometry_bbox(g: &CollisionGeometry) -> Result<Aabb3, SdfError> {
    match &g.shape {
        Shape::Empty => Ok(Aabb3::empty()),
        Shape::Box { size } => {
            let h = [size[0] / 2.0, size[1] / 2.0, size[2] / 2.0];
            let local = Aabb3 {
                min: [-h[0], -h[1], -h[2]],
                max: [h[0], h[1], h[2]],
            };
            Ok(transform_box_corners(&local, &g.pose))
        }
        Shape::Cylinder { radius, length } => {
            let axis = g.pose.rotation() * Vector3::z();
            let h = length / 2.0;
            let center = [g.pose.x, g.pose.y, g.pose.z];
            let mut out = Aabb3::empty();
            let mut min = [0.0; 3];
            let mut max = [0.0; 3];
            for i in 0..3 {
                let u = axis[i].clamp(-1.0, 1.0);
                let extent = h * u.abs() + radius * (1.0 - u * u).max(0.0).sqrt();
                min[i] = center[i] - extent;
                max[i] = center[i] + extent;
            }
            out.include(min);
            out.include(max);
            Ok(out)
        }
        Shape::Sphere { radius } => Ok(Aabb3 {
            min: [g.pose.x - radius, g.pose.y - radius, g.pose.z - radius],
            max: [g.pose.x + radius, g.pose.y + radius, g.pose.z + radius],
        }),
        Shape::Mesh { uri, scale } => {
            let vertices = load_mesh_vertices(Path::new(uri))?;
            let local = Aabb3::from_points(
                vertices
                    .into_iter()
                    .map(|v| [v[0] * scale[0], v[1] * scale[1], v[2] * scale[2]]),
            );
            if local.is_empty() {
                return Ok(Aabb3::empty());
            }
            Ok(transform_box_corners(&local, &g.pose))
        }
    }
}

fn transform_box_corners(local: &Aabb3, pose: &Pose) -> Aabb3 {
    Aabb3::from_points(local.corners().into_iter().map(|c| pose.transform_point(c)))
}

/// Union the per-geometry boxes into the whole-model footprint.
/// A model whose geometries are all empty gets a zero footprint and is
/// treated as non-collidable downstream.
pub fn model_footprint(geoms: &[CollisionGeometry]) -> Result<FootprintInfo, SdfError> {
    let mut union = Aabb3::empty();
    for g in geoms {
        union = union.union(&geometry_bbox(g)?);
    }
    let simple = geoms.len() == 1 && !matches!(geoms[0].shape, Shape::Mesh { .. });
    if union.is_empty() {
        return Ok(FootprintInfo {
            width: 0.0,
            length: 0.0,
            height: 0.0,
            z_offset: 0.0,
            simple_single_geometry: simple,
        });
    }
    Ok(FootprintInfo {
        width: union.max[0] - union.min[0],
        length: union.max[1] - union.min[1],
        height: union.max[2] - union.min[2],
        z_offset: union.min[2],
        simple_single_geometry: simple,
    })
}

/// Resizable iff the model consists of a single simple collision geometry.
/// A descriptor override takes precedence downstream.
pub fn classify_dynamic_size(info: &FootprintInfo) -> bool {
    info.simple_single_geometry
}
