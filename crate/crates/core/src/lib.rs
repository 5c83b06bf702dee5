//! Compile probabilistic scenario programs into concrete simulator scenes.
//!
//! The pipeline has three stages:
//!
//! 1. **Model analysis** — parse a YAML model descriptor ([`descriptor`]),
//!    resolve each entry to local SDF/mesh files ([`acquire`]), derive a 2D
//!    placement footprint from the collision geometry ([`sdf`], [`mesh`]),
//!    and persist the resulting placement models ([`registry`]).
//! 2. **Scene sampling** — parse the scenario DSL ([`dsl`]) and rejection-sample
//!    concrete, collision-free object placements ([`sampler`], [`scene`]).
//! 3. **Emission** — translate a sampled scene into a simulator world file,
//!    per-instance rescaled models, a mission-coordinate YAML, and an SVG
//!    plot ([`emit`]).

pub mod acquire;
pub mod descriptor;
pub mod dsl;
pub mod emit;
pub mod mesh;
pub mod registry;
pub mod sampler;
pub mod scene;
pub mod sdf;

#[cfg(feature = "test-fixtures")]
pub mod fixtures;

pub use acquire::{fetch_archive, resolve_model, AcquireError, ModelSource, ModelSources, ResolvedModel};
pub use descriptor::{parse_descriptor, serialize_descriptor, DescriptorError, ModelDescriptor, ModelEntry, ModelKind};
pub use dsl::{parse_scenario, tokenize, DslError, Expr, InstanceDecl, RegionExpr, ScenarioAst, Specifier, Statement};
pub use emit::{
    emit_mission_yaml, emit_plot_svg, emit_scaled_model, emit_world, write_output_tree, EmitError, GeneratedModel,
    MissionFile, MissionRecord, ModelOutput, WorldDocument,
};
pub use mesh::{load_mesh_vertices, MeshError};
pub use registry::{build_model_spec, load_registry, save_registry, ModelRegistry, ModelSpec, RegistryError};
pub use sampler::{evaluate_expr, expand_create_room, place_instance, sample_scene, SampleError, Value};
pub use scene::{rect_of, rects_intersect, ConcreteScene, OrientedRect, SceneObject};
pub use sdf::{
    classify_dynamic_size, geometry_bbox, model_footprint, parse_model_sdf, Aabb3, CollisionGeometry, FootprintInfo,
    Pose, SdfError, SdfModel, Shape,
};
