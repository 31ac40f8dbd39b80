//! Path lengths and upper bounds on the infimum-of-lengths pseudodistance.

mod graph;
mod lipschitz;
mod path;
mod solver;

pub use graph::{transition_graph, Step, TransitionEdge, TransitionGraph};
pub use lipschitz::{lipschitz_consistency, lipschitz_probe, LipschitzReport, PROBE_GRID};
pub use path::{
    path_length, Curve, CurveFn, Joint, PathSegment, PiecewisePath, WitnessPath, WitnessSegment,
};
pub use solver::{
    pseudodistance_upper, pseudodistance_upper_with, refine_path, DistanceReport, LevelRecord,
    SearchConfig, SMOOTHING_TOL,
};

/// Writes a bound as a JSON number, or the string `"inf"` when infinite.
pub fn serialize_bound<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// The JSON value of a bound: a number, or `"inf"`.
pub fn bound_to_json(v: f64) -> serde_json::Value {
    if v.is_infinite() && v > 0.0 {
        serde_json::Value::String("inf".into())
    } else {
        serde_json::json!(v)
    }
}
