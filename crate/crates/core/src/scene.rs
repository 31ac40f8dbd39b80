//! JSON scene descriptions.
//!
//! ```json
//! {"primitive": "glue", "left": {"primitive": "euclidean", "dim": 1},
//!  "right": {"primitive": "euclidean", "dim": 1}, "interval": [1, "inf"]}
//! ```
//!
//! Primitives: `euclidean` (`dim`, optional constant `metric`), `glue`
//! (`left`, `right`, `interval`; `[a, a]` glues a single point), `product`,
//! `warped` (`f`: `exp2x` or `const1`), `sum` (`parts`), `loopspace`
//! (`target`, `family`) and `wedge_loopspace` (`target`, `left`, `right`).

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::catalog::glue_along_interval;
use crate::constructions::{euclidean, product, sum, warped_product, RiemannianSpace, WarpSpec};
use crate::error::{Error, Result};
use crate::mapping::{
    based_circle, circle_scale, constant_family, figure, section_plot, MappingPlot, WedgePlot,
};
use crate::metric::TensorField;
use crate::space::Interval;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoundSpec {
    Number(f64),
    Word(String),
}

impl BoundSpec {
    fn value(&self) -> Result<f64> {
        match self {
            BoundSpec::Number(x) => Ok(*x),
            BoundSpec::Word(w) => match w.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Usage(format!(
                    "interval bound must be a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    Constant {
        point: Vec<f64>,
        #[serde(default = "one")]
        dim: usize,
    },
    CircleScale {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "unit")]
        radius: f64,
    },
    Figure {
        #[serde(default = "unit")]
        a: f64,
    },
    BasedCircle {
        #[serde(default)]
        point: [f64; 2],
    },
    Section,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "primitive", rename_all = "snake_case")]
pub enum SceneSpec {
    Euclidean {
        dim: usize,
        #[serde(default)]
        metric: Option<Vec<Vec<f64>>>,
    },
    Glue {
        left: Box<SceneSpec>,
        right: Box<SceneSpec>,
        interval: [BoundSpec; 2],
    },
    Product {
        left: Box<SceneSpec>,
        right: Box<SceneSpec>,
    },
    Warped {
        #[serde(default)]
        left: Option<Box<SceneSpec>>,
        #[serde(default)]
        right: Option<Box<SceneSpec>>,
        f: String,
    },
    Sum {
        parts: Vec<SceneSpec>,
    },
    Loopspace {
        target: Box<SceneSpec>,
        family: FamilySpec,
    },
    WedgeLoopspace {
        target: Box<SceneSpec>,
        left: FamilySpec,
        right: FamilySpec,
    },
}

/// A built scene.
#[derive(Debug, Clone)]
pub enum Scene {
    Space(RiemannianSpace),
    /// A loop family in `C^∞(S¹, N)`.
    Loops {
        target: RiemannianSpace,
        family: MappingPlot,
    },
    /// A pair of loop families forming a plot of `C^∞(S¹ ∨ S¹, N)`.
    WedgeLoops {
        target: RiemannianSpace,
        wedge: WedgePlot,
    },
}

impl Scene {
    pub fn space(&self) -> Result<&RiemannianSpace> {
        match self {
            Scene::Space(s) => Ok(s),
            _ => Err(Error::Usage(
                "this command needs a space scene, not a loop-space scene".into(),
            )),
        }
    }
}

/// Parses a scene description; syntax and schema errors carry line and column.
pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    // syntax errors first, with serde_json's own positions
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut path = Vec::new();
    scene_from_value(&value, &mut path).map_err(|message| {
        let offset = locate(text, &path).unwrap_or(0);
        let line = 1 + text[..offset].matches('\n').count();
        let column = 1 + text[..offset]
            .rsplit('\n')
            .next()
            .map_or(0, |l| l.chars().count());
        Error::Parse {
            line,
            column,
            message: format!("{message} (at {})", render_path(&path)),
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Seg {
    Key(String),
    Index(usize),
}

fn render_path(path: &[Seg]) -> String {
    let mut out = String::from("$");
    for seg in path {
        match seg {
            Seg::Key(k) => out.push_str(&format!(".{k}")),
            Seg::Index(i) => out.push_str(&format!("[{i}]")),
        }
    }
    out
}

type Walk<T> = std::result::Result<T, String>;

/// On error `path` is left pointing at the offending value.
fn scene_from_value(v: &Value, path: &mut Vec<Seg>) -> Walk<SceneSpec> {
    let obj = v.as_object().ok_or("expected a scene object")?;
    let tag = field::<String>(obj, "primitive", path)?;
    let scene = |key: &str, path: &mut Vec<Seg>| -> Walk<Box<SceneSpec>> {
        let inner = obj.get(key).ok_or(format!("missing field `{key}`"))?;
        path.push(Seg::Key(key.into()));
        let s = scene_from_value(inner, path)?;
        path.pop();
        Ok(Box::new(s))
    };
    let optional_scene = |key: &str, path: &mut Vec<Seg>| -> Walk<Option<Box<SceneSpec>>> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => scene(key, path).map(Some),
        }
    };
    Ok(match tag.as_str() {
        "euclidean" => SceneSpec::Euclidean {
            dim: field(obj, "dim", path)?,
            metric: optional(obj, "metric", path)?,
        },
        "glue" => SceneSpec::Glue {
            left: scene("left", path)?,
            right: scene("right", path)?,
            interval: field(obj, "interval", path)?,
        },
        "product" => SceneSpec::Product {
            left: scene("left", path)?,
            right: scene("right", path)?,
        },
        "warped" => SceneSpec::Warped {
            left: optional_scene("left", path)?,
            right: optional_scene("right", path)?,
            f: field(obj, "f", path)?,
        },
        "sum" => {
            let parts = obj.get("parts").ok_or("missing field `parts`")?;
            path.push(Seg::Key("parts".into()));
            let items = parts.as_array().ok_or("expected an array of scenes")?;
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                path.push(Seg::Index(i));
                out.push(scene_from_value(item, path)?);
                path.pop();
            }
            path.pop();
            SceneSpec::Sum { parts: out }
        }
        "loopspace" => SceneSpec::Loopspace {
            target: scene("target", path)?,
            family: field(obj, "family", path)?,
        },
        "wedge_loopspace" => SceneSpec::WedgeLoopspace {
            target: scene("target", path)?,
            left: field(obj, "left", path)?,
            right: field(obj, "right", path)?,
        },
        other => {
            path.push(Seg::Key("primitive".into()));
            return Err(format!(
                "unknown primitive {other:?}; expected euclidean, glue, product, warped, sum, loopspace or wedge_loopspace"
            ));
        }
    })
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, key: &str, path: &mut Vec<Seg>) -> Walk<T> {
    let v = obj.get(key).ok_or(format!("missing field `{key}`"))?;
    path.push(Seg::Key(key.into()));
    let out = T::deserialize(v).map_err(|e| e.to_string())?;
    path.pop();
    Ok(out)
}

fn optional<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
    path: &mut Vec<Seg>,
) -> Walk<Option<T>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(_) => field(obj, key, path).map(Some),
    }
}

/// Byte offset of the value at `path` in well-formed JSON `text`.
fn locate(text: &str, path: &[Seg]) -> Option<usize> {
    let b = text.as_bytes();
    let skip_ws = |mut i: usize| {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        i
    };
    let mut at = skip_ws(0);
    for seg in path {
        match seg {
            Seg::Key(key) => {
                if b.get(at) != Some(&b'{') {
                    return Some(at);
                }
                let mut i = skip_ws(at + 1);
                loop {
                    if b.get(i) != Some(&b'"') {
                        return Some(at);
                    }
                    let end = value_end(b, i);
                    let name: String = serde_json::from_str(&text[i..end]).ok()?;
                    let v = skip_ws(skip_ws(end) + 1);
                    if name == *key {
                        at = v;
                        break;
                    }
                    i = skip_ws(value_end(b, v));
                    if b.get(i) != Some(&b',') {
                        return Some(at);
                    }
                    i = skip_ws(i + 1);
                }
            }
            Seg::Index(index) => {
                if b.get(at) != Some(&b'[') {
                    return Some(at);
                }
                let mut i = skip_ws(at + 1);
                for _ in 0..*index {
                    i = skip_ws(value_end(b, i));
                    if b.get(i) != Some(&b',') {
                        return Some(at);
                    }
                    i = skip_ws(i + 1);
                }
                at = i;
            }
        }
    }
    Some(at)
}

/// One past the end of the JSON value starting at `i`.
fn value_end(b: &[u8], i: usize) -> usize {
    let string_end = |mut j: usize| {
        j += 1;
        while j < b.len() && b[j] != b'"' {
            j += if b[j] == b'\\' { 2 } else { 1 };
        }
        j + 1
    };
    match b.get(i) {
        Some(b'"') => string_end(i),
        Some(b'{') | Some(b'[') => {
            let mut depth = 0usize;
            let mut j = i;
            while j < b.len() {
                match b[j] {
                    b'"' => {
                        j = string_end(j);
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return j + 1;
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            j
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace()
            {
                j += 1;
            }
            j
        }
    }
}

pub fn load_scene(text: &str) -> Result<Scene> {
    build_scene(&parse_scene(text)?)
}

fn space_of(spec: &SceneSpec) -> Result<RiemannianSpace> {
    match build_scene(spec)? {
        Scene::Space(s) => Ok(s),
        _ => Err(Error::Usage("loop-space scenes cannot be nested".into())),
    }
}

fn family(spec: &FamilySpec, target: &RiemannianSpace) -> Result<MappingPlot> {
    let n = target.space.plots.first().map(|p| p.dim()).unwrap_or(0);
    let planar = |what: &str| -> Result<()> {
        if n == 2 {
            Ok(())
        } else {
            Err(Error::Usage(format!("family {what} needs a planar target")))
        }
    };
    Ok(match spec {
        FamilySpec::Constant { point, dim } => {
            if point.len() != n {
                return Err(Error::Usage(format!(
                    "constant point has {} coordinates, target has {n}",
                    point.len()
                )));
            }
            constant_family(point.clone(), *dim)
        }
        FamilySpec::CircleScale { center, radius } => {
            planar("circle_scale")?;
            circle_scale(*center, *radius)
        }
        FamilySpec::Figure { a } => {
            planar("figure")?;
            figure(*a)
        }
        FamilySpec::BasedCircle { point } => {
            planar("based_circle")?;
            based_circle(*point)
        }
        FamilySpec::Section => section_plot(target, 0),
    })
}

pub fn build_scene(spec: &SceneSpec) -> Result<Scene> {
    Ok(Scene::Space(match spec {
        SceneSpec::Euclidean { dim, metric } => {
            let tensor = match metric {
                None => None,
                Some(rows) => {
                    if rows.len() != *dim || rows.iter().any(|r| r.len() != *dim) {
                        return Err(Error::Usage(format!("metric must be a {dim}×{dim} matrix")));
                    }
                    let m = DMatrix::from_fn(*dim, *dim, |i, j| rows[i][j]);
                    Some(Arc::new(move |_: &[f64]| Ok(m.clone())) as TensorField)
                }
            };
            euclidean(*dim, tensor)?
        }
        SceneSpec::Glue {
            left,
            right,
            interval,
        } => {
            let (a, b) = (interval[0].value()?, interval[1].value()?);
            let along = if a == b {
                Interval::point(a)
            } else {
                Interval::open(a, b)
            };
            glue_along_interval(&space_of(left)?, &space_of(right)?, along)?
        }
        SceneSpec::Product { left, right } => product(&space_of(left)?, &space_of(right)?)?,
        SceneSpec::Warped { left, right, f } => {
            let x = match left {
                Some(l) => space_of(l)?,
                None => euclidean(1, None)?,
            };
            let y = match right {
                Some(r) => space_of(r)?,
                None => euclidean(1, None)?,
            };
            let warp = match f.as_str() {
                "exp2x" => WarpSpec::exp2x(&x.space),
                "const1" => WarpSpec::constant(&x.space, 1.0),
                other => {
                    return Err(Error::Usage(format!(
                        "unknown warp function {other:?} (expected exp2x or const1)"
                    )))
                }
            };
            warped_product(&x, &y, &warp)?
        }
        SceneSpec::Sum { parts } => {
            let parts = parts.iter().map(space_of).collect::<Result<Vec<_>>>()?;
            sum(&parts)?
        }
        SceneSpec::Loopspace {
            target,
            family: fam,
        } => {
            let target = space_of(target)?;
            let family = family(fam, &target)?;
            return Ok(Scene::Loops { target, family });
        }
        SceneSpec::WedgeLoopspace {
            target,
            left,
            right,
        } => {
            let target = space_of(target)?;
            let wedge = WedgePlot::new(family(left, &target)?, family(right, &target)?, 1e-9)?;
            return Ok(Scene::WedgeLoops { target, wedge });
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_space_from_json() {
        let s = load_scene(
            r#"{"primitive": "glue", "left": {"primitive": "euclidean", "dim": 1},
                "right": {"primitive": "euclidean", "dim": 1}, "interval": [1, "inf"]}"#,
        )
        .unwrap();
        let y = s.space().unwrap();
        assert_eq!(y.space.plots.len(), 2);
        assert!(y
            .space
            .points_equal(&y.space.point(0, vec![2.0]), &y.space.point(1, vec![2.0]))
            .unwrap());
    }

    #[test]
    fn point_interval_glues_one_point() {
        let s = load_scene(
            r#"{"primitive": "glue", "left": {"primitive": "euclidean", "dim": 1},
                "right": {"primitive": "euclidean", "dim": 1}, "interval": [0, 0]}"#,
        )
        .unwrap();
        let p = s.space().unwrap();
        assert!(p
            .space
            .points_equal(&p.space.point(0, vec![0.0]), &p.space.point(1, vec![0.0]))
            .unwrap());
        assert!(!p
            .space
            .points_equal(&p.space.point(0, vec![0.5]), &p.space.point(1, vec![0.5]))
            .unwrap());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = load_scene("{\n  \"primitive\": \"euclidean\",\n  \"dim\": }").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 10)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_point_at_the_value() {
        let text = "{\"primitive\": \"glue\",\n \"left\": {\"primitive\": \"euclidean\", \"dim\": 1},\n \"right\": {\"primitive\": \"euclidean\",\n   \"dim\": \"two\"},\n \"interval\": [1, 2]}";
        match load_scene(text).unwrap_err() {
            Error::Parse {
                line,
                column,
                message,
            } => {
                assert_eq!((line, column), (4, 11), "{message}");
                assert!(message.contains("$.right.dim"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\"primitive\": \"sum\", \"parts\": [{\"primitive\": \"euclidean\", \"dim\": 1},\n  {\"primitive\": \"cube\"}]}";
        match load_scene(text).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 17)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_primitive_is_a_parse_error() {
        assert!(matches!(
            load_scene(r#"{"primitive": "torus"}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn loop_scenes_build() {
        let s = load_scene(
            r#"{"primitive": "wedge_loopspace", "target": {"primitive": "euclidean", "dim": 2},
                "left": {"name": "based_circle", "point": [0, 0]}, "right": {"name": "constant", "point": [0, 0]}}"#,
        )
        .unwrap();
        assert!(matches!(s, Scene::WedgeLoops { .. }));
        assert!(s.space().is_err());
        let bad = load_scene(
            r#"{"primitive": "wedge_loopspace", "target": {"primitive": "euclidean", "dim": 2},
                "left": {"name": "based_circle", "point": [0, 0]}, "right": {"name": "constant", "point": [1, 0]}}"#,
        );
        assert!(matches!(bad, Err(Error::Construction(_))));
    }

    #[test]
    fn warped_and_sum() {
        let w = load_scene(r#"{"primitive": "warped", "f": "exp2x"}"#).unwrap();
        assert_eq!(w.space().unwrap().space.plots[0].dim(), 2);
        let s = load_scene(r#"{"primitive": "sum", "parts": [{"primitive": "euclidean", "dim": 1}, {"primitive": "euclidean", "dim": 2}]}"#).unwrap();
        assert_eq!(s.space().unwrap().space.plots.len(), 2);
        assert!(matches!(
            load_scene(r#"{"primitive": "warped", "f": "sin"}"#),
            Err(Error::Usage(_))
        ));
    }
}
