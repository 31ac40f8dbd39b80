//! Loading spaces from JSON and running checks on them, as the CLI does.

use diffeo_metric::distance::{pseudodistance_upper, SearchConfig};
use diffeo_metric::metric::{definiteness_check, GridSpec, DEFINITENESS_TOL};
use diffeo_metric::scene::{load_scene, Scene};

const SUM: &str = include_str!("scenes/two_planes.json");

fn main() -> diffeo_metric::Result<()> {
    let scene = load_scene(SUM)?;
    let s = scene.space()?;
    let rep = definiteness_check(&s.space, &s.metric, &GridSpec::default(), DEFINITENESS_TOL);
    println!("two planes: {:?}", rep.verdict);
    let far = pseudodistance_upper(
        &s.space,
        &s.metric,
        &s.space.point(0, vec![0.0, 0.0]),
        &s.space.point(1, vec![0.0, 0.0]),
        &SearchConfig::default(),
    )?;
    println!("across the sum: bound {}", far.bound);

    match load_scene(include_str!("scenes/wedge_loops.json"))? {
        Scene::WedgeLoops { wedge, .. } => {
            println!("wedge scene: {}-parameter family", wedge.left.domain.dim())
        }
        _ => unreachable!(),
    }

    if let Err(e) = load_scene("{\"primitive\": \"euclidean\",\n \"dim\": \"two\"}") {
        println!("{e}");
    }
    Ok(())
}
