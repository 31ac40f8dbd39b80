//! Points of glued spaces and when two representatives name the same point.

use diffeo_metric::catalog::{plus_space, y_space};

fn main() -> diffeo_metric::Result<()> {
    let y = y_space()?;
    let s = &y.space;
    for x in [0.5, 1.0, 1.5, 3.0] {
        let same = s.points_equal(&s.point(0, vec![x]), &s.point(1, vec![x]))?;
        println!("Y: [{x}_1] == [{x}_2] ? {same}");
    }
    println!(
        "Y: representatives of [2_1] = {:?}",
        s.representatives(0, &[2.0])
    );

    let plus = plus_space()?;
    let p = &plus.space;
    println!(
        "+: [0_1] == [0_2] ? {}",
        p.points_equal(&p.point(0, vec![0.0]), &p.point(1, vec![0.0]))?
    );
    println!(
        "+: [1_1] == [1_2] ? {}",
        p.points_equal(&p.point(0, vec![1.0]), &p.point(1, vec![1.0]))?
    );
    Ok(())
}
