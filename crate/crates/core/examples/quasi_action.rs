//! Line quasi-actions from quasimorphisms and actions induced along a
//! Brooks retraction.

use qhlab::action::{induce_action, line_action_from_qm, InduceParams, Point};
use qhlab::catalog::brooks_retraction;
use qhlab::group::Group;
use qhlab::metric::Ball;
use qhlab::qmorph::Quasimorphism;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = Group::free(2)?;
    let h = Quasimorphism::brooks(f2.clone(), &[1, 2])?;
    let rho = line_action_from_qm(&h);
    let ball = Ball::standard(&f2, 3);
    let points: Vec<Point> = [-2, 0, 5].into_iter().map(Point::real).collect();
    let c = rho.measure(ball.elements(), &points, 3);
    println!("{}: lambda {}, epsilon {}", rho.label, c.lambda, c.epsilon);

    let phi = brooks_retraction(&f2, "a b")?;
    let ab = f2.parse("a b")?;
    let params = InduceParams {
        radius: 5,
        target_sample: Ball::complete(&f2, &[ab], 2)?.elements().to_vec(),
        points,
        surjectivity_bound: 2,
        horizon: 16,
    };
    let ind = induce_action(&phi, &rho, &params)?;
    let r = &ind.report;
    println!("{}", ind.action.label);
    println!("  measured defect {} <= lambda M + 3 eps = {} (M {}, eps {})", r.measured_defect, r.bound, r.m, r.epsilon);
    Ok(())
}
