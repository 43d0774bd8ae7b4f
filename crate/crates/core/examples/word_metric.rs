//! Balls, strata and word lengths.

use qhlab::group::Group;
use qhlab::metric::{Ball, WordMetric};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for g in [Group::free(2)?, Group::free_abelian(2)?, Group::infinite_dihedral(), Group::heisenberg()] {
        let ball = Ball::standard(&g, 5);
        println!("{:<8} |B_r| for r = 0..5: {:?}", g.name(), ball.sizes());
    }

    let h3 = Group::heisenberg();
    let metric = WordMetric::standard(&h3, 12);
    let c = h3.commutator(h3.generator(0), h3.generator(1));
    for n in 1..=9 {
        println!("|c^{n}| = {}", metric.length(&h3.pow(&c, n)));
    }

    let mut gens = h3.generator_elements();
    gens.push(c.clone());
    let wider = WordMetric::new(&h3, &gens, 12);
    println!("with c as a generator, |c^9| = {}", wider.length(&h3.pow(&c, 9)));
    Ok(())
}
