//! Stable lengths on a Cayley ball and on the line.

use qhlab::action::{cayley_action, line_action_from_qm, stable_length, Point};
use qhlab::group::Group;
use qhlab::qmorph::Quasimorphism;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Group::infinite_dihedral();
    let rho = cayley_action(&d, &d.generator_elements(), 12)?;
    let o = Point::Group(d.identity());
    for w in ["t", "s", "t^2", "s t"] {
        let s = stable_length(&rho, &d.parse(w)?, &o, 10);
        println!("tau({w}) = {} ({:?})", s.tau, s.hint);
    }

    let f2 = Group::free(2)?;
    let line = line_action_from_qm(&Quasimorphism::brooks(f2.clone(), &[1, 2])?);
    for w in ["a b", "a b a b", "b a", "a"] {
        let s = stable_length(&line, &f2.parse(w)?, &Point::real(0), 20);
        println!("on the h_ab line, tau({w}) = {}", s.tau);
    }
    Ok(())
}
