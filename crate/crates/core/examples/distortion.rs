//! Distorted subgroups and the certificates they yield.

use qhlab::group::{Group, SubgroupSpec};
use qhlab::metric::distortion_profile;
use qhlab::retract::non_retract_certificate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h3 = Group::heisenberg();
    let bs = Group::baumslag_solitar(2)?;
    let d = Group::infinite_dihedral();
    let cases = [
        (SubgroupSpec::heisenberg_center(h3)?, 16),
        (SubgroupSpec::bs_translations(bs)?, 10),
        (SubgroupSpec::dihedral_rotations(d)?, 24),
    ];
    for (h, horizon) in cases {
        let g = &h.ambient;
        let p = distortion_profile(&g.generator_elements(), &h, &h.generators, 10, horizon)?;
        println!("{} in {}: slope {:.3}", h.name, g.name(), p.slope);
        match non_retract_certificate(&p) {
            Some(c) => {
                println!("  {}", c.statement);
                for (i, e, w) in c.witnesses.iter().rev().take(3) {
                    println!("  {w}: intrinsic {i}, extrinsic {e}");
                }
            }
            None => println!("  undistorted within radius 10: {:?}", p.verdict),
        }
    }
    Ok(())
}
