//! The finite index criterion on D_inf and on Z x C2.

use qhlab::group::{Group, SubgroupSpec};
use qhlab::retract::{finite_index_criterion, DEFAULT_TRANSVERSAL_CAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        SubgroupSpec::dihedral_rotations(Group::infinite_dihedral())?,
        SubgroupSpec::left_factor(Group::direct_product(Group::free_abelian(1)?, Group::cyclic(2)?))?,
    ];
    for h in cases {
        let rep = finite_index_criterion(&h, 10, Some(6), DEFAULT_TRANSVERSAL_CAP)?;
        println!("{} in {}: index {}, {} transversals", h.name, h.ambient.name(), rep.index, rep.transversals_checked);
        for s in rep.summaries.iter().take(3) {
            println!("  T = {:?}: |C(H_r, T)| = {:?}, longest {:?}", s.representatives, s.table.sizes, s.witnesses);
        }
        println!("  verdict: {}", if rep.positive { "quasi-retract within horizon" } else { "no stable transversal" });
    }
    Ok(())
}
