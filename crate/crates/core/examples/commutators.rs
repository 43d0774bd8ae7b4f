//! Commutator symmetry and powers for subgroups that almost commute with T.

use qhlab::group::{Group, SubgroupSpec};
use qhlab::retract::{almost_commutative_check, power_commutator_checks, symmetry_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Group::infinite_dihedral();
    let h3 = Group::heisenberg();
    let cases = [
        (SubgroupSpec::dihedral_rotations(d.clone())?, vec![d.parse("s")?]),
        (SubgroupSpec::heisenberg_a_c(h3.clone())?, vec![h3.parse("b")?]),
    ];
    for (h, t) in cases {
        let sym = symmetry_check(&h, 6, &t)?;
        let pc = power_commutator_checks(&h, 6, &t, 4)?;
        println!(
            "{}: |C(H,T)| = {}, symmetry {}, factorization {}, power defect {}",
            h.name, sym.c_h_t, sym.outcome.passed, pc.factorization.passed, pc.power_defect.passed
        );
    }
    for g in [Group::free_abelian(2)?, h3] {
        let c = almost_commutative_check(&g, 5)?;
        println!("C(B_r, B_r) in {}: {:?}", g.name(), c.table.sizes);
    }
    Ok(())
}
