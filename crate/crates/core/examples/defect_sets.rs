//! Defect sets and the bound checks on the catalog maps.

use qhlab::catalog::{heisenberg_section, lemma_suite_maps};
use qhlab::qhom::{
    check_commutator_image, check_conjugation_bound, check_inverse_bound, check_product_bound, defect_set,
    dual_defect_set,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let radius = 4;
    for phi in lemma_suite_maps()? {
        let d = defect_set(&phi, radius)?;
        let dual = dual_defect_set(&phi, radius)?;
        let checks = [
            check_product_bound(&phi, radius, 3)?,
            check_inverse_bound(&phi, radius)?,
            check_conjugation_bound(&phi, radius)?,
            check_commutator_image(&phi, radius, 16)?,
        ];
        let passed = checks.iter().filter(|c| c.passed).count();
        println!("{}", phi.label);
        println!("  D = {:?}, dual sizes {:?}, {passed}/{} bounds hold", d.words, dual.table.sizes, checks.len());
    }

    let s = heisenberg_section()?;
    let d = dual_defect_set(&s, 6)?;
    println!("{}: {:?} by radius, {:?}", d.label, d.table.sizes, d.verdict);
    Ok(())
}
