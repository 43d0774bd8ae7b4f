//! Retraction, section and strict quasi-isomorphism for the rounding
//! extension, and the refusal for the Heisenberg group.

use qhlab::catalog::rounding_extension;
use qhlab::group::Group;
use qhlab::retract::{retraction_to_section, strict_qiso_product, transversal_retraction, SesBundle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = SesBundle::from_central_extension(rounding_extension()?)?;
    let tr = transversal_retraction(&bundle, 8)?;
    println!("{}: D(r) = {:?}, sizes {:?}", tr.map.label, tr.report.defect.words, tr.report.defect.table.sizes);

    let sec = retraction_to_section(&tr.map, &bundle, 6, 32)?;
    println!("{}: distance to the zero-lift section {}", sec.section.label, sec.report.equiv_distance);

    let q = strict_qiso_product(&bundle, &tr.map, &sec.section, 6, 32)?;
    let r = &q.report;
    println!("G -> Z x Z mismatches: {} forward, {} backward", r.forward_mismatches, r.backward_mismatches);
    if let Some(c) = &r.constants {
        println!("qi constants hold: {}", c.holds());
    }

    let h3 = SesBundle::heisenberg_center(Group::heisenberg())?;
    match transversal_retraction(&h3, 6) {
        Ok(_) => println!("Heisenberg: unexpectedly split"),
        Err(e) => println!("Heisenberg: {e}"),
    }
    Ok(())
}
