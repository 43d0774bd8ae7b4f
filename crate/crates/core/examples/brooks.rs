//! The Brooks quasimorphism h_ab and the retraction of F2 onto <ab>.

use qhlab::catalog::letters;
use qhlab::group::Group;
use qhlab::metric::Ball;
use qhlab::qmorph::{defect_sup, homogenize_estimate, Quasimorphism};
use qhlab::retract::cyclic_retract_from_qm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = Group::free(2)?;
    let h = Quasimorphism::brooks(f2.clone(), &letters(&f2, "a b")?)?;
    for w in ["a b a b", "a b b a b", "b^-1 a^-1", "a b a^-1 b^-1"] {
        println!("h_ab({w}) = {}", h.eval(&f2.parse(w)?));
    }
    for r in 1..=5 {
        println!("defect sup on B_{r}: {}", defect_sup(&h, &Ball::standard(&f2, r)));
    }

    let g = f2.parse("a b a")?;
    let est = homogenize_estimate(&h, &g, 12);
    println!("h(g^n)/n for g = aba: estimate {} with tail oscillation {}", est.estimate, est.oscillation);

    let ab = f2.parse("a b")?;
    let r = cyclic_retract_from_qm(&h, &ab, 4, 20)?;
    println!("{}: |D| by radius {:?}, fixes powers: {}", r.map.label, r.defect.table.sizes, r.on_powers.passed);
    println!("defects: {:?}", r.defect.words);
    Ok(())
}
