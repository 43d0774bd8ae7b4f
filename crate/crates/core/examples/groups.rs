//! Normal forms in each built-in group family.

use qhlab::catalog::rounding_extension;
use qhlab::group::Group;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = Group::free(2)?;
    let w = f2.parse("a b b^-1 a b a^-1")?;
    println!("F2: a b b^-1 a b a^-1 = {}", f2.format(&w));

    let d = Group::infinite_dihedral();
    let x = d.parse("s t s")?;
    println!("D_inf: s t s = {}, (s t)^2 = {}", d.format(&x), d.format(&d.pow(&d.parse("s t")?, 2)));

    let h3 = Group::heisenberg();
    let c = h3.commutator(h3.generator(0), h3.generator(1));
    for n in [1, 2, 5] {
        let w = h3.parse(&format!("a^{n} b^{n} a^-{n} b^-{n}"))?;
        println!("Heis: [a^{n}, b^{n}] = c^{}: {}", n * n, w == h3.pow(&c, n * n));
    }

    let bs = Group::baumslag_solitar(2)?;
    let lhs = bs.parse("t a t^-1")?;
    println!("BS(1,2): t a t^-1 = {}, equals a^2: {}", bs.format(&lhs), lhs == bs.parse("a^2")?);

    let e = rounding_extension()?;
    let q = e.parse("a^3")?;
    println!("{}: a^3 = {}, a^3 a^-3 = {}", e.name(), e.format(&q), e.format(&e.mul(&q, &e.inv(&q))));
    Ok(())
}
