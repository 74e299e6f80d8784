//! Mixture of a point mass and a KoBoL law: all three applicable schemes side by side.

use zsinh::cases;
use zsinh::invz::{moment, Method, Tuning};

fn main() -> zsinh::Result<()> {
    let u = cases::kobol_atom_mixture().transform()?;
    let reference = 3.726_805_598_401_658e-5;
    println!("{}", u.name);
    let near_unit = |reduce| Tuning { interval: Some((0.98, 1.0)), reduce, ..Default::default() };
    for (method, tuning) in [
        (Method::Trap, Tuning { trap_nodes: Some(1101), ..Default::default() }),
        (Method::Sinh1, near_unit(0.8)),
        (Method::Sinh2, near_unit(0.75)),
    ] {
        let rep = moment(&u, 100, method, &tuning)?;
        println!(
            "{method:>6} {:>5} nodes  {:.16e}  err {:.1e}",
            rep.nodes_used,
            rep.value.re,
            (rep.value.re - reference).abs()
        );
    }
    match moment(&u, 100, Method::Sinh3, &Tuning::default()) {
        Ok(_) => println!("sinh3 unexpectedly accepted"),
        Err(e) => println!(" sinh3 rejected: {e}"),
    }
    Ok(())
}
