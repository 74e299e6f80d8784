//! Coefficients of a KoBoL subordinator transform: sinh-deformed contour against the plain
//! trapezoid rule on a circle, checked with a brute-force reference.

use std::time::Instant;
use zsinh::cases;
use zsinh::invz::{moment, Method, Tuning};
use zsinh::oracle::trapezoid_oracle;

fn main() -> zsinh::Result<()> {
    let u = cases::kobol_subordinator().transform()?;
    println!("{}", u.name);
    println!("{:>4} {:>8} {:>6} {:>24} {:>10} {:>10}", "n", "method", "nodes", "value", "|err|", "time_us");
    for n in [100u32, 500] {
        let reference = trapezoid_oracle(&u, n, 1.0, 1e-17)?.value;
        let near_unit = Tuning { interval: Some((0.98, 1.0)), reduce: 0.75, ..Default::default() };
        for (method, tuning) in [
            (Method::Sinh1, near_unit),
            (Method::Sinh1, Tuning::default()),
            (Method::Trap, Tuning { trap_nodes: Some(1101), ..Default::default() }),
            (Method::Trap, Tuning::default()),
        ] {
            let t0 = Instant::now();
            let rep = moment(&u, n, method, &tuning)?;
            let us = t0.elapsed().as_secs_f64() * 1e6;
            println!(
                "{n:>4} {method:>8} {:>6} {:>24.16e} {:>10.2e} {us:>10.1}",
                rep.nodes_used,
                rep.value.re,
                (rep.value.re - reference).abs()
            );
        }
    }
    Ok(())
}
