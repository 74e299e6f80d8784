//! A subordinator with drift grows exponentially to the right, which narrows the cone
//! available to the first sinh family. Squaring the variable first recovers a wide strip.

use zsinh::cases;
use zsinh::invz::{moment, Method, Tuning};

fn main() -> zsinh::Result<()> {
    let u = cases::kobol_drift().transform()?;
    let reference = 5.604_083_178_421_058e-5;
    println!("{}; cone angle {:?}", u.name, u.descriptor.conditions.sinh1);
    for (method, reduce) in [(Method::Sinh1, 0.8), (Method::Sinh2, 0.75)] {
        let tuning = Tuning { interval: Some((0.98, 1.0)), reduce, ..Default::default() };
        let rep = moment(&u, 100, method, &tuning)?;
        println!(
            "{method:>6}: {:>4} nodes  value {:.16e}  err {:.1e}  est {:.1e}",
            rep.nodes_used,
            rep.value.re,
            (rep.value.re - reference).abs(),
            rep.est_discretization_error + rep.est_truncation_error
        );
    }
    // the default tolerance-driven choice of (r-, r+)
    for method in [Method::Sinh1, Method::Sinh2] {
        let rep = moment(&u, 100, method, &Tuning::default())?;
        println!(
            "{method:>6} (default tuning): {:>4} nodes  err {:.1e}",
            rep.nodes_used,
            (rep.value.re - reference).abs()
        );
    }
    Ok(())
}
