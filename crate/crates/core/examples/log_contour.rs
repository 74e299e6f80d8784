//! Normal inverse Gaussian type transform with drift. It grows along the imaginary directions
//! slower than any cone allows, so the log-deformed line is used.

use zsinh::cases;
use zsinh::invz::{moment, select_params, ContourKind, Method, Tuning};

fn main() -> zsinh::Result<()> {
    let u = cases::nts_drift().transform()?;
    let reference = 6.167_416_196_788_841e-5;
    println!("{}", u.name);

    let tuning = Tuning { interval: Some((0.95, 1.0)), ..Default::default() };
    let plan = select_params(&u, Method::Log, 100, 100, &tuning)?;
    if let ContourKind::Log { contour, d_half } = plan.contour {
        println!("sigma {:.6}  A {:.6}  strip half-width {:.4}", contour.sigma, contour.a, d_half);
    }
    let log = moment(&u, 100, Method::Log, &tuning)?;
    let trap =
        moment(&u, 100, Method::Trap, &Tuning { trap_nodes: Some(900), radius: Some(0.98), ..Default::default() })?;
    for (name, rep) in [("log", &log), ("trap", &trap)] {
        println!(
            "{name:>5} {:>4} nodes  {:.16e}  err {:.1e}",
            rep.nodes_used,
            rep.value.re,
            (rep.value.re - reference).abs()
        );
    }
    Ok(())
}
