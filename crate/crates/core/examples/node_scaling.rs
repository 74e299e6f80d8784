//! Node counts against n: the circle trapezoid rule grows linearly, the sinh contour barely moves.
//! Also shows the automatic method choice for each stored model.

use zsinh::cases;
use zsinh::invz::{moment, select_auto, Method, Tuning};
use zsinh::oracle::trapezoid_oracle;

fn main() -> zsinh::Result<()> {
    let u = cases::kobol_subordinator().transform()?;
    println!("{:>6} {:>8} {:>8} {:>10} {:>10}", "n", "trap", "sinh1", "trap_err", "sinh1_err");
    for n in [25u32, 50, 100, 200, 400, 800] {
        let reference = trapezoid_oracle(&u, n, 1.0, 1e-17)?.value;
        let trap = moment(&u, n, Method::Trap, &Tuning::default())?;
        let sinh = moment(&u, n, Method::Sinh1, &Tuning::default())?;
        println!(
            "{n:>6} {:>8} {:>8} {:>10.1e} {:>10.1e}",
            trap.nodes_used,
            sinh.nodes_used,
            (trap.value.re - reference).abs(),
            (sinh.value.re - reference).abs()
        );
    }
    println!();
    for (name, model) in [
        ("kobol_subordinator", cases::kobol_subordinator()),
        ("kobol_drift", cases::kobol_drift()),
        ("kobol_atom_mixture", cases::kobol_atom_mixture()),
        ("kobol_nu_above_one", cases::kobol_nu_above_one()),
        ("nts_drift", cases::nts_drift()),
    ] {
        let plan = select_auto(&model.transform()?, 100, 100, &Tuning::default())?;
        println!("{name:<20} auto -> {} with {} nodes", plan.method, plan.nodes());
    }
    Ok(())
}
