//! KoBoL with ν > 1: the transform blows up along the negative axis, so only cones around the
//! imaginary axis are usable. The first sinh family is rejected and the third one is used.

use zsinh::cases;
use zsinh::invz::{moment, select_params, Method, Tuning};

fn main() -> zsinh::Result<()> {
    let u = cases::kobol_nu_above_one().transform()?;
    let reference = 3.008_592_414_949_358e-7;
    println!("{}; half-angle of the cones: {:?}", u.name, u.descriptor.conditions.sinh3);

    if let Err(e) = moment(&u, 100, Method::Sinh1, &Tuning::default()) {
        println!("sinh1: {e} (exit code {})", e.exit_code());
    }

    let tuning = Tuning { interval: Some((0.98, 1.0)), reduce: 0.85, ..Default::default() };
    let plan = select_params(&u, Method::Sinh3, 100, 100, &tuning)?;
    println!("contour {:?}", plan.contour);
    println!("step {:.4}, {} nodes", plan.grid.zeta, plan.nodes());
    let rep = moment(&u, 100, Method::Sinh3, &tuning)?;
    println!("value {:.16e}  err {:.1e}", rep.value.re, (rep.value.re - reference).abs());

    for n in [50u32, 200, 400] {
        let rep = moment(&u, n, Method::Sinh3, &Tuning::default())?;
        println!("n={n:<4} {:.16e}  {} nodes", rep.value.re, rep.nodes_used);
    }
    Ok(())
}
