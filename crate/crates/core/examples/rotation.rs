//! Transforms whose singular ray is not the positive axis: pick the arm direction away from
//! the singularities and pre-rotate the third sinh family.

use num_complex::Complex64;
use std::f64::consts::PI;
use zsinh::cases;
use zsinh::functions::{rotation_for_arms, select_rotation, AnalyticFunction};
use zsinh::invz::{moment, Method, Tuning};

fn main() -> zsinh::Result<()> {
    for poles in [vec![Complex64::new(2.0, 0.0)], vec![Complex64::new(0.0, 2.0), Complex64::new(0.0, -2.0)]] {
        let arms = select_rotation(&poles)?;
        println!("singularities {poles:?}: arms at {:.4}, pre-rotation {:.4}", arms, rotation_for_arms(arms));
    }

    // KoBoL with its branch point moved from λ to λe^{iθ}; coefficients pick up e^{-inθ}
    let base = cases::kobol_nu_above_one().transform()?;
    let theta = PI / 3.0;
    let shift = Complex64::from_polar(1.0, -theta);
    let f = base.evaluator.clone();
    let rotated = AnalyticFunction::new(
        format!("{} at angle {theta:.4}", base.name),
        move |z| f(z * shift),
        base.descriptor.clone(),
        false,
    );
    let arms = select_rotation(&[Complex64::from_polar(1.01, theta)])?;
    let phi = rotation_for_arms(arms);
    println!("branch point at angle {theta:.4}: pre-rotation {phi:.4}");

    let n = 100;
    let plain = moment(&base, n, Method::Sinh3, &Tuning::default())?.value;
    let rep = moment(&rotated, n, Method::Sinh3, &Tuning { phi, ..Default::default() })?;
    let expected = plain * Complex64::from_polar(1.0, -(n as f64) * theta);
    println!(
        "value {:.6e}  expected {:.6e}  |diff| {:.1e}  {} nodes",
        rep.value,
        expected,
        (rep.value - expected).norm(),
        rep.nodes_used
    );
    Ok(())
}
