//! Impulse response of the causal factor of a rational spectral density whose zeros and poles
//! sit just outside the unit circle.

use std::time::Instant;
use zsinh::cases;
use zsinh::oracle::binomial_series_h;
use zsinh::wienerhopf::{impulse_response_with, rational_psd};

fn main() -> zsinh::Result<()> {
    for case in cases::filter_cases() {
        let (psd, _transfer) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus)?;
        let t0 = Instant::now();
        let resp = impulse_response_with(&psd, case.n_lo, case.n_hi, &case.options())?;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        let exact = binomial_series_h(case.a_plus, case.a_minus, case.m_plus, case.m_minus, case.n_hi as usize)?;
        let err = resp.h.iter().zip(&exact[case.n_lo as usize..]).map(|(h, e)| ((h - e) / e).abs()).fold(0.0, f64::max);
        println!(
            "{:<20} n in [{}, {}]  grids ({}, {})  d = {:.6e}  max rel err {:.2e}  {:.1} ms",
            case.name, case.n_lo, case.n_hi, resp.outer_nodes, resp.inner_nodes, resp.factorization.d, err, ms
        );
        println!("    h[{}] = {:.16e}, h[{}] = {:.16e}", case.n_lo, resp.h[0], case.n_hi, resp.h.last().unwrap());
    }
    Ok(())
}
