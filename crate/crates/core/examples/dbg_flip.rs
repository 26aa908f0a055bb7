use num_complex::Complex64;
use shiftlocus_core::model::model_setup;
use shiftlocus_core::orbit::{classify_parameter, IterationBudget, Region};

fn main() {
    let m = model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap();
    let lam_star = Complex64::new(0.35879084892827723, -3.036453485486959);
    let budget = IterationBudget { max_iter: 60000, cycle_tol: 1e-6 };
    for eps in [3e-6f64, 3e-5, 3e-4, 3e-3, 1e-2] {
        let mut non = 0;
        let mut first = None;
        for k in 0..256 {
            let ang = std::f64::consts::TAU * k as f64 / 256.0;
            let probe = lam_star + Complex64::from_polar(eps, ang);
            let c = classify_parameter(m.slice.rho, probe, budget).unwrap();
            if c.region != Region::Shift {
                non += 1;
                if first.is_none() { first = Some((ang, c.region, c.period_lambda)); }
            }
        }
        println!("eps={eps:.0e}: nonshift {non}/256 first={first:?}");
    }
}
