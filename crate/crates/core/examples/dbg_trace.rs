use num_complex::Complex64;
use shiftlocus_core::atlas::trace_accessibility_path;
use shiftlocus_core::itinerary::Itinerary;
use shiftlocus_core::model::model_setup;
use std::time::Instant;

fn main() {
    let m = model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap();
    for (name, target) in [
        ("0 (virtual center)", Itinerary::finite(vec![0])),
        ("|0 (parabolic)", Itinerary::periodic(vec![0])),
        ("1|0 (misiurewicz)", Itinerary::preperiodic(vec![1], vec![0])),
    ] {
        let t0 = Instant::now();
        match trace_accessibility_path(&m, &target, 64) {
            Ok(path) => {
                let dt = t0.elapsed().as_secs_f64();
                println!("--- target {name}: {} samples in {dt:.1}s", path.lambda_samples.len());
                println!("    terminal = {}", path.terminal_estimate);
                println!("    stalled  = {:?}", path.stalled_at);
                let max_res = path.residuals.iter().cloned().fold(0.0f64, f64::max);
                println!("    max corrector residual = {max_res:.2e}");
                match &path.solver {
                    Some(s) => println!(
                        "    solver: sol={}, res={:.2e}, dist={:.2e}, mult={:?}, infstep={:?}",
                        s.solution, s.residual, s.distance, s.multiplier, s.infinity_step
                    ),
                    None => println!("    solver: FAILED"),
                }
            }
            Err(e) => println!("--- target {name}: ERROR {e} ({:.1}s)", t0.elapsed().as_secs_f64()),
        }
    }
}
