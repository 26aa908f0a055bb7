use num_complex::Complex64;
use shiftlocus_core::atlas::{e_inverse, root_parameter};
use shiftlocus_core::itinerary::Itinerary;
use shiftlocus_core::model::model_setup;
use shiftlocus_core::tree::tree_path_with_depth;

fn main() {
    let m = model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap();
    let lam_sn = Complex64::new(1.8676307665609038, 0.0);
    let target = Itinerary::periodic(vec![0]);
    // Nodes only: realize the path sparsely (8 per branch) to depth 300.
    let path = tree_path_with_depth(&m, &target, 8, 300).unwrap();
    let root = root_parameter(&m).unwrap();
    let mut lam = e_inverse(&m, path.samples[0].point, root).unwrap();
    let zrep = shiftlocus_core::model::periodic_point(&m.slice, &[0]).unwrap();
    for (i, s) in path.samples.iter().enumerate().skip(1) {
        match e_inverse(&m, s.point, lam) {
            Ok(next) => lam = next,
            Err(e) => { println!("fail at {i}: {e}"); break; }
        }
        if i % 160 == 0 {
            let k = i / 16; // branch depth (16 samples per branch j=0)
            let model_gap = (s.point - zrep).norm();
            println!("branch {k:3}: model gap {model_gap:.3e}  lambda {:.10}  gap {:.3e}", lam.re, (lam - lam_sn).norm());
        }
    }
}
