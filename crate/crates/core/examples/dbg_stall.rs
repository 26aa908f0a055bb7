use num_complex::Complex64;
use shiftlocus_core::atlas::{e_inverse, e_map, root_parameter};
use shiftlocus_core::itinerary::Itinerary;
use shiftlocus_core::model::model_setup;
use shiftlocus_core::tree::tree_path_with_depth;

fn main() {
    let m = model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap();
    let target = Itinerary::preperiodic(vec![1], vec![0]);
    let path = tree_path_with_depth(&m, &target, 64, 30).unwrap();
    let root = root_parameter(&m).unwrap();
    println!("root lambda = {root}");
    let mut lam = e_inverse(&m, path.samples[0].point, root).unwrap();
    for (i, s) in path.samples.iter().enumerate().skip(1) {
        match e_inverse(&m, s.point, lam) {
            Ok(next) => { lam = next; }
            Err(e) => {
                println!("FAIL at sample {i} t={:.4} model point {} (word {:?}, level {:.4}, prev lambda {lam})", s.t, s.point, s.word, s.level);
                println!("  error: {e}");
                // try direct e_map at prev lambda to see its word
                match e_map(&m, lam) {
                    Ok(img) => println!("  e(prev lambda): point {}, word {:?}", img.point, img.word),
                    Err(e2) => println!("  e(prev lambda) error: {e2}"),
                }
                // walk a fine segment between previous sample point and failing point
                let prev_pt = path.samples[i-1].point;
                for k in 1..=8 {
                    let mid = prev_pt + (s.point - prev_pt) * (k as f64 / 8.0);
                    match e_inverse(&m, mid, lam) {
                        Ok(l2) => { println!("  k={k}: ok lambda={l2}"); lam = l2; }
                        Err(e2) => { println!("  k={k}: err {e2}"); }
                    }
                }
                break;
            }
        }
        if i % 40 == 0 { println!("sample {i}: t={:.4} lambda={} word={:?}", s.t, lam, s.word); }
    }
}
