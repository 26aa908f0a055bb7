use shiftlocus_core::model::model_setup;
use num_complex::Complex64;

fn main() {
    let m = model_setup(Complex64::new(2.0/3.0, 0.0)).unwrap();
    println!("lambda0 = {}", m.lambda0());
    println!("mu0     = {}", m.mu0());
    println!("q0      = {}", m.q0);
    println!("r0      = {}", m.r0);
    println!("pole0   = {}", m.slice.pole(0));
    println!("trap    = {}", m.lin.trap_radius);
    // where is the repelling fixed point (word 0bar)?
    let zrep = shiftlocus_core::model::periodic_point(&m.slice, &[0]).unwrap();
    println!("z_rep   = {zrep}");
    // level of lambda0' (the angle-pi boundary point)
    let lam0p = m.lin.koenigs_inverse(Complex64::new(-m.r0*0.999999, 0.0)).unwrap();
    println!("lambda0' ~ {lam0p}");
}
