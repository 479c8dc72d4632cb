//! Fingertip position, Jacobian and the force-to-torque coupling along the
//! one-DOF coupled motion of the finger.

use finger_reflex::finger::{coupling_scalar, jacobian, reduced_fingertip, FingerParams, ReducedState};
use nalgebra::Vector2;

fn main() {
    let finger = FingerParams::human_index();
    let normal = Vector2::new(0.0, 1.0);
    println!("{:>8} {:>9} {:>9} {:>9}", "theta1", "x [mm]", "y [mm]", "H [m]");
    for k in 0..=8 {
        let theta1 = k as f64 * 0.1;
        let tip = reduced_fingertip(theta1, &finger);
        let h = coupling_scalar(theta1, &normal, &finger).expect("unit normal");
        println!("{theta1:>8.2} {:>9.3} {:>9.3} {h:>9.5}", tip.x * 1e3, tip.y * 1e3);
    }

    let joints = ReducedState::new(0.3, 0.0).expand();
    println!("\njoint angles at theta1 = 0.3: {:.4?}", joints.theta.as_slice());
    println!("fingertip Jacobian:{:.5}", jacobian(&joints.theta, &finger));
}
