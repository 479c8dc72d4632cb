//! Approach, contact and a two-step desired force profile.

use finger_reflex::impedance::ControlPhase;
use finger_reflex::{run_scenario, scenarios, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = scenarios::fig4_force();
    println!("contact angle: {:.6} rad", scenario.object_angle()?.expect("has a surface"));
    let trace = run_scenario(&scenario, &SimConfig::default())?;

    if let Some(r) = trace.rows.iter().find(|r| r.phase == ControlPhase::Contact) {
        println!("contact phase entered at t = {:.4} s", r.t);
    }
    for t in [0.5, 1.05, 1.1, 1.5, 5.9, 6.05, 6.5, 10.0] {
        let r = trace.at(t).expect("inside the run");
        println!(
            "t = {:>5.2}  f_d = {:.3} N  f_e = {:.5} N  tau_c = {:.5} N m  phase = {:?}",
            r.t, r.f_d, r.f_e, r.tau_c, r.phase
        );
    }
    Ok(())
}
