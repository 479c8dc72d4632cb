//! Adaptive slip reflex: the object's mass-to-friction ratio jumps twice and
//! the grip force follows.

use finger_reflex::contact::ObjectParams;
use finger_reflex::reflex::{ideal_tracking_slip, EstimatorState, MassBounds, ReflexParams};
use finger_reflex::summary::summarize;
use finger_reflex::{run_scenario, scenarios, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = scenarios::fig6_slip();
    let trace = run_scenario(&scenario, &SimConfig::default())?;
    let summary = summarize(&scenario.name, &trace, &scenario.events()?);
    print!("{}", summary.to_text());

    println!("\nslip around the first mass step:");
    for t in [4.99, 5.01, 5.02, 5.05, 5.1, 5.2, 5.5] {
        let r = trace.at(t).expect("inside the run");
        println!("t = {:.2}  v = {:.5} m/s  f_d = {:.4} N  m_hat = {:.5} kg", r.t, r.v, r.f_d, r.m_hat);
    }

    // With a correct estimate and perfect force tracking, slip decays as e^(-b t).
    let object = ObjectParams::new(0.07, scenarios::GRAVITY)?;
    let est = EstimatorState::from_mass(0.07, 0.0, MassBounds::default())?;
    let ideal = ideal_tracking_slip(&object, &ReflexParams::default(), &est, 0.05, 1e-4, 2500);
    let (t, v) = ideal[ideal.len() - 1];
    println!("\nideal tracking: v({t:.2}) = {v:.6e}, v0 e^(-b t) = {:.6e}", 0.05 * (-20.0 * t).exp());
    Ok(())
}
