//! Free-space position step under the impedance controller.

use finger_reflex::{run_scenario, scenarios, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = scenarios::fig3_step();
    let trace = run_scenario(&scenario, &SimConfig::default())?;

    let target = 0.5;
    let peak = trace.rows.iter().map(|r| r.theta1).fold(f64::MIN, f64::max);
    let settled = trace.rows.iter().filter(|r| r.t >= 0.1).find(|r| (r.theta1 - target).abs() <= 0.02 * target);
    println!("peak theta1 = {peak:.6} rad (overshoot {:.2e} rad)", (peak - target).max(0.0));
    if let Some(r) = settled {
        println!("within 2% of the step at t = {:.4} s", r.t);
    }
    for t in [0.1, 0.11, 0.12, 0.15, 0.2, 0.5, 1.0] {
        let r = trace.at(t).expect("inside the run");
        println!("t = {:.2}  theta1 = {:.5}  theta1_dot = {:.4}", r.t, r.theta1, r.theta1_dot);
    }
    Ok(())
}
