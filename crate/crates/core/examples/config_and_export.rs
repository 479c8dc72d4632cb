//! Builds a scenario from a config string, runs it and round-trips the CSV
//! trace.

use finger_reflex::config;
use finger_reflex::{run_scenario, Trace};

const CONFIG: &str = "
scenario.base = fig6_slip
scenario.name = heavy_object
scenario.duration_s = 3

object.m_over_mu_g = 60
object.m_over_mu_steps = 1.5:120   # doubles half-way
reflex.alpha = 400
sim.integrator = rk4
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let setup = config::load(CONFIG)?;
    let trace = run_scenario(&setup.scenario, &setup.sim)?;

    let dir = std::env::temp_dir().join("finger_reflex_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}.csv", setup.scenario.name));
    trace.write_csv(std::fs::File::create(&path)?)?;
    let back = Trace::read_csv(std::fs::File::open(&path)?)?;
    assert_eq!(back, trace);

    let last = trace.last().expect("non-empty");
    println!("wrote {} rows to {}", trace.len(), path.display());
    println!("final m_hat = {:.5} kg, v = {:.2e} m/s", last.m_hat, last.v);

    match config::load("contact.stiffness_n_per_m = -1") {
        Err(e) => println!("rejected config: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
