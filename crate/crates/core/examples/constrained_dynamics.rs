//! Full three-joint mass and Coriolis matrices and their reduction onto the
//! single coupled degree of freedom.

use finger_reflex::finger::{
    constraint_maps, coriolis_matrix, kinetic_energy, mass_matrix, reduce_dynamics, FingerParams, InertiaModel,
    ReducedState,
};

fn main() {
    let maps = constraint_maps();
    println!("constraint matrix A:{}", maps.a);
    println!("null-space map L: {:?}", maps.l.as_slice());
    println!("A * L = {:?}\n", (maps.a * maps.l).as_slice());

    for model in [InertiaModel::UniformRod, InertiaModel::PointMassAtTip] {
        let finger = FingerParams { inertia_model: model, ..FingerParams::human_index() };
        let s = ReducedState::new(0.4, 2.0);
        let q = s.expand();
        let red = reduce_dynamics(s.theta1, s.theta1_dot, &finger);
        println!("{model:?}");
        println!("  D(theta):{:.3e}", mass_matrix(&q.theta, &finger));
        println!("  C(theta, theta_dot):{:.3e}", coriolis_matrix(&q.theta, &q.theta_dot, &finger));
        println!("  D' = {:.6e} kg m^2, C' = {:.6e} kg m^2/s", red.d_prime, red.c_prime);
        println!(
            "  kinetic energy: full {:.6e} J, reduced {:.6e} J\n",
            kinetic_energy(&q.theta, &q.theta_dot, &finger),
            0.5 * red.d_prime * s.theta1_dot * s.theta1_dot
        );
    }
}
