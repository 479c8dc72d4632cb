//! Independent reference computations shared by the integration tests.
//!
//! The plant side never calls into the library's dynamics: link geometry is
//! rebuilt from scratch, derivatives come from complex steps or five-point
//! differences, and the constrained motion is solved as a saddle-point system
//! with explicit multipliers.

#![allow(dead_code)]

use finger_reflex::finger::{FingerParams, InertiaModel, ReducedState};
use finger_reflex::impedance::{control_input, control_torque, ControlPhase, ControlTargets, ImpedanceFrame};
use finger_reflex::sim::{EventKind, ScenarioEvent};
use finger_reflex::{Scenario, Trace};
use nalgebra::{Complex, Matrix2x3, Matrix3, Matrix5, Vector2, Vector3, Vector5};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

/// Joint constraints `A·θ = 0`: θ₂ = 5/4·θ₁, θ₃ = 5/6·θ₁.
pub fn constraint_matrix() -> nalgebra::Matrix2x3<f64> {
    Matrix2x3::new(1.0, -0.8, 0.0, 1.0, 0.0, -1.2)
}

pub fn expand(theta1: f64) -> Vector3<f64> {
    Vector3::new(theta1, theta1 * 1.25, theta1 / 1.2)
}

fn com_offset(p: &FingerParams, i: usize) -> f64 {
    match p.inertia_model {
        InertiaModel::UniformRod => 0.5 * p.lengths[i],
        InertiaModel::PointMassAtTip => p.lengths[i],
    }
}

fn link_inertia(p: &FingerParams, i: usize) -> f64 {
    match p.inertia_model {
        InertiaModel::UniformRod => p.masses[i] * p.lengths[i] * p.lengths[i] / 12.0,
        InertiaModel::PointMassAtTip => 0.0,
    }
}

/// Link centres of mass followed by the fingertip.
fn points(theta: [C64; 3], p: &FingerParams) -> [[C64; 2]; 4] {
    let zero = C64::new(0.0, 0.0);
    let mut out = [[zero; 2]; 4];
    let (mut x, mut y, mut phi) = (zero, zero, zero);
    for i in 0..3 {
        phi += theta[i];
        out[i] = [x + phi.cos() * com_offset(p, i), y + phi.sin() * com_offset(p, i)];
        x += phi.cos() * p.lengths[i];
        y += phi.sin() * p.lengths[i];
    }
    out[3] = [x, y];
    out
}

const CS_STEP: f64 = 1e-30;

/// Complex-step Jacobians of the three mass centres and the fingertip.
fn point_jacobians(theta: &Vector3<f64>, p: &FingerParams) -> [Matrix2x3<f64>; 4] {
    let mut out = [Matrix2x3::zeros(); 4];
    for k in 0..3 {
        let mut z = [C64::new(theta[0], 0.0), C64::new(theta[1], 0.0), C64::new(theta[2], 0.0)];
        z[k].im = CS_STEP;
        for (j, pt) in points(z, p).iter().enumerate() {
            out[j][(0, k)] = pt[0].im / CS_STEP;
            out[j][(1, k)] = pt[1].im / CS_STEP;
        }
    }
    out
}

pub fn tip_position(theta: &Vector3<f64>, p: &FingerParams) -> Vector2<f64> {
    let z = [C64::new(theta[0], 0.0), C64::new(theta[1], 0.0), C64::new(theta[2], 0.0)];
    let tip = points(z, p)[3];
    Vector2::new(tip[0].re, tip[1].re)
}

pub fn tip_jacobian(theta: &Vector3<f64>, p: &FingerParams) -> Matrix2x3<f64> {
    point_jacobians(theta, p)[3]
}

/// `D = Σ mᵢ·Jᵢᵀ·Jᵢ + Iᵢ·ωᵢ·ωᵢᵀ`, i.e. the Hessian of the kinetic energy in θ̇.
#[allow(clippy::needless_range_loop)]
pub fn mass_matrix(theta: &Vector3<f64>, p: &FingerParams) -> Matrix3<f64> {
    let js = point_jacobians(theta, p);
    let mut d = Matrix3::zeros();
    for i in 0..3 {
        d += p.masses[i] * js[i].transpose() * js[i];
        let w = Vector3::from_fn(|j, _| if j <= i { 1.0 } else { 0.0 });
        d += link_inertia(p, i) * w * w.transpose();
    }
    d
}

pub fn kinetic_energy(theta: &Vector3<f64>, theta_dot: &Vector3<f64>, p: &FingerParams) -> f64 {
    0.5 * theta_dot.dot(&(mass_matrix(theta, p) * theta_dot))
}

/// Five-point central difference of `f` at 0.
pub fn diff5<T>(f: impl Fn(f64) -> T, h: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    (f(-2.0 * h) - f(2.0 * h) + (f(h) - f(-h)) * 8.0) * (1.0 / (12.0 * h))
}

/// `Ḋ` along the motion.
pub fn mass_matrix_rate(theta: &Vector3<f64>, theta_dot: &Vector3<f64>, p: &FingerParams) -> Matrix3<f64> {
    let h = 1e-3 / theta_dot.norm().max(1.0);
    diff5(|s| mass_matrix(&(theta + s * theta_dot), p), h)
}

/// Velocity-product torques `Ḋ·θ̇ − ½·∂(θ̇ᵀDθ̇)/∂θ`.
pub fn coriolis_vector(theta: &Vector3<f64>, theta_dot: &Vector3<f64>, p: &FingerParams) -> Vector3<f64> {
    let grad = Vector3::from_fn(|k, _| {
        diff5(
            |s| {
                let mut q = *theta;
                q[k] += s;
                theta_dot.dot(&(mass_matrix(&q, p) * theta_dot))
            },
            1e-3,
        )
    });
    mass_matrix_rate(theta, theta_dot, p) * theta_dot - 0.5 * grad
}

/// Joint accelerations and multipliers of the constrained system
/// `D·θ̈ + c = τ + Aᵀ·λ`, `A·θ̈ = 0`.
pub fn constrained_acceleration(
    theta: &Vector3<f64>,
    theta_dot: &Vector3<f64>,
    tau: &Vector3<f64>,
    p: &FingerParams,
) -> (Vector3<f64>, Vector2<f64>) {
    let d = mass_matrix(theta, p);
    let a = constraint_matrix();
    let mut k = Matrix5::zeros();
    k.fixed_view_mut::<3, 3>(0, 0).copy_from(&d);
    k.fixed_view_mut::<3, 2>(0, 3).copy_from(&(-a.transpose()));
    k.fixed_view_mut::<2, 3>(3, 0).copy_from(&a);
    let rhs_top = tau - coriolis_vector(theta, theta_dot, p);
    let rhs = Vector5::new(rhs_top[0], rhs_top[1], rhs_top[2], 0.0, 0.0);
    let sol = k.lu().solve(&rhs).expect("saddle-point system is regular");
    (Vector3::new(sol[0], sol[1], sol[2]), Vector2::new(sol[3], sol[4]))
}

/// Proximal acceleration with actuator torque `tau1` on joint 1 and a
/// contact force `f_e` pushing the fingertip back along `-normal`.
pub fn plant_acceleration(
    theta1: f64,
    theta1_dot: f64,
    tau1: f64,
    f_e: f64,
    normal: &Vector2<f64>,
    p: &FingerParams,
) -> f64 {
    let theta = expand(theta1);
    let theta_dot = expand(theta1_dot);
    let tau = Vector3::new(tau1, 0.0, 0.0) - tip_jacobian(&theta, p).transpose() * normal * f_e;
    constrained_acceleration(&theta, &theta_dot, &tau, p).0[0]
}

/// Removes the component of `x` violating `A·x = 0`.
pub fn project(x: &Vector3<f64>) -> Vector3<f64> {
    let a = constraint_matrix();
    let aat = a * a.transpose();
    x - a.transpose() * aat.try_inverse().expect("A has full row rank") * (a * x)
}

/// Integrates the full three-joint constrained system with RK4 and
/// projects position and velocity back onto the constraint after each step.
/// Returns θ₁ after every step.
pub fn simulate_constrained(
    theta1: f64,
    theta1_dot: f64,
    torque: impl Fn(f64) -> f64,
    p: &FingerParams,
    dt: f64,
    steps: usize,
) -> Vec<f64> {
    let mut q = expand(theta1);
    let mut qd = expand(theta1_dot);
    let acc = |t: f64, q: &Vector3<f64>, qd: &Vector3<f64>| {
        constrained_acceleration(q, qd, &Vector3::new(torque(t), 0.0, 0.0), p).0
    };
    let mut out = Vec::with_capacity(steps);
    for n in 0..steps {
        let t = n as f64 * dt;
        let (k1q, k1v) = (qd, acc(t, &q, &qd));
        let (k2q, k2v) = (qd + 0.5 * dt * k1v, acc(t + 0.5 * dt, &(q + 0.5 * dt * k1q), &(qd + 0.5 * dt * k1v)));
        let (k3q, k3v) = (qd + 0.5 * dt * k2v, acc(t + 0.5 * dt, &(q + 0.5 * dt * k2q), &(qd + 0.5 * dt * k2v)));
        let (k4q, k4v) = (qd + dt * k3v, acc(t + dt, &(q + dt * k3q), &(qd + dt * k3v)));
        q = project(&(q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)));
        qd = project(&(qd + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)));
        out.push(q[0]);
    }
    out
}

/// Seeded random joint states, angles in [-π, π), rates in [-5, 5).
pub fn random_states(seed: u64, n: usize) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|_| {
            let q = Vector3::from_fn(|_, _| rng.random_range(-pi..pi));
            let qd = Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0));
            (q, qd)
        })
        .collect()
}

/// First instant from which `within` holds for `hold` seconds without a
/// break. Scans run lengths backwards from each candidate start.
pub fn settled_at(ts: &[f64], within: &[bool], hold: f64) -> Option<f64> {
    let n = ts.len();
    let mut run_end = vec![f64::NEG_INFINITY; n];
    let mut i = n;
    while i > 0 {
        i -= 1;
        if within[i] {
            run_end[i] = if i + 1 < n && within[i + 1] { run_end[i + 1] } else { ts[i] };
        }
    }
    (0..n).find(|&i| within[i] && (i == 0 || !within[i - 1]) && run_end[i] - ts[i] >= hold - 1e-9).map(|i| ts[i])
}

/// Trace columns parsed straight from CSV text, without the library reader.
pub struct Columns {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Columns {
    pub fn parse(text: &str) -> Columns {
        let mut lines = text.lines();
        let header = lines.next().expect("header").split(',').map(str::to_owned).collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(|x| x.parse::<f64>().expect("numeric field")).collect())
            .collect();
        Columns { header, rows }
    }

    pub fn col(&self, name: &str) -> Vec<f64> {
        let j = self.header.iter().position(|h| h == name).expect("known column");
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Target error-dynamics residual `M·ë + B·ė + K_eff·e − w·(τ_c − τ_d)` on
/// every row of a noise-free trace. The commanded torque comes from the
/// library controller; the resulting acceleration comes from the constrained
/// three-joint oracle.
pub fn error_dynamics_residuals(scenario: &Scenario, trace: &Trace, dt: f64) -> Vec<f64> {
    let reference = scenario.absolute_reference().expect("valid scenario");
    let normal = scenario.contact.as_ref().map_or(Vector2::new(0.0, 1.0), |c| c.normal);
    let p = &scenario.finger;
    let imp = &scenario.impedance;
    trace
        .rows
        .iter()
        .map(|r| {
            let k = (r.t / dt).round() as u64;
            let theta_ref = reference.value_at_step(k, dt);
            let h = normal.dot(&(tip_jacobian(&expand(r.theta1), p) * constraint_l()));
            let state = ReducedState::new(r.theta1, r.theta1_dot);
            let targets = ControlTargets { theta1_ref: theta_ref, tau_d: r.tau_d, ..Default::default() };
            let u = control_input(&state, &targets, r.tau_c, imp, r.phase, h).expect("second-order law");
            let tau = control_torque(&state, u, r.tau_c, p);
            let theta1_ddot = plant_acceleration(r.theta1, r.theta1_dot, tau, r.f_e, &normal, p);

            let (e, e_dot, e_ddot) = (theta_ref - r.theta1, -r.theta1_dot, -theta1_ddot);
            let (k_eff, tau_d) = match r.phase {
                ControlPhase::FreeSpace => (imp.k, 0.0),
                ControlPhase::Contact => (0.0, r.tau_d),
            };
            let w = match imp.frame {
                ImpedanceFrame::Joint => 1.0,
                ImpedanceFrame::ContactNormal => 1.0 / (h * h),
            };
            let torque_term = if r.tau_c == tau_d { 0.0 } else { w * (r.tau_c - tau_d) };
            imp.m * e_ddot + imp.b * e_dot + k_eff * e - torque_term
        })
        .collect()
}

/// Null-space map written out: θ̇ = L·θ̇₁.
pub fn constraint_l() -> Vector3<f64> {
    Vector3::new(1.0, 1.25, 1.0 / 1.2)
}

/// Summary metrics recomputed from CSV columns: worst steady-state force
/// error, per-event `(settling time, max |v|)`, and final `m̂` per mass
/// segment. Bands: 2% of the step for references, 0.02 N for force,
/// 1e-3 m/s for slip; hold 0.2 s.
pub struct Recomputed {
    pub steady_state_force_error: f64,
    pub events: Vec<(Option<f64>, f64)>,
    pub final_m_hat: Vec<f64>,
}

pub fn recompute_summary(cols: &Columns, events: &[ScenarioEvent]) -> Recomputed {
    let t = cols.col("t");
    let theta = cols.col("theta1");
    let f_err: Vec<f64> = cols.col("f_e").iter().zip(cols.col("f_d")).map(|(a, b)| (a - b).abs()).collect();
    let v = cols.col("v");
    let m_hat = cols.col("m_hat");
    let idx = |from: f64, to: f64| -> Vec<usize> { (0..t.len()).filter(|&i| t[i] >= from && t[i] < to).collect() };

    let mut cuts = vec![0.0];
    for e in events {
        if *cuts.last().unwrap() != e.time {
            cuts.push(e.time);
        }
    }
    cuts.push(f64::INFINITY);
    let mut sse: f64 = 0.0;
    for w in cuts.windows(2) {
        let seg = idx(w[0], w[1]);
        if let Some(&last) = seg.last() {
            let tail: Vec<f64> = seg.iter().filter(|&&i| t[i] >= t[last] - 0.2).map(|&i| f_err[i]).collect();
            sse = sse.max(tail.iter().sum::<f64>() / tail.len() as f64);
        }
    }

    let mut per_event = Vec::new();
    for (n, e) in events.iter().enumerate() {
        let next = events[n + 1..].iter().map(|x| x.time).find(|&x| x > e.time).unwrap_or(f64::INFINITY);
        let seg = idx(e.time, next);
        let ts: Vec<f64> = seg.iter().map(|&i| t[i]).collect();
        let within: Vec<bool> = seg
            .iter()
            .map(|&i| match e.kind {
                EventKind::Reference { target, step } => (theta[i] - target).abs() <= 0.02 * step.abs(),
                EventKind::Force { .. } => f_err[i] < 0.02,
                EventKind::Mass { .. } => v[i].abs() < 1e-3,
            })
            .collect();
        let settle = settled_at(&ts, &within, 0.2).map(|s| s - e.time);
        let vmax = seg.iter().map(|&i| v[i].abs()).fold(0.0, f64::max);
        per_event.push((settle, vmax));
    }

    let mut mass_cuts: Vec<f64> = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Mass { .. }) && e.time <= *t.last().unwrap())
        .map(|e| e.time)
        .collect();
    mass_cuts.push(f64::INFINITY);
    let final_m_hat =
        mass_cuts.iter().filter_map(|&c| (0..t.len()).rev().find(|&i| t[i] < c).map(|i| m_hat[i])).collect();

    Recomputed { steady_state_force_error: sse, events: per_event, final_m_hat }
}
