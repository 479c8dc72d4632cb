//! Kinematics and rigid-body dynamics of the three-link planar finger.
//!
//! Joint angles are relative: link `i` points along the cumulative angle
//! `θ₁ + … + θᵢ`. The two holonomic couplings `θ₁ = (4/5)θ₂` and
//! `θ₁ = (6/5)θ₃` leave a single generalized coordinate, the proximal angle
//! `θ₁`, and [`reduce_dynamics`] contracts the 3×3 model onto it.
//!
//! Gravity is not modelled on the links: the finger moves in a horizontal
//! plane.

use nalgebra::{Matrix2x3, Matrix3, RowVector3, Vector2, Vector3};

use crate::error::{require, ParamError};

/// How link mass is distributed along each phalanx.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InertiaModel {
    /// Slender rod: centre of mass at mid-length, `I = m·l²/12` about it.
    #[default]
    UniformRod,
    /// All of the link mass concentrated at the distal end of the link.
    PointMassAtTip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerParams {
    /// Link lengths in m (proximal, middle, distal).
    pub lengths: [f64; 3],
    /// Link masses in kg.
    pub masses: [f64; 3],
    pub inertia_model: InertiaModel,
}

impl FingerParams {
    pub fn new(lengths: [f64; 3], masses: [f64; 3], inertia_model: InertiaModel) -> Result<Self, ParamError> {
        let p = FingerParams { lengths, masses, inertia_model };
        p.validate()?;
        Ok(p)
    }

    /// Human-scale finger: 40/30/20 mm phalanges weighing 6.9580/5.2185/3.4790 g.
    pub fn human_index() -> Self {
        FingerParams {
            lengths: [0.040, 0.030, 0.020],
            masses: [6.9580e-3, 5.2185e-3, 3.4790e-3],
            inertia_model: InertiaModel::UniformRod,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for &l in &self.lengths {
            require(l > 0.0 && l.is_finite(), "link length", "must be positive", l)?;
        }
        for &m in &self.masses {
            require(m > 0.0 && m.is_finite(), "link mass", "must be positive", m)?;
        }
        Ok(())
    }

    /// Distance from a link's proximal joint to its centre of mass.
    fn com_offset(&self, link: usize) -> f64 {
        match self.inertia_model {
            InertiaModel::UniformRod => 0.5 * self.lengths[link],
            InertiaModel::PointMassAtTip => self.lengths[link],
        }
    }

    /// Rotary inertia of a link about its own centre of mass.
    fn com_inertia(&self, link: usize) -> f64 {
        match self.inertia_model {
            InertiaModel::UniformRod => self.masses[link] * self.lengths[link].powi(2) / 12.0,
            InertiaModel::PointMassAtTip => 0.0,
        }
    }
}

impl Default for FingerParams {
    fn default() -> Self {
        Self::human_index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub theta: Vector3<f64>,
    pub theta_dot: Vector3<f64>,
}

/// State on the constraint manifold, parameterized by the proximal joint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub theta1: f64,
    pub theta1_dot: f64,
}

impl ReducedState {
    pub fn new(theta1: f64, theta1_dot: f64) -> Self {
        ReducedState { theta1, theta1_dot }
    }

    /// Full joint state `(Lθ₁, Lθ̇₁)`.
    pub fn expand(&self) -> JointState {
        let l = constraint_maps().l;
        JointState { theta: l * self.theta1, theta_dot: l * self.theta1_dot }
    }
}

/// Velocity-level constraint matrix `A` (with `A·θ̇ = 0`) and its null-space
/// map `L` (with `θ = L·θ₁`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintMaps {
    pub a: Matrix2x3<f64>,
    pub l: Vector3<f64>,
}

pub fn constraint_maps() -> ConstraintMaps {
    ConstraintMaps {
        a: Matrix2x3::new(1.0, -4.0 / 5.0, 0.0, 1.0, 0.0, -6.0 / 5.0),
        l: Vector3::new(1.0, 5.0 / 4.0, 5.0 / 6.0),
    }
}

/// Scalar inertia and Coriolis coefficient of the reduced equation
/// `D'θ̈₁ + C'θ̇₁ + τ_c = τ'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDynamics {
    pub d_prime: f64,
    pub c_prime: f64,
}

fn cumulative_angles(theta: &Vector3<f64>) -> [f64; 3] {
    let a1 = theta[0];
    let a2 = a1 + theta[1];
    [a1, a2, a2 + theta[2]]
}

pub fn forward_kinematics(theta: &Vector3<f64>, params: &FingerParams) -> Vector2<f64> {
    let phi = cumulative_angles(theta);
    (0..3).fold(Vector2::zeros(), |acc, m| acc + params.lengths[m] * Vector2::new(phi[m].cos(), phi[m].sin()))
}

/// Fingertip Jacobian `∂(x, y)/∂θ`.
#[allow(clippy::needless_range_loop)]
pub fn jacobian(theta: &Vector3<f64>, params: &FingerParams) -> Matrix2x3<f64> {
    let phi = cumulative_angles(theta);
    let mut j = Matrix2x3::zeros();
    for col in 0..3 {
        for m in col..3 {
            j[(0, col)] -= params.lengths[m] * phi[m].sin();
            j[(1, col)] += params.lengths[m] * phi[m].cos();
        }
    }
    j
}

/// Lever arm of link `m`'s direction vector in the centre-of-mass position of
/// link `link`.
fn com_arm(params: &FingerParams, link: usize, m: usize) -> f64 {
    if m < link {
        params.lengths[m]
    } else if m == link {
        params.com_offset(link)
    } else {
        0.0
    }
}

/// Translational Jacobian of the centre of mass of `link`.
#[allow(clippy::needless_range_loop)]
fn com_jacobian(phi: &[f64; 3], params: &FingerParams, link: usize) -> Matrix2x3<f64> {
    let mut j = Matrix2x3::zeros();
    for col in 0..=link {
        for m in col..=link {
            let r = com_arm(params, link, m);
            j[(0, col)] -= r * phi[m].sin();
            j[(1, col)] += r * phi[m].cos();
        }
    }
    j
}

/// `∂J_com/∂θ_k` for the centre of mass of `link`.
#[allow(clippy::needless_range_loop)]
fn com_jacobian_partial(phi: &[f64; 3], params: &FingerParams, link: usize, k: usize) -> Matrix2x3<f64> {
    let mut dj = Matrix2x3::zeros();
    if k > link {
        return dj;
    }
    for col in 0..=link {
        for m in col.max(k)..=link {
            let r = com_arm(params, link, m);
            dj[(0, col)] -= r * phi[m].cos();
            dj[(1, col)] -= r * phi[m].sin();
        }
    }
    dj
}

fn angular_jacobian(link: usize) -> RowVector3<f64> {
    RowVector3::from_fn(|_, c| if c <= link { 1.0 } else { 0.0 })
}

pub fn mass_matrix(theta: &Vector3<f64>, params: &FingerParams) -> Matrix3<f64> {
    let phi = cumulative_angles(theta);
    let d = (0..3).fold(Matrix3::zeros(), |acc, i| {
        let jv = com_jacobian(&phi, params, i);
        let jw = angular_jacobian(i);
        acc + params.masses[i] * jv.transpose() * jv + params.com_inertia(i) * jw.transpose() * jw
    });
    // exact symmetry; the products above can differ in the last bit
    (d + d.transpose()) * 0.5
}

/// `∂D/∂θ_k` for `k = 0, 1, 2`.
pub fn mass_matrix_partials(theta: &Vector3<f64>, params: &FingerParams) -> [Matrix3<f64>; 3] {
    let phi = cumulative_angles(theta);
    std::array::from_fn(|k| {
        (0..3).fold(Matrix3::zeros(), |acc, i| {
            let jv = com_jacobian(&phi, params, i);
            let djv = com_jacobian_partial(&phi, params, i, k);
            let sym = djv.transpose() * jv;
            acc + params.masses[i] * (sym + sym.transpose())
        })
    })
}

/// Coriolis/centripetal matrix from the Christoffel symbols of `D`, so that
/// `Ḋ − 2C` is skew-symmetric.
pub fn coriolis_matrix(theta: &Vector3<f64>, theta_dot: &Vector3<f64>, params: &FingerParams) -> Matrix3<f64> {
    let dd = mass_matrix_partials(theta, params);
    Matrix3::from_fn(|k, j| (0..3).map(|i| 0.5 * (dd[i][(k, j)] + dd[j][(k, i)] - dd[k][(i, j)]) * theta_dot[i]).sum())
}

pub fn kinetic_energy(theta: &Vector3<f64>, theta_dot: &Vector3<f64>, params: &FingerParams) -> f64 {
    0.5 * theta_dot.dot(&(mass_matrix(theta, params) * theta_dot))
}

pub fn reduce_dynamics(theta1: f64, theta1_dot: f64, params: &FingerParams) -> ReducedDynamics {
    let l = constraint_maps().l;
    let theta = l * theta1;
    let theta_dot = l * theta1_dot;
    let d = mass_matrix(&theta, params);
    let c = coriolis_matrix(&theta, &theta_dot, params);
    ReducedDynamics { d_prime: l.dot(&(d * l)), c_prime: l.dot(&(c * l)) }
}

/// Fingertip position as a function of the reduced coordinate.
pub fn reduced_fingertip(theta1: f64, params: &FingerParams) -> Vector2<f64> {
    forward_kinematics(&(constraint_maps().l * theta1), params)
}

/// `H = Lᵀ·J(Lθ₁)ᵀ·p`, mapping contact-force magnitude along `p` onto the
/// reduced coordinate.
pub fn coupling_scalar(theta1: f64, p: &Vector2<f64>, params: &FingerParams) -> Result<f64, ParamError> {
    let norm = p.norm();
    require((norm - 1.0).abs() <= 1e-9, "contact normal", "must have unit length", norm)?;
    Ok(coupling_unchecked(theta1, p, params))
}

pub(crate) fn coupling_unchecked(theta1: f64, p: &Vector2<f64>, params: &FingerParams) -> f64 {
    let l = constraint_maps().l;
    let j = jacobian(&(l * theta1), params);
    l.dot(&(j.transpose() * p))
}
