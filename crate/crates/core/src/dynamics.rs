//! Cart with an n-link chain of point-mass pendula.
//!
//! Each link is a massless rod of length `l_i` carrying a point mass `m_i`
//! at its tip. Generalized coordinates are `q = [x, θ_1..θ_n]` with every
//! angle measured from the upright position (θ = 0 is the unstable
//! equilibrium). States are stored flat as `[q; q̇]`.
//!
//! Two forms of the equations of motion are exposed:
//!
//! * the Lagrangian form `H(q) q̈ = Q(q, q̇, u)` with a symmetric inertia
//!   matrix ([`inertia_matrix`], [`generalized_forces`]);
//! * the row-scaled form `A q̈ = B + C` where every link row is divided by
//!   its length ([`mass_matrix`], [`forcing`]). For a single link this is
//!   `[[m+M, ml cosθ], [m cosθ, ml]]`.
//!
//! Both produce the same accelerations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub cart_mass: f64,
    pub link_masses: Vec<f64>,
    pub link_lengths: Vec<f64>,
    pub gravity: f64,
}

impl SystemParams {
    pub fn new(cart_mass: f64, link_masses: Vec<f64>, link_lengths: Vec<f64>) -> Result<Self> {
        let params = SystemParams {
            cart_mass,
            link_masses,
            link_lengths,
            gravity: STANDARD_GRAVITY,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gravity(mut self, gravity: f64) -> Result<Self> {
        self.gravity = gravity;
        self.validate()?;
        Ok(self)
    }

    /// Single pole: M = 5 kg, m = 1 kg, l = 2 m.
    pub fn cartpole() -> Self {
        Self::multi_link(1)
    }

    /// `n` equal links sharing a total bob mass of 1 kg and a total length of
    /// 2 m on a 5 kg cart (the DPC/TPC/4lPC configurations).
    pub fn multi_link(n: usize) -> Self {
        assert!(n >= 1, "at least one link");
        let m = 1.0 / n as f64;
        let l = 2.0 / n as f64;
        SystemParams {
            cart_mass: 5.0,
            link_masses: vec![m; n],
            link_lengths: vec![l; n],
            gravity: STANDARD_GRAVITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.link_masses.is_empty() {
            return Err(invalid("n_links", "need at least one link"));
        }
        if self.link_masses.len() != self.link_lengths.len() {
            return Err(Error::Dimension {
                expected: self.link_masses.len(),
                got: self.link_lengths.len(),
            });
        }
        if !(self.cart_mass > 0.0 && self.cart_mass.is_finite()) {
            return Err(invalid(
                "cart_mass",
                format!("must be > 0, got {}", self.cart_mass),
            ));
        }
        if let Some(m) = self
            .link_masses
            .iter()
            .find(|m| !(**m > 0.0 && m.is_finite()))
        {
            return Err(invalid("link_masses", format!("must be > 0, got {m}")));
        }
        if let Some(l) = self
            .link_lengths
            .iter()
            .find(|l| !(**l > 0.0 && l.is_finite()))
        {
            return Err(invalid("link_lengths", format!("must be > 0, got {l}")));
        }
        if !self.gravity.is_finite() {
            return Err(invalid("gravity", "must be finite"));
        }
        Ok(())
    }

    pub fn n_links(&self) -> usize {
        self.link_masses.len()
    }

    /// Degrees of freedom, `n + 1`.
    pub fn dof(&self) -> usize {
        self.n_links() + 1
    }

    pub fn state_dim(&self) -> usize {
        2 * self.dof()
    }

    pub fn total_link_mass(&self) -> f64 {
        self.link_masses.iter().sum()
    }

    /// Σ_{k ≥ i} m_k, the mass carried by link `i` and everything above it.
    fn tail_masses(&self) -> Vec<f64> {
        let mut tail = vec![0.0; self.n_links()];
        let mut acc = 0.0;
        for i in (0..self.n_links()).rev() {
            acc += self.link_masses[i];
            tail[i] = acc;
        }
        tail
    }
}

/// Flat state `[x, θ_1..θ_n, ẋ, θ̇_1..θ̇_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec(DVector<f64>);

impl StateVec {
    pub fn zeros(n_links: usize) -> Self {
        StateVec(DVector::zeros(2 * (n_links + 1)))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        StateVec(DVector::from_vec(values))
    }

    /// At rest with the cart at the origin and the given link angles.
    pub fn from_angles(angles: &[f64]) -> Self {
        let mut s = Self::zeros(angles.len());
        for (i, a) in angles.iter().enumerate() {
            s.0[1 + i] = *a;
        }
        s
    }

    pub fn n_links(&self) -> usize {
        self.0.len() / 2 - 1
    }

    pub fn dof(&self) -> usize {
        self.0.len() / 2
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn positions(&self) -> &[f64] {
        &self.0.as_slice()[..self.dof()]
    }

    pub fn velocities(&self) -> &[f64] {
        &self.0.as_slice()[self.dof()..]
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn x_dot(&self) -> f64 {
        self.0[self.dof()]
    }

    /// Angle of link `i` (0-based).
    pub fn theta(&self, i: usize) -> f64 {
        self.0[1 + i]
    }

    pub fn theta_dot(&self, i: usize) -> f64 {
        self.0[self.dof() + 1 + i]
    }

    pub fn angles(&self) -> &[f64] {
        &self.0.as_slice()[1..self.dof()]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    fn axpy(&self, h: f64, d: &DVector<f64>) -> StateVec {
        StateVec(&self.0 + d * h)
    }
}

impl From<DVector<f64>> for StateVec {
    fn from(v: DVector<f64>) -> Self {
        StateVec(v)
    }
}

/// Index permutation from the library layout to the interleaved layout
/// `[x, ẋ, θ_1, θ̇_1, ...]` (for one link: `[x, ẋ, θ, θ̇]`).
/// `interleaved[k] = state[perm[k]]`.
pub fn interleaved_order(n_links: usize) -> Vec<usize> {
    let dof = n_links + 1;
    (0..dof).flat_map(|i| [i, dof + i]).collect()
}

pub fn to_interleaved(state: &StateVec) -> Vec<f64> {
    interleaved_order(state.n_links())
        .into_iter()
        .map(|i| state.as_slice()[i])
        .collect()
}

/// Angle measured from the hanging-down position, for reports that follow
/// the θ = π upright convention.
pub fn hanging_reference_angle(theta: f64) -> f64 {
    theta + std::f64::consts::PI
}

fn check_dims(params: &SystemParams, state: &StateVec) {
    assert_eq!(
        state.len(),
        params.state_dim(),
        "state length does not match plant ({} links)",
        params.n_links()
    );
}

/// Symmetric inertia matrix `∂²T/∂q̇²`.
pub fn inertia_matrix(params: &SystemParams, state: &StateVec) -> DMatrix<f64> {
    check_dims(params, state);
    let n = params.n_links();
    let tail = params.tail_masses();
    let l = &params.link_lengths;
    let th = state.angles();
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = params.cart_mass + params.total_link_mass();
    for j in 0..n {
        let v = tail[j] * l[j] * th[j].cos();
        h[(0, j + 1)] = v;
        h[(j + 1, 0)] = v;
        for i in 0..n {
            h[(i + 1, j + 1)] = tail[i.max(j)] * l[i] * l[j] * (th[i] - th[j]).cos();
        }
    }
    h
}

/// Right-hand side of the Lagrangian equations: input, velocity-product and
/// gravity terms.
pub fn generalized_forces(params: &SystemParams, state: &StateVec, u: f64) -> DVector<f64> {
    check_dims(params, state);
    let n = params.n_links();
    let tail = params.tail_masses();
    let l = &params.link_lengths;
    let g = params.gravity;
    let th = state.angles();
    let thd = &state.velocities()[1..];
    let mut f = DVector::zeros(n + 1);
    f[0] = u;
    for j in 0..n {
        f[0] += tail[j] * l[j] * th[j].sin() * thd[j] * thd[j];
    }
    for i in 0..n {
        let mut fi = tail[i] * g * l[i] * th[i].sin();
        for j in 0..n {
            fi -= tail[i.max(j)] * l[i] * l[j] * (th[i] - th[j]).sin() * thd[j] * thd[j];
        }
        f[i + 1] = fi;
    }
    f
}

fn row_scale(params: &SystemParams) -> DVector<f64> {
    let mut s = DVector::from_element(params.dof(), 1.0);
    for (i, l) in params.link_lengths.iter().enumerate() {
        s[i + 1] = 1.0 / l;
    }
    s
}

/// Row-scaled inertia matrix; link row `i` is divided by `l_i`.
/// Entry (0,0) is `M + Σ m_i`; link entries are `[Σ_{k≥max(i,j)} m_k] l_j cos(θ_i − θ_j)`.
pub fn mass_matrix(params: &SystemParams, state: &StateVec) -> DMatrix<f64> {
    let mut h = inertia_matrix(params, state);
    let s = row_scale(params);
    for (i, si) in s.iter().enumerate() {
        h.row_mut(i).scale_mut(*si);
    }
    h
}

/// Right-hand side matching [`mass_matrix`].
pub fn forcing(params: &SystemParams, state: &StateVec, u: f64) -> DVector<f64> {
    generalized_forces(params, state, u).component_mul(&row_scale(params))
}

/// Generalized accelerations `q̈`.
pub fn accel(params: &SystemParams, state: &StateVec, u: f64) -> Result<DVector<f64>> {
    let a = mass_matrix(params, state);
    let b = forcing(params, state, u);
    let qdd = a
        .lu()
        .solve(&b)
        .ok_or(Error::Singular("mass matrix (nonphysical parameters?)"))?;
    if qdd.iter().all(|v| v.is_finite()) {
        Ok(qdd)
    } else {
        Err(Error::Singular(
            "mass matrix produced non-finite accelerations",
        ))
    }
}

/// Time derivative of the flat state, `[q̇; q̈]`.
pub fn state_derivative(params: &SystemParams, state: &StateVec, u: f64) -> Result<DVector<f64>> {
    let dof = params.dof();
    let qdd = accel(params, state, u)?;
    let mut d = DVector::zeros(2 * dof);
    d.rows_mut(0, dof).copy_from_slice(state.velocities());
    d.rows_mut(dof, dof).copy_from(&qdd);
    Ok(d)
}

/// Classical RK4 with `u` held over the step.
pub fn rk4_step(params: &SystemParams, state: &StateVec, u: f64, dt: f64) -> Result<StateVec> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    let k1 = state_derivative(params, state, u)?;
    let k2 = state_derivative(params, &state.axpy(0.5 * dt, &k1), u)?;
    let k3 = state_derivative(params, &state.axpy(0.5 * dt, &k2), u)?;
    let k4 = state_derivative(params, &state.axpy(dt, &k3), u)?;
    let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    Ok(StateVec(&state.0 + incr))
}

/// Kinetic plus gravitational potential energy; zero at the upright rest state.
pub fn total_energy(params: &SystemParams, state: &StateVec) -> f64 {
    let h = inertia_matrix(params, state);
    let qd = DVector::from_column_slice(state.velocities());
    let kinetic = 0.5 * qd.dot(&(&h * &qd));
    let tail = params.tail_masses();
    let potential: f64 = state
        .angles()
        .iter()
        .enumerate()
        .map(|(j, th)| tail[j] * params.gravity * params.link_lengths[j] * (th.cos() - 1.0))
        .sum();
    kinetic + potential
}

/// Linearized state-space model `ẋ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl LinearModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a.ncols(),
            });
        }
        if b.nrows() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.nrows(),
            });
        }
        let m = b.ncols();
        Ok(LinearModel {
            c: DMatrix::identity(n, n),
            d: DMatrix::zeros(n, m),
            a,
            b,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

/// Jacobian linearization at the upright equilibrium with zero input,
/// assembled from the small-angle inertia matrix and gravity stiffness.
pub fn linearize(params: &SystemParams) -> LinearModel {
    let n = params.n_links();
    let dof = n + 1;
    let zero = StateVec::zeros(n);
    let h0 = inertia_matrix(params, &zero);
    let tail = params.tail_masses();
    let mut stiffness = DMatrix::zeros(dof, dof);
    for i in 0..n {
        stiffness[(i + 1, i + 1)] = tail[i] * params.gravity * params.link_lengths[i];
    }
    let mut unit = DVector::zeros(dof);
    unit[0] = 1.0;
    // H0 is symmetric positive definite for physical parameters.
    let chol = h0
        .cholesky()
        .expect("upright inertia matrix is positive definite for valid params");
    let lower = chol.solve(&stiffness);
    let b_lower = chol.solve(&unit);

    let mut a = DMatrix::zeros(2 * dof, 2 * dof);
    for i in 0..dof {
        a[(i, dof + i)] = 1.0;
    }
    a.view_mut((dof, 0), (dof, dof)).copy_from(&lower);
    let mut b = DMatrix::zeros(2 * dof, 1);
    b.view_mut((dof, 0), (dof, 1)).copy_from(&b_lower);
    LinearModel::new(a, b).expect("dimensions are consistent by construction")
}
