//! Continuous-time LQR via integration of the Riccati differential equation.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::control::SimTrace;
use crate::dynamics::{LinearModel, StateVec};
use crate::error::{invalid, Error, Result};

/// Multi-link weights, shared by every link count: cart position and
/// velocity, each angle, each angular rate, and R.
pub const MULTI_LINK_CART_WEIGHT: f64 = 1e4;
pub const MULTI_LINK_ANGLE_WEIGHT: f64 = 1e5;
pub const MULTI_LINK_RATE_WEIGHT: f64 = 100.0;
pub const MULTI_LINK_R: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LqrWeights {
    q: DMatrix<f64>,
    r: f64,
}

impl LqrWeights {
    pub fn new(q: DMatrix<f64>, r: f64) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::Dimension {
                expected: q.nrows(),
                got: q.ncols(),
            });
        }
        if (&q - q.transpose()).amax() > 1e-12 {
            return Err(invalid("Q", "must be symmetric"));
        }
        if q.diagonal().iter().any(|d| !(*d >= 0.0)) {
            return Err(invalid("Q", "diagonal entries must be >= 0"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be > 0, got {r}")));
        }
        Ok(LqrWeights { q, r })
    }

    pub fn diagonal(diag: &[f64], r: f64) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)), r)
    }

    /// Diagonal weights built from per-role entries in the library layout:
    /// cart position, each angle, cart velocity, each angular rate.
    pub fn by_role(
        n_links: usize,
        x: f64,
        theta: f64,
        x_dot: f64,
        theta_dot: f64,
        r: f64,
    ) -> Result<Self> {
        let mut d = Vec::with_capacity(2 * n_links + 2);
        d.push(x);
        d.extend(std::iter::repeat_n(theta, n_links));
        d.push(x_dot);
        d.extend(std::iter::repeat_n(theta_dot, n_links));
        Self::diagonal(&d, r)
    }

    /// Multi-link experiment weights. Heavy cart terms make the slow cart
    /// mode decay well inside the 20 s contraction check for every plant.
    pub fn multi_link(n_links: usize) -> Self {
        Self::by_role(
            n_links,
            MULTI_LINK_CART_WEIGHT,
            MULTI_LINK_ANGLE_WEIGHT,
            MULTI_LINK_CART_WEIGHT,
            MULTI_LINK_RATE_WEIGHT,
            MULTI_LINK_R,
        )
        .expect("valid constants")
    }

    /// Cartpole ensemble weights. Gives angle and angle-rate gains near
    /// 178 and 76 with the lightest control effort that still passes the
    /// contraction check.
    pub fn cartpole_ensemble() -> Self {
        Self::by_role(1, 150.0, 1e4, 300.0, 1e3, 30.0).expect("valid constants")
    }

    /// Two-neuron cartpole weights: 1 on cart states, 10 on angle states, R = 1e-4.
    pub fn two_neuron_cartpole() -> Self {
        Self::by_role(1, 1.0, 10.0, 1.0, 10.0, 1e-4).expect("valid constants")
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.q * factor, self.r * factor)
    }
}

/// State-feedback row `K`; the control law is `u = −K·X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector(pub Vec<f64>);

impl GainVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `K·X`.
    pub fn dot(&self, state: &StateVec) -> f64 {
        assert_eq!(self.len(), state.len(), "gain/state dimension mismatch");
        self.0
            .iter()
            .zip(state.as_slice())
            .map(|(k, x)| k * x)
            .sum()
    }

    /// `u = −K·X`.
    pub fn control(&self, state: &StateVec) -> f64 {
        -self.dot(state)
    }

    fn row(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, self.len(), &self.0)
    }
}

/// `[B, AB, …, A^{n−1}B]` with its numerical rank.
pub fn controllability_matrix(model: &LinearModel) -> (DMatrix<f64>, usize) {
    let n = model.state_dim();
    let m = model.input_dim();
    let mut c = DMatrix::zeros(n, n * m);
    let mut block = model.b.clone();
    for k in 0..n {
        c.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = &model.a * block;
    }
    let rank = numerical_rank(&c);
    (c, rank)
}

/// Rank by full-pivot Gaussian elimination; pivots below 1e-9 of the largest
/// pivot count as zero. Columns are normalized first because powers of `A`
/// spread column magnitudes over many decades.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let mut w = m.clone();
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let (rows, cols) = w.shape();
    let mut largest: f64 = 0.0;
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0f64);
        for i in step..rows {
            for j in step..cols {
                if w[(i, j)].abs() > best.2 {
                    best = (i, j, w[(i, j)].abs());
                }
            }
        }
        if step == 0 {
            largest = best.2;
        }
        if largest == 0.0 || best.2 <= 1e-9 * largest {
            break;
        }
        w.swap_rows(step, best.0);
        w.swap_columns(step, best.1);
        let pivot = w[(step, step)];
        for i in step + 1..rows {
            let f = w[(i, step)] / pivot;
            if f != 0.0 {
                for j in step..cols {
                    let v = w[(step, j)];
                    w[(i, j)] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `AᵀP + PA − P B R⁻¹ Bᵀ P + Q`.
pub fn care_residual(model: &LinearModel, weights: &LqrWeights, p: &DMatrix<f64>) -> DMatrix<f64> {
    let pb = p * &model.b;
    model.a.transpose() * p + p * &model.a - &pb * pb.transpose() / weights.r + &weights.q
}

/// Integration statistics from [`solve_care_with_stats`].
#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub p: DMatrix<f64>,
    pub residual: f64,
    pub steps: usize,
    pub horizon: f64,
}

const MAX_RICCATI_STEPS: usize = 2_000_000;

/// Stabilizing solution of the continuous algebraic Riccati equation.
pub fn solve_care(model: &LinearModel, weights: &LqrWeights) -> Result<DMatrix<f64>> {
    solve_care_with_stats(model, weights).map(|s| s.p)
}

pub fn solve_care_with_stats(model: &LinearModel, weights: &LqrWeights) -> Result<CareSolution> {
    let n = model.state_dim();
    if weights.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: weights.dim(),
        });
    }
    if model.input_dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: model.input_dim(),
        });
    }
    let (_, rank) = controllability_matrix(model);
    if rank < n {
        return Err(Error::Uncontrollable { rank, dim: n });
    }

    let q_norm = weights.q.norm();
    let residual_target = 1e-8 * q_norm;
    let rhs = |p: &DMatrix<f64>| care_residual(model, weights, p);
    let rk4 = |p: &DMatrix<f64>, h: f64| {
        let k1 = rhs(p);
        let k2 = rhs(&(p + &k1 * (0.5 * h)));
        let k3 = rhs(&(p + &k2 * (0.5 * h)));
        let k4 = rhs(&(p + &k3 * h));
        let next = p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        (&next + next.transpose()) * 0.5
    };

    // Only the fixed point matters. The tolerance is relative to the size of
    // the step increment, which keeps the step inside the RK4 stability
    // region all the way down to the residual floor.
    let mut h = 1e-3 * (1.0 / model.a.norm().max(1e-3) + 1.0);
    let mut p = DMatrix::zeros(n, n);
    let mut tau = 0.0;
    let mut residual = rhs(&p).norm();
    for steps in 1..=MAX_RICCATI_STEPS {
        let full = rk4(&p, h);
        let halves = rk4(&rk4(&p, 0.5 * h), 0.5 * h);
        let err = (&full - &halves).norm() / 15.0;
        let tol = (1e-3 * h * residual).max(1e-14 * halves.norm());
        if !err.is_finite() || err > tol {
            h *= 0.5;
            if h < 1e-14 {
                break;
            }
            continue;
        }
        p = halves;
        tau += h;
        let growth = if err == 0.0 {
            2.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.5, 2.0)
        };
        h *= growth;

        residual = rhs(&p).norm();
        let converged = residual <= 1e-10 * p.norm().max(1.0) && residual <= residual_target;
        if converged {
            return Ok(CareSolution {
                p,
                residual,
                steps,
                horizon: tau,
            });
        }
    }
    Err(Error::NoConvergence {
        steps: MAX_RICCATI_STEPS,
        residual,
    })
}

/// `K = R⁻¹ Bᵀ P`.
pub fn lqr_gain(model: &LinearModel, weights: &LqrWeights) -> Result<GainVector> {
    let p = solve_care(model, weights)?;
    Ok(gain_from_riccati(model, weights, &p))
}

pub fn gain_from_riccati(
    model: &LinearModel,
    weights: &LqrWeights,
    p: &DMatrix<f64>,
) -> GainVector {
    let k = model.b.transpose() * p / weights.r;
    GainVector(k.row(0).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// Largest ‖x(horizon)‖ over the sampled unit initial states.
    pub worst_final_norm: f64,
    pub passed: bool,
}

/// Empirical stability check: simulate `ẋ = (A − BK)x` from 20 random unit
/// initial states for 20 s at dt = 1e-3 and require ‖x‖ < 1e-3 at the end.
pub fn contraction_check(model: &LinearModel, k: &GainVector, seed: u64) -> ContractionReport {
    let n = model.state_dim();
    let acl = &model.a - &model.b * k.row();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1e-3;
    let steps = 20_000;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        x /= x.norm();
        for _ in 0..steps {
            let k1 = &acl * &x;
            let k2 = &acl * (&x + &k1 * (0.5 * dt));
            let k3 = &acl * (&x + &k2 * (0.5 * dt));
            let k4 = &acl * (&x + &k3 * dt);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        let norm = x.norm();
        worst = if norm.is_finite() {
            worst.max(norm)
        } else {
            f64::INFINITY
        };
    }
    ContractionReport {
        worst_final_norm: worst,
        passed: worst < 1e-3,
    }
}

/// Trapezoidal `∫ XᵀQX + u R u dt` over recorded samples.
pub fn quadratic_cost_samples(
    times: &[f64],
    states: &[StateVec],
    controls: &[f64],
    weights: &LqrWeights,
) -> f64 {
    assert!(
        times.len() == states.len() && states.len() == controls.len(),
        "trace columns must have equal length"
    );
    let integrand: Vec<f64> = states
        .iter()
        .zip(controls)
        .map(|(s, u)| {
            let x = s.as_vector();
            x.dot(&(&weights.q * x)) + u * weights.r * u
        })
        .collect();
    times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

pub fn quadratic_cost(trace: &SimTrace, weights: &LqrWeights) -> f64 {
    quadratic_cost_samples(&trace.times, &trace.states, &trace.controls, weights)
}
