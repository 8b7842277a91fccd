//! Deterministic solver for one realization of the fixed-mass-spring bar:
//! linear hat-function FEM in space, cubic end-spring nonlinearity, Newmark
//! time integration.
//!
//! The bar is fixed at x = 0 and carries a lumped mass plus a linear and a
//! cubic spring at x = L. One realization draws an elastic modulus from the
//! gamma model and a white-noise forcing history, then solves the resulting
//! initial value problem.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{sample_gamma, sample_white_noise, GammaParams, TaskRng};

#[derive(Debug, Error, PartialEq)]
pub enum BarError {
    #[error("invalid bar config: {0}")]
    InvalidConfig(String),
    #[error("invalid elastic modulus: {0}")]
    InvalidModulus(f64),
    #[error("fixed-point iteration did not converge at step {step}")]
    NonConvergentStep { step: usize },
    #[error("singular system matrix")]
    SingularSystem,
}

/// Physical and discretization parameters for the bar problem.
///
/// Defaults are plausible steel-bar values; every field can be overridden
/// from the run config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarConfig {
    /// Mass density rho (kg/m^3).
    pub rho: f64,
    /// Cross-section area A (m^2).
    pub area: f64,
    /// Distributed damping coefficient c.
    pub damping_c: f64,
    /// Mean elastic modulus mu_E (Pa).
    pub e_mean: f64,
    /// Dispersion factor delta_E of the elastic modulus.
    pub e_delta: f64,
    /// Linear end-spring stiffness k (N/m).
    pub k_lin: f64,
    /// Cubic end-spring stiffness k_NL (N/m^3).
    pub k_nl: f64,
    /// Lumped tip mass m (kg).
    pub mass_tip: f64,
    /// Bar length L (m).
    pub length: f64,
    pub n_elements: usize,
    /// Final time T (s).
    pub t_final: f64,
    /// Time step dt (s).
    pub dt: f64,
    pub newmark_beta: f64,
    pub newmark_gamma: f64,
    /// Initial nodal displacement of the free DOFs; empty means zero.
    pub u0: Vec<f64>,
    /// Initial nodal velocity of the free DOFs; empty means zero.
    pub v0: Vec<f64>,
    /// Per-step standard deviation of the scalar white-noise forcing.
    pub force_amplitude: f64,
}

impl Default for BarConfig {
    fn default() -> Self {
        Self {
            rho: 7850.0,
            area: 6.25e-4,
            damping_c: 5.0,
            e_mean: 203e9,
            e_delta: 0.1,
            k_lin: 650.0,
            k_nl: 650e13,
            mass_tip: 1.2,
            length: 1.0,
            n_elements: 50,
            t_final: 8e-3,
            dt: 8e-3 / 1024.0,
            newmark_beta: 0.25,
            newmark_gamma: 0.5,
            u0: Vec::new(),
            v0: Vec::new(),
            force_amplitude: 1.0e3,
        }
    }
}

impl BarConfig {
    pub fn validate(&self) -> Result<(), BarError> {
        let positive = [
            ("rho", self.rho),
            ("area", self.area),
            ("e_mean", self.e_mean),
            ("e_delta", self.e_delta),
            ("length", self.length),
            ("t_final", self.t_final),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(BarError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.damping_c < 0.0
            || self.k_nl < 0.0
            || self.k_lin < 0.0
            || self.mass_tip < 0.0
            || self.force_amplitude < 0.0
        {
            return Err(BarError::InvalidConfig(
                "damping_c, k_nl, k_lin, mass_tip and force_amplitude must be non-negative".into(),
            ));
        }
        if self.n_elements < 1 {
            return Err(BarError::InvalidConfig("n_elements must be >= 1".into()));
        }
        if !(0.0..=0.5).contains(&self.newmark_beta) || !(0.0..=1.0).contains(&self.newmark_gamma) {
            return Err(BarError::InvalidConfig(format!(
                "newmark parameters out of range: beta = {}, gamma = {}",
                self.newmark_beta, self.newmark_gamma
            )));
        }
        for (name, field) in [("u0", &self.u0), ("v0", &self.v0)] {
            if !field.is_empty() && field.len() != self.n_elements {
                return Err(BarError::InvalidConfig(format!(
                    "{name} must have one entry per free DOF ({}), got {}",
                    self.n_elements,
                    field.len()
                )));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).floor() as usize
    }

    pub fn gamma_params(&self) -> Result<GammaParams, BarError> {
        GammaParams::new(self.e_mean, self.e_delta)
            .map_err(|e| BarError::InvalidConfig(e.to_string()))
    }

    fn initial_field(field: &[f64], n_dof: usize) -> DVector<f64> {
        if field.is_empty() {
            DVector::zeros(n_dof)
        } else {
            DVector::from_column_slice(field)
        }
    }
}

/// Assembled free-DOF system M u'' + C u' + K u = f + f_NL(u).
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub mass: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub n_dof: usize,
}

/// Assemble the FEM system on a uniform mesh of linear hat functions.
///
/// Element stiffness (E A / h) [[1,-1],[-1,1]], consistent element mass
/// (rho A h / 6) [[2,1],[1,2]]. The damping term c du/dt projects onto the
/// same consistent structure: (c h / 6) [[2,1],[1,2]] per element. The
/// x = 0 DOF is eliminated; the tip mass goes on the last diagonal of M
/// and the linear spring on the last diagonal of K.
pub fn assemble(config: &BarConfig, e_modulus: f64) -> Result<AssembledSystem, BarError> {
    config.validate()?;
    if !(e_modulus > 0.0) || !e_modulus.is_finite() {
        return Err(BarError::InvalidModulus(e_modulus));
    }
    let n = config.n_elements;
    let h = config.length / n as f64;
    let ke = e_modulus * config.area / h;
    let me = config.rho * config.area * h / 6.0;
    let ce = config.damping_c * h / 6.0;

    // Full mesh has nodes 0..=n; node 0 is fixed, free DOFs are 1..=n.
    let mut mass = DMatrix::zeros(n, n);
    let mut damping = DMatrix::zeros(n, n);
    let mut stiffness = DMatrix::zeros(n, n);
    for e in 0..n {
        // element e spans global nodes (e, e+1); free indices are node-1
        let local = [(e as isize) - 1, e as isize];
        let k_loc = [[ke, -ke], [-ke, ke]];
        let m_loc = [[2.0 * me, me], [me, 2.0 * me]];
        let c_loc = [[2.0 * ce, ce], [ce, 2.0 * ce]];
        for (a, &ia) in local.iter().enumerate() {
            if ia < 0 {
                continue;
            }
            for (b, &ib) in local.iter().enumerate() {
                if ib < 0 {
                    continue;
                }
                stiffness[(ia as usize, ib as usize)] += k_loc[a][b];
                mass[(ia as usize, ib as usize)] += m_loc[a][b];
                damping[(ia as usize, ib as usize)] += c_loc[a][b];
            }
        }
    }
    mass[(n - 1, n - 1)] += config.mass_tip;
    stiffness[(n - 1, n - 1)] += config.k_lin;
    Ok(AssembledSystem {
        mass,
        damping,
        stiffness,
        n_dof: n,
    })
}

/// Cubic end-spring force: zero everywhere except the tip DOF, where it is
/// -k_NL * u_tip^3.
pub fn nonlinear_force(u: &DVector<f64>, k_nl: f64) -> DVector<f64> {
    let mut f = DVector::zeros(u.len());
    if let Some(last) = u.len().checked_sub(1) {
        let tip = u[last];
        f[last] = -k_nl * tip * tip * tip;
    }
    f
}

/// Displacement history of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSolution {
    pub times: Vec<f64>,
    pub tip_displacement: Vec<f64>,
    pub full_state: Option<Vec<(DVector<f64>, DVector<f64>, DVector<f64>)>>,
}

struct NewmarkCoefficients {
    a0: f64, // 1 / (beta dt^2)
    a1: f64, // gamma / (beta dt)
    a2: f64, // 1 / (beta dt)
    a3: f64, // 1 / (2 beta) - 1
    a4: f64, // gamma / beta - 1
    a5: f64, // dt (gamma / (2 beta) - 1)
}

/// Newmark time stepping with fixed-point handling of the cubic tip force.
///
/// `forcing` supplies the external nodal force at each step time, including
/// t = 0; it must cover n_steps + 1 entries. Fixed-point iteration on the
/// effective-stiffness solve runs until the relative displacement change
/// drops below 1e-10, up to 50 iterations.
pub fn newmark_solve(
    system: &AssembledSystem,
    config: &BarConfig,
    forcing: &[DVector<f64>],
    keep_full_state: bool,
) -> Result<BarSolution, BarError> {
    let beta = config.newmark_beta;
    let gamma = config.newmark_gamma;
    if beta <= 0.0 {
        return Err(BarError::InvalidConfig(
            "implicit newmark solve requires beta > 0".into(),
        ));
    }
    let n_steps = config.n_steps();
    if forcing.len() < n_steps + 1 {
        return Err(BarError::InvalidConfig(format!(
            "forcing must cover {} steps, got {}",
            n_steps + 1,
            forcing.len()
        )));
    }
    let dt = config.dt;
    let c = NewmarkCoefficients {
        a0: 1.0 / (beta * dt * dt),
        a1: gamma / (beta * dt),
        a2: 1.0 / (beta * dt),
        a3: 1.0 / (2.0 * beta) - 1.0,
        a4: gamma / beta - 1.0,
        a5: dt * (gamma / (2.0 * beta) - 1.0),
    };

    let n = system.n_dof;
    let mut u = BarConfig::initial_field(&config.u0, n);
    let mut v = BarConfig::initial_field(&config.v0, n);

    // initial acceleration: M a0 = f(0) + f_NL(u0) - C v0 - K u0
    let mass_lu = system.mass.clone().lu();
    let rhs0 = &forcing[0] + nonlinear_force(&u, config.k_nl)
        - &system.damping * &v
        - &system.stiffness * &u;
    let mut a = mass_lu.solve(&rhs0).ok_or(BarError::SingularSystem)?;

    let k_eff = &system.stiffness + c.a0 * &system.mass + c.a1 * &system.damping;
    let k_eff_lu = k_eff.lu();

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut tip = Vec::with_capacity(n_steps + 1);
    let mut full = keep_full_state.then(Vec::new);
    times.push(0.0);
    tip.push(u[n - 1]);
    if let Some(full) = full.as_mut() {
        full.push((u.clone(), v.clone(), a.clone()));
    }

    for step in 1..=n_steps {
        let rhs_lin = &forcing[step]
            + &system.mass * (c.a0 * &u + c.a2 * &v + c.a3 * &a)
            + &system.damping * (c.a1 * &u + c.a4 * &v + c.a5 * &a);
        let mut u_next = u.clone();
        let mut converged = config.k_nl == 0.0;
        if converged {
            u_next = k_eff_lu.solve(&rhs_lin).ok_or(BarError::SingularSystem)?;
        } else {
            for _ in 0..50 {
                let rhs = &rhs_lin + nonlinear_force(&u_next, config.k_nl);
                let candidate = k_eff_lu.solve(&rhs).ok_or(BarError::SingularSystem)?;
                let change = (&candidate - &u_next).norm();
                let scale = candidate.norm().max(1e-300);
                u_next = candidate;
                if change <= 1e-10 * scale {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(BarError::NonConvergentStep { step });
        }
        let a_next = c.a0 * (&u_next - &u - dt * &v) - c.a3 * &a;
        let v_next = &v + dt * ((1.0 - gamma) * &a + gamma * &a_next);
        u = u_next;
        v = v_next;
        a = a_next;
        times.push(step as f64 * dt);
        tip.push(u[n - 1]);
        if let Some(full) = full.as_mut() {
            full.push((u.clone(), v.clone(), a.clone()));
        }
    }

    Ok(BarSolution {
        times,
        tip_displacement: tip,
        full_state: full,
    })
}

/// One Monte Carlo realization: draw the elastic modulus and the forcing
/// history from the stream, assemble, solve, return the tip displacement
/// series. The scalar quantity of interest is the final tip displacement.
pub fn simulate_realization(config: &BarConfig, rng: &mut TaskRng) -> Result<BarSolution, BarError> {
    config.validate()?;
    let params = config.gamma_params()?;
    let e_modulus =
        sample_gamma(rng, &params).map_err(|e| BarError::InvalidConfig(e.to_string()))?;
    let n_steps = config.n_steps();
    let noise = sample_white_noise(rng, n_steps + 1, config.force_amplitude);
    let system = assemble(config, e_modulus)?;
    // point load at the free end: scalar noise times the tip basis vector
    let forcing: Vec<DVector<f64>> = noise
        .iter()
        .map(|&xi| {
            let mut f = DVector::zeros(system.n_dof);
            f[system.n_dof - 1] = xi;
            f
        })
        .collect();
    newmark_solve(&system, config, &forcing, false)
}
