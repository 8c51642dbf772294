//! Longitudinal rigid-body dynamics of the tail-sitter.
//!
//! Translational part, body axes:
//!
//! ```text
//! u' = (T - D cosα + L sinα)/m - g sinθ - q w
//! w' = (-D sinα - L cosα)/m + g cosθ + q u
//! ```
//!
//! Rotational part: `θ' = q`, `q' = τ/J`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::aero::{aero_forces, angle_of_attack, AeroParams, CoefficientTable};

/// Default integration step (250 Hz).
pub const DEFAULT_DT: f64 = 0.004;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("time step must be finite and > 0, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    /// Body-x velocity, m/s.
    pub u: f64,
    /// Body-z velocity, m/s.
    pub w: f64,
    /// Pitch, rad, kept in (-π, π].
    pub theta: f64,
    /// Pitch rate, rad/s.
    pub q: f64,
}

impl BodyState {
    pub fn new(u: f64, w: f64, theta: f64, q: f64) -> Self {
        Self {
            u,
            w,
            theta: wrap_angle(theta),
            q,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.w.is_finite() && self.theta.is_finite() && self.q.is_finite()
    }

    fn to_array(self) -> [f64; 4] {
        [self.u, self.w, self.theta, self.q]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    /// Thrust along body-x, N.
    pub thrust: f64,
    /// Pitching moment, N·m.
    pub pitch_torque: f64,
}

impl ControlInput {
    /// Clamps thrust into `[0, max_thrust]`.
    pub fn saturated(thrust: f64, pitch_torque: f64, max_thrust: f64) -> Self {
        Self {
            thrust: thrust.clamp(0.0, max_thrust),
            pitch_torque,
        }
    }
}

/// Thrust ceiling: twice the weight.
pub fn max_thrust(params: &AeroParams) -> f64 {
    2.0 * params.weight()
}

/// Time derivative of [`BodyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub du: f64,
    pub dw: f64,
    pub dtheta: f64,
    pub dq: f64,
}

/// Inertial position in the vertical plane, integrated for logging.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    /// Horizontal distance, m.
    pub x: f64,
    /// Altitude, m (up positive).
    pub h: f64,
}

/// Inertial velocity `(ẋ, ḣ)` of the body velocities at pitch `theta`.
pub fn inertial_velocity(state: &BodyState) -> (f64, f64) {
    let (s, c) = state.theta.sin_cos();
    (state.u * c + state.w * s, state.u * s - state.w * c)
}

pub fn derivatives(
    state: &BodyState,
    input: &ControlInput,
    params: &AeroParams,
    table: &CoefficientTable,
) -> StateRate {
    let (lift, drag) = aero_forces(state.u, state.w, params, table);
    let (sin_a, cos_a) = angle_of_attack(state.u, state.w).sin_cos();
    let (sin_t, cos_t) = state.theta.sin_cos();
    let m = params.mass;
    let g = params.gravity;
    StateRate {
        du: (input.thrust - drag * cos_a + lift * sin_a) / m - g * sin_t - state.q * state.w,
        dw: (-drag * sin_a - lift * cos_a) / m + g * cos_t + state.q * state.u,
        dtheta: state.q,
        dq: input.pitch_torque / params.inertia_y,
    }
}

fn rk4<const N: usize>(y: [f64; N], dt: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let offset = |k: &[f64; N], h: f64| {
        let mut out = y;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&offset(&k1, 0.5 * dt));
    let k3 = f(&offset(&k2, 0.5 * dt));
    let k4 = f(&offset(&k3, dt));
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn check_step(dt: f64) -> Result<(), DynamicsError> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidStep(dt))
    }
}

fn rate_array(
    y: &[f64; 4],
    input: &ControlInput,
    params: &AeroParams,
    table: &CoefficientTable,
) -> [f64; 4] {
    let s = BodyState {
        u: y[0],
        w: y[1],
        theta: y[2],
        q: y[3],
    };
    let r = derivatives(&s, input, params, table);
    [r.du, r.dw, r.dtheta, r.dq]
}

/// One classical Runge-Kutta step with the input held constant over `dt`.
pub fn step_rk4(
    state: &BodyState,
    input: &ControlInput,
    params: &AeroParams,
    table: &CoefficientTable,
    dt: f64,
) -> Result<BodyState, DynamicsError> {
    step_rk4_with(state, params, table, dt, |_| *input)
}

/// Runge-Kutta step where the input is re-evaluated from the state at every
/// stage, i.e. a continuous feedback law inside the vector field.
pub fn step_rk4_with(
    state: &BodyState,
    params: &AeroParams,
    table: &CoefficientTable,
    dt: f64,
    control: impl Fn(&BodyState) -> ControlInput,
) -> Result<BodyState, DynamicsError> {
    check_step(dt)?;
    let y = rk4(state.to_array(), dt, |y| {
        let s = BodyState {
            u: y[0],
            w: y[1],
            theta: y[2],
            q: y[3],
        };
        rate_array(y, &control(&s), params, table)
    });
    Ok(BodyState::from_array(y))
}

/// Step that also carries the inertial position along.
pub fn step_rk4_tracked(
    state: &BodyState,
    position: &Position,
    input: &ControlInput,
    params: &AeroParams,
    table: &CoefficientTable,
    dt: f64,
) -> Result<(BodyState, Position), DynamicsError> {
    check_step(dt)?;
    let y0 = [
        state.u,
        state.w,
        state.theta,
        state.q,
        position.x,
        position.h,
    ];
    let y = rk4(y0, dt, |y| {
        let body = [y[0], y[1], y[2], y[3]];
        let r = rate_array(&body, input, params, table);
        let (sin_t, cos_t) = y[2].sin_cos();
        [
            r[0],
            r[1],
            r[2],
            r[3],
            y[0] * cos_t + y[1] * sin_t,
            y[0] * sin_t - y[1] * cos_t,
        ]
    });
    Ok((
        BodyState::new(y[0], y[1], y[2], y[3]),
        Position { x: y[4], h: y[5] },
    ))
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// PD pitch stabiliser gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeGains {
    /// N·m/rad
    pub kp: f64,
    /// N·m·s/rad
    pub kd: f64,
    /// Torque saturation, N·m.
    pub tau_max: f64,
}

impl Default for AttitudeGains {
    fn default() -> Self {
        Self {
            kp: 0.4,
            kd: 0.15,
            tau_max: 0.5,
        }
    }
}

/// `τ = kp·wrap(θ_ref - θ) - kd·q`, saturated to `±tau_max`.
pub fn attitude_torque(theta: f64, q: f64, theta_ref: f64, gains: &AttitudeGains) -> f64 {
    let error = wrap_angle(theta_ref - theta);
    (gains.kp * error - gains.kd * q).clamp(-gains.tau_max, gains.tau_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn defaults() -> (AeroParams, CoefficientTable) {
        (AeroParams::default(), CoefficientTable::default())
    }

    fn max_diff(a: &BodyState, b: &BodyState) -> f64 {
        [
            (a.u - b.u).abs(),
            (a.w - b.w).abs(),
            wrap_angle(a.theta - b.theta).abs(),
            (a.q - b.q).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn derivatives_at_rest_level() {
        let (p, t) = defaults();
        let r = derivatives(&BodyState::default(), &ControlInput::default(), &p, &t);
        assert_eq!((r.du, r.dw, r.dtheta, r.dq), (0.0, 9.81, 0.0, 0.0));
    }

    #[test]
    fn derivatives_hover_equilibrium() {
        let (p, t) = defaults();
        let s = BodyState::new(0.0, 0.0, FRAC_PI_2, 0.0);
        let input = ControlInput {
            thrust: p.weight(),
            pitch_torque: 0.0,
        };
        assert!((p.weight() - 11.772).abs() < 1e-12);
        let r = derivatives(&s, &input, &p, &t);
        for v in [r.du, r.dw, r.dtheta, r.dq] {
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn pitch_acceleration_is_torque_over_inertia() {
        let (p, t) = defaults();
        let input = ControlInput {
            thrust: 3.0,
            pitch_torque: 0.05,
        };
        for s in [
            BodyState::default(),
            BodyState::new(12.0, -1.0, 0.3, 2.0),
            BodyState::new(-4.0, 3.0, -2.0, -1.0),
        ] {
            assert_eq!(derivatives(&s, &input, &p, &t).dq, 1.0);
        }
    }

    #[test]
    fn step_rejects_bad_dt() {
        let (p, t) = defaults();
        let s = BodyState::default();
        let i = ControlInput::default();
        for dt in [0.0, -1e-3, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                step_rk4(&s, &i, &p, &t, dt),
                Err(DynamicsError::InvalidStep(_))
            ));
        }
    }

    #[test]
    fn tiny_step_is_continuous() {
        let (p, t) = defaults();
        let s = BodyState::new(5.0, 1.0, 0.4, 0.2);
        let i = ControlInput {
            thrust: 4.0,
            pitch_torque: 0.1,
        };
        let next = step_rk4(&s, &i, &p, &t, 1e-12).unwrap();
        assert!(max_diff(&s, &next) < 1e-9);
    }

    #[test]
    fn pure_rotation_advances_theta_linearly() {
        let p = AeroParams {
            air_density: 1e-300,
            ..AeroParams::default()
        };
        let t = CoefficientTable::default();
        let s = BodyState::new(0.0, 0.0, 0.0, 0.1);
        let dt = 0.004;
        let next = step_rk4(&s, &ControlInput::default(), &p, &t, dt).unwrap();
        assert!((next.theta - 0.1 * dt).abs() < 1e-18);
        assert_eq!(next.q, 0.1);
    }

    fn run(state: BodyState, input: ControlInput, dt: f64, duration: f64) -> BodyState {
        let (p, t) = defaults();
        let steps = (duration / dt).round() as usize;
        (0..steps).fold(state, |s, _| step_rk4(&s, &input, &p, &t, dt).unwrap())
    }

    #[test]
    fn open_loop_error_shrinks_fourth_order() {
        let s0 = BodyState::new(8.0, 1.0, 0.3, 0.2);
        let input = ControlInput {
            thrust: 3.0,
            pitch_torque: 0.01,
        };
        let reference = run(s0, input, 1e-5, 1.0);
        let coarse = max_diff(&run(s0, input, 1e-2, 1.0), &reference);
        let fine = max_diff(&run(s0, input, 5e-3, 1.0), &reference);
        assert!(coarse / fine >= 15.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn attitude_torque_examples() {
        let g = AttitudeGains::default();
        assert_eq!(attitude_torque(0.7, 0.0, 0.7, &g), 0.0);
        let unit = AttitudeGains {
            kp: 1.0,
            kd: 0.1,
            tau_max: 10.0,
        };
        assert_eq!(attitude_torque(0.0, 0.0, FRAC_PI_2, &unit), FRAC_PI_2);
        // Shortest path from 3.0 to -3.0 is +0.283 rad through ±π.
        let tau = attitude_torque(3.0, 0.0, -3.0, &unit);
        assert!((tau - (2.0 * PI - 6.0)).abs() < 1e-12, "{tau}");
        assert!((tau - 0.283).abs() < 1e-3);
        // Saturation.
        assert_eq!(attitude_torque(0.0, 0.0, FRAC_PI_2, &g), 0.5);
        assert_eq!(attitude_torque(0.0, 100.0, 0.0, &g), -0.5);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-6.0) - (2.0 * PI - 6.0)).abs() < 1e-15);
        assert_eq!(wrap_angle(0.5), 0.5);
    }

    #[test]
    fn energy_does_not_grow_unpowered() {
        let (p, t) = defaults();
        let dt = 1e-3;
        for start in [
            BodyState::new(0.5, 1.5, 1.5, 0.0),
            BodyState::new(-1.0, 2.0, 1.2, 0.3),
            BodyState::new(3.0, -1.0, 1.7, -0.2),
        ] {
            let energy =
                |s: &BodyState, pos: &Position| 0.5 * (s.u * s.u + s.w * s.w) + p.gravity * pos.h;
            let (mut s, mut pos) = (start, Position::default());
            let mut prev = energy(&s, &pos);
            for _ in 0..2000 {
                (s, pos) =
                    step_rk4_tracked(&s, &pos, &ControlInput::default(), &p, &t, dt).unwrap();
                let e = energy(&s, &pos);
                assert!(e <= prev + 1e-9, "energy grew {prev} -> {e}");
                prev = e;
            }
        }
    }

    #[test]
    fn stepping_is_deterministic() {
        let s0 = BodyState::new(6.0, 0.5, 0.2, 0.1);
        let input = ControlInput {
            thrust: 5.0,
            pitch_torque: -0.02,
        };
        let a = run(s0, input, 0.004, 2.0);
        let b = run(s0, input, 0.004, 2.0);
        assert_eq!(a.u.to_bits(), b.u.to_bits());
        assert_eq!(a.w.to_bits(), b.w.to_bits());
        assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        assert_eq!(a.q.to_bits(), b.q.to_bits());
    }

    #[test]
    fn attitude_loop_settles_from_any_pitch() {
        let (p, t) = defaults();
        let gains = AttitudeGains::default();
        for theta_ref in [FRAC_PI_2, 0.12, -1.0] {
            for k in 0..72 {
                let theta0 = -PI + (k as f64 + 0.5) * PI / 36.0;
                let mut s = BodyState::new(0.0, 0.0, theta0, 0.0);
                for n in 0..2500 {
                    if n as f64 * DEFAULT_DT >= 5.0 {
                        let err = wrap_angle(s.theta - theta_ref).abs();
                        assert!(err < 0.01, "theta0 {theta0} ref {theta_ref}: {err}");
                    }
                    s = step_rk4_with(&s, &p, &t, DEFAULT_DT, |x| {
                        let tau = attitude_torque(x.theta, x.q, theta_ref, &gains);
                        ControlInput::saturated(p.weight(), tau, max_thrust(&p))
                    })
                    .unwrap();
                    assert!(s.is_finite());
                }
            }
        }
    }
}
