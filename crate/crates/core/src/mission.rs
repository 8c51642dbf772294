//! Scripted hover / transition / cruise flight with in-the-loop inference.
//!
//! A minimal pilot stands in for an autopilot: a vertical-speed loop in the
//! hover-type phases, an airspeed loop with trim feedforward in cruise and
//! transitions, and the PD pitch loop from [`crate::dynamics`] throughout.
//! Both estimator networks are evaluated at every step and logged next to
//! the oracle forces.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::aero::{specific_body_forces, AeroParams, CoefficientTable};
use crate::dynamics::{
    attitude_torque, inertial_velocity, max_thrust, step_rk4_tracked, AttitudeGains, BodyState,
    ControlInput, Position,
};
use crate::fmt::real;
use crate::mlp::Network;

/// Pitch held in cruise, rad.
pub const CRUISE_PITCH: f64 = 0.12;
/// Cruise airspeed reference, m/s.
pub const CRUISE_SPEED: f64 = 16.0;
/// Window used for hover statistics, s.
pub const HOVER_WINDOW: (f64, f64) = (10.0, 58.0);
/// Window used for cruise statistics, s. Starts after the transition settles.
pub const CRUISE_WINDOW: (f64, f64) = (65.0, 100.0);

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("invalid mission: {0}")]
    InvalidPhases(String),
    #[error("time step must be finite and > 0, got {0}")]
    InvalidStep(f64),
    #[error("network must map 2 inputs to 1 output, got {0} -> {1}")]
    Topology(usize, usize),
    #[error("state became non-finite at t = {t} s in phase {phase}")]
    Diverged { t: f64, phase: PhaseName },
    #[error("unknown phase name {0:?}")]
    UnknownPhase(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseName {
    Takeoff,
    Hover,
    TransitionFw,
    Cruise,
    TransitionBk,
    Hover2,
    Land,
}

impl PhaseName {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseName::Takeoff => "takeoff",
            PhaseName::Hover => "hover",
            PhaseName::TransitionFw => "transition_fw",
            PhaseName::Cruise => "cruise",
            PhaseName::TransitionBk => "transition_bk",
            PhaseName::Hover2 => "hover2",
            PhaseName::Land => "land",
        }
    }

    /// Phases flown on the vertical-speed loop.
    pub fn is_vertical(self) -> bool {
        matches!(
            self,
            PhaseName::Takeoff | PhaseName::Hover | PhaseName::Hover2 | PhaseName::Land
        )
    }
}

impl fmt::Display for PhaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseName {
    type Err = MissionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "takeoff" => PhaseName::Takeoff,
            "hover" => PhaseName::Hover,
            "transition_fw" => PhaseName::TransitionFw,
            "cruise" => PhaseName::Cruise,
            "transition_bk" => PhaseName::TransitionBk,
            "hover2" => PhaseName::Hover2,
            "land" => PhaseName::Land,
            other => return Err(MissionError::UnknownPhase(other.to_string())),
        })
    }
}

/// One leg of the flight.
///
/// References ramp linearly from `theta_from`/`u_from` at `start` to
/// `theta_ref`/`u_ref` at `end`; constant phases set both ends equal. In the
/// vertical phases `u_ref` is the climb-rate reference (m/s, up positive),
/// otherwise it is the body-x airspeed reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionPhase {
    pub name: PhaseName,
    pub start: f64,
    pub end: f64,
    pub theta_ref: f64,
    pub u_ref: f64,
    pub theta_from: f64,
    pub u_from: f64,
}

impl MissionPhase {
    fn constant(name: PhaseName, start: f64, end: f64, theta: f64, u: f64) -> Self {
        Self::ramp(name, start, end, (theta, theta), (u, u))
    }

    fn ramp(name: PhaseName, start: f64, end: f64, theta: (f64, f64), u: (f64, f64)) -> Self {
        Self {
            name,
            start,
            end,
            theta_ref: theta.1,
            u_ref: u.1,
            theta_from: theta.0,
            u_from: u.0,
        }
    }

    /// `(theta_ref, u_ref)` at time `t`, clamped to the phase.
    pub fn references(&self, t: f64) -> (f64, f64) {
        let s = ((t - self.start) / (self.end - self.start)).clamp(0.0, 1.0);
        (
            self.theta_from + s * (self.theta_ref - self.theta_from),
            self.u_from + s * (self.u_ref - self.u_from),
        )
    }
}

/// Take-off, hover, transition, cruise, transition back, hover, landing.
pub fn default_mission() -> Vec<MissionPhase> {
    use PhaseName::*;
    vec![
        MissionPhase::constant(Takeoff, 0.0, 10.0, FRAC_PI_2, 1.5),
        MissionPhase::constant(Hover, 10.0, 58.0, FRAC_PI_2, 0.0),
        MissionPhase::ramp(
            TransitionFw,
            58.0,
            62.0,
            (FRAC_PI_2, CRUISE_PITCH),
            (0.0, CRUISE_SPEED),
        ),
        MissionPhase::constant(Cruise, 62.0, 100.0, CRUISE_PITCH, CRUISE_SPEED),
        MissionPhase::ramp(
            TransitionBk,
            100.0,
            104.0,
            (CRUISE_PITCH, FRAC_PI_2),
            (CRUISE_SPEED, 0.0),
        ),
        MissionPhase::constant(Hover2, 104.0, 115.0, FRAC_PI_2, 0.0),
        MissionPhase::constant(Land, 115.0, 125.0, FRAC_PI_2, -1.5),
    ]
}

/// Checks that phases are non-empty, finite, increasing and contiguous.
pub fn validate_phases(phases: &[MissionPhase]) -> Result<(), MissionError> {
    let first = phases
        .first()
        .ok_or_else(|| MissionError::InvalidPhases("no phases".into()))?;
    if first.start != 0.0 {
        return Err(MissionError::InvalidPhases(
            "first phase must start at 0".into(),
        ));
    }
    for p in phases {
        let finite = [p.start, p.end, p.theta_ref, p.u_ref, p.theta_from, p.u_from]
            .iter()
            .all(|x| x.is_finite());
        if !finite || p.end <= p.start {
            return Err(MissionError::InvalidPhases(format!("bad phase {}", p.name)));
        }
    }
    for pair in phases.windows(2) {
        if pair[0].end != pair[1].start {
            return Err(MissionError::InvalidPhases(format!(
                "{} ends at {} but {} starts at {}",
                pair[0].name, pair[0].end, pair[1].name, pair[1].start
            )));
        }
    }
    Ok(())
}

/// Phase active at `t`; a shared boundary belongs to the later phase and the
/// final end time to the last one.
pub fn phase_at(phases: &[MissionPhase], t: f64) -> Option<&MissionPhase> {
    let last = phases.last()?;
    if t == last.end {
        return Some(last);
    }
    phases.iter().find(|p| t >= p.start && t < p.end)
}

/// Pilot gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceGains {
    /// Vertical-speed loop, N per m/s.
    pub k_climb: f64,
    /// Airspeed loop, 1/s (scaled by mass).
    pub k_speed: f64,
    pub attitude: AttitudeGains,
}

impl Default for GuidanceGains {
    fn default() -> Self {
        Self {
            k_climb: 2.0,
            k_speed: 1.0,
            attitude: AttitudeGains::default(),
        }
    }
}

/// Thrust command and pitch reference for `state` at time `t`.
///
/// Vertical phases: `T = m·g + k_climb·(v_ref - ḣ)`. Other phases:
/// `T = m·k_speed·(u_ref - u) + m·(g sinθ - f1(u_ref, w))`, the second term
/// being the body-x trim thrust at the reference speed. Thrust is clamped to
/// `[0, 2mg]`.
pub fn guidance(
    phase: &MissionPhase,
    t: f64,
    state: &BodyState,
    params: &AeroParams,
    table: &CoefficientTable,
    gains: &GuidanceGains,
) -> (f64, f64) {
    let (theta_ref, u_ref) = phase.references(t);
    let m = params.mass;
    let thrust = if phase.name.is_vertical() {
        let (_, climb) = inertial_velocity(state);
        params.weight() + gains.k_climb * (u_ref - climb)
    } else {
        let trim = specific_body_forces(u_ref, state.w, 0.0, params, table).f1;
        m * gains.k_speed * (u_ref - state.u) + m * (params.gravity * state.theta.sin() - trim)
    };
    (thrust.clamp(0.0, max_thrust(params)), theta_ref)
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub state: BodyState,
    pub position: Position,
    pub input: ControlInput,
    /// Oracle forces at the logged state, including the `q` terms.
    pub f1_true: f64,
    pub f2_true: f64,
    pub f1_est: f64,
    pub f2_est: f64,
    pub phase: PhaseName,
}

fn check_net(net: &Network) -> Result<(), MissionError> {
    let topo = net.topology();
    if topo.input_dim() != 2 || topo.output_dim() != 1 {
        return Err(MissionError::Topology(topo.input_dim(), topo.output_dim()));
    }
    Ok(())
}

/// Flies `phases` from rest in hover attitude with default gains.
pub fn run_mission(
    phases: &[MissionPhase],
    params: &AeroParams,
    table: &CoefficientTable,
    net_f1: &Network,
    net_f2: &Network,
    dt: f64,
) -> Result<Vec<TraceRecord>, MissionError> {
    run_mission_with(
        phases,
        params,
        table,
        net_f1,
        net_f2,
        dt,
        &GuidanceGains::default(),
    )
}

/// As [`run_mission`] with explicit gains. Controls are held over each step;
/// one record is logged per step plus the final state.
pub fn run_mission_with(
    phases: &[MissionPhase],
    params: &AeroParams,
    table: &CoefficientTable,
    net_f1: &Network,
    net_f2: &Network,
    dt: f64,
    gains: &GuidanceGains,
) -> Result<Vec<TraceRecord>, MissionError> {
    validate_phases(phases)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(MissionError::InvalidStep(dt));
    }
    check_net(net_f1)?;
    check_net(net_f2)?;
    params
        .validate()
        .map_err(|e| MissionError::InvalidPhases(e.to_string()))?;

    let duration = phases[phases.len() - 1].end;
    let steps = (duration / dt).round() as usize;
    let mut records = Vec::with_capacity(steps + 1);
    let mut scratch1 = net_f1.scratch();
    let mut scratch2 = net_f2.scratch();
    let mut state = BodyState::new(0.0, 0.0, FRAC_PI_2, 0.0);
    let mut position = Position::default();

    for n in 0..=steps {
        let t = (n as f64 * dt).min(duration);
        let phase = phase_at(phases, t).expect("t lies within the validated timeline");
        if !state.is_finite() {
            return Err(MissionError::Diverged {
                t,
                phase: phase.name,
            });
        }
        let (thrust, theta_ref) = guidance(phase, t, &state, params, table, gains);
        let tau = attitude_torque(state.theta, state.q, theta_ref, &gains.attitude);
        let input = ControlInput::saturated(thrust, tau, max_thrust(params));
        let truth = specific_body_forces(state.u, state.w, state.q, params, table);
        let x = [state.u, state.w];
        records.push(TraceRecord {
            t,
            state,
            position,
            input,
            f1_true: truth.f1,
            f2_true: truth.f2,
            f1_est: net_f1.forward(&x, &mut scratch1),
            f2_est: net_f2.forward(&x, &mut scratch2),
            phase: phase.name,
        });
        if n < steps {
            let (s, p) = step_rk4_tracked(&state, &position, &input, params, table, dt)
                .map_err(|_| MissionError::InvalidStep(dt))?;
            state = s;
            position = p;
        }
    }
    Ok(records)
}

pub const TRACE_HEADER: &str = "t,u,w,theta,q,thrust,tau,f1_true,f2_true,f1_est,f2_est,phase";

pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let cols = [
            r.t,
            r.state.u,
            r.state.w,
            r.state.theta,
            r.state.q,
            r.input.thrust,
            r.input.pitch_torque,
            r.f1_true,
            r.f2_true,
            r.f1_est,
            r.f2_est,
        ];
        for c in cols {
            out.push_str(&real(c));
            out.push(',');
        }
        out.push_str(r.phase.as_str());
        out.push('\n');
    }
    out
}

pub fn write_trace(records: &[TraceRecord], path: impl AsRef<Path>) -> Result<(), MissionError> {
    std::fs::write(path, trace_to_csv(records))?;
    Ok(())
}

/// Statistics over a time window of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStats {
    pub name: String,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub mean_u: f64,
    pub mean_abs_u: f64,
    pub mean_abs_f1_true: f64,
    pub mean_abs_f2_true: f64,
    pub std_f1_true: f64,
    pub std_f2_true: f64,
    pub rmse_f1: f64,
    pub rmse_f2: f64,
}

impl SegmentStats {
    /// Largest estimation RMSE accepted for this segment:
    /// 15 % of the true-force spread plus 0.05 m/s².
    pub fn rmse_bounds(&self) -> (f64, f64) {
        (
            0.15 * self.std_f1_true + 0.05,
            0.15 * self.std_f2_true + 0.05,
        )
    }

    pub fn estimation_ok(&self) -> bool {
        let (b1, b2) = self.rmse_bounds();
        self.rmse_f1 < b1 && self.rmse_f2 < b2
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Statistics of the records with `t_start ≤ t ≤ t_end`.
pub fn segment_stats(
    records: &[TraceRecord],
    name: &str,
    t_start: f64,
    t_end: f64,
) -> SegmentStats {
    let seg: Vec<&TraceRecord> = records
        .iter()
        .filter(|r| r.t >= t_start && r.t <= t_end)
        .collect();
    let std = |f: fn(&TraceRecord) -> f64| {
        let m = mean(seg.iter().map(|r| f(r)));
        mean(seg.iter().map(|r| (f(r) - m).powi(2))).sqrt()
    };
    SegmentStats {
        name: name.to_string(),
        t_start,
        t_end,
        samples: seg.len(),
        mean_u: mean(seg.iter().map(|r| r.state.u)),
        mean_abs_u: mean(seg.iter().map(|r| r.state.u.abs())),
        mean_abs_f1_true: mean(seg.iter().map(|r| r.f1_true.abs())),
        mean_abs_f2_true: mean(seg.iter().map(|r| r.f2_true.abs())),
        std_f1_true: std(|r| r.f1_true),
        std_f2_true: std(|r| r.f2_true),
        rmse_f1: mean(seg.iter().map(|r| (r.f1_est - r.f1_true).powi(2))).sqrt(),
        rmse_f2: mean(seg.iter().map(|r| (r.f2_est - r.f2_true).powi(2))).sqrt(),
    }
}

/// Hover and cruise statistics over the standard windows.
pub fn standard_segments(records: &[TraceRecord]) -> [SegmentStats; 2] {
    [
        segment_stats(records, "hover", HOVER_WINDOW.0, HOVER_WINDOW.1),
        segment_stats(records, "cruise", CRUISE_WINDOW.0, CRUISE_WINDOW.1),
    ]
}

pub const SUMMARY_HEADER: &str = "segment,t_start,t_end,samples,mean_u,mean_abs_u,\
mean_abs_f1_true,mean_abs_f2_true,std_f1_true,std_f2_true,rmse_f1,rmse_f2,bound_f1,bound_f2";

pub fn summary_to_csv(segments: &[SegmentStats]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in segments {
        let (b1, b2) = s.rmse_bounds();
        let nums = [
            s.t_start,
            s.t_end,
            s.samples as f64,
            s.mean_u,
            s.mean_abs_u,
            s.mean_abs_f1_true,
            s.mean_abs_f2_true,
            s.std_f1_true,
            s.std_f2_true,
            s.rmse_f1,
            s.rmse_f2,
            b1,
            b2,
        ];
        out.push_str(&s.name);
        for x in nums {
            out.push(',');
            out.push_str(&real(x));
        }
        out.push('\n');
    }
    out
}
