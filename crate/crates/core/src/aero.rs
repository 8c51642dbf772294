//! Airfoil coefficients over the full angle-of-attack circle, lift and drag,
//! and the body-axis specific-force terms `f1`, `f2`.
//!
//! Body frame: `u` is the velocity along the nose (body-x), `w` along body-z.
//! The angle of attack is `atan2(w, u)` and the airspeed is `sqrt(u² + w²)`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::fmt::real;

#[derive(Debug, Error)]
pub enum AeroError {
    #[error("angle of attack must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("invalid aero parameters: {0}")]
    InvalidParams(String),
    #[error("invalid coefficient table: {0}")]
    InvalidTable(String),
    #[error("coefficient csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Physical parameters of the airframe and atmosphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroParams {
    /// kg
    pub mass: f64,
    /// Pitch inertia, kg·m².
    pub inertia_y: f64,
    /// m²
    pub wing_area: f64,
    /// kg/m³
    pub air_density: f64,
    /// m/s²
    pub gravity: f64,
}

impl Default for AeroParams {
    fn default() -> Self {
        Self {
            mass: 1.2,
            inertia_y: 0.05,
            wing_area: 0.24,
            air_density: 1.225,
            gravity: 9.81,
        }
    }
}

impl AeroParams {
    pub fn validate(&self) -> Result<(), AeroError> {
        let fields = [
            ("mass", self.mass),
            ("inertia_y", self.inertia_y),
            ("wing_area", self.wing_area),
            ("air_density", self.air_density),
            ("gravity", self.gravity),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(AeroError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Weight `m·g` in newtons.
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// Specific forces (m/s²) along body-x and body-z.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForcePair {
    pub f1: f64,
    pub f2: f64,
}

/// Default minimum-drag coefficient of the built-in flat-plate table.
pub const FLAT_PLATE_CD0: f64 = 0.02;

/// Tolerance used when validating tables built in code.
pub const DEFAULT_TABLE_TOLERANCE: f64 = 1e-12;

/// Lift and drag coefficients sampled on a grid spanning [-180°, 180°].
///
/// Evaluation is linear interpolation with 2π wrap-around. The table must
/// describe a symmetric airfoil: `cl` odd, `cd` even and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    alpha_deg: Vec<f64>,
    alpha: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
}

impl Default for CoefficientTable {
    fn default() -> Self {
        Self::flat_plate(FLAT_PLATE_CD0, 1.0).expect("built-in flat-plate table is valid")
    }
}

impl CoefficientTable {
    /// Builds and validates a table from a grid in degrees.
    pub fn new(
        alpha_deg: Vec<f64>,
        cl: Vec<f64>,
        cd: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self, AeroError> {
        let n = alpha_deg.len();
        if n < 3 {
            return Err(AeroError::InvalidTable(format!(
                "need at least 3 grid points, got {n}"
            )));
        }
        if cl.len() != n || cd.len() != n {
            return Err(AeroError::InvalidTable(format!(
                "column lengths differ: alpha {n}, cl {}, cd {}",
                cl.len(),
                cd.len()
            )));
        }
        if let Some(i) =
            (0..n).find(|&i| !(alpha_deg[i].is_finite() && cl[i].is_finite() && cd[i].is_finite()))
        {
            return Err(AeroError::InvalidTable(format!(
                "non-finite value at row {i}"
            )));
        }
        if alpha_deg[0] != -180.0 || alpha_deg[n - 1] != 180.0 {
            return Err(AeroError::InvalidTable(format!(
                "grid must span [-180, 180] degrees, got [{}, {}]",
                alpha_deg[0],
                alpha_deg[n - 1]
            )));
        }
        if let Some(i) = (1..n).find(|&i| alpha_deg[i] <= alpha_deg[i - 1]) {
            return Err(AeroError::InvalidTable(format!(
                "grid not strictly increasing at row {i}"
            )));
        }
        if let Some(i) = (0..n).find(|&i| cd[i] < 0.0) {
            return Err(AeroError::InvalidTable(format!(
                "negative drag coefficient {} at {} deg",
                cd[i], alpha_deg[i]
            )));
        }

        // Endpoints are pinned to exactly ±π so the wrap is seamless.
        let alpha = alpha_deg
            .iter()
            .map(|&d| {
                if d == -180.0 {
                    -PI
                } else if d == 180.0 {
                    PI
                } else {
                    d.to_radians()
                }
            })
            .collect();
        let table = Self {
            alpha_deg,
            alpha,
            cl,
            cd,
        };
        table.check_symmetry(tolerance)?;
        Ok(table)
    }

    /// Classical 360° flat-plate model: `cl = sin 2α`, `cd = cd0 + 2 sin²α`.
    pub fn flat_plate(cd0: f64, step_deg: f64) -> Result<Self, AeroError> {
        if !(step_deg > 0.0 && (180.0 / step_deg).fract() == 0.0) {
            return Err(AeroError::InvalidTable(format!(
                "step {step_deg} deg must divide 180"
            )));
        }
        let half = (180.0 / step_deg) as usize;
        let n = 2 * half + 1;
        let mut alpha_deg = vec![0.0; n];
        let mut cl = vec![0.0; n];
        let mut cd = vec![0.0; n];
        for k in 0..=half {
            let deg = k as f64 * step_deg;
            let a = deg.to_radians();
            // sin 2α vanishes exactly on multiples of 90°.
            let lift = if (2.0 * deg) % 180.0 == 0.0 {
                0.0
            } else {
                (2.0 * a).sin()
            };
            let drag = cd0 + 2.0 * a.sin().powi(2);
            alpha_deg[half - k] = 0.0 - deg;
            alpha_deg[half + k] = deg;
            cl[half - k] = 0.0 - lift; // no signed zeros
            cl[half + k] = lift;
            cd[half - k] = drag;
            cd[half + k] = drag;
        }
        Self::new(alpha_deg, cl, cd, DEFAULT_TABLE_TOLERANCE)
    }

    fn check_symmetry(&self, tol: f64) -> Result<(), AeroError> {
        let n = self.alpha.len();
        if (self.cl[0] - self.cl[n - 1]).abs() > tol || (self.cd[0] - self.cd[n - 1]).abs() > tol {
            return Err(AeroError::InvalidTable(
                "coefficients at -180 and 180 deg differ".into(),
            ));
        }
        for (name, a) in [("0", 0.0), ("180", PI)] {
            let (cl, _) = self.eval(a);
            if cl.abs() > tol {
                return Err(AeroError::InvalidTable(format!(
                    "cl({name} deg) = {cl}, expected 0"
                )));
            }
        }
        for i in 0..n {
            let (cl_m, cd_m) = self.eval(-self.alpha[i]);
            if (cl_m + self.cl[i]).abs() > tol {
                return Err(AeroError::InvalidTable(format!(
                    "cl is not odd at {} deg: {} vs {}",
                    self.alpha_deg[i], self.cl[i], cl_m
                )));
            }
            if (cd_m - self.cd[i]).abs() > tol {
                return Err(AeroError::InvalidTable(format!(
                    "cd is not even at {} deg: {} vs {}",
                    self.alpha_deg[i], self.cd[i], cd_m
                )));
            }
        }
        Ok(())
    }

    /// Grid in degrees.
    pub fn alpha_deg(&self) -> &[f64] {
        &self.alpha_deg
    }

    /// Grid in radians.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn cl_values(&self) -> &[f64] {
        &self.cl
    }

    pub fn cd_values(&self) -> &[f64] {
        &self.cd
    }

    /// Smallest drag coefficient on the grid.
    pub fn cd_min(&self) -> f64 {
        self.cd.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(cl, cd)` at `alpha` radians, any finite angle.
    pub fn coefficients(&self, alpha: f64) -> Result<(f64, f64), AeroError> {
        if !alpha.is_finite() {
            return Err(AeroError::NonFiniteAngle(alpha));
        }
        Ok(self.eval(alpha))
    }

    /// Unchecked evaluation; non-finite input yields NaN.
    pub(crate) fn eval(&self, alpha: f64) -> (f64, f64) {
        let a = if (-PI..=PI).contains(&alpha) {
            alpha
        } else {
            (alpha + PI).rem_euclid(2.0 * PI) - PI
        };
        if a.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        let n = self.alpha.len();
        let hi = self.alpha.partition_point(|&g| g <= a).clamp(1, n - 1);
        let lo = hi - 1;
        let t = (a - self.alpha[lo]) / (self.alpha[hi] - self.alpha[lo]);
        let cl = self.cl[lo] + t * (self.cl[hi] - self.cl[lo]);
        let cd = self.cd[lo] + t * (self.cd[hi] - self.cd[lo]);
        (cl, cd)
    }

    /// Parses the `alpha_deg,cl,cd` CSV format.
    pub fn from_csv_str(text: &str, tolerance: f64) -> Result<Self, AeroError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "alpha_deg,cl,cd" => {}
            Some((i, header)) => {
                return Err(AeroError::Csv {
                    line: i + 1,
                    msg: format!("expected header `alpha_deg,cl,cd`, got `{header}`"),
                })
            }
            None => {
                return Err(AeroError::Csv {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let (mut alpha, mut cl, mut cd) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(AeroError::Csv {
                    line: i + 1,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut parsed = [0.0; 3];
            for (slot, field) in parsed.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| AeroError::Csv {
                    line: i + 1,
                    msg: format!("not a number: `{field}`"),
                })?;
            }
            alpha.push(parsed[0]);
            cl.push(parsed[1]);
            cd.push(parsed[2]);
        }
        Self::new(alpha, cl, cd, tolerance)
    }

    pub fn read_csv(path: impl AsRef<Path>, tolerance: f64) -> Result<Self, AeroError> {
        Self::from_csv_str(&fs::read_to_string(path)?, tolerance)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("alpha_deg,cl,cd\n");
        for i in 0..self.alpha.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                real(self.alpha_deg[i]),
                real(self.cl[i]),
                real(self.cd[i])
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), AeroError> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// `atan2(w, u)`; zero when both velocities are zero.
pub fn angle_of_attack(u: f64, w: f64) -> f64 {
    if u == 0.0 && w == 0.0 {
        0.0
    } else {
        w.atan2(u)
    }
}

pub fn airspeed(u: f64, w: f64) -> f64 {
    u.hypot(w)
}

/// Lift and drag in newtons at airspeed `v` and angle of attack `alpha`.
pub fn lift_drag(
    v: f64,
    alpha: f64,
    params: &AeroParams,
    table: &CoefficientTable,
) -> Result<(f64, f64), AeroError> {
    let (cl, cd) = table.coefficients(alpha)?;
    Ok(lift_drag_from(v, cl, cd, params))
}

fn lift_drag_from(v: f64, cl: f64, cd: f64, params: &AeroParams) -> (f64, f64) {
    let dynamic = 0.5 * v * v * params.air_density * params.wing_area;
    (cl * dynamic, cd * dynamic)
}

/// Aerodynamic plus rotational terms of the translational dynamics:
///
/// `f1 = (-D cosα + L sinα)/m - q·w`, `f2 = (-D sinα - L cosα)/m + q·u`.
pub fn specific_body_forces(
    u: f64,
    w: f64,
    q: f64,
    params: &AeroParams,
    table: &CoefficientTable,
) -> ForcePair {
    let (lift, drag) = aero_forces(u, w, params, table);
    let alpha = angle_of_attack(u, w);
    let (sin_a, cos_a) = alpha.sin_cos();
    ForcePair {
        f1: (-drag * cos_a + lift * sin_a) / params.mass - q * w,
        f2: (-drag * sin_a - lift * cos_a) / params.mass + q * u,
    }
}

/// `(L, D)` in newtons for body velocities `(u, w)`.
pub(crate) fn aero_forces(
    u: f64,
    w: f64,
    params: &AeroParams,
    table: &CoefficientTable,
) -> (f64, f64) {
    let (cl, cd) = table.eval(angle_of_attack(u, w));
    lift_drag_from(airspeed(u, w), cl, cd, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn angle_of_attack_examples() {
        assert_eq!(angle_of_attack(1.0, 0.0), 0.0);
        assert_eq!(angle_of_attack(0.0, 1.0), FRAC_PI_2);
        assert_eq!(angle_of_attack(0.0, 0.0), 0.0);
        assert_eq!(angle_of_attack(-1.0, 0.0), PI);
    }

    #[test]
    fn airspeed_examples() {
        assert_eq!(airspeed(3.0, 4.0), 5.0);
        assert_eq!(airspeed(0.0, 0.0), 0.0);
        assert_eq!(airspeed(-3.0, 4.0), 5.0);
    }

    #[test]
    fn default_table_values() {
        let t = CoefficientTable::default();
        assert_eq!(t.alpha_deg().len(), 361);
        let (cl, cd) = t.coefficients(0.0).unwrap();
        assert_eq!(cl, 0.0);
        assert_eq!(cd, t.cd_min());
        assert_eq!(cd, FLAT_PLATE_CD0);

        let (cl, cd) = t.coefficients(FRAC_PI_4).unwrap();
        assert!(close(cl, 1.0, 1e-12), "{cl}");
        assert!(close(cd, 1.02, 1e-12), "{cd}");

        let (cl, cd) = t.coefficients(FRAC_PI_2).unwrap();
        assert!(close(cl, 0.0, 1e-12), "{cl}");
        assert!(close(cd, 2.02, 1e-12), "{cd}");

        let (cl, _) = t.coefficients(PI).unwrap();
        assert_eq!(cl, 0.0);
    }

    #[test]
    fn coefficients_reject_non_finite() {
        let t = CoefficientTable::default();
        assert!(matches!(
            t.coefficients(f64::NAN),
            Err(AeroError::NonFiniteAngle(_))
        ));
        assert!(t.coefficients(f64::INFINITY).is_err());
    }

    #[test]
    fn interpolation_between_grid_points_is_linear() {
        let t = CoefficientTable::default();
        let a0 = 10f64.to_radians();
        let a1 = 11f64.to_radians();
        let (c0, d0) = t.coefficients(a0).unwrap();
        let (c1, d1) = t.coefficients(a1).unwrap();
        let (cm, dm) = t.coefficients(0.5 * (a0 + a1)).unwrap();
        assert!(close(cm, 0.5 * (c0 + c1), 1e-12));
        assert!(close(dm, 0.5 * (d0 + d1), 1e-12));
    }

    #[test]
    fn lift_drag_examples() {
        let p = AeroParams::default();
        let t = CoefficientTable::default();
        assert_eq!(lift_drag(0.0, 0.7, &p, &t).unwrap(), (0.0, 0.0));

        // 0.5 · 100 · 1.225 · 0.24 = 14.7, times cl = 1.0 and cd = 1.02.
        let (l, d) = lift_drag(10.0, FRAC_PI_4, &p, &t).unwrap();
        assert!(close(l, 14.700, 1e-9), "{l}");
        assert!(close(d, 14.994, 1e-9), "{d}");

        let (l2, d2) = lift_drag(20.0, FRAC_PI_4, &p, &t).unwrap();
        assert!(close(l2, 4.0 * l, 1e-9));
        assert!(close(d2, 4.0 * d, 1e-9));
    }

    #[test]
    fn specific_forces_examples() {
        let p = AeroParams::default();
        let t = CoefficientTable::default();
        assert_eq!(
            specific_body_forces(0.0, 0.0, 0.0, &p, &t),
            ForcePair::default()
        );
        for q in [-3.0, 0.0, 0.5, 10.0] {
            let f = specific_body_forces(0.0, 0.0, q, &p, &t);
            assert_eq!((f.f1.abs(), f.f2.abs()), (0.0, 0.0));
        }

        // α = π/2: L = 0, D = 0.5 · 2.02 · 4 · 1.225 · 0.24 = 1.18776 N.
        let f = specific_body_forces(0.0, 2.0, 0.1, &p, &t);
        assert!(close(f.f1, -0.2, 1e-12), "{}", f.f1);
        assert!(close(f.f2, -1.18776 / 1.2, 1e-12), "{}", f.f2);
        assert!(close(f.f2, -0.98980, 1e-5));
    }

    #[test]
    fn params_validation() {
        assert!(AeroParams::default().validate().is_ok());
        let bad = AeroParams {
            mass: 0.0,
            ..AeroParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = AeroParams {
            air_density: f64::NAN,
            ..AeroParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let t = CoefficientTable::flat_plate(0.03, 5.0).unwrap();
        let text = t.to_csv_string();
        assert!(text.starts_with("alpha_deg,cl,cd\n"));
        let back = CoefficientTable::from_csv_str(&text, 1e-12).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn csv_rejects_asymmetric_tables() {
        let text = "alpha_deg,cl,cd\n-180,0,0.1\n-90,0.2,1\n0,0,0.1\n90,0.3,1\n180,0,0.1\n";
        let err = CoefficientTable::from_csv_str(text, 1e-9).unwrap_err();
        assert!(matches!(err, AeroError::InvalidTable(_)), "{err}");
        // Loose enough tolerance accepts it.
        assert!(CoefficientTable::from_csv_str(text, 1.0).is_ok());

        let even_cl = "alpha_deg,cl,cd\n-180,0,0.1\n0,0.5,0.1\n180,0,0.1\n";
        assert!(CoefficientTable::from_csv_str(even_cl, 1e-9).is_err());
        let neg_cd = "alpha_deg,cl,cd\n-180,0,-0.1\n0,0,0.1\n180,0,-0.1\n";
        assert!(CoefficientTable::from_csv_str(neg_cd, 1e-9).is_err());
        let short = "alpha_deg,cl,cd\n-90,0,0.1\n0,0,0.1\n90,0,0.1\n";
        assert!(CoefficientTable::from_csv_str(short, 1e-9).is_err());
        let unsorted = "alpha_deg,cl,cd\n-180,0,0.1\n10,0,0.1\n-10,0,0.1\n180,0,0.1\n";
        assert!(CoefficientTable::from_csv_str(unsorted, 1e-9).is_err());
    }

    #[test]
    fn csv_reports_malformed_lines() {
        let err = CoefficientTable::from_csv_str("a,b,c\n", 1e-9).unwrap_err();
        assert!(matches!(err, AeroError::Csv { line: 1, .. }));
        let err = CoefficientTable::from_csv_str("alpha_deg,cl,cd\n-180,0,x\n", 1e-9).unwrap_err();
        assert!(matches!(err, AeroError::Csv { line: 2, .. }));
        let err = CoefficientTable::from_csv_str("alpha_deg,cl,cd\n-180,0\n", 1e-9).unwrap_err();
        assert!(matches!(err, AeroError::Csv { line: 2, .. }));
    }
}
