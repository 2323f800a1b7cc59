//! Closed-form link budgets for the direct BS→user path and the cascaded
//! BS→IRS→user path, plus the unit conversions used at the I/O boundary.
//!
//! Everything here works on linear powers in watts. dB and dBm only appear in
//! [`watts_to_dbm`] and [`db_to_linear`].

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Result};

/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance_to(&self, other: &Position3D) -> f64 {
        distance(self, other)
    }

    pub(crate) fn offset_to(&self, other: &Position3D) -> [f64; 3] {
        [other.x - self.x, other.y - self.y, other.z - self.z]
    }

    pub fn translated(&self, by: [f64; 3]) -> Self {
        Self::new(self.x + by[0], self.y + by[1], self.z + by[2])
    }
}

impl fmt::Display for Position3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Carrier, noise floor and path-loss exponents shared by every link in a
/// scenario. The wavelength is always derived from the carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioEnvironment {
    carrier_frequency: f64,
    wavelength: f64,
    noise_power: f64,
    pathloss_exponent_micro: f64,
    pathloss_exponent_macro: f64,
}

impl RadioEnvironment {
    pub fn new(
        carrier_frequency: f64,
        noise_power: f64,
        pathloss_exponent_micro: f64,
        pathloss_exponent_macro: f64,
    ) -> Result<Self> {
        let wavelength = wavelength(carrier_frequency)?;
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return domain(format!("noise_power must be positive, got {noise_power}"));
        }
        for (name, alpha) in [
            ("pathloss_exponent_micro", pathloss_exponent_micro),
            ("pathloss_exponent_macro", pathloss_exponent_macro),
        ] {
            if !(alpha >= 2.0 && alpha.is_finite()) {
                return domain(format!("{name} must be >= 2, got {alpha}"));
            }
        }
        Ok(Self {
            carrier_frequency,
            wavelength,
            noise_power,
            pathloss_exponent_micro,
            pathloss_exponent_macro,
        })
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn pathloss_exponent_micro(&self) -> f64 {
        self.pathloss_exponent_micro
    }

    pub fn pathloss_exponent_macro(&self) -> f64 {
        self.pathloss_exponent_macro
    }

    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        Self::new(
            self.carrier_frequency,
            noise_power,
            self.pathloss_exponent_micro,
            self.pathloss_exponent_macro,
        )
    }
}

/// A direct transmitter→receiver link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionalLink {
    pub transmit_power: f64,
    pub transmitter: Position3D,
    pub receiver: Position3D,
    pub pathloss_exponent: f64,
}

/// How the panel's incidence and reflection angles are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleMode {
    /// Both angles are fixed, in radians, regardless of geometry.
    Fixed { theta_t: f64, theta_r: f64 },
    /// Angles measured from the panel's unit normal toward each endpoint.
    Geometric { unit_normal: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrsPanel {
    pub elements_m: u32,
    pub elements_n: u32,
    pub element_len_x: f64,
    pub element_len_y: f64,
    pub reflection_coefficient: f64,
    /// Linear transmitter-side gain.
    pub gain_tx: f64,
    /// Linear receiver-side gain.
    pub gain_rx: f64,
    pub position: Position3D,
    pub angle_mode: AngleMode,
}

impl IrsPanel {
    pub fn validate(&self) -> Result<()> {
        if self.elements_m < 1 || self.elements_n < 1 {
            return domain("panel needs at least one element per axis");
        }
        if !(self.element_len_x > 0.0 && self.element_len_y > 0.0)
            || !self.element_len_x.is_finite()
            || !self.element_len_y.is_finite()
        {
            return domain("panel element lengths must be positive");
        }
        if !(0.0..=1.0).contains(&self.reflection_coefficient) {
            return domain(format!(
                "reflection_coefficient must lie in [0, 1], got {}",
                self.reflection_coefficient
            ));
        }
        if !(self.gain_tx > 0.0 && self.gain_rx > 0.0)
            || !self.gain_tx.is_finite()
            || !self.gain_rx.is_finite()
        {
            return domain("panel gains must be positive");
        }
        if !self.position.is_finite() {
            return domain("panel position must be finite");
        }
        match self.angle_mode {
            AngleMode::Fixed { theta_t, theta_r } => {
                for theta in [theta_t, theta_r] {
                    if !(0.0..PI / 2.0).contains(&theta) {
                        return domain(format!("fixed panel angle {theta} rad outside [0, pi/2)"));
                    }
                }
            }
            AngleMode::Geometric { unit_normal } => {
                let norm = unit_normal.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= 1e-9) {
                    return domain(format!(
                        "panel normal must have unit length, got norm {norm}"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn relocated(&self, position: Position3D) -> Self {
        Self { position, ..*self }
    }
}

/// Outcome of resolving the panel angles for one transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Incidence {
    Angles {
        theta_t: f64,
        theta_r: f64,
    },
    /// An endpoint lies behind the reflecting face; the cascade carries no power.
    BehindSurface,
}

pub fn wavelength(carrier_frequency: f64) -> Result<f64> {
    if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
        return domain(format!(
            "carrier frequency must be positive, got {carrier_frequency}"
        ));
    }
    Ok(SPEED_OF_LIGHT / carrier_frequency)
}

pub fn distance(a: &Position3D, b: &Position3D) -> f64 {
    let [dx, dy, dz] = a.offset_to(b);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Received power over a direct link: `P_t λ² / (D^α 16π²)`.
pub fn conventional_rx_power(link: &ConventionalLink, env: &RadioEnvironment) -> Result<f64> {
    let d = distance(&link.transmitter, &link.receiver);
    if d <= 0.0 {
        return domain(format!(
            "transmitter and receiver coincide at {}",
            link.transmitter
        ));
    }
    if !(link.transmit_power >= 0.0) {
        return domain(format!(
            "transmit power must be non-negative, got {}",
            link.transmit_power
        ));
    }
    let lambda = env.wavelength();
    Ok(link.transmit_power * lambda * lambda / (d.powf(link.pathloss_exponent) * 16.0 * PI * PI))
}

/// Scattering gain of one IRS element, `4π d_x d_y / λ²`.
pub fn element_scatter_gain(
    element_len_x: f64,
    element_len_y: f64,
    wavelength: f64,
) -> Result<f64> {
    if !(element_len_x > 0.0 && element_len_y > 0.0 && wavelength > 0.0) {
        return domain("element dimensions and wavelength must be positive");
    }
    Ok(4.0 * PI * element_len_x * element_len_y / (wavelength * wavelength))
}

pub fn incidence_angles(
    transmitter: &Position3D,
    panel: &IrsPanel,
    receiver: &Position3D,
) -> Result<Incidence> {
    match panel.angle_mode {
        AngleMode::Fixed { theta_t, theta_r } => Ok(Incidence::Angles { theta_t, theta_r }),
        AngleMode::Geometric { unit_normal } => {
            let toward = |p: &Position3D, what: &str| -> Result<f64> {
                let v = panel.position.offset_to(p);
                let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if len <= 0.0 {
                    return domain(format!(
                        "{what} coincides with the panel at {}",
                        panel.position
                    ));
                }
                Ok((v[0] * unit_normal[0] + v[1] * unit_normal[1] + v[2] * unit_normal[2]) / len)
            };
            let cos_t = toward(transmitter, "transmitter")?;
            let cos_r = toward(receiver, "receiver")?;
            if cos_t < 0.0 || cos_r < 0.0 {
                return Ok(Incidence::BehindSurface);
            }
            Ok(Incidence::Angles {
                theta_t: cos_t.clamp(-1.0, 1.0).acos(),
                theta_r: cos_r.clamp(-1.0, 1.0).acos(),
            })
        }
    }
}

/// Received power over the cascaded BS→IRS→user path:
///
/// `P_t λ² A² G_sc G_t G_r d_x d_y M² N² cosθ_t cosθ_r / ((R1 R2)² 64π³)`
///
/// Returns 0 W when an endpoint sits behind a geometrically oriented panel.
pub fn irs_rx_power(
    transmit_power: f64,
    panel: &IrsPanel,
    transmitter: &Position3D,
    receiver: &Position3D,
    env: &RadioEnvironment,
) -> Result<f64> {
    let r1 = distance(transmitter, &panel.position);
    let r2 = distance(&panel.position, receiver);
    if r1 <= 0.0 || r2 <= 0.0 {
        return domain(format!(
            "cascade segment has zero length (R1 = {r1}, R2 = {r2})"
        ));
    }
    if !(transmit_power >= 0.0) {
        return domain(format!(
            "transmit power must be non-negative, got {transmit_power}"
        ));
    }
    let (theta_t, theta_r) = match incidence_angles(transmitter, panel, receiver)? {
        Incidence::Angles { theta_t, theta_r } => (theta_t, theta_r),
        Incidence::BehindSurface => return Ok(0.0),
    };
    let lambda = env.wavelength();
    let g_sc = element_scatter_gain(panel.element_len_x, panel.element_len_y, lambda)?;
    let a = panel.reflection_coefficient;
    let m = f64::from(panel.elements_m);
    let n = f64::from(panel.elements_n);
    let numerator = transmit_power
        * lambda
        * lambda
        * a
        * a
        * g_sc
        * panel.gain_tx
        * panel.gain_rx
        * panel.element_len_x
        * panel.element_len_y
        * m
        * m
        * n
        * n
        * theta_t.cos()
        * theta_r.cos();
    let r12 = r1 * r2;
    Ok(numerator / (r12 * r12 * 64.0 * PI * PI * PI))
}

pub fn watts_to_dbm(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("power must be positive to express in dBm, got {p}"));
    }
    Ok(10.0 * (p / 1e-3).log10())
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn db_to_linear(g: f64) -> f64 {
    10f64.powf(g / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
