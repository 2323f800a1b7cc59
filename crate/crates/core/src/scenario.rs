//! The two-tier scenario and its flat `key = value` config format.
//!
//! Config files hold one key per line, `#` starts a comment, and every value
//! is in SI units (hertz, watts, meters, radians). Keys ending in `_db` or
//! `_dbm` are converted to linear at load, and `_deg` keys to radians.
//! Omitted keys take the defaults below; unknown or repeated keys are
//! rejected with their line number.
//!
//! | key | default |
//! |-----|---------|
//! | `carrier_frequency` | 130e9 |
//! | `noise_power` / `noise_power_dbm` | 1e-12 W (−90 dBm) |
//! | `pathloss_exponent_micro` | 3 |
//! | `pathloss_exponent_macro` | 4 |
//! | `macro_extent` (`origin_x,origin_y,width,depth`) | `0,0,1000,1000` |
//! | `micro_extent` | `0,0,200,200` |
//! | `macro_bs_power` | 50 |
//! | `macro_bs_position` / `macro_bs_height` | macro center, 10 m up |
//! | `micro_bs_position` | `0,0,5` |
//! | `micro_power_conventional` | 10 |
//! | `micro_power_irs` | 1 |
//! | `irs_elements_m`, `irs_elements_n` | 128 |
//! | `irs_element_len_x`, `irs_element_len_y` | λ/2 |
//! | `irs_reflection_coefficient` | 0.9 |
//! | `irs_gain_tx` / `irs_gain_tx_db` | 20 dB |
//! | `irs_gain_rx` / `irs_gain_rx_db` | 15 dB |
//! | `irs_position` | `100,100,6` |
//! | `irs_theta_t` / `irs_theta_t_deg`, `irs_theta_r` / `irs_theta_r_deg` | 45° |
//! | `irs_normal` (`x,y,z`, normalized at load; excludes the theta keys) | unset |
//! | `user_height` | 1.5 |
//! | `grid_resolution` | 1 |
//! | `objective` (`min` or `mean`) | `min` |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::coverage::CellExtent;
use crate::error::{config, Error, Result};
use crate::linkbudget::{
    db_to_linear, dbm_to_watts, wavelength, AngleMode, IrsPanel, Position3D, RadioEnvironment,
};
use crate::placement::Objective;
use crate::sinr::InterferenceSource;

pub const DEFAULT_CARRIER_FREQUENCY: f64 = 130e9;
pub const DEFAULT_NOISE_POWER: f64 = 1e-12;
pub const DEFAULT_MACRO_BS_HEIGHT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub env: RadioEnvironment,
    pub macro_extent: CellExtent,
    pub micro_extent: CellExtent,
    /// The macro BS, the only interferer seen by micro-cell users.
    pub macro_bs: InterferenceSource,
    pub micro_bs_position: Position3D,
    pub micro_power_conventional: f64,
    pub micro_power_irs: f64,
    pub panel: IrsPanel,
    pub user_height: f64,
    pub grid_resolution: f64,
    pub objective: Objective,
}

impl Default for Scenario {
    fn default() -> Self {
        let env = RadioEnvironment::new(DEFAULT_CARRIER_FREQUENCY, DEFAULT_NOISE_POWER, 3.0, 4.0)
            .expect("default radio environment is valid");
        let macro_extent = CellExtent::new(0.0, 0.0, 1000.0, 1000.0);
        let half_wave = env.wavelength() / 2.0;
        Self {
            env,
            macro_extent,
            micro_extent: CellExtent::new(0.0, 0.0, 200.0, 200.0),
            macro_bs: InterferenceSource {
                transmit_power: 50.0,
                position: macro_center(&macro_extent, DEFAULT_MACRO_BS_HEIGHT),
                pathloss_exponent: 4.0,
            },
            micro_bs_position: Position3D::new(0.0, 0.0, 5.0),
            micro_power_conventional: 10.0,
            micro_power_irs: 1.0,
            panel: IrsPanel {
                elements_m: 128,
                elements_n: 128,
                element_len_x: half_wave,
                element_len_y: half_wave,
                reflection_coefficient: 0.9,
                gain_tx: db_to_linear(20.0),
                gain_rx: db_to_linear(15.0),
                position: Position3D::new(100.0, 100.0, 6.0),
                angle_mode: AngleMode::Fixed {
                    theta_t: PI / 4.0,
                    theta_r: PI / 4.0,
                },
            },
            user_height: 1.5,
            grid_resolution: 1.0,
            objective: Objective::EdgeMin,
        }
    }
}

fn macro_center(extent: &CellExtent, height: f64) -> Position3D {
    let (x, y) = extent.center();
    Position3D::new(x, y, height)
}

impl Scenario {
    pub fn interferers(&self) -> &[InterferenceSource] {
        std::slice::from_ref(&self.macro_bs)
    }

    pub fn validate(&self) -> Result<()> {
        let named =
            |key: &str, r: Result<()>| r.map_err(|e| Error::Config(format!("{key}: {}", strip(e))));
        named("macro_extent", self.macro_extent.validate())?;
        named("micro_extent", self.micro_extent.validate())?;
        if !self.macro_extent.contains_extent(&self.micro_extent) {
            return config("micro_extent must lie inside macro_extent");
        }
        for (key, p) in [
            ("macro_bs_power", self.macro_bs.transmit_power),
            ("micro_power_conventional", self.micro_power_conventional),
            ("micro_power_irs", self.micro_power_irs),
        ] {
            if !(p > 0.0 && p.is_finite()) {
                return config(format!("{key} must be positive, got {p}"));
            }
        }
        named("macro_bs", self.macro_bs.validate())?;
        if !self.micro_bs_position.is_finite() {
            return config("micro_bs_position must be finite");
        }
        named("irs", self.panel.validate())?;
        if !self.user_height.is_finite() {
            return config("user_height must be finite");
        }
        let r = self.grid_resolution;
        if !(r > 0.0 && r.is_finite()) {
            return config(format!("grid_resolution must be positive, got {r}"));
        }
        if r > self.micro_extent.width.min(self.micro_extent.depth) {
            return config(format!(
                "grid_resolution {r} exceeds the micro cell's shorter side"
            ));
        }
        Ok(())
    }

    /// Renders every field explicitly, in a form [`parse_scenario`] reads back
    /// to an equal scenario.
    pub fn to_config_string(&self) -> String {
        let triple = |p: &Position3D| format!("{},{},{}", p.x, p.y, p.z);
        let extent =
            |e: &CellExtent| format!("{},{},{},{}", e.origin_x, e.origin_y, e.width, e.depth);
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line(
            "carrier_frequency",
            self.env.carrier_frequency().to_string(),
        );
        line("noise_power", self.env.noise_power().to_string());
        line(
            "pathloss_exponent_micro",
            self.env.pathloss_exponent_micro().to_string(),
        );
        line(
            "pathloss_exponent_macro",
            self.env.pathloss_exponent_macro().to_string(),
        );
        line("macro_extent", extent(&self.macro_extent));
        line("micro_extent", extent(&self.micro_extent));
        line("macro_bs_power", self.macro_bs.transmit_power.to_string());
        line("macro_bs_position", triple(&self.macro_bs.position));
        line("micro_bs_position", triple(&self.micro_bs_position));
        line(
            "micro_power_conventional",
            self.micro_power_conventional.to_string(),
        );
        line("micro_power_irs", self.micro_power_irs.to_string());
        line("irs_elements_m", self.panel.elements_m.to_string());
        line("irs_elements_n", self.panel.elements_n.to_string());
        line("irs_element_len_x", self.panel.element_len_x.to_string());
        line("irs_element_len_y", self.panel.element_len_y.to_string());
        line(
            "irs_reflection_coefficient",
            self.panel.reflection_coefficient.to_string(),
        );
        line("irs_gain_tx", self.panel.gain_tx.to_string());
        line("irs_gain_rx", self.panel.gain_rx.to_string());
        line("irs_position", triple(&self.panel.position));
        match self.panel.angle_mode {
            AngleMode::Fixed { theta_t, theta_r } => {
                line("irs_theta_t", theta_t.to_string());
                line("irs_theta_r", theta_r.to_string());
            }
            AngleMode::Geometric {
                unit_normal: [x, y, z],
            } => line("irs_normal", format!("{x},{y},{z}")),
        }
        line("user_height", self.user_height.to_string());
        line("grid_resolution", self.grid_resolution.to_string());
        line("objective", self.objective.to_string());
        out
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Domain(m) | Error::Config(m) => m,
        other => other.to_string(),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "carrier_frequency",
    "noise_power",
    "noise_power_dbm",
    "pathloss_exponent_micro",
    "pathloss_exponent_macro",
    "macro_extent",
    "micro_extent",
    "macro_bs_power",
    "macro_bs_position",
    "macro_bs_height",
    "micro_bs_position",
    "micro_power_conventional",
    "micro_power_irs",
    "irs_elements_m",
    "irs_elements_n",
    "irs_element_len_x",
    "irs_element_len_y",
    "irs_reflection_coefficient",
    "irs_gain_tx",
    "irs_gain_tx_db",
    "irs_gain_rx",
    "irs_gain_rx_db",
    "irs_position",
    "irs_theta_t",
    "irs_theta_t_deg",
    "irs_theta_r",
    "irs_theta_r_deg",
    "irs_normal",
    "user_height",
    "grid_resolution",
    "objective",
];

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if let Some((first, _)) = map.get(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            map.insert(key.to_string(), (line, value.trim().to_string()));
        }
        Ok(Self(map))
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn exclusive(&self, a: &str, b: &str) -> Result<()> {
        match (self.0.get(a), self.0.get(b)) {
            (Some(_), Some((line, _))) => Err(Error::Parse {
                line: *line,
                message: format!("`{a}` and `{b}` are mutually exclusive"),
            }),
            _ => Ok(()),
        }
    }

    fn list(&self, key: &str, len: usize) -> Result<Option<Vec<f64>>> {
        let Some((line, raw)) = self.0.get(key) else {
            return Ok(None);
        };
        let values = raw
            .split(',')
            .map(|part| part.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: *line,
                message: format!("`{key}`: {e} in `{raw}`"),
            })?;
        if values.len() != len {
            return Err(Error::Parse {
                line: *line,
                message: format!("`{key}` needs {len} comma-separated numbers, got `{raw}`"),
            });
        }
        Ok(Some(values))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        Ok(self.list(key, 1)?.map(|v| v[0]))
    }

    fn count(&self, key: &str) -> Result<Option<u32>> {
        let Some((line, raw)) = self.0.get(key) else {
            return Ok(None);
        };
        raw.parse::<u32>().map(Some).map_err(|e| Error::Parse {
            line: *line,
            message: format!("`{key}`: {e} in `{raw}`"),
        })
    }

    fn position(&self, key: &str) -> Result<Option<Position3D>> {
        Ok(self
            .list(key, 3)?
            .map(|v| Position3D::new(v[0], v[1], v[2])))
    }

    fn extent(&self, key: &str) -> Result<Option<CellExtent>> {
        Ok(self
            .list(key, 4)?
            .map(|v| CellExtent::new(v[0], v[1], v[2], v[3])))
    }

    /// A value given either linearly under `key` or in dB under `key_db`.
    fn linear_or_db(&self, key: &str, db_key: &str) -> Result<Option<f64>> {
        self.exclusive(key, db_key)?;
        match self.number(key)? {
            Some(v) => Ok(Some(v)),
            None => Ok(self.number(db_key)?.map(db_to_linear)),
        }
    }

    fn angle(&self, key: &str, deg_key: &str) -> Result<Option<f64>> {
        self.exclusive(key, deg_key)?;
        match self.number(key)? {
            Some(v) => Ok(Some(v)),
            None => Ok(self.number(deg_key)?.map(f64::to_radians)),
        }
    }
}

/// Parses config text into a validated scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let e = Entries::parse(text)?;
    let defaults = Scenario::default();

    e.exclusive("noise_power", "noise_power_dbm")?;
    let noise_power = match (e.number("noise_power")?, e.number("noise_power_dbm")?) {
        (Some(w), _) => w,
        (None, Some(dbm)) => dbm_to_watts(dbm),
        (None, None) => DEFAULT_NOISE_POWER,
    };
    let carrier_frequency = e
        .number("carrier_frequency")?
        .unwrap_or(DEFAULT_CARRIER_FREQUENCY);
    let alpha_micro = e
        .number("pathloss_exponent_micro")?
        .unwrap_or(defaults.env.pathloss_exponent_micro());
    let alpha_macro = e
        .number("pathloss_exponent_macro")?
        .unwrap_or(defaults.env.pathloss_exponent_macro());
    let env = RadioEnvironment::new(carrier_frequency, noise_power, alpha_micro, alpha_macro)
        .map_err(|err| Error::Config(format!("radio environment: {}", strip(err))))?;

    let macro_extent = e.extent("macro_extent")?.unwrap_or(defaults.macro_extent);
    let micro_extent = e.extent("micro_extent")?.unwrap_or(defaults.micro_extent);

    e.exclusive("macro_bs_position", "macro_bs_height")?;
    let macro_position = match e.position("macro_bs_position")? {
        Some(p) => p,
        None => macro_center(
            &macro_extent,
            e.number("macro_bs_height")?
                .unwrap_or(DEFAULT_MACRO_BS_HEIGHT),
        ),
    };
    let macro_bs = InterferenceSource {
        transmit_power: e
            .number("macro_bs_power")?
            .unwrap_or(defaults.macro_bs.transmit_power),
        position: macro_position,
        pathloss_exponent: alpha_macro,
    };

    let half_wave = wavelength(carrier_frequency)? / 2.0;
    let d = &defaults.panel;
    let angle_mode = if e.has("irs_normal") {
        for key in [
            "irs_theta_t",
            "irs_theta_t_deg",
            "irs_theta_r",
            "irs_theta_r_deg",
        ] {
            e.exclusive("irs_normal", key)?;
        }
        let v = e.list("irs_normal", 3)?.expect("checked above");
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return config("irs_normal must be a non-zero finite vector");
        }
        // Leave already-unit vectors untouched so dumped configs reload bit-exact.
        let scale = if (norm - 1.0).abs() <= 1e-12 {
            1.0
        } else {
            norm
        };
        AngleMode::Geometric {
            unit_normal: [v[0] / scale, v[1] / scale, v[2] / scale],
        }
    } else {
        let AngleMode::Fixed { theta_t, theta_r } = d.angle_mode else {
            unreachable!("default panel angles are fixed")
        };
        AngleMode::Fixed {
            theta_t: e
                .angle("irs_theta_t", "irs_theta_t_deg")?
                .unwrap_or(theta_t),
            theta_r: e
                .angle("irs_theta_r", "irs_theta_r_deg")?
                .unwrap_or(theta_r),
        }
    };
    let panel = IrsPanel {
        elements_m: e.count("irs_elements_m")?.unwrap_or(d.elements_m),
        elements_n: e.count("irs_elements_n")?.unwrap_or(d.elements_n),
        element_len_x: e.number("irs_element_len_x")?.unwrap_or(half_wave),
        element_len_y: e.number("irs_element_len_y")?.unwrap_or(half_wave),
        reflection_coefficient: e
            .number("irs_reflection_coefficient")?
            .unwrap_or(d.reflection_coefficient),
        gain_tx: e
            .linear_or_db("irs_gain_tx", "irs_gain_tx_db")?
            .unwrap_or(d.gain_tx),
        gain_rx: e
            .linear_or_db("irs_gain_rx", "irs_gain_rx_db")?
            .unwrap_or(d.gain_rx),
        position: e.position("irs_position")?.unwrap_or(d.position),
        angle_mode,
    };

    let objective = match e.0.get("objective") {
        Some((line, raw)) => raw.parse().map_err(|err| Error::Parse {
            line: *line,
            message: strip(err),
        })?,
        None => defaults.objective,
    };

    let scenario = Scenario {
        env,
        macro_extent,
        micro_extent,
        macro_bs,
        micro_bs_position: e
            .position("micro_bs_position")?
            .unwrap_or(defaults.micro_bs_position),
        micro_power_conventional: e
            .number("micro_power_conventional")?
            .unwrap_or(defaults.micro_power_conventional),
        micro_power_irs: e
            .number("micro_power_irs")?
            .unwrap_or(defaults.micro_power_irs),
        panel,
        user_height: e.number("user_height")?.unwrap_or(defaults.user_height),
        grid_resolution: e
            .number("grid_resolution")?
            .unwrap_or(defaults.grid_resolution),
        objective,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}
