//! Grid sampling of the micro cell, SINR maps for both link models, and
//! cell-edge statistics.
//!
//! Grid points are laid out row-major: `j` (y) is the outer index and `i`
//! (x) the inner one, so point `(i, j)` lives at `j * nx + i`. Every point is
//! evaluated independently; maps come out bit-identical whatever the rayon
//! pool size is.

use std::io::Write;

use log::warn;
use rayon::prelude::*;

use crate::error::{config, domain, Result};
use crate::linkbudget::{
    conventional_rx_power, db_to_linear, distance, irs_rx_power, linear_to_db, ConventionalLink,
    IrsPanel, Position3D,
};
use crate::scenario::Scenario;
use crate::sinr::{interference_power, sinr};

/// Axis-aligned rectangle on the ground plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellExtent {
    pub origin_x: f64,
    pub origin_y: f64,
    pub width: f64,
    pub depth: f64,
}

impl CellExtent {
    pub const fn new(origin_x: f64, origin_y: f64, width: f64, depth: f64) -> Self {
        Self {
            origin_x,
            origin_y,
            width,
            depth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return config("extent origin must be finite");
        }
        if !(self.width > 0.0
            && self.depth > 0.0
            && self.width.is_finite()
            && self.depth.is_finite())
        {
            return config(format!(
                "extent must have positive width and depth, got {} x {}",
                self.width, self.depth
            ));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.origin_x + self.width / 2.0,
            self.origin_y + self.depth / 2.0,
        )
    }

    pub fn contains_extent(&self, inner: &CellExtent) -> bool {
        inner.origin_x >= self.origin_x
            && inner.origin_y >= self.origin_y
            && inner.origin_x + inner.width <= self.origin_x + self.width
            && inner.origin_y + inner.depth <= self.origin_y + self.depth
    }

    pub fn contains_point(&self, p: &Position3D) -> bool {
        p.x >= self.origin_x
            && p.y >= self.origin_y
            && p.x <= self.origin_x + self.width
            && p.y <= self.origin_y + self.depth
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            origin_x: self.origin_x + dx,
            origin_y: self.origin_y + dy,
            ..*self
        }
    }
}

/// Number of lattice samples along each axis, `floor(len / resolution) + 1`.
pub fn lattice_dims(extent: &CellExtent, resolution: f64) -> Result<(usize, usize)> {
    extent.validate()?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return config(format!(
            "grid resolution must be positive, got {resolution}"
        ));
    }
    if resolution > extent.width.min(extent.depth) {
        return config(format!(
            "grid resolution {resolution} exceeds the smaller extent side {}",
            extent.width.min(extent.depth)
        ));
    }
    Ok((
        axis_count(extent.width, resolution),
        axis_count(extent.depth, resolution),
    ))
}

fn axis_count(len: f64, step: f64) -> usize {
    // Absorb ratios like 0.3 / 0.1 = 2.9999999999999996.
    let ratio = len / step;
    let snapped = ratio.round();
    let whole = if (ratio - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped
    } else {
        ratio.floor()
    };
    whole as usize + 1
}

fn lattice_point(
    extent: &CellExtent,
    resolution: f64,
    user_height: f64,
    i: usize,
    j: usize,
) -> Position3D {
    Position3D::new(
        extent.origin_x + i as f64 * resolution,
        extent.origin_y + j as f64 * resolution,
        user_height,
    )
}

pub fn build_grid(
    extent: &CellExtent,
    resolution: f64,
    user_height: f64,
) -> Result<Vec<Position3D>> {
    let (nx, ny) = lattice_dims(extent, resolution)?;
    Ok((0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| lattice_point(extent, resolution, user_height, i, j))
        .collect())
}

fn perimeter_indices(nx: usize, ny: usize) -> Vec<usize> {
    (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .filter(|&(i, j)| i == 0 || j == 0 || i == nx - 1 || j == ny - 1)
        .map(|(i, j)| j * nx + i)
        .collect()
}

/// Lattice points on the outer ring of the grid, in grid order.
pub fn cell_edge_points(
    extent: &CellExtent,
    resolution: f64,
    user_height: f64,
) -> Result<Vec<Position3D>> {
    let (nx, ny) = lattice_dims(extent, resolution)?;
    Ok(perimeter_indices(nx, ny)
        .into_iter()
        .map(|k| lattice_point(extent, resolution, user_height, k % nx, k / nx))
        .collect())
}

/// SINR in dB over a rectangular lattice. Unreachable points hold `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrMap {
    extent: CellExtent,
    resolution: f64,
    user_height: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl SinrMap {
    pub fn extent(&self) -> &CellExtent {
        &self.extent
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn user_height(&self) -> f64 {
        self.user_height
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn position(&self, i: usize, j: usize) -> Position3D {
        lattice_point(&self.extent, self.resolution, self.user_height, i, j)
    }

    /// Flat index of a lattice point, or `None` if `p` is off the lattice.
    pub fn index_of(&self, p: &Position3D) -> Option<usize> {
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let snap = |coord: f64, origin: f64, n: usize| -> Option<usize> {
            let k = ((coord - origin) / self.resolution).round();
            if k < 0.0 || k >= n as f64 {
                return None;
            }
            let k = k as usize;
            near(origin + k as f64 * self.resolution, coord).then_some(k)
        };
        if !near(p.z, self.user_height) {
            return None;
        }
        let i = snap(p.x, self.extent.origin_x, self.nx)?;
        let j = snap(p.y, self.extent.origin_y, self.ny)?;
        Some(j * self.nx + i)
    }

    /// Writes `x_m,y_m,sinr_db` rows in grid order.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x_m,y_m,sinr_db")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.position(i, j);
                writeln!(out, "{},{},{}", p.x, p.y, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStats {
    pub min_db: f64,
    /// Mean of the linear SINR, expressed in dB.
    pub mean_db: f64,
    pub max_db: f64,
    pub point_count: usize,
}

impl EdgeStats {
    pub fn from_db_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return domain("edge statistics need at least one point");
        }
        let min_db = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max_db = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total = neumaier_sum(values.iter().map(|&db| db_to_linear(db)));
        let mean_linear = total / values.len() as f64;
        let mean_db = if mean_linear > 0.0 {
            linear_to_db(mean_linear)
        } else {
            f64::NEG_INFINITY
        };
        Ok(Self {
            min_db,
            // dB -> linear -> dB can drift an ulp past the extremes.
            mean_db: mean_db.clamp(min_db, max_db),
            max_db,
            point_count: values.len(),
        })
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

pub fn edge_stats(map: &SinrMap, edge: &[Position3D]) -> Result<EdgeStats> {
    let values = edge
        .iter()
        .map(|p| match map.index_of(p) {
            Some(k) => Ok(map.values[k]),
            None => domain(format!("edge point {p} is not on the map lattice")),
        })
        .collect::<Result<Vec<_>>>()?;
    EdgeStats::from_db_values(&values)
}

/// Sample points of a scenario's micro cell with the interference seen at
/// each one. Building it once lets many maps share the interference sweep.
#[derive(Debug, Clone)]
pub struct CoverageGrid {
    extent: CellExtent,
    resolution: f64,
    user_height: f64,
    nx: usize,
    ny: usize,
    points: Vec<Position3D>,
    interference: Vec<f64>,
    noise_power: f64,
}

impl CoverageGrid {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let extent = scenario.micro_extent;
        let resolution = scenario.grid_resolution;
        let user_height = scenario.user_height;
        let (nx, ny) = lattice_dims(&extent, resolution)?;
        let points = build_grid(&extent, resolution, user_height)?;
        let sources = scenario.interferers();
        let env = scenario.env;
        let interference = points
            .par_iter()
            .map(|p| {
                if sources.iter().any(|s| distance(&s.position, p) == 0.0) {
                    // Coincident with an interferer: SINR collapses to the sentinel.
                    return Ok(f64::INFINITY);
                }
                interference_power(p, sources, &env)
            })
            .collect::<Result<Vec<_>>>()?;
        let singular = interference.iter().filter(|v| v.is_infinite()).count();
        if singular > 0 {
            warn!("{singular} grid point(s) coincide with an interferer; marked -inf");
        }
        Ok(Self {
            extent,
            resolution,
            user_height,
            nx,
            ny,
            points,
            interference,
            noise_power: env.noise_power(),
        })
    }

    pub fn points(&self) -> &[Position3D] {
        &self.points
    }

    pub fn edge_indices(&self) -> Vec<usize> {
        perimeter_indices(self.nx, self.ny)
    }

    fn map_from(&self, values: Vec<f64>) -> SinrMap {
        SinrMap {
            extent: self.extent,
            resolution: self.resolution,
            user_height: self.user_height,
            nx: self.nx,
            ny: self.ny,
            values,
        }
    }

    fn sinr_db(&self, k: usize, signal: f64) -> Result<f64> {
        Ok(sinr(signal, self.interference[k], self.noise_power)?.sinr_db)
    }

    fn conventional_at(&self, scenario: &Scenario, power: f64, k: usize) -> Result<Option<f64>> {
        let user = self.points[k];
        if distance(&scenario.micro_bs_position, &user) == 0.0 {
            return Ok(None);
        }
        let link = ConventionalLink {
            transmit_power: power,
            transmitter: scenario.micro_bs_position,
            receiver: user,
            pathloss_exponent: scenario.env.pathloss_exponent_micro(),
        };
        let signal = conventional_rx_power(&link, &scenario.env)?;
        self.sinr_db(k, signal).map(Some)
    }

    fn irs_at(
        &self,
        scenario: &Scenario,
        panel: &IrsPanel,
        power: f64,
        k: usize,
    ) -> Result<Option<f64>> {
        let user = self.points[k];
        if distance(&panel.position, &user) == 0.0 {
            return Ok(None);
        }
        let signal = irs_rx_power(
            power,
            panel,
            &scenario.micro_bs_position,
            &user,
            &scenario.env,
        )?;
        self.sinr_db(k, signal).map(Some)
    }

    fn collect(
        &self,
        indices: &[usize],
        eval: impl Fn(usize) -> Result<Option<f64>> + Sync,
    ) -> Result<Vec<f64>> {
        let values = indices
            .par_iter()
            .map(|&k| eval(k))
            .collect::<Result<Vec<_>>>()?;
        let singular = values.iter().filter(|v| v.is_none()).count();
        if singular > 0 {
            warn!("{singular} grid point(s) at zero distance from a transmitter or panel; marked -inf");
        }
        Ok(values
            .into_iter()
            .map(|v| v.unwrap_or(f64::NEG_INFINITY))
            .collect())
    }

    pub fn conventional_map(&self, scenario: &Scenario, power: f64) -> Result<SinrMap> {
        let all: Vec<usize> = (0..self.points.len()).collect();
        let values = self.collect(&all, |k| self.conventional_at(scenario, power, k))?;
        Ok(self.map_from(values))
    }

    pub fn irs_map(&self, scenario: &Scenario, panel: &IrsPanel, power: f64) -> Result<SinrMap> {
        check_panel_clear_of_bs(scenario, panel)?;
        let all: Vec<usize> = (0..self.points.len()).collect();
        let values = self.collect(&all, |k| self.irs_at(scenario, panel, power, k))?;
        Ok(self.map_from(values))
    }

    pub fn conventional_values(
        &self,
        scenario: &Scenario,
        power: f64,
        indices: &[usize],
    ) -> Result<Vec<f64>> {
        self.collect(indices, |k| self.conventional_at(scenario, power, k))
    }

    /// IRS-assisted SINR (dB) at a subset of grid points, same values as the
    /// corresponding entries of [`CoverageGrid::irs_map`].
    pub fn irs_values(
        &self,
        scenario: &Scenario,
        panel: &IrsPanel,
        power: f64,
        indices: &[usize],
    ) -> Result<Vec<f64>> {
        check_panel_clear_of_bs(scenario, panel)?;
        self.collect(indices, |k| self.irs_at(scenario, panel, power, k))
    }
}

fn check_panel_clear_of_bs(scenario: &Scenario, panel: &IrsPanel) -> Result<()> {
    if distance(&scenario.micro_bs_position, &panel.position) == 0.0 {
        return domain(format!(
            "IRS at {} coincides with the micro BS",
            panel.position
        ));
    }
    Ok(())
}

/// Direct-path SINR map at the scenario's conventional transmit power.
pub fn sinr_map_conventional(scenario: &Scenario) -> Result<SinrMap> {
    CoverageGrid::new(scenario)?.conventional_map(scenario, scenario.micro_power_conventional)
}

/// Cascade-only SINR map at the scenario's IRS-mode transmit power.
pub fn sinr_map_irs(scenario: &Scenario) -> Result<SinrMap> {
    CoverageGrid::new(scenario)?.irs_map(scenario, &scenario.panel, scenario.micro_power_irs)
}
