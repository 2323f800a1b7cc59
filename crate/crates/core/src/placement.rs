//! Exhaustive IRS placement search scored by cell-edge SINR, and the
//! conventional-vs-IRS comparison at the winning placement.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::coverage::{CellExtent, CoverageGrid, EdgeStats};
use crate::error::{config, Error, Result};
use crate::linkbudget::Position3D;
use crate::scenario::Scenario;

/// Which cell-edge statistic a placement is scored by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    EdgeMin,
    EdgeMean,
}

impl Objective {
    pub fn extract(&self, stats: &EdgeStats) -> f64 {
        match self {
            Objective::EdgeMin => stats.min_db,
            Objective::EdgeMean => stats.mean_db,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Objective::EdgeMin),
            "mean" => Ok(Objective::EdgeMean),
            other => config(format!("objective must be `min` or `mean`, got `{other}`")),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::EdgeMin => "min",
            Objective::EdgeMean => "mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSpec {
    ExplicitList(Vec<Position3D>),
    GridSweep {
        extent: CellExtent,
        step: f64,
        height: f64,
    },
}

/// Sample positions along one axis. A step at least as long as the side
/// still yields both ends.
fn sweep_axis(origin: f64, len: f64, step: f64) -> Vec<f64> {
    if step >= len {
        return vec![origin, origin + len];
    }
    let ratio = len / step;
    let snapped = ratio.round();
    let n = if (ratio - snapped).abs() <= 1e-9 * snapped {
        snapped
    } else {
        ratio.floor()
    } as usize;
    (0..=n).map(|k| origin + k as f64 * step).collect()
}

pub fn enumerate_candidates(spec: &CandidateSpec) -> Result<Vec<Position3D>> {
    let candidates = match spec {
        CandidateSpec::ExplicitList(positions) => {
            if let Some(bad) = positions.iter().find(|p| !p.is_finite()) {
                return config(format!("candidate {bad} is not finite"));
            }
            positions.clone()
        }
        CandidateSpec::GridSweep {
            extent,
            step,
            height,
        } => {
            extent.validate()?;
            if !(*step > 0.0 && step.is_finite()) {
                return config(format!("sweep step must be positive, got {step}"));
            }
            if !height.is_finite() {
                return config("sweep height must be finite");
            }
            let xs = sweep_axis(extent.origin_x, extent.width, *step);
            let ys = sweep_axis(extent.origin_y, extent.depth, *step);
            ys.iter()
                .flat_map(|&y| xs.iter().map(move |&x| Position3D::new(x, y, *height)))
                .collect()
        }
    };
    if candidates.is_empty() {
        return config("candidate set is empty");
    }
    Ok(candidates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementResult {
    pub irs_position: Position3D,
    pub objective_db: f64,
    pub edge_stats: EdgeStats,
}

fn score(
    scenario: &Scenario,
    grid: &CoverageGrid,
    edge: &[usize],
    irs_position: Position3D,
    objective: Objective,
) -> Result<PlacementResult> {
    let panel = scenario.panel.relocated(irs_position);
    let values = grid.irs_values(scenario, &panel, scenario.micro_power_irs, edge)?;
    let edge_stats = EdgeStats::from_db_values(&values)?;
    Ok(PlacementResult {
        irs_position,
        objective_db: objective.extract(&edge_stats),
        edge_stats,
    })
}

/// Scores one IRS position by the cell-edge SINR of the IRS-assisted map.
pub fn evaluate_placement(
    scenario: &Scenario,
    irs_position: Position3D,
    objective: Objective,
) -> Result<PlacementResult> {
    let grid = CoverageGrid::new(scenario)?;
    score(
        scenario,
        &grid,
        &grid.edge_indices(),
        irs_position,
        objective,
    )
}

fn rank_order(a: &PlacementResult, b: &PlacementResult, center: (f64, f64)) -> Ordering {
    let from_center = |p: &Position3D| (p.x - center.0).hypot(p.y - center.1);
    b.objective_db
        .total_cmp(&a.objective_db)
        .then_with(|| from_center(&a.irs_position).total_cmp(&from_center(&b.irs_position)))
        .then_with(|| a.irs_position.x.total_cmp(&b.irs_position.x))
        .then_with(|| a.irs_position.y.total_cmp(&b.irs_position.y))
        .then_with(|| a.irs_position.z.total_cmp(&b.irs_position.z))
}

/// Best objective first; ties go to the position nearer the cell center in
/// the horizontal plane, then to the lexicographically smaller `(x, y, z)`.
pub fn rank_results(results: &mut [PlacementResult], micro_extent: &CellExtent) {
    let center = micro_extent.center();
    results.sort_by(|a, b| rank_order(a, b, center));
}

pub fn optimize_placement(
    scenario: &Scenario,
    spec: &CandidateSpec,
    objective: Objective,
) -> Result<Vec<PlacementResult>> {
    let candidates = enumerate_candidates(spec)?;
    let grid = CoverageGrid::new(scenario)?;
    let edge = grid.edge_indices();
    let mut results = candidates
        .par_iter()
        .map(|&p| score(scenario, &grid, &edge, p, objective))
        .collect::<Result<Vec<_>>>()?;
    rank_results(&mut results, &scenario.micro_extent);
    Ok(results)
}

pub fn write_ranked_csv<W: Write>(results: &[PlacementResult], out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "rank,x_m,y_m,z_m,objective_db,edge_min_db,edge_mean_db,edge_max_db"
    )?;
    for (rank, r) in results.iter().enumerate() {
        let p = r.irs_position;
        let s = r.edge_stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rank + 1,
            p.x,
            p.y,
            p.z,
            r.objective_db,
            s.min_db,
            s.mean_db,
            s.max_db
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub conventional_power: f64,
    pub irs_power: f64,
    pub irs_position: Position3D,
    pub conventional_edge: EdgeStats,
    pub irs_edge: EdgeStats,
    pub power_reduction_fraction: f64,
}

impl ComparisonReport {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let rows: [(&str, String); 15] = [
            ("conventional_power", self.conventional_power.to_string()),
            ("irs_power", self.irs_power.to_string()),
            (
                "power_reduction_fraction",
                self.power_reduction_fraction.to_string(),
            ),
            ("irs_x_m", self.irs_position.x.to_string()),
            ("irs_y_m", self.irs_position.y.to_string()),
            ("irs_z_m", self.irs_position.z.to_string()),
            (
                "conventional_edge_min_db",
                self.conventional_edge.min_db.to_string(),
            ),
            (
                "conventional_edge_mean_db",
                self.conventional_edge.mean_db.to_string(),
            ),
            (
                "conventional_edge_max_db",
                self.conventional_edge.max_db.to_string(),
            ),
            (
                "conventional_edge_points",
                self.conventional_edge.point_count.to_string(),
            ),
            ("irs_edge_min_db", self.irs_edge.min_db.to_string()),
            ("irs_edge_mean_db", self.irs_edge.mean_db.to_string()),
            ("irs_edge_max_db", self.irs_edge.max_db.to_string()),
            ("irs_edge_points", self.irs_edge.point_count.to_string()),
            (
                "edge_mean_gain_db",
                (self.irs_edge.mean_db - self.conventional_edge.mean_db).to_string(),
            ),
        ];
        writeln!(out, "key,value")?;
        for (key, value) in rows {
            writeln!(out, "{key},{value}")?;
        }
        Ok(())
    }
}

/// Conventional map at the conventional power against the IRS map at the
/// IRS power with the panel at `best`.
pub fn compare_models(scenario: &Scenario, best: &PlacementResult) -> Result<ComparisonReport> {
    let grid = CoverageGrid::new(scenario)?;
    let edge = grid.edge_indices();
    let conventional_power = scenario.micro_power_conventional;
    let irs_power = scenario.micro_power_irs;
    let conventional = grid.conventional_values(scenario, conventional_power, &edge)?;
    let panel = scenario.panel.relocated(best.irs_position);
    let irs = grid.irs_values(scenario, &panel, irs_power, &edge)?;
    Ok(ComparisonReport {
        conventional_power,
        irs_power,
        irs_position: best.irs_position,
        conventional_edge: EdgeStats::from_db_values(&conventional)?,
        irs_edge: EdgeStats::from_db_values(&irs)?,
        power_reduction_fraction: 1.0 - irs_power / conventional_power,
    })
}
