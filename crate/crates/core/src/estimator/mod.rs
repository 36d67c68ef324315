//! Annealed estimation of warp parameters.
//!
//! Starting from the identity warp, the penalised L2 cost is minimised at a
//! sequence of shrinking bandwidths `hmax, hmax f, ...` (down to `hmin`);
//! each stage starts where the previous one stopped.

mod config;
mod cost;
mod lbfgs;
mod roughness;

use std::io::{self, Write};

pub use config::{
    table_parameters, EstimationConfig, EstimationMode, DEFAULT_ANNEAL_FACTOR, DEFAULT_HMAX,
    DEFAULT_HMIN, DEFAULT_INNER_MAX_ITERS, DEFAULT_INNER_TOL, DEFAULT_ROUGHNESS_RESOLUTION,
};
pub use cost::{cost, cost_gradient, CostBreakdown, CostModel};
pub use lbfgs::{minimize, LbfgsOutcome, LbfgsSettings, NonFinite, StopReason};
pub use roughness::{roughness, RoughnessOperator};

use crate::color::ColorSpace;
use crate::error::{Error, Result};
use crate::gmm::PairedGmms;
use crate::warp::{ControlGrid, RbfKind, WarpParameters};
use crate::Scalar;

/// Cost trajectory of one annealing stage.
#[derive(Debug, Clone)]
pub struct StageReport<T> {
    pub stage: usize,
    pub bandwidth: T,
    /// Cost at the stage start followed by every accepted iterate.
    pub costs: Vec<CostBreakdown<T>>,
    pub iterations: usize,
    pub stop: StopReason,
}

impl<T: Scalar> StageReport<T> {
    pub fn start_cost(&self) -> T {
        self.costs[0].total
    }

    pub fn end_cost(&self) -> T {
        self.costs.last().expect("non-empty").total
    }
}

#[derive(Debug, Clone)]
pub struct Estimate<T> {
    pub warp: WarpParameters<T>,
    pub stages: Vec<StageReport<T>>,
}

impl<T: Scalar> Estimate<T> {
    /// One line per recorded iterate:
    /// `stage h iteration total entropy cross roughness`.
    pub fn write_log(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# stage h iteration total entropy cross roughness")?;
        for s in &self.stages {
            for (i, c) in s.costs.iter().enumerate() {
                writeln!(
                    out,
                    "{} {:.6e} {} {:.12e} {:.12e} {:.12e} {:.12e}",
                    s.stage,
                    s.bandwidth.as_f64(),
                    i,
                    c.total.as_f64(),
                    c.entropy.as_f64(),
                    c.cross.as_f64(),
                    c.roughness.as_f64()
                )?;
            }
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }
}

/// Estimate warp parameters mapping the target mixture onto the palette.
pub fn estimate_theta<T: Scalar>(
    gmms: &PairedGmms<T>,
    cfg: &EstimationConfig<T>,
    grid: &ControlGrid<T>,
    rbf: RbfKind<T>,
    space: ColorSpace,
) -> Result<Estimate<T>> {
    if !rbf.is_valid() {
        return Err(Error::InvalidArgument(format!("invalid kernel {rbf}")));
    }
    let model = CostModel::new(gmms, grid, rbf, cfg)?;
    let mut warp = WarpParameters::identity(grid.clone(), rbf, space);
    let settings = LbfgsSettings::new(cfg.inner_max_iters, cfg.inner_tol);
    let mut stages = Vec::new();

    for (stage, h) in cfg.schedule().into_iter().enumerate() {
        let mut scratch = warp.clone();
        let outcome = minimize(warp.theta(), &settings, |theta| {
            scratch.set_theta(theta).expect("length preserved");
            let (c, g) = model.evaluate_with_gradient(&scratch, h);
            (c.total, g, c)
        })
        .map_err(|e| Error::NonFiniteCost {
            stage,
            bandwidth: h.as_f64(),
            iteration: e.iteration,
        })?;
        warp.set_theta(&outcome.x)?;
        stages.push(StageReport {
            stage,
            bandwidth: h,
            costs: outcome.trace,
            iterations: outcome.iterations,
            stop: outcome.stop,
        });
    }
    Ok(Estimate { warp, stages })
}
