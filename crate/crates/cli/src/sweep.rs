use std::io::Write;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use taebp_core::signal::{build_taebp_policy, IntersectionParams, LikelihoodModel};
use taebp_core::sim::{run, SimConfig};

/// Parses `a:b:n` (n evenly spaced points from a to b inclusive), a comma
/// list, or a single number.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("`{s}` is not a number"))
    };
    let values = if let Some((a, rest)) = text.split_once(':') {
        let (b, n) = rest
            .split_once(':')
            .with_context(|| format!("range `{text}` must be start:end:count"))?;
        let (a, b) = (parse(a)?, parse(b)?);
        let n: usize = n
            .trim()
            .parse()
            .with_context(|| format!("count in `{text}` is not a positive integer"))?;
        match n {
            0 => bail!("range `{text}` has no points"),
            1 => vec![a],
            _ => (0..n)
                .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        bail!("empty range `{text}`");
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub r: f64,
    pub theta: f64,
    pub theta_star: f64,
    pub p_star: f64,
    pub persuadable: bool,
    pub s_star: Option<f64>,
    pub b: Option<f64>,
    pub persuaded_fraction: f64,
    pub crossings: Option<u64>,
    pub collision_rate: Option<f64>,
    pub dc_rate: Option<f64>,
}

pub struct Grid {
    pub lambda: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Grid {
    /// Points in row-major order: λ outermost, θ innermost.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &l in &self.lambda {
            for &r in &self.r {
                for &t in &self.theta {
                    out.push((l, r, t));
                }
            }
        }
        out
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order.
/// With `sim` set, each point is also simulated with that configuration.
pub fn sweep(
    grid: &Grid,
    model: &LikelihoodModel,
    sim: Option<&SimConfig>,
) -> Result<Vec<SweepRow>> {
    let points = grid.points();
    if points.is_empty() {
        bail!("empty sweep grid");
    }
    points
        .par_iter()
        .map(|&(lambda, r, theta)| {
            let params = IntersectionParams::new(lambda, r, theta)?;
            let policy = build_taebp_policy(&params, model)?;
            let mut row = SweepRow {
                lambda,
                r,
                theta,
                theta_star: policy.theta_star,
                p_star: policy.p_star,
                persuadable: policy.persuadable,
                s_star: policy.s_star,
                b: policy.b,
                persuaded_fraction: policy.persuaded_fraction,
                crossings: None,
                collision_rate: None,
                dc_rate: None,
            };
            if let Some(base) = sim {
                let config = SimConfig {
                    params,
                    model: model.clone(),
                    ..base.clone()
                };
                let (m, _) = run(&config)?;
                row.crossings = Some(m.crossings);
                row.collision_rate = Some(m.collision_rate);
                row.dc_rate = Some(m.dc_rate);
            }
            Ok(row)
        })
        .collect()
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
