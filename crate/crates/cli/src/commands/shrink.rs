use orbitweave::measures::TestFamily;
use orbitweave::variational::shrink_experiment;

use super::{shift_of, Outcome};
use crate::config::{require, RunConfig};
use crate::error::Result;
use crate::output::{num, Sink};

pub fn run(cfg: &RunConfig, seed: u64, sink: &mut Sink) -> Result<Outcome> {
    let sec = require(&cfg.shrink, "shrink")?;
    let shift = shift_of(cfg)?;
    let family = TestFamily::cylinders(&shift, cfg.family_size)?;
    let report = shrink_experiment(&shift, &sec.center, &family, &sec.delta_grid, sec.budget, seed)?;
    let rows = report
        .rows
        .iter()
        .map(|r| vec![num(r.delta), num(r.sup_hat), r.budget_used.to_string(), num(r.distance)])
        .collect();
    sink.csv(
        "shrink.csv",
        &[format!("h_nu={} h_top={}", num(report.h_nu), num(report.h_top))],
        &["delta", "sup_hat", "budget_used", "distance"],
        rows,
    )?;
    sink.json("shrink.json", &report)?;
    let profile: Vec<String> = report.rows.iter().map(|r| num(r.sup_hat)).collect();
    Ok(Outcome::ok(vec![format!("h_nu {}, profile {}", num(report.h_nu), profile.join(" "))]))
}
