use serde::Serialize;

use orbitweave::weaving::{plan_weave, random_picks, weave_point, Certificate, WeavePlan};
use orbitweave::Error;

use super::{shift_of, Outcome};
use crate::config::{require, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{num, Sink};

#[derive(Serialize)]
struct ScheduleDoc<'a> {
    plan: &'a WeavePlan,
    certificate: Certificate,
}

#[derive(Serialize)]
struct Truncation {
    level: usize,
    length: u128,
    cap: u64,
    message: String,
}

pub fn run(cfg: &RunConfig, seed: u64, sink: &mut Sink) -> Result<Outcome> {
    let sec = require(&cfg.weave, "weave")?;
    let shift = shift_of(cfg)?;
    let params = sec.params(cfg.family_size, seed);
    let plan = match plan_weave(&shift, &sec.target, &params) {
        Ok(p) => p,
        Err(e @ Error::ScheduleOverflow { level, length, cap }) => {
            sink.json("truncation.json", &Truncation { level, length, cap, message: e.to_string() })?;
            return Ok(Outcome { summary: vec![format!("schedule truncated at level {level}")], failure: Some(e.into()) });
        }
        Err(e) => return Err(e.into()),
    };
    let certificate = plan.schedule.verify();
    let picks = random_picks(&plan, seed);
    let out = weave_point(&plan, &picks)?;

    sink.json("schedule.json", &ScheduleDoc { plan: &plan, certificate })?;
    sink.text("woven.rle", run_length(&out.point.prefix(out.total_length as usize)));
    let rows = out.convergence.iter().map(|c| vec![c.n.to_string(), num(c.distance)]).collect();
    sink.csv("convergence.csv", &[format!("band={}", num(out.band))], &["n", "distance"], rows)?;
    sink.json("weave.json", &out)?;

    let summary = vec![
        format!("length {}", out.total_length),
        format!("final distance {}", num(out.final_distance)),
        format!("max shadow deviation {}", num(out.max_deviation)),
    ];
    let failure = if !certificate.all() {
        Some(CliError::Core(Error::Invariant(format!("schedule certificate failed: {certificate:?}"))))
    } else if out.final_distance > sec.bound {
        Some(CliError::TargetMissed { distance: out.final_distance, bound: sec.bound })
    } else {
        None
    };
    Ok(Outcome { summary, failure })
}

/// One `symbol count` pair per line.
fn run_length(symbols: &[u8]) -> String {
    let mut out = format!("# length={}\n", symbols.len());
    let mut iter = symbols.iter().peekable();
    while let Some(&s) = iter.next() {
        let mut count = 1;
        while iter.next_if_eq(&&s).is_some() {
            count += 1;
        }
        out.push_str(&format!("{s} {count}\n"));
    }
    out
}
