use orbitweave::entropy::katok_entropy;

use super::{shift_of, Outcome};
use crate::config::{require, RunConfig};
use crate::output::{num, Sink};
use crate::error::Result;

pub fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let sec = require(&cfg.katok, "katok")?;
    let shift = shift_of(cfg)?;
    sec.measure.require_supported_on(&shift)?;
    let est = katok_entropy(&shift, &sec.measure, sec.q, sec.delta, &sec.n_grid)?;
    let reference = sec.measure.entropy();
    let rows = est.diagnostics.iter().map(|d| vec![d.n.to_string(), d.count.to_string(), num(d.rate)]).collect();
    sink.csv(
        "katok.csv",
        &[format!("markov_entropy={} q={} delta={}", num(reference), sec.q, num(sec.delta))],
        &["n", "count", "rate"],
        rows,
    )?;
    Ok(Outcome::ok(vec![format!("rate {} at n = {} (measure entropy {})", num(est.value), est.n_used, num(reference))]))
}
