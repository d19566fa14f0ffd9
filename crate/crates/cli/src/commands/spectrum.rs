use orbitweave::variational::{attainable_range, spectrum};

use super::{shift_of, Outcome};
use crate::config::{require, RunConfig, MAX_SPECTRUM_DEPTH};
use crate::error::{config, Result};
use crate::output::{num, opt_num, Sink};

pub fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let sec = require(&cfg.spectrum, "spectrum")?;
    let shift = shift_of(cfg)?;
    let phi = sec.observable.build(shift.alphabet_size())?;
    if phi.depth() > MAX_SPECTRUM_DEPTH {
        return Err(config(format!("observable depth {} exceeds {MAX_SPECTRUM_DEPTH}", phi.depth())));
    }
    if sec.alpha_grid.is_empty() {
        return Err(config("alpha_grid is empty"));
    }
    let (lo, hi) = attainable_range(&shift, &phi)?;
    if let Some(a) = sec.alpha_grid.iter().find(|a| !(**a >= lo && **a <= hi)) {
        return Err(config(format!("alpha {a} outside the attainable range [{lo}, {hi}]")));
    }
    let r = spectrum(&shift, &phi, &sec.constraint, &sec.alpha_grid, sec.count_n)?;

    let mut rows: Vec<Vec<String>> = r
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.alpha),
                num(p.h_var),
                opt_num(p.h_count),
                p.n_count.map(|n| n.to_string()).unwrap_or_default(),
                opt_num(p.gap()),
                if p.one_sided { "one_sided".into() } else { String::new() },
            ]
        })
        .collect();
    let tag = if r.attained { "sup" } else { "sup_limit" };
    rows.push(vec![num(r.sup_alpha), num(r.sup), String::new(), String::new(), String::new(), tag.into()]);
    sink.csv(
        "spectrum.csv",
        &[format!("attainable_range={},{}", num(lo), num(hi))],
        &["alpha", "h_var", "h_count", "n_count", "gap", "note"],
        rows,
    )?;
    sink.json("spectrum.json", &r)?;
    Ok(Outcome::ok(vec![
        format!("{} grid points", r.points.len()),
        format!("sup {} at alpha {}{}", num(r.sup), num(r.sup_alpha), if r.attained { "" } else { " (one-sided limit)" }),
    ]))
}
