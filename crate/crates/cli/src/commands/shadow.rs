use rand::Rng;
use serde::Serialize;

use orbitweave::rng;
use orbitweave::shadowing::{
    agreement_depth, perturbed_orbit, shadow_interval, shadow_shift, IntervalShadow, ModulusConfig, ShadowResult,
    DEFAULT_INTERVAL_CAP,
};
use orbitweave::{State, System};

use super::Outcome;
use crate::config::{require, RunConfig, ShadowMode, ShadowSection};
use crate::error::{config, Result};
use crate::output::{num, Sink};

#[derive(Serialize)]
#[serde(untagged)]
enum Single {
    Shift { delta: f64, length: usize, start: State, guarantee: Option<f64>, shadow: ShadowResult },
    Interval { delta: f64, epsilon: f64, length: usize, start: State, succeeded: bool, shadow: IntervalShadow },
}

pub fn run(cfg: &RunConfig, seed: u64, sink: &mut Sink) -> Result<Outcome> {
    let sec = require(&cfg.shadow, "shadow")?;
    let system = System::from_spec(&cfg.system)?;
    if sec.length < 2 {
        return Err(config("shadow length must be at least 2"));
    }
    match sec.mode {
        ShadowMode::Single => single(&system, sec, seed, sink),
        ShadowMode::Modulus => modulus(&system, sec, seed, sink),
    }
}

fn start_point(system: &System, sec: &ShadowSection, seed: u64) -> Result<State> {
    if let Some(x) = &sec.x0 {
        system.contains(x)?;
        return Ok(x.clone());
    }
    let mut g = rng::stream(seed, rng::tag(&[0x5354_4152]));
    Ok(match (system.shift(), system.domain()) {
        (Some(shift), _) => State::Word(shift.random_point(64, &mut g)),
        (None, Some((lo, hi))) => State::Point(g.random_range(lo..=hi)),
        (None, None) => unreachable!("every system is a shift or has a domain"),
    })
}

fn single(system: &System, sec: &ShadowSection, seed: u64, sink: &mut Sink) -> Result<Outcome> {
    let delta = sec.delta.ok_or_else(|| config("single-shot shadowing needs \"delta\""))?;
    let start = start_point(system, sec, seed)?;
    let po = perturbed_orbit(system, &start, sec.length, delta, seed)?;
    let (doc, line) = match system.shift() {
        Some(shift) => {
            let shadow = shadow_shift(shift, &po)?;
            let guarantee = agreement_depth(delta).map(|m| 0.5f64.powi(m as i32 + 1));
            let line = format!("max deviation {}", num(shadow.max_deviation));
            (Single::Shift { delta, length: sec.length, start, guarantee, shadow }, line)
        }
        None => {
            let epsilon = sec.epsilon.ok_or_else(|| config("interval shadowing needs \"epsilon\""))?;
            let shadow = shadow_interval(system, &po, epsilon, sec.cap.unwrap_or(DEFAULT_INTERVAL_CAP))?;
            let succeeded = shadow.succeeded(epsilon);
            let line = match shadow.result() {
                Some(r) => format!("max deviation {} (within epsilon: {succeeded})", num(r.max_deviation)),
                None => "no shadowing orbit found".to_string(),
            };
            (Single::Interval { delta, epsilon, length: sec.length, start, succeeded, shadow }, line)
        }
    };
    sink.json("shadow.json", &doc)?;
    Ok(Outcome::ok(vec![line]))
}

fn modulus(system: &System, sec: &ShadowSection, seed: u64, sink: &mut Sink) -> Result<Outcome> {
    let epsilon = sec.epsilon.ok_or_else(|| config("the modulus sweep needs \"epsilon\""))?;
    if sec.trials == 0 {
        return Err(config("trials must be positive"));
    }
    let mut mc = ModulusConfig::new(epsilon, sec.trials, sec.length, seed);
    if let Some(cap) = sec.cap {
        mc.cap = cap;
    }
    let report = mc.run(system)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.delta),
                r.successes.to_string(),
                r.trials.to_string(),
                r.resource_aborts.to_string(),
                num(r.rate()),
                r.passes().to_string(),
            ]
        })
        .collect();
    sink.csv(
        "modulus.csv",
        &[format!("epsilon={} delta_hat={}", num(epsilon), num(report.delta_hat))],
        &["delta", "successes", "trials", "resource_aborts", "rate", "passes"],
        rows,
    )?;
    sink.json("shadow.json", &report)?;
    Ok(Outcome::ok(vec![format!("delta_hat {}", num(report.delta_hat))]))
}
