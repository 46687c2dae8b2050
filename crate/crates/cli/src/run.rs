use std::f64::consts::PI;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde_json::json;

use evospec_core::evospec::GridEstimator;
use evospec_core::simulate::{model_catalog, power_variant, BumpSign, ModelId, ModelSpec};
use evospec_core::stattest::{log_table, mc_study, psr_test, rs_test, McConfig, McSummary, TestReport};
use evospec_core::taper::{compute_dpss, l1_concentration, TaperSpec};
use evospec_core::tradeoff::{
    characteristic_width, odd_lengths, write_curve_csv, write_profile_csv, Coupling, Formula, LogBase, Tradeoff,
};
use evospec_core::{simulate, TimeSeries};

use crate::input::{load_csv, log_diff};
use crate::output::Sink;
use crate::{
    Cli, Command, CouplingArg, DpssArgs, EstimateArgs, Format, FormulaArg, LogBaseArg, McArgs, Method, Sign, SimParams,
    SimulateArgs, Source, TestArgs, TradeoffArgs, Transform,
};

/// Most window lengths a tradeoff curve uses when no step is given.
const DEFAULT_CURVE_POINTS: usize = 64;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dpss(a) => dpss(a),
        Command::Estimate(a) => estimate(a),
        Command::Test(a) => test(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Mc(a) => mc(a),
        Command::Tradeoff(a) => tradeoff(a),
    }
}

fn json_bytes(buf: &mut Vec<u8>, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *buf, value)?;
    buf.push(b'\n');
    Ok(())
}

fn unsupported(command: &str, format: Format) -> anyhow::Error {
    anyhow::anyhow!("{command} does not support --format {format:?}")
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("--alpha must lie in (0, 1), got {alpha}");
    }
    Ok(())
}

fn bump_sign(sign: Sign) -> BumpSign {
    match sign {
        Sign::Plus => BumpSign::Plus,
        Sign::Minus => BumpSign::Minus,
    }
}

fn model_spec(id: ModelId, modulate: Option<Sign>) -> ModelSpec {
    match modulate {
        Some(sign) => power_variant(id, bump_sign(sign)),
        None => model_catalog(id),
    }
}

fn load_series(source: &Source, sim: &SimParams, transform: Transform) -> Result<TimeSeries> {
    let x = match (&source.input, &source.model) {
        (Some(path), None) => load_csv(path)?,
        (None, Some(model)) => {
            let id: ModelId = model.parse()?;
            simulate(&model_spec(id, sim.modulate), sim.t, sim.seed)?
        }
        _ => bail!("exactly one of --input and --model is required"),
    };
    match transform {
        Transform::None => Ok(x),
        Transform::Logdiff => log_diff(&x),
    }
}

fn dpss(a: DpssArgs) -> Result<()> {
    let w = a.w.unwrap_or((a.k + 1) as f64 * PI / a.n as f64);
    let ts = compute_dpss(TaperSpec::new(a.n, w, a.k)?);
    let sink = Sink::new(a.out.output);
    match a.format {
        Format::Json => {
            let value = json!({
                "N": a.n,
                "W": w,
                "K": a.k,
                "eigenvalues": ts.eigenvalues(),
                "l1_concentration": l1_concentration(&ts),
                "widths": ts.widths(),
                "tapers": ts.tapers(),
            });
            sink.emit(|buf| json_bytes(buf, &value))
        }
        Format::Csv => sink.emit(|buf| Ok(ts.write_cache(buf)?)),
        Format::Text => sink.emit(|buf| {
            writeln!(buf, "N = {}, W = {w}, K = {}", a.n, a.k)?;
            for (k, (l, b)) in ts.eigenvalues().iter().zip(ts.widths()).enumerate() {
                writeln!(buf, "taper {k}: eigenvalue {l:.12}, width {b:.6}")?;
            }
            writeln!(buf, "L1 distance to ideal window: {:.6e}", l1_concentration(&ts))?;
            Ok(())
        }),
    }
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let x = load_series(&a.source, &a.sim, a.transform)?;
    let est = GridEstimator::new(x.len(), a.grid.k, a.grid.blocks, a.grid.buffer_frac)?.estimate(&x)?;
    let sink = Sink::new(a.out.output);
    match a.format {
        Format::Csv => sink.emit(|buf| Ok(est.write_csv(buf)?)),
        Format::Json => sink.emit(|buf| json_bytes(buf, &json!({ "grid": est.grid(), "values": est.values() }))),
        Format::Text => Err(unsupported("estimate", a.format)),
    }
}

fn test(a: TestArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let x = load_series(&a.source, &a.sim, a.transform)?;
    let est = GridEstimator::new(x.len(), a.grid.k, a.grid.blocks, a.grid.buffer_frac)?.estimate(&x)?;
    let table = log_table(&est)?;
    let mut reports = Vec::new();
    if matches!(a.method, Method::Psr | Method::Both) {
        reports.push(TestReport::psr(&psr_test(&table, a.alpha)?, &table));
    }
    if matches!(a.method, Method::Rs | Method::Both) {
        reports.push(TestReport::rs(&rs_test(&table, a.alpha)?, &table));
    }
    let sink = Sink::new(a.out.output);
    match a.format {
        Format::Json if reports.len() == 1 => sink.emit(|buf| json_bytes(buf, &reports[0])),
        Format::Json => sink.emit(|buf| json_bytes(buf, &reports)),
        Format::Text => sink.emit(|buf| {
            for r in &reports {
                writeln!(buf, "{:?}: {:?} at alpha = {}", r.test, r.decision, r.alpha)?;
                for (name, v) in &r.statistics {
                    writeln!(buf, "  {name} = {v:.6}")?;
                }
                for (name, v) in &r.thresholds {
                    writeln!(buf, "  threshold {name} = {v:.6} (df {})", r.df.get(name).copied().unwrap_or(0))?;
                }
            }
            Ok(())
        }),
        Format::Csv => Err(unsupported("test", a.format)),
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let id: ModelId = a.model.parse()?;
    let x = simulate(&model_spec(id, a.sim.modulate), a.sim.t, a.sim.seed)?;
    let sink = Sink::new(a.out.output);
    match a.format {
        Format::Csv => sink.emit(|buf| {
            writeln!(buf, "t,x")?;
            for (i, v) in x.values().iter().enumerate() {
                writeln!(buf, "{},{v:e}", x.origin() + i as i64)?;
            }
            Ok(())
        }),
        Format::Json => sink.emit(|buf| json_bytes(buf, &x)),
        Format::Text => Err(unsupported("simulate", a.format)),
    }
}

fn parse_models(list: &str, modulated: bool) -> Result<Vec<ModelId>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(if modulated { ModelId::ALL.to_vec() } else { ModelId::STATIONARY.to_vec() });
    }
    list.split(',').map(|s| Ok(s.parse::<ModelId>()?)).collect()
}

fn mc(a: McArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let models = parse_models(&a.model, a.sim.modulate.is_some())?;
    let cfg = McConfig {
        replicates: a.m,
        len: a.sim.t,
        alpha: a.alpha,
        seed: a.sim.seed,
        k: a.grid.k,
        blocks: a.grid.blocks,
        buffer_frac: a.grid.buffer_frac,
    };
    let mut results: Vec<McSummary> = Vec::new();
    for id in models {
        let spec = model_spec(id, a.sim.modulate);
        let label = match spec.envelope {
            evospec_core::Envelope::None => id.to_string(),
            _ => format!("{id} (modulated)"),
        };
        log::info!("model {label}: {} replicates", cfg.replicates);
        results.push(mc_study(&spec, &label, &cfg).with_context(|| format!("model {id}"))?);
    }
    let sink = Sink::new(a.out.output);
    match a.format {
        Format::Json => sink.emit(|buf| json_bytes(buf, &results)),
        Format::Text | Format::Csv => sink.emit(|buf| {
            let sep = if a.format == Format::Csv { "," } else { "\t" };
            writeln!(
                buf,
                "{}",
                ["model", "psr_rate", "psr_ci_low", "psr_ci_high", "rs_rate", "rs_ci_low", "rs_ci_high", "excluded"]
                    .join(sep)
            )?;
            for r in &results {
                let row = [
                    r.model.clone(),
                    format!("{:.4}", r.psr.rate),
                    format!("{:.4}", r.psr.ci_low),
                    format!("{:.4}", r.psr.ci_high),
                    format!("{:.4}", r.rs.rate),
                    format!("{:.4}", r.rs.ci_low),
                    format!("{:.4}", r.rs.ci_high),
                    r.excluded.to_string(),
                ];
                writeln!(buf, "{}", row.join(sep))?;
            }
            Ok(())
        }),
    }
}

/// Parses `lo:hi[:step]` into odd window lengths.
pub(crate) fn parse_lengths(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad number `{s}` in --Ns {spec}"));
    let (lo, hi, step) = match parts.as_slice() {
        [lo, hi] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            (lo, hi, hi.saturating_sub(lo).div_ceil(DEFAULT_CURVE_POINTS).max(2))
        }
        [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
        _ => bail!("--Ns expects lo:hi or lo:hi:step, got `{spec}`"),
    };
    let ns = odd_lengths(lo, hi, step)?;
    if ns.is_empty() {
        bail!("--Ns {spec} contains no odd length of at least 5");
    }
    Ok(ns)
}

fn tradeoff(a: TradeoffArgs) -> Result<()> {
    let model = Tradeoff::new(Some(characteristic_width(a.a)?))?
        .with_coupling(match a.coupling {
            CouplingArg::Minimal => Coupling::Minimal,
            CouplingArg::Shifted => Coupling::Shifted,
        })
        .with_log_base(match a.log_base {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::Natural => LogBase::Natural,
        });
    let formula = match a.formula {
        FormulaArg::Full => Formula::Full,
        FormulaArg::Reduced => Formula::Reduced,
    };
    if !(a.penalty_weight >= 0.0 && a.penalty_weight.is_finite()) {
        bail!("--penalty-weight must be non-negative, got {}", a.penalty_weight);
    }
    let sink = Sink::new(a.out.output);
    if let Some(n) = a.sweep_k {
        let points = model.k_profile(n, a.penalty_weight)?;
        return sink.emit(|buf| Ok(write_profile_csv(&points, buf)?));
    }
    let ns = parse_lengths(&a.ns)?;
    let points = if a.penalized {
        if formula != Formula::Full {
            bail!("--penalized applies to the full formula only");
        }
        ns.iter().map(|&n| model.penalized_k(n, a.penalty_weight)).collect::<Result<Vec<_>, _>>()?
    } else {
        let mut pts = model.curve(&ns, formula)?;
        pts.iter_mut().for_each(|p| p.penalty = a.penalty_weight * p.k as f64);
        pts
    };
    sink.emit(|buf| Ok(write_curve_csv(&points, formula, buf)?))
}
