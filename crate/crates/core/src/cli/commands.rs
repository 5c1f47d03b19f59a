use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{slope_text, Artifacts, Command, Plot, Restriction, Series, Settings, SolverChoice, Table};
use crate::bounds::{self, fit_scaling_exponent, BoundReport};
use crate::error::{invalid, Error, Result};
use crate::gf2::{min_rank_sum, verify_row_reduced, ColumnFamily, RankSumQuery, SearchMode, Target};
use crate::graphs::{self, DecodingGraph, Solver, EXHAUSTIVE_VERTEX_LIMIT};
use crate::mesh::{
    simulate_decode_traced, simulate_encode_traced, write_trace, ConflictPolicy, MeshConfig, SimReport, SIM_CSV_HEADER,
};
use crate::polarcode::{construct_zero_frozen, encode, sc_decode, simulate_block_error, ErasureWord, PolarCode};

const DEFAULT_RATE: f64 = 0.5;
const DEFAULT_EPS: f64 = 0.5;
const DEFAULT_PE_TRIALS: u64 = 1000;

fn nonempty_levels(s: &Settings, command: Command) -> Result<Vec<u32>> {
    let levels = s.levels()?;
    if levels.is_empty() {
        return Err(Error::EmptySweep(format!("{} was given no levels", command.name())));
    }
    Ok(levels)
}

fn first_eps(s: &Settings) -> f64 {
    s.eps.as_ref().and_then(|e| e.first().copied()).unwrap_or(DEFAULT_EPS)
}

/// Zero-frozen code with `round(rate·N)` information bits, designed for `eps`.
fn code_for(n: u32, rate: f64, eps: f64) -> Result<PolarCode> {
    if !(0.0..=1.0).contains(&rate) {
        return invalid(format!("rate must lie in [0, 1], got {rate}"));
    }
    let size = 1usize << n;
    construct_zero_frozen(n, eps, (rate * size as f64).round() as usize)
}

fn mesh_for(n: u32, s: &Settings) -> Result<MeshConfig> {
    let mut cfg = MeshConfig::new(n)?;
    cfg.t_route = s.t_route.unwrap_or(cfg.t_route);
    cfg.t_parity = s.t_parity.unwrap_or(cfg.t_parity);
    cfg.node_area = s.node_area.unwrap_or(cfg.node_area);
    cfg.conflict_policy = ConflictPolicy::Record;
    cfg.validate()?;
    Ok(cfg)
}

/// Stream `(seed, n, run)`: info bits first, then one uniform per symbol.
fn draw_run(code: &PolarCode, seed: u64, run: u64, eps: f64) -> (Vec<u8>, ErasureWord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(code.level()) << 40) | run);
    let info: Vec<u8> = (0..code.info_len()).map(|_| rng.gen::<bool>() as u8).collect();
    let x = encode(code, &info).expect("info length matches code");
    let draws: Vec<f64> = (0..x.len()).map(|_| rng.gen::<f64>()).collect();
    let y = ErasureWord::erase(&x, |i| draws[i] < eps);
    (info, y)
}

fn sim_table() -> Table {
    Table::new(SIM_CSV_HEADER)
}

fn sim_row(r: &SimReport) -> Vec<String> {
    r.csv_row().split(',').map(str::to_owned).collect()
}

pub(super) fn verify_ranks(s: &Settings) -> Result<Artifacts> {
    let levels = nonempty_levels(s, Command::VerifyRanks)?;
    let family = match s.restriction.unwrap_or(Restriction::Balanced) {
        Restriction::Balanced => ColumnFamily::BalancedColumns,
        Restriction::Unrestricted => ColumnFamily::Unrestricted,
    };
    let mode = match s.trials {
        Some(samples) => SearchMode::Sampled {
            samples,
            seed: s.seed_for(Command::VerifyRanks)?,
        },
        None => SearchMode::Exhaustive,
    };
    let mut art = Artifacts::default();
    let mut ranks = Table::new("n,target,family,mode,pairs_checked,min_rank_sum,bound,bound_holds,violations,witness_r,witness_c");
    let mut reduced = Table::new("n,target,pairs_checked,reductions_checked,violations,min_margin");
    for &n in &levels {
        for target in [Target::F, Target::G] {
            let mut q = RankSumQuery::new(n, target, family, mode);
            if s.long_run {
                q = q.long_run();
            }
            let r = min_rank_sum(&q)?;
            if family == ColumnFamily::BalancedColumns && !r.bound_holds {
                art.failures
                    .push(format!("{} at n={n}: rank sum {} < {}", target.name(), r.min_rank_sum, r.bound));
            }
            ranks.push(vec![
                n.to_string(),
                target.name().into(),
                family.name().into(),
                mode.name().into(),
                r.pairs_checked.to_string(),
                r.min_rank_sum.to_string(),
                r.bound.to_string(),
                r.bound_holds.to_string(),
                r.violations.to_string(),
                r.witness.0.to_string(),
                r.witness.1.to_string(),
            ]);
            if family == ColumnFamily::BalancedColumns && mode == SearchMode::Exhaustive && n <= 3 {
                let rr = verify_row_reduced(n, target)?;
                if rr.violations > 0 {
                    art.failures
                        .push(format!("{} at n={n}: {} row-reduced violations", target.name(), rr.violations));
                }
                reduced.push(vec![
                    n.to_string(),
                    target.name().into(),
                    rr.pairs_checked.to_string(),
                    rr.reductions_checked.to_string(),
                    rr.violations.to_string(),
                    rr.min_margin.to_string(),
                ]);
            }
        }
    }
    art.tables.push(("ranks".into(), ranks));
    if !reduced.rows.is_empty() {
        art.tables.push(("ranks_row_reduced".into(), reduced));
    }
    Ok(art)
}

fn solver_for(g: &DecodingGraph, choice: SolverChoice) -> Solver {
    match choice {
        SolverChoice::Exhaustive => Solver::Exhaustive,
        SolverChoice::Bnb => Solver::branch_and_bound(),
        SolverChoice::Auto if g.vertex_count() <= EXHAUSTIVE_VERTEX_LIMIT => Solver::Exhaustive,
        SolverChoice::Auto => Solver::branch_and_bound(),
    }
}

pub(super) fn bisection(s: &Settings) -> Result<Artifacts> {
    let levels = nonempty_levels(s, Command::Bisection)?;
    let choice = s.solver.unwrap_or(SolverChoice::Auto);
    let mut art = Artifacts::default();
    let mut t = Table::new("n,graph,frozen,m,width,lower_bound,certified,holds");
    let check = |art: &mut Artifacts, label: String, width: usize, bound: f64, certified: bool| -> String {
        let holds = certified && width as f64 >= bound;
        if !holds {
            art.failures.push(format!("{label}: width {width} vs bound {bound} (certified: {certified})"));
        }
        holds.to_string()
    };
    for &n in &levels {
        let g = graphs::build_polar_graph(n)?;
        let solver = solver_for(&g, choice);
        let x = g.symbol_nodes().to_vec();
        for m in 0..=x.len() / 2 {
            let r = graphs::m_section_width(&g, &x, m, solver)?;
            let holds = check(&mut art, format!("P_{n} m={m}"), r.width, 2.0 * m as f64, r.certified);
            t.push(vec![
                n.to_string(),
                format!("P_{n}"),
                String::new(),
                m.to_string(),
                r.width.to_string(),
                (2 * m).to_string(),
                r.certified.to_string(),
                holds,
            ]);
        }
        if let Some(rate) = s.rate {
            let code = code_for(n, rate, first_eps(s))?;
            let fg = graphs::freeze_graph(&g, code.frozen())?;
            let unfrozen = fg.symbol_nodes().to_vec();
            if unfrozen.is_empty() {
                continue;
            }
            let r = graphs::mbw(&fg, &unfrozen, solver_for(&fg, choice))?;
            let actual_rate = code.rate();
            let bound = bounds::decoder_mbw_bound((1usize << n) as f64, actual_rate)
                .map(|b| b.value)
                .unwrap_or(0.0);
            let holds = check(&mut art, format!("frozen P_{n}"), r.width, bound, r.certified);
            t.push(vec![
                n.to_string(),
                format!("P_{n}"),
                code.frozen().to_string(),
                "bisection".into(),
                r.width.to_string(),
                bound.to_string(),
                r.certified.to_string(),
                holds,
            ]);
        }
    }
    art.tables.push(("bisection".into(), t));
    Ok(art)
}

struct SimRun {
    report: SimReport,
    trace: Option<String>,
    failure: Option<String>,
}

fn trace_text(events: &[crate::mesh::TraceEvent]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(events, &mut buf)?;
    Ok(String::from_utf8(buf).expect("trace is utf-8"))
}

fn encode_runs(s: &Settings, command: Command, n: u32, runs: u64, rate: f64) -> Result<Vec<SimRun>> {
    let seed = s.seed_for(command)?;
    let code = code_for(n, rate, first_eps(s))?;
    let cfg = mesh_for(n, s)?;
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let (info, _) = draw_run(&code, seed, run, 0.0);
            let out = simulate_encode_traced(&code, &info, &cfg)?;
            let reference = encode(&code, &info)?;
            let failure = if out.codeword != reference {
                Some(format!("encode N={} run {run}: codeword differs from reference", 1 << n))
            } else if out.report.conflicts > 0 {
                Some(format!("encode N={} run {run}: {} conflicts", 1 << n, out.report.conflicts))
            } else {
                None
            };
            let trace = (s.trace && run == 0).then(|| trace_text(&out.trace)).transpose()?;
            Ok(SimRun {
                report: out.report,
                trace,
                failure,
            })
        })
        .collect()
}

fn decode_runs(s: &Settings, command: Command, n: u32, runs: u64, rate: f64, channel_eps: f64) -> Result<Vec<SimRun>> {
    let seed = s.seed_for(command)?;
    let code = code_for(n, rate, first_eps(s))?;
    let cfg = mesh_for(n, s)?;
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let (_, y) = draw_run(&code, seed, run, channel_eps);
            let out = simulate_decode_traced(&code, &y, &cfg)?;
            let failure = (out.outcome != sc_decode(&code, &y)?)
                .then(|| format!("decode N={} run {run}: result differs from reference decoder", 1 << n));
            let trace = (s.trace && run == 0).then(|| trace_text(&out.trace)).transpose()?;
            Ok(SimRun {
                report: out.report,
                trace,
                failure,
            })
        })
        .collect()
}

fn sim_command(s: &Settings, command: Command) -> Result<Artifacts> {
    let levels = nonempty_levels(s, command)?;
    let runs = s.trials.unwrap_or(1);
    if runs == 0 {
        return Err(Error::EmptySweep(format!("{} was asked for zero runs", command.name())));
    }
    let rate = s.rate.unwrap_or(DEFAULT_RATE);
    let (tag, channel_eps) = match command {
        Command::EncodeSim => ("encode", 0.0),
        _ => ("decode", s.eps.as_ref().and_then(|e| e.first().copied()).unwrap_or(0.0)),
    };
    let per_level = levels
        .par_iter()
        .map(|&n| match command {
            Command::EncodeSim => encode_runs(s, command, n, runs, rate),
            _ => decode_runs(s, command, n, runs, rate, channel_eps),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut art = Artifacts::default();
    let mut t = sim_table();
    for (&n, sims) in levels.iter().zip(per_level) {
        for run in sims {
            t.push(sim_row(&run.report));
            art.failures.extend(run.failure);
            if let Some(trace) = run.trace {
                art.files.push((format!("trace_{tag}_N{}.jsonl", 1usize << n), trace));
            }
        }
    }
    art.tables.push((tag.into(), t));
    Ok(art)
}

pub(super) fn encode_sim(s: &Settings) -> Result<Artifacts> {
    sim_command(s, Command::EncodeSim)
}

pub(super) fn decode_sim(s: &Settings) -> Result<Artifacts> {
    sim_command(s, Command::DecodeSim)
}

pub(super) fn pe_curve(s: &Settings) -> Result<Artifacts> {
    let levels = nonempty_levels(s, Command::PeCurve)?;
    let seed = s.seed_for(Command::PeCurve)?;
    let rate = s.rate.unwrap_or(DEFAULT_RATE);
    let trials = s.trials.unwrap_or(DEFAULT_PE_TRIALS);
    let eps_list = s.eps.clone().unwrap_or_else(|| vec![DEFAULT_EPS]);
    if eps_list.is_empty() {
        return Err(Error::EmptySweep("pe-curve was given no erasure probabilities".into()));
    }
    let mut t = Table::new("N,R,eps,trials,failures,p_hat,ci95_halfwidth,union_bound");
    for &eps in &eps_list {
        for &n in &levels {
            let code = code_for(n, rate, eps)?;
            let pe = simulate_block_error(&code, eps, trials, seed)?;
            t.push(vec![
                (1usize << n).to_string(),
                code.rate().to_string(),
                eps.to_string(),
                pe.trials.to_string(),
                pe.failures.to_string(),
                pe.p_hat.to_string(),
                pe.ci95_halfwidth.to_string(),
                code.union_bound().to_string(),
            ]);
        }
    }
    Ok(Artifacts {
        tables: vec![("pe_curve".into(), t)],
        ..Artifacts::default()
    })
}

/// Mean encoder and decoder costs at one level, plus any failed checks.
type Point = (Means, Means, Vec<String>);

#[derive(Clone, Copy, Default)]
struct Means {
    cycles: f64,
    q: f64,
    energy: f64,
}

fn means(runs: &[SimRun]) -> Means {
    let k = runs.len() as f64;
    let mut m = Means::default();
    for r in runs {
        m.cycles += r.report.cycles as f64 / k;
        m.q += r.report.q / k;
        m.energy += r.report.energy as f64 / k;
    }
    m
}

pub(super) fn scaling(s: &Settings) -> Result<Artifacts> {
    let levels = s.levels()?;
    let runs = s.trials.unwrap_or(0);
    if levels.is_empty() || runs == 0 {
        return Err(Error::EmptySweep(
            "scaling needs at least one level and --trials >= 1 runs per level".into(),
        ));
    }
    if levels.len() < 3 {
        return invalid("scaling fits need at least 3 levels");
    }
    let rate = s.rate.unwrap_or(DEFAULT_RATE);
    let channel_eps = 0.0;
    let points = levels
        .par_iter()
        .map(|&n| {
            let enc = encode_runs(s, Command::Scaling, n, runs, rate)?;
            let dec = decode_runs(s, Command::Scaling, n, runs, rate, channel_eps)?;
            let failures: Vec<String> = enc.iter().chain(&dec).filter_map(|r| r.failure.clone()).collect();
            Ok((means(&enc), means(&dec), failures))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut art = Artifacts::default();
    let mut t = Table::new("N,R,runs,T_enc,q_enc,E_enc,T_dec,q_dec,E_dec");
    let sizes: Vec<f64> = levels.iter().map(|&n| (1u64 << n) as f64).collect();
    for (size, (e, d, failures)) in sizes.iter().zip(&points) {
        art.failures.extend(failures.iter().cloned());
        t.push(vec![
            size.to_string(),
            rate.to_string(),
            runs.to_string(),
            e.cycles.to_string(),
            e.q.to_string(),
            e.energy.to_string(),
            d.cycles.to_string(),
            d.q.to_string(),
            d.energy.to_string(),
        ]);
    }
    let mut fits = Table::new("series,slope,intercept,residual");
    let mut series = |name: &str, pick: &dyn Fn(&Point) -> f64| -> Result<Series> {
        let pts: Vec<(f64, f64)> = sizes.iter().zip(&points).map(|(&x, p)| (x, pick(p))).collect();
        let fit = fit_scaling_exponent(&pts)?;
        fits.push(vec![
            name.into(),
            slope_text(fit.slope),
            fit.intercept.to_string(),
            fit.residual.to_string(),
        ]);
        Ok(Series {
            label: name.into(),
            points: pts,
            slope: Some(fit.slope),
        })
    };
    let plot = |title: &str, y: &str, series: Vec<Series>| Plot {
        title: title.into(),
        x_label: "N (log scale)".into(),
        y_label: y.into(),
        series,
    };
    let e = vec![series("E_enc", &|p| p.0.energy)?, series("E_dec", &|p| p.1.energy)?];
    let tt = vec![series("T_enc", &|p| p.0.cycles)?, series("T_dec", &|p| p.1.cycles)?];
    let q = vec![series("q_enc", &|p| p.0.q)?, series("q_dec", &|p| p.1.q)?];
    art.plots.push(("scaling_E".into(), plot("Energy vs block length", "E (area-cycles)", e)));
    art.plots.push(("scaling_T".into(), plot("Clock cycles vs block length", "T (cycles)", tt)));
    art.plots.push(("scaling_q".into(), plot("Activity factor vs block length", "q", q)));
    art.tables.push(("scaling".into(), t));
    art.tables.push(("scaling_fits".into(), fits));
    Ok(art)
}

fn inputs_text(r: &BoundReport) -> String {
    r.inputs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub(super) fn bounds(s: &Settings) -> Result<Artifacts> {
    let (Some(n), Some(r)) = (s.block_length, s.bound_rate) else {
        return invalid("bounds needs --N and --R");
    };
    let q = s.q.unwrap_or(1.0);
    let mut reports = Vec::new();
    let mut keep = |res: Result<BoundReport>| -> Result<()> {
        match res {
            Ok(rep) => reports.push(rep),
            Err(Error::OutOfRegime(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    };
    keep(bounds::encoder_at2(n, r))?;
    keep(bounds::encoder_energy(n, r, q))?;
    keep(bounds::decoder_mbw_bound(n, r))?;
    keep(bounds::decoder_mbw_bound(n, r).and_then(|w| bounds::thompson_area(w.value)))?;
    keep(bounds::decoder_energy_scale(n, r))?;
    keep(bounds::decoder_time_scale(n))?;
    if let Some(eps) = s.eps.as_ref().and_then(|e| e.first().copied()) {
        match bounds::chi(r, 1.0 - eps) {
            Ok(chi) => {
                let w = bounds::chi_energy_window(chi)?;
                reports.extend([w.lower, w.upper, w.general_floor]);
            }
            Err(Error::OutOfRegime(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut t = Table::new("name,inputs,value,has_constant");
    for rep in &reports {
        t.push(vec![
            rep.name.into(),
            inputs_text(rep),
            rep.value.to_string(),
            rep.has_constant.to_string(),
        ]);
    }
    Ok(Artifacts {
        tables: vec![("bounds".into(), t)],
        ..Artifacts::default()
    })
}

pub(super) fn check_consistency(s: &Settings) -> Result<Artifacts> {
    let levels = nonempty_levels(s, Command::CheckConsistency)?;
    let runs = s.trials.unwrap_or(1);
    if runs == 0 {
        return Err(Error::EmptySweep("check-consistency was asked for zero runs".into()));
    }
    let rate = s.rate.unwrap_or(0.75);
    let mut art = Artifacts::default();
    let mut t = Table::new("N,run,check,measured,bound,holds");
    let mut record = |art: &mut Artifacts, size: usize, run: u64, name: &str, measured: f64, bound: &BoundReport| {
        // Bounds without a constant never reach an absolute comparison.
        let Some(holds) = bound.admits(measured) else {
            return;
        };
        if !holds {
            art.failures
                .push(format!("N={size} run {run}: {name} {measured} below bound {}", bound.value));
        }
        t.push(vec![
            size.to_string(),
            run.to_string(),
            name.into(),
            measured.to_string(),
            bound.value.to_string(),
            holds.to_string(),
        ]);
    };
    for &n in &levels {
        let size = 1usize << n;
        let enc = encode_runs(s, Command::CheckConsistency, n, runs, rate)?;
        let dec = decode_runs(s, Command::CheckConsistency, n, runs, rate, 0.0)?;
        for (run, sim) in enc.iter().enumerate() {
            art.failures.extend(sim.failure.clone());
            let r = &sim.report;
            let at2 = r.area as f64 * (r.cycles as f64).powi(2);
            if let Ok(b) = bounds::encoder_at2(size as f64, r.rate) {
                record(&mut art, size, run as u64, "encoder_at2", at2, &b);
            }
            if let Ok(b) = bounds::encoder_energy(size as f64, r.rate, r.q) {
                record(&mut art, size, run as u64, "encoder_energy", r.energy as f64, &b);
            }
        }
        for (run, sim) in dec.iter().enumerate() {
            art.failures.extend(sim.failure.clone());
            let r = &sim.report;
            if let Ok(w) = bounds::decoder_mbw_bound(size as f64, r.rate) {
                record(&mut art, size, run as u64, "decoder_area", r.area as f64, &bounds::thompson_area(w.value)?);
            }
            if let Ok(b) = bounds::decoder_energy_scale(size as f64, r.rate) {
                record(&mut art, size, run as u64, "decoder_energy", r.energy as f64, &b);
            }
        }
    }
    art.tables.push(("consistency".into(), t));
    Ok(art)
}
