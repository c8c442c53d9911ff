//! Command-line surface: region checking, feasibility search, protocol
//! simulation, typicality verification, and the bundled three-point
//! source reproduction.
//!
//! Exit codes: 0 success/feasible, 2 infeasible (or expectations not met),
//! 1 error. The dimension cap (default 4096) can be overridden with the
//! `CQMAC_DIM_CAP` environment variable.

mod formats;

use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cqmac_core::channel::adder_channel;
use cqmac_core::codec::{self, basis_decoder_povm, MonteCarloReport};
use cqmac_core::info::CodeDistribution;
use cqmac_core::linalg::{DensityOperator, DEFAULT_DIM_CAP};
use cqmac_core::region::{check_separation, check_joint_region, max_product_input_info, search_feasible, RegionReport};
use cqmac_core::source::{common_part, source_entropies, JointSource};
use cqmac_core::typicality::{verify_typical_properties, TypicalSpec};

#[derive(Parser)]
#[command(name = "cqmac", version, about = "Joint source-channel coding over cq multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the four-inequality region (or the separation baseline).
    Region(RegionArgs),
    /// Search for a code distribution maximizing the minimum slack.
    Search(SearchArgs),
    /// Simulate the random-codebook square-root decoder.
    Simulate(SimulateArgs),
    /// Verify typical-projector properties for a density operator.
    TypicalityVerify(TypicalityArgs),
    /// Reproduce the bundled three-point-source example end to end.
    Ces(CesArgs),
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    channel: String,
    /// Code distribution file; without it a feasibility search runs first.
    #[arg(long)]
    code_dist: Option<String>,
    /// Check the separation baseline (uniform product inputs) instead.
    #[arg(long)]
    separation: bool,
    #[arg(long, default_value_t = 1)]
    size_s: usize,
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    channel: String,
    #[arg(long, default_value_t = 1)]
    size_s: usize,
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    channel: String,
    #[arg(long)]
    code_dist: String,
    /// Block length: a single value ("3") or a sweep ("1..4", inclusive).
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output base path; writes <out>.json and <out>.csv.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct TypicalityArgs {
    /// JSON matrix file (rows of [re, im] pairs); default diag(3/4, 1/4).
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CesArgs {
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn dim_cap() -> usize {
    std::env::var("CQMAC_DIM_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

fn print_region_table(report: &RegionReport) {
    let q = &report.quantities;
    let h = &report.entropies;
    let rows: Vec<(&str, f64, &str, f64)> = if report.slacks.len() == 4 {
        vec![
            ("H(U|V)", h.h_u_given_v, "I(X1;B|X2VS)", q.i_x1_b_given_x2vs),
            ("H(V|U)", h.h_v_given_u, "I(X2;B|X1US)", q.i_x2_b_given_x1us),
            ("H(UV|W)", h.h_uv_given_w, "I(X1X2;B|WS)", q.i_x1x2_b_given_ws),
            ("H(UV)", h.h_uv, "I(X1X2;B)", q.i_x1x2_b),
        ]
    } else {
        vec![
            ("H(U|V)", h.h_u_given_v, "I(X1;B|X2)", q.i_x1_b_given_x2vs),
            ("H(V|U)", h.h_v_given_u, "I(X2;B|X1)", q.i_x2_b_given_x1us),
            ("H(UV)", h.h_uv, "I(X1X2;B)", q.i_x1x2_b),
        ]
    };
    println!("{:<10} {:>12}   {:<14} {:>12} {:>12}", "LHS", "bits", "RHS", "bits", "slack");
    for (i, (lhs, lv, rhs, rv)) in rows.iter().enumerate() {
        println!(
            "{:<10} {:>12.6}   {:<14} {:>12.6} {:>12.6}",
            lhs, lv, rhs, rv, report.slacks[i]
        );
    }
    println!(
        "verdict: {}{}",
        if report.feasible { "feasible" } else { "infeasible" },
        if report.boundary { " (boundary)" } else { "" }
    );
}

fn finish_region(report: &RegionReport, out: Option<&str>, json: bool) -> Result<ExitCode> {
    if let Some(path) = out {
        formats::write_json(path, report)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        print_region_table(report);
    }
    Ok(if report.feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_region(args: &RegionArgs) -> Result<ExitCode> {
    let src = formats::load_source(&args.source)?;
    let ch = formats::load_channel(&args.channel)?;
    if args.separation {
        let p1 = vec![1.0 / ch.size_x1() as f64; ch.size_x1()];
        let p2 = vec![1.0 / ch.size_x2() as f64; ch.size_x2()];
        let report = check_separation(&src, &ch, &p1, &p2)?;
        return finish_region(&report, args.out.as_deref(), args.json);
    }
    let cp = common_part(&src);
    let report = match &args.code_dist {
        Some(path) => {
            let cd = formats::load_code_dist(path)?;
            if cd.exceeds_cardinality_bound(&ch) {
                eprintln!(
                    "warning: |S| = {} exceeds the cardinality bound {}",
                    cd.size_s(),
                    CodeDistribution::cardinality_bound(&ch)
                );
            }
            check_joint_region(&src, &cp, &cd, &ch)?
        }
        None => {
            let outcome = search_feasible(&src, &ch, args.size_s, args.budget, args.seed)?;
            eprintln!(
                "search: best min slack {:.6} over budget {}",
                outcome.best_min_slack, args.budget
            );
            outcome.best_report
        }
    };
    finish_region(&report, args.out.as_deref(), args.json)
}

fn cmd_search(args: &SearchArgs) -> Result<ExitCode> {
    let src = formats::load_source(&args.source)?;
    let ch = formats::load_channel(&args.channel)?;
    let outcome = search_feasible(&src, &ch, args.size_s, args.budget, args.seed)?;
    if let Some(path) = &args.out {
        formats::write_json(path, &outcome)?;
    }
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(if outcome.best_report.feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn parse_n_spec(spec: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("parsing sweep start")?;
        let hi: usize = hi.trim().parse().context("parsing sweep end")?;
        if lo == 0 || hi < lo {
            bail!("invalid sweep {spec:?}");
        }
        Ok((lo..=hi).collect())
    } else {
        let n: usize = spec.trim().parse().context("parsing block length")?;
        if n == 0 {
            bail!("block length must be >= 1");
        }
        Ok(vec![n])
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let src = formats::load_source(&args.source)?;
    let ch = formats::load_channel(&args.channel)?;
    let cd = formats::load_code_dist(&args.code_dist)?;
    let cap = dim_cap();
    let mut reports: Vec<MonteCarloReport> = Vec::new();
    for n in parse_n_spec(&args.n)? {
        let report = codec::simulate(&src, &cd, &ch, n, args.delta, args.trials, args.seed, cap)
            .with_context(|| format!("simulating n = {n} (dimension cap {cap})"))?;
        reports.push(report);
    }
    let mut csv = String::from(MonteCarloReport::csv_header());
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(base) = &args.out {
        formats::write_json(&format!("{base}.json"), &reports)?;
        std::fs::write(format!("{base}.csv"), &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_typicality(args: &TypicalityArgs) -> Result<ExitCode> {
    let rho = match &args.rho {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let rho: DensityOperator =
                serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
            rho
        }
        None => DensityOperator::diagonal(&[0.75, 0.25])?,
    };
    let spec = TypicalSpec::new(args.n, args.delta);
    let report = verify_typical_properties(&rho, &spec, args.epsilon)?;
    if let Some(path) = &args.out {
        formats::write_json(path, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.capture_ok && report.sandwich_ok && report.projector_trick_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

#[derive(Serialize)]
struct CesCheck {
    name: String,
    value: f64,
    expected: String,
    pass: bool,
}

#[derive(Serialize)]
struct CesReport {
    budget: usize,
    seed: u64,
    checks: Vec<CesCheck>,
    all_pass: bool,
}

fn cmd_ces(args: &CesArgs) -> Result<ExitCode> {
    let src = JointSource::ces_example();
    let cp = common_part(&src);
    let ch = adder_channel();
    let mut checks = Vec::new();

    let h = source_entropies(&src, &cp);
    checks.push(CesCheck {
        name: "H(UV)".into(),
        value: h.h_uv,
        expected: "log2(3) within 1e-9".into(),
        pass: (h.h_uv - 3.0f64.log2()).abs() <= 1e-9,
    });

    let best = max_product_input_info(&ch, args.budget, args.seed);
    checks.push(CesCheck {
        name: "max product-input I(X1X2;B)".into(),
        value: best,
        expected: "1.5 within 1e-3".into(),
        pass: (best - 1.5).abs() <= 1e-3,
    });

    let sep = check_separation(&src, &ch, &[0.5, 0.5], &[0.5, 0.5])?;
    checks.push(CesCheck {
        name: "separation third slack".into(),
        value: sep.slacks[2],
        expected: "infeasible, 1.5 - log2(3)".into(),
        pass: !sep.feasible && (sep.slacks[2] - (1.5 - 3.0f64.log2())).abs() <= 1e-6,
    });

    let cd = CodeDistribution::deterministic_identity(2, 2);
    let theorem = check_joint_region(&src, &cp, &cd, &ch)?;
    let max_abs_slack = theorem.slacks.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    checks.push(CesCheck {
        name: "identity encoding min slack".into(),
        value: theorem.min_slack(),
        expected: "feasible on the boundary (all slacks 0 within 1e-6)".into(),
        pass: theorem.feasible && theorem.boundary && max_abs_slack <= 1e-6,
    });

    // Deterministic decoder: y = u + v lets the receiver recover (u, v).
    let cb = codec::sample_codebook(&src, &cp, &cd, 1, args.seed)?;
    let povm = basis_decoder_povm(3, |y| {
        let (u, v) = match y {
            0 => (0, 0),
            1 => (0, 1),
            _ => (1, 1),
        };
        Some((vec![u], vec![v], vec![0]))
    })?;
    let pe = codec::error_probability(&cb, &ch, &src, &cp, &povm)?;
    checks.push(CesCheck {
        name: "deterministic decoder P_e".into(),
        value: pe,
        expected: "exactly 0".into(),
        pass: pe == 0.0,
    });

    let all_pass = checks.iter().all(|c| c.pass);
    let report = CesReport {
        budget: args.budget,
        seed: args.seed,
        checks,
        all_pass,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("budget {} seed {}", report.budget, report.seed);
        for c in &report.checks {
            println!(
                "[{}] {:<32} = {:<22.15} ({})",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.expected
            );
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Region(args) => cmd_region(args),
        Command::Search(args) => cmd_search(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::TypicalityVerify(args) => cmd_typicality(args),
        Command::Ces(args) => cmd_ces(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
