use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ultraflow::constants::{ExtReal, Params, SweepGrid};
use ultraflow::experiments::{
    cmd_constants, cmd_counterexample, cmd_flow, cmd_improve, cmd_region, cmd_verify, CounterexampleArgs,
    FlowArgs, ImproveArgs, RegionArgs,
};
use ultraflow::flows::{FlowConfig, FlowForm};
use ultraflow::manifest::{to_pretty, RunOutput};
use ultraflow::verify::VerifyOptions;
use ultraflow::{Error, Result};

/// Ultraspherical flows, interpolation constants and their obstructions.
#[derive(Parser)]
#[command(name = "ultraflow", version)]
struct Cli {
    /// Write result.json, artifacts and manifest.json into this directory
    /// instead of printing JSON.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents, gamma roots and coefficients at (d, p[, beta]).
    Constants {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Admissibility and sign of A on a (p, beta) grid.
    Region(RegionCli),
    /// Evolves an initial datum and records the functionals.
    Flow(FlowCli),
    /// Explicit data where monotonicity fails.
    Counterexample(CounterexampleCli),
    /// Constrained spectral minimum and the improved constant.
    Improve(ImproveCli),
    /// Runs an invariant suite and prints a TAP report.
    Verify(VerifyCli),
}

#[derive(Args)]
struct RegionCli {
    #[arg(long, default_value_t = 5.0)]
    d: f64,
    #[arg(long, default_value_t = 1.0)]
    p_min: f64,
    /// Defaults to 2^*, or 2^# + 2 when 2^* is infinite.
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    beta_max: f64,
    #[arg(long, default_value_t = 201)]
    n_p: usize,
    #[arg(long, default_value_t = 201)]
    n_beta: usize,
    /// Also write beta_-(p, d) and beta_+(p, d) for d = 3..10.
    #[arg(long)]
    curves: bool,
}

#[derive(Args)]
struct FlowCli {
    /// Rho_Heat, Rho_FDE, U_Linear or W_Nonlinear.
    #[arg(long)]
    form: String,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    /// Defaults to beta_- for the nonlinear forms; `inf` selects the limiting flow.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// const:c, conformal:a,b, powerlaw:a,b, random:seed,modes or perturb:eps,mode.
    #[arg(long, default_value = "random:0,8")]
    init: String,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(short = 'N', long = "order", default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
}

#[derive(Args)]
struct CounterexampleCli {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    b: f64,
    #[arg(short = 'N', long = "order", default_value_t = 128)]
    n: usize,
    /// Comma-separated dimensions for a sign certificate of A(p, beta_-).
    #[arg(long, value_delimiter = ',')]
    certificate: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    certificate_points: usize,
}

#[derive(Args)]
struct ImproveCli {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    #[arg(short = 'N', long = "order", default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    verify_samples: usize,
}

#[derive(Args)]
struct VerifyCli {
    /// quadrature, roots, lemma-identities, heat-monotone, nonlinear-monotone,
    /// first-obstruction, second-obstruction, exact-solution, moment-decay,
    /// improve, antipodal, logsob or all.
    suite: String,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(short = 'N', long = "order")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn region_grid(r: &RegionCli) -> Result<SweepGrid> {
    let params = Params::new(r.d, r.p_min)?;
    let p_max = match r.p_max {
        Some(p) => p,
        None => match params.two_star() {
            ExtReal::Finite(s) => s,
            _ => params.two_sharp().finite().map_or(r.p_min + 10.0, |s| s + 2.0),
        },
    };
    Ok(SweepGrid {
        d: r.d,
        p_min: r.p_min,
        p_max,
        beta_min: r.beta_min,
        beta_max: r.beta_max,
        n_p: r.n_p,
        n_beta: r.n_beta,
    })
}

fn run(command: Command) -> Result<RunOutput> {
    match command {
        Command::Constants { d, p, beta } => cmd_constants(d, p, beta),
        Command::Region(r) => cmd_region(RegionArgs { grid: region_grid(&r)?, curves: r.curves }),
        Command::Flow(f) => {
            let beta = f.beta.map(|b| match b {
                b if b == f64::INFINITY => ExtReal::PosInf,
                b if b == f64::NEG_INFINITY => ExtReal::NegInf,
                b => ExtReal::Finite(b),
            });
            let config = FlowConfig { samples: f.samples, rtol: f.rtol, atol: f.atol, ..Default::default() };
            let form: FlowForm = f.form.parse()?;
            cmd_flow(&FlowArgs { form, d: f.d, p: f.p, beta, init: f.init, t_end: f.t_end, n: f.n, config })
        }
        Command::Counterexample(c) => cmd_counterexample(&CounterexampleArgs {
            d: c.d,
            p: c.p,
            a: c.a,
            b: c.b,
            n: c.n,
            certificate_dims: c.certificate,
            certificate_points: c.certificate_points,
        }),
        Command::Improve(i) => cmd_improve(&ImproveArgs {
            d: i.d,
            p: i.p,
            n: i.n,
            restarts: i.restarts,
            seed: i.seed,
            verify_samples: i.verify_samples,
        }),
        Command::Verify(v) => cmd_verify(
            &v.suite,
            &VerifyOptions { d: v.d, p: v.p, samples: v.samples, n: v.n, seed: v.seed },
        ),
    }
}

fn emit(out: &Option<PathBuf>, result: &RunOutput) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    if let Some(dir) = out {
        result.write_to(dir)?;
        if let Some(text) = &result.text {
            stdout.write_all(text.as_bytes())?;
        }
        return Ok(());
    }
    match &result.text {
        Some(text) => stdout.write_all(text.as_bytes())?,
        None => stdout.write_all(&to_pretty(&result.json)?)?,
    }
    Ok(())
}

fn diagnostic(e: &Error) -> ExitCode {
    let doc = json!({
        "schema_version": ultraflow::SCHEMA_VERSION,
        "error": e.to_string(),
        "exit_code": e.exit_code(),
    });
    let _ = std::io::stdout().write_all(&to_pretty(&doc).unwrap_or_default());
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command).and_then(|r| emit(&cli.out, &r).map(|_| r.exit_code)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => diagnostic(&e),
    }
}
