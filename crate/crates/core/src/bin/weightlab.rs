use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weightlab::conditions::ConditionTag;
use weightlab::experiments::{
    condition_sweep, emit_report, maximal_eval, probe, remark_bundle, verify_theorem, Config, EpsSweep, Format,
    KRange, ReportBundle,
};
use weightlab::spaces::FunctionSpace;
use weightlab::weights::WeightSpec;

#[derive(Parser)]
#[command(name = "weightlab", version, about = "Numerical experiments on two-weight maximal inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the counterexample pipeline over the given spaces.
    VerifyTheorem(Common),
    /// Fujii–Wilson sweep of a power-log weight, with the non-admissible contrast case.
    RemarkSweep(Common),
    /// Sweep a single condition.
    Condition {
        /// ap, neugebauer, bump, sawyer, weak-testing, fujii-wilson, strong-bound or annulus
        tag: ConditionTag,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate M σ (or M_X σ with --space) at points.
    MaximalEval {
        /// Point as comma-separated coordinates; repeatable. Defaults to |x| = 2^-k over --scales.
        #[arg(long = "at", value_parser = parse_point, allow_hyphen_values = true)]
        at: Vec<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags mirroring the config file; a flag overrides the file.
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Space descriptor, e.g. lebesgue:r=3 or orlicz:pprime=3,gamma=2.5; repeatable.
    #[arg(long = "space")]
    space: Vec<FunctionSpace>,
    /// Scales a = 2^-k for k in k0..k1.
    #[arg(long)]
    scales: Option<KRange>,
    /// Truncations eps = 2^-k for k in k0..k1, or k0..k1:doubling.
    #[arg(long)]
    eps_sweep: Option<EpsSweep>,
    #[arg(long)]
    family_level: Option<u32>,
    #[arg(long)]
    grid_level: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Weight w, e.g. theorem-w or constant:c=1.
    #[arg(long)]
    w: Option<WeightSpec>,
    /// Weight σ, e.g. theorem-sigma or power-log:alpha=0.5,beta=0.
    #[arg(long)]
    sigma: Option<WeightSpec>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Neugebauer exponent.
    #[arg(long)]
    r: Option<f64>,
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{c}`"))).collect()
}

impl Common {
    fn resolve(self) -> weightlab::Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(p, n, scales, eps_sweep, family_level, grid_level, format, w, sigma, alpha, beta, r);
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if !self.space.is_empty() {
            cfg.space = self.space;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(bundle: &ReportBundle) {
    for s in &bundle.series {
        let expected = s.expected.map(|e| format!(" (expected {e})")).unwrap_or_default();
        let fit = s
            .fit
            .map(|f| format!("slope {:.4e}, R2 {:.4}", f.slope, f.r2))
            .unwrap_or_else(|| "no fit".into());
        println!("{:<44} {:<16} {}{}", s.tag, s.verdict.to_string(), fit, expected);
    }
    if let Some(t) = &bundle.pointwise {
        println!("pointwise identity: max relative deviation {:.3e}", t.max_rel_deviation);
    }
    if let Some(t) = &bundle.windows {
        println!(
            "M sigma / closed form: window [{:.4}, {:.4}], drift {:.2}% between levels {} and {}",
            t.window[0],
            t.window[1],
            100.0 * t.max_drift,
            t.levels[0],
            t.levels[1]
        );
    }
    for d in &bundle.dichotomy {
        println!("dichotomy {}: bump {}, weak-testing {} -> {}", d.space, d.bump, d.weak_testing, d.satisfied);
    }
    for c in &bundle.chains {
        println!("lower-bound chain {}: {} checks, {} violations", c.space, c.checks.len(), c.violations);
    }
    for note in &bundle.status.notes {
        println!("note: {note}");
    }
    if !bundle.status.needs_refinement.is_empty() {
        println!("needs refinement: {}", bundle.status.needs_refinement.join(", "));
    }
    println!("status: {}", if bundle.status.expected_met { "expected verdicts met" } else { "inconclusive" });
}

fn finish(bundle: ReportBundle, cfg: &Config) -> weightlab::Result<ExitCode> {
    summarize(&bundle);
    if let Some(dir) = &cfg.out {
        for path in emit_report(&bundle, dir, cfg.format)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(if bundle.status.expected_met { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run(cli: Cli) -> weightlab::Result<ExitCode> {
    match cli.command {
        Command::VerifyTheorem(common) => {
            let mut cfg = common.resolve()?;
            cfg.space = cfg.spaces_or_default()?;
            let bundle = verify_theorem(&cfg)?;
            finish(bundle, &cfg)
        }
        Command::RemarkSweep(common) => {
            let cfg = common.resolve()?;
            finish(remark_bundle(&cfg)?, &cfg)
        }
        Command::Condition { tag, common } => {
            let cfg = common.resolve()?;
            finish(condition_sweep(tag, &cfg)?, &cfg)
        }
        Command::MaximalEval { at, common } => {
            let cfg = common.resolve()?;
            let points = if at.is_empty() {
                cfg.scales.values().map(|k| probe(cfg.n, 2f64.powi(-k))).collect()
            } else {
                at
            };
            let estimates = maximal_eval(&cfg, &points)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["point", "value", "cube_center", "cube_side", "divergent"])?;
            let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            for e in &estimates {
                w.write_record([
                    join(&e.point),
                    e.value.to_string(),
                    join(e.cube.center()),
                    e.cube.side().to_string(),
                    e.divergent.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
