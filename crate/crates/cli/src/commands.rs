use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Deserialize;
use serde_json::json;

use propfair_core::{
    exists_proportional, exists_proportional_matching_case, remark1_instance, remark2_instance,
    run_experiment, theorem1_allocate, theorem2_allocate, Allocation, AllocatorConfig,
    ExperimentConfig, Instance, MatchingCaseVerdict, SearchLimits, UtilityModel, Verdict,
    DEFAULT_BETA_FLOOR,
};

use crate::{Family, Format, MarginArgs, Theorem};

/// Error carrying its exit code.
pub enum CliError {
    /// Bad input or flags: exit 2.
    Usage(String),
    /// The command ran but could not deliver: exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

type CliResult = Result<ExitCode, CliError>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {what} `{}`: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("malformed {what} `{}`: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("output types serialize")
    );
}

pub fn allocate(
    path: &Path,
    theorem: Theorem,
    margin: &MarginArgs,
    alpha: Option<f64>,
    verify: bool,
) -> CliResult {
    let inst: Instance = read_json(path, "instance")?;
    let source: UtilityModel = margin.dist.parse().map_err(usage)?;
    let margin = match margin.delta {
        Some(delta) => source.margin_with_delta(delta),
        None => source.margin_for(margin.beta_floor.unwrap_or(DEFAULT_BETA_FLOOR)),
    }
    .map_err(usage)?;
    let mut cfg = AllocatorConfig::new(margin).map_err(usage)?.with_verify(verify);
    if let Some(alpha) = alpha {
        cfg = cfg.with_alpha(alpha).map_err(usage)?;
    }
    let outcome = match theorem {
        Theorem::Multiple => theorem1_allocate(&inst, &cfg),
        Theorem::Superlinear => theorem2_allocate(&inst, &cfg),
    }
    .map_err(usage)?;
    print_json(&outcome);
    Ok(if outcome.is_success() {
        ExitCode::SUCCESS
    } else {
        eprintln!("allocation failed: {:?}", outcome.status);
        ExitCode::from(1)
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AllocationFile {
    Wrapped { owner: Allocation },
    Bare(Allocation),
}

pub fn check(path: &Path, allocation: Option<&Path>, limits: SearchLimits) -> CliResult {
    let inst: Instance = read_json(path, "instance")?;
    if let Some(alloc_path) = allocation {
        let alloc = match read_json::<AllocationFile>(alloc_path, "allocation")? {
            AllocationFile::Wrapped { owner } | AllocationFile::Bare(owner) => owner,
        };
        let proportional = inst.is_proportional(&alloc).map_err(usage)?;
        let envy_free = inst.is_envy_free(&alloc).map_err(usage)?;
        print_json(&json!({ "proportional": proportional, "envy_free": envy_free }));
        return Ok(ExitCode::SUCCESS);
    }
    let verdict = exists_proportional(&inst, &limits).map_err(|e| CliError::Failure(e.to_string()))?;
    print_json(&verdict);
    match verdict {
        Verdict::BudgetExceeded => Err(CliError::Failure(format!(
            "node budget of {} exhausted before a verdict",
            limits.node_budget
        ))),
        _ => Ok(ExitCode::SUCCESS),
    }
}

pub struct SimulateArgs {
    pub config: Option<PathBuf>,
    pub regime: Option<String>,
    pub dist: Option<String>,
    pub n: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub oracle: bool,
    pub beta_floor: Option<f64>,
    pub delta: Option<f64>,
    pub threads: Option<usize>,
    pub format: Format,
}

fn experiment_config(args: SimulateArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<ExperimentConfig>(path, "config")?,
        None => {
            let regime = args
                .regime
                .as_deref()
                .ok_or_else(|| usage("--regime is required without --config"))?;
            let n = args
                .n
                .clone()
                .ok_or_else(|| usage("--n is required without --config"))?;
            let trials = args
                .trials
                .ok_or_else(|| usage("--trials is required without --config"))?;
            let dist = args.dist.as_deref().unwrap_or("uniform:0,1");
            ExperimentConfig::new(
                regime.parse().map_err(usage)?,
                dist.parse::<UtilityModel>().map_err(usage)?,
                n,
                trials,
                args.seed.unwrap_or(0),
            )
        }
    };
    if args.config.is_some() {
        if let Some(r) = &args.regime {
            cfg.regime = r.parse().map_err(usage)?;
        }
        if let Some(d) = &args.dist {
            cfg.source = d.parse().map_err(usage)?;
        }
        if let Some(n) = args.n {
            cfg.n_values = n;
        }
        if let Some(t) = args.trials {
            cfg.trials = t;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
    }
    cfg.oracle_check |= args.oracle;
    if let Some(b) = args.beta_floor {
        cfg.beta_floor = b;
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

pub fn simulate(args: SimulateArgs) -> CliResult {
    let format = args.format;
    let cfg = experiment_config(args)?;
    let summary = run_experiment(&cfg).map_err(usage)?;
    match format {
        Format::Csv => print!("{}", summary.to_csv()),
        Format::Json => print_json(&summary),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn counterexample(family: Family, n: usize, seed: u64) -> CliResult {
    let (name, inst) = match family {
        Family::Remark1 => ("remark1", remark1_instance(n, seed)),
        Family::Remark2 => ("remark2", remark2_instance(n, seed)),
    };
    let inst = inst.map_err(usage)?;
    let limits = SearchLimits::default();
    let verdict = match exists_proportional_matching_case(&inst) {
        MatchingCaseVerdict::Yes { witness } => Some(Verdict::Yes { witness }),
        MatchingCaseVerdict::No => Some(Verdict::No),
        MatchingCaseVerdict::NotApplicable if limits.admits(inst.agents(), inst.goods()) => {
            exists_proportional(&inst, &limits).ok()
        }
        MatchingCaseVerdict::NotApplicable => {
            eprintln!("instance exceeds the oracle limits; verdict omitted");
            None
        }
    };
    print_json(&json!({
        "family": name,
        "n": n,
        "seed": seed,
        "instance": inst,
        "oracle": verdict,
    }));
    Ok(ExitCode::SUCCESS)
}
