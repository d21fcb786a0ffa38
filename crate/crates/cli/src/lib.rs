//! `codeedu-eval`: cross-validated tutoring evaluation from the command line.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use codeedu_core::dataset::{check_reference_solutions, load_problems, toy_problems, Problem};
use codeedu_core::eval::{
    cross_validate, grading_policy, write_outputs, EvalConfig, EvalContext, EvalRun, TutorKind,
};
use codeedu_core::fixtures;
use codeedu_core::llm::{
    api_key_env_var, default_temperature, Gateway, ModelBinding, ProviderConfig, DEFAULT_MAX_OUTPUT_TOKENS,
};
use codeedu_core::profile::Level;
use codeedu_core::prompts::PromptSet;
use codeedu_core::tools::PythonSandbox;
use thiserror::Error;

pub const MOCK_PROVIDER: &str = "mock";

#[derive(Debug, Parser)]
#[command(name = "codeedu-eval", version, about = "Evaluate tutoring with simulated students")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run pre-test, tutoring and post-test over seeded folds.
    Run(RunArgs),
    /// Grade every reference solution in a problem file.
    Check {
        /// JSON-lines problem file; the bundled toy set when omitted.
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TutorArg {
    Codeedu,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON-lines problem file; the bundled toy set when omitted.
    #[arg(long)]
    pub problems: Option<PathBuf>,
    /// Tutors to evaluate (repeat or comma-separate); both when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub tutor: Vec<TutorArg>,
    /// Student levels (repeat or comma-separate); all three when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub level: Vec<LevelArg>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 20)]
    pub turns: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use only the first N problems.
    #[arg(long)]
    pub n: Option<usize>,
    /// `mock` for scripted fixtures, or a provider id from the provider config.
    #[arg(long, default_value = MOCK_PROVIDER)]
    pub provider: String,
    /// Provider config file (required unless --provider mock).
    #[arg(long, env = "CODEEDU_PROVIDER_CONFIG")]
    pub provider_config: Option<PathBuf>,
    /// Fixture directory with llm.json and corpus/; the bundled set when omitted.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Skip rubric scoring of generated material.
    #[arg(long)]
    pub no_judge: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("loading problems: {0}")]
    Dataset(#[from] codeedu_core::dataset::DatasetError),
    #[error("provider setup: {0}")]
    Provider(String),
    #[error(transparent)]
    Eval(#[from] codeedu_core::eval::EvalError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl RunArgs {
    pub fn eval_config(&self) -> EvalConfig {
        let mut tutors: Vec<TutorKind> = self
            .tutor
            .iter()
            .map(|t| match t {
                TutorArg::Codeedu => TutorKind::Codeedu,
                TutorArg::Baseline => TutorKind::Baseline,
            })
            .collect();
        if tutors.is_empty() {
            tutors = vec![TutorKind::Codeedu, TutorKind::Baseline];
        }
        tutors.dedup();
        let mut levels: Vec<Level> = self
            .level
            .iter()
            .map(|l| match l {
                LevelArg::Low => Level::Low,
                LevelArg::Medium => Level::Medium,
                LevelArg::High => Level::High,
            })
            .collect();
        if levels.is_empty() {
            levels = Level::ALL.to_vec();
        }
        levels.dedup();
        EvalConfig {
            n: self.n,
            k: self.k,
            m: self.m,
            turns: self.turns,
            folds: self.folds,
            seed: self.seed,
            levels,
            tutors,
            judge: !self.no_judge,
        }
    }
}

pub fn load_dataset(path: Option<&Path>, m: usize) -> Result<Vec<Problem>, CliError> {
    Ok(match path {
        Some(p) => load_problems(p, Some(m))?,
        None => toy_problems(),
    })
}

/// Installs the provider config and binds every role it leaves unbound to
/// `provider`'s first listed model.
pub fn live_gateway(provider: &str, config_path: &Path) -> Result<Gateway, CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Provider(e.to_string());
    let config = ProviderConfig::load(config_path).map_err(|e| err(&e))?;
    let entry = config
        .providers
        .iter()
        .find(|p| p.id == provider)
        .ok_or_else(|| CliError::Provider(format!("provider `{provider}` is not in {}", config_path.display())))?;
    if std::env::var(api_key_env_var(provider)).map_or(true, |k| k.is_empty()) {
        return Err(CliError::Provider(format!(
            "{} is not set",
            api_key_env_var(provider)
        )));
    }
    let gateway = Gateway::new();
    config.install(&gateway).map_err(|e| err(&e))?;
    for role in fixtures::ALL_ROLES {
        if gateway.binding(role).is_ok() {
            continue;
        }
        let model = entry.model_names.first().ok_or_else(|| {
            CliError::Provider(format!("role {role} has no binding and provider {provider} lists no models"))
        })?;
        gateway
            .bind(ModelBinding {
                agent_role: role.to_string(),
                provider_id: provider.to_string(),
                model_name: model.clone(),
                temperature: default_temperature(role),
                max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            })
            .map_err(|e| err(&e))?;
    }
    Ok(gateway)
}

/// Runs the evaluation and writes its output files into `args.out`.
pub fn run(args: &RunArgs) -> Result<(EvalRun, Vec<PathBuf>), CliError> {
    let config = args.eval_config();
    let problems = load_dataset(args.problems.as_deref(), args.m)?;
    std::fs::create_dir_all(&args.out)?;
    let fixture_dir = match &args.fixtures {
        Some(dir) => dir.clone(),
        None => {
            let dir = args.out.join("fixtures");
            fixtures::write_bundled(&dir)?;
            dir
        }
    };
    let gateway = if args.provider == MOCK_PROVIDER {
        fixtures::mock_gateway(&fixture_dir).map_err(CliError::Provider)?
    } else {
        let path = args
            .provider_config
            .as_deref()
            .ok_or_else(|| CliError::Usage("--provider-config is required for a live provider".into()))?;
        live_gateway(&args.provider, path)?
    };
    let ctx = EvalContext {
        gateway: Arc::new(gateway),
        executor: Arc::new(PythonSandbox::new(args.out.join("scratch"))),
        crawler: fixtures::corpus_crawler(&fixture_dir),
        policy: grading_policy(),
        prompts: PromptSet::default(),
        workspace: args.out.join("sessions"),
    };
    let run = cross_validate(&problems, &config, &ctx)?;
    let files = write_outputs(&run, &args.out)?;
    Ok((run, files))
}

/// Plain-text summary of aggregate metrics and improvement rates.
pub fn summary(run: &EvalRun) -> String {
    let mut out = format!(
        "{:<9} {:<7} {:>9} {:>9} {:>9} {:>9} {:>10} {:>10}\n",
        "tutor", "level", "pre_pass", "post_pass", "pre_rec", "post_rec", "tir_pass", "tir_recall"
    );
    for agg in &run.results.aggregate {
        let tir = run
            .results
            .tir
            .iter()
            .find(|t| t.tutor == agg.tutor && t.level == agg.level);
        let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |p| format!("{p:.1}%"));
        out.push_str(&format!(
            "{:<9} {:<7} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>10} {:>10}\n",
            agg.tutor.as_str(),
            agg.level,
            agg.pre.pass_at_k,
            agg.post.pass_at_k,
            agg.pre.recall_at_k,
            agg.post.recall_at_k,
            fmt(tir.and_then(|t| t.pass.percent)),
            fmt(tir.and_then(|t| t.recall.percent)),
        ));
    }
    out
}

/// Reference-solution check; returns the failing problem ids.
pub fn check(problems: Option<&Path>, m: usize, scratch: &Path) -> Result<Vec<String>, CliError> {
    let problems = load_dataset(problems, m)?;
    let sandbox = PythonSandbox::new(scratch);
    let failing = check_reference_solutions(&problems, &sandbox, &grading_policy())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(failing.into_iter().map(|(id, _)| id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunArgs {
        let mut argv = vec!["codeedu-eval", "run", "--out", "o"];
        argv.extend_from_slice(args);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run(a) => a,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn defaults_cover_both_tutors_and_all_levels() {
        let c = parse(&[]).eval_config();
        assert_eq!((c.k, c.m, c.turns, c.folds, c.seed, c.n), (3, 10, 20, 5, 0, None));
        assert_eq!(c.tutors, vec![TutorKind::Codeedu, TutorKind::Baseline]);
        assert_eq!(c.levels, Level::ALL.to_vec());
        assert!(c.judge);
    }

    #[test]
    fn lists_accept_commas_and_repeats() {
        let c = parse(&["--tutor", "codeedu,baseline", "--level", "high", "--level", "low", "--no-judge"]).eval_config();
        assert_eq!(c.tutors, vec![TutorKind::Codeedu, TutorKind::Baseline]);
        assert_eq!(c.levels, vec![Level::High, Level::Low]);
        assert!(!c.judge);
    }
}
