//! Command-line and config-file parsing into a [`RunSpec`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use revshare_core::{Branch, DisagreementPolicy, MarketParams, ScenarioKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    PublicPrivate,
    PublicPrivateRegulated,
    SymmetricCompetitive,
    SymmetricCooperative,
    AsymmetricCompetitive,
    AsymmetricCooperative,
    RegulatedCompetitive,
    RegulatedCooperative,
    FixedPublicEffortCoop,
    MultiCpCompetitive,
    MultiCpCooperative,
    ComparePublicPrivate,
    CompareCoopComp,
    NScaling,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PublicPrivate => "public-private",
            ScenarioName::PublicPrivateRegulated => "public-private-regulated",
            ScenarioName::SymmetricCompetitive => "symmetric-competitive",
            ScenarioName::SymmetricCooperative => "symmetric-cooperative",
            ScenarioName::AsymmetricCompetitive => "asymmetric-competitive",
            ScenarioName::AsymmetricCooperative => "asymmetric-cooperative",
            ScenarioName::RegulatedCompetitive => "regulated-competitive",
            ScenarioName::RegulatedCooperative => "regulated-cooperative",
            ScenarioName::FixedPublicEffortCoop => "fixed-public-effort-coop",
            ScenarioName::MultiCpCompetitive => "multi-cp-competitive",
            ScenarioName::MultiCpCooperative => "multi-cp-cooperative",
            ScenarioName::ComparePublicPrivate => "compare-public-private",
            ScenarioName::CompareCoopComp => "compare-coop-comp",
            ScenarioName::NScaling => "n-scaling",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            ScenarioName::ComparePublicPrivate | ScenarioName::CompareCoopComp | ScenarioName::NScaling
        )
    }

    fn is_symmetric(self) -> bool {
        matches!(
            self,
            ScenarioName::SymmetricCompetitive | ScenarioName::SymmetricCooperative | ScenarioName::NScaling
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    Isp1,
    Isp2,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Isp1 => Branch::Isp1,
            BranchArg::Isp2 => Branch::Isp2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Compare,
    Verify,
    Shapley,
    Nbs,
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    R,
    C,
    C1,
    C2,
    N,
    A1Bar,
    R2,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::R => "r",
            SweepParam::C => "c",
            SweepParam::C1 => "c1",
            SweepParam::C2 => "c2",
            SweepParam::N => "n",
            SweepParam::A1Bar => "a1_bar",
            SweepParam::R2 => "r2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepAxis {
    /// Evenly spaced points from `from` to `to` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.to } else { self.from + k as f64 * h })
            .collect()
    }
}

/// Scenario inputs as given by the user, before they are checked against a
/// particular scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub r: f64,
    pub costs: Vec<f64>,
    pub n: Option<usize>,
    pub a1_bar: Option<f64>,
    pub r2: Option<f64>,
    pub branch: Option<Branch>,
    pub disagreement: DisagreementPolicy,
}

impl Settings {
    /// Copy with one parameter replaced, for a sweep point.
    pub fn with(&self, param: SweepParam, value: f64) -> Settings {
        let mut s = self.clone();
        match param {
            SweepParam::R => s.r = value,
            SweepParam::C => s.costs.iter_mut().for_each(|c| *c = value),
            SweepParam::C1 => s.costs[0] = value,
            SweepParam::C2 => s.costs[1] = value,
            SweepParam::N => s.n = Some(value.round() as usize),
            SweepParam::A1Bar => s.a1_bar = Some(value),
            SweepParam::R2 => s.r2 = Some(value),
        }
        s
    }

    pub fn c1(&self) -> f64 {
        self.costs[0]
    }

    pub fn c2(&self) -> f64 {
        self.costs[1]
    }

    pub fn market_params(&self) -> Result<MarketParams, CliError> {
        let p = MarketParams::new(self.r, self.costs.clone()).map_err(|e| CliError::Usage(format!("--c / --r: {e}")))?;
        match self.r2 {
            Some(r2) => p
                .with_second_cp_rate(r2)
                .map_err(|e| CliError::Usage(format!("--r2: {e}"))),
            None => Ok(p),
        }
    }

    /// The closed-form scenario for `name`, if it has one.
    pub fn scenario_kind(&self, name: ScenarioName) -> Option<ScenarioKind> {
        let n = self.n.unwrap_or(1);
        let a1_bar = self.a1_bar.unwrap_or(0.0);
        let branch = self.branch.unwrap_or(Branch::Isp1);
        Some(match name {
            ScenarioName::PublicPrivate => ScenarioKind::PublicPrivate,
            ScenarioName::PublicPrivateRegulated => ScenarioKind::PublicPrivateRegulated { a1_bar },
            ScenarioName::SymmetricCompetitive => ScenarioKind::SymmetricCompetitive { n },
            ScenarioName::SymmetricCooperative => ScenarioKind::SymmetricCooperative { n },
            ScenarioName::AsymmetricCompetitive => ScenarioKind::AsymmetricCompetitive,
            ScenarioName::RegulatedCompetitive => ScenarioKind::RegulatedCompetitive,
            ScenarioName::RegulatedCooperative => ScenarioKind::RegulatedCooperative { branch },
            ScenarioName::FixedPublicEffortCoop => ScenarioKind::FixedPublicEffortCooperative { a1_bar },
            ScenarioName::MultiCpCompetitive => ScenarioKind::MultiCpCompetitive,
            ScenarioName::MultiCpCooperative => ScenarioKind::MultiCpCooperative { branch },
            _ => return None,
        })
    }
}

/// A fully checked invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub scenario: Option<ScenarioName>,
    pub settings: Settings,
    pub sweep_axis: Option<SweepAxis>,
    pub output_format: Format,
    pub plot: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "revshare", version, about = "Revenue-sharing equilibria between a content provider and ISPs")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Solve one scenario.
    Solve(CommonArgs),
    /// Solve a scenario over a range of one parameter.
    Sweep(CommonArgs),
    /// Run a comparison report (compare-public-private, compare-coop-comp, n-scaling).
    Compare(CommonArgs),
    /// Check every closed form against the numerical oracles.
    Verify(CommonArgs),
    /// Shapley values of the regulated cooperative game.
    Shapley(CommonArgs),
    /// Nash bargaining split of the regulated cooperative contract.
    Nbs(CommonArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CommonArgs {
    #[arg(long, value_enum)]
    scenario: Option<ScenarioName>,
    /// Revenue per unit demand.
    #[arg(long)]
    r: Option<f64>,
    /// ISP cost coefficients, comma separated.
    #[arg(long, value_parser = parse_costs)]
    c: Option<Costs>,
    /// Number of ISPs (symmetric scenarios); largest n for n-scaling.
    #[arg(long)]
    n: Option<usize>,
    /// Fixed effort of the public ISP.
    #[arg(long = "a1-bar")]
    a1_bar: Option<f64>,
    /// Revenue rate of the second CP.
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// zero, competitive, or an explicit pair d1,d2.
    #[arg(long, value_parser = parse_disagreement)]
    disagreement: Option<DisagreementPolicy>,
    /// param:from:to:steps, e.g. c2:0.5:4:8.
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<SweepAxis>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write an SVG line chart of the sweep here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Costs(Vec<f64>);

fn parse_costs(s: &str) -> Result<Costs, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Costs)
}

fn parse_disagreement(s: &str) -> Result<DisagreementPolicy, String> {
    match s {
        "zero" => Ok(DisagreementPolicy::Zero),
        "competitive" => Ok(DisagreementPolicy::RegulatedCompetitive),
        _ => {
            let Costs(v) = parse_costs(s).map_err(|_| format!("expected zero, competitive or d1,d2, got '{s}'"))?;
            match v.as_slice() {
                [d1, d2] if d1.is_finite() && d2.is_finite() => Ok(DisagreementPolicy::Custom { d1: *d1, d2: *d2 }),
                _ => Err(format!("expected zero, competitive or d1,d2, got '{s}'")),
            }
        }
    }
}

fn parse_sweep(s: &str) -> Result<SweepAxis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [param, from, to, steps] = parts.as_slice() else {
        return Err(format!("expected param:from:to:steps, got '{s}'"));
    };
    let param = match *param {
        "r" => SweepParam::R,
        "c" => SweepParam::C,
        "c1" => SweepParam::C1,
        "c2" => SweepParam::C2,
        "n" => SweepParam::N,
        "a1-bar" | "a1_bar" => SweepParam::A1Bar,
        "r2" => SweepParam::R2,
        other => return Err(format!("unknown sweep parameter '{other}' (r, c, c1, c2, n, a1-bar, r2)")),
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    let (from, to) = (num(from)?, num(to)?);
    if !(from.is_finite() && to.is_finite()) {
        return Err("sweep bounds must be finite".into());
    }
    let steps: usize = steps.parse().map_err(|_| format!("'{steps}' is not a step count"))?;
    if steps < 2 {
        return Err("steps must be >= 2".into());
    }
    Ok(SweepAxis { param, from, to, steps })
}

/// Values read from a `--config` file. Keys mirror the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Option<ScenarioName>,
    r: Option<f64>,
    c: Option<ConfigCosts>,
    n: Option<usize>,
    a1_bar: Option<f64>,
    r2: Option<f64>,
    branch: Option<BranchArg>,
    disagreement: Option<ConfigDisagreement>,
    sweep: Option<String>,
    format: Option<Format>,
    plot: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ConfigCosts {
    List(Vec<f64>),
    One(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ConfigDisagreement {
    Pair([f64; 2]),
    Text(String),
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--config: {}: {e}", path.display())))
}

/// Parses `argv` (without the program name).
pub fn parse_args<I, S>(argv: I) -> Result<RunSpec, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("revshare")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => {
            let text = e.to_string();
            CliError::Usage(text.trim_start_matches("error: ").trim_end().to_string())
        }
    })?;
    let (command, a) = match cli.command {
        CommandArgs::Solve(a) => (Command::Solve, a),
        CommandArgs::Sweep(a) => (Command::Sweep, a),
        CommandArgs::Compare(a) => (Command::Compare, a),
        CommandArgs::Verify(a) => (Command::Verify, a),
        CommandArgs::Shapley(a) => (Command::Shapley, a),
        CommandArgs::Nbs(a) => (Command::Nbs, a),
    };
    let file = match &a.config {
        Some(p) => read_config(p)?,
        None => ConfigFile::default(),
    };
    build_spec(command, a, file)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn build_spec(command: Command, a: CommonArgs, file: ConfigFile) -> Result<RunSpec, CliError> {
    let scenario = a.scenario.or(file.scenario);
    let costs = match (a.c, file.c) {
        (Some(Costs(v)), _) => Some(v),
        (None, Some(ConfigCosts::List(v))) => Some(v),
        (None, Some(ConfigCosts::One(x))) => Some(vec![x]),
        (None, Some(ConfigCosts::Text(s))) => Some(parse_costs(&s).map_err(|e| usage(format!("--config: c: {e}")))?.0),
        (None, None) => None,
    };
    let disagreement = match (a.disagreement, file.disagreement) {
        (Some(d), _) => d,
        (None, Some(ConfigDisagreement::Pair([d1, d2]))) => DisagreementPolicy::Custom { d1, d2 },
        (None, Some(ConfigDisagreement::Text(s))) => {
            parse_disagreement(&s).map_err(|e| usage(format!("--config: disagreement: {e}")))?
        }
        (None, None) => DisagreementPolicy::default(),
    };
    let sweep_axis = match (a.sweep, file.sweep) {
        (Some(s), _) => Some(s),
        (None, Some(s)) => Some(parse_sweep(&s).map_err(|e| usage(format!("--config: sweep: {e}")))?),
        (None, None) => None,
    };
    let mut settings = Settings {
        r: a.r.or(file.r).unwrap_or(f64::NAN),
        costs: costs.unwrap_or_default(),
        n: a.n.or(file.n),
        a1_bar: a.a1_bar.or(file.a1_bar),
        r2: a.r2.or(file.r2),
        branch: a.branch.or(file.branch).map(Branch::from),
        disagreement,
    };
    let spec_plot = a.plot.or(file.plot);
    let spec_out = a.out.or(file.out);
    let output_format = a.format.or(file.format).unwrap_or_default();

    match (command, &sweep_axis) {
        (Command::Sweep, None) => return Err(usage("sweep needs --sweep param:from:to:steps")),
        (Command::Sweep, Some(_)) => {}
        (_, Some(_)) => return Err(usage("--sweep is only valid with the sweep command")),
        _ => {}
    }
    if spec_plot.is_some() && command != Command::Sweep {
        return Err(usage("--plot is only valid with the sweep command"));
    }

    match command {
        Command::Verify => {
            if settings.r.is_nan() {
                settings.r = 10.0;
            }
            if settings.costs.is_empty() {
                settings.costs = vec![0.5, 1.0];
            }
            check_r(settings.r)?;
            check_costs(&settings.costs, 2, "verify")?;
            if settings.r <= settings.c1() + settings.c2() {
                return Err(usage("--r: verify needs r > c1 + c2"));
            }
            if settings.n.is_none() {
                settings.n = Some(5);
            }
            return Ok(RunSpec {
                command,
                scenario,
                settings,
                sweep_axis,
                output_format,
                plot: spec_plot,
                out: spec_out,
            });
        }
        Command::Shapley | Command::Nbs => {
            if scenario.is_some() {
                return Err(usage("--scenario is not used by this command"));
            }
            require_r(&settings)?;
            check_costs(&settings.costs, 2, if command == Command::Shapley { "shapley" } else { "nbs" })?;
            if command == Command::Shapley && settings.branch.is_none() {
                return Err(usage("missing --branch: shapley needs isp1 or isp2"));
            }
        }
        Command::Compare => {
            let Some(name) = scenario else {
                return Err(usage("missing --scenario"));
            };
            if !name.is_comparison() {
                return Err(usage(format!(
                    "--scenario: compare needs compare-public-private, compare-coop-comp or n-scaling, got {}",
                    name.as_str()
                )));
            }
            check_scenario(name, &mut settings, sweep_axis.as_ref())?;
        }
        Command::Solve | Command::Sweep => {
            let Some(name) = scenario else {
                return Err(usage("missing --scenario"));
            };
            check_scenario(name, &mut settings, sweep_axis.as_ref())?;
        }
    }
    Ok(RunSpec {
        command,
        scenario,
        settings,
        sweep_axis,
        output_format,
        plot: spec_plot,
        out: spec_out,
    })
}

fn check_r(r: f64) -> Result<(), CliError> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--r: must be a finite number > 0, got {r}")))
    }
}

fn require_r(s: &Settings) -> Result<(), CliError> {
    if s.r.is_nan() {
        return Err(usage("missing --r"));
    }
    check_r(s.r)
}

fn check_costs(costs: &[f64], expected: usize, what: &str) -> Result<(), CliError> {
    if costs.is_empty() {
        return Err(usage("missing --c"));
    }
    if costs.len() != expected {
        return Err(usage(format!(
            "--c: {what} needs {expected} cost(s), got {}",
            costs.len()
        )));
    }
    for &c in costs {
        if !(c.is_finite() && c > 0.0) {
            return Err(usage(format!("--c: costs must be finite and > 0, got {c}")));
        }
    }
    Ok(())
}

fn check_scenario(name: ScenarioName, s: &mut Settings, sweep: Option<&SweepAxis>) -> Result<(), CliError> {
    require_r(s)?;
    let expected = if name.is_symmetric() { 1 } else { 2 };
    check_costs(&s.costs, expected, name.as_str())?;
    let sweeps = |p: SweepParam| sweep.is_some_and(|a| a.param == p);
    if let Some(axis) = sweep {
        let ok = match axis.param {
            SweepParam::R => true,
            SweepParam::C => true,
            SweepParam::C1 | SweepParam::C2 => expected == 2,
            SweepParam::N => name.is_symmetric(),
            SweepParam::A1Bar => matches!(
                name,
                ScenarioName::PublicPrivateRegulated | ScenarioName::FixedPublicEffortCoop
            ),
            SweepParam::R2 => matches!(name, ScenarioName::MultiCpCompetitive | ScenarioName::MultiCpCooperative),
        };
        if !ok {
            return Err(usage(format!(
                "--sweep: {} cannot be swept for {}",
                axis.param.as_str(),
                name.as_str()
            )));
        }
        if axis.param == SweepParam::N && axis.from.min(axis.to) < 1.0 {
            return Err(usage("--sweep: n must stay >= 1"));
        }
    }
    if name.is_symmetric() && s.n.is_none() && !sweeps(SweepParam::N) {
        return Err(usage(format!("missing --n: {} needs the number of ISPs", name.as_str())));
    }
    if s.n == Some(0) {
        return Err(usage("--n: must be >= 1"));
    }
    if matches!(
        name,
        ScenarioName::PublicPrivateRegulated | ScenarioName::FixedPublicEffortCoop
    ) {
        match s.a1_bar {
            None if !sweeps(SweepParam::A1Bar) => {
                return Err(usage(format!("missing --a1-bar: {} needs the public ISP effort", name.as_str())))
            }
            Some(a) if !(a.is_finite() && a >= 0.0) => {
                return Err(usage(format!("--a1-bar: must be finite and >= 0, got {a}")))
            }
            _ => {}
        }
    }
    if matches!(name, ScenarioName::MultiCpCompetitive | ScenarioName::MultiCpCooperative) {
        match s.r2 {
            None if !sweeps(SweepParam::R2) => {
                return Err(usage(format!("missing --r2: {} needs the second CP rate", name.as_str())))
            }
            Some(r2) if !(r2.is_finite() && r2 > 0.0) => {
                return Err(usage(format!("--r2: must be finite and > 0, got {r2}")))
            }
            _ => {}
        }
    }
    if name == ScenarioName::MultiCpCooperative && s.branch.is_none() {
        return Err(usage("missing --branch: multi-cp-cooperative needs isp1 or isp2"));
    }
    if name == ScenarioName::NScaling && s.n.is_none() {
        s.n = Some(10);
    }
    Ok(())
}
