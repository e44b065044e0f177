//! The four subcommands as library functions returning their outputs.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use will_testing::analysis::{self, GuaranteeReport};
use will_testing::population::{parse_strategies, Deviation};
use will_testing::{
    DensityF64, GameParamsF64, InitialCondition, InteractionGraph, Observation, PolicyF64,
    PopulationF64, QuadratureSpec, RevisionPolicy,
};

use crate::format::cell;
use crate::svg;

pub const SCHEMA_VERSION: u32 = 1;

/// Default curves: both sides of the uniform case plus the two straight lines.
pub const DEFAULT_DENSITY_RHOS: [f64; 5] = [0.2, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.8];

pub fn default_verify_rhos() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Parses `0.25` or a fraction such as `1/3`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("{s:?}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not a finite number"))
    }
}

fn params(rho: f64, horizon: f64) -> Result<GameParamsF64> {
    GameParamsF64::new(rho, horizon).with_context(|| {
        format!("invalid game parameters (rho = {rho}, T = {horizon})")
    })
}

// ---------------------------------------------------------------- density

#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub rhos: Vec<f64>,
    pub horizon: f64,
    pub s: Vec<f64>,
    /// One column per rho; `+inf` where the density diverges.
    pub columns: Vec<Vec<f64>>,
}

pub fn density_table(rhos: &[f64], horizon: f64, grid: usize) -> Result<DensityTable> {
    if grid < 2 {
        bail!("grid must have at least 2 points, got {grid}");
    }
    if rhos.is_empty() {
        bail!("at least one rho is required");
    }
    let densities = rhos
        .iter()
        .map(|&r| params(r, horizon).map(DensityF64::build))
        .collect::<Result<Vec<_>>>()?;
    let last = grid - 1;
    let s: Vec<f64> = (0..grid)
        .map(|i| {
            if i == last {
                horizon
            } else {
                horizon * i as f64 / last as f64
            }
        })
        .collect();
    let columns = densities
        .iter()
        .map(|d| s.iter().map(|&x| d.den_unchecked(x)).collect())
        .collect();
    Ok(DensityTable {
        rhos: rhos.to_vec(),
        horizon,
        s,
        columns,
    })
}

impl DensityTable {
    pub fn header(&self) -> Vec<String> {
        std::iter::once("s".to_string())
            .chain(self.rhos.iter().map(|&r| format!("den_rho_{}", cell(r))))
            .collect()
    }

    /// CSV with 12 significant digits; divergent values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for (i, &s) in self.s.iter().enumerate() {
            out.push_str(&cell(s));
            for col in &self.columns {
                out.push(',');
                out.push_str(&cell(col[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self, ceiling: f64) -> String {
        let series: Vec<svg::Series<'_>> = self
            .rhos
            .iter()
            .zip(&self.columns)
            .map(|(&r, col)| svg::Series {
                label: format!("rho = {}", crate::format::sig(r, 4)),
                x: &self.s,
                y: col,
            })
            .collect();
        svg::line_plot(&series, self.horizon, ceiling, "s", "den(s)")
    }
}

/// Default plot ceiling: ten times the uniform density `1 / T`.
pub fn default_ceiling(horizon: f64) -> f64 {
    10.0 / horizon
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyTolerances {
    pub normalization: f64,
    /// Relative to `T`.
    pub constant_pay: f64,
    pub residual_analytic: f64,
    pub residual_fd_relative: f64,
    pub roundtrip: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            normalization: 1e-6,
            constant_pay: 1e-6,
            residual_analytic: 1e-10,
            residual_fd_relative: 1e-4,
            roundtrip: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub rho: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub horizon: f64,
    pub quadrature: QuadratureSpec,
    pub tolerances: VerifyTolerances,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

pub fn verify(
    rhos: &[f64],
    horizon: f64,
    quad: &QuadratureSpec,
    tol: &VerifyTolerances,
) -> Result<VerifyReport> {
    if rhos.is_empty() {
        bail!("at least one rho is required");
    }
    quad.validate()?;
    let densities = rhos
        .iter()
        .map(|&r| params(r, horizon).map(DensityF64::build))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for d in &densities {
        checks.extend(verify_one(d, quad, tol)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        horizon,
        quadrature: *quad,
        tolerances: *tol,
        checks,
        pass,
    })
}

fn verify_one(d: &DensityF64, quad: &QuadratureSpec, tol: &VerifyTolerances) -> Result<Vec<CheckResult>> {
    let rho = d.rho();
    let t = d.horizon();
    let mut out = Vec::new();
    let mut push = |check: &str, max_residual: f64, tolerance: f64, note: Option<String>| {
        out.push(CheckResult {
            check: check.into(),
            rho,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            note,
        })
    };

    push(
        "normalization",
        (d.normalization(quad)? - 1.0).abs(),
        tol.normalization,
        None,
    );
    push(
        "expected_remaining",
        (d.expected_remaining(quad)? - rho * t).abs(),
        tol.constant_pay * t,
        None,
    );

    let mut pay_gap: f64 = 0.0;
    for i in 0..=10 {
        let s = t * i as f64 / 10.0;
        pay_gap = pay_gap.max((d.pay_numeric(s, quad)? - d.constant_pay()).abs());
    }
    push("constant_pay", pay_gap, tol.constant_pay * t, None);

    let (mut e2, mut e2fd, mut e3, mut e3fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 1..20 {
        let s = t * i as f64 / 20.0;
        let c2 = d.check_indifference(s)?;
        let c3 = d.check_ode(s)?;
        e2 = e2.max(c2.analytic.abs());
        e3 = e3.max(c3.analytic.abs());
        e2fd = e2fd.max(c2.relative_fd());
        e3fd = e3fd.max(c3.relative_fd());
    }
    push("indifference_residual_analytic", e2, tol.residual_analytic, None);
    push("indifference_residual_finite_difference", e2fd, tol.residual_fd_relative, None);
    push("ode_residual_analytic", e3, tol.residual_analytic, None);
    push("ode_residual_finite_difference", e3fd, tol.residual_fd_relative, None);

    let (worst, ulp_limited, ok) = roundtrip(d, tol.roundtrip);
    let note = (ulp_limited > 0).then(|| {
        format!("{ulp_limited} of 1001 points exceed the tolerance only because the quantile lies within one ulp of a float that maps back exactly")
    });
    out.push(CheckResult {
        check: "cdf_roundtrip".into(),
        rho,
        max_residual: worst,
        tolerance: tol.roundtrip,
        pass: ok,
        note,
    });
    Ok(out)
}

/// `|F(F^-1(u)) - u|` on a 1001-point grid. A point that misses `tol` still
/// passes when `u` lies between the CDF at the floats adjacent to the
/// returned quantile, i.e. the quantile is off by at most one ulp.
fn roundtrip(d: &DensityF64, tol: f64) -> (f64, usize, bool) {
    let t = d.horizon();
    let mut worst: f64 = 0.0;
    let mut limited = 0;
    let mut ok = true;
    for k in 0..=1000 {
        let u = k as f64 / 1000.0;
        let s = d.inverse_cdf_unchecked(u);
        let err = (d.cdf_unchecked(s) - u).abs();
        worst = worst.max(err);
        if err > tol {
            let lo = d.cdf_unchecked(next_down(s));
            let hi = d.cdf_unchecked(next_up(s).min(t));
            if lo - tol <= u && u <= hi + tol {
                limited += 1;
            } else {
                ok = false;
            }
        }
    }
    (worst, limited, ok)
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Complete,
    File(PathBuf),
}

impl std::str::FromStr for GraphSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "complete" => Self::Complete,
            path => Self::File(path.into()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSource {
    Equal,
    Uniform,
    Equilibrium,
    File(PathBuf),
}

impl std::str::FromStr for InitSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "equal" => Self::Equal,
            "uniform" => Self::Uniform,
            "equilibrium" => Self::Equilibrium,
            path => Self::File(path.into()),
        })
    }
}

/// `full` or a sample size `k`.
pub fn parse_observation(s: &str) -> Result<Observation, String> {
    match s {
        "full" => Ok(Observation::Full),
        k => k
            .parse::<usize>()
            .map(Observation::Sampled)
            .map_err(|_| format!("expected \"full\" or a count, got {k:?}")),
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub rho: f64,
    pub horizon: f64,
    /// Player count; taken from the graph file when one is given.
    pub n: usize,
    pub rounds: usize,
    pub seed: u64,
    /// Defaults to `1e-9 T`.
    pub epsilon: Option<f64>,
    pub observe: Observation,
    pub graph: GraphSource,
    pub init: InitSource,
    /// Value used by `InitSource::Equal`; defaults to `T / 2`.
    pub equal_value: Option<f64>,
    pub revisions_per_round: usize,
    pub simultaneous: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            horizon: 1.0,
            n: 100,
            rounds: 100,
            seed: 42,
            epsilon: None,
            observe: Observation::Full,
            graph: GraphSource::Complete,
            init: InitSource::Equilibrium,
            equal_value: None,
            revisions_per_round: 1,
            simultaneous: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub schema_version: u32,
    pub rho: f64,
    pub horizon: f64,
    pub n: usize,
    pub rounds: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub observation: Observation,
    pub revisions_per_round: usize,
    pub simultaneous: bool,
    pub graph: String,
    pub initial_ks: f64,
    pub final_ks: f64,
    pub final_mean_pay: f64,
    /// `final_mean_pay - rho T`.
    pub mean_pay_gap: f64,
    pub max_abs_mean_pay_gap: f64,
    pub mean_churn: f64,
    pub final_is_pure_equilibrium: bool,
    pub final_witness: Option<Deviation<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub csv: String,
    pub summary: SimSummary,
}

pub fn simulate(cfg: &SimulateConfig) -> Result<SimulateOutput> {
    let p = params(cfg.rho, cfg.horizon)?;
    if cfg.rounds == 0 {
        bail!("rounds must be at least 1");
    }
    let graph = match &cfg.graph {
        GraphSource::Complete => InteractionGraph::complete(cfg.n)?,
        GraphSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading graph file {}", path.display()))?;
            InteractionGraph::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
    };
    let n = graph.len();
    let init = match &cfg.init {
        InitSource::Equal => InitialCondition::Equal(cfg.equal_value.unwrap_or(cfg.horizon / 2.0)),
        InitSource::Uniform => InitialCondition::Uniform,
        InitSource::Equilibrium => InitialCondition::Equilibrium,
        InitSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading strategy file {}", path.display()))?;
            InitialCondition::Explicit(
                parse_strategies(&text, n, &p).with_context(|| format!("parsing {}", path.display()))?,
            )
        }
    };
    let epsilon = cfg
        .epsilon
        .unwrap_or(PolicyF64::DEFAULT_EPSILON_FRACTION * cfg.horizon);
    let policy = RevisionPolicy::new(epsilon, cfg.observe, cfg.revisions_per_round, &p, n)?
        .with_simultaneous(cfg.simultaneous);
    let state = PopulationF64::initialize(&init, graph, p, cfg.seed)?;
    let limit = DensityF64::build(p);
    let initial_ks = will_testing::stats::ks_distance(state.strategies(), |x| limit.cdf_unchecked(x));
    let report = state.run(&policy, cfg.rounds, &limit)?;

    let mut csv = String::from("round,churn,mean_pay,ks\n");
    for r in &report.rounds {
        let _ = writeln!(csv, "{},{},{},{}", r.round, cell(r.churn), cell(r.mean_pay), cell(r.ks));
    }
    let last = report.rounds.last().expect("rounds >= 1");
    let target = p.rho() * p.horizon();
    let check = report.final_state.is_pure_equilibrium(epsilon, 1e-12 * cfg.horizon);
    let summary = SimSummary {
        schema_version: SCHEMA_VERSION,
        rho: cfg.rho,
        horizon: cfg.horizon,
        n,
        rounds: cfg.rounds,
        seed: cfg.seed,
        epsilon,
        observation: cfg.observe,
        revisions_per_round: cfg.revisions_per_round,
        simultaneous: cfg.simultaneous,
        graph: match &cfg.graph {
            GraphSource::Complete => "complete".into(),
            GraphSource::File(p) => p.display().to_string(),
        },
        initial_ks,
        final_ks: last.ks,
        final_mean_pay: last.mean_pay,
        mean_pay_gap: last.mean_pay - target,
        max_abs_mean_pay_gap: report
            .rounds
            .iter()
            .map(|r| (r.mean_pay - target).abs())
            .fold(0.0, f64::max),
        mean_churn: report.rounds.iter().map(|r| r.churn).sum::<f64>() / report.rounds.len() as f64,
        final_is_pure_equilibrium: check.is_equilibrium,
        final_witness: check.witness,
    };
    Ok(SimulateOutput { csv, summary })
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, Serialize)]
pub struct ZeroPlay {
    /// Opponent payoff for a sample of opponent strategies.
    pub opponent_s: Vec<f64>,
    pub opponent_payoff: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoldOutPlay {
    pub opponent_s: Vec<f64>,
    pub opponent_payoff: Vec<f64>,
    pub own_payoff: Vec<f64>,
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Alternation {
    pub rounds: usize,
    pub per_player: [f64; 2],
    /// `(T + rho T) / 2`.
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub rho: f64,
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub fixed_vs_mixed: Vec<GuaranteeReport>,
    /// `max - min` of the analytic values over the s-grid.
    pub fixed_vs_mixed_spread: f64,
    pub mixed_vs_fixed_t: GuaranteeReport,
    pub play_zero: ZeroPlay,
    pub play_t: HoldOutPlay,
    pub alternation: Alternation,
    /// Every Monte Carlo estimate within 4 standard errors of its analytic value.
    pub all_consistent: bool,
}

pub fn analyze(rho: f64, horizon: f64, samples: usize, seed: u64) -> Result<AnalyzeReport> {
    let p = params(rho, horizon)?;
    let d = DensityF64::build(p);
    let quad = QuadratureSpec::default();
    let grid: Vec<f64> = (0..=10).map(|i| horizon * i as f64 / 10.0).collect();
    let fixed = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| analysis::fixed_vs_mixed(s, &d, samples, seed.wrapping_add(i as u64), &quad))
        .collect::<will_testing::Result<Vec<_>>>()?;
    let (lo, hi) = fixed
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.analytic), hi.max(r.analytic))
        });
    let mixed = analysis::mixed_vs_fixed_t(&d, samples, seed.wrapping_add(1000), &quad)?;

    let opp: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|f| f * horizon).collect();
    let play_zero = ZeroPlay {
        opponent_payoff: opp
            .iter()
            .map(|&s| analysis::play_zero_guarantee(s, &p))
            .collect::<will_testing::Result<_>>()?,
        opponent_s: opp.clone(),
    };
    let below_t: Vec<f64> = opp[..4].to_vec();
    let pairs = below_t
        .iter()
        .map(|&s| analysis::play_t_ratio(s, &p))
        .collect::<will_testing::Result<Vec<_>>>()?;
    let play_t = HoldOutPlay {
        opponent_s: below_t,
        opponent_payoff: pairs.iter().map(|x| x.0).collect(),
        own_payoff: pairs.iter().map(|x| x.1).collect(),
        ratio: pairs.iter().map(|x| x.0 / x.1).collect(),
    };
    let rounds = 1000;
    let alternation = Alternation {
        rounds,
        per_player: analysis::alternation_split(&p, rounds)?,
        expected: (horizon + rho * horizon) / 2.0,
    };
    let all_consistent = fixed.iter().all(GuaranteeReport::consistent) && mixed.consistent();
    Ok(AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        rho,
        horizon,
        samples,
        seed,
        fixed_vs_mixed_spread: hi - lo,
        fixed_vs_mixed: fixed,
        mixed_vs_fixed_t: mixed,
        play_zero,
        play_t,
        alternation,
        all_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert_eq!(parse_number("1/3").unwrap(), 1.0 / 3.0);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
    }

    #[test]
    fn density_rows() {
        let t = density_table(&[0.5], 1.0, 3).unwrap();
        assert_eq!(t.to_csv(), "s,den_rho_0.5\n0,1\n0.5,1\n1,1\n");
        let t = density_table(&[2.0 / 3.0], 1.0, 3).unwrap();
        assert_eq!(t.to_csv(), "s,den_rho_0.666666666667\n0,2\n0.5,1\n1,0\n");
        let t = density_table(&[1.0 / 3.0], 1.0, 3).unwrap();
        assert!(t.to_csv().ends_with("\n1,\n"));
        assert!(t.to_svg(10.0).contains("clip-marker"));
    }

    #[test]
    fn density_rejects_bad_input() {
        assert!(density_table(&[1.0], 1.0, 10).is_err());
        assert!(density_table(&[0.5], 1.0, 1).is_err());
        assert!(density_table(&[0.5], -1.0, 10).is_err());
        let msg = format!("{:#}", density_table(&[0.0], 1.0, 10).unwrap_err());
        assert!(msg.contains("(0, 1)"), "{msg}");
    }

    #[test]
    fn verify_default_and_degenerate() {
        let quad = QuadratureSpec::default();
        let tol = VerifyTolerances::default();
        let r = verify(&DEFAULT_DENSITY_RHOS, 1.0, &quad, &tol).unwrap();
        assert!(r.pass, "{:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        let r = verify(&[0.999], 1.0, &quad, &tol).unwrap();
        assert!(r.pass, "{:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert!(verify(&[1.0], 1.0, &quad, &tol).is_err());
    }

    #[test]
    fn simulate_two_player_tie() {
        let cfg = SimulateConfig {
            n: 2,
            rounds: 1,
            init: InitSource::Equal,
            ..Default::default()
        };
        let out = simulate(&cfg).unwrap();
        let row = out.csv.lines().nth(1).unwrap();
        assert!(row.starts_with("1,1,"), "{row}");
    }

    #[test]
    fn analyze_alternation() {
        let r = analyze(0.5, 1.0, 10_000, 1).unwrap();
        assert_eq!(r.alternation.per_player, [0.75, 0.75]);
        assert!(r.fixed_vs_mixed_spread <= 1e-6);
        assert_eq!(r.mixed_vs_fixed_t.discrepancy, Some(false));
        let r = analyze(2.0 / 3.0, 1.0, 10_000, 1).unwrap();
        assert_eq!(r.mixed_vs_fixed_t.discrepancy, Some(true));
    }
}
