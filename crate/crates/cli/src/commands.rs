use pcinterp::minimax::ClassConstraint;
use pcinterp::spectral::DEFAULT_GRID;
use pcinterp::{
    interpolate, least_favorable_d0, least_favorable_dg, trial_errors, verify_saddle, DensitySpec,
    EmpiricalMseReport, MinimaxSolution, QuadratureConfig, Taps,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::dto::{DensityDto, InterpolateConfig, MinimaxD0Config, MinimaxDgConfig, QuadDto, SimulateConfig};
use crate::error::CliError;
use crate::report;

pub const GRID_ENV: &str = "PCINTERP_GRID";
const DEFAULT_SADDLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Interpolate,
    MinimaxD0,
    MinimaxDg,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Interpolate => "interpolate",
            Command::MinimaxD0 => "minimax-d0",
            Command::MinimaxDg => "minimax-dg",
            Command::Simulate => "simulate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Command::Interpolate, Command::MinimaxD0, Command::MinimaxDg, Command::Simulate]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

/// Settings actually used for a run, recorded in the report.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub grid: usize,
    pub seed: Option<u64>,
}

impl Settings {
    pub fn to_json(self) -> Value {
        json!({ "grid": self.grid, "seed": self.seed })
    }
}

pub struct Outcome {
    pub result: Value,
    pub settings: Settings,
    pub filter: Taps,
    pub errors: Option<Vec<f64>>,
}

fn resolve_grid(flag: Option<usize>, quad: &QuadDto) -> Result<usize, CliError> {
    if let Some(n) = flag.or(quad.grid) {
        return Ok(n);
    }
    match std::env::var(GRID_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Schema(format!("{GRID_ENV}={v} is not a grid size"))),
        Err(_) => Ok(DEFAULT_GRID),
    }
}

fn quadrature(grid: usize) -> Result<QuadratureConfig, CliError> {
    QuadratureConfig::new(grid).map_err(|e| CliError::Schema(e.to_string()))
}

fn parse<T: DeserializeOwned>(config: &Value) -> Result<T, CliError> {
    Ok(T::deserialize(config)?)
}

pub fn run(command: Command, config: &Value, overrides: Overrides) -> Result<Outcome, CliError> {
    match command {
        Command::Interpolate => run_interpolate(parse(config)?, overrides),
        Command::MinimaxD0 => run_minimax_d0(parse(config)?, overrides),
        Command::MinimaxDg => run_minimax_dg(parse(config)?, overrides),
        Command::Simulate => run_simulate(parse(config)?, overrides),
    }
}

fn run_interpolate(cfg: InterpolateConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let grid = resolve_grid(ov.grid, &cfg.quad)?;
    let quad = quadrature(grid)?;
    let f = cfg.f.build()?;
    let g = cfg.g.as_ref().map(DensityDto::build).transpose()?;
    if let Some(g) = &g {
        if g.dim() != f.dim() {
            return Err(CliError::Schema(format!("g has T={}, f has T={}", g.dim(), f.dim())));
        }
    }
    let func = cfg.functional.build(f.dim(), cfg.pattern.as_ref())?;
    let sol = interpolate(&f, g.as_ref(), &func.vector, &quad)?;
    Ok(Outcome {
        result: report::interpolation(&sol, func.period),
        settings: Settings { grid, seed: None },
        filter: sol.taps,
        errors: None,
    })
}

fn saddle_candidates(list: &[DensityDto]) -> Result<Vec<DensitySpec>, CliError> {
    list.iter().map(DensityDto::build).collect()
}

fn minimax_outcome(
    sol: MinimaxSolution,
    period: Option<usize>,
    saddle: Option<pcinterp::SaddleReport>,
    grid: usize,
) -> Outcome {
    Outcome {
        result: report::minimax(&sol, period, saddle.as_ref()),
        settings: Settings { grid, seed: None },
        filter: sol.solution.taps,
        errors: None,
    }
}

fn run_minimax_d0(cfg: MinimaxD0Config, ov: Overrides) -> Result<Outcome, CliError> {
    let grid = resolve_grid(ov.grid, &cfg.quad)?;
    let quad = quadrature(grid)?;
    let class = cfg.class()?;
    let t = class.p.nrows();
    let func = cfg.functional.build(t, cfg.pattern.as_ref())?;
    let lead = cfg.lead_inverse();
    let sol = least_favorable_d0(&class, &func.vector, lead.as_ref(), &quad)?;
    let candidates = saddle_candidates(&cfg.candidates)?;
    let saddle = if candidates.is_empty() {
        None
    } else {
        let tol = cfg.quad.saddle_tol.unwrap_or(DEFAULT_SADDLE_TOL);
        Some(verify_saddle(&sol, &ClassConstraint::D0(&class), &candidates, &func.vector, tol, &quad)?)
    };
    Ok(minimax_outcome(sol, func.period, saddle, grid))
}

fn run_minimax_dg(cfg: MinimaxDgConfig, ov: Overrides) -> Result<Outcome, CliError> {
    let grid = resolve_grid(ov.grid, &cfg.quad)?;
    let quad = quadrature(grid)?;
    let class = cfg.class()?;
    let t = class.p[0].nrows();
    let func = cfg.functional.build(t, cfg.pattern.as_ref())?;
    let sol = least_favorable_dg(&class, &func.vector, &quad)?;
    let candidates = saddle_candidates(&cfg.candidates)?;
    let saddle = if candidates.is_empty() {
        None
    } else {
        let tol = cfg.quad.saddle_tol.unwrap_or(DEFAULT_SADDLE_TOL);
        Some(verify_saddle(&sol, &ClassConstraint::DG(&class), &candidates, &func.vector, tol, &quad)?)
    };
    Ok(minimax_outcome(sol, func.period, saddle, grid))
}

fn run_simulate(cfg: SimulateConfig, ov: Overrides) -> Result<Outcome, CliError> {
    if cfg.trials < 2 {
        return Err(CliError::Schema("trials must be at least 2".into()));
    }
    let grid = resolve_grid(ov.grid, &cfg.quad)?;
    let quad = quadrature(grid)?;
    let seed = ov.seed.unwrap_or(cfg.seed);
    let signal = cfg.generator.build(seed)?;
    let noise = cfg.noise_generator.as_ref().map(|g| g.build(seed.wrapping_add(1))).transpose()?;
    let f = signal.density()?;
    let g = noise.as_ref().map(|n| n.density()).transpose()?;
    if let Some(n) = &noise {
        if n.dim() != signal.dim() {
            return Err(CliError::Schema(format!("noise generator has T={}, signal has T={}", n.dim(), signal.dim())));
        }
    }
    let func = cfg.functional.build(signal.dim(), cfg.pattern.as_ref())?;
    let sol = interpolate(&f, g.as_ref(), &func.vector, &quad)?;
    let errors = trial_errors(&signal, noise.as_ref(), &func.vector, &[&sol.taps], cfg.trials)?.remove(0);
    let rep = EmpiricalMseReport::from_errors(&errors, sol.delta)?;
    Ok(Outcome {
        result: json!({
            "delta": report::num(sol.delta),
            "trials": rep.trials,
            "mean": report::num(rep.mean),
            "stderr": report::num(rep.stderr),
            "z": report::num(rep.z),
            "interpolation": report::interpolation(&sol, func.period),
        }),
        settings: Settings { grid, seed: Some(seed) },
        filter: sol.taps,
        errors: Some(errors),
    })
}
