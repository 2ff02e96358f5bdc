use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use disloc_core::dynamics::integrator::{BdfOptions, StepStats};
use disloc_core::dynamics::{integrate, Model, SimState, Snapshot, TimeSeries};
use disloc_core::{Config, Error, Field2D};

pub const TIMESERIES_HEADER: &str = "t,position,E0,E1,E_total,dissipation_lhs,dissipation_rhs";
pub const PROFILES_HEADER: &str = "snapshot_index,t,x,u";

/// Everything a finished run produced, kept in memory as well as on disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub final_state: SimState,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub snapshots: usize,
    pub stats: StepStats,
    pub setup_time: Duration,
    pub solve_time: Duration,
}

/// Error from [`run`]: carries the core error plus how far the run got.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot write outputs to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model setup failed: {0}")]
    Setup(#[source] Error),
    #[error("integration failed after {completed} of {requested} snapshots: {source}")]
    Integration {
        completed: usize,
        requested: usize,
        #[source]
        source: Error,
    },
}

struct Collector {
    profiles: String,
    timeseries: String,
    fields: Vec<(usize, String)>,
    full_field: bool,
    completed: usize,
}

impl Collector {
    fn observe(&mut self, s: &Snapshot<'_>) {
        let grid = s.profile.grid();
        for (i, u) in s.profile.values().iter().enumerate() {
            let _ = writeln!(self.profiles, "{},{},{},{}", s.index, s.t, grid.x(i), u);
        }
        let e = &s.record.energy;
        let pos = s.record.position.map(|c| c.x.to_string()).unwrap_or_default();
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            self.timeseries,
            "{},{},{},{},{},{},{}",
            s.t,
            pos,
            e.e0,
            e.e1,
            e.e_total,
            opt(e.dissipation_lhs),
            opt(e.dissipation_rhs)
        );
        if self.full_field {
            self.fields.push((s.index, field_csv(s.field)));
        }
        self.completed += 1;
    }
}

/// Row-major nodal values under a one-line `Nx,Ny,L,H` header.
pub fn field_csv(field: &Field2D) -> String {
    let g = field.grid();
    let mut out = format!("{},{},{},{}\n", g.nx(), g.ny(), g.half_width(), g.height());
    for j in 0..=g.ny() {
        let row: Vec<String> = field.row(j).iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    let io = |source| RunError::Io {
        path: path.clone(),
        source,
    };
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, &path).map_err(io)
}

/// Runs `cfg` and writes `timeseries.csv`, `profiles.csv`, `config.resolved`,
/// `run.log` and (optionally) `field_<k>.csv` into `dir`.
///
/// On an integration failure the snapshots computed so far are still
/// written and `run.log` records the run as partial.
pub fn run(cfg: &Config, dir: &Path) -> Result<RunOutput, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let started = Instant::now();
    let model = Model::from_config(cfg).map_err(RunError::Setup)?;
    let setup_time = started.elapsed();
    let state0 = SimState::new(model.initial_profile(&cfg.ic));
    let times = cfg.snapshot_times();

    let mut collector = Collector {
        profiles: format!("{PROFILES_HEADER}\n"),
        timeseries: format!("{TIMESERIES_HEADER}\n"),
        fields: Vec::new(),
        full_field: cfg.output.full_field,
        completed: 0,
    };
    let solve_start = Instant::now();
    let result = integrate(
        &model,
        &state0,
        &times,
        &BdfOptions::default(),
        &mut |s: &Snapshot<'_>| {
            collector.observe(s);
            Ok(())
        },
    );
    let solve_time = solve_start.elapsed();

    let mut log = String::new();
    let _ = writeln!(log, "grid: {}x{} cells", cfg.grid.nx(), cfg.grid.ny());
    let _ = writeln!(log, "final time: {}", cfg.params.final_time);
    let _ = writeln!(log, "snapshots: {} of {}", collector.completed, times.len());
    let _ = writeln!(log, "setup seconds: {:.3}", setup_time.as_secs_f64());
    let _ = writeln!(log, "integration seconds: {:.3}", solve_time.as_secs_f64());
    match &result {
        Ok((_, state)) => {
            let s = state.stats;
            let _ = writeln!(
                log,
                "steps: {} accepted, {} rejected; newton iterations {}, failures {}; jacobians {}, factorizations {}",
                s.accepted, s.rejected, s.newton_iterations, s.newton_failures, s.jacobian_evaluations, s.factorizations
            );
            let _ = writeln!(log, "status: complete");
        }
        Err(e) => {
            let _ = writeln!(log, "status: PARTIAL ({e})");
        }
    }

    write_atomic(dir, "config.resolved", &cfg.render())?;
    write_atomic(dir, "timeseries.csv", &collector.timeseries)?;
    write_atomic(dir, "profiles.csv", &collector.profiles)?;
    for (k, text) in &collector.fields {
        write_atomic(dir, &format!("field_{k}.csv"), text)?;
    }
    write_atomic(dir, "run.log", &log)?;

    let (series, final_state) = result.map_err(|source| RunError::Integration {
        completed: collector.completed,
        requested: times.len(),
        source,
    })?;
    Ok(RunOutput {
        summary: RunSummary {
            dir: dir.to_path_buf(),
            snapshots: series.records.len(),
            stats: final_state.stats,
            setup_time,
            solve_time,
        },
        series,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use disloc_core::GridSpec;

    #[test]
    fn field_csv_layout() {
        let grid = GridSpec::new(2.0, 1.0, 4, 4).unwrap();
        let f = Field2D::from_fn(grid, |x, y| x + y).unwrap();
        let text = field_csv(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "4,4,2,1");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1].split(',').count(), 5);
        assert_eq!(lines[1].split(',').next(), Some("-2"));
    }
}
