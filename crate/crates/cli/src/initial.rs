use relstring::fixtures::{localized_m_profile, smooth_hull_profile, smooth_m_profile};
use relstring::io::{load_snapshot, parse_metadata};
use relstring::wave_family::{thm1_example_init, thm1_limit_init, wave_to_augmented, WaveInitialData};
use relstring::{Boundary, Profile, SampleKind, StateU, UniformGrid};

use crate::config::{ExperimentConfig, InitialSpec};
use crate::error::CliError;

pub struct Initial {
    pub profile: Profile<StateU>,
    /// Wave-family data behind the profile, when there is one.
    pub wave: Option<WaveInitialData>,
}

fn grid_of(cfg: &ExperimentConfig, start: f64, length: f64, boundary: Boundary) -> Result<(UniformGrid, Boundary), CliError> {
    let g = &cfg.grid;
    let start = g.start.unwrap_or(start);
    let length = g.length.unwrap_or(length);
    let boundary = g.boundary.unwrap_or(boundary);
    let grid = match boundary {
        Boundary::Periodic => UniformGrid::covering(start, length, g.samples)?,
        Boundary::ConstantExtension => UniformGrid::linspace(start, start + length, g.samples)?,
    };
    Ok((grid, boundary))
}

pub fn build_initial(cfg: &ExperimentConfig) -> Result<Initial, CliError> {
    let spec = cfg.initial.as_ref().ok_or_else(|| CliError::Config("missing [initial] section".into()))?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let plain = |profile| Ok(Initial { profile, wave: None });
    match spec {
        InitialSpec::Constant(s) => {
            let u = s.to_state()?;
            let (grid, boundary) = grid_of(cfg, 0.0, two_pi, Boundary::Periodic)?;
            plain(Profile::from_fn(grid, boundary, SampleKind::Smooth, |_| u.clone()))
        }
        InitialSpec::Riemann { left, right, at } => {
            let (l, r) = (left.to_state()?, right.to_state()?);
            let (grid, boundary) = grid_of(cfg, -1.0, 2.0, Boundary::ConstantExtension)?;
            plain(Profile::from_fn(grid, boundary, SampleKind::PiecewiseConstant, |s| if s < *at { l.clone() } else { r.clone() }))
        }
        InitialSpec::SmoothM { d } => plain(smooth_m_profile(*d, cfg.grid.samples)),
        InitialSpec::SmoothHull { d } => plain(smooth_hull_profile(*d, cfg.grid.samples)),
        InitialSpec::LocalizedM { d } => plain(localized_m_profile(*d, cfg.grid.samples)),
        InitialSpec::Wave { n } => {
            let (grid, _) = grid_of(cfg, -two_pi, 2.0 * two_pi, Boundary::Periodic)?;
            let init = match n {
                Some(n) => thm1_example_init(*n, grid)?,
                None => thm1_limit_init(grid)?,
            };
            Ok(Initial { profile: wave_to_augmented(&init), wave: Some(init) })
        }
        InitialSpec::Snapshot { csv, meta } => {
            let read = |p: &std::path::Path| {
                let full = cfg.resolve(p);
                std::fs::read_to_string(&full).map_err(|e| CliError::io(&full, e))
            };
            let meta = parse_metadata(&read(meta)?)?;
            plain(load_snapshot(&read(csv)?, &meta)?)
        }
    }
}
