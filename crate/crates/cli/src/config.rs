//! Resolved run settings: defaults, overridden by an optional flat
//! `key = value` config file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use telequeue::laplace::DisciplineId;
use telequeue::markov::BufferSize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisciplineKind {
    Fifo,
    Lifo,
    FifoPo,
    LifoPo,
}

impl DisciplineKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(Self::Fifo),
            "lifo" => Ok(Self::Lifo),
            "fifo-po" => Ok(Self::FifoPo),
            "lifo-po" => Ok(Self::LifoPo),
            other => Err(CliError::validation(format!(
                "unknown discipline `{other}` (expected fifo, lifo, fifo-po, lifo-po)"
            ))),
        }
    }

    /// Pairs the discipline with its buffer: pushout variants carry the
    /// finite size, infinite variants force an unbounded buffer.
    pub fn with_buffer(self, buf: usize) -> (DisciplineId, BufferSize) {
        match self {
            Self::Fifo => (DisciplineId::FifoInf, BufferSize::Unbounded),
            Self::Lifo => (DisciplineId::LifoInf, BufferSize::Unbounded),
            Self::FifoPo => (DisciplineId::FifoPo(buf), BufferSize::Finite(buf)),
            Self::LifoPo => (DisciplineId::LifoPo(buf), BufferSize::Finite(buf)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fifo => "fifo",
            Self::Lifo => "lifo",
            Self::FifoPo => "fifo-po",
            Self::LifoPo => "lifo-po",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

impl GridScale {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            other => Err(CliError::validation(format!(
                "unknown grid scale `{other}` (expected linear or log)"
            ))),
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub gamma: f64,
    pub lambda_e: f64,
    pub lambda_r: f64,
    pub buf_e: usize,
    pub buf_r: usize,
    pub disc_r: DisciplineKind,
    pub disc_e: DisciplineKind,
    pub seed: u64,
    pub events: u64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub grid_scale: GridScale,
    pub output: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            lambda_e: 5.0,
            lambda_r: 2.5,
            buf_e: 10,
            buf_r: 10,
            disc_r: DisciplineKind::LifoPo,
            disc_e: DisciplineKind::LifoPo,
            seed: 1,
            events: 200_000,
            grid_min: 0.05,
            grid_max: 1.0,
            grid_points: 20,
            grid_scale: GridScale::Linear,
            output: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::validation(format!("config key `{key}`: cannot parse `{value}`")))
}

impl Settings {
    /// Applies `key = value` lines from a config file. `#` starts a comment;
    /// blank lines are skipped; unknown keys are rejected.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in &pairs {
            match key.as_str() {
                "gamma" => self.gamma = parse_num(key, value)?,
                "lambda_e" => self.lambda_e = parse_num(key, value)?,
                "lambda_r" => self.lambda_r = parse_num(key, value)?,
                "buf_e" => self.buf_e = parse_num(key, value)?,
                "buf_r" => self.buf_r = parse_num(key, value)?,
                "disc_r" => self.disc_r = DisciplineKind::parse(value)?,
                "disc_e" => self.disc_e = DisciplineKind::parse(value)?,
                "seed" => self.seed = parse_num(key, value)?,
                "events" => self.events = parse_num(key, value)?,
                "grid_min" => self.grid_min = parse_num(key, value)?,
                "grid_max" => self.grid_max = parse_num(key, value)?,
                "grid_points" => self.grid_points = parse_num(key, value)?,
                "grid_scale" => self.grid_scale = GridScale::parse(value)?,
                "output" => self.output = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::validation(format!("unknown config key `{other}`")))
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda_e", self.lambda_e),
            ("lambda_r", self.lambda_r),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::validation(format!("{name} must be finite and >= 0")));
            }
        }
        if self.lambda_e <= 0.0 {
            return Err(CliError::validation("lambda_e must be positive".into()));
        }
        if self.grid_points < 2 {
            return Err(CliError::validation("grid_points must be >= 2".into()));
        }
        if !(self.grid_min.is_finite() && self.grid_max.is_finite())
            || self.grid_min >= self.grid_max
        {
            return Err(CliError::validation("grid_min must be < grid_max and finite".into()));
        }
        if self.grid_min <= 0.0 {
            return Err(CliError::validation("grid_min must be positive".into()));
        }
        if self.events == 0 {
            return Err(CliError::validation("events must be >= 1".into()));
        }
        Ok(())
    }

    /// The swept grid values.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.grid_scale {
                    GridScale::Linear => self.grid_min + f * (self.grid_max - self.grid_min),
                    GridScale::Log => {
                        (self.grid_min.ln() + f * (self.grid_max.ln() - self.grid_min.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_flag_precedence_is_callers_concern() {
        let mut s = Settings::default();
        let mut tmp = tempfile_path("telequeue_cfg_test");
        {
            let mut f = std::fs::File::create(&tmp).unwrap();
            writeln!(f, "# comment\ngamma = 0.25\nlambda_e=7.5\ndisc_r = FIFO-PO").unwrap();
        }
        s.apply_file(&tmp).unwrap();
        assert_eq!(s.gamma, 0.25);
        assert_eq!(s.lambda_e, 7.5);
        assert_eq!(s.disc_r, DisciplineKind::FifoPo);
        std::fs::remove_file(&tmp).unwrap();

        // Unknown keys rejected.
        tmp = tempfile_path("telequeue_cfg_bad");
        std::fs::write(&tmp, "nonsense = 1\n").unwrap();
        assert!(s.apply_file(&tmp).is_err());
        std::fs::remove_file(&tmp).unwrap();
    }

    #[test]
    fn grids() {
        let mut s = Settings { grid_min: 1.0, grid_max: 3.0, grid_points: 3, ..Settings::default() };
        assert_eq!(s.grid(), vec![1.0, 2.0, 3.0]);
        s.grid_scale = GridScale::Log;
        s.grid_min = 0.1;
        s.grid_max = 10.0;
        let g = s.grid();
        assert!((g[1] - 1.0).abs() < 1e-12);
    }

    fn tempfile_path(stem: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
    }
}
