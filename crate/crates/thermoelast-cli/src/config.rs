//! Configuration file handling: a single TOML tree with CLI overrides,
//! strict about unknown keys, re-validating every downstream constraint
//! at parse time.

use serde::{Deserialize, Serialize};
use thermoelast::GeneratorKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid {
            min: 10.0,
            max: 1000.0,
            points: 25,
            log: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub energy_balance: Option<f64>,
    pub conservation_drift: Option<f64>,
    pub splitting: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Smooth,
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub n_interior: usize,
    pub tau: f64,
    pub t_final: f64,
    pub dt: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub ensemble: usize,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: String,
    pub kind: GeneratorKind,
    pub initial: InitialData,
    pub quick: bool,
    #[serde(default)]
    pub beta_grid: BetaGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n_interior: 100,
            tau: 1.0,
            t_final: 5.0,
            dt: 1e-3,
            alpha: 1.0,
            n_max: 20,
            ensemble: 30,
            trials: 200,
            seed: 42,
            out_dir: "out".to_string(),
            kind: GeneratorKind::DampedCattaneo,
            initial: InitialData::Smooth,
            quick: false,
            beta_grid: BetaGrid::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl Config {
    /// Load from an optional TOML file, apply `--set key=value` overrides
    /// (dotted paths reach nested tables), and validate.
    pub fn load(path: Option<&str>, overrides: &[String]) -> Result<Config, String> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config `{p}`: {e}"))?;
                text.parse()
                    .map_err(|e| format!("cannot parse config `{p}`: {e}"))?
            }
            None => {
                // defaults serialized back through TOML so overrides
                // always act on a complete tree
                let text = toml::to_string(&Config::default()).expect("default serializes");
                text.parse().expect("default parses")
            }
        };
        // a partial file still gets the defaults for missing keys
        if path.is_some() {
            let default_text = toml::to_string(&Config::default()).expect("serializes");
            let defaults: toml::Table = default_text.parse().expect("parses");
            for (k, v) in defaults {
                table.entry(k).or_insert(v);
            }
        }
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e| format!("invalid config: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_interior < 2 {
            return Err("n_interior: must be >= 2".into());
        }
        if !(self.tau > 0.0) {
            return Err("tau: must be > 0".into());
        }
        if !(self.dt > 0.0) {
            return Err("dt: must be > 0".into());
        }
        if !(self.t_final >= self.dt) {
            return Err("t_final: must be >= dt".into());
        }
        if self.alpha < 0.0 {
            return Err("alpha: must be >= 0".into());
        }
        if self.n_max < 2 {
            return Err("n_max: must be >= 2".into());
        }
        if self.ensemble == 0 || self.trials == 0 {
            return Err("ensemble/trials: must be >= 1".into());
        }
        if !(self.beta_grid.min > 0.0 && self.beta_grid.max > self.beta_grid.min) {
            return Err("beta_grid: need 0 < min < max".into());
        }
        if self.beta_grid.points < 2 {
            return Err("beta_grid.points: must be >= 2".into());
        }
        for (name, t) in [
            ("tolerances.energy_balance", self.tolerances.energy_balance),
            ("tolerances.conservation_drift", self.tolerances.conservation_drift),
            ("tolerances.splitting", self.tolerances.splitting),
        ] {
            if let Some(v) = t {
                if !(v > 0.0) {
                    return Err(format!("{name}: must be > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn beta_values(&self) -> Vec<f64> {
        let g = &self.beta_grid;
        if g.log {
            thermoelast::stability::log_grid(g.min, g.max, g.points).expect("validated")
        } else {
            (0..g.points)
                .map(|i| g.min + (g.max - g.min) * i as f64 / (g.points - 1) as f64)
                .collect()
        }
    }
}

fn parse_toml_value(raw: &str) -> toml::Value {
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(raw.to_string())
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), String> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| format!("override `{item}` is not of the form key=value"))?;
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), parse_toml_value(raw));
        } else {
            current = current
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| format!("override `{key}`: `{part}` is not a table"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn overrides_apply_with_dotted_paths() {
        let cfg = Config::load(
            None,
            &["dt=0.01".into(), "beta_grid.points=11".into(), "kind=fourier".into()],
        )
        .unwrap();
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.beta_grid.points, 11);
        assert_eq!(cfg.kind, GeneratorKind::Fourier);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::load(None, &["no_such_key=1".into()]).unwrap_err();
        assert!(err.contains("no_such_key"), "{err}");
    }

    #[test]
    fn invalid_values_rejected_by_name() {
        let err = Config::load(None, &["dt=0".into()]).unwrap_err();
        assert!(err.contains("dt"), "{err}");
        let err = Config::load(None, &["n_interior=1".into()]).unwrap_err();
        assert!(err.contains("n_interior"), "{err}");
    }
}
