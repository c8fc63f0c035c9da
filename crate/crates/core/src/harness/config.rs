//! Flat `key = value` configuration files for study runs.
//!
//! ```text
//! preset = P2
//! h_list = 0.125, 0.0625, 0.03125
//! eps_rule = c3          # c2 | c3 | fixed | lower-bound
//! eps_c = 1.0            # C₁/C₂/C, or ε itself for the fixed rule
//! alpha = 1.0
//! kernel = ball          # ball | bump:<n>
//! kernel_radial = 8
//! kernel_angular = 16
//! solver = auto          # direct | krylov | auto
//! out = study.csv
//! min_rate = 0.85        # optional CI thresholds on the fitted slope
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use super::{EpsilonRule, KernelChoice, RunConfig};
use crate::system::SolverChoice;
use crate::{Error, Result};

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut map = std::collections::BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |k: &str| map.get(k).map(|s| s.as_str());
    let parse_f64 = |k: &str| -> Result<Option<f64>> {
        get(k)
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidConfig(format!("{k}: {e}"))))
            .transpose()
    };

    let preset = get("preset")
        .ok_or_else(|| Error::InvalidConfig("missing `preset`".into()))?
        .to_string();
    let h_list: Vec<f64> = get("h_list")
        .ok_or_else(|| Error::InvalidConfig("missing `h_list`".into()))?
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::InvalidConfig(format!("h_list: {e}"))))
        .collect::<Result<_>>()?;
    let alpha = parse_f64("alpha")?.unwrap_or(1.0);
    let c = parse_f64("eps_c")?.unwrap_or(1.0);
    let rule = match get("eps_rule").unwrap_or("c3") {
        "c2" => EpsilonRule::C2 { c1: c, alpha },
        "c3" => EpsilonRule::C3 { c2: c, alpha },
        "fixed" => EpsilonRule::Fixed { epsilon: c },
        "lower-bound" => EpsilonRule::LowerBound { c },
        other => {
            return Err(Error::InvalidConfig(format!("unknown eps_rule `{other}`")));
        }
    };
    let kernel = match get("kernel").unwrap_or("ball") {
        "ball" => KernelChoice::ConstantBall,
        s if s.starts_with("bump:") => {
            let n = s[5..]
                .parse::<u32>()
                .map_err(|e| Error::InvalidConfig(format!("kernel bump order: {e}")))?;
            KernelChoice::Bump(n)
        }
        "bump" => KernelChoice::Bump(2),
        other => return Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
    };
    let solver = match get("solver").unwrap_or("auto") {
        "direct" => SolverChoice::Direct,
        "krylov" => SolverChoice::Krylov,
        "auto" => SolverChoice::Auto,
        other => return Err(Error::InvalidConfig(format!("unknown solver `{other}`"))),
    };
    let parse_usize = |k: &str| -> Result<usize> {
        get(k)
            .map(|s| s.parse::<usize>().map_err(|e| Error::InvalidConfig(format!("{k}: {e}"))))
            .transpose()
            .map(|v| v.unwrap_or(0))
    };
    Ok(RunConfig {
        preset,
        h_list,
        rule,
        kernel,
        kernel_radial: parse_usize("kernel_radial")?,
        kernel_angular: parse_usize("kernel_angular")?,
        solver,
        out: get("out").map(std::path::PathBuf::from),
        min_rate: parse_f64("min_rate")?,
        max_rate: parse_f64("max_rate")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# study configuration
preset = P2
h_list = 0.125, 0.0625
eps_rule = c3
eps_c = 1.5
alpha = 0.5
kernel = bump:2
solver = direct
out = /tmp/x.csv
min_rate = 0.85
";
        let cfg = parse_run_config(text).unwrap();
        assert_eq!(cfg.preset, "P2");
        assert_eq!(cfg.h_list, vec![0.125, 0.0625]);
        assert_eq!(cfg.rule, EpsilonRule::C3 { c2: 1.5, alpha: 0.5 });
        assert_eq!(cfg.kernel, KernelChoice::Bump(2));
        assert_eq!(cfg.solver, SolverChoice::Direct);
        assert_eq!(cfg.min_rate, Some(0.85));
        assert_eq!(cfg.max_rate, None);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_run_config("preset P2").is_err());
        assert!(parse_run_config("h_list = 0.1").is_err()); // missing preset
        assert!(parse_run_config("preset = P2\nh_list = a,b").is_err());
        assert!(parse_run_config("preset = P2\nh_list = 0.1\neps_rule = nope").is_err());
    }
}
