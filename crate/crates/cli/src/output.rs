use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::{CliError, CliResult};

/// Record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Seed of the run; 0 for commands that draw no random numbers.
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, params: &impl Serialize, seed: u64) -> CliResult<Self> {
        let parameters = match serde_json::to_value(params).map_err(json_err)? {
            serde_json::Value::Object(m) => m.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Ok(Self {
            command: command.to_string(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, &(to_json(self)? + "\n"))
    }
}

pub fn json_err(e: serde_json::Error) -> CliError {
    CliError::Numerical(format!("cannot serialize output: {e}"))
}

pub fn to_json(v: &impl Serialize) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(json_err)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Parses `a:b:step` (inclusive) or a comma-separated list of sizes.
pub fn parse_grid(spec: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Usage(format!("invalid grid {spec:?}: use a:b:step or a,b,c"));
    let grid: Vec<u64> = if spec.contains(':') {
        let parts: Vec<u64> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?;
        let [lo, hi, step] = parts[..] else {
            return Err(bad());
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        spec.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

/// A gnuplot script drawing curves.csv: solid means and dotted quantiles,
/// simulated in black and asymptotic in red, one panel per variant.
pub fn plot_script(variants: &[&str]) -> String {
    let mut s = String::from(
        "# gnuplot script for curves.csv\n\
         # columns: variant,n,mean,q025,q975,source\n\
         set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set xlabel 'n'\n\
         set ylabel 'log BF'\n\
         set key top left\n",
    );
    for v in variants {
        let sim = format!("(strcol(1) eq '{v}' && strcol(6) eq 'simulated')");
        let asy = format!("(strcol(1) eq '{v}' && strcol(6) eq 'asymptotic')");
        s.push_str(&format!(
            "set output '{v}.png'\nset title '{v}'\n\
             plot 'curves.csv' every ::1 using ({sim} ? $2 : NaN):3 with lines lc 'black' title 'simulated mean', \\\n\
             \x20    '' every ::1 using ({sim} ? $2 : NaN):4 with lines dt 3 lc 'black' notitle, \\\n\
             \x20    '' every ::1 using ({sim} ? $2 : NaN):5 with lines dt 3 lc 'black' notitle, \\\n\
             \x20    '' every ::1 using ({asy} ? $2 : NaN):3 with lines lc 'red' title 'asymptotic mean', \\\n\
             \x20    '' every ::1 using ({asy} ? $2 : NaN):4 with lines dt 3 lc 'red' notitle, \\\n\
             \x20    '' every ::1 using ({asy} ? $2 : NaN):5 with lines dt 3 lc 'red' notitle\n"
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("100:300:100").unwrap(), vec![100, 200, 300]);
        assert_eq!(parse_grid("5,10, 20").unwrap(), vec![5, 10, 20]);
        assert_eq!(parse_grid("100:250:100").unwrap(), vec![100, 200]);
        for bad in ["", "1:2", "3:1:1", "1:5:0", "a,b"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn manifest_fields() {
        #[derive(Serialize)]
        struct P {
            mu: f64,
        }
        let m = RunManifest::new("simulate", &P { mu: 0.5 }, 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&to_json(&m).unwrap()).unwrap();
        for key in ["command", "parameters", "seed", "version", "timestamp"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["parameters"]["mu"], 0.5);
    }
}
