//! `--config` files: `key = value` lines turned into flags.
//!
//! The file's flags are placed right after the subcommand, ahead of the
//! flags typed on the command line, and later occurrences win. A value of
//! `true` becomes a bare switch, `false` drops it, and whitespace-separated
//! values become several arguments.

use std::path::Path;

use crate::{CliError, CliResult};

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Parses key=value lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key {k:?}", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_flags(pairs: &[(String, String)]) -> Vec<String> {
    let mut flags = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => {
                flags.push(format!("--{k}"));
                flags.extend(v.split_whitespace().map(str::to_string));
            }
        }
    }
    flags
}

pub fn read_config(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Returns `args` with the config file's flags spliced in after the
/// subcommand name.
pub fn merge_config_file(args: Vec<String>, subcommands: &[&str]) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let flags = config_flags(&read_config(Path::new(&path))?);
    let Some(pos) = args.iter().position(|a| subcommands.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut merged = args[..=pos].to_vec();
    merged.extend(flags);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse_config("# c\nkappa0 = 0.1\n\nsummary=1 2 3 4 5 6\njson=true\nverbose = false\n").unwrap();
        assert_eq!(config_flags(&p), strings(&["--kappa0", "0.1", "--summary", "1", "2", "3", "4", "5", "6", "--json"]));
        assert!(parse_config("novalue").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "kappa0=0.2\n").unwrap();
        let args = strings(&["perinull", "--config", path.to_str().unwrap(), "bf", "--t", "2"]);
        let merged = merge_config_file(args, &["bf"]).unwrap();
        assert_eq!(merged[3..], strings(&["bf", "--kappa0", "0.2", "--t", "2"]));
    }
}
