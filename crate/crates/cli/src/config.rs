//! Merges a `--config` key=value file into the argument list.
//!
//! Config entries become flags inserted right after the subcommand name, so
//! anything given on the command line comes later and wins.

use std::ffi::OsString;
use std::fs;

use clap::CommandFactory;

use crate::args::Cli;
use crate::common::{usage, CliError};

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    if argv.len() < 2 {
        return Ok(argv);
    }
    let Some(path) = config_path(&argv[2..]) else {
        return Ok(argv);
    };
    let sub_name = argv[1].to_string_lossy().to_string();
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;

    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            return Err(usage("config files cannot include other config files"));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key))
            .ok_or_else(|| usage(format!("config line {}: unknown key '{key}' for `{sub_name}`", n + 1)))?;
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => return Err(usage(format!("config line {}: '{key}' expects true or false, got '{other}'", n + 1))),
            }
        }
    }
    let mut out = argv[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_entries_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# comment\nseed = 7\nmodels=rf\nno-timing=true\n").unwrap();
        let argv: Vec<OsString> = ["fraudstream", "stream", "--config", cfg.to_str().unwrap(), "--seed", "9"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = expand_config(argv).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into()).collect();
        assert_eq!(&s[2..5], &["--seed=7", "--models=rf", "--no-timing"]);
        assert_eq!(s.last().unwrap(), "9");
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        fs::write(&cfg, "colour=blue\n").unwrap();
        let argv: Vec<OsString> =
            ["fraudstream", "static", "--config", cfg.to_str().unwrap()].iter().map(OsString::from).collect();
        assert_eq!(expand_config(argv).unwrap_err().exit_code(), 2);
    }
}
