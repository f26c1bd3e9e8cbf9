//! `key=value` config files.
//!
//! Keys are long flag names of the chosen subcommand (`speed = 50`,
//! `slot-duration = 7.1e-5`; underscores are accepted). Keys are turned into
//! flags placed ahead of the user's own, and since every subcommand lets a
//! later flag override an earlier one, explicit flags win. Keys that belong
//! to other subcommands are ignored, so one file can serve several commands.

use std::collections::HashSet;
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::CliError;

fn parse(text: &str, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                i + 1
            ))
        })?;
        pairs.push((key.trim().replace('_', "-"), value.trim().to_string()));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Returns `args` with the config file's entries inserted right after the
/// subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path).to_path_buf();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let pairs = parse(&text, &path)?;

    let root = Cli::command();
    let mut skip_next = false;
    let position = args.iter().enumerate().skip(1).find_map(|(i, arg)| {
        if std::mem::take(&mut skip_next) {
            return None;
        }
        let s = arg.to_string_lossy();
        if s == "--config" {
            skip_next = true;
            return None;
        }
        root.find_subcommand(s.as_ref()).map(|_| i)
    });
    let Some(position) = position else {
        return Ok(args);
    };
    let sub = root
        .find_subcommand(args[position].to_string_lossy().as_ref())
        .expect("matched above");

    let own: HashSet<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let all: HashSet<String> = root
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long().map(str::to_string)))
        .collect();

    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" || !all.contains(&key) {
            return Err(CliError::Usage(format!("{}: unknown key `{key}`", path.display())));
        }
        if !own.contains(&key) {
            continue;
        }
        let is_switch = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .is_some_and(|a| !a.get_action().takes_values());
        match (is_switch, value.as_str()) {
            (true, "true") => injected.push(format!("--{key}").into()),
            (true, "false") => {}
            (true, other) => {
                return Err(CliError::Usage(format!(
                    "{}: `{key}` expects true or false, got `{other}`",
                    path.display()
                )))
            }
            (false, _) => {
                injected.push(format!("--{key}").into());
                injected.extend(value.split_whitespace().map(OsString::from));
            }
        }
    }
    let mut out = args[..=position].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}
