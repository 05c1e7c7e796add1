//! Scenario runner for magflow-core: config files, initial data, run orchestration,
//! CSV and snapshot output, comparisons and named suites.

pub mod compare;
pub mod config;
pub mod error;
pub mod init;
pub mod ledger_csv;
pub mod run;
pub mod suite;

pub use config::{InitSpec, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use run::{run, simulate, RunOutcome};

/// Split `--key value` / `--key=value` words into pairs; keys must be config keys.
pub fn parse_overrides(words: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = words.iter();
    while let Some(w) = it.next() {
        let Some(flag) = w.strip_prefix("--") else {
            return Err(error::HarnessError::Invalid(format!("expected --key, got {w:?}")));
        };
        let (k, v) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| error::HarnessError::Invalid(format!("--{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        if !config::KEYS.contains(&k.as_str()) {
            return Err(error::HarnessError::Invalid(format!("unknown key --{k}")));
        }
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let w: Vec<String> = ["--K", "4", "--dt=0.01", "--init", "abc(1, 2, 3)"].map(String::from).to_vec();
        let p = parse_overrides(&w).unwrap();
        assert_eq!(p[1], ("dt".to_string(), "0.01".to_string()));
        assert_eq!(p[2].1, "abc(1, 2, 3)");
        assert!(parse_overrides(&["--colour".into(), "red".into()]).is_err());
        assert!(parse_overrides(&["--K".into()]).is_err());
        assert!(parse_overrides(&["K".into()]).is_err());
    }
}
