//! Plain-text `key=value` configuration files.
//!
//! Each entry becomes `--key value` inserted right after the subcommand, so
//! anything given on the command line later wins. `#` starts a comment.
//! `key=true` becomes a bare flag and `key=false` is dropped.

use std::fs;
use std::path::Path;

pub fn parse(text: &str, origin: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{origin}:{}: expected key=value, got `{line}`", lineno + 1));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("{origin}:{}: empty key", lineno + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Result<Option<String>, String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned().map(Some).ok_or_else(|| "--config needs a path".to_string());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

/// argv with the entries of the `--config` file spliced in after the subcommand.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| format!("--config {path}: {e}"))?;
    let extra = parse(&text, &path)?;
    let Some(sub) = argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 2) else {
        return Ok(argv);
    };
    let mut out = argv[..sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let t = "# walk\nd = 2\nkappa=0.5  # killing\n\nK=0,0;1,0\nverbose=true\nquiet=false\n";
        let v = parse(t, "c").unwrap();
        assert_eq!(v, ["--d", "2", "--kappa", "0.5", "--K", "0,0;1,0", "--verbose"]);
    }

    #[test]
    fn rejects_bare_words() {
        assert!(parse("d 2", "c").unwrap_err().contains("c:1"));
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("interlace-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "kappa=2\n").unwrap();
        let argv: Vec<String> = ["interlace", "green", "--config", path.to_str().unwrap(), "--kappa", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand(argv).unwrap();
        assert_eq!(out[1..4], ["green", "--kappa", "2"]);
        assert_eq!(out.last().unwrap(), "3");
        fs::remove_dir_all(dir).unwrap();
    }
}
