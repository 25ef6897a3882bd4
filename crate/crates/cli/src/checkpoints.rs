//! Scorer snapshots as text weight dumps: layer-delimited headers, one
//! decimal per line at full precision.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rankscale_core::ledger::Objective;
use rankscale_core::ltr::{Scorer, ScorerConfig};

use crate::error::Error;
use crate::Result;

/// Directory of one run's checkpoints: `<root>/<objective>_w<width>`.
pub fn run_dir(root: &Path, objective: Objective, width: usize) -> PathBuf {
    root.join(format!("{objective}_w{width}"))
}

/// Path of one checkpoint: `<run dir>/step_<S>.txt`.
pub fn checkpoint_path(root: &Path, objective: Objective, width: usize, step: u64) -> PathBuf {
    run_dir(root, objective, width).join(format!("step_{step}.txt"))
}

/// Write a scorer snapshot.
pub fn save_scorer(scorer: &Scorer, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    let c = scorer.config();
    let mut out = String::new();
    out.push_str(&format!(
        "# scorer width={} depth={} feature_dim={} seed={}\n",
        c.width, c.depth, c.feature_dim, c.seed
    ));
    let flat = scorer.to_flat();
    let mut offset = 0usize;
    for layer in 0..c.depth {
        let in_dim = if layer == 0 { c.feature_dim } else { c.width };
        out.push_str(&format!("# layer {layer} weights {}x{in_dim}\n", c.width));
        for v in &flat[offset..offset + c.width * in_dim] {
            out.push_str(&format!("{v:.17e}\n"));
        }
        offset += c.width * in_dim;
        out.push_str(&format!("# layer {layer} bias {}\n", c.width));
        for v in &flat[offset..offset + c.width] {
            out.push_str(&format!("{v:.17e}\n"));
        }
        offset += c.width;
    }
    out.push_str(&format!("# head weights {}\n", c.width));
    for v in &flat[offset..offset + c.width] {
        out.push_str(&format!("{v:.17e}\n"));
    }
    offset += c.width;
    out.push_str("# head bias 1\n");
    out.push_str(&format!("{:.17e}\n", flat[offset]));
    fs::write(path, out).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Load a scorer snapshot written by [`save_scorer`].
pub fn load_scorer(path: &Path) -> Result<Scorer> {
    let reader = BufReader::new(
        fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?,
    );
    let mut config: Option<ScorerConfig> = None;
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('#') {
            if let Some(rest) = header.trim().strip_prefix("scorer ") {
                let mut fields = std::collections::BTreeMap::new();
                for part in rest.split_whitespace() {
                    let (k, v) = part.split_once('=').ok_or_else(|| {
                        Error::parse(path, lineno, format!("bad header field {part:?}"))
                    })?;
                    let v: u64 = v.parse().map_err(|_| {
                        Error::parse(path, lineno, format!("header field {k} is not an integer"))
                    })?;
                    fields.insert(k.to_string(), v);
                }
                let get = |k: &str| -> Result<u64> {
                    fields
                        .get(k)
                        .copied()
                        .ok_or_else(|| Error::parse(path, lineno, format!("header missing {k}")))
                };
                config = Some(ScorerConfig {
                    width: get("width")? as usize,
                    depth: get("depth")? as usize,
                    feature_dim: get("feature_dim")? as usize,
                    seed: get("seed")?,
                });
            }
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("weight {trimmed:?} is not a number")))?;
        values.push(v);
    }
    let config = config.ok_or_else(|| {
        Error::Validation(format!("{}: missing scorer header", path.display()))
    })?;
    Scorer::from_flat(config, values).map_err(Error::Core)
}

/// Checkpoint steps present in one run directory, ascending.
pub fn list_checkpoint_steps(dir: &Path) -> Result<Vec<u64>> {
    let mut steps = Vec::new();
    let entries =
        fs::read_dir(dir).map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(step) = name.strip_prefix("step_").and_then(|s| s.strip_suffix(".txt")) {
            if let Ok(step) = step.parse::<u64>() {
                steps.push(step);
            }
        }
    }
    steps.sort_unstable();
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn scorer_round_trips_bit_exactly() {
        let config = ScorerConfig { width: 6, depth: 2, feature_dim: 9, seed: 77 };
        let scorer = Scorer::new(config).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("step_10.txt");
        save_scorer(&scorer, &path).unwrap();
        let back = load_scorer(&path).unwrap();
        assert_eq!(scorer, back);
    }

    #[test]
    fn wrong_parameter_count_is_rejected() {
        let config = ScorerConfig { width: 2, depth: 1, feature_dim: 3, seed: 1 };
        let scorer = Scorer::new(config).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cp.txt");
        save_scorer(&scorer, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(load_scorer(&path).is_err());
    }

    #[test]
    fn step_listing() {
        let dir = TempDir::new().unwrap();
        let root = dir.path();
        let config = ScorerConfig { width: 2, depth: 1, feature_dim: 3, seed: 1 };
        let scorer = Scorer::new(config).unwrap();
        for step in [300u64, 100, 200] {
            save_scorer(
                &scorer,
                &checkpoint_path(root, Objective::Listwise, 2, step),
            )
            .unwrap();
        }
        let steps =
            list_checkpoint_steps(&run_dir(root, Objective::Listwise, 2)).unwrap();
        assert_eq!(steps, vec![100, 200, 300]);
    }
}
