//! Flat key-value experiment configuration files.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment anywhere;
//! blank lines are ignored; keys may not repeat; unknown keys are errors.
//!
//! ```text
//! # detector and code
//! algorithm = multi_hyp            # multi_hyp | dp | barb
//! code_file = codes/n1008.alist    # or code_n/code_rate/code_var_degree/code_seed
//! modulation_order = 4
//!
//! # channel
//! pilot_period = 60                # "none" disables pilots
//! pilot_symbol_index = 0
//! sigma_delta = 0.1
//! snr_grid_db = 3.5, 4.0, 4.5, 5.0
//!
//! # trial control
//! seed = 1
//! max_frames = 100000
//! target_frame_errors = 100
//! threads = 1
//! out_dir = results
//!
//! # detector parameters
//! mu = 0.3
//! n_max = 20
//! n_outer = 10
//! n_inner_ldpc = 5
//! dp_levels = 8
//! ```
//!
//! Every key except `algorithm`, `snr_grid_db` and the code source has the
//! default shown above.

use super::{Algorithm, CodeSource, ExperimentConfig, HarnessError};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Parses configuration text into an [`ExperimentConfig`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(idx + 1, "expected `key = value`"));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(err(idx + 1, "empty key or value"));
        }
        if map.insert(key.clone(), (idx + 1, value)).is_some() {
            return Err(err(idx + 1, &format!("duplicate key `{key}`")));
        }
    }

    let algorithm = match map.remove("algorithm") {
        Some((line, v)) => Algorithm::from_name(&v)
            .ok_or_else(|| err(line, &format!("unknown algorithm `{v}`")))?,
        None => return Err(HarnessError::Config("missing required key `algorithm`".into())),
    };

    let snr_grid_db = match map.remove("snr_grid_db") {
        Some((line, v)) => v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| err(line, &format!("bad SNR value `{}`", s.trim())))
            })
            .collect::<Result<Vec<f64>, _>>()?,
        None => return Err(HarnessError::Config("missing required key `snr_grid_db`".into())),
    };

    let code_source = match map.remove("code_file") {
        Some((line, path)) => {
            for k in ["code_n", "code_rate", "code_var_degree", "code_seed"] {
                if map.contains_key(k) {
                    return Err(err(line, &format!("`code_file` conflicts with `{k}`")));
                }
            }
            CodeSource::AlistFile(PathBuf::from(path))
        }
        None => {
            let n = parse_num::<usize>(&mut map, "code_n")?
                .ok_or_else(|| HarnessError::Config("need `code_file` or `code_n`".into()))?;
            let rate = parse_num::<f64>(&mut map, "code_rate")?.unwrap_or(0.75);
            let var_degree = parse_num::<usize>(&mut map, "code_var_degree")?.unwrap_or(3);
            let seed = parse_num::<u64>(&mut map, "code_seed")?.unwrap_or(1);
            CodeSource::Generated { n, rate, var_degree, seed }
        }
    };

    let mut cfg = ExperimentConfig::defaults(algorithm, code_source, snr_grid_db);
    if let Some(v) = parse_num(&mut map, "modulation_order")? {
        cfg.modulation_order = v;
    }
    if let Some((line, v)) = map.remove("pilot_period") {
        cfg.pilot_period = if v == "none" {
            None
        } else {
            let p = v
                .parse::<usize>()
                .map_err(|_| err(line, &format!("bad pilot_period `{v}`")))?;
            if p == 0 {
                return Err(err(line, "pilot_period must be positive or `none`"));
            }
            Some(p)
        };
    }
    if let Some(v) = parse_num(&mut map, "pilot_symbol_index")? {
        cfg.pilot_symbol_index = v;
    }
    if let Some(v) = parse_num(&mut map, "sigma_delta")? {
        cfg.sigma_delta = v;
    }
    if let Some(v) = parse_num(&mut map, "max_frames")? {
        cfg.max_frames = v;
    }
    if let Some(v) = parse_num(&mut map, "target_frame_errors")? {
        cfg.target_frame_errors = v;
    }
    if let Some(v) = parse_num(&mut map, "seed")? {
        cfg.seed = v;
    }
    if let Some(v) = parse_num(&mut map, "dp_levels")? {
        cfg.dp_levels = v;
    }
    if let Some(v) = parse_num(&mut map, "mu")? {
        cfg.mu = v;
    }
    if let Some(v) = parse_num(&mut map, "n_max")? {
        cfg.n_max = v;
    }
    if let Some(v) = parse_num(&mut map, "n_outer")? {
        cfg.n_outer = v;
    }
    if let Some(v) = parse_num(&mut map, "n_inner_ldpc")? {
        cfg.n_inner_ldpc = v;
    }
    if let Some(v) = parse_num(&mut map, "threads")? {
        cfg.threads = v;
    }
    if let Some((_, v)) = map.remove("out_dir") {
        cfg.out_dir = Some(PathBuf::from(v));
    }

    if let Some((key, (line, _))) = map.into_iter().next() {
        return Err(err(line, &format!("unknown key `{key}`")));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn err(line: usize, message: &str) -> HarnessError {
    HarnessError::Config(format!("line {line}: {message}"))
}

fn parse_num<T: std::str::FromStr>(
    map: &mut BTreeMap<String, (usize, String)>,
    key: &str,
) -> Result<Option<T>, HarnessError> {
    match map.remove(key) {
        None => Ok(None),
        Some((line, v)) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| err(line, &format!("bad value `{v}` for `{key}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# comment line
algorithm = multi_hyp
code_n = 240            # generated code
code_rate = 0.75
snr_grid_db = 3.5, 4.0, 4.5
seed = 9
mu = 0.25
pilot_period = 30
out_dir = results/run1
";

    #[test]
    fn parses_full_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::MultiHyp);
        assert_eq!(cfg.snr_grid_db, vec![3.5, 4.0, 4.5]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.mu, 0.25);
        assert_eq!(cfg.pilot_period, Some(30));
        assert_eq!(cfg.out_dir, Some(PathBuf::from("results/run1")));
        assert!(matches!(cfg.code_source, CodeSource::Generated { n: 240, .. }));
        // defaults fill the rest
        assert_eq!(cfg.n_max, 20);
        assert_eq!(cfg.dp_levels, 8);
        assert_eq!(cfg.target_frame_errors, 100);
    }

    #[test]
    fn pilot_none_supported() {
        let cfg = parse_config(
            "algorithm = dp\ncode_n = 120\nsnr_grid_db = 5\npilot_period = none\n",
        )
        .unwrap();
        assert_eq!(cfg.pilot_period, None);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let e = parse_config("algorithm = dp\ncode_n = 120\nsnr_grid_db = 5\nbogus = 1\n")
            .unwrap_err();
        assert!(e.to_string().contains("unknown key"), "{e}");
        let e =
            parse_config("algorithm = dp\nalgorithm = barb\ncode_n = 120\nsnr_grid_db = 5\n")
                .unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
    }

    #[test]
    fn rejects_missing_required() {
        assert!(parse_config("code_n = 120\nsnr_grid_db = 5\n").is_err());
        assert!(parse_config("algorithm = dp\nsnr_grid_db = 5\n").is_err());
        assert!(parse_config("algorithm = dp\ncode_n = 120\n").is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("algorithm multi_hyp\n").is_err());
        assert!(parse_config("algorithm = dp\ncode_n = 120\nsnr_grid_db = a,b\n").is_err());
        assert!(
            parse_config("algorithm = dp\ncode_file = x\ncode_n = 120\nsnr_grid_db = 5\n")
                .is_err()
        );
    }

    #[test]
    fn line_numbers_in_errors() {
        let e = parse_config("algorithm = dp\ncode_n = 120\nsnr_grid_db = 5\n\nmu = frog\n")
            .unwrap_err();
        assert!(e.to_string().contains("line 5"), "{e}");
    }
}
