//! Deterministic CSV emission.
//!
//! Three files, each with a `#`-prefixed metadata header (version, RNG
//! identity, config echo) followed by a column-header row:
//!
//! * `per_curve.csv` — `snr_db,per,ber,frames,errors,per_upper95`
//! * `gamma.csv` — `snr_db,iteration,mean_order` (mixture detectors only)
//! * `order_hist.csv` — `snr_db,iteration,order,count` (nonzero bins)
//!
//! Output is UTF-8 with `.` decimals; identical stats always serialize to
//! identical bytes.

use super::{clopper_pearson_upper95, TrialStats};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes the three report files into `dir` (created if missing); returns
/// the paths written.
pub fn emit_report(stats: &TrialStats, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let header = metadata_header(stats);

    let mut per = String::new();
    per.push_str(&header);
    per.push_str("snr_db,per,ber,frames,errors,per_upper95\n");
    for p in &stats.points {
        per.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.snr_db,
            p.per(),
            p.ber(),
            p.frames,
            p.frame_errors,
            clopper_pearson_upper95(p.frame_errors, p.frames),
        ));
    }

    let mut gamma = String::new();
    gamma.push_str(&header);
    gamma.push_str("snr_db,iteration,mean_order\n");
    for p in &stats.points {
        for (i, acc) in p.gamma.iter().enumerate() {
            if acc.frames > 0 {
                gamma.push_str(&format!("{},{},{}\n", p.snr_db, i + 1, acc.mean()));
            }
        }
    }

    let mut hist = String::new();
    hist.push_str(&header);
    hist.push_str("snr_db,iteration,order,count\n");
    for p in &stats.points {
        for (i, bins) in p.order_hist.iter().enumerate() {
            for (o, &count) in bins.iter().enumerate() {
                if count > 0 {
                    hist.push_str(&format!("{},{},{},{}\n", p.snr_db, i + 1, o + 1, count));
                }
            }
        }
    }

    let files = [
        ("per_curve.csv", per),
        ("gamma.csv", gamma),
        ("order_hist.csv", hist),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(content.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

fn metadata_header(stats: &TrialStats) -> String {
    let mut h = String::new();
    h.push_str(&format!("# version={}\n", stats.metadata.version));
    h.push_str(&format!("# rng={}\n", stats.metadata.rng));
    for (k, v) in &stats.metadata.config_echo {
        h.push_str(&format!("# {k}={v}\n"));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{GammaAccum, RunMetadata, SnrPointStats};

    fn sample_stats() -> TrialStats {
        let mut point = SnrPointStats {
            snr_db: 4.5,
            frames: 100,
            frame_errors: 3,
            bit_errors: 41,
            info_bits: 18_000,
            ..SnrPointStats::default()
        };
        point.gamma = vec![
            GammaAccum { sum: 350.0, frames: 100 },
            GammaAccum { sum: 149.0, frames: 100 },
        ];
        point.gamma_forward = point.gamma.clone();
        point.order_hist = vec![vec![10, 5, 0, 2], vec![17, 0, 0, 0]];
        TrialStats {
            points: vec![point],
            metadata: RunMetadata {
                version: "phasemix-core-test".into(),
                rng: "test-rng".into(),
                config_echo: vec![("seed".into(), "1".into())],
            },
        }
    }

    #[test]
    fn files_written_with_expected_rows() {
        let dir = std::env::temp_dir().join(format!("phasemix_report_{}", std::process::id()));
        let stats = sample_stats();
        let files = emit_report(&stats, &dir).unwrap();
        assert_eq!(files.len(), 3);
        let per = fs::read_to_string(dir.join("per_curve.csv")).unwrap();
        assert!(per.contains("snr_db,per,ber,frames,errors,per_upper95"));
        assert!(per.contains("4.5,0.03,"), "{per}");
        let gamma = fs::read_to_string(dir.join("gamma.csv")).unwrap();
        let data_rows: Vec<&str> =
            gamma.lines().filter(|l| !l.starts_with('#') && l.contains("4.5")).collect();
        assert_eq!(data_rows.len(), 2, "{gamma}");
        assert!(data_rows[0].starts_with("4.5,1,3.5"));
        let hist = fs::read_to_string(dir.join("order_hist.csv")).unwrap();
        // only nonzero bins appear
        assert!(hist.contains("4.5,1,1,10"));
        assert!(hist.contains("4.5,1,4,2"));
        assert!(!hist.contains("4.5,1,3,"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn emission_is_byte_stable() {
        let dir_a = std::env::temp_dir().join(format!("phasemix_rep_a_{}", std::process::id()));
        let dir_b = std::env::temp_dir().join(format!("phasemix_rep_b_{}", std::process::id()));
        let stats = sample_stats();
        emit_report(&stats, &dir_a).unwrap();
        emit_report(&stats, &dir_b).unwrap();
        for name in ["per_curve.csv", "gamma.csv", "order_hist.csv"] {
            let a = fs::read(dir_a.join(name)).unwrap();
            let b = fs::read(dir_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
        fs::remove_dir_all(&dir_a).ok();
        fs::remove_dir_all(&dir_b).ok();
    }

    #[test]
    fn empty_grid_gives_header_only_files() {
        let dir = std::env::temp_dir().join(format!("phasemix_rep_e_{}", std::process::id()));
        let stats = TrialStats { points: vec![], metadata: sample_stats().metadata };
        emit_report(&stats, &dir).unwrap();
        let per = fs::read_to_string(dir.join("per_curve.csv")).unwrap();
        let data: Vec<&str> = per
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("snr_db"))
            .collect();
        assert!(data.is_empty());
        assert!(per.lines().any(|l| l.starts_with("snr_db,")));
        fs::remove_dir_all(&dir).ok();
    }
}
