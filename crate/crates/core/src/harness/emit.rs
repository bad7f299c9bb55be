use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::OutputFormat;
use super::run::SummaryReport;
use super::HarnessError;

pub const REPORT_FILE: &str = "report.json";
/// Wall time lives in its own file; everything in `report.json` is a pure
/// function of the config.
pub const TIMING_FILE: &str = "timing.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn curve_csv(curve: &crate::statistics::Curve) -> String {
    let mut out = format!("{},estimate,target\n", curve.axis);
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.x, p.estimate, p.target));
    }
    out
}

/// Files to write, as `(final name, contents)`.
fn render(report: &SummaryReport, format: OutputFormat) -> Result<Vec<(String, Vec<u8>)>, HarnessError> {
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    let timing = format!("{{\n  \"wall_time_s\": {}\n}}\n", report.wall_time_s);
    let mut files = vec![(REPORT_FILE.to_string(), json), (TIMING_FILE.to_string(), timing.into_bytes())];
    if format == OutputFormat::Csv {
        for test in &report.tests {
            for curve in &test.curves {
                files.push((format!("{}_{}.csv", test.name, curve.name), curve_csv(curve).into_bytes()));
            }
        }
    }
    Ok(files)
}

/// Writes the report into `dir`, returning the paths written.
///
/// Every file is staged under a temporary name first; if any write fails,
/// staged and already renamed files are removed again.
pub fn emit_report(report: &SummaryReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, HarnessError> {
    let files = render(report, format)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)], done: usize| {
        for (i, (tmp, dst)) in staged.iter().enumerate() {
            let _ = fs::remove_file(if i < done { dst } else { tmp });
        }
    };
    for (name, bytes) in &files {
        let tmp = dir.join(format!(".{name}.tmp"));
        let dst = dir.join(name);
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        });
        if let Err(e) = written {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged, 0);
            return Err(io_err(&tmp)(e));
        }
        staged.push((tmp, dst));
    }
    for (i, (tmp, dst)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, dst) {
            cleanup(&staged, i);
            return Err(io_err(dst)(e));
        }
    }
    Ok(staged.into_iter().map(|(_, dst)| dst).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, ExperimentConfig};

    fn report() -> SummaryReport {
        let cfg = ExperimentConfig::from_toml(
            "model = \"env\"\nsteps = 400\nreplicates = 10\nseed = 3\ntests = [\"msd\", \"step_fractions\"]\nt_grid = [0.0, 0.25, 0.5, 1.0]\n[law]\nkind = \"iid\"\nq = 0.5\n",
        )
        .unwrap();
        run_experiment(&cfg, 1).unwrap()
    }

    #[test]
    fn csv_rows_match_grid() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&report(), dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(paths.len(), 4);
        let csv = fs::read_to_string(dir.path().join("msd_msd_x.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,estimate,target");
        assert_eq!(lines.len(), 1 + 4);
        assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }

    #[test]
    fn json_only_by_default() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&report(), dir.path(), OutputFormat::Json).unwrap();
        assert_eq!(paths.len(), 2);
        let v: serde_json::Value = serde_json::from_slice(&fs::read(&paths[0]).unwrap()).unwrap();
        assert!(v.get("wall_time_s").is_none());
        assert_eq!(v["tests"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn unwritable_dir_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        assert!(emit_report(&report(), &blocker.join("sub"), OutputFormat::Csv).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
