//! Sweep and grid jobs: parallel evaluation, deterministic single-writer
//! output.
//!
//! Work items are dispatched to the rayon pool and collected in index order,
//! so the written bytes are identical for any worker count. All floats go
//! out at 12 significant digits with `.` as the decimal separator.

use cavity_ps::{
    photon_statistics, quadrature_moments_closed_form, success_probability, wigner_grid,
    ProtocolParams,
};
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::SweepConfig;
use crate::CliError;

/// 12 significant digits, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// The fig4 preset matrix: r in {0.2, 0.4, 0.51, 1, 1.5, 2.5},
/// N in {1, 2, 5}.
pub const FIG4_COUPLINGS: [f64; 6] = [0.2, 0.4, 0.51, 1.0, 1.5, 2.5];
pub const FIG4_ATOMS: [u32; 3] = [1, 2, 5];

/// All 18 (r, N) pairs of the reference batch, coupling-major.
pub fn fig4_pairs() -> Vec<(f64, u32)> {
    FIG4_COUPLINGS
        .iter()
        .flat_map(|&r| FIG4_ATOMS.iter().map(move |&atoms| (r, atoms)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepColumns {
    /// r, N, variance, squeezing_db, mandel_q, mean_n, P_N
    Full,
    /// r, N, P_N
    Probability,
    /// r, N, variance, squeezing_db
    Squeezing,
    /// r, N, mandel_q
    Mandel,
}

impl SweepColumns {
    fn header(self) -> &'static str {
        match self {
            SweepColumns::Full => "r,N,variance,squeezing_db,mandel_q,mean_n,P_N",
            SweepColumns::Probability => "r,N,P_N",
            SweepColumns::Squeezing => "r,N,variance,squeezing_db",
            SweepColumns::Mandel => "r,N,mandel_q",
        }
    }
}

struct SweepRow {
    r: f64,
    atoms: u32,
    variance: f64,
    squeezing_db: f64,
    mandel_q: Option<f64>,
    mean_n: f64,
    success: f64,
}

fn params_for(config: &SweepConfig, r: f64, atoms: u32) -> Result<ProtocolParams, CliError> {
    let params = ProtocolParams::new(config.alpha, r, atoms)
        .map_err(|e| CliError::Config(e.to_string()))?
        .with_phase(config.phi);
    match config.cutoff {
        Some(c) => params.with_cutoff(c).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(params),
    }
}

fn compute_row(config: &SweepConfig, r: f64, atoms: u32) -> Result<SweepRow, CliError> {
    let params = params_for(config, r, atoms)?;
    let stats = quadrature_moments_closed_form(&params, config.phi);
    let photon = photon_statistics(&params).map_err(CliError::Numerical)?;
    let success = success_probability(&params).map_err(CliError::Numerical)?;
    Ok(SweepRow {
        r,
        atoms,
        variance: stats.variance,
        squeezing_db: stats.squeezing_db,
        mandel_q: photon.mandel_q,
        mean_n: photon.mean_n,
        success,
    })
}

/// One CSV row per (r, N) over the configured grid.
pub fn run_sweep(
    config: &SweepConfig,
    columns: SweepColumns,
    file_name: &str,
) -> Result<PathBuf, CliError> {
    config.validate()?;
    let grid = config.r_grid();
    let mut work: Vec<(f64, u32)> = Vec::with_capacity(grid.len() * config.atoms.len());
    for &r in &grid {
        for &atoms in &config.atoms {
            work.push((r, atoms));
        }
    }
    let rows: Vec<Result<SweepRow, CliError>> = work
        .par_iter()
        .map(|&(r, atoms)| compute_row(config, r, atoms))
        .collect();
    let mut out = String::new();
    if config.alpha.norm_sqr() == 0.0
        && matches!(columns, SweepColumns::Full | SweepColumns::Mandel)
    {
        out.push_str("# mandel_q left blank: undefined at alpha = 0 (zero mean photon number)\n");
    }
    out.push_str(columns.header());
    out.push('\n');
    for row in rows {
        let row = row?;
        let q = row.mandel_q.map(fmt_sig).unwrap_or_default();
        let line = match columns {
            SweepColumns::Full => format!(
                "{},{},{},{},{},{},{}",
                fmt_sig(row.r),
                row.atoms,
                fmt_sig(row.variance),
                fmt_sig(row.squeezing_db),
                q,
                fmt_sig(row.mean_n),
                fmt_sig(row.success)
            ),
            SweepColumns::Probability => {
                format!("{},{},{}", fmt_sig(row.r), row.atoms, fmt_sig(row.success))
            }
            SweepColumns::Squeezing => format!(
                "{},{},{},{}",
                fmt_sig(row.r),
                row.atoms,
                fmt_sig(row.variance),
                fmt_sig(row.squeezing_db)
            ),
            SweepColumns::Mandel => format!("{},{},{}", fmt_sig(row.r), row.atoms, q),
        };
        out.push_str(&line);
        out.push('\n');
    }
    write_output(&config.out_dir, file_name, out.as_bytes())
}

/// Wigner grid CSV (x, y, W rows, y-major ascending) plus a JSON summary per
/// (r, N) pair; returns the written grid paths.
pub fn run_wigner_jobs(
    config: &SweepConfig,
    pairs: &[(f64, u32)],
    prefix: &str,
) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let spec = config.grid_spec()?;
    let mut written = Vec::new();
    for &(r, atoms) in pairs {
        let params = params_for(config, r, atoms)?;
        let grid = wigner_grid(&params, &spec).map_err(CliError::Numerical)?;
        let mut out = String::from("x,y,W\n");
        for (iy, &y) in grid.im_axis.iter().enumerate() {
            for (ix, &x) in grid.re_axis.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig(x),
                    fmt_sig(y),
                    fmt_sig(grid.value(iy, ix))
                ));
            }
        }
        let stem = format!("{prefix}_r{r}_N{atoms}");
        let path = write_output(&config.out_dir, &format!("{stem}.csv"), out.as_bytes())?;
        let summary = serde_json::to_string_pretty(&grid.summary())
            .expect("summary serialization cannot fail");
        write_output(&config.out_dir, &format!("{stem}.json"), summary.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Dump the conditioned state as its JSON schema.
pub fn run_state_dump(config: &SweepConfig, r: f64, atoms: u32) -> Result<PathBuf, CliError> {
    config.validate()?;
    let params = params_for(config, r, atoms)?;
    let outcome = cavity_ps::ps_state(&params).map_err(CliError::Numerical)?;
    let name = format!("state_r{r}_N{atoms}.json");
    write_output(&config.out_dir, &name, outcome.state.to_json().as_bytes())
}

pub fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("output directory {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut file = fs::File::create(&path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Run a closure inside a rayon pool with the configured thread count;
/// 0 keeps the global default.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if jobs == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
        Ok(pool.install(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn fig4_batch_covers_the_full_matrix() {
        let pairs = fig4_pairs();
        assert_eq!(pairs.len(), 18);
        assert_eq!(pairs[0], (0.2, 1));
        assert_eq!(pairs[17], (2.5, 5));
    }

    #[test]
    fn sig_formatting_is_twelve_digits() {
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig(0.0638), "6.38000000000e-2");
        assert_eq!(fmt_sig(-0.5), "-5.00000000000e-1");
    }

    fn small_config(dir: &Path) -> SweepConfig {
        SweepConfig {
            alpha: Complex64::new(1.0, 0.0),
            atoms: vec![1, 2],
            r_min: 0.0,
            r_max: 0.2,
            r_step: 0.1,
            out_dir: dir.to_path_buf(),
            grid_re_min: -2.0,
            grid_re_max: 3.0,
            grid_re_points: 26,
            grid_im_min: -2.0,
            grid_im_max: 2.0,
            grid_im_points: 21,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn sweep_rows_cover_the_grid_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config(dir.path());
        let path = run_sweep(&config, SweepColumns::Full, "metrics.csv").unwrap();
        let text = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,N,variance,squeezing_db,mandel_q,mean_n,P_N");
        // 3 grid points x 2 atom counts
        assert_eq!(lines.len(), 1 + 6);
        assert!(lines[1].starts_with("0.00000000000e0,1,"));
        assert!(lines[2].starts_with("0.00000000000e0,2,"));
        assert!(lines[3].starts_with("1.00000000000e-1,1,"));
    }

    #[test]
    fn vacuum_alpha_blanks_the_mandel_column_with_reason() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config(dir.path());
        config.alpha = Complex64::new(0.0, 0.0);
        let path = run_sweep(&config, SweepColumns::Full, "metrics.csv").unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.starts_with("# mandel_q left blank"));
        for line in text.lines().skip(2) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[4], "", "mandel field not blank in {line}");
            // P_N = 1 for the vacuum
            assert_eq!(fields[6], "1.00000000000e0");
        }
    }

    #[test]
    fn wigner_job_writes_grid_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config(dir.path());
        let paths = run_wigner_jobs(&config, &[(0.0, 1)], "test").unwrap();
        assert_eq!(paths.len(), 1);
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(text.starts_with("x,y,W\n"));
        assert_eq!(text.lines().count(), 1 + 26 * 21);
        let summary: cavity_ps::WignerSummary = serde_json::from_str(
            &fs::read_to_string(dir.path().join("test_r0_N1.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary.negative_region_count, 0);
        assert!((summary.total_integral - 1.0).abs() < 2e-3);
    }

    #[test]
    fn state_dump_round_trips_through_the_schema() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config(dir.path());
        let path = run_state_dump(&config, 0.7, 2).unwrap();
        let state = cavity_ps::FieldState::from_json(&fs::read_to_string(path).unwrap()).unwrap();
        assert!(state.is_normalized());
        assert_eq!(state.cutoff(), 32);
    }
}
