//! Front end for the `cfrac` binary: JSON job configs in, models, kernel
//! tables and residual reports out.

pub mod config;
pub mod error;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cfrac::{Cicf, InterpolationReport, KernelSet, NodeSystem};

pub use config::{Job, JobConfig, Mode, Overrides};
pub use error::CliError;

use config::FunctionalJob;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn console(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn build_kernels(job: &FunctionalJob, err: &mut dyn Write) -> Result<KernelSet<f64>, CliError> {
    let sys = NodeSystem::<f64>::from_exprs(&job.f, &job.nodes, job.n_cells)?;
    let ks = KernelSet::compute(sys)?;
    for w in ks.warnings() {
        writeln!(err, "warning: {w}").map_err(console)?;
    }
    Ok(ks)
}

/// CSV with `xi`, the kernel columns `a1..an` and one residual column per
/// node level `r0..rn`; breakdown cells are written as `nan`.
pub fn emit_plot_data(
    ks: &KernelSet<f64>,
    report: &InterpolationReport<f64>,
    path: &Path,
) -> Result<(), CliError> {
    write_file(path, |w| {
        let mut header = vec!["xi".to_string()];
        header.extend((1..=ks.n()).map(|k| format!("a{k}")));
        header.extend((0..=ks.n()).map(|k| format!("r{k}")));
        writeln!(w, "{}", header.join(","))?;
        for j in 0..=ks.n_cells() {
            let mut row = vec![num(ks.system().xi(j))];
            row.extend(ks.kernels().iter().map(|a| num(a.value(j))));
            row.extend(
                report
                    .residuals
                    .iter()
                    .map(|r| r[j].map_or_else(|| "nan".to_string(), num)),
            );
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })
}

fn write_residuals(ks: &KernelSet<f64>, report: &InterpolationReport<f64>, w: &mut dyn Write) -> std::io::Result<()> {
    let mut header = vec!["xi".to_string()];
    header.extend((0..=ks.n()).map(|k| format!("r{k}")));
    writeln!(w, "{}", header.join(","))?;
    for j in 0..=ks.n_cells() {
        let mut row = vec![num(ks.system().xi(j))];
        row.extend(
            report
                .residuals
                .iter()
                .map(|r| r[j].map_or_else(|| "nan".to_string(), num)),
        );
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn sidecar_path(job: &FunctionalJob) -> Option<PathBuf> {
    job.outputs
        .sidecar
        .clone()
        .or_else(|| job.outputs.out.as_ref().map(|p| p.with_extension("json")))
}

/// Runs one job, writing human-readable output to `out` and diagnostics to
/// `err`.
pub fn run(job: &Job, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match job {
        Job::FitFn {
            nodes,
            values,
            out: path,
        } => {
            let model = Cicf::fit(nodes, values)?;
            let json = model.to_json();
            match path {
                Some(p) => {
                    write_file(p, |w| writeln!(w, "{json}"))?;
                    let coeffs: Vec<String> = model.coefficients().iter().map(|&c| num(c)).collect();
                    writeln!(out, "coefficients: {}", coeffs.join(", ")).map_err(console)?;
                }
                None => writeln!(out, "{json}").map_err(console)?,
            }
        }
        Job::EvalFn { model, at } => {
            let text = std::fs::read_to_string(model).map_err(|e| CliError::io(model, e))?;
            let model = Cicf::from_json(&text)?;
            writeln!(out, "x,value").map_err(console)?;
            for &x in at {
                let v = model.evaluate(&x)?;
                writeln!(out, "{},{}", num(x), num(v)).map_err(console)?;
            }
        }
        Job::FitFunctional(job) => {
            let ks = build_kernels(job, err)?;
            match &job.outputs.out {
                Some(p) => write_file(p, |w| ks.write_csv(w))?,
                None => ks.write_csv(&mut *out).map_err(console)?,
            }
            if let Some(p) = sidecar_path(job) {
                let side = serde_json::to_string_pretty(&ks.sidecar()).expect("sidecar serializes");
                write_file(&p, |w| writeln!(w, "{side}"))?;
            }
            if let Some(p) = &job.outputs.plot {
                emit_plot_data(&ks, &ks.verify_interpolation(), p)?;
            }
            writeln!(err, "a0 = {}, n = {}, grid = {}", num(ks.a0()), ks.n(), ks.n_cells())
                .map_err(console)?;
        }
        Job::Verify(job) => {
            let ks = build_kernels(job, err)?;
            let report = ks.verify_interpolation();
            if let Some(p) = &job.outputs.out {
                write_file(p, |w| write_residuals(&ks, &report, w))?;
            }
            if let Some(p) = &job.outputs.plot {
                emit_plot_data(&ks, &report, p)?;
            }
            for (k, j, msg) in &report.failures {
                writeln!(err, "failed cell k={k}, xi={}: {msg}", num(ks.system().xi(*j)))
                    .map_err(console)?;
            }
            writeln!(out, "max residual: {}", num(report.max_residual)).map_err(console)?;
            if !report.passed(job.tolerance) {
                return Err(CliError::Verification(format!(
                    "max residual {} exceeds tolerance {} ({} failed cells)",
                    num(report.max_residual),
                    num(job.tolerance),
                    report.failures.len()
                )));
            }
        }
        Job::ReduceCheck(job) => {
            let ks = build_kernels(job, err)?;
            let r = ks.constant_node_reduction()?;
            let table = |w: &mut dyn Write| -> std::io::Result<()> {
                writeln!(w, "m,integrated,classical,abs_diff")?;
                for (m, (a, c)) in r.integrated.iter().zip(r.classical.coefficients()).enumerate() {
                    writeln!(w, "{m},{},{},{}", num(*a), num(*c), num((a - c).abs()))?;
                }
                Ok(())
            };
            table(out).map_err(console)?;
            if let Some(p) = &job.outputs.out {
                write_file(p, table)?;
            }
            let gap = r.max_gap();
            writeln!(out, "max discrepancy: {}", num(gap)).map_err(console)?;
            if gap.is_nan() || gap > job.tolerance {
                return Err(CliError::Verification(format!(
                    "max discrepancy {} exceeds tolerance {}",
                    num(gap),
                    num(job.tolerance)
                )));
            }
        }
    }
    Ok(())
}
