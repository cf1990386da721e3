use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use isentropy::{
    compare_models, emit_comparison, emit_sweep, entropy_field, fit_model, inject_noise,
    load_ensemble, noise_experiment, read_entropy_field, relative_magnitude, render_entropy_map,
    write_ensemble, write_entropy_field, EmitOptions, EnsembleField, HarnessOptions,
    NoiseExperiment, NoiseSpec, ReportFormat, DEFAULT_SWEEP_BINS,
};

mod args;

use args::{Cli, Command, Magnitude, ReportArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Info { manifest } => info(&manifest),
        Command::Slice {
            manifest,
            slice,
            out,
        } => {
            let field = load(&manifest)?.slice_z(slice)?;
            write_ensemble(&field, &out)?;
            Ok(())
        }
        Command::Subsample {
            manifest,
            stride,
            out,
        } => {
            let field = load(&manifest)?.subsample(stride as usize)?;
            write_ensemble(&field, &out)?;
            Ok(())
        }
        Command::Noisify {
            manifest,
            member,
            noise,
            magnitude,
            members,
            seed,
            out,
        } => {
            let field = load(&manifest)?;
            let base = base_member(&field, member)?;
            let spec = NoiseSpec {
                kind: noise,
                magnitude: resolve_magnitude(&magnitude, base)?,
                member_count: members,
                seed,
            };
            let noisy = inject_noise(base, field.dims(), &spec)?.with_name(format!(
                "{}-{}-noise",
                field.name(),
                noise
            ));
            write_ensemble(&noisy, &out)?;
            Ok(())
        }
        Command::Entropy {
            manifest,
            model,
            isovalue,
            out,
        } => {
            let field = load(&manifest)?;
            let entropy = entropy_field(&fit_model(&field, model)?, isovalue)?;
            if let Some(out) = out {
                write_entropy_field(&entropy, &out)?;
            }
            println!("total_entropy_bits={}", entropy.total_entropy());
            Ok(())
        }
        Command::Compare {
            manifest,
            models,
            isovalues,
            report,
        } => {
            let field = load(&manifest)?;
            let result = compare_models(&field, &models, &isovalues, &harness_options(&report))?;
            write_report(&report, |sink| {
                emit_comparison(&result, report.format, &emit_options(&report), sink)
            })
        }
        Command::Binsweep {
            manifest,
            model,
            isovalue,
            bins,
            report,
        } => {
            let bins = if bins.is_empty() {
                DEFAULT_SWEEP_BINS.to_vec()
            } else {
                bins
            };
            let field = load(&manifest)?;
            let sweep =
                isentropy::bin_sweep(&field, model, isovalue, &bins, &harness_options(&report))?;
            write_report(&report, |sink| {
                emit_sweep(&sweep, report.format, &emit_options(&report), sink)
            })
        }
        Command::Noisetest {
            manifest,
            member,
            isovalues,
            models,
            magnitude,
            magnitude_uniform,
            members,
            seed,
            report,
        } => {
            let field = load(&manifest)?;
            let base = base_member(&field, member)?;
            let gaussian_magnitude = resolve_magnitude(&magnitude, base)?;
            let experiment = NoiseExperiment {
                gaussian_magnitude,
                uniform_magnitude: magnitude_uniform.unwrap_or(gaussian_magnitude),
                members,
                seed,
            };
            let (gaussian, uniform) = noise_experiment(
                base,
                field.dims(),
                &experiment,
                &isovalues,
                &models,
                &harness_options(&report),
            )?;
            let opts = emit_options(&report);
            write_report(&report, |sink| {
                for (label, magnitude, r) in [
                    ("gaussian", experiment.gaussian_magnitude, &gaussian),
                    ("uniform", experiment.uniform_magnitude, &uniform),
                ] {
                    let prefix = if report.format == ReportFormat::Csv {
                        "# "
                    } else {
                        ""
                    };
                    writeln!(
                        sink,
                        "{prefix}noise={label} magnitude={} members={} seed={}",
                        isentropy::fmt_sig6(magnitude),
                        experiment.members,
                        experiment.seed
                    )?;
                    emit_comparison(r, report.format, &opts, sink)?;
                }
                Ok(())
            })
        }
        Command::Render {
            source,
            model,
            isovalue,
            slice,
            max_bits,
            out,
        } => {
            let entropy = match (source.manifest, source.entropy) {
                (Some(manifest), _) => {
                    let (Some(model), Some(isovalue)) = (model, isovalue) else {
                        bail!("--manifest needs --model and --isovalue");
                    };
                    let field = load(&manifest)?;
                    if !field.dims().is_2d() && slice.is_none() {
                        bail!("3D fields need --slice z=<i> to render");
                    }
                    entropy_field(&fit_model(&field, model)?, isovalue)?
                }
                (None, Some(sidecar)) => read_entropy_field(&sidecar)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let max_bits = max_bits.unwrap_or(entropy.max_bits());
            render_entropy_map(&entropy, &out, slice, max_bits)?;
            Ok(())
        }
    }
}

fn load(manifest: &Path) -> Result<EnsembleField> {
    load_ensemble(manifest).with_context(|| format!("loading ensemble {}", manifest.display()))
}

fn info(manifest: &Path) -> Result<()> {
    let field = load(manifest)?;
    let (lo, hi) = field.value_range();
    let dims = field.dims();
    println!("name: {}", field.name());
    println!("dims: {dims} ({})", if dims.is_2d() { "2D" } else { "3D" });
    println!("members: {}", field.member_count());
    println!("vertices: {}", dims.vertex_count());
    println!("cells: {}", dims.cell_count());
    println!("range: [{lo}, {hi}]");
    Ok(())
}

fn base_member(field: &EnsembleField, member: usize) -> Result<&[f64]> {
    if member >= field.member_count() {
        bail!(
            "member {member} out of range; ensemble has {} members",
            field.member_count()
        );
    }
    Ok(field.member(member))
}

fn resolve_magnitude(m: &Magnitude, base: &[f64]) -> Result<f64> {
    match (m.magnitude, m.magnitude_relative) {
        (Some(a), None) => Ok(a),
        (None, Some(r)) => Ok(relative_magnitude(base, r)),
        _ => bail!("give exactly one of --magnitude and --magnitude-relative"),
    }
}

fn harness_options(r: &ReportArgs) -> HarnessOptions {
    HarnessOptions {
        strict_timing: r.timing_strict,
        repeat: r.repeat as usize,
        ..Default::default()
    }
}

fn emit_options(r: &ReportArgs) -> EmitOptions {
    EmitOptions {
        timings: r.timings || r.timing_strict || r.repeat > 1,
    }
}

/// Renders into memory first so a failing report never leaves a partial file.
fn write_report(
    r: &ReportArgs,
    emit: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    emit(&mut buf)?;
    match &r.out {
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating {}", path.display()))?;
            tmp.write_all(&buf)?;
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
