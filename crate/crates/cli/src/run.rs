//! Executes a job and records every artifact in `manifest.json`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use spinorbit::analysis::{
    displaced_mode_probabilities, extrinsic_oam, intensity_map, momentum_map, phase_map, radial_overlap,
    spin_texture, write_displaced_csv, ScalarMap2D,
};
use spinorbit::io::{write_field, write_pgm, write_scalar_map};
use spinorbit::lg::{component_oam_about, decompose_about};
use spinorbit::operators::{lattice_constant, rho_c_from_physical, run_pipeline, PipelineRun};
use spinorbit::tomography::{make_sinogram, reconstruct_fbp};
use spinorbit::{Error, Result, Spin, SpinorField, Warning};

use crate::job::{Analysis, JobConfig};

#[derive(Serialize)]
struct Artifact {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    config_sha256: String,
    survival: f64,
    warnings: Vec<Warning>,
    outputs: Vec<Artifact>,
}

#[derive(Serialize)]
struct Units {
    rho_c_m: f64,
    rho_c_over_sigma: f64,
    lattice_constant_m: f64,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
    warnings: Vec<Warning>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn warn(&mut self, ws: &[Warning]) {
        for w in ws {
            if !self.warnings.contains(w) {
                self.warnings.push(w.clone());
            }
        }
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = self.create(name)?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn map(&mut self, base: &str, map: &ScalarMap2D, pgm: bool) -> Result<()> {
        if let Some(i) = map.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        self.warn(map.warnings());
        self.write(&format!("{base}.map"), |w| write_scalar_map(w, map))?;
        if pgm {
            self.write(&format!("{base}.pgm"), |w| write_pgm(w, map))?;
        }
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv<F>(f: F) -> impl FnOnce(&mut BufWriter<File>) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    move |w| f(w).map_err(Error::from)
}

/// Runs the job in `config_src`, writing into `out`. Returns printable summary lines.
pub fn run_job(config_src: &str, out: &Path) -> Result<Vec<String>> {
    let job = JobConfig::from_toml(config_src)?;
    fs::create_dir_all(out)?;
    let mut outputs = Outputs { dir: out.to_path_buf(), written: Vec::new(), warnings: Vec::new() };
    let mut summary = Vec::new();

    let input = job.pipeline().build_input()?;
    let run = job.pipeline().run()?;
    let psi = &run.field;
    outputs.warn(psi.warnings());
    summary.push(format!("pipeline: {} steps, survival {:.6}", run.log.len(), run.survival()));
    outputs.write("pipeline.csv", csv(|w| write_log(w, &run)))?;
    if job.save_field {
        outputs.write("field.spinor", |w| write_field(w, psi))?;
    }
    if let Some(p) = &job.units {
        let rc = rho_c_from_physical(p)?;
        let units = Units { rho_c_m: rc.meters, rho_c_over_sigma: rc.over_sigma, lattice_constant_m: lattice_constant(p)? };
        summary.push(format!(
            "units: rho_c = {:.4e} m ({:.4} sigma), a = {:.4e} m",
            units.rho_c_m, units.rho_c_over_sigma, units.lattice_constant_m
        ));
        outputs.write("units.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &units).map_err(io::Error::from)?;
            Ok(writeln!(w)?)
        })?;
    }

    for a in job.analyses() {
        let line = run_analysis(a, &job, &input, psi, &mut outputs)?;
        summary.push(format!("{} -> {}: {line}", a.kind(), a.output()));
    }

    summary.extend(outputs.warnings.iter().map(|w| format!("warning: {w}")));
    let mut artifacts = Vec::with_capacity(outputs.written.len());
    for name in &outputs.written {
        artifacts.push(Artifact { path: name.clone(), sha256: sha256_hex(&fs::read(out.join(name))?) });
    }
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: sha256_hex(config_src.as_bytes()),
        survival: run.survival(),
        warnings: outputs.warnings,
        outputs: artifacts,
    };
    let mut body = serde_json::to_vec_pretty(&manifest).map_err(io::Error::from)?;
    body.push(b'\n');
    fs::write(out.join("manifest.json"), body)?;
    Ok(summary)
}

fn write_log<W: Write>(w: &mut W, run: &PipelineRun) -> io::Result<()> {
    writeln!(w, "index,kind,survival,norm_sqr")?;
    for r in &run.log {
        writeln!(w, "{},{},{:.17e},{:.17e}", r.index, r.kind, r.survival, r.norm_sqr)?;
    }
    Ok(())
}

fn run_analysis(
    a: &Analysis,
    job: &JobConfig,
    input: &SpinorField,
    psi: &SpinorField,
    out: &mut Outputs,
) -> Result<String> {
    let base = a.output();
    Ok(match a {
        Analysis::Intensity { spin, phase, pgm, .. } => {
            let m = intensity_map(psi, *spin);
            out.map(base, &m, *pgm)?;
            if *phase {
                out.map(&format!("{base}_phase"), &phase_map(psi, *spin), *pgm)?;
            }
            format!("survival {:.6}", m.integral())
        }
        Analysis::Momentum { spin, crop, pgm, .. } => {
            let mut m = momentum_map(psi, *spin)?;
            if let Some(c) = crop {
                m = m.center_crop(*c)?;
            }
            out.map(base, &m, *pgm)?;
            format!("survival {:.6}", m.integral())
        }
        Analysis::Decompose { n_max, ell_range, center, .. } => {
            let d = decompose_about(psi, *n_max, *ell_range, *center)?;
            out.write(&format!("{base}.csv"), csv(|w| d.write_csv(w)))?;
            format!("captured {:.6}, residual {:.3e}", d.captured(), d.residual())
        }
        Analysis::RadialOverlap { reference, nbins, .. } => {
            let start = match &reference.input {
                Some(spec) => spec.build(&job.grid)?,
                None => input.clone(),
            };
            let other = run_pipeline(&start, &reference.steps)?.field;
            let n = nbins.unwrap_or((16.0 * job.grid.half_width()).round() as usize).max(16);
            let curve = radial_overlap(psi, &other, n)?;
            out.write(&format!("{base}.csv"), csv(|w| curve.write_csv(w)))?;
            format!("{} bins", curve.values.len())
        }
        Analysis::Texture { decimate, .. } => {
            let t = spin_texture(psi);
            out.write(&format!("{base}.csv"), csv(|w| t.write_csv(w, *decimate)))?;
            format!("{} unmasked pixels", t.values().iter().flatten().count())
        }
        Analysis::Sinogram { spin, angles, .. } => {
            let sg = make_sinogram(psi, *spin, *angles)?;
            out.write(&format!("{base}.csv"), csv(|w| sg.write_csv(w)))?;
            format!("{} angles x {} samples", sg.angles().len(), sg.k_axis().len())
        }
        Analysis::Reconstruct { spin, angles, size, pgm, .. } => {
            let sg = make_sinogram(psi, *spin, *angles)?;
            let size = size.unwrap_or(job.grid.nx() / 4);
            let rec = reconstruct_fbp(&sg, size)?;
            out.map(base, &rec.raw, false)?;
            if *pgm {
                out.write(&format!("{base}.pgm"), |w| write_pgm(w, &rec.display))?;
            }
            format!("{size}x{size} from {angles} angles")
        }
        Analysis::Oam { axis, .. } => {
            // Per unit weight, so projected outputs are reported like full ones.
            let total = extrinsic_oam(&psi.normalize()?, *axis)?;
            let up = component_oam_about(psi, Spin::Up, *axis);
            let down = component_oam_about(psi, Spin::Down, *axis);
            let (up, down) = (up.ok(), down.ok());
            out.write(&format!("{base}.csv"), csv(|w| {
                writeln!(w, "quantity,value")?;
                writeln!(w, "total,{total:.17e}")?;
                for (name, v) in [("up", up), ("down", down)] {
                    match v {
                        Some(v) => writeln!(w, "{name},{v:.17e}")?,
                        None => writeln!(w, "{name},")?,
                    }
                }
                Ok(())
            }))?;
            format!("<Lz> = {total:.6}")
        }
        Analysis::DisplacedProbabilities { q, rho0, .. } => {
            let rows = displaced_mode_probabilities(&job.grid, *q, rho0)?;
            out.write(&format!("{base}.csv"), csv(|w| write_displaced_csv(&rows, w)))?;
            format!("{} displacements", rows.len())
        }
    })
}
