use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{Grid, RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::experiments::{
    run_amplitude_sweep, run_chi_ablation, run_detuning_scan, run_phase_time_map,
    run_projected_comparison, synth_stark_spectroscopy, write_json, write_map_csv, write_table,
    run_point, InitialState, KcqInit, MapResult, ObservableKind, SweepSpec, TransmonInit,
};
use crate::fitting::{
    extract_g3_tilde, fit_damped_sinusoid, fit_stark_shift, flux_landmarks, snail_flux_fit,
    snail_potential_expansion, FitResult, G3Options,
};
use crate::model::DeviceReference;

pub const MANIFEST: &str = "manifest.json";

/// Exit-status categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Config,
    Validation,
    Integrator,
    Fit,
    Io,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Validation => 3,
            Category::Integrator => 4,
            Category::Fit => 5,
            Category::Io => 6,
        }
    }

    pub fn of(e: &Error) -> Self {
        match e {
            Error::Config(_) => Category::Config,
            Error::IntegratorAbort { .. } | Error::InvalidState(_) => Category::Integrator,
            Error::Unidentifiable(_) | Error::InsufficientData(_) | Error::NoMinimum(_) => {
                Category::Fit
            }
            Error::Io(_) => Category::Io,
            _ => Category::Validation,
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Fits that did not converge or could not be attempted.
    pub fit_failures: Vec<String>,
}

/// Collects artifacts in the output directory; all writes go through here.
struct Writer<'a> {
    dir: &'a Path,
    artifacts: Vec<String>,
    fit_failures: Vec<String>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        write_table(&self.dir.join(name), &header, rows)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(value, &self.dir.join(name))?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn map(&mut self, map: &MapResult, prefix: &str) -> Result<()> {
        for p in write_map_csv(map, self.dir, prefix)? {
            let name = p.file_name().expect("file path").to_string_lossy().into_owned();
            self.artifacts.push(name);
        }
        Ok(())
    }

    /// Records a fit for the exit status and returns it as JSON.
    fn fit(&mut self, label: &str, r: Result<FitResult>) -> serde_json::Value {
        match r {
            Ok(f) => {
                if !f.converged {
                    self.fit_failures.push(format!("{label}: {:?}", f.status));
                }
                serde_json::to_value(&f).expect("fit serialises")
            }
            Err(e) => {
                self.fit_failures.push(format!("{label}: {e}"));
                json!({ "error": e.to_string() })
            }
        }
    }
}

fn sweep_spec(cfg: &RunConfig, base: SweepSpec) -> Result<SweepSpec> {
    let s = &cfg.sweep;
    let mut spec = base;
    if let Some(m) = s.model {
        spec.model = m;
    }
    if let Some(i) = s.initial {
        spec.initial = i;
    }
    if let Some(o) = &s.observables {
        spec.observables = o.clone();
    }
    spec.integrator = cfg.integrator.clone();
    spec.validate()?;
    Ok(spec)
}

fn grid(g: &Option<Grid>, name: &str) -> Result<Vec<f64>> {
    g.as_ref()
        .map(Grid::values)
        .ok_or_else(|| Error::Config(format!("sweep.{name} is not set")))
}

fn phase_spec(cfg: &RunConfig) -> Result<SweepSpec> {
    let base = SweepSpec::phase_time(
        cfg.params.clone(),
        grid(&cfg.sweep.axis, "axis")?,
        grid(&cfg.sweep.times, "times")?,
    );
    sweep_spec(cfg, base)
}

/// Two-column numeric CSV with a header row.
fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    Error::Parse(format!("{} data row {}: column {} is not a number", path.display(), i + 1, k + 1))
                })
        };
        a.push(num(0)?);
        b.push(num(1)?);
    }
    Ok((a, b))
}

fn fig2(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let spec = phase_spec(cfg)?;
    let map = run_phase_time_map(&spec)?;
    w.map(&map, "fig2")?;
    // Transmon coherence under the interaction, read off the quadrature
    // where the cat stays put.
    let quarter = std::f64::consts::FRAC_PI_2;
    let x_t = ObservableKind::XT.name();
    let row = map
        .axis
        .values
        .iter()
        .position(|p| (p - quarter).abs() < 1e-9);
    if let (Some(k), Some(data)) = (row, map.map(x_t)) {
        let fit = w.fit("x_t at phi = pi/2", fit_damped_sinusoid(&map.times, &data[k]));
        w.json("fig2_fits.json", &json!({ "phi": map.axis.values[k], "x_t": fit }))?;
    }
    Ok(())
}

fn fig3(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let base = SweepSpec::amplitude(
        cfg.params.clone(),
        grid(&cfg.sweep.axis, "axis")?,
        grid(&cfg.sweep.times, "times")?,
    );
    let spec = sweep_spec(cfg, base)?;
    let map = run_amplitude_sweep(&spec)?;
    w.map(&map, "fig3")?;
    let name = spec.observables[0].name();
    let data = map.map(name).expect("observable present");
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (xi, trace) in map.axis.values.iter().zip(data) {
        // Rows without a full period are expected at small amplitude and
        // are left out of the slope rather than counted as failures.
        match fit_damped_sinusoid(&map.times, trace) {
            Ok(f) => {
                let freq = f.value("frequency").expect("named");
                let sigma = f.uncertainty("frequency").expect("named");
                if f.converged {
                    rows.push(vec![*xi, freq, freq / 2.0, sigma / 2.0]);
                }
                fits.push(json!({ "xi": xi, "fit": f }));
            }
            Err(e) => fits.push(json!({ "xi": xi, "error": e.to_string() })),
        }
    }
    w.table("fig3_rates.csv", &["xi", "frequency", "omega", "omega_sigma"], &rows)?;
    let xi: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let omega: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let opts = G3Options {
        xi_min: None,
        sigmas: Some(rows.iter().map(|r| r[3]).collect()),
    };
    let g3 = match extract_g3_tilde(&xi, &omega, cfg.params.alpha, &opts) {
        Ok(g) => {
            let fit = w.fit("g3_tilde", Ok(g.fit.clone()));
            json!({ "fit": fit, "xi_min": g.xi_min, "points_used": g.points_used })
        }
        Err(e) => w.fit("g3_tilde", Err(e)),
    };
    w.json("fig3_fits.json", &json!({ "traces": fits, "g3_tilde": g3 }))
}

fn detuning(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let spec = phase_spec(cfg)?;
    let results = run_detuning_scan(&spec, &cfg.detuning.deltas)?;
    let mut rows = Vec::new();
    for (k, r) in results.iter().enumerate() {
        w.map(&r.map, &format!("detuning_{k}"))?;
        rows.push(vec![r.delta, r.skew.skew_deg_per_us]);
    }
    w.table("detuning_skew.csv", &["delta", "skew_deg_per_us"], &rows)?;
    let skews: Vec<_> = results
        .iter()
        .map(|r| json!({ "delta": r.delta, "skew": r.skew }))
        .collect();
    w.json("detuning_skew.json", &skews)
}

fn chi(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let spec = phase_spec(cfg)?;
    let rows: Vec<Vec<f64>> = run_chi_ablation(&spec, &cfg.chi.values)?
        .iter()
        .map(|d| vec![d.chi_ab, d.max_deviation])
        .collect();
    w.table("chi_ablation.csv", &["chi_ab", "max_deviation"], &rows)
}

fn projected(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let rows = run_projected_comparison(&cfg.params, &cfg.projected.alphas, &cfg.integrator)?;
    let summary: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.alpha, r.t_end, r.max_deviation])
        .collect();
    w.table("projected_summary.csv", &["alpha", "t_end", "max_deviation"], &summary)?;
    for (k, r) in rows.iter().enumerate() {
        let trace: Vec<Vec<f64>> = (0..r.times.len())
            .map(|i| vec![r.times[i], r.full[i], r.effective[i]])
            .collect();
        w.table(&format!("projected_{k}.csv"), &["t", "full", "effective"], &trace)?;
    }
    Ok(())
}

fn stark_data(cfg: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = &cfg.stark;
    let noise = (s.noise_sigma > 0.0).then_some((s.noise_sigma, cfg.seed));
    let pts = synth_stark_spectroscopy(&s.model(), &s.v.values(), s.c, noise)?;
    Ok(pts.iter().map(|p| (p.v, p.freq)).unzip())
}

fn stark_synth(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let (v, f) = stark_data(cfg)?;
    let rows: Vec<Vec<f64>> = v.iter().zip(&f).map(|(a, b)| vec![*a, *b]).collect();
    w.table("stark.csv", &["v", "freq"], &rows)
}

fn stark_fit(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let (v, f) = match &cfg.stark.input {
        Some(p) => read_pairs(p)?,
        None => {
            stark_synth(cfg, w)?;
            stark_data(cfg)?
        }
    };
    let fit = w.fit("c", fit_stark_shift(&cfg.stark.model(), &v, &f));
    w.json("stark_fit.json", &fit)
}

fn snail(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let s = &cfg.snail;
    let (flux, freq) = match &s.input {
        Some(p) => read_pairs(p)?,
        None => {
            let spec = s.spec();
            let flux = s.flux.values();
            let freq = flux
                .iter()
                .map(|&x| Ok(snail_potential_expansion(&spec, x)?.omega))
                .collect::<Result<Vec<f64>>>()?;
            let rows: Vec<Vec<f64>> = flux.iter().zip(&freq).map(|(a, b)| vec![*a, *b]).collect();
            w.table("snail_data.csv", &["flux", "freq"], &rows)?;
            (flux, freq)
        }
    };
    let fixed = s.fixed();
    match snail_flux_fit(&flux, &freq, fixed) {
        Ok(fit) => {
            let rows: Vec<Vec<f64>> = fit.couplings.iter().map(|c| vec![c.0, c.1, c.2]).collect();
            w.table("snail_couplings.csv", &["flux", "g3", "g4"], &rows)?;
            let e_c = fit.fit.value("e_c").expect("named");
            let e_l = fit.fit.value("e_l").expect("named");
            let fitted = fixed.spec(e_c, e_l, s.phi_ext);
            let operating = snail_potential_expansion(&fitted, s.phi_ext)?;
            let landmarks = flux_landmarks(&fitted, 0.25, 0.45)?;
            let result = w.fit("snail", Ok(fit.fit));
            w.json(
                "snail_fit.json",
                &json!({ "fit": result, "operating_point": operating, "landmarks": landmarks }),
            )
        }
        Err(e) => {
            let result = w.fit("snail", Err(e));
            w.json("snail_fit.json", &json!({ "fit": result }))
        }
    }
}

fn oscillation(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let (t, y) = match &cfg.oscillation.input {
        Some(p) => read_pairs(p)?,
        None => {
            let times = grid(&cfg.sweep.times, "times")?;
            let init = cfg
                .sweep
                .initial
                .unwrap_or(InitialState::new(KcqInit::CatPlus, TransmonInit::PlusZ));
            let model = cfg.sweep.model.unwrap_or_default();
            cfg.params.validate()?;
            let y = run_point(
                &cfg.params,
                model,
                init,
                &[ObservableKind::ZT],
                &times,
                &cfg.integrator,
            )?
            .remove(0);
            let rows: Vec<Vec<f64>> = times.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
            w.table("oscillation_trace.csv", &["t", "z_t"], &rows)?;
            (times, y)
        }
    };
    let r = fit_damped_sinusoid(&t, &y);
    let rate = r
        .as_ref()
        .ok()
        .and_then(|f| f.value("frequency"))
        .map(|f| f / 2.0);
    let fit = w.fit("oscillation", r);
    w.json("oscillation_fit.json", &json!({ "fit": fit, "omega": rate }))
}

/// Runs the configured scenario and writes its artifacts plus the manifest.
///
/// The manifest is written even when fits fail; any other error leaves the
/// directory without one.
pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    cfg.resolve_defaults();
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", cfg.out.display())))?;
    let start = Instant::now();
    let mut w = Writer {
        dir: &cfg.out,
        artifacts: Vec::new(),
        fit_failures: Vec::new(),
    };
    let run = |w: &mut Writer| match cfg.scenario {
        Scenario::Fig2Map => fig2(&cfg, w),
        Scenario::Fig3Sweep => fig3(&cfg, w),
        Scenario::DetuningScan => detuning(&cfg, w),
        Scenario::ChiAblation => chi(&cfg, w),
        Scenario::ProjectedCompare => projected(&cfg, w),
        Scenario::StarkSynth => stark_synth(&cfg, w),
        Scenario::StarkFit => stark_fit(&cfg, w),
        Scenario::SnailFit => snail(&cfg, w),
        Scenario::OscillationFit => oscillation(&cfg, w),
    };
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| run(&mut w))?;
    } else {
        run(&mut w)?;
    }
    let manifest = json!({
        "scenario": cfg.scenario,
        "config": cfg,
        "inputs_hash": cfg.inputs_hash(),
        "seed": cfg.seed,
        "dt": cfg.integrator.dt,
        "code_version": concat!("kerrcat ", env!("CARGO_PKG_VERSION")),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "artifacts": &w.artifacts,
        "fit_failures": &w.fit_failures,
        "device_reference": DeviceReference::packaged(),
    });
    write_json(&manifest, &cfg.out.join(MANIFEST))?;
    Ok(Outcome {
        artifacts: w.artifacts,
        fit_failures: w.fit_failures,
    })
}
