use cvngs_core::fock::{fock_pipeline, scattering_covariance, FockConfig, TwoModeState};
use cvngs_core::gaussian::{
    amplifier_map, epr_steering_m_to_c, logarithmic_negativity, loss_channel_cov, to_db, Amplifier,
    CovMatrix,
};
use cvngs_core::metrics::{
    best_fidelity, cat_axis, cat_size, fidelity, squeezing_estimate, Complex64, SqueezeMethod,
    TargetState,
};
use cvngs_core::phase_space::{Axis, Grid, GridSpec, PolyGaussian};
use cvngs_core::pulse::{covariance_after_pulse, PulseSpec, SystemParams};
use cvngs_core::synthesis::{
    eps_pipeline, four_cat_conditions, four_cat_pipeline, four_cat_stages, four_cat_wavefunction,
    imperfect_wigner_closed_form, target_gains, xi_from_gain, PipelineOutput, PipelineSpec,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::manifest::{Command, Manifest, PulseSection, Target, TargetSection};
use crate::output::{cov_json, num, opt, with_pool, Report, Sink};

pub struct Ctx {
    pub jobs: usize,
}

pub fn dispatch(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    sink.write_manifest(m)?;
    match m.command {
        Command::EntanglementSweep => entanglement_sweep(m, ctx, sink, report),
        Command::GainSolve => gain_solve(m, ctx, sink, report),
        Command::Eps => eps(m, ctx, sink, report),
        Command::Imperfections => imperfections(m, ctx, sink, report),
        Command::FourCat => four_cat(m, ctx, sink, report),
        Command::Oracle => oracle(m, ctx, sink, report),
        Command::Figures => crate::figures::run(m, ctx, sink, report),
    }
}

fn reflectivities(m: &Manifest) -> CliResult<Vec<f64>> {
    if let Some(r) = m.sweep.as_ref().and_then(|s| s.reflectivity.as_ref()) {
        return r.points("reflectivity");
    }
    match m.pulse_spec()? {
        PulseSpec::Reflectivity(r) => Ok(vec![r]),
        p @ PulseSpec::Duration(_) => {
            let params = m.system.params()?;
            Ok(vec![p.resolve(params.effective_decay())?.reflectivity])
        }
    }
}

/// Post-pulse state after the transmission channel and an optional noisy
/// unit-gain amplifier.
fn channel_cov(params: &SystemParams, r: f64, eta: f64, noise: f64) -> CliResult<CovMatrix> {
    let mut v = covariance_after_pulse(params, PulseSpec::Reflectivity(r))?;
    if eta < 1.0 {
        v = loss_channel_cov(&v, eta)?;
    }
    if noise > 0.0 {
        v = amplifier_map(&v, Amplifier::new(1.0, noise)?)?;
    }
    Ok(v)
}

fn argmax(xs: &[f64], ys: &[f64]) -> f64 {
    let mut best = 0;
    for i in 1..ys.len() {
        if ys[i] > ys[best] {
            best = i;
        }
    }
    xs[best]
}

fn entanglement_sweep(
    m: &Manifest,
    ctx: &Ctx,
    sink: &mut Sink,
    report: &mut Report,
) -> CliResult<()> {
    let sw = m.sweep.clone().unwrap_or_default();
    let (eta, noise) = (m.channel.eta, sw.amplifier_noise);
    if let Some(cs) = &sw.cooperativity {
        let cs = cs.points("cooperativity")?;
        let r = reflectivities(m)?[0];
        let base = crate::manifest::SystemSection {
            gamma_mhz: Some(0.0),
            cooperativity: None,
            ..m.system.clone()
        };
        let v0 = channel_cov(&base.params()?, r, eta, noise)?;
        let (e0, s0) = (logarithmic_negativity(&v0)?, epr_steering_m_to_c(&v0)?);
        let rows = with_pool(ctx.jobs, || {
            cs.par_iter()
                .map(|&c| -> CliResult<Vec<f64>> {
                    let sys = crate::manifest::SystemSection {
                        gamma_mhz: None,
                        cooperativity: Some(c),
                        ..m.system.clone()
                    };
                    let v = channel_cov(&sys.params()?, r, eta, noise)?;
                    let (e, s) = (logarithmic_negativity(&v)?, epr_steering_m_to_c(&v)?);
                    Ok(vec![
                        c,
                        1.0 / c,
                        e,
                        s,
                        e / e0,
                        if s0 > 0.0 { s / s0 } else { f64::NAN },
                    ])
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        let file = sink.write_curve(
            "cooperativity",
            &[
                "C_om",
                "C_om_inv",
                "E_N",
                "steering_MC",
                "E_N_norm",
                "steering_norm",
            ],
            &rows,
        )?;
        report.metrics.insert("reflectivity".into(), num(r));
        report.metrics.insert("baseline_E_N".into(), num(e0));
        report
            .metrics
            .insert("baseline_steering_MC".into(), num(s0));
        report.metrics.insert("data".into(), json!(file));
        report
            .notes
            .push("normalization baseline is the gamma = 0 limit (1/C_om = 0)".into());
        return Ok(());
    }
    let rs = reflectivities(m)?;
    let dbs = match &sw.squeeze_db {
        Some(r) => r.points("squeeze_db")?,
        None => vec![m.system.squeeze_db],
    };
    let jobs: Vec<(f64, f64)> = dbs
        .iter()
        .flat_map(|&db| rs.iter().map(move |&r| (db, r)))
        .collect();
    let rows = with_pool(ctx.jobs, || {
        jobs.par_iter()
            .map(|&(db, r)| -> CliResult<Vec<f64>> {
                let params = m.system.params_with_squeeze(db)?;
                let tau = PulseSpec::Reflectivity(r)
                    .resolve(params.effective_decay())?
                    .tau;
                match channel_cov(&params, r, eta, noise) {
                    Ok(v) => Ok(vec![
                        r,
                        tau,
                        db,
                        logarithmic_negativity(&v)?,
                        epr_steering_m_to_c(&v)?,
                    ]),
                    // the noisy congruence is not a channel; flag the point instead of failing the sweep
                    Err(CliError::Numerical(_)) if noise > 0.0 => {
                        Ok(vec![r, tau, db, f64::NAN, f64::NAN])
                    }
                    Err(e) => Err(e),
                }
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let file = sink.write_curve(
        "sweep",
        &["R", "tau_s", "S_in_dB", "E_N", "steering_MC"],
        &rows,
    )?;
    let unphysical = rows.iter().filter(|r| r[3].is_nan()).count();
    if unphysical > 0 {
        report
            .metrics
            .insert("unphysical_points".into(), json!(unphysical));
        report.notes.push(format!(
            "{unphysical} points are unphysical after the noisy amplifier and are written as nan"
        ));
    }
    let mut per = Map::new();
    for &db in &dbs {
        let sel: Vec<&Vec<f64>> = rows.iter().filter(|r| r[2] == db).collect();
        let r: Vec<f64> = sel.iter().map(|x| x[0]).collect();
        let e: Vec<f64> = sel
            .iter()
            .map(|x| if x[3].is_nan() { 0.0 } else { x[3] })
            .collect();
        let s: Vec<f64> = sel
            .iter()
            .map(|x| if x[4].is_nan() { 0.0 } else { x[4] })
            .collect();
        per.insert(
            format!("{db}"),
            json!({
                "argmax_R_E_N": num(argmax(&r, &e)),
                "argmax_R_steering": num(argmax(&r, &s)),
                "max_E_N": num(e.iter().cloned().fold(0.0, f64::max)),
                "max_steering_MC": num(s.iter().cloned().fold(0.0, f64::max)),
            }),
        );
    }
    report
        .metrics
        .insert("by_squeeze_db".into(), Value::Object(per));
    report.metrics.insert("data".into(), json!(file));
    if eta < 1.0 || noise > 0.0 {
        report.notes.push(format!("optical mode passed through loss eta = {eta} and unit-gain amplifier noise n_A = {noise}"));
    }
    Ok(())
}

fn gain_solve(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let params = m.system.params()?;
    let rs = reflectivities(m)?;
    let rows = with_pool(ctx.jobs, || {
        rs.par_iter()
            .map(|&r| -> CliResult<Vec<f64>> {
                let sigma =
                    covariance_after_pulse(&params, PulseSpec::Reflectivity(r))?.to_sigma()?;
                let g = target_gains(&sigma)?;
                Ok(vec![r, to_db(g.g_p), to_db(g.g_f), to_db(g.g_x)])
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let file = sink.write_curve("gains", &["R", "g_p_dB", "g_F_dB", "g_x_dB"], &rows)?;
    if rows.len() == 1 {
        let r = &rows[0];
        report.metrics.insert("R".into(), num(r[0]));
        report.metrics.insert("g_p_dB".into(), num(r[1]));
        report.metrics.insert("g_F_dB".into(), num(r[2]));
        report.metrics.insert("g_x_dB".into(), num(r[3]));
    }
    report.metrics.insert("data".into(), json!(file));
    Ok(())
}

/// Runs the pipeline described by `m`; stage gains given as `xi` are solved
/// on the lossless post-pulse state.
pub fn run_pipeline(m: &Manifest) -> CliResult<(CovMatrix, PipelineSpec, PipelineOutput)> {
    let params = m.system.params()?;
    let v = covariance_after_pulse(&params, m.pulse_spec()?)?;
    let spec = m.pipeline(&v.to_sigma()?)?;
    let out = eps_pipeline(&v, &spec)?;
    Ok((v, spec, out))
}

pub fn parallel_grid(w: &PolyGaussian, spec: &GridSpec, jobs: usize) -> CliResult<Grid> {
    spec.validate()?;
    let xs = spec.x_points();
    let rows = with_pool(jobs, || {
        spec.p_points()
            .par_iter()
            .map(|&p| w.evaluate_row(p, &xs))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Grid::new(*spec, rows.concat()))
}

/// Quality figures of a conditional mechanical state.
#[derive(Clone, Debug)]
pub struct Quality {
    pub fidelity: Option<f64>,
    pub target: Option<TargetState>,
    pub displacement: Option<(f64, f64)>,
    pub delta: f64,
    pub alpha2: Option<f64>,
    pub axis: Axis,
    pub squeeze_db: Option<f64>,
    pub squeeze_method: SqueezeMethod,
    pub parity: f64,
    pub norm: f64,
}

pub fn assess(w: &PolyGaussian, target: Option<&TargetSection>) -> CliResult<Quality> {
    let auto = cat_axis(w)?;
    let resolved = match target {
        Some(t) => Some(t.resolve(|| Ok(auto))?),
        None => None,
    };
    let axis = match resolved {
        Some(Target::Best(cvngs_core::metrics::TargetFamily::Cat { axis, .. })) => axis,
        Some(Target::Fixed(TargetState::Cat { alpha, .. })) => {
            if alpha.im.abs() > alpha.re.abs() {
                Axis::PM
            } else {
                Axis::XM
            }
        }
        _ => auto,
    };
    let (fid, tstate, disp) = match resolved {
        None => (None, None, None),
        Some(Target::Fixed(t)) => (Some(fidelity(w, &t)?.value), Some(t), None),
        Some(Target::Best(f)) => {
            let b = best_fidelity(w, f)?;
            (Some(b.fidelity), Some(b.target), Some(b.displacement))
        }
    };
    let method = match target {
        Some(t) => t.squeeze_method(axis),
        None => SqueezeMethod::MinVariance,
    };
    Ok(Quality {
        fidelity: fid,
        target: tstate,
        displacement: disp,
        delta: w.wigner_negativity()?.delta,
        alpha2: cat_size(w, axis)?,
        axis,
        squeeze_db: squeezing_estimate(w, method)?,
        squeeze_method: method,
        parity: w.parity()?,
        norm: w.total()?,
    })
}

pub fn target_json(t: &TargetState) -> Value {
    match *t {
        TargetState::Cat {
            alpha,
            parity,
            squeeze_db,
        } => json!({
            "kind": "cat", "alpha_re": num(alpha.re), "alpha_im": num(alpha.im), "parity": parity, "squeeze_db": num(squeeze_db),
        }),
        TargetState::Fock { n, squeeze_db } => {
            json!({ "kind": "fock", "n": n, "squeeze_db": num(squeeze_db) })
        }
        TargetState::FourCat { alpha0, squeeze_db } => {
            json!({ "kind": "four_cat", "alpha0": num(alpha0), "squeeze_db": num(squeeze_db) })
        }
    }
}

fn method_name(m: SqueezeMethod) -> String {
    match m {
        SqueezeMethod::MinVariance => "min_variance".into(),
        SqueezeMethod::FockVariance(n) => format!("fock_variance(n={n})"),
        SqueezeMethod::LobeVariance(a) => format!("lobe_variance({a:?})"),
    }
}

pub fn quality_json(q: &Quality) -> Map<String, Value> {
    let mut o = Map::new();
    o.insert("fidelity".into(), opt(q.fidelity));
    o.insert(
        "target".into(),
        q.target.as_ref().map(target_json).unwrap_or(Value::Null),
    );
    if let Some((x, p)) = q.displacement {
        o.insert("target_displacement".into(), json!([num(x), num(p)]));
    }
    o.insert("delta".into(), num(q.delta));
    o.insert("alpha2".into(), opt(q.alpha2));
    o.insert("cat_axis".into(), json!(format!("{:?}", q.axis)));
    o.insert("squeeze_db".into(), opt(q.squeeze_db));
    o.insert(
        "squeeze_method".into(),
        json!(method_name(q.squeeze_method)),
    );
    o.insert("parity".into(), num(q.parity));
    o.insert("integral".into(), num(q.norm));
    o
}

fn stages_json(spec: &PipelineSpec, v: &CovMatrix) -> CliResult<Value> {
    let sigma = v.to_sigma()?;
    let mut cum = 1.0;
    let mut out = Vec::new();
    for s in &spec.stages {
        cum *= s.amplifier.gain;
        out.push(json!({
            "gain_db": num(s.amplifier.db()),
            "noise": num(s.amplifier.noise),
            "photons": s.photons,
            "cumulative_xi": num(xi_from_gain(&sigma, cum)?),
        }));
    }
    Ok(Value::Array(out))
}

fn write_state(
    m: &Manifest,
    ctx: &Ctx,
    sink: &mut Sink,
    report: &mut Report,
    v: &CovMatrix,
    spec: &PipelineSpec,
    out: &PipelineOutput,
) -> CliResult<Grid> {
    let q = assess(&out.state, m.target.as_ref())?;
    let grid = parallel_grid(&out.state, &m.grid_spec()?, ctx.jobs)?;
    let qm = quality_json(&q);
    sink.write_grid("wigner", &grid, qm.clone())?;
    report.metrics.extend(qm);
    report
        .metrics
        .insert("stages".into(), stages_json(spec, v)?);
    report
        .metrics
        .insert("outcome_density".into(), num(out.outcome_density));
    report.metrics.insert(
        "subtraction_weights".into(),
        json!(out
            .subtraction_weights
            .iter()
            .map(|x| num(*x))
            .collect::<Vec<_>>()),
    );
    report
        .metrics
        .insert("grid_riemann_sum".into(), num(grid.riemann_sum));
    report.metrics.insert("covariance".into(), cov_json(v));
    if grid.clipped() {
        report
            .notes
            .push("Wigner function is not negligible at the grid boundary".into());
    }
    if m.stages.iter().any(|s| s.xi.is_some()) {
        report
            .notes
            .push("gains given by xi are solved on the lossless post-pulse covariance".into());
    }
    Ok(grid)
}

fn eps(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let (v, spec, out) = run_pipeline(m)?;
    write_state(m, ctx, sink, report, &v, &spec, &out)?;
    Ok(())
}

fn imperfections(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let (v, spec, out) = run_pipeline(m)?;
    let grid = write_state(m, ctx, sink, report, &v, &spec, &out)?;
    let meas = spec.measurement;
    let closed = spec.stages.len() == 1
        && spec.stages[0].photons == 2
        && spec.nu == 1.0
        && meas.theta == 0.0
        && meas.zeta == 0.0;
    if closed {
        let lossy = if spec.eta < 1.0 {
            loss_channel_cov(&v, spec.eta)?
        } else {
            v.clone()
        };
        let sa = amplifier_map(&lossy, spec.stages[0].amplifier)?.to_sigma()?;
        let cf = imperfect_wigner_closed_form(&sa, meas.epsilon, meas.efficiency)?;
        let cg = parallel_grid(&cf, &grid.spec, ctx.jobs)?;
        let diff = grid.max_abs_diff(&cg);
        sink.write_grid("closed_form", &cg, Map::new())?;
        report
            .metrics
            .insert("closed_form_max_abs_diff".into(), num(diff));
    } else {
        report.notes.push("closed-form cross-check skipped: it covers one 2-photon stage, nu = 1 and the outcome X_C = 0".into());
    }
    report.metrics.insert("eta".into(), num(spec.eta));
    report.metrics.insert("mu".into(), num(meas.efficiency));
    report.metrics.insert("nu".into(), num(spec.nu));
    Ok(())
}

fn sup_diff(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
    (0..=2400)
        .map(|i| -12.0 + i as f64 * 0.01)
        .map(|x| (a(x) - b(x)).abs())
        .fold(0.0, f64::max)
}

fn four_cat(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let xi1 = m.four_cat.as_ref().map(|f| f.xi1).unwrap_or(0.0);
    let xi2 = four_cat_conditions(xi1);
    let params = m.system.params()?;
    let v = covariance_after_pulse(&params, m.pulse_spec()?)?;
    let sigma = v.to_sigma()?;
    let out = four_cat_pipeline(&v, xi1, m.pipeline_measurement()?)?;
    let spec = PipelineSpec {
        stages: four_cat_stages(&sigma, xi1)?,
        measurement: m.pipeline_measurement()?,
        eta: 1.0,
        nu: 1.0,
    };
    let mut mm = m.clone();
    if mm.target.is_none() {
        mm.target = Some(TargetSection::FourCat {
            alpha0: 1.6,
            squeeze_db: 0.0,
        });
    }
    write_state(&mm, ctx, sink, report, &v, &spec, &out)?;

    let wf = four_cat_wavefunction(sigma.s(1, 1), xi1, xi2)?;
    let ideal = match mm
        .target
        .as_ref()
        .and_then(|t| t.resolve(|| Ok(Axis::XM)).ok())
    {
        Some(Target::Fixed(t)) => t,
        _ => TargetState::FourCat {
            alpha0: 1.6,
            squeeze_db: 0.0,
        },
    };
    let tw = ideal.wavefunction()?;
    let h = 0.01;
    let xs: Vec<f64> = (0..=2400).map(|i| -12.0 + i as f64 * h).collect();
    let ov: Complex64 = xs
        .iter()
        .map(|&x| tw.eval(x).conj() * wf.eval(x))
        .sum::<Complex64>()
        * h;
    // align the global phase of the ideal state with the real pipeline wave function
    let norm = ov.norm_sqr().sqrt();
    let phase = if norm > 0.0 {
        ov / norm
    } else {
        Complex64::new(1.0, 0.0)
    };
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .step_by(5)
        .map(|&x| vec![x, wf.eval(x), (tw.eval(x) * phase).re])
        .collect();
    let file = sink.write_curve("wavefunction", &["X_M", "psi_pipeline", "psi_ideal"], &rows)?;
    let marginal = out.state.marginal(&[Axis::XM])?;
    let prow: Vec<Vec<f64>> = xs
        .iter()
        .step_by(5)
        .map(|&x| vec![x, marginal.eval(&[x])])
        .collect();
    let pfile = sink.write_curve("marginal", &["X_M", "P_XM"], &prow)?;
    report.metrics.insert("xi1".into(), num(xi1));
    report.metrics.insert("xi2".into(), num(xi2));
    report
        .metrics
        .insert("wavefunction_overlap_sq".into(), num(ov.norm_sqr()));
    if xi1 == 0.0 || xi1 == 1.0 {
        let other =
            four_cat_wavefunction(sigma.s(1, 1), 1.0 - xi1, four_cat_conditions(1.0 - xi1))?;
        let d1 = sup_diff(|x| wf.eval(x), |x| other.eval(x));
        let d2 = sup_diff(|x| wf.eval(x), |x| -other.eval(x));
        report
            .metrics
            .insert("other_branch_sup_diff".into(), num(d1.min(d2)));
    }
    report
        .metrics
        .insert("wavefunction_data".into(), json!(file));
    report.metrics.insert("marginal_data".into(), json!(pfile));
    Ok(())
}

fn oracle(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let params = m.system.params()?;
    let pulse = m.pulse_spec()?;
    let v = covariance_after_pulse(&params, pulse)?;
    let vs = scattering_covariance(&params, pulse)?;
    let cov_diff = max_entry_diff(&v, &vs);
    report
        .metrics
        .insert("covariance_vs_scattering_max_diff".into(), num(cov_diff));
    if params.gamma > 0.0 || params.n_m > 0.0 {
        report.notes.push("Fock-basis state evolution needs gamma = 0 and n_m = 0; only the covariance route was compared".into());
        return Ok(());
    }
    let cfg = FockConfig::new(m.oracle.as_ref().map(|o| o.truncation).unwrap_or(40))?;
    let two = TwoModeState::after_pulse(&params, pulse, &cfg)?;
    let fock_cov = two.covariance()?;
    report.metrics.insert(
        "fock_covariance_max_diff".into(),
        num(max_entry_diff(&v, &fock_cov)),
    );
    report
        .metrics
        .insert("E_N_gaussian".into(), num(logarithmic_negativity(&v)?));
    report
        .metrics
        .insert("E_N_fock".into(), num(two.log_negativity()?));

    let spec = m.pipeline(&v.to_sigma()?)?;
    let ps = eps_pipeline(&v, &spec)?;
    let fs = fock_pipeline(&params, pulse, &spec, &cfg)?;
    let gs = m.grid_spec()?;
    let pg = parallel_grid(&ps.state, &gs, ctx.jobs)?;
    let xs = gs.x_points();
    let rows = with_pool(ctx.jobs, || {
        gs.p_points()
            .par_iter()
            .map(|&p| xs.iter().map(|&x| fs.wigner(x, p)).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    });
    let fg = Grid::new(gs, rows.concat());
    let diff = pg.max_abs_diff(&fg);
    sink.write_grid("phase_space", &pg, Map::new())?;
    sink.write_grid("fock", &fg, Map::new())?;

    let mx = ps.state.moment(&[(Axis::XM, 1)])?;
    let mp = ps.state.moment(&[(Axis::PM, 1)])?;
    let vx = ps.state.moment(&[(Axis::XM, 2)])? - mx * mx;
    let vp = ps.state.moment(&[(Axis::PM, 2)])? - mp * mp;
    let (fx, fp, fvx, fvp) = fs.quadrature_moments();
    let mom = [mx - fx, mp - fp, vx - fvx, vp - fvp]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max);
    report
        .metrics
        .insert("truncation".into(), json!(cfg.truncation));
    report.metrics.insert("grid_max_abs_diff".into(), num(diff));
    report.metrics.insert("moment_max_diff".into(), num(mom));
    report
        .metrics
        .insert("mean_phonon_number".into(), num(fs.mean_phonon_number()));
    Ok(())
}

fn max_entry_diff(a: &CovMatrix, b: &CovMatrix) -> f64 {
    a.row_major()
        .iter()
        .zip(b.row_major().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Manifest for a single-point pipeline with the usual defaults.
pub fn pipeline_manifest(command: Command, r: f64) -> Manifest {
    let mut m = Manifest::new(command);
    m.pulse = Some(PulseSection::reflectivity(r));
    m
}

pub fn require(cond: bool, msg: &str) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(msg))
    }
}
