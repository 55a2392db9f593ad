use super::config::{ReferenceConfig, Resolved, RunConfig, Seed};
use super::table::{write_atomic, Metadata, ResultTable, Value};
use crate::crystal::{
    critical_frequency, find_equilibrium, gradient, hessian, stationary_point, zigzag_guess, Equilibrium,
    IonConfiguration,
};
use crate::error::{Error, Result};
use crate::fluctuations::{
    drift_diffusion, frequency_grid, has_fano_line, log_negativity, max_relative_difference, normal_modes,
    output_spectrum_analytic, output_spectrum_numeric, resonances, sideband_shapes, steady_state, LinearizedDynamics,
    NormalModes, Partition,
};
use crate::params::{cooperativity, dispersive_check, Model};
use crate::structural::{
    bistable_window, hysteresis_sweep, instability_threshold, reference_intensity, soft_mode_potential_finite,
    SweepDirection, SweepResult, UniformSoftMode,
};
use nalgebra::SymmetricEigen;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Equilibrium,
    Sweep,
    Softmode,
    Spectrum,
    Negativity,
    Modes,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Sweep => "sweep",
            Command::Softmode => "softmode",
            Command::Spectrum => "spectrum",
            Command::Negativity => "negativity",
            Command::Modes => "modes",
        }
    }
}

/// 0 success, 2 bad configuration, 3 solver failure, 4 no physical steady state.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter { .. }
        | Error::SingularDetuning
        | Error::ZeroCooperativity
        | Error::BelowCritical(_)
        | Error::Dimension(_) => 2,
        Error::NoConvergence { .. } | Error::Saddle { .. } | Error::BracketFailure(_) | Error::CoincidentIons(..) => 3,
        Error::NoSteadyState { .. } | Error::UnstableConfiguration { .. } | Error::Unphysical { .. } => 4,
        Error::Io(_) => 1,
    }
}

/// Writes `<out>/<command>.error.txt` holding the error and the config.
pub fn write_diagnostic(out: &Path, command: Command, config: &RunConfig, err: &Error) -> Result<PathBuf> {
    let path = out.join(format!("{}.error.txt", command.name()));
    let text = format!(
        "# command: {}\n# exit_code: {}\n# error: {err}\n# debug: {err:?}\n# config:\n{}",
        command.name(),
        exit_code(err),
        config.to_toml()
    );
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Runs `command` and writes its tables into `config.out_dir`.
pub fn run(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = PathBuf::from(&config.out_dir);
    let meta = Metadata::new(command.name(), config.to_toml());
    let tables = match command {
        Command::Equilibrium => equilibrium(config)?,
        Command::Sweep => sweep(config)?,
        Command::Softmode => softmode(config)?,
        Command::Spectrum => spectrum(config)?,
        Command::Negativity => negativity(config)?,
        Command::Modes => modes(config)?,
    };
    tables.iter().map(|t| t.write(&out, &meta)).collect()
}

fn seed_configuration(config: &RunConfig, r: &Resolved) -> IonConfiguration {
    match config.equilibrium.seed {
        Seed::Linear => r.chain.clone(),
        Seed::Zigzag => zigzag_guess(&r.model, &r.chain),
    }
}

fn relax(config: &RunConfig, r: &Resolved) -> Result<Equilibrium> {
    find_equilibrium(&r.model, &seed_configuration(config, r), &config.equilibrium_options())
}

fn summary_table(name: &str) -> ResultTable {
    ResultTable::new(name, &[("quantity", ""), ("value", ""), ("unit", "")])
}

fn row(t: &mut ResultTable, q: &str, v: impl Into<Value>, unit: &str) {
    t.push(vec![q.into(), v.into(), unit.into()]);
}

fn equilibrium(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let r = config.resolve()?;
    let eq = relax(config, &r)?;
    let length_um = r.params.units().length * 1e6;
    let mut pos = ResultTable::new(
        "equilibrium_positions",
        &[("ion", ""), ("x", "l"), ("y", "l"), ("x_um", "um"), ("y_um", "um")],
    );
    for (j, p) in eq.config.positions().iter().enumerate() {
        pos.push(vec![j.into(), p[0].into(), p[1].into(), (p[0] * length_um).into(), (p[1] * length_um).into()]);
    }
    let eig = SymmetricEigen::new(hessian(&r.model, &eq.config)?);
    let mut curv: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    curv.sort_by(f64::total_cmp);
    let mut curvatures = ResultTable::new(
        "equilibrium_hessian",
        &[("index", ""), ("eigenvalue", "m omega_a^2"), ("frequency", "omega_a")],
    );
    for (i, &c) in curv.iter().enumerate() {
        curvatures.push(vec![i.into(), c.into(), c.max(0.0).sqrt().into()]);
    }
    let neff = crate::crystal::n_eff(&r.model, &eq.config);
    let n_bar = eq.mean_field.n_bar;
    let mut s = summary_table("equilibrium_summary");
    row(&mut s, "structure", eq.config.structure().to_string(), "");
    row(&mut s, "n_ions", r.model.n_ions, "");
    row(&mut s, "pump_power", r.model.pump_power(), "");
    row(&mut s, "energy", eq.energy, "m omega_a^2 l^2");
    row(&mut s, "grad_inf", eq.grad_inf, "m omega_a^2 l");
    row(&mut s, "lowest_eigenvalue", eq.lowest_eigenvalue, "m omega_a^2");
    row(&mut s, "iterations", eq.iterations, "");
    row(&mut s, "escapes", eq.escapes, "");
    row(&mut s, "buckling", eq.config.buckling() * length_um, "um");
    row(&mut s, "central_spacing", eq.config.central_spacing() * length_um, "um");
    row(&mut s, "length_unit", length_um, "um");
    row(&mut s, "n_eff", neff, "");
    row(&mut s, "cooperativity", cooperativity(r.model.g0, r.model.kappa, r.model.delta0, neff)?, "");
    row(&mut s, "n_bar", n_bar, "");
    row(&mut s, "output_intensity", eq.mean_field.output_intensity, "omega_a");
    row(&mut s, "dispersive_ratio", dispersive_check(&r.model, n_bar).ratio, "");
    Ok(vec![pos, curvatures, s])
}

fn branch_table(name: &str, result: &SweepResult, i1: f64) -> ResultTable {
    let mut t =
        ResultTable::new(name, &[("P", ""), ("I_out/I_1", ""), ("label", ""), ("buckling", "l"), ("message", "")]);
    for p in &result.points {
        match &p.outcome {
            Ok(eq) => t.push(vec![
                p.power.into(),
                (eq.mean_field.output_intensity / i1).into(),
                eq.config.structure().to_string().into(),
                eq.config.buckling().into(),
                "".into(),
            ]),
            Err(msg) => {
                t.push(vec![p.power.into(), f64::NAN.into(), "failed".into(), f64::NAN.into(), msg.as_str().into()])
            }
        }
    }
    t
}

fn sweep(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let r = config.resolve()?;
    let opts = config.sweep_options();
    let i1 = reference_intensity(&r.model, &r.chain)?;
    let up = hysteresis_sweep(&r.model, &seed_configuration(config, &r), SweepDirection::Up, &opts)?;
    // the down branch starts from the structure the up branch ended in
    let top = up
        .points
        .iter()
        .rev()
        .find_map(|p| p.outcome.as_ref().ok().map(|e| e.config.clone()))
        .unwrap_or_else(|| zigzag_guess(&r.model, &r.chain));
    let down = hysteresis_sweep(&r.model, &top, SweepDirection::Down, &opts)?;
    let mut s = summary_table("sweep_summary");
    row(&mut s, "reference_intensity", i1, "omega_a");
    let failures = up.points.iter().chain(&down.points).filter(|p| p.outcome.is_err()).count();
    row(&mut s, "failed_points", failures, "");
    match bistable_window(&up, &down) {
        Some(w) => {
            row(&mut s, "bistable", true, "");
            row(&mut s, "window_lower", w.lower, "");
            row(&mut s, "window_upper", w.upper, "");
            row(&mut s, "window_points", w.powers.len(), "");
        }
        None => row(&mut s, "bistable", false, ""),
    }
    Ok(vec![branch_table("sweep_up", &up, i1), branch_table("sweep_down", &down, i1), s])
}

fn softmode(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let r = config.resolve()?;
    let sm = &config.softmode;
    let half = sm.half_range_k / r.model.k;
    let grid = frequency_grid(-half, half, sm.points);
    let mut curves = Vec::with_capacity(sm.powers.len());
    for &p in &sm.powers {
        let model = r.model.clone().with_pump_power(p);
        // the undisplaced chain is the linear stationary point, stable or not
        let base = stationary_point(&model, &r.chain, &config.equilibrium_options())?;
        curves.push((p, soft_mode_potential_finite(&model, &base.config, &grid)?));
    }
    let mut names: Vec<(String, String)> = vec![("displacement".into(), "l".into())];
    names.extend(curves.iter().map(|(p, _)| (format!("V_P{p}"), "m omega_a^2 l^2".into())));
    let cols: Vec<(&str, &str)> = names.iter().map(|(n, u)| (n.as_str(), u.as_str())).collect();
    let mut table = ResultTable::new("softmode_curves", &cols);
    for (i, &d) in grid.iter().enumerate() {
        let mut row = vec![Value::from(d)];
        row.extend(curves.iter().map(|(_, c)| Value::from(c.energy[i])));
        table.push(row);
    }
    let mut minima =
        ResultTable::new("softmode_minima", &[("P", ""), ("minima", ""), ("reference_ion", ""), ("positions", "l")]);
    for (p, c) in &curves {
        let list = c.minima.iter().map(|m| format!("{m:e}")).collect::<Vec<_>>().join(",");
        minima.push(vec![(*p).into(), c.minima_count().into(), c.reference_ion.into(), list.into()]);
    }
    let mut th = summary_table("softmode_threshold");
    let free = Model { eta: 0.0, ..r.model.clone() };
    let outcome = critical_frequency(&free)
        .and_then(|beta_c| UniformSoftMode::from_model(&r.model, beta_c))
        .and_then(|m| Ok(m.with_cooperativity(cooperativity(r.model.g0, r.model.kappa, r.model.delta0, r.n_eff)?)))
        .and_then(|m| Ok((m, instability_threshold(&m)?)));
    match outcome {
        Ok((m, t)) => {
            let eta_ref_sq = r.model.eta_reference_sq();
            row(&mut th, "omega_s", m.omega_s, "omega_a");
            row(&mut th, "uniform_cooperativity", m.cooperativity, "");
            row(&mut th, "eta_sq_analytic", t.eta_sq_analytic, "omega_a^2");
            row(&mut th, "eta_sq_numeric", t.eta_sq_numeric, "omega_a^2");
            row(&mut th, "power_analytic", t.eta_sq_analytic / eta_ref_sq, "");
            row(&mut th, "power_numeric", t.eta_sq_numeric / eta_ref_sq, "");
            row(&mut th, "relative_disagreement", t.relative_disagreement(), "");
        }
        Err(e) => row(&mut th, "unavailable", e.to_string(), ""),
    }
    Ok(vec![table, minima, th])
}

/// The model whose fluctuations are studied and the configuration it is
/// linearized about.
#[derive(Debug, Clone)]
pub struct LinearizationPoint {
    pub resolved: Resolved,
    pub equilibrium: Equilibrium,
    /// `|grad V_tot|_inf` of the run's model at the linearization configuration.
    pub residual_force: f64,
    pub modes: NormalModes,
    pub dynamics: LinearizedDynamics,
}

/// Relaxes the crystal (with `[fluctuations.reference]` parameters when
/// given), then builds the normal modes and Langevin matrices of the run's
/// own parameters about that configuration.
pub fn linearization_point(config: &RunConfig) -> Result<LinearizationPoint> {
    let resolved = config.resolve()?;
    let reference: Option<&ReferenceConfig> = config.fluctuations.reference.as_ref();
    let equilibrium = match reference {
        Some(rc) => relax(config, &config.resolve_with(Some(rc))?)?,
        None => relax(config, &resolved)?,
    };
    let model = &resolved.model;
    let residual_force = gradient(model, &equilibrium.config)?.iter().fold(0.0, |m: f64, g| m.max(g.abs()));
    let modes = normal_modes(model, &equilibrium.config)?.truncated(config.fluctuations.mode_floor);
    let dynamics = drift_diffusion(model, &modes.mean_field, &modes);
    Ok(LinearizationPoint { resolved, equilibrium, residual_force, modes, dynamics })
}

fn point_rows(s: &mut ResultTable, lp: &LinearizationPoint) {
    row(s, "structure", lp.equilibrium.config.structure().to_string(), "");
    row(s, "residual_force", lp.residual_force, "m omega_a^2 l");
    row(s, "retained_modes", lp.modes.len(), "");
    row(s, "n_bar", lp.modes.mean_field.n_bar, "");
    row(s, "delta_eff", lp.dynamics.delta_eff, "omega_a");
}

fn mode_table(name: &str, lp: &LinearizationPoint) -> ResultTable {
    let mut t = ResultTable::new(
        name,
        &[
            ("mode", ""),
            ("omega_n", "omega_a"),
            ("c_n", "omega_a"),
            ("B_n", "l"),
            ("lamb_dicke", ""),
            ("transverse_weight", ""),
            ("bath_occupation", ""),
            ("resonance", "omega_a"),
            ("linewidth", "omega_a"),
        ],
    );
    let res = resonances(&lp.dynamics);
    for m in 0..lp.modes.len() {
        let (f, w) =
            res.iter().find(|r| r.mode == m).map(|r| (r.frequency, r.linewidth)).unwrap_or((f64::NAN, f64::NAN));
        t.push(vec![
            lp.modes.indices[m].into(),
            lp.modes.frequencies[m].into(),
            lp.modes.couplings[m].into(),
            lp.modes.zero_point[m].into(),
            lp.modes.lamb_dicke(&lp.resolved.model, m).into(),
            lp.modes.transverse_weight(m).into(),
            lp.dynamics.occupations[m].into(),
            f.into(),
            w.into(),
        ]);
    }
    t
}

fn spectrum(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let lp = linearization_point(config)?;
    let sc = &config.spectrum;
    let nu = frequency_grid(sc.nu_min, sc.nu_max, sc.points);
    let numeric = output_spectrum_numeric(&lp.dynamics, &nu)?;
    let analytic = output_spectrum_analytic(&lp.resolved.model, &lp.modes.mean_field, &lp.modes, &nu);
    let mut t = ResultTable::new(
        "spectrum",
        &[("nu", "omega_a"), ("S_analytic", "1/omega_a"), ("S_numeric", "1/omega_a"), ("rel_diff", "")],
    );
    for i in 0..nu.len() {
        let rel = max_relative_difference(&analytic[i..=i], &numeric[i..=i]);
        t.push(vec![nu[i].into(), analytic[i].into(), numeric[i].into(), rel.into()]);
    }
    let shapes = sideband_shapes(&lp.dynamics);
    let mut lines = ResultTable::new(
        "spectrum_lines",
        &[
            ("mode", ""),
            ("centre", "omega_a"),
            ("half_window", "omega_a"),
            ("extrema", ""),
            ("contrast", ""),
            ("asymmetry", ""),
            ("peak", "1/omega_a"),
            ("visible", ""),
            ("fano", ""),
        ],
    );
    for l in &shapes {
        lines.push(vec![
            lp.modes.indices[l.mode].into(),
            l.centre.into(),
            l.half_window.into(),
            l.extrema.into(),
            l.contrast.into(),
            l.asymmetry.into(),
            l.peak.into(),
            l.visible.into(),
            l.is_fano().into(),
        ]);
    }
    let mut s = summary_table("spectrum_summary");
    point_rows(&mut s, &lp);
    row(&mut s, "max_relative_difference", max_relative_difference(&analytic, &numeric), "");
    row(&mut s, "fano_line", has_fano_line(&shapes), "");
    Ok(vec![t, mode_table("spectrum_modes", &lp), lines, s])
}

fn negativity(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let lp = linearization_point(config)?;
    let nm = lp.modes.len();
    let partition = match &config.negativity.phonons {
        Some(list) => Partition { first: vec![0], second: list.clone() },
        None => Partition::cavity_vs_phonons(nm),
    };
    let ss = steady_state(lp.dynamics.clone())?;
    let en = log_negativity(&ss.covariance, &partition)?;
    let target = config.negativity.target;
    let mut t = ResultTable::new(
        "negativity",
        &[
            ("E_N", ""),
            ("target", ""),
            ("deviation", ""),
            ("uncertainty_margin", ""),
            ("lyapunov_residual", ""),
            ("phonons", ""),
        ],
    );
    let phonons = partition.second.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
    t.push(vec![
        en.value.into(),
        target.into(),
        (en.value - target).into(),
        ss.uncertainty_margin.into(),
        ss.residual.into(),
        phonons.into(),
    ]);
    let mut sym = ResultTable::new("negativity_symplectic", &[("index", ""), ("nu_tilde", "")]);
    for (i, &v) in en.symplectic.iter().enumerate() {
        sym.push(vec![i.into(), v.into()]);
    }
    let mut names = vec![("row".to_string(), String::new())];
    names.push(("x_c".into(), String::new()));
    names.push(("p_c".into(), String::new()));
    for m in 1..=nm {
        names.push((format!("q_{m}"), String::new()));
        names.push((format!("p_{m}"), String::new()));
    }
    let cols: Vec<(&str, &str)> = names.iter().map(|(n, u)| (n.as_str(), u.as_str())).collect();
    let mut cov = ResultTable::new("negativity_covariance", &cols);
    for i in 0..ss.covariance.nrows() {
        let mut row = vec![Value::from(names[i + 1].0.as_str())];
        row.extend((0..ss.covariance.ncols()).map(|j| Value::from(ss.covariance[(i, j)])));
        cov.push(row);
    }
    let mut occ = ResultTable::new("negativity_occupations", &[("mode", ""), ("mean_number", "")]);
    for m in 0..=nm {
        occ.push(vec![m.into(), ss.occupation(m).into()]);
    }
    let mut s = summary_table("negativity_summary");
    point_rows(&mut s, &lp);
    Ok(vec![t, sym, cov, occ, s])
}

fn modes(config: &RunConfig) -> Result<Vec<ResultTable>> {
    let lp = linearization_point(config)?;
    let n = lp.equilibrium.config.len();
    let mut names = vec![("ion".to_string(), String::new()), ("axis".to_string(), String::new())];
    names.extend(lp.modes.indices.iter().map(|i| (format!("M_{i}"), String::new())));
    let cols: Vec<(&str, &str)> = names.iter().map(|(n, u)| (n.as_str(), u.as_str())).collect();
    let mut vectors = ResultTable::new("modes_vectors", &cols);
    for r in 0..2 * n {
        let mut row = vec![Value::from(r % n), Value::from(if r < n { "x" } else { "y" })];
        row.extend((0..lp.modes.len()).map(|m| Value::from(lp.modes.vectors[(r, m)])));
        vectors.push(row);
    }
    let mut s = summary_table("modes_summary");
    point_rows(&mut s, &lp);
    row(&mut s, "orthogonality_defect", lp.modes.orthogonality_defect(), "");
    Ok(vec![mode_table("modes", &lp), vectors, s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::edge_coupled_trio;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::NoConvergence { iterations: 1, grad_inf: 1.0 }), 3);
        assert_eq!(exit_code(&Error::NoSteadyState { max_real: 0.1 }), 4);
        assert_eq!(exit_code(&Error::Unphysical { min_eigenvalue: -1.0 }), 4);
    }

    #[test]
    fn single_ion_sits_at_origin() {
        let mut c = crate::cli::config::long_chain();
        c.system.n_ions = 1;
        let t = equilibrium(&c).unwrap();
        assert_eq!(t[0].rows.len(), 1);
        for v in &t[0].rows[0][1..] {
            let Value::Num(x) = v else { panic!() };
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn dark_cavity_has_no_entanglement() {
        let mut c = edge_coupled_trio(3.0, 0.0);
        c.equilibrium.seed = Seed::Linear;
        let t = negativity(&c).unwrap();
        assert_eq!(t[0].rows[0][0], Value::Num(0.0));
    }

    #[test]
    fn sweep_single_point() {
        let mut c = edge_coupled_trio(0.5, 0.0);
        c.sweep.steps = 1;
        let t = sweep(&c).unwrap();
        assert_eq!(t[0].rows.len(), 1);
        assert_eq!(t[1].rows.len(), 1);
    }
}
