//! Evaluate a config into output tables.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method, SweepVar};
use super::output::{OutputFile, Table};
use crate::born::{asymmetry_ratio, born_sidebands};
use crate::error::{Error, Result};
use crate::interferometer::{
    channel_amplitudes_from_triplets, fringe_amplitude, optimize_fringe, optimize_fringe_equal,
    outer_depth_for_optimum, plan_from_physics,
};
use crate::mirror::{classical_bounce_ode, OdeParams};
use crate::semiclassical::{beta, max_velocity_change, sideband_amplitudes, validity_report};
use crate::tdse::{predicted_spectrum, run_bounce, BounceRun, PacketParams, DEFAULT_PADDING};
use crate::units::{bounce_height, ScaledState};

/// Errors confined to one sweep point; the row is filled with NaN.
fn is_local(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::ClosedChannel { .. } | Error::MissingSideband(_))
}

fn tag(n: i32) -> String {
    match n.signum() {
        -1 => format!("m{}", -n),
        1 => format!("p{n}"),
        _ => "0".into(),
    }
}

/// Row for one point plus any rows for a secondary table.
type PointResult = Result<(Vec<f64>, Vec<Vec<f64>>)>;

fn collect(
    table: &mut Table,
    extra: Option<&mut Table>,
    var: SweepVar,
    points: &[ExperimentConfig],
    results: Vec<PointResult>,
) -> Result<()> {
    let mut extra = extra;
    for (c, r) in points.iter().zip(results) {
        let x = c.value(var);
        match r {
            Ok((row, more)) => {
                let mut full = vec![x];
                full.extend(row);
                table.push(full);
                if let Some(t) = extra.as_deref_mut() {
                    more.into_iter().for_each(|r| t.push(r));
                }
            }
            Err(e) if is_local(&e) => {
                let mut full = vec![x];
                full.resize(table.columns.len(), f64::NAN);
                table.push(full);
                table.notes.push(format!("{} = {x}: {e}", var.key()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn axis_columns(var: SweepVar, rest: Vec<String>) -> Table {
    let mut cols = vec![var.key().to_string()];
    cols.extend(rest);
    Table::new(cols)
}

fn born_point(c: &ExperimentConfig) -> PointResult {
    let b = born_sidebands(c.p_i, c.q, c.epsilon)?;
    let asym = match asymmetry_ratio(c.p_i, c.q) {
        Ok(a) => (a.exact, a.approx),
        Err(Error::ClosedChannel { .. }) => (f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    let row = vec![
        b.p_plus,
        b.p_minus.unwrap_or(f64::NAN),
        b.w_plus,
        b.w_minus.unwrap_or(f64::NAN),
        b.flux_plus,
        b.flux_minus.unwrap_or(f64::NAN),
        asym.0,
        asym.1,
        if b.perturbative { 1.0 } else { 0.0 },
    ];
    Ok((row, Vec::new()))
}

fn born_table(c: &ExperimentConfig, points: &[ExperimentConfig], var: SweepVar) -> Result<Table> {
    let cols = [
        "p_plus", "p_minus", "w_plus", "w_minus", "born_plus", "born_minus", "asymmetry_exact",
        "asymmetry_approx", "perturbative",
    ];
    let mut t = axis_columns(var, cols.iter().map(|s| s.to_string()).collect());
    let results = points.par_iter().map(born_point).collect();
    collect(&mut t, None, var, points, results)?;
    t.notes.insert(0, format!("born_plus, born_minus = W P_i/P_f; epsilon = {}", c.epsilon));
    Ok(t)
}

fn semiclassical_point(c: &ExperimentConfig) -> PointResult {
    let b = c.bounce();
    let mirror = b.mirror()?;
    let state = ScaledState::new(c.p_i, c.q)?;
    let sp = sideband_amplitudes(&state, &mirror, None)?;
    let mut row = vec![sp.u];
    for &n in &c.orders {
        let a = sp.amplitude(n).unwrap_or_default();
        row.push(a.norm_sqr());
        row.push(a.arg());
    }
    let valid = validity_report(&state, &mirror)?.all_satisfied();
    row.push(max_velocity_change(&state, &mirror)?.relative);
    row.push(if valid { 1.0 } else { 0.0 });
    Ok((row, Vec::new()))
}

fn semiclassical_table(c: &ExperimentConfig, points: &[ExperimentConfig], var: SweepVar) -> Result<Table> {
    let mut cols = vec!["u".to_string()];
    for &n in &c.orders {
        cols.push(format!("weight_{}", tag(n)));
        cols.push(format!("phase_{}", tag(n)));
    }
    cols.push("dv_max_rel".into());
    cols.push("valid".into());
    let mut t = axis_columns(var, cols);
    let results = points.par_iter().map(semiclassical_point).collect();
    collect(&mut t, None, var, points, results)?;
    Ok(t)
}

fn tdse_row(c: &ExperimentConfig, run: &BounceRun, reference: &BounceRun) -> Result<Vec<f64>> {
    let table = run.sidebands(reference, &c.orders)?;
    let mut row = Vec::new();
    for &n in &c.orders {
        let m = table.get(n).ok_or(Error::MissingSideband(n))?;
        row.push(m.height);
        row.push(m.weight(c.p_i));
        row.push(m.amplitude(c.p_i).arg());
    }
    row.push(run.report.norm_drift());
    row.push(run.report.lost_fraction);
    row.push(run.potential_fraction);
    row.push(run.bounce_phase);
    Ok(row)
}

/// `p`, TDSE density over the reference peak, and the semiclassical
/// prediction, around the carrier.
fn spectrum_rows(c: &ExperimentConfig, run: &BounceRun, reference: &BounceRun) -> Result<Vec<Vec<f64>>> {
    let mirror = run.mirror;
    let state = ScaledState::new(c.p_i, c.q)?;
    let sp = sideband_amplitudes(&state, &mirror, None)?;
    let reach = c.orders.iter().map(|n| n.abs()).max().unwrap_or(1).max(sp.u.ceil() as i32 + 3);
    let lo = (c.p_i - (reach as f64 + 1.0) * c.q).max(0.0);
    let hi = c.p_i + (reach as f64 + 1.0) * c.q;
    let norm = reference.spectrum(DEFAULT_PADDING)?.max_density();
    let measured = run.spectrum(DEFAULT_PADDING)?.window(lo, hi);
    let packet = PacketParams {
        p_i: c.p_i,
        dp_i: c.bounce().dp_i(),
    };
    let predicted = predicted_spectrum(&packet, &sp, c.epsilon, &measured.p)?;
    let rows = measured
        .p
        .iter()
        .zip(measured.density())
        .zip(predicted.spectrum.density())
        .map(|((&p, d), e)| vec![p, d / norm, e])
        .collect();
    Ok(rows)
}

fn tdse_tables(c: &ExperimentConfig, points: &[ExperimentConfig], var: SweepVar) -> Result<Vec<OutputFile>> {
    let mut cols = Vec::new();
    for &n in &c.orders {
        cols.push(format!("height_{}", tag(n)));
        cols.push(format!("weight_{}", tag(n)));
        cols.push(format!("phase_{}", tag(n)));
    }
    for s in ["norm_drift", "lost_fraction", "potential_fraction", "bounce_phase"] {
        cols.push(s.into());
    }
    let mut t = axis_columns(var, cols);
    let mut spec = Table::new(["p", "tdse", "semiclassical"]);

    // the unmodulated run does not depend on q, epsilon or phi
    let shared = if c.sweep.is_some() && matches!(var, SweepVar::Q | SweepVar::Epsilon | SweepVar::Phi) {
        Some(run_bounce(&points[0].bounce().reference())?)
    } else {
        None
    };
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|p| {
            let b = p.bounce();
            let own;
            let (reference, run) = match &shared {
                Some(r) => (r, run_bounce(&b)?),
                None => {
                    let (r, m) = rayon::join(|| run_bounce(&b.reference()), || run_bounce(&b));
                    own = r?;
                    (&own, m?)
                }
            };
            let row = tdse_row(p, &run, reference)?;
            let extra = if p.spectrum { spectrum_rows(p, &run, reference)? } else { Vec::new() };
            Ok((row, extra))
        })
        .collect();
    collect(&mut t, Some(&mut spec), var, points, results)?;
    t.notes.insert(0, "height = weight p_n/p_i, the peak of |psi(p)|^2 over the reference peak".into());
    let mut files = vec![OutputFile::main(t)];
    if c.spectrum {
        spec.notes.push("tdse: |psi(p)|^2 over the unmodulated peak; semiclassical: Bessel sum over the incident Gaussian".into());
        files.push(OutputFile::named("spectrum", spec));
    }
    Ok(files)
}

fn classical_point(c: &ExperimentConfig, var: SweepVar) -> PointResult {
    let mirror = c.bounce().mirror()?;
    let params = OdeParams::default();
    let n = c.phases;
    let mut a = 0.0;
    let mut b = 0.0;
    let mut extra = Vec::with_capacity(n);
    for k in 0..n {
        let phase = 2.0 * PI * k as f64 / n as f64;
        let kick = classical_bounce_ode(c.p_i, &mirror, phase, &params)?;
        let y = kick.relative_energy_change();
        a += y * phase.cos();
        b += y * phase.sin();
        extra.push(vec![c.value(var), phase, y, kick.relative_velocity_change(), kick.phase]);
    }
    let scale = if n > 1 { 2.0 / n as f64 } else { 1.0 };
    let predicted = 2.0 * c.epsilon * c.q * beta(c.q);
    let cos_coeff = a * scale;
    Ok((vec![cos_coeff, b * scale, predicted, cos_coeff / predicted], extra))
}

fn classical_tables(points: &[ExperimentConfig], var: SweepVar) -> Result<Vec<OutputFile>> {
    let mut t = axis_columns(var, ["cos_coeff", "sin_coeff", "predicted", "ratio"].map(String::from).to_vec());
    let mut phases = Table::new([var.key(), "phase", "de_rel", "dv_rel", "turning_phase"]);
    let results = points.par_iter().map(|p| classical_point(p, var)).collect();
    collect(&mut t, Some(&mut phases), var, points, results)?;
    t.notes.insert(0, "dE/E fitted to cos_coeff cos(phase) + sin_coeff sin(phase); predicted = 2 eps Q beta(Q)".into());
    Ok(vec![OutputFile::main(t), OutputFile::named("phases", phases)])
}

fn interferometer_tables(c: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let plan = plan_from_physics(c.p_i, c.q, c.bounce_epsilon)?;
    let [u1, u2, u3] = plan.u;
    let triplets = plan.bessel_triplets();
    let mut t = Table::new(["theta", "p_ei", "p_ei_plus", "fringe", "fringe_closed_form"]);
    let steps = c.theta_steps;
    for k in 0..steps {
        let theta = 2.0 * PI * k as f64 / (steps - 1) as f64;
        let mut p = plan.clone();
        p.phi = [theta, 0.0, 0.0];
        let ch = channel_amplitudes_from_triplets(&p, &triplets);
        t.push(vec![theta, ch.probability_ei(), ch.probability_ei_plus(), ch.fringe, fringe_amplitude(u1, u2, u3, theta)]);
    }
    t.notes.extend(plan.warnings.iter().cloned());

    let opt = optimize_fringe();
    let eq = optimize_fringe_equal();
    let mut s = Table::new([
        "u1", "u2", "u3", "f_max", "opt_u1", "opt_u2", "opt_u3", "opt_f_max", "equal_u", "equal_f_max",
        "outer_epsilon_for_optimum",
    ]);
    s.push(vec![
        u1,
        u2,
        u3,
        fringe_amplitude(u1, u2, u3, 0.0).abs(),
        opt.u1,
        opt.u2,
        opt.u3,
        opt.f_max,
        eq.u1,
        eq.f_max,
        outer_depth_for_optimum(c.bounce_epsilon[1]),
    ]);
    Ok(vec![OutputFile::main(t), OutputFile::named("summary", s)])
}

fn units_point(c: &ExperimentConfig) -> PointResult {
    let atom = c.atom()?;
    let u = atom.units();
    let omega = c.q * c.p_i * u.frequency();
    let row = vec![
        c.q,
        c.p_i * u.velocity(),
        bounce_height(c.p_i * u.momentum(), &atom)?,
        u.time() / c.p_i,
        omega,
        omega / (2.0 * PI),
        u.length(),
    ];
    Ok((row, Vec::new()))
}

fn units_table(points: &[ExperimentConfig], var: SweepVar) -> Result<Table> {
    let cols = ["q_mod", "velocity_m_s", "bounce_height_m", "tau_s", "omega_rad_s", "frequency_hz", "length_m"];
    let mut t = axis_columns(var, cols.map(String::from).to_vec());
    let results = points.par_iter().map(units_point).collect();
    collect(&mut t, None, var, points, results)?;
    Ok(t)
}

fn compare_tables(c: &ExperimentConfig, points: &[ExperimentConfig], var: SweepVar) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();
    let mut cols: Vec<(String, Vec<f64>)> = vec![(var.key().into(), points.iter().map(|p| p.value(var)).collect())];
    let mut notes = Vec::new();
    for &m in &c.methods {
        let table = match m {
            Method::Born => born_table(c, points, var)?,
            Method::Semiclassical => semiclassical_table(c, points, var)?,
            Method::Tdse => tdse_tables(c, points, var)?.swap_remove(0).table,
            _ => unreachable!("validated"),
        };
        let pick = |name: &str| table.column(name).expect("column present");
        match m {
            Method::Born => {
                cols.push(("born_plus".into(), pick("born_plus")));
                cols.push(("born_minus".into(), pick("born_minus")));
            }
            Method::Semiclassical => cols.push(("semiclassical".into(), pick("weight_p1"))),
            Method::Tdse => {
                cols.push(("tdse_plus".into(), pick("height_p1")));
                cols.push(("tdse_minus".into(), pick("height_m1")));
            }
            _ => {}
        }
        notes.extend(table.notes.iter().map(|n| format!("{m}: {n}")));
        files.push(OutputFile::named(m.name(), table));
    }
    let mut t = Table::new(cols.iter().map(|(n, _)| n.clone()));
    for k in 0..points.len() {
        t.push(cols.iter().map(|(_, v)| v[k]).collect());
    }
    t.notes = notes;
    files.insert(0, OutputFile::main(t));
    Ok(files)
}

/// Compute every output table for `cfg` on a pool of `jobs` threads
/// (default: all cores). Results are in sweep order whatever the pool size.
pub fn execute(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<OutputFile>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let (var, points) = cfg.points();
    pool.install(|| match cfg.method {
        Method::Born => Ok(vec![OutputFile::main(born_table(cfg, &points, var)?)]),
        Method::Semiclassical => Ok(vec![OutputFile::main(semiclassical_table(cfg, &points, var)?)]),
        Method::Tdse => tdse_tables(cfg, &points, var),
        Method::Classical => classical_tables(&points, var),
        Method::Interferometer => interferometer_tables(cfg),
        Method::Compare => compare_tables(cfg, &points, var),
        Method::Units => Ok(vec![OutputFile::main(units_table(&points, var)?)]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::Sweep;
    use crate::semiclassical::bessel_j;
    use approx::assert_relative_eq;

    fn sweep(var: SweepVar, start: f64, stop: f64, steps: usize) -> Option<Sweep> {
        Some(Sweep { var, start, stop, steps })
    }

    #[test]
    fn semiclassical_columns() {
        let c = ExperimentConfig {
            q: 4.2,
            epsilon: 1.0,
            orders: vec![-1, 0, 1],
            ..Default::default()
        };
        let files = execute(&c, Some(1)).unwrap();
        let t = &files[0].table;
        assert_eq!(t.columns[..4], ["q", "u", "weight_m1", "phase_m1"]);
        let u = t.rows[0][1];
        assert_relative_eq!(t.column("weight_p1").unwrap()[0], bessel_j(1, u).unwrap().powi(2), max_relative = 1e-12);
        assert_relative_eq!(t.column("weight_0").unwrap()[0], bessel_j(0, u).unwrap().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn closed_channel_is_a_nan_row() {
        let c = ExperimentConfig {
            method: Method::Born,
            p_i: 4.0,
            sweep: sweep(SweepVar::Q, 1.0, 9.0, 2),
            ..Default::default()
        };
        let t = execute(&c, Some(2)).unwrap().swap_remove(0).table;
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[0][1].is_finite());
        assert!(t.rows[1][2].is_nan());
        assert_eq!(t.rows[1][0], 9.0);
    }

    #[test]
    fn pool_size_does_not_change_results() {
        let c = ExperimentConfig {
            method: Method::Born,
            sweep: sweep(SweepVar::Q, 1.0, 8.0, 29),
            ..Default::default()
        };
        assert_eq!(execute(&c, Some(1)).unwrap(), execute(&c, Some(4)).unwrap());
    }

    #[test]
    fn classical_fit_matches_law() {
        let c = ExperimentConfig {
            method: Method::Classical,
            epsilon: 0.01,
            q: 5.0,
            phases: 8,
            ..Default::default()
        };
        let files = execute(&c, None).unwrap();
        let t = &files[0].table;
        assert_relative_eq!(t.column("ratio").unwrap()[0], 1.0, max_relative = 0.01);
        assert_eq!(files[1].table.rows.len(), 8);
    }

    #[test]
    fn interferometer_scan() {
        let c = ExperimentConfig {
            method: Method::Interferometer,
            theta_steps: 5,
            ..Default::default()
        };
        let files = execute(&c, None).unwrap();
        let t = &files[0].table;
        for r in &t.rows {
            assert_relative_eq!(r[3], r[4], epsilon = 1e-12);
        }
        assert_eq!(files[1].table.rows.len(), 1);
    }

    #[test]
    fn units_columns() {
        let c = ExperimentConfig {
            method: Method::Units,
            ..Default::default()
        };
        let t = execute(&c, None).unwrap().swap_remove(0).table;
        let v = t.column("velocity_m_s").unwrap()[0];
        let h = t.column("bounce_height_m").unwrap()[0];
        assert_relative_eq!(h, v * v / (2.0 * c.gravity), max_relative = 1e-12);
        assert_relative_eq!(
            t.column("frequency_hz").unwrap()[0],
            t.column("omega_rad_s").unwrap()[0] / (2.0 * PI),
            max_relative = 1e-15
        );
    }
}
