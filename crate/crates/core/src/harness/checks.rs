use nalgebra::DMatrix;

use super::report::{CheckOutcome, FitSummary, Verdict};
use super::scenario::{Check, Scenario, Window};
use crate::cutoffs::{sandwich_check, window_check, AstloParams, CutoffSpec};
use crate::dynamics::{frozen_coefficient_replay, PotentialSchedule, Trajectory};
use crate::linalg::hermitian_eigen;
use crate::observables::{
    astlo_monotonicity, dyadic_moment_bound, fit_line, front_condition, lightcone_report, radin_simon_check,
    tail_series, transport_exponents, ExponentFit, LightconeReport, FLOOR,
};
use crate::operators::{distance_field, DistanceField, DistanceSource, LatticeKernel};
use crate::spectral::{
    combes_thomas_fit, dunford_columns, expansion_residual, propagator_shape_check, symmetrized_leading_gap,
    window_shift, ContourSpec, DecayModel, StaticHamiltonian,
};
use crate::{par, Error, Result, C64};

/// A named time series destined for the long-format CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub times: Vec<f64>,
    /// Threshold `N(t)` for tail series; `None` for other quantities.
    pub thresholds: Vec<Option<f64>>,
    pub values: Vec<f64>,
}

impl Series {
    fn tail(name: impl Into<String>, times: &[f64], thresholds: &[f64], values: &[f64]) -> Self {
        Series {
            name: name.into(),
            times: times.to_vec(),
            thresholds: thresholds.iter().map(|&n| Some(n)).collect(),
            values: values.to_vec(),
        }
    }

    fn plain(name: impl Into<String>, times: &[f64], values: &[f64]) -> Self {
        Series {
            name: name.into(),
            times: times.to_vec(),
            thresholds: vec![None; times.len()],
            values: values.to_vec(),
        }
    }
}

/// A point of a σ sweep or a resolvent decay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub quantity: String,
    pub x: f64,
    pub value: f64,
}

/// Everything one check produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRun {
    pub outcome: CheckOutcome,
    pub series: Vec<Series>,
    pub residuals: Vec<ProfileRow>,
    pub decay: Vec<ProfileRow>,
}

impl CheckRun {
    fn new(outcome: CheckOutcome) -> Self {
        CheckRun {
            outcome,
            series: Vec::new(),
            residuals: Vec::new(),
            decay: Vec::new(),
        }
    }
}

/// Shared inputs for the checks of one scenario.
pub struct CheckContext<'a> {
    pub scenario: &'a Scenario,
    pub kernel: &'a LatticeKernel,
    pub kappa: f64,
    pub trajectory: Option<&'a Trajectory>,
}

fn exponent_summary(label: &str, f: &ExponentFit) -> FitSummary {
    FitSummary {
        label: label.to_string(),
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
        window: f.window,
        points: f.points,
    }
}

fn ball(kernel: &LatticeKernel, radius: f64) -> Result<DistanceField> {
    distance_field(*kernel.geometry(), DistanceSource::Ball { radius })
}

fn static_hamiltonian(scenario: &Scenario, kernel: &LatticeKernel) -> Result<StaticHamiltonian> {
    match &scenario.potential {
        PotentialSchedule::Zero => Ok(StaticHamiltonian::free(kernel)),
        PotentialSchedule::Static { values } => StaticHamiltonian::with_potential(kernel, values),
        _ => Err(Error::validation("potential", "needs a static potential")),
    }
}

/// Tail bound shared by the linear and nonlinear light-cone checks.
struct TailVerdict {
    ok: bool,
    max_tail: f64,
    notes: Vec<String>,
}

fn tail_verdict(
    lc: &LightconeReport,
    window: Window,
    tail_max: Option<f64>,
    tail_window: Option<Window>,
    min_exponent: Option<f64>,
) -> TailVerdict {
    let tw = tail_window.unwrap_or(window);
    let max_tail = lc.tail.max_in(tw.0, tw.1);
    let mut ok = true;
    let mut notes = Vec::new();
    if let Some(m) = tail_max {
        let pass = max_tail <= m;
        ok &= pass;
        notes.push(format!("max P on [{}, {}] = {max_tail:.3e} (≤ {m:.1e}: {pass})", tw.0, tw.1));
    }
    if let Some(e) = min_exponent {
        match &lc.fit {
            Some(f) => {
                let pass = f.exponent >= e;
                ok &= pass;
                notes.push(format!("decay exponent {:.2} (≥ {e}: {pass})", f.exponent));
            }
            None => notes.push("decay exponent: all values below floor".into()),
        }
    }
    TailVerdict { ok, max_tail, notes }
}

fn lightcone_outcome(name: &str, lc: &LightconeReport, tv: &TailVerdict) -> CheckOutcome {
    let verdict = if !tv.ok {
        Verdict::Fail
    } else if lc.below_floor {
        Verdict::BelowFloor
    } else {
        Verdict::Pass
    };
    let mut summary = format!("C = {:.3e} (n = {})", lc.smallest_c, lc.order);
    for n in &tv.notes {
        summary.push_str("; ");
        summary.push_str(n);
    }
    let mut o = CheckOutcome::new(name, verdict, summary)
        .metric("smallest_c", lc.smallest_c)
        .metric("max_tail", tv.max_tail)
        .metric("v", lc.v)
        .metric("alpha", lc.alpha);
    if let Some(f) = &lc.fit {
        o = o
            .metric("decay_exponent", f.exponent)
            .fit(exponent_summary("log P vs log t", f));
    }
    o
}

fn trajectory<'a>(ctx: &CheckContext<'a>, name: &str) -> Result<&'a Trajectory> {
    ctx.trajectory
        .ok_or_else(|| Error::validation(format!("checks.{name}"), "no trajectory was simulated"))
}

/// Runs one check.
pub fn run_check(ctx: &CheckContext<'_>, check: &Check) -> Result<CheckRun> {
    let name = check.name();
    match check {
        Check::RadinSimon { constant, tolerance } => {
            let tr = trajectory(ctx, name)?;
            let c = constant.unwrap_or(ctx.kappa);
            let r = radin_simon_check(tr, c)?;
            let verdict = if r.max_violation <= *tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            let o = CheckOutcome::new(
                name,
                verdict,
                format!(
                    "max violation {:.3e} with C = {c}; smallest C = {:.4}",
                    r.max_violation, r.smallest_constant
                ),
            )
            .metric("max_violation", r.max_violation)
            .metric("constant", c)
            .metric("smallest_constant", r.smallest_constant);
            let mut run = CheckRun::new(o);
            run.series.push(Series::plain("first_moment", &r.times, &r.first_moment));
            Ok(run)
        }
        Check::Thm1 {
            v,
            delta,
            alpha,
            radius,
            order,
            window,
        } => {
            let tr = trajectory(ctx, name)?;
            let phi = ball(ctx.kernel, *radius)?;
            let w = CutoffSpec::default().build()?;
            let front = front_condition(tr, ctx.kernel, &phi, *v, *delta, *alpha, w.bump())?;
            let lc = lightcone_report(tr, *v, *alpha, *radius, *order, *window, None)?;
            let holds = front.holds.iter().all(|&h| h);
            let verdict = if lc.below_floor {
                Verdict::BelowFloor
            } else if holds {
                Verdict::Pass
            } else {
                Verdict::DiagnosticOnly
            };
            let violated = front.holds.iter().filter(|&&h| !h).count();
            let summary = format!(
                "front condition holds at {}/{} times; C = {:.3e} (γ = {}, β = {})",
                front.holds.len() - violated,
                front.holds.len(),
                lc.smallest_c,
                lc.gamma,
                lc.beta
            );
            let mut o = CheckOutcome::new(name, verdict, summary)
                .metric("smallest_c", lc.smallest_c)
                .metric("front_violations", violated as f64);
            if let Some(f) = &lc.fit {
                o = o.fit(exponent_summary("log P vs log t", f));
            }
            let mut run = CheckRun::new(o);
            run.series
                .push(Series::tail("thm1_tail", &lc.tail.times, &lc.tail.thresholds, &lc.tail.values));
            run.series.push(Series::plain("front_lhs", &front.times, &front.lhs));
            run.series.push(Series::plain("front_rhs", &front.times, &front.rhs));
            Ok(run)
        }
        Check::Thm2 {
            v,
            radius,
            order,
            window,
            tail_max,
            tail_window,
            min_exponent,
        } => {
            let tr = trajectory(ctx, name)?;
            let lc = lightcone_report(tr, *v, 1.0, *radius, *order, *window, None)?;
            let tv = tail_verdict(&lc, *window, *tail_max, *tail_window, *min_exponent);
            let mut run = CheckRun::new(lightcone_outcome(name, &lc, &tv));
            run.series
                .push(Series::tail("thm2_tail", &lc.tail.times, &lc.tail.thresholds, &lc.tail.values));
            Ok(run)
        }
        Check::Thm3 { r, r0, v, fit_end } => {
            let tr = trajectory(ctx, name)?;
            let d = dyadic_moment_bound(tr, *r, *r0, *v, *fit_end)?;
            let ok = d.stable && d.max_partition_error <= 1e-12;
            let o = CheckOutcome::new(
                name,
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!(
                    "C_fit = {:.4e}, extended = {:.4e} (stable: {}); partition error {:.1e}",
                    d.c_fit, d.c_extended, d.stable, d.max_partition_error
                ),
            )
            .metric("c_fit", d.c_fit)
            .metric("c_extended", d.c_extended)
            .metric("initial_moment", d.initial_moment)
            .metric("partition_error", d.max_partition_error);
            let times: Vec<f64> = d.points.iter().map(|p| p.t).collect();
            let thresholds: Vec<f64> = times.iter().map(|t| 2.0 * v * t).collect();
            let values: Vec<f64> = d.points.iter().map(|p| p.moment).collect();
            let mut run = CheckRun::new(o);
            run.series.push(Series::tail("thm3_moment", &times, &thresholds, &values));
            Ok(run)
        }
        Check::Nls {
            v,
            window,
            tail_max,
            tail_window,
            replay_tolerance,
        } => {
            let tr = trajectory(ctx, name)?;
            let nl = ctx
                .scenario
                .nonlinearity
                .as_ref()
                .ok_or_else(|| Error::validation("nonlinearity", "required by the nls check"))?;
            let lc = lightcone_report(tr, *v, 1.0, 0.0, 4, *window, None)?;
            let tv = tail_verdict(&lc, *window, *tail_max, *tail_window, None);
            let replay = frozen_coefficient_replay(tr, ctx.kernel, &ctx.scenario.potential, nl)?;
            let replay_ok = replay.max_deviation <= *replay_tolerance;
            let mut o = lightcone_outcome(name, &lc, &tv).metric("replay_deviation", replay.max_deviation);
            o.summary.push_str(&format!(
                "; replay deviation {:.3e} over {} knots (≤ {replay_tolerance:.0e}: {replay_ok})",
                replay.max_deviation, replay.knots
            ));
            if !replay_ok {
                o.verdict = Verdict::Fail;
            }
            if let Some(c) = tr.meta.hypothesis_violation {
                o.summary.push_str(&format!("; amplitude cap exceeded ({c:.3})"));
            }
            let mut run = CheckRun::new(o);
            run.series
                .push(Series::tail("nls_tail", &lc.tail.times, &lc.tail.thresholds, &lc.tail.values));
            Ok(run)
        }
        Check::CombesThomas {
            model,
            max_separation,
            z_offset,
            min_r_squared,
            shape_times,
        } => combes_thomas(ctx, *model, *max_separation, *z_offset, *min_r_squared, shape_times),
        Check::Dunford {
            contour,
            times,
            range,
            tolerance,
        } => dunford(ctx, contour, times, *range, *tolerance),
        Check::Expansion {
            orders,
            sigmas,
            cutoff,
            slope_tolerance,
            gap,
            gap_tolerance,
        } => expansion(ctx, orders, sigmas, cutoff, *slope_tolerance, *gap, *gap_tolerance),
        Check::Transport {
            alphas,
            window,
            finite_cap,
        } => {
            let tr = trajectory(ctx, name)?;
            let rep = transport_exponents(tr, alphas, *window, *finite_cap)?;
            let table: Vec<String> = rep
                .entries
                .iter()
                .map(|e| match e.s_plus {
                    Some(s) => format!("S⁺({}) = {s:.2}", e.alpha),
                    None => format!("S⁺({}) = ∞", e.alpha),
                })
                .collect();
            let au = rep
                .alpha_u_plus
                .map_or_else(|| "none".to_string(), |a| format!("{a}"));
            let mut o = CheckOutcome::new(name, Verdict::DiagnosticOnly, format!("{}; α_u⁺ ≈ {au}", table.join(", ")));
            if let Some(a) = rep.alpha_u_plus {
                o = o.metric("alpha_u_plus", a);
            }
            for e in &rep.entries {
                if let Some(s) = e.s_plus {
                    o = o.metric(&format!("s_plus_{}", e.alpha), s);
                }
                if let Some(f) = &e.fit {
                    o = o.fit(exponent_summary(&format!("alpha = {}", e.alpha), f));
                }
            }
            let mut run = CheckRun::new(o);
            for &a in alphas {
                let s = tail_series(tr, |t| t.powf(a) - 1.0, None);
                run.series
                    .push(Series::tail(format!("transport_alpha_{a}"), &s.times, &s.thresholds, &s.values));
            }
            Ok(run)
        }
        Check::Astlo {
            v,
            v_bar,
            alpha,
            cutoff,
            t_ref,
            t_min,
            tolerance,
        } => {
            let tr = trajectory(ctx, name)?;
            let params = AstloParams::linear(*v_bar, *v, *alpha, cutoff.epsilon, *t_ref)?;
            let chi = cutoff.build()?;
            let phi = ball(ctx.kernel, 0.0)?;
            let rep = astlo_monotonicity(tr, &phi, &chi, &params)?;
            let worst = rep.max_after(*t_min);
            let worst = if worst.is_finite() { worst } else { 0.0 };
            let verdict = if worst <= *tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            let mut o = CheckOutcome::new(
                name,
                verdict,
                format!("max residual for t ≥ {t_min}: {worst:.3e} (v = {v}, v̄ = {v_bar}, α = {alpha})"),
            )
            .metric("max_residual", worst);
            if let Some(f) = &rep.tail_fit {
                o = o.fit(exponent_summary("log m vs log t", f));
            }
            let mut run = CheckRun::new(o);
            run.series.push(Series::plain("astlo_residual", &rep.times, &rep.residuals));
            Ok(run)
        }
        Check::Geometry {
            alphas,
            speeds,
            cutoff,
            t_ref,
            tolerance,
        } => {
            let chi = cutoff.build()?;
            let phi = ball(ctx.kernel, 0.0)?;
            let times = ctx.scenario.time.times();
            let mut worst_sandwich = f64::NEG_INFINITY;
            let mut worst_window: f64 = 0.0;
            let mut cases = 0usize;
            let mut failures = 0usize;
            for &a in alphas {
                for &(vb, v) in speeds {
                    let params = AstloParams::linear(vb, v, a, cutoff.epsilon, *t_ref)?;
                    for &t in &times {
                        let s = sandwich_check(&chi, phi.values(), &params, t)?;
                        worst_sandwich = worst_sandwich.max(s.max_violation);
                        let mut ok = s.holds(*tolerance);
                        if t > 0.0 {
                            let w = window_check(chi.bump(), phi.values(), &params, t)?;
                            worst_window = worst_window.max(w.outside_max).max(w.plateau_deficit);
                            ok &= w.holds(*tolerance);
                        }
                        cases += 1;
                        failures += usize::from(!ok);
                    }
                }
            }
            let verdict = if failures == 0 { Verdict::Pass } else { Verdict::Fail };
            let o = CheckOutcome::new(
                name,
                verdict,
                format!(
                    "{failures}/{cases} cases violated; worst sandwich {worst_sandwich:.1e}, worst window {worst_window:.1e}"
                ),
            )
            .metric("worst_sandwich", worst_sandwich)
            .metric("worst_window", worst_window)
            .metric("cases", cases as f64);
            Ok(CheckRun::new(o))
        }
    }
}

fn combes_thomas(
    ctx: &CheckContext<'_>,
    model: DecayModel,
    max_separation: usize,
    z_offset: f64,
    min_r_squared: f64,
    shape_times: &[f64],
) -> Result<CheckRun> {
    let name = "combes_thomas";
    let h = static_hamiltonian(ctx.scenario, ctx.kernel)?;
    let z = C64::new(h.norm()? + z_offset, 0.0);
    let x = ctx.kernel.geometry().origin();
    let other = match model {
        DecayModel::Exponential => DecayModel::Logarithmic,
        DecayModel::Logarithmic => DecayModel::Exponential,
    };
    let fit = match combes_thomas_fit(&h, z, x, max_separation, model) {
        Ok(f) => f,
        Err(Error::DegenerateFit(msg)) => {
            return Ok(CheckRun::new(CheckOutcome::new(name, Verdict::BelowFloor, msg)));
        }
        Err(e) => return Err(e),
    };
    let alt = combes_thomas_fit(&h, z, x, max_separation, other)?;
    let mut ok = fit.r_squared >= min_r_squared;
    let mut summary = format!(
        "{} model R² = {:.4} (other model {:.4}), rate {:.4}, envelope rate {:.4}",
        model.name(),
        fit.r_squared,
        alt.r_squared,
        fit.rate,
        fit.envelope_rate
    );
    let mut o = CheckOutcome::new(name, Verdict::Pass, "")
        .metric("r_squared", fit.r_squared)
        .metric("r_squared_other", alt.r_squared)
        .metric("rate", fit.rate)
        .metric("envelope_rate", fit.envelope_rate)
        .metric("z", z.re);
    o = o.fit(FitSummary {
        label: format!("log|R| vs δ(r), {}", model.name()),
        slope: -fit.rate,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        window: (1.0, max_separation as f64),
        points: fit.separations.len(),
    });
    if !shape_times.is_empty() {
        let shape = propagator_shape_check(&h, x, shape_times, &fit, &ContourSpec::default())?;
        ok &= shape.holds;
        summary.push_str(&format!("; propagator shape constant {:.3} (≤ 2: {})", shape.constant, shape.holds));
        o = o.metric("shape_constant", shape.constant);
    }
    o.summary = summary;
    o.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    let mut run = CheckRun::new(o);
    for f in [&fit, &alt] {
        for (r, lv) in f.separations.iter().zip(&f.log_values) {
            run.decay.push(ProfileRow {
                quantity: format!("log_resolvent_{}", f.model.name()),
                x: *r,
                value: *lv,
            });
        }
    }
    Ok(run)
}

/// `e^{-itH}δ_x` by dense diagonalization.
pub fn dense_propagator_column(h: &StaticHamiltonian, x: usize, t: f64) -> Vec<C64> {
    let dense: DMatrix<C64> = h.matrix().to_dense();
    let (vals, vecs) = hermitian_eigen(&dense);
    (0..vals.len())
        .map(|y| {
            (0..vals.len())
                .map(|k| vecs[(y, k)] * vecs[(x, k)].conj() * C64::new(0.0, -t * vals[k]).exp())
                .sum()
        })
        .collect()
}

fn dunford(ctx: &CheckContext<'_>, contour: &ContourSpec, times: &[f64], range: usize, tolerance: f64) -> Result<CheckRun> {
    let name = "dunford";
    let h = static_hamiltonian(ctx.scenario, ctx.kernel)?;
    let g = ctx.kernel.geometry();
    let x = g.origin();
    let mut coords = g.coords(x);
    let start = coords[0];
    let mut sites = Vec::new();
    for dy in -(range as i64)..=(range as i64) {
        coords[0] = start + dy;
        if let Some(y) = g.index_of(&coords) {
            sites.push(y);
        }
    }
    let max_error = |spec: &ContourSpec| -> Result<f64> {
        let cols = dunford_columns(&h, x, times, spec)?;
        let mut worst: f64 = 0.0;
        for (&t, col) in times.iter().zip(&cols) {
            let exact = dense_propagator_column(&h, x, t);
            for &y in &sites {
                worst = worst.max((col[y] - exact[y]).norm());
            }
        }
        Ok(worst)
    };
    let err = max_error(contour)?;
    let half = ContourSpec {
        nodes: (contour.nodes / 2).max(crate::spectral::MIN_CONTOUR_NODES),
        ..contour.clone()
    };
    let err_half = if half.nodes < contour.nodes { max_error(&half)? } else { err };
    let verdict = if err <= tolerance { Verdict::Pass } else { Verdict::Fail };
    let o = CheckOutcome::new(
        name,
        verdict,
        format!(
            "max error {err:.3e} at {} nodes/side ({:.3e} at {})",
            contour.nodes, err_half, half.nodes
        ),
    )
    .metric("max_error", err)
    .metric("max_error_half_nodes", err_half)
    .metric("nodes", contour.nodes as f64);
    Ok(CheckRun::new(o))
}

fn slope_fit(label: String, sigmas: &[f64], values: &[f64]) -> Result<FitSummary> {
    let lx: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let f = fit_line(&lx, &ly)?;
    Ok(FitSummary {
        label,
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
        window: (sigmas[0], sigmas[sigmas.len() - 1]),
        points: f.points,
    })
}

fn expansion(
    ctx: &CheckContext<'_>,
    orders: &[usize],
    sigmas: &[f64],
    cutoff: &CutoffSpec,
    slope_tolerance: f64,
    gap: bool,
    gap_tolerance: f64,
) -> Result<CheckRun> {
    let name = "expansion";
    let chi = cutoff.build()?;
    let phi = ball(ctx.kernel, 0.0)?;
    let phi_max = ctx.kernel.geometry().max_radius();
    let eps = chi.epsilon();
    let jobs: Vec<(usize, f64)> = orders
        .iter()
        .flat_map(|&n| sigmas.iter().map(move |&s| (n, s)))
        .collect();
    let values: Vec<Result<f64>> = par::map(&jobs, |&(n, s)| {
        expansion_residual(ctx.kernel, &chi, &phi, s, n, window_shift(phi_max, s, eps))
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let mut run = CheckRun::new(CheckOutcome::new(name, Verdict::Pass, ""));
    let mut notes = Vec::new();
    let mut ok = true;
    let mut fits = Vec::new();
    for (i, &n) in orders.iter().enumerate() {
        let r = &values[i * sigmas.len()..(i + 1) * sigmas.len()];
        for (&s, &v) in sigmas.iter().zip(r) {
            run.residuals.push(ProfileRow {
                quantity: format!("residual_n{n}"),
                x: s,
                value: v,
            });
        }
        if r.iter().any(|&v| !(v > 0.0)) {
            ok = false;
            notes.push(format!("n = {n}: zero residual, no slope"));
            continue;
        }
        let f = slope_fit(format!("log residual vs log σ, n = {n}"), sigmas, r)?;
        let target = -((n + 1) as f64);
        let pass = (f.slope - target).abs() <= slope_tolerance;
        ok &= pass;
        notes.push(format!("n = {n}: slope {:.3} (target {target} ± {slope_tolerance}: {pass})", f.slope));
        run.outcome = run.outcome.clone().metric(&format!("slope_n{n}"), f.slope);
        fits.push(f);
    }
    if gap {
        let reports: Vec<Result<_>> = par::map(sigmas, |&s| {
            symmetrized_leading_gap(ctx.kernel, &chi, &phi, s, window_shift(phi_max, s, eps))
        });
        let reports: Vec<_> = reports.into_iter().collect::<Result<_>>()?;
        let norms: Vec<f64> = reports.iter().map(|r| r.norm).collect();
        for r in &reports {
            run.residuals.push(ProfileRow {
                quantity: "gap_norm".into(),
                x: r.sigma,
                value: r.norm,
            });
            run.residuals.push(ProfileRow {
                quantity: "gap_max_eigenvalue".into(),
                x: r.sigma,
                value: r.max_eigenvalue,
            });
        }
        if norms.iter().all(|&v| v > 0.0) {
            let f = slope_fit("log gap vs log σ".into(), sigmas, &norms)?;
            let pass = (f.slope + 2.0).abs() <= gap_tolerance;
            ok &= pass;
            // smallest C with λ_max ≤ Cσ^{-2} on the sweep
            let c = reports
                .iter()
                .map(|r| r.max_eigenvalue * r.sigma * r.sigma)
                .fold(f64::NEG_INFINITY, f64::max);
            notes.push(format!(
                "gap slope {:.3} (target -2 ± {gap_tolerance}: {pass}); λ_max ≤ {c:.3e}·σ⁻²",
                f.slope
            ));
            run.outcome = run
                .outcome
                .clone()
                .metric("gap_slope", f.slope)
                .metric("gap_eigen_constant", c);
            fits.push(f);
        } else {
            ok = false;
            notes.push("gap vanishes, no slope".into());
        }
    }
    run.outcome.fits = fits;
    run.outcome.summary = notes.join("; ");
    run.outcome.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(run)
}

/// `true` when the value is below the numerical floor.
pub fn floor_flag(value: f64) -> bool {
    value.abs() < FLOOR
}
