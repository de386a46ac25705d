//! Command-line front end: solve a scene, run a delta ladder, or run the
//! consistency checks. Exit codes: 0 success, 1 validation error,
//! 2 numerical failure.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use emsphere::calderon::{apply_ge, project_from_samples, synthesize};
use emsphere::config::{load_scene_file, RunConfig, Tolerances};
use emsphere::fields::{
    eval_e, eval_h, farfield_series, farfield_series_h, farfield_stratton_chu, l2_s2_diff,
    l2_s2_norm, FieldRegion,
};
use emsphere::mie::{solve_modes, truncation_order, ModalSolution, Parity};
use emsphere::quad::SphereQuadrature;
use emsphere::scene::CoreKind;
use emsphere::vec3::{ccross_rc, cnorm, csub, scale as vscale};
use emsphere::verify::{
    delta_ladder_study, energy_identity_residual, interior_estimate_check, weak_form_residual,
    LadderOptions,
};
use emsphere::Error;

#[derive(Parser)]
#[command(name = "emsphere", about = "Layered-sphere Maxwell scattering solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scene description file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for the deterministic pseudo-random test fields.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Override the series truncation order.
    #[arg(long)]
    nmax: Option<u32>,
    /// Override the sphere-quadrature order.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Energy-identity tolerance (at most 1e-2).
    #[arg(long)]
    tol_energy: Option<f64>,
    /// Weak-form tolerance (at most 1e-2).
    #[arg(long)]
    tol_weak: Option<f64>,
    /// Far-field cross-route tolerance (at most 1e-2).
    #[arg(long)]
    tol_cross: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scene: modal coefficients (JSON) and far field (CSV).
    Solve(CommonArgs),
    /// Run the effective-realization delta ladder and write the report.
    Ladder(CommonArgs),
    /// Run the consistency checks (energy, weak form, Calderon, far field).
    Check(CommonArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Precondition(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

fn build_config(args: &CommonArgs) -> emsphere::Result<RunConfig> {
    let sf = load_scene_file(&args.config)?;
    let (scene, incidence) = sf.build()?;
    let mut tol = Tolerances::default();
    if let Some(v) = args.tol_energy {
        tol.energy = v;
    }
    if let Some(v) = args.tol_weak {
        tol.weak_form = v;
    }
    if let Some(v) = args.tol_cross {
        tol.cross_route = v;
    }
    tol.validate()?;
    Ok(RunConfig {
        scene,
        incidence,
        delta_ladder: sf.delta_ladder.clone(),
        eta0: sf.eta0.unwrap_or(1.0),
        tau0: sf.tau0.unwrap_or(1.0),
        seed: args.seed,
        n_max_override: args.nmax,
        quad_order_override: args.quad_order,
        tolerances: tol,
    })
}

fn pick_n_max(cfg: &RunConfig) -> u32 {
    cfg.n_max_override
        .unwrap_or_else(|| truncation_order(cfg.scene.background_k, cfg.scene.r_omega(), 8))
}

fn pick_quad(cfg: &RunConfig, n_max: u32) -> SphereQuadrature {
    match cfg.quad_order_override {
        Some(q) => SphereQuadrature::new(q, 2 * q),
        None => SphereQuadrature::for_band_limit(n_max),
    }
}

fn write_coefficients(sol: &ModalSolution, path: &PathBuf) -> emsphere::Result<()> {
    #[derive(serde::Serialize)]
    struct Row {
        n: u32,
        s_te: [f64; 2],
        s_tm: [f64; 2],
    }
    let rows: Vec<Row> = (1..=sol.n_max)
        .map(|n| {
            let te = sol.s(n, Parity::Te);
            let tm = sol.s(n, Parity::Tm);
            Row {
                n,
                s_te: [te.re, te.im],
                s_tm: [tm.re, tm.im],
            }
        })
        .collect();
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, &rows)
        .map_err(|e| Error::Config(format!("writing coefficients: {e}")))
}

fn cmd_solve(args: &CommonArgs) -> emsphere::Result<()> {
    let cfg = build_config(args)?;
    let n_max = pick_n_max(&cfg);
    let sol = solve_modes(&cfg.scene, &cfg.incidence, n_max)?;
    let quad = pick_quad(&cfg, n_max);
    let einf = farfield_series(&sol, &quad)?;
    std::fs::create_dir_all(&args.out)?;
    write_coefficients(&sol, &args.out.join("coefficients.json"))?;
    let mut csv = BufWriter::new(File::create(args.out.join("farfield.csv"))?);
    einf.write_csv(&mut csv)?;
    csv.flush()?;
    let energy = energy_identity_residual(&sol)?;
    println!("n_max: {n_max}");
    println!("far-field L2(S2) norm: {:.12e}", l2_s2_norm(&einf));
    println!("energy residual: {:.3e}", energy.residual);
    Ok(())
}

fn cmd_ladder(args: &CommonArgs) -> emsphere::Result<()> {
    let cfg = build_config(args)?;
    if !cfg.scene.core.is_obstacle() {
        return Err(Error::Precondition(
            "ladder needs a PEC or PMC core scene".into(),
        ));
    }
    let deltas = cfg.delta_ladder.clone().ok_or_else(|| {
        Error::Config("ladder needs delta_ladder = [...] in the scene file".into())
    })?;
    let opts = LadderOptions {
        n_max: cfg.n_max_override,
        quad_order: cfg.quad_order_override,
        weak_form_tests: 3,
        seed: cfg.seed,
    };
    let report = delta_ladder_study(
        &cfg.scene,
        &cfg.incidence,
        &deltas,
        cfg.eta0,
        cfg.tau0,
        opts,
    )?;
    std::fs::create_dir_all(&args.out)?;
    report.write_json(BufWriter::new(File::create(args.out.join("report.json"))?))?;
    let mut csv = BufWriter::new(File::create(args.out.join("report.csv"))?);
    report.write_csv(&mut csv)?;
    csv.flush()?;
    let kind = report.kind;
    let interior = interior_estimate_check(&report, kind);
    println!("deltas:        {:?}", report.deltas);
    println!("far_errs:      {:?}", report.far_errs);
    println!("fitted slope:  {:.4}", report.fitted_slope);
    println!("fitted log C:  {:.4}", report.fitted_log_c);
    println!("core ratio:    {:.3}", interior.core_ratio);
    println!("outside ratio: {:.3}", interior.outside_ratio);
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{name}: {}", if pass { "pass" } else { "FAIL" });
        ok &= pass;
    };
    check("far errors strictly decreasing", report.far_errs_strictly_decreasing());
    check("fitted slope >= 0.45", report.fitted_slope >= 0.45);
    check("bound form", report.bound_form_holds());
    check(
        "energy residuals <= 1e-7",
        report.energy_residuals.iter().all(|r| *r <= 1e-7),
    );
    check(
        "weak form (coarsest, finest) <= 1e-5",
        report.weak_form_first <= cfg.tolerances.weak_form
            && report.weak_form_last <= cfg.tolerances.weak_form,
    );
    check("interior estimates", interior.pass);
    if ok {
        Ok(())
    } else {
        Err(Error::Range("ladder invariants violated".into()))
    }
}

fn cmd_check(args: &CommonArgs) -> emsphere::Result<()> {
    let cfg = build_config(args)?;
    let tol = cfg.tolerances;
    let n_max = pick_n_max(&cfg);
    let sol = solve_modes(&cfg.scene, &cfg.incidence, n_max)?;
    let quad = pick_quad(&cfg, n_max);
    let mut ok = true;
    let mut check = |name: &str, value: f64, limit: f64| {
        let pass = value <= limit;
        println!(
            "{name}: {value:.3e} (tolerance {limit:.1e}) {}",
            if pass { "pass" } else { "FAIL" }
        );
        ok &= pass;
    };

    let energy = energy_identity_residual(&sol)?;
    check("energy identity residual", energy.residual, tol.energy);

    let einf = farfield_series(&sol, &quad)?;
    let hinf = farfield_series_h(&sol, &quad)?;
    let norm = l2_s2_norm(&einf).max(1e-300);
    let mut tang: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for i in 0..einf.directions.len() {
        let d = einf.directions[i];
        let radial = (einf.values[i][0] * d[0]
            + einf.values[i][1] * d[1]
            + einf.values[i][2] * d[2])
            .norm();
        tang = tang.max(radial / norm);
        let hx = ccross_rc(d, einf.values[i]);
        rel = rel.max(cnorm(csub(hinf.values[i], hx)) / norm);
    }
    check("far-field tangentiality", tang, tol.farfield_relations);
    check("H_inf = xhat x E_inf", rel, tol.farfield_relations);

    if norm > 1e-12 {
        let r_near = 0.5 * (cfg.scene.r_omega() + cfg.scene.calderon_radius);
        let sc1 = farfield_stratton_chu(&sol, r_near, &quad)?;
        let sc2 = farfield_stratton_chu(&sol, cfg.scene.calderon_radius, &quad)?;
        check(
            "far-field cross-route",
            l2_s2_diff(&sc1, &einf)? / norm,
            tol.cross_route,
        );
        check(
            "surface-radius independence",
            l2_s2_diff(&sc1, &sc2)? / norm,
            tol.radius_independence,
        );
    } else {
        println!("far-field cross-route: skipped (null scatterer)");
    }

    // Calderon self-consistency at the artificial sphere
    let r_cal = cfg.scene.calderon_radius;
    let cq = SphereQuadrature::new(2 * n_max as usize + 6, 4 * n_max as usize + 12);
    let mut lam = Vec::with_capacity(cq.len());
    let mut href = Vec::with_capacity(cq.len());
    for node in &cq.nodes {
        let x = vscale(*node, r_cal);
        let e = eval_e(&sol, x, FieldRegion::Scattered)?;
        let h = eval_h(&sol, x, FieldRegion::Scattered)?;
        lam.push(ccross_rc(*node, e));
        href.push(ccross_rc(*node, h));
    }
    let spectral = project_from_samples(&lam, &cq, r_cal, n_max)?;
    let ge = synthesize(&apply_ge(&spectral, cfg.scene.background_k, r_cal)?, &cq)?;
    let scale_h = href.iter().map(|v| cnorm(*v)).fold(1e-300, f64::max);
    let calderon_dev = ge
        .iter()
        .zip(&href)
        .map(|(a, b)| cnorm(csub(*a, *b)))
        .fold(0.0, f64::max)
        / scale_h;
    check("calderon consistency", calderon_dev, 1e-8);

    if !matches!(cfg.scene.core, CoreKind::Pec) {
        let w = weak_form_residual(&sol, 10, cfg.seed)?;
        check("weak-form residual", w, tol.weak_form);
    } else {
        println!("weak-form residual: skipped (PEC obstacle)");
    }

    if ok {
        Ok(())
    } else {
        Err(Error::Range("consistency checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Ladder(a) => cmd_ladder(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
