use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pm4dof::geometry::{chain_transform, limb_base_frame, UPS_DH_TABLE};
use pm4dof::{
    attachment_points, fk_full_11, fk_reduced, ik_active, ik_full, residual_phi, run_closed_loop,
    singularity_proximity, summarize, FullConfiguration, GeometricParams, JointVector, Limb, Pose,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::{CliError, FkArgs, IkArgs, SimulateArgs, SweepArgs};

const JOINT_NAMES: [&str; 4] = ["q13", "q23", "q33", "q42"];

pub fn ik(args: &IkArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load_or_default(args.config.as_deref())?;
    let params = cfg.geometry();
    let pose = Pose::from_degrees(args.x, args.z, args.theta, args.psi);
    let full = ik_full(&pose, &params)?;
    let active = full.active();

    writeln!(out, "pose: {pose}")?;
    writeln!(out, "active coordinates (m):")?;
    for (name, q) in JOINT_NAMES.iter().zip(active.iter()) {
        writeln!(out, "  {name} = {q:.9}")?;
    }
    writeln!(out, "passive coordinates (deg):")?;
    for limb in Limb::ALL {
        let c = full.limb(limb);
        let i = limb.number();
        writeln!(
            out,
            "  q{i}1 = {:.9}  q{i}2 = {:.9}  q{i}4 = {:.9}  q{i}5 = {:.9}  q{i}6 = {:.9}{}",
            deg(c.q1),
            deg(c.q2),
            deg(c.q4),
            deg(c.q5),
            deg(c.q6),
            if c.gimbal_lock { "  (wrist at gimbal lock, q6 set to 0)" } else { "" }
        )?;
    }
    let c = &full.central;
    writeln!(out, "  q41 = {:.9}  q43 = {:.9}  q44 = {:.9}", deg(c.q1), deg(c.q3), deg(c.q4))?;
    if c.orientation_mismatch > 1e-12 {
        writeln!(out, "central U-joint orientation mismatch = {:.3e}", c.orientation_mismatch)?;
    }
    writeln!(out, "max |Phi| = {:.3e} m^2", residual_phi(&pose, &active, &params).amax())?;
    writeln!(out, "max chain closure error = {:.3e} m", chain_closure_error(&pose, &full, &params))?;
    Ok(())
}

/// Degrees, with values that print as zero made non-negative.
fn deg(rad: f64) -> f64 {
    let d = rad.to_degrees();
    if d.abs() < 5e-10 {
        0.0
    } else {
        d
    }
}

/// Largest distance between each limb's D-H chain tip and the attachment
/// point it should reach.
fn chain_closure_error(pose: &Pose, full: &FullConfiguration, params: &GeometricParams) -> f64 {
    let pts = attachment_points(params, pose);
    let mut worst: f64 = 0.0;
    for limb in Limb::ALL {
        let c = full.limb(limb);
        let tip = chain_transform(&limb_base_frame(params, limb), &UPS_DH_TABLE, &[c.q1, c.q2, c.q3, c.q4, c.q5, c.q6]);
        worst = worst.max((tip.translation - pts.mobile[limb.index()]).norm());
    }
    let c = &full.central;
    let (s, k) = c.q1.sin_cos();
    worst.max((-s * c.q2 - pose.x).hypot(k * c.q2 - pose.z))
}

pub fn fk(args: &FkArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load_or_default(args.config.as_deref())?;
    let params = cfg.geometry();
    let mut settings = cfg.solver();
    let g = settings.initial_guess;
    settings.initial_guess = Pose::new(
        args.guess_x.unwrap_or(g.x),
        args.guess_z.unwrap_or(g.z),
        args.guess_theta.map_or(g.theta, f64::to_radians),
        args.guess_psi.map_or(g.psi, f64::to_radians),
    );
    if let Some(n) = args.max_iter {
        settings.max_iterations = n;
    }
    let active = JointVector::from_column_slice(&args.lengths);

    let sol = fk_reduced(&active, &params, &settings)?;
    writeln!(out, "pose: {}", sol.pose)?;
    writeln!(out, "iterations = {}", sol.iterations)?;
    writeln!(out, "max |Phi| = {:.3e} m^2", sol.residual)?;
    if args.oracle {
        let full = fk_full_11(&active, &params, &settings)?;
        writeln!(out, "full closure solve: {} ({} iterations)", full.pose, full.iterations)?;
        writeln!(out, "agreement norm = {:.3e}", full.pose.max_abs_diff(&sol.pose))?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load_or_default(args.config.as_deref())?;
    let kind = args.traj.unwrap_or(cfg.trajectory.kind);
    let mut sim = cfg.simulation(kind);
    if let Some(d) = args.duration {
        sim.trajectory.duration = d;
        sim.trajectory.validate().map_err(|e| CliError::Usage(format!("--duration: {e}")))?;
    }
    let log = run_closed_loop(&sim)?;
    write_file(&args.out, |w| log.write_csv(w))?;

    let summary = summarize(&log)?;
    writeln!(
        out,
        "trajectory: {}, {} s, {} ticks at dt = {} s",
        sim.trajectory.name(),
        sim.trajectory.duration,
        log.len(),
        log.dt
    )?;
    writeln!(out, "{:<6} {:>16} {:>18}", "joint", "mean error (m)", "phase offset (ms)")?;
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        let phase = summary.phase_offset[j].map_or("n/a".to_string(), |p| format!("{:.3}", p * 1e3));
        writeln!(out, "{name:<6} {:>16.6e} {phase:>18}", summary.mean_error[j])?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Inclusive, evenly spaced axis from `min,max,count`.
pub fn parse_axis(spec: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--{name} {spec:?}: {why}; expected min,max,count"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [min, max, count] = parts.as_slice() else { return Err(bad("need three fields")) };
    let min: f64 = min.parse().map_err(|_| bad("min is not a number"))?;
    let max: f64 = max.parse().map_err(|_| bad("max is not a number"))?;
    let count: usize = count.parse().map_err(|_| bad("count is not a positive integer"))?;
    if count == 0 || !min.is_finite() || !max.is_finite() || max < min {
        return Err(bad("need count >= 1 and finite min <= max"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    Ok((0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect())
}

pub const SWEEP_COLUMNS: [&str; 10] =
    ["x_m", "z_m", "theta_deg", "psi_deg", "reachable", "q13_m", "q23_m", "q33_m", "q42_m", "condition"];

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load_or_default(args.config.as_deref())?;
    let params = cfg.geometry();
    let xs = parse_axis(&args.x, "x")?;
    let zs = parse_axis(&args.z, "z")?;
    let ts = parse_axis(&args.theta, "theta")?;
    let ps = parse_axis(&args.psi, "psi")?;

    let mut grid = Vec::with_capacity(xs.len() * zs.len() * ts.len() * ps.len());
    for &x in &xs {
        for &z in &zs {
            for &t in &ts {
                for &p in &ps {
                    grid.push((x, z, t, p));
                }
            }
        }
    }
    let rows: Vec<(bool, String)> = grid
        .par_iter()
        .map(|&(x, z, t, p)| {
            let pose = Pose::from_degrees(x, z, t, p);
            let mut row = format!("{x:.6},{z:.6},{t:.6},{p:.6}");
            match ik_active(&pose, &params) {
                Ok(q) => {
                    row.push_str(",1");
                    for v in q.iter() {
                        row.push_str(&format!(",{v:.9}"));
                    }
                    row.push_str(&format!(",{:.6e}", singularity_proximity(&pose, &params)));
                    (true, row)
                }
                Err(_) => {
                    row.push_str(",0,,,,,");
                    (false, row)
                }
            }
        })
        .collect();

    let mut csv = String::new();
    csv.push_str(&SWEEP_COLUMNS.join(","));
    csv.push('\n');
    for (_, row) in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let reachable = rows.iter().filter(|(ok, _)| *ok).count();
    match &args.out {
        Some(path) => {
            write_file(path, |w| w.write_all(csv.as_bytes()))?;
            writeln!(out, "{} poses, {reachable} reachable; wrote {}", rows.len(), path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}
