//! Command-line front end: flag parsing with optional key=value config
//! files, command dispatch, and all file output (CSV tables, versioned JSON
//! reports, 16-bit PGM heatmaps).

use crate::domain::{eta_k_convexity, DomainSpec};
use crate::error::{Error, Result};
use crate::expr::{eval, parse, Expr};
use crate::geometry::{eta_eigenvalues, principal_curvatures, spacelike_margin, GraphJet};
use crate::grid::{assemble, FieldU, Grid, Psi};
use crate::linalg::Mat;
use crate::operator::evaluate;
use crate::pgm::write_pgm16;
use crate::solver::{
    continuation_solve, hyperboloid_cap_init, sample_psi_z_min, ContinuationConfig, PsiExpr,
};
use crate::symfun::{in_tilde_gamma, QuotientSpec};
use clap::Parser;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug, Default)]
#[command(
    name = "etaq",
    about = "Prescribed curvature-quotient solver for spacelike graphs",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Command: solve | curvature | certify-domain | verify-props
    #[arg(long)]
    pub cmd: Option<String>,
    /// Ambient horizontal dimension (2 or 3 for grids)
    #[arg(long)]
    pub n: Option<usize>,
    /// Numerator index k of the curvature quotient
    #[arg(long)]
    pub k: Option<usize>,
    /// Denominator index l (0 gives plain sigma_k)
    #[arg(long)]
    pub l: Option<usize>,
    /// Domain, e.g. ball:R=0.5, box:half=1,0.8, ellipsoid:axes=2,1,
    /// superellipsoid:axes=2,1,p=4
    #[arg(long)]
    pub domain: Option<String>,
    /// Grid spacing
    #[arg(long)]
    pub h: Option<f64>,
    /// Right-hand side expression in x1..xn and z
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Graph expression in x1..xn (curvature mode)
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized verification suites
    #[arg(long)]
    pub seed: Option<u64>,
    /// Absolute Newton tolerance override
    #[arg(long)]
    pub tol: Option<f64>,
    /// Required spacelike margin for accepted iterates
    #[arg(long)]
    pub theta_margin: Option<f64>,
    /// key=value config file; explicit flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run configuration, echoed verbatim into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub domain: String,
    pub h: f64,
    pub psi: Option<String>,
    pub u: Option<String>,
    pub out: String,
    pub seed: u64,
    pub tol: Option<f64>,
    pub theta_margin: f64,
}

const CONFIG_KEYS: [&str; 12] = [
    "cmd", "n", "k", "l", "domain", "h", "psi", "u", "out", "seed", "tol", "theta-margin",
];

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line {} is not key=value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown config key '{key}'")));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

/// Merges config-file entries under explicit flags and validates the
/// per-command required fields.
pub fn build_config(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(p) => parse_config_file(p)?,
        None => BTreeMap::new(),
    };
    let get = |key: &str| file.get(key).map(|s| s.as_str());
    let command = cli
        .cmd
        .clone()
        .or_else(|| get("cmd").map(String::from))
        .ok_or_else(|| Error::Config("missing --cmd".into()))?;
    let n = match cli.n {
        Some(v) => Some(v),
        None => get("n").map(|v| parse_num("n", v)).transpose()?,
    };
    let k = match cli.k {
        Some(v) => Some(v),
        None => get("k").map(|v| parse_num("k", v)).transpose()?,
    };
    let l = match cli.l {
        Some(v) => Some(v),
        None => get("l").map(|v| parse_num("l", v)).transpose()?,
    };
    let domain = cli.domain.clone().or_else(|| get("domain").map(String::from));
    let h = match cli.h {
        Some(v) => Some(v),
        None => get("h").map(|v| parse_num("h", v)).transpose()?,
    };
    let psi = cli.psi.clone().or_else(|| get("psi").map(String::from));
    let u = cli.u.clone().or_else(|| get("u").map(String::from));
    let out = cli
        .out
        .clone()
        .map(|p| p.to_string_lossy().into_owned())
        .or_else(|| get("out").map(String::from))
        .unwrap_or_else(|| ".".into());
    let seed = match cli.seed {
        Some(v) => v,
        None => get("seed").map(|v| parse_num("seed", v)).transpose()?.unwrap_or(1),
    };
    let tol = match cli.tol {
        Some(v) => Some(v),
        None => get("tol").map(|v| parse_num("tol", v)).transpose()?,
    };
    let theta_margin = match cli.theta_margin {
        Some(v) => v,
        None => get("theta-margin")
            .map(|v| parse_num("theta-margin", v))
            .transpose()?
            .unwrap_or(0.05),
    };

    let needs = |cond: bool, what: &str| -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Config(format!("missing --{what} for --cmd {command}")))
        }
    };
    match command.as_str() {
        "solve" => {
            needs(n.is_some(), "n")?;
            needs(k.is_some(), "k")?;
            needs(domain.is_some(), "domain")?;
            needs(h.is_some(), "h")?;
            needs(psi.is_some(), "psi")?;
        }
        "curvature" => {
            needs(n.is_some(), "n")?;
            needs(k.is_some(), "k")?;
            needs(domain.is_some(), "domain")?;
            needs(h.is_some(), "h")?;
            needs(u.is_some(), "u")?;
        }
        "certify-domain" => {
            needs(n.is_some(), "n")?;
            needs(k.is_some(), "k")?;
            needs(domain.is_some(), "domain")?;
        }
        "verify-props" => {}
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    }
    Ok(RunConfig {
        command,
        n: n.unwrap_or(0),
        k: k.unwrap_or(0),
        l: l.unwrap_or(0),
        domain: domain.unwrap_or_default(),
        h: h.unwrap_or(0.0),
        psi,
        u,
        out,
        seed,
        tol,
        theta_margin,
    })
}

/// Parses domain syntax like `ball:R=0.5`, `box:half=1,0.8`,
/// `ellipsoid:axes=2,1,1`, `superellipsoid:axes=2,1,p=4`.
pub fn parse_domain(text: &str, n: usize) -> Result<DomainSpec> {
    let (shape, params) = text
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("domain '{text}' must be shape:params")))?;
    let mut keyed: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for piece in params.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        if let Some((key, v)) = piece.split_once('=') {
            let key = key.trim().to_string();
            let val: f64 = parse_num(&key, v.trim())?;
            keyed.entry(key.clone()).or_default().push(val);
            current = Some(key);
        } else {
            let key = current
                .clone()
                .ok_or_else(|| Error::Config(format!("dangling value '{piece}' in domain")))?;
            let val: f64 = parse_num(&key, piece)?;
            keyed.entry(key).or_default().push(val);
        }
    }
    let list = |key: &str| -> Result<Vec<f64>> {
        keyed
            .get(key)
            .cloned()
            .ok_or_else(|| Error::Config(format!("domain '{shape}' needs {key}=...")))
    };
    let dom = match shape {
        "ball" => {
            let r = list("R").or_else(|_| list("r"))?;
            if r.len() != 1 {
                return Err(Error::Config("ball takes a single radius".into()));
            }
            DomainSpec::ball(n, r[0])?
        }
        "box" => DomainSpec::boxdom(list("half")?)?,
        "ellipsoid" => DomainSpec::ellipsoid(list("axes")?)?,
        "superellipsoid" => {
            let p = list("p")?;
            if p.len() != 1 {
                return Err(Error::Config("superellipsoid takes a single p".into()));
            }
            DomainSpec::superellipsoid(list("axes")?, p[0])?
        }
        other => return Err(Error::Config(format!("unknown domain shape '{other}'"))),
    };
    if dom.n != n {
        return Err(Error::Config(format!(
            "domain dimension {} does not match --n {n}",
            dom.n
        )));
    }
    Ok(dom)
}

pub fn run(cli: Cli) -> i32 {
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let outcome = match cfg.command.as_str() {
        "solve" => run_solve(&cfg),
        "curvature" => run_curvature(&cfg),
        "certify-domain" => run_certify(&cfg),
        "verify-props" => run_verify_props(&cfg),
        _ => unreachable!("validated in build_config"),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn report_scaffold(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "command": cfg.command,
        "config": cfg,
        "seed": cfg.seed,
        "warnings": [],
        "error": null,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn fmt_row(values: &[f64]) -> String {
    let mut line = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v:.16e}");
    }
    line
}

/// Full-lattice raster of a per-unknown field, exterior filled with 0.
fn raster(grid: &Grid, values: &[f64]) -> Vec<f64> {
    (0..grid.num_nodes())
        .map(|flat| match grid.unknown_at(flat) {
            Some(p) => values[p],
            None => 0.0,
        })
        .collect()
}

/// Writes heatmaps for a field: the full plane for n = 2 or the three
/// central axis-normal slices for n = 3. Returns (file name, min, max).
fn write_heatmaps(
    grid: &Grid,
    values: &[f64],
    stem: &str,
    dir: &Path,
) -> Result<Vec<(String, f64, f64)>> {
    let dims = grid.dims();
    let full = raster(grid, values);
    let mut written = Vec::new();
    if grid.n() == 2 {
        let name = format!("{stem}.pgm");
        let (min, max) = write_pgm16(&dir.join(&name), dims[1], dims[0], &full)?;
        written.push((name, min, max));
    } else {
        for axis in 0..grid.n() {
            let (a, b) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mid = dims[axis] / 2;
            let mut plane = Vec::with_capacity(dims[a] * dims[b]);
            for ia in 0..dims[a] {
                for ib in 0..dims[b] {
                    let mut mi = [0usize; 3];
                    mi[axis] = mid;
                    mi[a] = ia;
                    mi[b] = ib;
                    let flat = (mi[0] * dims[1] + mi[1]) * dims[2] + mi[2];
                    plane.push(full[flat]);
                }
            }
            let name = format!("{stem}_slice_x{}.pgm", axis + 1);
            let (min, max) = write_pgm16(&dir.join(&name), dims[b], dims[a], &plane)?;
            written.push((name, min, max));
        }
    }
    Ok(written)
}

fn write_solution_csv(path: &Path, grid: &Grid, u: &FieldU) -> Result<()> {
    let mut text = String::new();
    for d in 0..grid.n() {
        let _ = write!(text, "{}x{}", if d > 0 { "," } else { "" }, d + 1);
    }
    text.push_str(",u\n");
    for p in 0..grid.num_unknowns() {
        let mut row = grid.position_of_unknown(p).to_vec();
        row.push(u.values[p]);
        text.push_str(&fmt_row(&row));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn run_solve(cfg: &RunConfig) -> Result<i32> {
    let dir = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&dir)?;
    let mut report = report_scaffold(cfg);
    match solve_inner(cfg, &dir, &mut report) {
        Ok(converged) => {
            write_json(&dir.join("report.json"), &report)?;
            Ok(if converged { 0 } else { 1 })
        }
        Err(e) => {
            report["error"] = json!({"message": format!("{e}"), "exit_code": e.exit_code()});
            let _ = write_json(&dir.join("report.json"), &report);
            Err(e)
        }
    }
}

fn push_warning(report: &mut serde_json::Value, text: String) {
    eprintln!("warning: {text}");
    report["warnings"].as_array_mut().expect("warnings array").push(json!(text));
}

fn solve_inner(cfg: &RunConfig, dir: &Path, report: &mut serde_json::Value) -> Result<bool> {
    let spec = QuotientSpec::new(cfg.n, cfg.k, cfg.l)?;
    if cfg.k == cfg.n {
        push_warning(
            report,
            "k = n is outside the guaranteed existence/uniqueness regime; proceeding".into(),
        );
    }
    let dom = parse_domain(&cfg.domain, cfg.n)?;
    let grid = Grid::build(&dom, cfg.h)?;
    let psi = PsiExpr::new(parse(cfg.psi.as_deref().unwrap_or(""), cfg.n, true)?);

    match sample_psi_z_min(&psi, &grid, -2.0 * dom.inradius(), 10_000) {
        Ok(min) if min < 0.0 => push_warning(
            report,
            format!("psi_z sampled negative (min {min:.3e}); uniqueness is not guaranteed"),
        ),
        Ok(_) => {}
        Err(e) => push_warning(report, format!("could not sample psi_z: {e}")),
    }

    let mut ccfg = ContinuationConfig {
        theta_margin: cfg.theta_margin,
        ..Default::default()
    };
    let init = hyperboloid_cap_init(&spec, &dom, &grid, &psi, ccfg.theta_margin)?;
    let psi_sup = {
        let mut sup = 0.0f64;
        for p in 0..grid.num_unknowns() {
            let (v, _) = psi.at_node(p, grid.position_of_unknown(p), init.field.values[p])?;
            sup = sup.max(v.abs());
        }
        sup
    };
    ccfg.newton_tol = cfg.tol.unwrap_or(1e-9 * psi_sup.max(1.0));
    report["init"] = json!({
        "rho": init.rho,
        "verified_subsolution": init.verified_subsolution,
        "worst_violation": init.worst_violation,
    });
    report["effective_newton_tol"] = json!(ccfg.newton_tol);

    let solve = continuation_solve(&spec, &grid, &psi, &init.field, &ccfg)?;
    report["solve"] = serde_json::to_value(&solve)?;

    write_solution_csv(&dir.join("solution.csv"), &grid, &solve.field)?;
    let mut heatmaps = serde_json::Map::new();
    for (name, min, max) in write_heatmaps(&grid, &solve.field.values, "u", dir)? {
        heatmaps.insert(name, json!({"min": min, "max": max}));
    }
    if let Ok(sys) = assemble(&spec, &grid, &solve.field, &psi) {
        for (name, min, max) in write_heatmaps(&grid, &sys.residual, "residual", dir)? {
            heatmaps.insert(name, json!({"min": min, "max": max}));
        }
    }
    report["outputs"] = json!({"solution_csv": "solution.csv", "heatmaps": heatmaps});
    if !solve.converged {
        push_warning(report, "continuation did not converge; see t_trace".into());
    }
    Ok(solve.converged)
}

/// Second-order central finite-difference jet of a closed-form expression.
fn expression_jet(expr: &Expr, x: &[f64]) -> Result<GraphJet> {
    let n = x.len();
    let delta = 1e-4;
    let f = |y: &[f64]| eval(expr, y, 0.0);
    let u0 = f(x)?;
    let mut du = vec![0.0; n];
    let mut d2u = Mat::zeros(n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += delta;
        xm[i] -= delta;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        du[i] = (fp - fm) / (2.0 * delta);
        d2u.set(i, i, (fp - 2.0 * u0 + fm) / (delta * delta));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let probe = |si: f64, sj: f64| -> Result<f64> {
                let mut y = x.to_vec();
                y[i] += si * delta;
                y[j] += sj * delta;
                f(&y)
            };
            let v = (probe(1.0, 1.0)? + probe(-1.0, -1.0)?
                - probe(1.0, -1.0)?
                - probe(-1.0, 1.0)?)
                / (4.0 * delta * delta);
            d2u.set(i, j, v);
            d2u.set(j, i, v);
        }
    }
    GraphJet::new(x.to_vec(), u0, du, d2u)
}

fn run_curvature(cfg: &RunConfig) -> Result<i32> {
    let dir = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&dir)?;
    let spec = QuotientSpec::new(cfg.n, cfg.k, cfg.l)?;
    let dom = parse_domain(&cfg.domain, cfg.n)?;
    let grid = Grid::build(&dom, cfg.h)?;
    let expr = parse(cfg.u.as_deref().unwrap_or(""), cfg.n, false)?;

    let jets: Vec<GraphJet> = (0..grid.num_unknowns())
        .map(|p| expression_jet(&expr, grid.position_of_unknown(p)))
        .collect::<Result<_>>()?;
    // reject non-spacelike input naming the worst node
    let mut worst = (f64::INFINITY, 0usize);
    for (p, jet) in jets.iter().enumerate() {
        let m = spacelike_margin(jet);
        if m < worst.0 {
            worst = (m, p);
        }
    }
    if worst.0 <= 0.0 {
        let flat = grid.node_of_unknown(worst.1);
        return Err(Error::NotSpacelike {
            margin: worst.0,
            context: format!(
                "graph expression at node {flat}, x = {:?}",
                grid.position_of_unknown(worst.1)
            ),
        });
    }

    let n = cfg.n;
    let mut text = String::new();
    for d in 0..n {
        let _ = write!(text, "{}x{}", if d > 0 { "," } else { "" }, d + 1);
    }
    text.push_str(",u");
    for i in 0..n {
        let _ = write!(text, ",kappa{}", i + 1);
    }
    for i in 0..n {
        let _ = write!(text, ",lambda{}", i + 1);
    }
    text.push_str(",H,f,admissible\n");
    let mut inadmissible = 0usize;
    for (p, jet) in jets.iter().enumerate() {
        let kappa = principal_curvatures(jet)?;
        let lambda = eta_eigenvalues(jet)?;
        let mean: f64 = kappa.values().iter().sum();
        let admissible = in_tilde_gamma(cfg.k, &kappa);
        let f = if admissible { evaluate(&spec, jet)? } else { f64::NAN };
        if !admissible {
            inadmissible += 1;
        }
        let mut row = grid.position_of_unknown(p).to_vec();
        row.push(jet.u);
        row.extend_from_slice(kappa.values());
        row.extend_from_slice(lambda.values());
        row.push(mean);
        row.push(f);
        text.push_str(&fmt_row(&row));
        let _ = write!(text, ",{}", u8::from(admissible));
        text.push('\n');
    }
    std::fs::write(dir.join("curvature.csv"), text)?;

    let mut report = report_scaffold(cfg);
    report["nodes"] = json!(grid.num_unknowns());
    report["inadmissible_nodes"] = json!(inadmissible);
    report["min_spacelike_margin"] = json!(worst.0);
    report["outputs"] = json!({"curvature_csv": "curvature.csv"});
    if inadmissible > 0 {
        push_warning(
            &mut report,
            format!("{inadmissible} nodes have curvatures outside the admissible cone"),
        );
    }
    write_json(&dir.join("report.json"), &report)?;
    Ok(0)
}

fn run_certify(cfg: &RunConfig) -> Result<i32> {
    let dir = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&dir)?;
    let dom = parse_domain(&cfg.domain, cfg.n)?;
    let samples = 64 * cfg.n.pow(cfg.n as u32 - 1);
    let cert = eta_k_convexity(&dom, cfg.k, (1u64 << 20) as f64, samples)?;
    let mut report = report_scaffold(cfg);
    report["certificate"] = serde_json::to_value(&cert)?;
    write_json(&dir.join("certificate.json"), &report)?;
    Ok(0)
}

fn run_verify_props(cfg: &RunConfig) -> Result<i32> {
    let dir = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&dir)?;
    let suites = crate::props::run_all(cfg.seed, true);
    let all_passed = suites.iter().all(|s| s.passed());
    let mut report = report_scaffold(cfg);
    report["suites"] = serde_json::to_value(&suites)?;
    report["all_passed"] = json!(all_passed);
    write_json(&dir.join("props.json"), &report)?;
    for s in &suites {
        println!(
            "{:<24} {:>6} samples  {:>3} failures  worst {:.3e}",
            s.name, s.samples, s.failures, s.worst
        );
    }
    Ok(if all_passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli_with(f: impl FnOnce(&mut Cli)) -> Cli {
        let mut c = Cli::default();
        f(&mut c);
        c
    }

    #[test]
    fn config_file_merges_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# sample\ncmd=solve\nn=2\nk=1\nl=0\ndomain=ball:R=0.5\nh=0.125\npsi=2\nseed=7\n",
        )
        .unwrap();
        let cli = cli_with(|c| {
            c.config = Some(path.clone());
            c.h = Some(0.0625);
        });
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.command, "solve");
        assert_eq!(cfg.h, 0.0625, "flag overrides file");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.psi.as_deref(), Some("2"));
        assert_eq!(cfg.theta_margin, 0.05);
    }

    #[test]
    fn missing_required_field_is_usage_error() {
        let cli = cli_with(|c| {
            c.cmd = Some("solve".into());
            c.n = Some(2);
            c.k = Some(1);
            c.domain = Some("ball:R=0.5".into());
            c.h = Some(0.125);
        });
        let err = build_config(&cli).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(format!("{err}").contains("psi"));
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "cmd=solve\nbogus=1\n").unwrap();
        let cli = cli_with(|c| c.config = Some(path.clone()));
        let err = build_config(&cli).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(format!("{err}").contains("bogus"));
    }

    #[test]
    fn domain_syntax_roundtrip() {
        let d = parse_domain("ball:R=0.5", 2).unwrap();
        assert_eq!(d.inradius(), 0.5);
        let d = parse_domain("box:half=1,0.8", 2).unwrap();
        assert_eq!(d.half_widths(), vec![1.0, 0.8]);
        let d = parse_domain("ellipsoid:axes=2,1,1", 3).unwrap();
        assert_eq!(d.half_widths(), vec![2.0, 1.0, 1.0]);
        let d = parse_domain("superellipsoid:axes=2,1,p=4", 2).unwrap();
        assert!(d.smooth_boundary());
        assert!(parse_domain("ball:R=0.5", 3).is_ok());
        assert!(parse_domain("box:half=1,1,1", 2).is_err(), "dimension mismatch");
        assert!(parse_domain("pyramid:half=1", 2).is_err());
        assert!(parse_domain("ball", 2).is_err());
    }

    #[test]
    fn expression_jets_match_analytic_hyperboloid() {
        let expr = parse("sqrt(1+x1^2+x2^2)", 2, false).unwrap();
        let jet = expression_jet(&expr, &[0.3, -0.2]).unwrap();
        let want = crate::geometry::hyperboloid_jet(1.0, &[0.3, -0.2], 0.0);
        for i in 0..2 {
            assert!((jet.du[i] - want.du[i]).abs() < 1e-8);
            for j in 0..2 {
                assert!((jet.d2u.get(i, j) - want.d2u.get(i, j)).abs() < 1e-6);
            }
        }
    }
}
