//! One pipeline per scenario kind.

use std::io;

use num_complex::Complex64 as C64;
use pointint::birman::{critical_depth, resonance_profile, threshold_classify, Classification, Potential, ThresholdOptions};
use pointint::gamma::{find_bound_states, scan_real_axis, PointConfig, SearchOptions};
use pointint::geom::{dist, Vec3};
use pointint::green::Wavenumber;
use pointint::linalg::{frobenius, CMat, Lu};
use pointint::opalg::{block_residual, deift_reduce, deift_residual, jn_invert, JnOutcome};
use pointint::packet::WavePacket;
use pointint::scaling::{convergence_sweep, CenterSpec, Observables, ResolventProbe, ScaledSystem};
use pointint::waveop::{isometry_check, wave_pairing, Direction, WaveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{DirectionSpec, ExpectedClass, ExperimentConfig, RandomConfigs, Scenario};
use crate::report::{emit_report, num, Artifacts, LongTable, Table};

#[derive(Debug)]
pub enum Failure {
    /// A library routine refused or failed; its message is kept verbatim.
    Numeric(String),
    Io(io::Error),
}

impl From<pointint::Error> for Failure {
    fn from(e: pointint::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

pub struct Outcome {
    pub checks: Vec<Check>,
    pub summary: Map<String, Value>,
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn run(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    match cfg.scenario {
        Scenario::Spectrum => spectrum(cfg, out),
        Scenario::GammaScan => gamma_scan(cfg, out),
        Scenario::Waveop => waveop(cfg, out),
        Scenario::Threshold => threshold(cfg, out),
        Scenario::ScalingSweep => sweep(cfg, out),
        Scenario::Identities => identities(cfg, out),
    }
}

fn spectrum(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.spectrum.as_ref().expect("resolved");
    let points = cfg.point_config().expect("resolved");
    let found = find_bound_states(&points, spec.kappa_max, SearchOptions::default())?;
    let mut states = found.states.clone();
    states.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    let mut table = Table::new(&["kappa", "energy", "multiplicity"]);
    for s in &states {
        table.push(vec![num(s.kappa), num(s.energy), s.multiplicity.to_string()]);
        out.log(format!("bound state kappa = {:.12} (energy {:.12}), multiplicity {}", s.kappa, s.energy, s.multiplicity));
    }
    for d in &found.diagnostics {
        out.log(format!("note: {d}"));
    }
    out.write("results.csv", &table.to_csv())?;
    let mut checks = Vec::new();
    if !spec.expected_kappa.is_empty() {
        let mut want = spec.expected_kappa.clone();
        want.sort_by(f64::total_cmp);
        let count_ok = want.len() == states.len();
        checks.push(check("state count", count_ok, format!("{} found, {} expected", states.len(), want.len())));
        if count_ok {
            let worst = states.iter().zip(&want).map(|(s, w)| (s.kappa - w).abs()).fold(0.0, f64::max);
            checks.push(check(
                "kappa values",
                worst < spec.tolerance,
                format!("max |kappa - expected| = {worst:.3e} (tol {:.1e})", spec.tolerance),
            ));
        }
    }
    let mut summary = Map::new();
    summary.insert(
        "states".into(),
        states.iter().map(|s| json!({"kappa": s.kappa, "energy": s.energy, "multiplicity": s.multiplicity})).collect(),
    );
    summary.insert("kappa_max_searched".into(), json!(found.kappa_max));
    summary.insert("diagnostics".into(), json!(found.diagnostics));
    Ok(Outcome { checks, summary })
}

fn random_configs(r: &RandomConfigs, rng: &mut ChaCha8Rng) -> Vec<PointConfig> {
    let mut configs = Vec::with_capacity(r.count);
    while configs.len() < r.count {
        let n = rng.gen_range(1..=r.max_centers);
        let mut centers: Vec<Vec3> = Vec::with_capacity(n);
        let mut attempts = 0;
        while centers.len() < n && attempts < 10_000 {
            attempts += 1;
            let c = [0, 1, 2].map(|_| rng.gen_range(-r.half_width..r.half_width));
            if centers.iter().all(|y| dist(*y, c) > r.min_separation) {
                centers.push(c);
            }
        }
        let alpha = (0..centers.len()).map(|_| rng.gen_range(r.alpha_range[0]..r.alpha_range[1])).collect();
        if let Ok(cfg) = PointConfig::new(centers, alpha) {
            configs.push(cfg);
        }
    }
    configs
}

fn gamma_scan(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.gamma_scan.as_ref().expect("resolved");
    let configs = match &spec.random {
        Some(r) => random_configs(r, &mut ChaCha8Rng::seed_from_u64(cfg.seed)),
        None => vec![cfg.point_config().expect("resolved")],
    };
    let mut table = Table::new(&["config", "centers", "minimum", "argmin"]);
    let mut plot = LongTable::new();
    let mut worst = f64::INFINITY;
    let mut listed = Vec::new();
    for (i, points) in configs.iter().enumerate() {
        let scan = scan_real_axis(points, spec.k_min, spec.k_max, spec.nodes)?;
        table.push(vec![i.to_string(), points.len().to_string(), num(scan.minimum), num(scan.argmin)]);
        for (k, s) in scan.k.iter().zip(&scan.sigma_min) {
            plot.point(&format!("config{i}"), *k, *s);
        }
        out.log(format!("config {i}: {} centre(s), min sigma {:.6e} at k = {:.6}", points.len(), scan.minimum, scan.argmin));
        worst = worst.min(scan.minimum);
        listed.push(json!({
            "centers": points.centers(),
            "strengths": points.strengths(),
            "minimum": scan.minimum,
            "argmin": scan.argmin,
        }));
    }
    out.write("results.csv", &table.to_csv())?;
    out.write("plot.csv", &plot.to_csv())?;
    let checks = vec![check(
        "real-axis nonsingularity",
        worst > 0.0,
        format!("smallest sigma_min over {} configuration(s): {worst:.6e}", configs.len()),
    )];
    let mut summary = Map::new();
    summary.insert("configurations".into(), Value::Array(listed));
    summary.insert("minimum".into(), json!(worst));
    Ok(Outcome { checks, summary })
}

fn waveop(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.waveop.as_ref().expect("resolved");
    let points = cfg.point_config().expect("resolved");
    let packets: Vec<WavePacket> = spec.packets.iter().map(|p| p.build().expect("validated")).collect();
    let dir = match spec.direction {
        DirectionSpec::Plus => Direction::Plus,
        DirectionSpec::Minus => Direction::Minus,
    };
    let opts = WaveOptions::default();
    let mut pairs = Table::new(&["u", "v", "free_re", "free_im", "correction_re", "correction_im", "value_re", "value_im"]);
    let mut listed = Vec::new();
    for [i, j] in &spec.pairs {
        let (u, v) = (&packets[*i], &packets[*j]);
        let value = wave_pairing(&points, dir, u, v, opts)?;
        let free = u.inner(v);
        let corr = value - free;
        pairs.push(vec![
            i.to_string(),
            j.to_string(),
            num(free.re),
            num(free.im),
            num(corr.re),
            num(corr.im),
            num(value.re),
            num(value.im),
        ]);
        out.log(format!("<W u{i}, u{j}> = {:.12e} {:+.12e}i (free part {:.12e} {:+.12e}i)", value.re, value.im, free.re, free.im));
        listed.push(json!({"u": i, "v": j, "value": complex(value), "free": complex(free)}));
    }
    out.write("results.csv", &pairs.to_csv())?;
    let mut iso = Table::new(&["packet", "norm_u_sq", "norm_wu_sq", "rel_err"]);
    let mut worst = 0.0f64;
    for (i, u) in packets.iter().enumerate() {
        // ||W- u|| = ||W+ conj(u)||
        let probe = if dir == Direction::Minus { u.conj() } else { u.clone() };
        let c = isometry_check(&points, &probe, opts)?;
        iso.push(vec![i.to_string(), num(c.norm_u_sq), num(c.norm_wu_sq), num(c.rel_err)]);
        out.log(format!("packet {i}: ||u||^2 = {:.12e}, ||W u||^2 = {:.12e}, relative error {:.3e}", c.norm_u_sq, c.norm_wu_sq, c.rel_err));
        worst = worst.max(c.rel_err);
    }
    out.write("isometry.csv", &iso.to_csv())?;
    let checks = vec![check(
        "isometry",
        worst < spec.isometry_tolerance,
        format!("max relative error {worst:.3e} (tol {:.1e})", spec.isometry_tolerance),
    )];
    let mut summary = Map::new();
    summary.insert("pairings".into(), Value::Array(listed));
    summary.insert("isometry_max_rel_err".into(), json!(worst));
    Ok(Outcome { checks, summary })
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Regular => "regular",
        Classification::ResonanceOnly => "resonance-only",
        Classification::EigenvalueOnly => "eigenvalue-only",
        Classification::Mixed => "mixed",
        Classification::Indeterminate => "indeterminate",
    }
}

fn expected_matches(e: ExpectedClass, c: Classification) -> bool {
    matches!(
        (e, c),
        (ExpectedClass::Regular, Classification::Regular)
            | (ExpectedClass::ResonanceOnly, Classification::ResonanceOnly)
            | (ExpectedClass::EigenvalueOnly, Classification::EigenvalueOnly)
            | (ExpectedClass::Mixed, Classification::Mixed)
    )
}

/// The potential of a label, retuned to the discrete critical depth if asked.
fn tuned(label: &str, tune: bool, finest: usize) -> Result<Potential, Failure> {
    let p = Potential::parse(label)?;
    if tune {
        Ok(p.with_depth(critical_depth(&p, finest)?))
    } else {
        Ok(p)
    }
}

fn threshold(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.threshold.as_ref().expect("resolved");
    let finest = *spec.resolutions.last().expect("validated");
    let potential = tuned(&spec.potential, spec.tune_critical, finest)?;
    out.log(format!("potential {}", potential.label()));
    let opts = ThresholdOptions::default();
    let rep = threshold_classify(&potential, spec.slope, &spec.resolutions, opts)?;
    let mut header = vec!["resolution".to_string(), "nodes".to_string()];
    header.extend((1..=opts.reported).map(|i| format!("sigma_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header);
    let mut plot = LongTable::new();
    for level in &rep.trace {
        let mut row = vec![level.resolution.to_string(), level.nodes.to_string()];
        row.extend((0..opts.reported).map(|i| level.smallest.get(i).map_or_else(|| num(f64::NAN), |s| num(*s))));
        table.push(row);
        for (i, s) in level.smallest.iter().enumerate() {
            plot.point(&format!("sigma_{}", i + 1), level.resolution as f64, *s);
        }
        let shown: Vec<String> = level.smallest.iter().map(|s| format!("{s:.3e}")).collect();
        out.log(format!("resolution {} ({} nodes): smallest singular values {}", level.resolution, level.nodes, shown.join(", ")));
    }
    out.write("results.csv", &table.to_csv())?;
    out.write("plot.csv", &plot.to_csv())?;
    out.log(format!("classification: {}", class_name(rep.classification)));
    for w in &rep.warnings {
        out.log(format!("warning: {w}"));
    }
    let mut summary = Map::new();
    summary.insert("potential".into(), json!(potential.label()));
    summary.insert("classification".into(), json!(class_name(rep.classification)));
    summary.insert("kernel_dimension".into(), json!(rep.phi.len()));
    summary.insert("alpha".into(), json!(rep.alpha));
    summary.insert("l_phi1".into(), json!(rep.l_phi1));
    summary.insert("gram_condition".into(), json!(rep.gram_condition));
    summary.insert("warnings".into(), json!(rep.warnings));
    if !rep.phi.is_empty() && !spec.profile_radii.is_empty() {
        let prof = resonance_profile(&rep.grid, &rep.phi[0], &spec.profile_radii, [0.3, -0.5, 0.8])?;
        let mut t = Table::new(&["r", "u", "r_u"]);
        for p in &prof {
            t.push(vec![num(p.r), num(p.u), num(p.r_u)]);
        }
        out.write("profile.csv", &t.to_csv())?;
        summary.insert("profile_r_u".into(), prof.iter().map(|p| json!([p.r, p.r_u])).collect());
    }
    let mut checks = vec![check(
        "determinate",
        rep.classification != Classification::Indeterminate,
        format!("classification {}", class_name(rep.classification)),
    )];
    if let Some(e) = spec.expect {
        checks.push(check(
            "expected classification",
            expected_matches(e, rep.classification),
            format!("got {}, expected {}", class_name(rep.classification), json!(e)),
        ));
    }
    Ok(Outcome { checks, summary })
}

fn sweep(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.sweep.as_ref().expect("resolved");
    let finest = *spec.resolutions.last().expect("validated");
    let labels = spec.potential_labels();
    let slopes = spec.slope_list();
    let mut specs = Vec::with_capacity(labels.len());
    for (label, slope) in labels.iter().zip(&slopes) {
        let p = Potential::parse(label)?;
        let p = if spec.tune_critical && p.depth() > 0.0 { p.with_depth(critical_depth(&p, finest)?) } else { p };
        out.log(format!("centre potential {} with coupling slope {slope}", p.label()));
        specs.push(CenterSpec { potential: p, slope: *slope });
    }
    let sys = ScaledSystem::new(spec.centers.clone(), specs.clone(), &spec.resolutions, ThresholdOptions::default())?;
    let mut centres = Vec::new();
    for (j, rep) in sys.reports().iter().enumerate() {
        let alpha = rep.alpha.map_or_else(|| "none".to_string(), |a| format!("{a:.12}"));
        out.log(format!("centre {j}: {} (alpha {alpha})", class_name(rep.classification)));
        centres.push(json!({
            "center": spec.centers[j],
            "potential": specs[j].potential.label(),
            "slope": specs[j].slope,
            "classification": class_name(rep.classification),
            "alpha": rep.alpha,
        }));
    }
    let packets: Vec<WavePacket> = spec.packets.iter().map(|p| p.build().expect("validated")).collect();
    let pairs = spec.pairs.iter().map(|[i, j]| (packets[*i].clone(), packets[*j].clone())).collect();
    let resolvent = match &spec.resolvent {
        Some(r) => Some(ResolventProbe {
            k: Wavenumber::new(C64::new(r.k[0], r.k[1]))?,
            u: packets[r.packet].clone(),
            points: r.points.clone(),
        }),
        None => None,
    };
    let obs = Observables { pairs, resolvent };
    let rep = convergence_sweep(&sys, &spec.epsilons, &obs)?;
    let trend = emit_report(out, &rep.records)?;
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for r in &rep.records {
        out.log(format!(
            "eps = {}: wave_err {:.6e}, resolvent_err {:.6e}, min_sv {:.6e} ({:.2} s)",
            r.epsilon, r.wave_err, r.resolvent_err, r.min_sv, r.seconds
        ));
        if let Some(f) = &r.failure {
            out.log(format!("eps = {}: {f}", r.epsilon));
            failures.push(json!({"epsilon": r.epsilon, "error": f}));
        }
    }
    checks.push(check("all eps solved", failures.is_empty(), format!("{} failure(s)", failures.len())));
    checks.push(check("errors decrease", trend.as_str() == "decreasing", format!("trend {}", trend.as_str())));
    let mut summary = Map::new();
    summary.insert("trend".into(), json!(trend.as_str()));
    summary.insert("verdict".into(), json!(rep.verdict.as_str()));
    summary.insert("centres".into(), Value::Array(centres));
    summary.insert("wave_reference".into(), rep.wave_reference.iter().map(|z| complex(*z)).collect());
    summary.insert("resolvent_reference".into(), rep.resolvent_reference.iter().map(|z| complex(*z)).collect());
    summary.insert("failures".into(), Value::Array(failures));
    Ok(Outcome { checks, summary })
}

fn random_mat(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `shift * 1 + M / sqrt(n)`, invertible with high probability for `shift > 1`.
fn shifted(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    let m = random_mat(rng, n, n);
    CMat::from_fn(n, n, |i, j| m[(i, j)] * scale + if i == j { shift } else { 0.0 })
}

/// Oblique projection of rank `r`.
fn projection(rng: &mut ChaCha8Rng, n: usize, r: usize) -> CMat {
    let x = random_mat(rng, n, r);
    let noise = random_mat(rng, n, r);
    let y = CMat::from_fn(n, r, |i, j| x[(i, j)] + noise[(i, j)] * 0.3);
    let inner = Lu::new(&(y.adjoint() * &x)).inverse();
    &x * inner * y.adjoint()
}

fn identities(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Outcome, Failure> {
    let spec = cfg.identities.as_ref().expect("resolved");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&["trial", "identity", "size", "residual"]);
    let mut worst = [0.0f64; 3];
    let mut failures = Vec::new();
    let names = ["projection", "reduction", "block"];
    for t in 0..spec.trials {
        let n = rng.gen_range(3..12);
        let r = rng.gen_range(1..n);
        let a = shifted(&mut rng, n, 2.0);
        let s = projection(&mut rng, n, r);
        let oracle = Lu::new(&a).inverse();
        let jn = match jn_invert(&a, &s) {
            Ok(JnOutcome::Inverse(inv)) => Ok(frobenius(&(inv - &oracle)) / frobenius(&oracle)),
            Ok(JnOutcome::Singular { sigma }) => Err(format!("reported singular (sigma {sigma:.3e})")),
            Err(e) => Err(e.to_string()),
        };
        let big = rng.gen_range(6..20);
        let small = rng.gen_range(1..5);
        let l = shifted(&mut rng, big, 0.0);
        let b = random_mat(&mut rng, big, small);
        let raw = random_mat(&mut rng, small, small);
        let g = CMat::from_fn(small, small, |i, j| (raw[(i, j)] + raw[(j, i)]) * 0.15);
        let am = random_mat(&mut rng, small, big);
        let deift = deift_reduce(&l, &b, &g, &am, C64::new(1.0, 0.0))
            .map(|f| deift_residual(&l, &b, &g, &am, &f) / frobenius(&am).max(1.0))
            .map_err(|e| e.to_string());
        let p = rng.gen_range(2..9);
        let q = rng.gen_range(1..5);
        let w = shifted(&mut rng, p, 2.0);
        let x = random_mat(&mut rng, p, q);
        let y = random_mat(&mut rng, q, p);
        let v = shifted(&mut rng, q, 1.5);
        let block = block_residual(&w, &x, &y, &v).map_err(|e| e.to_string());
        for (k, (res, size)) in [(jn, n), (deift, big), (block, p + q)].into_iter().enumerate() {
            match res {
                Ok(x) => {
                    worst[k] = worst[k].max(x);
                    table.push(vec![t.to_string(), names[k].into(), size.to_string(), num(x)]);
                }
                Err(e) => {
                    out.log(format!("trial {t} {}: {e}", names[k]));
                    table.push(vec![t.to_string(), names[k].into(), size.to_string(), num(f64::NAN)]);
                    failures.push(json!({"trial": t, "identity": names[k], "error": e}));
                }
            }
        }
    }
    out.write("results.csv", &table.to_csv())?;
    for (k, name) in names.iter().enumerate() {
        out.log(format!("{name}: max residual {:.3e} over {} trial(s)", worst[k], spec.trials));
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    let checks = vec![
        check("no refusals", failures.is_empty(), format!("{} refused instance(s)", failures.len())),
        check("residuals", max < spec.tolerance, format!("max residual {max:.3e} (tol {:.1e})", spec.tolerance)),
    ];
    let mut summary = Map::new();
    for (k, name) in names.iter().enumerate() {
        summary.insert(format!("max_residual_{name}"), json!(worst[k]));
    }
    summary.insert("failures".into(), Value::Array(failures));
    Ok(Outcome { checks, summary })
}
