//! Subcommand implementations and report emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use twistfix::deformation::{
    check_star_algebra, deformed_product, deformed_product_quad, omega_j, GridFunction, Profile, SkewMatrix,
};
use twistfix::proper::{analyze, inflate_action, preset, FrameReport, Preset};
use twistfix::torus::{
    clutching_sections, distinguishes, example_subset, fixedpoint_bundle_report, Mask, SubsetReport,
};
use twistfix::twisted::{classical_fixed_points, decompose};
use twistfix::{find_similarity, similar, Cocycle, CocycleForm, GroupDescriptor};

use crate::input::{action_from_json, cocycle_from_inputs, parse_elements, parse_rational_matrix};
use crate::{CocycleCmd, Command, Common, DeformCmd, GridArgs, ProperCmd, TorusCmd, TwistedCmd};

const SCHEMA: &str = "twistfix/1";

struct Outcome {
    command: &'static str,
    seed: u64,
    fields: Map<String, Value>,
    failures: Vec<String>,
}

impl Outcome {
    fn new(command: &'static str, seed: u64) -> Outcome {
        Outcome {
            command,
            seed,
            fields: Map::new(),
            failures: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.fields.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn merge(&mut self, value: impl Serialize) -> Result<()> {
        match serde_json::to_value(value)? {
            Value::Object(m) => {
                self.fields.extend(m);
                Ok(())
            }
            other => bail!("expected an object report, got {other}"),
        }
    }

    fn fail_if(&mut self, condition: bool, name: &str) {
        if condition {
            self.failures.push(name.to_string());
        }
    }

    fn into_json(self) -> Value {
        let mut m = self.fields;
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("command".into(), json!(self.command));
        m.insert("seed".into(), json!(self.seed));
        m.insert("passed".into(), json!(self.failures.is_empty()));
        m.insert("failures".into(), json!(self.failures));
        Value::Object(m)
    }
}

fn write_report(value: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(outcome: Outcome, out: Option<&Path>) -> Result<ExitCode> {
    let failures = outcome.failures.clone();
    write_report(&outcome.into_json(), out)?;
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("check failed: {}", failures.join(", "));
        Ok(ExitCode::from(2))
    }
}

/// Exit code and invariant name for an error raised by the library.
fn classify(err: &anyhow::Error) -> (u8, Option<&'static str>) {
    use twistfix::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::InvalidArgument(_)) | Some(E::InconsistentAction(_)) | None => (1, None),
        Some(E::IllConditioned(_)) => (2, Some("rank_decision")),
        Some(E::NotStrictlyConvergent { .. }) => (2, Some("strict_convergence")),
        Some(E::Inconsistency(_)) => (2, Some("fixed_point_closure")),
        Some(E::RankDeficient { .. }) => (2, Some("fiber_gram_rank")),
        Some(E::NotFull { .. }) => (2, Some("fiber_algebra_full")),
        Some(E::Resolution { .. }) => (2, Some("winding_resolution")),
    }
}

pub fn run(command: Command) -> ExitCode {
    let result = match command {
        Command::Cocycle(c) => cocycle(c),
        Command::Twisted(c) => twisted(c),
        Command::Proper(c) => proper(c),
        Command::Deform(c) => deform(c),
        Command::Torus(c) => torus(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let (code, name) = classify(&e);
            match name {
                Some(n) => eprintln!("check failed: {n}: {e:#}"),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(code)
        }
    }
}

fn rational_rows(m: &[Vec<num_rational::Rational64>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|q| q.to_string()).collect()).collect()
}

fn cocycle(cmd: CocycleCmd) -> Result<ExitCode> {
    match cmd {
        CocycleCmd::Analyze { input, common } => {
            let omega = cocycle_from_inputs(input.group.as_deref(), input.matrix.as_deref(), input.spec.as_deref())?;
            let mut o = Outcome::new("cocycle analyze", common.seed);
            let group = omega.group().clone();
            let v = omega.validate();
            o.set("group", group.to_string())?;
            o.set(
                "form",
                match omega.form() {
                    CocycleForm::Bicharacter(m) => json!({ "bicharacter": rational_rows(m) }),
                    CocycleForm::Table => json!("table"),
                },
            )?;
            o.set("valid", v.valid)?;
            o.set(
                "failing_triple",
                v.failing_triple.map(|(a, b, c)| vec![a.coords().to_vec(), b.coords().to_vec(), c.coords().to_vec()]),
            )?;
            o.set("normalized", omega.is_normalized())?;
            let sym = omega.symmetrizer();
            o.set("symmetrizer_order", sym.len())?;
            o.set("symmetrizer", sym.iter().map(|g| g.coords().to_vec()).collect::<Vec<_>>())?;
            o.set("antisymmetric_part", omega.antisymmetric_part().map(|m| rational_rows(&m)))?;
            o.fail_if(!v.valid, "cocycle_identity");
            if v.valid {
                let w = decompose(&omega)?;
                o.set("blocks", &w.blocks)?;
                o.set("center_dim", w.center_dim)?;
            }
            finish(o, common.out.as_deref())
        }
        CocycleCmd::Similar {
            group,
            a,
            b,
            search,
            common,
        } => {
            let g: GroupDescriptor = group.parse()?;
            let ca = Cocycle::from_bicharacter(&g, parse_rational_matrix(&a)?)?;
            let cb = Cocycle::from_bicharacter(&g, parse_rational_matrix(&b)?)?;
            let mut o = Outcome::new("cocycle similar", common.seed);
            let same = similar(&ca, &cb)?;
            o.set("group", g.to_string())?;
            o.set("similar", same)?;
            if search {
                let witness = find_similarity(&ca, &cb)?;
                o.fail_if(witness.is_some() != same, "similarity_oracle");
                o.set(
                    "witness",
                    witness.map(|c| c.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
                )?;
            }
            finish(o, common.out.as_deref())
        }
    }
}

fn twisted(cmd: TwistedCmd) -> Result<ExitCode> {
    match cmd {
        TwistedCmd::Decompose { input, common } => {
            let omega = cocycle_from_inputs(input.group.as_deref(), input.matrix.as_deref(), input.spec.as_deref())?;
            let mut o = Outcome::new("twisted decompose", common.seed);
            let valid = omega.validate().valid;
            o.set("group", omega.group().to_string())?;
            o.set("valid", valid)?;
            o.fail_if(!valid, "cocycle_identity");
            if valid {
                let w = decompose(&omega)?;
                o.set("dimension", omega.order())?;
                o.set("blocks", &w.blocks)?;
                o.set("center_dim", w.center_dim)?;
                let total: usize = w.blocks.iter().map(|d| d * d).sum();
                o.fail_if(total != omega.order(), "block_dimensions");
            }
            finish(o, common.out.as_deref())
        }
        TwistedCmd::Fixedpoints { input, common } => {
            let omega = cocycle_from_inputs(input.group.as_deref(), input.matrix.as_deref(), input.spec.as_deref())?;
            let mut o = Outcome::new("twisted fixedpoints", common.seed);
            let fp = classical_fixed_points(&omega)?;
            o.set("group", omega.group().to_string())?;
            o.set("dimension", fp.dimension)?;
            o.set(
                "basis",
                fp.basis.iter().map(|e| e.coeffs().to_vec()).collect::<Vec<Vec<Complex64>>>(),
            )?;
            o.fail_if(fp.dimension != 1, "fixed_point_dimension");
            finish(o, common.out.as_deref())
        }
    }
}

fn frame_outcome(command: &'static str, name: &str, report: &FrameReport, dual: bool, seed: u64) -> Result<Outcome> {
    let mut o = Outcome::new(command, seed);
    o.set("preset", name)?;
    o.set("saturated", report.saturation.saturated)?;
    o.set("fix_blocks", &report.fixed_point_algebra.blocks)?;
    o.set("gram_min", report.gram.min_eigenvalue)?;
    o.set("imprimitivity_defect", report.imprimitivity_defect)?;
    o.set("crossed_dim", report.crossed.dimension)?;
    o.set("frame", report)?;
    for f in report.failures() {
        o.failures.push(f.to_string());
    }
    if dual {
        o.fail_if(!report.saturation.saturated, "saturation");
        o.fail_if(report.fixed_point_algebra.blocks != [1], "fixed_point_blocks");
        let n = report.algebra_dim;
        o.fail_if(report.crossed.dimension != n * n, "crossed_dimension");
    }
    Ok(o)
}

fn analyze_preset(command: &'static str, p: &Preset, common: &Common) -> Result<ExitCode> {
    let report = analyze(&p.action, &p.generators, common.seed)?;
    let o = frame_outcome(command, &p.name, &report, p.dual, common.seed)?;
    finish(o, common.out.as_deref())
}

fn proper(cmd: ProperCmd) -> Result<ExitCode> {
    match cmd {
        ProperCmd::Analyze { preset: name, action, common } => match (name, action) {
            (Some(n), None) => analyze_preset("proper analyze", &preset(&n)?, &common),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
                let (act, gens) = action_from_json(&text)?;
                let report = analyze(&act, &gens, common.seed)?;
                let o = frame_outcome("proper analyze", &path, &report, false, common.seed)?;
                finish(o, common.out.as_deref())
            }
            _ => bail!("give exactly one of --preset or --action"),
        },
        ProperCmd::Tensor { a, b, common } => {
            analyze_preset("proper tensor", &preset(&format!("tensor:{a}+{b}"))?, &common)
        }
        ProperCmd::Inflate {
            preset: name,
            group,
            images,
            common,
        } => {
            let small = preset(&name)?;
            let big: GroupDescriptor = group.parse()?;
            let action = inflate_action(&small.action, &big, &parse_elements(&images)?)?;
            let p = Preset {
                name: format!("inflate:{name}@{big}"),
                action,
                generators: small.generators.clone(),
                dual: false,
            };
            analyze_preset("proper inflate", &p, &common)
        }
    }
}

fn skew(grid: &GridArgs) -> Result<SkewMatrix> {
    match grid.n {
        1 if grid.theta != 0.0 => bail!("a 1x1 skew matrix is zero; use --theta 0 with --n 1"),
        1 => Ok(SkewMatrix::zero(1)),
        2 => Ok(SkewMatrix::theta(grid.theta)),
        n => bail!("dimension must be 1 or 2, got {n}"),
    }
}

fn write_csv(f: &GridFunction, path: &PathBuf) -> Result<()> {
    let mut text = String::new();
    let header: Vec<String> = (1..=f.dim()).map(|i| format!("x{i}")).collect();
    writeln!(text, "{},re,im", header.join(","))?;
    for (i, v) in f.values().iter().enumerate() {
        let x: Vec<String> = f.coordinates(i).iter().map(|c| c.to_string()).collect();
        writeln!(text, "{},{:e},{:e}", x.join(","), v.re, v.im)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn deform(cmd: DeformCmd) -> Result<ExitCode> {
    match cmd {
        DeformCmd::Product {
            grid,
            f,
            g,
            oracle,
            oracle_tol,
            out,
            report,
            seed,
        } => {
            let j = skew(&grid)?;
            let (pf, pg) = (Profile::parse(grid.n, &f)?, Profile::parse(grid.n, &g)?);
            let ff = GridFunction::from_profile(&pf, grid.samples, grid.period)?;
            let gg = GridFunction::from_profile(&pg, grid.samples, grid.period)?;
            let prod = deformed_product(&ff, &gg, &j)?;
            let pointwise = prod.product.rel_distance(&ff.pointwise(&gg)?);
            let mut o = Outcome::new("deform product", seed);
            o.set("n", grid.n)?;
            o.set("samples", grid.samples)?;
            o.set("period", grid.period)?;
            o.set("theta", grid.theta)?;
            o.set("f", &f)?;
            o.set("g", &g)?;
            o.set("high_frequency_mass", prod.high_frequency_mass)?;
            o.set("band_limited", prod.warning.is_none())?;
            o.set("warning", &prod.warning)?;
            o.set("max_abs", prod.product.max_abs())?;
            o.set("pointwise_defect", pointwise)?;
            if grid.theta == 0.0 {
                o.set("equals_pointwise", pointwise < 1e-10)?;
                o.fail_if(pointwise >= 1e-10, "pointwise_degeneration");
            }
            if oracle {
                let quad = deformed_product_quad(&pf, &gg, &j)?;
                let d = prod.product.rel_distance(&quad);
                o.set("oracle_defect", d)?;
                o.set("oracle_tol", oracle_tol)?;
                o.fail_if(!(d < oracle_tol), "oracle_agreement");
            }
            if let Some(path) = &out {
                write_csv(&prod.product, path)?;
                o.set("csv", path.display().to_string())?;
            }
            if let Some(w) = &prod.warning {
                eprintln!("warning: {w}");
            }
            finish(o, report.as_deref())
        }
        DeformCmd::Check {
            grid,
            profiles,
            tol,
            oracle_tol,
            common,
        } => {
            let j = skew(&grid)?;
            let specs = if profiles.is_empty() {
                match grid.n {
                    1 => vec!["gaussian:1.5".to_string(), "gaussian:2.0@1".to_string()],
                    _ => vec!["gaussian:1.5".to_string(), "gaussian:2.0@1,-0.5".to_string()],
                }
            } else {
                profiles
            };
            let profiles = specs
                .iter()
                .map(|s| Profile::parse(grid.n, s))
                .collect::<twistfix::Result<Vec<_>>>()?;
            let funcs = profiles
                .iter()
                .map(|p| GridFunction::from_profile(p, grid.samples, grid.period))
                .collect::<twistfix::Result<Vec<_>>>()?;
            let star = check_star_algebra(&j, &funcs)?;
            let zero = SkewMatrix::zero(grid.n);
            let mut pointwise = 0.0f64;
            for a in &funcs {
                for b in &funcs {
                    let p = deformed_product(a, b, &zero)?.product;
                    pointwise = pointwise.max(p.rel_distance(&a.pointwise(b)?));
                }
            }
            let freqs: Vec<(Vec<i64>, Vec<i64>)> = match grid.n {
                1 => vec![(vec![1], vec![-2]), (vec![3], vec![2])],
                _ => vec![(vec![1, -1], vec![2, 1]), (vec![-2, 0], vec![1, 3])],
            };
            let mut plane = 0.0f64;
            for (a, b) in &freqs {
                let ea = GridFunction::plane_wave(grid.n, grid.samples, grid.period, a)?;
                let eb = GridFunction::plane_wave(grid.n, grid.samples, grid.period, b)?;
                let sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let expected = GridFunction::plane_wave(grid.n, grid.samples, grid.period, &sum)?
                    .scale(omega_j(&j, a, b, grid.period));
                plane = plane.max(deformed_product(&ea, &eb, &j)?.product.rel_distance(&expected));
            }
            let mut o = Outcome::new("deform check", common.seed);
            o.set("n", grid.n)?;
            o.set("samples", grid.samples)?;
            o.set("period", grid.period)?;
            o.set("theta", grid.theta)?;
            o.set("profiles", &specs)?;
            o.set("star", &star)?;
            o.set("pointwise_defect", pointwise)?;
            o.set("plane_wave_defect", plane)?;
            o.fail_if(!(star.involution < tol), "involution");
            o.fail_if(!(star.associativity < tol), "associativity");
            o.fail_if(!(pointwise < 1e-10), "pointwise_degeneration");
            o.fail_if(!(plane < 1e-10), "plane_wave_law");
            if funcs.len() >= 2 {
                let fft = deformed_product(&funcs[0], &funcs[1], &j)?.product;
                let quad = deformed_product_quad(&profiles[0], &funcs[1], &j)?;
                let d = fft.rel_distance(&quad);
                o.set("oracle_defect", d)?;
                o.fail_if(!(d < oracle_tol), "oracle_agreement");
            }
            finish(o, common.out.as_deref())
        }
    }
}

fn read_mask(spec: &str, k: usize, grid: usize) -> Result<(Vec<bool>, usize)> {
    let path = spec.strip_prefix("bitmap:").map(str::to_string).or_else(|| {
        let p = Path::new(spec);
        p.is_file().then(|| spec.to_string())
    });
    if let Some(path) = path {
        if k != 2 {
            bail!("bitmap masks are two-dimensional");
        }
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
        let (mask, m) = Mask::parse_bitmap(&text)?;
        return Ok((mask.grid(2, m)?, m));
    }
    let mask = Mask::parse(spec)?;
    Ok((mask.grid(k, grid)?, grid))
}

fn subset_outcome(rep: &SubsetReport, mask: &str, seed: u64) -> Result<Outcome> {
    let mut o = Outcome::new("torus subset", seed);
    o.merge(rep)?;
    o.set("mask", mask)?;
    o.fail_if(rep.off_support_max > 1e-10, "off_support");
    o.fail_if(!(rep.commutator_max < 1e-10), "commutativity");
    o.fail_if(!rep.separates_covered_points, "separation");
    o.fail_if(rep.separates_complement, "complement_separation");
    Ok(o)
}

fn torus(cmd: TorusCmd) -> Result<ExitCode> {
    match cmd {
        TorusCmd::Subset {
            k,
            grid,
            mask,
            bumps,
            common,
        } => {
            let (bits, m) = read_mask(&mask, k, grid)?;
            let rep = example_subset(&bits, k, m, bumps, common.seed)?;
            let o = subset_outcome(&rep, &mask, common.seed)?;
            finish(o, common.out.as_deref())
        }
        TorusCmd::Bundle {
            m,
            grid,
            sections,
            common,
        } => {
            let mut reports = Vec::with_capacity(m.len());
            for &twist in &m {
                let s = clutching_sections(twist, grid, sections)?;
                reports.push(fixedpoint_bundle_report(&s)?);
            }
            let mut o = Outcome::new("torus bundle", common.seed);
            for r in &reports {
                o.fail_if(r.chern_number != r.m, "chern_number");
                o.fail_if(r.seam_defect > 1e-10, "seam_matching");
                o.fail_if(r.fiber_dim != 4, "fiber_algebra_full");
            }
            let distinct = distinguishes(&reports);
            o.fail_if(!distinct, "distinguishes");
            o.set("bundles", &reports)?;
            o.set("distinguishes", distinct)?;
            o.set("grid", grid)?;
            finish(o, common.out.as_deref())
        }
    }
}

