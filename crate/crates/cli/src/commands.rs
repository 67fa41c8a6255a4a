//! Command dispatch. Every command produces a [`Report`].

use std::path::PathBuf;

use twistk::character::{CharacterSource, InertiaSection};
use twistk::chern_simons::{cs_form, cs_form_exact, identity_isomorphism};
use twistk::diff_k::{
    is_stably_isomorphic, khat_class, khat_rank, khat_rank_exact, orbit_irrep_sum, twisted_irrep_count,
    EffectiveTheory,
};
use twistk::linalg::CMat;
use twistk::twisted_bundle::{SuperTime, TwistedBundle};
use twistk::{Quadrature, Settings};

use crate::error::{validation, CliError};
use crate::report::{
    complex, CertificateOut, Check, ComponentOut, IrrepOut, OrbitOut, OrbitRank, Report, ReportSettings, TaskResult,
};
use crate::resolve::{context, Bundle, Context, Isomorphism};
use crate::schema::{parse, ProblemFile, TaskSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Character,
    Cs,
    KhatRank,
    KhatClass,
    StableIso,
    RegularClasses,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Character => "character",
            Command::Cs => "cs",
            Command::KhatRank => "khat-rank",
            Command::KhatClass => "khat-class",
            Command::StableIso => "stable-iso",
            Command::RegularClasses => "regular-classes",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub files: Vec<PathBuf>,
    pub bundles: Vec<String>,
    pub phi: Option<String>,
    pub tolerance: f64,
    pub quadrature: usize,
    pub seed: u64,
}

impl Invocation {
    fn settings(&self) -> Settings {
        Settings {
            tolerance: self.tolerance,
            quadrature: Quadrature::fixed(self.quadrature),
            seed: self.seed,
        }
    }

    fn report_settings(&self) -> ReportSettings {
        ReportSettings {
            tolerance: self.tolerance,
            quadrature: self.quadrature,
            seed: self.seed,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Loaded {
    file: ProblemFile,
    ctx: Context,
}

fn load(path: &PathBuf, tol: f64) -> Result<Loaded, CliError> {
    let file = parse(path)?;
    let ctx = context(&file, tol)?;
    Ok(Loaded { file, ctx })
}

/// Two named bundles, from one file or one from each of two files. The
/// second file must describe the same group, cocycle, G-set and models.
fn operand_pair(inv: &Invocation, tol: f64) -> Result<(Loaded, [String; 2], Bundle, Bundle), CliError> {
    let first = load(&inv.files[0], tol)?;
    match inv.files.len() {
        1 => {
            let names: [String; 2] = match inv.bundles.as_slice() {
                [a, b] => [a.clone(), b.clone()],
                _ => return Err(usage("with one input file, name two bundles with --bundle")),
            };
            let b0 = first.ctx.bundle(&first.file, &names[0], tol)?;
            let b1 = first.ctx.bundle(&first.file, &names[1], tol)?;
            Ok((first, names, b0, b1))
        }
        2 => {
            let second = parse(&inv.files[1])?;
            let same = first.file.group == second.group
                && first.file.cocycle == second.cocycle
                && first.file.gset == second.gset
                && first.file.models == second.models;
            if !same {
                return Err(validation(
                    "the two files describe different groups, cocycles, G-sets or models",
                ));
            }
            let names = match inv.bundles.as_slice() {
                [] => [only_bundle(&first.file, &inv.files[0])?, only_bundle(&second, &inv.files[1])?],
                [a, b] => [a.clone(), b.clone()],
                _ => return Err(usage("name either no bundles or one bundle per file")),
            };
            let b0 = first.ctx.bundle(&first.file, &names[0], tol)?;
            let b1 = first.ctx.bundle(&second, &names[1], tol)?;
            Ok((first, names, b0, b1))
        }
        _ => Err(usage("expected one or two input files")),
    }
}

fn only_bundle(file: &ProblemFile, path: &PathBuf) -> Result<String, CliError> {
    let mut names = file.bundles.keys();
    match (names.next(), names.next()) {
        (Some(n), None) => Ok(n.clone()),
        _ => Err(usage(format!(
            "{} does not have exactly one bundle; select one with --bundle",
            path.display()
        ))),
    }
}

fn single_bundle(loaded: &Loaded, inv: &Invocation) -> Result<String, CliError> {
    match inv.bundles.as_slice() {
        [] => only_bundle(&loaded.file, &inv.files[0]),
        [b] => Ok(b.clone()),
        _ => Err(usage("this command takes one bundle")),
    }
}

pub fn run(inv: &Invocation) -> Result<Report, CliError> {
    if inv.files.is_empty() {
        return Err(usage("no input file given"));
    }
    if !(inv.tolerance > 0.0 && inv.tolerance.is_finite()) {
        return Err(usage("tolerance must be a positive number"));
    }
    if inv.quadrature == 0 {
        return Err(usage("quadrature order must be positive"));
    }
    let tol = inv.tolerance;
    let single = |inv: &Invocation| -> Result<Loaded, CliError> {
        if inv.files.len() != 1 {
            return Err(usage(format!("{} takes one input file", inv.command.name())));
        }
        load(&inv.files[0], tol)
    };
    let results = match inv.command {
        Command::Validate => {
            if inv.files.len() != 1 {
                return Err(usage("validate takes one input file"));
            }
            let file = parse(&inv.files[0])?;
            vec![validate(&file, inv)?]
        }
        Command::Character => {
            let l = single(inv)?;
            let name = single_bundle(&l, inv)?;
            vec![character(&l, &name, tol)?]
        }
        Command::KhatClass => {
            let l = single(inv)?;
            let name = single_bundle(&l, inv)?;
            vec![class(&l, &name, tol)?]
        }
        Command::KhatRank => vec![rank(&single(inv)?.ctx)?],
        Command::RegularClasses => vec![regular_classes(&single(inv)?.ctx)],
        Command::Cs => {
            let (l, names, b0, b1) = operand_pair(inv, tol)?;
            vec![chern_simons(&l, names, &b0, &b1, inv.phi.as_deref(), &inv.settings())?]
        }
        Command::StableIso => {
            let (l, names, b0, b1) = operand_pair(inv, tol)?;
            vec![stable_iso(&l.ctx, names, &b0, &b1, &inv.settings())?]
        }
        Command::Report => {
            let file = parse(&single_path(inv)?)?;
            run_tasks(&file, inv)?
        }
    };
    let inputs = inv.files.iter().map(|p| p.display().to_string()).collect();
    Ok(Report::new(inv.command.name(), inputs, inv.report_settings(), results))
}

fn single_path(inv: &Invocation) -> Result<PathBuf, CliError> {
    match inv.files.as_slice() {
        [p] => Ok(p.clone()),
        _ => Err(usage("report takes one input file")),
    }
}

fn run_tasks(file: &ProblemFile, inv: &Invocation) -> Result<Vec<TaskResult>, CliError> {
    let tol = inv.tolerance;
    let default = [TaskSpec::Validate];
    let tasks = if file.tasks.is_empty() { &default[..] } else { &file.tasks[..] };
    let mut out = Vec::new();
    let mut loaded: Option<Loaded> = None;
    for task in tasks {
        if let TaskSpec::Validate = task {
            out.push(validate(file, inv)?);
            continue;
        }
        if loaded.is_none() {
            loaded = Some(Loaded {
                file: file.clone(),
                ctx: context(file, tol)?,
            });
        }
        let l = loaded.as_ref().expect("loaded above");
        out.push(match task {
            TaskSpec::Validate => unreachable!(),
            TaskSpec::Character { bundle } => character(l, bundle, tol)?,
            TaskSpec::KhatClass { bundle } => class(l, bundle, tol)?,
            TaskSpec::KhatRank => rank(&l.ctx)?,
            TaskSpec::RegularClasses => regular_classes(&l.ctx),
            TaskSpec::Cs { bundles, phi } => {
                let b0 = l.ctx.bundle(file, &bundles[0], tol)?;
                let b1 = l.ctx.bundle(file, &bundles[1], tol)?;
                chern_simons(l, bundles.clone(), &b0, &b1, phi.as_deref(), &inv.settings())?
            }
            TaskSpec::StableIso { bundles } => {
                let b0 = l.ctx.bundle(file, &bundles[0], tol)?;
                let b1 = l.ctx.bundle(file, &bundles[1], tol)?;
                stable_iso(&l.ctx, bundles.clone(), &b0, &b1, &inv.settings())?
            }
        });
    }
    Ok(out)
}

fn components(ctx: &Context, s: &InertiaSection) -> Vec<ComponentOut> {
    s.components()
        .iter()
        .map(|(&g, c)| {
            let names: Vec<String> = match &c.points {
                Some(points) => points.iter().map(|&x| ctx.point_name(x).to_string()).collect(),
                None => c.algebra().names().to_vec(),
            };
            let coefficients = names
                .into_iter()
                .zip(c.form.coeffs())
                .filter(|(_, z)| z.norm() != 0.0)
                .map(|(n, &z)| (n, complex(z)))
                .collect();
            ComponentOut {
                class_rep: ctx.element_name(g).to_string(),
                coefficients,
            }
        })
        .collect()
}

fn character_of(b: &Bundle, tol: f64) -> Result<InertiaSection, CliError> {
    match b {
        Bundle::Exact(e) => e.character(tol),
        Bundle::Graded(e) => e.character(tol),
    }
    .map_err(validation)
}

fn character(l: &Loaded, name: &str, tol: f64) -> Result<TaskResult, CliError> {
    let b = l.ctx.bundle(&l.file, name, tol)?;
    let z = character_of(&b, tol)?;
    Ok(TaskResult::Character {
        bundle: name.to_string(),
        components: components(&l.ctx, &z),
    })
}

fn exact<'a>(b: &'a Bundle, name: &str, command: &str) -> Result<&'a TwistedBundle, CliError> {
    match b {
        Bundle::Exact(e) => Ok(e),
        Bundle::Graded(_) => Err(usage(format!(
            "{command} needs exact-tier bundles; '{name}' is graded"
        ))),
    }
}

fn class(l: &Loaded, name: &str, tol: f64) -> Result<TaskResult, CliError> {
    let b = l.ctx.bundle(&l.file, name, tol)?;
    let e = exact(&b, name, "khat-class")?;
    let c = khat_class(e).map_err(validation)?;
    let ctx = &l.ctx;
    let names = |v: &[usize]| v.iter().map(|&g| ctx.element_name(g).to_string()).collect::<Vec<_>>();
    Ok(TaskResult::KhatClass {
        bundle: name.to_string(),
        zero: c.is_zero(),
        orbits: c
            .orbits
            .iter()
            .map(|o| OrbitOut {
                representative: ctx.point_name(o.representative).to_string(),
                stabilizer: names(&o.stabilizer),
                irreps: o
                    .irreps
                    .iter()
                    .map(|i| IrrepOut {
                        dim: i.dim,
                        fingerprint: i.fingerprint.0.iter().map(|&(a, b)| [a, b]).collect(),
                    })
                    .collect(),
                multiplicities: o.multiplicities.clone(),
            })
            .collect(),
    })
}

fn rank(ctx: &Context) -> Result<TaskResult, CliError> {
    let r = khat_rank(&ctx.cocycle, &ctx.gset).map_err(validation)?;
    let exact_sum = khat_rank_exact(&ctx.cocycle, &ctx.gset).map_err(validation)?;
    let orbit_sum = orbit_irrep_sum(&ctx.cocycle, &ctx.gset).map_err(validation)?;
    if orbit_sum != r {
        return Err(validation(format!("rank {r} disagrees with orbit sum {orbit_sum}")));
    }
    let orbits = ctx
        .gset
        .orbits()
        .into_iter()
        .map(|orbit| {
            let stab = ctx.gset.stabilizer_subgroup(orbit[0]);
            let count = twisted_irrep_count(&ctx.cocycle.restrict(&stab)).map_err(validation)?;
            Ok(OrbitRank {
                representative: ctx.point_name(orbit[0]).to_string(),
                stabilizer: stab.embedding.iter().map(|&g| ctx.element_name(g).to_string()).collect(),
                twisted_irreps: count,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(TaskResult::KhatRank {
        rank: r,
        fixed_point_sum: exact_sum.to_string(),
        orbits,
    })
}

fn regular_classes(ctx: &Context) -> TaskResult {
    TaskResult::RegularClasses {
        classes: ctx
            .cocycle
            .regular_classes()
            .iter()
            .map(|c| c.iter().map(|&g| ctx.element_name(g).to_string()).collect())
            .collect(),
    }
}

fn chern_simons(
    l: &Loaded,
    names: [String; 2],
    b0: &Bundle,
    b1: &Bundle,
    phi: Option<&str>,
    settings: &Settings,
) -> Result<TaskResult, CliError> {
    let iso = match phi {
        Some(n) => Some(l.ctx.isomorphism(&l.file, n, b0)?),
        None => None,
    };
    let section = match (b0, b1, iso) {
        (Bundle::Exact(e0), Bundle::Exact(e1), iso) => {
            let blocks = match iso {
                Some(Isomorphism::Exact(b)) => b,
                None => (0..e0.base().n_points())
                    .map(|x| CMat::identity(e0.fiber_dim(x), e0.fiber_dim(x)))
                    .collect(),
                Some(Isomorphism::Graded(_)) => unreachable!("tiers checked during resolution"),
            };
            cs_form_exact(e0, e1, &blocks, settings)
        }
        (Bundle::Graded(e0), Bundle::Graded(e1), iso) => {
            let phi = match iso {
                Some(Isomorphism::Graded(m)) => m,
                None => identity_isomorphism(e0),
                Some(Isomorphism::Exact(_)) => unreachable!("tiers checked during resolution"),
            };
            cs_form(e0, e1, &phi, settings)
        }
        _ => return Err(usage("cs needs two bundles of the same tier")),
    }
    .map_err(validation)?;
    Ok(TaskResult::Cs {
        bundles: names,
        phi: phi.unwrap_or("identity").to_string(),
        components: components(&l.ctx, &section),
    })
}

fn stable_iso(
    ctx: &Context,
    names: [String; 2],
    b0: &Bundle,
    b1: &Bundle,
    settings: &Settings,
) -> Result<TaskResult, CliError> {
    let e0 = exact(b0, &names[0], "stable-iso")?;
    let e1 = exact(b1, &names[1], "stable-iso")?;
    let tol = settings.tolerance;
    let t0 = EffectiveTheory::from_bundle(e0.clone(), tol).map_err(validation)?;
    let t1 = EffectiveTheory::from_bundle(e1.clone(), tol).map_err(validation)?;
    let d = is_stably_isomorphic(&t0, &t1, settings).map_err(validation)?;
    let reason = match (d.witness, d.reason) {
        (Some(w), _) => Some(format!(
            "virtual character mismatch at class [{}] on the orbit of point {}",
            ctx.element_name(w.element),
            ctx.point_name(w.point)
        )),
        (None, r) => r,
    };
    let certificate = d.certificate.map(|c| CertificateOut {
        v0_fibers: c.v0.fibers().iter().map(|&(p, q)| [p, q]).collect(),
        v1_fibers: c.v1.fibers().iter().map(|&(p, q)| [p, q]).collect(),
        phi: c
            .phi
            .iter()
            .map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex(m[(i, j)])).collect()).collect())
            .collect(),
    });
    Ok(TaskResult::StableIso {
        bundles: names,
        holds: d.holds,
        reason,
        certificate,
    })
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Parse errors propagate; failed axioms become failed checks.
fn validate(file: &ProblemFile, inv: &Invocation) -> Result<TaskResult, CliError> {
    let tol = inv.tolerance;
    let mut checks = Vec::new();
    let ctx = match context(file, tol) {
        Ok(c) => c,
        Err(CliError::Validation(m)) => {
            checks.push(check("setting", false, m));
            return Ok(TaskResult::Validate { checks });
        }
        Err(e) => return Err(e),
    };
    let group = ctx.group();
    let n = group.order();
    checks.push(check(
        "group",
        true,
        format!("order {n}, {} conjugacy classes", group.class_representatives().len()),
    ));
    checks.push(check(
        "cocycle",
        ctx.cocycle.is_normalized(),
        format!(
            "identity holds on {} triples; {}",
            n * n * n,
            if ctx.cocycle.is_normalized() { "normalized" } else { "not normalized" }
        ),
    ));
    let gset_detail = match file.gset {
        Some(_) => format!("{} points, {} orbits", ctx.gset.n_points(), ctx.gset.orbits().len()),
        None => "none given; a single point is assumed".into(),
    };
    checks.push(check("gset", true, gset_detail));
    for (name, alg) in &ctx.models {
        let acts: Vec<&str> = alg.action_elements().into_iter().map(|g| ctx.element_name(g)).collect();
        checks.push(check(
            format!("model {name}"),
            true,
            format!("dimension {}, actions of [{}]", alg.dim(), acts.join(", ")),
        ));
    }
    for name in file.bundles.keys() {
        let b = match ctx.bundle(file, name, tol) {
            Ok(b) => b,
            Err(CliError::Validation(m)) => {
                checks.push(check(format!("bundle {name}"), false, m));
                continue;
            }
            Err(e) => return Err(e),
        };
        checks.push(check(format!("bundle {name}"), true, bundle_summary(&b)));
        let z = match character_of(&b, tol) {
            Ok(z) => z,
            Err(e) => {
                checks.push(check(format!("bundle {name}: character"), false, e.to_string()));
                continue;
            }
        };
        let (closed, _) = z.closedness_defect();
        checks.push(check(
            format!("bundle {name}: dZ = 0"),
            closed <= tol,
            format!("max |dZ| = {closed:.3e}"),
        ));
        let cov = match &b {
            Bundle::Exact(e) => e.check_covariance(&z, tol),
            Bundle::Graded(e) => e.check_covariance(&z, tol),
        };
        match cov {
            Ok(r) => checks.push(check(
                format!("bundle {name}: covariance"),
                r.passed(),
                format!("{} identities, max deviation {:.3e}", r.identities_checked, r.max_deviation),
            )),
            Err(e) => checks.push(check(format!("bundle {name}: covariance"), false, e.to_string())),
        }
        if let Bundle::Exact(e) = &b {
            checks.push(semigroup_check(name, e, tol));
            checks.push(mckean_singer_check(name, e, tol));
        }
    }
    Ok(TaskResult::Validate { checks })
}

fn bundle_summary(b: &Bundle) -> String {
    match b {
        Bundle::Exact(e) => {
            let fibers: Vec<String> = e.fibers().iter().map(|(p, q)| format!("({p}|{q})")).collect();
            format!("exact tier, fibers {}", fibers.join(" "))
        }
        Bundle::Graded(e) => {
            let ranks: Vec<String> = e.packets().map(|p| format!("({}|{})", p.rank().0, p.rank().1)).collect();
            format!("graded tier, packet ranks {}", ranks.join(" "))
        }
    }
}

fn semigroup_check(name: &str, e: &TwistedBundle, tol: f64) -> Check {
    let label = format!("bundle {name}: transport semigroup law");
    let group = e.base().group().clone();
    let (s, t) = (SuperTime::theta(0.7), SuperTime::eta(0.4));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for g1 in group.elements() {
        for g2 in group.elements() {
            let dev = (|| -> Result<f64, twistk::twisted_bundle::BundleError> {
                let lhs = &e.transport(g1, &s)? * &e.transport(g2, &t)?;
                let rhs = e
                    .transport(group.mul(g1, g2), &s.compose(&t))?
                    .scale(e.cocycle().value(g1, g2).to_c64());
                Ok(lhs.distance(&rhs))
            })();
            match dev {
                Ok(d) => worst = worst.max(d),
                Err(err) => return check(label, false, err.to_string()),
            }
            count += 1;
        }
    }
    check(label, worst <= tol, format!("{count} pairs, max deviation {worst:.3e}"))
}

fn mckean_singer_check(name: &str, e: &TwistedBundle, tol: f64) -> Check {
    let label = format!("bundle {name}: t-independence");
    let base = e.base();
    let mut worst: f64 = 0.0;
    for g in base.group().elements() {
        for x in base.fixed_points(g) {
            let values: Result<Vec<_>, _> = [0.5, 1.0, 2.0].iter().map(|&t| e.supertrace_at(g, x, t)).collect();
            match values {
                Ok(v) => worst = worst.max((v[0] - v[1]).norm()).max((v[2] - v[1]).norm()),
                Err(err) => return check(label, false, err.to_string()),
            }
        }
    }
    check(label, worst <= tol, format!("t in {{0.5, 1, 2}}, max deviation {worst:.3e}"))
}
