//! Turns a parsed [`ProblemFile`] into library objects. Dangling names and
//! shape errors are parse errors; failed axioms are validation errors.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use twistk::form_algebra::{
    exterior_model_named, jet_model, jet_signed_permutation, exterior_signed_permutation, point_permutation,
    zero_dim_model, Form, FormAlgebra, OmegaMatrix, Parity,
};
use twistk::group_cocycle::{FiniteGroup, Phase, TwoCocycle};
use twistk::gset::FiniteGSet;
use twistk::linalg::CMat;
use twistk::scalar::C64;
use twistk::twisted_bundle::{GradedBundle, Packet, TwistedBundle};

use crate::error::{validation, CliError};
use crate::schema::{
    ActionSpec, BundleSpec, FormSpec, IsomorphismSpec, MatrixSpec, ModelSpec, PacketSpec, ProblemFile, Scalar,
};

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>, CliError> {
    let mut map = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(parse_err(format!("{what}: duplicate name '{n}'")));
        }
    }
    Ok(map)
}

fn real(s: &str, at: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let v = if t.contains('/') {
        t.parse::<Rational64>().ok().and_then(|r| r.to_f64())
    } else {
        t.parse::<f64>().ok().filter(|v| v.is_finite())
    };
    v.ok_or_else(|| parse_err(format!("{at}: '{s}' is not a decimal or p/q rational")))
}

pub fn scalar(s: &Scalar, at: &str) -> Result<C64, CliError> {
    match s {
        Scalar::Complex([re, im]) => Ok(C64::new(real(re, at)?, real(im, at)?)),
        Scalar::Real(re) => Ok(C64::new(real(re, at)?, 0.0)),
    }
}

pub fn matrix(m: &MatrixSpec, shape: (usize, usize), at: &str) -> Result<CMat, CliError> {
    if m.len() != shape.0 || m.iter().any(|r| r.len() != shape.1) {
        let cols = m.first().map_or(0, Vec::len);
        return Err(parse_err(format!(
            "{at}: expected a {}x{} matrix, found {}x{cols}",
            shape.0,
            shape.1,
            m.len()
        )));
    }
    let mut out = CMat::zeros(shape.0, shape.1);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = scalar(v, &format!("{at}[{i}][{j}]"))?;
        }
    }
    Ok(out)
}

/// The objects shared by all bundles of a file.
#[derive(Clone, Debug)]
pub struct Context {
    pub elements: Vec<String>,
    pub element_index: HashMap<String, usize>,
    pub points: Vec<String>,
    pub cocycle: TwoCocycle,
    pub gset: FiniteGSet,
    pub models: BTreeMap<String, Arc<FormAlgebra>>,
}

/// A bundle of either tier.
#[derive(Clone, Debug)]
pub enum Bundle {
    Exact(TwistedBundle),
    Graded(GradedBundle),
}

/// An isomorphism of either tier.
#[derive(Clone, Debug)]
pub enum Isomorphism {
    Exact(Vec<CMat>),
    Graded(BTreeMap<usize, OmegaMatrix>),
}

impl Context {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.cocycle.group()
    }

    pub fn element(&self, name: &str, at: &str) -> Result<usize, CliError> {
        self.element_index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(format!("{at}: unknown group element '{name}'")))
    }

    pub fn element_name(&self, g: usize) -> &str {
        &self.elements[g]
    }

    pub fn point_name(&self, x: usize) -> &str {
        &self.points[x]
    }

    fn model(&self, name: &str, owner: &str) -> Result<&Arc<FormAlgebra>, CliError> {
        self.models
            .get(name)
            .ok_or_else(|| parse_err(format!("{owner} references model '{name}', which is not defined")))
    }

    fn class_rep(&self, name: &str, at: &str) -> Result<usize, CliError> {
        let g = self.element(name, at)?;
        let rep = self.group().class_representative(g);
        if rep != g {
            return Err(parse_err(format!(
                "{at}: '{name}' is not the listed representative of its class; use '{}'",
                self.elements[rep]
            )));
        }
        Ok(g)
    }
}

pub fn context(file: &ProblemFile, tol: f64) -> Result<Context, CliError> {
    let elements = file.group.elements.clone();
    let element_index = index_names(&elements, "group.elements")?;
    let n = elements.len();
    if n == 0 {
        return Err(parse_err("group.elements: a group needs at least one element"));
    }
    if file.group.mult.len() != n {
        let missing = elements.get(file.group.mult.len()).map_or(String::new(), |e| format!("; the row for '{e}' is missing"));
        return Err(parse_err(format!(
            "group.mult: {} rows for {n} elements{missing}",
            file.group.mult.len()
        )));
    }
    let mut rows = Vec::with_capacity(n);
    for (i, row) in file.group.mult.iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(format!(
                "group.mult[{i}] (row '{}'): {} entries, expected {n}",
                elements[i],
                row.len()
            )));
        }
        let r = row
            .iter()
            .enumerate()
            .map(|(j, v)| {
                element_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| parse_err(format!("group.mult[{i}][{j}]: unknown group element '{v}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(r);
    }
    let group = Arc::new(FiniteGroup::from_table(&rows).map_err(validation)?);

    let cocycle = match &file.cocycle {
        None => TwoCocycle::trivial(group.clone()),
        Some(c) => {
            if c.phases.len() != n || c.phases.iter().any(|r| r.len() != n) {
                return Err(parse_err(format!("cocycle.phases: expected a {n}x{n} table")));
            }
            let mut values = Vec::with_capacity(n * n);
            for (i, row) in c.phases.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let p: Phase = v
                        .parse()
                        .map_err(|e| parse_err(format!("cocycle.phases[{i}][{j}]: {e}")))?;
                    values.push(p);
                }
            }
            TwoCocycle::new(group.clone(), values).map_err(validation)?
        }
    };

    let (points, gset) = match &file.gset {
        None => (vec!["pt".to_string()], FiniteGSet::point(group.clone())),
        Some(s) => {
            let point_index = index_names(&s.points, "gset.points")?;
            if s.action.len() != n {
                return Err(parse_err(format!("gset.action: {} rows for {n} elements", s.action.len())));
            }
            let np = s.points.len();
            let mut action = Vec::with_capacity(n * np);
            for (g, row) in s.action.iter().enumerate() {
                if row.len() != np {
                    return Err(parse_err(format!(
                        "gset.action[{g}] (row '{}'): {} entries, expected {np}",
                        elements[g],
                        row.len()
                    )));
                }
                for (x, v) in row.iter().enumerate() {
                    let y = point_index
                        .get(v)
                        .ok_or_else(|| parse_err(format!("gset.action[{g}][{x}]: unknown point '{v}'")))?;
                    action.push(*y);
                }
            }
            (s.points.clone(), FiniteGSet::new(group.clone(), np, action).map_err(validation)?)
        }
    };

    let mut ctx = Context {
        elements,
        element_index,
        points,
        cocycle,
        gset,
        models: BTreeMap::new(),
    };
    for (name, spec) in &file.models {
        let alg = model(&ctx, name, spec, tol)?;
        ctx.models.insert(name.clone(), Arc::new(alg));
    }
    Ok(ctx)
}

fn model(ctx: &Context, name: &str, spec: &ModelSpec, tol: f64) -> Result<FormAlgebra, CliError> {
    let at = format!("models.{name}");
    let mut alg = match spec {
        ModelSpec::Exterior { names, degrees, .. } => {
            exterior_model_named(names, degrees, tol).map_err(|e| validation(format!("{at}: {e}")))?
        }
        ModelSpec::Jet { vars, order, .. } => {
            if *vars == 0 || *vars > 4 {
                return Err(parse_err(format!("{at}.vars: jet models take 1 to 4 variables")));
            }
            jet_model(*vars, *order, tol).map_err(|e| validation(format!("{at}: {e}")))?
        }
        ModelSpec::Points { n, .. } => zero_dim_model(*n, tol),
        ModelSpec::Explicit {
            basis,
            degrees,
            structure,
            differential,
            ..
        } => {
            let idx = index_names(basis, &format!("{at}.basis"))?;
            let n = basis.len();
            let lookup = |s: &str, k: usize| {
                idx.get(s)
                    .copied()
                    .ok_or_else(|| parse_err(format!("{at}: entry {k} names unknown basis element '{s}'")))
            };
            let mut st = vec![C64::new(0.0, 0.0); n * n * n];
            for (k, (i, j, l, c)) in structure.iter().enumerate() {
                let (i, j, l) = (lookup(i, k)?, lookup(j, k)?, lookup(l, k)?);
                st[(i * n + j) * n + l] += scalar(c, &format!("{at}.structure[{k}]"))?;
            }
            let mut d = vec![C64::new(0.0, 0.0); n * n];
            for (k, (i, j, c)) in differential.iter().enumerate() {
                let (i, j) = (lookup(i, k)?, lookup(j, k)?);
                d[i * n + j] += scalar(c, &format!("{at}.differential[{k}]"))?;
            }
            FormAlgebra::from_parts(basis.clone(), degrees.clone(), st, d, tol)
                .map_err(|e| validation(format!("{at}: {e}")))?
        }
    };
    for (k, a) in spec.actions().iter().enumerate() {
        let at = format!("{at}.actions[{k}]");
        let g = ctx.element(&a.element, &at)?;
        let m = action_matrix(spec, a, alg.dim(), &at)?;
        alg = alg.with_action(g, m).map_err(|e| validation(format!("{at}: {e}")))?;
    }
    Ok(alg)
}

fn action_matrix(spec: &ModelSpec, a: &ActionSpec, dim: usize, at: &str) -> Result<Vec<C64>, CliError> {
    let given = [a.signed_permutation.is_some(), a.permutation.is_some(), a.matrix.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(parse_err(format!(
            "{at}: give exactly one of signed_permutation, permutation, matrix"
        )));
    }
    let check_perm = |perm: &[usize], k: usize| -> Result<(), CliError> {
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(parse_err(format!("{at}: not a permutation of 0..{k}")));
        }
        Ok(())
    };
    if let Some(m) = &a.matrix {
        let m = matrix(m, (dim, dim), &format!("{at}.matrix"))?;
        return Ok((0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect());
    }
    if let Some(perm) = &a.permutation {
        if !matches!(spec, ModelSpec::Points { .. }) {
            return Err(parse_err(format!("{at}: permutation applies to points models only")));
        }
        check_perm(perm, dim)?;
        return Ok(point_permutation(perm));
    }
    let sp = a.signed_permutation.as_ref().expect("one map is present");
    if sp.signs.len() != sp.perm.len() || sp.signs.iter().any(|s| s.abs() != 1) {
        return Err(parse_err(format!("{at}: signs must be ±1, one per generator")));
    }
    match spec {
        ModelSpec::Exterior { names, .. } => {
            check_perm(&sp.perm, names.len())?;
            Ok(exterior_signed_permutation(&sp.perm, &sp.signs))
        }
        ModelSpec::Jet { vars, order, .. } => {
            check_perm(&sp.perm, *vars)?;
            Ok(jet_signed_permutation(*vars, *order, &sp.perm, &sp.signs))
        }
        _ => Err(parse_err(format!(
            "{at}: signed_permutation applies to exterior and jet models only"
        ))),
    }
}

fn grading(rank: [usize; 2]) -> Vec<Parity> {
    let mut g = vec![Parity::Even; rank[0]];
    g.extend(vec![Parity::Odd; rank[1]]);
    g
}

fn form(alg: &Arc<FormAlgebra>, spec: &FormSpec, model_name: &str, at: &str) -> Result<Form, CliError> {
    let mut coeffs = vec![C64::new(0.0, 0.0); alg.dim()];
    for (name, v) in spec {
        let i = alg
            .basis_index(name)
            .ok_or_else(|| parse_err(format!("{at}: model '{model_name}' has no basis element '{name}'")))?;
        coeffs[i] += scalar(v, &format!("{at}.{name}"))?;
    }
    Form::new(alg, coeffs).map_err(validation)
}

fn form_matrix(
    alg: &Arc<FormAlgebra>,
    rows: &[Vec<FormSpec>],
    grading: &[Parity],
    model_name: &str,
    at: &str,
) -> Result<OmegaMatrix, CliError> {
    let n = grading.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(parse_err(format!("{at}: expected a {n}x{n} matrix of forms")));
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            entries.push(form(alg, f, model_name, &format!("{at}[{i}][{j}]"))?);
        }
    }
    OmegaMatrix::new(alg, grading.to_vec(), grading.to_vec(), entries).map_err(validation)
}

impl Context {
    pub fn bundle(&self, file: &ProblemFile, name: &str, tol: f64) -> Result<Bundle, CliError> {
        let spec = file.bundles.get(name).ok_or_else(|| {
            let known: Vec<&str> = file.bundles.keys().map(String::as_str).collect();
            parse_err(format!("no bundle named '{name}' (defined: {})", known.join(", ")))
        })?;
        let at = format!("bundles.{name}");
        match spec {
            BundleSpec::Exact { fibers, rho, a0 } => self.exact_bundle(fibers, rho, a0.as_deref(), &at, tol).map(Bundle::Exact),
            BundleSpec::Graded { packets } => {
                let packets = packets
                    .iter()
                    .enumerate()
                    .map(|(k, p)| self.packet(p, &format!("{at}.packets[{k}]"), &format!("bundle '{name}'"), tol))
                    .collect::<Result<Vec<_>, _>>()?;
                GradedBundle::new(self.cocycle.clone(), packets)
                    .map(Bundle::Graded)
                    .map_err(|e| validation(format!("{at}: {e}")))
            }
        }
    }

    fn exact_bundle(
        &self,
        fibers: &[[usize; 2]],
        rho: &BTreeMap<String, Vec<MatrixSpec>>,
        a0: Option<&[MatrixSpec]>,
        at: &str,
        tol: f64,
    ) -> Result<TwistedBundle, CliError> {
        let np = self.gset.n_points();
        if fibers.len() != np {
            return Err(parse_err(format!("{at}.fibers: {} entries for {np} points", fibers.len())));
        }
        let dim = |x: usize| fibers[x][0] + fibers[x][1];
        let group = self.group();
        let mut table: Vec<Option<CMat>> = vec![None; group.order() * np];
        for (gname, mats) in rho {
            let g = self.element(gname, &format!("{at}.rho"))?;
            if mats.len() != np {
                return Err(parse_err(format!("{at}.rho.{gname}: {} matrices for {np} points", mats.len())));
            }
            for (x, m) in mats.iter().enumerate() {
                let gx = self.gset.act(g, x);
                table[g * np + x] = Some(matrix(m, (dim(gx), dim(x)), &format!("{at}.rho.{gname}[{x}]"))?);
            }
        }
        let e = group.identity();
        let mut rho_table = Vec::with_capacity(table.len());
        for (k, m) in table.into_iter().enumerate() {
            let (g, x) = (k / np, k % np);
            rho_table.push(match m {
                Some(m) => m,
                None if g == e => CMat::identity(dim(x), dim(x)),
                None => {
                    return Err(parse_err(format!(
                        "{at}.rho: no matrices for element '{}'",
                        self.elements[g]
                    )))
                }
            });
        }
        let a0 = match a0 {
            None => (0..np).map(|x| CMat::zeros(dim(x), dim(x))).collect(),
            Some(ms) => {
                if ms.len() != np {
                    return Err(parse_err(format!("{at}.a0: {} matrices for {np} points", ms.len())));
                }
                ms.iter()
                    .enumerate()
                    .map(|(x, m)| matrix(m, (dim(x), dim(x)), &format!("{at}.a0[{x}]")))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        let fibers = fibers.iter().map(|f| (f[0], f[1])).collect();
        TwistedBundle::new(self.gset.clone(), self.cocycle.clone(), fibers, rho_table, a0, tol)
            .map_err(|e| validation(format!("{at}: {e}")))
    }

    fn packet(&self, p: &PacketSpec, at: &str, owner: &str, tol: f64) -> Result<Packet, CliError> {
        let g = self.class_rep(&p.class_rep, &format!("{at}.class_rep"))?;
        let alg = self.model(&p.model, owner)?;
        let grading = grading(p.rank);
        let m = form_matrix(alg, &p.m, &grading, &p.model, &format!("{at}.m"))?;
        let mut generators = BTreeMap::new();
        for (hname, rows) in &p.generators {
            let h = self.element(hname, &format!("{at}.generators"))?;
            let r = form_matrix(alg, rows, &grading, &p.model, &format!("{at}.generators.{hname}"))?;
            generators.insert(h, r);
        }
        Packet::new(&self.cocycle, g, alg.clone(), grading, m, generators, tol)
            .map_err(|e| validation(format!("{at}: {e}")))
    }

    /// Resolves a named isomorphism against the source bundle's shape.
    pub fn isomorphism(&self, file: &ProblemFile, name: &str, source: &Bundle) -> Result<Isomorphism, CliError> {
        let spec = file
            .isomorphisms
            .get(name)
            .ok_or_else(|| parse_err(format!("no isomorphism named '{name}'")))?;
        let at = format!("isomorphisms.{name}");
        match (spec, source) {
            (IsomorphismSpec::Exact { blocks }, Bundle::Exact(e)) => {
                if blocks.len() != e.base().n_points() {
                    return Err(parse_err(format!("{at}.blocks: one block per point required")));
                }
                blocks
                    .iter()
                    .enumerate()
                    .map(|(x, m)| {
                        let d = e.fiber_dim(x);
                        matrix(m, (d, d), &format!("{at}.blocks[{x}]"))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Isomorphism::Exact)
            }
            (IsomorphismSpec::Graded { classes }, Bundle::Graded(e)) => {
                let mut out = BTreeMap::new();
                for (cname, rows) in classes {
                    let g = self.class_rep(cname, &format!("{at}.classes"))?;
                    let p = e.require_packet(g).map_err(validation)?;
                    let model_name = self
                        .models
                        .iter()
                        .find(|(_, a)| Arc::ptr_eq(a, p.algebra()))
                        .map_or("?", |(n, _)| n.as_str());
                    let m = form_matrix(p.algebra(), rows, p.grading(), model_name, &format!("{at}.classes.{cname}"))?;
                    out.insert(g, m);
                }
                Ok(Isomorphism::Graded(out))
            }
            _ => Err(parse_err(format!(
                "{at}: isomorphism tier does not match the bundle tier"
            ))),
        }
    }
}
