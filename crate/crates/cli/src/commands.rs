use std::path::{Path, PathBuf};
use std::sync::Arc;

use observables::classical::{self, sigma_from_function, GridDemo, RealFamily};
use observables::context::{glue_section, is_global_section, section_from_operator, ContextDiagram};
use observables::io::{read_json, write_corpus};
use observables::observable::{ideal_key, observable_value, parse_ideal, ObservableFunction, ObservableTableFile};
use observables::presheaf::DEFAULT_SEARCH_CAP;
use observables::spectral::SpectralFamilyFile;
use observables::stone::{cone, StoneSpectrum};
use observables::suite::{run_all, SuiteConfig};
use observables::vn::{spectral_leq, HermitianOperator, OperatorSpectralFamily, Projection, VNSubalgebra};
use observables::{corpus, Check, Error, Lattice, Result};
use serde_json::json;

use crate::report::{matrix_json, matrix_text, Report};
use crate::{
    ClassicalCmd, Command, ContextCmd, LatticeCmd, ObsCmd, PresheafCmd, RestrictionMap, Runtime, SpectralCmd, StoneCmd,
    VnCmd,
};

pub fn run(rt: &Runtime, command: &Command) -> Result<Report> {
    match command {
        Command::Lattice(cmd) => lattice(rt, cmd),
        Command::Stone(cmd) => stone(rt, cmd),
        Command::Spectral(cmd) => spectral(rt, cmd),
        Command::Obs(cmd) => obs(rt, cmd),
        Command::Vn(cmd) => vn(rt, cmd),
        Command::Classical(cmd) => classical_cmd(rt, cmd),
        Command::Context(cmd) => context(rt, cmd),
        Command::Presheaf(cmd) => presheaf(rt, cmd),
        Command::Suite => suite(rt),
    }
}

/// The explicit argument, else `--input`.
fn reference(rt: &Runtime, explicit: Option<&str>, what: &str) -> Result<String> {
    explicit
        .map(str::to_string)
        .or_else(|| rt.global.input.clone())
        .ok_or_else(|| Error::Input(format!("no {what} given (use --{what} or --input)")))
}

fn path(rt: &Runtime, explicit: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    reference(rt, explicit.and_then(|p| p.to_str()), what).map(PathBuf::from)
}

fn names(l: &Lattice, elems: impl IntoIterator<Item = observables::Elem>) -> Vec<String> {
    elems.into_iter().map(|e| l.name(e).to_string()).collect()
}

fn lattice(rt: &Runtime, cmd: &LatticeCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        LatticeCmd::Check => {
            let l = rt.loader.lattice(&reference(rt, None, "input")?, None)?;
            r.field("elements", l.len()).field("atoms", names(&l, l.atoms()));
            match l.is_distributive() {
                Check::Holds => r.field("distributive", true),
                Check::Fails(w) => r
                    .field("distributive", false)
                    .field("distributive_witness", names(&l, w)),
            };
            r.field("orthocomplemented", l.has_ortho());
            if l.has_ortho() {
                match l.is_orthomodular()? {
                    Check::Holds => r.field("orthomodular", true),
                    Check::Fails((a, b)) => r
                        .field("orthomodular", false)
                        .field("orthomodular_witness", names(&l, [a, b])),
                };
                r.field("center", names(&l, l.center()?));
            }
            r.dot = Some(l.to_dot());
        }
        LatticeCmd::Export { out } => {
            let written = write_corpus(out)?;
            let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
            r.field("written", files.len()).block("files", &files, files.clone());
        }
        LatticeCmd::List => {
            let list: Vec<String> = corpus::lattices()
                .into_iter()
                .map(|(n, l)| format!("{n} ({})", l.len()))
                .collect();
            r.block("lattices", &list, list.clone());
        }
    }
    Ok(r)
}

fn stone(rt: &Runtime, cmd: &StoneCmd) -> Result<Report> {
    let (StoneCmd::Quasipoints { lattice } | StoneCmd::DualIdeals { lattice }) = cmd;
    let l = rt
        .loader
        .lattice(&reference(rt, lattice.as_deref(), "lattice")?, None)?;
    let spectrum = rt.loader.spectrum(l.clone())?;
    let indices: Vec<usize> = match cmd {
        StoneCmd::Quasipoints { .. } => spectrum.quasipoints().to_vec(),
        StoneCmd::DualIdeals { .. } => (0..spectrum.dual_ideals().len()).collect(),
    };
    let rows: Vec<serde_json::Value> = indices
        .iter()
        .map(|&i| {
            json!({
                "index": i,
                "members": ideal_key(&l, spectrum.ideal(i).members()),
                "least": l.name(spectrum.ideal(i).least()),
                "quasipoint": spectrum.is_quasipoint(i),
            })
        })
        .collect();
    let text = indices
        .iter()
        .map(|&i| {
            let mark = if spectrum.is_quasipoint(i) { "*" } else { " " };
            format!(
                "{i:>4}{mark} least {:<8} {}",
                l.name(spectrum.ideal(i).least()),
                spectrum.format_ideal(i)
            )
        })
        .collect();
    let mut r = Report::new();
    r.field("dual_ideals", spectrum.dual_ideals().len())
        .field("quasipoints", spectrum.quasipoints().len())
        .block("table", rows, text);
    r.dot = Some(spectrum.to_dot());
    Ok(r)
}

fn spectral(rt: &Runtime, cmd: &SpectralCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        SpectralCmd::Show { family } => {
            let p = path(rt, family.as_ref(), "family")?;
            let file: SpectralFamilyFile = read_json(&p)?;
            let e = rt.loader.family(&p)?;
            r.field("family", e.to_string())
                .field("spectrum", e.spectrum())
                .field("canonical", e.to_file(&file.lattice));
        }
        SpectralCmd::Eval { family, lambda } => {
            let e = rt.loader.family(&path(rt, family.as_ref(), "family")?)?;
            r.field("lambda", lambda)
                .field("value", e.lattice().name(e.eval(*lambda)));
        }
    }
    Ok(r)
}

fn load_table(rt: &Runtime, table: Option<&PathBuf>) -> Result<(ObservableFunction, String)> {
    let p = path(rt, table, "table")?;
    let lattice_ref = read_json::<ObservableTableFile>(&p)?.lattice;
    Ok((rt.loader.table(&p)?, lattice_ref))
}

fn obs(rt: &Runtime, cmd: &ObsCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        ObsCmd::Eval { family, ideal } => {
            let e = rt.loader.family(&path(rt, family.as_ref(), "family")?)?;
            let l = e.lattice();
            let j = cone(l, parse_ideal(l, ideal)?)?;
            r.field("ideal", ideal_key(l, j.members()))
                .field("value", observable_value(&e, &j)?);
        }
        ObsCmd::Table { family } => {
            let p = path(rt, family.as_ref(), "family")?;
            let lattice_ref = read_json::<SpectralFamilyFile>(&p)?.lattice;
            let e = rt.loader.family(&p)?;
            let f = ObservableFunction::from_spectral(rt.loader.spectrum(e.lattice().clone())?, &e)?;
            let file = f.to_file(&lattice_ref);
            let text = file.values.iter().map(|(k, v)| format!("{{{k}}} -> {v}")).collect();
            r.block("values", &file.values, text).field("lattice", lattice_ref);
        }
        ObsCmd::Reconstruct { table } => {
            let (f, lattice_ref) = load_table(rt, table.as_ref())?;
            f.verify()?;
            let e = f.reconstruct()?;
            r.field("family", e.to_string())
                .field("reconstructed", e.to_file(&lattice_ref));
        }
        ObsCmd::Check { table } => {
            let (f, _) = load_table(rt, table.as_ref())?;
            let s = f.spectrum();
            let l = f.lattice();
            match f.check_intersection_condition() {
                Check::Holds => r.field("intersection_condition", true),
                Check::Fails((i, j)) => r.field("intersection_condition", false).fail(
                    "intersection_witness",
                    [ideal_key(l, s.ideal(i).members()), ideal_key(l, s.ideal(j).members())],
                ),
            };
            match f.check_upper_semicontinuous() {
                Check::Holds => r.field("upper_semicontinuous", true),
                Check::Fails(i) => r
                    .field("upper_semicontinuous", false)
                    .fail("semicontinuity_witness", ideal_key(l, s.ideal(i).members())),
            };
        }
    }
    Ok(r)
}

fn operator(rt: &Runtime, p: &Path) -> Result<HermitianOperator> {
    HermitianOperator::new(rt.loader.matrix(p)?, &rt.tol)
}

fn algebra(rt: &Runtime, p: &Path, dim: usize) -> Result<VNSubalgebra> {
    VNSubalgebra::generated_by(dim, rt.loader.matrices(p)?, &rt.tol)
}

fn family_report(r: &mut Report, key: &str, family: &OperatorSpectralFamily) {
    let steps: Vec<serde_json::Value> = family
        .steps()
        .iter()
        .map(|(l, p)| json!({"lambda": l, "rank": p.rank(), "projection": matrix_json(p.matrix())}))
        .collect();
    let text = family
        .steps()
        .iter()
        .map(|(l, p)| format!("lambda {l}: rank {}", p.rank()))
        .collect();
    r.block(key, steps, text);
}

fn vn(rt: &Runtime, cmd: &VnCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        VnCmd::SpectralFamily { op } => {
            let a = operator(rt, &path(rt, op.as_ref(), "op")?)?;
            let family = OperatorSpectralFamily::of(&a, &rt.tol)?;
            r.field("spectrum", family.breakpoints())
                .field("residual", family.synthesize().distance(&a));
            family_report(&mut r, "steps", &family);
        }
        VnCmd::Order { a, b } => {
            let (a, b) = (operator(rt, a)?, operator(rt, b)?);
            match spectral_leq(&a, &b, &rt.tol)? {
                Check::Holds => r.field("spectral_leq", true),
                Check::Fails(lambda) => r.field("spectral_leq", false).field("witness_lambda", lambda),
            };
        }
        VnCmd::Restrict { algebra: gens, op, map } => {
            let a = operator(rt, op)?;
            let m = algebra(rt, gens, a.dim())?;
            let restricted = match map {
                RestrictionMap::Rho => m.rho_restrict(&a)?,
                RestrictionMap::Sigma => m.sigma_restrict(&a)?,
            };
            r.field("spectrum", restricted.spectral_family(&rt.tol)?.breakpoints())
                .block(
                    "operator",
                    matrix_json(restricted.matrix()),
                    matrix_text(restricted.matrix()),
                );
        }
        VnCmd::Core { algebra: gens, proj } => {
            let q = Projection::new(rt.loader.matrix(proj)?, &rt.tol)?;
            let m = algebra(rt, gens, q.dim())?;
            let (core, support) = (m.core(&q)?, m.support(&q)?);
            r.field("rank", q.rank())
                .field("core_rank", core.rank())
                .block("core", matrix_json(core.matrix()), matrix_text(core.matrix()))
                .field("support_rank", support.rank())
                .block("support", matrix_json(support.matrix()), matrix_text(support.matrix()));
        }
    }
    Ok(r)
}

fn classical_cmd(rt: &Runtime, cmd: &ClassicalCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        ClassicalCmd::Induce { space, function } | ClassicalCmd::CheckContinuity { space, function } => {
            let space = Arc::new(rt.loader.topology(&reference(rt, space.as_deref(), "space")?, None)?);
            let f = rt.loader.point_function(function, &space)?;
            r.dot = Some(space.to_dot());
            let continuous = space.is_continuous(&f);
            match &continuous {
                Check::Holds => r.field("continuous", true),
                Check::Fails((x, y)) => r.field("continuous", false).field(
                    "continuity_witness",
                    json!({"point": space.points()[*x], "neighbour": space.points()[*y]}),
                ),
            };
            if matches!(cmd, ClassicalCmd::CheckContinuity { .. }) {
                r.passed = continuous.holds();
                return Ok(r);
            }
            let sigma = sigma_from_function(&space, &f)?;
            let steps: Vec<serde_json::Value> = sigma
                .steps()
                .iter()
                .map(|&(l, u)| json!({"lambda": l, "open": space.format(u)}))
                .collect();
            let text = sigma
                .steps()
                .iter()
                .map(|&(l, u)| format!("{l}: {}", space.format(u)))
                .collect();
            let induced = sigma.induced_function();
            let named: std::collections::BTreeMap<&str, Option<f64>> = space
                .points()
                .iter()
                .map(String::as_str)
                .zip(induced.iter().copied())
                .collect();
            r.block("sigma", steps, text)
                .field("sigma_continuous", sigma.is_continuous().holds())
                .field("domain", space.format(sigma.admissible_domain()))
                .field("induced", &named);
            let round_trip = induced.iter().zip(&f).all(|(g, v)| *g == Some(*v));
            r.field("round_trip", round_trip);
            if continuous.holds() && !round_trip {
                r.passed = false;
            }
        }
        ClassicalCmd::Demo { family, grid } => {
            let kind: RealFamily = family.parse()?;
            let demo = GridDemo::new(kind, classical::parse_grid(grid)?)?;
            let rows: Vec<serde_json::Value> = demo
                .grid
                .iter()
                .zip(&demo.induced)
                .map(|(&x, v)| json!({"x": x, "target": kind.target(x), "induced": v}))
                .collect();
            let text = demo
                .grid
                .iter()
                .zip(&demo.induced)
                .map(|(&x, v)| {
                    let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| v.to_string());
                    format!("{x:>8}  f={:<22} induced={}", show(kind.target(x)), show(*v))
                })
                .collect();
            r.field("family", kind.name())
                .block("grid", rows, text)
                .field("max_error_eps", demo.max_error_eps);
            match demo.continuity {
                Check::Holds => r.field("continuous", true),
                Check::Fails((l, m)) => r.field("continuous", false).field("continuity_witness", [l, m]),
            };
            if demo.max_error_eps > 4.0 {
                r.passed = false;
            }
        }
    }
    Ok(r)
}

fn diagram(rt: &Runtime, explicit: Option<&str>) -> Result<ContextDiagram> {
    rt.loader.diagram(&reference(rt, explicit, "diagram")?, &rt.tol)
}

fn context(rt: &Runtime, cmd: &ContextCmd) -> Result<Report> {
    let mut r = Report::new();
    match cmd {
        ContextCmd::Glue { diagram: d, sections } => {
            let d = diagram(rt, d.as_deref())?;
            let section = rt.loader.sections(sections, &d)?;
            let labels = &d.domain().labels;
            let contexts = d.contexts();
            if let Check::Fails(m) = is_global_section(&section, &d)? {
                r.field("global_section", false).fail(
                    "compatibility_witness",
                    json!({
                        "contexts": [contexts[m.first].name(), contexts[m.second].name()],
                        "projection": labels[m.projection],
                        "values": [m.values.0, m.values.1],
                    }),
                );
                return Ok(r);
            }
            let report = glue_section(&section, &d)?;
            let glued: std::collections::BTreeMap<&str, f64> = labels
                .iter()
                .map(String::as_str)
                .zip(report.glued.values.iter().copied())
                .collect();
            r.field("global_section", true).field("glued", &glued);
            match report.commuting_joins {
                Check::Holds => r.field("commuting_joins", true),
                Check::Fails((i, j)) => r
                    .field("commuting_joins", false)
                    .field("joins_witness", [&labels[i], &labels[j]]),
            };
            match report.complete_increasing {
                Check::Holds => r.field("completely_increasing", true),
                Check::Fails((i, j)) => r
                    .field("completely_increasing", false)
                    .field("increasing_witness", [&labels[i], &labels[j]]),
            };
            let ext = &report.extendability;
            match ext.verdict {
                Check::Holds => r.field("operator_extendable", true),
                Check::Fails((k, given, candidate)) => r.field("operator_extendable", false).field(
                    "extendability_witness",
                    json!({"projection": labels[k], "given": given, "candidate": candidate}),
                ),
            };
            r.field("rank_one_below_max", ext.rank_one_below_max).block(
                "candidate",
                matrix_json(ext.candidate.matrix()),
                matrix_text(ext.candidate.matrix()),
            );
        }
        ContextCmd::FromOperator { op, diagram: d } => {
            let d = diagram(rt, d.as_deref())?;
            let a = operator(rt, op)?;
            let section = section_from_operator(&a, &d)?;
            let text = d
                .contexts()
                .iter()
                .zip(&section.tables)
                .flat_map(|(c, table)| c.masks().map(move |m| format!("{}: {}", c.label(m), table[m as usize])))
                .collect();
            r.block("sections", section.to_file(&d), text);
        }
    }
    Ok(r)
}

fn presheaf(rt: &Runtime, cmd: &PresheafCmd) -> Result<Report> {
    let p = rt.loader.presheaf(&path(rt, None, "input")?)?;
    let l = p.lattice().clone();
    let mut r = Report::new();
    match p.check_presheaf() {
        Check::Holds => r.field("presheaf", true),
        Check::Fails(w) => r.fail(
            "presheaf_witness",
            json!({"chain": names(&l, [w.a, w.b, w.c]), "section": p.sections(w.c)[w.section]}),
        ),
    };
    if !r.passed {
        return Ok(r);
    }
    match cmd {
        PresheafCmd::Check => {
            let report = p.check_sheaf_condition(rt.global.cap.unwrap_or(DEFAULT_SEARCH_CAP))?;
            r.field("covers_checked", report.covers_checked)
                .field("families_checked", report.families_checked);
            for (key, check) in [("existence", &report.existence), ("uniqueness", &report.uniqueness)] {
                match check {
                    Check::Holds => r.field(key, true),
                    Check::Fails(w) => r.field(key, false).fail(
                        &format!("{key}_witness"),
                        json!({
                            "target": l.name(w.target),
                            "family": w.cover.iter().zip(&w.family)
                                .map(|(&c, &s)| json!({"element": l.name(c), "section": p.sections(c)[s]}))
                                .collect::<Vec<_>>(),
                            "gluings": w.gluings.iter().map(|&g| p.sections(w.target)[g].clone()).collect::<Vec<_>>(),
                        }),
                    ),
                };
            }
        }
        PresheafCmd::Sheafify => {
            let spectrum: Arc<StoneSpectrum> = rt.loader.spectrum(l.clone())?;
            let sheafified = p.sheafify(&spectrum, rt.global.cap.unwrap_or(DEFAULT_SEARCH_CAP))?;
            let stalks: Vec<serde_json::Value> = sheafified
                .stalks
                .iter()
                .map(|s| json!({"quasipoint": spectrum.format_ideal(s.quasipoint), "least": l.name(s.least), "germs": s.germs}))
                .collect();
            let text = sheafified
                .stalks
                .iter()
                .map(|s| {
                    format!(
                        "{} ({} germs): {}",
                        spectrum.format_ideal(s.quasipoint),
                        s.len(),
                        s.germs.join(" ")
                    )
                })
                .collect();
            let check = sheafified.sheaf.check_sheaf_condition(DEFAULT_SEARCH_CAP)?;
            r.block("stalks", stalks, text)
                .field("sheafified_is_sheaf", check.holds());
            if !check.holds() {
                r.passed = false;
            }
        }
    }
    Ok(r)
}

fn suite(rt: &Runtime) -> Result<Report> {
    let results = run_all(&SuiteConfig {
        seed: rt.global.seed,
        tol: rt.tol,
    });
    let mut r = Report::new();
    let rows: Vec<serde_json::Value> = results
        .iter()
        .map(|c| json!({"id": c.id, "name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    let text = results.iter().map(ToString::to_string).collect();
    r.field("seed", rt.global.seed).block("criteria", rows, text);
    r.field("passed_criteria", results.iter().filter(|c| c.passed).count());
    r.passed = results.iter().all(|c| c.passed);
    Ok(r)
}
