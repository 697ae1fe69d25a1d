use crate::load;
use crate::report::{CliError, CliResult, Report, Status};
use crate::{Cli, FamilyArgs, Fixture, Params, PruneMode, SchemeInput, Verb};
use fmtk::classes::{cotree_to_graph, nested_word_to_tree, tree_to_nested_word};
use fmtk::ebsp::{decide_bounded_theory, ebsp_condition, estimate_witness, reduce_k_to_zero};
use fmtk::equivalence::{equivalent, rank_type};
use fmtk::logic::{canonical_conjunctive_query, evaluate_with, relativize};
use fmtk::preservation::{
    check_pce_k, check_psc_k, find_cruxes, glt_counterexample, glt_translate, hpt_translate, is_k_ary_cover,
    phi_k_paths, Family, Outcome, Verdict,
};
use fmtk::structures::serialize_structure;
use fmtk::transl::{builtin_scheme, operation_tree_eval, Registry};
use fmtk::treerep::{degree_reduce, height_reduce, reduce, OracleUse};
use fmtk::classes::builtin_oracle;
use fmtk::{Caps, Element, Formula, PointedStructure, Structure};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Default FO universe cap for type and witness computations.
const TYPE_UNIVERSE: usize = 12;
/// Default FO universe cap for everything else.
const EVAL_UNIVERSE: usize = 64;

pub fn run(cli: &Cli) -> CliResult<Report> {
    let p = &cli.params;
    let fo_default = if cli.verb.computes_types() { TYPE_UNIVERSE } else { EVAL_UNIVERSE };
    let caps = Caps { fo_universe: p.max_universe.unwrap_or(fo_default), mso_universe: p.max_mso_universe };
    match &cli.verb {
        Verb::Eval { structure, formula, assign, sets } => eval(structure, formula, assign, sets, &caps),
        Verb::Rank { formula } => {
            let f = load::formula(formula, None)?;
            let r = f.rank();
            Ok(Report::ok(json!({ "rank": r, "fo": f.is_fo(), "sentence": f.is_sentence() }), format!("{r}\n")))
        }
        Verb::Equiv { a, b, tuple_a, tuple_b } => {
            let a = pointed(a, tuple_a)?;
            let b = pointed(b, tuple_b)?;
            let eq = equivalent(&a, &b, p.m, p.logic, &caps)?;
            let word = if eq { "equivalent" } else { "not equivalent" };
            Ok(Report::ok(json!({ "equivalent": eq, "m": p.m, "logic": p.logic.to_string() }), format!("{word}\n")))
        }
        Verb::Type { structure, tuple } => {
            let a = pointed(structure, tuple)?;
            let fp = rank_type(&a, p.m, p.logic, &caps)?.fingerprint();
            Ok(Report::ok(
                json!({ "fingerprint": fp, "m": p.m, "logic": p.logic.to_string(), "tuple": tuple }),
                format!("{fp}\n"),
            ))
        }
        Verb::Relativize { formula, vars } => formula_report(relativize(&load::formula(formula, None)?, vars)?),
        Verb::Ccq { structure, tuple } => formula_report(canonical_conjunctive_query(&pointed(structure, tuple)?)),
        Verb::Crux { structure, sentence, family } => {
            let a = load::structure(structure)?;
            let phi = load::sentence(sentence, Some(a.vocabulary()))?;
            let fam = family_of(family, &caps)?;
            let r = find_cruxes(&a, &phi, &fam, p.k)?;
            let text = if r.cruxes.is_empty() {
                format!("no crux of size at most {}\n", p.k)
            } else {
                r.cruxes.iter().map(|c| format!("{}\n", set_text(c))).collect()
            };
            let mut result = json!({ "k": p.k, "cruxes": r.cruxes, "min_size": r.min_size });
            let report = if r.cruxes.is_empty() {
                result["counterexample"] = json!(serialize_structure(&a));
                Report::ok(result, text).with_status(Status::Refuted)
            } else {
                Report::ok(result, text)
            };
            Ok(report)
        }
        Verb::PscCheck { sentence, family } => {
            let (fam, phi) = family_and_sentence(family, sentence, &caps)?;
            verdict(check_psc_k(&fam, &phi, p.k)?)
        }
        Verb::PceCheck { sentence, family } => {
            let (fam, phi) = family_and_sentence(family, sentence, &caps)?;
            verdict(check_pce_k(&fam, &phi, p.k, p.cover_cap)?)
        }
        Verb::CoverCheck { structure, parts } => {
            let a = load::structure(structure)?;
            let r = parts.iter().map(|f| load::structure(f)).collect::<CliResult<Vec<_>>>()?;
            let covered = is_k_ary_cover(&a, &r, p.k)?;
            let mut result = json!({ "k": p.k, "cover": covered });
            let text = if covered { "cover\n" } else { "not a cover\n" };
            if covered {
                Ok(Report::ok(result, text))
            } else {
                result["counterexample"] = json!(serialize_structure(&a));
                Ok(Report::ok(result, text).with_status(Status::Refuted))
            }
        }
        Verb::GltTranslate { sentence, class } => {
            let phi = load::sentence(sentence, None)?;
            let v = match class {
                Some(path) => load::sentence(path, None)?,
                None => Formula::True,
            };
            formula_report(glt_translate(&phi, p.k, need_p(p)?, &v)?)
        }
        Verb::HptTranslate { sentence, family } => {
            let (fam, phi) = family_and_sentence(family, sentence, &caps)?;
            formula_report(hpt_translate(&phi, p.k, need_p(p)?, &fam)?)
        }
        Verb::SchemeApply { scheme, input } => {
            let xi = load::scheme(scheme)?;
            match input {
                SchemeInput::Structure { path, base } => {
                    let a = load::structure(path)?;
                    let out = match base {
                        Some(b) => xi.apply_structure_with_base(&a, *b, &caps)?,
                        None => xi.apply_structure(&a, &caps)?,
                    };
                    Ok(structure_report(&out))
                }
                SchemeInput::Formula { path } => formula_report(xi.apply_formula(&load::formula(path, Some(xi.target()))?)?),
            }
        }
        Verb::OptreeEval { tree, leaves } => {
            let t = load::tree(tree)?;
            let inputs = leaves.iter().map(|f| load::structure(f)).collect::<CliResult<Vec<_>>>()?;
            Ok(structure_report(&operation_tree_eval(&t, &inputs, &Registry::builtin(), &caps)?))
        }
        Verb::Prune { tree, oracles, mode } => {
            let t = load::tree(tree)?;
            let uses = oracles
                .iter()
                .map(|name| Ok(OracleUse { oracle: builtin_oracle(name)?, m: p.m, logic: p.logic }))
                .collect::<fmtk::Result<Vec<_>>>()?;
            let r = match mode {
                PruneMode::Full => reduce(&t, &uses, &caps)?,
                PruneMode::Height => height_reduce(&t, &uses, &caps)?,
                PruneMode::Degree => degree_reduce(&t, &uses, &caps)?,
            };
            let s = &r.stats;
            let text = r.tree.to_string();
            Ok(Report::ok(
                json!({
                    "tree": text,
                    "input_size": s.input_size,
                    "output_size": s.output_size,
                    "sizes": s.sizes,
                    "height_types": s.height_types,
                    "degree_types": s.degree_types,
                }),
                text,
            ))
        }
        Verb::EbspSearch { structure, family, tuple, labelled } => {
            let a = load::structure(structure)?;
            let fam = family_of(family, &caps)?;
            let bound = p.bound.unwrap_or(a.size());
            let found = if *labelled {
                reduce_k_to_zero(&fam, &a, tuple, p.m, bound, p.logic)?.map(|r| (r.structure, r.rank))
            } else {
                ebsp_condition(&fam, &a, tuple, p.m, bound, p.logic)?.map(|b| (b, p.m))
            };
            let base = json!({ "m": p.m, "logic": p.logic.to_string(), "bound": bound, "tuple": tuple });
            Ok(match found {
                Some((b, rank)) => {
                    let text = serialize_structure(&b);
                    let mut result = base;
                    result["witness"] = json!(text);
                    result["size"] = json!(b.size());
                    result["rank"] = json!(rank);
                    Report::ok(result, text)
                }
                None => {
                    let mut result = base;
                    result["counterexample"] = json!(serialize_structure(&a));
                    Report::ok(result, format!("no witness of size at most {bound}\n")).with_status(Status::Refuted)
                }
            })
        }
        Verb::WitnessProfile { family, samples } => {
            let fam = family_of(family, &caps)?;
            let prof = estimate_witness(&fam, p.k, p.m, p.logic, *samples, p.seed)?;
            let mut result = serde_json::to_value(&prof).expect("profile serialises");
            result["monotonized"] = json!(prof.monotonized());
            result["sample_count"] = json!(prof.sample_count());
            result["seed"] = json!(p.seed);
            Ok(Report::ok(result, prof.to_csv()?))
        }
        Verb::DecideTheory { sentence, family } => {
            let (fam, phi) = family_and_sentence(family, sentence, &caps)?;
            let bound = need_p(p)?;
            let d = decide_bounded_theory(&fam, |_| bound, &phi, p.logic)?;
            let mut result = json!({ "holds": d.holds, "rank": d.rank, "p": d.p });
            Ok(match d.certificate {
                None => Report::ok(result, "holds\n"),
                Some(b) => {
                    let text = serialize_structure(&b);
                    result["counterexample"] = json!(text);
                    Report::ok(result, format!("refuted by\n{text}")).with_status(Status::Refuted)
                }
            })
        }
        Verb::NwEncode { word } => {
            let t = nested_word_to_tree(&load::nested_word(word)?);
            let text = t.to_string();
            Ok(Report::ok(json!({ "tree": text }), text))
        }
        Verb::NwDecode { tree } => {
            let w = tree_to_nested_word(&load::tree(tree)?)?;
            let text = w.to_string();
            Ok(Report::ok(json!({ "letters": w.letters().iter().collect::<String>(), "edges": w.edges() }), text))
        }
        Verb::CotreeGraph { tree } => Ok(structure_report(&cotree_to_graph(&load::tree(tree)?)?)),
        Verb::Fixture { which } => fixture(which),
    }
}

fn eval(structure: &Path, formula: &Path, assign: &[String], sets: &[String], caps: &Caps) -> CliResult<Report> {
    let a = load::structure(structure)?;
    let f = load::formula(formula, Some(a.vocabulary()))?;
    let mut points = BTreeMap::new();
    for s in assign {
        let (v, e) = binding(s)?;
        let e: Element = e.trim().parse().map_err(|_| CliError::usage(format!("bad element in {s:?}")))?;
        points.insert(v, e);
    }
    let mut set_env = BTreeMap::new();
    for s in sets {
        let (v, es) = binding(s)?;
        let es = crate::elements(&es).map_err(CliError::usage)?;
        set_env.insert(v, es.into_iter().collect::<BTreeSet<Element>>());
    }
    let value = evaluate_with(&a, &points, &set_env, &f, caps)?;
    Ok(Report::ok(json!({ "value": value }), format!("{value}\n")))
}

fn binding(s: &str) -> CliResult<(String, String)> {
    s.split_once('=')
        .map(|(v, e)| (v.trim().to_string(), e.to_string()))
        .ok_or_else(|| CliError::usage(format!("expected NAME=VALUE, found {s:?}")))
}

fn pointed(path: &Path, tuple: &[Element]) -> CliResult<PointedStructure> {
    let s = load::structure(path)?;
    s.pointed(tuple.to_vec()).map_err(|e| CliError::from_core(Some(&path.display().to_string()), e))
}

fn family_of(args: &FamilyArgs, caps: &Caps) -> CliResult<Family> {
    load::family(&args.family, args.modulo.as_deref(), *caps)
}

fn family_and_sentence(args: &FamilyArgs, sentence: &Path, caps: &Caps) -> CliResult<(Family, Formula)> {
    let fam = family_of(args, caps)?;
    let phi = load::sentence(sentence, fam.vocabulary())?;
    Ok((fam, phi))
}

fn need_p(p: &Params) -> CliResult<usize> {
    p.p.ok_or_else(|| CliError::usage("this verb needs --p"))
}

fn set_text(c: &BTreeSet<Element>) -> String {
    let items: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn formula_report(f: Formula) -> CliResult<Report> {
    let text = f.to_string();
    Ok(Report::ok(json!({ "formula": text, "rank": f.rank() }), format!("{text}\n")))
}

fn structure_report(s: &Structure) -> Report {
    let text = serialize_structure(s);
    Report::ok(json!({ "structure": text, "size": s.size() }), text)
}

/// Holds is 0, violated is 1, and an exhausted cover search is 3.
fn verdict(v: Verdict) -> CliResult<Report> {
    let status = match v.verdict {
        Outcome::Holds => Status::Ok,
        Outcome::Violated => Status::Refuted,
        Outcome::Inconclusive => Status::Cap,
    };
    let mut text = format!("{}({}): {}\n", v.property, v.k, serde_json::to_value(v.verdict).expect("outcome serialises").as_str().unwrap_or(""));
    if let Some(w) = &v.witness {
        for c in w {
            text.push_str(&format!("cover {}\n", set_text(&c.iter().copied().collect())));
        }
    }
    if let Some(note) = &v.note {
        text.push_str(&format!("note: {note}\n"));
    }
    if let Some(cx) = &v.counterexample {
        text.push_str("counterexample:\n");
        text.push_str(cx);
    }
    Ok(Report::ok(serde_json::to_value(&v).expect("verdict serialises"), text).with_status(status))
}

fn fixture(which: &Fixture) -> CliResult<Report> {
    match which {
        Fixture::GltCounterexample { k, n, out } => {
            let cx = glt_counterexample(*k, *n)?;
            let files = [
                ("A.str", serialize_structure(&cx.a)),
                ("B.str", serialize_structure(&cx.b)),
                ("psi_k.fml", format!("{}\n", cx.psi)),
            ];
            std::fs::create_dir_all(out).map_err(|e| CliError::usage(format!("{}: {e}", out.display())))?;
            let mut written = Vec::new();
            for (name, body) in &files {
                let path = out.join(name);
                std::fs::write(&path, body).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                written.push(path.display().to_string());
            }
            let text = written.iter().map(|w| format!("wrote {w}\n")).collect::<String>();
            Ok(Report::ok(
                json!({ "k": k, "n": n, "i_star": cx.i_star, "size": cx.a.size(), "files": written }),
                text,
            ))
        }
        Fixture::PhiK { k } => formula_report(phi_k_paths(*k)),
        Fixture::PsiK { k } => formula_report(glt_counterexample(*k, 1)?.psi),
        Fixture::Scheme { name } => {
            let xi = builtin_scheme(name)?;
            let text = xi.to_string();
            Ok(Report::ok(
                json!({ "name": name, "scheme": text, "dim": xi.dim(), "rank": xi.rank(), "quantifier_free": xi.is_quantifier_free() }),
                text,
            ))
        }
    }
}
