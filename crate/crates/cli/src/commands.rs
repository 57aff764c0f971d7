use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use solgroup::export::{graph_to_dot, graph_to_tikz, picture_to_dot, picture_to_tikz};
use solgroup::graph_games::{cover_to_picture, gallery::NAMES, CoverMap};
use solgroup::hypergraph::min_degree;
use solgroup::order_calc::{
    exact_from_theorem, lower_from_operator_solution, upper_from_picture, Provenance, Rule,
};
use solgroup::pauli_rep::{mermin_peres_square, OperatorAssignment};
use solgroup::picture::{phase, Outcome, TraceStep};
use solgroup::{
    berge_girth, certify, deduce, gallery, reduce, solve_mod, theorem_hypothesis, verify, verify_operator_solution,
    FactKind, Graph, Hypergraph, LinearSystem, Modulus, Order, OrderFact, Picture, Subject, ZColouring,
};

use crate::input::{read_doc, read_picture, resolve, resolve_matrix, Doc};
use crate::{Cli, Command, ExportArgs};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn vector_text<T: ToString>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub fn run(cli: &Cli) -> Result<u8> {
    let json = cli.json;
    match &cli.command {
        Command::Solve(src) => {
            let t = resolve(src.file.as_deref(), src.instance.as_deref(), src.p, src.b.as_deref(), None)?;
            let sol = solve_mod(t.system.a(), t.system.b(), t.system.p())?;
            let p = t.system.p();
            if json {
                print_json(&json!({
                    "p": p,
                    "solvable": sol.is_some(),
                    "solution": sol.as_ref().map(|x| x.iter().map(|v| v.to_string()).collect::<Vec<_>>()),
                }))?;
            } else {
                match &sol {
                    Some(x) => println!("classical solution over Z_{p}: x = {}", vector_text(x)),
                    None => println!("no classical solution over Z_{p}"),
                }
            }
            Ok(if sol.is_some() { OK } else { NEGATIVE })
        }

        Command::Girth { file, instance } => {
            let a = resolve_matrix(file.as_deref(), instance.as_deref())?;
            let h = Hypergraph::from_matrix(&a);
            let report = berge_girth(&h);
            let deg = min_degree(&h).ok();
            if json {
                print_json(&json!({ "girth": report.girth.to_string(), "witness": report.witness, "min_degree": deg }))?;
            } else {
                println!("girth: {}", report.girth);
                match deg {
                    Some(d) => println!("min degree: {d}"),
                    None => println!("min degree: none (no vertices)"),
                }
                if let Some(c) = &report.witness {
                    println!("witness: vertices {} edges {}", vector_text(&c.vertices), vector_text(&c.edges));
                }
            }
            Ok(OK)
        }

        Command::CheckTheorem { file, instance, p } => {
            let a = resolve_matrix(file.as_deref(), instance.as_deref())?;
            let h = Hypergraph::from_matrix(&a);
            let hyp = theorem_hypothesis(&h);
            let girth = berge_girth(&h).girth;
            let deg = min_degree(&h).ok();
            let fact = match p {
                Some(p) if hyp.qualifies() => Some(exact_from_theorem(&a, *p)?),
                _ => None,
            };
            if json {
                print_json(&json!({
                    "hypothesis": hyp,
                    "qualifies": hyp.qualifies(),
                    "girth": girth.to_string(),
                    "min_degree": deg,
                    "fact": fact,
                }))?;
            } else {
                if hyp.qualifies() {
                    println!("{hyp}, |J|=p for all b, p");
                } else {
                    println!("{hyp}: hypothesis not met (min degree {}, girth {girth})", deg.map_or("-".into(), |d| d.to_string()));
                }
                if let Some(f) = &fact {
                    println!("{} for {}", f.kind(), f.subject());
                }
            }
            Ok(if hyp.qualifies() { OK } else { NEGATIVE })
        }

        Command::VerifyPicture(pi) => {
            let pic = read_picture(&pi.file, pi.p)?;
            let violations = verify(&pic);
            let valid = violations.is_empty();
            if json {
                let cert = if valid { Some(certify(&pic)?) } else { None };
                print_json(&json!({
                    "valid": valid,
                    "phase": phase(&pic),
                    "p": pic.system().p(),
                    "violations": violations,
                    "certificate": cert,
                }))?;
            } else if valid {
                let cert = certify(&pic)?;
                println!("valid picture, phase {} (p = {})", cert.phase(), cert.p());
                println!("certificate: {}", cert.conclusion());
                println!("picture sha256: {}", cert.picture_hash());
            } else {
                println!("invalid picture ({} violations):", violations.len());
                for v in &violations {
                    println!("  {v}");
                }
            }
            Ok(if valid { OK } else { NEGATIVE })
        }

        Command::Phase(pi) => {
            let pic = read_picture(&pi.file, pi.p)?;
            let valid = verify(&pic).is_empty();
            let ph = phase(&pic);
            if json {
                print_json(&json!({ "phase": ph, "valid": valid, "p": pic.system().p() }))?;
            } else {
                println!("{ph}");
                if !valid {
                    eprintln!("warning: picture is invalid; the phase certifies nothing");
                }
            }
            Ok(if valid { OK } else { NEGATIVE })
        }

        Command::Reduce(pi) => {
            let pic = read_picture(&pi.file, pi.p)?;
            let trace = reduce(&pic)?;
            let empty = trace.outcome == Outcome::Empty;
            if json {
                print_json(&json!({
                    "steps": trace.steps,
                    "outcome": trace.outcome,
                    "result": trace.result.to_json()?,
                }))?;
            } else {
                println!("start: V+E = {}", pic.size());
                for (i, s) in trace.steps.iter().enumerate() {
                    match s {
                        TraceStep::RemoveIsolated { vertex, size_after } => {
                            println!("{:>4}. remove isolated vertex {vertex} -> {size_after}", i + 1)
                        }
                        TraceStep::Move { violation, size_after } => {
                            println!("{:>4}. {violation} -> {size_after}", i + 1)
                        }
                    }
                }
                match &trace.outcome {
                    Outcome::Empty => println!("EMPTY"),
                    Outcome::Stuck { blockers } => {
                        println!("STUCK at V+E = {}", trace.result.size());
                        for b in blockers {
                            println!("  blocked: {b}");
                        }
                    }
                }
            }
            Ok(if empty { OK } else { NEGATIVE })
        }

        Command::Cover2picture { file, p, b, output } => {
            let cover = match read_doc(file)? {
                Doc::Cover(j) => CoverMap::from_json(&j)?,
                other => bail!("{} holds a {}, not a cover", file.display(), other.kind()),
            };
            let b = b
                .as_ref()
                .map(|b| ZColouring(b.clone()))
                .ok_or_else(|| anyhow!("cover2picture needs a colouring of the base graph: pass --b"))?;
            let pic = cover_to_picture(&cover, &b, *p)?;
            let text = serde_json::to_string_pretty(&pic.to_json()?)? + "\n";
            emit(&text, output.as_deref())?;
            Ok(OK)
        }

        Command::Order { source, pictures, assignments, explain } => order(json, source, pictures, assignments, *explain),

        Command::Gallery { name, picture, cover, graph, p, b, output } => {
            let Some(name) = name else {
                return list_gallery(json);
            };
            let inst = gallery(name)?;
            let colour = match b {
                Some(b) => {
                    let c = ZColouring(b.clone());
                    c.check(&inst.graph)?;
                    c
                }
                None => inst.default_colouring().clone(),
            };
            let no_figure = || anyhow!("{} has no shipped figure", inst.name);
            let text = if *picture {
                let pic = inst.figure_picture(&colour, *p)?.ok_or_else(no_figure)?;
                serde_json::to_string_pretty(&pic.to_json()?)?
            } else if *cover {
                let fig = inst.figure.as_ref().ok_or_else(no_figure)?;
                serde_json::to_string_pretty(&fig.to_cover(&inst.graph)?.to_json())?
            } else if *graph {
                serde_json::to_string_pretty(&inst.graph.to_json())?
            } else {
                return describe_instance(json, &inst.name);
            };
            emit(&(text + "\n"), output.as_deref())?;
            Ok(OK)
        }

        Command::ExportDot(args) => export(args, graph_to_dot, picture_to_dot),
        Command::ExportTikz(args) => export(args, graph_to_tikz, picture_to_tikz),
    }
}

fn list_gallery(json: bool) -> Result<u8> {
    let mut rows = Vec::new();
    for name in NAMES {
        let inst = gallery(name)?;
        let hyp = theorem_hypothesis(&Hypergraph::from_matrix(&solgroup::incidence_matrix(&inst.graph)?));
        rows.push(json!({
            "name": inst.name,
            "vertices": inst.graph.num_vertices(),
            "edges": inst.graph.num_edges(),
            "hypothesis": hyp,
            "figure": inst.figure.is_some(),
        }));
    }
    if json {
        print_json(&Value::Array(rows))?;
    } else {
        println!("{:<8} {:>3} {:>3}  {:<15} figure", "name", "V", "E", "hypothesis");
        for r in &rows {
            println!(
                "{:<8} {:>3} {:>3}  {:<15} {}",
                r["name"].as_str().unwrap_or(""),
                r["vertices"].to_string(),
                r["edges"].to_string(),
                r["hypothesis"].as_str().unwrap_or(""),
                if r["figure"].as_bool() == Some(true) { "yes" } else { "no" }
            );
        }
    }
    Ok(OK)
}

fn describe_instance(json: bool, name: &str) -> Result<u8> {
    let inst = gallery(name)?;
    let a = solgroup::incidence_matrix(&inst.graph)?;
    let h = Hypergraph::from_matrix(&a);
    let hyp = theorem_hypothesis(&h);
    let girth = berge_girth(&h).girth;
    if json {
        print_json(&json!({
            "name": inst.name,
            "graph": inst.graph.to_json(),
            "colourings": inst.colourings.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
            "hypothesis": hyp,
            "girth": girth.to_string(),
            "figure": inst.figure.is_some(),
        }))?;
    } else {
        println!("{}: {} vertices, {} edges", inst.name, inst.graph.num_vertices(), inst.graph.num_edges());
        println!("vertices: {}", inst.graph.names().join(" "));
        println!("girth {girth}, hypothesis {hyp}");
        println!("default colouring: {}", vector_text(&inst.default_colouring().0));
        println!("figure: {}", if inst.figure.is_some() { "yes" } else { "no" });
    }
    Ok(OK)
}

fn export(args: &ExportArgs, of_graph: fn(&Graph) -> String, of_picture: fn(&Picture) -> String) -> Result<u8> {
    let text = match (&args.file, &args.instance) {
        (Some(_), Some(_)) => bail!("give either a file or --instance, not both"),
        (None, None) => bail!("give an input file or --instance NAME"),
        (None, Some(name)) => {
            let inst = gallery(name)?;
            if args.picture {
                let b = args.b.clone().map(ZColouring).unwrap_or_else(|| inst.default_colouring().clone());
                let pic = inst
                    .figure_picture(&b, args.p.unwrap_or(Modulus::Infinite))?
                    .ok_or_else(|| anyhow!("{} has no shipped figure", inst.name))?;
                of_picture(&pic)
            } else {
                of_graph(&inst.graph)
            }
        }
        (Some(path), None) => match read_doc(path)? {
            Doc::Graph(j) => of_graph(&Graph::from_json(&j)?),
            Doc::Cover(j) => of_graph(&CoverMap::from_json(&j)?.h),
            Doc::Picture(_) => of_picture(&read_picture(path, args.p)?),
            other => bail!("cannot export a {}", other.kind()),
        },
    };
    emit(&text, args.output.as_deref())?;
    Ok(OK)
}

fn i64_vec(s: &LinearSystem) -> Result<Vec<i64>> {
    s.b()
        .iter()
        .map(|x| i64::try_from(x).map_err(|_| anyhow!("b does not fit in i64")))
        .collect()
}

fn order(
    json: bool,
    source: &crate::Source,
    pictures: &[std::path::PathBuf],
    assignments: &[std::path::PathBuf],
    explain: bool,
) -> Result<u8> {
    let t = resolve(source.file.as_deref(), source.instance.as_deref(), source.p, source.b.as_deref(), None)?;
    let a = t.system.a();
    let rows = a.to_i64_rows().ok_or_else(|| anyhow!("matrix entries do not fit in i64"))?;
    let b = i64_vec(&t.system)?;
    let p = t.system.p();
    let mut facts = vec![OrderFact::new(
        rows,
        Subject::new(Some(b.clone()), p),
        FactKind::Divides(Order::of_modulus(p)),
        Provenance::new(Rule::Relation, format!("J^{p} = 1"), vec![]),
    )?];
    let mut sources = Vec::new();

    if let Ok(f) = exact_from_theorem(a, p) {
        sources.push("hypergraph hypothesis".to_string());
        facts.push(f);
    }
    if let Some(name) = &t.instance {
        let inst = gallery(name)?;
        if let Some(pic) = inst.figure_picture(&ZColouring(b.clone()), p)? {
            let cert = certify(&pic)?;
            sources.push(format!("{} figure picture (phase {})", inst.name, cert.phase()));
            facts.push(upper_from_picture(&cert)?);
        }
    }
    let mp = mermin_peres_square()?;
    if mp.system().a() == a {
        let r = verify_operator_solution(&mp)?;
        let sol = r.solution.ok_or_else(|| anyhow!("shipped magic square failed verification"))?;
        sources.push("magic square operator solution over Z_2".to_string());
        facts.push(lower_from_operator_solution(&sol)?);
    }
    for path in pictures {
        let pic = read_picture(path, None)?;
        let cert = certify(&pic).with_context(|| format!("{} is not a valid picture", path.display()))?;
        sources.push(format!("picture {} (phase {})", path.display(), cert.phase()));
        facts.push(upper_from_picture(&cert)?);
    }
    for path in assignments {
        let asg = match read_doc(path)? {
            Doc::Assignment(j) => OperatorAssignment::from_json(&j, None)?,
            other => bail!("{} holds a {}, not an operator assignment", path.display(), other.kind()),
        };
        let r = verify_operator_solution(&asg)?;
        let Some(sol) = r.solution else {
            bail!("{}: operator solution rejected: {:?}", path.display(), r.failures);
        };
        sources.push(format!("operator solution {}", path.display()));
        facts.push(lower_from_operator_solution(&sol)?);
    }

    let closure = deduce(&facts)?;
    let summary = closure.facts();
    if json {
        print_json(&json!({
            "sources": sources,
            "facts": summary,
            "notes": closure.notes(),
        }))?;
    } else {
        let label = t.instance.as_deref().unwrap_or("input system");
        println!("order of J for {label}, b = {}, p = {p}", vector_text(&b));
        println!("sources: {}", if sources.is_empty() { "none".to_string() } else { sources.join("; ") });
        println!();
        let cells: Vec<(String, String, String)> = summary
            .iter()
            .map(|f| {
                let pv = f.provenance();
                (f.subject().to_string(), f.kind().to_string(), format!("{:?}: {}", pv.rule, pv.detail))
            })
            .collect();
        let w0 = cells.iter().map(|c| c.0.chars().count()).max().unwrap_or(0).max(7);
        let w1 = cells.iter().map(|c| c.1.len()).max().unwrap_or(0).max(4);
        println!("{:<w0$}  {:<w1$}  provenance", "subject", "fact");
        for (s, k, pv) in &cells {
            let pad = w0 - s.chars().count();
            println!("{s}{}  {k:<w1$}  {pv}", " ".repeat(pad));
        }
        for n in closure.notes() {
            println!("note: {n}");
        }
        if explain {
            for f in &summary {
                println!();
                print!("{}", f.explain());
            }
        }
    }
    Ok(OK)
}
