use std::error::Error;
use std::fs;
use std::path::Path;

use smallcanc::algebra::{Field, Poly};
use smallcanc::axioms::{check_all, ring_verdict, DEFAULT_MAX_CHAIN};
use smallcanc::chart::Charter;
use smallcanc::examples::{
    gen_corpus, gen_group_algebra, gen_trinomial, inverse_query, screen_trinomials,
    shipped_presentations, single_relator_cm, trinomial_candidates, ScreenOutcome,
};
use smallcanc::greedy::Greedy;
use smallcanc::multiturn::{basis_sample, derived_monomials, multi_turn, SpaceCaps};
use smallcanc::oracle::{nontriviality_check, Nontriviality, Oracle, OracleOutcome, DEFAULT_ORACLE_BOUND};
use smallcanc::relations::{ClosureCaps, Presentation, RelationSystem};
use smallcanc::report::{render_all, Report};
use smallcanc::words::{Alphabet, Word};

use crate::{Gen, Options, Query};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

pub const SEED_VAR: &str = "SMALLCANC_SEED";

/// Rendered output and the process exit code.
pub struct Output {
    pub text: String,
    pub code: u8,
}

impl Output {
    fn reports(reports: &[Report], opts: &Options, code: u8) -> Self {
        Output {
            text: render_all(reports, opts.format),
            code,
        }
    }

    fn plain(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn caps(opts: &Options) -> ClosureCaps {
    ClosureCaps {
        max_relations: opts.max_relations,
        max_word_length: opts.max_wordlen,
    }
}

fn load(file: &Path, opts: &Options) -> Result<(Presentation, RelationSystem)> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let mut pres = Presentation::parse(&text)?;
    if let Some(t) = opts.tau {
        pres.tau = t;
    }
    let sys = RelationSystem::from_presentation(&pres, caps(opts))?;
    Ok((pres, sys))
}

fn config(file: &Path, pres: &Presentation, sys: &RelationSystem, opts: &Options, oracle_bound: Option<usize>) -> Report {
    let mut r = Report::new("config");
    r.push("file", file.display());
    r.push("field", sys.field());
    r.push("tau", sys.tau());
    if sys.tau() < 10 {
        r.push("warning", "tau below 10");
    }
    r.push("alphabet", sys.alphabet().names().join(","));
    r.push("input_relations", pres.relations.len());
    r.push("closed_relations", sys.relations().len());
    r.push("monomials", sys.monomials().len());
    r.push("virt_depth", opts.virt_depth);
    r.push("max_relations", opts.max_relations);
    r.push("max_wordlen", opts.max_wordlen);
    r.push("policy", opts.policy);
    r.push("steps", opts.steps);
    r.push("oracle_bound", oracle_bound.map_or_else(|| "-".to_string(), |b| b.to_string()));
    r.push("order", "<_f: f-characteristic, then length, then letter order");
    r.push("lambda_identity", "0 (the empty word needs no pieces)");
    r
}

pub fn check(file: &Path, opts: &Options) -> Result<Output> {
    let (pres, sys) = load(file, opts)?;
    let mut reports = vec![config(file, &pres, &sys, opts, None)];
    let axioms = check_all(&sys, DEFAULT_MAX_CHAIN);
    reports.extend(axioms.iter().map(|a| a.to_report(&sys)));
    let ring = ring_verdict(&axioms);
    let mut verdict = Report::new("verdict");
    verdict.push("small_pieces", sys.small_pieces().len());
    verdict.push("ring", ring);
    reports.push(verdict);
    Ok(Output::reports(&reports, opts, if ring { 0 } else { 1 }))
}

fn parse_poly(sys: &RelationSystem, text: &str) -> Result<Poly> {
    Ok(sys.parse_poly(text)?)
}

pub fn query(file: &Path, q: &Query, opts: &Options) -> Result<Output> {
    let (pres, sys) = load(file, opts)?;
    let oracle_bound = match q {
        Query::Oracle { poly } => Some(opts.oracle_bound.unwrap_or(parse_poly(&sys, poly)?.max_len() + 2)),
        Query::Nontrivial => Some(opts.oracle_bound.unwrap_or(DEFAULT_ORACLE_BOUND)),
        _ => None,
    };
    let mut reports = vec![config(file, &pres, &sys, opts, oracle_bound)];
    let mut code = 0;
    let charter = || Charter::new(&sys, opts.virt_depth);
    let space_caps = SpaceCaps::default();
    let mut r;
    match q {
        Query::Pieces => {
            r = Report::new("pieces");
            r.push("count", sys.small_pieces().len());
            for p in sys.small_pieces() {
                r.push("piece", sys.format_word(p));
            }
        }
        Query::Lambda { word } => {
            let w = sys.parse_word(word)?;
            r = Report::new("lambda");
            r.push("word", sys.format_word(&w));
            r.push("lambda", sys.lambda(&w)?);
        }
        Query::Chart { word } => {
            let ch = charter()?;
            let w = sys.parse_word(word)?;
            let chart = ch.chart(&w);
            r = Report::new("chart");
            r.push("word", sys.format_word(&w));
            r.push("columns", "start len pattern lambda member virtual");
            for line in chart.dump(&sys).lines() {
                r.push("entry", line);
            }
            r.push("overlap_violations", ch.overlap_violations(&w).len());
        }
        Query::Fchar { word } => {
            let ch = charter()?;
            let w = sys.parse_word(word)?;
            let f = ch.f_char(&w);
            r = Report::new("fchar");
            r.push("word", sys.format_word(&w));
            r.push("f", f);
            r.push("min_cov", f.min_cov);
            r.push("n_virt", f.n_virt);
            for occ in ch.virtual_members(&w) {
                r.push("virtual", format!("{} {} {}", occ.start, occ.len, sys.format_word(&occ.pattern)));
            }
        }
        Query::Level { word } => {
            let ch = charter()?;
            let w = sys.parse_word(word)?;
            r = Report::new("level");
            r.push("word", sys.format_word(&w));
            r.push("f", ch.f_char(&w));
            r.push("level", ch.filtration_level(&w));
        }
        Query::Derived { word } => {
            let ch = charter()?;
            let w = sys.parse_word(word)?;
            let d = derived_monomials(&ch, &w, &space_caps);
            r = Report::new("derived");
            r.push("root", sys.format_word(&d.root));
            r.push("count", d.monomials.len());
            r.push("truncated", d.truncated);
            for m in &d.monomials {
                r.push("monomial", sys.format_word(m));
            }
            for e in &d.edges {
                r.push(
                    "edge",
                    format!(
                        "{} -> {} lands_virtual={}",
                        sys.format_word(&e.from),
                        sys.format_word(&e.to),
                        e.lands_virtual as u8
                    ),
                );
            }
        }
        Query::Turn { word, occ, rel } => {
            let ch = charter()?;
            let w = sys.parse_word(word)?;
            let chart = ch.chart(&w);
            let entry = chart
                .entries
                .get(*occ)
                .ok_or_else(|| format!("occurrence {occ} out of range ({} in chart)", chart.entries.len()))?;
            let relation = sys
                .relations()
                .get(*rel)
                .ok_or_else(|| format!("relation {rel} out of range ({} closed)", sys.relations().len()))?;
            if !relation.contains(&entry.occurrence.pattern) {
                let holders: Vec<String> = sys
                    .relations_containing(&entry.occurrence.pattern)
                    .iter()
                    .map(|i| i.to_string())
                    .collect();
                return Err(format!(
                    "{} is not a monomial of relation {rel}; relations containing it: {}",
                    sys.format_word(&entry.occurrence.pattern),
                    if holders.is_empty() { "none".to_string() } else { holders.join(",") }
                )
                .into());
            }
            let t = multi_turn(&w, &entry.occurrence, relation)?;
            r = Report::new("turn");
            r.push("host", sys.format_word(&t.host));
            r.push("occurrence", format!("{} {}", t.occurrence.start, t.occurrence.len));
            r.push("relation", sys.format_poly(&t.relation));
            r.push("result", sys.format_poly(&t.result));
            r.push("layout", sys.format_poly(&t.layout));
            r.push("defect_zero", t.defect().is_zero());
        }
        Query::Member { poly } => {
            let greedy = Greedy::new(charter()?);
            let p = parse_poly(&sys, poly)?;
            let cert = greedy.is_member(&p, opts.policy, opts.steps);
            r = Report::new("member");
            r.push("input", sys.format_poly(&cert.input));
            r.push("verdict", cert.verdict);
            r.push("steps", cert.steps.len());
            for s in &cert.steps {
                r.push(
                    "step",
                    format!(
                        "{} * ({}) * [{}] * ({})",
                        s.scalar,
                        sys.format_word(&s.left),
                        sys.format_poly(&s.q),
                        sys.format_word(&s.right)
                    ),
                );
            }
            if let Some(nf) = &cert.normal_form {
                r.push("normal_form", sys.format_poly(nf));
            }
            r.push("certificate_bound", cert.bound);
            r.push("certificate_verified", cert.verify());
            if let Some(agree) = cert.branches_agree {
                r.push("branches_agree", agree);
            }
            r.push("explored", cert.explored);
        }
        Query::Oracle { poly } => {
            let p = parse_poly(&sys, poly)?;
            let bound = oracle_bound.expect("set above");
            let oracle = Oracle::new(&sys);
            let v = oracle.member(&p, bound)?;
            r = Report::new("oracle");
            r.push("input", sys.format_poly(&p));
            r.push("outcome", &v.outcome);
            r.push("bound", v.bound);
            r.push("dimension", v.dimension);
            if let OracleOutcome::Member(terms) = &v.outcome {
                for t in terms {
                    r.push(
                        "term",
                        format!(
                            "{} * ({}) * row{} * ({})",
                            t.scalar,
                            sys.format_word(&t.left),
                            t.row,
                            sys.format_word(&t.right)
                        ),
                    );
                }
                r.push("recombines", oracle.evaluate(terms).sub(&p).is_zero());
            }
        }
        Query::BasisSample { length } => {
            let ch = charter()?;
            let b = basis_sample(&ch, &space_caps, *length);
            r = Report::new("basis-sample");
            r.push("length", length);
            r.push("spaces", b.spaces.len());
            r.push("elements", b.elements.len());
            r.push("truncated", b.truncated);
            for e in &b.elements {
                r.push("element", format!("space{}: {}", e.space_id, sys.format_poly(&e.representative)));
            }
        }
        Query::Nontrivial => {
            let bound = oracle_bound.expect("set above");
            let n = nontriviality_check(&sys, bound)?;
            r = Report::new("nontrivial");
            r.push("passes", n.passes());
            r.push("method", n.method());
            r.push("bound", n.bound);
            match &n.outcome {
                Nontriviality::Character(values) => {
                    for (name, v) in sys.alphabet().names().iter().zip(values) {
                        r.push("value", format!("{name}={v}"));
                    }
                }
                Nontriviality::NotInSpan { dimension } => {
                    r.push("dimension", dimension);
                }
                Nontriviality::Trivial(terms) => {
                    r.push("layout_terms", terms.len());
                }
                Nontriviality::EmptySystem => {}
            }
            if !n.passes() {
                code = 1;
            }
        }
    }
    reports.push(r);
    Ok(Output::reports(&reports, opts, code))
}

fn alphabet(text: &str) -> Result<Alphabet> {
    Ok(Alphabet::new(text.split(',').map(str::trim))?)
}

fn field(text: &str) -> Result<Field> {
    Ok(text.parse::<Field>()?)
}

fn corpus_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_VAR) {
            Ok(v) => Ok(v.trim().parse().map_err(|e| format!("{SEED_VAR}={v:?}: {e}"))?),
            Err(_) => Ok(0),
        },
    }
}

fn write_files(out: &Path, files: &[(String, String)]) -> Result<String> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let mut listing = String::new();
    for (name, text) in files {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        listing.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(listing)
}

pub fn generate(what: &Gen, opts: &Options) -> Result<Output> {
    let tau_or = |t: u32| opts.tau.unwrap_or(t);
    match what {
        Gen::Corpus { seed, out } => {
            let seed = corpus_seed(*seed)?;
            let corpus = gen_corpus(seed);
            match out {
                Some(dir) => {
                    let files: Vec<_> = corpus.iter().map(|c| (c.file_name(), c.file_text())).collect();
                    Ok(Output::plain(write_files(dir, &files)?))
                }
                None => Ok(Output::plain(
                    corpus.iter().map(|c| c.file_text()).collect::<Vec<_>>().join("\n"),
                )),
            }
        }
        Gen::Shipped { out } => Ok(Output::plain(write_files(out, &shipped_presentations())?)),
        Gen::GroupAlgebra {
            alphabet: a,
            field: f,
            gen_tau,
            relators,
        } => {
            let a = alphabet(a)?;
            let words = relators
                .iter()
                .map(|r| a.parse_word(r))
                .collect::<std::result::Result<Vec<Word>, _>>()?;
            let pres = gen_group_algebra(&a, &words, field(f)?, tau_or(*gen_tau))?;
            Ok(Output::plain(pres.to_text()))
        }
        Gen::Cm {
            alphabet: a,
            length,
            field: f,
            gen_tau,
        } => {
            let a = alphabet(a)?;
            let relator = single_relator_cm(&a, *length)
                .ok_or_else(|| format!("no relator of length {length} with single-letter pieces"))?;
            let pres = gen_group_algebra(&a, &[relator], field(f)?, tau_or(*gen_tau))?;
            Ok(Output::plain(pres.to_text()))
        }
        Gen::Trinomial {
            alphabet: a,
            w,
            v,
            field: f,
            gen_tau,
        } => {
            let a = alphabet(a)?;
            let f = field(f)?;
            let (w, v) = (a.parse_word(w)?, a.parse_word(v)?);
            let pres = gen_trinomial(&a, &w, &v, f, tau_or(*gen_tau))?;
            let query = inverse_query(&w, &v, f);
            Ok(Output::plain(format!(
                "# inverse query: {}\n{}",
                query.format(&a),
                pres.to_text()
            )))
        }
        Gen::Screen {
            alphabet: a,
            w,
            field: f,
            max_len,
            gen_tau,
        } => {
            let a = alphabet(a)?;
            let f = field(f)?;
            let w = a.parse_word(w)?;
            let tau = tau_or(*gen_tau);
            let candidates = trinomial_candidates(&a, &w, *max_len);
            let mut reports = Vec::new();
            let mut head = Report::new("config");
            head.push("alphabet", a.names().join(","));
            head.push("field", f);
            head.push("tau", tau);
            head.push("w", a.format_word(&w));
            head.push("candidates", candidates.len());
            head.push("max_relations", opts.max_relations);
            head.push("max_wordlen", opts.max_wordlen);
            head.push("order", "<_f: f-characteristic, then length, then letter order");
            head.push("lambda_identity", "0 (the empty word needs no pieces)");
            reports.push(head);
            for s in screen_trinomials(&a, &w, &candidates, f, tau, caps(opts)) {
                let mut r = Report::new(format!("candidate {}", a.format_word(&s.v)));
                r.push("v", a.format_word(&s.v));
                match &s.outcome {
                    ScreenOutcome::Diverged(e) => {
                        r.push("outcome", "diverged");
                        r.push("reason", e);
                    }
                    ScreenOutcome::Checked { passes, reports: axioms } => {
                        r.push("outcome", if *passes { "passes" } else { "fails" });
                        for ax in axioms {
                            r.push(ax.axiom.to_string(), ax.status);
                        }
                    }
                }
                reports.push(r);
            }
            Ok(Output::reports(&reports, opts, 0))
        }
    }
}
