use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use topicseg::corpus::{Corpus, StrModel, StrParams};
use topicseg::eval::{
    icc, rating_summary, segmentation_metrics, timeout_baseline, IccVariant, Question, RatingMatrix, RatingStore,
    SegmentationMetrics,
};
use topicseg::io::{read_jsonl, write_json, write_jsonl};
use topicseg::kos::{Classification, KeywordCategoryTable, Thesaurus, DEFAULT_NATIVE_VOCABULARY};
use topicseg::log::{
    dataset_stats, filter_sessions, parse_log, sample_evaluation_set, sessionize as split_sessions, SampleSpec, Session,
    SessionFilter,
};
use topicseg::pipeline::{KnowledgeBase, KnowledgeFiles, Pipeline};
use topicseg::render::SessionTable;
use topicseg::segment::assign_topic_numbers;
use topicseg::text::StopWords;
use topicseg::AnnotatedSession;

use crate::{Format, IccArg, KnowledgeArgs, StopWordArgs};

/// A list given for one language replaces only that language's built-in list.
fn stop_words(args: &StopWordArgs) -> Result<StopWords> {
    Ok(StopWords::from_files(args.stopwords_en.as_deref(), args.stopwords_de.as_deref())?)
}

pub fn build_lookup(corpus: &Path, thesaurus: &Path, classification: Option<&Path>, out: &Path) -> Result<()> {
    let corpus = Corpus::load(corpus)?;
    let thesaurus = Thesaurus::load(thesaurus)?;
    let table = KeywordCategoryTable::build(&corpus, &thesaurus, DEFAULT_NATIVE_VOCABULARY);
    if let Some(p) = classification {
        table.validate(&Classification::load(p)?)?;
    }
    write_json(out, &table)?;
    println!("{} keywords mapped to categories -> {}", table.len(), out.display());
    Ok(())
}

pub fn build_str(
    corpus: &Path,
    thesaurus: &Path,
    min_count: usize,
    top_k: usize,
    stop: &StopWordArgs,
    out: &Path,
) -> Result<()> {
    let corpus = Corpus::load(corpus)?;
    let thesaurus = Thesaurus::load(thesaurus)?;
    let model = StrModel::build(
        &corpus,
        &thesaurus,
        DEFAULT_NATIVE_VOCABULARY,
        &stop_words(stop)?,
        StrParams { min_count, top_k },
    )?;
    write_json(out, &model)?;
    println!("{} free terms -> {}", model.len(), out.display());
    Ok(())
}

pub struct SessionizeOptions {
    pub log: PathBuf,
    pub out: PathBuf,
    pub timeout_min: i64,
    pub min_actions: usize,
    pub max_actions: usize,
    pub max_duration_min: i64,
    pub sample: Option<usize>,
    pub cap: usize,
    pub seed: u64,
}

pub fn sessionize(o: &SessionizeOptions) -> Result<()> {
    if o.timeout_min <= 0 {
        bail!("--timeout-min must be positive");
    }
    if o.min_actions > o.max_actions {
        bail!("--min-actions exceeds --max-actions");
    }
    let events = parse_log(&o.log)?;
    let all = split_sessions(&events, o.timeout_min * 60);
    let found = all.len();
    let filter = SessionFilter {
        min_actions: o.min_actions,
        max_actions: o.max_actions,
        max_duration: o.max_duration_min * 60,
    };
    let mut sessions = filter_sessions(all, &filter);
    let kept = sessions.len();
    if let Some(n) = o.sample {
        sessions = sample_evaluation_set(
            &sessions,
            &SampleSpec {
                target_n: n,
                per_length_cap: o.cap,
                seed: o.seed,
            },
        );
    }
    write_jsonl(&o.out, &sessions)?;
    println!(
        "{} events, {found} sessions, {kept} after filtering, {} written -> {}",
        events.len(),
        sessions.len(),
        o.out.display()
    );
    Ok(())
}

fn knowledge_base(k: &KnowledgeArgs, corpus: &Corpus) -> Result<KnowledgeBase> {
    let files = KnowledgeFiles {
        thesaurus: &k.thesaurus,
        classification: &k.classification,
        crosswalk: &k.crosswalk,
        lookup: k.lookup.as_deref(),
        str_model: k.str_model.as_deref(),
    };
    Ok(KnowledgeBase::load(files, corpus, stop_words(&k.stop_words)?, StrParams::default())?)
}

pub fn annotate(k: &KnowledgeArgs, input: &Path, out: &Path, epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        bail!("--epsilon must lie in [0, 1)");
    }
    let corpus = Corpus::load(&k.corpus)?;
    let kb = knowledge_base(k, &corpus)?;
    let sessions: Vec<Session> = read_jsonl(input)?;
    for s in &sessions {
        s.validate()?;
    }
    let pipeline = Pipeline::new(&corpus, &kb).with_epsilon(epsilon);
    let annotated: Vec<AnnotatedSession> = sessions.iter().map(|s| pipeline.annotate(s)).collect();
    let flagged = annotated
        .iter()
        .flat_map(|s| &s.actions)
        .filter(|a| !a.flags.is_empty())
        .count();
    write_jsonl(out, &annotated)?;
    println!("{} sessions annotated ({flagged} actions flagged) -> {}", annotated.len(), out.display());
    Ok(())
}

pub fn segment(input: &Path, out: &Path, stop: &StopWordArgs) -> Result<()> {
    let stop = stop_words(stop)?;
    let mut sessions: Vec<AnnotatedSession> = read_jsonl(input)?;
    for s in &mut sessions {
        assign_topic_numbers(s, &stop)?;
    }
    let boundaries: usize = sessions.iter().map(|s| topicseg::segment::boundaries(&s.actions).len()).sum();
    write_jsonl(out, &sessions)?;
    println!("{} sessions, {boundaries} segment boundaries -> {}", sessions.len(), out.display());
    Ok(())
}

pub fn render(
    input: &Path,
    session: &str,
    format: Format,
    corpus: Option<&Path>,
    classification: Option<&Path>,
) -> Result<()> {
    let sessions: Vec<AnnotatedSession> = read_jsonl(input)?;
    let s = sessions
        .iter()
        .find(|s| s.id == session)
        .with_context(|| format!("no session {session:?} in {}", input.display()))?;
    if s.actions.iter().any(|a| a.topic_number.is_none()) {
        bail!("session {session:?} has not been segmented");
    }
    let corpus = corpus.map(Corpus::load).transpose()?.unwrap_or_default();
    let classification = classification.map(Classification::load).transpose()?.unwrap_or_default();
    let table = SessionTable::build(s, &corpus, &classification);
    match format {
        Format::Text => print!("{}", table.to_text()),
        Format::Html => print!("{}", table.to_html()),
    }
    Ok(())
}

/// Topic numbers of one session, either given directly or read off a segmented session.
#[derive(Deserialize)]
#[serde(untagged)]
enum NumberingRecord {
    Numbers { id: String, topic_numbers: Vec<u32> },
    Session(AnnotatedSession),
}

struct Numbering {
    numbers: Vec<u32>,
    timestamps: Option<Vec<i64>>,
}

fn read_numberings(path: &Path) -> Result<BTreeMap<String, Numbering>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: NumberingRecord =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let (id, numbering) = match record {
            NumberingRecord::Numbers { id, topic_numbers } => (id, Numbering { numbers: topic_numbers, timestamps: None }),
            NumberingRecord::Session(s) => {
                let numbers = s
                    .actions
                    .iter()
                    .map(|a| a.topic_number)
                    .collect::<Option<Vec<u32>>>()
                    .with_context(|| format!("{}:{}: session {} is not segmented", path.display(), i + 1, s.id))?;
                let timestamps = s.actions.iter().map(|a| a.action.timestamp).collect();
                (s.id, Numbering { numbers, timestamps: Some(timestamps) })
            }
        };
        if out.insert(id.clone(), numbering).is_some() {
            bail!("{}: session {id:?} appears twice", path.display());
        }
    }
    Ok(out)
}

fn mean_metrics(all: &[SegmentationMetrics]) -> SegmentationMetrics {
    let n = all.len() as f64;
    let avg = |f: fn(&SegmentationMetrics) -> f64| all.iter().map(f).sum::<f64>() / n;
    SegmentationMetrics {
        boundary_precision: avg(|m| m.boundary_precision),
        boundary_recall: avg(|m| m.boundary_recall),
        boundary_f1: avg(|m| m.boundary_f1),
        pairwise_precision: avg(|m| m.pairwise_precision),
        pairwise_recall: avg(|m| m.pairwise_recall),
        pairwise_f1: avg(|m| m.pairwise_f1),
        rand_index: avg(|m| m.rand_index),
    }
}

fn print_metrics(name: &str, m: &SegmentationMetrics) {
    println!(
        "{name:<12} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
        m.boundary_precision,
        m.boundary_recall,
        m.boundary_f1,
        m.pairwise_precision,
        m.pairwise_recall,
        m.pairwise_f1,
        m.rand_index
    );
}

pub fn evaluate(
    ratings: Option<&Path>,
    comparison: Option<(&Path, &Path)>,
    variant: IccArg,
    baseline_gap: Option<i64>,
) -> Result<()> {
    if ratings.is_none() && comparison.is_none() {
        bail!("nothing to evaluate: give --ratings and/or --gold with --predicted");
    }
    if let Some(path) = ratings {
        let store = RatingStore::load(path)?;
        let variant = match variant {
            IccArg::Single => IccVariant::Single,
            IccArg::Average => IccVariant::Average,
        };
        let assessors: std::collections::BTreeSet<&str> = store.iter().map(|r| r.assessor.as_str()).collect();
        let sessions: std::collections::BTreeSet<&str> = store.iter().map(|r| r.session_id.as_str()).collect();
        println!(
            "{} ratings from {} assessors over {} sessions",
            store.len(),
            assessors.len(),
            sessions.len()
        );
        println!("{:<14} {:>7} {:>4} {:>4}   {:>3} {:>3} {:>3} {:>3} {:>3}", "question", "mean", "n", "dnk", "-2", "-1", "0", "1", "2");
        for (name, q) in [("topic", Question::Topic), ("segmentation", Question::Segmentation)] {
            match rating_summary(store.iter(), q) {
                Ok(s) => {
                    let h = s.histogram;
                    println!(
                        "{name:<14} {:>7.3} {:>4} {:>4}   {:>3} {:>3} {:>3} {:>3} {:>3}",
                        s.mean, s.n, s.dnk, h[0], h[1], h[2], h[3], h[4]
                    );
                }
                Err(e) => println!("{name:<14} {e}"),
            }
        }
        println!("{}", variant.name());
        for (name, q) in [("topic", Question::Topic), ("segmentation", Question::Segmentation)] {
            let matrix = RatingMatrix::from_ratings(store.iter(), q);
            let rows = matrix.complete_rows();
            match icc(&rows, variant) {
                Ok(v) => println!("{name:<14} {v:>7.3}  ({} complete sessions x {} assessors)", rows.len(), matrix.raters.len()),
                Err(e) => println!("{name:<14} n/a: {e}"),
            }
        }
    }
    if let Some((gold, predicted)) = comparison {
        let gold = read_numberings(gold)?;
        let predicted = read_numberings(predicted)?;
        let mut ours = Vec::new();
        let mut baseline = Vec::new();
        for (id, g) in &gold {
            let p = predicted
                .get(id)
                .with_context(|| format!("session {id:?} has a gold numbering but no prediction"))?;
            ours.push(segmentation_metrics(&p.numbers, &g.numbers).with_context(|| format!("session {id:?}"))?);
            if let Some(gap) = baseline_gap {
                let stamps = p
                    .timestamps
                    .as_ref()
                    .or(g.timestamps.as_ref())
                    .with_context(|| format!("session {id:?}: the time baseline needs timestamps"))?;
                baseline.push(segmentation_metrics(&timeout_baseline(stamps, gap), &g.numbers)?);
            }
        }
        if ours.is_empty() {
            bail!("the gold file holds no sessions");
        }
        println!("segmentation against gold, mean over {} sessions", ours.len());
        println!(
            "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "", "bnd-P", "bnd-R", "bnd-F1", "pair-P", "pair-R", "pair-F1", "rand"
        );
        print_metrics("predicted", &mean_metrics(&ours));
        if let Some(gap) = baseline_gap {
            print_metrics(&format!("gap>{gap}s"), &mean_metrics(&baseline));
        }
    }
    Ok(())
}

pub fn stats(input: &Path) -> Result<()> {
    let sessions: Vec<Session> = read_jsonl(input)?;
    let s = dataset_stats(&sessions);
    println!("sessions        {}", s.sessions);
    println!("actions         {}", s.total_actions);
    println!("per session     {:.2} (min {}, max {})", s.mean_actions, s.min_actions, s.max_actions);
    println!("mean duration   {:.0} s", s.mean_duration);
    for (kind, n) in &s.kind_counts {
        println!("{:<15} {n}", kind.as_str());
    }
    Ok(())
}

pub fn serve(config: topicseg_service::ServiceConfig) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let running = topicseg_service::spawn(&config).await?;
        println!("listening on http://{}", running.addr);
        running.wait().await
    })?;
    Ok(())
}
