use chrono::{DateTime, NaiveDate};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use litrepo::arxiv::PaperRecord;
use litrepo::links::extract_corpus;
use litrepo::maturity::classify_batch;
use litrepo::{ExecMode, KnowledgeBase, RepoMetrics, RepoRef, TierRule};

const FILLER: &str = "We evaluate a transformer model on de-identified discharge summaries \
    and report gains in macro F1 over rule-based baselines across three sites. ";

fn corpus(n: usize) -> Vec<PaperRecord> {
    (0..n)
        .map(|i| PaperRecord {
            arxiv_id: format!("2101.{i:05}"),
            title: format!("Study {i}"),
            abstract_text: format!(
                "{}Code: https://github.com/lab{}/tool-{}. {}",
                FILLER.repeat(6),
                i % 97,
                i % 389,
                FILLER.repeat(4)
            ),
            submitted: NaiveDate::from_ymd_opt(2022, 3, 1).unwrap(),
        })
        .collect()
}

fn metrics(n: usize) -> Vec<RepoMetrics> {
    (0..n)
        .map(|i| {
            RepoMetrics::new(
                format!("r{i}"),
                (i * 37 % 400) as u64,
                (i % 50) as u64,
                (i % 9) as u64,
                (i % 20) as u64,
                DateTime::UNIX_EPOCH,
            )
        })
        .collect()
}

fn store(n: usize) -> KnowledgeBase {
    let rule = TierRule::default();
    let mut kb = KnowledgeBase::new();
    for m in metrics(n) {
        let repo = RepoRef::new("bench", &m.name).unwrap();
        let tier = litrepo::classify(&m, &rule);
        kb.upsert(repo, m, tier).unwrap();
    }
    kb
}

const MODES: [ExecMode; 2] = [ExecMode::Serial, ExecMode::Parallel];

fn bench_extract(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_corpus");
    for n in [1_000, 10_000] {
        let papers = corpus(n);
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &papers, |b, p| {
                b.iter(|| extract_corpus(p, mode))
            });
        }
    }
    group.finish();
}

fn bench_classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_batch");
    let rule = TierRule::default();
    for n in [10_000, 100_000] {
        let ms = metrics(n);
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &ms, |b, ms| {
                b.iter(|| classify_batch(ms, &rule, mode))
            });
        }
    }
    group.finish();
}

fn bench_report(c: &mut Criterion) {
    let mut group = c.benchmark_group("render_report");
    for n in [1_000, 20_000] {
        let kb = store(n);
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &kb, |b, kb| {
                b.iter(|| kb.render_report(mode))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_extract, bench_classify, bench_report);
criterion_main!(benches);
