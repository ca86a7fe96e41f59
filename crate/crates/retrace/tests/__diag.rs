use retrace::corpus::{builtin_corpus, shortest_crash_path};
use retrace::explore::{reproduce, Budget, EngineKind, ReproduceOptions, SelectorConfig};
use retrace::predictor::Predictor;
use retrace::score::AblationMode;

fn run(case: &retrace::corpus::CorpusCase, abl: AblationMode, seed: u64) -> u64 {
    let target = case.target().unwrap();
    let opts = ReproduceOptions {
        engine: EngineKind::Guided, ablation: abl,
        selector: SelectorConfig { rng_seed: seed, ..Default::default() },
        budget: Budget { max_actions: 500, budget_seconds: 3600.0 },
        ..Default::default()
    };
    let mut pred = Predictor::offline();
    let res = reproduce(&case.app, &target, &mut pred, &opts).unwrap();
    if res.success { res.actions } else { 500 }
}

#[test]
fn per_case() {
    for case in builtin_corpus() {
        if !case.expected_reproducible { continue; }
        let target = case.target().unwrap();
        let depth = shortest_crash_path(&case.app, &target, 12).unwrap();
        if depth < 4 { continue; }
        let f: Vec<u64> = (0..5).map(|s| run(&case, AblationMode::None, s)).collect();
        let wp: Vec<u64> = (0..5).map(|s| run(&case, AblationMode::NoPageReach, s)).collect();
        let ww: Vec<u64> = (0..5).map(|s| run(&case, AblationMode::NoWidgetHit, s)).collect();
        let m = |v: &Vec<u64>| v.iter().sum::<u64>() as f64 / 5.0;
        println!("{:<20} d={} full={:>6.1} wp={:>6.1} ww={:>6.1}   full={:?}", case.name, depth, m(&f), m(&wp), m(&ww), f);
    }
}
