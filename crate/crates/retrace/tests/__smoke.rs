use retrace::corpus::{builtin_corpus, shortest_crash_path};
use retrace::explore::{reproduce, Budget, EngineKind, ReproduceOptions, SelectorConfig};
use retrace::predictor::Predictor;
use retrace::replay::{minimize, replay_reproduces};
use retrace::score::AblationMode;

fn run(case: &retrace::corpus::CorpusCase, engine: EngineKind, abl: AblationMode, seed: u64) -> (bool, u64) {
    let target = case.target().unwrap();
    let opts = ReproduceOptions {
        engine, ablation: abl,
        selector: SelectorConfig { rng_seed: seed, ..Default::default() },
        budget: Budget { max_actions: 500, budget_seconds: 3600.0 },
        ..Default::default()
    };
    let mut pred = Predictor::offline();
    let res = reproduce(&case.app, &target, &mut pred, &opts).unwrap();
    (res.success, if res.success { res.actions } else { 500 })
}

fn median(mut v: Vec<u64>) -> f64 {
    v.sort();
    let n = v.len();
    if n % 2 == 1 { v[n/2] as f64 } else { (v[n/2-1] + v[n/2]) as f64 / 2.0 }
}

#[test]
fn engines_compare() {
    let cases = builtin_corpus();
    let solvable: Vec<_> = cases.iter().filter(|c| c.expected_reproducible).collect();
    let mut guided_counts = Vec::new();
    let mut random_counts = Vec::new();
    let mut wp_counts_d4 = Vec::new();
    let mut ww_counts_d4 = Vec::new();
    let mut full_counts_d4 = Vec::new();
    let mut rand_succ = 0; let mut rand_total = 0;
    for case in &solvable {
        let target = case.target().unwrap();
        let depth = shortest_crash_path(&case.app, &target, 12).unwrap();
        for seed in 0..5u64 {
            let (_, ga) = run(case, EngineKind::Guided, AblationMode::None, seed);
            let (rs, ra) = run(case, EngineKind::Random, AblationMode::None, seed);
            guided_counts.push(ga);
            random_counts.push(ra);
            rand_total += 1; if rs { rand_succ += 1; }
            if depth >= 4 {
                full_counts_d4.push(ga);
                let (_, wa) = run(case, EngineKind::Guided, AblationMode::NoPageReach, seed);
                let (_, wwa) = run(case, EngineKind::Guided, AblationMode::NoWidgetHit, seed);
                wp_counts_d4.push(wa);
                ww_counts_d4.push(wwa);
            }
            if depth == 1 {
                let (ws, _) = run(case, EngineKind::Guided, AblationMode::NoPageReach, seed);
                let (wws, _) = run(case, EngineKind::Guided, AblationMode::NoWidgetHit, seed);
                assert!(ws && wws, "ablation failed depth-1 {} seed {}", case.name, seed);
            }
        }
    }
    let gm = median(guided_counts.clone());
    let rm = median(random_counts.clone());
    let mean = |v: &Vec<u64>| v.iter().sum::<u64>() as f64 / v.len() as f64;
    println!("guided median={gm} random median={rm} ratio={:.3}", gm/rm);
    println!("random success {}/{}", rand_succ, rand_total);
    println!("depth>=4 means: full={:.1} no_page_reach={:.1} no_widget_hit={:.1}",
        mean(&full_counts_d4), mean(&wp_counts_d4), mean(&ww_counts_d4));
    assert!(gm <= 0.5 * rm);
    assert!(mean(&full_counts_d4) <= mean(&wp_counts_d4));
    assert!(mean(&full_counts_d4) <= mean(&ww_counts_d4));
}

#[test]
fn minimize_and_replay_all() {
    let cases = builtin_corpus();
    for case in &cases {
        if !case.expected_reproducible { continue; }
        let target = case.target().unwrap();
        let opts = ReproduceOptions {
            selector: SelectorConfig { rng_seed: 0, ..Default::default() },
            ..Default::default()
        };
        let mut pred = Predictor::offline();
        let res = reproduce(&case.app, &target, &mut pred, &opts).unwrap();
        assert!(res.success, "{}", case.name);
        let trace = res.trace.unwrap();
        assert!(replay_reproduces(&trace.raw_steps, &case.app, &target), "raw replay {}", case.name);
        let min1 = minimize(&trace, &case.app).unwrap();
        assert!(replay_reproduces(&min1.minimized_steps, &case.app, &target), "min replay {}", case.name);
        let min2 = minimize(&min1, &case.app).unwrap();
        assert_eq!(min1.minimized_steps, min2.minimized_steps, "idempotent {}", case.name);
        assert!(min1.minimized_steps.len() <= trace.raw_steps.len());
        println!("{:<20} raw={} min={}", case.name, trace.raw_steps.len(), min1.minimized_steps.len());
    }
}
