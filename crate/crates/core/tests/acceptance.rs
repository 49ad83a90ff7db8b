//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use bmmlab::algorithms::{self, Algorithm, AlgorithmChoice};
use bmmlab::audit::{
    certify_for_lemmas, density_check, lemma_inequality_check, random_density_config, AuditParams, Property,
};
use bmmlab::bits::{bmm_oracle, BitVector, BooleanMatrix, ColumnInterval};
use bmmlab::cli::{run_bench, ExperimentSpec, SpecKind};
use bmmlab::hardgen::{
    ap_free_set, build_instance, build_rt_graph, density_matched_random, random_instance, rs_family,
    verify_induced_matchings, ApMethod, MatchingVerdict, TripartiteInstance,
};
use bmmlab::io::{instance_to_json, witness_to_json};
use bmmlab::rng;
use bmmlab::witness::{
    chargeable_gates, cost_report, eval_circuit, trim_circuit, validate_witness, Gate, GateId, UnionCircuit,
    UnionNode, WitnessCircuit,
};
use bmmlab::Error;
use rand::Rng;

const GRID: [usize; 4] = [256, 512, 1024, 2048];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("unique paths", unique_paths),
        ("induced matchings", induced_matchings),
        ("cost accounting", cost_accounting),
        ("four russians rate", four_russians_rate),
        ("memoized union rate", memo_rate),
        ("hard/random separation trend", separation_trend),
        ("proved-lemma audits", proved_lemma_audits),
        ("trimming invariants", trimming_invariants),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{label}: {verdict} ({secs:.1}s) {}", out.detail);
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

const EMITTERS: [Algorithm; 4] = Algorithm::ALL;

/// Every emitter's witness validates and its outputs equal the oracle.
fn emitters_agree(inst: &TripartiteInstance) -> Result<(), String> {
    let want = bmm_oracle(inst.p(), inst.q()).map_err(|e| e.to_string())?;
    for alg in EMITTERS {
        let choice = AlgorithmChoice::new(alg);
        let w = algorithms::build(&choice, inst).map_err(|e| e.to_string())?;
        let report = validate_witness(&w, inst).map_err(|e| e.to_string())?;
        if !report.correct {
            return Err(format!("{alg} witness invalid on {}x{}x{}", inst.n_a(), inst.n_b(), inst.n_c()));
        }
        let values = eval_circuit(&w, inst).map_err(|e| e.to_string())?;
        for (a, out) in w.outputs().iter().enumerate() {
            let got = match out {
                Some(g) => values[g.0].v.clone(),
                None => BitVector::zeros(inst.n_c()),
            };
            if &got != want.row(a) {
                return Err(format!("{alg} row {} differs from the oracle", a + 1));
            }
        }
        if !algorithms::meter(&choice, inst).map_err(|e| e.to_string())?.outputs_ok() {
            return Err(format!("{alg} streamed outputs differ from the oracle"));
        }
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng::stream(1, 0);
    let densities = [0.1, 0.5, 0.9];
    let mut cases = 0;
    for i in 0..200 {
        let (na, nb, nc) = (r.random_range(1..=64), r.random_range(1..=64), r.random_range(1..=64));
        let d = densities[i % 3];
        let inst = random_instance(na, nb, nc, d, densities[(i / 3) % 3], i as u64).unwrap();
        if let Err(e) = emitters_agree(&inst) {
            return Outcome::new(false, e);
        }
        cases += 1;
    }
    for i in 0..50 {
        let m = r.random_range(1..=64);
        let prob = if i % 2 == 0 { 0.0 } else { 0.5 };
        let g = build_rt_graph(m, ap_free_set(m, ApMethod::Greedy).unwrap()).unwrap();
        let inst = build_instance(&g, prob, i as u64).unwrap();
        if let Err(e) = emitters_agree(&inst) {
            return Outcome::new(false, format!("rs m={m}: {e}"));
        }
        cases += 1;
    }
    Outcome::new(true, format!("{cases} instances x 4 emitters"))
}

fn unique_paths() -> Outcome {
    let mut pairs = 0usize;
    for method in [ApMethod::Greedy, ApMethod::Behrend] {
        for m in 1..=200 {
            let g = build_rt_graph(m, ap_free_set(m, method).unwrap()).unwrap();
            let inst = build_instance(&g, 0.0, 0).unwrap();
            let qt = inst.q().transpose();
            for t in inst.origin().unwrap() {
                let common = inst.p().row(t.i).and(qt.row(t.j));
                let mids: Vec<usize> = common.iter_ones().collect();
                if mids != [t.k] {
                    return Outcome::new(
                        false,
                        format!("m={m} {method:?}: a{} c{} share {:?}", t.i + 1, t.j + 1, mids),
                    );
                }
                pairs += 1;
            }
        }
    }
    Outcome::new(true, format!("{pairs} matched pairs over m=1..200, greedy and behrend"))
}

fn induced_matchings() -> Outcome {
    for method in [ApMethod::Greedy, ApMethod::Behrend] {
        for m in 1..=300 {
            let g = build_rt_graph(m, ap_free_set(m, method).unwrap()).unwrap();
            if verify_induced_matchings(&g) != (MatchingVerdict::Ok { exhaustive: true }) {
                return Outcome::new(false, format!("m={m} {method:?} not verified exhaustively"));
            }
        }
    }
    let mut sampled = Vec::new();
    for m in [1000, 3000, 10_000] {
        let g = match build_rt_graph(m, ap_free_set(m, ApMethod::Greedy).unwrap()) {
            Ok(g) => g,
            Err(e) => return Outcome::new(false, format!("m={m}: {e}")),
        };
        match verify_induced_matchings(&g) {
            MatchingVerdict::Ok { .. } => sampled.push(format!("m={m} r={} t={}", g.r(), g.matchings.len())),
            MatchingVerdict::Violation(v) => return Outcome::new(false, format!("m={m}: {v:?}")),
        }
    }
    Outcome::new(true, format!("exhaustive m<=300; 1e5 probes/matching at {}", sampled.join(", ")))
}

fn q_instance(rows: &[&str], n_a: usize) -> TripartiteInstance {
    let q = BooleanMatrix::parse_rows(rows).unwrap();
    TripartiteInstance::from_matrices(BooleanMatrix::zeros(n_a, q.n_rows()), q).unwrap()
}

/// A random circuit built one defined gate at a time.
fn random_circuit(r: &mut impl Rng, inst: &TripartiteInstance, len: usize) -> Vec<Gate> {
    let n_c = inst.n_c();
    let mut gates = Vec::new();
    let mut meta: Vec<(BitVector, ColumnInterval)> = Vec::new();
    while gates.len() < len {
        let gate = match r.random_range(0..4) {
            0 => {
                let b = r.random_range(0..inst.n_b());
                meta.push((BitVector::from_indices(inst.n_b(), [b]), ColumnInterval::full(n_c)));
                Gate::Input { b }
            }
            1 if !gates.is_empty() => {
                let src = r.random_range(0..gates.len());
                let k = meta[src].1;
                let lo = r.random_range(k.lo()..=k.hi());
                let k2 = ColumnInterval::new(lo, r.random_range(lo..=k.hi())).unwrap();
                meta.push((meta[src].0.clone(), k2));
                Gate::Partition { src: GateId(src), k: k2 }
            }
            2 if !gates.is_empty() => {
                let left = r.random_range(0..gates.len());
                let same: Vec<usize> = (0..gates.len()).filter(|&j| meta[j].1 == meta[left].1).collect();
                let right = same[r.random_range(0..same.len())];
                meta.push((meta[left].0.or(&meta[right].0), meta[left].1));
                Gate::Union {
                    left: GateId(left),
                    right: GateId(right),
                }
            }
            3 if !gates.is_empty() => {
                let left = r.random_range(0..gates.len());
                let (s, kl) = meta[left].clone();
                let fits: Vec<usize> = (0..gates.len())
                    .filter(|&j| {
                        let kr = meta[j].1;
                        meta[j].0 == s && kl.lo() <= kr.lo() && kl.hi() + 1 >= kr.lo() && kl.hi() <= kr.hi()
                    })
                    .collect();
                if fits.is_empty() {
                    continue;
                }
                let right = fits[r.random_range(0..fits.len())];
                meta.push((s, ColumnInterval::new(kl.lo(), meta[right].1.hi()).unwrap()));
                Gate::Concat {
                    left: GateId(left),
                    right: GateId(right),
                }
            }
            _ => continue,
        };
        gates.push(gate);
    }
    gates
}

fn cost_accounting() -> Outcome {
    let inst = q_instance(&["110", "001"], 1);
    let (i0, i1) = (GateId(0), GateId(1));
    let inputs = [Gate::Input { b: 0 }, Gate::Input { b: 1 }];
    let circuit = |extra: &[Gate]| {
        let gates = inputs.iter().chain(extra).copied().collect();
        WitnessCircuit::from_parts(gates, vec![None]).unwrap()
    };
    let single = cost_report(&circuit(&[Gate::Union { left: i0, right: i1 }]), &inst).unwrap();
    let dedup = cost_report(
        &circuit(&[
            Gate::Union { left: i0, right: i1 },
            Gate::Union { left: i1, right: i0 },
            Gate::Union { left: i0, right: i1 },
        ]),
        &inst,
    )
    .unwrap();
    let plain = cost_report(&circuit(&[]), &inst).unwrap();
    if (single.gate_count, single.total) != (3, 4) || (dedup.gate_count, dedup.total) != (5, 6) || plain.total != 2 {
        return Outcome::new(
            false,
            format!("examples: {} / {} / {}", single.total, dedup.total, plain.total),
        );
    }

    let mut r = rng::stream(4, 0);
    let mut steps = 0;
    for i in 0..10_000u64 {
        let (nb, nc) = (r.random_range(1..=6), r.random_range(1..=8));
        let inst = random_instance(1, nb, nc, 0.5, 0.5, i).unwrap();
        let len = r.random_range(1..=12);
        let gates = random_circuit(&mut r, &inst, len);
        let mut last = 0;
        for j in 1..=gates.len() {
            let w = WitnessCircuit::from_parts(gates[..j].to_vec(), vec![None]).unwrap();
            let total = match cost_report(&w, &inst) {
                Ok(rep) => rep.total,
                Err(e) => return Outcome::new(false, format!("circuit {i} prefix {j}: {e}")),
            };
            if total < last {
                return Outcome::new(false, format!("circuit {i}: cost fell from {last} to {total}"));
            }
            last = total;
            steps += 1;
        }
    }
    Outcome::new(true, format!("3+1=4, 5+1=6, 2; monotone over 10^4 circuits ({steps} prefixes)"))
}

fn lg(n: usize) -> f64 {
    (n as f64).log2()
}

fn four_russians_rate() -> Outcome {
    let mut rates = Vec::new();
    for n in GRID {
        let inst = random_instance(n, n, n, 0.5, 0.5, 1).unwrap();
        let run = algorithms::meter(&AlgorithmChoice::new(Algorithm::FourRussians), &inst).unwrap();
        if !run.outputs_ok() {
            return Outcome::new(false, format!("n={n}: wrong outputs"));
        }
        rates.push(run.report.total as f64 * lg(n) * lg(n) / (n as f64).powi(3));
    }
    let ratio = rates[3] / rates[0];
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
    Outcome::new(
        (0.5..=2.0).contains(&ratio),
        format!("total*log^2n/n^3 = [{}], 2048/256 ratio {ratio:.3}", shown.join(", ")),
    )
}

/// Bound on total/(n² log₂ n) for memoized unions on dense random inputs.
const MEMO_RATE_BOUND: f64 = 1.0;

fn memo_rate() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut per_n = Vec::new();
    for n in GRID {
        let mut max_n: f64 = 0.0;
        for seed in 1..=5 {
            let inst = random_instance(n, n, n, 0.5, 0.5, seed).unwrap();
            let run = algorithms::meter(&AlgorithmChoice::new(Algorithm::Memo), &inst).unwrap();
            if !run.outputs_ok() {
                return Outcome::new(false, format!("n={n} seed={seed}: wrong outputs"));
            }
            max_n = max_n.max(run.report.total as f64 / ((n * n) as f64 * lg(n)));
        }
        per_n.push(format!("{max_n:.3}"));
        worst = worst.max(max_n);
    }
    Outcome::new(
        worst <= MEMO_RATE_BOUND,
        format!("max total/(n^2 log n) per n = [{}], bound {MEMO_RATE_BOUND}", per_n.join(", ")),
    )
}

fn separation_trend() -> Outcome {
    let memo = AlgorithmChoice::new(Algorithm::Memo);
    let mut ratios = Vec::new();
    for n in GRID {
        let (mut hard, mut easy) = (0u64, 0u64);
        for seed in 1..=5 {
            let rs = rs_family(n, 0.5, seed).unwrap();
            let twin = density_matched_random(&rs, seed).unwrap();
            hard += algorithms::meter(&memo, &rs).unwrap().report.total;
            easy += algorithms::meter(&memo, &twin).unwrap().report.total;
        }
        ratios.push(hard as f64 / easy as f64);
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Outcome::new(increasing, format!("rs/matched memo cost over n grid = [{}]", shown.join(", ")))
}

fn proved_lemma_audits() -> Outcome {
    let mut r = rng::stream(8, 0);
    for i in 0..10_000u64 {
        let n = r.random_range(1..=200);
        let cfg = random_density_config(n, r.random_range(1..=n), i).unwrap();
        let rep = density_check(&cfg.intervals, &cfg.elements, n).unwrap();
        if !rep.pass {
            return Outcome::new(false, format!("density config {i} fails: {:?}", rep.counterexample));
        }
    }

    let (mut checked, mut uncertifiable) = (0, 0);
    for m in 1..=24 {
        for (prob, seed) in [(0.0, 0), (0.5, 1), (0.5, 2)] {
            let g = build_rt_graph(m, ap_free_set(m, ApMethod::Greedy).unwrap()).unwrap();
            let inst = build_instance(&g, prob, seed).unwrap();
            for alg in [Algorithm::Naive, Algorithm::Memo] {
                let w = algorithms::build(&AlgorithmChoice::new(alg), &inst).unwrap();
                for l in 1..=3 {
                    let base = AuditParams { l, ..AuditParams::default() };
                    let certs = match certify_for_lemmas(&w, &inst, &base) {
                        Ok(c) => c,
                        Err(Error::InvalidParameter(_)) => {
                            uncertifiable += 1;
                            continue;
                        }
                        Err(e) => return Outcome::new(false, format!("m={m}: {e}")),
                    };
                    let k = certs
                        .iter()
                        .filter(|c| c.property == Property::Unhelpful)
                        .map(|c| c.k)
                        .max()
                        .unwrap_or(1);
                    let params = AuditParams { k, ..base };
                    match lemma_inequality_check(&w, &inst, &params, &certs) {
                        Ok(rep) if rep.pass => checked += 1,
                        Ok(rep) => {
                            return Outcome::new(
                                false,
                                format!("m={m} {alg} l={l}: {:?}", rep.counterexample),
                            )
                        }
                        Err(Error::Uncertified(_)) => uncertifiable += 1,
                        Err(e) => return Outcome::new(false, format!("m={m} {alg} l={l}: {e}")),
                    }
                }
            }
        }
    }
    Outcome::new(
        true,
        format!("10^4 density configs; {checked} certified lemma checks ({uncertifiable} without exhaustive certificates)"),
    )
}

fn random_union_dag(r: &mut impl Rng) -> UnionCircuit {
    let n_b = r.random_range(1..=16);
    let total = r.random_range(n_b + 1..=200);
    let mut nodes: Vec<UnionNode> = (0..n_b).map(|b| UnionNode::Input { b }).collect();
    while nodes.len() < total {
        let len = nodes.len();
        nodes.push(UnionNode::Union {
            left: r.random_range(0..len),
            right: r.random_range(0..len),
        });
    }
    UnionCircuit::new(n_b, nodes).unwrap()
}

fn trimming_invariants() -> Outcome {
    let mut r = rng::stream(9, 0);
    let mut chargeable = 0;
    for i in 0..1000 {
        let u = random_union_dag(&mut r);
        let t = trim_circuit(&u);
        let out = u.output();
        if &t.wtrim[out] != u.wset(out) {
            return Outcome::new(false, format!("dag {i}: wtrim(output) != wset(output)"));
        }
        for (g, node) in u.nodes().iter().enumerate() {
            if let UnionNode::Union { .. } = node {
                if !t.to_left[g].is_disjoint(&t.to_right[g]) || t.to_left[g].or(&t.to_right[g]) != t.wtrim[g] {
                    return Outcome::new(false, format!("dag {i}: node {g} is not a disjoint union"));
                }
            }
        }
        let beta = BitVector::from_bools((0..u.n_b()).map(|_| r.random_bool(0.7)));
        let threshold = r.random_range(1..=u.n_b().max(2));
        let c = chargeable_gates(&u, &t, &beta, threshold);
        if let Some(&g) = c.bound_violations(threshold).first() {
            return Outcome::new(
                false,
                format!("dag {i}: node {g} has {} chargeable descendants, weight {}", c.descendants[g], c.weight[g]),
            );
        }
        chargeable += c.gates.len();
    }
    Outcome::new(true, format!("10^3 dags, {chargeable} chargeable gates checked"))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

/// Everything that must not depend on scheduling, serialized.
fn artifacts() -> Vec<String> {
    let mut out = Vec::new();
    let rs = rs_family(90, 0.5, 3).unwrap();
    let rnd = random_instance(40, 40, 40, 0.3, 0.6, 5).unwrap();
    out.push(instance_to_json(&rs).unwrap());
    out.push(instance_to_json(&rnd).unwrap());
    let small = rs_family(18, 0.5, 2).unwrap();
    for alg in EMITTERS {
        let choice = AlgorithmChoice::new(alg);
        out.push(witness_to_json(&algorithms::build(&choice, &small).unwrap()).unwrap());
        for inst in [&rs, &rnd] {
            let run = algorithms::meter(&choice, inst).unwrap();
            out.push(serde_json::to_string(&run.report).unwrap());
        }
    }
    let w = algorithms::build(&AlgorithmChoice::new(Algorithm::Memo), &small).unwrap();
    let params = AuditParams { l: 1, ..AuditParams::default() };
    let certs = certify_for_lemmas(&w, &small, &params).unwrap();
    let k = certs.iter().map(|c| c.k).max().unwrap_or(1);
    let rep = lemma_inequality_check(&w, &small, &AuditParams { k, ..params }, &certs).unwrap();
    out.push(serde_json::to_string(&certs).unwrap());
    out.push(serde_json::to_string(&rep).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        kind: SpecKind::Rs,
        n: vec![30, 60],
        seeds: vec![1, 2],
        density: 0.5,
        density_q: None,
        prob: 0.5,
        algorithms: EMITTERS.iter().map(|&a| AlgorithmChoice::new(a)).collect(),
        audits: Vec::new(),
        audit_params: None,
        output: "bench.csv".into(),
        audit_output: None,
    };
    for row in run_bench(&spec, dir.path()).unwrap().rows {
        out.push(serde_json::to_string(&bmmlab::cli::BenchRow { wall_ms: 0.0, ..row }).unwrap());
    }
    out
}

fn determinism() -> Outcome {
    let max = std::thread::available_parallelism().map_or(4, |n| n.get()).max(2);
    let once = with_threads(1, artifacts);
    let again = with_threads(1, artifacts);
    let wide = with_threads(max, artifacts);
    let differing = |other: &[String]| once.iter().zip(other).filter(|(a, b)| a != b).count();
    let (d_again, d_wide) = (differing(&again), differing(&wide));
    Outcome::new(
        d_again == 0 && d_wide == 0 && once.len() == wide.len(),
        format!(
            "{} artifacts; {d_again} differ on repeat, {d_wide} differ at 1 vs {max} threads",
            once.len()
        ),
    )
}
