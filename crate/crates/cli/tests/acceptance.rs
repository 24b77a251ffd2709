//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Every tolerance and budget is pinned below.
//!
//! Oracles are computed independently of the code under test wherever the
//! criterion is about a value: expected radii are recomputed from raw fork
//! counts, example distances are hand-evaluated fractions, and basis
//! singletons are checked on the serialized basis, not via `is_discrete`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use forktopo_cli::{run as cli_run, EXIT_OK};
use forktopo_core::metrics::{fork_distance, fork_fallback_distance, ternary_distance, MetricReport};
use forktopo_core::model::{Fork, ForkGraph, ForkState, Outcome, Party, Transaction};
use forktopo_core::prng::SplitMix64;
use forktopo_core::report::{analyze, verify, SnapshotSelection, VerifyReport};
use forktopo_core::sim::{run, GrowingFork, SimConfig};
use forktopo_core::spaces::ProxyBinding;
use forktopo_core::{Rational, Trace};

/// Criterion 1 runtime budget.
const EXAMPLES_BUDGET: Duration = Duration::from_secs(1);
/// Criterion 2 runtime budget for the whole scenario sweep.
const SWEEP_BUDGET: Duration = Duration::from_secs(30);
/// Criterion 5 per-scenario budget at 12 clusters.
const DIAGRAM_BUDGET: Duration = Duration::from_secs(5);
/// Number of seeded scenarios in the sweep (criteria 2, 4, 5).
const SCENARIOS: u64 = 120;
const MAX_CLUSTERS: usize = 8;
const MAX_HORIZON: usize = 200;
/// Criterion 6: replayed snapshots compared per trace.
const REPLAY_PROBES: usize = 10;
/// Criterion 7: minimum number of snapshot checks.
const MIN_SNAPSHOT_CHECKS: usize = 100_000;
/// Criterion 5: scenarios timed at the largest size.
const LARGE_CLUSTERS: usize = 12;
const LARGE_SCENARIOS: u64 = 5;

type Outcome1 = Result<String, String>;

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Seeded random scenario. Every knob is drawn, none is tuned to a result.
fn scenario(index: u64, clusters: Option<usize>) -> SimConfig {
    let mut rng = SplitMix64::new(0x5EED_0000 + index);
    let clusters = clusters.unwrap_or_else(|| 2 + rng.next_index(MAX_CLUSTERS - 1));
    let horizon = 20 + rng.next_index(MAX_HORIZON - 19);
    let fmax = 1 + rng.next_index(4);
    let weights: Vec<i128> = (0..fmax).map(|i| 1 + rng.next_index(if i == 0 { 20 } else { 6 }) as i128).collect();
    let total: i128 = weights.iter().sum();
    SimConfig {
        seed: rng.next_u64(),
        horizon,
        clusters,
        fork_prob: weights.iter().map(|&w| r(w, total)).collect(),
        confirm_depth: 1 + rng.next_index(4) as u64,
    }
}

fn sweep() -> Vec<(u64, SimConfig, Vec<GrowingFork>)> {
    (0..SCENARIOS)
        .map(|i| {
            let cfg = scenario(i, None);
            let (_, growing) = run(&cfg, &[]).expect("generated scenarios are valid");
            (i, cfg, growing)
        })
        .collect()
}

fn graph_of(cluster: usize, states: &[ForkState]) -> ForkGraph {
    ForkGraph {
        cluster,
        forks: states
            .iter()
            .enumerate()
            .map(|(id, &state)| Fork { id, cluster, state, length: 1, parent: (id > 0).then_some(0), spawn_step: 0 })
            .collect(),
    }
}

// ---------------------------------------------------------------- criterion 1

/// Three clusters; at step 2 cluster 0 reaches 3 forks, cluster 1 reaches 2,
/// cluster 2 never forks. Counts (1,1,3), (1,1,2), (1,1,1).
const THREE_CLUSTER_TRACE: &str = concat!(
    r#"{"event":"config","seed":0,"horizon":2,"clusters":3,"fork_prob":["1"],"confirm_depth":3,"transactions":[]}"#,
    "\n",
    r#"{"t":1,"cluster":0,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":1,"cluster":1,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":1,"cluster":2,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":2,"cluster":0,"event":"extend","fork":0,"len":2}"#,
    "\n",
    r#"{"t":2,"cluster":0,"event":"spawn","fork":1,"parent":0}"#,
    "\n",
    r#"{"t":2,"cluster":0,"event":"spawn","fork":2,"parent":0}"#,
    "\n",
    r#"{"t":2,"cluster":1,"event":"extend","fork":0,"len":2}"#,
    "\n",
    r#"{"t":2,"cluster":1,"event":"spawn","fork":1,"parent":0}"#,
    "\n",
    r#"{"t":2,"cluster":2,"event":"extend","fork":0,"len":2}"#,
    "\n",
);

fn criterion_1() -> Outcome1 {
    let start = Instant::now();
    let mut checks = 0;
    let mut expect = |what: &str, got: Rational, want: Rational| -> Result<(), String> {
        checks += 1;
        if got == want {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, want {want}"))
        }
    };

    expect("d_t(commit, commit)", ternary_distance(Outcome::Commit, Outcome::Commit).unwrap(), r(2, 1))?;
    expect("d_t(abort, abort)", ternary_distance(Outcome::Abort, Outcome::Abort).unwrap(), r(1, 2))?;
    expect("d_t(commit, abort)", ternary_distance(Outcome::Commit, Outcome::Abort).unwrap(), r(1, 1))?;
    expect("d_t(abort, commit)", ternary_distance(Outcome::Abort, Outcome::Commit).unwrap(), r(1, 1))?;

    use ForkState::{Eliminated as E, Undecided as U};
    // Two two-fork graphs with live proxies: 1/2 + 1/2.
    let (a, b) = (graph_of(0, &[U, U]), graph_of(1, &[U, U]));
    let delta = fork_fallback_distance([2, 2]).unwrap();
    expect("d_f both live, 2 and 2 forks", fork_distance(&a, 0, &b, 0, delta).unwrap(), r(1, 1))?;
    // Fork set with counts {3, 2}, one proxy eliminated: the fallback 1/sup = 1/3.
    let (a, b) = (graph_of(0, &[E, U, U]), graph_of(1, &[U, U]));
    let delta = fork_fallback_distance([3, 2]).unwrap();
    expect("fallback over {3, 2}", delta, r(1, 3))?;
    expect("d_f one proxy eliminated", fork_distance(&a, 0, &b, 0, delta).unwrap(), r(1, 3))?;

    let trace = Trace::read_jsonl(THREE_CLUSTER_TRACE.as_bytes()).map_err(|e| e.to_string())?;
    let growing = trace.replay().map_err(|e| e.to_string())?;
    let counts: Vec<Vec<usize>> = growing.iter().map(GrowingFork::counts).collect();
    if counts != vec![vec![1, 1, 3], vec![1, 1, 2], vec![1, 1, 1]] {
        return Err(format!("three-cluster trace replays to counts {counts:?}"));
    }
    let report =
        analyze(&growing, &[], SnapshotSelection::FirstFork, ProxyBinding::Genesis).map_err(|e| e.to_string())?;
    let dg = report.spaces.growing.table();
    expect("d_g(F0, F1)", dg.get(0, 1).map_err(|e| e.to_string())?, r(1, 2))?;
    expect("d_g(F1, F2)", dg.get(1, 2).map_err(|e| e.to_string())?, r(1, 1))?;
    expect("d_g(F0, F2)", dg.get(0, 2).map_err(|e| e.to_string())?, r(1, 1))?;

    let elapsed = start.elapsed();
    if elapsed > EXAMPLES_BUDGET {
        return Err(format!("took {elapsed:?}, budget {EXAMPLES_BUDGET:?}"));
    }
    Ok(format!("{checks} exact values reproduced in {elapsed:?}"))
}

// ---------------------------------------------------------------- criterion 2

fn axiom_failures(name: &str, m: &MetricReport, n_points: usize, out: &mut Vec<String>) {
    if m.pairs_checked + m.pairs_skipped != n_points * n_points.saturating_sub(1) / 2 {
        out.push(format!("{name}: pair enumeration incomplete"));
    }
    if m.triples_checked + m.triples_skipped != n_points * n_points.saturating_sub(1) * n_points.saturating_sub(2) {
        out.push(format!("{name}: triple enumeration incomplete"));
    }
    if !m.symmetry_failures.is_empty() || !m.nonnegativity_failures.is_empty() {
        out.push(format!("{name}: symmetry/non-negativity failures"));
    }
    if let Some(w) = m.triangle_failures.first() {
        out.push(format!(
            "{name}: triangle failure d({},{})={} > {}+{} [{}]",
            w.x,
            w.y,
            w.d_xy,
            w.d_xz,
            w.d_zy,
            w.case.label()
        ));
    }
    if m.uncovered.iter().any(|w| w.case.is_covered()) {
        out.push(format!("{name}: a covered triple was filed as uncovered"));
    }
}

fn reports_for(growing: &[GrowingFork]) -> Vec<(ProxyBinding, VerifyReport)> {
    let horizon = growing[0].horizon();
    [ProxyBinding::Genesis, ProxyBinding::BestAt(horizon / 2)]
        .into_iter()
        .map(|b| (b, verify(growing, b).expect("verify runs on generated scenarios")))
        .collect()
}

fn criterion_2(all: &[(u64, SimConfig, Vec<GrowingFork>)]) -> Outcome1 {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut pairs, mut triples, mut uncovered) = (0usize, 0usize, 0usize);
    let mut cases: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, cfg, growing) in all {
        for (binding, rep) in reports_for(growing) {
            let n = cfg.clusters;
            let tag = |s: &str| format!("scenario {i} {binding:?} {s}");
            axiom_failures(&tag("d_t"), &rep.metrics.transaction, n, &mut failures);
            axiom_failures(&tag("d_f"), &rep.metrics.fork, n, &mut failures);
            axiom_failures(
                &tag("d_f first-fork"),
                &rep.metrics.fork_first_fork,
                rep.spaces.fork_first_fork.points,
                &mut failures,
            );
            axiom_failures(&tag("d_g"), &rep.metrics.growing, n, &mut failures);
            for m in [&rep.metrics.transaction, &rep.metrics.fork, &rep.metrics.fork_first_fork, &rep.metrics.growing] {
                pairs += m.pairs_checked;
                triples += m.triples_checked;
                for (k, v) in &m.case_counts {
                    *cases.entry(k).or_default() += v;
                }
            }
            uncovered += rep.uncovered_count();
        }
        // Sequences really are monotone, which is what the d_g claim is conditioned on.
        if growing.iter().any(|g| g.counts().windows(2).any(|w| w[0] > w[1])) {
            failures.push(format!("scenario {i}: non-monotone fork counts"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > SWEEP_BUDGET {
        failures.push(format!("sweep took {elapsed:?}, budget {SWEEP_BUDGET:?}"));
    }
    if failures.is_empty() {
        Ok(format!(
            "{} scenarios x 2 bindings: {pairs} pairs, {triples} triples, 0 failures; {uncovered} uncovered mixed-liveness triples reported; cases {cases:?}; {elapsed:?}",
            all.len()
        ))
    } else {
        Err(format!("{} failures, first: {}", failures.len(), failures[0]))
    }
}

// ---------------------------------------------------------------- criterion 3

/// Clusters 0 and 2 end with two forks and a live genesis; cluster 1 ends
/// with three forks and its genesis eliminated (depth 2).
const GAP_TRACE: &str = concat!(
    r#"{"event":"config","seed":0,"horizon":3,"clusters":3,"fork_prob":["1/2","1/2"],"confirm_depth":2,"transactions":[{"id":1,"parties":[{"cluster":0,"fork":0},{"cluster":1,"fork":0},{"cluster":2,"fork":0}]}]}"#,
    "\n",
    r#"{"t":1,"cluster":0,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":1,"cluster":0,"event":"spawn","fork":1,"parent":0}"#,
    "\n",
    r#"{"t":1,"cluster":1,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":1,"cluster":1,"event":"spawn","fork":1,"parent":0}"#,
    "\n",
    r#"{"t":1,"cluster":1,"event":"spawn","fork":2,"parent":0}"#,
    "\n",
    r#"{"t":1,"cluster":2,"event":"extend","fork":0,"len":1}"#,
    "\n",
    r#"{"t":1,"cluster":2,"event":"spawn","fork":1,"parent":0}"#,
    "\n",
    r#"{"t":2,"cluster":0,"event":"extend","fork":0,"len":2}"#,
    "\n",
    r#"{"t":2,"cluster":1,"event":"extend","fork":1,"len":2}"#,
    "\n",
    r#"{"t":2,"cluster":2,"event":"extend","fork":1,"len":2}"#,
    "\n",
    r#"{"t":3,"cluster":0,"event":"extend","fork":1,"len":2}"#,
    "\n",
    r#"{"t":3,"cluster":1,"event":"extend","fork":1,"len":3}"#,
    "\n",
    r#"{"t":3,"cluster":1,"event":"eliminate","fork":0}"#,
    "\n",
    r#"{"t":3,"cluster":1,"event":"eliminate","fork":2}"#,
    "\n",
    r#"{"t":3,"cluster":2,"event":"extend","fork":0,"len":2}"#,
    "\n",
);

fn criterion_3(dir: &Path) -> Outcome1 {
    let path = dir.join("gap.jsonl");
    std::fs::write(&path, GAP_TRACE).map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli_run(["forktopo", "verify", "--trace", path.to_str().unwrap(), "--json"], None, &mut out, &mut err);
    if code != EXIT_OK {
        return Err(format!("verify exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    let json: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let listed = json["metrics"]["fork"]["uncovered_by_paper_proof"].as_array().cloned().unwrap_or_default();
    let wanted = listed.iter().find(|w| {
        w["x"] == "F0"
            && w["z"] == "F1"
            && w["y"] == "F2"
            && w["d_xy"] == "1"
            && w["d_xz"] == "1/3"
            && w["d_zy"] == "1/3"
    });
    match wanted {
        Some(w) if w["case"] == "midpoint_only_not_live" && json["passed"] == true => {
            Ok(format!("d(F0,F2)=1 > 1/3+1/3 listed under uncovered_by_paper_proof ({} entries), exit 0", listed.len()))
        }
        _ => Err(format!("expected counterexample not reported; uncovered = {listed:?}")),
    }
}

// ---------------------------------------------------------------- criterion 4

fn singleton_basis(basis: &[Vec<String>], points: usize) -> bool {
    basis.len() == points && basis.iter().all(|b| b.len() == 1)
}

fn criterion_4(all: &[(u64, SimConfig, Vec<GrowingFork>)]) -> Outcome1 {
    let mut failures = Vec::new();
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    let mut spaces = 0;
    for (i, _, growing) in all {
        let horizon = growing[0].horizon();
        // Independent radius oracles from raw counts.
        let sup_final = growing.iter().map(|g| g.snapshots[horizon].forks.len()).max().unwrap();
        let sup_first = growing
            .iter()
            .filter_map(|g| g.snapshots.iter().map(|s| s.forks.len()).find(|&c| c > 1))
            .max()
            .unwrap_or(1);
        let want_fork = r(1, 1 + sup_final as i128);
        let want_growing = r(1, 1 + sup_first as i128);
        let rep = verify(growing, ProxyBinding::Genesis).expect("verify runs");
        let s = &rep.spaces;
        let checks = [
            ("transaction", &s.transaction, r(1, 4)),
            ("fork", &s.fork, want_fork),
            ("growing", &s.growing, want_growing),
        ];
        for (name, sc, want) in checks {
            spaces += 1;
            if sc.epsilon != want || !singleton_basis(&sc.basis, sc.points) || !sc.discrete {
                *by_kind.entry(name).or_default() += 1;
            }
            if sc.epsilon != want {
                failures.push(format!("scenario {i} {name}: epsilon {} != {want}", sc.epsilon));
            }
            if !singleton_basis(&sc.basis, sc.points) || !sc.discrete {
                let w = sc
                    .separation_failures
                    .first()
                    .map(|w| {
                        let ca =
                            growing.iter().find(|g| w.a.starts_with(&format!("F{}", g.cluster))).map(|g| g.counts());
                        let cb =
                            growing.iter().find(|g| w.b.starts_with(&format!("F{}", g.cluster))).map(|g| g.counts());
                        let head = |c: Option<Vec<usize>>| c.map(|c| c.into_iter().take(12).collect::<Vec<_>>());
                        format!(
                            "d({},{})={} <= epsilon={}; counts {:?} vs {:?}",
                            w.a,
                            w.b,
                            w.distance,
                            sc.epsilon,
                            head(ca),
                            head(cb)
                        )
                    })
                    .unwrap_or_default();
                failures.push(format!("scenario {i} {name}: basis not singletons: {w}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{spaces} spaces over {} scenarios: singleton bases, radii exact", all.len()))
    } else {
        Err(format!("{} of {spaces} spaces fail {by_kind:?}; first: {}", failures.len(), failures[0]))
    }
}

// ---------------------------------------------------------------- criterion 5

/// `(failure, caused by a non-discrete growing space)`.
fn diagram_failure(i: u64, rep: &VerifyReport) -> Option<(String, bool)> {
    let d = &rep.diagram;
    let ok = d.h.bijective
        && d.h.continuous
        && d.h.inverse_continuous
        && d.g.continuous
        && d.hg.continuous
        && d.hg.commutes
        && d.g_images_valid;
    let h_side_ok = d.h.bijective && d.h.continuous && d.h.inverse_continuous && d.hg.commutes && d.g_images_valid;
    (!ok).then(|| (format!("scenario {i}: {d:?}"), h_side_ok && !d.discrete.growing))
}

fn criterion_5(all: &[(u64, SimConfig, Vec<GrowingFork>)]) -> Outcome1 {
    let mut failures = Vec::new();
    let mut eligible = 0;
    for (i, _, growing) in all {
        if !growing.iter().all(|g| g.first_fork_time().is_some()) {
            continue;
        }
        eligible += 1;
        for (_, rep) in reports_for(growing) {
            failures.extend(diagram_failure(*i, &rep));
        }
    }
    let mut slowest = Duration::ZERO;
    for j in 0..LARGE_SCENARIOS {
        let cfg = scenario(10_000 + j, Some(LARGE_CLUSTERS));
        let start = Instant::now();
        let (_, growing) = run(&cfg, &[]).expect("valid scenario");
        let rep = verify(&growing, ProxyBinding::Genesis).expect("verify runs");
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        if elapsed > DIAGRAM_BUDGET {
            failures.push((format!("n={LARGE_CLUSTERS} scenario {j} took {elapsed:?}"), false));
        }
        if growing.iter().all(|g| g.first_fork_time().is_some()) {
            failures.extend(diagram_failure(10_000 + j, &rep));
        }
    }
    if eligible == 0 {
        return Err("no scenario had every cluster fork".into());
    }
    let from_growing = failures.iter().filter(|(_, g)| *g).count();
    if failures.is_empty() {
        Ok(format!(
            "{eligible} all-forking scenarios x 2 bindings: h homeomorphism, g and h∘g continuous, commuting; n={LARGE_CLUSTERS} slowest {slowest:?}"
        ))
    } else {
        Err(format!(
            "{} of {} diagram checks fail ({from_growing} only through a non-discrete growing space); first: {}",
            failures.len(),
            2 * eligible + LARGE_SCENARIOS as usize,
            failures[0].0
        ))
    }
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6(dir: &Path) -> Outcome1 {
    let mut compared = 0;
    for i in 0..5u64 {
        let cfg = scenario(20_000 + i, None);
        let probs: Vec<String> = cfg.fork_prob.iter().map(|p| format!("\"{p}\"")).collect();
        let doc = format!(
            r#"{{"seed":{},"horizon":{},"clusters":{},"fork_prob":[{}],"confirm_depth":{},"transactions":[{{"id":1,"parties":[{{"cluster":0}},{{"cluster":1}}]}}]}}"#,
            cfg.seed,
            cfg.horizon,
            cfg.clusters,
            probs.join(","),
            cfg.confirm_depth
        );
        let scen = dir.join(format!("scenario{i}.json"));
        std::fs::write(&scen, doc).map_err(|e| e.to_string())?;
        let mut files = Vec::new();
        for k in 0..2 {
            let out_path = dir.join(format!("trace{i}_{k}.jsonl"));
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let args =
                ["forktopo", "simulate", "--config", scen.to_str().unwrap(), "--out", out_path.to_str().unwrap()];
            let code = cli_run(args, None, &mut out, &mut err);
            if code != EXIT_OK {
                return Err(format!("simulate exited {code}: {}", String::from_utf8_lossy(&err)));
            }
            files.push(std::fs::read(&out_path).map_err(|e| e.to_string())?);
        }
        if files[0] != files[1] {
            return Err(format!("scenario {i}: traces differ between runs"));
        }
        let trace = Trace::read_jsonl(files[0].as_slice()).map_err(|e| e.to_string())?;
        let txns =
            [Transaction::new(1, vec![Party { cluster: 0, proxy_fork: 0 }, Party { cluster: 1, proxy_fork: 0 }])
                .unwrap()];
        let (_, live) = run(&cfg, &txns).map_err(|e| e.to_string())?;
        let mut rng = SplitMix64::new(0xD0_0000 + i);
        for _ in 0..REPLAY_PROBES {
            let t = rng.next_index(cfg.horizon + 1);
            for (c, growing) in live.iter().enumerate() {
                let snap = trace.snapshot(c, t).map_err(|e| e.to_string())?;
                if snap != growing.snapshots[t] {
                    return Err(format!("scenario {i}: replay differs at cluster {c}, step {t}"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("5 scenarios byte-identical across runs; {compared} replayed snapshots equal the live run"))
}

// ---------------------------------------------------------------- criterion 7

fn snapshot_violations(g: &GrowingFork) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    for (t, snap) in g.snapshots.iter().enumerate() {
        let confirmed = snap.forks.iter().filter(|f| f.state == ForkState::Confirmed).count();
        if confirmed > 1 {
            bad.push(format!("cluster {} step {t}: {confirmed} confirmed forks", g.cluster));
        }
        for f in &snap.forks {
            let others_eliminated = snap.forks.iter().all(|o| o.id == f.id || o.state == ForkState::Eliminated);
            let should_confirm = f.state != ForkState::Eliminated && others_eliminated;
            if (f.state == ForkState::Confirmed) != should_confirm {
                bad.push(format!("cluster {} step {t}: fork {} confirmation mismatch", g.cluster, f.id));
            }
        }
        if t > 0 {
            let prev = &g.snapshots[t - 1];
            if snap.forks.len() < prev.forks.len() {
                bad.push(format!("cluster {} step {t}: fork count decreased", g.cluster));
            }
            for p in &prev.forks {
                match snap.forks.iter().find(|f| f.id == p.id) {
                    None => bad.push(format!("cluster {} step {t}: fork {} vanished", g.cluster, p.id)),
                    Some(f) if p.state == ForkState::Eliminated && f.state != ForkState::Eliminated => {
                        bad.push(format!("cluster {} step {t}: fork {} revived", g.cluster, p.id))
                    }
                    _ => {}
                }
            }
        }
    }
    (g.snapshots.len(), bad)
}

fn criterion_7(all: &[(u64, SimConfig, Vec<GrowingFork>)]) -> Outcome1 {
    let mut checks = 0;
    let mut bad = Vec::new();
    let mut extra = 0u64;
    let mut tally = |growing: &[GrowingFork], checks: &mut usize| {
        for g in growing {
            let (n, v) = snapshot_violations(g);
            *checks += n;
            bad.extend(v);
        }
    };
    for (_, _, growing) in all {
        tally(growing, &mut checks);
    }
    while checks < MIN_SNAPSHOT_CHECKS {
        let (_, growing) = run(&scenario(30_000 + extra, None), &[]).expect("valid scenario");
        tally(&growing, &mut checks);
        extra += 1;
    }
    if bad.is_empty() {
        Ok(format!("{checks} snapshot checks over {} traces, 0 violations", all.len() as u64 + extra))
    } else {
        Err(format!("{} violations, first: {}", bad.len(), bad[0]))
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let all = sweep();
    let results: Vec<(u32, &str, Outcome1)> = vec![
        (1, "example exactness", criterion_1()),
        (2, "metric axioms", criterion_2(&all)),
        (3, "known-gap surfacing", criterion_3(dir.path())),
        (4, "topology induction", criterion_4(&all)),
        (5, "diagram verification", criterion_5(&all)),
        (6, "determinism", criterion_6(dir.path())),
        (7, "state-machine properties", criterion_7(&all)),
    ];
    let mut failed = 0;
    for (n, name, res) in &results {
        match res {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
