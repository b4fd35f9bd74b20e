//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.
//!
//! MNIST is read from `$STACKFUSE_MNIST_DIR`, else `<workspace>/data/mnist`.
//! `STACKFUSE_ACCEPTANCE_FAST=1` skips the full 15-run MNIST protocol (the
//! reduced preset still runs); the criterion is then reported as SKIPPED, not
//! passed. `STACKFUSE_BLESS=1` rewrites the golden report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stackfuse::dataset::{write_idx, Sample};
use stackfuse::eval::run_lopo;
use stackfuse::nn::{gradient, mse, Batch, Params, RpropState};
use stackfuse::synth::{generate, SynthSpec};
use stackfuse::{ActivationKind, Dataset, FusionConfig, Mlp, RpropConfig, SplitPlan};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stackfuse"))
}

fn run_cli(args: &[&str], config: &Path, out: &Path) -> Result<String, String> {
    let output = bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .map_err(|e| format!("cannot start binary: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "`stackfuse {}` exited with {}: {}",
            args.join(" "),
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&output.stdout).into_owned())
}

fn key_values(text: &str) -> BTreeMap<String, String> {
    text.lines().filter_map(|l| l.split_once(" = ")).map(|(k, v)| (k.to_owned(), v.to_owned())).collect()
}

// 1. Analytic gradient against central finite differences.

fn gradient_oracle() -> Check {
    const H: f64 = 1e-5;
    const REL: f64 = 1e-4;
    const FLOOR: f64 = 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A4D);
    let (mut components, mut worst) = (0usize, 0.0f64);
    for case in 0..100 {
        let (i, h, o) = (rng.random_range(1..=6), rng.random_range(1..=6), rng.random_range(1..=6));
        let steep = rng.random_range(0.2..2.0);
        let out_act = if case % 4 == 3 { ActivationKind::Linear } else { ActivationKind::symmetric_sigmoid(steep) };
        let u = |n: usize, m: usize, r: &mut ChaCha8Rng| Array2::from_shape_fn((n, m), |_| r.random_range(-1.5..1.5));
        let w_ih = u(h, i, &mut rng);
        let w_ho = u(o, h, &mut rng);
        let b_h = Array1::from_shape_fn(h, |_| rng.random_range(-0.5..0.5));
        let b_o = Array1::from_shape_fn(o, |_| rng.random_range(-0.5..0.5));
        let net = Mlp::from_parts(w_ih, w_ho, b_h, b_o, ActivationKind::symmetric_sigmoid(steep), out_act)
            .map_err(|e| e.to_string())?;
        let n = rng.random_range(1..=5);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|_| {
                let x = (0..i).map(|_| rng.random_range(-2.0..2.0)).collect();
                let t = (0..o).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
                (x, t)
            })
            .collect();
        let batch = Batch::from_pairs(&pairs).map_err(|e| e.to_string())?;
        let grad = gradient(&net, &batch).map_err(|e| e.to_string())?;
        for k in 0..net.param_count() {
            let mut plus = net.clone();
            plus.set_param(k, net.param(k) + H);
            let mut minus = net.clone();
            minus.set_param(k, net.param(k) - H);
            let fd = (mse(&plus, &batch).unwrap() - mse(&minus, &batch).unwrap()) / (2.0 * H);
            let an = grad.get(k);
            let err = (an - fd).abs();
            let tol = (REL * an.abs().max(fd.abs())).max(FLOOR);
            ensure(err <= tol, || format!("net {case} ({i}-{h}-{o}), parameter {k}: analytic {an:e}, numeric {fd:e}"))?;
            worst = worst.max(err / tol);
            components += 1;
        }
    }
    Ok(format!("100 nets, {components} components, worst error {worst:.3} of tolerance"))
}

// 2. RPROP step rule against hand traces.

/// Feeds one parameter a gradient sequence; returns (step, move) per epoch.
fn rprop_trace(grads: &[f64], cfg: &RpropConfig) -> Vec<(f64, f64)> {
    let net = Mlp::init(1, 1, 1, (ActivationKind::default(), ActivationKind::default()), 0).unwrap();
    let mut state = RpropState::new(&net, cfg);
    grads
        .iter()
        .map(|&g| {
            let mut grad = Params::zeros_like(&net);
            grad.weights_ih[[0, 0]] = g;
            let delta = state.step(&grad, cfg).unwrap();
            (state.steps().weights_ih[[0, 0]], delta.weights_ih[[0, 0]])
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
}

fn rprop_traces() -> Check {
    let cfg = RpropConfig::default();
    let expect = |name: &str, grads: &[f64], hand: &[(f64, f64)]| -> Result<(), String> {
        let got = rprop_trace(grads, &cfg);
        for (e, (g, h)) in got.iter().zip(hand).enumerate() {
            ensure(close(g.0, h.0) && close(g.1, h.1), || {
                format!("{name}, epoch {}: got step {} move {}, expected {} / {}", e + 1, g.0, g.1, h.0, h.1)
            })?;
        }
        Ok(())
    };
    // Same sign grows by 1.2; a sign change halves the step, skips the move and
    // resets memory, so the next epoch neither grows nor shrinks.
    expect(
        "grow/shrink",
        &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0],
        &[(0.1, -0.1), (0.12, -0.12), (0.144, -0.144), (0.072, 0.0), (0.072, -0.072), (0.0864, -0.0864)],
    )?;
    expect("descending", &[-2.0, -0.5, -3.0], &[(0.1, 0.1), (0.12, 0.12), (0.144, 0.144)])?;
    expect("zero gradient", &[1.0, 0.0, 1.0], &[(0.1, -0.1), (0.1, 0.0), (0.1, -0.1)])?;

    // Ceiling: 0.1 * 1.2^k first exceeds 50 at k = 35, i.e. epoch 36.
    let up = rprop_trace(&[1.0; 40], &cfg);
    for (e, &(step, _)) in up.iter().enumerate() {
        let hand = (0.1 * 1.2f64.powi(e as i32)).min(50.0);
        ensure((step - hand).abs() <= 1e-9 * hand, || format!("ceiling trace epoch {}: {step} vs {hand}", e + 1))?;
    }
    ensure(up[34].0 < 50.0 && up[35].0 == 50.0 && up[39].0 == 50.0, || "step did not settle at delta_max".to_owned())?;

    // Floor: alternating signs halve the step every other epoch, down to 1e-6.
    let alt: Vec<f64> = (0..60).map(|e| if e % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let down = rprop_trace(&alt, &cfg);
    for (e, &(step, mv)) in down.iter().enumerate() {
        let halvings = e.div_ceil(2) as i32;
        let hand = (0.1 * 0.5f64.powi(halvings)).max(1e-6);
        ensure(close(step, hand), || format!("floor trace epoch {}: {step} vs {hand}", e + 1))?;
        ensure((e % 2 == 1) == (mv == 0.0), || format!("floor trace epoch {}: move {mv}", e + 1))?;
    }
    ensure(down[59].0 == 1e-6, || "step did not settle at delta_min".to_owned())?;

    // Random sign sequences against a scalar restatement of the rule.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seq in 0..500 {
        let grads: Vec<f64> = (0..80)
            .map(|_| match rng.random_range(0..5) {
                0 => 0.0,
                1 | 2 => rng.random_range(0.1..3.0),
                _ => -rng.random_range(0.1..3.0),
            })
            .collect();
        let (mut step, mut prev) = (cfg.delta_init, 0.0f64);
        for (e, (&g, &(s, mv))) in grads.iter().zip(&rprop_trace(&grads, &cfg)).enumerate() {
            let expected_move = if g * prev > 0.0 {
                step = (step * 1.2).min(50.0);
                prev = g;
                -g.signum() * step * f64::from(u8::from(g != 0.0))
            } else if g * prev < 0.0 {
                step = (step * 0.5).max(1e-6);
                prev = 0.0;
                0.0
            } else {
                prev = g;
                if g == 0.0 {
                    0.0
                } else {
                    -g.signum() * step
                }
            };
            ensure(s == step && mv == expected_move, || {
                format!("sequence {seq}, epoch {e}: {s}/{mv} vs {step}/{expected_move}")
            })?;
            ensure((1e-6..=50.0).contains(&s), || format!("sequence {seq}: step {s} left its bounds"))?;
        }
    }
    Ok("6 hand traces, 500 random sign sequences".to_owned())
}

// 3. Split protocol invariants.

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.random_range(30..=1000);
    let persons = rng.random_range(1..=5u32);
    let classes = rng.random_range(2..=6);
    let samples = (0..n)
        .map(|i| Sample {
            features: vec![rng.random_range(-1.0..1.0), i as f64],
            label: if i < classes { i } else { rng.random_range(0..classes) },
            person: Some(rng.random_range(1..=persons)),
        })
        .collect();
    Dataset::new("random", samples, Some(classes)).unwrap()
}

fn check_plan(plan: &SplitPlan, ds: &Dataset, person: Option<u32>) -> Result<(), String> {
    let sets = [&plan.d1_train, &plan.d1_test, &plan.d2_train, &plan.d2_test, &plan.d3];
    let mut seen = vec![0u8; ds.len()];
    for s in sets {
        for &i in s {
            seen[i] += 1;
        }
    }
    ensure(seen.iter().all(|&c| c == 1), || "sets overlap or miss samples".to_owned())?;
    if let Some(p) = person {
        let held: Vec<usize> = (0..ds.len()).filter(|&i| ds.samples()[i].person == Some(p)).collect();
        let mut d3 = plan.d3.clone();
        d3.sort_unstable();
        ensure(d3 == held, || format!("D3 is not exactly person {p}"))?;
        let (d1, d2) = (plan.d1_train.len() + plan.d1_test.len(), plan.d2_train.len() + plan.d2_test.len());
        ensure(d1 == d2 || d1 == d2 + 1, || format!("halves {d1} / {d2}"))?;
    }
    for (train, test) in [(&plan.d1_train, &plan.d1_test), (&plan.d2_train, &plan.d2_test)] {
        let total = train.len() + test.len();
        let want = (total as f64 / 10.0).round() as usize;
        ensure(test.len() == want, || format!("nested test {} of {total}, expected {want}", test.len()))?;
    }
    Ok(())
}

fn split_invariants() -> Check {
    let (mut plans, mut rejected) = (0, 0);
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = random_dataset(&mut rng);
        for p in ds.persons() {
            let remaining = ds.samples().iter().filter(|s| s.person != Some(p)).count();
            match SplitPlan::leave_one_person(&ds, p, seed) {
                Ok(plan) => {
                    ensure(remaining >= 20, || format!("seed {seed}: accepted {remaining} remaining samples"))?;
                    check_plan(&plan, &ds, Some(p)).map_err(|e| format!("seed {seed}, person {p}: {e}"))?;
                    plans += 1;
                }
                Err(_) => {
                    ensure(remaining < 20, || format!("seed {seed}, person {p}: rejected {remaining} remaining"))?;
                    rejected += 1;
                }
            }
        }
        let f1 = rng.random_range(0.1..0.6);
        let f2 = rng.random_range(0.1..(0.95 - f1));
        let plan = SplitPlan::fractions(&ds, (f1, f2, 1.0 - f1 - f2), seed).map_err(|e| e.to_string())?;
        check_plan(&plan, &ds, None).map_err(|e| format!("seed {seed}, fractions: {e}"))?;
        plans += 1;
    }
    Ok(format!("50 seeds, {plans} plans checked, {rejected} undersized folds rejected"))
}

// 4. MNIST control.

fn mnist_dir() -> PathBuf {
    std::env::var_os("STACKFUSE_MNIST_DIR").map(PathBuf::from).unwrap_or_else(|| workspace_root().join("data/mnist"))
}

fn mnist_protocol(runs: usize, hidden: usize, epochs: Option<usize>, ceiling: f64) -> Result<String, String> {
    let d = mnist_dir();
    let files =
        ["train-images-idx3-ubyte", "t10k-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-labels-idx1-ubyte"];
    for f in files {
        ensure(d.join(f).exists(), || format!("MNIST file {} not found", d.join(f).display()))?;
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = format!(
        "seed = 2024\nruns = {runs}\ndataset.source = idx\ndataset.images = {0}/{1},{0}/{2}\n\
         dataset.labels = {0}/{3},{0}/{4}\nsplit.mode = fractions\nsplit.fractions = 0.4,0.4,0.2\n\
         net.hidden1 = {hidden}\nnet.hidden2 = {hidden}\n",
        d.display(),
        files[0],
        files[1],
        files[2],
        files[3]
    );
    if let Some(e) = epochs {
        cfg.push_str(&format!("rprop.max_epochs = {e}\n"));
    }
    let cfg_path = tmp.path().join("mnist.cfg");
    std::fs::write(&cfg_path, cfg).map_err(|e| e.to_string())?;
    let out = tmp.path().join("out");
    run_cli(&["mnist"], &cfg_path, &out)?;
    let rows = std::fs::read_to_string(out.join("mnist_runs.csv")).map_err(|e| e.to_string())?;
    ensure(rows.lines().count() == runs + 1, || format!("expected {runs} result rows"))?;
    let summary = key_values(&std::fs::read_to_string(out.join("mnist_summary.txt")).map_err(|e| e.to_string())?);
    let get = |k: &str| summary.get(k).and_then(|v| v.parse::<f64>().ok()).ok_or(format!("summary lacks {k}"));
    let (e1, e2) = (get("stage1_error_mean")?, get("stage2_error_mean")?);
    let detail = format!(
        "{runs} runs, hidden {hidden}: net1 {:.2}%, net2 {:.2}%, gap {:.2} pp",
        100.0 * e1,
        100.0 * e2,
        100.0 * (e1 - e2).abs()
    );
    ensure((0.045..=ceiling).contains(&e1), || {
        format!("{detail}; net1 error outside [4.5%, {:.1}%]", 100.0 * ceiling)
    })?;
    ensure((e1 - e2).abs() <= 0.015, || format!("{detail}; gap exceeds 1.5 pp"))?;
    Ok(detail)
}

fn mnist_control() -> Outcome {
    let reduced = match mnist_protocol(5, 25, Some(100), 0.10) {
        Ok(d) => d,
        Err(e) => return Outcome::Fail(format!("reduced preset: {e}")),
    };
    if std::env::var_os("STACKFUSE_ACCEPTANCE_FAST").is_some_and(|v| v == "1") {
        return Outcome::Skipped(format!("full protocol skipped by STACKFUSE_ACCEPTANCE_FAST; reduced: {reduced}"));
    }
    match mnist_protocol(15, 40, None, 0.08) {
        Ok(full) => Outcome::Pass(format!("{full}; reduced: {reduced}")),
        Err(e) => Outcome::Fail(format!("full protocol: {e}; reduced: {reduced}")),
    }
}

// 5. Fusion benefit on the synthetic hard preset.

fn fusion_benefit() -> Check {
    let budget = Duration::from_secs(15 * 60);
    let start = Instant::now();
    let (mut med1, mut med2, mut positive, mut lines) = (Vec::new(), Vec::new(), 0, Vec::new());
    for seed in 0..5u64 {
        let spec = SynthSpec::hard(seed);
        let ds = generate(&spec).map_err(|e| e.to_string())?;
        let report = run_lopo(&ds, &FusionConfig::default().with_seed(seed), stackfuse::eval::default_workers(15))
            .map_err(|e| e.to_string())?;
        let confusable = report.mean_delta_over(&spec.confusable_classes());
        if confusable > 0.0 {
            positive += 1;
        }
        med1.push(report.median_stage1());
        med2.push(report.median_stage2());
        lines.push(format!(
            "seed {seed}: median {:.3} -> {:.3}, confusable {:+.2} pp",
            report.median_stage1(),
            report.median_stage2(),
            100.0 * confusable
        ));
    }
    let elapsed = start.elapsed();
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (m1, m2) = (median(med1), median(med2));
    let detail = format!(
        "median stage1 {m1:.4}, stage2 {m2:.4}; confusable delta positive in {positive}/5; {:.0} s [{}]",
        elapsed.as_secs_f64(),
        lines.join("; ")
    );
    ensure(m2 >= m1 - 0.005, || format!("{detail}; stage 2 median too low"))?;
    ensure(positive >= 3, || format!("{detail}; too few positive seeds"))?;
    ensure(elapsed < budget, || format!("{detail}; over the 15 min budget"))?;
    Ok(detail)
}

// 6. Byte-identical reruns.

fn files_under(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn small_synth_config(persons: usize, extra: &str) -> String {
    format!(
        "seed = 11\ndataset.source = synth\ndataset.synth.persons = {persons}\n\
         dataset.synth.samples_per_class = 4\ndataset.synth.features = 6\n\
         net.hidden1 = 6\nnet.hidden2 = 6\nrprop.max_epochs = 15\n{extra}"
    )
}

/// 10 classes of 6x6 images: a lit pixel per class plus noise.
fn write_idx_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400;
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    let pixels: Vec<u8> = labels
        .iter()
        .flat_map(|&l| (0..36).map(move |p| (l, p)).collect::<Vec<_>>())
        .map(|(l, p)| if p == usize::from(l) * 3 { 255 } else { rng.random_range(0..60) })
        .collect();
    let (img, lbl) = (dir.join("img.idx"), dir.join("lbl.idx"));
    write_idx(&img, &lbl, 6, 6, &pixels, &labels).unwrap();
    (img, lbl)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (img, lbl) = write_idx_fixture(tmp.path());
    let configs = [
        ("train", small_synth_config(4, "split.mode = person\nsplit.person = 3\n")),
        ("lopo", small_synth_config(4, "split.mode = lopo\nworkers = 2\n")),
        (
            "mnist",
            format!(
                "seed = 5\nruns = 3\ndataset.source = idx\ndataset.images = {}\ndataset.labels = {}\n\
                 net.hidden1 = 5\nnet.hidden2 = 5\nrprop.max_epochs = 10\n",
                img.display(),
                lbl.display()
            ),
        ),
    ];
    let mut checked = 0;
    for (cmd, text) in configs {
        let cfg = tmp.path().join(format!("{cmd}.cfg"));
        std::fs::write(&cfg, text).unwrap();
        let (a, b) = (tmp.path().join(format!("{cmd}-a")), tmp.path().join(format!("{cmd}-b")));
        run_cli(&[cmd], &cfg, &a)?;
        run_cli(&[cmd], &cfg, &b)?;
        let first = files_under(&a);
        // Re-running into an existing directory must overwrite with the same bytes.
        run_cli(&[cmd], &cfg, &a)?;
        let (fa, fb) = (files_under(&a), files_under(&b));
        ensure(fa.len() > 2, || format!("{cmd}: too few outputs"))?;
        ensure(fa.keys().eq(fb.keys()), || format!("{cmd}: different file sets"))?;
        for (path, bytes) in &fa {
            ensure(fb[path] == *bytes && first[path] == *bytes, || format!("{cmd}: {} differs", path.display()))?;
        }
        checked += fa.len();
    }
    Ok(format!("train, lopo, mnist each run three times; {checked} files byte-identical"))
}

// 7. Golden report layout.

fn golden_report() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("golden.cfg");
    std::fs::write(&cfg, small_synth_config(15, "split.mode = lopo\n")).unwrap();
    let out = tmp.path().join("out");
    run_cli(&["lopo"], &cfg, &out)?;
    let report = std::fs::read_to_string(out.join("report.txt")).map_err(|e| e.to_string())?;

    let lines: Vec<&str> = report.lines().collect();
    let cols = |l: &str, label: &str| -> Vec<String> {
        l.strip_prefix(label).unwrap_or("").split_whitespace().map(str::to_owned).collect()
    };
    let persons = cols(lines[1], "person");
    ensure(persons == (1..=15).map(|p| p.to_string()).collect::<Vec<_>>(), || format!("header `{}`", lines[1]))?;
    for (line, label) in [(lines[2], "stage 1"), (lines[3], "stage 2")] {
        let rates = cols(line, label);
        ensure(rates.len() == 15 && rates.iter().all(|r| r.len() == 3 && r.starts_with('.') || r == "1.00"), || {
            format!("row `{line}`")
        })?;
    }
    let delta_line = lines.iter().find(|l| l.starts_with("delta pp")).ok_or("no delta row")?;
    let deltas = cols(delta_line, "delta pp");
    ensure(deltas.len() == 10 && deltas.iter().all(|d| d.starts_with('+') || d.starts_with('-')), || {
        format!("delta row `{delta_line}`")
    })?;

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/lopo_15_persons.txt");
    if std::env::var_os("STACKFUSE_BLESS").is_some_and(|v| v == "1") {
        std::fs::write(&golden, &report).map_err(|e| e.to_string())?;
        return Ok("golden file rewritten".to_owned());
    }
    let expected = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    ensure(report == expected, || format!("report differs from {}:\n{report}", golden.display()))?;
    Ok("15 person columns, stage 1 above stage 2, 10 signed deltas; matches golden file".to_owned())
}

type Criterion = (&'static str, Option<Duration>, Box<dyn Fn() -> Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 gradient oracle", Some(Duration::from_secs(10)), Box::new(|| gradient_oracle().into())),
        ("2 RPROP step rule", Some(Duration::from_secs(1)), Box::new(|| rprop_traces().into())),
        ("3 split protocol", Some(Duration::from_secs(5)), Box::new(|| split_invariants().into())),
        ("4 MNIST control", None, Box::new(mnist_control)),
        ("5 fusion benefit (synthetic)", None, Box::new(|| fusion_benefit().into())),
        ("6 determinism", None, Box::new(|| determinism().into())),
        ("7 report golden file", None, Box::new(|| golden_report().into())),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Outcome::Pass(d), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Outcome::Fail(format!("{d}; took longer than {limit:?}"));
            }
        }
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Skipped(d) => ("SKIPPED", d),
            Outcome::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {name}: {tag} ({:.1} s) {detail}", elapsed.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

impl From<Check> for Outcome {
    fn from(c: Check) -> Self {
        match c {
            Ok(d) => Outcome::Pass(d),
            Err(d) => Outcome::Fail(d),
        }
    }
}
