//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process exits
//! non-zero if any criterion fails.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kinterp::diagnostics::Boundedness;
use kinterp::geometry::{
    fill_distance_interval, generate_candidates, geometric_greedy, nearest_index, separation_distance, CandidateScheme,
};
use kinterp::{BoxDomain, InterpolationSystem, Kernel, PointSet};
use kinterp_cli::config::{self, ExperimentConfig};
use kinterp_cli::runner::{execute, Outputs};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn(&mut Cache) -> Check,
}

/// Outputs of config runs, reused by the determinism check.
#[derive(Default)]
struct Cache {
    runs: HashMap<&'static str, Outputs>,
}

impl Cache {
    fn run(&mut self, name: &'static str) -> Result<&Outputs, String> {
        if !self.runs.contains_key(name) {
            let out = execute(&load(name)?).map_err(|e| format!("{name}: {e}"))?;
            self.runs.insert(name, out);
        }
        Ok(&self.runs[name])
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Result<ExperimentConfig, String> {
    config::load(&configs_dir().join(format!("{name}.toml"))).map_err(|e| format!("{name}: {e}"))
}

/// Data rows of an emitted CSV, keyed by column name.
fn table(csv: &str) -> Vec<HashMap<String, String>> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap_or("").split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> Result<f64, String> {
    row.get(col)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("column {col} missing or not numeric"))
}

fn metadata(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    csv.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .map(|v| v.trim_matches('"').to_string())
}

fn report<'a>(out: &'a Outputs, file: &str) -> Result<&'a str, String> {
    out.file(file).ok_or_else(|| format!("no {file} produced"))
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn greedy_design(dim: usize, n: usize) -> Result<PointSet, String> {
    let dom = BoxDomain::unit(dim);
    let pool = generate_candidates(&dom, 10_000, CandidateScheme::LowDiscrepancy).map_err(|e| e.to_string())?;
    let seed = nearest_index(&pool, &vec![0.5; dim]).unwrap_or(0);
    geometric_greedy(&pool, n, seed).map_err(|e| e.to_string())
}

fn matern(nu2: u32, gamma: f64, dim: usize) -> Kernel {
    match nu2 {
        1 => Kernel::matern12(gamma, dim),
        3 => Kernel::matern32(gamma, dim),
        _ => Kernel::matern52(gamma, dim),
    }
    .expect("valid kernel")
}

fn cardinality(_: &mut Cache) -> Check {
    let mut worst: (f64, String) = (0.0, String::new());
    for dim in [1, 2] {
        let master = greedy_design(dim, 200)?;
        for nu2 in [1, 3, 5] {
            for gamma in [1.0, 10.0] {
                let kernel = matern(nu2, gamma, dim);
                for n in [16, 64, 200] {
                    let nodes = master.prefix(n);
                    let sys = InterpolationSystem::new(&kernel, &nodes).map_err(|e| e.to_string())?;
                    for i in 0..n {
                        let l = sys.lagrange(i).map_err(|e| e.to_string())?;
                        let vals = l.evaluate(nodes.coords()).map_err(|e| e.to_string())?;
                        for (j, v) in vals.iter().enumerate() {
                            let dev = (v - if i == j { 1.0 } else { 0.0 }).abs();
                            if dev > worst.0 {
                                worst = (dev, format!("{} gamma={gamma} d={dim} n={n}", kernel.family().name()));
                            }
                        }
                    }
                }
            }
        }
    }
    ensure(
        worst.0 <= 1e-6,
        format!("max |l_i(x_j) - delta_ij| = {:.2e} ({})", worst.0, worst.1),
    )
}

/// Stratified random points: one uniform point per cell of a regular grid, in random order.
fn random_points(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> PointSet {
    let per_axis = (m as f64).powf(1.0 / dim as f64).ceil() as usize;
    let mut cells: Vec<usize> = (0..per_axis.pow(dim as u32)).collect();
    cells.shuffle(rng);
    let mut coords = Vec::with_capacity(m * dim);
    for &c in &cells[..m] {
        let mut idx = c;
        for _ in 0..dim {
            let k = idx % per_axis;
            idx /= per_axis;
            coords.push((k as f64 + rng.gen_range(0.05..0.95)) / per_axis as f64);
        }
    }
    PointSet::new(BoxDomain::unit(dim), coords).expect("points in the unit box")
}

fn minimal_norm(_: &mut Cache) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut worst_pyth, mut worst_mono) = (0.0f64, f64::NEG_INFINITY);
    for trial in 0..50 {
        let dim = 1 + trial % 2;
        let kernel = matern([1, 3, 5][trial % 3], [1.0, 10.0][(trial / 3) % 2], dim);
        let fine = random_points(&mut rng, dim, 64);
        let coarse = fine.prefix(16);
        let data: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fit = |pts: &PointSet, d: &[f64]| kinterp::fit(&kernel, pts, d).map_err(|e| e.to_string());
        let s_m = fit(&fine, &data)?;
        let s_n = fit(&coarse, &data[..16])?;
        let resid: Vec<f64> = s_n
            .evaluate(fine.coords())
            .map_err(|e| e.to_string())?
            .iter()
            .zip(&data)
            .map(|(s, f)| f - s)
            .collect();
        let diff = fit(&fine, &resid)?;
        let (nm, nn, nd) = (
            s_m.native_norm().value,
            s_n.native_norm().value,
            diff.native_norm().value,
        );
        let scale = nm * nm;
        worst_pyth = worst_pyth.max((nm * nm - nn * nn - nd * nd).abs() / scale);
        worst_mono = worst_mono.max((nn * nn - nm * nm) / scale);
    }
    ensure(
        worst_pyth <= 1e-6 && worst_mono <= 1e-6,
        format!("worst Pythagoras defect {worst_pyth:.2e}, worst monotonicity excess {worst_mono:.2e} (relative)"),
    )
}

fn native_rate(cache: &mut Cache) -> Check {
    let csv = report(cache.run("native_rate")?, "report.csv")?;
    let slope: f64 = metadata(csv, "result.sup_slope")
        .and_then(|v| v.parse().ok())
        .ok_or("no sup slope reported")?;
    ensure(
        (1.1..=1.9).contains(&slope),
        format!("sup-error slope {slope:.3}, required [1.1, 1.9]"),
    )
}

fn greedy_lebesgue(cache: &mut Cache) -> Check {
    let rows = table(report(cache.run("lebesgue_matern32")?, "report.csv")?);
    let mut lam = Vec::new();
    for r in rows.iter().filter(|r| num(r, "n").is_ok_and(|n| n >= 100.0)) {
        lam.push(num(r, "lambda")?);
    }
    let spread =
        lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / lam.iter().cloned().fold(f64::INFINITY, f64::min);
    let rows = table(report(cache.run("lebesgue_gaussian")?, "report.csv")?);
    let at = |n: &str| rows.iter().find(|r| r["n"] == n).ok_or(format!("no level {n}"));
    let (g100, g400) = (at("100")?, at("400")?);
    let failed = g100["status"] != "ok" || g400["status"] != "ok";
    let (gauss_ok, gauss) = if failed {
        (true, "Gaussian factorization failed".to_string())
    } else {
        let ratio = num(g400, "lambda")? / num(g100, "lambda")?;
        (ratio >= 2.0, format!("Gaussian Lambda(400)/Lambda(100) = {ratio:.2}"))
    };
    ensure(
        spread <= 2.0 && gauss_ok,
        format!("Matern 3/2 max/min Lambda over n>=100 = {spread:.3}; {gauss}"),
    )
}

/// `rᵀK⁻¹r` by Gaussian elimination with partial pivoting.
fn dense_norm_sq(kernel: &Kernel, nodes: &PointSet, r: &[f64]) -> f64 {
    let n = nodes.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| kernel.eval(nodes.point(i), nodes.point(j)).unwrap())
                .collect();
            row.push(r[i]);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        let (top, rest) = a.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest.iter_mut() {
            let f = row[c] / pivot[c];
            if f != 0.0 {
                for k in c..=n {
                    row[k] -= f * pivot[k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    r.iter().zip(&x).map(|(a, b)| a * b).sum()
}

fn dichotomy(cache: &mut Cache) -> Check {
    let translate = config::parse(
        r#"
[experiment]
kind = "norm_growth"
output = "translate"
[kernel]
family = "matern32"
gamma = 10.0
dim = 1
[design]
scheme = "dyadic"
levels = [15, 31, 63, 127, 255, 511]
[target]
name = "kernel_translates"
centers = [0.3]
weights = [1.0]
"#,
    )
    .map_err(|e| e.to_string())?;
    let out = execute(&translate).map_err(|e| e.to_string())?;
    let csv = report(&out, "report.csv")?;
    let label_a = metadata(csv, "result.classification").unwrap_or_default();
    let bound = translate.kernel.diagonal(&[0.3]).sqrt() + 1e-6;
    let mut max_a = 0.0f64;
    for r in table(csv) {
        max_a = max_a.max(num(&r, "native_norm")?);
    }
    let ok_a = label_a == Boundedness::BoundedLike.label() && max_a <= bound;

    let cfg = load("norm_growth_abs")?;
    let csv = report(cache.run("norm_growth_abs")?, "report.csv")?;
    let label_b = metadata(csv, "result.classification").unwrap_or_default();
    let rows = table(csv);
    let design = table(report(cache.run("norm_growth_abs")?, "design.csv")?);
    let xs: Vec<f64> = design.iter().map(|r| num(r, "x1")).collect::<Result<_, _>>()?;
    let target = cfg.build_target().ok_or("no target")?;
    let mut norms = Vec::new();
    let mut oracle_dev = 0.0f64;
    for r in &rows {
        let n = num(r, "n")? as usize;
        let norm = num(r, "native_norm")?;
        let nodes = PointSet::new(cfg.domain.clone(), xs[..n].to_vec()).map_err(|e| e.to_string())?;
        let data = target.sample(nodes.coords(), 1);
        let oracle = dense_norm_sq(&cfg.kernel, &nodes, &data).max(0.0).sqrt();
        oracle_dev = oracle_dev.max((norm - oracle).abs() / oracle);
        norms.push(norm);
    }
    let ratio = norms.last().copied().unwrap_or(0.0) / norms.first().copied().unwrap_or(f64::NAN);
    let ok_b = label_b == Boundedness::DivergingLike.label() && ratio > 5.0 && oracle_dev <= 1e-5;
    ensure(
        ok_a && ok_b,
        format!(
            "translate: {label_a}, max norm {max_a:.9} (bound {bound:.9}); |x-1/2|: {label_b}, last/first {ratio:.1}, \
             max relative deviation from dense solve {oracle_dev:.1e}"
        ),
    )
}

fn escape_rows(cache: &mut Cache) -> Result<Vec<HashMap<String, String>>, String> {
    let rows = table(report(cache.run("l2_escape")?, "report.csv")?);
    if let Some(r) = rows.iter().find(|r| r["status"] != "ok") {
        return Err(format!("level {} failed: {}", r["n"], r["status"]));
    }
    Ok(rows)
}

fn l2_escape(cache: &mut Cache) -> Check {
    let rows = escape_rows(cache)?;
    let l2: Vec<f64> = rows.iter().map(|r| num(r, "l2_error")).collect::<Result<_, _>>()?;
    let tail = &l2[l2.len().saturating_sub(4)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let ratio = l2[l2.len() - 1] / l2[0];
    ensure(
        monotone && ratio <= 0.2,
        format!("last 4 levels non-increasing: {monotone}; final/initial L2 error {ratio:.4}"),
    )
}

fn sup_escape(cache: &mut Cache) -> Check {
    let rows = escape_rows(cache)?;
    let sup: Vec<f64> = rows.iter().map(|r| num(r, "sup_error")).collect::<Result<_, _>>()?;
    let ratio = sup[sup.len() - 1] / sup[0];
    // dyadic levels have 2^k - 1 nodes, so n >= 64 starts at 63
    let mut lam = Vec::new();
    for r in rows.iter().filter(|r| num(r, "n").is_ok_and(|n| n >= 63.0)) {
        lam.push(num(r, "lambda")?);
    }
    let spread =
        lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / lam.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(
        ratio <= 0.5 && spread <= 2.0,
        format!("final/initial sup error {ratio:.3}; Lambda max/min over n>=63 {spread:.3}"),
    )
}

fn decay(cache: &mut Cache) -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    let text = std::fs::read_to_string(configs_dir().join("decay.toml")).map_err(|e| e.to_string())?;
    let matern52 = config::parse(&text.replace("matern32", "matern52")).map_err(|e| e.to_string())?;
    let out52 = execute(&matern52).map_err(|e| e.to_string())?;
    for (label, out) in [("3/2", cache.run("decay")?.clone()), ("5/2", out52)] {
        let rows = table(report(&out, "decay.csv")?);
        let mut rates = Vec::new();
        for r in &rows {
            if r["status"] != "ok" {
                ok = false;
                details.push(format!("nu={label} n={}: {}", r["n"], r["status"]));
                continue;
            }
            let (rate, r2) = (num(r, "nu_hat")?, num(r, "r2")?);
            ok &= rate > 0.0 && r2 >= 0.8;
            rates.push(rate);
            details.push(format!("nu={label} n={}: {rate:.3} (r2 {r2:.3})", r["n"]));
        }
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= rates.len() == 3 && hi <= 2.0 * lo;
    }
    ensure(ok, format!("decay rates {}", details.join(", ")))
}

/// Fill distance of sorted nodes over the grid `k/m`, `k = 0..=m`.
fn brute_fill(sorted: &[f64], m: usize) -> f64 {
    let mut j = 0;
    let mut h = 0.0f64;
    for k in 0..=m {
        let x = k as f64 / m as f64;
        while j + 1 < sorted.len() && (sorted[j + 1] - x).abs() <= (sorted[j] - x).abs() {
            j += 1;
        }
        h = h.max((sorted[j] - x).abs());
    }
    h
}

fn geometry(_: &mut Cache) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst, mut q_ok) = (0.0f64, true);
    for _ in 0..100 {
        let n = rng.gen_range(2..=40);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let pts = PointSet::new(BoxDomain::unit(1), xs.clone()).map_err(|e| e.to_string())?;
        let h = fill_distance_interval(&pts, 0.0, 1.0).map_err(|e| e.to_string())?;
        let q = separation_distance(&pts).map_err(|e| e.to_string())?;
        xs.sort_by(f64::total_cmp);
        worst = worst.max((h - brute_fill(&xs, 1_000_000)).abs());
        q_ok &= q <= h;
    }
    ensure(
        worst <= 2e-6 && q_ok,
        format!("max |h_exact - h_grid| = {worst:.2e}; q <= h on all sets: {q_ok}"),
    )
}

fn determinism(cache: &mut Cache) -> Check {
    let mut compared = 0;
    for name in ["lebesgue_matern32", "lebesgue_gaussian", "l2_escape"] {
        let first = cache.run(name)?.clone();
        let again = execute(&load(name)?).map_err(|e| e.to_string())?;
        for f in first.files.iter().filter(|f| f.name.ends_with(".csv")) {
            if again.file(&f.name) != Some(f.contents.as_str()) {
                return Err(format!("{name} {} differs between runs", f.name));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} CSV files byte-identical across reruns"))
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: 1,
            name: "cardinality",
            budget: secs(30),
            run: cardinality,
        },
        Criterion {
            id: 2,
            name: "minimal-norm algebra",
            budget: secs(10),
            run: minimal_norm,
        },
        Criterion {
            id: 3,
            name: "native-space rate",
            budget: secs(30),
            run: native_rate,
        },
        Criterion {
            id: 4,
            name: "Lebesgue constants of greedy designs",
            budget: secs(300),
            run: greedy_lebesgue,
        },
        Criterion {
            id: 5,
            name: "membership dichotomy",
            budget: secs(60),
            run: dichotomy,
        },
        Criterion {
            id: 6,
            name: "L2 escape",
            budget: secs(60),
            run: l2_escape,
        },
        Criterion {
            id: 7,
            name: "sup-norm escape",
            budget: secs(60),
            run: sup_escape,
        },
        Criterion {
            id: 8,
            name: "exponential decay",
            budget: secs(30),
            run: decay,
        },
        Criterion {
            id: 9,
            name: "geometry oracles",
            budget: secs(20),
            run: geometry,
        },
        Criterion {
            id: 10,
            name: "determinism",
            budget: None,
            run: determinism,
        },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut cache = Cache::default();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let result = (c.run)(&mut cache);
        let elapsed = start.elapsed();
        let over = c.budget.filter(|b| elapsed > *b);
        let (pass, detail) = match (&result, over) {
            (Ok(d), None) => (true, d.clone()),
            (Ok(d), Some(b)) => (false, format!("{d}; over the {}s budget", b.as_secs())),
            (Err(d), _) => (false, d.clone()),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {:<38} {}  {:.1}s  {detail}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
