//! Command line front end: loads algebra specs or built-in models, runs
//! the requested pipeline stage, and emits a deterministic JSON report.
//! The exit status is nonzero iff any check fails or an error occurs.

use clap::{Parser, Subcommand};
use dgbv_core::deformation::{
    gauge_transform, mc_residual, normalize_unit, solve_mc, DgLieAlgebra,
};
use dgbv_core::error::{CoreError, Result};
use dgbv_core::frobenius::frobenius_data;
use dgbv_core::hbar::HbarWindow;
use dgbv_core::vhs::{build_filtrations, harmonic_reps, period_map, HodgeFiltration, WSpec};
use dgbv_core::{
    cohomology, kahler, linalg, models, specfile, verify_mirror_theorem, DeformationPair,
    FlatTorusPair, Rat,
};
use serde_json::{json, Map, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dgbv", about = "Exact dGBV-to-Frobenius pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebra axioms, the derived Lie structure, the module
    /// structure and the subspace coincidence criterion.
    Verify {
        #[arg(long, conflicts_with = "spec")]
        model: Option<String>,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Cohomology dimensions and splitting data of d and delta.
    Cohomology {
        #[arg(long, conflicts_with = "spec")]
        model: Option<String>,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Solve the deformation equation to the given order.
    Deform {
        #[arg(long, conflicts_with = "spec")]
        model: Option<String>,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Run the full period-map pipeline and report the Frobenius package.
    Frobenius {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        filtration: Option<String>,
    },
    /// Compare the two pipelines of a dual torus pair in both role
    /// assignments.
    Mirror {
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Deterministic property-test sweep.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
    /// List the built-in models.
    Models,
    /// Print the JSON spec of a built-in model.
    EmitSpec {
        #[arg(long)]
        model: String,
    },
}

struct Doc {
    command: String,
    inputs: Map<String, Value>,
    checks: Vec<Value>,
    payload: Map<String, Value>,
    all_passed: bool,
}

impl Doc {
    fn new(command: &str) -> Self {
        Doc {
            command: command.to_string(),
            inputs: Map::new(),
            checks: Vec::new(),
            payload: Map::new(),
            all_passed: true,
        }
    }

    fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    fn absorb(&mut self, report: &dgbv_core::Report) {
        for c in &report.checks {
            if !c.passed {
                self.all_passed = false;
            }
            let mut entry = Map::new();
            entry.insert(
                "name".into(),
                json!(format!("{}: {}", report.title, c.name)),
            );
            entry.insert("passed".into(), json!(c.passed));
            if let Some(w) = &c.witness {
                entry.insert("witness".into(), json!(w));
            }
            self.checks.push(Value::Object(entry));
        }
    }

    fn check(&mut self, name: &str, passed: bool, witness: Option<String>) {
        if !passed {
            self.all_passed = false;
        }
        let mut entry = Map::new();
        entry.insert("name".into(), json!(name));
        entry.insert("passed".into(), json!(passed));
        if let Some(w) = witness {
            entry.insert("witness".into(), json!(w));
        }
        self.checks.push(Value::Object(entry));
    }

    fn emit(self) -> ExitCode {
        let doc = json!({
            "command": self.command,
            "inputs": Value::Object(self.inputs),
            "checks": self.checks,
            "payload": Value::Object(self.payload),
            "all_passed": self.all_passed,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
        if self.all_passed {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}

fn load_algebra(model: &Option<String>, spec: &Option<String>) -> Result<dgbv_core::DgbvAlgebra> {
    match (model, spec) {
        (Some(name), None) => models::builtin(name),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CoreError::Argument(format!("cannot read {path}: {e}")))?;
            specfile::parse_spec_str(&text)
        }
        _ => Err(CoreError::Argument(
            "exactly one of --model and --spec is required".into(),
        )),
    }
}

fn series_payload(s: &dgbv_core::SuperSeries<Rat>) -> Value {
    let mut map = Map::new();
    for (m, c) in s.terms() {
        map.insert(m.display(s.ring()), json!(c.to_frac_string()));
    }
    Value::Object(map)
}

fn matrix_payload(m: &linalg::Matrix) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|c| json!(c.to_frac_string())).collect()))
            .collect(),
    )
}

fn cmd_verify(doc: &mut Doc, model: Option<String>, spec: Option<String>) -> Result<()> {
    let a = load_algebra(&model, &spec)?;
    doc.input("algebra", a.name.clone());
    doc.absorb(&dgbv_core::check_dgbv_axioms(&a));
    let bracket = a.bracket_table()?;
    doc.absorb(&dgbv_core::check_odd_lie(&bracket, &a.d, Some(&a.product)));
    doc.absorb(&dgbv_core::check_odd_lie(
        &bracket,
        &a.delta,
        Some(&a.product),
    ));
    let pair = a.hbar_module()?;
    doc.absorb(&dgbv_core::check_module_axioms(
        &pair,
        HbarWindow::new(-12, 12),
    ));
    let manin = dgbv_core::check_manin(&a);
    doc.payload.insert(
        "manin".into(),
        json!({
            "verdict": manin.verdict,
            "dim_im_d_ker_delta": manin.im_d_ker_delta.dim(),
            "dim_im_delta_ker_d": manin.im_delta_ker_d.dim(),
            "dim_im_d_im_delta": manin.im_d_im_delta.dim(),
            "witness": manin.witness,
        }),
    );
    Ok(())
}

fn cmd_cohomology(doc: &mut Doc, model: Option<String>, spec: Option<String>) -> Result<()> {
    let a = load_algebra(&model, &spec)?;
    doc.input("algebra", a.name.clone());
    for (label, op) in [("d", &a.d), ("delta", &a.delta)] {
        let h = cohomology(op)?;
        doc.check(&format!("splitting of {label} verified"), true, None);
        let mut dims = Map::new();
        for (deg, k) in h.dims_by_bidegree() {
            dims.insert(format!("({},{})", deg.p, deg.q), json!(k));
        }
        doc.payload.insert(
            format!("cohomology_{label}"),
            json!({
                "dimension": h.dim(),
                "by_bidegree": Value::Object(dims),
            }),
        );
    }
    Ok(())
}

fn cmd_deform(
    doc: &mut Doc,
    model: Option<String>,
    spec: Option<String>,
    order: usize,
) -> Result<()> {
    use dgbv_core::coeff::Coeff;
    let a = load_algebra(&model, &spec)?;
    doc.input("algebra", a.name.clone());
    doc.input("order", order);
    let g = DgLieAlgebra::from_dgbv(&a)?;
    let sol = solve_mc(&g, order)?;
    let residual = mc_residual(&g, &sol.gamma)?;
    doc.check(
        "residual matches the obstruction record",
        residual.is_zero() == sol.is_unobstructed(),
        None,
    );
    doc.check(
        "solution is unobstructed",
        sol.is_unobstructed(),
        sol.obstructions
            .first()
            .map(|(k, class)| format!("order {k}: {class}")),
    );
    if sol.is_unobstructed() && order >= 2 {
        // Gauge covariance: an odd quadratic gauge keeps the residual zero.
        let mut gauge_applied = false;
        'find: for i in 0..g.basis.dim() {
            if !g.basis.parity(i).is_odd() {
                continue;
            }
            for a_idx in 0..sol.ring.param_count() {
                for b_idx in 0..sol.ring.param_count() {
                    let ta = dgbv_core::SuperSeries::var_times(&sol.ring, a_idx, Rat::one());
                    let tb = dgbv_core::SuperSeries::var_times(&sol.ring, b_idx, Rat::one());
                    let Ok(prod) = ta.mul(&tb) else { continue };
                    if prod.is_zero() {
                        continue;
                    }
                    let gauge = dgbv_core::GradedElement::single(&g.basis, i, prod);
                    let (even, odd) = gauge.split_total_parity();
                    if !even.is_zero() || odd.is_zero() {
                        continue;
                    }
                    let moved = gauge_transform(&g, &sol.gamma, &gauge)?;
                    doc.check(
                        "gauge transform preserves the solution",
                        mc_residual(&g, &moved)?.is_zero(),
                        None,
                    );
                    gauge_applied = true;
                    break 'find;
                }
            }
        }
        if !gauge_applied {
            doc.check(
                "gauge transform preserves the solution",
                true,
                Some("no odd gauge direction available".into()),
            );
        }
    }
    let mut obstructions = Vec::new();
    for (k, class) in &sol.obstructions {
        obstructions.push(json!({"order": k, "class": format!("{class}")}));
    }
    doc.payload
        .insert("obstructions".into(), Value::Array(obstructions));
    doc.payload
        .insert("parameters".into(), json!(sol.ring.param_count()));
    Ok(())
}

fn pipeline_pair(model: &str, metric: Option<&str>) -> Result<DeformationPair> {
    let metric_matrix = |n: usize| -> Result<linalg::Matrix> {
        match metric {
            None => Ok(linalg::identity(n)),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CoreError::Argument(format!("cannot read {path}: {e}")))?;
                let mf = specfile::parse_metric_str(&text)?;
                if mf.n != n {
                    return Err(CoreError::Argument(format!(
                        "metric is {} dimensional, model needs {n}",
                        mf.n
                    )));
                }
                mf.matrix()
            }
        }
    };
    match model {
        "torus-n1" | "torus-a-n1" => {
            Ok(kahler::build_model_a(1, &metric_matrix(1)?, Rat::one())?.pair)
        }
        "torus-n2" | "torus-a-n2" => {
            Ok(kahler::build_model_a(2, &metric_matrix(2)?, Rat::one())?.pair)
        }
        "torus-b-n1" => Ok(kahler::build_model_b(1, &metric_matrix(1)?, Rat::one())?.pair),
        "torus-b-n2" => Ok(kahler::build_model_b(2, &metric_matrix(2)?, Rat::one())?.pair),
        other => {
            let a = models::builtin(other)?;
            DeformationPair::from_dgbv(&a)
        }
    }
}

fn cmd_frobenius(
    doc: &mut Doc,
    model: String,
    order: usize,
    metric: Option<String>,
    filtration: Option<String>,
) -> Result<()> {
    doc.input("model", model.clone());
    doc.input("order", order);
    let pair = pipeline_pair(&model, metric.as_deref())?;
    let g = DgLieAlgebra::from_pair(&pair);
    let sol = solve_mc(&g, order)?;
    doc.check(
        "deformation solution is unobstructed",
        sol.is_unobstructed(),
        None,
    );
    if !sol.is_unobstructed() {
        return Ok(());
    }
    let sol = normalize_unit(&g, &sol)?;
    let classes = harmonic_reps(&pair)?;
    let hodge = HodgeFiltration::from_classes(&pair, &classes)?;
    let w = match &filtration {
        None => WSpec::opposite(&hodge),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CoreError::Argument(format!("cannot read {path}: {e}")))?;
            specfile::parse_filtration_str(&text)?.wspec()?
        }
    };
    let filt = build_filtrations(&pair, &classes, w)?;
    doc.check("filtration is isotropic", filt.isotropic, None);
    let window = HbarWindow::for_run(order, pair.weight);
    let pm = period_map(&pair, &sol, &filt, &classes, window)?;
    doc.check("period map solved", true, None);
    let (data, report) = frobenius_data(&pm)?;
    doc.absorb(&report);
    doc.payload
        .insert("potential".into(), series_payload(&data.potential));
    doc.payload
        .insert("metric".into(), matrix_payload(&data.metric));
    let euler: Vec<Value> = data.euler.iter().map(series_payload).collect();
    doc.payload
        .insert("euler_field".into(), Value::Array(euler));
    Ok(())
}

fn cmd_mirror(doc: &mut Doc, metric: String, order: usize) -> Result<()> {
    let text = std::fs::read_to_string(&metric)
        .map_err(|e| CoreError::Argument(format!("cannot read {metric}: {e}")))?;
    let mf = specfile::parse_metric_str(&text)?;
    doc.input("n", mf.n);
    doc.input("order", order);
    let pair = FlatTorusPair::new(mf.n, mf.matrix()?)?;
    for swap in [false, true] {
        let rep = verify_mirror_theorem(&pair, order, swap)?;
        doc.absorb(&rep);
    }
    Ok(())
}

fn cmd_selftest(doc: &mut Doc, seed: u64, cases: usize) -> Result<()> {
    use dgbv_core::coeff::Coeff;
    use dgbv_core::prng::Prng;
    doc.input("seed", seed);
    doc.input("cases", cases);
    let mut rng = Prng::new(seed);

    // Randomized sign coherence: the sign of an inverse permutation
    // inverts the sign.
    let mut sign_ok = true;
    for _ in 0..cases {
        let len = 2 + rng.below(5) as usize;
        let parities: Vec<dgbv_core::Parity> = (0..len)
            .map(|_| {
                if rng.below(2) == 0 {
                    dgbv_core::Parity::Even
                } else {
                    dgbv_core::Parity::Odd
                }
            })
            .collect();
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        let mut inv = vec![0; len];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let permuted: Vec<dgbv_core::Parity> = perm.iter().map(|&p| parities[p]).collect();
        let s1 = dgbv_core::koszul_sign(&parities, &perm).expect("valid");
        let s2 = dgbv_core::koszul_sign(&permuted, &inv).expect("valid");
        if (s1 * s2) != dgbv_core::Sign::one() {
            sign_ok = false;
        }
    }
    doc.check(
        "sign of inverse permutation inverts the sign",
        sign_ok,
        None,
    );

    // Randomized re-association of series products.
    let ring = dgbv_core::SeriesRing::new(
        vec![
            ("t0".into(), dgbv_core::Parity::Even),
            ("t1".into(), dgbv_core::Parity::Odd),
            ("t2".into(), dgbv_core::Parity::Odd),
            ("t3".into(), dgbv_core::Parity::Even),
        ],
        4,
    );
    let mut assoc_ok = true;
    for _ in 0..cases {
        let rand_series = |rng: &mut Prng| {
            let mut s = dgbv_core::SuperSeries::constant(&ring, rng.small_rat(4, 2));
            for i in 0..4 {
                if rng.below(2) == 0 {
                    s = s
                        .add(&dgbv_core::SuperSeries::var_times(
                            &ring,
                            i,
                            rng.small_rat(4, 2),
                        ))
                        .expect("same ring");
                }
            }
            s
        };
        let a = rand_series(&mut rng);
        let b = rand_series(&mut rng);
        let c = rand_series(&mut rng);
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        if left != right {
            assoc_ok = false;
        }
    }
    doc.check("series products re-associate exactly", assoc_ok, None);

    // Exhaustive axiom suites on every built-in model.
    for name in models::builtin_names() {
        let a = models::builtin(name)?;
        let rep = dgbv_core::check_dgbv_axioms(&a);
        doc.check(
            &format!("axioms of {name}"),
            rep.all_passed(),
            rep.failures().next().map(|c| c.name.clone()),
        );
    }

    // Sampled operator identities for the flat models.
    for n in [1usize, 2] {
        let space =
            dgbv_core::section::SectionSpace::new(n, dgbv_core::section::ModelKind::Polyvector, 8);
        let fspace =
            dgbv_core::section::SectionSpace::new(n, dgbv_core::section::ModelKind::Form, 8);
        let k = kahler::KahlerData::constant(n, &linalg::identity(n))?;
        let ops = kahler::KahlerOps::new(&k, &space)?;
        let count = cases.clamp(4, 24);
        let sections: Vec<_> = (0..count)
            .map(|_| kahler::random_section(&space, &mut rng, 2))
            .collect();
        let mut forms = Vec::new();
        while forms.len() < 4 {
            let s = kahler::random_section(&fspace, &mut rng, 1);
            if s.parity_if_homogeneous().is_some() && !s.is_zero() {
                forms.push(s);
            }
        }
        let pairs: Vec<_> = forms
            .chunks(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        let rep = kahler::verify_kahler_identities(&k, &ops, &sections, &pairs, false)?;
        doc.check(
            &format!("flat operator identities, n = {n}"),
            rep.all_passed(),
            rep.failures().next().map(|c| c.name.clone()),
        );
    }

    // A small full pipeline and mirror comparison.
    let pair = pipeline_pair("torus-n1", None)?;
    let g = DgLieAlgebra::from_pair(&pair);
    let sol = solve_mc(&g, 3)?;
    let classes = harmonic_reps(&pair)?;
    let hodge = HodgeFiltration::from_classes(&pair, &classes)?;
    let filt = build_filtrations(&pair, &classes, WSpec::opposite(&hodge))?;
    let pm = period_map(&pair, &sol, &filt, &classes, HbarWindow::for_run(3, 1))?;
    let (_, report) = frobenius_data(&pm)?;
    doc.check(
        "one-torus pipeline identities",
        report.all_passed(),
        report.failures().next().map(|c| c.name.clone()),
    );
    let tp = FlatTorusPair::new(1, linalg::identity(1))?;
    let rep = verify_mirror_theorem(&tp, 2, false)?;
    doc.check(
        "one-torus mirror comparison",
        rep.all_passed(),
        rep.failures().next().map(|c| c.name.clone()),
    );
    Ok(())
}

fn run(cli: Cli) -> ExitCode {
    let (mut doc, result) = match cli.command {
        Command::Verify { model, spec } => {
            let mut doc = Doc::new("verify");
            let r = cmd_verify(&mut doc, model, spec);
            (doc, r)
        }
        Command::Cohomology { model, spec } => {
            let mut doc = Doc::new("cohomology");
            let r = cmd_cohomology(&mut doc, model, spec);
            (doc, r)
        }
        Command::Deform { model, spec, order } => {
            let mut doc = Doc::new("deform");
            let r = cmd_deform(&mut doc, model, spec, order);
            (doc, r)
        }
        Command::Frobenius {
            model,
            order,
            metric,
            filtration,
        } => {
            let mut doc = Doc::new("frobenius");
            let r = cmd_frobenius(&mut doc, model, order, metric, filtration);
            (doc, r)
        }
        Command::Mirror { metric, order } => {
            let mut doc = Doc::new("mirror");
            let r = cmd_mirror(&mut doc, metric, order);
            (doc, r)
        }
        Command::Selftest { seed, cases } => {
            let mut doc = Doc::new("selftest");
            let r = cmd_selftest(&mut doc, seed, cases);
            (doc, r)
        }
        Command::Models => {
            let mut doc = Doc::new("models");
            doc.payload
                .insert("models".into(), json!(models::builtin_names()));
            (doc, Ok(()))
        }
        Command::EmitSpec { model } => match models::builtin(&model) {
            Ok(a) => {
                println!("{}", specfile::algebra_to_json(&a));
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        },
    };
    if let Err(e) = result {
        doc.check("command completed", false, Some(e.to_string()));
    }
    doc.emit()
}

fn main() -> ExitCode {
    run(Cli::parse())
}
