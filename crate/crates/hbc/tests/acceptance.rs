//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hbc::report::Case;
use hbc::suites::{run_suite, SuiteOptions};

struct Criterion {
    id: u8,
    title: &'static str,
    suites: &'static [&'static str],
    /// Seconds, where the criterion has one.
    budget: Option<f64>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "W_n expansion and closed form of I'(W_n), n = 1..4, exact",
        suites: &["wexpansion"],
        budget: Some(5.0),
    },
    Criterion {
        id: 2,
        title: "ε-Beta integrals (−1)^(n−i)·2^n/n!, 1 ≤ i ≤ n ≤ 6, exact, sign discrepancy flagged",
        suites: &["beta"],
        budget: Some(1.0),
    },
    Criterion {
        id: 3,
        title: "d∘d = 0 on 200 cubes, λ and Cub chain maps on 50 seeds each, exact",
        suites: &["dsquare", "lambda", "cub"],
        budget: Some(30.0),
    },
    Criterion {
        id: 4,
        title: "path independence and uniqueness of emi metrics on 50 seeds, 1e-10",
        suites: &["emi"],
        budget: None,
    },
    Criterion {
        id: 5,
        title: "Chern–Weil normalization ±1 on the projective line, 1e-6",
        suites: &["chern-weil"],
        budget: Some(60.0),
    },
    Criterion {
        id: 6,
        title: "restriction 1e-8 and inductive transgression 1e-9 on 20 emi cubes",
        suites: &["transgression"],
        budget: None,
    },
    Criterion {
        id: 7,
        title: "tensor factorization 1e-10 and multiplicativity 1e-6",
        suites: &["tensor"],
        budget: None,
    },
    Criterion {
        id: 8,
        title: "c̃h₁ = −½ log(b/a) 1e-6, log additivity 1e-5, scale invariance 1e-8",
        suites: &["closed-form"],
        budget: Some(120.0),
    },
    Criterion {
        id: 9,
        title: "degenerate vanishing 1e-5 on 20 degeneracies, log moment 1e-6",
        suites: &["degenerate"],
        budget: None,
    },
    Criterion {
        id: 10,
        title: "transgression formula on 9×9 grids for three families, 1e-4",
        suites: &["eq2"],
        budget: Some(600.0),
    },
    Criterion {
        id: 11,
        title: "cocycle identity on 10 emi 2-cubes, 1e-5",
        suites: &["cocycle"],
        budget: None,
    },
    Criterion {
        id: 12,
        title: "boundary of the W current, n = 1 at 1e-5 and n = 2 at 1e-4",
        suites: &["boundary"],
        budget: None,
    },
];

fn worst_excess(cases: &[Case]) -> f64 {
    cases
        .iter()
        .filter_map(|c| c.value.map(|v| (v - c.expected).abs()))
        .fold(0.0, f64::max)
}

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let cases: Vec<Case> = c
            .suites
            .iter()
            .flat_map(|s| run_suite(s, &opts).expect("known suite"))
            .collect();
        let elapsed = start.elapsed().as_secs_f64();
        let passed = cases.iter().filter(|x| x.passed()).count();
        let in_budget = c.budget.map_or(true, |b| elapsed < b);
        let ok = passed == cases.len() && in_budget;
        if !ok {
            failed += 1;
        }
        let budget = c.budget.map_or(String::new(), |b| format!(" of {b:.0}s"));
        println!(
            "{} criterion {:2}: {} [{passed}/{} cases, max deviation {:.2e}, {elapsed:.2}s{budget}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            cases.len(),
            worst_excess(&cases),
        );
        for x in cases.iter().filter(|x| !x.passed()) {
            println!(
                "     {:?} {}: {:?} (expected {} ± {})",
                x.status, x.name, x.value, x.expected, x.tolerance
            );
        }
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
