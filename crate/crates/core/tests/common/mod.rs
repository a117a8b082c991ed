#![allow(dead_code)]

use augpack::offline::solve_separable_concave;
use augpack::seed::Rng;
use augpack::switching::trimmed_advice;
use augpack::{AdviceStream, Column, ConcavePiece, PackingInstance, SolutionTrace};
use rand::Rng as _;

pub fn e1() -> PackingInstance {
    PackingInstance::new(
        vec![1.0],
        vec![
            Column::new(vec![(0, 0.5)], ConcavePiece::linear(1.0)),
            Column::new(vec![(0, 1.0)], ConcavePiece::linear(1.0)),
        ],
    )
    .unwrap()
}

pub fn random_piece(r: &mut Rng, linear_only: bool) -> ConcavePiece {
    let kind = if linear_only { 0 } else { r.gen_range(0..4) };
    match kind {
        0 => ConcavePiece::Linear { weight: r.gen_range(0.5..1.5) },
        1 => ConcavePiece::Log { scale: r.gen_range(0.5..2.0), stretch: r.gen_range(0.2..2.0) },
        2 => ConcavePiece::Power { scale: r.gen_range(0.5..1.5), exponent: r.gen_range(0.3..1.0) },
        _ => ConcavePiece::CappedLinear { weight: r.gen_range(0.5..1.5), cap: r.gen_range(0.2..2.0) },
    }
}

/// Sparse random instance; every column gets at least one positive entry.
pub fn random_instance(r: &mut Rng, n: usize, m: usize, linear_only: bool) -> PackingInstance {
    let b: Vec<f64> = (0..m).map(|_| r.gen_range(0.5..2.0)).collect();
    let columns = (0..n)
        .map(|_| {
            let mut coeffs = Vec::new();
            for i in 0..m {
                if r.gen_bool(0.5) {
                    coeffs.push((i, r.gen_range(0.05..1.0)));
                }
            }
            if coeffs.is_empty() {
                coeffs.push((r.gen_range(0..m), r.gen_range(0.05..1.0)));
            }
            Column::new(coeffs, random_piece(r, linear_only))
        })
        .collect();
    PackingInstance::new(b, columns).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdviceFamily {
    CorruptedOptimum,
    Random,
    Zero,
}

pub const ADVICE_FAMILIES: [AdviceFamily; 3] =
    [AdviceFamily::CorruptedOptimum, AdviceFamily::Random, AdviceFamily::Zero];

pub fn make_advice(r: &mut Rng, inst: &PackingInstance, family: AdviceFamily) -> AdviceStream {
    let values = match family {
        AdviceFamily::CorruptedOptimum => {
            let opt = solve_separable_concave(inst, 1e-4, 100).unwrap();
            let p = r.gen_range(0.0..1.0);
            opt.x_star.iter().map(|&v| if r.gen_bool(p) { 0.0 } else { v }).collect()
        }
        AdviceFamily::Random => inst.columns.iter().map(|c| r.gen_range(0.0..2.0) * c.max_step(&inst.b)).collect(),
        AdviceFamily::Zero => vec![0.0; inst.n()],
    };
    AdviceStream::new(values).unwrap()
}

/// Checks the recurrence, the lower envelope and the four worst-case bounds of the switching rule on one run.
/// Assumes the default mixing (`λ = 1/2`, `γ = 1`).
pub fn check_invariants(inst: &PackingInstance, trace: &SolutionTrace) -> Result<(), String> {
    let m = inst.m();
    let beta_final = trace.beta_final();
    let mut prefix = vec![0.0; m];
    let mut prev_beta = 1.0f64;
    for (col, r) in inst.columns.iter().zip(&trace.rounds) {
        if r.beta < prev_beta {
            return Err(format!("round {}: β decreased from {prev_beta} to {}", r.j, r.beta));
        }
        prev_beta = r.beta;
        for &(i, a) in &col.coeffs {
            prefix[i] += a * r.x_adv;
        }
        let gate = prefix.iter().zip(&inst.b).all(|(l, b)| *l <= r.beta * b);
        if gate != r.used {
            return Err(format!("round {}: gate {gate} but recorded {}", r.j, r.used));
        }
        let expected = if gate { (r.x_sub + r.x_adv) / 2.0 } else { r.x_sub };
        if (r.x_comb - expected).abs() > 1e-12 {
            return Err(format!("round {}: x = {} but recurrence gives {expected}", r.j, r.x_comb));
        }
        let envelope = r.x_sub / 2.0 + if r.used { r.x_adv / 2.0 } else { 0.0 };
        if r.x_comb < envelope - 1e-12 {
            return Err(format!("round {}: x = {} below x^O/2 + trim = {envelope}", r.j, r.x_comb));
        }
    }

    let f = |x: &[f64]| inst.objective(x).unwrap();
    let (x, x_sub, x_adv) = (trace.x(), trace.x_sub(), trace.x_adv());
    if f(&x) < f(&x_sub) / 2.0 - 1e-9 {
        return Err(format!("f(x) = {} < f(x^O)/2 = {}", f(&x), f(&x_sub) / 2.0));
    }
    if trace.all_used() && f(&x) < f(&x_adv) / 2.0 - 1e-9 {
        return Err(format!("advice always used but f(x) = {} < f(x')/2 = {}", f(&x), f(&x_adv) / 2.0));
    }
    let trim_loads = inst.loads(&trimmed_advice(trace)).unwrap();
    for (i, (l, b)) in trim_loads.iter().zip(&inst.b).enumerate() {
        if *l > beta_final * b / 2.0 + 1e-9 {
            return Err(format!("row {}: trimmed advice load {l} > β·b/2 = {}", i + 1, beta_final * b / 2.0));
        }
    }
    let v = inst.violation(&x).unwrap();
    let v_sub = inst.violation(&x_sub).unwrap();
    if v > v_sub + beta_final / 2.0 + 1e-9 {
        return Err(format!("violation {v} > {v_sub} + β/2 = {}", v_sub + beta_final / 2.0));
    }
    Ok(())
}
