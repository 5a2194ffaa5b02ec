// debug binary: trace factorization words and per-step norms
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use tfa_core::grid::{GridSpec, SampledField};
use tfa_core::metaplectic::{apply_generator, apply_via_factorization};
use tfa_core::sympmat::{GeneratorStep, SymplecticMatrix, random_covariant};

fn main() {
    let grid = GridSpec::new(1, 64, 1.0 / 8.0).unwrap();
    let f = SampledField::from_fn(grid, |x, xi| {
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() + xi.iter().map(|v| v * v).sum::<f64>();
        let skew: f64 = x.iter().sum::<f64>() * 0.4 + xi.iter().sum::<f64>() * 0.1;
        Complex64::new((-PI * r2).exp() * (1.0 + skew), 0.3 * skew * (-PI * r2).exp())
    });
    let cases: Vec<(&str, SymplecticMatrix)> = vec![
        ("J", SymplecticMatrix::j(1).unwrap()),
        ("A_ST", SymplecticMatrix::a_st(1).unwrap()),
        ("A_tau(0.3)", SymplecticMatrix::a_tau(1, 0.3).unwrap()),
        ("A_half", SymplecticMatrix::a_half(1).unwrap()),
        ("cov(7)", random_covariant(1, 7)),
    ];
    for (name, a) in cases {
        let steps = a.factor_into_generators().unwrap().steps;
        println!("== {name}: {} steps", steps.len());
        let mut cur = f.clone();
        for (i, s) in steps.iter().enumerate() {
            let tag = match s {
                GeneratorStep::Fourier => "Fourier".to_string(),
                GeneratorStep::LinearChange(e) => format!("Linear det={:.4} E={:?}", e.determinant(), e.as_slice()),
                GeneratorStep::Chirp(c) => format!("Chirp C={:?}", c.as_slice()),
            };
            match apply_generator(s, &cur) {
                Ok(next) => {
                    println!("  step {i}: {tag}: norm {:.6} -> {:.6}", cur.norm_l2(), next.norm_l2());
                    cur = next;
                }
                Err(e) => {
                    println!("  step {i}: {tag}: ERROR {e}");
                    break;
                }
            }
        }
        match apply_via_factorization(&a, &f) {
            Ok(out) => println!("  total: ok, norm {:.6} (input {:.6})", out.norm_l2(), f.norm_l2()),
            Err(e) => println!("  total: ERROR {e}"),
        }
    }
}
