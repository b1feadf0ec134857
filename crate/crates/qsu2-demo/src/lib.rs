//! Browser bindings: each export takes plain arguments and returns JSON.

use qsu2::approx::{certify_kq, CertifyOptions};
use qsu2::expr::Expr;
use qsu2::spingeom::{commutator_growth, spectrum, Dirac};
use qsu2::{Generator, HalfInteger, Params};
use wasm_bindgen::prelude::*;

/// Largest truncation (as 2J) the page may request.
const MAX_TWICE_J: i32 = 48;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn setup(q: f64, dirac: &str, twice_j: i32) -> Result<(Params, Dirac, HalfInteger), JsError> {
    if !(0..=MAX_TWICE_J).contains(&twice_j) {
        return Err(fail(format!("2J must lie in 0..={MAX_TWICE_J}")));
    }
    Ok((Params::new(q).map_err(fail)?, dirac.parse().map_err(fail)?, HalfInteger::from_twice(twice_j)))
}

/// Dirac eigenvalues with multiplicities up to spin `twice_j / 2`.
#[wasm_bindgen]
pub fn dirac_spectrum(q: f64, dirac: &str, twice_j: i32) -> Result<String, JsError> {
    let (p, d, jmax) = setup(q, dirac, twice_j)?;
    serde_json::to_string(&spectrum(&d, jmax, &p)).map_err(fail)
}

/// Norm of `[D, pi_prime(x)]` for each cutoff in the comma-separated `grid` (2J values).
#[wasm_bindgen]
pub fn commutator_norms(q: f64, dirac: &str, generator: &str, grid: &str) -> Result<String, JsError> {
    let (p, d, _) = setup(q, dirac, 0)?;
    let x = Generator::parse(generator).ok_or_else(|| fail(format!("unknown generator {generator:?}")))?;
    let grid = grid
        .split(',')
        .map(|t| match t.trim().parse::<i32>() {
            Ok(n) if (0..=MAX_TWICE_J).contains(&n) => Ok(HalfInteger::from_twice(n)),
            _ => Err(fail(format!("bad cutoff {t:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    serde_json::to_string(&commutator_growth(&d, x, &p, &grid).map_err(fail)?).map_err(fail)
}

/// Decay certificate for an operator expression such as `[piiop_hat(a),pi_hat(b)]`.
#[wasm_bindgen]
pub fn decay_certificate(q: f64, dirac: &str, expr: &str, twice_j: i32, alpha: f64) -> Result<String, JsError> {
    let (p, d, jmax) = setup(q, dirac, twice_j)?;
    let e: Expr = expr.parse().map_err(fail)?;
    let basis = e.basis(jmax).map_err(fail)?;
    let op = e.evaluate(&basis, &d, &p).map_err(fail)?;
    let opts = CertifyOptions::default().with_word_length(e.word_length());
    serde_json::to_string(&certify_kq(&e.to_string(), &op, alpha, &p, &opts).map_err(fail)?).map_err(fail)
}
