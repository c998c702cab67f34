//! Built-in identity corpus.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySpec {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub tol: f64,
}

fn spec(name: &str, lhs: &str, rhs: &str, tol: f64) -> IdentitySpec {
    IdentitySpec { name: name.into(), lhs: lhs.into(), rhs: rhs.into(), tol }
}

/// Identities that hold for every algebraic curvature tensor.
pub fn builtin() -> Vec<IdentitySpec> {
    vec![
        spec("bianchi", "R[i,j,k,l] + R[j,k,i,l] + R[k,i,j,l]", "0 delta[i,j] delta[k,l]", 1e-12),
        spec("ricci_contraction", "Ric[i,j]", "R[i,k,k,j]", 1e-12),
        spec("scalar_contraction", "scal", "R[i,k,k,i]", 1e-12),
        spec("clifford_relation", "e[i] e[j] + e[j] e[i]", "-2 delta[i,j]", 1e-12),
        spec("identity_one", "R[l,k,i,p] e[k] e[l] e[i]", "2 Ric[p,l] e[l]", 1e-11),
        spec("identity_two", "R[l,k,j,p] e[k] e[l] e[i]", "-R[j,p,k,l] e[i] e[k] e[l] - 4 R[j,p,i,k] e[k]", 1e-11),
    ]
}

pub fn load(text: &str) -> Result<Vec<IdentitySpec>, serde_json::Error> {
    match serde_json::from_str::<Vec<IdentitySpec>>(text) {
        Ok(list) => Ok(list),
        Err(_) => serde_json::from_str::<IdentitySpec>(text).map(|one| vec![one]),
    }
}
