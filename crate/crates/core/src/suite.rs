//! The acceptance battery: ten criteria, each backed by one or more
//! [`VerificationReport`]s. Reports are sorted by check name so the output
//! does not depend on evaluation order.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::build_twisted_rep;
use crate::curvature::{random_curvature, random_curvature_unprojected, SymTensor2};
use crate::error::{Error, Result};
use crate::expr::{self, corpus, evaluate, parse, Environment};
use crate::linalg::C64;
use crate::models;
use crate::spinlab::{eh_ricci_identity_check, phi_map, twisted_pure_check, GeometricDatum};
use crate::verify::{self, VerificationReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub clifford: f64,
    pub curvature_identity: f64,
    pub mutation_detect: f64,
    pub isometry: f64,
    pub lemma: f64,
    pub lemma_invariance: f64,
    pub pairing: f64,
    pub koiso_constancy: f64,
    pub model: f64,
    pub herrera: f64,
    pub semistability: f64,
    pub corpus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            clifford: 1e-12,
            curvature_identity: 1e-10,
            mutation_detect: 1e-6,
            isometry: 1e-12,
            lemma: 1e-9,
            lemma_invariance: 1e-12,
            pairing: 1e-10,
            koiso_constancy: 1e-8,
            model: 1e-9,
            herrera: 1e-8,
            semistability: 1e-10,
            corpus: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub clifford_n: Vec<usize>,
    pub clifford_r: Vec<usize>,
    pub identity_n: Vec<usize>,
    pub identity_trials: usize,
    /// Share of unprojected tensors that must be caught.
    pub mutation_fraction: f64,
    pub labels: Vec<String>,
    pub flat_n: usize,
    pub flat_r: usize,
    pub taut_n: usize,
    pub qk_m: usize,
    pub qk_sign: i32,
    pub isometry_trials: usize,
    pub lemma_trials: usize,
    pub pairing_trials: usize,
    pub koiso_trials: usize,
    pub semistability_trials: usize,
    pub corpus_n: usize,
    pub corpus_trials: usize,
    pub seed: u64,
    /// Run criteria 1–9 a second time and compare.
    pub determinism: bool,
    pub tolerances: Tolerances,
    pub output: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            clifford_n: vec![2, 4, 6, 12],
            clifford_r: vec![0, 2, 3],
            identity_n: vec![4, 5, 6],
            identity_trials: 100,
            mutation_fraction: 0.95,
            labels: vec![models::FLAT.into(), models::TAUTOLOGICAL.into(), models::QK.into()],
            flat_n: 4,
            flat_r: 3,
            taut_n: 4,
            qk_m: 3,
            qk_sign: -1,
            isometry_trials: 100,
            lemma_trials: 20,
            pairing_trials: 20,
            koiso_trials: 20,
            semistability_trials: 1000,
            corpus_n: 4,
            corpus_trials: 10,
            seed: 0,
            determinism: true,
            tolerances: Tolerances::default(),
            output: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if let Some(n) = self.clifford_n.iter().find(|&&n| n == 0 || n > 12) {
            return bad(format!("clifford_n = {n} outside 1..=12"));
        }
        if let Some(r) = self.clifford_r.iter().find(|&&r| r > 4) {
            return bad(format!("clifford_r = {r} outside 0..=4"));
        }
        if let Some(n) = self.identity_n.iter().find(|&&n| !(2..=12).contains(&n)) {
            return bad(format!("identity_n = {n} outside 2..=12"));
        }
        if !(2..=8).contains(&self.taut_n) || self.taut_n % 2 == 1 {
            return bad(format!("taut_n = {} must be even in 2..=8", self.taut_n));
        }
        if !(1..=3).contains(&self.qk_m) {
            return bad(format!("qk_m = {} outside 1..=3", self.qk_m));
        }
        if self.qk_sign != 1 && self.qk_sign != -1 {
            return bad(format!("qk_sign = {} must be ±1", self.qk_sign));
        }
        if self.flat_n == 0 || self.flat_n > 12 || self.flat_r > 4 {
            return bad(format!("flat datum n = {}, r = {} out of range", self.flat_n, self.flat_r));
        }
        if !(2..=12).contains(&self.corpus_n) {
            return bad(format!("corpus_n = {} outside 2..=12", self.corpus_n));
        }
        if !(0.0..=1.0).contains(&self.mutation_fraction) {
            return bad("mutation_fraction must lie in [0, 1]".into());
        }
        for l in &self.labels {
            if ![models::FLAT, models::TAUTOLOGICAL, models::QK].contains(&l.as_str()) {
                return bad(format!("label {l:?} is not usable in the suite"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    /// Checks (by name) that make up the criterion.
    pub checks: Vec<String>,
    pub summary: String,
    #[serde(rename = "elapsedMs")]
    pub elapsed_ms: f64,
    #[serde(rename = "runtimeLimitS")]
    pub runtime_limit_s: Option<f64>,
}

impl CriterionResult {
    pub fn within_time(&self) -> bool {
        self.runtime_limit_s.is_none_or(|s| self.elapsed_ms < s * 1000.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn criterion(&self, id: u8) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn report(&self, check: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.check == check)
    }
}

/// Turns a construction failure into a failing report instead of aborting the run.
fn guarded(check: &str, tol: f64, f: impl FnOnce() -> Result<VerificationReport>) -> VerificationReport {
    f().unwrap_or_else(|e| {
        VerificationReport::new(check, tol).input("error", e.to_string()).residual("error", f64::INFINITY).finish()
    })
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Data shared by several criteria, built once per run.
struct Data {
    flat: Result<GeometricDatum>,
    taut: Result<GeometricDatum>,
    qk: Result<GeometricDatum>,
}

impl Data {
    fn build(cfg: &SuiteConfig) -> Self {
        let taut = random_curvature(cfg.taut_n, cfg.seed)
            .and_then(|r| models::tautological_spin_n(cfg.taut_n, r, Some(cfg.seed)));
        Self {
            flat: models::flat_datum(cfg.flat_n, cfg.flat_r, cfg.seed),
            taut,
            qk: models::qk_spinor(cfg.qk_m, cfg.qk_sign),
        }
    }

    fn by_label(&self, label: &str) -> Result<&GeometricDatum> {
        let d = match label {
            models::FLAT => &self.flat,
            models::TAUTOLOGICAL => &self.taut,
            _ => &self.qk,
        };
        d.as_ref().map_err(|e| Error::Construction(e.to_string()))
    }
}

pub fn clifford_relations(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.clifford;
    let mut out = Vec::new();
    for &n in &cfg.clifford_n {
        for &r in &cfg.clifford_r {
            let name = format!("c01_clifford_relations/n{n}r{r}");
            out.push(guarded(&name, tol, || {
                let rep = build_twisted_rep(n, r, 1)?;
                Ok(VerificationReport::new(name.as_str(), tol)
                    .input("n", n)
                    .input("r", r)
                    .input("m", 1)
                    .input("dim", rep.dim())
                    .residual("anticommutator", rep.relation_residual())
                    .residual("unitarity", rep.unitarity_residual())
                    .finish())
            }));
        }
    }
    out
}

pub fn curvature_identities(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.curvature_identity;
    let mut out = Vec::new();
    for &n in &cfg.identity_n {
        let rep = match build_twisted_rep(n, 0, 1) {
            Ok(r) => r,
            Err(e) => {
                out.push(guarded(&format!("c02_curvature_identities/n{n}"), tol, || Err(e)));
                continue;
            }
        };
        let base_seed = cfg.seed.wrapping_mul(1000).wrapping_add(n as u64 * 100_000);
        let name = format!("c02_curvature_identities/n{n}");
        out.push(guarded(&name, tol, || {
            let (mut one, mut two) = (0.0_f64, 0.0_f64);
            for t in 0..cfg.identity_trials as u64 {
                let r = random_curvature(n, base_seed + t)?;
                one = one.max(verify::clifford_identity_one(&r, &rep)?);
                two = two.max(verify::clifford_identity_two(&r, &rep)?);
            }
            Ok(VerificationReport::new(name.as_str(), tol)
                .input("n", n)
                .input("trials", cfg.identity_trials)
                .input("first_seed", base_seed)
                .residual("identity_one", one)
                .residual("identity_two", two)
                .finish())
        }));

        // mutation: the same draws without the Bianchi projection
        let name = format!("c02_bianchi_mutation/n{n}");
        let detect = cfg.tolerances.mutation_detect;
        out.push(guarded(&name, 1e-12, || {
            let (mut caught, mut caught_one, mut caught_two) = (0usize, 0usize, 0usize);
            for t in 0..cfg.identity_trials as u64 {
                let r = random_curvature_unprojected(n, base_seed + t)?;
                let a = verify::clifford_identity_one(&r, &rep)? > detect;
                let b = verify::clifford_identity_two(&r, &rep)? > detect;
                caught += usize::from(a || b);
                caught_one += usize::from(a);
                caught_two += usize::from(b);
            }
            let trials = cfg.identity_trials.max(1) as f64;
            let frac = caught as f64 / trials;
            Ok(VerificationReport::new(name.as_str(), 1e-12)
                .input("n", n)
                .input("trials", cfg.identity_trials)
                .input("detect_threshold", detect)
                .input("required_fraction", cfg.mutation_fraction)
                .residual("shortfall", (cfg.mutation_fraction - frac).max(0.0))
                .value("caught_fraction", frac)
                .value("caught_fraction_identity_one", caught_one as f64 / trials)
                .value("caught_fraction_identity_two", caught_two as f64 / trials)
                .finish())
        }));
    }
    out
}

fn phi_isometry(cfg: &SuiteConfig, data: &Data) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.isometry;
    cfg.labels
        .iter()
        .map(|label| {
            let name = format!("c03_phi_isometry/{label}");
            guarded(&name, tol, || {
                let d = data.by_label(label)?;
                let mut g = rng(cfg.seed, 3);
                let mut worst = 0.0_f64;
                for _ in 0..cfg.isometry_trials {
                    let h = SymTensor2::random(d.n(), &mut g);
                    let phi = phi_map(&d.rep, &d.psi, h.matrix())?;
                    worst = worst.max((phi.norm_sq() - h.norm_sq()).abs() / h.norm_sq());
                }
                Ok(VerificationReport::new(name.as_str(), tol)
                    .datum(d)
                    .input("trials", cfg.isometry_trials)
                    .residual("relative_norm_defect", worst)
                    .finish())
            })
        })
        .collect()
}

fn lemma31(cfg: &SuiteConfig, data: &Data) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.lemma;
    let mut out = Vec::new();
    for label in &cfg.labels {
        let name = format!("c04_lemma31/{label}");
        let inv_name = format!("c04_lemma31_symmetric_part_invariance/{label}");
        let mut sensitivity = Err(Error::Construction("not computed".into()));
        out.push(guarded(&name, tol, || {
            let d = data.by_label(label)?;
            let mut g = rng(cfg.seed, 4);
            let (mut worst, mut sens) = (0.0_f64, 0.0_f64);
            for t in 0..cfg.lemma_trials as u64 {
                let h = SymTensor2::random(d.n(), &mut g);
                let s1 = cfg.seed.wrapping_mul(7919).wrapping_add(2 * t);
                let t1 = verify::ricci_identity_symbol(&d.curvature, &h, s1)?;
                let t2 = verify::ricci_identity_symbol(&d.curvature, &h, s1 + 1)?;
                let a = verify::lemma31_check(d, &h, &t1, tol)?.residuals["relative"];
                let b = verify::lemma31_check(d, &h, &t2, tol)?.residuals["relative"];
                worst = worst.max(a).max(b);
                sens = sens.max((a - b).abs());
            }
            sensitivity = Ok((d.clone(), sens));
            Ok(VerificationReport::new(name.as_str(), tol)
                .datum(d)
                .input("trials", cfg.lemma_trials)
                .residual("relative", worst)
                .finish())
        }));
        let itol = cfg.tolerances.lemma_invariance;
        out.push(guarded(&inv_name, itol, || {
            let (d, sens) = sensitivity?;
            Ok(VerificationReport::new(inv_name.as_str(), itol)
                .datum(&d)
                .input("trials", cfg.lemma_trials)
                .residual("residual_change", sens)
                .finish())
        }));
    }
    out
}

fn pairing(cfg: &SuiteConfig, data: &Data) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.pairing;
    [models::TAUTOLOGICAL, models::QK]
        .iter()
        .map(|label| {
            let name = format!("c05_curvature_term_pairing/{label}");
            guarded(&name, tol, || {
                let d = data.by_label(label)?;
                let mut g = rng(cfg.seed, 5);
                let mut worst = 0.0_f64;
                let mut scale = 0.0_f64;
                for _ in 0..cfg.pairing_trials {
                    let h = SymTensor2::random(d.n(), &mut g);
                    let rep = verify::curvature_term_pairing_check(d, &h, tol)?;
                    worst = worst.max(rep.residuals["difference"]);
                    scale = scale.max(rep.values.get("matrix").copied().unwrap_or(0.0).abs());
                }
                Ok(VerificationReport::new(name.as_str(), tol)
                    .datum(d)
                    .input("trials", cfg.pairing_trials)
                    .residual("difference", worst)
                    .value("largest_matrix_side", scale)
                    .finish())
            })
        })
        .collect()
}

fn koiso(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.koiso_constancy;
    let name = format!("c06_koiso_reduction/n{}", cfg.taut_n);
    vec![guarded(&name, tol, || {
        let n = cfg.taut_n;
        let mut g = rng(cfg.seed, 6);
        let mut ratios = Vec::new();
        for t in 0..cfg.koiso_trials as u64 {
            let seed = cfg.seed.wrapping_mul(31).wrapping_add(1000 + t);
            let d = models::tautological_spin_n(n, random_curvature(n, seed)?, Some(seed))?;
            let h = SymTensor2::random(n, &mut g);
            let rep = verify::koiso_reduction_check(&d, &h, tol)?;
            if let Some(&q) = rep.values.get("ratio") {
                ratios.push(q);
            }
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| (a.min(q), b.max(q)));
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        Ok(VerificationReport::new(name.as_str(), tol)
            .input("n", n)
            .input("trials", cfg.koiso_trials)
            .residual("ratio_spread", if ratios.is_empty() { 0.0 } else { hi - lo })
            .value("ratio", mean)
            .value("ratio_minus_one", mean - 1.0)
            .finish())
    })]
}

fn qk_chain(cfg: &SuiteConfig, data: &Data) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.model;
    let prefix = "c07_qk";
    let fail = |what: &str, t: f64, e: &Error| {
        guarded(&format!("{prefix}_{what}"), t, || Err(Error::Construction(e.to_string())))
    };
    let d = match &data.qk {
        Ok(d) => d,
        Err(e) => {
            return vec![
                fail("twisted_pure", tol, e),
                fail("herrera_ratio", cfg.tolerances.herrera, e),
                fail("norm_formula", tol, e),
                fail("eh_ricci_identity", tol, e),
            ]
        }
    };
    let rename = |mut r: VerificationReport, what: &str| {
        r.check = format!("{prefix}_{what}");
        r
    };
    vec![
        guarded(&format!("{prefix}_twisted_pure"), tol, || {
            // purity is a property of the η-normalised ψ′, not of the unit spinor
            let pp = d.psi_prime.as_ref().ok_or_else(|| Error::InvalidArgument("datum carries no ψ′".into()))?;
            Ok(rename(twisted_pure_check(&d.rep, pp, tol)?.datum(d), "twisted_pure"))
        }),
        guarded(&format!("{prefix}_herrera_ratio"), cfg.tolerances.herrera, || {
            Ok(rename(verify::herrera_ratio_check(d, cfg.tolerances.herrera)?, "herrera_ratio"))
        }),
        guarded(&format!("{prefix}_norm_formula"), tol, || Ok(rename(verify::norm_formula_check(d, tol)?, "norm_formula"))),
        guarded(&format!("{prefix}_eh_ricci_identity"), tol, || {
            Ok(rename(eh_ricci_identity_check(d, tol)?.datum(d), "eh_ricci_identity"))
        }),
    ]
}

fn semistability(cfg: &SuiteConfig, data: &Data) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.semistability;
    let mut out = Vec::new();
    for (label, d) in [(models::QK, &data.qk), (models::FLAT, &data.flat)] {
        let name = format!("c08_semistability/{label}");
        out.push(guarded(&name, tol, || {
            let d = d.as_ref().map_err(|e| Error::Construction(e.to_string()))?;
            let mut r = verify::semistability_pointwise_check(d, cfg.semistability_trials, cfg.seed, tol)?;
            r.check = name.clone();
            Ok(r)
        }));
    }
    out
}

fn entry_dense(v: &expr::Value, multi: &[usize]) -> Result<DMatrix<C64>> {
    if v.kind != expr::Kind::Operator {
        return Err(Error::InvalidArgument(format!("expected an operator value, got {:?}", v.kind)));
    }
    Ok(v.operator(multi))
}

fn expression_corpus(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let tol = cfg.tolerances.corpus;
    let n = cfg.corpus_n;
    let specs = corpus::builtin();
    let mut out = Vec::new();

    let name = "c09_corpus_roundtrip";
    out.push(guarded(name, tol, || {
        let mut mismatches = 0usize;
        for s in &specs {
            for text in [&s.lhs, &s.rhs] {
                let e = parse(text)?;
                if parse(&e.to_string())? != e {
                    mismatches += 1;
                }
            }
        }
        Ok(VerificationReport::new(name, tol)
            .input("expressions", 2 * specs.len())
            .residual("mismatches", mismatches as f64)
            .finish())
    }));

    for s in &specs {
        let name = format!("c09_corpus/{}", s.name);
        out.push(guarded(&name, s.tol, || {
            let rep = build_twisted_rep(n, 0, 1)?;
            let (lhs, rhs) = (parse(&s.lhs)?, parse(&s.rhs)?);
            let mut worst = 0.0_f64;
            for t in 0..cfg.corpus_trials as u64 {
                let mut env = Environment::new(n);
                env.bind_rep(&rep)?;
                env.bind_curvature(&random_curvature(n, cfg.seed.wrapping_add(500 + t))?)?;
                let r = expr::check_identity(&s.name, &lhs, &rhs, &env, s.tol)?;
                worst = worst.max(r.residuals["scaled_difference"]);
            }
            Ok(VerificationReport::new(name.as_str(), s.tol)
                .input("lhs", s.lhs.as_str())
                .input("rhs", s.rhs.as_str())
                .input("n", n)
                .input("trials", cfg.corpus_trials)
                .residual("scaled_difference", worst)
                .finish())
        }));
    }

    // the string forms against the hand-coded assembly
    let name = "c09_corpus_matches_module";
    out.push(guarded(name, tol, || {
        let rep = build_twisted_rep(n, 0, 1)?;
        let one = (parse("R[l,k,i,p] e[k] e[l] e[i]")?, parse("2 Ric[p,l] e[l]")?);
        let two = (
            parse("R[l,k,j,p] e[k] e[l] e[i]")?,
            parse("-R[j,p,k,l] e[i] e[k] e[l] - 4 R[j,p,i,k] e[k]")?,
        );
        let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
        let track = |worst: &mut f64, scale: &mut f64, a: &DMatrix<C64>, b: &DMatrix<C64>| {
            *worst = worst.max((a - b).iter().fold(0.0, |m, z| m.max(z.norm())));
            *scale = scale.max(b.iter().fold(0.0, |m, z| m.max(z.norm())));
        };
        for t in 0..cfg.corpus_trials as u64 {
            let r = random_curvature(n, cfg.seed.wrapping_add(500 + t))?;
            let mut env = Environment::new(n);
            env.bind_rep(&rep)?;
            env.bind_curvature(&r)?;
            let sides = verify::identity_one_sides(&r, &rep)?;
            let (l1, r1) = (evaluate(&one.0, &env)?, evaluate(&one.1, &env)?);
            for (p, (l, rr)) in sides.iter().enumerate() {
                track(&mut worst, &mut scale, &entry_dense(&l1, &[p])?, l);
                track(&mut worst, &mut scale, &entry_dense(&r1, &[p])?, rr);
            }
            let sides = verify::identity_two_sides(&r, &rep)?;
            let (l2, r2) = (evaluate(&two.0, &env)?, evaluate(&two.1, &env)?);
            for i in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        let (l, rr) = &sides[(i * n + j) * n + p];
                        track(&mut worst, &mut scale, &entry_dense(&l2, &[i, j, p])?, l);
                        track(&mut worst, &mut scale, &entry_dense(&r2, &[i, j, p])?, rr);
                    }
                }
            }
            let ric = evaluate(&parse("R[i,k,k,j]")?, &env)?;
            let rc = r.ricci();
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((ric.real(&[i, j]) - rc.get(i, j)).abs());
                }
            }
            let scal = evaluate(&parse("R[i,k,k,i]")?, &env)?.as_scalar().unwrap_or(f64::NAN);
            worst = worst.max((scal - r.scal()).abs());
            scale = scale.max(r.scal().abs());
        }
        Ok(VerificationReport::new(name, tol)
            .input("n", n)
            .input("trials", cfg.corpus_trials)
            .residual("relative_disagreement", worst / (1.0 + scale))
            .finish())
    }));
    out
}

const TITLES: [&str; 10] = [
    "Clifford relations",
    "curvature identities and Bianchi mutation",
    "Phi isometry",
    "Bochner-type identity",
    "curvature-term pairing",
    "Koiso reduction",
    "quaternion-Kaehler chain",
    "pointwise semi-stability bound",
    "expression engine corpus",
    "determinism",
];

const LIMITS: [Option<f64>; 10] = [Some(10.0), Some(60.0), None, Some(300.0), None, None, Some(120.0), None, None, None];

fn criterion(id: u8, reports: &[VerificationReport], elapsed_ms: f64) -> CriterionResult {
    let failing: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    let summary = if failing.is_empty() {
        format!("{} checks pass", reports.len())
    } else {
        format!("{} of {} checks fail: {}", failing.len(), reports.len(), failing.join(", "))
    };
    CriterionResult {
        id,
        title: TITLES[id as usize - 1].into(),
        pass: failing.is_empty() && !reports.is_empty(),
        checks: reports.iter().map(|r| r.check.clone()).collect(),
        summary,
        elapsed_ms,
        runtime_limit_s: LIMITS[id as usize - 1],
    }
}

fn timed(f: impl FnOnce() -> Vec<VerificationReport>) -> (Vec<VerificationReport>, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64() * 1e3)
}

fn run_once(cfg: &SuiteConfig) -> SuiteOutcome {
    let mut reports = Vec::new();
    let mut criteria = Vec::new();
    let mut push = |id: u8, (r, ms): (Vec<VerificationReport>, f64)| {
        criteria.push(criterion(id, &r, ms));
        reports.extend(r);
    };
    push(1, timed(|| clifford_relations(cfg)));
    push(2, timed(|| curvature_identities(cfg)));
    let t = Instant::now();
    let data = Data::build(cfg);
    let build_ms = t.elapsed().as_secs_f64() * 1e3;
    push(3, timed(|| phi_isometry(cfg, &data)));
    // the model builds count toward the criteria that need them
    let (r, ms) = timed(|| lemma31(cfg, &data));
    push(4, (r, ms + build_ms));
    push(5, timed(|| pairing(cfg, &data)));
    push(6, timed(|| koiso(cfg)));
    let (r, ms) = timed(|| qk_chain(cfg, &data));
    push(7, (r, ms + build_ms));
    push(8, timed(|| semistability(cfg, &data)));
    push(9, timed(|| expression_corpus(cfg)));
    reports.sort_by(|a, b| a.check.cmp(&b.check));
    SuiteOutcome { reports, criteria }
}

fn stripped(reports: &[VerificationReport]) -> Result<String> {
    let v: Vec<VerificationReport> = reports.iter().map(VerificationReport::without_timing).collect();
    Ok(serde_json::to_string(&v)?)
}

/// Runs the battery. With `determinism` set, criteria 1–9 run twice and the
/// timing-free reports are compared byte for byte.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut outcome = run_once(cfg);
    if cfg.determinism {
        let t = Instant::now();
        let again = run_once(cfg);
        let (a, b) = (stripped(&outcome.reports)?, stripped(&again.reports)?);
        let differing = outcome
            .reports
            .iter()
            .zip(&again.reports)
            .filter(|(x, y)| x.without_timing() != y.without_timing())
            .count()
            + outcome.reports.len().abs_diff(again.reports.len());
        let report = VerificationReport::new("c10_determinism", 0.5)
            .input("reports", outcome.reports.len())
            .residual("differing_reports", differing as f64)
            .value("identical_json", f64::from(u8::from(a == b)))
            .finish();
        let ms = t.elapsed().as_secs_f64() * 1e3;
        outcome.criteria.push(criterion(10, std::slice::from_ref(&report), ms));
        outcome.reports.push(report);
        outcome.reports.sort_by(|a, b| a.check.cmp(&b.check));
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            clifford_n: vec![2, 4],
            clifford_r: vec![0, 2],
            identity_n: vec![4],
            identity_trials: 5,
            qk_m: 1,
            isometry_trials: 5,
            lemma_trials: 2,
            pairing_trials: 2,
            koiso_trials: 3,
            semistability_trials: 20,
            corpus_trials: 2,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn config_json_defaults_and_validation() {
        let cfg = SuiteConfig::from_json("{}").unwrap();
        assert_eq!(cfg, SuiteConfig::default());
        let cfg = SuiteConfig::from_json(r#"{"seed": 5, "tolerances": {"lemma": 1e-8}}"#).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.tolerances.lemma, 1e-8);
        assert_eq!(cfg.tolerances.pairing, 1e-10);
        assert!(SuiteConfig::from_json(r#"{"clifford_n": [14]}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"taut_n": 10}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"taut_n": 5}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"labels": ["kaehler-flat"]}"#).is_err());
    }

    #[test]
    fn small_suite_is_sorted_and_deterministic() {
        let out = run_suite(&small()).unwrap();
        let names: Vec<&str> = out.reports.iter().map(|r| r.check.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(out.criteria.len(), 10);
        assert!(out.report("c10_determinism").unwrap().pass);
        for id in [1, 2, 3, 4, 5, 6, 8, 9] {
            assert!(out.criterion(id).unwrap().pass, "{:?}", out.criterion(id));
        }
    }

    #[test]
    fn construction_failure_becomes_failing_report() {
        let r = guarded("x", 1e-9, || Err(Error::Construction("boom".into())));
        assert!(!r.pass);
        assert_eq!(r.inputs["error"], "model construction failed: boom");
    }
}
