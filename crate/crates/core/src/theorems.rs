//! Functionals assembled from pointwise integrands, and the verification
//! checks built on them.
//!
//! A [`FieldSurvey`] evaluates the shape data of a field once per quadrature
//! node and keeps the per-node quantities, so the volume, energy, σ-integrals
//! and pushforward volumes at several `t` all share one pass over the nodes.

use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::domain::{complement_torus, map_boundary, map_region, solid_torus, QuadratureEcho, Region, SamplingKind, Weighted};
use crate::error::{LabError, Result};
use crate::field::{hopf, FieldDefinition};
use crate::identities::{check_trace_free_identities, Relation as IdRelation};
use crate::quadrature::{map_indices, QuadratureSpec};
use crate::report::{Conclusion, FunctionalName, FunctionalResult, Relation, Status, VerificationReport};
use crate::shape::{shape_data, VolumeForm};
use crate::sphere::SphereDim;

/// Absolute tolerance on integrals normalized by vol(K).
pub const DEFAULT_TOLERANCE: f64 = 1e-7;
/// Max-norm tolerance for "coincides with the Hopf field on ∂K".
pub const BOUNDARY_HOPF_TOL: f64 = 1e-9;
/// Monte Carlo conclusions allow this many standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Relative floor added to Monte Carlo slack for rounding in runs whose
/// integrand is constant (zero variance).
pub const MC_ROUNDING_FLOOR: f64 = 1e-12;
pub const DEFAULT_T_VALUES: [f64; 3] = [0.1, 0.25, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckConfig {
    pub tolerance: f64,
    pub boundary_tolerance: f64,
    pub volume_form: VolumeForm,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tolerance: DEFAULT_TOLERANCE,
            boundary_tolerance: BOUNDARY_HOPF_TOL,
            volume_form: VolumeForm::FullGram,
        }
    }
}

/// Per-node quantities kept by a survey.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeQuantities {
    sigma: [f64; 6],
    len: usize,
    pub volume_full: f64,
    pub volume_h_block: f64,
    pub energy: f64,
}

impl NodeQuantities {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma[..self.len]
    }

    pub fn volume(&self, form: VolumeForm) -> f64 {
        match form {
            VolumeForm::FullGram => self.volume_full,
            VolumeForm::HBlock => self.volume_h_block,
        }
    }

    pub fn milnor_jacobian(&self, t: f64) -> f64 {
        let mut poly = 1.0;
        let mut tp = 1.0;
        for s in self.sigma() {
            tp *= t;
            poly += s * tp;
        }
        (1.0 + t * t).sqrt() * poly
    }
}

/// Shape quantities of one field at every node of one region.
#[derive(Debug, Clone)]
pub struct FieldSurvey {
    field_label: String,
    region_label: String,
    dim: SphereDim,
    echo: QuadratureEcho,
    samples: Weighted<NodeQuantities>,
}

/// Pushforward volume at one `t`, with the diffeomorphism proxy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pushforward {
    pub result: FunctionalResult,
    pub min_jacobian: f64,
    /// det(dφ_t) > 0 at every node.
    pub diffeomorphic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvpOutcome {
    pub t: f64,
    /// [vol(φ_t K)/vol(S(√(1+t²)))] ÷ [vol(K)/vol(S)].
    pub ratio: f64,
    /// vol(φ_t K) − vol(K)(1+t²)^{(2k+1)/2}; nonnegative exactly when ratio ≥ 1.
    pub equivalent_margin: f64,
    pub pushforward: Pushforward,
    pub domain_volume: f64,
}

impl PvpOutcome {
    pub fn holds(&self, tol: f64) -> bool {
        self.ratio >= 1.0 - tol
    }
}

impl FieldSurvey {
    pub fn new(f: &FieldDefinition, region: &Region, q: &QuadratureSpec) -> Result<Self> {
        if f.dim() != region.dim() {
            return Err(LabError::InvalidParameter(format!(
                "field '{}' is on S^{} but domain '{}' is in S^{}",
                f.label(),
                f.dim().intrinsic(),
                region.label(),
                region.dim().intrinsic()
            )));
        }
        let echo = region.echo(q)?;
        let samples = map_region(region, q, |p| {
            let sd = shape_data(f, p)?;
            let mut sigma = [0.0; 6];
            sigma[..sd.sigma.len()].copy_from_slice(sd.sigma.as_slice());
            Ok(NodeQuantities {
                sigma,
                len: sd.sigma.len(),
                volume_full: sd.volume_integrand(VolumeForm::FullGram),
                volume_h_block: sd.volume_integrand(VolumeForm::HBlock),
                energy: sd.energy_integrand(),
            })
        })?;
        Ok(FieldSurvey {
            field_label: f.label().to_string(),
            region_label: region.label(),
            dim: f.dim(),
            echo,
            samples,
        })
    }

    pub fn dim(&self) -> SphereDim {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.samples.len()
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self.samples.kind, SamplingKind::MonteCarlo { .. })
    }

    fn result(&self, name: FunctionalName, value: f64, std_error: Option<f64>, t: Option<f64>) -> FunctionalResult {
        FunctionalResult {
            name,
            value,
            std_error,
            t,
            domain_label: self.region_label.clone(),
            field_label: self.field_label.clone(),
            quadrature: self.echo.clone(),
        }
    }

    fn integral<G: Fn(&NodeQuantities) -> f64>(&self, name: FunctionalName, g: G) -> FunctionalResult {
        let e = self.samples.integrate(g);
        self.result(name, e.value, e.std_error, None)
    }

    /// vol(K) under the same quadrature.
    pub fn domain_volume(&self) -> FunctionalResult {
        match self.samples.kind {
            SamplingKind::MonteCarlo { volume } => self.result(FunctionalName::DomainVolume, volume, Some(0.0), None),
            SamplingKind::Tensor => self.integral(FunctionalName::DomainVolume, |_| 1.0),
        }
    }

    pub fn volume(&self, form: VolumeForm) -> FunctionalResult {
        self.integral(FunctionalName::Volume, |n| n.volume(form))
    }

    /// (2k+1)/2·vol(K) + ½∫‖∇v‖².
    pub fn energy(&self) -> FunctionalResult {
        let dirichlet = self.samples.integrate(|n| n.energy);
        let offset = 0.5 * self.dim.intrinsic() as f64 * self.domain_volume().value;
        self.result(
            FunctionalName::Energy,
            offset + 0.5 * dirichlet.value,
            dirichlet.std_error.map(|s| 0.5 * s),
            None,
        )
    }

    /// ∫ σ_i for i = 1..2k.
    pub fn sigma_integral(&self, i: usize) -> FunctionalResult {
        let name = match i {
            1 => FunctionalName::Sigma1Integral,
            2 => FunctionalName::Sigma2Integral,
            _ => FunctionalName::Sigma2Integral,
        };
        self.integral(name, |n| n.sigma()[i - 1])
    }

    pub fn max_abs_sigma1(&self) -> f64 {
        self.samples.max_abs(|n| n.sigma()[0])
    }

    /// ∫_K √(1+t²)(1 + Σσ_i tⁱ), with the minimum Jacobian over the nodes.
    pub fn pushforward(&self, t: f64) -> Pushforward {
        let e = self.samples.integrate(|n| n.milnor_jacobian(t));
        let min_jacobian = self.samples.min(|n| n.milnor_jacobian(t));
        Pushforward {
            result: self.result(FunctionalName::PushforwardVolume, e.value, e.std_error, Some(t)),
            min_jacobian,
            diffeomorphic: min_jacobian > 0.0,
        }
    }

    pub fn pvp(&self, t: f64) -> PvpOutcome {
        let pushforward = self.pushforward(t);
        let vol = self.domain_volume().value;
        let scale = (1.0 + t * t).powf(0.5 * self.dim.intrinsic() as f64);
        let pf = pushforward.result.value;
        PvpOutcome {
            t,
            ratio: pf / (vol * scale),
            equivalent_margin: pf - vol * scale,
            pushforward,
            domain_volume: vol,
        }
    }
}

pub fn volume_of_field(f: &FieldDefinition, region: &Region, q: &QuadratureSpec, form: VolumeForm) -> Result<FunctionalResult> {
    Ok(FieldSurvey::new(f, region, q)?.volume(form))
}

pub fn energy_of_field(f: &FieldDefinition, region: &Region, q: &QuadratureSpec) -> Result<FunctionalResult> {
    Ok(FieldSurvey::new(f, region, q)?.energy())
}

pub fn pushforward_volume(f: &FieldDefinition, region: &Region, q: &QuadratureSpec, t: f64) -> Result<Pushforward> {
    check_t(t)?;
    Ok(FieldSurvey::new(f, region, q)?.pushforward(t))
}

pub fn pvp_ratio(f: &FieldDefinition, region: &Region, q: &QuadratureSpec, t: f64) -> Result<PvpOutcome> {
    check_t(t)?;
    Ok(FieldSurvey::new(f, region, q)?.pvp(t))
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("t must be finite and >= 0, got {t}")))
    }
}

/// ∫_{∂K} ⟨v, η⟩ summed over all boundary faces; zero for regions without
/// boundary.
pub fn flux(f: &FieldDefinition, region: &Region, q: &QuadratureSpec) -> Result<FunctionalResult> {
    let mut total = 0.0;
    for b in region.boundary() {
        let w = map_boundary(&b, q, |p, eta| Ok(f.evaluate(p)?.dot(eta)))?;
        total += w.integrate(|v| *v).value;
    }
    Ok(FunctionalResult {
        name: FunctionalName::Flux,
        value: total,
        std_error: None,
        t: None,
        domain_label: region.label(),
        field_label: f.label().to_string(),
        quadrature: region.echo(q)?,
    })
}

/// max over boundary nodes of ‖v − H‖∞; zero for regions without boundary.
pub fn boundary_hopf_deviation(f: &FieldDefinition, region: &Region, q: &QuadratureSpec) -> Result<f64> {
    let h = hopf(f.dim());
    let mut worst = 0.0f64;
    for b in region.boundary() {
        let w = map_boundary(&b, q, |p, _| Ok((f.evaluate(p)?.vec() - h.evaluate(p)?.vec()).amax()))?;
        worst = worst.max(w.max_abs(|v| *v));
    }
    Ok(worst)
}

/// Allowed slack for a conclusion about an integral over a region of
/// volume `vol`, given the standard errors of the quantities compared.
fn slack(cfg: &CheckConfig, vol: f64, std_errors: &[Option<f64>]) -> f64 {
    let mc: Vec<f64> = std_errors.iter().flatten().copied().collect();
    if mc.is_empty() {
        cfg.tolerance * vol
    } else {
        let se = mc.iter().map(|s| s * s).sum::<f64>().sqrt();
        MC_SIGMAS * se + MC_ROUNDING_FLOOR * vol
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// Hypotheses: zero boundary flux, the proportional volume property and a
/// positive Milnor Jacobian at every `t`. Conclusions: vol(v) ≥ 2vol(K) and
/// E(v) ≥ (5/2)vol(K), plus the intermediate ∫σ₁ = 0 and ∫σ₂ ≥ vol(K).
pub fn check_theorem_1_4(
    f: &FieldDefinition,
    region: &Region,
    q: &QuadratureSpec,
    t_values: &[f64],
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    if f.dim().k() != 1 {
        return Err(LabError::InvalidParameter("theorem 1.4 check applies to S^3 only".into()));
    }
    if t_values.is_empty() || t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(LabError::InvalidParameter("theorem 1.4 needs a nonempty list of t > 0".into()));
    }
    let survey = FieldSurvey::new(f, region, q)?;
    let dom = survey.domain_volume();
    let vol = dom.value;
    let fl = flux(f, region, q)?;
    let s1 = survey.sigma_integral(1);
    let s2 = survey.sigma_integral(2);
    let volume = survey.volume(cfg.volume_form);
    let energy = survey.energy();

    let mut r = VerificationReport::new("thm1.4", f.label(), &region.label(), t_values.to_vec());
    let normalized_flux = fl.value / vol;
    r.hypothesis(
        "boundary flux of v through the conormal vanishes (normalized by vol K)",
        normalized_flux,
        cfg.tolerance,
        normalized_flux.abs() <= cfg.tolerance,
    );
    let mut implied_slack = f64::INFINITY;
    for &t in t_values {
        let pvp = survey.pvp(t);
        r.hypothesis(
            format!("det(d phi_t) > 0 at every node, t = {t}"),
            pvp.pushforward.min_jacobian,
            0.0,
            pvp.pushforward.diffeomorphic,
        );
        r.hypothesis(
            format!("proportional volume ratio >= 1, t = {t}"),
            pvp.ratio,
            cfg.tolerance,
            pvp.holds(cfg.tolerance),
        );
        if (pvp.ratio >= 1.0) != (pvp.equivalent_margin >= 0.0) {
            r.notes.push(format!("ratio and equivalent form disagree at t = {t}"));
        }
        // ratio ≥ 1 − ε with ∫σ₁ ≈ 0 gives ∫σ₂ ≥ vol − ε(1+t²)^{3/2}vol/t² − |∫σ₁|/t
        let s = cfg.tolerance * (1.0 + t * t).powf(1.5) * vol / (t * t) + s1.value.abs() / t;
        implied_slack = implied_slack.min(s);
        r.records.push(pvp.pushforward.result);
    }

    let sl = slack(cfg, vol, &[]);
    r.conclusions.push(Conclusion::new("volume", "vol(v) >= vol(H) = 2 vol(K)", volume.value, Relation::GreaterEqual, 2.0 * vol, sl));
    r.conclusions.push(Conclusion::new("energy", "E(v) >= E(H) = (5/2) vol(K)", energy.value, Relation::GreaterEqual, 2.5 * vol, sl));
    r.conclusions.push(Conclusion::new("sigma1", "integral of sigma_1 over K = 0", s1.value, Relation::Equal, 0.0, sl));
    r.conclusions.push(Conclusion::new("divergence", "integral of sigma_1 = boundary flux", s1.value, Relation::Equal, fl.value, sl));
    r.conclusions.push(Conclusion::new("sigma2", "integral of sigma_2 >= vol(K)", s2.value, Relation::GreaterEqual, vol, implied_slack));
    if f.is_hopf() {
        r.conclusions.push(Conclusion::new("hopf_volume", "vol(H) = 2 vol(K)", volume.value, Relation::Equal, 2.0 * vol, sl));
        r.conclusions.push(Conclusion::new("hopf_energy", "E(H) = (5/2) vol(K)", energy.value, Relation::Equal, 2.5 * vol, sl));
    }
    r.records.extend([dom, fl, s1, s2, volume, energy]);
    Ok(r.finalize())
}

/// Hypotheses: σ₁ = 0 at every node and v = H on ∂K. Conclusions:
/// E(v) ≥ ((2k+1)/2 + k)vol(K) and ∫σ₂ = k·vol(K).
pub fn check_theorem_1_6(f: &FieldDefinition, region: &Region, q: &QuadratureSpec, cfg: &CheckConfig) -> Result<VerificationReport> {
    let k = f.dim().k() as f64;
    let survey = FieldSurvey::new(f, region, q)?;
    let dom = survey.domain_volume();
    let vol = dom.value;
    let energy = survey.energy();
    let s2 = survey.sigma_integral(2);
    let mut r = VerificationReport::new("thm1.6", f.label(), &region.label(), Vec::new());
    let max_s1 = survey.max_abs_sigma1();
    r.hypothesis("solenoidal: max |sigma_1| over nodes", max_s1, cfg.tolerance, max_s1 <= cfg.tolerance);
    let dev = boundary_hopf_deviation(f, region, q)?;
    r.hypothesis("v coincides with H on the boundary (max norm)", dev, cfg.boundary_tolerance, dev <= cfg.boundary_tolerance);
    if region.boundary().is_empty() {
        r.notes.push("region has no boundary; boundary condition is vacuous".into());
    }
    let bound = (0.5 * (2.0 * k + 1.0) + k) * vol;
    r.conclusions.push(Conclusion::new(
        "energy",
        "E(v) >= ((2k+1)/2 + k) vol(K)",
        energy.value,
        Relation::GreaterEqual,
        bound,
        slack(cfg, vol, &[energy.std_error]),
    ));
    r.conclusions.push(Conclusion::new(
        "sigma2",
        "integral of sigma_2 = k vol(K)",
        s2.value,
        Relation::Equal,
        k * vol,
        slack(cfg, vol, &[s2.std_error]),
    ));
    if f.is_hopf() {
        r.conclusions.push(Conclusion::new(
            "hopf_energy",
            "E(H) = ((2k+1)/2 + k) vol(K)",
            energy.value,
            Relation::Equal,
            bound,
            slack(cfg, vol, &[energy.std_error]),
        ));
    }
    r.records.extend([dom, energy, s2]);
    Ok(r.finalize())
}

/// Hypothesis: v = H on ∂K. Conclusions: vol(v) ≥ 4^k/C(2k,k)·vol(K) and
/// E(v) ≥ ((2k+1)/2 + k/(2k−1))·vol(K).
pub fn check_theorem_1_3(f: &FieldDefinition, region: &Region, q: &QuadratureSpec, cfg: &CheckConfig) -> Result<VerificationReport> {
    let ku = f.dim().k();
    let k = ku as f64;
    let survey = FieldSurvey::new(f, region, q)?;
    let dom = survey.domain_volume();
    let vol = dom.value;
    let volume = survey.volume(cfg.volume_form);
    let energy = survey.energy();
    let mut r = VerificationReport::new("thm1.3", f.label(), &region.label(), Vec::new());
    let dev = boundary_hopf_deviation(f, region, q)?;
    r.hypothesis("v coincides with H on the boundary (max norm)", dev, cfg.boundary_tolerance, dev <= cfg.boundary_tolerance);
    let vol_coef = 4f64.powi(ku as i32) / binomial(2 * ku, ku);
    let energy_coef = 0.5 * (2.0 * k + 1.0) + k / (2.0 * k - 1.0);
    let sv = slack(cfg, vol, &[volume.std_error]);
    let se = slack(cfg, vol, &[energy.std_error]);
    r.conclusions.push(Conclusion::new("volume", "vol(v) >= 4^k / C(2k,k) vol(K)", volume.value, Relation::GreaterEqual, vol_coef * vol, sv));
    r.conclusions.push(Conclusion::new("energy", "E(v) >= ((2k+1)/2 + k/(2k-1)) vol(K)", energy.value, Relation::GreaterEqual, energy_coef * vol, se));
    if f.is_hopf() && cfg.volume_form == VolumeForm::FullGram {
        r.conclusions.push(Conclusion::new("hopf_volume", "vol(H) = 2^k vol(K)", volume.value, Relation::Equal, 2f64.powi(ku as i32) * vol, sv));
        r.conclusions.push(Conclusion::new("hopf_energy", "E(H) = ((2k+1)/2 + k) vol(K)", energy.value, Relation::Equal, (0.5 * (2.0 * k + 1.0) + k) * vol, se));
    }
    r.records.extend([dom, volume, energy]);
    Ok(r.finalize())
}

/// PVP ratios of K = solid_torus(delta_max) and its complement at `t`;
/// asserts that at least one side has the property.
pub fn check_dichotomy(f: &FieldDefinition, delta_max: f64, q: &QuadratureSpec, t: f64, cfg: &CheckConfig) -> Result<VerificationReport> {
    if f.dim().k() != 1 {
        return Err(LabError::InvalidParameter("dichotomy check applies to S^3 only".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(LabError::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let k_region = Region::Chart(solid_torus(delta_max)?);
    let c_region = Region::Chart(complement_torus(delta_max)?);
    let sk = FieldSurvey::new(f, &k_region, q)?;
    let sc = FieldSurvey::new(f, &c_region, q)?;
    let (pk, pc) = (sk.pvp(t), sc.pvp(t));
    let mut r = VerificationReport::new("dichotomy", f.label(), &k_region.label(), vec![t]);
    r.hypothesis("det(d phi_t) > 0 on K", pk.pushforward.min_jacobian, 0.0, pk.pushforward.diffeomorphic);
    r.hypothesis("det(d phi_t) > 0 on K^c", pc.pushforward.min_jacobian, 0.0, pc.pushforward.diffeomorphic);
    let s3 = SphereDim::three().unit_volume();
    let tol = cfg.tolerance;
    r.conclusions.push(Conclusion::new("either_side", "max(ratio K, ratio K^c) >= 1", pk.ratio.max(pc.ratio), Relation::GreaterEqual, 1.0, tol));
    r.conclusions.push(Conclusion::new(
        "partition",
        "ratio_K vol(K) + ratio_Kc vol(K^c) = vol(S^3)",
        pk.ratio * pk.domain_volume + pc.ratio * pc.domain_volume,
        Relation::Equal,
        s3,
        tol * s3,
    ));
    if f.is_hopf() {
        r.conclusions.push(Conclusion::new("hopf_ratio_k", "ratio K = 1", pk.ratio, Relation::Equal, 1.0, tol));
        r.conclusions.push(Conclusion::new("hopf_ratio_kc", "ratio K^c = 1", pc.ratio, Relation::Equal, 1.0, tol));
    }
    r.notes.push(format!("ratio K = {}, ratio K^c = {}", pk.ratio, pc.ratio));
    r.notes.push(match (pk.holds(tol), pc.holds(tol)) {
        (true, true) => "both K and K^c have the proportional volume property".into(),
        (true, false) => "K has the proportional volume property".into(),
        (false, true) => "K^c has the proportional volume property".into(),
        (false, false) => "neither side has the proportional volume property".into(),
    });
    r.records.extend([pk.pushforward.result, pc.pushforward.result, sk.domain_volume(), sc.domain_volume()]);
    Ok(r.finalize())
}

/// The trace-free matrix identities for every 2k ∈ {2, 4, 6}.
pub fn check_identities(samples: usize, seed: u64) -> VerificationReport {
    let mut r = VerificationReport::new("identities", "-", "-", Vec::new());
    for k in 1..=SphereDim::MAX_K {
        for o in check_trace_free_identities(k, samples, seed.wrapping_add(k as u64)) {
            let (relation, lhs, rhs) = match o.relation {
                IdRelation::Equal => (Relation::Equal, o.worst, 0.0),
                IdRelation::GreaterEqual => (Relation::GreaterEqual, o.worst, 0.0),
            };
            r.conclusions.push(Conclusion::new(
                &format!("{}_{}x{}", o.name, o.size, o.size),
                format!("{} over {} random trace-free matrices (worst case)", o.name, o.samples),
                lhs,
                relation,
                rhs,
                o.tolerance,
            ));
        }
    }
    r.finalize()
}

/// One unit of work for [`run_checks`].
#[derive(Debug, Clone)]
pub enum CheckJob {
    Theorem13 { field: FieldDefinition, region: Region },
    Theorem14 { field: FieldDefinition, region: Region, t: Vec<f64> },
    Theorem16 { field: FieldDefinition, region: Region },
    Dichotomy { field: FieldDefinition, delta_max: f64, t: f64 },
    Identities { samples: usize, seed: u64 },
}

/// Runs independent checks concurrently; results come back in job order.
pub fn run_checks(jobs: &[CheckJob], q: &QuadratureSpec, cfg: &CheckConfig) -> Vec<Result<VerificationReport>> {
    let exec = q.exec;
    map_indices(jobs.len(), exec, |i| match &jobs[i] {
        CheckJob::Theorem13 { field, region } => check_theorem_1_3(field, region, q, cfg),
        CheckJob::Theorem14 { field, region, t } => check_theorem_1_4(field, region, q, t, cfg),
        CheckJob::Theorem16 { field, region } => check_theorem_1_6(field, region, q, cfg),
        CheckJob::Dichotomy { field, delta_max, t } => check_dichotomy(field, *delta_max, q, *t, cfg),
        CheckJob::Identities { samples, seed } => Ok(check_identities(*samples, *seed)),
    })
}

/// One (λ, t) cell of a PVP sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub field: String,
    pub domain: String,
    pub t: f64,
    pub pvp_ratio: f64,
    pub pushforward_volume: f64,
    pub domain_volume: f64,
    pub min_jacobian: f64,
    pub diffeomorphic: bool,
}

/// PVP ratio for every field × t on one region.
pub fn pvp_sweep(fields: &[FieldDefinition], region: &Region, q: &QuadratureSpec, t_values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(fields.len() * t_values.len());
    for f in fields {
        let survey = FieldSurvey::new(f, region, q)?;
        for &t in t_values {
            check_t(t)?;
            let pvp = survey.pvp(t);
            rows.push(SweepRow {
                field: f.label().to_string(),
                domain: region.label(),
                t,
                pvp_ratio: pvp.ratio,
                pushforward_volume: pvp.pushforward.result.value,
                domain_volume: pvp.domain_volume,
                min_jacobian: pvp.pushforward.min_jacobian,
                diffeomorphic: pvp.pushforward.diffeomorphic,
            });
        }
    }
    Ok(rows)
}

/// Default domain for the dichotomy check.
pub const CLIFFORD_DELTA: f64 = FRAC_1_SQRT_2;

/// True if every report passed or was gated by its hypotheses.
pub fn all_acceptable(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.status != Status::Failed)
}
