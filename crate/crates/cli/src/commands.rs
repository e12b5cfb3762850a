//! Subcommand arguments and their execution.

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pwcert::certificate::Verdict;
use pwcert::concentration::{
    build_interp_kernel, gaussian_witness, interp_certify, sinc_witness, tp_couple_witness, volume_necessary_check,
    ConcentrationWitness, PipelineGrid,
};
use pwcert::expsys::{gram_section, riesz_lower_trend, shifted_lattice_det, Trend};
use pwcert::geometry::{Level, VolumeMethod};
use pwcert::ingham::{ball_ingham_bound, bessel_first_root, interpolation_constant, InghamKernel};
use pwcert::lattice::lattice_decide;
use pwcert::perturb::{omega_family, universal_perturbation};
use pwcert::sampling_cert::{beurling_certify, critical_config, verify_sampling_bound};
use pwcert::{CertError, Result};

use crate::descriptors as d;
use crate::document::Outcome;

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Gauge, radii and volume of a convex body.
    Body(BodyArgs),
    /// Lattice sampling and interpolation decisions.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Windowed Gram section of an exponential system.
    Gram(GramArgs),
    /// Determinant test for unions of shifted integer lattices on unions of cubes.
    Det(DetArgs),
    /// Smallest Gram eigenvalue over growing windows.
    RieszTrend(TrendArgs),
    /// Sampling certificates for Bernstein spaces.
    #[command(subcommand)]
    Sampling(SamplingCmd),
    /// Alias: `certify sampling` is `sampling certify`.
    #[command(subcommand, hide = true)]
    Certify(CertifyCmd),
    /// One-dimensional Ingham kernels and ball bounds.
    #[command(subcommand)]
    Ingham(InghamCmd),
    /// Concentration couples and interpolation kernels.
    #[command(subcommand)]
    Concentration(ConcentrationCmd),
    /// Universal perturbations of the integer lattice.
    #[command(subcommand)]
    Perturb(PerturbCmd),
    /// Re-run a result document and compare.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Body(_) => "body".into(),
            Command::Lattice(LatticeCmd::Decide(_)) => "lattice decide".into(),
            Command::Gram(_) => "gram".into(),
            Command::Det(_) => "det".into(),
            Command::RieszTrend(_) => "riesz-trend".into(),
            Command::Sampling(s) => format!("sampling {}", s.name()),
            Command::Certify(CertifyCmd::Sampling(_)) => "sampling certify".into(),
            Command::Ingham(c) => format!(
                "ingham {}",
                match c {
                    InghamCmd::Kernel(_) => "kernel",
                    InghamCmd::Constant(_) => "constant",
                    InghamCmd::Bessel(_) => "bessel",
                }
            ),
            Command::Concentration(c) => format!(
                "concentration {}",
                match c {
                    ConcentrationCmd::Ratios(_) => "ratios",
                    ConcentrationCmd::Witness(_) => "witness",
                    ConcentrationCmd::Pipeline(_) => "pipeline",
                    ConcentrationCmd::Certify(_) => "certify",
                    ConcentrationCmd::VolumeCheck(_) => "volume-check",
                }
            ),
            Command::Perturb(PerturbCmd::Omega(_)) => "perturb omega".into(),
            Command::Perturb(PerturbCmd::Run(_)) => "perturb run".into(),
            Command::Replay(_) => "replay".into(),
        }
    }
}

/// Dimension from `--dim`, else from the first descriptor that fixes one,
/// else 1.
fn dim(explicit: Option<usize>, descriptors: &[&str]) -> usize {
    explicit.or_else(|| descriptors.iter().find_map(|s| d::implied_dim(s))).unwrap_or(1)
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BodyArgs {
    /// Body descriptor, e.g. lp:2:1, box:pi, tp:3.
    #[arg(long)]
    pub body: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Also estimate the volume by Monte Carlo with this many samples.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point at which to report the gauge and support function.
    #[arg(long)]
    pub point: Option<String>,
}

fn body_cmd(a: &BodyArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.body]);
    let b = d::body(&a.body, n)?;
    let closed = b.volume(VolumeMethod::ClosedForm).ok();
    let mc = match a.mc_samples {
        Some(samples) => Some(b.volume(VolumeMethod::MonteCarlo { seed: a.seed, samples })?),
        None => None,
    };
    let at = match &a.point {
        Some(p) => {
            let x = d::numbers(p)?;
            Some(json!({"point": x, "gauge": b.gauge(&x)?, "support": b.support_of(&x)?}))
        }
        None => None,
    };
    let out = json!({
        "body": b,
        "dim": b.dim(),
        "circumradius": b.circumradius(),
        "inradius": b.inradius(),
        "lipschitz": b.lipschitz(),
        "volume": closed,
        "monte_carlo_volume": mc,
        "at": at,
    });
    let mut o = Outcome::new(&out)?;
    if a.mc_samples.is_some() {
        o = o.seed("monte_carlo", a.seed);
    }
    Ok(o)
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeCmd {
    /// Packing decides sampling, covering decides interpolation.
    Decide(DecideArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DecideArgs {
    #[arg(long)]
    pub spectrum: String,
    #[arg(long)]
    pub nodes: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

fn decide_cmd(a: &DecideArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.spectrum, &a.nodes]);
    let s = d::spectrum(&a.spectrum, n)?;
    let lat = d::lattice(&a.nodes, n)?;
    let cert = lattice_decide(&s, &lat, a.grid_step)?;
    Ok(Outcome::new(&cert)?.verdict(cert.overall()))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GramArgs {
    #[arg(long)]
    pub spectrum: String,
    #[arg(long)]
    pub nodes: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Nodes within this Euclidean radius enter the section.
    #[arg(long)]
    pub radius: f64,
    /// Write the matrix as CSV (row, col, re, im).
    #[arg(long)]
    pub dump: Option<String>,
}

fn gram_cmd(a: &GramArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.spectrum, &a.nodes]);
    let s = d::spectrum(&a.spectrum, n)?;
    let ns = d::nodes(&a.nodes, n)?;
    let g = gram_section(&s, &ns.points_in_ball(a.radius)?)?;
    let csv = g.to_csv();
    Ok(Outcome::new(&g)?.csv(csv.clone()).dump(a.dump.as_ref(), || csv))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DetArgs {
    /// Shift vectors u_1;u_2;.. of the integer lattice.
    #[arg(long)]
    pub shifts: String,
    /// Integer translates m_1;m_2;.. of the cube [0, 2π]ⁿ.
    #[arg(long)]
    pub translates: String,
}

fn det_cmd(a: &DetArgs) -> Result<Outcome> {
    let shifts = d::vectors(&a.shifts)?;
    let translates = d::vectors(&a.translates)?
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|v| {
                    if v.fract() == 0.0 && v.abs() < 1e15 {
                        Ok(v as i64)
                    } else {
                        Err(CertError::InvalidSpec(format!("translate coordinate {v} is not an integer")))
                    }
                })
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let det = shifted_lattice_det(&shifts, &translates)?;
    let v = if det.criterion_satisfied { Verdict::Proved } else { Verdict::Refuted };
    Ok(Outcome::new(&det)?.verdict(v).tolerance("det", det.tolerance))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TrendArgs {
    #[arg(long)]
    pub spectrum: String,
    #[arg(long)]
    pub nodes: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Increasing window radii, comma separated.
    #[arg(long)]
    pub radii: String,
}

fn trend_cmd(a: &TrendArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.spectrum, &a.nodes]);
    let s = d::spectrum(&a.spectrum, n)?;
    let ns = d::nodes(&a.nodes, n)?;
    let t = riesz_lower_trend(&s, &ns, &d::numbers(&a.radii)?)?;
    let mut csv = String::from("radius,eig_min,eig_max,node_count\n");
    for r in &t.rows {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", r.radius, r.eig_min, r.eig_max, r.node_count));
    }
    let v = match t.verdict {
        Trend::Stable => Verdict::Consistent,
        Trend::Degenerating => Verdict::Refuted,
        Trend::Inconclusive => Verdict::Inconclusive,
    };
    Ok(Outcome::new(&t)?
        .verdict(v)
        .tolerance("stable", t.thresholds.stable)
        .tolerance("degenerating", t.thresholds.degenerating)
        .tolerance("collapse", t.thresholds.collapse)
        .csv(csv))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CertifyArgs {
    /// Spectrum K, a symmetric convex body.
    #[arg(long)]
    pub body: String,
    #[arg(long)]
    pub nodes: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Radius of the region searched for holes when the nodes are not periodic.
    #[arg(long, default_value_t = 32.0)]
    pub domain_radius: f64,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub target: CertifyArgs,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16.0)]
    pub eval_radius: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CriticalArgs {
    #[arg(long)]
    pub body: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingCmd {
    /// Covering-radius certificate sup|f| <= C·sup over the nodes.
    Certify(CertifyArgs),
    /// Seeded random exponential sums against a proved certificate.
    Verify(VerifyArgs),
    /// Hyperplane nodes at polar covering radius π/2 with a vanishing function.
    Critical(CriticalArgs),
}

impl SamplingCmd {
    fn name(&self) -> &'static str {
        match self {
            SamplingCmd::Certify(_) => "certify",
            SamplingCmd::Verify(_) => "verify",
            SamplingCmd::Critical(_) => "critical",
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyCmd {
    Sampling(CertifyArgs),
}

fn sampling_certify(a: &CertifyArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.body, &a.nodes]);
    let k = d::body(&a.body, n)?;
    let ns = d::nodes(&a.nodes, n)?;
    let c = beurling_certify(&k, &ns, a.domain_radius, a.grid_step)?;
    Ok(Outcome::new(&c)?
        .verdict(c.verdict)
        .tolerance("grid_step", c.covering.grid_step)
        .tolerance("covering_margin", c.covering.margin))
}

fn sampling_verify(a: &VerifyArgs) -> Result<Outcome> {
    let t = &a.target;
    let n = dim(t.dim, &[&t.body, &t.nodes]);
    let k = d::body(&t.body, n)?;
    let ns = d::nodes(&t.nodes, n)?;
    let cert = beurling_certify(&k, &ns, t.domain_radius, t.grid_step)?;
    let check = verify_sampling_bound(&k, &ns, &cert, a.trials, a.seed, a.eval_radius)?;
    let holds = check.worst_observed <= cert.constant * (1.0 + 1e-9);
    let mut csv = String::from("trial,ratio\n");
    for (i, r) in check.ratios.iter().enumerate() {
        csv.push_str(&format!("{i},{r:.16e}\n"));
    }
    let out = json!({"certificate": cert, "check": check, "bound_holds": holds});
    Ok(Outcome::new(&out)?
        .verdict(if holds { Verdict::Consistent } else { Verdict::Refuted })
        .seed("trials", a.seed)
        .tolerance("grid_step", check.grid_step)
        .tolerance("bound_slack", 1e-9)
        .csv(csv))
}

fn sampling_critical(a: &CriticalArgs) -> Result<Outcome> {
    let n = dim(a.dim, &[&a.body]);
    let k = d::body(&a.body, n)?;
    let c = critical_config(&k, a.samples, a.seed)?;
    Ok(Outcome::new(&c)?.seed("samples", a.seed))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KernelArgs {
    /// Support half-width r > π.
    #[arg(long)]
    pub r: String,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Transform samples are taken on [−tmax, tmax].
    #[arg(long, default_value_t = 50.0)]
    pub tmax: f64,
    /// Write x,K,t,K_hat as CSV.
    #[arg(long)]
    pub dump: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConstantArgs {
    #[arg(long)]
    pub r: String,
    /// Node separation; defaults to 1.1·r.
    #[arg(long)]
    pub delta: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BesselArgs {
    /// First positive zero of J_order.
    #[arg(long, conflicts_with = "dim")]
    pub order: Option<f64>,
    /// Separation bound 2ν for the unit ball in this dimension.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InghamCmd {
    Kernel(KernelArgs),
    Constant(ConstantArgs),
    Bessel(BesselArgs),
}

fn kernel_csv(k: &InghamKernel, points: usize, tmax: f64) -> String {
    let m = points.max(2);
    let mut s = String::from("x,K,t,K_hat\n");
    for i in 0..m {
        let u = i as f64 / (m - 1) as f64;
        let x = k.r * (2.0 * u - 1.0);
        let t = tmax * (2.0 * u - 1.0);
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", x, k.eval(x), t, k.transform(t)));
    }
    s
}

fn ingham_cmd(c: &InghamCmd) -> Result<Outcome> {
    match c {
        InghamCmd::Kernel(a) => {
            let k = InghamKernel::new(d::number(&a.r)?)?;
            let csv = kernel_csv(&k, a.points, a.tmax);
            let out = json!({"kernel": k, "lower_riesz_constant": k.riesz_lower()});
            Ok(Outcome::new(&out)?.csv(csv.clone()).dump(a.dump.as_ref(), || csv))
        }
        InghamCmd::Constant(a) => {
            let k = InghamKernel::new(d::number(&a.r)?)?;
            let delta = match &a.delta {
                Some(v) => d::number(v)?,
                None => 1.1 * k.r,
            };
            let cert = interpolation_constant(&k, delta)?;
            Ok(Outcome::new(&cert)?.verdict(cert.overall()))
        }
        InghamCmd::Bessel(a) => {
            let out = match (a.order, a.dim) {
                (Some(v), None) => json!({"order": v, "first_zero": bessel_first_root(v)?}),
                (None, Some(n)) => json!({"dim": n, "separation_bound": ball_ingham_bound(n)?}),
                _ => return Err(CertError::InvalidSpec("give exactly one of --order and --dim".into())),
            };
            Outcome::new(&out)
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CoupleArgs {
    /// Witness function: gaussian:S, sinc:W, tent:W or JSON.
    #[arg(long)]
    pub witness: String,
    /// S, where the transform should concentrate.
    #[arg(long)]
    pub spectrum: String,
    /// K, where the function should concentrate.
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Gaussian,
    Sinc,
    Tp,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub kind: WitnessKind,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Scale of the couple (gaussian, tp).
    #[arg(long, default_value_t = 3.0)]
    pub c: f64,
    /// Energy left outside the ball (sinc).
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub couple: CoupleArgs,
    /// Grid points per axis (even).
    #[arg(long)]
    pub points: Option<usize>,
    /// Length of the periodic space domain.
    #[arg(long)]
    pub period: Option<f64>,
    /// Write t,g_re,g_im,h,k as CSV.
    #[arg(long)]
    pub dump_spectral: Option<String>,
    /// Write x,K as CSV.
    #[arg(long)]
    pub dump_kernel: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct InterpArgs {
    #[command(flatten)]
    pub couple: CoupleArgs,
    #[arg(long)]
    pub nodes: String,
    /// Window for perturbed node sets.
    #[arg(long)]
    pub window: Option<f64>,
    /// Attach the kernel pipeline diagnostics (n <= 2).
    #[arg(long)]
    pub corroborate: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VolumeArgs {
    #[arg(long)]
    pub spectrum: String,
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcentrationCmd {
    /// Space and frequency concentration of a witness.
    Ratios(CoupleArgs),
    /// Built-in witnesses for the standard couples.
    Witness(WitnessArgs),
    /// Grid construction of the interpolation kernel.
    Pipeline(PipelineArgs),
    /// Interpolation certificate from separation in the K-gauge.
    Certify(InterpArgs),
    /// Volume condition every couple must satisfy.
    VolumeCheck(VolumeArgs),
}

fn admits(w: &ConcentrationWitness) -> Verdict {
    if w.admits {
        Verdict::Consistent
    } else {
        Verdict::Refuted
    }
}

fn concentration_cmd(c: &ConcentrationCmd) -> Result<Outcome> {
    let conc_tol = |o: Outcome| o.tolerance("threshold", pwcert::concentration::CONCENTRATION_THRESHOLD);
    match c {
        ConcentrationCmd::Ratios(a) => {
            let n = dim(a.dim, &[&a.spectrum, &a.space]);
            let w = ConcentrationWitness::new(d::witness(&a.witness)?, d::body(&a.spectrum, n)?, d::body(&a.space, n)?)?;
            Ok(conc_tol(Outcome::new(&w)?.verdict(admits(&w))))
        }
        ConcentrationCmd::Witness(a) => match a.kind {
            WitnessKind::Gaussian => {
                let w = gaussian_witness(a.dim, a.c)?;
                Ok(conc_tol(Outcome::new(&w)?.verdict(admits(&w))))
            }
            WitnessKind::Sinc => {
                let w = sinc_witness(a.dim, a.epsilon)?;
                Ok(conc_tol(Outcome::new(&w)?.verdict(admits(&w.witness))))
            }
            WitnessKind::Tp => {
                let need = |v: &Option<String>, name: &str| {
                    v.as_deref()
                        .ok_or_else(|| CertError::InvalidSpec(format!("tp witness needs --{name}")))
                        .and_then(d::number)
                };
                let w = tp_couple_witness(need(&a.p, "p")?, need(&a.q, "q")?, a.dim, a.c)?;
                Ok(conc_tol(Outcome::new(&w)?.verdict(admits(&w))))
            }
        },
        ConcentrationCmd::Pipeline(a) => {
            let cp = &a.couple;
            let n = dim(cp.dim, &[&cp.spectrum, &cp.space]);
            let grid = match (a.points, a.period) {
                (None, None) => None,
                (p, period) => Some(PipelineGrid {
                    points_per_axis: p.unwrap_or(PipelineGrid::default_for(n).points_per_axis),
                    period,
                }),
            };
            let r = build_interp_kernel(&d::witness(&cp.witness)?, &d::body(&cp.spectrum, n)?, &d::body(&cp.space, n)?, grid)?;
            let csv = r.kernel_csv();
            Ok(Outcome::new(&r)?
                .verdict(Verdict::Consistent)
                .csv(csv.clone())
                .dump(a.dump_kernel.as_ref(), || csv)
                .dump(a.dump_spectral.as_ref(), || r.spectral_csv()))
        }
        ConcentrationCmd::Certify(a) => {
            let cp = &a.couple;
            let n = dim(cp.dim, &[&cp.spectrum, &cp.space, &a.nodes]);
            let cert = interp_certify(
                &d::nodes(&a.nodes, n)?,
                &d::body(&cp.spectrum, n)?,
                &d::body(&cp.space, n)?,
                &d::witness(&cp.witness)?,
                a.window,
                a.corroborate,
            )?;
            Ok(conc_tol(Outcome::new(&cert)?.verdict(cert.overall())))
        }
        ConcentrationCmd::VolumeCheck(a) => {
            let n = dim(a.dim, &[&a.spectrum, &a.space]);
            let cert = volume_necessary_check(&d::body(&a.spectrum, n)?, &d::body(&a.space, n)?)?;
            Ok(Outcome::new(&cert)?.verdict(cert.overall()))
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct OmegaArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub level: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RunArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub depth: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbCmd {
    /// The sets of Ω(k).
    Omega(OmegaArgs),
    /// Level-by-level construction from the integer lattice.
    Run(RunArgs),
}

fn perturb_cmd(c: &PerturbCmd) -> Result<Outcome> {
    match c {
        PerturbCmd::Omega(a) => {
            let sets = omega_family(a.dim, a.level, a.seed)?;
            let mut csv = String::from("set,level,translates\n");
            for (i, s) in sets.iter().enumerate() {
                let ms: Vec<String> = s
                    .translates
                    .iter()
                    .map(|m| m.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(":"))
                    .collect();
                csv.push_str(&format!("{i},{},{}\n", s.level, ms.join(";")));
            }
            let out = json!({"dim": a.dim, "level": a.level, "count": sets.len(), "sets": sets});
            Ok(Outcome::new(&out)?.seed("sample", a.seed).csv(csv))
        }
        PerturbCmd::Run(a) => {
            let p = universal_perturbation(a.dim, a.depth, a.epsilon, a.seed)?;
            let v = if p.failure.is_some() { Verdict::Inconclusive } else { Verdict::Consistent };
            let mut csv = String::from("set,level,det_abs,det_tol,sigma_min,floor,eig_min\n");
            for (i, m) in p.final_margins.iter().enumerate() {
                csv.push_str(&format!(
                    "{i},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    m.set_level,
                    m.det_abs,
                    m.det_tol,
                    m.sigma_min,
                    m.floor,
                    m.margin()
                ));
            }
            let dims = p.shifts.len();
            Ok(Outcome::new(&p)?
                .verdict(v)
                .seed("shifts", a.seed)
                .tolerance("det", pwcert::perturb::det_tolerance(dims))
                .csv(csv))
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Result document written by an earlier run.
    pub document: String,
}

/// Runs a command other than `replay`.
pub fn execute(c: &Command) -> Result<Outcome> {
    match c {
        Command::Body(a) => body_cmd(a),
        Command::Lattice(LatticeCmd::Decide(a)) => decide_cmd(a),
        Command::Gram(a) => gram_cmd(a),
        Command::Det(a) => det_cmd(a),
        Command::RieszTrend(a) => trend_cmd(a),
        Command::Sampling(SamplingCmd::Certify(a)) | Command::Certify(CertifyCmd::Sampling(a)) => sampling_certify(a),
        Command::Sampling(SamplingCmd::Verify(a)) => sampling_verify(a),
        Command::Sampling(SamplingCmd::Critical(a)) => sampling_critical(a),
        Command::Ingham(c) => ingham_cmd(c),
        Command::Concentration(c) => concentration_cmd(c),
        Command::Perturb(c) => perturb_cmd(c),
        Command::Replay(_) => Err(CertError::InvalidSpec("replay cannot be nested".into())),
    }
}
