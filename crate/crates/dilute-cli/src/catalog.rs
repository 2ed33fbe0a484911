//! Every check id the CLI can emit, with its default tolerance and a short
//! statement of what is compared.

use dilute::fusion::RELATIONS;
use dilute::planar::IDENTITIES;

#[derive(Clone, Debug)]
pub struct CheckInfo {
    pub id: String,
    pub tolerance: f64,
    pub explain: String,
}

fn info(id: &str, tolerance: f64, explain: &str) -> CheckInfo {
    CheckInfo { id: id.to_string(), tolerance, explain: explain.to_string() }
}

fn local_explain(id: &str) -> &'static str {
    match id {
        "initial" => "face operator at u = 0 equals the arc pair L–T, B–R",
        "crossing" => "face operator at 3λ − u equals the face at u turned a quarter",
        "inversion" => "faces at u and −u stacked in a column give ρ₇(u)ρ₇(−u) times the identity",
        "ybe" => "Yang–Baxter equation for faces at u − v, u, v on a hexagon",
        "factor_3lambda" => "face operator at 3λ equals the arc pair L–B, T–R",
        "factor_2lambda" => "face operator at 2λ equals sin λ / sin 3λ times two dotted triangles joined tip to tip",
        "push_triangle" => "a dotted triangle passes through faces at u and u + 2λ, leaving a face at u + λ and s₂(u)s₃(−u)",
        "push_arc" => "an arc between faces at u and u + 3λ leaves an arc pair times s₂s₃ products",
        "braid_push_arc" => "a cap passes through two braid limits, leaving arc pair plus single arc",
        "braid_push_vacancy" => "a vacancy passes through a braid limit, leaving a straight strand",
        "triangle_A4a" => "labelled triangle 1 closed by a dotted triangle is a single arc",
        "triangle_A4b" => "four-triangle composite with labelled top expands in three terms",
        "triangle_A4c" => "wavy triangle 1 closed by an arc and a vacancy vanishes",
        "triangle_A4d" => "four-triangle composite with wavy top reduces to a single dashed line",
        _ => "",
    }
}

/// All checks, in the order `--list` prints them.
pub fn catalog() -> Vec<CheckInfo> {
    let mut v = vec![info(
        "dimension",
        0.0,
        "number of enumerated link states of V_{N,d} minus the trinomial coefficient [x^d](1 + x + x²)^N; exact",
    )];
    for id in IDENTITIES {
        v.push(info(
            &format!("local.{id}"),
            1e-11,
            &format!(
                "{}; residual max |L − R| / max |L| over boundary pairings, per seeded random draw",
                local_explain(id)
            ),
        ));
    }
    v.extend([
        info("transfer.commutativity", 1e-10, "‖[T(u), T(v)]‖ / (‖T(u)‖‖T(v)‖) at two seeded points"),
        info("transfer.periodicity", 1e-10, "‖T(u + π) − T(u)‖ relative"),
        info("transfer.crossing", 1e-10, "‖T^{0,1}(u) − T^{1,0}(u + λ)‖ relative"),
        info("transfer.laurent-fit", 1e-9, "degree-2N centered Laurent fit in z = e^{iu}, relative error at held-out points"),
        info("transfer.degree", 0.0, "|detected Laurent degree − 2N|; exact"),
        info("transfer.braid-offdiag", 1e-12, "off-diagonal Frobenius mass of the braid limit T_{±∞}, relative"),
        info("transfer.braid-eigenvalue", 1e-10, "largest |diagonal − closed-form braid eigenvalue| of T_{±∞}"),
        info(
            "transfer.braid-fused",
            1e-9,
            "fused braid limit T^{m,0}_{±∞} diagonal against U_m(ω e^{∓i(π−2λ)d}, 1), relative; off-diagonal mass included",
        ),
    ]);
    for r in RELATIONS {
        v.push(info(
            &format!("fusion.{}", r.id),
            1e-7,
            &format!("{} [{}] — relative residual of both sides", r.summary, if r.range.is_empty() { "no indices" } else { r.range }),
        ));
    }
    v.extend([
        info("fusion.regularity", 1e-9, "numerator of the (2,0) or (1,1) recursion at u = ξ_N, relative to a generic point"),
        info("fusion.degree", 0.0, "|detected − expected| Laurent degree of T^{m,n}: 2N on boundary labels, 3N otherwise; exact"),
        info("ysystem", 1e-6, "Y-system for y^m = t^{m−1}t^{m+1}/(f-products), eigenvalue-wise in a joint eigenbasis"),
        info("closure.symmetries", 1e-9, "T^{m,n} shifts by 2b in either index at a root of unity (sign conventions included)"),
        info("closure.j-offdiag", 1e-9, "off-diagonal mass of the constant tangle J built from braid limits"),
        info("closure.j-eigenvalue", 1e-9, "|J eigenvalue − closed form| on the sector"),
        info("closure.j-independence", 1e-9, "J built from both braid limits and at several u agrees, relative"),
        info("closure.j-centrality", 1e-9, "‖[J, T(u)]‖ relative"),
        info("closure.lambda", 1e-9, "e^{iΛ} + 1 + e^{−iΛ} = σ^a J on the eigenvalue"),
        info("closure.closure-a", 1e-7, "T^{b,0} through the restricted set; tolerance scales as 10^{b−2}"),
        info("closure.closure-b", 1e-7, "T^{0,b} through the restricted set; tolerance scales as 10^{b−2}"),
        info("closure.extra-a", 1e-7, "T^{b,k}, 1 ≤ k ≤ b−1, through the restricted set; tolerance scales as 10^{b−2}"),
        info("closure.extra-b", 1e-7, "T^{k,b}, 1 ≤ k ≤ b−1, through the restricted set; tolerance scales as 10^{b−2}"),
        info("closure.quartic", 1e-6, "quartic relation among T^{b−1,0}, T^{b−2,0} and their folds, b ≥ 3"),
        info("closure.restricted", 1e-7, "labels outside the rhombus rebuilt from inside it; tolerance scales as 10^{b−2}"),
        info("closure.y-raw", 1e-6, "closed Y-system in ratio form, eigenvalue-wise"),
        info("closure.y-product", 1e-6, "closed Y-system in product form (three relations), eigenvalue-wise"),
        info("tba.nodes", 0.0, "|node count − (p′+2 for p even, 2p′+2 for p odd)|; exact"),
        info("tba.y-self-edge", 0.0, "|multiplicity of the y self-edge − 4|; exact"),
        info("projector.idempotency", 1e-10, "‖P·P − P‖ / ‖P‖ for the projector tangle"),
        info("projector.annihilation", 1e-10, "P with the designated triangle or cap attached, relative to ‖P‖"),
        info("projector.absorption", 1e-10, "P against its products with the smaller projectors, relative"),
        info("projector.mirror", 1e-12, "conjugate projectors against the mirror images of (m,0), (m,1)"),
        info("projector.transfer", 1e-7, "projector-built fused transfer matrix against the hierarchy T^{m,n}, relative"),
    ]);
    v
}

pub fn find(id: &str) -> Option<CheckInfo> {
    catalog().into_iter().find(|c| c.id == id)
}

pub fn is_known(id: &str) -> bool {
    find(id).is_some()
}

pub fn default_tolerance(id: &str) -> f64 {
    find(id).map_or(0.0, |c| c.tolerance)
}
