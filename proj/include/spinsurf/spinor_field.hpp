#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinsurf/clifford.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

// intrinsic: psi* picture, even elements of Cl(1,2); the complex structure is
// right multiplication by the I-blade (Riemannian charts).
// extrinsic: restriction of an ambient spinor, written in the adapted frame.
enum class SpinorModel { intrinsic, extrinsic };

// Algebra and role placement (e_1, e_2, N, nu) used by a spinor model.
struct SpinorSpace {
    SpinorModel model = SpinorModel::intrinsic;
    SurfaceSignature signature = SurfaceSignature::riemannian;
    AmbientModel ambient;

    const Signature& algebra() const { return ambient.algebra; }
    int role(int r) const { return ambient.role[static_cast<std::size_t>(r)]; }
    // Tangent vector (frame components) placed on the algebra.
    Multivector tangent(const Eigen::Vector2d& x) const;
    Multivector normal() const { return ambient.role_vector(2); }
    // e_1 e_2 on the algebra; left multiplication realizes omega in both models.
    Multivector area_element() const;
};

SpinorSpace intrinsic_space(SurfaceSignature sig);
SpinorSpace extrinsic_space(const SpaceKind& kind, SurfaceSignature sig);

// Clifford action of a tangent vector. Intrinsic Riemannian: e_0 X psi* I;
// intrinsic Lorentzian: X N psi*; extrinsic: X psi.
Multivector clifford_action(const SpinorSpace& s, const Eigen::Vector2d& x, const Multivector& psi);
// i psi = psi* I. Only meaningful in the intrinsic model.
Multivector complex_i(const Multivector& psi);
Multivector omega_action(const SpinorSpace& s, const Multivector& psi);
// Real part of the Hermitian product: Euclidean dot of blade coefficients.
double hermitian_re(const Multivector& a, const Multivector& b);

struct SplitSpinor {
    Multivector plus, minus;
    double indicator = 0;  // |psi+|^2 - |psi-|^2
};
// psi+- = (psi +- i e_1 e_2 psi) / 2 on the intrinsic Riemannian model.
SplitSpinor split_pm(const Multivector& psi);
// Coefficients on 1, e01, e02, e12 give a^2 + d^2 - b^2 - c^2.
double indicator(const Multivector& psi);

enum class KillingForm {
    extrinsic_group,
    intrinsic_riemannian,
    intrinsic_lorentzian,
    product_h2r,
    product_rs12,
    product_rh12,
    desitter,
    antidesitter,
    product_rminus_s2,
    lkt,
    su12,
    r12_riemannian,
    killing_lkt,   // (i/2) S psi - (i/2) tau X omega psi, data S and tau only
    r3_euclidean,  // -1/2 S(X) psi, minimal and CMC surfaces of R^3
};

std::string form_name(KillingForm f);
KillingForm form_from_name(const std::string& name);

struct KillingEquation {
    KillingForm form = KillingForm::r12_riemannian;
    SpaceKind kind;
    GeometryData data;
    double tau = 0;  // killing_lkt parameter
    // Filled by make_equation.
    SpinorSpace space;
    LieAlgebra3 algebra;  // group kinds only

    SpinorModel model() const { return space.model; }
    // Throws std::invalid_argument for missing coefficients at `nodes` nodes.
    void validate(std::size_t nodes) const;
};

// Throws std::invalid_argument for an unsupported form/space pair.
KillingEquation make_equation(KillingForm form, const SpaceKind& kind, GeometryData data, double tau = 0);

// Right-hand side of nabla_X psi at node k; X in frame components.
Multivector killing_rhs(const KillingEquation& eq, const Multivector& psi, std::size_t node, const Eigen::Vector2d& x);

// Gamma(X) as a bivector on the adapted roles, built from T_i and nu_i.
Multivector gamma_bivector(const LieAlgebra3& alg, const SpinorSpace& s, const GeometryData& d, std::size_t node,
                           const Eigen::Vector2d& x);
// Vector parts of Gamma_1, Gamma_2 (Riemannian) or Gamma-tilde (Lorentzian):
// sum_i eps_i <X,T_i> sum_{j<k} eps_j eps_k Gamma_ij^k (nu_k T_j - nu_j T_k).
Eigen::Vector2d gamma_vector(const LieAlgebra3& alg, const GeometryData& d, std::size_t node, const Eigen::Vector2d& x);
// Tangent part sum ... (T_j T_k - T_k T_j)/2 of the same sum, on the tangent roles.
Multivector gamma_tangent_bivector(const LieAlgebra3& alg, const SpinorSpace& s, const GeometryData& d, std::size_t node,
                                   const Eigen::Vector2d& x);

struct SpinorField {
    Chart chart;
    SpinorSpace space;
    std::vector<Multivector> values;

    std::size_t size() const { return values.size(); }
};

// Constraint the solver preserves: indicator (or tau(phi) phi) equal to one,
// Euclidean norm for r3_euclidean.
double unit_defect(const KillingEquation& eq, const Multivector& psi);

// Restriction of the constant (left-invariant for groups) ambient spinor 1,
// written in the adapted frame of the geometry: tau of the spin lift of the
// role-placed frame.
SpinorField frame_lift(const Chart& chart, const GeometryData& data);

// Columns <<E_r phi, phi>> for the roles e_1, e_2, N (and nu) in ambient
// coordinates: the adapted frame a unit spinor encodes.
Eigen::MatrixXd spinor_frame(const SpinorSpace& s, const Multivector& phi);
// Unit spinor closest to phi: the spin lift of its orthonormalized frame, with
// the sign of phi. Throws std::runtime_error when the frame degenerates.
Multivector snap_to_spin(const SpinorSpace& s, const Multivector& phi);

// nabla_{e_a} psi at every node with the chart's finite differences.
SpinorField spinor_covariant_derivative(const SpinorField& f, int direction);

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KillingSolution {
    SpinorField field;
    double integrability = 0;       // max plaquette defect / area over interior plaquettes
    std::vector<double> plaquette;  // per plaquette, (nu-1)*(nv-1)
    double unit_drift = 0;          // max unit_defect over nodes
};

// Integrates nabla psi = rhs edgewise (classical RK4, coefficients linear along
// each edge), base row first and then every column. base_i/base_j < 0 pick the
// centre node.
KillingSolution solve_killing(const KillingEquation& eq, const Chart& chart, const Multivector& psi0, int base_i = -1,
                              int base_j = -1);

// sum_a |nabla_{e_a} psi - rhs(e_a, psi)| per node, zero on boundary nodes.
ResidualField residual_killing(const KillingEquation& eq, const SpinorField& f);

// D psi = sum_j e_j . nabla_{e_j} psi (intrinsic Riemannian only).
SpinorField dirac(const SpinorField& f);

// <S Y, X> = 2/|psi|^2 (<i X nabla_Y psi, psi> - tau/2 g(X, JY) |psi|^2).
// Column b of each matrix is S(e_b).
std::vector<Eigen::Matrix2d> shape_from_spinor(const SpinorField& f, double tau);

// Max interior distance between two fields, relative to the first field's size.
double field_distance(const SpinorField& a, const SpinorField& b);

}  // namespace spinsurf
