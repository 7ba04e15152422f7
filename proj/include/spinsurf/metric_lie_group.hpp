#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinsurf/clifford.hpp"
#include "spinsurf/grid.hpp"

namespace spinsurf {

enum class SpaceTag {
    minkowski_r12,
    algebra_a,
    algebra_b,
    algebra_c,
    lkt,
    su12,
    de_sitter,
    anti_de_sitter,
    product_rminus_s2,
    product_h2xr,
    product_rxs12,
    product_rxh12,
    euclidean3,  // flat Riemannian R^3, only used to feed the Calabi pipeline
};

struct SpaceKind {
    SpaceTag tag = SpaceTag::minkowski_r12;
    double alpha = 0;  // algebras a, b and the products H2xR, RxS12
    double delta = 0;  // algebra c and RxH12
    double kappa = 0;
    double tau = 0;

    static SpaceKind minkowski() { return {}; }
    static SpaceKind algebra_a(double a) { return {SpaceTag::algebra_a, a}; }
    static SpaceKind algebra_b(double a) { return {SpaceTag::algebra_b, a}; }
    static SpaceKind algebra_c(double d) { return {SpaceTag::algebra_c, 0, d}; }
    static SpaceKind lkt(double kappa, double tau) { return {SpaceTag::lkt, 0, 0, kappa, tau}; }
    static SpaceKind su12() { return {SpaceTag::su12, 0, 0, -4, 1}; }
    static SpaceKind de_sitter() { return {SpaceTag::de_sitter}; }
    static SpaceKind anti_de_sitter() { return {SpaceTag::anti_de_sitter}; }
    static SpaceKind product_rminus_s2() { return {SpaceTag::product_rminus_s2}; }
    static SpaceKind product_h2xr(double a) { return {SpaceTag::product_h2xr, a}; }
    static SpaceKind product_rxs12(double a) { return {SpaceTag::product_rxs12, a}; }
    static SpaceKind product_rxh12(double d) { return {SpaceTag::product_rxh12, 0, d}; }
    static SpaceKind euclidean3() { return {SpaceTag::euclidean3}; }

    bool is_group() const;
    bool is_quadric() const;  // de Sitter, anti-de Sitter, R_- x S^2
    double sigma() const;     // kappa / (2 tau) for the L(kappa,tau) family
    void validate() const;
    std::string name() const;
};

SpaceKind space_from_name(const std::string& name, double alpha, double delta, double kappa, double tau);

// Tensor of 27 numbers indexed [i][j][k], zero based.
using Tensor3 = std::array<double, 27>;
inline constexpr int t3(int i, int j, int k) { return 9 * i + 3 * j + k; }

struct LieAlgebra3 {
    SpaceKind kind;
    std::array<int, 3> eps{1, 1, -1};
    Tensor3 c{};      // [e_i, e_j] = sum_k c_ij^k e_k
    Tensor3 gamma{};  // Gamma_ij^k = <Gamma(e_i) e_j, e_k>

    Signature signature() const;
    Eigen::Vector3d bracket(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const;
    // Matrix of Gamma(X) acting on algebra coordinates.
    Eigen::Matrix3d gamma_matrix(const Eigen::Vector3d& x) const;
    double inner(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const;

    double jacobi_residual() const;
    double torsion_residual() const;
    double metric_residual() const;
    double antisymmetry_residual() const;
};

LieAlgebra3 make_algebra(const SpaceKind& kind);

struct GammaOf {
    SkewOperator op;
    Multivector bivector;
};
GammaOf gamma_of(const LieAlgebra3& alg, const Eigen::Vector3d& x);

class DomainExit : public std::runtime_error {
public:
    DomainExit(const std::string& what, Eigen::Vector3d last) : std::runtime_error(what), last_valid(std::move(last)) {}
    Eigen::Vector3d last_valid;
};

struct GroupPoint {
    Eigen::MatrixXcd mat;    // matrix realization
    Eigen::Vector3d coords;  // coordinate realization
};

enum class GroupBackend { matrix, coordinate };

class GroupModel {
public:
    explicit GroupModel(const SpaceKind& kind);

    GroupBackend backend() const { return backend_; }
    const LieAlgebra3& algebra() const { return alg_; }
    const std::array<Eigen::MatrixXcd, 3>& basis_images() const { return basis_; }

    GroupPoint identity() const;
    GroupPoint from_coords(const Eigen::Vector3d& x) const;
    // g exp(t a) for matrices; time-t flow of sum a^i E_i for coordinates.
    GroupPoint mul_exp(const GroupPoint& g, const Eigen::Vector3d& a, double t) const;
    Eigen::MatrixXcd rep(const Eigen::Vector3d& a) const;
    // Real coordinates of an algebra element given as a matrix.
    Eigen::Vector3d decompose(const Eigen::MatrixXcd& m) const;
    // Left-translated velocity omega_g(dg).
    Eigen::Vector3d maurer_cartan(const GroupPoint& g, const GroupPoint& dg) const;
    // Size of the motion from a to b: ||log(a^-1 b)|| or coordinate distance.
    double distance(const GroupPoint& a, const GroupPoint& b) const;
    // Point in R^3 used for meshes and pointwise comparisons.
    Eigen::Vector3d position(const GroupPoint& g) const;

    // Coordinate backend: frame fields E_1, E_2, E_3 as columns at x.
    Eigen::Matrix3d frame(const Eigen::Vector3d& x) const;
    bool in_domain(const Eigen::Vector3d& x) const;
    // Coordinate backend: metric tensor of the model at x.
    Eigen::Matrix3d metric(const Eigen::Vector3d& x) const;

    // Max deviation of basis commutators from the structure constants.
    double commutator_residual() const;
    // Coordinate backend: finite-difference frame brackets vs structure constants.
    double frame_bracket_residual(const Eigen::Vector3d& x, double h) const;

private:
    SpaceKind kind_;
    LieAlgebra3 alg_;
    GroupBackend backend_;
    std::array<Eigen::MatrixXcd, 3> basis_;
    int dim_ = 0;
};

struct DarbouxResult {
    std::vector<GroupPoint> points;  // row-major over the grid
    // Max over interior plaquettes of the loop defect divided by the plaquette
    // area: a discrete curvature, O(h^2) for integrable data, O(1) otherwise.
    double residual = 0;
    std::vector<double> plaquette;  // per plaquette, (nu-1)*(nv-1), same scaling
};

// F with F^*omega = xi. xi_u, xi_v are the algebra values of xi on the
// coordinate directions at each node. Row-first integrates the base row along
// u and then every column along v; otherwise the base column first.
DarbouxResult darboux_integrate(const GroupModel& model, const Grid& grid, const std::vector<Eigen::Vector3d>& xi_u,
                                const std::vector<Eigen::Vector3d>& xi_v, const GroupPoint& base, bool row_first = true);

GroupPoint operator+(const GroupPoint& a, const GroupPoint& b);
GroupPoint operator-(const GroupPoint& a, const GroupPoint& b);
GroupPoint operator*(double s, const GroupPoint& a);

}  // namespace spinsurf
