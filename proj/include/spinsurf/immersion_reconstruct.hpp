#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinsurf/spinor_field.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

// xi(d/du), xi(d/dv) at every node in ambient coordinates: Lie algebra
// coordinates for group kinds, R^4 for quadrics.
struct XiForm {
    SpaceKind kind;
    Grid grid;
    std::vector<Eigen::VectorXd> du, dv;
    double unit_defect = 0;  // max over nodes, checked against the precondition
    // Max deviation between the direct pairing and the component formula in
    // psi+-, negative when not evaluated (extrinsic or Lorentzian inputs).
    double explicit_defect = -1;
};

// Tolerance on the unit constraint accepted by xi_form and reconstruct.
inline constexpr double unit_tolerance = 1e-6;
// Agreement required between the two xi evaluations for intrinsic fields.
inline constexpr double explicit_tolerance = 1e-10;

// <<X . phi, phi>> = tau(phi) X phi for a tangent vector in frame components,
// as an element of the field's algebra.
Multivector xi_pairing(const SpinorSpace& s, const Multivector& phi, const Eigen::Vector2d& x);

// The same pairing for an intrinsic Riemannian spinor, assembled from the
// split psi = psi+ + psi- in the quaternion picture:
//   2 Im<X psi-, psi+> e_0 + Re(w) e_1 + Im(w) e_2,
//   w = <X psi+, alpha psi+> - <X psi-, alpha psi->,
// with alpha right multiplication by J and <a,b> = a.b + i a.(b I).
// Returns the (e_0, e_1, e_2) components.
Eigen::Vector3d xi_explicit(const Multivector& psi_star, const Eigen::Vector2d& x);

// Throws std::invalid_argument when the field does not match the space or
// violates the unit constraint, std::runtime_error when the two intrinsic
// evaluations disagree beyond explicit_tolerance.
XiForm xi_form(const SpinorField& field, const SpaceKind& kind);

// Normal field <<N . phi, phi>> in ambient coordinates.
std::vector<Eigen::VectorXd> spinor_normals(const SpinorField& field, const SpaceKind& kind);

struct EtaField {
    std::vector<double> values;
    double closedness = 0;  // max interior loop defect of the 1-form over the plaquette area
};

// eta with d eta(X) = -<X, T> and eta(anchor) = 0, by the trapezoid rule along
// the anchor row and then every column. T in frame components. Throws
// std::runtime_error when closedness exceeds `tolerance`.
EtaField integrate_eta(const Chart& chart, const std::vector<Eigen::Vector2d>& t, int anchor_i = 0, int anchor_j = 0,
                       double tolerance = 1e-1);

// Gauge fixing and inputs of the reconstruction. Groups start the Darboux
// integral at node (0,0) from `base` (identity when empty). R_- x S^2 needs the
// frame components T, f of e_0 from `data` and puts `time` at node (0,0).
struct ReconstructOptions {
    std::optional<GroupPoint> base;
    double time = 0;
    const GeometryData* data = nullptr;
    // Killing residual of the field as measured by the caller; reconstruct
    // refuses fields whose residual exceeds `threshold`.
    std::optional<double> residual;
    double threshold = 1e-2;
    double eta_tolerance = 1e-1;
};

struct Reconstruction {
    ImmersionField immersion;
    XiForm xi;
    double integrability = 0;  // group: Darboux plaquette defect; R_- x S^2: closedness of d eta
    double spin_drift = 0;     // quadrics: max distance between phi and its snapped unit spinor
    // R_- x S^2 only
    double e0_deviation = 0;   // max |<<e_0 phi, phi>> - average|
    double orthogonality = 0;  // max |<<<e_0 phi, phi>>, <<nu phi, phi>>>| per node
    std::vector<double> eta;
};

// Quadric kinds never integrate: F = <<nu phi, phi>> after snapping phi to
// Spin, and R_- x S^2 assembles eta E + P with E = <<e_0 phi, phi>> snapped to
// its average and boosted onto the time axis. Group kinds integrate xi with
// darboux_integrate. Throws std::invalid_argument for a refused or
// inconsistent input; DomainExit from the group backend propagates.
Reconstruction reconstruct(const SpaceKind& kind, const SpinorField& field, const ReconstructOptions& options = {});

struct ImmersionReport {
    std::vector<ResidualField> defects;  // isometry, normal, second_form, containment

    double max_defect() const;
    const ResidualField& get(const std::string& name) const;
};

// (a) |g_induced - g|, (b) |<dF(e_a), N>| against `normals` (the data's frame
// when empty), (c) |h_F - h_data|, (d) quadric containment. Interior maxima
// are O(h^2) on consistent inputs; containment is taken over every node.
ImmersionReport verify_immersion(const ImmersionField& f, const Chart& chart, const GeometryData& data,
                                 const std::vector<Eigen::VectorXd>& normals = {});

// dF(X) - xi(X) at interior nodes, the discrete form of F^* omega = xi.
ResidualField xi_defect(const ImmersionField& f, const XiForm& xi);

// Ambient isometry matching the adapted frame and position of `f` at `node`
// to those of `reference`. Minkowski and Euclidean space use affine motions,
// matrix groups a left translation, de Sitter and anti-de Sitter a linear
// isometry, R_- x S^2 a time shift and a rotation of the sphere.
ImmersionField align_to(const ImmersionField& f, const ImmersionField& reference, const Chart& chart, std::size_t node);

// Max ambient distance between corresponding nodes (group positions or R^4).
double immersion_distance(const ImmersionField& a, const ImmersionField& b);

// Points in R^3 for meshes: group positions; quadrics projected (de Sitter
// x_s/|x_s| e^{asinh x_0}, anti-de Sitter (x_2, x_3, atan2(x_1, x_0)),
// R_- x S^2 e^t x).
std::vector<Eigen::Vector3d> mesh_positions(const ImmersionField& f);

// Row-major vertices, two triangles per grid cell. Fixed formatting, so equal
// inputs give byte-identical files.
void write_obj(std::ostream& out, const Grid& grid, const std::vector<Eigen::Vector3d>& points);
void write_ply(std::ostream& out, const Grid& grid, const std::vector<Eigen::Vector3d>& points);
// i,j,x0,x1,x2,x3 per node for quadric kinds.
void write_r4_csv(std::ostream& out, const ImmersionField& f);

}  // namespace spinsurf
