#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinsurf/grid.hpp"
#include "spinsurf/metric_lie_group.hpp"

namespace spinsurf {

enum class SurfaceSignature { riemannian, lorentzian };

struct Chart {
    Grid grid;
    SurfaceSignature signature = SurfaceSignature::riemannian;
    std::vector<Eigen::Matrix2d> metric;      // g_ab in coordinates
    std::vector<Eigen::Matrix2d> frame;       // column a = coordinate components of e_a
    std::vector<Eigen::Vector2d> connection;  // omega_12(e_1), omega_12(e_2)

    std::array<int, 2> eps() const;
    int eps_normal() const { return signature == SurfaceSignature::riemannian ? -1 : 1; }
    // Frame components of the coordinate direction d/du (dir 0) or d/dv (dir 1).
    Eigen::Vector2d coordinate_in_frame(std::size_t k, int dir) const;
    // Metric pairing of two vectors given in frame components.
    double inner(const Eigen::Vector2d& x, const Eigen::Vector2d& y) const;
    // Max of |g(e_i,e_j) - eps_i delta_ij| over nodes.
    double frame_defect() const;
};

// Frames by Gram-Schmidt on the coordinate vectors (d/du normalized first) and
// the connection from levi_civita_surface. Lorentzian charts need g_uu > 0.
Chart make_chart(const Grid& grid, SurfaceSignature sig, std::vector<Eigen::Matrix2d> metric);

// omega_12(e_k) = <nabla_{e_k} e_1, e_2>, computed from finite-difference frame
// brackets. Throws frame_branch_error when neighbouring frames flip.
std::vector<Eigen::Vector2d> levi_civita_surface(const Chart& chart);

class FrameBranchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateSurface : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Position of each node in the ambient space.
struct ImmersionField {
    SpaceKind kind;
    Grid grid;
    std::vector<GroupPoint> group;         // group kinds
    std::vector<Eigen::Vector4d> quadric;  // quadric kinds, ambient R^4 coordinates

    std::size_t size() const { return kind.is_group() ? group.size() : quadric.size(); }
};

// How ambient vectors sit inside the spinor algebra. Ambient coordinate c maps
// to algebra basis vector coord_index[c]; the adapted frame (e_1, e_2, N, nu)
// is placed on algebra vectors role[0..3].
struct AmbientModel {
    Signature algebra;
    int dim = 3;
    std::array<int, 4> coord_index{0, 1, 2, 3};
    std::array<int, 4> role{-1, -1, -1, -1};
    std::array<int, 4> ambient_metric{1, 1, 1, 1};

    int frame_size() const { return dim; }  // e_1, e_2, N and, for quadrics, nu
    double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    Multivector to_algebra(const Eigen::VectorXd& ambient) const;
    Eigen::VectorXd from_algebra(const Multivector& v) const;
    // Ambient vector -> element placed on the adapted role r.
    Multivector role_vector(int r) const { return Multivector::basis(algebra, role[static_cast<std::size_t>(r)]); }
};

AmbientModel ambient_model(const SpaceKind& kind, SurfaceSignature sig);
double ambient_inner(const SpaceKind& kind, const Eigen::Vector4d& x, const Eigen::Vector4d& y);
// Value of <x,x> on the quadric: +1 de Sitter, -1 anti-de Sitter; R_- x S^2 uses the space factor.
double quadric_defect(const SpaceKind& kind, const Eigen::Vector4d& x);

struct GeometryData {
    SpaceKind kind;
    SurfaceSignature signature = SurfaceSignature::riemannian;
    std::vector<Eigen::Matrix2d> second_form;  // h(e_a, e_b)
    std::vector<Eigen::Matrix2d> shape;        // column b = S(e_b) in frame components
    std::vector<double> mean;                  // H = tr S / 2
    std::vector<Eigen::MatrixXd> ambient_frame;  // columns e_1, e_2, N (, nu) in ambient coordinates
    std::vector<std::array<Eigen::Vector2d, 3>> t;  // T_i in frame components (group kinds)
    std::vector<Eigen::Vector3d> nu;                // nu_i (group kinds)
    std::vector<Eigen::Vector2d> t_single;  // T: vertical part (L(kappa,tau)) or e_0 part (R_- x S^2)
    std::vector<double> f_single;           // nu (L(kappa,tau)) or f (R_- x S^2)

    std::size_t size() const { return shape.size(); }
    bool has_group_fields() const { return !t.empty(); }
    bool has_single_fields() const { return !t_single.empty(); }
};

// Shape data only, for solving against prescribed coefficients. `shape_of`
// returns S in frame components at a node.
GeometryData prescribed_shape(const Chart& chart, const SpaceKind& kind,
                              const std::function<Eigen::Matrix2d(std::size_t)>& shape_of);
// Fill S, h and H from second_form or from shape (whichever is set).
void complete_shape(GeometryData& data, const Chart& chart);

// Finite-difference induced metric of an immersion.
std::vector<Eigen::Matrix2d> induced_metric(const ImmersionField& f);
// Derivatives of F along d/du, d/dv at each node in ambient coordinates
// (algebra coordinates for group kinds, R^4 for quadrics).
std::array<std::vector<Eigen::VectorXd>, 2> tangent_fields(const ImmersionField& f);

GeometryData extract_geometry(const ImmersionField& f, const Chart& chart);

struct ChartBundle {
    Chart chart;
    ImmersionField immersion;
    std::string family;
};

using FamilyParams = std::map<std::string, double>;

// Families: plane, plane_polar, pseudosphere, lorentz_catenoid (Minkowski);
// group_graph, vertical_cylinder (any group kind); enneper, sphere_cap
// (euclidean3); s2_slice (de Sitter); h2_slice (anti-de Sitter);
// rs2_slice (R_- x S^2, param tilt). Params override the default domain with
// u0,u1,v0,v1.
ChartBundle build_chart(const std::string& family, const SpaceKind& kind, const FamilyParams& params, int nu, int nv);
std::vector<std::string> family_names();

struct ResidualField {
    std::string name;
    std::vector<double> values;  // per node, zero on boundary nodes
    double max_interior = 0;
    double l2_interior = 0;  // root mean square over interior nodes
};

struct CompatibilityReport {
    std::vector<ResidualField> equations;
    double max_residual() const;
    const ResidualField& get(const std::string& name) const;
};

CompatibilityReport check_compatibility(const Chart& chart, const SpaceKind& kind, const GeometryData& data);

// Tangent frame derivative helpers shared with the spinor module.
// Derivative of a node field along frame vector e_a.
template <class T>
T frame_derivative(const Chart& chart, const std::vector<T>& f, int i, int j, int a);

}  // namespace spinsurf

#include "spinsurf/finite_difference.hpp"

namespace spinsurf {

template <class T>
T frame_derivative(const Chart& chart, const std::vector<T>& f, int i, int j, int a) {
    const auto k = chart.grid.index(i, j);
    const Eigen::Matrix2d& fr = chart.frame[k];
    return fr(0, a) * grid_partial(chart.grid, f, i, j, 0) + fr(1, a) * grid_partial(chart.grid, f, i, j, 1);
}

}  // namespace spinsurf
