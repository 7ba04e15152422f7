#include "spinsurf/surface_chart.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "spinsurf/finite_difference.hpp"

namespace spinsurf {

std::array<int, 2> Chart::eps() const {
    if (signature == SurfaceSignature::riemannian) return {1, 1};
    return {1, -1};
}

Eigen::Vector2d Chart::coordinate_in_frame(std::size_t k, int dir) const {
    return frame[k].inverse().col(dir);
}

double Chart::inner(const Eigen::Vector2d& x, const Eigen::Vector2d& y) const {
    const auto e = eps();
    return e[0] * x(0) * y(0) + e[1] * x(1) * y(1);
}

double Chart::frame_defect() const {
    const auto e = eps();
    double worst = 0;
    for (std::size_t k = 0; k < metric.size(); ++k) {
        const Eigen::Matrix2d gram = frame[k].transpose() * metric[k] * frame[k];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) worst = std::max(worst, std::abs(gram(a, b) - (a == b ? e[static_cast<std::size_t>(a)] : 0)));
    }
    return worst;
}

Chart make_chart(const Grid& grid, SurfaceSignature sig, std::vector<Eigen::Matrix2d> metric) {
    if (static_cast<int>(metric.size()) != grid.size()) throw std::invalid_argument("make_chart: metric size differs from grid");
    Chart c;
    c.grid = grid;
    c.signature = sig;
    c.frame.resize(metric.size());
    for (std::size_t k = 0; k < metric.size(); ++k) {
        Eigen::Matrix2d& g = metric[k];
        if (!g.allFinite()) throw DegenerateSurface("non-finite metric at node " + grid.node_name(k));
        g = 0.5 * (g + g.transpose()).eval();
        const double det = g.determinant();
        if (std::abs(det) < 1e-8) throw DegenerateSurface("degenerate metric at node " + grid.node_name(k));
        if (sig == SurfaceSignature::riemannian && (det < 0 || g(0, 0) <= 0))
            throw DegenerateSurface("metric is not positive definite at node " + grid.node_name(k));
        if (sig == SurfaceSignature::lorentzian && (det > 0 || g(0, 0) <= 0))
            throw DegenerateSurface("Lorentzian chart needs a spacelike first coordinate at node " + grid.node_name(k));
        Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
        f(0, 0) = 1.0 / std::sqrt(g(0, 0));
        // d/dv minus its projection on d/du; the second coordinate component is 1 > 0
        const Eigen::Vector2d n(-g(0, 1) / g(0, 0), 1.0);
        const double nn = n.dot(g * n);
        f.col(1) = n / std::sqrt(std::abs(nn));
        c.frame[k] = f;
    }
    c.metric = std::move(metric);
    c.connection = levi_civita_surface(c);
    return c;
}

std::vector<Eigen::Vector2d> levi_civita_surface(const Chart& chart) {
    const Grid& gr = chart.grid;
    const auto e = chart.eps();
    const auto n = static_cast<std::size_t>(gr.size());
    if (chart.frame.size() != n || chart.metric.size() != n) throw std::invalid_argument("levi_civita_surface: chart fields incomplete");
    for (int j = 0; j < gr.nv; ++j)
        for (int i = 0; i < gr.nu; ++i) {
            const auto k = gr.index(i, j);
            for (const auto nb : {std::pair{i + 1, j}, std::pair{i, j + 1}}) {
                if (nb.first >= gr.nu || nb.second >= gr.nv) continue;
                const auto kn = gr.index(nb.first, nb.second);
                for (int a = 0; a < 2; ++a) {
                    const double p = e[static_cast<std::size_t>(a)] *
                                     chart.frame[k].col(a).dot(chart.metric[k] * chart.frame[kn].col(a));
                    if (p < 0)
                        throw FrameBranchError("frame discontinuity between nodes " + gr.node_name(k) + " and " + gr.node_name(kn));
                }
            }
        }
    std::vector<Eigen::Vector2d> omega(n);
    for (int j = 0; j < gr.nv; ++j)
        for (int i = 0; i < gr.nu; ++i) {
            const auto k = gr.index(i, j);
            const Eigen::Matrix2d du = grid_partial(gr, chart.frame, i, j, 0);
            const Eigen::Matrix2d dv = grid_partial(gr, chart.frame, i, j, 1);
            const Eigen::Matrix2d& f = chart.frame[k];
            // [e1, e2]^c = e1^b d_b e2^c - e2^b d_b e1^c
            const Eigen::Vector2d d_e2 = f(0, 0) * du.col(1) + f(1, 0) * dv.col(1);
            const Eigen::Vector2d d_e1 = f(0, 1) * du.col(0) + f(1, 1) * dv.col(0);
            const Eigen::Vector2d c = f.inverse() * (d_e2 - d_e1);
            omega[k] = Eigen::Vector2d(-e[0] * c(0), -e[1] * c(1));
        }
    return omega;
}

// ---------------------------------------------------------------------------

double AmbientModel::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += ambient_metric[static_cast<std::size_t>(i)] * x(i) * y(i);
    return s;
}

Multivector AmbientModel::to_algebra(const Eigen::VectorXd& ambient) const {
    Multivector m(algebra);
    for (int i = 0; i < dim; ++i) m[1u << coord_index[static_cast<std::size_t>(i)]] = ambient(i);
    return m;
}

Eigen::VectorXd AmbientModel::from_algebra(const Multivector& v) const {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = v[1u << coord_index[static_cast<std::size_t>(i)]];
    return x;
}

AmbientModel ambient_model(const SpaceKind& kind, SurfaceSignature sig) {
    AmbientModel m;
    if (kind.tag == SpaceTag::euclidean3) {
        if (sig != SurfaceSignature::riemannian) throw std::invalid_argument("euclidean3 carries Riemannian surfaces only");
        m.algebra = Signature(0, 3);
        m.dim = 3;
        m.coord_index = {0, 1, 2, 3};
        m.role = {0, 1, 2, -1};
        m.ambient_metric = {1, 1, 1, 1};
        return m;
    }
    if (kind.is_group()) {
        const auto alg = make_algebra(kind);
        m.algebra = Signature(1, 2);
        m.dim = 3;
        m.coord_index = {1, 2, 0, 3};
        m.ambient_metric = {alg.eps[0], alg.eps[1], alg.eps[2], 1};
        if (sig == SurfaceSignature::riemannian) m.role = {1, 2, 0, -1};
        else m.role = {1, 0, 2, -1};
        return m;
    }
    if (sig != SurfaceSignature::riemannian)
        throw std::invalid_argument("quadric targets carry Riemannian surfaces only: " + kind.name());
    m.dim = 4;
    m.coord_index = {0, 1, 2, 3};
    if (kind.tag == SpaceTag::anti_de_sitter) {
        m.algebra = Signature(2, 2);
        m.ambient_metric = {-1, -1, 1, 1};
        m.role = {2, 3, 1, 0};
    } else {
        m.algebra = Signature(1, 3);
        m.ambient_metric = {-1, 1, 1, 1};
        m.role = {1, 2, 0, 3};
    }
    return m;
}

double ambient_inner(const SpaceKind& kind, const Eigen::Vector4d& x, const Eigen::Vector4d& y) {
    const double t = kind.tag == SpaceTag::anti_de_sitter ? -x(1) * y(1) : x(1) * y(1);
    return -x(0) * y(0) + t + x(2) * y(2) + x(3) * y(3);
}

double quadric_defect(const SpaceKind& kind, const Eigen::Vector4d& x) {
    switch (kind.tag) {
    case SpaceTag::de_sitter: return ambient_inner(kind, x, x) - 1.0;
    case SpaceTag::anti_de_sitter: return ambient_inner(kind, x, x) + 1.0;
    case SpaceTag::product_rminus_s2: return x.tail<3>().squaredNorm() - 1.0;
    default: throw std::invalid_argument("quadric_defect: not a quadric kind");
    }
}

// Unit normal vector nu of the quadric at x (ambient coordinates).
static Eigen::Vector4d quadric_normal(const SpaceKind& kind, const Eigen::Vector4d& x) {
    if (kind.tag == SpaceTag::product_rminus_s2) {
        Eigen::Vector4d n = x;
        n(0) = 0;
        return n;
    }
    return x;
}

// ---------------------------------------------------------------------------

GeometryData prescribed_shape(const Chart& chart, const SpaceKind& kind,
                              const std::function<Eigen::Matrix2d(std::size_t)>& shape_of) {
    GeometryData d;
    d.kind = kind;
    d.signature = chart.signature;
    const auto n = static_cast<std::size_t>(chart.grid.size());
    d.shape.resize(n);
    for (std::size_t k = 0; k < n; ++k) d.shape[k] = shape_of(k);
    complete_shape(d, chart);
    return d;
}

void complete_shape(GeometryData& data, const Chart& chart) {
    const auto e = chart.eps();
    const auto n = static_cast<std::size_t>(chart.grid.size());
    if (data.second_form.size() == n && data.shape.size() != n) {
        data.shape.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) data.shape[k](b, a) = e[static_cast<std::size_t>(b)] * data.second_form[k](a, b);
    } else if (data.shape.size() == n) {
        data.second_form.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) data.second_form[k](a, b) = e[static_cast<std::size_t>(b)] * data.shape[k](b, a);
    } else {
        throw std::invalid_argument("complete_shape: neither S nor h is present on every node");
    }
    data.mean.resize(n);
    for (std::size_t k = 0; k < n; ++k) data.mean[k] = 0.5 * data.shape[k].trace();
}

std::array<std::vector<Eigen::VectorXd>, 2> tangent_fields(const ImmersionField& f) {
    const Grid& g = f.grid;
    if (static_cast<int>(f.size()) != g.size()) throw std::invalid_argument("immersion field size differs from its grid");
    std::array<std::vector<Eigen::VectorXd>, 2> out;
    for (auto& v : out) v.resize(f.size());
    if (f.kind.is_group()) {
        const GroupModel model(f.kind);
        for (int j = 0; j < g.nv; ++j)
            for (int i = 0; i < g.nu; ++i)
                for (int dir = 0; dir < 2; ++dir) {
                    const auto k = g.index(i, j);
                    out[static_cast<std::size_t>(dir)][k] = model.maurer_cartan(f.group[k], grid_partial(g, f.group, i, j, dir));
                }
    } else {
        for (int j = 0; j < g.nv; ++j)
            for (int i = 0; i < g.nu; ++i)
                for (int dir = 0; dir < 2; ++dir)
                    out[static_cast<std::size_t>(dir)][g.index(i, j)] = grid_partial(g, f.quadric, i, j, dir);
    }
    return out;
}

std::vector<Eigen::Matrix2d> induced_metric(const ImmersionField& f) {
    const auto tang = tangent_fields(f);
    // only the ambient inner product is used, which does not depend on the surface signature
    const AmbientModel m = ambient_model(f.kind, SurfaceSignature::riemannian);
    std::vector<Eigen::Matrix2d> g(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) g[k](a, b) = m.inner(tang[static_cast<std::size_t>(a)][k], tang[static_cast<std::size_t>(b)][k]);
    return g;
}

// Normal vector completing the adapted frame: orthogonal to the given columns,
// unit, and oriented so that the algebra-ordered frame has positive determinant.
static Eigen::VectorXd oriented_normal(const AmbientModel& m, const Eigen::MatrixXd& others, const std::string& where) {
    const int n = m.dim;
    Eigen::MatrixXd rows(others.cols(), n);
    for (int r = 0; r < others.cols(); ++r)
        for (int c = 0; c < n; ++c) rows(r, c) = m.ambient_metric[static_cast<std::size_t>(c)] * others(c, r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    Eigen::VectorXd normal = svd.matrixV().col(n - 1);
    const double nn = m.inner(normal, normal);
    if (std::abs(nn) < 1e-12) throw DegenerateSurface("null normal at node " + where);
    normal /= std::sqrt(std::abs(nn));
    Eigen::MatrixXd alg = Eigen::MatrixXd::Zero(n, n);
    auto place = [&](int r, const Eigen::VectorXd& amb) {
        for (int c = 0; c < n; ++c) alg(m.coord_index[static_cast<std::size_t>(c)], m.role[static_cast<std::size_t>(r)]) = amb(c);
    };
    place(0, others.col(0));
    place(1, others.col(1));
    place(2, normal);
    if (n == 4) place(3, others.col(2));
    if (alg.determinant() < 0) normal = -normal;
    return normal;
}

// d_a of the left-translated velocity xi_b (group kinds) or d_a d_b F
// (quadrics), with second-order stencils up to the boundary.
static Eigen::VectorXd second_tangent(const ImmersionField& f, const GroupModel* model,
                                      const std::array<std::vector<Eigen::VectorXd>, 2>& tang, int i, int j, int a, int b) {
    const Grid& g = f.grid;
    const auto k = g.index(i, j);
    if (!f.kind.is_group()) return grid_second(g, f.quadric, i, j, a, b);
    const GroupPoint d2 = grid_second(g, f.group, i, j, a, b);
    if (model->backend() == GroupBackend::matrix) {
        // d_a (F^-1 d_b F) = F^-1 d_a d_b F - xi_a xi_b
        const Eigen::MatrixXcd inv = f.group[k].mat.inverse();
        const Eigen::MatrixXcd m = inv * d2.mat - model->rep(tang[static_cast<std::size_t>(a)][k]) * model->rep(tang[static_cast<std::size_t>(b)][k]);
        return model->decompose(m);
    }
    // xi_b = E(x)^-1 d_b x, E the frame matrix
    const Eigen::Vector3d x = f.group[k].coords;
    const Eigen::Matrix3d einv = model->frame(x).inverse();
    const Eigen::Vector3d dax = grid_partial(g, f.group, i, j, a).coords;
    const Eigen::Vector3d dbx = grid_partial(g, f.group, i, j, b).coords;
    const std::function<Eigen::Matrix3d(double, double)> along = [&](double s, double) -> Eigen::Matrix3d {
        return model->frame(x + s * dax);
    };
    const Eigen::Matrix3d de = point_derivative(along, 0.0, 0.0, 0, 1e-4);
    return einv * d2.coords - einv * de * einv * dbx;
}

GeometryData extract_geometry(const ImmersionField& f, const Chart& chart) {
    const Grid& g = f.grid;
    if (g.nu != chart.grid.nu || g.nv != chart.grid.nv) throw std::invalid_argument("extract_geometry: chart and immersion grids differ");
    const AmbientModel m = ambient_model(f.kind, chart.signature);
    const auto tang = tangent_fields(f);
    const auto e = chart.eps();
    const int eps_n = chart.eps_normal();
    const auto n = f.size();

    GeometryData d;
    d.kind = f.kind;
    d.signature = chart.signature;
    d.second_form.resize(n);
    d.ambient_frame.resize(n);

    const bool group = f.kind.is_group();
    LieAlgebra3 alg;
    std::unique_ptr<GroupModel> model;
    if (group) {
        alg = make_algebra(f.kind);
        model = std::make_unique<GroupModel>(f.kind);
    }

    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            const auto k = g.index(i, j);
            const Eigen::Matrix2d gk = (Eigen::Matrix2d() << m.inner(tang[0][k], tang[0][k]), m.inner(tang[0][k], tang[1][k]),
                                        m.inner(tang[1][k], tang[0][k]), m.inner(tang[1][k], tang[1][k]))
                                           .finished();
            if (std::abs(gk.determinant()) < 1e-8) throw DegenerateSurface("degenerate induced metric at node " + g.node_name(k));
            const Eigen::Matrix2d& fr = chart.frame[k];
            Eigen::MatrixXd cols(m.dim, m.dim == 4 ? 3 : 2);
            cols.col(0) = fr(0, 0) * tang[0][k] + fr(1, 0) * tang[1][k];
            cols.col(1) = fr(0, 1) * tang[0][k] + fr(1, 1) * tang[1][k];
            if (m.dim == 4) cols.col(2) = quadric_normal(f.kind, f.quadric[k]);
            const Eigen::VectorXd normal = oriented_normal(m, cols, g.node_name(k));

            // second derivatives of F in coordinates, ambient connection included
            Eigen::Matrix2d hc;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    Eigen::VectorXd dd = second_tangent(f, model.get(), tang, i, j, a, b);
                    if (group) dd += alg.gamma_matrix(tang[static_cast<std::size_t>(a)][k]) * tang[static_cast<std::size_t>(b)][k];
                    hc(a, b) = m.inner(dd, normal);
                }
            hc = 0.5 * (hc + hc.transpose()).eval();
            d.second_form[k] = fr.transpose() * hc * fr;

            Eigen::MatrixXd full(m.dim, m.dim);
            full.col(0) = cols.col(0);
            full.col(1) = cols.col(1);
            full.col(2) = normal;
            if (m.dim == 4) full.col(3) = cols.col(2);
            d.ambient_frame[k] = full;
        }
    complete_shape(d, chart);

    if (group) {
        d.t.resize(n);
        d.nu.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::MatrixXd& fr = d.ambient_frame[k];
            for (int i = 0; i < 3; ++i) {
                const int ei = alg.eps[static_cast<std::size_t>(i)];
                for (int a = 0; a < 2; ++a) d.t[k][static_cast<std::size_t>(i)](a) = e[static_cast<std::size_t>(a)] * ei * fr(i, a);
                d.nu[k](i) = eps_n * ei * fr(i, 2);
            }
        }
        if (f.kind.tag == SpaceTag::lkt || f.kind.tag == SpaceTag::su12) {
            d.t_single.resize(n);
            d.f_single.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                d.t_single[k] = d.t[k][2];
                d.f_single[k] = d.nu[k](2);
            }
        }
    } else if (f.kind.tag == SpaceTag::product_rminus_s2) {
        d.t_single.resize(n);
        d.f_single.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::MatrixXd& fr = d.ambient_frame[k];
            // e_0 = T + f N with <e_0, v> = -v^0
            d.t_single[k] = Eigen::Vector2d(-e[0] * fr(0, 0), -e[1] * fr(0, 1));
            d.f_single[k] = fr(0, 2);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Test families

namespace {

struct Family {
    SurfaceSignature signature = SurfaceSignature::riemannian;
    std::array<double, 4> domain{0, 1, 0, 1};
    std::function<GroupPoint(double, double)> group;
    std::function<Eigen::Vector4d(double, double)> quadric;
};

double param(const FamilyParams& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void require(bool ok, const std::string& family, const SpaceKind& kind) {
    if (!ok) throw std::invalid_argument("family " + family + " is not defined for space " + kind.name());
}

GroupPoint translation(const GroupModel& m, const Eigen::Vector3d& x) {
    return m.mul_exp(m.identity(), x, 1.0);
}

// Inverse stereographic projection from the south pole: (0,0) maps to (0,0,1).
Eigen::Vector3d stereographic(double u, double v) {
    const double r2 = u * u + v * v;
    return Eigen::Vector3d(2 * u, 2 * v, 1 - r2) / (1 + r2);
}

Family make_family(const std::string& name, const SpaceKind& kind, const FamilyParams& p) {
    Family f;
    const bool mink = kind.tag == SpaceTag::minkowski_r12;
    if (name == "plane" || name == "plane_polar") {
        require(mink, name, kind);
        const double b = param(p, "boost", 0.3);
        const auto model = std::make_shared<GroupModel>(kind);
        const bool polar = name == "plane_polar";
        f.domain = polar ? std::array<double, 4>{1, 2, 0, 1} : std::array<double, 4>{-0.5, 0.5, -0.5, 0.5};
        f.group = [model, b, polar](double u, double v) {
            const double x = polar ? u * std::cos(v) : u, y = polar ? u * std::sin(v) : v;
            return translation(*model, Eigen::Vector3d(x * std::cosh(b), y, x * std::sinh(b)));
        };
    } else if (name == "pseudosphere") {
        require(mink, name, kind);
        const double r = param(p, "radius", 1.0);
        const auto model = std::make_shared<GroupModel>(kind);
        f.domain = {-0.4, 0.4, -0.4, 0.4};
        // lower sheet, so that the positively oriented normal is future pointing and S = id / r
        f.group = [model, r](double u, double v) {
            return translation(*model, Eigen::Vector3d(u, v, -std::sqrt(r * r + u * u + v * v)));
        };
    } else if (name == "lorentz_catenoid") {
        require(mink, name, kind);
        const double c = param(p, "neck", 1.0);
        const auto model = std::make_shared<GroupModel>(kind);
        f.domain = {1, 2, 0, 1.2};
        f.group = [model, c](double u, double v) {
            return translation(*model, Eigen::Vector3d(u * std::cos(v), u * std::sin(v), c * std::asinh(u / c)));
        };
    } else if (name == "group_graph") {
        require(kind.is_group() && kind.tag != SpaceTag::euclidean3, name, kind);
        const double a = param(p, "bend", 0.3), b = param(p, "twist", 0.2);
        const auto model = std::make_shared<GroupModel>(kind);
        f.domain = {-0.25, 0.25, -0.25, 0.25};
        f.group = [model, a, b](double u, double v) {
            const GroupPoint g1 = model->mul_exp(model->identity(), Eigen::Vector3d(1, 0, 0), u);
            const GroupPoint g2 = model->mul_exp(g1, Eigen::Vector3d(0, 1, 0), v);
            return model->mul_exp(g2, Eigen::Vector3d(0, 0, 1), 0.5 * a * (u * u - v * v) + b * u * v);
        };
    } else if (name == "vertical_cylinder") {
        require(kind.is_group() && kind.tag != SpaceTag::euclidean3, name, kind);
        const double th = param(p, "heading", 0.4);
        const auto model = std::make_shared<GroupModel>(kind);
        f.signature = SurfaceSignature::lorentzian;
        f.domain = {-0.4, 0.4, -0.4, 0.4};
        f.group = [model, th](double u, double v) {
            const GroupPoint g1 = model->mul_exp(model->identity(), Eigen::Vector3d(std::cos(th), std::sin(th), 0), u);
            return model->mul_exp(g1, Eigen::Vector3d(0, 0, 1), v);
        };
    } else if (name == "enneper" || name == "sphere_cap") {
        require(kind.tag == SpaceTag::euclidean3, name, kind);
        const auto model = std::make_shared<GroupModel>(kind);
        if (name == "enneper") {
            f.domain = {-0.5, 0.5, -0.5, 0.5};
            f.group = [model](double u, double v) {
                return translation(*model, Eigen::Vector3d(u - u * u * u / 3 + u * v * v, v - v * v * v / 3 + v * u * u, u * u - v * v));
            };
        } else {
            // polar angle u, azimuth v on the unit sphere
            f.domain = {0.6, 1.4, 0, 1};
            f.group = [model](double u, double v) {
                return translation(*model, Eigen::Vector3d(std::sin(u) * std::cos(v), std::sin(u) * std::sin(v), std::cos(u)));
            };
        }
    } else if (name == "s2_slice") {
        require(kind.tag == SpaceTag::de_sitter, name, kind);
        f.domain = {-0.4, 0.4, -0.4, 0.4};
        f.quadric = [](double u, double v) {
            const Eigen::Vector3d x = stereographic(u, v);
            return Eigen::Vector4d(0, x(0), x(1), x(2));
        };
    } else if (name == "h2_slice") {
        require(kind.tag == SpaceTag::anti_de_sitter, name, kind);
        f.domain = {-0.5, 0.5, -0.5, 0.5};
        f.quadric = [](double u, double v) { return Eigen::Vector4d(std::sqrt(1 + u * u + v * v), 0, u, v); };
    } else if (name == "rs2_slice") {
        require(kind.tag == SpaceTag::product_rminus_s2, name, kind);
        const double t0 = param(p, "t0", 0.0), tilt = param(p, "tilt", 0.0);
        f.domain = {-0.4, 0.4, -0.4, 0.4};
        f.quadric = [t0, tilt](double u, double v) {
            const Eigen::Vector3d x = stereographic(u, v);
            return Eigen::Vector4d(t0 + tilt * (u + 0.5 * v * v), x(0), x(1), x(2));
        };
    } else {
        throw std::invalid_argument("unknown surface family: " + name);
    }
    f.domain[0] = param(p, "u0", f.domain[0]);
    f.domain[1] = param(p, "u1", f.domain[1]);
    f.domain[2] = param(p, "v0", f.domain[2]);
    f.domain[3] = param(p, "v1", f.domain[3]);
    return f;
}

}  // namespace

std::vector<std::string> family_names() {
    return {"plane", "plane_polar", "pseudosphere", "lorentz_catenoid", "group_graph", "vertical_cylinder",
            "enneper", "sphere_cap", "s2_slice", "h2_slice", "rs2_slice"};
}

ChartBundle build_chart(const std::string& family, const SpaceKind& kind, const FamilyParams& params, int nu, int nv) {
    kind.validate();
    if (nu < 8 || nv < 8) throw std::invalid_argument("build_chart: grid too small, need at least 8x8 nodes");
    const Family fam = make_family(family, kind, params);
    const Grid grid = Grid::over(nu, nv, fam.domain[0], fam.domain[1], fam.domain[2], fam.domain[3]);
    const AmbientModel am = ambient_model(kind, fam.signature);

    ChartBundle out;
    out.family = family;
    out.immersion.kind = kind;
    out.immersion.grid = grid;
    std::vector<Eigen::Matrix2d> metric(static_cast<std::size_t>(grid.size()));
    std::unique_ptr<GroupModel> model;
    if (kind.is_group()) model = std::make_unique<GroupModel>(kind);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            const double u = grid.u(i), v = grid.v(j);
            std::array<Eigen::VectorXd, 2> d;
            if (kind.is_group()) {
                const GroupPoint x = fam.group(u, v);
                for (int dir = 0; dir < 2; ++dir)
                    d[static_cast<std::size_t>(dir)] = model->maurer_cartan(x, point_derivative(fam.group, u, v, dir));
                out.immersion.group.push_back(x);
            } else {
                for (int dir = 0; dir < 2; ++dir) d[static_cast<std::size_t>(dir)] = point_derivative(fam.quadric, u, v, dir);
                out.immersion.quadric.push_back(fam.quadric(u, v));
            }
            auto& g = metric[grid.index(i, j)];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) g(a, b) = am.inner(d[static_cast<std::size_t>(a)], d[static_cast<std::size_t>(b)]);
        }
    out.chart = make_chart(grid, fam.signature, std::move(metric));
    return out;
}

// ---------------------------------------------------------------------------
// Compatibility equations

double CompatibilityReport::max_residual() const {
    double m = 0;
    for (const auto& r : equations) m = std::max(m, r.max_interior);
    return m;
}

const ResidualField& CompatibilityReport::get(const std::string& name) const {
    for (const auto& r : equations)
        if (r.name == name) return r;
    throw std::invalid_argument("no residual named " + name);
}

namespace {

struct ResidualBuilder {
    const Grid& grid;
    ResidualField field;

    ResidualBuilder(const Grid& g, std::string name) : grid(g) {
        field.name = std::move(name);
        field.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    }
    void set(int i, int j, double v) { field.values[grid.index(i, j)] = v; }
    ResidualField finish() {
        double sum = 0;
        int count = 0;
        for (int j = 1; j + 1 < grid.nv; ++j)
            for (int i = 1; i + 1 < grid.nu; ++i) {
                const double v = field.values[grid.index(i, j)];
                field.max_interior = std::max(field.max_interior, v);
                sum += v * v;
                ++count;
            }
        field.l2_interior = count ? std::sqrt(sum / count) : 0.0;
        return field;
    }
};

// Covariant derivative of a tangent field (frame components) along e_b.
Eigen::Vector2d covariant_tangent(const Chart& c, const std::vector<Eigen::Vector2d>& t, int i, int j, int b) {
    const auto k = c.grid.index(i, j);
    const auto e = c.eps();
    const Eigen::Vector2d dt = frame_derivative(c, t, i, j, b);
    const double w = c.connection[k](b);
    return Eigen::Vector2d(dt(0) - e[0] * w * t[k](1), dt(1) + e[1] * w * t[k](0));
}

Eigen::Vector2d basis2(int b) { return b == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1); }

// J: rotation by +pi/2 on Riemannian charts; on Lorentzian charts the
// analogous map e_1 -> e_2, e_2 -> e_1.
Eigen::Vector2d rotate(const Chart& c, const Eigen::Vector2d& x) {
    if (c.signature == SurfaceSignature::riemannian) return Eigen::Vector2d(-x(1), x(0));
    return Eigen::Vector2d(x(1), x(0));
}

}  // namespace

CompatibilityReport check_compatibility(const Chart& chart, const SpaceKind& kind, const GeometryData& data) {
    const Grid& g = chart.grid;
    const auto n = static_cast<std::size_t>(g.size());
    if (data.shape.size() != n) throw std::invalid_argument("check_compatibility: shape operator missing");
    const auto e = chart.eps();
    const int eps_n = chart.eps_normal();
    CompatibilityReport rep;

    auto h_of = [&](std::size_t k, const Eigen::Vector2d& x, const Eigen::Vector2d& y) { return x.dot(data.second_form[k] * y); };

    if (kind.is_group() && kind.tag != SpaceTag::euclidean3) {
        if (!data.has_group_fields()) throw std::invalid_argument("check_compatibility: T_i and nu_i are required for " + kind.name());
        const auto alg = make_algebra(kind);
        ResidualBuilder ortho(g, "orthonormality");
        std::array<std::vector<Eigen::Vector2d>, 3> tj;
        std::array<std::vector<double>, 3> nuj;
        for (int a = 0; a < 3; ++a) {
            tj[static_cast<std::size_t>(a)].resize(n);
            nuj[static_cast<std::size_t>(a)].resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                tj[static_cast<std::size_t>(a)][k] = data.t[k][static_cast<std::size_t>(a)];
                nuj[static_cast<std::size_t>(a)][k] = data.nu[k](a);
            }
        }
        std::vector<ResidualBuilder> dt, dnu;
        for (int jj = 0; jj < 3; ++jj) {
            dt.emplace_back(g, "dT" + std::to_string(jj + 1));
            dnu.emplace_back(g, "dnu" + std::to_string(jj + 1));
        }
        for (int jv = 0; jv < g.nv; ++jv)
            for (int iu = 0; iu < g.nu; ++iu) {
                const auto k = g.index(iu, jv);
                double o = 0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        const double lhs = chart.inner(data.t[k][static_cast<std::size_t>(a)], data.t[k][static_cast<std::size_t>(b)]) +
                                           eps_n * data.nu[k](a) * data.nu[k](b);
                        o = std::max(o, std::abs(lhs - (a == b ? alg.eps[static_cast<std::size_t>(a)] : 0)));
                    }
                ortho.set(iu, jv, o);
                if (!g.interior(iu, jv)) continue;
                for (int jj = 0; jj < 3; ++jj) {
                    double rt = 0, rn = 0;
                    for (int b = 0; b < 2; ++b) {
                        const Eigen::Vector2d x = basis2(b);
                        Eigen::Vector2d expect_t = data.nu[k](jj) * (data.shape[k] * x);
                        double expect_n = -eps_n * h_of(k, x, data.t[k][static_cast<std::size_t>(jj)]);
                        for (int i = 0; i < 3; ++i)
                            for (int kk = 0; kk < 3; ++kk) {
                                const double gam = alg.gamma[static_cast<std::size_t>(t3(i, jj, kk))];
                                if (gam == 0) continue;
                                const double w = alg.eps[static_cast<std::size_t>(i)] * alg.eps[static_cast<std::size_t>(kk)] * gam *
                                                 chart.inner(x, data.t[k][static_cast<std::size_t>(i)]);
                                expect_t += w * data.t[k][static_cast<std::size_t>(kk)];
                                expect_n += w * data.nu[k](kk);
                            }
                        const Eigen::Vector2d lhs_t = covariant_tangent(chart, tj[static_cast<std::size_t>(jj)], iu, jv, b);
                        const double lhs_n = frame_derivative(chart, nuj[static_cast<std::size_t>(jj)], iu, jv, b);
                        rt = std::max(rt, (lhs_t - expect_t).cwiseAbs().maxCoeff());
                        rn = std::max(rn, std::abs(lhs_n - expect_n));
                    }
                    dt[static_cast<std::size_t>(jj)].set(iu, jv, rt);
                    dnu[static_cast<std::size_t>(jj)].set(iu, jv, rn);
                }
            }
        rep.equations.push_back(ortho.finish());
        for (int jj = 0; jj < 3; ++jj) {
            rep.equations.push_back(dt[static_cast<std::size_t>(jj)].finish());
            rep.equations.push_back(dnu[static_cast<std::size_t>(jj)].finish());
        }
    }

    const bool lkt = kind.tag == SpaceTag::lkt || kind.tag == SpaceTag::su12;
    const bool rs2 = kind.tag == SpaceTag::product_rminus_s2;
    if (lkt || rs2) {
        if (!data.has_single_fields()) throw std::invalid_argument("check_compatibility: T and nu/f are required for " + kind.name());
        const double tau = kind.tau;
        ResidualBuilder c0(g, lkt ? "comp0" : "norm"), c1(g, lkt ? "comp1" : "dT"), c2(g, lkt ? "comp2" : "df");
        for (int jv = 0; jv < g.nv; ++jv)
            for (int iu = 0; iu < g.nu; ++iu) {
                const auto k = g.index(iu, jv);
                const Eigen::Vector2d& t = data.t_single[k];
                const double f = data.f_single[k];
                c0.set(iu, jv, std::abs(chart.inner(t, t) + eps_n * f * f + 1.0));
                if (!g.interior(iu, jv)) continue;
                double r1 = 0, r2 = 0;
                for (int b = 0; b < 2; ++b) {
                    const Eigen::Vector2d x = basis2(b);
                    Eigen::Vector2d sx = data.shape[k] * x;
                    if (lkt) sx += tau * rotate(chart, x);
                    const Eigen::Vector2d lhs_t = covariant_tangent(chart, data.t_single, iu, jv, b);
                    const double lhs_f = frame_derivative(chart, data.f_single, iu, jv, b);
                    r1 = std::max(r1, (lhs_t - f * sx).cwiseAbs().maxCoeff());
                    r2 = std::max(r2, std::abs(lhs_f + eps_n * chart.inner(sx, t)));
                }
                c1.set(iu, jv, r1);
                c2.set(iu, jv, r2);
            }
        rep.equations.push_back(c0.finish());
        rep.equations.push_back(c1.finish());
        rep.equations.push_back(c2.finish());
    }
    if (rep.equations.empty()) throw std::invalid_argument("check_compatibility: no compatibility system for " + kind.name());
    return rep;
}

}  // namespace spinsurf
