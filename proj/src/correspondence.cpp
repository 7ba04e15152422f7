#include "spinsurf/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "spinsurf/finite_difference.hpp"

namespace spinsurf {

namespace {

using cd = std::complex<double>;

void require_intrinsic(const SpinorField& f, const char* who) {
    if (f.space.model != SpinorModel::intrinsic || f.chart.signature != SurfaceSignature::riemannian)
        throw std::invalid_argument(std::string(who) + ": needs an intrinsic Riemannian spinor field");
    if (f.values.size() != static_cast<std::size_t>(f.chart.grid.size()))
        throw std::invalid_argument(std::string(who) + ": field size differs from its chart");
}

ResidualField make_residual(const std::string& name, const Grid& g, const std::function<double(std::size_t)>& at) {
    ResidualField r;
    r.name = name;
    r.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    double sum = 0;
    int count = 0;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) {
            const auto k = g.index(i, j);
            r.values[k] = at(k);
            r.max_interior = std::max(r.max_interior, r.values[k]);
            sum += r.values[k] * r.values[k];
            ++count;
        }
    r.l2_interior = count > 0 ? std::sqrt(sum / count) : 0.0;
    return r;
}

// D psi + i H psi - i w omega psi, the common shape of every Dirac equation here.
ResidualField dirac_defect(const SpinorField& f, const std::function<double(std::size_t)>& mean, double w,
                           const std::string& name) {
    const SpinorField d = dirac(f);
    return make_residual(name, f.chart.grid, [&](std::size_t k) {
        const Multivector& psi = f.values[k];
        const Multivector r = d.values[k] + mean(k) * complex_i(psi) - w * complex_i(omega_action(f.space, psi));
        return std::sqrt(r.norm2());
    });
}

Multivector rotor(const SpinorSpace& s, double theta) {
    return Multivector::scalar(s.algebra(), std::cos(theta)) + std::sin(theta) * s.area_element();
}

std::array<int, 3> flavor_signs(WeierstrassFlavor f) {
    return f == WeierstrassFlavor::euclidean_minimal ? std::array<int, 3>{1, 1, 1} : std::array<int, 3>{-1, -1, 1};
}

void require_conformal(const WeierstrassData& d, double tolerance, const char* who) {
    if (d.phi.size() != static_cast<std::size_t>(d.grid.size()))
        throw std::invalid_argument(std::string(who) + ": sample count differs from the grid");
    const double c = d.conformality_defect();
    if (!(c <= tolerance)) {
        std::ostringstream os;
        os << who << ": Weierstrass data not conformal (defect " << c << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

ResidualField cmc_dirac_residual(const CmcPair& p) {
    require_intrinsic(p.field, "cmc_dirac_residual");
    const double w = p.target == CmcTarget::h13 ? 1.0 : 0.0;
    return dirac_defect(p.field, [&](std::size_t) { return p.mean; }, w, "dirac");
}

double indicator_defect(const SpinorField& f) {
    double m = 0;
    for (const auto& v : f.values) m = std::max(m, std::abs(indicator(v) - 1.0));
    return m;
}

LawsonResult lawson_rotate(const CmcPair& in, int branch) {
    if (in.target != CmcTarget::r12) throw std::invalid_argument("lawson_rotate: input must solve the Minkowski equation");
    if (branch != 1 && branch != -1) throw std::invalid_argument("lawson_rotate: branch must be +1 or -1");
    if (!(std::abs(in.mean) >= 1.0))
        throw std::invalid_argument("lawson_rotate: mean curvature out of range, need H_1 in (-inf,-1] u [1,inf)");
    require_intrinsic(in.field, "lawson_rotate");
    const double h1 = in.mean;
    const double principal = 0.5 * std::asin(1.0 / h1);
    const double sign = h1 > 0 ? 1.0 : -1.0;
    // H_2 = H_1 cos 2 theta; the companion solution flips cos 2 theta and keeps sin 2 theta
    const bool keep = (h1 > 0) == (branch > 0);
    LawsonResult out;
    out.theta = keep ? principal : sign * std::numbers::pi / 2 - principal;
    out.rotor = rotor(in.field.space, out.theta);
    out.pair.field = in.field;
    for (auto& v : out.pair.field.values) v = out.rotor * v;
    out.pair.mean = branch * std::sqrt(h1 * h1 - 1.0);
    out.pair.target = CmcTarget::h13;
    return out;
}

LawsonResult lawson_inverse(const CmcPair& in, int branch) {
    if (in.target != CmcTarget::h13) throw std::invalid_argument("lawson_inverse: input must solve the anti-de Sitter equation");
    if (branch != 1 && branch != -1) throw std::invalid_argument("lawson_inverse: branch must be +1 or -1");
    require_intrinsic(in.field, "lawson_inverse");
    const double h1 = branch * std::sqrt(in.mean * in.mean + 1.0);
    const double principal = 0.5 * std::asin(1.0 / h1);
    // cos 2 theta must carry the sign of H_2 / H_1
    const bool keep = (in.mean >= 0) == (h1 > 0);
    LawsonResult out;
    out.theta = keep ? principal : (h1 > 0 ? 1.0 : -1.0) * std::numbers::pi / 2 - principal;
    out.rotor = rotor(in.field.space, out.theta);
    const Multivector back = rotor(in.field.space, -out.theta);
    out.pair.field = in.field;
    for (auto& v : out.pair.field.values) v = back * v;
    out.pair.mean = h1;
    out.pair.target = CmcTarget::r12;
    return out;
}

CalabiResult calabi_map(const Chart& chart, const SpinorField& psi1, double tolerance) {
    require_intrinsic(psi1, "calabi_map");
    const Grid& g = chart.grid;
    if (g.nu != psi1.chart.grid.nu || g.nv != psi1.chart.grid.nv)
        throw std::invalid_argument("calabi_map: chart and field grids differ");
    CalabiResult out;
    std::vector<double> ind(psi1.values.size());
    out.min_indicator = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ind.size(); ++k) {
        ind[k] = indicator(psi1.values[k]);
        if (!(ind[k] > 0))
            throw HemisphereViolation("calabi_map: hemisphere condition |psi+|^2 - |psi-|^2 > 0 fails at node " + g.node_name(k), k);
        out.min_indicator = std::min(out.min_indicator, ind[k]);
        out.input_norm = std::max(out.input_norm, std::abs(psi1.values[k].norm2() - 1.0));
    }
    SpinorField src = psi1;
    src.chart = chart;
    const SpinorField d = dirac(src);
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) out.input_dirac = std::max(out.input_dirac, std::sqrt(d.values[g.index(i, j)].norm2()));
    if (!(out.input_norm <= tolerance)) throw std::invalid_argument("calabi_map: input spinor is not of unit length");
    if (!(out.input_dirac <= tolerance)) throw std::invalid_argument("calabi_map: input spinor is not harmonic");

    std::vector<Eigen::Matrix2d> metric(chart.metric.size());
    for (std::size_t k = 0; k < metric.size(); ++k) metric[k] = ind[k] * ind[k] * chart.metric[k];
    out.chart = make_chart(g, SurfaceSignature::riemannian, std::move(metric));
    out.field = SpinorField{out.chart, psi1.space, psi1.values};
    for (std::size_t k = 0; k < ind.size(); ++k) out.field.values[k] = out.field.values[k] / std::sqrt(ind[k]);
    return out;
}

// ---------------------------------------------------------------------------

double WeierstrassData::conformality_defect() const {
    const auto eps = flavor_signs(flavor);
    double m = 0;
    for (const auto& p : phi) {
        cd s = 0;
        for (int k = 0; k < 3; ++k) s += static_cast<double>(eps[static_cast<std::size_t>(k)]) * p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
        m = std::max(m, std::abs(s));
    }
    return m;
}

double WeierstrassData::holomorphy_defect() const {
    double m = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<cd> f(phi.size());
        for (std::size_t k = 0; k < phi.size(); ++k) f[k] = phi[k][c];
        for (int j = 1; j + 1 < grid.nv; ++j)
            for (int i = 1; i + 1 < grid.nu; ++i) {
                const cd du = grid_partial(grid, f, i, j, 0), dv = grid_partial(grid, f, i, j, 1);
                m = std::max(m, std::abs(cd(0, 1) * du - dv));
            }
    }
    return m;
}

WeierstrassData weierstrass_sample(const std::string& name, const Grid& grid) {
    std::function<std::array<cd, 3>(cd)> at;
    const cd i(0, 1);
    if (name == "catenoid") at = [i](cd z) { return std::array<cd, 3>{std::sinh(z), -i * std::cosh(z), 1.0}; };
    else if (name == "enneper") at = [i](cd z) { return std::array<cd, 3>{1.0 - z * z, -i * (1.0 + z * z), 2.0 * z}; };
    else if (name == "plane") at = [i](cd) { return std::array<cd, 3>{1.0, -i, 0.0}; };
    else throw std::invalid_argument("unknown Weierstrass sample: " + name);
    WeierstrassData d;
    d.grid = grid;
    d.phi.resize(static_cast<std::size_t>(grid.size()));
    for (int j = 0; j < grid.nv; ++j)
        for (int k = 0; k < grid.nu; ++k) d.phi[grid.index(k, j)] = at(cd(grid.u(k), grid.v(j)));
    return d;
}

WeierstrassData weierstrass_transform(const WeierstrassData& data, double tolerance) {
    require_conformal(data, tolerance, "weierstrass_transform");
    WeierstrassData out = data;
    out.flavor = data.flavor == WeierstrassFlavor::euclidean_minimal ? WeierstrassFlavor::lorentz_maximal
                                                                      : WeierstrassFlavor::euclidean_minimal;
    for (auto& p : out.phi) {
        p[0] *= cd(0, 1);
        p[1] *= cd(0, 1);
    }
    return out;
}

WeierstrassSurface weierstrass_surface(const WeierstrassData& data, const Eigen::Vector3d& anchor, double tolerance) {
    require_conformal(data, 1e-10, "weierstrass_surface");
    const Grid& g = data.grid;
    if (g.nu < 3 || g.nv < 3) throw std::invalid_argument("weierstrass_surface: grid needs at least 3 nodes per direction");

    // x_u = Re Phi, x_v = Re(i Phi) = -Im Phi
    auto xu = [&](std::size_t k) {
        return Eigen::Vector3d(data.phi[k][0].real(), data.phi[k][1].real(), data.phi[k][2].real());
    };
    auto xv = [&](std::size_t k) {
        return Eigen::Vector3d(-data.phi[k][0].imag(), -data.phi[k][1].imag(), -data.phi[k][2].imag());
    };
    std::vector<Eigen::Vector3d> x(static_cast<std::size_t>(g.size()));
    x[g.index(0, 0)] = anchor;
    for (int i = 1; i < g.nu; ++i) x[g.index(i, 0)] = x[g.index(i - 1, 0)] + 0.5 * g.hu * (xu(g.index(i - 1, 0)) + xu(g.index(i, 0)));
    for (int i = 0; i < g.nu; ++i)
        for (int j = 1; j < g.nv; ++j) x[g.index(i, j)] = x[g.index(i, j - 1)] + 0.5 * g.hv * (xv(g.index(i, j - 1)) + xv(g.index(i, j)));

    WeierstrassSurface out;
    for (int j = 0; j + 1 < g.nv; ++j)
        for (int i = 0; i + 1 < g.nu; ++i) {
            const auto a = g.index(i, j), b = g.index(i + 1, j), c = g.index(i + 1, j + 1), d = g.index(i, j + 1);
            const Eigen::Vector3d loop = 0.5 * g.hu * (xu(a) + xu(b)) + 0.5 * g.hv * (xv(b) + xv(c)) -
                                         0.5 * g.hu * (xu(d) + xu(c)) - 0.5 * g.hv * (xv(a) + xv(d));
            out.path_defect = std::max(out.path_defect, loop.norm() / (g.hu * g.hv));
        }
    if (!(out.path_defect <= tolerance)) {
        std::ostringstream os;
        os << "weierstrass_surface: path defect " << out.path_defect << " exceeds " << tolerance;
        throw std::runtime_error(os.str());
    }

    const bool euclid = data.flavor == WeierstrassFlavor::euclidean_minimal;
    const auto eps = euclid ? std::array<int, 3>{1, 1, 1} : std::array<int, 3>{1, 1, -1};
    std::vector<Eigen::Matrix2d> metric(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        // conformal factor |x_u|^2 = (1/2) sum eps_k |Phi_k|^2 for the target metric
        double l2 = 0;
        for (std::size_t c = 0; c < 3; ++c) l2 += 0.5 * eps[c] * std::norm(data.phi[k][c]);
        if (!(l2 > 0)) throw DegenerateSurface("weierstrass_surface: immersion is not spacelike at node " + g.node_name(k));
        metric[k] = l2 * Eigen::Matrix2d::Identity();
    }
    out.chart = make_chart(g, SurfaceSignature::riemannian, std::move(metric));
    out.immersion.kind = euclid ? SpaceKind::euclidean3() : SpaceKind::minkowski();
    out.immersion.grid = g;
    const GroupModel model(out.immersion.kind);
    out.immersion.group.reserve(x.size());
    for (const auto& p : x) out.immersion.group.push_back(model.mul_exp(model.identity(), p, 1.0));
    return out;
}

void write_weierstrass_csv(std::ostream& out, const WeierstrassData& data) {
    const Grid& g = data.grid;
    out << "flavor,nu,nv,u0,v0,hu,hv\n" << std::setprecision(17)
        << (data.flavor == WeierstrassFlavor::euclidean_minimal ? "euclidean_minimal" : "lorentz_maximal") << ',' << g.nu << ','
        << g.nv << ',' << g.u0 << ',' << g.v0 << ',' << g.hu << ',' << g.hv << '\n';
    out << "i,j,re1,im1,re2,im2,re3,im3\n";
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            const auto& p = data.phi[g.index(i, j)];
            out << i << ',' << j;
            for (const auto& c : p) out << ',' << c.real() << ',' << c.imag();
            out << '\n';
        }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double to_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("Weierstrass CSV: not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("Weierstrass CSV: not a number: '" + s + "'");
    return v;
}

}  // namespace

WeierstrassData read_weierstrass_csv(std::istream& in) {
    std::string line;
    auto next = [&]() {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next() || line != "flavor,nu,nv,u0,v0,hu,hv") throw std::invalid_argument("Weierstrass CSV: missing metadata header");
    if (!next()) throw std::invalid_argument("Weierstrass CSV: missing metadata");
    const auto meta = split_csv(line);
    if (meta.size() != 7) throw std::invalid_argument("Weierstrass CSV: metadata needs 7 fields");
    WeierstrassData d;
    if (meta[0] == "euclidean_minimal") d.flavor = WeierstrassFlavor::euclidean_minimal;
    else if (meta[0] == "lorentz_maximal") d.flavor = WeierstrassFlavor::lorentz_maximal;
    else throw std::invalid_argument("Weierstrass CSV: unknown flavor '" + meta[0] + "'");
    const double nu = to_number(meta[1]), nv = to_number(meta[2]);
    if (nu != std::floor(nu) || nv != std::floor(nv) || nu < 3 || nv < 3 || nu * nv > 1e7)
        throw std::invalid_argument("Weierstrass CSV: bad grid size");
    d.grid = Grid{static_cast<int>(nu), static_cast<int>(nv), to_number(meta[3]), to_number(meta[4]), to_number(meta[5]), to_number(meta[6])};
    if (!(d.grid.hu > 0) || !(d.grid.hv > 0)) throw std::invalid_argument("Weierstrass CSV: spacing must be positive");
    if (!next() || line != "i,j,re1,im1,re2,im2,re3,im3") throw std::invalid_argument("Weierstrass CSV: missing sample header");
    d.phi.resize(static_cast<std::size_t>(d.grid.size()));
    std::vector<char> seen(d.phi.size(), 0);
    while (next()) {
        const auto c = split_csv(line);
        if (c.size() != 8) throw std::invalid_argument("Weierstrass CSV: sample rows need 8 fields");
        const double i = to_number(c[0]), j = to_number(c[1]);
        if (i != std::floor(i) || j != std::floor(j) || i < 0 || j < 0 || i >= d.grid.nu || j >= d.grid.nv)
            throw std::invalid_argument("Weierstrass CSV: node index out of range in '" + line + "'");
        const auto k = d.grid.index(static_cast<int>(i), static_cast<int>(j));
        if (seen[k]) throw std::invalid_argument("Weierstrass CSV: duplicate node in '" + line + "'");
        seen[k] = 1;
        for (std::size_t m = 0; m < 3; ++m) d.phi[k][m] = cd(to_number(c[2 + 2 * m]), to_number(c[3 + 2 * m]));
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw std::invalid_argument("Weierstrass CSV: missing nodes");
    return d;
}

// ---------------------------------------------------------------------------

RoundTripReport dirac_killing_roundtrip(const SpinorField& field, const std::vector<double>& mean, double tau,
                                        const std::optional<std::vector<Eigen::Matrix2d>>& shape, double tolerance) {
    require_intrinsic(field, "dirac_killing_roundtrip");
    const Chart& chart = field.chart;
    const std::size_t n = field.values.size();
    if (mean.size() != n) throw std::invalid_argument("dirac_killing_roundtrip: mean curvature size differs from the field");
    if (shape && shape->size() != n) throw std::invalid_argument("dirac_killing_roundtrip: shape size differs from the field");
    const double defect = indicator_defect(field);
    if (!(defect <= tolerance)) throw std::invalid_argument("dirac_killing_roundtrip: indicator is not one");

    // tau = 0 is Minkowski space; otherwise the equation only sees S and tau
    // and the ambient is any L(kappa, tau) with kappa = -4 tau^2.
    auto equation = [&](const std::vector<Eigen::Matrix2d>& s) {
        const SpaceKind kind = tau == 0 ? SpaceKind::minkowski() : SpaceKind::lkt(-4 * tau * tau, tau);
        GeometryData d = prescribed_shape(chart, kind, [&](std::size_t k) { return s[k]; });
        return tau == 0 ? make_equation(KillingForm::r12_riemannian, kind, std::move(d))
                        : make_equation(KillingForm::killing_lkt, kind, std::move(d), tau);
    };

    RoundTripReport r;
    r.dirac_residual = dirac_defect(field, [&](std::size_t k) { return mean[k]; }, tau, "dirac").max_interior;
    if (shape) {
        r.killing_residual = residual_killing(equation(*shape), field).max_interior;
        r.ratio = r.killing_residual > 0 ? r.dirac_residual / r.killing_residual : 0.0;
    }
    r.shape = shape_from_spinor(field, tau);
    r.recovered_killing = residual_killing(equation(r.shape), field).max_interior;
    const Grid& g = chart.grid;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) {
            const auto k = g.index(i, j);
            const Eigen::Matrix2d& s = r.shape[k];
            r.symmetry_defect = std::max(r.symmetry_defect, std::abs(s(0, 1) - s(1, 0)));
            r.trace_defect = std::max(r.trace_defect, std::abs(0.5 * s.trace() - mean[k]));
            if (shape) r.shape_defect = std::max(r.shape_defect, (s - (*shape)[k]).cwiseAbs().maxCoeff());
        }
    return r;
}

}  // namespace spinsurf
