#include "spinsurf/spinor_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace spinsurf {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

double surface_inner(SurfaceSignature sig, const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
    return x(0) * y(0) + (sig == SurfaceSignature::riemannian ? 1.0 : -1.0) * x(1) * y(1);
}

Eigen::VectorXd to_vec(const Multivector& m) {
    Eigen::VectorXd v(m.size());
    for (int b = 0; b < m.size(); ++b) v(b) = m[static_cast<Blade>(b)];
    return v;
}

Multivector from_vec(const Signature& sig, const Eigen::VectorXd& v) {
    Multivector m(sig);
    for (int b = 0; b < sig.size(); ++b) m[static_cast<Blade>(b)] = v(b);
    return m;
}

Eigen::Vector2d basis2(int a) { return a == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1); }

bool riemannian(const SpinorSpace& s) { return s.signature == SurfaceSignature::riemannian; }

}  // namespace

Multivector SpinorSpace::tangent(const Eigen::Vector2d& x) const {
    return x(0) * ambient.role_vector(0) + x(1) * ambient.role_vector(1);
}

Multivector SpinorSpace::area_element() const { return ambient.role_vector(0) * ambient.role_vector(1); }

SpinorSpace intrinsic_space(SurfaceSignature sig) {
    SpinorSpace s;
    s.model = SpinorModel::intrinsic;
    s.signature = sig;
    // same placement as the Minkowski ambient model: N on e_0 (Riemannian) or e_2
    s.ambient = ambient_model(SpaceKind::minkowski(), sig);
    return s;
}

SpinorSpace extrinsic_space(const SpaceKind& kind, SurfaceSignature sig) {
    SpinorSpace s;
    s.model = SpinorModel::extrinsic;
    s.signature = sig;
    s.ambient = ambient_model(kind, sig);
    return s;
}

Multivector clifford_action(const SpinorSpace& s, const Eigen::Vector2d& x, const Multivector& psi) {
    const Multivector xv = s.tangent(x);
    if (s.model == SpinorModel::extrinsic) return xv * psi;
    if (riemannian(s)) return s.normal() * xv * psi * cl12::quat_i();
    return xv * s.normal() * psi;
}

Multivector complex_i(const Multivector& psi) { return psi * cl12::quat_i(); }

Multivector omega_action(const SpinorSpace& s, const Multivector& psi) { return s.area_element() * psi; }

double hermitian_re(const Multivector& a, const Multivector& b) {
    if (!(a.signature() == b.signature())) throw std::invalid_argument("hermitian_re: signatures differ");
    double s = 0;
    for (int k = 0; k < a.size(); ++k) s += a[static_cast<Blade>(k)] * b[static_cast<Blade>(k)];
    return s;
}

SplitSpinor split_pm(const Multivector& psi) {
    static const SpinorSpace space = intrinsic_space(SurfaceSignature::riemannian);
    const Multivector conj = complex_i(omega_action(space, psi));
    SplitSpinor out;
    out.plus = 0.5 * (psi + conj);
    out.minus = psi - out.plus;
    out.indicator = out.plus.norm2() - out.minus.norm2();
    return out;
}

double indicator(const Multivector& psi) {
    const double a = psi[0], b = psi[3], c = psi[5], d = psi[6];
    return a * a + d * d - b * b - c * c;
}

// ---------------------------------------------------------------------------

namespace {

const std::map<KillingForm, std::string>& form_names() {
    static const std::map<KillingForm, std::string> names{
        {KillingForm::extrinsic_group, "extrinsic_group"},
        {KillingForm::intrinsic_riemannian, "intrinsic_riemannian"},
        {KillingForm::intrinsic_lorentzian, "intrinsic_lorentzian"},
        {KillingForm::product_h2r, "product_H2R"},
        {KillingForm::product_rs12, "product_RS12"},
        {KillingForm::product_rh12, "product_RH12"},
        {KillingForm::desitter, "desitter"},
        {KillingForm::antidesitter, "antidesitter"},
        {KillingForm::product_rminus_s2, "product_RminusS2"},
        {KillingForm::lkt, "lkt"},
        {KillingForm::su12, "su12"},
        {KillingForm::r12_riemannian, "r12_riemannian"},
        {KillingForm::killing_lkt, "killing_lkt"},
        {KillingForm::r3_euclidean, "r3_euclidean"},
    };
    return names;
}

bool needs_group_fields(KillingForm f) {
    switch (f) {
    case KillingForm::extrinsic_group:
    case KillingForm::intrinsic_riemannian:
    case KillingForm::intrinsic_lorentzian:
    case KillingForm::product_h2r:
    case KillingForm::product_rs12:
    case KillingForm::product_rh12:
        return true;
    default:
        return false;
    }
}

bool is_extrinsic(KillingForm f) {
    return f == KillingForm::extrinsic_group || f == KillingForm::desitter || f == KillingForm::antidesitter ||
           f == KillingForm::product_rminus_s2;
}

bool is_lkt_kind(const SpaceKind& k) { return k.tag == SpaceTag::lkt || k.tag == SpaceTag::su12; }

void check_pair(KillingForm form, const SpaceKind& kind, SurfaceSignature sig) {
    const bool riem = sig == SurfaceSignature::riemannian;
    bool ok = false;
    switch (form) {
    case KillingForm::extrinsic_group: ok = kind.is_group(); break;
    case KillingForm::intrinsic_riemannian: ok = kind.is_group() && kind.tag != SpaceTag::euclidean3 && riem; break;
    case KillingForm::intrinsic_lorentzian: ok = kind.is_group() && kind.tag != SpaceTag::euclidean3 && !riem; break;
    case KillingForm::product_h2r: ok = kind.tag == SpaceTag::product_h2xr && riem; break;
    case KillingForm::product_rs12: ok = kind.tag == SpaceTag::product_rxs12 && riem; break;
    case KillingForm::product_rh12: ok = kind.tag == SpaceTag::product_rxh12 && riem; break;
    case KillingForm::desitter: ok = kind.tag == SpaceTag::de_sitter; break;
    case KillingForm::antidesitter: ok = kind.tag == SpaceTag::anti_de_sitter; break;
    case KillingForm::product_rminus_s2: ok = kind.tag == SpaceTag::product_rminus_s2; break;
    case KillingForm::lkt: ok = is_lkt_kind(kind) && riem; break;
    case KillingForm::su12:
        ok = riem && (kind.tag == SpaceTag::su12 || (kind.tag == SpaceTag::lkt && kind.kappa == -4 && kind.tau == 1));
        break;
    case KillingForm::r12_riemannian: ok = kind.tag == SpaceTag::minkowski_r12 && riem; break;
    case KillingForm::killing_lkt:
    case KillingForm::r3_euclidean: ok = riem; break;
    }
    if (!ok)
        throw std::invalid_argument("unsupported Killing form " + form_name(form) + " for " + kind.name() +
                                    (riem ? " (Riemannian)" : " (Lorentzian)"));
}

}  // namespace

std::string form_name(KillingForm f) { return form_names().at(f); }

KillingForm form_from_name(const std::string& name) {
    for (const auto& [f, n] : form_names())
        if (n == name) return f;
    throw std::invalid_argument("unknown Killing form: " + name);
}

KillingEquation make_equation(KillingForm form, const SpaceKind& kind, GeometryData data, double tau) {
    kind.validate();
    check_pair(form, kind, data.signature);
    KillingEquation eq;
    eq.form = form;
    eq.kind = kind;
    eq.tau = tau;
    eq.space = is_extrinsic(form) ? extrinsic_space(kind, data.signature) : intrinsic_space(data.signature);
    if (kind.is_group()) eq.algebra = make_algebra(kind);
    eq.data = std::move(data);
    return eq;
}

void KillingEquation::validate(std::size_t nodes) const {
    const std::string what = "Killing form " + form_name(form) + ": ";
    if (data.shape.size() != nodes || data.second_form.size() != nodes)
        throw std::invalid_argument(what + "shape data missing or sized for another chart");
    if (needs_group_fields(form) && (data.t.size() != nodes || data.nu.size() != nodes))
        throw std::invalid_argument(what + "T_i and nu_i fields are required");
    const bool single = form == KillingForm::lkt || form == KillingForm::product_rminus_s2;
    if (single && (data.t_single.size() != nodes || data.f_single.size() != nodes))
        throw std::invalid_argument(what + "T and nu/f fields are required");
}

Multivector gamma_tangent_bivector(const LieAlgebra3& alg, const SpinorSpace& s, const GeometryData& d, std::size_t node,
                                   const Eigen::Vector2d& x) {
    Multivector out(s.algebra());
    const auto& t = d.t[node];
    for (int i = 0; i < 3; ++i) {
        const double xi = alg.eps[sz(i)] * surface_inner(d.signature, x, t[sz(i)]);
        if (xi == 0) continue;
        for (int j = 0; j < 3; ++j)
            for (int k = j + 1; k < 3; ++k) {
                const double c = alg.eps[sz(j)] * alg.eps[sz(k)] * alg.gamma[sz(t3(i, j, k))];
                if (c == 0) continue;
                const Multivector tj = s.tangent(t[sz(j)]), tk = s.tangent(t[sz(k)]);
                out += (0.5 * xi * c) * (tj * tk - tk * tj);
            }
    }
    return out;
}

Eigen::Vector2d gamma_vector(const LieAlgebra3& alg, const GeometryData& d, std::size_t node, const Eigen::Vector2d& x) {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    const auto& t = d.t[node];
    const auto& nu = d.nu[node];
    for (int i = 0; i < 3; ++i) {
        const double xi = alg.eps[sz(i)] * surface_inner(d.signature, x, t[sz(i)]);
        if (xi == 0) continue;
        for (int j = 0; j < 3; ++j)
            for (int k = j + 1; k < 3; ++k) {
                const double c = alg.eps[sz(j)] * alg.eps[sz(k)] * alg.gamma[sz(t3(i, j, k))];
                out += xi * c * (nu(k) * t[sz(j)] - nu(j) * t[sz(k)]);
            }
    }
    return out;
}

Multivector gamma_bivector(const LieAlgebra3& alg, const SpinorSpace& s, const GeometryData& d, std::size_t node,
                           const Eigen::Vector2d& x) {
    const Eigen::Vector2d v = gamma_vector(alg, d, node, x);
    return gamma_tangent_bivector(alg, s, d, node, x) + s.tangent(v) * s.normal();
}

namespace {

// -1/2 sum_j eps_j e_j B(X, e_j) phi with B = eps_N h N.
Multivector second_form_term(const SpinorSpace& s, const GeometryData& d, std::size_t node, const Eigen::Vector2d& x,
                             const Multivector& phi) {
    const Eigen::Vector2d hx = d.second_form[node] * x;
    const int eps_n = s.algebra().metric(s.role(2));
    Multivector acc(s.algebra());
    for (int j = 0; j < 2; ++j) acc += (s.algebra().metric(s.role(j)) * eps_n * hx(j)) * s.ambient.role_vector(j);
    return -0.5 * (acc * s.normal() * phi);
}

// i V . w
Multivector i_act(const SpinorSpace& s, const Eigen::Vector2d& v, const Multivector& w) {
    return complex_i(clifford_action(s, v, w));
}

}  // namespace

Multivector killing_rhs(const KillingEquation& eq, const Multivector& psi, std::size_t node, const Eigen::Vector2d& x) {
    const SpinorSpace& s = eq.space;
    const GeometryData& d = eq.data;
    const Eigen::Vector2d sx = d.shape[node] * x;
    auto half_i_s = [&] { return 0.5 * i_act(s, sx, psi); };
    auto product_term = [&](double c, int paired, int carrier) {
        // c <X, T_paired> (i T_carrier + nu_carrier) omega psi
        const double w = c * surface_inner(d.signature, x, d.t[node][sz(paired)]);
        const Multivector om = omega_action(s, psi);
        return w * (i_act(s, d.t[node][sz(carrier)], om) + d.nu[node](carrier) * om);
    };
    switch (eq.form) {
    case KillingForm::extrinsic_group:
        return second_form_term(s, d, node, x, psi) + 0.5 * (gamma_bivector(eq.algebra, s, d, node, x) * psi);
    case KillingForm::desitter:
    case KillingForm::antidesitter:
    case KillingForm::product_rminus_s2: {
        Multivector xv = s.tangent(x);
        if (eq.form == KillingForm::product_rminus_s2) {
            const Eigen::Vector2d& t = d.t_single[node];
            xv += surface_inner(d.signature, x, t) * (s.tangent(t) + d.f_single[node] * s.normal());
        }
        const double sign = eq.form == KillingForm::antidesitter ? -0.5 : 0.5;
        return second_form_term(s, d, node, x, psi) + sign * (xv * s.ambient.role_vector(3) * psi);
    }
    case KillingForm::intrinsic_riemannian:
        return half_i_s() + 0.5 * (gamma_tangent_bivector(eq.algebra, s, d, node, x) * psi) +
               0.5 * i_act(s, gamma_vector(eq.algebra, d, node, x), psi);
    case KillingForm::intrinsic_lorentzian:
        return -0.5 * clifford_action(s, sx, psi) + 0.5 * (gamma_tangent_bivector(eq.algebra, s, d, node, x) * psi) +
               0.5 * clifford_action(s, gamma_vector(eq.algebra, d, node, x), psi);
    case KillingForm::product_h2r: return half_i_s() - product_term(0.5 * eq.kind.alpha, 1, 2);
    case KillingForm::product_rs12: return half_i_s() + product_term(0.5 * eq.kind.alpha, 0, 1);
    case KillingForm::product_rh12: return half_i_s() + product_term(0.5 * eq.kind.delta, 2, 1);
    case KillingForm::lkt: {
        const double tau = eq.kind.tau;
        const Eigen::Vector2d& t = d.t_single[node];
        const Multivector om = omega_action(s, psi);
        const double c = surface_inner(d.signature, x, t) * (eq.kind.sigma() + 2 * tau);
        return half_i_s() - 0.5 * (tau * i_act(s, x, om) + c * (i_act(s, t, om) + d.f_single[node] * om));
    }
    case KillingForm::su12: return half_i_s() - 0.5 * i_act(s, x, omega_action(s, psi));
    case KillingForm::killing_lkt: return half_i_s() - (0.5 * eq.tau) * i_act(s, x, omega_action(s, psi));
    case KillingForm::r12_riemannian: return half_i_s();
    case KillingForm::r3_euclidean: return -0.5 * clifford_action(s, sx, psi);
    }
    throw std::logic_error("killing_rhs: unhandled form");
}

double unit_defect(const KillingEquation& eq, const Multivector& psi) {
    if (eq.form == KillingForm::r3_euclidean) return std::abs(psi.norm2() - 1.0);
    Multivector n = mv_tau(psi) * psi;
    n[0] -= 1.0;
    return n.max_abs();
}

// ---------------------------------------------------------------------------

namespace {

// Gram-Schmidt in the ambient metric. The finite-difference tangents are only
// orthonormal to O(h^2); the normals (N, and nu for quadrics) are exact, so
// they go first.
Eigen::MatrixXd orthonormalize(const AmbientModel& m, const Eigen::MatrixXd& frame) {
    Eigen::MatrixXd out = frame;
    std::vector<int> order;
    if (frame.cols() == 4) order.push_back(3);
    order.insert(order.end(), {2, 0, 1});
    std::vector<int> done;
    for (int c : order) {
        Eigen::VectorXd v = frame.col(c);
        for (int d : done) {
            const Eigen::VectorXd w = out.col(d);
            v -= m.inner(v, w) / m.inner(w, w) * w;
        }
        const double n2 = m.inner(v, v);
        if (std::abs(n2) < 1e-12) throw DegenerateSurface("frame_lift: degenerate adapted frame");
        out.col(c) = v / std::sqrt(std::abs(n2));
        done.push_back(c);
    }
    return out;
}

// tau of the spin lift of an ambient frame (columns in role order).
Multivector lift_frame(const AmbientModel& m, const Eigen::MatrixXd& frame, const Multivector* hint) {
    const Eigen::MatrixXd fr = orthonormalize(m, frame);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.dim, m.dim);
    for (int r = 0; r < m.dim; ++r)
        for (int c = 0; c < m.dim; ++c) a(m.coord_index[sz(c)], m.role[sz(r)]) = fr(c, r);
    return spin_lift(m.algebra, a, hint);
}

}  // namespace

Eigen::MatrixXd spinor_frame(const SpinorSpace& s, const Multivector& phi) {
    const AmbientModel& m = s.ambient;
    Eigen::MatrixXd out(m.dim, m.dim);
    const Multivector rev = mv_tau(phi);
    for (int r = 0; r < m.dim; ++r) out.col(r) = m.from_algebra(rev * m.role_vector(r) * phi);
    return out;
}

Multivector snap_to_spin(const SpinorSpace& s, const Multivector& phi) {
    const Multivector a = mv_tau(phi);
    return mv_tau(lift_frame(s.ambient, spinor_frame(s, phi), &a));
}

SpinorField frame_lift(const Chart& chart, const GeometryData& data) {
    const Grid& g = chart.grid;
    if (data.ambient_frame.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("frame_lift: geometry carries no ambient frame for this chart");
    SpinorField f;
    f.chart = chart;
    f.space = extrinsic_space(data.kind, data.signature);
    const AmbientModel& m = f.space.ambient;
    f.values.resize(data.ambient_frame.size());
    std::vector<Multivector> lifts(f.values.size());
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            const auto k = g.index(i, j);
            const Multivector* hint = i > 0 ? &lifts[g.index(i - 1, j)] : (j > 0 ? &lifts[g.index(i, j - 1)] : nullptr);
            try {
                lifts[k] = lift_frame(m, data.ambient_frame[k], hint);
            } catch (const std::exception& e) {
                throw std::runtime_error("frame_lift at node " + g.node_name(k) + ": " + e.what());
            }
            f.values[k] = mv_tau(lifts[k]);
        }
    return f;
}

SpinorField spinor_covariant_derivative(const SpinorField& f, int direction) {
    if (direction != 0 && direction != 1) throw std::invalid_argument("spinor_covariant_derivative: direction must be 0 or 1");
    const Chart& c = f.chart;
    const Grid& g = c.grid;
    if (f.values.size() != static_cast<std::size_t>(g.size())) throw std::invalid_argument("spinor_covariant_derivative: field and chart sizes differ");
    if (c.connection.size() != f.values.size()) throw std::invalid_argument("spinor_covariant_derivative: chart has no connection");
    const auto e = c.eps();
    const Multivector w = f.space.area_element();
    SpinorField out{c, f.space, std::vector<Multivector>(f.values.size())};
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            const auto k = g.index(i, j);
            out.values[k] = frame_derivative(c, f.values, i, j, direction) +
                            (0.5 * e[0] * e[1] * c.connection[k](direction)) * (w * f.values[k]);
        }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct EdgeOperators {
    // d psi / d u and d psi / d v as matrices on blade coefficients
    std::vector<Eigen::MatrixXd> du, dv;
};

EdgeOperators build_operators(const KillingEquation& eq, const Chart& chart) {
    const Grid& g = chart.grid;
    const auto n = static_cast<std::size_t>(g.size());
    const Signature& sig = eq.space.algebra();
    const int dim = sig.size();
    const auto e = chart.eps();
    const Multivector w = eq.space.area_element();
    EdgeOperators ops;
    ops.du.resize(n);
    ops.dv.resize(n);
    // frame derivative e_a(psi) = rhs(e_a, psi) - (1/2) eps1 eps2 omega(e_a) w psi
    std::array<Eigen::MatrixXd, 2> frame_op;
    for (std::size_t k = 0; k < n; ++k) {
        for (int a = 0; a < 2; ++a) {
            frame_op[sz(a)].resize(dim, dim);
            const double conn = 0.5 * e[0] * e[1] * chart.connection[k](a);
            for (int b = 0; b < dim; ++b) {
                const Multivector basis = Multivector::blade(sig, static_cast<Blade>(b));
                const Multivector col = killing_rhs(eq, basis, k, basis2(a)) - conn * (w * basis);
                frame_op[sz(a)].col(b) = to_vec(col);
            }
        }
        const Eigen::Vector2d cu = chart.coordinate_in_frame(k, 0), cv = chart.coordinate_in_frame(k, 1);
        ops.du[k] = cu(0) * frame_op[0] + cu(1) * frame_op[1];
        ops.dv[k] = cv(0) * frame_op[0] + cv(1) * frame_op[1];
    }
    return ops;
}

Eigen::VectorXd rk4_edge(const Eigen::MatrixXd& l0, const Eigen::MatrixXd& l1, const Eigen::VectorXd& y, double h) {
    const Eigen::MatrixXd lm = 0.5 * (l0 + l1);
    const Eigen::VectorXd k1 = l0 * y;
    const Eigen::VectorXd k2 = lm * (y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = lm * (y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = l1 * (y + h * k3);
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

KillingSolution solve_killing(const KillingEquation& eq, const Chart& chart, const Multivector& psi0, int base_i, int base_j) {
    const Grid& g = chart.grid;
    const auto n = static_cast<std::size_t>(g.size());
    eq.validate(n);
    if (chart.signature != eq.data.signature) throw std::invalid_argument("solve_killing: chart and data signatures differ");
    if (!(psi0.signature() == eq.space.algebra())) throw std::invalid_argument("solve_killing: psi0 lives in the wrong algebra");
    if (eq.model() == SpinorModel::intrinsic && psi0.odd().max_abs() > 1e-12)
        throw std::invalid_argument("solve_killing: intrinsic psi0 must be even");
    const double defect = unit_defect(eq, psi0);
    if (!(defect <= 1e-8)) throw std::invalid_argument("solve_killing: psi0 violates the unit constraint by " + std::to_string(defect));
    if (base_i < 0) base_i = g.nu / 2;
    if (base_j < 0) base_j = g.nv / 2;
    if (base_i >= g.nu || base_j >= g.nv) throw std::invalid_argument("solve_killing: base node outside the grid");

    const EdgeOperators ops = build_operators(eq, chart);
    const Signature& sig = eq.space.algebra();
    std::vector<Eigen::VectorXd> y(n);
    auto check = [&](std::size_t k) {
        if (!y[k].allFinite()) throw SolverFailure("solve_killing: non-finite spinor at node " + g.node_name(k));
    };
    y[g.index(base_i, base_j)] = to_vec(psi0);
    for (int i = base_i; i + 1 < g.nu; ++i) {
        y[g.index(i + 1, base_j)] = rk4_edge(ops.du[g.index(i, base_j)], ops.du[g.index(i + 1, base_j)], y[g.index(i, base_j)], g.hu);
        check(g.index(i + 1, base_j));
    }
    for (int i = base_i; i > 0; --i) {
        y[g.index(i - 1, base_j)] = rk4_edge(ops.du[g.index(i, base_j)], ops.du[g.index(i - 1, base_j)], y[g.index(i, base_j)], -g.hu);
        check(g.index(i - 1, base_j));
    }
    for (int i = 0; i < g.nu; ++i) {
        for (int j = base_j; j + 1 < g.nv; ++j) {
            y[g.index(i, j + 1)] = rk4_edge(ops.dv[g.index(i, j)], ops.dv[g.index(i, j + 1)], y[g.index(i, j)], g.hv);
            check(g.index(i, j + 1));
        }
        for (int j = base_j; j > 0; --j) {
            y[g.index(i, j - 1)] = rk4_edge(ops.dv[g.index(i, j)], ops.dv[g.index(i, j - 1)], y[g.index(i, j)], -g.hv);
            check(g.index(i, j - 1));
        }
    }

    KillingSolution out;
    out.field.chart = chart;
    out.field.space = eq.space;
    out.field.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.field.values[k] = from_vec(sig, y[k]);
        out.unit_drift = std::max(out.unit_drift, unit_defect(eq, out.field.values[k]));
    }
    const double area = g.hu * g.hv;
    out.plaquette.assign(static_cast<std::size_t>((g.nu - 1) * (g.nv - 1)), 0.0);
    for (int j = 0; j + 1 < g.nv; ++j)
        for (int i = 0; i + 1 < g.nu; ++i) {
            const auto k = g.index(i, j);
            const auto ku = g.index(i + 1, j), kv = g.index(i, j + 1), kuv = g.index(i + 1, j + 1);
            const Eigen::VectorXd a = rk4_edge(ops.dv[ku], ops.dv[kuv], rk4_edge(ops.du[k], ops.du[ku], y[k], g.hu), g.hv);
            const Eigen::VectorXd b = rk4_edge(ops.du[kv], ops.du[kuv], rk4_edge(ops.dv[k], ops.dv[kv], y[k], g.hv), g.hu);
            const double d = (a - b).norm() / (std::max(y[k].norm(), 1e-300) * area);
            out.plaquette[static_cast<std::size_t>(j * (g.nu - 1) + i)] = d;
            if (i >= 1 && j >= 1 && i + 2 < g.nu && j + 2 < g.nv) out.integrability = std::max(out.integrability, d);
        }
    return out;
}

ResidualField residual_killing(const KillingEquation& eq, const SpinorField& f) {
    const Grid& g = f.chart.grid;
    eq.validate(f.values.size());
    if (!(f.space.algebra() == eq.space.algebra()) || f.space.model != eq.space.model)
        throw std::invalid_argument("residual_killing: field and equation use different spinor models");
    const std::array<SpinorField, 2> nabla{spinor_covariant_derivative(f, 0), spinor_covariant_derivative(f, 1)};
    ResidualField r;
    r.name = "killing";
    r.values.assign(f.values.size(), 0.0);
    double sum = 0;
    int count = 0;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) {
            const auto k = g.index(i, j);
            double v = 0;
            for (int a = 0; a < 2; ++a)
                v += std::sqrt((nabla[sz(a)].values[k] - killing_rhs(eq, f.values[k], k, basis2(a))).norm2());
            r.values[k] = v;
            r.max_interior = std::max(r.max_interior, v);
            sum += v * v;
            ++count;
        }
    r.l2_interior = count ? std::sqrt(sum / count) : 0.0;
    return r;
}

SpinorField dirac(const SpinorField& f) {
    if (f.space.model != SpinorModel::intrinsic || f.chart.signature != SurfaceSignature::riemannian)
        throw std::invalid_argument("dirac: only the intrinsic Riemannian model is supported");
    const std::array<SpinorField, 2> nabla{spinor_covariant_derivative(f, 0), spinor_covariant_derivative(f, 1)};
    SpinorField out{f.chart, f.space, std::vector<Multivector>(f.values.size())};
    for (std::size_t k = 0; k < f.values.size(); ++k)
        out.values[k] = clifford_action(f.space, basis2(0), nabla[0].values[k]) + clifford_action(f.space, basis2(1), nabla[1].values[k]);
    return out;
}

std::vector<Eigen::Matrix2d> shape_from_spinor(const SpinorField& f, double tau) {
    if (f.space.model != SpinorModel::intrinsic || f.chart.signature != SurfaceSignature::riemannian)
        throw std::invalid_argument("shape_from_spinor: only the intrinsic Riemannian model is supported");
    const Grid& g = f.chart.grid;
    const std::array<SpinorField, 2> nabla{spinor_covariant_derivative(f, 0), spinor_covariant_derivative(f, 1)};
    // g(e_a, J e_b) with J e_1 = e_2, J e_2 = -e_1
    const Eigen::Matrix2d gj = (Eigen::Matrix2d() << 0, -1, 1, 0).finished();
    std::vector<Eigen::Matrix2d> out(f.values.size());
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const double n2 = f.values[k].norm2();
        if (n2 < 1e-12) throw std::runtime_error("shape_from_spinor: |psi| vanishes at node " + g.node_name(k));
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const Multivector ixn = complex_i(clifford_action(f.space, basis2(a), nabla[sz(b)].values[k]));
                out[k](a, b) = 2.0 / n2 * (hermitian_re(ixn, f.values[k]) - 0.5 * tau * gj(a, b) * n2);
            }
    }
    return out;
}

double field_distance(const SpinorField& a, const SpinorField& b) {
    if (a.values.size() != b.values.size()) throw std::invalid_argument("field_distance: sizes differ");
    double d = 0, scale = 0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        d = std::max(d, std::sqrt((a.values[k] - b.values[k]).norm2()));
        scale = std::max(scale, std::sqrt(a.values[k].norm2()));
    }
    return scale > 0 ? d / scale : d;
}

}  // namespace spinsurf
