#include "spinsurf/metric_lie_group.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace spinsurf {

bool SpaceKind::is_group() const { return !is_quadric(); }

bool SpaceKind::is_quadric() const {
    return tag == SpaceTag::de_sitter || tag == SpaceTag::anti_de_sitter || tag == SpaceTag::product_rminus_s2;
}

double SpaceKind::sigma() const {
    if (tag == SpaceTag::su12) return -2.0;
    if (tag != SpaceTag::lkt) throw std::invalid_argument("sigma is only defined for L(kappa,tau)");
    return kappa / (2.0 * tau);
}

void SpaceKind::validate() const {
    switch (tag) {
    case SpaceTag::lkt:
        if (tau == 0.0) throw std::invalid_argument("L(kappa,tau) requires tau != 0");
        break;
    case SpaceTag::su12:
        if (kappa != -4.0 || tau != 1.0) throw std::invalid_argument("SU(1,1) model is L(-4,1)");
        break;
    case SpaceTag::algebra_a:
    case SpaceTag::algebra_b:
    case SpaceTag::product_h2xr:
    case SpaceTag::product_rxs12:
        if (alpha == 0.0) throw std::invalid_argument("alpha must be nonzero");
        break;
    case SpaceTag::algebra_c:
    case SpaceTag::product_rxh12:
        if (delta == 0.0) throw std::invalid_argument("delta must be nonzero");
        break;
    default:
        break;
    }
}

std::string SpaceKind::name() const {
    switch (tag) {
    case SpaceTag::minkowski_r12: return "minkowski_r12";
    case SpaceTag::algebra_a: return "algebra_a";
    case SpaceTag::algebra_b: return "algebra_b";
    case SpaceTag::algebra_c: return "algebra_c";
    case SpaceTag::lkt: return "lkt";
    case SpaceTag::su12: return "su12";
    case SpaceTag::de_sitter: return "de_sitter";
    case SpaceTag::anti_de_sitter: return "anti_de_sitter";
    case SpaceTag::product_rminus_s2: return "product_rminus_s2";
    case SpaceTag::product_h2xr: return "product_h2xr";
    case SpaceTag::product_rxs12: return "product_rxs12";
    case SpaceTag::product_rxh12: return "product_rxh12";
    case SpaceTag::euclidean3: return "euclidean3";
    }
    return "unknown";
}

SpaceKind space_from_name(const std::string& n, double alpha, double delta, double kappa, double tau) {
    SpaceKind k;
    if (n == "minkowski_r12") k = SpaceKind::minkowski();
    else if (n == "algebra_a") k = SpaceKind::algebra_a(alpha);
    else if (n == "algebra_b") k = SpaceKind::algebra_b(alpha);
    else if (n == "algebra_c") k = SpaceKind::algebra_c(delta);
    else if (n == "lkt") k = SpaceKind::lkt(kappa, tau);
    else if (n == "su12") k = SpaceKind::su12();
    else if (n == "de_sitter") k = SpaceKind::de_sitter();
    else if (n == "anti_de_sitter") k = SpaceKind::anti_de_sitter();
    else if (n == "product_rminus_s2") k = SpaceKind::product_rminus_s2();
    else if (n == "product_h2xr") k = SpaceKind::product_h2xr(alpha);
    else if (n == "product_rxs12") k = SpaceKind::product_rxs12(alpha);
    else if (n == "product_rxh12") k = SpaceKind::product_rxh12(delta);
    else if (n == "euclidean3") k = SpaceKind::euclidean3();
    else throw std::invalid_argument("unknown space kind: " + n);
    k.validate();
    return k;
}

// ---- algebra ----

Signature LieAlgebra3::signature() const { return Signature::from_metric({eps[0], eps[1], eps[2]}); }

Eigen::Vector3d LieAlgebra3::bracket(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r(k) += x(i) * y(j) * c[t3(i, j, k)];
    return r;
}

Eigen::Matrix3d LieAlgebra3::gamma_matrix(const Eigen::Vector3d& x) const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) m(k, j) += x(i) * eps[static_cast<std::size_t>(k)] * gamma[t3(i, j, k)];
    return m;
}

double LieAlgebra3::inner(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const {
    return eps[0] * x(0) * y(0) + eps[1] * x(1) * y(1) + eps[2] * x(2) * y(2);
}

double LieAlgebra3::jacobi_residual() const {
    double r = 0;
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d) {
                const Eigen::Vector3d x = I.col(a), y = I.col(b), z = I.col(d);
                const Eigen::Vector3d s = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
                r = std::max(r, s.cwiseAbs().maxCoeff());
            }
    return r;
}

double LieAlgebra3::torsion_residual() const {
    double r = 0;
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const Eigen::Vector3d x = I.col(a), y = I.col(b);
            const Eigen::Vector3d s = gamma_matrix(x) * y - gamma_matrix(y) * x - bracket(x, y);
            r = std::max(r, s.cwiseAbs().maxCoeff());
        }
    return r;
}

double LieAlgebra3::metric_residual() const {
    double r = 0;
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    for (int a = 0; a < 3; ++a) {
        const Eigen::Matrix3d G = gamma_matrix(I.col(a));
        for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d)
                r = std::max(r, std::abs(inner(G * I.col(b), I.col(d)) + inner(I.col(b), G * I.col(d))));
    }
    return r;
}

double LieAlgebra3::antisymmetry_residual() const {
    double r = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r = std::max(r, std::abs(c[t3(i, j, k)] + c[t3(j, i, k)]));
    return r;
}

namespace {

void set_bracket(Tensor3& c, int i, int j, int k, double v) {
    c[t3(i, j, k)] = v;
    c[t3(j, i, k)] = -v;
}

}  // namespace

LieAlgebra3 make_algebra(const SpaceKind& kind) {
    kind.validate();
    if (kind.is_quadric()) throw std::invalid_argument("make_algebra: " + kind.name() + " is not a Lie group kind");
    LieAlgebra3 a;
    a.kind = kind;
    Tensor3& c = a.c;
    switch (kind.tag) {
    case SpaceTag::minkowski_r12:
        break;
    case SpaceTag::euclidean3:
        a.eps = {1, 1, 1};
        break;
    case SpaceTag::algebra_a:
    case SpaceTag::product_h2xr:
        set_bracket(c, 0, 1, 1, kind.alpha);
        break;
    case SpaceTag::algebra_b:
    case SpaceTag::product_rxs12:
        set_bracket(c, 0, 2, 0, kind.alpha);
        break;
    case SpaceTag::algebra_c:
    case SpaceTag::product_rxh12:
        set_bracket(c, 0, 2, 2, kind.delta);
        break;
    case SpaceTag::lkt:
    case SpaceTag::su12: {
        const double tau = kind.tau, sigma = kind.sigma();
        set_bracket(c, 0, 1, 2, 2 * tau);
        set_bracket(c, 1, 2, 0, sigma);
        set_bracket(c, 2, 0, 1, sigma);
        break;
    }
    default:
        throw std::invalid_argument("make_algebra: unsupported kind");
    }
    // Koszul: 2<Gamma(e_i)e_j, e_k> = <[e_i,e_j],e_k> - <[e_j,e_k],e_i> + <[e_k,e_i],e_j>
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                a.gamma[t3(i, j, k)] = 0.5 * (c[t3(i, j, k)] * a.eps[static_cast<std::size_t>(k)] -
                                              c[t3(j, k, i)] * a.eps[static_cast<std::size_t>(i)] +
                                              c[t3(k, i, j)] * a.eps[static_cast<std::size_t>(j)]);
    return a;
}

GammaOf gamma_of(const LieAlgebra3& alg, const Eigen::Vector3d& x) {
    const SkewOperator op{alg.signature(), alg.gamma_matrix(x)};
    return {op, skew_to_bivector(op)};
}

// ---- group models ----

namespace {

Eigen::MatrixXcd unit(int d, int r, int c, std::complex<double> v = 1.0) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    m(r, c) = v;
    return m;
}

}  // namespace

GroupModel::GroupModel(const SpaceKind& kind) : kind_(kind), alg_(make_algebra(kind)), backend_(GroupBackend::matrix) {
    using C = std::complex<double>;
    switch (kind.tag) {
    case SpaceTag::minkowski_r12:
    case SpaceTag::euclidean3:
        dim_ = 4;
        for (int i = 0; i < 3; ++i) basis_[static_cast<std::size_t>(i)] = unit(4, i, 3);
        break;
    case SpaceTag::algebra_a:
    case SpaceTag::product_h2xr:
        dim_ = 3;
        basis_ = {unit(3, 0, 0, kind.alpha), unit(3, 0, 1), unit(3, 2, 2)};
        break;
    case SpaceTag::algebra_b:
    case SpaceTag::product_rxs12:
        dim_ = 3;
        basis_ = {unit(3, 0, 1), unit(3, 2, 2), unit(3, 0, 0, -kind.alpha)};
        break;
    case SpaceTag::algebra_c:
    case SpaceTag::product_rxh12:
        dim_ = 3;
        basis_ = {unit(3, 0, 0, kind.delta), unit(3, 2, 2), unit(3, 0, 1)};
        break;
    case SpaceTag::su12: {
        dim_ = 2;
        Eigen::MatrixXcd e1(2, 2), e2(2, 2), e3(2, 2);
        e1 << 0, 1, 1, 0;
        e2 << 0, C(0, -1), C(0, 1), 0;
        e3 << C(0, 1), 0, 0, C(0, -1);
        basis_ = {e1, e2, e3};
        break;
    }
    case SpaceTag::lkt:
        backend_ = GroupBackend::coordinate;
        break;
    default:
        throw std::invalid_argument("GroupModel: unsupported kind");
    }
}

GroupPoint GroupModel::identity() const {
    GroupPoint g;
    if (backend_ == GroupBackend::matrix) g.mat = Eigen::MatrixXcd::Identity(dim_, dim_);
    g.coords = Eigen::Vector3d::Zero();
    return g;
}

GroupPoint GroupModel::from_coords(const Eigen::Vector3d& x) const {
    if (backend_ == GroupBackend::coordinate) {
        if (!in_domain(x)) throw DomainExit("point outside the model domain", x);
        GroupPoint g;
        g.coords = x;
        return g;
    }
    // matrix kinds: exponential coordinates of the first kind
    GroupPoint g = identity();
    g.mat = rep(x).exp();
    return g;
}

Eigen::MatrixXcd GroupModel::rep(const Eigen::Vector3d& a) const {
    if (backend_ != GroupBackend::matrix) throw std::logic_error("rep: coordinate backend has no matrices");
    return a(0) * basis_[0] + a(1) * basis_[1] + a(2) * basis_[2];
}

bool GroupModel::in_domain(const Eigen::Vector3d& x) const {
    if (backend_ == GroupBackend::matrix) return true;
    return 1.0 + kind_.kappa / 4.0 * (x(0) * x(0) + x(1) * x(1)) > 0.0;
}

Eigen::Matrix3d GroupModel::frame(const Eigen::Vector3d& p) const {
    if (backend_ != GroupBackend::coordinate) throw std::logic_error("frame: matrix backend");
    const double x = p(0), y = p(1), z = p(2);
    const double lam = 1.0 / (1.0 + kind_.kappa / 4.0 * (x * x + y * y));
    const double tau = kind_.tau, sigma = kind_.sigma();
    const double cs = std::cos(sigma * z), sn = std::sin(sigma * z);
    Eigen::Matrix3d E;
    E.col(0) << cs / lam, sn / lam, tau * (x * sn - y * cs);
    // the printed dz coefficient of E_2 has a sign slip; this one is orthonormal
    E.col(1) << -sn / lam, cs / lam, tau * (x * cs + y * sn);
    E.col(2) << 0, 0, 1;
    return E;
}

Eigen::Matrix3d GroupModel::metric(const Eigen::Vector3d& p) const {
    if (backend_ != GroupBackend::coordinate) throw std::logic_error("metric: matrix backend");
    const double x = p(0), y = p(1);
    const double lam = 1.0 / (1.0 + kind_.kappa / 4.0 * (x * x + y * y));
    Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
    G(0, 0) = G(1, 1) = lam * lam;
    const Eigen::Vector3d w(kind_.tau * lam * y, -kind_.tau * lam * x, 1.0);
    return G - w * w.transpose();
}

GroupPoint GroupModel::mul_exp(const GroupPoint& g, const Eigen::Vector3d& a, double t) const {
    if (!a.allFinite() || !std::isfinite(t)) throw std::invalid_argument("mul_exp: non-finite input");
    if (backend_ == GroupBackend::matrix) {
        GroupPoint r;
        r.mat = g.mat * (t * rep(a)).exp();
        r.coords = Eigen::Vector3d::Zero();
        return r;
    }
    const double speed = std::abs(t) * a.norm();
    const int n = std::max(2, static_cast<int>(std::ceil(speed / 0.01)));
    const double h = t / n;
    Eigen::Vector3d x = g.coords;
    auto f = [&](const Eigen::Vector3d& p) -> Eigen::Vector3d {
        if (!in_domain(p)) throw DomainExit("flow left the model domain", x);
        return frame(p) * a;
    };
    for (int s = 0; s < n; ++s) {
        const Eigen::Vector3d k1 = f(x);
        const Eigen::Vector3d k2 = f(x + 0.5 * h * k1);
        const Eigen::Vector3d k3 = f(x + 0.5 * h * k2);
        const Eigen::Vector3d k4 = f(x + h * k3);
        const Eigen::Vector3d next = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!in_domain(next)) throw DomainExit("flow left the model domain", x);
        x = next;
    }
    GroupPoint r;
    r.coords = x;
    return r;
}

Eigen::Vector3d GroupModel::maurer_cartan(const GroupPoint& g, const GroupPoint& dg) const {
    if (backend_ == GroupBackend::coordinate) return frame(g.coords).colPivHouseholderQr().solve(dg.coords);
    return decompose(g.mat.inverse() * dg.mat);
}

Eigen::Vector3d GroupModel::decompose(const Eigen::MatrixXcd& m) const {
    if (backend_ != GroupBackend::matrix) throw std::logic_error("decompose: coordinate backend");
    const int d2 = dim_ * dim_;
    Eigen::MatrixXd A(2 * d2, 3);
    Eigen::VectorXd b(2 * d2);
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < d2; ++r) {
            A(r, k) = basis_[static_cast<std::size_t>(k)](r % dim_, r / dim_).real();
            A(d2 + r, k) = basis_[static_cast<std::size_t>(k)](r % dim_, r / dim_).imag();
        }
    for (int r = 0; r < d2; ++r) {
        b(r) = m(r % dim_, r / dim_).real();
        b(d2 + r) = m(r % dim_, r / dim_).imag();
    }
    return A.colPivHouseholderQr().solve(b);
}

double GroupModel::distance(const GroupPoint& a, const GroupPoint& b) const {
    if (backend_ == GroupBackend::coordinate) return (b.coords - a.coords).norm();
    const Eigen::MatrixXcd m = a.mat.inverse() * b.mat;
    return m.log().norm();
}

Eigen::Vector3d GroupModel::position(const GroupPoint& g) const {
    if (backend_ == GroupBackend::coordinate) return g.coords;
    if (kind_.tag == SpaceTag::minkowski_r12 || kind_.tag == SpaceTag::euclidean3)
        return Eigen::Vector3d(g.mat(0, 3).real(), g.mat(1, 3).real(), g.mat(2, 3).real());
    return decompose(g.mat.log());
}

double GroupModel::commutator_residual() const {
    if (backend_ != GroupBackend::matrix) return 0.0;
    double r = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto& A = basis_[static_cast<std::size_t>(i)];
            const auto& B = basis_[static_cast<std::size_t>(j)];
            Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(dim_, dim_);
            for (int k = 0; k < 3; ++k) expect += alg_.c[t3(i, j, k)] * basis_[static_cast<std::size_t>(k)];
            r = std::max(r, (A * B - B * A - expect).cwiseAbs().maxCoeff());
        }
    return r;
}

double GroupModel::frame_bracket_residual(const Eigen::Vector3d& x, double h) const {
    if (backend_ != GroupBackend::coordinate) return 0.0;
    // Jacobian of each frame field by central differences
    std::array<Eigen::Matrix3d, 3> jac;
    for (int d = 0; d < 3; ++d) {
        Eigen::Vector3d dx = Eigen::Vector3d::Zero();
        dx(d) = h;
        const Eigen::Matrix3d D = (frame(x + dx) - frame(x - dx)) / (2 * h);
        for (int f = 0; f < 3; ++f) jac[static_cast<std::size_t>(f)].col(d) = D.col(f);
    }
    const Eigen::Matrix3d E = frame(x);
    double r = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Eigen::Vector3d br = jac[static_cast<std::size_t>(j)] * E.col(i) - jac[static_cast<std::size_t>(i)] * E.col(j);
            Eigen::Vector3d expect = Eigen::Vector3d::Zero();
            for (int k = 0; k < 3; ++k) expect += alg_.c[t3(i, j, k)] * E.col(k);
            r = std::max(r, (br - expect).cwiseAbs().maxCoeff());
        }
    return r;
}

DarbouxResult darboux_integrate(const GroupModel& model, const Grid& grid, const std::vector<Eigen::Vector3d>& xi_u,
                                const std::vector<Eigen::Vector3d>& xi_v, const GroupPoint& base, bool row_first) {
    const auto n = static_cast<std::size_t>(grid.size());
    if (xi_u.size() != n || xi_v.size() != n) throw std::invalid_argument("darboux_integrate: xi size differs from grid");
    for (std::size_t k = 0; k < n; ++k)
        if (!xi_u[k].allFinite() || !xi_v[k].allFinite()) throw std::invalid_argument("darboux_integrate: NaN in xi at node " + std::to_string(k));
    auto step_u = [&](const GroupPoint& g, int i, int j) {
        return model.mul_exp(g, 0.5 * (xi_u[grid.index(i, j)] + xi_u[grid.index(i + 1, j)]), grid.hu);
    };
    auto step_v = [&](const GroupPoint& g, int i, int j) {
        return model.mul_exp(g, 0.5 * (xi_v[grid.index(i, j)] + xi_v[grid.index(i, j + 1)]), grid.hv);
    };
    DarbouxResult out;
    out.points.resize(n);
    out.points[grid.index(0, 0)] = base;
    if (row_first) {
        for (int i = 0; i + 1 < grid.nu; ++i) out.points[grid.index(i + 1, 0)] = step_u(out.points[grid.index(i, 0)], i, 0);
        for (int i = 0; i < grid.nu; ++i)
            for (int j = 0; j + 1 < grid.nv; ++j) out.points[grid.index(i, j + 1)] = step_v(out.points[grid.index(i, j)], i, j);
    } else {
        for (int j = 0; j + 1 < grid.nv; ++j) out.points[grid.index(0, j + 1)] = step_v(out.points[grid.index(0, j)], 0, j);
        for (int j = 0; j < grid.nv; ++j)
            for (int i = 0; i + 1 < grid.nu; ++i) out.points[grid.index(i + 1, j)] = step_u(out.points[grid.index(i, j)], i, j);
    }
    const double area = grid.hu * grid.hv;
    out.plaquette.assign(static_cast<std::size_t>((grid.nu - 1) * (grid.nv - 1)), 0.0);
    for (int j = 0; j + 1 < grid.nv; ++j)
        for (int i = 0; i + 1 < grid.nu; ++i) {
            const GroupPoint& g = out.points[grid.index(i, j)];
            const GroupPoint a = step_v(step_u(g, i, j), i + 1, j);
            const GroupPoint b = step_u(step_v(g, i, j), i, j + 1);
            const double d = model.distance(a, b) / area;
            out.plaquette[static_cast<std::size_t>(j * (grid.nu - 1) + i)] = d;
            const bool interior = i >= 1 && j >= 1 && i + 2 < grid.nu && j + 2 < grid.nv;
            if (interior) out.residual = std::max(out.residual, d);
        }
    return out;
}

GroupPoint operator+(const GroupPoint& a, const GroupPoint& b) {
    GroupPoint r;
    if (a.mat.size()) r.mat = a.mat + b.mat;
    r.coords = a.coords + b.coords;
    return r;
}

GroupPoint operator-(const GroupPoint& a, const GroupPoint& b) {
    GroupPoint r;
    if (a.mat.size()) r.mat = a.mat - b.mat;
    r.coords = a.coords - b.coords;
    return r;
}

GroupPoint operator*(double s, const GroupPoint& a) {
    GroupPoint r;
    if (a.mat.size()) r.mat = s * a.mat;
    r.coords = s * a.coords;
    return r;
}

}  // namespace spinsurf
