#include "spinsurf/clifford.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spinsurf {

namespace {

std::atomic<bool> g_fault_active{false};
std::atomic<unsigned> g_fault_pair{0};

// One sign table per (dimension, metric pattern). 5 * 16 keys, built eagerly.
struct SignTables {
    std::array<std::array<std::array<signed char, 16>, 16>, 80> t{};
    SignTables() {
        for (int n = 0; n <= 4; ++n) {
            for (int pat = 0; pat < (1 << n); ++pat) {
                auto& tab = t[static_cast<std::size_t>(n * 16 + pat)];
                for (unsigned a = 0; a < (1u << n); ++a) {
                    for (unsigned b = 0; b < (1u << n); ++b) {
                        int swaps = 0;
                        for (int i = 0; i < n; ++i) {
                            if (b & (1u << i)) swaps += std::popcount(a >> (i + 1));
                        }
                        int s = (swaps % 2) ? -1 : 1;
                        unsigned common = a & b;
                        for (int i = 0; i < n; ++i) {
                            if (common & (1u << i)) {
                                // square of e_i is -metric; metric -1 where pattern bit set
                                int metric = (pat & (1 << i)) ? -1 : 1;
                                s *= -metric;
                            }
                        }
                        tab[a][b] = static_cast<signed char>(s);
                    }
                }
            }
        }
    }
};

const SignTables& tables() {
    static const SignTables st;
    return st;
}

void require_same(const Signature& a, const Signature& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": signature mismatch");
}

int tau_sign(int k) { return ((k * (k - 1) / 2) % 2) ? -1 : 1; }

}  // namespace

Signature::Signature(int p, int q) {
    if (p < 0 || q < 0 || p + q > max_dim) throw std::invalid_argument("signature: need p,q >= 0 and p+q <= 4");
    n_ = p + q;
    for (int i = 0; i < max_dim; ++i) eps_[static_cast<std::size_t>(i)] = (i < p) ? -1 : 1;
}

Signature Signature::from_metric(std::initializer_list<int> signs) {
    std::vector<int> v(signs);
    return from_metric(std::span<const int>(v));
}

Signature Signature::from_metric(std::span<const int> signs) {
    if (signs.size() > static_cast<std::size_t>(max_dim)) throw std::invalid_argument("signature: dimension above 4");
    Signature s;
    s.n_ = static_cast<int>(signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("signature: metric signs must be +1 or -1");
        s.eps_[i] = signs[i];
    }
    return s;
}

int Signature::p() const {
    int c = 0;
    for (int i = 0; i < n_; ++i) c += eps_[static_cast<std::size_t>(i)] < 0;
    return c;
}

int Signature::q() const { return n_ - p(); }

bool Signature::is_canonical() const { return *this == Signature(p(), q()); }

int Signature::key() const {
    int pat = 0;
    for (int i = 0; i < n_; ++i)
        if (eps_[static_cast<std::size_t>(i)] < 0) pat |= 1 << i;
    return n_ * 16 + pat;
}

int grade_of(Blade b) { return std::popcount(b); }

int blade_product_sign(const Signature& sig, Blade a, Blade b) {
    int s = tables().t[static_cast<std::size_t>(sig.key())][a][b];
    if (g_fault_active.load(std::memory_order_relaxed) && g_fault_pair.load() == ((a << 4) | b)) s = -s;
    return s;
}

Multivector Multivector::scalar(const Signature& sig, double x) {
    Multivector m(sig);
    m.c_[0] = x;
    return m;
}

Multivector Multivector::basis(const Signature& sig, int i) {
    if (i < 0 || i >= sig.dim()) throw std::invalid_argument("basis index out of range");
    return blade(sig, 1u << i);
}

Multivector Multivector::blade(const Signature& sig, Blade mask, double coeff) {
    if (mask >= static_cast<Blade>(sig.size())) throw std::invalid_argument("blade mask out of range");
    Multivector m(sig);
    m.c_[mask] = coeff;
    return m;
}

Multivector Multivector::vector(const Signature& sig, std::span<const double> coords) {
    if (static_cast<int>(coords.size()) != sig.dim()) throw std::invalid_argument("vector: coordinate count differs from dimension");
    Multivector m(sig);
    for (int i = 0; i < sig.dim(); ++i) m.c_[1u << i] = coords[static_cast<std::size_t>(i)];
    return m;
}

Multivector Multivector::grade(int k) const {
    Multivector r(sig_);
    for (int b = 0; b < size(); ++b)
        if (std::popcount(static_cast<unsigned>(b)) == k) r.c_[static_cast<std::size_t>(b)] = c_[static_cast<std::size_t>(b)];
    return r;
}

Multivector Multivector::even() const {
    Multivector r(sig_);
    for (int b = 0; b < size(); ++b)
        if (std::popcount(static_cast<unsigned>(b)) % 2 == 0) r.c_[static_cast<std::size_t>(b)] = c_[static_cast<std::size_t>(b)];
    return r;
}

Multivector Multivector::odd() const { return *this - even(); }

Eigen::VectorXd Multivector::vector_part() const {
    Eigen::VectorXd v(sig_.dim());
    for (int i = 0; i < sig_.dim(); ++i) v(i) = c_[1u << i];
    return v;
}

double Multivector::max_abs() const {
    double m = 0;
    for (double x : c_) m = std::max(m, std::abs(x));
    return m;
}

double Multivector::norm2() const {
    double s = 0;
    for (double x : c_) s += x * x;
    return s;
}

Multivector& Multivector::operator+=(const Multivector& o) {
    require_same(sig_, o.sig_, "add");
    for (std::size_t i = 0; i < 16; ++i) c_[i] += o.c_[i];
    return *this;
}

Multivector& Multivector::operator-=(const Multivector& o) {
    require_same(sig_, o.sig_, "subtract");
    for (std::size_t i = 0; i < 16; ++i) c_[i] -= o.c_[i];
    return *this;
}

Multivector& Multivector::operator*=(double s) {
    for (double& x : c_) x *= s;
    return *this;
}

Multivector operator*(const Multivector& a, const Multivector& b) {
    require_same(a.sig_, b.sig_, "product");
    Multivector r(a.sig_);
    const int sz = a.size();
    const auto& tab = tables().t[static_cast<std::size_t>(a.sig_.key())];
    const bool fault = g_fault_active.load(std::memory_order_relaxed);
    for (int i = 0; i < sz; ++i) {
        const double ca = a.c_[static_cast<std::size_t>(i)];
        if (ca == 0.0) continue;
        for (int j = 0; j < sz; ++j) {
            const double cb = b.c_[static_cast<std::size_t>(j)];
            if (cb == 0.0) continue;
            int s = fault ? blade_product_sign(a.sig_, static_cast<Blade>(i), static_cast<Blade>(j))
                          : tab[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            r.c_[static_cast<std::size_t>(i ^ j)] += s * ca * cb;
        }
    }
    return r;
}

Multivector mv_product(const Multivector& a, const Multivector& b) { return a * b; }

Multivector mv_tau(const Multivector& a) {
    Multivector r = a;
    for (int b = 0; b < a.size(); ++b) r[static_cast<Blade>(b)] *= tau_sign(grade_of(static_cast<Blade>(b)));
    return r;
}

Multivector spin_product(const Multivector& phi, const Multivector& psi) {
    require_same(phi.signature(), psi.signature(), "spin_product");
    return mv_tau(psi) * phi;
}

Multivector commutator(const Multivector& a, const Multivector& b) { return 0.5 * (a * b - b * a); }

Multivector versor_inverse(const Multivector& g) {
    const Multivector t = mv_tau(g) * g;
    const double s = t.scalar_part();
    const double scale = std::max(1.0, g.norm2());
    if (std::abs(s) < 1e-14 * scale) throw std::invalid_argument("versor_inverse: element is not invertible");
    if ((t - Multivector::scalar(g.signature(), s)).max_abs() > 1e-9 * scale)
        throw std::invalid_argument("versor_inverse: tau(g)g is not a scalar");
    return mv_tau(g) / s;
}

Multivector ad_action(const Multivector& g, const Multivector& v) { return g * v * versor_inverse(g); }

bool is_spin(const Multivector& a, double tol) {
    if (a.odd().max_abs() > tol) return false;
    const Multivector t = mv_tau(a) * a;
    if (std::abs(t.scalar_part() - 1.0) > tol) return false;
    if ((t - Multivector::scalar(a.signature(), t.scalar_part())).max_abs() > tol) return false;
    const Multivector inv = mv_tau(a);
    for (int i = 0; i < a.signature().dim(); ++i) {
        const Multivector w = a * Multivector::basis(a.signature(), i) * inv;
        if ((w - w.grade(1)).max_abs() > tol) return false;
    }
    return true;
}

double max_abs_diff(const Multivector& a, const Multivector& b) { return (a - b).max_abs(); }

double SkewOperator::skew_defect() const {
    const int n = sig.dim();
    if (matrix.rows() != n || matrix.cols() != n) throw std::invalid_argument("skew operator: matrix size differs from dimension");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) G(i, i) = sig.metric(i);
    return (matrix.transpose() * G + G * matrix).cwiseAbs().maxCoeff();
}

SkewOperator make_skew_operator(const Signature& sig, const Eigen::MatrixXd& m) {
    SkewOperator u{sig, m};
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (u.skew_defect() > 1e-10 * scale) throw std::invalid_argument("skew operator: matrix is not metric-skew");
    return u;
}

Multivector skew_to_bivector(const SkewOperator& u) {
    const double scale = std::max(1.0, u.matrix.size() ? u.matrix.cwiseAbs().maxCoeff() : 0.0);
    if (u.skew_defect() > 1e-10 * scale) throw std::invalid_argument("skew_to_bivector: operator is not metric-skew");
    const int n = u.sig.dim();
    Multivector r(u.sig);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd col = u.matrix.col(j);
        const Multivector image = Multivector::vector(u.sig, std::span<const double>(col.data(), static_cast<std::size_t>(n)));
        r += (0.5 * u.sig.metric(j)) * (Multivector::basis(u.sig, j) * image);
    }
    return r;
}

SkewOperator bivector_to_skew(const Multivector& b) {
    const int n = b.signature().dim();
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j) m.col(j) = commutator(b, Multivector::basis(b.signature(), j)).vector_part();
    return SkewOperator{b.signature(), m};
}

Eigen::MatrixXd ad_matrix(const Multivector& g) {
    const int n = g.signature().dim();
    const Multivector inv = versor_inverse(g);
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j) m.col(j) = (g * Multivector::basis(g.signature(), j) * inv).vector_part();
    return m;
}

Multivector spin_lift(const Signature& sig, const Eigen::MatrixXd& frame, const Multivector* hint) {
    const int n = sig.dim();
    if (frame.rows() != n || frame.cols() != n) throw std::invalid_argument("spin_lift: frame size differs from dimension");
    std::vector<Blade> evens;
    for (int b = 0; b < sig.size(); ++b)
        if (grade_of(static_cast<Blade>(b)) % 2 == 0) evens.push_back(static_cast<Blade>(b));
    const int m = static_cast<int>(evens.size());
    // a e_k - f_k a = 0, linear in the even coefficients of a
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * sig.size(), m);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd col = frame.col(k);
        const Multivector fk = Multivector::vector(sig, std::span<const double>(col.data(), static_cast<std::size_t>(n)));
        const Multivector ek = Multivector::basis(sig, k);
        for (int c = 0; c < m; ++c) {
            const Multivector bl = Multivector::blade(sig, evens[static_cast<std::size_t>(c)]);
            const Multivector r = bl * ek - fk * bl;
            for (int b = 0; b < sig.size(); ++b) L(k * sig.size() + b, c) = r[static_cast<Blade>(b)];
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smallest = sv(m - 1);
    const double scale = std::max(1.0, frame.cwiseAbs().maxCoeff());
    if (smallest > 1e-8 * scale) throw std::invalid_argument("spin_lift: frame is not a proper isometry");
    Multivector a(sig);
    for (int c = 0; c < m; ++c) a[evens[static_cast<std::size_t>(c)]] = svd.matrixV()(c, m - 1);
    const double t = (mv_tau(a) * a).scalar_part();
    if (t <= 0) throw std::runtime_error("spin_lift: frame lies outside the identity component");
    a *= 1.0 / std::sqrt(t);
    double ref = 0;
    if (hint) {
        require_same(sig, hint->signature(), "spin_lift");
        for (int b = 0; b < sig.size(); ++b) ref += a[static_cast<Blade>(b)] * (*hint)[static_cast<Blade>(b)];
    } else {
        ref = a.scalar_part();
        if (std::abs(ref) < 1e-12) {
            for (Blade b : evens)
                if (std::abs(a[b]) > 1e-12) { ref = a[b]; break; }
        }
    }
    if (ref < 0) a *= -1.0;
    return a;
}

// ---- text form ----

namespace {

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string blade_label(Blade b) {
    std::string s;
    for (int i = 0; i < 4; ++i)
        if (b & (1u << i)) s += static_cast<char>('1' + i);
    return s;
}

struct Cursor {
    std::string_view s;
    std::size_t i = 0;
    void ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    }
    bool eat(char c) {
        ws();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) throw std::invalid_argument(std::string("multivector text: expected '") + c + "'");
    }
    int integer() {
        ws();
        int v = 0;
        auto r = std::from_chars(s.data() + i, s.data() + s.size(), v);
        if (r.ec != std::errc()) throw std::invalid_argument("multivector text: expected integer");
        i = static_cast<std::size_t>(r.ptr - s.data());
        return v;
    }
    double number() {
        ws();
        double v = 0;
        auto r = std::from_chars(s.data() + i, s.data() + s.size(), v);
        if (r.ec != std::errc()) throw std::invalid_argument("multivector text: expected number");
        i = static_cast<std::size_t>(r.ptr - s.data());
        return v;
    }
};

}  // namespace

std::string to_text(const Multivector& a) {
    const Signature& sig = a.signature();
    std::string out;
    if (sig.is_canonical()) {
        out = "sig(" + std::to_string(sig.p()) + "," + std::to_string(sig.q()) + ")";
    } else {
        out = "sig[";
        for (int i = 0; i < sig.dim(); ++i) out += sig.metric(i) > 0 ? '+' : '-';
        out += "]";
    }
    out += "{";
    bool first = true;
    for (int b = 0; b < a.size(); ++b) {
        const double c = a[static_cast<Blade>(b)];
        if (c == 0.0) continue;
        out += first ? " " : ", ";
        first = false;
        out += "\"" + blade_label(static_cast<Blade>(b)) + "\": " + fmt_double(c);
    }
    out += " }";
    return out;
}

Multivector parse_multivector(std::string_view text) {
    Cursor cur{text};
    cur.ws();
    if (cur.s.substr(cur.i, 3) != "sig") throw std::invalid_argument("multivector text: expected 'sig'");
    cur.i += 3;
    Signature sig;
    if (cur.eat('(')) {
        const int p = cur.integer();
        cur.expect(',');
        const int q = cur.integer();
        cur.expect(')');
        sig = Signature(p, q);
    } else if (cur.eat('[')) {
        std::vector<int> signs;
        while (!cur.eat(']')) {
            if (cur.eat('+')) signs.push_back(1);
            else if (cur.eat('-')) signs.push_back(-1);
            else throw std::invalid_argument("multivector text: bad metric list");
        }
        sig = Signature::from_metric(std::span<const int>(signs));
    } else {
        throw std::invalid_argument("multivector text: expected signature");
    }
    Multivector m(sig);
    cur.expect('{');
    if (cur.eat('}')) return m;
    do {
        cur.expect('"');
        Blade mask = 0;
        int last = -1;
        while (cur.i < cur.s.size() && cur.s[cur.i] != '"') {
            const int idx = cur.s[cur.i] - '1';
            if (idx < 0 || idx >= sig.dim() || idx <= last) throw std::invalid_argument("multivector text: bad blade label");
            mask |= 1u << idx;
            last = idx;
            ++cur.i;
        }
        cur.expect('"');
        cur.expect(':');
        m[mask] = cur.number();
    } while (cur.eat(','));
    cur.expect('}');
    cur.ws();
    if (cur.i != cur.s.size()) throw std::invalid_argument("multivector text: trailing characters");
    return m;
}

// ---- complexified quaternions ----

CQuat operator*(const CQuat& a, const CQuat& b) {
    const auto& x = a.z;
    const auto& y = b.z;
    CQuat r;
    r.z[0] = x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
    r.z[1] = x[0] * y[1] + x[1] * y[0] + x[2] * y[3] - x[3] * y[2];
    r.z[2] = x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1];
    r.z[3] = x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0];
    return r;
}

CQuat operator+(const CQuat& a, const CQuat& b) {
    CQuat r;
    for (std::size_t i = 0; i < 4; ++i) r.z[i] = a.z[i] + b.z[i];
    return r;
}

CQuat operator-(const CQuat& a, const CQuat& b) {
    CQuat r;
    for (std::size_t i = 0; i < 4; ++i) r.z[i] = a.z[i] - b.z[i];
    return r;
}

double CQuat::max_abs() const {
    double m = 0;
    for (const auto& c : z) m = std::max({m, std::abs(c.real()), std::abs(c.imag())});
    return m;
}

namespace {

const std::array<CQuat, 8>& hc_blade_images() {
    static const std::array<CQuat, 8> images = [] {
        using C = std::complex<double>;
        std::array<CQuat, 3> gen;
        gen[0].z = {C(0), C(0, 1), C(0), C(0)};
        gen[1].z = {C(0), C(0), C(1), C(0)};
        gen[2].z = {C(0), C(0), C(0), C(-1)};
        std::array<CQuat, 8> out;
        for (unsigned b = 0; b < 8; ++b) {
            CQuat q;
            q.z = {C(1), C(0), C(0), C(0)};
            for (unsigned i = 0; i < 3; ++i)
                if (b & (1u << i)) q = q * gen[i];
            out[b] = q;
        }
        return out;
    }();
    return images;
}

const Eigen::Matrix<double, 8, 8>& hc_inverse_matrix() {
    static const Eigen::Matrix<double, 8, 8> inv = [] {
        Eigen::Matrix<double, 8, 8> m;
        const auto& im = hc_blade_images();
        for (int b = 0; b < 8; ++b)
            for (int k = 0; k < 4; ++k) {
                m(2 * k, b) = im[static_cast<std::size_t>(b)].z[static_cast<std::size_t>(k)].real();
                m(2 * k + 1, b) = im[static_cast<std::size_t>(b)].z[static_cast<std::size_t>(k)].imag();
            }
        return Eigen::Matrix<double, 8, 8>(m.inverse());
    }();
    return inv;
}

}  // namespace

CQuat hc_iso(const Multivector& a) {
    if (!(a.signature() == Signature(1, 2))) throw std::invalid_argument("hc_iso: requires Cl(1,2) in canonical order");
    const auto& im = hc_blade_images();
    CQuat r;
    for (unsigned b = 0; b < 8; ++b) {
        const double c = a[b];
        if (c == 0.0) continue;
        for (std::size_t k = 0; k < 4; ++k) r.z[k] += c * im[b].z[k];
    }
    return r;
}

Multivector hc_iso_inverse(const CQuat& q) {
    Eigen::Matrix<double, 8, 1> v;
    for (int k = 0; k < 4; ++k) {
        v(2 * k) = q.z[static_cast<std::size_t>(k)].real();
        v(2 * k + 1) = q.z[static_cast<std::size_t>(k)].imag();
    }
    const Eigen::Matrix<double, 8, 1> c = hc_inverse_matrix() * v;
    Multivector m(Signature(1, 2));
    for (unsigned b = 0; b < 8; ++b) m[b] = c(static_cast<int>(b));
    return m;
}

// Blade masks in Cl(1,2): e0 = 1, e1 = 2, e2 = 4.
Multivector star_map(const Multivector& psi, StarCase c) {
    Multivector r(Signature(1, 2));
    if (c == StarCase::riemannian) {
        if (!(psi.signature() == Signature(0, 2))) throw std::invalid_argument("star_map: riemannian case expects Cl(0,2)");
        // quaternion coordinates of psi under f1 -> J, f2 -> -K
        const double q0 = psi[0], q1 = -psi[3], q2 = psi[1], q3 = -psi[2];
        // q0 + q1 I + i q2 J + i q3 K
        r[0] = q0;
        r[6] = -q1;
        r[5] = q2;
        r[3] = q3;
    } else {
        if (!(psi.signature() == Signature(1, 1))) throw std::invalid_argument("star_map: lorentzian case expects Cl(1,1)");
        // x -> x e2 on vectors: g0 -> e0e2, g1 -> e1e2, g0g1 -> e0e1
        r[0] = psi[0];
        r[5] = psi[1];
        r[6] = psi[2];
        r[3] = psi[3];
    }
    return r;
}

Multivector star_map_inverse(const Multivector& s, StarCase c) {
    if (!(s.signature() == Signature(1, 2))) throw std::invalid_argument("star_map_inverse: expects Cl(1,2)");
    if (s.odd().max_abs() > 0) throw std::invalid_argument("star_map_inverse: element is not even");
    if (c == StarCase::riemannian) {
        Multivector r(Signature(0, 2));
        const double q0 = s[0], q1 = -s[6], q2 = s[5], q3 = s[3];
        r[0] = q0;
        r[3] = -q1;
        r[1] = q2;
        r[2] = -q3;
        return r;
    }
    Multivector r(Signature(1, 1));
    r[0] = s[0];
    r[1] = s[5];
    r[2] = s[6];
    r[3] = s[3];
    return r;
}

namespace cl12 {
Signature sig() { return Signature(1, 2); }
Multivector e(int i) { return Multivector::basis(sig(), i); }
Multivector blade(Blade mask, double c) { return Multivector::blade(sig(), mask, c); }
Multivector quat_i() { return blade(6, -1.0); }
Multivector central_i() { return blade(7, 1.0); }
}  // namespace cl12

ProductSignFault::ProductSignFault(Blade a, Blade b) {
    if (a >= 16 || b >= 16) throw std::invalid_argument("fault: blade out of range");
    if (g_fault_active.load()) throw std::logic_error("fault: another fault is active");
    g_fault_pair.store((a << 4) | b);
    g_fault_active.store(true);
}

ProductSignFault::~ProductSignFault() { g_fault_active.store(false); }

}  // namespace spinsurf
