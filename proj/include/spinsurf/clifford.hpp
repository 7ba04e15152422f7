#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace spinsurf {

// Metric signs of an orthonormal basis. The Clifford square of basis vector i
// is -metric(i), so v*v = -<v,v> for every vector v.
class Signature {
public:
    static constexpr int max_dim = 4;

    Signature() = default;
    // Canonical ordering: p vectors with <e,e> = -1 first, then q with <e,e> = +1.
    Signature(int p, int q);
    static Signature from_metric(std::initializer_list<int> signs);
    static Signature from_metric(std::span<const int> signs);

    int dim() const { return n_; }
    int size() const { return 1 << n_; }
    int metric(int i) const { return eps_[static_cast<std::size_t>(i)]; }
    int square(int i) const { return -eps_[static_cast<std::size_t>(i)]; }
    int p() const;
    int q() const;
    bool is_canonical() const;
    // Index into the shared product-table cache.
    int key() const;

    friend bool operator==(const Signature& a, const Signature& b) {
        return a.n_ == b.n_ && a.eps_ == b.eps_;
    }

private:
    std::array<int, max_dim> eps_{1, 1, 1, 1};
    int n_ = 0;
};

using Blade = unsigned;

int grade_of(Blade b);

// Sign of blade(a)*blade(b) = sign * blade(a ^ b).
int blade_product_sign(const Signature& sig, Blade a, Blade b);

class Multivector {
public:
    Multivector() = default;
    explicit Multivector(const Signature& sig) : sig_(sig) {}

    static Multivector scalar(const Signature& sig, double x);
    static Multivector basis(const Signature& sig, int i);
    static Multivector blade(const Signature& sig, Blade mask, double coeff = 1.0);
    static Multivector vector(const Signature& sig, std::span<const double> coords);

    const Signature& signature() const { return sig_; }
    int size() const { return sig_.size(); }

    double operator[](Blade b) const { return c_[b]; }
    double& operator[](Blade b) { return c_[b]; }

    double scalar_part() const { return c_[0]; }
    Multivector grade(int k) const;
    Multivector even() const;
    Multivector odd() const;
    // Coordinates of the grade-1 part in basis order.
    Eigen::VectorXd vector_part() const;

    double max_abs() const;
    double norm2() const;  // Euclidean sum of squared coefficients

    Multivector& operator+=(const Multivector& o);
    Multivector& operator-=(const Multivector& o);
    Multivector& operator*=(double s);

    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator*(Multivector a, double s) { return a *= s; }
    friend Multivector operator*(double s, Multivector a) { return a *= s; }
    friend Multivector operator/(Multivector a, double s) { return a *= 1.0 / s; }
    Multivector operator-() const { return (*this) * -1.0; }

    // Clifford product.
    friend Multivector operator*(const Multivector& a, const Multivector& b);

private:
    Signature sig_;
    std::array<double, 16> c_{};
};

Multivector mv_product(const Multivector& a, const Multivector& b);
Multivector mv_tau(const Multivector& a);
// <<phi, psi>> = tau(psi) * phi
Multivector spin_product(const Multivector& phi, const Multivector& psi);
// [a,b] = (ab - ba)/2
Multivector commutator(const Multivector& a, const Multivector& b);
Multivector versor_inverse(const Multivector& g);
Multivector ad_action(const Multivector& g, const Multivector& v);
bool is_spin(const Multivector& a, double tol);

double max_abs_diff(const Multivector& a, const Multivector& b);

struct SkewOperator {
    Signature sig;
    Eigen::MatrixXd matrix;  // column j = u(e_j)

    // Max of |<Ax,y> + <x,Ay>| over basis pairs.
    double skew_defect() const;
};

SkewOperator make_skew_operator(const Signature& sig, const Eigen::MatrixXd& m);
Multivector skew_to_bivector(const SkewOperator& u);
// Inverse map: the operator xi -> [b, xi] of a bivector.
SkewOperator bivector_to_skew(const Multivector& b);

// Spin lift of a proper orthochronous isometry given by its columns A e_k.
// `hint` fixes the overall sign when supplied.
Multivector spin_lift(const Signature& sig, const Eigen::MatrixXd& frame,
                      const Multivector* hint = nullptr);
Eigen::MatrixXd ad_matrix(const Multivector& g);

// Text form: sig(p,q){ "": c0, "1": c1, "12": c12 } for canonical signatures,
// sig[++-]{...} for explicit metric orderings.
std::string to_text(const Multivector& a);
Multivector parse_multivector(std::string_view text);

// Complexified quaternions z0 + z1 I + z2 J + z3 K.
struct CQuat {
    std::array<std::complex<double>, 4> z{};

    friend CQuat operator*(const CQuat& a, const CQuat& b);
    friend CQuat operator+(const CQuat& a, const CQuat& b);
    friend CQuat operator-(const CQuat& a, const CQuat& b);
    double max_abs() const;
};

// Cl(1,2) in canonical order (e0,e1,e2) <-> H^C with e0 -> iI, e1 -> J, e2 -> -K.
CQuat hc_iso(const Multivector& a);
Multivector hc_iso_inverse(const CQuat& q);

enum class StarCase { riemannian, lorentzian };

// Cl(0,2) (quaternion model, f1 -> J, f2 -> -K) or Cl(1,1) (g0 timelike)
// into the even part of Cl(1,2).
Multivector star_map(const Multivector& psi, StarCase c);
Multivector star_map_inverse(const Multivector& psi_star, StarCase c);

namespace cl12 {
// Canonical Cl(1,2): e0 timelike, e1,e2 spacelike.
Signature sig();
Multivector e(int i);
Multivector blade(Blade mask, double c = 1.0);
// Element corresponding to the quaternion I, and the central unit e0e1e2.
Multivector quat_i();
Multivector central_i();
}  // namespace cl12

// Mutation hook for self-tests: flips the sign of one product-table entry
// while alive. Not thread safe; intended for single-threaded harnesses.
class ProductSignFault {
public:
    ProductSignFault(Blade a, Blade b);
    ~ProductSignFault();
    ProductSignFault(const ProductSignFault&) = delete;
    ProductSignFault& operator=(const ProductSignFault&) = delete;
};

}  // namespace spinsurf
