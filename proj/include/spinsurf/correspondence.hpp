#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinsurf/spinor_field.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

// Target of a CMC spinor: r12 solves D psi = -i H psi (Minkowski space), h13
// solves D psi = -i H psi + i omega . psi (anti-de Sitter space).
enum class CmcTarget { r12, h13 };

struct CmcPair {
    SpinorField field;  // intrinsic Riemannian model
    double mean = 0;
    CmcTarget target = CmcTarget::r12;
};

// D psi minus the right-hand side of the tagged equation, per node.
ResidualField cmc_dirac_residual(const CmcPair& p);
// Max |indicator(psi) - 1| over nodes.
double indicator_defect(const SpinorField& f);

struct LawsonResult {
    CmcPair pair;
    double theta = 0;
    Multivector rotor;  // cos theta + sin theta e_1 e_2
};

// psi_2 = (cos theta + sin theta e_1 e_2) psi_1 with sin 2 theta = 1 / H_1.
// branch = +1 takes the principal theta, branch = -1 the companion solution,
// and the output mean curvature is H_1 cos 2 theta = branch sqrt(H_1^2 - 1)
// for H_1 > 0. Throws std::invalid_argument unless |H_1| >= 1 and the input is
// tagged r12.
LawsonResult lawson_rotate(const CmcPair& in, int branch = 1);
// Inferred inverse: H_1 = branch sqrt(H_2^2 + 1) and psi_1 = rotor^-1 psi_2.
LawsonResult lawson_inverse(const CmcPair& in, int branch = 1);

struct CalabiResult {
    Chart chart;           // metric indicator^2 g, frames e_a / indicator
    SpinorField field;     // indicator^{-1/2} psi_1 on the new chart
    double input_dirac = 0;  // max interior |D psi_1|
    double input_norm = 0;   // max | |psi_1|^2 - 1 |
    double min_indicator = 0;
};

class HemisphereViolation : public std::invalid_argument {
public:
    HemisphereViolation(const std::string& what, std::size_t node) : std::invalid_argument(what), node(node) {}
    std::size_t node;
};

// Minimal surface of R^3 (harmonic spinor of unit Euclidean length) to maximal
// surface of Minkowski space. Throws HemisphereViolation naming the first node
// with indicator <= 0, std::invalid_argument when the input is not harmonic or
// not normalized within `tolerance`.
CalabiResult calabi_map(const Chart& chart, const SpinorField& psi1, double tolerance = 1e-2);

enum class WeierstrassFlavor { euclidean_minimal, lorentz_maximal };

struct WeierstrassData {
    Grid grid;  // z = u + i v
    WeierstrassFlavor flavor = WeierstrassFlavor::euclidean_minimal;
    std::vector<std::array<std::complex<double>, 3>> phi;

    // Max |sum eps_k Phi_k^2| with eps = (1,1,1) or (-1,-1,1).
    double conformality_defect() const;
    // Max interior |i d_u Phi - d_v Phi| (discrete Cauchy-Riemann).
    double holomorphy_defect() const;
};

// Text form: a metadata header line "flavor,nu,nv,u0,v0,hu,hv", its values,
// then "i,j,re1,im1,re2,im2,re3,im3" and one row per node in storage order.
// Reading throws std::invalid_argument on malformed input.
void write_weierstrass_csv(std::ostream& out, const WeierstrassData& data);
WeierstrassData read_weierstrass_csv(std::istream& in);

// catenoid (sinh z, -i cosh z, 1), enneper (1 - z^2, i (1 + z^2), 2 z),
// plane (1, -i, 0), all Euclidean minimal.
WeierstrassData weierstrass_sample(const std::string& name, const Grid& grid);

// (Phi_1, Phi_2, Phi_3) -> (i Phi_1, i Phi_2, Phi_3), switching the flavor.
// Throws std::invalid_argument when the input is not conformal to `tolerance`.
WeierstrassData weierstrass_transform(const WeierstrassData& data, double tolerance = 1e-10);

struct WeierstrassSurface {
    ImmersionField immersion;  // euclidean3 or Minkowski translations
    Chart chart;               // conformal metric from |Phi|^2
    double path_defect = 0;    // max interior loop defect over the plaquette area
};

// x = anchor + Re int Phi dz by the trapezoid rule along the base row and then
// every column. Non-holomorphic data shows up as a path defect. Throws
// std::invalid_argument for non-conformal data and std::runtime_error when the
// path defect exceeds `tolerance`.
WeierstrassSurface weierstrass_surface(const WeierstrassData& data, const Eigen::Vector3d& anchor = Eigen::Vector3d::Zero(),
                                       double tolerance = 1e-1);

struct RoundTripReport {
    double dirac_residual = 0;    // D psi + i H psi - i tau omega psi, max interior
    double killing_residual = -1; // against the supplied S, negative without one
    double ratio = -1;            // dirac / killing
    double recovered_killing = 0; // Killing residual with S from shape_from_spinor
    double symmetry_defect = 0;   // max |S_12 - S_21|
    double trace_defect = 0;      // max |tr S / 2 - H|
    double shape_defect = -1;     // max |S - S_supplied|, negative without one
    std::vector<Eigen::Matrix2d> shape;
};

// Both directions of the Dirac-Killing equivalence on one intrinsic field.
// `mean` per node; `shape` optional. Throws std::invalid_argument when the
// indicator is not one to `tolerance`.
RoundTripReport dirac_killing_roundtrip(const SpinorField& field, const std::vector<double>& mean, double tau,
                                        const std::optional<std::vector<Eigen::Matrix2d>>& shape = std::nullopt,
                                        double tolerance = 1e-6);

}  // namespace spinsurf
