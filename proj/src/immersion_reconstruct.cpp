#include "spinsurf/immersion_reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace spinsurf {

namespace {

Eigen::Vector2d basis2(int a) { return a == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1); }

// Euclidean dot of blade coefficients.
double coeff_dot(const Multivector& a, const Multivector& b) { return hermitian_re(a, b); }

double pair_defect(const Multivector& phi) {
    Multivector n = mv_tau(phi) * phi;
    n[0] -= 1.0;
    return n.max_abs();
}

AmbientModel checked_model(const SpinorField& field, const SpaceKind& kind) {
    kind.validate();
    if (field.values.size() != static_cast<std::size_t>(field.chart.grid.size()))
        throw std::invalid_argument("spinor field and chart sizes differ");
    const AmbientModel am = ambient_model(kind, field.space.signature);
    if (field.space.model == SpinorModel::intrinsic) {
        if (!kind.is_group() || kind.tag == SpaceTag::euclidean3)
            throw std::invalid_argument("intrinsic spinors represent immersions into metric Lie groups only, not " + kind.name());
    } else if (!(field.space.algebra() == am.algebra) || field.space.ambient.role != am.role) {
        throw std::invalid_argument("extrinsic spinor field does not live in the algebra of " + kind.name());
    }
    return am;
}

// Gram-Schmidt in an ambient metric, columns in the given order.
Eigen::MatrixXd orthonormal_columns(const AmbientModel& m, const Eigen::MatrixXd& frame) {
    Eigen::MatrixXd out = frame;
    for (int c = 0; c < frame.cols(); ++c) {
        Eigen::VectorXd v = frame.col(c);
        for (int d = 0; d < c; ++d) {
            const Eigen::VectorXd w = out.col(d);
            v -= m.inner(v, w) / m.inner(w, w) * w;
        }
        const double n2 = m.inner(v, v);
        if (std::abs(n2) < 1e-12) throw std::runtime_error("align_to: degenerate frame at the anchor");
        out.col(c) = v / std::sqrt(std::abs(n2));
    }
    return out;
}

// Orthochronous Lorentz map taking the unit future timelike u to the time axis:
// the product of the reflections in u + e_t and in e_t.
Eigen::Matrix4d boost_to_time_axis(const AmbientModel& m, const Eigen::Vector4d& u) {
    const Eigen::Vector4d w(1, 0, 0, 0);
    auto reflect = [&](const Eigen::Vector4d& n) {
        Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
        const double nn = m.inner(n, n);
        for (int c = 0; c < 4; ++c) {
            const Eigen::Vector4d col = Eigen::Vector4d::Unit(c);
            r.col(c) = col - 2 * m.inner(col, n) / nn * n;
        }
        return r;
    };
    return reflect(w) * reflect(u + w);
}

}  // namespace

Multivector xi_pairing(const SpinorSpace& s, const Multivector& phi, const Eigen::Vector2d& x) {
    return mv_tau(phi) * s.tangent(x) * phi;
}

Eigen::Vector3d xi_explicit(const Multivector& psi_star, const Eigen::Vector2d& x) {
    const Multivector q = star_map_inverse(psi_star, StarCase::riemannian);
    const Signature& sig = q.signature();
    const Multivector f1 = Multivector::basis(sig, 0), f2 = Multivector::basis(sig, 1);
    const Multivector quat_i = Multivector::blade(sig, 3, -1.0);
    const Multivector quat_j = f1;
    const Multivector w12 = f1 * f2;
    auto act = [&](const Multivector& p) { return x(0) * (f1 * p) + x(1) * (f2 * p); };
    auto im = [&](const Multivector& a, const Multivector& b) { return coeff_dot(a, b * quat_i); };
    const Multivector plus = 0.5 * (q + w12 * q * quat_i);
    const Multivector minus = q - plus;
    const double w_re = coeff_dot(act(plus), plus * quat_j) - coeff_dot(act(minus), minus * quat_j);
    const double w_im = im(act(plus), plus * quat_j) - im(act(minus), minus * quat_j);
    return {2 * im(act(minus), plus), w_re, w_im};
}

XiForm xi_form(const SpinorField& field, const SpaceKind& kind) {
    const AmbientModel am = checked_model(field, kind);
    const Chart& chart = field.chart;
    const auto n = field.values.size();
    XiForm xi;
    xi.kind = kind;
    xi.grid = chart.grid;
    xi.du.resize(n);
    xi.dv.resize(n);
    for (const auto& v : field.values) xi.unit_defect = std::max(xi.unit_defect, pair_defect(v));
    if (!(xi.unit_defect <= unit_tolerance))
        throw std::invalid_argument("xi_form: unit constraint violated by " + std::to_string(xi.unit_defect));
    const bool check_explicit =
        field.space.model == SpinorModel::intrinsic && field.space.signature == SurfaceSignature::riemannian;
    if (check_explicit) xi.explicit_defect = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const Multivector& phi = field.values[k];
        xi.du[k] = am.from_algebra(xi_pairing(field.space, phi, chart.coordinate_in_frame(k, 0)));
        xi.dv[k] = am.from_algebra(xi_pairing(field.space, phi, chart.coordinate_in_frame(k, 1)));
        if (!check_explicit) continue;
        for (int a = 0; a < 2; ++a) {
            const Multivector direct = xi_pairing(field.space, phi, basis2(a));
            const Eigen::Vector3d comp = xi_explicit(phi, basis2(a));
            const Eigen::Vector3d ref(direct[1], direct[2], direct[4]);
            xi.explicit_defect = std::max(xi.explicit_defect, (comp - ref).cwiseAbs().maxCoeff());
        }
    }
    if (check_explicit && xi.explicit_defect > explicit_tolerance)
        throw std::runtime_error("xi_form: component formula disagrees with the pairing by " +
                                 std::to_string(xi.explicit_defect));
    return xi;
}

std::vector<Eigen::VectorXd> spinor_normals(const SpinorField& field, const SpaceKind& kind) {
    const AmbientModel am = checked_model(field, kind);
    std::vector<Eigen::VectorXd> out(field.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Multivector& phi = field.values[k];
        out[k] = am.from_algebra(mv_tau(phi) * field.space.normal() * phi);
    }
    return out;
}

EtaField integrate_eta(const Chart& chart, const std::vector<Eigen::Vector2d>& t, int anchor_i, int anchor_j,
                       double tolerance) {
    const Grid& g = chart.grid;
    const auto n = static_cast<std::size_t>(g.size());
    if (t.size() != n) throw std::invalid_argument("integrate_eta: T field and chart sizes differ");
    if (anchor_i < 0 || anchor_j < 0 || anchor_i >= g.nu || anchor_j >= g.nv)
        throw std::invalid_argument("integrate_eta: anchor outside the grid");
    // beta = -<., T> on the coordinate directions
    std::vector<double> bu(n), bv(n);
    for (std::size_t k = 0; k < n; ++k) {
        bu[k] = -chart.inner(chart.coordinate_in_frame(k, 0), t[k]);
        bv[k] = -chart.inner(chart.coordinate_in_frame(k, 1), t[k]);
    }
    EtaField out;
    out.values.assign(n, 0.0);
    auto& eta = out.values;
    for (int i = anchor_i; i + 1 < g.nu; ++i)
        eta[g.index(i + 1, anchor_j)] = eta[g.index(i, anchor_j)] + 0.5 * g.hu * (bu[g.index(i, anchor_j)] + bu[g.index(i + 1, anchor_j)]);
    for (int i = anchor_i; i > 0; --i)
        eta[g.index(i - 1, anchor_j)] = eta[g.index(i, anchor_j)] - 0.5 * g.hu * (bu[g.index(i, anchor_j)] + bu[g.index(i - 1, anchor_j)]);
    for (int i = 0; i < g.nu; ++i) {
        for (int j = anchor_j; j + 1 < g.nv; ++j)
            eta[g.index(i, j + 1)] = eta[g.index(i, j)] + 0.5 * g.hv * (bv[g.index(i, j)] + bv[g.index(i, j + 1)]);
        for (int j = anchor_j; j > 0; --j)
            eta[g.index(i, j - 1)] = eta[g.index(i, j)] - 0.5 * g.hv * (bv[g.index(i, j)] + bv[g.index(i, j - 1)]);
    }
    const double area = g.hu * g.hv;
    for (int j = 1; j + 2 < g.nv; ++j)
        for (int i = 1; i + 2 < g.nu; ++i) {
            const auto k = g.index(i, j), ku = g.index(i + 1, j), kv = g.index(i, j + 1), kuv = g.index(i + 1, j + 1);
            const double loop = 0.5 * g.hu * (bu[k] + bu[ku]) + 0.5 * g.hv * (bv[ku] + bv[kuv]) -
                                0.5 * g.hu * (bu[kv] + bu[kuv]) - 0.5 * g.hv * (bv[k] + bv[kv]);
            out.closedness = std::max(out.closedness, std::abs(loop) / area);
        }
    if (!(out.closedness <= tolerance))
        throw std::runtime_error("integrate_eta: the 1-form -<., T> is not closed, loop defect " + std::to_string(out.closedness));
    return out;
}

Reconstruction reconstruct(const SpaceKind& kind, const SpinorField& field, const ReconstructOptions& options) {
    if (options.residual && !(*options.residual <= options.threshold))
        throw std::invalid_argument("reconstruct: Killing residual " + std::to_string(*options.residual) +
                                    " exceeds the threshold " + std::to_string(options.threshold));
    Reconstruction out;
    out.xi = xi_form(field, kind);
    const Grid& g = field.chart.grid;
    const auto n = field.values.size();
    out.immersion.kind = kind;
    out.immersion.grid = g;

    if (kind.is_group()) {
        const GroupModel model(kind);
        std::vector<Eigen::Vector3d> xu(n), xv(n);
        for (std::size_t k = 0; k < n; ++k) {
            xu[k] = out.xi.du[k];
            xv[k] = out.xi.dv[k];
        }
        const DarbouxResult d = darboux_integrate(model, g, xu, xv, options.base.value_or(model.identity()));
        out.immersion.group = d.points;
        out.integrability = d.residual;
        return out;
    }

    const SpinorSpace& s = field.space;
    const AmbientModel& am = s.ambient;
    std::vector<Multivector> unit(n);
    for (std::size_t k = 0; k < n; ++k) {
        unit[k] = snap_to_spin(s, field.values[k]);
        out.spin_drift = std::max(out.spin_drift, std::sqrt((unit[k] - field.values[k]).norm2()));
    }
    auto pairing = [&](std::size_t k, const Multivector& v) -> Eigen::Vector4d {
        return am.from_algebra(mv_tau(unit[k]) * v * unit[k]);
    };
    out.immersion.quadric.resize(n);
    if (kind.tag != SpaceTag::product_rminus_s2) {
        for (std::size_t k = 0; k < n; ++k) out.immersion.quadric[k] = pairing(k, am.role_vector(3));
        return out;
    }

    const GeometryData* d = options.data;
    if (!d || d->t_single.size() != n || d->f_single.size() != n)
        throw std::invalid_argument("reconstruct: R_- x S^2 needs the T and f fields of the geometry data");
    std::vector<Eigen::Vector4d> e0(n), p(n);
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
        e0[k] = pairing(k, s.tangent(d->t_single[k]) + d->f_single[k] * s.normal());
        p[k] = pairing(k, am.role_vector(3));
        mean += e0[k];
        out.orthogonality = std::max(out.orthogonality, std::abs(am.inner(e0[k], p[k])));
    }
    mean /= static_cast<double>(n);
    for (const auto& v : e0) out.e0_deviation = std::max(out.e0_deviation, (v - mean).norm());
    const double mm = am.inner(mean, mean);
    if (!(mm < 0) || mean(0) <= 0) throw std::runtime_error("reconstruct: <<e_0 phi, phi>> is not future timelike");
    const Eigen::Vector4d time_dir = mean / std::sqrt(-mm);
    const Eigen::Matrix4d boost = boost_to_time_axis(am, time_dir);

    const EtaField eta = integrate_eta(field.chart, d->t_single, 0, 0, options.eta_tolerance);
    out.integrability = eta.closedness;
    out.eta = eta.values;
    for (std::size_t k = 0; k < n; ++k) {
        Eigen::Vector4d q = p[k] + am.inner(p[k], time_dir) * time_dir;
        q /= std::sqrt(am.inner(q, q));
        q = boost * q;
        q(0) = 0;  // rounding residue of the boost
        q.tail<3>().normalize();
        out.immersion.quadric[k] = q;
        out.immersion.quadric[k](0) = eta.values[k] + options.time;
    }
    return out;
}

double ImmersionReport::max_defect() const {
    double m = 0;
    for (const auto& d : defects) m = std::max(m, d.max_interior);
    return m;
}

const ResidualField& ImmersionReport::get(const std::string& name) const {
    for (const auto& d : defects)
        if (d.name == name) return d;
    throw std::invalid_argument("immersion report has no defect named " + name);
}

namespace {

ResidualField interior_field(const Grid& g, const std::string& name, const std::vector<double>& values) {
    ResidualField r;
    r.name = name;
    r.values.assign(values.size(), 0.0);
    double sum = 0;
    int count = 0;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) {
            const auto k = g.index(i, j);
            r.values[k] = values[k];
            r.max_interior = std::max(r.max_interior, values[k]);
            sum += values[k] * values[k];
            ++count;
        }
    r.l2_interior = count ? std::sqrt(sum / count) : 0.0;
    return r;
}

}  // namespace

ImmersionReport verify_immersion(const ImmersionField& f, const Chart& chart, const GeometryData& data,
                                 const std::vector<Eigen::VectorXd>& normals) {
    const Grid& g = chart.grid;
    const auto n = static_cast<std::size_t>(g.size());
    if (f.size() != n || data.size() != n) throw std::invalid_argument("verify_immersion: immersion, chart and data sizes differ");
    if (!normals.empty() && normals.size() != n) throw std::invalid_argument("verify_immersion: normal field has the wrong size");
    if (normals.empty() && data.ambient_frame.size() != n)
        throw std::invalid_argument("verify_immersion: no normals supplied and the data carries no frame");
    const AmbientModel am = ambient_model(f.kind, chart.signature);
    const auto metric = induced_metric(f);
    const auto tang = tangent_fields(f);
    const GeometryData measured = extract_geometry(f, chart);

    std::vector<double> iso(n), nrm(n), sff(n);
    for (std::size_t k = 0; k < n; ++k) {
        iso[k] = (metric[k] - chart.metric[k]).cwiseAbs().maxCoeff();
        const Eigen::VectorXd normal = normals.empty() ? Eigen::VectorXd(data.ambient_frame[k].col(2)) : normals[k];
        const Eigen::Matrix2d& fr = chart.frame[k];
        double s = 0;
        for (int a = 0; a < 2; ++a) s += std::abs(am.inner(fr(0, a) * tang[0][k] + fr(1, a) * tang[1][k], normal));
        nrm[k] = s;
        sff[k] = (measured.second_form[k] - data.second_form[k]).cwiseAbs().maxCoeff();
    }
    ImmersionReport rep;
    rep.defects.push_back(interior_field(g, "isometry", iso));
    rep.defects.push_back(interior_field(g, "normal", nrm));
    rep.defects.push_back(interior_field(g, "second_form", sff));
    if (f.kind.is_quadric()) {
        ResidualField c;
        c.name = "containment";
        c.values.resize(n);
        double sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            c.values[k] = std::abs(quadric_defect(f.kind, f.quadric[k]));
            c.max_interior = std::max(c.max_interior, c.values[k]);
            sum += c.values[k] * c.values[k];
        }
        c.l2_interior = std::sqrt(sum / static_cast<double>(n));
        rep.defects.push_back(c);
    }
    return rep;
}

ResidualField xi_defect(const ImmersionField& f, const XiForm& xi) {
    const Grid& g = f.grid;
    const auto n = f.size();
    if (xi.du.size() != n || g.nu != xi.grid.nu || g.nv != xi.grid.nv)
        throw std::invalid_argument("xi_defect: immersion and xi grids differ");
    const auto tang = tangent_fields(f);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = (tang[0][k] - xi.du[k]).norm() + (tang[1][k] - xi.dv[k]).norm();
    return interior_field(g, "xi", v);
}

ImmersionField align_to(const ImmersionField& f, const ImmersionField& reference, const Chart& chart, std::size_t node) {
    if (f.kind.tag != reference.kind.tag || f.size() != reference.size())
        throw std::invalid_argument("align_to: immersions of different spaces or sizes");
    if (node >= f.size()) throw std::invalid_argument("align_to: anchor node outside the grid");
    ImmersionField out = f;
    const SpaceKind& kind = f.kind;
    if (kind.is_group()) {
        const GroupModel model(kind);
        const bool affine = kind.tag == SpaceTag::minkowski_r12 || kind.tag == SpaceTag::euclidean3;
        if (affine) {
            const AmbientModel am = ambient_model(kind, chart.signature);
            const Eigen::MatrixXd qa = orthonormal_columns(am, extract_geometry(f, chart).ambient_frame[node]);
            const Eigen::MatrixXd qb = orthonormal_columns(am, extract_geometry(reference, chart).ambient_frame[node]);
            const Eigen::Matrix3d rot = qb * qa.inverse();
            const Eigen::Vector3d pa = model.position(f.group[node]), pb = model.position(reference.group[node]);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const Eigen::Vector3d x = rot * (model.position(f.group[k]) - pa) + pb;
                out.group[k] = model.mul_exp(model.identity(), x, 1.0);
            }
            return out;
        }
        if (model.backend() != GroupBackend::matrix)
            throw std::invalid_argument("align_to: no left translations in the coordinate model of " + kind.name());
        const Eigen::MatrixXcd left = reference.group[node].mat * f.group[node].mat.inverse();
        for (auto& p : out.group) p.mat = left * p.mat;
        return out;
    }
    if (kind.tag == SpaceTag::product_rminus_s2) {
        const Eigen::MatrixXd fa = extract_geometry(f, chart).ambient_frame[node];
        const Eigen::MatrixXd fb = extract_geometry(reference, chart).ambient_frame[node];
        auto triad = [](const Eigen::Vector4d& x, const Eigen::VectorXd& tangent) {
            const Eigen::Vector3d a = x.tail<3>().normalized();
            Eigen::Vector3d b = tangent.tail(3);
            b = (b - b.dot(a) * a).normalized();
            Eigen::Matrix3d t;
            t << a, b, a.cross(b);
            return t;
        };
        const Eigen::Matrix3d rot = triad(reference.quadric[node], fb.col(0)) * triad(f.quadric[node], fa.col(0)).transpose();
        const double shift = reference.quadric[node](0) - f.quadric[node](0);
        for (auto& x : out.quadric) {
            x(0) += shift;
            x.tail<3>() = rot * x.tail<3>();
        }
        return out;
    }
    const AmbientModel am = ambient_model(kind, chart.signature);
    const Eigen::MatrixXd qa = orthonormal_columns(am, extract_geometry(f, chart).ambient_frame[node]);
    const Eigen::MatrixXd qb = orthonormal_columns(am, extract_geometry(reference, chart).ambient_frame[node]);
    const Eigen::Matrix4d map = qb * qa.inverse();
    for (auto& x : out.quadric) x = map * x;
    return out;
}

double immersion_distance(const ImmersionField& a, const ImmersionField& b) {
    if (a.kind.tag != b.kind.tag || a.size() != b.size()) throw std::invalid_argument("immersion_distance: incomparable immersions");
    double d = 0;
    if (a.kind.is_group()) {
        const GroupModel model(a.kind);
        for (std::size_t k = 0; k < a.size(); ++k)
            d = std::max(d, (model.position(a.group[k]) - model.position(b.group[k])).norm());
    } else {
        for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, (a.quadric[k] - b.quadric[k]).norm());
    }
    return d;
}

std::vector<Eigen::Vector3d> mesh_positions(const ImmersionField& f) {
    std::vector<Eigen::Vector3d> out(f.size());
    if (f.kind.is_group()) {
        const GroupModel model(f.kind);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = model.position(f.group[k]);
        return out;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Eigen::Vector4d& x = f.quadric[k];
        switch (f.kind.tag) {
        case SpaceTag::de_sitter: out[k] = x.tail<3>().normalized() * std::exp(std::asinh(x(0))); break;
        case SpaceTag::anti_de_sitter: out[k] = Eigen::Vector3d(x(2), x(3), std::atan2(x(1), x(0))); break;
        default: out[k] = std::exp(x(0)) * x.tail<3>(); break;
        }
    }
    return out;
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0 ? 0.0 : x);  // no negative zero
    return buf;
}

template <class Emit>
void for_each_triangle(const Grid& g, Emit emit) {
    for (int j = 0; j + 1 < g.nv; ++j)
        for (int i = 0; i + 1 < g.nu; ++i) {
            const auto a = g.index(i, j), b = g.index(i + 1, j), c = g.index(i + 1, j + 1), d = g.index(i, j + 1);
            emit(a, b, c);
            emit(a, c, d);
        }
}

void check_mesh(const Grid& g, const std::vector<Eigen::Vector3d>& points) {
    if (points.size() != static_cast<std::size_t>(g.size())) throw std::invalid_argument("mesh export: point count differs from the grid");
}

}  // namespace

void write_obj(std::ostream& out, const Grid& grid, const std::vector<Eigen::Vector3d>& points) {
    check_mesh(grid, points);
    for (const auto& p : points) out << "v " << fmt(p(0)) << ' ' << fmt(p(1)) << ' ' << fmt(p(2)) << '\n';
    for_each_triangle(grid, [&](std::size_t a, std::size_t b, std::size_t c) {
        out << "f " << a + 1 << ' ' << b + 1 << ' ' << c + 1 << '\n';
    });
}

void write_ply(std::ostream& out, const Grid& grid, const std::vector<Eigen::Vector3d>& points) {
    check_mesh(grid, points);
    const int faces = 2 * (grid.nu - 1) * (grid.nv - 1);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nelement face " << faces
        << "\nproperty list uchar int vertex_indices\nend_header\n";
    for (const auto& p : points) out << fmt(p(0)) << ' ' << fmt(p(1)) << ' ' << fmt(p(2)) << '\n';
    for_each_triangle(grid, [&](std::size_t a, std::size_t b, std::size_t c) { out << "3 " << a << ' ' << b << ' ' << c << '\n'; });
}

void write_r4_csv(std::ostream& out, const ImmersionField& f) {
    if (!f.kind.is_quadric()) throw std::invalid_argument("write_r4_csv: only quadric kinds carry R^4 coordinates");
    const Grid& g = f.grid;
    out << "i,j,x0,x1,x2,x3\n";
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            const Eigen::Vector4d& x = f.quadric[g.index(i, j)];
            out << i << ',' << j << ',' << fmt(x(0)) << ',' << fmt(x(1)) << ',' << fmt(x(2)) << ',' << fmt(x(3)) << '\n';
        }
}

}  // namespace spinsurf
