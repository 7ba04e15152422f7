#pragma once

#include <stdexcept>
#include <string>

namespace spinsurf {

// Uniform rectangular parameter grid. Node (i, j) sits at (u0 + i hu, v0 + j hv);
// storage is row-major with i running fastest.
struct Grid {
    int nu = 0, nv = 0;
    double u0 = 0, v0 = 0, hu = 0, hv = 0;

    static Grid over(int nu, int nv, double u0, double u1, double v0, double v1) {
        if (nu < 2 || nv < 2) throw std::invalid_argument("grid needs at least 2 nodes per direction");
        if (!(u1 > u0) || !(v1 > v0)) throw std::invalid_argument("grid needs a nonempty domain");
        return Grid{nu, nv, u0, v0, (u1 - u0) / (nu - 1), (v1 - v0) / (nv - 1)};
    }
    int size() const { return nu * nv; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j * nu + i); }
    double u(int i) const { return u0 + i * hu; }
    double v(int j) const { return v0 + j * hv; }
    bool interior(int i, int j) const { return i > 0 && j > 0 && i + 1 < nu && j + 1 < nv; }
    std::string node_name(std::size_t k) const {
        return "(" + std::to_string(static_cast<int>(k) % nu) + "," + std::to_string(static_cast<int>(k) / nu) + ")";
    }
};

}  // namespace spinsurf
