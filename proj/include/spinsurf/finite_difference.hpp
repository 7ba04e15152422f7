#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "spinsurf/grid.hpp"

namespace spinsurf {

namespace detail {

// sum_m c[m] f(k + o m) for a one-sided stencil pointing into the grid.
template <class T, class At, std::size_t N>
T one_sided(const At& at, int k, int o, const double (&c)[N]) {
    T acc = c[0] * at(k);
    for (std::size_t m = 1; m < N; ++m) acc = acc + c[m] * at(k + o * static_cast<int>(m));
    return acc;
}

// First derivative at position k of n samples with spacing h.
template <class T, class At>
T derivative_1d(const At& at, int n, int k, double h) {
    if (n < 3) throw std::invalid_argument("grid_partial needs at least 3 nodes per direction");
    if (k > 0 && k + 1 < n) return (1.0 / (2 * h)) * (at(k + 1) - at(k - 1));
    const int o = k == 0 ? 1 : -1;
    const double s = o / (2 * h);
    static constexpr double c3[] = {-3, 4, -1};
    static constexpr double c4[] = {-4, 7, -4, 1};
    static constexpr double c5[] = {-5, 11, -10, 5, -1};
    if (n == 3) return s * one_sided<T>(at, k, o, c3);
    if (n == 4) return s * one_sided<T>(at, k, o, c4);
    return s * one_sided<T>(at, k, o, c5);
}

}  // namespace detail

// Derivative of a nodal field along u (dir 0) or v (dir 1) at node (i, j):
// central in the interior, one-sided on the boundary rows. The five-point
// boundary stencil has the central truncation error h^2 f'''/6 and no h^3
// term, so the error of derived fields is smooth up to O(h^4) and they can be
// differentiated twice more without losing an order next to the boundary.
// Works for any value type with +, - and scalar *.
template <class T>
T grid_partial(const Grid& g, const std::vector<T>& f, int i, int j, int dir) {
    const int n = dir == 0 ? g.nu : g.nv;
    const int k = dir == 0 ? i : j;
    const double h = dir == 0 ? g.hu : g.hv;
    auto at = [&](int m) -> const T& { return dir == 0 ? f[g.index(m, j)] : f[g.index(i, m)]; };
    return detail::derivative_1d<T>(at, n, k, h);
}

// Second derivative d_a d_b at node (i, j), second order everywhere: the
// three-point stencil for a == b, closed on the boundary by a six-point
// one-sided stencil with the central error h^2 f''''/12 and no h^3 term; the
// mixed derivative nests the first-derivative stencils.
template <class T>
T grid_second(const Grid& g, const std::vector<T>& f, int i, int j, int a, int b) {
    if (a != b) {
        if (g.nv < 4) throw std::invalid_argument("grid_second needs at least 4 nodes per direction");
        auto row = [&](int jj) { return grid_partial(g, f, i, jj, 0); };
        return detail::derivative_1d<T>(row, g.nv, j, g.hv);
    }
    const int n = a == 0 ? g.nu : g.nv;
    const int k = a == 0 ? i : j;
    const double h = a == 0 ? g.hu : g.hv;
    if (n < 4) throw std::invalid_argument("grid_second needs at least 4 nodes per direction");
    auto at = [&](int m) -> const T& { return a == 0 ? f[g.index(m, j)] : f[g.index(i, m)]; };
    const double s = 1.0 / (h * h);
    if (k > 0 && k + 1 < n) return s * (at(k + 1) - 2.0 * at(k) + at(k - 1));
    const int o = k == 0 ? 1 : -1;
    static constexpr double c4[] = {2, -5, 4, -1};
    static constexpr double c5[] = {3, -9, 10, -5, 1};
    static constexpr double c6[] = {4, -14, 20, -15, 6, -1};
    if (n == 4) return s * detail::one_sided<T>(at, k, o, c4);
    if (n == 5) return s * detail::one_sided<T>(at, k, o, c5);
    return s * detail::one_sided<T>(at, k, o, c6);
}

// Fourth-order central derivative of a smooth function at a point, used to
// sample "analytic" jets of test immersions.
template <class T>
T point_derivative(const std::function<T(double, double)>& f, double u, double v, int dir, double step = 1e-3) {
    auto at = [&](double s) { return dir == 0 ? f(u + s, v) : f(u, v + s); };
    return (1.0 / (12 * step)) * (at(-2 * step) - 8.0 * at(-step) + 8.0 * at(step) - 1.0 * at(2 * step));
}

}  // namespace spinsurf
