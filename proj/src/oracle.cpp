#include "fld/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace fld::oracle {

DenseSystem::DenseSystem(std::size_t size) : n(size), matrix(size * size, 0.0), rhs(size, 0.0) {}

std::vector<double> DenseSystem::multiply(std::span<const double> x) const {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double sequential_dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("sequential_dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(sequential_dot(x, x)); }

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

std::vector<double> dense_solve(const DenseSystem& sys) {
    const std::size_t n = sys.n;
    if (n > kMaxDenseUnknowns) {
        throw std::length_error(fmt::format("dense_solve: N = {} exceeds the guard {}", n, kMaxDenseUnknowns));
    }
    if (sys.matrix.size() != n * n || sys.rhs.size() != n) {
        throw std::invalid_argument("dense_solve: matrix / rhs sizes do not match N");
    }
    std::vector<double> lu = sys.matrix;
    std::vector<double> x = sys.rhs;
    double scale = 0.0;
    for (double v : lu) scale = std::max(scale, std::abs(v));
    const double pivot_floor = 1e-14 * scale;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu[i * n + k]) > std::abs(lu[piv * n + k])) piv = i;
        }
        if (!(std::abs(lu[piv * n + k]) > pivot_floor)) {
            throw SingularMatrixError(fmt::format("dense_solve: matrix singular to tolerance at column {}", k));
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[piv * n + j]);
            std::swap(x[k], x[piv]);
        }
        const double d = lu[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu[i * n + k] / d;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
            x[i] -= f * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double acc = x[k];
        for (std::size_t j = k + 1; j < n; ++j) acc -= lu[k * n + j] * x[j];
        x[k] = acc / lu[k * n + k];
    }

    const auto ax = sys.multiply(x);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = ax[i] - sys.rhs[i];
    if (norm2(r) > 1e-10 * norm2(sys.rhs)) {
        throw std::runtime_error(fmt::format("dense_solve: residual check failed ({:.3e} relative)",
                                             norm2(r) / norm2(sys.rhs)));
    }
    return x;
}

namespace {

void check_lstsq_shape(std::span<const double> a, std::size_t rows, std::size_t cols,
                       std::span<const double> e) {
    if (rows < cols || cols == 0 || cols > 16) {
        throw std::invalid_argument(fmt::format("lstsq: need rows >= cols, 1 <= cols <= 16 (got {}x{})", rows, cols));
    }
    if (a.size() != rows * cols || e.size() != rows) throw std::invalid_argument("lstsq: size mismatch");
}

double residual_of(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> m, std::span<const double> e) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        double r = -e[i];
        for (std::size_t j = 0; j < cols; ++j) r += a[i * cols + j] * m[j];
        acc += r * r;
    }
    return std::sqrt(acc);
}

}  // namespace

LstsqResult dense_lstsq(std::span<const double> a_in, std::size_t rows, std::size_t cols,
                        std::span<const double> e) {
    check_lstsq_shape(a_in, rows, cols, e);
    std::vector<double> a(a_in.begin(), a_in.end());
    std::vector<double> qte(e.begin(), e.end());
    for (std::size_t k = 0; k < cols; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k; i < rows; ++i) alpha += a[i * cols + k] * a[i * cols + k];
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) throw SingularMatrixError(fmt::format("dense_lstsq: column {} is zero", k));
        if (a[k * cols + k] > 0.0) alpha = -alpha;
        std::vector<double> v(rows, 0.0);
        for (std::size_t i = k; i < rows; ++i) v[i] = a[i * cols + k];
        v[k] -= alpha;
        double vv = 0.0;
        for (std::size_t i = k; i < rows; ++i) vv += v[i] * v[i];
        if (vv == 0.0) continue;
        for (std::size_t j = k; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i] * a[i * cols + j];
            const double f = 2.0 * dot / vv;
            for (std::size_t i = k; i < rows; ++i) a[i * cols + j] -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < rows; ++i) dot += v[i] * qte[i];
        const double f = 2.0 * dot / vv;
        for (std::size_t i = k; i < rows; ++i) qte[i] -= f * v[i];
    }
    double rmax = 0.0;
    for (std::size_t k = 0; k < cols; ++k) rmax = std::max(rmax, std::abs(a[k * cols + k]));
    LstsqResult out;
    out.m.assign(cols, 0.0);
    for (std::size_t k = cols; k-- > 0;) {
        const double d = a[k * cols + k];
        if (!(std::abs(d) > 1e-14 * rmax)) {
            throw SingularMatrixError(fmt::format("dense_lstsq: rank deficient at column {}", k));
        }
        double acc = qte[k];
        for (std::size_t j = k + 1; j < cols; ++j) acc -= a[k * cols + j] * out.m[j];
        out.m[k] = acc / d;
    }
    out.residual = residual_of(a_in, rows, cols, out.m, e);
    return out;
}

LstsqResult dense_lstsq_normal(std::span<const double> a, std::size_t rows, std::size_t cols,
                               std::span<const double> e) {
    check_lstsq_shape(a, rows, cols, e);
    std::vector<double> g(cols * cols, 0.0);
    std::vector<double> rhs(cols, 0.0);
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t r = 0; r < rows; ++r) g[i * cols + j] += a[r * cols + i] * a[r * cols + j];
        }
        for (std::size_t r = 0; r < rows; ++r) rhs[i] += a[r * cols + i] * e[r];
    }
    // Cholesky G = L L^T in place (lower triangle).
    for (std::size_t j = 0; j < cols; ++j) {
        double d = g[j * cols + j];
        for (std::size_t k = 0; k < j; ++k) d -= g[j * cols + k] * g[j * cols + k];
        if (!(d > 0.0)) throw SingularMatrixError("dense_lstsq_normal: Gram matrix not positive definite");
        d = std::sqrt(d);
        g[j * cols + j] = d;
        for (std::size_t i = j + 1; i < cols; ++i) {
            double v = g[i * cols + j];
            for (std::size_t k = 0; k < j; ++k) v -= g[i * cols + k] * g[j * cols + k];
            g[i * cols + j] = v / d;
        }
    }
    LstsqResult out;
    out.m = rhs;
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t k = 0; k < i; ++k) out.m[i] -= g[i * cols + k] * out.m[k];
        out.m[i] /= g[i * cols + i];
    }
    for (std::size_t i = cols; i-- > 0;) {
        for (std::size_t k = i + 1; k < cols; ++k) out.m[i] -= g[k * cols + i] * out.m[k];
        out.m[i] /= g[i * cols + i];
    }
    out.residual = residual_of(a, rows, cols, out.m, e);
    return out;
}

DiffusionProblem DiffusionProblem::uniform(const GridSpec& grid, double dt, double d,
                                           std::vector<double> coupling, BoundaryCondition bc) {
    DiffusionProblem p;
    p.grid = grid;
    p.dt = dt;
    const std::size_t faces = static_cast<std::size_t>(grid.nx1 + 1) * (grid.nx2 + 1) * grid.nspecies;
    p.d_east.assign(faces, d);
    p.d_north.assign(faces, d);
    p.coupling = std::move(coupling);
    p.bc = bc;
    return p;
}

namespace {
std::size_t face_index(const GridSpec& g, int i1, int i2, int s) {
    return (static_cast<std::size_t>(i2 + 1) * (g.nx1 + 1) + static_cast<std::size_t>(i1 + 1)) * g.nspecies + s;
}
}  // namespace

double& DiffusionProblem::east(int i1, int i2, int s) { return d_east[face_index(grid, i1, i2, s)]; }
double& DiffusionProblem::north(int i1, int i2, int s) { return d_north[face_index(grid, i1, i2, s)]; }
double DiffusionProblem::east(int i1, int i2, int s) const { return d_east[face_index(grid, i1, i2, s)]; }
double DiffusionProblem::north(int i1, int i2, int s) const { return d_north[face_index(grid, i1, i2, s)]; }

AssembledDiffusion dense_diffusion(const DiffusionProblem& p) {
    const GridSpec& g = p.grid;
    const int ns = g.nspecies;
    AssembledDiffusion out{DenseSystem(g.unknowns()), std::vector<double>(g.unknowns(), 0.0)};
    if (g.unknowns() > kMaxDenseUnknowns) throw std::length_error("dense_diffusion: grid too large");
    if (p.coupling.size() != static_cast<std::size_t>(ns * ns)) {
        throw std::invalid_argument("dense_diffusion: coupling must be nspecies x nspecies");
    }
    auto idx = [&](int i1, int i2, int s) {
        return (static_cast<std::size_t>(i2) * g.nx1 + static_cast<std::size_t>(i1)) * ns + s;
    };
    const double w1 = p.dt / (g.dx1 * g.dx1);
    const double w2 = p.dt / (g.dx2 * g.dx2);
    for (int i2 = 0; i2 < g.nx2; ++i2) {
        for (int i1 = 0; i1 < g.nx1; ++i1) {
            for (int s = 0; s < ns; ++s) {
                const std::size_t row = idx(i1, i2, s);
                // Flux differences -(F_east - F_west)/dx with F = -D grad E.
                struct Nb {
                    int j1, j2;
                    double w;
                };
                const Nb nbs[4] = {{i1 - 1, i2, w1 * p.east(i1 - 1, i2, s)},
                                   {i1 + 1, i2, w1 * p.east(i1, i2, s)},
                                   {i1, i2 - 1, w2 * p.north(i1, i2 - 1, s)},
                                   {i1, i2 + 1, w2 * p.north(i1, i2, s)}};
                double diag = 1.0 + p.dt * p.coupling[static_cast<std::size_t>(s * ns + s)];
                for (const Nb& nb : nbs) {
                    const bool inside = nb.j1 >= 0 && nb.j1 < g.nx1 && nb.j2 >= 0 && nb.j2 < g.nx2;
                    if (inside) {
                        diag += nb.w;
                        out.system.a(row, idx(nb.j1, nb.j2, s)) -= nb.w;
                    } else if (p.bc.kind == BoundaryCondition::Kind::Dirichlet) {
                        diag += nb.w;
                        out.rhs_shift[row] += nb.w * p.bc.value;
                    }
                }
                out.system.a(row, row) += diag;
                for (int t = 0; t < ns; ++t) {
                    if (t != s) out.system.a(row, idx(i1, i2, t)) += p.dt * p.coupling[static_cast<std::size_t>(s * ns + t)];
                }
            }
        }
    }
    return out;
}

std::vector<double> gaussian_pulse(const GridSpec& grid, double x1c, double x2c, double sigma0,
                                   double amplitude, double d0, double t) {
    const double s2 = sigma0 * sigma0 + 2.0 * d0 * t;
    const double peak = amplitude * sigma0 * sigma0 / s2;
    std::vector<double> out;
    out.reserve(grid.unknowns());
    for (int i2 = 0; i2 < grid.nx2; ++i2) {
        for (int i1 = 0; i1 < grid.nx1; ++i1) {
            const double r1 = (i1 + 0.5) * grid.dx1 - x1c;
            const double r2 = (i2 + 0.5) * grid.dx2 - x2c;
            const double v = peak * std::exp(-(r1 * r1 + r2 * r2) / (2.0 * s2));
            for (int s = 0; s < grid.nspecies; ++s) out.push_back(v);
        }
    }
    return out;
}

}  // namespace fld::oracle
