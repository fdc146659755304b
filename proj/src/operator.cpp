#include "fld/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace fld {

StencilCoefficients StencilCoefficients::zeros(const GridSpec& grid, const TileBox& box,
                                               int nspecies, int tile_id) {
    const Field f(grid, box, nspecies, tile_id);
    return {f, f, f, f, f, Field(grid, box, nspecies * nspecies, tile_id)};
}

double StencilCoefficients::max_abs() const {
    double m = 0.0;
    for (const Field* f : {&diag, &west, &east, &south, &north, &coupling}) {
        for (int i2 = 0; i2 < f->len2(); ++i2)
            for (double v : f->row(i2)) m = std::max(m, std::abs(v));
    }
    return m;
}

FaceCoefficients FaceCoefficients::uniform(const GridSpec& grid, const TileBox& box, int nspecies,
                                           double d, int tile_id) {
    return {Field(grid, box, nspecies, tile_id, d), Field(grid, box, nspecies, tile_id, d)};
}

Field uniform_coupling(const GridSpec& grid, const TileBox& box, std::span<const double> matrix,
                       int tile_id) {
    const auto ns = static_cast<std::size_t>(grid.nspecies);
    if (matrix.size() != ns * ns) {
        throw std::invalid_argument(
            fmt::format("coupling matrix needs {} entries, got {}", ns * ns, matrix.size()));
    }
    Field out(grid, box, grid.nspecies * grid.nspecies, tile_id);
    for (int i2 = 0; i2 < box.x2.length; ++i2)
        for (int i1 = 0; i1 < box.x1.length; ++i1)
            for (std::size_t c = 0; c < matrix.size(); ++c) out(i1, i2, static_cast<int>(c)) = matrix[c];
    return out;
}

OperatorSpec build_diffusion_operator(const GridSpec& grid, const FaceCoefficients& faces,
                                      double dt, const Field& coupling,
                                      const BoundaryCondition& bc) {
    grid.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument(fmt::format("time step must be positive and finite (got {})", dt));
    }
    const int ns = grid.nspecies;
    const TileBox& box = faces.east.box();
    if (faces.east.ncomp() != ns || !faces.north.same_shape(faces.east)) {
        throw std::invalid_argument("face coefficients do not match the species count");
    }
    if (coupling.box() != box || coupling.ncomp() != ns * ns) {
        throw std::invalid_argument("coupling field does not match the tile");
    }

    OperatorSpec op{grid, bc, dt, StencilCoefficients::zeros(grid, box, ns, faces.east.tile_id()),
                    Field(grid, box, ns, faces.east.tile_id())};
    auto& st = op.stencil;
    const double rx1 = dt / (grid.dx1 * grid.dx1);
    const double rx2 = dt / (grid.dx2 * grid.dx2);
    const bool dirichlet = bc.kind == BoundaryCondition::Kind::Dirichlet;

    auto face_d = [](const Field& f, int i1, int i2, int s) {
        const double d = f(i1, i2, s);
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw std::invalid_argument(
                fmt::format("diffusion coefficient must be finite and >= 0 (got {})", d));
        }
        return d;
    };

    for (int i2 = 0; i2 < box.x2.length; ++i2) {
        for (int i1 = 0; i1 < box.x1.length; ++i1) {
            const bool at_west = box.x1.start + i1 == 0;
            const bool at_east = box.x1.start + i1 == grid.nx1 - 1;
            const bool at_south = box.x2.start + i2 == 0;
            const bool at_north = box.x2.start + i2 == grid.nx2 - 1;
            for (int s = 0; s < ns; ++s) {
                const double w = -rx1 * face_d(faces.east, i1 - 1, i2, s);
                const double e = -rx1 * face_d(faces.east, i1, i2, s);
                const double so = -rx2 * face_d(faces.north, i1, i2 - 1, s);
                const double no = -rx2 * face_d(faces.north, i1, i2, s);
                const double c_ss = coupling(i1, i2, s * ns + s);
                if (!std::isfinite(c_ss)) throw std::invalid_argument("non-finite coupling coefficient");

                double diag = 1.0 - (w + e + so + no) + dt * c_ss;
                double src = 0.0;
                // Out-of-domain neighbors: fold into diag (zero flux) or move to
                // the right-hand side (Dirichlet).
                auto cut = [&](double coef, bool boundary) {
                    if (!boundary) return coef;
                    if (dirichlet)
                        src -= coef * bc.value;
                    else
                        diag += coef;
                    return 0.0;
                };
                st.west(i1, i2, s) = cut(w, at_west);
                st.east(i1, i2, s) = cut(e, at_east);
                st.south(i1, i2, s) = cut(so, at_south);
                st.north(i1, i2, s) = cut(no, at_north);
                st.diag(i1, i2, s) = diag;
                op.boundary_source(i1, i2, s) = src;
                for (int sp = 0; sp < ns; ++sp) {
                    if (sp == s) continue;
                    const double c = coupling(i1, i2, s * ns + sp);
                    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coupling coefficient");
                    st.coupling(i1, i2, s * ns + sp) = dt * c;
                }
                if (!std::isfinite(diag)) throw std::invalid_argument("non-finite diagonal coefficient");
            }
        }
    }
    return op;
}

void apply_stencil(const StencilCoefficients& s, const Field& x, Field& y, kernels::KernelPath path) {
    if (!x.same_shape(s.diag) || !y.same_shape(s.diag)) {
        throw std::logic_error("apply_stencil: field shape does not match the operator");
    }
    const int ns = s.nspecies();
    kernels::StencilRow row;
    row.count = x.row_size();
    row.comp_stride = ns;
    row.row_stride = x.row_stride();
    for (int i2 = 0; i2 < x.len2(); ++i2) {
        row.diag = s.diag.row(i2).data();
        row.west = s.west.row(i2).data();
        row.east = s.east.row(i2).data();
        row.south = s.south.row(i2).data();
        row.north = s.north.row(i2).data();
        row.x = x.row(i2).data();
        row.y = y.row(i2).data();
        kernels::stencil_row(path, row);
    }
    if (ns == 1) return;
    for (int i2 = 0; i2 < x.len2(); ++i2) {
        for (int i1 = 0; i1 < x.len1(); ++i1) {
            for (int sp = 0; sp < ns; ++sp) {
                double acc = y(i1, i2, sp);
                for (int sq = 0; sq < ns; ++sq) {
                    if (sq != sp) acc += s.coupling(i1, i2, sp * ns + sq) * x(i1, i2, sq);
                }
                y(i1, i2, sp) = acc;
            }
        }
    }
}

std::size_t AssembledMatrix::nonzeros() const {
    std::size_t count = 0;
    for (const auto& r : rows) count += r.size();
    return count;
}

std::vector<double> AssembledMatrix::multiply(std::span<const double> x) const {
    if (x.size() != n) throw std::logic_error("AssembledMatrix::multiply: length mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& [j, v] : rows[i]) acc += v * x[j];
        y[i] = acc;
    }
    return y;
}

double AssembledMatrix::at(std::size_t i, std::size_t j) const {
    for (const auto& [c, v] : rows.at(i)) {
        if (c == j) return v;
    }
    return 0.0;
}

std::vector<double> AssembledMatrix::to_dense() const {
    std::vector<double> dense(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, v] : rows[i]) dense[i * n + j] = v;
    return dense;
}

AssembledMatrix assemble_banded(const StencilCoefficients& s, const GridSpec& grid) {
    const TileBox& box = s.box();
    if (box != TileBox{{0, grid.nx1}, {0, grid.nx2}}) {
        throw std::invalid_argument("assemble_banded needs a single tile covering the grid");
    }
    if (grid.unknowns() > kMaxAssembledUnknowns) {
        throw std::length_error(fmt::format("assemble_banded: {} unknowns exceeds the guard of {}",
                                            grid.unknowns(), kMaxAssembledUnknowns));
    }
    const int ns = s.nspecies();
    auto index = [&](int i1, int i2, int sp) {
        return static_cast<std::size_t>(sp) +
               static_cast<std::size_t>(ns) *
                   (static_cast<std::size_t>(i1) + static_cast<std::size_t>(grid.nx1) * static_cast<std::size_t>(i2));
    };

    AssembledMatrix m;
    m.n = grid.unknowns();
    m.rows.resize(m.n);
    for (int i2 = 0; i2 < grid.nx2; ++i2) {
        for (int i1 = 0; i1 < grid.nx1; ++i1) {
            for (int sp = 0; sp < ns; ++sp) {
                auto& row = m.rows[index(i1, i2, sp)];
                if (i2 > 0) row.emplace_back(index(i1, i2 - 1, sp), s.south(i1, i2, sp));
                if (i1 > 0) row.emplace_back(index(i1 - 1, i2, sp), s.west(i1, i2, sp));
                for (int sq = 0; sq < ns; ++sq) {
                    row.emplace_back(index(i1, i2, sq),
                                     sq == sp ? s.diag(i1, i2, sp) : s.coupling(i1, i2, sp * ns + sq));
                }
                if (i1 + 1 < grid.nx1) row.emplace_back(index(i1 + 1, i2, sp), s.east(i1, i2, sp));
                if (i2 + 1 < grid.nx2) row.emplace_back(index(i1, i2 + 1, sp), s.north(i1, i2, sp));
            }
        }
    }
    return m;
}

std::string_view to_string(Limiter limiter) noexcept {
    return limiter == Limiter::None ? "none" : "levermore_pomraning";
}

Limiter parse_limiter(std::string_view text) {
    if (text == "none") return Limiter::None;
    if (text == "levermore_pomraning" || text == "lp") return Limiter::LevermorePomraning;
    throw std::invalid_argument(fmt::format("unknown limiter '{}'", text));
}

double limiter_lambda(Limiter limiter, double r) noexcept {
    if (limiter == Limiter::None) return 1.0 / 3.0;
    return (2.0 + r) / (6.0 + 3.0 * r + r * r);
}

FaceCoefficients flux_limited_D(const Field& energy, const GridSpec& grid,
                                std::span<const double> opacity, double light_speed,
                                Limiter limiter) {
    const int ns = energy.ncomp();
    if (opacity.size() != static_cast<std::size_t>(ns)) {
        throw std::invalid_argument("one opacity per species required");
    }
    if (!(light_speed > 0.0)) throw std::invalid_argument("light speed must be positive");
    for (double k : opacity) {
        if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("opacity must be positive");
    }

    FaceCoefficients out{Field(grid, energy.box(), ns, energy.tile_id()),
                         Field(grid, energy.box(), ns, energy.tile_id())};
    auto face = [&](double ea, double eb, double dx, int s) {
        const double kappa = opacity[static_cast<std::size_t>(s)];
        if (limiter == Limiter::None) return light_speed / (3.0 * kappa);
        const double ef = 0.5 * (ea + eb);
        if (!(ef > 0.0)) {
            throw std::invalid_argument(
                fmt::format("flux limiter needs positive energy density (face value {})", ef));
        }
        const double r = std::abs(eb - ea) / dx / (kappa * ef);
        return light_speed * limiter_lambda(limiter, r) / kappa;
    };

    for (int i2 = 0; i2 < energy.len2(); ++i2)
        for (int i1 = -1; i1 < energy.len1(); ++i1)
            for (int s = 0; s < ns; ++s)
                out.east(i1, i2, s) = face(energy(i1, i2, s), energy(i1 + 1, i2, s), grid.dx1, s);
    for (int i2 = -1; i2 < energy.len2(); ++i2)
        for (int i1 = 0; i1 < energy.len1(); ++i1)
            for (int s = 0; s < ns; ++s)
                out.north(i1, i2, s) = face(energy(i1, i2, s), energy(i1, i2 + 1, s), grid.dx2, s);
    return out;
}

}  // namespace fld
