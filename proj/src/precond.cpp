#include "fld/precond.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/core.h>

namespace fld {

std::string_view to_string(PreconditionerKind kind) noexcept {
    switch (kind) {
    case PreconditionerKind::Identity: return "identity";
    case PreconditionerKind::BlockJacobi: return "block_jacobi";
    case PreconditionerKind::Spai: return "spai";
    }
    return "?";
}

PreconditionerKind parse_preconditioner(std::string_view text) {
    if (text == "identity" || text == "none") return PreconditionerKind::Identity;
    if (text == "block_jacobi") return PreconditionerKind::BlockJacobi;
    if (text == "spai") return PreconditionerKind::Spai;
    throw std::invalid_argument(fmt::format("unknown preconditioner '{}'", text));
}

SingularBlockError::SingularBlockError(int i1, int i2)
    : std::runtime_error(fmt::format("singular diagonal block at zone ({}, {})", i1, i2)),
      zone_{i1, i2} {}

namespace {

/// In-place Gauss-Jordan inverse of an n x n row-major matrix with partial
/// pivoting. Returns false if a pivot falls below rel_tol * max|a|.
bool invert_small(std::vector<double>& a, int n, double rel_tol) {
    const auto un = static_cast<std::size_t>(n);
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    std::vector<double> inv(un * un, 0.0);
    for (std::size_t i = 0; i < un; ++i) inv[i * un + i] = 1.0;
    for (std::size_t col = 0; col < un; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < un; ++r)
            if (std::abs(a[r * un + col]) > std::abs(a[piv * un + col])) piv = r;
        if (!(std::abs(a[piv * un + col]) > rel_tol * scale)) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < un; ++c) {
                std::swap(a[piv * un + c], a[col * un + c]);
                std::swap(inv[piv * un + c], inv[col * un + c]);
            }
        }
        const double p = a[col * un + col];
        for (std::size_t c = 0; c < un; ++c) {
            a[col * un + c] /= p;
            inv[col * un + c] /= p;
        }
        for (std::size_t r = 0; r < un; ++r) {
            if (r == col) continue;
            const double f = a[r * un + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < un; ++c) {
                a[r * un + c] -= f * a[col * un + c];
                inv[r * un + c] -= f * inv[col * un + c];
            }
        }
    }
    a = std::move(inv);
    return true;
}

std::vector<double> zone_block(const StencilCoefficients& s, int i1, int i2) {
    const int ns = s.nspecies();
    std::vector<double> block(static_cast<std::size_t>(ns * ns));
    for (int r = 0; r < ns; ++r)
        for (int c = 0; c < ns; ++c)
            block[static_cast<std::size_t>(r * ns + c)] =
                r == c ? s.diag(i1, i2, r) : s.coupling(i1, i2, r * ns + c);
    return block;
}

Field invert_blocks(const OperatorSpec& op) {
    const auto& st = op.stencil;
    const int ns = st.nspecies();
    Field inv(op.grid, op.box(), ns * ns, st.diag.tile_id());
    for (int i2 = 0; i2 < inv.len2(); ++i2) {
        for (int i1 = 0; i1 < inv.len1(); ++i1) {
            auto block = zone_block(st, i1, i2);
            if (!invert_small(block, ns, 1e-14)) {
                throw SingularBlockError(op.box().x1.start + i1, op.box().x2.start + i2);
            }
            for (int c = 0; c < ns * ns; ++c) inv(i1, i2, c) = block[static_cast<std::size_t>(c)];
        }
    }
    return inv;
}

/// Solves the normal equations G m = rhs (G symmetric, n x n) by elimination
/// with partial pivoting. Returns false when a pivot drops below
/// kSpaiPivotTolerance relative to the largest diagonal entry of G.
bool solve_normal_equations(std::vector<double>& g, std::vector<double>& rhs, int n) {
    const auto un = static_cast<std::size_t>(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < un; ++i) scale = std::max(scale, std::abs(g[i * un + i]));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < un; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < un; ++r)
            if (std::abs(g[r * un + col]) > std::abs(g[piv * un + col])) piv = r;
        if (!(std::abs(g[piv * un + col]) > kSpaiPivotTolerance * scale)) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < un; ++c) std::swap(g[piv * un + c], g[col * un + c]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = col + 1; r < un; ++r) {
            const double f = g[r * un + col] / g[col * un + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < un; ++c) g[r * un + c] -= f * g[col * un + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t i = un; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < un; ++c) acc -= g[i * un + c] * rhs[c];
        rhs[i] = acc / g[i * un + i];
    }
    return true;
}

/// Column-form neighbor entries of a stencil: for column (z, s), the value in
/// row (z + e1, s) is colE(z, s), and so on.
struct ColumnForm {
    Field east, west, north, south;
};

constexpr int kReach = 2;                  // rows within two zones of the column center
constexpr int kSpan = 2 * kReach + 1;

struct Offset {
    int d1;
    int d2;
};
constexpr Offset kSelf{0, 0};
constexpr std::array<Offset, 4> kNeighbors{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

}  // namespace

PreconditionerSpec identity_preconditioner() { return {}; }

PreconditionerSpec build_block_jacobi(const OperatorSpec& op) {
    PreconditionerSpec m;
    m.kind = PreconditionerKind::BlockJacobi;
    m.block_inverse = invert_blocks(op);
    return m;
}

PreconditionerSpec build_spai(Communicator& comm, const OperatorSpec& op) {
    const GridSpec& grid = op.grid;
    const TileBox& box = op.box();
    const int ns = op.nspecies();
    const int tile = op.stencil.diag.tile_id();
    const auto zero = BoundaryCondition::dirichlet(0.0);

    // Row coefficients with one halo ring; out-of-domain rows are zero.
    StencilCoefficients a = op.stencil;
    for (Field* f : {&a.diag, &a.west, &a.east, &a.south, &a.north, &a.coupling}) {
        comm.halo_exchange(*f, zero);
    }

    ColumnForm col{Field(grid, box, ns, tile), Field(grid, box, ns, tile), Field(grid, box, ns, tile),
                   Field(grid, box, ns, tile)};
    for (int i2 = 0; i2 < box.x2.length; ++i2) {
        for (int i1 = 0; i1 < box.x1.length; ++i1) {
            for (int s = 0; s < ns; ++s) {
                col.east(i1, i2, s) = a.west(i1 + 1, i2, s);
                col.west(i1, i2, s) = a.east(i1 - 1, i2, s);
                col.north(i1, i2, s) = a.south(i1, i2 + 1, s);
                col.south(i1, i2, s) = a.north(i1, i2 - 1, s);
            }
        }
    }
    for (Field* f : {&col.east, &col.west, &col.north, &col.south}) comm.halo_exchange(*f, zero);

    const Field block_inv = invert_blocks(op);

    PreconditionerSpec m;
    m.kind = PreconditionerKind::Spai;
    m.spai = StencilCoefficients::zeros(grid, box, ns, tile);
    m.spai_residual = Field(grid, box, ns, tile);
    auto& ms = *m.spai;
    ColumnForm mcol{Field(grid, box, ns, tile), Field(grid, box, ns, tile),
                    Field(grid, box, ns, tile), Field(grid, box, ns, tile)};

    // Row lookup table over offsets within kReach of the column center.
    std::vector<int> row_slot(static_cast<std::size_t>(kSpan * kSpan * ns), -1);
    auto slot_key = [&](int d1, int d2, int s) {
        return static_cast<std::size_t>(((d2 + kReach) * kSpan + (d1 + kReach)) * ns + s);
    };
    std::vector<std::size_t> used_keys;
    std::vector<double> b;  // rows x cols, row-major, grown on demand
    std::vector<Offset> unknown_zone;
    std::vector<int> unknown_species;
    std::vector<double> g;
    std::vector<double> rhs;
    std::size_t fallbacks = 0;

    for (int i2 = 0; i2 < box.x2.length; ++i2) {
        for (int i1 = 0; i1 < box.x1.length; ++i1) {
            const int gi1 = box.x1.start + i1;
            const int gi2 = box.x2.start + i2;
            for (int s0 = 0; s0 < ns; ++s0) {
                // Pattern of column (z0, s0).
                unknown_zone.clear();
                unknown_species.clear();
                for (int s = 0; s < ns; ++s) {
                    unknown_zone.push_back(kSelf);
                    unknown_species.push_back(s);
                }
                for (const Offset o : kNeighbors) {
                    const int n1 = gi1 + o.d1;
                    const int n2 = gi2 + o.d2;
                    if (n1 < 0 || n1 >= grid.nx1 || n2 < 0 || n2 >= grid.nx2) continue;
                    unknown_zone.push_back(o);
                    unknown_species.push_back(s0);
                }
                const int ncols = static_cast<int>(unknown_zone.size());

                for (auto key : used_keys) row_slot[key] = -1;
                used_keys.clear();
                b.clear();
                auto add_entry = [&](int d1, int d2, int s, int c, double v) {
                    const auto key = slot_key(d1, d2, s);
                    int r = row_slot[key];
                    if (r < 0) {
                        r = static_cast<int>(used_keys.size());
                        row_slot[key] = r;
                        used_keys.push_back(key);
                        b.resize(b.size() + static_cast<std::size_t>(ncols), 0.0);
                    }
                    b[static_cast<std::size_t>(r * ncols + c)] = v;
                };

                for (int c = 0; c < ncols; ++c) {
                    const Offset z = unknown_zone[static_cast<std::size_t>(c)];
                    const int sc = unknown_species[static_cast<std::size_t>(c)];
                    const int l1 = i1 + z.d1;
                    const int l2 = i2 + z.d2;
                    for (int s = 0; s < ns; ++s) {
                        const double v = s == sc ? a.diag(l1, l2, s) : a.coupling(l1, l2, s * ns + sc);
                        add_entry(z.d1, z.d2, s, c, v);
                    }
                    add_entry(z.d1 + 1, z.d2, sc, c, col.east(l1, l2, sc));
                    add_entry(z.d1 - 1, z.d2, sc, c, col.west(l1, l2, sc));
                    add_entry(z.d1, z.d2 + 1, sc, c, col.north(l1, l2, sc));
                    add_entry(z.d1, z.d2 - 1, sc, c, col.south(l1, l2, sc));
                }
                const int nrows = static_cast<int>(used_keys.size());
                const int target = row_slot[slot_key(0, 0, s0)];

                g.assign(static_cast<std::size_t>(ncols * ncols), 0.0);
                rhs.assign(static_cast<std::size_t>(ncols), 0.0);
                for (int r = 0; r < nrows; ++r) {
                    const double* br = b.data() + static_cast<std::ptrdiff_t>(r) * ncols;
                    for (int p = 0; p < ncols; ++p) {
                        if (br[p] == 0.0) continue;
                        for (int q = 0; q < ncols; ++q) g[static_cast<std::size_t>(p * ncols + q)] += br[p] * br[q];
                    }
                }
                for (int p = 0; p < ncols; ++p) {
                    rhs[static_cast<std::size_t>(p)] = b[static_cast<std::size_t>(target * ncols + p)];
                }

                if (!solve_normal_equations(g, rhs, ncols)) {
                    ++fallbacks;
                    std::fill(rhs.begin(), rhs.end(), 0.0);
                    for (int s = 0; s < ns; ++s) rhs[static_cast<std::size_t>(s)] = block_inv(i1, i2, s * ns + s0);
                }

                double res2 = 0.0;
                for (int r = 0; r < nrows; ++r) {
                    double acc = r == target ? -1.0 : 0.0;
                    for (int p = 0; p < ncols; ++p) {
                        acc += b[static_cast<std::size_t>(r * ncols + p)] * rhs[static_cast<std::size_t>(p)];
                    }
                    res2 += acc * acc;
                }
                m.spai_residual(i1, i2, s0) = std::sqrt(res2);

                for (int c = 0; c < ncols; ++c) {
                    const Offset z = unknown_zone[static_cast<std::size_t>(c)];
                    const double v = rhs[static_cast<std::size_t>(c)];
                    if (z.d1 == 0 && z.d2 == 0) {
                        const int s = unknown_species[static_cast<std::size_t>(c)];
                        if (s == s0)
                            ms.diag(i1, i2, s) = v;
                        else
                            ms.coupling(i1, i2, s * ns + s0) = v;
                    } else if (z.d1 == 1) {
                        mcol.east(i1, i2, s0) = v;
                    } else if (z.d1 == -1) {
                        mcol.west(i1, i2, s0) = v;
                    } else if (z.d2 == 1) {
                        mcol.north(i1, i2, s0) = v;
                    } else {
                        mcol.south(i1, i2, s0) = v;
                    }
                }
            }
        }
    }

    // Column entries that land in a neighbor tile's rows travel through the halo.
    for (Field* f : {&mcol.east, &mcol.west, &mcol.north, &mcol.south}) comm.halo_exchange(*f, zero);
    for (int i2 = 0; i2 < box.x2.length; ++i2) {
        for (int i1 = 0; i1 < box.x1.length; ++i1) {
            for (int s = 0; s < ns; ++s) {
                ms.west(i1, i2, s) = mcol.east(i1 - 1, i2, s);
                ms.east(i1, i2, s) = mcol.west(i1 + 1, i2, s);
                ms.south(i1, i2, s) = mcol.north(i1, i2 - 1, s);
                ms.north(i1, i2, s) = mcol.south(i1, i2 + 1, s);
            }
        }
    }

    const double local = static_cast<double>(fallbacks);
    m.spai_fallbacks = static_cast<std::size_t>(comm.reduce_sum(std::span(&local, 1))[0]);
    return m;
}

PreconditionerSpec build_spai(const OperatorSpec& op) {
    Communicator comm(TileTopology::decompose(op.grid, 1, 1));
    return build_spai(comm, op);
}

PreconditionerSpec build_preconditioner(Communicator& comm, PreconditionerKind kind,
                                        const OperatorSpec& op) {
    switch (kind) {
    case PreconditionerKind::Identity: return identity_preconditioner();
    case PreconditionerKind::BlockJacobi: return build_block_jacobi(op);
    case PreconditionerKind::Spai: return build_spai(comm, op);
    }
    return identity_preconditioner();
}

void apply_precond(const PreconditionerSpec& m, const Field& v, Field& out, kernels::KernelPath path) {
    switch (m.kind) {
    case PreconditionerKind::Identity:
        out.assign_interior(v);
        return;
    case PreconditionerKind::BlockJacobi: {
        const Field& inv = m.block_inverse;
        const int ns = v.ncomp();
        if (!v.same_shape(out) || inv.box() != v.box() || inv.ncomp() != ns * ns) {
            throw std::logic_error("apply_precond: shape mismatch");
        }
        std::vector<double> tmp(static_cast<std::size_t>(ns));
        for (int i2 = 0; i2 < v.len2(); ++i2) {
            for (int i1 = 0; i1 < v.len1(); ++i1) {
                for (int r = 0; r < ns; ++r) {
                    double acc = 0.0;
                    for (int c = 0; c < ns; ++c) acc += inv(i1, i2, r * ns + c) * v(i1, i2, c);
                    tmp[static_cast<std::size_t>(r)] = acc;
                }
                for (int r = 0; r < ns; ++r) out(i1, i2, r) = tmp[static_cast<std::size_t>(r)];
            }
        }
        return;
    }
    case PreconditionerKind::Spai:
        apply_stencil(*m.spai, v, out, path);
        return;
    }
}

}  // namespace fld
