#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fld/grid.hpp"

namespace fld {

/// Tile-local double-precision array over (i1, i2, component) with a one-zone
/// halo ring.
///
/// Local indices run i1 in [-1, len1], i2 in [-1, len2]; interior is
/// [0, len) in each direction. Storage is component-fastest, then i1, then i2,
/// which is the dictionary ordering of the global unknowns. The corner halo
/// cells exist but are never read by the five-point stencil.
class Field {
public:
    Field() = default;
    Field(const GridSpec& grid, const TileBox& box, int ncomp, int tile_id = 0, double fill = 0.0);

    /// Whole-grid field with a single tile.
    static Field global(const GridSpec& grid, int ncomp, double fill = 0.0);

    [[nodiscard]] int ncomp() const noexcept { return ncomp_; }
    [[nodiscard]] int len1() const noexcept { return box_.x1.length; }
    [[nodiscard]] int len2() const noexcept { return box_.x2.length; }
    [[nodiscard]] const TileBox& box() const noexcept { return box_; }
    [[nodiscard]] int tile_id() const noexcept { return tile_id_; }
    [[nodiscard]] int nx1() const noexcept { return nx1_; }
    [[nodiscard]] int nx2() const noexcept { return nx2_; }

    /// Distance between consecutive i2 rows in the flat storage.
    [[nodiscard]] std::ptrdiff_t row_stride() const noexcept {
        return static_cast<std::ptrdiff_t>(len1() + 2) * ncomp_;
    }
    /// Number of interior values in one i2 row.
    [[nodiscard]] std::size_t row_size() const noexcept {
        return static_cast<std::size_t>(len1()) * static_cast<std::size_t>(ncomp_);
    }
    [[nodiscard]] std::size_t interior_size() const noexcept {
        return row_size() * static_cast<std::size_t>(len2());
    }

    [[nodiscard]] std::ptrdiff_t offset(int i1, int i2, int c) const noexcept {
        return (static_cast<std::ptrdiff_t>(i2) + 1) * row_stride() +
               (static_cast<std::ptrdiff_t>(i1) + 1) * ncomp_ + c;
    }
    double& operator()(int i1, int i2, int c = 0) noexcept { return data_[static_cast<std::size_t>(offset(i1, i2, c))]; }
    double operator()(int i1, int i2, int c = 0) const noexcept {
        return data_[static_cast<std::size_t>(offset(i1, i2, c))];
    }

    /// Interior values of row i2 (contiguous).
    [[nodiscard]] std::span<double> row(int i2) noexcept {
        return {data_.data() + offset(0, i2, 0), row_size()};
    }
    [[nodiscard]] std::span<const double> row(int i2) const noexcept {
        return {data_.data() + offset(0, i2, 0), row_size()};
    }

    [[nodiscard]] std::span<double> raw() noexcept { return data_; }
    [[nodiscard]] std::span<const double> raw() const noexcept { return data_; }

    /// True when `side` of this tile lies on the physical domain boundary.
    [[nodiscard]] bool on_boundary(Side side) const noexcept;

    /// Same tile, same component count.
    [[nodiscard]] bool same_shape(const Field& other) const noexcept {
        return box_ == other.box_ && ncomp_ == other.ncomp_;
    }

    /// Sets every value including the halo.
    void fill(double v) noexcept;

    /// Copies interior values from `other` (same shape); the halo is untouched.
    void assign_interior(const Field& other);

    /// Interior values in dictionary order (component, i1, i2).
    [[nodiscard]] std::vector<double> flatten() const;
    /// Inverse of flatten; the halo is zeroed.
    void unflatten(std::span<const double> values);

    /// Writes the edge values along a side into `out` (interior-adjacent line).
    void pack_edge(Side side, std::vector<double>& out) const;
    /// Fills the halo line along a side from packed values.
    void unpack_halo(Side side, std::span<const double> in);
    /// Fills the halo line along a physical side from the boundary condition.
    void fill_boundary_halo(Side side, const BoundaryCondition& bc);

private:
    TileBox box_{};
    int ncomp_ = 0;
    int tile_id_ = 0;
    int nx1_ = 0;
    int nx2_ = 0;
    std::vector<double> data_;
};

/// Assembles a global single-tile field from per-tile fields (indexed by tile id).
[[nodiscard]] Field gather(const TileTopology& topo, std::span<const Field> tiles);

/// Restricts a global field to tile `id` of the topology (interior only).
[[nodiscard]] Field scatter(const TileTopology& topo, const Field& global, int id);

}  // namespace fld
