#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fld {

/// Global uniform Cartesian grid: nx1 x nx2 zones, nspecies unknowns per zone.
struct GridSpec {
    int nx1 = 200;
    int nx2 = 100;
    int nspecies = 2;
    double dx1 = 1.0;
    double dx2 = 1.0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    [[nodiscard]] std::size_t zones() const noexcept {
        return static_cast<std::size_t>(nx1) * static_cast<std::size_t>(nx2);
    }
    [[nodiscard]] std::size_t unknowns() const noexcept {
        return zones() * static_cast<std::size_t>(nspecies);
    }

    bool operator==(const GridSpec&) const = default;
};

/// Half-open index range [start, start + length) along one direction.
struct Extent {
    int start = 0;
    int length = 0;

    [[nodiscard]] int end() const noexcept { return start + length; }
    bool operator==(const Extent&) const = default;
};

/// Interior zones owned by one tile, in global zone coordinates.
struct TileBox {
    Extent x1;
    Extent x2;

    [[nodiscard]] std::size_t zones() const noexcept {
        return static_cast<std::size_t>(x1.length) * static_cast<std::size_t>(x2.length);
    }
    bool operator==(const TileBox&) const = default;
};

enum class Side { West = 0, East = 1, South = 2, North = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::West, Side::East, Side::South, Side::North};

[[nodiscard]] constexpr Side opposite(Side s) noexcept {
    switch (s) {
    case Side::West: return Side::East;
    case Side::East: return Side::West;
    case Side::South: return Side::North;
    case Side::North: return Side::South;
    }
    return s;
}

/// Treatment of the halo ring along the physical domain boundary.
struct BoundaryCondition {
    enum class Kind { ZeroFlux, Dirichlet };

    Kind kind = Kind::ZeroFlux;
    double value = 0.0;

    static BoundaryCondition zero_flux() noexcept { return {}; }
    static BoundaryCondition dirichlet(double v) noexcept { return {Kind::Dirichlet, v}; }

    bool operator==(const BoundaryCondition&) const = default;
};

/// NPRX1 x NPRX2 Cartesian decomposition of a GridSpec into tiles.
///
/// Tile ids run x1-fastest: id = p1 + nprx1 * p2. Extents are balanced with the
/// remainder handed to the lowest-indexed tiles.
class TileTopology {
public:
    /// Throws std::invalid_argument for zero tile counts or more tiles than zones.
    static TileTopology decompose(const GridSpec& grid, int nprx1, int nprx2);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] int nprx1() const noexcept { return static_cast<int>(x1_.size()); }
    [[nodiscard]] int nprx2() const noexcept { return static_cast<int>(x2_.size()); }
    [[nodiscard]] int size() const noexcept { return nprx1() * nprx2(); }

    [[nodiscard]] const std::vector<Extent>& x1_extents() const noexcept { return x1_; }
    [[nodiscard]] const std::vector<Extent>& x2_extents() const noexcept { return x2_; }

    [[nodiscard]] int tile_id(int p1, int p2) const noexcept { return p1 + nprx1() * p2; }
    [[nodiscard]] std::array<int, 2> tile_coords(int id) const noexcept {
        return {id % nprx1(), id / nprx1()};
    }
    [[nodiscard]] TileBox box(int id) const;

    /// Neighboring tile across `side`, or nullopt on the physical boundary.
    [[nodiscard]] std::optional<int> neighbor(int id, Side side) const;

private:
    TileTopology(GridSpec grid, std::vector<Extent> x1, std::vector<Extent> x2)
        : grid_(grid), x1_(std::move(x1)), x2_(std::move(x2)) {}

    GridSpec grid_;
    std::vector<Extent> x1_;
    std::vector<Extent> x2_;
};

/// Remainder-first balanced split of n zones into parts pieces.
[[nodiscard]] std::vector<Extent> split_balanced(int n, int parts);

/// Parses "AxB" into (nprx1, nprx2); throws std::invalid_argument on malformed
/// text or non-positive counts.
[[nodiscard]] std::array<int, 2> parse_topology(const std::string& text);

}  // namespace fld
