#include "fld/grid.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace fld {

void GridSpec::validate() const {
    if (nx1 < 1) throw std::invalid_argument(fmt::format("grid.nx1 must be >= 1 (got {})", nx1));
    if (nx2 < 1) throw std::invalid_argument(fmt::format("grid.nx2 must be >= 1 (got {})", nx2));
    if (nspecies < 1) {
        throw std::invalid_argument(fmt::format("grid.nspecies must be >= 1 (got {})", nspecies));
    }
    if (!(dx1 > 0.0) || !std::isfinite(dx1)) {
        throw std::invalid_argument(fmt::format("grid.dx1 must be positive (got {})", dx1));
    }
    if (!(dx2 > 0.0) || !std::isfinite(dx2)) {
        throw std::invalid_argument(fmt::format("grid.dx2 must be positive (got {})", dx2));
    }
}

std::vector<Extent> split_balanced(int n, int parts) {
    if (parts < 1) throw std::invalid_argument("tile count must be >= 1");
    if (parts > n) {
        throw std::invalid_argument(
            fmt::format("{} tiles over {} zones would leave empty tiles", parts, n));
    }
    const int base = n / parts;
    const int extra = n % parts;
    std::vector<Extent> out;
    out.reserve(static_cast<std::size_t>(parts));
    int start = 0;
    for (int p = 0; p < parts; ++p) {
        const int len = base + (p < extra ? 1 : 0);
        out.push_back({start, len});
        start += len;
    }
    return out;
}

TileTopology TileTopology::decompose(const GridSpec& grid, int nprx1, int nprx2) {
    grid.validate();
    if (nprx1 < 1 || nprx2 < 1) {
        throw std::invalid_argument(
            fmt::format("tile counts must be >= 1 (got {}x{})", nprx1, nprx2));
    }
    if (nprx1 > grid.nx1) {
        throw std::invalid_argument(
            fmt::format("nprx1 = {} exceeds nx1 = {}", nprx1, grid.nx1));
    }
    if (nprx2 > grid.nx2) {
        throw std::invalid_argument(
            fmt::format("nprx2 = {} exceeds nx2 = {}", nprx2, grid.nx2));
    }
    return TileTopology(grid, split_balanced(grid.nx1, nprx1), split_balanced(grid.nx2, nprx2));
}

TileBox TileTopology::box(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range(fmt::format("tile id {} out of range", id));
    const auto [p1, p2] = tile_coords(id);
    return {x1_[static_cast<std::size_t>(p1)], x2_[static_cast<std::size_t>(p2)]};
}

std::optional<int> TileTopology::neighbor(int id, Side side) const {
    auto [p1, p2] = tile_coords(id);
    switch (side) {
    case Side::West: --p1; break;
    case Side::East: ++p1; break;
    case Side::South: --p2; break;
    case Side::North: ++p2; break;
    }
    if (p1 < 0 || p1 >= nprx1() || p2 < 0 || p2 >= nprx2()) return std::nullopt;
    return tile_id(p1, p2);
}

std::array<int, 2> parse_topology(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) {
        throw std::invalid_argument(fmt::format("topology '{}' is not of the form AxB", text));
    }
    std::array<int, 2> out{};
    const std::string parts[2] = {text.substr(0, x), text.substr(x + 1)};
    for (int k = 0; k < 2; ++k) {
        const auto& p = parts[k];
        const auto* first = p.data();
        const auto* last = p.data() + p.size();
        auto [ptr, ec] = std::from_chars(first, last, out[static_cast<std::size_t>(k)]);
        if (p.empty() || ec != std::errc{} || ptr != last) {
            throw std::invalid_argument(fmt::format("topology '{}' is not of the form AxB", text));
        }
        if (out[static_cast<std::size_t>(k)] < 1) {
            throw std::invalid_argument(
                fmt::format("topology '{}' has a non-positive tile count", text));
        }
    }
    return out;
}

}  // namespace fld
