#include "fld/field.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/core.h>

namespace fld {

Field::Field(const GridSpec& grid, const TileBox& box, int ncomp, int tile_id, double fill)
    : box_(box), ncomp_(ncomp), tile_id_(tile_id), nx1_(grid.nx1), nx2_(grid.nx2) {
    if (ncomp < 1) throw std::invalid_argument("field needs at least one component");
    if (box.x1.length < 1 || box.x2.length < 1) throw std::invalid_argument("empty tile box");
    if (box.x1.start < 0 || box.x1.end() > grid.nx1 || box.x2.start < 0 || box.x2.end() > grid.nx2) {
        throw std::invalid_argument("tile box outside the grid");
    }
    data_.assign(static_cast<std::size_t>(len2() + 2) * static_cast<std::size_t>(row_stride()), fill);
}

Field Field::global(const GridSpec& grid, int ncomp, double fill) {
    return Field(grid, TileBox{{0, grid.nx1}, {0, grid.nx2}}, ncomp, 0, fill);
}

bool Field::on_boundary(Side side) const noexcept {
    switch (side) {
    case Side::West: return box_.x1.start == 0;
    case Side::East: return box_.x1.end() == nx1_;
    case Side::South: return box_.x2.start == 0;
    case Side::North: return box_.x2.end() == nx2_;
    }
    return false;
}

void Field::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

void Field::assign_interior(const Field& other) {
    if (!same_shape(other)) throw std::logic_error("assign_interior: shape mismatch");
    for (int i2 = 0; i2 < len2(); ++i2) {
        const auto src = other.row(i2);
        std::copy(src.begin(), src.end(), row(i2).begin());
    }
}

std::vector<double> Field::flatten() const {
    std::vector<double> out;
    out.reserve(interior_size());
    for (int i2 = 0; i2 < len2(); ++i2) {
        const auto r = row(i2);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

void Field::unflatten(std::span<const double> values) {
    if (values.size() != interior_size()) {
        throw std::invalid_argument(fmt::format("unflatten: expected {} values, got {}",
                                                interior_size(), values.size()));
    }
    fill(0.0);
    for (int i2 = 0; i2 < len2(); ++i2) {
        const auto src = values.subspan(static_cast<std::size_t>(i2) * row_size(), row_size());
        std::copy(src.begin(), src.end(), row(i2).begin());
    }
}

void Field::pack_edge(Side side, std::vector<double>& out) const {
    out.clear();
    switch (side) {
    case Side::West:
    case Side::East: {
        const int i1 = side == Side::West ? 0 : len1() - 1;
        out.reserve(static_cast<std::size_t>(len2() * ncomp_));
        for (int i2 = 0; i2 < len2(); ++i2)
            for (int c = 0; c < ncomp_; ++c) out.push_back((*this)(i1, i2, c));
        break;
    }
    case Side::South:
    case Side::North: {
        const auto r = row(side == Side::South ? 0 : len2() - 1);
        out.assign(r.begin(), r.end());
        break;
    }
    }
}

void Field::unpack_halo(Side side, std::span<const double> in) {
    switch (side) {
    case Side::West:
    case Side::East: {
        if (in.size() != static_cast<std::size_t>(len2() * ncomp_)) {
            throw std::logic_error("halo message length mismatch");
        }
        const int i1 = side == Side::West ? -1 : len1();
        std::size_t k = 0;
        for (int i2 = 0; i2 < len2(); ++i2)
            for (int c = 0; c < ncomp_; ++c) (*this)(i1, i2, c) = in[k++];
        break;
    }
    case Side::South:
    case Side::North: {
        if (in.size() != row_size()) throw std::logic_error("halo message length mismatch");
        const int i2 = side == Side::South ? -1 : len2();
        std::copy(in.begin(), in.end(), data_.begin() + offset(0, i2, 0));
        break;
    }
    }
}

void Field::fill_boundary_halo(Side side, const BoundaryCondition& bc) {
    const bool mirror = bc.kind == BoundaryCondition::Kind::ZeroFlux;
    switch (side) {
    case Side::West:
    case Side::East: {
        const int ghost = side == Side::West ? -1 : len1();
        const int inner = side == Side::West ? 0 : len1() - 1;
        for (int i2 = 0; i2 < len2(); ++i2)
            for (int c = 0; c < ncomp_; ++c)
                (*this)(ghost, i2, c) = mirror ? (*this)(inner, i2, c) : bc.value;
        break;
    }
    case Side::South:
    case Side::North: {
        const int ghost = side == Side::South ? -1 : len2();
        const int inner = side == Side::South ? 0 : len2() - 1;
        for (int i1 = 0; i1 < len1(); ++i1)
            for (int c = 0; c < ncomp_; ++c)
                (*this)(i1, ghost, c) = mirror ? (*this)(i1, inner, c) : bc.value;
        break;
    }
    }
}

Field gather(const TileTopology& topo, std::span<const Field> tiles) {
    if (tiles.size() != static_cast<std::size_t>(topo.size())) {
        throw std::invalid_argument("gather: one field per tile required");
    }
    const int ncomp = tiles.front().ncomp();
    Field out = Field::global(topo.grid(), ncomp);
    for (int id = 0; id < topo.size(); ++id) {
        const Field& t = tiles[static_cast<std::size_t>(id)];
        if (t.box() != topo.box(id) || t.ncomp() != ncomp) {
            throw std::invalid_argument(fmt::format("gather: tile {} has the wrong shape", id));
        }
        for (int i2 = 0; i2 < t.len2(); ++i2)
            for (int i1 = 0; i1 < t.len1(); ++i1)
                for (int c = 0; c < ncomp; ++c)
                    out(t.box().x1.start + i1, t.box().x2.start + i2, c) = t(i1, i2, c);
    }
    return out;
}

Field scatter(const TileTopology& topo, const Field& global, int id) {
    const TileBox box = topo.box(id);
    Field out(topo.grid(), box, global.ncomp(), id);
    for (int i2 = 0; i2 < box.x2.length; ++i2)
        for (int i1 = 0; i1 < box.x1.length; ++i1)
            for (int c = 0; c < global.ncomp(); ++c)
                out(i1, i2, c) = global(box.x1.start + i1, box.x2.start + i2, c);
    return out;
}

}  // namespace fld
