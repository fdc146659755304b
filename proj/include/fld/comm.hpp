#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fld/field.hpp"
#include "fld/grid.hpp"

namespace fld {

namespace detail {
class Team;
}

/// Thrown in surviving workers when another worker of the same team failed.
class TeamAborted : public std::runtime_error {
public:
    TeamAborted() : std::runtime_error("worker team aborted") {}
};

/// One tile worker's handle on the team: halo exchange and global reductions.
///
/// Collectives are synchronization points; every worker must call them in the
/// same order. A communicator built from a 1x1 topology runs serially with no
/// synchronization.
class Communicator {
public:
    /// Serial communicator over a single-tile topology.
    explicit Communicator(const TileTopology& topo);
    Communicator(std::shared_ptr<detail::Team> team, int rank);

    [[nodiscard]] int rank() const noexcept { return rank_; }
    [[nodiscard]] int size() const noexcept;
    [[nodiscard]] const TileTopology& topology() const noexcept;
    [[nodiscard]] TileBox box() const { return topology().box(rank_); }

    /// Sum over workers, combined in ascending tile id on every worker, so the
    /// result is bitwise identical everywhere and reproducible run to run.
    /// One call counts as one reduction event regardless of length.
    std::vector<double> reduce_sum(std::span<const double> local);

    /// Fills the halo ring: neighbor interiors across tile edges, `bc` on
    /// physical edges.
    void halo_exchange(Field& field, const BoundaryCondition& bc);

    void barrier();

    [[nodiscard]] std::uint64_t reduction_events() const noexcept { return reductions_; }
    [[nodiscard]] std::uint64_t halo_exchanges() const noexcept { return exchanges_; }

private:
    std::shared_ptr<detail::Team> team_;
    int rank_ = 0;
    std::uint64_t collectives_ = 0;
    std::uint64_t reductions_ = 0;
    std::uint64_t exchanges_ = 0;
};

/// Upper bound on concurrently running tile workers. Read from the
/// FLD2D_MAX_WORKERS environment variable, default 64.
[[nodiscard]] int max_workers();

/// Runs `body` once per tile, each on its own thread (inline for a single
/// tile). If any worker throws, the others are released from their collectives
/// and the first exception is rethrown here.
void run_workers(const TileTopology& topo, const std::function<void(Communicator&)>& body);

}  // namespace fld
