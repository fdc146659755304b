#include "fld/comm.hpp"

#include <array>
#include <charconv>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/core.h>

namespace fld {
namespace detail {

/// Reusable barrier that can be poisoned so blocked workers bail out.
class AbortableBarrier {
public:
    explicit AbortableBarrier(int count) : count_(count) {}

    void arrive_and_wait() {
        std::unique_lock lock(mutex_);
        if (aborted_) throw TeamAborted();
        const std::uint64_t gen = generation_;
        if (++waiting_ == count_) {
            waiting_ = 0;
            ++generation_;
            cv_.notify_all();
            return;
        }
        cv_.wait(lock, [&] { return generation_ != gen || aborted_; });
        if (generation_ == gen) throw TeamAborted();
    }

    void abort() {
        std::lock_guard lock(mutex_);
        aborted_ = true;
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int count_;
    int waiting_ = 0;
    std::uint64_t generation_ = 0;
    bool aborted_ = false;
};

/// Shared mailbox state. Buffers are double-banked by collective parity: a
/// bank written at collective k is read before collective k+1 completes and is
/// not rewritten until collective k+2.
class Team {
public:
    explicit Team(TileTopology topo)
        : topo(std::move(topo)), barrier(this->topo.size()) {
        const auto n = static_cast<std::size_t>(this->topo.size());
        for (auto& bank : slots) bank.resize(n);
        for (auto& bank : outbox) bank.resize(n);
    }

    TileTopology topo;
    AbortableBarrier barrier;
    std::array<std::vector<std::vector<double>>, 2> slots;
    std::array<std::vector<std::array<std::vector<double>, 4>>, 2> outbox;
};

}  // namespace detail

Communicator::Communicator(const TileTopology& topo)
    : team_(std::make_shared<detail::Team>(topo)), rank_(0) {
    if (topo.size() != 1) {
        throw std::invalid_argument("serial communicator requires a single-tile topology");
    }
}

Communicator::Communicator(std::shared_ptr<detail::Team> team, int rank)
    : team_(std::move(team)), rank_(rank) {}

int Communicator::size() const noexcept { return team_->topo.size(); }

const TileTopology& Communicator::topology() const noexcept { return team_->topo; }

void Communicator::barrier() {
    if (size() > 1) team_->barrier.arrive_and_wait();
}

std::vector<double> Communicator::reduce_sum(std::span<const double> local) {
    ++reductions_;
    if (size() == 1) return {local.begin(), local.end()};

    const auto bank = static_cast<std::size_t>(collectives_++ & 1U);
    auto& slots = team_->slots[bank];
    slots[static_cast<std::size_t>(rank_)].assign(local.begin(), local.end());
    team_->barrier.arrive_and_wait();

    std::vector<double> sum(local.size(), 0.0);
    for (const auto& contribution : slots) {
        if (contribution.size() != local.size()) {
            throw std::logic_error(fmt::format(
                "reduce_sum: workers contributed {} and {} values", local.size(),
                contribution.size()));
        }
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += contribution[k];
    }
    return sum;
}

void Communicator::halo_exchange(Field& field, const BoundaryCondition& bc) {
    ++exchanges_;
    const TileTopology& topo = topology();
    if (size() == 1) {
        for (Side side : kAllSides) field.fill_boundary_halo(side, bc);
        return;
    }

    const auto bank = static_cast<std::size_t>(collectives_++ & 1U);
    auto& mine = team_->outbox[bank][static_cast<std::size_t>(rank_)];
    for (Side side : kAllSides) {
        if (topo.neighbor(rank_, side)) field.pack_edge(side, mine[static_cast<std::size_t>(side)]);
    }
    team_->barrier.arrive_and_wait();

    for (Side side : kAllSides) {
        if (const auto nbr = topo.neighbor(rank_, side)) {
            const auto& msg =
                team_->outbox[bank][static_cast<std::size_t>(*nbr)][static_cast<std::size_t>(opposite(side))];
            field.unpack_halo(side, msg);
        } else {
            field.fill_boundary_halo(side, bc);
        }
    }
}

int max_workers() {
    if (const char* env = std::getenv("FLD2D_MAX_WORKERS")) {
        int value = 0;
        const auto* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc{} && ptr == end && value >= 1) return value;
    }
    return 64;
}

void run_workers(const TileTopology& topo, const std::function<void(Communicator&)>& body) {
    const int n = topo.size();
    if (n > max_workers()) {
        throw std::invalid_argument(
            fmt::format("{} workers requested but the cap is {} (FLD2D_MAX_WORKERS)", n, max_workers()));
    }
    auto team = std::make_shared<detail::Team>(topo);
    if (n == 1) {
        Communicator comm(team, 0);
        body(comm);
        return;
    }

    std::mutex error_mutex;
    std::exception_ptr first_error;
    {
        std::vector<std::jthread> workers;
        workers.reserve(static_cast<std::size_t>(n));
        for (int rank = 0; rank < n; ++rank) {
            workers.emplace_back([&, rank] {
                try {
                    Communicator comm(team, rank);
                    body(comm);
                } catch (const TeamAborted&) {
                    // another worker failed first
                } catch (...) {
                    {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                    team->barrier.abort();
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fld
