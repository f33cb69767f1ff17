#ifndef SPDE_LAB_ENSEMBLE_HPP
#define SPDE_LAB_ENSEMBLE_HPP

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace spde_lab {

template <class A>
concept Mergeable = std::copyable<A> && requires(A a, const A& b) { a.merge(b); };

/// Samples per reduction block. Part of the reproducibility contract: the
/// merge tree depends on this value and the sample count only.
inline constexpr std::size_t kEnsembleBlock = 64;

namespace detail {

/// Runs task(i) for i in [0, count) on up to `workers` threads.
template <class Task>
void run_indexed(std::size_t count, unsigned workers, Task&& task) {
    workers = std::max(1u, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    const auto n_threads = std::min<std::size_t>(workers, count);
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back(body);
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace detail

/**
 * Merge a sequence of partial accumulators with a balanced pairwise tree:
 * level by level, neighbours (2i, 2i+1) are merged left into right order.
 */
template <Mergeable A>
A pairwise_merge(std::vector<A> parts, A identity) {
    if (parts.empty()) {
        return identity;
    }
    while (parts.size() > 1) {
        std::vector<A> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            A merged = std::move(parts[i]);
            merged.merge(parts[i + 1]);
            next.push_back(std::move(merged));
        }
        if (parts.size() % 2 == 1) {
            next.push_back(std::move(parts.back()));
        }
        parts = std::move(next);
    }
    return std::move(parts.front());
}

/**
 * Reduce `samples` independent samples into an accumulator.
 *
 * `fold(sample_index, acc)` adds one sample. Samples are grouped in fixed
 * blocks of kEnsembleBlock consecutive indices, each folded in index order,
 * and blocks are combined by pairwise_merge. The result is bit-identical
 * for any worker count.
 */
template <Mergeable A, class Fold>
A reduce_samples(std::size_t samples, unsigned workers, const A& identity, Fold&& fold) {
    const std::size_t n_blocks = (samples + kEnsembleBlock - 1) / kEnsembleBlock;
    std::vector<A> partial(n_blocks, identity);
    detail::run_indexed(n_blocks, workers, [&](std::size_t b) {
        A acc = identity;
        const std::size_t end = std::min(samples, (b + 1) * kEnsembleBlock);
        for (std::size_t i = b * kEnsembleBlock; i < end; ++i) {
            fold(i, acc);
        }
        partial[b] = std::move(acc);
    });
    return pairwise_merge(std::move(partial), identity);
}

/// out[i] = fn(i) for every sample, evaluated on `workers` threads.
template <class Fn>
auto map_samples(std::size_t samples, unsigned workers, Fn&& fn) {
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<R> out(samples);
    const std::size_t n_blocks = (samples + kEnsembleBlock - 1) / kEnsembleBlock;
    detail::run_indexed(n_blocks, workers, [&](std::size_t b) {
        const std::size_t end = std::min(samples, (b + 1) * kEnsembleBlock);
        for (std::size_t i = b * kEnsembleBlock; i < end; ++i) {
            out[i] = fn(i);
        }
    });
    return out;
}

/// Element-wise accumulator over a fixed number of slots (e.g. one per time step).
template <Mergeable A>
class SlotStats {
public:
    SlotStats() = default;
    explicit SlotStats(std::size_t slots) : slots_(slots) {}

    A& operator[](std::size_t i) { return slots_[i]; }
    const A& operator[](std::size_t i) const { return slots_[i]; }
    std::size_t size() const noexcept { return slots_.size(); }
    auto begin() const { return slots_.begin(); }
    auto end() const { return slots_.end(); }

    void merge(const SlotStats& o) {
        if (slots_.empty()) {
            slots_ = o.slots_;
            return;
        }
        for (std::size_t i = 0; i < slots_.size() && i < o.slots_.size(); ++i) {
            slots_[i].merge(o.slots_[i]);
        }
    }

private:
    std::vector<A> slots_;
};

}  // namespace spde_lab

#endif  // SPDE_LAB_ENSEMBLE_HPP
