#include <atomic>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <spde_lab/ensemble.hpp>
#include <spde_lab/random.hpp>
#include <spde_lab/stats.hpp>

using namespace spde_lab;

namespace {

SlotStats<EnsembleStats> run(std::size_t samples, unsigned workers) {
    const RandomStream root(99);
    return reduce_samples(samples, workers, SlotStats<EnsembleStats>(3), [&](std::size_t i, SlotStats<EnsembleStats>& acc) {
        const auto z = gaussian(root.child(i), 3);
        acc[0].add(z[0]);
        acc[1].add(z[1] * z[1]);
        acc[2].add(z[0] * z[2]);
    });
}

}  // namespace

TEST(Reduce, BitIdenticalAcrossWorkerCounts) {
    for (std::size_t samples : {1u, 63u, 64u, 65u, 1000u, 4097u}) {
        const auto one = run(samples, 1);
        for (unsigned w : {2u, 3u, 8u}) {
            const auto many = run(samples, w);
            for (std::size_t k = 0; k < 3; ++k) {
                EXPECT_EQ(one[k], many[k]) << samples << " samples, " << w << " workers";
            }
        }
    }
}

TEST(Reduce, MatchesSequentialStatistics) {
    const auto acc = run(5000, 4);
    EnsembleStats seq;
    const RandomStream root(99);
    for (std::size_t i = 0; i < 5000; ++i) {
        seq.add(gaussian(root.child(i), 3)[0]);
    }
    EXPECT_EQ(acc[0].count(), 5000u);
    EXPECT_NEAR(acc[0].mean(), seq.mean(), 1e-14);
    EXPECT_NEAR(acc[0].variance(), seq.variance(), 1e-12);
}

TEST(Reduce, ZeroSamplesGivesIdentity) {
    const auto acc = run(0, 4);
    EXPECT_EQ(acc[0].count(), 0u);
}

TEST(Reduce, PropagatesExceptions) {
    EXPECT_THROW(reduce_samples(500, 4, EnsembleStats{},
                                [](std::size_t i, EnsembleStats& acc) {
                                    if (i == 321) {
                                        throw std::runtime_error("boom");
                                    }
                                    acc.add(1.0);
                                }),
                 std::runtime_error);
}

TEST(Map, OrderedResultsForAnyWorkerCount) {
    auto square = [](std::size_t i) { return static_cast<double>(i * i); };
    const auto a = map_samples(777, 1, square);
    const auto b = map_samples(777, 8, square);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[776], 776.0 * 776.0);
}

TEST(PairwiseMerge, TreeShape) {
    struct Trace {
        std::vector<int> order;
        void merge(const Trace& o) {
            order.push_back(-1);
            order.insert(order.end(), o.order.begin(), o.order.end());
        }
    };
    std::vector<Trace> parts{{{0}}, {{1}}, {{2}}};
    const Trace t = pairwise_merge(parts, Trace{});
    // ((0 1) 2)
    EXPECT_EQ(t.order, (std::vector<int>{0, -1, 1, -1, 2}));
}
