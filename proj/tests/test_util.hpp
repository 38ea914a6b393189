#pragma once

#include <memory>
#include <random>
#include <vector>

#include "odekit/many_vector.hpp"
#include "odekit/vector.hpp"

namespace odekit::test {

inline std::vector<double> random_values(std::mt19937& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline SerialVector random_serial(std::mt19937& rng, index_t n, double lo = -1.0,
                                  double hi = 1.0) {
    return SerialVector(random_values(rng, static_cast<std::size_t>(n), lo, hi));
}

/// Splits flat data into a ManyVector with the given subvector lengths.
inline std::unique_ptr<ManyVector> partitioned(const std::vector<double>& flat,
                                               const std::vector<index_t>& lens) {
    std::vector<std::unique_ptr<Vector>> subs;
    std::size_t at = 0;
    for (index_t len : lens) {
        std::vector<double> chunk(flat.begin() + static_cast<std::ptrdiff_t>(at),
                                  flat.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(len)));
        subs.push_back(std::make_unique<SerialVector>(std::move(chunk)));
        at += static_cast<std::size_t>(len);
    }
    return std::make_unique<ManyVector>(std::move(subs));
}

/// Random partition of [0, n) into at most max_parts nonempty pieces.
inline std::vector<index_t> random_partition(std::mt19937& rng, index_t n,
                                             int max_parts = 5) {
    std::uniform_int_distribution<int> nparts(1, max_parts);
    int s = nparts(rng);
    if (s > n) s = static_cast<int>(n);
    std::vector<index_t> lens(static_cast<std::size_t>(s), 1);
    index_t rest = n - s;
    std::uniform_int_distribution<int> which(0, s - 1);
    while (rest-- > 0) ++lens[static_cast<std::size_t>(which(rng))];
    return lens;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace odekit::test
