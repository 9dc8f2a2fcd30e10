#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stathyp/constants.hpp"

namespace stathyp {

class EstimatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// n_samples counts the successful samples the mean is taken over; n_failures the samples
// excluded because a boundary limit did not converge or tracking degenerated.
struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_failures = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

struct EstimatorOptions {
    unsigned threads = 1;
    double tol = kDefaultLimitTol;
    std::size_t max_steps = kDefaultMaxSteps;
    std::uint64_t config_hash = 0;
};

// Runs f(i) for i in [0, n). Work is handed out dynamically, so callers must write results
// into per-index slots and reduce afterwards in index order.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// Mean and sample stderr over the engaged slots, summed in index order.
inline MonteCarloEstimate summarize(const std::vector<std::optional<double>>& slots, std::uint64_t seed,
                                    std::uint64_t config_hash) {
    MonteCarloEstimate e;
    e.seed = seed;
    e.config_hash = config_hash;
    double sum = 0.0;
    for (const auto& s : slots) {
        if (s) {
            sum += *s;
            ++e.n_samples;
        } else {
            ++e.n_failures;
        }
    }
    if (e.n_samples == 0) return e;
    e.mean = sum / static_cast<double>(e.n_samples);
    if (e.n_samples > 1) {
        double ss = 0.0;
        for (const auto& s : slots)
            if (s) ss += (*s - e.mean) * (*s - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(e.n_samples - 1) / static_cast<double>(e.n_samples));
    }
    return e;
}

inline void check_failures(std::size_t failures, std::size_t total, const std::string& what) {
    if (total > 0 && static_cast<double>(failures) > kMaxFailureFraction * static_cast<double>(total))
        throw EstimatorError(what + ": " + std::to_string(failures) + " of " + std::to_string(total) +
                             " samples failed (limit 10%)");
}

}  // namespace stathyp
