#include "qte/common.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace qte {

namespace {

double pairwise_sum_rec(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_rec(v, half) + pairwise_sum_rec(v + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_rec(values.data(), values.size());
}

MeanAndError mean_and_std_error(std::span<const double> values) {
    MeanAndError out;
    const std::size_t n = values.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n == 1) return out;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - out.mean;
        dev[i] = d * d;
    }
    const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n));
    return out;
}

namespace parallel {

unsigned worker_count() {
    if (const char* env = std::getenv("QTE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void for_blocks(std::size_t count, std::size_t block_size,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    if (block_size == 0) block_size = kDefaultBlock;
    const std::size_t n_blocks = (count + block_size - 1) / block_size;
    const unsigned workers = std::min<std::size_t>(worker_count(), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b)
            fn(b, b * block_size, std::min(count, (b + 1) * block_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            fn(b, b * block_size, std::min(count, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
}

}  // namespace parallel

}  // namespace qte
