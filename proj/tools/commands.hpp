// commands.hpp - uscsim subcommands
#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

namespace usc::cli {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 ok, 2 configuration error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// lo, lo + h, ..., hi with `steps` intervals (steps = 0 requires lo == hi).
std::vector<double> linear_grid(double lo, double hi, int steps);

/// f(0..count-1) on a pool of `threads` workers; results in index order.
/// The first exception in index order is rethrown after all workers finish.
template <class F>
auto parallel_map(std::size_t count, unsigned threads, F f) -> std::vector<decltype(f(std::size_t{0}))> {
    using R = decltype(f(std::size_t{0}));
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::size_t next = 0;
    std::mutex m;
    auto work = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= count) return;
                i = next++;
            }
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace usc::cli
