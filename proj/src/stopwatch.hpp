#pragma once

#include <chrono>

namespace gptemper::detail {

// Wall clock that can exclude bookkeeping (trace RMSE evaluation) from the
// reported sampler time.
class Stopwatch {
public:
    using clock = std::chrono::steady_clock;

    Stopwatch() : start_(clock::now()) {}

    void pause() { paused_at_ = clock::now(); }
    void resume() { excluded_ += clock::now() - paused_at_; }

    double seconds() const
    {
        return std::chrono::duration<double>(clock::now() - start_ - excluded_).count();
    }

private:
    clock::time_point start_;
    clock::time_point paused_at_{};
    clock::duration excluded_{0};
};

} // namespace gptemper::detail
