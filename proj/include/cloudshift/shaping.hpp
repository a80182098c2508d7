#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>

namespace cloudshift::store {

/**
 * Network shaping applied by the simulator server: every request is delayed
 * by [latency, latency + jitter] and blob payloads are throttled to the
 * configured bandwidth.
 */
struct ShapingProfile {
    std::int64_t per_request_latency_ms = 0;
    std::optional<std::uint64_t> bandwidth_bytes_per_sec;  // nullopt = unlimited
    std::int64_t jitter_ms = 0;

    /// Cost of one request under this profile, given its blob payload size
    /// and a concrete jitter draw. Used verbatim in deterministic clock mode.
    std::int64_t request_cost_ms(std::uint64_t blob_bytes, std::int64_t jitter_draw = 0) const {
        std::int64_t cost = per_request_latency_ms + jitter_draw;
        if (bandwidth_bytes_per_sec && *bandwidth_bytes_per_sec > 0 && blob_bytes > 0) {
            const std::uint64_t bw = *bandwidth_bytes_per_sec;
            cost += static_cast<std::int64_t>((blob_bytes * 1000 + bw - 1) / bw);
        }
        return cost;
    }

    bool unlimited() const {
        return per_request_latency_ms == 0 && jitter_ms == 0 && !bandwidth_bytes_per_sec;
    }
};

/**
 * Deterministic time source. In virtual mode connectors advance this clock
 * by each request's shaped cost instead of waiting, making every measured
 * duration a pure function of the request sequence.
 */
class VirtualClock {
public:
    std::int64_t now_ms() const noexcept { return now_.load(std::memory_order_relaxed); }

    void advance(std::int64_t ms) noexcept {
        if (ms > 0) now_.fetch_add(ms, std::memory_order_relaxed);
    }

private:
    std::atomic<std::int64_t> now_{0};
};

/// Measures integer milliseconds from either the monotonic wall clock or a
/// VirtualClock (when one is supplied).
class Stopwatch {
public:
    explicit Stopwatch(const VirtualClock* virtual_clock = nullptr)
        : virtual_clock_(virtual_clock) {
        restart();
    }

    void restart() {
        if (virtual_clock_) {
            start_virtual_ = virtual_clock_->now_ms();
        } else {
            start_wall_ = std::chrono::steady_clock::now();
        }
    }

    std::int64_t elapsed_ms() const {
        if (virtual_clock_) {
            return virtual_clock_->now_ms() - start_virtual_;
        }
        auto d = std::chrono::steady_clock::now() - start_wall_;
        return std::chrono::duration_cast<std::chrono::milliseconds>(d).count();
    }

private:
    const VirtualClock* virtual_clock_;
    std::chrono::steady_clock::time_point start_wall_{};
    std::int64_t start_virtual_ = 0;
};

}  // namespace cloudshift::store
