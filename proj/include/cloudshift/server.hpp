#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "cloudshift/shaping.hpp"
#include "cloudshift/store.hpp"

namespace cloudshift::store {

/// Simulator configuration: which directory to serve and how to shape it.
struct ServerConfig {
    std::string root;
    ShapingProfile shaping;
    /// Report each request's shaped cost in an X-Cloudshift-Virtual-Ms
    /// header instead of sleeping. Pairs with a client-side VirtualClock.
    bool virtual_mode = false;
    std::optional<std::string> bearer_token;
    std::uint64_t size_cap_bytes = kDefaultSizeCapBytes;
    std::uint64_t jitter_seed = 0x5381;
};

/**
 * Network-shaped HTTP store simulator standing in for a remote cloud.
 * Serves the wire protocol over a local directory store; every request is
 * delayed by the shaping profile and blob payloads are bandwidth throttled.
 */
class SimulatorServer {
public:
    explicit SimulatorServer(ServerConfig config);
    ~SimulatorServer();

    SimulatorServer(const SimulatorServer&) = delete;
    SimulatorServer& operator=(const SimulatorServer&) = delete;

    /// Bind and serve on a background thread. Port 0 picks an ephemeral
    /// port. Throws Error{connection} when the address cannot be bound.
    void start(const std::string& host, int port);

    /// Serve on the calling thread until stop() (CLI `serve` path).
    void run(const std::string& host, int port);

    int port() const noexcept;
    std::string base_url() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cloudshift::store
