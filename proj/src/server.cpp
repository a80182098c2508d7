#include "cloudshift/server.hpp"

#define CPPHTTPLIB_TCP_NODELAY 1
#include <httplib.h>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/wire.hpp"

namespace cloudshift::store {

using nlohmann::json;

namespace {

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse:
        case ErrorKind::invalid_model:
        case ErrorKind::invalid_argument: return 400;
        case ErrorKind::unauthorized: return 401;
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::cap_exceeded: return 413;
        case ErrorKind::length_violation: return 422;
        case ErrorKind::checksum_mismatch: return 502;
        case ErrorKind::connection:
        case ErrorKind::io: return 500;
    }
    return 500;
}

void set_error(httplib::Response& res, const Error& e) {
    res.status = status_for(e.kind());
    res.set_content(json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump(),
                    "application/json");
}

PutMode mode_from_request(const httplib::Request& req) {
    if (req.get_param_value("merge") == "1") return PutMode::merge;
    if (req.get_param_value("overwrite") == "1") return PutMode::overwrite;
    return PutMode::create;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size() && !s.empty()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace

struct SimulatorServer::Impl {
    explicit Impl(ServerConfig cfg)
        : config(std::move(cfg)),
          backing(open_store("local:" + config.root,
                             StoreOptions{.size_cap_bytes = config.size_cap_bytes})),
          jitter_rng(config.jitter_seed) {
        install_routes();
    }

    std::int64_t draw_jitter() {
        if (config.shaping.jitter_ms <= 0) return 0;
        std::lock_guard lock(rng_mutex);
        return static_cast<std::int64_t>(jitter_rng() %
                                         static_cast<std::uint64_t>(config.shaping.jitter_ms + 1));
    }

    /// Apply the shaping profile for one request carrying `blob_bytes` of
    /// blob payload. Wall mode sleeps; virtual mode reports the cost.
    void shape(httplib::Response& res, std::uint64_t blob_bytes, bool defer_body_throttle) {
        const std::int64_t jitter = draw_jitter();
        if (config.virtual_mode) {
            res.set_header("X-Cloudshift-Virtual-Ms",
                           std::to_string(config.shaping.request_cost_ms(blob_bytes, jitter)));
            return;
        }
        std::int64_t sleep_ms = config.shaping.per_request_latency_ms + jitter;
        if (!defer_body_throttle) {
            sleep_ms = config.shaping.request_cost_ms(blob_bytes, jitter);
        }
        if (sleep_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        }
    }

    bool authorized(const httplib::Request& req) const {
        if (!config.bearer_token) return true;
        return req.get_header_value("Authorization") == "Bearer " + *config.bearer_token;
    }

    template <typename Fn>
    void handle(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
        try {
            if (!authorized(req)) {
                raise(ErrorKind::unauthorized, "missing or invalid bearer token");
            }
            fn();
        } catch (const Error& e) {
            set_error(res, e);
        } catch (const std::exception& e) {
            set_error(res, Error(ErrorKind::io, e.what()));
        }
    }

    /// Send a body whose blob payload is subject to the bandwidth cap.
    void send_throttled(httplib::Response& res, std::string body, const char* content_type) {
        const auto bw = config.shaping.bandwidth_bytes_per_sec;
        if (config.virtual_mode || !bw || *bw == 0 || body.empty()) {
            res.set_content(std::move(body), content_type);
            return;
        }
        const std::uint64_t bandwidth = *bw;
        auto shared = std::make_shared<std::string>(std::move(body));
        res.set_content_provider(
            shared->size(), content_type,
            [shared, bandwidth](std::size_t offset, std::size_t length,
                                httplib::DataSink& sink) {
                const std::size_t chunk = std::min<std::size_t>(length, 64 * 1024);
                const std::int64_t pause =
                    static_cast<std::int64_t>((chunk * 1000 + bandwidth - 1) / bandwidth);
                if (pause > 0) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(pause));
                }
                sink.write(shared->data() + offset, chunk);
                return true;
            });
    }

    void install_routes() {
        svr.set_payload_max_length(config.size_cap_bytes + (1 << 20));
        svr.set_read_timeout(600, 0);
        svr.set_write_timeout(600, 0);

        svr.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });

        // Row store: single put, batch put, blob put.
        svr.Put(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/rows/([^/]+)/blobs/([A-Za-z_][A-Za-z0-9_]*))",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        shape(res, req.body.size(), false);
                        BlobHandle handle = backing->put_blob(req.matches[1], req.matches[2],
                                                              req.matches[3], req.body,
                                                              mode_from_request(req));
                        res.set_content(json{{"size", handle.size_bytes},
                                             {"checksum", checksum_hex(handle.checksum)},
                                             {"timestamp", now_ms()}}
                                            .dump(),
                                        "application/json");
                    });
                });

        svr.Put(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/rows/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        shape(res, 0, false);
                        RowRecord row;
                        row.table = req.matches[1];
                        row.key = req.matches[2];
                        row.columns = wire::decode_columns(req.body);
                        PutAck ack = backing->put_row(row, mode_from_request(req));
                        res.set_content(json{{"timestamp", ack.timestamp_ms}}.dump(),
                                        "application/json");
                    });
                });

        svr.Put(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/rows)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        shape(res, 0, false);
                        const std::string table = req.matches[1];
                        auto rows = wire::decode_row_batch(table, req.body);
                        PutAck ack = backing->put_rows(table, rows, mode_from_request(req));
                        res.set_content(
                            json{{"timestamp", ack.timestamp_ms}, {"count", rows.size()}}.dump(),
                            "application/json");
                    });
                });

        svr.Put(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/schema)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        shape(res, 0, false);
                        backing->register_table(model::parse_table(req.body));
                        res.set_content("{}", "application/json");
                    });
                });

        // Fetch: multipart row stream with inlined blobs.
        svr.Get(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/rows)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        FetchQuery query;
                        query.table = req.matches[1];
                        const std::string keys = req.get_param_value("keys");
                        if (!keys.empty() && keys != "all") {
                            query.keys = split_csv(keys);
                        }
                        const std::string blobs = req.get_param_value("blobs");
                        if (!blobs.empty()) {
                            query.include_blobs = split_csv(blobs);
                        }
                        auto rows = backing->fetch(query);

                        std::uint64_t blob_bytes = 0;
                        std::string body;
                        for (const auto& fetched : rows) {
                            std::vector<std::string> inline_blobs;
                            for (const std::string& column : query.include_blobs) {
                                if (fetched.blob_content.count(column)) {
                                    inline_blobs.push_back(column);
                                }
                            }
                            wire::append_part(
                                body, wire::encode_row_header(fetched.row, inline_blobs));
                            for (const std::string& column : inline_blobs) {
                                const std::string& bytes = fetched.blob_content.at(column);
                                blob_bytes += bytes.size();
                                wire::append_part(body, bytes);
                            }
                        }
                        shape(res, blob_bytes, true);
                        send_throttled(res, std::move(body), "application/octet-stream");
                    });
                });

        svr.Get(R"(/tables/([A-Za-z_][A-Za-z0-9_]*)/rows/([^/]+)/blobs/([A-Za-z_][A-Za-z0-9_]*))",
                [this](const httplib::Request& req, httplib::Response& res) {
                    handle(req, res, [&] {
                        BlobHandle want;
                        want.table = req.matches[1];
                        want.key = req.matches[2];
                        want.column = req.matches[3];
                        want.checksum = 0;  // trust the stored metadata
                        std::string bytes = backing->fetch_blob(want);
                        shape(res, bytes.size(), true);
                        res.set_header("X-Checksum", checksum_hex(fnv1a64(bytes)));
                        send_throttled(res, std::move(bytes), "application/octet-stream");
                    });
                });

        svr.Delete(R"(/tables/([A-Za-z_][A-Za-z0-9_]*))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       handle(req, res, [&] {
                           shape(res, 0, false);
                           backing->drop_table(req.matches[1]);
                           res.set_content("{}", "application/json");
                       });
                   });
    }

    static std::int64_t now_ms() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    ServerConfig config;
    std::unique_ptr<StoreConnector> backing;
    httplib::Server svr;
    std::thread worker;
    int bound_port = 0;
    std::mt19937_64 jitter_rng;
    std::mutex rng_mutex;
};

SimulatorServer::SimulatorServer(ServerConfig config) : impl_(new Impl(std::move(config))) {}

SimulatorServer::~SimulatorServer() {
    stop();
}

void SimulatorServer::start(const std::string& host, int port) {
    if (port == 0) {
        impl_->bound_port = impl_->svr.bind_to_any_port(host);
        if (impl_->bound_port <= 0) {
            raise(ErrorKind::connection, "cannot bind simulator on " + host);
        }
    } else {
        if (!impl_->svr.bind_to_port(host, port)) {
            raise(ErrorKind::connection,
                  "cannot bind simulator on " + host + ":" + std::to_string(port));
        }
        impl_->bound_port = port;
    }
    impl_->worker = std::thread([this] { impl_->svr.listen_after_bind(); });
    impl_->svr.wait_until_ready();
}

void SimulatorServer::run(const std::string& host, int port) {
    if (!impl_->svr.bind_to_port(host, port)) {
        raise(ErrorKind::connection,
              "cannot bind simulator on " + host + ":" + std::to_string(port));
    }
    impl_->bound_port = port;
    impl_->svr.listen_after_bind();
}

int SimulatorServer::port() const noexcept {
    return impl_->bound_port;
}

std::string SimulatorServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->bound_port);
}

void SimulatorServer::stop() {
    if (!impl_) return;
    impl_->svr.stop();
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

}  // namespace cloudshift::store
