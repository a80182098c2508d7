#define CPPHTTPLIB_TCP_NODELAY 1
#include <httplib.h>

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/store.hpp"
#include "cloudshift/wire.hpp"

namespace cloudshift::store {

using nlohmann::json;

namespace {

ErrorKind kind_from_string(std::string_view s) {
    static const std::pair<std::string_view, ErrorKind> table[] = {
        {"parse", ErrorKind::parse},
        {"invalid_model", ErrorKind::invalid_model},
        {"invalid_argument", ErrorKind::invalid_argument},
        {"conflict", ErrorKind::conflict},
        {"not_found", ErrorKind::not_found},
        {"connection", ErrorKind::connection},
        {"cap_exceeded", ErrorKind::cap_exceeded},
        {"length_violation", ErrorKind::length_violation},
        {"checksum_mismatch", ErrorKind::checksum_mismatch},
        {"unauthorized", ErrorKind::unauthorized},
        {"io", ErrorKind::io},
    };
    for (const auto& [name, kind] : table) {
        if (s == name) return kind;
    }
    return ErrorKind::io;
}

ErrorKind kind_from_status(int status) {
    switch (status) {
        case 400: return ErrorKind::invalid_argument;
        case 401: return ErrorKind::unauthorized;
        case 404: return ErrorKind::not_found;
        case 409: return ErrorKind::conflict;
        case 413: return ErrorKind::cap_exceeded;
        case 422: return ErrorKind::length_violation;
        case 502: return ErrorKind::checksum_mismatch;
        default: return ErrorKind::io;
    }
}

const char* mode_query(PutMode mode) {
    switch (mode) {
        case PutMode::create: return "";
        case PutMode::overwrite: return "?overwrite=1";
        case PutMode::merge: return "?merge=1";
    }
    return "";
}

class HttpStore final : public StoreConnector {
public:
    HttpStore(StoreEndpoint endpoint, const StoreOptions& options)
        : StoreConnector(std::move(endpoint)),
          virtual_clock_(options.virtual_clock),
          timeout_sec_(options.timeout_sec) {}

    PutAck put_row(const RowRecord& row, PutMode mode) override {
        auto res = client()->Put("/tables/" + row.table + "/rows/" + row.key + mode_query(mode),
                                 auth_headers(), wire::encode_columns(row.columns),
                                 "application/json");
        const json body = expect(res, 200);
        count_put();
        return PutAck{body.value("timestamp", std::int64_t{0})};
    }

    PutAck put_rows(const std::string& table, const std::vector<RowRecord>& rows,
                    PutMode mode) override {
        auto res = client()->Put("/tables/" + table + "/rows" + mode_query(mode), auth_headers(),
                                 wire::encode_row_batch(rows), "application/json");
        const json body = expect(res, 200);
        count_put();
        return PutAck{body.value("timestamp", std::int64_t{0})};
    }

    BlobHandle put_blob(const std::string& table, const std::string& key,
                        const std::string& column, std::string_view bytes,
                        PutMode mode) override {
        auto res = client()->Put(
            "/tables/" + table + "/rows/" + key + "/blobs/" + column + mode_query(mode),
            auth_headers(), bytes.data(), bytes.size(), "application/octet-stream");
        const json body = expect(res, 200);
        BlobHandle handle;
        handle.table = table;
        handle.key = key;
        handle.column = column;
        handle.size_bytes = body.at("size").get<std::uint64_t>();
        handle.checksum = parse_checksum_hex(body.at("checksum").get<std::string>());
        if (handle.size_bytes != bytes.size() || handle.checksum != fnv1a64(bytes)) {
            raise(ErrorKind::checksum_mismatch,
                  "store acknowledged a blob that does not match what was sent");
        }
        count_put();
        return handle;
    }

    std::vector<FetchedRow> fetch(const FetchQuery& query) override {
        std::string path = "/tables/" + query.table + "/rows?";
        if (query.keys) {
            path += "keys=";
            for (std::size_t i = 0; i < query.keys->size(); ++i) {
                if (i) path += ',';
                path += (*query.keys)[i];
            }
        } else {
            path += "keys=all";
        }
        if (!query.include_blobs.empty()) {
            path += "&blobs=";
            for (std::size_t i = 0; i < query.include_blobs.size(); ++i) {
                if (i) path += ',';
                path += query.include_blobs[i];
            }
        }

        std::vector<FetchedRow> rows;
        wire::MultipartRowDecoder decoder(
            query.table, [&rows](FetchedRow&& row) { rows.push_back(std::move(row)); });

        int status = 0;
        std::string error_body;
        std::string virtual_ms;
        auto cli = client();
        auto res = cli->Get(
            path, auth_headers(),
            [&](const httplib::Response& response) {
                status = response.status;
                virtual_ms = response.get_header_value("X-Cloudshift-Virtual-Ms");
                return true;
            },
            [&](const char* data, std::size_t len) {
                if (status == 200) {
                    decoder.feed(data, len);
                } else {
                    error_body.append(data, len);
                }
                return true;
            });
        if (!res) {
            raise(ErrorKind::connection, "fetch failed: " + httplib::to_string(res.error()));
        }
        advance_virtual(virtual_ms);
        if (status != 200) {
            raise_error(status, error_body);
        }
        decoder.finish();
        count_fetch();
        return rows;
    }

    std::string fetch_blob(const BlobHandle& handle) override {
        auto res = client()->Get(
            "/tables/" + handle.table + "/rows/" + handle.key + "/blobs/" + handle.column,
            auth_headers());
        if (!res) {
            raise(ErrorKind::connection, "fetch_blob failed: " + httplib::to_string(res.error()));
        }
        advance_virtual(res->get_header_value("X-Cloudshift-Virtual-Ms"));
        if (res->status != 200) {
            raise_error(res->status, res->body);
        }
        if (res->body.size() != handle.size_bytes || fnv1a64(res->body) != handle.checksum) {
            raise(ErrorKind::checksum_mismatch, "blob '" + handle.key + "/" + handle.column +
                                                    "' does not match the requested checksum");
        }
        count_fetch();
        return std::move(res->body);
    }

    void register_table(const model::TableDef& table) override {
        auto res = client()->Put("/tables/" + table.name + "/schema", auth_headers(),
                                 model::serialize(table), "application/json");
        expect(res, 200);
    }

    void drop_table(const std::string& table) override {
        auto res = client()->Delete("/tables/" + table, auth_headers());
        expect(res, 200);
    }

    bool ping() override {
        auto res = client()->Get("/healthz");
        return res && res->status == 200;
    }

private:
    // One client per call keeps the connector safe for concurrent use.
    std::unique_ptr<httplib::Client> client() const {
        auto cli = std::make_unique<httplib::Client>(endpoint_.location);
        cli->set_connection_timeout(timeout_sec_, 0);
        cli->set_read_timeout(timeout_sec_, 0);
        cli->set_write_timeout(timeout_sec_, 0);
        return cli;
    }

    httplib::Headers auth_headers() const {
        httplib::Headers headers;
        if (endpoint_.credentials) {
            headers.emplace("Authorization", "Bearer " + *endpoint_.credentials);
        }
        return headers;
    }

    void advance_virtual(const std::string& header_value) {
        if (virtual_clock_ && !header_value.empty()) {
            virtual_clock_->advance(std::strtoll(header_value.c_str(), nullptr, 10));
        }
    }

    [[noreturn]] void raise_error(int status, const std::string& body) const {
        json j = json::parse(body, nullptr, false);
        if (j.is_object() && j.contains("error")) {
            raise(kind_from_string(j.at("error").get<std::string>()),
                  j.value("message", "store error"));
        }
        raise(kind_from_status(status), "store returned HTTP " + std::to_string(status));
    }

    json expect(httplib::Result& res, int wanted_status) {
        if (!res) {
            raise(ErrorKind::connection, "request failed: " + httplib::to_string(res.error()));
        }
        advance_virtual(res->get_header_value("X-Cloudshift-Virtual-Ms"));
        if (res->status != wanted_status) {
            raise_error(res->status, res->body);
        }
        if (res->body.empty()) {
            return json::object();
        }
        json j = json::parse(res->body, nullptr, false);
        return j.is_discarded() ? json::object() : j;
    }

    VirtualClock* virtual_clock_;
    int timeout_sec_;
};

}  // namespace

namespace detail {

std::unique_ptr<StoreConnector> make_http_store(StoreEndpoint endpoint,
                                                const StoreOptions& options) {
    return std::make_unique<HttpStore>(std::move(endpoint), options);
}

}  // namespace detail

}  // namespace cloudshift::store
