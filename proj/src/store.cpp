#include "cloudshift/store.hpp"

#include "cloudshift/errors.hpp"

namespace cloudshift::store {

bool is_text(const Scalar& v) noexcept {
    return std::holds_alternative<std::string>(v);
}

bool is_integer(const Scalar& v) noexcept {
    return std::holds_alternative<std::int64_t>(v);
}

std::uint64_t scalar_byte_length(const Scalar& v) noexcept {
    if (is_text(v)) {
        return std::get<std::string>(v).size();
    }
    return 8;
}

std::string scalar_to_display(const Scalar& v) {
    if (is_text(v)) {
        return std::get<std::string>(v);
    }
    return std::to_string(std::get<std::int64_t>(v));
}

StoreEndpoint StoreEndpoint::parse(const std::string& uri) {
    StoreEndpoint ep;
    if (uri.rfind("local:", 0) == 0) {
        ep.kind = EndpointKind::local;
        ep.location = uri.substr(6);
        if (ep.location.empty()) {
            raise(ErrorKind::invalid_argument, "local endpoint needs a directory path");
        }
        return ep;
    }
    if (uri.rfind("http://", 0) == 0) {
        ep.kind = EndpointKind::remote_http;
        ep.location = uri;
        if (uri.size() <= 7) {
            raise(ErrorKind::invalid_argument, "http endpoint needs host[:port]");
        }
        while (!ep.location.empty() && ep.location.back() == '/') {
            ep.location.pop_back();
        }
        return ep;
    }
    raise(ErrorKind::invalid_argument,
          "endpoint '" + uri + "' must be local:<path> or http://host:port");
}

std::string StoreEndpoint::uri() const {
    if (kind == EndpointKind::local) {
        return "local:" + location;
    }
    return location;
}

namespace detail {
std::unique_ptr<StoreConnector> make_local_store(StoreEndpoint, const StoreOptions&);
std::unique_ptr<StoreConnector> make_http_store(StoreEndpoint, const StoreOptions&);
}  // namespace detail

std::unique_ptr<StoreConnector> open_store(const StoreEndpoint& endpoint,
                                           const StoreOptions& options) {
    StoreEndpoint ep = endpoint;
    if (!ep.credentials && options.bearer_token) {
        ep.credentials = options.bearer_token;
    }
    if (ep.kind == EndpointKind::local) {
        return detail::make_local_store(std::move(ep), options);
    }
    return detail::make_http_store(std::move(ep), options);
}

std::unique_ptr<StoreConnector> open_store(const std::string& uri, const StoreOptions& options) {
    return open_store(StoreEndpoint::parse(uri), options);
}

}  // namespace cloudshift::store
