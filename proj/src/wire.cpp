#include "cloudshift/wire.hpp"

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"

namespace cloudshift::wire {

using nlohmann::json;
using store::RowRecord;
using store::Scalar;

std::string encode_u64_be(std::uint64_t value) {
    std::string out(8, '\0');
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<char>(value & 0xff);
        value >>= 8;
    }
    return out;
}

std::uint64_t decode_u64_be(const unsigned char* bytes) noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | bytes[i];
    }
    return v;
}

namespace {

json scalar_to_json(const Scalar& v) {
    if (std::holds_alternative<std::int64_t>(v)) {
        return std::get<std::int64_t>(v);
    }
    return std::get<std::string>(v);
}

Scalar scalar_from_json(const json& j) {
    if (j.is_number_integer()) {
        return j.get<std::int64_t>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    raise(ErrorKind::parse, "scalar column values must be strings or integers");
}

json columns_to_json(const std::map<std::string, Scalar>& columns) {
    json obj = json::object();
    for (const auto& [name, value] : columns) {
        obj[name] = scalar_to_json(value);
    }
    return obj;
}

std::map<std::string, Scalar> columns_from_json(const json& obj) {
    if (!obj.is_object()) {
        raise(ErrorKind::parse, "row body must be a JSON object of scalar columns");
    }
    std::map<std::string, Scalar> out;
    for (const auto& [name, value] : obj.items()) {
        out[name] = scalar_from_json(value);
    }
    return out;
}

json parse_or_raise(const std::string& body, const char* what) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        raise(ErrorKind::parse, std::string(what) + " is not valid JSON");
    }
    return j;
}

}  // namespace

std::string encode_columns(const std::map<std::string, Scalar>& columns) {
    return columns_to_json(columns).dump();
}

std::map<std::string, Scalar> decode_columns(const std::string& body) {
    return columns_from_json(parse_or_raise(body, "row body"));
}

std::string encode_row_batch(const std::vector<RowRecord>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        arr.push_back(json{{"key", row.key}, {"columns", columns_to_json(row.columns)}});
    }
    return arr.dump();
}

std::vector<RowRecord> decode_row_batch(const std::string& table, const std::string& body) {
    json arr = parse_or_raise(body, "row batch body");
    if (!arr.is_array()) {
        raise(ErrorKind::parse, "row batch body must be a JSON array");
    }
    std::vector<RowRecord> rows;
    rows.reserve(arr.size());
    for (const auto& item : arr) {
        RowRecord row;
        row.table = table;
        row.key = item.at("key").get<std::string>();
        row.columns = columns_from_json(item.at("columns"));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string encode_row_header(const RowRecord& row, const std::vector<std::string>& inline_blobs) {
    json blob_meta = json::object();
    for (const auto& [column, handle] : row.blob_refs) {
        blob_meta[column] =
            json{{"size", handle.size_bytes}, {"checksum", checksum_hex(handle.checksum)}};
    }
    json header{{"key", row.key},
                {"columns", columns_to_json(row.columns)},
                {"blob_meta", blob_meta},
                {"blobs", inline_blobs}};
    return header.dump();
}

RowHeader decode_row_header(const std::string& table, const std::string& payload) {
    json j = parse_or_raise(payload, "row header");
    RowHeader out;
    out.row.table = table;
    out.row.key = j.at("key").get<std::string>();
    out.row.columns = columns_from_json(j.at("columns"));
    if (j.contains("blob_meta")) {
        for (const auto& [column, meta] : j.at("blob_meta").items()) {
            store::BlobHandle handle;
            handle.table = table;
            handle.key = out.row.key;
            handle.column = column;
            handle.size_bytes = meta.at("size").get<std::uint64_t>();
            handle.checksum = parse_checksum_hex(meta.at("checksum").get<std::string>());
            out.row.blob_refs[column] = std::move(handle);
        }
    }
    if (j.contains("blobs")) {
        out.inline_blobs = j.at("blobs").get<std::vector<std::string>>();
    }
    return out;
}

void append_part(std::string& out, std::string_view payload) {
    out += encode_u64_be(payload.size());
    out.append(payload.data(), payload.size());
}

MultipartRowDecoder::MultipartRowDecoder(std::string table, RowSink sink)
    : table_(std::move(table)), sink_(std::move(sink)) {}

void MultipartRowDecoder::feed(const char* data, std::size_t len) {
    buffer_.append(data, len);
    for (;;) {
        if (buffer_.size() < 8) return;
        const std::uint64_t part_len =
            decode_u64_be(reinterpret_cast<const unsigned char*>(buffer_.data()));
        if (buffer_.size() < 8 + part_len) return;
        std::string payload = buffer_.substr(8, part_len);
        buffer_.erase(0, 8 + static_cast<std::size_t>(part_len));
        consume_part(std::move(payload));
    }
}

void MultipartRowDecoder::consume_part(std::string&& payload) {
    if (!have_header_) {
        RowHeader header = decode_row_header(table_, payload);
        current_ = store::FetchedRow{};
        current_.row = std::move(header.row);
        pending_blobs_ = std::move(header.inline_blobs);
        next_blob_ = 0;
        have_header_ = true;
    } else {
        const std::string& column = pending_blobs_[next_blob_];
        auto ref = current_.row.blob_refs.find(column);
        if (ref == current_.row.blob_refs.end()) {
            raise(ErrorKind::parse, "inline blob '" + column + "' has no metadata entry");
        }
        if (payload.size() != ref->second.size_bytes ||
            fnv1a64(payload) != ref->second.checksum) {
            raise(ErrorKind::checksum_mismatch, "blob '" + current_.row.key + "/" + column +
                                                    "' does not match its stored checksum");
        }
        current_.blob_content[column] = std::move(payload);
        ++next_blob_;
    }
    if (have_header_ && next_blob_ == pending_blobs_.size()) {
        sink_(std::move(current_));
        current_ = store::FetchedRow{};
        pending_blobs_.clear();
        next_blob_ = 0;
        have_header_ = false;
    }
}

void MultipartRowDecoder::finish() {
    if (!buffer_.empty() || have_header_) {
        raise(ErrorKind::connection, "fetch stream ended mid-row; partial results discarded");
    }
}

}  // namespace cloudshift::wire
