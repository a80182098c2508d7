#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/store.hpp"
#include "cloudshift/wire.hpp"

namespace cloudshift::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Keys become directory names; keep them filesystem-safe on every platform.
bool safe_key(std::string_view key) {
    if (key.empty() || key == "." || key == "..") return false;
    for (char c : key) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

std::int64_t now_epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::io, "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write-then-rename so concurrent readers never see a partial file.
void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            raise(ErrorKind::io, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            raise(ErrorKind::io, "write failure on " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

struct StoredRow {
    RowRecord row;
    std::int64_t timestamp_ms = 0;
};

json row_to_json(const RowRecord& row, std::int64_t timestamp_ms) {
    json blobs = json::object();
    for (const auto& [column, handle] : row.blob_refs) {
        blobs[column] =
            json{{"size", handle.size_bytes}, {"checksum", checksum_hex(handle.checksum)}};
    }
    json columns = json::object();
    for (const auto& [name, value] : row.columns) {
        if (is_integer(value)) {
            columns[name] = std::get<std::int64_t>(value);
        } else {
            columns[name] = std::get<std::string>(value);
        }
    }
    return json{
        {"key", row.key}, {"columns", columns}, {"blobs", blobs}, {"timestamp", timestamp_ms}};
}

StoredRow row_from_json(const std::string& table, const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        raise(ErrorKind::io, "corrupt row metadata in table '" + table + "'");
    }
    StoredRow out;
    out.row.table = table;
    out.row.key = j.at("key").get<std::string>();
    for (const auto& [name, value] : j.at("columns").items()) {
        if (value.is_number_integer()) {
            out.row.columns[name] = value.get<std::int64_t>();
        } else {
            out.row.columns[name] = value.get<std::string>();
        }
    }
    if (j.contains("blobs")) {
        for (const auto& [column, meta] : j.at("blobs").items()) {
            BlobHandle handle;
            handle.table = table;
            handle.key = out.row.key;
            handle.column = column;
            handle.size_bytes = meta.at("size").get<std::uint64_t>();
            handle.checksum = parse_checksum_hex(meta.at("checksum").get<std::string>());
            out.row.blob_refs[column] = std::move(handle);
        }
    }
    out.timestamp_ms = j.value("timestamp", std::int64_t{0});
    return out;
}

class LocalStore final : public StoreConnector {
public:
    LocalStore(StoreEndpoint endpoint, const StoreOptions& options)
        : StoreConnector(std::move(endpoint)),
          root_(endpoint_.location),
          cap_bytes_(options.size_cap_bytes) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec || !fs::is_directory(root_)) {
            raise(ErrorKind::io, "cannot create store root '" + root_.string() + "'");
        }
    }

    PutAck put_row(const RowRecord& row, PutMode mode) override {
        std::lock_guard lock(meta_mutex_);
        PutAck ack = put_row_locked(row, mode);
        count_put();
        return ack;
    }

    PutAck put_rows(const std::string& table, const std::vector<RowRecord>& rows,
                    PutMode mode) override {
        std::lock_guard lock(meta_mutex_);
        PutAck ack{now_epoch_ms()};
        for (const RowRecord& row : rows) {
            if (row.table != table) {
                raise(ErrorKind::invalid_argument, "batch row targets a different table");
            }
            ack = put_row_locked(row, mode);
        }
        count_put();
        return ack;
    }

    BlobHandle put_blob(const std::string& table, const std::string& key,
                        const std::string& column, std::string_view bytes,
                        PutMode mode) override {
        check_names(table, key);
        if (!model::is_identifier(column)) {
            raise(ErrorKind::invalid_argument, "blob column '" + column + "' is not a valid name");
        }
        if (bytes.size() > cap_bytes_) {
            raise(ErrorKind::cap_exceeded,
                  "blob of " + std::to_string(bytes.size()) + " bytes exceeds the " +
                      std::to_string(cap_bytes_) + "-byte cap");
        }

        std::lock_guard lock(meta_mutex_);
        fs::path row_path = key_dir(table, key) / "row.json";
        if (!fs::exists(row_path)) {
            raise(ErrorKind::not_found, "row '" + table + "/" + key + "' does not exist");
        }
        fs::path blob_path = key_dir(table, key) / (column + ".blob");
        if (mode == PutMode::create && fs::exists(blob_path)) {
            raise(ErrorKind::conflict,
                  "blob '" + table + "/" + key + "/" + column + "' already exists");
        }

        BlobHandle handle;
        handle.table = table;
        handle.key = key;
        handle.column = column;
        handle.size_bytes = bytes.size();
        handle.checksum = fnv1a64(bytes);

        write_file_atomic(blob_path, bytes);

        StoredRow stored = row_from_json(table, read_file(row_path));
        stored.row.blob_refs[column] = handle;
        write_file_atomic(row_path, row_to_json(stored.row, now_epoch_ms()).dump());
        count_put();
        return handle;
    }

    std::vector<FetchedRow> fetch(const FetchQuery& query) override {
        fs::path table_dir = root_ / query.table;
        if (!fs::is_directory(table_dir)) {
            raise(ErrorKind::not_found, "unknown table '" + query.table + "'");
        }

        std::vector<std::string> keys;
        if (query.keys) {
            keys = *query.keys;
            std::sort(keys.begin(), keys.end());
        } else {
            for (const auto& entry : fs::directory_iterator(table_dir)) {
                if (entry.is_directory()) {
                    keys.push_back(entry.path().filename().string());
                }
            }
            std::sort(keys.begin(), keys.end());
        }

        std::vector<FetchedRow> out;
        out.reserve(keys.size());
        for (const std::string& key : keys) {
            fs::path row_path = table_dir / key / "row.json";
            if (!fs::exists(row_path)) {
                if (query.keys) {
                    raise(ErrorKind::not_found,
                          "row '" + query.table + "/" + key + "' does not exist");
                }
                continue;
            }
            FetchedRow fetched;
            fetched.row = row_from_json(query.table, read_file(row_path)).row;
            for (const std::string& column : query.include_blobs) {
                auto ref = fetched.row.blob_refs.find(column);
                if (ref == fetched.row.blob_refs.end()) continue;
                fetched.blob_content[column] =
                    read_verified_blob(query.table, key, column, ref->second);
            }
            out.push_back(std::move(fetched));
        }
        count_fetch();
        return out;
    }

    std::string fetch_blob(const BlobHandle& handle) override {
        fs::path row_path = key_dir(handle.table, handle.key) / "row.json";
        if (!fs::exists(row_path)) {
            raise(ErrorKind::not_found,
                  "row '" + handle.table + "/" + handle.key + "' does not exist");
        }
        StoredRow stored = row_from_json(handle.table, read_file(row_path));
        auto ref = stored.row.blob_refs.find(handle.column);
        if (ref == stored.row.blob_refs.end()) {
            raise(ErrorKind::not_found, "blob '" + handle.table + "/" + handle.key + "/" +
                                            handle.column + "' does not exist");
        }
        std::string bytes = read_verified_blob(handle.table, handle.key, handle.column, ref->second);
        if (handle.checksum != 0 && handle.checksum != ref->second.checksum) {
            raise(ErrorKind::checksum_mismatch,
                  "stored blob does not match the requested handle's checksum");
        }
        count_fetch();
        return bytes;
    }

    void register_table(const model::TableDef& table) override {
        std::error_code ec;
        fs::create_directories(root_ / table.name, ec);
        if (ec) {
            raise(ErrorKind::io, "cannot create table directory '" + table.name + "'");
        }
        write_file_atomic(root_ / table.name / "schema.json", model::serialize(table));
    }

    void drop_table(const std::string& table) override {
        if (!model::is_identifier(table)) {
            raise(ErrorKind::invalid_argument, "table '" + table + "' is not a valid name");
        }
        std::error_code ec;
        fs::remove_all(root_ / table, ec);
    }

    bool ping() override { return fs::is_directory(root_); }

private:
    PutAck put_row_locked(const RowRecord& row, PutMode mode) {
        check_names(row.table, row.key);
        std::optional<model::TableDef> schema = load_schema(row.table);
        RowRecord to_store = row;
        if (schema) {
            enforce_schema(*schema, to_store);
        }

        fs::path dir = key_dir(row.table, row.key);
        fs::path row_path = dir / "row.json";
        const bool exists = fs::exists(row_path);
        if (exists && mode == PutMode::create) {
            raise(ErrorKind::conflict, "row '" + row.table + "/" + row.key +
                                           "' already exists (pass overwrite or merge)");
        }

        std::int64_t ts = now_epoch_ms();
        if (exists) {
            StoredRow stored = row_from_json(row.table, read_file(row_path));
            if (mode == PutMode::merge) {
                for (const auto& [name, value] : to_store.columns) {
                    stored.row.columns[name] = value;
                }
                to_store.columns = stored.row.columns;
            }
            // Blob sub-resources survive a scalar overwrite.
            to_store.blob_refs = stored.row.blob_refs;
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            raise(ErrorKind::io, "cannot create row directory for '" + row.key + "'");
        }
        write_file_atomic(row_path, row_to_json(to_store, ts).dump());
        return PutAck{ts};
    }

    fs::path key_dir(const std::string& table, const std::string& key) const {
        return root_ / table / key;
    }

    void check_names(const std::string& table, const std::string& key) const {
        if (!model::is_identifier(table)) {
            raise(ErrorKind::invalid_argument, "table '" + table + "' is not a valid name");
        }
        if (!safe_key(key)) {
            raise(ErrorKind::invalid_argument, "key '" + key + "' is not a storable key");
        }
    }

    std::optional<model::TableDef> load_schema(const std::string& table) const {
        fs::path path = root_ / table / "schema.json";
        if (!fs::exists(path)) return std::nullopt;
        return model::parse_table(read_file(path));
    }

    void enforce_schema(const model::TableDef& schema, RowRecord& row) const {
        for (const auto& [name, value] : row.columns) {
            const model::ColumnDef* col = schema.find_column(name);
            if (!col) {
                raise(ErrorKind::invalid_argument,
                      "table '" + schema.name + "' has no column '" + name + "'");
            }
            if (col->max_length && is_text(value) &&
                std::get<std::string>(value).size() > *col->max_length) {
                raise(ErrorKind::length_violation,
                      "value for column '" + name + "' is " +
                          std::to_string(std::get<std::string>(value).size()) +
                          " bytes, max_length is " + std::to_string(*col->max_length));
            }
        }
        if (schema.primary_key.size() == 1) {
            const std::string& pk = schema.primary_key.front();
            auto it = row.columns.find(pk);
            if (it == row.columns.end()) {
                row.columns[pk] = row.key;
            } else if (!(it->second == Scalar{row.key})) {
                raise(ErrorKind::invalid_argument,
                      "primary-key column '" + pk + "' does not equal the row key '" + row.key +
                          "'");
            }
        }
    }

    std::string read_verified_blob(const std::string& table, const std::string& key,
                                   const std::string& column, const BlobHandle& meta) {
        fs::path path = key_dir(table, key) / (column + ".blob");
        if (!fs::exists(path)) {
            raise(ErrorKind::not_found, "blob '" + table + "/" + key + "/" + column +
                                            "' content file is missing");
        }
        std::string bytes = read_file(path);
        if (bytes.size() != meta.size_bytes || fnv1a64(bytes) != meta.checksum) {
            raise(ErrorKind::checksum_mismatch, "blob '" + table + "/" + key + "/" + column +
                                                    "' does not match its stored checksum");
        }
        return bytes;
    }

    fs::path root_;
    std::uint64_t cap_bytes_;
    std::mutex meta_mutex_;
};

}  // namespace

namespace detail {

std::unique_ptr<StoreConnector> make_local_store(StoreEndpoint endpoint,
                                                 const StoreOptions& options) {
    return std::make_unique<LocalStore>(std::move(endpoint), options);
}

}  // namespace detail

}  // namespace cloudshift::store
