#pragma once

/**
 * Wire-level encoding shared by the HTTP store client, the simulator
 * server, and the on-disk row format.
 *
 * Fetch responses are a length-prefixed part stream: each part is an
 * 8-byte big-endian length followed by that many payload bytes. A row
 * contributes one JSON header part, then one raw part per blob column the
 * header lists under "blobs", in order.
 */

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cloudshift/record.hpp"

namespace cloudshift::wire {

std::string encode_u64_be(std::uint64_t value);
std::uint64_t decode_u64_be(const unsigned char* bytes) noexcept;

/// JSON body of a row PUT: just the scalar columns.
std::string encode_columns(const std::map<std::string, store::Scalar>& columns);
std::map<std::string, store::Scalar> decode_columns(const std::string& body);

/// JSON body of a batch row PUT: array of {key, columns} objects.
std::string encode_row_batch(const std::vector<store::RowRecord>& rows);
std::vector<store::RowRecord> decode_row_batch(const std::string& table, const std::string& body);

/**
 * Row header part: key, scalar columns, blob metadata for every stored
 * blob, and the ordered list of blob columns whose raw bytes follow as
 * parts of their own.
 */
std::string encode_row_header(const store::RowRecord& row,
                              const std::vector<std::string>& inline_blobs);

struct RowHeader {
    store::RowRecord row;
    std::vector<std::string> inline_blobs;
};

RowHeader decode_row_header(const std::string& table, const std::string& payload);

/// Frame one part.
void append_part(std::string& out, std::string_view payload);

/**
 * Incremental decoder for the part stream. Feed it chunks as they arrive;
 * completed rows (header plus any inlined blobs, checksum-verified) are
 * handed to the sink. finish() throws if the stream ends mid-row.
 */
class MultipartRowDecoder {
public:
    using RowSink = std::function<void(store::FetchedRow&&)>;

    MultipartRowDecoder(std::string table, RowSink sink);

    void feed(const char* data, std::size_t len);
    void finish();

private:
    void consume_part(std::string&& payload);

    std::string table_;
    RowSink sink_;
    std::string buffer_;
    bool have_header_ = false;
    store::FetchedRow current_;
    std::vector<std::string> pending_blobs_;
    std::size_t next_blob_ = 0;
};

}  // namespace cloudshift::wire
