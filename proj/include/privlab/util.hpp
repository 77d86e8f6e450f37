#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace privlab {

using Bytes16 = std::array<std::uint8_t, 16>;

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto its exit-code contract: input/validation
// problems exit 1, runtime/I-O problems exit 2.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input document; carries the path of the offending element.
class ParseError : public Error {
public:
    ParseError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Dangling cross-reference inside an otherwise well-formed document.
class ReferenceError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Hex helpers
// ---------------------------------------------------------------------------

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string to_hex(const Bytes16& bytes);
Bytes16 bytes16_from_hex(const std::string& hex);  // throws ParseError

// ---------------------------------------------------------------------------
// SipHash-2-4 with 128-bit output. Fixed keyed PRF used for all identifier
// derivation (RPIDs, rotating link-layer addresses).
// ---------------------------------------------------------------------------

Bytes16 siphash128(const Bytes16& key, std::span<const std::uint8_t> message);
Bytes16 siphash128_u64(const Bytes16& key, std::uint64_t value);

// SHA-256 of a byte string, lowercase hex. Used for input content hashes in
// run reports.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(const std::string& data);

// Whole-file read/write; throw IoError on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace privlab
