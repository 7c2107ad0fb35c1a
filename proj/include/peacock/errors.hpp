#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peacock {

// Base for all domain errors so callers can catch one type at the CLI edge.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownService : Error {
    explicit UnknownService(const std::string& service)
        : Error("unknown service: " + service), service(service) {}
    std::string service;
};

struct AlreadyInstalled : Error {
    AlreadyInstalled() : Error("agent hooks already installed") {}
};

struct InvalidPcrIndex : Error {
    explicit InvalidPcrIndex(int index)
        : Error("PCR index out of range [0,23]: " + std::to_string(index)), index(index) {}
    int index;
};

struct BadNonceLength : Error {
    explicit BadNonceLength(std::size_t got)
        : Error("nonce must be 32 bytes, got " + std::to_string(got)) {}
};

struct MalformedLine : Error {
    MalformedLine(std::size_t offset, const std::string& expected)
        : Error("malformed log line at byte " + std::to_string(offset) + ": expected " + expected),
          offset(offset),
          expected(expected) {}
    std::size_t offset;
    std::string expected;
};

struct ScenarioReferenceError : Error {
    explicit ScenarioReferenceError(const std::string& what) : Error(what) {}
};

struct ScenarioFormatError : Error {
    explicit ScenarioFormatError(const std::string& what) : Error(what) {}
};

struct LogMissing : Error {
    LogMissing() : Error("no exported log found on the ESP") {}
};

struct HeaderMissing : Error {
    HeaderMissing() : Error("log does not start with a header record") {}
};

struct TransportError : Error {
    explicit TransportError(const std::string& what) : Error(what) {}
};

struct DuplicateDevice : Error {
    explicit DuplicateDevice(const std::string& device_id)
        : Error("device already enrolled: " + device_id) {}
};

struct UnknownDeviceError : Error {
    explicit UnknownDeviceError(const std::string& device_id)
        : Error("device not enrolled: " + device_id) {}
};

struct RuleSchemaError : Error {
    RuleSchemaError(const std::string& path, const std::string& message)
        : Error("rule schema error at " + path + ": " + message), path(path), message(message) {}
    std::string path;
    std::string message;
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& what) : Error(what) {}
};

}  // namespace peacock
