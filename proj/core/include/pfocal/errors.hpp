#pragma once

#include <stdexcept>
#include <string>

namespace pfocal {

/// Invalid or inconsistent configuration (bad key, out-of-range value).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (CSV rows, waveform files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// All particle weights underflowed to zero at the given scan.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int scan_index, const std::string& what)
        : std::runtime_error(what), scan_index_(scan_index) {}

    [[nodiscard]] int scan_index() const { return scan_index_; }

private:
    int scan_index_;
};

}  // namespace pfocal
