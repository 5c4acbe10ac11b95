// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/version.hpp"

namespace aggdiff {

inline std::uint64_t fnv1a64(std::string const& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV emitter: header row, numeric rows at 17 significant digits, and a
/// trailing comment line pinning the tool version and config hash.
class CsvWriter {
  public:
    CsvWriter(std::string const& path, std::string const& header, std::uint64_t config_hash)
        : out_(path), hash_(config_hash)
    {
        if (!out_)
            throw std::runtime_error("cannot write " + path);
        out_ << header << "\n";
    }

    void row(std::vector<double> const& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << format_value(values[i]);
        }
        out_ << "\n";
    }

    void raw_row(std::string const& line) { out_ << line << "\n"; }

    ~CsvWriter()
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "# aggdiff %s, config %016llx", version_string,
                      static_cast<unsigned long long>(hash_));
        out_ << buf << "\n";
    }

  private:
    std::ofstream out_;
    std::uint64_t hash_;
};

}  // namespace aggdiff
