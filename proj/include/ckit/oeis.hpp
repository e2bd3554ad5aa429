#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "complexity.hpp"

namespace ckit {

/* b-file line that is neither a comment nor "n value". */
struct BFileError : std::runtime_error {
    size_t line;
    BFileError(size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

struct BFileEntry {
    uint64_t n = 0;
    unsigned value = 0;
};

/* Reads "n value" pairs; '#' starts a comment, blank lines are skipped. */
inline std::vector<BFileEntry> parse_bfile(std::istream& in) {
    std::vector<BFileEntry> out;
    std::string raw;
    size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view sv(raw);
        size_t hash = sv.find('#');
        if (hash != std::string_view::npos) sv = sv.substr(0, hash);
        std::string text(sv);
        std::istringstream ls(text);
        long long n = 0, v = 0;
        if (!(ls >> n)) {
            std::string leftover;
            if (ls.clear(), ls >> leftover) throw BFileError(lineno, "expected an index, got '" + leftover + "'");
            continue;  // nothing but whitespace
        }
        if (!(ls >> v)) throw BFileError(lineno, "missing value after index " + std::to_string(n));
        std::string extra;
        if (ls >> extra) throw BFileError(lineno, "trailing text '" + extra + "'");
        if (n < 1) throw BFileError(lineno, "index must be positive");
        if (v < 0 || v > 255) throw BFileError(lineno, "value out of range");
        out.push_back({uint64_t(n), unsigned(v)});
    }
    return out;
}

inline std::vector<BFileEntry> load_bfile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_bfile(in);
}

struct BFileMismatch {
    uint64_t n = 0;
    unsigned table_value = 0;
    unsigned file_value = 0;
};

struct BFileReport {
    uint64_t compared = 0;
    uint64_t beyond_table = 0;  // entries the table cannot confirm either way
    std::vector<BFileMismatch> mismatches;
    bool ok() const { return mismatches.empty() && compared > 0; }
};

/* Every file entry within the table's range must agree exactly. */
inline BFileReport check_bfile(const ComplexityTable& t, const std::vector<BFileEntry>& entries) {
    BFileReport r;
    for (const BFileEntry& e : entries) {
        if (e.n > t.max_n) {
            ++r.beyond_table;
            continue;
        }
        ++r.compared;
        unsigned mine = t.value(e.n);
        if (mine != e.value && r.mismatches.size() < 16) r.mismatches.push_back({e.n, mine, e.value});
    }
    return r;
}

}  // namespace ckit
