#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "complexity.hpp"

namespace ckit {

struct CacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/*
 * On-disk layout, little-endian throughout:
 *   "CKIT" | u8 version (0x01) | u64 max_n | u8 policy | [u64 bound if Bounded] | values[1..max_n]
 * The build is deterministic, so rewriting a cache is byte-identical.
 */
namespace detail {

inline void put_u64(std::ostream& os, uint64_t x) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((x >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

inline uint64_t get_u64(std::istream& is) {
    char b[8];
    is.read(b, 8);
    if (!is) throw CacheError("cache truncated");
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= uint64_t(uint8_t(b[i])) << (8 * i);
    return x;
}

}  // namespace detail

inline void save_table(const ComplexityTable& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CacheError("cannot open cache for writing: " + path);
    os.write("CKIT", 4);
    os.put(char(0x01));
    detail::put_u64(os, t.max_n);
    os.put(char(uint8_t(t.policy)));
    if (t.policy == Policy::Bounded) detail::put_u64(os, t.bound);
    os.write(reinterpret_cast<const char*>(t.values.data() + 1), std::streamsize(t.max_n));
    if (!os) throw CacheError("cache write failed: " + path);
}

inline ComplexityTable load_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CacheError("cannot open cache: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CKIT", 4) != 0) throw CacheError("bad cache magic: " + path);
    int version = is.get();
    if (version != 0x01) throw CacheError("unsupported cache version in " + path);
    ComplexityTable t;
    t.max_n = detail::get_u64(is);
    int pol = is.get();
    if (pol < 0 || pol > 2) throw CacheError("bad policy byte in " + path);
    t.policy = Policy(uint8_t(pol));
    t.bound = t.policy == Policy::Bounded ? detail::get_u64(is) : 0;
    if (t.max_n == 0) throw CacheError("empty table in " + path);
    t.values.assign(t.max_n + 1, 0);
    is.read(reinterpret_cast<char*>(t.values.data() + 1), std::streamsize(t.max_n));
    if (!is || uint64_t(is.gcount()) != t.max_n) throw CacheError("cache truncated: " + path);
    return t;
}

}  // namespace ckit
