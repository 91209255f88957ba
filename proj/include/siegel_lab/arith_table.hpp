#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace siegel_lab {

enum class ValueKind : std::uint8_t { integer = 0, real = 1 };

inline std::string_view to_string(ValueKind k) {
    return k == ValueKind::integer ? "integer" : "real";
}

/// FNV-1a; stable across platforms and runs, used to key cached tables.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Dense table f(1..limit) of one arithmetic function. values[0] is unused
/// and kept at zero so that values[n] == f(n).
template <typename T>
struct ArithTable {
    static_assert(std::is_arithmetic_v<T>);
    static constexpr ValueKind kind =
        std::is_floating_point_v<T> ? ValueKind::real : ValueKind::integer;
    using value_type = T;

    std::string name;
    std::int64_t limit = 0;
    std::vector<T> values;
    std::string provenance;

    ArithTable() = default;
    ArithTable(std::string name_, std::int64_t limit_, std::string provenance_)
        : name(std::move(name_)), limit(limit_), provenance(std::move(provenance_)) {
        if (limit < 1) throw DomainError("ArithTable: limit must be >= 1");
        check_capacity(limit, name.c_str());
        values.assign(static_cast<std::size_t>(limit) + 1, T{});
    }

    T operator[](std::int64_t n) const { return values[static_cast<std::size_t>(n)]; }
    T& operator[](std::int64_t n) { return values[static_cast<std::size_t>(n)]; }

    std::uint64_t provenance_hash() const { return fnv1a64(provenance); }

    bool operator==(const ArithTable& other) const {
        return name == other.name && limit == other.limit && values == other.values &&
               provenance == other.provenance;
    }
};

template <typename T>
void require_limit(const ArithTable<T>& t, std::int64_t x, const char* what) {
    if (t.limit < x) {
        throw LimitMismatch(std::string(what) + ": table '" + t.name + "' has limit " +
                            std::to_string(t.limit) + " < " + std::to_string(x));
    }
}

/// Accumulator type for sums over a table: exact 64-bit for integer tables.
template <typename T>
using sum_t = std::conditional_t<std::is_floating_point_v<T>, double, std::int64_t>;

// ---------------------------------------------------------------------------
// Flat binary format
//
//   "SLTB" | u32 version | u32 name_len | name | i64 limit | u8 kind |
//   u8 elem_size | u64 provenance_hash | values[1..limit] (native endian)
// ---------------------------------------------------------------------------

inline constexpr char kTableMagic[4] = {'S', 'L', 'T', 'B'};
inline constexpr std::uint32_t kTableVersion = 1;

namespace detail {

template <typename V>
void put(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
bool get(std::istream& is, V& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(V)));
}

}  // namespace detail

template <typename T>
void write_table(const ArithTable<T>& t, std::ostream& os) {
    os.write(kTableMagic, 4);
    detail::put(os, kTableVersion);
    detail::put(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::put(os, t.limit);
    detail::put(os, static_cast<std::uint8_t>(t.kind));
    detail::put(os, static_cast<std::uint8_t>(sizeof(T)));
    detail::put(os, t.provenance_hash());
    os.write(reinterpret_cast<const char*>(t.values.data() + 1),
             static_cast<std::streamsize>(sizeof(T) * static_cast<std::size_t>(t.limit)));
}

/// Reads a table written by write_table. Returns nullopt when the stream does
/// not hold a table of element type T with the expected provenance.
template <typename T>
std::optional<ArithTable<T>> read_table(std::istream& is, const std::string& provenance) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0) return std::nullopt;
    std::uint32_t version = 0, name_len = 0;
    if (!detail::get(is, version) || version != kTableVersion) return std::nullopt;
    if (!detail::get(is, name_len) || name_len > 4096) return std::nullopt;
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) return std::nullopt;
    std::int64_t limit = 0;
    std::uint8_t kind = 0, elem = 0;
    std::uint64_t hash = 0;
    if (!detail::get(is, limit) || !detail::get(is, kind) || !detail::get(is, elem) ||
        !detail::get(is, hash)) {
        return std::nullopt;
    }
    if (limit < 1 || kind != static_cast<std::uint8_t>(ArithTable<T>::kind) ||
        elem != sizeof(T) || hash != fnv1a64(provenance)) {
        return std::nullopt;
    }
    ArithTable<T> t(std::move(name), limit, provenance);
    if (!is.read(reinterpret_cast<char*>(t.values.data() + 1),
                 static_cast<std::streamsize>(sizeof(T) * static_cast<std::size_t>(limit)))) {
        return std::nullopt;
    }
    return t;
}

template <typename T>
void save_table(const ArithTable<T>& t, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write table cache: " + tmp);
        write_table(t, os);
    }
    std::filesystem::rename(tmp, path);
}

template <typename T>
std::optional<ArithTable<T>> load_table(const std::filesystem::path& path,
                                        const std::string& provenance) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    return read_table<T>(is, provenance);
}

}  // namespace siegel_lab
