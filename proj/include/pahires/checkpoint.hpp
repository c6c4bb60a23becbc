#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

// Flat binary parameter container, little-endian throughout:
//
//   magic   "PAHC" (4 bytes)
//   version u32    (currently 1)
//   meta    u64 length + UTF-8 bytes (free-form descriptor, may be empty)
//   count   u64    number of records
//   record: u64 name length + name bytes
//           u64 rank, u64 dims[rank]
//           f64 payload[prod(dims)]
//
// Records are sorted by name, so identical contents produce identical bytes.
namespace checkpoint {

inline constexpr char kMagic[4] = {'P', 'A', 'H', 'C'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error(ErrorKind::data, "checkpoint: truncated " + what);
    return v;
}

}  // namespace detail

inline void save(std::ostream& os, const std::map<std::string, Tensor>& records,
                 const std::string& meta = "") {
    os.write(kMagic, 4);
    detail::put<std::uint32_t>(os, kVersion);
    detail::put<std::uint64_t>(os, meta.size());
    os.write(meta.data(), std::streamsize(meta.size()));
    detail::put<std::uint64_t>(os, records.size());
    for (const auto& [name, t] : records) {
        detail::put<std::uint64_t>(os, name.size());
        os.write(name.data(), std::streamsize(name.size()));
        detail::put<std::uint64_t>(os, t.rank());
        for (std::size_t d : t.shape()) detail::put<std::uint64_t>(os, d);
        os.write(reinterpret_cast<const char*>(t.data()),
                 std::streamsize(t.size() * sizeof(double)));
    }
}

inline void save(const std::string& path,
                 const std::map<std::string, Tensor>& records,
                 const std::string& meta = "") {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::data, "cannot open for write: " + path);
    save(os, records, meta);
    if (!os) throw Error(ErrorKind::data, "write failed: " + path);
}

inline std::map<std::string, Tensor> load(std::istream& is, std::string* meta) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw Error(ErrorKind::data, "checkpoint: bad magic");
    auto version = detail::get<std::uint32_t>(is, "version");
    if (version != kVersion)
        throw Error(ErrorKind::data, "checkpoint: unsupported version " +
                                         std::to_string(version));
    auto meta_len = detail::get<std::uint64_t>(is, "meta length");
    std::string m(meta_len, '\0');
    is.read(m.data(), std::streamsize(meta_len));
    if (!is) throw Error(ErrorKind::data, "checkpoint: truncated meta");
    if (meta) *meta = std::move(m);

    auto count = detail::get<std::uint64_t>(is, "record count");
    std::map<std::string, Tensor> records;
    for (std::uint64_t r = 0; r < count; ++r) {
        auto name_len = detail::get<std::uint64_t>(is, "name length");
        std::string name(name_len, '\0');
        is.read(name.data(), std::streamsize(name_len));
        if (!is) throw Error(ErrorKind::data, "checkpoint: truncated name");
        auto rank = detail::get<std::uint64_t>(is, "rank");
        std::vector<std::size_t> shape;
        for (std::uint64_t d = 0; d < rank; ++d)
            shape.push_back(std::size_t(detail::get<std::uint64_t>(is, "dim")));
        Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.data()),
                std::streamsize(t.size() * sizeof(double)));
        if (!is)
            throw Error(ErrorKind::data,
                        "checkpoint: truncated payload for " + name);
        records.emplace(std::move(name), std::move(t));
    }
    return records;
}

inline std::map<std::string, Tensor> load(const std::string& path,
                                          std::string* meta = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::data, "cannot open: " + path);
    return load(is, meta);
}

}  // namespace checkpoint
}  // namespace pahires
